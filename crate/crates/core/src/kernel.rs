//! The singular nonlocal kernel `W_ij = μ_i μ_j / max(d_ij, d_floor)^{N+ps}` and
//! the discrete operators built on it.
//!
//! All pair sums run over the upper triangle and are doubled; the summand is
//! exactly symmetric in `(i, j)` (`signed_pow` is exactly odd), so this equals the
//! full ordered double sum `Σ_{i≠j}` in exact arithmetic.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, invalid, Result};
use crate::manifold::ManifoldMesh;
use crate::matrix::DenseMatrix;
use crate::numeric::{powf, signed_pow, CompensatedSum};

/// Near-diagonal clamp: `d_floor(i,j) = c_floor · (h_i + h_j)/2`, with `h_i` the
/// mean incident edge length. `c_floor = 0` disables clamping.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SingularityPolicy {
    pub c_floor: f64,
}

impl Default for SingularityPolicy {
    fn default() -> Self {
        Self { c_floor: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KernelParams {
    pub s: f64,
    pub p: f64,
    pub policy: SingularityPolicy,
}

impl KernelParams {
    pub fn new(s: f64, p: f64) -> Self {
        Self { s, p, policy: SingularityPolicy::default() }
    }

    /// Checks `0 < s < 1`, `1 < p < ∞` and `N > ps`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(invalid(format!("s must lie in (0, 1) (got s = {})", self.s)));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(invalid(format!("p must lie in (1, ∞) (got p = {})", self.p)));
        }
        if !(dim as f64 > self.p * self.s) {
            return Err(invalid(format!(
                "N > ps is required (N = {dim}, p·s = {})",
                self.p * self.s
            )));
        }
        if !(self.policy.c_floor >= 0.0 && self.policy.c_floor.is_finite()) {
            return Err(invalid(format!("c_floor must be finite and >= 0 (got {})", self.policy.c_floor)));
        }
        Ok(())
    }

    /// Critical exponent `p*_s = Np/(N − ps)`.
    pub fn critical_exponent(&self, dim: usize) -> f64 {
        let n = dim as f64;
        if self.s * self.p < n {
            n * self.p / (n - self.s * self.p)
        } else {
            f64::INFINITY
        }
    }
}

/// Prepared kernel entries for a mesh; rows can be produced independently
/// (e.g. in parallel) and combined with [`KernelAssembler::finish`].
#[derive(Debug)]
pub struct KernelAssembler<'m> {
    mesh: &'m ManifoldMesh,
    params: KernelParams,
    exponent: f64,
    h: Vec<f64>,
}

impl<'m> KernelAssembler<'m> {
    pub fn new(mesh: &'m ManifoldMesh, params: KernelParams) -> Result<Self> {
        params.validate(mesh.dim())?;
        Ok(Self {
            mesh,
            params,
            exponent: mesh.dim() as f64 + params.p * params.s,
            h: mesh.mean_incident_edge_length(),
        })
    }

    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    /// `W_ij`; evaluated in canonical `(min, max)` order so `entry(i,j)` and
    /// `entry(j,i)` agree bit for bit.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let mu = self.mesh.measure();
        let floor = self.params.policy.c_floor * (self.h[a] + self.h[b]) / 2.0;
        let d = self.mesh.distance(a, b).max(floor);
        mu[a] * mu[b] / powf(d, self.exponent)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.len()).map(|j| self.entry(i, j)).collect()
    }

    pub fn finish(self, rows: Vec<Vec<f64>>) -> Result<KernelMatrix> {
        let n = self.len();
        check_len(n, rows.len())?;
        let mut data = Vec::with_capacity(n * n);
        for (i, r) in rows.into_iter().enumerate() {
            check_len(n, r.len())?;
            if let Some(j) = r.iter().position(|w| !w.is_finite() || *w < 0.0) {
                return Err(invalid(format!(
                    "kernel weight W[{i}][{j}] is not finite (coincident vertices); raise c_floor"
                )));
            }
            data.extend(r);
        }
        Ok(KernelMatrix {
            weights: DenseMatrix::from_row_major(n, data).expect("n*n buffer"),
            params: self.params,
            dim: self.mesh.dim(),
            exponent: self.exponent,
            measure: self.mesh.measure().to_vec(),
        })
    }
}

/// Dense symmetric nonlocal weights with the operator parameters `(s, p)`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    weights: DenseMatrix,
    params: KernelParams,
    dim: usize,
    exponent: f64,
    measure: Vec<f64>,
}

/// Serial kernel assembly.
pub fn assemble_kernel(mesh: &ManifoldMesh, params: KernelParams) -> Result<KernelMatrix> {
    let asm = KernelAssembler::new(mesh, params)?;
    let rows = (0..asm.len()).map(|i| asm.row(i)).collect();
    asm.finish(rows)
}

impl KernelMatrix {
    /// Kernel from explicit weights (symmetric, zero diagonal) and measure.
    pub fn from_weights(weights: DenseMatrix, measure: Vec<f64>, dim: usize, params: KernelParams) -> Result<Self> {
        params.validate(dim)?;
        check_len(weights.dim(), measure.len())?;
        let n = weights.dim();
        for i in 0..n {
            if weights.get(i, i) != 0.0 {
                return Err(invalid(format!("kernel diagonal W[{i}][{i}] must be 0")));
            }
            for j in 0..n {
                let w = weights.get(i, j);
                if !(w.is_finite() && w >= 0.0) || w != weights.get(j, i) {
                    return Err(invalid(format!("kernel weight W[{i}][{j}] is negative, non-finite or asymmetric")));
                }
            }
        }
        Ok(Self { weights, params, dim, exponent: dim as f64 + params.p * params.s, measure })
    }

    pub fn len(&self) -> usize {
        self.weights.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights.get(i, j)
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    pub fn s(&self) -> f64 {
        self.params.s
    }

    pub fn p(&self) -> f64 {
        self.params.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N + ps`.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn critical_exponent(&self) -> f64 {
        self.params.critical_exponent(self.dim)
    }

    /// `[u]^p = Σ_{i≠j} |u_i − u_j|^p W_ij` (the p-th power, not the root).
    pub fn gagliardo_seminorm_p(&self, u: &[f64]) -> Result<f64> {
        check_len(self.len(), u.len())?;
        Ok(self.pair_sum(u, u))
    }

    /// `Σ_{i≠j} |u_i − u_j|^{p−2}(u_i − u_j)(v_i − v_j) W_ij`.
    pub fn weak_form_pairing(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_len(self.len(), u.len())?;
        check_len(self.len(), v.len())?;
        Ok(self.pair_sum(u, v))
    }

    fn pair_sum(&self, u: &[f64], v: &[f64]) -> f64 {
        let p = self.params.p;
        let n = self.len();
        let mut acc = CompensatedSum::new();
        for i in 0..n {
            let row = self.weights.row(i);
            for j in (i + 1)..n {
                acc.add(signed_pow(u[i] - u[j], p) * (v[i] - v[j]) * row[j]);
            }
        }
        2.0 * acc.value()
    }

    /// `μ_i · ((−Δ)^s_p u)_i = 2 Σ_{j≠i} |u_i − u_j|^{p−2}(u_i − u_j) W_ij`.
    pub fn operator_times_measure(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), u.len())?;
        let p = self.params.p;
        let n = self.len();
        let mut acc = vec![CompensatedSum::new(); n];
        for i in 0..n {
            let row = self.weights.row(i);
            for j in (i + 1)..n {
                let t = signed_pow(u[i] - u[j], p) * row[j];
                acc[i].add(t);
                acc[j].add(-t);
            }
        }
        Ok(acc.iter().map(|a| 2.0 * a.value()).collect())
    }

    /// Pointwise discrete fractional p-Laplacian
    /// `((−Δ)^s_p u)_i = (2/μ_i) Σ_{j≠i} |u_i − u_j|^{p−2}(u_i − u_j) W_ij`.
    /// Defined on every vertex, exterior included.
    pub fn apply_fractional_p_laplacian(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut l = self.operator_times_measure(u)?;
        for (li, mi) in l.iter_mut().zip(&self.measure) {
            *li /= mi;
        }
        Ok(l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{build_flat_torus, build_sphere};
    use crate::numeric::rel_diff;

    fn toy(s: f64, p: f64) -> KernelMatrix {
        let w = DenseMatrix::symmetric_from_fn(2, |_, _| 1.0);
        KernelMatrix::from_weights(w, vec![1.0, 1.0], 2, KernelParams::new(s, p)).unwrap()
    }

    #[test]
    fn parameter_domain_errors_name_the_constraint() {
        let m = build_flat_torus(4).unwrap();
        let e = assemble_kernel(&m, KernelParams::new(1.2, 2.0)).unwrap_err();
        assert!(format!("{e}").contains("s must lie in (0, 1)"));
        let e = assemble_kernel(&m, KernelParams::new(0.5, 1.0)).unwrap_err();
        assert!(format!("{e}").contains("p must lie in (1, ∞)"));
        let e = assemble_kernel(&m, KernelParams::new(0.9, 3.0)).unwrap_err();
        assert!(format!("{e}").contains("N > ps"));
    }

    #[test]
    fn two_vertex_toy_mesh_has_unit_weight() {
        let coords = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        let d = DenseMatrix::symmetric_from_fn(2, |_, _| 1.0);
        let mesh = ManifoldMesh::from_raw_parts(coords, 2, vec![1.0, 1.0], d, vec![]).unwrap();
        for &(s, p) in &[(0.25, 1.5), (0.5, 2.0), (0.6, 3.0)] {
            let k = assemble_kernel(&mesh, KernelParams::new(s, p)).unwrap();
            assert_eq!(k.weight(0, 1), 1.0);
            assert_eq!(k.weight(1, 0), 1.0);
            assert_eq!(k.weight(0, 0), 0.0);
        }
    }

    #[test]
    fn halving_distance_scales_weight_by_power_law() {
        let m = build_flat_torus(8).unwrap();
        let k = assemble_kernel(&m, KernelParams::new(0.5, 2.0)).unwrap();
        // vertex 0 at (0,0); vertex 2 at (0.25,0) and vertex 4 at (0.5,0)
        let mu = m.measure();
        let near = k.weight(0, 2) / (mu[0] * mu[2]);
        let far = k.weight(0, 4) / (mu[0] * mu[4]);
        assert!(rel_diff(near / far, 8.0, 1.0) < 1e-12);
    }

    #[test]
    fn toy_seminorm_and_operator_by_hand() {
        let k = toy(0.5, 2.0);
        assert_eq!(k.gagliardo_seminorm_p(&[0.0, 1.0]).unwrap(), 2.0);
        assert_eq!(k.apply_fractional_p_laplacian(&[0.0, 1.0]).unwrap(), vec![-2.0, 2.0]);
        assert_eq!(k.gagliardo_seminorm_p(&[3.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn size_mismatch_is_reported() {
        let k = toy(0.5, 2.0);
        assert!(k.gagliardo_seminorm_p(&[1.0]).is_err());
        assert!(k.weak_form_pairing(&[1.0, 2.0], &[1.0]).is_err());
        assert!(k.apply_fractional_p_laplacian(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn sphere_kernel_is_finite_and_peaks_at_closest_pair() {
        let m = build_sphere(2).unwrap();
        let k = assemble_kernel(&m, KernelParams::new(0.5, 2.0)).unwrap();
        let h = m.mean_incident_edge_length();
        let n = m.len();
        let mut best = (0.0f64, 0usize, 0usize);
        let mut min_eff = f64::INFINITY;
        for i in 0..n {
            assert_eq!(k.weight(i, i), 0.0);
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = k.weight(i, j);
                assert!(w.is_finite() && w > 0.0);
                assert_eq!(w, k.weight(j, i));
                if w > best.0 {
                    best = (w, i, j);
                }
                let eff = m.distance(i, j).max(0.5 * (h[i] + h[j]) / 2.0);
                min_eff = min_eff.min(eff);
            }
        }
        let (_, i, j) = best;
        let eff = m.distance(i, j).max(0.5 * (h[i] + h[j]) / 2.0);
        // the largest weight sits at a pair whose clamped distance is (near) minimal;
        // measures vary by a few percent so allow the effective distance to be within 10%
        assert!(eff <= 1.1 * min_eff, "{eff} vs {min_eff}");
    }

    #[test]
    fn clamping_engages_below_the_floor() {
        let m = build_flat_torus(8).unwrap();
        let mut params = KernelParams::new(0.5, 2.0);
        params.policy.c_floor = 4.0;
        let k = assemble_kernel(&m, params).unwrap();
        let h = m.mean_incident_edge_length();
        let floor = 4.0 * (h[0] + h[1]) / 2.0;
        let expected = m.measure()[0] * m.measure()[1] / powf(floor, 3.0);
        assert!(rel_diff(k.weight(0, 1), expected, 1e-300) < 1e-14);
        // neighbours at distance 1/8 and 2/8 are both clamped to the same floor
        assert_eq!(k.weight(0, 1), k.weight(0, 2));
    }

    #[test]
    fn coincident_vertices_without_floor_are_rejected() {
        let coords = vec![[0.0; 3], [0.0; 3], [1.0, 0.0, 0.0]];
        let d = DenseMatrix::symmetric_from_fn(3, |i, j| if i + j == 1 { 0.0 } else { 1.0 });
        let mesh = ManifoldMesh::from_raw_parts(coords, 2, vec![1.0; 3], d, vec![]).unwrap();
        assert!(assemble_kernel(&mesh, KernelParams::new(0.5, 2.0)).is_err());
    }
}
