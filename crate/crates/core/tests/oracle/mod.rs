//! Independent reference computations: plain loops over raw mesh data, no
//! compensated sums, no cached kernel.
#![allow(dead_code)]

use std::collections::BTreeSet;

use fplap_core::manifold::{ManifoldMesh, MeshOrigin};

/// Distance recomputed from coordinates for the analytic built-ins.
pub fn raw_distance(mesh: &ManifoldMesh, i: usize, j: usize) -> f64 {
    let (a, b) = (mesh.coords()[i], mesh.coords()[j]);
    match mesh.origin() {
        MeshOrigin::Sphere { .. } => {
            // half-chord form, switched to the antipode's chord when far apart
            let norm = |x: [f64; 3]| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let diff = norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]]) / 2.0;
            if diff < 0.7 {
                2.0 * diff.asin()
            } else {
                std::f64::consts::PI - 2.0 * (norm([a[0] + b[0], a[1] + b[1], a[2] + b[2]]) / 2.0).asin()
            }
        }
        MeshOrigin::FlatTorus { .. } => {
            let mut best = f64::INFINITY;
            for sx in [-1.0, 0.0, 1.0] {
                for sy in [-1.0, 0.0, 1.0] {
                    let dx = a[0] - b[0] + sx;
                    let dy = a[1] - b[1] + sy;
                    best = best.min((dx * dx + dy * dy).sqrt());
                }
            }
            best
        }
        _ => mesh.distance(i, j),
    }
}

/// Spherical excess of a unit-sphere triangle by L'Huilier's formula.
pub fn lhuilier_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let ang = |x: [f64; 3], y: [f64; 3]| (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]).clamp(-1.0, 1.0).acos();
    let (sa, sb, sc) = (ang(b, c), ang(a, c), ang(a, b));
    let s = 0.5 * (sa + sb + sc);
    let t = (s / 2.0).tan() * ((s - sa) / 2.0).tan() * ((s - sb) / 2.0).tan() * ((s - sc) / 2.0).tan();
    4.0 * t.max(0.0).sqrt().atan()
}

/// Lumped measure recomputed from the triangles.
pub fn raw_measure(mesh: &ManifoldMesh) -> Vec<f64> {
    match mesh.origin() {
        MeshOrigin::FlatTorus { n_per_side } => vec![1.0 / (n_per_side * n_per_side) as f64; mesh.len()],
        MeshOrigin::Sphere { .. } => {
            let mut mu = vec![0.0; mesh.len()];
            for t in mesh.triangles() {
                let c = mesh.coords();
                let area = lhuilier_area(c[t[0]], c[t[1]], c[t[2]]);
                for &v in t {
                    mu[v] += area / 3.0;
                }
            }
            mu
        }
        _ => mesh.measure().to_vec(),
    }
}

/// Mean length of incident edges, edges taken from the triangle list.
pub fn raw_mean_edge(mesh: &ManifoldMesh) -> Vec<f64> {
    let mut edges = BTreeSet::new();
    for t in mesh.triangles() {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let mut sum = vec![0.0; mesh.len()];
    let mut cnt = vec![0.0; mesh.len()];
    for (a, b) in edges {
        let d = raw_distance(mesh, a, b);
        sum[a] += d;
        sum[b] += d;
        cnt[a] += 1.0;
        cnt[b] += 1.0;
    }
    sum.iter().zip(&cnt).map(|(s, c)| s / c).collect()
}

/// Kernel weights from scratch with the default near-diagonal clamp.
pub fn raw_weights(mesh: &ManifoldMesh, s: f64, p: f64, c_floor: f64) -> Vec<Vec<f64>> {
    let n = mesh.len();
    let mu = raw_measure(mesh);
    let h = raw_mean_edge(mesh);
    let expo = mesh.dim() as f64 + p * s;
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = raw_distance(mesh, i, j).max(c_floor * (h[i] + h[j]) / 2.0);
                w[i][j] = mu[i] * mu[j] / d.powf(expo);
            }
        }
    }
    w
}

pub fn naive_seminorm(w: &[Vec<f64>], u: &[f64], p: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        for j in 0..u.len() {
            if i != j {
                s += (u[i] - u[j]).abs().powf(p) * w[i][j];
            }
        }
    }
    s
}

/// Terms of the pairing have mixed signs, so the total is accumulated with
/// Neumaier's correction to keep the reference from being the limiting error.
pub fn naive_pairing(w: &[Vec<f64>], u: &[f64], v: &[f64], p: f64) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for i in 0..u.len() {
        for j in 0..u.len() {
            if i != j {
                let d = u[i] - u[j];
                let x = d.abs().powf(p - 2.0) * d * (v[i] - v[j]) * w[i][j];
                let t = s + x;
                c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
                s = t;
            }
        }
    }
    s + c
}

pub fn naive_operator(w: &[Vec<f64>], mu: &[f64], u: &[f64], p: f64) -> Vec<f64> {
    (0..u.len())
        .map(|i| {
            let mut s = 0.0;
            for j in 0..u.len() {
                if i != j {
                    let d = u[i] - u[j];
                    s += d.abs().powf(p - 2.0) * d * w[i][j];
                }
            }
            2.0 * s / mu[i]
        })
        .collect()
}

/// `ψ` from raw data; `big_f(i, t)` is the primitive of the reaction term.
pub fn naive_energy(
    w: &[Vec<f64>],
    mu: &[f64],
    interior: &[usize],
    u: &[f64],
    p: f64,
    big_f: impl Fn(usize, f64) -> f64,
) -> f64 {
    let i1 = naive_seminorm(w, u, p) / p;
    let i2: f64 = interior.iter().map(|&i| u[i].abs().powf(p) * mu[i]).sum::<f64>() / p;
    let k: f64 = interior.iter().map(|&i| big_f(i, u[i]) * mu[i]).sum();
    i1 + i2 - k
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Generalized eigen oracle for `p = q = 2`: the largest embedding ratio is
/// `1/λ_min` of `A x = λ M x`, with `A = 2(D − W)` restricted to `Ω` and `M = diag μ`.
pub fn embedding_constant_p2(w: &[Vec<f64>], mu: &[f64], interior: &[usize]) -> f64 {
    use nalgebra::DMatrix;
    let m = interior.len();
    let n = w.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (r, &i) in interior.iter().enumerate() {
        let d: f64 = (0..n).map(|j| w[i][j]).sum();
        for (c, &j) in interior.iter().enumerate() {
            a[(r, c)] = if r == c { 2.0 * d } else { -2.0 * w[i][j] };
        }
    }
    // symmetric form M^{-1/2} A M^{-1/2}
    for r in 0..m {
        for c in 0..m {
            a[(r, c)] /= (mu[interior[r]] * mu[interior[c]]).sqrt();
        }
    }
    let eig = a.symmetric_eigen();
    let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    1.0 / lmin
}
