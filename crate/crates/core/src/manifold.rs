//! Sampled compact manifolds: vertex sets with lumped Riemannian measure and
//! pairwise geodesic distances, plus Dirichlet domains on them.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng as _;

use crate::error::{invalid, Error, Result};
use crate::matrix::DenseMatrix;
use crate::numeric::csum;
use crate::rng::rng_from_seed;

/// Largest icosphere subdivision level accepted by [`build_sphere`].
/// Level 4 has 2562 vertices; the dense distance matrix already takes ~52 MB.
pub const DEFAULT_MAX_SPHERE_LEVEL: u32 = 4;

/// Where a mesh came from. Analytic built-ins carry exact distances.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum MeshOrigin {
    Sphere { level: u32 },
    FlatTorus { n_per_side: usize },
    /// Triangle soup with edge-graph distances.
    Loaded,
    /// Assembled from raw parts without validation.
    Raw,
}

impl MeshOrigin {
    pub fn is_analytic(&self) -> bool {
        matches!(self, MeshOrigin::Sphere { .. } | MeshOrigin::FlatTorus { .. })
    }
}

/// A sampled compact manifold without boundary.
///
/// Immutable after construction; safe to share between concurrent solves.
#[derive(Debug, Clone)]
pub struct ManifoldMesh {
    coords: Vec<[f64; 3]>,
    dim: usize,
    measure: Vec<f64>,
    dist: DenseMatrix,
    triangles: Vec<[usize; 3]>,
    edges: Vec<(usize, usize)>,
    origin: MeshOrigin,
}

impl ManifoldMesh {
    /// Assembles a mesh from its parts without checking any invariant.
    /// Used for toy meshes and fault injection; run [`validate_mesh`] on the result.
    pub fn from_raw_parts(
        coords: Vec<[f64; 3]>,
        dim: usize,
        measure: Vec<f64>,
        dist: DenseMatrix,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let n = coords.len();
        crate::error::check_len(n, measure.len())?;
        crate::error::check_len(n, dist.dim())?;
        if dim == 0 {
            return Err(invalid("intrinsic dimension must be positive"));
        }
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&v| v >= n)) {
            return Err(invalid(format!("triangle {t:?} references a vertex outside 0..{n}")));
        }
        let edges = unique_edges(&triangles);
        Ok(Self { coords, dim, measure, dist, triangles, edges, origin: MeshOrigin::Raw })
    }

    /// Closed triangle surface with lumped one-third areas and edge-graph geodesics.
    ///
    /// Every edge must be shared by exactly two triangles. Graph distances are
    /// shortest paths over the edges weighted by Euclidean length, an upper bound
    /// on the true polyhedral geodesic distance.
    pub fn from_triangles(coords: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = coords.len();
        if n < 4 || triangles.len() < 4 {
            return Err(Error::MeshValidation(format!(
                "a closed surface needs at least 4 vertices and 4 triangles (got {n}, {})",
                triangles.len()
            )));
        }
        for (k, t) in triangles.iter().enumerate() {
            if let Some(&v) = t.iter().find(|&&v| v >= n) {
                return Err(Error::MeshValidation(format!(
                    "triangle {k} references vertex {v}, but the mesh has {n} vertices"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::MeshValidation(format!("triangle {k} {t:?} repeats a vertex")));
            }
        }
        let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in &triangles {
            for (a, b) in tri_edges(t) {
                *edge_count.entry(ordered(a, b)).or_insert(0) += 1;
            }
        }
        if let Some((&(a, b), &c)) = edge_count.iter().find(|(_, &c)| c != 2) {
            let what = if c == 1 { "open boundary" } else { "non-manifold" };
            return Err(Error::MeshValidation(format!(
                "{what} edge ({a}, {b}) is shared by {c} triangle(s); expected exactly 2"
            )));
        }

        let mut area_acc = vec![Vec::new(); n];
        for t in &triangles {
            let third = flat_triangle_area(&coords[t[0]], &coords[t[1]], &coords[t[2]]) / 3.0;
            for &v in t {
                area_acc[v].push(third);
            }
        }
        let measure: Vec<f64> = area_acc.into_iter().map(csum).collect();
        if let Some(i) = measure.iter().position(|&m| !(m > 0.0)) {
            return Err(Error::MeshValidation(format!(
                "vertex {i} has non-positive lumped measure (unused vertex or degenerate triangles)"
            )));
        }

        let edges: Vec<(usize, usize)> = edge_count.keys().copied().collect();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(a, b) in &edges {
            let len = euclid(&coords[a], &coords[b]);
            if !(len > 0.0) {
                return Err(Error::MeshValidation(format!(
                    "edge ({a}, {b}) has zero length (coincident vertices)"
                )));
            }
            adj[a].push((b, len));
            adj[b].push((a, len));
        }

        let mut data = vec![0.0; n * n];
        for src in 0..n {
            let row = dijkstra(&adj, src);
            if let Some(j) = row.iter().position(|d| d.is_infinite()) {
                return Err(Error::MeshValidation(format!(
                    "mesh is disconnected: no path from vertex {src} to vertex {j}"
                )));
            }
            data[src * n..(src + 1) * n].copy_from_slice(&row);
        }
        // Dijkstra is exact on a symmetric graph up to summation order; enforce bitwise symmetry.
        for i in 0..n {
            for j in (i + 1)..n {
                let d = data[i * n + j].min(data[j * n + i]);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        let dist = DenseMatrix::from_row_major(n, data).expect("n*n buffer");
        Ok(Self { coords, dim: 2, measure, dist, triangles, edges, origin: MeshOrigin::Loaded })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    /// Intrinsic dimension `N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lumped measure `μ_i`.
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn total_measure(&self) -> f64 {
        csum(self.measure.iter().copied())
    }

    pub fn distances(&self) -> &DenseMatrix {
        &self.dist
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist.get(i, j)
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Unique undirected edges `(a, b)` with `a < b`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn origin(&self) -> MeshOrigin {
        self.origin
    }

    /// Mean geodesic length of the edges incident to each vertex (0 for isolated vertices).
    pub fn mean_incident_edge_length(&self) -> Vec<f64> {
        let n = self.len();
        let mut total = vec![0.0; n];
        let mut count = vec![0usize; n];
        for &(a, b) in &self.edges {
            let d = self.dist.get(a, b);
            total[a] += d;
            total[b] += d;
            count[a] += 1;
            count[b] += 1;
        }
        total.iter().zip(&count).map(|(&t, &c)| if c == 0 { 0.0 } else { t / c as f64 }).collect()
    }

    /// Closest vertex to `point` in the embedding (ties → smallest index).
    pub fn nearest_vertex(&self, point: [f64; 3]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.coords.iter().enumerate() {
            let d = euclid(c, &point);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn tri_edges(t: &[usize; 3]) -> [(usize, usize); 3] {
    [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
}

fn unique_edges(triangles: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> =
        triangles.iter().flat_map(|t| tri_edges(t).map(|(a, b)| ordered(a, b))).collect();
    e.sort_unstable();
    e.dedup();
    e
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: &[f64; 3]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn euclid(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    norm(&sub(a, b))
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let r = norm(&a);
    [a[0] / r, a[1] / r, a[2] / r]
}

pub(crate) fn flat_triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    0.5 * norm(&cross(&sub(b, a), &sub(c, a)))
}

/// Area of the spherical triangle spanned by three unit vectors (Van Oosterom–Strackee).
pub(crate) fn spherical_triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let triple = dot(a, &cross(b, c)).abs();
    let denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * libm::atan2(triple, denom)
}

/// Great-circle distance between unit vectors.
/// Great-circle distance `arccos⟨a, b⟩`, evaluated as `atan2(|a × b|, ⟨a, b⟩)`,
/// which keeps full precision for nearly coincident and nearly antipodal points.
pub(crate) fn arc_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    libm::atan2(libm::sqrt(dot(&c, &c)), dot(a, b))
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[src] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem { dist: 0.0, vertex: src });
    while let Some(HeapItem { dist: d, vertex: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &adj[v] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(HeapItem { dist: nd, vertex: w });
            }
        }
    }
    dist
}

const ICOSAHEDRON_FACES: [[usize; 3]; 20] = [
    [0, 11, 5],
    [0, 5, 1],
    [0, 1, 7],
    [0, 7, 10],
    [0, 10, 11],
    [1, 5, 9],
    [5, 11, 4],
    [11, 10, 2],
    [10, 7, 6],
    [7, 1, 8],
    [3, 9, 4],
    [3, 4, 2],
    [3, 2, 6],
    [3, 6, 8],
    [3, 8, 9],
    [4, 9, 5],
    [2, 4, 11],
    [6, 2, 10],
    [8, 6, 7],
    [9, 8, 1],
];

fn icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let phi = (1.0 + libm::sqrt(5.0)) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    (raw.into_iter().map(normalize).collect(), ICOSAHEDRON_FACES.to_vec())
}

/// Icosphere on the unit 2-sphere, capped at [`DEFAULT_MAX_SPHERE_LEVEL`].
pub fn build_sphere(level: u32) -> Result<ManifoldMesh> {
    build_sphere_with_cap(level, DEFAULT_MAX_SPHERE_LEVEL)
}

/// Icosphere with `10·4^level + 2` vertices.
///
/// Distances are exact great-circle arcs; `μ_i` is one third of the incident
/// spherical-triangle areas, so `Σ μ_i = 4π` at every level. Vertices of coarser
/// levels keep their indices under refinement (vertex 0 is always the same point).
pub fn build_sphere_with_cap(level: u32, max_level: u32) -> Result<ManifoldMesh> {
    if level > max_level {
        return Err(Error::ResourceLimit(format!(
            "sphere subdivision level {level} exceeds the configured maximum {max_level}"
        )));
    }
    let (mut coords, mut faces) = icosahedron();
    for _ in 0..level {
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, coords: &mut Vec<[f64; 3]>| -> usize {
            *midpoint.entry(ordered(a, b)).or_insert_with(|| {
                let (pa, pb) = (coords[a], coords[b]);
                coords.push(normalize([pa[0] + pb[0], pa[1] + pb[1], pa[2] + pb[2]]));
                coords.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut coords);
            let bc = mid(b, c, &mut coords);
            let ca = mid(c, a, &mut coords);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }

    let n = coords.len();
    let mut parts = vec![Vec::new(); n];
    for t in &faces {
        let third = spherical_triangle_area(&coords[t[0]], &coords[t[1]], &coords[t[2]]) / 3.0;
        for &v in t {
            parts[v].push(third);
        }
    }
    let measure = parts.into_iter().map(csum).collect();
    let dist = DenseMatrix::symmetric_from_fn(n, |i, j| arc_distance(&coords[i], &coords[j]));
    let edges = unique_edges(&faces);
    Ok(ManifoldMesh {
        coords,
        dim: 2,
        measure,
        dist,
        triangles: faces,
        edges,
        origin: MeshOrigin::Sphere { level },
    })
}

/// Periodic-difference length on the unit circle: `min(|d|, 1 − |d|)`.
pub(crate) fn wrapped(d: f64) -> f64 {
    let d = d.abs();
    d.min(1.0 - d)
}

/// Regular `n × n` grid on the flat unit torus `[0,1)²`.
///
/// Vertex `i + n·j` sits at `(i/n, j/n, 0)`; each grid cell is split into two
/// triangles. `μ_i = 1/n²` and distances are exact flat-torus distances.
pub fn build_flat_torus(n_per_side: usize) -> Result<ManifoldMesh> {
    if n_per_side < 3 {
        return Err(invalid(format!("flat torus needs n_per_side >= 3 (got {n_per_side})")));
    }
    let n = n_per_side;
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| (i % n) + n * (j % n);
    let coords: Vec<[f64; 3]> =
        (0..n * n).map(|k| [(k % n) as f64 * h, (k / n) as f64 * h, 0.0]).collect();
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let dist = DenseMatrix::symmetric_from_fn(n * n, |a, b| {
        let dx = wrapped(coords[a][0] - coords[b][0]);
        let dy = wrapped(coords[a][1] - coords[b][1]);
        libm::sqrt(dx * dx + dy * dy)
    });
    let measure = vec![h * h; n * n];
    let edges = unique_edges(&triangles);
    Ok(ManifoldMesh {
        coords,
        dim: 2,
        measure,
        dist,
        triangles,
        edges,
        origin: MeshOrigin::FlatTorus { n_per_side },
    })
}

/// How to carve the interior `Ω` out of the manifold.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum DomainSpec {
    /// Open geodesic ball: vertex `i` is interior iff `d(i, center) < radius`.
    Cap { center: usize, radius: f64 },
    Indices(Vec<usize>),
}

/// Partition of the vertices into interior `Ω` and exterior `M∖Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletDomain {
    mask: Vec<bool>,
    interior: Vec<usize>,
    exterior: Vec<usize>,
}

impl DirichletDomain {
    fn from_mask(mask: Vec<bool>) -> Result<Self> {
        let interior: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        let exterior: Vec<usize> = (0..mask.len()).filter(|&i| !mask[i]).collect();
        if interior.is_empty() {
            return Err(Error::InvalidDomain("interior is empty".into()));
        }
        if exterior.is_empty() {
            return Err(Error::InvalidDomain(
                "exterior is empty; the Dirichlet condition needs at least one exterior vertex".into(),
            ));
        }
        Ok(Self { mask, interior, exterior })
    }

    /// Number of vertices of the underlying mesh.
    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn exterior(&self) -> &[usize] {
        &self.exterior
    }

    #[inline]
    pub fn is_interior(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

pub fn select_domain(mesh: &ManifoldMesh, spec: &DomainSpec) -> Result<DirichletDomain> {
    let n = mesh.len();
    match spec {
        DomainSpec::Cap { center, radius } => {
            if *center >= n {
                return Err(invalid(format!("cap center {center} is not a vertex (mesh has {n})")));
            }
            if !radius.is_finite() {
                return Err(invalid("cap radius must be finite"));
            }
            let mask = (0..n).map(|i| mesh.distance(i, *center) < *radius).collect();
            DirichletDomain::from_mask(mask)
        }
        DomainSpec::Indices(list) => {
            let mut mask = vec![false; n];
            for &i in list {
                if i >= n {
                    return Err(invalid(format!("interior index {i} out of range (mesh has {n})")));
                }
                if mask[i] {
                    return Err(invalid(format!("interior index {i} listed twice")));
                }
                mask[i] = true;
            }
            DirichletDomain::from_mask(mask)
        }
    }
}

/// Outcome of [`validate_mesh`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MeshValidationReport {
    pub n_vertices: usize,
    pub symmetry_defect: f64,
    pub max_abs_diagonal: f64,
    pub min_off_diagonal: f64,
    pub min_measure: f64,
    pub nonpositive_measures: usize,
    pub total_measure: f64,
    pub triples_checked: usize,
    /// All `n³` ordered triples were checked instead of a random sample.
    pub exhaustive: bool,
    pub triangle_tolerance: f64,
    pub triangle_violations: usize,
    pub worst_triangle_excess: f64,
}

impl MeshValidationReport {
    pub fn is_valid(&self) -> bool {
        self.symmetry_defect == 0.0
            && self.max_abs_diagonal == 0.0
            && self.min_off_diagonal > 0.0
            && self.nonpositive_measures == 0
            && self.triangle_violations == 0
    }
}

/// Report-only structural checks of a mesh.
///
/// Triangle inequalities `d(i,k) ≤ d(i,j) + d(j,k) + tol` are checked on
/// `n_triples` random triples, or exhaustively when `n³ ≤ n_triples`;
/// `tol = 1e-12 · max d`.
pub fn validate_mesh(mesh: &ManifoldMesh, n_triples: usize, seed: u64) -> MeshValidationReport {
    let n = mesh.len();
    let d = mesh.distances();
    let mut max_diag = 0.0f64;
    let mut min_off = f64::INFINITY;
    let mut max_d = 0.0f64;
    for i in 0..n {
        max_diag = max_diag.max(d.get(i, i).abs());
        for j in 0..n {
            if i != j {
                min_off = min_off.min(d.get(i, j));
                max_d = max_d.max(d.get(i, j));
            }
        }
    }
    let tol = 1e-12 * max_d;
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut check = |i: usize, j: usize, k: usize| {
        let excess = d.get(i, k) - d.get(i, j) - d.get(j, k);
        worst = worst.max(excess);
        if excess > tol {
            violations += 1;
        }
    };
    let exhaustive = n > 0 && (n as u128).pow(3) <= n_triples as u128;
    let checked = if exhaustive {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    check(i, j, k);
                }
            }
        }
        n * n * n
    } else if n > 0 {
        let mut rng = rng_from_seed(seed);
        for _ in 0..n_triples {
            check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        }
        n_triples
    } else {
        0
    };
    let measure = mesh.measure();
    MeshValidationReport {
        n_vertices: n,
        symmetry_defect: d.symmetry_defect(),
        max_abs_diagonal: max_diag,
        min_off_diagonal: if n > 1 { min_off } else { 0.0 },
        min_measure: measure.iter().copied().fold(f64::INFINITY, f64::min),
        nonpositive_measures: measure.iter().filter(|&&m| !(m > 0.0)).count(),
        total_measure: mesh.total_measure(),
        triples_checked: checked,
        exhaustive,
        triangle_tolerance: tol,
        triangle_violations: violations,
        worst_triangle_excess: if checked > 0 { worst } else { 0.0 },
    }
}
