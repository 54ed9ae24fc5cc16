//! Run configuration: a TOML file with the sections `[manifold]`, `[domain]`,
//! `[operator]`, `[nonlinearity]`, `[solver]`, `[run]`, `[verify]` and
//! `[study]`. Unknown keys are rejected, and every physical constraint is
//! checked when the file is loaded, before any computation starts.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fplap_core::manifold::{build_flat_torus, build_sphere, DEFAULT_MAX_SPHERE_LEVEL};
use fplap_core::solver::ArmijoParams;
use fplap_core::{DomainSpec, KernelParams, ManifoldMesh, Nonlinearity, SingularityPolicy, SolverOptions};
use serde::{Deserialize, Serialize};

use crate::error::{FplapError, Result};
use crate::io::read_mesh;

/// Intrinsic dimension of every supported mesh.
const MESH_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: ManifoldConfig,
    pub domain: DomainConfig,
    pub operator: OperatorConfig,
    #[serde(default)]
    pub nonlinearity: NonlinearityConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub study: StudyConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Sphere,
    Torus,
}

/// Either `builtin` with `resolution` (sphere level or torus side), or `file`.
#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub builtin: Option<Builtin>,
    pub resolution: Option<usize>,
    /// Mesh file, relative to the configuration file.
    pub file: Option<PathBuf>,
}

/// Either a geodesic cap (`radius`, optional `center`, default vertex 0) or `indices`.
#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub center: Option<usize>,
    pub radius: Option<f64>,
    pub indices: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub s: f64,
    pub p: f64,
    pub c_floor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    #[default]
    Zero,
    Power,
    DampedPower,
    Table,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    #[serde(default)]
    pub form: Form,
    /// Power law amplitude.
    pub lambda: Option<f64>,
    /// Power law exponent.
    pub r: Option<f64>,
    /// Amplitude of `c|t|^e exp(−t)`.
    pub c: Option<f64>,
    /// Exponent `e` of `c|t|^e exp(−t)`; defaults to `p`.
    pub exponent: Option<f64>,
    /// Two-column CSV `(t, f)`, relative to the configuration file.
    pub table: Option<PathBuf>,
    pub beta: Option<f64>,
    pub q_growth: Option<f64>,
    pub mu_ar: Option<f64>,
    #[serde(default)]
    pub positive_part: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeChoice {
    #[default]
    Auto,
    Direct,
    MountainPass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Direct,
    MountainPass,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Direct => "direct",
            Regime::MountainPass => "mountain_pass",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    #[default]
    Zero,
    Indicator,
    /// Interior values `U(0, 1)` drawn from the run seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub regime: RegimeChoice,
    #[serde(default)]
    pub start: Start,
    /// Exit 0 also when the solver returns the trivial solution.
    #[serde(default)]
    pub allow_trivial: bool,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub c1: Option<f64>,
    pub backtrack: Option<f64>,
    pub initial_step: Option<f64>,
    pub max_backtracks: Option<u32>,
    pub path_nodes: Option<usize>,
    pub redistribute_every: Option<usize>,
    pub step_cap: Option<f64>,
    pub nontrivial_threshold: Option<f64>,
    pub enforce_certificates: Option<bool>,
    pub endpoint_t_max: Option<f64>,
    /// Sphere radii `b` tried by the mountain-pass geometry certificate.
    #[serde(default = "default_geometry_radii")]
    pub geometry_radii: Vec<f64>,
    #[serde(default = "default_geometry_samples")]
    pub geometry_samples: usize,
}

fn default_geometry_radii() -> Vec<f64> {
    vec![0.01, 0.1, 1.0]
}

fn default_geometry_samples() -> usize {
    200
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            regime: RegimeChoice::Auto,
            start: Start::Zero,
            allow_trivial: false,
            tol: None,
            max_iter: None,
            c1: None,
            backtrack: None,
            initial_step: None,
            max_backtracks: None,
            path_nodes: None,
            redistribute_every: None,
            step_cap: None,
            nontrivial_threshold: None,
            enforce_certificates: None,
            endpoint_t_max: None,
            geometry_radii: default_geometry_radii(),
            geometry_samples: default_geometry_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the working directory.
    pub out: Option<PathBuf>,
    /// Also write the upper-triangle kernel weights as CSV.
    #[serde(default)]
    pub kernel_dump: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Picone,
    Embedding,
    NormEquivalence,
    Lipschitz,
    F1,
    F2,
    F3,
    F4,
    F5,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Picone,
        Check::Embedding,
        Check::NormEquivalence,
        Check::Lipschitz,
        Check::F1,
        Check::F2,
        Check::F3,
        Check::F4,
        Check::F5,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Check::Picone => "picone",
            Check::Embedding => "embedding",
            Check::NormEquivalence => "norm_equivalence",
            Check::Lipschitz => "lipschitz",
            Check::F1 => "f1",
            Check::F2 => "f2",
            Check::F3 => "f3",
            Check::F4 => "f4",
            Check::F5 => "f5",
        }
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Check::ALL.iter().copied().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Check::ALL.iter().map(Check::name).collect();
            format!("unknown check `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// Test functions `g` for the composition check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzFn {
    Identity,
    /// `clamp(t, 0, 1)`.
    Clamp01,
    /// `sin(2t)`.
    #[default]
    Sin2,
    /// `t + 1`; violates `g(0) = 0`.
    Shift,
}

impl LipschitzFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            LipschitzFn::Identity => t,
            LipschitzFn::Clamp01 => t.clamp(0.0, 1.0),
            LipschitzFn::Sin2 => (2.0 * t).sin(),
            LipschitzFn::Shift => t + 1.0,
        }
    }

    pub fn constant(&self) -> f64 {
        match self {
            LipschitzFn::Sin2 => 2.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Target exponent of the embedding estimate; defaults to `p`.
    pub q: Option<f64>,
    #[serde(default)]
    pub lipschitz: LipschitzFn,
    /// Defaults to the natural constant of the chosen function.
    pub lipschitz_constant: Option<f64>,
    /// AR exponent used by the f4 check when the nonlinearity declares none.
    pub mu_ar: Option<f64>,
    /// Largest sample of the growth check.
    #[serde(default = "default_growth_t_max")]
    pub growth_t_max: f64,
}

fn default_checks() -> Vec<Check> {
    vec![Check::Picone]
}

fn default_trials() -> usize {
    200
}

fn default_growth_t_max() -> f64 {
    1e3
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            checks: default_checks(),
            trials: default_trials(),
            q: None,
            lipschitz: LipschitzFn::default(),
            lipschitz_constant: None,
            mu_ar: None,
            growth_t_max: default_growth_t_max(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    #[default]
    Convergence,
    Uniqueness,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default)]
    pub kind: StudyKind,
    /// Resolution ladder of the built-in manifold (convergence).
    #[serde(default)]
    pub resolutions: Vec<usize>,
    /// Number of random starts (uniqueness).
    #[serde(default = "default_starts")]
    pub starts: usize,
}

fn default_starts() -> usize {
    5
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self { kind: StudyKind::default(), resolutions: Vec::new(), starts: default_starts() }
    }
}

/// A parsed and validated configuration together with its source.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    /// Raw file bytes; their SHA-256 goes into every provenance header.
    pub bytes: Vec<u8>,
    /// Directory relative paths in the file are resolved against.
    pub base_dir: PathBuf,
    pub nonlinearity: Nonlinearity,
}

fn cfg_err(msg: impl Into<String>) -> FplapError {
    FplapError::Config(msg.into())
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| FplapError::io(path, e))?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| cfg_err(format!("{} is not UTF-8", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base_dir)
    }

    pub fn from_toml(text: &str, base_dir: PathBuf) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        config.validate()?;
        let nonlinearity = config.build_nonlinearity(&base_dir)?;
        config.regime(&nonlinearity)?;
        Ok(Self { config, bytes: text.as_bytes().to_vec(), base_dir, nonlinearity })
    }

    pub fn build_mesh(&self) -> Result<ManifoldMesh> {
        let m = &self.config.manifold;
        match (m.builtin, &m.file) {
            (Some(Builtin::Sphere), _) => Ok(build_sphere(m.resolution.unwrap_or(0) as u32)?),
            (Some(Builtin::Torus), _) => Ok(build_flat_torus(m.resolution.unwrap_or(0))?),
            (None, Some(file)) => read_mesh(&self.base_dir.join(file)),
            (None, None) => unreachable!("validated at load"),
        }
    }
}

fn check_positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(cfg_err(format!("{name} must be positive and finite (got {x})"))),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let m = &self.manifold;
        match (m.builtin, &m.file) {
            (Some(_), Some(_)) => return Err(cfg_err("[manifold] takes either `builtin` or `file`, not both")),
            (None, None) => return Err(cfg_err("[manifold] needs `builtin` (with `resolution`) or `file`")),
            (Some(b), None) => {
                let r = m.resolution.ok_or_else(|| cfg_err("[manifold] builtin meshes need `resolution`"))?;
                match b {
                    Builtin::Sphere if r > DEFAULT_MAX_SPHERE_LEVEL as usize => {
                        return Err(cfg_err(format!(
                            "sphere level {r} exceeds the supported maximum {DEFAULT_MAX_SPHERE_LEVEL}"
                        )))
                    }
                    Builtin::Torus if r < 3 => return Err(cfg_err("torus resolution must be at least 3")),
                    _ => {}
                }
            }
            (None, Some(_)) => {
                if m.resolution.is_some() {
                    return Err(cfg_err("[manifold] `resolution` only applies to builtin meshes"));
                }
            }
        }

        let d = &self.domain;
        match (d.radius, &d.indices) {
            (Some(_), Some(_)) => return Err(cfg_err("[domain] takes either a cap `radius` or `indices`, not both")),
            (None, None) => return Err(cfg_err("[domain] needs a cap `radius` or `indices`")),
            (None, Some(_)) if d.center.is_some() => {
                return Err(cfg_err("[domain] `center` only applies to a cap"))
            }
            (Some(r), None) => check_positive("domain radius", Some(r))?,
            _ => {}
        }

        self.kernel_params().validate(MESH_DIM)?;

        let s = &self.solver;
        for (name, v) in [
            ("solver.tol", s.tol),
            ("solver.c1", s.c1),
            ("solver.backtrack", s.backtrack),
            ("solver.initial_step", s.initial_step),
            ("solver.step_cap", s.step_cap),
            ("solver.nontrivial_threshold", s.nontrivial_threshold),
            ("solver.endpoint_t_max", s.endpoint_t_max),
        ] {
            check_positive(name, v)?;
        }
        self.solver_options().validate()?;
        if s.geometry_radii.is_empty() || s.geometry_radii.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            return Err(cfg_err("solver.geometry_radii must be a non-empty list of positive radii"));
        }
        if s.geometry_samples == 0 {
            return Err(cfg_err("solver.geometry_samples must be positive"));
        }

        let v = &self.verify;
        if v.trials == 0 {
            return Err(cfg_err("verify.trials must be positive"));
        }
        check_positive("verify.lipschitz_constant", v.lipschitz_constant)?;
        check_positive("verify.growth_t_max", Some(v.growth_t_max))?;
        if let Some(q) = v.q {
            let prm = self.kernel_params();
            let (p, pstar) = (prm.p, prm.critical_exponent(MESH_DIM));
            if !(q >= p && q <= pstar) {
                return Err(cfg_err(format!("verify.q = {q} must lie in [p, p*_s] = [{p}, {pstar}]")));
            }
        }

        let st = &self.study;
        match st.kind {
            StudyKind::Convergence if !st.resolutions.is_empty() => {
                if st.resolutions.len() < 3 {
                    return Err(cfg_err(format!(
                        "a convergence study needs at least 3 resolutions (got {})",
                        st.resolutions.len()
                    )));
                }
                if self.manifold.builtin.is_none() {
                    return Err(cfg_err("a convergence study needs a builtin manifold"));
                }
                if d.radius.is_none() {
                    return Err(cfg_err("a convergence study needs a cap domain"));
                }
            }
            StudyKind::Uniqueness if st.starts < 2 => {
                return Err(cfg_err("a uniqueness study needs at least 2 starts"));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn domain_spec(&self) -> DomainSpec {
        match (&self.domain.indices, self.domain.radius) {
            (Some(list), _) => DomainSpec::Indices(list.clone()),
            (None, Some(radius)) => DomainSpec::Cap { center: self.domain.center.unwrap_or(0), radius },
            (None, None) => unreachable!("validated at load"),
        }
    }

    pub fn kernel_params(&self) -> KernelParams {
        let mut prm = KernelParams::new(self.operator.s, self.operator.p);
        if let Some(c) = self.operator.c_floor {
            prm.policy = SingularityPolicy { c_floor: c };
        }
        prm
    }

    pub fn solver_options(&self) -> SolverOptions {
        let s = &self.solver;
        let d = SolverOptions::default();
        let a = ArmijoParams::default();
        SolverOptions {
            tol: s.tol.unwrap_or(d.tol),
            max_iter: s.max_iter.unwrap_or(d.max_iter),
            armijo: ArmijoParams {
                c1: s.c1.unwrap_or(a.c1),
                backtrack: s.backtrack.unwrap_or(a.backtrack),
                initial_step: s.initial_step.unwrap_or(a.initial_step),
                max_backtracks: s.max_backtracks.unwrap_or(a.max_backtracks),
            },
            path_nodes: s.path_nodes.unwrap_or(d.path_nodes),
            redistribute_every: s.redistribute_every.unwrap_or(d.redistribute_every),
            step_cap: s.step_cap.unwrap_or(d.step_cap),
            seed: self.run.seed,
            nontrivial_threshold: s.nontrivial_threshold.unwrap_or(d.nontrivial_threshold),
            enforce_certificates: s.enforce_certificates.unwrap_or(d.enforce_certificates),
            endpoint_t_max: s.endpoint_t_max.unwrap_or(d.endpoint_t_max),
        }
    }

    pub fn build_nonlinearity(&self, base_dir: &Path) -> Result<Nonlinearity> {
        let n = &self.nonlinearity;
        let allowed: &[&str] = match n.form {
            Form::Zero => &[],
            Form::Power => &["lambda", "r"],
            Form::DampedPower => &["c", "exponent"],
            Form::Table => &["table"],
        };
        let given = [
            ("lambda", n.lambda.is_some()),
            ("r", n.r.is_some()),
            ("c", n.c.is_some()),
            ("exponent", n.exponent.is_some()),
            ("table", n.table.is_some()),
        ];
        if let Some((key, _)) = given.iter().find(|(k, set)| *set && !allowed.contains(k)) {
            return Err(cfg_err(format!("[nonlinearity] key `{key}` does not apply to form {:?}", n.form)));
        }
        let need = |key: &str, v: Option<f64>| {
            v.ok_or_else(|| cfg_err(format!("[nonlinearity] form {:?} needs `{key}`", n.form)))
        };
        let base = match n.form {
            Form::Zero => Nonlinearity::zero(),
            Form::Power => Nonlinearity::power(need("lambda", n.lambda)?, need("r", n.r)?)?,
            Form::DampedPower => {
                Nonlinearity::damped_power(need("c", n.c)?, n.exponent.unwrap_or(self.operator.p))?
            }
            Form::Table => {
                let rel = n.table.as_ref().ok_or_else(|| cfg_err("[nonlinearity] form Table needs `table`"))?;
                let (t, f) = read_table(&base_dir.join(rel))?;
                Nonlinearity::table(t, f)?
            }
        };
        check_positive("nonlinearity.beta", n.beta)?;
        check_positive("nonlinearity.q_growth", n.q_growth)?;
        check_positive("nonlinearity.mu_ar", n.mu_ar)?;
        let beta = n.beta.unwrap_or(base.beta);
        let q = n.q_growth.unwrap_or(base.q_growth);
        let mu = n.mu_ar.or(base.mu_ar);
        Ok(base.with_certificate(beta, q).with_ar_exponent(mu).with_positive_part(n.positive_part))
    }

    /// Direct minimization for `q < p` (or `f ≡ 0`), mountain pass for `p < q < p*_s`.
    pub fn regime(&self, nl: &Nonlinearity) -> Result<Regime> {
        match self.solver.regime {
            RegimeChoice::Direct => return Ok(Regime::Direct),
            RegimeChoice::MountainPass => return Ok(Regime::MountainPass),
            RegimeChoice::Auto => {}
        }
        let prm = self.kernel_params();
        let (p, pstar, q) = (prm.p, prm.critical_exponent(MESH_DIM), nl.q_growth);
        if nl.is_zero() || q < p {
            Ok(Regime::Direct)
        } else if q > p && q < pstar {
            Ok(Regime::MountainPass)
        } else {
            Err(cfg_err(format!(
                "growth exponent q = {q} selects no regime: direct needs q < p = {p}, \
                 mountain pass needs p < q < p*_s = {pstar} (set solver.regime to override)"
            )))
        }
    }
}

/// Two-column CSV `(t, f)`; `#` comments and one non-numeric header row are allowed.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| FplapError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let (mut t, mut f) = (Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let perr = |msg: String| FplapError::Parse { path: path.to_path_buf(), line, msg };
        if rec.len() != 2 {
            return Err(perr(format!("expected 2 columns, found {}", rec.len())));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                t.push(a);
                f.push(b);
            }
            _ if k == 0 => continue,
            _ => return Err(perr(format!("cannot parse `{}`, `{}`", &rec[0], &rec[1]))),
        }
    }
    Ok((t, f))
}
