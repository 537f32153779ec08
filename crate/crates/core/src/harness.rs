//! Experiment orchestration: configuration, single solves with the full
//! invariant report, degenerating collar families, and structured output
//! (CSV, JSON, standalone SVG charts).
//!
//! Configuration comes from a single TOML file with documented keys; unknown
//! keys are rejected. All runs are deterministic for a fixed seed, and CSV
//! and JSON exports are byte-stable: family members are computed on a worker
//! pool but assembled in schedule order with fixed-format floats.

use crate::collar::CollarSpec;
use crate::decompose::{self, CompactnessVerdict, Decomposition, FamilySample};
use crate::fields;
use crate::grid::{CylinderGrid, MapField};
use crate::invariants::{self, Calibration};
use crate::manifold::TargetManifold;
use crate::report::CheckSet;
use crate::solver::{self, BoundaryData, SolveConfig, SolveReport};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("chart error: {0}")]
    Chart(String),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error(transparent)]
    Collar(#[from] crate::collar::CollarError),
    #[error(transparent)]
    Decompose(#[from] crate::decompose::DecomposeError),
    #[error(transparent)]
    Manifold(#[from] crate::manifold::ManifoldError),
}

// ---------------------------------------------------------------------------
// configuration

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub kind: String,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub basis: Option<Vec<Vec<f64>>>,
}

impl TargetSpec {
    pub fn build(&self) -> Result<TargetManifold, HarnessError> {
        match self.kind.as_str() {
            "sphere" => Ok(TargetManifold::unit_sphere(self.dim.unwrap_or(3))),
            "torus" => {
                let basis = self
                    .basis
                    .as_ref()
                    .ok_or_else(|| HarnessError::Config("torus target needs a basis".into()))?;
                Ok(TargetManifold::flat_torus(basis)?)
            }
            other => Err(HarnessError::Config(format!("unknown target kind '{other}'"))),
        }
    }
}

fn default_rows_per_unit() -> f64 {
    8.0
}
fn default_n_th() -> usize {
    64
}
fn default_min_rows() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_rows_per_unit")]
    pub rows_per_unit: f64,
    #[serde(default = "default_n_th")]
    pub n_th: usize,
    #[serde(default = "default_min_rows")]
    pub min_rows: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            rows_per_unit: default_rows_per_unit(),
            n_th: default_n_th(),
            min_rows: default_min_rows(),
        }
    }
}

impl GridSpec {
    /// Grid over `[t_a, t_b]` with the configured row density (step count is
    /// a multiple of nothing in particular; row spacing stays fixed across a
    /// family so discretization error cannot masquerade as a trend).
    pub fn build(&self, t_a: f64, t_b: f64) -> Result<CylinderGrid, HarnessError> {
        let n_t = ((self.rows_per_unit * (t_b - t_a)).ceil() as usize).max(self.min_rows) + 1;
        Ok(CylinderGrid::new(t_a, t_b, n_t, self.n_th)?)
    }
}

fn default_dt_factor() -> f64 {
    0.2
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_iters() -> usize {
    2_000_000
}
fn default_log_every() -> usize {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_dt_factor")]
    pub dt_factor: f64,
    #[serde(default = "default_tol")]
    pub tol_tension: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_log_every")]
    pub log_every: usize,
    /// Write a checkpoint of the field every this many iterations (0 = off).
    #[serde(default)]
    pub checkpoint_every: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            dt_factor: default_dt_factor(),
            tol_tension: default_tol(),
            max_iters: default_max_iters(),
            log_every: default_log_every(),
            checkpoint_every: 0,
        }
    }
}

impl SolverSpec {
    pub fn build(&self, grid: &CylinderGrid) -> SolveConfig {
        let h = grid.h_t.min(grid.h_th);
        SolveConfig {
            dt: self.dt_factor * h * h,
            tol_tension: self.tol_tension,
            max_iters: self.max_iters,
            log_every: self.log_every,
        }
    }
}

/// Boundary data recipes for single solves.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    /// Great-circle band of the given slope; seeds with the sampled arc.
    Geodesic { slope: f64 },
    /// Rotationally equivariant band between two latitudes; seeds with the
    /// solved profile.
    Equivariant { beta_lo: f64, beta_hi: f64 },
    /// Constant boundary point.
    Constant { point: Vec<f64> },
    /// Bubble trace: boundary rows of the unit-scale bubble at `t0`.
    Bubble { t0: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisplacementRule {
    /// Geodesic endpoints at fixed distance `d`, so the slope is `d / Λ_n`.
    FixedDisplacement { d: f64 },
    /// Fixed slope `a` for every member.
    FixedSlope { a: f64 },
    /// Slope `c Λ_n^{-p}`.
    PowerLaw { c: f64, p: f64 },
}

impl DisplacementRule {
    pub fn slope(&self, cylinder_len: f64) -> f64 {
        match *self {
            DisplacementRule::FixedDisplacement { d } => d / cylinder_len,
            DisplacementRule::FixedSlope { a } => a,
            DisplacementRule::PowerLaw { c, p } => c * cylinder_len.powf(-p),
        }
    }
}

fn default_delta() -> f64 {
    1.0_f64.asinh()
}
fn default_epsilon() -> f64 {
    0.25
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegenerationSpec {
    /// Strictly decreasing core lengths, at most `2 arcsinh(1)` each.
    pub l_schedule: Vec<f64>,
    pub rule: DisplacementRule,
    /// Thin-part threshold defining the computational subcollar.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Segmentation threshold.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSolveSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub boundary: BoundarySpec,
    /// Amplitude of a seeded interior tangent perturbation of the start.
    #[serde(default)]
    pub perturb: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollarTableSpec {
    pub l_values: Vec<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// Synthetic bubble-with-arms field.
    Synthetic { t_min: f64, t_max: f64, arm_slope: f64, core: f64 },
    /// Load a map from a file in the documented format.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub field: FieldSpec,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentKind {
    SingleSolve(SingleSolveSpec),
    Degeneration(DegenerationSpec),
    CollarTable(CollarTableSpec),
    Segment(SegmentSpec),
}

fn default_target() -> TargetSpec {
    TargetSpec { kind: "sphere".into(), dim: Some(3), basis: None }
}

/// Top-level experiment configuration; see `configs/` for annotated samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_target")]
    pub target: TargetSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub calibration: Calibration,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }
}

// ---------------------------------------------------------------------------
// degeneration runs

/// One family member's record. A failed member keeps its row with the
/// failure in `status` rather than being dropped.
#[derive(Debug, Clone, Serialize)]
pub struct RecordRow {
    pub l: f64,
    pub cyl_len: f64,
    pub re_alpha: f64,
    pub im_alpha: f64,
    pub e_neck: f64,
    pub l_neck: f64,
    pub pred_e_neck: f64,
    pub pred_l_neck: f64,
    /// Asymptotic indicator `|Re alpha| π²/l`.
    pub e_indicator: f64,
    /// Asymptotic indicator `sqrt(|Re alpha|) π²/l`.
    pub l_indicator: f64,
    /// Diagnostic `|Im alpha| π²/l`.
    pub im_indicator: f64,
    pub iterations: usize,
    pub residual_energy: f64,
    pub residual_length: f64,
    pub status: String,
}

pub struct DegenerationOutcome {
    pub rows: Vec<RecordRow>,
    pub verdict: Option<CompactnessVerdict>,
    pub all_bounds_pass: bool,
}

fn run_family_member(
    cfg: &ExperimentConfig,
    spec: &DegenerationSpec,
    l: f64,
) -> Result<(RecordRow, bool), HarnessError> {
    let target = cfg.target.build()?;
    let collar = CollarSpec::new(l)?;
    let sub = collar.subcollar(spec.delta)?;
    let grid = cfg.grid.build(sub.t1, sub.t2)?;
    let len = grid.len_t();
    let a = spec.rule.slope(len);

    // geodesic endpoints at distance a * len, seeded along the winding arc
    let k = target.ambient_dim();
    let mut p = vec![0.0; k];
    p[0] = 1.0;
    let mut v = vec![0.0; k];
    v[1] = 1.0;
    let p = target.project(&p)?;
    let f0 = fields::geodesic_from(grid, target, &p, &v, a)?;
    let bc = BoundaryData::from_field(&f0);
    let solve_cfg = cfg.solver.build(&grid);
    let (u, rep) = solver::solve(&f0, &bc, &solve_cfg)?;

    let d = decompose::segment(&u, spec.epsilon)?;
    let r = decompose::neck_identity(&u, &d, &cfg.calibration)?;
    let pi2 = PI * PI;
    let bounds_ok = r.bound_checks.iter().all(CheckSet::all_pass);
    let row = RecordRow {
        l,
        cyl_len: len,
        re_alpha: r.alpha_re,
        im_alpha: r.alpha_im,
        e_neck: r.total_neck_energy,
        l_neck: r.total_neck_length,
        pred_e_neck: r.predicted_energy,
        pred_l_neck: r.predicted_length,
        e_indicator: r.alpha_re.abs() * pi2 / l,
        l_indicator: r.alpha_re.abs().sqrt() * pi2 / l,
        im_indicator: r.alpha_im.abs() * pi2 / l,
        iterations: rep.iterations,
        residual_energy: r.residual_energy,
        residual_length: r.residual_length,
        status: if rep.converged { "ok".into() } else { "not_converged".into() },
    };
    Ok((row, bounds_ok))
}

/// Solve, segment and account every member of a degenerating family, then
/// classify the trends. Members run on the ambient rayon pool; rows come
/// back in schedule order.
pub fn run_degeneration(
    cfg: &ExperimentConfig,
    spec: &DegenerationSpec,
) -> Result<DegenerationOutcome, HarnessError> {
    if spec.l_schedule.len() < 3 {
        return Err(HarnessError::Config("family needs at least 3 members".into()));
    }
    if !spec.l_schedule.windows(2).all(|w| w[1] < w[0]) {
        return Err(HarnessError::Config("l_schedule must be strictly decreasing".into()));
    }
    let results: Vec<Result<(RecordRow, bool), HarnessError>> = spec
        .l_schedule
        .par_iter()
        .map(|&l| run_family_member(cfg, spec, l))
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut all_bounds = true;
    let mut samples = Vec::new();
    for (l, res) in spec.l_schedule.iter().zip(results) {
        match res {
            Ok((row, bounds_ok)) => {
                all_bounds &= bounds_ok && row.status == "ok";
                samples.push(FamilySample {
                    l: row.l,
                    alpha: Complex64::new(row.re_alpha, row.im_alpha),
                });
                rows.push(row);
            }
            Err(e) => {
                all_bounds = false;
                rows.push(RecordRow {
                    l: *l,
                    cyl_len: f64::NAN,
                    re_alpha: f64::NAN,
                    im_alpha: f64::NAN,
                    e_neck: f64::NAN,
                    l_neck: f64::NAN,
                    pred_e_neck: f64::NAN,
                    pred_l_neck: f64::NAN,
                    e_indicator: f64::NAN,
                    l_indicator: f64::NAN,
                    im_indicator: f64::NAN,
                    iterations: 0,
                    residual_energy: f64::NAN,
                    residual_length: f64::NAN,
                    status: format!("failed: {e}"),
                });
            }
        }
    }
    let verdict =
        if samples.len() >= 3 { Some(decompose::classify_compactness(&samples)?) } else { None };
    Ok(DegenerationOutcome { rows, verdict, all_bounds_pass: all_bounds })
}

// ---------------------------------------------------------------------------
// single solves

#[derive(Debug, Clone, Serialize)]
pub struct ComplexOut {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexOut {
    fn from(z: Complex64) -> Self {
        ComplexOut { re: z.re, im: z.im }
    }
}

/// Full invariant report of one solve.
#[derive(Debug, Clone, Serialize)]
pub struct SingleReport {
    pub grid: (f64, f64, usize, usize),
    pub target: String,
    pub solve: SolveReport,
    pub energy: f64,
    pub average_length: f64,
    pub alpha: ComplexOut,
    pub alpha_drift: f64,
    pub theta_max: f64,
    pub hopf_max_abs: f64,
    pub hopf_dbar_sup: f64,
    pub oscillation: f64,
    pub window_energy: f64,
    pub checks: CheckSet,
    pub decomposition: Option<Decomposition>,
}

pub fn build_start_field(
    cfg: &ExperimentConfig,
    spec: &SingleSolveSpec,
) -> Result<MapField, HarnessError> {
    let target = cfg.target.build()?;
    let grid = cfg.grid.build(spec.t_min, spec.t_max)?;
    let f0 = match &spec.boundary {
        BoundarySpec::Geodesic { slope } => {
            let k = target.ambient_dim();
            let mut p = vec![0.0; k];
            p[0] = 1.0;
            let mut v = vec![0.0; k];
            v[1] = 1.0;
            fields::geodesic_from(grid, target, &p, &v, *slope)?
        }
        BoundarySpec::Equivariant { beta_lo, beta_hi } => {
            if !target.is_sphere() || target.ambient_dim() != 3 {
                return Err(HarnessError::Config(
                    "equivariant boundary data needs the 3-dimensional sphere target".into(),
                ));
            }
            fields::equivariant_harmonic(grid, *beta_lo, *beta_hi)?
        }
        BoundarySpec::Constant { point } => fields::constant(grid, target, point)?,
        BoundarySpec::Bubble { t0 } => {
            if !target.is_sphere() || target.ambient_dim() != 3 {
                return Err(HarnessError::Config(
                    "bubble boundary data needs the 3-dimensional sphere target".into(),
                ));
            }
            fields::bubble(grid, *t0)?
        }
    };
    if spec.perturb > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(fields::perturb_tangent(&f0, spec.perturb, 1, &mut rng))
    } else {
        Ok(f0)
    }
}

/// One solve plus everything the invariants module can say about it.
pub fn run_single(
    cfg: &ExperimentConfig,
    spec: &SingleSolveSpec,
) -> Result<(MapField, SingleReport), HarnessError> {
    let f0 = build_start_field(cfg, spec)?;
    let grid = *f0.grid();
    let bc = BoundaryData::from_field(&f0);
    let solve_cfg = cfg.solver.build(&grid);
    let (u, solve_rep) = solver::solve(&f0, &bc, &solve_cfg)?;

    let a = invariants::alpha(&u);
    let theta = invariants::theta_profile(&u);
    let h = invariants::hopf(&u);
    let mut checks = invariants::check_theta_convexity(&u, cfg.calibration.eps1, &cfg.calibration);
    checks.extend(invariants::check_neck_bounds(&u, grid.t_min, grid.t_max, &cfg.calibration)?);
    checks.extend(invariants::check_osc_bound(&u, grid.t_min, grid.t_max)?);
    let decomposition =
        if grid.len_t() >= 4.0 { Some(decompose::segment(&u, spec.epsilon)?) } else { None };
    let osc = invariants::oscillation(&u, grid.t_min, grid.t_max)?;
    let report = SingleReport {
        grid: (grid.t_min, grid.t_max, grid.n_t, grid.n_th),
        target: u.target().describe(),
        solve: solve_rep,
        energy: invariants::energy(&u, grid.t_min, grid.t_max)?,
        average_length: invariants::average_length(&u, grid.t_min, grid.t_max)?,
        alpha: a.alpha.into(),
        alpha_drift: a.drift,
        theta_max: theta.max(),
        hopf_max_abs: h.max_abs(),
        hopf_dbar_sup: invariants::hopf_dbar_sup(&u),
        oscillation: osc.value,
        window_energy: invariants::window_energy_full(&u).unwrap_or(0.0),
        checks,
        decomposition,
    };
    Ok((u, report))
}

/// Build the field described by a segment experiment.
pub fn build_segment_field(spec: &SegmentSpec, grid: &GridSpec) -> Result<MapField, HarnessError> {
    match &spec.field {
        FieldSpec::Synthetic { t_min, t_max, arm_slope, core } => {
            let g = grid.build(*t_min, *t_max)?;
            Ok(fields::neck_with_bubble(g, *arm_slope, *core)?)
        }
        FieldSpec::File { path } => Ok(MapField::read_from(path)?),
    }
}

// ---------------------------------------------------------------------------
// collar tables

#[derive(Debug, Clone, Serialize)]
pub struct CollarRow {
    pub l: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub core_t: f64,
    pub cyl_len: f64,
    pub area: f64,
    pub area_quadrature: f64,
    pub injrad_core: f64,
    pub factor_core: f64,
    pub factor_edge: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcollar_t1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcollar_t2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcollar_len: Option<f64>,
}

pub fn collar_row(l: f64, delta: Option<f64>) -> Result<CollarRow, HarnessError> {
    let c = CollarSpec::new(l)?;
    let sub = delta.map(|d| c.subcollar(d)).transpose()?;
    Ok(CollarRow {
        l,
        t_lo: c.t_lo,
        t_hi: c.t_hi,
        core_t: c.core_t,
        cyl_len: c.len(),
        area: crate::collar::collar_area(l)?,
        area_quadrature: c.area_quadrature(20_000),
        injrad_core: c.injrad(c.core_t)?,
        factor_core: c.conformal_factor(c.core_t)?,
        factor_edge: c.conformal_factor(c.t_lo)?,
        subcollar_t1: sub.map(|s| s.t1),
        subcollar_t2: sub.map(|s| s.t2),
        subcollar_len: sub.map(|s| s.len()),
    })
}

// ---------------------------------------------------------------------------
// export

/// Fixed CSV header for degeneration tables.
pub const RECORD_HEADER: [&str; 16] = [
    "l",
    "cyl_len",
    "re_alpha",
    "im_alpha",
    "e_neck",
    "l_neck",
    "pred_e_neck",
    "pred_l_neck",
    "e_indicator",
    "l_indicator",
    "im_indicator",
    "iterations",
    "residual_energy",
    "residual_length",
    "converged",
    "status",
];

fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return "nan".into();
    }
    format!("{x:.11e}")
}

/// Render rows as CSV with the fixed header and 12 significant digits.
/// Byte-stable for identical inputs.
pub fn export_csv(rows: &[RecordRow]) -> String {
    let mut out = RECORD_HEADER.join(",");
    out.push('\n');
    for r in rows {
        let cols = [
            sig12(r.l),
            sig12(r.cyl_len),
            sig12(r.re_alpha),
            sig12(r.im_alpha),
            sig12(r.e_neck),
            sig12(r.l_neck),
            sig12(r.pred_e_neck),
            sig12(r.pred_l_neck),
            sig12(r.e_indicator),
            sig12(r.l_indicator),
            sig12(r.im_indicator),
            r.iterations.to_string(),
            sig12(r.residual_energy),
            sig12(r.residual_length),
            (r.status == "ok").to_string(),
            r.status.clone(),
        ];
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

pub fn export_json(rows: &[RecordRow]) -> String {
    serde_json::to_string_pretty(rows).expect("record rows serialize")
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
}

pub fn export(rows: &[RecordRow], format: ExportFormat) -> Result<String, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Config("refusing to export an empty table".into()));
    }
    Ok(match format {
        ExportFormat::Csv => export_csv(rows),
        ExportFormat::Json => export_json(rows),
    })
}

// ---------------------------------------------------------------------------
// charts

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Standalone SVG log-log line chart, one polyline per series, with legend.
/// No external assets.
pub fn render_svg(series: &[Series]) -> Result<String, HarnessError> {
    if series.is_empty() {
        return Err(HarnessError::Chart("no series to draw".into()));
    }
    for s in series {
        if s.points.len() < 2 {
            return Err(HarnessError::Chart(format!("series '{}' has fewer than 2 points", s.name)));
        }
        if s.points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
            return Err(HarnessError::Chart(format!(
                "series '{}' has non-positive values; log-log axes need positive data",
                s.name
            )));
        }
    }
    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0.log10())).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.1.log10())).collect();
    let (x_min, x_max) = (xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let (y_min, y_max) = (ys.iter().copied().fold(f64::INFINITY, f64::min), ys.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    if x_max - x_min < 1e-12 {
        return Err(HarnessError::Chart("all x values coincide".into()));
    }
    let (y_min, y_max) =
        if y_max - y_min < 1e-12 { (y_min - 0.5, y_max + 0.5) } else { (y_min, y_max) };

    let (w, h, ml, mb, mt, mr) = (640.0, 420.0, 70.0, 50.0, 20.0, 20.0);
    let px = |lx: f64| ml + (lx - x_min) / (x_max - x_min) * (w - ml - mr);
    let py = |ly: f64| h - mb - (ly - y_min) / (y_max - y_min) * (h - mb - mt);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
        w - ml - mr,
        h - mb - mt
    ));
    // decade ticks
    for d in (x_min.floor() as i64)..=(x_max.ceil() as i64) {
        let lx = d as f64;
        if lx < x_min - 1e-9 || lx > x_max + 1e-9 {
            continue;
        }
        let x = px(lx);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#ccc\"/>\n",
            mt,
            h - mb
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">1e{d}</text>\n",
            h - mb + 16.0
        ));
    }
    for d in (y_min.floor() as i64)..=(y_max.ceil() as i64) {
        let ly = d as f64;
        if ly < y_min - 1e-9 || ly > y_max + 1e-9 {
            continue;
        }
        let y = py(ly);
        svg.push_str(&format!(
            "<line x1=\"{ml}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#ccc\"/>\n",
            w - mr
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">1e{d}</text>\n",
            ml - 6.0,
            y + 4.0
        ));
    }
    for (i, s) in series.iter().enumerate() {
        let color = palette[i % palette.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x.log10()), py(y.log10())))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        let ly = mt + 16.0 + 16.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly:.2}\" x2=\"{}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            ml + 10.0,
            ml + 34.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
            ml + 40.0,
            ly + 4.0,
            s.name
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
