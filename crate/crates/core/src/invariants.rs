//! Analytic quantities of a map on a cylinder and the inequality checks
//! relating them.
//!
//! The central object is the complex density
//! `phi = |u_t|^2 - |u_th|^2 - 2 i u_t . u_th` of the Hopf quadratic
//! differential. For a harmonic map its circle integral
//! `alpha(t) = ∫ phi dth` is independent of `t`, and the real part of that
//! conserved number controls both the energy and the average length of a
//! neck per unit of cylinder length. Everything here is a pure function of
//! the field.
//!
//! Two discretizations of the Dirichlet integrand coexist on purpose:
//!
//! * [`energy`] sums squared first differences over grid edges. This is the
//!   Lyapunov functional of the flow in [`crate::solver`]: its exact
//!   gradient is the five-point tension, which is what makes the gradient
//!   check there hold to near machine accuracy.
//! * The inequality checks in [`check_neck_bounds`] evaluate energy, length
//!   and `alpha` from one shared set of central-difference slice integrals,
//!   so that identities that are exact per slice stay exact after the `t`
//!   quadrature instead of drowning in mismatched `O(h^2)` terms.
//!
//! The Hopf density itself is evaluated with fourth-order interior stencils:
//! the invariant statements compare `alpha` against zero for conformal maps,
//! and a second-order stencil would bury that signal in its own truncation
//! error on any affordable grid.

use crate::collar::CollarSpec;
use crate::grid::{GridError, MapField};
use crate::manifold::dot;
use crate::report::{CheckReport, CheckSet};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Calibration constants for the gated checks. The underlying statements
/// hold for *some* constants depending only on the target; these defaults
/// are the artifact's calibrated choices and every report records them.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Calibration {
    /// Energy threshold below which a nontrivial closed bubble cannot fit.
    pub eps0: f64,
    /// Gradient smallness required by the convexity of the circular energy.
    pub eps1: f64,
    /// Window-energy smallness required by the integral decay bounds.
    pub eps2: f64,
    /// Constant in `∫ Theta <= C w` and `∫ sqrt(Theta) <= C sqrt(w)`.
    pub window_bound_c: f64,
    /// Constant scaling the `h^2` slack of the discrete convexity check.
    pub convexity_slack_c: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            eps0: 0.5,
            eps1: 0.1,
            eps2: 0.5,
            window_bound_c: 20.0,
            convexity_slack_c: 10.0,
        }
    }
}

/// Complex Hopf density per interior row (rows `1..n_t-1`).
#[derive(Debug, Clone)]
pub struct HopfField {
    pub n_rows: usize,
    pub n_th: usize,
    /// Row-major over interior rows; row `r` corresponds to grid row `r + 1`.
    pub values: Vec<Complex64>,
}

impl HopfField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// The conserved complex quantity with its per-slice samples.
#[derive(Debug, Clone)]
pub struct AlphaResult {
    /// Componentwise median of the per-slice values.
    pub alpha: Complex64,
    /// One value per interior row.
    pub per_slice: Vec<Complex64>,
    /// Maximum modulus of deviation of a slice from `alpha`.
    pub drift: f64,
}

/// Per-row circle integral of `|u_th|^2`.
#[derive(Debug, Clone)]
pub struct ThetaProfile {
    pub values: Vec<f64>,
}

impl ThetaProfile {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Oscillation with the flag telling whether the pairwise scan was exact.
#[derive(Debug, Clone, Copy)]
pub struct Oscillation {
    pub value: f64,
    pub exact: bool,
}

/// Summary statistics of a sub-cylinder.
#[derive(Debug, Clone, Serialize)]
pub struct NeckMetrics {
    pub energy: f64,
    pub avg_length: f64,
    pub oscillation: f64,
    pub oscillation_exact: bool,
    pub window_energy: f64,
    pub interval: (f64, f64),
}

impl NeckMetrics {
    pub fn compute(f: &MapField, t_a: f64, t_b: f64) -> Result<Self, GridError> {
        let osc = oscillation(f, t_a, t_b)?;
        let w = if t_b - t_a >= 1.0 { window_energy(f, t_a, t_b)? } else { 0.0 };
        Ok(NeckMetrics {
            energy: energy(f, t_a, t_b)?,
            avg_length: average_length(f, t_a, t_b)?,
            oscillation: osc.value,
            oscillation_exact: osc.exact,
            window_energy: w,
            interval: (t_a, t_b),
        })
    }
}

/// Half the Dirichlet integral over `[t_a, t_b] x S^1`, as a sum of squared
/// first differences over grid edges (`t`-edges plain, `th`-edges weighted
/// by the trapezoid rule in `t`). Additive over adjacent ranges.
pub fn energy(f: &MapField, t_a: f64, t_b: f64) -> Result<f64, GridError> {
    let (ia, ib) = f.grid().row_range(t_a, t_b)?;
    Ok(energy_rows(f, ia, ib))
}

pub(crate) fn energy_rows(f: &MapField, ia: usize, ib: usize) -> f64 {
    let g = f.grid();
    let (n_th, k) = (g.n_th, f.k());
    let v = f.values();
    let at = |i: usize, j: usize| &v[(i * n_th + j) * k..(i * n_th + j) * k + k];
    let mut e = 0.0;
    let wt = g.h_th / g.h_t; // h_t * h_th / h_t^2
    for i in ia..ib {
        let mut row = 0.0;
        for j in 0..n_th {
            let (a, b) = (at(i, j), at(i + 1, j));
            let mut d2 = 0.0;
            for c in 0..k {
                let d = b[c] - a[c];
                d2 += d * d;
            }
            row += d2;
        }
        e += wt * row;
    }
    let wth = 1.0 / g.h_th; // h_th / h_th^2
    for i in ia..=ib {
        let trap = if i == ia || i == ib { 0.5 } else { 1.0 };
        let mut row = 0.0;
        for j in 0..n_th {
            let (a, b) = (at(i, j), at(i, (j + 1) % n_th));
            let mut d2 = 0.0;
            for c in 0..k {
                let d = b[c] - a[c];
                d2 += d * d;
            }
            row += d2;
        }
        e += trap * g.h_t * wth * row;
    }
    0.5 * e
}

/// Per-row profile `Theta(t_i) = ∫ |u_th|^2 dth` from central differences.
pub fn theta_profile(f: &MapField) -> ThetaProfile {
    let g = f.grid();
    let (_, du_th) = f.partials();
    let k = f.k();
    let mut sq = vec![0.0; g.nodes()];
    for (n, node) in du_th.chunks(k).enumerate() {
        sq[n] = dot(node, node);
    }
    let values = (0..g.n_t).map(|i| g.slice_integral(&sq, i)).collect();
    ThetaProfile { values }
}

// Fourth-order row-direction differences (central inside, biased five-point
// on the rows next to the boundary); fourth-order wrap in th.
fn hopf_derivatives(f: &MapField) -> (Vec<f64>, Vec<f64>) {
    let g = f.grid();
    let (n_t, n_th, k) = (g.n_t, g.n_th, f.k());
    let v = f.values();
    let at = |i: usize, j: usize| &v[(i * n_th + j) * k..(i * n_th + j) * k + k];
    let mut du_t = vec![0.0; v.len()];
    let mut du_th = vec![0.0; v.len()];
    for i in 1..n_t - 1 {
        for j in 0..n_th {
            let idx = (i * n_th + j) * k;
            let (jp, jm) = (at(i, (j + 1) % n_th), at(i, (j + n_th - 1) % n_th));
            let (jp2, jm2) = (at(i, (j + 2) % n_th), at(i, (j + n_th - 2) % n_th));
            for c in 0..k {
                du_th[idx + c] =
                    (8.0 * (jp[c] - jm[c]) - (jp2[c] - jm2[c])) / (12.0 * g.h_th);
            }
            if i >= 2 && i + 2 < n_t {
                let (ip, im) = (at(i + 1, j), at(i - 1, j));
                let (ip2, im2) = (at(i + 2, j), at(i - 2, j));
                for c in 0..k {
                    du_t[idx + c] =
                        (8.0 * (ip[c] - im[c]) - (ip2[c] - im2[c])) / (12.0 * g.h_t);
                }
            } else if i == 1 {
                let (f0, f1, f2, f3, f4) = (at(0, j), at(1, j), at(2, j), at(3, j), at(4, j));
                for c in 0..k {
                    du_t[idx + c] = (-3.0 * f0[c] - 10.0 * f1[c] + 18.0 * f2[c]
                        - 6.0 * f3[c]
                        + f4[c])
                        / (12.0 * g.h_t);
                }
            } else {
                let (f0, f1, f2, f3, f4) = (
                    at(n_t - 1, j),
                    at(n_t - 2, j),
                    at(n_t - 3, j),
                    at(n_t - 4, j),
                    at(n_t - 5, j),
                );
                for c in 0..k {
                    du_t[idx + c] = -(-3.0 * f0[c] - 10.0 * f1[c] + 18.0 * f2[c]
                        - 6.0 * f3[c]
                        + f4[c])
                        / (12.0 * g.h_t);
                }
            }
        }
    }
    (du_t, du_th)
}

/// Hopf density per interior node.
pub fn hopf(f: &MapField) -> HopfField {
    let g = f.grid();
    let (n_t, n_th, k) = (g.n_t, g.n_th, f.k());
    let (du_t, du_th) = hopf_derivatives(f);
    let mut values = Vec::with_capacity((n_t - 2) * n_th);
    for i in 1..n_t - 1 {
        for j in 0..n_th {
            let idx = (i * n_th + j) * k;
            let dt = &du_t[idx..idx + k];
            let dth = &du_th[idx..idx + k];
            values.push(Complex64::new(
                dot(dt, dt) - dot(dth, dth),
                -2.0 * dot(dt, dth),
            ));
        }
    }
    HopfField { n_rows: n_t - 2, n_th, values }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Per-slice circle integrals of the Hopf density, aggregated by the
/// componentwise median (robust to the lower-order stencils on the rows
/// adjacent to the boundary), with the worst slice deviation reported.
pub fn alpha(f: &MapField) -> AlphaResult {
    let g = f.grid();
    let h = hopf(f);
    let per_slice: Vec<Complex64> = (0..h.n_rows)
        .map(|r| {
            let row = &h.values[r * h.n_th..(r + 1) * h.n_th];
            row.iter().sum::<Complex64>() * g.h_th
        })
        .collect();
    let a = Complex64::new(
        median(per_slice.iter().map(|z| z.re).collect()),
        median(per_slice.iter().map(|z| z.im).collect()),
    );
    let drift = per_slice.iter().map(|z| (z - a).norm()).fold(0.0, f64::max);
    AlphaResult { alpha: a, per_slice, drift }
}

/// Restriction of [`alpha`] to the interior rows of `[t_a, t_b]`.
pub fn alpha_on(f: &MapField, t_a: f64, t_b: f64) -> Result<AlphaResult, GridError> {
    let g = f.grid();
    let (ia, ib) = g.row_range(t_a, t_b)?;
    let h = hopf(f);
    let (lo, hi) = (ia.max(1), ib.min(g.n_t - 2));
    if hi <= lo {
        return Err(GridError::EmptyRange(t_a, t_b));
    }
    let per_slice: Vec<Complex64> = (lo..=hi)
        .map(|i| {
            let r = i - 1;
            let row = &h.values[r * h.n_th..(r + 1) * h.n_th];
            row.iter().sum::<Complex64>() * g.h_th
        })
        .collect();
    let a = Complex64::new(
        median(per_slice.iter().map(|z| z.re).collect()),
        median(per_slice.iter().map(|z| z.im).collect()),
    );
    let drift = per_slice.iter().map(|z| (z - a).norm()).fold(0.0, f64::max);
    Ok(AlphaResult { alpha: a, per_slice, drift })
}

/// Average length `L = ∫ (∫ |u_t|^2 dth)^{1/2} dt` over the snapped range.
/// For a `th`-independent band `u(t, th) = c(t)` this equals `sqrt(2π)`
/// times the length of the curve `c`.
pub fn average_length(f: &MapField, t_a: f64, t_b: f64) -> Result<f64, GridError> {
    let g = f.grid();
    let (ia, ib) = g.row_range(t_a, t_b)?;
    let (du_t, _) = f.partials();
    let k = f.k();
    let mut sq = vec![0.0; g.nodes()];
    for (n, node) in du_t.chunks(k).enumerate() {
        sq[n] = dot(node, node);
    }
    let per_row: Vec<f64> =
        (0..g.n_t).map(|i| g.slice_integral(&sq, i).max(0.0).sqrt()).collect();
    Ok(g.trapezoid_rows(&per_row, ia, ib))
}

const OSC_EXACT_LIMIT: usize = 4096;

/// Supremum of pairwise target distances over the nodes of the range.
///
/// Exact over all pairs up to 4096 nodes; beyond that, a deterministic
/// stratified subsample (plus the full first and last rows of the range) is
/// scanned and the result is flagged as sampled.
pub fn oscillation(f: &MapField, t_a: f64, t_b: f64) -> Result<Oscillation, GridError> {
    let g = f.grid();
    let (ia, ib) = g.row_range(t_a, t_b)?;
    let rows = ib - ia + 1;
    let total = rows * g.n_th;
    let mut nodes: Vec<(usize, usize)> = Vec::new();
    let exact = total <= OSC_EXACT_LIMIT;
    if exact {
        for i in ia..=ib {
            for j in 0..g.n_th {
                nodes.push((i, j));
            }
        }
    } else {
        // stride so the sample stays near the exact-scan budget
        let budget_rows = (OSC_EXACT_LIMIT / g.n_th.min(64)).max(2);
        let stride_t = (rows / budget_rows).max(1);
        let stride_th = (g.n_th / 64).max(1);
        for i in (ia..=ib).step_by(stride_t) {
            for j in (0..g.n_th).step_by(stride_th) {
                nodes.push((i, j));
            }
        }
        for j in 0..g.n_th {
            nodes.push((ia, j));
            nodes.push((ib, j));
        }
    }
    let m = f.target();
    let mut best = 0.0f64;
    for (x, &(i1, j1)) in nodes.iter().enumerate() {
        let p = f.value(i1, j1);
        for &(i2, j2) in &nodes[x + 1..] {
            let d = m.distance(p, f.value(i2, j2));
            if d > best {
                best = d;
            }
        }
    }
    Ok(Oscillation { value: best, exact })
}

/// Largest unhalved Dirichlet integral `∫∫ |du|^2` over a unit window
/// anchored at a grid row of `[t_a, t_b]`.
pub fn window_energy(f: &MapField, t_a: f64, t_b: f64) -> Result<f64, GridError> {
    let g = f.grid();
    if t_b - t_a < 1.0 - 1e-12 {
        return Err(GridError::RangeTooShort(t_a, t_b));
    }
    let (ia, ib) = g.row_range(t_a, t_b)?;
    let m = g.rows_per_unit();
    if ib < ia + m {
        return Err(GridError::RangeTooShort(t_a, t_b));
    }
    let mut best = 0.0f64;
    for i in ia..=ib - m {
        let w = 2.0 * energy_rows(f, i, i + m);
        if w > best {
            best = w;
        }
    }
    Ok(best)
}

/// Largest window energy over the whole cylinder.
pub fn window_energy_full(f: &MapField) -> Result<f64, GridError> {
    let g = f.grid();
    window_energy(f, g.t_min, g.t_max)
}

// Shared central-difference slice integrals: per-row values of
// R_i = ∫ (|u_t|^2 - |u_th|^2) dth, I_i = -2 ∫ u_t . u_th dth,
// Theta_i = ∫ |u_th|^2 dth. One consistent discretization for all of the
// inequality checks below.
struct SliceData {
    re: Vec<f64>,
    im: Vec<f64>,
    theta: Vec<f64>,
    grad_sup: Vec<f64>,
}

fn slice_data(f: &MapField) -> SliceData {
    let g = f.grid();
    let (du_t, du_th) = f.partials();
    let k = f.k();
    let n = g.nodes();
    let (mut re_sq, mut im_sq, mut th_sq) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut grad_sup = vec![0.0f64; g.n_t];
    for node in 0..n {
        let dt = &du_t[node * k..node * k + k];
        let dth = &du_th[node * k..node * k + k];
        let (a, b, c) = (dot(dt, dt), dot(dth, dth), dot(dt, dth));
        re_sq[node] = a - b;
        im_sq[node] = -2.0 * c;
        th_sq[node] = b;
        let i = node / g.n_th;
        grad_sup[i] = grad_sup[i].max((a + b).sqrt());
    }
    SliceData {
        re: (0..g.n_t).map(|i| g.slice_integral(&re_sq, i)).collect(),
        im: (0..g.n_t).map(|i| g.slice_integral(&im_sq, i)).collect(),
        theta: (0..g.n_t).map(|i| g.slice_integral(&th_sq, i)).collect(),
        grad_sup,
    }
}

fn rel_slack(lhs: f64, rhs: f64) -> f64 {
    1e-6 * (1.0 + lhs.abs() + rhs.abs())
}

/// Convexity of the circular energy: on the largest contiguous block of
/// rows where `sup |∇u| <= eps1`, the discrete second difference of
/// `Theta` must dominate `Theta` itself up to an `O(h^2)` slack, and the
/// integrals of `Theta^nu` (`nu = 1, 1/2`) over the block are bounded by
/// the block's endpoint values.
pub fn check_theta_convexity(f: &MapField, eps1: f64, calib: &Calibration) -> CheckSet {
    let g = f.grid();
    let sd = slice_data(f);
    let theta = &sd.theta;
    let mut set = CheckSet::default();

    // largest contiguous run of gated rows
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for i in 0..=g.n_t {
        let ok = i < g.n_t && sd.grad_sup[i] <= eps1;
        match (ok, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                if best.map_or(true, |(a, b)| i - 1 - s > b - a) {
                    best = Some((s, i - 1));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    let Some((lo, hi)) = best.filter(|(a, b)| b - a >= 2) else {
        set.push(CheckReport::gated_out(
            "theta_convexity",
            "no contiguous rows with sup|grad u| within the gate",
        ));
        return set;
    };

    let max_theta = theta[lo..=hi].iter().copied().fold(0.0, f64::max);
    let slack = calib.convexity_slack_c * g.h_t * g.h_t * max_theta + 1e-14;
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for i in lo + 1..hi {
        let second = (theta[i - 1] - 2.0 * theta[i] + theta[i + 1]) / (g.h_t * g.h_t);
        let excess = theta[i] - second; // must stay <= slack
        worst = worst.max(excess);
        if excess > slack {
            violations += 1;
        }
    }
    set.push(
        CheckReport {
            name: "theta_convexity".into(),
            lhs: worst,
            rhs: 0.0,
            slack,
            pass: violations == 0,
            precondition_met: true,
            note: Some(format!("rows {lo}..={hi}, {violations} violations")),
        },
    );

    for (name, nu) in [("theta_decay_integral", 1.0), ("theta_decay_sqrt_integral", 0.5_f64)] {
        let per_row: Vec<f64> = theta.iter().map(|&x| x.max(0.0).powf(nu)).collect();
        let lhs = g.trapezoid_rows(&per_row, lo, hi);
        let rhs = 2.0 * (per_row[lo] + per_row[hi]) / nu;
        let slack = rel_slack(lhs, rhs)
            + calib.convexity_slack_c * g.h_t * g.h_t * (1.0 + max_theta.powf(nu));
        set.push(CheckReport::evaluate(name, lhs, rhs, slack).with_note(format!("nu = {nu}")));
    }
    set
}

/// The neck inequalities on `[t_a, t_b]`: energy and length against the
/// conserved quantity, the imaginary-part bound, and (gated on small window
/// energy) the integral bounds on `Theta`.
///
/// All sides are evaluated from one set of central-difference slice
/// integrals, with the range value of `alpha` taken as the trapezoid mean of
/// the per-slice integrals — the discrete analogue of the constancy that the
/// continuum proof integrates. The length check charges the measured slice
/// drift to its slack, since a discrete map conserves the slice integral
/// only up to truncation and solver tolerance.
pub fn check_neck_bounds(
    f: &MapField,
    t_a: f64,
    t_b: f64,
    calib: &Calibration,
) -> Result<CheckSet, GridError> {
    let g = f.grid();
    let (ia, ib) = g.row_range(t_a, t_b)?;
    let len = (ib - ia) as f64 * g.h_t;
    let sd = slice_data(f);

    let mean_re = g.trapezoid_rows(&sd.re, ia, ib) / len;
    let mean_im = g.trapezoid_rows(&sd.im, ia, ib) / len;
    let int_theta = g.trapezoid_rows(&sd.theta, ia, ib);
    let sqrt_theta: Vec<f64> = sd.theta.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let int_sqrt_theta = g.trapezoid_rows(&sqrt_theta, ia, ib);
    let ut_sq: Vec<f64> = (0..g.n_t).map(|i| (sd.re[i] + sd.theta[i]).max(0.0)).collect();
    let e_c = 0.5 * g.trapezoid_rows(&ut_sq, ia, ib) + 0.5 * int_theta;
    let len_rows: Vec<f64> = ut_sq.iter().map(|&x| x.sqrt()).collect();
    let l_c = g.trapezoid_rows(&len_rows, ia, ib);

    let mut set = CheckSet::default();

    let lhs = (e_c - 0.5 * mean_re.abs() * len).abs();
    set.push(CheckReport::evaluate("neck_energy_balance", lhs, int_theta, rel_slack(lhs, int_theta)));

    let drift_sqrt = (ia..=ib)
        .map(|i| (sd.re[i].abs().sqrt() - mean_re.abs().sqrt()).abs())
        .fold(0.0, f64::max);
    let lhs = (l_c - mean_re.abs().sqrt() * len).abs();
    let slack = rel_slack(lhs, int_sqrt_theta) + len * drift_sqrt;
    set.push(
        CheckReport::evaluate("neck_length_balance", lhs, int_sqrt_theta, slack)
            .with_note(format!("slice drift budget {:.3e}", len * drift_sqrt)),
    );

    let lhs = mean_im.abs() * len;
    let rhs = 2.0 * (2.0 * e_c).max(0.0).sqrt() * int_theta.max(0.0).sqrt();
    set.push(CheckReport::evaluate("alpha_imaginary_bound", lhs, rhs, rel_slack(lhs, rhs)));

    // window-energy-gated integral bounds
    match window_energy(f, t_a, t_b) {
        Ok(w) if w <= calib.eps2 => {
            let rhs = calib.window_bound_c * w;
            set.push(CheckReport::evaluate(
                "theta_window_bound",
                int_theta,
                rhs,
                rel_slack(int_theta, rhs),
            ));
            let rhs = calib.window_bound_c * w.sqrt();
            set.push(CheckReport::evaluate(
                "theta_sqrt_window_bound",
                int_sqrt_theta,
                rhs,
                rel_slack(int_sqrt_theta, rhs),
            ));
        }
        Ok(w) => {
            set.push(CheckReport::gated_out(
                "theta_window_bound",
                &format!("window energy {w:.3e} above the gate"),
            ));
            set.push(CheckReport::gated_out(
                "theta_sqrt_window_bound",
                &format!("window energy {w:.3e} above the gate"),
            ));
        }
        Err(_) => {
            set.push(CheckReport::gated_out("theta_window_bound", "range shorter than one window"));
            set.push(CheckReport::gated_out(
                "theta_sqrt_window_bound",
                "range shorter than one window",
            ));
        }
    }
    Ok(set)
}

/// Oscillation bound `osc u <= 4π sup |∇u| + L / sqrt(2π)`.
pub fn check_osc_bound(f: &MapField, t_a: f64, t_b: f64) -> Result<CheckSet, GridError> {
    let sd = slice_data(f);
    let g = f.grid();
    let (ia, ib) = g.row_range(t_a, t_b)?;
    let sup_grad = sd.grad_sup[ia..=ib].iter().copied().fold(0.0, f64::max);
    let l = average_length(f, t_a, t_b)?;
    let osc = oscillation(f, t_a, t_b)?;
    let rhs = 4.0 * PI * sup_grad + l / (2.0 * PI).sqrt();
    let mut set = CheckSet::default();
    set.push(
        CheckReport::evaluate("oscillation_bound", osc.value, rhs, 1e-6 * rhs)
            .with_note(if osc.exact { "exact pairwise scan".into() } else { "sampled scan".into() }),
    );
    Ok(set)
}

/// Energy computed in flat coordinates against the same sum with the
/// collar's conformal weight multiplied in and divided out per row. The
/// conformal factor of a two-dimensional metric cancels against the inverse
/// metric in the Dirichlet integrand, so this must vanish to rounding.
pub fn conformal_energy_invariance(f: &MapField, collar: &CollarSpec) -> f64 {
    let g = f.grid();
    let v = f.values();
    let (n_th, k) = (g.n_th, f.k());
    let at = |i: usize, j: usize| &v[(i * n_th + j) * k..(i * n_th + j) * k + k];
    let lam: Vec<f64> = (0..g.n_t)
        .map(|i| collar.conformal_factor(g.t(i).clamp(collar.t_lo, collar.t_hi)).unwrap())
        .collect();
    let mut e_flat = 0.0;
    let mut e_conf = 0.0;
    let wt = g.h_th / g.h_t;
    for i in 0..g.n_t - 1 {
        let weight = lam[i] * lam[i] * (1.0 / (lam[i] * lam[i]));
        for j in 0..n_th {
            let (a, b) = (at(i, j), at(i + 1, j));
            let mut d2 = 0.0;
            for c in 0..k {
                let d = b[c] - a[c];
                d2 += d * d;
            }
            e_flat += wt * d2;
            e_conf += wt * weight * d2;
        }
    }
    let wth = 1.0 / g.h_th;
    for i in 0..g.n_t {
        let trap = if i == 0 || i == g.n_t - 1 { 0.5 } else { 1.0 };
        let weight = lam[i] * lam[i] * (1.0 / (lam[i] * lam[i]));
        for j in 0..n_th {
            let (a, b) = (at(i, j), at(i, (j + 1) % n_th));
            let mut d2 = 0.0;
            for c in 0..k {
                let d = b[c] - a[c];
                d2 += d * d;
            }
            e_flat += trap * g.h_t * wth * d2;
            e_conf += trap * g.h_t * wth * weight * d2;
        }
    }
    if e_flat == 0.0 {
        0.0
    } else {
        (e_flat - e_conf).abs() / e_flat
    }
}

/// Discrete antiholomorphic derivative of the Hopf field:
/// `max |(d_t + i d_th) phi| / 2` over the inner nodes, by central
/// differences of the per-node Hopf values. Small for harmonic maps.
pub fn hopf_dbar_sup(f: &MapField) -> f64 {
    let g = f.grid();
    let h = hopf(f);
    let (rows, n_th) = (h.n_rows, h.n_th);
    if rows < 3 {
        return 0.0;
    }
    let at = |r: usize, j: usize| h.values[r * n_th + j];
    let mut sup = 0.0f64;
    for r in 1..rows - 1 {
        for j in 0..n_th {
            let dt = (at(r + 1, j) - at(r - 1, j)) / (2.0 * g.h_t);
            let dth = (at(r, (j + 1) % n_th) - at(r, (j + n_th - 1) % n_th)) / (2.0 * g.h_th);
            let dbar = 0.5 * (dt + Complex64::i() * dth);
            sup = sup.max(dbar.norm());
        }
    }
    sup
}
