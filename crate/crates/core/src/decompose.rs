//! Segmentation of a long cylinder into bubble and neck intervals, the neck
//! energy/length accounting, and the trend classifier for degenerating
//! families.
//!
//! A unit window anchored at a grid row is *marked* when its unhalved
//! Dirichlet integral reaches the threshold `epsilon`. Marked windows merge
//! when they overlap or leave a gap of at most one unit, each merged cluster
//! is padded by a unit margin, and the padded clusters are the bubble
//! intervals; their complement forms the necks. With no marked window the
//! whole cylinder is one neck.

use crate::grid::{GridError, MapField};
use crate::invariants::{self, Calibration};
use crate::report::CheckSet;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("cylinder of length {0} is too short to segment (need >= 4)")]
    RangeTooShort(f64),
    #[error("threshold epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("decomposition does not tile the field's cylinder: {0}")]
    MismatchedDecomposition(String),
    #[error("family classification needs at least 3 members, got {0}")]
    TooFewSamples(usize),
    #[error("family core lengths must be strictly decreasing")]
    NotDecreasing,
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecompositionCase {
    /// No window reached the threshold: the whole cylinder is neck.
    AllNeck,
    /// Alternating necks and bubbles.
    Mixed,
}

/// Alternating neck/bubble tiling of the cylinder.
#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub case: DecompositionCase,
    pub necks: Vec<Interval>,
    pub bubbles: Vec<Interval>,
    pub epsilon: f64,
}

impl Decomposition {
    pub fn total_neck_len(&self) -> f64 {
        self.necks.iter().map(Interval::len).sum()
    }
}

/// Mark, merge, pad: the discrete bubble/neck segmentation.
pub fn segment(f: &MapField, epsilon: f64) -> Result<Decomposition, DecomposeError> {
    let g = f.grid();
    if epsilon <= 0.0 {
        return Err(DecomposeError::InvalidEpsilon(epsilon));
    }
    if g.len_t() < 4.0 {
        return Err(DecomposeError::RangeTooShort(g.len_t()));
    }
    let m = g.rows_per_unit();
    // marked unit windows, as row-index intervals [i, i+m]
    let mut marked: Vec<(usize, usize)> = Vec::new();
    for i in 0..g.n_t - m {
        let w = 2.0 * invariants::energy(f, g.t(i), g.t(i + m))?;
        if w >= epsilon {
            marked.push((i, i + m));
        }
    }
    if marked.is_empty() {
        return Ok(Decomposition {
            case: DecompositionCase::AllNeck,
            necks: vec![Interval { start: g.t_min, end: g.t_max }],
            bubbles: vec![],
            epsilon,
        });
    }
    // merge clusters whose gap is at most one unit (m rows)
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in &marked {
        match clusters.last_mut() {
            Some((_, e)) if a <= *e + m => *e = (*e).max(b),
            _ => clusters.push((a, b)),
        }
    }
    // pad by a unit margin and clip; merge again if padding made them touch
    let mut padded: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in &clusters {
        let pa = a.saturating_sub(m);
        let pb = (b + m).min(g.n_t - 1);
        match padded.last_mut() {
            Some((_, e)) if pa <= *e => *e = (*e).max(pb),
            _ => padded.push((pa, pb)),
        }
    }
    let bubbles: Vec<Interval> =
        padded.iter().map(|&(a, b)| Interval { start: g.t(a), end: g.t(b) }).collect();
    let mut necks = Vec::new();
    let mut cursor = g.t_min;
    for b in &bubbles {
        if b.start > cursor + 0.5 * g.h_t {
            necks.push(Interval { start: cursor, end: b.start });
        }
        cursor = b.end;
    }
    if g.t_max > cursor + 0.5 * g.h_t {
        necks.push(Interval { start: cursor, end: g.t_max });
    }
    Ok(Decomposition { case: DecompositionCase::Mixed, necks, bubbles, epsilon })
}

/// Energy/length accounting of the necks against the conserved quantity.
#[derive(Debug, Clone, Serialize)]
pub struct NeckIdentityReport {
    pub total_neck_energy: f64,
    pub total_neck_length: f64,
    /// `0.5 |Re alpha| * sum |I|`.
    pub predicted_energy: f64,
    /// `sqrt(|Re alpha|) * sum |I|`.
    pub predicted_length: f64,
    pub residual_energy: f64,
    pub residual_length: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub alpha_drift: f64,
    pub neck_count: usize,
    pub total_neck_len: f64,
    pub bound_checks: Vec<CheckSet>,
}

/// Evaluate the neck identities for a decomposition of `f`. Predictions use
/// the measured neck length rather than the full cylinder length, which
/// coincide in the limit where bubbles occupy a vanishing fraction.
pub fn neck_identity(
    f: &MapField,
    d: &Decomposition,
    calib: &Calibration,
) -> Result<NeckIdentityReport, DecomposeError> {
    let g = f.grid();
    // the tiling must cover the grid range
    let mut all: Vec<Interval> = d.necks.iter().chain(d.bubbles.iter()).copied().collect();
    all.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut cursor = g.t_min;
    for iv in &all {
        if (iv.start - cursor).abs() > g.h_t {
            return Err(DecomposeError::MismatchedDecomposition(format!(
                "gap or overlap at t = {cursor}"
            )));
        }
        cursor = iv.end;
    }
    if (cursor - g.t_max).abs() > g.h_t {
        return Err(DecomposeError::MismatchedDecomposition(format!(
            "tiling ends at {cursor}, grid at {}",
            g.t_max
        )));
    }

    let a = invariants::alpha(f);
    let mut e_total = 0.0;
    let mut l_total = 0.0;
    let mut len_total = 0.0;
    let mut bound_checks = Vec::new();
    for iv in &d.necks {
        e_total += invariants::energy(f, iv.start, iv.end)?;
        l_total += invariants::average_length(f, iv.start, iv.end)?;
        let (ia, ib) = g.row_range(iv.start, iv.end)?;
        len_total += (ib - ia) as f64 * g.h_t;
        bound_checks.push(invariants::check_neck_bounds(f, iv.start, iv.end, calib)?);
    }
    let predicted_energy = 0.5 * a.alpha.re.abs() * len_total;
    let predicted_length = a.alpha.re.abs().sqrt() * len_total;
    let rel = |got: f64, want: f64| {
        if want.abs() < 1e-12 {
            (got - want).abs()
        } else {
            (got - want).abs() / want.abs()
        }
    };
    Ok(NeckIdentityReport {
        total_neck_energy: e_total,
        total_neck_length: l_total,
        predicted_energy,
        predicted_length,
        residual_energy: rel(e_total, predicted_energy),
        residual_length: rel(l_total, predicted_length),
        alpha_re: a.alpha.re,
        alpha_im: a.alpha.im,
        alpha_drift: a.drift,
        neck_count: d.necks.len(),
        total_neck_len: len_total,
        bound_checks,
    })
}

/// One member of a degenerating family: core length and conserved quantity.
#[derive(Debug, Clone, Copy)]
pub struct FamilySample {
    pub l: f64,
    pub alpha: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    Zero,
    Constant,
    Infinity,
    Indeterminate,
}

/// Verdict for a degenerating family: the limits of the neck energy and
/// neck length indicators and the compactness conclusions they imply.
#[derive(Debug, Clone, Serialize)]
pub struct CompactnessVerdict {
    pub energy_trend: Trend,
    pub length_trend: Trend,
    /// Regime number 1-4 when the trend pair matches one of the four
    /// asymptotic cases.
    pub regime: Option<u8>,
    /// Necks carry no energy in the limit.
    pub w12_modulo_bubbles: bool,
    /// Neck images shrink to points in the limit.
    pub c0_modulo_bubbles: bool,
    pub energy_indicator: Vec<f64>,
    pub length_indicator: Vec<f64>,
}

fn fit_trend(values: &[f64]) -> Trend {
    let scale = values.iter().copied().fold(0.0f64, f64::max);
    if scale <= 1e-12 {
        return Trend::Zero;
    }
    let geo_mean = values.iter().map(|v| v.max(1e-300).ln()).sum::<f64>() / values.len() as f64;
    let geo_mean = geo_mean.exp();
    if values.iter().all(|&v| (v - geo_mean).abs() <= 0.1 * geo_mean) {
        return Trend::Constant;
    }
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let total = values[values.len() - 1] / values[0];
    if decreasing && total <= 0.6 {
        return Trend::Zero;
    }
    if increasing && total >= 1.4 {
        return Trend::Infinity;
    }
    Trend::Indeterminate
}

/// Classify a degenerating family by the monotone trends of
/// `|Re alpha_n| π²/l_n` and `sqrt(|Re alpha_n|) π²/l_n` (relative
/// tolerance 10% for "constant").
pub fn classify_compactness(
    family: &[FamilySample],
) -> Result<CompactnessVerdict, DecomposeError> {
    if family.len() < 3 {
        return Err(DecomposeError::TooFewSamples(family.len()));
    }
    if !family.windows(2).all(|w| w[1].l < w[0].l) {
        return Err(DecomposeError::NotDecreasing);
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let e_ind: Vec<f64> = family.iter().map(|s| s.alpha.re.abs() * pi2 / s.l).collect();
    let l_ind: Vec<f64> = family.iter().map(|s| s.alpha.re.abs().sqrt() * pi2 / s.l).collect();
    let energy_trend = fit_trend(&e_ind);
    let length_trend = fit_trend(&l_ind);
    let regime = match (energy_trend, length_trend) {
        (Trend::Constant, Trend::Infinity) => Some(1),
        (Trend::Zero, Trend::Infinity) => Some(2),
        (Trend::Zero, Trend::Constant) => Some(3),
        (Trend::Zero, Trend::Zero) => Some(4),
        _ => None,
    };
    Ok(CompactnessVerdict {
        energy_trend,
        length_trend,
        regime,
        w12_modulo_bubbles: energy_trend == Trend::Zero,
        c0_modulo_bubbles: length_trend == Trend::Zero,
        energy_indicator: e_ind,
        length_indicator: l_ind,
    })
}
