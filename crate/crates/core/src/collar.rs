//! Closed-form geometry of the hyperbolic collar around a short closed
//! geodesic of length `l`.
//!
//! The collar is conformally the flat cylinder
//! `t in ((2π/l) arctan(sinh(l/2)), (2π/l)(π - arctan(sinh(l/2))))` with
//! conformal factor `λ(t) = l / (2π sin(l t / 2π))`; the core geodesic sits
//! at `t = π²/l`. The injectivity radius along the collar satisfies
//! `sinh(injrad) sin(l t / 2π) = sinh(l/2)`, which also yields the
//! `δ`-subcollar — the part where the injectivity radius is at most `δ`.
//!
//! Everything is a closed form; quadrature appears only as an independent
//! cross-check of the area identity.

use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CollarError {
    #[error("core length {0} outside (0, 2 arcsinh 1]")]
    LengthOutOfRange(f64),
    #[error("coordinate t = {0} outside the collar")]
    OutOfCollar(f64),
    #[error("fermi point (r = {0}, phi = {1}) outside the collar region")]
    OutOfRegion(f64, f64),
    #[error("delta = {0} too small: the subcollar needs sinh(l/2) <= sinh(delta)")]
    DeltaTooSmall(f64),
    #[error("delta = {0} outside (0, arcsinh 1]")]
    DeltaOutOfRange(f64),
}

/// Upper bound on admissible core lengths: `2 arcsinh(1)`, i.e. the length
/// below which a closed geodesic on a hyperbolic surface is "thin".
pub fn max_core_length() -> f64 {
    2.0 * 1.0_f64.asinh()
}

/// A collar around a core geodesic of length `l`, with the derived cylinder.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CollarSpec {
    pub l: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub core_t: f64,
}

/// Bounds of the `δ`-subcollar `[t1, t2]`, the locus of injectivity radius
/// at most `δ`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubcollarBounds {
    pub delta: f64,
    pub t1: f64,
    pub t2: f64,
}

impl SubcollarBounds {
    pub fn len(&self) -> f64 {
        self.t2 - self.t1
    }
}

/// Cylinder bounds of the collar for core length `l`.
pub fn cylinder_bounds(l: f64) -> Result<(f64, f64), CollarError> {
    if !(l > 0.0 && l <= max_core_length() + 1e-15) {
        return Err(CollarError::LengthOutOfRange(l));
    }
    let a = (0.5 * l).sinh().atan();
    Ok(((2.0 * PI / l) * a, (2.0 * PI / l) * (PI - a)))
}

/// Area `l / sinh(l/2)` of each half of the collar on one side of the core
/// geodesic; see [`CollarSpec::area_quadrature`] for the cross-check.
pub fn collar_area(l: f64) -> Result<f64, CollarError> {
    if !(l > 0.0 && l <= max_core_length() + 1e-15) {
        return Err(CollarError::LengthOutOfRange(l));
    }
    Ok(l / (0.5 * l).sinh())
}

impl CollarSpec {
    pub fn new(l: f64) -> Result<Self, CollarError> {
        let (t_lo, t_hi) = cylinder_bounds(l)?;
        Ok(CollarSpec { l, t_lo, t_hi, core_t: PI * PI / l })
    }

    pub fn len(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    /// Conformal factor `λ(t) = l / (2π sin(l t / 2π))`, minimal at the core.
    pub fn conformal_factor(&self, t: f64) -> Result<f64, CollarError> {
        self.check_t(t)?;
        Ok(self.l / (2.0 * PI * (self.l * t / (2.0 * PI)).sin()))
    }

    /// Injectivity radius at cylinder coordinate `t`; equals `l/2` at the
    /// core (returned in closed form there) and grows monotonically towards
    /// the two ends.
    pub fn injrad(&self, t: f64) -> Result<f64, CollarError> {
        self.check_t(t)?;
        let s = (self.l * t / (2.0 * PI)).sin();
        if s == 1.0 {
            return Ok(0.5 * self.l);
        }
        Ok(((0.5 * self.l).sinh() / s).asinh())
    }

    /// The `δ`-subcollar `[t1, t2]` with `t1 = (2π/l) arcsin(sinh(l/2)/sinh δ)`
    /// and `t2 = 2π²/l - t1`.
    pub fn subcollar(&self, delta: f64) -> Result<SubcollarBounds, CollarError> {
        if !(delta > 0.0 && delta <= 1.0_f64.asinh() + 1e-15) {
            return Err(CollarError::DeltaOutOfRange(delta));
        }
        let ratio = (0.5 * self.l).sinh() / delta.sinh();
        if ratio > 1.0 {
            return Err(CollarError::DeltaTooSmall(delta));
        }
        let t1 = (2.0 * PI / self.l) * ratio.asin();
        Ok(SubcollarBounds { delta, t1, t2: 2.0 * PI * PI / self.l - t1 })
    }

    /// Cylinder image `(t, th) = ((2π/l) phi, (2π/l) log r)` of a point given
    /// in the upper-half-plane collar region coordinates `z = r e^{i phi}`.
    pub fn fermi_to_cylinder(&self, r: f64, phi: f64) -> Result<(f64, f64), CollarError> {
        let a = (0.5 * self.l).sinh().atan();
        if !(1.0 - 1e-12..=(self.l.exp()) * (1.0 + 1e-12)).contains(&r)
            || !(a - 1e-12..=PI - a + 1e-12).contains(&phi)
        {
            return Err(CollarError::OutOfRegion(r, phi));
        }
        Ok(((2.0 * PI / self.l) * phi, (2.0 * PI / self.l) * r.ln()))
    }

    /// Injectivity radius expressed in the half-plane coordinates,
    /// `sinh(injrad) sin(phi) = sinh(l/2)`.
    pub fn injrad_fermi(&self, phi: f64) -> f64 {
        ((0.5 * self.l).sinh() / phi.sin()).asinh()
    }

    /// Numeric `∫∫ λ² dt dth` over the half cylinder `[core_t, t_hi]`, the
    /// quadrature cross-check of [`collar_area`]. Uses the substitution
    /// `x = l t / 2π`, under which the integrand is `csc² x` — smooth on the
    /// closed half-range — integrated by composite Simpson.
    pub fn area_quadrature(&self, panels: usize) -> f64 {
        let x_lo = 0.5 * PI; // core
        let x_hi = self.l * self.t_hi / (2.0 * PI);
        let n = panels.max(8) * 2;
        let h = (x_hi - x_lo) / n as f64;
        let f = |x: f64| 1.0 / ((x).sin() * (x).sin());
        let mut s = f(x_lo) + f(x_hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(x_lo + i as f64 * h);
        }
        // prefactor: 2π (from dth) · (l/2π)² · (2π/l) = l
        self.l * s * h / 3.0
    }

    fn check_t(&self, t: f64) -> Result<(), CollarError> {
        if t < self.t_lo - 1e-12 || t > self.t_hi + 1e-12 {
            return Err(CollarError::OutOfCollar(t));
        }
        Ok(())
    }
}
