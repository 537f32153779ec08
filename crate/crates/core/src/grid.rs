//! Discretization of the flat cylinder `[t_min, t_max] x S^1` with metric
//! `dt^2 + dth^2` and the discrete calculus on it.
//!
//! The `t` direction is a bounded interval sampled at `n_t` nodes including
//! both endpoints; the `th` direction is periodic with `n_th` nodes spaced
//! `2π/n_th`. Differentiation is by second-order central differences
//! (one-sided second-order stencils on the two boundary rows), integration
//! by the rectangle rule in `th` composed with the trapezoid rule in `t`.
//!
//! # Map file format
//!
//! [`MapField::write_to`] emits a stable, line-oriented text format:
//!
//! ```text
//! necklab mapfield v1
//! target sphere 3                      (or: target torus K b11 b12 ... bKK)
//! grid <t_min> <t_max> <n_t> <n_th>
//! <n_t * n_th lines of K floats, row-major in t, th fastest>
//! ```
//!
//! Floats are written with the shortest representation that round-trips, so
//! write/read is bit-exact.

use crate::manifold::{ManifoldError, TargetManifold};
use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("range [{0}, {1}] snaps to fewer than two grid rows")]
    EmptyRange(f64, f64),
    #[error("range [{0}, {1}] is shorter than one unit window")]
    RangeTooShort(f64, f64),
    #[error("field value at node ({0}, {1}) is not finite")]
    NotFinite(usize, usize),
    #[error("field value at node ({0}, {1}) is off the target: {2}")]
    OffTarget(usize, usize, ManifoldError),
    #[error("value buffer has wrong length: expected {expected}, got {got}")]
    BadShape { expected: usize, got: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {0}: {1}")]
    Parse(usize, String),
}

/// Uniform grid on `[t_min, t_max] x S^1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub n_th: usize,
    pub h_t: f64,
    pub h_th: f64,
}

impl CylinderGrid {
    pub fn new(t_min: f64, t_max: f64, n_t: usize, n_th: usize) -> Result<Self, GridError> {
        if !(t_max - t_min > 2.0) {
            return Err(GridError::InvalidGrid(format!(
                "cylinder length must exceed 2, got {}",
                t_max - t_min
            )));
        }
        if n_t < 8 || n_th < 8 {
            return Err(GridError::InvalidGrid(format!(
                "need at least 8 nodes per direction, got {n_t} x {n_th}"
            )));
        }
        Ok(CylinderGrid {
            t_min,
            t_max,
            n_t,
            n_th,
            h_t: (t_max - t_min) / (n_t - 1) as f64,
            h_th: 2.0 * PI / n_th as f64,
        })
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.h_t
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.h_th
    }

    pub fn len_t(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn nodes(&self) -> usize {
        self.n_t * self.n_th
    }

    /// Nearest grid row to coordinate `t`, clamped to the grid.
    pub fn nearest_row(&self, t: f64) -> usize {
        let r = ((t - self.t_min) / self.h_t).round();
        (r.max(0.0) as usize).min(self.n_t - 1)
    }

    /// Snap `[t_a, t_b]` to grid rows; at least two rows must fall inside.
    pub fn row_range(&self, t_a: f64, t_b: f64) -> Result<(usize, usize), GridError> {
        let ia = self.nearest_row(t_a);
        let ib = self.nearest_row(t_b);
        if ib <= ia {
            return Err(GridError::EmptyRange(t_a, t_b));
        }
        Ok((ia, ib))
    }

    /// Number of grid steps closest to a unit of `t` (>= 1). Unit windows
    /// are `rows_per_unit` steps wide, so their length is `1 + O(h_t)`.
    pub fn rows_per_unit(&self) -> usize {
        (1.0 / self.h_t).round().max(1.0) as usize
    }

    /// Integral over one circle `{t_i} x S^1` by the rectangle rule, which is
    /// exact for trigonometric polynomials of degree below `n_th/2`.
    pub fn slice_integral(&self, g: &[f64], i_t: usize) -> f64 {
        debug_assert_eq!(g.len(), self.nodes());
        let row = &g[i_t * self.n_th..(i_t + 1) * self.n_th];
        row.iter().sum::<f64>() * self.h_th
    }

    /// Integral of a nodal scalar over `[t_a, t_b] x S^1`: trapezoid in `t`
    /// composed with `slice_integral`. Endpoints snap to grid rows.
    pub fn integrate(&self, g: &[f64], t_a: f64, t_b: f64) -> Result<f64, GridError> {
        let (ia, ib) = self.row_range(t_a, t_b)?;
        Ok(self.integrate_rows(g, ia, ib))
    }

    pub(crate) fn integrate_rows(&self, g: &[f64], ia: usize, ib: usize) -> f64 {
        let mut acc = 0.5 * (self.slice_integral(g, ia) + self.slice_integral(g, ib));
        for i in ia + 1..ib {
            acc += self.slice_integral(g, i);
        }
        acc * self.h_t
    }

    /// Trapezoid rule over rows `ia..=ib` applied to per-row values.
    pub(crate) fn trapezoid_rows(&self, per_row: &[f64], ia: usize, ib: usize) -> f64 {
        debug_assert!(ib > ia && ib < per_row.len());
        let mut acc = 0.5 * (per_row[ia] + per_row[ib]);
        for v in &per_row[ia + 1..ib] {
            acc += v;
        }
        acc * self.h_t
    }
}

/// A discretized map `u` from the cylinder into an embedded target, stored
/// row-major in `t` with `th` fastest, `K` ambient components per node.
#[derive(Debug, Clone)]
pub struct MapField {
    grid: CylinderGrid,
    target: TargetManifold,
    values: Vec<f64>,
}

impl MapField {
    /// Wrap a value buffer, validating finiteness and on-target tolerance.
    pub fn new(
        grid: CylinderGrid,
        target: TargetManifold,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        let k = target.ambient_dim();
        if values.len() != grid.nodes() * k {
            return Err(GridError::BadShape { expected: grid.nodes() * k, got: values.len() });
        }
        let f = MapField { grid, target, values };
        f.validate()?;
        Ok(f)
    }

    /// Sample `u(t, th)` on the grid, projecting each value onto the target.
    pub fn from_fn(
        grid: CylinderGrid,
        target: TargetManifold,
        mut u: impl FnMut(f64, f64) -> Vec<f64>,
    ) -> Result<Self, GridError> {
        let k = target.ambient_dim();
        let mut values = vec![0.0; grid.nodes() * k];
        for i in 0..grid.n_t {
            for j in 0..grid.n_th {
                let p = u(grid.t(i), grid.theta(j));
                let idx = (i * grid.n_th + j) * k;
                target
                    .project_into(&p, &mut values[idx..idx + k])
                    .map_err(|e| GridError::OffTarget(i, j, e))?;
            }
        }
        MapField::new(grid, target, values)
    }

    fn validate(&self) -> Result<(), GridError> {
        let k = self.k();
        for i in 0..self.grid.n_t {
            for j in 0..self.grid.n_th {
                let v = self.value(i, j);
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(GridError::NotFinite(i, j));
                }
                if let Err(e) = self.target.check_on(v, 1e-8) {
                    return Err(GridError::OffTarget(i, j, e));
                }
                let _ = k;
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &CylinderGrid {
        &self.grid
    }

    pub fn target(&self) -> &TargetManifold {
        &self.target
    }

    pub fn k(&self) -> usize {
        self.target.ambient_dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut Vec<f64> {
        &mut self.values
    }

    pub fn value(&self, i_t: usize, i_th: usize) -> &[f64] {
        let k = self.k();
        let idx = (i_t * self.grid.n_th + i_th) * k;
        &self.values[idx..idx + k]
    }

    /// Nodal first derivatives `(u_t, u_th)`, each shaped like `values`.
    ///
    /// Central differences inside, one-sided second-order stencils on the
    /// two boundary rows, periodic wrap in `th`.
    pub fn partials(&self) -> (Vec<f64>, Vec<f64>) {
        let (n_t, n_th, k) = (self.grid.n_t, self.grid.n_th, self.k());
        let (ht2, hth2) = (2.0 * self.grid.h_t, 2.0 * self.grid.h_th);
        let v = &self.values;
        let at = |i: usize, j: usize| &v[(i * n_th + j) * k..(i * n_th + j) * k + k];
        let mut du_t = vec![0.0; v.len()];
        let mut du_th = vec![0.0; v.len()];
        for i in 0..n_t {
            for j in 0..n_th {
                let idx = (i * n_th + j) * k;
                let jp = at(i, (j + 1) % n_th);
                let jm = at(i, (j + n_th - 1) % n_th);
                for c in 0..k {
                    du_th[idx + c] = (jp[c] - jm[c]) / hth2;
                }
                if i == 0 {
                    let (f0, f1, f2) = (at(0, j), at(1, j), at(2, j));
                    for c in 0..k {
                        du_t[idx + c] = (-3.0 * f0[c] + 4.0 * f1[c] - f2[c]) / ht2;
                    }
                } else if i == n_t - 1 {
                    let (f0, f1, f2) = (at(n_t - 1, j), at(n_t - 2, j), at(n_t - 3, j));
                    for c in 0..k {
                        du_t[idx + c] = (3.0 * f0[c] - 4.0 * f1[c] + f2[c]) / ht2;
                    }
                } else {
                    let (fp, fm) = (at(i + 1, j), at(i - 1, j));
                    for c in 0..k {
                        du_t[idx + c] = (fp[c] - fm[c]) / ht2;
                    }
                }
            }
        }
        (du_t, du_th)
    }

    pub fn write_to(&self, path: &Path) -> Result<(), GridError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut w)
    }

    pub fn write(&self, w: &mut impl Write) -> Result<(), GridError> {
        writeln!(w, "necklab mapfield v1")?;
        writeln!(w, "target {}", self.target.describe())?;
        writeln!(
            w,
            "grid {} {} {} {}",
            self.grid.t_min, self.grid.t_max, self.grid.n_t, self.grid.n_th
        )?;
        let k = self.k();
        for node in self.values.chunks(k) {
            let mut line = String::new();
            for (c, x) in node.iter().enumerate() {
                if c > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("{x}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self, GridError> {
        let f = std::fs::File::open(path)?;
        MapField::read(&mut std::io::BufReader::new(f))
    }

    pub fn read(r: &mut impl BufRead) -> Result<Self, GridError> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String), GridError> {
            match lines.next() {
                Some((n, Ok(l))) => Ok((n + 1, l)),
                Some((n, Err(e))) => Err(GridError::Parse(n + 1, e.to_string())),
                None => Err(GridError::Parse(0, format!("missing {what}"))),
            }
        };
        let (n, magic) = next("header")?;
        if magic.trim() != "necklab mapfield v1" {
            return Err(GridError::Parse(n, "bad magic line".into()));
        }
        let (n, tline) = next("target line")?;
        let toks: Vec<&str> = tline.split_whitespace().collect();
        let target = match toks.as_slice() {
            ["target", "sphere", d] => TargetManifold::unit_sphere(
                d.parse().map_err(|e| GridError::Parse(n, format!("{e}")))?,
            ),
            ["target", "torus", d, rest @ ..] => {
                let k: usize = d.parse().map_err(|e| GridError::Parse(n, format!("{e}")))?;
                if rest.len() != k * k {
                    return Err(GridError::Parse(n, "torus basis entry count mismatch".into()));
                }
                let mut rows = vec![vec![0.0; k]; k];
                for (idx, s) in rest.iter().enumerate() {
                    rows[idx / k][idx % k] =
                        s.parse().map_err(|e| GridError::Parse(n, format!("{e}")))?;
                }
                TargetManifold::flat_torus(&rows)
                    .map_err(|e| GridError::Parse(n, e.to_string()))?
            }
            _ => return Err(GridError::Parse(n, "bad target line".into())),
        };
        let (n, gline) = next("grid line")?;
        let toks: Vec<&str> = gline.split_whitespace().collect();
        let grid = match toks.as_slice() {
            ["grid", a, b, nt, nth] => {
                let p = |s: &str| s.parse::<f64>().map_err(|e| GridError::Parse(n, format!("{e}")));
                let q =
                    |s: &str| s.parse::<usize>().map_err(|e| GridError::Parse(n, format!("{e}")));
                CylinderGrid::new(p(a)?, p(b)?, q(nt)?, q(nth)?)?
            }
            _ => return Err(GridError::Parse(n, "bad grid line".into())),
        };
        let k = target.ambient_dim();
        let mut values = Vec::with_capacity(grid.nodes() * k);
        for _ in 0..grid.nodes() {
            let (n, line) = next("value line")?;
            let mut count = 0;
            for tok in line.split_whitespace() {
                values.push(tok.parse().map_err(|e| GridError::Parse(n, format!("{e}")))?);
                count += 1;
            }
            if count != k {
                return Err(GridError::Parse(n, format!("expected {k} components, got {count}")));
            }
        }
        MapField::new(grid, target, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(n_t: usize, n_th: usize) -> CylinderGrid {
        CylinderGrid::new(0.0, 10.0, n_t, n_th).unwrap()
    }

    #[test]
    fn spacings() {
        let g = grid(81, 16);
        assert!((g.h_t - 0.125).abs() < 1e-15);
        assert!((g.h_th - 2.0 * PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(CylinderGrid::new(0.0, 1.5, 32, 32).is_err());
        assert!(CylinderGrid::new(0.0, 10.0, 7, 32).is_err());
        assert!(CylinderGrid::new(0.0, 10.0, 32, 7).is_err());
    }

    #[test]
    fn slice_integral_constant_and_harmonics() {
        let g = grid(16, 16);
        let ones = vec![1.0; g.nodes()];
        assert!((g.slice_integral(&ones, 3) - 2.0 * PI).abs() < 1e-13);

        let mut sin2 = vec![0.0; g.nodes()];
        let mut cos1 = vec![0.0; g.nodes()];
        for i in 0..g.n_t {
            for j in 0..g.n_th {
                sin2[i * g.n_th + j] = g.theta(j).sin().powi(2);
                cos1[i * g.n_th + j] = g.theta(j).cos();
            }
        }
        // Rectangle rule is exact for low harmonics.
        assert!((g.slice_integral(&sin2, 0) - PI).abs() < 1e-13);
        assert!(g.slice_integral(&cos1, 0).abs() < 1e-13);
    }

    #[test]
    fn integrate_full_and_linear() {
        let g = grid(101, 16);
        let ones = vec![1.0; g.nodes()];
        let v = g.integrate(&ones, 0.0, 10.0).unwrap();
        assert!((v - 2.0 * PI * 10.0).abs() < 1e-11);

        let gl = CylinderGrid::new(0.0, 2.5, 251, 8).unwrap();
        let mut lin = vec![0.0; gl.nodes()];
        for i in 0..gl.n_t {
            for j in 0..gl.n_th {
                lin[i * gl.n_th + j] = gl.t(i);
            }
        }
        // trapezoid is exact for linear integrands
        let v = gl.integrate(&lin, 0.0, 1.0).unwrap();
        assert!((v - PI).abs() < 1e-12, "got {v}");
        assert_eq!(gl.integrate(&lin, 0.3, 0.3001).unwrap_err().to_string().contains("fewer"), true);
        let z = vec![0.0; gl.nodes()];
        assert_eq!(gl.integrate(&z, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn partials_constant_field_vanish() {
        let g = grid(16, 16);
        let target = TargetManifold::unit_sphere(3);
        let f = MapField::from_fn(g, target, |_, _| vec![0.0, 0.0, 1.0]).unwrap();
        let (dt, dth) = f.partials();
        assert!(dt.iter().all(|&x| x == 0.0));
        assert!(dth.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn partials_geodesic_error_bound() {
        let a = 0.5;
        for &n_t in &[41usize, 81] {
            let g = grid(n_t, 8);
            let f = fields::geodesic_ansatz(g, 3, a).unwrap();
            let (dt, _) = f.partials();
            // interior error of the central difference of cos/sin(a t)
            let mut err: f64 = 0.0;
            for i in 1..g.n_t - 1 {
                let t = g.t(i);
                let exact = [-a * (a * t).sin(), a * (a * t).cos(), 0.0];
                let got = &dt[(i * g.n_th) * 3..(i * g.n_th) * 3 + 3];
                for c in 0..3 {
                    err = err.max((got[c] - exact[c]).abs());
                }
            }
            assert!(err <= (a * g.h_t).powi(2), "n_t={n_t}: err={err}");
        }
    }

    #[test]
    fn partials_equator_symbol() {
        let g = grid(16, 32);
        let f = fields::equator_wrap(g).unwrap();
        let (_, dth) = f.partials();
        let want = (g.h_th).sin() / g.h_th;
        for i in 0..g.n_t {
            for j in 0..g.n_th {
                let v = &dth[(i * g.n_th + j) * 3..(i * g.n_th + j) * 3 + 3];
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                assert!((n - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn partials_second_order_convergence() {
        // halving both spacings must reduce the max error at least 3.5x
        let a = 0.5;
        let coarse = grid(41, 16);
        let fine = grid(81, 32);
        let max_err = |g: CylinderGrid| -> f64 {
            let f = fields::geodesic_ansatz(g, 3, a).unwrap();
            let w = fields::equator_wrap(g).unwrap();
            let (dt, _) = f.partials();
            let (_, dth) = w.partials();
            let mut e: f64 = 0.0;
            for i in 1..g.n_t - 1 {
                let t = g.t(i);
                let exact = [-a * (a * t).sin(), a * (a * t).cos(), 0.0];
                for c in 0..3 {
                    e = e.max((dt[(i * g.n_th) * 3 + c] - exact[c]).abs());
                }
            }
            for j in 0..g.n_th {
                let th = g.theta(j);
                let exact = [-th.sin(), th.cos(), 0.0];
                for c in 0..3 {
                    e = e.max((dth[(5 * g.n_th + j) * 3 + c] - exact[c]).abs());
                }
            }
            e
        };
        let (ec, ef) = (max_err(coarse), max_err(fine));
        assert!(ec / ef >= 3.5, "ratio {}", ec / ef);
    }

    #[test]
    fn mapfield_roundtrip_bitexact() {
        let g = grid(12, 8);
        let f = fields::bubble(g, 0.0).unwrap();
        let mut buf = Vec::new();
        f.write(&mut buf).unwrap();
        let f2 = MapField::read(&mut std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(f.values(), f2.values());
        assert_eq!(f.grid(), f2.grid());

        let torus = TargetManifold::square_torus(2, 2.0 * PI);
        let ft = MapField::from_fn(g, torus, |t, th| vec![0.3 * t, 0.2 * th]).unwrap();
        let mut buf = Vec::new();
        ft.write(&mut buf).unwrap();
        let ft2 = MapField::read(&mut std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(ft.values(), ft2.values());
    }

    #[test]
    fn mapfield_rejects_off_target() {
        let g = grid(8, 8);
        let target = TargetManifold::unit_sphere(2);
        let values = vec![0.5; g.nodes() * 2];
        assert!(MapField::new(g, target, values).is_err());
    }

    proptest! {
        #[test]
        fn slice_integral_rotation_invariant(shift in 1usize..15, seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let g = grid(10, 16);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let base: Vec<f64> = (0..g.n_th).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut a = vec![0.0; g.nodes()];
            let mut b = vec![0.0; g.nodes()];
            for j in 0..g.n_th {
                a[j] = base[j];
                b[j] = base[(j + shift) % g.n_th];
            }
            let (sa, sb) = (g.slice_integral(&a, 0), g.slice_integral(&b, 0));
            prop_assert!((sa - sb).abs() <= 1e-14 * sa.abs().max(1.0));
        }

        #[test]
        fn integrate_additive(split in 1usize..9, seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let g = grid(11, 8);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..g.nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = g.t(split);
            let whole = g.integrate(&v, 0.0, 10.0).unwrap();
            let left = g.integrate(&v, 0.0, b).unwrap();
            let right = g.integrate(&v, b, 10.0).unwrap();
            prop_assert!((whole - left - right).abs() <= 1e-12 * whole.abs().max(1.0));
        }
    }
}
