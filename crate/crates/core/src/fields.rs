//! Reference fields: closed-form maps used as boundary data, solver seeds
//! and test oracles.
//!
//! * geodesic bands `u(t, th) = c(a t)` along a great circle,
//! * the equator wrap `u = (cos th, sin th, 0)`,
//! * the inverse-stereographic bubble `u = (sech t cos th, sech t sin th, tanh t)`,
//! * rotationally equivariant bands `u = (cos b(t), sin b(t) cos th, sin b(t) sin th)`
//!   whose discrete harmonicity reduces to a one-dimensional profile system,
//! * the synthetic neck-with-bubble used by the segmentation experiments.

use crate::grid::{CylinderGrid, GridError, MapField};
use crate::manifold::{dot, norm, TargetManifold};
use rand::Rng;

/// `u(t, th) = cos(a (t - t_min)) e1 + sin(a (t - t_min)) e2` on `S^{k-1}`.
pub fn geodesic_ansatz(grid: CylinderGrid, k: usize, a: f64) -> Result<MapField, GridError> {
    let target = TargetManifold::unit_sphere(k);
    let t0 = grid.t_min;
    MapField::from_fn(grid, target, |t, _| {
        let mut p = vec![0.0; k];
        p[0] = (a * (t - t0)).cos();
        p[1] = (a * (t - t0)).sin();
        p
    })
}

/// Sampled unit-speed geodesic from `p` in direction `v`, with arclength
/// `a (t - t_min)`. Works on any target; this is the default seed for
/// boundary-value solves with geodesic data (it encodes the winding).
pub fn geodesic_from(
    grid: CylinderGrid,
    target: TargetManifold,
    p: &[f64],
    v: &[f64],
    a: f64,
) -> Result<MapField, GridError> {
    let t0 = grid.t_min;
    let tgt = target.clone();
    MapField::from_fn(grid, target, |t, _| {
        tgt.geodesic(p, v, a * (t - t0)).expect("geodesic preconditions hold")
    })
}

pub fn constant(
    grid: CylinderGrid,
    target: TargetManifold,
    point: &[f64],
) -> Result<MapField, GridError> {
    let p = point.to_vec();
    MapField::from_fn(grid, target, |_, _| p.clone())
}

/// The equator wrap `u(t, th) = (cos th, sin th, 0)` on `S^2`: harmonic,
/// `t`-independent, not conformal.
pub fn equator_wrap(grid: CylinderGrid) -> Result<MapField, GridError> {
    MapField::from_fn(grid, TargetManifold::unit_sphere(3), |_, th| {
        vec![th.cos(), th.sin(), 0.0]
    })
}

/// Inverse stereographic image of `e^{(t - t0) + i th}`: the standard
/// degree-one conformal bubble, concentrated at `t = t0`.
pub fn bubble(grid: CylinderGrid, t0: f64) -> Result<MapField, GridError> {
    MapField::from_fn(grid, TargetManifold::unit_sphere(3), |t, th| {
        let s = t - t0;
        let sech = 1.0 / s.cosh();
        vec![sech * th.cos(), sech * th.sin(), s.tanh()]
    })
}

/// Rotationally equivariant band with latitude profile `beta`:
/// `u = (cos beta_i, sin beta_i cos th_j, sin beta_i sin th_j)`.
pub fn equivariant(grid: CylinderGrid, beta: &[f64]) -> Result<MapField, GridError> {
    assert_eq!(beta.len(), grid.n_t);
    let b = beta.to_vec();
    let t0 = grid.t_min;
    let h = grid.h_t;
    MapField::from_fn(grid, TargetManifold::unit_sphere(3), |t, th| {
        let i = ((t - t0) / h).round() as usize;
        vec![b[i].cos(), b[i].sin() * th.cos(), b[i].sin() * th.sin()]
    })
}

/// Solve the profile system of the discrete harmonic-map equation restricted
/// to equivariant bands: for interior rows,
///
/// ```text
/// [sin(b[i+1]-b[i]) + sin(b[i-1]-b[i])]/h_t^2 = s2 * sin(b[i]) cos(b[i]),
/// ```
///
/// where `s2 = (2 - 2 cos h_th)/h_th^2` is the multiplier of the discrete
/// circle Laplacian on the first harmonic. A root of this system makes the
/// full two-dimensional tangential tension vanish identically, so it is the
/// exact discrete solution for equivariant boundary data.
///
/// Damped Newton with a tridiagonal Jacobian, with continuation in the
/// boundary latitudes for robustness near the unstable equilibrium.
pub fn solve_equivariant_profile(grid: &CylinderGrid, beta_lo: f64, beta_hi: f64) -> Vec<f64> {
    let n = grid.n_t;
    let mut b: Vec<f64> = (0..n)
        .map(|i| beta_lo + (beta_hi - beta_lo) * i as f64 / (n - 1) as f64)
        .collect();
    for stage in 1..=4 {
        let s = stage as f64 / 4.0;
        let (lo, hi) = (s * beta_lo, s * beta_hi);
        for (i, x) in b.iter_mut().enumerate() {
            if i == 0 {
                *x = lo;
            } else if i == n - 1 {
                *x = hi;
            }
        }
        // keep interior between the ramped boundary rows on the first pass
        if stage == 1 {
            for i in 1..n - 1 {
                b[i] = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            }
        }
        newton_profile(grid, &mut b);
    }
    b
}

fn profile_residual(grid: &CylinderGrid, b: &[f64], r: &mut [f64]) -> f64 {
    let n = grid.n_t;
    let ht2 = grid.h_t * grid.h_t;
    let s2 = (2.0 - 2.0 * grid.h_th.cos()) / (grid.h_th * grid.h_th);
    let mut sup = 0.0f64;
    for i in 1..n - 1 {
        let res = ((b[i + 1] - b[i]).sin() + (b[i - 1] - b[i]).sin()) / ht2
            - s2 * b[i].sin() * b[i].cos();
        r[i - 1] = res;
        sup = sup.max(res.abs());
    }
    sup
}

fn newton_profile(grid: &CylinderGrid, b: &mut [f64]) {
    let n = grid.n_t;
    let ht2 = grid.h_t * grid.h_t;
    let s2 = (2.0 - 2.0 * grid.h_th.cos()) / (grid.h_th * grid.h_th);
    let m = n - 2;
    let mut r = vec![0.0; m];
    let (mut lo, mut di, mut up) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let tol = 1e-12 / ht2.min(1.0);
    let mut sup = profile_residual(grid, b, &mut r);
    for _ in 0..200 {
        if sup <= tol {
            return;
        }
        for i in 1..n - 1 {
            lo[i - 1] = (b[i - 1] - b[i]).cos() / ht2;
            up[i - 1] = (b[i + 1] - b[i]).cos() / ht2;
            di[i - 1] = -((b[i + 1] - b[i]).cos() + (b[i - 1] - b[i]).cos()) / ht2
                - s2 * (2.0 * b[i]).cos();
        }
        // Thomas solve of J d = r
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        c[0] = up[0] / di[0];
        d[0] = r[0] / di[0];
        for i in 1..m {
            let w = di[i] - lo[i] * c[i - 1];
            c[i] = up[i] / w;
            d[i] = (r[i] - lo[i] * d[i - 1]) / w;
        }
        for i in (0..m - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        // backtracking on the sup residual
        let saved: Vec<f64> = b[1..n - 1].to_vec();
        let mut step = 1.0;
        loop {
            for i in 1..n - 1 {
                b[i] = saved[i - 1] - step * d[i - 1];
            }
            let new_sup = profile_residual(grid, b, &mut r);
            if new_sup < sup || step < 1.0 / 64.0 {
                sup = new_sup;
                break;
            }
            step *= 0.5;
        }
    }
}

/// Equivariant band whose profile solves the discrete system: the exact
/// discrete harmonic map for boundary latitudes `beta_lo`, `beta_hi`.
pub fn equivariant_harmonic(
    grid: CylinderGrid,
    beta_lo: f64,
    beta_hi: f64,
) -> Result<MapField, GridError> {
    let beta = solve_equivariant_profile(&grid, beta_lo, beta_hi);
    equivariant(grid, &beta)
}

/// Geodesic interpolation between the means of two boundary rows: the default
/// solver seed for Dirichlet data without winding.
pub fn geodesic_between(
    grid: CylinderGrid,
    target: TargetManifold,
    lower: &[f64],
    upper: &[f64],
) -> Result<MapField, GridError> {
    let k = target.ambient_dim();
    let n_th = grid.n_th;
    let mean = |row: &[f64]| -> Vec<f64> {
        let mut m = vec![0.0; k];
        for node in row.chunks(k) {
            for c in 0..k {
                m[c] += node[c];
            }
        }
        for c in m.iter_mut() {
            *c /= n_th as f64;
        }
        m
    };
    let p = target.project(&mean(lower)).map_err(|e| GridError::OffTarget(0, 0, e))?;
    let q = target
        .project(&mean(upper))
        .map_err(|e| GridError::OffTarget(grid.n_t - 1, 0, e))?;
    if target.is_sphere() {
        let psi = dot(&p, &q).clamp(-1.0, 1.0).acos();
        // direction of the short arc; degenerate for antipodal means
        let mut v: Vec<f64> = (0..k).map(|c| q[c] - dot(&p, &q) * p[c]).collect();
        let nv = norm(&v);
        if psi > 1e-12 && nv < 1e-12 {
            return Err(GridError::InvalidGrid(
                "boundary means are antipodal; supply an explicit seed".into(),
            ));
        }
        if nv > 0.0 {
            for x in v.iter_mut() {
                *x /= nv;
            }
        }
        let len = grid.len_t();
        let t0 = grid.t_min;
        let tgt = target.clone();
        MapField::from_fn(grid, target, |t, _| {
            if psi <= 1e-12 {
                p.clone()
            } else {
                tgt.geodesic(&p, &v, psi * (t - t0) / len).expect("tangent by construction")
            }
        })
    } else {
        let len = grid.len_t();
        let t0 = grid.t_min;
        MapField::from_fn(grid, target, |t, _| {
            let s = (t - t0) / len;
            (0..k).map(|c| (1.0 - s) * p[c] + s * q[c]).collect()
        })
    }
}

/// Straight-chord interpolation between two points, projected node by node.
/// Coincides with the geodesic arc as a set but not as a parametrization; a
/// convenient non-equilibrium seed for flow tests.
pub fn chord_interpolation(
    grid: CylinderGrid,
    target: TargetManifold,
    p: &[f64],
    q: &[f64],
) -> Result<MapField, GridError> {
    let k = target.ambient_dim();
    let len = grid.len_t();
    let t0 = grid.t_min;
    let (p, q) = (p.to_vec(), q.to_vec());
    MapField::from_fn(grid, target, |t, _| {
        let s = (t - t0) / len;
        (0..k).map(|c| (1.0 - s) * p[c] + s * q[c]).collect()
    })
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

/// Synthetic field on a long cylinder: a degree-one bubble of unit scale at
/// `t = 0`, glued through polar caps to geodesic arms of slope `arm_slope`.
/// The blend runs over `|t|` in `[core - 1, core + 1]`.
pub fn neck_with_bubble(
    grid: CylinderGrid,
    arm_slope: f64,
    core: f64,
) -> Result<MapField, GridError> {
    let a = arm_slope;
    MapField::from_fn(grid, TargetManifold::unit_sphere(3), move |t, th| {
        let sech = 1.0 / t.cosh();
        let b = [sech * th.cos(), sech * th.sin(), t.tanh()];
        // geodesic arms through the poles, in the x-z plane
        let arm = if t >= 0.0 {
            [(a * (t - core)).sin(), 0.0, (a * (t - core)).cos()]
        } else {
            [(a * (-t - core)).sin(), 0.0, -(a * (-t - core)).cos()]
        };
        let mix = smoothstep((t.abs() - (core - 1.0)) / 2.0);
        (0..3).map(|c| (1.0 - mix) * b[c] + mix * arm[c]).collect()
    })
}

/// Add a seeded tangent perturbation to the interior rows and re-project.
/// The perturbation is a single circular harmonic with a bump envelope in
/// `t`, so it vanishes at the boundary rows.
pub fn perturb_tangent(
    field: &MapField,
    amplitude: f64,
    harmonic: usize,
    rng: &mut impl Rng,
) -> MapField {
    let grid = *field.grid();
    let target = field.target().clone();
    let k = field.k();
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut axis: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0_f64..1.0)).collect();
    let n = norm(&axis);
    for x in axis.iter_mut() {
        *x /= n;
    }
    let mut out = field.clone();
    let len = grid.len_t();
    {
        let values = out.values_mut();
        for i in 1..grid.n_t - 1 {
            let s = (grid.t(i) - grid.t_min) / len;
            let env = (std::f64::consts::PI * s).sin().powi(2);
            for j in 0..grid.n_th {
                let idx = (i * grid.n_th + j) * k;
                let w = amplitude * env * (harmonic as f64 * grid.theta(j) + phase).cos();
                let node = field.value(i, j);
                let mut tang = vec![0.0; k];
                target.tangent_part_into(node, &axis, &mut tang);
                let mut moved: Vec<f64> =
                    (0..k).map(|c| node[c] + w * tang[c]).collect();
                let tmp = moved.clone();
                target.project_into(&tmp, &mut moved).expect("perturbed node projects");
                values[idx..idx + k].copy_from_slice(&moved);
            }
        }
    }
    MapField::new(grid, target, out.values().to_vec()).expect("perturbation stays on target")
}
