// scratch probe (deleted before commit)
use necklab::decompose;
use necklab::fields;
use necklab::grid::CylinderGrid;
use necklab::invariants::{self, Calibration};
use necklab::solver::{self, BoundaryData, SolveConfig};
use rand::SeedableRng;
use std::time::Instant;

fn main() {
    // criterion 8 numbers
    let calib = Calibration::default();
    let g = CylinderGrid::new(-20.0, 20.0, 321, 64).unwrap();
    let f = fields::neck_with_bubble(g, 0.15, 4.0).unwrap();
    let d = decompose::segment(&f, 0.25).unwrap();
    let r = decompose::neck_identity(&f, &d, &calib).unwrap();
    println!(
        "segment: bubbles={:?} res_e={:.3e} res_l={:.3e} alpha=({:.4e},{:.1e}) drift={:.3e}",
        d.bubbles, r.residual_energy, r.residual_length, r.alpha_re, r.alpha_im, r.alpha_drift
    );
    let full = invariants::alpha(&f);
    for iv in &d.necks {
        let part = invariants::alpha_on(&f, iv.start, iv.end).unwrap();
        println!(
            "  neck {:?}: alpha_re={:.4e} |diff|={:.3e} vs drift {:.3e}",
            iv,
            part.alpha.re,
            (part.alpha - full.alpha).norm(),
            full.drift
        );
    }

    // criterion 2 timing
    let t0 = Instant::now();
    let a = 0.5;
    let g2 = CylinderGrid::new(0.0, 10.0, 81, 16).unwrap();
    let oracle = fields::geodesic_ansatz(g2, 3, a).unwrap();
    let t = necklab::manifold::TargetManifold::unit_sphere(3);
    let q = [(a * 10.0).cos(), (a * 10.0).sin(), 0.0];
    let f0 = fields::chord_interpolation(g2, t, &[1.0, 0.0, 0.0], &q).unwrap();
    let bc = BoundaryData::from_field(&oracle);
    let cfg = SolveConfig::for_grid(&g2).with_tol(1e-10);
    let (u, rep) = solver::solve(&f0, &bc, &cfg).unwrap();
    println!(
        "criterion2: iters={} conv={} E={:.6} L={:.6} alpha={:.6} [{:.2?}]",
        rep.iterations,
        rep.converged,
        invariants::energy(&u, 0.0, 10.0).unwrap(),
        invariants::average_length(&u, 0.0, 10.0).unwrap(),
        invariants::alpha(&u).alpha.re,
        t0.elapsed()
    );

    // 256x64 convergence case cost
    let t0 = Instant::now();
    let g3 = CylinderGrid::new(0.0, 8.0, 256, 64).unwrap();
    let base = fields::equivariant_harmonic(g3, 0.15, 0.35).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20260809);
    let p = fields::perturb_tangent(&base, 3e-4, 2, &mut rng);
    let bc = BoundaryData::from_field(&p);
    let cfg = SolveConfig::for_grid(&g3).with_tol(1e-7).with_max_iters(600_000);
    let (_, rep) = solver::solve(&p, &bc, &cfg).unwrap();
    println!(
        "256x64: iters={} conv={} resid={:.2e} [{:.2?}]",
        rep.iterations, rep.converged, rep.final_residual, t0.elapsed()
    );
}
