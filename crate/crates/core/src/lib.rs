//! necklab — a numerical laboratory for harmonic maps from long flat
//! cylinders into embedded targets.
//!
//! The crate computes discrete harmonic maps on cylinders `[T1, T2] x S^1`
//! by projected heat flow, evaluates the conserved circle integral of the
//! Hopf density together with the neck energy/length balances it controls,
//! models the hyperbolic collar around a short closed geodesic in closed
//! form, segments long cylinders into neck and bubble intervals, and drives
//! degenerating collar families whose trends classify compactness.
//!
//! Modules:
//!
//! * [`manifold`] — unit-sphere and flat-torus targets with projection,
//!   second-fundamental-form term, geodesics and distance;
//! * [`grid`] — the cylinder grid, discrete calculus and the map file format;
//! * [`fields`] — closed-form reference maps and solver seeds;
//! * [`solver`] — explicit projected heat flow with Dirichlet circles;
//! * [`invariants`] — energy, the conserved quantity, profiles, oscillation
//!   and the inequality checks;
//! * [`collar`] — collar cylinder, conformal factor, injectivity radius,
//!   subcollars;
//! * [`decompose`] — bubble/neck segmentation, neck identities, family
//!   classification;
//! * [`harness`] — configuration, experiment drivers, CSV/JSON/SVG output.
//!
//! Start with the `examples/` directory: each file is a runnable walkthrough
//! of one capability (`cargo run --example geodesic_neck`, ...). The `necklab`
//! binary exposes the same drivers as subcommands.

pub mod collar;
pub mod decompose;
pub mod fields;
pub mod grid;
pub mod harness;
pub mod invariants;
pub mod manifold;
pub mod report;
pub mod solver;

pub use collar::{CollarSpec, SubcollarBounds};
pub use decompose::{Decomposition, NeckIdentityReport};
pub use grid::{CylinderGrid, MapField};
pub use invariants::{AlphaResult, Calibration, HopfField, NeckMetrics, ThetaProfile};
pub use manifold::TargetManifold;
pub use report::{CheckReport, CheckSet};
pub use solver::{BoundaryData, SolveConfig, SolveReport};
