//! Embedded target manifolds.
//!
//! A target is either the unit sphere `S^{K-1} ⊂ R^K` or a flat torus
//! `R^K / Λ` for a nonsingular lattice `Λ`. Both admit closed forms for
//! everything the discrete harmonic-map equation needs: nearest-point
//! projection, the second-fundamental-form term `A(u)(∇u,∇u)`, unit-speed
//! geodesics and geodesic distance. All operations are pure and thread-safe.

use thiserror::Error;

/// Tolerance used when validating that an input point lies on the target.
pub const ON_MANIFOLD_TOL: f64 = 1e-10;

// A point whose sphere-norm defect or torus-coordinate defect is below this
// is treated as already canonical, which makes `project` bitwise idempotent.
const SPHERE_CANONICAL_TOL: f64 = 1e-12;
const TORUS_COORD_LO: f64 = -1e-12;
const TORUS_COORD_HI: f64 = 1.0 - 1e-10;
// Reduced coordinates this close to 1 are wrapped to 0 so that re-projection
// of an output can never cross the cell boundary.
const TORUS_WRAP_SNAP: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ManifoldError {
    #[error("cannot project a near-zero vector onto the sphere")]
    ZeroVector,
    #[error("vector is not tangent at the base point (|v.p| = {0:.3e})")]
    NonTangent(f64),
    #[error("point is off the target manifold (defect {0:.3e})")]
    NotOnManifold(f64),
    #[error("torus lattice basis is singular")]
    SingularBasis,
    #[error("ambient dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone)]
enum Kind {
    Sphere,
    Torus {
        /// Row-major K x K lattice basis; row i is the i-th lattice vector.
        basis: Vec<f64>,
        /// Row-major inverse of the basis matrix (as acting on columns).
        inverse: Vec<f64>,
    },
}

/// An embedded target `(N, g) ⊂ R^K`.
#[derive(Debug, Clone)]
pub struct TargetManifold {
    kind: Kind,
    dim: usize,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Invert a small row-major K x K matrix by Gauss-Jordan with partial
/// pivoting. Returns the inverse and the determinant.
fn invert(k: usize, m: &[f64]) -> Option<(Vec<f64>, f64)> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&r, &s| a[r * k + col].abs().total_cmp(&a[s * k + col].abs()))
            .unwrap();
        if a[pivot * k + col].abs() < 1e-14 {
            return None;
        }
        if pivot != col {
            for j in 0..k {
                a.swap(col * k + j, pivot * k + j);
                inv.swap(col * k + j, pivot * k + j);
            }
            det = -det;
        }
        let p = a[col * k + col];
        det *= p;
        for j in 0..k {
            a[col * k + j] /= p;
            inv[col * k + j] /= p;
        }
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = a[r * k + col];
            if f != 0.0 {
                for j in 0..k {
                    a[r * k + j] -= f * a[col * k + j];
                    inv[r * k + j] -= f * inv[col * k + j];
                }
            }
        }
    }
    Some((inv, det))
}

fn mat_vec(k: usize, m: &[f64], v: &[f64], out: &mut [f64]) {
    for i in 0..k {
        out[i] = dot(&m[i * k..(i + 1) * k], v);
    }
}

impl TargetManifold {
    /// Unit sphere `S^{K-1}` in ambient dimension `k >= 2`.
    pub fn unit_sphere(k: usize) -> Self {
        assert!(k >= 2, "sphere needs ambient dimension >= 2");
        TargetManifold { kind: Kind::Sphere, dim: k }
    }

    /// Flat torus `R^K / Λ`, `rows` being the K lattice vectors.
    pub fn flat_torus(rows: &[Vec<f64>]) -> Result<Self, ManifoldError> {
        let k = rows.len();
        assert!(k >= 1, "torus needs at least one lattice vector");
        let mut basis = Vec::with_capacity(k * k);
        for r in rows {
            if r.len() != k {
                return Err(ManifoldError::DimensionMismatch { expected: k, got: r.len() });
            }
            basis.extend_from_slice(r);
        }
        // Coordinates are c = B^{-T} p, points are p = B^T c; store the
        // transpose once so both directions are plain row-major products.
        let mut bt = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                bt[i * k + j] = basis[j * k + i];
            }
        }
        let (inverse, det) = invert(k, &bt).ok_or(ManifoldError::SingularBasis)?;
        if det.abs() < 1e-12 {
            return Err(ManifoldError::SingularBasis);
        }
        Ok(TargetManifold { kind: Kind::Torus { basis: bt, inverse }, dim: k })
    }

    /// Square torus `(c Z)^K`, e.g. `c = 2π` for the standard torus.
    pub fn square_torus(k: usize, c: f64) -> Self {
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { c } else { 0.0 }).collect())
            .collect();
        TargetManifold::flat_torus(&rows).expect("diagonal basis is nonsingular")
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.kind, Kind::Sphere)
    }

    /// Human-readable descriptor used in config echoes and file headers.
    pub fn describe(&self) -> String {
        match &self.kind {
            Kind::Sphere => format!("sphere {}", self.dim),
            Kind::Torus { basis, .. } => {
                let mut s = format!("torus {}", self.dim);
                // Header stores the original rows, i.e. the transpose of `basis`.
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        s.push(' ');
                        s.push_str(&format!("{}", basis[j * self.dim + i]));
                    }
                }
                s
            }
        }
    }

    /// How far `p` is from the manifold (norm defect on the sphere, distance
    /// to the lattice-reduced representative's cell membership on the torus).
    pub fn defect(&self, p: &[f64]) -> f64 {
        match &self.kind {
            Kind::Sphere => (norm(p) - 1.0).abs(),
            Kind::Torus { .. } => 0.0, // every ambient point represents a torus point
        }
    }

    pub fn check_on(&self, p: &[f64], tol: f64) -> Result<(), ManifoldError> {
        let d = self.defect(p);
        if d > tol {
            return Err(ManifoldError::NotOnManifold(d));
        }
        Ok(())
    }

    /// Nearest-point retraction onto the manifold, written into `out`.
    ///
    /// Sphere: radial scaling. Torus: reduction of lattice coordinates into
    /// the fundamental cell `[0,1)^K`. Idempotent bitwise: points that are
    /// already canonical are returned unchanged.
    pub fn project_into(&self, p: &[f64], out: &mut [f64]) -> Result<(), ManifoldError> {
        match &self.kind {
            Kind::Sphere => {
                let n = norm(p);
                if n <= 1e-14 {
                    return Err(ManifoldError::ZeroVector);
                }
                if (n - 1.0).abs() <= SPHERE_CANONICAL_TOL {
                    out.copy_from_slice(p);
                    return Ok(());
                }
                for (o, x) in out.iter_mut().zip(p) {
                    *o = x / n;
                }
                Ok(())
            }
            Kind::Torus { basis, inverse } => {
                let k = self.dim;
                let mut c = vec![0.0; k];
                mat_vec(k, inverse, p, &mut c);
                if c.iter().all(|&x| (TORUS_COORD_LO..TORUS_COORD_HI).contains(&x)) {
                    out.copy_from_slice(p);
                    return Ok(());
                }
                for x in c.iter_mut() {
                    let mut f = *x - x.floor();
                    if f >= 1.0 - TORUS_WRAP_SNAP {
                        f = 0.0;
                    }
                    *x = f;
                }
                mat_vec(k, basis, &c, out);
                Ok(())
            }
        }
    }

    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>, ManifoldError> {
        let mut out = vec![0.0; self.dim];
        self.project_into(p, &mut out)?;
        Ok(out)
    }

    /// Second-fundamental-form term `A(u)(∇u,∇u)` of the extrinsic
    /// harmonic-map equation. On the unit sphere this is
    /// `(|u_t|^2 + |u_th|^2) u`; a flat torus contributes nothing.
    /// The result is normal to the manifold at `u`.
    pub fn sff_term_into(&self, u: &[f64], du_t: &[f64], du_th: &[f64], out: &mut [f64]) {
        match &self.kind {
            Kind::Sphere => {
                let s = dot(du_t, du_t) + dot(du_th, du_th);
                for (o, x) in out.iter_mut().zip(u) {
                    *o = s * x;
                }
            }
            Kind::Torus { .. } => out.fill(0.0),
        }
    }

    pub fn sff_term(&self, u: &[f64], du_t: &[f64], du_th: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.sff_term_into(u, du_t, du_th, &mut out);
        out
    }

    /// Component of `v` tangent to the manifold at `p`.
    pub fn tangent_part_into(&self, p: &[f64], v: &[f64], out: &mut [f64]) {
        match &self.kind {
            Kind::Sphere => {
                let c = dot(p, v);
                for i in 0..self.dim {
                    out[i] = v[i] - c * p[i];
                }
            }
            Kind::Torus { .. } => out.copy_from_slice(v),
        }
    }

    pub fn tangent_part(&self, p: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.tangent_part_into(p, v, &mut out);
        out
    }

    /// Unit-speed geodesic from `p` with initial direction `v`, evaluated at
    /// arclength `s`. Requires `|v| = 1`; on the sphere `v` must be tangent.
    pub fn geodesic(&self, p: &[f64], v: &[f64], s: f64) -> Result<Vec<f64>, ManifoldError> {
        match &self.kind {
            Kind::Sphere => {
                let t = dot(p, v).abs();
                if t > 1e-10 {
                    return Err(ManifoldError::NonTangent(t));
                }
                let (c, sn) = (s.cos(), s.sin());
                Ok(p.iter().zip(v).map(|(a, b)| c * a + sn * b).collect())
            }
            Kind::Torus { .. } => {
                let q: Vec<f64> = p.iter().zip(v).map(|(a, b)| a + s * b).collect();
                self.project(&q)
            }
        }
    }

    /// Geodesic distance between two on-manifold points.
    ///
    /// Sphere: `arccos` of the clamped inner product. Torus: minimum of
    /// `|p - q + λ|` over lattice vectors `λ` near the reduced difference.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        match &self.kind {
            Kind::Sphere => dot(p, q).clamp(-1.0, 1.0).acos(),
            Kind::Torus { basis, inverse } => {
                let k = self.dim;
                let diff: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
                let mut c = vec![0.0; k];
                mat_vec(k, inverse, &diff, &mut c);
                for x in c.iter_mut() {
                    *x -= x.round();
                }
                // Coordinate rounding is not the closest lattice point for a
                // skew basis; scan the surrounding cells.
                let mut best = f64::INFINITY;
                let mut offs = vec![-1i64; k];
                let mut d = vec![0.0; k];
                let mut amb = vec![0.0; k];
                loop {
                    for i in 0..k {
                        d[i] = c[i] + offs[i] as f64;
                    }
                    mat_vec(k, basis, &d, &mut amb);
                    let n = norm(&amb);
                    if n < best {
                        best = n;
                    }
                    let mut i = 0;
                    loop {
                        if i == k {
                            return best;
                        }
                        offs[i] += 1;
                        if offs[i] <= 1 {
                            break;
                        }
                        offs[i] = -1;
                        i += 1;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sphere3() -> TargetManifold {
        TargetManifold::unit_sphere(3)
    }

    fn torus_2pi() -> TargetManifold {
        TargetManifold::square_torus(2, 2.0 * std::f64::consts::PI)
    }

    #[test]
    fn project_radial_scaling() {
        let m = sphere3();
        assert_eq!(m.project(&[2.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let p = m.project(&[1.0, 1.0, 0.0]).unwrap();
        let r = 1.0 / 2.0_f64.sqrt();
        assert!((p[0] - r).abs() < 1e-15 && (p[1] - r).abs() < 1e-15);
        assert!((p[0] - 0.70711).abs() < 1e-5);
    }

    #[test]
    fn project_zero_vector_rejected() {
        let m = sphere3();
        assert_eq!(m.project(&[0.0, 0.0, 0.0]), Err(ManifoldError::ZeroVector));
    }

    #[test]
    fn project_torus_fundamental_cell() {
        let m = torus_2pi();
        let p = m.project(&[7.0, -1.0]).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        assert!((p[0] - (7.0 - tau)).abs() < 1e-12, "got {:?}", p);
        assert!((p[1] - (-1.0 + tau)).abs() < 1e-12);
        assert!((p[0] - 0.71681).abs() < 1e-5);
        assert!((p[1] - 5.28319).abs() < 1e-5);
    }

    #[test]
    fn sff_sphere_and_torus() {
        let m = sphere3();
        let u = [1.0, 0.0, 0.0];
        let a = 0.7;
        let s = m.sff_term(&u, &[0.0, a, 0.0], &[0.0, 0.0, 0.0]);
        assert_eq!(s, vec![a * a, 0.0, 0.0]);
        assert_eq!(m.sff_term(&u, &[0.0; 3], &[0.0; 3]), vec![0.0; 3]);
        let t = torus_2pi();
        assert_eq!(t.sff_term(&[0.5, 0.5], &[1.0, 2.0], &[3.0, 4.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn geodesic_quarter_circle() {
        let m = sphere3();
        let p = [1.0, 0.0, 0.0];
        let v = [0.0, 1.0, 0.0];
        let q = m.geodesic(&p, &v, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(norm(&[q[0], q[1] - 1.0, q[2]]) < 1e-15);
        let r = m.geodesic(&p, &v, 0.0).unwrap();
        assert_eq!(r, vec![1.0, 0.0, 0.0]);
        let s = m.geodesic(&p, &v, 1.0).unwrap();
        assert!((s[0] - 0.54030).abs() < 1e-5 && (s[1] - 0.84147).abs() < 1e-5);
    }

    #[test]
    fn geodesic_rejects_non_tangent() {
        let m = sphere3();
        let e = m.geodesic(&[1.0, 0.0, 0.0], &[0.5, 0.8, 0.0], 1.0);
        assert!(matches!(e, Err(ManifoldError::NonTangent(_))));
    }

    #[test]
    fn distance_sphere_values() {
        let m = sphere3();
        let p = [1.0, 0.0, 0.0];
        assert!((m.distance(&p, &[-1.0, 0.0, 0.0]) - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(m.distance(&p, &p), 0.0);
        let d = m.distance(&p, &[0.0, 1.0, 0.0]);
        assert!((d - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((d - 1.57080).abs() < 1e-5);
    }

    #[test]
    fn distance_torus_wraps() {
        let m = torus_2pi();
        let d = m.distance(&[0.1, 0.0], &[2.0 * std::f64::consts::PI - 0.1, 0.0]);
        assert!((d - 0.2).abs() < 1e-12, "wrap-around distance, got {d}");
    }

    #[test]
    fn singular_basis_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(TargetManifold::flat_torus(&rows).unwrap_err(), ManifoldError::SingularBasis);
    }

    proptest! {
        #[test]
        fn project_idempotent_bitwise_sphere(x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0) {
            let m = sphere3();
            prop_assume!(norm(&[x, y, z]) > 1e-6);
            let p1 = m.project(&[x, y, z]).unwrap();
            let p2 = m.project(&p1).unwrap();
            prop_assert_eq!(p1, p2);
        }

        #[test]
        fn project_idempotent_bitwise_torus(x in -40.0f64..40.0, y in -40.0f64..40.0) {
            let m = torus_2pi();
            let p1 = m.project(&[x, y]).unwrap();
            let p2 = m.project(&p1).unwrap();
            prop_assert_eq!(p1, p2);
        }

        #[test]
        fn sff_output_is_normal(ux in -1.0f64..1.0, uy in -1.0f64..1.0, uz in -1.0f64..1.0,
                                a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let m = sphere3();
            prop_assume!(norm(&[ux, uy, uz]) > 1e-3);
            let u = m.project(&[ux, uy, uz]).unwrap();
            let vt = m.tangent_part(&u, &[a, b, 0.3]);
            let vh = m.tangent_part(&u, &[b, 0.1, a]);
            let s = m.sff_term(&u, &vt, &vh);
            let tang = m.tangent_part(&u, &s);
            prop_assert!(norm(&tang) <= 1e-12 * norm(&s).max(1e-30));
        }

        #[test]
        fn geodesic_unit_speed(seed in 0u64..1000, h in 2e-4f64..1e-3) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = sphere3();
            let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            prop_assume!(norm(&raw) > 1e-3);
            let p = m.project(&raw).unwrap();
            let vraw: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let vt = m.tangent_part(&p, &vraw);
            prop_assume!(norm(&vt) > 1e-3);
            let v: Vec<f64> = vt.iter().map(|x| x / norm(&vt)).collect();
            let s = rng.gen_range(0.0..1.0);
            let a = m.geodesic(&p, &v, s).unwrap();
            let b = m.geodesic(&p, &v, s + h).unwrap();
            let d = m.distance(&a, &b);
            // arccos near 1 amplifies rounding by 1/h; budget for it
            prop_assert!((d - h).abs() <= 2.0 * h * h * h + 1e-11);
        }

        #[test]
        fn triangle_inequality(coords in proptest::collection::vec(-2.0f64..2.0, 9)) {
            let m = sphere3();
            for c in coords.chunks(3) {
                prop_assume!(norm(c) > 1e-3);
            }
            let a = m.project(&coords[0..3]).unwrap();
            let b = m.project(&coords[3..6]).unwrap();
            let c = m.project(&coords[6..9]).unwrap();
            prop_assert!(m.distance(&a, &c) <= m.distance(&a, &b) + m.distance(&b, &c) + 1e-12);
        }

        #[test]
        fn triangle_inequality_torus(coords in proptest::collection::vec(-10.0f64..10.0, 6)) {
            let m = torus_2pi();
            let a = m.project(&coords[0..2]).unwrap();
            let b = m.project(&coords[2..4]).unwrap();
            let c = m.project(&coords[4..6]).unwrap();
            prop_assert!(m.distance(&a, &c) <= m.distance(&a, &b) + m.distance(&b, &c) + 1e-12);
        }
    }
}
