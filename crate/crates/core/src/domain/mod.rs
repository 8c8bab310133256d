//! Disk geometry: boundary arcs, the domain with its arc partition, quadrature
//! grids, the Möbius half-plane chart and the finite-element triangulation.

pub(crate) mod grid;
pub(crate) mod mesh;

use std::f64::consts::{PI, TAU};

use crate::{Error, Result, C64};

pub use grid::PolarGrid;
pub use mesh::Mesh;

/// Angular interval `[start, start + len)` on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryArc {
    start: f64,
    len: f64,
}

impl BoundaryArc {
    /// Arc starting at `start` (any real angle) with length in `(0, 2π]`.
    pub fn new(start: f64, len: f64) -> Result<Self> {
        if !(start.is_finite() && len.is_finite()) || len <= 0.0 || len > TAU + 1e-12 {
            return Err(Error::Domain(format!("arc length {len} outside (0, 2π]")));
        }
        Ok(Self { start: start.rem_euclid(TAU), len: len.min(TAU) })
    }

    /// Arc from angle `a` counter-clockwise to angle `b`.
    pub fn between(a: f64, b: f64) -> Result<Self> {
        let len = (b - a).rem_euclid(TAU);
        let len = if len == 0.0 && b != a { TAU } else { len };
        Self::new(a, len)
    }

    /// The whole circle.
    pub fn full() -> Self {
        Self { start: 0.0, len: TAU }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn end(&self) -> f64 {
        self.start + self.len
    }

    pub fn midpoint(&self) -> f64 {
        (self.start + 0.5 * self.len).rem_euclid(TAU)
    }

    pub fn is_full(&self) -> bool {
        self.len >= TAU
    }

    /// Offset of `theta` from the arc start, in `[0, 2π)`.
    pub fn offset(&self, theta: f64) -> f64 {
        (theta - self.start).rem_euclid(TAU)
    }

    /// Membership in the half-open arc.
    pub fn contains(&self, theta: f64) -> bool {
        self.is_full() || self.offset(theta) < self.len
    }

    /// Membership in the open arc.
    pub fn contains_open(&self, theta: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let s = self.offset(theta);
        s > 0.0 && s < self.len
    }

    /// Angular distance from `theta` to the closed arc.
    pub fn distance(&self, theta: f64) -> f64 {
        if self.contains(theta) {
            return 0.0;
        }
        let s = self.offset(theta);
        (s - self.len).min(TAU - s).max(0.0)
    }

    /// Normalised position `s ∈ [0, 1)` along the arc, `None` outside.
    pub fn position(&self, theta: f64) -> Option<f64> {
        self.contains(theta).then(|| self.offset(theta) / self.len)
    }

    /// Complementary arc (empty complement is rejected).
    pub fn complement(&self) -> Result<Self> {
        Self::new(self.end(), TAU - self.len)
    }

    /// Arc grown by `margin` at both ends.
    pub fn expanded(&self, margin: f64) -> Result<Self> {
        Self::new(self.start - margin, self.len + 2.0 * margin)
    }
}

/// Boundary quadrature on an arc: midpoint rule with outward normals.
#[derive(Clone, Debug)]
pub struct BoundaryGrid {
    pub theta: Vec<f64>,
    pub points: Vec<C64>,
    pub weights: Vec<f64>,
    /// Outward unit normal `ν = (cos θ, sin θ)`.
    pub normals: Vec<[f64; 2]>,
    /// Tangent direction `(ν₂, −ν₁)` of the tangential derivative.
    pub tangents: Vec<[f64; 2]>,
}

impl BoundaryGrid {
    pub fn on_arc(arc: &BoundaryArc, n: usize) -> Self {
        let h = arc.len() / n as f64;
        let theta: Vec<f64> = (0..n).map(|k| arc.start() + (k as f64 + 0.5) * h).collect();
        Self::from_angles(theta, vec![h; n])
    }

    /// Periodic trapezoid grid on the whole circle starting at angle 0.
    pub fn circle(n: usize) -> Self {
        let h = TAU / n as f64;
        Self::from_angles((0..n).map(|k| k as f64 * h).collect(), vec![h; n])
    }

    fn from_angles(theta: Vec<f64>, weights: Vec<f64>) -> Self {
        let points = theta.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        let normals = theta.iter().map(|t| [t.cos(), t.sin()]).collect();
        let tangents = theta.iter().map(|t| [t.sin(), -t.cos()]).collect();
        Self { theta, points, weights, normals, tangents }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Möbius chart from the disk to the upper half-plane sending the midpoint of
/// `Γ₀*` to `0` and `Γ₀*` into the real axis.
#[derive(Clone, Copy, Debug)]
pub struct HalfPlaneChart {
    rotation: C64,
}

impl HalfPlaneChart {
    pub fn new(gamma0_star: &BoundaryArc) -> Self {
        Self { rotation: C64::from_polar(1.0, gamma0_star.midpoint()) }
    }

    /// The boundary point sent to infinity.
    pub fn pole(&self) -> C64 {
        -self.rotation
    }

    pub fn map(&self, z: C64) -> Result<C64> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(Error::Precondition(format!("point {z} outside the closed disk")));
        }
        let zeta = z / self.rotation;
        let den = 1.0 + zeta;
        if den.norm() < 1e-14 {
            return Err(Error::Precondition("point at the pole of the half-plane chart".into()));
        }
        Ok(crate::I * (1.0 - zeta) / den)
    }

    pub fn inverse(&self, w: C64) -> Result<C64> {
        let den = crate::I + w;
        if den.norm() < 1e-300 || !w.is_finite() {
            return Err(Error::Precondition("half-plane point maps to infinity".into()));
        }
        Ok(self.rotation * (crate::I - w) / den)
    }
}

/// Unit disk with the boundary partition `Γ̃ ∪ Γ₀` and the enlarged arc `Γ₀*`.
#[derive(Clone, Debug)]
pub struct Domain {
    gamma_tilde: BoundaryArc,
    gamma0: BoundaryArc,
    gamma0_star: BoundaryArc,
    margin: f64,
    mesh_h: f64,
    mesh: Mesh,
}

impl Domain {
    pub fn gamma_tilde(&self) -> &BoundaryArc {
        &self.gamma_tilde
    }

    pub fn gamma0(&self) -> &BoundaryArc {
        &self.gamma0
    }

    pub fn gamma0_star(&self) -> &BoundaryArc {
        &self.gamma0_star
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn mesh_h(&self) -> f64 {
        self.mesh_h
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn chart(&self) -> HalfPlaneChart {
        HalfPlaneChart::new(&self.gamma0_star)
    }

    /// Same arcs with a different triangulation.
    pub fn with_mesh(&self, mesh_h: f64) -> Result<Self> {
        Ok(Self { mesh: Mesh::disk(mesh_h)?, mesh_h, ..self.clone() })
    }

    /// Same arcs with an externally supplied triangulation.
    pub fn with_custom_mesh(&self, mesh: Mesh) -> Result<Self> {
        mesh.check_disk_boundary()?;
        Ok(Self { mesh, ..self.clone() })
    }
}

/// Builds the unit disk with `Γ̃ = (a, b)` (counter-clockwise), `Γ₀` its closed
/// complement and `Γ₀*` the complement grown by `margin` on both sides.
pub fn make_disk_domain(gamma_tilde: (f64, f64), margin: f64, mesh_h: f64) -> Result<Domain> {
    let (a, b) = gamma_tilde;
    let len = b - a;
    if !(len > 0.0 && len < TAU) {
        return Err(Error::Domain(format!("Γ̃ length {len} outside (0, 2π)")));
    }
    if !(margin > 0.0) {
        return Err(Error::Domain("Γ₀* margin must be positive".into()));
    }
    let len0 = TAU - len;
    if len0 < margin {
        return Err(Error::Domain(format!("Γ₀ empty or below margin (length {len0:.3e})")));
    }
    if len <= 2.0 * margin {
        return Err(Error::Domain("Γ₀* would swallow Γ̃; reduce the margin".into()));
    }
    if !(mesh_h > 0.0 && mesh_h < 0.5) {
        return Err(Error::Domain(format!("mesh size {mesh_h} outside (0, 0.5)")));
    }
    let gamma_tilde = BoundaryArc::new(a, len)?;
    let gamma0 = gamma_tilde.complement()?;
    let gamma0_star = gamma0.expanded(margin)?;
    Ok(Domain { gamma_tilde, gamma0, gamma0_star, margin, mesh_h, mesh: Mesh::disk(mesh_h)? })
}

/// Domain with `Γ̃` the upper half circle `(0, π)`.
pub fn half_disk_domain(margin: f64, mesh_h: f64) -> Result<Domain> {
    make_disk_domain((0.0, PI), margin, mesh_h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn arc_arithmetic_for_half_circle() {
        let d = make_disk_domain((0.0, PI), 0.1, 0.1).unwrap();
        assert!((d.gamma0().start() - PI).abs() < 1e-15);
        assert!((d.gamma0().len() - PI).abs() < 1e-15);
        assert!((d.gamma0_star().start() - (PI - 0.1)).abs() < 1e-14);
        assert!((d.gamma0_star().end() - (TAU + 0.1)).abs() < 1e-14);
        assert!(d.gamma0_star().contains(0.05));
        assert!(!d.gamma0_star().contains(0.15));
    }

    #[test]
    fn nearly_full_gamma_tilde_is_rejected() {
        let e = make_disk_domain((0.0, TAU - 1e-3), 0.1, 0.1).unwrap_err();
        assert!(e.to_string().contains("Γ₀ empty or below margin"));
        assert!(make_disk_domain((0.0, 0.0), 0.1, 0.1).is_err());
        assert!(make_disk_domain((0.0, PI), 0.0, 0.1).is_err());
    }

    #[test]
    fn mesh_boundary_nodes_lie_on_circle() {
        let d = make_disk_domain((PI / 2.0, 1.5 * PI), 0.05, 0.05).unwrap();
        let mesh = d.mesh();
        for &i in mesh.boundary_loop() {
            let [x, y] = mesh.nodes()[i];
            assert!(((x * x + y * y).sqrt() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn boundary_partition_indicators_sum_to_one() {
        let d = half_disk_domain(0.1, 0.2).unwrap();
        let g = BoundaryGrid::circle(1000);
        for &t in &g.theta {
            let a = d.gamma_tilde().contains_open(t) as u8;
            let b = d.gamma0().contains(t) as u8;
            if t.abs() > 1e-12 && (t - PI).abs() > 1e-12 {
                assert_eq!(a + b, 1, "theta = {t}");
            }
        }
    }

    #[test]
    fn boundary_grid_geometry() {
        let arc = BoundaryArc::new(5.0, 2.5).unwrap();
        let g = BoundaryGrid::on_arc(&arc, 77);
        assert!((g.total_length() - 2.5).abs() < 1e-13);
        for k in 0..g.len() {
            let [n1, n2] = g.normals[k];
            let [t1, t2] = g.tangents[k];
            assert!(((n1 * n1 + n2 * n2) - 1.0).abs() < 1e-14);
            assert!((n1 * t1 + n2 * t2).abs() < 1e-15);
            assert!(arc.contains(g.theta[k]));
        }
    }

    #[test]
    fn chart_normalisation() {
        let d = half_disk_domain(0.1, 0.2).unwrap();
        let chart = d.chart();
        let mid = C64::from_polar(1.0, d.gamma0_star().midpoint());
        assert!(chart.map(mid).unwrap().norm() < 1e-14);
        assert!(chart.map(C64::new(0.0, 0.0)).unwrap().im > 0.0);
        assert!(chart.map(chart.pole()).is_err());
        let star = d.gamma0_star();
        for k in 0..200 {
            let t = star.start() + star.len() * (k as f64 + 0.5) / 200.0;
            let w = chart.map(C64::from_polar(1.0, t)).unwrap();
            assert!(w.im.abs() <= 1e-10, "{w}");
        }
    }

    #[test]
    fn chart_round_trip_is_identity() {
        use rand::{Rng, SeedableRng};
        let chart = HalfPlaneChart::new(&BoundaryArc::new(2.0, 3.5).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let r = rng.gen::<f64>().sqrt() * 0.999;
            let z = C64::from_polar(r, rng.gen::<f64>() * TAU);
            let w = chart.map(z).unwrap();
            assert!(w.im > 0.0);
            worst = worst.max((chart.inverse(w).unwrap() - z).norm());
        }
        assert!(worst <= 1e-12, "{worst}");
    }

    proptest! {
        #[test]
        fn arc_contains_its_interior(start in -10.0f64..10.0, len in 0.01f64..6.2, s in 0.001f64..0.999) {
            let arc = BoundaryArc::new(start, len).unwrap();
            let t = start + s * len;
            prop_assert!(arc.contains_open(t));
            prop_assert!(arc.distance(t) == 0.0);
            let c = arc.complement().unwrap();
            prop_assert!(!c.contains_open(t));
            prop_assert!((c.len() + arc.len() - TAU).abs() < 1e-12);
        }

        #[test]
        fn chart_sends_gamma0_star_to_reals(start in 0.0f64..6.28, len in 0.5f64..5.5, s in 0.0f64..1.0) {
            let arc = BoundaryArc::new(start, len).unwrap();
            let chart = HalfPlaneChart::new(&arc);
            let w = chart.map(C64::from_polar(1.0, start + s * len)).unwrap();
            prop_assert!(w.im.abs() <= 1e-10 * (1.0 + w.norm()));
        }
    }
}
