//! Polar tensor quadrature: Gauss–Legendre in radius, trapezoid in angle.

use std::f64::consts::TAU;

use crate::quadrature::{gauss_legendre_on, lagrange_derivative_weights, lagrange_weights, stencil_start};
use crate::{Error, Result, C64};

/// Gauss points per radial panel in the product integration.
pub(crate) const PANEL_GAUSS: usize = 8;
/// Interpolation stencil width for radial profiles.
pub(crate) const INTERP_WIDTH: usize = 6;
/// Radial finite-difference stencil width (fourth order).
pub(crate) const DIFF_WIDTH: usize = 5;

/// Area quadrature grid on the unit disk.
///
/// Point `(j, k)` sits at radius `r[j]` and angle `2πk/n_theta`; its flat index
/// is `j * n_theta + k`.
#[derive(Debug)]
pub struct PolarGrid {
    n: usize,
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    theta: Vec<f64>,
    points: Vec<C64>,
    weights: Vec<f64>,
    pub(crate) plan: RadialPlan,
}

/// Radial panel geometry shared by the fast Cauchy transform and the
/// finite-difference Wirtinger operator.
#[derive(Debug)]
pub(crate) struct RadialPlan {
    /// Breakpoints `0, r₀, …, r_{n−1}, 1`.
    pub breaks: Vec<f64>,
    /// Gauss points inside each panel `[breaks[p], breaks[p+1]]`.
    pub gauss: Vec<[f64; PANEL_GAUSS]>,
    pub gauss_w: Vec<[f64; PANEL_GAUSS]>,
    /// Interpolation stencil start and weights for each panel Gauss point.
    pub interp_start: Vec<usize>,
    pub interp: Vec<[[f64; INTERP_WIDTH]; PANEL_GAUSS]>,
    /// Extrapolation to `r = 1` from the outermost nodes.
    pub edge_start: usize,
    pub edge: [f64; INTERP_WIDTH],
    /// Fourth-order radial derivative stencils at each node.
    pub diff_start: Vec<usize>,
    pub diff: Vec<[f64; DIFF_WIDTH]>,
}

impl PolarGrid {
    /// Grid with `n` radial nodes and `2n` angular nodes.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_sizes(n, 2 * n)
    }

    pub fn with_sizes(n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 8 || n_theta < 8 || n_theta % 2 != 0 {
            return Err(Error::Precondition(format!(
                "polar grid needs n_r ≥ 8 and even n_theta ≥ 8 (got {n_r}, {n_theta})"
            )));
        }
        let (radii, radial_weights) = gauss_legendre_on(n_r, 0.0, 1.0);
        let theta: Vec<f64> = (0..n_theta).map(|k| TAU * k as f64 / n_theta as f64).collect();
        let dt = TAU / n_theta as f64;
        let mut points = Vec::with_capacity(n_r * n_theta);
        let mut weights = Vec::with_capacity(n_r * n_theta);
        for (r, w) in radii.iter().zip(&radial_weights) {
            for t in &theta {
                points.push(C64::from_polar(*r, *t));
                weights.push(w * r * dt);
            }
        }
        let plan = RadialPlan::new(&radii);
        Ok(Self { n: n_r, radii, radial_weights, theta, points, weights, plan })
    }

    /// Resolution parameter (number of radial nodes).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_r(&self) -> usize {
        self.radii.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest spacing between neighbouring nodes (radial or angular at `r = 1`).
    pub fn spacing(&self) -> f64 {
        let dr = self.plan.breaks.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        dr.max(TAU / self.n_theta() as f64)
    }

    pub fn integrate(&self, values: &[C64]) -> C64 {
        assert_eq!(values.len(), self.len());
        pairwise_sum(values, &self.weights)
    }

    pub fn integrate_real(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Weighted L² norm of grid samples.
    pub fn l2_norm(&self, values: &[C64]) -> f64 {
        assert_eq!(values.len(), self.len());
        values.iter().zip(&self.weights).map(|(v, w)| v.norm_sqr() * w).sum::<f64>().sqrt()
    }
}

/// Pairwise (cascade) summation of `Σ v_i w_i`.
fn pairwise_sum(v: &[C64], w: &[f64]) -> C64 {
    if v.len() <= 256 {
        return v.iter().zip(w).map(|(a, b)| a * b).sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid], &w[..mid]) + pairwise_sum(&v[mid..], &w[mid..])
}

impl RadialPlan {
    fn new(radii: &[f64]) -> Self {
        let n = radii.len();
        let mut breaks = Vec::with_capacity(n + 2);
        breaks.push(0.0);
        breaks.extend_from_slice(radii);
        breaks.push(1.0);
        let mut gauss = Vec::with_capacity(n + 1);
        let mut gauss_w = Vec::with_capacity(n + 1);
        let mut interp_start = Vec::with_capacity(n + 1);
        let mut interp = Vec::with_capacity(n + 1);
        for p in 0..=n {
            let (x, w) = gauss_legendre_on(PANEL_GAUSS, breaks[p], breaks[p + 1]);
            let start = p.saturating_sub(INTERP_WIDTH / 2).min(n - INTERP_WIDTH);
            let nodes = &radii[start..start + INTERP_WIDTH];
            let mut li = [[0.0; INTERP_WIDTH]; PANEL_GAUSS];
            for g in 0..PANEL_GAUSS {
                li[g].copy_from_slice(&lagrange_weights(nodes, x[g]));
            }
            gauss.push(x.try_into().unwrap());
            gauss_w.push(w.try_into().unwrap());
            interp_start.push(start);
            interp.push(li);
        }
        let edge_start = n - INTERP_WIDTH;
        let edge: [f64; INTERP_WIDTH] = lagrange_weights(&radii[edge_start..], 1.0).try_into().unwrap();
        let mut diff_start = Vec::with_capacity(n);
        let mut diff = Vec::with_capacity(n);
        for j in 0..n {
            let s = stencil_start(j, DIFF_WIDTH, n);
            diff_start.push(s);
            diff.push(lagrange_derivative_weights(&radii[s..s + DIFF_WIDTH], radii[j]).try_into().unwrap());
        }
        Self { breaks, gauss, gauss_w, interp_start, interp, edge_start, edge, diff_start, diff }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_disk_area() {
        for n in [64, 96, 128] {
            let g = PolarGrid::new(n).unwrap();
            let area: f64 = g.weights().iter().sum();
            assert!((area - PI).abs() / PI < 1e-6);
            assert!(g.weights().iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn second_moment_is_half_pi() {
        let g = PolarGrid::new(64).unwrap();
        let v: Vec<f64> = g.points().iter().map(|z| z.norm_sqr()).collect();
        assert!((g.integrate_real(&v) - PI / 2.0).abs() < 1e-5);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(PolarGrid::new(4).is_err());
        assert!(PolarGrid::with_sizes(16, 15).is_err());
    }

    #[test]
    fn panels_tile_the_unit_interval() {
        let g = PolarGrid::new(20).unwrap();
        let total: f64 = g.plan.gauss_w.iter().flat_map(|w| w.iter()).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let cubic: f64 = g
            .plan
            .gauss
            .iter()
            .zip(&g.plan.gauss_w)
            .flat_map(|(x, w)| x.iter().zip(w.iter()).map(|(x, w)| w * x.powi(3)))
            .sum();
        assert!((cubic - 0.25).abs() < 1e-14);
    }
}
