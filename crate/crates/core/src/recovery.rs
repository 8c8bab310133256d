//! Pairings of CGO solutions and pointwise recovery of `q₁ − q₂`.
//!
//! With `u₁` built from `(q₁, +τ)` and `v` from `(q₂, −τ)` the weights cancel
//! and, for the same Neumann data on `Γ̃`,
//!
//! ```text
//! ∫(q₁ − q₂) u₁ v = fᵀ(N₁ − N₂)g
//!   = ∫q(a² + ā²) + (1/τ)∫q Re(2a(a₁₁⁽¹⁾ − a₁₁⁽²⁾) − a(A₁ − A₂)/(2∂_zΦ))
//!     + 2π q(x̃)|a(x̃)|² cos(2τψ(x̃))/(τλ) + o(1/τ).
//! ```
//!
//! The first two terms are computed from the potentials used for the CGO
//! solutions and subtracted; the oscillating term is divided out and the
//! remaining `O(1/τ)` bias removed by a least-squares fit in `1/τ`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::cgo::{assemble_cgo_with, CgoOptions};
use crate::fem::boundary_load;
use crate::phase::{build_amplitude, build_phase_with};
use crate::series::uniform_angles;
use crate::{
    Amplitude, CgoSolution, Domain, Error, GridFunction, NdMap, PhaseOptions, PhaseSpec, PolarGrid, Potential, Result,
    C64,
};

/// `∫(q₁ − q₂)u₁v` on the quadrature grid. The weights `e^{±τφ}` cancel, so
/// only the normalised values enter.
pub fn volume_pairing(u1: &CgoSolution, v: &CgoSolution, q_diff: &GridFunction) -> Result<C64> {
    if u1.t() != -v.t() {
        return Err(Error::Mismatch(format!("parameters {} and {} do not cancel", u1.t(), v.t())));
    }
    if u1.grid().len() != q_diff.grid().len() || v.grid().len() != q_diff.grid().len() {
        return Err(Error::Mismatch("pairing inputs live on different grids".into()));
    }
    let prod: Vec<C64> = q_diff.values().iter().zip(u1.total()).zip(v.total()).map(|((q, a), b)| q * a * b).collect();
    Ok(q_diff.grid().integrate(&prod))
}

/// Complex load vectors of one CGO Neumann trace on `Γ̃`.
#[derive(Clone, Debug)]
pub struct TraceLoad {
    /// Load restricted to the ND map nodes.
    pub nodal: Vec<C64>,
    /// `∫_{Γ̃} ∂_νU ds`.
    pub total: C64,
    /// Mean of `U` over the whole boundary.
    pub boundary_mean: C64,
}

/// Loads `∫_{Γ̃} ∂_νU φ_i ds` at the ND map nodes, `Γ₀` part dropped.
pub fn trace_load(domain: &Domain, nd: &NdMap, sol: &CgoSolution) -> TraceLoad {
    let arc = domain.gamma_tilde();
    let (re, im) = boundary_load(domain.mesh(), |t| sol.neumann(t), arc);
    let full: Vec<C64> = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
    let nodal = nd.nodes().iter().map(|i| full[*i]).collect();
    let total = full.iter().sum();
    let (theta, phi, value, _) = sol.boundary_samples();
    let t = sol.t();
    let mean = value.iter().zip(phi).map(|(v, p)| v * (t * p).exp()).sum::<C64>() / theta.len() as f64;
    TraceLoad { nodal, total, boundary_mean: mean }
}

fn apply(m: &DMatrix<f64>, x: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect()
}

/// `Fᵀ(N₁ − N₂)G` on nodal ND maps of the same arc.
pub fn boundary_pairing(nd1: &NdMap, nd2: &NdMap, f: &[C64], g: &[C64]) -> Result<C64> {
    if nd1.nodes() != nd2.nodes() || nd1.nodes().is_empty() {
        return Err(Error::Mismatch("boundary pairing needs nodal ND maps on the same nodes".into()));
    }
    if f.len() != nd1.dim() || g.len() != nd1.dim() {
        return Err(Error::Mismatch(format!("load lengths {}, {} for dimension {}", f.len(), g.len(), nd1.dim())));
    }
    if !nd1.is_solvable() || !nd2.is_solvable() {
        return Err(Error::Recovery("ND map unavailable".into()));
    }
    let n1g = apply(nd1.matrix(), g);
    let n2g = apply(nd2.matrix(), g);
    Ok(f.iter().zip(n1g.iter().zip(&n2g)).map(|(f, (a, b))| f * (a - b)).sum())
}

/// Boundary pairing with the constant gauge restored for `q ≡ 0` maps: their
/// traces are mean-zero, so the boundary mean of the CGO solution is added back.
pub fn gauged_pairing(nd1: &NdMap, nd2: &NdMap, q1_zero: bool, q2_zero: bool, f: &TraceLoad, g: &TraceLoad) -> Result<C64> {
    let mut p = boundary_pairing(nd1, nd2, &f.nodal, &g.nodal)?;
    if q1_zero {
        p += f.boundary_mean * g.total;
    }
    if q2_zero {
        p -= g.boundary_mean * f.total;
    }
    Ok(p)
}

/// Leading stationary-phase value of `∫h e^{2iτψ}` at a saddle of a harmonic
/// `ψ` with `|det ψ''| = λ²`: `π h e^{2iτψ}/(τλ)`. The signature is zero.
pub fn saddle_leading(h: C64, psi: f64, lambda: f64, tau: f64) -> C64 {
    PI * h * C64::from_polar(1.0, 2.0 * tau * psi) / (tau * lambda)
}

pub fn stationary_phase_leading(phase: &PhaseSpec, h_at_x: C64, tau: f64) -> C64 {
    saddle_leading(h_at_x, phase.psi_at_target(), phase.lambda(), tau)
}

/// Cubic model `P(w) = w³ + 3b²w` in the plane: saddle of `ψ = Im P` at `ib`
/// with `ψ(ib) = 2b³` and `|P''(ib)| = 6b`.
#[derive(Clone, Copy, Debug)]
pub struct CubicModel {
    pub b: f64,
}

impl CubicModel {
    pub fn critical_point(&self) -> C64 {
        C64::new(0.0, self.b)
    }

    pub fn psi(&self, w: C64) -> f64 {
        (w * w * w + 3.0 * self.b * self.b * w).im
    }

    pub fn lambda(&self) -> f64 {
        6.0 * self.b
    }

    /// `∫ĥ e^{2iτψ}` for the bump `ĥ = exp(1 − 1/(1 − |w − ib|²/R²))`, by
    /// quadrature on a polar grid of its support.
    pub fn bump_integral(&self, radius: f64, tau: f64, grid: &PolarGrid) -> C64 {
        let c = self.critical_point();
        let vals: Vec<C64> = grid
            .points()
            .iter()
            .map(|p| {
                let s = p.norm_sqr();
                let h = if s < 1.0 { (1.0 - 1.0 / (1.0 - s)).exp() } else { 0.0 };
                h * C64::from_polar(1.0, 2.0 * tau * self.psi(c + radius * p))
            })
            .collect();
        grid.integrate(&vals) * radius * radius
    }

    pub fn bump_prediction(&self, tau: f64) -> C64 {
        saddle_leading(C64::new(1.0, 0.0), self.psi(self.critical_point()), self.lambda(), tau)
    }
}

/// Predicted oscillating part of the pairing, `2π q|a|² cos(2τψ̃)/(τλ)`.
pub fn stationary_phase_predict(phase: &PhaseSpec, amplitude: &Amplitude, q_at_x: f64, tau: f64) -> f64 {
    let a = amplitude.eval(phase.x_tilde()).norm_sqr();
    2.0 * PI * q_at_x * a * (2.0 * tau * phase.psi_at_target()).cos() / (tau * phase.lambda())
}

/// `∫h e^{2iτψ}` on a polar grid.
pub fn oscillatory_integral(phase: &PhaseSpec, grid: &Arc<PolarGrid>, h: impl Fn(C64) -> f64, tau: f64) -> C64 {
    let (big_phi, _) = phase.on_grid(grid);
    let vals: Vec<C64> =
        grid.points().iter().zip(&big_phi).map(|(z, p)| h(*z) * C64::from_polar(1.0, 2.0 * tau * p.im)).collect();
    grid.integrate(&vals)
}

/// Non-oscillating terms of the pairing known from the CGO potentials.
pub fn known_terms(q_diff: &GridFunction, u1: &CgoSolution, v: &CgoSolution) -> Result<f64> {
    let grid = q_diff.grid();
    let a = u1.amplitude().series();
    let a11 = u1.corrections().a11.add(&v.corrections().a11.scale(C64::new(-1.0, 0.0)));
    let tau = u1.tau();
    let (_, d1) = u1.phase().on_grid(grid);
    let mut vals = Vec::with_capacity(grid.len());
    let nt = grid.n_theta();
    for (k, r) in grid.radii().iter().enumerate() {
        let av = a.eval_ring(*r, nt);
        let cv = a11.eval_ring(*r, nt);
        for j in 0..nt {
            let i = k * nt + j;
            let q = q_diff.values()[i];
            let lead = av[j] * av[j] + (av[j] * av[j]).conj();
            // Each remainder against the other solution's equal-phase main term.
            let rem = (av[j] * (u1.big_a()[i] - v.big_a()[i]) / d1[i]).re;
            vals.push(q * (lead + (2.0 * (av[j] * cv[j]).re - 0.5 * rem) / tau));
        }
    }
    let s = grid.integrate(&vals);
    if !s.re.is_finite() {
        return Err(Error::NonFinite("known pairing terms"));
    }
    Ok(s.re)
}

/// Everything a recovery run needs besides the probe.
#[derive(Clone, Debug)]
pub struct RecoveryInput {
    pub domain: Domain,
    /// Nodal ND maps on `Γ̃`.
    pub nd1: NdMap,
    pub nd2: NdMap,
    /// Potentials used for the CGO solutions and the known terms.
    pub q1: Potential,
    pub q2: Potential,
}

#[derive(Clone, Debug)]
pub struct RecoveryOptions {
    pub phase: PhaseOptions,
    pub placement_tol: f64,
    pub grid_n: usize,
    /// Minimum `|cos(2τψ(x̃))|` for a schedule point to be used.
    pub threshold: f64,
    pub min_points: usize,
    pub cgo: CgoOptions,
    /// Mesh nodes per oscillation of the CGO data on `Γ̃` below which the
    /// result is flagged as under-resolved.
    pub mesh_points_per_wave: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            phase: PhaseOptions::default(),
            placement_tol: 1e-3,
            grid_n: 512,
            threshold: 0.5,
            min_points: 4,
            cgo: CgoOptions::default(),
            mesh_points_per_wave: 3.0,
        }
    }
}

/// One schedule point.
#[derive(Clone, Debug)]
pub struct ProbeSample {
    pub tau: f64,
    pub cos: f64,
    pub kept: bool,
    pub pairing: f64,
    pub pairing_im: f64,
    pub known: f64,
    pub estimate: f64,
}

/// Result of `recover_point`.
#[derive(Clone, Debug)]
pub struct ProbeResult {
    pub probe: C64,
    pub x_tilde: C64,
    pub psi_tilde: f64,
    pub lambda: f64,
    pub samples: Vec<ProbeSample>,
    /// Extrapolated value of `(q₁ − q₂)(x̃)`.
    pub estimate: f64,
    /// Fitted coefficient of `1/τ`.
    pub slope: f64,
    /// RMS misfit of the extrapolation; `NaN` with exactly two kept points.
    pub confidence: f64,
    pub status: String,
}

/// Least-squares fit `e(τ) = c₀ + c₁/τ`; returns `(c₀, c₁, rms)`.
pub fn richardson(taus: &[f64], values: &[f64]) -> Result<(f64, f64, f64)> {
    if taus.len() != values.len() || taus.len() < 2 {
        return Err(Error::Recovery(format!("need at least two points, got {}", taus.len())));
    }
    let n = taus.len() as f64;
    let x: Vec<f64> = taus.iter().map(|t| 1.0 / t).collect();
    let (mx, my) = (x.iter().sum::<f64>() / n, values.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Recovery("schedule has repeated values".into()));
    }
    let sxy: f64 = x.iter().zip(values).map(|(a, b)| (a - mx) * (b - my)).sum();
    let c1 = sxy / sxx;
    let c0 = my - c1 * mx;
    let rms = if taus.len() > 2 {
        let ss: f64 = x.iter().zip(values).map(|(a, b)| (b - c0 - c1 * a).powi(2)).sum();
        (ss / (n - 2.0)).sqrt()
    } else {
        f64::NAN
    };
    Ok((c0, c1, rms))
}

fn grid_potential(grid: &Arc<PolarGrid>, q: &Potential) -> Result<GridFunction> {
    if q.is_zero() {
        return Ok(GridFunction::zeros(grid));
    }
    q.eval(C64::new(0.0, 0.0))?;
    Ok(GridFunction::from_fn(grid, |z| C64::new(q.eval(z).unwrap_or(0.0), 0.0)))
}

/// Estimates `(q₁ − q₂)(probe)` from the ND maps.
pub fn recover_point(input: &RecoveryInput, probe: C64, schedule: &[f64], opts: &RecoveryOptions) -> Result<ProbeResult> {
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("τ schedule must be strictly increasing".into()));
    }
    let phase = build_phase_with(probe, &input.domain, opts.placement_tol, &opts.phase)?;
    let amplitude = build_amplitude(&phase)?;
    let grid = Arc::new(PolarGrid::new(opts.grid_n)?);
    let q1 = grid_potential(&grid, &input.q1)?;
    let q2 = grid_potential(&grid, &input.q2)?;
    let q_diff = GridFunction::new(grid.clone(), q1.values().iter().zip(q2.values()).map(|(a, b)| a - b).collect())?;
    let a2 = amplitude.eval(phase.x_tilde()).norm_sqr();
    let (lambda, psi) = (phase.lambda(), phase.psi_at_target());
    let mut samples = Vec::new();
    for &tau in schedule {
        let c = (2.0 * tau * psi).cos();
        if c.abs() < opts.threshold {
            samples.push(ProbeSample { tau, cos: c, kept: false, pairing: f64::NAN, pairing_im: f64::NAN, known: f64::NAN, estimate: f64::NAN });
            continue;
        }
        let u1 = assemble_cgo_with(&q1, &phase, &amplitude, tau, &opts.cgo)?;
        let v = assemble_cgo_with(&q2, &phase, &amplitude, -tau, &opts.cgo)?;
        let f = trace_load(&input.domain, &input.nd1, &u1);
        let g = trace_load(&input.domain, &input.nd1, &v);
        let p = gauged_pairing(&input.nd1, &input.nd2, input.q1.is_zero(), input.q2.is_zero(), &f, &g)?;
        let known = known_terms(&q_diff, &u1, &v)?;
        let estimate = (p.re - known) * tau * lambda / (2.0 * PI * a2 * c);
        samples.push(ProbeSample { tau, cos: c, kept: true, pairing: p.re, pairing_im: p.im, known, estimate });
    }
    let kept: Vec<&ProbeSample> = samples.iter().filter(|s| s.kept).collect();
    if kept.len() < opts.min_points.max(2) {
        return Err(Error::Recovery(format!(
            "only {} schedule points pass |cos(2τψ̃)| ≥ {} (need {})",
            kept.len(),
            opts.threshold,
            opts.min_points.max(2)
        )));
    }
    let taus: Vec<f64> = kept.iter().map(|s| s.tau).collect();
    let ests: Vec<f64> = kept.iter().map(|s| s.estimate).collect();
    let (estimate, slope, confidence) = richardson(&taus, &ests)?;
    let status = match boundary_wavelength(&phase, taus[taus.len() - 1]) {
        w if input.domain.mesh_h() * opts.mesh_points_per_wave > w => format!(
            "under-resolved: mesh h {} exceeds 1/{} of the boundary oscillation {w:.3e}",
            input.domain.mesh_h(),
            opts.mesh_points_per_wave
        ),
        _ => "ok".into(),
    };
    Ok(ProbeResult {
        probe,
        x_tilde: phase.x_tilde(),
        psi_tilde: psi,
        lambda,
        samples,
        estimate,
        slope,
        confidence,
        status,
    })
}

/// Shortest oscillation length `2π/(τ max|∂_zΦ|)` of the CGO data on `Γ̃`.
pub fn boundary_wavelength(phase: &PhaseSpec, tau: f64) -> f64 {
    let m = 4096;
    let d1 = &phase.on_circle(m)[1];
    let grad = uniform_angles(m)
        .iter()
        .zip(d1)
        .filter(|(t, _)| phase.gamma_tilde().contains(**t))
        .map(|(_, d)| d.norm())
        .fold(0.0, f64::max);
    TAU / (tau * grad)
}

/// Runs `recover_point` for each probe; failures are reported per probe.
pub fn recover_grid(
    input: &RecoveryInput,
    probes: &[C64],
    schedule: &[f64],
    opts: &RecoveryOptions,
) -> Vec<std::result::Result<ProbeResult, (C64, Error)>> {
    probes.iter().map(|p| recover_point(input, *p, schedule, opts).map_err(|e| (*p, e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::half_disk_domain;

    #[test]
    fn richardson_recovers_intercept() {
        let taus = [10.0, 12.0, 15.0, 20.0];
        let vals: Vec<f64> = taus.iter().map(|t| 0.7 + 3.0 / t).collect();
        let (c0, c1, rms) = richardson(&taus, &vals).unwrap();
        assert!((c0 - 0.7).abs() < 1e-12 && (c1 - 3.0).abs() < 1e-10 && rms < 1e-12);
    }

    #[test]
    fn cubic_model_matches_saddle_prediction() {
        let model = CubicModel { b: 1.0 };
        let grid = PolarGrid::new(512).unwrap();
        let mut prev = f64::INFINITY;
        for tau in [20.0, 40.0, 60.0] {
            let num = model.bump_integral(0.8, tau, &grid);
            let rel = (num - model.bump_prediction(tau)).norm() / model.bump_prediction(tau).norm();
            assert!(rel < prev, "τ = {tau}: {rel} after {prev}");
            prev = rel;
        }
        assert!(prev < 0.1, "{prev}");
    }

    #[test]
    fn prediction_vanishes_with_potential_and_scales() {
        let domain = half_disk_domain(0.1, 0.25).unwrap();
        let phase = build_phase_with(C64::new(0.0, 0.3), &domain, 1e-3, &PhaseOptions::default()).unwrap();
        let a = Amplitude::constant(1.0);
        assert_eq!(stationary_phase_predict(&phase, &a, 0.0, 20.0), 0.0);
        let p = stationary_phase_predict(&phase, &a, 1.0, 20.0) / (40.0 * phase.psi_at_target()).cos();
        let q = stationary_phase_predict(&phase, &a, 1.0, 40.0) / (80.0 * phase.psi_at_target()).cos();
        assert!((p / q - 2.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_must_increase() {
        let domain = half_disk_domain(0.1, 0.25).unwrap();
        let mesh = domain.mesh().clone();
        let q = Potential::from_profile(crate::Profile::Zero, &mesh);
        let nd = crate::fem::assemble_nd_map(&q, &domain, crate::BoundaryBasis::Nodal { arc: *domain.gamma_tilde() });
        let input = RecoveryInput { domain, nd1: nd.clone(), nd2: nd, q1: q.clone(), q2: q };
        let e = recover_point(&input, C64::new(0.0, 0.3), &[20.0, 10.0], &RecoveryOptions::default()).unwrap_err();
        assert!(e.to_string().contains("increasing"));
    }
}
