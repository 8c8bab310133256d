//! Approximate complex geometrical optics solutions of `(Δ + q)u = 0`.
//!
//! For a signed parameter `t` (`+τ` for `u₁` with `q₁`, `−τ` for `v` with `q₂`)
//! the solution is stored normalised by `e^{−tφ}`:
//!
//! ```text
//! Ũ = e^{itψ}(a + a₁/t) + e^{−itψ}(ā + b₁/t) − ¼e^{−itψ}∂_z⁻¹(A e^{2itψ}) − ¼e^{itψ}∂_z̄⁻¹(B e^{−2itψ})
//! A = a(∂_z̄⁻¹q − M₁),  B = ā(∂_z⁻¹q − M₃)
//! ```
//!
//! so that `e^{−tφ}(Δ + q)U = q(Ũ − e^{itψ}a − e^{−itψ}ā)` exactly. The
//! holomorphic correction is `a₁ = a₁₁ + a₁₂` and the antiholomorphic one
//! `b₁ = conj(a₁₁) + conj(P_b)`:
//!
//! * `a₁₁ = i·S[β]` with `β = Im(A/(4∂_zΦ))` on the circle (plus an amplitude
//!   term near `Γ₀*` when `a` is not constant), which cancels the order-one
//!   part of the normal derivative on `Γ₀*`;
//! * `a₁₂`, `P_b` are the Cauchy integrals that cancel the boundary terms
//!   produced by integrating the two remainders by parts.

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::calculus::{dbar_inverse_at, dbar_inverse_full, dz_inverse_at, dz_inverse_full, wirtinger, CauchyOutput};
use crate::series::{fft_forward, uniform_angles, PowerSeries};
use crate::{Amplitude, BoundaryArc, Domain, Error, GridFunction, PhaseSpec, PolarGrid, Result, C64, I};

/// Values at `x̃` subtracted from the area transforms of `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentConstants {
    /// `(∂_z̄⁻¹q)(x̃)`.
    pub dbar: C64,
    /// `(∂_z⁻¹q)(x̃)`.
    pub dz: C64,
}

pub fn moment_constants(q: &GridFunction, x_tilde: C64) -> Result<MomentConstants> {
    if x_tilde.norm() >= 1.0 {
        return Err(Error::Precondition(format!("x̃ = {x_tilde} is not interior")));
    }
    let dbar = dbar_inverse_at(q, &[x_tilde])?[0];
    let dz = dz_inverse_at(q, &[x_tilde])?[0];
    Ok(MomentConstants { dbar, dz })
}

/// Holomorphic boundary corrections (antiholomorphic ones are their conjugates).
#[derive(Clone, Debug)]
pub struct BoundaryCorrections {
    /// `a₁₁`; `b₁₁(z̄) = conj(a₁₁(z))`.
    pub a11: PowerSeries,
    /// Non-oscillatory `Γ₀*` parts of `a₁₂` and `P_b`.
    pub a121: PowerSeries,
    pub pb121: PowerSeries,
    /// Max over `Γ₀*` of the order-one normal-derivative balance.
    pub equation_residual: f64,
}

/// Construction parameters.
#[derive(Clone, Debug)]
pub struct CgoOptions {
    pub tau_min: f64,
    /// Uniform samples on the circle for boundary densities.
    pub boundary_samples: usize,
    /// Minimum grid points per oscillation `2π/(τ max|∇ψ|)`.
    pub points_per_wave: f64,
}

impl Default for CgoOptions {
    fn default() -> Self {
        Self { tau_min: 5.0, boundary_samples: 8192, points_per_wave: 8.0 }
    }
}

/// Residual norms of an assembled solution.
#[derive(Clone, Copy, Debug, Default)]
pub struct ResidualRecord {
    /// `‖e^{−tφ}(Δ+q)U‖_{L²(Ω)}`.
    pub g_l2: f64,
    /// `‖e^{−tφ}∂_νU‖_{L²(Γ₀)}`.
    pub neumann_gamma0: f64,
}

/// Normalised boundary data on `2πk/m`.
#[derive(Clone, Debug)]
struct BoundaryData {
    theta: Vec<f64>,
    phi: Vec<f64>,
    value: Vec<C64>,
    neumann: Vec<C64>,
    /// Fourier coefficients (FFT order, divided by `m`) for interpolation.
    value_hat: Vec<C64>,
    neumann_hat: Vec<C64>,
}

/// Per-`t` quantities on the boundary circle shared by several steps.
struct CircleData {
    zeta: Vec<C64>,
    phase: [Vec<C64>; 3],
    a: Vec<C64>,
    big_a: Vec<C64>,
    big_b: Vec<C64>,
}

/// An assembled CGO solution, all terms normalised by `e^{−tφ}`.
#[derive(Clone, Debug)]
pub struct CgoSolution {
    t: f64,
    grid: Arc<PolarGrid>,
    phase: PhaseSpec,
    amplitude: Amplitude,
    moments: MomentConstants,
    corrections: BoundaryCorrections,
    a12: PowerSeries,
    pb: PowerSeries,
    phi: Vec<f64>,
    psi: Vec<f64>,
    main_hol: Vec<C64>,
    main_anti: Vec<C64>,
    rem_h: Vec<C64>,
    rem_k: Vec<C64>,
    total: Vec<C64>,
    /// `A e^{2itψ}` transform with its radial derivative, kept for checks.
    h: CauchyOutput,
    big_a: Vec<C64>,
    q: GridFunction,
    boundary: BoundaryData,
    residuals: ResidualRecord,
}

fn on_rings(series: &PowerSeries, grid: &PolarGrid) -> Vec<C64> {
    let mut out = Vec::with_capacity(grid.len());
    for r in grid.radii() {
        out.extend(series.eval_ring(*r, grid.n_theta()));
    }
    out
}

fn circle_data(q: &GridFunction, phase: &PhaseSpec, amp: &Amplitude, m: &MomentConstants, n: usize) -> CircleData {
    let tq = dbar_inverse_full(q).boundary.sample_uniform(n).0;
    let dq = dz_inverse_full(q).boundary.sample_uniform(n).0;
    let a = amp.series().eval_ring(1.0, n);
    let big_a = a.iter().zip(&tq).map(|(a, t)| a * (t - m.dbar)).collect();
    let big_b = a.iter().zip(&dq).map(|(a, d)| a.conj() * (d - m.dz)).collect();
    CircleData {
        zeta: uniform_angles(n).iter().map(|t| C64::from_polar(1.0, *t)).collect(),
        phase: phase.on_circle(n),
        a,
        big_a,
        big_b,
    }
}

/// Smooth indicator: 1 on the arc, decaying to 0 within `width` outside it.
fn arc_cutoff(arc: &BoundaryArc, theta: f64, width: f64) -> f64 {
    let d = arc.distance(theta);
    if d <= 0.0 {
        1.0
    } else if d >= width {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * d / width).cos())
    }
}

fn corrections_from(cd: &CircleData, phase: &PhaseSpec, amp: &Amplitude) -> Result<BoundaryCorrections> {
    let n = cd.zeta.len();
    let theta = uniform_angles(n);
    let star = phase.gamma0_star();
    let d1 = &cd.phase[1];
    let a_prime = amp.series().derivative().eval_ring(1.0, n);
    let mut beta = Vec::with_capacity(n);
    for k in 0..n {
        let mut b = (cd.big_a[k] / (4.0 * d1[k])).im;
        if !amp.is_constant() {
            let chi = arc_cutoff(star, theta[k], 0.05);
            if chi > 0.0 {
                let psi_r = (cd.zeta[k] * d1[k]).im;
                if psi_r.abs() < 1e-8 {
                    return Err(Error::Amplitude(format!("∂ψ/∂ν vanishes at θ = {:.4} near Γ₀*", theta[k])));
                }
                let dn = 2.0 * (cd.zeta[k] * a_prime[k]).re;
                b += chi * dn / (2.0 * psi_r);
            }
        }
        beta.push(b);
    }
    let a11 = PowerSeries::schwarz(&beta).scale(I).trimmed(1e-16);
    // Order-one balance of the normal derivative on Γ₀*.
    let a11_b = a11.eval_ring(1.0, n);
    let mut worst: f64 = 0.0;
    for k in 0..n {
        if !star.contains_open(theta[k]) {
            continue;
        }
        let (z, w) = (cd.zeta[k], cd.zeta[k] * d1[k]);
        let lhs = 2.0 * (w * a11_b[k]).re;
        let dn = 2.0 * (z * a_prime[k]).re;
        let r = lhs - 0.25 * (z * cd.big_a[k] + z.conj() * cd.big_b[k]) + dn;
        worst = worst.max(r.norm());
    }
    let on_star = |k: usize| if star.contains(theta[k]) { 1.0 } else { 0.0 };
    let a121_density: Vec<C64> = (0..n).map(|k| on_star(k) * cd.zeta[k] * cd.big_b[k] / d1[k].conj()).collect();
    let pb121_density: Vec<C64> = (0..n).map(|k| on_star(k) * cd.zeta[k] * cd.big_a[k].conj() / d1[k].conj()).collect();
    Ok(BoundaryCorrections {
        a11,
        a121: PowerSeries::cauchy_integral(&a121_density).scale(C64::new(-0.25, 0.0)),
        pb121: PowerSeries::cauchy_integral(&pb121_density).scale(C64::new(-0.25, 0.0)),
        equation_residual: worst,
    })
}

/// `a₁₁` and the `Γ₀*` integrals for `q`, `Φ` and `a`.
pub fn boundary_corrections(
    q: &GridFunction,
    phase: &PhaseSpec,
    amplitude: &Amplitude,
    moments: &MomentConstants,
) -> Result<BoundaryCorrections> {
    let cd = circle_data(q, phase, amplitude, moments, CgoOptions::default().boundary_samples);
    corrections_from(&cd, phase, amplitude)
}

/// Assembles the solution with signed parameter `t`.
pub fn assemble_cgo(q: &GridFunction, phase: &PhaseSpec, amplitude: &Amplitude, t: f64) -> Result<CgoSolution> {
    assemble_cgo_with(q, phase, amplitude, t, &CgoOptions::default())
}

pub fn assemble_cgo_with(
    q: &GridFunction,
    phase: &PhaseSpec,
    amplitude: &Amplitude,
    t: f64,
    opts: &CgoOptions,
) -> Result<CgoSolution> {
    if !t.is_finite() || t.abs() < opts.tau_min {
        return Err(Error::Precondition(format!("|t| = {} below τ_min = {}", t.abs(), opts.tau_min)));
    }
    if q.values().iter().any(|v| !v.is_finite() || v.im != 0.0) {
        return Err(Error::Precondition("potential samples must be finite and real".into()));
    }
    let grid = q.grid().clone();
    let nb = opts.boundary_samples.max(2 * grid.n_theta());
    let moments = moment_constants(q, phase.x_tilde())?;
    let cd = circle_data(q, phase, amplitude, &moments, nb);
    let grad_max = cd.phase[1].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let wavelength = TAU / (t.abs() * grad_max);
    if grid.spacing() * opts.points_per_wave > wavelength {
        return Err(Error::Resolution(format!(
            "grid spacing {:.3e} gives fewer than {} points per oscillation {:.3e}; refine the grid",
            grid.spacing(),
            opts.points_per_wave,
            wavelength
        )));
    }
    let corrections = corrections_from(&cd, phase, amplitude)?;

    // Boundary Cauchy integrals, τ-dependent.
    let osc_b: Vec<C64> = cd.phase[0].iter().map(|p| C64::from_polar(1.0, -2.0 * t * p.im)).collect();
    let rho_a: Vec<C64> = (0..nb).map(|k| cd.zeta[k] * cd.big_b[k] * osc_b[k] / cd.phase[1][k].conj()).collect();
    let rho_b: Vec<C64> = (0..nb).map(|k| cd.zeta[k] * cd.big_a[k].conj() * osc_b[k] / cd.phase[1][k].conj()).collect();
    let quarter = C64::new(-0.25, 0.0);
    let a12 = PowerSeries::cauchy_integral(&rho_a).scale(quarter).trimmed(1e-16);
    let pb = PowerSeries::cauchy_integral(&rho_b).scale(quarter).trimmed(1e-16);

    // Area terms.
    let (big_phi, _) = phase.on_grid(&grid);
    let phi: Vec<f64> = big_phi.iter().map(|v| v.re).collect();
    let psi: Vec<f64> = big_phi.iter().map(|v| v.im).collect();
    let osc: Vec<C64> = big_phi.iter().map(|v| C64::from_polar(1.0, t * v.im)).collect();
    let a_g = on_rings(amplitude.series(), &grid);
    let a11_g = on_rings(&corrections.a11, &grid);
    let a12_g = on_rings(&a12, &grid);
    let pb_g = on_rings(&pb, &grid);
    let tq = dbar_inverse_full(q);
    let dq = dz_inverse_full(q);
    let big_a: Vec<C64> = a_g.iter().zip(tq.values.values()).map(|(a, v)| a * (v - moments.dbar)).collect();
    let big_b: Vec<C64> = a_g.iter().zip(dq.values.values()).map(|(a, v)| a.conj() * (v - moments.dz)).collect();
    let h_in = GridFunction::new(grid.clone(), big_a.iter().zip(&osc).map(|(a, e)| a * e * e).collect())?;
    let k_in = GridFunction::new(grid.clone(), big_b.iter().zip(&osc).map(|(b, e)| b * (e * e).conj()).collect())?;
    let h = dz_inverse_full(&h_in);
    let k = dbar_inverse_full(&k_in);
    let n = grid.len();
    let mut main_hol = Vec::with_capacity(n);
    let mut main_anti = Vec::with_capacity(n);
    let mut rem_h = Vec::with_capacity(n);
    let mut rem_k = Vec::with_capacity(n);
    let mut total = Vec::with_capacity(n);
    for i in 0..n {
        let e = osc[i];
        let mh = e * (a_g[i] + (a11_g[i] + a12_g[i]) / t);
        let ma = (e * (a_g[i] + (a11_g[i] + pb_g[i]) / t)).conj();
        let rh = -0.25 * e.conj() * h.values.values()[i];
        let rk = -0.25 * e * k.values.values()[i];
        main_hol.push(mh);
        main_anti.push(ma);
        rem_h.push(rh);
        rem_k.push(rk);
        total.push(mh + ma + rh + rk);
    }

    // Boundary values and normal derivatives.
    let theta = uniform_angles(nb);
    let (hb, hr) = h.boundary.sample_uniform(nb);
    let (kb, kr) = k.boundary.sample_uniform(nb);
    let a_d = amplitude.series().derivative().eval_ring(1.0, nb);
    let a11_b = corrections.a11.eval_ring(1.0, nb);
    let a11_d = corrections.a11.derivative().eval_ring(1.0, nb);
    let a12_b = a12.eval_ring(1.0, nb);
    let a12_d = a12.derivative().eval_ring(1.0, nb);
    let pb_b = pb.eval_ring(1.0, nb);
    let pb_d = pb.derivative().eval_ring(1.0, nb);
    let mut value = Vec::with_capacity(nb);
    let mut neumann = Vec::with_capacity(nb);
    let mut phi_b = Vec::with_capacity(nb);
    for j in 0..nb {
        let z = cd.zeta[j];
        let d1 = cd.phase[1][j];
        let e = C64::from_polar(1.0, t * cd.phase[0][j].im);
        let alpha = cd.a[j] + (a11_b[j] + a12_b[j]) / t;
        let alpha_d = a_d[j] + (a11_d[j] + a12_d[j]) / t;
        let beta = cd.a[j] + (a11_b[j] + pb_b[j]) / t;
        let beta_d = a_d[j] + (a11_d[j] + pb_d[j]) / t;
        value.push(e * alpha + (e * beta).conj() - 0.25 * e.conj() * hb[j] - 0.25 * e * kb[j]);
        neumann.push(
            e * z * (t * d1 * alpha + alpha_d) + (e * z * (t * d1 * beta + beta_d)).conj()
                - 0.25 * e.conj() * (t * (d1 * z).conj() * hb[j] + hr[j])
                - 0.25 * e * (t * d1 * z * kb[j] + kr[j]),
        );
        phi_b.push(cd.phase[0][j].re);
    }
    let spectrum = |v: &[C64]| {
        let mut c = v.to_vec();
        fft_forward(&mut c);
        let s = 1.0 / v.len() as f64;
        c.iter_mut().for_each(|x| *x *= s);
        c
    };
    let boundary = BoundaryData {
        value_hat: spectrum(&value),
        neumann_hat: spectrum(&neumann),
        theta,
        phi: phi_b,
        value,
        neumann,
    };

    let mut sol = CgoSolution {
        t,
        grid,
        phase: phase.clone(),
        amplitude: amplitude.clone(),
        moments,
        corrections,
        a12,
        pb,
        phi,
        psi,
        main_hol,
        main_anti,
        rem_h,
        rem_k,
        total,
        h,
        big_a,
        q: q.clone(),
        boundary,
        residuals: ResidualRecord::default(),
    };
    sol.residuals = residuals(&sol)?;
    Ok(sol)
}

/// `‖g_t‖_{L²(Ω)}` and the `Γ₀` Neumann residual. The main terms cancel
/// against `Δ = 4∂_z̄∂_z` exactly, so only `q(Ũ − e^{itψ}a − e^{−itψ}ā)` is
/// evaluated.
pub fn residuals(sol: &CgoSolution) -> Result<ResidualRecord> {
    let g = sol.g_values();
    let g_l2 = sol.grid.l2_norm(&g);
    let star = sol.phase.gamma0_star();
    let gamma_tilde = sol.phase.gamma_tilde();
    let nb = sol.boundary.theta.len();
    let mut acc = 0.0;
    for j in 0..nb {
        let t = sol.boundary.theta[j];
        if star.contains(t) && !gamma_tilde.contains(t) {
            acc += sol.boundary.neumann[j].norm_sqr();
        }
    }
    let neumann_gamma0 = (acc * TAU / nb as f64).sqrt();
    if !(g_l2.is_finite() && neumann_gamma0.is_finite()) {
        return Err(Error::NonFinite("CGO residuals"));
    }
    Ok(ResidualRecord { g_l2, neumann_gamma0 })
}

fn trig_eval(hat: &[C64], theta: f64) -> C64 {
    let m = hat.len();
    let mut acc = C64::new(0.0, 0.0);
    let step = C64::from_polar(1.0, theta);
    let mut e = C64::new(1.0, 0.0);
    for c in hat.iter().take(m / 2) {
        acc += c * e;
        e *= step;
    }
    let back = step.conj();
    let mut e = back;
    for b in (m / 2 + 1..m).rev() {
        acc += hat[b] * e;
        e *= back;
    }
    acc
}

impl CgoSolution {
    /// Signed parameter (`+τ` or `−τ`).
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn tau(&self) -> f64 {
        self.t.abs()
    }

    pub fn sign(&self) -> i8 {
        if self.t > 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn phase(&self) -> &PhaseSpec {
        &self.phase
    }

    pub fn amplitude(&self) -> &Amplitude {
        &self.amplitude
    }

    pub fn moments(&self) -> &MomentConstants {
        &self.moments
    }

    pub fn corrections(&self) -> &BoundaryCorrections {
        &self.corrections
    }

    pub fn a12(&self) -> &PowerSeries {
        &self.a12
    }

    pub fn pb(&self) -> &PowerSeries {
        &self.pb
    }

    /// `φ` at the grid nodes.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `ψ` at the grid nodes.
    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    /// `e^{itψ}(a + a₁/t)`.
    pub fn main_holomorphic(&self) -> &[C64] {
        &self.main_hol
    }

    /// `e^{−itψ}(ā + b₁/t)`.
    pub fn main_antiholomorphic(&self) -> &[C64] {
        &self.main_anti
    }

    /// `−¼e^{−itψ}∂_z⁻¹(A e^{2itψ})`.
    pub fn remainder_dz(&self) -> &[C64] {
        &self.rem_h
    }

    /// `−¼e^{itψ}∂_z̄⁻¹(B e^{−2itψ})`.
    pub fn remainder_dbar(&self) -> &[C64] {
        &self.rem_k
    }

    /// `e^{−tφ}U` at the grid nodes.
    pub fn total(&self) -> &[C64] {
        &self.total
    }

    /// `e^{−tφ}(Δ + q)U` at the grid nodes.
    pub fn g_values(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.total.len());
        let a = on_rings(self.amplitude.series(), &self.grid);
        for i in 0..self.total.len() {
            let e = C64::from_polar(1.0, self.t * self.psi[i]);
            let main = e * a[i] + (e * a[i]).conj();
            out.push(self.q.values()[i] * (self.total[i] - main));
        }
        out
    }

    /// `A = a(∂_z̄⁻¹q − M₁)` at the grid nodes.
    pub fn big_a(&self) -> &[C64] {
        &self.big_a
    }

    pub fn residuals(&self) -> &ResidualRecord {
        &self.residuals
    }

    /// Normalised boundary value `e^{−tφ}U` at angle `θ`.
    pub fn boundary_value(&self, theta: f64) -> C64 {
        trig_eval(&self.boundary.value_hat, theta)
    }

    /// Normalised normal derivative `e^{−tφ}∂_νU` at angle `θ`.
    pub fn neumann_normalized(&self, theta: f64) -> C64 {
        trig_eval(&self.boundary.neumann_hat, theta)
    }

    /// Raw normal derivative `∂_νU` at angle `θ`.
    pub fn neumann(&self, theta: f64) -> C64 {
        self.neumann_normalized(theta) * (self.t * self.phase.phi(C64::from_polar(1.0, theta))).exp()
    }

    /// Raw boundary value `U` at angle `θ`.
    pub fn value(&self, theta: f64) -> C64 {
        self.boundary_value(theta) * (self.t * self.phase.phi(C64::from_polar(1.0, theta))).exp()
    }

    /// Uniform boundary samples: angles, `φ`, normalised values and normal derivatives.
    pub fn boundary_samples(&self) -> (&[f64], &[f64], &[C64], &[C64]) {
        (&self.boundary.theta, &self.boundary.phi, &self.boundary.value, &self.boundary.neumann)
    }

    /// Relative error of the integration-by-parts identity
    /// `∂_z⁻¹(Ae^{2itψ}) = G − conj(𝒞 conj G) − ∂_z⁻¹(e^{2itψ}∂_z(A/(t∂_zΦ)))`,
    /// `G = Ae^{2itψ}/(t∂_zΦ)`, measured away from `x̃` and returned with the
    /// relative size of the last (higher-order) term.
    pub fn ibp_identity_error(&self, exclusion: f64) -> Result<(f64, f64)> {
        let grid = &self.grid;
        let (big_phi, d1) = self.phase.on_grid(grid);
        let ratio: Vec<C64> = self.big_a.iter().zip(&d1).map(|(a, d)| a / (self.t * d)).collect();
        let ratio = GridFunction::new(grid.clone(), ratio)?;
        let (dz_ratio, _) = wirtinger(&ratio);
        let osc2: Vec<C64> = big_phi.iter().map(|v| C64::from_polar(1.0, 2.0 * self.t * v.im)).collect();
        let inner = GridFunction::new(grid.clone(), dz_ratio.values().iter().zip(&osc2).map(|(d, e)| d * e).collect())?;
        let tail = dz_inverse_full(&inner).values;
        let pb_g = on_rings(&self.pb, grid);
        let x = self.phase.x_tilde();
        let (mut num, mut den, mut tail_sz) = (0.0, 0.0, 0.0);
        for i in 0..grid.len() {
            let z = grid.points()[i];
            if (z - x).norm() < exclusion {
                continue;
            }
            let w = grid.weights()[i];
            let g = ratio.values()[i] * osc2[i];
            // conj(𝒞 conj G) = −4 conj(P_b)/t.
            let boundary = -4.0 * pb_g[i].conj() / self.t;
            let rhs = g - boundary - tail.values()[i];
            let lhs = self.h.values.values()[i];
            num += w * (lhs - rhs).norm_sqr();
            den += w * lhs.norm_sqr();
            tail_sz += w * tail.values()[i].norm_sqr();
        }
        if den == 0.0 {
            return Ok((0.0, 0.0));
        }
        Ok(((num / den).sqrt(), (tail_sz / den).sqrt()))
    }
}

/// Solution pair for the pairing identity: `u₁` from `(q₁, +τ)`, `v` from `(q₂, −τ)`.
pub fn assemble_pair(
    q1: &GridFunction,
    q2: &GridFunction,
    phase: &PhaseSpec,
    amplitude: &Amplitude,
    tau: f64,
) -> Result<(CgoSolution, CgoSolution)> {
    Ok((assemble_cgo(q1, phase, amplitude, tau)?, assemble_cgo(q2, phase, amplitude, -tau)?))
}

/// Checks that the phase was built for this domain's arcs.
pub fn check_phase_domain(phase: &PhaseSpec, domain: &Domain) -> Result<()> {
    if phase.gamma0_star() != domain.gamma0_star() || phase.gamma_tilde() != domain.gamma_tilde() {
        return Err(Error::Mismatch("phase built for different boundary arcs".into()));
    }
    Ok(())
}
