//! Holomorphic Carleman phases `Φ = φ + iψ` with `Im Φ = 0` on `Γ₀*` and a
//! single nondegenerate interior critical point placed at a requested target,
//! together with amplitudes.
//!
//! The phase is `Φ = i·S[β] + c` where `S` is the Schwarz integral and `β`, the
//! boundary value of `ψ`, vanishes identically on `Γ₀*`. On the free arc
//! `β = w·Σ μ_j k_j` with the weight `w = (4s(1−s))^p` in the normalised arc
//! position `s`; the `k_j` are the kernels of the linear functionals
//! `Φ'(x̃)`, `Φ''(x̃)` (and optionally `ψ(x̃)`). This is the minimum-norm
//! density in `L²(1/w)` meeting the interpolation conditions
//! `Φ'(x̃) = 0`, `Φ''(x̃) = λe^{iγ}`. The direction `γ` is scanned to keep a
//! single interior critical point and a small oscillation range of `φ`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::series::{uniform_angles, PowerSeries};
use crate::{BoundaryArc, Domain, Error, PolarGrid, Result, C64, I};

/// Construction parameters for [`build_phase_with`].
#[derive(Clone, Debug)]
pub struct PhaseOptions {
    /// Prescribed `|∂²_zΦ(x̃)|`.
    pub lambda: f64,
    /// Vanishing order of the boundary weight at the ends of the free arc.
    pub weight_power: i32,
    /// Boundary samples used for the Schwarz integral.
    pub boundary_samples: usize,
    /// Number of directions `γ` scanned.
    pub gamma_scan: usize,
    /// Optional prescribed value of `ψ(x̃)`.
    pub psi_target: Option<f64>,
    /// Lower bound for `|∂²_zΦ(x̃)|` and the distance from critical points to `Γ̃`.
    pub floor: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self { lambda: 1.0, weight_power: 4, boundary_samples: 8192, gamma_scan: 24, psi_target: None, floor: 1e-3 }
    }
}

/// A holomorphic phase on the closed disk.
#[derive(Clone, Debug)]
pub struct PhaseSpec {
    series: PowerSeries,
    d1: PowerSeries,
    d2: PowerSeries,
    target: C64,
    x_tilde: C64,
    gamma: f64,
    critical_points: Vec<C64>,
    hessian: [[f64; 2]; 2],
    psi_at_target: f64,
    gamma0_star: BoundaryArc,
    gamma_tilde: BoundaryArc,
}

impl PhaseSpec {
    /// Phase from an explicit series with a known distinguished critical point.
    pub fn from_series(
        series: PowerSeries,
        x_tilde: C64,
        target: C64,
        gamma0_star: BoundaryArc,
        gamma_tilde: BoundaryArc,
    ) -> Self {
        let mut spec = Self::assemble(series, x_tilde, target, gamma0_star, gamma_tilde);
        spec.critical_points = spec.locate_critical_points();
        spec
    }

    fn assemble(
        series: PowerSeries,
        x_tilde: C64,
        target: C64,
        gamma0_star: BoundaryArc,
        gamma_tilde: BoundaryArc,
    ) -> Self {
        let d1 = series.derivative();
        let d2 = d1.derivative();
        let [_, _, f2] = series.eval_derivs(x_tilde);
        let hessian = [[f2.im, f2.re], [f2.re, -f2.im]];
        let psi_at_target = series.eval(x_tilde).im;
        Self {
            series,
            d1,
            d2,
            target,
            x_tilde,
            gamma: f2.arg(),
            critical_points: vec![x_tilde],
            hessian,
            psi_at_target,
            gamma0_star,
            gamma_tilde,
        }
    }

    pub fn series(&self) -> &PowerSeries {
        &self.series
    }

    pub fn derivative(&self) -> &PowerSeries {
        &self.d1
    }

    pub fn second_derivative(&self) -> &PowerSeries {
        &self.d2
    }

    pub fn target(&self) -> C64 {
        self.target
    }

    /// Distinguished critical point `x̃`.
    pub fn x_tilde(&self) -> C64 {
        self.x_tilde
    }

    /// Argument of `∂²_zΦ(x̃)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Interior critical points `ℋ` (the distinguished one first).
    pub fn critical_points(&self) -> &[C64] {
        &self.critical_points
    }

    /// Hessian of `ψ` at `x̃`.
    pub fn hessian(&self) -> [[f64; 2]; 2] {
        self.hessian
    }

    pub fn hessian_det(&self) -> f64 {
        self.hessian[0][0] * self.hessian[1][1] - self.hessian[0][1] * self.hessian[1][0]
    }

    /// `ψ(x̃)`.
    pub fn psi_at_target(&self) -> f64 {
        self.psi_at_target
    }

    /// `|∂²_zΦ(x̃)|`, equal to `|det ψ''(x̃)|^{1/2}`.
    pub fn lambda(&self) -> f64 {
        self.d2.eval(self.x_tilde).norm()
    }

    pub fn gamma0_star(&self) -> &BoundaryArc {
        &self.gamma0_star
    }

    pub fn gamma_tilde(&self) -> &BoundaryArc {
        &self.gamma_tilde
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.series.eval(z)
    }

    /// `[Φ, ∂_zΦ, ∂²_zΦ]` at `z`.
    pub fn derivs(&self, z: C64) -> [C64; 3] {
        self.series.eval_derivs(z)
    }

    pub fn phi(&self, z: C64) -> f64 {
        self.eval(z).re
    }

    pub fn psi(&self, z: C64) -> f64 {
        self.eval(z).im
    }

    /// `Φ` and `∂_zΦ` at every node of a polar grid.
    pub fn on_grid(&self, grid: &PolarGrid) -> (Vec<C64>, Vec<C64>) {
        let nt = grid.n_theta();
        let mut f = Vec::with_capacity(grid.len());
        let mut d = Vec::with_capacity(grid.len());
        for r in grid.radii() {
            f.extend(self.series.eval_ring(*r, nt));
            d.extend(self.d1.eval_ring(*r, nt));
        }
        (f, d)
    }

    /// `Φ`, `∂_zΦ`, `∂²_zΦ` at `2πk/m` on the unit circle.
    pub fn on_circle(&self, m: usize) -> [Vec<C64>; 3] {
        [self.series.eval_ring(1.0, m), self.d1.eval_ring(1.0, m), self.d2.eval_ring(1.0, m)]
    }

    /// Interior critical points found by Newton iteration from a seed lattice,
    /// `x̃` first; their number is cross-checked against the winding number of
    /// `∂_zΦ` on the circle.
    fn locate_critical_points(&self) -> Vec<C64> {
        let mut found = vec![self.x_tilde];
        let count = winding_count(&self.d1.eval_ring(1.0, 4096));
        if count <= 1 {
            return found;
        }
        for i in 0..24 {
            for j in 0..24 {
                let mut z = C64::new(-0.96 + 0.08 * i as f64 + 0.04, -0.96 + 0.08 * j as f64 + 0.04);
                if z.norm() >= 0.99 {
                    continue;
                }
                for _ in 0..60 {
                    let [_, f1, f2] = self.series.eval_derivs(z);
                    if f2.norm() == 0.0 {
                        break;
                    }
                    z -= f1 / f2;
                    if z.norm() > 1.0 || !z.is_finite() {
                        break;
                    }
                }
                if z.is_finite() && z.norm() < 1.0 && self.d1.eval(z).norm() < 1e-10 {
                    if found.iter().all(|p| (p - z).norm() > 1e-6) {
                        found.push(z);
                    }
                }
            }
        }
        found
    }

    /// Plain-text serialisation: header lines then one `re im` line per coefficient.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "target {:e} {:e}", self.target.re, self.target.im);
        let _ = writeln!(s, "x_tilde {:e} {:e}", self.x_tilde.re, self.x_tilde.im);
        let _ = writeln!(s, "gamma0_star {:e} {:e}", self.gamma0_star.start(), self.gamma0_star.len());
        let _ = writeln!(s, "gamma_tilde {:e} {:e}", self.gamma_tilde.start(), self.gamma_tilde.len());
        let _ = writeln!(s, "coefficients {}", self.series.coeffs().len());
        for c in self.series.coeffs() {
            let _ = writeln!(s, "{:e} {:e}", c.re, c.im);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut pair = |key: &str| -> Result<(f64, f64)> {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing '{key}'")))?;
            let v: Vec<&str> = line.split_whitespace().collect();
            if v.len() != 3 || v[0] != key {
                return Err(Error::Parse(format!("expected '{key} a b', got '{line}'")));
            }
            let p = |t: &str| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{t}'")));
            Ok((p(v[1])?, p(v[2])?))
        };
        let target = pair("target")?;
        let x = pair("x_tilde")?;
        let g0 = pair("gamma0_star")?;
        let gt = pair("gamma_tilde")?;
        let header = lines.next().ok_or_else(|| Error::Parse("missing coefficient count".into()))?;
        let n: usize = header
            .strip_prefix("coefficients")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad coefficient header '{header}'")))?;
        let mut coeffs = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| Error::Parse("truncated coefficients".into()))?;
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad number '{t}'"))))
                .collect::<Result<_>>()?;
            if v.len() != 2 {
                return Err(Error::Parse(format!("bad coefficient line '{line}'")));
            }
            coeffs.push(C64::new(v[0], v[1]));
        }
        Ok(Self::from_series(
            PowerSeries::new(coeffs),
            C64::new(x.0, x.1),
            C64::new(target.0, target.1),
            BoundaryArc::new(g0.0, g0.1)?,
            BoundaryArc::new(gt.0, gt.1)?,
        ))
    }
}

/// Number of zeros of a holomorphic function inside the disk from its samples
/// on the circle (argument principle).
pub fn winding_count(samples: &[C64]) -> i64 {
    let n = samples.len();
    let mut total = 0.0;
    for k in 0..n {
        let a = samples[k];
        let b = samples[(k + 1) % n];
        total += (b / a).arg();
    }
    (total / TAU).round() as i64
}

/// Boundary weight: zero on `Γ₀*`, `(4s(1−s))^p` on the free arc.
fn boundary_weight(theta: &[f64], gamma0_star: &BoundaryArc, p: i32) -> Vec<f64> {
    let free = TAU - gamma0_star.len();
    theta
        .iter()
        .map(|t| {
            let d = gamma0_star.offset(*t);
            if d <= gamma0_star.len() || free <= 0.0 {
                0.0
            } else {
                let s = ((d - gamma0_star.len()) / free).clamp(0.0, 1.0);
                (4.0 * s * (1.0 - s)).powi(p)
            }
        })
        .collect()
}

/// Minimum-norm phase for a fixed direction `γ`; no admissibility checks.
pub fn design_phase(target: C64, domain: &Domain, gamma: f64, opts: &PhaseOptions) -> Result<PhaseSpec> {
    let mut spec = design_on_arcs(target, domain.gamma0_star(), domain.gamma_tilde(), gamma, opts)?;
    spec.critical_points = spec.locate_critical_points();
    Ok(spec)
}

fn design_on_arcs(
    target: C64,
    gamma0_star: &BoundaryArc,
    gamma_tilde: &BoundaryArc,
    gamma: f64,
    opts: &PhaseOptions,
) -> Result<PhaseSpec> {
    let m = opts.boundary_samples;
    let theta = uniform_angles(m);
    let w = boundary_weight(&theta, gamma0_star, opts.weight_power);
    let dt = TAU / m as f64;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let conds = [(1u32, C64::new(0.0, 0.0)), (2u32, C64::from_polar(opts.lambda, gamma))];
    for (order, value) in conds {
        let fact = if order == 1 { 1.0 } else { 2.0 };
        let k: Vec<C64> = theta
            .iter()
            .map(|t| {
                let e = C64::from_polar(1.0, *t);
                I / PI * fact * e / (e - target).powu(order + 1) * dt
            })
            .collect();
        rows.push(k.iter().map(|v| v.re).collect());
        rows.push(k.iter().map(|v| v.im).collect());
        rhs.push(value.re);
        rhs.push(value.im);
    }
    if let Some(psi0) = opts.psi_target {
        rows.push(
            theta
                .iter()
                .map(|t| {
                    let e = C64::from_polar(1.0, *t);
                    ((e + target) / (e - target)).re * dt / TAU
                })
                .collect(),
        );
        rhs.push(psi0);
    }
    let nc = rows.len();
    let gram = DMatrix::from_fn(nc, nc, |a, b| (0..m).map(|k| rows[a][k] * w[k] * rows[b][k]).sum::<f64>());
    let mu = gram
        .lu()
        .solve(&DVector::from_vec(rhs))
        .ok_or_else(|| Error::Phase("singular interpolation system".into()))?;
    let beta: Vec<f64> = (0..m).map(|k| w[k] * (0..nc).map(|a| mu[a] * rows[a][k]).sum::<f64>()).collect();
    let schwarz = PowerSeries::schwarz(&beta);
    let mut series = schwarz.scale(I).trimmed(1e-17);
    // Newton refinement of the critical point, then normalise Re Φ(x̃) = 0.
    let mut x = target;
    let d1 = series.derivative();
    let d2 = d1.derivative();
    for _ in 0..20 {
        let f2 = d2.eval(x);
        if f2.norm() == 0.0 {
            break;
        }
        let step = d1.eval(x) / f2;
        x -= step;
        if step.norm() < 1e-15 {
            break;
        }
    }
    if !x.is_finite() || x.norm() >= 1.0 {
        return Err(Error::Phase(format!("critical point left the disk (last iterate {x})")));
    }
    let shift = series.eval(x).re;
    let mut coeffs = series.coeffs().to_vec();
    if coeffs.is_empty() {
        coeffs.push(C64::new(0.0, 0.0));
    }
    coeffs[0] -= shift;
    series = PowerSeries::new(coeffs);
    Ok(PhaseSpec::assemble(series, x, target, *gamma0_star, *gamma_tilde))
}

/// Oscillation range of `φ` about `φ(x̃)` in units of `λ`: `(above, below)`.
fn phi_range(spec: &PhaseSpec) -> (f64, f64) {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for j in 1..=24 {
        let r = j as f64 / 24.0;
        for v in spec.series.eval_ring(r, 128) {
            hi = hi.max(v.re);
            lo = lo.min(v.re);
        }
    }
    let lam = spec.lambda();
    let p0 = spec.phi(spec.x_tilde);
    ((hi - p0) / lam, (p0 - lo) / lam)
}

/// Builds a phase whose critical point lies within `tol` of `target`, using
/// the default options.
pub fn build_phase(target: C64, domain: &Domain, tol: f64) -> Result<PhaseSpec> {
    build_phase_with(target, domain, tol, &PhaseOptions::default())
}

pub fn build_phase_with(target: C64, domain: &Domain, tol: f64, opts: &PhaseOptions) -> Result<PhaseSpec> {
    build_on_arcs(target, domain.gamma0_star(), domain.gamma_tilde(), tol, opts)
}

fn build_on_arcs(
    target: C64,
    gamma0_star: &BoundaryArc,
    gamma_tilde: &BoundaryArc,
    tol: f64,
    opts: &PhaseOptions,
) -> Result<PhaseSpec> {
    if !(tol > 0.0) || !target.is_finite() || 1.0 - target.norm() < 2.0 * tol {
        return Err(Error::Precondition(format!("target {target} must lie at distance ≥ 2·tol = {} from the boundary", 2.0 * tol)));
    }
    if !(opts.lambda > opts.floor) {
        return Err(Error::Precondition("λ must exceed the Hessian floor".into()));
    }
    let psi_floor = 1e-3 * opts.lambda;
    let mut best: Option<(f64, PhaseSpec)> = None;
    let mut last_err = None;
    for attempt in 0..2 {
        let mut o = opts.clone();
        if attempt == 1 {
            // ψ(x̃) vanished for every direction: prescribe it.
            o.psi_target = Some(10.0 * psi_floor);
        }
        for g in 0..opts.gamma_scan {
            let gamma = TAU * g as f64 / opts.gamma_scan as f64;
            let spec = match design_on_arcs(target, gamma0_star, gamma_tilde, gamma, &o) {
                Ok(s) => s,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            let circle = spec.d1.eval_ring(1.0, 4096);
            if winding_count(&circle) != 1 || circle.iter().any(|v| v.norm() < opts.floor * 1e-3) {
                continue;
            }
            if (spec.x_tilde - target).norm() > tol || spec.psi_at_target.abs() < psi_floor {
                continue;
            }
            let dist = gamma_tilde_distance(gamma_tilde, spec.x_tilde);
            if dist < opts.floor {
                continue;
            }
            let (up, dn) = phi_range(&spec);
            let score = up.max(dn);
            if best.as_ref().map_or(true, |(s, _)| score < *s) {
                best = Some((score, spec));
            }
        }
        if best.is_some() {
            break;
        }
    }
    best.map(|(_, s)| s).ok_or_else(|| {
        Error::Phase(match last_err {
            Some(e) => format!("no admissible direction; last error: {e}"),
            None => "no direction yields a single nondegenerate critical point".into(),
        })
    })
}

fn gamma_tilde_distance(gamma_tilde: &BoundaryArc, z: C64) -> f64 {
    let n = 2048;
    (0..=n)
        .map(|k| (C64::from_polar(1.0, gamma_tilde.start() + gamma_tilde.len() * k as f64 / n as f64) - z).norm())
        .fold(f64::INFINITY, f64::min)
}

/// A zero of the tangential derivative of `ψ` on the free arc.
#[derive(Clone, Debug)]
pub struct TangentialZero {
    pub theta: f64,
    /// Magnitude of the derivative of `∂_τψ` along the arc at the zero.
    pub slope: f64,
    pub simple: bool,
}

/// Verification report for a phase.
#[derive(Clone, Debug)]
pub struct PhaseReport {
    pub max_im_on_gamma0_star: f64,
    pub tangential_zeros: Vec<TangentialZero>,
    /// Longest run of samples where `∂_τψ` vanishes (an interval of zeros).
    pub vanishing_run: usize,
    pub critical_distance_to_gamma_tilde: f64,
    pub second_derivative: f64,
    pub first_derivative_at_x: f64,
    pub critical_count: i64,
    pub hessian_det: f64,
    pub hessian_det_fd: f64,
    pub psi_at_target: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

impl PhaseReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "max |Im Φ| on Γ₀*          {:.3e}", self.max_im_on_gamma0_star);
        let simple = self.tangential_zeros.iter().filter(|z| z.simple).count();
        let _ = writeln!(s, "tangential zeros of ψ        {} ({} simple)", self.tangential_zeros.len(), simple);
        let _ = writeln!(s, "distance ℋ to closure(Γ̃)     {:.4}", self.critical_distance_to_gamma_tilde);
        let _ = writeln!(s, "|∂²Φ(x̃)|                     {:.6}", self.second_derivative);
        let _ = writeln!(s, "|∂Φ(x̃)|                      {:.3e}", self.first_derivative_at_x);
        let _ = writeln!(s, "interior critical points     {}", self.critical_count);
        let _ = writeln!(s, "det ψ''(x̃)                   {:.6} (finite differences {:.6})", self.hessian_det, self.hessian_det_fd);
        let _ = writeln!(s, "ψ(x̃)                         {:.6}", self.psi_at_target);
        let _ = writeln!(s, "status                       {}", if self.passed { "pass" } else { "FAIL" });
        for f in &self.failures {
            let _ = writeln!(s, "  - {f}");
        }
        s
    }
}

/// Scans `∂_τψ` on the closed complement of `Γ₀*` at `samples` points.
/// Returns the sign-change zeros and the longest run of vanishing samples;
/// `None` (no free arc) means the zero set is empty.
pub fn tangential_zero_scan(spec: &PhaseSpec, free: Option<BoundaryArc>, samples: usize) -> (Vec<TangentialZero>, usize) {
    let Some(arc) = free else {
        return (Vec::new(), 0);
    };
    let h = arc.len() / (samples - 1) as f64;
    let vals: Vec<f64> = (0..samples)
        .map(|k| {
            let t = arc.start() + h * k as f64;
            let z = C64::from_polar(1.0, t);
            // ∂_τ = ν₂∂₁ − ν₁∂₂ = −∂_θ and ∂_θψ = Im(iz Φ'(z)).
            -(I * z * spec.d1.eval(z)).im
        })
        .collect();
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let mut zeros = Vec::new();
    let mut run = 0usize;
    let mut longest = 0usize;
    for k in 0..samples {
        if vals[k].abs() <= 1e-13 * scale {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
        if k + 1 < samples && vals[k] * vals[k + 1] < 0.0 {
            let t = arc.start() + h * (k as f64 + vals[k] / (vals[k] - vals[k + 1]));
            let slope = (vals[k + 1] - vals[k]).abs() / h;
            zeros.push(TangentialZero { theta: t, slope, simple: slope > 1e-6 * scale });
        }
    }
    (zeros, longest)
}

/// Checks the phase conditions: reality on `Γ₀*`, isolated tangential zeros
/// on the free arc, critical points away from `Γ̃`, nondegenerate Hessian.
pub fn verify_phase(spec: &PhaseSpec, domain: &Domain) -> PhaseReport {
    verify_on_arcs(spec, domain.gamma0_star(), domain.gamma_tilde(), 1e-3)
}

fn verify_on_arcs(spec: &PhaseSpec, gamma0_star: &BoundaryArc, gamma_tilde: &BoundaryArc, floor: f64) -> PhaseReport {
    let n = 4096;
    let max_im = (0..n)
        .map(|k| {
            let t = gamma0_star.start() + gamma0_star.len() * (k as f64 + 0.5) / n as f64;
            spec.eval(C64::from_polar(1.0, t)).im.abs()
        })
        .fold(0.0, f64::max);
    let free = gamma0_star.complement().ok();
    let (zeros, run) = tangential_zero_scan(spec, free, n);
    let x = spec.x_tilde;
    let dist = spec
        .critical_points
        .iter()
        .map(|c| gamma_tilde_distance(gamma_tilde, *c))
        .fold(f64::INFINITY, f64::min);
    let [_, f1, f2] = spec.derivs(x);
    let count = winding_count(&spec.d1.eval_ring(1.0, 4096));
    let h = 1e-4;
    let psi = |z: C64| spec.psi(z);
    let pxx = (psi(x + h) - 2.0 * psi(x) + psi(x - h)) / (h * h);
    let pyy = (psi(x + I * h) - 2.0 * psi(x) + psi(x - I * h)) / (h * h);
    let pxy = (psi(x + h + I * h) - psi(x + h - I * h) - psi(x - h + I * h) + psi(x - h - I * h)) / (4.0 * h * h);
    let det_fd = pxx * pyy - pxy * pxy;
    let mut failures = Vec::new();
    if max_im > 1e-10 {
        failures.push(format!("Im Φ reaches {max_im:.3e} on Γ₀*"));
    }
    if run >= 8 {
        failures.push(format!("∂_τψ vanishes on an interval ({run} consecutive samples)"));
    }
    if dist < floor {
        failures.push(format!("critical point within {dist:.3e} of closure(Γ̃)"));
    }
    if f2.norm() < floor {
        failures.push(format!("∂²Φ(x̃) = {:.3e} below floor", f2.norm()));
    }
    if f1.norm() > 1e-10 {
        failures.push(format!("∂Φ(x̃) = {:.3e} is not zero", f1.norm()));
    }
    if spec.hessian_det() >= 0.0 {
        failures.push("det ψ''(x̃) is not negative".into());
    }
    if spec.psi_at_target.abs() < 1e-3 * f2.norm().max(floor) {
        failures.push("ψ(x̃) vanishes".into());
    }
    PhaseReport {
        max_im_on_gamma0_star: max_im,
        tangential_zeros: zeros,
        vanishing_run: run,
        critical_distance_to_gamma_tilde: dist,
        second_derivative: f2.norm(),
        first_derivative_at_x: f1.norm(),
        critical_count: count,
        hessian_det: spec.hessian_det(),
        hessian_det_fd: det_fd,
        psi_at_target: spec.psi_at_target,
        passed: failures.is_empty(),
        failures,
    }
}

/// Holomorphic amplitude `a`, real on `Γ₀*`.
#[derive(Clone, Debug)]
pub struct Amplitude {
    series: PowerSeries,
}

impl Amplitude {
    pub fn constant(c: f64) -> Self {
        Self { series: PowerSeries::constant(C64::new(c, 0.0)) }
    }

    /// `a = ∏_k (Φ − Φ(z_k))(Φ − conj Φ(z_k))`, normalised to `a(x̃) = 1`.
    /// The factors are polynomials in `Φ` with real coefficients, so `a` is
    /// real wherever `Φ` is, and `a` vanishes at every `z_k`.
    pub fn killing(phase: &PhaseSpec, points: &[C64]) -> Result<Self> {
        let len = phase.series.coeffs().len().max(1) * 2;
        let mut a = PowerSeries::constant(C64::new(1.0, 0.0));
        for z in points {
            let c = phase.eval(*z);
            let quad = phase
                .series
                .mul(&phase.series, len)
                .add(&phase.series.scale(C64::new(-2.0 * c.re, 0.0)))
                .add(&PowerSeries::constant(C64::new(c.norm_sqr(), 0.0)));
            a = a.mul(&quad, len);
        }
        let at_x = a.eval(phase.x_tilde);
        if at_x.norm() < 1e-8 * a.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0) {
            return Err(Error::Amplitude("amplitude factor vanishes at x̃".into()));
        }
        Ok(Self { series: a.scale(C64::new(1.0 / at_x.re.abs().max(at_x.norm()), 0.0)) })
    }

    pub fn series(&self) -> &PowerSeries {
        &self.series
    }

    pub fn is_constant(&self) -> bool {
        self.series.coeffs().len() <= 1
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.series.eval(z)
    }
}

/// Default amplitude: `a ≡ 1` when `x̃` is the only interior critical point,
/// otherwise a factor vanishing at the remaining critical points.
pub fn build_amplitude(phase: &PhaseSpec) -> Result<Amplitude> {
    let others = &phase.critical_points[1..];
    if others.is_empty() {
        return Ok(Amplitude::constant(1.0));
    }
    Amplitude::killing(phase, others)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{half_disk_domain, make_disk_domain};
    use proptest::prelude::*;

    fn domain() -> Domain {
        half_disk_domain(0.1, 0.25).unwrap()
    }

    #[test]
    fn phase_at_centre_is_placed_and_real_on_gamma0_star() {
        let d = domain();
        let spec = build_phase(C64::new(0.0, 0.0), &d, 1e-3).unwrap();
        assert!(spec.x_tilde().norm() <= 1e-3);
        let rep = verify_phase(&spec, &d);
        assert!(rep.passed, "{}", rep.to_text());
        assert!(rep.max_im_on_gamma0_star <= 1e-10);
        assert_eq!(rep.critical_count, 1);
    }

    #[test]
    fn harmonic_hessian_identity() {
        let d = domain();
        let spec = build_phase(C64::new(0.1, 0.4), &d, 1e-3).unwrap();
        let lam = spec.lambda();
        assert!((spec.hessian_det().abs() - lam * lam).abs() <= 1e-8 * lam * lam);
        let rep = verify_phase(&spec, &d);
        assert!((rep.hessian_det_fd - rep.hessian_det).abs() < 1e-4 * lam * lam);
        assert!(spec.hessian_det() < 0.0);
    }

    #[test]
    fn degenerate_second_derivative_fails_verification() {
        let d = domain();
        let opts = PhaseOptions { lambda: 0.0, ..PhaseOptions::default() };
        let spec = design_phase(C64::new(0.0, 0.3), &d, 0.0, &opts).unwrap();
        let rep = verify_phase(&spec, &d);
        assert!(!rep.passed);
        assert!(rep.failures.iter().any(|f| f.contains("∂²Φ")));
    }

    #[test]
    fn full_gamma0_star_has_empty_tangential_set() {
        let spec = build_phase(C64::new(0.0, 0.2), &domain(), 1e-3).unwrap();
        let (zeros, run) = tangential_zero_scan(&spec, None, 4096);
        assert!(zeros.is_empty() && run == 0);
    }

    #[test]
    fn target_near_boundary_is_rejected() {
        let e = build_phase(C64::new(0.0, 0.9995), &domain(), 1e-3).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
    }

    #[test]
    fn prescribed_psi_value_is_met() {
        let opts = PhaseOptions { psi_target: Some(0.1), ..PhaseOptions::default() };
        let spec = build_phase_with(C64::new(0.0, 0.4), &domain(), 1e-3, &opts).unwrap();
        assert!((spec.psi_at_target() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn text_round_trip_preserves_phase() {
        let spec = build_phase(C64::new(-0.2, 0.3), &domain(), 1e-3).unwrap();
        let back = PhaseSpec::from_text(&spec.to_text()).unwrap();
        let z = C64::new(0.3, -0.1);
        assert!((back.eval(z) - spec.eval(z)).norm() < 1e-12);
        assert_eq!(back.critical_points().len(), 1);
    }

    #[test]
    fn constant_amplitude_for_single_critical_point() {
        let spec = build_phase(C64::new(0.0, 0.5), &domain(), 1e-3).unwrap();
        let a = build_amplitude(&spec).unwrap();
        assert!(a.is_constant());
        assert!((a.eval(C64::new(0.2, 0.2)) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn small_psi_forces_second_critical_point() {
        let opts = PhaseOptions { psi_target: Some(0.02), ..PhaseOptions::default() };
        let spec = design_phase(C64::new(0.0, 0.4), &domain(), 0.0, &opts).unwrap();
        assert_eq!(spec.critical_points().len(), 2);
        let a = build_amplitude(&spec).unwrap();
        assert!(a.eval(spec.critical_points()[1]).norm() < 1e-8);
    }

    #[test]
    fn killing_amplitude_vanishes_and_stays_real() {
        let d = domain();
        let spec = build_phase(C64::new(0.0, 0.5), &d, 1e-3).unwrap();
        let extra = C64::new(0.3, -0.2);
        let a = Amplitude::killing(&spec, &[extra]).unwrap();
        assert!(a.eval(extra).norm() < 1e-10);
        assert!(a.eval(spec.x_tilde()).norm() > 0.5);
        let star = d.gamma0_star();
        let worst = (0..500)
            .map(|k| a.eval(C64::from_polar(1.0, star.start() + star.len() * (k as f64 + 0.5) / 500.0)).im.abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn other_gamma_tilde_positions() {
        let d = make_disk_domain((1.0, 3.5), 0.1, 0.25).unwrap();
        let spec = build_phase(C64::new(0.0, 0.3), &d, 1e-3).unwrap();
        assert!(verify_phase(&spec, &d).passed);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]
        #[test]
        fn placement_is_exact(r in 0.0f64..0.6, t in 0.0f64..TAU) {
            let target = C64::from_polar(r, t);
            let d = domain();
            let spec = build_phase(target, &d, 1e-3).unwrap();
            prop_assert!((spec.x_tilde() - target).norm() <= 1e-8);
            let tight = build_phase(target, &d, 1e-6).unwrap();
            prop_assert!((tight.x_tilde() - target).norm() <= (spec.x_tilde() - target).norm() + 1e-12);
        }
    }
}
