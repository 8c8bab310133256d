//! Wirtinger derivatives, the area Cauchy transforms `∂_z̄⁻¹`, `∂_z⁻¹` and the
//! oscillatory operators `R_τ`, `R̃_τ` on the polar grid.
//!
//! Two routes evaluate `∂_z̄⁻¹g(z) = −(1/π)∫_Ω g(ζ)/(ζ − z) dA(ζ)`:
//!
//! * on the grid itself, angular Fourier modes decouple the kernel; mode `m` of
//!   the output is a one-dimensional radial integral of mode `m + 1` of `g`,
//!   evaluated by panel product integration with cumulative recursions;
//! * at arbitrary targets, a smooth cutoff splits the integral into a regular
//!   part on the grid and a local polar patch centred at the target, where the
//!   Jacobian cancels the `1/|ζ − z|` singularity.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use crate::domain::grid::{INTERP_WIDTH, PANEL_GAUSS};
use crate::quadrature::{gauss_legendre_on, lagrange_weights};
use crate::series::{fft_forward, fft_inverse};
use crate::{Error, PolarGrid, Result, C64, I};

/// Samples of a complex function on a [`PolarGrid`].
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Arc<PolarGrid>,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn new(grid: Arc<PolarGrid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!("{} samples for a grid of {} points", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid function"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Arc<PolarGrid>, f: impl Fn(C64) -> C64) -> Self {
        let values = grid.points().iter().map(|z| f(*z)).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        Self { grid: grid.clone(), values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    /// Pointwise combination with another function on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert!(Arc::ptr_eq(&self.grid, &other.grid) || self.grid.len() == other.grid.len());
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn integral(&self) -> C64 {
        self.grid.integrate(&self.values)
    }

    pub fn l2_norm(&self) -> f64 {
        self.grid.l2_norm(&self.values)
    }

    /// Value at an arbitrary point of the closed disk by local tensor Lagrange
    /// interpolation (6 radial × 6 angular nodes).
    pub fn interpolate(&self, z: C64) -> C64 {
        let g = &self.grid;
        let (nr, nt) = (g.n_r(), g.n_theta());
        let r = z.norm();
        let t = z.arg().rem_euclid(TAU);
        let radii = g.radii();
        let j = radii.partition_point(|x| *x < r);
        let rs = j.saturating_sub(INTERP_WIDTH / 2).min(nr - INTERP_WIDTH);
        let wr = lagrange_weights(&radii[rs..rs + INTERP_WIDTH], r);
        let dt = TAU / nt as f64;
        let k0 = (t / dt).floor() as isize - (INTERP_WIDTH as isize / 2 - 1);
        let tnodes: Vec<f64> = (0..INTERP_WIDTH).map(|s| (k0 + s as isize) as f64 * dt).collect();
        let wt = lagrange_weights(&tnodes, t);
        let mut acc = C64::new(0.0, 0.0);
        for (a, wa) in wr.iter().enumerate() {
            let row = (rs + a) * nt;
            for (b, wb) in wt.iter().enumerate() {
                let k = (k0 + b as isize).rem_euclid(nt as isize) as usize;
                acc += self.values[row + k] * (wa * wb);
            }
        }
        acc
    }
}

/// Fourier series in angle on a fixed circle `|z| = r`, with its radial
/// derivative: `f(r, θ) = Σ_m c_m e^{imθ}`, `∂_r f = Σ_m d_m e^{imθ}`.
#[derive(Clone, Debug)]
pub struct RingExpansion {
    pub radius: f64,
    /// Coefficients in FFT bin order (length `n_theta`).
    pub value: Vec<C64>,
    pub radial: Vec<C64>,
}

impl RingExpansion {
    fn mode(bin: usize, n: usize) -> i64 {
        if bin <= n / 2 {
            bin as i64
        } else {
            bin as i64 - n as i64
        }
    }

    pub fn eval(&self, theta: f64) -> (C64, C64) {
        let n = self.value.len();
        let mut v = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for b in 0..n {
            let e = C64::from_polar(1.0, Self::mode(b, n) as f64 * theta);
            v += self.value[b] * e;
            d += self.radial[b] * e;
        }
        (v, d)
    }

    /// Values and radial derivatives at `2πk/m`, `m ≥ n_theta`.
    pub fn sample_uniform(&self, m: usize) -> (Vec<C64>, Vec<C64>) {
        let n = self.value.len();
        assert!(m >= n, "resampling needs at least as many points as modes");
        let mut v = vec![C64::new(0.0, 0.0); m];
        let mut d = vec![C64::new(0.0, 0.0); m];
        for b in 0..n {
            let idx = Self::mode(b, n).rem_euclid(m as i64) as usize;
            v[idx] += self.value[b];
            d[idx] += self.radial[b];
        }
        fft_inverse(&mut v);
        fft_inverse(&mut d);
        (v, d)
    }
}

/// Output of the grid route: values, radial derivatives and the expansion on
/// the boundary circle.
#[derive(Clone, Debug)]
pub struct CauchyOutput {
    pub values: GridFunction,
    pub radial: GridFunction,
    pub boundary: RingExpansion,
}

/// `∂_z̄⁻¹g` at the grid nodes.
pub fn dbar_inverse(g: &GridFunction) -> GridFunction {
    dbar_inverse_full(g).values
}

/// `∂_z⁻¹g = conj ∘ ∂_z̄⁻¹ ∘ conj` at the grid nodes.
pub fn dz_inverse(g: &GridFunction) -> GridFunction {
    dbar_inverse(&g.conj()).conj()
}

/// `∂_z⁻¹g` with radial derivatives and boundary expansion.
pub fn dz_inverse_full(g: &GridFunction) -> CauchyOutput {
    let out = dbar_inverse_full(&g.conj());
    let conj_ring = |e: &RingExpansion| {
        // conj(Σ c_m e^{imθ}) = Σ conj(c_{−m}) e^{imθ}
        let n = e.value.len();
        let flip = |v: &[C64]| (0..n).map(|b| v[(n - b) % n].conj()).collect::<Vec<_>>();
        RingExpansion { radius: e.radius, value: flip(&e.value), radial: flip(&e.radial) }
    };
    CauchyOutput { values: out.values.conj(), radial: out.radial.conj(), boundary: conj_ring(&out.boundary) }
}

/// Fast grid route for `∂_z̄⁻¹g`.
///
/// With `g = Σ g_m(ρ)e^{imθ}` the output modes are
/// `c_m(r) = −2∫_r^1 g_{m+1}(ρ)(r/ρ)^m dρ` for `m ≥ 0` and
/// `c_m(r) = 2∫_0^r g_{m+1}(ρ)(ρ/r)^{−m} dρ` for `m < 0`, and both satisfy
/// `c_m' = (m/r)c_m + 2g_{m+1}`.
pub fn dbar_inverse_full(g: &GridFunction) -> CauchyOutput {
    let grid = g.grid().clone();
    let (nr, nt) = (grid.n_r(), grid.n_theta());
    let plan = &grid.plan;
    let radii = grid.radii();
    // Angular coefficients per ring: modes[j][bin].
    let mut modes = vec![vec![C64::new(0.0, 0.0); nt]; nr];
    for (j, row) in modes.iter_mut().enumerate() {
        row.copy_from_slice(&g.values()[j * nt..(j + 1) * nt]);
        fft_forward(row);
        let s = 1.0 / nt as f64;
        row.iter_mut().for_each(|v| *v *= s);
    }
    let half = nt as i64 / 2;
    let bin = |m: i64| m.rem_euclid(nt as i64) as usize;
    let mut out = vec![vec![C64::new(0.0, 0.0); nt]; nr];
    let mut out_dr = vec![vec![C64::new(0.0, 0.0); nt]; nr];
    let mut edge_v = vec![C64::new(0.0, 0.0); nt];
    let mut edge_d = vec![C64::new(0.0, 0.0); nt];
    let npanel = nr + 1;
    let mut h = vec![C64::new(0.0, 0.0); nr];
    let mut hg = vec![[C64::new(0.0, 0.0); PANEL_GAUSS]; npanel];
    let mut acc = vec![C64::new(0.0, 0.0); nr + 2];
    for m in (-half + 1)..=(half - 2) {
        let src = bin(m + 1);
        for j in 0..nr {
            h[j] = modes[j][src];
        }
        if h.iter().all(|v| v.norm_sqr() == 0.0) {
            continue;
        }
        for p in 0..npanel {
            let s = plan.interp_start[p];
            for gq in 0..PANEL_GAUSS {
                let w = &plan.interp[p][gq];
                let mut v = C64::new(0.0, 0.0);
                for t in 0..INTERP_WIDTH {
                    v += h[s + t] * w[t];
                }
                hg[p][gq] = v;
            }
        }
        let b = &plan.breaks;
        if m >= 0 {
            let mi = m as i32;
            acc[nr + 1] = C64::new(0.0, 0.0);
            for p in (1..=nr).rev() {
                let mut panel = C64::new(0.0, 0.0);
                for gq in 0..PANEL_GAUSS {
                    let k = (b[p] / plan.gauss[p][gq]).powi(mi);
                    panel += hg[p][gq] * (plan.gauss_w[p][gq] * k);
                }
                acc[p] = acc[p + 1] * (b[p] / b[p + 1]).powi(mi) + panel;
            }
            for p in 1..=nr + 1 {
                acc[p] *= -2.0;
            }
        } else {
            let mu = (-m) as i32;
            acc[0] = C64::new(0.0, 0.0);
            for p in 0..=nr {
                let mut panel = C64::new(0.0, 0.0);
                for gq in 0..PANEL_GAUSS {
                    let k = (plan.gauss[p][gq] / b[p + 1]).powi(mu);
                    panel += hg[p][gq] * (plan.gauss_w[p][gq] * k);
                }
                acc[p + 1] = acc[p] * (b[p] / b[p + 1]).powi(mu) + panel;
            }
            for p in 1..=nr + 1 {
                acc[p] *= 2.0;
            }
        }
        let ob = bin(m);
        let mf = m as f64;
        for j in 0..nr {
            let c = acc[j + 1];
            out[j][ob] = c;
            out_dr[j][ob] = c * (mf / radii[j]) + 2.0 * h[j];
        }
        let mut h1 = C64::new(0.0, 0.0);
        for t in 0..INTERP_WIDTH {
            h1 += h[plan.edge_start + t] * plan.edge[t];
        }
        let c1 = acc[nr + 1];
        edge_v[ob] = c1;
        edge_d[ob] = c1 * mf + 2.0 * h1;
    }
    let mut values = Vec::with_capacity(nr * nt);
    let mut radial = Vec::with_capacity(nr * nt);
    for j in 0..nr {
        fft_inverse(&mut out[j]);
        fft_inverse(&mut out_dr[j]);
        values.extend_from_slice(&out[j]);
        radial.extend_from_slice(&out_dr[j]);
    }
    CauchyOutput {
        values: GridFunction { grid: grid.clone(), values },
        radial: GridFunction { grid, values: radial },
        boundary: RingExpansion { radius: 1.0, value: edge_v, radial: edge_d },
    }
}

/// Patch radius in units of the grid spacing for the direct route.
const PATCH_FACTOR: f64 = 16.0;
const PATCH_ANGLES: usize = 20;
const PATCH_RADIAL: usize = 32;

/// Smooth cutoff: `1` on `[0, 1/4]`, `0` beyond `1`, C^∞ in between.
fn cutoff(s: f64) -> f64 {
    if s <= 0.25 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let x = (s - 0.25) / 0.75;
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    b / (a + b)
}

/// Direct route for `∂_z̄⁻¹g` at arbitrary targets in the closed disk; `g` is
/// interpolated inside the polar patch.
pub fn dbar_inverse_at(g: &GridFunction, targets: &[C64]) -> Result<Vec<C64>> {
    if g.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dbar_inverse_at input"));
    }
    targets
        .iter()
        .map(|z| direct_transform(g.grid(), g.values(), &|w| g.interpolate(w), *z))
        .collect()
}

/// `∂_z⁻¹g` at arbitrary targets: `conj ∘ ∂_z̄⁻¹ ∘ conj`.
pub fn dz_inverse_at(g: &GridFunction, targets: &[C64]) -> Result<Vec<C64>> {
    Ok(dbar_inverse_at(&g.conj(), targets)?.into_iter().map(|v| v.conj()).collect())
}

/// Direct route for an integrand known in closed form.
pub fn dbar_inverse_fn(grid: &Arc<PolarGrid>, f: &dyn Fn(C64) -> C64, targets: &[C64]) -> Result<Vec<C64>> {
    let samples: Vec<C64> = grid.points().iter().map(|z| f(*z)).collect();
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dbar_inverse_fn integrand"));
    }
    targets.iter().map(|z| direct_transform(grid, &samples, f, *z)).collect()
}

fn direct_transform(grid: &PolarGrid, samples: &[C64], f: &dyn Fn(C64) -> C64, z: C64) -> Result<C64> {
    if !z.is_finite() || z.norm() > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("target {z} outside the closed disk")));
    }
    let rho0 = PATCH_FACTOR * grid.spacing();
    let mut regular = C64::new(0.0, 0.0);
    for ((p, w), v) in grid.points().iter().zip(grid.weights()).zip(samples) {
        let d = p - z;
        let dist = d.norm();
        let chi = if dist < rho0 { cutoff(dist / rho0) } else { 0.0 };
        if chi < 1.0 {
            regular += v * ((1.0 - chi) * w) / d;
        }
    }
    // Angular panels break where the reach switches between the patch radius
    // and the distance to the circle, and at the tangent directions.
    let d = (1.0 - z.norm_sqr()).max(0.0);
    let (rz, tz) = (z.norm(), z.arg());
    let mut cuts = vec![0.5 * PI, 1.5 * PI];
    if rz > 0.0 {
        let c = (d - rho0 * rho0) / (2.0 * rho0 * rz);
        if c.abs() <= 1.0 {
            let a = c.acos();
            cuts.extend([a, TAU - a]);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut patch = C64::new(0.0, 0.0);
    for (i, lo) in cuts.iter().enumerate() {
        let hi = if i + 1 < cuts.len() { cuts[i + 1] } else { cuts[0] + TAU };
        if hi - lo < 1e-14 {
            continue;
        }
        let (alphas, was) = gauss_legendre_on(PATCH_ANGLES, *lo, hi);
        for (phi, wa) in alphas.iter().zip(&was) {
            let e = C64::from_polar(1.0, tz + phi);
            let b = rz * phi.cos();
            let exit = -b + (b * b + d).sqrt();
            let reach = rho0.min(exit);
            if reach <= 0.0 {
                continue;
            }
            let (rs, ws) = gauss_legendre_on(PATCH_RADIAL, 0.0, reach);
            let mut line = C64::new(0.0, 0.0);
            for (r, w) in rs.iter().zip(&ws) {
                line += f(z + e * *r) * (w * cutoff(r / rho0));
            }
            patch += line * e.conj() * *wa;
        }
    }
    Ok(-(regular + patch) / PI)
}

/// `(∂_z g, ∂_z̄ g)`: spectral in angle, fourth-order differences in radius.
pub fn wirtinger(g: &GridFunction) -> (GridFunction, GridFunction) {
    let grid = g.grid().clone();
    let (nr, nt) = (grid.n_r(), grid.n_theta());
    let plan = &grid.plan;
    let radii = grid.radii();
    let mut dtheta = vec![C64::new(0.0, 0.0); nr * nt];
    let mut row = vec![C64::new(0.0, 0.0); nt];
    for j in 0..nr {
        row.copy_from_slice(&g.values()[j * nt..(j + 1) * nt]);
        fft_forward(&mut row);
        for (b, v) in row.iter_mut().enumerate() {
            let m = if b < nt / 2 {
                b as f64
            } else if b == nt / 2 {
                0.0
            } else {
                b as f64 - nt as f64
            };
            *v *= I * m / nt as f64;
        }
        fft_inverse(&mut row);
        dtheta[j * nt..(j + 1) * nt].copy_from_slice(&row);
    }
    let mut dz = Vec::with_capacity(nr * nt);
    let mut dzbar = Vec::with_capacity(nr * nt);
    for j in 0..nr {
        let s = plan.diff_start[j];
        let w = &plan.diff[j];
        let r = radii[j];
        for (k, t) in grid.theta().iter().enumerate() {
            let mut dr = C64::new(0.0, 0.0);
            for a in 0..w.len() {
                dr += g.values()[(s + a) * nt + k] * w[a];
            }
            let dt = dtheta[j * nt + k] / r;
            let e = C64::from_polar(0.5, *t);
            dz.push(e.conj() * (dr - I * dt));
            dzbar.push(e * (dr + I * dt));
        }
    }
    (GridFunction { grid: grid.clone(), values: dz }, GridFunction { grid, values: dzbar })
}

/// Unit-modulus weight `e^{τ(Φ−Φ̄)} = e^{2iτψ}` on a grid.
#[derive(Clone, Debug)]
pub struct OscillatoryWeight {
    tau: f64,
    /// `e^{2iτψ}` at the grid nodes.
    factor: Vec<C64>,
}

impl OscillatoryWeight {
    /// Weight from samples of `ψ = Im Φ` at the grid nodes.
    pub fn from_psi(tau: f64, psi: &[f64]) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::NonFinite("τ"));
        }
        if psi.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phase samples"));
        }
        let factor: Vec<C64> = psi.iter().map(|p| C64::from_polar(1.0, 2.0 * tau * p)).collect();
        debug_assert!(factor.iter().all(|f| (f.norm() - 1.0).abs() < 1e-12));
        Ok(Self { tau, factor })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn factor(&self) -> &[C64] {
        &self.factor
    }
}

/// `R_τ g = ½e^{2iτψ}∂_z̄⁻¹(g e^{−2iτψ})`.
pub fn r_tau(g: &GridFunction, w: &OscillatoryWeight) -> Result<GridFunction> {
    check_weight(g, w)?;
    let inner = GridFunction {
        grid: g.grid().clone(),
        values: g.values().iter().zip(w.factor()).map(|(v, f)| v * f.conj()).collect(),
    };
    let t = dbar_inverse(&inner);
    Ok(t.zip_with(&GridFunction { grid: g.grid().clone(), values: w.factor().to_vec() }, |a, f| 0.5 * a * f))
}

/// `R̃_τ g = ½e^{−2iτψ}∂_z⁻¹(g e^{2iτψ})`.
pub fn r_tilde_tau(g: &GridFunction, w: &OscillatoryWeight) -> Result<GridFunction> {
    check_weight(g, w)?;
    let inner = GridFunction {
        grid: g.grid().clone(),
        values: g.values().iter().zip(w.factor()).map(|(v, f)| v * f).collect(),
    };
    let t = dz_inverse(&inner);
    Ok(t.zip_with(&GridFunction { grid: g.grid().clone(), values: w.factor().to_vec() }, |a, f| 0.5 * a * f.conj()))
}

fn check_weight(g: &GridFunction, w: &OscillatoryWeight) -> Result<()> {
    if w.factor.len() != g.values().len() {
        return Err(Error::Mismatch("oscillatory weight sampled on a different grid".into()));
    }
    Ok(())
}
