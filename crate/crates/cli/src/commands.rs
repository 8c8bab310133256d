//! Subcommand pipelines. Each returns its artifacts and a console summary.

use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{bail, Context, Result};

use pdcgo::calculus::{dbar_inverse, wirtinger};
use pdcgo::carleman::{carleman_sweep, random_family, trend_slope, CarlemanMode, CarlemanSetup};
use pdcgo::cgo::assemble_cgo;
use pdcgo::domain::make_disk_domain;
use pdcgo::fem::assemble_nd_map;
use pdcgo::phase::{build_amplitude, build_phase_with, verify_phase};
use pdcgo::recovery::{recover_grid, recover_point, ProbeResult, RecoveryInput, RecoveryOptions};
use pdcgo::{BoundaryBasis, Domain, GridFunction, PhaseOptions, PhaseSpec, PolarGrid, Potential, C64};

use crate::config::{ExperimentConfig, SweepMode};
use crate::output::{cell, heat_map_svg, line_plot_svg, Artifact, Csv};
use crate::Command;

pub struct Run {
    pub artifacts: Vec<Artifact>,
    pub summary: String,
    /// `false` when the pipeline completed but its check did not pass.
    pub ok: bool,
}

pub fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::CauchyBench { .. } => "cauchy-bench",
        Command::Phase(_) => "phase",
        Command::Cgo { .. } => "cgo",
        Command::Ndmap { .. } => "ndmap",
        Command::Recover { .. } => "recover",
        Command::RecoverGrid { .. } => "recover-grid",
        Command::Carleman { .. } => "carleman",
    }
}

pub fn run(cmd: &Command, cfg: &ExperimentConfig) -> Result<Run> {
    let name = name(cmd);
    match cmd {
        Command::CauchyBench { .. } => cauchy_bench(cfg, name),
        Command::Phase(_) => phase(cfg, name),
        Command::Cgo { .. } => cgo(cfg, name),
        Command::Ndmap { .. } => ndmap(cfg, name),
        Command::Recover { .. } => recover(cfg, name),
        Command::RecoverGrid { .. } => recover_on_grid(cfg, name),
        Command::Carleman { .. } => carleman(cfg, name),
    }
}

fn metadata(csv: &mut Csv, cfg: &ExperimentConfig, command: &str) {
    csv.meta("pdcgo", env!("CARGO_PKG_VERSION"))
        .meta("command", command)
        .meta("seed", cfg.seed)
        .meta("mesh_h", cfg.mesh_h)
        .meta("gamma_tilde", format!("{} {}", cfg.gamma_tilde.0, cfg.gamma_tilde.1))
        .meta("tau", format!("{}..{} ({} values)", cfg.tau[0], cfg.tau[cfg.tau.len() - 1], cfg.tau.len()));
}

fn text_header(cfg: &ExperimentConfig, command: &str) -> String {
    let mut csv = Csv::new(&[]);
    metadata(&mut csv, cfg, command);
    let rendered = csv.render();
    // Drop the empty header row.
    rendered.trim_end_matches('\n').trim_end_matches('\n').to_string() + "\n"
}

fn domain(cfg: &ExperimentConfig) -> Result<Domain> {
    make_disk_domain(cfg.gamma_tilde, cfg.margin, cfg.mesh_h).context("building the domain")
}

fn build_phase(cfg: &ExperimentConfig, domain: &Domain) -> Result<PhaseSpec> {
    let opts = PhaseOptions { lambda: cfg.lambda, ..Default::default() };
    build_phase_with(C64::new(cfg.probe.0, cfg.probe.1), domain, cfg.tol, &opts).context("building the phase")
}

type Density = fn(C64) -> C64;

pub const CAUCHY_CASES: [(&str, Density); 5] = [
    ("gaussian", |z| (-(z - C64::new(0.2, 0.1)).norm_sqr() / 0.08).exp() * C64::new(1.0, 0.5)),
    ("conj_square", |z| z.conj() * z.conj() + z),
    ("cos_exp", |z| C64::new(z.re.cos() * z.im.exp(), 0.0)),
    ("cubic", |z| z * z.norm_sqr() - C64::new(0.0, 2.0)),
    ("trig", |z| C64::new((3.0 * z.re).sin(), (2.0 * z.im).cos())),
];

fn cauchy_bench(cfg: &ExperimentConfig, command: &str) -> Result<Run> {
    let mut csv = Csv::new(&["n", "test_case", "rel_l2_error"]);
    metadata(&mut csv, cfg, command);
    let mut summary = String::new();
    for &n in &cfg.cauchy_n {
        let grid = Arc::new(PolarGrid::new(n)?);
        for (label, f) in CAUCHY_CASES {
            let g = GridFunction::from_fn(&grid, f);
            let (_, back) = wirtinger(&dbar_inverse(&g));
            let diff = back.zip_with(&g, |a, b| a - b);
            let err = diff.l2_norm() / g.l2_norm();
            csv.row(vec![n.to_string(), label.to_string(), cell(err)]);
            let _ = writeln!(summary, "n {n:4} {label:12} {err:.3e}");
        }
    }
    Ok(Run { artifacts: vec![Artifact::new("cauchy_bench.csv", csv.render())], summary, ok: true })
}

fn phase(cfg: &ExperimentConfig, command: &str) -> Result<Run> {
    let d = domain(cfg)?;
    let spec = build_phase(cfg, &d)?;
    let report = verify_phase(&spec, &d);
    let mut text = text_header(cfg, command);
    let x = spec.x_tilde();
    let _ = writeln!(text, "x̃ = ({:.6}, {:.6}), target ({}, {})", x.re, x.im, cfg.probe.0, cfg.probe.1);
    text.push_str(&report.to_text());
    Ok(Run {
        artifacts: vec![Artifact::new("phase_report.txt", text.clone()), Artifact::new("phase.txt", spec.to_text())],
        summary: text,
        ok: report.passed,
    })
}

fn cgo(cfg: &ExperimentConfig, command: &str) -> Result<Run> {
    let d = domain(cfg)?;
    let spec = build_phase(cfg, &d)?;
    let amp = build_amplitude(&spec)?;
    let grid = Arc::new(PolarGrid::new(cfg.grid_n)?);
    let q = GridFunction::from_fn(&grid, |z| C64::new(cfg.q1.eval(z), 0.0));
    let mut csv = Csv::new(&["tau", "g_tau_l2", "neumann_residual_gamma0", "ibp_identity_error"]);
    metadata(&mut csv, cfg, command);
    csv.meta("q", &cfg.q1).meta("lambda", cfg.lambda).meta("grid_n", cfg.grid_n);
    let mut summary = String::new();
    for &tau in &cfg.tau {
        let sol = assemble_cgo(&q, &spec, &amp, tau).with_context(|| format!("CGO at τ = {tau}"))?;
        let r = sol.residuals();
        let (ibp, _) = sol.ibp_identity_error(0.2)?;
        csv.row(vec![cell(tau), cell(r.g_l2), cell(r.neumann_gamma0), cell(ibp)]);
        let _ = writeln!(summary, "τ {tau:7.2}  g {:.3e}  Neumann {:.3e}  identity {ibp:.3e}", r.g_l2, r.neumann_gamma0);
    }
    Ok(Run { artifacts: vec![Artifact::new("cgo.csv", csv.render())], summary, ok: true })
}

fn ndmap(cfg: &ExperimentConfig, command: &str) -> Result<Run> {
    let d = domain(cfg)?;
    let q = Potential::from_profile(cfg.q1.clone(), d.mesh());
    let nd = assemble_nd_map(&q, &d, BoundaryBasis::fourier(*d.gamma_tilde(), cfg.modes));
    if let Some((_, msg)) = nd.failure() {
        bail!("ND map not available: {msg}");
    }
    let mut text = text_header(cfg, command);
    let _ = writeln!(text, "# q: {}\n# modes: {}", cfg.q1, cfg.modes);
    text.push_str(&nd.to_text());
    let summary = format!("ND map {0}×{0}, symmetry defect {1:.3e}\n", nd.dim(), nd.symmetry_defect());
    Ok(Run { artifacts: vec![Artifact::new("ndmap.txt", text)], summary, ok: true })
}

fn recovery_input(cfg: &ExperimentConfig) -> Result<(RecoveryInput, RecoveryOptions)> {
    let d = domain(cfg)?;
    let q1 = Potential::from_profile(cfg.q1.clone(), d.mesh());
    let q2 = Potential::from_profile(cfg.q2.clone(), d.mesh());
    let basis = BoundaryBasis::Nodal { arc: *d.gamma_tilde() };
    let nd1 = assemble_nd_map(&q1, &d, basis.clone());
    let nd2 = assemble_nd_map(&q2, &d, basis);
    for nd in [&nd1, &nd2] {
        if let Some((_, msg)) = nd.failure() {
            bail!("ND map not available: {msg}");
        }
    }
    let opts = RecoveryOptions {
        phase: PhaseOptions { lambda: cfg.lambda, ..Default::default() },
        placement_tol: cfg.tol,
        grid_n: cfg.grid_n,
        threshold: cfg.threshold,
        ..Default::default()
    };
    Ok((RecoveryInput { domain: d, nd1, nd2, q1, q2 }, opts))
}

fn recovery_csv(cfg: &ExperimentConfig, command: &str) -> Csv {
    let mut csv = Csv::new(&["x", "y", "estimate", "confidence", "n_tau_used"]);
    metadata(&mut csv, cfg, command);
    csv.meta("q1", &cfg.q1).meta("q2", &cfg.q2).meta("lambda", cfg.lambda).meta("threshold", cfg.threshold);
    csv
}

fn result_row(r: &ProbeResult) -> Vec<String> {
    let used = r.samples.iter().filter(|s| s.kept).count();
    vec![cell(r.probe.re), cell(r.probe.im), cell(r.estimate), cell(r.confidence), used.to_string()]
}

fn recover(cfg: &ExperimentConfig, command: &str) -> Result<Run> {
    let (input, opts) = recovery_input(cfg)?;
    let probe = C64::new(cfg.probe.0, cfg.probe.1);
    let r = recover_point(&input, probe, &cfg.tau, &opts).context("recovering at the probe")?;
    let mut csv = recovery_csv(cfg, command);
    csv.meta("status", &r.status);
    csv.row(result_row(&r));
    let mut samples = Csv::new(&["tau", "cos", "kept", "pairing", "known", "estimate"]);
    metadata(&mut samples, cfg, command);
    for s in &r.samples {
        samples.row(vec![cell(s.tau), cell(s.cos), s.kept.to_string(), cell(s.pairing), cell(s.known), cell(s.estimate)]);
    }
    let summary = format!(
        "probe ({}, {}): estimate {:.4}, truth {:.4}, confidence {:.3e}, {}\n",
        cfg.probe.0,
        cfg.probe.1,
        r.estimate,
        cfg.q1.eval(probe) - cfg.q2.eval(probe),
        r.confidence,
        r.status
    );
    Ok(Run {
        artifacts: vec![Artifact::new("recover.csv", csv.render()), Artifact::new("recover_samples.csv", samples.render())],
        summary,
        ok: true,
    })
}

/// Row-major probe grid around `center`, top row first.
pub fn probe_grid(center: C64, nx: usize, ny: usize, extent: f64) -> Vec<C64> {
    let coord = |k: usize, n: usize| if n == 1 { 0.0 } else { -extent + 2.0 * extent * k as f64 / (n - 1) as f64 };
    (0..ny).flat_map(|j| (0..nx).map(move |i| center + C64::new(coord(i, nx), coord(ny - 1 - j, ny)))).collect()
}

fn recover_on_grid(cfg: &ExperimentConfig, command: &str) -> Result<Run> {
    let (input, opts) = recovery_input(cfg)?;
    let probes = probe_grid(C64::new(cfg.probe.0, cfg.probe.1), cfg.nx, cfg.ny, cfg.extent);
    let chunk = probes.len().div_ceil(cfg.threads);
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> =
            probes.chunks(chunk).map(|c| s.spawn(|| recover_grid(&input, c, &cfg.tau, &opts))).collect();
        handles.into_iter().flat_map(|h| h.join().expect("recovery worker panicked")).collect()
    });
    let mut csv = recovery_csv(cfg, command);
    csv.meta("grid", format!("{}x{} of half-width {} around ({}, {})", cfg.nx, cfg.ny, cfg.extent, cfg.probe.0, cfg.probe.1));
    let mut values = Vec::with_capacity(results.len());
    let mut failed = 0;
    for r in &results {
        match r {
            Ok(p) => {
                if p.status != "ok" {
                    csv.meta("warning", format!("({}, {}) {}", p.probe.re, p.probe.im, p.status));
                }
                csv.row(result_row(p));
                values.push(Some(p.estimate));
            }
            Err((z, e)) => {
                failed += 1;
                csv.meta("skipped", format!("({}, {}) {}", z.re, z.im, e));
                csv.row(vec![cell(z.re), cell(z.im), cell(f64::NAN), cell(f64::NAN), "0".into()]);
                values.push(None);
            }
        }
    }
    let svg = heat_map_svg("recovered q1 - q2", cfg.nx, cfg.ny, &values);
    let summary = format!("{} probes, {} skipped\n", results.len(), failed);
    Ok(Run {
        artifacts: vec![Artifact::new("recover_grid.csv", csv.render()), Artifact::new("recover_grid.svg", svg)],
        summary,
        ok: true,
    })
}

fn carleman(cfg: &ExperimentConfig, command: &str) -> Result<Run> {
    let d = domain(cfg)?;
    let spec = build_phase(cfg, &d)?;
    let q = cfg.q1.clone();
    let grid = Arc::new(PolarGrid::new(cfg.carleman_grid)?);
    let setup = CarlemanSetup::new(&spec, |z| q.eval(z), grid, 4096);
    let family = random_family(cfg.family, cfg.seed, spec.x_tilde());
    let mode = match cfg.mode {
        SweepMode::Gauged => CarlemanMode::Gauged { n: cfg.gauge_n },
        SweepMode::AccessibleArc => CarlemanMode::AccessibleArc,
    };
    let rows = carleman_sweep(&setup, &family, &cfg.tau, mode);
    let slope = trend_slope(&rows);
    let violations: usize = rows.iter().map(|r| r.violations).sum();
    let pass = violations == 0 && slope <= 0.1;
    let mut csv = Csv::new(&["tau", "N", "max_ratio", "median_ratio", "violations"]);
    metadata(&mut csv, cfg, command);
    csv.meta("mode", cfg.mode.name())
        .meta("family", cfg.family)
        .meta("q", &cfg.q1)
        .meta("lambda", cfg.lambda)
        .meta("trend_slope", cell(slope))
        .meta("pass", pass);
    for r in &rows {
        let n = r.n.map(cell).unwrap_or_default();
        csv.row(vec![cell(r.tau), n, cell(r.max_ratio), cell(r.median_ratio), r.violations.to_string()]);
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.tau, r.max_ratio)).collect();
    let svg = line_plot_svg("max LHS/RHS against τ", &points);
    let summary = format!(
        "{} functions, {} τ values, violations {violations}, trend slope {slope:.3}: {}\n",
        family.len(),
        rows.len(),
        if pass { "pass" } else { "FAIL" }
    );
    Ok(Run {
        artifacts: vec![Artifact::new("carleman.csv", csv.render()), Artifact::new("carleman.svg", svg)],
        summary,
        ok: pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_grid_is_row_major_from_top() {
        let g = probe_grid(C64::new(0.0, 0.0), 3, 2, 0.5);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], C64::new(-0.5, 0.5));
        assert_eq!(g[5], C64::new(0.5, -0.5));
        assert_eq!(probe_grid(C64::new(0.1, 0.2), 1, 1, 0.3), vec![C64::new(0.1, 0.2)]);
    }
}
