//! `pdcgo` command-line pipelines.
//!
//! Settings are layered: built-in defaults, then `--config` file, then flags.
//! Each subcommand renders its artifacts in memory and writes them to the
//! output directory only when the whole pipeline succeeded, together with the
//! effective configuration (`<command>.config`).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_config, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "pdcgo", version, about = "Partial-data CGO experiments on the unit disk")]
struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for pipelines that split independent work.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Target mesh size.
    #[arg(long, global = true)]
    mesh_h: Option<f64>,
    /// Accessible arc `(a, b)` in radians.
    #[arg(long, global = true, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    gamma_tilde: Option<Vec<f64>>,
    /// Growth of the inaccessible arc on each side.
    #[arg(long, global = true)]
    margin: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct PhaseArgs {
    /// Requested critical point.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
    target: Option<Vec<f64>>,
    #[arg(long)]
    tol: Option<f64>,
    /// `|∂²Φ|` at the critical point.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct ScheduleArgs {
    #[arg(long)]
    tau_min: Option<f64>,
    #[arg(long)]
    tau_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct RecoveryArgs {
    #[arg(long)]
    q1: Option<String>,
    #[arg(long)]
    q2: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    grid_n: Option<usize>,
    /// Minimum `|cos(2τψ)|` for a schedule point.
    #[arg(long)]
    threshold: Option<f64>,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Accuracy of the area Cauchy transform on smooth densities.
    CauchyBench {
        /// Comma-separated radial grid sizes.
        #[arg(long)]
        n: Option<String>,
    },
    /// Build and verify a phase.
    Phase(PhaseArgs),
    /// CGO residuals over a τ schedule.
    Cgo {
        /// Schedule as `a,b,c` or `start:stop:step`.
        #[arg(long)]
        tau_list: Option<String>,
        /// Potential profile, e.g. `gaussian:1,0.3,0,0.3`.
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        grid_n: Option<usize>,
        #[command(flatten)]
        phase: PhaseArgs,
    },
    /// Neumann-to-Dirichlet matrix in a Fourier basis on the accessible arc.
    Ndmap {
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Recover `q₁ − q₂` at one point.
    Recover {
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        probe: Option<Vec<f64>>,
        #[command(flatten)]
        rec: RecoveryArgs,
    },
    /// Recover `q₁ − q₂` on a grid of probes around `--probe`.
    RecoverGrid {
        #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_negative_numbers = true)]
        probe: Option<Vec<f64>>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        /// Half-width of the square probe grid.
        #[arg(long)]
        extent: Option<f64>,
        #[command(flatten)]
        rec: RecoveryArgs,
    },
    /// Empirical Carleman constants over a random test family.
    Carleman {
        #[arg(long)]
        mode: Option<String>,
        /// Schedule as `a,b,c` or `start:stop:step`.
        #[arg(long)]
        tau: Option<String>,
        #[arg(long)]
        family: Option<usize>,
        /// Gauge weight `N` for the `prop21` mode.
        #[arg(long = "gauge-n")]
        gauge_n: Option<f64>,
        #[arg(long)]
        q: Option<String>,
        /// Radial nodes of the quadrature grid.
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        phase: PhaseArgs,
    },
}

type Overrides = Vec<(&'static str, String, String)>;

fn push<T: ToString>(o: &mut Overrides, key: &'static str, flag: &str, v: &Option<T>) {
    if let Some(v) = v {
        o.push((key, v.to_string(), format!("--{flag}")));
    }
}

fn push_pair(o: &mut Overrides, key: &'static str, flag: &str, v: &Option<Vec<f64>>) {
    if let Some(v) = v {
        o.push((key, format!("{} {}", v[0], v[1]), format!("--{flag}")));
    }
}

fn push_phase(o: &mut Overrides, p: &PhaseArgs) {
    push_pair(o, "probe", "target", &p.target);
    push(o, "tol", "tol", &p.tol);
    push(o, "lambda", "lambda", &p.lambda);
}

fn push_recovery(o: &mut Overrides, r: &RecoveryArgs, base: &ExperimentConfig) {
    push(o, "q1", "q1", &r.q1);
    push(o, "q2", "q2", &r.q2);
    push(o, "lambda", "lambda", &r.lambda);
    push(o, "grid_n", "grid-n", &r.grid_n);
    push(o, "threshold", "threshold", &r.threshold);
    let s = &r.schedule;
    if s.tau_min.is_some() || s.tau_max.is_some() || s.steps.is_some() {
        let lo = s.tau_min.unwrap_or(base.tau[0]);
        let hi = s.tau_max.unwrap_or(*base.tau.last().expect("validated schedule"));
        let steps = s.steps.unwrap_or(base.tau.len());
        let taus: Vec<String> = if steps <= 1 {
            vec![lo.to_string()]
        } else {
            (0..steps).map(|k| (lo + (hi - lo) * k as f64 / (steps - 1) as f64).to_string()).collect()
        };
        o.push(("tau", taus.join(","), "--tau-min/--tau-max/--steps".into()));
    }
}

fn overrides(cli: &Cli, base: &ExperimentConfig) -> Overrides {
    let mut o = Overrides::new();
    if let Some(p) = &cli.out {
        o.push(("out", p.display().to_string(), "--out".into()));
    }
    push(&mut o, "seed", "seed", &cli.seed);
    push(&mut o, "threads", "threads", &cli.threads);
    push(&mut o, "mesh_h", "mesh-h", &cli.mesh_h);
    push_pair(&mut o, "gamma_tilde", "gamma-tilde", &cli.gamma_tilde);
    push(&mut o, "margin", "margin", &cli.margin);
    match &cli.command {
        Command::CauchyBench { n } => push(&mut o, "cauchy_n", "n", n),
        Command::Phase(p) => push_phase(&mut o, p),
        Command::Cgo { tau_list, q, grid_n, phase } => {
            push(&mut o, "tau", "tau-list", tau_list);
            push(&mut o, "q1", "q", q);
            push(&mut o, "grid_n", "grid-n", grid_n);
            push_phase(&mut o, phase);
        }
        Command::Ndmap { q, modes } => {
            push(&mut o, "q1", "q", q);
            push(&mut o, "modes", "modes", modes);
        }
        Command::Recover { probe, rec } => {
            push_pair(&mut o, "probe", "probe", probe);
            push_recovery(&mut o, rec, base);
        }
        Command::RecoverGrid { probe, nx, ny, extent, rec } => {
            push_pair(&mut o, "probe", "probe", probe);
            push(&mut o, "nx", "nx", nx);
            push(&mut o, "ny", "ny", ny);
            push(&mut o, "extent", "extent", extent);
            push_recovery(&mut o, rec, base);
        }
        Command::Carleman { mode, tau, family, gauge_n, q, grid, phase } => {
            push(&mut o, "mode", "mode", mode);
            push(&mut o, "tau", "tau", tau);
            push(&mut o, "family", "family", family);
            push(&mut o, "gauge_n", "gauge-n", gauge_n);
            push(&mut o, "q1", "q", q);
            push(&mut o, "carleman_grid", "grid", grid);
            push_phase(&mut o, phase);
        }
    }
    o
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| anyhow::Error::new(e).context(format!("in {}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    let o = overrides(cli, &cfg);
    cfg.apply(&o)?;
    Ok(cfg)
}

fn fail(kind: &str, err: &anyhow::Error) {
    eprintln!("error: {err:#}");
    let msg = format!("{err:#}").replace('"', "'");
    eprintln!("status=error kind={kind} message=\"{msg}\"");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            fail("config", &e);
            return ExitCode::from(2);
        }
    };
    let name = commands::name(&cli.command);
    let mut run = match commands::run(&cli.command, &cfg) {
        Ok(r) => r,
        Err(e) => {
            fail("pipeline", &e);
            return ExitCode::from(1);
        }
    };
    run.artifacts.push(output::Artifact::new(format!("{name}.config"), cfg.to_text()));
    match output::write_all(&cfg.out, &run.artifacts) {
        Ok(paths) => {
            print!("{}", run.summary);
            for p in paths {
                println!("wrote {}", p.display());
            }
            if run.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("status=fail command={name}");
                ExitCode::from(3)
            }
        }
        Err(e) => {
            fail("io", &e);
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use config::ConfigError;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn schedule_flags_expand_to_a_list() {
        let cli = Cli::parse_from(["pdcgo", "recover", "--tau-min", "8", "--tau-max", "10", "--steps", "3"]);
        let cfg = load_config(&cli).unwrap();
        assert_eq!(cfg.tau, vec![8.0, 9.0, 10.0]);
    }

    #[test]
    fn flags_override_defaults() {
        let cli = Cli::parse_from(["pdcgo", "--seed", "7", "--gamma-tilde", "-1", "2", "carleman", "--mode", "prop21"]);
        let cfg = load_config(&cli).unwrap();
        assert_eq!((cfg.seed, cfg.gamma_tilde, cfg.mode), (7, (-1.0, 2.0), config::SweepMode::Gauged));
        let bad = Cli::parse_from(["pdcgo", "cgo", "--tau-list", "50,40"]);
        assert!(format!("{:#}", load_config(&bad).unwrap_err()).contains("schedule not increasing"));
    }

    #[test]
    fn config_errors_keep_their_type() {
        let e: anyhow::Error = ConfigError::Line { line: 4, message: "x".into() }.into();
        assert!(e.downcast_ref::<ConfigError>().is_some());
    }
}
