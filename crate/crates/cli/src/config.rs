//! Line-based `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Every key has a default, unknown
//! keys are rejected, and validation errors point at the line that set the
//! offending key.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use pdcgo::fem::Profile;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{source_name}: {message}")]
    Override { source_name: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    Gauged,
    AccessibleArc,
}

impl SweepMode {
    pub fn name(self) -> &'static str {
        match self {
            SweepMode::Gauged => "prop21",
            SweepMode::AccessibleArc => "prop22",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mesh_h: f64,
    pub margin: f64,
    pub gamma_tilde: (f64, f64),
    pub q1: Profile,
    pub q2: Profile,
    pub tau: Vec<f64>,
    pub probe: (f64, f64),
    pub tol: f64,
    pub lambda: f64,
    pub grid_n: usize,
    pub threshold: f64,
    pub modes: usize,
    pub nx: usize,
    pub ny: usize,
    pub extent: f64,
    pub family: usize,
    pub mode: SweepMode,
    pub gauge_n: f64,
    pub carleman_grid: usize,
    pub cauchy_n: Vec<usize>,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mesh_h: 0.05,
            margin: 0.1,
            gamma_tilde: (0.0, PI),
            q1: Profile::Gaussian { amplitude: 1.0, width: 0.3, center: [0.0, 0.3] },
            q2: Profile::Zero,
            tau: (0..10).map(|k| 8.0 + 0.5 * k as f64).collect(),
            probe: (0.0, 0.3),
            tol: 1e-3,
            lambda: 1.0,
            grid_n: 512,
            threshold: 0.5,
            modes: 8,
            nx: 5,
            ny: 5,
            extent: 0.1,
            family: 100,
            mode: SweepMode::AccessibleArc,
            gauge_n: 1.0,
            carleman_grid: 192,
            cauchy_n: vec![32, 64, 128],
            out: PathBuf::from("out"),
            seed: 0,
            threads: 1,
        }
    }
}

pub const KEYS: [&str; 23] = [
    "mesh_h",
    "margin",
    "gamma_tilde",
    "q1",
    "q2",
    "tau",
    "probe",
    "tol",
    "lambda",
    "grid_n",
    "threshold",
    "modes",
    "nx",
    "ny",
    "extent",
    "family",
    "mode",
    "gauge_n",
    "carleman_grid",
    "cauchy_n",
    "out",
    "seed",
    "threads",
];

fn num<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value.trim().parse().map_err(|_| format!("malformed value '{}'", value.trim()))
}

fn pair(value: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    match parts.as_slice() {
        [a, b] => Ok((num(a)?, num(b)?)),
        _ => Err(format!("expected two numbers, got '{}'", value.trim())),
    }
}

/// `a,b,c` or the inclusive range `start:stop:step`.
pub fn parse_schedule(value: &str) -> Result<Vec<f64>, String> {
    let value = value.trim();
    if value.contains(':') {
        let parts: Vec<f64> = value.split(':').map(num).collect::<Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(format!("range '{value}' must be start:stop:step"));
        };
        if !(step > 0.0) || stop < start {
            return Err(format!("range '{value}' is empty or has a non-positive step"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|k| start + step * k as f64).collect());
    }
    value.split(',').map(num).collect()
}

fn list<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Sets one key from its textual value; range checks happen in `validate`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "mesh_h" => self.mesh_h = num(value)?,
            "margin" => self.margin = num(value)?,
            "gamma_tilde" => self.gamma_tilde = pair(value)?,
            "q1" => self.q1 = Profile::parse(value).map_err(|e| e.to_string())?,
            "q2" => self.q2 = Profile::parse(value).map_err(|e| e.to_string())?,
            "tau" => self.tau = parse_schedule(value)?,
            "probe" => self.probe = pair(value)?,
            "tol" => self.tol = num(value)?,
            "lambda" => self.lambda = num(value)?,
            "grid_n" => self.grid_n = num(value)?,
            "threshold" => self.threshold = num(value)?,
            "modes" => self.modes = num(value)?,
            "nx" => self.nx = num(value)?,
            "ny" => self.ny = num(value)?,
            "extent" => self.extent = num(value)?,
            "family" => self.family = num(value)?,
            "mode" => {
                self.mode = match value.trim() {
                    "prop21" => SweepMode::Gauged,
                    "prop22" => SweepMode::AccessibleArc,
                    other => return Err(format!("unknown mode '{other}' (expected prop21 or prop22)")),
                }
            }
            "gauge_n" => self.gauge_n = num(value)?,
            "carleman_grid" => self.carleman_grid = num(value)?,
            "cauchy_n" => self.cauchy_n = value.split(',').map(num).collect::<Result<_, _>>()?,
            "out" => {
                let v = value.trim();
                if v.is_empty() {
                    return Err("empty output path".into());
                }
                self.out = PathBuf::from(v)
            }
            "seed" => self.seed = num(value)?,
            "threads" => self.threads = num(value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Returns the first inconsistent key with a message.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let fail = |k: &'static str, m: String| Err((k, m));
        if !(self.mesh_h > 0.0 && self.mesh_h < 0.5) {
            return fail("mesh_h", format!("mesh_h {} outside (0, 0.5)", self.mesh_h));
        }
        if !(self.margin > 0.0) {
            return fail("margin", "margin must be positive".into());
        }
        let len = self.gamma_tilde.1 - self.gamma_tilde.0;
        if !(len > 2.0 * self.margin && len < 2.0 * PI - self.margin) {
            return fail("gamma_tilde", format!("arc length {len} incompatible with margin {}", self.margin));
        }
        if self.tau.is_empty() {
            return fail("tau", "empty schedule".into());
        }
        if self.tau.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return fail("tau", "schedule entries must be positive".into());
        }
        if self.tau.windows(2).any(|w| w[1] <= w[0]) {
            return fail("tau", "schedule not increasing".into());
        }
        if self.probe.0.hypot(self.probe.1) >= 1.0 {
            return fail("probe", "probe must lie inside the unit disk".into());
        }
        if !(self.tol > 0.0) {
            return fail("tol", "tolerance must be positive".into());
        }
        if !(self.lambda > 0.0) {
            return fail("lambda", "lambda must be positive".into());
        }
        if self.grid_n < 8 {
            return fail("grid_n", "grid_n must be at least 8".into());
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return fail("threshold", "threshold outside [0, 1]".into());
        }
        if self.modes == 0 {
            return fail("modes", "need at least one mode".into());
        }
        if self.nx == 0 || self.ny == 0 {
            return fail(if self.nx == 0 { "nx" } else { "ny" }, "probe grid must be non-empty".into());
        }
        if !(self.extent > 0.0 && self.extent < 1.0) {
            return fail("extent", "extent outside (0, 1)".into());
        }
        if self.nx * self.ny > 1 && self.probe.0.hypot(self.probe.1) + self.extent * 2f64.sqrt() >= 1.0 {
            return fail("extent", "probe grid leaves the unit disk".into());
        }
        if !(self.gauge_n >= 0.0) {
            return fail("gauge_n", "gauge_n must be non-negative".into());
        }
        if self.carleman_grid < 8 {
            return fail("carleman_grid", "carleman_grid must be at least 8".into());
        }
        if self.cauchy_n.is_empty() || self.cauchy_n.iter().any(|n| *n < 8) {
            return fail("cauchy_n", "grid sizes must be at least 8".into());
        }
        if self.threads == 0 {
            return fail("threads", "threads must be at least 1".into());
        }
        Ok(())
    }

    /// Text that `parse_config` reads back to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("mesh_h", self.mesh_h.to_string());
        kv("margin", self.margin.to_string());
        kv("gamma_tilde", format!("{} {}", self.gamma_tilde.0, self.gamma_tilde.1));
        kv("q1", self.q1.to_string());
        kv("q2", self.q2.to_string());
        kv("tau", list(&self.tau));
        kv("probe", format!("{} {}", self.probe.0, self.probe.1));
        kv("tol", self.tol.to_string());
        kv("lambda", self.lambda.to_string());
        kv("grid_n", self.grid_n.to_string());
        kv("threshold", self.threshold.to_string());
        kv("modes", self.modes.to_string());
        kv("nx", self.nx.to_string());
        kv("ny", self.ny.to_string());
        kv("extent", self.extent.to_string());
        kv("family", self.family.to_string());
        kv("mode", self.mode.name().to_string());
        kv("gauge_n", self.gauge_n.to_string());
        kv("carleman_grid", self.carleman_grid.to_string());
        kv("cauchy_n", list(&self.cauchy_n));
        kv("out", self.out.display().to_string());
        kv("seed", self.seed.to_string());
        kv("threads", self.threads.to_string());
        s
    }

    /// Applies `(key, value, source)` overrides, e.g. from command-line flags.
    pub fn apply(&mut self, overrides: &[(&str, String, String)]) -> Result<(), ConfigError> {
        let mut origin: HashMap<&str, &str> = HashMap::new();
        for (key, value, source) in overrides {
            self.set(key, value)
                .map_err(|message| ConfigError::Override { source_name: source.clone(), message })?;
            origin.insert(key, source);
        }
        self.validate().map_err(|(key, message)| ConfigError::Override {
            source_name: origin.get(key).map_or_else(|| format!("config key '{key}'"), |s| s.to_string()),
            message,
        })
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut lines: HashMap<&'static str, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Line { line, message: format!("expected 'key = value', got '{content}'") });
        };
        let key = key.trim();
        cfg.set(key, value).map_err(|message| ConfigError::Line { line, message })?;
        let known = KEYS.iter().find(|k| **k == key).expect("set accepted the key");
        if lines.insert(known, line).is_some() {
            return Err(ConfigError::Line { line, message: format!("duplicate key '{key}'") });
        }
    }
    cfg.validate().map_err(|(key, message)| ConfigError::Line { line: lines.get(key).copied().unwrap_or(0), message })?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_file_fills_defaults() {
        let cfg = parse_config("# bump vs zero\nmesh_h = 0.04\nq1 = bump:1,0.5,0,0.2\n").unwrap();
        assert_eq!(cfg.mesh_h, 0.04);
        assert_eq!(cfg.q1, Profile::Bump { amplitude: 1.0, radius: 0.5, center: [0.0, 0.2] });
        assert_eq!(cfg.q2, Profile::Zero);
        assert_eq!(cfg.grid_n, ExperimentConfig::default().grid_n);
    }

    #[test]
    fn decreasing_schedule_is_rejected_with_line() {
        let err = parse_config("seed = 3\n\ntau = 50,40\n").unwrap_err();
        assert_eq!(err, ConfigError::Line { line: 3, message: "schedule not increasing".into() });
    }

    #[test]
    fn unknown_and_malformed_keys_report_lines() {
        assert!(matches!(parse_config("mesh_hh = 0.1").unwrap_err(), ConfigError::Line { line: 1, .. }));
        assert!(matches!(parse_config("seed = 1\nnx = two").unwrap_err(), ConfigError::Line { line: 2, .. }));
        assert!(matches!(parse_config("\n\nmode").unwrap_err(), ConfigError::Line { line: 3, .. }));
        assert!(matches!(parse_config("nx = 2\nnx = 3").unwrap_err(), ConfigError::Line { line: 2, .. }));
    }

    #[test]
    fn range_schedules_are_inclusive() {
        assert_eq!(parse_schedule("10:100:10").unwrap().len(), 10);
        assert_eq!(parse_schedule("8:12.5:0.5").unwrap().last(), Some(&12.5));
        assert!(parse_schedule("10:5:1").is_err());
    }

    #[test]
    fn overrides_name_their_source() {
        let mut cfg = ExperimentConfig::default();
        let err = cfg.apply(&[("threads", "0".into(), "--threads".into())]).unwrap_err();
        assert_eq!(err, ConfigError::Override { source_name: "--threads".into(), message: "threads must be at least 1".into() });
    }

    fn profile() -> impl Strategy<Value = Profile> {
        prop_oneof![
            Just(Profile::Zero),
            (-5.0..5.0f64).prop_map(Profile::Constant),
            (0.1..3.0f64, 0.05..1.0f64, -0.5..0.5f64, -0.5..0.5f64)
                .prop_map(|(a, w, x, y)| Profile::Gaussian { amplitude: a, width: w, center: [x, y] }),
            (0.1..3.0f64, 0.05..1.0f64, -0.5..0.5f64, -0.5..0.5f64)
                .prop_map(|(a, r, x, y)| Profile::Bump { amplitude: a, radius: r, center: [x, y] }),
        ]
    }

    proptest! {
        #[test]
        fn text_round_trip(
            mesh_h in 0.01..0.4f64,
            start in 0.0..1.0f64,
            len in 1.0..4.0f64,
            q1 in profile(),
            q2 in profile(),
            taus in proptest::collection::btree_set(1u32..4000, 1..12),
            seed in any::<u64>(),
            nx in 1usize..20,
            gauged in any::<bool>(),
            threads in 1usize..8,
        ) {
            let cfg = ExperimentConfig {
                mesh_h,
                gamma_tilde: (start, start + len),
                q1,
                q2,
                tau: taus.iter().map(|t| *t as f64 / 7.0).collect(),
                seed,
                nx,
                mode: if gauged { SweepMode::Gauged } else { SweepMode::AccessibleArc },
                threads,
                ..ExperimentConfig::default()
            };
            prop_assert!(cfg.validate().is_ok());
            prop_assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
        }
    }
}
