//! Run configuration: built-in defaults per command, then a JSON config
//! file, then command-line flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::error::CliError;
use crate::grid::{parse_f64_list, parse_usize_list};

/// Dense budget (state-vector dimension) used when none is given.
pub const DEFAULT_DENSE_BUDGET: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    TablePbsp,
    TablePbt,
    TableUphp,
    TableQrac,
    Verify,
    Sample,
    UphpPlan,
    QracDemo,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::TablePbsp => "table pbsp",
            Task::TablePbt => "table pbt",
            Task::TableUphp => "table uphp",
            Task::TableQrac => "table qrac",
            Task::Verify => "verify",
            Task::Sample => "sample",
            Task::UphpPlan => "uphp plan",
            Task::QracDemo => "qrac demo",
        }
    }

    fn defaults(self) -> RunConfig {
        let base = RunConfig {
            task: self,
            d: vec![2],
            n: vec![1, 2, 3, 4],
            eps: vec![0.1],
            trials: 10_000,
            seed: 42,
            dense_budget: DEFAULT_DENSE_BUDGET,
            format: Format::Csv,
            out: None,
            perturb: false,
        };
        match self {
            Task::TablePbsp => RunConfig { d: vec![2, 3], ..base },
            Task::TablePbt => base,
            Task::TableUphp => RunConfig { d: vec![2, 3, 4], eps: vec![0.5, 0.2, 0.1, 0.01], ..base },
            Task::TableQrac => RunConfig { d: vec![4, 8], eps: vec![0.2, 0.1], ..base },
            Task::Verify => RunConfig { d: vec![2, 3], n: vec![1, 2, 3], eps: vec![0.2, 0.1], ..base },
            Task::Sample => RunConfig { n: vec![3], trials: 100_000, seed: 7, ..base },
            Task::UphpPlan => base,
            Task::QracDemo => RunConfig { d: vec![4], eps: vec![0.2], ..base },
        }
    }

    fn uses_n(self) -> bool {
        matches!(self, Task::TablePbsp | Task::TablePbt | Task::Verify | Task::Sample)
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub d: Vec<usize>,
    pub n: Vec<usize>,
    pub eps: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub dense_budget: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Test hook for `verify`: scale one POVM element by `1 + 1e-3`.
    pub perturb: bool,
}

/// Integer grid as a number, an array, or range text such as `"1..4"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    One(usize),
    Many(Vec<usize>),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RealsValue {
    One(f64),
    Many(Vec<f64>),
    Text(String),
}

/// JSON config file; keys mirror the long flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub d: Option<GridValue>,
    #[serde(rename = "N", alias = "n")]
    pub n: Option<GridValue>,
    #[serde(alias = "epsilon")]
    pub eps: Option<RealsValue>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    #[serde(alias = "dense-budget")]
    pub dense_budget: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config { path: path.display().to_string(), message: e.to_string() })
    }
}

/// Values given on the command line; `None` means not given.
#[derive(Debug, Clone, Default)]
pub struct FlagValues {
    pub d: Option<String>,
    pub n: Option<String>,
    pub eps: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub dense_budget: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub perturb: bool,
}

fn grid(v: GridValue, what: &str) -> Result<Vec<usize>, CliError> {
    let mut out = match v {
        GridValue::One(x) => vec![x],
        GridValue::Many(xs) => xs,
        GridValue::Text(t) => parse_usize_list(&t).map_err(|e| CliError::Usage(format!("--{what}: {e}")))?,
    };
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn reals(v: RealsValue) -> Result<Vec<f64>, CliError> {
    match v {
        RealsValue::One(x) => Ok(vec![x]),
        RealsValue::Many(xs) => Ok(xs),
        RealsValue::Text(t) => parse_f64_list(&t).map_err(|e| CliError::Usage(format!("--eps: {e}"))),
    }
}

impl RunConfig {
    pub fn resolve(task: Task, flags: FlagValues) -> Result<Self, CliError> {
        let mut cfg = task.defaults();
        cfg.perturb = flags.perturb;
        if let Some(path) = &flags.config {
            let file = FileConfig::load(path)?;
            if let Some(cmd) = &file.command {
                if cmd.trim() != task.name() {
                    return Err(CliError::Usage(format!(
                        "config file is for {cmd:?} but the command is {:?}",
                        task.name()
                    )));
                }
            }
            if let Some(v) = file.d {
                cfg.d = grid(v, "d")?;
            }
            if let Some(v) = file.n {
                cfg.n = grid(v, "N")?;
            }
            if let Some(v) = file.eps {
                cfg.eps = reals(v)?;
            }
            cfg.trials = file.trials.unwrap_or(cfg.trials);
            cfg.seed = file.seed.unwrap_or(cfg.seed);
            cfg.dense_budget = file.dense_budget.unwrap_or(cfg.dense_budget);
            cfg.format = file.format.unwrap_or(cfg.format);
            cfg.out = file.out.or(cfg.out);
        }
        if let Some(t) = flags.d {
            cfg.d = grid(GridValue::Text(t), "d")?;
        }
        if let Some(t) = flags.n {
            cfg.n = grid(GridValue::Text(t), "N")?;
        }
        if let Some(t) = flags.eps {
            cfg.eps = reals(RealsValue::Text(t))?;
        }
        cfg.trials = flags.trials.unwrap_or(cfg.trials);
        cfg.seed = flags.seed.unwrap_or(cfg.seed);
        cfg.dense_budget = flags.dense_budget.unwrap_or(cfg.dense_budget);
        cfg.format = flags.format.unwrap_or(cfg.format);
        cfg.out = flags.out.or(cfg.out);
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.d.is_empty() || self.n.is_empty() || self.eps.is_empty() {
            return usage("--d, --N and --eps lists must be nonempty".into());
        }
        if self.trials == 0 {
            return usage("--trials must be at least 1".into());
        }
        let strict = !matches!(self.task, Task::TablePbsp);
        if strict {
            if let Some(d) = self.d.iter().find(|&&d| d < 2) {
                return usage(format!("--d must be at least 2, got {d}"));
            }
            if self.task.uses_n() {
                if let Some(n) = self.n.iter().find(|&&n| n < 1) {
                    return usage(format!("--N must be at least 1, got {n}"));
                }
            }
        }
        match self.task {
            Task::TableUphp | Task::UphpPlan => {
                if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
                    return usage(format!("--eps values must lie in (0, 1), got {e}"));
                }
            }
            Task::TableQrac | Task::QracDemo | Task::Verify => {
                if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e < 0.25)) {
                    return usage(format!("--eps values must lie in (0, 1/4) for the random access code, got {e}"));
                }
                if self.task != Task::Verify {
                    if let Some(d) = self.d.iter().find(|&&d| d < 4 || !d.is_power_of_two() || d > 256) {
                        return usage(format!("--d must be a power of two between 4 and 256 (d = 2^(k+1)), got {d}"));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_override_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, r#"{{"command": "table pbsp", "d": [3], "N": "1..2", "seed": 5, "trials": 7}}"#).unwrap();
        let flags = FlagValues { config: Some(file.path().into()), seed: Some(9), ..Default::default() };
        let cfg = RunConfig::resolve(Task::TablePbsp, flags).unwrap();
        assert_eq!(cfg.d, vec![3]);
        assert_eq!(cfg.n, vec![1, 2]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.trials, 7);
    }

    #[test]
    fn mismatched_command_is_usage_error() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, r#"{{"command": "verify"}}"#).unwrap();
        let flags = FlagValues { config: Some(file.path().into()), ..Default::default() };
        assert!(matches!(RunConfig::resolve(Task::Sample, flags), Err(CliError::Usage(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, r#"{{"dd": 3}}"#).unwrap();
        let flags = FlagValues { config: Some(file.path().into()), ..Default::default() };
        let err = RunConfig::resolve(Task::Sample, flags).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn validation() {
        let bad = |task, flags| RunConfig::resolve(task, flags).is_err();
        assert!(bad(Task::Sample, FlagValues { trials: Some(0), ..Default::default() }));
        assert!(bad(Task::TableQrac, FlagValues { d: Some("6".into()), ..Default::default() }));
        assert!(bad(Task::TableQrac, FlagValues { eps: Some("0.3".into()), ..Default::default() }));
        assert!(bad(Task::UphpPlan, FlagValues { eps: Some("1".into()), ..Default::default() }));
        assert!(bad(Task::Verify, FlagValues { n: Some("0".into()), ..Default::default() }));
        // degenerate points are reported, not rejected, by the protocol table
        assert!(!bad(Task::TablePbsp, FlagValues { n: Some("0..2".into()), d: Some("1".into()), ..Default::default() }));
    }
}
