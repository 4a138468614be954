//! JSON run configuration for the command-line front end.
//!
//! Every struct rejects unknown keys. A configuration names its command and
//! carries the section that command needs; see the README for one example per
//! command.

use crate::solver::SolveConfig;
use crate::verify::VolSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::Path;

/// Code version embedded in every report.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Verify,
    Index,
    Sweep,
    Topology,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Index => "index",
            Command::Sweep => "sweep",
            Command::Topology => "topology",
        };
        f.write_str(s)
    }
}

/// Checks selectable by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    LengthIdentity,
    SupBound,
    PointwiseEstimate,
    ZeroCensus,
    Classification,
}

impl CheckName {
    pub const DEFAULT_SUITE: [CheckName; 5] = [
        CheckName::LengthIdentity,
        CheckName::SupBound,
        CheckName::PointwiseEstimate,
        CheckName::ZeroCensus,
        CheckName::Classification,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative tolerance of the length identity.
    pub length_identity: f64,
    /// Relative slack of the sup bound.
    pub sup_bound: f64,
    /// Constant `C` in the `C·h` slack of the pointwise estimate.
    pub pointwise_constant: f64,
    /// Census points must lie within this many lattice spacings of the seed.
    pub census_spacings: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            length_identity: crate::verify::LENGTH_TOLERANCE,
            sup_bound: crate::verify::SUP_SLACK,
            pointwise_constant: crate::verify::POINTWISE_CONSTANT,
            census_spacings: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexConfig {
    pub degrees: Vec<i64>,
    pub n: Vec<usize>,
    pub vol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauSweep {
    pub base: SolveConfig,
    pub schedule: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSweep {
    pub degrees: Vec<i64>,
    pub vols: Vec<VolSpec>,
    pub tau: f64,
    pub n: usize,
    /// Base rng seed for the per-cell random divisors.
    #[serde(default)]
    pub seed: u64,
}

/// Exactly one of the two sweep kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub tau_schedule: Option<TauSweep>,
    #[serde(default)]
    pub grid: Option<GridSweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyConfig {
    pub min_degree: i64,
    pub max_degree: i64,
    pub genera: Vec<u32>,
    pub max_k: u32,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            min_degree: -2,
            max_degree: 4,
            genera: vec![0, 1, 2],
            max_k: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Top-level configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub solve: Option<SolveConfig>,
    #[serde(default)]
    pub checks: Option<Vec<CheckName>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub index: Option<IndexConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub topology: Option<TopologyConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Configuration problems; the CLI maps these to exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl RunConfig {
    /// Parse JSON text; serde reports the line and column of schema errors.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Semantic validation for `command`; runs before any computation.
    pub fn validate(&self, command: Command) -> Result<(), ConfigError> {
        if let Some(c) = self.command {
            if c != command {
                return err(format!("key `command`: file is for `{c}`, invoked as `{command}`"));
            }
        }
        if self.output.formats.is_empty() {
            return err("key `output.formats`: at least one format is required");
        }
        let t = &self.tolerances;
        if ![t.length_identity, t.sup_bound, t.pointwise_constant, t.census_spacings]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
        {
            return err("key `tolerances`: values must be finite and nonnegative");
        }
        let check_solve = |s: &SolveConfig, key: &str| {
            s.validate().map_err(|e| ConfigError(format!("key `{key}`: {e}")))
        };
        match command {
            Command::Solve | Command::Verify => {
                let Some(s) = &self.solve else {
                    return err(format!("key `solve`: required for `{command}`"));
                };
                check_solve(s, "solve")?;
                if command == Command::Verify {
                    if let Some(c) = &self.checks {
                        if c.is_empty() {
                            return err("key `checks`: the check list is empty");
                        }
                    }
                }
            }
            Command::Index => {
                let Some(ix) = &self.index else {
                    return err("key `index`: required for `index`");
                };
                if ix.degrees.is_empty() || ix.n.is_empty() {
                    return err("key `index`: `degrees` and `n` must be non-empty");
                }
                if let Some(&n) = ix.n.iter().find(|&&n| !(4..=crate::vortex::DENSE_LIMIT).contains(&n)) {
                    return err(format!(
                        "key `index.n`: {n} outside 4..={} (dense assembly limit)",
                        crate::vortex::DENSE_LIMIT
                    ));
                }
                if !(ix.vol > 0.0 && ix.vol.is_finite()) {
                    return err("key `index.vol`: must be positive");
                }
            }
            Command::Sweep => {
                let Some(sw) = &self.sweep else {
                    return err("key `sweep`: required for `sweep`");
                };
                match (&sw.tau_schedule, &sw.grid) {
                    (Some(ts), None) => {
                        check_solve(&ts.base, "sweep.tau_schedule.base")?;
                        if ts.schedule.is_empty() {
                            return err("key `sweep.tau_schedule.schedule`: empty schedule");
                        }
                        let inc = ts.schedule.windows(2).all(|w| w[0] <= w[1]);
                        let dec = ts.schedule.windows(2).all(|w| w[0] >= w[1]);
                        if !(inc || dec) {
                            return err("key `sweep.tau_schedule.schedule`: must be monotone");
                        }
                    }
                    (None, Some(g)) => {
                        if g.degrees.is_empty() || g.vols.is_empty() {
                            return err("key `sweep.grid`: `degrees` and `vols` must be non-empty");
                        }
                        if g.vols.iter().any(|v| !(v.value() > 0.0 && v.value().is_finite())) {
                            return err("key `sweep.grid.vols`: volumes must be positive");
                        }
                        if g.n < 4 || !g.tau.is_finite() {
                            return err("key `sweep.grid`: need n ≥ 4 and finite tau");
                        }
                    }
                    _ => return err("key `sweep`: give exactly one of `tau_schedule` or `grid`"),
                }
            }
            Command::Topology => {
                let t = self.topology.clone().unwrap_or_default();
                if t.min_degree > t.max_degree || t.genera.is_empty() {
                    return err("key `topology`: need min_degree ≤ max_degree and some genera");
                }
            }
        }
        Ok(())
    }

    /// Apply a `--seed` override to every rng seed in the file.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let Some(s) = &mut self.solve {
            s.rng_seed = seed;
        }
        if let Some(sw) = &mut self.sweep {
            if let Some(ts) = &mut sw.tau_schedule {
                ts.base.rng_seed = seed;
            }
            if let Some(g) = &mut sw.grid {
                g.seed = seed;
            }
        }
        self
    }

    /// SHA-256 of the canonical serialization of the effective config.
    pub fn hash(&self, command: Command) -> String {
        let canonical = serde_json::to_vec(&(command, self)).expect("config serializes");
        Sha256::digest(canonical)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let e = RunConfig::parse("{\n \"solve\": {\"d\": 0, \"tau\": 1, \"vol\": 4, \"n\": 8,\n \"colour\": 1}}").unwrap_err();
        assert!(e.0.contains("colour") && e.0.contains("line 3"), "{e}");
        assert!(RunConfig::parse("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn minimal_solve_config() {
        let c = RunConfig::parse(r#"{"command": "solve", "solve": {"d": 0, "tau": 1.0, "vol": 4.0, "n": 8}}"#).unwrap();
        assert!(c.validate(Command::Solve).is_ok());
        assert!(c.validate(Command::Verify).is_err());
        assert!(c.validate(Command::Index).is_err());
    }

    #[test]
    fn empty_check_list_is_a_config_error() {
        let c = RunConfig::parse(r#"{"solve": {"d": 0, "tau": 1.0, "vol": 4.0, "n": 8}, "checks": []}"#).unwrap();
        assert!(c.validate(Command::Verify).is_err());
    }

    #[test]
    fn hash_depends_on_content_and_seed() {
        let c = RunConfig::parse(r#"{"solve": {"d": 1, "tau": 1.0, "vol": 25.0, "n": 16}}"#).unwrap();
        let h = c.hash(Command::Solve);
        assert_eq!(h.len(), 64);
        assert_eq!(h, c.clone().hash(Command::Solve));
        assert_ne!(h, c.clone().with_seed(7).hash(Command::Solve));
    }

    #[test]
    fn vol_spec_forms() {
        let g: GridSweep = serde_json::from_str(
            r#"{"degrees": [1], "vols": [{"pi_times": 4}, {"value": 30.0}], "tau": 1.0, "n": 32}"#,
        )
        .unwrap();
        assert_eq!(g.vols[0], VolSpec::PiTimes(4.0));
    }
}
