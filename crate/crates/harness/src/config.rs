//! Experiment configuration: a flat TOML table with a fixed key set.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tinypull_core::engine::{ceil_log2, default_byzantine_cap, default_hold_window};
use tinypull_core::{ByzantineStrategy, InitStrategy, Roster, SamplingMode};

use crate::error::{ConfigError, Violation};
use crate::registry::ProtocolKind;

/// Every recognized key. Absent optional keys take the documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: String,
    pub n: usize,
    pub trials: u64,
    /// Master seed; trial `i` runs with `seed + i`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Clock modulus.
    #[serde(default, rename = "T", alias = "t")]
    pub t: Option<u64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub gamma_phase: Option<f64>,
    /// Minimum source imbalance, `|k1/k0 - 1| > epsilon`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub k1: usize,
    #[serde(default)]
    pub k0: usize,
    /// uniform_random, all_equal, half_split or max_spread_clocks.
    #[serde(default = "default_init")]
    pub init: String,
    /// Value for `init = "all_equal"`.
    #[serde(default)]
    pub init_value: Option<u64>,
    #[serde(default)]
    pub byzantine: usize,
    /// fixed_0, fixed_1, random or worst_opinion.
    #[serde(default)]
    pub byzantine_strategy: Option<String>,
    #[serde(default)]
    pub byzantine_cap: Option<usize>,
    /// pull or bit.
    #[serde(default = "default_sampling")]
    pub sampling: String,
    /// clocks_equal, outputs_equal or agreement. Defaults per protocol.
    #[serde(default)]
    pub legal: Option<String>,
    pub max_rounds: u64,
    /// Defaults to 10·⌈log₂ n⌉.
    #[serde(default)]
    pub hold_window: Option<u64>,
    /// Record per-round metrics for trace.csv.
    #[serde(default = "default_true")]
    pub trace: bool,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_init() -> String {
    "uniform_random".into()
}

fn default_sampling() -> String {
    "pull".into()
}

fn default_true() -> bool {
    true
}

pub const DEFAULT_GAMMA: f64 = 8.0;
pub const DEFAULT_GAMMA_PHASE: f64 = 20.0;
/// γ used for the default baseline period, ⌈10 log₂ n⌉.
pub const DEFAULT_BASELINE_GAMMA: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegalKind {
    /// All honest output clocks equal.
    ClocksEqual,
    /// All honest output bits equal the sources' majority input.
    OutputsEqual,
    /// All honest output bits equal.
    Agreement,
}

impl LegalKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "clocks_equal" => Some(Self::ClocksEqual),
            "outputs_equal" => Some(Self::OutputsEqual),
            "agreement" => Some(Self::Agreement),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ClocksEqual => "clocks_equal",
            Self::OutputsEqual => "outputs_equal",
            Self::Agreement => "agreement",
        }
    }
}

impl fmt::Display for LegalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Numeric keys a sweep may vary.
pub const SWEEP_AXES: &[&str] = &[
    "T", "n", "gamma", "gamma_phase", "epsilon", "k1", "k0", "byzantine", "max_rounds", "hold_window", "trials",
];

/// A config that passed [`ExperimentConfig::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub config: ExperimentConfig,
    pub kind: ProtocolKind,
    pub seed: u64,
    pub roster: Roster,
    pub init: InitStrategy,
    pub byzantine: Option<ByzantineStrategy>,
    pub sampling: SamplingMode,
    pub legal: LegalKind,
    pub hold_window: u64,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(one_line(&e.to_string())))
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {}", path.display(), e)))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Sets a sweep axis. Integer axes reject fractional values.
    pub fn set_axis(&mut self, axis: &str, value: f64) -> Result<(), ConfigError> {
        let as_int = || -> Result<u64, ConfigError> {
            if value.fract() != 0.0 || value < 0.0 || !value.is_finite() {
                return Err(ConfigError::Invalid(vec![Violation::new(axis, "non-negative integer", value)]));
            }
            Ok(value as u64)
        };
        match axis {
            "T" | "t" => self.t = Some(as_int()?),
            "n" => self.n = as_int()? as usize,
            "gamma" => self.gamma = Some(value),
            "gamma_phase" => self.gamma_phase = Some(value),
            "epsilon" => self.epsilon = Some(value),
            "k1" => self.k1 = as_int()? as usize,
            "k0" => self.k0 = as_int()? as usize,
            "byzantine" => self.byzantine = as_int()? as usize,
            "max_rounds" => self.max_rounds = as_int()?,
            "hold_window" => self.hold_window = Some(as_int()?),
            "trials" => self.trials = as_int()?,
            _ => return Err(ConfigError::UnknownAxis(axis.to_string())),
        }
        Ok(())
    }

    /// Checks every constraint and reports all violations at once. The
    /// protocol itself is built once to surface constructor errors.
    pub fn validate(&self) -> Result<Validated, ConfigError> {
        let mut v = Vec::new();
        let kind = ProtocolKind::parse(&self.protocol);
        if kind.is_none() {
            v.push(Violation::new("protocol", "known protocol name", &self.protocol));
        }
        let seed = self.seed.unwrap_or_else(|| {
            v.push(Violation::new("seed", "required", "missing"));
            0
        });
        if self.n < 2 {
            v.push(Violation::new("n", "n >= 2", self.n));
        }
        if self.trials == 0 {
            v.push(Violation::new("trials", "trials >= 1", self.trials));
        }
        if let Some(threads) = self.threads {
            if threads == 0 {
                v.push(Violation::new("threads", "threads >= 1", threads));
            }
        }

        let init = match self.init.as_str() {
            "uniform_random" => Some(InitStrategy::UniformRandom),
            "half_split" => Some(InitStrategy::HalfSplit),
            "max_spread_clocks" => Some(InitStrategy::MaxSpreadClocks),
            "all_equal" => match self.init_value {
                Some(x) => Some(InitStrategy::AllEqual(x)),
                None => {
                    v.push(Violation::new("init_value", "required by init = all_equal", "missing"));
                    None
                }
            },
            other => {
                v.push(Violation::new("init", "uniform_random|all_equal|half_split|max_spread_clocks", other));
                None
            }
        };
        if self.init_value.is_some() && self.init != "all_equal" {
            v.push(Violation::new("init_value", "only with init = all_equal", &self.init));
        }

        let sampling = match self.sampling.as_str() {
            "pull" => SamplingMode::Pull,
            "bit" => SamplingMode::Bit,
            other => {
                v.push(Violation::new("sampling", "pull|bit", other));
                SamplingMode::Pull
            }
        };

        let byzantine = match self.byzantine_strategy.as_deref() {
            None => None,
            Some("fixed_0") => Some(ByzantineStrategy::FixedBit(false)),
            Some("fixed_1") => Some(ByzantineStrategy::FixedBit(true)),
            Some("random") => Some(ByzantineStrategy::Random),
            Some("worst_opinion") => Some(ByzantineStrategy::WorstOpinion),
            Some(other) => {
                v.push(Violation::new("byzantine_strategy", "fixed_0|fixed_1|random|worst_opinion", other));
                None
            }
        };
        if self.byzantine > 0 && self.byzantine_strategy.is_none() {
            v.push(Violation::new("byzantine_strategy", "required when byzantine > 0", "missing"));
        }
        let cap = self.byzantine_cap.unwrap_or_else(|| default_byzantine_cap(self.n));
        if self.byzantine > cap {
            v.push(Violation::new("byzantine", format!("byzantine <= cap {cap}"), self.byzantine));
        }
        if self.k1 + self.k0 + self.byzantine > self.n {
            v.push(Violation::new("k1", "k1 + k0 + byzantine <= n", self.k1 + self.k0 + self.byzantine));
        }

        let legal = match self.legal.as_deref() {
            Some(s) => LegalKind::parse(s).or_else(|| {
                v.push(Violation::new("legal", "clocks_equal|outputs_equal|agreement", s));
                None
            }),
            None => kind.map(ProtocolKind::default_legal),
        };
        if let Some(kind) = kind {
            if let Some(legal) = legal {
                if legal == LegalKind::ClocksEqual && !kind.has_clock() {
                    v.push(Violation::new("legal", "protocol exposes an output clock", legal));
                }
                if legal != LegalKind::ClocksEqual && !kind.has_output_bit() {
                    v.push(Violation::new("legal", "protocol exposes an output bit", legal));
                }
            }
            kind.check_params(self, &mut v);
        }
        if legal == Some(LegalKind::OutputsEqual) {
            if self.k1 + self.k0 == 0 {
                v.push(Violation::new("k1", "outputs_equal needs at least one source", 0));
            } else if self.k1 == self.k0 {
                v.push(Violation::new("k1", "k1 != k0 (tie leaves the majority bit undefined)", self.k1));
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps >= 0.0 && eps.is_finite()) {
                v.push(Violation::new("epsilon", "epsilon >= 0", eps));
            } else if self.k0 > 0 {
                let ratio = self.k1 as f64 / self.k0 as f64;
                if (ratio - 1.0).abs() <= eps {
                    v.push(Violation::new("epsilon", "|k1/k0 - 1| > epsilon", ratio));
                }
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                v.push(Violation::new("gamma", "gamma > 0", g));
            }
        }
        if let Some(g) = self.gamma_phase {
            if !(g >= 1.0 && g.is_finite()) {
                v.push(Violation::new("gamma_phase", "gamma_phase >= 1", g));
            }
        }

        if v.is_empty() {
            if let Some(kind) = kind {
                if let Err(e) = kind.build_check(self) {
                    v.push(Violation::new(kind.name(), "protocol constructor", e));
                }
            }
        }
        if !v.is_empty() {
            return Err(ConfigError::Invalid(v));
        }
        let n = self.n;
        Ok(Validated {
            config: self.clone(),
            kind: kind.expect("checked"),
            seed,
            roster: Roster { n, k1: self.k1, k0: self.k0, byzantine: self.byzantine, byzantine_cap: Some(cap) },
            init: init.expect("checked"),
            byzantine,
            sampling,
            legal: legal.expect("checked"),
            hold_window: self.hold_window.unwrap_or_else(|| default_hold_window(n)),
        })
    }

    /// ⌈log₂ n⌉, used by defaults.
    pub fn log2_n(&self) -> u32 {
        ceil_log2(self.n.max(1) as u64)
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ExperimentConfig {
        ExperimentConfig::from_toml_str("protocol = \"maj-consensus\"\nn = 100\ntrials = 1\nseed = 1\nmax_rounds = 100\n")
            .unwrap()
    }

    #[test]
    fn minimal_config_parses_and_validates() {
        let c = minimal();
        let v = c.validate().unwrap();
        assert_eq!(v.legal, LegalKind::Agreement);
        assert_eq!(v.hold_window, 70);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ExperimentConfig::from_toml_str("protocol = \"maj-consensus\"\nn = 100\ntrials = 1\nmax_rounds = 1\nbogus = 3\n")
            .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn missing_required_key_rejected() {
        assert!(ExperimentConfig::from_toml_str("protocol = \"maj-consensus\"\ntrials = 1\nmax_rounds = 1\n").is_err());
    }

    #[test]
    fn every_violation_listed() {
        let mut c = minimal();
        c.n = 1;
        c.trials = 0;
        c.sampling = "push".into();
        let ConfigError::Invalid(v) = c.validate().unwrap_err() else { panic!() };
        let keys: Vec<&str> = v.iter().map(|x| x.key.as_str()).collect();
        assert_eq!(keys, ["n", "trials", "sampling"]);
    }

    #[test]
    fn axis_setting() {
        let mut c = minimal();
        c.set_axis("T", 16.0).unwrap();
        assert_eq!(c.t, Some(16));
        assert!(c.set_axis("T", 1.5).is_err());
        assert!(matches!(c.set_axis("colour", 1.0), Err(ConfigError::UnknownAxis(_))));
    }
}
