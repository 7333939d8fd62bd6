//! report.json and trace.csv.
//!
//! Both are pure functions of the config: no timestamps, no wall-clock.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use tinypull_core::RoundMetrics;

use crate::batch::nearest_rank;
use crate::config::{ExperimentConfig, LegalKind, Validated};

pub const SCHEMA_VERSION: u32 = 1;

pub const SEED_POLICY: &str = "trial i runs with seed + i; sweep points share the master seed";

pub const TRACE_HEADER: &str = "trial,round,agreement_fraction,legal_flag,speakers,clock_entropy";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDigest {
    pub trial: u64,
    pub seed: u64,
    pub converged: bool,
    pub t_converge: Option<u64>,
    pub held_for: u64,
    pub rounds_run: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialBatchReport {
    pub schema_version: u32,
    pub protocol: String,
    pub eta: usize,
    pub ell: u32,
    pub legal: LegalKind,
    pub hold_window: u64,
    pub seed_policy: String,
    pub config: ExperimentConfig,
    pub trials: u64,
    pub converged: u64,
    pub success_rate: f64,
    /// Nearest-rank quantiles of the convergence round; null when the rank
    /// falls on a trial that did not converge.
    pub p50: Option<u64>,
    pub p95: Option<u64>,
    pub max: Option<u64>,
    pub trials_detail: Vec<TrialDigest>,
}

impl TrialBatchReport {
    pub(crate) fn new(v: &Validated, protocol: String, eta: usize, ell: u32, trials_detail: Vec<TrialDigest>) -> Self {
        let rounds: Vec<Option<u64>> = trials_detail.iter().map(|d| d.t_converge).collect();
        let trials = trials_detail.len() as u64;
        let converged = trials_detail.iter().filter(|d| d.converged).count() as u64;
        let mut config = v.config.clone();
        config.seed = Some(v.seed);
        Self {
            schema_version: SCHEMA_VERSION,
            protocol,
            eta,
            ell,
            legal: v.legal,
            hold_window: v.hold_window,
            seed_policy: SEED_POLICY.into(),
            config,
            trials,
            converged,
            success_rate: if trials == 0 { 0.0 } else { converged as f64 / trials as f64 },
            p50: nearest_rank(&rounds, 0.5),
            p95: nearest_rank(&rounds, 0.95),
            max: nearest_rank(&rounds, 1.0),
            trials_detail,
        }
    }

    /// Convergence rounds of all trials, `None` for failures.
    pub fn rounds(&self) -> Vec<Option<u64>> {
        self.trials_detail.iter().map(|d| d.t_converge).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes the trace CSV with its fixed header. Empty cells mean the metric
/// does not apply to the protocol.
pub fn write_trace_csv<W: Write>(mut w: W, traces: &[(u64, Vec<RoundMetrics>)]) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for (trial, rows) in traces {
        for m in rows {
            let speakers = m.speakers.map(|s| s.to_string()).unwrap_or_default();
            let entropy = m.clock_entropy.map(|e| format!("{e:.6}")).unwrap_or_default();
            writeln!(
                w,
                "{trial},{},{:.6},{},{speakers},{entropy}",
                m.round,
                m.agreement_fraction,
                u8::from(m.legal)
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![
            RoundMetrics { round: 0, agreement_fraction: 0.5, legal: false, speakers: None, clock_entropy: Some(1.0) },
            RoundMetrics { round: 1, agreement_fraction: 1.0, legal: true, speakers: Some(7), clock_entropy: None },
        ];
        let mut out = Vec::new();
        write_trace_csv(&mut out, &[(3, rows)]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "trial,round,agreement_fraction,legal_flag,speakers,clock_entropy\n\
             3,0,0.500000,0,,1.000000\n\
             3,1,1.000000,1,7,\n"
        );
    }
}
