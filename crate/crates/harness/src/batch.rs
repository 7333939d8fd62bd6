//! Trial batches, sweeps and calibration.

use rayon::prelude::*;
use tinypull_core::{
    adversarial_init, run_until, ByzantineStrategy, Engine, InitStrategy, Population, Protocol, RoundMetrics, Roster,
    RunOptions, SamplingMode,
};

use crate::config::{ExperimentConfig, Validated, SWEEP_AXES};
use crate::error::{ConfigError, HarnessError};
use crate::registry::{dispatch, ProtocolVisitor};
use crate::report::{TrialBatchReport, TrialDigest};

/// Everything one trial needs apart from the protocol and legal predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSetup {
    pub roster: Roster,
    pub init: InitStrategy,
    pub seed: u64,
    pub sampling: SamplingMode,
    pub byzantine: Option<ByzantineStrategy>,
    pub options: RunOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: u64,
    pub seed: u64,
    pub converged: bool,
    pub t_converge: Option<u64>,
    pub held_for: u64,
    pub rounds_run: u64,
    pub trace: Vec<RoundMetrics>,
}

/// One trial under an arbitrary legal predicate.
pub fn run_trial_with<P, F>(protocol: &P, setup: &TrialSetup, legal: F) -> Result<TrialOutcome, HarnessError>
where
    P: Protocol + Clone,
    F: FnMut(&P, &Population<P::Memory>) -> bool,
{
    let mut pop = adversarial_init(protocol, &setup.roster, &setup.init, setup.seed)?;
    let mut engine = Engine::new(protocol.clone(), setup.seed).with_mode(setup.sampling)?;
    if let Some(b) = setup.byzantine {
        engine = engine.with_byzantine(b);
    }
    let r = run_until(&engine, &mut pop, legal, setup.options);
    Ok(TrialOutcome {
        trial: 0,
        seed: setup.seed,
        converged: r.converged,
        t_converge: r.t_converge,
        held_for: r.held_for,
        rounds_run: r.rounds_run,
        trace: r.trace,
    })
}

impl Validated {
    /// Setup of trial `i`, seeded with `seed + i`.
    pub fn trial_setup(&self, trial: u64) -> TrialSetup {
        TrialSetup {
            roster: self.roster,
            init: self.init.clone(),
            seed: self.seed.wrapping_add(trial),
            sampling: self.sampling,
            byzantine: self.byzantine,
            options: RunOptions {
                max_rounds: self.config.max_rounds,
                hold_window: self.hold_window,
                record_trace: self.config.trace,
            },
        }
    }
}

/// A batch report plus the per-trial traces, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub report: TrialBatchReport,
    pub traces: Vec<(u64, Vec<RoundMetrics>)>,
}

struct BatchVisitor<'a> {
    v: &'a Validated,
}

impl ProtocolVisitor for BatchVisitor<'_> {
    type Output = Result<BatchOutput, HarnessError>;

    fn visit<P: Protocol + Clone + 'static>(self, protocol: P) -> Self::Output {
        let v = self.v;
        let legal = v.legal;
        let one = |i: u64| {
            let mut out = run_trial_with(&protocol, &v.trial_setup(i), |p, pop| legal.evaluate(p, pop))?;
            out.trial = i;
            Ok(out)
        };
        let outcomes: Vec<TrialOutcome> = match v.config.threads {
            Some(threads) => rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| HarnessError::Threads(e.to_string()))?
                .install(|| (0..v.config.trials).into_par_iter().map(one).collect::<Result<_, HarnessError>>())?,
            None => (0..v.config.trials).into_par_iter().map(one).collect::<Result<_, HarnessError>>()?,
        };
        let digests = outcomes
            .iter()
            .map(|o| TrialDigest {
                trial: o.trial,
                seed: o.seed,
                converged: o.converged,
                t_converge: o.t_converge,
                held_for: o.held_for,
                rounds_run: o.rounds_run,
            })
            .collect();
        let report = TrialBatchReport::new(v, protocol.name(), protocol.eta(), protocol.ell(), digests);
        let traces = outcomes.into_iter().map(|o| (o.trial, o.trace)).collect();
        Ok(BatchOutput { report, traces })
    }
}

/// Runs `config.trials` independent trials; trial `i` uses seed `seed + i`.
/// Invalid configs are rejected before any trial starts.
pub fn run_batch(config: &ExperimentConfig) -> Result<BatchOutput, HarnessError> {
    let v = config.validate()?;
    dispatch(v.kind, &v.config, BatchVisitor { v: &v })?
}

/// One batch per value of `axis`, every batch with the same master seed.
/// All points are validated before the first batch runs.
pub fn sweep(config: &ExperimentConfig, axis: &str, values: &[f64]) -> Result<Vec<BatchOutput>, HarnessError> {
    if !SWEEP_AXES.contains(&axis) && axis != "t" {
        return Err(ConfigError::UnknownAxis(axis.to_string()).into());
    }
    let points = values
        .iter()
        .map(|&x| {
            let mut c = config.clone();
            c.set_axis(axis, x)?;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    points.iter().map(run_batch).collect()
}

/// Result of [`calibrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub quantile: f64,
    pub threshold: u64,
    pub output: BatchOutput,
}

/// Runs a pilot batch and returns the empirical `quantile` of the
/// convergence rounds. Fails if any pilot trial does not converge.
pub fn calibrate(config: &ExperimentConfig, quantile: f64) -> Result<Calibration, HarnessError> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(HarnessError::Quantile(quantile));
    }
    let output = run_batch(config)?;
    if let Some(bad) = output.report.trials_detail.iter().find(|d| !d.converged) {
        return Err(HarnessError::PilotDiverged { trial: bad.trial, seed: bad.seed, max_rounds: config.max_rounds });
    }
    let rounds: Vec<Option<u64>> = output.report.trials_detail.iter().map(|d| d.t_converge).collect();
    let threshold = nearest_rank(&rounds, quantile).expect("all trials converged");
    Ok(Calibration { quantile, threshold, output })
}

/// Nearest-rank quantile: element `⌈q·N⌉` of the sorted values, with
/// non-converged trials (`None`) ranked last. `None` if it lands on one.
pub fn nearest_rank(values: &[Option<u64>], q: f64) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<u64> = values.iter().map(|v| v.unwrap_or(u64::MAX)).collect();
    sorted.sort_unstable();
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Some(sorted[rank - 1]).filter(|&x| x != u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_examples() {
        let v: Vec<Option<u64>> = (1..=10).map(Some).collect();
        assert_eq!(nearest_rank(&v, 0.5), Some(5));
        assert_eq!(nearest_rank(&v, 0.95), Some(10));
        assert_eq!(nearest_rank(&v, 0.01), Some(1));
        let w = [Some(3), None, Some(1)];
        assert_eq!(nearest_rank(&w, 0.5), Some(3));
        assert_eq!(nearest_rank(&w, 0.9), None);
        assert_eq!(nearest_rank(&[], 0.5), None);
    }
}
