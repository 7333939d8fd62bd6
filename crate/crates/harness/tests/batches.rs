use proptest::prelude::*;
use tinypull_harness::{
    calibrate, nearest_rank, run_batch, sweep, write_trace_csv, ConfigError, ExperimentConfig, HarnessError,
};

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap()
}

fn maj(n: usize, trials: u64) -> ExperimentConfig {
    cfg(&format!(
        "protocol = \"maj-consensus\"\nn = {n}\ntrials = {trials}\nseed = 5\nmax_rounds = 400\ninit = \"half_split\"\n"
    ))
}

#[test]
fn already_legal_trial_converges_at_zero() {
    let c = cfg("protocol = \"syn-simple\"\nT = 16\nn = 64\ntrials = 1\nseed = 1\nmax_rounds = 10\n\
                 init = \"all_equal\"\ninit_value = 7\nhold_window = 20\n");
    let out = run_batch(&c).unwrap();
    assert_eq!(out.report.success_rate, 1.0);
    assert_eq!(out.report.p50, Some(0));
    assert_eq!(out.report.trials_detail[0].held_for, 20);
}

#[test]
fn same_config_gives_identical_outputs() {
    let c = maj(300, 6);
    let (a, b) = (run_batch(&c).unwrap(), run_batch(&c).unwrap());
    assert_eq!(a.report.to_json(), b.report.to_json());
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    write_trace_csv(&mut ca, &a.traces).unwrap();
    write_trace_csv(&mut cb, &b.traces).unwrap();
    assert_eq!(ca, cb);
}

#[test]
fn thread_count_does_not_change_the_report() {
    let mut c = maj(200, 5);
    c.threads = Some(1);
    let one = run_batch(&c).unwrap().report;
    c.threads = Some(3);
    let three = run_batch(&c).unwrap().report;
    assert_eq!(one.trials_detail, three.trials_detail);
}

#[test]
fn trials_use_consecutive_seeds() {
    let out = run_batch(&maj(100, 4)).unwrap();
    let seeds: Vec<u64> = out.report.trials_detail.iter().map(|d| d.seed).collect();
    assert_eq!(seeds, [5, 6, 7, 8]);
    assert_eq!(out.report.success_rate, out.report.converged as f64 / out.report.trials as f64);
}

#[test]
fn config_rejects_before_running() {
    let bad = cfg("protocol = \"syn-simple\"\nT = 10\nn = 100\ntrials = 1\nseed = 1\nmax_rounds = 10\n");
    match run_batch(&bad) {
        Err(HarnessError::Config(ConfigError::Invalid(v))) => {
            assert_eq!(v[0].key, "T");
            assert!(v[0].constraint.contains("power of two"));
        }
        other => panic!("{other:?}"),
    }
    let ok = cfg("protocol = \"syn-clock\"\nT = 10\nn = 100\ntrials = 1\nseed = 1\nmax_rounds = 10\n");
    assert!(ok.validate().is_ok());
}

#[test]
fn ties_and_missing_sources_are_rejected() {
    let tie = cfg("protocol = \"syn-phase-spread\"\nn = 100\nk1 = 5\nk0 = 5\ntrials = 1\nseed = 1\nmax_rounds = 10\n");
    assert!(tie.validate().unwrap_err().to_string().contains("tie"));
    let none = cfg("protocol = \"certainty\"\nn = 100\ntrials = 1\nseed = 1\nmax_rounds = 10\n");
    assert!(none.validate().is_err());
    let eps = cfg("protocol = \"phase-spread\"\nn = 100\nk1 = 6\nk0 = 5\nepsilon = 0.4\ntrials = 1\nseed = 1\nmax_rounds = 10\n");
    assert!(eps.validate().unwrap_err().to_string().contains("epsilon"));
}

#[test]
fn unused_parameters_are_rejected() {
    let c = cfg("protocol = \"maj-consensus\"\nT = 8\nn = 100\ntrials = 1\nseed = 1\nmax_rounds = 10\n");
    assert!(c.validate().unwrap_err().to_string().contains("not used"));
}

#[test]
fn sweep_shapes() {
    let c = maj(100, 2);
    assert!(sweep(&c, "n", &[]).unwrap().is_empty());
    assert!(matches!(sweep(&c, "colour", &[1.0]), Err(HarnessError::Config(ConfigError::UnknownAxis(_)))));
    let out = sweep(&c, "n", &[50.0, 100.0]).unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(out[0].report.config.n, 50);
    assert_eq!(out[1].report.config.n, 100);
}

#[test]
fn calibration_quantiles_and_failures() {
    let c = maj(500, 20);
    let lo = calibrate(&c, 0.5).unwrap();
    let hi = calibrate(&c, 0.95).unwrap();
    assert!(hi.threshold >= lo.threshold);
    assert!(hi.threshold <= c.max_rounds);
    assert!(matches!(calibrate(&c, 1.0), Err(HarnessError::Quantile(_))));

    let mut tight = c.clone();
    tight.max_rounds = 1;
    assert!(matches!(calibrate(&tight, 0.5), Err(HarnessError::PilotDiverged { .. })));
}

#[test]
fn calibrating_a_deterministic_run_gives_the_exact_round() {
    let c = cfg("protocol = \"syn-simple\"\nT = 8\nn = 40\ntrials = 3\nseed = 9\nmax_rounds = 10\n\
                 init = \"all_equal\"\ninit_value = 2\n");
    assert_eq!(calibrate(&c, 0.5).unwrap().threshold, 0);
}

#[test]
fn trace_rows_cover_every_round() {
    let mut c = maj(100, 2);
    c.hold_window = Some(5);
    let out = run_batch(&c).unwrap();
    for ((trial, rows), d) in out.traces.iter().zip(&out.report.trials_detail) {
        assert_eq!(*trial, d.trial);
        assert_eq!(rows.len() as u64, d.rounds_run + 1);
        assert!(rows.last().unwrap().legal);
    }
    let mut csv = Vec::new();
    write_trace_csv(&mut csv, &out.traces).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("trial,round,agreement_fraction,legal_flag,speakers,clock_entropy\n"));
}

#[test]
fn report_json_round_trips() {
    let out = run_batch(&maj(100, 2)).unwrap();
    let back: tinypull_harness::TrialBatchReport = serde_json::from_str(&out.report.to_json()).unwrap();
    assert_eq!(back, out.report);
    assert_eq!(back.schema_version, 1);
}

proptest! {
    #[test]
    fn quantiles_are_monotone(values in proptest::collection::vec(proptest::option::weighted(0.9, 0u64..1000), 1..60),
                              a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let rank = |q| nearest_rank(&values, q).unwrap_or(u64::MAX);
        prop_assert!(rank(lo) <= rank(hi));
    }
}
