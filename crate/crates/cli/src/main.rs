//! `tinypull`: run batches, sweeps and calibrations from a TOML config.
//!
//! Exit codes: 0 success, 1 config or usage error, 2 non-convergence under
//! `--require-convergence`. Failures print one line to stderr of the form
//! `tinypull: error[<kind>]: <message>`.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tinypull_harness::report::{SCHEMA_VERSION, SEED_POLICY};
use tinypull_harness::{
    calibrate, run_batch, sweep, write_trace_csv, BatchOutput, ConfigError, ExperimentConfig, HarnessError,
    ProtocolKind,
};

#[derive(Debug, Parser)]
#[command(name = "tinypull", version, about = "Self-stabilizing PULL-model gossip experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one batch; writes report.json and trace.csv.
    Run(RunArgs),
    /// One batch per value of a numeric parameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Parameter to vary, e.g. T or n.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Pilot batch; prints the empirical quantile of convergence rounds.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        quantile: f64,
        /// Also write calibration.json, report.json and trace.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the protocol names a config may use.
    ListProtocols,
    /// Check a config without running it.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
        /// Seed to validate with, if the file has none.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides any seed in the config.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Exit with status 2 if any trial fails to converge.
    #[arg(long)]
    require_convergence: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Config(String),
    Io(String),
    Convergence(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        let (kind, msg, code) = match self {
            Failure::Config(m) => ("config", m, 1),
            Failure::Io(m) => ("io", m, 1),
            Failure::Convergence(m) => ("convergence", m, 2),
        };
        eprintln!("tinypull: error[{kind}]: {}", one_line(&msg));
        ExitCode::from(code)
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::PilotDiverged { .. } => Failure::Convergence(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn load(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::from_path(&common.config)?;
    cfg.seed = Some(common.seed);
    if common.threads.is_some() {
        cfg.threads = common.threads;
    }
    if let Some(m) = common.max_rounds {
        cfg.max_rounds = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_outputs(dir: &Path, out: &BatchOutput) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let report = dir.join("report.json");
    fs::write(&report, out.report.to_json()).map_err(io_err(&report))?;
    let trace = dir.join("trace.csv");
    let file = fs::File::create(&trace).map_err(io_err(&trace))?;
    write_trace_csv(BufWriter::new(file), &out.traces).map_err(io_err(&trace))
}

fn summary(out: &BatchOutput) -> String {
    let r = &out.report;
    let q = |x: Option<u64>| x.map_or_else(|| "-".to_string(), |v| v.to_string());
    format!("{}: {}/{} converged, p50 {}, p95 {}", r.protocol, r.converged, r.trials, q(r.p50), q(r.p95))
}

fn check_convergence(outputs: &[&BatchOutput], required: bool) -> Result<(), Failure> {
    if !required {
        return Ok(());
    }
    let failed: u64 = outputs.iter().map(|o| o.report.trials - o.report.converged).sum();
    let total: u64 = outputs.iter().map(|o| o.report.trials).sum();
    if failed > 0 {
        return Err(Failure::Convergence(format!("{failed}/{total} trials did not converge")));
    }
    Ok(())
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(args) => {
            let cfg = load(&args.common)?;
            let out = run_batch(&cfg)?;
            write_outputs(&args.out, &out)?;
            println!("{}", summary(&out));
            check_convergence(&[&out], args.common.require_convergence)
        }
        Command::Sweep { run, axis, values } => {
            let cfg = load(&run.common)?;
            let outs = sweep(&cfg, &axis, &values)?;
            let mut points = Vec::new();
            for (v, out) in values.iter().zip(&outs) {
                let dir_name = format!("{axis}={}", format_value(*v));
                write_outputs(&run.out.join(&dir_name), out)?;
                println!("{axis}={}: {}", format_value(*v), summary(out));
                points.push(serde_json::json!({
                    "value": v,
                    "dir": dir_name,
                    "success_rate": out.report.success_rate,
                    "p50": out.report.p50,
                    "p95": out.report.p95,
                }));
            }
            let index = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "axis": axis,
                "seed_policy": SEED_POLICY,
                "points": points,
            });
            fs::create_dir_all(&run.out).map_err(io_err(&run.out))?;
            let path = run.out.join("sweep.json");
            let text = serde_json::to_string_pretty(&index).expect("sweep index serializes") + "\n";
            fs::write(&path, text).map_err(io_err(&path))?;
            check_convergence(&outs.iter().collect::<Vec<_>>(), run.common.require_convergence)
        }
        Command::Calibrate { common, quantile, out } => {
            let cfg = load(&common)?;
            let cal = calibrate(&cfg, quantile)?;
            if let Some(dir) = out {
                write_outputs(&dir, &cal.output)?;
                let doc = serde_json::json!({
                    "schema_version": SCHEMA_VERSION,
                    "quantile": cal.quantile,
                    "threshold": cal.threshold,
                    "trials": cal.output.report.trials,
                });
                let path = dir.join("calibration.json");
                let text = serde_json::to_string_pretty(&doc).expect("calibration serializes") + "\n";
                fs::write(&path, text).map_err(io_err(&path))?;
            }
            println!("{}", cal.threshold);
            Ok(())
        }
        Command::ListProtocols => {
            for k in ProtocolKind::ALL {
                let params = k.param_names().join(" ");
                println!("{:<18} {:<24} {}", k.name(), params, k.summary());
            }
            Ok(())
        }
        Command::ValidateConfig { config, seed } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if seed.is_some() {
                cfg.seed = seed;
            }
            let v = cfg.validate()?;
            println!("ok: {} n={} trials={} seed={}", v.kind.name(), cfg.n, cfg.trials, v.seed);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let head: Vec<&str> = msg.lines().take_while(|l| !l.is_empty() && !l.starts_with("Usage")).collect();
            return Failure::Config(head.join(" ").trim_start_matches("error: ").to_string()).report();
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
