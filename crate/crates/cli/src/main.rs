//! `icsfuzz`: run campaigns, replay executions, sweep step sizes and IoU
//! thresholds, and render success-rate reports.
//!
//! Exit codes: 0 ok, 1 config error, 2 I/O error, 3 invariant violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use icsfuzz::error::Error;
use icsfuzz::fuzzer::{
    ablation_set, read_log, replay, run_campaign, step_size_sweep, CampaignConfig, SweepAxis,
};
use icsfuzz::oracle::{recall_sweep, ScenarioType};
use icsfuzz::report::{export, success_rates, BucketScheme, ExportFormat};
use icsfuzz::scenario::ScenarioKind;
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "icsfuzz", version, about = "Fuzz driving scenarios for ignored collisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign and write the log, manifest, config and CSV report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-execute one logged record and check its verdict.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        ordinal: usize,
        /// Defaults to config.json next to the log.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Count ICSs for each step size along one axis.
    SweepStep {
        #[arg(long)]
        kind: ScenarioKind,
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Precision and recall of the IC verdict per IoU threshold.
    SweepThreshold {
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render a success-rate report from a campaign log.
    Report {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value = "csv")]
        format: ExportFormat,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Io(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Io(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::Invariant(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io(_) | Error::Json(_) => Failure::Io(msg),
            Error::NonFinite { .. } => Failure::Invariant(msg),
            Error::Config(_)
            | Error::Param(_)
            | Error::InvalidSeed(_)
            | Error::SweepExhausted(_)
            | Error::EmptyInput(_) => Failure::Config(msg),
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> Outcome<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> Outcome<(CampaignConfig, Vec<u8>)> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::Config(format!("{}: not UTF-8", path.display())))?;
    let cfg = CampaignConfig::from_json(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok((cfg, bytes))
}

fn optional_config(path: Option<&Path>) -> Outcome<CampaignConfig> {
    match path {
        Some(p) => Ok(load_config(p)?.0),
        None => Ok(CampaignConfig::default()),
    }
}

fn load_log(path: &Path) -> Outcome<Vec<icsfuzz::fuzzer::OutcomeRecord>> {
    let text = String::from_utf8(read(path)?)
        .map_err(|_| Failure::Io(format!("{}: not UTF-8", path.display())))?;
    read_log(&text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn cmd_run(config: &Path, out: &Path) -> Outcome {
    let (cfg, bytes) = load_config(config)?;
    fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    let started = Instant::now();
    let mut result = run_campaign(&cfg)?;
    let wall = started.elapsed().as_secs_f64();
    result.manifest.config_digest = hex::encode(Sha256::digest(&bytes));

    let executions: usize = result.manifest.totals.values().sum();
    if executions != result.records.len() || result.records.len() > cfg.budget {
        return Err(Failure::Invariant(format!(
            "manifest counts {executions} executions, log has {}, budget {}",
            result.records.len(),
            cfg.budget
        )));
    }

    let mut log = Vec::new();
    result.write_log(&mut log)?;
    let manifest = serde_json::to_vec_pretty(&result.manifest).map_err(Error::from)?;
    let report = success_rates(&result.records, &BucketScheme::default())?;
    write(&out.join("log.jsonl"), &log)?;
    write(&out.join("manifest.json"), &manifest)?;
    write(&out.join("config.json"), cfg.to_json().as_bytes())?;
    write(&out.join("report.csv"), export(&report, ExportFormat::Csv).as_bytes())?;

    for k in &report.summary {
        let first = k
            .time_to_first_ics
            .map_or_else(|| "-".to_string(), |t| format!("{t:.1}s"));
        println!(
            "{:<4} executions {:>6}  ICS {:>5}  collisions {:>5}  proportion {:>6.2}%  first ICS at {first}",
            k.kind.as_str(),
            k.executions,
            k.ics,
            k.collisions,
            100.0 * k.proportion
        );
    }
    println!(
        "total {} executions in {wall:.1}s wall, written to {}",
        result.records.len(),
        out.display()
    );
    Ok(())
}

fn cmd_replay(log: &Path, ordinal: usize, config: Option<&Path>) -> Outcome {
    let records = load_log(log)?;
    let record = records
        .iter()
        .find(|r| r.ordinal == ordinal)
        .ok_or_else(|| Failure::Config(format!("ordinal {ordinal} is not in {}", log.display())))?;
    let config_path = match config {
        Some(p) => p.to_path_buf(),
        None => log.parent().unwrap_or(Path::new(".")).join("config.json"),
    };
    let (cfg, _) = load_config(&config_path)?;
    let exec = replay(record, &cfg)?;
    let contact = exec
        .trace
        .first_contact_time()
        .map_or_else(|| "none".to_string(), |t| format!("{t:.2}s"));
    println!(
        "#{ordinal} {} d={} v={} theta_long={} theta_lat={}: {} (logged {}), first contact {contact}",
        record.kind.as_str(),
        record.params.d,
        record.params.v_hat,
        record.params.theta_long,
        record.params.theta_lat,
        exec.verdict.as_str(),
        record.verdict.as_str()
    );
    if exec.verdict != record.verdict {
        return Err(Failure::Invariant(format!(
            "replayed verdict {} differs from logged {}",
            exec.verdict.as_str(),
            record.verdict.as_str()
        )));
    }
    Ok(())
}

fn cmd_sweep_step(
    kind: ScenarioKind,
    axis: SweepAxis,
    steps: &[f64],
    trials: usize,
    config: Option<&Path>,
) -> Outcome {
    let cfg = optional_config(config)?;
    let points = step_size_sweep(kind, axis, steps, trials, &cfg)?;
    println!("step,mean_ics,counts");
    for p in points {
        let counts: Vec<String> = p.counts.iter().map(|c| c.to_string()).collect();
        println!("{},{:.2},{}", p.step, p.mean_ics, counts.join(" "));
    }
    Ok(())
}

fn cmd_sweep_threshold(thresholds: &[f64], config: Option<&Path>) -> Outcome {
    let cfg = optional_config(config)?;
    let set = ablation_set(&cfg.defect, &cfg.sim, &cfg.scene)?;
    let points = recall_sweep(&set, thresholds, &cfg.defect)?;
    let fmt = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:.3}"));
    println!("threshold,true_positives,false_positives,false_negatives,precision,recall");
    for p in points {
        println!(
            "{},{},{},{},{},{}",
            p.threshold,
            p.true_positives,
            p.false_positives,
            p.false_negatives,
            fmt(p.precision),
            fmt(p.recall)
        );
    }
    Ok(())
}

fn cmd_report(log: &Path, format: ExportFormat, out: Option<&Path>) -> Outcome {
    let records = load_log(log)?;
    let report = success_rates(&records, &BucketScheme::default())?;
    for table in &report.axes {
        let n: usize = table.buckets.iter().map(|(_, s)| s.executions).sum();
        if n != records.len() {
            return Err(Failure::Invariant(format!(
                "{} buckets hold {n} of {} executions",
                table.axis.as_str(),
                records.len()
            )));
        }
    }
    let ics = records.iter().filter(|r| r.verdict == ScenarioType::IC).count();
    let text = export(&report, format);
    match out {
        Some(p) => {
            write(p, text.as_bytes())?;
            eprintln!("{} executions, {ics} ICS, written to {}", records.len(), p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Run { config, out } => cmd_run(&config, &out),
        Command::Replay { log, ordinal, config } => cmd_replay(&log, ordinal, config.as_deref()),
        Command::SweepStep {
            kind,
            axis,
            steps,
            trials,
            config,
        } => cmd_sweep_step(kind, axis, &steps, trials, config.as_deref()),
        Command::SweepThreshold { thresholds, config } => {
            cmd_sweep_threshold(&thresholds, config.as_deref())
        }
        Command::Report { log, format, out } => cmd_report(&log, format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
