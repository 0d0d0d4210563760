//! `msqpc`: seeded protocol runs, attack experiments, sweeps and the worked
//! example.

mod example;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use msqpc_core::adversary::{monte_carlo_detection, DetectionRow};
use msqpc_core::protocol::{random_inputs, run_protocol, write_event_lines};
use msqpc_core::{AttackSpec, ChannelStack, Dimension, ProtocolConfig, RunReport, RunStatus};

#[derive(Parser)]
#[command(
    name = "msqpc",
    version,
    about = "Multi-party semiquantum private comparison simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the protocol once and write a JSON report.
    Run(RunArgs),
    /// Run a Monte Carlo detection experiment for one attack.
    Attack(AttackArgs),
    /// Detection table over several dimensions and attacks, as CSV.
    Sweep(SweepArgs),
    /// Replay the four-user worked example at d = 19 and print every step.
    Example,
}

fn parse_dimension(s: &str) -> Result<Dimension, String> {
    let d: usize = s
        .parse()
        .map_err(|_| format!("'{s}' is not a positive integer"))?;
    Dimension::new(d).map_err(|e| e.to_string())
}

fn parse_attack(s: &str) -> Result<AttackSpec, String> {
    s.parse().map_err(|e: msqpc_core::Error| e.to_string())
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Qudit dimension (odd, at least 3).
    #[arg(long, default_value = "5", value_parser = parse_dimension)]
    d: Dimension,
    /// Number of classical users N.
    #[arg(long, default_value_t = 2)]
    users: usize,
    /// Comparison length L.
    #[arg(long, default_value_t = 1)]
    length: usize,
    /// Master seed.
    #[arg(long, env = "MSQPC_SEED", default_value_t = 0)]
    seed: u64,
    /// Sequence length as a multiple of L.
    #[arg(long, default_value_t = ProtocolConfig::DEFAULT_MULTIPLIER)]
    multiplier: usize,
    /// Reruns allowed after a Case-8 shortfall.
    #[arg(long, default_value_t = 0)]
    retries: u32,
}

impl ConfigArgs {
    fn config(&self, d: Dimension) -> msqpc_core::Result<ProtocolConfig> {
        ProtocolConfig::new(d, self.users, self.length, self.seed)?
            .with_multiplier(self.multiplier)?
            .with_retries(self.retries)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Eavesdropper installed on the channel.
    #[arg(long, default_value = "none", value_parser = parse_attack)]
    attack: AttackSpec,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the event log as JSON lines.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Include wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_parser = parse_attack)]
    attack: AttackSpec,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the detection table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Dimensions, comma separated.
    #[arg(long = "dims", value_delimiter = ',', default_value = "3,5", value_parser = parse_dimension)]
    dims: Vec<Dimension>,
    /// Attacks, comma separated.
    #[arg(long = "attacks", value_delimiter = ',', default_value = "ir-v1,ir-v2,ir-v3", value_parser = parse_attack)]
    attacks: Vec<AttackSpec>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_RUNTIME: u8 = 1;

fn status_code(status: RunStatus) -> u8 {
    match status {
        RunStatus::Completed => 0,
        RunStatus::AbortedStep4Eavesdrop => 3,
        RunStatus::AbortedInsufficientCase8 => 4,
        RunStatus::AbortedStep5ErrorRate => 5,
    }
}

fn emit(path: Option<&PathBuf>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

type CliResult = Result<u8, Box<dyn std::error::Error>>;

fn cmd_run(args: RunArgs) -> CliResult {
    let start = Instant::now();
    let cfg = args.config.config(args.config.d)?;
    let strategy = args.attack.build(cfg.d)?;
    let (inputs, key) = random_inputs(&cfg);
    let transcript = run_protocol(&cfg, &inputs, &key, &ChannelStack::new(strategy))?;
    if let Some(path) = &args.events {
        let mut buf = Vec::new();
        write_event_lines(&transcript.events, &mut buf)?;
        fs::write(path, buf)?;
    }
    let mut report = RunReport::from_transcript(&transcript, &args.attack.to_string())?;
    if args.timing {
        report = report.with_timing(start.elapsed().as_secs_f64() * 1e3);
    }
    emit(args.out.as_ref(), &(report.to_json() + "\n"))?;
    Ok(status_code(transcript.status()))
}

fn csv_table(rows: &[DetectionRow]) -> String {
    let mut s = String::from(DetectionRow::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

fn cmd_attack(args: AttackArgs) -> CliResult {
    let start = Instant::now();
    let cfg = args.config.config(args.config.d)?;
    let strategy = args.attack.build(cfg.d)?;
    let (inputs, key) = random_inputs(&cfg);
    let channel = ChannelStack::new(strategy);
    let transcript = run_protocol(&cfg, &inputs, &key, &channel)?;
    let stats = monte_carlo_detection(&cfg, &channel.strategy, args.trials)?;
    if let Some(path) = &args.csv {
        fs::write(path, csv_table(&stats.rows()))?;
    }
    let mut report =
        RunReport::from_transcript(&transcript, &args.attack.to_string())?.with_detection(stats);
    if args.timing {
        report = report.with_timing(start.elapsed().as_secs_f64() * 1e3);
    }
    emit(args.out.as_ref(), &(report.to_json() + "\n"))?;
    Ok(0)
}

fn cmd_sweep(args: SweepArgs) -> CliResult {
    let mut rows = Vec::new();
    for &d in &args.dims {
        let cfg = args.config.config(d)?;
        for attack in &args.attacks {
            let strategy = attack.build(d)?;
            rows.extend(monte_carlo_detection(&cfg, &strategy, args.trials)?.rows());
        }
    }
    emit(args.out.as_ref(), &csv_table(&rows))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Example => example::run(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
