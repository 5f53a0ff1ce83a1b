//! `dutycycle`: generate harvest traces, run the duty cycling algorithms on
//! them, and run the verification suites.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage or input
//! error.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use dutycycle::energy_model::{read_binary_csv, read_raw_csv, threshold_trace, write_binary_csv, BINARY_CSV_HEADER, RAW_CSV_HEADER};
use dutycycle::harness::{evaluate_pair, heterogeneity_sweep, SweepSpec, TESTBED_PERIOD};
use dutycycle::metrics::{write_pair_metrics_csv, PairMetrics};
use dutycycle::{
    build_graph, generate_pair, offline_duty_cycle, verify_suite, Activation, Efficiency, EnergyTrace, OnlineConfig, OnlineMode,
    Probability, Suite,
};

/// Seed used when neither `--seed` nor `DUTYCYCLE_SEED` is given.
const DEFAULT_SEED: u64 = 2015;
const DEFAULT_WARMUP: usize = 60;

#[derive(Parser)]
#[command(name = "dutycycle", version, about = "Duty cycling for pairs of energy-harvesting devices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic two-device binary trace as `slot,b_u,b_v` CSV.
    Generate {
        /// Slots per period; the default is 10 hours of 1-minute slots.
        #[arg(long, default_value_t = TESTBED_PERIOD)]
        period: usize,
        /// Per-slot harvest probability of both devices.
        #[arg(long, value_parser = parse_prob)]
        prob: Probability,
        #[arg(long, env = "DUTYCYCLE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the offline and/or online algorithm on a trace file or a
    /// synthetic pair.
    Run {
        /// Binary (`slot,b_u,b_v`) or raw (`slot,device_id,reading`) trace CSV.
        #[arg(long, conflicts_with = "prob", required_unless_present = "prob")]
        trace: Option<PathBuf>,
        /// Generate a synthetic pair with this harvest probability.
        #[arg(long, value_parser = parse_prob)]
        prob: Option<Probability>,
        #[arg(long, value_parser = parse_eta, default_value = "0.75")]
        eta: Efficiency,
        #[arg(long, value_enum, default_value_t = Algo::Both)]
        algo: Algo,
        #[arg(long, value_enum, default_value_t = Mode::Matching)]
        mode: Mode,
        #[arg(long, env = "DUTYCYCLE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Slots per period for synthetic pairs and raw traces.
        #[arg(long)]
        period: Option<usize>,
        /// Readings at or above this value count as a harvest slot (raw traces).
        #[arg(long)]
        threshold: Option<f64>,
        /// Slots a device observes to estimate its activation probability
        /// when running on a trace file.
        #[arg(long, default_value_t = DEFAULT_WARMUP)]
        warmup: usize,
    },
    /// Run a verification suite and print one PASS/FAIL line per check.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        /// Overrides the suite's default trial count.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, env = "DUTYCYCLE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Sweep heterogeneous probability pairs and report binned trends as JSON.
    Sweep {
        #[arg(long, default_value_t = TESTBED_PERIOD)]
        period: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, value_parser = parse_eta, default_value = "0.75")]
        eta: Efficiency,
        #[arg(long, value_enum, default_value_t = Mode::Slotsim)]
        mode: Mode,
        #[arg(long, env = "DUTYCYCLE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        bin_width: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Algo {
    Offline,
    Online,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Matching,
    Slotsim,
}

impl From<Mode> for OnlineMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Matching => OnlineMode::Matching,
            Mode::Slotsim => OnlineMode::SlotSim,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    T1,
    T2,
    T4,
    Bins,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::T1 => Suite::T1,
            SuiteArg::T2 => Suite::T2,
            SuiteArg::T4 => Suite::T4,
            SuiteArg::Bins => Suite::Bins,
            SuiteArg::All => Suite::All,
        }
    }
}

fn parse_prob(s: &str) -> Result<Probability, String> {
    let p: f64 = s.parse().map_err(|e| format!("{e}"))?;
    Probability::new(p).map_err(|_| format!("{p} is outside [0, 1]"))
}

fn parse_eta(s: &str) -> Result<Efficiency, String> {
    let eta: f64 = s.parse().map_err(|e| format!("{e}"))?;
    Efficiency::new(eta).map_err(|_| format!("{eta} is outside (0, 1]"))
}

/// A failed verification check, as opposed to a usage or input error.
#[derive(Debug)]
struct ChecksFailed;

impl std::fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for ChecksFailed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<ChecksFailed>() => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> anyhow::Result<()> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match command {
        Command::Generate { period, prob, seed, out: path } => {
            if period == 0 {
                bail!("--period must be at least 1");
            }
            let (u, v) = generate_pair(prob.get(), prob.get(), period, seed)?;
            match path {
                Some(p) => {
                    let file = File::create(&p).with_context(|| format!("cannot write {}", p.display()))?;
                    write_binary_csv(BufWriter::new(file), &u, &v)?;
                }
                None => write_binary_csv(&mut out, &u, &v)?,
            }
        }
        Command::Run { trace, prob, eta, algo, mode, seed, format, period, threshold, warmup } => {
            let opts = RunOptions { eta, algo, mode: mode.into(), seed, format, period, threshold, warmup };
            run(&mut out, trace.as_deref(), prob, &opts)?;
        }
        Command::Verify { suite, trials, seed } => {
            let suite = Suite::from(suite);
            let report = verify_suite(suite, trials, seed)?;
            let trials = trials.map_or_else(|| "default".to_string(), |t| t.to_string());
            writeln!(out, "# config: suite={suite} trials={trials} seed={seed}")?;
            for line in &report.config {
                writeln!(out, "# {line}")?;
            }
            for check in &report.checks {
                writeln!(out, "{}", check.line())?;
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            writeln!(out, "{} of {} checks passed", report.checks.len() - failed, report.checks.len())?;
            out.flush()?;
            if failed > 0 {
                return Err(ChecksFailed.into());
            }
        }
        Command::Sweep { period, trials, eta, mode, seed, bin_width } => {
            let spec = SweepSpec { period_len: period, grid: SweepSpec::default_grid(), eta, trials, seed, mode: mode.into(), bin_width };
            let report = heterogeneity_sweep(&spec)?;
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

struct RunOptions {
    eta: Efficiency,
    algo: Algo,
    mode: OnlineMode,
    seed: u64,
    format: Format,
    period: Option<usize>,
    threshold: Option<f64>,
    warmup: usize,
}

/// Loads trace pairs from a file: one pair for a binary trace, consecutive
/// devices in order of first appearance for a raw trace.
fn load_pairs(path: &Path, opts: &RunOptions) -> anyhow::Result<Vec<(EnergyTrace, EnergyTrace)>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let header = text.lines().next().unwrap_or("").trim_end();
    if header == BINARY_CSV_HEADER {
        if opts.threshold.is_some() {
            bail!("--threshold applies to raw traces only");
        }
        let (u, v) = read_binary_csv(text.as_bytes()).with_context(|| format!("in {}", path.display()))?;
        if let Some(p) = opts.period {
            if p != u.period_len() {
                bail!("--period {p} does not match the {} rows of {}", u.period_len(), path.display());
            }
        }
        Ok(vec![(u, v)])
    } else if header == RAW_CSV_HEADER {
        let Some(threshold) = opts.threshold else {
            bail!("raw trace {} needs --threshold", path.display());
        };
        let period = opts.period.unwrap_or(TESTBED_PERIOD);
        let raws = read_raw_csv(text.as_bytes()).with_context(|| format!("in {}", path.display()))?;
        if raws.len() % 2 != 0 {
            bail!("raw trace {} has {} devices; pairs need an even count", path.display(), raws.len());
        }
        let traces = raws
            .iter()
            .map(|r| threshold_trace(r, threshold, period))
            .collect::<dutycycle::Result<Vec<_>>>()
            .with_context(|| format!("in {}", path.display()))?;
        let mut it = traces.into_iter();
        let mut pairs = Vec::new();
        while let (Some(u), Some(v)) = (it.next(), it.next()) {
            pairs.push((u, v));
        }
        Ok(pairs)
    } else {
        bail!("{}: unrecognized header `{header}`; expected `{BINARY_CSV_HEADER}` or `{RAW_CSV_HEADER}`", path.display())
    }
}

#[derive(Serialize)]
struct PairOutput {
    pair_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    offline: Option<dutycycle::OfflineResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    online: Option<dutycycle::OnlineResult>,
    metrics: Vec<PairMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
}

fn run<W: Write>(out: &mut W, trace: Option<&Path>, prob: Option<Probability>, opts: &RunOptions) -> anyhow::Result<()> {
    if opts.warmup == 0 {
        bail!("--warmup must be at least 1");
    }
    let (pairs, activation, source) = match (trace, prob) {
        (Some(path), _) => {
            (load_pairs(path, opts)?, Activation::Warmup { slots: opts.warmup }, json!({ "trace": path.display().to_string() }))
        }
        (None, Some(p)) => {
            if opts.threshold.is_some() {
                bail!("--threshold applies to raw traces only");
            }
            let period = opts.period.unwrap_or(TESTBED_PERIOD);
            if period == 0 {
                bail!("--period must be at least 1");
            }
            let pair = generate_pair(p.get(), p.get(), period, opts.seed)?;
            (vec![pair], Activation::Fixed { u: p, v: p }, json!({ "prob": p, "period": period }))
        }
        (None, None) => bail!("one of --trace or --prob is required"),
    };
    let cfg = OnlineConfig { activation, eta: opts.eta, seed: opts.seed, mode: opts.mode };
    let config = json!({
        "source": source,
        "eta": opts.eta,
        "algo": opts.algo,
        "mode": opts.mode,
        "seed": opts.seed,
        "activation": activation,
    });

    let mut outputs = Vec::new();
    for (i, (u, v)) in pairs.iter().enumerate() {
        let pair_id = (i + 1).to_string();
        let entry = match opts.algo {
            Algo::Both => {
                let (off, on, row) = evaluate_pair(&pair_id, u, v, opts.eta, &cfg).with_context(|| format!("pair {pair_id}"))?;
                PairOutput { pair_id, offline: Some(off), online: Some(on), metrics: vec![row.offline, row.online], ratio: Some(row.ratio) }
            }
            Algo::Offline => {
                let off = offline_duty_cycle(&build_graph(u, v, opts.eta)?);
                let m = PairMetrics::new(format!("{pair_id}/offline"), off.cat_total, off.sat_total, u, v)?;
                PairOutput { pair_id, offline: Some(off), online: None, metrics: vec![m], ratio: None }
            }
            Algo::Online => {
                let on = dutycycle::online_duty_cycle(u, v, &cfg).with_context(|| format!("pair {pair_id}"))?;
                let m = PairMetrics::new(format!("{pair_id}/online-{}", opts.mode.name()), on.cat_total, on.sat_total, u, v)?;
                PairOutput { pair_id, offline: None, online: Some(on), metrics: vec![m], ratio: None }
            }
        };
        outputs.push(entry);
    }

    match opts.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &json!({ "config": config, "pairs": outputs }))?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "# config: {config}")?;
            for o in &outputs {
                if let Some(r) = o.ratio {
                    writeln!(out, "# ratio pair {}: {r}", o.pair_id)?;
                }
            }
            let rows: Vec<PairMetrics> = outputs.into_iter().flat_map(|o| o.metrics).collect();
            write_pair_metrics_csv(&mut *out, &rows)?;
        }
    }
    Ok(())
}
