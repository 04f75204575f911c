use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uw_core::scenario::{self, ReportDocument, RunOptions, ScenarioConfig, ScenarioKind, ScenarioOutcome, StateSpec};
use uw_core::{Error, Result};

#[derive(Parser)]
#[command(name = "uw", version, about = "Entanglement and steering detection from uncertainty relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Write the machine-readable report here.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Write scan results as CSV here.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Seed for every randomized step (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Restarts for numeric bound searches.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Suppress the text report.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { config: PathBuf },
    /// Run a built-in scenario.
    Preset {
        name: String,
        /// Replace the preset's state, e.g. `maximally_mixed` or `werner:0.8`.
        #[arg(long)]
        state: Option<String>,
    },
    /// List the built-in scenarios.
    Presets,
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("UW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::ConfigParse(format!("UW_THREADS must be a non-negative integer, got `{raw}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::ConfigParse(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::ConfigParse(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::ConfigParse(format!("cannot write {}: {e}", path.display())))
}

fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn verdict_text(detected: bool, certified: bool) -> &'static str {
    match (detected, certified) {
        (true, true) => "Detected",
        (true, false) => "Uncertified",
        _ => "NotDetected",
    }
}

fn render(outcome: &ScenarioOutcome, doc: &ReportDocument) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    for b in &outcome.bounds {
        line(format!("ω = {}", vector(&b.omega)));
        line(format!("{} of ω = {:.6}", b.quantifier_name, b.quantifier_value));
        if let Some(mu) = b.maassen_uffink {
            line(format!("maassen_uffink = {mu:.6}"));
        }
        if let Some(fg) = b.fine_grained {
            line(format!("fine_grained_bound = {fg:.6}"));
        }
        if let Some(m) = b.mub_formula {
            line(format!("mub_fine_grained_bound = {m:.6}"));
        }
    }
    for r in &outcome.reports {
        let mut s = format!(
            "{}: lhs={:.6} bound={:.6} margin={:.6} verdict={} certified={}",
            r.criterion,
            r.lhs_value,
            r.bound_value,
            r.margin,
            verdict_text(r.detected(), r.certified),
            r.certified
        );
        if let Some(q) = &r.quantifier_name {
            s.push_str(&format!(" quantifier={q}"));
        }
        if let Some(c) = &r.column {
            s.push_str(&format!(" column={c}"));
        }
        line(s);
    }
    for c in &outcome.censuses {
        line(format!(
            "{}: samples={} violations={} worst_margin={:.6} seed={}",
            c.name, c.census.samples, c.census.violations, c.census.worst_margin, c.census.seed
        ));
    }
    if let Some(scan) = &outcome.scan {
        line(format!(
            "scan {} {}: {} points, bound={:.6}, flips={}",
            scan.family.name(),
            scan.criterion,
            scan.parameter_grid.len(),
            scan.bound,
            scan.flips()
        ));
        match scan.threshold_estimate {
            Some(t) => line(format!("threshold={t:.6} (tolerance {:.0e})", scan.bisection_tolerance)),
            None => line("threshold=none".into()),
        }
    }
    if !outcome.reports.is_empty() {
        line(format!("result: {}", doc.verdict));
    }
    out
}

fn execute(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    let cfg = match &cli.command {
        Command::Presets => {
            for p in scenario::PRESETS {
                println!("{p}");
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Run { config } => load(config)?,
        Command::Preset { name, state } => {
            let mut cfg = ScenarioConfig::preset(name)?;
            if let Some(s) = state {
                cfg.state = Some(StateSpec::parse_short(s)?);
            }
            cfg
        }
    };
    if cli.flags.csv.is_some() && cfg.scenario_kind != ScenarioKind::Scan {
        return Err(Error::ConfigParse("--csv only applies to scan scenarios".into()));
    }
    let opts = RunOptions {
        seed: cli.flags.seed,
        restarts: cli.flags.restarts,
    };
    let outcome = scenario::run(&cfg, &opts)?;
    let detected = outcome.detected();
    let doc = ReportDocument::new(&cfg, outcome.clone());
    if let Some(path) = &cli.flags.json {
        let text = serde_json::to_string_pretty(&doc).expect("report serializes");
        write(path, &text)?;
    }
    if let (Some(path), Some(scan)) = (&cli.flags.csv, &outcome.scan) {
        write(path, &scan.to_csv())?;
    }
    if !cli.flags.quiet {
        print!("{}", render(&outcome, &doc));
    }
    Ok(if detected { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
