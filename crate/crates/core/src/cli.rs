//! `lipuncert` command line.
//!
//! Exit codes: `0` completed without exact violations, `2` at least one exact
//! violation (the report is still written), `1` usage, configuration or I/O
//! error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::harness::{
    evaluate_case, run_campaign, run_campaign_with_workers, search_counterexample, write_report, CampaignConfig,
    CampaignReport, ReportFormat, SearchOutcome, TrialCase, TrialRecord, TrialStatus, Witness,
};
use crate::lipnorm::LipEstimate;
use crate::model::{derive_seed, generate_instance, GenConfig, Instance, Mode};
use crate::space::NormSpec;
use crate::uncertainty::{hilbert_reduction_check, nabla, ChainOptions, Tolerance};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "lipuncert", version, about = "Uncertainty chains for Lipschitz maps on finite-dimensional l_p spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a seeded verification campaign and write the report.
    Verify(CampaignArgs),
    /// Probe the last link of the nonlinear chain for counterexamples.
    Search(SearchArgs),
    /// Compare nabla(<., h>, A, h) with ||Ah - <Ah,h>h|| on random Hermitian pairs.
    Reduce(ReduceArgs),
    /// Estimate nabla(f, A, x) by sampling and refinement, next to its exact value when linear.
    Lipnorm(LipnormArgs),
    /// Recompute a saved trial case or witness.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone)]
struct CampaignArgs {
    /// Instance family.
    #[arg(long, value_enum, default_value_t = Mode::Hilbert)]
    mode: Mode,
    /// Number of trials.
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Campaign seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Space dimension (at least 2).
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Largest dimension; trials draw dimensions from dim..=dim-max. Defaults to --dim.
    #[arg(long)]
    dim_max: Option<usize>,
    /// Norm exponent p in [1, inf]; ignored in hilbert mode (always 2).
    #[arg(long, default_value = "2")]
    p: NormSpec,
    /// Points per domain cloud, including 0 and x.
    #[arg(long, default_value_t = 64)]
    cloud_size: usize,
    /// Refinement probes per estimated Lipschitz norm.
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    /// Chain tolerance; a slack fails below -(tol + tol * max term).
    #[arg(long, default_value = "1e-10")]
    tol: f64,
    /// Report format.
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
    /// Report destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl CampaignArgs {
    fn config(&self) -> CampaignConfig {
        CampaignConfig {
            mode: self.mode,
            trials: self.trials,
            seed: self.seed,
            dim: self.dim,
            dim_max: self.dim_max.unwrap_or(self.dim),
            p: if self.mode == Mode::Hilbert { NormSpec::L2 } else { self.p },
            cloud_size: self.cloud_size,
            refine_budget: self.budget,
            tol: Tolerance::uniform(self.tol),
            identity_tol: Tolerance::IDENTITY,
        }
    }
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Instance family; only banach-nonlinear is accepted.
    #[arg(long, value_enum, default_value_t = Mode::BanachNonlinear)]
    mode: Mode,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Largest dimension. Defaults to --dim.
    #[arg(long)]
    dim_max: Option<usize>,
    #[arg(long, default_value = "2")]
    p: NormSpec,
    #[arg(long, default_value_t = 64)]
    cloud_size: usize,
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    #[arg(long, default_value = "1e-10")]
    tol: f64,
    /// Destination of the search outcome (JSON, replayable).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Largest dimension. Defaults to --dim.
    #[arg(long)]
    dim_max: Option<usize>,
    /// Relative tolerance: |nabla - delta| <= tol * (1 + delta).
    #[arg(long, default_value = "1e-9")]
    tol: f64,
    /// JSON Lines destination, one object per trial.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LipnormArgs {
    #[arg(long, value_enum, default_value_t = Mode::BanachLinear)]
    mode: Mode,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value = "2")]
    p: NormSpec,
    #[arg(long, default_value_t = 64)]
    cloud_size: usize,
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    /// JSON Lines destination, one object per trial.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// Trial case, witness, search outcome or bare instance (JSON).
    #[arg(long)]
    instance: PathBuf,
    /// Destination of the recomputed trial record (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    eprint!("{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Verify(args) => verify(&args, stdout),
        Command::Search(args) => search(&args, stdout),
        Command::Reduce(args) => reduce(&args, stdout),
        Command::Lipnorm(args) => lipnorm(&args, stdout),
        Command::Replay(args) => replay(&args, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn write_jsonl<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn print_summary(report: &CampaignReport, out: &mut dyn Write) -> Result<()> {
    let c = &report.config;
    let n = &report.counts;
    writeln!(out, "mode {} trials {} seed {} dim {}..={} p {}", c.mode, c.trials, c.seed, c.dim, c.dim_max, c.p)?;
    writeln!(
        out,
        "passed {} empirical_negative {} violations {} skipped {}",
        n.passed, n.empirical_negative, n.violations, n.skipped
    )?;
    for (key, v) in &report.min_slack {
        writeln!(out, "  min slack {key:<48} {v:.6e}")?;
    }
    if let Some(w) = &report.worst {
        writeln!(out, "worst {} = {:.6e} at trial {} (seed {})", w.slack_name, w.slack, w.case.trial, w.case.seed)?;
    }
    Ok(())
}

fn verify(args: &CampaignArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = args.config();
    let report = if args.workers == 0 { run_campaign(&cfg)? } else { run_campaign_with_workers(&cfg, args.workers)? };
    if let Some(path) = &args.out {
        write_report(&report, args.format, path)?;
    }
    print_summary(&report, out)?;
    Ok(if report.has_violation() { EXIT_VIOLATION } else { EXIT_OK })
}

fn search(args: &SearchArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = CampaignConfig {
        mode: args.mode,
        trials: args.trials,
        seed: args.seed,
        dim: args.dim,
        dim_max: args.dim_max.unwrap_or(args.dim),
        p: args.p,
        cloud_size: args.cloud_size,
        refine_budget: args.budget,
        tol: Tolerance::uniform(args.tol),
        identity_tol: Tolerance::IDENTITY,
    };
    let outcome: SearchOutcome = search_counterexample(&cfg)?;
    if let Some(path) = &args.out {
        write_json(&outcome, path)?;
    }
    let n = &outcome.counts;
    writeln!(out, "trials {} skipped {} empirical_negative {}", outcome.trials_run, n.skipped, n.empirical_negative)?;
    match &outcome.counterexample {
        Some(w) => writeln!(out, "candidate counterexample: trial {} slack {:.6e}", w.case.trial, w.slack)?,
        None => writeln!(out, "no candidate beyond the estimate margin")?,
    }
    if let Some(w) = &outcome.min_slack {
        writeln!(out, "min {} = {:.6e} at trial {}", w.slack_name, w.slack, w.case.trial)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ReductionRow {
    trial: u64,
    seed: u64,
    dim: usize,
    nabla: f64,
    delta: f64,
    discrepancy: f64,
    holds: bool,
}

fn reduce(args: &ReduceArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = CampaignConfig {
        mode: Mode::Hilbert,
        trials: args.trials,
        seed: args.seed,
        dim: args.dim,
        dim_max: args.dim_max.unwrap_or(args.dim),
        cloud_size: 2,
        ..CampaignConfig::default()
    };
    cfg.validate()?;
    let mut rows = Vec::with_capacity(args.trials as usize);
    for trial in 0..args.trials {
        let case = crate::harness::trial_case_for(&cfg, trial)?;
        let a = case.instance.a.as_linear().ok_or(Error::NotLinear("reduce"))?;
        let r = hilbert_reduction_check(a, &case.instance.x)?;
        rows.push(ReductionRow {
            trial,
            seed: case.seed,
            dim: case.instance.dim,
            nabla: r.nabla,
            delta: r.delta,
            discrepancy: r.discrepancy,
            holds: r.discrepancy <= args.tol * (1.0 + r.delta),
        });
    }
    if let Some(path) = &args.out {
        write_jsonl(&rows, path)?;
    }
    let worst = rows.iter().map(|r| r.discrepancy / (1.0 + r.delta)).fold(0.0, f64::max);
    let failures = rows.iter().filter(|r| !r.holds).count();
    writeln!(out, "trials {} max relative discrepancy {:.3e} failures {}", rows.len(), worst, failures)?;
    Ok(if failures > 0 { EXIT_VIOLATION } else { EXIT_OK })
}

#[derive(Serialize)]
struct LipnormRow {
    trial: u64,
    seed: u64,
    sampled: LipEstimate,
    refined: LipEstimate,
    exact: Option<f64>,
}

fn lipnorm(args: &LipnormArgs, out: &mut dyn Write) -> Result<i32> {
    let gen = GenConfig { mode: args.mode, dim: args.dim, p: args.p, cloud_size: args.cloud_size };
    let mut rows = Vec::new();
    for trial in 0..args.trials {
        let seed = derive_seed(args.seed, trial);
        let inst: Instance = generate_instance(seed, &gen)?;
        let spec = inst.norm;
        // force the sampling path even for linear instances
        let as_sampled = |budget| -> Result<LipEstimate> {
            let opts = ChainOptions { tol: Tolerance::CHAIN, refine_budget: budget, seed: derive_seed(seed, 1) };
            let mut f = inst.f.clone();
            if let crate::model::FunctionalSpec::Linear { w } = &inst.f {
                f = crate::model::FunctionalSpec::PostComposed {
                    w: w.clone(),
                    profile: crate::model::ScalarProfile::Polynomial { coeffs: vec![1.0] },
                    scale: num_complex::Complex64::new(1.0, 0.0),
                };
            }
            nabla(&f, &inst.a, &inst.x, &inst.m, spec, &[], &opts)
        };
        let sampled = as_sampled(0)?;
        let refined = as_sampled(args.budget)?;
        let exact = if inst.f.is_linear() && inst.a.is_linear() {
            nabla(&inst.f, &inst.a, &inst.x, &inst.m, spec, &[], &ChainOptions::default())?.exact
        } else {
            None
        };
        writeln!(
            out,
            "trial {trial:>4} sampled {:.6} refined {:.6} exact {}",
            sampled.lower,
            refined.lower,
            exact.map_or("-".to_string(), |e| format!("{e:.6}"))
        )?;
        rows.push(LipnormRow { trial, seed, sampled, refined, exact });
    }
    if let Some(path) = &args.out {
        write_jsonl(&rows, path)?;
    }
    Ok(EXIT_OK)
}

/// Loads a trial case from any of the JSON documents the CLI writes.
pub fn load_case(path: &Path) -> Result<(TrialCase, Option<TrialRecord>)> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let obj = value.as_object().ok_or_else(|| Error::InvalidInstance("expected a JSON object".into()))?;
    if obj.contains_key("counterexample") {
        let outcome: SearchOutcome = serde_json::from_value(value)?;
        let w = outcome
            .counterexample
            .or(outcome.min_slack)
            .ok_or_else(|| Error::InvalidInstance("search outcome holds no witness".into()))?;
        return Ok((w.case, Some(w.record)));
    }
    if obj.contains_key("case") {
        let w: Witness = serde_json::from_value(value)?;
        return Ok((w.case, Some(w.record)));
    }
    if obj.contains_key("instance") {
        return Ok((serde_json::from_value(value)?, None));
    }
    let instance: Instance = serde_json::from_value(value)?;
    let defaults = CampaignConfig::default();
    Ok((
        TrialCase {
            trial: 0,
            seed: 0,
            refine_budget: defaults.refine_budget,
            tol: defaults.tol,
            identity_tol: defaults.identity_tol,
            instance,
        },
        None,
    ))
}

fn replay(args: &ReplayArgs, out: &mut dyn Write) -> Result<i32> {
    let (case, stored) = load_case(&args.instance)?;
    case.instance.validate()?;
    let record = evaluate_case(&case);
    if let Some(path) = &args.out {
        write_json(&record, path)?;
    }
    writeln!(out, "trial {} seed {} status {}", record.trial, record.seed, record.status.as_str())?;
    if let Some(reason) = &record.skip_reason {
        writeln!(out, "  skipped: {reason}")?;
    }
    for c in &record.chains {
        let min = c.min_slack().unwrap_or(0.0);
        writeln!(out, "  {:<22} min slack {min:.6e} {}", c.chain, c.status().as_str())?;
    }
    if let Some(stored) = stored {
        writeln!(out, "matches stored record: {}", if stored == record { "yes" } else { "no" })?;
    }
    Ok(if record.status == TrialStatus::Violation { EXIT_VIOLATION } else { EXIT_OK })
}
