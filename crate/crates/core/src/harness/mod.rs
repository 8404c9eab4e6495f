//! Seeded verification campaigns and the counterexample probe.
//!
//! Trial `i` of a campaign with seed `s` draws its instance from
//! `derive_seed(s, i)` (splitmix64 with increment [`SEED_GAMMA`]), so the
//! report depends only on the [`CampaignConfig`] and never on the worker count.

mod report;

pub use report::{emit_report, parse_jsonl, read_jsonl, write_report, ReportFormat, CSV_COLUMNS};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{derive_seed, generate_instance, GenConfig, Instance, Mode, SEED_GAMMA};
use crate::space::NormSpec;
use crate::uncertainty::{
    nhrs_family, reduction_chain, robertson_chain, schrodinger_chains,
    ChainOptions, ChainReport, Status, Tolerance,
};
use crate::{Error, Result};

/// Slack tracked for the worst-case witness and the counterexample probe.
pub const HEADLINE_CHAIN: &str = "nhrs";
pub const HEADLINE_SLACK: &str = "product>=final_bound";

/// A negative headline slack counts as a counterexample candidate only below
/// `-(tol + NABLA_MARGIN_REL * product)`, allowing for an under-estimated `nabla`.
pub const NABLA_MARGIN_REL: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub mode: Mode,
    pub trials: u64,
    pub seed: u64,
    pub dim: usize,
    /// When larger than `dim`, each trial draws its dimension uniformly from `dim..=dim_max`.
    pub dim_max: usize,
    pub p: NormSpec,
    pub cloud_size: usize,
    pub refine_budget: usize,
    pub tol: Tolerance,
    pub identity_tol: Tolerance,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Hilbert,
            trials: 1000,
            seed: 0,
            dim: 3,
            dim_max: 3,
            p: NormSpec::L2,
            cloud_size: 64,
            refine_budget: 2000,
            tol: Tolerance::CHAIN,
            identity_tol: Tolerance::IDENTITY,
        }
    }
}

impl CampaignConfig {
    pub fn new(mode: Mode, trials: u64, seed: u64) -> Self {
        Self { mode, trials, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidConfig(format!("dim must be >= 2, got {}", self.dim)));
        }
        if self.dim_max < self.dim {
            return Err(Error::InvalidConfig(format!("dim_max {} is below dim {}", self.dim_max, self.dim)));
        }
        if self.cloud_size < 2 {
            return Err(Error::InvalidConfig(format!("cloud_size must be >= 2, got {}", self.cloud_size)));
        }
        for t in [self.tol, self.identity_tol] {
            if !(t.abs >= 0.0 && t.rel >= 0.0 && t.abs.is_finite() && t.rel.is_finite()) {
                return Err(Error::InvalidConfig("tolerances must be finite and non-negative".into()));
            }
        }
        Ok(())
    }

    fn trial_dim(&self, trial_seed: u64) -> usize {
        let span = (self.dim_max - self.dim) as u64 + 1;
        self.dim + (derive_seed(trial_seed, 0) % span) as usize
    }
}

/// Everything needed to recompute one trial bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialCase {
    pub trial: u64,
    pub seed: u64,
    pub refine_budget: usize,
    pub tol: Tolerance,
    pub identity_tol: Tolerance,
    pub instance: Instance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Passed,
    EmpiricalNegative,
    Violation,
    Skipped,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialStatus::Passed => "passed",
            TrialStatus::EmpiricalNegative => "empirical_negative",
            TrialStatus::Violation => "violation",
            TrialStatus::Skipped => "skipped",
        }
    }
}

impl From<Status> for TrialStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Passed => TrialStatus::Passed,
            Status::EmpiricalNegative => TrialStatus::EmpiricalNegative,
            Status::Violation => TrialStatus::Violation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub mode: Mode,
    pub dim: usize,
    pub p: NormSpec,
    pub status: TrialStatus,
    pub skip_reason: Option<String>,
    pub chains: Vec<ChainReport>,
}

impl TrialRecord {
    pub fn chain(&self, name: &str) -> Option<&ChainReport> {
        self.chains.iter().find(|c| c.chain == name)
    }

    pub fn headline_slack(&self) -> Option<f64> {
        self.chain(HEADLINE_CHAIN)?.slack(HEADLINE_SLACK).map(|s| s.value)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub passed: u64,
    pub empirical_negative: u64,
    pub violations: u64,
    pub skipped: u64,
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.passed + self.empirical_negative + self.violations + self.skipped
    }

    fn add(&mut self, s: TrialStatus) {
        match s {
            TrialStatus::Passed => self.passed += 1,
            TrialStatus::EmpiricalNegative => self.empirical_negative += 1,
            TrialStatus::Violation => self.violations += 1,
            TrialStatus::Skipped => self.skipped += 1,
        }
    }
}

/// The trial with the smallest headline slack, replayable from `case`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub slack_name: String,
    pub slack: f64,
    pub case: TrialCase,
    pub record: TrialRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    pub trials: Vec<TrialRecord>,
    pub counts: Counts,
    /// Minimum over non-skipped trials, keyed `chain/slack`.
    pub min_slack: BTreeMap<String, f64>,
    pub worst: Option<Witness>,
}

impl CampaignReport {
    /// Exit status convention of the CLI: 2 when an exact violation exists.
    pub fn has_violation(&self) -> bool {
        self.counts.violations > 0
    }
}

fn chain_options(case: &TrialCase) -> ChainOptions {
    ChainOptions { tol: case.tol, refine_budget: case.refine_budget, seed: derive_seed(case.seed, SEED_GAMMA) }
}

fn hilbert_chains(case: &TrialCase) -> Result<Vec<ChainReport>> {
    let inst = &case.instance;
    let a = inst.a.as_linear().ok_or(Error::NotLinear("hilbert trial"))?;
    let b = inst.b.as_linear().ok_or(Error::NotLinear("hilbert trial"))?;
    let h = &inst.x;
    let (schrodinger, identity) = schrodinger_chains(a, b, h, case.tol, case.identity_tol)?;
    Ok(vec![
        robertson_chain(a, b, h, case.tol)?,
        schrodinger,
        identity,
        reduction_chain(a, h, case.identity_tol)?,
    ])
}

fn all_chains(case: &TrialCase) -> Result<Vec<ChainReport>> {
    let opts = chain_options(case);
    let mut chains = Vec::new();
    if case.instance.mode == Mode::Hilbert {
        chains.extend(hilbert_chains(case)?);
    }
    chains.extend(nhrs_family(&case.instance, &opts)?);
    Ok(chains)
}

/// Runs every chain appropriate to the instance's mode.
pub fn evaluate_case(case: &TrialCase) -> TrialRecord {
    let inst = &case.instance;
    let mut record = TrialRecord {
        trial: case.trial,
        seed: case.seed,
        mode: inst.mode,
        dim: inst.dim,
        p: inst.norm,
        status: TrialStatus::Skipped,
        skip_reason: None,
        chains: Vec::new(),
    };
    match all_chains(case) {
        Ok(chains) => {
            record.status = chains.iter().map(ChainReport::status).max().unwrap_or(Status::Passed).into();
            record.chains = chains;
        }
        Err(e) => record.skip_reason = Some(e.to_string()),
    }
    record
}

fn trial_case(cfg: &CampaignConfig, trial: u64) -> std::result::Result<TrialCase, (u64, usize, NormSpec, Error)> {
    let seed = derive_seed(cfg.seed, trial);
    let dim = cfg.trial_dim(seed);
    let gen = GenConfig { mode: cfg.mode, dim, p: cfg.p, cloud_size: cfg.cloud_size };
    let p = if cfg.mode == Mode::Hilbert { NormSpec::L2 } else { cfg.p };
    generate_instance(seed, &gen)
        .map(|instance| TrialCase {
            trial,
            seed,
            refine_budget: cfg.refine_budget,
            tol: cfg.tol,
            identity_tol: cfg.identity_tol,
            instance,
        })
        .map_err(|e| (seed, dim, p, e))
}

fn run_trial(cfg: &CampaignConfig, trial: u64) -> (TrialRecord, Option<TrialCase>) {
    match trial_case(cfg, trial) {
        Ok(case) => (evaluate_case(&case), Some(case)),
        Err((seed, dim, p, e)) => (
            TrialRecord {
                trial,
                seed,
                mode: cfg.mode,
                dim,
                p,
                status: TrialStatus::Skipped,
                skip_reason: Some(e.to_string()),
                chains: Vec::new(),
            },
            None,
        ),
    }
}

fn assemble(cfg: &CampaignConfig, results: Vec<(TrialRecord, Option<TrialCase>)>) -> CampaignReport {
    let mut counts = Counts::default();
    let mut min_slack: BTreeMap<String, f64> = BTreeMap::new();
    let mut worst: Option<(f64, usize)> = None;
    for (idx, (record, _)) in results.iter().enumerate() {
        counts.add(record.status);
        for chain in &record.chains {
            for s in &chain.slacks {
                let key = format!("{}/{}", chain.chain, s.name);
                let entry = min_slack.entry(key).or_insert(s.value);
                *entry = entry.min(s.value);
            }
        }
        if let Some(v) = record.headline_slack() {
            if worst.is_none_or(|(w, _)| v < w) {
                worst = Some((v, idx));
            }
        }
    }
    let worst = worst.map(|(slack, idx)| {
        let (record, case) = &results[idx];
        Witness {
            slack_name: format!("{HEADLINE_CHAIN}/{HEADLINE_SLACK}"),
            slack,
            case: case.clone().expect("evaluated trials carry their case"),
            record: record.clone(),
        }
    });
    CampaignReport {
        config: cfg.clone(),
        trials: results.into_iter().map(|(r, _)| r).collect(),
        counts,
        min_slack,
        worst,
    }
}

/// Runs the campaign on rayon's global pool.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let results: Vec<_> = (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, i)).collect();
    Ok(assemble(cfg, results))
}

/// Runs the campaign on a dedicated pool of `workers` threads (`1` is sequential).
pub fn run_campaign_with_workers(cfg: &CampaignConfig, workers: usize) -> Result<CampaignReport> {
    cfg.validate()?;
    if workers <= 1 {
        let results = (0..cfg.trials).map(|i| run_trial(cfg, i)).collect();
        return Ok(assemble(cfg, results));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
    pool.install(|| run_campaign(cfg))
}

/// Regenerates trial `trial` of `cfg` without running the rest of the campaign.
pub fn trial_case_for(cfg: &CampaignConfig, trial: u64) -> Result<TrialCase> {
    cfg.validate()?;
    trial_case(cfg, trial).map_err(|(_, _, _, e)| e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub config: CampaignConfig,
    pub trials_run: u64,
    pub counts: Counts,
    /// First trial whose headline slack clears the estimate margin.
    pub counterexample: Option<Witness>,
    /// Smallest headline slack seen, with its replay data.
    pub min_slack: Option<Witness>,
}

fn is_counterexample(record: &TrialRecord) -> Option<f64> {
    let chain = record.chain(HEADLINE_CHAIN)?;
    let slack = chain.slack(HEADLINE_SLACK)?.value;
    let product = chain.term("product")?;
    (slack < -(chain.tol + NABLA_MARGIN_REL * product)).then_some(slack)
}

/// Probes the last link of the nonlinear chain over `cfg.trials` instances.
pub fn search_counterexample(cfg: &CampaignConfig) -> Result<SearchOutcome> {
    if cfg.mode != Mode::BanachNonlinear {
        return Err(Error::InvalidConfig(format!("counterexample search needs mode banach-nonlinear, got {}", cfg.mode)));
    }
    let report = run_campaign(cfg)?;
    let counterexample = report.trials.iter().find_map(|r| {
        is_counterexample(r).map(|slack| {
            let case = trial_case_for(cfg, r.trial).expect("trial generated during the campaign");
            Witness { slack_name: format!("{HEADLINE_CHAIN}/{HEADLINE_SLACK}"), slack, case, record: r.clone() }
        })
    });
    Ok(SearchOutcome {
        config: cfg.clone(),
        trials_run: cfg.trials,
        counts: report.counts,
        counterexample,
        min_slack: report.worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_campaign() {
        let r = run_campaign(&CampaignConfig::new(Mode::BanachLinear, 0, 1)).unwrap();
        assert_eq!(r.counts, Counts::default());
        assert!(r.trials.is_empty() && r.worst.is_none() && r.min_slack.is_empty());
    }

    #[test]
    fn conservation_and_dims() {
        let mut cfg = CampaignConfig::new(Mode::Hilbert, 40, 5);
        cfg.dim = 2;
        cfg.dim_max = 5;
        let r = run_campaign(&cfg).unwrap();
        assert_eq!(r.counts.total(), 40);
        assert!(r.trials.iter().all(|t| (2..=5).contains(&t.dim)));
        assert!(r.trials.iter().map(|t| t.dim).collect::<std::collections::BTreeSet<_>>().len() > 1);
        assert_eq!(r.counts.violations, 0);
    }

    #[test]
    fn search_requires_nonlinear_mode() {
        assert!(search_counterexample(&CampaignConfig::new(Mode::BanachLinear, 3, 0)).is_err());
    }

    #[test]
    fn invalid_configs() {
        let cfg = CampaignConfig { dim: 1, ..CampaignConfig::default() };
        assert!(run_campaign(&cfg).is_err());
        let cfg = CampaignConfig { dim_max: 2, ..CampaignConfig::default() };
        assert!(cfg.validate().is_err());
        let mut cfg = CampaignConfig::default();
        cfg.tol.abs = -1.0;
        assert!(cfg.validate().is_err());
    }
}
