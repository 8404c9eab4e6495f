//! Report files.
//!
//! JSON Lines: one `{"type": "trial", ...}` object per trial in trial order,
//! then one `{"type": "summary", ...}` object. Floats use the shortest
//! representation that parses back to the same bits.
//!
//! CSV: long format, one row per chain term and per chain slack, with the
//! fixed header [`CSV_COLUMNS`]. Skipped trials get a single `skip` row.
//! Values carry 17 significant digits.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CampaignConfig, CampaignReport, Counts, TrialRecord, Witness};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    /// JSON Lines
    Json,
    Csv,
}

pub const CSV_COLUMNS: [&str; 11] = ["trial", "seed", "mode", "dim", "p", "chain", "kind", "name", "value", "exact", "status"];

#[derive(Serialize, Deserialize)]
struct Summary {
    config: CampaignConfig,
    counts: Counts,
    min_slack: BTreeMap<String, f64>,
    worst: Option<Witness>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Line {
    Trial(TrialRecord),
    Summary(Box<Summary>),
}

fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn emit_report<W: Write>(report: &CampaignReport, format: ReportFormat, out: W) -> Result<()> {
    match format {
        ReportFormat::Json => emit_jsonl(report, out),
        ReportFormat::Csv => emit_csv(report, out),
    }
}

pub fn write_report(report: &CampaignReport, format: ReportFormat, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    emit_report(report, format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn emit_jsonl<W: Write>(report: &CampaignReport, mut out: W) -> Result<()> {
    for t in &report.trials {
        // serialize through the tagged wrapper without cloning the record
        serde_json::to_writer(&mut out, &TaggedRef::Trial(t))?;
        out.write_all(b"\n")?;
    }
    let summary = SummaryRef {
        config: &report.config,
        counts: &report.counts,
        min_slack: &report.min_slack,
        worst: report.worst.as_ref(),
    };
    serde_json::to_writer(&mut out, &TaggedRef::Summary(summary))?;
    out.write_all(b"\n")?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryRef<'a> {
    config: &'a CampaignConfig,
    counts: &'a Counts,
    min_slack: &'a BTreeMap<String, f64>,
    worst: Option<&'a Witness>,
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TaggedRef<'a> {
    Trial(&'a TrialRecord),
    Summary(SummaryRef<'a>),
}

/// Reads a JSON Lines report back.
pub fn parse_jsonl<R: BufRead>(input: R) -> Result<CampaignReport> {
    let mut trials = Vec::new();
    let mut summary = None;
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if summary.is_some() {
            return Err(Error::MalformedReport(format!("line {} follows the summary", n + 1)));
        }
        match serde_json::from_str::<Line>(&line)? {
            Line::Trial(t) => trials.push(t),
            Line::Summary(s) => summary = Some(*s),
        }
    }
    let s = summary.ok_or_else(|| Error::MalformedReport("missing summary line".into()))?;
    Ok(CampaignReport { config: s.config, trials, counts: s.counts, min_slack: s.min_slack, worst: s.worst })
}

pub fn read_jsonl(path: &Path) -> Result<CampaignReport> {
    parse_jsonl(BufReader::new(File::open(path)?))
}

fn emit_csv<W: Write>(report: &CampaignReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for t in &report.trials {
        let trial = t.trial.to_string();
        let seed = t.seed.to_string();
        let mode = t.mode.to_string();
        let dim = t.dim.to_string();
        let p = t.p.to_string();
        let status = t.status.as_str();
        if let Some(reason) = &t.skip_reason {
            w.write_record([&trial, &seed, &mode, &dim, &p, "", "skip", reason.as_str(), "", "", status])?;
            continue;
        }
        for c in &t.chains {
            for term in &c.terms {
                w.write_record([&trial, &seed, &mode, &dim, &p, &c.chain, "term", &term.name, &sig17(term.value), "", status])?;
            }
            for s in &c.slacks {
                let exact = if s.exact { "true" } else { "false" };
                w.write_record([&trial, &seed, &mode, &dim, &p, &c.chain, "slack", &s.name, &sig17(s.value), exact, status])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
