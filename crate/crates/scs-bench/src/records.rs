//! Result-file schema.
//!
//! A run file is JSON Lines: one record object per optimization step, then a
//! single `{"summary": ...}` object.  Aborted runs end after the last complete
//! record, so any prefix of a file parses.  Optional fields are omitted rather
//! than written as null, which keeps files byte-stable across schema growth.

use serde::{Deserialize, Serialize};

use scs_opt::optim::{RunRecord, StopReason};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub n_capped: bool,
    pub theorem2_applicable: bool,
    pub theorem2_violated: bool,
    pub kappa_flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordLine {
    pub step: u64,
    pub epoch: u64,
    pub loss: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d_norm: Option<f64>,
    pub g_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_star: Option<f64>,
    pub n_t: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_ms: Option<f64>,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub problem: String,
    pub optimizer: String,
    pub seed: u64,
    pub steps: u64,
    pub final_loss: f64,
    pub stop_reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub summary: Summary,
}

/// One parsed line.  Records carry a `step` field and summaries do not, so the
/// untagged match is unambiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Line {
    Record(RecordLine),
    Summary(SummaryLine),
}

impl RecordLine {
    pub fn from_run(r: &RunRecord, wall_ms: Option<f64>) -> RecordLine {
        RecordLine {
            step: r.step,
            epoch: r.epoch,
            loss: r.loss,
            d_norm: r.d_norm,
            g_norm: r.g_norm,
            lambda_star: r.lambda_star,
            n_t: r.n_t,
            wall_ms,
            flags: Flags {
                n_capped: r.flags.n_capped,
                theorem2_applicable: r.flags.theorem2_applicable,
                theorem2_violated: r.flags.theorem2_violated,
                kappa_flagged: r.flags.kappa_flagged,
            },
        }
    }
}

pub fn summary_for(
    problem: &str,
    optimizer_name: &str,
    seed: u64,
    steps: u64,
    final_loss: f64,
    stop: StopReason,
) -> SummaryLine {
    SummaryLine {
        summary: Summary {
            problem: problem.to_string(),
            optimizer: optimizer_name.to_string(),
            seed,
            steps,
            final_loss,
            stop_reason: stop.name().to_string(),
        },
    }
}

/// Parses a full result file.  The summary is `None` for aborted runs.
pub fn parse_lines(text: &str) -> Result<(Vec<RecordLine>, Option<Summary>), String> {
    let mut records = Vec::new();
    let mut summary = None;
    for (lineno, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(raw)
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        match line {
            Line::Record(r) => {
                if summary.is_some() {
                    return Err(format!("line {}: record after summary", lineno + 1));
                }
                records.push(r);
            }
            Line::Summary(s) => {
                if summary.is_some() {
                    return Err(format!("line {}: duplicate summary", lineno + 1));
                }
                summary = Some(s.summary);
            }
        }
    }
    Ok((records, summary))
}
