//! Merges run record files into one step-aligned CSV.
//!
//! Columns are named after each run's optimizer (duplicates get a numeric
//! suffix).  Rows stop at the shortest run, with a leading `#` note when that
//! truncates anything.  A `final` row repeats each summary's final loss, and
//! an optional threshold row reports the first step at or below a target
//! loss, scanning each file's full stream even past the truncation point.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::records::{self, RecordLine, Summary};
use crate::runner::RunError;

struct ParsedFile {
    path: PathBuf,
    records: Vec<RecordLine>,
    summary: Summary,
}

fn load(path: &Path) -> Result<ParsedFile, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    let (records, summary) = records::parse_lines(&text)
        .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    let summary = summary.ok_or_else(|| {
        RunError::Config(format!(
            "{}: no summary line (aborted or truncated run)",
            path.display()
        ))
    })?;
    if records.is_empty() {
        return Err(RunError::Config(format!("{}: no records", path.display())));
    }
    Ok(ParsedFile {
        path: path.to_path_buf(),
        records,
        summary,
    })
}

/// Column labels from optimizer names; repeats become name-2, name-3, ...
fn column_labels(files: &[ParsedFile]) -> Vec<String> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    files
        .iter()
        .map(|f| {
            let n = seen.entry(&f.summary.optimizer).or_insert(0);
            *n += 1;
            if *n == 1 {
                f.summary.optimizer.clone()
            } else {
                format!("{}-{}", f.summary.optimizer, n)
            }
        })
        .collect()
}

#[derive(Debug)]
pub struct CompareReport {
    pub rows: usize,
    pub truncated: bool,
}

fn render_csv(
    files: &[ParsedFile],
    threshold: Option<f64>,
) -> Result<(String, CompareReport), RunError> {
    let problem = &files[0].summary.problem;
    if let Some(odd) = files[1..].iter().find(|f| &f.summary.problem != problem) {
        return Err(RunError::Config(format!(
            "{}: problem `{}` differs from `{problem}`; compare runs over one problem",
            odd.path.display(),
            odd.summary.problem
        )));
    }

    let rows = files.iter().map(|f| f.records.len()).min().unwrap_or(0);
    let longest = files.iter().map(|f| f.records.len()).max().unwrap_or(0);
    let truncated = longest > rows;
    let labels = column_labels(files);

    let mut csv = String::new();
    if truncated {
        let _ = writeln!(
            csv,
            "# rows truncated to {rows} steps (shortest run; longest ran {longest})"
        );
    }
    let _ = writeln!(csv, "step,{}", labels.join(","));
    for i in 0..rows {
        let step = files[0].records[i].step;
        if let Some(odd) = files.iter().find(|f| f.records[i].step != step) {
            return Err(RunError::Config(format!(
                "{}: step numbering diverges at row {} ({} vs {step})",
                odd.path.display(),
                i + 1,
                odd.records[i].step
            )));
        }
        let _ = write!(csv, "{step}");
        for f in files {
            let _ = write!(csv, ",{}", f.records[i].loss);
        }
        csv.push('\n');
    }
    csv.push_str("final");
    for f in files {
        let _ = write!(csv, ",{}", f.summary.final_loss);
    }
    csv.push('\n');
    if let Some(tau) = threshold {
        let _ = write!(csv, "threshold@{tau}");
        for f in files {
            match f.records.iter().find(|r| r.loss <= tau) {
                Some(r) => {
                    let _ = write!(csv, ",{}", r.step);
                }
                None => csv.push(','),
            }
        }
        csv.push('\n');
    }
    Ok((csv, CompareReport { rows, truncated }))
}

pub fn execute_compare(
    paths: &[PathBuf],
    out: &Path,
    threshold: Option<f64>,
) -> Result<CompareReport, RunError> {
    if paths.len() < 2 {
        return Err(RunError::Config(
            "compare needs at least two result files".into(),
        ));
    }
    let mut files = Vec::with_capacity(paths.len());
    for p in paths {
        files.push(load(p)?);
    }
    let (csv, report) = render_csv(&files, threshold)?;
    std::fs::write(out, csv)
        .map_err(|e| RunError::Other(format!("cannot write {}: {e}", out.display())))?;
    Ok(report)
}
