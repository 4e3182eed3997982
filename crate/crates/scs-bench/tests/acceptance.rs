//! The full acceptance gate: every criterion at its stated size and
//! tolerance, with its runtime budget enforced, one PASS/FAIL line per
//! criterion, then a single assertion over the lot.
//!
//! Criteria 10 and 11 run the actual binary and keep their result files so
//! criterion 12 can rerun the identical commands and compare bytes.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use scs_opt::problems::Corpus;
use scs_opt::sampling::required_sample_size;
use scs_opt::verify;

use scs_bench::records;

struct Criterion {
    index: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    wall_s: f64,
    limit_s: f64,
}

fn check(
    out: &mut Vec<Criterion>,
    index: usize,
    name: &'static str,
    limit_s: f64,
    body: impl FnOnce() -> (bool, String),
) {
    let start = Instant::now();
    let (mut pass, mut detail) = body();
    let wall_s = start.elapsed().as_secs_f64();
    if wall_s >= limit_s {
        pass = false;
        detail.push_str(" [over time budget]");
    }
    out.push(Criterion {
        index,
        name,
        pass,
        detail,
        wall_s,
        limit_s,
    });
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scs-bench"))
}

/// One benchmark invocation; returns success together with captured stderr.
fn run_cli(args: &[String]) -> (bool, String) {
    match bin().args(args).output() {
        Ok(o) => (
            o.status.code() == Some(0),
            String::from_utf8_lossy(&o.stderr).into_owned(),
        ),
        Err(e) => (false, e.to_string()),
    }
}

const ORDERING_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const ORDERING_OPTS: [&str; 3] = ["adam", "adamw", "scsadamw"];

fn ordering_args(opt: &str, seed: u64, out: &Path) -> Vec<String> {
    [
        "run",
        "--problem",
        "l1-quadratic",
        "--dim",
        "50",
        "--optimizer",
        opt,
        "--lr",
        "0.001",
        "--wd",
        "0.001",
        "--batch",
        "16",
        "--max-steps",
        "5000",
        "--seed",
        &seed.to_string(),
        "--out",
        out.to_str().unwrap(),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// (optimizer, lr, wd): the adaptive family at the reference settings, the
/// two non-adaptive baselines at a classic character-model rate.
const LM_RUNS: [(&str, &str, &str); 5] = [
    ("sgd", "0.5", "0"),
    ("polyak", "0.5", "0"),
    ("adam", "0.001", "0.001"),
    ("adamw", "0.001", "0.001"),
    ("scsadamw", "0.001", "0.001"),
];

fn lm_args(opt: &str, lr: &str, wd: &str, out: &Path) -> Vec<String> {
    [
        "run",
        "--problem",
        "charlm",
        "--optimizer",
        opt,
        "--lr",
        lr,
        "--wd",
        wd,
        "--epochs",
        "3",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn final_loss(path: &Path) -> Result<f64, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let (_, summary) = records::parse_lines(&text)?;
    summary
        .map(|s| s.final_loss)
        .ok_or_else(|| format!("{}: no summary", path.display()))
}

fn ordering_file(dir: &Path, opt: &str, seed: u64) -> PathBuf {
    dir.join(format!("ordering_{opt}_{seed}.jsonl"))
}

fn lm_file(dir: &Path, opt: &str) -> PathBuf {
    dir.join(format!("lm_{opt}.jsonl"))
}

/// Runs every file of criteria 10 and 11 into `dir`; returns an error string
/// on any non-zero exit.
fn produce_result_files(dir: &Path) -> Result<(), String> {
    for opt in ORDERING_OPTS {
        for seed in ORDERING_SEEDS {
            let out = ordering_file(dir, opt, seed);
            let (ok, err) = run_cli(&ordering_args(opt, seed, &out));
            if !ok {
                return Err(format!("{opt} seed {seed}: {err}"));
            }
        }
    }
    for (opt, lr, wd) in LM_RUNS {
        let out = lm_file(dir, opt);
        let (ok, err) = run_cli(&lm_args(opt, lr, wd, &out));
        if !ok {
            return Err(format!("charlm {opt}: {err}"));
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let mut results = Vec::new();
    let seed = 101;

    check(&mut results, 1, "direction-optimality", 30.0, || {
        match verify::direction_optimality(10_000, 10_000, seed) {
            Ok(r) => (
                r.pass,
                format!("max_excess={:.3e} (limit 1e-10) worst_dim={}", r.max_excess, r.worst_dim),
            ),
            Err(e) => (false, e.to_string()),
        }
    });

    check(&mut results, 2, "hull-membership", 30.0, || {
        match verify::hull_membership(1_000, 100, seed + 1) {
            Ok(r) => (
                r.pass,
                format!(
                    "max_reconstruction_err={:.3e} min_weight={:.3e} max_sum_err={:.3e}",
                    r.max_reconstruction_err, r.min_weight, r.max_sum_err
                ),
            ),
            Err(e) => (false, e.to_string()),
        }
    });

    check(&mut results, 3, "theorem1-rate", 60.0, || {
        match verify::theorem1_rate(100, 10_000, seed + 2) {
            Ok(r) => (
                r.pass,
                format!("violations={} max_ratio={:.6}", r.violations, r.max_ratio),
            ),
            Err(e) => (false, e.to_string()),
        }
    });

    check(&mut results, 4, "theorem2-implication", 30.0, || {
        match verify::theorem2_implication(100_000, seed + 3) {
            Ok(r) => (
                r.pass,
                format!("applicable={} violations={}", r.applicable, r.violations),
            ),
            Err(e) => (false, e.to_string()),
        }
    });

    check(&mut results, 5, "p-lambda", 5.0, || {
        let r = verify::p_lambda_grid(100_000);
        (
            r.pass,
            format!(
                "grid_min={:.3e} max_vertex_gap={:.3e} max_grid_argmin_gap={:.3e} (spacing {:.3e})",
                r.grid_min, r.max_vertex_gap, r.max_grid_argmin_gap, r.grid_spacing
            ),
        )
    });

    check(&mut results, 6, "sample-size-arithmetic", 5.0, || {
        let exact = match required_sample_size(0.01, 1.0, 8.0, 0.5) {
            Ok(n) => n,
            Err(e) => return (false, e.to_string()),
        };
        if exact != 43 {
            return (false, format!("required_sample_size(0.01,1,8,0.5)={exact}, want 43"));
        }
        // 100×100 grid: n must grow with the loss bound M and shrink as the
        // accuracy radius delta loosens.
        let mut monotone = true;
        let mut prev_col = vec![usize::MAX; 100];
        for i in 0..100 {
            let m = 5.0 * i as f64 / 99.0;
            let mut prev_row = usize::MAX;
            for (j, prev) in prev_col.iter_mut().enumerate() {
                let delta = 0.1 + 0.9 * j as f64 / 99.0;
                let n = required_sample_size(0.01, m, 8.0, delta).unwrap();
                if n > prev_row {
                    monotone = false;
                }
                prev_row = n;
                if i > 0 && n < *prev {
                    monotone = false;
                }
                *prev = n;
            }
        }
        (monotone, format!("exact=43, monotone over 10^4-point (M, delta) grid: {monotone}"))
    });

    check(&mut results, 7, "concentration", 120.0, || {
        match verify::concentration_grid(10_000, seed + 5) {
            Ok(r) => {
                let min_cov = r
                    .cells
                    .iter()
                    .map(|c| c.coverage)
                    .fold(f64::INFINITY, f64::min);
                (
                    r.pass,
                    format!("cells={} min_coverage={:.4}", r.cells.len(), min_cov),
                )
            }
            Err(e) => (false, e.to_string()),
        }
    });

    check(&mut results, 8, "grad-check", 60.0, || {
        match verify::grad_checks(20, seed + 4) {
            Ok(r) => {
                let worst = r
                    .rows
                    .iter()
                    .map(|row| row.max_rel_err)
                    .fold(0.0f64, f64::max);
                (
                    r.pass,
                    format!("objectives={} worst_rel_err={:.3e} (limit 1e-4)", r.rows.len(), worst),
                )
            }
            Err(e) => (false, e.to_string()),
        }
    });

    check(&mut results, 9, "optimizer-reductions", 30.0, || {
        match verify::optimizer_reductions(seed + 6) {
            Ok(r) => (
                r.pass,
                format!(
                    "adamw_adam_gap={:.3e} polyak_sgd_exact={} hand_value_err={:.3e}",
                    r.adamw_adam_gap, r.polyak_sgd_exact, r.hand_value_err
                ),
            ),
            Err(e) => (false, e.to_string()),
        }
    });

    let first = tempfile::tempdir().expect("tempdir");

    check(&mut results, 10, "nonsmooth-ordering", 120.0, || {
        let mut finals = std::collections::BTreeMap::new();
        for opt in ORDERING_OPTS {
            let mut per_seed = Vec::new();
            for seed in ORDERING_SEEDS {
                let out = ordering_file(first.path(), opt, seed);
                let (ok, err) = run_cli(&ordering_args(opt, seed, &out));
                if !ok {
                    return (false, format!("{opt} seed {seed} failed: {err}"));
                }
                match final_loss(&out) {
                    Ok(v) => per_seed.push(v),
                    Err(e) => return (false, e),
                }
            }
            finals.insert(opt, per_seed);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let scs = mean(&finals["scsadamw"]);
        let adamw = mean(&finals["adamw"]);
        let adam = mean(&finals["adam"]);
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.3}"))
                .collect::<Vec<_>>()
                .join("/")
        };
        let detail = format!(
            "5-seed mean final loss: scsadamw={scs:.3} adamw={adamw:.3} adam={adam:.3}; \
             per-seed scsadamw={} adamw={} adam={}",
            fmt(&finals["scsadamw"]),
            fmt(&finals["adamw"]),
            fmt(&finals["adam"]),
        );
        (scs <= adamw && scs <= adam, detail)
    });

    check(&mut results, 11, "lm-smoke", 600.0, || {
        let corpus = match Corpus::from_text(scs_bench::BUNDLED_CORPUS, 256) {
            Ok(c) => c,
            Err(e) => return (false, e.to_string()),
        };
        let ln_v = (corpus.vocab_size() as f64).ln();
        let mut details = Vec::new();
        let mut all_ok = true;
        for (opt, lr, wd) in LM_RUNS {
            let out = lm_file(first.path(), opt);
            let (ok, err) = run_cli(&lm_args(opt, lr, wd, &out));
            if !ok {
                all_ok = false;
                details.push(format!("{opt}: run failed ({err})"));
                continue;
            }
            let text = match std::fs::read_to_string(&out) {
                Ok(t) => t,
                Err(e) => {
                    all_ok = false;
                    details.push(format!("{opt}: {e}"));
                    continue;
                }
            };
            let (recs, summary) = match records::parse_lines(&text) {
                Ok(p) => p,
                Err(e) => {
                    all_ok = false;
                    details.push(format!("{opt}: {e}"));
                    continue;
                }
            };
            let Some(summary) = summary else {
                all_ok = false;
                details.push(format!("{opt}: aborted (no summary)"));
                continue;
            };
            let epoch3: Vec<f64> = recs
                .iter()
                .filter(|r| r.epoch == 3)
                .map(|r| r.loss)
                .collect();
            let e3_mean = epoch3.iter().sum::<f64>() / epoch3.len().max(1) as f64;
            let ok = !epoch3.is_empty() && e3_mean < ln_v && summary.final_loss < ln_v;
            if !ok {
                all_ok = false;
            }
            details.push(format!("{opt}={:.3}", e3_mean));
        }
        (
            all_ok,
            format!("epoch-3 mean loss vs ln V={ln_v:.4}: {}", details.join(" ")),
        )
    });

    check(&mut results, 12, "determinism", f64::INFINITY, || {
        let second = match tempfile::tempdir() {
            Ok(d) => d,
            Err(e) => return (false, e.to_string()),
        };
        if let Err(e) = produce_result_files(second.path()) {
            return (false, e);
        }
        let mut names: Vec<PathBuf> = Vec::new();
        for opt in ORDERING_OPTS {
            for seed in ORDERING_SEEDS {
                names.push(ordering_file(Path::new(""), opt, seed));
            }
        }
        for (opt, _, _) in LM_RUNS {
            names.push(lm_file(Path::new(""), opt));
        }
        let mut diffs = Vec::new();
        for name in &names {
            let a = std::fs::read(first.path().join(name)).unwrap_or_default();
            let b = std::fs::read(second.path().join(name)).unwrap_or_default();
            if a.is_empty() || a != b {
                diffs.push(name.display().to_string());
            }
        }
        (
            diffs.is_empty(),
            if diffs.is_empty() {
                format!("{} result files byte-identical across reruns", names.len())
            } else {
                format!("files differ: {}", diffs.join(", "))
            },
        )
    });

    let mut failed = Vec::new();
    for c in &results {
        println!(
            "{} {:>2} {:<24} {} [{:.1}s/{}]",
            if c.pass { "PASS" } else { "FAIL" },
            c.index,
            c.name,
            c.detail,
            c.wall_s,
            if c.limit_s.is_finite() {
                format!("{:.0}s", c.limit_s)
            } else {
                "-".into()
            }
        );
        if !c.pass {
            failed.push(format!("{} ({})", c.index, c.name));
        }
    }
    assert!(
        failed.is_empty(),
        "acceptance criteria failed: {}",
        failed.join(", ")
    );
}
