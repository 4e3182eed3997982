//! Executes a resolved run configuration: builds the objective, seeds the
//! parameter vector and the batch stream, drives the optimization loop, and
//! streams records to the output file as they happen.
//!
//! The output file is created only after every configuration check has
//! passed, and each record line is flushed before the next step begins, so a
//! killed or aborted run always leaves a parseable record prefix behind.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scs_opt::optim::{run_until_stopped, Optimizer, RunOutcome};
use scs_opt::problems::{charlm_objective, synthetic_objective, BatchSpec, Corpus, Objective};
use scs_opt::sampling::{DeltaSchedule, SamplePlan, Sampler};

use crate::config::{ResolvedRun, SamplingMode};
use crate::records::{self, RecordLine};

/// Seed streams carved out of the run seed, so parameter initialization and
/// batch draws stay decorrelated without extra flags.
const STREAM_THETA0: u64 = 10;
const STREAM_BATCHES: u64 = 11;

#[derive(Debug)]
pub enum RunError {
    /// Bad configuration; nothing was written.  Exit 2.
    Config(String),
    /// Numeric abort mid-run; the record prefix is retained.  Exit 3.
    Abort(String),
    /// IO or internal failure.  Exit 1.
    Other(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Abort(_) => 3,
            RunError::Other(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) | RunError::Abort(m) | RunError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl From<crate::config::ConfigError> for RunError {
    fn from(e: crate::config::ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

fn cfg_err(e: scs_opt::Error) -> RunError {
    RunError::Config(e.to_string())
}

/// Objective plus its seeded initial parameter vector.
fn build_objective(cfg: &ResolvedRun) -> Result<(Box<dyn Objective>, Vec<f64>), RunError> {
    if cfg.problem == "charlm" {
        let text = match &cfg.corpus {
            Some(path) => std::fs::read_to_string(path).map_err(|e| {
                RunError::Config(format!("cannot read corpus {}: {e}", path.display()))
            })?,
            None => crate::BUNDLED_CORPUS.to_string(),
        };
        let corpus = Corpus::from_text(&text, cfg.max_vocab).map_err(cfg_err)?;
        let spec = BatchSpec {
            batch: cfg.batch,
            seq_len: cfg.seq_len,
            seed: cfg.seed,
        };
        let lm = charlm_objective(corpus, cfg.layers, cfg.hidden, &spec).map_err(cfg_err)?;
        let theta0 = lm.init_params(cfg.seed);
        Ok((Box::new(lm), theta0))
    } else {
        let objective = synthetic_objective(&cfg.problem, cfg.dim, cfg.seed).map_err(cfg_err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(STREAM_THETA0);
        let theta0 = (0..objective.dim())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        Ok((objective, theta0))
    }
}

fn build_sampler(cfg: &ResolvedRun) -> Result<Sampler, RunError> {
    match &cfg.sampling {
        SamplingMode::Fixed => Sampler::fixed(cfg.batch).map_err(cfg_err),
        SamplingMode::Adaptive {
            eps_conf,
            kappa,
            delta0,
            delta_decay,
            delta_min,
            cap_multiplier,
        } => {
            let plan = SamplePlan::new(*eps_conf, *kappa, *delta0, *delta_min).map_err(cfg_err)?;
            let schedule = match delta_decay {
                Some(gamma) => DeltaSchedule::Geometric {
                    gamma: *gamma,
                    delta_min: *delta_min,
                },
                None => DeltaSchedule::Constant,
            };
            Sampler::adaptive(plan, schedule, *cap_multiplier).map_err(cfg_err)
        }
    }
}

/// Step budget from whichever of the epoch and step limits bind first.
fn step_budget(cfg: &ResolvedRun, objective: &dyn Objective, sampler: &Sampler) -> u64 {
    let epoch_steps = match sampler.fixed_size() {
        Some(n) => objective.epoch_steps(n).max(1) as u64,
        None => 1,
    };
    let from_epochs = cfg.epochs.map(|e| e.saturating_mul(epoch_steps));
    match (from_epochs, cfg.max_steps) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => 1,
    }
    .max(1)
}

#[derive(Debug)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub records: u64,
}

pub fn execute_run(cfg: &ResolvedRun) -> Result<RunReport, RunError> {
    let (objective, theta0) = build_objective(cfg)?;
    let mut sampler = build_sampler(cfg)?;
    let mut optimizer =
        Optimizer::new(cfg.optimizer, cfg.hp.clone(), objective.dim()).map_err(cfg_err)?;
    let max_steps = step_budget(cfg, objective.as_ref(), &sampler);

    // Configuration is fully validated; only now may the output file exist.
    let file = File::create(&cfg.out)
        .map_err(|e| RunError::Other(format!("cannot create {}: {e}", cfg.out.display())))?;
    let mut writer = BufWriter::new(file);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(STREAM_BATCHES);

    let mut written = 0u64;
    let mut io_failure: Option<String> = None;
    let mut last_tick = Instant::now();
    let timing = cfg.timing;
    let result = run_until_stopped(
        objective.as_ref(),
        &theta0,
        &mut optimizer,
        max_steps,
        &mut sampler,
        &mut rng,
        |record| {
            let wall_ms = if timing {
                let now = Instant::now();
                let ms = now.duration_since(last_tick).as_secs_f64() * 1e3;
                last_tick = now;
                Some(ms)
            } else {
                None
            };
            let line = RecordLine::from_run(record, wall_ms);
            let write = serde_json::to_string(&line)
                .map_err(|e| e.to_string())
                .and_then(|json| writeln!(writer, "{json}").map_err(|e| e.to_string()))
                .and_then(|()| writer.flush().map_err(|e| e.to_string()));
            match write {
                Ok(()) => {
                    written += 1;
                    Ok(())
                }
                Err(msg) => {
                    io_failure = Some(msg);
                    Err(scs_opt::Error::Data {
                        detail: "record write failed".into(),
                    })
                }
            }
        },
    );

    match result {
        Ok(outcome) => {
            let summary = records::summary_for(
                &cfg.problem,
                cfg.optimizer.name(),
                cfg.seed,
                outcome.steps,
                outcome.final_loss,
                outcome.stop,
            );
            serde_json::to_string(&summary)
                .map_err(|e| RunError::Other(e.to_string()))
                .and_then(|json| {
                    writeln!(writer, "{json}").map_err(|e| RunError::Other(e.to_string()))
                })?;
            writer.flush().map_err(|e| RunError::Other(e.to_string()))?;
            Ok(RunReport {
                outcome,
                records: written,
            })
        }
        Err(e) => {
            if let Some(msg) = io_failure {
                return Err(RunError::Other(format!(
                    "cannot write {}: {msg}",
                    cfg.out.display()
                )));
            }
            // Partial records stay on disk; only the summary is withheld.
            writer.flush().ok();
            match e {
                scs_opt::Error::NonFinite { place } => Err(RunError::Abort(format!(
                    "run aborted: non-finite value at {place} (kept {written} records in {})",
                    cfg.out.display()
                ))),
                other => Err(RunError::Other(other.to_string())),
            }
        }
    }
}
