//! Training objectives: nonsmooth synthetic problems and a character-level
//! LSTM language model, all behind one sampled-evaluation trait.
//!
//! Every objective decomposes into `dataset_size` per-example terms whose
//! mean over the full index range recovers the exact objective, so the
//! sampling module can trade batch size against estimator variance without
//! the objective knowing.  Nonsmooth objectives return a specific subgradient
//! selection at their kinks; which selection is documented per problem.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

mod charlm;
mod corpus;
mod synthetic;

pub use charlm::CharLm;
pub use corpus::{make_batch, make_batches, BatchSpec, BatchStream, Corpus, UNK_SYMBOL};
pub use synthetic::{soft_threshold, HingeSvm, L1Quadratic, Quadratic, Rosenbrock};

/// Whether an objective is differentiable everywhere.  Smooth objectives
/// must survive finite-difference gradient checks; nonsmooth ones return
/// subgradient selections that finite differences may legitimately miss at
/// kinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Smooth,
    Nonsmooth,
}

/// A loss with a per-example decomposition.
///
/// `eval` receives dataset indices (duplicates allowed, the sampler draws
/// with replacement) and returns the mean loss and mean (sub)gradient over
/// exactly those terms.  Implementations hold no mutable state, so one
/// objective may serve several concurrent evaluations.
pub trait Objective: Send + Sync {
    fn name(&self) -> &'static str;
    /// Parameter vector length.
    fn dim(&self) -> usize;
    /// Number of per-example terms.
    fn dataset_size(&self) -> usize;
    fn smoothness(&self) -> Smoothness;
    fn eval(&self, theta: &[f64], batch: &[usize]) -> Result<(f64, Vec<f64>)>;

    /// Loss without the gradient; the default just discards it.
    fn loss(&self, theta: &[f64], batch: &[usize]) -> Result<f64> {
        self.eval(theta, batch).map(|(l, _)| l)
    }

    /// Steps per epoch at a fixed batch size.  The default counts dataset
    /// passes; objectives whose examples overlap may redefine a pass.
    fn epoch_steps(&self, batch: usize) -> usize {
        if batch == 0 {
            return 1;
        }
        self.dataset_size().div_ceil(batch).max(1)
    }

    /// Exact full-dataset evaluation.
    fn eval_full(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let all: Vec<usize> = (0..self.dataset_size()).collect();
        self.eval(theta, &all)
    }
}

/// Shared argument validation for `eval` implementations.
pub(crate) fn check_eval_args(
    op: &'static str,
    dim: usize,
    dataset_size: usize,
    theta: &[f64],
    batch: &[usize],
) -> Result<()> {
    if theta.len() != dim {
        return Err(Error::Length {
            op,
            expected: dim,
            got: theta.len(),
        });
    }
    if batch.is_empty() {
        return Err(Error::Data {
            detail: format!("{op}: batch must contain at least one index"),
        });
    }
    if let Some(&bad) = batch.iter().find(|&&i| i >= dataset_size) {
        return Err(Error::Data {
            detail: format!("{op}: index {bad} outside dataset of {dataset_size} examples"),
        });
    }
    Ok(())
}

/// Builds one of the synthetic objectives by name.  The seed fixes any
/// generated problem data (centers, matrices, training points), making the
/// objective a pure function of `(name, dimension, seed)`.
pub fn synthetic_objective(
    name: &str,
    dimension: usize,
    seed: u64,
) -> Result<Box<dyn Objective>> {
    match name {
        "l1-quadratic" => Ok(Box::new(L1Quadratic::seeded(dimension, seed)?)),
        "hinge-svm" => Ok(Box::new(HingeSvm::seeded(dimension, seed)?)),
        "quadratic" => Ok(Box::new(Quadratic::seeded(dimension, seed)?)),
        "rosenbrock" => Ok(Box::new(Rosenbrock::new(dimension)?)),
        other => Err(Error::InvalidParam {
            name: "problem",
            detail: format!(
                "unknown synthetic objective `{other}` (expected l1-quadratic, hinge-svm, quadratic, or rosenbrock)"
            ),
        }),
    }
}

/// Builds the LSTM language-model objective over a corpus.
pub fn charlm_objective(
    corpus: Corpus,
    layers: usize,
    hidden: usize,
    spec: &BatchSpec,
) -> Result<CharLm> {
    CharLm::new(corpus, layers, hidden, spec.seq_len)
}
