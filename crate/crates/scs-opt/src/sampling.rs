//! Concentration-driven batch sizing.
//!
//! The sample-size rule comes from a Hoeffding bound on a mean of losses
//! clipped to `[-(M+1), M+1]`: drawing
//! `N ≥ -8·ln(ε/2)·(M+1)² / (κ²·δ⁴)` examples makes the sampled loss track
//! the full objective to within `½·κ·δ²` with probability at least `1-ε`.
//! The constants `M` (loss bound) and `L_f` (Lipschitz constant) are not
//! observable up front, so a [`SamplePlan`] carries running estimates fed by
//! [`update_estimates`], and the curvature hypothesis `κ > 4·L_f/δ_min` is
//! re-checked as the estimates move: a violation flags the plan rather than
//! killing the run.  [`verify_concentration`] closes the loop by Monte-Carlo
//! testing the coverage claim on synthetic bounded losses.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;
use crate::{Error, Result};

/// Smallest sample size the Hoeffding bound certifies:
/// `max(1, ceil(-8·ln(eps_conf/2)·(m_bound+1)² / (kappa²·delta_t⁴)))`.
pub fn required_sample_size(
    eps_conf: f64,
    m_bound: f64,
    kappa: f64,
    delta_t: f64,
) -> Result<usize> {
    if !eps_conf.is_finite() || !(0.0 < eps_conf && eps_conf < 1.0) {
        return Err(Error::InvalidParam {
            name: "eps-conf",
            detail: format!("must lie in (0,1), got {eps_conf}"),
        });
    }
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(Error::InvalidParam {
            name: "kappa",
            detail: format!("must be positive and finite, got {kappa}"),
        });
    }
    if !delta_t.is_finite() || delta_t <= 0.0 {
        return Err(Error::InvalidParam {
            name: "delta",
            detail: format!("must be positive and finite, got {delta_t}"),
        });
    }
    if !m_bound.is_finite() || m_bound < 0.0 {
        return Err(Error::InvalidParam {
            name: "m-bound",
            detail: format!("must be nonnegative and finite, got {m_bound}"),
        });
    }
    let raw = -8.0 * math::ln(eps_conf / 2.0) * (m_bound + 1.0) * (m_bound + 1.0)
        / (kappa * kappa * delta_t * delta_t * delta_t * delta_t);
    let n = math::ceil(raw);
    if n >= usize::MAX as f64 {
        return Err(Error::Data {
            detail: format!("required sample size {n:.3e} overflows a count"),
        });
    }
    Ok((n as usize).max(1))
}

/// Running inputs to the sample-size rule for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePlan {
    /// Most recent sample size actually used (post-cap).
    pub n_t: usize,
    /// Current accuracy radius δ_t.
    pub delta_t: f64,
    pub kappa: f64,
    /// Running bound `M` on observed `|loss|`.
    pub m_bound: f64,
    pub eps_conf: f64,
    /// Running estimate of the loss Lipschitz constant along the iterate path.
    pub lipschitz_est: f64,
    /// Floor the δ schedule may not cross; part of the curvature hypothesis.
    pub delta_min: f64,
    /// Set when the estimates break `kappa > 4·lipschitz_est/delta_min`.
    pub kappa_flagged: bool,
}

impl SamplePlan {
    /// Fresh plan with zero estimates; validates the tolerances and that
    /// `delta0` respects the floor.
    pub fn new(eps_conf: f64, kappa: f64, delta0: f64, delta_min: f64) -> Result<SamplePlan> {
        if !delta_min.is_finite() || delta_min <= 0.0 {
            return Err(Error::InvalidParam {
                name: "delta-min",
                detail: format!("must be positive and finite, got {delta_min}"),
            });
        }
        if delta0 < delta_min {
            return Err(Error::InvalidParam {
                name: "delta0",
                detail: format!("initial radius {delta0} below its floor {delta_min}"),
            });
        }
        let n_t = required_sample_size(eps_conf, 0.0, kappa, delta0)?;
        Ok(SamplePlan {
            n_t,
            delta_t: delta0,
            kappa,
            m_bound: 0.0,
            eps_conf,
            lipschitz_est: 0.0,
            delta_min,
            kappa_flagged: false,
        })
    }
}

/// Folds one step's observations into the running estimates.
///
/// Non-finite observations are ignored rather than poisoning the estimates;
/// a zero displacement leaves the Lipschitz estimate alone via the guarded
/// denominator.
pub fn update_estimates(
    mut plan: SamplePlan,
    observed_loss: f64,
    displacement_norm: f64,
    loss_change: f64,
) -> SamplePlan {
    if observed_loss.is_finite() {
        plan.m_bound = f64::max(plan.m_bound, math::abs(observed_loss));
    }
    if displacement_norm.is_finite() && loss_change.is_finite() && displacement_norm >= 0.0 {
        let ratio = math::abs(loss_change) / f64::max(displacement_norm, 1e-12);
        plan.lipschitz_est = f64::max(plan.lipschitz_est, ratio);
    }
    plan.kappa_flagged = plan.kappa <= 4.0 * plan.lipschitz_est / plan.delta_min;
    plan
}

/// How the accuracy radius evolves between steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaSchedule {
    Constant,
    /// `δ ← max(delta_min, gamma·δ)` with `gamma ∈ (0,1)`.
    Geometric { gamma: f64, delta_min: f64 },
}

impl DeltaSchedule {
    pub fn advance(&self, delta: f64) -> f64 {
        match *self {
            DeltaSchedule::Constant => delta,
            DeltaSchedule::Geometric { gamma, delta_min } => f64::max(delta_min, gamma * delta),
        }
    }
}

/// `n` dataset indices drawn uniformly with replacement from the given
/// generator.  With replacement keeps the draws i.i.d., which is what the
/// Hoeffding argument assumes.
pub fn draw_batch_with<R: Rng>(rng: &mut R, dataset_size: usize, n: usize) -> Result<Vec<usize>> {
    if dataset_size == 0 {
        return Err(Error::Data {
            detail: "cannot draw a batch from an empty dataset".into(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParam {
            name: "batch",
            detail: "batch size must be at least 1".into(),
        });
    }
    Ok((0..n).map(|_| rng.gen_range(0..dataset_size)).collect())
}

/// Seeded wrapper over [`draw_batch_with`]; identical seeds reproduce the
/// index multiset exactly.
pub fn draw_batch(dataset_size: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_batch_with(&mut rng, dataset_size, n)
}

/// Per-step batch sizing for the run loop: a constant size, or the
/// Hoeffding rule with a dataset-proportional cap.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    Fixed {
        n: usize,
    },
    Adaptive {
        plan: SamplePlan,
        schedule: DeltaSchedule,
        /// Cap on `n_t` as a multiple of the dataset size.
        cap_multiplier: f64,
    },
}

impl Sampler {
    pub fn fixed(n: usize) -> Result<Sampler> {
        if n == 0 {
            return Err(Error::InvalidParam {
                name: "batch",
                detail: "batch size must be at least 1".into(),
            });
        }
        Ok(Sampler::Fixed { n })
    }

    pub fn adaptive(
        plan: SamplePlan,
        schedule: DeltaSchedule,
        cap_multiplier: f64,
    ) -> Result<Sampler> {
        if !cap_multiplier.is_finite() || cap_multiplier <= 0.0 {
            return Err(Error::InvalidParam {
                name: "cap-multiplier",
                detail: format!("must be positive and finite, got {cap_multiplier}"),
            });
        }
        Ok(Sampler::Adaptive {
            plan,
            schedule,
            cap_multiplier,
        })
    }

    /// The constant batch size, when in fixed mode.
    pub fn fixed_size(&self) -> Option<usize> {
        match self {
            Sampler::Fixed { n } => Some(*n),
            Sampler::Adaptive { .. } => None,
        }
    }

    pub fn plan(&self) -> Option<&SamplePlan> {
        match self {
            Sampler::Fixed { .. } => None,
            Sampler::Adaptive { plan, .. } => Some(plan),
        }
    }

    /// Sample size for the next step and whether the cap truncated it.
    /// Adaptive mode recomputes the Hoeffding size from the current
    /// estimates, then advances the δ schedule.
    pub fn next_size(&mut self, dataset_size: usize) -> Result<(usize, bool)> {
        match self {
            Sampler::Fixed { n } => Ok((*n, false)),
            Sampler::Adaptive {
                plan,
                schedule,
                cap_multiplier,
            } => {
                let required =
                    required_sample_size(plan.eps_conf, plan.m_bound, plan.kappa, plan.delta_t)?;
                let cap = ((dataset_size as f64 * *cap_multiplier) as usize).max(1);
                let used = required.min(cap);
                plan.n_t = used;
                plan.delta_t = schedule.advance(plan.delta_t);
                Ok((used, required > cap))
            }
        }
    }

    /// Feeds one completed step's observations back into the plan.
    pub fn observe(&mut self, loss: f64, displacement_norm: f64, loss_change: f64) {
        if let Sampler::Adaptive { plan, .. } = self {
            *plan = update_estimates(*plan, loss, displacement_norm, loss_change);
        }
    }
}

/// Monte-Carlo check of the concentration claim on uniform losses over
/// `[-M, M]` (true mean zero): fraction of `trials` whose sample mean over
/// `N = required_sample_size(..)` draws lands within `½·κ·δ²` of the mean.
pub fn verify_concentration(
    m_bound: f64,
    kappa: f64,
    delta: f64,
    eps_conf: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let n = required_sample_size(eps_conf, m_bound, kappa, delta)?;
    verify_concentration_with_n(m_bound, kappa, delta, n, trials, seed)
}

/// Same Monte-Carlo check with the sample size forced, so the necessity
/// direction (too few samples miss the tolerance) is testable.
pub fn verify_concentration_with_n(
    m_bound: f64,
    kappa: f64,
    delta: f64,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials < 100 {
        return Err(Error::InvalidParam {
            name: "trials",
            detail: format!("need at least 100 trials for a meaningful fraction, got {trials}"),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParam {
            name: "n",
            detail: "sample size must be at least 1".into(),
        });
    }
    if !m_bound.is_finite() || m_bound < 0.0 {
        return Err(Error::InvalidParam {
            name: "m-bound",
            detail: format!("must be nonnegative and finite, got {m_bound}"),
        });
    }
    let tolerance = 0.5 * kappa * delta * delta;
    let mut hits = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        rng.set_stream(trial as u64);
        let mut acc = 0.0;
        for _ in 0..n {
            acc += rng.gen_range(-m_bound..=m_bound);
        }
        let mean = acc / n as f64;
        if math::abs(mean) <= tolerance {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}
