//! Optimizer state machines over flat parameter vectors.
//!
//! Five step rules share one interface: plain SGD, Polyak heavy-ball, Adam
//! (coupled weight decay), AdamW (decoupled decay), and the conjugate
//! variant, which keeps AdamW's coordinate-wise second-moment scaling and
//! decoupled decay but replaces the first-moment average with the
//! minimal-norm direction from [`crate::direction`].  Its step order is:
//! advance `t`, fold the subgradient into the direction, update the second
//! moment, bias-correct both, take the scaled step, then apply decay against
//! the pre-step parameters.  The direction's norm doubles as the termination
//! signal for [`run_until_stopped`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::direction::{lambda_star, DirectionState, StoppingReport};
use crate::math;
use crate::problems::Objective;
use crate::sampling::Sampler;
use crate::{Error, Result};

/// Which step rule an [`Optimizer`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Sgd,
    Polyak,
    Adam,
    AdamW,
    ScsAdamW,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 5] = [
        OptimizerKind::Sgd,
        OptimizerKind::Polyak,
        OptimizerKind::Adam,
        OptimizerKind::AdamW,
        OptimizerKind::ScsAdamW,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Polyak => "polyak",
            OptimizerKind::Adam => "adam",
            OptimizerKind::AdamW => "adamw",
            OptimizerKind::ScsAdamW => "scsadamw",
        }
    }
}

impl core::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "polyak" => Ok(OptimizerKind::Polyak),
            "adam" => Ok(OptimizerKind::Adam),
            "adamw" => Ok(OptimizerKind::AdamW),
            "scsadamw" => Ok(OptimizerKind::ScsAdamW),
            other => Err(Error::InvalidParam {
                name: "optimizer",
                detail: format!("unknown optimizer `{other}` (expected sgd, polyak, adam, adamw, or scsadamw)"),
            }),
        }
    }
}

/// Shared hyperparameters; fields irrelevant to a given kind are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    /// Learning rate η > 0.
    pub eta: f64,
    /// First-moment decay for adam/adamw, in [0,1).
    pub beta1: f64,
    /// Second-moment decay, in [0,1).
    pub beta2: f64,
    /// Weight-decay coefficient ≥ 0; coupled for adam, decoupled otherwise.
    pub lambda_wd: f64,
    /// Denominator floor ζ > 0.
    pub zeta: f64,
    /// Direction-norm termination threshold > 0 (scsadamw).
    pub epsilon_stop: f64,
    /// Heavy-ball momentum for polyak, in [0,1).
    pub theta_momentum: f64,
    /// Stationarity-certificate threshold parameter η_th > 0 used in
    /// stopping reports; independent of the learning rate despite the
    /// clashing symbol.
    pub eta_th: f64,
    /// Squash λ* through σ(clip(λ*, -5, 5)) before mixing.  Experimental:
    /// for λ* ∈ [0,1] this lands in [0.5, 0.731], a material change.
    pub smooth_lambda: bool,
    /// Restart the direction recursion every this many steps.
    pub restart_period: Option<u64>,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            eta: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            lambda_wd: 0.0,
            zeta: 1e-8,
            epsilon_stop: 1e-8,
            theta_momentum: 0.9,
            eta_th: 1.0,
            smooth_lambda: false,
            restart_period: None,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    detail: format!("must be positive and finite, got {v}"),
                })
            }
        };
        let unit = |name: &'static str, v: f64| -> Result<()> {
            if v.is_finite() && (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    name,
                    detail: format!("must lie in [0,1), got {v}"),
                })
            }
        };
        pos("lr", self.eta)?;
        unit("beta1", self.beta1)?;
        unit("beta2", self.beta2)?;
        if !self.lambda_wd.is_finite() || self.lambda_wd < 0.0 {
            return Err(Error::InvalidParam {
                name: "wd",
                detail: format!("must be nonnegative and finite, got {}", self.lambda_wd),
            });
        }
        pos("zeta", self.zeta)?;
        pos("eps-stop", self.epsilon_stop)?;
        unit("theta-momentum", self.theta_momentum)?;
        pos("eta-th", self.eta_th)?;
        if let Some(k) = self.restart_period {
            if k == 0 {
                return Err(Error::InvalidParam {
                    name: "restart-period",
                    detail: "must be a positive step count".into(),
                });
            }
        }
        Ok(())
    }
}

/// Per-step summary returned by [`Optimizer::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Step index after the update (first step reports 1).
    pub t: u64,
    pub g_norm: f64,
    /// Direction diagnostics; present only for the conjugate variant.
    pub report: Option<StoppingReport>,
}

/// One optimizer instance: a kind, its hyperparameters, and whichever state
/// buffers that kind needs.  Unused buffers stay empty.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    hp: HyperParams,
    t: u64,
    dim: usize,
    dir: DirectionState,
    m: Vec<f64>,
    v: Vec<f64>,
    prev_delta: Vec<f64>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, hp: HyperParams, dim: usize) -> Result<Optimizer> {
        hp.validate()?;
        if dim == 0 {
            return Err(Error::InvalidParam {
                name: "dim",
                detail: "parameter vector must be non-empty".into(),
            });
        }
        let needs_m = matches!(kind, OptimizerKind::Adam | OptimizerKind::AdamW);
        let needs_v = matches!(
            kind,
            OptimizerKind::Adam | OptimizerKind::AdamW | OptimizerKind::ScsAdamW
        );
        Ok(Optimizer {
            kind,
            hp,
            t: 0,
            dim,
            dir: DirectionState::new(),
            m: if needs_m { vec![0.0; dim] } else { Vec::new() },
            v: if needs_v { vec![0.0; dim] } else { Vec::new() },
            prev_delta: if kind == OptimizerKind::Polyak {
                vec![0.0; dim]
            } else {
                Vec::new()
            },
        })
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hp
    }

    /// Completed steps.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Direction state (conjugate variant only).
    pub fn direction(&self) -> Option<&DirectionState> {
        (self.kind == OptimizerKind::ScsAdamW).then_some(&self.dir)
    }

    /// Second-moment buffer, empty for kinds that keep none.
    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// Applies one update in place.  A non-finite or mis-sized subgradient
    /// rejects the step with the state untouched.
    pub fn step(&mut self, theta: &mut [f64], g: &[f64]) -> Result<StepInfo> {
        if theta.len() != self.dim {
            return Err(Error::Length {
                op: "step",
                expected: self.dim,
                got: theta.len(),
            });
        }
        if g.len() != self.dim {
            return Err(Error::Length {
                op: "step",
                expected: self.dim,
                got: g.len(),
            });
        }
        if !math::all_finite(g) {
            return Err(Error::NonFinite {
                place: format!("gradient at step {}", self.t + 1),
            });
        }
        let g_norm = math::norm(g);
        let report = match self.kind {
            OptimizerKind::Sgd => {
                self.t += 1;
                for (th, &gi) in theta.iter_mut().zip(g) {
                    *th -= self.hp.eta * gi;
                }
                None
            }
            OptimizerKind::Polyak => {
                self.t += 1;
                for ((th, pd), &gi) in theta.iter_mut().zip(&mut self.prev_delta).zip(g) {
                    let delta = -self.hp.eta * gi + self.hp.theta_momentum * *pd;
                    *th += delta;
                    *pd = delta;
                }
                None
            }
            OptimizerKind::Adam => {
                self.t += 1;
                self.adam_core(theta, g, true);
                None
            }
            OptimizerKind::AdamW => {
                self.t += 1;
                let decay = self.hp.eta * self.hp.lambda_wd;
                if decay == 0.0 {
                    self.adam_core(theta, g, false);
                } else {
                    let theta_prev: Vec<f64> = theta.to_vec();
                    self.adam_core(theta, g, false);
                    for (th, &tp) in theta.iter_mut().zip(&theta_prev) {
                        *th -= decay * tp;
                    }
                }
                None
            }
            OptimizerKind::ScsAdamW => Some(self.scsadamw_core(theta, g)?),
        };
        Ok(StepInfo {
            t: self.t,
            g_norm,
            report,
        })
    }

    /// Shared Adam recurrence.  With `coupled` the decay folds into the
    /// gradient before the moments; otherwise the caller applies it
    /// separately and the moments never see it.
    fn adam_core(&mut self, theta: &mut [f64], g: &[f64], coupled: bool) {
        let hp = &self.hp;
        let bc1 = 1.0 - math::powi(hp.beta1, self.t as i32);
        let bc2 = 1.0 - math::powi(hp.beta2, self.t as i32);
        for i in 0..self.dim {
            let geff = if coupled {
                g[i] + hp.lambda_wd * theta[i]
            } else {
                g[i]
            };
            self.m[i] = hp.beta1 * self.m[i] + (1.0 - hp.beta1) * geff;
            self.v[i] = hp.beta2 * self.v[i] + (1.0 - hp.beta2) * geff * geff;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            theta[i] -= hp.eta * m_hat / (math::sqrt(v_hat) + hp.zeta);
        }
    }

    fn scsadamw_core(&mut self, theta: &mut [f64], g: &[f64]) -> Result<StoppingReport> {
        self.t += 1;
        if let Some(k) = self.hp.restart_period {
            if self.t > 1 && (self.t - 1) % k == 0 {
                self.dir.restart();
            }
        }
        let squashed = if self.hp.smooth_lambda {
            match self.dir.direction() {
                Some(d) => {
                    let raw = lambda_star(d, g)?;
                    Some(math::sigmoid(raw.clamp(-5.0, 5.0)))
                }
                None => None,
            }
        } else {
            None
        };
        let lambda = match squashed {
            Some(l) => self.dir.update_with(g, l)?,
            None => self.dir.update(g)?,
        };
        let d = self.dir.direction().expect("direction set by update");

        let hp = &self.hp;
        let bc2 = 1.0 - math::powi(hp.beta2, self.t as i32);
        // Correcting d by 1/(1-λ^t) is only meaningful when λ < 1; at λ = 1
        // the direction is pure g_t, and at t = 1 no λ* was ever computed.
        let bc_d = if self.t == 1 || lambda >= 1.0 - 1e-6 {
            1.0
        } else {
            1.0 - math::powi(lambda, self.t as i32)
        };
        let decay = hp.eta * hp.lambda_wd;
        if decay == 0.0 {
            for i in 0..self.dim {
                self.v[i] = hp.beta2 * self.v[i] + (1.0 - hp.beta2) * g[i] * g[i];
                let d_hat = d[i] / bc_d;
                let v_hat = self.v[i] / bc2;
                theta[i] -= hp.eta * d_hat / (math::sqrt(v_hat) + hp.zeta);
            }
        } else {
            for i in 0..self.dim {
                self.v[i] = hp.beta2 * self.v[i] + (1.0 - hp.beta2) * g[i] * g[i];
                let d_hat = d[i] / bc_d;
                let v_hat = self.v[i] / bc2;
                let theta_prev = theta[i];
                theta[i] -= hp.eta * d_hat / (math::sqrt(v_hat) + hp.zeta);
                theta[i] -= decay * theta_prev;
            }
        }
        self.dir.stopping_report(g, hp.epsilon_stop, hp.eta_th)
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Direction norm fell to `epsilon_stop` (conjugate variant only).
    Converged,
    MaxSteps,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxSteps => "max_steps",
        }
    }
}

/// One row of a run's record stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    /// 1-based step index.
    pub step: u64,
    /// 1-based epoch the step falls in.
    pub epoch: u64,
    pub loss: f64,
    pub d_norm: Option<f64>,
    pub g_norm: f64,
    pub lambda_star: Option<f64>,
    /// Examples drawn this step.
    pub n_t: usize,
    /// Filled by callers that have a clock; the core loop leaves it empty.
    pub wall_ms: Option<f64>,
    pub flags: RecordFlags,
}

/// Noteworthy per-step events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RecordFlags {
    /// Requested adaptive sample size hit the dataset cap.
    pub n_capped: bool,
    pub theorem2_applicable: bool,
    pub theorem2_violated: bool,
    /// Running Lipschitz estimate broke the curvature hypothesis κ > 4·L̂/δ_min.
    pub kappa_flagged: bool,
}

/// Final state of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub steps: u64,
    pub final_loss: f64,
    pub stop: StopReason,
    pub theta: Vec<f64>,
}

/// Drives sample → evaluate → step until the direction norm certifies
/// convergence (conjugate variant) or `max_steps` runs out.
///
/// Every completed iteration is handed to `on_record` before the stop check,
/// so an aborted run still leaves a valid record prefix behind; evaluation
/// errors and non-finite losses halt the run with the error surfaced.
pub fn run_until_stopped<R, F>(
    objective: &dyn Objective,
    theta0: &[f64],
    optimizer: &mut Optimizer,
    max_steps: u64,
    sampler: &mut Sampler,
    rng: &mut R,
    mut on_record: F,
) -> Result<RunOutcome>
where
    R: Rng,
    F: FnMut(&RunRecord) -> Result<()>,
{
    if max_steps == 0 {
        return Err(Error::InvalidParam {
            name: "max-steps",
            detail: "must be at least 1".into(),
        });
    }
    if theta0.len() != objective.dim() {
        return Err(Error::Length {
            op: "run_until_stopped",
            expected: objective.dim(),
            got: theta0.len(),
        });
    }
    let dataset = objective.dataset_size();
    // Fixed sampling counts an epoch in dataset passes; adaptive sampling has
    // no stable pass size, so an epoch degenerates to a single step there.
    let epoch_steps = match sampler.fixed_size() {
        Some(n) => objective.epoch_steps(n).max(1) as u64,
        None => 1,
    };

    let mut theta = theta0.to_vec();
    let mut prev_loss: Option<f64> = None;
    let mut prev_displacement = 0.0;
    let mut scratch = Vec::with_capacity(theta.len());
    for step in 1..=max_steps {
        let (n_t, capped) = sampler.next_size(dataset)?;
        let batch = crate::sampling::draw_batch_with(rng, dataset, n_t)?;
        let (loss, g) = objective.eval(&theta, &batch)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                place: format!("loss at step {step}"),
            });
        }

        scratch.clear();
        scratch.extend_from_slice(&theta);
        let info = optimizer.step(&mut theta, &g)?;

        let displacement: f64 = {
            let mut acc = 0.0;
            for (a, b) in theta.iter().zip(&scratch) {
                let d = a - b;
                acc += d * d;
            }
            math::sqrt(acc)
        };
        // The loss gap `loss - prev_loss` spans the PREVIOUS step's move, so
        // it is paired with that step's displacement for the slope estimate.
        let loss_change = prev_loss.map_or(0.0, |p| loss - p);
        prev_loss = Some(loss);
        sampler.observe(loss, prev_displacement, loss_change);
        prev_displacement = displacement;

        let record = RunRecord {
            step,
            epoch: 1 + (step - 1) / epoch_steps,
            loss,
            d_norm: info.report.map(|r| r.d_norm),
            g_norm: info.g_norm,
            lambda_star: info.report.map(|r| r.lambda_star),
            n_t,
            wall_ms: None,
            flags: RecordFlags {
                n_capped: capped,
                theorem2_applicable: info.report.is_some_and(|r| r.theorem2_applicable),
                theorem2_violated: info.report.is_some_and(|r| r.theorem2_violated),
                kappa_flagged: sampler.plan().is_some_and(|p| p.kappa_flagged),
            },
        };
        on_record(&record)?;

        if let Some(report) = info.report {
            if report.d_norm <= optimizer.hyper().epsilon_stop {
                return Ok(RunOutcome {
                    steps: step,
                    final_loss: loss,
                    stop: StopReason::Converged,
                    theta,
                });
            }
        }
    }
    Ok(RunOutcome {
        steps: max_steps,
        final_loss: prev_loss.unwrap_or(f64::NAN),
        stop: StopReason::MaxSteps,
        theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Quadratic;
    use crate::sampling::Sampler;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn optimizer(kind: OptimizerKind, hp: HyperParams, dim: usize) -> Optimizer {
        Optimizer::new(kind, hp, dim).unwrap()
    }

    /// Scalar re-derivation of the conjugate step rule, written without the
    /// library's direction machinery so the two can disagree.
    fn scalar_conjugate_trajectory(
        theta0: f64,
        gs: &[f64],
        hp: &HyperParams,
    ) -> Vec<f64> {
        let mut theta = theta0;
        let mut d = 0.0;
        let mut have_d = false;
        let mut v = 0.0;
        let mut out = Vec::with_capacity(gs.len());
        for (k, &g) in gs.iter().enumerate() {
            let t = (k + 1) as i32;
            let lambda = if !have_d {
                1.0
            } else {
                let denom = (d - g) * (d - g);
                if denom < 1e-300 {
                    1.0
                } else {
                    ((d * d - d * g) / denom).clamp(0.0, 1.0)
                }
            };
            d = if have_d { (1.0 - lambda) * d + lambda * g } else { g };
            have_d = true;
            v = hp.beta2 * v + (1.0 - hp.beta2) * g * g;
            let bc_d = if t == 1 || lambda >= 1.0 - 1e-6 {
                1.0
            } else {
                1.0 - math::powi(lambda, t)
            };
            let v_hat = v / (1.0 - math::powi(hp.beta2, t));
            let prev = theta;
            theta -= hp.eta * (d / bc_d) / (math::sqrt(v_hat) + hp.zeta);
            theta -= hp.eta * hp.lambda_wd * prev;
            out.push(theta);
        }
        out
    }

    #[test]
    fn conjugate_step_matches_a_scalar_reference() {
        let hp = HyperParams {
            eta: 0.01,
            lambda_wd: 0.02,
            ..HyperParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gs: Vec<f64> = (0..50).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let expect = scalar_conjugate_trajectory(0.7, &gs, &hp);
        let mut opt = optimizer(OptimizerKind::ScsAdamW, hp, 1);
        let mut theta = [0.7];
        for (g, e) in gs.iter().zip(&expect) {
            opt.step(&mut theta, &[*g]).unwrap();
            assert!(
                math::abs(theta[0] - e) <= 1e-13,
                "trajectories diverged: {} vs {e}",
                theta[0]
            );
        }
    }

    #[test]
    fn conjugate_first_step_hand_value() {
        // θ₀ = 0, g₁ = 1, η = 1e-3, ζ = 1e-8: v̂₁ = 1, so
        // θ₁ = -1e-3 / (1 + 1e-8) = -0.000999999990.
        let hp = HyperParams {
            eta: 1e-3,
            lambda_wd: 1e-3,
            ..HyperParams::default()
        };
        let mut opt = optimizer(OptimizerKind::ScsAdamW, hp, 1);
        let mut theta = [0.0];
        opt.step(&mut theta, &[1.0]).unwrap();
        assert!(
            math::abs(theta[0] - (-0.000999999990)) <= 1e-12,
            "got {}",
            theta[0]
        );
    }

    #[test]
    fn zero_gradient_leaves_only_the_decay_term() {
        let hp = HyperParams {
            eta: 1e-3,
            lambda_wd: 1e-3,
            ..HyperParams::default()
        };
        let mut opt = optimizer(OptimizerKind::ScsAdamW, hp, 1);
        let mut theta = [10.0];
        opt.step(&mut theta, &[0.0]).unwrap();
        // adaptive part is 0/(0 + ζ) = 0; decay takes η·λ·θ = 1e-5·10.
        assert!(math::abs(theta[0] - 9.99999) <= 1e-12, "got {}", theta[0]);
    }

    #[test]
    fn adamw_with_zero_decay_is_adam() {
        let hp = HyperParams::default();
        assert_eq!(hp.lambda_wd, 0.0);
        let mut a = optimizer(OptimizerKind::Adam, hp, 4);
        let mut w = optimizer(OptimizerKind::AdamW, hp, 4);
        let mut ta = [0.5, -1.0, 2.0, 0.0];
        let mut tw = ta;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let g: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            a.step(&mut ta, &g).unwrap();
            w.step(&mut tw, &g).unwrap();
            for (x, y) in ta.iter().zip(&tw) {
                assert!(math::abs(x - y) <= 1e-15, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn adam_and_adamw_split_once_decay_is_on() {
        let hp = HyperParams {
            lambda_wd: 0.1,
            ..HyperParams::default()
        };
        let mut a = optimizer(OptimizerKind::Adam, hp, 2);
        let mut w = optimizer(OptimizerKind::AdamW, hp, 2);
        let mut ta = [1.0, -2.0];
        let mut tw = ta;
        for _ in 0..3 {
            a.step(&mut ta, &[0.3, -0.4]).unwrap();
            w.step(&mut tw, &[0.3, -0.4]).unwrap();
        }
        assert_ne!(ta, tw, "coupled and decoupled decay must diverge");
    }

    #[test]
    fn momentum_free_polyak_is_bitwise_sgd() {
        let hp = HyperParams {
            theta_momentum: 0.0,
            ..HyperParams::default()
        };
        let mut p = optimizer(OptimizerKind::Polyak, hp, 3);
        let mut s = optimizer(OptimizerKind::Sgd, hp, 3);
        let mut tp = [0.1, 0.2, 0.3];
        let mut ts = tp;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let g: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            p.step(&mut tp, &g).unwrap();
            s.step(&mut ts, &g).unwrap();
            for (x, y) in tp.iter().zip(&ts) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn polyak_displacement_is_a_geometric_gradient_sum() {
        let hp = HyperParams {
            eta: 0.05,
            theta_momentum: 0.6,
            ..HyperParams::default()
        };
        let mut p = optimizer(OptimizerKind::Polyak, hp, 1);
        let mut theta = [0.0];
        let gs = [1.0, -0.5, 2.0, 0.25, -1.5];
        let mut prev = theta[0];
        for (k, &g) in gs.iter().enumerate() {
            p.step(&mut theta, &[g]).unwrap();
            // Δ_t = -η · Σ_{i≤t} θ_m^{t-i} g_i, from unrolling the recursion.
            let mut expect = 0.0;
            for (i, &gi) in gs.iter().enumerate().take(k + 1) {
                expect += -hp.eta * math::powi(hp.theta_momentum, (k - i) as i32) * gi;
            }
            let delta = theta[0] - prev;
            assert!(math::abs(delta - expect) <= 1e-15, "step {k}: {delta} vs {expect}");
            prev = theta[0];
        }
    }

    #[test]
    fn second_moment_never_sees_decoupled_decay() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gs: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let run = |kind, wd: f64| {
            let hp = HyperParams { lambda_wd: wd, ..HyperParams::default() };
            let mut opt = optimizer(kind, hp, 2);
            let mut theta = [3.0, -2.0];
            for g in &gs {
                opt.step(&mut theta, g).unwrap();
            }
            opt.second_moment().to_vec()
        };
        for kind in [OptimizerKind::AdamW, OptimizerKind::ScsAdamW] {
            let plain = run(kind, 0.0);
            let decayed = run(kind, 0.5);
            assert_eq!(plain, decayed, "{kind}: v must be independent of λ_wd");
            assert!(plain.iter().all(|&v| v >= 0.0));
        }
        // Coupled decay folds λ·θ into g, so Adam's v does move.
        assert_ne!(run(OptimizerKind::Adam, 0.0), run(OptimizerKind::Adam, 0.5));
    }

    #[test]
    fn non_finite_gradient_rejects_the_step_without_state_damage() {
        let mut opt = optimizer(OptimizerKind::ScsAdamW, HyperParams::default(), 2);
        let mut theta = [1.0, 2.0];
        opt.step(&mut theta, &[0.5, -0.5]).unwrap();
        let mut pristine = opt.clone();
        let before = theta;

        let err = opt.step(&mut theta, &[f64::NAN, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
        assert_eq!(theta, before);
        assert_eq!(opt.t(), 1);

        // The rejected call must not have perturbed hidden state either:
        // both instances continue identically.
        let mut t1 = theta;
        let mut t2 = theta;
        opt.step(&mut t1, &[0.1, 0.2]).unwrap();
        pristine.step(&mut t2, &[0.1, 0.2]).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn wrong_sizes_are_rejected() {
        let mut opt = optimizer(OptimizerKind::Sgd, HyperParams::default(), 3);
        assert!(opt.step(&mut [0.0; 2], &[0.0; 3]).is_err());
        assert!(opt.step(&mut [0.0; 3], &[0.0; 2]).is_err());
        assert!(Optimizer::new(OptimizerKind::Sgd, HyperParams::default(), 0).is_err());
        let bad = HyperParams { eta: -1.0, ..HyperParams::default() };
        let err = Optimizer::new(OptimizerKind::Sgd, bad, 1).unwrap_err();
        assert!(matches!(err, Error::InvalidParam { name: "lr", .. }));
    }

    #[test]
    fn restart_forgets_the_direction_on_schedule() {
        let hp = HyperParams {
            restart_period: Some(3),
            ..HyperParams::default()
        };
        let mut opt = optimizer(OptimizerKind::ScsAdamW, hp, 2);
        let mut theta = [0.0, 0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for t in 1..=7u64 {
            let g: Vec<f64> = (0..2).map(|_| rng.gen_range(0.5..1.5)).collect();
            let info = opt.step(&mut theta, &g).unwrap();
            let d = opt.direction().unwrap().direction().unwrap().to_vec();
            if t == 1 || (t - 1) % 3 == 0 {
                assert_eq!(d, g, "step {t} should restart from the raw subgradient");
                assert_eq!(info.report.unwrap().lambda_star, 1.0);
            }
        }
    }

    #[test]
    fn smooth_lambda_lands_in_the_sigmoid_image_after_step_one() {
        let hp = HyperParams {
            smooth_lambda: true,
            ..HyperParams::default()
        };
        let mut opt = optimizer(OptimizerKind::ScsAdamW, hp, 3);
        let mut theta = [0.0; 3];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in 1..=30u64 {
            let g: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let info = opt.step(&mut theta, &g).unwrap();
            let l = info.report.unwrap().lambda_star;
            if t == 1 {
                assert_eq!(l, 1.0, "no mixing exists on the first step");
            } else {
                // σ of a clipped [0,1] value: [½, σ(1)] ⊂ [0.5, 0.7311]
                assert!((0.5..=0.7310586).contains(&l), "step {t}: λ = {l}");
            }
        }
    }

    #[test]
    fn parsing_round_trips_every_kind() {
        for kind in OptimizerKind::ALL {
            assert_eq!(kind.name().parse::<OptimizerKind>().unwrap(), kind);
        }
        assert!("adagrad".parse::<OptimizerKind>().is_err());
    }

    #[test]
    fn run_loop_converges_on_a_strongly_convex_problem() {
        // One example means every drawn batch is the exact gradient, so the
        // direction norm certifies true stationarity rather than a noise
        // cancellation.
        let obj = Quadratic::identity(1).unwrap();
        let hp = HyperParams {
            eta: 5e-4,
            epsilon_stop: 1e-6,
            ..HyperParams::default()
        };
        let mut opt = optimizer(OptimizerKind::ScsAdamW, hp, 1);
        let mut sampler = Sampler::fixed(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut last_step = 0;
        let out = run_until_stopped(
            &obj,
            &[3.0],
            &mut opt,
            50_000,
            &mut sampler,
            &mut rng,
            |rec| {
                assert_eq!(rec.step, last_step + 1, "steps strictly increasing");
                last_step = rec.step;
                assert_eq!(rec.n_t, 1);
                assert_eq!(rec.epoch, rec.step, "dataset 1 / batch 1 → one step per epoch");
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(out.stop, StopReason::Converged);
        assert!(out.steps < 50_000);
        assert!(
            math::abs(out.theta[0]) <= 1e-3,
            "|θ| = {} after {} steps",
            out.theta[0],
            out.steps
        );
    }

    #[test]
    fn subsampling_noise_alone_can_trip_the_direction_criterion() {
        // With-replacement batches on two coordinates produce gradients of
        // varying direction; the min-norm mix never grows, so noise ratchets
        // ‖d‖ under any threshold eventually, far from the minimizer.  The
        // false stop is exactly what the certificate flags guard against.
        let obj = Quadratic::identity(2).unwrap();
        let hp = HyperParams {
            eta: 5e-4,
            epsilon_stop: 1e-6,
            ..HyperParams::default()
        };
        let mut opt = optimizer(OptimizerKind::ScsAdamW, hp, 2);
        let mut sampler = Sampler::fixed(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = run_until_stopped(&obj, &[3.0, -4.0], &mut opt, 50_000, &mut sampler, &mut rng, |_| Ok(()))
            .unwrap();
        assert_eq!(out.stop, StopReason::Converged);
        assert!(
            math::norm(&out.theta) > 1.0,
            "this seed is expected to stop early at ‖θ‖ ≈ 3.2, got {}",
            math::norm(&out.theta)
        );
    }

    #[test]
    fn zero_gradient_at_start_converges_immediately() {
        let obj = Quadratic::identity(3).unwrap();
        let mut opt = optimizer(OptimizerKind::ScsAdamW, HyperParams::default(), 3);
        let mut sampler = Sampler::fixed(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = run_until_stopped(&obj, &[0.0; 3], &mut opt, 10, &mut sampler, &mut rng, |_| Ok(()))
            .unwrap();
        assert_eq!(out.steps, 1);
        assert_eq!(out.stop, StopReason::Converged);
    }

    #[test]
    fn kinds_without_a_direction_always_run_to_max_steps() {
        let obj = Quadratic::identity(2).unwrap();
        let mut opt = optimizer(OptimizerKind::Sgd, HyperParams::default(), 2);
        let mut sampler = Sampler::fixed(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut records = 0;
        let out = run_until_stopped(&obj, &[0.0, 0.0], &mut opt, 25, &mut sampler, &mut rng, |_| {
            records += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(out.stop, StopReason::MaxSteps);
        assert_eq!(out.steps, 25);
        assert_eq!(records, 25);
    }

    #[test]
    fn run_loop_validates_its_inputs() {
        let obj = Quadratic::identity(2).unwrap();
        let mut opt = optimizer(OptimizerKind::Sgd, HyperParams::default(), 2);
        let mut sampler = Sampler::fixed(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(
            run_until_stopped(&obj, &[0.0; 2], &mut opt, 0, &mut sampler, &mut rng, |_| Ok(()))
                .is_err(),
            "zero step budget"
        );
        assert!(
            run_until_stopped(&obj, &[0.0; 3], &mut opt, 5, &mut sampler, &mut rng, |_| Ok(()))
                .is_err(),
            "θ₀ length mismatch"
        );
    }
}
