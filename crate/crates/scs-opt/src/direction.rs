//! Minimal-norm direction finding over the last two subgradients.
//!
//! Each step mixes the previous direction with the incoming subgradient,
//! `d_t = (1-λ*)·d_{t-1} + λ*·g_t`, where `λ*` minimizes the Euclidean norm
//! of the mix over `λ ∈ [0,1]`.  The result is the closest point to the
//! origin on the segment between the two vectors, so `‖d_t‖` never grows, and
//! by induction `d_t` stays inside the convex hull of every subgradient seen
//! so far.  A small direction norm is then a certificate: if it drops below a
//! threshold while the previous direction was still long, the current
//! subgradient itself must be nearly stationary (see [`StoppingReport`]).
//!
//! Convention note: we place `λ` on the incoming subgradient, matching the
//! recursion above.  Fixing `λ = 1` at every step therefore reduces the
//! method to the plain subgradient method, and the closed form below is the
//! minimizer for this parameterization, verified against a grid-search
//! oracle in the tests.

use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Minimizer of `‖(1-λ)·d_prev + λ·g‖²` over `λ ∈ [0,1]`.
///
/// Closed form `(‖d_prev‖² - ⟨d_prev,g⟩) / ‖d_prev - g‖²`, clamped.  When the
/// two vectors (nearly) coincide the denominator vanishes and every `λ`
/// yields the same point; `1` is returned to keep the freshest subgradient.
pub fn lambda_star(d_prev: &[f64], g: &[f64]) -> Result<f64> {
    if d_prev.len() != g.len() {
        return Err(Error::Length {
            op: "lambda_star",
            expected: d_prev.len(),
            got: g.len(),
        });
    }
    if !math::all_finite(d_prev) || !math::all_finite(g) {
        return Err(Error::NonFinite {
            place: "lambda_star input".into(),
        });
    }
    let dd = math::norm_sq(d_prev);
    let dg = math::dot(d_prev, g);
    let gg = math::norm_sq(g);
    let denom = dd - 2.0 * dg + gg;
    if denom < 1e-300 {
        return Ok(1.0);
    }
    Ok(((dd - dg) / denom).clamp(0.0, 1.0))
}

/// Quadratic from the stationarity-certificate proof:
/// `p(λ) = (2 + 1/η + η)·λ² - 2(1+η)·λ + η` for `eta_th > 0`.
///
/// Its discriminant is exactly zero, so `p ≥ 0` with the double root at
/// `λ = η/(1+η)`; nonnegativity of `p` is what turns a short direction into a
/// bound on the subgradient norm.
pub fn p_lambda(lambda: f64, eta_th: f64) -> f64 {
    (2.0 + 1.0 / eta_th + eta_th) * lambda * lambda - 2.0 * (1.0 + eta_th) * lambda + eta_th
}

/// Stationarity diagnostics for one completed direction update.
///
/// `theorem2_applicable` records whether the certificate's three hypotheses
/// held: the new direction dipped below `ε`, the previous one was still above
/// `√(1+η_th)·ε`, and the subgradient had a nonnegative component along the
/// previous direction.  When they hold, `‖g‖` must be at most
/// `theorem2_bound = √(1 + 1/η_th)·ε`; `theorem2_violated` flags the (never
/// expected) failure of that implication so it surfaces instead of being
/// silently dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingReport {
    pub d_norm: f64,
    pub g_norm: f64,
    pub lambda_star: f64,
    pub theorem2_applicable: bool,
    pub theorem2_bound: f64,
    pub theorem2_violated: bool,
}

/// Running state of the direction recursion.
///
/// Holds the current direction and, in verification mode, the convex weights
/// that express it over the full subgradient history.  Weight tracking costs
/// O(t) memory, so production runs leave it off.
#[derive(Debug, Clone)]
pub struct DirectionState {
    d: Option<Vec<f64>>,
    weights: Vec<f64>,
    track_weights: bool,
    last_lambda: f64,
    prev_norm: Option<f64>,
    prev_dot_g: f64,
    steps: u64,
}

impl Default for DirectionState {
    fn default() -> Self {
        Self::new()
    }
}

impl DirectionState {
    pub fn new() -> DirectionState {
        DirectionState {
            d: None,
            weights: Vec::new(),
            track_weights: false,
            last_lambda: 1.0,
            prev_norm: None,
            prev_dot_g: 0.0,
            steps: 0,
        }
    }

    /// Like [`DirectionState::new`] but retains convex weights over the
    /// subgradient history for hull-membership checks.
    pub fn with_weight_tracking() -> DirectionState {
        DirectionState {
            track_weights: true,
            ..DirectionState::new()
        }
    }

    /// Current direction; `None` before the first update or after a restart.
    pub fn direction(&self) -> Option<&[f64]> {
        self.d.as_deref()
    }

    /// Mixing weight used by the most recent update (1 before any update).
    pub fn last_lambda(&self) -> f64 {
        self.last_lambda
    }

    /// Convex weights `w_1..w_t` over past subgradients; empty unless
    /// verification mode is on.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Updates completed since construction or the last restart.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Clears the direction so the next update starts the recursion afresh
    /// with `d = g`.
    pub fn restart(&mut self) {
        self.d = None;
        self.weights.clear();
        self.last_lambda = 1.0;
        self.prev_norm = None;
        self.prev_dot_g = 0.0;
        self.steps = 0;
    }

    /// Folds a subgradient in with the optimal mixing weight.  Returns the
    /// `λ` used: the closed-form minimizer, or 1 on the first step, which
    /// takes `d_1 = g_1` without evaluating the closed form.
    pub fn update(&mut self, g: &[f64]) -> Result<f64> {
        let lambda = match &self.d {
            None => {
                if !math::all_finite(g) {
                    return Err(Error::NonFinite {
                        place: "direction update input".into(),
                    });
                }
                1.0
            }
            Some(d) => lambda_star(d, g)?,
        };
        self.apply(g, lambda);
        Ok(lambda)
    }

    /// Folds a subgradient in with a caller-chosen weight in `[0,1]`,
    /// bypassing the closed form.  The first step still takes `d_1 = g_1`.
    /// This is the hook for smoothed-λ variants and for the fixed-λ
    /// reduction to the plain subgradient method.
    pub fn update_with(&mut self, g: &[f64], lambda: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&lambda) || !lambda.is_finite() {
            return Err(Error::InvalidParam {
                name: "lambda",
                detail: format!("must lie in [0,1], got {lambda}"),
            });
        }
        if let Some(d) = &self.d {
            if d.len() != g.len() {
                return Err(Error::Length {
                    op: "update_direction",
                    expected: d.len(),
                    got: g.len(),
                });
            }
        }
        if !math::all_finite(g) {
            return Err(Error::NonFinite {
                place: "direction update input".into(),
            });
        }
        let lambda = if self.d.is_none() { 1.0 } else { lambda };
        self.apply(g, lambda);
        Ok(lambda)
    }

    fn apply(&mut self, g: &[f64], lambda: f64) {
        match &mut self.d {
            None => {
                self.prev_norm = None;
                self.prev_dot_g = 0.0;
                self.d = Some(g.to_vec());
                if self.track_weights {
                    self.weights.push(1.0);
                }
            }
            Some(d) => {
                self.prev_norm = Some(math::norm(d));
                self.prev_dot_g = math::dot(d, g);
                for (di, &gi) in d.iter_mut().zip(g) {
                    *di = (1.0 - lambda) * *di + lambda * gi;
                }
                if self.track_weights {
                    for w in &mut self.weights {
                        *w *= 1.0 - lambda;
                    }
                    self.weights.push(lambda);
                }
            }
        }
        self.last_lambda = lambda;
        self.steps += 1;
    }

    /// Diagnostics for the most recent update, against the stationarity
    /// certificate with tolerance `epsilon` and threshold parameter `eta_th`.
    pub fn stopping_report(&self, g: &[f64], epsilon: f64, eta_th: f64) -> Result<StoppingReport> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParam {
                name: "epsilon",
                detail: format!("must be positive and finite, got {epsilon}"),
            });
        }
        if !(eta_th > 0.0) || !eta_th.is_finite() {
            return Err(Error::InvalidParam {
                name: "eta_th",
                detail: format!("must be positive and finite, got {eta_th}"),
            });
        }
        let d = self.d.as_deref().ok_or(Error::Data {
            detail: "stopping report requested before any direction update".into(),
        })?;
        let d_norm = math::norm(d);
        let g_norm = math::norm(g);
        let bound = math::sqrt(1.0 + 1.0 / eta_th) * epsilon;
        let applicable = d_norm <= epsilon
            && match self.prev_norm {
                Some(prev) => prev > math::sqrt(1.0 + eta_th) * epsilon && self.prev_dot_g >= 0.0,
                None => false,
            };
        Ok(StoppingReport {
            d_norm,
            g_norm,
            lambda_star: self.last_lambda,
            theorem2_applicable: applicable,
            theorem2_bound: bound,
            theorem2_violated: applicable && g_norm > bound,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Norm of the mix at `lambda`, evaluated on the actual vectors.
    fn mix_norm_sq(d: &[f64], g: &[f64], lambda: f64) -> f64 {
        d.iter()
            .zip(g)
            .map(|(&di, &gi)| {
                let v = (1.0 - lambda) * di + lambda * gi;
                v * v
            })
            .sum()
    }

    /// Brute-force minimizer over a uniform grid; the oracle for `lambda_star`.
    fn grid_argmin(d: &[f64], g: &[f64], points: usize) -> (f64, f64) {
        let mut best = (0.0, f64::INFINITY);
        for i in 0..=points {
            let lam = i as f64 / points as f64;
            let n = mix_norm_sq(d, g, lam);
            if n < best.1 {
                best = (lam, n);
            }
        }
        best
    }

    #[test]
    fn orthogonal_pair_mixes_half_and_half() {
        let (d, g) = ([1.0, 0.0], [0.0, 1.0]);
        let lam = lambda_star(&d, &g).unwrap();
        assert_eq!(lam, 0.5);
        let (grid_lam, _) = grid_argmin(&d, &g, 1_000_000);
        assert!(
            math::abs(lam - grid_lam) <= 1e-6,
            "closed form {lam} vs grid oracle {grid_lam}"
        );
    }

    #[test]
    fn collinear_shorter_g_clamps_to_one() {
        let (d, g) = ([2.0, 0.0], [1.0, 0.0]);
        let lam = lambda_star(&d, &g).unwrap();
        assert_eq!(lam, 1.0, "unclamped value 2 must clamp to 1");
        let (grid_lam, _) = grid_argmin(&d, &g, 1_000_000);
        assert!(math::abs(lam - grid_lam) <= 1e-6);
    }

    #[test]
    fn coincident_endpoints_take_the_degenerate_rule() {
        let v = [3.0, 4.0];
        assert_eq!(lambda_star(&v, &v).unwrap(), 1.0);
    }

    #[test]
    fn antipodal_pair_cancels_to_zero() {
        let (d, g) = ([1.0, 0.0], [-1.0, 0.0]);
        let lam = lambda_star(&d, &g).unwrap();
        assert_eq!(lam, 0.5);
        assert_eq!(mix_norm_sq(&d, &g, lam), 0.0, "midpoint of antipodal pair is the origin");
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let err = lambda_star(&[1.0, 2.0], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::Length { op: "lambda_star", expected: 2, got: 1 }));
    }

    #[test]
    fn first_step_takes_the_subgradient_with_lambda_one() {
        let mut st = DirectionState::new();
        let lam = st.update(&[5.0, -5.0]).unwrap();
        assert_eq!(lam, 1.0);
        assert_eq!(st.direction().unwrap(), &[5.0, -5.0]);
    }

    #[test]
    fn orthogonal_stream_halves_with_hand_computed_weights() {
        let mut st = DirectionState::with_weight_tracking();
        st.update(&[1.0, 0.0]).unwrap();
        let lam = st.update(&[0.0, 1.0]).unwrap();
        assert_eq!(lam, 0.5);
        assert_eq!(st.direction().unwrap(), &[0.5, 0.5]);
        assert_eq!(st.weights(), &[0.5, 0.5], "weight recursion: (1-λ)·1 and λ");
    }

    #[test]
    fn zero_subgradient_zeroes_the_direction() {
        let mut st = DirectionState::new();
        st.update(&[0.7, -0.2]).unwrap();
        let lam = st.update(&[0.0, 0.0]).unwrap();
        assert_eq!(lam, 1.0, "closed form gives unclamped λ ≥ 1 for g = 0");
        assert_eq!(st.direction().unwrap(), &[0.0, 0.0]);
    }

    #[test]
    fn update_rejects_length_mismatch_and_keeps_state() {
        let mut st = DirectionState::new();
        st.update(&[1.0, 2.0]).unwrap();
        let err = st.update(&[1.0]).unwrap_err();
        assert!(matches!(err, Error::Length { .. }));
        assert_eq!(st.direction().unwrap(), &[1.0, 2.0], "failed update must not clobber d");
        assert_eq!(st.steps(), 1);
    }

    #[test]
    fn forced_lambda_one_reduces_to_plain_subgradient_steps() {
        let mut st = DirectionState::new();
        let stream = [[0.3, -1.0], [2.0, 0.1], [-0.5, 0.5]];
        for g in &stream {
            st.update_with(g, 1.0).unwrap();
            assert_eq!(st.direction().unwrap(), g, "λ ≡ 1 must copy g_t exactly");
        }
    }

    #[test]
    fn update_with_rejects_out_of_range_lambda() {
        let mut st = DirectionState::new();
        st.update(&[1.0]).unwrap();
        assert!(st.update_with(&[1.0], -0.1).is_err());
        assert!(st.update_with(&[1.0], 1.5).is_err());
        assert!(st.update_with(&[1.0], f64::NAN).is_err());
    }

    #[test]
    fn restart_forgets_the_direction_and_weights() {
        let mut st = DirectionState::with_weight_tracking();
        st.update(&[1.0, 0.0]).unwrap();
        st.update(&[0.0, 1.0]).unwrap();
        st.restart();
        assert!(st.direction().is_none());
        assert!(st.weights().is_empty());
        assert_eq!(st.steps(), 0);
        let lam = st.update(&[2.0, 2.0]).unwrap();
        assert_eq!(lam, 1.0);
        assert_eq!(st.direction().unwrap(), &[2.0, 2.0]);
        assert_eq!(st.weights(), &[1.0]);
    }

    #[test]
    fn monotone_norm_holds_on_a_random_stream() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let mut st = DirectionState::new();
        let mut prev_norm = f64::INFINITY;
        for _ in 0..500 {
            let g: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            st.update(&g).unwrap();
            let n = math::norm(st.direction().unwrap());
            assert!(n <= prev_norm + 1e-12, "norm rose: {n} > {prev_norm}");
            assert!(n <= math::norm(&g) + 1e-12, "norm above incoming subgradient");
            prev_norm = n;
        }
    }

    #[test]
    fn stopping_report_applicable_case_carries_the_bound() {
        // d_prev = (0.2, 0), g = (0.05, 0.002): λ* clamps to 1, so
        // d = g with ‖d‖ ≈ 0.05 ≤ ε while ‖d_prev‖ = 0.2 > √2·ε and
        // ⟨g, d_prev⟩ = 0.01 ≥ 0; all three hypotheses hold.
        let mut st = DirectionState::new();
        st.update(&[0.2, 0.0]).unwrap();
        let g = [0.05, 0.002];
        st.update(&g).unwrap();
        let r = st.stopping_report(&g, 0.1, 1.0).unwrap();
        assert!(r.d_norm <= 0.1, "mixed direction should be short, got {}", r.d_norm);
        assert!(r.theorem2_applicable);
        assert!(
            math::abs(r.theorem2_bound - math::sqrt(2.0) * 0.1) <= 1e-12,
            "bound must be √(1 + 1/η_th)·ε = √2·0.1, got {}",
            r.theorem2_bound
        );
        assert!(!r.theorem2_violated, "‖g‖ = {} within bound {}", r.g_norm, r.theorem2_bound);

        // Same shapes but a negative ⟨g, d_prev⟩: the sign gate must hold
        // the report back even though ‖d‖ lands on 0.05 exactly.
        let mut st = DirectionState::new();
        st.update(&[0.2, 0.0]).unwrap();
        let g2 = [-1.0, 0.0];
        st.update_with(&g2, 0.125).unwrap();
        let r2 = st.stopping_report(&g2, 0.1, 1.0).unwrap();
        assert!(math::abs(r2.d_norm - 0.05) <= 1e-15);
        assert!(!r2.theorem2_applicable, "sign condition fails for this stream");
    }

    #[test]
    fn stopping_report_requires_small_direction_norm() {
        let mut st = DirectionState::new();
        st.update(&[0.5, 0.0]).unwrap();
        st.update(&[0.5, 0.0]).unwrap();
        let r = st.stopping_report(&[0.5, 0.0], 0.1, 1.0).unwrap();
        assert!(!r.theorem2_applicable, "‖d‖ = 0.5 > ε = 0.1 cannot be applicable");
    }

    #[test]
    fn stopping_report_respects_the_sign_condition() {
        let mut st = DirectionState::new();
        st.update(&[0.05, 0.0]).unwrap();
        // prev norm 0.05 is already ≤ √2·ε, and the dot is negative; both
        // gates must hold it back.
        let g = [-0.2, 0.0];
        st.update(&g).unwrap();
        let r = st.stopping_report(&g, 0.1, 1.0).unwrap();
        assert!(!r.theorem2_applicable);
    }

    #[test]
    fn stopping_report_validates_tolerances() {
        let mut st = DirectionState::new();
        st.update(&[1.0]).unwrap();
        assert!(st.stopping_report(&[1.0], 0.0, 1.0).is_err());
        assert!(st.stopping_report(&[1.0], 0.1, 0.0).is_err());
        assert!(st.stopping_report(&[1.0], 0.1, -1.0).is_err());
    }

    #[test]
    fn p_lambda_matches_hand_evaluations() {
        assert_eq!(p_lambda(0.5, 1.0), 0.0, "4·0.25 - 4·0.5 + 1");
        assert_eq!(p_lambda(0.0, 2.0), 2.0, "constant term is η");
        assert!(
            math::abs(p_lambda(2.0 / 3.0, 2.0)) <= 1e-12,
            "double root sits at η/(1+η) = 2/3"
        );
    }

    #[test]
    fn closed_form_beats_a_fine_grid_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(32);
        for dim in [1usize, 2, 10] {
            for _ in 0..200 {
                let d: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let g: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let lam = lambda_star(&d, &g).unwrap();
                let val = mix_norm_sq(&d, &g, lam);
                let (_, grid_val) = grid_argmin(&d, &g, 10_000);
                assert!(
                    val <= grid_val + 1e-10,
                    "dim {dim}: closed form norm² {val} above grid minimum {grid_val}"
                );
            }
        }
    }

    #[test]
    fn tracked_weights_stay_convex_and_reconstruct_d() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let mut st = DirectionState::with_weight_tracking();
        let mut history: Vec<Vec<f64>> = Vec::new();
        for _ in 0..100 {
            let g: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            st.update(&g).unwrap();
            history.push(g);

            let w = st.weights();
            assert!(w.iter().all(|&x| x >= -1e-14), "negative convex weight in {w:?}");
            let sum: f64 = w.iter().sum();
            assert!(math::abs(sum - 1.0) <= 1e-12, "weights sum to {sum}");

            let mut recon = vec![0.0; 4];
            for (wi, gi) in w.iter().zip(&history) {
                for (r, &x) in recon.iter_mut().zip(gi) {
                    *r += wi * x;
                }
            }
            let d = st.direction().unwrap();
            let err = recon
                .iter()
                .zip(d)
                .map(|(a, b)| math::abs(a - b))
                .fold(0.0, f64::max);
            assert!(err <= 1e-10, "weights reconstruct d with max-abs error {err}");
        }
    }
}
