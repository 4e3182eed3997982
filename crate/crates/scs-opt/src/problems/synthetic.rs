//! Closed-form test objectives with per-example decompositions.
//!
//! Each problem reports `dataset_size` terms whose mean over all indices is
//! exactly the textbook objective, so subsampled evaluation stays unbiased.
//! Coordinate-local terms (the quadratics) are scaled by the dataset size to
//! make that mean come out right; the scaling is invisible to full-batch
//! callers and only widens per-example variance, which is the point of a
//! sampling testbed.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;
use crate::problems::{check_eval_args, Objective, Smoothness};
use crate::{Error, Result};

fn require_dim(name: &'static str, dim: usize, min: usize) -> Result<()> {
    if dim < min {
        return Err(Error::InvalidParam {
            name: "dim",
            detail: format!("{name} needs dimension ≥ {min}, got {dim}"),
        });
    }
    Ok(())
}

/// Coordinate-wise shrink toward zero: `sign(v_k)·max(|v_k| − tau, 0)`.
/// Minimizes `τ‖x‖₁ + ½‖x − v‖²`, which makes it the exact-minimizer oracle
/// for [`L1Quadratic`].
pub fn soft_threshold(v: &[f64], tau: f64) -> Vec<f64> {
    v.iter()
        .map(|&c| {
            let mag = math::abs(c) - tau;
            if mag > 0.0 {
                if c > 0.0 {
                    mag
                } else {
                    -mag
                }
            } else {
                0.0
            }
        })
        .collect()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `f(x) = ‖x‖₁ + ½‖x − c‖²`, the classic lasso-style composite.  Term `j`
/// is `‖x‖₁ + (d/2)(x_j − c_j)²`; the ℓ₁ part repeats in every term, the
/// quadratic is spread one coordinate per term.  At kinks the subgradient
/// selection takes `sign(0) = 0`.
#[derive(Debug, Clone)]
pub struct L1Quadratic {
    center: Vec<f64>,
}

impl L1Quadratic {
    pub fn seeded(dim: usize, seed: u64) -> Result<L1Quadratic> {
        require_dim("l1-quadratic", dim, 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        Ok(L1Quadratic { center })
    }

    pub fn with_center(center: Vec<f64>) -> Result<L1Quadratic> {
        require_dim("l1-quadratic", center.len(), 1)?;
        Ok(L1Quadratic { center })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Exact minimizer `soft_threshold(c, 1)`.
    pub fn minimizer(&self) -> Vec<f64> {
        soft_threshold(&self.center, 1.0)
    }
}

impl Objective for L1Quadratic {
    fn name(&self) -> &'static str {
        "l1-quadratic"
    }

    fn dim(&self) -> usize {
        self.center.len()
    }

    fn dataset_size(&self) -> usize {
        self.center.len()
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Nonsmooth
    }

    fn eval(&self, theta: &[f64], batch: &[usize]) -> Result<(f64, Vec<f64>)> {
        let d = self.center.len();
        check_eval_args("l1-quadratic", d, d, theta, batch)?;
        let l1: f64 = theta.iter().map(|&x| math::abs(x)).sum();
        let inv = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        let mut grad: Vec<f64> = theta.iter().map(|&x| sign(x)).collect();
        for &j in batch {
            let r = theta[j] - self.center[j];
            loss += l1 + 0.5 * d as f64 * r * r;
            grad[j] += d as f64 * r * inv;
        }
        Ok((loss * inv, grad))
    }
}

/// Mean hinge loss `max(0, 1 − y⟨w, x⟩)` over 200 seeded points that are
/// linearly separable with margin: every point satisfies `|⟨w*, x⟩| ≥ 0.12`
/// for the unit separator `w*`, so `w = 10·w*` classifies everything with
/// margin > 1.  At the hinge kink the active-side limit `−y·x` is returned.
#[derive(Debug, Clone)]
pub struct HingeSvm {
    dim: usize,
    points: Vec<f64>,
    labels: Vec<f64>,
    separator: Vec<f64>,
}

pub const HINGE_POINTS: usize = 200;
const HINGE_MARGIN: f64 = 0.12;

impl HingeSvm {
    pub fn seeded(dim: usize, seed: u64) -> Result<HingeSvm> {
        require_dim("hinge-svm", dim, 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let separator = loop {
            let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = math::norm(&w);
            if n >= 0.5 {
                break w.iter().map(|&c| c / n).collect::<Vec<f64>>();
            }
        };
        let mut points = Vec::with_capacity(HINGE_POINTS * dim);
        let mut labels = Vec::with_capacity(HINGE_POINTS);
        while labels.len() < HINGE_POINTS {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let m = math::dot(&x, &separator);
            if math::abs(m) >= HINGE_MARGIN {
                points.extend_from_slice(&x);
                labels.push(sign(m));
            }
        }
        Ok(HingeSvm {
            dim,
            points,
            labels,
            separator,
        })
    }

    /// Unit normal of the separating hyperplane the data was built around.
    pub fn separator(&self) -> &[f64] {
        &self.separator
    }

    fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.dim..(j + 1) * self.dim]
    }
}

impl Objective for HingeSvm {
    fn name(&self) -> &'static str {
        "hinge-svm"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn dataset_size(&self) -> usize {
        HINGE_POINTS
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Nonsmooth
    }

    fn eval(&self, theta: &[f64], batch: &[usize]) -> Result<(f64, Vec<f64>)> {
        check_eval_args("hinge-svm", self.dim, HINGE_POINTS, theta, batch)?;
        let inv = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        let mut grad = vec![0.0; self.dim];
        for &j in batch {
            let x = self.point(j);
            let y = self.labels[j];
            let slack = 1.0 - y * math::dot(theta, x);
            if slack >= 0.0 {
                loss += slack.max(0.0);
                for (gk, &xk) in grad.iter_mut().zip(x) {
                    *gk -= y * xk * inv;
                }
            }
        }
        Ok((loss * inv, grad))
    }
}

/// `f(x) = ½xᵀAx − bᵀx` with a seeded SPD matrix `A = GᵀG/d + I` and
/// `b = A·x*` for a seeded minimizer `x*`.  Term `j` is
/// `d·(½·x_j·(Ax)_j − b_j·x_j)`, whose gradient needs both the row and the
/// column contribution of `A` at `j`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    dim: usize,
    /// Row-major d×d.
    a: Vec<f64>,
    b: Vec<f64>,
    x_star: Vec<f64>,
}

impl Quadratic {
    pub fn seeded(dim: usize, seed: u64) -> Result<Quadratic> {
        require_dim("quadratic", dim, 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = 0.0;
                for k in 0..dim {
                    acc += g[k * dim + i] * g[k * dim + j];
                }
                a[i * dim + j] = acc / dim as f64 + if i == j { 1.0 } else { 0.0 };
            }
        }
        let x_star: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = mat_vec(&a, &x_star, dim);
        Ok(Quadratic { dim, a, b, x_star })
    }

    /// `A = I`, `b = 0`: gradient is the identity map.
    pub fn identity(dim: usize) -> Result<Quadratic> {
        require_dim("quadratic", dim, 1)?;
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            a[i * dim + i] = 1.0;
        }
        Ok(Quadratic {
            dim,
            a,
            b: vec![0.0; dim],
            x_star: vec![0.0; dim],
        })
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.x_star
    }
}

fn mat_vec(a: &[f64], x: &[f64], dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|i| math::dot(&a[i * dim..(i + 1) * dim], x))
        .collect()
}

impl Objective for Quadratic {
    fn name(&self) -> &'static str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn dataset_size(&self) -> usize {
        self.dim
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Smooth
    }

    fn eval(&self, theta: &[f64], batch: &[usize]) -> Result<(f64, Vec<f64>)> {
        let d = self.dim;
        check_eval_args("quadratic", d, d, theta, batch)?;
        let ax = mat_vec(&self.a, theta, d);
        let inv = 1.0 / batch.len() as f64;
        let scale = d as f64 * inv;
        let mut loss = 0.0;
        let mut grad = vec![0.0; d];
        for &j in batch {
            loss += d as f64 * (0.5 * theta[j] * ax[j] - self.b[j] * theta[j]);
            // ∇[x_j·(Ax)_j] = (Ax)_j·e_j + x_j·(row j of A).
            grad[j] += scale * (0.5 * ax[j] - self.b[j]);
            let row = &self.a[j * d..(j + 1) * d];
            for (gk, &ajk) in grad.iter_mut().zip(row) {
                *gk += scale * 0.5 * theta[j] * ajk;
            }
        }
        Ok((loss * inv, grad))
    }
}

/// The banana-valley benchmark `Σ_j 100(x_{j+1} − x_j²)² + (1 − x_j)²`,
/// one term per consecutive coordinate pair, scaled by `d−1` so the mean
/// over all terms is the classic sum.
#[derive(Debug, Clone)]
pub struct Rosenbrock {
    dim: usize,
}

impl Rosenbrock {
    pub fn new(dim: usize) -> Result<Rosenbrock> {
        require_dim("rosenbrock", dim, 2)?;
        Ok(Rosenbrock { dim })
    }

    /// Global minimizer: the all-ones vector, objective value zero.
    pub fn minimizer(&self) -> Vec<f64> {
        vec![1.0; self.dim]
    }
}

impl Objective for Rosenbrock {
    fn name(&self) -> &'static str {
        "rosenbrock"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn dataset_size(&self) -> usize {
        self.dim - 1
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Smooth
    }

    fn eval(&self, theta: &[f64], batch: &[usize]) -> Result<(f64, Vec<f64>)> {
        check_eval_args("rosenbrock", self.dim, self.dim - 1, theta, batch)?;
        let scale = (self.dim - 1) as f64;
        let inv = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        let mut grad = vec![0.0; self.dim];
        for &j in batch {
            let xj = theta[j];
            let xn = theta[j + 1];
            let gap = xn - xj * xj;
            loss += scale * (100.0 * gap * gap + (1.0 - xj) * (1.0 - xj));
            grad[j] += scale * inv * (-400.0 * xj * gap - 2.0 * (1.0 - xj));
            grad[j + 1] += scale * inv * 200.0 * gap;
        }
        Ok((loss * inv, grad))
    }
}
