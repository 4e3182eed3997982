use alloc::format;
use alloc::vec::Vec;

use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::math;
use crate::{Error, Result};

/// Outcome of a finite-difference gradient comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Largest `|analytic - fd| / max(1, |fd|)` over all coordinates.
    pub max_rel_err: f64,
    /// Flat coordinate index where the maximum occurred.
    pub worst_index: usize,
    pub analytic_at_worst: f64,
    pub fd_at_worst: f64,
}

/// Compares an analytic gradient against central finite differences of a
/// black-box loss, one coordinate at a time.
///
/// The relative error at coordinate `i` is `|g[i] - fd[i]| / max(1, |fd[i]|)`,
/// which behaves like an absolute error for small gradients and a relative
/// one for large gradients.
pub fn grad_check_fn<F>(
    mut loss: F,
    theta: &[f64],
    analytic: &[f64],
    fd_step: f64,
) -> Result<GradCheckReport>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if analytic.len() != theta.len() {
        return Err(Error::Length {
            op: "grad_check",
            expected: theta.len(),
            got: analytic.len(),
        });
    }
    if !(fd_step.is_finite() && fd_step > 0.0) {
        return Err(Error::InvalidParam {
            name: "fd_step",
            detail: format!("must be positive and finite, got {fd_step}"),
        });
    }
    let mut point = theta.to_vec();
    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_index: 0,
        analytic_at_worst: if theta.is_empty() { 0.0 } else { analytic[0] },
        fd_at_worst: 0.0,
    };
    for i in 0..theta.len() {
        point[i] = theta[i] + fd_step;
        let up = loss(&point)?;
        point[i] = theta[i] - fd_step;
        let down = loss(&point)?;
        point[i] = theta[i];
        let fd = (up - down) / (2.0 * fd_step);
        if !fd.is_finite() {
            return Err(Error::NonFinite {
                place: format!("finite difference at coordinate {i}"),
            });
        }
        let rel = math::abs(analytic[i] - fd) / f64::max(1.0, math::abs(fd));
        if rel > report.max_rel_err {
            report.max_rel_err = rel;
            report.worst_index = i;
            report.analytic_at_worst = analytic[i];
            report.fd_at_worst = fd;
        }
    }
    Ok(report)
}

/// Gradient check for a tape-built scalar graph.
///
/// `build` is called once per evaluation with a fresh tape and the parameter
/// nodes in the order of `params`; it must return the scalar loss node.  The
/// analytic gradient comes from one backward pass, the reference from central
/// differences over the flattened parameter vector.
pub fn grad_check_tape<F>(mut build: F, params: &[Tensor], fd_step: f64) -> Result<GradCheckReport>
where
    F: FnMut(&mut Tape, &[Var]) -> Result<Var>,
{
    let shapes: Vec<Vec<usize>> = params.iter().map(|p| p.shape().to_vec()).collect();
    let theta: Vec<f64> = params.iter().flat_map(|p| p.data().iter().copied()).collect();

    let run = |flat: &[f64], build: &mut F, want_grad: bool| -> Result<(f64, Option<Vec<f64>>)> {
        let mut tape = Tape::new();
        let mut vars = Vec::with_capacity(shapes.len());
        let mut off = 0;
        for shape in &shapes {
            let n: usize = shape.iter().product();
            let t = Tensor::from_vec(shape, flat[off..off + n].to_vec())?;
            vars.push(tape.param(t)?);
            off += n;
        }
        let loss = build(&mut tape, &vars)?;
        let value = tape.item(loss)?;
        if !want_grad {
            return Ok((value, None));
        }
        let grads = tape.backward(loss)?;
        let mut flat_grad = Vec::with_capacity(flat.len());
        for &v in &vars {
            let g = grads.wrt(v).expect("registered parameter");
            flat_grad.extend_from_slice(g.data());
        }
        Ok((value, Some(flat_grad)))
    };

    let (_, grad) = run(&theta, &mut build, true)?;
    let analytic = grad.expect("gradient requested");
    grad_check_fn(
        |point| run(point, &mut build, false).map(|(v, _)| v),
        &theta,
        &analytic,
        fd_step,
    )
}
