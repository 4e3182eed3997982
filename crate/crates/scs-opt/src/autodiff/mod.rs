//! Reverse-mode automatic differentiation on an append-only tape.
//!
//! The op set is the minimum needed by the objectives in this crate: shaped
//! elementwise arithmetic, matrix multiply, sigmoid/tanh, row-broadcast bias,
//! embedding lookup, concatenation and slicing along both axes, and a fused
//! row-softmax cross-entropy.  Because ops append in dependency order, the
//! reverse sweep is a single pass over the record; no separate topological
//! sort is kept.

mod gradcheck;
mod tape;
mod tensor;

pub use gradcheck::{grad_check_fn, grad_check_tape, GradCheckReport};
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;
