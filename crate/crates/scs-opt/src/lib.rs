//! Stochastic conjugate subgradient optimization.
//!
//! The centerpiece is an optimizer that replaces the exponential first-moment
//! average of Adam-family methods with a minimum-norm convex combination of
//! the current subgradient and the previous search direction, while keeping
//! coordinate-wise adaptive step sizes and decoupled weight decay.  Around it
//! sit the pieces needed to run and check it end to end:
//!
//! * [`autodiff`]: a reverse-mode tape over dense `f64` tensors,
//! * [`direction`]: the direction-finding recursion and its stopping test,
//! * [`optim`]: baseline optimizers, the conjugate variant, and the run loop,
//! * [`sampling`]: concentration-based batch sizing and batch drawing,
//! * [`problems`]: nonsmooth synthetic objectives and a character-level LSTM,
//! * [`verify`]: self-contained property suites used by tests and the CLI.
//!
//! The crate is `no_std` + `alloc`; everything that needs a filesystem or a
//! clock lives in the companion benchmark crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod autodiff;
pub mod direction;
pub mod error;
pub mod math;
pub mod optim;
pub mod problems;
pub mod sampling;
pub mod verify;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
