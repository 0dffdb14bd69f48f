//! Feedback capacity of Gaussian channels with first-order moving-average
//! noise.
//!
//! The capacity of the MA(1) channel `Y_i = X_i + Z_i`, `Z_i = α U_{i-1} + U_i`,
//! under average power `P` is `-ln x0` with `x0` the root in `(0, 1)` of
//! `P x² = (1 − x²)(1 − |α| x)²`. This crate computes it (and related
//! AR(1), ARMA(1,1) and interleaved MA(2) rates) in closed form, checks it
//! against the finite-block optimization solved two independent ways, and
//! simulates the linear coding scheme that achieves it.
//!
//! ```
//! let c = fbcap::capacity::ma1_feedback_capacity(0.5, 1.0).unwrap();
//! let fp = fbcap::recursion::ma1_fixed_point(0.5, 1.0).unwrap();
//! assert!((c.rate_nats - fp.value).abs() < 1e-10);
//! ```

pub mod capacity;
pub mod error;
pub mod io;
pub mod linalg;
pub mod noise;
pub mod oracle;
pub mod quadrature;
pub mod recursion;
pub mod rng;
pub mod roots;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
