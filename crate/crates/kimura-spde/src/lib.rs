//! Numerics for a stochastic Kimura equation — a degenerate diffusion on
//! the half line whose coefficient vanishes at the absorbing boundary,
//! driven by a multiplicative Gaussian space-time potential.
//!
//! The crate is organized in layers:
//!
//! * [`specfun`] — overflow-safe scaled Bessel and hypergeometric functions;
//! * [`quad`] — panel-based adaptive and graded-mesh quadrature;
//! * [`kernel`] — the transition kernel `q_nu`, its closed-form integrals,
//!   semigroup propagation, and the Duhamel series for a bounded potential;
//! * [`noise`] — covariance kernels and discretized Gaussian field sampling;
//! * [`chaos`] — recursive Wiener-chaos second-moment tables and the ledger
//!   of theoretical bounds they are checked against;
//! * [`montecarlo`] — mild-Euler path simulation with moment, ratio, and
//!   Hölder-exponent estimators cross-validated against the chaos tables;
//! * [`cli`] — the reproducible experiment runner behind the binary.
//!
//! Each runnable capability has a matching example under `examples/`.

pub mod chaos;
pub mod cli;
pub mod error;
pub mod kernel;
pub mod montecarlo;
pub mod noise;
pub mod quad;
pub mod specfun;
pub mod table;

pub use error::{Error, Result};
