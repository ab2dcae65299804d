//! Performance analysis of two-way amplify-and-forward relaying when the relay
//! transceiver suffers from hardware impairments.
//!
//! The relay hardware is described by two error-vector-magnitude levels,
//! `kappa_t` (transmitter) and `kappa_r` (receiver). Their distortion noise is
//! Gaussian with variance proportional to the signal power, which produces an
//! SNDR ceiling of `1/c` with `c = kappa_t^2 + kappa_r^2 + kappa_t^2 kappa_r^2`
//! and non-zero outage and error floors in the high-power regime.
//!
//! Modules:
//!
//! * [`specfun`]: `K1`, `erfc`, lower incomplete gamma and the Gaussian Q-function.
//! * [`model`]: system parameters, relaying gain and instantaneous SNDR.
//! * [`analytic`]: exact and asymptotic outage probability, SER by quadrature,
//!   asymptotic SER and the design inversions.
//! * [`montecarlo`]: reproducible parallel sampling used as an independent check.
//! * [`cli`]: the `twoway-impair` command-line front end.

pub mod analytic;
pub mod cli;
mod error;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
