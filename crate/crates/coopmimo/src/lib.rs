//! Link-level Monte-Carlo simulator for a two-hop amplify-and-forward
//! cooperative MIMO-OFDM downlink.
//!
//! A base station broadcasts coded QAM symbols; relays selected by
//! positioning information (or at random) normalize what they hear and
//! retransmit one row each of a distributed space-time codeword; the
//! terminal fuses both phases and runs an iterative MMSE/PIC detector
//! around a convolutional decoder. The harness measures BER along a
//! trajectory with a tunnel segment and reproduces relay-count and
//! transmit-power comparisons.
//!
//! The numeric core is generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the aliases below fix the concrete types the CLI and
//! test suites use.

pub mod channel;
pub mod error;
pub mod fec;
pub mod geometry;
pub mod linalg;
pub mod receiver;
pub mod relay;
pub mod scalar;
pub mod seed;
pub mod sim;
pub mod stbc;

pub use error::{Result, SimError};
pub use scalar::Scalar;

/// Complex sample in the default `f64` precision.
pub type C64 = num_complex::Complex<f64>;
/// Complex sample in single precision.
pub type C32 = num_complex::Complex<f32>;
/// Real matrix in the default precision.
pub type Mat64 = linalg::Mat<f64>;
/// Space-time scheme in the default precision.
pub type Scheme64 = stbc::StbcScheme<f64>;
