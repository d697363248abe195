//! Differential-modulation analog network coding (ANC-DM) over two-way
//! amplify-and-forward relay channels.
//!
//! Two sources exchange differentially encoded M-PSK frames through a relay
//! that amplifies and conjugates the superimposed signal it receives, with no
//! channel state information anywhere. Each source blindly estimates the
//! self-interference gain, subtracts its own contribution, and decodes the
//! partner's data with a linear differential detector.
//!
//! The crate provides:
//!
//! - [`modem`]: rotated M-PSK constellations, differential encode/decode,
//!   Gray bit mapping;
//! - [`channel`]: block Rayleigh fading and AWGN with reproducible,
//!   schedule-independent random substreams;
//! - [`relay`]: multiple-access reception, blind normalization estimation and
//!   the conjugate broadcast;
//! - [`receiver`]: self-interference cancellation, the differential detector
//!   plus genie-aided and coherent benchmarks, instantaneous SNR diagnostics;
//! - [`analysis`]: destination-SNR distribution, numeric and asymptotic BER,
//!   the optimal source/relay power split;
//! - [`harness`]: Monte Carlo experiments with stop rules and CSV output,
//!   surfaced through the `ancdm` command-line tool.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod harness;
pub mod modem;
pub mod receiver;
pub mod relay;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
