//! Complex-baseband simulation of secure frequency-hopping ISAC waveforms.
//!
//! The library models a MIMO frequency-hopping radar that embeds
//! communication data in its pulses while hiding the pulse timing and
//! carrier offsets behind shared secret sequences. It covers:
//!
//! - waveform synthesis with per-pulse random frequency and PRI agility
//!   ([`waveform`], [`message`], [`codes`]),
//! - the closed-form MIMO ambiguity function with a quadrature oracle
//!   ([`ambiguity`]),
//! - a flat-fading wiretap channel and zero-forcing equalization
//!   ([`channel`]),
//! - sparse matched-filter receivers for the four embedding schemes
//!   ([`receiver`]),
//! - reciprocity-based secret generation through balanced fuzzy clustering
//!   ([`crkg`]),
//! - and the Monte Carlo experiment engine plus CLI behind them
//!   ([`harness`], [`cli`]).

pub mod ambiguity;
pub mod channel;
pub mod cli;
pub mod codes;
pub mod config;
pub mod crkg;
pub mod error;
pub mod harness;
pub mod message;
pub mod receiver;
pub mod rng;
pub mod secrets;
pub mod signal;
pub mod waveform;

pub use config::{Scheme, WaveformConfig};
pub use error::{Error, Result};
pub use signal::ComplexSignal;
