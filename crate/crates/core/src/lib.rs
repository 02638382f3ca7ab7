//! Synthesis, channel simulation and blind identification of Alamouti (AL)
//! and spatial-multiplexing (SM) coded SC-FDMA signals at a single receive
//! antenna.
//!
//! The crate is organised along the processing chain:
//!
//! * [`modem`] builds two-antenna SC-FDMA transmit frames.
//! * [`channel`] applies the 2x1 frequency-selective channel, receiver
//!   impairments and additive noise.
//! * [`identifier`] computes the fourth-order feature, the CFAR threshold
//!   and the AL/SM decision from the received samples alone.
//! * [`theory`] evaluates the closed-form detection performance.
//! * [`harness`] runs configuration-driven Monte Carlo experiments.

pub mod channel;
pub mod constellation;
pub mod error;
pub mod harness;
pub mod identifier;
pub mod iq;
pub mod modem;
pub mod rng;
pub mod theory;

pub use num_complex::Complex64;

pub use channel::{ChannelRealization, ImpairmentParams, RxSequence};
pub use constellation::Constellation;
pub use error::{Error, Result};
pub use identifier::{DecisionReport, FeatureVector};
pub use modem::{Mapping, ScFdmaParams, StbcScheme, SymbolBlock, TxFrame};
