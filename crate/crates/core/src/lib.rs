//! Simulation and analysis toolkit for the non-coherent wideband multipath
//! fading relay channel.
//!
//! The relaying scheme is peaky FSK with frequency binning: the source sends
//! one of `M_S = M_R * M_D` tones with a low duty factor, the relay decodes
//! only the bin of the tone and forwards it, and the destination uses the bin
//! to search `M_D` instead of `M_S` tones in the source signal.
//!
//! * [`binning`]: message <-> (bin, offset) bijection.
//! * [`channel`]: system parameters and correlation-domain channel model.
//! * [`scheme`]: threshold decoders and end-to-end trials.
//! * [`analysis`]: wideband rate bounds, codebook planning, Chernoff bounds
//!   and the exact error oracle.
//! * [`harness`]: seeded Monte Carlo batches, parameter sweeps and record
//!   output.

pub mod analysis;
pub mod binning;
pub mod channel;
pub mod error;
pub mod harness;
pub mod scheme;

pub use binning::{CodebookParams, Message};
pub use channel::{GainModel, Link, SystemParams};
pub use error::{Error, Result};
pub use scheme::{DecodeOutcome, Engine, ErrorType, Thresholds, TrialSetup};
