//! Channel-state feedback overhead toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`]: AR(L) fading model, exact autocovariances, seeded noisy traces.
//! * [`predictor`]: infinite-rate baselines (Wiener one-step predictor, zero-holding).
//! * [`bounds`]: rate-distortion lower bounds and the high-resolution uniform rate.
//! * [`codec`]: closed-loop innovation encoder/decoder with a uniform quantizer.
//! * [`analysis`]: steady-state MSE of the codec and its practical rate.
//! * [`harness`]: Monte Carlo experiments, config parsing, CSV output and the CLI.
//!
//! All quantities are real-valued; a complex channel is two independent instances.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bounds;
pub mod channel;
pub mod codec;
mod error;
pub mod harness;
mod history;
pub mod predictor;
pub mod stats;

pub use error::{Error, Result};

pub use analysis::{Ar1Approx, SteadyState};
pub use bounds::{BoundForm, RdCurve, RdPoint, Scheme, SchemeParams};
pub use channel::{ArModel, Autocovariance, ChannelTrace, NoiseSpec};
pub use codec::{CodecOutput, DecoderState, EncoderState, UniformQuantizer};
pub use predictor::{PredictorCoefficients, ZhEstimator};
