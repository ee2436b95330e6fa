//! ADPCM speech coding with switchable linear and neural-network predictors.
//!
//! The crate provides:
//!
//! * [`signal_io`]: PCM file I/O and the segmental SNR metric,
//! * [`lpc`]: autocorrelation-method linear prediction (Levinson-Durbin),
//! * [`mlp`]: a small perceptron predictor trained by Levenberg-Marquardt with
//!   warm-started multistart initialization,
//! * [`quantizer`]: a midrise quantizer with Jayant step adaptation,
//! * [`codec`]: forward/backward/hybrid ADPCM with block- and sample-adaptive
//!   refits and a bit-exact stream format,
//! * [`experiments`]: synthetic corpora and the SEGSNR sweep harness.

pub mod codec;
pub mod error;
pub mod experiments;
pub mod lpc;
pub mod mlp;
pub mod quantizer;
pub mod signal_io;

pub use codec::{
    decode, encode, encode_stats, encode_with_stats, Adaptation, CodecConfig, EncodeOutput,
    EncodeStats, EncodedStream, MethodSpec, PredictorKind,
};
pub use error::{Error, Result};
pub use lpc::LinearCoeffs;
pub use mlp::{MlpWeights, TrainConfig, TrainingSet};
pub use quantizer::{Code, QuantizerConfig, QuantizerState};
pub use signal_io::{PcmFormat, SampleBuffer, SegSnrReport};
