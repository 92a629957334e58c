//! Light-efficient flutter-shutter exposure codes.
//!
//! Design, scoring and evaluation of coded exposures for motion deblurring:
//!
//! - [`seqcore`]: binary exposure sequences, complements and one-of-N
//!   interleaved code words.
//! - [`spectral`]: zero-padded power spectra in dB, worst-bin extraction and
//!   combined multi-window response.
//! - [`optimizer`]: merit functions, best-of-M random search and the genetic
//!   algorithm.
//! - [`imaging`]: coded motion blur, exposure-proportional noise,
//!   Richardson-Lucy deconvolution and recombination of complementary
//!   exposures, with RMSE/PSNR metrics.
//!
//! All randomness is seeded; see [`rng`] for how streams are split.

pub mod fixtures;
pub mod imaging;
pub mod optimizer;
pub mod rng;
pub mod seqcore;
pub mod spectral;

pub use optimizer::{MeritKind, OptimizerError};
pub use seqcore::{DutyCycle, ExposureSequence, InterleavedCode, SeqError};
pub use spectral::{PowerSpectrum, SpectralError, FLOOR_DB};
