//! Motion-blur simulation and reconstruction.
//!
//! The pipeline for one exposure condition is
//! `blur -> add_noise -> richardson_lucy -> restore_gain`, with complementary
//! exposures averaged afterwards by [`combine`]. Blur is horizontal and 1-D,
//! in full convolution mode, so outputs are `L - 1` columns wider than the
//! input for an `L`-tap kernel.

mod deconv;
mod experiment;
pub mod io;
mod metrics;
mod ops;
mod pattern;
mod psf;
mod raster;

use thiserror::Error;

use crate::seqcore::SeqError;

pub use deconv::{richardson_lucy, RL_EPSILON};
pub use experiment::{
    run_experiment_matrix, CombinedOutput, CombinedSpec, ConditionOutput, ExperimentPlan,
    ImageMetrics, SimCondition, SimulationReport, DEFAULT_NOISE_FACTOR, DEFAULT_RL_ITERATIONS,
};
pub use metrics::{rmse_psnr, Quality, PSNR_CAP_DB};
pub use ops::{add_noise, blur, combine, restore_gain};
pub use pattern::test_pattern;
pub use psf::MotionPsf;
pub use raster::RasterImage;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("image geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("exposure sequence has no open chips")]
    EmptySequence,
    #[error("invalid point spread function: {0}")]
    InvalidPsf(String),
    #[error("invalid duty cycle {0} (must be in (0, 1])")]
    InvalidDutyCycle(f64),
    #[error("invalid noise factor {0}")]
    InvalidNoise(f64),
    #[error("nothing to combine")]
    EmptyInput,
    #[error("unknown condition {0:?}")]
    UnknownCondition(String),
    #[error(transparent)]
    Sequence(#[from] SeqError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Codec {
        path: String,
        #[source]
        source: image::ImageError,
    },
}
