//! Merit functions and searches over one-of-N codes.

mod ga;
mod merit;
mod search;

use serde::Serialize;
use thiserror::Error;

use crate::seqcore::{InterleavedCode, SeqError};
use crate::spectral::SpectralError;

pub use ga::{run, GaConfig, GaOutcome, GaState, GenerationRecord, ProgressSink};
pub use merit::{merit, merit_from_minima, plane_minima, MeritKind};
pub use search::{random_search, SearchConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("merit {kind} does not support arity {arity}")]
    ArityUnsupported { kind: MeritKind, arity: u8 },
    #[error("unknown merit function {0:?} (expected max-min, avg-min or avg-pairs)")]
    UnknownMerit(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Code(#[from] SeqError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// A scored code.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub code: InterleavedCode,
    pub score: f64,
}

impl Individual {
    pub fn evaluate(
        code: InterleavedCode,
        kind: MeritKind,
        n_fft: usize,
    ) -> Result<Self, OptimizerError> {
        let score = merit(&code, kind, n_fft)?;
        Ok(Self { code, score })
    }
}

/// Machine-readable description of a code: the `optimize` / `sample` result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeSummary {
    pub word: String,
    pub arity: u8,
    pub merit_kind: MeritKind,
    pub score_db: f64,
    pub per_sequence_min_db: Vec<f64>,
    pub duty_cycles: Vec<f64>,
}

impl CodeSummary {
    pub fn new(
        code: &InterleavedCode,
        kind: MeritKind,
        n_fft: usize,
    ) -> Result<Self, OptimizerError> {
        let minima = plane_minima(code, n_fft)?;
        Ok(Self {
            word: code.to_word(),
            arity: code.arity(),
            merit_kind: kind,
            score_db: merit_from_minima(&minima, kind)?,
            per_sequence_min_db: minima,
            duty_cycles: code
                .decode()
                .iter()
                .map(|s| s.duty_cycle().ratio())
                .collect(),
        })
    }
}
