use serde::Serialize;

use super::{Individual, MeritKind, OptimizerError};
use crate::rng;
use crate::seqcore::InterleavedCode;

/// Parameters of a best-of-`count` random search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchConfig {
    pub count: usize,
    pub arity: u8,
    pub length: usize,
    pub n_fft: usize,
    pub merit: MeritKind,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            count: 100,
            arity: 3,
            length: crate::seqcore::DEFAULT_LENGTH,
            n_fft: crate::spectral::DEFAULT_FFT_LEN,
            merit: MeritKind::AvgMin,
            seed: 0,
        }
    }
}

/// Draws `count` uniform codes and keeps the best. Ties keep the earliest draw.
pub fn random_search(cfg: &SearchConfig) -> Result<Individual, OptimizerError> {
    if cfg.count == 0 {
        return Err(OptimizerError::InvalidConfig(
            "count must be at least 1".into(),
        ));
    }
    cfg.merit.check_arity(cfg.arity)?;
    let mut rng = rng::stream(cfg.seed, rng::SEARCH_STREAM);
    let mut best: Option<Individual> = None;
    for _ in 0..cfg.count {
        let code = InterleavedCode::random(&mut rng, cfg.length, cfg.arity)?;
        let candidate = Individual::evaluate(code, cfg.merit, cfg.n_fft)?;
        if best.as_ref().is_none_or(|b| candidate.score > b.score) {
            best = Some(candidate);
        }
    }
    Ok(best.expect("count >= 1"))
}
