//! Generational GA over one-of-N code words.
//!
//! Each step keeps the top `elite_count` individuals, refills the rest by
//! roulette selection on `selection_offset + score`, then applies single-point
//! tail-swap crossover and per-gene mutation to the non-elite slots only.
//!
//! Random draws per step, in order, all from the search stream:
//!
//! 1. one roulette draw per non-elite slot, ascending slot index;
//! 2. per non-elite slot: a crossover coin, then (if taken) partner and cut;
//! 3. per non-elite slot, per gene: a mutation coin, then (if taken) the digit.
//!
//! Scoring is pure and may run in parallel without affecting the stream.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{merit, Individual, MeritKind, OptimizerError};
use crate::rng;
use crate::seqcore::{InterleavedCode, MAX_ARITY, MIN_ARITY};
use crate::spectral::FLOOR_DB;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub elite_count: usize,
    pub crossover_prob: f64,
    pub mutation_prob_per_gene: f64,
    pub selection_offset: f64,
    pub arity: u8,
    pub length: usize,
    pub n_fft: usize,
    pub merit: MeritKind,
    pub generations: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 1000,
            elite_count: 3,
            crossover_prob: 0.95,
            mutation_prob_per_gene: 0.015,
            selection_offset: 1000.0,
            arity: 3,
            length: crate::seqcore::DEFAULT_LENGTH,
            n_fft: crate::spectral::DEFAULT_FFT_LEN,
            merit: MeritKind::AvgPairsMaxMin,
            generations: 2000,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let invalid = |msg: String| Err(OptimizerError::InvalidConfig(msg));
        if self.population_size == 0 {
            return invalid("population size must be at least 1".into());
        }
        if self.elite_count >= self.population_size {
            return invalid(format!(
                "elite count {} must be below population size {}",
                self.elite_count, self.population_size
            ));
        }
        for (name, p) in [
            ("crossover probability", self.crossover_prob),
            ("mutation probability", self.mutation_prob_per_gene),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return invalid(format!("{name} {p} outside [0, 1]"));
            }
        }
        // Every score is at least FLOOR_DB, so this keeps all weights positive.
        if !self.selection_offset.is_finite() || self.selection_offset + FLOOR_DB <= 0.0 {
            return invalid(format!(
                "selection offset {} must exceed {}",
                self.selection_offset, -FLOOR_DB
            ));
        }
        if !(MIN_ARITY..=MAX_ARITY).contains(&self.arity) {
            return invalid(format!("arity {} outside 2..=5", self.arity));
        }
        if self.length == 0 {
            return invalid("code length must be at least 1".into());
        }
        if self.n_fft < self.length.max(2) {
            return invalid(format!(
                "transform length {} shorter than code length {}",
                self.n_fft, self.length
            ));
        }
        self.merit.check_arity(self.arity)
    }
}

/// One line of GA progress: best-ever score and word after a generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub score: f64,
    pub word: String,
}

pub trait ProgressSink {
    fn record(&mut self, record: &GenerationRecord);
}

impl<F: FnMut(&GenerationRecord)> ProgressSink for F {
    fn record(&mut self, record: &GenerationRecord) {
        self(record)
    }
}

#[derive(Debug, Clone)]
pub struct GaState {
    population: Vec<Individual>,
    generation: usize,
    rng: rng::Rng,
    best_ever: Individual,
}

impl GaState {
    /// Uniformly random initial population, scored and sorted.
    pub fn init(cfg: &GaConfig) -> Result<Self, OptimizerError> {
        cfg.validate()?;
        let mut rng = rng::stream(cfg.seed, rng::SEARCH_STREAM);
        let codes = (0..cfg.population_size)
            .map(|_| InterleavedCode::random(&mut rng, cfg.length, cfg.arity))
            .collect::<Result<Vec<_>, _>>()?;
        let population = score_and_sort(codes, cfg)?;
        let best_ever = population[0].clone();
        Ok(Self {
            population,
            generation: 0,
            rng,
            best_ever,
        })
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn best_ever(&self) -> &Individual {
        &self.best_ever
    }

    pub fn record(&self) -> GenerationRecord {
        GenerationRecord {
            generation: self.generation,
            score: self.best_ever.score,
            word: self.best_ever.code.to_word(),
        }
    }

    /// Advances one generation.
    pub fn step(&mut self, cfg: &GaConfig) -> Result<(), OptimizerError> {
        let size = self.population.len();
        let elite = cfg.elite_count.min(size);
        let mut next: Vec<InterleavedCode> = self.population[..elite]
            .iter()
            .map(|ind| ind.code.clone())
            .collect();

        let wheel = RouletteWheel::new(&self.population, cfg.selection_offset);
        for _ in elite..size {
            let picked = wheel.spin(&mut self.rng);
            next.push(self.population[picked].code.clone());
        }

        if elite < size {
            let length = cfg.length;
            for i in elite..size {
                if self.rng.random::<f64>() < cfg.crossover_prob {
                    let partner = self.rng.random_range(elite..size);
                    let cut = self.rng.random_range(0..length);
                    swap_tails(&mut next, i, partner, cut);
                }
            }
            for code in &mut next[elite..] {
                for gene in code.planes_mut() {
                    if self.rng.random::<f64>() < cfg.mutation_prob_per_gene {
                        *gene = self.rng.random_range(0..cfg.arity);
                    }
                }
            }
        }

        self.population = score_and_sort(next, cfg)?;
        self.generation += 1;
        if self.population[0].score > self.best_ever.score {
            self.best_ever = self.population[0].clone();
        }
        Ok(())
    }
}

fn swap_tails(codes: &mut [InterleavedCode], a: usize, b: usize, cut: usize) {
    if a == b {
        return;
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let (head, tail) = codes.split_at_mut(hi);
    head[lo].planes_mut()[cut..].swap_with_slice(&mut tail[0].planes_mut()[cut..]);
}

fn score_and_sort(
    codes: Vec<InterleavedCode>,
    cfg: &GaConfig,
) -> Result<Vec<Individual>, OptimizerError> {
    let mut scored = codes
        .into_par_iter()
        .map(|code| {
            let score = merit(&code, cfg.merit, cfg.n_fft)?;
            Ok(Individual { code, score })
        })
        .collect::<Result<Vec<_>, OptimizerError>>()?;
    // Stable: equal scores keep their original order.
    scored.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(scored)
}

/// Fitness-proportional selection with integer draws over the cumulative
/// weights `max(0, offset + score)`.
struct RouletteWheel {
    cumulative: Vec<f64>,
    total: u64,
}

impl RouletteWheel {
    fn new(population: &[Individual], offset: f64) -> Self {
        let cumulative: Vec<f64> = population
            .iter()
            .scan(0.0, |acc, ind| {
                *acc += (offset + ind.score).max(0.0);
                Some(*acc)
            })
            .collect();
        let total = cumulative.last().copied().unwrap_or(0.0).floor() as u64;
        Self { cumulative, total }
    }

    fn spin<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.total == 0 {
            return rng.random_range(0..self.cumulative.len());
        }
        let r = rng.random_range(0..self.total) as f64;
        // First individual whose cumulative weight exceeds the draw.
        self.cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1)
    }
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Individual,
    pub history: Vec<GenerationRecord>,
}

/// Initializes, then runs `cfg.generations` steps. The sink receives the
/// initial population's record (generation 0) and one record per step.
pub fn run<S: ProgressSink + ?Sized>(
    cfg: &GaConfig,
    sink: &mut S,
) -> Result<GaOutcome, OptimizerError> {
    if cfg.generations == 0 {
        return Err(OptimizerError::InvalidConfig(
            "generations must be at least 1".into(),
        ));
    }
    let mut state = GaState::init(cfg)?;
    let mut history = Vec::with_capacity(cfg.generations + 1);
    let first = state.record();
    sink.record(&first);
    history.push(first);
    for _ in 0..cfg.generations {
        state.step(cfg)?;
        let rec = state.record();
        sink.record(&rec);
        history.push(rec);
    }
    Ok(GaOutcome {
        best: state.best_ever.clone(),
        history,
    })
}
