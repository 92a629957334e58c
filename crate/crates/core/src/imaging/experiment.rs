//! The simulation matrix: flat, coded pair and interleaved triplet exposures
//! of one scene, each blurred, noised, deblurred and gain-restored, plus the
//! averages of complementary groups.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::io::save_png;
use super::{
    add_noise, blur, combine, restore_gain, richardson_lucy, rmse_psnr, ImagingError, MotionPsf,
    Quality, RasterImage,
};
use crate::rng;
use crate::seqcore::{ExposureSequence, InterleavedCode};

pub const DEFAULT_NOISE_FACTOR: f64 = 0.01;
pub const DEFAULT_RL_ITERATIONS: usize = 20;

/// Exposure duty of the coded pair: 50% open chips behind a polarizing
/// shutter that passes half the light.
const CODED_PAIR_DUTY: f64 = 0.25;
const SHORT_FLAT_LEN: usize = 17;
const LONG_FLAT_LEN: usize = 52;

#[derive(Debug, Clone, PartialEq)]
pub struct SimCondition {
    pub name: String,
    pub psf: MotionPsf,
    pub duty_cycle: f64,
    pub noise_factor: f64,
    pub rl_iterations: usize,
    /// Noise stream index; see [`crate::rng::condition_stream`].
    pub stream: usize,
}

/// Conditions whose deblurred results are averaged into one image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedSpec {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub conditions: Vec<SimCondition>,
    pub combinations: Vec<CombinedSpec>,
}

impl ExperimentPlan {
    /// The standard matrix. Triplet windows are named `s1..sN` from the
    /// highest bit plane down, each exposed for its own duty cycle.
    pub fn standard(
        coded: &ExposureSequence,
        triplet: &InterleavedCode,
        noise_factor: f64,
        rl_iterations: usize,
    ) -> Result<Self, ImagingError> {
        let mut conditions = Vec::new();
        let mut push = |name: String, psf: MotionPsf, duty_cycle: f64| {
            let stream = conditions.len();
            conditions.push(SimCondition {
                name,
                psf,
                duty_cycle,
                noise_factor,
                rl_iterations,
                stream,
            });
        };
        push("flat".into(), MotionPsf::flat(LONG_FLAT_LEN)?, 1.0);
        push(
            "raskar".into(),
            MotionPsf::from_sequence(coded)?,
            CODED_PAIR_DUTY,
        );
        push(
            "raskarInv".into(),
            MotionPsf::from_sequence(&coded.complement())?,
            CODED_PAIR_DUTY,
        );
        let mut triplet_names = Vec::new();
        for (i, plane) in (0..triplet.arity()).rev().enumerate() {
            let seq = triplet.plane(plane).expect("plane below arity");
            let name = format!("s{}", i + 1);
            push(
                name.clone(),
                MotionPsf::from_sequence(&seq)?,
                seq.duty_cycle().ratio(),
            );
            triplet_names.push(name);
        }
        let short_duty = 1.0 / triplet_names.len() as f64;
        let short_names: Vec<String> = (1..=triplet_names.len()).map(|i| format!("a{i}")).collect();
        for name in &short_names {
            push(name.clone(), MotionPsf::flat(SHORT_FLAT_LEN)?, short_duty);
        }
        Ok(Self {
            conditions,
            combinations: vec![
                CombinedSpec {
                    name: "raskarBoth".into(),
                    members: vec!["raskar".into(), "raskarInv".into()],
                },
                CombinedSpec {
                    name: "s".into(),
                    members: triplet_names,
                },
                CombinedSpec {
                    name: "a".into(),
                    members: short_names,
                },
            ],
        })
    }

    /// A single condition with a caller-supplied kernel.
    pub fn single(
        name: &str,
        psf: MotionPsf,
        duty_cycle: f64,
        noise_factor: f64,
        rl_iterations: usize,
    ) -> Self {
        Self {
            conditions: vec![SimCondition {
                name: name.to_string(),
                psf,
                duty_cycle,
                noise_factor,
                rl_iterations,
                stream: 0,
            }],
            combinations: Vec::new(),
        }
    }

    /// Restricts the plan to the named conditions and combinations. Selecting a
    /// combination pulls in its members; combinations with any member missing
    /// are dropped. Noise streams are unchanged, so selected conditions give
    /// the same images as in the full plan.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, ImagingError> {
        let mut wanted: Vec<&str> = Vec::new();
        for name in names.iter().map(AsRef::as_ref) {
            if let Some(combo) = self.combinations.iter().find(|c| c.name == name) {
                wanted.extend(combo.members.iter().map(String::as_str));
            } else if self.conditions.iter().any(|c| c.name == name) {
                wanted.push(name);
            } else {
                return Err(ImagingError::UnknownCondition(name.to_string()));
            }
        }
        let conditions: Vec<SimCondition> = self
            .conditions
            .iter()
            .filter(|c| wanted.contains(&c.name.as_str()))
            .cloned()
            .collect();
        let combinations = self
            .combinations
            .iter()
            .filter(|combo| {
                combo
                    .members
                    .iter()
                    .all(|m| conditions.iter().any(|c| &c.name == m))
            })
            .cloned()
            .collect();
        Ok(Self {
            conditions,
            combinations,
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .map(|c| c.name.as_str())
            .chain(self.combinations.iter().map(|c| c.name.as_str()))
            .collect()
    }

    /// Columns cropped from each side for the interior metric: the widest
    /// kernel's support minus one, so all conditions share one region.
    pub fn interior_margin(&self) -> usize {
        self.conditions
            .iter()
            .map(|c| c.psf.len())
            .max()
            .unwrap_or(1)
            - 1
    }
}

/// Error of one output against ground truth over the whole blurred geometry
/// (truth zero-padded on the right) and over the interior columns only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImageMetrics {
    pub full: Quality,
    pub interior: Quality,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionOutput {
    pub name: String,
    pub duty_cycle: f64,
    pub psf_len: usize,
    pub blurred: RasterImage,
    pub noisy: RasterImage,
    /// Deconvolved and gain-restored.
    pub deblurred: RasterImage,
    /// Noisy observation after gain restore, before deconvolution.
    pub observed_metrics: ImageMetrics,
    pub metrics: ImageMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedOutput {
    pub name: String,
    pub members: Vec<String>,
    pub image: RasterImage,
    pub metrics: ImageMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub seed: u64,
    pub truth_width: usize,
    pub truth_height: usize,
    pub interior_margin: usize,
    pub conditions: Vec<ConditionOutput>,
    pub combined: Vec<CombinedOutput>,
}

fn measure(
    img: &RasterImage,
    truth: &RasterImage,
    margin: usize,
) -> Result<ImageMetrics, ImagingError> {
    let reference = truth.pad_right(img.width())?;
    let full = rmse_psnr(img, &reference)?;
    let interior = if truth.width() > 2 * margin {
        let end = truth.width() - margin;
        rmse_psnr(
            &img.crop_columns(margin, end)?,
            &reference.crop_columns(margin, end)?,
        )?
    } else {
        full
    };
    Ok(ImageMetrics { full, interior })
}

fn run_condition(
    truth: &RasterImage,
    cond: &SimCondition,
    seed: u64,
    margin: usize,
) -> Result<ConditionOutput, ImagingError> {
    let blurred = blur(truth, &cond.psf, cond.duty_cycle)?;
    let mut noise_rng = rng::condition_stream(seed, cond.stream);
    let noisy = add_noise(&blurred, cond.noise_factor, cond.duty_cycle, &mut noise_rng)?;
    let restored = richardson_lucy(&noisy, &cond.psf, cond.rl_iterations)?;
    let deblurred = restore_gain(&restored, cond.duty_cycle)?;
    let observed_metrics = measure(&restore_gain(&noisy, cond.duty_cycle)?, truth, margin)?;
    let metrics = measure(&deblurred, truth, margin)?;
    Ok(ConditionOutput {
        name: cond.name.clone(),
        duty_cycle: cond.duty_cycle,
        psf_len: cond.psf.len(),
        blurred,
        noisy,
        deblurred,
        observed_metrics,
        metrics,
    })
}

/// Runs every condition of `plan` against `truth`. Deterministic in `seed`.
pub fn run_experiment_matrix(
    truth: &RasterImage,
    plan: &ExperimentPlan,
    seed: u64,
) -> Result<SimulationReport, ImagingError> {
    let margin = plan.interior_margin();
    let conditions = plan
        .conditions
        .par_iter()
        .map(|cond| run_condition(truth, cond, seed, margin))
        .collect::<Result<Vec<_>, _>>()?;
    let combined = plan
        .combinations
        .iter()
        .map(|spec| {
            let members = spec
                .members
                .iter()
                .map(|m| {
                    conditions
                        .iter()
                        .find(|c| &c.name == m)
                        .map(|c| c.deblurred.clone())
                        .ok_or_else(|| ImagingError::UnknownCondition(m.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let image = combine(&members)?;
            let metrics = measure(&image, truth, margin)?;
            Ok(CombinedOutput {
                name: spec.name.clone(),
                members: spec.members.clone(),
                image,
                metrics,
            })
        })
        .collect::<Result<Vec<_>, ImagingError>>()?;
    Ok(SimulationReport {
        seed,
        truth_width: truth.width(),
        truth_height: truth.height(),
        interior_margin: margin,
        conditions,
        combined,
    })
}

#[derive(Serialize)]
struct ConditionSummary<'a> {
    name: &'a str,
    duty_cycle: f64,
    psf_len: usize,
    width: usize,
    height: usize,
    observed: ImageMetrics,
    deblurred: ImageMetrics,
}

#[derive(Serialize)]
struct CombinedSummary<'a> {
    name: &'a str,
    members: &'a [String],
    deblurred: ImageMetrics,
}

/// Metrics-only view of a report, as written to `report.json`.
#[derive(Serialize)]
pub struct ReportSummary<'a> {
    seed: u64,
    truth_width: usize,
    truth_height: usize,
    interior_margin: usize,
    conditions: Vec<ConditionSummary<'a>>,
    combined: Vec<CombinedSummary<'a>>,
}

impl SimulationReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionOutput> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn combination(&self, name: &str) -> Option<&CombinedOutput> {
        self.combined.iter().find(|c| c.name == name)
    }

    /// Metrics of a condition's deblurred image or of a combination.
    pub fn metrics(&self, name: &str) -> Option<ImageMetrics> {
        self.condition(name)
            .map(|c| c.metrics)
            .or_else(|| self.combination(name).map(|c| c.metrics))
    }

    pub fn summary(&self) -> ReportSummary<'_> {
        ReportSummary {
            seed: self.seed,
            truth_width: self.truth_width,
            truth_height: self.truth_height,
            interior_margin: self.interior_margin,
            conditions: self
                .conditions
                .iter()
                .map(|c| ConditionSummary {
                    name: &c.name,
                    duty_cycle: c.duty_cycle,
                    psf_len: c.psf_len,
                    width: c.deblurred.width(),
                    height: c.deblurred.height(),
                    observed: c.observed_metrics,
                    deblurred: c.metrics,
                })
                .collect(),
            combined: self
                .combined
                .iter()
                .map(|c| CombinedSummary {
                    name: &c.name,
                    members: &c.members,
                    deblurred: c.metrics,
                })
                .collect(),
        }
    }

    /// Writes `blur-<name>.png`, `blur-<name>-scaled.png` (attenuated
    /// conditions only) and `res-<name>.png` for every condition and
    /// combination. Returns the file names written.
    pub fn write_images(&self, dir: &Path) -> Result<Vec<String>, ImagingError> {
        let mut written = Vec::new();
        let mut save = |name: String, img: &RasterImage| -> Result<(), ImagingError> {
            save_png(img, &dir.join(&name))?;
            written.push(name);
            Ok(())
        };
        for c in &self.conditions {
            save(format!("blur-{}.png", c.name), &c.noisy)?;
            if c.duty_cycle != 1.0 {
                save(
                    format!("blur-{}-scaled.png", c.name),
                    &restore_gain(&c.noisy, c.duty_cycle)?,
                )?;
            }
            save(format!("res-{}.png", c.name), &c.deblurred)?;
        }
        for c in &self.combined {
            save(format!("res-{}.png", c.name), &c.image)?;
        }
        Ok(written)
    }
}
