//! Power spectra of exposure sequences.
//!
//! A sequence is zero-padded to `n_fft` samples, transformed, and bins
//! `0..=n_fft/2` are mapped to `20 log10(|F(j)| / (n_fft / 2))`. DC is part
//! of the bin range. Exact nulls map to [`FLOOR_DB`] instead of `-inf`.

use std::cell::RefCell;
use std::fmt::Write as _;
use std::sync::Arc;

pub use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::seqcore::ExposureSequence;

/// Level assigned to exact spectral nulls. Every spectrum value is at least this.
pub const FLOOR_DB: f64 = -300.0;

/// Default transform length for 52-chip windows.
pub const DEFAULT_FFT_LEN: usize = 64;

/// Magnitudes at or below this are exact nulls polluted by transform roundoff.
///
/// Binary windows have integer-valued samples, so a true null is exactly zero;
/// roundoff for transform lengths in use here stays below `1e-12`.
pub const NULL_MAGNITUDE: f64 = 1e-9;

/// Relative tolerance of the complement magnitude check.
pub const COMPLEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("transform length {n_fft} shorter than sequence length {len}")]
    TooShort { n_fft: usize, len: usize },
    #[error("transform length must be at least 2, got {0}")]
    InvalidLength(usize),
    #[error("spectrum has {found} bins, expected {expected} for n_fft={n_fft}")]
    BinCount {
        n_fft: usize,
        expected: usize,
        found: usize,
    },
    #[error("cannot combine spectra with different transform lengths ({0} vs {1})")]
    MixedLengths(usize, usize),
    #[error("no spectra to combine")]
    EmptyInput,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

/// Forward DFT of `samples` zero-padded to `n` points. Returns all `n` bins.
///
/// # Panics
///
/// If `samples.len() > n`.
pub fn dft(samples: &[f64], n: usize) -> Vec<Complex<f64>> {
    assert!(samples.len() <= n, "dft input longer than transform");
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n)
        .collect();
    if n > 0 {
        forward_plan(n).process(&mut buf);
    }
    buf
}

fn check_len(len: usize, n_fft: usize) -> Result<(), SpectralError> {
    if n_fft < 2 {
        return Err(SpectralError::InvalidLength(n_fft));
    }
    if n_fft < len {
        return Err(SpectralError::TooShort { n_fft, len });
    }
    Ok(())
}

fn magnitude_to_db(magnitude: f64, n_fft: usize) -> f64 {
    if magnitude <= NULL_MAGNITUDE {
        return FLOOR_DB;
    }
    (20.0 * (magnitude / (n_fft as f64 / 2.0)).log10()).max(FLOOR_DB)
}

/// dB magnitudes of bins `0..=n_fft/2` of a zero-padded transform.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    db: Vec<f64>,
    n_fft: usize,
}

impl PowerSpectrum {
    pub fn from_db(db: Vec<f64>, n_fft: usize) -> Result<Self, SpectralError> {
        let expected = n_fft / 2 + 1;
        if db.len() != expected {
            return Err(SpectralError::BinCount {
                n_fft,
                expected,
                found: db.len(),
            });
        }
        let db = db.into_iter().map(|v| v.max(FLOOR_DB)).collect();
        Ok(Self { db, n_fft })
    }

    pub fn db(&self) -> &[f64] {
        &self.db
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn bins(&self) -> usize {
        self.db.len()
    }

    /// Worst bin, DC included.
    pub fn min_db(&self) -> f64 {
        self.db.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `bin,db`, one row per bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin,db\n");
        for (j, v) in self.db.iter().enumerate() {
            let _ = writeln!(out, "{j},{v:.6}");
        }
        out
    }
}

pub fn power_spectrum(
    seq: &ExposureSequence,
    n_fft: usize,
) -> Result<PowerSpectrum, SpectralError> {
    check_len(seq.len(), n_fft)?;
    let samples: Vec<f64> = seq.samples().collect();
    let db = dft(&samples, n_fft)
        .iter()
        .take(n_fft / 2 + 1)
        .map(|c| magnitude_to_db(c.norm(), n_fft))
        .collect();
    Ok(PowerSpectrum { db, n_fft })
}

/// Same value as `power_spectrum(seq, n_fft)?.min_db()` without building the
/// dB vector. Used by the merit functions.
pub fn sequence_min_db(seq: &ExposureSequence, n_fft: usize) -> Result<f64, SpectralError> {
    check_len(seq.len(), n_fft)?;
    let samples: Vec<f64> = seq.samples().collect();
    let min_mag = dft(&samples, n_fft)
        .iter()
        .take(n_fft / 2 + 1)
        .map(|c| c.norm())
        .fold(f64::INFINITY, f64::min);
    Ok(magnitude_to_db(min_mag, n_fft))
}

/// Per-bin maximum across windows: the response obtained by taking each
/// frequency from whichever window passes it best.
pub fn combined_response(spectra: &[PowerSpectrum]) -> Result<PowerSpectrum, SpectralError> {
    let (first, rest) = spectra.split_first().ok_or(SpectralError::EmptyInput)?;
    let mut db = first.db.clone();
    for s in rest {
        if s.n_fft != first.n_fft {
            return Err(SpectralError::MixedLengths(first.n_fft, s.n_fft));
        }
        for (acc, &v) in db.iter_mut().zip(&s.db) {
            *acc = acc.max(v);
        }
    }
    Ok(PowerSpectrum {
        db,
        n_fft: first.n_fft,
    })
}

/// Outcome of comparing a sequence's unpadded spectrum with its complement's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementCheck {
    /// All non-DC magnitudes agree within [`COMPLEMENT_TOLERANCE`].
    pub holds: bool,
    /// Largest `| |F_c(k)| - |F_s(k)| | / max(|F_s(k)|, |F_c(k)|, 1)` over `k != 0`.
    pub max_deviation: f64,
    pub dc_sequence: f64,
    pub dc_complement: f64,
}

/// Checks that inverting the window leaves the magnitude spectrum unchanged
/// off DC. Uses the unpadded length-`W` transform, where
/// `F_c(k) = W δ(k) - F_s(k)` holds exactly.
pub fn complement_spectrum_check(seq: &ExposureSequence) -> ComplementCheck {
    let n = seq.len();
    let s: Vec<f64> = seq.samples().collect();
    let c: Vec<f64> = seq.complement().samples().collect();
    let fs = dft(&s, n);
    let fc = dft(&c, n);
    let max_deviation = fs
        .iter()
        .zip(&fc)
        .skip(1)
        .map(|(a, b)| {
            let (a, b) = (a.norm(), b.norm());
            (a - b).abs() / a.max(b).max(1.0)
        })
        .fold(0.0, f64::max);
    ComplementCheck {
        holds: max_deviation <= COMPLEMENT_TOLERANCE,
        max_deviation,
        dc_sequence: fs[0].norm(),
        dc_complement: fc[0].norm(),
    }
}
