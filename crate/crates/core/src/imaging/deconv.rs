//! Richardson-Lucy deconvolution for horizontal motion kernels.
//!
//! The forward model convolves each row of the estimate with the causal
//! kernel, periodically over the observation width. For an observation made
//! by full-mode [`blur`](super::blur) of a `w`-column image, the observation
//! is `w + L - 1` wide and the wrap-around only touches the `L - 1` padding
//! columns, which are zero in the original scene. The scene zero-extended on
//! the right is therefore an exact solution, aligned with column 0.
//!
//! Update: `x <- x * corr(psf, obs / conv(psf, x))`, where `corr` is the
//! adjoint (flipped-kernel) convolution. Observations and model values are
//! clamped to [`RL_EPSILON`] before division; the estimate starts at the
//! clamped observation.

use rayon::prelude::*;

use super::{ImagingError, MotionPsf, RasterImage};

pub const RL_EPSILON: f64 = 1e-12;

pub fn richardson_lucy(
    observed: &RasterImage,
    psf: &MotionPsf,
    iterations: usize,
) -> Result<RasterImage, ImagingError> {
    if !psf.is_normalized() {
        return Err(ImagingError::InvalidPsf("taps must sum to one".into()));
    }
    let width = observed.width();
    let mut samples: Vec<f64> = observed
        .samples()
        .iter()
        .map(|&v| v.max(RL_EPSILON))
        .collect();
    if iterations > 0 {
        samples
            .par_chunks_mut(width)
            .for_each(|row| deconvolve_row(row, psf.taps(), iterations));
    }
    Ok(RasterImage::from_parts_unchecked(
        width,
        observed.height(),
        observed.channels(),
        samples,
    ))
}

/// `row` holds the clamped observation on entry and the estimate on return.
fn deconvolve_row(row: &mut [f64], taps: &[f64], iterations: usize) {
    let m = row.len();
    let l = taps.len();
    let active: Vec<(usize, f64)> = taps
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, t)| t != 0.0)
        .collect();
    let observed = row.to_vec();
    let estimate = row;
    let mut extended = vec![0.0; m + l - 1];
    let mut model = vec![0.0; m];
    let mut correction = vec![0.0; m];

    for _ in 0..iterations {
        // extended[i] = estimate[(i - (l - 1)) mod m]
        for (i, e) in extended.iter_mut().enumerate() {
            *e = estimate[(i as isize - (l as isize - 1)).rem_euclid(m as isize) as usize];
        }
        model.fill(0.0);
        for &(k, t) in &active {
            let src = &extended[l - 1 - k..l - 1 - k + m];
            for (o, &v) in model.iter_mut().zip(src) {
                *o += t * v;
            }
        }
        // extended[i] = ratio[i mod m]
        for (i, e) in extended.iter_mut().enumerate() {
            let j = i % m;
            *e = observed[j] / model[j].max(RL_EPSILON);
        }
        correction.fill(0.0);
        for &(k, t) in &active {
            let src = &extended[k..k + m];
            for (o, &v) in correction.iter_mut().zip(src) {
                *o += t * v;
            }
        }
        for (x, &c) in estimate.iter_mut().zip(&correction) {
            *x *= c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{blur, rmse_psnr};

    fn scene() -> RasterImage {
        RasterImage::from_fn(96, 4, 1, |x, y, _| {
            let bar = if (x / 7 + y) % 2 == 0 { 0.8 } else { 0.2 };
            bar + 0.1 * ((x as f64) * 0.3).sin()
        })
        .unwrap()
    }

    #[test]
    fn delta_kernel_is_a_fixed_point() {
        let img = scene();
        for iters in [0, 1, 20] {
            let out = richardson_lucy(&img, &MotionPsf::delta(), iters).unwrap();
            for (a, b) in out.samples().iter().zip(img.samples()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_iterations_returns_clamped_observation() {
        let obs = RasterImage::new(3, 1, 1, vec![-0.5, 0.0, 0.4]).unwrap();
        let out = richardson_lucy(&obs, &MotionPsf::flat(2).unwrap(), 0).unwrap();
        assert_eq!(out.samples(), &[RL_EPSILON, RL_EPSILON, 0.4]);
    }

    #[test]
    fn constant_observation_is_a_fixed_point() {
        let obs = RasterImage::filled(64, 2, 1, 0.37).unwrap();
        let psf = MotionPsf::from_taps(vec![1.0, 0.0, 1.0, 1.0, 0.0, 1.0]).unwrap();
        let out = richardson_lucy(&obs, &psf, 20).unwrap();
        for &v in out.samples() {
            assert!((v - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn output_is_non_negative() {
        let obs =
            RasterImage::from_fn(40, 2, 1, |x, _, _| ((x * 13) % 7) as f64 / 7.0 - 0.2).unwrap();
        let psf = MotionPsf::flat(5).unwrap();
        for iters in [1, 5, 20] {
            assert!(richardson_lucy(&obs, &psf, iters).unwrap().min() >= 0.0);
        }
    }

    #[test]
    fn deblurring_reduces_error() {
        let truth = scene();
        let seq = crate::InterleavedCode::parse(crate::fixtures::MAX_MIN.word, 3)
            .unwrap()
            .plane(2)
            .unwrap();
        let psf = MotionPsf::from_sequence(&seq).unwrap();
        let blurred = blur(&truth, &psf, 1.0).unwrap();
        let padded = truth.pad_right(blurred.width()).unwrap();
        let before = rmse_psnr(&blurred, &padded).unwrap().rmse;
        let after = rmse_psnr(&richardson_lucy(&blurred, &psf, 20).unwrap(), &padded)
            .unwrap()
            .rmse;
        assert!(after < before, "{after} vs {before}");
    }
}
