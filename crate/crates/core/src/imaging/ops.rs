use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{ImagingError, MotionPsf, RasterImage};

fn check_duty(dc: f64) -> Result<(), ImagingError> {
    if dc > 0.0 && dc <= 1.0 {
        Ok(())
    } else {
        Err(ImagingError::InvalidDutyCycle(dc))
    }
}

/// Scales by the exposure `dc`, then convolves every row with `psf` in full
/// mode. Output width is `width + len(psf) - 1`.
pub fn blur(img: &RasterImage, psf: &MotionPsf, dc: f64) -> Result<RasterImage, ImagingError> {
    check_duty(dc)?;
    let taps = psf.taps();
    let out_width = img.width() + taps.len() - 1;
    let mut samples = vec![0.0; out_width * img.height() * img.channels()];
    samples
        .par_chunks_mut(out_width)
        .zip(img.rows().collect::<Vec<_>>())
        .for_each(|(out, row)| {
            for (k, &t) in taps.iter().enumerate() {
                if t == 0.0 {
                    continue;
                }
                let w = t * dc;
                for (o, &v) in out[k..k + row.len()].iter_mut().zip(row) {
                    *o += w * v;
                }
            }
        });
    Ok(RasterImage::from_parts_unchecked(
        out_width,
        img.height(),
        img.channels(),
        samples,
    ))
}

/// Adds exposure-proportional Gaussian noise: mean and standard deviation are
/// both `nf * dc`. No clamping. Samples are drawn in storage order.
pub fn add_noise<R: Rng + ?Sized>(
    img: &RasterImage,
    nf: f64,
    dc: f64,
    rng: &mut R,
) -> Result<RasterImage, ImagingError> {
    if !nf.is_finite() || nf < 0.0 {
        return Err(ImagingError::InvalidNoise(nf));
    }
    check_duty(dc)?;
    if nf == 0.0 {
        return Ok(img.clone());
    }
    let level = nf * dc;
    Ok(img.map_with(|v| {
        let g: f64 = rng.sample(StandardNormal);
        v + level + level * g
    }))
}

/// Undoes the exposure loss of a `dc` duty cycle.
pub fn restore_gain(img: &RasterImage, dc: f64) -> Result<RasterImage, ImagingError> {
    if !dc.is_finite() || dc <= 0.0 {
        return Err(ImagingError::InvalidDutyCycle(dc));
    }
    Ok(img.map(|v| v / dc))
}

/// Per-sample mean of images with identical geometry.
pub fn combine(images: &[RasterImage]) -> Result<RasterImage, ImagingError> {
    let (first, rest) = images.split_first().ok_or(ImagingError::EmptyInput)?;
    let mut samples = first.samples().to_vec();
    for img in rest {
        if !img.same_geometry(first) {
            return Err(ImagingError::GeometryMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                first.width(),
                first.height(),
                first.channels(),
                img.width(),
                img.height(),
                img.channels()
            )));
        }
        for (acc, &v) in samples.iter_mut().zip(img.samples()) {
            *acc += v;
        }
    }
    let n = images.len() as f64;
    samples.iter_mut().for_each(|v| *v /= n);
    Ok(RasterImage::from_parts_unchecked(
        first.width(),
        first.height(),
        first.channels(),
        samples,
    ))
}

impl RasterImage {
    fn map_with(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_parts_unchecked(
            self.width(),
            self.height(),
            self.channels(),
            self.samples().iter().map(|&v| f(v)).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn impulse_row_reproduces_taps() {
        let img = RasterImage::new(1, 1, 1, vec![1.0]).unwrap();
        let psf = MotionPsf::from_taps(vec![1.0, 0.0, 3.0]).unwrap();
        let out = blur(&img, &psf, 1.0).unwrap();
        assert_eq!(out.width(), 3);
        assert_eq!(out.samples(), psf.taps());
    }

    #[test]
    fn constant_interior_is_scaled() {
        let img = RasterImage::filled(80, 3, 3, 0.6).unwrap();
        let psf = MotionPsf::flat(17).unwrap();
        let out = blur(&img, &psf, 0.25).unwrap();
        assert_eq!(out.width(), 96);
        for row in out.rows() {
            for &v in &row[16..80] {
                assert!((v - 0.15).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_convolution_matches_direct_sum() {
        let img =
            RasterImage::from_fn(9, 2, 1, |x, y, _| ((x * 7 + y * 3) % 5) as f64 / 4.0).unwrap();
        let psf = MotionPsf::from_taps(vec![0.5, 0.0, 0.25, 0.25]).unwrap();
        let out = blur(&img, &psf, 0.5).unwrap();
        for y in 0..2 {
            for x in 0..out.width() {
                let mut direct = 0.0;
                for (k, &t) in psf.taps().iter().enumerate() {
                    if x >= k && x - k < 9 {
                        direct += t * 0.5 * img.get(x - k, y, 0);
                    }
                }
                assert!((out.get(x, y, 0) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let img = RasterImage::filled(4, 4, 1, 0.3).unwrap();
        let mut r = rng::stream(1, 1);
        assert_eq!(add_noise(&img, 0.0, 0.5, &mut r).unwrap(), img);
    }

    #[test]
    fn noise_statistics() {
        let (nf, dc) = (0.01, 0.3462);
        let level = nf * dc;
        let img = RasterImage::filled(1000, 1000, 1, 0.0).unwrap();
        let mut r = rng::stream(42, 3);
        let noisy = add_noise(&img, nf, dc, &mut r).unwrap();
        let n = noisy.samples().len() as f64;
        let mean = noisy.mean();
        let var = noisy
            .samples()
            .iter()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        assert!((mean - level).abs() < 3.0 * level / n.sqrt(), "mean {mean}");
        assert!(
            (var.sqrt() / level - 1.0).abs() < 0.01,
            "std {}",
            var.sqrt()
        );
    }

    #[test]
    fn gain_and_combine() {
        let img = RasterImage::filled(2, 2, 1, 0.2).unwrap();
        assert_eq!(restore_gain(&img, 1.0).unwrap(), img);
        assert_eq!(restore_gain(&img, 0.5).unwrap().samples(), &[0.4; 4]);
        assert!(restore_gain(&img, 0.0).is_err());
        assert_eq!(combine(std::slice::from_ref(&img)).unwrap(), img);
        assert_eq!(combine(&[img.clone(), img.clone()]).unwrap(), img);
        let other = RasterImage::filled(3, 2, 1, 0.2).unwrap();
        assert!(matches!(
            combine(&[img, other]),
            Err(ImagingError::GeometryMismatch(_))
        ));
        assert!(matches!(combine(&[]), Err(ImagingError::EmptyInput)));
    }

    #[test]
    fn duty_cycle_validated() {
        let img = RasterImage::filled(2, 2, 1, 0.2).unwrap();
        assert!(blur(&img, &MotionPsf::delta(), 0.0).is_err());
        assert!(blur(&img, &MotionPsf::delta(), 1.5).is_err());
    }
}
