use serde::Serialize;

use super::{ImagingError, RasterImage};

/// PSNR reported for identical images.
pub const PSNR_CAP_DB: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quality {
    pub rmse: f64,
    /// Peak 1.0, capped at [`PSNR_CAP_DB`].
    pub psnr_db: f64,
}

pub fn rmse_psnr(a: &RasterImage, b: &RasterImage) -> Result<Quality, ImagingError> {
    if !a.same_geometry(b) {
        return Err(ImagingError::GeometryMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    let n = a.samples().len() as f64;
    let sse: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let rmse = (sse / n).sqrt();
    let psnr_db = if rmse == 0.0 {
        PSNR_CAP_DB
    } else {
        (20.0 * (1.0 / rmse).log10()).min(PSNR_CAP_DB)
    };
    Ok(Quality { rmse, psnr_db })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let zeros = RasterImage::filled(4, 4, 3, 0.0).unwrap();
        let ones = RasterImage::filled(4, 4, 3, 1.0).unwrap();
        assert_eq!(
            rmse_psnr(&zeros, &zeros).unwrap(),
            Quality {
                rmse: 0.0,
                psnr_db: PSNR_CAP_DB
            }
        );
        let q = rmse_psnr(&zeros, &ones).unwrap();
        assert_eq!(q.rmse, 1.0);
        assert_eq!(q.psnr_db, 0.0);

        let checker = RasterImage::from_fn(4, 4, 1, |x, y, _| ((x + y) % 2) as f64).unwrap();
        let inverse = checker.map(|v| 1.0 - v);
        assert_eq!(rmse_psnr(&checker, &inverse).unwrap().rmse, 1.0);

        let half = RasterImage::filled(4, 4, 3, 0.1).unwrap();
        assert!((rmse_psnr(&zeros, &half).unwrap().psnr_db - 20.0).abs() < 1e-9);
    }

    #[test]
    fn geometry_must_match() {
        let a = RasterImage::filled(4, 4, 1, 0.0).unwrap();
        let b = RasterImage::filled(4, 4, 3, 0.0).unwrap();
        assert!(matches!(
            rmse_psnr(&a, &b),
            Err(ImagingError::GeometryMismatch(_))
        ));
    }
}
