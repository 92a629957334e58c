use super::{ImagingError, RasterImage};

/// Deterministic RGB test scene in `[0.05, 0.95]`: a smooth color gradient
/// with vertical bar gratings of increasing frequency, a checkerboard block
/// and a few discs. Rich in horizontal detail, which is what motion blur
/// destroys.
pub fn test_pattern(width: usize, height: usize) -> Result<RasterImage, ImagingError> {
    let (w, h) = (width as f64, height as f64);
    RasterImage::from_fn(width, height, 3, |x, y, c| {
        let (fx, fy) = (x as f64 / w, y as f64 / h);
        let base = match c {
            0 => 0.25 + 0.5 * fx,
            1 => 0.25 + 0.5 * fy,
            _ => 0.75 - 0.5 * fx * fy,
        };
        let band = (fy * 4.0) as usize;
        let detail = if fx < 0.5 {
            // Gratings: period shrinks from 32 to 4 pixels going down.
            let period = (32usize >> band.min(3)).max(4);
            if (x / (period / 2)).is_multiple_of(2) {
                0.3
            } else {
                -0.3
            }
        } else if fy < 0.5 {
            let cell = (width / 32).max(2);
            if ((x / cell) + (y / cell)).is_multiple_of(2) {
                0.25
            } else {
                -0.25
            }
        } else {
            let discs = [(0.65, 0.7, 0.08), (0.85, 0.65, 0.05), (0.75, 0.88, 0.06)];
            let inside = discs.iter().any(|&(cx, cy, r): &(f64, f64, f64)| {
                ((fx - cx).powi(2) + (fy - cy).powi(2)).sqrt() < r
            });
            if inside {
                0.35
            } else {
                -0.1
            }
        };
        (base + detail).clamp(0.05, 0.95)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_is_bounded_and_deterministic() {
        let a = test_pattern(64, 48).unwrap();
        assert_eq!((a.width(), a.height(), a.channels()), (64, 48, 3));
        assert!(a.samples().iter().all(|&v| (0.05..=0.95).contains(&v)));
        assert_eq!(a, test_pattern(64, 48).unwrap());
    }
}
