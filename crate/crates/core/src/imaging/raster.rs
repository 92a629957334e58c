use super::ImagingError;

/// Planar linear-intensity image. Sample `(x, y, c)` lives at
/// `(c * height + y) * width + x`, so every channel row is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<f64>,
}

impl RasterImage {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        samples: Vec<f64>,
    ) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidImage(format!(
                "empty geometry {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(ImagingError::InvalidImage(format!(
                "{channels} channels (expected 1 or 3)"
            )));
        }
        if samples.len() != width * height * channels {
            return Err(ImagingError::InvalidImage(format!(
                "{} samples for {width}x{height}x{channels}",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(ImagingError::InvalidImage("non-finite sample".into()));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    pub fn filled(
        width: usize,
        height: usize,
        channels: usize,
        value: f64,
    ) -> Result<Self, ImagingError> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self, ImagingError> {
        let mut samples = Vec::with_capacity(width * height * channels);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    samples.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, samples)
    }

    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        channels: usize,
        samples: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(samples.len(), width * height * channels);
        Self {
            width,
            height,
            channels,
            samples,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.samples[(c * self.height + y) * self.width + x]
    }

    /// Channel rows in storage order.
    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.samples.chunks_exact(self.width)
    }

    pub fn same_geometry(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts_unchecked(
            self.width,
            self.height,
            self.channels,
            self.samples.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Zero-extends every row on the right to `width` columns.
    pub fn pad_right(&self, width: usize) -> Result<Self, ImagingError> {
        if width < self.width {
            return Err(ImagingError::GeometryMismatch(format!(
                "cannot pad width {} down to {width}",
                self.width
            )));
        }
        let mut samples = Vec::with_capacity(width * self.height * self.channels);
        for row in self.rows() {
            samples.extend_from_slice(row);
            samples.resize(samples.len() + width - self.width, 0.0);
        }
        Ok(Self::from_parts_unchecked(
            width,
            self.height,
            self.channels,
            samples,
        ))
    }

    /// Keeps columns `start..end` of every row.
    pub fn crop_columns(&self, start: usize, end: usize) -> Result<Self, ImagingError> {
        if start >= end || end > self.width {
            return Err(ImagingError::GeometryMismatch(format!(
                "column range {start}..{end} outside width {}",
                self.width
            )));
        }
        let samples = self
            .rows()
            .flat_map(|row| row[start..end].iter().copied())
            .collect();
        Ok(Self::from_parts_unchecked(
            end - start,
            self.height,
            self.channels,
            samples,
        ))
    }
}
