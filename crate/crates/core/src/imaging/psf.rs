use super::ImagingError;
use crate::seqcore::ExposureSequence;

const SUM_TOLERANCE: f64 = 1e-9;

/// Horizontal motion kernel with non-negative taps summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPsf {
    taps: Vec<f64>,
}

impl MotionPsf {
    /// Normalizes arbitrary non-negative taps to unit sum.
    pub fn from_taps(taps: Vec<f64>) -> Result<Self, ImagingError> {
        if taps.is_empty() {
            return Err(ImagingError::InvalidPsf("no taps".into()));
        }
        if taps.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(ImagingError::InvalidPsf(
                "taps must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = taps.iter().sum();
        if sum <= 0.0 {
            return Err(ImagingError::InvalidPsf("taps sum to zero".into()));
        }
        Ok(Self {
            taps: taps.into_iter().map(|t| t / sum).collect(),
        })
    }

    /// Each open chip becomes a tap of `1 / ones`.
    pub fn from_sequence(seq: &ExposureSequence) -> Result<Self, ImagingError> {
        if seq.ones() == 0 {
            return Err(ImagingError::EmptySequence);
        }
        Self::from_taps(seq.samples().collect())
    }

    /// Box kernel of `len` equal taps (an uncoded exposure).
    pub fn flat(len: usize) -> Result<Self, ImagingError> {
        Self::from_taps(vec![1.0; len])
    }

    /// Identity kernel.
    pub fn delta() -> Self {
        Self { taps: vec![1.0] }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub(crate) fn is_normalized(&self) -> bool {
        (self.taps.iter().sum::<f64>() - 1.0).abs() <= SUM_TOLERANCE
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::seqcore::InterleavedCode;

    #[test]
    fn sequence_kernels() {
        let all: ExposureSequence = "1111".parse().unwrap();
        assert_eq!(MotionPsf::from_sequence(&all).unwrap().taps(), &[0.25; 4]);
        let first: ExposureSequence = "10".parse().unwrap();
        assert_eq!(
            MotionPsf::from_sequence(&first).unwrap().taps(),
            &[1.0, 0.0]
        );
        let none: ExposureSequence = "00".parse().unwrap();
        assert!(matches!(
            MotionPsf::from_sequence(&none),
            Err(ImagingError::EmptySequence)
        ));
    }

    #[test]
    fn triplet_first_window_kernel() {
        let code = InterleavedCode::parse(fixtures::AVG_MIN.word, 3).unwrap();
        let s1 = code.plane(2).unwrap();
        let psf = MotionPsf::from_sequence(&s1).unwrap();
        assert_eq!(psf.len(), 52);
        for (tap, bit) in psf.taps().iter().zip(s1.bits()) {
            assert_eq!(*tap, if *bit { 1.0 / 16.0 } else { 0.0 });
        }
        assert!(psf.is_normalized());
    }

    #[test]
    fn rejects_invalid_taps() {
        assert!(MotionPsf::from_taps(vec![]).is_err());
        assert!(MotionPsf::from_taps(vec![0.0, 0.0]).is_err());
        assert!(MotionPsf::from_taps(vec![1.0, -0.5]).is_err());
        let p = MotionPsf::from_taps(vec![1.0, 3.0]).unwrap();
        assert_eq!(p.taps(), &[0.25, 0.75]);
    }
}
