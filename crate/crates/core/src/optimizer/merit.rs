use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::OptimizerError;
use crate::seqcore::InterleavedCode;
use crate::spectral::sequence_min_db;

/// How the per-window spectral minima of a code are folded into one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeritKind {
    /// Best window's worst bin.
    #[serde(rename = "max-min")]
    MaxMin,
    /// Mean of every window's worst bin.
    #[serde(rename = "avg-min")]
    AvgMin,
    /// `(max(m0, m1) + max(m0, m2)) / 2` with window 0 distinguished. Three
    /// windows only.
    #[serde(rename = "avg-pairs")]
    AvgPairsMaxMin,
}

impl MeritKind {
    pub const ALL: [MeritKind; 3] = [
        MeritKind::MaxMin,
        MeritKind::AvgMin,
        MeritKind::AvgPairsMaxMin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeritKind::MaxMin => "max-min",
            MeritKind::AvgMin => "avg-min",
            MeritKind::AvgPairsMaxMin => "avg-pairs",
        }
    }

    pub fn supports_arity(self, arity: u8) -> bool {
        match self {
            MeritKind::AvgPairsMaxMin => arity == 3,
            _ => true,
        }
    }

    pub fn check_arity(self, arity: u8) -> Result<(), OptimizerError> {
        if self.supports_arity(arity) {
            Ok(())
        } else {
            Err(OptimizerError::ArityUnsupported { kind: self, arity })
        }
    }
}

impl fmt::Display for MeritKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeritKind {
    type Err = OptimizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max-min" | "maxmin" => Ok(MeritKind::MaxMin),
            "avg-min" | "avgmin" => Ok(MeritKind::AvgMin),
            "avg-pairs" | "avg-pairs-max-min" | "avgpairsmaxmin" => Ok(MeritKind::AvgPairsMaxMin),
            other => Err(OptimizerError::UnknownMerit(other.to_string())),
        }
    }
}

/// Worst-bin dB of every window of `code`, by ascending bit plane.
pub fn plane_minima(code: &InterleavedCode, n_fft: usize) -> Result<Vec<f64>, OptimizerError> {
    code.decode()
        .iter()
        .map(|s| sequence_min_db(s, n_fft).map_err(OptimizerError::from))
        .collect()
}

pub fn merit_from_minima(minima: &[f64], kind: MeritKind) -> Result<f64, OptimizerError> {
    let arity = u8::try_from(minima.len()).unwrap_or(u8::MAX);
    kind.check_arity(arity)?;
    if minima.is_empty() {
        return Err(OptimizerError::ArityUnsupported { kind, arity: 0 });
    }
    Ok(match kind {
        MeritKind::MaxMin => minima.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        MeritKind::AvgMin => minima.iter().sum::<f64>() / minima.len() as f64,
        MeritKind::AvgPairsMaxMin => {
            let first = minima[0].max(minima[1]);
            let second = minima[0].max(minima[2]);
            (first + second) / 2.0
        }
    })
}

pub fn merit(code: &InterleavedCode, kind: MeritKind, n_fft: usize) -> Result<f64, OptimizerError> {
    kind.check_arity(code.arity())?;
    merit_from_minima(&plane_minima(code, n_fft)?, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn published_scores_reproduce() {
        for p in fixtures::PUBLISHED {
            let code = InterleavedCode::parse(p.word, p.arity).unwrap();
            let score = merit(&code, p.merit, 64).unwrap();
            assert!(
                (score - p.score_db).abs() <= 0.05,
                "{} {}: {score} vs {}",
                p.merit,
                p.word,
                p.score_db
            );
        }
    }

    #[test]
    fn avg_pairs_needs_three_windows() {
        let code = InterleavedCode::parse("1212", 2).unwrap();
        assert_eq!(
            merit(&code, MeritKind::AvgPairsMaxMin, 64),
            Err(OptimizerError::ArityUnsupported {
                kind: MeritKind::AvgPairsMaxMin,
                arity: 2
            })
        );
        let code = InterleavedCode::parse("1248", 4).unwrap();
        assert!(merit(&code, MeritKind::AvgPairsMaxMin, 64).is_err());
        assert!(merit(&code, MeritKind::MaxMin, 64).is_ok());
    }

    #[test]
    fn folding_rules() {
        let m = [-30.0, -20.0, -40.0];
        assert_eq!(merit_from_minima(&m, MeritKind::MaxMin).unwrap(), -20.0);
        assert_eq!(merit_from_minima(&m, MeritKind::AvgMin).unwrap(), -30.0);
        // (max(-30,-20) + max(-30,-40)) / 2
        assert_eq!(
            merit_from_minima(&m, MeritKind::AvgPairsMaxMin).unwrap(),
            -25.0
        );
    }

    #[test]
    fn names_round_trip() {
        for kind in MeritKind::ALL {
            assert_eq!(kind.name().parse::<MeritKind>().unwrap(), kind);
        }
        assert!("best".parse::<MeritKind>().is_err());
    }
}
