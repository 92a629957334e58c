//! Published reference codes.
//!
//! The GA result words are stored as words only; the printed bit-strings that
//! accompany them in the original listings contain transcription errors, so
//! sequences are always recovered by decoding the word.

use crate::optimizer::MeritKind;

/// A published GA result: the code word, the merit it was optimized for and
/// the score printed alongside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedCode {
    pub word: &'static str,
    pub arity: u8,
    pub merit: MeritKind,
    pub score_db: f64,
}

/// Best max-min result. Bit plane 2 carries the best sequence.
pub const MAX_MIN: PublishedCode = PublishedCode {
    word: "2212441414112412441224111241244244242212442211444144",
    arity: 3,
    merit: MeritKind::MaxMin,
    score_db: -21.4382,
};

pub const MAX_MIN_ALT1: PublishedCode = PublishedCode {
    word: "1212222141422244221122444224241121424422424241241242",
    arity: 3,
    merit: MeritKind::MaxMin,
    score_db: -21.5469,
};

pub const MAX_MIN_ALT2: PublishedCode = PublishedCode {
    word: "2211424222421411121144411124121212214214141122112142",
    arity: 3,
    merit: MeritKind::MaxMin,
    score_db: -21.7312,
};

/// Best average-min result; also the triplet used by the deblurring
/// simulation (duty cycles 16/52, 18/52, 18/52).
pub const AVG_MIN: PublishedCode = PublishedCode {
    word: "2212144111241224412411211221241444112124441212442242",
    arity: 3,
    merit: MeritKind::AvgMin,
    score_db: -25.6353,
};

pub const AVG_PAIRS: PublishedCode = PublishedCode {
    word: "2221421124421222111122142141211244121242241114221211",
    arity: 3,
    merit: MeritKind::AvgPairsMaxMin,
    score_db: -21.6372,
};

pub const PUBLISHED: [PublishedCode; 5] = [MAX_MIN, MAX_MIN_ALT1, MAX_MIN_ALT2, AVG_MIN, AVG_PAIRS];

/// Printed decoding of [`AVG_MIN`], highest bit plane first. This listing is
/// the one transcribed without errors.
pub const AVG_MIN_PRINTED: [&str; 3] = [
    "0000011000010001100100000000010111000001110000110010",
    "1101000000100110001000100110100000001010000101001101",
    "0010100111001000010011011001001000110100001010000000",
];

/// The three sequences drawn as best of 100 random one-of-3 samples.
pub const BEST_OF_100_TRIPLE: [&str; 3] = [
    "1011001100000100000110100000000101110001110010010100",
    "0100000011110000010000010001100010000000001001000001",
    "0000110000001011101001001110011000001110000100101010",
];

/// 52-chip flutter-shutter code from Raskar, Agrawal and Tumblin,
/// "Coded Exposure Photography: Motion Deblurring using Fluttered Shutter"
/// (SIGGRAPH 2006). External provenance: not derived in this crate; 26 open
/// chips (50% duty).
pub const RASKAR_CODE: &str = "1010000111000001010000110011110111010111001001100111";
