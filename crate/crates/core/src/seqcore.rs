//! Binary exposure sequences and one-of-N interleaved code words.
//!
//! An [`ExposureSequence`] is the shutter chopping pattern: one bit per chip,
//! `1` when light is integrated. An [`InterleavedCode`] packs `N` mutually
//! exclusive sequences into a single word of one-hot digits, so that at every
//! chip exactly one of the `N` windows is open.
//!
//! Bit planes are indexed by ascending bit position: plane `s` is open at chip
//! `j` iff bit `s` of digit `j` is set. Printed listings that show the planes
//! highest bit first must be reversed before comparing.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default window length in chips.
pub const DEFAULT_LENGTH: usize = 52;

/// Smallest and largest supported code arity.
pub const MIN_ARITY: u8 = 2;
pub const MAX_ARITY: u8 = 5;

/// Largest arity whose digits still fit in one hex character.
const MAX_HEX_ARITY: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("sequence must contain at least one chip")]
    Empty,
    #[error("invalid chip character {0:?} at position {1} (expected '0' or '1')")]
    InvalidChip(char, usize),
    #[error("invalid digit {digit:?} at position {position} for arity {arity}")]
    InvalidDigit {
        digit: String,
        position: usize,
        arity: u8,
    },
    #[error("arity {0} outside supported range 2..=5")]
    InvalidArity(u8),
    #[error("length mismatch: expected {expected} chips, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("sequences do not partition the window: chip {chip} has {open} open windows")]
    NotAPartition { chip: usize, open: usize },
    #[error("malformed code text: {0}")]
    Malformed(String),
}

/// Fixed-length binary window function.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExposureSequence {
    bits: Vec<bool>,
}

impl ExposureSequence {
    pub fn new(bits: Vec<bool>) -> Result<Self, SeqError> {
        if bits.is_empty() {
            return Err(SeqError::Empty);
        }
        Ok(Self { bits })
    }

    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Result<Self, SeqError> {
        let bits = bits
            .into_iter()
            .enumerate()
            .map(|(i, b)| match b {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(SeqError::InvalidChip(
                    char::from_digit(u32::from(b), 10).unwrap_or('?'),
                    i,
                )),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(bits)
    }

    pub fn zeros(len: usize) -> Result<Self, SeqError> {
        Self::new(vec![false; len])
    }

    /// The conventional rectangular (always open) exposure.
    pub fn rect(len: usize) -> Result<Self, SeqError> {
        Self::new(vec![true; len])
    }

    /// A single open chip followed by `len - 1` closed chips.
    pub fn impulse(len: usize) -> Result<Self, SeqError> {
        let mut bits = vec![false; len];
        if let Some(first) = bits.first_mut() {
            *first = true;
        }
        Self::new(bits)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Result<Self, SeqError> {
        Self::new((0..len).map(|_| rng.random::<bool>()).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Always false; sequences have at least one chip.
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, chip: usize) -> Option<bool> {
        self.bits.get(chip).copied()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Chip values as `0.0` / `1.0` samples.
    pub fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 })
    }

    /// Bitwise inversion over the full window.
    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    pub fn duty_cycle(&self) -> DutyCycle {
        DutyCycle {
            ones: self.ones(),
            len: self.len(),
        }
    }

    /// Serializes the sequence as a binary PGM kernel image of size `len x 1`
    /// (255 for open chips, 0 for closed). `ascii` selects P2 over P5.
    pub fn to_kernel_pgm(&self, ascii: bool) -> Vec<u8> {
        let magic = if ascii { "P2" } else { "P5" };
        let mut out = format!("{magic}\n{} 1\n255\n", self.len()).into_bytes();
        if ascii {
            let body = self
                .bits
                .iter()
                .map(|&b| if b { "255" } else { "0" })
                .collect::<Vec<_>>()
                .join(" ");
            out.extend_from_slice(body.as_bytes());
            out.push(b'\n');
        } else {
            out.extend(self.bits.iter().map(|&b| if b { 255u8 } else { 0 }));
        }
        out
    }
}

impl fmt::Display for ExposureSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for ExposureSequence {
    type Err = SeqError;

    /// Parses one line of `0`/`1` characters. Surrounding whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .trim()
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(SeqError::InvalidChip(other, i)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(bits)
    }
}

/// Fraction of open chips, kept as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DutyCycle {
    pub ones: usize,
    pub len: usize,
}

impl DutyCycle {
    pub fn ratio(&self) -> f64 {
        self.ones as f64 / self.len as f64
    }
}

impl fmt::Display for DutyCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.ones, self.len)
    }
}

/// A word of one-hot digits encoding `arity` mutually exclusive sequences.
///
/// Digits are stored as their set-bit index (`0..arity`); the digit value is
/// `1 << index`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InterleavedCode {
    planes: Vec<u8>,
    arity: u8,
}

impl InterleavedCode {
    /// Builds a code from digit values (`1, 2, 4, 8, 16`).
    pub fn from_digits(digits: &[u32], arity: u8) -> Result<Self, SeqError> {
        check_arity(arity)?;
        if digits.is_empty() {
            return Err(SeqError::Empty);
        }
        let planes = digits
            .iter()
            .enumerate()
            .map(|(position, &d)| {
                digit_plane(d, arity).ok_or_else(|| SeqError::InvalidDigit {
                    digit: d.to_string(),
                    position,
                    arity,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { planes, arity })
    }

    /// Builds a code from per-chip plane indices.
    pub fn from_planes(planes: Vec<u8>, arity: u8) -> Result<Self, SeqError> {
        check_arity(arity)?;
        if planes.is_empty() {
            return Err(SeqError::Empty);
        }
        if let Some((position, &p)) = planes.iter().enumerate().find(|(_, &p)| p >= arity) {
            return Err(SeqError::InvalidDigit {
                digit: (1u32 << p.min(31)).to_string(),
                position,
                arity,
            });
        }
        Ok(Self { planes, arity })
    }

    /// Parses a word. Single hex characters (`1`, `2`, `4`, `8`) are accepted
    /// for arity up to 4; comma-separated integers work for any arity and are
    /// the only form for arity 5, where a lone `16` is one digit.
    pub fn parse(word: &str, arity: u8) -> Result<Self, SeqError> {
        check_arity(arity)?;
        let word = word.trim();
        if word.contains(',') || arity > MAX_HEX_ARITY {
            let digits = word
                .split(',')
                .enumerate()
                .map(|(position, tok)| {
                    let tok = tok.trim();
                    tok.parse::<u32>().map_err(|_| SeqError::InvalidDigit {
                        digit: tok.to_string(),
                        position,
                        arity,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Self::from_digits(&digits, arity);
        }
        let digits = word
            .chars()
            .enumerate()
            .map(|(position, c)| {
                c.to_digit(16).ok_or_else(|| SeqError::InvalidDigit {
                    digit: c.to_string(),
                    position,
                    arity,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_digits(&digits, arity)
    }

    /// Parses a word and checks it has exactly `len` chips.
    pub fn parse_with_length(word: &str, arity: u8, len: usize) -> Result<Self, SeqError> {
        let code = Self::parse(word, arity)?;
        if code.len() != len {
            return Err(SeqError::LengthMismatch {
                expected: len,
                found: code.len(),
            });
        }
        Ok(code)
    }

    /// Draws every chip independently and uniformly over the `arity` digits.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize, arity: u8) -> Result<Self, SeqError> {
        check_arity(arity)?;
        if len == 0 {
            return Err(SeqError::Empty);
        }
        let planes = (0..len).map(|_| rng.random_range(0..arity)).collect();
        Ok(Self { planes, arity })
    }

    /// Packs a partition of the window back into a word. Inverse of [`decode`](Self::decode).
    pub fn encode(seqs: &[ExposureSequence]) -> Result<Self, SeqError> {
        let arity = u8::try_from(seqs.len()).map_err(|_| SeqError::InvalidArity(u8::MAX))?;
        check_arity(arity)?;
        let len = seqs[0].len();
        if let Some(bad) = seqs.iter().find(|s| s.len() != len) {
            return Err(SeqError::LengthMismatch {
                expected: len,
                found: bad.len(),
            });
        }
        let planes = (0..len)
            .map(|chip| {
                let mut open = seqs
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.bits[chip])
                    .map(|(plane, _)| plane as u8);
                match (open.next(), open.next()) {
                    (Some(plane), None) => Ok(plane),
                    _ => Err(SeqError::NotAPartition {
                        chip,
                        open: seqs.iter().filter(|s| s.bits[chip]).count(),
                    }),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { planes, arity })
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    /// Always false; codes have at least one chip.
    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn arity(&self) -> u8 {
        self.arity
    }

    pub fn planes(&self) -> &[u8] {
        &self.planes
    }

    pub(crate) fn planes_mut(&mut self) -> &mut [u8] {
        &mut self.planes
    }

    /// Digit values (`1 << plane`) per chip.
    pub fn digits(&self) -> impl Iterator<Item = u32> + '_ {
        self.planes.iter().map(|&p| 1u32 << p)
    }

    /// The sequence of bit plane `plane`.
    pub fn plane(&self, plane: u8) -> Option<ExposureSequence> {
        (plane < self.arity).then(|| ExposureSequence {
            bits: self.planes.iter().map(|&p| p == plane).collect(),
        })
    }

    /// Splits the word into its `arity` sequences, ordered by ascending bit index.
    pub fn decode(&self) -> Vec<ExposureSequence> {
        (0..self.arity).filter_map(|p| self.plane(p)).collect()
    }

    /// Word rendering: hex characters for arity up to 4, comma-separated
    /// integers for arity 5.
    pub fn to_word(&self) -> String {
        if self.arity <= MAX_HEX_ARITY {
            self.digits()
                .map(|d| char::from_digit(d, 16).expect("one-hot digit below 16"))
                .collect()
        } else {
            self.digits()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }

    /// Text form with the arity header, as accepted by [`parse_code_text`].
    pub fn to_text(&self) -> String {
        format!("N={}\n{}\n", self.arity, self.to_word())
    }
}

impl fmt::Display for InterleavedCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_word())
    }
}

/// Parses the code-word text format: an optional `N=<arity>` line followed by
/// one line holding the word. Blank lines and `#` comments are skipped. The
/// header, when present, takes precedence over `default_arity`.
pub fn parse_code_text(text: &str, default_arity: u8) -> Result<InterleavedCode, SeqError> {
    let mut arity = default_arity;
    let mut word = None;
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(value) = line.strip_prefix("N=").or_else(|| line.strip_prefix("n=")) {
            arity = value
                .trim()
                .parse()
                .map_err(|_| SeqError::Malformed(format!("bad arity header {line:?}")))?;
            continue;
        }
        if word.replace(line).is_some() {
            return Err(SeqError::Malformed("more than one code word".into()));
        }
    }
    let word = word.ok_or_else(|| SeqError::Malformed("no code word found".into()))?;
    InterleavedCode::parse(word, arity)
}

/// Parses the sequence text format: one line of `0`/`1` characters, with blank
/// lines and `#` comments skipped.
pub fn parse_sequence_text(text: &str) -> Result<ExposureSequence, SeqError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let line = lines
        .next()
        .ok_or_else(|| SeqError::Malformed("no sequence found".into()))?;
    if lines.next().is_some() {
        return Err(SeqError::Malformed("more than one sequence line".into()));
    }
    line.parse()
}

fn check_arity(arity: u8) -> Result<(), SeqError> {
    if (MIN_ARITY..=MAX_ARITY).contains(&arity) {
        Ok(())
    } else {
        Err(SeqError::InvalidArity(arity))
    }
}

fn digit_plane(digit: u32, arity: u8) -> Option<u8> {
    if digit.count_ones() != 1 {
        return None;
    }
    let plane = digit.trailing_zeros() as u8;
    (plane < arity).then_some(plane)
}
