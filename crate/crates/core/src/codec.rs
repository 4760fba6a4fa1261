//! Six-dot braille cells for the decimal digits.
//!
//! A cell is 3 rows by 2 columns. Dots 1-3 run down the left column and
//! dots 4-6 down the right one. A [`BrailleVector`] is the row-wise
//! concatenation of the cell, so string position `i` holds the cell at
//! `(i / 2, i % 2)`, which is dot order 1,4,2,5,3,6.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("braille vector must be 6 characters of '0' or '1', got {0:?}")]
    MalformedVector(String),
    #[error("braille vector bits {0:#b} exceed 6 bits")]
    VectorOutOfRange(u8),
    #[error("dot number {0} is outside 1..=6")]
    InvalidDot(u8),
    #[error("digit {0} is outside 0..=9")]
    InvalidDigit(u32),
    #[error("PIN contains non-digit character {ch:?} at position {position}")]
    NonDigitPinCharacter { ch: char, position: usize },
    #[error("mapping must have exactly 10 entries, got {0}")]
    WrongEntryCount(usize),
    #[error("vector {0} is mapped more than once")]
    DuplicateVector(BrailleVector),
    #[error("digit {0} is mapped more than once")]
    DuplicateDigit(Digit),
    #[error("malformed mapping document: {0}")]
    Document(String),
}

/// A complete 3x2 braille cell; `true` is a raised dot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DotMatrix {
    cells: [[bool; 2]; 3],
}

impl DotMatrix {
    pub const ROWS: usize = 3;
    pub const COLS: usize = 2;

    pub fn new(cells: [[bool; 2]; 3]) -> Self {
        Self { cells }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self::new([[true; 2]; 3])
    }

    /// Builds a cell from standard dot numbers (1..=6). Repeats are allowed.
    pub fn from_dots(dots: &[u8]) -> Result<Self, CodecError> {
        let mut m = Self::empty();
        for &d in dots {
            let (row, col) = dot_position(d)?;
            m.cells[row][col] = true;
        }
        Ok(m)
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.cells[row][col]
    }

    /// Raised dot numbers in ascending order.
    pub fn dots(&self) -> Vec<u8> {
        (1..=6)
            .filter(|&d| {
                let (row, col) = dot_position(d).expect("dot in range");
                self.cells[row][col]
            })
            .collect()
    }

    pub fn raised(&self) -> usize {
        self.cells.iter().flatten().filter(|&&c| c).count()
    }
}

fn dot_position(dot: u8) -> Result<(usize, usize), CodecError> {
    if !(1..=6).contains(&dot) {
        return Err(CodecError::InvalidDot(dot));
    }
    let idx = usize::from(dot - 1);
    Ok((idx % 3, idx / 3))
}

/// Six binary symbols, leftmost first. Stored as the low 6 bits of a byte
/// with string position 0 in bit 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BrailleVector(u8);

impl BrailleVector {
    pub const LEN: usize = 6;
    pub const COUNT: usize = 64;

    pub fn from_bits(bits: u8) -> Result<Self, CodecError> {
        if bits >= 64 {
            return Err(CodecError::VectorOutOfRange(bits));
        }
        Ok(Self(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Symbol at string position `i` (0 = leftmost).
    pub fn bit(self, i: usize) -> bool {
        assert!(i < Self::LEN, "bit index {i} out of range");
        self.0 >> (Self::LEN - 1 - i) & 1 == 1
    }

    /// Number of raised dots.
    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    /// All 64 vectors in numeric order.
    pub fn all() -> impl Iterator<Item = BrailleVector> {
        (0..64u8).map(BrailleVector)
    }
}

impl fmt::Display for BrailleVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..Self::LEN {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BrailleVector {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != Self::LEN {
            return Err(CodecError::MalformedVector(s.to_owned()));
        }
        let mut bits = 0u8;
        for ch in s.chars() {
            bits <<= 1;
            match ch {
                '1' => bits |= 1,
                '0' => {}
                _ => return Err(CodecError::MalformedVector(s.to_owned())),
            }
        }
        Ok(Self(bits))
    }
}

impl TryFrom<String> for BrailleVector {
    type Error = CodecError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<BrailleVector> for String {
    fn from(v: BrailleVector) -> Self {
        v.to_string()
    }
}

impl From<DotMatrix> for BrailleVector {
    fn from(m: DotMatrix) -> Self {
        matrix_to_vector(&m)
    }
}

impl From<BrailleVector> for DotMatrix {
    fn from(v: BrailleVector) -> Self {
        vector_to_matrix(v)
    }
}

/// Row-wise concatenation of the cell.
pub fn matrix_to_vector(m: &DotMatrix) -> BrailleVector {
    let mut bits = 0u8;
    for i in 0..BrailleVector::LEN {
        bits <<= 1;
        if m.cell(i / DotMatrix::COLS, i % DotMatrix::COLS) {
            bits |= 1;
        }
    }
    BrailleVector(bits)
}

pub fn vector_to_matrix(v: BrailleVector) -> DotMatrix {
    let mut cells = [[false; 2]; 3];
    for i in 0..BrailleVector::LEN {
        cells[i / DotMatrix::COLS][i % DotMatrix::COLS] = v.bit(i);
    }
    DotMatrix::new(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Digit(u8);

impl Digit {
    pub fn new(value: u32) -> Result<Self, CodecError> {
        if value > 9 {
            return Err(CodecError::InvalidDigit(value));
        }
        Ok(Self(value as u8))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Digit> + Clone {
        (0..10u8).map(Digit)
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl TryFrom<u32> for Digit {
    type Error = CodecError;

    fn try_from(v: u32) -> Result<Self, Self::Error> {
        Digit::new(v)
    }
}

impl From<Digit> for u32 {
    fn from(d: Digit) -> Self {
        u32::from(d.0)
    }
}

/// A fixed-length digit string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Pin(Vec<Digit>);

impl Pin {
    pub fn new(digits: Vec<Digit>) -> Self {
        Self(digits)
    }

    pub fn digits(&self) -> &[Digit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The `index`-th PIN of `len` digits in lexicographic order, i.e. the
    /// zero-padded decimal representation of `index`.
    pub fn from_index(mut index: u64, len: usize) -> Self {
        let mut digits = vec![Digit(0); len];
        for slot in digits.iter_mut().rev() {
            *slot = Digit((index % 10) as u8);
            index /= 10;
        }
        Self(digits)
    }
}

impl fmt::Display for Pin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for Pin {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(position, ch)| match ch.to_digit(10) {
                Some(v) => Ok(Digit(v as u8)),
                None => Err(CodecError::NonDigitPinCharacter { ch, position }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Pin)
    }
}

impl TryFrom<String> for Pin {
    type Error = CodecError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Pin> for String {
    fn from(p: Pin) -> Self {
        p.to_string()
    }
}

/// One row of a mapping document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub vector: BrailleVector,
    pub digit: Digit,
}

/// A bijection between ten braille vectors and the ten digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigitMapping {
    by_digit: [BrailleVector; 10],
    by_vector: [Option<Digit>; 64],
}

// Digits 0..=9. The source table lists 011100 for both 0 and 9; 9 is dots
// 2,4, which reads 011000 row-wise.
const CANONICAL_BITS: [u8; 10] = [
    0b011100, 0b100000, 0b101000, 0b110000, 0b110100, 0b100100, 0b111000, 0b111100, 0b101100,
    0b011000,
];

impl DigitMapping {
    /// Rejects anything that is not a bijection onto 0..=9.
    pub fn from_entries<I>(entries: I) -> Result<Self, CodecError>
    where
        I: IntoIterator<Item = MappingEntry>,
    {
        let entries: Vec<MappingEntry> = entries.into_iter().collect();
        if entries.len() != 10 {
            return Err(CodecError::WrongEntryCount(entries.len()));
        }
        let mut by_digit = [None; 10];
        let mut by_vector = [None; 64];
        for e in entries {
            let slot = &mut by_vector[usize::from(e.vector.bits())];
            if slot.is_some() {
                return Err(CodecError::DuplicateVector(e.vector));
            }
            *slot = Some(e.digit);
            let slot = &mut by_digit[usize::from(e.digit.value())];
            if slot.is_some() {
                return Err(CodecError::DuplicateDigit(e.digit));
            }
            *slot = Some(e.vector);
        }
        // Ten distinct digits out of ten means every slot is filled.
        let by_digit = by_digit.map(|v| v.expect("bijection"));
        Ok(Self {
            by_digit,
            by_vector,
        })
    }

    pub fn canonical() -> Self {
        let entries = Digit::all().map(|d| MappingEntry {
            vector: BrailleVector(CANONICAL_BITS[usize::from(d.value())]),
            digit: d,
        });
        Self::from_entries(entries).expect("canonical table is a bijection")
    }

    pub fn lookup(&self, v: BrailleVector) -> Option<Digit> {
        self.by_vector[usize::from(v.bits())]
    }

    pub fn vector(&self, d: Digit) -> BrailleVector {
        self.by_digit[usize::from(d.value())]
    }

    /// Entries in digit order.
    pub fn entries(&self) -> impl Iterator<Item = MappingEntry> + '_ {
        Digit::all().map(|digit| MappingEntry {
            vector: self.vector(digit),
            digit,
        })
    }

    /// Digits whose vector has exactly `weight` raised dots, ascending.
    pub fn digits_with_weight(&self, weight: u32) -> Vec<Digit> {
        Digit::all()
            .filter(|&d| self.vector(d).weight() == weight)
            .collect()
    }

    /// JSON array of `{vector, digit}` records.
    pub fn to_json(&self) -> String {
        let entries: Vec<MappingEntry> = self.entries().collect();
        serde_json::to_string_pretty(&entries).expect("mapping entries serialize")
    }

    /// Accepts a JSON array of entries or one entry object per line.
    pub fn from_json(text: &str) -> Result<Self, CodecError> {
        let trimmed = text.trim_start();
        let entries: Vec<MappingEntry> = if trimmed.starts_with('[') {
            serde_json::from_str(trimmed).map_err(|e| CodecError::Document(e.to_string()))?
        } else {
            trimmed
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(n, l)| {
                    serde_json::from_str(l)
                        .map_err(|e| CodecError::Document(format!("line {}: {e}", n + 1)))
                })
                .collect::<Result<_, _>>()?
        };
        Self::from_entries(entries)
    }
}

impl Default for DigitMapping {
    fn default() -> Self {
        Self::canonical()
    }
}

pub fn canonical_mapping() -> DigitMapping {
    DigitMapping::canonical()
}

/// `None` is the ordinary "not a digit" outcome for unmapped patterns.
pub fn vector_to_digit(v: BrailleVector, m: &DigitMapping) -> Option<Digit> {
    m.lookup(v)
}

pub fn digit_to_vector(d: Digit, m: &DigitMapping) -> BrailleVector {
    m.vector(d)
}
