//! Constellations, bit labeling and candidate symbol vectors.
//!
//! Labels are fixed as follows:
//!
//! - BPSK: bit `0 → +1`, bit `1 → −1`.
//! - QPSK (Gray): first bit selects the sign of I, second bit the sign of Q,
//!   `0 → +`, `1 → −`, scaled by `1/√2`.
//!
//! A symbol vector of `M` antennas is labeled by the concatenation of the
//! per-antenna labels, antenna 0 first. Candidate index `k` is that label read
//! as a big-endian integer, so candidates are ordered lexicographically by
//! label.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationKind {
    Bpsk,
    Qpsk,
}

impl ConstellationKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstellationKind::Bpsk => "bpsk",
            ConstellationKind::Qpsk => "qpsk",
        }
    }
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstellationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bpsk" => Ok(ConstellationKind::Bpsk),
            "qpsk" => Ok(ConstellationKind::Qpsk),
            other => Err(Error::config(format!(
                "unsupported constellation {other:?} (expected bpsk or qpsk)"
            ))),
        }
    }
}

/// A unit-average-energy constellation. `symbols[label]` is the point for
/// the integer bit label.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    symbols: Vec<Complex64>,
    bits_per_symbol: usize,
}

pub fn build_constellation(kind: ConstellationKind) -> Constellation {
    let symbols = match kind {
        ConstellationKind::Bpsk => vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        ConstellationKind::Qpsk => {
            let a = std::f64::consts::FRAC_1_SQRT_2;
            (0..4u8)
                .map(|label| {
                    let re = if label & 0b10 == 0 { a } else { -a };
                    let im = if label & 0b01 == 0 { a } else { -a };
                    Complex64::new(re, im)
                })
                .collect()
        }
    };
    let bits_per_symbol = match kind {
        ConstellationKind::Bpsk => 1,
        ConstellationKind::Qpsk => 2,
    };
    Constellation {
        kind,
        symbols,
        bits_per_symbol,
    }
}

impl Constellation {
    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    /// Number of constellation points.
    pub fn order(&self) -> usize {
        self.symbols.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn average_energy(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    /// Point for the label formed by `bits` (MSB first).
    fn symbol_for_bits(&self, bits: &[u8]) -> Complex64 {
        self.symbols[bits_to_index(bits)]
    }

    /// Label of the nearest constellation point.
    fn nearest_label(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, s) in self.symbols.iter().enumerate() {
            let d = (z - s).norm_sqr();
            if d < best_d {
                best = label;
                best_d = d;
            }
        }
        best
    }
}

fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1))
}

fn index_to_bits(index: usize, width: usize, out: &mut Vec<u8>) {
    for shift in (0..width).rev() {
        out.push(((index >> shift) & 1) as u8);
    }
}

/// Maps `M · bits_per_symbol` bits onto an `M`-antenna symbol vector.
pub fn map_bits_to_vector(
    bits: &[u8],
    constellation: &Constellation,
    m: usize,
) -> Result<Vec<Complex64>> {
    let bps = constellation.bits_per_symbol();
    if bits.len() != m * bps {
        return Err(Error::usage(format!(
            "expected {} bits for {} antennas, got {}",
            m * bps,
            m,
            bits.len()
        )));
    }
    Ok(bits
        .chunks(bps)
        .map(|chunk| constellation.symbol_for_bits(chunk))
        .collect())
}

/// Inverse of [`map_bits_to_vector`]; off-grid entries take the label of the
/// nearest point.
pub fn map_vector_to_bits(
    vector: &[Complex64],
    constellation: &Constellation,
    m: usize,
) -> Result<Vec<u8>> {
    if vector.len() != m {
        return Err(Error::usage(format!(
            "expected a {m}-entry symbol vector, got {}",
            vector.len()
        )));
    }
    let bps = constellation.bits_per_symbol();
    let mut bits = Vec::with_capacity(m * bps);
    for &z in vector {
        index_to_bits(constellation.nearest_label(z), bps, &mut bits);
    }
    Ok(bits)
}

/// All `N_s^M` symbol vectors with their labels, in label order.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    m: usize,
    bits_per_vector: usize,
    vectors: Vec<Complex64>,
    labels: Vec<u8>,
}

pub fn enumerate_candidates(constellation: &Constellation, m: usize) -> CandidateSet {
    assert!(m >= 1, "antenna count must be at least 1");
    let bps = constellation.bits_per_symbol();
    let bits_per_vector = m * bps;
    let count = constellation.order().pow(m as u32);
    let mut vectors = Vec::with_capacity(count * m);
    let mut labels = Vec::with_capacity(count * bits_per_vector);
    for index in 0..count {
        let start = labels.len();
        index_to_bits(index, bits_per_vector, &mut labels);
        for chunk in labels[start..].chunks(bps) {
            vectors.push(constellation.symbol_for_bits(chunk));
        }
    }
    CandidateSet {
        m,
        bits_per_vector,
        vectors,
        labels,
    }
}

impl CandidateSet {
    pub fn antennas(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.vectors.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn bits_per_vector(&self) -> usize {
        self.bits_per_vector
    }

    pub fn vector(&self, index: usize) -> &[Complex64] {
        &self.vectors[index * self.m..(index + 1) * self.m]
    }

    pub fn label(&self, index: usize) -> &[u8] {
        &self.labels[index * self.bits_per_vector..(index + 1) * self.bits_per_vector]
    }

    /// Candidate index for a full vector label.
    pub fn index_of_label(&self, bits: &[u8]) -> usize {
        debug_assert_eq!(bits.len(), self.bits_per_vector);
        bits_to_index(bits)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Complex64], &[u8])> {
        self.vectors
            .chunks(self.m)
            .zip(self.labels.chunks(self.bits_per_vector))
    }
}

/// Distinct nonzero per-component differences `s_a − s_b`, one representative
/// per `±` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceSet {
    differences: Vec<Complex64>,
}

pub fn difference_set(constellation: &Constellation) -> DifferenceSet {
    let mut differences: Vec<Complex64> = Vec::new();
    let symbols = constellation.symbols();
    for (a, sa) in symbols.iter().enumerate() {
        for (b, sb) in symbols.iter().enumerate() {
            if a == b {
                continue;
            }
            let d = sa - sb;
            if !differences.iter().any(|&v| v == d || v == -d) {
                differences.push(d);
            }
        }
    }
    DifferenceSet { differences }
}

impl DifferenceSet {
    pub fn values(&self) -> &[Complex64] {
        &self.differences
    }

    /// Cardinality `W`.
    pub fn w(&self) -> usize {
        self.differences.len()
    }
}

/// Every distinct nonzero difference vector `x_l − x_n` between candidates,
/// one representative per `±` pair (the first nonzero entry is a stored
/// [`DifferenceSet`] value).
///
/// There are `Σ_{i=1..M} 2^(i−1) · W^i · C(M, i)` of them, which is the number
/// of metric evaluations the fast minimum-distance search performs.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceVectors {
    m: usize,
    entries: Vec<Complex64>,
}

impl DifferenceVectors {
    pub fn new(set: &DifferenceSet, m: usize) -> Self {
        let w = set.values();
        // Per-component alphabet: 0, then +d, −d for each stored d.
        let mut alphabet = vec![Complex64::new(0.0, 0.0)];
        for &d in w {
            alphabet.push(d);
            alphabet.push(-d);
        }
        let base = alphabet.len();
        let mut entries = Vec::new();
        let mut digits = vec![0usize; m];
        for code in 0..base.pow(m as u32) {
            let mut rest = code;
            for digit in digits.iter_mut().rev() {
                *digit = rest % base;
                rest /= base;
            }
            // Canonical sign: first nonzero digit must be a "+d" (odd) digit.
            match digits.iter().find(|&&d| d != 0) {
                Some(&first) if first % 2 == 1 => {
                    entries.extend(digits.iter().map(|&d| alphabet[d]));
                }
                _ => {}
            }
        }
        DifferenceVectors { m, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.entries.chunks(self.m)
    }
}
