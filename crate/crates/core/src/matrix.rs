//! Attribute vectors and matrices in the canonical ±1 encoding.
//!
//! An attribute is the sign pattern of a binary classifier over a fixed set of
//! `N` exemplars. Matrices store their columns bit-packed (bit set ⇔ `+1`), so
//! agreement counts and inner products between columns reduce to popcounts.
//! The `{0,1}` encoding exists only at the I/O boundary.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// One attribute: a length-`N` vector with entries in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeVector {
    values: Vec<i8>,
    name: Option<String>,
}

impl AttributeVector {
    pub fn new(values: Vec<i8>, name: Option<String>) -> Result<Self> {
        if let Some(row) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::NonBinaryEntry {
                row,
                column: 0,
                value: values[row].to_string(),
            });
        }
        Ok(Self { values, name })
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The sign-flipped attribute `-z`.
    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| -v).collect(),
            name: self.name.clone(),
        }
    }
}

/// Checks raw columns against the matrix invariants.
///
/// Succeeds iff every entry is `-1` or `+1`, all columns have the same length
/// and the names (when given) are unique and one per column.
pub fn validate(columns: &[Vec<i8>], names: Option<&[String]>) -> Result<()> {
    let expected = columns.first().map_or(0, Vec::len);
    for (column, values) in columns.iter().enumerate() {
        if values.len() != expected {
            return Err(Error::RaggedColumns {
                column,
                expected,
                found: values.len(),
            });
        }
        if let Some(row) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::NonBinaryEntry {
                row,
                column,
                value: values[row].to_string(),
            });
        }
    }
    if let Some(names) = names {
        if names.len() != columns.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        check_unique(names)?;
    }
    Ok(())
}

fn check_unique(names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateName(name.clone()));
        }
    }
    Ok(())
}

/// `N × M` matrix of ±1 attribute outcomes, stored column-major and bit-packed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeMatrix {
    n_exemplars: usize,
    n_columns: usize,
    words: usize,
    bits: Vec<u64>,
    names: Option<Vec<String>>,
}

pub(crate) fn words_for(n_exemplars: usize) -> usize {
    n_exemplars.div_ceil(64)
}

/// Mask of the valid bits in the last word of a column.
pub(crate) fn tail_mask(n_exemplars: usize) -> u64 {
    match n_exemplars % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl AttributeMatrix {
    /// A matrix with `n_exemplars` rows and no columns.
    pub fn empty(n_exemplars: usize) -> Self {
        Self {
            n_exemplars,
            n_columns: 0,
            words: words_for(n_exemplars),
            bits: Vec::new(),
            names: None,
        }
    }

    /// Builds a matrix from raw ±1 columns, validating every invariant.
    pub fn from_columns(n_exemplars: usize, columns: &[Vec<i8>], names: Option<Vec<String>>) -> Result<Self> {
        validate(columns, names.as_deref())?;
        if let Some(first) = columns.first() {
            if first.len() != n_exemplars {
                return Err(Error::RaggedColumns {
                    column: 0,
                    expected: n_exemplars,
                    found: first.len(),
                });
            }
        }
        let words = words_for(n_exemplars);
        let mut bits = vec![0u64; words * columns.len()];
        for (k, column) in columns.iter().enumerate() {
            let col = &mut bits[k * words..(k + 1) * words];
            for (i, &v) in column.iter().enumerate() {
                if v == 1 {
                    col[i / 64] |= 1 << (i % 64);
                }
            }
        }
        Ok(Self {
            n_exemplars,
            n_columns: columns.len(),
            words,
            bits,
            names,
        })
    }

    /// Builds a matrix from attribute vectors. Names are kept only when every
    /// vector carries one.
    pub fn from_vectors(n_exemplars: usize, vectors: &[AttributeVector]) -> Result<Self> {
        let columns: Vec<Vec<i8>> = vectors.iter().map(|v| v.values.clone()).collect();
        let names: Option<Vec<String>> = vectors.iter().map(|v| v.name.clone()).collect();
        Self::from_columns(n_exemplars, &columns, names)
    }

    /// Converts `{0,1}` columns (`0 ↦ -1`, `1 ↦ +1`).
    pub fn from_zero_one(n_exemplars: usize, columns: &[Vec<u8>], names: Option<Vec<String>>) -> Result<Self> {
        let mut converted = Vec::with_capacity(columns.len());
        for (column, values) in columns.iter().enumerate() {
            let mut out = Vec::with_capacity(values.len());
            for (row, &v) in values.iter().enumerate() {
                match v {
                    0 => out.push(-1),
                    1 => out.push(1),
                    other => {
                        return Err(Error::NonBinaryEntry {
                            row,
                            column,
                            value: other.to_string(),
                        })
                    }
                }
            }
            converted.push(out);
        }
        Self::from_columns(n_exemplars, &converted, names)
    }

    /// Inverse of [`AttributeMatrix::from_zero_one`].
    pub fn to_zero_one(&self) -> Vec<Vec<u8>> {
        (0..self.n_columns)
            .map(|k| (0..self.n_exemplars).map(|i| u8::from(self.bit(i, k))).collect())
            .collect()
    }

    /// Raw ±1 columns.
    pub fn to_columns(&self) -> Vec<Vec<i8>> {
        (0..self.n_columns).map(|k| self.column_values(k)).collect()
    }

    pub(crate) fn from_bits(n_exemplars: usize, bits: Vec<u64>) -> Self {
        let words = words_for(n_exemplars);
        let n_columns = bits.len().checked_div(words).unwrap_or(0);
        debug_assert_eq!(n_columns * words, bits.len());
        Self {
            n_exemplars,
            n_columns,
            words,
            bits,
            names: None,
        }
    }

    pub fn n_exemplars(&self) -> usize {
        self.n_exemplars
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    pub fn is_empty(&self) -> bool {
        self.n_columns == 0
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn name(&self, k: usize) -> Option<&str> {
        self.names.as_ref().map(|n| n[k].as_str())
    }

    /// Column label for display: its name or `#k`.
    pub fn label(&self, k: usize) -> String {
        self.name(k).map_or_else(|| format!("#{k}"), str::to_owned)
    }

    /// Replaces the column names.
    pub fn with_names(mut self, names: Option<Vec<String>>) -> Result<Self> {
        if let Some(n) = &names {
            if n.len() != self.n_columns {
                return Err(Error::ShapeMismatch(format!(
                    "{} names for {} columns",
                    n.len(),
                    self.n_columns
                )));
            }
            check_unique(n)?;
        }
        self.names = names;
        Ok(self)
    }

    fn bit(&self, row: usize, k: usize) -> bool {
        self.bits[k * self.words + row / 64] >> (row % 64) & 1 == 1
    }

    /// Entry at `(row, column)` as `-1` or `+1`.
    pub fn get(&self, row: usize, k: usize) -> i8 {
        assert!(row < self.n_exemplars && k < self.n_columns, "index out of bounds");
        if self.bit(row, k) {
            1
        } else {
            -1
        }
    }

    pub fn column_values(&self, k: usize) -> Vec<i8> {
        (0..self.n_exemplars).map(|i| self.get(i, k)).collect()
    }

    pub fn column(&self, k: usize) -> AttributeVector {
        AttributeVector {
            values: self.column_values(k),
            name: self.name(k).map(str::to_owned),
        }
    }

    pub(crate) fn column_bits(&self, k: usize) -> &[u64] {
        &self.bits[k * self.words..(k + 1) * self.words]
    }

    /// Number of exemplars on which columns `a` of `self` and `b` of `other` agree.
    pub(crate) fn agreements_with(&self, a: usize, other: &AttributeMatrix, b: usize) -> u32 {
        let mismatches: u32 = self
            .column_bits(a)
            .iter()
            .zip(other.column_bits(b))
            .map(|(x, y)| (x ^ y).count_ones())
            .sum();
        self.n_exemplars as u32 - mismatches
    }

    /// Number of exemplars where column `k` is `+1`.
    pub fn positives(&self, k: usize) -> u32 {
        self.column_bits(k).iter().map(|w| w.count_ones()).sum()
    }

    /// Number of exemplars where both column `a` of `self` and column `b` of
    /// `other` are `+1`.
    pub(crate) fn joint_positives(&self, a: usize, other: &AttributeMatrix, b: usize) -> u32 {
        self.column_bits(a)
            .iter()
            .zip(other.column_bits(b))
            .map(|(x, y)| (x & y).count_ones())
            .sum()
    }

    /// Sub-matrix with the given columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let mut bits = Vec::with_capacity(indices.len() * self.words);
        for &k in indices {
            bits.extend_from_slice(self.column_bits(k));
        }
        Self {
            n_exemplars: self.n_exemplars,
            n_columns: indices.len(),
            words: self.words,
            bits,
            names: self
                .names
                .as_ref()
                .map(|n| indices.iter().map(|&k| n[k].clone()).collect()),
        }
    }

    /// All columns except `k`.
    pub fn without_column(&self, k: usize) -> Self {
        let keep: Vec<usize> = (0..self.n_columns).filter(|&j| j != k).collect();
        self.select_columns(&keep)
    }

    /// Concatenates columns of `self` followed by those of `other`.
    ///
    /// Names survive only when both sides are named and the union stays unique.
    pub fn hstack(&self, other: &AttributeMatrix) -> Result<Self> {
        check_same_exemplars(self, other)?;
        let mut bits = Vec::with_capacity(self.bits.len() + other.bits.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&other.bits);
        let names = match (&self.names, &other.names) {
            (Some(a), Some(b)) => {
                let joined: Vec<String> = a.iter().chain(b).cloned().collect();
                check_unique(&joined).ok().map(|_| joined)
            }
            _ => None,
        };
        Ok(Self {
            n_exemplars: self.n_exemplars,
            n_columns: self.n_columns + other.n_columns,
            words: self.words,
            bits,
            names,
        })
    }
}

pub(crate) fn check_same_exemplars(a: &AttributeMatrix, b: &AttributeMatrix) -> Result<()> {
    if a.n_exemplars != b.n_exemplars {
        return Err(Error::ShapeMismatch(format!(
            "matrices cover {} and {} exemplars",
            a.n_exemplars, b.n_exemplars
        )));
    }
    Ok(())
}

/// Partition of a labelled attribute set into the representation `S1` and the
/// holdout `S2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSplit {
    pub s1: AttributeMatrix,
    pub s2: AttributeMatrix,
    /// Columns of the original set placed in `s1`, ascending.
    pub s1_indices: Vec<usize>,
    /// Columns of the original set placed in `s2`, ascending.
    pub s2_indices: Vec<usize>,
    /// Columns that were required to land in `s1`.
    pub forced_indices: Vec<usize>,
    pub seed: u64,
}
