//! Agreement correlation and greedy one-to-one matching.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{check_same_exemplars, AttributeMatrix, AttributeVector};

/// Fraction of exemplars on which two attributes agree.
pub fn correlation(z: &AttributeVector, h: &AttributeVector) -> Result<f64> {
    if z.len() != h.len() {
        return Err(Error::ShapeMismatch(format!(
            "attributes of length {} and {}",
            z.len(),
            h.len()
        )));
    }
    if z.is_empty() {
        return Err(Error::ShapeMismatch("attributes over zero exemplars".into()));
    }
    let same = z.values().iter().zip(h.values()).filter(|(a, b)| a == b).count();
    Ok(same as f64 / z.len() as f64)
}

/// One selected `(meaningful, discovered)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchPair {
    pub meaningful: usize,
    pub discovered: usize,
    /// Number of exemplars on which the two attributes agree.
    pub agreements: u32,
    pub correlation: f64,
}

/// Pairs in selection order; correlations are nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchSet {
    pub pairs: Vec<MatchPair>,
}

impl MatchSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The meaningful attribute matched to discovered column `k`, if any.
    pub fn partner_of(&self, k: usize) -> Option<&MatchPair> {
        self.pairs.iter().find(|p| p.discovered == k)
    }
}

/// Greedily pairs meaningful columns of `a` with discovered columns of `b`.
///
/// Each step takes the highest-correlation pair whose row and column are both
/// still free, until `min(J, K)` pairs exist. Ties go to the lexicographically
/// smallest `(j, k)`. The agreement table is computed once; scanning it in
/// `(agreement desc, j, k)` order picks exactly the pairs the stepwise rule
/// would.
pub fn greedy_match(a: &AttributeMatrix, b: &AttributeMatrix) -> Result<MatchSet> {
    check_same_exemplars(a, b)?;
    let (j_count, k_count) = (a.n_columns(), b.n_columns());
    if j_count == 0 || k_count == 0 {
        return Err(Error::ShapeMismatch(format!(
            "matching needs nonempty sets, got J={j_count}, K={k_count}"
        )));
    }
    if a.n_exemplars() == 0 {
        return Err(Error::ShapeMismatch("attributes over zero exemplars".into()));
    }
    let n = a.n_exemplars() as u64;
    let target = j_count.min(k_count);

    // Packed sort key: (mismatches, j, k) ascending.
    let mut keys = Vec::with_capacity(j_count * k_count);
    for j in 0..j_count {
        for k in 0..k_count {
            let mismatches = n - u64::from(a.agreements_with(j, b, k));
            keys.push((mismatches << 42) | ((j as u64) << 21) | k as u64);
        }
    }
    keys.sort_unstable();

    let mut row_used = vec![false; j_count];
    let mut col_used = vec![false; k_count];
    let mut pairs = Vec::with_capacity(target);
    for key in keys {
        let j = ((key >> 21) & 0x1f_ffff) as usize;
        let k = (key & 0x1f_ffff) as usize;
        if row_used[j] || col_used[k] {
            continue;
        }
        row_used[j] = true;
        col_used[k] = true;
        let agreements = (n - (key >> 42)) as u32;
        pairs.push(MatchPair {
            meaningful: j,
            discovered: k,
            agreements,
            correlation: f64::from(agreements) / n as f64,
        });
        if pairs.len() == target {
            break;
        }
    }
    Ok(MatchSet { pairs })
}
