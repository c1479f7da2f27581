//! Dense linear algebra over GF(2).
//!
//! Rows are packed into `u64` words so elimination runs a word at a time.
//! Everything here is a pure function of its inputs.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph_state::LabeledGraph;

/// Largest `n` for which [`min_rank_f2`] enumerates all `2^n` diagonals.
pub const DEFAULT_MIN_RANK_LIMIT: usize = 20;
/// Largest `n` for which [`expected_cut_rank`] enumerates all `2^n` subsets.
pub const DEFAULT_CUT_RANK_LIMIT: usize = 16;

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn toggle(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of set bits in increasing order.
    pub fn ones_indices(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "BitVector({s})")
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, true);
            }
        }
        m
    }

    /// Build from row-major boolean rows. All rows must share one length.
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::SizeMismatch(row.len(), cols));
            }
            for (c, &b) in row.iter().enumerate() {
                m.set(r, c, b);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn check(&self, r: usize, c: usize) {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds for {}x{}",
            self.rows,
            self.cols
        );
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.check(r, c);
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.check(r, c);
        let idx = r * self.stride + c / WORD;
        let mask = 1u64 << (c % WORD);
        if value {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    pub fn toggle(&mut self, r: usize, c: usize) {
        self.check(r, c);
        self.data[r * self.stride + c / WORD] ^= 1u64 << (c % WORD);
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Entrywise sum over GF(2).
    pub fn add(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::SizeMismatch(
                self.rows * self.cols,
                other.rows * other.cols,
            ));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a ^= b;
        }
        Ok(out)
    }

    /// `self + diag(d)`.
    pub fn add_diagonal(&self, d: &BitVector) -> Result<BitMatrix> {
        if self.rows != self.cols || d.len() != self.rows {
            return Err(Error::SizeMismatch(self.rows, d.len()));
        }
        let mut out = self.clone();
        for i in d.ones_indices() {
            out.toggle(i, i);
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| (r + 1..self.cols).all(|c| self.get(r, c) == self.get(c, r)))
    }

    /// Square, symmetric, zero diagonal.
    pub fn is_adjacency(&self) -> bool {
        self.is_symmetric() && (0..self.rows).all(|i| !self.get(i, i))
    }

    /// GF(2) rank by Gaussian elimination on a working copy.
    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<u64>> = (0..self.rows).map(|r| self.row_words(r).to_vec()).collect();
        rank_of_rows(&mut rows, self.cols)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let s: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

/// Rank of packed rows; the rows are destroyed in the process.
pub(crate) fn rank_of_rows(rows: &mut [Vec<u64>], cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows.len() {
            break;
        }
        let (w, bit) = (col / WORD, 1u64 << (col % WORD));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & bit != 0 {
                for (a, b) in row.iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinRank {
    pub rank: usize,
    pub diagonal: BitVector,
}

/// Minimum of `rank(A + D)` over every binary diagonal `D`, with a minimizer.
pub fn min_rank_f2(a: &BitMatrix) -> Result<MinRank> {
    min_rank_f2_with_limit(a, DEFAULT_MIN_RANK_LIMIT)
}

pub fn min_rank_f2_with_limit(a: &BitMatrix, limit: usize) -> Result<MinRank> {
    if !a.is_adjacency() {
        return Err(Error::InvalidArgument(
            "min_rank_f2 expects a symmetric zero-diagonal matrix".into(),
        ));
    }
    let n = a.rows();
    if n > limit {
        return Err(Error::SizeLimitExceeded {
            what: "min_rank_f2",
            size: n,
            limit,
        });
    }
    if n == 0 {
        return Ok(MinRank {
            rank: 0,
            diagonal: BitVector::zeros(0),
        });
    }
    let base: Vec<Vec<u64>> = (0..n).map(|r| a.row_words(r).to_vec()).collect();
    // A nonzero off-diagonal entry survives every D.
    let floor = usize::from(base.iter().any(|r| r.iter().any(|&w| w != 0)));
    let mut best: Option<(usize, u64)> = None;
    let mut work = base.clone();
    for mask in 0u64..(1u64 << n) {
        for (i, row) in work.iter_mut().enumerate() {
            row.copy_from_slice(&base[i]);
            if (mask >> i) & 1 == 1 {
                row[i / WORD] ^= 1u64 << (i % WORD);
            }
        }
        let r = rank_of_rows(&mut work, n);
        if best.is_none_or(|(b, _)| r < b) {
            best = Some((r, mask));
            if r == floor {
                break;
            }
        }
    }
    let (rank, mask) = best.expect("at least one diagonal enumerated");
    let diagonal = BitVector::from_bools(&(0..n).map(|i| (mask >> i) & 1 == 1).collect::<Vec<_>>());
    Ok(MinRank { rank, diagonal })
}

/// Rank of the biadjacency matrix between `x` and the rest of the graph.
pub fn cut_rank(g: &LabeledGraph, x: &BTreeSet<usize>) -> Result<usize> {
    for &v in x {
        if !g.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
    }
    let rest: Vec<usize> = g.vertices().filter(|v| !x.contains(v)).collect();
    if x.is_empty() || rest.is_empty() {
        return Ok(0);
    }
    let col_of: std::collections::BTreeMap<usize, usize> =
        rest.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut rows: Vec<Vec<u64>> = x
        .iter()
        .map(|&u| {
            let mut row = vec![0u64; words_for(rest.len())];
            for w in g.neighbors(u).expect("checked above") {
                if let Some(&c) = col_of.get(&w) {
                    row[c / WORD] |= 1u64 << (c % WORD);
                }
            }
            row
        })
        .collect();
    Ok(rank_of_rows(&mut rows, rest.len()))
}

/// Exact mean cut-rank over all `2^n` vertex subsets.
pub fn expected_cut_rank(g: &LabeledGraph) -> Result<Ratio<u64>> {
    expected_cut_rank_with_limit(g, DEFAULT_CUT_RANK_LIMIT)
}

pub fn expected_cut_rank_with_limit(g: &LabeledGraph, limit: usize) -> Result<Ratio<u64>> {
    let verts: Vec<usize> = g.vertices().collect();
    let n = verts.len();
    // Subsets are enumerated as u64 masks.
    let limit = limit.min(63);
    if n > limit {
        return Err(Error::SizeLimitExceeded {
            what: "expected_cut_rank",
            size: n,
            limit,
        });
    }
    let index: std::collections::BTreeMap<usize, usize> =
        verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // Neighborhood masks over local indices; n <= limit keeps them in a u64.
    let nbr: Vec<u64> = verts
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .expect("vertex listed by the graph")
                .map(|w| 1u64 << index[&w])
                .fold(0, |acc, b| acc | b)
        })
        .collect();
    let mut total: u64 = 0;
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n);
    for subset in 0u64..(1u64 << n) {
        rows.clear();
        let complement = !subset & ((1u64 << n) - 1);
        for (i, &m) in nbr.iter().enumerate() {
            if (subset >> i) & 1 == 1 {
                rows.push(vec![m & complement]);
            }
        }
        total += rank_of_rows(&mut rows, n) as u64;
    }
    Ok(Ratio::new(total, 1u64 << n))
}
