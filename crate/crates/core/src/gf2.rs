//! Dense GF(2) linear algebra over 64-bit packed words.
//!
//! Row `i` of a [`BitMatrix`] occupies `words_per_row` consecutive words; bit
//! `j` of the row lives in word `j / 64` at position `j % 64`. Padding bits
//! past `cols` are kept at zero so that word-wise popcounts and equality are
//! exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[inline]
fn word_count(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
fn tail_mask(bits: usize) -> u64 {
    match bits % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A packed vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; word_count(len)],
            len,
        }
    }

    pub fn unit(len: usize, bit: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(bit, true);
        v
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.flip(i);
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_indices(
            bits.len(),
            bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i),
        )
    }

    pub(crate) fn from_words(words: Vec<u64>, len: usize) -> Self {
        debug_assert_eq!(words.len(), word_count(len));
        let mut v = Self { words, len };
        v.clear_padding();
        v
    }

    fn clear_padding(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.len);
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn parity(&self) -> bool {
        self.weight() % 2 == 1
    }

    /// Parity of the bitwise AND with `other`.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot product of unequal lengths");
        dot_words(&self.words, &other.words)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        xor_words(&mut self.words, &other.words);
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Copy extended with zeros (or truncated) to `len` bits.
    pub fn resized(&self, len: usize) -> BitVec {
        let mut words = self.words.clone();
        words.resize(word_count(len), 0);
        BitVec::from_words(words, len)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        write!(f, "]")
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let tz = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_idx * 64 + tz);
            }
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}

#[inline]
fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

#[inline]
fn dot_words(a: &[u64], b: &[u64]) -> bool {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc ^= x & y;
    }
    acc.count_ones() % 2 == 1
}

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = word_count(cols);
        Self {
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

    /// Builds a matrix from row supports (lists of column indices).
    pub fn from_supports(cols: usize, supports: &[Vec<usize>]) -> Self {
        let mut m = Self::zeros(supports.len(), cols);
        for (r, support) in supports.iter().enumerate() {
            for &c in support {
                m.flip(r, c);
            }
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[BitVec]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            check_len(cols, row.len())?;
            m.row_words_mut(r).copy_from_slice(row.words());
        }
        Ok(m)
    }

    /// Parses rows of '0'/'1' characters; whitespace is ignored.
    pub fn from_strs(rows: &[&str]) -> Self {
        let parsed: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| {
                r.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| c == '1')
                    .collect()
            })
            .collect();
        let cols = parsed.first().map_or(0, Vec::len);
        let mut m = Self::zeros(parsed.len(), cols);
        for (r, bits) in parsed.iter().enumerate() {
            assert_eq!(bits.len(), cols, "ragged rows");
            for (c, &b) in bits.iter().enumerate() {
                m.set(r, c, b);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / 64];
        let mask = 1u64 << (c % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols);
        self.data[r * self.stride + c / 64] ^= 1u64 << (c % 64);
    }

    pub fn row(&self, r: usize) -> BitVec {
        BitVec::from_words(self.row_words(r).to_vec(), self.cols)
    }

    pub fn row_support(&self, r: usize) -> Vec<usize> {
        self.row(r).ones().collect()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut weights = vec![0; self.cols];
        for r in 0..self.rows {
            for c in self.row(r).ones() {
                weights[c] += 1;
            }
        }
        weights
    }

    /// Column supports: for each column, the rows with a one.
    pub fn column_supports(&self) -> Vec<Vec<usize>> {
        let mut supports = vec![Vec::new(); self.cols];
        for r in 0..self.rows {
            for c in self.row(r).ones() {
                supports[c].push(r);
            }
        }
        supports
    }

    /// `row[dst] ^= row[src]`.
    pub fn add_row(&mut self, dst: usize, src: usize) {
        assert_ne!(dst, src);
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        xor_words(a, b);
    }

    pub fn add_vec_to_row(&mut self, dst: usize, v: &BitVec) {
        assert_eq!(v.len(), self.cols);
        xor_words(self.row_words_mut(dst), v.words());
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row(r).ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Product `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        check_len(self.cols, other.rows)?;
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in self.row(r).ones() {
                let s = out.stride;
                xor_words(
                    &mut out.data[r * s..(r + 1) * s],
                    &other.data[k * s..(k + 1) * s],
                );
            }
        }
        Ok(out)
    }

    /// Rows at the given indices, in order.
    pub fn select_rows(&self, rows: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(rows.len(), self.cols);
        for (dst, &src) in rows.iter().enumerate() {
            out.row_words_mut(dst).copy_from_slice(self.row_words(src));
        }
        out
    }

    /// Vertical concatenation.
    pub fn stack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        check_len(self.cols, other.cols)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(BitMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        })
    }

    /// Column `k` of the result is column `perm[k]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> BitMatrix {
        assert_eq!(perm.len(), self.cols);
        let mut out = BitMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (k, &c) in perm.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, k, true);
                }
            }
        }
        out
    }

    /// Inverse of a square matrix, or `None` when singular.
    pub fn inverse(&self) -> Option<BitMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = BitMatrix::identity(n);
        for c in 0..n {
            let pivot = (c..n).find(|&r| a.get(r, c))?;
            a.swap_rows(c, pivot);
            inv.swap_rows(c, pivot);
            for r in 0..n {
                if r != c && a.get(r, c) {
                    a.add_row(r, c);
                    inv.add_row(r, c);
                }
            }
        }
        Some(inv)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{}", u8::from(self.get(r, c)))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `M·v` over GF(2); this is how syndromes are computed from errors.
pub fn mat_vec_mul(m: &BitMatrix, v: &BitVec) -> Result<BitVec> {
    check_len(m.cols, v.len())?;
    let mut words = vec![0u64; word_count(m.rows)];
    for r in 0..m.rows {
        if dot_words(m.row_words(r), v.words()) {
            words[r / 64] |= 1u64 << (r % 64);
        }
    }
    Ok(BitVec::from_words(words, m.rows))
}

pub fn rank(m: &BitMatrix) -> usize {
    let mut a = m.clone();
    let mut rank = 0;
    for c in 0..a.cols {
        if rank == a.rows {
            break;
        }
        let Some(pivot) = (rank..a.rows).find(|&r| a.get(r, c)) else {
            continue;
        };
        a.swap_rows(rank, pivot);
        for r in rank + 1..a.rows {
            if a.get(r, c) {
                a.add_row(r, rank);
            }
        }
        rank += 1;
    }
    rank
}

/// Whether two matrices with the same column count span the same row space.
pub fn same_row_space(a: &BitMatrix, b: &BitMatrix) -> bool {
    if a.cols != b.cols {
        return false;
    }
    let ra = rank(a);
    ra == rank(b) && ra == rank(&a.stack(b).expect("equal column counts"))
}

/// Result of reducing a parity-check matrix to standard form while
/// remembering every row operation.
///
/// `transform · H` has the kept checks in its first `rank` rows and zeros
/// below. Permuting those rows' columns by `column_perm` gives
/// `standard_form = [I_r | A]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedElimination {
    pub transform: BitMatrix,
    pub inverse: BitMatrix,
    /// `column_perm[k]` is the original column placed at position `k`.
    pub column_perm: Vec<usize>,
    pub standard_form: BitMatrix,
    pub rank: usize,
    pub dropped_rows: Vec<usize>,
}

impl TrackedElimination {
    /// The kept rows of `transform · H` in the original column order.
    pub fn reduced_rows(&self) -> BitMatrix {
        let mut inv_perm = vec![0; self.column_perm.len()];
        for (k, &c) in self.column_perm.iter().enumerate() {
            inv_perm[c] = k;
        }
        self.standard_form.permute_columns(&inv_perm)
    }

    /// Maps a syndrome of the reduced rows back to the original rows:
    /// `inverse · [s; 0]`.
    pub fn lift_syndrome(&self, reduced: &BitVec) -> Result<BitVec> {
        check_len(self.rank, reduced.len())?;
        mat_vec_mul(&self.inverse, &reduced.resized(self.transform.rows()))
    }

    /// Builds the record for an explicit full-rank row set `checks` drawn
    /// from the row space of `h`, with `pivots[i]` the column where row `i`
    /// is the only row with a one.
    ///
    /// The transform's first rows express each check as a sum of rows of
    /// `h`; the remaining rows span the left null space of `h`.
    pub fn from_row_combination(
        h: &BitMatrix,
        checks: &BitMatrix,
        pivots: &[usize],
    ) -> Result<Self> {
        check_len(h.cols(), checks.cols())?;
        check_len(checks.rows(), pivots.len())?;
        let base = row_reduce_tracked(h);
        if base.rank != checks.rows() {
            return Err(Error::ContractViolation(format!(
                "check set has {} rows but the source matrix has rank {}",
                checks.rows(),
                base.rank
            )));
        }
        let reduced = base.reduced_rows();
        let pivot_cols = &base.column_perm[..base.rank];
        let m = h.rows();
        let mut transform = BitMatrix::zeros(m, m);
        for i in 0..checks.rows() {
            let row = checks.row(i);
            let mut remainder = row.clone();
            for (k, &pc) in pivot_cols.iter().enumerate() {
                if row.get(pc) {
                    transform.add_vec_to_row(i, &base.transform.row(k));
                    remainder.xor_assign(&reduced.row(k));
                }
            }
            if !remainder.is_zero() {
                return Err(Error::ContractViolation(format!(
                    "check {i} is not in the row space of the source matrix"
                )));
            }
        }
        for (offset, k) in (base.rank..m).enumerate() {
            transform.add_vec_to_row(checks.rows() + offset, &base.transform.row(k));
        }
        let inverse = transform.inverse().ok_or_else(|| {
            Error::ContractViolation("check set is linearly dependent".to_string())
        })?;

        let mut column_perm = pivots.to_vec();
        let mut seen = vec![false; h.cols()];
        for &p in pivots {
            if p >= h.cols() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::ContractViolation(format!(
                    "pivot column {p} repeated or out of range"
                )));
            }
        }
        column_perm.extend((0..h.cols()).filter(|&c| !seen[c]));
        let standard_form = checks.permute_columns(&column_perm);
        for i in 0..checks.rows() {
            for (j, pivot) in pivots.iter().enumerate() {
                if standard_form.get(i, j) != (i == j) {
                    return Err(Error::ContractViolation(format!(
                        "check {i} is not in standard form at pivot column {pivot}"
                    )));
                }
            }
        }
        Ok(Self {
            transform,
            inverse,
            column_perm,
            standard_form,
            rank: checks.rows(),
            dropped_rows: base.dropped_rows,
        })
    }
}

/// Gauss–Jordan elimination with tracked row operations.
///
/// Columns are scanned left to right; a column becomes a pivot whenever one
/// of the not-yet-pivoted rows has a one there. Pivot columns are moved to
/// the front (keeping their order), which is the only column relabelling
/// performed.
pub fn row_reduce_tracked(h: &BitMatrix) -> TrackedElimination {
    let m = h.rows();
    let mut a = h.clone();
    let mut t = BitMatrix::identity(m);
    let mut order: Vec<usize> = (0..m).collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..h.cols() {
        if r == m {
            break;
        }
        let Some(pivot) = (r..m).find(|&i| a.get(i, c)) else {
            continue;
        };
        a.swap_rows(r, pivot);
        t.swap_rows(r, pivot);
        order.swap(r, pivot);
        for i in 0..m {
            if i != r && a.get(i, c) {
                a.add_row(i, r);
                t.add_row(i, r);
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let rank = r;
    let mut column_perm = pivot_cols.clone();
    let mut is_pivot = vec![false; h.cols()];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    column_perm.extend((0..h.cols()).filter(|&c| !is_pivot[c]));
    let kept: Vec<usize> = (0..rank).collect();
    let standard_form = a.select_rows(&kept).permute_columns(&column_perm);
    let inverse = t.inverse().expect("row operations are invertible");
    let mut dropped_rows = order[rank..].to_vec();
    dropped_rows.sort_unstable();
    TrackedElimination {
        transform: t,
        inverse,
        column_perm,
        standard_form,
        rank,
        dropped_rows,
    }
}

/// Row-echelon basis supporting fast membership tests for a row space.
#[derive(Clone, Debug)]
pub struct RowSpace {
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(m: &BitMatrix) -> Self {
        let el = row_reduce_tracked(m);
        let reduced = el.reduced_rows();
        Self {
            rows: (0..el.rank).map(|i| reduced.row(i)).collect(),
            pivots: el.column_perm[..el.rank].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[BitVec] {
        &self.rows
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the
    /// row space.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut out = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if out.get(p) {
                out.xor_assign(row);
            }
        }
        out
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_times_vector() {
        let v = BitVec::from_bools(&[true, false, true]);
        assert_eq!(mat_vec_mul(&BitMatrix::identity(3), &v).unwrap(), v);
    }

    #[test]
    fn zero_matrix_annihilates() {
        let v = BitVec::from_bools(&[true, true, false, true]);
        assert!(mat_vec_mul(&BitMatrix::zeros(5, 4), &v).unwrap().is_zero());
    }

    #[test]
    fn mat_vec_dimension_mismatch() {
        let err = mat_vec_mul(&BitMatrix::identity(3), &BitVec::zeros(4)).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 3,
                found: 4
            }
        );
    }

    #[test]
    fn rank_of_identity() {
        for n in [1, 5, 64, 65, 130] {
            assert_eq!(rank(&BitMatrix::identity(n)), n);
        }
    }

    #[test]
    fn hand_checked_reduction() {
        let h = BitMatrix::from_strs(&["110", "011"]);
        let el = row_reduce_tracked(&h);
        assert_eq!(el.standard_form, BitMatrix::from_strs(&["101", "011"]));
        assert_eq!(el.transform, BitMatrix::from_strs(&["11", "01"]));
        assert_eq!(el.column_perm, vec![0, 1, 2]);
        assert_eq!(el.rank, 2);
        assert!(el.dropped_rows.is_empty());
    }

    #[test]
    fn identity_is_a_fixed_point() {
        let el = row_reduce_tracked(&BitMatrix::identity(7));
        assert_eq!(el.transform, BitMatrix::identity(7));
        assert_eq!(el.column_perm, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn column_swap_when_no_pivot_available() {
        // Column 1 is empty below the first pivot, so column 2 is pulled
        // forward.
        let h = BitMatrix::from_strs(&["1100", "0011"]);
        let el = row_reduce_tracked(&h);
        assert_eq!(el.column_perm, vec![0, 2, 1, 3]);
        assert_eq!(el.standard_form, BitMatrix::from_strs(&["1010", "0101"]));
    }

    #[test]
    fn redundant_row_is_dropped() {
        let h = BitMatrix::from_strs(&["110", "011", "101"]);
        let el = row_reduce_tracked(&h);
        assert_eq!(el.rank, 2);
        assert_eq!(el.dropped_rows, vec![2]);
        assert_eq!(el.standard_form.rows(), 2);
    }

    #[test]
    fn ones_iterates_across_words() {
        let v = BitVec::from_indices(200, [0, 63, 64, 130, 199]);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![0, 63, 64, 130, 199]);
        assert_eq!(v.weight(), 5);
    }

    #[test]
    fn row_space_membership() {
        let h = BitMatrix::from_strs(&["1100", "0110"]);
        let space = RowSpace::new(&h);
        assert!(space.contains(&BitVec::from_bools(&[true, false, true, false])));
        assert!(!space.contains(&BitVec::from_bools(&[true, false, false, false])));
    }

    fn arb_matrix() -> impl Strategy<Value = BitMatrix> {
        (1usize..=64, 1usize..=64).prop_flat_map(|(r, c)| {
            proptest::collection::vec(any::<bool>(), r * c).prop_map(move |bits| {
                let mut m = BitMatrix::zeros(r, c);
                for (i, b) in bits.into_iter().enumerate() {
                    m.set(i / c, i % c, b);
                }
                m
            })
        })
    }

    fn arb_vec_pair(len: usize) -> impl Strategy<Value = (BitVec, BitVec)> {
        (
            proptest::collection::vec(any::<bool>(), len),
            proptest::collection::vec(any::<bool>(), len),
        )
            .prop_map(|(a, b)| (BitVec::from_bools(&a), BitVec::from_bools(&b)))
    }

    proptest! {
        #[test]
        fn elimination_invariants(h in arb_matrix()) {
            let el = row_reduce_tracked(&h);
            let m = h.rows();
            prop_assert_eq!(el.transform.mul(&el.inverse).unwrap(), BitMatrix::identity(m));
            let th = el.transform.mul(&h).unwrap();
            let kept: Vec<usize> = (0..el.rank).collect();
            prop_assert_eq!(
                th.select_rows(&kept).permute_columns(&el.column_perm),
                el.standard_form.clone()
            );
            for r in el.rank..m {
                prop_assert!(th.row(r).is_zero());
            }
            for i in 0..el.rank {
                for j in 0..el.rank {
                    prop_assert_eq!(el.standard_form.get(i, j), i == j);
                }
            }
            prop_assert_eq!(rank(&el.standard_form), el.rank);
            prop_assert_eq!(el.standard_form.rows(), el.rank);
            prop_assert!(same_row_space(&el.reduced_rows(), &h));
            let kept_rows: Vec<usize> =
                (0..m).filter(|r| !el.dropped_rows.contains(r)).collect();
            prop_assert_eq!(rank(&h.select_rows(&kept_rows)), el.rank);
        }

        #[test]
        fn inverse_undoes_transform(h in arb_matrix(), seed in any::<u64>()) {
            let el = row_reduce_tracked(&h);
            let m = h.rows();
            let s = BitVec::from_indices(m, (0..m).filter(|i| (seed >> (i % 64)) & 1 == 1));
            let ts = mat_vec_mul(&el.transform, &s).unwrap();
            prop_assert_eq!(mat_vec_mul(&el.inverse, &ts).unwrap(), s);
        }

        #[test]
        fn mat_vec_is_linear((h, u, v) in arb_matrix().prop_flat_map(|h| {
            let n = h.cols();
            (Just(h), arb_vec_pair(n))
        }).prop_map(|(h, (u, v))| (h, u, v))) {
            let lhs = mat_vec_mul(&h, &u.xor(&v)).unwrap();
            let rhs = mat_vec_mul(&h, &u).unwrap().xor(&mat_vec_mul(&h, &v).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
