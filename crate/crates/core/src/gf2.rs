//! Bit-packed exact linear algebra over GF(2).
//!
//! Rows are packed into 64-bit words and elimination proceeds by whole-row
//! XOR. Charts at desk scale stay far below the point where blocking or
//! sparsity would pay off.

use alloc::vec;
use alloc::vec::Vec;

/// Packed GF(2) vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zero(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(64).max(1)] }
    }

    pub fn from_indices(len: usize, ones: &[usize]) -> Self {
        let mut v = BitVec::zero(len);
        for &i in ones {
            v.set(i, true);
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
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn xor_in(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        let len = self.len;
        self.words.iter().enumerate().flat_map(move |(w, &word)| {
            (0..64).filter_map(move |b| {
                let i = w * 64 + b;
                (i < len && word >> b & 1 == 1).then_some(i)
            })
        })
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Dense GF(2) matrix, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    width: usize,
    data: Vec<u64>,
}

/// Result of [`BitMatrix::rref`].
#[derive(Clone, Debug)]
pub struct Echelon {
    pub matrix: BitMatrix,
    /// Pivot column of each pivot row, ascending.
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl BitMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        let width = cols.div_ceil(64).max(1);
        BitMatrix { rows, cols, width, data: vec![0; rows * width] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = BitMatrix::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.width + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let mask = 1u64 << (j % 64);
        let w = &mut self.data[i * self.width + j / 64];
        if v {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// `row[dst] ^= row[src]`
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        debug_assert!(src != dst);
        let (a, b) = (src * self.width, dst * self.width);
        for k in 0..self.width {
            let v = self.data[a + k];
            self.data[b + k] ^= v;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.width {
            self.data.swap(a * self.width + k, b * self.width + k);
        }
    }

    pub fn row(&self, i: usize) -> BitVec {
        let mut v = BitVec::zero(self.cols);
        v.words.copy_from_slice(&self.data[i * self.width..(i + 1) * self.width]);
        v
    }

    pub fn set_row(&mut self, i: usize, v: &BitVec) {
        debug_assert_eq!(v.len, self.cols);
        self.data[i * self.width..(i + 1) * self.width].copy_from_slice(&v.words);
    }

    pub fn col(&self, j: usize) -> BitVec {
        let mut v = BitVec::zero(self.rows);
        for i in 0..self.rows {
            if self.get(i, j) {
                v.set(i, true);
            }
        }
        v
    }

    pub fn row_is_zero(&self, i: usize) -> bool {
        self.data[i * self.width..(i + 1) * self.width].iter().all(|&w| w == 0)
    }

    pub fn transpose(&self) -> BitMatrix {
        BitMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = BitMatrix::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    let (a, b) = (k * rhs.width, i * out.width);
                    for w in 0..rhs.width {
                        let v = rhs.data[a + w];
                        out.data[b + w] ^= v;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(self.cols, v.len);
        let mut out = BitVec::zero(self.rows);
        for i in 0..self.rows {
            let mut acc = 0u64;
            for k in 0..self.width {
                acc ^= self.data[i * self.width + k] & v.words[k];
            }
            out.set(i, acc.count_ones() % 2 == 1);
        }
        out
    }

    /// Reduced row echelon form; rank is the pivot count.
    pub fn rref(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for j in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, j)) else {
                continue;
            };
            m.swap_rows(r, p);
            for i in 0..m.rows {
                if i != r && m.get(i, j) {
                    m.xor_row_into(r, i);
                }
            }
            pivots.push(j);
            r += 1;
        }
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank()
    }

    /// Basis of the right kernel `{v : Mv = 0}`; `cols - rank` vectors.
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let ech = self.rref();
        let mut basis = Vec::new();
        let mut is_pivot = vec![false; self.cols];
        for &c in &ech.pivots {
            is_pivot[c] = true;
        }
        for j in 0..self.cols {
            if is_pivot[j] {
                continue;
            }
            let mut v = BitVec::zero(self.cols);
            v.set(j, true);
            for (row, &c) in ech.pivots.iter().enumerate() {
                if ech.matrix.get(row, j) {
                    v.set(c, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `self * x = rhs`; `None` when `rhs` is outside the column space.
    /// Free coordinates are set to zero.
    pub fn solve(&self, rhs: &BitVec) -> Option<BitVec> {
        assert_eq!(self.rows, rhs.len);
        let mut aug = BitMatrix::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    aug.set(i, j, true);
                }
            }
            if rhs.get(i) {
                aug.set(i, self.cols, true);
            }
        }
        let ech = aug.rref();
        if ech.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = BitVec::zero(self.cols);
        for (row, &c) in ech.pivots.iter().enumerate() {
            if ech.matrix.get(row, self.cols) {
                x.set(c, true);
            }
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rref_identity() {
        let m = BitMatrix::identity(3);
        assert_eq!(m.rref().rank(), 3);
        assert!(m.kernel_basis().is_empty());
    }

    #[test]
    fn rref_rank_one() {
        let m = BitMatrix::from_fn(2, 2, |_, _| true);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_of_zero_matrix() {
        let m = BitMatrix::zero(2, 3);
        assert_eq!(m.kernel_basis().len(), 3);
    }

    #[test]
    fn kernel_small() {
        // [[1,1,0],[0,1,1]] has kernel spanned by (1,1,1); brute-force check.
        let m = BitMatrix::from_fn(2, 3, |i, j| matches!((i, j), (0, 0) | (0, 1) | (1, 1) | (1, 2)));
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        let mut expected = Vec::new();
        for bits in 0u32..8 {
            let v = BitVec::from_indices(3, &(0..3).filter(|&j| bits >> j & 1 == 1).collect::<Vec<_>>());
            if !v.is_zero() && m.mul_vec(&v).is_zero() {
                expected.push(v);
            }
        }
        assert_eq!(expected.len(), 1);
        assert_eq!(basis[0], expected[0]);
    }

    #[test]
    fn planted_kernel_vector() {
        // 20x20 matrix built so that column 0 is the sum of columns in the
        // support of v; then Mv = 0 and the reduced form annihilates v.
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        let mut m = BitMatrix::from_fn(20, 20, |_, _| next() & 1 == 1);
        let support = [0usize, 3, 7, 11, 19];
        for i in 0..20 {
            let mut bit = false;
            for &j in &support[1..] {
                bit ^= m.get(i, j);
            }
            m.set(i, 0, bit);
        }
        let v = BitVec::from_indices(20, &support);
        assert!(m.mul_vec(&v).is_zero());
        let ech = m.rref();
        assert!(ech.matrix.mul_vec(&v).is_zero());
    }

    #[test]
    fn solve_in_and_out_of_span() {
        let m = BitMatrix::from_fn(3, 2, |i, j| matches!((i, j), (0, 0) | (1, 0) | (1, 1)));
        let b = BitVec::from_indices(3, &[0, 1]);
        let x = m.solve(&b).unwrap();
        assert_eq!(m.mul_vec(&x), b);
        let c = BitVec::from_indices(3, &[2]);
        assert!(m.solve(&c).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn rank_nullity(rows in 0usize..=64, cols in 0usize..=64, seed in any::<u64>()) {
            let mut s = seed | 1;
            let mut next = move || { s ^= s << 13; s ^= s >> 7; s ^= s << 17; s };
            let m = BitMatrix::from_fn(rows, cols, |_, _| next() & 1 == 1);
            prop_assert_eq!(m.rank() + m.kernel_basis().len(), cols);
        }

        #[test]
        fn kernel_vectors_annihilate(rows in 1usize..=16, cols in 1usize..=16, seed in any::<u64>()) {
            let mut s = seed | 1;
            let mut next = move || { s ^= s << 13; s ^= s >> 7; s ^= s << 17; s };
            let m = BitMatrix::from_fn(rows, cols, |_, _| next() & 1 == 1);
            for v in m.kernel_basis() {
                prop_assert!(m.mul_vec(&v).is_zero());
            }
        }
    }
}
