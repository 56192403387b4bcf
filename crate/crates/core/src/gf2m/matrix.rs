use std::fmt;

use crate::bits::{words_for, BitVector};

/// Dense GF(2) matrix, bit-packed row-major in 64-bit words.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
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

    pub fn from_rows(rows: &[BitVector]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        m
    }

    pub fn from_u8_rows(rows: &[&[u8]]) -> Self {
        Self::from_rows(&rows.iter().map(|r| BitVector::from_bits(r)).collect::<Vec<_>>())
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
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / 64];
        let mask = 1u64 << (c % 64);
        if v {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn column(&self, c: usize) -> BitVector {
        BitVector::from_bools((0..self.rows).map(|r| self.get(r, c)))
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    /// row[dst] ^= row[src]
    #[inline]
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        let (src_off, dst_off) = (src * s, dst * s);
        for w in 0..s {
            let v = self.data[src_off + w];
            self.data[dst_off + w] ^= v;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let (o, s) = (other.row_words(k).to_vec(), r);
                    for (d, v) in out.row_words_mut(s).iter_mut().zip(o) {
                        *d ^= v;
                    }
                }
            }
        }
        out
    }

    /// Row vector times matrix: `v * self`.
    pub fn left_mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.rows, "dimension mismatch");
        let mut acc = vec![0u64; self.stride];
        for r in v.ones() {
            for (a, &w) in acc.iter_mut().zip(self.row_words(r)) {
                *a ^= w;
            }
        }
        BitVector::from_words(self.cols, acc)
    }

    /// Matrix times column vector: `self * v^T`.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        BitVector::from_bools((0..self.rows).map(|r| {
            self.row_words(r)
                .iter()
                .zip(v.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum::<u32>()
                % 2
                == 1
        }))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn rank(&self) -> usize {
        gf2_eliminate(self, &(0..self.cols).collect::<Vec<_>>()).1.len()
    }

    /// Submatrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        Ok(())
    }
}

/// Reduced row echelon form with pivots chosen in `column_priority` order.
///
/// Returns the reduced matrix (pivot row `i` has its leading one at
/// `pivot_columns[i]` and the pivot columns form an identity) and the first
/// `rank` linearly independent columns in priority order. Rows beyond the
/// rank are zero. The input is not modified.
pub fn gf2_eliminate(m: &BinaryMatrix, column_priority: &[usize]) -> (BinaryMatrix, Vec<usize>) {
    debug_assert!(is_permutation(column_priority, m.cols()));
    let mut a = m.clone();
    let mut pivots = Vec::with_capacity(m.rows().min(m.cols()));
    let mut rank = 0;
    for &c in column_priority {
        if rank == a.rows() {
            break;
        }
        let Some(p) = (rank..a.rows()).find(|&r| a.get(r, c)) else {
            continue;
        };
        a.swap_rows(p, rank);
        for r in 0..a.rows() {
            if r != rank && a.get(r, c) {
                a.xor_row_into(rank, r);
            }
        }
        pivots.push(c);
        rank += 1;
    }
    (a, pivots)
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    p.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}
