use std::fmt;

use crate::error::{Error, Result};
use crate::field;

/// Dense matrix over F_p, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix<F_{}>({}x{})", self.p, self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        Self { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_fn(p: u32, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut m = Self::zeros(p, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c) % p;
            }
        }
        m
    }

    /// Builds a matrix from row vectors; all rows must have length `cols`.
    pub fn from_rows(p: u32, cols: usize, rows: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(p, rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "row length");
            for (c, &v) in row.iter().enumerate() {
                m.data[r * cols + c] = v % p;
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(p: u32, rows: usize, cols: &[Vec<u32>]) -> Self {
        Self::from_rows(p, rows, cols).transpose()
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
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
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn col_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.cols).map(|c| self.col(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.p, self.cols, self.rows, |r, c| self.get(c, r))
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} over F_{} vs {}x{} over F_{}",
                self.rows, self.cols, self.p, other.rows, other.cols, other.p
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let p = self.p;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| field::add(a, b, p)).collect();
        Ok(Self { data, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let p = self.p;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| field::sub(a, b, p)).collect();
        Ok(Self { data, ..*self })
    }

    pub fn neg(&self) -> Self {
        let p = self.p;
        Self { data: self.data.iter().map(|&a| field::neg(a, p)).collect(), ..*self }
    }

    pub fn scale(&self, k: u32) -> Self {
        let p = self.p;
        let k = k % p;
        Self { data: self.data.iter().map(|&a| field::mul(k, a, p)).collect(), ..*self }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.p != other.p || self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.p as u64;
        let mut out = Self::zeros(self.p, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k) as u64;
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let i = r * other.cols + c;
                    out.data[i] = ((out.data[i] as u64 + a * other.get(k, c) as u64) % p) as u32;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.cols, "vector length");
        let p = self.p as u64;
        (0..self.rows)
            .map(|r| {
                let acc: u64 = self.row(r).iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum();
                (acc % p) as u32
            })
            .collect()
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.p != other.p || self.cols != other.cols {
            return Err(Error::DimensionMismatch("vstack column count".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self { p: self.p, rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.p != other.p || self.rows != other.rows {
            return Err(Error::DimensionMismatch("hstack row count".into()));
        }
        Ok(Self::from_fn(self.p, self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.get(r, c)
            } else {
                other.get(r, c - self.cols)
            }
        }))
    }

    /// Reduced row-echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let p = self.p;
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for k in 0..cols {
                    self.data.swap(pr * cols + k, r * cols + k);
                }
            }
            let inv = field::inv(self.get(r, c), p);
            for k in c..cols {
                let v = field::mul(self.get(r, k), inv, p);
                self.data[r * cols + k] = v;
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c);
                if f == 0 {
                    continue;
                }
                for k in c..cols {
                    let v = field::sub(self.get(i, k), field::mul(f, self.get(r, k), p), p);
                    self.data[i * cols + k] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space {x : Mx = 0}.
    pub fn kernel(&self) -> Vec<Vec<u32>> {
        let (r, pivots) = self.rref();
        let p = self.p;
        let mut is_pivot = vec![None; self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            is_pivot[c] = Some(i);
        }
        let mut basis = Vec::new();
        for f in 0..self.cols {
            if is_pivot[f].is_some() {
                continue;
            }
            let mut v = vec![0u32; self.cols];
            v[f] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = field::neg(r.get(i, f), p);
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(self.p, n)).ok()?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Self::from_fn(self.p, n, n, |i, j| r.get(i, n + j)))
    }

    /// One solution of Mx = b with free variables set to zero, if any exists.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(b.len(), self.rows, "rhs length");
        let bm = Self::from_cols(self.p, self.rows, &[b.to_vec()]);
        let aug = self.hstack(&bm).ok()?;
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0u32; self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = r.get(i, self.cols);
        }
        Some(x)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.p, idx.len(), self.cols, |r, c| self.get(idx[r], c))
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.p, self.rows, idx.len(), |r, c| self.get(r, idx[c]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_rank_kernel() {
        let m = Matrix::from_rows(3, 3, &[vec![1, 2, 0], vec![2, 1, 0], vec![0, 0, 1]]);
        // rows 1 and 2 are dependent over F_3
        assert_eq!(m.rank(), 2);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).iter().all(|&v| v == 0));
    }

    #[test]
    fn inverse_round_trip() {
        let m = Matrix::from_rows(5, 3, &[vec![1, 2, 3], vec![0, 1, 4], vec![2, 0, 1]]);
        let inv = m.inverse().expect("invertible");
        assert_eq!(m.mul(&inv).unwrap(), Matrix::identity(5, 3));
        let singular = Matrix::from_rows(5, 2, &[vec![1, 2], vec![2, 4]]);
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = Matrix::from_rows(3, 2, &[vec![1, 1], vec![2, 2]]);
        let x = m.solve(&[1, 2]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![1, 2]);
        assert!(m.solve(&[1, 1]).is_none());
    }
}
