//! Minimal dense real linear algebra for the stacked equivalent-channel math.
//!
//! The matrices involved are tiny (at most 32x64 for the four-relay code), so
//! a row-major `Vec` with straightforward loops beats pulling in a full linear
//! algebra stack, and keeps everything generic over [`Scalar`].

use crate::scalar::Scalar;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
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
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` copied out (rows are contiguous, columns are not).
    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let lhs_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in lhs_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        self.data
            .chunks_exact(self.cols)
            .map(|row| dot(row, v))
            .collect()
    }

    /// A * A^T, exploiting contiguous rows on both sides.
    pub fn gram_t(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let v = dot(self.row(i), self.row(j));
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Scales row `i` by `s[i]` in place (left-multiplication by diag(s)).
    pub fn scale_rows(&mut self, s: &[T]) {
        assert_eq!(s.len(), self.rows);
        for (i, &f) in s.iter().enumerate() {
            for v in &mut self.data[i * self.cols..(i + 1) * self.cols] {
                *v *= f;
            }
        }
    }

    pub fn add_diag(&mut self, d: T) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self[(i, i)] += d;
        }
    }

    /// Solves `self * X = B` by Gauss elimination with partial pivoting.
    ///
    /// Returns `None` if the system is numerically singular.
    pub fn solve(&self, b: &Mat<T>) -> Option<Mat<T>> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(self.rows, b.rows, "rhs row count mismatch");
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.clone();
        for k in 0..n {
            let mut piv = k;
            let mut best = a[(k, k)].abs();
            for i in k + 1..n {
                let v = a[(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return None;
            }
            if piv != k {
                a.swap_rows(piv, k);
                x.swap_rows(piv, k);
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / d;
                if f == T::zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
                for j in 0..x.cols {
                    let v = x[(k, j)];
                    x[(i, j)] -= f * v;
                }
            }
        }
        // Back substitution.
        for k in (0..n).rev() {
            let d = a[(k, k)];
            for j in 0..x.cols {
                let mut acc = x[(k, j)];
                for i in k + 1..n {
                    acc -= a[(k, i)] * x[(i, j)];
                }
                x[(k, j)] = acc / d;
            }
        }
        Some(x)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (head, tail) = self.data.split_at_mut(hi * self.cols);
        head[lo * self.cols..(lo + 1) * self.cols].swap_with_slice(&mut tail[..self.cols]);
    }
}

impl<T: Scalar> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        let i = Mat::<f64>::identity(2);
        assert_eq!(a.matmul(&i), a);
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = Mat::<f64>::from_rows(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 2.0]]);
        let x_true = vec![1.0, -2.0, 0.5];
        let b = a.matvec(&x_true);
        let bm = Mat::from_rows(&b.iter().map(|&v| vec![v]).collect::<Vec<_>>());
        let x = a.solve(&bm).unwrap();
        for i in 0..3 {
            assert!((x[(i, 0)] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_detects_singular() {
        let a = Mat::<f64>::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let b = Mat::<f64>::identity(2);
        assert!(a.solve(&b).is_none());
    }

    #[test]
    fn gram_matches_explicit_product() {
        let a = Mat::<f64>::from_rows(&[vec![1.0, 2.0, 3.0], vec![0.5, -1.0, 2.0]]);
        let g = a.gram_t();
        let g2 = a.matmul(&a.transpose());
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[(i, j)] - g2[(i, j)]).abs() < 1e-14);
            }
        }
    }
}
