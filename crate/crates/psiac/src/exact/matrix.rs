//! Dense matrices over exact rationals, with exact linear solving.

use super::rational::Rational;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("matrix is singular (rank-deficient)")]
pub struct SingularMatrix;

/// Row-major dense matrix of `Rational` entries.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.get_mut(i, i) = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        RatMatrix { rows, cols, entries }
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        RatMatrix {
            rows: nrows,
            cols: ncols,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Rational {
        &mut self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn matmul(&self, rhs: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matmul");
        RatMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = Rational::zero();
            for k in 0..self.cols {
                if !self.get(i, k).is_zero() && !rhs.get(k, j).is_zero() {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
            }
            acc
        })
    }

    /// Left-multiply a row vector: `v * self`.
    pub fn row_vec_mul(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.rows, "dimension mismatch");
        (0..self.cols)
            .map(|j| {
                let mut acc = Rational::zero();
                for (i, vi) in v.iter().enumerate() {
                    if !vi.is_zero() {
                        acc += vi * self.get(i, j);
                    }
                }
                acc
            })
            .collect()
    }

    /// Right-multiply a column vector: `self * v`.
    pub fn mat_vec_mul(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (j, vj) in v.iter().enumerate() {
                    if !vj.is_zero() {
                        acc += self.get(i, j) * vj;
                    }
                }
                acc
            })
            .collect()
    }

    /// Scale every entry in row `i`.
    pub fn scale_row(&mut self, i: usize, s: &Rational) {
        for j in 0..self.cols {
            let v = self.get(i, j) * s;
            self.set(i, j, v);
        }
    }

    /// Reverse the column order (right-multiplication by the reversal matrix).
    pub fn reverse_columns(&self) -> RatMatrix {
        RatMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, self.cols - 1 - j).clone()
        })
    }

    /// Reverse the row order.
    pub fn reverse_rows(&self) -> RatMatrix {
        RatMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(self.rows - 1 - i, j).clone()
        })
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(Rational::to_f64).collect())
            .collect()
    }

    /// Solve `A·X = B` exactly by Gaussian elimination with partial
    /// pivoting on rational magnitude.
    pub fn solve(&self, rhs: &RatMatrix) -> Result<RatMatrix, SingularMatrix> {
        assert_eq!(self.rows, self.cols, "solve requires a square matrix");
        assert_eq!(rhs.rows, self.rows, "rhs row count mismatch");
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();

        for col in 0..n {
            // Pivot: largest |entry| decided by cross-multiplied integers.
            let pivot_row = (col..n)
                .filter(|&r| !a.get(r, col).is_zero())
                .max_by(|&r, &s| {
                    let x = a.get(r, col).abs();
                    let y = a.get(s, col).abs();
                    (x.numer() * y.denom()).cmp(&(y.numer() * x.denom()))
                })
                .ok_or(SingularMatrix)?;
            if pivot_row != col {
                for j in 0..n {
                    a.entries.swap(col * n + j, pivot_row * n + j);
                }
                for j in 0..m {
                    b.entries.swap(col * m + j, pivot_row * m + j);
                }
            }
            let inv_pivot = a.get(col, col).recip();
            a.scale_row(col, &inv_pivot);
            b.scale_row(col, &inv_pivot);
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for j in col..n {
                    let v = a.get(r, j) - &(&factor * a.get(col, j));
                    a.set(r, j, v);
                }
                for j in 0..m {
                    let v = b.get(r, j) - &(&factor * b.get(col, j));
                    b.set(r, j, v);
                }
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<RatMatrix, SingularMatrix> {
        self.solve(&RatMatrix::identity(self.rows))
    }
}

impl std::fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
