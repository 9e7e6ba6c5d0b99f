//! Dense exact rational matrices.
//!
//! Closed-image certificates and exactness checks are all-or-nothing, so this
//! layer works over ℚ with arbitrary precision: `rank` means true rank, and
//! identities like `M·N·M = M` are asserted exactly rather than up to a
//! tolerance. Matrices are dense; every dimension in this crate is desk-scale.

use crate::{Error, Result};
use num::{BigInt, BigRational, One, Signed, Zero};
use std::fmt;
use std::ops::{Index, IndexMut};

/// Arbitrary-precision rational in canonical form (reduced, denominator > 0).
pub type Rat = BigRational;

/// `n` as a rational.
pub fn rat(n: i64) -> Rat {
    BigRational::from_integer(n.into())
}

/// `n/d` in canonical form. Panics if `d = 0`.
pub fn ratio(n: i64, d: i64) -> Rat {
    BigRational::new(n.into(), d.into())
}

/// Pivot preference during elimination: the entry with the smallest
/// `|numerator| · |denominator|` keeps intermediate sizes down. Row order
/// breaks ties, so elimination is deterministic.
fn pivot_weight(x: &Rat) -> BigInt {
    x.numer().abs() * x.denom().abs()
}

/// Dense row-major matrix over ℚ. Zero rows or columns are legal; empty
/// matrices behave as the unique linear map between zero spaces.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    /// Builds from row vectors; `cols` disambiguates the empty-row-list case.
    pub fn from_rows(rows: Vec<Vec<Rat>>, cols: usize) -> Result<Self> {
        for r in &rows {
            if r.len() != cols {
                return Err(Error::invalid(format!(
                    "ragged matrix: expected {} columns, found a row with {}",
                    cols,
                    r.len()
                )));
            }
        }
        Ok(RatMatrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Integer literal constructor. Panics on ragged input.
    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(
            rows.iter().map(|r| r.iter().copied().map(rat).collect()).collect(),
            cols,
        )
        .expect("ragged integer literal")
    }

    /// Single-column matrix holding `v`.
    pub fn from_col(v: &[Rat]) -> Self {
        Self::from_fn(v.len(), 1, |i, _| v[i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn row_slice(&self, r: usize) -> &[Rat] {
        assert!(r < self.rows);
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Rat> {
        assert!(c < self.cols);
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} · {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).map(|k| &self[(i, k)] * &rhs[(k, j)]).sum()
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| &self[(i, k)] * &v[k]).sum())
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &rhs[(i, j)])
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| -self[(i, j)].clone())
    }

    pub fn scale(&self, s: &Rat) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] * s)
    }

    pub fn hstack(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows);
        Self::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                rhs[(i, j - self.cols)].clone()
            }
        })
    }

    pub fn vstack(&self, below: &Self) -> Self {
        assert_eq!(self.cols, below.cols);
        Self::from_fn(self.rows + below.rows, self.cols, |i, j| {
            if i < self.rows {
                self[(i, j)].clone()
            } else {
                below[(i - self.rows, j)].clone()
            }
        })
    }

    pub fn block_diag(blocks: &[RatMatrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    /// Kronecker product; index pairing is row-major, `(i,k)·(j,l) ↦
    /// (i·rows(rhs)+k, j·cols(rhs)+l)`.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            &self[(i / rhs.rows, j / rhs.cols)] * &rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)].clone())
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])].clone())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Reduced row echelon form and the pivot columns, in increasing order.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows)
                .filter(|&i| !m[(i, c)].is_zero())
                .min_by_key(|&i| pivot_weight(&m[(i, c)]))
            else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &m[(i, j)] - &(&f * &m[(r, j)]);
                        m[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// `M = C·R` with `C` the pivot columns of `M` (full column rank) and `R`
    /// the nonzero rows of the reduced echelon form (full row rank).
    pub fn rank_factorize(&self) -> (Self, Self) {
        let (rr, pivots) = self.rref();
        let c = self.select_cols(&pivots);
        let r = rr.select_rows(&(0..pivots.len()).collect::<Vec<_>>());
        (c, r)
    }

    /// Inverse of a square matrix, or `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let (rr, pivots) = self.hstack(&Self::identity(n)).rref();
        if pivots.len() < n || pivots.iter().take(n).any(|&p| p >= n) {
            return None;
        }
        Some(rr.select_cols(&(n..2 * n).collect::<Vec<_>>()))
    }

    /// A right quasi-inverse: `M·N·M = M` exactly. Built from the rank
    /// factorization as `N = Rᵗ(RRᵗ)⁻¹(CᵗC)⁻¹Cᵗ`; the two inner Gram matrices
    /// are invertible because `C` and `R` have full rank.
    pub fn right_pseudo_inverse(&self) -> Self {
        let (c, r) = self.rank_factorize();
        let rt = r.transpose();
        let ct = c.transpose();
        let rrt_inv = r.matmul(&rt).inverse().expect("RRᵗ is invertible");
        let ctc_inv = ct.matmul(&c).inverse().expect("CᵗC is invertible");
        rt.matmul(&rrt_inv).matmul(&ctc_inv).matmul(&ct)
    }

    /// One solution `X` of `self · X = rhs`, or `None` if inconsistent.
    /// Free coordinates are set to zero.
    pub fn solve_matrix(&self, rhs: &Self) -> Option<Self> {
        assert_eq!(self.rows, rhs.rows);
        let (rr, pivots) = self.hstack(rhs).rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Self::zeros(self.cols, rhs.cols);
        for (i, &p) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x[(p, j)] = rr[(i, self.cols + j)].clone();
            }
        }
        Some(x)
    }

    pub fn solve_vec(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        self.solve_matrix(&Self::from_col(b)).map(|x| x.col(0))
    }

    /// Columns form a basis of `ker(self)`. Each basis vector is scaled so
    /// its first nonzero coordinate is exactly 1.
    pub fn kernel_basis(&self) -> Self {
        let (rr, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Self::zeros(self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            k[(fc, j)] = Rat::one();
            for (i, &pc) in pivots.iter().enumerate() {
                k[(pc, j)] = -rr[(i, fc)].clone();
            }
            let lead = (0..self.cols)
                .find(|&r| !k[(r, j)].is_zero())
                .expect("kernel basis column is nonzero");
            let inv = k[(lead, j)].recip();
            for r in 0..self.cols {
                let v = &k[(r, j)] * &inv;
                k[(r, j)] = v;
            }
        }
        k
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rat;

    fn index(&self, (r, c): (usize, usize)) -> &Rat {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rat {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}
