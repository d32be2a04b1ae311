//! Pfaffians and the Kasteleyn method on the decorated torus.
//!
//! [`SkewMatrix::pfaffian`] reduces the matrix to tridiagonal form with
//! Gauss transformations (Parlett-Reid), pivoting on the largest entry of
//! each column and tracking the sign of every row/column exchange.

mod correlation;
mod inverse;
mod kasteleyn;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use correlation::{
    correlation_exact_torus, correlation_finite_scan, correlation_limit, correlation_pf,
    criticality_margin, path_probability, CorrelationScan, CorrelationValue, TailClass,
    NEAR_CRITICAL_REFUSE, NEAR_CRITICAL_WARN,
};
pub use inverse::{
    inverse_submatrix, inverse_submatrix_fixed, CoverVertex, Grid, QuadratureReport, Volume,
    GRID_MAX, GRID_START,
};
pub(crate) use kasteleyn::{fundamental as template_symbol, homology_candidates};
pub use kasteleyn::{
    kasteleyn_orient, ln_partition_via_pfaffian, partition_via_pfaffian, KasteleynSystem, Twist,
    TWISTS,
};

/// Field of matrix entries: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
    /// `x / |x|` for nonzero `x`.
    fn unit(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn unit(self) -> Self {
        self.signum()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn unit(self) -> Self {
        self / self.norm()
    }
}

/// Dense square matrix, row-major, expected to be skew-symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix<T> {
    m: usize,
    data: Vec<T>,
}

impl<T: Scalar> SkewMatrix<T> {
    pub fn zeros(m: usize) -> Self {
        SkewMatrix {
            m,
            data: vec![T::zero(); m * m],
        }
    }

    /// Builds from rows without checking skewness (see [`Self::check_skew`]).
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Shape("rows of unequal length or non-square".into()));
        }
        Ok(SkewMatrix {
            m,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Fills the strict upper triangle from `f` and mirrors it.
    pub fn from_upper(m: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut a = Self::zeros(m);
        for i in 0..m {
            for j in i + 1..m {
                a.set(i, j, f(i, j));
            }
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.m + j]
    }

    /// Sets `(i, j)` to `x` and `(j, i)` to `-x`.
    pub fn set(&mut self, i: usize, j: usize, x: T) {
        self.data[i * self.m + j] = x;
        self.data[j * self.m + i] = -x;
    }

    /// Adds `x` at `(i, j)` and `-x` at `(j, i)`.
    pub fn add_pair(&mut self, i: usize, j: usize, x: T) {
        self.data[i * self.m + j] += x;
        self.data[j * self.m + i] -= x;
    }

    /// Sets a single entry, breaking skewness if not mirrored.
    pub fn set_raw(&mut self, i: usize, j: usize, x: T) {
        self.data[i * self.m + j] = x;
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.m.max(1)).map(<[T]>::to_vec).collect()
    }

    /// Largest `|M_ij + M_ji|`.
    pub fn skew_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.m {
            for j in i..self.m {
                worst = worst.max((self.get(i, j) + self.get(j, i)).modulus());
            }
        }
        worst
    }

    /// Fails unless `M^T = -M` to `1e-12` relative to the largest entry.
    pub fn check_skew(&self) -> Result<()> {
        let scale = self.data.iter().fold(1.0f64, |s, x| s.max(x.modulus()));
        let defect = self.skew_defect();
        if defect > 1e-12 * scale {
            return Err(Error::Symmetry(defect));
        }
        Ok(())
    }

    /// `P^T M P` for the permutation sending position `i` to `perm[i]`:
    /// entry `(i, j)` of the result is `M[perm[i], perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        self.submatrix(perm)
    }

    /// Principal submatrix on the given (ordered) indices.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        SkewMatrix { m: k, data }
    }

    pub fn pfaffian(&self) -> Result<T> {
        let (log, phase) = self.log_pfaffian()?;
        Ok(match log {
            None => T::zero(),
            Some(l) => phase * T::from_f64(l.exp()),
        })
    }

    /// `(ln |Pf M|, Pf M / |Pf M|)`, with `None` for a vanishing Pfaffian.
    pub fn log_pfaffian(&self) -> Result<(Option<f64>, T)> {
        if self.m % 2 == 1 {
            return Err(Error::Shape(format!(
                "Pfaffian of odd dimension {}",
                self.m
            )));
        }
        self.check_skew()?;
        let m = self.m;
        let mut a = self.data.clone();
        let mut log = 0.0;
        let mut phase = T::one();
        let at = |i: usize, j: usize| i * m + j;
        for k in (0..m.saturating_sub(1)).step_by(2) {
            let kp = (k + 1..m)
                .max_by(|&i, &j| a[at(i, k)].modulus().total_cmp(&a[at(j, k)].modulus()))
                .expect("nonempty column");
            if kp != k + 1 {
                for c in 0..m {
                    a.swap(at(k + 1, c), at(kp, c));
                }
                for r in 0..m {
                    a.swap(at(r, k + 1), at(r, kp));
                }
                phase = -phase;
            }
            let pivot = a[at(k, k + 1)];
            if pivot.modulus() == 0.0 {
                return Ok((None, T::zero()));
            }
            log += pivot.modulus().ln();
            phase *= pivot.unit();
            if k + 2 < m {
                let tau: Vec<T> = (k + 2..m).map(|j| a[at(k, j)] / pivot).collect();
                let col: Vec<T> = (k + 2..m).map(|i| a[at(i, k + 1)]).collect();
                for (ii, i) in (k + 2..m).enumerate() {
                    for (jj, j) in (k + 2..m).enumerate() {
                        let upd = tau[ii] * col[jj] - col[ii] * tau[jj];
                        a[at(i, j)] += upd;
                    }
                }
            }
        }
        Ok((Some(log), phase))
    }
}

impl SkewMatrix<f64> {
    pub fn determinant(&self) -> f64 {
        nalgebra::DMatrix::from_row_slice(self.m, self.m, &self.data).determinant()
    }

    pub fn to_complex(&self) -> SkewMatrix<Complex64> {
        SkewMatrix {
            m: self.m,
            data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

impl SkewMatrix<Complex64> {
    pub fn determinant(&self) -> Complex64 {
        nalgebra::DMatrix::from_row_slice(self.m, self.m, &self.data).determinant()
    }

    /// Largest imaginary part among the entries.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |s, z| s.max(z.im.abs()))
    }
}

/// The `4k x 4k` block-diagonal matrix with `2k` blocks `[[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockY {
    pub k: usize,
}

impl BlockY {
    pub fn new(k: usize) -> Self {
        BlockY { k }
    }

    pub fn dim(&self) -> usize {
        4 * self.k
    }

    pub fn to_matrix<T: Scalar>(&self) -> SkewMatrix<T> {
        let mut y = SkewMatrix::zeros(self.dim());
        for r in (0..self.dim()).step_by(2) {
            y.set(r, r + 1, T::one());
        }
        y
    }
}
