use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex square operator on a finite-dimensional product space.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    data: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn from_matrix(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch { expected: data.nrows(), got: data.ncols() });
        }
        Ok(OperatorMatrix { data })
    }

    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix { data: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix { data: DMatrix::identity(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        OperatorMatrix { data: DMatrix::from_diagonal(&v) }
    }

    /// Builds a real matrix from row-major entries.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: rows.len() });
        }
        Ok(OperatorMatrix {
            data: DMatrix::from_row_iterator(dim, dim, rows.iter().map(|&x| Complex64::new(x, 0.0))),
        })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[(row, col)] = value;
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix { data: self.data.adjoint() }
    }

    pub fn scale(&self, s: f64) -> Self {
        OperatorMatrix { data: self.data.map(|z| z * s) }
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        OperatorMatrix { data: &self.data * s }
    }

    pub fn kron(&self, other: &OperatorMatrix) -> Self {
        OperatorMatrix { data: self.data.kronecker(&other.data) }
    }

    pub fn commutator(&self, other: &OperatorMatrix) -> Self {
        OperatorMatrix { data: &self.data * &other.data - &other.data * &self.data }
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |H - H^dagger|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U^dagger U - 1|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let prod = self.data.adjoint() * &self.data;
        OperatorMatrix { data: prod }.max_abs_diff(&OperatorMatrix::identity(n))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn off_diagonal_max(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    worst = worst.max(self.data[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Real parts of the diagonal, rejecting non-diagonal or complex-diagonal input.
    pub fn real_diagonal(&self) -> Result<Vec<f64>> {
        let off = self.off_diagonal_max();
        let imag = self.data.diagonal().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if off > 0.0 || imag > 0.0 {
            return Err(Error::NotDiagonal(off.max(imag)));
        }
        Ok(self.data.diagonal().iter().map(|z| z.re).collect())
    }

    /// Applies `f` entrywise to the real diagonal of a diagonal operator.
    pub fn map_diagonal(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let diag = self.real_diagonal()?;
        Ok(Self::from_real_diagonal(&diag.into_iter().map(f).collect::<Vec<_>>()))
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.data * v
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { data: &self.data + &rhs.data }
    }
}

impl Add for OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { data: self.data + rhs.data }
    }
}

impl AddAssign<&OperatorMatrix> for OperatorMatrix {
    fn add_assign(&mut self, rhs: &OperatorMatrix) {
        self.data += &rhs.data;
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { data: &self.data - &rhs.data }
    }
}

impl Sub for OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { data: self.data - rhs.data }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { data: &self.data * &rhs.data }
    }
}

impl Mul for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { data: self.data * rhs.data }
    }
}

impl Neg for OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix { data: -self.data }
    }
}

/// Left-multiplies by a real diagonal: `diag(d) * m`.
pub(crate) fn diag_left(d: &[f64], m: &OperatorMatrix) -> OperatorMatrix {
    let mut out = m.clone();
    for (i, &s) in d.iter().enumerate() {
        out.data.row_mut(i).scale_mut(s);
    }
    out
}

/// Right-multiplies by a real diagonal: `m * diag(d)`.
pub(crate) fn diag_right(m: &OperatorMatrix, d: &[f64]) -> OperatorMatrix {
    let mut out = m.clone();
    for (j, &s) in d.iter().enumerate() {
        out.data.column_mut(j).scale_mut(s);
    }
    out
}
