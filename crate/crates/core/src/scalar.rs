//! Scalar abstractions shared by every module.
//!
//! Floating-point code is generic over [`Real`] (implemented for `f32` and
//! `f64`); matrices carry `Complex<T>` entries. Purely combinatorial or
//! commutative computations are generic over [`Field`], which also admits
//! exact rationals such as `num_rational::Rational64`.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, Num, ToPrimitive};

use crate::error::{Error, Result};

/// Real scalar backing the complex matrix arithmetic.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    /// Residual tolerance appropriate for this precision.
    fn default_tolerance() -> Self;

    /// Converts an `f64` literal. Never fails for finite input.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn default_tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn default_tolerance() -> Self {
        1e-4
    }
}

/// A commutative field with exact or approximate arithmetic.
pub trait Field: Clone + PartialEq + Debug + Num + Neg<Output = Self> {}

impl<F> Field for F where F: Clone + PartialEq + Debug + Num + Neg<Output = F> {}

/// Dense complex matrix, the representation of every algebra element.
pub type CMatrix<T> = DMatrix<Complex<T>>;

pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub fn identity<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::identity(dim, dim)
}

pub fn zeros<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::zeros(dim, dim)
}

/// Frobenius norm as `f64`.
pub fn frobenius<T: Real>(m: &CMatrix<T>) -> f64 {
    m.norm().as_f64()
}

/// Frobenius distance between two matrices of equal shape.
pub fn distance<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> f64 {
    frobenius(&(a - b))
}

pub fn is_finite<T: Real>(m: &CMatrix<T>) -> bool {
    m.iter().all(|z| z.re.as_f64().is_finite() && z.im.as_f64().is_finite())
}

pub fn ensure_square<T: Real>(m: &CMatrix<T>, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if m.nrows() != dim { m.nrows() } else { m.ncols() },
        });
    }
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// `(m + m*) / 2`.
pub fn hermitian_part<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    (m + m.adjoint()).scale(T::lit(0.5))
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

/// Builds a matrix from rows of `(re, im)` pairs.
pub fn from_pairs<T: Real>(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix<T>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyInput("matrix"));
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
    }
    let m = CMatrix::from_fn(n, n, |i, j| cplx(rows[i][j][0], rows[i][j][1]));
    if !is_finite(&m) {
        return Err(Error::NonFinite);
    }
    Ok(m)
}

/// Inverse of [`from_pairs`].
pub fn to_pairs<T: Real>(m: &CMatrix<T>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re.as_f64(), m[(i, j)].im.as_f64()])
                .collect()
        })
        .collect()
}

pub fn diagonal<T: Real>(entries: &[Complex<T>]) -> CMatrix<T> {
    let n = entries.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            entries[i]
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

/// Maximum absolute off-diagonal entry.
pub fn off_diagonal_max<T: Real>(m: &CMatrix<T>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(nalgebra::ComplexField::modulus(m[(i, j)]).as_f64());
            }
        }
    }
    worst
}

/// Column-major vectorization, matching `nalgebra` storage order.
pub fn vectorize<T: Real>(m: &CMatrix<T>) -> nalgebra::DVector<Complex<T>> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize<T: Real>(v: &nalgebra::DVector<Complex<T>>, dim: usize) -> CMatrix<T> {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}
