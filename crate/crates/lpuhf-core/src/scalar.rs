//! Generic complex scalar shared by the numerical and the exact path.

use num::complex::Complex;
use num::rational::BigRational;
use num::traits::{Num, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::Neg;

/// Field of complex scalars a matrix algebra can be built over.
///
/// Implemented by `Complex<f64>` (the numerical path) and
/// `Complex<BigRational>` (the exact path, used wherever an identity must hold
/// in exact arithmetic). Norm computations only exist on the numerical path;
/// the generic surface covers ring/field operations, conjugation, and
/// conversion down to `Complex<f64>`.
pub trait Scalar: Clone + PartialEq + Debug + Num + Neg<Output = Self> {
    /// Complex conjugate.
    fn conjugate(&self) -> Self;

    /// The scalar `num/den` as an element of the field.
    ///
    /// On the exact path this is an exact rational; on the numerical path it
    /// is the nearest `f64` quotient.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Numerical image of the scalar.
    fn to_c64(&self) -> Complex<f64>;

    /// Magnitude used for pivot selection in elimination.
    fn pivot_weight(&self) -> f64 {
        self.to_c64().norm()
    }

    /// The integer `n` as an element of the field.
    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

impl Scalar for Complex<f64> {
    fn conjugate(&self) -> Self {
        self.conj()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        debug_assert!(den != 0, "zero denominator");
        Complex::new(num as f64 / den as f64, 0.0)
    }

    fn to_c64(&self) -> Complex<f64> {
        *self
    }
}

impl Scalar for Complex<BigRational> {
    fn conjugate(&self) -> Self {
        self.conj()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        debug_assert!(den != 0, "zero denominator");
        Complex::new(
            BigRational::new(num.into(), den.into()),
            BigRational::zero(),
        )
    }

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}
