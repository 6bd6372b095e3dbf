//! Field abstraction shared by the exact (rational) and floating (complex)
//! evaluations of the polynomial identities.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Num;
use std::ops::Neg;

pub trait Scalar: Num + Clone + Neg<Output = Self> + std::fmt::Debug {
    fn from_int(n: i64) -> Self;

    /// Magnitude used for reporting residuals.
    fn magnitude(&self) -> f64;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }
}

impl Scalar for BigRational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn magnitude(&self) -> f64 {
        use num_traits::{Signed, ToPrimitive};
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl Scalar for Complex64 {
    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Scalar for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}
