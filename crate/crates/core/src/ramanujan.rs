//! Ramanujan's differential relations between `E2, E4, E6` and the
//! change of variables that carries the Darboux–Halphen field onto them.
//!
//! The map is defined by matching coefficients of
//! `4(x-t1)(x-t2)(x-t3) = 4(x - a1 E2)^3 - a2 E4 (x - a1 E2) - a3 E6`.
//! Writing `s1, s2, s3` for the elementary symmetric functions of `t` and
//! `u = a1 E2`, the system is triangular:
//!
//! * `x^2`: `12 u = 4 s1`, so `E2 = s1 / (3 a1)`;
//! * `x^1`: `12 u^2 - a2 E4 = 4 s2`, so `E4 = (12 u^2 - 4 s2) / a2`;
//! * `x^0`: `-4 u^3 + a2 E4 u - a3 E6 = -4 s3`, so
//!   `E6 = (4 s3 - 4 u^3 + a2 E4 u) / a3`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;

use crate::dh::{dh_vector_field, DHState};
use crate::error::Result;
use crate::qseries::{eisenstein_series, PiGradedQSeries};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct EisensteinState<S = Complex64> {
    pub e2: S,
    pub e4: S,
    pub e6: S,
}

impl<S: Clone> EisensteinState<S> {
    pub fn new(e2: S, e4: S, e6: S) -> Self {
        Self { e2, e4, e6 }
    }

    pub fn to_array(&self) -> [S; 3] {
        [self.e2.clone(), self.e4.clone(), self.e6.clone()]
    }
}

/// The constants `(a1, a2, a3)` of the cubic matching.
#[derive(Debug, Clone, PartialEq)]
pub struct MapConstants<S = Complex64> {
    pub a1: S,
    pub a2: S,
    pub a3: S,
}

impl MapConstants<Complex64> {
    /// `a1 = 2πi/12`, `a2 = 12 a1^2`, `a3 = 8 a1^3`.
    pub fn standard() -> Self {
        let a1 = Complex64::new(0.0, 2.0 * PI / 12.0);
        Self {
            a1,
            a2: 12.0 * a1 * a1,
            a3: 8.0 * a1 * a1 * a1,
        }
    }
}

impl MapConstants<BigRational> {
    /// The standard constants with `a_k` divided by `(πi)^k`:
    /// `(1/6, 1/3, 1/27)`. Used with the normalized coordinates
    /// `T = t/(πi)`, in which the map has rational coefficients.
    pub fn normalized() -> Self {
        let a1 = BigRational::ratio(1, 6);
        Self {
            a2: BigRational::from_int(12) * &a1 * &a1,
            a3: BigRational::from_int(8) * &a1 * &a1 * &a1,
            a1,
        }
    }
}

/// `q d/dq` of `(E2, E4, E6)`:
/// `((E2²-E4)/12, (E2E4-E6)/3, (E2E6-E4²)/2)`.
pub fn ramanujan_vector_field<S: Scalar>(e: &EisensteinState<S>) -> [S; 3] {
    let EisensteinState { e2, e4, e6 } = e;
    [
        (e2.clone() * e2.clone() - e4.clone()) / S::from_int(12),
        (e2.clone() * e4.clone() - e6.clone()) / S::from_int(3),
        (e2.clone() * e6.clone() - e4.clone() * e4.clone()) / S::from_int(2),
    ]
}

/// Exact residuals `q∂_q E_k - (Ramanujan right-hand side)` through `q^order`.
pub fn ramanujan_series_residual(order: u32) -> Result<[PiGradedQSeries; 3]> {
    let e2 = eisenstein_series(2, order)?;
    let e4 = eisenstein_series(4, order)?;
    let e6 = eisenstein_series(6, order)?;
    let third = |n: i64| BigRational::ratio(1, n);
    let r2 = e2.mul(&e2).sub(&e4)?.scale(&third(12));
    let r4 = e2.mul(&e4).sub(&e6)?.scale(&third(3));
    let r6 = e2.mul(&e6).sub(&e4.mul(&e4))?.scale(&third(2));
    Ok([
        e2.theta_q().sub(&r2)?,
        e4.theta_q().sub(&r4)?,
        e6.theta_q().sub(&r6)?,
    ])
}

fn symmetric<S: Scalar>(t: &DHState<S>) -> (S, S, S) {
    let DHState { t1, t2, t3 } = t.clone();
    let s1 = t1.clone() + t2.clone() + t3.clone();
    let s2 = t1.clone() * t2.clone() + t1.clone() * t3.clone() + t2.clone() * t3.clone();
    let s3 = t1 * t2 * t3;
    (s1, s2, s3)
}

/// Triangular solve of the coefficient matching with arbitrary constants.
pub fn dh_to_eisenstein_with<S: Scalar>(t: &DHState<S>, k: &MapConstants<S>) -> EisensteinState<S> {
    let (s1, s2, s3) = symmetric(t);
    let four = S::from_int(4);
    let u = s1.clone() / S::from_int(3);
    let e2 = u.clone() / k.a1.clone();
    let e4 = (S::from_int(12) * u.clone() * u.clone() - four.clone() * s2) / k.a2.clone();
    let e6 = (four.clone() * s3 - four * u.clone() * u.clone() * u.clone()
        + k.a2.clone() * e4.clone() * u)
        / k.a3.clone();
    EisensteinState { e2, e4, e6 }
}

pub fn dh_to_eisenstein(t: &DHState) -> EisensteinState {
    dh_to_eisenstein_with(t, &MapConstants::standard())
}

/// Analytic Jacobian `∂(E2,E4,E6)/∂(t1,t2,t3)`; row `r` is the gradient of
/// the `r`-th output.
pub fn map_jacobian<S: Scalar>(t: &DHState<S>, k: &MapConstants<S>) -> [[S; 3]; 3] {
    let (s1, _, _) = symmetric(t);
    let e = dh_to_eisenstein_with(t, k);
    let u = s1.clone() / S::from_int(3);
    let ts = t.to_array();
    let mut jac: [[S; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
    for i in 0..3 {
        let (j, l) = ((i + 1) % 3, (i + 2) % 3);
        let d_e2 = S::one() / (S::from_int(3) * k.a1.clone());
        // ∂u/∂t_i = 1/3, ∂s2/∂t_i = s1 - t_i, ∂s3/∂t_i = t_j t_l
        let d_e4 = (S::from_int(8) * u.clone() - S::from_int(4) * (s1.clone() - ts[i].clone()))
            / k.a2.clone();
        let d_e6 = (S::from_int(4) * ts[j].clone() * ts[l].clone()
            - S::from_int(4) * u.clone() * u.clone()
            + k.a2.clone() * (d_e4.clone() * u.clone() + e.e4.clone() / S::from_int(3)))
            / k.a3.clone();
        jac[0][i] = d_e2;
        jac[1][i] = d_e4;
        jac[2][i] = d_e6;
    }
    jac
}

/// `J(t) · ṫ - scale · R(E(t))` with `ṫ` the Darboux–Halphen field and `R`
/// the Ramanujan field.
pub fn conjugacy_residual_with<S: Scalar>(t: &DHState<S>, k: &MapConstants<S>, scale: S) -> [S; 3] {
    let jac = map_jacobian(t, k);
    let f = dh_vector_field(t);
    let r = ramanujan_vector_field(&dh_to_eisenstein_with(t, k));
    std::array::from_fn(|row| {
        let mut acc = S::zero();
        for col in 0..3 {
            acc = acc + jac[row][col].clone() * f[col].clone();
        }
        acc - scale.clone() * r[row].clone()
    })
}

/// Residual of the conjugacy in the original coordinates; `2πi` converts
/// `d/dτ` to `q d/dq`.
pub fn conjugacy_residual(t: &DHState) -> [Complex64; 3] {
    conjugacy_residual_with(t, &MapConstants::standard(), Complex64::new(0.0, 2.0 * PI))
}

/// Exact residual in normalized coordinates `T = t/(πi)`, where
/// `d/dτ` of `E` reads `πi · J_T F(T)` and the Ramanujan side `2πi R(E)`;
/// dividing by `πi` leaves `J_T F(T) - 2 R(E)`.
pub fn conjugacy_residual_normalized(t: &DHState<BigRational>) -> [BigRational; 3] {
    conjugacy_residual_with(t, &MapConstants::normalized(), BigRational::from_int(2))
}
