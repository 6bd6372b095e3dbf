//! Self-dual Bianchi IX metrics
//! `ds² = c0² dr² + c1² (σ¹)² + c2² (σ²)² + c3² (σ³)²`, `c0 = c1 c2 c3`.
//!
//! Covers the connection one-form coefficients, the reduced
//! (anti-)self-duality equations, the change of variables
//! `Ω_i = 2 c_j c_k`, the coupled `Ω`–`A` system and the theta-function
//! families in the conformally rescaled form
//! `ds² = F (dt² + Σ σ_i² / Ω_i²)`.
//!
//! The double signs `∓` of the reduced equations are always resolved by an
//! explicit [`SelfDualitySign`]: the upper sign is the self-dual case.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{integrate, IntegratorConfig, Trajectory};
use crate::qseries::{classical_theta_jet, theta_char_jet, TauPoint, ThetaCharacteristics};
use crate::scalar::Scalar;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Diagonal coefficients `c1, c2, c3 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricCoeffs {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl MetricCoeffs {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        for (i, c) in [c1, c2, c3].into_iter().enumerate() {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::NonPositiveCoefficient(i + 1));
            }
        }
        Ok(Self { c1, c2, c3 })
    }

    pub fn c0(&self) -> f64 {
        self.c1 * self.c2 * self.c3
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }
}

/// `Ω = (Ω1, Ω2, Ω3)` and, for the coupled system, `A = (A1, A2, A3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaAState<S = f64> {
    pub omega: [S; 3],
    pub a: Option<[S; 3]>,
}

impl<S> OmegaAState<S> {
    pub fn omega_only(omega: [S; 3]) -> Self {
        Self { omega, a: None }
    }

    pub fn coupled(omega: [S; 3], a: [S; 3]) -> Self {
        Self { omega, a: Some(a) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelfDualitySign {
    /// `R_{0i} = +R_{jk}`; upper sign of every `±`/`∓`.
    SelfDual,
    /// `R_{0i} = -R_{jk}`; lower sign.
    AntiSelfDual,
}

impl SelfDualitySign {
    /// `+1` for self-dual, `-1` for anti-self-dual.
    pub fn value(self) -> i64 {
        match self {
            SelfDualitySign::SelfDual => 1,
            SelfDualitySign::AntiSelfDual => -1,
        }
    }
}

/// Outcomes of the constant-`λ` analysis of the curvature condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaCase {
    /// `λ1 = λ2 = λ3 = 0`: self-dual connection, Euler-top system. Not
    /// modelled here.
    EulerTop,
    /// `λ_i² = 4`, `λ1λ2λ3 = ±8`, brought to `λ1 = λ2 = λ3 = ±2` by flipping
    /// signs of the `c_i`; this is the Darboux–Halphen branch.
    DarbouxHalphen,
}

impl LambdaCase {
    pub const ALL: [LambdaCase; 2] = [LambdaCase::EulerTop, LambdaCase::DarbouxHalphen];

    /// Common value of the `λ_i` after sign normalization.
    pub fn lambdas(self, sign: SelfDualitySign) -> [i64; 3] {
        match self {
            LambdaCase::EulerTop => [0; 3],
            LambdaCase::DarbouxHalphen => [2 * sign.value(); 3],
        }
    }

    /// Whether the constants satisfy `λ_i = ±½ λ_j λ_k` for all cyclic
    /// `(i, j, k)` with a common sign.
    pub fn is_consistent(lambdas: [i64; 3]) -> bool {
        [1i64, -1].iter().any(|&s| {
            (0..3).all(|i| 2 * lambdas[i] == s * lambdas[(i + 1) % 3] * lambdas[(i + 2) % 3])
        })
    }
}

/// Coefficients of the Levi-Civita connection one-forms:
/// `ω^i_0 = w_i0[i] σ^i` and `ω^i_j = w_ij[i][j] σ^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionOneForm {
    pub w_i0: [f64; 3],
    pub w_ij: [[f64; 3]; 3],
}

/// `ω^i_0 = (∂_r c_i / c0) σ^i`,
/// `ω^i_j = -ε_{ijk} (c_i² + c_j² - c_k²)/(c_i c_j) σ^k`.
pub fn connection_one_form(c: &MetricCoeffs, dc_dr: [f64; 3]) -> ConnectionOneForm {
    let cs = c.to_array();
    let c0 = c.c0();
    let mut w_ij = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let k = 3 - i - j;
            let eps = if (i + 1) % 3 == j { 1.0 } else { -1.0 };
            w_ij[i][j] = -eps * (cs[i] * cs[i] + cs[j] * cs[j] - cs[k] * cs[k]) / (cs[i] * cs[j]);
        }
    }
    ConnectionOneForm {
        w_i0: dc_dr.map(|d| d / c0),
        w_ij,
    }
}

/// Residuals of
/// `∂_r ln c_i² = ∓2 (c_j² + c_k² - c_i² - 2 c_j c_k)`.
pub fn sd_reduced_residual(c: &MetricCoeffs, dc_dr: [f64; 3], sign: SelfDualitySign) -> [f64; 3] {
    let cs = c.to_array();
    let s = sign.value() as f64;
    std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let rhs = -s * 2.0 * (cs[j] * cs[j] + cs[k] * cs[k] - cs[i] * cs[i] - 2.0 * cs[j] * cs[k]);
        2.0 * dc_dr[i] / cs[i] - rhs
    })
}

/// `Ω_i = 2 c_j c_k`.
pub fn omega_from_c(c: &MetricCoeffs) -> [f64; 3] {
    [2.0 * c.c2 * c.c3, 2.0 * c.c3 * c.c1, 2.0 * c.c1 * c.c2]
}

/// `c_i² = Ω_j Ω_k / (2 Ω_i)`, positive root.
pub fn c_from_omega(omega: [f64; 3]) -> Result<MetricCoeffs> {
    let mut c = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let sq = omega[j] * omega[k] / (2.0 * omega[i]);
        if !(sq > 0.0) || !sq.is_finite() {
            return Err(Error::NonPositiveRatio(i + 1));
        }
        c[i] = sq.sqrt();
    }
    MetricCoeffs::new(c[0], c[1], c[2])
}

/// `Ω̇_k = ∓(Ω_i Ω_j - Ω_k Ω_i - Ω_k Ω_j)`; the self-dual branch is the
/// Darboux–Halphen field.
pub fn classical_dh_omega_field<S: Scalar>(omega: &[S; 3], sign: SelfDualitySign) -> [S; 3] {
    let s = S::from_int(sign.value());
    std::array::from_fn(|k| {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let (oi, oj, ok) = (omega[i].clone(), omega[j].clone(), omega[k].clone());
        -(s.clone() * (oi.clone() * oj.clone() - ok.clone() * oi - ok * oj))
    })
}

/// `Ω̇_i = -Ω_j Ω_k + Ω_i (A_j + A_k)` and
/// `Ȧ_i = -A_j A_k + A_i (A_j + A_k)`.
pub fn coupled_field<S: Scalar>(state: &OmegaAState<S>) -> Result<([S; 3], [S; 3])> {
    let a = state.a.as_ref().ok_or(Error::MissingA)?;
    let o = &state.omega;
    let d_omega = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        -(o[j].clone() * o[k].clone()) + o[i].clone() * (a[j].clone() + a[k].clone())
    });
    let d_a = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        -(a[j].clone() * a[k].clone()) + a[i].clone() * (a[j].clone() + a[k].clone())
    });
    Ok((d_omega, d_a))
}

fn check_time(t: f64) -> Result<TauPoint> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonPositiveTime(t));
    }
    TauPoint::imaginary(t)
}

/// `(ϑ2, ϑ3, ϑ4) = (θ2(it), θ3(it), θ4(it))`, all real.
pub fn theta_nulls(t: f64) -> Result<[f64; 3]> {
    let tau = check_time(t)?;
    let mut out = [0.0; 3];
    for (slot, which) in out.iter_mut().zip([2, 3, 4]) {
        *slot = classical_theta_jet(which, tau)?.0.re;
    }
    Ok(out)
}

/// `A_i = 2 ∂_t ln θ_{i+1}(it)`.
///
/// With `τ = it`, `∂_t = i d/dτ`, so `A_i(t) = i · t_i(it)` where `t_i` is
/// the Darboux–Halphen closed form.
pub fn theta_a_solution(t: f64) -> Result<[f64; 3]> {
    let tau = check_time(t)?;
    let mut out = [0.0; 3];
    for (slot, which) in out.iter_mut().zip([2, 3, 4]) {
        let (theta, dtheta) = classical_theta_jet(which, tau)?;
        if theta.norm() < 1e-300 {
            return Err(Error::ThetaVanishes);
        }
        *slot = (2.0 * I * dtheta / theta).re;
    }
    Ok(out)
}

/// Right-hand side of
/// `∂_t Ω_1 = -Ω_2 Ω_3 + 2 Ω_1 ∂_t ln(ϑ3 ϑ4)` and cyclic; since
/// `2 ∂_t ln(ϑ3 ϑ4) = A_2 + A_3` this is the coupled system with the theta
/// solution for `A`.
pub fn omega_solution_field(omega: [f64; 3], t: f64) -> Result<[f64; 3]> {
    let a = theta_a_solution(t)?;
    Ok(coupled_field(&OmegaAState::coupled(omega, a))?.0)
}

/// `Ω̇ - field(Ω, t)`.
pub fn omega_solution_residual(omega: [f64; 3], d_omega: [f64; 3], t: f64) -> Result<[f64; 3]> {
    let f = omega_solution_field(omega, t)?;
    Ok(std::array::from_fn(|i| d_omega[i] - f[i]))
}

/// Integrates the theta-coefficient `Ω` system on `[t0, t1]`, `t0, t1 > 0`.
/// The trajectory's path parameter maps linearly onto `t`; states are stored
/// as complex numbers with zero imaginary part.
pub fn omega_theta_flow(initial: [f64; 3], t0: f64, t1: f64, tol: f64) -> Result<Trajectory<3>> {
    check_time(t0)?;
    check_time(t1)?;
    let cfg = IntegratorConfig::new(tol)?;
    integrate(
        |tau, y: &[Complex64; 3]| {
            let a = theta_a_solution(tau.re).expect("t stays between two positive endpoints");
            let a = a.map(|v| Complex64::new(v, 0.0));
            coupled_field(&OmegaAState::coupled(*y, a))
                .expect("A present")
                .0
        },
        initial.map(|v| Complex64::new(v, 0.0)),
        Complex64::new(t0, 0.0),
        Complex64::new(t1, 0.0),
        cfg,
    )
}

/// `Ω_i = 1/(t + q0) + 2 ∂_t ln ϑ_{i+1}`; Ricci-flat with
/// [`flat_conformal_factor`].
pub fn flat_family(t: f64, q0: f64) -> Result<OmegaAState> {
    if t + q0 == 0.0 {
        return Err(Error::FlatFamilyPole(-q0));
    }
    let a = theta_a_solution(t)?;
    let u = 1.0 / (t + q0);
    Ok(OmegaAState::omega_only(a.map(|ai| u + ai)))
}

/// `F = C (t + q0)² Ω1 Ω2 Ω3`.
pub fn flat_conformal_factor(t: f64, q0: f64, c: f64) -> Result<f64> {
    let o = flat_family(t, q0)?.omega;
    Ok(c * (t + q0).powi(2) * o[0] * o[1] * o[2])
}

/// Parameters of the two-parameter Tod–Hitchin family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TodHitchinParams {
    pub p: Complex64,
    pub q: Complex64,
    pub lambda: f64,
    pub q0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealityClass {
    /// `p` real and `Re q = 1/2`: real metric with `Λ < 0`.
    NegativeLambda,
    /// `q` real and `Re p = 1/2`: real metric with `Λ > 0`.
    PositiveLambda,
    Unclassified,
}

impl TodHitchinParams {
    pub fn reality_class(&self) -> RealityClass {
        const EPS: f64 = 1e-12;
        if self.p.im.abs() < EPS && (self.q.re - 0.5).abs() < EPS {
            RealityClass::NegativeLambda
        } else if self.q.im.abs() < EPS && (self.p.re - 0.5).abs() < EPS {
            RealityClass::PositiveLambda
        } else {
            RealityClass::Unclassified
        }
    }

    /// Whether the sign of `lambda` matches the reality class.
    pub fn lambda_sign_consistent(&self) -> Option<bool> {
        match self.reality_class() {
            RealityClass::NegativeLambda => Some(self.lambda < 0.0),
            RealityClass::PositiveLambda => Some(self.lambda > 0.0),
            RealityClass::Unclassified => None,
        }
    }
}

fn char_jet(p: Complex64, q: Complex64, t: f64) -> Result<crate::qseries::ThetaJet> {
    theta_char_jet(&ThetaCharacteristics::new(
        p,
        q,
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, t),
    ))
}

/// `d/dq ϑ[p, q](0, it)`: the characteristic `q` enters only through
/// `z + q`, so this is the `z`-derivative.
pub fn theta_char_dq(p: Complex64, q: Complex64, t: f64) -> Result<Complex64> {
    check_time(t)?;
    Ok(char_jet(p, q, t)?.dz)
}

/// `Ω_1 = -(i/2) ϑ3 ϑ4 · (d/dq ϑ[p, q+½]) / (e^{πip} ϑ[p, q])`.
pub fn tod_hitchin_omega1(params: &TodHitchinParams, t: f64) -> Result<Complex64> {
    let [_, th3, th4] = theta_nulls(t)?;
    let base = char_jet(params.p, params.q, t)?.value;
    if base.norm() < 1e-300 {
        return Err(Error::ThetaVanishes);
    }
    let dq = theta_char_dq(params.p, params.q + 0.5, t)?;
    Ok(-0.5 * I * th3 * th4 * dq / ((PI * I * params.p).exp() * base))
}

/// The family with `Ω2`, `Ω3` in the form they were originally printed.
///
/// Those two formulas are typographically identical in the source, so they
/// cannot both be right; [`TodHitchinOmega::source_formula_resolved`] is
/// `false` and only `Ω1` should be relied upon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TodHitchinOmega {
    pub omega: [Complex64; 3],
    pub source_formula_resolved: bool,
}

pub fn tod_hitchin_family(params: &TodHitchinParams, t: f64) -> Result<TodHitchinOmega> {
    let omega1 = tod_hitchin_omega1(params, t)?;
    let [th2, _, th4] = theta_nulls(t)?;
    let base = char_jet(params.p, params.q, t)?.value;
    let dq = theta_char_dq(params.p + 0.5, params.q + 0.5, t)?;
    let printed = 0.5 * I * th2 * th4 * dq / ((PI * I * params.p).exp() * base);
    Ok(TodHitchinOmega {
        omega: [omega1, printed, printed],
        source_formula_resolved: false,
    })
}

/// `ϑ2⁴Ω1² - ϑ3⁴Ω2² + ϑ4⁴Ω3² - (π²/4) ϑ2⁴ϑ3⁴ϑ4⁴`.
pub fn constraint_residual(omega: [Complex64; 3], t: f64) -> Result<Complex64> {
    let [a, b, c] = theta_nulls(t)?.map(|v| v.powi(4));
    Ok(
        a * omega[0] * omega[0] - b * omega[1] * omega[1] + c * omega[2] * omega[2]
            - PI * PI / 4.0 * a * b * c,
    )
}

/// `F = (2/(πΛ)) Ω1Ω2Ω3 / (d/dq ln ϑ[p,q])²`.
pub fn lambda_conformal_factor(
    omega: [Complex64; 3],
    params: &TodHitchinParams,
    t: f64,
) -> Result<Complex64> {
    if params.lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    check_time(t)?;
    let jet = char_jet(params.p, params.q, t)?;
    if jet.value.norm() < 1e-300 {
        return Err(Error::ThetaVanishes);
    }
    let dlog = jet.dz / jet.value;
    Ok(2.0 / (PI * params.lambda) * omega[0] * omega[1] * omega[2] / (dlog * dlog))
}
