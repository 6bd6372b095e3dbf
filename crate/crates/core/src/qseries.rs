//! Truncated q-series with exact rational coefficients, plus double-precision
//! evaluation of theta functions and Eisenstein series.
//!
//! Exact series live in the variable `w = q^{1/8}` (so that the exponents of
//! all three Jacobi thetas are integral) or directly in `q`; mixing the two
//! converts the `q`-series through `q = w^8`. A series also carries an integer
//! grading `k` meaning it stands for `(πi)^k · Σ c_n w^n`, so identities that
//! involve powers of `πi` can be checked as pure rational identities.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound required of evaluation tails.
pub const DEFAULT_TAIL_TOL: f64 = 1e-15;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Expansion variable of a [`PiGradedQSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SeriesVar {
    /// `w = q^{1/8}`.
    #[default]
    W,
    /// `q = e^{2πiτ}`.
    Q,
}

impl SeriesVar {
    /// Number of `w`-units in one unit of this variable.
    fn w_units(self) -> u32 {
        match self {
            SeriesVar::W => 1,
            SeriesVar::Q => 8,
        }
    }
}

/// Truncated series `(πi)^pi_power · Σ_{n ≤ trunc_order} c_n x^n` with
/// `x` either `w` or `q`.
///
/// Coefficients above `trunc_order` are unknown rather than zero. Zero
/// coefficients are never stored.
#[derive(Debug, Clone)]
pub struct PiGradedQSeries {
    coeffs: BTreeMap<u32, BigRational>,
    pi_power: i32,
    trunc_order: u32,
    var: SeriesVar,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl PiGradedQSeries {
    pub fn zero(var: SeriesVar, trunc_order: u32) -> Self {
        Self {
            coeffs: BTreeMap::new(),
            pi_power: 0,
            trunc_order,
            var,
        }
    }

    pub fn one(var: SeriesVar, trunc_order: u32) -> Self {
        Self::constant(var, trunc_order, BigRational::one())
    }

    pub fn constant(var: SeriesVar, trunc_order: u32, c: BigRational) -> Self {
        Self::from_terms(var, 0, trunc_order, [(0, c)])
    }

    /// Builds a series from `(exponent, coefficient)` pairs. Terms above the
    /// truncation order are discarded and repeated exponents are summed.
    pub fn from_terms<T>(var: SeriesVar, pi_power: i32, trunc_order: u32, terms: T) -> Self
    where
        T: IntoIterator<Item = (u32, BigRational)>,
    {
        let mut s = Self::zero(var, trunc_order);
        s.pi_power = pi_power;
        for (n, c) in terms {
            if n <= trunc_order {
                s.add_term(n, c);
            }
        }
        s
    }

    /// Integer-coefficient convenience constructor.
    pub fn from_int_terms(var: SeriesVar, trunc_order: u32, terms: &[(u32, i64)]) -> Self {
        Self::from_terms(var, 0, trunc_order, terms.iter().map(|&(n, c)| (n, rat(c))))
    }

    fn add_term(&mut self, n: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(n).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    pub fn pi_power(&self) -> i32 {
        self.pi_power
    }

    pub fn trunc_order(&self) -> u32 {
        self.trunc_order
    }

    pub fn var(&self) -> SeriesVar {
        self.var
    }

    /// Coefficient of `x^n`, or `None` beyond the truncation order.
    pub fn coeff(&self, n: u32) -> Option<BigRational> {
        if n > self.trunc_order {
            return None;
        }
        Some(
            self.coeffs
                .get(&n)
                .cloned()
                .unwrap_or_else(BigRational::zero),
        )
    }

    /// Nonzero terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.coeffs.iter().map(|(&n, c)| (n, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// True when every known coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn with_pi_power(mut self, pi_power: i32) -> Self {
        self.pi_power = pi_power;
        self
    }

    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.trunc_order);
        Self {
            coeffs: self
                .coeffs
                .range(..=order)
                .map(|(&n, c)| (n, c.clone()))
                .collect(),
            pi_power: self.pi_power,
            trunc_order: order,
            var: self.var,
        }
    }

    /// Re-expresses the series in `w`. A `q`-series known through `q^N` is
    /// known through `w^{8N+7}`, since no exponents strictly between
    /// multiples of eight can occur.
    pub fn to_w(&self) -> Self {
        match self.var {
            SeriesVar::W => self.clone(),
            SeriesVar::Q => Self {
                coeffs: self
                    .coeffs
                    .iter()
                    .map(|(&n, c)| (8 * n, c.clone()))
                    .collect(),
                pi_power: self.pi_power,
                trunc_order: 8 * self.trunc_order + 7,
                var: SeriesVar::W,
            },
        }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        if self.var == other.var {
            (self.clone(), other.clone())
        } else {
            (self.to_w(), other.to_w())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.pi_power != other.pi_power {
            return Err(Error::GradingMismatch {
                left: self.pi_power,
                right: other.pi_power,
            });
        }
        let (a, b) = self.aligned(other);
        let trunc = a.trunc_order.min(b.trunc_order);
        let mut out = a.truncate(trunc);
        for (n, c) in b.coeffs.range(..=trunc) {
            out.add_term(*n, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self {
                coeffs: BTreeMap::new(),
                ..self.clone()
            };
        }
        Self {
            coeffs: self.coeffs.iter().map(|(&n, v)| (n, v * c)).collect(),
            ..self.clone()
        }
    }

    /// Product; gradings add.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let trunc = a.trunc_order.min(b.trunc_order);
        let mut acc: BTreeMap<u32, BigRational> = BTreeMap::new();
        for (&n, x) in a.coeffs.range(..=trunc) {
            for (&m, y) in b.coeffs.range(..=trunc - n) {
                let e = acc.entry(n + m).or_insert_with(BigRational::zero);
                *e += x * y;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Self {
            coeffs: acc,
            pi_power: a.pi_power + b.pi_power,
            trunc_order: trunc,
            var: a.var,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.var, self.trunc_order).with_pi_power(0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// The operator `q d/dq`. On a `w`-series this is `(1/8) w d/dw`.
    pub fn theta_q(&self) -> Self {
        let denom = rat(8 / self.var.w_units() as i64);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(&n, _)| n != 0)
            .map(|(&n, c)| (n, c * rat(n as i64) / &denom))
            .collect();
        Self {
            coeffs,
            ..self.clone()
        }
    }

    fn dense(&self) -> Vec<BigRational> {
        (0..=self.trunc_order)
            .map(|n| {
                self.coeffs
                    .get(&n)
                    .cloned()
                    .unwrap_or_else(BigRational::zero)
            })
            .collect()
    }

    fn from_dense(var: SeriesVar, pi_power: i32, dense: Vec<BigRational>) -> Self {
        let trunc = dense.len().saturating_sub(1) as u32;
        Self::from_terms(
            var,
            pi_power,
            trunc,
            dense.into_iter().enumerate().map(|(n, c)| (n as u32, c)),
        )
    }

    /// Multiplicative inverse of a series with nonzero constant term; the
    /// grading is negated.
    pub fn inverse(&self) -> Result<Self> {
        let a = self.dense();
        if a[0].is_zero() {
            return Err(Error::NotInvertible);
        }
        let a0_inv = a[0].recip();
        let mut b: Vec<BigRational> = Vec::with_capacity(a.len());
        b.push(a0_inv.clone());
        for n in 1..a.len() {
            let mut acc = BigRational::zero();
            for k in 1..=n {
                if !a[k].is_zero() && !b[n - k].is_zero() {
                    acc += &a[k] * &b[n - k];
                }
            }
            b.push(-acc * &a0_inv);
        }
        Ok(Self::from_dense(self.var, -self.pi_power, b))
    }

    /// Factors the series as `(πi)^k · c · x^m · u` with `u(0) = 1` and
    /// returns `m`, `c` and the formal logarithm of `u`.
    ///
    /// Since `u` is only known through `x^{N-m}`, the logarithm carries
    /// truncation order `N - m`.
    pub fn log_unit(&self) -> Result<LogUnit> {
        let (&m, c) = self.coeffs.iter().next().ok_or(Error::LogOfZero)?;
        let c = c.clone();
        let c_inv = c.recip();
        let len = (self.trunc_order - m) as usize + 1;
        let u: Vec<BigRational> = (0..len as u32)
            .map(|n| {
                self.coeffs
                    .get(&(n + m))
                    .map(|v| v * &c_inv)
                    .unwrap_or_else(BigRational::zero)
            })
            .collect();
        // From u · (x L') = x u' with u_0 = 1:
        //   n L_n = n u_n - Σ_{k=1}^{n-1} k L_k u_{n-k}
        let mut log = vec![BigRational::zero(); len];
        for n in 1..len {
            let mut acc = rat(n as i64) * &u[n];
            for k in 1..n {
                if !log[k].is_zero() && !u[n - k].is_zero() {
                    acc -= rat(k as i64) * &log[k] * &u[n - k];
                }
            }
            log[n] = acc / rat(n as i64);
        }
        Ok(LogUnit {
            shift: m,
            leading: c,
            pi_power: self.pi_power,
            log: Self::from_dense(self.var, 0, log),
        })
    }

    /// `q d/dq log(self)`, exact; the grading prefactor is a constant and
    /// drops out.
    pub fn log_derivative(&self) -> Result<Self> {
        let lu = self.log_unit()?;
        let shift = rat(lu.shift as i64) * rat(self.var.w_units() as i64) / rat(8);
        let mut d = lu.log.theta_q();
        d.add_term(0, shift);
        Ok(d)
    }

    /// Evaluates `(πi)^k Σ c_n x^n` at `τ`.
    pub fn eval(&self, tau: TauPoint) -> Complex64 {
        let tau = tau.value();
        let step = PI * self.var.w_units() as f64 / 4.0;
        let mut acc = Complex64::zero();
        for (&n, c) in &self.coeffs {
            let c = c.to_f64().unwrap_or(f64::NAN);
            acc += c * (I * tau * (step * n as f64)).exp();
        }
        acc * (I * PI).powi(self.pi_power)
    }

    /// Geometric estimate of the omitted tail at `τ`:
    /// `π^k · M · r^{N+1} / (1 - r)` with `r = |x(τ)|` and `M` the largest
    /// stored coefficient magnitude. It is a strict bound whenever the
    /// unknown coefficients do not exceed `M` in magnitude (true for the
    /// theta series, whose coefficients are all ±2); for Eisenstein series
    /// it is an estimate.
    pub fn tail_bound(&self, tau: TauPoint) -> f64 {
        let r = (-PI * self.var.w_units() as f64 * tau.value().im / 4.0).exp();
        let m = self
            .coeffs
            .values()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        PI.powi(self.pi_power) * m * r.powi(self.trunc_order as i32 + 1) / (1.0 - r)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SeriesJson::from(self)).expect("series json")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: SeriesJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        j.try_into()
    }
}

/// Two series are equal when their gradings match and every coefficient up
/// to the common truncation order agrees.
impl PartialEq for PiGradedQSeries {
    fn eq(&self, other: &Self) -> bool {
        if self.pi_power != other.pi_power {
            return false;
        }
        let (a, b) = self.aligned(other);
        let trunc = a.trunc_order.min(b.trunc_order);
        a.coeffs.range(..=trunc).eq(b.coeffs.range(..=trunc))
    }
}

impl fmt::Display for PiGradedQSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = match self.var {
            SeriesVar::W => "w",
            SeriesVar::Q => "q",
        };
        if self.pi_power != 0 {
            write!(f, "(πi)^{} · (", self.pi_power)?;
        }
        for (i, (n, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match n {
                0 => write!(f, "{c}")?,
                _ => write!(f, "{c}·{x}^{n}")?,
            }
        }
        write!(f, " + O({x}^{})", self.trunc_order + 1)?;
        if self.pi_power != 0 {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Result of [`PiGradedQSeries::log_unit`].
#[derive(Debug, Clone, PartialEq)]
pub struct LogUnit {
    pub shift: u32,
    pub leading: BigRational,
    pub pi_power: i32,
    pub log: PiGradedQSeries,
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    pi_power: i32,
    trunc_order: u32,
    #[serde(default)]
    var: SeriesVar,
    terms: Vec<(u32, String)>,
}

impl From<&PiGradedQSeries> for SeriesJson {
    fn from(s: &PiGradedQSeries) -> Self {
        SeriesJson {
            pi_power: s.pi_power,
            trunc_order: s.trunc_order,
            var: s.var,
            terms: s
                .coeffs
                .iter()
                .map(|(&n, c)| (n, format!("{}/{}", c.numer(), c.denom())))
                .collect(),
        }
    }
}

impl TryFrom<SeriesJson> for PiGradedQSeries {
    type Error = Error;

    fn try_from(j: SeriesJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for (n, s) in j.terms {
            let c: BigRational = s
                .parse()
                .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
            terms.push((n, c));
        }
        Ok(Self::from_terms(j.var, j.pi_power, j.trunc_order, terms))
    }
}

/// A point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauPoint(Complex64);

impl TauPoint {
    pub fn new(value: Complex64) -> Result<Self> {
        if value.im > 0.0 && value.re.is_finite() && value.im.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::NotInUpperHalfPlane(value))
        }
    }

    /// Purely imaginary point `i·t`.
    pub fn imaginary(t: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, t))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    /// `q = e^{2πiτ}`.
    pub fn nome(self) -> Complex64 {
        (2.0 * PI * I * self.0).exp()
    }
}

/// Exact expansion of `θ_2`, `θ_3` or `θ_4` in `w`, through `w^order`.
pub fn theta_series(which: u32, order: u32) -> Result<PiGradedQSeries> {
    let mut terms = Vec::new();
    match which {
        2 => {
            // n and -n-1 contribute the same exponent (2n+1)^2
            for n in 0u64.. {
                let e = (2 * n + 1) * (2 * n + 1);
                if e > order as u64 {
                    break;
                }
                terms.push((e as u32, 2));
            }
        }
        3 | 4 => {
            terms.push((0, 1));
            for n in 1u64.. {
                let e = 4 * n * n;
                if e > order as u64 {
                    break;
                }
                let sign = if which == 4 && n % 2 == 1 { -1 } else { 1 };
                terms.push((e as u32, 2 * sign));
            }
        }
        other => return Err(Error::InvalidThetaIndex(other)),
    }
    Ok(PiGradedQSeries::from_int_terms(SeriesVar::W, order, &terms))
}

/// `σ_k(n) = Σ_{d | n} d^k`.
pub fn divisor_sigma(k: u32, n: u64) -> BigInt {
    let mut acc = BigInt::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            acc += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                acc += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    acc
}

fn eisenstein_normalizer(k: u32) -> Result<i64> {
    match k {
        2 => Ok(-24),
        4 => Ok(240),
        6 => Ok(-504),
        other => Err(Error::InvalidWeight(other)),
    }
}

/// Exact `q`-expansion of `E_k`, `k ∈ {2, 4, 6}`, through `q^order`.
pub fn eisenstein_series(k: u32, order: u32) -> Result<PiGradedQSeries> {
    let b = BigInt::from(eisenstein_normalizer(k)?);
    let terms = std::iter::once((0, BigRational::one())).chain((1..=order).map(|n| {
        (
            n,
            BigRational::from_integer(&b * divisor_sigma(k - 1, n as u64)),
        )
    }));
    Ok(PiGradedQSeries::from_terms(SeriesVar::Q, 0, order, terms))
}

/// Numeric values `E_k(τ), E_k'(τ), E_k''(τ), E_k'''(τ)` with `' = d/dτ`, by
/// term-wise differentiation of the divisor-sum expansion.
pub fn eisenstein_jet(k: u32, tau: TauPoint) -> Result<[Complex64; 4]> {
    let b = eisenstein_normalizer(k)? as f64;
    let q = tau.nome();
    let r = q.norm();
    let mut jet = [
        Complex64::one(),
        Complex64::zero(),
        Complex64::zero(),
        Complex64::zero(),
    ];
    let mut qn = Complex64::one();
    for n in 1u64..1_000_000 {
        qn *= q;
        let sigma = divisor_sigma(k - 1, n).to_f64().unwrap_or(f64::INFINITY);
        let d = 2.0 * PI * I * n as f64;
        let mut term = b * sigma * qn;
        for slot in jet.iter_mut() {
            *slot += term;
            term *= d;
        }
        // remaining terms are dominated by the cubic-weighted one
        let bound = b.abs() * sigma * (2.0 * PI * n as f64).powi(3) * r.powi(n as i32);
        if bound < 1e-18 * (1.0 + jet[3].norm()) && n > 2 {
            break;
        }
    }
    Ok(jet)
}

/// Characteristics and argument of `ϑ[r,s](z, σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaCharacteristics {
    pub r: Complex64,
    pub s: Complex64,
    pub z: Complex64,
    pub sigma: Complex64,
}

impl ThetaCharacteristics {
    pub fn new(r: Complex64, s: Complex64, z: Complex64, sigma: Complex64) -> Self {
        Self { r, s, z, sigma }
    }

    /// `ϑ[r,s](0, τ)` for real characteristics.
    pub fn at_tau(r: f64, s: f64, tau: Complex64) -> Self {
        Self::new(r.into(), s.into(), Complex64::zero(), tau)
    }
}

/// Value and first derivatives of `ϑ[r,s](z, σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaJet {
    pub value: Complex64,
    /// `∂/∂z`, equal to `∂/∂s`.
    pub dz: Complex64,
    /// `∂/∂σ`.
    pub dsigma: Complex64,
}

/// Sums
/// `Σ_m exp{πi(m+r)²σ + 2πi(m+r)(z+s)}` together with its `z` and `σ`
/// derivatives.
///
/// The summand modulus is a Gaussian in `m` centred at
/// `m* = -(Im(rσ) + Im(z+s)) / Im σ`; the sum starts at the nearest integer
/// and extends symmetrically until the next pair of weighted terms drops
/// below `1e-20` of the central one, so the neglected tail is far below
/// double precision.
pub fn theta_char_jet(ch: &ThetaCharacteristics) -> Result<ThetaJet> {
    let sigma = ch.sigma;
    if !(sigma.im > 0.0) {
        return Err(Error::NotInUpperHalfPlane(sigma));
    }
    let zs = ch.z + ch.s;
    let centre = (-((ch.r * sigma).im + zs.im) / sigma.im).round();
    let centre = if centre.is_finite() { centre as i64 } else { 0 };

    let term = |m: i64| -> (Complex64, Complex64, Complex64, f64) {
        let x = m as f64 + ch.r;
        let e = (PI * I * x * x * sigma + 2.0 * PI * I * x * zs).exp();
        let dz = 2.0 * PI * I * x * e;
        let ds = PI * I * x * x * e;
        let weight = e.norm() * (1.0 + x.norm()).powi(2);
        (e, dz, ds, weight)
    };

    let (v0, dz0, ds0, w0) = term(centre);
    let mut jet = ThetaJet {
        value: v0,
        dz: dz0,
        dsigma: ds0,
    };
    let floor = w0.max(f64::MIN_POSITIVE) * 1e-20;
    for k in 1..1_000_000i64 {
        let (a, b) = (term(centre + k), term(centre - k));
        jet.value += a.0 + b.0;
        jet.dz += a.1 + b.1;
        jet.dsigma += a.2 + b.2;
        if a.3 < floor && b.3 < floor && k > 2 {
            break;
        }
    }
    Ok(jet)
}

pub fn theta_char_eval(ch: &ThetaCharacteristics) -> Result<Complex64> {
    theta_char_jet(ch).map(|j| j.value)
}

/// `∂/∂z ϑ[r,s](z,σ)`; the same as the derivative with respect to `s`.
pub fn theta_char_dz(ch: &ThetaCharacteristics) -> Result<Complex64> {
    theta_char_jet(ch).map(|j| j.dz)
}

/// Characteristics `(r, s)` with `θ_k(τ) = ϑ[r,s](0,τ)`.
pub fn classical_characteristics(which: u32) -> Result<(f64, f64)> {
    match which {
        2 => Ok((0.5, 0.0)),
        3 => Ok((0.0, 0.0)),
        4 => Ok((0.0, 0.5)),
        other => Err(Error::InvalidThetaIndex(other)),
    }
}

/// `θ_k(τ)` and `dθ_k/dτ` by direct summation.
pub fn classical_theta_jet(which: u32, tau: TauPoint) -> Result<(Complex64, Complex64)> {
    let (r, s) = classical_characteristics(which)?;
    let j = theta_char_jet(&ThetaCharacteristics::at_tau(r, s, tau.value()))?;
    Ok((j.value, j.dsigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(var: SeriesVar, trunc: u32, terms: &[(u32, i64)]) -> PiGradedQSeries {
        PiGradedQSeries::from_int_terms(var, trunc, terms)
    }

    fn frac(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn theta_series_low_orders() {
        assert_eq!(
            theta_series(2, 30).unwrap(),
            series(SeriesVar::W, 30, &[(1, 2), (9, 2), (25, 2)])
        );
        assert_eq!(
            theta_series(3, 20).unwrap(),
            series(SeriesVar::W, 20, &[(0, 1), (4, 2), (16, 2)])
        );
        assert_eq!(
            theta_series(4, 20).unwrap(),
            series(SeriesVar::W, 20, &[(0, 1), (4, -2), (16, 2)])
        );
        assert_eq!(theta_series(5, 3), Err(Error::InvalidThetaIndex(5)));
    }

    /// Brute-force enumeration of the defining lattice sums.
    #[test]
    fn theta_series_matches_lattice_enumeration() {
        let order = 120u32;
        for which in [2u32, 3, 4] {
            let mut expect: BTreeMap<u32, i64> = BTreeMap::new();
            for n in -20i64..=20 {
                let (e, sign) = match which {
                    2 => ((2 * n + 1) * (2 * n + 1), 1),
                    3 => (4 * n * n, 1),
                    _ => (4 * n * n, if n.rem_euclid(2) == 1 { -1 } else { 1 }),
                };
                if e as u32 <= order {
                    *expect.entry(e as u32).or_default() += sign;
                }
            }
            let terms: Vec<(u32, i64)> = expect.into_iter().collect();
            assert_eq!(
                theta_series(which, order).unwrap(),
                series(SeriesVar::W, order, &terms)
            );
        }
    }

    #[test]
    fn divisor_sigma_small_values() {
        assert_eq!(divisor_sigma(1, 1), BigInt::from(1));
        assert_eq!(divisor_sigma(1, 2), BigInt::from(3));
        assert_eq!(divisor_sigma(1, 3), BigInt::from(4));
        assert_eq!(divisor_sigma(1, 12), BigInt::from(28));
        assert_eq!(divisor_sigma(3, 2), BigInt::from(9));
        assert_eq!(divisor_sigma(5, 4), BigInt::from(1 + 32 + 1024));
    }

    #[test]
    fn eisenstein_low_orders() {
        assert_eq!(
            eisenstein_series(2, 1).unwrap(),
            series(SeriesVar::Q, 1, &[(0, 1), (1, -24)])
        );
        assert_eq!(
            eisenstein_series(2, 3).unwrap(),
            series(SeriesVar::Q, 3, &[(0, 1), (1, -24), (2, -72), (3, -96)])
        );
        assert_eq!(
            eisenstein_series(4, 2).unwrap(),
            series(SeriesVar::Q, 2, &[(0, 1), (1, 240), (2, 2160)])
        );
        assert_eq!(
            eisenstein_series(6, 2).unwrap(),
            series(SeriesVar::Q, 2, &[(0, 1), (1, -504), (2, -504 * 33)])
        );
        assert_eq!(eisenstein_series(3, 2), Err(Error::InvalidWeight(3)));
    }

    #[test]
    fn mul_difference_of_squares() {
        let a = series(SeriesVar::Q, 5, &[(0, 1), (1, 1)]);
        let b = series(SeriesVar::Q, 5, &[(0, 1), (1, -1)]);
        assert_eq!(a.mul(&b), series(SeriesVar::Q, 5, &[(0, 1), (2, -1)]));
    }

    #[test]
    fn mul_respects_min_truncation_and_grading() {
        let a = series(SeriesVar::W, 10, &[(0, 1), (3, 1)]).with_pi_power(1);
        let b = series(SeriesVar::W, 4, &[(0, 1), (3, 1)]).with_pi_power(2);
        let p = a.mul(&b);
        assert_eq!(p.trunc_order(), 4);
        assert_eq!(p.pi_power(), 3);
        assert_eq!(p.coeff(3), Some(rat(2)));
        assert_eq!(p.coeff(5), None);
    }

    #[test]
    fn add_rejects_grading_mismatch() {
        let a = series(SeriesVar::W, 4, &[(0, 1)]);
        let b = a.clone().with_pi_power(1);
        assert_eq!(a.add(&b), Err(Error::GradingMismatch { left: 0, right: 1 }));
    }

    #[test]
    fn theta_q_of_e2() {
        let e2 = eisenstein_series(2, 2).unwrap();
        assert_eq!(
            e2.theta_q(),
            series(SeriesVar::Q, 2, &[(1, -24), (2, -144)])
        );
        // the same operator on the w-form of the series
        assert_eq!(e2.to_w().theta_q(), e2.theta_q());
    }

    #[test]
    fn log_unit_of_theta2_prefix() {
        let s = series(SeriesVar::W, 20, &[(1, 2), (9, 2)]);
        let lu = s.log_unit().unwrap();
        assert_eq!(lu.shift, 1);
        assert_eq!(lu.leading, rat(2));
        let expect =
            PiGradedQSeries::from_terms(SeriesVar::W, 0, 19, [(8, rat(1)), (16, frac(-1, 2))]);
        assert_eq!(lu.log, expect);
        assert_eq!(lu.log.trunc_order(), 19);
    }

    /// Formal log oracle: log(1 + x) = Σ (-1)^{n+1} x^n / n.
    #[test]
    fn log_unit_matches_log1p_expansion() {
        let s = series(SeriesVar::W, 30, &[(0, 1), (3, 1)]);
        let log = s.log_unit().unwrap().log;
        for n in 0..=30u32 {
            let expect = if n % 3 == 0 && n > 0 {
                let k = (n / 3) as i64;
                frac(if k % 2 == 1 { 1 } else { -1 }, k)
            } else {
                rat(0)
            };
            assert_eq!(log.coeff(n), Some(expect), "n = {n}");
        }
    }

    #[test]
    fn log_of_zero_series_fails() {
        assert_eq!(
            PiGradedQSeries::zero(SeriesVar::W, 5).log_unit(),
            Err(Error::LogOfZero)
        );
    }

    #[test]
    fn inverse_times_self_is_one() {
        let s = theta_series(3, 60).unwrap();
        let inv = s.inverse().unwrap();
        assert_eq!(s.mul(&inv), PiGradedQSeries::one(SeriesVar::W, 60));
        assert_eq!(
            theta_series(2, 10).unwrap().inverse(),
            Err(Error::NotInvertible)
        );
    }

    #[test]
    fn q_and_w_series_compare_through_conversion() {
        let q = series(SeriesVar::Q, 3, &[(0, 1), (2, 5)]);
        let w = series(SeriesVar::W, 40, &[(0, 1), (16, 5)]);
        assert_eq!(q, w);
        assert_eq!(q.to_w().trunc_order(), 31);
    }

    #[test]
    fn json_round_trip_and_format() {
        let s = PiGradedQSeries::from_terms(SeriesVar::W, 1, 9, [(1, frac(1, 2)), (8, rat(-4))]);
        let v = s.to_json();
        assert_eq!(v["pi_power"], 1);
        assert_eq!(v["trunc_order"], 9);
        assert_eq!(v["terms"][0][0], 1);
        assert_eq!(v["terms"][0][1], "1/2");
        assert_eq!(v["terms"][1][1], "-4/1");
        assert_eq!(PiGradedQSeries::from_json(&v).unwrap(), s);
        // var defaults to w when absent
        let bare = serde_json::json!({"pi_power": 0, "trunc_order": 2, "terms": [[0, "1"]]});
        let parsed = PiGradedQSeries::from_json(&bare).unwrap();
        assert_eq!(parsed.var(), SeriesVar::W);
        assert_eq!(parsed.coeff(0), Some(rat(1)));
    }

    #[test]
    fn eval_constant_and_theta3_at_i() {
        let tau = TauPoint::imaginary(1.0).unwrap();
        let one = PiGradedQSeries::one(SeriesVar::W, 10);
        assert!((one.eval(tau) - 1.0).norm() < 1e-15);

        // direct summation of e^{-π n²}
        let direct: f64 = (-30i32..=30).map(|n| (-PI * (n * n) as f64).exp()).sum();
        let v = theta_series(3, 200).unwrap().eval(tau);
        assert!((v.re - direct).abs() < 1e-14 && v.im.abs() < 1e-15);
        assert!((direct - 1.086_434_811_213_308).abs() < 1e-13);
    }

    #[test]
    fn theta2_equals_theta4_at_i() {
        let tau = TauPoint::imaginary(1.0).unwrap();
        let t2 = theta_series(2, 200).unwrap().eval(tau);
        let t4 = theta_series(4, 200).unwrap().eval(tau);
        let d2: f64 = (-30i32..=30)
            .map(|n| (-PI * (n as f64 + 0.5).powi(2)).exp())
            .sum();
        let d4: f64 = (-30i32..=30)
            .map(|n| if n % 2 == 0 { 1.0 } else { -1.0 } * (-PI * (n * n) as f64).exp())
            .sum();
        assert!((d2 / d4 - 1.0).abs() < 1e-12);
        assert!((t2 / t4 - 1.0).norm() < 1e-12);
    }

    #[test]
    fn eval_rejects_lower_half_plane() {
        assert!(TauPoint::new(Complex64::new(0.3, -1.0)).is_err());
        assert!(TauPoint::new(Complex64::new(0.3, 0.0)).is_err());
    }

    #[test]
    fn truncation_convergence_within_tail_bound() {
        let tau = TauPoint::imaginary(1.0).unwrap();
        for which in [2, 3, 4] {
            let lo = theta_series(which, 100).unwrap();
            let hi = theta_series(which, 200).unwrap();
            let diff = (lo.eval(tau) - hi.eval(tau)).norm();
            assert!(diff <= lo.tail_bound(tau) + f64::EPSILON);
            assert!(lo.tail_bound(tau) < DEFAULT_TAIL_TOL);
        }
    }

    #[test]
    fn theta_char_specializations_match_series() {
        for tau in [
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(0.3, 1.1),
        ] {
            let tp = TauPoint::new(tau).unwrap();
            for which in [2, 3, 4] {
                let (r, s) = classical_characteristics(which).unwrap();
                let a = theta_char_eval(&ThetaCharacteristics::at_tau(r, s, tau)).unwrap();
                let b = theta_series(which, 400).unwrap().eval(tp);
                assert!((a - b).norm() < 1e-12, "θ{which}({tau}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn theta_char_dz_vanishes_by_symmetry() {
        let ch = ThetaCharacteristics::at_tau(0.0, 0.0, Complex64::new(0.0, 1.0));
        assert!(theta_char_dz(&ch).unwrap().norm() < 1e-15);
        let bad = ThetaCharacteristics::at_tau(0.0, 0.0, Complex64::new(0.0, -1.0));
        assert!(theta_char_eval(&bad).is_err());
    }

    #[test]
    fn theta_char_derivatives_match_finite_differences() {
        let ch = ThetaCharacteristics::new(
            Complex64::new(0.3, 0.1),
            Complex64::new(0.2, -0.05),
            Complex64::new(0.1, 0.02),
            Complex64::new(0.1, 0.9),
        );
        let jet = theta_char_jet(&ch).unwrap();
        let h = 1e-5;
        let f = |c: ThetaCharacteristics| theta_char_eval(&c).unwrap();
        let dz = (f(ThetaCharacteristics { z: ch.z + h, ..ch })
            - f(ThetaCharacteristics { z: ch.z - h, ..ch }))
            / (2.0 * h);
        let ds = (f(ThetaCharacteristics { s: ch.s + h, ..ch })
            - f(ThetaCharacteristics { s: ch.s - h, ..ch }))
            / (2.0 * h);
        let dsig = (f(ThetaCharacteristics {
            sigma: ch.sigma + h,
            ..ch
        }) - f(ThetaCharacteristics {
            sigma: ch.sigma - h,
            ..ch
        })) / (2.0 * h);
        assert!((jet.dz - dz).norm() < 1e-7);
        assert!((jet.dz - ds).norm() < 1e-7);
        assert!((jet.dsigma - dsig).norm() < 1e-7);
    }

    #[test]
    fn eisenstein_jet_matches_series_eval() {
        let tau = TauPoint::new(Complex64::new(0.1, 1.2)).unwrap();
        for k in [2, 4, 6] {
            let s = eisenstein_series(k, 40).unwrap();
            let jet = eisenstein_jet(k, tau).unwrap();
            let mut d = s.clone();
            for (order, val) in jet.iter().enumerate() {
                let expect = d.eval(tau) * (2.0 * PI * I).powi(order as i32);
                assert!(
                    (val - expect).norm() < 1e-9 * (1.0 + expect.norm()),
                    "k={k} d={order}"
                );
                d = d.theta_q();
            }
        }
    }

    #[test]
    fn jacobi_quartic_identity_exact() {
        let order = 120;
        let t2 = theta_series(2, order).unwrap().pow(4);
        let t3 = theta_series(3, order).unwrap().pow(4);
        let t4 = theta_series(4, order).unwrap().pow(4);
        assert_eq!(t3, t2.add(&t4).unwrap());
    }
}
