//! The Darboux–Halphen vector field
//! `ṫ_i = t_i (t_j + t_k) - t_j t_k`, its integration in the upper
//! half-plane and Halphen's theta-function solution
//! `t_i = 2 (ln θ_{i+1}(τ))'`.

use std::fmt::Write as _;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::ode::{integrate, IntegratorConfig, Trajectory};
use crate::qseries::{classical_theta_jet, theta_series, PiGradedQSeries, TauPoint};
use crate::scalar::Scalar;

/// A phase point `(t1, t2, t3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DHState<S = Complex64> {
    pub t1: S,
    pub t2: S,
    pub t3: S,
}

impl<S: Clone> DHState<S> {
    pub fn new(t1: S, t2: S, t3: S) -> Self {
        Self { t1, t2, t3 }
    }

    pub fn from_array([t1, t2, t3]: [S; 3]) -> Self {
        Self { t1, t2, t3 }
    }

    pub fn to_array(&self) -> [S; 3] {
        [self.t1.clone(), self.t2.clone(), self.t3.clone()]
    }

    /// Reorders the components: slot `i` of the result is component `perm[i]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let a = self.to_array();
        Self::from_array(perm.map(|i| a[i].clone()))
    }
}

impl DHState<Complex64> {
    pub fn is_finite(&self) -> bool {
        self.to_array()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// `(t1(t2+t3) - t2t3, t2(t1+t3) - t1t3, t3(t1+t2) - t1t2)`.
pub fn dh_vector_field<S: Scalar>(s: &DHState<S>) -> [S; 3] {
    let DHState { t1, t2, t3 } = s;
    [
        t1.clone() * (t2.clone() + t3.clone()) - t2.clone() * t3.clone(),
        t2.clone() * (t1.clone() + t3.clone()) - t1.clone() * t3.clone(),
        t3.clone() * (t1.clone() + t2.clone()) - t1.clone() * t2.clone(),
    ]
}

/// Residual of the orthogonality condition
/// `t3(ṫ1+ṫ2) = t2(ṫ1+ṫ3) = t1(ṫ2+ṫ3)` evaluated on the Darboux–Halphen
/// field.
#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxResidual<S> {
    /// `t3(ṫ1+ṫ2) - t2(ṫ1+ṫ3)`.
    pub first: S,
    /// `t2(ṫ1+ṫ3) - t1(ṫ2+ṫ3)`.
    pub second: S,
    /// `t2(ṫ1+ṫ3)`, which equals `2 t1 t2 t3`.
    pub common: S,
}

pub fn darboux_condition_residual<S: Scalar>(s: &DHState<S>) -> DarbouxResidual<S> {
    let [d1, d2, d3] = dh_vector_field(s);
    let a = s.t3.clone() * (d1.clone() + d2.clone());
    let b = s.t2.clone() * (d1 + d3.clone());
    let c = s.t1.clone() * (d2 + d3);
    DarbouxResidual {
        first: a - b.clone(),
        second: b.clone() - c,
        common: b,
    }
}

pub type DHTrajectory = Trajectory<3>;

/// Integrates the system from `initial` at `tau0` to `tau1`.
pub fn dh_integrate(
    initial: &DHState,
    tau0: TauPoint,
    tau1: TauPoint,
    tol: f64,
) -> Result<DHTrajectory> {
    let cfg = IntegratorConfig::new(tol)?;
    integrate(
        |_, y: &[Complex64; 3]| dh_vector_field(&DHState::from_array(*y)),
        initial.to_array(),
        tau0.value(),
        tau1.value(),
        cfg,
    )
}

/// CSV export: `tau_re,tau_im,t1_re,t1_im,t2_re,t2_im,t3_re,t3_im,err_est`.
pub fn trajectory_csv(traj: &DHTrajectory) -> String {
    let mut out = String::from("tau_re,tau_im,t1_re,t1_im,t2_re,t2_im,t3_re,t3_im,err_est\n");
    for p in traj.points() {
        let _ = write!(out, "{:e},{:e}", p.tau.re, p.tau.im);
        for z in &p.state {
            let _ = write!(out, ",{:e},{:e}", z.re, z.im);
        }
        let _ = writeln!(out, ",{:e}", p.err_est);
    }
    out
}

/// Halphen's solution at `τ`, computed as `2 θ'(τ)/θ(τ)` from term-wise
/// differentiated theta sums.
pub fn dh_theta_solution(tau: TauPoint) -> Result<DHState> {
    let mut t = [Complex64::new(0.0, 0.0); 3];
    for (slot, which) in t.iter_mut().zip([2, 3, 4]) {
        let (theta, dtheta) = classical_theta_jet(which, tau)?;
        if theta.norm() < 1e-300 {
            return Err(Error::ThetaVanishes);
        }
        *slot = 2.0 * dtheta / theta;
    }
    Ok(DHState::from_array(t))
}

/// Normalized closed form `T_i = t_i / (πi)` as exact `w`-series through
/// `w^order`.
///
/// With `d/dτ = (πi/4) w d/dw` one gets `T_i = (1/2) w∂_w ln θ_{i+1}
/// = 4 q∂_q ln θ_{i+1}`; `t_i` itself is `T_i` with grading 1.
pub fn dh_theta_solution_series(order: u32) -> Result<[PiGradedQSeries; 3]> {
    let four = BigRational::from_integer(4.into());
    // θ2 = 2w(1 + ...) loses one order when the w factor is split off
    let thetas = [
        theta_series(2, order + 1)?,
        theta_series(3, order)?,
        theta_series(4, order)?,
    ];
    let mut out = Vec::with_capacity(3);
    for th in &thetas {
        out.push(th.log_derivative()?.scale(&four).truncate(order));
    }
    Ok(out.try_into().expect("three series"))
}

/// `(1/4) w∂_w T_i - [T_i (T_j + T_k) - T_j T_k]` for each `i`; identically
/// zero on the closed form.
pub fn normalized_dh_series_residual(t: &[PiGradedQSeries; 3]) -> Result<[PiGradedQSeries; 3]> {
    let two = BigRational::one() + BigRational::one();
    let mut out = Vec::with_capacity(3);
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let field = t[i].mul(&t[j].add(&t[k])?).sub(&t[j].mul(&t[k]))?;
        // (1/4) w∂_w = 2 q∂_q
        out.push(t[i].theta_q().scale(&two).sub(&field)?);
    }
    Ok(out.try_into().expect("three series"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::{eisenstein_series, SeriesVar};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn st(a: f64, b: f64, d: f64) -> DHState {
        DHState::new(c(a, 0.0), c(b, 0.0), c(d, 0.0))
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn tau(re: f64, im: f64) -> TauPoint {
        TauPoint::new(c(re, im)).unwrap()
    }

    #[test]
    fn vector_field_examples() {
        let z = dh_vector_field(&st(0.0, 0.0, 0.0));
        assert!(z.iter().all(|v| v.norm() == 0.0));
        assert_eq!(dh_vector_field(&st(1.0, 1.0, 1.0)), [c(1.0, 0.0); 3]);
        let v = dh_vector_field(&DHState::new(rat(1), rat(2), rat(3)));
        assert_eq!(v, [rat(-1), rat(5), rat(7)]);
    }

    #[test]
    fn vector_field_permutation_equivariance() {
        let s = DHState::new(c(0.3, 1.0), c(-1.2, 0.4), c(2.0, -0.7));
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let f = dh_vector_field(&s);
        for p in perms {
            let fp = dh_vector_field(&s.permuted(p));
            for i in 0..3 {
                assert!((fp[i] - f[p[i]]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn darboux_residual_examples() {
        let r = darboux_condition_residual(&DHState::new(rat(1), rat(2), rat(3)));
        assert_eq!((r.first, r.second, r.common), (rat(0), rat(0), rat(12)));
        let r = darboux_condition_residual(&DHState::new(rat(0), rat(0), rat(0)));
        assert_eq!((r.first, r.second, r.common), (rat(0), rat(0), rat(0)));
        let r = darboux_condition_residual(&DHState::new(rat(1), rat(1), rat(0)));
        assert_eq!((r.first, r.second, r.common), (rat(0), rat(0), rat(0)));
    }

    #[test]
    fn integrate_fixed_point() {
        let traj = dh_integrate(&st(0.0, 0.0, 0.0), tau(0.0, 1.0), tau(0.5, 2.0), 1e-8).unwrap();
        assert!(traj
            .points()
            .iter()
            .all(|p| p.state.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn integrate_short_step_matches_taylor() {
        let s0 = st(1.0, 2.0, 3.0);
        let h = 0.01;
        let traj = dh_integrate(&s0, tau(0.0, 1.0), tau(h, 1.0), 1e-12).unwrap();
        let end = traj.last().state;
        let first = [-1.0, 5.0, 7.0];
        // second derivative by hand: (-22, 28, 30)
        let second = [-22.0, 28.0, 30.0];
        let init = [1.0, 2.0, 3.0];
        for i in 0..3 {
            let taylor1 = init[i] + h * first[i];
            assert!((end[i] - taylor1).norm() < 2e-3);
            let taylor2 = taylor1 + 0.5 * h * h * second[i];
            assert!((end[i] - taylor2).norm() < 1e-4);
        }
    }

    #[test]
    fn integrator_reproduces_closed_form() {
        let start = dh_theta_solution(tau(0.0, 1.2)).unwrap();
        let traj = dh_integrate(&start, tau(0.0, 1.2), tau(0.0, 2.0), 1e-10).unwrap();
        let target = dh_theta_solution(tau(0.0, 2.0)).unwrap().to_array();
        for i in 0..3 {
            assert!((traj.last().state[i] - target[i]).norm() < 1e-8);
        }
    }

    #[test]
    fn difference_law_on_dense_output() {
        let start = dh_theta_solution(tau(0.1, 1.0)).unwrap();
        let tol = 1e-10;
        let traj = dh_integrate(&start, tau(0.1, 1.0), tau(0.4, 1.6), tol).unwrap();
        let dir = traj.direction();
        let h = 1e-4;
        for p in traj.points() {
            let s = p.s.clamp(h, 1.0 - h);
            let (a, b) = (traj.state_at(s + h), traj.state_at(s - h));
            let d12 = ((a[0] - a[1]) - (b[0] - b[1])) / (2.0 * h) / dir;
            let y = traj.state_at(s);
            let law = 2.0 * y[2] * (y[0] - y[1]);
            assert!(
                (d12 - law).norm() < 10.0 * tol * (1.0 + law.norm()) + 1e-8,
                "s={s}"
            );
        }
    }

    #[test]
    fn theta_solution_satisfies_ode() {
        let h = 1e-5;
        for t in [tau(0.0, 0.8), tau(0.0, 1.0), tau(0.0, 1.5), tau(0.2, 1.1)] {
            let s = dh_theta_solution(t).unwrap();
            let f = dh_vector_field(&s);
            let up = dh_theta_solution(tau(t.value().re, t.value().im + h))
                .unwrap()
                .to_array();
            let dn = dh_theta_solution(tau(t.value().re, t.value().im - h))
                .unwrap()
                .to_array();
            for i in 0..3 {
                // d/dτ = -i d/d(Im τ)
                let fd = (up[i] - dn[i]) / (2.0 * h) / c(0.0, 1.0);
                assert!((fd - f[i]).norm() < 1e-6, "{t:?} i={i}");
            }
        }
    }

    #[test]
    fn theta_solution_sum_matches_e2() {
        let t = tau(0.0, 1.0);
        let s = dh_theta_solution(t).unwrap();
        let e2 = eisenstein_series(2, 60).unwrap().eval(t);
        let sum = s.t1 + s.t2 + s.t3;
        assert!((sum - c(0.0, PI / 2.0) * e2).norm() < 1e-10);
    }

    #[test]
    fn theta_solution_leading_terms_far_up() {
        let t = tau(0.0, 6.0);
        let s = dh_theta_solution(t).unwrap();
        let w4 = (c(0.0, PI) * t.value()).exp(); // w^4 = q^{1/2}
        let pii = c(0.0, PI);
        assert!((s.t1 - pii * 0.5).norm() < 1e-6);
        assert!((s.t2 - pii * 4.0 * w4).norm() < 1e-6);
        assert!((s.t3 + pii * 4.0 * w4).norm() < 1e-6);
    }

    #[test]
    fn normalized_series_leading_coefficients() {
        let [t1, t2, t3] = dh_theta_solution_series(24).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(t1.coeff(0), Some(half.clone()));
        assert_eq!(t1.coeff(8), Some(rat(4)));
        assert_eq!(t1.coeff(16), Some(rat(-4)));
        assert_eq!(t2.coeff(4), Some(rat(4)));
        assert_eq!(t3.coeff(4), Some(rat(-4)));
        assert_eq!(t2.coeff(0), Some(rat(0)));
        let sum = t1.add(&t2).unwrap().add(&t3).unwrap();
        assert_eq!(sum.coeff(0), Some(half.clone()));
        assert_eq!(sum.coeff(8), Some(rat(-12)));
        let e2_half = eisenstein_series(2, 3).unwrap().scale(&half);
        assert_eq!(sum, e2_half);
        assert_eq!(sum.var(), SeriesVar::W);
    }

    #[test]
    fn normalized_series_identity_holds() {
        let t = dh_theta_solution_series(64).unwrap();
        for r in normalized_dh_series_residual(&t).unwrap() {
            assert!(r.is_zero(), "{r}");
            assert_eq!(r.trunc_order(), 64);
        }
    }

    /// The (1/4) scale is tied to d/dτ = (πi/4) w∂_w: the numeric closed form
    /// must agree with the series reconstructed as t_i = πi T_i.
    #[test]
    fn series_reconstruction_matches_numeric_solution() {
        let t = tau(0.15, 1.3);
        let series = dh_theta_solution_series(200).unwrap();
        let numeric = dh_theta_solution(t).unwrap().to_array();
        for i in 0..3 {
            let v = series[i].clone().with_pi_power(1).eval(t);
            assert!(
                (v - numeric[i]).norm() < 1e-12,
                "i={i}: {v} vs {}",
                numeric[i]
            );
        }
    }

    #[test]
    fn csv_export_shape() {
        let start = dh_theta_solution(tau(0.0, 1.2)).unwrap();
        let traj = dh_integrate(&start, tau(0.0, 1.2), tau(0.0, 1.3), 1e-8).unwrap();
        let csv = trajectory_csv(&traj);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "tau_re,tau_im,t1_re,t1_im,t2_re,t2_im,t3_re,t3_im,err_est"
        );
        assert_eq!(lines.clone().count(), traj.points().len());
        assert!(lines.all(|l| l.split(',').count() == 9));
    }
}
