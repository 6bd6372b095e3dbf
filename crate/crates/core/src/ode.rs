//! Dormand–Prince 5(4) integration of complex systems along a straight
//! segment in the complex plane.
//!
//! The segment `τ(s) = τ0 + s (τ1 - τ0)`, `s ∈ [0, 1]`, is integrated in the
//! real parameter `s`, so the step controller never has to reason about
//! complex step sizes. Accepted steps keep their continuous extension for
//! dense output.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 5th minus embedded 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const H_MIN: f64 = 1e-14;

/// Step-control settings. `tol` is used as both the absolute and the relative
/// tolerance of the scaled local error norm.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub tol: f64,
    pub max_steps: usize,
    pub initial_step: f64,
}

impl IntegratorConfig {
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidTolerance(tol));
        }
        Ok(Self {
            tol,
            max_steps: 200_000,
            initial_step: 1e-3,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint<const N: usize> {
    /// Path parameter in `[0, 1]`.
    pub s: f64,
    pub tau: Complex64,
    pub state: [Complex64; N],
    /// Max-abs local error estimate of the step that produced this point.
    pub err_est: f64,
}

#[derive(Debug, Clone)]
struct DenseSegment<const N: usize> {
    s0: f64,
    h: f64,
    cont: [[Complex64; N]; 5],
}

/// Accepted steps of an integration, ordered by increasing path parameter.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    tau0: Complex64,
    tau1: Complex64,
    points: Vec<TrajectoryPoint<N>>,
    segments: Vec<DenseSegment<N>>,
}

impl<const N: usize> Trajectory<N> {
    pub fn points(&self) -> &[TrajectoryPoint<N>] {
        &self.points
    }

    pub fn first(&self) -> &TrajectoryPoint<N> {
        &self.points[0]
    }

    pub fn last(&self) -> &TrajectoryPoint<N> {
        self.points.last().expect("trajectory has an initial point")
    }

    pub fn tau_at(&self, s: f64) -> Complex64 {
        self.tau0 + s * (self.tau1 - self.tau0)
    }

    /// `dτ/ds` along the segment.
    pub fn direction(&self) -> Complex64 {
        self.tau1 - self.tau0
    }

    /// Dense-output state at path parameter `s ∈ [0, 1]`.
    pub fn state_at(&self, s: f64) -> [Complex64; N] {
        let s = s.clamp(0.0, 1.0);
        let Some(seg) = self.segment_for(s) else {
            return self.points[0].state;
        };
        let th = (s - seg.s0) / seg.h;
        let th1 = 1.0 - th;
        let c = &seg.cont;
        std::array::from_fn(|i| {
            c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])))
        })
    }

    fn segment_for(&self, s: f64) -> Option<&DenseSegment<N>> {
        if self.segments.is_empty() {
            return None;
        }
        let idx = self.segments.partition_point(|seg| seg.s0 + seg.h < s);
        Some(&self.segments[idx.min(self.segments.len() - 1)])
    }
}

fn all_finite<const N: usize>(y: &[Complex64; N]) -> bool {
    y.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn axpy<const N: usize>(y: &[Complex64; N], terms: &[(f64, &[Complex64; N])]) -> [Complex64; N] {
    std::array::from_fn(|i| {
        let mut acc = y[i];
        for (a, k) in terms {
            if *a != 0.0 {
                acc += *a * k[i];
            }
        }
        acc
    })
}

/// Integrates `dy/dτ = f(τ, y)` from `τ0` to `τ1` along the straight segment.
///
/// Blow-up shows up as the step size collapsing; it is returned as
/// [`Error::StepSizeUnderflow`] rather than being clipped.
pub fn integrate<const N: usize, F>(
    f: F,
    y0: [Complex64; N],
    tau0: Complex64,
    tau1: Complex64,
    config: IntegratorConfig,
) -> Result<Trajectory<N>>
where
    F: Fn(Complex64, &[Complex64; N]) -> [Complex64; N],
{
    if !all_finite(&y0) {
        return Err(Error::NonFiniteState { s: 0.0 });
    }
    let delta = tau1 - tau0;
    let mut traj = Trajectory {
        tau0,
        tau1,
        points: vec![TrajectoryPoint {
            s: 0.0,
            tau: tau0,
            state: y0,
            err_est: 0.0,
        }],
        segments: Vec::new(),
    };
    if delta.norm() == 0.0 {
        return Ok(traj);
    }

    let rhs = |s: f64, y: &[Complex64; N]| -> [Complex64; N] {
        let d = f(tau0 + s * delta, y);
        std::array::from_fn(|i| d[i] * delta)
    };

    let tol = config.tol;
    let mut s = 0.0f64;
    let mut y = y0;
    let mut k1 = rhs(s, &y);
    let mut h = config.initial_step.min(1.0);
    let mut fac_old = 1e-4f64;
    let mut last_rejected = false;
    let expo = 0.2 - BETA * 0.75;

    for _ in 0..config.max_steps {
        if s >= 1.0 {
            return Ok(traj);
        }
        if h < H_MIN {
            return Err(Error::StepSizeUnderflow { s, h });
        }
        let h_step = h.min(1.0 - s);

        let k2 = rhs(s + C[1] * h_step, &axpy(&y, &[(h_step * A[0][0], &k1)]));
        let k3 = rhs(
            s + C[2] * h_step,
            &axpy(&y, &[(h_step * A[1][0], &k1), (h_step * A[1][1], &k2)]),
        );
        let k4 = rhs(
            s + C[3] * h_step,
            &axpy(
                &y,
                &[
                    (h_step * A[2][0], &k1),
                    (h_step * A[2][1], &k2),
                    (h_step * A[2][2], &k3),
                ],
            ),
        );
        let k5 = rhs(
            s + C[4] * h_step,
            &axpy(
                &y,
                &[
                    (h_step * A[3][0], &k1),
                    (h_step * A[3][1], &k2),
                    (h_step * A[3][2], &k3),
                    (h_step * A[3][3], &k4),
                ],
            ),
        );
        let k6 = rhs(
            s + C[5] * h_step,
            &axpy(
                &y,
                &[
                    (h_step * A[4][0], &k1),
                    (h_step * A[4][1], &k2),
                    (h_step * A[4][2], &k3),
                    (h_step * A[4][3], &k4),
                    (h_step * A[4][4], &k5),
                ],
            ),
        );
        let y_new = axpy(
            &y,
            &[
                (h_step * A[5][0], &k1),
                (h_step * A[5][2], &k3),
                (h_step * A[5][3], &k4),
                (h_step * A[5][4], &k5),
                (h_step * A[5][5], &k6),
            ],
        );
        let k7 = rhs(s + h_step, &y_new);
        let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];

        let finite = all_finite(&y_new) && all_finite(&k7);
        let mut err_sq = 0.0;
        let mut err_max = 0.0f64;
        if finite {
            for i in 0..N {
                let mut e = Complex64::new(0.0, 0.0);
                for (w, k) in E.iter().zip(ks.iter()) {
                    e += *w * k[i];
                }
                let e = (h_step * e).norm();
                err_max = err_max.max(e);
                let sc = tol + tol * y[i].norm().max(y_new[i].norm());
                err_sq += (e / sc).powi(2);
            }
        }
        let err = if finite {
            (err_sq / N.max(1) as f64).sqrt()
        } else {
            f64::INFINITY
        };

        if !err.is_finite() {
            h = h_step * 0.1;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(expo);
        if err <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h_step / fac;
            if last_rejected {
                h_new = h_new.min(h_step);
            }
            fac_old = err.max(1e-4);

            let ydiff: [Complex64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [Complex64; N] = std::array::from_fn(|i| h_step * k1[i] - ydiff[i]);
            let c3: [Complex64; N] = std::array::from_fn(|i| ydiff[i] - h_step * k7[i] - bspl[i]);
            let c4: [Complex64; N] = std::array::from_fn(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (d, k) in D.iter().zip(ks.iter()) {
                    acc += *d * k[i];
                }
                h_step * acc
            });
            traj.segments.push(DenseSegment {
                s0: s,
                h: h_step,
                cont: [y, ydiff, bspl, c3, c4],
            });

            s = if 1.0 - (s + h_step) < 1e-15 {
                1.0
            } else {
                s + h_step
            };
            y = y_new;
            k1 = k7;
            traj.points.push(TrajectoryPoint {
                s,
                tau: tau0 + s * delta,
                state: y,
                err_est: err_max,
            });
            h = h_new;
            last_rejected = false;
        } else {
            h = h_step / (1.0 / FAC_MIN).min(fac11 / SAFETY);
            last_rejected = true;
        }
    }
    if s >= 1.0 {
        Ok(traj)
    } else {
        Err(Error::TooManySteps(config.max_steps))
    }
}
