//! Three-dimensional Frobenius manifolds with potential
//! `F = ½(t¹)²t³ + ½t¹(t²)² + f(t², t³)`, the associativity (WDVV)
//! equation, its Chazy reduction and the cubic whose roots are the
//! Darboux–Halphen solution.
//!
//! Everything here works on jets, i.e. point values of derivatives.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;

use crate::dh::dh_theta_solution;
use crate::error::{Error, Result};
use crate::qseries::{eisenstein_jet, eisenstein_series, PiGradedQSeries, TauPoint};
use crate::scalar::Scalar;

/// Third partials `(f_xxx, f_xxy, f_xyy, f_yyy)` of `f(x, y)` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialJet<S = Complex64> {
    pub fxxx: S,
    pub fxxy: S,
    pub fxyy: S,
    pub fyyy: S,
}

/// `γ, γ', γ'', γ'''` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaJet<S = Complex64> {
    pub g0: S,
    pub g1: S,
    pub g2: S,
    pub g3: S,
}

/// Structure constants `c[α][β][γ] = c_{αβ}^γ` in the basis `e1, e2, e3`
/// (zero-based indices).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicationTable<S> {
    pub c: [[[S; 3]; 3]; 3],
}

fn zeros3<S: Scalar>() -> [S; 3] {
    std::array::from_fn(|_| S::zero())
}

impl<S: Scalar> MultiplicationTable<S> {
    /// Product of two tangent vectors given in the basis `e1, e2, e3`.
    pub fn product(&self, a: &[S; 3], b: &[S; 3]) -> [S; 3] {
        let mut out = zeros3::<S>();
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                for (k, slot) in out.iter_mut().enumerate() {
                    *slot = slot.clone() + ai.clone() * bj.clone() * self.c[i][j][k].clone();
                }
            }
        }
        out
    }

    pub fn basis(i: usize) -> [S; 3] {
        std::array::from_fn(|k| if k == i { S::one() } else { S::zero() })
    }

    /// Largest `|(e_a e_b) e_c - e_a (e_b e_c)|` over basis triples.
    pub fn associator_max(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let (ea, eb, ec) = (Self::basis(a), Self::basis(b), Self::basis(c));
                    let left = self.product(&self.product(&ea, &eb), &ec);
                    let right = self.product(&ea, &self.product(&eb, &ec));
                    for k in 0..3 {
                        worst = worst.max((left[k].clone() - right[k].clone()).magnitude());
                    }
                }
            }
        }
        worst
    }
}

/// `e1` is the unit, and
/// `e2² = f_xxy e1 + f_xxx e2 + e3`, `e2e3 = f_xyy e1 + f_xxy e2`,
/// `e3² = f_yyy e1 + f_xyy e2`.
pub fn structure_constants<S: Scalar>(jet: &PotentialJet<S>) -> MultiplicationTable<S> {
    let mut c: [[[S; 3]; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| zeros3()));
    for b in 0..3 {
        c[0][b] = MultiplicationTable::<S>::basis(b);
        c[b][0] = MultiplicationTable::<S>::basis(b);
    }
    c[1][1] = [jet.fxxy.clone(), jet.fxxx.clone(), S::one()];
    c[1][2] = [jet.fxyy.clone(), jet.fxxy.clone(), S::zero()];
    c[2][1] = c[1][2].clone();
    c[2][2] = [jet.fyyy.clone(), jet.fxyy.clone(), S::zero()];
    MultiplicationTable { c }
}

/// `f_xxy² - f_yyy - f_xxx f_xyy`.
pub fn associativity_residual<S: Scalar>(jet: &PotentialJet<S>) -> S {
    jet.fxxy.clone() * jet.fxxy.clone() - jet.fyyy.clone() - jet.fxxx.clone() * jet.fxyy.clone()
}

/// Jet of `f(x, y) = -x⁴ γ(y) / 16` at `x`, given the `γ` jet at `y`.
pub fn chazy_potential_jet<S: Scalar>(x: S, g: &GammaJet<S>) -> PotentialJet<S> {
    let x2 = x.clone() * x.clone();
    let x3 = x2.clone() * x.clone();
    let x4 = x3.clone() * x.clone();
    PotentialJet {
        fxxx: -(S::ratio(3, 2) * x * g.g0.clone()),
        fxxy: -(S::ratio(3, 4) * x2 * g.g1.clone()),
        fxyy: -(S::ratio(1, 4) * x3 * g.g2.clone()),
        fyyy: -(x4 * g.g3.clone() / S::from_int(16)),
    }
}

pub type ThirdPartials<S> = [[[S; 3]; 3]; 3];

/// `c_{αβγ} = ∂³F` for `F = ½(t¹)²t³ + ½t¹(t²)² + f(t², t³)`.
pub fn third_partials_3d<S: Scalar>(jet: &PotentialJet<S>) -> ThirdPartials<S> {
    let mut c: ThirdPartials<S> = std::array::from_fn(|_| std::array::from_fn(|_| zeros3()));
    let mut set = |idx: [usize; 3], v: S| {
        let [a, b, d] = idx;
        for [i, j, k] in [
            [a, b, d],
            [a, d, b],
            [b, a, d],
            [b, d, a],
            [d, a, b],
            [d, b, a],
        ] {
            c[i][j][k] = v.clone();
        }
    };
    set([0, 0, 2], S::one());
    set([0, 1, 1], S::one());
    set([1, 1, 1], jet.fxxx.clone());
    set([1, 1, 2], jet.fxxy.clone());
    set([1, 2, 2], jet.fxyy.clone());
    set([2, 2, 2], jet.fyyy.clone());
    c
}

/// `η_{βγ} = c_{1βγ}` of the potential above: ones at (1,3), (3,1), (2,2).
pub fn example_eta<S: Scalar>() -> [[S; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| if i + j == 2 { S::one() } else { S::zero() }))
}

fn invert3(m: &[[Complex64; 3]; 3]) -> Result<[[Complex64; 3]; 3]> {
    let cof = |r: usize, c: usize| {
        let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
        let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
        m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
    };
    let det = m[0][0] * cof(0, 0) + m[0][1] * cof(0, 1) + m[0][2] * cof(0, 2);
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if det.norm() <= 1e-14 * scale.powi(3) || !det.norm().is_finite() {
        return Err(Error::SingularEta);
    }
    // inverse = adjugate / det, adjugate = transpose of cofactors
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| cof(j, i) / det)
    }))
}

/// `max |c_{αβλ} η^{λμ} c_{μγδ} - c_{δβλ} η^{λμ} c_{μγα}|` over all index
/// tuples.
pub fn wdvv_residual_3d(c: &ThirdPartials<Complex64>, eta: &[[Complex64; 3]; 3]) -> Result<f64> {
    let inv = invert3(eta)?;
    let contract = |a: usize, b: usize, g: usize, d: usize| {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..3 {
            for m in 0..3 {
                acc += c[a][b][l] * inv[l][m] * c[m][g][d];
            }
        }
        acc
    };
    let mut worst = 0.0f64;
    for a in 0..3 {
        for b in 0..3 {
            for g in 0..3 {
                for d in 0..3 {
                    worst = worst.max((contract(a, b, g, d) - contract(d, b, g, a)).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// `γ''' - 6γγ'' + 9(γ')²`.
pub fn chazy_residual<S: Scalar>(g: &GammaJet<S>) -> S {
    g.g3.clone() - S::from_int(6) * g.g0.clone() * g.g2.clone()
        + S::from_int(9) * g.g1.clone() * g.g1.clone()
}

/// Jet of `γ = (πi/3) E2` at `τ`.
pub fn gamma_jet_e2(tau: TauPoint) -> Result<GammaJet> {
    let e = eisenstein_jet(2, tau)?;
    let k = Complex64::new(0.0, PI / 3.0);
    Ok(GammaJet {
        g0: k * e[0],
        g1: k * e[1],
        g2: k * e[2],
        g3: k * e[3],
    })
}

/// Chazy residual of `γ = (πi/3) g` as an exact series.
///
/// With `d/dτ = 2πi q∂_q`, each term carries `(πi)^4`:
/// `γ''' = (8/3)(πi)^4 θ³g`, `6γγ'' = (8/3)(πi)^4 g θ²g`,
/// `9γ'² = 4(πi)^4 (θg)²`, where `θ = q∂_q`. The result is
/// `(πi)^4 [(8/3)θ³g - (8/3)gθ²g + 4(θg)²]`, i.e. `(4/3)(πi)^4` times
/// `2θ³g - 2gθ²g + 3(θg)²`.
pub fn chazy_series_residual(g: &PiGradedQSeries) -> Result<PiGradedQSeries> {
    let d1 = g.theta_q();
    let d2 = d1.theta_q();
    let d3 = d2.theta_q();
    let eight_thirds = BigRational::ratio(8, 3);
    let r = d3
        .scale(&eight_thirds)
        .sub(&g.mul(&d2).scale(&eight_thirds))?
        .add(&d1.mul(&d1).scale(&BigRational::from_int(4)))?;
    Ok(r.with_pi_power(4))
}

/// Exact Chazy residual of `(πi/3) E2` through `q^order`.
pub fn chazy_e2_exact(order: u32) -> Result<PiGradedQSeries> {
    chazy_series_residual(&eisenstein_series(2, order)?)
}

/// Coefficients `(1, -3γ/2, 3γ'/2, -γ''/4)` of the cubic in `y`, highest
/// degree first.
pub fn dh_cubic<S: Scalar>(g: &GammaJet<S>) -> [S; 4] {
    [
        S::one(),
        -(S::ratio(3, 2) * g.g0.clone()),
        S::ratio(3, 2) * g.g1.clone(),
        -(g.g2.clone() / S::from_int(4)),
    ]
}

/// Roots of `a y³ + b y² + c y + d` (`a ≠ 0`) by Cardano's formula, polished
/// with Newton steps.
pub fn cubic_roots(coeffs: &[Complex64; 4]) -> [Complex64; 3] {
    let [a, b, c, d] = *coeffs;
    let (b, c, d) = (b / a, c / a, d / a);
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let sq = disc.sqrt();
    let (u1, u2) = (-q / 2.0 + sq, -q / 2.0 - sq);
    let u = if u1.norm() >= u2.norm() { u1 } else { u2 };
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut roots = if u.norm() == 0.0 {
        [Complex64::new(0.0, 0.0); 3]
    } else {
        let c0 = u.powf(1.0 / 3.0);
        let mut r = [Complex64::new(0.0, 0.0); 3];
        let mut ck = c0;
        for slot in r.iter_mut() {
            *slot = ck - p / (3.0 * ck);
            ck *= omega;
        }
        r
    };
    for r in roots.iter_mut() {
        *r -= shift;
        for _ in 0..3 {
            let f = ((*r + b) * *r + c) * *r + d;
            let df = (3.0 * *r + 2.0 * b) * *r + c;
            if df.norm() < 1e-300 {
                break;
            }
            let step = f / df;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots
}

/// Largest distance in a greedy minimal pairing of two 3-point sets: the
/// closest remaining pair is matched first. With distinct, well separated
/// roots this is the Hausdorff distance; multiplicities are matched
/// one-to-one.
pub fn root_set_distance(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    let mut used_a = [false; 3];
    let mut used_b = [false; 3];
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let mut best = (f64::INFINITY, 0, 0);
        for i in (0..3).filter(|&i| !used_a[i]) {
            for j in (0..3).filter(|&j| !used_b[j]) {
                let dist = (a[i] - b[j]).norm();
                if dist < best.0 {
                    best = (dist, i, j);
                }
            }
        }
        used_a[best.1] = true;
        used_b[best.2] = true;
        worst = worst.max(best.0);
    }
    worst
}

/// Distance between the roots of the cubic for `γ = (πi/3) E2` and the
/// Darboux–Halphen closed form at `τ`.
pub fn dh_cubic_roots_check(tau: TauPoint) -> Result<f64> {
    let g = gamma_jet_e2(tau)?;
    let roots = cubic_roots(&dh_cubic(&g));
    let t = dh_theta_solution(tau)?.to_array();
    Ok(root_set_distance(&roots, &t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::SeriesVar;
    use num_traits::Zero;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_int(n)
    }

    fn jet(a: f64, b: f64, d: f64, e: f64) -> PotentialJet {
        PotentialJet {
            fxxx: c(a, 0.0),
            fxxy: c(b, 0.0),
            fxyy: c(d, 0.0),
            fyyy: c(e, 0.0),
        }
    }

    #[test]
    fn zero_jet_table() {
        let t = structure_constants(&jet(0.0, 0.0, 0.0, 0.0));
        assert_eq!(t.c[1][1], [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(t.c[1][2], [c(0.0, 0.0); 3]);
        assert_eq!(t.c[2][2], [c(0.0, 0.0); 3]);
    }

    #[test]
    fn quartic_x_jet() {
        // f = x⁴: f_xxx = 24x, others vanish
        let x = 0.7;
        let t = structure_constants(&jet(24.0 * x, 0.0, 0.0, 0.0));
        assert_eq!(t.c[1][1], [c(0.0, 0.0), c(24.0 * x, 0.0), c(1.0, 0.0)]);
        assert_eq!(
            associativity_residual(&jet(24.0 * x, 0.0, 0.0, 0.0)),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn unity_and_commutativity() {
        let t = structure_constants(&jet(0.3, -1.1, 2.0, 0.5));
        for v in 0..3 {
            let e = MultiplicationTable::<Complex64>::basis(v);
            let e1 = MultiplicationTable::<Complex64>::basis(0);
            assert_eq!(t.product(&e1, &e), e);
            for w in 0..3 {
                let f = MultiplicationTable::<Complex64>::basis(w);
                assert_eq!(t.product(&e, &f), t.product(&f, &e));
            }
        }
    }

    #[test]
    fn associator_vanishes_iff_residual_does() {
        // f = x²y² at (x, y) = (0.5, 2): jet (0, 4y, 4x, 0), residual 16y²
        let (x, y) = (0.5, 2.0);
        let j = jet(0.0, 4.0 * y, 4.0 * x, 0.0);
        assert_eq!(associativity_residual(&j), c(16.0 * y * y, 0.0));
        assert!(structure_constants(&j).associator_max() > 1.0);
        // choose f_yyy to satisfy the PDE
        let fixed = jet(1.5, 2.0, -0.5, 4.0 + 0.75);
        assert!(associativity_residual(&fixed).norm() < 1e-15);
        assert!(structure_constants(&fixed).associator_max() < 1e-14);
    }

    #[test]
    fn wdvv_examples() {
        let eta = example_eta::<Complex64>();
        let cubic = third_partials_3d(&jet(0.0, 0.0, 0.0, 0.0));
        assert_eq!(wdvv_residual_3d(&cubic, &eta).unwrap(), 0.0);
        // x²y² term: the WDVV residual picks up the associativity residual
        let (x, y) = (0.5, 2.0);
        let j = jet(0.0, 4.0 * y, 4.0 * x, 0.0);
        let r = wdvv_residual_3d(&third_partials_3d(&j), &eta).unwrap();
        assert!((r - associativity_residual(&j).norm()).abs() < 1e-12, "{r}");
        let singular = [[c(1.0, 0.0); 3]; 3];
        assert_eq!(wdvv_residual_3d(&cubic, &singular), Err(Error::SingularEta));
    }

    #[test]
    fn third_partials_fully_symmetric() {
        let cc = third_partials_3d(&jet(0.3, -1.1, 2.0, 0.5));
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    let v = cc[a][b][d];
                    for p in [
                        cc[a][d][b],
                        cc[b][a][d],
                        cc[b][d][a],
                        cc[d][a][b],
                        cc[d][b][a],
                    ] {
                        assert_eq!(v, p);
                    }
                }
            }
        }
    }

    #[test]
    fn chazy_residual_examples() {
        let constant = GammaJet {
            g0: rat(5),
            g1: rat(0),
            g2: rat(0),
            g3: rat(0),
        };
        assert!(chazy_residual(&constant).is_zero());
        let linear = GammaJet {
            g0: rat(0),
            g1: rat(1),
            g2: rat(0),
            g3: rat(0),
        };
        assert_eq!(chazy_residual(&linear), rat(9));
    }

    #[test]
    fn chazy_numeric_on_e2() {
        let g = gamma_jet_e2(TauPoint::imaginary(1.1).unwrap()).unwrap();
        assert!(chazy_residual(&g).norm() < 1e-8);
    }

    #[test]
    fn potential_reduces_to_chazy() {
        // associativity residual = (x⁴/16) · chazy residual
        let g = GammaJet {
            g0: rat(3),
            g1: rat(-2),
            g2: BigRational::ratio(1, 2),
            g3: rat(7),
        };
        for x in [rat(1), rat(-2), BigRational::ratio(3, 5)] {
            let lhs = associativity_residual(&chazy_potential_jet(x.clone(), &g));
            let x4 = x.clone() * &x * &x * &x;
            assert_eq!(lhs, x4 / rat(16) * chazy_residual(&g));
        }
    }

    #[test]
    fn chazy_exact_low_orders() {
        assert!(chazy_e2_exact(0).unwrap().is_zero());
        assert!(chazy_e2_exact(1).unwrap().is_zero());
        let r = chazy_e2_exact(30).unwrap();
        assert!(r.is_zero());
        assert_eq!(r.trunc_order(), 30);
    }

    /// The normalization must reproduce the numeric Chazy residual for a
    /// series that is not a solution.
    #[test]
    fn chazy_series_normalization_matches_numeric() {
        let g =
            PiGradedQSeries::from_int_terms(SeriesVar::Q, 12, &[(0, 1), (1, 3), (2, -5), (4, 2)]);
        let tau = TauPoint::new(c(0.2, 0.6)).unwrap();
        let series_value = chazy_series_residual(&g).unwrap().eval(tau);
        // jet of (πi/3) g by term-wise differentiation
        let k = c(0.0, PI / 3.0);
        let mut jet = [c(0.0, 0.0); 4];
        let mut d = g.clone();
        for slot in jet.iter_mut() {
            *slot = k * d.eval(tau);
            d = d.theta_q().scale(&rat(1));
        }
        for (n, slot) in jet.iter_mut().enumerate() {
            *slot *= c(0.0, 2.0 * PI).powi(n as i32);
        }
        let numeric = chazy_residual(&GammaJet {
            g0: jet[0],
            g1: jet[1],
            g2: jet[2],
            g3: jet[3],
        });
        assert!(numeric.norm() > 1.0);
        assert!((series_value - numeric).norm() < 1e-9 * numeric.norm());
    }

    #[test]
    fn cubic_coefficients_and_sum_of_roots() {
        let zero = GammaJet {
            g0: rat(0),
            g1: rat(0),
            g2: rat(0),
            g3: rat(0),
        };
        assert_eq!(dh_cubic(&zero), [rat(1), rat(0), rat(0), rat(0)]);
        let roots = cubic_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(roots.iter().all(|r| r.norm() == 0.0));

        let g = gamma_jet_e2(TauPoint::imaginary(1.2).unwrap()).unwrap();
        let roots = cubic_roots(&dh_cubic(&g));
        let sum: Complex64 = roots.iter().sum();
        assert!((sum - 1.5 * g.g0).norm() < 1e-12);
        // (3/2)(πi/3) E2 = (πi/2) E2
        let e2 = eisenstein_jet(2, TauPoint::imaginary(1.2).unwrap()).unwrap()[0];
        assert!((sum - c(0.0, PI / 2.0) * e2).norm() < 1e-12);
    }

    #[test]
    fn cubic_roots_recover_known_roots() {
        let want = [c(1.0, 2.0), c(-0.5, 0.1), c(3.0, -1.0)];
        let coeffs = [
            c(2.0, 0.0),
            -2.0 * (want[0] + want[1] + want[2]),
            2.0 * (want[0] * want[1] + want[0] * want[2] + want[1] * want[2]),
            -2.0 * want[0] * want[1] * want[2],
        ];
        assert!(root_set_distance(&cubic_roots(&coeffs), &want) < 1e-12);
    }

    #[test]
    fn cubic_roots_are_dh_solution() {
        assert!(dh_cubic_roots_check(TauPoint::imaginary(1.2).unwrap()).unwrap() < 1e-8);
    }
}
