use halphen::dh::{dh_vector_field, DHState};
use halphen::gauss_manin::gm_contract;
use halphen::qseries::{PiGradedQSeries, SeriesVar};
use halphen::ramanujan::conjugacy_residual_normalized;
use halphen::BigRational;
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = BigRational> {
    (-50i64..=50, 1i64..=20).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn series(trunc: u32) -> impl Strategy<Value = PiGradedQSeries> {
    prop::collection::vec(rational(), (trunc + 1) as usize).prop_map(move |cs| {
        PiGradedQSeries::from_terms(
            SeriesVar::Q,
            0,
            trunc,
            cs.into_iter().enumerate().map(|(n, c)| (n as u32, c)),
        )
    })
}

fn distinct_triple() -> impl Strategy<Value = [BigRational; 3]> {
    (rational(), rational(), rational())
        .prop_filter("pairwise distinct", |(a, b, c)| a != b && b != c && a != c)
        .prop_map(|(a, b, c)| [a, b, c])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_mul_commutative(a in series(8), b in series(8)) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn series_mul_associative(a in series(6), b in series(6), c in series(6)) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn series_mul_distributive(a in series(6), b in series(6), c in series(6)) {
        let lhs = a.mul(&b.add(&c).unwrap());
        let rhs = a.mul(&b).add(&a.mul(&c)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn series_inverse_round_trip(a in series(6), c0 in rational()) {
        prop_assume!(!c0.is_zero());
        let unit = PiGradedQSeries::constant(SeriesVar::Q, 6, c0)
            .add(&a.sub(&a.truncate(0)).unwrap())
            .unwrap();
        let prod = unit.mul(&unit.inverse().unwrap());
        prop_assert_eq!(prod, PiGradedQSeries::one(SeriesVar::Q, 6));
    }

    #[test]
    fn gm_contract_is_linear(t in distinct_triple(), u in [rational(), rational(), rational()],
                             v in [rational(), rational(), rational()], k in rational()) {
        let s = DHState::from_array(t);
        let w: [BigRational; 3] = std::array::from_fn(|i| u[i].clone() + k.clone() * &v[i]);
        let (mu, mv, mw) = (gm_contract(&s, &u).unwrap(), gm_contract(&s, &v).unwrap(), gm_contract(&s, &w).unwrap());
        for r in 0..2 {
            for c in 0..2 {
                prop_assert_eq!(mw[r][c].clone(), mu[r][c].clone() + k.clone() * &mv[r][c]);
            }
        }
    }

    #[test]
    fn dh_field_equivariant(t in [rational(), rational(), rational()]) {
        let s = DHState::from_array(t);
        let f = dh_vector_field(&s);
        let p = dh_vector_field(&s.permuted([2, 0, 1]));
        prop_assert_eq!(p, [f[2].clone(), f[0].clone(), f[1].clone()]);
    }

    #[test]
    fn conjugacy_exact(t in [rational(), rational(), rational()]) {
        let r = conjugacy_residual_normalized(&DHState::from_array(t));
        prop_assert!(r.iter().all(Zero::is_zero));
    }
}
