use cayley_core::exterior::{hodge_star, Multivector, Vector};
use cayley_core::{Rational, Scalar};
use proptest::prelude::*;

type Q = Rational;

fn small() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Q::from_ratio(n, d))
}

fn vector(n: usize) -> impl Strategy<Value = Vector<Q>> {
    proptest::collection::vec(small(), n).prop_map(Vector::new)
}

/// Random homogeneous form of grade `k` on ℝⁿ with a few terms.
fn form(n: usize, k: usize) -> impl Strategy<Value = Multivector<Q>> {
    proptest::collection::vec((proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), k), small()), 1..4).prop_map(
        move |terms| {
            terms.into_iter().fold(Multivector::zero(n), |acc, (idx, c)| &acc + &Multivector::term(n, &idx, c).unwrap())
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wedge_is_associative(a in form(6, 1), b in form(6, 2), c in form(6, 2)) {
        let l = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let r = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn wedge_is_graded_commutative(a in form(7, 2), b in form(7, 3)) {
        prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap());
        let x = Multivector::<Q>::basis(7, &[1]).unwrap();
        let y = Multivector::<Q>::basis(7, &[4]).unwrap();
        prop_assert_eq!(x.wedge(&y).unwrap(), -&y.wedge(&x).unwrap());
    }

    #[test]
    fn hook_is_an_antiderivation(v in vector(6), a in form(6, 2), b in form(6, 1)) {
        let lhs = a.wedge(&b).unwrap().hook(&v).unwrap();
        let rhs = &a.hook(&v).unwrap().wedge(&b).unwrap() + &a.wedge(&b.hook(&v).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn double_hook_vanishes(v in vector(8), a in form(8, 3)) {
        prop_assert!(a.hook(&v).unwrap().hook(&v).unwrap().is_zero());
    }

    #[test]
    fn star_squares_to_sign(a in form(8, 3), b in form(8, 4)) {
        // ** = (−1)^{k(8−k)}
        prop_assert_eq!(hodge_star(&hodge_star(&a)), -&a);
        prop_assert_eq!(hodge_star(&hodge_star(&b)), b);
        let vol = Multivector::<Q>::volume(8);
        prop_assert_eq!(a.wedge(&hodge_star(&a)).unwrap(), vol.scale(&a.norm_sq()));
    }

    #[test]
    fn star_on_odd_dimension(a in form(5, 2)) {
        // ** = (−1)^{2·3} = +1 on 2-forms in ℝ⁵.
        prop_assert_eq!(hodge_star(&hodge_star(&a)), a);
    }
}
