use bivekua::{Bicomplex, Complex64};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn bicomplex() -> impl Strategy<Value = Bicomplex> {
    prop::array::uniform4(-1.0f64..1.0).prop_map(|[a, b, c, d]| Bicomplex::from_parts(a, b, c, d))
}

fn close(a: Bicomplex, b: Bicomplex) -> bool {
    (a - b).norm() <= TOL
}

proptest! {
    #[test]
    fn ring_axioms(w in bicomplex(), v in bicomplex(), u in bicomplex()) {
        prop_assert!(close(w * v, v * w));
        prop_assert!(close((w * v) * u, w * (v * u)));
        prop_assert!(close(w * (v + u), w * v + w * u));
        prop_assert!(close(w * Bicomplex::ONE, w));
        prop_assert!(close(w + (-w), Bicomplex::ZERO));
    }

    #[test]
    fn product_matches_component_formula(w in bicomplex(), v in bicomplex()) {
        let expect = Bicomplex::new(w.sc * v.sc - w.vec * v.vec, w.sc * v.vec + w.vec * v.sc);
        prop_assert!(close(w * v, expect));
    }

    #[test]
    fn idempotent_round_trip(w in bicomplex()) {
        let p = w.idempotent();
        prop_assert!(close(Bicomplex::P_PLUS * Bicomplex::scalar(p.plus) + Bicomplex::P_MINUS * Bicomplex::scalar(p.minus), w));
        prop_assert!(close(Bicomplex::from_idempotent(p), w));
    }

    #[test]
    fn involutions(w in bicomplex(), v in bicomplex()) {
        prop_assert_eq!(w.conj_bar().conj_bar(), w);
        prop_assert_eq!(w.conj_dagger().conj_dagger(), w);
        prop_assert_eq!(w.conj_star().conj_star(), w);
        prop_assert!(close((w * v).conj_bar(), w.conj_bar() * v.conj_bar()));
        prop_assert!(close((w * v).conj_dagger(), w.conj_dagger() * v.conj_dagger()));
        prop_assert!(close((w * v).conj_star(), w.conj_star() * v.conj_star()));
        let (p, d) = (w.idempotent(), w.conj_dagger().idempotent());
        prop_assert!((d.plus - p.plus.conj()).norm() <= TOL && (d.minus - p.minus.conj()).norm() <= TOL);
    }

    #[test]
    fn norm_and_inner(w in bicomplex(), v in bicomplex()) {
        prop_assert!((w.inner(w).re - w.norm_sqr()).abs() <= TOL && w.inner(w).im.abs() <= TOL);
        prop_assert!((w * v).norm() <= 2f64.sqrt() * w.norm() * v.norm() + TOL);
        let p = w.idempotent();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        prop_assert!(r * p.plus.norm() <= w.norm() + TOL);
        prop_assert!(r * p.minus.norm() <= w.norm() + TOL);
        prop_assert!(w.norm() <= r * (p.plus.norm() + p.minus.norm()) + TOL);
        let lhs = w.inner(v * Bicomplex::J);
        let rhs = -(w * Bicomplex::J).inner(v);
        prop_assert!((lhs - rhs).norm() <= TOL);
        prop_assert!((w.inner(v) - (w * v.conj_dagger()).sc).norm() <= TOL);
    }

    #[test]
    fn w_times_bar_is_sum_of_squares(w in bicomplex()) {
        let expect = w.sc * w.sc + w.vec * w.vec;
        prop_assert!(close(w * w.conj_bar(), Bicomplex::scalar(expect)));
    }

    #[test]
    fn exponential(w in bicomplex(), v in bicomplex()) {
        prop_assert!(close((w + v).exp(), w.exp() * v.exp()));
        prop_assert!(close(w.exp() * (-w).exp(), Bicomplex::ONE));
        prop_assert!(!w.exp().is_zero_divisor());
    }

    #[test]
    fn inverse(w in bicomplex()) {
        let p = w.idempotent();
        prop_assume!(p.plus.norm() > 1e-3 && p.minus.norm() > 1e-3);
        let inv = w.inverse().unwrap();
        let err = (w * inv - Bicomplex::ONE).norm();
        prop_assert!(err <= 1e-10 * (1.0 + inv.norm()));
    }

    #[test]
    fn zero_divisors_are_exactly_the_degenerate_idempotents(c in prop::array::uniform2(-1.0f64..1.0)) {
        let z = Complex64::new(c[0], c[1]);
        prop_assume!(z.norm() > 1e-6);
        let w = Bicomplex::P_PLUS * Bicomplex::scalar(z);
        prop_assert!(w.is_zero_divisor());
        prop_assert!(w.inverse().is_err());
        prop_assert!(close(w * w.conj_bar(), Bicomplex::ZERO));
    }
}
