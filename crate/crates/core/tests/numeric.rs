use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

use resurge_core::numeric::*;

const PI_DIGITS: &str = "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899862803482534211706798";
const E_DIGITS: &str = "2.71828182845904523536028747135266249775724709369995957496696762772407663035354759457138217852516642743";
const LN2_DIGITS: &str = "0.69314718055994530941723212145817656807550013436025525412068000949339362196969471560586332699641868754";

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn exact_of<R: Real>(x: R) -> BigRational {
    x.parts().into_iter().map(exact).fold(BigRational::zero(), |a, b| a + b)
}

fn rel_err(got: &BigRational, want: &BigRational) -> f64 {
    if want.is_zero() {
        return got.abs().to_f64().unwrap();
    }
    ((got - want) / want).abs().to_f64().unwrap()
}

fn build<R: Real>(c: &[f64]) -> R {
    // components scaled so they do not overlap
    let mut acc = R::zero();
    let mut scale = 1.0;
    for &x in c {
        acc += R::from_f64(x * scale);
        scale *= 2f64.powi(-53);
    }
    acc
}

proptest! {
    #[test]
    fn dd_ops_match_exact_rationals(a in prop::collection::vec(-1.0f64..1.0, 2), b in prop::collection::vec(-1.0f64..1.0, 2)) {
        prop_assume!(a[0].abs() > 1e-3 && b[0].abs() > 1e-3);
        let (x, y): (Dd, Dd) = (build(&a), build(&b));
        let (ex, ey) = (exact_of(x), exact_of(y));
        let tol = 2f64.powi(-100);
        prop_assert!(rel_err(&exact_of(x * y), &(&ex * &ey)) < tol);
        prop_assert!(rel_err(&exact_of(x / y), &(&ex / &ey)) < tol);
        let sum = &ex + &ey;
        let err = (exact_of(x + y) - &sum).abs().to_f64().unwrap();
        prop_assert!(err <= tol * (ex.abs() + ey.abs()).to_f64().unwrap());
    }

    #[test]
    fn qd_ops_match_exact_rationals(a in prop::collection::vec(-1.0f64..1.0, 4), b in prop::collection::vec(-1.0f64..1.0, 4)) {
        prop_assume!(a[0].abs() > 1e-3 && b[0].abs() > 1e-3);
        let (x, y): (Qd, Qd) = (build(&a), build(&b));
        let (ex, ey) = (exact_of(x), exact_of(y));
        let tol = 2f64.powi(-205);
        prop_assert!(rel_err(&exact_of(x * y), &(&ex * &ey)) < tol);
        prop_assert!(rel_err(&exact_of(x / y), &(&ex / &ey)) < tol);
        let sum = &ex + &ey;
        let err = (exact_of(x + y) - &sum).abs().to_f64().unwrap();
        prop_assert!(err <= tol * (ex.abs() + ey.abs()).to_f64().unwrap());
    }

    #[test]
    fn exp_ln_round_trip_qd(x in 0.01f64..50.0) {
        let v = Qd::from_f64(x);
        let back = v.ln().exp();
        prop_assert!(((back - v) / v).abs().to_f64() < 1e-60);
    }

    #[test]
    fn sin_cos_pythagoras_dd(x in -40.0f64..40.0) {
        let (s, c) = Dd::from_f64(x).sin_cos();
        prop_assert!((s * s + c * c - Dd::one()).abs().to_f64() < 1e-30);
        prop_assert!((s.to_f64() - x.sin()).abs() < 1e-14);
    }

    #[test]
    fn gamma_recurrence_and_reflection(re in -4.5f64..6.0, im in -5.0f64..5.0) {
        prop_assume!(im.abs() > 1e-3);
        let s: Cx<Qd> = cx(re, im);
        let g = gamma_complex(s).unwrap();
        let g1 = gamma_complex(s + cx(1.0, 0.0)).unwrap();
        let rec = g1 / (s * g);
        prop_assert!(cabs_f64(rec - cx(1.0, 0.0)) < 1e-55);
        let gr = gamma_complex(cx::<Qd>(1.0, 0.0) - s).unwrap();
        let pi = Qd::pi();
        let sin = {
            let iz = Complex::new(-s.im * pi, s.re * pi);
            let d = cexp(iz) - cexp(-iz);
            Complex::new(d.im, -d.re).scale(Qd::from_f64(0.5))
        };
        let refl = g * gr * sin / Complex::new(pi, Qd::zero());
        prop_assert!(cabs_f64(refl - cx(1.0, 0.0)) < 1e-55);
    }
}

#[test]
fn constants_match_reference_digits() {
    let pi = Qd::parse_decimal(PI_DIGITS).unwrap();
    assert!((Qd::pi() - pi).abs().to_f64() < 1e-62);
    let e = Qd::parse_decimal(E_DIGITS).unwrap();
    assert!((Qd::one().exp() - e).abs().to_f64() < 1e-62);
    let l2 = Qd::parse_decimal(LN2_DIGITS).unwrap();
    assert!((Qd::ln2() - l2).abs().to_f64() < 1e-62);
    let d = (Dd::pi() - Dd::parse_decimal(&PI_DIGITS[..36]).unwrap()).abs().to_f64();
    assert!(d < 1e-31, "{d:e}");
    let q = (Dd::pi() - Dd::from_parts(&Qd::pi().parts())).abs().to_f64();
    assert!(q < 1e-31, "{q:e}");
}

#[test]
fn decimal_round_trip() {
    for s in ["-3.9478417604357434475337963999504604541254797628963e1", "1e-40", "0.5", "12345678901234567890123"] {
        let v = Qd::parse_decimal(s).unwrap();
        let back = Qd::parse_decimal(&v.to_sci_string()).unwrap();
        assert!(((back - v) / v).abs().to_f64() < 1e-62, "{s}");
    }
    assert_eq!(Qd::parse_decimal("2.5e3").unwrap(), Qd::from_f64(2500.0));
    assert!(Qd::parse_decimal("abc").is_none());
    assert_eq!(f64::parse_decimal("0.125").unwrap(), 0.125);
}

#[test]
fn parts_round_trip_exactly() {
    let x = Qd::pi() / Qd::from_f64(7.0);
    assert_eq!(Qd::from_parts(&x.parts()), x);
    let y = Dd::ln2();
    assert_eq!(Dd::from_parts(&y.parts()), y);
}

#[test]
fn gamma_known_values() {
    let g1 = gamma_complex(cx::<Qd>(1.0, 0.0)).unwrap();
    assert!(cabs_f64(g1 - cx(1.0, 0.0)) < 1e-60);
    let g5 = gamma_complex(cx::<Qd>(5.0, 0.0)).unwrap();
    assert!(cabs_f64(g5 - cx(24.0, 0.0)) < 1e-58);
    let gh = gamma_complex(cx::<Qd>(0.5, 0.0)).unwrap();
    assert!(cabs_f64(gh * gh - cx_real(Qd::pi())) < 1e-60);
    assert!(matches!(gamma_complex(cx::<Dd>(-3.0, 0.0)), Err(resurge_core::Error::PoleOfGamma(_))));
}

#[test]
fn gamma_modulus_on_vertical_lines() {
    // |Γ(1+iy)|² = πy / sinh(πy),  |Γ(1/2+iy)|² = π / cosh(πy)
    for &y in &[0.3, 1.0, 2.5, 6.283185307179586] {
        let yq = Qd::from_f64(y);
        let pi = Qd::pi();
        let e = (pi * yq).exp();
        let sinh = (e - Qd::one() / e).mul_pow2(-1);
        let cosh = (e + Qd::one() / e).mul_pow2(-1);
        let g = gamma_complex(Complex::new(Qd::one(), yq)).unwrap();
        let m = g.re * g.re + g.im * g.im;
        assert!(((m - pi * yq / sinh) / m).abs().to_f64() < 1e-58, "y = {y}");
        let g = gamma_complex(Complex::new(Qd::from_f64(0.5), yq)).unwrap();
        let m = g.re * g.re + g.im * g.im;
        assert!(((m - pi / cosh) / m).abs().to_f64() < 1e-58, "y = {y}");
    }
}

#[test]
fn bernoulli_first_values() {
    let b = bernoulli_numbers(12);
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    assert_eq!(b[0], BigRational::one());
    assert_eq!(b[1], r(-1, 2));
    assert_eq!(b[2], r(1, 6));
    assert_eq!(b[3], BigRational::zero());
    assert_eq!(b[4], r(-1, 30));
    assert_eq!(b[12], r(-691, 2730));
}

#[test]
fn gauss_rule_is_exact_for_polynomials() {
    let rule: GaussRule<Qd> = GaussRule::new(12);
    for k in 0..24 {
        let got = rule.nodes.iter().zip(&rule.weights).fold(Qd::zero(), |a, (&x, &w)| a + w * x.powi(k));
        let want = if k % 2 == 0 { Qd::from_f64(2.0) / Qd::from_i64(k as i64 + 1) } else { Qd::zero() };
        assert!((got - want).abs().to_f64() < 1e-60, "degree {k}");
    }
    // partial integrals of x^k up to each node are exact for k < 12
    for (i, row) in rule.partial.iter().enumerate() {
        let x = rule.nodes[i];
        for k in 0..12 {
            let got = row.iter().zip(&rule.nodes).fold(Qd::zero(), |a, (&q, &xl)| a + q * xl.powi(k));
            let kp = Qd::from_i64(k as i64 + 1);
            let want = (x.powi(k as i32 + 1) - (-Qd::one()).powi(k as i32 + 1)) / kp;
            assert!((got - want).abs().to_f64() < 1e-58, "node {i} degree {k}");
        }
    }
}

#[test]
fn complex_helpers() {
    let z: Cx<Dd> = cx(0.3, -1.7);
    let back = cexp(cln(z));
    assert!(cabs_f64(back - z) < 1e-30);
    let small: Cx<Dd> = cx(1e-20, 3e-21);
    let m = cexpm1(small);
    assert!(cabs_f64(m - small) < 1e-39);
    let s = csqrt(cx::<Dd>(-4.0, 0.0));
    assert!(cabs_f64(s - cx(0.0, 2.0)) < 1e-30);
    assert_eq!(Tier::for_bits(160), Some(Tier::Qd));
    assert_eq!(Tier::for_bits(53), Some(Tier::F64));
    assert_eq!(Tier::for_bits(300), None);
}
