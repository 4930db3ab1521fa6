use num_complex::Complex;
use num_traits::{One, Zero};
use proptest::prelude::*;

use resurge_core::borel::*;
use resurge_core::numeric::*;
use resurge_core::series::*;
use resurge_core::Error;

type C = Cx<Qd>;

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn closed_form_borel_images() {
    let d = GermData::<Qd>::new(&GermSpec::quad(), 41).unwrap();
    let e = borel_int(&d.b, d.radius_r);
    for n in 0..=40 {
        let want = 2f64.powi(n as i32) / fact(n);
        assert!(cabs_f64(e.coeffs[n] - cx(want, 0.0)) <= 1e-12 * want.max(1e-300) + 1e-40, "n = {n}");
    }
    let e = borel_int(&d.with_depth(130).unwrap().b, d.radius_r);
    let (v, err) = e.eval_checked(two_pi_i(1), 1e-30).unwrap();
    let true_err = cabs_f64(v - cx(1.0, 0.0));
    assert!(true_err < 1e-30 && err >= true_err, "{true_err:e} vs {err:e}");

    let d = GermData::<Qd>::new(&GermSpec::rho0(), 100).unwrap();
    let e = borel_int(&d.b, d.radius_r);
    assert!(e.coeffs[0].is_zero());
    for n in 1..=40 {
        let want = 1.0 / fact(n - 1);
        assert!(cabs_f64(e.coeffs[n] - cx(want, 0.0)) <= 1e-12 * want, "n = {n}");
    }
    // ζe^ζ at 2πi
    let (v, err) = e.eval_checked(two_pi_i(1), 1e-25).unwrap();
    let true_err = cabs_f64(v - two_pi_i(1));
    assert!(err >= true_err && true_err < 1e-25);
}

#[test]
fn certification_refuses_unreachable_tolerances() {
    let d = GermData::<Qd>::new(&GermSpec::quad(), 20).unwrap();
    let e = borel_int(&d.b, d.radius_r);
    assert!(matches!(e.eval_checked(cx(0.0, 30.0), 1e-20), Err(Error::InsufficientTerms { .. })));
    let d = GermData::<f64>::new(&GermSpec::quad(), 120).unwrap();
    let e = borel_int(&d.b, d.radius_r);
    assert!(matches!(e.eval_checked(cx(0.0, 12.0), 1e-12), Err(Error::PrecisionBudgetExceeded { .. })));
}

#[test]
fn fractional_borel_transform() {
    let alpha: C = cx(0.4, 2.0);
    let mut s = FracSeries::<Qd>::zero(alpha + cx(1.0, 0.0), 0);
    s.coeffs[0] = Complex::one();
    let g = borel_frac(&s, 1.0).unwrap();
    assert!(cabs_f64(g.gamma - alpha) < 1e-60);
    let want = Complex::<Qd>::one() / gamma_complex(alpha + cx(1.0, 0.0)).unwrap();
    assert!(cabs_f64(g.entire.coeffs[0] - want) < 1e-60);

    // branch law: lifts 0 and 2π differ by e^{2πiγ}
    let z0 = Lifted { modulus: Qd::from_f64(0.7), arg: Qd::from_f64(0.3) };
    let z1 = Lifted { modulus: z0.modulus, arg: z0.arg + Qd::pi().mul_pow2(1) };
    let ratio = g.eval(z1) / g.eval(z0);
    let want = cexp(g.gamma * Complex::new(Qd::zero(), Qd::pi().mul_pow2(1)));
    assert!(cabs_f64(ratio - want) < 1e-55);

    // γ = 0 reduces to the entire evaluation
    let h = BranchedGerm { gamma: Complex::zero(), entire: g.entire.clone() };
    let p = z0.point();
    assert!(cabs_f64(h.eval(z0) - g.entire.eval(p)) < 1e-60);
}

proptest! {
    #[test]
    fn borel_frac_is_linear(a in prop::collection::vec(-1.0f64..1.0, 6), b in prop::collection::vec(-1.0f64..1.0, 6), g in 0.2f64..3.0) {
        let mk = |v: &Vec<f64>| FracSeries::<Dd> { gamma: cx(g, 0.5), coeffs: v.iter().map(|&x| cx(x, 0.0)).collect() };
        let (x, y) = (mk(&a), mk(&b));
        let s = x.add(&y.scale(cx(2.0, -1.0)));
        let (bx, by, bs) = (borel_frac(&x, 1.0).unwrap(), borel_frac(&y, 1.0).unwrap(), borel_frac(&s, 1.0).unwrap());
        let p = Lifted { modulus: Dd::from_f64(0.9), arg: Dd::from_f64(-0.4) };
        let lhs = bs.eval(p);
        let rhs = bx.eval(p) + by.eval(p) * cx(2.0, -1.0);
        prop_assert!(cabs_f64(lhs - rhs) < 1e-28);
    }

    #[test]
    fn borel_turns_products_into_convolutions(a in prop::collection::vec(-1.0f64..1.0, 8), b in prop::collection::vec(-1.0f64..1.0, 8), zr in -2.0f64..2.0, zi in -2.0f64..2.0) {
        let mk = |v: &Vec<f64>| {
            let mut s = IntSeries::<Dd>::zero(v.len() * 2 + 2);
            for (i, &x) in v.iter().enumerate() {
                s.coeffs[i + 1] = cx(x, 0.3 * x);
            }
            s
        };
        let (x, y) = (mk(&a), mk(&b));
        let (bx, by, bp) = (borel_int(&x, 1.0), borel_int(&y, 1.0), borel_int(&x.mul(&y), 1.0));
        let zeta: Cx<Dd> = cx(zr, zi);
        // ∫_0^1 φ̂₁((1-t)ζ) φ̂₂(tζ) ζ dt
        let rule: GaussRule<Dd> = GaussRule::new(20);
        let mut conv = Complex::<Dd>::zero();
        for (xn, w) in rule.nodes.iter().zip(&rule.weights) {
            let t = (*xn + Dd::one()).mul_pow2(-1);
            conv = conv + bx.eval(zeta.scale(Dd::one() - t)) * by.eval(zeta.scale(t)) * zeta.scale(w.mul_pow2(-1));
        }
        prop_assert!(cabs_f64(conv - bp.eval(zeta)) < 1e-25);
    }
}

#[test]
fn one_convolved_with_one_is_zeta() {
    let one = IntSeries::<Qd>::monomial(1, 5);
    let p = one.mul(&one);
    let b = borel_int(&p, 1.0);
    assert!(cabs_f64(b.eval(cx(0.3, 0.2)) - cx(0.3, 0.2)) < 1e-60);
}

fn qfact(n: usize) -> Qd {
    (1..=n).fold(Qd::one(), |a, k| a * Qd::from_i64(k as i64))
}

fn reach_for(m: i64) -> f64 {
    (2.0 * std::f64::consts::PI * m.abs() as f64 + 1.0).hypot(1.0) + 0.5
}

#[test]
fn kernel_identities() {
    let t = GermData::<Qd>::new(&GermSpec::translation(), 40).unwrap();
    let k = build_kernel(&t, Complex::zero(), reach_for(1), 1e-40).unwrap();
    assert!(k.is_zero());
    assert!(k.eval(cx(0.3, 1.0), cx(2.0, -1.0)).is_zero());

    let d = GermData::<Qd>::new(&GermSpec::quad(), 130).unwrap();
    let om = two_pi_i::<Qd>(1);
    let alpha = -(d.rho * om);
    let k = build_kernel_auto(&d, alpha, reach_for(1), 1e-40).unwrap();
    for &(re, im) in &[(0.3, 0.1), (-1.0, 2.5), (0.5, 6.0), (2.0, -3.0)] {
        let xi: C = cx(re, im);
        let v = k.eval(xi, xi);
        assert!(cabs_f64(v - (alpha + d.rho * xi)) < 1e-55, "{re} {im}");
    }
    assert!(cabs_f64(k.eval(om, om)) < 1e-55);
    assert!(k.error_bound <= 1e-40);
}

#[test]
fn kernel_for_rho_zero_matches_closed_form() {
    // b = (w-1)^{-2}: 𝓑(b^k) = η^{2k-1} e^η / (2k-1)!
    let d = GermData::<Qd>::new(&GermSpec::rho0(), 120).unwrap();
    let k = build_kernel_auto(&d, Complex::zero(), reach_for(1), 1e-40).unwrap();
    let xi: C = cx(0.7, 3.0);
    let zeta: C = cx(1.0, 5.5);
    let eta = zeta - xi;
    let mut want: C = Complex::zero();
    let mut w: C = Complex::one();
    let mut eta_pow: C = eta;
    for kk in 1..60 {
        w = w * (-xi) / cx(kk as f64, 0.0);
        want = want + (w * eta_pow * cexp(eta)).scale(Qd::one() / qfact(2 * kk - 1));
        eta_pow = eta_pow * eta * eta;
    }
    let got = k.eval(xi, zeta);
    assert!(cabs_f64(got - want) < 1e-45 * cabs_f64(want).max(1.0), "{:e}", cabs_f64(got - want));
}

#[test]
fn paths_and_lifts() {
    let g = PathLog::<Qd>::segment_gamma_m(1).unwrap();
    assert!((g.eps_clearance - 1.0).abs() < 1e-12);
    let gt = gamma_tilde(&g, 1).unwrap();
    assert_eq!(gt.end(), two_pi_i(1));
    let l = gt.end_lifted();
    assert!((l.arg - Qd::pi().mul_pow2(-1)).abs().to_f64() < 1e-60);
    let gm = gamma_tilde(&PathLog::<Qd>::segment_gamma_m(-1).unwrap(), -1).unwrap();
    assert!((gm.end_lifted().arg + Qd::pi().mul_pow2(-1)).abs().to_f64() < 1e-60);

    let bad = PathLog::<Qd>::polyline(vec![cx(1.0, 0.0), cx(0.1, 6.2)], PathOptions::default());
    assert!(matches!(bad, Err(Error::PathTooCloseToLattice { lattice: 1, .. })));
    let bad = PathLog::<Qd>::polyline(vec![cx(1.0, 0.0), cx(-1.0, 0.0)], PathOptions::default());
    assert!(matches!(bad, Err(Error::PathThroughOrigin) | Err(Error::PathTooCloseToLattice { .. })));

    // a loop around the origin winds the lift by 2π
    let sq = vec![cx(1.0, 0.0), cx(1.0, 1.0), cx(-1.0, 1.0), cx(-1.0, -1.0), cx(1.0, -1.0), cx(1.0, -0.0001)];
    let p = PathLog::<Qd>::new(sq, Qd::zero(), PathOptions { eps: 0.5, ..Default::default() }).unwrap();
    assert!((p.end_lifted().arg.to_f64() - 2.0 * std::f64::consts::PI).abs() < 1e-3);
}

#[test]
fn continuation_of_b_alpha_for_rho_zero() {
    let d = GermData::<Qd>::new(&GermSpec::rho0(), 80).unwrap();
    let setup = FormalSetup::new(&d, two_pi_i(1), 0).unwrap();
    let g = borel_frac(&setup.alpha_data.b_alpha, d.radius_r).unwrap();
    let path = gamma_tilde(&PathLog::<Qd>::segment_gamma_m(1).unwrap(), 1).unwrap();
    let last = path.segments() - 1;
    let v = cont_b_alpha(&g, &path, last, Qd::one());
    assert!(cabs_f64(v - two_pi_i(1)) < 1e-40, "{:e}", cabs_f64(v - two_pi_i(1)));
}

#[test]
fn laplace_oracles() {
    let one = EntireFn::<Dd>::from_coeffs(vec![Complex::one()], 1.0);
    let z: Cx<Dd> = cx(3.0, 1.0);
    let v = laplace_ray(LaplaceInput::Entire(&one), 0.0, z, 1e-25).unwrap();
    assert!(cabs_f64(v * z - cx(1.0, 0.0)) < 1e-24);

    let alpha: Cx<Dd> = cx(0.3, 1.5);
    let g = BranchedGerm {
        gamma: alpha,
        entire: EntireFn::from_coeffs(vec![Complex::<Dd>::one() / gamma_complex(alpha + cx(1.0, 0.0)).unwrap()], 1.0),
    };
    let z: Cx<Dd> = cx(4.0, -1.0);
    let v = laplace_ray(LaplaceInput::Branched(&g), 0.0, z, 1e-25).unwrap();
    let want = cexp(-(alpha + cx(1.0, 0.0)) * cln(z));
    assert!(cabs_f64(v - want) < 1e-22 * cabs_f64(want), "{:e}", cabs_f64(v - want));

    let e = EntireFn::<Dd>::from_coeffs(vec![Complex::one(), Complex::one()], 2.0);
    assert!(matches!(laplace_ray(LaplaceInput::Entire(&e), 0.0, cx(1.5, 0.0), 1e-10), Err(Error::DivergentLaplace(_))));
}



#[test]
fn kernel_record_round_trips_bit_exactly() {
    let d = GermData::<Qd>::new(&GermSpec::quad(), 60).unwrap();
    let k = build_kernel_auto(&d, two_pi_i(1), 7.0, 1e-30).unwrap();
    let text = serde_json::to_string(&k.record()).unwrap();
    let back = KernelTable::<Qd>::from_record(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.u, k.u);
    assert_eq!(back.error_bound, k.error_bound);
    assert!(KernelTable::<Dd>::from_record(&k.record()).is_err());
}
