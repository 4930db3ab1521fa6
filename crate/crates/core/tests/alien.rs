use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use proptest::prelude::*;

use resurge_core::alien::*;
use resurge_core::borel::*;
use resurge_core::numeric::*;
use resurge_core::series::*;
use resurge_core::Error;

fn gamma1<R: Real>() -> PathLog<R> {
    PathLog::segment_gamma_m(1).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn rho0_first_residuum_is_minus_four_pi_squared() {
    let data = GermData::<Qd>::new(&GermSpec::rho0(), 40).unwrap();
    let r = residua(&data, 1, &gamma1(), 2, &QuadConfig::default()).unwrap();
    let want = -4.0 * std::f64::consts::PI.powi(2);
    assert!(rel(to_c64(r.s[0]), Complex64::new(want, 0.0)) < 1e-10, "{:?}", r.s[0]);
    assert_eq!(r.n, 0);
    assert!(cabs_f64(r.alpha) == 0.0);
}

// f64 brute force over the simplex for f = z+1+z^{-2}: b̂(ζ) = ζe^ζ and
// K(ξ, ζ) = e^η Σ_{k≥1} (-ξ)^k η^{2k-1} / (k!(2k-1)!), η = ζ - ξ.
fn k_rho0(xi: Complex64, zeta: Complex64) -> Complex64 {
    let eta = zeta - xi;
    let mut term = -xi * eta; // k = 1: (-ξ)η / (1!·1!)
    let mut acc = term;
    for k in 2..60 {
        let kf = k as f64;
        term = term * (-xi) * eta * eta / (kf * (2.0 * kf - 1.0) * (2.0 * kf - 2.0));
        acc += term;
        if term.norm() < 1e-18 * acc.norm() {
            break;
        }
    }
    acc * eta.exp()
}

fn brute_force_s1_s2() -> (Complex64, Complex64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let verts = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, two_pi), Complex64::new(0.0, two_pi)];
    let h = 0.004;
    let mut pts = vec![verts[0]];
    let mut dz = vec![];
    for w in verts.windows(2) {
        let n = ((w[1] - w[0]).norm() / h).ceil() as usize;
        for j in 1..=n {
            pts.push(w[0] + (w[1] - w[0]) * (j as f64 / n as f64));
            dz.push((w[1] - w[0]) / n as f64);
        }
    }
    let n = pts.len();
    let om = pts[n - 1];
    let f0 = |s: Complex64| if s.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { s * s.exp() / (s.exp() - 1.0) };
    // ∫ over [pts_0, pts_j] of g(σ) by trapezoid
    let trap = |vals: &[Complex64], j: usize| -> Complex64 { (0..j).map(|i| (vals[i] + vals[i + 1]) * dz[i] * 0.5).sum() };
    let mut g1 = vec![Complex64::zero(); n];
    for j in 1..n {
        let target = pts[j];
        let mut vals: Vec<Complex64> = (0..=j).map(|i| f0(pts[i]) * k_rho0(pts[i], target)).collect();
        if j == n - 1 {
            vals[j] = vals[j - 1] * 2.0 - vals[j - 2];
        }
        g1[j] = trap(&vals, j);
    }
    let s1 = Complex64::new(0.0, two_pi) * g1[n - 1];
    let mut vals: Vec<Complex64> = (0..n).map(|i| if i == 0 || i == n - 1 { Complex64::zero() } else { g1[i] / (pts[i].exp() - 1.0) * k_rho0(pts[i], om) }).collect();
    vals[0] = vals[1] * 2.0 - vals[2];
    vals[n - 1] = vals[n - 2] * 2.0 - vals[n - 3];
    let s2 = Complex64::new(0.0, two_pi) * trap(&vals, n - 1);
    (s1, s2)
}

#[test]
fn rho0_higher_residua_match_brute_force_simplex() {
    let (s1, s2) = brute_force_s1_s2();
    let data = GermData::<Dd>::new(&GermSpec::rho0(), 40).unwrap();
    let cfg = QuadConfig { kernel_tol: 1e-25, ..Default::default() };
    let r = residua(&data, 1, &gamma1(), 2, &cfg).unwrap();
    assert!(rel(to_c64(r.s[1]), s1) < 1e-3, "{:?} vs {s1}", r.s[1]);
    assert!(rel(to_c64(r.s[2]), s2) < 1e-3, "{:?} vs {s2}", r.s[2]);
}

#[test]
fn trivial_germ_has_vanishing_residua() {
    let data = GermData::<Qd>::new(&GermSpec::translation(), 40).unwrap();
    for m in [1, -1, 2] {
        let g = PathLog::segment_gamma_m(m).unwrap();
        let r = residua(&data, m, &g, 5, &QuadConfig::default()).unwrap();
        assert!(r.s.iter().all(|s| cabs_f64(*s) < 1e-12));
        assert!(cabs_f64(r.a) < 1e-12);
        assert_eq!(r.lambda_fit, 0.0);
    }
}

#[test]
fn gauss_legendre_on_gamma_tilde() {
    let path = gamma_tilde(&gamma1::<Qd>(), 1).unwrap();
    let cfg = QuadConfig::default();
    let grid = QuadGrid::layout(&path, &cfg, Complex::zero()).unwrap();
    assert_eq!(grid.len(), grid.panels.len() * cfg.panel_nodes);
    let v = grid.integrate(cexp);
    assert!(cabs_f64(v) < 1e-12, "{v:?}");
    let w = grid.integrate(|_| Complex::new(Qd::one(), Qd::zero()));
    assert!(cabs_f64(w - two_pi_i(1)) < 1e-40);
    // terminal grading: halving toward ω until below min_panel × length
    let last: Vec<_> = grid.panels.iter().filter(|p| p.seg == path.segments() - 1).collect();
    let lens: Vec<f64> = last.iter().map(|p| (p.t1 - p.t0).to_f64()).collect();
    let smallest = lens.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(smallest < cfg.min_panel * path.length());
    let tail = &lens[lens.len() - 6..];
    for w in tail.windows(2).take(4) {
        assert!((w[1] / w[0] - 0.5).abs() < 1e-12, "{tail:?}");
    }
}

#[test]
fn product_weights_integrate_branch_powers() {
    // ∫_0^1 x^β x^n dx = 1/(β+n+1) for n < p
    let rule: GaussRule<Qd> = GaussRule::new(10);
    let xs: Vec<Qd> = rule.nodes.iter().map(|&x| (x + Qd::one()).mul_pow2(-1)).collect();
    let beta: Cx<Qd> = cx(0.3, 6.0);
    let w = product_weights(&xs, beta, Qd::zero(), Qd::one()).unwrap();
    for n in 0..10 {
        let got = xs.iter().zip(&w).fold(Complex::<Qd>::zero(), |a, (&x, &wl)| a + wl * cexp(beta.scale(x.ln())).scale(x.powi(n)));
        let want = Complex::new(Qd::one(), Qd::zero()) / (beta + cx(n as f64 + 1.0, 0.0));
        assert!(cabs_f64(got - want) < 1e-50, "n = {n}");
    }
}

#[test]
fn last_level_integrand_is_bounded_near_omega() {
    let data = GermData::<Dd>::new(&GermSpec::quad(), 40).unwrap();
    let path = gamma_tilde(&gamma1::<Dd>(), 1).unwrap();
    let prep = prepare(&data, 1, 0, path_extent(&path), 1e-25).unwrap();
    let (grid, _, _) = prep.grid(&path, &QuadConfig::default()).unwrap();
    let om = two_pi_i::<Dd>(1);
    // K(σ, ω)/(e^σ - 1) stays bounded as σ → ω
    let last = grid.len() - 1;
    let near = prep.kernel.eval(grid.points[last], om) * grid.inv_exp[last];
    let mid = prep.kernel.eval(grid.points[last - 12], om) * grid.inv_exp[last - 12];
    assert!(cabs_f64(near).is_finite() && cabs_f64(near) < 10.0 * cabs_f64(mid).max(1.0));
    assert!(cabs_f64(prep.kernel.eval(om, om)) < 1e-20);
}

#[test]
fn continuation_matches_borel_taylor_inside_disk() {
    let data = GermData::<Dd>::new(&GermSpec::quad(), 60).unwrap();
    let zeta: Cx<Dd> = cx(0.8, 0.5);
    let path = PathLog::polyline(vec![Complex::zero(), zeta], PathOptions { origin_start: true, ..Default::default() }).unwrap();
    let cfg = QuadConfig { kernel_tol: 1e-28, ..Default::default() };
    let prep = prepare(&data, 1, 0, path_extent(&path), cfg.kernel_tol).unwrap();
    let setup = FormalSetup::new(&data, two_pi_i(1), 0).unwrap();
    let phis = phi_sequence_formal(&data, &setup, 3).unwrap();
    let lifted = path.end_lifted();
    for k in 0..=3 {
        let taylor = borel_frac(&phis[k].truncate(40), data.radius_r).unwrap().eval(lifted);
        let cont = cont_phi_k(&prep, &path, k, &cfg).unwrap();
        assert!(cabs_f64(cont - taylor) < 1e-20 * cabs_f64(taylor), "k = {k}: {:?} vs {:?}", cont, taylor);
    }
}

#[test]
fn continuation_refuses_lattice_endpoint() {
    let data = GermData::<Dd>::new(&GermSpec::rho0(), 40).unwrap();
    let prep = prepare(&data, 1, 0, 8.0, 1e-20).unwrap();
    let path = gamma_tilde(&gamma1::<Dd>(), 1).unwrap();
    assert_eq!(cont_phi_k(&prep, &path, 1, &QuadConfig::default()), Err(Error::EndpointOnLattice));
}

#[test]
fn residuum_is_the_pole_limit() {
    // (e^ζ - 1) cont Φ̂_k(ζ) → S_k/(2πi) as ζ → ω along Γ̃
    let data = GermData::<Dd>::new(&GermSpec::rho0(), 40).unwrap();
    let cfg = QuadConfig { kernel_tol: 1e-25, ..Default::default() };
    let r = residua(&data, 1, &gamma1(), 2, &cfg).unwrap();
    let om = two_pi_i::<Dd>(1);
    let eps = 1e-7;
    let path = path_to(1, om + cx(eps, 0.0), Some((1, eps / 2.0))).unwrap();
    let prep = prepare(&data, 1, 0, path_extent(&path), cfg.kernel_tol).unwrap();
    for k in 0..=2 {
        let v = cont_phi_k(&prep, &path, k, &cfg).unwrap() * cexpm1(cx(eps, 0.0));
        let want = r.s[k] / two_pi_i(1);
        assert!(cabs_f64(v - want) < 1e-4 * cabs_f64(want), "k = {k}");
    }
}

#[test]
fn bridge_identity_rho0() {
    let data = GermData::<Dd>::new(&GermSpec::rho0(), 40).unwrap();
    let cfg = QuadConfig { kernel_tol: 1e-25, ..Default::default() };
    let r = residua(&data, 1, &gamma1(), 3, &cfg).unwrap();
    let zeta0: Cx<Dd> = cx(0.3 * (0.25f64 * std::f64::consts::PI).cos(), 0.3 * (0.25f64 * std::f64::consts::PI).sin());
    let prep = prepare(&data, 1, 0, 8.0, cfg.kernel_tol).unwrap();
    let rep = bridge_check(&data, &prep, &r.s, 3, zeta0, &cfg).unwrap();
    assert!(rep[0].abs_error < 1e-10);
    for v in &rep[1..] {
        assert!(v.rel_error < 1e-6, "{v:?}");
    }
}

#[test]
fn homotopic_detour_gives_same_residua() {
    let data = GermData::<Dd>::new(&GermSpec::quad(), 40).unwrap();
    let cfg = QuadConfig { kernel_tol: 1e-25, ..Default::default() };
    let a = residua(&data, 1, &gamma1(), 4, &cfg).unwrap();
    let detour = PathLog::<Dd>::polyline(vec![cx(1.0, 0.0), cx(2.0, 1.5), cx(2.0, 4.5), cx(1.0, 2.0 * std::f64::consts::PI)], PathOptions::default()).unwrap();
    let b = residua(&data, 1, &detour, 4, &cfg).unwrap();
    for k in 0..=4 {
        assert!(rel(to_c64(b.s[k]), to_c64(a.s[k])) < 1e-8, "k = {k}");
    }
}

#[test]
fn larger_head_gives_same_sum() {
    let data = GermData::<Dd>::new(&GermSpec::quad(), 40).unwrap();
    let cfg = QuadConfig { kernel_tol: 1e-25, ..Default::default() };
    let a = residua_with(&data, 1, &gamma1(), 2, &cfg, 0).unwrap();
    let b = residua_with(&data, 1, &gamma1(), 2, &cfg, 2).unwrap();
    assert_eq!(b.n, a.n + 2);
    assert!(rel(to_c64(b.sum), to_c64(a.sum)) < 1e-8, "{:?} vs {:?}", b.sum, a.sum);
}

#[test]
fn negative_m_uses_the_up_horn() {
    let data = GermData::<Dd>::new(&GermSpec::rho0(), 40).unwrap();
    let cfg = QuadConfig { kernel_tol: 1e-25, ..Default::default() };
    let r = residua(&data, -1, &PathLog::segment_gamma_m(-1).unwrap(), 2, &cfg).unwrap();
    assert_eq!(r.side, HornSide::Up);
    // 2πi·ω e^ω at ω = -2πi
    assert!(rel(to_c64(r.s[0]), Complex64::new(4.0 * std::f64::consts::PI.powi(2), 0.0)) < 1e-10);
    assert_eq!(r.a, -r.sum);
}

#[test]
fn invariant_map_signs() {
    let s: Cx<Dd> = cx(1.0, 2.0);
    let rho: Cx<Dd> = cx(-1.0, 0.0);
    let a = ev_invariant(s, 1, rho);
    let want = Complex64::new(1.0, 2.0) * (4.0 * std::f64::consts::PI.powi(2)).exp();
    assert!(rel(to_c64(a), want) < 1e-14);
    assert_eq!(ev_invariant(s, -2, rho), -s);
    assert_eq!(horn_side(3), HornSide::Low);
}

#[test]
fn summation_errors() {
    let grow: Vec<Cx<Dd>> = (0..10).map(|k| cx(1.1f64.powi(k), 0.0)).collect();
    assert!(matches!(sum_residua(&grow, 1e-10), Err(Error::ConvergenceNotDetected(_))));
    let slow: Vec<Cx<Dd>> = (0..10).map(|k| cx(0.9f64.powi(k), 0.0)).collect();
    assert!(matches!(sum_residua(&slow, 1e-10), Err(Error::TailNotBounded { .. })));
}

proptest! {
    #[test]
    fn geometric_tail_is_exact(lambda in 0.05f64..0.6, c in 0.5f64..3.0, k_max in 8usize..20) {
        let s: Vec<Cx<Dd>> = (0..=k_max).map(|k| cx(c * lambda.powi(k as i32), 0.0)).collect();
        let mags: Vec<f64> = s.iter().map(|z| cabs_f64(*z)).collect();
        let (l, cf) = fit_lambda(&mags);
        prop_assert!((l - lambda).abs() < 1e-10 && (cf - c).abs() < 1e-9 * c);
        let total = c / (1.0 - lambda);
        let partial: f64 = mags.iter().sum();
        let tail = cf * l.powi(k_max as i32 + 1) / (1.0 - l);
        prop_assert!((partial + tail - total).abs() < 1e-9 * total);
    }
}
