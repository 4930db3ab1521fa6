//! The acceptance suite: one check per criterion, each reporting a single
//! pass/fail line. Shared by `resurge selftest` and the `acceptance` test target.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex;
use num_traits::{One, Zero};

use resurge_core::alien::{bridge_check, prepare, residua, residua_with, QuadConfig, QuadGrid};
use resurge_core::borel::{borel_frac, borel_int, gamma_tilde, laplace_ray, LaplaceInput, PathLog, PathOptions};
use resurge_core::horn::{Oracle, OracleConfig};
use resurge_core::numeric::{cabs_f64, cexp, cln, cx, to_c64, two_pi_i, Cx, Dd, Qd, Real};
use resurge_core::series::{op_e, phi_sequence_formal, psi_sequence, solve_phi_tilde, FormalSetup, GermData, GermSpec, IntSeries};
use resurge_core::alien::HornSide;
use resurge_core::Result;

pub const COUNT: usize = 14;

#[derive(Clone, Debug)]
pub struct Report {
    pub id: usize,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Report {
    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("[{tag}] #{} {}: {} ({:.1} s)", self.id, self.title, self.detail, self.seconds)
    }
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "trivial germ",
        2 => "closed-form Borel images",
        3 => "residuum closed form",
        4 => "operator/Borel duality",
        5 => "exponential identity",
        6 => "Borel-sum identity",
        7 => "bridge identity",
        8 => "path-homotopy independence",
        9 => "N-stability",
        10 => "geometric decay",
        11 => "cross-method agreement",
        12 => "Laplace identity",
        13 => "oracle internal checks",
        14 => "quadrature sanity",
        _ => "unknown",
    }
}

/// Run criterion `id` (1..=14).
pub fn run(id: usize) -> Report {
    let t = Instant::now();
    let out = match id {
        1 => c1(),
        2 => c2(),
        3 => c3(),
        4 => c4(),
        5 => c5(),
        6 => c6(),
        7 => c7(),
        8 => c8(),
        9 => c9(),
        10 => c10(),
        11 => c11(),
        12 => c12(),
        13 => c13(),
        14 => c14(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let seconds = t.elapsed().as_secs_f64();
    let (mut pass, mut detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
    // wall-clock limits
    let limit = match id {
        1 => Some(10.0),
        11 => Some(300.0),
        _ => None,
    };
    if let Some(l) = limit {
        if seconds >= l {
            pass = false;
            detail.push_str(&format!("; runtime {seconds:.1} s ≥ {l} s"));
        }
    }
    Report { id, title: title(id), pass, detail, seconds }
}

type Check = Result<(bool, String)>;

fn rel(a: Complex<f64>, b: Complex<f64>) -> f64 {
    if b.norm() == 0.0 {
        a.norm()
    } else {
        (a - b).norm() / b.norm()
    }
}

fn polar<R: Real>(r: f64, turns: f64) -> Cx<R> {
    cx(r * (turns * PI).cos(), r * (turns * PI).sin())
}

fn gamma1<R: Real>() -> Result<PathLog<R>> {
    PathLog::segment_gamma_m(1)
}

fn c1() -> Check {
    let data = GermData::<Qd>::new(&GermSpec::translation(), 40)?;
    let mut worst: f64 = 0.0;
    for m in [1, -1, 2] {
        let r = residua(&data, m, &PathLog::segment_gamma_m(m)?, 6, &QuadConfig::default())?;
        worst = r.s.iter().chain([&r.sum, &r.a]).map(|z| cabs_f64(*z)).fold(worst, f64::max);
    }
    let o = Oracle::new(&data, OracleConfig::default())?;
    for side in [HornSide::Up, HornSide::Low] {
        let f = o.horn_fourier(side)?;
        worst = f.a.values().chain([&f.const_term]).map(|z| cabs_f64(*z)).fold(worst, f64::max);
    }
    Ok((worst < 1e-12, format!("max |S_k|, |A_m| = {worst:.1e} (< 1e-12)")))
}

fn fact(n: usize) -> Qd {
    (1..=n).fold(Qd::one(), |a, k| a * Qd::from_i64(k as i64))
}

fn c2() -> Check {
    let mut worst: f64 = 0.0;
    let q = GermData::<Qd>::new(&GermSpec::quad(), 41)?;
    let e = borel_int(&q.b, q.radius_r);
    for n in 0..=40 {
        let want = Qd::from_f64(2.0).powi(n as i32) / fact(n);
        worst = worst.max(cabs_f64(e.coeffs[n] - Complex::new(want, Qd::zero())) / want.to_f64());
    }
    let r = GermData::<Qd>::new(&GermSpec::rho0(), 42)?;
    let e = borel_int(&r.b, r.radius_r);
    worst = worst.max(cabs_f64(e.coeffs[0]));
    for n in 1..=40 {
        let want = Qd::one() / fact(n - 1);
        worst = worst.max(cabs_f64(e.coeffs[n] - Complex::new(want, Qd::zero())) / want.to_f64());
    }
    Ok((worst < 1e-12, format!("max rel. coefficient error {worst:.1e} through n = 40 (< 1e-12)")))
}

fn c3() -> Check {
    let data = GermData::<Qd>::new(&GermSpec::rho0(), 40)?;
    let r = residua(&data, 1, &gamma1()?, 0, &QuadConfig::default())?;
    let want = Complex::new(-4.0 * PI * PI, 0.0);
    let e = rel(to_c64(r.s[0]), want);
    Ok((e < 1e-10, format!("S_0 = {:.12}, rel. error {e:.1e} (< 1e-10)", to_c64(r.s[0]).re)))
}

fn c4() -> Check {
    let order = 42;
    let phi = op_e(&IntSeries::<Qd>::monomial(2, order))?;
    // ζ/(e^ζ-1) = 1/a(ζ), a_n = 1/(n+1)!, by series reciprocal
    let a: Vec<Qd> = (0..=41).map(|n| Qd::one() / fact(n + 1)).collect();
    let mut r = vec![Qd::zero(); 41];
    for n in 0..=40 {
        let mut s = if n == 0 { Qd::one() } else { Qd::zero() };
        for j in 1..=n {
            s -= a[j] * r[n - j];
        }
        r[n] = s / a[0];
    }
    let mut worst: f64 = 0.0;
    for n in 0..=40 {
        let want = r[n] * fact(n);
        let got = phi.coeffs[n + 1];
        let err = cabs_f64(got - Complex::new(want, Qd::zero())) / want.to_f64().abs().max(1.0);
        worst = worst.max(err);
    }
    let lead: Vec<String> = (1..=3).map(|n| format!("{:.4}", to_c64(phi.coeffs[n]).re)).collect();
    Ok((worst < 1e-12, format!("E(z^-2) = {} …, max error {worst:.1e} through order 40 (< 1e-12)", lead.join(", "))))
}

fn c5() -> Check {
    let (dd, k_max) = (40, 30);
    let d = GermData::<Qd>::new(&GermSpec::quad(), dd + k_max + 1)?;
    let om = two_pi_i::<Qd>(1);
    let psi = psi_sequence(&d, om, k_max)?;
    let mut sum = IntSeries::<Qd>::zero(dd);
    for p in &psi {
        sum = sum.add(&p.truncate(dd));
    }
    let want = solve_phi_tilde(&d)?.scale(-om).exp()?.truncate(dd);
    let err = |s: &IntSeries<Qd>, upto: usize| {
        (0..=upto).map(|n| cabs_f64(s.coeffs[n] - want.coeffs[n]) / cabs_f64(want.coeffs[n])).fold(0.0, f64::max)
    };
    let e30 = err(&sum, k_max);
    let deep = d.with_depth(2 * dd + 1)?;
    let mut full = sum.clone();
    for p in psi_sequence(&deep, om, dd)?.iter().skip(k_max + 1) {
        full = full.add(&p.truncate(dd));
    }
    let e40 = err(&full, dd);
    Ok((e30 < 1e-10 && e40 < 1e-10, format!("Σ_{{k≤30}}: rel. {e30:.1e} through order 30; Σ_{{k≤40}}: rel. {e40:.1e} through order 40 (< 1e-10)")))
}

fn c6() -> Check {
    let (k_max, n_max) = (40, 10);
    let d = GermData::<Dd>::new(&GermSpec::quad(), n_max + k_max + 8)?;
    let setup = FormalSetup::new(&d, two_pi_i(1), 0)?;
    let phis = phi_sequence_formal(&d, &setup, k_max)?;
    let target = setup.target();
    let mut sum = phis[0].clone();
    let mut err0 = Vec::new();
    for p in &phis[1..] {
        sum = sum.add(p);
        err0.push(cabs_f64(sum.coeffs[0] - target.coeffs[0]) / cabs_f64(target.coeffs[0]));
    }
    // both series carry z^{-β-1-n}, so Borel coefficients share the Γ factor
    let errs: Vec<f64> = (0..=n_max).map(|n| cabs_f64(sum.coeffs[n] - target.coeffs[n]) / cabs_f64(target.coeffs[n])).collect();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let ratio = (err0[k_max - 1] / err0[k_max - 21]).powf(1.0 / 20.0);
    Ok((
        worst < 1e-8,
        format!(
            "terminal rel. error {:.1e} (index 0) to {worst:.1e} (max over n ≤ 10), geometric ratio {ratio:.4} (< 1e-8 required)",
            errs[0]
        ),
    ))
}

fn c7() -> Check {
    let mut worst_rel: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    let cfg = QuadConfig::default();
    for spec in [GermSpec::<Qd>::quad(), GermSpec::rho0()] {
        let data = GermData::new(&spec, 40)?;
        let r = residua(&data, 1, &gamma1()?, 3, &cfg)?;
        let prep = prepare(&data, 1, 0, 8.0, cfg.kernel_tol)?;
        for z0 in [polar::<Qd>(0.3, 0.25), polar(0.2, -1.0 / 3.0)] {
            for v in bridge_check(&data, &prep, &r.s, 3, z0, &cfg)? {
                if v.k == 0 {
                    worst_abs = worst_abs.max(v.abs_error);
                } else {
                    worst_rel = worst_rel.max(v.rel_error);
                }
            }
        }
    }
    Ok((worst_rel < 1e-6 && worst_abs < 1e-10, format!("k=1..3 max rel. {worst_rel:.1e} (< 1e-6), k=0 variation {worst_abs:.1e} (< 1e-10)")))
}

fn c8() -> Check {
    let cfg = QuadConfig { kernel_tol: 1e-25, ..Default::default() };
    let detour = PathLog::<Dd>::polyline(vec![cx(1.0, 0.0), cx(2.0, 1.5), cx(2.0, 4.5), cx(1.0, 2.0 * PI)], PathOptions::default())?;
    let mut worst: f64 = 0.0;
    for spec in [GermSpec::<Dd>::quad(), GermSpec::rho0()] {
        let data = GermData::new(&spec, 40)?;
        let a = residua(&data, 1, &gamma1()?, 6, &cfg)?;
        let b = residua(&data, 1, &detour, 6, &cfg)?;
        for k in 0..=6 {
            worst = worst.max(rel(to_c64(b.s[k]), to_c64(a.s[k])));
        }
    }
    Ok((worst < 1e-8, format!("max rel. difference of S_k, k ≤ 6: {worst:.1e} (< 1e-8)")))
}

fn c9() -> Check {
    let data = GermData::<Dd>::new(&GermSpec::quad(), 40)?;
    let cfg = QuadConfig { kernel_tol: 1e-25, ..Default::default() };
    let a = residua_with(&data, 1, &gamma1()?, 4, &cfg, 0)?;
    let b = residua_with(&data, 1, &gamma1()?, 4, &cfg, 2)?;
    let e = rel(to_c64(b.sum), to_c64(a.sum));
    Ok((e < 1e-8, format!("N = {} vs {}: S^Γ_ω rel. difference {e:.1e} (< 1e-8)", a.n, b.n)))
}

fn c10() -> Check {
    let cfg = QuadConfig { kernel_tol: 1e-25, ..Default::default() };
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, spec) in [("quad", GermSpec::<Dd>::quad()), ("rho0", GermSpec::rho0())] {
        let data = GermData::new(&spec, 40)?;
        let r = residua(&data, 1, &gamma1()?, 10, &cfg)?;
        let (lam, c) = (r.lambda_fit, r.c_fit);
        let excess = r.s.iter().enumerate().map(|(k, z)| cabs_f64(*z) / (c * lam.powi(k as i32))).fold(0.0, f64::max);
        pass &= lam < 1.0 && excess <= 2.0;
        parts.push(format!("{name}: Λ = {lam:.3}, max |S_k|/(CΛ^k) = {excess:.2}"));
    }
    Ok((pass, format!("{} (Λ < 1, envelope 2CΛ^k)", parts.join("; "))))
}

fn c11() -> Check {
    let data = GermData::<Qd>::new(&GermSpec::rho0(), 40)?;
    let o = Oracle::new(&data, OracleConfig::default())?;
    let low = o.horn_fourier(HornSide::Low)?;
    let up = o.horn_fourier(HornSide::Up)?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (m, oracle) in [(1, low.coefficient(-1)?), (-1, up.coefficient(1)?)] {
        let r = residua(&data, m, &PathLog::segment_gamma_m(m)?, 12, &QuadConfig::default())?;
        let e = rel(to_c64(oracle), to_c64(r.a));
        worst = worst.max(e);
        let a = to_c64(r.a);
        parts.push(format!("A_{} = {:.6}{:+.6}i (rel. {e:.1e})", -m, a.re, a.im));
    }
    Ok((worst < 1e-3, format!("{} (< 1e-3)", parts.join(", "))))
}

fn c12() -> Check {
    let data = GermData::<Dd>::new(&GermSpec::quad(), 60)?;
    let setup = FormalSetup::new(&data, two_pi_i(1), 0)?;
    let lhs_g = borel_frac(&setup.alpha_data.b_alpha, data.radius_r)?;
    let rhs_g = borel_int(&setup.alpha_data.q, data.radius_r);
    let mut worst: f64 = 0.0;
    for z in [cx::<Dd>(8.0, 0.0), polar(8.0, -1.0 / 8.0)] {
        let lhs = laplace_ray(LaplaceInput::Branched(&lhs_g), 0.0, z, 1e-24)?;
        let rhs = cexp(-(setup.alpha * cln(z))) * laplace_ray(LaplaceInput::Entire(&rhs_g), 0.0, z, 1e-24)?;
        worst = worst.max(cabs_f64(lhs - rhs) / cabs_f64(rhs));
    }
    Ok((worst < 1e-8, format!("max rel. difference {worst:.1e} at z = 8, 8e^(-iπ/8) (< 1e-8)")))
}

fn c13() -> Check {
    let mut abel: f64 = 0.0;
    for spec in [GermSpec::<Dd>::quad(), GermSpec::rho0()] {
        let o = Oracle::new(&GermData::new(&spec, 40)?, OracleConfig::default())?;
        for x in [0.5, 3.0, 8.0] {
            for y in [-3.0, -1.5, 1.5, 3.0] {
                let z = cx(x, y);
                abel = abel.max(cabs_f64(o.abel_residual(z)?));
            }
        }
    }
    let data = GermData::<Dd>::new(&GermSpec::quad(), 40)?;
    let low = Oracle::new(&data, OracleConfig::default())?.horn_fourier(HornSide::Low)?;
    let want = to_c64(-(data.rho * two_pi_i(1)));
    let e = rel(to_c64(low.const_term), want);
    Ok((abel < 1e-10 && e < 1e-4, format!("Abel residual {abel:.1e} (< 1e-10); low constant {:.6}i, rel. {e:.1e} (< 1e-4)", to_c64(low.const_term).im)))
}

fn c14() -> Check {
    let cfg = QuadConfig { kernel_tol: 1e-25, ..Default::default() };
    let path = gamma_tilde(&gamma1::<Dd>()?, 1)?;
    let grid = QuadGrid::layout(&path, &cfg, Complex::new(Dd::zero(), Dd::zero()))?;
    let integral = cabs_f64(grid.integrate(cexp));
    let mut ok = integral < 1e-12;
    let mut ratio: f64 = 0.0;
    for spec in [GermSpec::<Dd>::quad(), GermSpec::rho0()] {
        let data = GermData::new(&spec, 40)?;
        let a = residua(&data, 1, &gamma1()?, 10, &cfg)?;
        let b = residua(&data, 1, &gamma1()?, 10, &QuadConfig { panel_nodes: 2 * cfg.panel_nodes, ..cfg })?;
        for k in 0..=10 {
            let d = cabs_f64(a.s[k] - b.s[k]);
            ok &= d <= a.err[k];
            ratio = ratio.max(d / a.err[k]);
        }
    }
    Ok((ok, format!("|∫ e^ζ| = {integral:.1e} (< 1e-12); max |ΔS_k|/err_k on doubling = {ratio:.1e} (≤ 1)")))
}
