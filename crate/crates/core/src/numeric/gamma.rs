//! Complex Gamma function: reflection for Re s < 1/2, upward shift and the
//! Stirling series (exact Bernoulli coefficients) otherwise.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{bernoulli_numbers, cexp, cinv, cln, real_from_ratio, Cx, Real};
use crate::error::{Error, Result};

fn is_pole<R: Real>(s: Cx<R>) -> bool {
    s.im == R::zero() && s.re <= R::zero() && s.re == s.re.round()
}

fn csin<R: Real>(z: Cx<R>) -> Cx<R> {
    let iz = Complex::new(-z.im, z.re);
    let a = cexp(iz);
    let b = cexp(-iz);
    let d = a - b;
    // (a - b) / (2i)
    Complex::new(d.im, -d.re).scale(R::from_f64(0.5))
}

/// Stirling sum for ln Γ(z), valid for large |z| in the right half-plane.
fn ln_gamma_stirling<R: Real>(z: Cx<R>) -> Cx<R> {
    let half = R::from_f64(0.5);
    let two_pi = R::pi().mul_pow2(1);
    let mut acc = (z - Complex::new(half, R::zero())) * cln(z) - z
        + Complex::new(two_pi.ln() * half, R::zero());
    let bern = bernoulli_numbers(240);
    let zi = cinv(z);
    let zi2 = zi * zi;
    let mut p = zi;
    let eps = R::epsilon().to_f64();
    let scale = acc.re.to_f64().abs().max(acc.im.to_f64().abs()).max(1.0);
    for j in 1..120 {
        let b: R = real_from_ratio(&bern[2 * j]);
        let c = b / R::from_i64((2 * j * (2 * j - 1)) as i64);
        let term = p.scale(c);
        acc = acc + term;
        let t = term.re.to_f64().hypot(term.im.to_f64());
        if t < eps * scale * 0.25 {
            break;
        }
        p = p * zi2;
    }
    acc
}

fn shift_target<R: Real>() -> f64 {
    R::PREC_BITS as f64 * 0.12 + 4.0
}

/// ln Γ(s) for Re s ≥ 1/2 (branch: principal Stirling branch minus logs of
/// the shift factors; only its exponential is used downstream).
pub fn ln_gamma_complex<R: Real>(s: Cx<R>) -> Result<Cx<R>> {
    if is_pole(s) {
        return Err(Error::PoleOfGamma(s.re.to_f64()));
    }
    let target = shift_target::<R>();
    let mut z = s;
    let mut prod = Complex::<R>::one();
    while z.re.to_f64() < target {
        prod = prod * z;
        z = z + Complex::new(R::one(), R::zero());
    }
    Ok(ln_gamma_stirling(z) - cln(prod))
}

/// Γ(s) at working precision.
pub fn gamma_complex<R: Real>(s: Cx<R>) -> Result<Cx<R>> {
    if is_pole(s) {
        return Err(Error::PoleOfGamma(s.re.to_f64()));
    }
    if s.re.to_f64() < 0.5 {
        // Γ(s) = π / (sin(πs) Γ(1-s))
        let pi = R::pi();
        let one_minus = Complex::new(R::one(), R::zero()) - s;
        let g = gamma_complex(one_minus)?;
        let sn = csin(s.scale(pi));
        return Ok(cinv(sn * g).scale(pi));
    }
    let target = shift_target::<R>();
    let mut z = s;
    let mut prod = Complex::<R>::one();
    while z.re.to_f64() < target {
        prod = prod * z;
        z = z + Complex::new(R::one(), R::zero());
    }
    let lg = ln_gamma_stirling(z);
    let g = cexp(lg);
    if prod.is_zero() {
        return Err(Error::PoleOfGamma(s.re.to_f64()));
    }
    Ok(g * cinv(prod))
}
