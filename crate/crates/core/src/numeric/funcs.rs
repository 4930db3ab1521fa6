//! Elementary functions for the multi-double types, written against the
//! `Real` arithmetic only. Speed is secondary: none of these sit in the
//! quadrature inner loops.

use super::Real;

fn newton_steps<R: Real>() -> usize {
    // quadratic convergence from a 53-bit seed
    let mut bits = 50u32;
    let mut n = 0;
    while bits < R::PREC_BITS + 4 {
        bits *= 2;
        n += 1;
    }
    n
}

pub(crate) fn sqrt<R: Real>(a: R) -> R {
    if a <= R::zero() {
        return if a == R::zero() { R::zero() } else { R::from_f64(f64::NAN) };
    }
    let mut y = R::from_f64(a.to_f64().sqrt());
    let half = R::from_f64(0.5);
    for _ in 0..newton_steps::<R>() {
        y = (y + a / y) * half;
    }
    y
}

/// Taylor sum of e^r - 1 for small |r|.
fn expm1_taylor<R: Real>(r: R) -> R {
    let eps = R::epsilon();
    let mut term = r;
    let mut sum = r;
    let mut n = 1i64;
    loop {
        n += 1;
        term = term * r / R::from_i64(n);
        sum += term;
        if term.abs() <= eps * sum.abs() || n > 200 {
            break;
        }
    }
    sum
}

pub(crate) fn exp<R: Real>(x: R) -> R {
    let xf = x.to_f64();
    if xf > 709.0 {
        return R::from_f64(f64::INFINITY);
    }
    if xf < -745.0 {
        return R::zero();
    }
    let ln2 = R::ln2();
    let k = (x / ln2).round();
    let r = x - k * ln2;
    let s = 12;
    let mut t = expm1_taylor(r.mul_pow2(-s));
    // (1+t)^2 - 1 = t(2+t), repeated s times
    let two = R::from_f64(2.0);
    for _ in 0..s {
        t = t * (two + t);
    }
    (R::one() + t).mul_pow2(k.to_f64() as i32)
}

pub(crate) fn expm1<R: Real>(x: R) -> R {
    if x.abs().to_f64() < 0.5 {
        expm1_taylor(x)
    } else {
        exp(x) - R::one()
    }
}

pub(crate) fn ln<R: Real>(x: R) -> R {
    if x <= R::zero() {
        return R::from_f64(if x == R::zero() { f64::NEG_INFINITY } else { f64::NAN });
    }
    let mut y = R::from_f64(x.to_f64().ln());
    for _ in 0..newton_steps::<R>() {
        y = y + x * exp(-y) - R::one();
    }
    y
}

fn sin_cos_taylor<R: Real>(r: R) -> (R, R) {
    let eps = R::epsilon();
    let r2 = r * r;
    let mut term = r;
    let mut s = r;
    let mut n = 1i64;
    loop {
        term = -term * r2 / R::from_i64((n + 1) * (n + 2));
        n += 2;
        s += term;
        if term.abs() <= eps * s.abs().max(eps) || n > 200 {
            break;
        }
    }
    let mut term = R::one();
    let mut c = R::one();
    let mut n = 0i64;
    loop {
        term = -term * r2 / R::from_i64((n + 1) * (n + 2));
        n += 2;
        c += term;
        if term.abs() <= eps || n > 200 {
            break;
        }
    }
    (s, c)
}

pub(crate) fn sin_cos<R: Real>(x: R) -> (R, R) {
    let half_pi = R::pi().mul_pow2(-1);
    let j = (x / half_pi).round();
    let r = x - j * half_pi;
    let (s, c) = sin_cos_taylor(r);
    match (j.to_f64() as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

pub(crate) fn atan2<R: Real>(y: R, x: R) -> R {
    if x == R::zero() && y == R::zero() {
        return R::zero();
    }
    let r = sqrt(x * x + y * y);
    let (xn, yn) = (x / r, y / r);
    let mut t = R::from_f64(y.to_f64().atan2(x.to_f64()));
    for _ in 0..newton_steps::<R>() {
        let (s, c) = sin_cos(t);
        // f(t) = yn cos t - xn sin t vanishes at the angle
        t += (yn * c - xn * s) / (xn * c + yn * s);
    }
    t
}

fn atan_inv<R: Real>(n: i64) -> R {
    // atan(1/n) = sum (-1)^k / ((2k+1) n^(2k+1))
    let eps = R::epsilon();
    let x = R::one() / R::from_i64(n);
    let x2 = x * x;
    let mut p = x;
    let mut sum = x;
    let mut k = 0i64;
    loop {
        k += 1;
        p = -p * x2;
        let term = p / R::from_i64(2 * k + 1);
        sum += term;
        if term.abs() < eps * sum.abs() {
            break;
        }
    }
    sum
}

pub(crate) fn machin_pi<R: Real>() -> R {
    R::from_f64(16.0) * atan_inv::<R>(5) - R::from_f64(4.0) * atan_inv::<R>(239)
}

pub(crate) fn series_ln2<R: Real>() -> R {
    // ln 2 = 2 atanh(1/3)
    let eps = R::epsilon();
    let x = R::one() / R::from_f64(3.0);
    let x2 = x * x;
    let mut p = x;
    let mut sum = x;
    let mut k = 0i64;
    loop {
        k += 1;
        p *= x2;
        let term = p / R::from_i64(2 * k + 1);
        sum += term;
        if term < eps * sum {
            break;
        }
    }
    sum.mul_pow2(1)
}
