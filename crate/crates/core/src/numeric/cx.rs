use num_complex::Complex;
use num_traits::Zero;

use super::Real;

pub type Cx<R> = Complex<R>;

#[inline]
pub fn cx<R: Real>(re: f64, im: f64) -> Cx<R> {
    Complex::new(R::from_f64(re), R::from_f64(im))
}

#[inline]
pub fn cx_real<R: Real>(re: R) -> Cx<R> {
    Complex::new(re, R::zero())
}

/// 2πi·m at working precision.
pub fn two_pi_i<R: Real>(m: i64) -> Cx<R> {
    Complex::new(R::zero(), R::pi().mul_pow2(1) * R::from_i64(m))
}

pub fn cabs<R: Real>(z: Cx<R>) -> R {
    let (a, b) = (z.re.abs(), z.im.abs());
    if a == R::zero() {
        return b;
    }
    if b == R::zero() {
        return a;
    }
    (a * a + b * b).sqrt()
}

#[inline]
pub fn cabs_f64<R: Real>(z: Cx<R>) -> f64 {
    z.re.to_f64().hypot(z.im.to_f64())
}

pub fn carg<R: Real>(z: Cx<R>) -> R {
    z.im.atan2(z.re)
}

pub fn cexp<R: Real>(z: Cx<R>) -> Cx<R> {
    let e = z.re.exp();
    let (s, c) = z.im.sin_cos();
    Complex::new(e * c, e * s)
}

/// e^z - 1 without cancellation for small |z|.
pub fn cexpm1<R: Real>(z: Cx<R>) -> Cx<R> {
    let (s, c) = z.im.sin_cos();
    let em1 = z.re.expm1();
    let half = z.im.mul_pow2(-1);
    let (sh, _) = half.sin_cos();
    // cos y - 1 = -2 sin^2(y/2)
    let cm1 = -(sh * sh).mul_pow2(1);
    Complex::new(em1 * c + cm1, (em1 + R::one()) * s)
}

/// Principal logarithm, arg in (-π, π].
pub fn cln<R: Real>(z: Cx<R>) -> Cx<R> {
    Complex::new(cabs(z).ln(), carg(z))
}

/// Logarithm with a prescribed imaginary part (lifted argument).
pub fn cln_lifted<R: Real>(modulus: R, arg: R) -> Cx<R> {
    Complex::new(modulus.ln(), arg)
}

/// Principal power z^w (z ≠ 0).
pub fn cpow<R: Real>(z: Cx<R>, w: Cx<R>) -> Cx<R> {
    if z.is_zero() {
        return Complex::zero();
    }
    cexp(w * cln(z))
}

pub fn cinv<R: Real>(z: Cx<R>) -> Cx<R> {
    let d = z.re * z.re + z.im * z.im;
    Complex::new(z.re / d, -z.im / d)
}

pub fn csqrt<R: Real>(z: Cx<R>) -> Cx<R> {
    if z.is_zero() {
        return z;
    }
    let r = cabs(z);
    let half = R::from_f64(0.5);
    let a = ((r + z.re.abs()) * half).sqrt();
    if z.re >= R::zero() {
        Complex::new(a, z.im / a.mul_pow2(1))
    } else {
        let b = if z.im < R::zero() { -a } else { a };
        Complex::new(z.im.abs() / a.mul_pow2(1), b)
    }
}

pub fn cscale<R: Real>(z: Cx<R>, s: R) -> Cx<R> {
    Complex::new(z.re * s, z.im * s)
}

pub fn cis_finite<R: Real>(z: Cx<R>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn to_c64<R: Real>(z: Cx<R>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn from_c64<R: Real>(z: Complex<f64>) -> Cx<R> {
    Complex::new(R::from_f64(z.re), R::from_f64(z.im))
}

pub fn convert<R: Real, S: Real>(z: Cx<R>) -> Cx<S> {
    Complex::new(S::from_parts(&z.re.parts()), S::from_parts(&z.im.parts()))
}
