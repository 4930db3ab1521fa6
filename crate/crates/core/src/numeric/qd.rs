//! Quad-double arithmetic (four non-overlapping f64, ~212 bits).
//! Addition and multiplication follow the "sloppy" variants of Hida, Li
//! and Bailey's QD library.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};
use std::sync::OnceLock;

use num_traits::{Num, One, Zero};

use super::dd::{quick_two_sum, two_prod, two_sum};
use super::{funcs, Real};

#[derive(Clone, Copy, Default, Debug, PartialEq)]
pub struct Qd([f64; 4]);

#[inline(always)]
fn three_sum(a: &mut f64, b: &mut f64, c: &mut f64) {
    let (t1, t2) = two_sum(*a, *b);
    let (s, t3) = two_sum(*c, t1);
    *a = s;
    let (s, e) = two_sum(t2, t3);
    *b = s;
    *c = e;
}

#[inline(always)]
fn three_sum2(a: &mut f64, b: &mut f64, c: f64) {
    let (t1, t2) = two_sum(*a, *b);
    let (s, t3) = two_sum(c, t1);
    *a = s;
    *b = t2 + t3;
}

#[inline(always)]
fn renorm(c0: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> [f64; 4] {
    if !c0.is_finite() {
        return [c0, c1, c2, c3];
    }
    let (s0, c4) = quick_two_sum(c3, c4);
    let (s0, c3) = quick_two_sum(c2, s0);
    let (s0, c2) = quick_two_sum(c1, s0);
    let (c0, c1) = quick_two_sum(c0, s0);

    let mut s2 = 0.0;
    let mut s3 = 0.0;
    let (mut s0, mut s1) = quick_two_sum(c0, c1);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
            if s3 != 0.0 {
                s3 += c4;
            } else {
                s2 += c4;
            }
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
            if s1 != 0.0 {
                (s1, s2) = quick_two_sum(s1, c4);
            } else {
                (s0, s1) = quick_two_sum(s0, c4);
            }
        }
    }
    [s0, s1, s2, s3]
}

impl Qd {
    pub fn components(self) -> [f64; 4] {
        self.0
    }

    #[inline(always)]
    fn mul_f64(self, b: f64) -> Qd {
        let a = self.0;
        let (p0, q0) = two_prod(a[0], b);
        let (p1, mut q1) = two_prod(a[1], b);
        let (mut p2, mut q2) = two_prod(a[2], b);
        let p3 = a[3] * b;
        let (s1, mut s2) = two_sum(q0, p1);
        three_sum(&mut s2, &mut q1, &mut p2);
        three_sum2(&mut q1, &mut q2, p3);
        let s3 = q1;
        let s4 = q2 + p2;
        Qd(renorm(p0, s1, s2, s3, s4))
    }
}

impl PartialOrd for Qd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        for i in 0..4 {
            match self.0[i].partial_cmp(&other.0[i]) {
                Some(Ordering::Equal) => continue,
                o => return o,
            }
        }
        Some(Ordering::Equal)
    }
}

impl Add for Qd {
    type Output = Qd;
    #[inline(always)]
    fn add(self, b: Qd) -> Qd {
        let (a, b) = (self.0, b.0);
        let (s0, t0) = two_sum(a[0], b[0]);
        let (s1, t1) = two_sum(a[1], b[1]);
        let (mut s2, t2) = two_sum(a[2], b[2]);
        let (mut s3, t3) = two_sum(a[3], b[3]);
        let (s1, mut t0) = two_sum(s1, t0);
        let mut t1 = t1;
        three_sum(&mut s2, &mut t0, &mut t1);
        three_sum2(&mut s3, &mut t0, t2);
        let t0 = t0 + t1 + t3;
        Qd(renorm(s0, s1, s2, s3, t0))
    }
}

impl Neg for Qd {
    type Output = Qd;
    #[inline(always)]
    fn neg(self) -> Qd {
        let a = self.0;
        Qd([-a[0], -a[1], -a[2], -a[3]])
    }
}

impl Sub for Qd {
    type Output = Qd;
    #[inline(always)]
    fn sub(self, b: Qd) -> Qd {
        self + (-b)
    }
}

impl Mul for Qd {
    type Output = Qd;
    #[inline(always)]
    fn mul(self, b: Qd) -> Qd {
        let (a, b) = (self.0, b.0);
        let (p0, q0) = two_prod(a[0], b[0]);
        let (mut p1, mut q1) = two_prod(a[0], b[1]);
        let (mut p2, mut q2) = two_prod(a[1], b[0]);
        let (mut p3, q3) = two_prod(a[0], b[2]);
        let (mut p4, q4) = two_prod(a[1], b[1]);
        let (mut p5, q5) = two_prod(a[2], b[0]);

        let mut q0 = q0;
        three_sum(&mut p1, &mut p2, &mut q0);
        three_sum(&mut p2, &mut q1, &mut q2);
        three_sum(&mut p3, &mut p4, &mut p5);
        let (s0, t0) = two_sum(p2, p3);
        let (s1, t1) = two_sum(q1, p4);
        let mut s2 = q2 + p5;
        let (s1, t0) = two_sum(s1, t0);
        s2 += t0 + t1;
        let s1 = s1
            + (a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0] + q0 + q3 + q4 + q5);
        Qd(renorm(p0, p1, s0, s1, s2))
    }
}

impl Div for Qd {
    type Output = Qd;
    fn div(self, b: Qd) -> Qd {
        let q0 = self.0[0] / b.0[0];
        let r = self - b.mul_f64(q0);
        let q1 = r.0[0] / b.0[0];
        let r = r - b.mul_f64(q1);
        let q2 = r.0[0] / b.0[0];
        let r = r - b.mul_f64(q2);
        let q3 = r.0[0] / b.0[0];
        let r = r - b.mul_f64(q3);
        let q4 = r.0[0] / b.0[0];
        Qd(renorm(q0, q1, q2, q3, q4))
    }
}

impl Rem for Qd {
    type Output = Qd;
    fn rem(self, b: Qd) -> Qd {
        let q = (self / b).floor();
        self - q * b
    }
}

impl AddAssign for Qd {
    #[inline(always)]
    fn add_assign(&mut self, b: Qd) {
        *self = *self + b;
    }
}
impl SubAssign for Qd {
    #[inline(always)]
    fn sub_assign(&mut self, b: Qd) {
        *self = *self - b;
    }
}
impl MulAssign for Qd {
    #[inline(always)]
    fn mul_assign(&mut self, b: Qd) {
        *self = *self * b;
    }
}
impl DivAssign for Qd {
    fn div_assign(&mut self, b: Qd) {
        *self = *self / b;
    }
}

impl Zero for Qd {
    fn zero() -> Qd {
        Qd([0.0; 4])
    }
    fn is_zero(&self) -> bool {
        self.0[0] == 0.0
    }
}

impl One for Qd {
    fn one() -> Qd {
        Qd([1.0, 0.0, 0.0, 0.0])
    }
}

impl Num for Qd {
    type FromStrRadixErr = &'static str;
    fn from_str_radix(s: &str, radix: u32) -> Result<Qd, &'static str> {
        if radix != 10 {
            return Err("only radix 10 is supported");
        }
        Qd::parse_decimal(s).ok_or("malformed decimal")
    }
}

impl Real for Qd {
    const PREC_BITS: u32 = 212;
    const NAME: &'static str = "quad-double";

    fn from_f64(x: f64) -> Qd {
        Qd([x, 0.0, 0.0, 0.0])
    }
    fn to_f64(self) -> f64 {
        self.0[0] + self.0[1]
    }
    fn mul_pow2(self, e: i32) -> Qd {
        let s = 2f64.powi(e);
        let a = self.0;
        Qd([a[0] * s, a[1] * s, a[2] * s, a[3] * s])
    }
    fn floor(self) -> Qd {
        let a = self.0;
        let mut x = [a[0].floor(), 0.0, 0.0, 0.0];
        if x[0] == a[0] {
            x[1] = a[1].floor();
            if x[1] == a[1] {
                x[2] = a[2].floor();
                if x[2] == a[2] {
                    x[3] = a[3].floor();
                }
            }
        }
        Qd(renorm(x[0], x[1], x[2], x[3], 0.0))
    }
    fn sqrt(self) -> Qd {
        funcs::sqrt(self)
    }
    fn exp(self) -> Qd {
        funcs::exp(self)
    }
    fn ln(self) -> Qd {
        funcs::ln(self)
    }
    fn sin_cos(self) -> (Qd, Qd) {
        funcs::sin_cos(self)
    }
    fn atan2(self, x: Qd) -> Qd {
        funcs::atan2(self, x)
    }
    fn expm1(self) -> Qd {
        funcs::expm1(self)
    }
    fn pi() -> Qd {
        static PI: OnceLock<Qd> = OnceLock::new();
        *PI.get_or_init(funcs::machin_pi)
    }
    fn ln2() -> Qd {
        static LN2: OnceLock<Qd> = OnceLock::new();
        *LN2.get_or_init(funcs::series_ln2)
    }
    fn parts(self) -> Vec<f64> {
        self.0.to_vec()
    }
    fn from_parts(p: &[f64]) -> Qd {
        let mut acc = Qd::zero();
        for &x in p {
            acc += Qd::from_f64(x);
        }
        acc
    }
    fn abs(self) -> Qd {
        if self.0[0] < 0.0 {
            -self
        } else {
            self
        }
    }
}
