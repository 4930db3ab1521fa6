//! Truncated formal series in z^{-1} and the formal operators acting on
//! them: composition, the difference inverses E and E_β, and the twisted
//! operators B^ω and B_α.
//!
//! Conventions: an [`IntSeries`] stores c_n for z^{-n}, n = 0..=order; a
//! [`FracSeries`] stores c_n for z^{-γ-n}. Every operation reports the
//! largest order its output is valid to, and outputs never store more than
//! that.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{cabs_f64, cx, Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct IntSeries<R: Real> {
    pub coeffs: Vec<Cx<R>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FracSeries<R: Real> {
    pub gamma: Cx<R>,
    pub coeffs: Vec<Cx<R>>,
}

/// JSON form shared by both series kinds.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SeriesRecord {
    pub gamma: [String; 2],
    pub coeffs: Vec<[String; 2]>,
    pub valid_order: usize,
}

pub fn cx_strings<R: Real>(z: Cx<R>) -> [String; 2] {
    [z.re.to_sci_string(), z.im.to_sci_string()]
}

pub fn cx_parse<R: Real>(s: &[String; 2]) -> Option<Cx<R>> {
    Some(Complex::new(R::parse_decimal(&s[0])?, R::parse_decimal(&s[1])?))
}

fn max_abs<R: Real>(c: &[Cx<R>]) -> f64 {
    c.iter().map(|z| cabs_f64(*z)).fold(0.0, f64::max)
}

impl<R: Real> IntSeries<R> {
    pub fn zero(order: usize) -> Self {
        IntSeries { coeffs: vec![Complex::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = Complex::one();
        s
    }

    pub fn monomial(n: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if n <= order {
            s.coeffs[n] = Complex::one();
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<Cx<R>>) -> Self {
        assert!(!coeffs.is_empty(), "a series keeps at least the constant slot");
        IntSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Index of the first nonzero coefficient (order+1 for the zero series).
    pub fn val(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(self.coeffs.len())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        IntSeries { coeffs: self.coeffs[..=n].to_vec() }
    }

    /// Zero every coefficient below `v`.
    pub fn clear_below(mut self, v: usize) -> Self {
        for c in self.coeffs.iter_mut().take(v) {
            *c = Complex::zero();
        }
        self
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        IntSeries { coeffs: (0..=n).map(|i| self.coeffs[i] + o.coeffs[i]).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        IntSeries { coeffs: (0..=n).map(|i| self.coeffs[i] - o.coeffs[i]).collect() }
    }

    pub fn scale(&self, s: Cx<R>) -> Self {
        IntSeries { coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, o: &Self) -> Self {
        IntSeries { coeffs: cauchy(&self.coeffs, &o.coeffs, self.order().min(o.order())) }
    }

    /// Multiply by z^{-k} (shift up, same storage order).
    pub fn shift(&self, k: usize) -> Self {
        let n = self.order();
        let mut c = vec![Complex::zero(); n + 1];
        if k <= n {
            c[k..=n].copy_from_slice(&self.coeffs[..=n - k]);
        }
        IntSeries { coeffs: c }
    }

    /// d/dz: z^{-n} ↦ -n z^{-n-1}; valid one order further.
    pub fn derivative(&self) -> Self {
        let n = self.order();
        let mut c = vec![Complex::zero(); n + 2];
        for i in 1..=n {
            c[i + 1] = -self.coeffs[i].scale(R::from_i64(i as i64));
        }
        IntSeries { coeffs: c }
    }

    fn check_unit(&self) -> Result<()> {
        let c0 = self.coeffs[0];
        if cabs_f64(c0 - Complex::one()) > 1e-12 {
            return Err(Error::NonUnitLeadingTerm);
        }
        Ok(())
    }

    /// Formal exponential of a series with zero constant term, or of
    /// 1 + (val ≥ 1) after dividing out the unit (exp(1+u) is not formal).
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonUnitLeadingTerm);
        }
        let n = self.order();
        let mut e = vec![Complex::zero(); n + 1];
        e[0] = Complex::one();
        // n e_n = Σ_{k=1}^n k s_k e_{n-k}
        for m in 1..=n {
            let mut acc = Complex::zero();
            for k in 1..=m {
                acc = acc + self.coeffs[k].scale(R::from_i64(k as i64)) * e[m - k];
            }
            e[m] = acc.scale(R::one() / R::from_i64(m as i64));
        }
        Ok(IntSeries { coeffs: e })
    }

    /// Formal log of a unit series 1 + u.
    pub fn log(&self) -> Result<Self> {
        self.check_unit()?;
        let n = self.order();
        let a = &self.coeffs;
        let mut l = vec![Complex::zero(); n + 1];
        // n l_n = n a_n - Σ_{k=1}^{n-1} k l_k a_{n-k}
        for m in 1..=n {
            let mut acc = a[m].scale(R::from_i64(m as i64));
            for k in 1..m {
                acc = acc - l[k].scale(R::from_i64(k as i64)) * a[m - k];
            }
            l[m] = acc.scale(R::one() / R::from_i64(m as i64));
        }
        Ok(IntSeries { coeffs: l })
    }

    /// (1 + u)^α = exp(α log(1 + u)).
    pub fn pow(&self, alpha: Cx<R>) -> Result<Self> {
        self.log()?.scale(alpha).exp()
    }

    /// Multiplicative inverse of a unit series.
    pub fn recip(&self) -> Result<Self> {
        self.check_unit()?;
        let n = self.order();
        let a = &self.coeffs;
        let mut r = vec![Complex::zero(); n + 1];
        r[0] = Complex::<R>::one() / a[0];
        for m in 1..=n {
            let mut acc = Complex::<R>::zero();
            for k in 1..=m {
                acc = acc + a[k] * r[m - k];
            }
            r[m] = -acc * r[0];
        }
        Ok(IntSeries { coeffs: r })
    }

    pub fn to_frac(&self) -> FracSeries<R> {
        let v = self.val().min(self.order());
        FracSeries { gamma: cx(v as f64, 0.0), coeffs: self.coeffs[v..].to_vec() }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.coeffs)
    }

    pub fn record(&self) -> SeriesRecord {
        SeriesRecord {
            gamma: cx_strings(Complex::<R>::zero()),
            coeffs: self.coeffs.iter().map(|&c| cx_strings(c)).collect(),
            valid_order: self.order(),
        }
    }
}

impl<R: Real> FracSeries<R> {
    pub fn zero(gamma: Cx<R>, order: usize) -> Self {
        FracSeries { gamma, coeffs: vec![Complex::zero(); order + 1] }
    }

    /// Largest valid index n (coefficient of z^{-γ-n}).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        FracSeries { gamma: self.gamma, coeffs: self.coeffs[..=n].to_vec() }
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert!(cabs_f64(self.gamma - o.gamma) < 1e-12);
        let n = self.order().min(o.order());
        FracSeries { gamma: self.gamma, coeffs: (0..=n).map(|i| self.coeffs[i] + o.coeffs[i]).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        debug_assert!(cabs_f64(self.gamma - o.gamma) < 1e-12);
        let n = self.order().min(o.order());
        FracSeries { gamma: self.gamma, coeffs: (0..=n).map(|i| self.coeffs[i] - o.coeffs[i]).collect() }
    }

    pub fn scale(&self, s: Cx<R>) -> Self {
        FracSeries { gamma: self.gamma, coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    /// Product with an integer-exponent series.
    pub fn mul_int(&self, o: &IntSeries<R>) -> Self {
        FracSeries { gamma: self.gamma, coeffs: cauchy(&self.coeffs, &o.coeffs, self.order().min(o.order())) }
    }

    /// d/dz: z^{-γ-n} ↦ -(γ+n) z^{-γ-n-1}; same γ, index shifted by one.
    pub fn derivative(&self) -> Self {
        let n = self.order();
        let mut c = vec![Complex::zero(); n + 2];
        for i in 0..=n {
            let g = self.gamma + cx(i as f64, 0.0);
            c[i + 1] = -(self.coeffs[i] * g);
        }
        FracSeries { gamma: self.gamma, coeffs: c }
    }

    /// Integer-exponent form, if γ is a non-negative integer.
    pub fn to_int(&self) -> Option<IntSeries<R>> {
        let g = self.gamma.re.to_f64();
        if self.gamma.im != R::zero() || g < 0.0 || g.fract() != 0.0 {
            return None;
        }
        let g = g as usize;
        let mut c = vec![Complex::zero(); g];
        c.extend_from_slice(&self.coeffs);
        Some(IntSeries { coeffs: c })
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.coeffs)
    }

    pub fn record(&self) -> SeriesRecord {
        SeriesRecord {
            gamma: cx_strings(self.gamma),
            coeffs: self.coeffs.iter().map(|&c| cx_strings(c)).collect(),
            valid_order: self.order(),
        }
    }
}

impl SeriesRecord {
    pub fn to_frac<R: Real>(&self) -> Option<FracSeries<R>> {
        let coeffs = self.coeffs.iter().map(cx_parse).collect::<Option<Vec<_>>>()?;
        if coeffs.is_empty() {
            return None;
        }
        Some(FracSeries { gamma: cx_parse(&self.gamma)?, coeffs })
    }
}

fn cauchy<R: Real>(a: &[Cx<R>], b: &[Cx<R>], order: usize) -> Vec<Cx<R>> {
    let mut c = vec![Complex::zero(); order + 1];
    let va = a.iter().position(|z| !z.is_zero()).unwrap_or(a.len());
    let vb = b.iter().position(|z| !z.is_zero()).unwrap_or(b.len());
    for n in (va + vb)..=order {
        let mut acc = Complex::zero();
        for i in va..=(n - vb) {
            acc = acc + a[i] * b[n - i];
        }
        c[n] = acc;
    }
    c
}

/// Binomial re-expansion of a single term: (1 + c/z)^{-s} = Σ_j t_j z^{-j}.
fn shifted_power<R: Real>(s: Cx<R>, c: Cx<R>, len: usize) -> Vec<Cx<R>> {
    let mut t = Vec::with_capacity(len);
    let mut cur = Complex::one();
    for j in 0..len {
        t.push(cur);
        // binom(-s, j+1) c^{j+1} = binom(-s, j) c^j · (-s - j)/(j+1) · c
        let f = (-s - cx(j as f64, 0.0)).scale(R::one() / R::from_i64(j as i64 + 1));
        cur = cur * f * c;
    }
    t
}

/// φ(z + c) for a fractional series.
pub fn compose_shift_frac<R: Real>(phi: &FracSeries<R>, c: Cx<R>) -> FracSeries<R> {
    let n = phi.order();
    let mut out = vec![Complex::<R>::zero(); n + 1];
    if c.is_zero() {
        return phi.clone();
    }
    for (i, &a) in phi.coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let t = shifted_power(phi.gamma + cx(i as f64, 0.0), c, n + 1 - i);
        for (j, tj) in t.into_iter().enumerate() {
            out[i + j] = out[i + j] + a * tj;
        }
    }
    FracSeries { gamma: phi.gamma, coeffs: out }
}

/// φ(z + c) for an integer series.
pub fn compose_shift<R: Real>(phi: &IntSeries<R>, c: Cx<R>) -> IntSeries<R> {
    let n = phi.order();
    let mut out = vec![Complex::<R>::zero(); n + 1];
    out[0] = phi.coeffs[0];
    for i in 1..=n {
        let a = phi.coeffs[i];
        if a.is_zero() {
            continue;
        }
        let t = shifted_power(cx(i as f64, 0.0), c, n + 1 - i);
        for (j, tj) in t.into_iter().enumerate() {
            out[i + j] = out[i + j] + a * tj;
        }
    }
    IntSeries { coeffs: out }
}

/// Powers b^j / j! used by the Taylor form of composition.
#[derive(Clone, Debug)]
pub struct TaylorPowers<R: Real> {
    pub terms: Vec<IntSeries<R>>,
}

impl<R: Real> TaylorPowers<R> {
    pub fn new(b: &IntSeries<R>) -> Self {
        let order = b.order();
        let vb = b.val().max(1);
        let mut terms = vec![IntSeries::one(order)];
        let mut j = 1;
        while j * vb <= order && !b.is_zero() {
            let next = terms[j - 1].mul(b).scale(cx_real_inv::<R>(j));
            terms.push(next);
            j += 1;
        }
        TaylorPowers { terms }
    }
}

fn cx_real_inv<R: Real>(j: usize) -> Cx<R> {
    Complex::new(R::one() / R::from_i64(j as i64), R::zero())
}

/// φ(z + b(z)) = Σ_j φ^{(j)} b^j / j!, integer series.
pub fn compose_id_plus<R: Real>(phi: &IntSeries<R>, pw: &TaylorPowers<R>) -> IntSeries<R> {
    let order = phi.order().min(pw.terms[0].order());
    let mut acc = phi.truncate(order);
    let mut d = phi.truncate(order);
    let vphi = phi.val();
    for (j, p) in pw.terms.iter().enumerate().skip(1) {
        d = d.derivative().truncate(order);
        if vphi + j + p.val() > order {
            break;
        }
        acc = acc.add(&d.mul(p));
    }
    acc
}

/// φ(z + b(z)) for a fractional series.
pub fn compose_id_plus_frac<R: Real>(phi: &FracSeries<R>, pw: &TaylorPowers<R>) -> FracSeries<R> {
    let order = phi.order().min(pw.terms[0].order());
    let mut acc = phi.truncate(order);
    let mut d = phi.truncate(order);
    for (j, p) in pw.terms.iter().enumerate().skip(1) {
        d = d.derivative().truncate(order);
        if j + p.val() > order {
            break;
        }
        acc = acc.add(&d.mul_int(p));
    }
    acc
}

/// (C_{id-1} - Id)^{-1} on z^{-2}C[[z^{-1}]].
pub fn op_e<R: Real>(psi: &IntSeries<R>) -> Result<IntSeries<R>> {
    let v = psi.val();
    if v < 2 && !psi.is_zero() {
        return Err(Error::ValTooLow { required: 2, found: v });
    }
    let n = psi.order();
    if n < 2 {
        return Ok(IntSeries::zero(n.saturating_sub(1)));
    }
    // ψ_N = Σ_{m=1}^{N-1} binom(N-1, m-1) φ_m
    let mut phi = vec![Complex::<R>::zero(); n];
    let mut row = vec![R::one()]; // binom(N-1, ·)
    for big_n in 2..=n {
        // advance Pascal row to binom(N-1, ·)
        let mut next = vec![R::one(); big_n];
        for k in 1..big_n - 1 {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
        let m = big_n - 1;
        let mut acc = psi.coeffs[big_n];
        for j in 1..m {
            acc = acc - phi[j].scale(row[j - 1]);
        }
        phi[m] = acc.scale(R::one() / row[m - 1]);
    }
    Ok(IntSeries { coeffs: phi })
}

/// E_β: inverse of C_{id-1} - Id from z^{-β-2}C[[z^{-1}]] to z^{-β-1}C[[z^{-1}]].
pub fn op_e_beta<R: Real>(psi: &FracSeries<R>) -> Result<FracSeries<R>> {
    let g = psi.gamma - Complex::one();
    let n = psi.order();
    // ψ_m = Σ_{k≤m} φ_k binom(g+k+j-1, j), j = m-k+1
    let mut phi = vec![Complex::<R>::zero(); n + 1];
    let mut rows: Vec<Vec<Cx<R>>> = Vec::with_capacity(n + 1);
    let inv: Vec<R> = (0..=n + 1).map(|j| R::one() / R::from_i64(j as i64 + 1)).collect();
    for m in 0..=n {
        let lead = g + cx(m as f64, 0.0);
        if cabs_f64(lead) < 1e-30 {
            return Err(Error::ZeroDivisor(m));
        }
        // row for k = m: t_j = (g+m)_j / j!
        let mut row = Vec::with_capacity(n - m + 2);
        let mut t = Complex::<R>::one();
        for j in 0..=(n - m + 1) {
            row.push(t);
            t = t * (lead + cx(j as f64, 0.0)).scale(inv[j]);
        }
        rows.push(row);
        let mut acc = psi.coeffs[m];
        for k in 0..m {
            acc = acc - phi[k] * rows[k][m - k + 1];
        }
        phi[m] = acc / rows[m][1];
    }
    Ok(FracSeries { gamma: g, coeffs: phi })
}

/// (C_{id-1} - Id)φ for a fractional series (used to verify E_β).
pub fn diff_minus_one_frac<R: Real>(phi: &FracSeries<R>) -> FracSeries<R> {
    let shifted = compose_shift_frac(phi, cx(-1.0, 0.0)).sub(phi);
    FracSeries { gamma: phi.gamma + Complex::one(), coeffs: shifted.coeffs[1..].to_vec() }
}

// ---------------------------------------------------------------------------
// Germs

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    Origin,
    Infinity,
}

/// A rational germ num/den (coefficients in ascending powers).
#[derive(Clone, Debug, PartialEq)]
pub struct GermSpec<R: Real> {
    pub chart: Chart,
    pub num: Vec<Cx<R>>,
    pub den: Vec<Cx<R>>,
}

fn trim<R: Real>(mut p: Vec<Cx<R>>) -> Vec<Cx<R>> {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    if p.is_empty() {
        p.push(Complex::zero());
    }
    p
}

fn real_poly<R: Real>(c: &[f64]) -> Vec<Cx<R>> {
    c.iter().map(|&x| cx(x, 0.0)).collect()
}

fn poly_eval<R: Real>(p: &[Cx<R>], z: Cx<R>) -> Cx<R> {
    p.iter().rev().fold(Complex::zero(), |acc, &c| acc * z + c)
}

/// p(w + c) by repeated synthetic division.
fn taylor_shift<R: Real>(p: &[Cx<R>], c: Cx<R>) -> Vec<Cx<R>> {
    let mut a = p.to_vec();
    let n = a.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = a[j + 1] * c;
            a[j] = a[j] + t;
        }
    }
    a
}

impl<R: Real> GermSpec<R> {
    pub fn infinity(num: Vec<Cx<R>>, den: Vec<Cx<R>>) -> Self {
        GermSpec { chart: Chart::Infinity, num: trim(num), den: trim(den) }
    }

    pub fn origin(num: Vec<Cx<R>>, den: Vec<Cx<R>>) -> Self {
        GermSpec { chart: Chart::Origin, num: trim(num), den: trim(den) }
    }

    /// f(z) = z + 1.
    pub fn translation() -> Self {
        Self::infinity(real_poly(&[1.0, 1.0]), real_poly(&[1.0]))
    }

    /// f(z) = z²/(z-1).
    pub fn quad() -> Self {
        Self::infinity(real_poly(&[0.0, 0.0, 1.0]), real_poly(&[-1.0, 1.0]))
    }

    /// f(z) = z + 1 + z^{-2}.
    pub fn rho0() -> Self {
        Self::infinity(real_poly(&[1.0, 0.0, 1.0, 1.0]), real_poly(&[0.0, 0.0, 1.0]))
    }

    pub fn eval(&self, z: Cx<R>) -> Cx<R> {
        poly_eval(&self.num, z) / poly_eval(&self.den, z)
    }

    pub fn eval_num_den(&self, z: Cx<R>) -> (Cx<R>, Cx<R>) {
        (poly_eval(&self.num, z), poly_eval(&self.den, z))
    }

    fn deg(p: &[Cx<R>]) -> usize {
        p.len() - 1
    }

    /// Check that an infinity-chart rational map is z + 1 + O(1/z).
    pub fn validate_infinity(&self) -> Result<()> {
        let (dn, dd) = (Self::deg(&self.num), Self::deg(&self.den));
        if self.den.iter().all(|c| c.is_zero()) {
            return Err(Error::NotRational("zero denominator".into()));
        }
        if dn != dd + 1 {
            return Err(Error::NotRational(format!(
                "degree of numerator ({dn}) must exceed that of the denominator ({dd}) by one"
            )));
        }
        // num - (z+1) den must have degree < deg den
        let mut r = self.num.clone();
        for (i, &d) in self.den.iter().enumerate() {
            r[i] = r[i] - d;
            r[i + 1] = r[i + 1] - d;
        }
        let scale = max_abs(&self.num).max(max_abs(&self.den)).max(1.0);
        for (i, c) in r.iter().enumerate().skip(dd) {
            if cabs_f64(*c) > 1e-12 * scale {
                let what = if i == dd + 1 { "multiplier is not 1" } else { "translation part is not z + 1" };
                return Err(Error::NotSimpleParabolic(what.into()));
            }
        }
        Ok(())
    }

    /// Conjugate an origin germ g(w) = w + a₂w² + … to infinity through
    /// z = -1/(a₂ w); infinity-chart input is returned unchanged.
    pub fn normalize_to_infinity(&self) -> Result<GermSpec<R>> {
        if self.chart == Chart::Infinity {
            self.validate_infinity()?;
            return Ok(self.clone());
        }
        let (p, q) = (&self.num, &self.den);
        let q0 = q[0];
        if q0.is_zero() {
            return Err(Error::NotRational("denominator vanishes at the fixed point".into()));
        }
        let at = |v: &Vec<Cx<R>>, i: usize| v.get(i).copied().unwrap_or(Complex::zero());
        if cabs_f64(at(p, 0)) > 1e-14 {
            return Err(Error::NotSimpleParabolic("0 is not a fixed point".into()));
        }
        let a1 = at(p, 1) / q0;
        if cabs_f64(a1 - Complex::one()) > 1e-12 {
            return Err(Error::NotSimpleParabolic("multiplier is not 1".into()));
        }
        let a2 = (at(p, 2) - at(p, 1) * at(q, 1) / q0) / q0;
        if cabs_f64(a2) < 1e-14 {
            return Err(Error::NotSimpleParabolic("a2 = 0".into()));
        }
        let c = -(Complex::<R>::one() / a2);
        let d = p.len().max(q.len()) - 1;
        // P(z) = z^d p(c/z), Q(z) = z^d q(c/z)
        let lift = |v: &Vec<Cx<R>>| {
            let mut out = vec![Complex::<R>::zero(); d + 1];
            let mut cp = Complex::<R>::one();
            for j in 0..=d {
                out[d - j] = at(v, j) * cp;
                cp = cp * c;
            }
            out
        };
        let (pp, qq) = (lift(p), lift(q));
        // F = -Q / (a₂ P)
        let num: Vec<Cx<R>> = qq.iter().map(|&x| -x).collect();
        let den: Vec<Cx<R>> = pp.iter().map(|&x| x * a2).collect();
        let mut out = GermSpec::infinity(num, den);
        // strip a common power of z (P and Q may share factors of z)
        while out.num.len() > 1 && out.den.len() > 1 && out.num[0].is_zero() && out.den[0].is_zero() {
            out.num.remove(0);
            out.den.remove(0);
        }
        // make the leading denominator coefficient 1
        let lead = *out.den.last().unwrap();
        out.num = out.num.iter().map(|&x| x / lead).collect();
        out.den = out.den.iter().map(|&x| x / lead).collect();
        out.validate_infinity()?;
        Ok(out)
    }

    /// Upper bound R₀ for the exponential type of 𝓑(b), 𝓑(b_*) and the
    /// kernel series: the largest of 1 and |p+1| over poles p of f. When
    /// ρ ≠ 0 the logarithm in b_* and c_α also sees the zeros q of f, so
    /// |q+1| enters too.
    pub fn radius(&self, with_zeros: bool) -> f64 {
        let mut r: f64 = 1.0;
        let polys = if with_zeros { vec![&self.num, &self.den] } else { vec![&self.den] };
        for poly in polys {
            for root in poly_roots(poly) {
                r = r.max((root + 1.0).norm());
            }
        }
        // slack for the numerical root finder
        r * (1.0 + 1e-9)
    }
}

fn poly_roots<R: Real>(p: &[Cx<R>]) -> Vec<Complex<f64>> {
    let c: Vec<Complex<f64>> = p.iter().map(|z| Complex::new(z.re.to_f64(), z.im.to_f64())).collect();
    let mut c = c;
    while c.len() > 1 && c.last().is_some_and(|z| z.norm() == 0.0) {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return vec![];
    }
    let lead = c[deg];
    let c: Vec<Complex<f64>> = c.iter().map(|z| z / lead).collect();
    let eval = |z: Complex<f64>| c.iter().rev().fold(Complex::new(0.0, 0.0), |a, &k| a * z + k);
    // Durand–Kerner; multiple roots converge linearly, enough for a radius
    let mut roots: Vec<Complex<f64>> =
        (0..deg).map(|k| Complex::new(0.4, 0.9).powu(k as u32) * (1.0 + k as f64 * 0.1)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let mut den = Complex::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    roots
}

/// Derived series of a germ at a given truncation depth.
#[derive(Clone, Debug)]
pub struct GermData<R: Real> {
    pub spec: GermSpec<R>,
    pub b: IntSeries<R>,
    pub rho: Cx<R>,
    pub b_star: IntSeries<R>,
    pub radius_r: f64,
    pub depth: usize,
    pub powers: TaylorPowers<R>,
}

/// b(w) = f(w-1) - w as a series in w^{-1}, valid to order `depth`.
pub fn expand_b<R: Real>(spec: &GermSpec<R>, depth: usize) -> Result<IntSeries<R>> {
    if spec.chart != Chart::Infinity {
        return Err(Error::Invalid("expand_b needs an infinity-chart germ".into()));
    }
    if depth < 2 {
        return Err(Error::Invalid("depth must be at least 2".into()));
    }
    let m1 = cx(-1.0, 0.0);
    let num = taylor_shift(&spec.num, m1);
    let den = taylor_shift(&spec.den, m1);
    let (dn, dd) = (num.len() - 1, den.len() - 1);
    if dn != dd + 1 {
        return Err(Error::NotRational("degree mismatch".into()));
    }
    // f(w-1) = w · A(x)/B(x), x = 1/w
    let len = depth + 2;
    let a: Vec<Cx<R>> = (0..len).map(|i| if i <= dn { num[dn - i] } else { Complex::zero() }).collect();
    let b: Vec<Cx<R>> = (0..len).map(|i| if i <= dd { den[dd - i] } else { Complex::zero() }).collect();
    if b[0].is_zero() {
        return Err(Error::TruncationOverflow(depth));
    }
    let mut q = vec![Complex::<R>::zero(); len];
    let inv_b0 = Complex::<R>::one() / b[0];
    for n in 0..len {
        let mut acc = a[n];
        for k in 1..=n.min(dd) {
            acc = acc - b[k] * q[n - k];
        }
        q[n] = acc * inv_b0;
    }
    // b_n = q_{n+1}; q_0 = 1 and q_1 = 0 for a simple parabolic germ
    let scale = max_abs(&q[..2]).max(1.0);
    if cabs_f64(q[0] - Complex::one()) > 1e-12 * scale || cabs_f64(q[1]) > 1e-12 * scale {
        return Err(Error::NotSimpleParabolic("f(z) - z - 1 does not vanish at infinity".into()));
    }
    let mut coeffs = vec![Complex::zero(); depth + 1];
    coeffs[1..(depth + 1)].copy_from_slice(&q[2..(depth + 2)]);
    Ok(IntSeries { coeffs })
}

pub fn rho_of<R: Real>(b: &IntSeries<R>) -> Cx<R> {
    -b.coeffs.get(1).copied().unwrap_or(Complex::zero())
}

/// (1 + z^{-1} b) / (1 - z^{-1}), the unit series inside log and c_α.
fn unit_ratio<R: Real>(b: &IntSeries<R>) -> IntSeries<R> {
    let n = b.order();
    let mut num = b.shift(1);
    num.coeffs[0] = Complex::one();
    let geo = IntSeries { coeffs: vec![Complex::one(); n + 1] };
    num.mul(&geo)
}

/// b_* = b + ρ log((1 + z^{-1}b)/(1 - z^{-1})).
pub fn b_star_of<R: Real>(b: &IntSeries<R>, rho: Cx<R>) -> Result<IntSeries<R>> {
    let l = unit_ratio(b).log()?;
    let s = b.add(&l.scale(rho));
    let scale = b.max_abs().max(1.0);
    if cabs_f64(s.coeffs[1]) > 1e-20_f64.max(R::epsilon().to_f64() * 1e4) * scale {
        return Err(Error::InternalInconsistency(format!(
            "b_* keeps a z^-1 term of size {:e}",
            cabs_f64(s.coeffs[1])
        )));
    }
    Ok(s.clear_below(2))
}

impl<R: Real> GermData<R> {
    pub fn new(spec: &GermSpec<R>, depth: usize) -> Result<Self> {
        let spec = spec.normalize_to_infinity()?;
        let b = expand_b(&spec, depth)?;
        let rho = rho_of(&b);
        let b_star = b_star_of(&b, rho)?;
        let radius_r = spec.radius(!rho.is_zero());
        let powers = TaylorPowers::new(&b);
        Ok(GermData { spec, b, rho, b_star, radius_r, depth, powers })
    }

    /// Same germ at another depth.
    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        if depth == self.depth {
            return Ok(self.clone());
        }
        GermData::new(&self.spec, depth)
    }

    pub fn is_trivial(&self) -> bool {
        self.b.is_zero()
    }

    /// c_α = ((1 + z^{-1}b)/(1 - z^{-1}))^α.
    pub fn c_alpha(&self, alpha: Cx<R>) -> Result<IntSeries<R>> {
        unit_ratio(&self.b).pow(alpha)
    }

    pub fn compose(&self, phi: &IntSeries<R>) -> IntSeries<R> {
        compose_id_plus(phi, &self.powers)
    }

    pub fn compose_frac(&self, phi: &FracSeries<R>) -> FracSeries<R> {
        compose_id_plus_frac(phi, &self.powers)
    }
}

/// φ(z + b(z)) for every monomial z^{-n}, n = 1..=order, via (1 + z^{-1}b)^{-n}.
fn composed_monomials<R: Real>(b: &IntSeries<R>) -> Result<Vec<IntSeries<R>>> {
    let order = b.order();
    let mut u = b.shift(1);
    u.coeffs[0] = Complex::one();
    let q = u.recip()?;
    let mut cols = Vec::with_capacity(order + 1);
    cols.push(IntSeries::one(order));
    let mut p = IntSeries::one(order);
    for n in 1..=order {
        p = p.mul(&q);
        cols.push(p.shift(n));
    }
    Ok(cols)
}

/// φ̃ with (C_{id-1} - C_{id+b})φ̃ = b_*, valid to depth - 1.
pub fn solve_phi_tilde<R: Real>(data: &GermData<R>) -> Result<IntSeries<R>> {
    let d = data.depth;
    if data.is_trivial() {
        return Ok(IntSeries::zero(d - 1));
    }
    let comp = composed_monomials(&data.b)?;
    let mut phi = vec![Complex::<R>::zero(); d];
    // residual r = b_* - Σ φ_m (C_{id-1} - C_{id+b}) z^{-m}
    let mut r = data.b_star.coeffs.clone();
    for n in 1..d {
        let lead = cx::<R>(n as f64, 0.0);
        let pn = r[n + 1] / lead;
        phi[n] = pn;
        if pn.is_zero() {
            continue;
        }
        let shifted = shifted_power(cx(n as f64, 0.0), cx(-1.0, 0.0), d + 1 - n);
        for (j, t) in shifted.into_iter().enumerate() {
            r[n + j] = r[n + j] - pn * t;
        }
        for (i, c) in comp[n].coeffs.iter().enumerate().skip(n) {
            r[i] = r[i] + pn * *c;
        }
    }
    Ok(IntSeries { coeffs: phi })
}

/// (C_{id-1} - C_{id+b})φ.
pub fn difference_operator<R: Real>(data: &GermData<R>, phi: &IntSeries<R>) -> IntSeries<R> {
    compose_shift(phi, cx(-1.0, 0.0)).sub(&data.compose(phi))
}

#[derive(Clone, Debug)]
pub struct Split<R: Real> {
    pub head: IntSeries<R>,
    pub tail: IntSeries<R>,
    pub n: usize,
    pub beta: Cx<R>,
}

/// N = max(0, ⌈-2 Re α⌉), β = α + N, and φ̃ = [φ̃]_N + {φ̃}_N.
pub fn split_at_n<R: Real>(phi: &IntSeries<R>, alpha: Cx<R>) -> Split<R> {
    let n = (-2.0 * alpha.re.to_f64()).ceil().max(0.0) as usize;
    split_at(phi, alpha, n)
}

/// Split with an explicit (admissible) N.
pub fn split_at<R: Real>(phi: &IntSeries<R>, alpha: Cx<R>, n: usize) -> Split<R> {
    let mut head = phi.clone();
    let mut tail = phi.clone();
    for i in 0..=phi.order() {
        if i <= n {
            tail.coeffs[i] = Complex::zero();
        } else {
            head.coeffs[i] = Complex::zero();
        }
    }
    Split { head, tail, n, beta: alpha + cx(n as f64, 0.0) }
}

#[derive(Clone, Debug)]
pub struct AlphaData<R: Real> {
    pub b_n: IntSeries<R>,
    /// (1 - z^{-1})^{-α} b_N, so that b_α = z^{-α} q.
    pub q: IntSeries<R>,
    pub b_alpha: FracSeries<R>,
}

/// b_N = b_* - C_{id-1}[φ̃]_N + C_{id+b}[φ̃]_N and b_α = z^{-α}(1-z^{-1})^{-α} b_N.
pub fn compute_b_n_b_alpha<R: Real>(data: &GermData<R>, split: &Split<R>, alpha: Cx<R>) -> Result<AlphaData<R>> {
    let n = split.n;
    let head = &split.head;
    let b_n = data.b_star.sub(&difference_operator(data, &head.truncate(data.depth)));
    let order = b_n.order();
    let scale = data.b_star.max_abs().max(head.max_abs()).max(1.0);
    let tol = R::epsilon().to_f64().max(1e-30) * 1e6 * scale;
    for i in 0..(n + 2).min(order + 1) {
        if cabs_f64(b_n.coeffs[i]) > tol {
            return Err(Error::ValCheckFailed(format!("b_N has a z^-{i} term of size {:e}", cabs_f64(b_n.coeffs[i]))));
        }
    }
    let b_n = b_n.clear_below(n + 2);
    // cross-check against the tail form
    let alt = difference_operator(data, &split.tail);
    let m = alt.order().min(order);
    // the tail identity cancels terms as large as the φ̃ coefficients
    let big = split.tail.max_abs().max(scale);
    for i in 0..=m {
        let d = cabs_f64(alt.coeffs[i] - b_n.coeffs[i]);
        if d > tol * 1e3 * big {
            return Err(Error::ValCheckFailed(format!("tail identity fails at z^-{i} by {d:e}")));
        }
    }
    let mut one_minus = IntSeries::one(order);
    one_minus.coeffs[1] = cx(-1.0, 0.0);
    let q = one_minus.pow(-alpha)?.mul(&b_n);
    let gamma = alpha + cx((n + 2) as f64, 0.0);
    let coeffs = if order >= n + 2 { q.coeffs[n + 2..].to_vec() } else { vec![Complex::zero()] };
    Ok(AlphaData { b_n, q, b_alpha: FracSeries { gamma, coeffs } })
}

/// B^ω ψ = e^{-ωb_*} C_{id+b}ψ - ψ.
pub fn op_b_omega<R: Real>(psi: &IntSeries<R>, e_omega: &IntSeries<R>, data: &GermData<R>) -> IntSeries<R> {
    e_omega.mul(&data.compose(psi)).sub(psi)
}

/// e^{-ω b_*}.
pub fn exp_omega<R: Real>(data: &GermData<R>, omega: Cx<R>) -> Result<IntSeries<R>> {
    data.b_star.scale(-omega).exp()
}

/// B_α φ = c_α C_{id+b}φ - φ, returned with γ raised by one.
pub fn op_b_alpha<R: Real>(phi: &FracSeries<R>, c_alpha: &IntSeries<R>, data: &GermData<R>) -> Result<FracSeries<R>> {
    let raw = data.compose_frac(phi).mul_int(c_alpha).sub(phi);
    let lead = cabs_f64(raw.coeffs[0]);
    let scale = phi.max_abs().max(1e-300);
    if lead > 1e-20_f64.max(R::epsilon().to_f64() * 1e6) * scale {
        return Err(Error::OrderGainViolated(lead));
    }
    if raw.order() == 0 {
        return Ok(FracSeries::zero(phi.gamma + Complex::one(), 0));
    }
    Ok(FracSeries { gamma: phi.gamma + Complex::one(), coeffs: raw.coeffs[1..].to_vec() })
}

/// Ψ̃_0..Ψ̃_{k_max} with Ψ̃_{k+1} = E B^ω Ψ̃_k. Each step loses one order;
/// the data depth should exceed the wanted order by k_max.
pub fn psi_sequence<R: Real>(data: &GermData<R>, omega: Cx<R>, k_max: usize) -> Result<Vec<IntSeries<R>>> {
    let e_om = exp_omega(data, omega)?;
    let mut out = vec![IntSeries::one(data.depth)];
    for k in 0..k_max {
        let b = op_b_omega(&out[k], &e_om, data);
        let b = b.clear_below(2);
        out.push(op_e(&b)?);
    }
    Ok(out)
}

/// All formal objects attached to ω = 2πim for the fractional recursion.
#[derive(Clone, Debug)]
pub struct FormalSetup<R: Real> {
    pub omega: Cx<R>,
    pub alpha: Cx<R>,
    pub phi_tilde: IntSeries<R>,
    pub split: Split<R>,
    pub alpha_data: AlphaData<R>,
    pub c_alpha: IntSeries<R>,
}

impl<R: Real> FormalSetup<R> {
    pub fn new(data: &GermData<R>, omega: Cx<R>, extra_n: usize) -> Result<Self> {
        let alpha = -(data.rho * omega);
        let phi_tilde = solve_phi_tilde(data)?;
        let base = split_at_n(&phi_tilde, alpha);
        let split = split_at(&phi_tilde, alpha, base.n + extra_n);
        let alpha_data = compute_b_n_b_alpha(data, &split, alpha)?;
        let c_alpha = data.c_alpha(alpha)?;
        Ok(FormalSetup { omega, alpha, phi_tilde, split, alpha_data, c_alpha })
    }

    pub fn beta(&self) -> Cx<R> {
        self.split.beta
    }

    pub fn n(&self) -> usize {
        self.split.n
    }

    /// z^{-α}{φ̃}_N as a fractional series with γ = β + 1.
    pub fn target(&self) -> FracSeries<R> {
        let n = self.split.n;
        let t = &self.split.tail;
        let coeffs = if t.order() > n { t.coeffs[n + 1..].to_vec() } else { vec![Complex::zero()] };
        FracSeries { gamma: self.beta() + Complex::one(), coeffs }
    }
}

/// Φ̃_0..Φ̃_{k_max}: Φ̃_0 = E_β b_α, Φ̃_{k+1} = E_β B_α Φ̃_k.
pub fn phi_sequence_formal<R: Real>(data: &GermData<R>, setup: &FormalSetup<R>, k_max: usize) -> Result<Vec<FracSeries<R>>> {
    let mut out = vec![op_e_beta(&setup.alpha_data.b_alpha)?];
    for k in 0..k_max {
        let b = op_b_alpha(&out[k], &setup.c_alpha, data)?;
        out.push(op_e_beta(&b)?);
    }
    Ok(out)
}
