//! Borel-plane objects: entire functions of exponential type with certified
//! truncation, branched germs ζ^γ·H(ζ) on the log surface, the kernel
//! K_α(ξ, ζ), polygonal paths with a lifted argument, and Laplace integrals.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{cabs_f64, cexp, cln_lifted, cx, gamma_complex, Cx, GaussRule, Real};
use crate::series::{FracSeries, GermData, IntSeries};

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Taylor data a_0..a_T with |a_n| ≤ c0·r0ⁿ/n!.
#[derive(Clone, Debug)]
pub struct EntireFn<R: Real> {
    pub coeffs: Vec<Cx<R>>,
    pub c0: f64,
    pub r0: f64,
}

/// ln n! for the tail bounds.
fn ln_fact(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Smallest c with |a_n| ≤ c·rⁿ/n! on the known coefficients.
fn fit_c0<R: Real>(coeffs: &[Cx<R>], r: f64) -> (f64, usize) {
    let mut best = 0.0f64;
    let mut at = 0;
    let mut lf = 0.0;
    for (n, a) in coeffs.iter().enumerate() {
        if n > 0 {
            lf += (n as f64).ln();
        }
        let m = cabs_f64(*a);
        if m == 0.0 {
            continue;
        }
        let v = m.ln() + lf - n as f64 * r.ln();
        if best == 0.0 || v > best.ln() {
            best = v.exp();
            at = n;
        }
    }
    (best, at)
}

impl<R: Real> EntireFn<R> {
    /// Bound the coefficients with a type at least `r0`; the type is widened
    /// while the envelope peaks in the last quarter of the data.
    pub fn from_coeffs(mut coeffs: Vec<Cx<R>>, r0: f64) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let mut r = r0.max(1e-3) * 1.05;
        let (mut c0, mut at) = fit_c0(&coeffs, r);
        for _ in 0..20 {
            if coeffs.len() < 8 || at < coeffs.len() * 3 / 4 {
                break;
            }
            r *= 1.1;
            (c0, at) = fit_c0(&coeffs, r);
        }
        EntireFn { coeffs, c0, r0: r }
    }

    pub fn zero() -> Self {
        EntireFn { coeffs: vec![Complex::zero()], c0: 0.0, r0: 1.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0.0
    }

    /// Bound on Σ_{n>T}|a_n|Mⁿ.
    pub fn tail_bound(&self, m: f64) -> f64 {
        if self.c0 == 0.0 {
            return 0.0;
        }
        let t1 = self.coeffs.len();
        let x = self.r0 * m;
        let ln = self.c0.ln() + t1 as f64 * x.max(1e-300).ln() - ln_fact(t1) + x;
        ln.exp()
    }

    /// Round-off bound for Horner at |ζ| = m.
    pub fn roundoff_bound(&self, m: f64) -> f64 {
        let eps = R::epsilon().to_f64();
        eps * 4.0 * self.coeffs.len() as f64 * self.c0 * (self.r0 * m).exp()
    }

    pub fn eval(&self, z: Cx<R>) -> Cx<R> {
        self.coeffs.iter().rev().fold(Complex::zero(), |acc, &a| acc * z + a)
    }

    /// Value and a certified error bound; fails when `tol` cannot be met.
    pub fn eval_checked(&self, z: Cx<R>, tol: f64) -> Result<(Cx<R>, f64)> {
        let m = cabs_f64(z);
        let tail = self.tail_bound(m);
        let round = self.roundoff_bound(m);
        if tail > tol && tail >= round {
            return Err(Error::InsufficientTerms { bound: tail, tol, radius: m });
        }
        let cancel = (self.r0 * m * LOG2_E).ceil() as u32 + 20;
        if round > tol || cancel >= R::PREC_BITS {
            return Err(Error::PrecisionBudgetExceeded { needed: cancel + (-tol.log2()).max(0.0) as u32, available: R::PREC_BITS });
        }
        Ok((self.eval(z), tail + round))
    }

    /// Largest |ζ| where the truncation error stays below `tol`.
    pub fn certified_radius(&self, tol: f64) -> f64 {
        if self.c0 == 0.0 {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while self.tail_bound(hi) < tol && hi < 1e6 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.tail_bound(mid) < tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// ζ^γ · H(ζ) on the log surface.
#[derive(Clone, Debug)]
pub struct BranchedGerm<R: Real> {
    pub gamma: Cx<R>,
    pub entire: EntireFn<R>,
}

/// A point of ℂ_log: modulus and lifted argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lifted<R: Real> {
    pub modulus: R,
    pub arg: R,
}

impl<R: Real> Lifted<R> {
    pub fn point(&self) -> Cx<R> {
        let (s, c) = self.arg.sin_cos();
        Complex::new(self.modulus * c, self.modulus * s)
    }
}

impl<R: Real> BranchedGerm<R> {
    pub fn eval(&self, z: Lifted<R>) -> Cx<R> {
        if z.modulus == R::zero() {
            return Complex::zero();
        }
        let pw = cexp(self.gamma * cln_lifted(z.modulus, z.arg));
        pw * self.entire.eval(z.point())
    }

    pub fn eval_checked(&self, z: Lifted<R>, tol: f64) -> Result<(Cx<R>, f64)> {
        let pw = if z.modulus == R::zero() { Complex::zero() } else { cexp(self.gamma * cln_lifted(z.modulus, z.arg)) };
        let scale = cabs_f64(pw).max(1e-300);
        let (h, err) = self.entire.eval_checked(z.point(), tol / scale)?;
        Ok((pw * h, err * scale))
    }
}

/// 𝓑 of an integer series with val ≥ 1: a_n = c_{n+1}/n!.
pub fn borel_int<R: Real>(phi: &IntSeries<R>, r0: f64) -> EntireFn<R> {
    let mut a = Vec::with_capacity(phi.order());
    let mut inv_fact = R::one();
    for n in 0..phi.order() {
        if n > 0 {
            inv_fact /= R::from_i64(n as i64);
        }
        a.push(phi.coeffs[n + 1].scale(inv_fact));
    }
    if a.is_empty() {
        a.push(Complex::zero());
    }
    EntireFn::from_coeffs(a, r0)
}

/// 𝓑 of Σ c_n z^{-γ-n}: ζ^{γ-1} Σ c_n ζⁿ/Γ(γ+n).
pub fn borel_frac<R: Real>(phi: &FracSeries<R>, r0: f64) -> Result<BranchedGerm<R>> {
    // running 1/Γ(γ+n); dividing by Γ directly overflows |Γ|² for large n
    let mut inv = Complex::<R>::one() / gamma_complex(phi.gamma)?;
    let mut h = Vec::with_capacity(phi.coeffs.len());
    for (n, &c) in phi.coeffs.iter().enumerate() {
        if n > 0 {
            inv = inv / (phi.gamma + cx(n as f64 - 1.0, 0.0));
        }
        h.push(c * inv);
    }
    Ok(BranchedGerm { gamma: phi.gamma - Complex::one(), entire: EntireFn::from_coeffs(h, r0) })
}

// ---------------------------------------------------------------------------
// Kernel

/// K(ξ, ζ) = u_0(ζ-ξ) + Σ_{k≥1} (-ξ)^k/k! u_k(ζ-ξ), u_0 = 𝓑(c_α-1),
/// u_k = 𝓑(c_α b^k).
#[derive(Clone, Debug)]
pub struct KernelTable<R: Real> {
    pub u: Vec<Vec<Cx<R>>>,
    pub alpha: Cx<R>,
    pub rho: Cx<R>,
    pub k_max: usize,
    /// Certified bound on both truncations for |ξ|, |ζ-ξ| ≤ `reach`.
    pub error_bound: f64,
    pub reach: f64,
}

/// Bit-exact serialized form of a [`KernelTable`]: every real is stored as
/// its component doubles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub precision: String,
    pub u: Vec<Vec<[Vec<f64>; 2]>>,
    pub alpha: [Vec<f64>; 2],
    pub rho: [Vec<f64>; 2],
    pub k_max: usize,
    pub error_bound: f64,
    pub reach: f64,
}

fn cx_parts<R: Real>(z: Cx<R>) -> [Vec<f64>; 2] {
    [z.re.parts(), z.im.parts()]
}

fn cx_from_parts<R: Real>(p: &[Vec<f64>; 2]) -> Cx<R> {
    Complex::new(R::from_parts(&p[0]), R::from_parts(&p[1]))
}

impl<R: Real> KernelTable<R> {
    pub fn record(&self) -> KernelRecord {
        KernelRecord {
            precision: R::NAME.to_string(),
            u: self.u.iter().map(|r| r.iter().map(|&z| cx_parts(z)).collect()).collect(),
            alpha: cx_parts(self.alpha),
            rho: cx_parts(self.rho),
            k_max: self.k_max,
            error_bound: self.error_bound,
            reach: self.reach,
        }
    }

    pub fn from_record(r: &KernelRecord) -> Result<Self> {
        if r.precision != R::NAME {
            return Err(Error::Invalid(format!("kernel record holds {} data, wanted {}", r.precision, R::NAME)));
        }
        Ok(KernelTable {
            u: r.u.iter().map(|row| row.iter().map(cx_from_parts).collect()).collect(),
            alpha: cx_from_parts(&r.alpha),
            rho: cx_from_parts(&r.rho),
            k_max: r.k_max,
            error_bound: r.error_bound,
            reach: r.reach,
        })
    }
}

/// Minimal Taylor length T for a type-r0 function on |ζ| ≤ m to tolerance tol.
pub fn depth_for(c0: f64, r0: f64, m: f64, tol: f64) -> usize {
    let x = r0 * m;
    let mut t = 1usize;
    while t < 100_000 {
        let ln = c0.max(1e-300).ln() + t as f64 * x.max(1e-300).ln() - ln_fact(t) + x;
        if ln < tol.ln() {
            return t;
        }
        t += 1;
    }
    t
}

impl<R: Real> KernelTable<R> {
    /// Taylor coefficients of η ↦ K(ξ, ξ+η), trailing zeros dropped.
    pub fn source_coeffs(&self, xi: Cx<R>) -> Vec<Cx<R>> {
        let len = self.u.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut g = vec![Complex::<R>::zero(); len];
        let mut w = Complex::<R>::one();
        for (k, row) in self.u.iter().enumerate() {
            if k > 0 {
                w = w * (-xi).scale(R::one() / R::from_i64(k as i64));
            }
            for (gn, &a) in g.iter_mut().zip(row) {
                *gn = *gn + w * a;
            }
        }
        while g.last().is_some_and(|c| c.is_zero()) {
            g.pop();
        }
        g
    }

    pub fn eval_source(g: &[Cx<R>], eta: Cx<R>) -> Cx<R> {
        g.iter().rev().fold(Complex::zero(), |acc, &a| acc * eta + a)
    }

    pub fn eval(&self, xi: Cx<R>, zeta: Cx<R>) -> Cx<R> {
        Self::eval_source(&self.source_coeffs(xi), zeta - xi)
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().all(|r| r.iter().all(|c| c.is_zero()))
    }
}

/// Build the kernel table for |ξ|, |ζ-ξ| ≤ reach. `data.depth` bounds the
/// Taylor length; InsufficientTerms asks the caller for a deeper germ.
pub fn build_kernel<R: Real>(data: &GermData<R>, alpha: Cx<R>, reach: f64, tol: f64) -> Result<KernelTable<R>> {
    let c = data.c_alpha(alpha)?;
    let mut cm1 = c.clone();
    cm1.coeffs[0] = Complex::zero();
    let r0 = data.radius_r;
    let weight = |k: usize| (k as f64 * reach.max(1e-300).ln() - ln_fact(k)).exp();
    let first = borel_int(&cm1, r0);
    let mut bound = first.tail_bound(reach);
    let mut rows = vec![first];
    if !data.b.is_zero() {
        let mut p = c;
        let mut k = 1;
        loop {
            if k > data.depth / 2 {
                return Err(Error::InsufficientTerms { bound: f64::INFINITY, tol, radius: reach });
            }
            p = p.mul(&data.b);
            let row = borel_int(&p, r0);
            let w = weight(k);
            let size = w * row.c0 * (row.r0 * reach).exp();
            bound += w * row.tail_bound(reach);
            rows.push(row);
            // once the terms are tiny their ratio is below 1/2
            if size < tol * 1e-3 && k >= 2 && reach * reach < (k * k) as f64 {
                bound += size;
                break;
            }
            k += 1;
        }
    }
    if bound > tol {
        return Err(Error::InsufficientTerms { bound, tol, radius: reach });
    }
    let k_max = rows.len() - 1;
    let u = rows.into_iter().map(|r| if r.is_zero() { vec![] } else { r.coeffs }).collect();
    Ok(KernelTable { u, alpha, rho: data.rho, k_max, error_bound: bound, reach })
}

/// Depth the germ needs for a kernel on |ξ|, |ζ-ξ| ≤ reach.
pub fn kernel_depth(r0: f64, reach: f64, tol: f64) -> usize {
    depth_for(1.0, r0 * 1.2, reach, tol * 1e-3) + 8
}

/// build_kernel, deepening the germ until the truncation bound is met.
pub fn build_kernel_auto<R: Real>(data: &GermData<R>, alpha: Cx<R>, reach: f64, tol: f64) -> Result<KernelTable<R>> {
    let mut depth = data.depth.max(kernel_depth(data.radius_r, reach, tol));
    let mut last = None;
    for _ in 0..6 {
        let d = data.with_depth(depth)?;
        match build_kernel(&d, alpha, reach, tol) {
            Ok(k) => return Ok(k),
            Err(e @ Error::InsufficientTerms { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
        depth += depth / 4 + 8;
    }
    Err(last.unwrap())
}

// ---------------------------------------------------------------------------
// Paths

/// Distance from p to the segment [a, b].
pub fn seg_distance(a: Complex<f64>, b: Complex<f64>, p: Complex<f64>) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PathOptions {
    pub eps: f64,
    /// The first vertex is 0 and the path leaves it along `start_arg`.
    pub origin_start: bool,
    /// Lattice index 2πik of a declared terminal endpoint.
    pub terminal: Option<i64>,
    /// Lattice point whose required clearance is lowered to this distance.
    pub relaxed: Option<(i64, f64)>,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions { eps: 0.2, origin_start: false, terminal: None, relaxed: None }
    }
}

#[derive(Clone, Debug)]
pub struct PathLog<R: Real> {
    pub vertices: Vec<Cx<R>>,
    pub start_arg: R,
    /// Lifted argument at each vertex.
    pub lift: Vec<R>,
    /// Minimal distance to 2πiℤ outside the exempt approaches.
    pub eps_clearance: f64,
    pub opts: PathOptions,
}

fn principal_arg<R: Real>(z: Cx<R>) -> R {
    z.im.atan2(z.re)
}

impl<R: Real> PathLog<R> {
    pub fn new(vertices: Vec<Cx<R>>, start_arg: R, opts: PathOptions) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Invalid("a path needs two vertices".into()));
        }
        let v64: Vec<Complex<f64>> = vertices.iter().map(|z| Complex::new(z.re.to_f64(), z.im.to_f64())).collect();
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut clearance = f64::INFINITY;
        let nseg = vertices.len() - 1;
        for i in 0..nseg {
            let (a, b) = (v64[i], v64[i + 1]);
            if !(i == 0 && opts.origin_start) && seg_distance(a, b, Complex::new(0.0, 0.0)) < 1e-300 {
                return Err(Error::PathThroughOrigin);
            }
            let lo = (a.im.min(b.im) / two_pi).floor() as i64 - 1;
            let hi = (a.im.max(b.im) / two_pi).ceil() as i64 + 1;
            for k in lo..=hi {
                let p = Complex::new(0.0, two_pi * k as f64);
                let d = seg_distance(a, b, p);
                let exempt = (k == 0 && opts.origin_start && i == 0) || (opts.terminal == Some(k) && i == nseg - 1);
                if exempt {
                    continue;
                }
                let need = match opts.relaxed {
                    Some((kk, r)) if kk == k => r,
                    _ => opts.eps,
                };
                clearance = clearance.min(d);
                if d < need {
                    return Err(Error::PathTooCloseToLattice { lattice: k, distance: d });
                }
            }
        }
        if opts.origin_start {
            let d = (start_arg - principal_arg(vertices[1])).to_f64() / two_pi;
            if (d - d.round()).abs() > 1e-12 {
                return Err(Error::Invalid("start_arg does not lift the first direction".into()));
            }
        }
        let mut lift = Vec::with_capacity(vertices.len());
        lift.push(start_arg);
        for i in 0..nseg {
            let next = if i == 0 && opts.origin_start {
                start_arg
            } else {
                lift[i] + principal_arg(vertices[i + 1] / vertices[i])
            };
            lift.push(next);
        }
        Ok(PathLog { vertices, start_arg, lift, eps_clearance: clearance, opts })
    }

    /// Γ_m: the segment from 1 to 2πim + 1.
    pub fn segment_gamma_m(m: i64) -> Result<Self> {
        let om = crate::numeric::two_pi_i::<R>(m);
        let one = Complex::<R>::one();
        PathLog::new(vec![one, om + one], R::zero(), PathOptions::default())
    }

    pub fn polyline(vertices: Vec<Cx<R>>, opts: PathOptions) -> Result<Self> {
        let a = principal_arg(vertices[if opts.origin_start { 1 } else { 0 }]);
        PathLog::new(vertices, a, opts)
    }

    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn point(&self, seg: usize, t: R) -> Cx<R> {
        let (a, b) = (self.vertices[seg], self.vertices[seg + 1]);
        a + (b - a).scale(t)
    }

    /// Lifted form of a point lying on segment `seg`.
    pub fn lifted_at(&self, seg: usize, p: Cx<R>) -> Lifted<R> {
        let modulus = (p.re * p.re + p.im * p.im).sqrt();
        let arg = if seg == 0 && self.opts.origin_start {
            self.start_arg
        } else {
            self.lift[seg] + principal_arg(p / self.vertices[seg])
        };
        Lifted { modulus, arg }
    }

    pub fn end(&self) -> Cx<R> {
        *self.vertices.last().unwrap()
    }

    pub fn end_lifted(&self) -> Lifted<R> {
        let n = self.segments();
        self.lifted_at(n - 1, self.end())
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| cabs_f64(w[1] - w[0])).sum()
    }

    /// Largest |ζ| along the path.
    pub fn max_modulus(&self) -> f64 {
        self.vertices.iter().map(|z| cabs_f64(*z)).fold(0.0, f64::max)
    }
}

/// Continuation of ζ^γH(ζ) along a path to the point at parameter t of
/// segment `seg`; only the lifted endpoint matters.
pub fn cont_b_alpha<R: Real>(g: &BranchedGerm<R>, path: &PathLog<R>, seg: usize, t: R) -> Cx<R> {
    g.eval(path.lifted_at(seg, path.point(seg, t)))
}

/// Γ̃: (0, 1], then Γ, then [ω+1, ω].
pub fn gamma_tilde<R: Real>(gamma: &PathLog<R>, m: i64) -> Result<PathLog<R>> {
    let om = crate::numeric::two_pi_i::<R>(m);
    let one = Complex::<R>::one();
    let first = gamma.vertices[0];
    let last = gamma.end();
    if cabs_f64(first - one) > 1e-12 || cabs_f64(last - om - one) > 1e-12 {
        return Err(Error::Invalid("Γ must run from 1 to ω + 1".into()));
    }
    let mut v = vec![Complex::zero()];
    v.extend_from_slice(&gamma.vertices);
    v.push(om);
    let opts = PathOptions { origin_start: true, terminal: Some(m), ..gamma.opts };
    PathLog::new(v, R::zero(), opts)
}

// ---------------------------------------------------------------------------
// Laplace

pub enum LaplaceInput<'a, R: Real> {
    Entire(&'a EntireFn<R>),
    Branched(&'a BranchedGerm<R>),
}

/// ∫_0^{e^{iθ}∞} e^{-zζ} g(ζ) dζ by graded Gauss–Legendre panels.
pub fn laplace_ray<R: Real>(g: LaplaceInput<'_, R>, theta: f64, z: Cx<R>, tol: f64) -> Result<Cx<R>> {
    let (r0, c0) = match &g {
        LaplaceInput::Entire(e) => (e.r0, e.c0),
        LaplaceInput::Branched(b) => (b.entire.r0, b.entire.c0),
    };
    let dir64 = Complex::new(theta.cos(), theta.sin());
    let z64 = Complex::new(z.re.to_f64(), z.im.to_f64());
    let rate = (z64 * dir64).re;
    if rate <= r0 * 1.05 {
        return Err(Error::DivergentLaplace(rate));
    }
    if c0 == 0.0 {
        return Ok(Complex::zero());
    }
    let decay = rate - r0;
    let (st, ct) = R::from_f64(theta).sin_cos();
    let dir = Complex::new(ct, st);
    let eval = |t: R| -> Cx<R> {
        let p = dir.scale(t);
        let val = match &g {
            LaplaceInput::Entire(e) => e.eval(p),
            LaplaceInput::Branched(b) => b.eval(Lifted { modulus: t, arg: R::from_f64(theta) }),
        };
        cexp(-(z * p)) * val * dir
    };
    let rule: GaussRule<R> = GaussRule::new(24);
    let panel = |a: f64, b: f64| -> Cx<R> {
        let (ra, rb) = (R::from_f64(a), R::from_f64(b));
        let half = (rb - ra).mul_pow2(-1);
        let mid = (rb + ra).mul_pow2(-1);
        let mut acc = Complex::<R>::zero();
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc = acc + eval(mid + half * *x).scale(*w * half);
        }
        acc
    };
    // geometric grading into 0 handles ζ^γ there
    let h = (0.5 / z64.norm()).min(0.5);
    let mut sum = Complex::<R>::zero();
    // the skipped piece [0, a] is of size a^{Re γ + 1}
    let expo = match &g {
        LaplaceInput::Entire(_) => 1.0,
        LaplaceInput::Branched(b) => b.gamma.re.to_f64() + 1.0,
    };
    if expo <= 0.0 {
        return Err(Error::Invalid("Laplace integrand not integrable at 0".into()));
    }
    let mut a = ((tol * 1e-3).ln() / expo).exp().clamp(1e-300, h * 0.5);
    let mut b = a * 2.0;
    while b <= h {
        sum = sum + panel(a, b);
        a = b;
        b *= 2.0;
    }
    let mut t = a;
    loop {
        let piece = panel(t, t + h);
        sum = sum + piece;
        t += h;
        let tail = c0 * (-(decay) * t).exp() / decay;
        if cabs_f64(piece) < tol * cabs_f64(sum).max(1e-300) * 1e-2 && tail < tol * cabs_f64(sum).max(1e-300) {
            break;
        }
        if t > 1e4 {
            return Err(Error::DivergentLaplace(rate));
        }
    }
    Ok(sum)
}
