//! Residua S^Γ_{ω,k} as iterated integrals along Γ̃, their sum, the
//! invariant map, continuation of Φ̂_k and the monodromy (bridge) check.
//!
//! The simplex integrals are evaluated as a Volterra recursion
//! G_0 = cont b̂_α, G_j(s) = ∫_0^s G_{j-1}(σ) K_α(σ, s)/(e^σ - 1) dσ,
//! S_j = 2πi·G_j(ω). All weights, kernel values and 1/(e^σ-1) factors are
//! folded into one block-lower-triangular matrix, so each level is a
//! matrix-vector product and the full sum is one block forward solve.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::borel::{borel_frac, borel_int, build_kernel_auto, kernel_depth, seg_distance, BranchedGerm, KernelTable, Lifted, PathLog, PathOptions};
use crate::error::{Error, Result};
use crate::numeric::{cabs_f64, cexp, cexpm1, two_pi_i, Cx, GaussRule, Real};
use crate::series::{psi_sequence, FormalSetup, GermData};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct QuadConfig {
    /// Gauss–Legendre nodes per panel.
    pub panel_nodes: usize,
    pub grading_ratio: f64,
    /// Smallest graded panel, relative to the path length.
    pub min_panel: f64,
    /// Panel length ≤ panel_factor × distance to 2πiℤ.
    pub panel_factor: f64,
    pub max_panel: f64,
    /// Truncation tolerance for the kernel and for b̂_α.
    pub kernel_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { panel_nodes: 12, grading_ratio: 0.5, min_panel: 1e-6, panel_factor: 0.5, max_panel: 0.5, kernel_tol: 1e-30 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Panel<R: Real> {
    pub seg: usize,
    pub t0: R,
    pub t1: R,
}

fn lattice_distance(a: Complex<f64>, b: Complex<f64>, skip: &[i64]) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let lo = (a.im.min(b.im) / two_pi).floor() as i64 - 1;
    let hi = (a.im.max(b.im) / two_pi).ceil() as i64 + 1;
    (lo..=hi)
        .filter(|k| !skip.contains(k))
        .map(|k| seg_distance(a, b, Complex::new(0.0, two_pi * k as f64)))
        .fold(f64::INFINITY, f64::min)
}

/// Panels along a path: geometric grading into a terminal lattice endpoint,
/// elsewhere splitting until each panel is short relative to its distance
/// from 2πiℤ. An origin start is exempt (product integration handles ξ^β).
pub fn panelize<R: Real>(path: &PathLog<R>, cfg: &QuadConfig) -> Vec<Panel<R>> {
    let v64: Vec<Complex<f64>> = path.vertices.iter().map(|&z| to64(z)).collect();
    let total = path.length();
    let tmin = cfg.min_panel * total;
    let nseg = path.segments();
    let mut out = Vec::new();
    for seg in 0..nseg {
        let (a, b) = (v64[seg], v64[seg + 1]);
        let len = (b - a).norm();
        let mut skip = vec![];
        let origin = seg == 0 && path.opts.origin_start;
        let terminal = seg == nseg - 1 && path.opts.terminal.is_some();
        if origin {
            skip.push(0);
        }
        if terminal {
            skip.push(path.opts.terminal.unwrap());
        }
        let mut pts: Vec<f64> = vec![0.0, 1.0];
        if terminal {
            let mut t = cfg.grading_ratio;
            loop {
                pts.push(1.0 - t);
                if t * len < tmin {
                    break;
                }
                t *= cfg.grading_ratio;
            }
        }
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts.dedup();
        let mut stack: Vec<(f64, f64)> = pts.windows(2).map(|w| (w[0], w[1])).rev().collect();
        while let Some((t0, t1)) = stack.pop() {
            let (p0, p1) = (a + (b - a) * t0, a + (b - a) * t1);
            let plen = (p1 - p0).norm();
            let touches = (origin && t0 == 0.0) || (terminal && t1 == 1.0);
            let mut d = lattice_distance(p0, p1, &skip);
            if !touches {
                // graded pieces: distance to the exempt point sets the scale
                for &k in &skip {
                    d = d.min(2.0 * seg_distance(p0, p1, Complex::new(0.0, 2.0 * std::f64::consts::PI * k as f64)));
                }
            }
            // product-integration panels are exact only to degree p-1, not 2p-1
            let cap = if origin { 0.25 * cfg.max_panel } else { cfg.max_panel };
            let limit = cap.min(cfg.panel_factor * d);
            if plen > limit && plen > tmin {
                let mid = 0.5 * (t0 + t1);
                stack.push((mid, t1));
                stack.push((t0, mid));
            } else {
                out.push(Panel { seg, t0: R::from_f64(t0), t1: R::from_f64(t1) });
            }
        }
    }
    out
}

/// Weights on samples f = x^β q at the nodes for ∫_{x0}^{x1} f dx, exact when
/// q is a polynomial of degree < nodes.
pub fn product_weights<R: Real>(xs: &[R], beta: Cx<R>, x0: R, x1: R) -> Result<Vec<Cx<R>>> {
    let p = xs.len();
    let pw = |x: R, e: Cx<R>| if x == R::zero() { Complex::zero() } else { cexp(e.scale(x.ln())) };
    let mut m = vec![vec![Complex::<R>::zero(); p + 1]; p];
    for (n, row) in m.iter_mut().enumerate() {
        let e = beta + Complex::new(R::from_i64(n as i64 + 1), R::zero());
        for (l, &x) in xs.iter().enumerate() {
            row[l] = Complex::new(x.powi(n as i32), R::zero());
        }
        row[p] = (pw(x1, e) - pw(x0, e)) / e;
    }
    let w = solve_dense(m)?;
    Ok(w.into_iter().zip(xs).map(|(w, &x)| w / pw(x, beta)).collect())
}

/// Nodes, weights and the folded Volterra matrix along one path.
#[derive(Clone, Debug)]
pub struct QuadGrid<R: Real> {
    pub path: PathLog<R>,
    pub panels: Vec<Panel<R>>,
    pub p: usize,
    /// Exponent of the integrand at an origin start.
    pub beta: Cx<R>,
    pub points: Vec<Cx<R>>,
    pub lifted: Vec<Lifted<R>>,
    /// Arc-length parameter of each node.
    pub s: Vec<f64>,
    pub weights: Vec<Cx<R>>,
    /// Per panel, row-major p×p weights for ∫ from the panel start to each node.
    pub partial: Vec<Vec<Cx<R>>>,
    /// 1/(e^ζ - 1) at the nodes.
    pub inv_exp: Vec<Cx<R>>,
    /// Row i holds the weights of sources up to the end of node i's panel.
    pub rows: Vec<Vec<Cx<R>>>,
    pub end_row: Vec<Cx<R>>,
}

/// 1/(e^ζ - 1) without cancellation near 2πiℤ.
pub fn inv_expm1<R: Real>(z: Cx<R>) -> Cx<R> {
    let k = (z.im.to_f64() / (2.0 * std::f64::consts::PI)).round() as i64;
    Complex::<R>::one() / cexpm1(z - two_pi_i(k))
}

fn horner_adaptive<R: Real>(g: &[Cx<R>], lmags: &[f64], eta: Cx<R>, tol: f64) -> Cx<R> {
    // drop the top terms whose combined size is below tol × the largest term
    let lx = cabs_f64(eta).max(1e-300).ln();
    let top = lmags.iter().enumerate().map(|(n, &m)| m + n as f64 * lx).fold(f64::NEG_INFINITY, f64::max);
    let cut = top + tol.ln();
    let mut acc = 0.0;
    let mut len = g.len();
    while len > 1 {
        let t = (lmags[len - 1] + (len - 1) as f64 * lx - cut).exp();
        if acc + t > 1.0 {
            break;
        }
        acc += t;
        len -= 1;
    }
    g[..len].iter().rev().fold(Complex::zero(), |acc, &a| acc * eta + a)
}

impl<R: Real> QuadGrid<R> {
    /// Lay out panels, nodes and weights. `beta` is the exponent of the
    /// integrand ~ ξ^β at an origin start; the first segment then uses
    /// product integration against x^β.
    pub fn layout(path: &PathLog<R>, cfg: &QuadConfig, beta: Cx<R>) -> Result<QuadGrid<R>> {
        let bf = to64(beta);
        let analytic_at_0 = bf.im == 0.0 && bf.re >= 0.0 && bf.re.fract() == 0.0;
        let product = path.opts.origin_start && !analytic_at_0;
        if product && bf.re <= -1.0 {
            return Err(Error::Invalid("integrand not integrable at the origin".into()));
        }
        let panels = panelize(path, cfg);
        let rule: GaussRule<R> = GaussRule::new(cfg.panel_nodes);
        let p = cfg.panel_nodes;
        let mut points = Vec::new();
        let mut lifted = Vec::new();
        let mut weights = Vec::new();
        let mut partial = Vec::new();
        let mut s = Vec::new();
        let mut arc = vec![0.0];
        for w in path.vertices.windows(2) {
            arc.push(arc.last().unwrap() + cabs_f64(w[1] - w[0]));
        }
        for pn in &panels {
            let seg_vec = path.vertices[pn.seg + 1] - path.vertices[pn.seg];
            let half = (pn.t1 - pn.t0).mul_pow2(-1);
            let mid = (pn.t1 + pn.t0).mul_pow2(-1);
            let ts: Vec<R> = rule.nodes.iter().map(|&x| mid + half * x).collect();
            for &t in &ts {
                let z = path.point(pn.seg, t);
                points.push(z);
                lifted.push(path.lifted_at(pn.seg, z));
                s.push(arc[pn.seg] + t.to_f64() * (arc[pn.seg + 1] - arc[pn.seg]));
            }
            if product && pn.seg == 0 {
                let xs: Vec<R> = ts.iter().map(|&t| t / pn.t1).collect();
                let x0 = pn.t0 / pn.t1;
                let sc = seg_vec.scale(pn.t1);
                weights.extend(product_weights(&xs, beta, x0, R::one())?.into_iter().map(|w| w * sc));
                let mut q = Vec::with_capacity(p * p);
                for &xi in &xs {
                    q.extend(product_weights(&xs, beta, x0, xi)?.into_iter().map(|w| w * sc));
                }
                partial.push(q);
            } else {
                weights.extend(rule.weights.iter().map(|&w| seg_vec.scale(w * half)));
                let mut q = Vec::with_capacity(p * p);
                for i in 0..p {
                    for l in 0..p {
                        q.push(seg_vec.scale(rule.partial[i][l] * half));
                    }
                }
                partial.push(q);
            }
        }
        let inv_exp = points.iter().map(|&z| inv_expm1(z)).collect();
        Ok(QuadGrid { path: path.clone(), panels, p, beta, points, lifted, s, weights, partial, inv_exp, rows: vec![], end_row: vec![] })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Σ weights·f at the nodes.
    pub fn integrate(&self, f: impl Fn(Cx<R>) -> Cx<R>) -> Cx<R> {
        self.points.iter().zip(&self.weights).fold(Complex::zero(), |acc, (z, w)| acc + *w * f(*z))
    }

    /// Fold weights, kernel and 1/(e^σ-1) into the Volterra matrix.
    pub fn fill(&mut self, kernel: &KernelTable<R>, tol: f64) {
        let n = self.len();
        let p = self.p;
        let end = self.path.end();
        let mut rows: Vec<Vec<Cx<R>>> = (0..n).map(|i| vec![Complex::zero(); (i / p + 1) * p]).collect();
        let mut end_row = vec![Complex::zero(); n];
        if !kernel.is_zero() {
            for l in 0..n {
                let g = kernel.source_coeffs(self.points[l]);
                let mags: Vec<f64> = g.iter().map(|c| cabs_f64(*c).max(1e-300).ln()).collect();
                let src = self.points[l];
                let pl = l / p;
                for (i, row) in rows.iter_mut().enumerate().skip(pl * p) {
                    let w = if i / p == pl { self.partial[pl][(i % p) * p + l % p] } else { self.weights[l] };
                    row[l] = w * horner_adaptive(&g, &mags, self.points[i] - src, tol) * self.inv_exp[l];
                }
                end_row[l] = self.weights[l] * horner_adaptive(&g, &mags, end - src, tol) * self.inv_exp[l];
            }
        }
        self.rows = rows;
        self.end_row = end_row;
    }

    pub fn apply(&self, g: &[Cx<R>]) -> Vec<Cx<R>> {
        self.rows.iter().map(|row| dot(row, g)).collect()
    }

    pub fn apply_end(&self, g: &[Cx<R>]) -> Cx<R> {
        dot(&self.end_row, g)
    }

    /// Solve (I - A) G = rhs by block forward substitution.
    pub fn resolvent(&self, rhs: &[Cx<R>]) -> Result<Vec<Cx<R>>> {
        let n = self.len();
        let p = self.p;
        let mut g = vec![Complex::<R>::zero(); n];
        for b in 0..n / p {
            let s0 = b * p;
            let mut mat = vec![vec![Complex::<R>::zero(); p + 1]; p];
            for i in 0..p {
                let row = &self.rows[s0 + i];
                mat[i][p] = rhs[s0 + i] + dot(&row[..s0], &g[..s0]);
                for l in 0..p {
                    let d = if i == l { Complex::<R>::one() } else { Complex::<R>::zero() };
                    mat[i][l] = d - row[s0 + l];
                }
            }
            let x = solve_dense(mat)?;
            g[s0..s0 + p].copy_from_slice(&x);
        }
        Ok(g)
    }
}

fn dot<R: Real>(a: &[Cx<R>], b: &[Cx<R>]) -> Cx<R> {
    let mut re = R::zero();
    let mut im = R::zero();
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re - x.im * y.im;
        im += x.re * y.im + x.im * y.re;
    }
    Complex::new(re, im)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense<R: Real>(mut m: Vec<Vec<Cx<R>>>) -> Result<Vec<Cx<R>>> {
    let n = m.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&a, &b| cabs_f64(m[a][c]).partial_cmp(&cabs_f64(m[b][c])).unwrap()).unwrap();
        if cabs_f64(m[piv][c]) == 0.0 {
            return Err(Error::InternalInconsistency("singular block in the resolvent".into()));
        }
        m.swap(c, piv);
        let inv = Complex::<R>::one() / m[c][c];
        for r in c + 1..n {
            let f = m[r][c] * inv;
            if f.is_zero() {
                continue;
            }
            for k in c..=n {
                let t = m[c][k];
                m[r][k] = m[r][k] - f * t;
            }
        }
    }
    let mut x = vec![Complex::<R>::zero(); n];
    for r in (0..n).rev() {
        let mut acc = m[r][n];
        for k in r + 1..n {
            acc = acc - m[r][k] * x[k];
        }
        x[r] = acc / m[r][r];
    }
    Ok(x)
}

// ---------------------------------------------------------------------------

/// Everything attached to one ω that does not depend on the path.
#[derive(Clone, Debug)]
pub struct Prepared<R: Real> {
    pub m: i64,
    pub omega: Cx<R>,
    pub alpha: Cx<R>,
    pub beta: Cx<R>,
    pub n: usize,
    pub kernel: KernelTable<R>,
    pub b_alpha_hat: BranchedGerm<R>,
    pub depth: usize,
}

/// max(|ζ|, |ζ - ζ'|) over a path: the kernel is needed for |ξ| and |ζ-ξ| up to this.
pub fn path_extent<R: Real>(path: &PathLog<R>) -> f64 {
    let v: Vec<Complex<f64>> = path.vertices.iter().map(|&z| to64(z)).collect();
    let mut e = path.max_modulus();
    for a in &v {
        for b in &v {
            e = e.max((a - b).norm());
        }
    }
    e
}

/// Formal data, kernel and b̂_α for ω = 2πim, good for paths of extent ≤ `extent`.
pub fn prepare<R: Real>(data: &GermData<R>, m: i64, extra_n: usize, extent: f64, tol: f64) -> Result<Prepared<R>> {
    prepare_with(data, m, extra_n, extent, tol, build_kernel_auto)
}

/// [`prepare`] with a caller-supplied kernel builder (used for caching).
/// The builder receives the deepened germ, α, the reach and the tolerance.
pub fn prepare_with<R: Real, F>(data: &GermData<R>, m: i64, extra_n: usize, extent: f64, tol: f64, kernel_for: F) -> Result<Prepared<R>>
where
    F: FnOnce(&GermData<R>, Cx<R>, f64, f64) -> Result<KernelTable<R>>,
{
    if m == 0 {
        return Err(Error::Invalid("m must be nonzero".into()));
    }
    let omega = two_pi_i::<R>(m);
    // tolerances below the working precision cannot be certified
    let tol = tol.max(R::epsilon().to_f64() * 1e7);
    let reach = extent + 0.5;
    let radius = extent;
    let depth = data.depth.max(kernel_depth(data.radius_r, reach, tol));
    let deep = data.with_depth(depth)?;
    let setup = FormalSetup::new(&deep, omega, extra_n)?;
    let kernel = kernel_for(&deep, setup.alpha, reach, tol)?;
    let b_alpha_hat = borel_frac(&setup.alpha_data.b_alpha, deep.radius_r)?;
    let (_, err) = b_alpha_hat.eval_checked(Lifted { modulus: R::from_f64(radius), arg: R::zero() }, tol.max(1e-300) * 1e6).unwrap_or((Complex::zero(), f64::INFINITY));
    if !err.is_finite() && !b_alpha_hat.entire.is_zero() {
        return Err(Error::InsufficientTerms { bound: err, tol, radius });
    }
    Ok(Prepared { m, omega, alpha: setup.alpha, beta: setup.beta(), n: setup.n(), kernel, b_alpha_hat, depth })
}

impl<R: Real> Prepared<R> {
    /// Grid with G_0 = cont b̂_α at the nodes and at the path end.
    pub fn grid(&self, path: &PathLog<R>, cfg: &QuadConfig) -> Result<(QuadGrid<R>, Vec<Cx<R>>, Cx<R>)> {
        let mut grid = QuadGrid::layout(path, cfg, self.beta)?;
        grid.fill(&self.kernel, cfg.kernel_tol);
        let g0: Vec<Cx<R>> = grid.lifted.iter().map(|&z| self.b_alpha_hat.eval(z)).collect();
        let g0_end = self.b_alpha_hat.eval(path.end_lifted());
        Ok((grid, g0, g0_end))
    }
}

/// G_k at the path end for k = 0..=k_max, and the resolvent sum Σ_k G_k(end).
pub fn volterra_levels<R: Real>(grid: &QuadGrid<R>, g0: &[Cx<R>], g0_end: Cx<R>, k_max: usize) -> Result<(Vec<Cx<R>>, Cx<R>)> {
    let mut out = vec![g0_end];
    let mut g = g0.to_vec();
    for _ in 1..=k_max {
        out.push(grid.apply_end(&g));
        g = grid.apply(&g);
    }
    let total = grid.resolvent(g0)?;
    let sum = g0_end + grid.apply_end(&total);
    Ok((out, sum))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridStats {
    pub panels: usize,
    pub nodes: usize,
    pub panel_nodes: usize,
    pub smallest_panel: f64,
    pub kernel_terms: usize,
    pub kernel_k_max: usize,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct ResiduaResult<R: Real> {
    pub m: i64,
    pub omega: Cx<R>,
    pub alpha: Cx<R>,
    pub beta: Cx<R>,
    pub n: usize,
    pub s: Vec<Cx<R>>,
    /// |S_k(p) - S_k(p-4)| plus the kernel truncation bound.
    pub err: Vec<f64>,
    pub partial_sums: Vec<Cx<R>>,
    pub lambda_fit: f64,
    pub c_fit: f64,
    /// C·Λ^{k_max+1}/(1-Λ) from the fit (infinite when Λ ≥ 1).
    pub tail_error: f64,
    /// Σ_{k≥0} S_k from the resolvent.
    pub sum: Cx<R>,
    pub sum_err: f64,
    pub a: Cx<R>,
    pub side: HornSide,
    pub stats: GridStats,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum HornSide {
    Up,
    Low,
}

/// S^Γ_{ω,k} for k ≤ k_max along Γ (from 1 to ω+1), with a coarse companion
/// run (p-4 nodes per panel) as the error estimate.
pub fn residua<R: Real>(data: &GermData<R>, m: i64, gamma: &PathLog<R>, k_max: usize, cfg: &QuadConfig) -> Result<ResiduaResult<R>> {
    residua_with(data, m, gamma, k_max, cfg, 0)
}

pub fn residua_with<R: Real>(data: &GermData<R>, m: i64, gamma: &PathLog<R>, k_max: usize, cfg: &QuadConfig, extra_n: usize) -> Result<ResiduaResult<R>> {
    let path = crate::borel::gamma_tilde(gamma, m)?;
    let prep = prepare(data, m, extra_n, path_extent(&path), cfg.kernel_tol)?;
    residua_prepared(&prep, &path, k_max, cfg, data.rho)
}

pub fn residua_prepared<R: Real>(prep: &Prepared<R>, path: &PathLog<R>, k_max: usize, cfg: &QuadConfig, rho: Cx<R>) -> Result<ResiduaResult<R>> {
    let tpi = two_pi_i::<R>(1);
    let (grid, g0, g0e) = prep.grid(path, cfg)?;
    let (levels, sum) = volterra_levels(&grid, &g0, g0e, k_max)?;
    let coarse_cfg = QuadConfig { panel_nodes: cfg.panel_nodes.saturating_sub(4).max(2), ..*cfg };
    let (cg, cg0, cg0e) = prep.grid(path, &coarse_cfg)?;
    let (clevels, csum) = volterra_levels(&cg, &cg0, cg0e, k_max)?;
    let s: Vec<Cx<R>> = levels.iter().map(|&g| tpi * g).collect();
    let kerr = prep.kernel.error_bound * 2.0 * std::f64::consts::PI;
    let err: Vec<f64> = levels.iter().zip(&clevels).map(|(a, b)| cabs_f64(*a - *b) * 2.0 * std::f64::consts::PI + kerr).collect();
    let mut partial = Vec::with_capacity(s.len());
    let mut acc = Complex::zero();
    for &x in &s {
        acc = acc + x;
        partial.push(acc);
    }
    let mags: Vec<f64> = s.iter().map(|z| cabs_f64(*z)).collect();
    let (lambda, c) = fit_lambda(&mags);
    let tail = if lambda < 1.0 { c * lambda.powi(k_max as i32 + 1) / (1.0 - lambda) } else { f64::INFINITY };
    let sum = tpi * sum;
    let sum_err = cabs_f64(sum - tpi * csum) + kerr;
    let a = ev_invariant(sum, prep.m, rho);
    let smallest = grid.panels.iter().map(|p| cabs_f64((grid.path.vertices[p.seg + 1] - grid.path.vertices[p.seg]).scale(p.t1 - p.t0))).fold(f64::INFINITY, f64::min);
    let stats = GridStats {
        panels: grid.panels.len(),
        nodes: grid.len(),
        panel_nodes: cfg.panel_nodes,
        smallest_panel: smallest,
        kernel_terms: prep.kernel.u.iter().map(|r| r.len()).max().unwrap_or(0),
        kernel_k_max: prep.kernel.k_max,
        depth: prep.depth,
    };
    Ok(ResiduaResult {
        m: prep.m,
        omega: prep.omega,
        alpha: prep.alpha,
        beta: prep.beta,
        n: prep.n,
        s,
        err,
        partial_sums: partial,
        lambda_fit: lambda,
        c_fit: c,
        tail_error: tail,
        sum,
        sum_err,
        a,
        side: horn_side(prep.m),
        stats,
    })
}

/// Least-squares fit of log|S_k| ≈ log C + k log Λ over the last
/// max(3, k_max/2) nonzero terms; exact zeros are skipped.
pub fn fit_lambda(mags: &[f64]) -> (f64, f64) {
    let k_max = mags.len().saturating_sub(1);
    let want = 3.max(k_max / 2);
    let pts: Vec<(f64, f64)> = mags.iter().enumerate().rev().filter(|(_, &m)| m > 0.0).take(want).map(|(k, &m)| (k as f64, m.ln())).collect();
    if pts.is_empty() {
        return (0.0, 0.0);
    }
    if pts.len() == 1 {
        return (0.0, pts[0].1.exp());
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    ((slope).exp(), (my - slope * mx).exp())
}

/// Σ S_k with the fitted geometric tail; stops early once two consecutive
/// terms drop below tol × |partial sum|.
pub fn sum_residua<R: Real>(s: &[Cx<R>], tol: f64) -> Result<(Cx<R>, f64)> {
    let mags: Vec<f64> = s.iter().map(|z| cabs_f64(*z)).collect();
    let mut acc = Complex::<R>::zero();
    let mut quiet = 0;
    for (k, &x) in s.iter().enumerate() {
        acc = acc + x;
        if mags[k] < tol * cabs_f64(acc) {
            quiet += 1;
            if quiet == 2 {
                return Ok((acc, mags[k]));
            }
        } else {
            quiet = 0;
        }
    }
    if mags.iter().all(|&m| m == 0.0) {
        return Ok((acc, 0.0));
    }
    let (lambda, c) = fit_lambda(&mags);
    if lambda >= 1.0 {
        return Err(Error::ConvergenceNotDetected(lambda));
    }
    let tail = c * lambda.powi(s.len() as i32) / (1.0 - lambda);
    if tail > tol * cabs_f64(acc).max(1e-300) {
        return Err(Error::TailNotBounded { bound: tail, tol });
    }
    Ok((acc, tail))
}

/// Which horn map carries A_{-m}: low for m > 0, up for m < 0.
pub fn horn_side(m: i64) -> HornSide {
    if m > 0 {
        HornSide::Low
    } else {
        HornSide::Up
    }
}

/// A_{-m} = S e^{-4π²mρ} for m > 0, A_{-m} = -S for m < 0.
pub fn ev_invariant<R: Real>(s: Cx<R>, m: i64, rho: Cx<R>) -> Cx<R> {
    if m > 0 {
        let four_pi2 = R::pi() * R::pi() * R::from_f64(4.0);
        s * cexp(-(rho.scale(four_pi2 * R::from_i64(m))))
    } else {
        -s
    }
}

// ---------------------------------------------------------------------------
// Continuation and monodromy

/// Path from 0 through 1 and ω + 1 to `zeta`, following Γ_m.
pub fn path_to<R: Real>(m: i64, zeta: Cx<R>, relaxed: Option<(i64, f64)>) -> Result<PathLog<R>> {
    let one = Complex::<R>::one();
    let om = two_pi_i::<R>(m);
    let v = vec![Complex::zero(), one, om + one, zeta];
    PathLog::new(v, R::zero(), PathOptions { origin_start: true, relaxed, ..Default::default() })
}

/// cont_γ Φ̂_k at the end of γ (a path from 0 avoiding 2πiℤ at its end).
pub fn cont_phi_k<R: Real>(prep: &Prepared<R>, path: &PathLog<R>, k: usize, cfg: &QuadConfig) -> Result<Cx<R>> {
    let end = path.end();
    let dist = lattice_distance(to64(end), to64(end), &[]);
    if dist < 1e-12 {
        return Err(Error::EndpointOnLattice);
    }
    let (grid, g0, g0e) = prep.grid(path, cfg)?;
    let (levels, _) = volterra_levels(&grid, &g0, g0e, k)?;
    Ok(levels[k] * inv_expm1(end))
}

fn to64<R: Real>(z: Cx<R>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VariationReport {
    pub k: usize,
    pub zeta0: [f64; 2],
    pub var_measured: [f64; 2],
    pub var_predicted: [f64; 2],
    pub rel_error: f64,
    pub abs_error: f64,
}

/// Monodromy of cont Φ̂_k(ω + ζ) around ζ = 0 at ζ0, for k = 0..=k_max:
/// the direct path to ω + ζ0 against the same path followed by one
/// counterclockwise 16-gon around ω.
pub fn variation_at<R: Real>(prep: &Prepared<R>, k_max: usize, zeta0: Cx<R>, cfg: &QuadConfig) -> Result<Vec<Cx<R>>> {
    let r0 = cabs_f64(zeta0);
    if !(1e-3..=std::f64::consts::PI).contains(&r0) {
        return Err(Error::LoopTooClose(r0));
    }
    let om = prep.omega;
    let relaxed = Some((prep.m, 0.5 * r0));
    let direct = path_to(prep.m, om + zeta0, relaxed)?;
    let mut v = direct.vertices.clone();
    let tpi = R::pi().mul_pow2(1);
    for j in 1..=16 {
        let (s, c) = (tpi * R::from_f64(j as f64 / 16.0)).sin_cos();
        v.push(om + zeta0 * Complex::new(c, s));
    }
    let looped = PathLog::new(v, R::zero(), direct.opts)?;
    let (gd, g0d, g0ed) = prep.grid(&direct, cfg)?;
    let (ld, _) = volterra_levels(&gd, &g0d, g0ed, k_max)?;
    let (gl, g0l, g0el) = prep.grid(&looped, cfg)?;
    let (ll, _) = volterra_levels(&gl, &g0l, g0el, k_max)?;
    let f = inv_expm1(om + zeta0);
    Ok(ll.iter().zip(&ld).map(|(a, b)| (*a - *b) * f).collect())
}

/// Σ_{k₁+k₂=k, k₂≥1} S_{k₁} Ψ̂_{k₂}(ζ0) for k = 0..=k_max.
pub fn predicted_variation<R: Real>(data: &GermData<R>, s: &[Cx<R>], m: i64, k_max: usize, zeta0: Cx<R>) -> Result<Vec<Cx<R>>> {
    let om = two_pi_i::<R>(m);
    let d = data.with_depth(60 + k_max)?;
    let psi = psi_sequence(&d, om, k_max)?;
    let hats: Vec<Cx<R>> = psi.iter().map(|p| borel_int(p, d.radius_r).eval(zeta0)).collect();
    Ok((0..=k_max)
        .map(|k| {
            let mut acc = Complex::zero();
            for k2 in 1..=k {
                acc = acc + s[k - k2] * hats[k2];
            }
            acc
        })
        .collect())
}

/// Measured against predicted monodromy for k = 0..=k_max.
pub fn bridge_check<R: Real>(data: &GermData<R>, prep: &Prepared<R>, s: &[Cx<R>], k_max: usize, zeta0: Cx<R>, cfg: &QuadConfig) -> Result<Vec<VariationReport>> {
    let meas = variation_at(prep, k_max, zeta0, cfg)?;
    let pred = predicted_variation(data, s, prep.m, k_max, zeta0)?;
    let c2 = |z: Cx<R>| [z.re.to_f64(), z.im.to_f64()];
    Ok((0..=k_max)
        .map(|k| {
            let abs = cabs_f64(meas[k] - pred[k]);
            VariationReport {
                k,
                zeta0: c2(zeta0),
                var_measured: c2(meas[k]),
                var_predicted: c2(pred[k]),
                rel_error: abs / cabs_f64(pred[k]).max(1e-300),
                abs_error: abs,
            }
        })
        .collect())
}

/// Samples (s, ζ, cont Φ̂_k(ζ)) at the nodes of a path from 0.
pub fn profile<R: Real>(prep: &Prepared<R>, path: &PathLog<R>, k: usize, cfg: &QuadConfig) -> Result<Vec<(f64, Cx<R>, Cx<R>)>> {
    let (grid, g0, _) = prep.grid(path, cfg)?;
    let mut g = g0;
    for _ in 0..k {
        g = grid.apply(&g);
    }
    Ok((0..grid.len()).map(|i| (grid.s[i], grid.points[i], g[i] * grid.inv_exp[i])).collect())
}

