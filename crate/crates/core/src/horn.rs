//! Independent dynamical oracle: Fatou coordinates by iterating the rational
//! germ and summing φ̃ to its smallest term, the lifted horn maps, and their
//! Fourier coefficients.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::alien::HornSide;
use crate::error::{Error, Result};
use crate::numeric::{cabs_f64, cexp, cln_lifted, cx, Cx, Real};
use crate::series::{solve_phi_tilde, GermData, GermSpec};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct OracleConfig {
    /// Sampling height |Im Z| (before the ρ shift on the low side).
    pub h: f64,
    /// Samples per period; a power of two.
    pub m: usize,
    pub n_escape: usize,
    pub r_big: f64,
    /// Cap on the number of φ̃ terms.
    pub j_opt: usize,
    /// Largest acceptable smallest term of the φ̃ sum.
    pub regime_tol: f64,
    /// Working precision; selects the arithmetic tier in the front-end.
    pub precision_bits: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { h: 2.5, m: 64, n_escape: 10_000, r_big: 40.0, j_opt: 60, regime_tol: 1e-20, precision_bits: 106 }
    }
}

impl OracleConfig {
    pub fn validate(&self, radius_r: f64) -> Result<()> {
        if self.h < 2.0 {
            return Err(Error::Invalid(format!("H = {} below 2", self.h)));
        }
        if !self.m.is_power_of_two() || self.m < 8 {
            return Err(Error::Invalid(format!("M = {} is not a power of two ≥ 8", self.m)));
        }
        if self.r_big < 4.0 * radius_r {
            return Err(Error::Invalid(format!("R_big = {} below 4·R₀", self.r_big)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Oracle<R: Real> {
    pub spec: GermSpec<R>,
    pub rho: Cx<R>,
    /// φ̃ coefficients c_1, c_2, … (index j-1 holds c_j).
    pub phi: Vec<Cx<R>>,
    pub cfg: OracleConfig,
}

#[derive(Clone, Debug)]
pub struct FourierResult<R: Real> {
    pub side: HornSide,
    /// Im Z of the sampling line.
    pub height: f64,
    pub const_term: Cx<R>,
    /// 0 (up) or -2πiρ (low).
    pub const_expected: Cx<R>,
    /// A_m (up) or A_{-m} (low), keyed by the signed index; only modes above the floor.
    pub a: BTreeMap<i64, Cx<R>>,
    /// Largest DFT coefficient among frequencies |k| ≥ M/4.
    pub residual_floor: f64,
    /// Error estimate per entry of `a`: floor / e^{-2π|m||y_eff|}.
    pub err: BTreeMap<i64, f64>,
    /// Largest |h(Z) - Z - const| over the samples.
    pub deviation: f64,
}

impl<R: Real> FourierResult<R> {
    pub fn coefficient(&self, idx: i64) -> Result<Cx<R>> {
        self.a.get(&idx).copied().ok_or(Error::NoiseFloorDominates { m: idx, floor: self.residual_floor })
    }

    pub fn const_error(&self) -> f64 {
        cabs_f64(self.const_term - self.const_expected)
    }
}

fn principal_log<R: Real>(w: Cx<R>) -> Cx<R> {
    let m = (w.re * w.re + w.im * w.im).sqrt();
    cln_lifted(m, w.im.atan2(w.re))
}

/// Log with arg in (0, 2π).
fn log_0_2pi<R: Real>(w: Cx<R>) -> Cx<R> {
    let m = (w.re * w.re + w.im * w.im).sqrt();
    let mut a = w.im.atan2(w.re);
    if a < R::zero() {
        a += R::pi().mul_pow2(1);
    }
    cln_lifted(m, a)
}

impl<R: Real> Oracle<R> {
    pub fn new(data: &GermData<R>, cfg: OracleConfig) -> Result<Self> {
        cfg.validate(data.radius_r)?;
        let d = data.with_depth(cfg.j_opt + 2)?;
        let phi = solve_phi_tilde(&d)?;
        let n = phi.coeffs.len().min(cfg.j_opt + 1);
        Ok(Oracle { spec: d.spec.clone(), rho: d.rho, phi: phi.coeffs[1..n].to_vec(), cfg })
    }

    pub fn f(&self, z: Cx<R>) -> Cx<R> {
        self.spec.eval(z)
    }

    /// φ̃(w) and φ̃'(w), summed up to the smallest term.
    pub fn phi_sum(&self, w: Cx<R>) -> Result<(Cx<R>, Cx<R>)> {
        let inv = Complex::<R>::one() / w;
        let mut p = inv;
        let mut acc = Complex::zero();
        let mut dacc = Complex::zero();
        let mut prev = f64::INFINITY;
        let mut smallest = f64::INFINITY;
        for (i, &c) in self.phi.iter().enumerate() {
            let j = i + 1;
            let t = c * p;
            let mag = cabs_f64(t);
            if !c.is_zero() {
                if mag > prev && j > 2 {
                    break;
                }
                prev = mag;
                smallest = smallest.min(mag);
            }
            acc = acc + t;
            dacc = dacc - t.scale(R::from_i64(j as i64)) * inv;
            p = p * inv;
        }
        let scale = cabs_f64(w).max(1.0);
        if smallest.is_finite() && smallest > self.cfg.regime_tol * scale {
            return Err(Error::NoAsymptoticRegime(smallest));
        }
        Ok((acc, dacc))
    }

    fn step(&self, w: Cx<R>, n: usize) -> Result<Cx<R>> {
        let next = self.f(w);
        if !cabs_f64(next).is_finite() {
            return Err(Error::OrbitEscapesDomain(n));
        }
        Ok(next)
    }

    /// v⁺(z) = [w_n + ρ Log w_n + φ̃(w_n)] - n with Re w_n > R_big, Log principal.
    pub fn fatou_plus(&self, z: Cx<R>) -> Result<Cx<R>> {
        self.fatou_plus_at(z, self.cfg.r_big)
    }

    /// v⁺ with an explicit escape threshold on Re w.
    pub fn fatou_plus_at(&self, z: Cx<R>, r: f64) -> Result<Cx<R>> {
        let mut w = z;
        let mut n = 0usize;
        while w.re.to_f64() <= r {
            if n >= self.cfg.n_escape {
                return Err(Error::OrbitEscapesDomain(n));
            }
            w = self.step(w, n)?;
            n += 1;
        }
        let (phi, _) = self.phi_sum(w)?;
        Ok(w + self.rho * principal_log(w) + phi - cx(n as f64, 0.0))
    }

    /// v⁺(f(z)) - v⁺(z) - 1 with the two orbits stopped at thresholds 1.5
    /// apart, so the asymptotic sum is evaluated at different points.
    pub fn abel_residual(&self, z: Cx<R>) -> Result<Cx<R>> {
        let r = self.cfg.r_big;
        Ok(self.fatou_plus_at(self.f(z), r)? - self.fatou_plus_at(z, r + 1.5)? - cx(1.0, 0.0))
    }

    /// w₀ solving w₀ + ρ Log_{(0,2π)} w₀ + φ̃(w₀) = target, by Newton from the target.
    pub fn solve_minus(&self, target: Cx<R>) -> Result<(Cx<R>, usize)> {
        let mut w = target;
        let tol = R::epsilon().to_f64() * 64.0;
        for it in 1..=60 {
            let (phi, dphi) = self.phi_sum(w)?;
            let g = w + self.rho * log_0_2pi(w) + phi - target;
            let dg = Complex::<R>::one() + self.rho / w + dphi;
            let delta = g / dg;
            w = w - delta;
            if !cabs_f64(w).is_finite() {
                break;
            }
            if cabs_f64(delta) <= tol * cabs_f64(w) {
                return Ok((w, it));
            }
        }
        Err(Error::NewtonDiverged(format!("{:?}", (target.re.to_f64(), target.im.to_f64()))))
    }

    /// (v⁻)^{-1}(Z) = f^{∘n}(w₀) with v⁻(w₀) = Z - n, Re(Z - n) ≤ -R_big.
    pub fn fatou_minus_inverse(&self, z: Cx<R>) -> Result<Cx<R>> {
        let n = (z.re.to_f64() + self.cfg.r_big).ceil().max(0.0) as usize;
        let (mut w, _) = self.solve_minus(z - cx(n as f64, 0.0))?;
        for i in 0..n {
            w = self.step(w, i)?;
        }
        Ok(w)
    }

    /// v⁻(w) for Re w ≤ -R_big (no iteration), used for round trips.
    pub fn fatou_minus_far(&self, w: Cx<R>) -> Result<Cx<R>> {
        let (phi, _) = self.phi_sum(w)?;
        Ok(w + self.rho * log_0_2pi(w) + phi)
    }

    /// h = v⁺ ∘ (v⁻)^{-1}.
    pub fn horn(&self, z: Cx<R>) -> Result<Cx<R>> {
        self.fatou_plus(self.fatou_minus_inverse(z)?)
    }

    /// Sampling height: +H for the up horn; -H + 2π·min(Re ρ, 0) for the low horn,
    /// where the modes carry e^{-2πim(Z - 2πiρ)}.
    pub fn height(&self, side: HornSide) -> f64 {
        match side {
            HornSide::Up => self.cfg.h,
            HornSide::Low => -self.cfg.h + 2.0 * std::f64::consts::PI * self.rho.re.to_f64().min(0.0),
        }
    }

    /// (Z_j, h(Z_j)) on the sampling line.
    pub fn sample(&self, side: HornSide) -> Result<Vec<(Cx<R>, Cx<R>)>> {
        let m = self.cfg.m;
        let y = self.height(side);
        (0..m)
            .map(|j| {
                let z = Complex::new(R::from_i64(j as i64) / R::from_i64(m as i64), R::from_f64(y));
                Ok((z, self.horn(z)?))
            })
            .collect()
    }

    pub fn horn_fourier(&self, side: HornSide) -> Result<FourierResult<R>> {
        self.fourier_of(side, &self.sample(side)?)
    }

    /// Fourier analysis of samples produced by [`Oracle::sample`].
    pub fn fourier_of(&self, side: HornSide, samples: &[(Cx<R>, Cx<R>)]) -> Result<FourierResult<R>> {
        let m = samples.len();
        if m != self.cfg.m {
            return Err(Error::Invalid(format!("{m} samples for M = {}", self.cfg.m)));
        }
        let y = self.height(side);
        let d: Vec<Cx<R>> = samples.iter().map(|&(z, h)| h - z).collect();
        // c_k = (1/M) Σ_j d_j e^{-2πi jk/M}
        let two_pi = R::pi().mul_pow2(1);
        let coef = |k: i64| -> Cx<R> {
            let mut acc = Complex::<R>::zero();
            for (j, &dj) in d.iter().enumerate() {
                let ang = -(two_pi * R::from_i64(j as i64 * k) / R::from_i64(m as i64));
                let (s, c) = ang.sin_cos();
                acc = acc + dj * Complex::new(c, s);
            }
            acc / cx(m as f64, 0.0)
        };
        let const_term = coef(0);
        let half = (m / 2) as i64;
        let floor = (m as i64 / 4..=half).flat_map(|k| [coef(k), coef(-k)]).map(cabs_f64).fold(0.0, f64::max);
        let deviation = d.iter().map(|&v| cabs_f64(v - const_term)).fold(0.0, f64::max);
        let mut a = BTreeMap::new();
        let mut err = BTreeMap::new();
        for mm in 1..(m as i64 / 4) {
            if 2.0 * std::f64::consts::PI * mm as f64 * y.abs() > 700.0 {
                break;
            }
            let (k, idx) = match side {
                HornSide::Up => (mm, mm),
                HornSide::Low => (-mm, -mm),
            };
            let c = coef(k);
            // coefficient of e^{±2πimx} is A e^{∓2πimZ} evaluated at Im Z = y
            let damp = match side {
                HornSide::Up => cexp(cx::<R>(2.0 * std::f64::consts::PI * mm as f64 * y, 0.0)),
                HornSide::Low => cexp(cx::<R>(-2.0 * std::f64::consts::PI * mm as f64 * y, 0.0)),
            };
            if cabs_f64(c) < floor {
                continue;
            }
            a.insert(idx, c * damp);
            err.insert(idx, floor * (2.0 * std::f64::consts::PI * mm as f64 * y.abs()).exp());
        }
        let const_expected = match side {
            HornSide::Up => Complex::zero(),
            HornSide::Low => -(self.rho * Complex::new(R::zero(), R::pi().mul_pow2(1))),
        };
        Ok(FourierResult { side, height: y, const_term, const_expected, a, residual_floor: floor, err, deviation })
    }
}

/// v⁺ for a germ.
pub fn fatou_plus<R: Real>(data: &GermData<R>, z: Cx<R>, cfg: OracleConfig) -> Result<Cx<R>> {
    Oracle::new(data, cfg)?.fatou_plus(z)
}

/// (v⁻)^{-1} for a germ.
pub fn fatou_minus_inverse<R: Real>(data: &GermData<R>, z: Cx<R>, cfg: OracleConfig) -> Result<Cx<R>> {
    Oracle::new(data, cfg)?.fatou_minus_inverse(z)
}

pub fn horn_fourier<R: Real>(data: &GermData<R>, side: HornSide, cfg: OracleConfig) -> Result<FourierResult<R>> {
    Oracle::new(data, cfg)?.horn_fourier(side)
}
