//! Subcommand bodies, generic over the precision tier.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use resurge_core::alien::{
    path_extent, prepare_with, profile, residua_prepared, GridStats, HornSide, ResiduaResult,
};
use resurge_core::borel::{gamma_tilde, PathLog, PathOptions};
use resurge_core::horn::{FourierResult, Oracle};
use resurge_core::numeric::{cabs_f64, Cx, Dd, Qd, Real, Tier};
use resurge_core::series::{cx_strings, GermData};
use resurge_core::Error;

use crate::cache::KernelCache;
use crate::config::{germ_data, parse_cx_list, ConfigError, CxStr, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Invariants,
    Oracle,
    Compare,
    Profile,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResiduaRecord {
    pub m: i64,
    pub omega: CxStr,
    pub alpha: CxStr,
    pub beta: CxStr,
    pub n: usize,
    pub s: Vec<CxStr>,
    pub err: Vec<f64>,
    pub partial_sums: Vec<CxStr>,
    pub lambda_fit: f64,
    pub c_fit: f64,
    pub tail_error: f64,
    /// S^Γ_ω = Σ_k S_k.
    pub sum: CxStr,
    pub sum_err: f64,
    /// A_{-m}.
    pub a: CxStr,
    pub side: HornSide,
    pub stats: GridStats,
}

impl ResiduaRecord {
    pub fn from_result<R: Real>(r: &ResiduaResult<R>) -> Self {
        ResiduaRecord {
            m: r.m,
            omega: cx_strings(r.omega),
            alpha: cx_strings(r.alpha),
            beta: cx_strings(r.beta),
            n: r.n,
            s: r.s.iter().map(|&z| cx_strings(z)).collect(),
            err: r.err.clone(),
            partial_sums: r.partial_sums.iter().map(|&z| cx_strings(z)).collect(),
            lambda_fit: r.lambda_fit,
            c_fit: r.c_fit,
            tail_error: r.tail_error,
            sum: cx_strings(r.sum),
            sum_err: r.sum_err,
            a: cx_strings(r.a),
            side: r.side,
            stats: r.stats.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FourierRecord {
    pub side: HornSide,
    pub height: f64,
    pub const_term: CxStr,
    pub const_expected: CxStr,
    pub const_error: f64,
    pub a: BTreeMap<i64, CxStr>,
    pub err: BTreeMap<i64, f64>,
    pub residual_floor: f64,
    pub deviation: f64,
}

impl FourierRecord {
    pub fn from_result<R: Real>(r: &FourierResult<R>) -> Self {
        FourierRecord {
            side: r.side,
            height: r.height,
            const_term: cx_strings(r.const_term),
            const_expected: cx_strings(r.const_expected),
            const_error: r.const_error(),
            a: r.a.iter().map(|(&k, &v)| (k, cx_strings(v))).collect(),
            err: r.err.clone(),
            residual_floor: r.residual_floor,
            deviation: r.deviation,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    /// Invariant index: the row compares A_{index}.
    pub index: i64,
    pub m: i64,
    pub side: HornSide,
    pub a_resurgent: CxStr,
    pub a_oracle: Option<CxStr>,
    pub rel_diff: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub precision_bits: u32,
    pub tier: Tier,
    pub config: RunConfig,
    pub residua: Vec<ResiduaRecord>,
    pub oracle: Vec<FourierRecord>,
    pub comparison: Vec<CompareRow>,
    pub failures: Vec<String>,
}

/// Everything a command produces: the deterministic record, wall times and extra CSV files.
#[derive(Debug)]
pub struct Outcome {
    pub record: RunRecord,
    pub timings: BTreeMap<String, f64>,
    pub files: Vec<(String, String)>,
    pub exit: i32,
}

/// Exit code for a library error.
pub fn exit_for(e: &Error) -> i32 {
    match e {
        Error::Invalid(_)
        | Error::NotSimpleParabolic(_)
        | Error::NotRational(_)
        | Error::PathTooCloseToLattice { .. }
        | Error::PathThroughOrigin
        | Error::EndpointOnLattice
        | Error::LoopTooClose(_)
        | Error::PrecisionBudgetExceeded { .. } => EXIT_INVALID,
        _ => EXIT_FAILED,
    }
}

struct Ctx<'a, R: Real> {
    cfg: &'a RunConfig,
    data: GermData<R>,
    cache: &'a KernelCache,
    timings: BTreeMap<String, f64>,
    failures: Vec<String>,
    exit: i32,
}

impl<R: Real> Ctx<'_, R> {
    fn fail(&mut self, what: String, code: i32) {
        self.failures.push(what);
        self.exit = self.exit.max(code);
    }

    fn gamma(&self, m: i64) -> Result<PathLog<R>, Error> {
        match &self.cfg.path_override {
            Some(v) => {
                let pts = parse_cx_list::<R>(v, "path_override").map_err(|e| Error::Invalid(e.0))?;
                PathLog::polyline(pts, PathOptions::default())
            }
            None => PathLog::segment_gamma_m(m),
        }
    }

    fn residua(&mut self, m: i64) -> Result<ResiduaResult<R>, Error> {
        let path = gamma_tilde(&self.gamma(m)?, m)?;
        let q = self.cfg.quadrature;
        let cache = self.cache;
        let prep = prepare_with(&self.data, m, 0, path_extent(&path), q.kernel_tol, |d, a, reach, tol| cache.kernel(d, a, reach, tol))?;
        residua_prepared(&prep, &path, self.cfg.k_max, &q, self.data.rho)
    }

    fn invariants(&mut self) -> Vec<(i64, ResiduaResult<R>)> {
        let mut out = Vec::new();
        for &m in &self.cfg.m_list.clone() {
            let t = Instant::now();
            match self.residua(m) {
                Ok(r) => {
                    let any = r.s.iter().any(|z| cabs_f64(*z) > 0.0);
                    if any && (r.lambda_fit.is_nan() || r.lambda_fit >= 1.0) {
                        self.fail(format!("m = {m}: {}", Error::ConvergenceNotDetected(r.lambda_fit)), EXIT_FAILED);
                    }
                    out.push((m, r));
                }
                Err(e) => {
                    let code = exit_for(&e);
                    self.fail(format!("m = {m}: {e}"), code);
                }
            }
            self.timings.insert(format!("residua_m{m}"), t.elapsed().as_secs_f64());
        }
        out
    }

    fn oracle(&mut self, sides: &[HornSide]) -> (Vec<FourierResult<R>>, Vec<(String, String)>) {
        let t = Instant::now();
        let mut res = Vec::new();
        let mut files = Vec::new();
        let o = match Oracle::new(&self.data, self.cfg.oracle) {
            Ok(o) => o,
            Err(e) => {
                let code = exit_for(&e);
                self.fail(format!("oracle: {e}"), code);
                return (res, files);
            }
        };
        for &side in sides {
            match o.sample(side).and_then(|smp| Ok((o.fourier_of(side, &smp)?, smp))) {
                Ok((r, samples)) => {
                    let mut csv = String::from("x,re_h,im_h\n");
                    for (z, h) in samples {
                        csv.push_str(&format!("{},{},{}\n", z.re.to_sci_string(), h.re.to_sci_string(), h.im.to_sci_string()));
                    }
                    files.push((format!("oracle_{}.csv", side_name(side)), csv));
                    res.push(r);
                }
                Err(e) => {
                    let code = exit_for(&e);
                    self.fail(format!("oracle {}: {e}", side_name(side)), code);
                }
            }
        }
        self.timings.insert("oracle".into(), t.elapsed().as_secs_f64());
        (res, files)
    }
}

pub fn side_name(s: HornSide) -> &'static str {
    match s {
        HornSide::Up => "up",
        HornSide::Low => "low",
    }
}

fn run_tier<R: Real>(cmd: Command, cfg: &RunConfig, cache: &KernelCache, k_profile: usize) -> Result<Outcome, ConfigError> {
    let data = germ_data::<R>(cfg)?;
    let mut ctx = Ctx { cfg, data, cache, timings: BTreeMap::new(), failures: Vec::new(), exit: EXIT_OK };
    let mut residua = Vec::new();
    let mut oracle = Vec::new();
    let mut comparison = Vec::new();
    let mut files = Vec::new();
    let total = Instant::now();
    match cmd {
        Command::Invariants => {
            residua = ctx.invariants().iter().map(|(_, r)| ResiduaRecord::from_result(r)).collect();
        }
        Command::Oracle => {
            let (o, f) = ctx.oracle(&[HornSide::Up, HornSide::Low]);
            oracle = o.iter().map(FourierRecord::from_result).collect();
            files = f;
        }
        Command::Compare => {
            let res = ctx.invariants();
            let mut sides: Vec<HornSide> = cfg.m_list.iter().map(|&m| resurge_core::alien::horn_side(m)).collect();
            sides.sort_by_key(|s| side_name(*s));
            sides.dedup();
            let (o, f) = ctx.oracle(&sides);
            files = f;
            for (m, r) in &res {
                let idx = -m;
                let four = o.iter().find(|x| x.side == r.side);
                let got: Option<Cx<R>> = four.and_then(|x| x.coefficient(idx).ok());
                let rel = got.map(|g| {
                    let scale = cabs_f64(r.a).max(cabs_f64(g));
                    if scale == 0.0 {
                        0.0
                    } else {
                        cabs_f64(r.a - g) / scale
                    }
                });
                let pass = rel.is_some_and(|x| x <= cfg.compare_tol);
                if !pass {
                    ctx.fail(format!("compare A_{idx}: relative difference {rel:?} above {}", cfg.compare_tol), EXIT_FAILED);
                }
                comparison.push(CompareRow {
                    index: idx,
                    m: *m,
                    side: r.side,
                    a_resurgent: cx_strings(r.a),
                    a_oracle: got.map(cx_strings),
                    rel_diff: rel,
                    tol: cfg.compare_tol,
                    pass,
                });
            }
            residua = res.iter().map(|(_, r)| ResiduaRecord::from_result(r)).collect();
            oracle = o.iter().map(FourierRecord::from_result).collect();
        }
        Command::Profile => {
            let m = cfg.m_list[0];
            let t = Instant::now();
            let run = || -> Result<String, Error> {
                let path = gamma_tilde(&ctx.gamma(m)?, m)?;
                let q = cfg.quadrature;
                let prep = prepare_with(&ctx.data, m, 0, path_extent(&path), q.kernel_tol, |d, a, reach, tol| cache.kernel(d, a, reach, tol))?;
                let rows = profile(&prep, &path, k_profile, &q)?;
                let mut csv = String::from("s,re_zeta,im_zeta,re,im,abs\n");
                for (s, z, v) in rows {
                    csv.push_str(&format!(
                        "{s:e},{},{},{},{},{:e}\n",
                        z.re.to_sci_string(),
                        z.im.to_sci_string(),
                        v.re.to_sci_string(),
                        v.im.to_sci_string(),
                        cabs_f64(v)
                    ));
                }
                Ok(csv)
            };
            match run() {
                Ok(csv) => files.push((format!("profile_m{m}_k{k_profile}.csv"), csv)),
                Err(e) => {
                    let code = exit_for(&e);
                    ctx.fail(format!("profile: {e}"), code);
                }
            }
            ctx.timings.insert("profile".into(), t.elapsed().as_secs_f64());
        }
    }
    ctx.timings.insert("total".into(), total.elapsed().as_secs_f64());
    let record = RunRecord {
        tool: "resurge".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cmd,
        precision_bits: R::PREC_BITS,
        tier: cfg.tier()?,
        config: cfg.clone(),
        residua,
        oracle,
        comparison,
        failures: ctx.failures,
    };
    Ok(Outcome { record, timings: ctx.timings, files, exit: ctx.exit })
}

/// Run a command at the tier selected by `precision_bits`.
pub fn run(cmd: Command, cfg: &RunConfig, cache: &KernelCache, k_profile: usize) -> Result<Outcome, ConfigError> {
    match cfg.tier()? {
        Tier::F64 => run_tier::<f64>(cmd, cfg, cache, k_profile),
        Tier::Dd => run_tier::<Dd>(cmd, cfg, cache, k_profile),
        Tier::Qd => run_tier::<Qd>(cmd, cfg, cache, k_profile),
    }
}
