//! Run configuration: JSON schema, defaults and validation.

use serde::{Deserialize, Serialize};

use resurge_core::alien::QuadConfig;
use resurge_core::horn::OracleConfig;
use resurge_core::numeric::{Cx, Real, Tier};
use resurge_core::series::{cx_parse, GermData, GermSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Complex number as `[re, im]` decimal strings.
pub type CxStr = [String; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GermDesc {
    /// num/den in ascending powers of z, germ at infinity.
    RationalInfinity { num: Vec<CxStr>, den: Vec<CxStr> },
    /// g(w) = Σ coeffs[k] w^k with a parabolic point at 0.
    PolynomialOrigin { coeffs: Vec<CxStr> },
    Translation,
    Quad,
    Rho0,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub germ: GermDesc,
    #[serde(default = "default_m_list")]
    pub m_list: Vec<i64>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Formal depth D.
    #[serde(default = "default_depth", alias = "D")]
    pub depth: usize,
    #[serde(default = "default_precision")]
    pub precision_bits: u32,
    #[serde(default)]
    pub quadrature: QuadConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// Vertices of Γ (from 1 to 1 + 2πim) replacing the straight segment.
    #[serde(default)]
    pub path_override: Option<Vec<CxStr>>,
    #[serde(default)]
    pub output: Option<String>,
    /// Relative tolerance of `compare`.
    #[serde(default = "default_compare_tol")]
    pub compare_tol: f64,
}

fn default_m_list() -> Vec<i64> {
    vec![1]
}
fn default_k_max() -> usize {
    10
}
fn default_depth() -> usize {
    40
}
fn default_precision() -> u32 {
    160
}
fn default_compare_tol() -> f64 {
    1e-3
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl RunConfig {
    pub fn preset(germ: GermDesc) -> Self {
        RunConfig {
            version: SCHEMA_VERSION,
            germ,
            m_list: default_m_list(),
            k_max: default_k_max(),
            depth: default_depth(),
            precision_bits: default_precision(),
            quadrature: QuadConfig::default(),
            oracle: OracleConfig::default(),
            path_override: None,
            output: None,
            compare_tol: default_compare_tol(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn tier(&self) -> Result<Tier, ConfigError> {
        Tier::for_bits(self.precision_bits).ok_or_else(|| ConfigError(format!("precision_bits = {} exceeds 212", self.precision_bits)))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if self.version != SCHEMA_VERSION {
            return bad(format!("unsupported version {} (expected {SCHEMA_VERSION})", self.version));
        }
        if self.m_list.is_empty() || self.m_list.contains(&0) {
            return bad("m_list must be nonempty and must not contain 0".into());
        }
        if self.k_max > 200 {
            return bad(format!("k_max = {} is above 200", self.k_max));
        }
        if self.depth < 4 {
            return bad(format!("D = {} is below 4", self.depth));
        }
        self.tier()?;
        let q = &self.quadrature;
        if q.panel_nodes < 6 || q.panel_nodes > 64 {
            return bad(format!("panel_nodes = {} outside 6..=64", q.panel_nodes));
        }
        if !(q.grading_ratio > 0.0 && q.grading_ratio < 1.0) {
            return bad(format!("grading_ratio = {} outside (0, 1)", q.grading_ratio));
        }
        if !(q.min_panel > 0.0 && q.min_panel < 1.0) {
            return bad(format!("min_panel = {} outside (0, 1)", q.min_panel));
        }
        if !(q.kernel_tol > 0.0 && q.max_panel > 0.0 && q.panel_factor > 0.0) {
            return bad("kernel_tol, max_panel and panel_factor must be positive".into());
        }
        if !(self.compare_tol > 0.0) {
            return bad("compare_tol must be positive".into());
        }
        match &self.germ {
            GermDesc::RationalInfinity { num, den } if num.is_empty() || den.is_empty() => {
                return bad("rational germ needs num and den".into());
            }
            GermDesc::PolynomialOrigin { coeffs } if coeffs.len() < 3 => {
                return bad("polynomial germ needs at least 3 coefficients".into());
            }
            _ => {}
        }
        if let Some(p) = &self.path_override {
            if p.len() < 2 {
                return bad("path_override needs at least two vertices".into());
            }
        }
        Ok(())
    }
}

pub fn parse_cx_list<R: Real>(v: &[CxStr], what: &str) -> Result<Vec<Cx<R>>, ConfigError> {
    v.iter().map(|s| cx_parse(s).ok_or_else(|| ConfigError(format!("{what}: cannot parse {s:?}")))).collect()
}

pub fn germ_spec<R: Real>(g: &GermDesc) -> Result<GermSpec<R>, ConfigError> {
    Ok(match g {
        GermDesc::RationalInfinity { num, den } => GermSpec::infinity(parse_cx_list(num, "num")?, parse_cx_list(den, "den")?),
        GermDesc::PolynomialOrigin { coeffs } => {
            GermSpec::origin(parse_cx_list(coeffs, "coeffs")?, vec![num_complex::Complex::new(R::one(), R::zero())])
        }
        GermDesc::Translation => GermSpec::translation(),
        GermDesc::Quad => GermSpec::quad(),
        GermDesc::Rho0 => GermSpec::rho0(),
    })
}

/// Germ data at the configured depth; germ-level failures are validation errors.
pub fn germ_data<R: Real>(cfg: &RunConfig) -> Result<GermData<R>, ConfigError> {
    let spec = germ_spec::<R>(&cfg.germ)?;
    let data = GermData::new(&spec, cfg.depth).map_err(|e| ConfigError(e.to_string()))?;
    cfg.oracle.validate(data.radius_r).map_err(|e| ConfigError(format!("oracle: {e}")))?;
    Ok(data)
}
