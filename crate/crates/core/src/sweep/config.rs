//! Sweep configuration: TOML text in, validated [`SweepConfig`] out.
//!
//! ```toml
//! engine = "auto"            # auto | jw_exact | ed | meanfield
//! workers = 1
//! cross_check = false        # add ed values next to jw_exact ones
//! derivative = false         # finite-difference dP_tr/dh along the h grid
//! record_wall_time = false   # wall-clock column; off keeps output reproducible
//! ed_max_sites = 12
//!
//! [tls]
//! gap = 0.2
//! tunneling = 0.1
//!
//! [coupling]
//! strength = 0.05
//!
//! [grid]
//! h = { start = 0.0, stop = 1.5, step = 0.01 }   # or a list, or a number
//! beta = [40.0]                                   # or inverse_beta = {...}
//! gamma = [0.0]
//! n_sites = [8, 12, "inf"]
//!
//! [time_search]
//! horizon_multiplier = 25.132741228718345         # 8π
//! coarse_points = 2048
//! refine_tolerance = 1e-6
//! measure = "population"                          # or "coherence"
//!
//! [quadrature]
//! abs_tolerance = 1e-10
//! max_subdivisions = 60
//!
//! [output]
//! path = "out.csv"                                # stdout when absent
//! format = "csv"                                  # csv | json
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use toml::Table;

use crate::error::{config, Error, Result};
use crate::meanfield::DerivativeConfig;
use crate::operators::{BathCoupling, TlsParams, DEFAULT_MAX_BATH_SITES};
use crate::quadrature::QuadratureConfig;
use crate::result::Engine;
use crate::time_search::{TimeSearchConfig, TransitionMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    Auto,
    JwExact,
    Ed,
    Meanfield,
}

impl std::str::FromStr for EngineChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "jw_exact" => Ok(Self::JwExact),
            "ed" => Ok(Self::Ed),
            "meanfield" => Ok(Self::Meanfield),
            other => Err(config("engine", format!("unknown engine `{other}` (auto, jw_exact, ed, meanfield)"))),
        }
    }
}

/// Number of bath sites; `Infinite` routes to the mean-field engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChainLength {
    Finite(usize),
    Infinite,
}

impl ChainLength {
    pub fn finite(&self) -> Option<usize> {
        match self {
            ChainLength::Finite(n) => Some(*n),
            ChainLength::Infinite => None,
        }
    }
}

impl std::fmt::Display for ChainLength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChainLength::Finite(n) => write!(f, "{n}"),
            ChainLength::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ChainLength {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ChainLength::Finite(n) => s.serialize_u64(*n as u64),
            ChainLength::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ChainLength {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) if n >= 0 => Ok(ChainLength::Finite(n as usize)),
            Raw::Int(n) => Err(serde::de::Error::custom(format!("n_sites must be positive, got {n}"))),
            Raw::Str(s) if s == "inf" || s == "infinite" => Ok(ChainLength::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected an integer or \"inf\", got \"{s}\""))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(config("output.format", format!("unknown format `{other}` (csv, json)"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepGrids {
    pub h: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub n_sites: Vec<ChainLength>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepConfig {
    pub engine: EngineChoice,
    pub tls: TlsParams,
    pub coupling: BathCoupling,
    pub grids: SweepGrids,
    pub time_search: TimeSearchConfig,
    pub quadrature: QuadratureConfig,
    pub cross_check: bool,
    pub derivative: bool,
    pub ed_max_sites: usize,
    #[serde(skip)]
    pub record_wall_time: bool,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub output: OutputSpec,
}

impl SweepConfig {
    /// Engine used at one grid point.
    pub fn engine_for(&self, gamma: f64, length: ChainLength) -> Result<Engine> {
        resolve_engine(self.engine, gamma, length, self.ed_max_sites)
    }

    pub fn point_count(&self) -> usize {
        let g = &self.grids;
        g.h.len() * g.beta.len() * g.gamma.len() * g.n_sites.len()
    }

    /// SHA-256 over the canonical JSON of every setting that affects results.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn derivative_config(&self) -> DerivativeConfig {
        DerivativeConfig {
            quadrature: self.quadrature,
            ..DerivativeConfig::default()
        }
    }
}

fn resolve_engine(choice: EngineChoice, gamma: f64, length: ChainLength, cap: usize) -> Result<Engine> {
    let engine = match (choice, length) {
        (EngineChoice::Auto, ChainLength::Infinite) => Engine::Meanfield,
        (EngineChoice::Auto, ChainLength::Finite(_)) if gamma == 0.0 => Engine::JwExact,
        (EngineChoice::Auto, ChainLength::Finite(_)) => Engine::Ed,
        (EngineChoice::JwExact, _) => Engine::JwExact,
        (EngineChoice::Ed, _) => Engine::Ed,
        (EngineChoice::Meanfield, _) => Engine::Meanfield,
    };
    match (engine, length) {
        (Engine::JwExact, _) if gamma != 0.0 => {
            Err(config("grid.gamma", format!("jw_exact requires gamma = 0 (got {gamma})")))
        }
        (Engine::JwExact | Engine::Ed, ChainLength::Infinite) => Err(config(
            "grid.n_sites",
            format!("{engine} needs a finite chain; \"inf\" is only valid for meanfield"),
        )),
        (Engine::Ed, ChainLength::Finite(n)) if n > cap => Err(config(
            "grid.n_sites",
            format!("ed engine is capped at {cap} bath sites (memory cap, `ed_max_sites`); got {n}"),
        )),
        (Engine::Meanfield, ChainLength::Finite(n)) => Err(config(
            "grid.n_sites",
            format!("meanfield describes the infinite chain; use n_sites = [\"inf\"] (got {n})"),
        )),
        _ => Ok(engine),
    }
}

// ---------------------------------------------------------------------------
// raw layer

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    engine: Option<String>,
    workers: Option<i64>,
    cross_check: Option<bool>,
    derivative: Option<bool>,
    record_wall_time: Option<bool>,
    ed_max_sites: Option<i64>,
    tls: Option<RawTls>,
    coupling: Option<RawCoupling>,
    grid: Option<RawGrid>,
    time_search: Option<RawTimeSearch>,
    quadrature: Option<RawQuadrature>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTls {
    gap: Option<f64>,
    tunneling: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    strength: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    h: Option<RawAxis>,
    beta: Option<RawAxis>,
    inverse_beta: Option<RawAxis>,
    gamma: Option<RawAxis>,
    n_sites: Option<Vec<ChainLength>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawAxis {
    One(f64),
    List(Vec<f64>),
    Range(RawRange),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    start: f64,
    stop: f64,
    step: Option<f64>,
    count: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTimeSearch {
    horizon_multiplier: Option<f64>,
    coarse_points: Option<i64>,
    refine_tolerance: Option<f64>,
    measure: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    abs_tolerance: Option<f64>,
    max_subdivisions: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<String>,
    format: Option<String>,
}

/// Expands a grid axis. Ranges include `stop` when it lies on the step lattice.
fn expand_axis(key: &str, axis: RawAxis) -> Result<Vec<f64>> {
    let values = match axis {
        RawAxis::One(x) => vec![x],
        RawAxis::List(v) => v,
        RawAxis::Range(r) => {
            if !(r.start.is_finite() && r.stop.is_finite()) || r.stop < r.start {
                return Err(config(key, "range needs finite start <= stop"));
            }
            match (r.step, r.count) {
                (Some(step), None) => {
                    if !(step > 0.0) {
                        return Err(config(format!("{key}.step"), "step must be > 0"));
                    }
                    let n = ((r.stop - r.start) / step + 1e-9).floor() as usize;
                    if n > 10_000_000 {
                        return Err(config(key, "range has too many points"));
                    }
                    (0..=n).map(|i| r.start + step * i as f64).collect()
                }
                (None, Some(count)) => {
                    if count < 1 {
                        return Err(config(format!("{key}.count"), "count must be >= 1"));
                    }
                    if count == 1 {
                        vec![r.start]
                    } else {
                        let last = (count - 1) as f64;
                        (0..count)
                            .map(|i| r.start + (r.stop - r.start) * i as f64 / last)
                            .collect()
                    }
                }
                _ => return Err(config(key, "range needs exactly one of `step` or `count`")),
            }
        }
    };
    if values.is_empty() {
        return Err(config(key, "grid axis is empty"));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(config(key, "grid values must be finite"));
    }
    Ok(values)
}

fn positive_count(key: &str, v: Option<i64>, default: usize) -> Result<usize> {
    match v {
        None => Ok(default),
        Some(n) if n >= 1 => Ok(n as usize),
        Some(n) => Err(config(key, format!("must be >= 1, got {n}"))),
    }
}

/// Line and column (1-based) of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, column)
}

/// Parses TOML text into a table, reporting syntax errors by line and column.
pub fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

/// Overlays `top` onto `base`, recursing into nested tables.
pub fn merge_tables(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge_tables(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn validate_config(raw: &str) -> Result<SweepConfig> {
    validate_table(parse_table(raw)?)
}

pub fn validate_table(table: Table) -> Result<SweepConfig> {
    let raw: RawConfig = RawConfig::deserialize(toml::Value::Table(table)).map_err(|e| Error::Config {
        key: "<root>".into(),
        message: e.message().to_string(),
    })?;

    let engine = match raw.engine.as_deref() {
        None => EngineChoice::Auto,
        Some(s) => s.parse()?,
    };
    let workers = positive_count("workers", raw.workers, 1)?;
    let ed_max_sites = positive_count("ed_max_sites", raw.ed_max_sites, DEFAULT_MAX_BATH_SITES)?;
    if ed_max_sites > 20 {
        return Err(config("ed_max_sites", "dense ED beyond 20 sites is not supported"));
    }

    let rt = raw.tls.unwrap_or(RawTls {
        gap: None,
        tunneling: None,
    });
    let tls = TlsParams::new(rt.gap.unwrap_or(0.2), rt.tunneling.unwrap_or(0.1))
        .map_err(|e| config("tls", e.to_string()))?;
    let strength = raw.coupling.and_then(|c| c.strength).unwrap_or(0.05);
    let coupling = BathCoupling::new(strength).map_err(|e| config("coupling.strength", e.to_string()))?;

    let grid = raw.grid.unwrap_or(RawGrid {
        h: None,
        beta: None,
        inverse_beta: None,
        gamma: None,
        n_sites: None,
    });
    let h = match grid.h {
        Some(a) => expand_axis("grid.h", a)?,
        None => return Err(config("grid.h", "at least one field value is required")),
    };
    if h.iter().any(|&x| x < 0.0) {
        return Err(config("grid.h", "fields must be >= 0"));
    }
    let beta = match (grid.beta, grid.inverse_beta) {
        (Some(_), Some(_)) => return Err(config("grid.inverse_beta", "give either `beta` or `inverse_beta`, not both")),
        (Some(a), None) => expand_axis("grid.beta", a)?,
        (None, Some(a)) => {
            let inv = expand_axis("grid.inverse_beta", a)?;
            if inv.iter().any(|&x| x <= 0.0) {
                return Err(config("grid.inverse_beta", "temperatures must be > 0"));
            }
            inv.iter().map(|t| 1.0 / t).collect()
        }
        (None, None) => vec![40.0],
    };
    if beta.iter().any(|&b| b <= 0.0) {
        return Err(config("grid.beta", "beta must be > 0"));
    }
    let gamma = match grid.gamma {
        Some(a) => expand_axis("grid.gamma", a)?,
        None => vec![0.0],
    };
    if gamma.iter().any(|&g| !(0.0..=1.0).contains(&g)) {
        return Err(config("grid.gamma", "anisotropy must lie in [0, 1]"));
    }
    let n_sites = match grid.n_sites {
        Some(v) if v.is_empty() => return Err(config("grid.n_sites", "grid axis is empty")),
        Some(v) => v,
        None if engine == EngineChoice::Meanfield || engine == EngineChoice::Auto => vec![ChainLength::Infinite],
        None => return Err(config("grid.n_sites", "finite-chain engines need n_sites")),
    };
    if n_sites.iter().any(|n| matches!(n, ChainLength::Finite(k) if *k < 2)) {
        return Err(config("grid.n_sites", "a periodic ring needs at least 2 sites"));
    }

    let mut time_search = TimeSearchConfig::default();
    if let Some(ts) = raw.time_search {
        if let Some(x) = ts.horizon_multiplier {
            time_search.horizon_multiplier = x;
        }
        if let Some(n) = ts.coarse_points {
            time_search.coarse_points = positive_count("time_search.coarse_points", Some(n), 0)?;
        }
        if let Some(x) = ts.refine_tolerance {
            time_search.refine_tolerance = x;
        }
        if let Some(m) = ts.measure.as_deref() {
            time_search.measure = match m {
                "population" => TransitionMeasure::Population,
                "coherence" => TransitionMeasure::Coherence,
                other => return Err(config("time_search.measure", format!("unknown measure `{other}`"))),
            };
        }
    }
    time_search
        .validate()
        .map_err(|e| config("time_search", e.to_string()))?;

    let mut quadrature = QuadratureConfig::default();
    if let Some(q) = raw.quadrature {
        if let Some(x) = q.abs_tolerance {
            quadrature.abs_tolerance = x;
        }
        if let Some(n) = q.max_subdivisions {
            if n < 0 {
                return Err(config("quadrature.max_subdivisions", "must be >= 0"));
            }
            quadrature.max_subdivisions = n as usize;
        }
    }
    quadrature
        .validate()
        .map_err(|e| config("quadrature.abs_tolerance", e.to_string()))?;

    let output = match raw.output {
        None => OutputSpec::default(),
        Some(o) => OutputSpec {
            path: o.path.map(PathBuf::from),
            format: match o.format.as_deref() {
                None => OutputFormat::Csv,
                Some(f) => f.parse()?,
            },
        },
    };

    let cfg = SweepConfig {
        engine,
        tls,
        coupling,
        grids: SweepGrids {
            h,
            beta,
            gamma,
            n_sites,
        },
        time_search,
        quadrature,
        cross_check: raw.cross_check.unwrap_or(false),
        derivative: raw.derivative.unwrap_or(false),
        ed_max_sites,
        record_wall_time: raw.record_wall_time.unwrap_or(false),
        workers,
        output,
    };
    check_points(&cfg)?;
    Ok(cfg)
}

fn check_points(cfg: &SweepConfig) -> Result<()> {
    for &n in &cfg.grids.n_sites {
        for &g in &cfg.grids.gamma {
            cfg.engine_for(g, n)?;
        }
    }
    if cfg.derivative {
        if cfg.grids.h.len() < 2 {
            return Err(config("derivative", "dP_tr/dh needs at least two h values"));
        }
        super::derivative::check_uniform(&cfg.grids.h).map_err(|e| config("grid.h", e.to_string()))?;
        cfg.derivative_config()
            .validate()
            .map_err(|e| config("quadrature.abs_tolerance", e.to_string()))?;
    }
    if cfg.cross_check && cfg.grids.n_sites.iter().any(|n| matches!(n, ChainLength::Finite(k) if *k > cfg.ed_max_sites)) {
        return Err(config(
            "cross_check",
            format!("cross-check runs ed, which is capped at {} bath sites", cfg.ed_max_sites),
        ));
    }
    Ok(())
}
