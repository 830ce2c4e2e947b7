use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ChainLength, SweepConfig};
use super::derivative::derivative_postprocess;
use super::record::{CrossCheck, ResultRecord};
use crate::ed::{transition_probability_ed_with, EdOptions};
use crate::error::{Error, Result};
use crate::jw::transition_probability_exact;
use crate::meanfield::transition_probability_mf_with;
use crate::operators::SpinChainParams;
use crate::result::{Engine, TransitionResult};

/// One grid point in sweep order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub n_sites: ChainLength,
    pub gamma: f64,
    pub beta: f64,
    pub h: f64,
}

/// Cartesian product with `h` fastest, then `beta`, `gamma`, `n_sites`.
pub fn grid_points(cfg: &SweepConfig) -> Vec<GridPoint> {
    let g = &cfg.grids;
    let mut out = Vec::with_capacity(cfg.point_count());
    for &n_sites in &g.n_sites {
        for &gamma in &g.gamma {
            for &beta in &g.beta {
                for &h in &g.h {
                    out.push(GridPoint { n_sites, gamma, beta, h });
                }
            }
        }
    }
    out
}

struct Outcome {
    p_tr: f64,
    t_star: Option<f64>,
    m_z: Option<f64>,
    diagnostics: BTreeMap<String, f64>,
}

fn finite_chain(point: &GridPoint) -> Result<SpinChainParams> {
    let n = point
        .n_sites
        .finite()
        .ok_or_else(|| Error::Domain("finite-chain engine given an infinite chain".into()))?;
    SpinChainParams::new(n, point.gamma, point.h)
}

fn run_ed(cfg: &SweepConfig, point: &GridPoint) -> Result<TransitionResult> {
    let options = EdOptions {
        max_bath_sites: cfg.ed_max_sites,
        ..EdOptions::default()
    };
    transition_probability_ed_with(&finite_chain(point)?, &cfg.tls, &cfg.coupling, point.beta, &cfg.time_search, &options)
}

fn solve(cfg: &SweepConfig, engine: Engine, point: &GridPoint) -> Result<Outcome> {
    let finite = |r: TransitionResult| Outcome {
        p_tr: r.p_tr,
        t_star: Some(r.t_star),
        m_z: None,
        diagnostics: r.diagnostics,
    };
    match engine {
        Engine::JwExact => {
            let chain = finite_chain(point)?;
            transition_probability_exact(&chain, &cfg.tls, &cfg.coupling, point.beta, &cfg.time_search).map(finite)
        }
        Engine::Ed => run_ed(cfg, point).map(finite),
        Engine::Meanfield => {
            let r = transition_probability_mf_with(
                &cfg.tls,
                &cfg.coupling,
                point.h,
                point.gamma,
                point.beta,
                &cfg.quadrature,
                cfg.time_search.measure,
            )?;
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("m_z_error".into(), r.m_z_error);
            diagnostics.insert("delta_eff".into(), r.delta_eff);
            Ok(Outcome {
                p_tr: r.p_tr,
                t_star: None,
                m_z: Some(r.m_z),
                diagnostics,
            })
        }
    }
}

/// Evaluates one grid point; failures become an error row.
pub fn evaluate_point(cfg: &SweepConfig, point: &GridPoint) -> ResultRecord {
    let started = Instant::now();
    let engine = cfg.engine_for(point.gamma, point.n_sites);
    let mut record = ResultRecord {
        engine: *engine.as_ref().unwrap_or(&Engine::Meanfield),
        n_sites: point.n_sites,
        gamma: point.gamma,
        h: point.h,
        beta: point.beta,
        delta: cfg.tls.gap(),
        tunneling: cfg.tls.tunneling(),
        coupling: cfg.coupling.strength(),
        p_tr: None,
        t_star: None,
        m_z: None,
        dptr_dh: None,
        status: "ok".into(),
        wall_time_s: None,
        diagnostics: BTreeMap::new(),
        cross_check: None,
    };
    match engine.and_then(|e| solve(cfg, e, point)) {
        Ok(o) => {
            record.p_tr = Some(o.p_tr);
            record.t_star = o.t_star;
            record.m_z = o.m_z;
            record.diagnostics = o.diagnostics;
        }
        Err(e) => record.status = format!("error: {e}"),
    }
    if cfg.cross_check && record.engine == Engine::JwExact {
        let ed = run_ed(cfg, point);
        let p_tr_ed = ed.as_ref().ok().map(|r| r.p_tr);
        let difference = match (record.p_tr, p_tr_ed) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        if let Err(e) = ed {
            if record.is_ok() {
                record.status = format!("error: cross-check failed: {e}");
            }
        }
        record.cross_check = Some(CrossCheck { p_tr_ed, difference });
    }
    if cfg.record_wall_time {
        record.wall_time_s = Some(started.elapsed().as_secs_f64());
    }
    record
}

/// Evaluates the full grid on `cfg.workers` threads; output is in grid order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ResultRecord>> {
    let points = grid_points(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let records: Vec<ResultRecord> = pool.install(|| points.par_iter().map(|p| evaluate_point(cfg, p)).collect());
    if cfg.derivative {
        derivative_postprocess(&records)
    } else {
        Ok(records)
    }
}
