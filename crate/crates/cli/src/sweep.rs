//! Runs a [`SweepConfig`] into a table, computing points in parallel and
//! assembling rows in a fixed order.

use std::collections::BTreeMap;
use thiserror::Error;

use wqed_core::dynamics::{
    amplitude_ode, amplitude_poles, amplitude_series, AmplitudeTrace, Method, SystemParams,
};
use wqed_core::fieldspace::{
    loss_rate_gradient_with, LossModel, ARRIVAL_OFFSET, DEFAULT_D_DELTA, KAPPA,
};
use wqed_core::parallel::{try_map_indexed, with_workers, Execution};
use wqed_core::qfi::{baseline_qfi, qfi_at_times, DetuningPath};
use wqed_core::spectrum::{default_grid, spectrum_g_with};

use crate::config::{Command, SweepConfig};

#[derive(Debug, Error)]
#[error("{point}: {source}")]
pub struct SweepError {
    /// The parameter point that failed, e.g. `eta=2, delta=1, gamma_t=5`.
    pub point: String,
    pub source: wqed_core::Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub config: BTreeMap<String, String>,
    pub version: String,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

fn point(eta: f64, delta: f64) -> String {
    format!("eta={eta}, delta={delta}")
}

fn params(config: &SweepConfig, eta: f64, delta: f64) -> Result<SystemParams, SweepError> {
    let fail = |source| SweepError {
        point: point(eta, delta),
        source,
    };
    SystemParams::new(eta, delta)
        .and_then(|p| p.with_beta(config.beta))
        .and_then(|p| p.with_j_cut(config.j_cut))
        .map_err(fail)
}

fn grid(config: &SweepConfig) -> Vec<(f64, f64)> {
    let etas = config.eta.as_ref().map(|a| a.values()).unwrap_or_default();
    let deltas = config
        .delta
        .as_ref()
        .map(|a| a.values())
        .unwrap_or_default();
    etas.iter()
        .flat_map(|&e| deltas.iter().map(move |&d| (e, d)))
        .collect()
}

pub fn run_sweep(config: &SweepConfig) -> Result<ResultTable, SweepError> {
    let (columns, rows) = with_workers(config.workers, || compute(config))?;
    Ok(ResultTable {
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows,
        metadata: Metadata {
            config: config.to_pairs(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            kappa: KAPPA,
        },
    })
}

type Columns = (&'static [&'static str], Vec<Vec<f64>>);

fn compute(config: &SweepConfig) -> Result<Columns, SweepError> {
    let exec = Execution::Parallel;
    match config.command {
        Command::Dynamics => {
            let (eta, delta) = grid(config)[0];
            let p = params(config, eta, delta)?;
            let steps = (config.t_max / config.dt).round() as usize;
            let times: Vec<f64> = (0..=steps).map(|k| k as f64 * config.dt).collect();
            let trace: AmplitudeTrace = match config.method {
                Method::Series => Ok(amplitude_series(&p, &times)),
                Method::Poles => amplitude_poles(&p, &times),
                Method::Ode => amplitude_ode(&p, config.t_max, config.dt),
            }
            .map_err(|source| SweepError {
                point: format!("{}, method={}", point(eta, delta), config.method.name()),
                source,
            })?;
            let rows = (0..trace.len())
                .map(|k| {
                    let (c1, c2) = (trace.c1[k], trace.c2[k]);
                    vec![
                        trace.times[k],
                        c1.re,
                        c1.im,
                        c2.re,
                        c2.im,
                        c1.norm_sqr(),
                        c2.norm_sqr(),
                    ]
                })
                .collect();
            Ok((
                &["gamma_t", "re_c1", "im_c1", "re_c2", "im_c2", "p1", "p2"],
                rows,
            ))
        }
        Command::Spectrum => {
            let (eta, delta) = grid(config)[0];
            let p = params(config, eta, delta)?;
            let omegas = config
                .omega
                .as_ref()
                .map(|a| a.values())
                .unwrap_or_else(|| default_grid(delta));
            let g = spectrum_g_with(&p, &omegas, exec).map_err(|source| SweepError {
                point: point(eta, delta),
                source,
            })?;
            let rows = g
                .omega_bar
                .iter()
                .zip(&g.g)
                .map(|(&w, &g)| vec![w, g])
                .collect();
            Ok((&["omega_bar", "g"], rows))
        }
        Command::Qfi | Command::QfiScan => {
            let times = config.t.as_ref().map(|a| a.values()).unwrap_or_default();
            let points = grid(config);
            let per_point = try_map_indexed(exec, points.len(), |k| {
                let (eta, delta) = points[k];
                let p = params(config, eta, delta)?;
                qfi_at_times(&p, &times, DetuningPath::MeanFixed, exec).map_err(|source| {
                    SweepError {
                        point: format!("{}, gamma_t in {times:?}", point(eta, delta)),
                        source,
                    }
                })
            })?;
            let rows = per_point
                .into_iter()
                .flatten()
                .map(|q| vec![q.eta, q.delta, q.gamma_t, q.h])
                .collect();
            Ok((&["eta", "delta", "gamma_t", "qfi"], rows))
        }
        Command::Qbic => {
            let model = match config.method {
                Method::Series => LossModel::Series,
                _ => LossModel::Poles,
            };
            let points = grid(config);
            let rows = try_map_indexed(exec, points.len(), |k| {
                let (eta, delta) = points[k];
                let p = params(config, eta, delta)?;
                let t = eta + ARRIVAL_OFFSET;
                let g =
                    loss_rate_gradient_with(&p, t, DEFAULT_D_DELTA, model).map_err(|source| {
                        SweepError {
                            point: format!("{}, gamma_t={t}", point(eta, delta)),
                            source,
                        }
                    })?;
                Ok(vec![eta, delta, t, g])
            })?;
            Ok((&["eta", "delta", "gamma_t", "d_gamma_d_delta"], rows))
        }
        Command::Baseline => {
            let times = config.t.as_ref().map(|a| a.values()).unwrap_or_default();
            let rows = times.iter().map(|&t| vec![t, baseline_qfi(t)]).collect();
            Ok((&["gamma_t", "qfi"], rows))
        }
    }
}
