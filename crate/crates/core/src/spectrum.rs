//! Per-`q` aggregation of both engines into one report row.

use rayon::prelude::*;
use serde::Serialize;

use crate::diagonal::gamma_diagonal;
use crate::error::{Error, Result};
use crate::general::{gamma_general, hat_gamma};
use crate::model::{check_rosc, GifsModel};
use crate::projection::tau_at;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Auto,
    Diagonal,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub q: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    pub t: f64,
    pub gamma_a: Option<f64>,
    pub gamma_b: Option<f64>,
    pub hat_gamma: f64,
    pub gamma: f64,
    pub branch: String,
    pub rosc: bool,
}

fn resolve(model: &GifsModel, engine: Engine) -> Result<Engine> {
    match engine {
        Engine::Auto if model.all_diagonal() => Ok(Engine::Diagonal),
        Engine::Auto => Ok(Engine::General),
        Engine::Diagonal if !model.all_diagonal() => Err(Error::NotDiagonalSystem),
        e => Ok(e),
    }
}

pub fn spectrum_point(model: &GifsModel, q: f64, engine: Engine, rosc: bool) -> Result<SpectrumPoint> {
    if q.is_nan() || q < 0.0 {
        return Err(Error::InvalidArgument(format!("q must be nonnegative, got {q}")));
    }
    let tau = tau_at(model, q)?;
    let (gamma, branch, gamma_a, gamma_b, hat) = match resolve(model, engine)? {
        Engine::Diagonal => {
            let (g, br) = gamma_diagonal(model, &tau, q)?;
            let hat = hat_gamma(model, &tau, q)?;
            (g, br.branch.label().to_string(), Some(br.gamma_a), Some(br.gamma_b), hat)
        }
        _ => {
            let (g, br) = gamma_general(model, &tau, q)?;
            (g, br.case.label().to_string(), None, None, br.hat_gamma)
        }
    };
    Ok(SpectrumPoint {
        q,
        tau_a: tau.tau_a,
        tau_b: tau.tau_b,
        t: tau.t,
        gamma_a,
        gamma_b,
        hat_gamma: hat,
        gamma,
        branch,
        rosc,
    })
}

/// `gamma(q)` by the engine `auto` would pick.
pub fn gamma(model: &GifsModel, q: f64) -> Result<f64> {
    Ok(spectrum_point(model, q, Engine::Auto, true)?.gamma)
}

/// Grid `q_min, q_min + step, ...` up to `q_max` (inclusive within rounding).
pub fn q_grid(q_min: f64, q_max: f64, q_step: f64) -> Result<Vec<f64>> {
    if q_step.is_nan() || q_step <= 0.0 {
        return Err(Error::InvalidArgument(format!("q-step must be positive, got {q_step}")));
    }
    if q_min.is_nan() || q_max.is_nan() || q_min < 0.0 || q_max < q_min {
        return Err(Error::InvalidArgument(format!("need 0 <= q-min <= q-max, got {q_min}..{q_max}")));
    }
    let n = ((q_max - q_min) / q_step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| q_min + i as f64 * q_step).collect())
}

/// Rows for every `q`, computed in parallel and returned in grid order.
pub fn spectrum(model: &GifsModel, qs: &[f64], engine: Engine) -> Result<Vec<SpectrumPoint>> {
    let rosc = check_rosc(model).pass;
    qs.par_iter().map(|&q| spectrum_point(model, q, engine, rosc)).collect()
}
