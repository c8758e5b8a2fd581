//! Monte-Carlo box counting on dyadic meshes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::GifsModel;

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_DELTA_EXPONENTS: (u32, u32) = (4, 10);
const CHUNK: usize = 1 << 15;
/// Sampling stops once the image rectangle is this fraction of the finest mesh.
const RESOLUTION: f64 = 1e-3;

/// Per-mesh sample counts; `counts` is sorted by cell key.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshAccumulator {
    pub delta: f64,
    pub counts: Vec<(u64, u32)>,
    pub total: usize,
}

impl MeshAccumulator {
    pub fn from_points(points: &[(f64, f64)], delta: f64) -> Self {
        let mut keys: Vec<u64> = points
            .par_iter()
            .map(|&(x, y)| {
                let ix = (x / delta).floor().max(0.0) as u64;
                let iy = (y / delta).floor().max(0.0) as u64;
                (ix << 32) | iy
            })
            .collect();
        keys.par_sort_unstable();
        let mut counts: Vec<(u64, u32)> = Vec::new();
        for k in keys {
            match counts.last_mut() {
                Some((last, c)) if *last == k => *c += 1,
                _ => counts.push((k, 1)),
            }
        }
        MeshAccumulator { delta, counts, total: points.len() }
    }

    /// `sum_Q (count_Q / N)^q`.
    pub fn moment(&self, q: f64) -> f64 {
        let n = self.total as f64;
        self.counts.iter().map(|&(_, c)| (c as f64 / n).powf(q)).sum()
    }
}

/// Draws `n` points of `mu_v` by the random edge walk.
pub fn sample_points(model: &GifsModel, vertex: usize, n: usize, finest: f64, seed: u64) -> Vec<(f64, f64)> {
    let eps = finest * RESOLUTION;
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let len = CHUNK.min(n - chunk * CHUNK);
            (0..len).map(move |_| sample_one(model, vertex, eps, &mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

fn sample_one(model: &GifsModel, vertex: usize, eps: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut m = [[1.0f64, 0.0], [0.0, 1.0]];
    let mut t = [0.0f64, 0.0];
    let mut v = vertex;
    while m[0][0].abs() + m[0][1].abs() > eps || m[1][0].abs() + m[1][1].abs() > eps {
        let outs = &model.out_edges[v];
        let mut u: f64 = rng.gen();
        let mut pick = outs[outs.len() - 1];
        for &e in outs {
            u -= model.edges[e].p;
            if u < 0.0 {
                pick = e;
                break;
            }
        }
        let e = &model.edges[pick];
        let te = e.matrix();
        t = [m[0][0] * e.tx + m[0][1] * e.ty + t[0], m[1][0] * e.tx + m[1][1] * e.ty + t[1]];
        m = [
            [m[0][0] * te[0][0] + m[0][1] * te[1][0], m[0][0] * te[0][1] + m[0][1] * te[1][1]],
            [m[1][0] * te[0][0] + m[1][1] * te[1][0], m[1][0] * te[0][1] + m[1][1] * te[1][1]],
        ];
        v = e.to;
    }
    (t[0] + 0.5 * (m[0][0] + m[0][1]), t[1] + 0.5 * (m[1][0] + m[1][1]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCount {
    /// Least-squares slope of `ln sum (count/N)^q` against `-ln delta`.
    pub tau: f64,
    /// `(delta, ln sum (count/N)^q)` per mesh.
    pub per_delta: Vec<(f64, f64)>,
}

pub fn dyadic_deltas(j0: u32, j1: u32) -> Vec<f64> {
    (j0..=j1).map(|j| 0.5f64.powi(j as i32)).collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Box-counting estimate of the L^q-spectrum of `mu_v` at several `q` from one sample.
pub fn box_count_many(model: &GifsModel, vertex: usize, qs: &[f64], deltas: &[f64], n: usize, seed: u64) -> Result<Vec<BoxCount>> {
    if vertex >= model.num_vertices() {
        return Err(Error::InvalidArgument(format!("vertex index {vertex} out of range")));
    }
    if deltas.len() < 2 || n == 0 {
        return Err(Error::InvalidArgument("need at least two deltas and one sample".into()));
    }
    let finest = deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let points = sample_points(model, vertex, n, finest, seed);
    let meshes: Vec<MeshAccumulator> = deltas.iter().map(|&d| MeshAccumulator::from_points(&points, d)).collect();
    let xs: Vec<f64> = deltas.iter().map(|d| -d.ln()).collect();
    Ok(qs
        .iter()
        .map(|&q| {
            let ys: Vec<f64> = meshes.iter().map(|m| m.moment(q).ln()).collect();
            BoxCount { tau: slope(&xs, &ys), per_delta: deltas.iter().copied().zip(ys).collect() }
        })
        .collect())
}

pub fn box_count_tau(model: &GifsModel, vertex: usize, q: f64, deltas: &[f64], n: usize, seed: u64) -> Result<BoxCount> {
    Ok(box_count_many(model, vertex, &[q], deltas, n, seed)?.remove(0))
}
