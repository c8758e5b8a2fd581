//! Closed form for systems mixing diagonal and anti-diagonal maps.
//!
//! Each edge `e` is split into two hat-edges `e(1)`, `e(2)` (indices `2e`
//! and `2e + 1`). A hat-word follows the orientation of the partial products:
//! a diagonal step keeps the slot, an anti-diagonal step flips it. The block
//! matrix over hat-edges is `G_{x,y}(h, h') = p^q a_{h'}^{x + tau_{h'}} b_{h'}^{y - tau_{h'}}`
//! for admissible pairs, and `gamma` is the minimum of `x + y_hat(x)` over
//! `[0, gamma_hat - t]` when `gamma_hat > t`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::minimize::{convex_grid_min, sign_change_roots};
use crate::model::{GifsModel, Kind};
use crate::projection::{tau_at, Axis, TauPair};
use crate::spectral::{perron_data, reducible_split, solve_rho_one, spectral_radius, LabeledMatrix, Solve, Split};

const CASE_BAND: f64 = 1e-12;
const DUAL_TOL: f64 = 1e-9;
const H_TOL: f64 = 1e-10;
const CROSS_CHECK_TOL: f64 = 1e-8;
const GRID: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HatEdge {
    pub base: usize,
    pub slot: u8,
    pub a_hat: f64,
    pub b_hat: f64,
    pub p: f64,
    /// `x` when `tau_h = tau_{x,e}`, `y` when `tau_h = tau_{y,e}`.
    pub tau_role: Axis,
}

impl HatEdge {
    pub fn index(&self) -> usize {
        2 * self.base + (self.slot as usize - 1)
    }

    pub fn tau(&self, model: &GifsModel, tau: &TauPair) -> f64 {
        match self.tau_role {
            Axis::X => tau.tau_x_edge(model, self.base),
            Axis::Y => tau.tau_y_edge(model, self.base),
        }
    }
}

/// Hat-edges in label order `e1(1), e1(2), e2(1), ...`.
pub fn hat_edges(model: &GifsModel) -> Vec<HatEdge> {
    model
        .edges
        .iter()
        .enumerate()
        .flat_map(|(i, e)| {
            let (a1, b1, a2, b2) = match e.kind {
                Kind::Diagonal => (e.a, e.b, e.b, e.a),
                Kind::AntiDiagonal => (e.b, e.a, e.a, e.b),
            };
            [
                HatEdge { base: i, slot: 1, a_hat: a1, b_hat: b1, p: e.p, tau_role: Axis::X },
                HatEdge { base: i, slot: 2, a_hat: a2, b_hat: b2, p: e.p, tau_role: Axis::Y },
            ]
        })
        .collect()
}

pub fn hat_labels(model: &GifsModel) -> Vec<String> {
    model.edges.iter().flat_map(|e| [format!("{}(1)", e.id), format!("{}(2)", e.id)]).collect()
}

/// Can hat-edge `h` be followed by `h2`?
pub fn hat_follows(model: &GifsModel, h: usize, h2: usize) -> bool {
    let (e, s) = (h / 2, h % 2);
    let (e2, s2) = (h2 / 2, h2 % 2);
    if model.edges[e].to != model.edges[e2].from {
        return false;
    }
    match model.edges[e2].kind {
        Kind::Diagonal => s == s2,
        Kind::AntiDiagonal => s != s2,
    }
}

/// The two hat-words over `word`, ending in `w_k(1)` and `w_k(2)` respectively.
pub fn hat_expand(model: &GifsModel, word: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if !model.is_admissible(word) {
        return Err(Error::NotAdmissible(format!("{word:?}")));
    }
    let lift = |last_slot: usize| {
        let mut slots = vec![0usize; word.len()];
        let k = word.len() - 1;
        slots[k] = last_slot;
        for i in (0..k).rev() {
            slots[i] = match model.edges[word[i + 1]].kind {
                Kind::Diagonal => slots[i + 1],
                Kind::AntiDiagonal => 1 - slots[i + 1],
            };
        }
        word.iter().zip(slots).map(|(&e, s)| 2 * e + s).collect::<Vec<_>>()
    };
    Ok((lift(0), lift(1)))
}

/// Per-hat-edge weight exponents: `(p^q, a, b, tau)`.
fn hat_weights(model: &GifsModel, tau: &TauPair, q: f64) -> Vec<(f64, f64, f64, f64)> {
    hat_edges(model)
        .iter()
        .map(|h| (h.p.powf(q), h.a_hat, h.b_hat, h.tau(model, tau)))
        .collect()
}

pub fn build_g(model: &GifsModel, tau: &TauPair, q: f64, x: f64, y: f64) -> LabeledMatrix {
    let w = hat_weights(model, tau, q);
    g_from_weights(model, &w, x, y)
}

fn g_from_weights(model: &GifsModel, w: &[(f64, f64, f64, f64)], x: f64, y: f64) -> LabeledMatrix {
    let n = w.len();
    let vals: Vec<f64> = w.iter().map(|&(pq, a, b, t)| pq * a.powf(x + t) * b.powf(y - t)).collect();
    let mut m = LabeledMatrix::zeros(hat_labels(model));
    for h in 0..n {
        let e = h / 2;
        for &e2 in &model.out_edges[model.edges[e].to] {
            for h2 in [2 * e2, 2 * e2 + 1] {
                if hat_follows(model, h, h2) {
                    m.set(h, h2, vals[h2]);
                }
            }
        }
    }
    m
}

/// `gamma_hat = y_hat(0)`; checks the dual identity `rho(G_{gamma_hat - t, t}) = 1`.
pub fn hat_gamma(model: &GifsModel, tau: &TauPair, q: f64) -> Result<f64> {
    let w = hat_weights(model, tau, q);
    let build = |x, y| g_from_weights(model, &w, x, y);
    let gh = solve_rho_one(build, 0.0, Solve::Y)?;
    let rho = spectral_radius(&build(gh - tau.t, tau.t));
    if (rho - 1.0).abs() > DUAL_TOL {
        return Err(Error::NotAtRhoOne { rho });
    }
    Ok(gh)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    A,
    B,
    BEndpoint,
}

impl Case {
    pub fn label(&self) -> &'static str {
        match self {
            Case::A => "a",
            Case::B => "b",
            Case::BEndpoint => "b-endpoint",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralBranch {
    pub case: Case,
    pub x_star: Option<f64>,
    pub y_star: Option<f64>,
    pub hat_gamma: f64,
    pub reducible: bool,
}

/// `phi(x) = sum_h g_h(x) log(a_h / b_h)` from the stationary vector of `m` at a point with `rho(m) = 1`.
fn hat_anisotropy(m: &LabeledMatrix, w: &[(f64, f64, f64, f64)]) -> Result<f64> {
    let st = perron_data(m)?.stationary;
    Ok(st.iter().zip(w).map(|(gi, &(_, a, b, _))| gi * (a / b).ln()).sum())
}

/// Hat-edges spanning the curve `rho = 1` that the minimization follows.
///
/// Irreducible `G`: all of them. Reducible `G`: the conjugate block whose own
/// root at `x = 0` is the smaller one. By duality that block's curve runs from
/// `(0, min)` to `(gamma_hat - t, t)`, so its endpoint values are the two block
/// roots, as in the all-diagonal closed form.
fn curve_block(model: &GifsModel, w: &[(f64, f64, f64, f64)], gh: f64) -> Result<Option<Vec<usize>>> {
    let build = |x, y| g_from_weights(model, w, x, y);
    match reducible_split(&build(0.0, gh))? {
        Split::Irreducible => Ok(None),
        Split::Reducible { first, second, .. } => {
            let y1 = solve_rho_one(|x, y| build(x, y).submatrix(&first), 0.0, Solve::Y)?;
            let y2 = solve_rho_one(|x, y| build(x, y).submatrix(&second), 0.0, Solve::Y)?;
            Ok(Some(if y1 <= y2 { first } else { second }))
        }
    }
}

pub fn gamma_general(model: &GifsModel, tau: &TauPair, q: f64) -> Result<(f64, GeneralBranch)> {
    let w = hat_weights(model, tau, q);
    let gh = hat_gamma(model, tau, q)?;
    let block = curve_block(model, &w, gh)?;
    let reducible = block.is_some();
    let branch = |case, xs: Option<(f64, f64)>| GeneralBranch {
        case,
        x_star: xs.map(|p| p.0),
        y_star: xs.map(|p| p.1),
        hat_gamma: gh,
        reducible,
    };
    let width = gh - tau.t;
    if width <= CASE_BAND {
        return Ok((gh, branch(Case::A, None)));
    }
    let curve = |x, y| {
        let g = g_from_weights(model, &w, x, y);
        match &block {
            Some(idx) => g.submatrix(idx),
            None => g,
        }
    };
    let wc: Vec<(f64, f64, f64, f64)> = match &block {
        Some(idx) => idx.iter().map(|&i| w[i]).collect(),
        None => w.clone(),
    };
    let y_of = |x: f64| solve_rho_one(curve, x, Solve::Y);
    let phi = |x: f64| hat_anisotropy(&curve(x, y_of(x)?), &wc);
    let grid = convex_grid_min(0.0, width, GRID, &|x| Ok(x + y_of(x)?))?;
    let roots = sign_change_roots(0.0, width, GRID, &phi)?;
    let mut best: Option<(f64, f64, f64)> = None;
    for x in roots {
        let y = y_of(x)?;
        if best.is_none_or(|b| x + y < b.0) {
            best = Some((x + y, x, y));
        }
    }
    let (value, case, xs) = match best {
        Some((v, x, y)) => (v, Case::B, Some((x, y))),
        None => {
            let (left, right) = (y_of(0.0)?, width + y_of(width)?);
            if left <= right {
                (left, Case::BEndpoint, Some((0.0, left)))
            } else {
                (right, Case::BEndpoint, Some((width, right - width)))
            }
        }
    };
    if (value - grid).abs() > CROSS_CHECK_TOL {
        return Err(Error::CrossCheck { root: value, grid });
    }
    Ok((value, branch(case, xs)))
}

/// Box dimension `gamma_hat(0)`; requires `gamma_hat(0) <= t(0)`.
pub fn box_dimension_general(model: &GifsModel) -> Result<f64> {
    let tau = tau_at(model, 0.0)?;
    let gh = hat_gamma(model, &tau, 0.0)?;
    if gh > tau.t + DUAL_TOL {
        return Err(Error::CrossCheck { root: gh, grid: tau.t });
    }
    Ok(gh)
}

/// 2x2 aggregation of `G` for a single vertex: rows and columns are the two slots.
pub fn build_h_ifs(model: &GifsModel, tau: &TauPair, q: f64, x: f64, y: f64) -> Result<LabeledMatrix> {
    if model.num_vertices() != 1 {
        return Err(Error::NotSingleVertex);
    }
    let h = h_matrix(model, tau, q, x, y);
    let (rh, rg) = (spectral_radius(&h), spectral_radius(&build_g(model, tau, q, x, y)));
    if (rh - rg).abs() > H_TOL * rg.max(1.0) {
        return Err(Error::CrossCheck { root: rh, grid: rg });
    }
    Ok(h)
}

fn h_matrix(model: &GifsModel, tau: &TauPair, q: f64, x: f64, y: f64) -> LabeledMatrix {
    let (tx, ty) = (tau.tau_x[0], tau.tau_y[0]);
    let mut h = [[0.0; 2]; 2];
    for e in &model.edges {
        let pq = e.p.powf(q);
        match e.kind {
            Kind::Diagonal => {
                h[0][0] += pq * e.a.powf(x + tx) * e.b.powf(y - tx);
                h[1][1] += pq * e.b.powf(x + ty) * e.a.powf(y - ty);
            }
            Kind::AntiDiagonal => {
                h[0][1] += pq * e.a.powf(x + ty) * e.b.powf(y - ty);
                h[1][0] += pq * e.b.powf(x + tx) * e.a.powf(y - tx);
            }
        }
    }
    LabeledMatrix::from_rows(vec!["slot1".into(), "slot2".into()], &[h[0].to_vec(), h[1].to_vec()])
}

/// Single-vertex `gamma` computed from the 2x2 matrix alone (minimum of `x + y_H(x)`).
///
/// Without anti-diagonal maps `H` is diagonal; the curve then follows the entry
/// with the smaller root at `x = 0`, as in [`gamma_general`].
pub fn gamma_via_h(model: &GifsModel, tau: &TauPair, q: f64) -> Result<f64> {
    if model.num_vertices() != 1 {
        return Err(Error::NotSingleVertex);
    }
    let build = |x, y| h_matrix(model, tau, q, x, y);
    let gh = solve_rho_one(build, 0.0, Solve::Y)?;
    let width = gh - tau.t;
    if width <= CASE_BAND {
        return Ok(gh);
    }
    let m0 = build(0.0, gh);
    let block = if m0.get(0, 1) == 0.0 && m0.get(1, 0) == 0.0 {
        let y1 = solve_rho_one(|x, y| build(x, y).submatrix(&[0]), 0.0, Solve::Y)?;
        let y2 = solve_rho_one(|x, y| build(x, y).submatrix(&[1]), 0.0, Solve::Y)?;
        Some(if y1 <= y2 { vec![0] } else { vec![1] })
    } else {
        None
    };
    let curve = |x, y| {
        let h = build(x, y);
        match &block {
            Some(idx) => h.submatrix(idx),
            None => h,
        }
    };
    convex_grid_min(0.0, width, GRID, &|x| Ok(x + solve_rho_one(curve, x, Solve::Y)?))
}
