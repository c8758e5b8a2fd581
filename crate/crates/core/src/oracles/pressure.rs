//! Finite-depth pressure `||A_k||^{1/k}` computed exactly by dynamic programming.
//!
//! For a word `w` with hat-words `w(1)`, `w(2)`, the modified singular value
//! function equals `p_h^q a_h^{tau_h} b_h^{s - tau_h}` where `h` is whichever
//! hat-word has `a_h >= b_h` (both when equal, with the same value). So
//! `||A_k||` is a sum over hat-words weighted by `1`, `1/2` or `0`, and each
//! term depends only on the hat-edge count vector and on the terminal vertex
//! and slot. The DP counts hat-words per such state; it does not depend on
//! `s` or `q`, so one table serves a whole bisection.

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::general::{hat_edges, hat_follows};
use crate::model::{GifsModel, Kind};
use crate::projection::TauPair;
use crate::spectral::solve_decreasing;

pub const MAX_HAT_EDGES: usize = 10;
pub const MAX_DEPTH: usize = 24;
pub const STATE_CAP: usize = 100_000_000;

const BITS: u32 = 5;
const MASK: u64 = (1 << BITS) - 1;
const TIE_TOL: f64 = 1e-9;

/// Terminal data of a hat-word: vertex `t(e)` of its last edge and the slot of its last hat-edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Terminal {
    pub vertex: usize,
    pub slot: u8,
}

/// Hat-words of one length sharing terminal data and hat-edge counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountVectorState {
    pub terminal: Terminal,
    pub counts: Vec<u32>,
    pub multiplicity: BigUint,
}

fn class_of(model: &GifsModel, h: usize) -> usize {
    2 * model.edges[h / 2].to + h % 2
}

fn pack(class: usize, counts: u64) -> u64 {
    ((class as u64) << 50) | counts
}

fn unpack(key: u64) -> (usize, u64) {
    ((key >> 50) as usize, key & ((1u64 << 50) - 1))
}

fn check_size(model: &GifsModel, k: usize) -> Result<()> {
    let nh = 2 * model.num_edges();
    if nh > MAX_HAT_EDGES {
        return Err(Error::BudgetExceeded(format!("{nh} hat-edges exceeds {MAX_HAT_EDGES}")));
    }
    if k == 0 || k > MAX_DEPTH {
        return Err(Error::BudgetExceeded(format!("depth {k} outside 1..={MAX_DEPTH}")));
    }
    Ok(())
}

/// Raw DP layer: packed `(class, counts)` key to multiplicity.
fn dp_layer(model: &GifsModel, k: usize) -> Result<HashMap<u64, u64>> {
    check_size(model, k)?;
    let nh = 2 * model.num_edges();
    let classes = 2 * model.num_vertices();
    // successors of each class: (hat-edge, next class)
    let mut succ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); classes];
    for h in 0..nh {
        let c = class_of(model, h);
        for h2 in 0..nh {
            if hat_follows(model, h, h2) && !succ[c].iter().any(|&(x, _)| x == h2) {
                succ[c].push((h2, class_of(model, h2)));
            }
        }
    }
    let mut layer: HashMap<u64, u64> = HashMap::new();
    for h in 0..nh {
        *layer.entry(pack(class_of(model, h), 1u64 << (BITS * h as u32))).or_insert(0) += 1;
    }
    for _ in 1..k {
        let mut next: HashMap<u64, u64> = HashMap::with_capacity(layer.len() * 2);
        for (&key, &mult) in &layer {
            let (c, counts) = unpack(key);
            for &(h2, c2) in &succ[c] {
                let slot = next.entry(pack(c2, counts + (1u64 << (BITS * h2 as u32)))).or_insert(0);
                *slot = slot
                    .checked_add(mult)
                    .ok_or_else(|| Error::BudgetExceeded("multiplicity overflow".into()))?;
            }
        }
        if next.len() > STATE_CAP {
            return Err(Error::BudgetExceeded(format!("{} states exceeds cap {STATE_CAP}", next.len())));
        }
        layer = next;
    }
    Ok(layer)
}

fn unpack_counts(counts: u64, nh: usize) -> Vec<u32> {
    (0..nh).map(|h| ((counts >> (BITS * h as u32)) & MASK) as u32).collect()
}

/// All count-vector states of hat-words of length `k`, sorted for reproducibility.
pub fn hat_word_states(model: &GifsModel, k: usize) -> Result<Vec<CountVectorState>> {
    let nh = 2 * model.num_edges();
    let mut out: Vec<CountVectorState> = dp_layer(model, k)?
        .into_iter()
        .map(|(key, mult)| {
            let (c, counts) = unpack(key);
            CountVectorState {
                terminal: Terminal { vertex: c / 2, slot: (c % 2 + 1) as u8 },
                counts: unpack_counts(counts, nh),
                multiplicity: BigUint::from(mult),
            }
        })
        .collect();
    out.sort_by(|a, b| (a.terminal.vertex, a.terminal.slot, &a.counts).cmp(&(b.terminal.vertex, b.terminal.slot, &b.counts)));
    Ok(out)
}

/// Per-state log data of `||A_k||`, independent of `s` and `q`.
#[derive(Debug, Clone)]
pub struct PressureTable {
    pub k: usize,
    /// `ln(multiplicity * weight)`
    log_mult: Vec<f64>,
    log_p: Vec<f64>,
    log_a: Vec<f64>,
    log_b: Vec<f64>,
    class: Vec<usize>,
}

impl PressureTable {
    pub fn build(model: &GifsModel, k: usize) -> Result<Self> {
        let hats = hat_edges(model);
        let nh = hats.len();
        let lp: Vec<f64> = hats.iter().map(|h| h.p.ln()).collect();
        let la: Vec<f64> = hats.iter().map(|h| h.a_hat.ln()).collect();
        let lb: Vec<f64> = hats.iter().map(|h| h.b_hat.ln()).collect();
        let mut layer: Vec<(u64, u64)> = dp_layer(model, k)?.into_iter().collect();
        layer.sort_unstable();
        let mut t = PressureTable {
            k,
            log_mult: Vec::with_capacity(layer.len()),
            log_p: Vec::with_capacity(layer.len()),
            log_a: Vec::with_capacity(layer.len()),
            log_b: Vec::with_capacity(layer.len()),
            class: Vec::with_capacity(layer.len()),
        };
        for (key, mult) in layer {
            let (c, packed) = unpack(key);
            let counts = unpack_counts(packed, nh);
            let dot = |v: &[f64]| counts.iter().zip(v).map(|(&n, x)| n as f64 * x).sum::<f64>();
            let (sa, sb) = (dot(&la), dot(&lb));
            let scale = 1.0 + sa.abs() + sb.abs();
            let weight = if sa - sb > TIE_TOL * scale {
                1.0
            } else if (sa - sb).abs() <= TIE_TOL * scale {
                0.5
            } else {
                continue;
            };
            t.log_mult.push((mult as f64 * weight).ln());
            t.log_p.push(dot(&lp));
            t.log_a.push(sa);
            t.log_b.push(sb);
            t.class.push(c);
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    /// `ln ||A_k^{s,q}||`.
    pub fn log_norm(&self, tau: &TauPair, s: f64, q: f64) -> f64 {
        let tau_class: Vec<f64> = tau.tau_x.iter().zip(&tau.tau_y).flat_map(|(&x, &y)| [x, y]).collect();
        let exps: Vec<f64> = (0..self.len())
            .map(|i| {
                let tw = tau_class[self.class[i]];
                self.log_mult[i] + q * self.log_p[i] + tw * self.log_a[i] + (s - tw) * self.log_b[i]
            })
            .collect();
        log_sum_exp(&exps)
    }

    /// `||A_k^{s,q}||^{1/k}`.
    pub fn pressure(&self, tau: &TauPair, s: f64, q: f64) -> f64 {
        (self.log_norm(tau, s, q) / self.k as f64).exp()
    }

    /// Root in `s` of `||A_k^{s,q}|| = 1`.
    pub fn root(&self, tau: &TauPair, q: f64) -> Result<f64> {
        solve_decreasing(|s| self.log_norm(tau, s, q))
    }
}

/// Compensated log-sum-exp.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &x in xs {
        let y = (x - m).exp() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    m + sum.ln()
}

pub fn pressure(model: &GifsModel, tau: &TauPair, s: f64, q: f64, k: usize) -> Result<f64> {
    Ok(PressureTable::build(model, k)?.pressure(tau, s, q))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PressureEstimate {
    /// Richardson-extrapolated root from depths `k` and `k / 2`.
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    /// Root of the depth-`k` pressure.
    pub raw: f64,
    /// Root at depth `k / 2`.
    pub half_depth: f64,
}

/// Root of `P(s, q) = 1` estimated from depths `k` and `k / 2`.
///
/// The depth-`k` root carries an `O(1/k)` bias from the norm's prefactor, so
/// the estimate is `(k g_k - h g_h) / (k - h)` with `h = k / 2`. A `k^{-1/2}`
/// prefactor leaves a `ln k / k` term that this step does not remove, so the
/// bracket is the estimate plus or minus `2 |g_k - g_h|`. It is heuristic, not
/// a proof. When the raw root lies at or below `t(q)` the depth-`k` pressure
/// dominates the limit, so the raw root also caps the upper side.
pub fn gamma_pressure(model: &GifsModel, tau: &TauPair, q: f64, k: usize) -> Result<PressureEstimate> {
    if k < 2 {
        return Err(Error::InvalidArgument("pressure depth must be at least 2".into()));
    }
    let h = k / 2;
    let raw = PressureTable::build(model, k)?.root(tau, q)?;
    let half_depth = PressureTable::build(model, h)?.root(tau, q)?;
    let estimate = (k as f64 * raw - h as f64 * half_depth) / (k - h) as f64;
    let spread = 2.0 * (raw - half_depth).abs();
    let lower = estimate - spread;
    let mut upper = estimate + spread;
    if raw <= tau.t {
        upper = upper.min(raw);
    }
    Ok(PressureEstimate { estimate, lower, upper, raw, half_depth })
}

/// Tracks `T_w` as widths `(c, d)` and orientation while a word grows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordShape {
    pub c: f64,
    pub d: f64,
    pub diagonal: bool,
    pub p: f64,
    pub last: usize,
}

impl WordShape {
    pub fn start(model: &GifsModel, e: usize) -> Self {
        let ed = &model.edges[e];
        WordShape { c: ed.a, d: ed.b, diagonal: ed.is_diagonal(), p: ed.p, last: e }
    }

    /// Shape of `w e` (rows of `T_w T_e`).
    pub fn push(&self, model: &GifsModel, e: usize) -> Self {
        let ed = &model.edges[e];
        let (c, d) = if self.diagonal { (self.c * ed.a, self.d * ed.b) } else { (self.c * ed.b, self.d * ed.a) };
        WordShape { c, d, diagonal: self.diagonal == ed.is_diagonal(), p: self.p * ed.p, last: e }
    }

    pub fn alpha2(&self) -> f64 {
        self.c.min(self.d)
    }

    /// Projection spectrum along the long side of the image rectangle.
    pub fn tau_w(&self, model: &GifsModel, tau: &TauPair) -> f64 {
        let v = model.edges[self.last].to;
        let wide = self.c >= self.d;
        if wide == self.diagonal {
            tau.tau_x[v]
        } else {
            tau.tau_y[v]
        }
    }

    /// `p_w^q alpha_1^{tau_w} alpha_2^{s - tau_w}`.
    pub fn phi(&self, model: &GifsModel, tau: &TauPair, s: f64, q: f64) -> f64 {
        let tw = self.tau_w(model, tau);
        self.p.powf(q) * self.c.max(self.d).powf(tw) * self.c.min(self.d).powf(s - tw)
    }
}

/// Geometry-side `phi^{s,q}(w)` from the word's affine composition.
pub fn phi_word(model: &GifsModel, tau: &TauPair, s: f64, q: f64, word: &[usize]) -> Result<f64> {
    let g = crate::model::compose_word(model, word)?;
    let v = model.edges[*word.last().expect("admissible words are nonempty")].to;
    let wide = g.c >= g.d;
    let tw = if wide == (g.orientation == Kind::Diagonal) { tau.tau_x[v] } else { tau.tau_y[v] };
    Ok(g.p_w.powf(q) * g.alpha1.powf(tw) * g.alpha2.powf(s - tw))
}

/// `||A_k||^{1/k}` by enumerating every admissible word of length `k`.
pub fn pressure_bruteforce(model: &GifsModel, tau: &TauPair, s: f64, q: f64, k: usize) -> Result<f64> {
    if (model.num_edges() as f64).powi(k as i32) > 1e7 {
        return Err(Error::BudgetExceeded(format!("{}^{k} words", model.num_edges())));
    }
    fn walk(model: &GifsModel, tau: &TauPair, s: f64, q: f64, left: usize, w: WordShape, acc: &mut f64) {
        if left == 0 {
            *acc += w.phi(model, tau, s, q);
            return;
        }
        for &e in &model.out_edges[model.edges[w.last].to] {
            walk(model, tau, s, q, left - 1, w.push(model, e), acc);
        }
    }
    let mut total = 0.0;
    for e in 0..model.num_edges() {
        walk(model, tau, s, q, k - 1, WordShape::start(model, e), &mut total);
    }
    Ok(total.powf(1.0 / k as f64))
}
