//! Perron roots, Perron vectors and the monotone `rho = 1` solver.
//!
//! Every matrix handled here is small, dense and entrywise nonnegative. The
//! Perron root of an irreducible block is found by power iteration on the
//! shifted matrix `M + cI` with `c` the maximal row sum; the shift makes the
//! block primitive so period-`k` structure cannot stall the iteration.
//! Iteration is accelerated by repeated squaring and stops on the
//! Collatz-Wielandt bracket `min (Mu)_i/u_i <= rho <= max (Mu)_i/u_i`.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};

pub const EIGEN_TOL: f64 = 1e-12;
pub const ROOT_TOL: f64 = 1e-12;
pub const RHO_ONE_TOL: f64 = 1e-9;

const BRACKET_START: f64 = 64.0;
const BRACKET_LIMIT: f64 = 1.0e6;

/// Dense square nonnegative matrix with row/column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    pub labels: Vec<String>,
    n: usize,
    data: Vec<f64>,
}

impl LabeledMatrix {
    pub fn zeros(labels: Vec<String>) -> Self {
        let n = labels.len();
        LabeledMatrix { labels, n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(labels);
        assert_eq!(rows.len(), m.n, "row count must match labels");
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), m.n, "matrix must be square");
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    /// Unlabeled convenience constructor; labels are "0", "1", ...
    pub fn from_unlabeled(rows: &[Vec<f64>]) -> Self {
        Self::from_rows((0..rows.len()).map(|i| i.to_string()).collect(), rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        debug_assert!(x >= 0.0 || x.is_nan(), "entries must be nonnegative");
        self.data[i * self.n + j] = x;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.labels.clone());
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut s = Self::zeros(idx.iter().map(|&i| self.labels[i].clone()).collect());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                s.set(a, b, self.get(i, j));
            }
        }
        s
    }

    /// Conjugation `P M P` by the permutation `perm` (an involution or not): entry (i,j) becomes M(perm i, perm j).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut s = Self::zeros(perm.iter().map(|&i| self.labels[i].clone()).collect());
        for i in 0..self.n {
            for j in 0..self.n {
                s.set(i, j, self.get(perm[i], perm[j]));
            }
        }
        s
    }

    pub fn mul_vec(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(u).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn vec_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &vi) in v.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += vi * self.get(i, j);
            }
        }
        out
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Strongly connected components of the positive pattern, in Tarjan order.
    pub fn pattern_sccs(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::with_capacity(self.n, self.n * self.n);
        let nodes: Vec<_> = (0..self.n).map(|_| g.add_node(())).collect();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) > 0.0 {
                    g.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    pub fn is_irreducible(&self) -> bool {
        match self.n {
            0 => false,
            1 => self.get(0, 0) > 0.0,
            _ => self.pattern_sccs().len() == 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerronData {
    pub rho: f64,
    /// Right eigenvector, unit 1-norm.
    pub u: Vec<f64>,
    /// Left eigenvector, scaled so that `v . u = 1`.
    pub v: Vec<f64>,
    /// `v_i u_i`.
    pub stationary: Vec<f64>,
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn normalize(u: &mut [f64]) -> f64 {
    let s: f64 = u.iter().sum();
    if s > 0.0 && s.is_finite() {
        u.iter_mut().for_each(|x| *x /= s);
    }
    s
}

/// Collatz-Wielandt bracket of `m` at positive `u`; components that have underflowed are skipped.
fn cw_bounds(m: &LabeledMatrix, u: &[f64]) -> (f64, f64) {
    let mu = m.mul_vec(u);
    let top = u.iter().copied().fold(0.0, f64::max);
    let floor = top * 1e-250;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (x, y) in u.iter().zip(&mu) {
        if *x > floor {
            let r = y / x;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

/// Perron root and right vector of an irreducible block.
fn perron_root_irreducible(m: &LabeledMatrix) -> (f64, Vec<f64>) {
    let n = m.dim();
    if n == 1 {
        return (m.get(0, 0), vec![1.0]);
    }
    let c = m.max_row_sum();
    if c == 0.0 || !c.is_finite() {
        return (c, vec![1.0 / n as f64; n]);
    }
    let mut p: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            (m.get(i, j) + if i == j { c } else { 0.0 }) / (2.0 * c)
        })
        .collect();
    let ones = vec![1.0; n];
    let mut best_u = vec![1.0 / n as f64; n];
    let mut best_gap = f64::INFINITY;
    let mut best = (0.0, 0.0);
    for _ in 0..64 {
        let mut u: Vec<f64> = (0..n).map(|i| p[i * n..(i + 1) * n].iter().zip(&ones).map(|(a, b)| a * b).sum()).collect();
        normalize(&mut u);
        if u.iter().all(|x| x.is_finite() && *x >= 0.0) {
            let (lo, hi) = cw_bounds(m, &u);
            let gap = hi - lo;
            if gap < best_gap {
                best_gap = gap;
                best = (lo, hi);
                best_u = u;
            }
            if gap <= 1e-14 * hi {
                break;
            }
        }
        p = matmul(&p, &p, n);
        let top = p.iter().copied().fold(0.0, f64::max);
        if !(top > 0.0 && top.is_finite()) {
            break;
        }
        p.iter_mut().for_each(|x| *x /= top);
    }
    // polish with a few plain shifted steps
    let mut u = best_u.clone();
    for _ in 0..4 {
        let mut w = m.mul_vec(&u);
        for (wi, ui) in w.iter_mut().zip(&u) {
            *wi += c * ui;
        }
        normalize(&mut w);
        let (lo, hi) = cw_bounds(m, &w);
        if hi - lo <= best_gap {
            best_gap = hi - lo;
            best = (lo, hi);
            best_u = w.clone();
        }
        u = w;
    }
    (0.5 * (best.0 + best.1), best_u)
}

/// Spectral radius of a nonnegative square matrix (exactly 0 for the zero matrix).
pub fn spectral_radius(m: &LabeledMatrix) -> f64 {
    let n = m.dim();
    if n == 0 {
        return 0.0;
    }
    if m.data.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    if m.data.iter().any(|x| x.is_infinite()) {
        return f64::INFINITY;
    }
    let sccs = m.pattern_sccs();
    if sccs.len() == 1 {
        return perron_root_irreducible(m).0;
    }
    sccs.iter()
        .map(|c| {
            if c.len() == 1 {
                m.get(c[0], c[0])
            } else {
                perron_root_irreducible(&m.submatrix(c)).0
            }
        })
        .fold(0.0, f64::max)
}

/// Perron root with left/right vectors and the stationary vector `v o u`.
pub fn perron_data(m: &LabeledMatrix) -> Result<PerronData> {
    if !m.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let (rho, u) = perron_root_irreducible(m);
    let (_, mut v) = perron_root_irreducible(&m.transpose());
    let dot: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
    v.iter_mut().for_each(|x| *x /= dot);
    let stationary = v.iter().zip(&u).map(|(a, b)| a * b).collect();
    Ok(PerronData { rho, u, v, stationary })
}

/// Which coordinate is free when solving `rho(M_{x,y}) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solve {
    /// Solve for `y` with `x` fixed.
    Y,
    /// Solve for `x` with `y` fixed.
    X,
}

/// Root of a strictly decreasing function `g` crossing zero.
///
/// Brackets start at `[-64, 64]` and double until a sign change is seen.
pub fn solve_decreasing(g: impl Fn(f64) -> f64) -> Result<f64> {
    let pos = |z: f64| {
        let v = g(z);
        v > 0.0 || v.is_nan() && z < 0.0
    };
    let mut lo = -BRACKET_START;
    let mut hi = BRACKET_START;
    while !pos(lo) {
        lo *= 2.0;
        if lo < -BRACKET_LIMIT {
            return Err(Error::BracketFailure { lo, hi });
        }
    }
    while pos(hi) {
        hi *= 2.0;
        if hi > BRACKET_LIMIT {
            return Err(Error::BracketFailure { lo, hi });
        }
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pos(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Unique value of the free coordinate where `rho(builder(x, y)) = 1`.
///
/// The builder must be entrywise of the form `p^q a^x b^y`, so `rho` is
/// strictly decreasing in either coordinate.
pub fn solve_rho_one(builder: impl Fn(f64, f64) -> LabeledMatrix, fixed: f64, which: Solve) -> Result<f64> {
    solve_decreasing(|z| {
        let m = match which {
            Solve::Y => builder(fixed, z),
            Solve::X => builder(z, fixed),
        };
        spectral_radius(&m) - 1.0
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Split {
    Irreducible,
    Reducible {
        /// Block containing label 0.
        first: Vec<usize>,
        second: Vec<usize>,
        blocks: (LabeledMatrix, LabeledMatrix),
    },
}

/// Splits a hat-edge matrix (labels paired as `2i, 2i+1`) into its two conjugate blocks.
pub fn reducible_split(m: &LabeledMatrix) -> Result<Split> {
    let n = m.dim();
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::MalformedPattern);
    }
    if (0..n).any(|i| (0..n).all(|j| m.get(i, j) == 0.0)) {
        return Err(Error::MalformedPattern);
    }
    let sccs = m.pattern_sccs();
    if sccs.len() == 1 {
        return Ok(Split::Irreducible);
    }
    if sccs.len() != 2 || sccs[0].len() != n / 2 {
        return Err(Error::MalformedPattern);
    }
    let (first, second) = if sccs[0].contains(&0) {
        (sccs[0].clone(), sccs[1].clone())
    } else {
        (sccs[1].clone(), sccs[0].clone())
    };
    let mut mirror: Vec<usize> = first.iter().map(|&i| i ^ 1).collect();
    mirror.sort_unstable();
    if mirror != second {
        return Err(Error::MalformedPattern);
    }
    for &i in &first {
        for &j in &second {
            if m.get(i, j) > 0.0 || m.get(j, i) > 0.0 {
                return Err(Error::MalformedPattern);
            }
        }
    }
    let blocks = (m.submatrix(&first), m.submatrix(&second));
    Ok(Split::Reducible { first, second, blocks })
}

/// Stationary vector over hat-edges at a point where `rho(G) = 1`.
///
/// Reducible patterns get each block's own stationary vector, so the total mass is 2.
pub fn stationary_g(g: &LabeledMatrix) -> Result<Vec<f64>> {
    let rho = spectral_radius(g);
    if (rho - 1.0).abs() > RHO_ONE_TOL {
        return Err(Error::NotAtRhoOne { rho });
    }
    match reducible_split(g)? {
        Split::Irreducible => Ok(perron_data(g)?.stationary),
        Split::Reducible { first, second, blocks } => {
            let mut out = vec![0.0; g.dim()];
            for (idx, block) in [(&first, &blocks.0), (&second, &blocks.1)] {
                let pd = perron_data(block)?;
                for (k, &i) in idx.iter().enumerate() {
                    out[i] = pd.stationary[k];
                }
            }
            Ok(out)
        }
    }
}
