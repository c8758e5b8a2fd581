#![allow(dead_code)]

use boxlike::model::{Kind, Num, RawEdge, RawSystem};
use boxlike::{validate_gifs, GifsModel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(clippy::too_many_arguments)]
pub fn edge(id: &str, from: &str, to: &str, kind: Kind, a: &str, b: &str, tx: &str, ty: &str, p: &str) -> RawEdge {
    RawEdge {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        kind,
        a: a.into(),
        b: b.into(),
        sign_a: None,
        sign_b: None,
        tx: Some(tx.into()),
        ty: Some(ty.into()),
        p: p.into(),
    }
}

pub fn raw(vertices: &[&str], edges: Vec<RawEdge>) -> RawSystem {
    RawSystem { vertices: vertices.iter().map(|s| s.to_string()).collect(), edges }
}

pub fn sys1_raw() -> RawSystem {
    raw(
        &["v"],
        vec![
            edge("1", "v", "v", Kind::Diagonal, "3/4", "1/4", "0", "0", "1/2"),
            edge("2", "v", "v", Kind::Diagonal, "1/4", "3/4", "3/4", "1/4", "1/2"),
        ],
    )
}

/// SYS1 with the first map replaced by the anti-diagonal `[[0, 3/4], [1/4, 0]]`.
pub fn sys1_rot_raw() -> RawSystem {
    let mut r = sys1_raw();
    r.edges[0].kind = Kind::AntiDiagonal;
    r
}

pub fn sys2_raw() -> RawSystem {
    raw(
        &["v"],
        vec![
            edge("1", "v", "v", Kind::Diagonal, "1/2", "1/2", "0", "0", "1/2"),
            edge("2", "v", "v", Kind::Diagonal, "1/2", "1/2", "1/2", "1/2", "1/2"),
        ],
    )
}

pub fn mcmullen_raw() -> RawSystem {
    raw(
        &["v"],
        vec![
            edge("1", "v", "v", Kind::Diagonal, "1/3", "1/2", "0", "0", "1/3"),
            edge("2", "v", "v", Kind::Diagonal, "1/3", "1/2", "1/3", "1/2", "1/3"),
            edge("3", "v", "v", Kind::Diagonal, "1/3", "1/2", "2/3", "0", "1/3"),
        ],
    )
}

pub fn sys1() -> GifsModel {
    validate_gifs(&sys1_raw()).unwrap()
}

pub fn sys1_rot() -> GifsModel {
    validate_gifs(&sys1_rot_raw()).unwrap()
}

pub fn sys2() -> GifsModel {
    validate_gifs(&sys2_raw()).unwrap()
}

pub fn mcmullen() -> GifsModel {
    validate_gifs(&mcmullen_raw()).unwrap()
}

/// Two vertices, all diagonal.
pub fn diag2() -> GifsModel {
    validate_gifs(&raw(
        &["u", "w"],
        vec![
            edge("uu", "u", "u", Kind::Diagonal, "0.4", "0.3", "0", "0", "0.5"),
            edge("uw", "u", "w", Kind::Diagonal, "0.3", "0.5", "0.5", "0.5", "0.5"),
            edge("wu", "w", "u", Kind::Diagonal, "0.5", "0.4", "0", "0", "1"),
        ],
    ))
    .unwrap()
}

/// Two vertices, mixed kinds.
pub fn mixed2() -> GifsModel {
    validate_gifs(&raw(
        &["u", "w"],
        vec![
            edge("uu", "u", "u", Kind::Diagonal, "0.4", "0.3", "0", "0", "0.5"),
            edge("uw", "u", "w", Kind::AntiDiagonal, "0.3", "0.5", "0.5", "0.5", "0.5"),
            edge("wu", "w", "u", Kind::Diagonal, "0.5", "0.4", "0", "0", "0.6"),
            edge("ww", "w", "w", Kind::AntiDiagonal, "0.4", "0.4", "0.55", "0.55", "0.4"),
        ],
    ))
    .unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kinds {
    Diagonal,
    Mixed,
}

#[derive(Debug, Clone, Copy)]
pub struct GenSpec {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub kinds: Kinds,
}

/// Random valid system: strongly connected, ROSC, and disjoint x- and
/// y-projections among siblings (so the projections have no overlaps).
pub fn random_system(rng: &mut ChaCha8Rng, spec: GenSpec) -> GifsModel {
    let nv = rng.gen_range(1..=spec.max_vertices.clamp(1, 2));
    let names = ["u", "w"];
    let mut plan: Vec<(usize, usize)> = Vec::new();
    if nv == 1 {
        let k = rng.gen_range(2..=spec.max_edges.max(2));
        plan.extend((0..k).map(|_| (0, 0)));
    } else {
        // every vertex gets a second out-edge: with a single one, mu_w is an
        // affine copy of mu_u and the mesh counts oscillate log-periodically
        assert!(spec.max_edges >= 4, "two-vertex systems use four edges");
        plan.push((0, 1));
        plan.push((1, 0));
        plan.push((0, rng.gen_range(0..2)));
        plan.push((1, rng.gen_range(0..2)));
    }
    let mut edges = Vec::new();
    for v in 0..nv {
        let outs: Vec<(usize, usize)> = plan.iter().copied().filter(|&(f, _)| f == v).collect();
        let k = outs.len();
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(rng);
        let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
        let total: f64 = weights.iter().sum();
        let slot = 1.0 / k as f64;
        for (i, &(_, to)) in outs.iter().enumerate() {
            let kind = match spec.kinds {
                Kinds::Diagonal => Kind::Diagonal,
                Kinds::Mixed => {
                    if rng.gen_bool(0.5) {
                        Kind::AntiDiagonal
                    } else {
                        Kind::Diagonal
                    }
                }
            };
            let a = slot * rng.gen_range(0.35..0.95);
            let b = slot * rng.gen_range(0.35..0.95);
            let x0 = slot * i as f64 + rng.gen_range(0.0..(slot - a));
            let y0 = slot * perm[i] as f64 + rng.gen_range(0.0..(slot - b));
            let sa: i8 = if rng.gen_bool(0.5) { 1 } else { -1 };
            let sb: i8 = if rng.gen_bool(0.5) { 1 } else { -1 };
            let tx = if sa > 0 { x0 } else { x0 + a };
            let ty = if sb > 0 { y0 } else { y0 + b };
            let p = if i + 1 == k {
                1.0 - weights[..k - 1].iter().map(|w| w / total).sum::<f64>()
            } else {
                weights[i] / total
            };
            edges.push(RawEdge {
                id: format!("e{}", edges.len() + 1),
                from: names[v].into(),
                to: names[to].into(),
                kind,
                a: Num::Float(a),
                b: Num::Float(b),
                sign_a: Some(Num::Float(sa as f64)),
                sign_b: Some(Num::Float(sb as f64)),
                tx: Some(Num::Float(tx)),
                ty: Some(Num::Float(ty)),
                p: Num::Float(p),
            });
        }
    }
    if spec.kinds == Kinds::Mixed && edges.iter().all(|e| e.kind == Kind::Diagonal) {
        let i = rng.gen_range(0..edges.len());
        edges[i].kind = Kind::AntiDiagonal;
    }
    validate_gifs(&RawSystem { vertices: names[..nv].iter().map(|s| s.to_string()).collect(), edges })
        .expect("generator produces valid systems")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Scalar bisection for the decreasing `s -> sum_i w_i r_i^s - 1`.
pub fn scalar_root(f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (-100.0f64, 100.0f64);
    assert!(f(lo) > 0.0 && f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `s(q)` solving `(1/2)^q ((3/4)^s + (1/4)^s) = 1`.
pub fn sys1_s(q: f64) -> f64 {
    scalar_root(|s| 0.5f64.powf(q) * (0.75f64.powf(s) + 0.25f64.powf(s)) - 1.0)
}

/// The SYS1 closed form: `s(q)` up to `q = 1`, then `2 (q - 1) ln 2 / ln(3/16)`.
pub fn sys1_gamma(q: f64) -> f64 {
    if q <= 1.0 {
        sys1_s(q)
    } else {
        2.0 * (q - 1.0) * 2f64.ln() / (3.0f64 / 16.0).ln()
    }
}
