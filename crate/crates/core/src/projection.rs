//! Doubled projection graph, the A/B family split and projection spectra.

use serde::Serialize;

use crate::error::Result;
use crate::model::{GifsModel, Kind};
use crate::spectral::{solve_decreasing, spectral_radius, LabeledMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Arc {
    pub edge: usize,
    pub axis: Axis,
    pub from: usize,
    pub to: usize,
    pub ratio: f64,
    pub p: f64,
    /// Projected map `xi -> sign * ratio * xi + offset`.
    pub sign: i8,
    pub offset: f64,
}

/// Node `2v` is `v_x`, node `2v + 1` is `v_y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubledGraph {
    pub num_vertices: usize,
    pub labels: Vec<String>,
    pub arcs: Vec<Arc>,
}

impl DoubledGraph {
    pub fn num_nodes(&self) -> usize {
        2 * self.num_vertices
    }

    pub fn node(v: usize, axis: Axis) -> usize {
        match axis {
            Axis::X => 2 * v,
            Axis::Y => 2 * v + 1,
        }
    }
}

pub fn build_doubled_graph(model: &GifsModel) -> DoubledGraph {
    let labels = model
        .vertices
        .iter()
        .flat_map(|v| [format!("{v}_x"), format!("{v}_y")])
        .collect();
    let mut arcs = Vec::with_capacity(2 * model.num_edges());
    for (i, e) in model.edges.iter().enumerate() {
        let (tx, ty) = match e.kind {
            Kind::Diagonal => (Axis::X, Axis::Y),
            Kind::AntiDiagonal => (Axis::Y, Axis::X),
        };
        arcs.push(Arc {
            edge: i,
            axis: Axis::X,
            from: DoubledGraph::node(e.from, Axis::X),
            to: DoubledGraph::node(e.to, tx),
            ratio: e.a,
            p: e.p,
            sign: e.sign_a,
            offset: e.tx,
        });
        arcs.push(Arc {
            edge: i,
            axis: Axis::Y,
            from: DoubledGraph::node(e.from, Axis::Y),
            to: DoubledGraph::node(e.to, ty),
            ratio: e.b,
            p: e.p,
            sign: e.sign_b,
            offset: e.ty,
        });
    }
    DoubledGraph { num_vertices: model.num_vertices(), labels, arcs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Irreducible,
    Split,
}

/// Which projection of `mu_v` belongs to family A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    XInA,
    YInA,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySplit {
    pub mode: Mode,
    pub family_a: Vec<usize>,
    pub family_b: Vec<usize>,
    pub role: Vec<Role>,
}

fn pattern(doubled: &DoubledGraph) -> LabeledMatrix {
    let mut m = LabeledMatrix::zeros(doubled.labels.clone());
    for arc in &doubled.arcs {
        m.set(arc.from, arc.to, 1.0);
    }
    m
}

/// A is the component holding the first vertex's x-projection.
pub fn partition_families(doubled: &DoubledGraph) -> FamilySplit {
    let sccs = pattern(doubled).pattern_sccs();
    let all: Vec<usize> = (0..doubled.num_nodes()).collect();
    if sccs.len() == 1 {
        return FamilySplit {
            mode: Mode::Irreducible,
            family_a: all,
            family_b: Vec::new(),
            role: vec![Role::Both; doubled.num_vertices],
        };
    }
    assert_eq!(sccs.len(), 2, "a strongly connected system doubles into at most two components");
    let a_idx = if sccs[0].contains(&0) { 0 } else { 1 };
    let family_a = sccs[a_idx].clone();
    let family_b = sccs[1 - a_idx].clone();
    let role = (0..doubled.num_vertices)
        .map(|v| {
            let x_in_a = family_a.contains(&DoubledGraph::node(v, Axis::X));
            let y_in_a = family_a.contains(&DoubledGraph::node(v, Axis::Y));
            assert!(x_in_a != y_in_a, "exactly one projection per vertex lies in A");
            if x_in_a {
                Role::XInA
            } else {
                Role::YInA
            }
        })
        .collect();
    FamilySplit { mode: Mode::Split, family_a, family_b, role }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauPair {
    pub q: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    pub t: f64,
    /// `tau_{x,v}` per vertex.
    pub tau_x: Vec<f64>,
    /// `tau_{y,v}` per vertex.
    pub tau_y: Vec<f64>,
}

impl TauPair {
    /// `tau_{x,e} = tau_{x,t(e)}`.
    pub fn tau_x_edge(&self, model: &GifsModel, e: usize) -> f64 {
        self.tau_x[model.edges[e].to]
    }

    pub fn tau_y_edge(&self, model: &GifsModel, e: usize) -> f64 {
        self.tau_y[model.edges[e].to]
    }
}

/// Arcs with the same endpoints and the same projected map, weights summed.
pub fn merged_arcs(doubled: &DoubledGraph) -> Vec<Arc> {
    let mut out: Vec<Arc> = Vec::with_capacity(doubled.arcs.len());
    for arc in &doubled.arcs {
        let twin = out.iter_mut().find(|o| {
            o.from == arc.from && o.to == arc.to && o.ratio == arc.ratio && o.sign == arc.sign && o.offset == arc.offset
        });
        match twin {
            Some(o) => o.p += arc.p,
            None => out.push(arc.clone()),
        }
    }
    out
}

fn family_matrix(doubled: &DoubledGraph, arcs: &[Arc], family: &[usize], q: f64, s: f64) -> LabeledMatrix {
    let mut pos = vec![usize::MAX; doubled.num_nodes()];
    for (k, &n) in family.iter().enumerate() {
        pos[n] = k;
    }
    let mut m = LabeledMatrix::zeros(family.iter().map(|&n| doubled.labels[n].clone()).collect());
    for arc in arcs {
        let (i, j) = (pos[arc.from], pos[arc.to]);
        if i != usize::MAX && j != usize::MAX {
            let w = m.get(i, j) + arc.p.powf(q) * arc.ratio.powf(s);
            m.set(i, j, w);
        }
    }
    m
}

/// Spectrum of one strongly connected family: the `s` with `rho(M^{(q,s)}) = 1`.
///
/// Coinciding projected maps are merged first, so aligned grids (where several
/// rectangles share a column or row) get the spectrum of the actual projection.
pub fn family_tau(doubled: &DoubledGraph, family: &[usize], q: f64) -> Result<f64> {
    let arcs = merged_arcs(doubled);
    solve_decreasing(|s| spectral_radius(&family_matrix(doubled, &arcs, family, q, s)) - 1.0)
}

pub fn projection_tau(doubled: &DoubledGraph, split: &FamilySplit, q: f64) -> Result<TauPair> {
    let (tau_a, tau_b) = match split.mode {
        Mode::Irreducible => {
            let tau = family_tau(doubled, &split.family_a, q)?;
            (tau, tau)
        }
        Mode::Split => (family_tau(doubled, &split.family_a, q)?, family_tau(doubled, &split.family_b, q)?),
    };
    let (tau_x, tau_y) = split
        .role
        .iter()
        .map(|r| match r {
            Role::XInA | Role::Both => (tau_a, tau_b),
            Role::YInA => (tau_b, tau_a),
        })
        .unzip();
    Ok(TauPair { q, tau_a, tau_b, t: tau_a + tau_b, tau_x, tau_y })
}

/// Convenience: doubled graph, split and projection spectra at `q`.
pub fn tau_at(model: &GifsModel, q: f64) -> Result<TauPair> {
    let doubled = build_doubled_graph(model);
    let split = partition_families(&doubled);
    projection_tau(&doubled, &split, q)
}
