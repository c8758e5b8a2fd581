//! Box-like graph-directed systems: input format, validation, ROSC, word geometry.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

const ROW_SUM_TOL: f64 = 1e-12;
const ROSC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "diagonal")]
    Diagonal,
    #[serde(rename = "anti-diagonal")]
    AntiDiagonal,
}

/// A number given either as a JSON float or as a decimal/fraction string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Text(String),
}

impl Num {
    fn value(&self) -> Result<f64> {
        match self {
            Num::Float(x) => Ok(*x),
            Num::Text(s) => {
                if let Some(r) = parse_exact(s) {
                    return Ok(rational_to_f64(&r));
                }
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
            }
        }
    }

    fn exact(&self) -> Option<BigRational> {
        match self {
            Num::Float(_) => None,
            Num::Text(s) => parse_exact(s),
        }
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num::Float(x)
    }
}

impl From<&str> for Num {
    fn from(s: &str) -> Self {
        Num::Text(s.to_string())
    }
}

/// Parses "-0.125", "3/4", "2" exactly. Exponent notation is not exact.
pub fn parse_exact(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_exact(n)?;
        let d = parse_exact(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawEdge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub kind: Kind,
    pub a: Num,
    pub b: Num,
    #[serde(default)]
    pub sign_a: Option<Num>,
    #[serde(default)]
    pub sign_b: Option<Num>,
    #[serde(default)]
    pub tx: Option<Num>,
    #[serde(default)]
    pub ty: Option<Num>,
    pub p: Num,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawSystem {
    pub vertices: Vec<String>,
    pub edges: Vec<RawEdge>,
}

impl RawSystem {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Exact copy of the geometric data, kept when the input was given as decimal strings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactGeom {
    pub a: BigRational,
    pub b: BigRational,
    pub tx: BigRational,
    pub ty: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineEdge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub kind: Kind,
    pub a: f64,
    pub b: f64,
    pub sign_a: i8,
    pub sign_b: i8,
    pub tx: f64,
    pub ty: f64,
    pub p: f64,
    pub exact: Option<ExactGeom>,
}

impl AffineEdge {
    /// Linear part as a row-major 2x2 matrix.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let sa = self.sign_a as f64 * self.a;
        let sb = self.sign_b as f64 * self.b;
        match self.kind {
            Kind::Diagonal => [[sa, 0.0], [0.0, sb]],
            Kind::AntiDiagonal => [[0.0, sa], [sb, 0.0]],
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.kind == Kind::Diagonal
    }
}

#[derive(Debug, Clone)]
pub struct GifsModel {
    pub vertices: Vec<String>,
    pub edges: Vec<AffineEdge>,
    pub out_edges: Vec<Vec<usize>>,
    pub alpha_star: f64,
    pub alpha_sup: f64,
    pub p_star: f64,
    pub p_sup: f64,
}

impl GifsModel {
    pub fn from_json(text: &str) -> Result<Self> {
        validate_gifs(&RawSystem::from_json(text)?)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn all_diagonal(&self) -> bool {
        self.edges.iter().all(|e| e.is_diagonal())
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// Is `w` a nonempty chain of edges?
    pub fn is_admissible(&self, word: &[usize]) -> bool {
        !word.is_empty()
            && word.iter().all(|&e| e < self.edges.len())
            && word.windows(2).all(|p| self.edges[p[0]].to == self.edges[p[1]].from)
    }

    pub fn to_raw(&self) -> RawSystem {
        RawSystem {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| RawEdge {
                    id: e.id.clone(),
                    from: self.vertices[e.from].clone(),
                    to: self.vertices[e.to].clone(),
                    kind: e.kind,
                    a: e.a.into(),
                    b: e.b.into(),
                    sign_a: Some((e.sign_a as f64).into()),
                    sign_b: Some((e.sign_b as f64).into()),
                    tx: Some(e.tx.into()),
                    ty: Some(e.ty.into()),
                    p: e.p.into(),
                })
                .collect(),
        }
    }
}

fn parse_sign(n: &Option<Num>, edge: &str, violations: &mut Vec<Violation>) -> Result<i8> {
    let Some(n) = n else { return Ok(1) };
    let v = n.value()?;
    if v == 1.0 {
        Ok(1)
    } else if v == -1.0 {
        Ok(-1)
    } else {
        violations.push(Violation::BadSign { edge: edge.to_string() });
        Ok(1)
    }
}

/// Validates a parsed description and derives the model constants.
pub fn validate_gifs(raw: &RawSystem) -> Result<GifsModel> {
    let mut violations = Vec::new();
    if raw.vertices.is_empty() || raw.edges.is_empty() {
        return Err(Error::Validation(vec![Violation::Empty]));
    }
    let mut index = HashMap::new();
    for (i, v) in raw.vertices.iter().enumerate() {
        if index.insert(v.clone(), i).is_some() {
            violations.push(Violation::DuplicateId { id: v.clone() });
        }
    }
    let mut seen_edges = HashMap::new();
    let mut edges = Vec::with_capacity(raw.edges.len());
    for re in &raw.edges {
        if seen_edges.insert(re.id.clone(), ()).is_some() {
            violations.push(Violation::DuplicateId { id: re.id.clone() });
        }
        let from = index.get(&re.from).copied();
        let to = index.get(&re.to).copied();
        for (name, slot) in [(&re.from, from), (&re.to, to)] {
            if slot.is_none() {
                violations.push(Violation::UnknownVertex { edge: re.id.clone(), vertex: name.clone() });
            }
        }
        let a = re.a.value()?;
        let b = re.b.value()?;
        let p = re.p.value()?;
        let zero = Num::Float(0.0);
        let tx_n = re.tx.as_ref().unwrap_or(&zero);
        let ty_n = re.ty.as_ref().unwrap_or(&zero);
        let tx = tx_n.value()?;
        let ty = ty_n.value()?;
        if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
            violations.push(Violation::NonContraction { edge: re.id.clone(), a, b });
        }
        if !(p > 0.0 && p <= 1.0) {
            violations.push(Violation::ProbabilityRange { edge: re.id.clone(), p });
        }
        let sign_a = parse_sign(&re.sign_a, &re.id, &mut violations)?;
        let sign_b = parse_sign(&re.sign_b, &re.id, &mut violations)?;
        let zero_r = || Some(<BigRational as num_traits::Zero>::zero());
        let exact = match (
            re.a.exact(),
            re.b.exact(),
            re.tx.as_ref().map_or_else(zero_r, Num::exact),
            re.ty.as_ref().map_or_else(zero_r, Num::exact),
        ) {
            (Some(a), Some(b), Some(tx), Some(ty)) => Some(ExactGeom { a, b, tx, ty }),
            _ => None,
        };
        edges.push(AffineEdge {
            id: re.id.clone(),
            from: from.unwrap_or(0),
            to: to.unwrap_or(0),
            kind: re.kind,
            a,
            b,
            sign_a,
            sign_b,
            tx,
            ty,
            p,
            exact,
        });
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }

    let n = raw.vertices.len();
    let mut out_edges = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        out_edges[e.from].push(i);
    }
    for (v, outs) in out_edges.iter().enumerate() {
        if outs.is_empty() {
            violations.push(Violation::DanglingVertex { vertex: raw.vertices[v].clone() });
            continue;
        }
        let sum: f64 = outs.iter().map(|&i| edges[i].p).sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            violations.push(Violation::ProbabilityRowSum { vertex: raw.vertices[v].clone(), sum });
        }
    }

    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for e in &edges {
        g.add_edge(nodes[e.from], nodes[e.to], ());
    }
    let sccs = kosaraju_scc(&g);
    if sccs.len() > 1 {
        let home = sccs.iter().find(|c| c.contains(&nodes[0])).expect("vertex 0 has a component");
        let mut unreachable: Vec<String> = (0..n)
            .filter(|&v| !home.contains(&nodes[v]))
            .map(|v| raw.vertices[v].clone())
            .collect();
        unreachable.sort();
        violations.push(Violation::NotStronglyConnected { unreachable });
    }
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }

    let ratios = edges.iter().flat_map(|e| [e.a, e.b]);
    let alpha_star = ratios.clone().fold(f64::INFINITY, f64::min);
    let alpha_sup = ratios.fold(0.0, f64::max);
    let p_star = edges.iter().map(|e| e.p).fold(f64::INFINITY, f64::min);
    let p_sup = edges.iter().map(|e| e.p).fold(0.0, f64::max);
    Ok(GifsModel {
        vertices: raw.vertices.clone(),
        edges,
        out_edges,
        alpha_star,
        alpha_sup,
        p_star,
        p_sup,
    })
}

/// Axis-aligned rectangle `[x0,x1] x [y0,y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoscReport {
    pub pass: bool,
    pub exact: bool,
    /// Edges whose image leaves the unit square.
    pub containment_failures: Vec<String>,
    /// Sibling pairs whose open images intersect.
    pub overlaps: Vec<(String, String)>,
}

trait Coord: Clone {
    fn le(&self, other: &Self) -> bool;
    fn pos_gap(lo: &Self, hi: &Self) -> bool;
    fn zero() -> Self;
    fn one() -> Self;
}

impl Coord for f64 {
    fn le(&self, other: &Self) -> bool {
        *self <= *other + ROSC_TOL
    }
    fn pos_gap(lo: &Self, hi: &Self) -> bool {
        hi - lo > ROSC_TOL
    }
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
}

impl Coord for BigRational {
    fn le(&self, other: &Self) -> bool {
        self <= other
    }
    fn pos_gap(lo: &Self, hi: &Self) -> bool {
        hi > lo
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
}

fn interval<T>(t: T, signed_len: T, zero: T) -> (T, T)
where
    T: Clone + PartialOrd + std::ops::Add<Output = T>,
{
    let end = t.clone() + signed_len.clone();
    if signed_len >= zero {
        (t, end)
    } else {
        (end, t)
    }
}

/// Image rectangle as `((x0, x1), (y0, y1))`.
type Span<T> = ((T, T), (T, T));

fn rosc_generic<T: Coord>(model: &GifsModel, rects: &[Span<T>]) -> (Vec<String>, Vec<(String, String)>) {
    let mut contain = Vec::new();
    let mut overlaps = Vec::new();
    for (i, e) in model.edges.iter().enumerate() {
        let ((x0, x1), (y0, y1)) = &rects[i];
        let inside = T::zero().le(x0) && x1.le(&T::one()) && T::zero().le(y0) && y1.le(&T::one());
        if !inside {
            contain.push(e.id.clone());
        }
    }
    for outs in &model.out_edges {
        for (k, &i) in outs.iter().enumerate() {
            for &j in &outs[k + 1..] {
                let ((ax0, ax1), (ay0, ay1)) = &rects[i];
                let ((bx0, bx1), (by0, by1)) = &rects[j];
                let lo_x = if ax0.le(bx0) { bx0 } else { ax0 };
                let hi_x = if ax1.le(bx1) { ax1 } else { bx1 };
                let lo_y = if ay0.le(by0) { by0 } else { ay0 };
                let hi_y = if ay1.le(by1) { ay1 } else { by1 };
                if T::pos_gap(lo_x, hi_x) && T::pos_gap(lo_y, hi_y) {
                    overlaps.push((model.edges[i].id.clone(), model.edges[j].id.clone()));
                }
            }
        }
    }
    (contain, overlaps)
}

/// Image rectangle of the unit square under the edge map.
pub fn edge_rect(e: &AffineEdge) -> Rect {
    let (x0, x1) = interval(e.tx, e.sign_a as f64 * e.a, 0.0);
    let (y0, y1) = interval(e.ty, e.sign_b as f64 * e.b, 0.0);
    Rect { x0, y0, x1, y1 }
}

/// Rectangular open set condition, checked per vertex over sibling edges.
pub fn check_rosc(model: &GifsModel) -> RoscReport {
    let exact = model.edges.iter().all(|e| e.exact.is_some());
    let (containment_failures, overlaps) = if exact {
        let rects: Vec<_> = model
            .edges
            .iter()
            .map(|e| {
                let g = e.exact.as_ref().expect("checked above");
                let la = if e.sign_a < 0 { -g.a.clone() } else { g.a.clone() };
                let lb = if e.sign_b < 0 { -g.b.clone() } else { g.b.clone() };
                (
                    interval(g.tx.clone(), la, <BigRational as num_traits::Zero>::zero()),
                    interval(g.ty.clone(), lb, <BigRational as num_traits::Zero>::zero()),
                )
            })
            .collect();
        rosc_generic(model, &rects)
    } else {
        let rects: Vec<_> = model
            .edges
            .iter()
            .map(|e| {
                let r = edge_rect(e);
                ((r.x0, r.x1), (r.y0, r.y1))
            })
            .collect();
        rosc_generic(model, &rects)
    };
    RoscReport {
        pass: containment_failures.is_empty() && overlaps.is_empty(),
        exact,
        containment_failures,
        overlaps,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordGeometry {
    pub word: Vec<usize>,
    pub c: f64,
    pub d: f64,
    pub orientation: Kind,
    pub p_w: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub rect: Rect,
}

/// Geometry of `psi_w = psi_{w_1} o ... o psi_{w_k}` applied to the unit square.
pub fn compose_word(model: &GifsModel, word: &[usize]) -> Result<WordGeometry> {
    if !model.is_admissible(word) {
        return Err(Error::NotAdmissible(format!("{word:?}")));
    }
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    let mut t = [0.0, 0.0];
    let mut p_w = 1.0;
    let mut anti = 0usize;
    for &i in word {
        let e = &model.edges[i];
        let te = e.matrix();
        let shift = [m[0][0] * e.tx + m[0][1] * e.ty + t[0], m[1][0] * e.tx + m[1][1] * e.ty + t[1]];
        m = [
            [m[0][0] * te[0][0] + m[0][1] * te[1][0], m[0][0] * te[0][1] + m[0][1] * te[1][1]],
            [m[1][0] * te[0][0] + m[1][1] * te[1][0], m[1][0] * te[0][1] + m[1][1] * te[1][1]],
        ];
        t = shift;
        p_w *= e.p;
        if !e.is_diagonal() {
            anti += 1;
        }
    }
    let orientation = if anti.is_multiple_of(2) { Kind::Diagonal } else { Kind::AntiDiagonal };
    let c = m[0][0].abs() + m[0][1].abs();
    let d = m[1][0].abs() + m[1][1].abs();
    let xs = [t[0], t[0] + m[0][0] + m[0][1], t[0] + m[0][0], t[0] + m[0][1]];
    let ys = [t[1], t[1] + m[1][0] + m[1][1], t[1] + m[1][0], t[1] + m[1][1]];
    let rect = Rect {
        x0: xs.iter().copied().fold(f64::INFINITY, f64::min),
        x1: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        y0: ys.iter().copied().fold(f64::INFINITY, f64::min),
        y1: ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(WordGeometry {
        word: word.to_vec(),
        c,
        d,
        orientation,
        p_w,
        alpha1: c.max(d),
        alpha2: c.min(d),
        rect,
    })
}
