//! Closed form of the L^q-spectrum for systems whose maps are all diagonal.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::GifsModel;
use crate::projection::{tau_at, TauPair};
use crate::spectral::{perron_data, solve_decreasing, solve_rho_one, LabeledMatrix, Solve};
use crate::minimize::{bisect_sign, convex_grid_min, sign_change_roots};

/// Band inside which a branch sign test counts as satisfied.
const BRANCH_BAND: f64 = 1e-12;
/// Opposite-sign gap beyond which the regime dichotomy is reported violated.
const REGIME_TOL: f64 = 1e-9;
const CROSS_CHECK_TOL: f64 = 1e-8;
const GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `max(gamma_A, gamma_B) <= t`
    E1,
    /// `min(gamma_A, gamma_B) >= t`
    E2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    AMax,
    B1,
    B2,
    B3,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::AMax => "a-max",
            Branch::B1 => "b1",
            Branch::B2 => "b2",
            Branch::B3 => "b3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalBranch {
    pub regime: Regime,
    pub branch: Branch,
    pub x_star: Option<f64>,
    pub y_star: Option<f64>,
    pub gamma_a: f64,
    pub gamma_b: f64,
}

fn require_diagonal(model: &GifsModel) -> Result<()> {
    if model.all_diagonal() {
        Ok(())
    } else {
        Err(Error::NotDiagonalSystem)
    }
}

fn edge_labels(model: &GifsModel) -> Vec<String> {
    model.edges.iter().map(|e| e.id.clone()).collect()
}

/// `F(e, e') = p_{e'}^q a_{e'}^x b_{e'}^y` when `t(e) = i(e')`.
pub fn build_f(model: &GifsModel, q: f64, x: f64, y: f64) -> Result<LabeledMatrix> {
    require_diagonal(model)?;
    Ok(f_matrix(model, q, x, y))
}

fn f_matrix(model: &GifsModel, q: f64, x: f64, y: f64) -> LabeledMatrix {
    let mut m = LabeledMatrix::zeros(edge_labels(model));
    let w: Vec<f64> = model.edges.iter().map(|e| e.p.powf(q) * e.a.powf(x) * e.b.powf(y)).collect();
    for (i, e) in model.edges.iter().enumerate() {
        for &j in &model.out_edges[e.to] {
            m.set(i, j, w[j]);
        }
    }
    m
}

/// `gamma_A` and `gamma_B` from `rho(F_{tau_A, gamma_A - tau_A}) = 1` and `rho(F_{gamma_B - tau_B, tau_B}) = 1`.
pub fn gamma_ab(model: &GifsModel, tau: &TauPair, q: f64) -> Result<(f64, f64)> {
    require_diagonal(model)?;
    let build = |x, y| f_matrix(model, q, x, y);
    let ya = solve_rho_one(build, tau.tau_a, Solve::Y)?;
    let xb = solve_rho_one(build, tau.tau_b, Solve::X)?;
    Ok((tau.tau_a + ya, xb + tau.tau_b))
}

pub fn regime(gamma_a: f64, gamma_b: f64, t: f64) -> Result<Regime> {
    let (da, db) = (gamma_a - t, gamma_b - t);
    if da <= BRANCH_BAND && db <= BRANCH_BAND {
        Ok(Regime::E1)
    } else if da >= -BRANCH_BAND && db >= -BRANCH_BAND {
        Ok(Regime::E2)
    } else if da.abs().min(db.abs()) <= REGIME_TOL {
        // one side sits on the boundary, where both formulas agree
        if da.max(db) > 0.0 && da.min(db) >= -REGIME_TOL {
            Ok(Regime::E2)
        } else {
            Ok(Regime::E1)
        }
    } else {
        Err(Error::RegimeAmbiguous { da, db })
    }
}

/// Weighted log-anisotropy `sum_e f_e log(a_e/b_e)` of the stationary vector at `(x, y)`.
fn anisotropy(model: &GifsModel, q: f64, x: f64, y: f64) -> Result<f64> {
    let pd = perron_data(&f_matrix(model, q, x, y))?;
    Ok(pd.stationary.iter().zip(&model.edges).map(|(f, e)| f * (e.a / e.b).ln()).sum())
}

/// Endpoint selection shared by the matrix and scalar paths of regime (e2).
fn e2_endpoints(s_a: f64, s_b: f64, gamma_a: f64, gamma_b: f64) -> Option<(f64, Branch)> {
    let b1 = s_a >= -BRANCH_BAND;
    let b2 = s_b <= BRANCH_BAND;
    match (b1, b2) {
        (true, true) if gamma_b < gamma_a => Some((gamma_b, Branch::B2)),
        (true, _) => Some((gamma_a, Branch::B1)),
        (false, true) => Some((gamma_b, Branch::B2)),
        (false, false) => None,
    }
}

/// Minimum of the convex map `x -> x + y(x)` on `[lo, hi]`, located at a sign change of `phi`.
fn b3_minimum(
    lo: f64,
    hi: f64,
    y_of: &dyn Fn(f64) -> Result<f64>,
    phi: &dyn Fn(f64) -> Result<f64>,
) -> Result<(f64, f64, f64)> {
    let roots = sign_change_roots(lo, hi, GRID, phi)?;
    let mut best: Option<(f64, f64, f64)> = None;
    for x in roots {
        let y = y_of(x)?;
        if best.is_none_or(|b| x + y < b.0) {
            best = Some((x + y, x, y));
        }
    }
    let grid = convex_grid_min(lo, hi, GRID, &|x| Ok(x + y_of(x)?))?;
    let (value, x, y) = best.ok_or(Error::CrossCheck { root: f64::NAN, grid })?;
    if (value - grid).abs() > CROSS_CHECK_TOL {
        return Err(Error::CrossCheck { root: value, grid });
    }
    Ok((value, x, y))
}

pub fn gamma_diagonal(model: &GifsModel, tau: &TauPair, q: f64) -> Result<(f64, DiagonalBranch)> {
    require_diagonal(model)?;
    let (gamma_a, gamma_b) = gamma_ab(model, tau, q)?;
    let mk = |regime, branch, xs: Option<(f64, f64)>| DiagonalBranch {
        regime,
        branch,
        x_star: xs.map(|p| p.0),
        y_star: xs.map(|p| p.1),
        gamma_a,
        gamma_b,
    };
    match regime(gamma_a, gamma_b, tau.t)? {
        Regime::E1 => Ok((gamma_a.max(gamma_b), mk(Regime::E1, Branch::AMax, None))),
        Regime::E2 => {
            let s_a = anisotropy(model, q, tau.tau_a, gamma_a - tau.tau_a)?;
            let s_b = anisotropy(model, q, gamma_b - tau.tau_b, tau.tau_b)?;
            if let Some((g, br)) = e2_endpoints(s_a, s_b, gamma_a, gamma_b) {
                return Ok((g, mk(Regime::E2, br, None)));
            }
            let build = |x, y| f_matrix(model, q, x, y);
            let y_of = |x: f64| solve_rho_one(build, x, Solve::Y);
            let phi = |x: f64| anisotropy(model, q, x, y_of(x)?);
            let (g, x, y) = b3_minimum(tau.tau_a, gamma_b - tau.tau_b, &y_of, &phi)?;
            Ok((g, mk(Regime::E2, Branch::B3, Some((x, y)))))
        }
    }
}

/// Box dimension `max(gamma_A(0), gamma_B(0))`; regime (e1) must hold at `q = 0`.
pub fn box_dimension_diagonal(model: &GifsModel) -> Result<f64> {
    require_diagonal(model)?;
    let tau = tau_at(model, 0.0)?;
    let (ga, gb) = gamma_ab(model, &tau, 0.0)?;
    if regime(ga, gb, tau.t)? != Regime::E1 {
        return Err(Error::RegimeAmbiguous { da: ga - tau.t, db: gb - tau.t });
    }
    Ok(ga.max(gb))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IfsGamma {
    pub gamma: f64,
    pub branch: Branch,
    pub strict: bool,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub x_star: Option<f64>,
}

/// Single-vertex diagonal path using only the scalar sums `sum_i p_i^q a_i^x b_i^y`.
pub fn gamma_ifs_diagonal(model: &GifsModel, q: f64) -> Result<IfsGamma> {
    if model.num_vertices() != 1 {
        return Err(Error::NotSingleVertex);
    }
    require_diagonal(model)?;
    let maps: Vec<(f64, f64, f64)> = model.edges.iter().map(|e| (e.p.powf(q), e.a, e.b)).collect();
    let sum = |x: f64, y: f64| maps.iter().map(|(pq, a, b)| pq * a.powf(x) * b.powf(y)).sum::<f64>();
    let aniso = |x: f64, y: f64| maps.iter().map(|(pq, a, b)| pq * a.powf(x) * b.powf(y) * (a / b).ln()).sum::<f64>();
    let tau_a = solve_decreasing(|s| sum(s, 0.0) - 1.0)?;
    let tau_b = solve_decreasing(|s| sum(0.0, s) - 1.0)?;
    let t = tau_a + tau_b;
    let gamma_a = tau_a + solve_decreasing(|y| sum(tau_a, y) - 1.0)?;
    let gamma_b = tau_b + solve_decreasing(|x| sum(x, tau_b) - 1.0)?;
    let done = |gamma, branch, x_star| IfsGamma { gamma, branch, strict: branch == Branch::B3, gamma_a, gamma_b, x_star };
    match regime(gamma_a, gamma_b, t)? {
        Regime::E1 => Ok(done(gamma_a.max(gamma_b), Branch::AMax, None)),
        Regime::E2 => {
            let s_a = aniso(tau_a, gamma_a - tau_a);
            let s_b = aniso(gamma_b - tau_b, tau_b);
            if let Some((g, br)) = e2_endpoints(s_a, s_b, gamma_a, gamma_b) {
                return Ok(done(g, br, None));
            }
            let y_of = |x: f64| solve_decreasing(|y| sum(x, y) - 1.0);
            // a single sign change from s_a < 0 to s_b > 0 along the convex curve
            let phi = |x: f64| Ok(aniso(x, y_of(x)?));
            let x_star = bisect_sign(tau_a, gamma_b - tau_b, s_a, &phi)?;
            let gamma = x_star + y_of(x_star)?;
            let out = done(gamma, Branch::B3, Some(x_star));
            debug_assert!(gamma < gamma_a.min(gamma_b) - 1e-12, "b3 value must sit strictly below both endpoints");
            Ok(out)
        }
    }
}
