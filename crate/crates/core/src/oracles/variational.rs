//! Variational value `max(theta_A, theta_B)` for single-vertex diagonal systems.
//!
//! `theta_A` maximizes
//! `f_A(t) = sum t_i (ln t_i - tau_A ln(a_i/b_i) - q ln p_i) / sum t_i ln b_i`
//! over probability vectors with `sum t_i ln(a_i/b_i) >= 0`; `theta_B` is the
//! mirror image. Critical points lie on the family `t_i = p_i^q a_i^x b_i^y`.

use crate::error::{Error, Result};
use crate::minimize::bisect_sign;
use crate::model::GifsModel;
use crate::spectral::solve_decreasing;

struct Maps {
    lp: Vec<f64>,
    la: Vec<f64>,
    lb: Vec<f64>,
}

impl Maps {
    fn weights(&self, q: f64, x: f64, y: f64) -> Vec<f64> {
        (0..self.lp.len()).map(|i| (q * self.lp[i] + x * self.la[i] + y * self.lb[i]).exp()).collect()
    }

    fn mass(&self, q: f64, x: f64, y: f64) -> f64 {
        self.weights(q, x, y).iter().sum()
    }

    fn drift(&self, t: &[f64]) -> f64 {
        t.iter().enumerate().map(|(i, ti)| ti * (self.la[i] - self.lb[i])).sum()
    }

    fn f_a(&self, t: &[f64], q: f64, tau_a: f64) -> f64 {
        let num: f64 = t
            .iter()
            .enumerate()
            .map(|(i, &ti)| ti * (ti.ln() - tau_a * (self.la[i] - self.lb[i]) - q * self.lp[i]))
            .sum();
        num / t.iter().zip(&self.lb).map(|(ti, l)| ti * l).sum::<f64>()
    }

    fn f_b(&self, t: &[f64], q: f64, tau_b: f64) -> f64 {
        let num: f64 = t
            .iter()
            .enumerate()
            .map(|(i, &ti)| ti * (ti.ln() - tau_b * (self.lb[i] - self.la[i]) - q * self.lp[i]))
            .sum();
        num / t.iter().zip(&self.la).map(|(ti, l)| ti * l).sum::<f64>()
    }

    fn normalized(&self, q: f64, x: f64, y: f64) -> Vec<f64> {
        let mut w = self.weights(q, x, y);
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        w
    }
}

/// `f_A` (equivalently `f_B`) maximized on the hyperplane `sum t_i ln(a_i/b_i) = 0`, if it meets the simplex.
fn boundary_max(m: &Maps, q: f64, tau_a: f64, lo: f64, hi: f64) -> Result<Option<f64>> {
    let has_pos = m.la.iter().zip(&m.lb).any(|(a, b)| a > b);
    let has_neg = m.la.iter().zip(&m.lb).any(|(a, b)| a < b);
    if !(has_pos && has_neg) {
        return Ok(None);
    }
    let y_of = |x: f64| solve_decreasing(|y| m.mass(q, x, y) - 1.0);
    let drift = |x: f64| Ok(m.drift(&m.weights(q, x, y_of(x)?)));
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut da = drift(a)?;
    let mut db = drift(b)?;
    let mut step = (b - a).max(1.0);
    for _ in 0..60 {
        if da <= 0.0 && db >= 0.0 {
            break;
        }
        if da > 0.0 {
            a -= step;
            da = drift(a)?;
        }
        if db < 0.0 {
            b += step;
            db = drift(b)?;
        }
        step *= 2.0;
    }
    if !(da <= 0.0 && db >= 0.0) {
        return Ok(None);
    }
    let x = bisect_sign(a, b, da, &drift)?;
    let t = m.normalized(q, x, y_of(x)?);
    Ok(Some(m.f_a(&t, q, tau_a)))
}

pub fn variational_tau_ifs(model: &GifsModel, q: f64) -> Result<f64> {
    if model.num_vertices() != 1 {
        return Err(Error::NotSingleVertex);
    }
    if !model.all_diagonal() {
        return Err(Error::NotDiagonalSystem);
    }
    let m = Maps {
        lp: model.edges.iter().map(|e| e.p.ln()).collect(),
        la: model.edges.iter().map(|e| e.a.ln()).collect(),
        lb: model.edges.iter().map(|e| e.b.ln()).collect(),
    };
    let tau_a = solve_decreasing(|s| m.mass(q, s, 0.0) - 1.0)?;
    let tau_b = solve_decreasing(|s| m.mass(q, 0.0, s) - 1.0)?;

    let ya = solve_decreasing(|y| m.mass(q, tau_a, y) - 1.0)?;
    let t_a = m.normalized(q, tau_a, ya);
    let xb = solve_decreasing(|x| m.mass(q, x, tau_b) - 1.0)?;
    let t_b = m.normalized(q, xb, tau_b);

    let free_a = m.drift(&t_a) >= 0.0;
    let free_b = m.drift(&t_b) <= 0.0;
    let boundary = if free_a && free_b { None } else { boundary_max(&m, q, tau_a, tau_a, xb)? };
    let theta_a = if free_a { m.f_a(&t_a, q, tau_a) } else { boundary.unwrap_or(f64::NEG_INFINITY) };
    let theta_b = if free_b { m.f_b(&t_b, q, tau_b) } else { boundary.unwrap_or(f64::NEG_INFINITY) };
    Ok(theta_a.max(theta_b))
}

/// `f_A` and `f_B` at an arbitrary probability vector, for external checks of the maximization.
pub fn objective(model: &GifsModel, q: f64, t: &[f64]) -> Result<(f64, f64, f64)> {
    let m = Maps {
        lp: model.edges.iter().map(|e| e.p.ln()).collect(),
        la: model.edges.iter().map(|e| e.a.ln()).collect(),
        lb: model.edges.iter().map(|e| e.b.ln()).collect(),
    };
    let tau_a = solve_decreasing(|s| m.mass(q, s, 0.0) - 1.0)?;
    let tau_b = solve_decreasing(|s| m.mass(q, 0.0, s) - 1.0)?;
    Ok((m.f_a(t, q, tau_a), m.f_b(t, q, tau_b), m.drift(t)))
}
