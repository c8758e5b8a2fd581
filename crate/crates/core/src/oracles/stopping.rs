//! Sums of `phi^{s,q}` over the stopping set `{w : alpha_2(w) < delta <= alpha_2(w^-)}`.

use crate::error::{Error, Result};
use crate::model::GifsModel;
use crate::oracles::pressure::WordShape;
use crate::projection::TauPair;

pub const WORD_BUDGET: usize = 10_000_000;

pub fn stopping_set_sum(model: &GifsModel, tau: &TauPair, s: f64, q: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
    }
    let mut visited = 0usize;
    let mut total = 0.0;
    let mut stack: Vec<WordShape> = (0..model.num_edges()).map(|e| WordShape::start(model, e)).collect();
    while let Some(w) = stack.pop() {
        visited += 1;
        if visited > WORD_BUDGET {
            return Err(Error::BudgetExceeded(format!("stopping set at delta={delta} exceeds {WORD_BUDGET} words")));
        }
        if w.alpha2() < delta {
            total += w.phi(model, tau, s, q);
        } else {
            stack.extend(model.out_edges[model.edges[w.last].to].iter().map(|&e| w.push(model, e)));
        }
    }
    Ok(total)
}
