//! Grid scans, sign-change bisection and golden-section refinement on an interval.

use crate::error::Result;

const X_TOL: f64 = 1e-12;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Bisects a sign change of `f` on `[lo, hi]` given the endpoint values.
pub fn bisect_sign(mut lo: f64, mut hi: f64, mut f_lo: f64, f: &dyn Fn(f64) -> Result<f64>) -> Result<f64> {
    while hi - lo > X_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All sign changes of `phi` on an `n`-cell grid over `[lo, hi]`, each refined by bisection.
pub fn sign_change_roots(lo: f64, hi: f64, n: usize, phi: &dyn Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    let xs = grid(lo, hi, n);
    let vals = xs.iter().map(|&x| phi(x)).collect::<Result<Vec<f64>>>()?;
    let mut roots = Vec::new();
    for i in 0..n {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            roots.push(xs[i]);
        } else if b != 0.0 && (a < 0.0) != (b < 0.0) {
            roots.push(bisect_sign(xs[i], xs[i + 1], a, phi)?);
        }
    }
    if vals[n] == 0.0 {
        roots.push(xs[n]);
    }
    Ok(roots)
}

/// Minimum of `f` over `[lo, hi]`: grid scan, then golden-section search around the best cell.
pub fn convex_grid_min(lo: f64, hi: f64, n: usize, f: &dyn Fn(f64) -> Result<f64>) -> Result<f64> {
    let xs = grid(lo, hi, n);
    let vals = xs.iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    let k = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut a = xs[k.saturating_sub(1)];
    let mut b = xs[(k + 1).min(n)];
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut best = vals[k].min(fc).min(fd);
    for _ in 0..200 {
        if b - a <= X_TOL {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
            best = best.min(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
            best = best.min(fd);
        }
    }
    Ok(best)
}
