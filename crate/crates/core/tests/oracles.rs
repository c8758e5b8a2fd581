mod common;

use approx::{assert_abs_diff_eq, assert_relative_eq};
use boxlike::oracles::pressure::hat_word_states;
use boxlike::oracles::{
    box_count_tau, dyadic_deltas, gamma_pressure, pressure, pressure_bruteforce, stopping_set_sum,
    variational_tau_ifs, MeshAccumulator,
};
use boxlike::{tau_at, Error, GifsModel};
use common::*;
use num_bigint::BigUint;

const GOLDEN: f64 = -0.828_144_490_757_274_6;
const SAMPLES: usize = 400_000;

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `||A_k||^{1/k}` for SYS1 in closed form: words with `i` copies of map 1
/// have `c = (3/4)^i (1/4)^{k-i}`, `d = (1/4)^i (3/4)^{k-i}`, and both
/// projections carry the spectrum `s(q)`.
fn sys1_pressure(s: f64, q: f64, k: u64) -> f64 {
    let tau = sys1_s(q);
    let total: f64 = (0..=k)
        .map(|i| {
            let c = 0.75f64.powi(i as i32) * 0.25f64.powi((k - i) as i32);
            let d = 0.25f64.powi(i as i32) * 0.75f64.powi((k - i) as i32);
            binom(k, i) * 0.5f64.powf(q * k as f64) * c.max(d).powf(tau) * c.min(d).powf(s - tau)
        })
        .sum();
    total.powf(1.0 / k as f64)
}

fn admissible_words(model: &GifsModel, k: usize) -> u64 {
    let mut ending: Vec<u64> = vec![1; model.num_edges()];
    for _ in 1..k {
        let mut next = vec![0u64; model.num_edges()];
        for (e, &n) in ending.iter().enumerate() {
            for &e2 in &model.out_edges[model.edges[e].to] {
                next[e2] += n;
            }
        }
        ending = next;
    }
    ending.iter().sum()
}

#[test]
fn pressure_sys2_is_one() {
    let m = sys2();
    for q in [0.0, 0.5, 2.0, 3.0] {
        let tau = tau_at(&m, q).unwrap();
        for k in [1, 5, 12] {
            assert_abs_diff_eq!(pressure(&m, &tau, 1.0 - q, q, k).unwrap(), 1.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn pressure_sys1_matches_binomial_sum() {
    let m = sys1();
    for q in [0.0, 2.0] {
        let tau = tau_at(&m, q).unwrap();
        for k in [4u64, 10, 16] {
            for s in [-1.0, GOLDEN, 0.5, 1.0] {
                let p = pressure(&m, &tau, s, q, k as usize).unwrap();
                assert_relative_eq!(p, sys1_pressure(s, q, k), max_relative = 1e-10);
            }
        }
    }
}

#[test]
fn pressure_sys1_at_gamma_depth16() {
    // finite depth converges like k^{-1/(2k)}, so depth 16 sits near 0.951
    let m = sys1();
    let tau = tau_at(&m, 2.0).unwrap();
    let p16 = pressure(&m, &tau, GOLDEN, 2.0, 16).unwrap();
    assert_abs_diff_eq!(p16, 0.951_253_430_580, epsilon = 1e-9);
    let p24 = pressure(&m, &tau, GOLDEN, 2.0, 24).unwrap();
    assert!(p16 < p24 && p24 < 1.0);
}

#[test]
fn pressure_large_s_is_small() {
    for model in [sys1(), mixed2(), diag2()] {
        let tau = tau_at(&model, 2.0).unwrap();
        assert!(pressure(&model, &tau, 64.0, 2.0, 8).unwrap() < 1.0);
    }
}

#[test]
fn dp_matches_enumeration() {
    for model in [sys1(), sys1_rot(), mixed2(), diag2()] {
        for q in [0.0, 1.5, 3.0] {
            let tau = tau_at(&model, q).unwrap();
            for k in [1, 3, 7, 10] {
                for s in [-1.5, 0.3, 1.2] {
                    let dp = pressure(&model, &tau, s, q, k).unwrap();
                    let bf = pressure_bruteforce(&model, &tau, s, q, k).unwrap();
                    assert_relative_eq!(dp, bf, max_relative = 1e-12);
                }
            }
        }
    }
}

#[test]
fn states_count_two_hat_words_per_word() {
    for model in [sys1(), mixed2(), diag2()] {
        for k in 1..=8 {
            let states = hat_word_states(&model, k).unwrap();
            let total: BigUint = states.iter().map(|s| &s.multiplicity).sum();
            assert_eq!(total, BigUint::from(2 * admissible_words(&model, k)));
            assert!(states.iter().all(|s| s.counts.iter().sum::<u32>() as usize == k));
        }
    }
}

#[test]
fn gamma_pressure_values() {
    let e = gamma_pressure(&sys2(), &tau_at(&sys2(), 2.0).unwrap(), 2.0, 12).unwrap();
    assert_abs_diff_eq!(e.estimate, -1.0, epsilon = 1e-10);

    let m = sys1();
    let e = gamma_pressure(&m, &tau_at(&m, 2.0).unwrap(), 2.0, 20).unwrap();
    assert_abs_diff_eq!(e.estimate, GOLDEN, epsilon = 0.05);
    assert!(e.lower <= GOLDEN && GOLDEN <= e.upper);

    let e = gamma_pressure(&m, &tau_at(&m, 0.0).unwrap(), 0.0, 20).unwrap();
    assert_abs_diff_eq!(e.estimate, 1.0, epsilon = 0.02);
    assert!(e.lower <= 1.0 && 1.0 <= e.upper);
}

#[test]
fn gamma_pressure_converges_in_depth() {
    let m = sys1();
    for q in [0.0, 2.0] {
        let tau = tau_at(&m, q).unwrap();
        let errs: Vec<f64> = [8, 12, 16, 20]
            .iter()
            .map(|&k| (gamma_pressure(&m, &tau, q, k).unwrap().estimate - sys1_gamma(q)).abs())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }
}

#[test]
fn gamma_pressure_needs_depth_two() {
    let m = sys1();
    assert!(gamma_pressure(&m, &tau_at(&m, 2.0).unwrap(), 2.0, 1).is_err());
}

#[test]
fn stopping_set_sys2() {
    let m = sys2();
    for q in [0.0, 2.0] {
        let tau = tau_at(&m, q).unwrap();
        assert_abs_diff_eq!(stopping_set_sum(&m, &tau, 1.0 - q, q, 0.125).unwrap(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn stopping_set_sys1_bounds() {
    let m = sys1();
    let tau = tau_at(&m, 2.0).unwrap();
    let above: Vec<f64> =
        (4..=10).map(|j| stopping_set_sum(&m, &tau, GOLDEN + 0.2, 2.0, 2f64.powi(-j)).unwrap()).collect();
    assert!(above.windows(2).all(|w| w[1] <= w[0]), "{above:?}");
    assert!(above[0] < 1.0);
    let below: Vec<f64> =
        (4..=10).map(|j| stopping_set_sum(&m, &tau, GOLDEN - 0.2, 2.0, 2f64.powi(-j)).unwrap()).collect();
    assert!(below.iter().all(|&v| v > 1.0), "{below:?}");
}

#[test]
fn stopping_set_rejects_bad_delta() {
    let m = sys1();
    let tau = tau_at(&m, 2.0).unwrap();
    assert!(matches!(stopping_set_sum(&m, &tau, 0.0, 2.0, 0.0), Err(Error::InvalidArgument(_))));
}

#[test]
fn mesh_accumulator_counts() {
    let pts = [(0.1, 0.1), (0.2, 0.2), (0.6, 0.1), (0.9, 0.9)];
    let acc = MeshAccumulator::from_points(&pts, 0.5);
    assert_eq!(acc.total, 4);
    assert_eq!(acc.counts.iter().map(|c| c.1).sum::<u32>(), 4);
    assert_eq!(acc.counts.len(), 3);
    assert_abs_diff_eq!(acc.moment(0.0), 3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(acc.moment(2.0), 0.25 + 0.0625 + 0.0625, epsilon = 1e-15);
}

#[test]
fn box_count_values() {
    let deltas = dyadic_deltas(4, 10);
    assert_eq!(deltas.len(), 7);
    let b = box_count_tau(&sys2(), 0, 0.0, &deltas, SAMPLES, 1).unwrap();
    assert_abs_diff_eq!(b.tau, 1.0, epsilon = 0.05);
    assert_eq!(b.per_delta.len(), 7);
    for model in [sys1(), sys1_rot()] {
        let b = box_count_tau(&model, 0, 2.0, &deltas, SAMPLES, 1).unwrap();
        assert_abs_diff_eq!(b.tau, GOLDEN, epsilon = 0.1);
    }
}

#[test]
fn box_count_at_q1_is_flat() {
    let deltas = dyadic_deltas(4, 10);
    for model in [sys1(), mixed2(), mcmullen()] {
        let b = box_count_tau(&model, 0, 1.0, &deltas, SAMPLES, 2).unwrap();
        assert_abs_diff_eq!(b.tau, 0.0, epsilon = 0.05);
    }
}

#[test]
fn box_count_is_reproducible() {
    let deltas = dyadic_deltas(4, 8);
    let a = box_count_tau(&mixed2(), 1, 2.0, &deltas, 50_000, 9).unwrap();
    let b = box_count_tau(&mixed2(), 1, 2.0, &deltas, 50_000, 9).unwrap();
    assert_eq!(a, b);
}

#[test]
fn variational_values() {
    assert_abs_diff_eq!(variational_tau_ifs(&sys1(), 2.0).unwrap(), GOLDEN, epsilon = 1e-9);
    assert_abs_diff_eq!(variational_tau_ifs(&sys2(), 3.0).unwrap(), -2.0, epsilon = 1e-9);
    assert_abs_diff_eq!(variational_tau_ifs(&sys1(), 0.5).unwrap(), sys1_s(0.5), epsilon = 1e-9);
    assert!(matches!(variational_tau_ifs(&diag2(), 2.0), Err(Error::NotSingleVertex)));
    assert!(matches!(variational_tau_ifs(&sys1_rot(), 2.0), Err(Error::NotDiagonalSystem)));
}

#[test]
fn pressure_bracket_covers_closed_form() {
    for model in [sys1(), sys1_rot(), mixed2(), diag2(), mcmullen()] {
        for q in [0.0, 0.5, 2.0, 3.0] {
            let tau = tau_at(&model, q).unwrap();
            let g = boxlike::spectrum::gamma(&model, q).unwrap();
            for k in [8, 12, 16] {
                let e = gamma_pressure(&model, &tau, q, k).unwrap();
                assert!(e.lower - 1e-9 <= g && g <= e.upper + 1e-9, "q={q} k={k} gamma={g} {e:?}");
            }
        }
    }
}
