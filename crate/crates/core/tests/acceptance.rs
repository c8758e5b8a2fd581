//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use boxlike::diagonal::{box_dimension_diagonal, gamma_ab, gamma_diagonal, gamma_ifs_diagonal, regime, Branch};
use boxlike::general::{box_dimension_general, build_g, build_h_ifs, gamma_general, hat_expand, hat_follows};
use boxlike::oracles::pressure::hat_word_states;
use boxlike::oracles::{box_count_many, dyadic_deltas, gamma_pressure, pressure, variational_tau_ifs};
use boxlike::spectral::spectral_radius;
use boxlike::spectrum::gamma;
use boxlike::{tau_at, GifsModel};
use common::{GenSpec, Kinds};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<f64, String> {
    let d = (got - want).abs();
    if d <= tol {
        Ok(d)
    } else {
        Err(format!("{label}: got {got:.12}, want {want:.12}, |diff| {d:.3e} > {tol:e}"))
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn time_limit(start: Instant, limit: Duration) -> Result<(), String> {
    let el = start.elapsed();
    if el <= limit {
        Ok(())
    } else {
        Err(format!("runtime {el:?} exceeds {limit:?}"))
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = common::sys1();
    let mut worst = 0.0f64;
    for q in [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0] {
        let g = gamma(&m, q).map_err(err)?;
        worst = worst.max(within(&format!("q={q}"), g, common::sys1_gamma(q), 1e-8)?);
    }
    // frozen: 2 ln 2 / ln(3/16)
    let g2 = gamma(&m, 2.0).map_err(err)?;
    within("gamma(2)", g2, -0.828_144_490_757_274_6, 1e-8)?;
    time_limit(start, Duration::from_secs(1))?;
    Ok(format!("max |diff| {worst:.2e}, gamma(2) = {g2:.9}, {:?}", start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (m, r) = (common::sys1(), common::sys1_rot());
    let mut worst = 0.0f64;
    for i in 0..13 {
        let q = 0.25 * i as f64;
        let (g, gr) = (gamma(&m, q).map_err(err)?, gamma(&r, q).map_err(err)?);
        worst = worst.max(within(&format!("q={q}"), gr, g, 1e-8)?);
    }
    time_limit(start, Duration::from_secs(1))?;
    Ok(format!("13 points, max |diff| {worst:.2e}, {:?}", start.elapsed()))
}

fn criterion_3() -> Outcome {
    let m = common::sys1();
    let tau = tau_at(&m, 2.0).map_err(err)?;
    let (g, br) = gamma_diagonal(&m, &tau, 2.0).map_err(err)?;
    if br.branch != Branch::B3 {
        return Err(format!("branch {} instead of b3", br.branch.label()));
    }
    let gap = br.gamma_a.min(br.gamma_b) - g;
    if gap < 0.09 {
        return Err(format!("gap {gap:.6} < 0.09"));
    }
    within("min(gamma_A, gamma_B)", br.gamma_a.min(br.gamma_b), common::sys1_s(2.0), 1e-8)?;
    Ok(format!("gamma {g:.6} vs min(gamma_A, gamma_B) {:.6}, gap {gap:.6}", br.gamma_a.min(br.gamma_b)))
}

fn criterion_4() -> Outcome {
    let d1 = box_dimension_diagonal(&common::sys1()).map_err(err)?;
    let d2 = box_dimension_general(&common::sys1_rot()).map_err(err)?;
    within("SYS1", d1, 1.0, 1e-10)?;
    within("SYS1'", d2, 1.0, 1e-10)?;
    Ok(format!("SYS1 {d1:.12}, SYS1' {d2:.12}"))
}

fn criterion_5() -> Outcome {
    let m = common::sys2();
    let mut worst_g = 0.0f64;
    let mut worst_p = 0.0f64;
    for i in 0..=16 {
        let q = 0.25 * i as f64;
        worst_g = worst_g.max(within(&format!("gamma q={q}"), gamma(&m, q).map_err(err)?, 1.0 - q, 1e-10)?);
        let tau = tau_at(&m, q).map_err(err)?;
        for k in 1..=12 {
            let p = pressure(&m, &tau, 1.0 - q, q, k).map_err(err)?;
            worst_p = worst_p.max(within(&format!("pressure q={q} k={k}"), p, 1.0, 1e-12)?);
        }
    }
    Ok(format!("gamma max |diff| {worst_g:.2e}, pressure max |P - 1| {worst_p:.2e}"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(6);
    let spec = GenSpec { max_vertices: 2, max_edges: 4, kinds: Kinds::Mixed };
    let deltas = dyadic_deltas(4, 10);
    let (mut wp, mut wb) = (0.0f64, 0.0f64);
    for i in 0..25u64 {
        let m = common::random_system(&mut rng, spec);
        let boxes = box_count_many(&m, 0, &[0.0, 2.0], &deltas, 1_000_000, 1000 + i).map_err(err)?;
        for (j, q) in [0.0, 2.0].into_iter().enumerate() {
            let g = gamma(&m, q).map_err(err)?;
            let tau = tau_at(&m, q).map_err(err)?;
            let gp = gamma_pressure(&m, &tau, q, 20).map_err(err)?.estimate;
            wp = wp.max(within(&format!("system {i} q={q} pressure"), gp, g, 0.05)?);
            wb = wb.max(within(&format!("system {i} q={q} box count"), boxes[j].tau, g, 0.1)?);
        }
    }
    time_limit(start, Duration::from_secs(300))?;
    Ok(format!("25 systems, max pressure diff {wp:.4}, max box-count diff {wb:.4}, {:?}", start.elapsed()))
}

fn criterion_7() -> Outcome {
    let mut rng = common::rng(7);
    let spec = GenSpec { max_vertices: 2, max_edges: 4, kinds: Kinds::Diagonal };
    let mut worst = 0.0f64;
    for i in 0..25 {
        let m = common::random_system(&mut rng, spec);
        for q in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let tau = tau_at(&m, q).map_err(err)?;
            let (gd, _) = gamma_diagonal(&m, &tau, q).map_err(|e| format!("system {i} q={q}: {e}"))?;
            let (gg, _) = gamma_general(&m, &tau, q).map_err(|e| format!("system {i} q={q}: {e}"))?;
            worst = worst.max(within(&format!("system {i} q={q}"), gg, gd, 1e-8)?);
        }
    }
    Ok(format!("25 systems x 5 q, max |diff| {worst:.2e}"))
}

fn criterion_8() -> Outcome {
    let mut rng = common::rng(8);
    let spec = GenSpec { max_vertices: 1, max_edges: 4, kinds: Kinds::Diagonal };
    let mut worst = 0.0f64;
    for i in 0..50 {
        let m = common::random_system(&mut rng, spec);
        for q in [0.0, 2.0, 3.0] {
            let v = variational_tau_ifs(&m, q).map_err(err)?;
            let g = gamma_ifs_diagonal(&m, q).map_err(err)?.gamma;
            worst = worst.max(within(&format!("IFS {i} q={q}"), v, g, 1e-6)?);
        }
    }
    Ok(format!("50 IFS x 3 q, max |diff| {worst:.2e}"))
}

fn convex_nonincreasing(m: &GifsModel, label: &str) -> Result<(), String> {
    let qs: Vec<f64> = (0..=16).map(|i| 0.25 * i as f64).collect();
    let gs = qs.iter().map(|&q| gamma(m, q)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    for w in gs.windows(2) {
        if w[1] > w[0] + 1e-9 {
            return Err(format!("{label}: gamma increases {:.9} -> {:.9}", w[0], w[1]));
        }
    }
    for w in gs.windows(3) {
        if w[0] - 2.0 * w[1] + w[2] < -1e-7 {
            return Err(format!("{label}: second difference {:.3e} < 0", w[0] - 2.0 * w[1] + w[2]));
        }
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    let mut rng = common::rng(9);
    let mut counts = [0usize; 6];
    for i in 0..100 {
        let kinds = if i % 2 == 0 { Kinds::Mixed } else { Kinds::Diagonal };
        let spec = GenSpec { max_vertices: if i % 4 < 2 { 2 } else { 1 }, max_edges: 4, kinds };
        let m = common::random_system(&mut rng, spec);
        let label = format!("instance {i}");
        let q: f64 = rng.gen_range(0.0..4.0);
        let tau = tau_at(&m, q).map_err(err)?;

        let (x, y): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let r1 = spectral_radius(&build_g(&m, &tau, q, x, y));
        let r2 = spectral_radius(&build_g(&m, &tau, q, y - tau.t, x + tau.t));
        within(&format!("{label} duality"), r2 / r1, 1.0, 1e-10)?;
        counts[0] += 1;

        if m.all_diagonal() {
            let (ga, gb) = gamma_ab(&m, &tau, q).map_err(err)?;
            regime(ga, gb, tau.t).map_err(|e| format!("{label} dichotomy: {e}"))?;
            counts[1] += 1;
        }

        within(&format!("{label} gamma(1)"), gamma(&m, 1.0).map_err(err)?, 0.0, 1e-10)?;
        counts[2] += 1;

        convex_nonincreasing(&m, &label)?;
        counts[3] += 1;

        let k = 6;
        let words = admissible_words(&m, k);
        for w in &words {
            let (h1, h2) = hat_expand(&m, w).map_err(err)?;
            let ok = |h: &[usize]| h.windows(2).all(|p| hat_follows(&m, p[0], p[1])) && h.iter().zip(w).all(|(a, b)| a / 2 == *b);
            if h1 == h2 || !ok(&h1) || !ok(&h2) {
                return Err(format!("{label}: word {w:?} does not lift to two hat-words"));
            }
        }
        let total: u64 = hat_word_states(&m, k)
            .map_err(err)?
            .iter()
            .map(|s| u64::try_from(&s.multiplicity).unwrap_or(u64::MAX))
            .sum();
        if total != 2 * words.len() as u64 {
            return Err(format!("{label}: {total} hat-words for {} words", words.len()));
        }
        counts[4] += 1;

        if m.num_vertices() == 1 {
            let h = build_h_ifs(&m, &tau, q, x, y).map_err(err)?;
            let g = build_g(&m, &tau, q, x, y);
            within(&format!("{label} rho(H)"), spectral_radius(&h) / spectral_radius(&g), 1.0, 1e-10)?;
            counts[5] += 1;
        }
    }
    Ok(format!(
        "duality {}, dichotomy {}, gamma(1) {}, monotone+convex {}, hat-word count {}, rho(H) {}",
        counts[0], counts[1], counts[2], counts[3], counts[4], counts[5]
    ))
}

fn admissible_words(m: &GifsModel, k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..m.num_edges()).map(|e| vec![e]).collect();
    for _ in 1..k {
        out = out
            .into_iter()
            .flat_map(|w| {
                let last = m.edges[*w.last().unwrap()].to;
                m.out_edges[last].iter().map(move |&e| {
                    let mut w2 = w.clone();
                    w2.push(e);
                    w2
                })
            })
            .collect();
    }
    out
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("golden piecewise formula (SYS1)", criterion_1),
        ("rotation equality (SYS1 vs SYS1')", criterion_2),
        ("strict b3 gap (SYS1, q=2)", criterion_3),
        ("box dimensions (SYS1, SYS1')", criterion_4),
        ("exact pressure (SYS2)", criterion_5),
        ("oracle agreement (25 random systems)", criterion_6),
        ("engine consistency (25 diagonal systems)", criterion_7),
        ("variational cross-check (50 IFS)", criterion_8),
        ("property suite (100 instances)", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
