//! Acceptance checks. Prints one PASS/FAIL line per criterion with the
//! tolerance it was held to, and exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use gbs_core::agnostic::{disagreement_region, runoff, true_risk, SamplingMeasure};
use gbs_core::bench::stats::Z95;
use gbs_core::bench::{cmd_montecarlo, BoundReport, ExperimentConfig};
use gbs_core::geometry::{
    coherence, epsilon0, gbs_query_bound, gbs_rate, is_k_neighborly, minimal_k, moments, ngbs_repetitions, sgbs_rate,
    NeighborGraph, DEFAULT_TOLERANCE,
};
use gbs_core::oracle::{NoiseSpec, SimulatedOracle, Truth};
use gbs_core::rng::{stream, Purpose};
use gbs_core::search::{expected_cn_ratio, Posterior, QueryRule};
use gbs_core::space::{build_halfspaces, build_intervals, build_thresholds, disjoint_intervals, HalfspaceParams};
use gbs_core::HypothesisSpace;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn montecarlo(config: Value, dir: &Path) -> Result<BoundReport, String> {
    let config = ExperimentConfig::from_json(&config.to_string()).map_err(|e| e.to_string())?;
    cmd_montecarlo(config, dir).map_err(|e| e.to_string())
}

/// Binomial standard deviation of a frequency estimated from `trials` runs
/// at rate `p` (clamped to a probability).
fn sigma(p: f64, trials: usize) -> f64 {
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / trials as f64).sqrt()
}

fn three_point() -> HypothesisSpace {
    let mut rows = Vec::new();
    for i in 0..3 {
        let plus: Vec<i8> = (0..3).map(|j| if i == j { 1 } else { -1 }).collect();
        rows.push(plus.iter().map(|v| -v).collect());
        rows.push(plus);
    }
    HypothesisSpace::from_matrix(&rows).unwrap()
}

fn random_intervals(n: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    // 2n distinct endpoints, paired at random.
    let mut ends: Vec<f64> = (0..2 * n).map(|_| rng.gen::<f64>()).collect();
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    assert_eq!(ends.len(), 2 * n);
    let mut order: Vec<usize> = (0..2 * n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
    order.chunks(2).map(|c| (ends[c[0].min(c[1])], ends[c[0].max(c[1])])).collect()
}

/// Smallest k whose k-neighbor graph is connected, from the raw sign rows:
/// Hamming distance between cell columns with each complement pair counted
/// once, and a union-find sweep over every k.
fn oracle_minimal_k(space: &HypothesisSpace) -> usize {
    let n = space.n_hypotheses();
    let m = space.n_cells();
    let rows: Vec<Vec<i8>> = (0..n).map(|h| (0..m).map(|a| space.value(h, a)).collect()).collect();
    let complement = |h: usize| (0..n).find(|&g| rows[g].iter().zip(&rows[h]).all(|(x, y)| *x == -*y));
    let degree = |a: usize, b: usize| {
        let differ: Vec<usize> = (0..n).filter(|&h| rows[h][a] != rows[h][b]).collect();
        differ.iter().filter(|&&h| !matches!(complement(h), Some(g) if g < h && differ.contains(&g))).count()
    };
    for k in 1..=n {
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for a in 0..m {
            for b in a + 1..m {
                if degree(a, b) <= k {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let root = find(&mut parent, 0);
        if (0..m).all(|a| find(&mut parent, a) == root) {
            return k;
        }
    }
    n
}

fn c1_binary_search() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let report = montecarlo(
        json!({"family": {"kind": "thresholds", "n": 64}, "algorithm": "gbs", "truth": {"kind": "exhaustive"}}),
        dir.path(),
    )?;
    let trials = std::fs::read_to_string(dir.path().join("trials.csv")).map_err(|e| e.to_string())?;
    let mut runs = 0;
    for line in trials.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        ensure(f[3] == "1" && f[4] == "6", || format!("truth {} took {} queries, success {}", f[1], f[4], f[3]))?;
        runs += 1;
    }
    ensure(runs == 64 && report.runs == 64, || format!("{runs} runs"))?;
    Ok("64/64 truths identified in exactly 6 queries".into())
}

fn c2_coherence() -> Check {
    let thresholds = coherence(&build_thresholds(32).unwrap(), DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
    ensure(thresholds.c_star <= 1e-9, || format!("thresholds c* = {:e}", thresholds.c_star))?;
    let disjoint = coherence(&disjoint_intervals(10).unwrap(), DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
    ensure((disjoint.c_star - 0.8).abs() <= 1e-6, || format!("disjoint c* = {}", disjoint.c_star))?;
    for (name, space, cert) in [
        ("thresholds", build_thresholds(32).unwrap(), &thresholds),
        ("disjoint", disjoint_intervals(10).unwrap(), &disjoint),
    ] {
        let total: f64 = cert.p.iter().sum();
        ensure(cert.p.iter().all(|&v| v >= 0.0) && (total - 1.0).abs() <= 1e-12, || format!("{name}: P is not a distribution"))?;
        let worst = moments(&space, &cert.p).into_iter().fold(0.0, f64::max);
        ensure((worst - cert.c_star).abs() <= 1e-9, || format!("{name}: max moment {worst} vs c* {}", cert.c_star))?;
        ensure(cert.residual <= 1e-9, || format!("{name}: duality residual {:e}", cert.residual))?;
    }
    Ok(format!(
        "thresholds-32 c* = {:.1e} (<= 1e-9); disjoint-10 c* = {:.12} (|c*-0.8| = {:.1e} <= 1e-6); certificates re-verified to 1e-9",
        thresholds.c_star,
        disjoint.c_star,
        (disjoint.c_star - 0.8).abs()
    ))
}

fn c3_neighborliness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut spaces: Vec<(String, HypothesisSpace)> = Vec::new();
    for n in [1, 2, 5, 20] {
        spaces.push((format!("thresholds-{n}"), build_thresholds(n).unwrap()));
    }
    for n in [2, 4, 8, 12] {
        for _ in 0..5 {
            spaces.push((format!("intervals-{n}"), build_intervals(&random_intervals(n, &mut rng)).unwrap()));
        }
    }
    for n in 1..=6 {
        for _ in 0..10 {
            let params = HalfspaceParams::random(n, 2, 1.0, false, &mut rng);
            spaces.push((format!("halfspaces-d2-{n}"), build_halfspaces(&params).map_err(|e| e.to_string())?));
        }
    }
    for (name, space) in &spaces {
        let k = minimal_k(space);
        let oracle = oracle_minimal_k(space);
        ensure(k == 1 && oracle == 1, || format!("{name}: minimal_k {k}, oracle {oracle}"))?;
    }
    let tp = three_point();
    let oracle = oracle_minimal_k(&tp);
    ensure(!is_k_neighborly(&tp, 1), || "three-point example is 1-neighborly".into())?;
    ensure(is_k_neighborly(&tp, oracle) && minimal_k(&tp) == oracle, || {
        format!("three-point: minimal_k {} vs oracle {oracle}", minimal_k(&tp))
    })?;
    Ok(format!(
        "{} spaces 1-neighborly (thresholds, intervals, d=2 halfspaces N<=6); three-point example not 1-neighborly, minimal_k = oracle = {oracle}",
        spaces.len()
    ))
}

fn c4_cell_counts() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for (n, expected) in [(3, 7), (4, 11), (5, 16)] {
        for rep in 0..20 {
            let params = HalfspaceParams::random(n, 2, 1.0, false, &mut rng);
            let space = build_halfspaces(&params).map_err(|e| e.to_string())?;
            ensure(space.n_cells() == expected, || format!("N={n} arrangement {rep}: {} cells", space.n_cells()))?;

            // Sign vectors of a uniform cloud, plus a point on the bisector of
            // each of the four sectors at every vertex. Every cell of a line
            // arrangement has a vertex, and near-parallel lines make sectors
            // far too thin for the uniform cloud.
            let mut points: Vec<Vec<f64>> =
                (0..20_000).map(|_| vec![rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)]).collect();
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = (&params.normals[i], &params.normals[j]);
                    let det = a[0] * b[1] - a[1] * b[0];
                    // a.x + b_i = 0 for both lines.
                    let (ri, rj) = (-params.offsets[i], -params.offsets[j]);
                    let v = [(ri * b[1] - rj * a[1]) / det, (a[0] * rj - b[0] * ri) / det];
                    let radius = (0..n)
                        .filter(|&h| h != i && h != j)
                        .map(|h| (params.normals[h][0] * v[0] + params.normals[h][1] * v[1] + params.offsets[h]).abs())
                        .fold(1.0f64, f64::min)
                        / 2.0;
                    let mut angles: Vec<f64> = [a, b]
                        .iter()
                        .flat_map(|w| {
                            let t = (-w[0]).atan2(w[1]);
                            [t.rem_euclid(std::f64::consts::TAU), (t + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)]
                        })
                        .collect();
                    angles.sort_by(f64::total_cmp);
                    for s in 0..4 {
                        let next = if s == 3 { angles[0] + std::f64::consts::TAU } else { angles[s + 1] };
                        let th = (angles[s] + next) / 2.0;
                        points.push(vec![v[0] + radius * th.cos(), v[1] + radius * th.sin()]);
                    }
                }
            }
            let cloud: BTreeSet<Vec<i8>> =
                points.iter().map(|x| (0..n).map(|h| params.evaluate(h, x).value()).collect()).collect();
            let built: BTreeSet<Vec<i8>> = (0..space.n_cells()).map(|a| space.matrix().column(a)).collect();
            ensure(cloud == built, || format!("N={n} arrangement {rep}: cloud finds {} sign vectors, builder {}", cloud.len(), built.len()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} arrangements: cell counts exactly 7/11/16, sign vectors equal to the point-cloud enumeration"))
}

fn c5_query_ceiling() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rects: Vec<Vec<(f64, f64)>> = (0..10)
        .map(|_| {
            (0..2)
                .map(|_| {
                    let (a, b) = (rng.gen::<f64>(), rng.gen::<f64>());
                    (a.min(b), a.max(b))
                })
                .collect()
        })
        .collect();
    let pool: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let families = vec![
        json!({"kind": "thresholds", "n": 1}),
        json!({"kind": "thresholds", "n": 2}),
        json!({"kind": "thresholds", "n": 7}),
        json!({"kind": "thresholds", "n": 64}),
        json!({"kind": "thresholds", "n": 200}),
        json!({"kind": "intervals", "bounds": random_intervals(40, &mut rng)}),
        json!({"kind": "disjoint_intervals", "n": 50}),
        json!({"kind": "grid_intervals", "k": 12}),
        json!({"kind": "random_halfspaces", "n": 20, "d": 2, "b_max": 0.5, "seed": 1}),
        json!({"kind": "random_halfspaces", "n": 16, "d": 2, "through_origin": true, "seed": 2}),
        json!({"kind": "random_halfspaces", "n": 10, "d": 3, "b_max": 0.5, "seed": 3}),
        json!({"kind": "random_halfspaces", "n": 10, "d": 3, "b_max": 0.5, "cube": 1.0, "seed": 4}),
        json!({"kind": "rectangles", "rects": rects}),
        json!({"kind": "rectangles", "rects": rects, "include_complements": true}),
        json!({"kind": "matrix", "rows": [[-1,1,1],[1,-1,-1],[1,-1,1],[-1,1,-1],[1,1,-1],[-1,-1,1]]}),
        json!({"kind": "pooled", "base": {"kind": "random_halfspaces", "n": 12, "d": 2, "b_max": 0.5, "seed": 5}, "points": pool}),
    ];
    let (mut runs, mut vacuous) = (0, 0);
    for family in families {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let kind = family["kind"].as_str().unwrap_or("").to_owned();
        let config = json!({"family": family, "algorithm": "gbs", "truth": {"kind": "exhaustive"}, "trials": 3, "seed": 5});
        let parsed = ExperimentConfig::from_json(&config.to_string()).map_err(|e| e.to_string())?;
        let space = parsed.build_space().map_err(|e| e.to_string())?;
        let c = coherence(&space, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?.c_star;
        let k = minimal_k(&space);
        let report = montecarlo(config, dir.path())?;
        let failures = report.rows[0].failures.unwrap_or(usize::MAX);
        if c >= 1.0 {
            // A constant hypothesis makes the rate 1 and the ceiling infinite;
            // only identification is checked.
            ensure(failures == 0, || format!("{kind}: {failures} failed runs"))?;
            vacuous += 1;
        } else {
            let ceiling = gbs_rate(c, k)
                .and_then(|l| gbs_query_bound(space.n_hypotheses(), l))
                .map_err(|e| format!("{kind} (N={}): {e}", space.n_hypotheses()))?;
            let max = report.queries.as_ref().map_or(0, |q| q.max);
            ensure(report.pass && max <= ceiling, || {
                format!("{kind} (N={}): max {max} queries vs ceiling {ceiling}, rows {:?}", space.n_hypotheses(), report.rows)
            })?;
        }
        runs += report.runs;
    }
    Ok(format!(
        "16 family instances, {runs} runs (3 per truth, random ties): every run correct and within its ceiling ({vacuous} with c* = 1, ceiling infinite)"
    ))
}

fn c6_supermartingale() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = f64::NEG_INFINITY;
    let mut strict_checked = 0;
    for sample in 0..1000 {
        let space = match sample % 4 {
            0 => build_thresholds(rng.gen_range(2..=24)).unwrap(),
            1 => build_halfspaces(&HalfspaceParams::random(rng.gen_range(2..=8), 2, 0.8, false, &mut rng)).unwrap(),
            2 => build_intervals(&random_intervals(rng.gen_range(2..=8), &mut rng)).unwrap(),
            _ => loop {
                let (n, m) = (rng.gen_range(2..=10), rng.gen_range(2..=8));
                let rows: Vec<Vec<i8>> = (0..n).map(|_| (0..m).map(|_| if rng.gen() { 1 } else { -1 }).collect()).collect();
                if let Ok(s) = HypothesisSpace::from_matrix(&rows) {
                    break s;
                }
            },
        };
        let n = space.n_hypotheses();
        if n < 2 {
            continue;
        }
        let weights: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(-6.0..0.0))).collect();
        let posterior = Posterior::from_weights(&weights).map_err(|e| e.to_string())?;
        let truth = rng.gen_range(0..n);
        let alpha = rng.gen_range(0.0..0.49);
        let beta = rng.gen_range(alpha..0.49);
        let pairs = NeighborGraph::new(&space).one_neighbor_pairs();
        let rule = if sample % 2 == 0 { QueryRule::Plain } else { QueryRule::Modified { one_neighbors: &pairs } };
        let ratio = expected_cn_ratio(&posterior, &space, truth, rule, alpha, beta).map_err(|e| e.to_string())?;
        worst = worst.max(ratio);
        ensure(ratio <= 1.0 + 1e-12, || format!("sample {sample}: ratio {ratio} at alpha {alpha}, beta {beta}"))?;
        if beta - alpha >= 0.01 {
            strict_checked += 1;
            ensure(ratio < 1.0, || format!("sample {sample}: ratio {ratio} not < 1 with beta - alpha = {}", beta - alpha))?;
        }
    }
    Ok(format!(
        "1000 triples over thresholds, intervals, halfspaces and random matrices: max E[C'/C] = {worst:.6} (<= 1 + 1e-12); {strict_checked} with beta - alpha >= 0.01 all < 1"
    ))
}

fn c7_error_decay() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let checkpoints: Vec<usize> = (1..=10).map(|i| 10 * i).collect();
    let report = montecarlo(
        json!({
            "family": {"kind": "random_halfspaces", "n": 16, "d": 2, "through_origin": true, "seed": 7},
            "algorithm": "msgbs",
            "noise": {"mode": "constant", "alpha": 0.1},
            "beta": 0.3,
            "checkpoints": checkpoints,
            "trials": 2000,
            "seed": 7,
            "bound": "error_decay"
        }),
        dir.path(),
    )?;
    let lambda = epsilon0(0.1, 0.3).map_err(|e| e.to_string())? / 4.0;
    let reported = report.constants.get("lambda_sgbs").and_then(Value::as_f64).unwrap_or(f64::NAN);
    ensure((reported - lambda).abs() <= 1e-12, || format!("report lambda {reported} vs eps0/4 = {lambda}"))?;
    let mut worst = 0.0f64;
    for row in &report.rows {
        let bound = 16.0 * (1.0 - lambda).powi(row.n as i32);
        ensure(row.lower <= bound, || format!("n={}: Wilson lower {} > bound {bound}", row.n, row.lower))?;
        worst = worst.max(row.lower / bound);
    }
    ensure(report.rows.len() == 10, || format!("{} rows", report.rows.len()))?;
    let last = report.rows.last().unwrap();
    Ok(format!(
        "lambda = eps0/4 = {lambda:.6}; 10 checkpoints, max lower/bound = {worst:.3}; error at n=100: {:.4} vs bound {:.4}",
        last.estimate,
        16.0 * (1.0 - lambda).powi(100)
    ))
}

fn c8_repetition() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (delta, alpha, trials) = (0.05, 0.2, 2000);
    let r = ngbs_repetitions(6, delta, alpha).map_err(|e| e.to_string())?;
    let report = montecarlo(
        json!({
            "family": {"kind": "thresholds", "n": 64},
            "algorithm": "ngbs",
            "noise": {"mode": "constant", "alpha": alpha},
            "delta": delta,
            "n0": 6,
            "trials": trials,
            "seed": 8
        }),
        dir.path(),
    )?;
    ensure(report.constants.get("repetitions").and_then(Value::as_u64) == Some(r as u64), || "repetition count differs".into())?;
    let row = &report.rows[0];
    let limit = delta + 3.0 * sigma(delta, trials);
    ensure(row.estimate <= limit, || format!("failure rate {} > {limit}", row.estimate))?;
    Ok(format!("R = {r}; failure rate {:.4} <= delta + 3 sigma = {limit:.4} over {trials} trials", row.estimate))
}

fn c9_runoff() -> Check {
    let space = build_thresholds(8).unwrap();
    let (h1, h2, alpha, trials) = (2, 6, 0.2, 5000);
    let px = SamplingMeasure::uniform(space.n_cells());
    let region = disagreement_region(&space, h1, h2, &px);
    let restricted = region.restricted.ok_or("empty disagreement region")?;
    let truth = space.hypothesis_labels(h1);
    let noise = NoiseSpec::constant(alpha);
    let gap = true_risk(&space, h2, &restricted, &truth, &noise) - true_risk(&space, h1, &restricted, &truth, &noise);
    ensure((gap - 0.6).abs() <= 1e-12, || format!("restricted risk gap {gap}"))?;
    let mut parts = Vec::new();
    for (i, m) in [10usize, 30, 100].into_iter().enumerate() {
        let wrong = (0..trials)
            .into_par_iter()
            .map(|t| {
                let seed = 900 + i as u64;
                let mut oracle = SimulatedOracle::new(&space, &Truth::Hypothesis(h1), noise.clone(), stream(seed, t, Purpose::Oracle))
                    .map_err(|e| e.to_string())?;
                let mut rng = stream(seed, t, Purpose::Algorithm);
                let out = runoff(&space, &mut oracle, h1, h2, &px, m, &mut rng).map_err(|e| e.to_string())?;
                Ok(usize::from(out.choice == h2))
            })
            .collect::<Result<Vec<usize>, String>>()?
            .into_iter()
            .sum::<usize>();
        let freq = wrong as f64 / trials as f64;
        // Constant 2 as derived in the proof; the stated bound omits it.
        let bound = 2.0 * (-(m as f64) * gap * gap / 2.0).exp();
        let limit = bound + 3.0 * sigma(bound, trials as usize);
        ensure(freq <= limit, || format!("m={m}: wrong-pick frequency {freq} > {limit}"))?;
        parts.push(format!("m={m}: {freq:.4} <= {limit:.2e}"));
    }
    Ok(format!("gap 0.6, {trials} trials each; {}", parts.join("; ")))
}

fn c10_agnostic() -> Check {
    let budgets = [30usize, 90, 300];
    let trials = 2000;
    let held = tempfile::tempdir().map_err(|e| e.to_string())?;
    let report = montecarlo(
        json!({
            "family": {"kind": "grid_intervals", "k": 8},
            "algorithm": "agnostic",
            "noise": {"mode": "constant", "alpha": 0.1},
            "beta": 0.3,
            "truth": {"kind": "held_out"},
            "checkpoints": budgets,
            "trials": trials,
            "seed": 10,
            "bound": "agnostic"
        }),
        held.path(),
    )?;
    let mut parts = Vec::new();
    for row in report.rows.iter().filter(|r| r.check == "risk") {
        let bound = row.bound.ok_or("risk row without bound")?;
        let se = (row.upper - row.estimate) / Z95;
        ensure(row.estimate <= bound + 3.0 * se, || format!("held out, n={}: mean risk {} > {}", row.n, row.estimate, bound + 3.0 * se))?;
        parts.push(format!("n={}: {:.4} <= {:.4}", row.n, row.estimate, bound + 3.0 * se));
    }
    ensure(parts.len() == 3, || "missing risk rows".into())?;

    let member = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (alpha, beta, n) = (0.1, 0.3, 16.0);
    let report = montecarlo(
        json!({
            "family": {"kind": "thresholds", "n": 16},
            "algorithm": "agnostic",
            "noise": {"mode": "constant", "alpha": alpha},
            "beta": beta,
            "checkpoints": budgets,
            "trials": trials,
            "seed": 11,
            "bound": "agnostic"
        }),
        member.path(),
    )?;
    let c = coherence(&build_thresholds(16).unwrap(), DEFAULT_TOLERANCE).map_err(|e| e.to_string())?.c_star;
    let lambda = sgbs_rate(c, alpha, beta).map_err(|e| e.to_string())?;
    let failures: Vec<_> = report.rows.iter().filter(|r| r.check == "failure").collect();
    ensure(failures.len() == 3, || "missing failure rows".into())?;
    for row in failures {
        let nb = row.n as f64;
        let bound = n * (-lambda * nb / 3.0).exp() + 2.0 * (-nb * (1.0 - 2.0 * alpha).powi(2) / 6.0).exp();
        let limit = bound + 3.0 * sigma(bound, trials);
        ensure(row.estimate <= limit, || format!("member truth, n={}: failure {} > {limit}", row.n, row.estimate))?;
        parts.push(format!("member n={}: failure {:.4} <= {:.2e}", row.n, row.estimate, limit));
    }
    Ok(format!("{trials} trials per budget; held out {}", parts.join("; ")))
}

fn c11_determinism() -> Check {
    let configs = [
        json!({"family": {"kind": "thresholds", "n": 37}, "algorithm": "gbs", "truth": {"kind": "exhaustive"}, "trials": 2, "seed": 1}),
        json!({"family": {"kind": "thresholds", "n": 64}, "algorithm": "ngbs", "noise": {"mode": "constant", "alpha": 0.2},
               "delta": 0.05, "trials": 200, "seed": 2}),
        json!({"family": {"kind": "random_halfspaces", "n": 16, "d": 2, "through_origin": true}, "algorithm": "msgbs",
               "noise": {"mode": "constant", "alpha": 0.1}, "beta": 0.3, "checkpoints": [10, 20, 40], "trials": 300, "seed": 3}),
        json!({"family": {"kind": "disjoint_intervals", "n": 10}, "algorithm": "sgbs", "noise": {"mode": "constant", "alpha": 0.05},
               "budget": 30, "checkpoints": [5, 30], "trials": 300, "seed": 4}),
        json!({"family": {"kind": "grid_intervals", "k": 6}, "algorithm": "agnostic", "noise": {"mode": "constant", "alpha": 0.1},
               "truth": {"kind": "held_out"}, "checkpoints": [12, 30], "trials": 100, "seed": 5}),
        json!({"family": {"kind": "thresholds", "n": 12}, "algorithm": "msgbs", "noise": {"mode": "constant", "alpha": 0.1},
               "budget": 10, "bound": "supermartingale", "trials": 300, "seed": 6}),
    ];
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let mut files = 0;
    for config in configs {
        let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
        montecarlo(config.clone(), a.path())?;
        serial.install(|| montecarlo(config.clone(), b.path()))?;
        let mut names: Vec<_> = std::fs::read_dir(a.path())
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok().map(|e| e.file_name()))
            .filter(|n| n.to_string_lossy().ends_with(".csv"))
            .collect();
        names.sort();
        ensure(!names.is_empty(), || "no CSV output".into())?;
        for name in names {
            let left = std::fs::read(a.path().join(&name)).map_err(|e| e.to_string())?;
            let right = std::fs::read(b.path().join(&name)).map_err(|e| e.to_string())?;
            ensure(left == right, || format!("{} differs for {}", name.to_string_lossy(), config["algorithm"]))?;
            files += 1;
        }
    }
    Ok(format!("6 configs run twice (parallel, then single-threaded): {files} CSV files byte-identical"))
}

fn main() {
    let criteria: [(usize, &str, Option<f64>, fn() -> Check); 11] = [
        (1, "binary search on 64 thresholds", Some(1.0), c1_binary_search),
        (2, "coherence values and certificates", Some(5.0), c2_coherence),
        (3, "neighborliness", None, c3_neighborliness),
        (4, "line arrangement cell counts", Some(10.0), c4_cell_counts),
        (5, "noiseless query ceiling", None, c5_query_ceiling),
        (6, "C_n supermartingale", None, c6_supermartingale),
        (7, "modified soft search error decay", Some(120.0), c7_error_decay),
        (8, "repetition-coded search failure rate", None, c8_repetition),
        (9, "runoff wrong-pick frequency", None, c9_runoff),
        (10, "agnostic risk and failure", None, c10_agnostic),
        (11, "determinism", None, c11_determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let timing = match limit {
            Some(l) => format!("{secs:.2} s, limit {l} s"),
            None => format!("{secs:.2} s"),
        };
        let result = match (result, limit) {
            (Ok(_), Some(l)) if secs >= l => Err(format!("took {secs:.2} s, limit {l} s")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} ({timing})"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {detail} ({timing})");
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
