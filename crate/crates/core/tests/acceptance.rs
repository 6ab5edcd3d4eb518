//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints exactly one `PASS`/`FAIL` line; the process exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use balanced_core::embedding::{
    embed, hyperplane_check, keep_top_coordinates, lipschitz_audit, pca_reduce, rank_correlation, separation_check,
    Embedding,
};
use balanced_core::exact::rational_to_f64;
use balanced_core::generators::{gen_erdos_renyi, gen_glued_paths, gen_swiss_roll, knn_graph, load_named};
use balanced_core::measure::{brute_force_balanced, transport_costs, OracleMode};
use balanced_core::pipeline::{greedy_balanced, PipelineConfig};
use balanced_core::{
    all_pairs_distances, boundary, is_balanced, isoperimetric_report, DistanceMatrix, GreedyState, RunConfig,
    VertexMeasure,
};
use num_rational::BigRational;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use common::{connected_graphs, fixtures, Fixture};

type Verdict = Result<String, String>;

const BALANCE_TOL: f64 = 1e-9;

/// Embeds `mu` and runs the three audits; returns a description of the
/// first failing audit.
fn audit(dist: &DistanceMatrix, mu: &VertexMeasure) -> Result<Embedding, String> {
    let emb = embed(dist, mu, BALANCE_TOL).map_err(|e| format!("embed: {e}"))?;
    let lip = lipschitz_audit(&emb, dist).map_err(|e| e.to_string())?;
    if lip.violation_count > 0 {
        return Err(format!("{} Lipschitz violations, worst pair {:?}", lip.violation_count, lip.worst_pair));
    }
    let hyp = hyperplane_check(&emb, dist).map_err(|e| e.to_string())?;
    if !hyp.satisfied {
        return Err(format!("hyperplane deviation {}", hyp.max_support_deviation));
    }
    let sep = separation_check(&emb, dist.diam());
    if !sep.satisfied {
        return Err(format!("separation {} below {}", sep.min_avg_linf, sep.bound));
    }
    Ok(emb)
}

fn criterion_1(fixtures: &[Fixture]) -> Verdict {
    let start = Instant::now();
    let mut audited = 0;
    let mut failures = Vec::new();
    for f in fixtures {
        let dist = all_pairs_distances(&f.graph).unwrap();
        let bset = boundary(&f.graph, &dist);
        let outcome = greedy_balanced(&dist, Some(&bset), &PipelineConfig::default()).unwrap();
        let mut measures = Vec::new();
        if outcome.balance.is_balanced {
            measures.push(outcome.measure);
        }
        let oracle = brute_force_balanced(&dist, OracleMode::Supports { max_size: 4 }).unwrap();
        measures.extend(oracle.into_iter().map(|o| o.measure));
        for mu in &measures {
            audited += 1;
            if let Err(e) = audit(&dist, mu) {
                failures.push(format!("{}: {e}", f.name));
            }
        }
    }
    let elapsed = start.elapsed();
    if !failures.is_empty() {
        return Err(format!("{} failing audits, first: {}", failures.len(), failures[0]));
    }
    if elapsed > Duration::from_secs(60) {
        return Err(format!("audits passed but took {elapsed:.1?} (limit 60s)"));
    }
    Ok(format!("{audited} balanced measures on {} fixtures audited in {elapsed:.1?}", fixtures.len()))
}

fn criterion_2(fixtures: &[Fixture]) -> Verdict {
    let mut failures = Vec::new();
    for f in fixtures {
        let dist = all_pairs_distances(&f.graph).unwrap();
        let mut state = GreedyState::new(&dist, &[0]).unwrap();
        let report = balanced_core::greedy::run(&mut state, &RunConfig::default()).unwrap();
        let diam = report.diam as f64;
        let gap = (report.max_transport - report.alpha_estimate).abs();
        if gap > 1e-2 * diam {
            failures.push(format!("{}: gap {gap} after {} steps", f.name, report.steps));
        }
        let alpha = report.alpha_estimate;
        if alpha < diam / 2.0 || alpha > diam + 1e-2 {
            failures.push(format!("{}: alpha {alpha} outside [{}, {}]", f.name, diam / 2.0, diam + 1e-2));
        }
    }
    if failures.is_empty() {
        Ok(format!("gap and alpha range hold on {} fixtures", fixtures.len()))
    } else {
        Err(failures.join("; "))
    }
}

const TRAJECTORY_STEPS: usize = 5000;

fn criterion_3(fixtures: &[Fixture]) -> Verdict {
    let mut failures = Vec::new();
    for (i, f) in fixtures.iter().enumerate() {
        let dist = all_pairs_distances(&f.graph).unwrap();
        let diam = dist.diam() as u128;
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let mut sampled = vec![false; TRAJECTORY_STEPS];
        for s in sample(&mut rng, TRAJECTORY_STEPS, 1000) {
            sampled[s] = true;
        }
        let mut state = GreedyState::new(&dist, &[0]).unwrap();
        for step in 0..TRAJECTORY_STEPS {
            let before_f = state.pair_sum();
            let before_s = state.sums().to_vec();
            let m = state.m() as u128;
            let x = state.greedy_step().unwrap();
            if state.pair_sum() != before_f + 2 * before_s[x] {
                failures.push(format!("{}: pair-sum recurrence broken at step {step}", f.name));
                break;
            }
            if sampled[step] {
                // |S'(v)/(m+1) - S(v)/m| <= diam/(m+1), cleared of denominators.
                let bad = state.sums().iter().zip(&before_s).position(|(&after, &before)| {
                    let lhs = (m * after as u128).abs_diff((m + 1) * before as u128);
                    lhs > diam * m
                });
                if let Some(v) = bad {
                    failures.push(format!("{}: continuity bound broken at step {step}, vertex {v}", f.name));
                    break;
                }
            }
        }
        let (sums, pair_sum) = state.recompute();
        if sums != state.sums() || pair_sum != state.pair_sum() {
            failures.push(format!("{}: incremental state drifted from recomputation", f.name));
        }
    }
    if failures.is_empty() {
        Ok(format!(
            "exact recurrence over {TRAJECTORY_STEPS} steps and continuity on 1000 sampled steps, {} fixtures",
            fixtures.len()
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn random_connected(n: usize, seed: u64) -> balanced_core::Graph {
    gen_erdos_renyi(n, 0.5, seed).unwrap()
}

fn criterion_4() -> Verdict {
    let mut graphs = Vec::new();
    for n in 2..=6 {
        for (i, g) in connected_graphs(n).into_iter().enumerate() {
            graphs.push((format!("n={n} class {i}"), g));
        }
    }
    let exhaustive = graphs.len();
    for i in 0..50u64 {
        let n = if i < 25 { 6 } else { 7 };
        graphs.push((format!("random n={n} seed={}", 1000 + i), random_connected(n, 1000 + i)));
    }
    let mut mismatches = Vec::new();
    let mut unbalanced = Vec::new();
    for (name, g) in &graphs {
        let dist = all_pairs_distances(g).unwrap();
        let grid = brute_force_balanced(&dist, OracleMode::Grid { resolution: 40 }).unwrap();
        let best: &BigRational = grid.iter().map(|o| &o.energy).max().unwrap();
        let best = rational_to_f64(best);
        let bset = boundary(g, &dist);
        let outcome = greedy_balanced(&dist, Some(&bset), &PipelineConfig::default()).unwrap();
        let alpha = outcome.convergence.alpha_estimate;
        if (best - alpha).abs() > 0.05 {
            mismatches.push(format!("{name}: grid max J {best:.4} vs greedy {alpha:.4}"));
        }
        if !is_balanced(&outcome.measure, &dist, BALANCE_TOL).unwrap().is_balanced {
            unbalanced.push(name.clone());
        }
    }
    let summary = format!(
        "{} graphs ({exhaustive} exhaustive with n<=6, 50 random with n in {{6,7}}): {} energy mismatches, {} unbalanced refinements",
        graphs.len(),
        mismatches.len(),
        unbalanced.len()
    );
    if mismatches.is_empty() && unbalanced.is_empty() {
        Ok(summary)
    } else {
        let first = mismatches.first().or(unbalanced.first()).unwrap();
        Err(format!("{summary}; first: {first}"))
    }
}

fn criterion_5() -> Verdict {
    let mut failures = Vec::new();
    for name in ["dodecahedral", "desargues"] {
        let g = load_named(name).unwrap();
        let dist = all_pairs_distances(&g).unwrap();
        let report = is_balanced(&VertexMeasure::uniform(g.n()).unwrap(), &dist, 0.0).unwrap();
        if !(report.is_balanced && report.exact) {
            failures.push(format!("{name}: uniform measure not exactly balanced"));
        }
    }
    let frucht = load_named("frucht").unwrap();
    let dist = all_pairs_distances(&frucht).unwrap();
    let oracle = brute_force_balanced(&dist, OracleMode::Supports { max_size: 4 }).unwrap();
    let tenths: Vec<BigRational> = (1..=4).map(|k| BigRational::new(k.into(), 10.into())).collect();
    let found = oracle.iter().find(|o| {
        let mut w: Vec<BigRational> = o.support.iter().map(|&v| o.measure.exact_weights().unwrap()[v].clone()).collect();
        w.sort();
        w == tenths
    });
    match found {
        None => failures.push("frucht: no balanced measure with weights {1,2,3,4}/10".into()),
        Some(o) if o.argmax_set.len() != 6 => {
            failures.push(format!("frucht: argmax set has {} vertices, expected 6", o.argmax_set.len()))
        }
        Some(_) => {}
    }
    if failures.is_empty() {
        Ok("uniform measures exactly balanced; frucht {1,2,3,4}/10 measure with 6-vertex argmax set".into())
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_6() -> Verdict {
    let (m, ell) = (5, 10);
    let gp = gen_glued_paths(m, ell).unwrap();
    let dist = all_pairs_distances(&gp.graph).unwrap();
    let diam = dist.diam() as f64;
    let mut failures = Vec::new();
    let n = gp.graph.n();
    let hub = VertexMeasure::uniform_on(n, &[gp.hubs.0, gp.hubs.1]).unwrap();
    if !is_balanced(&hub, &dist, 0.0).unwrap().is_balanced {
        failures.push("hub measure not balanced".to_string());
    }
    // Each path contributes both of its central vertices; the linear system
    // on this support is singular, and the symmetric solution is uniform.
    let centers: Vec<usize> = gp.centers.iter().flat_map(|&(a, b)| [a, b]).collect();
    let midpoint = VertexMeasure::uniform_on(n, &centers).unwrap();
    if !is_balanced(&midpoint, &dist, 0.0).unwrap().is_balanced {
        failures.push("midpoint measure not balanced".to_string());
    }
    let emb = audit(&dist, &midpoint).map_err(|e| format!("midpoint measure: {e}"))?;
    let sep = separation_check(&emb, dist.diam());
    let k = emb.dim() as f64;
    let (lo, hi) = (diam / (2.0 * k), 4.0 * diam / k);
    if sep.mean_l1 < lo || sep.mean_l1 > hi {
        failures.push(format!("mean l1 separation {:.3} outside [{lo:.3}, {hi:.3}]", sep.mean_l1));
    }
    if failures.is_empty() {
        Ok(format!(
            "hub and midpoint measures balanced; mean l1 separation {:.3} in [{lo:.3}, {hi:.3}] (diam {diam}, support {})",
            sep.mean_l1,
            emb.dim()
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let cloud = gen_swiss_roll(10_000, 1).unwrap();
    let g = knn_graph(&cloud, 40).unwrap();
    let dist = all_pairs_distances(&g).unwrap();
    let bset = boundary(&g, &dist);
    let config = PipelineConfig {
        run: RunConfig {
            max_steps: 20_000,
            stop_gap: Some(0.0),
            ..RunConfig::default()
        },
        ..PipelineConfig::default()
    };
    let outcome = greedy_balanced(&dist, Some(&bset), &config).unwrap();
    if !outcome.balance.is_balanced {
        return Err(format!("pipeline measure not balanced ({:?})", outcome.source));
    }
    let emb = audit(&dist, &outcome.measure)?;
    let support = emb.dim();
    let top = keep_top_coordinates(&emb, 3).unwrap();
    let top_mass: f64 = top.weights.iter().sum();
    let pca = pca_reduce(&emb.to_matrix(), 2).unwrap();
    let first: Vec<f64> = pca.points.column(0).iter().copied().collect();
    let rho = rank_correlation(&first, &cloud.metadata_column("t").unwrap());
    let elapsed = start.elapsed();
    let detail = format!(
        "support {support}, top-3 mass {top_mass:.3}, |rank corr(pc1, t)| {:.3}, {elapsed:.1?}",
        rho.abs()
    );
    if support <= 200 && top_mass >= 0.15 && rho.abs() >= 0.7 && elapsed <= Duration::from_secs(300) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8(fixtures: &[Fixture]) -> Verdict {
    let mut failures = Vec::new();
    for f in fixtures {
        let dist = all_pairs_distances(&f.graph).unwrap();
        let bset = boundary(&f.graph, &dist);
        let report = isoperimetric_report(&f.graph, &dist, &bset);
        if !report.satisfied {
            failures.push(format!("{}: |boundary| {} below {}", f.name, report.boundary_size, report.lower_bound));
        }
        let mut state = GreedyState::new(&dist, &[0]).unwrap();
        for step in 0..=TRAJECTORY_STEPS {
            if !state.maximizers().iter().any(|&v| bset.contains(v)) {
                failures.push(format!("{}: no maximizer on the boundary at step {step}", f.name));
                break;
            }
            if step < TRAJECTORY_STEPS {
                state.greedy_step().unwrap();
            }
        }
    }
    if failures.is_empty() {
        Ok(format!(
            "maximizers meet the boundary for {TRAJECTORY_STEPS} steps; isoperimetric bound holds on {} fixtures",
            fixtures.len()
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_9(fixtures: &[Fixture]) -> Verdict {
    let mut worst = f64::INFINITY;
    for (i, f) in fixtures.iter().enumerate() {
        let dist = all_pairs_distances(&f.graph).unwrap();
        let n = f.graph.n();
        let half = dist.diam() as f64 / 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0x9000 + i as u64);
        for _ in 0..10_000 {
            let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
            let total: f64 = raw.iter().sum();
            let mu = VertexMeasure::from_weights(raw.iter().map(|x| x / total).collect()).unwrap();
            let max_t = transport_costs(&mu, &dist).unwrap().into_iter().fold(f64::MIN, f64::max);
            worst = worst.min(max_t - half);
            if max_t < half - 1e-12 {
                return Err(format!("{}: max T {max_t} below diam/2 = {half}", f.name));
            }
        }
    }
    Ok(format!("10000 random measures per fixture; smallest max T - diam/2 = {worst:.4}"))
}

fn main() {
    let fixtures = fixtures();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("embedding guarantees on fixtures and oracle measures", Box::new(|| criterion_1(&fixtures))),
        ("greedy convergence and alpha range", Box::new(|| criterion_2(&fixtures))),
        ("pair-sum recurrence and continuity", Box::new(|| criterion_3(&fixtures))),
        ("oracle agreement on small graphs", Box::new(criterion_4)),
        ("vertex-transitive and frucht measures", Box::new(criterion_5)),
        ("glued-paths separation", Box::new(criterion_6)),
        ("swiss roll end to end", Box::new(criterion_7)),
        ("boundary maximizers and isoperimetry", Box::new(|| criterion_8(&fixtures))),
        ("transport lower bound", Box::new(|| criterion_9(&fixtures))),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("PASS criterion {}: {title} — {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {title} — {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
