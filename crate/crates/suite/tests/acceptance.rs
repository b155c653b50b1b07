//! Acceptance criteria. Runs every criterion, prints one PASS/FAIL line
//! each and exits nonzero if any fails. Pass criterion names as arguments to
//! run a subset.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qtwist_core::distance::{brute_force_code_distance, estimate_distance, BRUTE_FORCE_BUDGET};
use qtwist_core::groebner::{
    clear_denominators, k_max, normal_form, saturate_xy, to_condition, GroebnerBudget, MonomialOrder, Poly, PolyRing,
    MAX_VARS,
};
use qtwist_core::search::{run_search, RunOptions, SearchConfig, TwistSet};
use qtwist_core::tables::{self, AnomalyKind, TableRow};
use qtwist_core::torus::mult_matrix;
use qtwist_core::{build_code, compute_k, Error, LaurentPoly, PrimeField, TwistSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rows() -> Vec<TableRow> {
    tables::bundled().unwrap().rows
}

fn in_duplicate_group(row: &TableRow) -> bool {
    matches!(&row.anomaly, Some(a) if a.kind == AnomalyKind::DuplicateSpec)
}

fn polys(row: &TableRow) -> (PrimeField, LaurentPoly, LaurentPoly) {
    let field = PrimeField::new(row.q).unwrap();
    let f = LaurentPoly::parse(&row.f, &field).unwrap();
    let g = LaurentPoly::parse(&row.g, &field).unwrap();
    (field, f, g)
}

/// Table rows with distinct `(q, f, g)`.
fn distinct_pairs() -> Vec<TableRow> {
    let mut seen = BTreeSet::new();
    rows()
        .into_iter()
        .filter(|r| seen.insert((r.q, r.f.clone(), r.g.clone())))
        .collect()
}

fn list(labels: &[String], max: usize) -> String {
    let mut s = labels.iter().take(max).cloned().collect::<Vec<_>>().join(" ");
    if labels.len() > max {
        s.push_str(&format!(" (+{} more)", labels.len() - max));
    }
    s
}

fn k_exactness() -> Outcome {
    let start = Instant::now();
    let rows = rows();
    let reports: Vec<_> = rows.iter().map(|r| tables::verify_row(r, 0, 0)).collect();
    let summary = tables::summarize(&rows, &reports);
    let elapsed = start.elapsed();
    let ungrouped = rows.iter().filter(|r| r.anomaly_group().is_none()).count();
    let bad: Vec<String> = rows
        .iter()
        .zip(&reports)
        .filter(|(r, rep)| r.anomaly_group().is_none() && !(rep.n_ok && rep.k_ok))
        .map(|(r, rep)| {
            format!(
                "{}_{}:k={}",
                r.label,
                r.q,
                rep.computed_k.map_or("-".into(), |k| k.to_string())
            )
        })
        .collect();
    let groups: Vec<String> = summary
        .groups
        .iter()
        .map(|g| format!("{} has {} consistent member(s)", g.group, g.passing))
        .collect();
    outcome(
        summary.nk_ok() && elapsed < Duration::from_secs(10),
        format!(
            "{}/{} rows match printed n and k; {}; {:.2}s; mismatches: {}",
            ungrouped - bad.len(),
            ungrouped,
            groups.join(", "),
            elapsed.as_secs_f64(),
            list(&bad, 12)
        ),
    )
}

fn random_draws(seed: u64, count: usize) -> Vec<(PrimeField, LaurentPoly, LaurentPoly, TwistSpec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| common::random_draw(&mut rng, 8)).collect()
}

fn table_draws() -> Vec<(PrimeField, LaurentPoly, LaurentPoly, TwistSpec)> {
    rows()
        .iter()
        .map(|r| {
            let (field, f, g) = polys(r);
            (field, f, g, TwistSpec::new(r.a1[1], r.a2[0], r.a2[1]).unwrap())
        })
        .collect()
}

fn css_condition() -> Outcome {
    let mut failures = 0;
    let draws: Vec<_> = table_draws().into_iter().chain(random_draws(0xc55, 500)).collect();
    for (field, f, g, t) in &draws {
        let ok = match build_code(field, f, g, t) {
            Ok(code) => code.hx().mul(&code.hz().transpose()).unwrap().is_zero(),
            Err(_) => false,
        };
        failures += !ok as usize;
    }
    outcome(
        failures == 0,
        format!(
            "HX HZ^T = 0 on {}/{} codes (77 table rows + 500 random)",
            draws.len() - failures,
            draws.len()
        ),
    )
}

fn k_formula_duality() -> Outcome {
    let mut failures = 0;
    let draws: Vec<_> = table_draws().into_iter().chain(random_draws(0xd0a1, 500)).collect();
    for (field, f, g, t) in &draws {
        let code = build_code(field, f, g, t).unwrap();
        let stacked = mult_matrix(f, t).hstack(&mult_matrix(g, t)).unwrap();
        let lhs = code.n() - code.rank_hx() - code.rank_hz();
        let rhs = 2 * (t.cell_count() - stacked.rank());
        failures += (lhs != rhs) as usize;
    }
    outcome(
        failures == 0,
        format!(
            "n - rank HX - rank HZ = 2(ab - rank[Mf|Mg]) on {}/{} codes",
            draws.len() - failures,
            draws.len()
        ),
    )
}

fn merit_recomputation() -> Outcome {
    let rows = rows();
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !in_duplicate_group(r) && !r.merit_matches())
        .map(|r| {
            format!(
                "{}_{} prints {} recomputes {:.2}",
                r.label,
                r.q,
                r.merit,
                r.recomputed_merit()
            )
        })
        .collect();
    let group_ok = rows
        .iter()
        .filter(|r| in_duplicate_group(r) && r.merit_matches())
        .count();
    outcome(
        bad.is_empty() && group_ok == 1,
        format!(
            "{}/{} rows within 0.01; duplicate pair has {} consistent member(s); {}",
            rows.len() - 2 - bad.len(),
            rows.len() - 2,
            group_ok,
            if bad.is_empty() {
                "no mismatches".into()
            } else {
                bad.join("; ")
            }
        ),
    )
}

const DISTANCE_TRIALS: u64 = 50_000;
const DISTANCE_SEEDS: u64 = 20;
/// Misses allowed among the seeds of one row (at least 95% must match).
const DISTANCE_MISSES: u64 = 1;
const LARGE_ROW_MAX_N: usize = 120;

fn distance_reproduction() -> Outcome {
    let rows = rows();
    let mut small_failed = Vec::new();
    let mut small = 0;
    for row in rows.iter().filter(|r| r.n <= 80) {
        small += 1;
        let code = row.spec().build().unwrap();
        let (mut hits, mut misses, mut above) = (0, 0, false);
        let mut seen = BTreeSet::new();
        for seed in 1..=DISTANCE_SEEDS {
            let d = estimate_distance(&code, DISTANCE_TRIALS, seed).unwrap().d_upper;
            seen.insert(d);
            if d == row.d {
                hits += 1;
            } else {
                misses += 1;
                above |= d > row.d;
            }
            // fewer than 19 of 20 can no longer match
            if misses > DISTANCE_MISSES || above {
                break;
            }
        }
        if misses > DISTANCE_MISSES || above {
            small_failed.push(format!(
                "{}_{}(k={} d~{:?} {}/{})",
                row.label,
                row.q,
                code.k(),
                seen,
                hits,
                hits + misses
            ));
        }
    }
    let (mut large, mut large_equal, mut large_above) = (0, 0, Vec::new());
    for row in rows
        .iter()
        .filter(|r| r.n > 80 && r.n <= LARGE_ROW_MAX_N && !in_duplicate_group(r))
    {
        large += 1;
        let code = row.spec().build().unwrap();
        let d = estimate_distance(&code, DISTANCE_TRIALS, 1).unwrap().d_upper;
        if d == row.d {
            large_equal += 1;
        }
        if d > row.d {
            large_above.push(format!("{}_{}:{}", row.label, row.q, d));
        }
    }
    let pass = small_failed.is_empty() && large_above.is_empty() && 2 * large_equal >= large;
    outcome(
        pass,
        format!(
            "n<=80: {}/{} rows reproduce d in >=19/20 seeds; 80<n<={}: {}/{} equal, {} above; failing: {}{}",
            small - small_failed.len(),
            small,
            LARGE_ROW_MAX_N,
            large_equal,
            large,
            large_above.len(),
            list(&small_failed, 8),
            if large_above.is_empty() {
                String::new()
            } else {
                format!("; above: {}", list(&large_above, 8))
            }
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
    let (mut checked, mut mismatches) = (0, Vec::new());
    let mut attempts = 0;
    while checked < 24 && attempts < 20_000 {
        attempts += 1;
        let q = common::PRIMES[rng.gen_range(0..4)];
        let field = PrimeField::new(q).unwrap();
        let f = common::random_poly(&mut rng, &field, 3, 2);
        let g = common::random_poly(&mut rng, &field, 3, 2);
        let alpha = rng.gen_range(1..=6);
        let beta = rng.gen_range(1..=12 / alpha);
        let t = TwistSpec::new(alpha, beta, rng.gen_range(0..alpha)).unwrap();
        let code = build_code(&field, &f, &g, &t).unwrap();
        if code.n() > 24 || code.k() < 2 {
            continue;
        }
        let exact = match brute_force_code_distance(&code) {
            Ok(d) => d,
            Err(Error::BudgetExceeded { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let est = estimate_distance(&code, DISTANCE_TRIALS, checked as u64)
            .unwrap()
            .d_upper;
        if est != exact {
            mismatches.push(format!(
                "[[{},{}]]_{} exact {} est {}",
                code.n(),
                code.k(),
                q,
                exact,
                est
            ));
        }
        checked += 1;
    }
    outcome(
        checked >= 20 && mismatches.is_empty(),
        format!(
            "{}/{} random codes (n<=24, k>=2, brute force budget {:e}) agree{}",
            checked - mismatches.len(),
            checked,
            BRUTE_FORCE_BUDGET as f64,
            if mismatches.is_empty() {
                String::new()
            } else {
                format!("; {}", mismatches.join("; "))
            }
        ),
    )
}

/// Multiplicative order of the variable `var` (0 for x, 1 for y) modulo a
/// Groebner basis, if at most `cap`.
fn unit_order(ring: &PolyRing, basis: &[Poly], var: usize, cap: usize) -> Option<usize> {
    let mut m = [0u16; MAX_VARS];
    m[var] = 1;
    let v = Poly::from_terms(ring, [(m, 1)]);
    let one = normal_form(ring, &Poly::from_terms(ring, [([0u16; MAX_VARS], 1)]), basis);
    let mut p = normal_form(ring, &v, basis);
    for e in 1..=cap {
        if p == one {
            return Some(e);
        }
        p = normal_form(ring, &p.mul(ring, &v), basis);
    }
    None
}

const KMAX_GRID: usize = 50;
const KMAX_MAX_CELLS: usize = 4096;

fn k_max_ceiling() -> Outcome {
    let grid: Vec<TwistSpec> = (1..=10i64)
        .flat_map(|a| (1..=5i64).map(move |b| TwistSpec::new(a, b, (7 * b) % a).unwrap()))
        .collect();
    assert_eq!(grid.len(), KMAX_GRID);
    let (mut bounded, mut violations, mut attained, mut missed) = (0, Vec::new(), 0, Vec::new());
    for row in distinct_pairs() {
        let (field, f, g) = polys(&row);
        let Ok(Some(kmax)) = k_max(&f, &g) else { continue };
        bounded += 1;
        for t in &grid {
            let k = compute_k(&field, &f, &g, t).unwrap();
            if k > kmax {
                violations.push(format!("{}_{} on {:?}: {} > {}", row.label, row.q, t, k, kmax));
            }
        }
        // untwisted torus whose sides are the orders of y and x in R/(f, g)
        let ring = PolyRing::new(&field, 2, MonomialOrder::Grevlex).unwrap();
        let gens = [clear_denominators(&f, &ring), clear_denominators(&g, &ring)];
        let basis = saturate_xy(&field, &gens, &GroebnerBudget::default()).unwrap();
        let Some(ox) = unit_order(&ring, &basis, 0, KMAX_MAX_CELLS) else {
            continue;
        };
        let Some(oy) = unit_order(&ring, &basis, 1, KMAX_MAX_CELLS / ox) else {
            continue;
        };
        let t = TwistSpec::new(oy as i64, ox as i64, 0).unwrap();
        let k = compute_k(&field, &f, &g, &t).unwrap();
        if k == kmax {
            attained += 1;
        } else {
            missed.push(format!("{}_{} ({},{},0): {} < {}", row.label, row.q, oy, ox, k, kmax));
        }
    }
    outcome(
        bounded >= 10 && violations.is_empty() && attained >= 10 && missed.is_empty(),
        format!(
            "{} pairs with finite k_max, {} twist violations over {} twists each; untwisted torus attains k_max for {}/{} pairs with <= {} cells{}",
            bounded,
            violations.len(),
            KMAX_GRID,
            attained,
            attained + missed.len(),
            KMAX_MAX_CELLS,
            if violations.is_empty() && missed.is_empty() {
                String::new()
            } else {
                format!("; {}", list(&violations.into_iter().chain(missed).collect::<Vec<_>>(), 6))
            }
        ),
    )
}

fn to_condition_check() -> Outcome {
    let pairs = distinct_pairs();
    let sampled: Vec<&TableRow> = pairs.iter().step_by(5).collect();
    let holds: Vec<bool> = sampled
        .iter()
        .map(|r| {
            let (_, f, g) = polys(r);
            to_condition(&f, &g).unwrap_or(false)
        })
        .collect();
    let trues = holds.iter().filter(|&&b| b).count();
    let (_, f, _) = polys(&pairs[0]);
    let counter = to_condition(&f, &f).unwrap();
    outcome(
        trues >= 10 && trues == sampled.len() && !counter,
        format!(
            "true for {}/{} sampled table pairs; f = g gives {}",
            trues,
            sampled.len(),
            counter
        ),
    )
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

fn determinism() -> Outcome {
    let row = rows().into_iter().find(|r| r.n == 48 && r.q == 3).unwrap();
    let code = row.spec().build().unwrap();
    let est1 = pool(1).install(|| estimate_distance(&code, DISTANCE_TRIALS, 42).unwrap());
    let est4 = pool(4).install(|| estimate_distance(&code, DISTANCE_TRIALS, 42).unwrap());
    let estimator_ok = est1 == est4;

    let config = SearchConfig {
        q: 3,
        exponent_bound: 1,
        twist_set: TwistSet::NRange { n_min: 2, n_max: 20 },
        trials_screen: 50,
        trials_final: 200,
        merit_floor: 2.0,
        batch_size: 500,
        seed: 9,
        ..SearchConfig::default()
    };
    let s1 = pool(1).install(|| run_search(&config, None, &RunOptions::default()).unwrap());
    let s4 = pool(4).install(|| run_search(&config, None, &RunOptions::default()).unwrap());
    let search_ok = s1.leaderboard == s4.leaderboard
        && serde_json::to_string(&s1.leaderboard).unwrap() == serde_json::to_string(&s4.leaderboard).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("checkpoint.jsonl");
    let stop = RunOptions {
        max_batches: Some(3),
        ..RunOptions::default()
    };
    pool(3).install(|| run_search(&config, Some(&path), &stop).unwrap());
    let resumed = pool(2).install(|| run_search(&config, Some(&path), &RunOptions::default()).unwrap());
    let resume_ok = resumed.leaderboard == s1.leaderboard && resumed.resumed > 0;

    outcome(
        estimator_ok && search_ok && resume_ok,
        format!(
            "estimator 1 vs 4 threads: {}; search 1 vs 4 threads: {}; resumed leaderboard: {}",
            same(estimator_ok),
            same(search_ok),
            same(resume_ok)
        ),
    )
}

fn same(ok: bool) -> &'static str {
    if ok {
        "identical"
    } else {
        "DIFFERS"
    }
}

fn smoke_search() -> Outcome {
    let config = SearchConfig {
        q: 3,
        exponent_bound: 1,
        twist_set: TwistSet::NRange { n_min: 2, n_max: 36 },
        trials_screen: 200,
        trials_final: 2000,
        merit_floor: 4.0,
        seed: 1,
        ..SearchConfig::default()
    };
    let start = Instant::now();
    let out = run_search(&config, None, &RunOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let best = out
        .leaderboard
        .records()
        .max_by(|a, b| a.merit.total_cmp(&b.merit))
        .map(|r| format!("{} merit {:.2}", r.label(), r.merit))
        .unwrap_or_default();
    outcome(
        !out.leaderboard.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "q=3 E=1 n<=36: {} ansatz x {} tori in {:.1}s, {} cells, best {}",
            out.ansatz_count,
            out.twist_count,
            elapsed.as_secs_f64(),
            out.leaderboard.cells.len(),
            best
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    ("K-EXACTNESS", k_exactness),
    ("CSS CONDITION", css_condition),
    ("DISTANCE REPRODUCTION", distance_reproduction),
    ("MERIT RECOMPUTATION", merit_recomputation),
    ("ORACLE EQUIVALENCE", oracle_equivalence),
    ("K-FORMULA DUALITY", k_formula_duality),
    ("K_MAX CEILING", k_max_ceiling),
    ("TO CONDITION", to_condition_check),
    ("DETERMINISM", determinism),
    ("SMOKE SEARCH", smoke_search),
];

fn main() {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (name, run) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        println!(
            "{} {name} ({:.1}s): {}",
            if result.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.pass {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: {} failed: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
}
