//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctoe::bits::{bits, BitString};
use ctoe::enumerate::{consistent_set, default_budget, ConsistencyQuery, RunTable};
use ctoe::machine::{run_generator, run_interleaved, Program, RunBudget, RunStatus};
use ctoe::mdl::gamma::gamma_len;
use ctoe::mdl::model::{ModelExpr, ObservationModel, StreamSource};
use ctoe::mdl::score::{dyadic_grid_scores, localization_bits, nll_bits, parametric_score, prob_score};
use ctoe::mdl::streams::pi_bits;
use ctoe::predict::{all_targets, km_vs_logm_from_table, nfl_with_table, ockham_from_table, predict_from_table, NflConfig};
use ctoe::utoe::{cell_index, index_cell, run_wrapped, wrap_observer, Cell, EXTRACTOR_TAG};

const GOLDEN: &str = include_str!("data/machine_golden.tsv");
const PI29: &str = "11001001000011111101101010100";

/// Seed of the NFL trials.
const NFL_SEED: u64 = 2026;
const NFL_TRIALS: u64 = 10_000;
/// Regime-B counting-predictor accuracy measured at L=12, t=4, n=5 with
/// [`NFL_SEED`]; every self-sampled universe long enough was predicted
/// correctly.
const NFL_UNIVERSAL_ACCURACY: f64 = 1.0;
/// |Q_12(u)| for every u of length at most 3, length-lex order.
const GAP_COUNTS: [u64; 15] = [8191, 1863, 1863, 298, 297, 297, 298, 28, 27, 27, 27, 27, 27, 27, 28];
/// Km_12(u) for the same targets.
const GAP_KM: [u32; 15] = [0, 3, 3, 6, 6, 6, 6, 9, 9, 9, 9, 9, 9, 9, 9];
/// Ockham choice vs counting argmax over u of length ≤ 3, h ∈ {0, 1, 2}
/// at L=12: (agreeing, truncated, cases).
const OCKHAM_AGREEMENT: (u32, u32, u32) = (15, 30, 45);
/// Slack on comparisons of floating-point code lengths.
const BITS_TOLERANCE: f64 = 1e-9;

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

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    if elapsed > limit {
        o.pass = false;
        o.detail = format!("{}; took {elapsed:?}, limit {limit:?}", o.detail);
    } else {
        o.detail = format!("{} ({elapsed:.2?})", o.detail);
    }
    o
}

fn machine_conformance() -> Outcome {
    let mut cases = 0;
    let mut failures = Vec::new();
    for line in GOLDEN.lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split('\t').collect();
        let field = |i: usize| if f[i] == "-" { "" } else { f[i] };
        let program: Program = field(0).parse().expect("golden program");
        let budget = RunBudget::new(f[1].parse().unwrap(), f[2].parse().unwrap()).unwrap();
        let status = match f[4] {
            "halted" => RunStatus::Halted,
            "out-of-budget" => RunStatus::OutOfBudget,
            other => panic!("unknown status {other}"),
        };
        let run = run_generator(&program, budget);
        let ok = run.output.to_string() == field(3)
            && run.status == status
            && run.fetched_bits.to_string() == f[5]
            && run.steps_used.to_string() == f[6];
        if !ok {
            failures.push(format!("{line} -> {} {:?} {} {}", run.output, run.status, run.fetched_bits, run.steps_used));
        }
        cases += 1;
    }
    outcome(
        cases >= 40 && failures.is_empty(),
        format!("{cases} golden vectors, {} mismatches {failures:?}", failures.len()),
    )
}

fn garbage_bound() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for l_bound in [6u32, 9, 12] {
        let table = RunTable::build(l_bound, default_budget(l_bound, 4));
        for target in all_targets(4) {
            let set = table.consistent_set(&target);
            let Some(l) = set.l else { continue };
            checked += 1;
            let bound = (1u64 << (l_bound - l + 1)) - 1;
            if set.count < bound || l % 3 != 0 {
                bad.push(format!("L={l_bound} {target}: |Q|={} l={l}", set.count));
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} (target, L) cases, violations {bad:?}"))
}

fn pinned_counts() -> Outcome {
    let count = |l| consistent_set(&ConsistencyQuery::new(bits("1"), l)).count;
    let (c3, c6) = (count(3), count(6));
    outcome(c3 == 1 && c6 == 19, format!("|Q_3(1)|={c3} |Q_6(1)|={c6}"))
}

fn counting_identities() -> Outcome {
    let table = RunTable::build(9, default_budget(9, 5));
    let one = Ratio::from_integer(1u64);
    let mut bad = Vec::new();
    let mut checked = 0;
    for target in all_targets(3) {
        let Ok(h1) = predict_from_table(&table, &target, 1) else { continue };
        let h2 = predict_from_table(&table, &target, 2).expect("same conditioning set");
        checked += 1;
        let sum: Ratio<u64> = h1.continuations.iter().map(|c| c.probability).sum();
        if sum > one || sum + h1.deficit != one {
            bad.push(format!("{target}: sum {sum}"));
        }
        for c in &h2.continuations {
            let first = h1.probability_of(&c.bits[..1]).unwrap();
            let chained = match predict_from_table(&table, &target.concat(&c.bits[..1]), 1) {
                Ok(next) => first * next.probability_of(&c.bits[1..]).unwrap(),
                Err(_) => Ratio::from_integer(0),
            };
            if chained != c.probability {
                bad.push(format!("{target}+{}: {} vs {chained}", c.bits, c.probability));
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} targets at L=9, violations {bad:?}"))
}

fn km_monotone() -> Outcome {
    let table = RunTable::build(12, default_budget(12, 4));
    let targets = all_targets(4);
    let km: Vec<Option<u32>> = targets.iter().map(|t| table.consistent_set(t).l).collect();
    let mut pairs = 0;
    let mut bad = Vec::new();
    for (i, u) in targets.iter().enumerate() {
        for (j, w) in targets.iter().enumerate() {
            if !w.starts_with(u) {
                continue;
            }
            pairs += 1;
            let ok = match (km[i], km[j]) {
                (_, None) => true,
                (Some(a), Some(b)) => a <= b,
                (None, Some(_)) => false,
            };
            if !ok {
                bad.push(format!("{u} -> {w}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("{pairs} (u, uv) pairs at L=12, violations {bad:?}"))
}

fn serpentine() -> Outcome {
    let listed = [
        ("", 1),
        ("0", 1),
        ("", 2),
        ("", 3),
        ("0", 2),
        ("1", 1),
        ("00", 1),
        ("1", 2),
        ("0", 3),
        ("", 4),
        ("", 5),
        ("0", 4),
        ("1", 3),
        ("00", 2),
    ];
    let prefix_ok = listed.iter().enumerate().all(|(i, (q, k))| {
        index_cell(i as u64 + 1).ok() == Some(Cell::new(q.parse().unwrap(), *k).unwrap())
    });
    let failures = (1..=1_000_000u64)
        .filter(|&i| index_cell(i).and_then(|c| cell_index(&c)) != Ok(i))
        .count();
    outcome(
        prefix_ok && failures == 0,
        format!("first 14 cells match: {prefix_ok}; round-trip failures in 10^6: {failures}"),
    )
}

fn wrapping_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let budget = RunBudget::new(5_000, 64).unwrap();
    let c_r = EXTRACTOR_TAG.len() as u64;
    let mut bad = Vec::new();
    let mut nonempty = 0;
    for _ in 0..50 {
        let draw = |rng: &mut ChaCha8Rng| {
            let len = rng.gen_range(0..=9);
            Program::from_bits((0..len).map(|_| rng.gen::<bool>()).collect())
        };
        let q = draw(&mut rng);
        let s = draw(&mut rng);
        let w = wrap_observer(&q, &s);
        let wrapped = run_wrapped(&w, budget);
        let (_, direct) = run_interleaved(&q, &s, budget);
        nonempty += usize::from(!direct.observation.is_empty());
        let overhead = w.declared_length - (q.len() + s.len()) as u64;
        let expected = c_r + gamma_len(q.len() as u64 + 1).unwrap();
        if wrapped.observation != direct.observation || overhead != expected {
            bad.push(format!("q={q} s={s}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!("50 pairs ({nonempty} with nonempty observation), mismatches {bad:?}"),
    )
}

fn pi_vs_coin() -> Outcome {
    let o = bits(PI29);
    let coin = ModelExpr::Coin;
    let pi = ModelExpr::DetStream(StreamSource::PiBits);
    let (nll_coin, nll_pi) = (nll_bits(&coin, &o), nll_bits(&pi, &o));
    let t_star = (pi.code_length() - coin.code_length()) as usize;
    let stream = pi_bits(t_star + 1);
    let budget = RunBudget::new(1_000, 64).unwrap();
    let total = |m: &ModelExpr, t: usize| {
        prob_score(m, &ObservationModel::Identity, &stream[..t], budget)
            .expect("admissible")
            .total
    };
    let d = |t: usize| total(&pi, t) - total(&coin, t);
    let (before, at, after) = (d(t_star - 1), d(t_star), d(t_star + 1));
    let pass = nll_coin == 29.0 && nll_pi == 0.0 && before > 0.0 && at == 0.0 && after < 0.0;
    outcome(
        pass,
        format!(
            "nll coin {nll_coin}, pi {nll_pi}; t*={t_star}; total(pi)-total(coin) at t*-1,t*,t*+1 = {before}, {at}, {after}"
        ),
    )
}

fn localization() -> Outcome {
    let cases = [(8u128, 3u32), (7_000_000_000, 33), (30_000_000_000_000_000_000_000, 75)];
    let got: Vec<_> = cases.iter().map(|&(n, _)| localization_bits(n).unwrap()).collect();
    let pass = cases.iter().zip(&got).all(|(&(_, e), &g)| e == g);
    outcome(pass, format!("bits {got:?}"))
}

fn nfl_contrast() -> Outcome {
    let cfg = NflConfig {
        max_len: 12,
        t: 4,
        n: 5,
        trials: NFL_TRIALS,
        seed: NFL_SEED,
        max_attempts: 1 << 20,
    };
    let table = RunTable::build(12, default_budget(12, cfg.n));
    let r = nfl_with_table(&cfg, &table).expect("experiment runs");
    let a = r.uniform;
    let b = r.universal;
    let a_ok = (a.predictor_accuracy - 0.5).abs() <= 3.0 * a.null_se()
        && (a.baseline_accuracy - 0.5).abs() <= 3.0 * a.null_se();
    let b_above = b.predictor_accuracy - 0.5 >= 5.0 * b.null_se();
    let b_pinned = (b.predictor_accuracy - NFL_UNIVERSAL_ACCURACY).abs() <= 2.0 * b.predictor_se + BITS_TOLERANCE;
    outcome(
        a_ok && b_above && b_pinned,
        format!(
            "uniform: predictor {:.4} baseline {:.4} (se {:.4}); universal: predictor {:.4} (se {:.4}, pinned {NFL_UNIVERSAL_ACCURACY}) baseline {:.4}, {} discarded",
            a.predictor_accuracy,
            a.baseline_accuracy,
            a.null_se(),
            b.predictor_accuracy,
            b.predictor_se,
            b.baseline_accuracy,
            b.discarded
        ),
    )
}

fn km_vs_m() -> Outcome {
    let l_bound = 12;
    let table = RunTable::build(l_bound, default_budget(l_bound, 5));
    let targets = all_targets(3);
    let rows = km_vs_logm_from_table(&table, &targets);
    let universe = (1u64 << (l_bound + 1)) - 1;
    let mut ok = true;
    println!("    target,count,km,neg_log2_p,gap");
    for (i, row) in rows.iter().enumerate() {
        let km = row.km.expect("every short target is reachable");
        // −log2(count / universe) ≤ km + 1  ⇔  universe ≤ count · 2^(km+1)
        let bound = u128::from(universe) <= u128::from(row.count) << (km + 1);
        let pinned = row.count == GAP_COUNTS[i] && km == GAP_KM[i];
        ok &= bound && pinned;
        println!(
            "    {},{},{},{:.6},{:.6}",
            if row.target.is_empty() { "ε".to_string() } else { row.target.to_string() },
            row.count,
            km,
            row.neg_log2_p.unwrap(),
            row.gap.unwrap()
        );
    }
    let (mut agree, mut truncated, mut cases) = (0, 0, 0);
    for target in &targets {
        for h in 0..=2 {
            if let Ok(r) = ockham_from_table(&table, target, h) {
                cases += 1;
                agree += u32::from(r.agrees);
                truncated += u32::from(r.truncated);
            }
        }
    }
    let ockham_ok = (agree, truncated, cases) == OCKHAM_AGREEMENT;
    outcome(
        ok && ockham_ok,
        format!(
            "{} targets at L=12 within bound and pinned; ockham agreement {agree}/{cases} ({truncated} truncated)",
            rows.len()
        ),
    )
}

fn parametric_rule() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut bad = Vec::new();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs: BitString = (0..1024).map(|_| rng.gen_bool(0.7)).collect();
        let rule = parametric_score(&obs).unwrap();
        let best = dyadic_grid_scores(&obs)
            .unwrap()
            .into_iter()
            .map(|g| g.report.total)
            .fold(f64::INFINITY, f64::min);
        let excess = rule.report.total - best;
        worst = worst.max(excess);
        if excess > 1.0 + BITS_TOLERANCE {
            bad.push(seed);
        }
    }
    outcome(bad.is_empty(), format!("largest excess over best 2^j grid: {worst:.6} bits; failing seeds {bad:?}"))
}

fn main() {
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("machine conformance", Box::new(|| timed(Duration::from_secs(1), machine_conformance))),
        ("garbage lower bound", Box::new(|| timed(Duration::from_secs(60), garbage_bound))),
        ("pinned exhaustive counts", Box::new(pinned_counts)),
        ("counting identities", Box::new(|| timed(Duration::from_secs(60), counting_identities))),
        ("km monotonicity", Box::new(km_monotone)),
        ("serpentine bijection", Box::new(|| timed(Duration::from_secs(10), serpentine))),
        ("wrapping equivalence", Box::new(wrapping_equivalence)),
        ("pi vs coin", Box::new(pi_vs_coin)),
        ("localization arithmetic", Box::new(localization)),
        ("no-free-lunch contrast", Box::new(|| timed(Duration::from_secs(300), nfl_contrast))),
        ("km vs M bound", Box::new(km_vs_m)),
        ("parametric rule", Box::new(parametric_rule)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
