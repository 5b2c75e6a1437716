//! Acceptance criteria 1–9, each printed as one PASS/FAIL line. Runs as a
//! plain binary so the lines always reach the test output.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symdex::error::Error;
use symdex::extraction::{
    build_eps_tree, eps_extreme, eps_strong_extreme, extract_c0_sequence, refine_almost_isometric, seeded_coefficients,
    validate_transcript, verify_basis_inequality, BasisMargins, ExtractionTranscript,
};
use symdex::indexes::{delta0, delta_curve, delta_infinity_bounds, delta_lower, delta_upper, separation_alpha_lower, SearchStrategy};
use symdex::series::{brute_tail_sup, sign_sum_set, unconditional_tail_bound, SeriesSpec};
use symdex::sets::{free_direction, symmetrize, Certificate, SetExpr, SignMode, Space};
use symdex::vectors::{int, ratio, Coord, NormKind, Scalar, SparseVec};

use common::{brute_delta, random_finite_sets, RandomSet};

const COEFFICIENT_SEED: u64 = 2024;
const SET_SEED: u64 = 7;

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

fn e(i: Coord) -> SparseVec {
    SparseVec::unit(i)
}

fn margins_for(t: &ExtractionTranscript) -> Vec<BasisMargins> {
    seeded_coefficients(COEFFICIENT_SEED, 1000, t.steps.len())
        .iter()
        .map(|c| verify_basis_inequality(t, c).expect("coefficients fit the transcript"))
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let ball = SetExpr::ball(int(1));
    let t = match extract_c0_sequence(&Space::sup(), &ball, &ratio(1, 10), 4, None) {
        Ok(t) => t,
        Err(err) => return outcome(false, format!("extraction failed: {err}")),
    };
    let valid = validate_transcript(&Space::sup(), &t).map(|c| c.passed()).unwrap_or(false);
    let unit_vectors = t.points() == (1..=4).map(e).collect::<Vec<_>>();
    let coeffs = seeded_coefficients(COEFFICIENT_SEED, 1000, 4);
    let mut ok = true;
    for (c, m) in coeffs.iter().zip(margins_for(&t)) {
        // In the sup-norm model ‖Σ λ_n e_n‖ = max |λ_n|.
        let max = c.iter().map(|x| x.abs()).max().unwrap_or_default();
        let expected_lower = &max - (int(1) - ratio(1, 10)) * &max;
        ok &= m.norm == max && m.lower_margin == expected_lower && !m.lower_margin.is_negative();
        ok &= m.upper_margin == Some(Scalar::zero());
    }
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(5);
    outcome(
        valid && unit_vectors && ok && fast,
        format!("x_n = e_n: {unit_vectors}, validator: {valid}, 1000 margin vectors exact: {ok}, {elapsed:.2?}"),
    )
}

fn criterion_2(sets: &[RandomSet]) -> Outcome {
    let start = Instant::now();
    let curve = delta_curve(&Space::sup(), &SetExpr::ball(int(1)), 8, &SearchStrategy::exhaustive());
    let box_ok = match &curve {
        Ok(c) => c.iter().all(|r| r.bound.lower == int(1) && r.bound.upper == Some(int(1))),
        Err(_) => false,
    };
    let mut zero = 0;
    for s in sets {
        let r = delta_upper(&Space::new(s.norm), &s.set, 1, &SearchStrategy::exhaustive());
        if matches!(&r, Ok(r) if r.bound.lower.is_zero() && r.bound.upper == Some(Scalar::zero())) {
            zero += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        box_ok && zero == sets.len() && elapsed < Duration::from_secs(60),
        format!("box δ_0..δ_8 = 1: {box_ok}, finite δ_1 = 0 on {zero}/{} sets, {elapsed:.2?}", sets.len()),
    )
}

fn criterion_3(sets: &[RandomSet]) -> Outcome {
    let mut agree = 0;
    let mut total = 0;
    for s in sets {
        for n in 0..=2 {
            total += 1;
            let Ok(r) = delta_upper(&Space::new(s.norm), &s.set, n, &SearchStrategy::exhaustive()) else {
                continue;
            };
            let brute = brute_delta(s.norm, &s.dense, n);
            if r.bound.upper.as_ref() == Some(&brute) && r.bound.lower == brute {
                agree += 1;
            }
        }
    }
    outcome(agree == total, format!("exhaustive δ_N (N ≤ 2) equals brute force on {agree}/{total} cases"))
}

fn criterion_4() -> Outcome {
    let s = Space::sup();
    let a = SetExpr::boxed(int(1), [(1, int(2))].into());
    let eps = ratio(1, 10);
    let r = match refine_almost_isometric(&s, &a, &eps, &SearchStrategy::exhaustive(), 3) {
        Ok(r) => r,
        Err(err) => return outcome(false, format!("refinement failed: {err}")),
    };
    let inf = delta_infinity_bounds(&s, &a, 3, &SearchStrategy::exhaustive()).map(|b| b.lower);
    let d0 = delta0(&s, &r.set).ok().and_then(|b| b.value().cloned());
    let exact = d0 == Some(int(1)) && inf == Ok(int(1)) && r.ratio == int(1) && r.ratio <= int(1) + &eps;
    let reference = extract_c0_sequence(&s, &SetExpr::ball(int(1)), &eps, 4, None).map(|t| margins_for(&t));
    let refined = extract_c0_sequence(&s, &r.set, &eps, 4, None).map(|t| margins_for(&t));
    let same = matches!((&reference, &refined), (Ok(a), Ok(b)) if a == b);
    outcome(
        exact && same,
        format!(
            "D = {} with δ_0 = {}, ratio {}; margins match criterion 1: {same}",
            serde_json::to_string(&r.set).unwrap_or_default(),
            d0.map(|v| v.to_string()).unwrap_or_else(|| "unbounded".into()),
            r.ratio
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let h = 10u32;
    let terms = (1..=h).map(|n| SparseVec::single(n, ratio(1, 1 << n))).collect();
    let geo = SeriesSpec::new(NormKind::Sum, terms, "geometric");
    let eps = ratio(1, 8);
    let sum = Space::new(NormKind::Sum);
    let harness = unconditional_tail_bound(&sum, &geo, &eps, SignMode::Subsets, &SearchStrategy::exhaustive(), 1);
    let m = harness.as_ref().map(|t| t.m).ok();
    let tail = brute_tail_sup(&geo, 4, 10);
    let tail_ok = tail.as_ref().is_ok_and(|t| *t == ratio(1, 8) - ratio(1, 1 << h) && *t <= eps);

    let canonical = SeriesSpec::new(NormKind::Sup, (1..=6).map(e).collect(), "canonical");
    let sup = Space::sup();
    let refused = unconditional_tail_bound(&sup, &canonical, &ratio(1, 2), SignMode::Subsets, &SearchStrategy::exhaustive(), 1);
    let certified = match &refused {
        Err(Error::NotAchievable {
            lower_certificate: Some(low),
            ..
        }) => low.bound.lower >= int(1) && matches!(low.lower_certificate, Some(Certificate::FreshSeriesIndex { .. })),
        _ => false,
    };
    // The certificate in action: every witness list from the harness pool
    // leaves a free direction of norm 1.
    let family = sign_sum_set(&canonical, SignMode::Subsets);
    let lists = [vec![SparseVec::zero()], vec![e(1)], vec![&e(1) + &e(2), SparseVec::zero()]];
    let directions = lists.iter().all(|w| {
        matches!(free_direction(&sup, &family, w, &Scalar::zero()), Ok(Some(d)) if d.norm(NormKind::Sup) >= int(1))
    });
    let lower_ok = delta_lower(&sup, &family, 2).is_ok_and(|r| r.bound.lower == int(1));
    let elapsed = start.elapsed();
    outcome(
        m == Some(3) && tail_ok && certified && directions && lower_ok && elapsed < Duration::from_secs(10),
        format!(
            "geometric M = {m:?}, tail sup {}, canonical refused with δ_N ≥ 1 certificate: {}, {elapsed:.2?}",
            tail.map(|t| t.to_string()).unwrap_or_default(),
            certified && directions && lower_ok
        ),
    )
}

fn criterion_6() -> Outcome {
    let ball = SetExpr::ball(int(1));
    let t = match build_eps_tree(&Space::sup(), &ball, &int(1), 5) {
        Ok(t) => t,
        Err(err) => return outcome(false, format!("tree failed: {err}")),
    };
    let internal = t.internal_count();
    let mut midpoints = 0;
    let mut separated = 0;
    for n in 1..=internal {
        let (l, r) = (t.node(2 * n), t.node(2 * n + 1));
        if (&(l + r) - &t.node(n).scale(&int(2))).is_zero() {
            midpoints += 1;
        }
        if (l - r).norm(NormKind::Sup) == int(2) {
            separated += 1;
        }
    }
    outcome(
        internal == 15 && midpoints == 15 && separated == 15 && t.sep == Some(int(2)),
        format!("{midpoints}/15 midpoint identities, {separated}/15 sibling gaps exactly 2"),
    )
}

fn criterion_7(sets: &[RandomSet]) -> Outcome {
    let epsilons = [ratio(1, 4), ratio(1, 2), int(1), int(2)];
    let tiny = ratio(1, 1_000_000);
    let mut counterexamples = 0;
    let mut strong_cases = 0;
    let mut errors = 0;
    let mut with_extreme = 0;
    for s in sets {
        let space = Space::new(s.norm);
        let mut found = false;
        for x in s.points() {
            for eps in &epsilons {
                match (eps_strong_extreme(&space, &s.set, &x, eps), eps_extreme(&space, &s.set, &x, eps)) {
                    (Ok((true, _)), Ok(plain)) => {
                        strong_cases += 1;
                        if !plain {
                            counterexamples += 1;
                        }
                    }
                    (Ok((false, _)), Ok(_)) => {}
                    _ => errors += 1,
                }
            }
            match eps_extreme(&space, &s.set, &x, &tiny) {
                Ok(true) => found = true,
                Ok(false) => {}
                Err(_) => errors += 1,
            }
        }
        if found {
            with_extreme += 1;
        }
    }
    outcome(
        counterexamples == 0 && errors == 0 && with_extreme == sets.len(),
        format!(
            "{counterexamples} counterexamples over {strong_cases} strong cases, {errors} errors, \
             {with_extreme}/{} sets with a 10^-6-extreme point",
            sets.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let space = Space::sup();
    let ball = SetExpr::ball(int(1));
    let mut rng = ChaCha8Rng::seed_from_u64(SET_SEED);
    let mut ok = 0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=4usize);
        let witnesses: Vec<SparseVec> = (0..n)
            .map(|_| {
                let dim = rng.gen_range(1..=5u32);
                SparseVec::from_entries((1..=dim).map(|i| {
                    let d: i64 = rng.gen_range(1..=4);
                    (i, ratio(rng.gen_range(-d..=d), d))
                }))
            })
            .collect();
        let Ok(d) = symmetrize(&ball, &witnesses) else {
            continue;
        };
        let alpha = separation_alpha_lower(&space, &d, 2 * n + 1).map(|b| b.lower);
        let delta = delta_lower(&space, &ball, 2 * n).map(|r| r.bound.lower);
        if let (Ok(a), Ok(dl)) = (alpha, delta) {
            if a >= dl && a == int(1) && dl == int(1) {
                ok += 1;
            }
        }
    }
    outcome(ok == 20, format!("α lower ≥ δ_2N lower, both exactly 1, on {ok}/20 witness lists"))
}

fn run_cli(dir: &Path, args: &[&str]) -> Option<(i32, Vec<u8>)> {
    let out = dir.join("report");
    let status = Command::new(env!("CARGO_BIN_EXE_symdex"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .current_dir(dir)
        .output()
        .ok()?;
    let bytes = std::fs::read(&out).ok()?;
    Some((status.status.code()?, bytes))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().expect("temporary directory");
    let write = |name: &str, text: &str| std::fs::write(dir.path().join(name), text).expect("fixture written");
    write("box12.json", r#"{"type":"box","default_radius":"1","overrides":{"1":"2"}}"#);
    write("ball.json", r#"{"type":"box","default_radius":"1"}"#);
    let terms: Vec<String> = (1..=10).map(|n| format!(r#"{{"{n}":"1/{}"}}"#, 1u64 << n)).collect();
    write("geo.json", &format!(r#"{{"norm":"sum","terms":[{}],"label":"geometric"}}"#, terms.join(",")));
    write("line.json", r#"{"set":{"type":"finite","points":[{},{"1":"1"},{"1":"-1"}]},"x":{}}"#);
    let requests: Vec<Vec<&str>> = vec![
        vec!["delta", "--in", "box12.json", "--n", "3", "--format", "csv"],
        vec!["delta", "--in", "box12.json", "--n", "3"],
        vec!["extract", "--in", "ball.json", "--epsilon", "1/10", "--n", "4", "--seed", "5"],
        vec!["refine", "--in", "box12.json", "--epsilon", "1/10"],
        vec!["tree", "--in", "ball.json", "--epsilon", "1", "--depth", "5"],
        vec!["series", "--in", "geo.json", "--epsilon", "1/8"],
        vec!["extreme", "--in", "line.json", "--epsilon", "1/2"],
        vec!["one_sided", "--in", "ball.json", "--epsilon", "1", "--n", "4"],
    ];
    let mut identical = 0;
    let mut clean = 0;
    for req in &requests {
        let first = run_cli(dir.path(), req);
        let second = run_cli(dir.path(), req);
        if first.is_some() && first == second {
            identical += 1;
        }
        if matches!(first, Some((0, _))) {
            clean += 1;
        }
    }
    let csv = run_cli(dir.path(), &requests[0]).map(|(_, b)| String::from_utf8_lossy(&b).into_owned());
    let rows: Vec<(String, String, String)> = csv
        .as_deref()
        .unwrap_or("")
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.splitn(4, ',').collect();
            (f[0].to_string(), f[1].trim_matches('"').to_string(), f[2].trim_matches('"').to_string())
        })
        .collect();
    let expected: Vec<(String, String, String)> = [(0, "2"), (1, "1"), (2, "1"), (3, "1")]
        .iter()
        .map(|(n, v)| (n.to_string(), v.to_string(), v.to_string()))
        .collect();
    let csv_ok = rows == expected;
    outcome(
        identical == requests.len() && clean == requests.len() && csv_ok,
        format!(
            "{identical}/{} requests byte-identical on rerun, {clean} exited 0, delta CSV rows as expected: {csv_ok}",
            requests.len()
        ),
    )
}

fn main() {
    // Standard test-harness flags (e.g. --list, filters) are accepted and ignored.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let sets = random_finite_sets(SET_SEED, 200);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("inequality reproduction", Box::new(criterion_1)),
        ("characterization dichotomy", Box::new(|| criterion_2(&sets))),
        ("oracle equivalence", Box::new(|| criterion_3(&sets))),
        ("almost isometric refinement", Box::new(criterion_4)),
        ("tail-bound harness", Box::new(criterion_5)),
        ("eps-tree laws", Box::new(criterion_6)),
        ("extreme-point lattice", Box::new(|| criterion_7(&sets))),
        ("separation versus delta bound", Box::new(criterion_8)),
        ("determinism", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {} ({name}): {} ({})", k + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
