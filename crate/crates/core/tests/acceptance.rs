//! Acceptance checks for the shopping-basket case study. Prints one
//! `PASS`/`FAIL` line per criterion and exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use basketcheck::engine::{curve, push_distribution, reach_probabilities, transient_distribution, Method};
use basketcheck::pctl::{bind, parse_property};
use basketcheck::prism::BuildOptions;
use basketcheck::{check_property, cli, sim, Dtmc, SolveOptions, StateSet};
use common::{basket, fixture, goal, q};
use num_traits::ToPrimitive;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["basketcheck"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn check_text(dtmc: &Dtmc, text: &str, options: &SolveOptions) -> basketcheck::VerificationResult {
    let bound = bind(&parse_property(text).unwrap(), dtmc).unwrap().with_text(text);
    check_property(dtmc, &bound, options).unwrap()
}

fn verdicts_and_counts() -> Outcome {
    let model = fixture("shopping_basket.pm");
    let props = fixture("shopping_basket.pctl");
    let (code, out, err) = run_cli(&["check", model.to_str().unwrap(), "--props", props.to_str().unwrap()]);
    if code != 0 {
        return fail(format!("exit {code}: {err}"));
    }
    let lines: Vec<&str> = out.lines().collect();
    let expected = [
        (7, "Result: true (property satisfied in the initial state)"),
        (7, "Result: true (property satisfied in all filter states)"),
        (4, "Result: true (property satisfied in all filter states)"),
        (12, "Result: true (property satisfied in the initial state)"),
        (7, "Result: false (property not satisfied in all filter states)"),
    ];
    for (i, (count, result)) in expected.iter().enumerate() {
        let header = lines.get(2 * i).copied().unwrap_or("");
        let line = lines.get(2 * i + 1).copied().unwrap_or("");
        if !header.ends_with(&format!(": {count}")) || line != *result {
            return fail(format!("P{}: got `{header}` / `{line}`", i + 1));
        }
    }
    pass("P1-P5 counts 7, 7, 4, 12, 7; verdicts true, true, true, true, false")
}

fn numeric_results() -> Outcome {
    let d = basket();
    let cases = [
        ("P=? [F s=6]", 0.4347821160949293, q(10, 23)),
        ("P=? [F s=9 {s=10}]", 0.3999999999966359, q(2, 5)),
        ("P=? [F s=13]", 1.0, q(1, 1)),
        ("P=? [F (s=8) | (s=9)]", 0.4347821160949293, q(10, 23)),
        ("P=? [F s=4]", 0.666666030883789, q(2, 3)),
    ];
    let exact_opts = SolveOptions::with_method(Method::Exact);
    let mut worst = 0.0f64;
    for (text, published, rational) in &cases {
        for method in Method::ITERATIVE {
            let r = check_text(&d, text, &SolveOptions::with_method(method));
            let Some(basketcheck::engine::QueryValue::Scalar { value, .. }) = r.query else {
                return fail(format!("{text}: no scalar value"));
            };
            let diff = (value - published).abs();
            worst = worst.max(diff);
            if diff > 1e-4 {
                return fail(format!("{text} ({method}): {value} vs {published}"));
            }
        }
        let r = check_text(&d, text, &exact_opts);
        let Some(basketcheck::engine::QueryValue::Scalar { exact: Some(exact), .. }) = r.query else {
            return fail(format!("{text}: no exact value"));
        };
        if &exact != rational {
            return fail(format!("{text}: exact {exact} vs {rational}"));
        }
    }

    let model = fixture("shopping_basket.pm");
    let props = fixture("shopping_basket.pctl");
    let start = Instant::now();
    let (code, _, _) = run_cli(&["check", model.to_str().unwrap(), "--props", props.to_str().unwrap()]);
    let elapsed = start.elapsed();
    if code != 0 || elapsed >= Duration::from_secs(1) {
        return fail(format!("fixture run exit {code} in {elapsed:?}"));
    }
    pass(format!(
        "P6-P10 within {worst:.1e} of published values; exact 10/23, 2/5, 1, 10/23, 2/3; full run {elapsed:.2?}"
    ))
}

fn oracle_equivalence() -> Outcome {
    let d = basket();
    let start = Instant::now();
    let mut goals: Vec<StateSet> = (0..14).map(|s| StateSet::from_indices(14, [s])).collect();
    goals.push(StateSet::from_indices(14, [8, 9]));
    let mut worst = 0.0f64;
    for g in &goals {
        let exact = reach_probabilities(&d, g, &SolveOptions::with_method(Method::Exact)).unwrap();
        let exact = exact.exact.unwrap();
        for method in Method::ITERATIVE {
            let opts = SolveOptions { epsilon: 1e-10, ..SolveOptions::with_method(method) };
            let sol = match reach_probabilities(&d, g, &opts) {
                Ok(sol) => sol,
                Err(e) => return fail(format!("{method} on {:?}: {e}", g.to_vec())),
            };
            for (s, x) in exact.iter().enumerate() {
                let diff = (sol.values[s] - x.to_f64().unwrap()).abs();
                worst = worst.max(diff);
                if diff > 1e-6 {
                    return fail(format!("{method} goal {:?} state {s}: off by {diff:e}", g.to_vec()));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(5) {
        return fail(format!("took {elapsed:?}"));
    }
    pass(format!("3 methods x 15 goals, max deviation {worst:.1e}, {elapsed:.2?}"))
}

fn chapman_kolmogorov() -> Outcome {
    let d = basket();
    let n = d.num_states();
    let pi2 = transient_distribution(&d, 2);
    for (s, want) in [(0, 0.09), (1, 0.21), (2, 0.70)] {
        if (pi2[s] - want).abs() > 1e-12 {
            return fail(format!("pi_2[{s}] = {}", pi2[s]));
        }
    }
    for (m, k) in [(1, 1), (2, 3), (5, 5)] {
        for start in 0..n {
            let mut unit = vec![0.0; n];
            unit[start] = 1.0;
            let split = push_distribution(&d, push_distribution(&d, &unit, m).as_slice(), k);
            let whole = push_distribution(&d, &unit, m + k);
            for s in 0..n {
                if (split[s] - whole[s]).abs() > 1e-12 {
                    return fail(format!("P^{m}P^{k} != P^{} at ({start}, {s})", m + k));
                }
            }
        }
    }
    for start in 0..n {
        let mut dist = vec![0.0; n];
        dist[start] = 1.0;
        for step in 1..=1000 {
            dist = push_distribution(&d, &dist, 1).into_vec();
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return fail(format!("row {start} of P^{step} sums to {sum}"));
            }
        }
    }
    pass("pi_2 = (0.09, 0.21, 0.70); semigroup at (1,1), (2,3), (5,5); row sums to n=1000")
}

fn curves() -> Outcome {
    let d = basket();
    let cases = [("s=4", 0, 2.0 / 3.0), ("s=12", 0, 10.0 / 23.0), ("s=9", 10, 0.4), ("s=13", 0, 1.0)];
    for (g, from, limit) in cases {
        let points = curve(&d, &goal(&d, g), from, 10_000);
        if points.windows(2).any(|w| w[1].1 < w[0].1) {
            return fail(format!("goal {g} from {from}: curve decreases"));
        }
        let last = points.last().unwrap().1;
        if (last - limit).abs() > 1e-6 {
            return fail(format!("goal {g} from {from}: k=10000 gives {last}, want {limit}"));
        }
    }
    pass("goals 4, 12, 9 from 10, 13: monotone, k=10000 within 1e-6 of 2/3, 10/23, 2/5, 1")
}

fn simulation() -> Outcome {
    let d = basket();
    let start = Instant::now();
    let pairs: [(&str, usize); 10] = [
        ("s=12", 0),
        ("s=12", 4),
        ("s=9", 8),
        ("s=7", 0),
        ("s=12", 4),
        ("s=6", 0),
        ("s=9", 10),
        ("s=13", 0),
        ("s=8 | s=9", 0),
        ("s=4", 0),
    ];
    let mut tallies = Vec::new();
    for (g, from) in pairs {
        let goal_set = goal(&d, g);
        let exact = reach_probabilities(&d, &goal_set, &SolveOptions::with_method(Method::Exact)).unwrap();
        let truth = exact.exact.unwrap()[from].to_f64().unwrap();
        let covered = (0..20u64)
            .filter(|&seed| {
                let e = sim::estimate_reach(&d, &goal_set, from, 50_000, sim::DEFAULT_MAX_STEPS, seed);
                e.low <= truth && truth <= e.high
            })
            .count();
        if covered < 18 {
            return fail(format!("goal {g} from {from}: covered in {covered}/20 seeds"));
        }
        tallies.push(covered);
    }

    let mut counts = [0u32; 14];
    let nowhere = StateSet::empty(14);
    let steps = 100_000u64;
    for seed in 0..steps {
        let path = sim::sample_path(&d, 10, seed, 1, &nowhere);
        counts[path.states[1]] += 1;
    }
    for (s, want) in [(8, 0.25), (9, 0.25), (11, 0.5)] {
        let freq = f64::from(counts[s]) / steps as f64;
        if (freq - want).abs() > 0.01 {
            return fail(format!("one-step frequency 10 -> {s} is {freq}"));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(30) {
        return fail(format!("took {elapsed:?}"));
    }
    pass(format!("coverage per pair {tallies:?} of 20; one-step frequencies within 0.01; {elapsed:.2?}"))
}

fn write_model(dir: &std::path::Path, name: &str, commands: &str) -> String {
    let path = dir.join(name);
    let text = format!("dtmc\n\nmodule m\n    s : [0..13] init 0;\n{commands}\nendmodule\n");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn parser_totality() -> Outcome {
    let d = match basketcheck::load_model(basketcheck::SHOPPING_BASKET_MODEL, BuildOptions::default()) {
        Ok(d) => d,
        Err(e) => return fail(format!("fixture does not build: {e}")),
    };
    if d.num_states() != 14 || d.num_transitions() != 23 || d.validate().is_err() {
        return fail(format!("{} states, {} transitions", d.num_states(), d.num_transitions()));
    }

    let bad_row = Dtmc::from_float_rows(0, &[&[(0, 0.5), (1, 0.4)], &[(1, 1.0)]]);
    match bad_row.validate() {
        Err(diags) if diags.iter().any(|x| x.to_string().contains("row sum 0.9 at state 0")) => {}
        other => return fail(format!("row-sum diagnostic missing: {other:?}")),
    }

    let dir = std::env::temp_dir().join(format!("basketcheck-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cases = [
        (
            "overlap.pm",
            "    [] s<13 -> 1.0:(s'=s+1);\n    [] s=0 -> 1.0:(s'=0);\n    [] s=13 -> true;",
            "overlapping guards in state s=0",
        ),
        (
            "rowsum.pm",
            "    [] s<13 -> 0.5:(s'=s+1) + 0.4:(s'=0);\n    [] s=13 -> true;",
            "branch probabilities sum to 0.9, not 1",
        ),
        (
            "range.pm",
            "    [] s<13 -> 0.5:(s'=20) + 0.5:(s'=0);\n    [] s=13 -> true;",
            "line 5, column 5: update sets `s` to 20, outside its range [0..13]",
        ),
        (
            "semicolon.pm",
            "    [] s=0 -> 0.3:(s'=0)\n    [] s=13 -> true;",
            "expected `;` to end command",
        ),
    ];
    for (name, commands, diagnostic) in cases {
        let path = write_model(&dir, name, commands);
        let (code, _, err) = run_cli(&["info", &path]);
        if code != cli::EXIT_ERROR || !err.contains(diagnostic) {
            return fail(format!("{name}: exit {code}, stderr `{}`", err.trim()));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    pass("fixture builds 14 states / 23 transitions; overlap, row sum, range escape, missing semicolon diagnosed with exit 1")
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 verdicts and counts", verdicts_and_counts),
        ("2 numeric results", numeric_results),
        ("3 oracle equivalence", oracle_equivalence),
        ("4 transient / Chapman-Kolmogorov", chapman_kolmogorov),
        ("5 bounded-reachability curves", curves),
        ("6 simulation cross-check", simulation),
        ("7 parser totality", parser_totality),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        let outcome = criterion();
        let tag = if outcome.ok { "PASS" } else { "FAIL" };
        println!("{tag} criterion {name}: {}", outcome.detail);
        failed += usize::from(!outcome.ok);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
