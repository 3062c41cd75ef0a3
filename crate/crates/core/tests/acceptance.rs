//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use idnc::graph::{check_clique, DEFAULT_ENUMERATION_BOUND};
use idnc::policies::{max_delay_receivers, prob_max_delay_increase, select_clique_exact, select_clique_mdd};
use idnc::sim::{run_experiment, transmit_once};
use idnc::{Deadline, ExperimentStats, IdncGraph, Objective, PolicyKind, SimConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn experiment(p: f64, policy: PolicyKind, deadline: Deadline) -> ExperimentStats {
    let mut cfg = SimConfig::new(60, 30, p);
    cfg.frames = 1000;
    cfg.policy = policy;
    cfg.deadline = deadline;
    run_experiment(&cfg).expect("valid configuration")
}

/// Served fraction at T = 40 for M = 60, N = 30, P = 0.5.
fn served_at_forty(mdd: &ExperimentStats, sdd: &ExperimentStats) -> Verdict {
    let (a, b) = (mdd.mean_served_fraction, sdd.mean_served_fraction);
    verdict(
        a >= 0.97 && (0.85..=0.95).contains(&b),
        format!("served at T=40: mdd {a:.4} (need >= 0.97), sdd {b:.4} (need in [0.85, 0.95])"),
    )
}

/// Sum delay at P = 0.5 and max delay across P.
fn crossover(mdd_half: &ExperimentStats, sdd_half: &ExperimentStats) -> Verdict {
    let mut pass = mdd_half.mean_sum_delay <= sdd_half.mean_sum_delay;
    let mut detail = format!(
        "sum delay at P=0.5: mdd {:.2} vs sdd {:.2}; max delay",
        mdd_half.mean_sum_delay, sdd_half.mean_sum_delay
    );
    for p in [0.1, 0.25, 0.4, 0.5] {
        let (m, s) = if p == 0.5 {
            (mdd_half.mean_max_delay, sdd_half.mean_max_delay)
        } else {
            let m = experiment(p, PolicyKind::MddGreedy, Deadline::Infinite).mean_max_delay;
            let s = experiment(p, PolicyKind::SddGreedy, Deadline::Infinite).mean_max_delay;
            (m, s)
        };
        pass &= m <= s;
        detail += &format!(" P={p}: {m:.2} vs {s:.2};");
    }
    verdict(pass, detail)
}

/// Empirical max-delay-increase frequency against the analytic value, on
/// states where that value is strictly between 0 and 1.
fn analytic_oracle() -> Verdict {
    const STATES: usize = 60;
    const REPS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0e5);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut tested = 0;
    while tested < STATES {
        let state = common::random_state(&mut rng, 8, 8, 0.95);
        let graph = IdncGraph::build(state.matrix());
        let clique = common::random_maximal_clique(&graph, &mut rng);
        let top = max_delay_receivers(&state.delays());
        let wanting = state.matrix().wanting_receivers();
        let expected = prob_max_delay_increase(&clique, &top, &wanting, &state.erasure_probs());
        if expected <= 0.0 || expected >= 1.0 {
            continue;
        }
        tested += 1;
        let mut hits = 0;
        for _ in 0..REPS {
            let mut trial = state.clone();
            if transmit_once(&mut trial, &clique, &mut rng).unwrap().x_event {
                hits += 1;
            }
        }
        let freq = hits as f64 / REPS as f64;
        let z = (freq - expected).abs() / (expected * (1.0 - expected) / REPS as f64).sqrt();
        worst = worst.max(z);
        if z > 3.0 {
            failures.push(format!(
                "state {tested}: freq {freq:.4} vs {expected:.4} ({z:.2} sigma)"
            ));
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{STATES} states x {REPS} transmissions, worst deviation {worst:.2} sigma (limit 3){}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {}", failures.join("; "))
            }
        ),
    )
}

/// Exhaustive oracle never loses to the greedy, and both emit valid cliques.
fn exact_dominance() -> Verdict {
    const INSTANCES: usize = 2000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0);
    let mut violations = Vec::new();
    let mut strict = 0;
    for n in 0..INSTANCES {
        let state = common::random_state(&mut rng, 5, 5, 1.0);
        let graph = IdncGraph::build(state.matrix());
        let (delays, p) = (state.delays(), state.erasure_probs());
        let greedy = select_clique_mdd(&graph, &delays, &p).unwrap();
        let exact = select_clique_exact(&graph, &delays, &p, Objective::Mdd, DEFAULT_ENUMERATION_BOUND).unwrap();
        for (name, c) in [("greedy", &greedy), ("exact", &exact)] {
            if let Err(d) = check_clique(&graph, state.matrix(), c) {
                violations.push(format!("instance {n}: {name} {c} invalid: {d:?}"));
            }
        }
        let top = max_delay_receivers(&delays);
        let wanting = state.matrix().wanting_receivers();
        let (g, e) = (
            prob_max_delay_increase(&greedy, &top, &wanting, &p),
            prob_max_delay_increase(&exact, &top, &wanting, &p),
        );
        if e > g + 1e-12 {
            violations.push(format!("instance {n}: exact {e} > greedy {g}"));
        }
        if e < g - 1e-12 {
            strict += 1;
        }
    }
    verdict(
        violations.is_empty(),
        format!(
            "{INSTANCES} instances, exact strictly better on {strict}, {} violations{}",
            violations.len(),
            violations.first().map(|v| format!(" (first: {v})")).unwrap_or_default()
        ),
    )
}

/// Randomised invariants plus byte-identical CSV across two CLI runs.
fn invariant_suite() -> Verdict {
    const CASES: usize = 10_000;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a);
    let mut failures = Vec::new();
    let mut checks = 0;
    for n in 0..CASES {
        let state = common::random_state(&mut rng, 8, 8, 0.95);
        let results = [
            common::check_conservation(&state),
            common::check_adjacency(&state),
            common::check_layers(&state),
            common::check_prob_bounds(&state, &mut rng),
            common::check_delay_steps(state.clone(), &mut rng, 200),
        ];
        checks += results.len();
        for r in results {
            if let Err(e) = r {
                failures.push(format!("case {n}: {e}"));
            }
        }
    }

    let run = || {
        Command::new(env!("CARGO_BIN_EXE_idnc"))
            .args(["--receivers", "12", "--packets", "8", "--frames", "40", "--seed", "7"])
            .args(["--sweep", "erasure=0.1:0.2:0.5"])
            .output()
            .expect("run idnc")
    };
    let (a, b) = (run(), run());
    let identical = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    if !identical {
        failures.push("two seeded CLI runs produced different CSV".into());
    }
    let elapsed = started.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        failures.push(format!("took {elapsed:.1}s (limit 60s)"));
    }
    verdict(
        failures.is_empty(),
        format!(
            "{CASES} random states, {checks} checks, seeded CSV identical: {identical}, {elapsed:.1}s{}",
            failures
                .first()
                .map(|f| format!("; first failure: {f}"))
                .unwrap_or_default()
        ),
    )
}

fn report(name: &str, v: &Verdict) {
    println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
}

fn main() -> ExitCode {
    let mut all = true;
    let mut record = |name: &str, v: Verdict| {
        report(name, &v);
        all &= v.pass;
    };

    record("analytic oracle", analytic_oracle());
    record("exact dominance", exact_dominance());
    record("invariants", invariant_suite());

    let t = Deadline::Finite(40);
    let mdd = experiment(0.5, PolicyKind::MddGreedy, t);
    let sdd = experiment(0.5, PolicyKind::SddGreedy, t);
    record("served receivers", served_at_forty(&mdd, &sdd));
    record("crossover", crossover(&mdd, &sdd));

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
