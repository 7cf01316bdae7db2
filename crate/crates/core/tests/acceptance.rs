//! The eight acceptance criteria, each at full size. Prints one PASS/FAIL
//! line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nupbr_core::harness::gen::{gen_model, random_nupbr_process, rng_for, ModelGenParams};
use nupbr_core::harness::suites::{run_suite, SuiteId, TheoremReport};
use nupbr_core::measures::{qt, qtilde, single_jump, PredictableTime};
use nupbr_core::nupbr::nupbr_check;
use nupbr_core::process::{stop, Process};
use nupbr_core::random_time::{exceptional_sets, honesty_violation};
use nupbr_core::rational::{int, ratio, zero, Rational};
use nupbr_core::{azema, enlarge, Model};
use num_traits::{One, Zero};

const MODELS: usize = 1000;
const SEED: u64 = 20_240_601;

fn params() -> ModelGenParams {
    ModelGenParams { max_outcomes: 12, max_horizon: 4, n_assets: 2, ..ModelGenParams::default() }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn summary(r: &TheoremReport) -> String {
    format!(
        "{}: {} models, {} cases, {} agreements, {} disagreements",
        r.suite,
        r.models_tested,
        r.cases,
        r.agreements,
        r.disagreements.len()
    )
}

fn first_problem(r: &TheoremReport) -> String {
    r.disagreements
        .first()
        .map(|d| format!(" [first: model {} `{}` {:?} {:?}]", d.index, d.label, d.truths, d.error))
        .unwrap_or_default()
}

/// `P(τ ∈ times | atom of F_t containing ω)` by enumeration.
fn brute_conditional(model: &Model, t: usize, w: usize, pred: impl Fn(Option<usize>) -> bool) -> Rational {
    let block = model.f.at(t).block_containing(w);
    let (mut hit, mut total) = (zero(), zero());
    for &v in block {
        let p = model.space.prob(v).clone();
        if pred(model.tau.time(v)) {
            hit += &p;
        }
        total += p;
    }
    hit / total
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let report = run_suite(SuiteId::Azema, MODELS, SEED, &params());
    let elapsed = start.elapsed();
    // Independent enumeration of Z and Z̃ on the same corpus.
    let mut brute_mismatches = 0;
    for i in 0..MODELS {
        let p = SuiteId::Azema.model_params(&params(), SEED, i);
        let model = gen_model(&p).expect("generation");
        let az = azema(&model.tau, &model.f, &model.space).expect("azema");
        for t in 0..=model.horizon() {
            for w in 0..model.n_outcomes() {
                let z = brute_conditional(&model, t, w, |s| s.is_none_or(|s| s > t));
                let zt = brute_conditional(&model, t, w, |s| s.is_none_or(|s| s >= t));
                if &z != az.z_at(t, w) || &zt != az.z_tilde_at(t, w) {
                    brute_mismatches += 1;
                }
            }
        }
    }
    let in_time = elapsed <= Duration::from_secs(30);
    Outcome {
        pass: report.passed() && brute_mismatches == 0 && in_time,
        detail: format!(
            "{}; enumeration mismatches {brute_mismatches}; {:.1}s (limit 30s){}",
            summary(&report),
            elapsed.as_secs_f64(),
            first_problem(&report)
        ),
    }
}

fn deflator_criterion(id: SuiteId) -> Outcome {
    let report = run_suite(id, MODELS, SEED, &params());
    let conditioned = report
        .outcomes
        .iter()
        .flat_map(|o| &o.cases)
        .filter(|c| c.label.starts_with("M=") && c.truths[0])
        .count();
    let deflators = report.outcomes.iter().flat_map(|o| &o.cases).filter(|c| c.label == "deflator").count();
    Outcome {
        pass: report.passed() && deflators == MODELS && conditioned >= 500,
        detail: format!(
            "{}; {deflators} deflators built; {conditioned} sampled M satisfy the condition (need 500){}",
            summary(&report),
            first_problem(&report)
        ),
    }
}

fn criterion_4() -> Outcome {
    let report = run_suite(SuiteId::JumpRatio, MODELS, SEED, &params());
    let after_models = report
        .outcomes
        .iter()
        .filter(|o| o.cases.iter().any(|c| c.label.starts_with("after")))
        .count();
    Outcome {
        pass: report.passed() && after_models > 0,
        detail: format!(
            "{}; after-side identities checked on {after_models} models{}",
            summary(&report),
            first_problem(&report)
        ),
    }
}

fn criterion_5() -> Outcome {
    let suites = [
        SuiteId::Main3,
        SuiteId::Cruciallemma2,
        SuiteId::Cruciallemma1,
        SuiteId::Cruciallemma2singlejump,
        SuiteId::Main4,
        SuiteId::Multijumps,
        SuiteId::Corollary,
        SuiteId::Cruciallemma3,
        SuiteId::PreservationBefore,
        SuiteId::PreservationAfter,
    ];
    let start = Instant::now();
    let mut pass = true;
    let mut lines = Vec::new();
    for id in suites {
        let r = run_suite(id, MODELS, SEED, &params());
        let both_sides = r.histogram.len() > 1;
        pass &= r.passed() && both_sides;
        lines.push(format!(
            "{} {}/{} {:?}{}",
            id,
            r.agreements,
            r.cases,
            r.histogram,
            first_problem(&r)
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed <= Duration::from_secs(600);
    Outcome { pass, detail: format!("{:.1}s (limit 600s)\n    {}", elapsed.as_secs_f64(), lines.join("\n    ")) }
}

/// `1_E - P(E | F_{t-1})` on the whole space, `E = {Z̃_t = level}`, by enumeration.
fn witness(model: &Model, t: usize, level: &Rational, z_tilde: impl Fn(usize) -> Rational) -> Vec<Rational> {
    (0..model.n_outcomes())
        .map(|w| {
            let block = model.f.before(t).block_containing(w);
            let mass: Rational = block.iter().map(|&v| model.space.prob(v).clone()).sum();
            let hit: Rational =
                block.iter().filter(|&&v| &z_tilde(v) == level).map(|&v| model.space.prob(v).clone()).sum();
            let ind = if &z_tilde(w) == level { Rational::one() } else { zero() };
            ind - hit / mass
        })
        .collect()
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let (mut violations, mut nonempty, mut samples) = (0, 0, 0);
    for (side, family) in [("before", SuiteId::PreservationBefore), ("after", SuiteId::PreservationAfter)] {
        for i in 0..MODELS {
            let p = family.model_params(&params(), SEED, i);
            let model = gen_model(&p).expect("generation");
            let az = azema(&model.tau, &model.f, &model.space).expect("azema");
            let g = enlarge(&model.f, &model.tau);
            let sets = exceptional_sets(&az);
            let (events, level) = match side {
                "before" => (&sets.before, zero()),
                _ => {
                    assert!(honesty_violation(&model.tau, &model.f).is_none());
                    (&sets.after, Rational::one())
                }
            };
            for t in 1..=model.horizon() {
                let charged = events.iter().any(|e| e.t == t);
                let xi = witness(&model, t, &level, |w| az.z_tilde_at(t, w).clone());
                let pt = PredictableTime::deterministic(model.n_outcomes(), t, &model.f).unwrap();
                let m = single_jump(&pt, &xi, &model.f).unwrap();
                let x = if side == "before" {
                    stop(&m, &model.tau)
                } else {
                    nupbr_core::process::after(&m, &model.tau)
                };
                let verdict = nupbr_check(&x, &g, &model.space).unwrap();
                match verdict.witness() {
                    Some(s) => {
                        if !charged || !s.is_valid_certificate(&x, &g, &model.space) {
                            failures.push(format!("{side} model {i} t={t}: unexpected or invalid violation"));
                        }
                        violations += 1;
                    }
                    None if charged => failures.push(format!("{side} model {i} t={t}: witness not violated")),
                    None => {}
                }
            }
            if events.is_empty() {
                let mut rng = rng_for(p.seed, 99);
                for _ in 0..4 {
                    let x = random_nupbr_process(&mut rng, &model.f, &model.space, 2);
                    let y = if side == "before" {
                        stop(&x, &model.tau)
                    } else {
                        nupbr_core::process::after(&x, &model.tau)
                    };
                    samples += 1;
                    if !nupbr_check(&y, &g, &model.space).unwrap().holds() {
                        failures.push(format!("{side} model {i}: sample violated with empty set"));
                    }
                }
            } else {
                nonempty += 1;
            }
        }
    }
    Outcome {
        pass: failures.is_empty() && nonempty > 0,
        detail: format!(
            "{nonempty} models with a nonempty set, {violations} certified witness violations, {samples} samples on empty sets{}",
            failures.first().map(|f| format!(" [first failure: {f}]")).unwrap_or_default()
        ),
    }
}

fn criterion_7() -> Outcome {
    let report = run_suite(SuiteId::LpSelftest, MODELS, SEED, &params());
    let staircases = report
        .outcomes
        .iter()
        .flat_map(|o| &o.cases)
        .filter(|c| c.label.starts_with("staircase"))
        .count();
    Outcome {
        pass: report.passed() && staircases >= 1000,
        detail: format!("{}; {staircases} staircases{}", summary(&report), first_problem(&report)),
    }
}

fn criterion_8() -> Outcome {
    let model = Model::worked_example();
    let az = azema(&model.tau, &model.f, &model.space).unwrap();
    let g = enlarge(&model.f, &model.tau);
    let mut problems = Vec::new();
    let mut expect = |what: &str, ok: bool| {
        if !ok {
            problems.push(what.to_string());
        }
    };
    // Hand computation: P uniform, τ = (1, 0), F_0 trivial, F_1 discrete.
    // Z_0 = P(τ > 0) = 1/2, Z̃_1 = 1_{τ ≥ 1} = (1, 0), Z_1 = 0.
    // D^{o,F}_t = Σ_{s ≤ t} P(τ = s | F_s): D_0 = 1/2, D_1 = 1/2 + (1, 0).
    // m_1 = Z_1 + D_1 = (3/2, 1/2).
    expect("Z_0 = 1/2", az.z_at(0, 0) == &ratio(1, 2) && az.z_at(0, 1) == &ratio(1, 2));
    expect("Z~_1 = (1, 0)", az.z_tilde_at(1, 0) == &int(1) && az.z_tilde_at(1, 1).is_zero());
    expect(
        "m_1 = (3/2, 1/2)",
        az.m.scalar_at(1, 0) == &ratio(3, 2) && az.m.scalar_at(1, 1) == &ratio(1, 2),
    );
    let sets = exceptional_sets(&az);
    expect(
        "before-set = {w2} at t=1",
        sets.before.len() == 1 && sets.before[0].t == 1 && sets.before[0].outcomes == vec![1],
    );
    let stopped = stop(&model.s, &model.tau);
    let verdict = nupbr_check(&stopped, &g, &model.space).unwrap();
    match verdict.witness() {
        Some(s) => expect(
            "G-arbitrage (t=1, atom {w1}, H=1)",
            s.t == 1 && s.atom == vec![0] && s.h == vec![int(1)] && s.is_valid_certificate(&stopped, &g, &model.space),
        ),
        None => expect("S^tau violates NUPBR(G)", false),
    }
    // Main-3 assertions at T = 1 with ξ = (1, -1). Z_0 > 0, so S = ξ 1_{[1,∞)}.
    let pt = PredictableTime::deterministic(2, 1, &model.f).unwrap();
    let xi = vec![int(1), int(-1)];
    let s = single_jump(&pt, &xi, &model.f).unwrap();
    let s_tilde = single_jump(&pt, &[int(1), zero()], &model.f).unwrap();
    let a = nupbr_check(&stop(&s, &model.tau), &g, &model.space).unwrap().holds();
    let b = nupbr_check(&s_tilde, &model.f, &model.space).unwrap().holds();
    let q_tilde = qtilde(&pt, &az, &model.f, &model.space).unwrap();
    let q = qt(&pt, &az, &model.f, &model.space).unwrap();
    // Both measures put all mass on w1 (density (2, 0)), where S jumps by +1.
    expect("Q~_T density (2, 0)", q_tilde.density == vec![int(2), zero()]);
    expect("Q_T density (2, 0)", q.density == vec![int(2), zero()]);
    let c = nupbr_check(&s, &model.f, &q_tilde.measure).unwrap().holds();
    let d = nupbr_check(&s, &model.f, &q.measure).unwrap().holds();
    expect("all four main-3 assertions fail", !a && !b && !c && !d);
    // ΔS^τ on w1 is +1 with positive mass and 0 on w2: a one-sided bet.
    let one_step: Process = stop(&model.s, &model.tau);
    expect("S^tau increments (1, 0)", one_step.increment(1, 0) == vec![int(1)] && one_step.increment(1, 1)[0].is_zero());
    Outcome { pass: problems.is_empty(), detail: if problems.is_empty() { "all hand values reproduced".into() } else { format!("mismatches: {problems:?}") } }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 azema core", criterion_1),
        ("2 deflator before tau", || deflator_criterion(SuiteId::DeflatorBefore)),
        ("3 deflator after tau", || deflator_criterion(SuiteId::DeflatorAfter)),
        ("4 jump-ratio identities", criterion_4),
        ("5 equivalence suites", criterion_5),
        ("6 constructive counterexamples", criterion_6),
        ("7 lp decider self-tests", criterion_7),
        ("8 worked example", criterion_8),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        all &= outcome.pass;
        println!(
            "criterion {name}: {} ({:.1}s) {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
