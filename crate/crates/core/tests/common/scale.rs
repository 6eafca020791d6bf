//! Synthetic order-handling model for the scale smoke test: 25 transitions,
//! 12 places, 10 constraints, with a loop back to the split.

use std::time::{Duration, Instant};

use mixalign::declare::instantiate;
use mixalign::{
    check_log, AlignOptions, CheckOptions, Constraint, EventLog, HeuristicKind, LogResult, MixedModel, Mode,
    NetBuilder, Rational, RationalCostScheme, Template,
};
use rand::Rng;

use super::checks::CheckResult;

/// (name, label, inputs, outputs); `None` labels are silent.
type TransitionRow = (&'static str, Option<&'static str>, &'static [usize], &'static [usize]);

const TRANSITIONS: [TransitionRow; 25] = [
    ("t0", Some("a"), &[0], &[1]),
    ("t1", Some("b"), &[1], &[2, 3]),
    ("t2", Some("c1"), &[2], &[4]),
    ("t3", Some("c2"), &[2], &[4]),
    ("t4", Some("c3"), &[2], &[4]),
    ("t5", Some("d1"), &[3], &[5]),
    ("t6", Some("d2"), &[3], &[5]),
    ("t7", Some("d3"), &[3], &[5]),
    ("t8", Some("e"), &[4, 5], &[6]),
    ("t9", Some("f1"), &[6], &[7]),
    ("t10", Some("f2"), &[6], &[7]),
    ("t11", Some("g"), &[7], &[8]),
    ("t12", Some("h1"), &[8], &[9]),
    ("t13", Some("h2"), &[8], &[9]),
    ("t14", Some("h3"), &[8], &[9]),
    ("t15", Some("j"), &[9], &[1]),
    ("t16", Some("k"), &[9], &[10]),
    ("t17", Some("l1"), &[10], &[11]),
    ("t18", Some("l2"), &[10], &[11]),
    ("t19", None, &[8], &[9]),
    ("t20", None, &[6], &[7]),
    ("t21", Some("g2"), &[7], &[8]),
    ("t22", Some("q"), &[10], &[11]),
    ("t23", Some("c4"), &[2], &[4]),
    ("t24", Some("d4"), &[3], &[5]),
];

const CONSTRAINTS: [(Template, usize, Option<usize>); 10] = [
    (Template::Response, 2, Some(12)),
    (Template::Precedence, 5, Some(17)),
    (Template::NotSuccession, 3, Some(18)),
    (Template::RespondedExistence, 4, Some(22)),
    (Template::NotCoExistence, 7, Some(22)),
    (Template::AlternatePrecedence, 11, Some(13)),
    (Template::ChainPrecedence, 8, Some(10)),
    (Template::Init, 0, None),
    (Template::CoExistence, 23, Some(24)),
    (Template::AlternateResponse, 1, Some(8)),
];

const LOOP: usize = 15;
const EXIT: usize = 16;
const ALIENS: [&str; 3] = ["u1", "u2", "u3"];

pub fn model() -> MixedModel {
    let mut b = NetBuilder::new();
    for p in 0..12 {
        b.place(&format!("p{p}"));
    }
    for (name, label, inputs, outputs) in TRANSITIONS {
        b.transition(name, label);
        for p in inputs {
            b.arc(&format!("p{p}"), name);
        }
        for p in outputs {
            b.arc(name, &format!("p{p}"));
        }
    }
    b.initial("p0", 1).final_marking("p11", 1);
    let net = b.build().expect("synthetic net is well formed");
    let constraints = CONSTRAINTS
        .iter()
        .enumerate()
        .map(|(k, &(template, a, b))| {
            let params = std::iter::once(a).chain(b).map(mixalign::TransitionId).collect();
            instantiate(Constraint::new(format!("k{}", k + 1), template, params, None), TRANSITIONS.len())
                .expect("synthetic constraints are valid")
        })
        .collect();
    MixedModel::new(net, constraints)
}

/// A random full run, taking the loop with probability `p_loop` whenever
/// both the loop and the exit are admitted.
fn full_run<R: Rng>(rng: &mut R, mp: &MixedModel, p_loop: f64) -> Vec<mixalign::TransitionId> {
    'attempt: loop {
        let mut config = mp.initial_configuration();
        let mut run = Vec::new();
        while !mp.is_final(&config) {
            let admitted = mp.admitted_transitions(&config);
            if admitted.is_empty() || run.len() > 120 {
                continue 'attempt;
            }
            let ids: Vec<usize> = admitted.iter().map(|t| t.0).collect();
            let t = if ids.contains(&LOOP) && ids.contains(&EXIT) {
                mixalign::TransitionId(if rng.gen_bool(p_loop) { LOOP } else { EXIT })
            } else {
                admitted[rng.gen_range(0..admitted.len())]
            };
            config = mp.step(&config, t).expect("admitted transitions are enabled");
            run.push(t);
        }
        if mp.all_accepting(&config.states) {
            return run;
        }
    }
}

/// Observable full runs with 5% deletions and 5% insertions (half of them
/// labels foreign to the model).
pub fn traces<R: Rng>(rng: &mut R, mp: &MixedModel, count: usize) -> Vec<Vec<String>> {
    let labels: Vec<&str> = TRANSITIONS.iter().filter_map(|t| t.1).collect();
    (0..count)
        .map(|_| {
            let clean = mp.net.observable(&full_run(rng, mp, 0.72));
            let mut noisy = Vec::with_capacity(clean.len() + 2);
            for event in clean {
                if rng.gen_bool(0.05) {
                    let inserted = if rng.gen_bool(0.5) {
                        ALIENS[rng.gen_range(0..ALIENS.len())]
                    } else {
                        labels[rng.gen_range(0..labels.len())]
                    };
                    noisy.push(inserted.to_string());
                }
                if !rng.gen_bool(0.05) {
                    noisy.push(event);
                }
            }
            noisy
        })
        .collect()
}

fn timed(log: &EventLog, mp: &MixedModel, heuristic: HeuristicKind) -> (LogResult<Rational>, Duration) {
    let options = CheckOptions {
        mode: Mode::Full,
        align: AlignOptions {
            heuristic,
            ..AlignOptions::default()
        },
        ..CheckOptions::default()
    };
    let start = Instant::now();
    let result = check_log(log, mp, &RationalCostScheme::default(), &options);
    (result, start.elapsed())
}

/// Aligns `count` traces in full mode with both heuristics.
pub fn smoke(count: usize, budget: Duration) -> CheckResult {
    use rand::SeedableRng;
    let mp = model();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let traces = traces(&mut rng, &mp, count);
    let mean_len = traces.iter().map(Vec::len).sum::<usize>() as f64 / count as f64;
    let log = EventLog::from_traces(traces);

    let (unmatched, t_unmatched) = timed(&log, &mp, HeuristicKind::Unmatched);
    let (zero, t_zero) = timed(&log, &mp, HeuristicKind::Zero);
    let expansions = |r: &LogResult<Rational>| -> u64 {
        r.variants.iter().filter_map(|v| v.outcome.as_ref().ok()).map(|o| o.alignment.expansions).sum()
    };

    let mut problems = Vec::new();
    if unmatched.failed_variants > 0 || zero.failed_variants > 0 {
        problems.push(format!("{} / {} variants failed", unmatched.failed_variants, zero.failed_variants));
    }
    let differing = unmatched
        .variants
        .iter()
        .zip(&zero.variants)
        .filter(|(u, z)| {
            let cost = |v: &mixalign::fitness::VariantResult<Rational>| v.outcome.as_ref().ok().map(|o| o.alignment.total_cost);
            cost(u) != cost(z)
        })
        .count();
    if differing > 0 {
        problems.push(format!("{differing} variants with different costs"));
    }
    if t_unmatched > budget {
        problems.push(format!("unmatched took {t_unmatched:?}, over {budget:?}"));
    }
    if t_zero < t_unmatched {
        problems.push(format!("zero ({t_zero:?}) faster than unmatched ({t_unmatched:?})"));
    }
    let summary = format!(
        "{count} traces (mean length {mean_len:.1}, {} variants): unmatched {:.2}s / {} expansions, zero {:.2}s / {} expansions",
        log.variant_count(),
        t_unmatched.as_secs_f64(),
        expansions(&unmatched),
        t_zero.as_secs_f64(),
        expansions(&zero)
    );
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", problems.join("; ")))
    }
}
