//! Checks shared by the integration tests and the acceptance runner. Each
//! returns a one-line summary on success and a description of the first
//! failures otherwise.

use std::collections::VecDeque;

use mixalign::aligner::{align_observed, AlignmentProblem};
use mixalign::oracle::{costs_agree, oracle_remaining_cost};
use mixalign::{
    align, oracle_align, AlignError, AlignOptions, Fsa, HeuristicKind, Mode, OracleError, OracleLimits, Rational,
    RationalCostScheme, RunKind, Template, TruthStatus,
};

use super::Instance;

pub type CheckResult = Result<String, String>;

/// Table patterns, written independently of the library, over `a`, `b` and
/// `x` (any other transition).
fn table_pattern(template: Template, n: u32) -> Vec<String> {
    let p = |s: &str| vec![s.to_string()];
    match template {
        Template::Existence => vec![format!(".*(a.*){{{n}}}")],
        Template::Absence => vec![format!("[^a]*(a?[^a]*){{{n}}}")],
        Template::Exactly => vec![format!("[^a]*(a[^a]*){{{n}}}")],
        Template::Unique => p("[^a]*(a?[^a]*){1}"),
        Template::Init => p("(a.*)?"),
        Template::End => p(".*a"),
        Template::RespondedExistence => p("[^a]*((a.*b.*)|(b.*a.*))?"),
        Template::CoExistence => p("[^ab]*((a.*b.*)|(b.*a.*))?"),
        Template::Response => p("[^a]*(a.*b)*[^a]*"),
        Template::Precedence => p("[^b]*(a.*b)*[^b]*"),
        Template::AlternateResponse => p("[^a]*(a[^a]*b[^a]*)*"),
        Template::AlternatePrecedence => p("[^b]*(a[^b]*b[^b]*)*"),
        Template::ChainResponse => p("[^a]*(ab[^a]*)*"),
        Template::ChainPrecedence => p("[^b]*(ab[^b]*)*"),
        Template::NotCoExistence => p("[^ab]*((a[^b]*)|(b[^a]*))?"),
        Template::NotSuccession => p("[^a]*(a[^b]*)*"),
        Template::NotChainSuccession => p("[^a]*(a+[^ab][^a]*)*a*"),
        Template::Choice => p(".*[ab].*"),
        Template::ExclusiveChoice => p("[^b]*a[^b]*|[^a]*b[^a]*"),
        // Conjunctions of the two halves.
        Template::Succession => vec!["[^a]*(a.*b)*[^a]*".into(), "[^b]*(a.*b)*[^b]*".into()],
        Template::AlternateSuccession => vec!["[^a]*(a[^a]*b[^a]*)*".into(), "[^b]*(a[^b]*b[^b]*)*".into()],
    }
}

/// Rewrites `.` and negated classes over the concrete alphabet `{a, b, x}`.
fn concrete(pattern: &str) -> String {
    let mut out = String::from("^(?:");
    let mut chars = pattern.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '.' => out.push_str("[abx]"),
            '[' if chars.peek() == Some(&'^') => {
                chars.next();
                let mut excluded = Vec::new();
                for d in chars.by_ref() {
                    if d == ']' {
                        break;
                    }
                    excluded.push(d);
                }
                out.push('[');
                out.extend(['a', 'b', 'x'].into_iter().filter(|s| !excluded.contains(s)));
                out.push(']');
            }
            _ => out.push(c),
        }
    }
    out.push_str(")$");
    out
}

fn words(max_len: usize) -> Vec<String> {
    let mut all = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|w| ['a', 'b', 'x'].map(|c| format!("{w}{c}")))
            .collect();
        all.extend(frontier.iter().cloned());
    }
    all
}

fn automaton_accepts(fsa: &Fsa, word: &str) -> bool {
    let alphabet = fsa.alphabet();
    let classes: Vec<_> = word
        .chars()
        .map(|c| match c {
            'a' => alphabet.param(0),
            'b' if alphabet.arity() > 1 => alphabet.param(1),
            _ => alphabet.other(),
        })
        .collect();
    fsa.accepts(&classes)
}

/// Automaton acceptance against the `regex` crate on every word over
/// `{a, b, x}` of length at most 5, for every template (counted ones with
/// n = 1, 2, 3).
pub fn template_equivalence() -> CheckResult {
    let all_words = words(5);
    let mut mismatches = Vec::new();
    let mut checked = 0usize;
    let mut instances = 0usize;
    for template in Template::ALL {
        let counts: Vec<Option<u32>> = if template.is_counted() { vec![Some(1), Some(2), Some(3)] } else { vec![None] };
        for n in counts {
            instances += 1;
            let fsa = template.automaton(n).map_err(|e| format!("{template:?}: {e}"))?;
            let oracles: Vec<regex::Regex> = table_pattern(template, n.unwrap_or(1))
                .iter()
                .map(|p| regex::Regex::new(&concrete(p)).expect("valid oracle pattern"))
                .collect();
            for w in &all_words {
                checked += 1;
                let expected = oracles.iter().all(|r| r.is_match(w));
                if automaton_accepts(&fsa, w) != expected {
                    mismatches.push(format!("{}(n={n:?}) on '{w}': oracle {expected}", template.name()));
                }
            }
        }
    }
    if mismatches.is_empty() {
        Ok(format!("{instances} template instances, {checked} words, 0 mismatches"))
    } else {
        Err(format!("{} mismatches, e.g. {}", mismatches.len(), mismatches[..mismatches.len().min(5)].join("; ")))
    }
}

fn same_error(a: &AlignError, o: &OracleError) -> bool {
    matches!(
        (a, o),
        (AlignError::NoFullRun, OracleError::NoFullRun) | (AlignError::NoRunExists, OracleError::NoRunExists)
    )
}

/// Aligner against the oracle on every trace, mode and heuristic.
pub fn oracle_equivalence(corpus: &[Instance]) -> CheckResult {
    let limits = OracleLimits::default();
    let (mut solved, mut unsolvable, mut over_limit) = (0usize, 0usize, 0usize);
    let mut failures = Vec::new();
    for (idx, inst) in corpus.iter().enumerate() {
        for trace in &inst.traces {
            for mode in Mode::ALL {
                let oracle = oracle_align(trace, &inst.mp, mode, &inst.costs, &limits).map(|r| r.cost);
                if matches!(oracle, Err(OracleError::LimitExceeded(_))) {
                    over_limit += 1;
                    continue;
                }
                for heuristic in HeuristicKind::ALL {
                    let options = AlignOptions {
                        heuristic,
                        ..AlignOptions::default()
                    };
                    let aligner = align(trace, &inst.mp, mode, &inst.costs, &options);
                    let agree = match (&aligner, &oracle) {
                        (Ok(a), Ok(o)) => costs_agree(a.total_cost, *o),
                        (Err(a), Err(o)) => same_error(a, o),
                        _ => false,
                    };
                    if !agree {
                        failures.push(format!(
                            "instance {idx} {mode} {heuristic} <{}>: aligner {:?} oracle {:?}",
                            trace.join(","),
                            aligner.map(|a| a.total_cost),
                            oracle
                        ));
                    } else if oracle.is_ok() {
                        solved += 1;
                    } else {
                        unsolvable += 1;
                    }
                }
            }
        }
    }
    if failures.is_empty() && over_limit == 0 {
        Ok(format!("{solved} solvable and {unsolvable} unsolvable cases agree"))
    } else {
        Err(format!(
            "{} disagreements, {over_limit} over the oracle limit; {}",
            failures.len(),
            failures.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
        ))
    }
}

fn fail(failures: &[String], what: &str, count: usize) -> CheckResult {
    if failures.is_empty() {
        Ok(format!("{count} {what}"))
    } else {
        Err(format!("{} failures, e.g. {}", failures.len(), failures.iter().take(3).cloned().collect::<Vec<_>>().join("; ")))
    }
}

/// The aligned events are exactly the trace and the fired transitions form
/// a run of the kind the mode promises.
pub fn projection_invariants(corpus: &[Instance]) -> CheckResult {
    let mut failures = Vec::new();
    let mut count = 0;
    for (idx, inst) in corpus.iter().enumerate() {
        for trace in &inst.traces {
            for mode in Mode::ALL {
                let Ok(al) = align(trace, &inst.mp, mode, &inst.costs, &AlignOptions::default()) else { continue };
                count += 1;
                if al.event_projection() != trace.iter().map(String::as_str).collect::<Vec<_>>() {
                    failures.push(format!("instance {idx} {mode}: event projection differs from the trace"));
                }
                match inst.mp.classify_run(&al.transition_projection()) {
                    Ok(RunKind::FullRun) => {}
                    Ok(RunKind::WorkflowRun) if mode != Mode::Full => {}
                    other => failures.push(format!("instance {idx} {mode}: transition projection is {other:?}")),
                }
                if !costs_agree(al.recomputed_cost(&inst.mp, &inst.costs), al.total_cost) {
                    failures.push(format!("instance {idx} {mode}: cost does not add up"));
                }
            }
        }
    }
    fail(&failures, "alignments with valid projections", count)
}

/// cost(workflow) ≤ cost(violations) ≤ cost(full) whenever defined.
pub fn mode_dominance(corpus: &[Instance]) -> CheckResult {
    let mut failures = Vec::new();
    let mut count = 0;
    for (idx, inst) in corpus.iter().enumerate() {
        for trace in &inst.traces {
            let cost = |mode| align(trace, &inst.mp, mode, &inst.costs, &AlignOptions::default()).map(|a| a.total_cost);
            let (Ok(w), Ok(v)) = (cost(Mode::Workflow), cost(Mode::Violations)) else { continue };
            count += 1;
            if w > v {
                failures.push(format!("instance {idx}: workflow {w} > violations {v}"));
            }
            if let Ok(f) = cost(Mode::Full) {
                if v > f {
                    failures.push(format!("instance {idx}: violations {v} > full {f}"));
                }
            }
        }
    }
    fail(&failures, "traces ordered workflow ≤ violations ≤ full", count)
}

/// On sampled expanded nodes the estimate never exceeds the oracle's
/// remaining cost, and it never drops by more than an edge costs.
pub fn heuristic_admissibility(corpus: &[Instance], samples_per_search: usize) -> CheckResult {
    let limits = OracleLimits::default();
    let mut failures = Vec::new();
    let (mut sampled, mut edges) = (0usize, 0usize);
    for (idx, inst) in corpus.iter().enumerate() {
        let Some(trace) = inst.traces.first() else { continue };
        for mode in Mode::ALL {
            for kind in HeuristicKind::ALL {
                let heuristic = kind.build(trace, &inst.mp, &inst.costs);
                let mut seen = Vec::new();
                let result = align_observed(
                    trace,
                    &inst.mp,
                    mode,
                    &inst.costs,
                    heuristic.as_ref(),
                    &AlignOptions::default(),
                    &mut |node, _g, h| seen.push((node.clone(), h)),
                );
                if result.is_err() {
                    continue;
                }
                let problem = AlignmentProblem::new(trace, &inst.mp, mode, &inst.costs);
                let stride = (seen.len() / samples_per_search).max(1);
                for (node, h) in seen.iter().step_by(stride).take(samples_per_search) {
                    if node.terminal {
                        continue;
                    }
                    let remaining =
                        oracle_remaining_cost(trace, &inst.mp, mode, &inst.costs, node.i, &node.config, &limits);
                    if let Ok(r) = remaining {
                        sampled += 1;
                        if *h > r {
                            failures.push(format!("instance {idx} {mode} {kind}: h = {h} > h* = {r} at i = {}", node.i));
                        }
                    }
                    problem.expand(node, |succ| {
                        edges += 1;
                        if succ.state.terminal {
                            return;
                        }
                        let h2 = heuristic.estimate_remaining_cost(succ.state.i, &succ.state.config);
                        if *h > succ.cost + h2 {
                            failures.push(format!("instance {idx} {mode} {kind}: inconsistent edge at i = {}", node.i));
                        }
                    });
                }
            }
        }
    }
    fail(&failures, &format!("nodes admissible and {edges} edges consistent"), sampled)
}

fn reachable(fsa: &Fsa, from: u32) -> Vec<u32> {
    let mut seen = vec![false; fsa.num_states()];
    let mut queue = VecDeque::from([from]);
    seen[from as usize] = true;
    let mut out = Vec::new();
    while let Some(s) = queue.pop_front() {
        out.push(s);
        for c in fsa.alphabet().classes() {
            let t = fsa.step(s, c);
            if !seen[t as usize] {
                seen[t as usize] = true;
                queue.push_back(t);
            }
        }
    }
    out
}

/// Every state's status agrees with a forward search over its successors.
pub fn classification_soundness(corpus: &[Instance]) -> CheckResult {
    let mut failures = Vec::new();
    let mut count = 0;
    let fsas: Vec<&Fsa> = corpus.iter().flat_map(|i| i.mp.constraints.iter().map(|c| &c.fsa)).collect();
    for fsa in fsas {
        for s in 0..fsa.num_states() as u32 {
            count += 1;
            let reach = reachable(fsa, s);
            let any_accepting = reach.iter().any(|&r| fsa.is_accepting(r));
            let all_accepting = reach.iter().all(|&r| fsa.is_accepting(r));
            let expected = match (fsa.is_accepting(s), all_accepting, any_accepting) {
                (true, true, _) => TruthStatus::PermSatisfaction,
                (true, false, _) => TruthStatus::TempSatisfaction,
                (false, _, true) => TruthStatus::TempViolation,
                (false, _, false) => TruthStatus::PermViolation,
            };
            if fsa.status(s) != expected {
                failures.push(format!("state {s}: {:?} but reachability says {expected:?}", fsa.status(s)));
            }
        }
        if fsa.statuses().iter().filter(|&&t| t == TruthStatus::PermViolation).count() > 1 {
            failures.push("more than one permanent-violation state".to_string());
        }
    }
    fail(&failures, "automaton states classified soundly", count)
}

/// Reopening settled nodes never finds a cheaper alignment.
pub fn closed_set_soundness(corpus: &[Instance]) -> CheckResult {
    let mut failures = Vec::new();
    let mut count = 0;
    for (idx, inst) in corpus.iter().enumerate() {
        for trace in &inst.traces {
            for mode in Mode::ALL {
                for heuristic in HeuristicKind::ALL {
                    let closed = AlignOptions {
                        heuristic,
                        ..AlignOptions::default()
                    };
                    let open = AlignOptions {
                        closed_set: false,
                        ..closed
                    };
                    let a = align(trace, &inst.mp, mode, &inst.costs, &closed).map(|a| a.total_cost);
                    let b = align(trace, &inst.mp, mode, &inst.costs, &open).map(|a| a.total_cost);
                    count += 1;
                    if a != b {
                        failures.push(format!("instance {idx} {mode} {heuristic}: {a:?} vs {b:?}"));
                    }
                }
            }
        }
    }
    fail(&failures, "searches unchanged without the closed set", count)
}

/// Firing a non-free transition changes the token count by |t•| − |•t|;
/// firing a free one leaves the marking unchanged.
pub fn firing_conservation(corpus: &[Instance]) -> CheckResult {
    let mut failures = Vec::new();
    let mut count = 0;
    for (idx, inst) in corpus.iter().enumerate() {
        let net = &inst.mp.net;
        for trace in &inst.traces {
            let Ok(al) = align(trace, &inst.mp, Mode::Workflow, &inst.costs, &AlignOptions::default()) else { continue };
            let mut marking = net.initial_marking().clone();
            for t in al.transition_projection() {
                let next = net.fire(&marking, t).expect("aligned runs are firable");
                count += 1;
                let delta = next.total() as i64 - marking.total() as i64;
                let expected = net.postset(t).len() as i64 - net.preset(t).len() as i64;
                if delta != expected || (net.is_free(t) && next != marking) {
                    failures.push(format!("instance {idx}: {} changed tokens by {delta}", net.transition(t).name));
                }
                marking = next;
            }
        }
    }
    fail(&failures, "firings conserve tokens", count)
}

/// Rational costs used by the corpus, varied per instance.
pub fn random_costs<R: rand::Rng>(rng: &mut R) -> RationalCostScheme {
    let pick = |rng: &mut R, options: &[(i64, i64)]| {
        let (n, d) = options[rng.gen_range(0..options.len())];
        Rational::new(n, d)
    };
    RationalCostScheme {
        tau: pick(rng, &[(0, 1), (0, 1), (1, 2)]),
        model: pick(rng, &[(1, 1), (1, 1), (2, 1)]),
        log: pick(rng, &[(1, 1), (1, 1), (3, 2)]),
        default_violation: pick(rng, &[(1, 2), (1, 1), (3, 1)]),
        ..RationalCostScheme::default()
    }
}
