//! Exhaustive reference search for small instances.
//!
//! The oracle is deliberately built differently from the A* aligner: it runs
//! an uninformed uniform-cost search with FIFO cost buckets, encodes markings
//! densely, never pre-filters transitions, and prices constraint violations
//! only once a candidate end state is reached (every constraint that is not
//! accepting at the end costs C(κ)).

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::cmp::Ordering;

use thiserror::Error;

use crate::aligner::{align, AlignError, AlignOptions, CostScheme, Mode, Move, MoveKind};
use crate::fsa::{StateId, TruthStatus};
use crate::mixedmodel::{Configuration, MixedModel};
use crate::petrinet::TransitionId;
use crate::scalar::CostValue;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("the net has no reachable final marking")]
    NoRunExists,
    #[error("no run of the model satisfies every constraint")]
    NoFullRun,
    #[error("invalid cost scheme: {0}")]
    InvalidCosts(String),
}

impl OracleError {
    pub fn code(&self) -> &'static str {
        match self {
            OracleError::LimitExceeded(_) => "LIMIT_EXCEEDED",
            OracleError::NoRunExists => "NO_RUN_EXISTS",
            OracleError::NoFullRun => "NO_FULL_RUN",
            OracleError::InvalidCosts(_) => "INVALID_COSTS",
        }
    }
}

/// Instance size bounds. Only the configuration bound is enforced unless the
/// structural bounds are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_configurations: usize,
    pub max_transitions: Option<usize>,
    pub max_constraints: Option<usize>,
    pub max_trace_len: Option<usize>,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_configurations: 1_000_000,
            max_transitions: None,
            max_constraints: None,
            max_trace_len: None,
        }
    }
}

impl OracleLimits {
    /// 12 transitions, 8 constraints, traces of length 10.
    pub fn strict() -> Self {
        OracleLimits {
            max_transitions: Some(12),
            max_constraints: Some(8),
            max_trace_len: Some(10),
            ..OracleLimits::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<S> {
    pub cost: S,
    pub moves: Vec<Move>,
    pub configurations: usize,
}

/// Cost wrapper giving `S` the total order needed for bucket keys.
#[derive(Debug, Clone, Copy)]
struct Key<S>(S);

impl<S: CostValue> PartialEq for Key<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: CostValue> Eq for Key<S> {}

impl<S: CostValue> PartialOrd for Key<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: CostValue> Ord for Key<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Entry<S> {
    /// `[i, tokens per place…, state per constraint…]`
    code: Vec<u32>,
    g: S,
    parent: Option<usize>,
    via: Option<(MoveKind, Option<usize>)>,
    done: bool,
}

struct Oracle<'a, S> {
    mp: &'a MixedModel,
    trace: Vec<&'a str>,
    mode: Mode,
    costs: &'a CostScheme<S>,
    places: usize,
    pre: Vec<Vec<usize>>,
    post: Vec<Vec<usize>>,
    labels: Vec<Option<&'a str>>,
    final_tokens: Vec<u32>,
}

impl<'a, S: CostValue> Oracle<'a, S> {
    fn new(trace: &'a [impl AsRef<str>], mp: &'a MixedModel, mode: Mode, costs: &'a CostScheme<S>) -> Self {
        let net = &mp.net;
        let places = net.places().len();
        let mut final_tokens = vec![0u32; places];
        for (p, k) in net.final_marking().iter() {
            final_tokens[p.0] = k;
        }
        Oracle {
            mp,
            trace: trace.iter().map(AsRef::as_ref).collect(),
            mode,
            costs,
            places,
            pre: net.transition_ids().map(|t| net.preset(t).iter().map(|p| p.0).collect()).collect(),
            post: net.transition_ids().map(|t| net.postset(t).iter().map(|p| p.0).collect()).collect(),
            labels: net.transition_ids().map(|t| net.label(t)).collect(),
            final_tokens,
        }
    }

    fn encode(&self, i: usize, config: &Configuration) -> Vec<u32> {
        let mut code = vec![0u32; 1 + self.places];
        code[0] = i as u32;
        for (p, k) in config.marking.iter() {
            code[1 + p.0] = k;
        }
        code.extend(config.states.iter().copied());
        code
    }

    fn tokens<'c>(&self, code: &'c [u32]) -> &'c [u32] {
        &code[1..1 + self.places]
    }

    fn states<'c>(&self, code: &'c [u32]) -> &'c [u32] {
        &code[1 + self.places..]
    }

    fn fire(&self, code: &[u32], t: usize) -> Option<Vec<u32>> {
        // The case is over once the final marking is reached.
        if self.tokens(code) == self.final_tokens.as_slice() || self.pre[t].iter().any(|&p| code[1 + p] == 0) {
            return None;
        }
        let mut next = code.to_vec();
        for &p in &self.pre[t] {
            next[1 + p] -= 1;
        }
        for &p in &self.post[t] {
            next[1 + p] += 1;
        }
        for (k, ca) in self.mp.constraints.iter().enumerate() {
            let slot = 1 + self.places + k;
            next[slot] = ca.fsa.step(next[slot] as StateId, ca.lift[t]);
        }
        Some(next)
    }

    fn at_end(&self, code: &[u32]) -> bool {
        code[0] as usize == self.trace.len() && self.tokens(code) == self.final_tokens.as_slice()
    }

    /// Σ C(κ) over constraints not accepting in `code`, skipping those in
    /// `exempt`.
    fn end_charge(&self, code: &[u32], exempt: &[bool]) -> S {
        let states = self.states(code);
        self.mp
            .constraints
            .iter()
            .enumerate()
            .filter(|(k, ca)| !exempt[*k] && !ca.fsa.is_accepting(states[*k]))
            .fold(S::zero(), |acc, (_, ca)| acc + self.costs.violation(ca.id()))
    }

    fn run(&self, start: Vec<u32>, limits: &OracleLimits) -> Result<(S, Vec<Entry<S>>, usize), OracleError> {
        // Constraints already violated at the start have been paid for.
        let exempt: Vec<bool> = self
            .mp
            .constraints
            .iter()
            .zip(self.states(&start))
            .map(|(ca, &s)| ca.fsa.status(s) == TruthStatus::PermViolation)
            .collect();

        let mut arena: Vec<Entry<S>> = vec![Entry {
            code: start.clone(),
            g: S::zero(),
            parent: None,
            via: None,
            done: false,
        }];
        let mut seen: HashMap<Vec<u32>, usize> = HashMap::from([(start, 0)]);
        let mut buckets: BTreeMap<Key<S>, VecDeque<usize>> = BTreeMap::new();
        buckets.entry(Key(S::zero())).or_default().push_back(0);
        let mut best: Option<(S, usize)> = None;

        while let Some(mut bucket) = buckets.first_entry() {
            let g = bucket.key().0;
            let idx = bucket.get_mut().pop_front().expect("buckets are never empty");
            if bucket.get().is_empty() {
                bucket.remove();
            }
            if arena[idx].done || arena[idx].g.total_cmp(&g) != Ordering::Equal {
                continue;
            }
            if let Some((b, _)) = best {
                if g.total_cmp(&b) != Ordering::Less {
                    break;
                }
            }
            arena[idx].done = true;
            let code = arena[idx].code.clone();

            if self.at_end(&code) {
                match self.mode {
                    Mode::Workflow => return Ok((g, arena, idx)),
                    Mode::Full => {
                        let states = self.states(&code);
                        if self.mp.constraints.iter().zip(states).all(|(ca, &s)| ca.fsa.is_accepting(s)) {
                            return Ok((g, arena, idx));
                        }
                    }
                    Mode::Violations => {
                        let total = g + self.end_charge(&code, &exempt);
                        if best.is_none_or(|(b, _)| total.total_cmp(&b) == Ordering::Less) {
                            best = Some((total, idx));
                        }
                    }
                }
            }

            let i = code[0] as usize;
            let event = self.trace.get(i).copied();
            let mut edges: Vec<(Vec<u32>, S, MoveKind, Option<usize>)> = Vec::new();
            if event.is_some() {
                let mut next = code.clone();
                next[0] += 1;
                edges.push((next, self.costs.log, MoveKind::Log, None));
            }
            for t in 0..self.pre.len() {
                let Some(next) = self.fire(&code, t) else { continue };
                if event.is_some() && event == self.labels[t] {
                    let mut sync = next.clone();
                    sync[0] += 1;
                    edges.push((sync, self.costs.sync, MoveKind::Sync, Some(t)));
                }
                let (cost, kind) = match self.labels[t] {
                    Some(_) => (self.costs.model, MoveKind::Model),
                    None => (self.costs.tau, MoveKind::Tau),
                };
                edges.push((next, cost, kind, Some(t)));
            }

            for (next, cost, kind, t) in edges {
                let g2 = g + cost;
                let target = match seen.get(&next) {
                    Some(&j) => {
                        if arena[j].done || g2.total_cmp(&arena[j].g) != Ordering::Less {
                            continue;
                        }
                        arena[j].g = g2;
                        arena[j].parent = Some(idx);
                        arena[j].via = Some((kind, t));
                        j
                    }
                    None => {
                        if arena.len() >= limits.max_configurations {
                            return Err(OracleError::LimitExceeded(format!(
                                "more than {} configurations",
                                limits.max_configurations
                            )));
                        }
                        arena.push(Entry {
                            code: next.clone(),
                            g: g2,
                            parent: Some(idx),
                            via: Some((kind, t)),
                            done: false,
                        });
                        seen.insert(next, arena.len() - 1);
                        arena.len() - 1
                    }
                };
                buckets.entry(Key(g2)).or_default().push_back(target);
            }
        }
        match (best, self.mode) {
            (Some((cost, idx)), _) => Ok((cost, arena, idx)),
            (None, Mode::Full) => Err(OracleError::NoFullRun),
            (None, _) => Err(OracleError::NoRunExists),
        }
    }

    fn moves(&self, arena: &[Entry<S>], goal: usize) -> Vec<Move> {
        let mut path = Vec::new();
        let mut cursor = goal;
        while let (Some(parent), Some(via)) = (arena[cursor].parent, arena[cursor].via) {
            path.push((via, parent));
            cursor = parent;
        }
        path.reverse();
        path.into_iter()
            .map(|((kind, t), parent)| {
                let from = &arena[parent].code;
                let i = from[0] as usize;
                let mut newly_violated = Vec::new();
                if let (Some(t), Mode::Violations) = (t, self.mode) {
                    let to = self.fire(from, t).expect("path replays");
                    for (k, ca) in self.mp.constraints.iter().enumerate() {
                        let before = self.states(from)[k];
                        let after = self.states(&to)[k];
                        if ca.fsa.status(before) != TruthStatus::PermViolation
                            && ca.fsa.status(after) == TruthStatus::PermViolation
                        {
                            newly_violated.push(ca.id().to_string());
                        }
                    }
                }
                let kind = match (kind, newly_violated.is_empty()) {
                    (MoveKind::Sync, false) => MoveKind::SyncViolating,
                    (MoveKind::Model | MoveKind::Tau, false) => MoveKind::ModelViolating,
                    (k, _) => k,
                };
                Move {
                    kind,
                    transition: t.map(TransitionId),
                    event: kind.consumes_event().then(|| self.trace[i].to_string()),
                    newly_violated,
                }
            })
            .collect()
    }
}

fn check_limits<S: CostValue>(
    trace_len: usize,
    mp: &MixedModel,
    costs: &CostScheme<S>,
    limits: &OracleLimits,
) -> Result<(), OracleError> {
    let checks = [
        ("transitions", mp.net.transitions().len(), limits.max_transitions),
        ("constraints", mp.constraints.len(), limits.max_constraints),
        ("trace length", trace_len, limits.max_trace_len),
    ];
    for (what, value, bound) in checks {
        if let Some(bound) = bound {
            if value > bound {
                return Err(OracleError::LimitExceeded(format!("{what} {value} > {bound}")));
            }
        }
    }
    costs.validate().map_err(|e| OracleError::InvalidCosts(e.to_string()))
}

/// Globally optimal alignment cost by exhaustive uniform-cost search.
pub fn oracle_align<S: CostValue, T: AsRef<str>>(
    trace: &[T],
    mp: &MixedModel,
    mode: Mode,
    costs: &CostScheme<S>,
    limits: &OracleLimits,
) -> Result<OracleResult<S>, OracleError> {
    check_limits(trace.len(), mp, costs, limits)?;
    let oracle = Oracle::new(trace, mp, mode, costs);
    let start = oracle.encode(0, &mp.initial_configuration());
    let (cost, arena, goal) = oracle.run(start, limits)?;
    Ok(OracleResult {
        cost,
        moves: oracle.moves(&arena, goal),
        configurations: arena.len(),
    })
}

/// Optimal cost of completing an alignment from `(i, config)`, excluding
/// charges for constraints already in their sink.
pub fn oracle_remaining_cost<S: CostValue, T: AsRef<str>>(
    trace: &[T],
    mp: &MixedModel,
    mode: Mode,
    costs: &CostScheme<S>,
    i: usize,
    config: &Configuration,
    limits: &OracleLimits,
) -> Result<S, OracleError> {
    check_limits(trace.len(), mp, costs, limits)?;
    let oracle = Oracle::new(trace, mp, mode, costs);
    let start = oracle.encode(i, config);
    oracle.run(start, limits).map(|(cost, _, _)| cost)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Match,
    Mismatch,
    LimitExceeded,
}

#[derive(Debug, Clone)]
pub struct CrossCheck<S> {
    pub mode: Mode,
    pub aligner: Result<S, AlignError>,
    pub oracle: Result<S, OracleError>,
    pub verdict: Verdict,
}

/// Equal for exact scalars; within a relative 1e-9 for floating point.
pub fn costs_agree<S: CostValue>(a: S, b: S) -> bool {
    if a == b {
        return true;
    }
    let (x, y) = (a.to_f64_lossy(), b.to_f64_lossy());
    (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0)
}

/// Runs aligner and oracle on one trace and compares the outcomes.
///
/// `aligner_costs` replaces the cost scheme given to the aligner only; it
/// exists to check that a corrupted configuration is caught.
pub fn cross_check<S: CostValue, T: AsRef<str>>(
    trace: &[T],
    mp: &MixedModel,
    mode: Mode,
    costs: &CostScheme<S>,
    aligner_costs: Option<&CostScheme<S>>,
    options: &AlignOptions,
    limits: &OracleLimits,
) -> CrossCheck<S> {
    let oracle = oracle_align(trace, mp, mode, costs, limits).map(|r| r.cost);
    let aligner = align(trace, mp, mode, aligner_costs.unwrap_or(costs), options).map(|a| a.total_cost);
    let verdict = match (&aligner, &oracle) {
        (_, Err(OracleError::LimitExceeded(_))) | (Err(AlignError::BudgetExceeded { .. }), _) => Verdict::LimitExceeded,
        (Ok(a), Ok(o)) if costs_agree(*a, *o) => Verdict::Match,
        (Err(AlignError::NoFullRun), Err(OracleError::NoFullRun))
        | (Err(AlignError::NoRunExists), Err(OracleError::NoRunExists)) => Verdict::Match,
        _ => Verdict::Mismatch,
    };
    CrossCheck {
        mode,
        aligner,
        oracle,
        verdict,
    }
}
