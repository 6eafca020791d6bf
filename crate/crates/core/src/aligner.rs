//! Optimal alignments by A* over the synchronous product of a trace and a
//! mixed-paradigm model.
//!
//! A search node is `(i, marking, constraint states)` where `i` counts the
//! events already explained. From each node the search may
//!
//! * fire an enabled transition together with the next event (synchronous move),
//! * fire an enabled transition alone (model move, or τ-move if silent),
//! * skip the next event (log move).
//!
//! The mode decides how the constraint automata restrict and price these
//! moves; see [`Mode`].

use std::cmp::Ordering;
use std::collections::hash_map::Entry as MapEntry;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use thiserror::Error;

use crate::fsa::TruthStatus;
use crate::mixedmodel::{Configuration, MixedModel};
use crate::petrinet::TransitionId;
use crate::scalar::CostValue;

pub const DEFAULT_MAX_EXPANSIONS: u64 = 10_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AlignError {
    #[error("the net has no reachable final marking")]
    NoRunExists,
    #[error("no run of the model satisfies every constraint")]
    NoFullRun,
    #[error("search exceeded the budget of {limit} expanded nodes")]
    BudgetExceeded { limit: u64 },
    #[error("invalid cost scheme: {0}")]
    InvalidCosts(String),
}

impl AlignError {
    pub fn code(&self) -> &'static str {
        match self {
            AlignError::NoRunExists => "NO_RUN_EXISTS",
            AlignError::NoFullRun => "NO_FULL_RUN",
            AlignError::BudgetExceeded { .. } => "BUDGET_EXCEEDED",
            AlignError::InvalidCosts(_) => "INVALID_COSTS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Constraints are tracked and reported but never restrict or price moves.
    Workflow,
    /// Moves into a constraint's sink are forbidden and every constraint must
    /// accept at the end.
    Full,
    /// Entering a sink costs C(κ); constraints still pending at the end are
    /// charged C(κ) by a terminal adjustment.
    Violations,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Workflow, Mode::Full, Mode::Violations];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Workflow => "workflow",
            Mode::Full => "full",
            Mode::Violations => "violations",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown mode '{s}' (expected workflow, full or violations)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Sync,
    Model,
    Log,
    Tau,
    SyncViolating,
    ModelViolating,
}

impl MoveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::Sync => "SYNC",
            MoveKind::Model => "MODEL",
            MoveKind::Log => "LOG",
            MoveKind::Tau => "TAU",
            MoveKind::SyncViolating => "SYNC_VIOLATING",
            MoveKind::ModelViolating => "MODEL_VIOLATING",
        }
    }

    pub fn consumes_event(self) -> bool {
        matches!(self, MoveKind::Sync | MoveKind::SyncViolating | MoveKind::Log)
    }

    pub fn fires_transition(self) -> bool {
        self != MoveKind::Log
    }

    pub fn is_violating(self) -> bool {
        matches!(self, MoveKind::SyncViolating | MoveKind::ModelViolating)
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub kind: MoveKind,
    pub transition: Option<TransitionId>,
    pub event: Option<String>,
    /// Ids of the constraints this move sends into their sink.
    pub newly_violated: Vec<String>,
}

/// Costs of the individual moves and of constraint violations.
#[derive(Debug, Clone, PartialEq)]
pub struct CostScheme<S> {
    pub sync: S,
    pub tau: S,
    pub model: S,
    pub log: S,
    pub default_violation: S,
    pub violation_overrides: BTreeMap<String, S>,
}

impl<S: CostValue> Default for CostScheme<S> {
    fn default() -> Self {
        CostScheme {
            sync: S::zero(),
            tau: S::zero(),
            model: S::one(),
            log: S::one(),
            default_violation: S::one(),
            violation_overrides: BTreeMap::new(),
        }
    }
}

impl<S: CostValue> CostScheme<S> {
    pub fn with_violation(mut self, constraint: &str, cost: S) -> Self {
        self.violation_overrides.insert(constraint.to_string(), cost);
        self
    }

    pub fn violation(&self, constraint: &str) -> S {
        self.violation_overrides.get(constraint).copied().unwrap_or(self.default_violation)
    }

    /// Every cost multiplied by `factor`.
    pub fn scaled(&self, factor: S) -> Self {
        CostScheme {
            sync: self.sync * factor,
            tau: self.tau * factor,
            model: self.model * factor,
            log: self.log * factor,
            default_violation: self.default_violation * factor,
            violation_overrides: self.violation_overrides.iter().map(|(k, v)| (k.clone(), *v * factor)).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), AlignError> {
        let named = [
            ("sync", self.sync),
            ("tau", self.tau),
            ("model", self.model),
            ("log", self.log),
            ("violation", self.default_violation),
        ];
        for (name, value) in named.into_iter().chain(self.violation_overrides.iter().map(|(k, v)| (k.as_str(), *v))) {
            if value.is_negative_cost() || value.partial_cmp(&S::zero()).is_none() {
                return Err(AlignError::InvalidCosts(format!("{name} cost {value} is negative or not a number")));
            }
        }
        Ok(())
    }

    /// Cost of a move excluding violation charges.
    pub fn move_cost(&self, mv: &Move, mp: &MixedModel) -> S {
        let silent = mv.transition.is_some_and(|t| mp.net.label(t).is_none());
        match mv.kind {
            MoveKind::Sync | MoveKind::SyncViolating => self.sync,
            MoveKind::ModelViolating if silent => self.tau,
            MoveKind::Model | MoveKind::ModelViolating => self.model,
            MoveKind::Tau => self.tau,
            MoveKind::Log => self.log,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment<S> {
    pub moves: Vec<Move>,
    pub total_cost: S,
    pub mode: Mode,
    pub final_configuration: Configuration,
    /// Constraints that end up violated, in model order.
    pub violated_constraints: Vec<String>,
    /// Constraints charged by the terminal adjustment (violations mode).
    pub terminal_violations: Vec<String>,
    pub expansions: u64,
}

impl<S: CostValue> Alignment<S> {
    /// The events explained by the alignment, i.e. the aligned trace.
    pub fn event_projection(&self) -> Vec<&str> {
        self.moves
            .iter()
            .filter(|m| m.kind.consumes_event())
            .filter_map(|m| m.event.as_deref())
            .collect()
    }

    /// The transitions fired by the alignment.
    pub fn transition_projection(&self) -> Vec<TransitionId> {
        self.moves.iter().filter_map(|m| m.transition).collect()
    }

    /// Recomputes the cost from the moves and violations.
    pub fn recomputed_cost(&self, mp: &MixedModel, costs: &CostScheme<S>) -> S {
        let moves = self.moves.iter().fold(S::zero(), |acc, m| acc + costs.move_cost(m, mp));
        if self.mode != Mode::Violations {
            return moves;
        }
        self.violated_constraints.iter().fold(moves, |acc, id| acc + costs.violation(id))
    }
}

/// Admissible estimate of the remaining alignment cost.
pub trait Heuristic<S: CostValue> {
    /// `i` is the number of events already explained.
    fn estimate_remaining_cost(&self, i: usize, config: &Configuration) -> S;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroHeuristic;

impl<S: CostValue> Heuristic<S> for ZeroHeuristic {
    fn estimate_remaining_cost(&self, _i: usize, _config: &Configuration) -> S {
        S::zero()
    }
}

/// Remaining events whose activity labels no transition can only be
/// explained by log moves.
#[derive(Debug, Clone)]
pub struct UnmatchedHeuristic<S> {
    suffix: Vec<S>,
}

impl<S: CostValue> UnmatchedHeuristic<S> {
    pub fn new<T: AsRef<str>>(trace: &[T], mp: &MixedModel, costs: &CostScheme<S>) -> Self {
        let mut suffix = vec![S::zero(); trace.len() + 1];
        for i in (0..trace.len()).rev() {
            let own = if mp.has_label(trace[i].as_ref()) { S::zero() } else { costs.log };
            suffix[i] = suffix[i + 1] + own;
        }
        UnmatchedHeuristic { suffix }
    }
}

impl<S: CostValue> Heuristic<S> for UnmatchedHeuristic<S> {
    fn estimate_remaining_cost(&self, i: usize, _config: &Configuration) -> S {
        self.suffix.get(i).copied().unwrap_or_else(S::zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HeuristicKind {
    Zero,
    #[default]
    Unmatched,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 2] = [HeuristicKind::Zero, HeuristicKind::Unmatched];

    pub fn as_str(self) -> &'static str {
        match self {
            HeuristicKind::Zero => "zero",
            HeuristicKind::Unmatched => "unmatched",
        }
    }

    pub fn build<S: CostValue, T: AsRef<str>>(
        self,
        trace: &[T],
        mp: &MixedModel,
        costs: &CostScheme<S>,
    ) -> Box<dyn Heuristic<S>> {
        match self {
            HeuristicKind::Zero => Box::new(ZeroHeuristic),
            HeuristicKind::Unmatched => Box::new(UnmatchedHeuristic::new(trace, mp, costs)),
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HeuristicKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HeuristicKind::ALL
            .into_iter()
            .find(|h| h.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown heuristic '{s}' (expected zero or unmatched)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignOptions {
    pub heuristic: HeuristicKind,
    pub max_expansions: u64,
    /// When false, settled nodes are reopened if reached again more cheaply.
    pub closed_set: bool,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            heuristic: HeuristicKind::Unmatched,
            max_expansions: DEFAULT_MAX_EXPANSIONS,
            closed_set: true,
        }
    }
}

/// Position in the search space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeState {
    pub i: usize,
    pub config: Configuration,
    /// Set on the node produced by the terminal adjustment.
    pub terminal: bool,
}

#[derive(Debug, Clone)]
pub struct Successor<S> {
    pub state: NodeState,
    /// Move cost plus any violation charge.
    pub cost: S,
    /// `None` for the terminal adjustment.
    pub kind: Option<MoveKind>,
    pub transition: Option<TransitionId>,
    /// Indices of the constraints charged by this edge.
    pub charged: Vec<usize>,
}

/// The search graph for one trace, mode and cost scheme.
///
/// In workflow mode constraint states do not influence the search, so they
/// are kept at their initial values and recomputed when the alignment is
/// extracted.
pub struct AlignmentProblem<'a, S> {
    trace: Vec<&'a str>,
    mp: &'a MixedModel,
    mode: Mode,
    costs: &'a CostScheme<S>,
    violation_costs: Vec<S>,
}

impl<'a, S: CostValue> AlignmentProblem<'a, S> {
    pub fn new<T: AsRef<str>>(trace: &'a [T], mp: &'a MixedModel, mode: Mode, costs: &'a CostScheme<S>) -> Self {
        AlignmentProblem {
            trace: trace.iter().map(AsRef::as_ref).collect(),
            mp,
            mode,
            costs,
            violation_costs: mp.constraints.iter().map(|c| costs.violation(c.id())).collect(),
        }
    }

    pub fn start(&self) -> NodeState {
        NodeState {
            i: 0,
            config: self.mp.initial_configuration(),
            terminal: false,
        }
    }

    fn at_end(&self, state: &NodeState) -> bool {
        state.i == self.trace.len() && self.mp.is_final(&state.config)
    }

    fn pending(&self, config: &Configuration) -> Vec<usize> {
        self.mp
            .constraints
            .iter()
            .zip(&config.states)
            .enumerate()
            .filter(|(_, (c, &s))| c.status(s) == TruthStatus::TempViolation)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn is_goal(&self, state: &NodeState) -> bool {
        if state.terminal {
            return true;
        }
        if !self.at_end(state) {
            return false;
        }
        match self.mode {
            Mode::Workflow => true,
            Mode::Full => self.mp.all_accepting(&state.config.states),
            Mode::Violations => self.pending(&state.config).is_empty(),
        }
    }

    fn charge(&self, indices: &[usize]) -> S {
        indices.iter().fold(S::zero(), |acc, &k| acc + self.violation_costs[k])
    }

    /// Calls `emit` for every successor, in a fixed order: for each enabled
    /// transition in id order the synchronous move then the model move, then
    /// the log move, then the terminal adjustment.
    pub fn expand(&self, state: &NodeState, mut emit: impl FnMut(Successor<S>)) {
        if state.terminal {
            return;
        }
        let net = &self.mp.net;
        let event = self.trace.get(state.i).copied();
        let marking = &state.config.marking;
        // Nothing fires once the case has completed, free transitions
        // included; only log moves remain.
        let completed = self.mp.is_final(&state.config);
        for t in net.transition_ids() {
            if completed || !net.is_enabled(marking, t) {
                continue;
            }
            let next_marking = net.fire(marking, t).expect("enabled");
            let (next_states, newly) = if self.mode == Mode::Workflow {
                (state.config.states.clone(), Vec::new())
            } else {
                let next = self.mp.step_states(&state.config.states, t);
                let newly: Vec<usize> = self
                    .mp
                    .constraints
                    .iter()
                    .enumerate()
                    .filter(|(k, c)| !c.is_sink(state.config.states[*k]) && c.is_sink(next[*k]))
                    .map(|(k, _)| k)
                    .collect();
                (next, newly)
            };
            if self.mode == Mode::Full && !newly.is_empty() {
                continue;
            }
            let charged = if self.mode == Mode::Violations { newly } else { Vec::new() };
            let penalty = self.charge(&charged);
            let label = net.label(t);
            let config = Configuration {
                marking: next_marking,
                states: next_states,
            };

            if event.is_some() && event == label {
                emit(Successor {
                    state: NodeState {
                        i: state.i + 1,
                        config: config.clone(),
                        terminal: false,
                    },
                    cost: self.costs.sync + penalty,
                    kind: Some(if charged.is_empty() { MoveKind::Sync } else { MoveKind::SyncViolating }),
                    transition: Some(t),
                    charged: charged.clone(),
                });
            }
            let (kind, base) = match (label, charged.is_empty()) {
                (_, false) => (MoveKind::ModelViolating, if label.is_none() { self.costs.tau } else { self.costs.model }),
                (None, true) => (MoveKind::Tau, self.costs.tau),
                (Some(_), true) => (MoveKind::Model, self.costs.model),
            };
            emit(Successor {
                state: NodeState {
                    i: state.i,
                    config,
                    terminal: false,
                },
                cost: base + penalty,
                kind: Some(kind),
                transition: Some(t),
                charged,
            });
        }

        if event.is_some() {
            emit(Successor {
                state: NodeState {
                    i: state.i + 1,
                    config: state.config.clone(),
                    terminal: false,
                },
                cost: self.costs.log,
                kind: Some(MoveKind::Log),
                transition: None,
                charged: Vec::new(),
            });
        }

        if self.mode == Mode::Violations && self.at_end(state) {
            let pending = self.pending(&state.config);
            if !pending.is_empty() {
                emit(Successor {
                    state: NodeState {
                        i: state.i,
                        config: state.config.clone(),
                        terminal: true,
                    },
                    cost: self.charge(&pending),
                    kind: None,
                    transition: None,
                    charged: pending,
                });
            }
        }
    }
}

/// Path cost with tie-breaking counters: among equally cheap alignments
/// prefer fewer model moves that violate a constraint, then fewer log and
/// visible model moves, then fewer moves overall.
#[derive(Debug, Clone, Copy)]
struct SearchCost<S> {
    primary: S,
    violating_model_moves: u32,
    deviations: u32,
    moves: u32,
}

impl<S: CostValue> SearchCost<S> {
    fn zero() -> Self {
        SearchCost {
            primary: S::zero(),
            violating_model_moves: 0,
            deviations: 0,
            moves: 0,
        }
    }

    fn of(successor: &Successor<S>, mp: &MixedModel) -> Self {
        let deviation = match successor.kind {
            Some(MoveKind::Log) => true,
            Some(MoveKind::Model | MoveKind::ModelViolating) => {
                successor.transition.is_some_and(|t| mp.net.label(t).is_some())
            }
            _ => false,
        };
        SearchCost {
            primary: successor.cost,
            violating_model_moves: (successor.kind == Some(MoveKind::ModelViolating)) as u32,
            deviations: deviation as u32,
            moves: successor.kind.is_some() as u32,
        }
    }

    fn estimate(h: S) -> Self {
        SearchCost {
            primary: h,
            violating_model_moves: 0,
            deviations: 0,
            moves: 0,
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        self.primary
            .total_cmp(&other.primary)
            .then(self.violating_model_moves.cmp(&other.violating_model_moves))
            .then(self.deviations.cmp(&other.deviations))
            .then(self.moves.cmp(&other.moves))
    }
}

impl<S: CostValue> Add for SearchCost<S> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        SearchCost {
            primary: self.primary + rhs.primary,
            violating_model_moves: self.violating_model_moves + rhs.violating_model_moves,
            deviations: self.deviations + rhs.deviations,
            moves: self.moves + rhs.moves,
        }
    }
}

struct QueueEntry<S> {
    f: SearchCost<S>,
    g: SearchCost<S>,
    i: usize,
    seq: u64,
    node: usize,
}

impl<S: CostValue> Ord for QueueEntry<S> {
    /// Max-heap order: smallest f first, then largest g, then largest i,
    /// then earliest insertion.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .cmp(&self.f)
            .then_with(|| self.g.cmp(&other.g))
            .then_with(|| self.i.cmp(&other.i))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl<S: CostValue> PartialOrd for QueueEntry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: CostValue> PartialEq for QueueEntry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: CostValue> Eq for QueueEntry<S> {}

struct SearchNode<S> {
    state: NodeState,
    g: SearchCost<S>,
    parent: Option<usize>,
    step: Option<(Option<MoveKind>, Option<TransitionId>)>,
    closed: bool,
}

pub fn align<S: CostValue, T: AsRef<str>>(
    trace: &[T],
    mp: &MixedModel,
    mode: Mode,
    costs: &CostScheme<S>,
    options: &AlignOptions,
) -> Result<Alignment<S>, AlignError> {
    let heuristic = options.heuristic.build(trace, mp, costs);
    align_with_heuristic(trace, mp, mode, costs, heuristic.as_ref(), options)
}

pub fn align_workflow<S: CostValue, T: AsRef<str>>(
    trace: &[T],
    mp: &MixedModel,
    costs: &CostScheme<S>,
    options: &AlignOptions,
) -> Result<Alignment<S>, AlignError> {
    align(trace, mp, Mode::Workflow, costs, options)
}

pub fn align_full<S: CostValue, T: AsRef<str>>(
    trace: &[T],
    mp: &MixedModel,
    costs: &CostScheme<S>,
    options: &AlignOptions,
) -> Result<Alignment<S>, AlignError> {
    align(trace, mp, Mode::Full, costs, options)
}

pub fn align_with_violations<S: CostValue, T: AsRef<str>>(
    trace: &[T],
    mp: &MixedModel,
    costs: &CostScheme<S>,
    options: &AlignOptions,
) -> Result<Alignment<S>, AlignError> {
    align(trace, mp, Mode::Violations, costs, options)
}

pub fn align_with_heuristic<S: CostValue, T: AsRef<str>>(
    trace: &[T],
    mp: &MixedModel,
    mode: Mode,
    costs: &CostScheme<S>,
    heuristic: &dyn Heuristic<S>,
    options: &AlignOptions,
) -> Result<Alignment<S>, AlignError> {
    align_observed(trace, mp, mode, costs, heuristic, options, &mut |_, _, _| {})
}

/// Like [`align_with_heuristic`], calling `observer(node, g, h)` on every
/// expanded node.
pub fn align_observed<S: CostValue, T: AsRef<str>>(
    trace: &[T],
    mp: &MixedModel,
    mode: Mode,
    costs: &CostScheme<S>,
    heuristic: &dyn Heuristic<S>,
    options: &AlignOptions,
    observer: &mut dyn FnMut(&NodeState, S, S),
) -> Result<Alignment<S>, AlignError> {
    costs.validate()?;
    let problem = AlignmentProblem::new(trace, mp, mode, costs);

    let mut nodes: Vec<SearchNode<S>> = Vec::new();
    let mut index: HashMap<NodeState, usize> = HashMap::new();
    let mut open: BinaryHeap<QueueEntry<S>> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut expansions = 0u64;

    let start = problem.start();
    let h0 = heuristic.estimate_remaining_cost(0, &start.config);
    index.insert(start.clone(), 0);
    nodes.push(SearchNode {
        state: start,
        g: SearchCost::zero(),
        parent: None,
        step: None,
        closed: false,
    });
    open.push(QueueEntry {
        f: SearchCost::estimate(h0),
        g: SearchCost::zero(),
        i: 0,
        seq,
        node: 0,
    });

    let mut successors = Vec::new();
    while let Some(entry) = open.pop() {
        let current = &nodes[entry.node];
        if current.closed || current.g.cmp(&entry.g) != Ordering::Equal {
            continue;
        }
        if problem.is_goal(&current.state) {
            return Ok(extract(&problem, &nodes, entry.node, expansions));
        }
        if expansions >= options.max_expansions {
            return Err(AlignError::BudgetExceeded {
                limit: options.max_expansions,
            });
        }
        expansions += 1;
        let g = current.g;
        observer(&current.state, g.primary, entry.f.primary - g.primary);
        nodes[entry.node].closed = true;

        successors.clear();
        problem.expand(&nodes[entry.node].state, |s| successors.push(s));
        for successor in successors.drain(..) {
            let g2 = g + SearchCost::of(&successor, mp);
            let step = Some((successor.kind, successor.transition));
            let target = match index.entry(successor.state) {
                MapEntry::Occupied(slot) => {
                    let idx = *slot.get();
                    let node = &mut nodes[idx];
                    if (options.closed_set && node.closed) || g2.cmp(&node.g) != Ordering::Less {
                        continue;
                    }
                    node.g = g2;
                    node.parent = Some(entry.node);
                    node.step = step;
                    node.closed = false;
                    idx
                }
                MapEntry::Vacant(slot) => {
                    let idx = nodes.len();
                    nodes.push(SearchNode {
                        state: slot.key().clone(),
                        g: g2,
                        parent: Some(entry.node),
                        step,
                        closed: false,
                    });
                    slot.insert(idx);
                    idx
                }
            };
            let state = &nodes[target].state;
            let h = heuristic.estimate_remaining_cost(state.i, &state.config);
            seq += 1;
            open.push(QueueEntry {
                f: g2 + SearchCost::estimate(h),
                g: g2,
                i: state.i,
                seq,
                node: target,
            });
        }
    }
    Err(match mode {
        Mode::Full => AlignError::NoFullRun,
        Mode::Workflow | Mode::Violations => AlignError::NoRunExists,
    })
}

/// Rebuilds the move sequence from the goal and replays it against the
/// automata to attribute violations.
fn extract<S: CostValue>(problem: &AlignmentProblem<'_, S>, nodes: &[SearchNode<S>], goal: usize, expansions: u64) -> Alignment<S> {
    let mp = problem.mp;
    let mut steps = Vec::new();
    let mut cursor = goal;
    while let Some(parent) = nodes[cursor].parent {
        steps.push((nodes[cursor].step.expect("non-root node has a step"), nodes[parent].state.i));
        cursor = parent;
    }
    steps.reverse();

    let mut config = mp.initial_configuration();
    let mut moves = Vec::with_capacity(steps.len());
    let mut violated: Vec<bool> = vec![false; mp.constraints.len()];
    let mut terminal = Vec::new();
    for ((kind, transition), i) in steps {
        let Some(mut kind) = kind else {
            terminal = problem.pending(&config);
            for &k in &terminal {
                violated[k] = true;
            }
            continue;
        };
        let mut newly_violated = Vec::new();
        if let Some(t) = transition {
            let next = mp.step(&config, t).expect("alignment replays");
            if problem.mode == Mode::Violations {
                for (k, c) in mp.constraints.iter().enumerate() {
                    if !c.is_sink(config.states[k]) && c.is_sink(next.states[k]) {
                        violated[k] = true;
                        newly_violated.push(c.id().to_string());
                    }
                }
            }
            config = next;
        }
        if problem.mode == Mode::Workflow {
            // Workflow-mode searches do not classify moves as violating.
            kind = match kind {
                MoveKind::SyncViolating => MoveKind::Sync,
                MoveKind::ModelViolating => MoveKind::Model,
                k => k,
            };
        }
        let event = kind.consumes_event().then(|| problem.trace[i].to_string());
        moves.push(Move {
            kind,
            transition,
            event,
            newly_violated,
        });
    }

    let ids = |flags: &[bool]| -> Vec<String> {
        mp.constraints
            .iter()
            .zip(flags)
            .filter(|(_, &v)| v)
            .map(|(c, _)| c.id().to_string())
            .collect()
    };
    let violated_constraints = match problem.mode {
        Mode::Workflow => {
            let flags: Vec<bool> = mp.statuses(&config).iter().map(|s| !s.is_accepting()).collect();
            ids(&flags)
        }
        Mode::Full => Vec::new(),
        Mode::Violations => ids(&violated),
    };
    Alignment {
        moves,
        total_cost: nodes[goal].g.primary,
        mode: problem.mode,
        final_configuration: config,
        violated_constraints,
        terminal_violations: terminal.iter().map(|&k| mp.constraints[k].id().to_string()).collect(),
        expansions,
    }
}
