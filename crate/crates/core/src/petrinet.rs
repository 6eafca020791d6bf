//! Labelled place/transition nets with Workflow-net structure.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaceId(pub usize);

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for PlaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NetError {
    #[error("duplicate node id '{0}'")]
    DuplicateId(String),
    #[error("unknown node '{0}'")]
    UnknownNode(String),
    #[error("arc {0} -> {1} connects two nodes of the same kind")]
    ArcBetweenSameKind(String, String),
    #[error("duplicate arc {0} -> {1}")]
    DuplicateArc(String, String),
    #[error("transition '{0}' is not enabled")]
    NotEnabled(String),
    #[error("transition at position {0} is not enabled")]
    NotEnabledAt(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    /// `None` for silent (τ) transitions.
    pub label: Option<String>,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

/// Multiset of places, stored sparsely and sorted by place id so that equal
/// markings hash equally.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(Vec<(PlaceId, u32)>);

impl Marking {
    pub fn new() -> Self {
        Marking(Vec::new())
    }

    pub fn from_pairs<I: IntoIterator<Item = (PlaceId, u32)>>(pairs: I) -> Self {
        let mut m = Marking::new();
        for (p, k) in pairs {
            m.add(p, k);
        }
        m
    }

    pub fn get(&self, place: PlaceId) -> u32 {
        match self.0.binary_search_by_key(&place, |&(p, _)| p) {
            Ok(idx) => self.0[idx].1,
            Err(_) => 0,
        }
    }

    pub fn add(&mut self, place: PlaceId, count: u32) {
        if count == 0 {
            return;
        }
        match self.0.binary_search_by_key(&place, |&(p, _)| p) {
            Ok(idx) => self.0[idx].1 += count,
            Err(idx) => self.0.insert(idx, (place, count)),
        }
    }

    /// Removes one token; returns false if `place` is empty.
    pub fn take(&mut self, place: PlaceId) -> bool {
        match self.0.binary_search_by_key(&place, |&(p, _)| p) {
            Ok(idx) => {
                self.0[idx].1 -= 1;
                if self.0[idx].1 == 0 {
                    self.0.remove(idx);
                }
                true
            }
            Err(_) => false,
        }
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&(_, k)| k as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlaceId, u32)> + '_ {
        self.0.iter().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Warning)
    }

    pub fn is_ok(&self) -> bool {
        self.errors().next().is_none()
    }

    fn push(&mut self, severity: Severity, message: String) {
        self.diagnostics.push(Diagnostic { severity, message });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkflowNet {
    places: Vec<String>,
    transitions: Vec<Transition>,
    preset: Vec<Vec<PlaceId>>,
    postset: Vec<Vec<PlaceId>>,
    initial: Marking,
    final_marking: Marking,
}

impl WorkflowNet {
    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t.0]
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn label(&self, t: TransitionId) -> Option<&str> {
        self.transitions[t.0].label.as_deref()
    }

    pub fn preset(&self, t: TransitionId) -> &[PlaceId] {
        &self.preset[t.0]
    }

    pub fn postset(&self, t: TransitionId) -> &[PlaceId] {
        &self.postset[t.0]
    }

    /// Empty preset and postset: always enabled, marking unchanged.
    pub fn is_free(&self, t: TransitionId) -> bool {
        self.preset[t.0].is_empty() && self.postset[t.0].is_empty()
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    pub fn place_id(&self, name: &str) -> Option<PlaceId> {
        self.places.iter().position(|p| p == name).map(PlaceId)
    }

    pub fn transition_id(&self, name: &str) -> Option<TransitionId> {
        self.transitions.iter().position(|t| t.name == name).map(TransitionId)
    }

    pub fn is_enabled(&self, marking: &Marking, t: TransitionId) -> bool {
        self.preset[t.0].iter().all(|&p| marking.get(p) > 0)
    }

    /// Enabled transitions in id order.
    pub fn enabled_transitions(&self, marking: &Marking) -> Vec<TransitionId> {
        self.transition_ids().filter(|&t| self.is_enabled(marking, t)).collect()
    }

    pub fn fire(&self, marking: &Marking, t: TransitionId) -> Result<Marking, NetError> {
        if !self.is_enabled(marking, t) {
            return Err(NetError::NotEnabled(self.transitions[t.0].name.clone()));
        }
        let mut next = marking.clone();
        for &p in &self.preset[t.0] {
            next.take(p);
        }
        for &p in &self.postset[t.0] {
            next.add(p, 1);
        }
        Ok(next)
    }

    /// Markings reached after each firing of `sequence`, starting from the
    /// initial marking.
    pub fn replay_sequence(&self, sequence: &[TransitionId]) -> Result<Vec<Marking>, NetError> {
        let mut marking = self.initial.clone();
        let mut out = Vec::with_capacity(sequence.len());
        for (i, &t) in sequence.iter().enumerate() {
            marking = self.fire(&marking, t).map_err(|_| NetError::NotEnabledAt(i))?;
            out.push(marking.clone());
        }
        Ok(out)
    }

    /// Labels of the visible transitions of `sequence`, silent ones dropped.
    pub fn observable(&self, sequence: &[TransitionId]) -> Vec<String> {
        sequence.iter().filter_map(|&t| self.label(t).map(str::to_string)).collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let np = self.places.len();
        let mut place_in: Vec<Vec<TransitionId>> = vec![Vec::new(); np];
        let mut place_out: Vec<Vec<TransitionId>> = vec![Vec::new(); np];
        for t in self.transition_ids() {
            for &p in &self.postset[t.0] {
                place_in[p.0].push(t);
            }
            for &p in &self.preset[t.0] {
                place_out[p.0].push(t);
            }
        }

        let sources: Vec<PlaceId> = (0..np).filter(|&p| place_in[p].is_empty()).map(PlaceId).collect();
        let sinks: Vec<PlaceId> = (0..np).filter(|&p| place_out[p].is_empty()).map(PlaceId).collect();
        if sources.len() != 1 {
            report.push(
                Severity::Error,
                format!("expected exactly one input place, found {}: {}", sources.len(), self.place_list(&sources)),
            );
        }
        if sinks.len() != 1 {
            report.push(
                Severity::Error,
                format!("expected exactly one output place, found {}: {}", sinks.len(), self.place_list(&sinks)),
            );
        }
        if let [source] = sources.as_slice() {
            if self.initial != Marking::from_pairs([(*source, 1)]) {
                report.push(
                    Severity::Error,
                    format!("initial marking must be one token in '{}'", self.places[source.0]),
                );
            }
        }
        if let [sink] = sinks.as_slice() {
            if self.final_marking != Marking::from_pairs([(*sink, 1)]) {
                report.push(
                    Severity::Error,
                    format!("final marking must be one token in '{}'", self.places[sink.0]),
                );
            }
        }

        for t in self.transition_ids() {
            if self.is_free(t) {
                report.push(
                    Severity::Warning,
                    format!("transition '{}' has no arcs and may fire at any time", self.transitions[t.0].name),
                );
            }
        }

        // Walk condition: every connected node lies on a path from the input
        // place to the output place. Nodes are places 0..np, then transitions.
        if let ([source], [sink]) = (sources.as_slice(), sinks.as_slice()) {
            let nt = self.transitions.len();
            let mut forward: Vec<Vec<usize>> = vec![Vec::new(); np + nt];
            let mut backward: Vec<Vec<usize>> = vec![Vec::new(); np + nt];
            for t in 0..nt {
                for &p in &self.preset[t] {
                    forward[p.0].push(np + t);
                    backward[np + t].push(p.0);
                }
                for &p in &self.postset[t] {
                    forward[np + t].push(p.0);
                    backward[p.0].push(np + t);
                }
            }
            let from_source = reachable(&forward, source.0);
            let to_sink = reachable(&backward, sink.0);
            for node in 0..np + nt {
                if node >= np && self.is_free(TransitionId(node - np)) {
                    continue;
                }
                if !(from_source[node] && to_sink[node]) {
                    let name = if node < np {
                        format!("place '{}'", self.places[node])
                    } else {
                        format!("transition '{}'", self.transitions[node - np].name)
                    };
                    report.push(Severity::Error, format!("{name} is not on a path from input to output place"));
                }
            }
        }
        report
    }

    fn place_list(&self, places: &[PlaceId]) -> String {
        places.iter().map(|p| self.places[p.0].as_str()).collect::<Vec<_>>().join(", ")
    }
}

fn reachable(adjacency: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adjacency.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(n) = queue.pop_front() {
        for &m in &adjacency[n] {
            if !seen[m] {
                seen[m] = true;
                queue.push_back(m);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeRef {
    Place(PlaceId),
    Transition(TransitionId),
}

/// Builds a [`WorkflowNet`] from named nodes.
#[derive(Debug, Default)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<Transition>,
    index: HashMap<String, NodeRef>,
    arcs: Vec<(String, String)>,
    initial: Vec<(String, u32)>,
    final_marking: Vec<(String, u32)>,
    duplicate: Option<String>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, name: &str) -> &mut Self {
        let id = PlaceId(self.places.len());
        self.places.push(name.to_string());
        self.register(name, NodeRef::Place(id));
        self
    }

    pub fn transition(&mut self, name: &str, label: Option<&str>) -> &mut Self {
        let id = TransitionId(self.transitions.len());
        self.transitions.push(Transition {
            name: name.to_string(),
            label: label.map(str::to_string),
        });
        self.register(name, NodeRef::Transition(id));
        self
    }

    pub fn arc(&mut self, from: &str, to: &str) -> &mut Self {
        self.arcs.push((from.to_string(), to.to_string()));
        self
    }

    pub fn initial(&mut self, place: &str, tokens: u32) -> &mut Self {
        self.initial.push((place.to_string(), tokens));
        self
    }

    pub fn final_marking(&mut self, place: &str, tokens: u32) -> &mut Self {
        self.final_marking.push((place.to_string(), tokens));
        self
    }

    fn register(&mut self, name: &str, node: NodeRef) {
        // Duplicates are reported by `build`; the first binding wins.
        if self.index.contains_key(name) {
            self.duplicate.get_or_insert_with(|| name.to_string());
        } else {
            self.index.insert(name.to_string(), node);
        }
    }

    pub fn build(&self) -> Result<WorkflowNet, NetError> {
        if let Some(name) = &self.duplicate {
            return Err(NetError::DuplicateId(name.clone()));
        }
        let lookup = |name: &str| self.index.get(name).copied().ok_or_else(|| NetError::UnknownNode(name.to_string()));
        let mut preset = vec![Vec::new(); self.transitions.len()];
        let mut postset = vec![Vec::new(); self.transitions.len()];
        for (from, to) in &self.arcs {
            let list = match (lookup(from)?, lookup(to)?) {
                (NodeRef::Place(p), NodeRef::Transition(t)) => (&mut preset[t.0], p),
                (NodeRef::Transition(t), NodeRef::Place(p)) => (&mut postset[t.0], p),
                _ => return Err(NetError::ArcBetweenSameKind(from.clone(), to.clone())),
            };
            let (places, p): (&mut Vec<PlaceId>, PlaceId) = list;
            if places.contains(&p) {
                return Err(NetError::DuplicateArc(from.clone(), to.clone()));
            }
            places.push(p);
        }
        for places in preset.iter_mut().chain(postset.iter_mut()) {
            places.sort_unstable();
        }
        let marking = |pairs: &[(String, u32)]| -> Result<Marking, NetError> {
            let mut m = Marking::new();
            for (name, k) in pairs {
                match lookup(name)? {
                    NodeRef::Place(p) => m.add(p, *k),
                    NodeRef::Transition(_) => return Err(NetError::UnknownNode(name.clone())),
                }
            }
            Ok(m)
        };
        Ok(WorkflowNet {
            places: self.places.clone(),
            transitions: self.transitions.clone(),
            preset,
            postset,
            initial: marking(&self.initial)?,
            final_marking: marking(&self.final_marking)?,
        })
    }
}
