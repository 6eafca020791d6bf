//! Joint semantics of a Workflow net and a set of constraint automata.

use std::collections::HashMap;

use crate::declare::ConstraintAutomaton;
use crate::fsa::{StateId, TruthStatus};
use crate::petrinet::{Marking, NetError, TransitionId, WorkflowNet};

/// Marking plus one state per constraint automaton.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub marking: Marking,
    pub states: Vec<StateId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    /// A firing sequence that does not end in the final marking.
    Computation,
    /// Ends in the final marking with some constraint not accepting.
    WorkflowRun,
    /// Ends in the final marking with every constraint accepting.
    FullRun,
}

#[derive(Debug, Clone)]
pub struct MixedModel {
    pub net: WorkflowNet,
    pub constraints: Vec<ConstraintAutomaton>,
    by_label: HashMap<String, Vec<TransitionId>>,
}

impl MixedModel {
    /// Panics if a constraint was instantiated for a different transition count.
    pub fn new(net: WorkflowNet, constraints: Vec<ConstraintAutomaton>) -> Self {
        for ca in &constraints {
            assert_eq!(
                ca.lift.len(),
                net.transitions().len(),
                "constraint {} was instantiated for another net",
                ca.id()
            );
        }
        let mut by_label: HashMap<String, Vec<TransitionId>> = HashMap::new();
        for t in net.transition_ids() {
            if let Some(label) = net.label(t) {
                by_label.entry(label.to_string()).or_default().push(t);
            }
        }
        MixedModel {
            net,
            constraints,
            by_label,
        }
    }

    /// Visible transitions carrying `label`, in id order.
    pub fn transitions_labelled(&self, label: &str) -> &[TransitionId] {
        self.by_label.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.by_label.contains_key(label)
    }

    pub fn constraint_index(&self, id: &str) -> Option<usize> {
        self.constraints.iter().position(|c| c.id() == id)
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration {
            marking: self.net.initial_marking().clone(),
            states: self.constraints.iter().map(|c| c.initial()).collect(),
        }
    }

    /// Constraint states after `t`, without touching the marking.
    pub fn step_states(&self, states: &[StateId], t: TransitionId) -> Vec<StateId> {
        self.constraints.iter().zip(states).map(|(c, &s)| c.step(s, t)).collect()
    }

    pub fn step(&self, config: &Configuration, t: TransitionId) -> Result<Configuration, NetError> {
        Ok(Configuration {
            marking: self.net.fire(&config.marking, t)?,
            states: self.step_states(&config.states, t),
        })
    }

    pub fn statuses(&self, config: &Configuration) -> Vec<TruthStatus> {
        self.constraints.iter().zip(&config.states).map(|(c, &s)| c.status(s)).collect()
    }

    pub fn all_accepting(&self, states: &[StateId]) -> bool {
        self.constraints.iter().zip(states).all(|(c, &s)| c.is_accepting(s))
    }

    pub fn is_final(&self, config: &Configuration) -> bool {
        &config.marking == self.net.final_marking()
    }

    pub fn classify_run(&self, sequence: &[TransitionId]) -> Result<RunKind, NetError> {
        let mut config = self.initial_configuration();
        for (i, &t) in sequence.iter().enumerate() {
            config = self.step(&config, t).map_err(|_| NetError::NotEnabledAt(i))?;
        }
        Ok(if !self.is_final(&config) {
            RunKind::Computation
        } else if self.all_accepting(&config.states) {
            RunKind::FullRun
        } else {
            RunKind::WorkflowRun
        })
    }

    /// Whether firing `t` from `states` sends no constraint into its sink.
    pub fn admits(&self, states: &[StateId], t: TransitionId) -> bool {
        self.constraints.iter().zip(states).all(|(c, &s)| !c.is_sink(c.step(s, t)))
    }

    /// Enabled transitions that keep every constraint out of its sink.
    pub fn admitted_transitions(&self, config: &Configuration) -> Vec<TransitionId> {
        self.net
            .enabled_transitions(&config.marking)
            .into_iter()
            .filter(|&t| self.admits(&config.states, t))
            .collect()
    }
}
