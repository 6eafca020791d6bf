//! Declare templates and their instantiation as constraint automata.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::fsa::{compile_regex, Alphabet, Fsa, FsaError, StateId, SymbolClass, TruthStatus};
use crate::petrinet::TransitionId;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DeclareError {
    #[error("unknown template '{0}'")]
    UnknownTemplate(String),
    #[error("unknown transition {0}")]
    UnknownTransition(TransitionId),
    #[error("{template} expects {expected} parameter(s), got {found}")]
    ArityMismatch {
        template: Template,
        expected: usize,
        found: usize,
    },
    #[error("parameters of {0} must be distinct transitions")]
    DuplicateParams(Template),
    #[error("{0}: a repetition count is required for counted templates and forbidden otherwise")]
    CountMismatch(Template),
    #[error(transparent)]
    Automaton(#[from] FsaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Template {
    Existence,
    Absence,
    Exactly,
    Init,
    End,
    RespondedExistence,
    CoExistence,
    Response,
    Precedence,
    AlternateResponse,
    AlternatePrecedence,
    ChainResponse,
    ChainPrecedence,
    NotCoExistence,
    NotSuccession,
    NotChainSuccession,
    Choice,
    ExclusiveChoice,
    Succession,
    AlternateSuccession,
    Unique,
}

impl Template {
    pub const ALL: [Template; 21] = [
        Template::Existence,
        Template::Absence,
        Template::Exactly,
        Template::Init,
        Template::End,
        Template::RespondedExistence,
        Template::CoExistence,
        Template::Response,
        Template::Precedence,
        Template::AlternateResponse,
        Template::AlternatePrecedence,
        Template::ChainResponse,
        Template::ChainPrecedence,
        Template::NotCoExistence,
        Template::NotSuccession,
        Template::NotChainSuccession,
        Template::Choice,
        Template::ExclusiveChoice,
        Template::Succession,
        Template::AlternateSuccession,
        Template::Unique,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::Existence => "existence",
            Template::Absence => "absence",
            Template::Exactly => "exactly",
            Template::Init => "init",
            Template::End => "end",
            Template::RespondedExistence => "responded_existence",
            Template::CoExistence => "co_existence",
            Template::Response => "response",
            Template::Precedence => "precedence",
            Template::AlternateResponse => "alternate_response",
            Template::AlternatePrecedence => "alternate_precedence",
            Template::ChainResponse => "chain_response",
            Template::ChainPrecedence => "chain_precedence",
            Template::NotCoExistence => "not_co_existence",
            Template::NotSuccession => "not_succession",
            Template::NotChainSuccession => "not_chain_succession",
            Template::Choice => "choice",
            Template::ExclusiveChoice => "exclusive_choice",
            Template::Succession => "succession",
            Template::AlternateSuccession => "alternate_succession",
            Template::Unique => "unique",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Template::Existence
            | Template::Absence
            | Template::Exactly
            | Template::Init
            | Template::End
            | Template::Unique => 1,
            _ => 2,
        }
    }

    /// Existence, Absence and Exactly take a repetition count.
    pub fn is_counted(self) -> bool {
        matches!(self, Template::Existence | Template::Absence | Template::Exactly)
    }

    /// Pattern over the classes `a` (first parameter), `b` (second) and
    /// `OTHER`. `None` for templates defined as intersections.
    pub fn pattern(self, n: Option<u32>) -> Option<String> {
        let n = n.unwrap_or(1);
        let p = match self {
            Template::Existence => format!(".*(a.*){{{n}}}"),
            Template::Absence => format!("[^a]*(a?[^a]*){{{n}}}"),
            Template::Exactly => format!("[^a]*(a[^a]*){{{n}}}"),
            Template::Unique => "[^a]*(a?[^a]*){1}".to_string(),
            Template::Init => "(a.*)?".to_string(),
            Template::End => ".*a".to_string(),
            Template::RespondedExistence => "[^a]*((a.*b.*)|(b.*a.*))?".to_string(),
            Template::CoExistence => "[^ab]*((a.*b.*)|(b.*a.*))?".to_string(),
            Template::Response => "[^a]*(a.*b)*[^a]*".to_string(),
            Template::Precedence => "[^b]*(a.*b)*[^b]*".to_string(),
            Template::AlternateResponse => "[^a]*(a[^a]*b[^a]*)*".to_string(),
            Template::AlternatePrecedence => "[^b]*(a[^b]*b[^b]*)*".to_string(),
            Template::ChainResponse => "[^a]*(ab[^a]*)*".to_string(),
            Template::ChainPrecedence => "[^b]*(ab[^b]*)*".to_string(),
            Template::NotCoExistence => "[^ab]*((a[^b]*)|(b[^a]*))?".to_string(),
            Template::NotSuccession => "[^a]*(a[^b]*)*".to_string(),
            Template::NotChainSuccession => "[^a]*(a+[^ab][^a]*)*a*".to_string(),
            Template::Choice => ".*[ab].*".to_string(),
            Template::ExclusiveChoice => "[^b]*a[^b]*|[^a]*b[^a]*".to_string(),
            Template::Succession | Template::AlternateSuccession => return None,
        };
        Some(p)
    }

    /// Minimal automaton over `{a, b, OTHER}` (or `{a, OTHER}` when unary).
    pub fn automaton(self, n: Option<u32>) -> Result<Fsa, DeclareError> {
        if self.is_counted() != n.is_some() {
            return Err(DeclareError::CountMismatch(self));
        }
        let alphabet = Alphabet::with_arity(self.arity());
        let fsa = match self {
            Template::Succession => {
                Template::Response.automaton(None)?.intersect(&Template::Precedence.automaton(None)?)?
            }
            Template::AlternateSuccession => Template::AlternateResponse
                .automaton(None)?
                .intersect(&Template::AlternatePrecedence.automaton(None)?)?,
            _ => compile_regex(&self.pattern(n).expect("regex-defined template"), &alphabet)?,
        };
        Ok(fsa)
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Template {
    type Err = DeclareError;

    /// Case-insensitive; `_`, `-` and spaces are ignored, so `NotSuccession`,
    /// `not-succession` and `NOT_SUCCESSION` all parse.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .flat_map(char::to_lowercase)
            .collect();
        Template::ALL
            .into_iter()
            .find(|t| t.name().replace('_', "") == key)
            .ok_or_else(|| DeclareError::UnknownTemplate(s.to_string()))
    }
}

/// A template bound to concrete transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub id: String,
    pub template: Template,
    pub params: Vec<TransitionId>,
    pub n: Option<u32>,
}

impl Constraint {
    pub fn new(id: impl Into<String>, template: Template, params: Vec<TransitionId>, n: Option<u32>) -> Self {
        Constraint {
            id: id.into(),
            template,
            params,
            n,
        }
    }
}

/// A constraint together with its automaton lifted to the model's transitions.
#[derive(Debug, Clone)]
pub struct ConstraintAutomaton {
    pub constraint: Constraint,
    pub fsa: Fsa,
    /// Symbol class of each transition, indexed by transition id.
    pub lift: Vec<SymbolClass>,
}

/// Instantiates `constraint` over a model with `transition_count` transitions.
pub fn instantiate(constraint: Constraint, transition_count: usize) -> Result<ConstraintAutomaton, DeclareError> {
    let template = constraint.template;
    if constraint.params.len() != template.arity() {
        return Err(DeclareError::ArityMismatch {
            template,
            expected: template.arity(),
            found: constraint.params.len(),
        });
    }
    if let Some(&bad) = constraint.params.iter().find(|t| t.0 >= transition_count) {
        return Err(DeclareError::UnknownTransition(bad));
    }
    if constraint.params.len() == 2 && constraint.params[0] == constraint.params[1] {
        return Err(DeclareError::DuplicateParams(template));
    }
    let fsa = template.automaton(constraint.n)?;
    let alphabet = fsa.alphabet().clone();
    let lift = (0..transition_count)
        .map(|t| match constraint.params.iter().position(|p| p.0 == t) {
            Some(k) => alphabet.param(k),
            None => alphabet.other(),
        })
        .collect();
    Ok(ConstraintAutomaton { constraint, fsa, lift })
}

impl ConstraintAutomaton {
    pub fn id(&self) -> &str {
        &self.constraint.id
    }

    pub fn initial(&self) -> StateId {
        self.fsa.initial()
    }

    #[inline]
    pub fn step(&self, state: StateId, transition: TransitionId) -> StateId {
        self.fsa.step(state, self.lift[transition.0])
    }

    pub fn status(&self, state: StateId) -> TruthStatus {
        self.fsa.status(state)
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        self.fsa.is_accepting(state)
    }

    /// True for the permanent-violation state.
    #[inline]
    pub fn is_sink(&self, state: StateId) -> bool {
        self.fsa.status(state) == TruthStatus::PermViolation
    }

    pub fn state_after(&self, sequence: &[TransitionId]) -> StateId {
        sequence.iter().fold(self.initial(), |s, &t| self.step(s, t))
    }

    pub fn status_after(&self, sequence: &[TransitionId]) -> TruthStatus {
        self.status(self.state_after(sequence))
    }
}
