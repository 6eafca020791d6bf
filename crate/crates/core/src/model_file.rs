//! JSON serialization of mixed-paradigm models.
//!
//! ```json
//! {
//!   "places": ["p1", "p2"],
//!   "transitions": [{"id": "t1", "label": "o"}, {"id": "t2", "label": null}],
//!   "arcs": [{"from": "p1", "to": "t1"}, {"from": "t1", "to": "p2"}],
//!   "initial_marking": {"p1": 1},
//!   "final_marking": {"p2": 1},
//!   "constraints": [{"id": "k1", "template": "precedence", "params": ["o", "t2"]}]
//! }
//! ```
//!
//! Constraint parameters name a transition id or, failing that, the label of
//! exactly one transition.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::declare::{instantiate, Constraint, DeclareError, Template};
use crate::mixedmodel::MixedModel;
use crate::petrinet::{NetBuilder, NetError, TransitionId, WorkflowNet};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read model: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid model JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("constraint '{constraint}': unknown template '{name}'")]
    UnknownTemplate { constraint: String, name: String },
    #[error("constraint '{constraint}': label '{label}' is carried by several transitions")]
    AmbiguousLabel { constraint: String, label: String },
    #[error("constraint '{constraint}': '{name}' is neither a transition id nor a label")]
    UnknownReference { constraint: String, name: String },
    #[error("constraint '{constraint}': {source}")]
    Constraint { constraint: String, source: DeclareError },
    #[error("duplicate constraint id '{0}'")]
    DuplicateConstraintId(String),
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::Io(_) => "IO",
            ModelError::Json(_) => "INVALID_JSON",
            ModelError::Net(_) => "INVALID_NET",
            ModelError::UnknownTemplate { .. } => "UNKNOWN_TEMPLATE",
            ModelError::AmbiguousLabel { .. } => "AMBIGUOUS_LABEL",
            ModelError::UnknownReference { .. } => "UNKNOWN_TRANSITION",
            ModelError::Constraint { .. } => "INVALID_CONSTRAINT",
            ModelError::DuplicateConstraintId(_) => "DUPLICATE_CONSTRAINT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub id: String,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSpec {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub template: String,
    pub params: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub places: Vec<String>,
    pub transitions: Vec<TransitionSpec>,
    pub arcs: Vec<ArcSpec>,
    pub initial_marking: BTreeMap<String, u32>,
    pub final_marking: BTreeMap<String, u32>,
    #[serde(default)]
    pub constraints: Vec<ConstraintSpec>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files always serialize")
    }

    pub fn build_net(&self) -> Result<WorkflowNet, ModelError> {
        let mut b = NetBuilder::new();
        for p in &self.places {
            b.place(p);
        }
        for t in &self.transitions {
            b.transition(&t.id, t.label.as_deref());
        }
        for a in &self.arcs {
            b.arc(&a.from, &a.to);
        }
        for (p, &k) in &self.initial_marking {
            b.initial(p, k);
        }
        for (p, &k) in &self.final_marking {
            b.final_marking(p, k);
        }
        Ok(b.build()?)
    }

    fn resolve(&self, net: &WorkflowNet, constraint: &str, name: &str) -> Result<TransitionId, ModelError> {
        if let Some(t) = net.transition_id(name) {
            return Ok(t);
        }
        let mut carriers = net.transition_ids().filter(|&t| net.label(t) == Some(name));
        match (carriers.next(), carriers.next()) {
            (Some(t), None) => Ok(t),
            (Some(_), Some(_)) => Err(ModelError::AmbiguousLabel {
                constraint: constraint.to_string(),
                label: name.to_string(),
            }),
            _ => Err(ModelError::UnknownReference {
                constraint: constraint.to_string(),
                name: name.to_string(),
            }),
        }
    }

    /// Resolves and instantiates every constraint, reporting all failures.
    pub fn constraint_errors(&self, net: &WorkflowNet) -> Vec<ModelError> {
        self.constraints(net).err().unwrap_or_default()
    }

    fn constraints(&self, net: &WorkflowNet) -> Result<Vec<crate::declare::ConstraintAutomaton>, Vec<ModelError>> {
        let mut out = Vec::new();
        let mut errors = Vec::new();
        let mut ids: Vec<String> = Vec::new();
        for (idx, spec) in self.constraints.iter().enumerate() {
            let id = spec.id.clone().unwrap_or_else(|| format!("k{}", idx + 1));
            if ids.contains(&id) {
                errors.push(ModelError::DuplicateConstraintId(id));
                continue;
            }
            ids.push(id.clone());
            let template: Template = match spec.template.parse() {
                Ok(t) => t,
                Err(_) => {
                    errors.push(ModelError::UnknownTemplate {
                        constraint: id,
                        name: spec.template.clone(),
                    });
                    continue;
                }
            };
            let params: Result<Vec<TransitionId>, ModelError> =
                spec.params.iter().map(|p| self.resolve(net, &id, p)).collect();
            let params = match params {
                Ok(p) => p,
                Err(e) => {
                    errors.push(e);
                    continue;
                }
            };
            match instantiate(Constraint::new(id.clone(), template, params, spec.n), net.transitions().len()) {
                Ok(ca) => out.push(ca),
                Err(source) => errors.push(ModelError::Constraint { constraint: id, source }),
            }
        }
        if errors.is_empty() {
            Ok(out)
        } else {
            Err(errors)
        }
    }

    pub fn build(&self) -> Result<MixedModel, ModelError> {
        let net = self.build_net()?;
        let constraints = self.constraints(&net).map_err(|mut e| e.remove(0))?;
        Ok(MixedModel::new(net, constraints))
    }

    /// Serializes a model; constraint parameters are written as transition ids.
    pub fn from_model(mp: &MixedModel) -> Self {
        let net = &mp.net;
        let mut arcs = Vec::new();
        for t in net.transition_ids() {
            let name = &net.transition(t).name;
            for p in net.preset(t) {
                arcs.push(ArcSpec {
                    from: net.places()[p.0].clone(),
                    to: name.clone(),
                });
            }
            for p in net.postset(t) {
                arcs.push(ArcSpec {
                    from: name.clone(),
                    to: net.places()[p.0].clone(),
                });
            }
        }
        let marking = |m: &crate::petrinet::Marking| m.iter().map(|(p, k)| (net.places()[p.0].clone(), k)).collect();
        ModelFile {
            places: net.places().to_vec(),
            transitions: net
                .transitions()
                .iter()
                .map(|t| TransitionSpec {
                    id: t.name.clone(),
                    label: t.label.clone(),
                })
                .collect(),
            arcs,
            initial_marking: marking(net.initial_marking()),
            final_marking: marking(net.final_marking()),
            constraints: mp
                .constraints
                .iter()
                .map(|ca| ConstraintSpec {
                    id: Some(ca.id().to_string()),
                    template: ca.constraint.template.name().to_string(),
                    params: ca.constraint.params.iter().map(|&t| net.transition(t).name.clone()).collect(),
                    n: ca.constraint.n,
                })
                .collect(),
        }
    }
}

pub fn load_model(path: &Path) -> Result<MixedModel, ModelError> {
    ModelFile::load(path)?.build()
}
