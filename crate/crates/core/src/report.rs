//! Machine-readable reports of a log check.
//!
//! `report.json` is deterministic for identical inputs except for the
//! top-level `timing` object.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::aligner::{CostScheme, HeuristicKind, Move};
use crate::fitness::LogResult;
use crate::mixedmodel::MixedModel;
use crate::scalar::{format_cost, CostValue};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub mode: String,
    pub heuristic: String,
    pub costs: CostsReport,
    pub summary: SummaryReport,
    pub variants: Vec<VariantReport>,
    pub timing: TimingReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CostsReport {
    pub sync: String,
    pub tau: String,
    pub model: String,
    pub log: String,
    pub violation: String,
    pub violation_overrides: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryReport {
    pub traces: usize,
    pub variants: usize,
    pub failed_variants: usize,
    pub aggregate_fitness: String,
    pub aggregate_fitness_value: f64,
    pub mean_fitness: f64,
    pub violation_frequencies: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MoveReport {
    pub kind: &'static str,
    pub transition: Option<String>,
    pub label: Option<String>,
    pub event: Option<String>,
    pub newly_violated: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub code: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantReport {
    pub index: usize,
    pub trace: Vec<String>,
    pub multiplicity: usize,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_case_cost: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitness_value: Option<f64>,
    pub violated_constraints: Vec<String>,
    pub terminal_violations: Vec<String>,
    pub expansions: u64,
    pub moves: Vec<MoveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingReport {
    pub total_ms: f64,
    pub variant_ms: Vec<f64>,
}

pub fn move_report(mv: &Move, mp: &MixedModel) -> MoveReport {
    MoveReport {
        kind: mv.kind.as_str(),
        transition: mv.transition.map(|t| mp.net.transition(t).name.clone()),
        label: mv.transition.and_then(|t| mp.net.label(t).map(str::to_string)),
        event: mv.event.clone(),
        newly_violated: mv.newly_violated.clone(),
    }
}

pub fn costs_report<S: CostValue>(costs: &CostScheme<S>) -> CostsReport {
    CostsReport {
        sync: format_cost(&costs.sync),
        tau: format_cost(&costs.tau),
        model: format_cost(&costs.model),
        log: format_cost(&costs.log),
        violation: format_cost(&costs.default_violation),
        violation_overrides: costs.violation_overrides.iter().map(|(k, v)| (k.clone(), format_cost(v))).collect(),
    }
}

pub fn build_report<S: CostValue>(
    result: &LogResult<S>,
    mp: &MixedModel,
    costs: &CostScheme<S>,
    heuristic: HeuristicKind,
) -> Report {
    let mut variants = Vec::with_capacity(result.variants.len());
    let mut variant_ms = Vec::with_capacity(result.variants.len());
    for (index, v) in result.variants.iter().enumerate() {
        let mut report = VariantReport {
            index,
            trace: v.trace.clone(),
            multiplicity: v.multiplicity,
            status: "ok",
            cost: None,
            cost_value: None,
            worst_case_cost: None,
            fitness: None,
            fitness_value: None,
            violated_constraints: Vec::new(),
            terminal_violations: Vec::new(),
            expansions: 0,
            moves: Vec::new(),
            error: None,
        };
        match &v.outcome {
            Ok(r) => {
                let a = &r.alignment;
                report.cost = Some(format_cost(&a.total_cost));
                report.cost_value = Some(a.total_cost.to_f64_lossy());
                report.worst_case_cost = Some(format_cost(&r.worst_case_cost));
                report.fitness = Some(format_cost(&r.fitness));
                report.fitness_value = Some(r.fitness.to_f64_lossy());
                report.violated_constraints = a.violated_constraints.clone();
                report.terminal_violations = a.terminal_violations.clone();
                report.expansions = a.expansions;
                report.moves = a.moves.iter().map(|m| move_report(m, mp)).collect();
                variant_ms.push(r.elapsed.as_secs_f64() * 1e3);
            }
            Err(e) => {
                report.status = "error";
                report.error = Some(ErrorReport {
                    code: e.code(),
                    message: e.to_string(),
                });
                variant_ms.push(0.0);
            }
        }
        variants.push(report);
    }
    Report {
        mode: result.mode.as_str().to_string(),
        heuristic: heuristic.as_str().to_string(),
        costs: costs_report(costs),
        summary: SummaryReport {
            traces: result.total_traces,
            variants: result.variants.len(),
            failed_variants: result.failed_variants,
            aggregate_fitness: format_cost(&result.aggregate_fitness),
            aggregate_fitness_value: result.aggregate_fitness.to_f64_lossy(),
            mean_fitness: result.mean_fitness,
            violation_frequencies: result.violation_frequencies.clone(),
        },
        variants,
        timing: TimingReport {
            total_ms: result.elapsed.as_secs_f64() * 1e3,
            variant_ms,
        },
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// `variant,multiplicity,cost,fitness,n_violations,time_ms`, one row per
/// variant; failed variants leave cost and fitness empty.
pub fn summary_csv<S: CostValue>(result: &LogResult<S>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["variant", "multiplicity", "cost", "fitness", "n_violations", "time_ms"])
        .expect("in-memory write");
    for v in &result.variants {
        let trace = v.trace.join(" ");
        let multiplicity = v.multiplicity.to_string();
        let row = match &v.outcome {
            Ok(r) => [
                trace,
                multiplicity,
                format_cost(&r.alignment.total_cost),
                format!("{:.6}", r.fitness.to_f64_lossy()),
                r.alignment.violated_constraints.len().to_string(),
                format!("{:.3}", r.elapsed.as_secs_f64() * 1e3),
            ],
            Err(_) => [trace, multiplicity, String::new(), String::new(), String::new(), String::new()],
        };
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("CSV output is UTF-8")
}
