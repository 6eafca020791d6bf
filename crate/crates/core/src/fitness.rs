//! Trace fitness and log-level conformance checking.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::aligner::{align, AlignError, AlignOptions, Alignment, CostScheme, Mode};
use crate::eventlog::EventLog;
use crate::mixedmodel::MixedModel;
use crate::scalar::CostValue;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FitnessError {
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error("worst-case cost is zero while the optimal cost is not")]
    Degenerate,
}

impl FitnessError {
    pub fn code(&self) -> &'static str {
        match self {
            FitnessError::Align(e) => e.code(),
            FitnessError::Degenerate => "DEGENERATE",
        }
    }
}

/// Cost of aligning the empty trace plus one log move per event.
pub fn worst_case_cost<S: CostValue, T: AsRef<str>>(
    trace: &[T],
    mp: &MixedModel,
    mode: Mode,
    costs: &CostScheme<S>,
    options: &AlignOptions,
) -> Result<S, AlignError> {
    let empty: [&str; 0] = [];
    let base = align(&empty, mp, mode, costs, options)?.total_cost;
    Ok(with_log_moves(base, trace.len(), costs))
}

fn with_log_moves<S: CostValue>(base: S, events: usize, costs: &CostScheme<S>) -> S {
    (0..events).fold(base, |acc, _| acc + costs.log)
}

/// `1 - optimal / worst`, clamped to `[0, 1]`.
pub fn fitness_value<S: CostValue>(optimal: S, worst: S) -> Result<S, FitnessError> {
    if worst == S::zero() {
        return if optimal == S::zero() { Ok(S::one()) } else { Err(FitnessError::Degenerate) };
    }
    let f = S::one() - optimal / worst;
    Ok(if f.total_cmp(&S::zero()).is_lt() {
        S::zero()
    } else if f.total_cmp(&S::one()).is_gt() {
        S::one()
    } else {
        f
    })
}

#[derive(Debug, Clone)]
pub struct TraceResult<S> {
    pub alignment: Alignment<S>,
    pub worst_case_cost: S,
    pub fitness: S,
    pub elapsed: Duration,
}

pub fn trace_fitness<S: CostValue, T: AsRef<str>>(
    trace: &[T],
    mp: &MixedModel,
    mode: Mode,
    costs: &CostScheme<S>,
    options: &AlignOptions,
) -> Result<TraceResult<S>, FitnessError> {
    let start = Instant::now();
    let worst = worst_case_cost(trace, mp, mode, costs, options)?;
    let alignment = align(trace, mp, mode, costs, options)?;
    let fitness = fitness_value(alignment.total_cost, worst)?;
    Ok(TraceResult {
        alignment,
        worst_case_cost: worst,
        fitness,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub mode: Mode,
    pub align: AlignOptions,
    /// Worker threads; `None` uses the global pool, `Some(1)` runs inline.
    pub threads: Option<usize>,
    /// Align each distinct trace once. When off, every trace is aligned
    /// separately and reported with multiplicity 1.
    pub dedup: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            mode: Mode::Full,
            align: AlignOptions::default(),
            threads: None,
            dedup: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VariantResult<S> {
    pub trace: Vec<String>,
    pub multiplicity: usize,
    pub outcome: Result<TraceResult<S>, FitnessError>,
}

#[derive(Debug, Clone)]
pub struct LogResult<S> {
    pub mode: Mode,
    pub variants: Vec<VariantResult<S>>,
    /// `1 - Σ mult·opt / Σ mult·worst` over the aligned variants.
    pub aggregate_fitness: S,
    /// Multiplicity-weighted mean of the per-trace fitness values.
    pub mean_fitness: f64,
    /// Traces in which each constraint ends up violated.
    pub violation_frequencies: BTreeMap<String, usize>,
    pub total_traces: usize,
    pub failed_variants: usize,
    pub elapsed: Duration,
}

pub fn check_log<S: CostValue>(
    log: &EventLog,
    mp: &MixedModel,
    costs: &CostScheme<S>,
    options: &CheckOptions,
) -> LogResult<S> {
    let start = Instant::now();
    let mode = options.mode;
    let jobs: Vec<(&[String], usize)> = if options.dedup {
        log.variants.iter().map(|(t, &m)| (t.as_slice(), m)).collect()
    } else {
        log.variants
            .iter()
            .flat_map(|(t, &m)| std::iter::repeat_n(t.as_slice(), m))
            .map(|t| (t, 1))
            .collect()
    };

    // The empty-trace alignment is shared by every worst case.
    let empty: [&str; 0] = [];
    let base = align(&empty, mp, mode, costs, &options.align).map(|a| a.total_cost);

    let run = |trace: &[String]| -> Result<TraceResult<S>, FitnessError> {
        let t0 = Instant::now();
        let base = base.clone()?;
        let alignment = align(trace, mp, mode, costs, &options.align)?;
        let worst = with_log_moves(base, trace.len(), costs);
        let fitness = fitness_value(alignment.total_cost, worst)?;
        Ok(TraceResult {
            alignment,
            worst_case_cost: worst,
            fitness,
            elapsed: t0.elapsed(),
        })
    };

    let outcomes: Vec<Result<TraceResult<S>, FitnessError>> = match options.threads {
        Some(1) => jobs.iter().map(|(t, _)| run(t)).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| jobs.par_iter().map(|(t, _)| run(t)).collect()),
            Err(_) => jobs.iter().map(|(t, _)| run(t)).collect(),
        },
        None => jobs.par_iter().map(|(t, _)| run(t)).collect(),
    };

    let variants: Vec<VariantResult<S>> = jobs
        .iter()
        .zip(outcomes)
        .map(|((trace, multiplicity), outcome)| VariantResult {
            trace: trace.to_vec(),
            multiplicity: *multiplicity,
            outcome,
        })
        .collect();

    let mut optimal_sum = S::zero();
    let mut worst_sum = S::zero();
    let mut fitness_sum = 0.0;
    let mut aligned = 0usize;
    let mut violation_frequencies = BTreeMap::new();
    for ca in &mp.constraints {
        violation_frequencies.insert(ca.id().to_string(), 0usize);
    }
    for v in &variants {
        let Ok(result) = &v.outcome else { continue };
        let m = S::from_usize(v.multiplicity).expect("multiplicity fits the cost scalar");
        optimal_sum = optimal_sum + m * result.alignment.total_cost;
        worst_sum = worst_sum + m * result.worst_case_cost;
        fitness_sum += v.multiplicity as f64 * result.fitness.to_f64_lossy();
        aligned += v.multiplicity;
        for id in &result.alignment.violated_constraints {
            *violation_frequencies.entry(id.clone()).or_default() += v.multiplicity;
        }
    }
    let aggregate_fitness = fitness_value(optimal_sum, worst_sum).unwrap_or_else(|_| S::zero());
    LogResult {
        mode,
        aggregate_fitness,
        mean_fitness: if aligned == 0 { 1.0 } else { fitness_sum / aligned as f64 },
        violation_frequencies,
        total_traces: variants.iter().map(|v| v.multiplicity).sum(),
        failed_variants: variants.iter().filter(|v| v.outcome.is_err()).count(),
        variants,
        elapsed: start.elapsed(),
    }
}
