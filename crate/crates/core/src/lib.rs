//! Conformance checking of event logs against mixed-paradigm process models.
//!
//! A model is a Workflow net whose transitions are additionally constrained
//! by Declare constraints. Traces are aligned against it with A* in one of
//! three modes:
//!
//! * [`Mode::Workflow`]: the constraints are monitored but never enforced.
//! * [`Mode::Full`]: the induced run must satisfy every constraint.
//! * [`Mode::Violations`]: constraints may be violated, each at a cost.
//!
//! The engine is generic over the cost scalar ([`CostValue`]); the aliases
//! below fix it to exact rationals or `f64`.

pub mod aligner;
pub mod bundled;
pub mod declare;
pub mod eventlog;
pub mod fitness;
pub mod fsa;
pub mod mixedmodel;
pub mod model_file;
pub mod oracle;
pub mod petrinet;
pub mod report;
pub mod scalar;

pub use aligner::{
    align, align_full, align_with_heuristic, align_with_violations, align_workflow, AlignError, AlignOptions,
    Alignment, CostScheme, Heuristic, HeuristicKind, Mode, Move, MoveKind, UnmatchedHeuristic, ZeroHeuristic,
};
pub use declare::{Constraint, ConstraintAutomaton, DeclareError, Template};
pub use eventlog::{EventLog, LogError, LogWarning, ReadOptions};
pub use fitness::{check_log, trace_fitness, worst_case_cost, CheckOptions, LogResult, TraceResult};
pub use fsa::{Alphabet, Fsa, FsaError, StateId, SymbolClass, TruthStatus};
pub use mixedmodel::{Configuration, MixedModel, RunKind};
pub use model_file::{ModelError, ModelFile};
pub use oracle::{oracle_align, OracleError, OracleLimits, OracleResult};
pub use petrinet::{Marking, NetBuilder, NetError, PlaceId, Transition, TransitionId, WorkflowNet};
pub use scalar::{format_cost, CostValue, Rational};

pub type RationalCostScheme = CostScheme<Rational>;
pub type FloatCostScheme = CostScheme<f64>;
pub type RationalAlignment = Alignment<Rational>;
pub type FloatAlignment = Alignment<f64>;
pub type RationalLogResult = LogResult<Rational>;
pub type FloatLogResult = LogResult<f64>;
