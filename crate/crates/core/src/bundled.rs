//! The order-to-cash running example: a Workflow net with three free
//! transitions and eleven Declare constraints, plus a small log of the
//! traces discussed alongside it.
//!
//! | transition | label | | transition | label |
//! |---|---|---|---|---|
//! | t1 | o (create order) | | t8 | c (cancel) |
//! | t2 | p (pay) | | t9 | r (refund) |
//! | t3 | τ | | t10 | x (abort) |
//! | t4 | i (invoice) | | t11 | n (receive cancellation, free) |
//! | t5 | € (charge) | | t12 | w (withdraw product, free) |
//! | t6 | s (ship) | | t13 | m (return money, free) |
//! | t7 | τ | | | |

use crate::eventlog::{parse_csv, parse_xes, EventLog, ReadOptions};
use crate::mixedmodel::MixedModel;
use crate::model_file::ModelFile;

pub const RUNNING_EXAMPLE_MODEL: &str = include_str!("../assets/running_example.json");
pub const RUNNING_EXAMPLE_LOG_CSV: &str = include_str!("../assets/running_example.csv");
pub const RUNNING_EXAMPLE_LOG_XES: &str = include_str!("../assets/running_example.xes");

pub fn running_example() -> MixedModel {
    ModelFile::from_json(RUNNING_EXAMPLE_MODEL)
        .and_then(|f| f.build())
        .expect("bundled model is valid")
}

pub fn running_example_log() -> EventLog {
    parse_csv(RUNNING_EXAMPLE_LOG_CSV.as_bytes()).expect("bundled log is valid")
}

pub fn running_example_log_xes() -> EventLog {
    parse_xes(RUNNING_EXAMPLE_LOG_XES.as_bytes(), &ReadOptions::default()).expect("bundled log is valid")
}
