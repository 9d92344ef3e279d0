//! Library surface of the experiment runner: specs, execution, reports and
//! replay verification. The `truncpivot` binary is a thin wrapper over
//! these modules.

pub mod replay;
pub mod report;
pub mod runner;
pub mod spec;

pub use replay::{verify, ReplayFile};
pub use report::{ExperimentReport, RunRecord};
pub use runner::{run, RunError, RunOutput};
pub use spec::{AlgoKind, ExperimentSpec, GeneratorSpec, OrderSpec};
