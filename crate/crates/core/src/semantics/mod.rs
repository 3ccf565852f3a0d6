//! Small-step execution of threads, the end-of-instant rewrite, and the
//! instant machine turning input sets into output sets.

mod context;
mod env;
mod run;
mod step;

pub use context::{decompose, EvalContext, Redex, WatchFrame};
pub use env::Environment;
pub use run::{
    configuration_key, run_instant, run_trace, successors, Execution, InstantResult, Policy, Reactive,
    ReactiveProgram, RunConfig, Trace, TraceStep, DEFAULT_FUEL,
};
pub use run::fmt_set;
pub use step::{is_suspended, step_thread, thread_end_of_instant, Step};

/// Errors raised while running a program.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("instant {instant} did not suspend within {steps} reductions")]
    FuelExhausted { steps: u64, instant: usize },
    #[error("signal `{0}` is not defined in the environment")]
    UnboundSignal(String),
    #[error("unbound identifier `{0}`")]
    UnboundIdentifier(String),
    #[error("end of instant applied to a thread that can still move")]
    NotSuspended,
    #[error("`{0}` is not a declared input")]
    UndeclaredInput(String),
}
