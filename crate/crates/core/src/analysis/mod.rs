//! Static analyses over equations: reactivity (every instant terminates) and
//! bounded evaluation contexts (the CPS translation only needs finitely many
//! indexed equations).

mod bounded;
mod graph;
mod reactivity;

pub use bounded::{bounded_call, bounded_constraints, check_bounded, BoundedConstraints, Label};
pub use graph::Verdict;
pub use reactivity::{
    call_of, call_of_context, check_reactivity, check_reactivity_with, reactivity_constraints, unfold, CallResult,
    Flag, DEFAULT_UNFOLD_DEPTH,
};
pub(crate) use graph::acyclic_verdict;
