//! A toolkit for a small synchronous language with threads, signals and
//! instants.

pub mod analysis;
pub mod cli;
pub mod cps;
pub mod encodings;
pub mod equiv;
pub mod mealy;
pub mod semantics;
pub mod syntax;
pub mod tailcore;
