use std::collections::{BTreeSet, HashMap};

use crate::syntax::{NameSupply, Signal};

use super::RuntimeError;

/// Partial map from signal names to presence, plus the counter that hands
/// out names never used before.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Environment {
    values: HashMap<Signal, bool>,
    next_fresh: u32,
}

impl Environment {
    pub fn new(next_fresh: u32) -> Self {
        Environment { values: HashMap::new(), next_fresh }
    }

    /// The environment at the start of an instant: true on `inputs`, false on
    /// the other `known` signals, undefined elsewhere.
    pub fn for_instant<'a>(
        known: impl IntoIterator<Item = &'a Signal>,
        inputs: &BTreeSet<Signal>,
        next_fresh: u32,
    ) -> Self {
        let mut env = Environment::new(next_fresh);
        for s in known {
            env.values.insert(s.clone(), false);
        }
        for s in inputs {
            env.values.insert(s.clone(), true);
        }
        env
    }

    pub fn get(&self, s: &Signal) -> Option<bool> {
        self.values.get(s).copied()
    }

    /// Presence of `s`; fails if `s` is undefined.
    pub fn lookup(&self, s: &Signal) -> Result<bool, RuntimeError> {
        self.get(s).ok_or_else(|| RuntimeError::UnboundSignal(s.to_string()))
    }

    /// Sets `s` present. Returns whether it was absent before.
    pub fn emit(&mut self, s: &Signal) -> Result<bool, RuntimeError> {
        match self.values.get_mut(s) {
            Some(v) => Ok(!std::mem::replace(v, true)),
            None => Err(RuntimeError::UnboundSignal(s.to_string())),
        }
    }

    pub fn define(&mut self, s: Signal, present: bool) {
        self.values.insert(s, present);
    }

    /// Allocates a name outside the domain and defines it absent.
    pub fn allocate(&mut self) -> Signal {
        let s = Signal::Fresh(self.next_fresh);
        self.next_fresh += 1;
        self.values.insert(s.clone(), false);
        s
    }

    pub fn next_fresh(&self) -> u32 {
        self.next_fresh
    }

    /// Signals currently defined present.
    pub fn present(&self) -> BTreeSet<Signal> {
        self.values.iter().filter(|(_, v)| **v).map(|(s, _)| s.clone()).collect()
    }

    pub fn domain(&self) -> impl Iterator<Item = (&Signal, bool)> {
        self.values.iter().map(|(s, v)| (s, *v))
    }
}

impl NameSupply for Environment {
    fn fresh_signal(&mut self) -> Signal {
        self.allocate()
    }
}
