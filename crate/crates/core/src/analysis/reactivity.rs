use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::semantics::EvalContext;
use crate::syntax::{Definitions, FreshNames, Ident, SourceProgram, Thread};

use super::graph::{acyclic_verdict, Verdict};

pub const DEFAULT_UNFOLD_DEPTH: usize = 1;

/// Whether evaluation may continue past a term within the same instant
/// (`Open`) or certainly stops at a `pause` (`Stopped`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Flag {
    #[default]
    Open,
    Stopped,
}

/// Identifiers a term may call in the current instant, with multiplicity,
/// and whether it certainly stops.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CallResult {
    ids: BTreeMap<Ident, usize>,
    pub flag: Flag,
}

impl CallResult {
    pub fn new<I: IntoIterator<Item = Ident>>(ids: I, flag: Flag) -> Self {
        let mut out = CallResult { ids: BTreeMap::new(), flag };
        for id in ids {
            *out.ids.entry(id).or_default() += 1;
        }
        out
    }

    pub fn empty() -> Self {
        CallResult::default()
    }

    pub fn stopped() -> Self {
        CallResult { ids: BTreeMap::new(), flag: Flag::Stopped }
    }

    pub fn single(id: &Ident) -> Self {
        CallResult::new([id.clone()], Flag::Open)
    }

    /// Sequential composition: a stopped left side hides the right side.
    pub fn then(&self, next: &CallResult) -> CallResult {
        match self.flag {
            Flag::Stopped => self.clone(),
            Flag::Open => {
                let mut ids = self.ids.clone();
                for (id, n) in &next.ids {
                    *ids.entry(id.clone()).or_default() += n;
                }
                CallResult { ids, flag: next.flag }
            }
        }
    }

    /// Same identifiers, flag reset to `Open`.
    pub fn opened(&self) -> CallResult {
        CallResult { ids: self.ids.clone(), flag: Flag::Open }
    }

    pub fn support(&self) -> BTreeSet<Ident> {
        self.ids.keys().cloned().collect()
    }

    pub fn multiplicity(&self, id: &Ident) -> usize {
        self.ids.get(id).copied().unwrap_or(0)
    }
}

impl fmt::Display for CallResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = Vec::new();
        for (id, n) in &self.ids {
            for _ in 0..*n {
                names.push(id.as_str());
            }
        }
        let flag = match self.flag {
            Flag::Open => "0",
            Flag::Stopped => "stop",
        };
        write!(f, "({{{}}},{flag})", names.join(","))
    }
}

/// Identifiers `t` may call before it stops in the current instant.
pub fn call_of(t: &Thread) -> CallResult {
    match t {
        Thread::Nil | Thread::Emit(_) | Thread::Await(_) => CallResult::empty(),
        Thread::Pause => CallResult::stopped(),
        Thread::New(_, body) | Thread::Watch(_, body) => call_of(body),
        Thread::Call(id, _) => CallResult::single(id),
        Thread::Spawn(body) => call_of(body).opened(),
        Thread::Seq(a, b) => {
            let first = call_of(a);
            if first.flag == Flag::Stopped {
                first
            } else {
                first.then(&call_of(b))
            }
        }
    }
}

/// Call value of an evaluation context, so that
/// `call_of(C[T]) = call_of(T).then(call_of_context(C))`.
pub fn call_of_context(c: &EvalContext) -> CallResult {
    let mut acc = c.rest.as_ref().map(call_of).unwrap_or_default();
    for frame in c.frames.iter().rev() {
        if let Some(then) = &frame.then {
            acc = acc.then(&call_of(then));
        }
    }
    acc
}

/// Replaces every call by the called body, `depth` times.
pub fn unfold(t: &Thread, defs: &Definitions, depth: usize, supply: &mut FreshNames) -> Thread {
    if depth == 0 {
        return t.clone();
    }
    let rec = |t: &Thread, supply: &mut FreshNames| unfold(t, defs, depth, supply);
    match t {
        Thread::Nil | Thread::Pause | Thread::Emit(_) | Thread::Await(_) => t.clone(),
        Thread::Seq(a, b) => Thread::seq(rec(a, supply), rec(b, supply)),
        Thread::New(s, body) => Thread::new_signal(s, rec(body, supply)),
        Thread::Watch(s, body) => Thread::watch(s, rec(body, supply)),
        Thread::Spawn(body) => Thread::spawn(rec(body, supply)),
        Thread::Call(id, args) => match defs.get(id) {
            Some(def) => {
                let body = def.instantiate(args, supply);
                unfold(&body, defs, depth - 1, supply)
            }
            None => t.clone(),
        },
    }
}

/// `A > B` for every equation `A = T` and every `B` that `T` may call in the
/// same instant.
pub fn reactivity_constraints<'a>(bodies: impl IntoIterator<Item = (&'a Ident, &'a Thread)>) -> BTreeSet<(Ident, Ident)> {
    let mut out = BTreeSet::new();
    for (a, body) in bodies {
        for b in call_of(body).support() {
            out.insert((a.clone(), b));
        }
    }
    out
}

/// Reactivity check with the default unfolding depth.
pub fn check_reactivity(p: &SourceProgram) -> Verdict {
    check_reactivity_with(p, DEFAULT_UNFOLD_DEPTH)
}

/// Accepts when the constraints over (unfolded) equation bodies admit a
/// well-founded order.
pub fn check_reactivity_with(p: &SourceProgram, unfold_depth: usize) -> Verdict {
    let mut supply = FreshNames::starting_at(p.next_fresh_index());
    let bodies: Vec<(Ident, Thread)> = p
        .defs
        .values()
        .map(|d| (d.id.clone(), unfold(&d.body, &p.defs, unfold_depth, &mut supply)))
        .collect();
    let cnst = reactivity_constraints(bodies.iter().map(|(a, t)| (a, t)));
    let edges: Vec<(Ident, Ident, bool)> = cnst.into_iter().map(|(a, b)| (a, b, true)).collect();
    acyclic_verdict(&p.defs.keys().cloned().collect(), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(n: &str) -> Ident {
        Ident::new(n)
    }

    #[test]
    fn composition_table() {
        let a = CallResult::single(&id("A"));
        let b = CallResult::new([id("B")], Flag::Stopped);
        assert_eq!(a.then(&b), CallResult::new([id("A"), id("B")], Flag::Stopped));
        assert_eq!(b.then(&a), b);
    }

    #[test]
    fn multiplicities_are_kept() {
        let a = CallResult::single(&id("A"));
        assert_eq!(a.then(&a).multiplicity(&id("A")), 2);
        assert_eq!(a.then(&a).support(), BTreeSet::from([id("A")]));
    }
}
