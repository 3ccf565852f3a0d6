//! The tail-recursive core language: threads are prefixes of emissions,
//! signal generation, spawns and presence tests ending in `0` or a call.
//! A presence test on an absent signal suspends and resumes in the next
//! instant with its branching thread.

mod format;
mod react;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::syntax::{Ident, Interface, NameSupply, ProgramError, Rename, Renamer, Signal};

pub use format::{parse_tail_program, print_branch, print_tail, print_tail_program};
pub use react::{check_tail_reactivity, signal_is_inert, tail_call_of, tail_end_of_instant, tail_is_suspended, step_tail};

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub enum TailExpr {
    #[default]
    Nil,
    /// `emit s.t`
    Emit(Signal, Box<TailExpr>),
    /// `νs t`
    New(Signal, Box<TailExpr>),
    /// `thread t1.t2`: spawn `t1`, continue with `t2`.
    Spawn(Box<TailExpr>, Box<TailExpr>),
    /// `present s t b`
    Present(Signal, Box<TailExpr>, Box<Branch>),
    Call(Ident, Vec<Signal>),
}

/// Branching thread, chosen at the end of the instant.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Branch {
    Leaf(TailExpr),
    Ite(Signal, Box<Branch>, Box<Branch>),
}

impl TailExpr {
    pub fn emit(s: &Signal, next: TailExpr) -> TailExpr {
        TailExpr::Emit(s.clone(), Box::new(next))
    }

    pub fn new_signal(s: &Signal, body: TailExpr) -> TailExpr {
        TailExpr::New(s.clone(), Box::new(body))
    }

    pub fn spawn(spawned: TailExpr, next: TailExpr) -> TailExpr {
        TailExpr::Spawn(Box::new(spawned), Box::new(next))
    }

    pub fn present(s: &Signal, then: TailExpr, otherwise: Branch) -> TailExpr {
        TailExpr::Present(s.clone(), Box::new(then), Box::new(otherwise))
    }

    pub fn call(id: &Ident, args: &[Signal]) -> TailExpr {
        TailExpr::Call(id.clone(), args.to_vec())
    }

    pub fn free_signals(&self) -> BTreeSet<Signal> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn collect_free(&self, bound: &mut Vec<Signal>, out: &mut BTreeSet<Signal>) {
        let note = |s: &Signal, bound: &Vec<Signal>, out: &mut BTreeSet<Signal>| {
            if !bound.contains(s) {
                out.insert(s.clone());
            }
        };
        match self {
            TailExpr::Nil => {}
            TailExpr::Emit(s, t) => {
                note(s, bound, out);
                t.collect_free(bound, out);
            }
            TailExpr::New(s, t) => {
                bound.push(s.clone());
                t.collect_free(bound, out);
                bound.pop();
            }
            TailExpr::Spawn(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            TailExpr::Present(s, t, b) => {
                note(s, bound, out);
                t.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            TailExpr::Call(_, args) => args.iter().for_each(|a| note(a, bound, out)),
        }
    }

    pub(crate) fn visit_signals(&self, f: &mut impl FnMut(&Signal)) {
        match self {
            TailExpr::Nil => {}
            TailExpr::Emit(s, t) | TailExpr::New(s, t) => {
                f(s);
                t.visit_signals(f);
            }
            TailExpr::Spawn(a, b) => {
                a.visit_signals(f);
                b.visit_signals(f);
            }
            TailExpr::Present(s, t, b) => {
                f(s);
                t.visit_signals(f);
                b.visit_signals(f);
            }
            TailExpr::Call(_, args) => args.iter().for_each(f),
        }
    }

    pub fn max_fresh_index(&self) -> Option<u32> {
        let mut best: Option<u32> = None;
        self.visit_signals(&mut |s| {
            if let Some(n) = s.fresh_index() {
                best = Some(best.map_or(n, |b| b.max(n)));
            }
        });
        best
    }

    pub(crate) fn visit_calls(&self, f: &mut impl FnMut(&Ident, &[Signal])) {
        match self {
            TailExpr::Nil => {}
            TailExpr::Emit(_, t) | TailExpr::New(_, t) => t.visit_calls(f),
            TailExpr::Spawn(a, b) => {
                a.visit_calls(f);
                b.visit_calls(f);
            }
            TailExpr::Present(_, t, b) => {
                t.visit_calls(f);
                b.visit_calls(f);
            }
            TailExpr::Call(id, args) => f(id, args),
        }
    }

    /// Capture-avoiding simultaneous substitution of free names.
    pub fn substitute(&self, map: &HashMap<Signal, Signal>, supply: &mut dyn NameSupply) -> TailExpr {
        if map.is_empty() {
            return self.clone();
        }
        let sub = |s: &Signal| map.get(s).cloned().unwrap_or_else(|| s.clone());
        match self {
            TailExpr::Nil => TailExpr::Nil,
            TailExpr::Emit(s, t) => TailExpr::Emit(sub(s), Box::new(t.substitute(map, supply))),
            TailExpr::Spawn(a, b) => {
                TailExpr::Spawn(Box::new(a.substitute(map, supply)), Box::new(b.substitute(map, supply)))
            }
            TailExpr::Present(s, t, b) => TailExpr::Present(
                sub(s),
                Box::new(t.substitute(map, supply)),
                Box::new(b.substitute(map, supply)),
            ),
            TailExpr::Call(id, args) => TailExpr::Call(id.clone(), args.iter().map(sub).collect()),
            TailExpr::New(s, body) => {
                let mut inner = map.clone();
                inner.remove(s);
                if inner.values().any(|v| v == s) {
                    let renamed = supply.fresh_signal();
                    inner.insert(s.clone(), renamed.clone());
                    TailExpr::New(renamed, Box::new(body.substitute(&inner, supply)))
                } else {
                    TailExpr::New(s.clone(), Box::new(body.substitute(&inner, supply)))
                }
            }
        }
    }
}

impl Branch {
    pub fn ite(s: &Signal, then: Branch, otherwise: Branch) -> Branch {
        Branch::Ite(s.clone(), Box::new(then), Box::new(otherwise))
    }

    /// Selects the leaf given the set of present signals.
    pub fn select(&self, present: &impl Fn(&Signal) -> bool) -> &TailExpr {
        match self {
            Branch::Leaf(t) => t,
            Branch::Ite(s, a, b) => {
                if present(s) {
                    a.select(present)
                } else {
                    b.select(present)
                }
            }
        }
    }

    pub(crate) fn collect_free(&self, bound: &mut Vec<Signal>, out: &mut BTreeSet<Signal>) {
        match self {
            Branch::Leaf(t) => t.collect_free(bound, out),
            Branch::Ite(s, a, b) => {
                if !bound.contains(s) {
                    out.insert(s.clone());
                }
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
        }
    }

    pub fn free_signals(&self) -> BTreeSet<Signal> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn visit_signals(&self, f: &mut impl FnMut(&Signal)) {
        match self {
            Branch::Leaf(t) => t.visit_signals(f),
            Branch::Ite(s, a, b) => {
                f(s);
                a.visit_signals(f);
                b.visit_signals(f);
            }
        }
    }

    pub(crate) fn visit_calls(&self, f: &mut impl FnMut(&Ident, &[Signal])) {
        match self {
            Branch::Leaf(t) => t.visit_calls(f),
            Branch::Ite(_, a, b) => {
                a.visit_calls(f);
                b.visit_calls(f);
            }
        }
    }

    pub fn substitute(&self, map: &HashMap<Signal, Signal>, supply: &mut dyn NameSupply) -> Branch {
        match self {
            Branch::Leaf(t) => Branch::Leaf(t.substitute(map, supply)),
            Branch::Ite(s, a, b) => Branch::Ite(
                map.get(s).cloned().unwrap_or_else(|| s.clone()),
                Box::new(a.substitute(map, supply)),
                Box::new(b.substitute(map, supply)),
            ),
        }
    }
}

impl From<TailExpr> for Branch {
    fn from(t: TailExpr) -> Self {
        Branch::Leaf(t)
    }
}

impl Rename for TailExpr {
    fn rename(&self, r: &mut Renamer) -> Self {
        match self {
            TailExpr::Nil => TailExpr::Nil,
            TailExpr::Emit(s, t) => {
                let s = r.signal(s);
                TailExpr::Emit(s, Box::new(t.rename(r)))
            }
            TailExpr::New(s, t) => r.scoped(s, |r, to| TailExpr::New(to, Box::new(t.rename(r)))),
            TailExpr::Spawn(a, b) => {
                let a = a.rename(r);
                TailExpr::Spawn(Box::new(a), Box::new(b.rename(r)))
            }
            TailExpr::Present(s, t, b) => {
                let s = r.signal(s);
                let t = t.rename(r);
                TailExpr::Present(s, Box::new(t), Box::new(b.rename(r)))
            }
            TailExpr::Call(id, args) => TailExpr::Call(id.clone(), args.iter().map(|a| r.signal(a)).collect()),
        }
    }

    fn render(&self) -> String {
        print_tail(self)
    }
}

impl Rename for Branch {
    fn rename(&self, r: &mut Renamer) -> Self {
        match self {
            Branch::Leaf(t) => Branch::Leaf(t.rename(r)),
            Branch::Ite(s, a, b) => {
                let s = r.signal(s);
                let a = a.rename(r);
                Branch::Ite(s, Box::new(a), Box::new(b.rename(r)))
            }
        }
    }

    fn render(&self) -> String {
        print_branch(self)
    }
}

/// Equation `A(x1..xn) = t` of the tail core.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TailDef {
    pub id: Ident,
    pub params: Vec<Signal>,
    pub body: TailExpr,
}

impl TailDef {
    pub fn instantiate(&self, args: &[Signal], supply: &mut dyn NameSupply) -> TailExpr {
        let map: HashMap<Signal, Signal> =
            self.params.iter().cloned().zip(args.iter().cloned()).filter(|(p, a)| p != a).collect();
        self.body.substitute(&map, supply)
    }
}

pub type TailDefs = BTreeMap<Ident, TailDef>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TailProgram {
    pub interface: Interface,
    pub defs: TailDefs,
    pub initial: Vec<TailExpr>,
}

impl TailProgram {
    pub fn next_fresh_index(&self) -> u32 {
        self.defs
            .values()
            .flat_map(|d| d.params.iter().filter_map(Signal::fresh_index).chain(d.body.max_fresh_index()))
            .chain(self.initial.iter().filter_map(TailExpr::max_fresh_index))
            .max()
            .map_or(0, |n| n + 1)
    }

    pub fn validate(&self) -> Result<(), ProgramError> {
        if self.initial.is_empty() {
            return Err(ProgramError::EmptyProgram);
        }
        if let Some(s) = self.interface.inputs.intersection(&self.interface.outputs).next() {
            return Err(ProgramError::InputOutputOverlap(s.to_string()));
        }
        let check_calls = |t: &TailExpr| -> Result<(), ProgramError> {
            let mut err = Ok(());
            t.visit_calls(&mut |id, args| {
                if err.is_ok() {
                    err = match self.defs.get(id) {
                        None => Err(ProgramError::UnboundIdentifier(id.to_string())),
                        Some(d) if d.params.len() != args.len() => Err(ProgramError::ArityMismatch {
                            name: id.to_string(),
                            expected: d.params.len(),
                            found: args.len(),
                        }),
                        _ => Ok(()),
                    };
                }
            });
            err
        };
        for def in self.defs.values() {
            check_calls(&def.body)?;
            for s in def.body.free_signals() {
                if !def.params.contains(&s) && !self.interface.contains(&s) {
                    return Err(ProgramError::UndeclaredSignal(s.to_string()));
                }
            }
        }
        for t in &self.initial {
            check_calls(t)?;
            for s in t.free_signals() {
                if !self.interface.contains(&s) {
                    return Err(ProgramError::UndeclaredSignal(s.to_string()));
                }
            }
        }
        Ok(())
    }
}

/// `pause.b = νs present s 0 b` with `s` fresh for `b`.
pub fn pause_prefix(b: Branch, supply: &mut dyn NameSupply) -> TailExpr {
    let s = supply.fresh_signal();
    TailExpr::new_signal(&s, TailExpr::present(&s, TailExpr::Nil, b))
}

/// `await s.t`: returns the call `A(x⃗)` and the equation
/// `A(x⃗) = present s t A(x⃗)` where `x⃗` lists `sig(t) ∪ {s}`.
pub fn await_prefix(s: &Signal, t: TailExpr, id: Ident) -> (TailExpr, TailDef) {
    let mut params = t.free_signals();
    params.insert(s.clone());
    let params: Vec<Signal> = params.into_iter().collect();
    let call = TailExpr::call(&id, &params);
    let body = TailExpr::present(s, t, Branch::Leaf(call.clone()));
    (call, TailDef { id, params, body })
}
