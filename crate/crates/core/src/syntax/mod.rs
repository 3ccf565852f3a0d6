//! Source language: signal names, thread expressions, programs, the
//! s-expression front end, the derived instructions and alpha-canonical
//! renaming.

mod canon;
mod parse;
mod print;
pub(crate) mod sexpr;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

pub use canon::{canonical_key, canonicalize, canonicalize_with_renaming, Rename, Renamer};
pub use parse::{parse_program, parse_program_with, parse_thread, Desugarer, ParseOptions, PauseMode, Surface};
pub use print::{print_program, print_thread};
pub use sexpr::Pos;
pub(crate) use parse::{parse_ident, parse_signal};

/// A signal name.
///
/// `Named` covers everything written in program text. `Fresh(n)` names are
/// produced by desugaring and by signal generation at run time and print as
/// `%gN`. `Param(n)` names only appear as formal parameters of equations
/// generated by the CPS compiler and print as `%pN`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Signal {
    Named(Arc<str>),
    Fresh(u32),
    Param(u32),
}

impl Signal {
    pub fn named(name: &str) -> Self {
        Signal::Named(Arc::from(name))
    }

    pub fn is_generated(&self) -> bool {
        !matches!(self, Signal::Named(_))
    }

    pub fn fresh_index(&self) -> Option<u32> {
        match self {
            Signal::Fresh(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Named(s) => f.write_str(s),
            Signal::Fresh(n) => write!(f, "%g{n}"),
            Signal::Param(n) => write!(f, "%p{n}"),
        }
    }
}

impl Serialize for Signal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Role of a signal relative to a program interface.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SignalKind {
    Input,
    Output,
    Local,
    Generated,
}

/// A thread identifier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Ident(Arc<str>);

impl Ident {
    pub fn new(name: &str) -> Self {
        Ident(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Ident {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

/// Supply of names that are guaranteed unused by the term being processed.
pub trait NameSupply {
    fn fresh_signal(&mut self) -> Signal;
}

/// A plain counter-backed name supply.
#[derive(Clone, Debug, Default)]
pub struct FreshNames {
    next: u32,
}

impl FreshNames {
    pub fn starting_at(next: u32) -> Self {
        FreshNames { next }
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

impl NameSupply for FreshNames {
    fn fresh_signal(&mut self) -> Signal {
        let s = Signal::Fresh(self.next);
        self.next += 1;
        s
    }
}

/// Threads of the source language. `Seq` is kept right-associated: its first
/// component is never itself a `Seq` (use [`Thread::seq`]).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub enum Thread {
    #[default]
    Nil,
    Seq(Box<Thread>, Box<Thread>),
    Emit(Signal),
    New(Signal, Box<Thread>),
    Spawn(Box<Thread>),
    Await(Signal),
    Watch(Signal, Box<Thread>),
    Call(Ident, Vec<Signal>),
    Pause,
}


impl Thread {
    /// Sequential composition, re-associated to the right.
    pub fn seq(first: Thread, rest: Thread) -> Thread {
        match first {
            Thread::Seq(a, b) => Thread::Seq(a, Box::new(Thread::seq(*b, rest))),
            first => Thread::Seq(Box::new(first), Box::new(rest)),
        }
    }

    /// Right-nested sequence of all items; the empty sequence is `0`.
    pub fn seq_all<I>(items: I) -> Thread
    where
        I: IntoIterator<Item = Thread>,
        I::IntoIter: DoubleEndedIterator,
    {
        let mut iter = items.into_iter().rev();
        let Some(mut acc) = iter.next() else {
            return Thread::Nil;
        };
        for item in iter {
            acc = Thread::seq(item, acc);
        }
        acc
    }

    pub fn emit(s: &Signal) -> Thread {
        Thread::Emit(s.clone())
    }

    pub fn await_(s: &Signal) -> Thread {
        Thread::Await(s.clone())
    }

    pub fn new_signal(s: &Signal, body: Thread) -> Thread {
        Thread::New(s.clone(), Box::new(body))
    }

    pub fn spawn(body: Thread) -> Thread {
        Thread::Spawn(Box::new(body))
    }

    pub fn watch(s: &Signal, body: Thread) -> Thread {
        Thread::Watch(s.clone(), Box::new(body))
    }

    pub fn call(id: &Ident, args: &[Signal]) -> Thread {
        Thread::Call(id.clone(), args.to_vec())
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Thread::Nil)
    }

    /// Signals free in the thread.
    pub fn free_signals(&self) -> BTreeSet<Signal> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn collect_free(&self, bound: &mut Vec<Signal>, out: &mut BTreeSet<Signal>) {
        let mut note = |s: &Signal, bound: &Vec<Signal>| {
            if !bound.contains(s) {
                out.insert(s.clone());
            }
        };
        match self {
            Thread::Nil | Thread::Pause => {}
            Thread::Seq(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Thread::Emit(s) | Thread::Await(s) => note(s, bound),
            Thread::New(s, body) => {
                bound.push(s.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Thread::Spawn(body) => body.collect_free(bound, out),
            Thread::Watch(s, body) => {
                note(s, bound);
                body.collect_free(bound, out);
            }
            Thread::Call(_, args) => {
                for a in args {
                    note(a, bound);
                }
            }
        }
    }

    /// Largest `%gN` index occurring anywhere in the thread, bound or free.
    pub fn max_fresh_index(&self) -> Option<u32> {
        let mut best: Option<u32> = None;
        self.visit_signals(&mut |s| {
            if let Some(n) = s.fresh_index() {
                best = Some(best.map_or(n, |b| b.max(n)));
            }
        });
        best
    }

    pub(crate) fn visit_signals(&self, f: &mut impl FnMut(&Signal)) {
        match self {
            Thread::Nil | Thread::Pause => {}
            Thread::Seq(a, b) => {
                a.visit_signals(f);
                b.visit_signals(f);
            }
            Thread::Emit(s) | Thread::Await(s) => f(s),
            Thread::New(s, body) | Thread::Watch(s, body) => {
                f(s);
                body.visit_signals(f);
            }
            Thread::Spawn(body) => body.visit_signals(f),
            Thread::Call(_, args) => args.iter().for_each(f),
        }
    }

    /// Identifiers called anywhere in the thread.
    pub fn called_idents(&self, out: &mut BTreeSet<Ident>) {
        match self {
            Thread::Nil | Thread::Pause | Thread::Emit(_) | Thread::Await(_) => {}
            Thread::Seq(a, b) => {
                a.called_idents(out);
                b.called_idents(out);
            }
            Thread::New(_, body) | Thread::Watch(_, body) | Thread::Spawn(body) => body.called_idents(out),
            Thread::Call(id, _) => {
                out.insert(id.clone());
            }
        }
    }

    /// Capture-avoiding simultaneous substitution of free signal names.
    /// Binders that would capture a substituted name are renamed with names
    /// drawn from `supply`.
    pub fn substitute(&self, map: &HashMap<Signal, Signal>, supply: &mut dyn NameSupply) -> Thread {
        if map.is_empty() {
            return self.clone();
        }
        let sub = |s: &Signal| map.get(s).cloned().unwrap_or_else(|| s.clone());
        match self {
            Thread::Nil => Thread::Nil,
            Thread::Pause => Thread::Pause,
            Thread::Seq(a, b) => Thread::Seq(
                Box::new(a.substitute(map, supply)),
                Box::new(b.substitute(map, supply)),
            ),
            Thread::Emit(s) => Thread::Emit(sub(s)),
            Thread::Await(s) => Thread::Await(sub(s)),
            Thread::Watch(s, body) => Thread::Watch(sub(s), Box::new(body.substitute(map, supply))),
            Thread::Spawn(body) => Thread::Spawn(Box::new(body.substitute(map, supply))),
            Thread::Call(id, args) => Thread::Call(id.clone(), args.iter().map(sub).collect()),
            Thread::New(s, body) => {
                let mut inner = map.clone();
                inner.remove(s);
                if inner.values().any(|v| v == s) {
                    let renamed = supply.fresh_signal();
                    inner.insert(s.clone(), renamed.clone());
                    Thread::New(renamed, Box::new(body.substitute(&inner, supply)))
                } else {
                    Thread::New(s.clone(), Box::new(body.substitute(&inner, supply)))
                }
            }
        }
    }
}

/// A recursive equation `A(x1..xn) = T`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Definition {
    pub id: Ident,
    pub params: Vec<Signal>,
    pub body: Thread,
}

impl Definition {
    /// Body with formal parameters replaced by `args`.
    pub fn instantiate(&self, args: &[Signal], supply: &mut dyn NameSupply) -> Thread {
        let map: HashMap<Signal, Signal> = self
            .params
            .iter()
            .cloned()
            .zip(args.iter().cloned())
            .filter(|(p, a)| p != a)
            .collect();
        self.body.substitute(&map, supply)
    }
}

/// Declared input and output signals of a program.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct Interface {
    pub inputs: BTreeSet<Signal>,
    pub outputs: BTreeSet<Signal>,
}

impl Interface {
    pub fn new<I, O>(inputs: I, outputs: O) -> Self
    where
        I: IntoIterator<Item = Signal>,
        O: IntoIterator<Item = Signal>,
    {
        Interface { inputs: inputs.into_iter().collect(), outputs: outputs.into_iter().collect() }
    }

    pub fn contains(&self, s: &Signal) -> bool {
        self.inputs.contains(s) || self.outputs.contains(s)
    }

    pub fn all(&self) -> BTreeSet<Signal> {
        self.inputs.union(&self.outputs).cloned().collect()
    }
}

pub type Definitions = BTreeMap<Ident, Definition>;

/// A complete source program: interface, equations and initial threads.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SourceProgram {
    pub interface: Interface,
    pub defs: Definitions,
    pub initial: Vec<Thread>,
}

impl SourceProgram {
    pub fn kind_of(&self, s: &Signal) -> SignalKind {
        if self.interface.inputs.contains(s) {
            SignalKind::Input
        } else if self.interface.outputs.contains(s) {
            SignalKind::Output
        } else if s.is_generated() {
            SignalKind::Generated
        } else {
            SignalKind::Local
        }
    }

    /// First `%gN` index not used anywhere in the program text.
    pub fn next_fresh_index(&self) -> u32 {
        self.defs
            .values()
            .flat_map(|d| d.params.iter().filter_map(Signal::fresh_index).chain(d.body.max_fresh_index()))
            .chain(self.initial.iter().filter_map(Thread::max_fresh_index))
            .max()
            .map_or(0, |n| n + 1)
    }

    /// Checks the well-formedness conditions of a program.
    pub fn validate(&self) -> Result<(), ProgramError> {
        if self.initial.is_empty() {
            return Err(ProgramError::EmptyProgram);
        }
        if let Some(s) = self.interface.inputs.intersection(&self.interface.outputs).next() {
            return Err(ProgramError::InputOutputOverlap(s.to_string()));
        }
        let check_calls = |t: &Thread| -> Result<(), ProgramError> {
            let mut err = Ok(());
            visit_calls(t, &mut |id, args| {
                if err.is_err() {
                    return;
                }
                match self.defs.get(id) {
                    None => err = Err(ProgramError::UnboundIdentifier(id.to_string())),
                    Some(d) if d.params.len() != args.len() => {
                        err = Err(ProgramError::ArityMismatch {
                            name: id.to_string(),
                            expected: d.params.len(),
                            found: args.len(),
                        })
                    }
                    _ => {}
                }
            });
            err
        };
        for (id, def) in &self.defs {
            if &def.id != id {
                return Err(ProgramError::UnboundIdentifier(id.to_string()));
            }
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

pub(crate) fn visit_calls(t: &Thread, f: &mut impl FnMut(&Ident, &[Signal])) {
    match t {
        Thread::Nil | Thread::Pause | Thread::Emit(_) | Thread::Await(_) => {}
        Thread::Seq(a, b) => {
            visit_calls(a, f);
            visit_calls(b, f);
        }
        Thread::New(_, body) | Thread::Watch(_, body) | Thread::Spawn(body) => visit_calls(body, f),
        Thread::Call(id, args) => f(id, args),
    }
}

/// Errors reported while reading or validating a program.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unbound identifier `{0}`")]
    UnboundIdentifier(String),
    #[error("identifier `{name}` expects {expected} arguments, found {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("signal `{0}` is not declared")]
    UndeclaredSignal(String),
    #[error("identifier `{0}` is defined more than once")]
    DuplicateDefinition(String),
    #[error("signal `{0}` is declared both as input and output")]
    InputOutputOverlap(String),
    #[error("program has no initial thread")]
    EmptyProgram,
}

impl ProgramError {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        ProgramError::Syntax { line: pos.line, col: pos.col, message: message.into() }
    }
}
