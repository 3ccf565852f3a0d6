//! Process-calculus view of the tail core: a labelled transition system
//! with persistent emissions, end of instant, suspension predicates,
//! labelled bisimulation and trace equivalence checking, and a one-step
//! confluence check.

mod bisim;
mod confluence;
mod format;
mod space;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::syntax::{Ident, NameSupply, ProgramError, Rename, Renamer, Signal};
use crate::tailcore::{Branch, TailDefs, TailExpr, TailProgram};

pub use bisim::{bisim_check, trace_check, BisimResult, EquivOptions, Mode, Witness, WitnessStep, DEFAULT_STATE_LIMIT};
pub use confluence::{confluence_check, ConfluenceReport, Violation};
pub use format::{parse_proc, parse_proc_program, print_branch_p, print_proc, print_proc_program};
pub use space::{suspension, Dedupe, ProcSpace, State, Suspension};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EquivError {
    #[error("state limit of {0} exceeded")]
    StateLimit(usize),
    #[error("exact checking needs a finite state space: {0}")]
    NotFiniteState(String),
    #[error("process is not suspended")]
    NotSuspended,
    #[error("too many observable signals ({0}) for emission contexts")]
    TooManySignals(usize),
    #[error("unbound identifier {0}")]
    UnboundIdentifier(String),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub enum Proc {
    #[default]
    Nil,
    Emit(Signal),
    Present(Signal, Box<Proc>, Box<BranchP>),
    Par(Box<Proc>, Box<Proc>),
    Nu(Signal, Box<Proc>),
    Call(Ident, Vec<Signal>),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum BranchP {
    Leaf(Proc),
    Ite(Signal, Box<BranchP>, Box<BranchP>),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Action {
    Tau,
    In(Signal),
    Out(Signal),
}

impl Action {
    pub fn mentions(&self, s: &Signal) -> bool {
        matches!(self, Action::In(x) | Action::Out(x) if x == s)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => f.write_str("tau"),
            Action::In(s) => write!(f, "{s}"),
            Action::Out(s) => write!(f, "!{s}"),
        }
    }
}

impl Proc {
    pub fn emit(s: &Signal) -> Proc {
        Proc::Emit(s.clone())
    }

    pub fn par(a: Proc, b: Proc) -> Proc {
        Proc::Par(Box::new(a), Box::new(b))
    }

    pub fn nu(s: &Signal, body: Proc) -> Proc {
        Proc::Nu(s.clone(), Box::new(body))
    }

    pub fn present(s: &Signal, then: Proc, otherwise: BranchP) -> Proc {
        Proc::Present(s.clone(), Box::new(then), Box::new(otherwise))
    }

    pub fn call(id: &Ident, args: &[Signal]) -> Proc {
        Proc::Call(id.clone(), args.to_vec())
    }

    /// Right-nested parallel composition; `0` when empty.
    pub fn par_all(items: impl IntoIterator<Item = Proc>) -> Proc {
        let mut items: Vec<Proc> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Proc::Nil;
        };
        while let Some(p) = items.pop() {
            acc = Proc::par(p, acc);
        }
        acc
    }

    pub fn free_signals(&self) -> BTreeSet<Signal> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Signal>, out: &mut BTreeSet<Signal>) {
        let mut note = |s: &Signal, bound: &Vec<Signal>| {
            if !bound.contains(s) {
                out.insert(s.clone());
            }
        };
        match self {
            Proc::Nil => {}
            Proc::Emit(s) => note(s, bound),
            Proc::Call(_, args) => args.iter().for_each(|a| note(a, bound)),
            Proc::Present(s, p, b) => {
                note(s, bound);
                p.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Proc::Par(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Proc::Nu(s, p) => {
                bound.push(s.clone());
                p.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub(crate) fn visit_signals(&self, f: &mut impl FnMut(&Signal)) {
        match self {
            Proc::Nil => {}
            Proc::Emit(s) => f(s),
            Proc::Call(_, args) => args.iter().for_each(f),
            Proc::Present(s, p, b) => {
                f(s);
                p.visit_signals(f);
                b.visit_signals(f);
            }
            Proc::Par(a, b) => {
                a.visit_signals(f);
                b.visit_signals(f);
            }
            Proc::Nu(s, p) => {
                f(s);
                p.visit_signals(f);
            }
        }
    }

    pub(crate) fn visit_calls(&self, f: &mut impl FnMut(&Ident)) {
        match self {
            Proc::Nil | Proc::Emit(_) => {}
            Proc::Call(id, _) => f(id),
            Proc::Present(_, p, b) => {
                p.visit_calls(f);
                b.visit_calls(f);
            }
            Proc::Par(a, b) => {
                a.visit_calls(f);
                b.visit_calls(f);
            }
            Proc::Nu(_, p) => p.visit_calls(f),
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

    /// Capture-avoiding simultaneous substitution of free names.
    pub fn substitute(&self, map: &HashMap<Signal, Signal>, supply: &mut dyn NameSupply) -> Proc {
        if map.is_empty() {
            return self.clone();
        }
        let sub = |s: &Signal| map.get(s).cloned().unwrap_or_else(|| s.clone());
        match self {
            Proc::Nil => Proc::Nil,
            Proc::Emit(s) => Proc::Emit(sub(s)),
            Proc::Call(id, args) => Proc::Call(id.clone(), args.iter().map(sub).collect()),
            Proc::Present(s, p, b) => {
                Proc::Present(sub(s), Box::new(p.substitute(map, supply)), Box::new(b.substitute(map, supply)))
            }
            Proc::Par(a, b) => Proc::par(a.substitute(map, supply), b.substitute(map, supply)),
            Proc::Nu(s, body) => {
                let mut inner = map.clone();
                inner.remove(s);
                if inner.values().any(|v| v == s) {
                    let renamed = supply.fresh_signal();
                    inner.insert(s.clone(), renamed.clone());
                    Proc::Nu(renamed, Box::new(body.substitute(&inner, supply)))
                } else {
                    Proc::Nu(s.clone(), Box::new(body.substitute(&inner, supply)))
                }
            }
        }
    }
}

impl BranchP {
    pub fn ite(s: &Signal, then: BranchP, otherwise: BranchP) -> BranchP {
        BranchP::Ite(s.clone(), Box::new(then), Box::new(otherwise))
    }

    /// `⟨|b|⟩_S`
    pub fn select(&self, present: &impl Fn(&Signal) -> bool) -> &Proc {
        match self {
            BranchP::Leaf(p) => p,
            BranchP::Ite(s, a, b) => {
                if present(s) {
                    a.select(present)
                } else {
                    b.select(present)
                }
            }
        }
    }

    fn collect_free(&self, bound: &mut Vec<Signal>, out: &mut BTreeSet<Signal>) {
        match self {
            BranchP::Leaf(p) => p.collect_free(bound, out),
            BranchP::Ite(s, a, b) => {
                if !bound.contains(s) {
                    out.insert(s.clone());
                }
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
        }
    }

    fn visit_signals(&self, f: &mut impl FnMut(&Signal)) {
        match self {
            BranchP::Leaf(p) => p.visit_signals(f),
            BranchP::Ite(s, a, b) => {
                f(s);
                a.visit_signals(f);
                b.visit_signals(f);
            }
        }
    }

    fn visit_calls(&self, f: &mut impl FnMut(&Ident)) {
        match self {
            BranchP::Leaf(p) => p.visit_calls(f),
            BranchP::Ite(_, a, b) => {
                a.visit_calls(f);
                b.visit_calls(f);
            }
        }
    }


    pub fn substitute(&self, map: &HashMap<Signal, Signal>, supply: &mut dyn NameSupply) -> BranchP {
        match self {
            BranchP::Leaf(p) => BranchP::Leaf(p.substitute(map, supply)),
            BranchP::Ite(s, a, b) => BranchP::Ite(
                map.get(s).cloned().unwrap_or_else(|| s.clone()),
                Box::new(a.substitute(map, supply)),
                Box::new(b.substitute(map, supply)),
            ),
        }
    }
}

impl Rename for Proc {
    fn rename(&self, r: &mut Renamer) -> Self {
        match self {
            Proc::Nil => Proc::Nil,
            Proc::Emit(s) => Proc::Emit(r.signal(s)),
            Proc::Call(id, args) => Proc::Call(id.clone(), args.iter().map(|a| r.signal(a)).collect()),
            Proc::Present(s, p, b) => {
                let s = r.signal(s);
                let p = p.rename(r);
                Proc::Present(s, Box::new(p), Box::new(b.rename(r)))
            }
            Proc::Par(a, b) => {
                let a = a.rename(r);
                Proc::par(a, b.rename(r))
            }
            Proc::Nu(s, p) => r.scoped(s, |r, to| Proc::Nu(to, Box::new(p.rename(r)))),
        }
    }

    fn render(&self) -> String {
        print_proc(self)
    }
}

impl Rename for BranchP {
    fn rename(&self, r: &mut Renamer) -> Self {
        match self {
            BranchP::Leaf(p) => BranchP::Leaf(p.rename(r)),
            BranchP::Ite(s, a, b) => {
                let s = r.signal(s);
                let a = a.rename(r);
                BranchP::Ite(s, Box::new(a), Box::new(b.rename(r)))
            }
        }
    }

    fn render(&self) -> String {
        print_branch_p(self)
    }
}

/// `A(x⃗) = P`
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProcDef {
    pub id: Ident,
    pub params: Vec<Signal>,
    pub body: Proc,
}

impl ProcDef {
    pub fn instantiate(&self, args: &[Signal], supply: &mut dyn NameSupply) -> Proc {
        let map: HashMap<Signal, Signal> =
            self.params.iter().cloned().zip(args.iter().cloned()).filter(|(p, a)| p != a).collect();
        self.body.substitute(&map, supply)
    }
}

pub type ProcDefs = BTreeMap<Ident, ProcDef>;

/// `emit s.t` becomes `emit s | t`, `thread t'.t` becomes `t' | t`; the
/// rest is unchanged.
pub fn tail_to_proc(t: &TailExpr) -> Proc {
    match t {
        TailExpr::Nil => Proc::Nil,
        TailExpr::Emit(s, next) => Proc::par(Proc::emit(s), tail_to_proc(next)),
        TailExpr::New(s, body) => Proc::nu(s, tail_to_proc(body)),
        TailExpr::Spawn(a, b) => Proc::par(tail_to_proc(a), tail_to_proc(b)),
        TailExpr::Present(s, then, b) => Proc::present(s, tail_to_proc(then), branch_to_proc(b)),
        TailExpr::Call(id, args) => Proc::call(id, args),
    }
}

fn branch_to_proc(b: &Branch) -> BranchP {
    match b {
        Branch::Leaf(t) => BranchP::Leaf(tail_to_proc(t)),
        Branch::Ite(s, a, c) => BranchP::ite(s, branch_to_proc(a), branch_to_proc(c)),
    }
}

pub fn tail_defs_to_proc(defs: &TailDefs) -> ProcDefs {
    defs.values()
        .map(|d| (d.id.clone(), ProcDef { id: d.id.clone(), params: d.params.clone(), body: tail_to_proc(&d.body) }))
        .collect()
}

/// The initial threads in parallel, with the equations.
pub fn program_to_proc(p: &TailProgram) -> (Proc, ProcDefs) {
    (Proc::par_all(p.initial.iter().map(tail_to_proc)), tail_defs_to_proc(&p.defs))
}

impl Proc {
    /// Same process with every identifier prefixed by `prefix`.
    pub fn prefix_calls(&self, prefix: &str) -> Proc {
        match self {
            Proc::Nil | Proc::Emit(_) => self.clone(),
            Proc::Present(s, then, b) => Proc::Present(s.clone(), Box::new(then.prefix_calls(prefix)), Box::new(b.prefix_calls(prefix))),
            Proc::Par(a, b) => Proc::par(a.prefix_calls(prefix), b.prefix_calls(prefix)),
            Proc::Nu(s, body) => Proc::nu(s, body.prefix_calls(prefix)),
            Proc::Call(id, args) => Proc::Call(Ident::new(&format!("{prefix}{id}")), args.clone()),
        }
    }
}

impl BranchP {
    fn prefix_calls(&self, prefix: &str) -> BranchP {
        match self {
            BranchP::Leaf(p) => BranchP::Leaf(p.prefix_calls(prefix)),
            BranchP::Ite(s, a, b) => BranchP::Ite(s.clone(), Box::new(a.prefix_calls(prefix)), Box::new(b.prefix_calls(prefix))),
        }
    }
}

/// Prefixes every identifier of a process and its definitions, so that two
/// programs can share one table.
pub fn rename_calls(p: &Proc, defs: &ProcDefs, prefix: &str) -> (Proc, ProcDefs) {
    let defs = defs
        .values()
        .map(|d| {
            let id = Ident::new(&format!("{prefix}{}", d.id));
            (id.clone(), ProcDef { id, params: d.params.clone(), body: d.body.prefix_calls(prefix) })
        })
        .collect();
    (p.prefix_calls(prefix), defs)
}

/// One-step transitions of `p` by the rules out, in, τ, par, ν and rec.
/// Bound names are assumed distinct from each other and from free names.
pub fn lts_steps(p: &Proc, defs: &ProcDefs, supply: &mut dyn NameSupply) -> Result<Vec<(Action, Proc)>, EquivError> {
    Ok(match p {
        Proc::Nil => vec![],
        Proc::Emit(s) => vec![(Action::Out(s.clone()), p.clone())],
        Proc::Present(s, then, _) => vec![(Action::In(s.clone()), Proc::par((**then).clone(), Proc::emit(s)))],
        Proc::Call(id, args) => {
            let def = defs.get(id).ok_or_else(|| EquivError::UnboundIdentifier(id.to_string()))?;
            vec![(Action::Tau, def.instantiate(args, supply))]
        }
        Proc::Nu(s, body) => lts_steps(body, defs, supply)?
            .into_iter()
            .filter(|(a, _)| !a.mentions(s))
            .map(|(a, b)| (a, Proc::nu(s, b)))
            .collect(),
        Proc::Par(a, b) => {
            let left = lts_steps(a, defs, supply)?;
            let right = lts_steps(b, defs, supply)?;
            let mut out = Vec::new();
            for (x, l) in &left {
                for (y, r) in &right {
                    let sync = matches!((x, y), (Action::In(s), Action::Out(t)) | (Action::Out(t), Action::In(s)) if s == t);
                    if sync {
                        out.push((Action::Tau, Proc::par(l.clone(), r.clone())));
                    }
                }
            }
            out.extend(left.into_iter().map(|(x, l)| (x, Proc::par(l, (**b).clone()))));
            out.extend(right.into_iter().map(|(y, r)| (y, Proc::par((**a).clone(), r))));
            out
        }
    })
}

/// `P↓`: no internal step.
pub fn is_suspended(p: &Proc, defs: &ProcDefs, supply: &mut dyn NameSupply) -> Result<bool, EquivError> {
    Ok(!lts_steps(p, defs, supply)?.iter().any(|(a, _)| *a == Action::Tau))
}

/// `Em(P)`
pub fn emitted_set(p: &Proc) -> BTreeSet<Signal> {
    fn go(p: &Proc, out: &mut BTreeSet<Signal>) {
        match p {
            Proc::Emit(s) => {
                out.insert(s.clone());
            }
            Proc::Par(a, b) => {
                go(a, out);
                go(b, out);
            }
            Proc::Nu(_, b) => go(b, out),
            Proc::Nil | Proc::Present(..) | Proc::Call(..) => {}
        }
    }
    let mut out = BTreeSet::new();
    go(p, &mut out);
    out
}

/// `⌊P⌋_S`
pub fn eoi_with(p: &Proc, s: &BTreeSet<Signal>) -> Proc {
    match p {
        Proc::Nil | Proc::Emit(_) => Proc::Nil,
        Proc::Present(_, _, b) => b.select(&|x| s.contains(x)).clone(),
        Proc::Par(a, b) => Proc::par(eoi_with(a, s), eoi_with(b, s)),
        Proc::Nu(x, b) => Proc::nu(x, eoi_with(b, s)),
        // A suspended process has no calls left.
        Proc::Call(..) => p.clone(),
    }
}

/// `⌊P⌋ = ⌊P⌋_{Em(P)}` for a suspended `P`.
pub fn eoi_proc(p: &Proc, defs: &ProcDefs, supply: &mut dyn NameSupply) -> Result<Proc, EquivError> {
    if !is_suspended(p, defs, supply)? {
        return Err(EquivError::NotSuspended);
    }
    Ok(eoi_with(p, &emitted_set(p)))
}

/// Renames every bound name apart from the free ones and from each other.
pub fn freshen_binders(p: &Proc, supply: &mut dyn NameSupply) -> Proc {
    match p {
        Proc::Nil | Proc::Emit(_) | Proc::Call(..) => p.clone(),
        Proc::Present(s, then, b) => Proc::present(s, freshen_binders(then, supply), freshen_branch(b, supply)),
        Proc::Par(a, b) => Proc::par(freshen_binders(a, supply), freshen_binders(b, supply)),
        Proc::Nu(s, body) => {
            let to = supply.fresh_signal();
            let body = body.substitute(&HashMap::from([(s.clone(), to.clone())]), supply);
            Proc::nu(&to, freshen_binders(&body, supply))
        }
    }
}

fn freshen_branch(b: &BranchP, supply: &mut dyn NameSupply) -> BranchP {
    match b {
        BranchP::Leaf(p) => BranchP::Leaf(freshen_binders(p, supply)),
        BranchP::Ite(s, a, c) => BranchP::ite(s, freshen_branch(a, supply), freshen_branch(c, supply)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::FreshNames;

    fn s(n: &str) -> Signal {
        Signal::named(n)
    }

    #[test]
    fn emission_loops_on_its_barb() {
        let p = Proc::emit(&s("s"));
        let steps = lts_steps(&p, &ProcDefs::new(), &mut FreshNames::default()).unwrap();
        assert_eq!(steps, vec![(Action::Out(s("s")), p)]);
    }

    #[test]
    fn synchronisation_keeps_the_tested_signal() {
        let p = Proc::par(Proc::present(&s("s"), Proc::Nil, BranchP::Leaf(Proc::Nil)), Proc::emit(&s("s")));
        let steps = lts_steps(&p, &ProcDefs::new(), &mut FreshNames::default()).unwrap();
        let expected = Proc::par(Proc::par(Proc::Nil, Proc::emit(&s("s"))), Proc::emit(&s("s")));
        assert!(steps.contains(&(Action::Tau, expected)));
    }

    #[test]
    fn restriction_blocks_actions_on_its_name() {
        let p = Proc::nu(&s("s"), Proc::emit(&s("s")));
        assert!(lts_steps(&p, &ProcDefs::new(), &mut FreshNames::default()).unwrap().is_empty());
    }

    #[test]
    fn end_of_instant_selects_branches() {
        let p = Proc::par(
            Proc::emit(&s("s")),
            Proc::present(&s("t"), Proc::Nil, BranchP::ite(&s("s"), BranchP::Leaf(Proc::emit(&s("a"))), BranchP::Leaf(Proc::Nil))),
        );
        assert_eq!(emitted_set(&p), BTreeSet::from([s("s")]));
        let eoi = eoi_proc(&p, &ProcDefs::new(), &mut FreshNames::default()).unwrap();
        assert_eq!(eoi, Proc::par(Proc::Nil, Proc::emit(&s("a"))));
    }

    #[test]
    fn end_of_instant_needs_suspension() {
        let p = Proc::par(Proc::present(&s("s"), Proc::Nil, BranchP::Leaf(Proc::Nil)), Proc::emit(&s("s")));
        assert_eq!(eoi_proc(&p, &ProcDefs::new(), &mut FreshNames::default()), Err(EquivError::NotSuspended));
    }

    #[test]
    fn tail_emission_becomes_parallel() {
        let t = TailExpr::emit(&s("s"), TailExpr::Nil);
        assert_eq!(tail_to_proc(&t), Proc::par(Proc::emit(&s("s")), Proc::Nil));
    }
}
