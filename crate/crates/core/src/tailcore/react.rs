use std::collections::{BTreeSet, HashMap};

use crate::analysis::{acyclic_verdict, CallResult, Verdict};
use crate::semantics::{Environment, Reactive, ReactiveProgram, RuntimeError, Step};
use crate::syntax::{Ident, Interface, Signal};

use super::{Branch, TailDefs, TailExpr, TailProgram};

/// Reduces `t` in place by one rule.
pub fn step_tail(t: &mut TailExpr, env: &mut Environment, defs: &TailDefs) -> Result<Step<TailExpr>, RuntimeError> {
    match t {
        TailExpr::Nil => Ok(Step::Suspended),
        TailExpr::Emit(s, next) => {
            let emitted = env.emit(s)?;
            *t = std::mem::take(&mut **next);
            Ok(Step::Moved { spawned: None, emitted })
        }
        TailExpr::New(s, body) => {
            let fresh = env.allocate();
            let map = HashMap::from([(s.clone(), fresh)]);
            *t = body.substitute(&map, env);
            Ok(Step::Moved { spawned: None, emitted: false })
        }
        TailExpr::Call(id, args) => {
            let def = defs.get(id).ok_or_else(|| RuntimeError::UnboundIdentifier(id.to_string()))?;
            *t = def.instantiate(args, env);
            Ok(Step::Moved { spawned: None, emitted: false })
        }
        TailExpr::Present(s, then, _) => {
            if env.lookup(s)? {
                *t = std::mem::take(&mut **then);
                Ok(Step::Moved { spawned: None, emitted: false })
            } else {
                Ok(Step::Suspended)
            }
        }
        TailExpr::Spawn(spawned, next) => {
            let spawned = std::mem::take(&mut **spawned);
            *t = std::mem::take(&mut **next);
            Ok(Step::Moved { spawned: Some(spawned), emitted: false })
        }
    }
}

pub fn tail_is_suspended(t: &TailExpr, env: &Environment) -> Result<bool, RuntimeError> {
    match t {
        TailExpr::Nil => Ok(true),
        TailExpr::Present(s, ..) => Ok(!env.lookup(s)?),
        _ => Ok(false),
    }
}

/// `⌊0⌋ = 0` and `⌊present s t b⌋ = ⟨|b|⟩`.
pub fn tail_end_of_instant(t: &TailExpr, env: &Environment) -> Result<TailExpr, RuntimeError> {
    if !tail_is_suspended(t, env)? {
        return Err(RuntimeError::NotSuspended);
    }
    Ok(match t {
        TailExpr::Present(_, _, b) => b.select(&|s| env.get(s) == Some(true)).clone(),
        _ => TailExpr::Nil,
    })
}

impl Reactive for TailExpr {
    type Defs = TailDefs;

    fn react(&mut self, env: &mut Environment, defs: &TailDefs) -> Result<Step<TailExpr>, RuntimeError> {
        step_tail(self, env, defs)
    }

    fn suspended(&self, env: &Environment) -> Result<bool, RuntimeError> {
        tail_is_suspended(self, env)
    }

    fn end_of_instant(&self, env: &Environment) -> Result<TailExpr, RuntimeError> {
        tail_end_of_instant(self, env)
    }

    fn free_signals_into(&self, out: &mut BTreeSet<Signal>) {
        self.collect_free(&mut Vec::new(), out);
    }
}

impl ReactiveProgram for TailProgram {
    type Thread = TailExpr;
    type Defs = TailDefs;

    fn interface(&self) -> &Interface {
        &self.interface
    }

    fn definitions(&self) -> &TailDefs {
        &self.defs
    }

    fn initial_threads(&self) -> Vec<TailExpr> {
        self.initial.clone()
    }

    fn first_fresh(&self) -> u32 {
        self.next_fresh_index()
    }
}

/// A bound signal is inert in `body` when nothing can ever emit it: it is
/// neither emitted nor passed to a call. Testing it is the same as pausing.
pub fn signal_is_inert(s: &Signal, body: &TailExpr) -> bool {
    fn used(s: &Signal, t: &TailExpr) -> bool {
        match t {
            TailExpr::Nil => false,
            TailExpr::Emit(x, next) => x == s || used(s, next),
            TailExpr::New(x, body) => x != s && used(s, body),
            TailExpr::Spawn(a, b) => used(s, a) || used(s, b),
            TailExpr::Present(_, then, b) => used(s, then) || used_branch(s, b),
            TailExpr::Call(_, args) => args.contains(s),
        }
    }
    fn used_branch(s: &Signal, b: &Branch) -> bool {
        match b {
            Branch::Leaf(t) => used(s, t),
            Branch::Ite(_, a, c) => used_branch(s, a) || used_branch(s, c),
        }
    }
    !used(s, body)
}

/// Identifiers a tail thread may call in the current instant. A presence
/// test on an inert bound signal is a pause and stops the count; any other
/// test is assumed to succeed. Branches run in the next instant and are
/// ignored.
pub fn tail_call_of(t: &TailExpr) -> CallResult {
    fn go(t: &TailExpr, inert: &mut Vec<Signal>) -> CallResult {
        match t {
            TailExpr::Nil => CallResult::empty(),
            TailExpr::Emit(_, next) => go(next, inert),
            TailExpr::New(s, body) => {
                if signal_is_inert(s, body) {
                    inert.push(s.clone());
                    let out = go(body, inert);
                    inert.pop();
                    out
                } else {
                    // A shadowing binder hides an outer inert name.
                    let saved = std::mem::take(inert);
                    let mut kept: Vec<Signal> = saved.iter().filter(|x| *x != s).cloned().collect();
                    let out = go(body, &mut kept);
                    *inert = saved;
                    out
                }
            }
            TailExpr::Spawn(a, b) => go(a, inert).opened().then(&go(b, inert)),
            TailExpr::Present(s, then, _) => {
                if inert.contains(s) {
                    CallResult::stopped()
                } else {
                    go(then, inert)
                }
            }
            TailExpr::Call(id, _) => CallResult::single(id),
        }
    }
    go(t, &mut Vec::new())
}

/// Reactivity check for tail programs.
pub fn check_tail_reactivity(p: &TailProgram) -> Verdict {
    let edges: Vec<(Ident, Ident, bool)> = p
        .defs
        .values()
        .flat_map(|d| tail_call_of(&d.body).support().into_iter().map(move |b| (d.id.clone(), b, true)))
        .collect();
    acyclic_verdict(&p.defs.keys().cloned().collect(), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::FreshNames;
    use crate::tailcore::pause_prefix;

    fn s(n: &str) -> Signal {
        Signal::named(n)
    }

    #[test]
    fn emit_continues() {
        let mut env = Environment::new(0);
        env.define(s("s"), false);
        let mut t = TailExpr::emit(&s("s"), TailExpr::Nil);
        step_tail(&mut t, &mut env, &TailDefs::new()).unwrap();
        assert_eq!(t, TailExpr::Nil);
        assert_eq!(env.get(&s("s")), Some(true));
    }

    #[test]
    fn present_branches() {
        let mut env = Environment::new(0);
        env.define(s("s"), true);
        env.define(s("s1"), true);
        let b = Branch::ite(&s("s1"), TailExpr::emit(&s("a"), TailExpr::Nil).into(), TailExpr::Nil.into());
        let mut t = TailExpr::present(&s("s"), TailExpr::Nil, b.clone());
        step_tail(&mut t, &mut env, &TailDefs::new()).unwrap();
        assert_eq!(t, TailExpr::Nil);
        env.define(s("s"), false);
        let t = TailExpr::present(&s("s"), TailExpr::Nil, b);
        assert_eq!(step_tail(&mut t.clone(), &mut env, &TailDefs::new()), Ok(Step::Suspended));
        assert_eq!(tail_end_of_instant(&t, &env).unwrap(), TailExpr::emit(&s("a"), TailExpr::Nil));
    }

    #[test]
    fn pause_stops_the_call_count() {
        let id = Ident::new("A");
        let t = pause_prefix(TailExpr::call(&id, &[]).into(), &mut FreshNames::default());
        assert_eq!(tail_call_of(&t), CallResult::stopped());
        let t = TailExpr::emit(&s("o"), TailExpr::call(&id, &[]));
        assert_eq!(tail_call_of(&t).support(), BTreeSet::from([id]));
    }
}
