use std::collections::HashMap;

use crate::syntax::{Definitions, Thread};

use super::{Environment, RuntimeError};

/// Result of trying to reduce a thread once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step<T> {
    /// The thread moved; `spawned` is set by `thread T`; `emitted` tells
    /// whether a signal became present.
    Moved { spawned: Option<T>, emitted: bool },
    Suspended,
}

impl<T> Step<T> {
    fn moved() -> Self {
        Step::Moved { spawned: None, emitted: false }
    }
}

/// Reduces `t` in place by one rule.
pub fn step_thread(t: &mut Thread, env: &mut Environment, defs: &Definitions) -> Result<Step<Thread>, RuntimeError> {
    match t {
        Thread::Nil | Thread::Pause => Ok(Step::Suspended),
        Thread::Seq(first, rest) => {
            if first.is_nil() {
                *t = std::mem::take(&mut **rest);
                return Ok(Step::moved());
            }
            let out = step_thread(first, env, defs)?;
            if matches!(**first, Thread::Seq(..)) {
                let (a, b) = (std::mem::take(&mut **first), std::mem::take(&mut **rest));
                *t = Thread::seq(a, b);
            }
            Ok(out)
        }
        Thread::Watch(_, body) => {
            if body.is_nil() {
                *t = Thread::Nil;
                return Ok(Step::moved());
            }
            step_thread(body, env, defs)
        }
        Thread::Emit(s) => {
            let emitted = env.emit(s)?;
            *t = Thread::Nil;
            Ok(Step::Moved { spawned: None, emitted })
        }
        Thread::Await(s) => {
            if env.lookup(s)? {
                *t = Thread::Nil;
                Ok(Step::moved())
            } else {
                Ok(Step::Suspended)
            }
        }
        Thread::New(s, body) => {
            let fresh = env.allocate();
            let map = HashMap::from([(s.clone(), fresh)]);
            *t = body.substitute(&map, env);
            Ok(Step::moved())
        }
        Thread::Spawn(body) => {
            let body = std::mem::take(&mut **body);
            *t = Thread::Nil;
            Ok(Step::Moved { spawned: Some(body), emitted: false })
        }
        Thread::Call(id, args) => {
            let def = defs.get(id).ok_or_else(|| RuntimeError::UnboundIdentifier(id.to_string()))?;
            *t = def.instantiate(args, env);
            Ok(Step::moved())
        }
    }
}

/// `(T, E)↓`: no rule applies.
pub fn is_suspended(t: &Thread, env: &Environment) -> Result<bool, RuntimeError> {
    match t {
        Thread::Nil | Thread::Pause => Ok(true),
        Thread::Seq(first, _) => Ok(!first.is_nil() && is_suspended(first, env)?),
        Thread::Watch(_, body) => Ok(!body.is_nil() && is_suspended(body, env)?),
        Thread::Await(s) => Ok(!env.lookup(s)?),
        Thread::Emit(_) | Thread::New(..) | Thread::Spawn(_) | Thread::Call(..) => Ok(false),
    }
}

/// `⌊T⌋_E` for a suspended thread.
pub fn thread_end_of_instant(t: &Thread, env: &Environment) -> Result<Thread, RuntimeError> {
    if !is_suspended(t, env)? {
        return Err(RuntimeError::NotSuspended);
    }
    Ok(eoi(t, env))
}

fn eoi(t: &Thread, env: &Environment) -> Thread {
    match t {
        Thread::Nil | Thread::Pause => Thread::Nil,
        Thread::Seq(first, rest) => Thread::Seq(Box::new(eoi(first, env)), rest.clone()),
        Thread::Await(s) => Thread::Await(s.clone()),
        Thread::Watch(s, body) => {
            if env.get(s) == Some(true) {
                Thread::Nil
            } else {
                Thread::Watch(s.clone(), Box::new(eoi(body, env)))
            }
        }
        _ => unreachable!("checked suspended"),
    }
}
