use crate::syntax::{Ident, Signal, Thread};

/// The instruction about to be executed in a thread.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Redex {
    /// `0;T`
    SeqNil(Thread),
    Emit(Signal),
    New(Signal, Thread),
    Spawn(Thread),
    Await(Signal),
    /// `watch s 0`
    WatchNil(Signal),
    Call(Ident, Vec<Signal>),
    Pause,
}

impl Redex {
    pub fn to_thread(&self) -> Thread {
        match self {
            Redex::SeqNil(rest) => Thread::Seq(Box::new(Thread::Nil), Box::new(rest.clone())),
            Redex::Emit(s) => Thread::Emit(s.clone()),
            Redex::New(s, body) => Thread::new_signal(s, body.clone()),
            Redex::Spawn(body) => Thread::spawn(body.clone()),
            Redex::Await(s) => Thread::Await(s.clone()),
            Redex::WatchNil(s) => Thread::watch(s, Thread::Nil),
            Redex::Call(id, args) => Thread::Call(id.clone(), args.clone()),
            Redex::Pause => Thread::Pause,
        }
    }
}

/// A `watch s C` frame, optionally followed by `;T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WatchFrame {
    pub signal: Signal,
    pub then: Option<Thread>,
}

/// Evaluation context: watch frames from the outside in, then a hole that is
/// either `[ ]` or `[ ];T`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalContext {
    pub frames: Vec<WatchFrame>,
    pub rest: Option<Thread>,
}

impl EvalContext {
    pub fn hole() -> Self {
        EvalContext::default()
    }

    /// `C[t]`.
    pub fn plug(&self, t: Thread) -> Thread {
        let mut acc = match &self.rest {
            Some(rest) => seq_raw(t, rest.clone()),
            None => t,
        };
        for frame in self.frames.iter().rev() {
            acc = Thread::watch(&frame.signal, acc);
            if let Some(then) = &frame.then {
                acc = seq_raw(acc, then.clone());
            }
        }
        acc
    }
}

// Plugging a sequence into `[ ];T` keeps the sequence as the first component;
// the result is only used for structural comparison.
fn seq_raw(a: Thread, b: Thread) -> Thread {
    Thread::Seq(Box::new(a), Box::new(b))
}

/// Splits a thread into its evaluation context and redex; `None` for `0`.
pub fn decompose(t: &Thread) -> Option<(EvalContext, Redex)> {
    let mut frames = Vec::new();
    let mut cur = t;
    let mut pending: Option<Thread> = None;
    loop {
        match cur {
            Thread::Nil => {
                return match pending {
                    Some(rest) => Some((EvalContext { frames, rest: None }, Redex::SeqNil(rest))),
                    None if frames.is_empty() => None,
                    // watch s 0 is caught below before descending.
                    None => unreachable!("watch body checked for 0"),
                };
            }
            Thread::Seq(first, rest) => {
                if pending.is_some() {
                    // `(T1;T2);T3` is not produced by the parser; treat it as
                    // `T1;(T2;T3)`.
                    let normal = Thread::seq((**first).clone(), Thread::seq((**rest).clone(), pending.take().unwrap()));
                    let (mut c, r) = decompose(&normal)?;
                    frames.append(&mut c.frames);
                    return Some((EvalContext { frames, rest: c.rest }, r));
                }
                pending = Some((**rest).clone());
                cur = first;
            }
            Thread::Watch(s, body) => {
                if body.is_nil() {
                    return Some((EvalContext { frames, rest: pending }, Redex::WatchNil(s.clone())));
                }
                frames.push(WatchFrame { signal: s.clone(), then: pending.take() });
                cur = body;
            }
            Thread::Emit(s) => return Some((EvalContext { frames, rest: pending }, Redex::Emit(s.clone()))),
            Thread::Await(s) => return Some((EvalContext { frames, rest: pending }, Redex::Await(s.clone()))),
            Thread::New(s, body) => {
                return Some((EvalContext { frames, rest: pending }, Redex::New(s.clone(), (**body).clone())))
            }
            Thread::Spawn(body) => {
                return Some((EvalContext { frames, rest: pending }, Redex::Spawn((**body).clone())))
            }
            Thread::Call(id, args) => {
                return Some((EvalContext { frames, rest: pending }, Redex::Call(id.clone(), args.clone())))
            }
            Thread::Pause => return Some((EvalContext { frames, rest: pending }, Redex::Pause)),
        }
    }
}
