use std::collections::BTreeSet;

use super::sexpr::{read_all, Pos, Sexp};
use super::{Definition, Definitions, FreshNames, Ident, Interface, NameSupply, ProgramError, Signal, SourceProgram, Thread};

/// How the `pause` keyword is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PauseMode {
    /// `pause` is a primitive instruction.
    #[default]
    Primitive,
    /// `pause` expands to `new s (now (await s))`.
    Table1,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    pub pause: PauseMode,
}

/// Surface forms that are not part of the core thread syntax. Sub-threads
/// are already desugared.
#[derive(Clone, Debug)]
pub enum Surface {
    Loop(Thread),
    Now(Thread),
    Present(Signal, Thread, Thread),
    Par(Thread, Thread),
    Pause,
}

/// Expands derived instructions into core threads, allocating fresh signal
/// names and fresh loop identifiers as it goes.
#[derive(Debug)]
pub struct Desugarer {
    fresh: FreshNames,
    pause: PauseMode,
    taken: BTreeSet<Ident>,
    next_loop: usize,
    defs: Vec<Definition>,
}

impl Desugarer {
    pub fn new(first_fresh: u32, pause: PauseMode, taken: BTreeSet<Ident>) -> Self {
        Desugarer { fresh: FreshNames::starting_at(first_fresh), pause, taken, next_loop: 0, defs: Vec::new() }
    }

    /// Equations introduced by `loop`.
    pub fn definitions(&self) -> &[Definition] {
        &self.defs
    }

    pub fn into_definitions(self) -> Vec<Definition> {
        self.defs
    }

    pub fn next_fresh(&self) -> u32 {
        self.fresh.peek()
    }

    pub fn desugar(&mut self, form: Surface) -> Thread {
        match form {
            Surface::Loop(body) => {
                let id = self.loop_ident();
                let params: Vec<Signal> = body.free_signals().into_iter().collect();
                let call = Thread::call(&id, &params);
                self.defs.push(Definition { id, params, body: Thread::seq(body, call.clone()) });
                call
            }
            Surface::Now(body) => {
                let s = self.fresh.fresh_signal();
                Thread::new_signal(&s, Thread::seq(Thread::emit(&s), Thread::watch(&s, body)))
            }
            Surface::Pause => match self.pause {
                PauseMode::Primitive => Thread::Pause,
                PauseMode::Table1 => {
                    let s = self.fresh.fresh_signal();
                    let now = self.desugar(Surface::Now(Thread::await_(&s)));
                    Thread::new_signal(&s, now)
                }
            },
            Surface::Present(s, then, otherwise) => {
                let done = self.fresh.fresh_signal();
                let positive = self.desugar(Surface::Now(Thread::seq(
                    Thread::await_(&s),
                    Thread::spawn(Thread::seq(then, Thread::emit(&done))),
                )));
                let pause = self.desugar(Surface::Pause);
                let negative = Thread::watch(
                    &s,
                    Thread::seq(pause, Thread::spawn(Thread::seq(otherwise, Thread::emit(&done)))),
                );
                Thread::new_signal(
                    &done,
                    Thread::seq_all([Thread::spawn(positive), Thread::spawn(negative), Thread::await_(&done)]),
                )
            }
            Surface::Par(left, right) => {
                let s1 = self.fresh.fresh_signal();
                let s2 = self.fresh.fresh_signal();
                let k1 = self.fresh.fresh_signal();
                let k2 = self.fresh.fresh_signal();
                let branch = |me: &mut Self, body: Thread, alive: &Signal, kill: &Signal| {
                    let pause = me.desugar(Surface::Pause);
                    let keep_alive = me.desugar(Surface::Loop(Thread::seq(Thread::emit(alive), pause)));
                    Thread::spawn(Thread::watch(kill, Thread::seq(body, keep_alive)))
                };
                let b1 = branch(self, left, &s1, &k1);
                let b2 = branch(self, right, &s2, &k2);
                let body = Thread::seq_all([
                    b1,
                    b2,
                    Thread::await_(&s1),
                    Thread::emit(&k1),
                    Thread::await_(&s2),
                    Thread::emit(&k2),
                ]);
                [s1, s2, k1, k2].iter().rev().fold(body, |acc, s| Thread::new_signal(s, acc))
            }
        }
    }

    fn loop_ident(&mut self) -> Ident {
        loop {
            let id = Ident::new(&format!("L{}", self.next_loop));
            self.next_loop += 1;
            if self.taken.insert(id.clone()) {
                return id;
            }
        }
    }
}

/// Parses a program with primitive `pause`.
pub fn parse_program(text: &str) -> Result<SourceProgram, ProgramError> {
    parse_program_with(text, ParseOptions::default())
}

pub fn parse_program_with(text: &str, options: ParseOptions) -> Result<SourceProgram, ProgramError> {
    let forms = read_all(text)?;
    let mut taken = BTreeSet::new();
    let mut max_fresh = None;
    for form in &forms {
        scan(form, &mut max_fresh);
        if let Sexp::List(items, _) = form {
            if items.first().and_then(Sexp::as_atom) == Some("def") {
                if let Some(Sexp::List(header, _)) = items.get(1) {
                    if let Some(name) = header.first().and_then(Sexp::as_atom) {
                        taken.insert(Ident::new(name));
                    }
                }
            }
        }
    }
    let mut desugarer = Desugarer::new(max_fresh.map_or(0, |n| n + 1), options.pause, taken);
    let mut interface = Interface::default();
    let mut defs = Definitions::new();
    let mut initial = Vec::new();

    for form in &forms {
        let Sexp::List(items, pos) = form else {
            return Err(ProgramError::syntax(form.pos(), "expected a declaration"));
        };
        let head = items.first().and_then(Sexp::as_atom).ok_or_else(|| ProgramError::syntax(*pos, "expected a keyword"))?;
        match head {
            "input" | "output" => {
                for item in &items[1..] {
                    let s = parse_signal(item)?;
                    if head == "input" {
                        interface.inputs.insert(s);
                    } else {
                        interface.outputs.insert(s);
                    }
                }
            }
            "def" => {
                let [_, header, body] = items.as_slice() else {
                    return Err(ProgramError::syntax(*pos, "expected (def (A x ...) T)"));
                };
                let Sexp::List(header, hpos) = header else {
                    return Err(ProgramError::syntax(header.pos(), "expected (A x ...)"));
                };
                let id = header
                    .first()
                    .and_then(Sexp::as_atom)
                    .map(Ident::new)
                    .ok_or_else(|| ProgramError::syntax(*hpos, "expected an identifier"))?;
                let params = header[1..].iter().map(parse_signal).collect::<Result<Vec<_>, _>>()?;
                let body = parse_thread_in(body, &mut desugarer)?;
                if defs.insert(id.clone(), Definition { id: id.clone(), params, body }).is_some() {
                    return Err(ProgramError::DuplicateDefinition(id.to_string()));
                }
            }
            "run" => {
                for item in &items[1..] {
                    initial.push(parse_thread_in(item, &mut desugarer)?);
                }
            }
            other => return Err(ProgramError::syntax(*pos, format!("unknown declaration `{other}`"))),
        }
    }
    for def in desugarer.into_definitions() {
        defs.insert(def.id.clone(), def);
    }
    let program = SourceProgram { interface, defs, initial };
    program.validate()?;
    Ok(program)
}

/// Parses a single thread expression; equations created by `loop` are
/// returned alongside it.
pub fn parse_thread(text: &str, options: ParseOptions) -> Result<(Thread, Vec<Definition>), ProgramError> {
    let forms = read_all(text)?;
    let [form] = forms.as_slice() else {
        return Err(ProgramError::syntax(Pos { line: 1, col: 1 }, "expected exactly one thread"));
    };
    let mut max_fresh = None;
    scan(form, &mut max_fresh);
    let mut desugarer = Desugarer::new(max_fresh.map_or(0, |n| n + 1), options.pause, BTreeSet::new());
    let t = parse_thread_in(form, &mut desugarer)?;
    Ok((t, desugarer.into_definitions()))
}

fn scan(form: &Sexp, max: &mut Option<u32>) {
    match form {
        Sexp::Atom(a, _) => {
            if let Some(n) = a.strip_prefix("%g").and_then(|d| d.parse::<u32>().ok()) {
                *max = Some(max.map_or(n, |m| m.max(n)));
            }
        }
        Sexp::List(items, _) => items.iter().for_each(|i| scan(i, max)),
    }
}

pub(crate) fn parse_signal(form: &Sexp) -> Result<Signal, ProgramError> {
    let Sexp::Atom(a, pos) = form else {
        return Err(ProgramError::syntax(form.pos(), "expected a signal name"));
    };
    if let Some(rest) = a.strip_prefix('%') {
        let parsed = match rest.split_at_checked(1) {
            Some(("g", digits)) => digits.parse().ok().map(Signal::Fresh),
            Some(("p", digits)) => digits.parse().ok().map(Signal::Param),
            _ => None,
        };
        return parsed.ok_or_else(|| ProgramError::syntax(*pos, format!("malformed generated name `{a}`")));
    }
    if a == "0" || a.is_empty() {
        return Err(ProgramError::syntax(*pos, format!("`{a}` is not a signal name")));
    }
    Ok(Signal::named(a))
}

pub(crate) fn parse_ident(form: &Sexp) -> Result<Ident, ProgramError> {
    match form {
        Sexp::Atom(a, pos) if a.starts_with('%') || a == "0" => {
            Err(ProgramError::syntax(*pos, format!("`{a}` is not an identifier")))
        }
        Sexp::Atom(a, _) => Ok(Ident::new(a)),
        Sexp::List(_, pos) => Err(ProgramError::syntax(*pos, "expected an identifier")),
    }
}

fn parse_thread_in(form: &Sexp, d: &mut Desugarer) -> Result<Thread, ProgramError> {
    let (items, pos) = match form {
        Sexp::Atom(a, pos) => {
            return match a.as_str() {
                "0" => Ok(Thread::Nil),
                "pause" => Ok(d.desugar(Surface::Pause)),
                _ => Err(ProgramError::syntax(*pos, format!("expected a thread, found `{a}`"))),
            }
        }
        Sexp::List(items, pos) => (items, *pos),
    };
    let head = items.first().and_then(Sexp::as_atom).ok_or_else(|| ProgramError::syntax(pos, "expected a keyword"))?;
    let args = &items[1..];
    let arity = |n: usize| -> Result<(), ProgramError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(ProgramError::syntax(pos, format!("`{head}` expects {n} arguments, found {}", args.len())))
        }
    };
    let thread = match head {
        "seq" => {
            let parts = args.iter().map(|a| parse_thread_in(a, d)).collect::<Result<Vec<_>, _>>()?;
            Thread::seq_all(parts)
        }
        "emit" => {
            arity(1)?;
            Thread::Emit(parse_signal(&args[0])?)
        }
        "await" => {
            arity(1)?;
            Thread::Await(parse_signal(&args[0])?)
        }
        "new" => {
            arity(2)?;
            Thread::New(parse_signal(&args[0])?, Box::new(parse_thread_in(&args[1], d)?))
        }
        "thread" => {
            arity(1)?;
            Thread::Spawn(Box::new(parse_thread_in(&args[0], d)?))
        }
        "watch" => {
            arity(2)?;
            Thread::Watch(parse_signal(&args[0])?, Box::new(parse_thread_in(&args[1], d)?))
        }
        "call" => {
            let Some(id) = args.first() else {
                return Err(ProgramError::syntax(pos, "`call` expects an identifier"));
            };
            let id = parse_ident(id)?;
            let actuals = args[1..].iter().map(parse_signal).collect::<Result<Vec<_>, _>>()?;
            Thread::Call(id, actuals)
        }
        "pause" => {
            arity(0)?;
            d.desugar(Surface::Pause)
        }
        "loop" => {
            arity(1)?;
            let body = parse_thread_in(&args[0], d)?;
            d.desugar(Surface::Loop(body))
        }
        "now" => {
            arity(1)?;
            let body = parse_thread_in(&args[0], d)?;
            d.desugar(Surface::Now(body))
        }
        "present" => {
            arity(3)?;
            let s = parse_signal(&args[0])?;
            let then = parse_thread_in(&args[1], d)?;
            let otherwise = parse_thread_in(&args[2], d)?;
            d.desugar(Surface::Present(s, then, otherwise))
        }
        "par" => {
            if args.len() < 2 {
                return Err(ProgramError::syntax(pos, "`par` expects at least 2 threads"));
            }
            let mut parts = args.iter().map(|a| parse_thread_in(a, d)).collect::<Result<Vec<_>, _>>()?;
            let mut acc = parts.pop().expect("non-empty");
            while let Some(left) = parts.pop() {
                acc = d.desugar(Surface::Par(left, acc));
            }
            acc
        }
        other => return Err(ProgramError::syntax(pos, format!("unknown instruction `{other}`"))),
    };
    Ok(thread)
}
