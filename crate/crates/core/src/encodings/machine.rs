use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MachineError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("state {0} is used but has no instruction")]
    MissingInstruction(String),
    #[error("state {0} has two instructions")]
    DuplicateState(String),
    #[error("the halting state {0} has an instruction")]
    HaltHasInstruction(String),
    #[error("counter c{0} does not exist; use c1 or c2")]
    BadCounter(usize),
    #[error("`{0}` is not a valid state name")]
    BadStateName(String),
    #[error("missing `{0}` line")]
    Missing(&'static str),
}

/// One instruction; counters are numbered from 1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Instr {
    Inc(usize, String),
    Dec(usize, String),
    /// `zero c -> if_zero else if_nonzero`
    TestZero(usize, String, String),
}

/// Deterministic machine with at most two counters.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CounterMachine {
    pub init: String,
    pub halt: String,
    pub instrs: BTreeMap<String, Instr>,
}

/// How a bounded run of a machine ended.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Outcome {
    Halted { steps: usize, counters: [u64; 2] },
    /// Decrement of an empty counter: the machine cannot move.
    Blocked { steps: usize, state: String },
    Running { steps: usize },
}

impl CounterMachine {
    pub fn validate(&self) -> Result<(), MachineError> {
        for name in self.states() {
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(MachineError::BadStateName(name));
            }
        }
        if self.instrs.contains_key(&self.halt) {
            return Err(MachineError::HaltHasInstruction(self.halt.clone()));
        }
        for q in self.states() {
            if q != self.halt && !self.instrs.contains_key(&q) {
                return Err(MachineError::MissingInstruction(q));
            }
        }
        for i in self.instrs.values() {
            let c = match i {
                Instr::Inc(c, _) | Instr::Dec(c, _) | Instr::TestZero(c, _, _) => *c,
            };
            if !(1..=2).contains(&c) {
                return Err(MachineError::BadCounter(c));
            }
        }
        Ok(())
    }

    /// Every state mentioned, including the initial and halting ones.
    pub fn states(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::from([self.init.clone(), self.halt.clone()]);
        for (q, i) in &self.instrs {
            out.insert(q.clone());
            match i {
                Instr::Inc(_, n) | Instr::Dec(_, n) => {
                    out.insert(n.clone());
                }
                Instr::TestZero(_, a, b) => {
                    out.insert(a.clone());
                    out.insert(b.clone());
                }
            }
        }
        out
    }

    /// Number of counters in use (at least one).
    pub fn counters(&self) -> usize {
        self.instrs
            .values()
            .map(|i| match i {
                Instr::Inc(c, _) | Instr::Dec(c, _) | Instr::TestZero(c, _, _) => *c,
            })
            .max()
            .unwrap_or(1)
            .max(1)
    }

    /// Runs at most `max_steps` instructions from empty counters.
    pub fn run(&self, max_steps: usize) -> Outcome {
        let mut q = self.init.clone();
        let mut counters = [0u64; 2];
        for steps in 0..=max_steps {
            if q == self.halt {
                return Outcome::Halted { steps, counters };
            }
            if steps == max_steps {
                break;
            }
            q = match &self.instrs[&q] {
                Instr::Inc(c, n) => {
                    counters[c - 1] += 1;
                    n.clone()
                }
                Instr::Dec(c, n) => {
                    if counters[c - 1] == 0 {
                        return Outcome::Blocked { steps, state: q };
                    }
                    counters[c - 1] -= 1;
                    n.clone()
                }
                Instr::TestZero(c, z, nz) => {
                    if counters[c - 1] == 0 {
                        z.clone()
                    } else {
                        nz.clone()
                    }
                }
            };
        }
        Outcome::Running { steps: max_steps }
    }
}

/// Stack operation of a pushdown automaton with one stack symbol.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StackOp {
    Push(String),
    Pop(String),
    /// `empty -> if_empty else if_not`
    IfEmpty(String, String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Pushdown {
    pub init: String,
    pub halt: String,
    pub ops: BTreeMap<String, StackOp>,
}

impl Pushdown {
    pub fn to_counter_machine(&self) -> CounterMachine {
        let instrs = self
            .ops
            .iter()
            .map(|(q, op)| {
                let i = match op {
                    StackOp::Push(n) => Instr::Inc(1, n.clone()),
                    StackOp::Pop(n) => Instr::Dec(1, n.clone()),
                    StackOp::IfEmpty(z, nz) => Instr::TestZero(1, z.clone(), nz.clone()),
                };
                (q.clone(), i)
            })
            .collect();
        CounterMachine { init: self.init.clone(), halt: self.halt.clone(), instrs }
    }
}

/// Lines are `init q`, `halt q` and one instruction per state:
/// `state q: inc c1 -> q'`, `state q: dec c2 -> q'`,
/// `state q: zero c1 -> qz else qnz`. `#` starts a comment.
pub fn parse_counter_machine(text: &str) -> Result<CounterMachine, MachineError> {
    let (init, halt, lines) = parse_lines(text)?;
    let mut instrs = BTreeMap::new();
    for (line, q, words) in lines {
        let err = |message: &str| MachineError::Format { line, message: message.to_string() };
        let counter = |w: &str| -> Result<usize, MachineError> {
            w.strip_prefix('c').and_then(|n| n.parse().ok()).ok_or_else(|| err("expected a counter c1 or c2"))
        };
        let instr = match words.as_slice() {
            ["inc", c, "->", n] => Instr::Inc(counter(c)?, n.to_string()),
            ["dec", c, "->", n] => Instr::Dec(counter(c)?, n.to_string()),
            ["zero", c, "->", z, "else", nz] => Instr::TestZero(counter(c)?, z.to_string(), nz.to_string()),
            _ => return Err(err("expected `inc c -> q`, `dec c -> q` or `zero c -> q else q`")),
        };
        if instrs.insert(q.clone(), instr).is_some() {
            return Err(MachineError::DuplicateState(q));
        }
    }
    let m = CounterMachine { init, halt, instrs };
    m.validate()?;
    Ok(m)
}

/// Same layout as counter machines with `push -> q`, `pop -> q` and
/// `empty -> qz else qnz`.
pub fn parse_pushdown(text: &str) -> Result<Pushdown, MachineError> {
    let (init, halt, lines) = parse_lines(text)?;
    let mut ops = BTreeMap::new();
    for (line, q, words) in lines {
        let op = match words.as_slice() {
            ["push", "->", n] => StackOp::Push(n.to_string()),
            ["pop", "->", n] => StackOp::Pop(n.to_string()),
            ["empty", "->", z, "else", nz] => StackOp::IfEmpty(z.to_string(), nz.to_string()),
            _ => {
                return Err(MachineError::Format { line, message: "expected `push -> q`, `pop -> q` or `empty -> q else q`".into() })
            }
        };
        if ops.insert(q.clone(), op).is_some() {
            return Err(MachineError::DuplicateState(q));
        }
    }
    let p = Pushdown { init, halt, ops };
    p.to_counter_machine().validate()?;
    Ok(p)
}

type Lines<'a> = Vec<(usize, String, Vec<&'a str>)>;

fn parse_lines(text: &str) -> Result<(String, String, Lines<'_>), MachineError> {
    let (mut init, mut halt) = (None, None);
    let mut lines = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        match words.as_slice() {
            ["init", q] => init = Some(q.to_string()),
            ["halt", q] => halt = Some(q.to_string()),
            ["state", q, rest @ ..] if q.ends_with(':') => {
                lines.push((line, q.trim_end_matches(':').to_string(), rest.to_vec()));
            }
            _ => return Err(MachineError::Format { line, message: "expected `init`, `halt` or `state q: ...`".into() }),
        }
    }
    Ok((init.ok_or(MachineError::Missing("init"))?, halt.ok_or(MachineError::Missing("halt"))?, lines))
}

pub fn print_counter_machine(m: &CounterMachine) -> String {
    let mut out = format!("init {}\nhalt {}\n", m.init, m.halt);
    for (q, i) in &m.instrs {
        match i {
            Instr::Inc(c, n) => writeln!(out, "state {q}: inc c{c} -> {n}"),
            Instr::Dec(c, n) => writeln!(out, "state {q}: dec c{c} -> {n}"),
            Instr::TestZero(c, z, nz) => writeln!(out, "state {q}: zero c{c} -> {z} else {nz}"),
        }
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_UP_TWO_DOWN: &str = "init a\nhalt h\nstate a: inc c1 -> b\nstate b: inc c1 -> c\nstate c: dec c1 -> d\nstate d: dec c1 -> e\nstate e: zero c1 -> h else a\n";

    #[test]
    fn interpreter_halts() {
        let m = parse_counter_machine(TWO_UP_TWO_DOWN).unwrap();
        assert_eq!(m.run(100), Outcome::Halted { steps: 5, counters: [0, 0] });
    }

    #[test]
    fn decrement_of_zero_blocks() {
        let m = parse_counter_machine("init a\nhalt h\nstate a: dec c2 -> h").unwrap();
        assert_eq!(m.run(10), Outcome::Blocked { steps: 0, state: "a".into() });
    }

    #[test]
    fn format_round_trip() {
        let m = parse_counter_machine(TWO_UP_TWO_DOWN).unwrap();
        assert_eq!(parse_counter_machine(&print_counter_machine(&m)).unwrap(), m);
    }

    #[test]
    fn missing_state_is_reported() {
        let e = parse_counter_machine("init a\nhalt h\nstate a: inc c1 -> b").unwrap_err();
        assert_eq!(e, MachineError::MissingInstruction("b".into()));
    }
}
