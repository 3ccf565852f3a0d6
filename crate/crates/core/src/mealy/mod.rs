//! Monotonic Mealy machines over powerset alphabets, their compilation to
//! tail programs and their extraction from tail programs without signal
//! generation.

mod compile;
mod extract;
mod format;

use std::collections::{HashMap, VecDeque};

use crate::syntax::{Interface, Signal};

pub use compile::{mealy_to_program, state_ident};
pub use extract::{closure, normalize_tail, program_to_mealy, Closure, NormalBranch, NormalNode, NormalProgram, DEFAULT_STATE_LIMIT};
pub use format::{parse_mealy, print_mealy};

pub const MAX_INPUTS: usize = 12;

/// Deterministic machine with input alphabet `2^n` and output alphabet
/// `2^m`. Input and output sets are bitmasks: bit `k` stands for index
/// `k + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotonicMealy {
    pub n: usize,
    pub m: usize,
    pub states: Vec<String>,
    pub init: usize,
    /// `next[q][X]`
    pub next: Vec<Vec<usize>>,
    /// `output[q][X]`
    pub output: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MealyError {
    #[error("{0} inputs exceed the supported maximum of 12")]
    ArityTooLarge(usize),
    #[error("output {output} is produced on input {x:?} but not on its superset {y:?} in state `{state}`")]
    MonotonicityViolation { x: Vec<usize>, y: Vec<usize>, state: String, output: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("the program generates signals")]
    HasSignalGeneration,
    #[error("more than {0} reachable states")]
    StateExplosion(usize),
    #[error("identifier `{0}` only renames itself")]
    AliasCycle(String),
    #[error("more than 64 distinct signals")]
    TooManySignals,
    #[error("machines have different arities ({0},{1}) and ({2},{3})")]
    ArityMismatch(usize, usize, usize, usize),
}

/// Indices `1..` of the bits set in `mask`.
pub fn indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|k| mask & (1 << k) != 0).map(|k| k + 1).collect()
}

pub fn mask_of(indices: &[usize]) -> u32 {
    indices.iter().fold(0, |m, i| m | (1 << (i - 1)))
}

/// Signals `i1..in` and `o1..om` used for a machine's program.
pub fn mealy_interface(n: usize, m: usize) -> Interface {
    Interface::new(input_signals(n), output_signals(m))
}

pub fn input_signals(n: usize) -> Vec<Signal> {
    (1..=n).map(|k| Signal::named(&format!("i{k}"))).collect()
}

pub fn output_signals(m: usize) -> Vec<Signal> {
    (1..=m).map(|k| Signal::named(&format!("o{k}"))).collect()
}

/// Outcome of comparing two machines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MealyEquiv {
    Equivalent,
    /// Shortest input word on which the outputs differ.
    Witness(Vec<u32>),
}

impl MonotonicMealy {
    /// Checks arity, table shape and monotonicity of the output function.
    pub fn validate(&self) -> Result<(), MealyError> {
        if self.n > MAX_INPUTS {
            return Err(MealyError::ArityTooLarge(self.n));
        }
        let size = 1usize << self.n;
        let bad = |message: String| MealyError::Format { line: 0, message };
        if self.init >= self.states.len() || self.next.len() != self.states.len() || self.output.len() != self.states.len() {
            return Err(bad("tables do not match the state list".into()));
        }
        for q in 0..self.states.len() {
            if self.next[q].len() != size || self.output[q].len() != size {
                return Err(bad(format!("state `{}` does not cover every input set", self.states[q])));
            }
            if self.next[q].iter().any(|&p| p >= self.states.len()) {
                return Err(bad(format!("state `{}` moves to an unknown state", self.states[q])));
            }
            for x in 0..size as u32 {
                for bit in 0..self.n {
                    let y = x | (1 << bit);
                    if y == x {
                        continue;
                    }
                    let lost = self.output[q][x as usize] & !self.output[q][y as usize];
                    if lost != 0 {
                        return Err(MealyError::MonotonicityViolation {
                            x: indices(x),
                            y: indices(y),
                            state: self.states[q].clone(),
                            output: indices(lost)[0],
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Output word for an input word.
    pub fn run(&self, word: &[u32]) -> Vec<u32> {
        let mut q = self.init;
        word.iter()
            .map(|&x| {
                let o = self.output[q][x as usize];
                q = self.next[q][x as usize];
                o
            })
            .collect()
    }
}

/// Product-machine search for a shortest distinguishing input word.
pub fn mealy_trace_equiv(a: &MonotonicMealy, b: &MonotonicMealy) -> Result<MealyEquiv, MealyError> {
    if a.n != b.n || a.m != b.m {
        return Err(MealyError::ArityMismatch(a.n, a.m, b.n, b.m));
    }
    let size = 1u32 << a.n;
    let start = (a.init, b.init);
    let mut parent: HashMap<(usize, usize), Option<((usize, usize), u32)>> = HashMap::from([(start, None)]);
    let mut queue = VecDeque::from([start]);
    while let Some((p, q)) = queue.pop_front() {
        for x in 0..size {
            let word_to = |mut cur: (usize, usize)| {
                let mut word = vec![x];
                while let Some(Some((prev, y))) = parent.get(&cur) {
                    word.push(*y);
                    cur = *prev;
                }
                word.reverse();
                word
            };
            if a.output[p][x as usize] != b.output[q][x as usize] {
                return Ok(MealyEquiv::Witness(word_to((p, q))));
            }
            let succ = (a.next[p][x as usize], b.next[q][x as usize]);
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(succ) {
                e.insert(Some(((p, q), x)));
                queue.push_back(succ);
            }
        }
    }
    Ok(MealyEquiv::Equivalent)
}
