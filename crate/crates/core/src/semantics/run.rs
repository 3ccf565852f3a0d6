use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::syntax::{canonicalize, canonicalize_with_renaming, Definitions, Interface, Rename, Signal, SourceProgram, Thread};

use super::step::{is_suspended, step_thread, thread_end_of_instant, Step};
use super::{Environment, RuntimeError};

/// A thread language that can be run by the instant machine.
pub trait Reactive: Rename {
    type Defs;
    fn react(&mut self, env: &mut Environment, defs: &Self::Defs) -> Result<Step<Self>, RuntimeError>;
    fn suspended(&self, env: &Environment) -> Result<bool, RuntimeError>;
    fn end_of_instant(&self, env: &Environment) -> Result<Self, RuntimeError>;
    fn free_signals_into(&self, out: &mut BTreeSet<Signal>);
}

/// A program over some [`Reactive`] thread language.
pub trait ReactiveProgram {
    type Thread: Reactive<Defs = Self::Defs>;
    type Defs;
    fn interface(&self) -> &Interface;
    fn definitions(&self) -> &Self::Defs;
    fn initial_threads(&self) -> Vec<Self::Thread>;
    /// First generated-name index not used in the program text.
    fn first_fresh(&self) -> u32;
}

impl Reactive for Thread {
    type Defs = Definitions;

    fn react(&mut self, env: &mut Environment, defs: &Definitions) -> Result<Step<Thread>, RuntimeError> {
        step_thread(self, env, defs)
    }

    fn suspended(&self, env: &Environment) -> Result<bool, RuntimeError> {
        is_suspended(self, env)
    }

    fn end_of_instant(&self, env: &Environment) -> Result<Thread, RuntimeError> {
        thread_end_of_instant(self, env)
    }

    fn free_signals_into(&self, out: &mut BTreeSet<Signal>) {
        self.collect_free(&mut Vec::new(), out);
    }
}

impl ReactiveProgram for SourceProgram {
    type Thread = Thread;
    type Defs = Definitions;

    fn interface(&self) -> &Interface {
        &self.interface
    }

    fn definitions(&self) -> &Definitions {
        &self.defs
    }

    fn initial_threads(&self) -> Vec<Thread> {
        self.initial.clone()
    }

    fn first_fresh(&self) -> u32 {
        self.next_fresh_index()
    }
}

/// Which runnable thread moves next.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Policy {
    /// Lowest-index runnable thread; spawned threads are appended.
    #[default]
    Deterministic,
    /// Uniform choice among runnable threads.
    Random { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub policy: Policy,
    /// Thread reductions allowed per instant.
    pub fuel: u64,
}

pub const DEFAULT_FUEL: u64 = 1_000_000;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { policy: Policy::Deterministic, fuel: DEFAULT_FUEL }
    }
}

impl RunConfig {
    pub fn random(seed: u64) -> Self {
        RunConfig { policy: Policy::Random { seed }, ..RunConfig::default() }
    }

    pub fn with_fuel(self, fuel: u64) -> Self {
        RunConfig { fuel, ..self }
    }
}

#[derive(Debug)]
struct Scheduler {
    rng: Option<ChaCha8Rng>,
}

impl Scheduler {
    fn new(policy: Policy) -> Self {
        match policy {
            Policy::Deterministic => Scheduler { rng: None },
            Policy::Random { seed } => Scheduler { rng: Some(ChaCha8Rng::seed_from_u64(seed)) },
        }
    }
}

/// What happened during one instant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstantResult<T> {
    pub outputs: BTreeSet<Signal>,
    pub residual: Vec<T>,
    pub steps: u64,
    /// Environment at suspension, before the end-of-instant rewrite.
    pub env: Environment,
}

/// Runs threads until global suspension under input set `inputs`, then
/// applies the end-of-instant rewrite.
pub fn run_instant<T: Reactive>(
    mut threads: Vec<T>,
    defs: &T::Defs,
    interface: &Interface,
    inputs: &BTreeSet<Signal>,
    next_fresh: u32,
    config: &RunConfig,
) -> Result<InstantResult<T>, RuntimeError> {
    let mut scheduler = Scheduler::new(config.policy);
    run_instant_with(&mut threads, defs, interface, inputs, next_fresh, config.fuel, &mut scheduler, 0)
        .map(|(outputs, steps, env)| InstantResult { outputs, residual: threads, steps, env })
}

#[allow(clippy::too_many_arguments)]
fn run_instant_with<T: Reactive>(
    threads: &mut Vec<T>,
    defs: &T::Defs,
    interface: &Interface,
    inputs: &BTreeSet<Signal>,
    next_fresh: u32,
    fuel: u64,
    scheduler: &mut Scheduler,
    instant: usize,
) -> Result<(BTreeSet<Signal>, u64, Environment), RuntimeError> {
    if let Some(s) = inputs.iter().find(|s| !interface.inputs.contains(*s)) {
        return Err(RuntimeError::UndeclaredInput(s.to_string()));
    }
    let mut known = interface.all();
    for t in threads.iter() {
        t.free_signals_into(&mut known);
    }
    let mut env = Environment::for_instant(&known, inputs, next_fresh);
    let mut steps = 0u64;
    let exhausted = |steps| RuntimeError::FuelExhausted { steps, instant };

    match &mut scheduler.rng {
        None => 'rescan: loop {
            let mut chosen = None;
            for (k, t) in threads.iter().enumerate() {
                if !t.suspended(&env)? {
                    chosen = Some(k);
                    break;
                }
            }
            let Some(k) = chosen else { break };
            loop {
                if steps >= fuel {
                    return Err(exhausted(steps));
                }
                match threads[k].react(&mut env, defs)? {
                    Step::Suspended => continue 'rescan,
                    Step::Moved { spawned, emitted } => {
                        steps += 1;
                        if let Some(sp) = spawned {
                            threads.push(sp);
                        }
                        if emitted {
                            continue 'rescan;
                        }
                    }
                }
            }
        },
        Some(rng) => loop {
            let mut runnable = Vec::new();
            for (k, t) in threads.iter().enumerate() {
                if !t.suspended(&env)? {
                    runnable.push(k);
                }
            }
            if runnable.is_empty() {
                break;
            }
            if steps >= fuel {
                return Err(exhausted(steps));
            }
            let k = runnable[rng.gen_range(0..runnable.len())];
            if let Step::Moved { spawned, .. } = threads[k].react(&mut env, defs)? {
                steps += 1;
                if let Some(sp) = spawned {
                    threads.push(sp);
                }
            }
        },
    }

    let outputs = interface.outputs.iter().filter(|s| env.get(s) == Some(true)).cloned().collect();
    for t in threads.iter_mut() {
        *t = t.end_of_instant(&env)?;
    }
    Ok((outputs, steps, env))
}

/// One observed instant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TraceStep {
    pub inputs: BTreeSet<Signal>,
    pub outputs: BTreeSet<Signal>,
}

pub type Trace = Vec<TraceStep>;

/// Formats a signal set as `{a,b}`.
pub fn fmt_set<'a>(set: impl IntoIterator<Item = &'a Signal>) -> String {
    let names: Vec<String> = set.into_iter().map(|s| s.to_string()).collect();
    format!("{{{}}}", names.join(","))
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I={} O={}", fmt_set(&self.inputs), fmt_set(&self.outputs))
    }
}

/// A program being executed instant by instant.
#[derive(Debug)]
pub struct Execution<'p, P: ReactiveProgram> {
    program: &'p P,
    threads: Vec<P::Thread>,
    next_fresh: u32,
    instant: usize,
    fuel: u64,
    scheduler: Scheduler,
}

impl<'p, P: ReactiveProgram> Execution<'p, P> {
    pub fn new(program: &'p P, config: &RunConfig) -> Self {
        Execution {
            program,
            threads: program.initial_threads(),
            next_fresh: program.first_fresh(),
            instant: 0,
            fuel: config.fuel,
            scheduler: Scheduler::new(config.policy),
        }
    }

    /// Runs the next instant.
    pub fn react(&mut self, inputs: &BTreeSet<Signal>) -> Result<(TraceStep, u64), RuntimeError> {
        let (outputs, steps, env) = run_instant_with(
            &mut self.threads,
            self.program.definitions(),
            self.program.interface(),
            inputs,
            self.next_fresh,
            self.fuel,
            &mut self.scheduler,
            self.instant,
        )?;
        self.next_fresh = env.next_fresh();
        self.instant += 1;
        Ok((TraceStep { inputs: inputs.clone(), outputs }, steps))
    }

    pub fn residual(&self) -> &[P::Thread] {
        &self.threads
    }

    /// Residual threads up to renaming of non-interface names.
    pub fn canonical_residual(&self) -> Vec<P::Thread> {
        canonicalize(&self.threads, &self.program.interface().all())
    }

    pub fn instant(&self) -> usize {
        self.instant
    }
}

/// Runs `program` over the input sequence.
pub fn run_trace<P: ReactiveProgram>(
    program: &P,
    inputs: &[BTreeSet<Signal>],
    config: &RunConfig,
) -> Result<Trace, RuntimeError> {
    let mut exec = Execution::new(program, config);
    inputs.iter().map(|i| exec.react(i).map(|(step, _)| step)).collect()
}

/// All configurations reachable by one thread reduction.
pub fn successors<T: Reactive>(
    threads: &[T],
    env: &Environment,
    defs: &T::Defs,
) -> Result<Vec<(Vec<T>, Environment)>, RuntimeError> {
    let mut out = Vec::new();
    for k in 0..threads.len() {
        if threads[k].suspended(env)? {
            continue;
        }
        let mut next = threads.to_vec();
        let mut env2 = env.clone();
        if let Step::Moved { spawned, .. } = next[k].react(&mut env2, defs)? {
            if let Some(sp) = spawned {
                next.push(sp);
            }
            out.push((next, env2));
        }
    }
    Ok(out)
}

/// Key identifying a configuration up to renaming of non-interface names.
/// Signals that do not occur in the threads are irrelevant and dropped.
pub fn configuration_key<T: Reactive>(threads: &[T], env: &Environment, interface: &Interface) -> String {
    let keep = interface.all();
    let (canon, free) = canonicalize_with_renaming(threads, &keep);
    let mut entries: Vec<String> = env
        .domain()
        .filter_map(|(s, v)| {
            let name = if keep.contains(s) { s.clone() } else { free.get(s)?.clone() };
            Some(format!("{name}={}", u8::from(v)))
        })
        .collect();
    entries.sort();
    let body: Vec<String> = canon.iter().map(Rename::render).collect();
    format!("{} || {}", body.join(" | "), entries.join(","))
}
