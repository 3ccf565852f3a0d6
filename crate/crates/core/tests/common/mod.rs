//! Corpus loading and random program generators shared by the test targets.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use proptest::prelude::*;
use rand::Rng;
use sl::mealy::MonotonicMealy;
use sl::semantics::{run_instant, Execution, Reactive, RunConfig};
use sl::syntax::{canonical_key, parse_program, Ident, Interface, Signal, SourceProgram, Thread};
use sl::tailcore::{Branch, TailDef, TailExpr, TailProgram};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn files(sub: &str, ext: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(corpus_dir().join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

/// Reactive, bounded source programs.
pub fn source_corpus() -> Vec<(String, SourceProgram)> {
    files("source", "sl").into_iter().map(|(n, t)| (n.clone(), parse_program(&t).unwrap_or_else(|e| panic!("{n}: {e}")))).collect()
}

pub fn reject_corpus() -> Vec<(String, SourceProgram)> {
    files("reject", "sl").into_iter().map(|(n, t)| (n, parse_program(&t).unwrap())).collect()
}

pub fn source(name: &str) -> SourceProgram {
    source_corpus().into_iter().chain(reject_corpus()).find(|(n, _)| n == name).unwrap().1
}

pub fn proc_files() -> Vec<(String, String)> {
    files("proc", "proc")
}

pub fn machine_file(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join("machines").join(name)).unwrap()
}

pub fn sig(name: &str) -> Signal {
    Signal::named(name)
}

pub fn set(names: &[&str]) -> BTreeSet<Signal> {
    names.iter().map(|n| sig(n)).collect()
}

/// Every subset of `signals`.
pub fn subsets(signals: &BTreeSet<Signal>) -> Vec<BTreeSet<Signal>> {
    let v: Vec<&Signal> = signals.iter().collect();
    (0..1u32 << v.len()).map(|m| (0..v.len()).filter(|k| m & (1 << k) != 0).map(|k| v[k].clone()).collect()).collect()
}

pub fn random_inputs(rng: &mut impl Rng, inputs: &BTreeSet<Signal>, len: usize) -> Vec<BTreeSet<Signal>> {
    (0..len).map(|_| inputs.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()).collect()
}

/// Runs two programs side by side on every input sequence of length
/// `depth` over `alphabet`. Pairs of configurations already explored with
/// at least as many remaining instants are skipped. Returns the first
/// sequence on which the outputs differ.
pub fn exhaustive_compare<A: Reactive + Clone, B: Reactive + Clone>(
    a: (Vec<A>, &A::Defs, u32),
    b: (Vec<B>, &B::Defs, u32),
    interface: &Interface,
    alphabet: &[BTreeSet<Signal>],
    depth: usize,
) -> Result<usize, Vec<BTreeSet<Signal>>> {
    let keep = interface.all();
    let config = RunConfig::default();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    let mut explored = 0;
    let mut path = Vec::new();
    let mut stack = vec![(a.0, a.2, b.0, b.2, 0usize, None::<BTreeSet<Signal>>)];
    while let Some((ta, fa, tb, fb, level, input)) = stack.pop() {
        path.truncate(level);
        if let Some(i) = input {
            path.push(i);
        }
        let remaining = depth - level;
        if remaining == 0 {
            continue;
        }
        let key = (canonical_key(&ta, &keep), canonical_key(&tb, &keep));
        if seen.get(&key).is_some_and(|&r| r >= remaining) {
            continue;
        }
        seen.insert(key, remaining);
        for inputs in alphabet {
            explored += 1;
            let ra = run_instant(ta.clone(), a.1, interface, inputs, fa, &config).unwrap();
            let rb = run_instant(tb.clone(), b.1, interface, inputs, fb, &config).unwrap();
            if ra.outputs != rb.outputs {
                let mut p = path.clone();
                p.push(inputs.clone());
                return Err(p);
            }
            stack.push((ra.residual, ra.env.next_fresh(), rb.residual, rb.env.next_fresh(), level + 1, Some(inputs.clone())));
        }
    }
    Ok(explored)
}

/// Random `ν`-free tail program over inputs `i1..in` and outputs `o1..om`.
/// Calls made in the current instant only go to lower-numbered equations,
/// so every instant terminates.
pub fn random_normal_program(rng: &mut impl Rng, n: usize, m: usize, defs: usize) -> TailProgram {
    let inputs: Vec<Signal> = (1..=n).map(|k| sig(&format!("i{k}"))).collect();
    let outputs: Vec<Signal> = (1..=m).map(|k| sig(&format!("o{k}"))).collect();
    let all: Vec<Signal> = inputs.iter().chain(&outputs).cloned().collect();
    let id = |k: usize| Ident::new(&format!("N{k}"));
    let mut table = sl::tailcore::TailDefs::new();
    for k in 0..defs {
        let body = random_tail(rng, k, defs, &all, &outputs, 3);
        table.insert(id(k), TailDef { id: id(k), params: vec![], body });
    }
    let mut initial = vec![TailExpr::Call(id(defs - 1), vec![])];
    if rng.gen_bool(0.3) {
        initial.push(TailExpr::Call(id(rng.gen_range(0..defs)), vec![]));
    }
    TailProgram { interface: Interface::new(inputs, outputs), defs: table, initial }
}

fn random_tail(rng: &mut impl Rng, k: usize, defs: usize, all: &[Signal], outs: &[Signal], depth: usize) -> TailExpr {
    let choice = if depth == 0 { rng.gen_range(0..2) } else { rng.gen_range(0..6) };
    match choice {
        0 => TailExpr::Nil,
        1 if k > 0 => TailExpr::Call(Ident::new(&format!("N{}", rng.gen_range(0..k))), vec![]),
        1 => TailExpr::Nil,
        2 => TailExpr::Emit(outs.choose(rng).unwrap().clone(), Box::new(random_tail(rng, k, defs, all, outs, depth - 1))),
        3 => TailExpr::Spawn(
            Box::new(random_tail(rng, k, defs, all, outs, depth - 1)),
            Box::new(random_tail(rng, k, defs, all, outs, depth - 1)),
        ),
        _ => TailExpr::Present(
            all.choose(rng).unwrap().clone(),
            Box::new(random_tail(rng, k, defs, all, outs, depth - 1)),
            Box::new(random_branch(rng, k, defs, all, outs, depth - 1)),
        ),
    }
}

fn random_branch(rng: &mut impl Rng, k: usize, defs: usize, all: &[Signal], outs: &[Signal], depth: usize) -> Branch {
    match rng.gen_range(0..4) {
        0 if depth > 0 => Branch::Ite(
            all.choose(rng).unwrap().clone(),
            Box::new(random_branch(rng, k, defs, all, outs, depth - 1)),
            Box::new(random_branch(rng, k, defs, all, outs, depth - 1)),
        ),
        1 | 2 => Branch::Leaf(TailExpr::Call(Ident::new(&format!("N{}", rng.gen_range(0..defs))), vec![])),
        _ => Branch::Leaf(random_tail(rng, k, defs, all, outs, depth.min(1))),
    }
}

pub fn random_mealy(rng: &mut impl Rng, n: usize, m: usize, states: usize) -> MonotonicMealy {
    let size = 1usize << n;
    let mut next = Vec::new();
    let mut output = Vec::new();
    for _ in 0..states {
        next.push((0..size).map(|_| rng.gen_range(0..states)).collect());
        let base: Vec<u32> = (0..size).map(|_| if rng.gen_bool(0.3) { rng.gen_range(0..1u32 << m) } else { 0 }).collect();
        output.push((0..size).map(|x| (0..size).filter(|y| y & !x == 0).fold(0, |o, y| o | base[y])).collect());
    }
    MonotonicMealy { n, m, states: (0..states).map(|k| format!("q{k}")).collect(), init: 0, next, output }
}

pub fn mask_of(set: &BTreeSet<Signal>, order: &[Signal]) -> u32 {
    order.iter().enumerate().filter(|(_, s)| set.contains(*s)).fold(0, |m, (k, _)| m | (1 << k))
}

pub fn set_of(mask: u32, order: &[Signal]) -> BTreeSet<Signal> {
    order.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, s)| s.clone()).collect()
}

/// Output masks of a tail program run by the interpreter.
pub fn interpret(p: &TailProgram, word: &[u32]) -> Vec<u32> {
    let ins: Vec<Signal> = p.interface.inputs.iter().cloned().collect();
    let outs: Vec<Signal> = p.interface.outputs.iter().cloned().collect();
    let mut exec = Execution::new(p, &RunConfig::default());
    word.iter().map(|&x| mask_of(&exec.react(&set_of(x, &ins)).unwrap().0.outputs, &outs)).collect()
}

/// Call-free source threads over inputs `a b`, outputs `x y` and a local
/// name `n`, which [`arb_program`] binds. Such threads are always reactive and bounded.
pub fn arb_thread() -> impl Strategy<Value = Thread> {
    let names = || prop_oneof![Just(sig("a")), Just(sig("b")), Just(sig("x")), Just(sig("y")), Just(sig("n"))];
    let leaf = prop_oneof![
        Just(Thread::Nil),
        Just(Thread::Pause),
        prop_oneof![Just(sig("x")), Just(sig("y")), Just(sig("n"))].prop_map(|s| Thread::emit(&s)),
        names().prop_map(|s| Thread::await_(&s)),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Thread::seq(a, b)),
            inner.clone().prop_map(|t| Thread::new_signal(&sig("n"), t)),
            inner.clone().prop_map(Thread::spawn),
            (names(), inner).prop_map(|(s, t)| Thread::watch(&s, t)),
        ]
    })
}

pub fn arb_program() -> impl Strategy<Value = SourceProgram> {
    proptest::collection::vec(arb_thread(), 1..3).prop_map(|threads| SourceProgram {
        interface: Interface::new([sig("a"), sig("b")], [sig("x"), sig("y")]),
        defs: Default::default(),
        initial: threads.into_iter().map(|t| Thread::new_signal(&sig("n"), t)).collect(),
    })
}
