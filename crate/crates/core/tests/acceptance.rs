//! The acceptance criteria, one line each. Run with
//! `cargo test --test acceptance -- --nocapture` to see the report.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sl::analysis::{call_of, check_bounded, check_reactivity, check_reactivity_with, CallResult, Flag, Verdict};
use sl::cps::{cps_program, CpsError, CpsOptions};
use sl::encodings::{encode_counter_machine, parse_counter_machine, Outcome};
use sl::equiv::{
    bisim_check, confluence_check, parse_proc_program, program_to_proc, rename_calls, BisimResult, Dedupe, EquivOptions,
    Mode, Proc, ProcDefs, ProcSpace,
};
use sl::mealy::{mealy_to_program, mealy_trace_equiv, program_to_mealy, MealyEquiv, DEFAULT_STATE_LIMIT};
use sl::semantics::{Execution, RunConfig};
use sl::syntax::{canonical_key, FreshNames, Ident, Signal, SourceProgram};
use sl::tailcore::{check_tail_reactivity, parse_tail_program, Branch, TailExpr, TailProgram};

type Outcome1 = Result<String, String>;

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome1); 9] = [
        ("determinism", determinism),
        ("strong confluence", strong_confluence),
        ("reactivity analysis", reactivity_analysis),
        ("cps correctness", cps_correctness),
        ("bounded contexts", bounded_contexts),
        ("mealy round trip", mealy_round_trip),
        ("bisimulation", bisimulation),
        ("suspension collapse", suspension_collapse),
        ("undecidability witness", undecidability_witness),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {name} ({secs:.1}s): {detail}", k + 1),
            Err(detail) => {
                println!("FAIL {} {name} ({secs:.1}s): {detail}", k + 1);
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Per instant: outputs and the canonical residual.
fn observe(p: &SourceProgram, inputs: &[BTreeSet<Signal>], config: &RunConfig) -> Vec<(BTreeSet<Signal>, String)> {
    let keep = p.interface.all();
    let mut exec = Execution::new(p, config);
    inputs
        .iter()
        .map(|i| {
            let (step, _) = exec.react(i).unwrap();
            (step.outputs, canonical_key(exec.residual(), &keep))
        })
        .collect()
}

fn determinism() -> Outcome1 {
    let start = Instant::now();
    let corpus = source_corpus();
    check(corpus.len() >= 20, || format!("only {} programs", corpus.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut runs = 0;
    for (name, p) in &corpus {
        for _ in 0..5 {
            let inputs = random_inputs(&mut rng, &p.interface.inputs, 10);
            let reference = observe(p, &inputs, &RunConfig::default());
            for seed in 0..50 {
                let got = observe(p, &inputs, &RunConfig::random(seed));
                if let Some(k) = (0..got.len()).find(|&k| got[k] != reference[k]) {
                    return Err(format!("{name}, seed {seed}, instant {}: {:?} vs {:?}", k + 1, got[k], reference[k]));
                }
                runs += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{} programs x 5 input sequences x 50 seeds = {runs} runs agree", corpus.len()))
}

fn tail_of(p: &SourceProgram) -> TailProgram {
    cps_program(p, CpsOptions::default()).unwrap().program
}

fn strong_confluence() -> Outcome1 {
    let names =
        ["toggle", "tick", "chain", "broadcast", "present_loop", "now_await", "ping_pong", "nested_present", "reactivity_ab", "sequence"];
    let mut total = 0;
    for name in names {
        let (p, defs) = program_to_proc(&tail_of(&source(name)));
        let report = confluence_check(&p, &defs, usize::MAX, 5000).map_err(|e| format!("{name}: {e}"))?;
        check(report.complete, || format!("{name}: state space not exhausted"))?;
        check(report.violations.is_empty(), || format!("{name}: {:?}", report.violations[0]))?;
        total += report.states;
    }
    Ok(format!("{} programs, {total} states, no violations", names.len()))
}

fn reactivity_analysis() -> Outcome1 {
    let p = source("reactivity_ab");
    let (a, b) = (Ident::new("A"), Ident::new("B"));
    let ca = call_of(&p.defs[&a].body);
    let cb = call_of(&p.defs[&b].body);
    check(ca == CallResult::new([a.clone(), b.clone()], Flag::Open), || format!("Call(A body) = {ca}"))?;
    check(cb == CallResult::stopped(), || format!("Call(B body) = {cb}"))?;
    let v0 = check_reactivity_with(&p, 0);
    check(matches!(&v0, Verdict::Reject { cycle } if cycle == &vec![a.clone()]), || format!("depth 0: {v0}"))?;
    let v1 = check_reactivity_with(&p, 1);
    check(v1.is_accept(), || format!("depth 1: {v1}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut accepted = 0;
    let config = RunConfig::default().with_fuel(1_000_000);
    for (name, p) in source_corpus().into_iter().chain(reject_corpus()) {
        if !check_reactivity(&p).is_accept() {
            continue;
        }
        accepted += 1;
        let all = vec![p.interface.inputs.clone(); 100];
        for inputs in [random_inputs(&mut rng, &p.interface.inputs, 100), all] {
            let mut exec = Execution::new(&p, &config);
            for (k, i) in inputs.iter().enumerate() {
                exec.react(i).map_err(|e| format!("{name} accepted but instant {k}: {e}"))?;
            }
        }
    }
    Ok(format!("Call(A)={ca}, Call(B)={cb}; depth 0 {v0}; depth 1 accepts; {accepted} accepted programs ran 100 instants"))
}

/// Matches a generated tail term against a reference one up to renaming of
/// equation identifiers and bound names.
struct Matcher<'a> {
    ours: &'a TailProgram,
    theirs: &'a TailProgram,
    ids: HashMap<(Ident, Vec<Signal>), Ident>,
    supply: FreshNames,
}

impl Matcher<'_> {
    fn expr(&mut self, a: &TailExpr, b: &TailExpr, bound: &mut Vec<(Signal, Signal)>) -> bool {
        match (a, b) {
            (TailExpr::Nil, TailExpr::Nil) => true,
            (TailExpr::Emit(s, x), TailExpr::Emit(t, y)) => same(s, t, bound) && self.expr(x, y, bound),
            (TailExpr::New(s, x), TailExpr::New(t, y)) => {
                bound.push((s.clone(), t.clone()));
                let ok = self.expr(x, y, bound);
                bound.pop();
                ok
            }
            (TailExpr::Spawn(x1, x2), TailExpr::Spawn(y1, y2)) => self.expr(x1, y1, bound) && self.expr(x2, y2, bound),
            (TailExpr::Present(s, x, bx), TailExpr::Present(t, y, by)) => {
                same(s, t, bound) && self.expr(x, y, bound) && self.branch(bx, by, bound)
            }
            (TailExpr::Call(id, args), TailExpr::Call(jd, jargs)) if jargs.is_empty() => {
                let key = (id.clone(), args.clone());
                if let Some(known) = self.ids.get(&key) {
                    return known == jd;
                }
                if self.ids.values().any(|v| v == jd) {
                    return false;
                }
                self.ids.insert(key, jd.clone());
                let body = self.ours.defs[id].instantiate(args, &mut self.supply);
                let reference = self.theirs.defs[jd].body.clone();
                self.expr(&body, &reference, &mut Vec::new())
            }
            _ => false,
        }
    }

    fn branch(&mut self, a: &Branch, b: &Branch, bound: &mut Vec<(Signal, Signal)>) -> bool {
        match (a, b) {
            (Branch::Leaf(x), Branch::Leaf(y)) => self.expr(x, y, bound),
            (Branch::Ite(s, x1, x2), Branch::Ite(t, y1, y2)) => {
                same(s, t, bound) && self.branch(x1, y1, bound) && self.branch(x2, y2, bound)
            }
            _ => false,
        }
    }
}

fn same(s: &Signal, t: &Signal, bound: &[(Signal, Signal)]) -> bool {
    match bound.iter().rev().find(|(x, y)| x == s || y == t) {
        Some((x, y)) => x == s && y == t,
        None => s == t,
    }
}

/// The translation of `A` worked out by hand: `A = B`, `t1 = emit s4.A`,
/// `τ1 = (s1,t1)`, `B = present s2 t2 (ite s1 t1 B)` and
/// `t2 = emit s3.pause.ite s1 t1 B`, with `t1`, `τ1`, `t2` inlined.
const HAND_TRANSLATION: &str = "(input s1 s2)(output s3 s4)
(def (A) (call B))
(def (B) (present s2 (emit! s3 (new g (present g 0 (ite s1 (emit! s4 (call A)) (call B))))) (ite s1 (emit! s4 (call A)) (call B))))
(run (call A))";

fn cps_correctness() -> Outcome1 {
    let mut programs = 0;
    let mut explored = 0;
    for (name, p) in source_corpus() {
        if p.interface.inputs.len() > 2 {
            continue;
        }
        let t = tail_of(&p);
        let alphabet = subsets(&p.interface.inputs);
        explored += exhaustive_compare(
            (p.initial.clone(), &p.defs, p.next_fresh_index()),
            (t.initial.clone(), &t.defs, t.next_fresh_index()),
            &p.interface,
            &alphabet,
            8,
        )
        .map_err(|w| format!("{name}: traces differ on {w:?}"))?;
        programs += 1;
    }
    check(programs >= 20, || format!("only {programs} programs with at most 2 inputs"))?;

    let ours = tail_of(&source("reactivity_ab"));
    let theirs = parse_tail_program(HAND_TRANSLATION).unwrap();
    let mut m = Matcher { ours: &ours, theirs: &theirs, ids: HashMap::new(), supply: FreshNames::starting_at(1000) };
    let ok = m.expr(&ours.initial[0], &theirs.initial[0], &mut Vec::new());
    check(ok && m.ids.len() == 2 && ours.defs.len() == 2, || format!("translation of A does not match: {ours:?}"))?;
    Ok(format!(
        "{programs} programs agree with their CPS image on all 4^8 sequences ({explored} instants after sharing); A^(0,e) and B^(t1,t1) reproduced"
    ))
}

fn bounded_contexts() -> Outcome1 {
    let guarded = sl::syntax::parse_program("(input s)(def (A s) (watch s (seq pause (thread (call A s)))))(run (call A s))").unwrap();
    for (name, p) in [("thread-guarded", guarded), ("loop", source("tick")), ("nested loops", source("loop_in_watch"))] {
        let v = check_bounded(&p);
        check(v.is_accept(), || format!("{name}: {v}"))?;
    }
    for name in ["pause_call_call", "watch_recursion"] {
        let p = source(name);
        let v = check_bounded(&p);
        check(!v.is_accept(), || format!("{name} accepted"))?;
        let r = cps_program(&p, CpsOptions { limit: 500, ..CpsOptions::default() });
        check(matches!(r, Err(CpsError::IndexExplosion(_))), || format!("{name}: CPS table unexpectedly finite"))?;
    }
    let mut accepted = 0;
    for (name, p) in source_corpus() {
        if check_bounded(&p).is_accept() {
            cps_program(&p, CpsOptions::default()).map_err(|e| format!("{name}: {e}"))?;
            accepted += 1;
        }
    }
    Ok(format!("guarded example and both loop programs accepted; both unbounded examples rejected; {accepted} accepted corpus programs give finite tables"))
}

/// Monotone machine: each output set is the union of random contributions
/// of the subsets of the input.
fn mealy_round_trip() -> Outcome1 {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut machines = 0;
    for n in 0..=2 {
        for m in 1..=2 {
            for q in 1..=3 {
                for _ in 0..2 {
                    let machine = random_mealy(&mut rng, n, m, q);
                    machine.validate().map_err(|e| e.to_string())?;
                    let program = mealy_to_program(&machine);
                    let back = program_to_mealy(&program, DEFAULT_STATE_LIMIT).map_err(|e| e.to_string())?;
                    let eq = mealy_trace_equiv(&machine, &back).map_err(|e| e.to_string())?;
                    check(eq == MealyEquiv::Equivalent, || format!("round trip of ({n},{m},{q}) differs: {eq:?}"))?;
                    for _ in 0..5 {
                        let word: Vec<u32> = (0..6).map(|_| rng.gen_range(0..1u32 << n)).collect();
                        check(interpret(&program, &word) == machine.run(&word), || "compiled program disagrees with the machine".into())?;
                    }
                    machines += 1;
                }
            }
        }
    }
    for k in 0..100 {
        let p = random_normal_program(&mut rng, 2, 2, 3);
        let machine = program_to_mealy(&p, DEFAULT_STATE_LIMIT).map_err(|e| format!("program {k}: {e}"))?;
        for _ in 0..10 {
            let word: Vec<u32> = (0..6).map(|_| rng.gen_range(0..4)).collect();
            let (a, b) = (machine.run(&word), interpret(&p, &word));
            check(a == b, || format!("program {k} on {word:?}: extracted {a:?}, interpreter {b:?}"))?;
        }
    }
    Ok(format!("{machines} machines survive the round trip; 100 random normal programs agree with the interpreter"))
}

/// Every state reachable by labelled steps and end-of-instant rewrites.
fn explore(space: &mut ProcSpace<'_>, root: usize) -> Result<BTreeSet<usize>, String> {
    let mut seen = BTreeSet::from([root]);
    let mut todo = vec![root];
    while let Some(k) = todo.pop() {
        let mut next: Vec<usize> = space.steps(k).map_err(|e| e.to_string())?.into_iter().map(|(_, t)| t).collect();
        if space.is_suspended(k) {
            next.push(space.eoi(k).map_err(|e| e.to_string())?);
        }
        for t in next {
            if seen.insert(t) {
                todo.push(t);
            }
        }
    }
    Ok(seen)
}

fn state_count(p: &Proc, defs: &ProcDefs) -> usize {
    let mut space = ProcSpace::new(&[p], defs, Dedupe::Emits, 500).unwrap();
    let root = space.intern_proc(p).unwrap();
    explore(&mut space, root).unwrap().len()
}

fn is_finite(p: &Proc, defs: &ProcDefs) -> bool {
    let Ok(mut space) = ProcSpace::new(&[p], defs, Dedupe::Emits, 500) else { return false };
    space.intern_proc(p).is_ok_and(|root| explore(&mut space, root).is_ok())
}

/// Finite programs for the equivalence checks: CPS images of corpus
/// programs, the compiled form of their extracted machines (interface
/// signals mapped back) and the hand-written processes. Programs with an
/// infinite state space or signal generation under recursion are left out.
fn finite_corpus() -> Vec<(String, Proc, ProcDefs)> {
    let mut candidates = Vec::new();
    for (name, p) in source_corpus() {
        if p.interface.inputs.len() > 2 {
            continue;
        }
        let t = tail_of(&p);
        let (a, da) = program_to_proc(&t);
        candidates.push((name.clone(), a, da));
        if let Ok(machine) = program_to_mealy(&t, 200) {
            let (b, db) = program_to_proc(&rename_interface(&mealy_to_program(&machine), &t));
            candidates.push((format!("{name}/mealy"), b, db));
        }
    }
    for (name, text) in proc_files() {
        let (p, defs) = parse_proc_program(&text).unwrap();
        candidates.push((name, p, defs));
    }
    candidates
        .into_iter()
        .filter(|(_, p, defs)| {
            is_finite(p, defs) && bisim_check(p, p, defs, Mode::Exact, &EquivOptions::default()).is_ok()
        })
        .collect()
}

fn rename_interface(compiled: &TailProgram, original: &TailProgram) -> TailProgram {
    let mut map = HashMap::new();
    for (k, s) in original.interface.inputs.iter().enumerate() {
        map.insert(sig(&format!("i{}", k + 1)), s.clone());
    }
    for (k, s) in original.interface.outputs.iter().enumerate() {
        map.insert(sig(&format!("o{}", k + 1)), s.clone());
    }
    let mut supply = FreshNames::starting_at(compiled.next_fresh_index());
    let mut p = compiled.clone();
    p.interface = original.interface.clone();
    for d in p.defs.values_mut() {
        d.body = d.body.substitute(&map, &mut supply);
    }
    p.initial = p.initial.iter().map(|t| t.substitute(&map, &mut supply)).collect();
    p
}

fn joint(a: &(String, Proc, ProcDefs), b: &(String, Proc, ProcDefs)) -> (Proc, Proc, ProcDefs) {
    let (p, mut defs) = rename_calls(&a.1, &a.2, "l_");
    let (q, right) = rename_calls(&b.1, &b.2, "r_");
    defs.extend(right);
    (p, q, defs)
}

fn verdict(r: &BisimResult) -> &'static str {
    match r {
        BisimResult::Equivalent => "equivalent",
        BisimResult::Distinguished(_) => "distinguished",
        BisimResult::Inconclusive(_) => "inconclusive",
    }
}

fn bisimulation() -> Outcome1 {
    let opts = EquivOptions::default();
    let read = |name: &str| {
        let text = proc_files().into_iter().find(|(n, _)| n == name).unwrap().1;
        parse_proc_program(&text).unwrap()
    };
    let (p, _) = read("remark_left");
    let (q, _) = read("remark_right");
    let defs = ProcDefs::new();
    let r = bisim_check(&p, &q, &defs, Mode::Exact, &opts).map_err(|e| e.to_string())?;
    let BisimResult::Distinguished(w) = &r else { return Err(format!("remark pair: {r:?}")) };
    let (s2, s3) = (sig("s2"), sig("s3"));
    check(w.steps.first().is_some_and(|s| s.inputs == vec![s2.clone()]), || format!("witness does not start with s2: {w}"))?;
    let reveals = w.steps.iter().skip(1).any(|s| {
        s.left.as_ref().is_some_and(|o| o.contains(&s3)) && !s.right.as_ref().is_some_and(|o| o.contains(&s3))
    });
    check(reveals, || format!("witness does not reveal s3: {w}"))?;

    let corpus = finite_corpus();
    check(corpus.len() >= 30, || format!("only {} finite programs", corpus.len()))?;

    // Laws: P|0 = P, commutativity, associativity, scope extrusion. Every
    // program is combined with the two smallest ones, since the state space
    // of a parallel composition is roughly a product.
    let mut by_size: Vec<(usize, usize)> = corpus.iter().enumerate().map(|(k, (_, p, d))| (state_count(p, d), k)).collect();
    by_size.sort();
    let law_opts = EquivOptions { limit: 50_000, ..opts };
    let mut laws = 0;
    for k in 0..corpus.len() {
        let a = &corpus[k];
        let b = &corpus[by_size[0].1];
        let c = &corpus[by_size[1].1];
        let (p1, p2, mut defs) = joint(a, b);
        let (p3, more) = rename_calls(&c.1, &c.2, "t_");
        defs.extend(more);
        let fresh = Signal::named("extruded");
        let instances = [
            (Proc::par(p1.clone(), Proc::Nil), p1.clone()),
            (Proc::par(p1.clone(), p2.clone()), Proc::par(p2.clone(), p1.clone())),
            (Proc::par(Proc::par(p1.clone(), p2.clone()), p3.clone()), Proc::par(p1.clone(), Proc::par(p2.clone(), p3.clone()))),
            (
                Proc::par(Proc::nu(&fresh, Proc::par(p1.clone(), Proc::emit(&fresh))), p2.clone()),
                Proc::nu(&fresh, Proc::par(Proc::par(p1.clone(), Proc::emit(&fresh)), p2.clone())),
            ),
        ];
        for (x, y) in instances {
            let r = bisim_check(&x, &y, &defs, Mode::Exact, &law_opts).map_err(|e| format!("law on {}: {e}", a.0))?;
            check(r == BisimResult::Equivalent, || format!("law instance on {}, {}, {}: {r:?}", a.0, b.0, c.0))?;
            laws += 1;
        }
    }

    let mut pairs = 0;
    let mut equivalent = 0;
    for i in 0..corpus.len() {
        for j in i..corpus.len() {
            let (p, q, defs) = joint(&corpus[i], &corpus[j]);
            let exact = bisim_check(&p, &q, &defs, Mode::Exact, &opts).map_err(|e| format!("{} vs {}: {e}", corpus[i].0, corpus[j].0))?;
            let trace = bisim_check(&p, &q, &defs, Mode::Trace, &opts).map_err(|e| format!("{} vs {}: {e}", corpus[i].0, corpus[j].0))?;
            check(verdict(&exact) == verdict(&trace), || {
                format!("{} vs {}: exact {} but trace {}", corpus[i].0, corpus[j].0, verdict(&exact), verdict(&trace))
            })?;
            pairs += 1;
            equivalent += usize::from(exact == BisimResult::Equivalent);
        }
    }
    Ok(format!(
        "remark pair distinguished after I={{s2}}; {laws} law instances equivalent; exact = trace on {pairs} pairs of {} programs ({equivalent} equivalent)",
        corpus.len()
    ))
}

fn suspension_collapse() -> Outcome1 {
    let mut states = 0;
    let corpus = finite_corpus();
    let programs = corpus.len();
    for (name, p, defs) in corpus {
        let mut space = ProcSpace::new(&[&p], &defs, Dedupe::Emits, 5000).map_err(|e| format!("{name}: {e}"))?;
        let root = space.intern_proc(&p).map_err(|e| format!("{name}: {e}"))?;
        let seen = explore(&mut space, root).map_err(|e| format!("{name}: {e}"))?;
        for &k in &seen {
            let weak = space.weak_suspension(k).map_err(|e| format!("{name}: {e}"))?.is_some();
            let labelled = space.labelled_suspension(k).map_err(|e| format!("{name}: {e}"))?.is_some();
            check(weak == labelled, || format!("{name}: state {k} has weak {weak} but labelled {labelled}"))?;
        }
        states += seen.len();
    }
    Ok(format!("weak and labelled suspension agree on all {states} states of {programs} programs"))
}

/// First instant (1-based) at which `halt` is emitted.
fn halts_within<P: sl::semantics::ReactiveProgram>(p: &P, limit: usize) -> Option<usize> {
    let mut exec = Execution::new(p, &RunConfig::default());
    let halt = sig("halt");
    (1..=limit).find(|_| exec.react(&BTreeSet::new()).unwrap().0.outputs.contains(&halt))
}

fn undecidability_witness() -> Outcome1 {
    let halting = parse_counter_machine(&machine_file("halting5.cm")).unwrap();
    let looping = parse_counter_machine(&machine_file("looping.cm")).unwrap();
    check(halting.instrs.len() == 5, || "halting machine should have 5 instructions".into())?;
    let Outcome::Halted { steps, .. } = halting.run(1000) else { return Err("oracle: machine does not halt".into()) };
    check(looping.run(1000) == Outcome::Running { steps: 1000 }, || "oracle: looping machine halts".into())?;

    let mut details = Vec::new();
    for (machine, halts) in [(&halting, true), (&looping, false)] {
        let p = encode_counter_machine(machine, "halt").map_err(|e| e.to_string())?;
        check(check_reactivity(&p).is_accept(), || "encoding rejected by the reactivity analysis".into())?;
        check(check_bounded(&p).is_accept(), || "encoding rejected by the bounded-context analysis".into())?;
        let t = tail_of(&p);
        check(check_tail_reactivity(&t).is_accept(), || "CPS image rejected by the reactivity analysis".into())?;
        let (source_at, tail_at) = (halts_within(&p, 200), halts_within(&t, 200));
        check(source_at == tail_at, || format!("source halts at {source_at:?} but CPS image at {tail_at:?}"))?;
        check(source_at.is_some() == halts, || format!("halt signal at {source_at:?}"))?;
        details.push(match source_at {
            Some(k) => format!("halting machine ({steps} steps) emits halt at instant {k}"),
            None => "looping machine silent for 200 instants".to_string(),
        });
    }
    Ok(format!("{}; both pass the analyses before and after CPS", details.join("; ")))
}

