//! Encodings of deterministic counter machines and one-symbol pushdown
//! automata as programs with signal generation. Each counter is a chain of
//! cells `S ... S Z` linked by vectors of five signals
//! `(dec, inc, zero, ack, abort)`; the control talks to the leftmost cell.

mod machine;

use std::fmt::Write;

use crate::syntax::{parse_program, ProgramError, SourceProgram};

pub use machine::{parse_counter_machine, parse_pushdown, print_counter_machine, CounterMachine, Instr, MachineError, Outcome, Pushdown, StackOp};

/// Link vector `k` of counter `c`: five signal names.
fn link(prefix: &str) -> [String; 5] {
    ["dec", "inc", "zero", "ack", "abort"].map(|f| format!("{f}{prefix}"))
}

fn new_all(names: &[String], body: &str) -> String {
    names.iter().rev().fold(body.to_string(), |acc, s| format!("(new {s} {acc})"))
}

/// Next instant: `then` if `s` is present now (started in this instant),
/// `otherwise` if it is absent. No thread is left behind.
fn choose(s: &str, then: &str, otherwise: &str) -> String {
    format!("(seq (thread (now (seq (await {s}) (thread {then})))) (watch {s} (seq pause (thread {otherwise}))))")
}

/// Equations for the cells, shared by every counter.
fn cell_equations(out: &mut String) {
    let v = link("").join(" ");
    let [d, i, z, a, b] = link("");
    let w = link("r");
    let wj = w.join(" ");
    let [dr, _, zr, ar, br] = w.clone();
    let fresh = link("n");
    let fj = fresh.join(" ");
    // Z: bottom of the stack. Emits zero in every instant; an increment is
    // acknowledged at once and a cell is inserted in the next instant.
    let grow = new_all(&fresh, &format!("(seq (thread (call S {v} {fj})) (call Z {fj}))"));
    writeln!(
        out,
        "(def (Z {v}) (seq (emit {z}) (thread (now (seq (await {i}) (thread (seq (emit {a}) pause {grow}))))) (watch {b} (watch {i} (seq pause (thread (call Z {v})))))))"
    )
    .unwrap();
    // S: waits for an increment or a decrement from the left.
    writeln!(
        out,
        "(def (S {v} {wj}) (seq (thread (watch {d} (seq (await {i}) pause (thread (call Sp {v} {wj}))))) (thread (watch {i} (seq (await {d}) pause (thread (call Sr {v} {wj})))))))"
    )
    .unwrap();
    // Sp: splits into two cells and acknowledges.
    writeln!(out, "(def (Sp {v} {wj}) {})", new_all(&fresh, &format!("(seq (emit {a}) (thread (call S {v} {fj})) (call S {fj} {wj}))")))
        .unwrap();
    // Sr: the decrement wave moving right. Next to Z it aborts Z and turns
    // into Z; otherwise it forwards the decrement.
    let absorb = format!("(seq (emit {br}) pause (emit {a}) (call Z {v}))");
    let forward = format!("(seq (emit {dr}) (call Sl {v} {wj}))");
    writeln!(out, "(def (Sr {v} {wj}) {})", choose(&zr, &absorb, &forward)).unwrap();
    // Sl: the acknowledgement wave moving left.
    writeln!(out, "(def (Sl {v} {wj}) (seq (await {ar}) pause (emit {a}) (call S {v} {wj})))").unwrap();
}

fn state_ident(q: &str) -> String {
    format!("Q_{q}")
}

/// Builds the program: one control equation per state over the leftmost
/// link of every counter, and one `Z` per counter. `halt_signal` is emitted
/// when the control reaches the halting state.
pub fn encode_counter_machine(m: &CounterMachine, halt_signal: &str) -> Result<SourceProgram, ProgramError> {
    let counters = m.counters();
    let links: Vec<[String; 5]> = (1..=counters).map(|c| link(&c.to_string())).collect();
    let all: Vec<String> = links.iter().flatten().cloned().collect();
    let args = all.join(" ");
    let mut out = String::new();
    writeln!(out, "(input)\n(output {halt_signal})").unwrap();
    cell_equations(&mut out);
    for q in m.states() {
        let body = if q == m.halt {
            format!("(emit {halt_signal})")
        } else {
            let next = |q: &str| format!("(call {} {args})", state_ident(q));
            match &m.instrs[&q] {
                Instr::Inc(c, q2) => format!("(seq (emit {}) (await {}) pause {})", links[c - 1][1], links[c - 1][3], next(q2)),
                Instr::Dec(c, q2) => format!("(seq (emit {}) (await {}) pause {})", links[c - 1][0], links[c - 1][3], next(q2)),
                Instr::TestZero(c, qz, qnz) => choose(&links[c - 1][2], &format!("(seq pause {})", next(qz)), &next(qnz)),
            }
        };
        writeln!(out, "(def ({} {args}) {body})", state_ident(&q)).unwrap();
    }
    let bottoms: Vec<String> = links.iter().map(|l| format!("(thread (call Z {}))", l.join(" "))).collect();
    let run = format!("(seq {} (call {} {args}))", bottoms.join(" "), state_ident(&m.init));
    writeln!(out, "(run {})", new_all(&all, &run)).unwrap();
    parse_program(&out)
}

/// A pushdown automaton over one stack symbol is a one-counter machine.
pub fn encode_pushdown(p: &Pushdown, halt_signal: &str) -> Result<SourceProgram, ProgramError> {
    encode_counter_machine(&p.to_counter_machine(), halt_signal)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::analysis::{check_bounded, check_reactivity};
    use crate::cps::{cps_program, CpsOptions};
    use crate::tailcore::check_tail_reactivity;
    use crate::semantics::{Execution, RunConfig};
    use crate::syntax::Signal;

    /// Instant at which `halt` is first emitted, if within `limit`.
    fn halts_at(p: &SourceProgram, limit: usize) -> Option<usize> {
        let mut exec = Execution::new(p, &RunConfig::default());
        let halt = Signal::named("halt");
        (0..limit).find(|_| exec.react(&BTreeSet::new()).unwrap().0.outputs.contains(&halt))
    }

    fn machine(text: &str) -> CounterMachine {
        parse_counter_machine(text).unwrap()
    }

    #[test]
    fn increment_then_test() {
        let m = machine("init a\nhalt h\nstate a: inc c1 -> b\nstate b: zero c1 -> a else h");
        let p = encode_counter_machine(&m, "halt").unwrap();
        assert!(halts_at(&p, 100).is_some());
    }

    #[test]
    fn counts_up_and_down() {
        let m = machine(
            "init a\nhalt h\nstate a: inc c1 -> b\nstate b: inc c1 -> c\nstate c: inc c1 -> d\n\
             state d: dec c1 -> e\nstate e: zero c1 -> h else d\n",
        );
        let steps = match m.run(1000) {
            Outcome::Halted { steps, .. } => steps,
            o => panic!("{o:?}"),
        };
        let p = encode_counter_machine(&m, "halt").unwrap();
        let at = halts_at(&p, 400).expect("encoding should halt");
        assert!(at <= 10 * steps, "{at} instants for {steps} steps");
    }

    #[test]
    fn wrong_zero_branch_never_halts() {
        // Counter is nonzero, so the machine loops forever.
        let m = machine("init a\nhalt h\nstate a: inc c2 -> b\nstate b: zero c2 -> h else b");
        assert_eq!(m.run(500), Outcome::Running { steps: 500 });
        let p = encode_counter_machine(&m, "halt").unwrap();
        assert_eq!(halts_at(&p, 200), None);
    }

    #[test]
    fn two_counters_transfer() {
        let m = machine(
            "init a\nhalt h\nstate a: inc c1 -> b\nstate b: inc c1 -> t\n\
             state t: zero c1 -> h2 else m\nstate m: dec c1 -> n\nstate n: inc c2 -> t\n\
             state h2: zero c2 -> h else x\nstate x: dec c2 -> h2\n",
        );
        let Outcome::Halted { steps, .. } = m.run(1000) else { panic!() };
        let p = encode_counter_machine(&m, "halt").unwrap();
        let at = halts_at(&p, 1000).expect("encoding should halt");
        assert!(at <= 10 * steps, "{at} instants for {steps} steps");
    }

    #[test]
    fn pop_of_empty_stack_blocks() {
        let pd = parse_pushdown("init a\nhalt h\nstate a: pop -> h").unwrap();
        let p = encode_pushdown(&pd, "halt").unwrap();
        assert_eq!(halts_at(&p, 100), None);
        let pd = parse_pushdown("init a\nhalt h\nstate a: push -> b\nstate b: pop -> c\nstate c: empty -> h else a").unwrap();
        assert!(halts_at(&encode_pushdown(&pd, "halt").unwrap(), 100).is_some());
    }

    #[test]
    fn encodings_are_reactive_and_bounded() {
        let m = machine("init a\nhalt h\nstate a: inc c1 -> b\nstate b: dec c2 -> c\nstate c: zero c1 -> h else a");
        let p = encode_counter_machine(&m, "halt").unwrap();
        assert!(check_reactivity(&p).is_accept());
        assert!(check_bounded(&p).is_accept(), "{:?}", check_bounded(&p));
        let out = cps_program(&p, CpsOptions::default()).unwrap();
        assert!(check_tail_reactivity(&out.program).is_accept());
    }
}
