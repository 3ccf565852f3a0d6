//! Runs the ABRO controller over a few instants and prints what it emits.

use std::collections::BTreeSet;

use sl::semantics::{fmt_set, Execution, RunConfig};
use sl::syntax::{parse_program, Signal};

const ABRO: &str = "
(input a b r)
(output o)
(def (Abro a b r o) (seq (watch r (seq (par (await a) (await b)) (emit o) (loop pause))) (call Abro a b r o)))
(run (call Abro a b r o))
";

fn main() {
    let p = parse_program(ABRO).unwrap();
    let mut exec = Execution::new(&p, &RunConfig::default());
    for names in [&["a"][..], &[], &["b"], &["r"], &["a", "b"]] {
        let inputs: BTreeSet<Signal> = names.iter().map(|n| Signal::named(n)).collect();
        let (step, reductions) = exec.react(&inputs).unwrap();
        println!("I={} O={} ({reductions} reductions)", fmt_set(&step.inputs), fmt_set(&step.outputs));
    }
}
