//! Encodes a counter machine as a program and runs it until the halt
//! signal appears.

use std::collections::BTreeSet;

use sl::encodings::{encode_counter_machine, parse_counter_machine, Outcome};
use sl::semantics::{Execution, RunConfig};
use sl::syntax::Signal;

const MACHINE: &str = "
init a
halt h
state a: inc c1 -> b
state b: inc c1 -> c
state c: dec c1 -> d
state d: zero c1 -> h else c
";

fn main() {
    let m = parse_counter_machine(MACHINE).unwrap();
    let Outcome::Halted { steps, .. } = m.run(100) else { panic!("machine should halt") };
    println!("machine halts after {steps} steps");
    let p = encode_counter_machine(&m, "halt").unwrap();
    let mut exec = Execution::new(&p, &RunConfig::default());
    let halt = Signal::named("halt");
    for instant in 1..=200 {
        if exec.react(&BTreeSet::new()).unwrap().0.outputs.contains(&halt) {
            println!("encoding emits halt at instant {instant}");
            return;
        }
    }
    println!("no halt within 200 instants");
}
