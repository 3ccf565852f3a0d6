//! Translates a program with watch and await into the tail-recursive core
//! and checks that both agree on a few inputs.

use std::collections::BTreeSet;

use sl::cps::{cps_program, CpsOptions};
use sl::semantics::{fmt_set, Execution, RunConfig};
use sl::syntax::{parse_program, Signal};
use sl::tailcore::print_tail_program;

const SOURCE: &str = "
(input s1 s2)
(output s3 s4)
(def (A s1 s2 s3 s4) (seq (watch s1 (call B s2 s3)) (emit s4) (call A s1 s2 s3 s4)))
(def (B s2 s3) (seq (await s2) (emit s3) pause (call B s2 s3)))
(run (call A s1 s2 s3 s4))
";

fn main() {
    let p = parse_program(SOURCE).unwrap();
    let out = cps_program(&p, CpsOptions::default()).unwrap();
    println!("{}", out.to_text().unwrap());

    let t = &out.program;
    print!("{}", print_tail_program(t).unwrap());
    let mut source = Execution::new(&p, &RunConfig::default());
    let mut tail = Execution::new(t, &RunConfig::default());
    for names in [&["s2"][..], &[], &["s1"], &["s2"], &["s1", "s2"]] {
        let inputs: BTreeSet<Signal> = names.iter().map(|n| Signal::named(n)).collect();
        let a = source.react(&inputs).unwrap().0.outputs;
        let b = tail.react(&inputs).unwrap().0.outputs;
        println!("I={} source O={} tail O={}", fmt_set(&inputs), fmt_set(&a), fmt_set(&b));
        assert_eq!(a, b);
    }
}
