//! Checks the one-step diamond property on the transition system of a
//! compiled program.

use sl::cps::{cps_program, CpsOptions};
use sl::equiv::{confluence_check, program_to_proc};
use sl::syntax::parse_program;

const BROADCAST: &str = "
(input go)
(output a b)
(def (L go a) (seq (await go) (emit a) pause (call L go a)))
(def (R go b) (seq (await go) (emit b) pause (call R go b)))
(run (call L go a) (call R go b))
";

fn main() {
    let p = parse_program(BROADCAST).unwrap();
    let tail = cps_program(&p, CpsOptions::default()).unwrap().program;
    let (proc, defs) = program_to_proc(&tail);
    let report = confluence_check(&proc, &defs, 12, 5000).unwrap();
    println!(
        "{} states, {} transition pairs, complete: {}, violations: {}",
        report.states,
        report.pairs,
        report.complete,
        report.violations.len()
    );
}
