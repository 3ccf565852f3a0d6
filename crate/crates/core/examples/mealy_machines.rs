//! Extracts a Mealy machine from a compiled program, prints it, compiles it
//! back and compares the two.

use sl::cps::{cps_program, CpsOptions};
use sl::mealy::{mealy_to_program, mealy_trace_equiv, print_mealy, program_to_mealy, DEFAULT_STATE_LIMIT};
use sl::syntax::parse_program;
use sl::tailcore::print_tail_program;

const TOGGLE: &str = "
(input i)
(output on off)
(def (Off i on off) (seq (emit off) (await i) pause (call On i on off)))
(def (On i on off) (seq (emit on) (await i) pause (call Off i on off)))
(run (call Off i on off))
";

fn main() {
    let p = parse_program(TOGGLE).unwrap();
    let tail = cps_program(&p, CpsOptions::default()).unwrap().program;
    let machine = program_to_mealy(&tail, DEFAULT_STATE_LIMIT).unwrap();
    print!("{}", print_mealy(&machine));
    let compiled = mealy_to_program(&machine);
    print!("{}", print_tail_program(&compiled).unwrap());
    let back = program_to_mealy(&compiled, DEFAULT_STATE_LIMIT).unwrap();
    println!("round trip: {:?}", mealy_trace_equiv(&machine, &back).unwrap());
}
