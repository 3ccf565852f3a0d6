//! Two processes that react alike in every single instant but not over two
//! instants, and a pair related by commutativity of parallel composition.

use sl::equiv::{bisim_check, parse_proc, BisimResult, EquivOptions, Mode, ProcDefs};

fn main() {
    let defs = ProcDefs::new();
    let opts = EquivOptions::default();
    let pairs = [
        ("(present s1 0 (ite s2 (emit s3) 0))", "(present s2 0 0)"),
        ("(par (present a (emit b) 0) (emit a))", "(par (emit a) (present a (emit b) 0))"),
    ];
    for (p, q) in pairs {
        println!("{p}  vs  {q}");
        let (pp, qq) = (parse_proc(p).unwrap(), parse_proc(q).unwrap());
        for mode in [Mode::Exact, Mode::Trace, Mode::Bounded(4)] {
            match bisim_check(&pp, &qq, &defs, mode, &opts).unwrap() {
                BisimResult::Equivalent => println!("  {mode:?}: equivalent"),
                BisimResult::Inconclusive(k) => println!("  {mode:?}: no difference within {k} steps"),
                BisimResult::Distinguished(w) => print!("  {mode:?}: distinguished\n{w}"),
            }
        }
    }
}
