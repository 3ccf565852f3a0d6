//! The two static checks on a few small programs.

use sl::analysis::{check_bounded, check_reactivity, check_reactivity_with};
use sl::syntax::parse_program;

fn main() {
    let programs = [
        ("await loop", "(input s)(def (A s) (seq (await s) (call A s)))(run (call A s))"),
        (
            "watch and unfold",
            "(input s1 s2)(output s3 s4)
             (def (A s1 s2 s3 s4) (seq (watch s1 (call B s2 s3)) (emit s4) (call A s1 s2 s3 s4)))
             (def (B s2 s3) (seq (await s2) (emit s3) pause (call B s2 s3)))
             (run (call A s1 s2 s3 s4))",
        ),
        ("pause then two calls", "(def (A) (seq pause (call A) (call B)))(def (B) 0)(run (call A))"),
        ("watch around recursion", "(input s)(def (A s) (watch s (seq pause (call A s))))(run (call A s))"),
    ];
    for (name, text) in programs {
        let p = parse_program(text).unwrap();
        println!("{name}");
        println!("  reactivity, no unfolding: {}", check_reactivity_with(&p, 0));
        println!("  reactivity, default:      {}", check_reactivity(&p));
        println!("  bounded contexts:         {}", check_bounded(&p));
    }
}
