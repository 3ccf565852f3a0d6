mod common;

use common::*;
use proptest::prelude::*;
use sl::cps::{cps_program, CpsError, CpsOptions, CpsPause};
use sl::syntax::{parse_program_with, ParseOptions, PauseMode};
use sl::tailcore::{check_tail_reactivity, parse_tail_program, print_tail_program};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cps_preserves_traces(p in arb_program()) {
        let t = cps_program(&p, CpsOptions::default()).unwrap().program;
        let alphabet = subsets(&p.interface.inputs);
        let r = exhaustive_compare(
            (p.initial.clone(), &p.defs, p.next_fresh_index()),
            (t.initial.clone(), &t.defs, t.next_fresh_index()),
            &p.interface,
            &alphabet,
            5,
        );
        prop_assert!(r.is_ok(), "traces differ on {:?}", r.err());
    }

    #[test]
    fn naive_pause_translation_agrees(p in arb_program()) {
        let opt = cps_program(&p, CpsOptions::default()).unwrap().program;
        let naive = cps_program(&p, CpsOptions { pause: CpsPause::Naive, ..Default::default() }).unwrap().program;
        let alphabet = subsets(&p.interface.inputs);
        let r = exhaustive_compare(
            (opt.initial.clone(), &opt.defs, opt.next_fresh_index()),
            (naive.initial.clone(), &naive.defs, naive.next_fresh_index()),
            &p.interface,
            &alphabet,
            5,
        );
        prop_assert!(r.is_ok(), "traces differ on {:?}", r.err());
    }

    #[test]
    fn cps_images_are_reactive(p in arb_program()) {
        let t = cps_program(&p, CpsOptions::default()).unwrap().program;
        prop_assert!(check_tail_reactivity(&t).is_accept());
    }

    #[test]
    fn tail_programs_reprint_identically(p in arb_program()) {
        let t = cps_program(&p, CpsOptions::default()).unwrap().program;
        let text = print_tail_program(&t).unwrap();
        let back = parse_tail_program(&text).unwrap();
        prop_assert_eq!(print_tail_program(&back).unwrap(), text);
    }
}

#[test]
fn corpus_images_reparse() {
    for (name, p) in source_corpus() {
        let t = cps_program(&p, CpsOptions::default()).unwrap_or_else(|e| panic!("{name}: {e}")).program;
        let back = parse_tail_program(&print_tail_program(&t).unwrap()).unwrap();
        assert_eq!(back, t, "{name}");
    }
}

#[test]
fn expanded_pause_gives_the_same_traces() {
    for name in ["tick", "toggle", "echo_delay", "nested_watch"] {
        let text = std::fs::read_to_string(corpus_dir().join("source").join(format!("{name}.sl"))).unwrap();
        let p = parse_program_with(&text, ParseOptions { pause: PauseMode::Table1 }).unwrap();
        let q = source(name);
        let alphabet = subsets(&p.interface.inputs);
        let r = exhaustive_compare(
            (p.initial.clone(), &p.defs, p.next_fresh_index()),
            (q.initial.clone(), &q.defs, q.next_fresh_index()),
            &p.interface,
            &alphabet,
            6,
        );
        assert!(r.is_ok(), "{name}: {:?}", r.err());
    }
}

#[test]
fn unbounded_contexts_exceed_the_limit() {
    for name in ["pause_call_call", "watch_recursion"] {
        let r = cps_program(&source(name), CpsOptions { limit: 200, ..Default::default() });
        assert!(matches!(r, Err(CpsError::IndexExplosion(_))), "{name}");
    }
}
