use crate::syntax::{FreshNames, Ident, Signal};
use crate::tailcore::{pause_prefix, Branch, TailDef, TailDefs, TailExpr, TailProgram};

use super::{input_signals, mealy_interface, output_signals, MonotonicMealy};

/// Identifier of the equation for state `k`.
pub fn state_ident(m: &MonotonicMealy, k: usize) -> Ident {
    Ident::new(&format!("q_{}", m.states[k]))
}

/// `await {s1..sk}.t = present s1 (... (present sk t 0) ...) 0`
fn await_all(signals: &[Signal], t: TailExpr) -> TailExpr {
    signals.iter().rev().fold(t, |acc, s| TailExpr::present(s, acc, Branch::Leaf(TailExpr::Nil)))
}

/// Builds the program with one equation per state:
/// `q = (thread_{X, j ∈ fO(X,q)} (await {s_x | x ∈ X}. emit o_j)). pause. b(q)`
/// where `b(q)` is an `ite` cascade over the inputs selecting `fQ(X,q)`.
pub fn mealy_to_program(m: &MonotonicMealy) -> TailProgram {
    let inputs = input_signals(m.n);
    let outputs = output_signals(m.m);
    let mut defs = TailDefs::new();
    for q in 0..m.states.len() {
        let cascade = next_cascade(m, q, &inputs, 0, 0);
        let mut body = pause_prefix(cascade, &mut FreshNames::default());
        let mut guards = Vec::new();
        for x in 0..(1u32 << m.n) {
            let present: Vec<Signal> = (0..m.n).filter(|k| x & (1 << k) != 0).map(|k| inputs[k].clone()).collect();
            for (j, o) in outputs.iter().enumerate() {
                if m.output[q][x as usize] & (1 << j) != 0 {
                    guards.push(await_all(&present, TailExpr::emit(o, TailExpr::Nil)));
                }
            }
        }
        for g in guards.into_iter().rev() {
            body = TailExpr::spawn(g, body);
        }
        let id = state_ident(m, q);
        defs.insert(id.clone(), TailDef { id, params: vec![], body });
    }
    TailProgram {
        interface: mealy_interface(m.n, m.m),
        defs,
        initial: vec![TailExpr::call(&state_ident(m, m.init), &[])],
    }
}

fn next_cascade(m: &MonotonicMealy, q: usize, inputs: &[Signal], k: usize, x: u32) -> Branch {
    if k == m.n {
        return Branch::Leaf(TailExpr::call(&state_ident(m, m.next[q][x as usize]), &[]));
    }
    Branch::ite(
        &inputs[k],
        next_cascade(m, q, inputs, k + 1, x | (1 << k)),
        next_cascade(m, q, inputs, k + 1, x),
    )
}
