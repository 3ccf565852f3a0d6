use std::collections::BTreeSet;

use serde::Serialize;

use crate::syntax::{Definitions, Ident, SourceProgram, Thread};

use super::graph::{acyclic_verdict, Verdict};

/// Position of a call: `Eps` when nothing is stacked after it in the
/// evaluation context, `Kappa` when a continuation or watch frame is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    Eps,
    Kappa,
}

/// Calls occurring in `t`, labelled by whether they sit under a non-empty
/// context.
pub fn bounded_call(t: &Thread, label: Label) -> BTreeSet<(Ident, Label)> {
    let mut out = BTreeSet::new();
    collect(t, label, &mut out);
    out
}

fn collect(t: &Thread, label: Label, out: &mut BTreeSet<(Ident, Label)>) {
    match t {
        Thread::Nil | Thread::Await(_) | Thread::Emit(_) | Thread::Pause => {}
        Thread::Call(id, _) => {
            out.insert((id.clone(), label));
        }
        Thread::Spawn(body) => collect(body, Label::Eps, out),
        Thread::Seq(a, b) => {
            collect(a, Label::Kappa, out);
            collect(b, label, out);
        }
        Thread::Watch(_, body) => collect(body, Label::Kappa, out),
        Thread::New(_, body) => collect(body, label, out),
    }
}

/// Strict (`A > B`) and weak (`A >= B`) constraints of a set of equations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BoundedConstraints {
    pub strict: BTreeSet<(Ident, Ident)>,
    pub weak: BTreeSet<(Ident, Ident)>,
}

pub fn bounded_constraints(defs: &Definitions) -> BoundedConstraints {
    let mut out = BoundedConstraints::default();
    for def in defs.values() {
        for (b, label) in bounded_call(&def.body, Label::Eps) {
            let pair = (def.id.clone(), b);
            match label {
                Label::Kappa => out.strict.insert(pair),
                Label::Eps => out.weak.insert(pair),
            };
        }
    }
    out
}

/// Accepts when some pre-order with a well-founded strict part satisfies
/// the constraints, i.e. no cycle goes through a strict edge.
pub fn check_bounded(p: &SourceProgram) -> Verdict {
    let c = bounded_constraints(&p.defs);
    let edges: Vec<(Ident, Ident, bool)> = c
        .strict
        .iter()
        .map(|(a, b)| (a.clone(), b.clone(), true))
        .chain(c.weak.iter().map(|(a, b)| (a.clone(), b.clone(), false)))
        .collect();
    acyclic_verdict(&p.defs.keys().cloned().collect(), &edges)
}
