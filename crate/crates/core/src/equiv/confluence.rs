use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::{Action, Dedupe, EquivError, Proc, ProcDefs, ProcSpace};

/// A failed one-step diamond or transition-system property.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Violation {
    pub kind: String,
    pub state: String,
    pub first: String,
    pub second: Option<String>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct ConfluenceReport {
    pub states: usize,
    /// Pairs of distinct transitions examined.
    pub pairs: usize,
    /// Every reachable state was visited within the depth bound.
    pub complete: bool,
    pub violations: Vec<Violation>,
}

impl ConfluenceReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Visits the states reachable from `p` within `depth` transitions (labelled
/// steps and end-of-instant rewrites of suspended states) and
/// checks on each that two distinct transitions either reach the same state
/// or rejoin in one step each, that emissions are self-loops, that barbs
/// persist along every transition, and that an input leaves its signal
/// emitted.
pub fn confluence_check(p: &Proc, defs: &ProcDefs, depth: usize, limit: usize) -> Result<ConfluenceReport, EquivError> {
    let mut space = ProcSpace::new(&[p], defs, Dedupe::Emits, limit)?;
    let root = space.intern_proc(p)?;
    let mut report = ConfluenceReport { complete: true, ..Default::default() };
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([(root, 0)]);
    while let Some((k, d)) = queue.pop_front() {
        report.states += 1;
        let steps = space.steps(k)?;
        let text = |space: &ProcSpace, x: usize| super::print_proc(&space.to_proc(x));
        let barbs = space.barbs(k);
        for (a, t) in &steps {
            let fail = match a {
                Action::Out(_) if *t != k => Some("emission is not a self-loop"),
                Action::In(s) if !space.barbs(*t).contains(s) => Some("input does not leave its signal emitted"),
                _ if !barbs.is_subset(&space.barbs(*t)) => Some("barb lost along a transition"),
                _ => None,
            };
            if let Some(kind) = fail {
                report.violations.push(Violation {
                    kind: kind.into(),
                    state: text(&space, k),
                    first: format!("{a} -> {}", text(&space, *t)),
                    second: None,
                });
            }
        }
        for i in 0..steps.len() {
            for j in i + 1..steps.len() {
                let ((a1, k1), (a2, k2)) = (&steps[i], &steps[j]);
                if k1 == k2 {
                    continue;
                }
                report.pairs += 1;
                let from1 = space.steps(*k1)?;
                let from2 = space.steps(*k2)?;
                let joined = from1
                    .iter()
                    .filter(|(a, _)| a == a2)
                    .any(|(_, x)| from2.iter().any(|(b, y)| b == a1 && y == x));
                if !joined {
                    report.violations.push(Violation {
                        kind: "distinct transitions do not rejoin".into(),
                        state: text(&space, k),
                        first: format!("{a1} -> {}", text(&space, *k1)),
                        second: Some(format!("{a2} -> {}", text(&space, *k2))),
                    });
                }
            }
        }
        let mut next: Vec<usize> = steps.into_iter().map(|(_, t)| t).collect();
        if space.is_suspended(k) {
            next.push(space.eoi(k)?);
        }
        for t in next {
            if seen.contains(&t) {
                continue;
            }
            if d + 1 > depth {
                report.complete = false;
                continue;
            }
            seen.insert(t);
            queue.push_back((t, d + 1));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::{parse_proc, parse_proc_program};

    #[test]
    fn single_redex_is_confluent() {
        let p = parse_proc("(par (emit s) (present s 0 0))").unwrap();
        let r = confluence_check(&p, &ProcDefs::new(), 6, 1000).unwrap();
        assert!(r.ok(), "{:?}", r.violations);
        assert!(r.complete);
    }

    #[test]
    fn racing_threads_rejoin() {
        let (p, defs) = parse_proc_program(
            "(def (A x) (present x (emit o) 0))(run (par (call A s) (call A t) (present s (emit t) 0) (emit s)))",
        )
        .unwrap();
        let r = confluence_check(&p, &defs, 8, 10_000).unwrap();
        assert!(r.ok(), "{:?}", r.violations);
        assert!(r.pairs > 0);
    }
}
