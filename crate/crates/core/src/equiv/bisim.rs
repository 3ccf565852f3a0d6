use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::semantics::fmt_set;
use crate::syntax::{Ident, Signal};

use super::space::reachable_defs;
use super::{Action, Dedupe, EquivError, Proc, ProcDefs, ProcSpace};

pub const DEFAULT_STATE_LIMIT: usize = 5_000;

/// Emission contexts range over all subsets of the observable signals that
/// some reachable process can test.
const MAX_CONTEXT_SIGNALS: usize = 10;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    /// Largest labelled bisimulation over the full reachable state set.
    Exact,
    /// Equality of instant traces.
    Trace,
    /// The bisimulation conditions on states at most `k` steps away.
    Bounded(usize),
}

#[derive(Clone, Copy, Debug)]
pub struct EquivOptions {
    pub limit: usize,
    /// Use the labelled-path search for `⇓L` instead of `⇓`.
    pub labelled_suspension: bool,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions { limit: DEFAULT_STATE_LIMIT, labelled_suspension: false }
    }
}

/// One instant of a distinguishing run. `None` means no suspended state is
/// reachable, so the instant never ends.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct WitnessStep {
    pub inputs: Vec<Signal>,
    pub left: Option<Vec<Signal>>,
    pub right: Option<Vec<Signal>>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct Witness {
    pub steps: Vec<WitnessStep>,
    /// Bisimulation condition that first failed for the initial pair.
    pub condition: Option<String>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let out = |o: &Option<Vec<Signal>>| match o {
            Some(o) => format!("O={}", fmt_set(o)),
            None => "diverges".to_string(),
        };
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "instant {}: I={} left {} right {}", i + 1, fmt_set(&s.inputs), out(&s.left), out(&s.right))?;
        }
        if let Some(c) = &self.condition {
            writeln!(f, "failed condition: {c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "result")]
pub enum BisimResult {
    Equivalent,
    Distinguished(Witness),
    Inconclusive(usize),
}

pub fn bisim_check(p: &Proc, q: &Proc, defs: &ProcDefs, mode: Mode, opts: &EquivOptions) -> Result<BisimResult, EquivError> {
    match mode {
        Mode::Trace => Ok(match trace_check(p, q, defs, opts.limit)? {
            None => BisimResult::Equivalent,
            Some(steps) => BisimResult::Distinguished(Witness { steps, condition: None }),
        }),
        Mode::Exact => {
            refuse_infinite(p, q, defs)?;
            labelled(p, q, defs, None, opts)
        }
        Mode::Bounded(k) => labelled(p, q, defs, Some(k), opts),
    }
}

/// Signal generation inside recursion can produce unboundedly many
/// private names, so exact checking is refused there. Restrictions whose
/// name is never emitted nor passed on only delay to the next instant and
/// are allowed.
fn refuse_infinite(p: &Proc, q: &Proc, defs: &ProcDefs) -> Result<(), EquivError> {
    let reach = reachable_defs(&[p, q], defs)?;
    let recursive: BTreeSet<&Ident> = reach.iter().filter(|id| calls_back(id, defs)).collect();
    for id in &recursive {
        if let Some(s) = active_restriction(&defs[*id].body) {
            return Err(EquivError::NotFiniteState(format!("{id} generates signal {s} and is recursive")));
        }
    }
    Ok(())
}

fn calls_back(id: &Ident, defs: &ProcDefs) -> bool {
    let mut seen = BTreeSet::new();
    let mut todo = vec![];
    defs[id].body.visit_calls(&mut |c| todo.push(c.clone()));
    while let Some(c) = todo.pop() {
        if &c == id {
            return true;
        }
        if seen.insert(c.clone()) {
            defs[&c].body.visit_calls(&mut |x| todo.push(x.clone()));
        }
    }
    false
}

fn active_restriction(p: &Proc) -> Option<Signal> {
    fn used(s: &Signal, p: &Proc) -> bool {
        match p {
            Proc::Nil => false,
            Proc::Emit(x) => x == s,
            Proc::Call(_, args) => args.contains(s),
            Proc::Present(_, a, b) => used(s, a) || used_branch(s, b),
            Proc::Par(a, b) => used(s, a) || used(s, b),
            Proc::Nu(x, a) => x != s && used(s, a),
        }
    }
    fn used_branch(s: &Signal, b: &super::BranchP) -> bool {
        match b {
            super::BranchP::Leaf(p) => used(s, p),
            super::BranchP::Ite(_, a, c) => used_branch(s, a) || used_branch(s, c),
        }
    }
    fn walk(p: &Proc) -> Option<Signal> {
        match p {
            Proc::Nil | Proc::Emit(_) | Proc::Call(..) => None,
            Proc::Nu(s, a) if used(s, a) => Some(s.clone()),
            Proc::Nu(_, a) => walk(a),
            Proc::Present(_, a, b) => walk(a).or_else(|| walk_branch(b)),
            Proc::Par(a, b) => walk(a).or_else(|| walk(b)),
        }
    }
    fn walk_branch(b: &super::BranchP) -> Option<Signal> {
        match b {
            super::BranchP::Leaf(p) => walk(p),
            super::BranchP::Ite(_, a, c) => walk_branch(a).or_else(|| walk_branch(c)),
        }
    }
    walk(p)
}

/// Tables of an explored state set. States not expanded (beyond the depth
/// bound) are unknown and satisfy every existential requirement.
struct Tables {
    expanded: Vec<bool>,
    tau: Vec<Vec<usize>>,
    ins: Vec<Vec<(usize, usize)>>,
    barbs: Vec<u64>,
    suspended: Vec<bool>,
    eoi: Vec<Option<usize>>,
    /// `with[k][c]` is `k` composed with the emissions of context `c`.
    with: Vec<Vec<usize>>,
    /// Context holding just the given observable signal, if it is testable.
    single: Vec<Option<usize>>,
    tau_star: Vec<Vec<usize>>,
    open: Vec<bool>,
    converges: Vec<bool>,
}

fn explore(space: &mut ProcSpace, roots: &[usize], tested: &BTreeSet<Signal>, depth: Option<usize>) -> Result<Tables, EquivError> {
    let sig_index: HashMap<Signal, usize> = space.observable().iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let testable: Vec<Signal> = space.observable().iter().filter(|s| tested.contains(*s)).cloned().collect();
    if testable.len() > MAX_CONTEXT_SIGNALS {
        return Err(EquivError::TooManySignals(testable.len()));
    }
    let contexts: Vec<Vec<Signal>> = (0..1u64 << testable.len())
        .map(|m| testable.iter().enumerate().filter(|(i, _)| m & (1 << i) != 0).map(|(_, s)| s.clone()).collect())
        .collect();
    let mut single = vec![None; sig_index.len()];
    for (i, s) in testable.iter().enumerate() {
        single[sig_index[s]] = Some(1 << i);
    }
    let mut level: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &r in roots {
        level.insert(r, 0);
        queue.push_back(r);
    }
    // Per expanded state: internal steps, inputs, end of instant, contexts.
    type Expansion = (Vec<usize>, Vec<(usize, usize)>, Option<usize>, Vec<usize>);
    let mut expanded_at: HashMap<usize, Expansion> = HashMap::new();
    while let Some(k) = queue.pop_front() {
        let d = level[&k];
        if depth.is_some_and(|b| d >= b) {
            continue;
        }
        let mut succ = Vec::new();
        let mut tau = Vec::new();
        let mut ins = Vec::new();
        for (a, t) in space.steps(k)? {
            match a {
                Action::Tau => tau.push(t),
                Action::In(s) => ins.push((sig_index[&s], t)),
                Action::Out(_) => continue,
            }
            succ.push(t);
        }
        let eoi = if space.is_suspended(k) { Some(space.eoi(k)?) } else { None };
        succ.extend(eoi);
        let with = contexts.iter().map(|c| space.with_emits(k, c)).collect::<Result<Vec<_>, _>>()?;
        succ.extend(with.iter().copied());
        for t in succ {
            if let std::collections::hash_map::Entry::Vacant(e) = level.entry(t) {
                e.insert(d + 1);
                queue.push_back(t);
            }
        }
        expanded_at.insert(k, (tau, ins, eoi, with));
    }
    let n = space.len();
    let mut t = Tables {
        expanded: vec![false; n],
        tau: vec![vec![]; n],
        ins: vec![vec![]; n],
        barbs: vec![0; n],
        suspended: vec![false; n],
        eoi: vec![None; n],
        with: vec![vec![]; n],
        single,
        tau_star: vec![vec![]; n],
        open: vec![false; n],
        converges: vec![false; n],
    };
    for k in 0..n {
        t.suspended[k] = space.is_suspended(k);
        t.barbs[k] = space.barbs(k).iter().fold(0, |m, s| m | (1 << sig_index[s]));
        if let Some((tau, ins, eoi, with)) = expanded_at.remove(&k) {
            t.expanded[k] = true;
            t.tau[k] = tau;
            t.ins[k] = ins;
            t.eoi[k] = eoi;
            t.with[k] = with;
        }
    }
    for k in 0..n {
        let mut seen = BTreeSet::from([k]);
        let mut stack = vec![k];
        while let Some(x) = stack.pop() {
            for &y in &t.tau[x] {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        t.open[k] = seen.iter().any(|&x| !t.expanded[x]);
        t.converges[k] = seen.iter().any(|&x| t.suspended[x]);
        t.tau_star[k] = seen.into_iter().collect();
    }
    Ok(t)
}

/// States from which a suspended state is reachable through internal and
/// input steps.
fn labelled_convergence(t: &Tables) -> Vec<bool> {
    let n = t.tau.len();
    let mut rev: Vec<Vec<usize>> = vec![vec![]; n];
    for k in 0..n {
        for &y in t.tau[k].iter().chain(t.ins[k].iter().map(|(_, y)| y)) {
            rev[y].push(k);
        }
    }
    let mut yes = t.suspended.clone();
    let mut stack: Vec<usize> = (0..n).filter(|&k| yes[k]).collect();
    while let Some(y) = stack.pop() {
        for &x in &rev[y] {
            if !yes[x] {
                yes[x] = true;
                stack.push(x);
            }
        }
    }
    yes
}

/// Free signals that a guard of some derivative of `roots` can test. An
/// emission of any other signal only adds a barb, so emission contexts are
/// drawn from these. A parameter is tested when its body tests it or passes
/// it on in a tested position.
fn tested_signals(roots: &[&Proc], defs: &ProcDefs) -> BTreeSet<Signal> {
    struct Walk<'a> {
        defs: &'a ProcDefs,
        params: HashMap<Ident, BTreeSet<usize>>,
        found: BTreeSet<Signal>,
        hit: BTreeSet<usize>,
    }
    impl Walk<'_> {
        fn mark(&mut self, s: &Signal, own: &[Signal], bound: &[Signal]) {
            if bound.contains(s) {
                return;
            }
            match own.iter().position(|x| x == s) {
                Some(i) => {
                    self.hit.insert(i);
                }
                None => {
                    self.found.insert(s.clone());
                }
            }
        }
        fn proc(&mut self, p: &Proc, own: &[Signal], bound: &mut Vec<Signal>) {
            match p {
                Proc::Nil | Proc::Emit(_) => {}
                Proc::Present(s, a, b) => {
                    self.mark(s, own, bound);
                    self.proc(a, own, bound);
                    self.branch(b, own, bound);
                }
                Proc::Par(a, b) => {
                    self.proc(a, own, bound);
                    self.proc(b, own, bound);
                }
                Proc::Nu(s, a) => {
                    bound.push(s.clone());
                    self.proc(a, own, bound);
                    bound.pop();
                }
                Proc::Call(id, args) => {
                    let positions: Vec<usize> = self.params.get(id).map(|x| x.iter().copied().collect()).unwrap_or_default();
                    for i in positions {
                        if let Some(s) = args.get(i) {
                            self.mark(s, own, bound);
                        }
                    }
                }
            }
        }
        fn branch(&mut self, b: &super::BranchP, own: &[Signal], bound: &mut Vec<Signal>) {
            match b {
                super::BranchP::Leaf(p) => self.proc(p, own, bound),
                super::BranchP::Ite(s, x, y) => {
                    self.mark(s, own, bound);
                    self.branch(x, own, bound);
                    self.branch(y, own, bound);
                }
            }
        }
    }
    let mut w = Walk { defs, params: HashMap::new(), found: BTreeSet::new(), hit: BTreeSet::new() };
    loop {
        let mut changed = false;
        for (id, d) in w.defs {
            w.hit.clear();
            w.proc(&d.body, &d.params, &mut vec![]);
            let hit = std::mem::take(&mut w.hit);
            let entry = w.params.entry(id.clone()).or_default();
            if !hit.is_subset(entry) {
                entry.extend(hit);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for p in roots {
        w.proc(p, &[], &mut vec![]);
    }
    w.found
}

struct Relation {
    n: usize,
    bits: Vec<u64>,
}

impl Relation {
    fn full(n: usize) -> Self {
        Relation { n, bits: vec![u64::MAX; (n * n).div_ceil(64)] }
    }

    fn get(&self, a: usize, b: usize) -> bool {
        let i = a * self.n + b;
        self.bits[i / 64] & (1 << (i % 64)) != 0
    }

    fn remove(&mut self, a: usize, b: usize) {
        for i in [a * self.n + b, b * self.n + a] {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }
}

struct Checker<'t> {
    t: &'t Tables,
    converges: Vec<bool>,
}

impl Checker<'_> {
    /// Some `q'` with `q ⇒τ q'` satisfies `pred`; unknown states do.
    fn weak_tau(&self, q: usize, mut pred: impl FnMut(usize) -> bool) -> bool {
        self.t.open[q] || self.t.tau_star[q].iter().any(|&x| pred(x))
    }

    /// Some `q'` with `q ⇒s q'` satisfies `pred`.
    fn weak_in(&self, q: usize, s: usize, mut pred: impl FnMut(usize) -> bool) -> bool {
        let t = self.t;
        if t.open[q] {
            return true;
        }
        t.tau_star[q].iter().any(|&q1| {
            t.ins[q1].iter().filter(|(x, _)| *x == s).any(|&(_, q2)| t.open[q2] || t.tau_star[q2].iter().any(|&x| pred(x)))
        })
    }

    /// Conditions for `p` to be simulated by `q`; the name of the first one
    /// failing otherwise.
    fn simulates(&self, r: &Relation, p: usize, q: usize) -> Result<(), &'static str> {
        let t = self.t;
        let known = |x: usize| t.expanded[x];
        for &p1 in &t.tau[p] {
            if !self.weak_tau(q, |q1| !known(q1) || r.get(p1, q1)) {
                return Err("B1: internal step not matched");
            }
        }
        if self.converges[p] && !t.open[p] {
            let mut barbs = t.barbs[p];
            while barbs != 0 {
                let s = barbs.trailing_zeros();
                barbs &= barbs - 1;
                if !self.weak_tau(q, |q1| !known(q1) || (t.barbs[q1] & (1 << s) != 0 && r.get(p, q1))) {
                    return Err("B3: emission not matched");
                }
            }
        }
        for (ctx, &p1) in t.with[p].iter().enumerate() {
            if !t.suspended[p1] || !known(p1) {
                continue;
            }
            let q0 = t.with[q][ctx];
            if !known(q0) {
                continue;
            }
            let e1 = t.eoi[p1].expect("suspended and expanded");
            let ok = self.weak_tau(q0, |q1| {
                !known(q1) || (t.suspended[q1] && r.get(p1, q1) && t.eoi[q1].is_some_and(|e2| r.get(e1, e2)))
            });
            if !ok {
                return Err("L1: suspension under an emission context not matched");
            }
        }
        for &(s, p1) in &t.ins[p] {
            let with_s = |q1: usize| t.single[s].map_or(q1, |c| t.with[q1][c]);
            let ok = self.weak_in(q, s, |q1| !known(q1) || r.get(p1, q1))
                || self.weak_tau(q, |q1| !known(q1) || !known(with_s(q1)) || r.get(p1, with_s(q1)));
            if !ok {
                return Err("L2: input not matched");
            }
        }
        Ok(())
    }
}

fn labelled(p: &Proc, q: &Proc, defs: &ProcDefs, depth: Option<usize>, opts: &EquivOptions) -> Result<BisimResult, EquivError> {
    let mut space = ProcSpace::new(&[p, q], defs, Dedupe::All, opts.limit)?;
    let kp = space.intern_proc(p)?;
    let kq = space.intern_proc(q)?;
    let tested = tested_signals(&[p, q], defs);
    let t = explore(&mut space, &[kp, kq], &tested, depth)?;
    let converges = if opts.labelled_suspension { labelled_convergence(&t) } else { t.converges.clone() };
    let checker = Checker { t: &t, converges };
    let n = space.len();
    let mut r = Relation::full(n);
    let mut root_failure = None;
    let mut changed = true;
    while changed {
        changed = false;
        for a in 0..n {
            if !t.expanded[a] {
                continue;
            }
            for b in a + 1..n {
                if !t.expanded[b] || !r.get(a, b) {
                    continue;
                }
                let verdict = checker.simulates(&r, a, b).and_then(|_| checker.simulates(&r, b, a));
                if let Err(why) = verdict {
                    r.remove(a, b);
                    changed = true;
                    if (a, b) == (kp.min(kq), kp.max(kq)) {
                        root_failure = Some(why.to_string());
                    }
                }
            }
        }
    }
    if r.get(kp, kq) {
        let complete = t.expanded.iter().all(|&e| e);
        return Ok(match depth {
            Some(k) if !complete => BisimResult::Inconclusive(k),
            _ => BisimResult::Equivalent,
        });
    }
    // Explain the difference by instants when the trace search can.
    let steps = trace_check(p, q, defs, opts.limit).ok().flatten().unwrap_or_default();
    Ok(BisimResult::Distinguished(Witness { steps, condition: root_failure }))
}

/// Shortest input sequence on which the instant outputs of `p` and `q`
/// differ, or `None` if their traces agree.
pub fn trace_check(p: &Proc, q: &Proc, defs: &ProcDefs, limit: usize) -> Result<Option<Vec<WitnessStep>>, EquivError> {
    let mut space = ProcSpace::new(&[p, q], defs, Dedupe::All, limit)?;
    let n_sig = space.observable().len();
    if n_sig > MAX_CONTEXT_SIGNALS {
        return Err(EquivError::TooManySignals(n_sig));
    }
    let kp = space.intern_proc(p)?;
    let kq = space.intern_proc(q)?;
    let mut memo: HashMap<(usize, u64), Option<(Vec<Signal>, usize)>> = HashMap::new();
    let mut instant = |space: &mut ProcSpace, k: usize, mask: u64| -> Result<Option<(Vec<Signal>, usize)>, EquivError> {
        if let Some(r) = memo.get(&(k, mask)) {
            return Ok(r.clone());
        }
        let inputs = space.signals_of(mask);
        let start = space.with_emits(k, &inputs)?;
        let r = match space.weak_suspension(start)? {
            None => None,
            Some(done) => Some((space.barbs(done).into_iter().collect(), space.eoi(done)?)),
        };
        memo.insert((k, mask), r.clone());
        Ok(r)
    };
    let mut parent: HashMap<(usize, usize), Option<((usize, usize), WitnessStep)>> = HashMap::from([((kp, kq), None)]);
    let mut queue = VecDeque::from([(kp, kq)]);
    while let Some((a, b)) = queue.pop_front() {
        for mask in 0..1u64 << n_sig {
            let ra = instant(&mut space, a, mask)?;
            let rb = instant(&mut space, b, mask)?;
            let step = WitnessStep {
                inputs: space.signals_of(mask),
                left: ra.as_ref().map(|(o, _)| o.clone()),
                right: rb.as_ref().map(|(o, _)| o.clone()),
            };
            if step.left != step.right {
                let mut steps = vec![step];
                let mut cur = (a, b);
                while let Some(Some((prev, s))) = parent.get(&cur) {
                    steps.push(s.clone());
                    cur = *prev;
                }
                steps.reverse();
                return Ok(Some(steps));
            }
            if let (Some((_, na)), Some((_, nb))) = (ra, rb) {
                if !parent.contains_key(&(na, nb)) {
                    if parent.len() >= limit {
                        return Err(EquivError::StateLimit(limit));
                    }
                    parent.insert((na, nb), Some(((a, b), step)));
                    queue.push_back((na, nb));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::{parse_proc, parse_proc_program};

    fn check(p: &str, q: &str, mode: Mode) -> BisimResult {
        let (p, q) = (parse_proc(p).unwrap(), parse_proc(q).unwrap());
        bisim_check(&p, &q, &ProcDefs::new(), mode, &EquivOptions::default()).unwrap()
    }

    const P: &str = "(present s1 0 (ite s2 (emit s3) 0))";
    const Q: &str = "(present s2 0 0)";

    #[test]
    fn branch_guard_is_observable_through_an_emission_context() {
        for mode in [Mode::Exact, Mode::Trace] {
            let BisimResult::Distinguished(w) = check(P, Q, mode) else { panic!("{mode:?} must distinguish") };
            assert_eq!(w.steps.len(), 2);
            assert_eq!(w.steps[0].inputs, vec![Signal::named("s2")]);
            assert_eq!(w.steps[1].left, Some(vec![Signal::named("s3")]));
            assert_eq!(w.steps[1].right, Some(vec![]));
        }
    }

    #[test]
    fn parallel_nil_is_neutral() {
        assert_eq!(check(&format!("(par {P} 0)"), P, Mode::Exact), BisimResult::Equivalent);
    }

    #[test]
    fn bounded_mode_is_inconclusive_on_deep_agreement() {
        let (_, all) = parse_proc_program(
            "(def (A) (new x (present x 0 (par (emit o) (call A)))))(def (B) (new y (present y 0 (par (call B) (emit o)))))(run 0)",
        )
        .unwrap();
        let (p, q) = (parse_proc("(call A)").unwrap(), parse_proc("(call B)").unwrap());
        let r = bisim_check(&p, &q, &all, Mode::Bounded(1), &EquivOptions::default()).unwrap();
        assert_eq!(r, BisimResult::Inconclusive(1));
        let r = bisim_check(&p, &q, &all, Mode::Exact, &EquivOptions::default()).unwrap();
        assert_eq!(r, BisimResult::Equivalent);
    }

    #[test]
    fn generation_under_recursion_is_refused() {
        let (p, defs) = parse_proc_program("(def (A) (new x (par (emit x) (call A))))(run (call A))").unwrap();
        let r = bisim_check(&p, &p, &defs, Mode::Exact, &EquivOptions::default());
        assert!(matches!(r, Err(EquivError::NotFiniteState(_))));
    }

    #[test]
    fn testable_signals_follow_parameters() {
        let (p, defs) = parse_proc_program(
            "(def (A x y) (par (emit y) (call B x)))(def (B z) (present z 0 (ite w 0 0)))(run (par (call A a b) (emit c) (new g (present g 0 0))))",
        )
        .unwrap();
        let tested = tested_signals(&[&p], &defs);
        assert_eq!(tested, BTreeSet::from([Signal::named("a"), Signal::named("w")]));
    }
}
