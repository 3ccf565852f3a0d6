use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::syntax::{canonicalize, FreshNames, Ident, Signal};

use super::{Action, EquivError, Proc, ProcDefs};

/// Which identical parallel components are merged when a state is formed.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dedupe {
    /// Only repeated emissions; `P | emit s ≡ P` whenever `P` emits `s`.
    Emits,
    /// Every repeated component. Keeps recursive spawning finite.
    All,
}

/// A process as a canonical list of parallel components. Every signal that
/// is not observable is implicitly restricted at top level.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct State(pub Vec<Proc>);

/// Interned states of the processes reachable from some roots, over a fixed
/// set of observable (free) signals.
pub struct ProcSpace<'a> {
    defs: &'a ProcDefs,
    observable: Vec<Signal>,
    keep: BTreeSet<Signal>,
    dedupe: Dedupe,
    limit: usize,
    states: Vec<State>,
    index: HashMap<State, usize>,
    steps: HashMap<usize, Vec<(Action, usize)>>,
}

impl<'a> ProcSpace<'a> {
    /// The observable signals are the free signals of the roots and of the
    /// equations they reach.
    pub fn new(roots: &[&Proc], defs: &'a ProcDefs, dedupe: Dedupe, limit: usize) -> Result<Self, EquivError> {
        let mut keep = BTreeSet::new();
        for r in roots {
            keep.extend(r.free_signals());
        }
        for id in reachable_defs(roots, defs)? {
            let d = &defs[&id];
            keep.extend(d.body.free_signals().into_iter().filter(|s| !d.params.contains(s)));
        }
        Ok(ProcSpace {
            defs,
            observable: keep.iter().cloned().collect(),
            keep,
            dedupe,
            limit,
            states: Vec::new(),
            index: HashMap::new(),
            steps: HashMap::new(),
        })
    }

    pub fn observable(&self) -> &[Signal] {
        &self.observable
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, k: usize) -> &State {
        &self.states[k]
    }

    /// The state as a process, restricting its private names.
    pub fn to_proc(&self, k: usize) -> Proc {
        let comps = &self.states[k].0;
        let mut bound = BTreeSet::new();
        for c in comps {
            bound.extend(c.free_signals().into_iter().filter(|s| !self.keep.contains(s)));
        }
        let body = Proc::par_all(comps.iter().cloned());
        bound.iter().rev().fold(body, |acc, s| Proc::nu(s, acc))
    }

    fn supply_for(&self, comps: &[Proc]) -> FreshNames {
        let top = comps
            .iter()
            .filter_map(Proc::max_fresh_index)
            .chain(self.keep.iter().filter_map(Signal::fresh_index))
            .max();
        FreshNames::starting_at(top.map_or(0, |n| n + 1))
    }

    pub fn intern_proc(&mut self, p: &Proc) -> Result<usize, EquivError> {
        self.intern(vec![p.clone()])
    }

    fn intern(&mut self, comps: Vec<Proc>) -> Result<usize, EquivError> {
        let mut supply = self.supply_for(&comps);
        let mut flat = Vec::new();
        for c in comps {
            flatten(c, &mut flat, &mut supply);
        }
        let mut seen = std::collections::HashSet::new();
        flat.retain(|c| match (self.dedupe, c) {
            (Dedupe::All, _) | (Dedupe::Emits, Proc::Emit(_)) => seen.insert(c.clone()),
            _ => true,
        });
        let state = State(canonicalize(&flat, &self.keep));
        if let Some(&k) = self.index.get(&state) {
            return Ok(k);
        }
        if self.states.len() >= self.limit {
            return Err(EquivError::StateLimit(self.limit));
        }
        self.index.insert(state.clone(), self.states.len());
        self.states.push(state);
        Ok(self.states.len() - 1)
    }

    fn emits(&self, k: usize, s: &Signal) -> bool {
        self.states[k].0.iter().any(|c| matches!(c, Proc::Emit(x) if x == s))
    }

    /// `P↓`
    pub fn is_suspended(&self, k: usize) -> bool {
        self.states[k].0.iter().all(|c| match c {
            Proc::Call(..) => false,
            Proc::Present(s, ..) => !self.emits(k, s),
            _ => true,
        })
    }

    /// Observable emissions.
    pub fn barbs(&self, k: usize) -> BTreeSet<Signal> {
        self.states[k]
            .0
            .iter()
            .filter_map(|c| match c {
                Proc::Emit(s) if self.keep.contains(s) => Some(s.clone()),
                _ => None,
            })
            .collect()
    }

    /// Transitions of state `k`; inputs and barbs only on observable names.
    pub fn steps(&mut self, k: usize) -> Result<Vec<(Action, usize)>, EquivError> {
        if let Some(s) = self.steps.get(&k) {
            return Ok(s.clone());
        }
        let comps = self.states[k].0.clone();
        let mut out = Vec::new();
        for (i, c) in comps.iter().enumerate() {
            let replace = |with: Vec<Proc>| {
                let mut next: Vec<Proc> = comps.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c.clone()).collect();
                next.extend(with);
                next
            };
            match c {
                Proc::Emit(s) if self.keep.contains(s) => out.push((Action::Out(s.clone()), k)),
                Proc::Present(s, then, _) => {
                    let next = replace(vec![(**then).clone(), Proc::emit(s)]);
                    let target = self.intern(next)?;
                    if self.keep.contains(s) {
                        out.push((Action::In(s.clone()), target));
                    }
                    if self.emits(k, s) {
                        out.push((Action::Tau, target));
                    }
                }
                Proc::Call(id, args) => {
                    let def = self.defs.get(id).ok_or_else(|| EquivError::UnboundIdentifier(id.to_string()))?;
                    let body = def.instantiate(args, &mut self.supply_for(&comps));
                    out.push((Action::Tau, self.intern(replace(vec![body]))?));
                }
                _ => {}
            }
        }
        out.sort();
        out.dedup();
        self.steps.insert(k, out.clone());
        Ok(out)
    }

    pub fn tau_steps(&mut self, k: usize) -> Result<Vec<usize>, EquivError> {
        Ok(self.steps(k)?.into_iter().filter(|(a, _)| *a == Action::Tau).map(|(_, t)| t).collect())
    }

    /// `⌊P⌋` of a suspended state.
    pub fn eoi(&mut self, k: usize) -> Result<usize, EquivError> {
        if !self.is_suspended(k) {
            return Err(EquivError::NotSuspended);
        }
        let comps = &self.states[k].0;
        let em: BTreeSet<Signal> = comps
            .iter()
            .filter_map(|c| match c {
                Proc::Emit(s) => Some(s.clone()),
                _ => None,
            })
            .collect();
        let next = comps
            .iter()
            .filter_map(|c| match c {
                Proc::Present(_, _, b) => Some(b.select(&|s| em.contains(s)).clone()),
                _ => None,
            })
            .collect();
        self.intern(next)
    }

    /// `P | emit s1 | ... | emit sn`
    pub fn with_emits(&mut self, k: usize, signals: &[Signal]) -> Result<usize, EquivError> {
        if signals.is_empty() {
            return Ok(k);
        }
        let mut comps = self.states[k].0.clone();
        comps.extend(signals.iter().map(Proc::emit));
        self.intern(comps)
    }

    /// Signals of `observable()` selected by `mask`.
    pub fn signals_of(&self, mask: u64) -> Vec<Signal> {
        self.observable.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, s)| s.clone()).collect()
    }

    /// A suspended state reachable by internal steps, if any (`P⇓`).
    pub fn weak_suspension(&mut self, k: usize) -> Result<Option<usize>, EquivError> {
        self.search(k, false)
    }

    /// A suspended state reachable by internal and input steps (`P⇓L`).
    pub fn labelled_suspension(&mut self, k: usize) -> Result<Option<usize>, EquivError> {
        self.search(k, true)
    }

    fn search(&mut self, k: usize, inputs: bool) -> Result<Option<usize>, EquivError> {
        let mut seen = BTreeSet::from([k]);
        let mut queue = VecDeque::from([k]);
        while let Some(x) = queue.pop_front() {
            if self.is_suspended(x) {
                return Ok(Some(x));
            }
            for (a, t) in self.steps(x)? {
                let follow = match a {
                    Action::Tau => true,
                    Action::In(_) => inputs,
                    Action::Out(_) => false,
                };
                if follow && seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        Ok(None)
    }
}

/// Flattens parallel composition, drops `0` and hoists restrictions with
/// fresh names.
fn flatten(p: Proc, out: &mut Vec<Proc>, supply: &mut FreshNames) {
    use crate::syntax::NameSupply;
    match p {
        Proc::Nil => {}
        Proc::Par(a, b) => {
            flatten(*a, out, supply);
            flatten(*b, out, supply);
        }
        Proc::Nu(s, body) => {
            let to = supply.fresh_signal();
            let body = body.substitute(&HashMap::from([(s, to)]), supply);
            flatten(body, out, supply);
        }
        other => out.push(other),
    }
}

/// Identifiers reachable from the roots through calls.
pub(crate) fn reachable_defs(roots: &[&Proc], defs: &ProcDefs) -> Result<BTreeSet<Ident>, EquivError> {
    let mut seen = BTreeSet::new();
    let mut todo: Vec<Ident> = Vec::new();
    for r in roots {
        r.visit_calls(&mut |id| todo.push(id.clone()));
    }
    while let Some(id) = todo.pop() {
        if seen.insert(id.clone()) {
            let d = defs.get(&id).ok_or_else(|| EquivError::UnboundIdentifier(id.to_string()))?;
            d.body.visit_calls(&mut |id| todo.push(id.clone()));
        }
    }
    Ok(seen)
}

/// The three suspension predicates of one process.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Suspension {
    /// `P↓`
    pub now: bool,
    /// `P⇓`
    pub weak: bool,
    /// `P⇓L`, by its own search over input and internal steps.
    pub labelled: bool,
}

pub fn suspension(p: &Proc, defs: &ProcDefs, limit: usize) -> Result<Suspension, EquivError> {
    let mut space = ProcSpace::new(&[p], defs, Dedupe::Emits, limit)?;
    let k = space.intern_proc(p)?;
    Ok(Suspension {
        now: space.is_suspended(k),
        weak: space.weak_suspension(k)?.is_some(),
        labelled: space.labelled_suspension(k)?.is_some(),
    })
}
