use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::syntax::{FreshNames, Ident, Signal};
use crate::tailcore::{signal_is_inert, Branch, TailDef, TailDefs, TailExpr, TailProgram};

use super::{MealyError, MonotonicMealy, MAX_INPUTS};

pub const DEFAULT_STATE_LIMIT: usize = 1 << 16;

/// Stands for every inert bound signal: nothing ever emits it.
pub(crate) const ABSENT: Signal = Signal::Fresh(u32::MAX);

/// Node of a program in normal form; children are node indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormalNode {
    Zero,
    Emit(usize, usize),
    Present(usize, usize, NormalBranch),
    Thread(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormalBranch {
    Leaf(usize),
    Ite(usize, Box<NormalBranch>, Box<NormalBranch>),
}

impl NormalBranch {
    fn select(&self, env: u64) -> usize {
        match self {
            NormalBranch::Leaf(a) => *a,
            NormalBranch::Ite(s, a, b) => {
                if env & (1 << s) != 0 {
                    a.select(env)
                } else {
                    b.select(env)
                }
            }
        }
    }
}

/// Parameter-free program in normal form. Signals are numbered; signal
/// sets are bitmasks over those numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalProgram {
    pub signals: Vec<Signal>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub nodes: Vec<NormalNode>,
    pub initial: Vec<usize>,
}

enum Slot {
    Pending,
    Alias(usize),
    Node(NormalNode),
}

struct Normalizer<'a> {
    defs: &'a TailDefs,
    signals: Vec<Signal>,
    signal_index: HashMap<Signal, usize>,
    slots: Vec<Slot>,
    memo: HashMap<TailExpr, usize>,
    queue: VecDeque<(usize, TailExpr)>,
    supply: FreshNames,
}

impl Normalizer<'_> {
    fn signal(&mut self, s: &Signal) -> Result<usize, MealyError> {
        if let Some(&k) = self.signal_index.get(s) {
            return Ok(k);
        }
        if self.signals.len() == 64 {
            return Err(MealyError::TooManySignals);
        }
        self.signal_index.insert(s.clone(), self.signals.len());
        self.signals.push(s.clone());
        Ok(self.signals.len() - 1)
    }

    fn intern(&mut self, t: TailExpr) -> usize {
        if let Some(&k) = self.memo.get(&t) {
            return k;
        }
        let k = self.slots.len();
        self.slots.push(Slot::Pending);
        self.memo.insert(t.clone(), k);
        self.queue.push_back((k, t));
        k
    }

    fn branch(&mut self, b: &Branch) -> Result<NormalBranch, MealyError> {
        Ok(match b {
            Branch::Leaf(t) => NormalBranch::Leaf(self.intern(t.clone())),
            Branch::Ite(s, a, c) => {
                NormalBranch::Ite(self.signal(s)?, Box::new(self.branch(a)?), Box::new(self.branch(c)?))
            }
        })
    }

    fn process(&mut self, k: usize, t: TailExpr) -> Result<(), MealyError> {
        let slot = match t {
            TailExpr::Nil => Slot::Node(NormalNode::Zero),
            TailExpr::Emit(s, next) => Slot::Node(NormalNode::Emit(self.signal(&s)?, self.intern(*next))),
            TailExpr::Spawn(a, b) => {
                let a = self.intern(*a);
                Slot::Node(NormalNode::Thread(a, self.intern(*b)))
            }
            TailExpr::Present(s, then, b) => {
                let s = self.signal(&s)?;
                let then = self.intern(*then);
                Slot::Node(NormalNode::Present(s, then, self.branch(&b)?))
            }
            TailExpr::New(s, body) => {
                if !signal_is_inert(&s, &body) {
                    return Err(MealyError::HasSignalGeneration);
                }
                let body = body.substitute(&HashMap::from([(s, ABSENT)]), &mut self.supply);
                Slot::Alias(self.intern(body))
            }
            TailExpr::Call(id, args) => {
                let def: &TailDef = &self.defs[&id];
                let body = def.instantiate(&args, &mut self.supply);
                Slot::Alias(self.intern(body))
            }
        };
        self.slots[k] = slot;
        Ok(())
    }

    fn resolve(&self, k: usize, names: &HashMap<usize, String>) -> Result<usize, MealyError> {
        let mut cur = k;
        for _ in 0..=self.slots.len() {
            match &self.slots[cur] {
                Slot::Alias(next) => cur = *next,
                _ => return Ok(cur),
            }
        }
        Err(MealyError::AliasCycle(names.get(&k).cloned().unwrap_or_else(|| format!("#{k}"))))
    }
}

/// Instantiates equations on the parameters actually reached from the
/// initial threads and splits them into normal-form nodes. Inert bound
/// signals (the `pause` idiom) are replaced by a signal that is never
/// emitted; any other signal generation is refused.
pub fn normalize_tail(p: &TailProgram) -> Result<NormalProgram, MealyError> {
    let mut nz = Normalizer {
        defs: &p.defs,
        signals: Vec::new(),
        signal_index: HashMap::new(),
        slots: Vec::new(),
        memo: HashMap::new(),
        queue: VecDeque::new(),
        supply: FreshNames::starting_at(p.next_fresh_index()),
    };
    let inputs = p.interface.inputs.iter().map(|s| nz.signal(s)).collect::<Result<Vec<_>, _>>()?;
    let outputs = p.interface.outputs.iter().map(|s| nz.signal(s)).collect::<Result<Vec<_>, _>>()?;
    let roots: Vec<usize> = p.initial.iter().map(|t| nz.intern(t.clone())).collect();
    while let Some((k, t)) = nz.queue.pop_front() {
        nz.process(k, t)?;
    }
    let names: HashMap<usize, String> = nz
        .memo
        .iter()
        .filter_map(|(t, k)| match t {
            TailExpr::Call(id, _) => Some((*k, id.to_string())),
            _ => None,
        })
        .collect();
    // Renumber real nodes densely, following aliases.
    let mut target = vec![0; nz.slots.len()];
    for (k, slot) in target.iter_mut().enumerate() {
        *slot = nz.resolve(k, &names)?;
    }
    let mut dense: HashMap<usize, usize> = HashMap::new();
    let mut order = Vec::new();
    for k in 0..nz.slots.len() {
        if let Slot::Node(_) = nz.slots[k] {
            dense.insert(k, order.len());
            order.push(k);
        }
    }
    let map = |k: usize| dense[&target[k]];
    fn map_branch(b: &NormalBranch, map: &dyn Fn(usize) -> usize) -> NormalBranch {
        match b {
            NormalBranch::Leaf(a) => NormalBranch::Leaf(map(*a)),
            NormalBranch::Ite(s, a, c) => NormalBranch::Ite(*s, Box::new(map_branch(a, map)), Box::new(map_branch(c, map))),
        }
    }
    let nodes = order
        .iter()
        .map(|&k| match &nz.slots[k] {
            Slot::Node(NormalNode::Zero) => NormalNode::Zero,
            Slot::Node(NormalNode::Emit(s, b)) => NormalNode::Emit(*s, map(*b)),
            Slot::Node(NormalNode::Thread(a, b)) => NormalNode::Thread(map(*a), map(*b)),
            Slot::Node(NormalNode::Present(s, b, br)) => NormalNode::Present(*s, map(*b), map_branch(br, &map)),
            _ => unreachable!("only real nodes are kept"),
        })
        .collect();
    Ok(NormalProgram { signals: nz.signals, inputs, outputs, nodes, initial: roots.iter().map(|&k| map(k)).collect() })
}

/// Result of saturating a set configuration and ending the instant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub next: BTreeSet<usize>,
    pub env: u64,
    /// Saturation steps taken.
    pub steps: usize,
}

/// Saturates `(q, E)` with the set rewriting rules, then applies the end of
/// instant to the saturated set.
pub fn closure(p: &NormalProgram, q: &BTreeSet<usize>, env: u64) -> Closure {
    let mut q = q.clone();
    let mut env = env;
    let mut steps = 0;
    let mut changed = true;
    while changed {
        changed = false;
        let current: Vec<usize> = q.iter().copied().collect();
        for a in current {
            match &p.nodes[a] {
                NormalNode::Zero => {}
                NormalNode::Emit(s, b) => {
                    if !q.contains(b) || env & (1 << s) == 0 {
                        q.insert(*b);
                        env |= 1 << s;
                        steps += 1;
                        changed = true;
                    }
                }
                NormalNode::Present(s, b, _) => {
                    if env & (1 << s) != 0 && !q.contains(b) {
                        q.insert(*b);
                        steps += 1;
                        changed = true;
                    }
                }
                NormalNode::Thread(b1, b2) => {
                    if !q.contains(b1) || !q.contains(b2) {
                        q.insert(*b1);
                        q.insert(*b2);
                        steps += 1;
                        changed = true;
                    }
                }
            }
        }
    }
    let mut next = BTreeSet::new();
    for &a in &q {
        match &p.nodes[a] {
            NormalNode::Zero => {
                next.insert(a);
            }
            NormalNode::Present(s, _, b) if env & (1 << s) == 0 => {
                next.insert(b.select(env));
            }
            _ => {}
        }
    }
    Closure { next, env, steps }
}

impl NormalProgram {
    /// The same program as a tail program with one equation `N<k>` per node.
    pub fn to_tail_program(&self, interface: &crate::syntax::Interface) -> TailProgram {
        let id = |k: usize| Ident::new(&format!("N{k}"));
        let call = |k: usize| TailExpr::call(&id(k), &[]);
        fn branch(b: &NormalBranch, signals: &[Signal], call: &dyn Fn(usize) -> TailExpr) -> Branch {
            match b {
                NormalBranch::Leaf(a) => Branch::Leaf(call(*a)),
                NormalBranch::Ite(s, a, c) => Branch::ite(&signals[*s], branch(a, signals, call), branch(c, signals, call)),
            }
        }
        let mut defs = TailDefs::new();
        for (k, node) in self.nodes.iter().enumerate() {
            let body = match node {
                NormalNode::Zero => TailExpr::Nil,
                NormalNode::Emit(s, b) => TailExpr::emit(&self.signals[*s], call(*b)),
                NormalNode::Thread(a, b) => TailExpr::spawn(call(*a), call(*b)),
                NormalNode::Present(s, b, br) => TailExpr::present(&self.signals[*s], call(*b), branch(br, &self.signals, &call)),
            };
            defs.insert(id(k), TailDef { id: id(k), params: vec![], body });
        }
        let mut interface = interface.clone();
        // Signals outside the interface (the absent one) become outputs so
        // the program stays closed.
        for s in &self.signals {
            if !interface.contains(s) {
                interface.outputs.insert(s.clone());
            }
        }
        TailProgram { interface, defs, initial: self.initial.iter().map(|&k| call(k)).collect() }
    }
}

/// Extracts a monotonic Mealy machine whose states are the reachable sets
/// of normal-form nodes.
pub fn program_to_mealy(p: &TailProgram, limit: usize) -> Result<MonotonicMealy, MealyError> {
    let np = normalize_tail(p)?;
    let n = np.inputs.len();
    if n > MAX_INPUTS {
        return Err(MealyError::ArityTooLarge(n));
    }
    let q0: BTreeSet<usize> = np.initial.iter().copied().collect();
    let mut index: HashMap<BTreeSet<usize>, usize> = HashMap::from([(q0.clone(), 0)]);
    let mut sets = vec![q0];
    let mut next = Vec::new();
    let mut output = Vec::new();
    let mut k = 0;
    while k < sets.len() {
        let q = sets[k].clone();
        let mut row_next = Vec::with_capacity(1 << n);
        let mut row_out = Vec::with_capacity(1 << n);
        for x in 0..(1u32 << n) {
            let env = (0..n).filter(|b| x & (1 << b) != 0).fold(0u64, |e, b| e | (1 << np.inputs[b]));
            let c = closure(&np, &q, env);
            let o = np.outputs.iter().enumerate().filter(|(_, s)| c.env & (1 << **s) != 0).fold(0u32, |o, (j, _)| o | (1 << j));
            let target = match index.get(&c.next) {
                Some(&t) => t,
                None => {
                    if sets.len() >= limit {
                        return Err(MealyError::StateExplosion(limit));
                    }
                    index.insert(c.next.clone(), sets.len());
                    sets.push(c.next);
                    sets.len() - 1
                }
            };
            row_next.push(target);
            row_out.push(o);
        }
        next.push(row_next);
        output.push(row_out);
        k += 1;
    }
    Ok(MonotonicMealy {
        n,
        m: np.outputs.len(),
        states: (0..sets.len()).map(|k| format!("s{k}")).collect(),
        init: 0,
        next,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tailcore::parse_tail_program;

    #[test]
    fn parameters_are_instantiated() {
        let p = parse_tail_program("(output s)(def (A x) (emit! x 0))(run (call A s))").unwrap();
        let np = normalize_tail(&p).unwrap();
        assert_eq!(np.nodes.len(), 2);
        assert!(np.nodes.contains(&NormalNode::Zero));
    }

    #[test]
    fn signal_generation_is_refused() {
        let p = parse_tail_program("(output o)(run (new s (emit! s 0)))").unwrap();
        assert_eq!(normalize_tail(&p), Err(MealyError::HasSignalGeneration));
    }

    #[test]
    fn emission_then_termination() {
        let p = parse_tail_program("(output o)(run (emit! o 0))").unwrap();
        let np = normalize_tail(&p).unwrap();
        let q: BTreeSet<usize> = np.initial.iter().copied().collect();
        let c = closure(&np, &q, 0);
        assert_eq!(c.env, 1 << np.outputs[0]);
        assert_eq!(c.next.len(), 1);
        assert_eq!(np.nodes[*c.next.first().unwrap()], NormalNode::Zero);
        let m = program_to_mealy(&p, DEFAULT_STATE_LIMIT).unwrap();
        assert_eq!(m.states.len(), 2);
        assert_eq!(m.run(&[0, 0, 0]), vec![1, 0, 0]);
    }
}
