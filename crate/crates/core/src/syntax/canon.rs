use std::collections::{BTreeSet, HashMap};

use super::{print_thread, Signal, Thread};

/// Renaming state for one canonical traversal.
///
/// Names in `keep` are never touched. Binders always get `%gN` names; free
/// names get `%gN` names from the same counter, or `%pN` names from a
/// separate counter when built with [`Renamer::with_params`].
#[derive(Clone, Debug)]
pub struct Renamer {
    keep: BTreeSet<Signal>,
    free: HashMap<Signal, Signal>,
    free_order: Vec<Signal>,
    scopes: Vec<(Signal, Signal)>,
    next: u32,
    next_param: Option<u32>,
}

impl Renamer {
    pub fn new(keep: &BTreeSet<Signal>) -> Self {
        Renamer { keep: keep.clone(), free: HashMap::new(), free_order: Vec::new(), scopes: Vec::new(), next: 0, next_param: None }
    }

    pub fn with_params(keep: &BTreeSet<Signal>) -> Self {
        Renamer { next_param: Some(0), ..Renamer::new(keep) }
    }

    /// Renames an occurrence of `s`.
    pub fn signal(&mut self, s: &Signal) -> Signal {
        if let Some((_, to)) = self.scopes.iter().rev().find(|(from, _)| from == s) {
            return to.clone();
        }
        if self.keep.contains(s) {
            return s.clone();
        }
        if let Some(to) = self.free.get(s) {
            return to.clone();
        }
        let to = match &mut self.next_param {
            Some(n) => {
                *n += 1;
                Signal::Param(*n - 1)
            }
            None => self.next_fresh(),
        };
        self.free.insert(s.clone(), to.clone());
        self.free_order.push(s.clone());
        to
    }

    /// Opens the scope of a binder for `s`; close it with [`Renamer::unbind`].
    pub fn bind(&mut self, s: &Signal) -> Signal {
        let to = self.next_fresh();
        self.scopes.push((s.clone(), to.clone()));
        to
    }

    fn next_fresh(&mut self) -> Signal {
        while self.keep.contains(&Signal::Fresh(self.next)) {
            self.next += 1;
        }
        self.next += 1;
        Signal::Fresh(self.next - 1)
    }

    pub fn unbind(&mut self) {
        self.scopes.pop();
    }

    /// Mapping of free names seen so far.
    pub fn free_map(&self) -> &HashMap<Signal, Signal> {
        &self.free
    }

    /// Original free names in first-occurrence order.
    pub fn free_order(&self) -> &[Signal] {
        &self.free_order
    }

    /// Binds `s` for the duration of `f`.
    pub fn scoped<R>(&mut self, s: &Signal, f: impl FnOnce(&mut Self, Signal) -> R) -> R {
        let to = self.bind(s);
        let out = f(self, to);
        self.unbind();
        out
    }
}

/// Terms that can be renamed by a pre-order walk and printed.
pub trait Rename: Clone {
    fn rename(&self, r: &mut Renamer) -> Self;
    fn render(&self) -> String;
}

impl Rename for Thread {
    fn rename(&self, r: &mut Renamer) -> Self {
        match self {
            Thread::Nil => Thread::Nil,
            Thread::Pause => Thread::Pause,
            Thread::Seq(a, b) => {
                let a = a.rename(r);
                Thread::Seq(Box::new(a), Box::new(b.rename(r)))
            }
            Thread::Emit(s) => Thread::Emit(r.signal(s)),
            Thread::Await(s) => Thread::Await(r.signal(s)),
            Thread::New(s, body) => r.scoped(s, |r, to| Thread::New(to, Box::new(body.rename(r)))),
            Thread::Spawn(body) => Thread::Spawn(Box::new(body.rename(r))),
            Thread::Watch(s, body) => {
                let s = r.signal(s);
                Thread::Watch(s, Box::new(body.rename(r)))
            }
            Thread::Call(id, args) => Thread::Call(id.clone(), args.iter().map(|a| r.signal(a)).collect()),
        }
    }

    fn render(&self) -> String {
        print_thread(self)
    }
}

const PERMUTATION_BUDGET: usize = 720;

/// Canonical form of a multiset of terms up to renaming of every name not
/// in `keep`.
pub fn canonicalize<T: Rename>(items: &[T], keep: &BTreeSet<Signal>) -> Vec<T> {
    canonicalize_with_renaming(items, keep).0
}

/// String key identifying a multiset of terms up to renaming.
pub fn canonical_key<T: Rename>(items: &[T], keep: &BTreeSet<Signal>) -> String {
    canonicalize(items, keep).iter().map(Rename::render).collect::<Vec<_>>().join(" | ")
}

/// Like [`canonicalize`] but also returns how free names were renamed.
pub fn canonicalize_with_renaming<T: Rename>(
    items: &[T],
    keep: &BTreeSet<Signal>,
) -> (Vec<T>, HashMap<Signal, Signal>) {
    // Order threads by their individually canonical print; this is invariant
    // under renaming, so only ties need a global search.
    let mut keyed: Vec<(String, &T)> =
        items.iter().map(|t| (t.rename(&mut Renamer::new(keep)).render(), t)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let ordered: Vec<&T> = keyed.iter().map(|(_, t)| *t).collect();

    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=keyed.len() {
        if i == keyed.len() || keyed[i].0 != keyed[start].0 {
            if i - start > 1 {
                groups.push((start, i));
            }
            start = i;
        }
    }
    let total: usize = groups.iter().map(|&(a, b)| factorial(b - a)).fold(1, usize::saturating_mul);

    let apply = |order: &[&T]| {
        let mut r = Renamer::new(keep);
        let out: Vec<T> = order.iter().map(|t| t.rename(&mut r)).collect();
        let text = out.iter().map(Rename::render).collect::<Vec<_>>().join(" | ");
        (text, out, r.free)
    };

    if groups.is_empty() {
        let (_, out, free) = apply(&ordered);
        return (out, free);
    }
    if total <= PERMUTATION_BUDGET {
        let mut best: Option<(String, Vec<T>, HashMap<Signal, Signal>)> = None;
        let mut current = ordered.clone();
        search(&groups, 0, &mut current, &mut |order| {
            let cand = apply(order);
            if best.as_ref().is_none_or(|b| cand.0 < b.0) {
                best = Some(cand);
            }
        });
        let (_, out, free) = best.expect("at least one ordering");
        return (out, free);
    }
    // Too many ties: choose greedily, group by group, position by position.
    let mut current = ordered;
    for &(a, b) in &groups {
        for pos in a..b {
            let mut best_idx = pos;
            let mut best_text = None;
            for cand in pos..b {
                current.swap(pos, cand);
                let (text, ..) = apply(&current[..=pos]);
                if best_text.as_ref().is_none_or(|bt| &text < bt) {
                    best_text = Some(text);
                    best_idx = cand;
                }
                current.swap(pos, cand);
            }
            current.swap(pos, best_idx);
        }
    }
    let (_, out, free) = apply(&current);
    (out, free)
}

fn factorial(n: usize) -> usize {
    (1..=n).fold(1, usize::saturating_mul)
}

fn search<'a, T>(groups: &[(usize, usize)], g: usize, current: &mut Vec<&'a T>, visit: &mut dyn FnMut(&[&'a T])) {
    let Some(&(a, b)) = groups.get(g) else {
        visit(current);
        return;
    };
    permute(b, a, current, &mut |cur| search(groups, g + 1, cur, visit));
}

/// Every order of `current[k..b]`.
fn permute<'a, T>(b: usize, k: usize, current: &mut Vec<&'a T>, visit: &mut dyn FnMut(&mut Vec<&'a T>)) {
    if k + 1 >= b {
        visit(current);
        return;
    }
    for i in k..b {
        current.swap(k, i);
        permute(b, k + 1, current, visit);
        current.swap(k, i);
    }
}
