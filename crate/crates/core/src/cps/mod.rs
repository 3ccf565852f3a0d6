//! Continuation-passing translation from source threads to the tail core.
//!
//! `⟦T⟧(t, τ)` takes a default continuation `t` and a list `τ` of
//! `(signal, continuation)` pairs, one per enclosing `watch`, outermost
//! first. Calls are translated to indexed equations `A^(t,τ)`, generated on
//! demand and memoized on `(A, t, τ)` up to renaming.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write};

use crate::semantics::EvalContext;
use crate::syntax::{
    Definitions, Desugarer, FreshNames, Ident, NameSupply, PauseMode, ProgramError, Rename, Renamer, Signal,
    SourceProgram, Surface, Thread,
};
use crate::tailcore::{pause_prefix, print_tail, print_tail_program, Branch, TailDef, TailDefs, TailExpr, TailProgram};

/// Watch continuations, outermost first.
pub type Kappa = Vec<(Signal, TailExpr)>;

/// How `pause` is translated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CpsPause {
    /// `⟦pause⟧(t,τ) = pause.(ite s1 t1 (... (ite sn tn t)))`
    #[default]
    Optimized,
    /// Expand `pause` into `νs now(await s)` and use the general clauses.
    Naive,
}

pub const DEFAULT_INDEX_LIMIT: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CpsOptions {
    pub pause: CpsPause,
    /// Maximum number of indexed equations.
    pub limit: usize,
}

impl Default for CpsOptions {
    fn default() -> Self {
        CpsOptions { pause: CpsPause::Optimized, limit: DEFAULT_INDEX_LIMIT }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CpsError {
    #[error("more than {0} indexed equations are needed; evaluation contexts are probably unbounded")]
    IndexExplosion(usize),
    #[error("unbound identifier `{0}`")]
    UnboundIdentifier(String),
}

/// Where a generated equation comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexEntry {
    /// `id = A^(t,τ)`, with `t` and `τ` over parameters `%pN`.
    Call { id: Ident, source: Ident, cont: TailExpr, kappa: Kappa },
    /// `id = present s t b` for an `await s` with continuation `(t,τ)`.
    Await { id: Ident, signal: Signal, cont: TailExpr, kappa: Kappa },
}

fn fmt_kappa(kappa: &Kappa) -> String {
    let pairs: Vec<String> = kappa.iter().map(|(s, t)| format!("({s}, {})", print_tail(t))).collect();
    format!("[{}]", pairs.join(" "))
}

impl fmt::Display for IndexEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexEntry::Call { id, source, cont, kappa } => {
                write!(f, "{id} = {source}^({}, {})", print_tail(cont), fmt_kappa(kappa))
            }
            IndexEntry::Await { id, signal, cont, kappa } => {
                write!(f, "{id} = await {signal}^({}, {})", print_tail(cont), fmt_kappa(kappa))
            }
        }
    }
}

/// Result of translating a program.
#[derive(Clone, Debug)]
pub struct CpsOutput {
    pub program: TailProgram,
    pub index: Vec<IndexEntry>,
}

impl CpsOutput {
    /// Tail program text preceded by a `#index` comment block.
    pub fn to_text(&self) -> Result<String, ProgramError> {
        let mut out = String::from("; #index\n");
        for e in &self.index {
            writeln!(out, "; {e}").unwrap();
        }
        out.push_str(&print_tail_program(&self.program)?);
        Ok(out)
    }
}

struct Pending {
    id: Ident,
    source: Ident,
    params: Vec<Signal>,
    cont: TailExpr,
    kappa: Kappa,
}

/// Translation state: the equation table and a name supply.
pub struct Translator<'a> {
    defs: &'a Definitions,
    options: CpsOptions,
    supply: FreshNames,
    calls: HashMap<(Ident, String), Ident>,
    awaits: HashMap<String, Ident>,
    generated: TailDefs,
    index: Vec<IndexEntry>,
    pending: VecDeque<Pending>,
    taken: BTreeSet<Ident>,
    counter: usize,
}

/// Canonical form of `(t, τ)`: free names become `%p0, %p1, ...` in
/// first-occurrence order. Returns the renamed pair, the original free names
/// and a key string.
fn canonical_index(cont: &TailExpr, kappa: &Kappa) -> (TailExpr, Kappa, Vec<Signal>, String) {
    let mut r = Renamer::with_params(&BTreeSet::new());
    let cont = cont.rename(&mut r);
    let kappa: Kappa = kappa.iter().map(|(s, t)| (r.signal(s), t.rename(&mut r))).collect();
    let key = format!("{} {}", print_tail(&cont), fmt_kappa(&kappa));
    (cont, kappa, r.free_order().to_vec(), key)
}

fn free_of(cont: &TailExpr, kappa: &Kappa) -> BTreeSet<Signal> {
    let mut out = cont.free_signals();
    for (s, t) in kappa {
        out.insert(s.clone());
        out.extend(t.free_signals());
    }
    out
}

/// `ite s1 t1 (... (ite sn tn last))`
fn cascade(kappa: &Kappa, last: TailExpr) -> Branch {
    kappa.iter().rev().fold(Branch::Leaf(last), |acc, (s, t)| Branch::ite(s, Branch::Leaf(t.clone()), acc))
}

impl<'a> Translator<'a> {
    pub fn new(program: &'a SourceProgram, options: CpsOptions) -> Self {
        Translator {
            defs: &program.defs,
            options,
            supply: FreshNames::starting_at(program.next_fresh_index()),
            calls: HashMap::new(),
            awaits: HashMap::new(),
            generated: TailDefs::new(),
            index: Vec::new(),
            pending: VecDeque::new(),
            taken: program.defs.keys().cloned().collect(),
            counter: 0,
        }
    }

    fn fresh_ident(&mut self, base: &str) -> Ident {
        loop {
            let id = Ident::new(&format!("{base}${}", self.counter));
            self.counter += 1;
            if self.taken.insert(id.clone()) {
                return id;
            }
        }
    }

    fn check_limit(&self) -> Result<(), CpsError> {
        if self.generated.len() + self.pending.len() > self.options.limit {
            Err(CpsError::IndexExplosion(self.options.limit))
        } else {
            Ok(())
        }
    }

    /// Identifier already assigned to `A^(t,τ)`, if any.
    pub fn lookup(&self, source: &Ident, cont: &TailExpr, kappa: &Kappa) -> Option<Ident> {
        let (_, _, _, key) = canonical_index(cont, kappa);
        self.calls.get(&(source.clone(), key)).cloned()
    }

    /// `⟦T⟧(t,τ)`, generating every equation it needs.
    pub fn thread(&mut self, t: &Thread, cont: TailExpr, kappa: &Kappa) -> Result<TailExpr, CpsError> {
        let out = self.translate(t, cont, kappa, None)?;
        self.drain()?;
        Ok(out)
    }

    /// `⟦C⟧(t,τ)`.
    pub fn context(&mut self, c: &EvalContext, cont: TailExpr, kappa: &Kappa) -> Result<(TailExpr, Kappa), CpsError> {
        let mut cont = cont;
        let mut kappa = kappa.clone();
        for frame in &c.frames {
            if let Some(then) = &frame.then {
                cont = self.translate(then, cont, &kappa, None)?;
            }
            kappa.push((frame.signal.clone(), cont.clone()));
        }
        if let Some(rest) = &c.rest {
            cont = self.translate(rest, cont, &kappa, None)?;
        }
        self.drain()?;
        Ok((cont, kappa))
    }

    fn drain(&mut self) -> Result<(), CpsError> {
        while let Some(p) = self.pending.pop_front() {
            let def = &self.defs[&p.source];
            // Formal parameters must not clash with the %p names of the index.
            let mut body_src = def.body.clone();
            let mut formals = def.params.clone();
            if formals.iter().any(|x| matches!(x, Signal::Param(_))) {
                let map: HashMap<Signal, Signal> =
                    formals.iter().map(|x| (x.clone(), self.supply.fresh_signal())).collect();
                body_src = body_src.substitute(&map, &mut self.supply);
                formals = formals.iter().map(|x| map[x].clone()).collect();
            }
            let mut params = formals;
            params.extend(p.params.iter().cloned());
            let head = TailExpr::call(&p.id, &params);
            let body = self.translate(&body_src, p.cont, &p.kappa, Some(head))?;
            self.generated.insert(p.id.clone(), TailDef { id: p.id, params, body });
            self.check_limit()?;
        }
        Ok(())
    }

    fn translate(&mut self, t: &Thread, cont: TailExpr, kappa: &Kappa, head: Option<TailExpr>) -> Result<TailExpr, CpsError> {
        match t {
            Thread::Nil => Ok(cont),
            Thread::Seq(a, b) => {
                let rest = self.translate(b, cont, kappa, None)?;
                self.translate(a, rest, kappa, head)
            }
            Thread::Emit(s) => Ok(TailExpr::emit(s, cont)),
            Thread::New(s, body) => {
                if free_of(&cont, kappa).contains(s) {
                    let renamed = self.supply.fresh_signal();
                    let body = body.substitute(&HashMap::from([(s.clone(), renamed.clone())]), &mut self.supply);
                    Ok(TailExpr::new_signal(&renamed, self.translate(&body, cont, kappa, None)?))
                } else {
                    Ok(TailExpr::new_signal(s, self.translate(body, cont, kappa, None)?))
                }
            }
            Thread::Spawn(body) => {
                let spawned = self.translate(body, TailExpr::Nil, &Vec::new(), None)?;
                Ok(TailExpr::spawn(spawned, cont))
            }
            Thread::Watch(s, body) => {
                let mut inner = kappa.clone();
                inner.push((s.clone(), cont.clone()));
                self.translate(body, cont, &inner, head)
            }
            Thread::Await(s) => {
                let last = match head {
                    Some(call) => call,
                    None => self.await_equation(s, &cont, kappa),
                };
                Ok(TailExpr::present(s, cont, cascade(kappa, last)))
            }
            Thread::Pause => match self.options.pause {
                CpsPause::Optimized => Ok(pause_prefix(cascade(kappa, cont), &mut self.supply)),
                CpsPause::Naive => {
                    let mut d = Desugarer::new(self.supply.peek(), PauseMode::Table1, BTreeSet::new());
                    let expanded = d.desugar(Surface::Pause);
                    self.supply = FreshNames::starting_at(d.next_fresh());
                    self.translate(&expanded, cont, kappa, None)
                }
            },
            Thread::Call(a, args) => {
                if !self.defs.contains_key(a) {
                    return Err(CpsError::UnboundIdentifier(a.to_string()));
                }
                let (ccont, ckappa, extra, key) = canonical_index(&cont, kappa);
                let id = match self.calls.get(&(a.clone(), key.clone())) {
                    Some(id) => id.clone(),
                    None => {
                        let id = self.fresh_ident(a.as_str());
                        self.calls.insert((a.clone(), key), id.clone());
                        let params = (0..extra.len() as u32).map(Signal::Param).collect();
                        self.index.push(IndexEntry::Call {
                            id: id.clone(),
                            source: a.clone(),
                            cont: ccont.clone(),
                            kappa: ckappa.clone(),
                        });
                        self.pending.push_back(Pending { id: id.clone(), source: a.clone(), params, cont: ccont, kappa: ckappa });
                        self.check_limit()?;
                        id
                    }
                };
                let mut all = args.clone();
                all.extend(extra);
                Ok(TailExpr::Call(id, all))
            }
        }
    }

    /// `A = present s t (ite s1 t1 (... A))`, returned as a call.
    fn await_equation(&mut self, s: &Signal, cont: &TailExpr, kappa: &Kappa) -> TailExpr {
        let mut r = Renamer::with_params(&BTreeSet::new());
        let cs = r.signal(s);
        let ccont = cont.rename(&mut r);
        let ckappa: Kappa = kappa.iter().map(|(x, t)| (r.signal(x), t.rename(&mut r))).collect();
        let key = format!("{cs} {} {}", print_tail(&ccont), fmt_kappa(&ckappa));
        let args = r.free_order().to_vec();
        let params: Vec<Signal> = (0..args.len() as u32).map(Signal::Param).collect();
        let id = match self.awaits.get(&key) {
            Some(id) => id.clone(),
            None => {
                let id = self.fresh_ident("await");
                self.awaits.insert(key, id.clone());
                let call = TailExpr::call(&id, &params);
                let body = TailExpr::present(&cs, ccont.clone(), cascade(&ckappa, call));
                self.index.push(IndexEntry::Await { id: id.clone(), signal: cs, cont: ccont, kappa: ckappa });
                self.generated.insert(id.clone(), TailDef { id: id.clone(), params, body });
                id
            }
        };
        TailExpr::Call(id, args)
    }

    pub fn equations(&self) -> &TailDefs {
        &self.generated
    }

    pub fn index(&self) -> &[IndexEntry] {
        &self.index
    }
}

/// `⟦P⟧ = {⟦T⟧(0,ε) | T ∈ P}` with all equations it needs.
pub fn cps_program(p: &SourceProgram, options: CpsOptions) -> Result<CpsOutput, CpsError> {
    let mut tr = Translator::new(p, options);
    let mut initial = Vec::new();
    for t in &p.initial {
        initial.push(tr.thread(t, TailExpr::Nil, &Vec::new())?);
    }
    let program = TailProgram { interface: p.interface.clone(), defs: tr.generated, initial };
    Ok(CpsOutput { program, index: tr.index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    #[test]
    fn nil_is_the_continuation() {
        let p = parse_program("(output o)(run 0)").unwrap();
        let mut tr = Translator::new(&p, CpsOptions::default());
        let k = TailExpr::emit(&Signal::named("o"), TailExpr::Nil);
        assert_eq!(tr.thread(&Thread::Nil, k.clone(), &Vec::new()).unwrap(), k);
    }

    #[test]
    fn emission_into_nil() {
        let p = parse_program("(output s)(run (seq (emit s) 0))").unwrap();
        let out = cps_program(&p, CpsOptions::default()).unwrap();
        assert_eq!(out.program.initial, vec![TailExpr::emit(&Signal::named("s"), TailExpr::Nil)]);
        assert!(out.program.defs.is_empty());
    }

    #[test]
    fn await_at_top_level_is_a_self_loop() {
        let p = parse_program("(input s)(run (await s))").unwrap();
        let out = cps_program(&p, CpsOptions::default()).unwrap();
        let [TailExpr::Present(s, then, b)] = out.program.initial.as_slice() else { panic!() };
        assert_eq!(s, &Signal::named("s"));
        assert_eq!(**then, TailExpr::Nil);
        let Branch::Leaf(TailExpr::Call(id, args)) = &**b else { panic!() };
        let def = &out.program.defs[id];
        let mut supply = FreshNames::default();
        assert_eq!(def.instantiate(args, &mut supply), out.program.initial[0]);
    }
}
