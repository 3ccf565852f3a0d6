use std::fmt::Write;

use crate::syntax::sexpr::{read_all, Sexp};
use crate::syntax::{parse_ident, parse_signal, ProgramError};

use super::{BranchP, Proc, ProcDef, ProcDefs};

pub fn print_proc(p: &Proc) -> String {
    let mut out = String::new();
    write_proc(&mut out, p);
    out
}

pub fn print_branch_p(b: &BranchP) -> String {
    let mut out = String::new();
    write_branch(&mut out, b);
    out
}

fn write_proc(out: &mut String, p: &Proc) {
    match p {
        Proc::Nil => out.push('0'),
        Proc::Emit(s) => write!(out, "(emit {s})").unwrap(),
        Proc::Present(s, then, b) => {
            write!(out, "(present {s} ").unwrap();
            write_proc(out, then);
            out.push(' ');
            write_branch(out, b);
            out.push(')');
        }
        Proc::Par(a, b) => {
            out.push_str("(par ");
            write_proc(out, a);
            out.push(' ');
            write_proc(out, b);
            out.push(')');
        }
        Proc::Nu(s, body) => {
            write!(out, "(new {s} ").unwrap();
            write_proc(out, body);
            out.push(')');
        }
        Proc::Call(id, args) => {
            write!(out, "(call {id}").unwrap();
            for a in args {
                write!(out, " {a}").unwrap();
            }
            out.push(')');
        }
    }
}

fn write_branch(out: &mut String, b: &BranchP) {
    match b {
        BranchP::Leaf(p) => write_proc(out, p),
        BranchP::Ite(s, a, c) => {
            write!(out, "(ite {s} ").unwrap();
            write_branch(out, a);
            out.push(' ');
            write_branch(out, c);
            out.push(')');
        }
    }
}

/// Parses one process expression. `par` takes any number of operands.
pub fn parse_proc(text: &str) -> Result<Proc, ProgramError> {
    let forms = read_all(text)?;
    match forms.as_slice() {
        [form] => proc_of(form),
        _ => Err(ProgramError::syntax(Default::default(), "expected exactly one process")),
    }
}

/// `(def (A x ...) P)` equations and `(run P)` processes, run in parallel.
/// `input`/`output` declarations are accepted and ignored.
pub fn parse_proc_program(text: &str) -> Result<(Proc, ProcDefs), ProgramError> {
    let mut defs = ProcDefs::new();
    let mut runs = Vec::new();
    for form in read_all(text)? {
        let Sexp::List(items, pos) = &form else {
            return Err(ProgramError::syntax(form.pos(), "expected a declaration"));
        };
        match items.first().and_then(Sexp::as_atom) {
            Some("input" | "output") => {}
            Some("def") => {
                let [_, Sexp::List(header, hpos), body] = items.as_slice() else {
                    return Err(ProgramError::syntax(*pos, "expected (def (A x ...) P)"));
                };
                let id = parse_ident(header.first().ok_or_else(|| ProgramError::syntax(*hpos, "expected an identifier"))?)?;
                let params = header[1..].iter().map(parse_signal).collect::<Result<Vec<_>, _>>()?;
                let body = proc_of(body)?;
                if defs.insert(id.clone(), ProcDef { id: id.clone(), params, body }).is_some() {
                    return Err(ProgramError::DuplicateDefinition(id.to_string()));
                }
            }
            Some("run") => {
                for item in &items[1..] {
                    runs.push(proc_of(item)?);
                }
            }
            _ => return Err(ProgramError::syntax(*pos, "expected input, output, def or run")),
        }
    }
    if runs.is_empty() {
        return Err(ProgramError::EmptyProgram);
    }
    let mut err = Ok(());
    let mut check = |p: &Proc| {
        p.visit_calls(&mut |id| {
            if err.is_ok() && !defs.contains_key(id) {
                err = Err(ProgramError::UnboundIdentifier(id.to_string()));
            }
        })
    };
    runs.iter().for_each(&mut check);
    defs.values().for_each(|d| check(&d.body));
    err?;
    let mut arity = Ok(());
    for p in runs.iter().chain(defs.values().map(|d| &d.body)) {
        visit_call_args(p, &mut |id, found| {
            let expected = defs[id].params.len();
            if arity.is_ok() && expected != found {
                arity = Err(ProgramError::ArityMismatch { name: id.to_string(), expected, found });
            }
        });
    }
    arity?;
    Ok((Proc::par_all(runs), defs))
}

fn visit_call_args(p: &Proc, f: &mut impl FnMut(&crate::syntax::Ident, usize)) {
    match p {
        Proc::Nil | Proc::Emit(_) => {}
        Proc::Call(id, args) => f(id, args.len()),
        Proc::Present(_, a, b) => {
            visit_call_args(a, f);
            visit_branch_args(b, f);
        }
        Proc::Par(a, b) => {
            visit_call_args(a, f);
            visit_call_args(b, f);
        }
        Proc::Nu(_, a) => visit_call_args(a, f),
    }
}

fn visit_branch_args(b: &BranchP, f: &mut impl FnMut(&crate::syntax::Ident, usize)) {
    match b {
        BranchP::Leaf(p) => visit_call_args(p, f),
        BranchP::Ite(_, a, c) => {
            visit_branch_args(a, f);
            visit_branch_args(c, f);
        }
    }
}

pub fn print_proc_program(p: &Proc, defs: &ProcDefs) -> String {
    let mut out = String::new();
    for d in defs.values() {
        write!(out, "(def ({}", d.id).unwrap();
        for x in &d.params {
            write!(out, " {x}").unwrap();
        }
        writeln!(out, ") {})", print_proc(&d.body)).unwrap();
    }
    writeln!(out, "(run {})", print_proc(p)).unwrap();
    out
}

fn proc_of(form: &Sexp) -> Result<Proc, ProgramError> {
    let (items, pos) = match form {
        Sexp::Atom(a, _) if a == "0" => return Ok(Proc::Nil),
        Sexp::Atom(a, pos) => return Err(ProgramError::syntax(*pos, format!("expected a process, found `{a}`"))),
        Sexp::List(items, pos) => (items, *pos),
    };
    let head = items.first().and_then(Sexp::as_atom).ok_or_else(|| ProgramError::syntax(pos, "expected a keyword"))?;
    let args = &items[1..];
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(ProgramError::syntax(pos, format!("`{head}` expects {n} arguments, found {}", args.len())))
        }
    };
    Ok(match head {
        "emit" => {
            arity(1)?;
            Proc::Emit(parse_signal(&args[0])?)
        }
        "new" => {
            arity(2)?;
            Proc::Nu(parse_signal(&args[0])?, Box::new(proc_of(&args[1])?))
        }
        "par" => Proc::par_all(args.iter().map(proc_of).collect::<Result<Vec<_>, _>>()?),
        "present" => {
            arity(3)?;
            Proc::Present(parse_signal(&args[0])?, Box::new(proc_of(&args[1])?), Box::new(branch_of(&args[2])?))
        }
        "call" => {
            let id = parse_ident(args.first().ok_or_else(|| ProgramError::syntax(pos, "`call` expects an identifier"))?)?;
            Proc::Call(id, args[1..].iter().map(parse_signal).collect::<Result<_, _>>()?)
        }
        "ite" => return Err(ProgramError::syntax(pos, "`ite` may only appear in the else branch of `present`")),
        other => return Err(ProgramError::syntax(pos, format!("unknown process `{other}`"))),
    })
}

fn branch_of(form: &Sexp) -> Result<BranchP, ProgramError> {
    if let Sexp::List(items, pos) = form {
        if items.first().and_then(Sexp::as_atom) == Some("ite") {
            let [_, s, a, b] = items.as_slice() else {
                return Err(ProgramError::syntax(*pos, "expected (ite s b1 b2)"));
            };
            return Ok(BranchP::Ite(parse_signal(s)?, Box::new(branch_of(a)?), Box::new(branch_of(b)?)));
        }
    }
    Ok(BranchP::Leaf(proc_of(form)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "(present s1 0 (ite s2 (par (emit s3) (new g (present g 0 0))) 0))";
        let p = parse_proc(text).unwrap();
        assert_eq!(parse_proc(&print_proc(&p)).unwrap(), p);
    }

    #[test]
    fn programs_check_arity() {
        assert!(parse_proc_program("(def (A x) (emit x))(run (call A))").is_err());
        let (p, defs) = parse_proc_program("(def (A x) (emit x))(run (call A s) (emit t))").unwrap();
        assert_eq!(defs.len(), 1);
        assert_eq!(parse_proc_program(&print_proc_program(&p, &defs)).unwrap(), (p, defs));
    }
}
