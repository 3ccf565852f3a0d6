use std::fmt::Write;

use crate::syntax::sexpr::{read_all, Sexp};
use crate::syntax::{parse_ident, parse_signal, Interface, ProgramError};

use super::{Branch, TailDef, TailDefs, TailExpr, TailProgram};

pub fn print_tail(t: &TailExpr) -> String {
    let mut out = String::new();
    write_tail(&mut out, t);
    out
}

pub fn print_branch(b: &Branch) -> String {
    let mut out = String::new();
    write_branch(&mut out, b);
    out
}

fn write_tail(out: &mut String, t: &TailExpr) {
    match t {
        TailExpr::Nil => out.push('0'),
        TailExpr::Emit(s, next) => {
            write!(out, "(emit! {s} ").unwrap();
            write_tail(out, next);
            out.push(')');
        }
        TailExpr::New(s, body) => {
            write!(out, "(new {s} ").unwrap();
            write_tail(out, body);
            out.push(')');
        }
        TailExpr::Spawn(a, b) => {
            out.push_str("(thread! ");
            write_tail(out, a);
            out.push(' ');
            write_tail(out, b);
            out.push(')');
        }
        TailExpr::Present(s, then, b) => {
            write!(out, "(present {s} ").unwrap();
            write_tail(out, then);
            out.push(' ');
            write_branch(out, b);
            out.push(')');
        }
        TailExpr::Call(id, args) => {
            write!(out, "(call {id}").unwrap();
            for a in args {
                write!(out, " {a}").unwrap();
            }
            out.push(')');
        }
    }
}

fn write_branch(out: &mut String, b: &Branch) {
    match b {
        Branch::Leaf(t) => write_tail(out, t),
        Branch::Ite(s, a, c) => {
            write!(out, "(ite {s} ").unwrap();
            write_branch(out, a);
            out.push(' ');
            write_branch(out, c);
            out.push(')');
        }
    }
}

pub fn print_tail_program(p: &TailProgram) -> Result<String, ProgramError> {
    if p.initial.is_empty() {
        return Err(ProgramError::EmptyProgram);
    }
    let mut out = String::new();
    let names = |set: &std::collections::BTreeSet<crate::syntax::Signal>| {
        set.iter().map(|s| format!(" {s}")).collect::<String>()
    };
    writeln!(out, "(input{})", names(&p.interface.inputs)).unwrap();
    writeln!(out, "(output{})", names(&p.interface.outputs)).unwrap();
    for def in p.defs.values() {
        write!(out, "(def ({}", def.id).unwrap();
        for x in &def.params {
            write!(out, " {x}").unwrap();
        }
        writeln!(out, ") {})", print_tail(&def.body)).unwrap();
    }
    for t in &p.initial {
        writeln!(out, "(run {})", print_tail(t)).unwrap();
    }
    Ok(out)
}

pub fn parse_tail_program(text: &str) -> Result<TailProgram, ProgramError> {
    let mut interface = Interface::default();
    let mut defs = TailDefs::new();
    let mut initial = Vec::new();
    for form in read_all(text)? {
        let Sexp::List(items, pos) = &form else {
            return Err(ProgramError::syntax(form.pos(), "expected a declaration"));
        };
        let head = items.first().and_then(Sexp::as_atom).ok_or_else(|| ProgramError::syntax(*pos, "expected a keyword"))?;
        match head {
            "input" => {
                for item in &items[1..] {
                    interface.inputs.insert(parse_signal(item)?);
                }
            }
            "output" => {
                for item in &items[1..] {
                    interface.outputs.insert(parse_signal(item)?);
                }
            }
            "def" => {
                let [_, Sexp::List(header, hpos), body] = items.as_slice() else {
                    return Err(ProgramError::syntax(*pos, "expected (def (A x ...) t)"));
                };
                let id = parse_ident(header.first().ok_or_else(|| ProgramError::syntax(*hpos, "expected an identifier"))?)?;
                let params = header[1..].iter().map(parse_signal).collect::<Result<Vec<_>, _>>()?;
                let body = parse_tail(body)?;
                if defs.insert(id.clone(), TailDef { id: id.clone(), params, body }).is_some() {
                    return Err(ProgramError::DuplicateDefinition(id.to_string()));
                }
            }
            "run" => {
                for item in &items[1..] {
                    initial.push(parse_tail(item)?);
                }
            }
            other => return Err(ProgramError::syntax(*pos, format!("unknown declaration `{other}`"))),
        }
    }
    let p = TailProgram { interface, defs, initial };
    p.validate()?;
    Ok(p)
}

fn parse_tail(form: &Sexp) -> Result<TailExpr, ProgramError> {
    let (items, pos) = match form {
        Sexp::Atom(a, _) if a == "0" => return Ok(TailExpr::Nil),
        Sexp::Atom(a, pos) => return Err(ProgramError::syntax(*pos, format!("expected a tail thread, found `{a}`"))),
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
        "emit!" => {
            arity(2)?;
            TailExpr::Emit(parse_signal(&args[0])?, Box::new(parse_tail(&args[1])?))
        }
        "new" => {
            arity(2)?;
            TailExpr::New(parse_signal(&args[0])?, Box::new(parse_tail(&args[1])?))
        }
        "thread!" => {
            arity(2)?;
            TailExpr::Spawn(Box::new(parse_tail(&args[0])?), Box::new(parse_tail(&args[1])?))
        }
        "present" => {
            arity(3)?;
            TailExpr::Present(parse_signal(&args[0])?, Box::new(parse_tail(&args[1])?), Box::new(parse_branch(&args[2])?))
        }
        "call" => {
            let id = parse_ident(args.first().ok_or_else(|| ProgramError::syntax(pos, "`call` expects an identifier"))?)?;
            TailExpr::Call(id, args[1..].iter().map(parse_signal).collect::<Result<_, _>>()?)
        }
        "ite" => return Err(ProgramError::syntax(pos, "`ite` may only appear in the else branch of `present`")),
        other => return Err(ProgramError::syntax(pos, format!("unknown tail instruction `{other}`"))),
    })
}

fn parse_branch(form: &Sexp) -> Result<Branch, ProgramError> {
    if let Sexp::List(items, pos) = form {
        if items.first().and_then(Sexp::as_atom) == Some("ite") {
            let [_, s, a, b] = items.as_slice() else {
                return Err(ProgramError::syntax(*pos, "expected (ite s b1 b2)"));
            };
            return Ok(Branch::Ite(parse_signal(s)?, Box::new(parse_branch(a)?), Box::new(parse_branch(b)?)));
        }
    }
    Ok(Branch::Leaf(parse_tail(form)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "(input s1 s2)(output o)(def (A x) (present x (emit! o (call A x)) (ite s1 (call A x) (new g (present g 0 0)))))(run (thread! (call A s2) 0))";
        let p = parse_tail_program(text).unwrap();
        assert_eq!(parse_tail_program(&print_tail_program(&p).unwrap()).unwrap(), p);
    }

    #[test]
    fn ite_outside_branch_is_rejected() {
        assert!(parse_tail_program("(input a)(run (ite a 0 0))").is_err());
    }
}
