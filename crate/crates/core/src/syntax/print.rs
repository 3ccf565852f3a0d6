use std::collections::BTreeSet;
use std::fmt::Write;

use super::{ProgramError, Signal, SourceProgram, Thread};

/// Prints a thread in the concrete syntax. Sequences are flattened.
pub fn print_thread(t: &Thread) -> String {
    let mut out = String::new();
    write_thread(&mut out, t);
    out
}

fn write_thread(out: &mut String, t: &Thread) {
    match t {
        Thread::Nil => out.push('0'),
        Thread::Pause => out.push_str("pause"),
        Thread::Seq(..) => {
            out.push_str("(seq");
            let mut cur = t;
            while let Thread::Seq(a, b) = cur {
                out.push(' ');
                write_thread(out, a);
                cur = b;
            }
            out.push(' ');
            write_thread(out, cur);
            out.push(')');
        }
        Thread::Emit(s) => write!(out, "(emit {s})").unwrap(),
        Thread::Await(s) => write!(out, "(await {s})").unwrap(),
        Thread::New(s, body) => {
            write!(out, "(new {s} ").unwrap();
            write_thread(out, body);
            out.push(')');
        }
        Thread::Spawn(body) => {
            out.push_str("(thread ");
            write_thread(out, body);
            out.push(')');
        }
        Thread::Watch(s, body) => {
            write!(out, "(watch {s} ").unwrap();
            write_thread(out, body);
            out.push(')');
        }
        Thread::Call(id, args) => {
            write!(out, "(call {id}").unwrap();
            for a in args {
                write!(out, " {a}").unwrap();
            }
            out.push(')');
        }
    }
}

/// Prints a whole program; the result parses back to the same program.
pub fn print_program(p: &SourceProgram) -> Result<String, ProgramError> {
    if p.initial.is_empty() {
        return Err(ProgramError::EmptyProgram);
    }
    let mut out = String::new();
    let names = |set: &BTreeSet<Signal>| set.iter().map(|s| format!(" {s}")).collect::<String>();
    writeln!(out, "(input{})", names(&p.interface.inputs)).unwrap();
    writeln!(out, "(output{})", names(&p.interface.outputs)).unwrap();
    for def in p.defs.values() {
        write!(out, "(def ({}", def.id).unwrap();
        for x in &def.params {
            write!(out, " {x}").unwrap();
        }
        writeln!(out, ") {})", print_thread(&def.body)).unwrap();
    }
    for t in &p.initial {
        writeln!(out, "(run {})", print_thread(t)).unwrap();
    }
    Ok(out)
}
