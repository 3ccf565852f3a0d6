use std::collections::HashMap;
use std::fmt::Write;

use super::{indices, mask_of, MealyError, MonotonicMealy, MAX_INPUTS};

fn fmt_indices(mask: u32) -> String {
    let items: Vec<String> = indices(mask).iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// Text form: a `mealy n=<n> m=<m>` header, `state <name> [init]` lines and
/// one `trans <q> {i,...} -> <q'> {o,...}` line per state and input set.
pub fn print_mealy(m: &MonotonicMealy) -> String {
    let mut out = format!("mealy n={} m={}\n", m.n, m.m);
    for (k, name) in m.states.iter().enumerate() {
        let init = if k == m.init { " init" } else { "" };
        writeln!(out, "state {name}{init}").unwrap();
    }
    for (k, name) in m.states.iter().enumerate() {
        for x in 0..(1u32 << m.n) {
            let to = &m.states[m.next[k][x as usize]];
            writeln!(out, "trans {name} {} -> {to} {}", fmt_indices(x), fmt_indices(m.output[k][x as usize])).unwrap();
        }
    }
    out
}

fn parse_set(text: &str, bound: usize, line: usize) -> Result<u32, MealyError> {
    let err = |message: String| MealyError::Format { line, message };
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| err(format!("expected a set like {{1,2}}, found `{text}`")))?;
    let mut items = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let k: usize = part.parse().map_err(|_| err(format!("`{part}` is not an index")))?;
        if k == 0 || k > bound {
            return Err(err(format!("index {k} is out of range 1..={bound}")));
        }
        items.push(k);
    }
    Ok(mask_of(&items))
}

pub fn parse_mealy(text: &str) -> Result<MonotonicMealy, MealyError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(MealyError::Format { line: 1, message: "empty machine".into() })?;
    let err = |line, message: &str| MealyError::Format { line, message: message.to_string() };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, m) = match fields.as_slice() {
        ["mealy", n, m] => {
            let num = |f: &str, key: &str| f.strip_prefix(key).and_then(|v| v.parse::<usize>().ok());
            match (num(n, "n="), num(m, "m=")) {
                (Some(n), Some(m)) => (n, m),
                _ => return Err(err(hline, "expected `mealy n=<n> m=<m>`")),
            }
        }
        _ => return Err(err(hline, "expected `mealy n=<n> m=<m>`")),
    };
    if n > MAX_INPUTS {
        return Err(MealyError::ArityTooLarge(n));
    }
    if m > 32 {
        return Err(err(hline, "at most 32 outputs are supported"));
    }
    let mut states: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut init = None;
    let mut trans: Vec<(usize, String, u32, String, u32)> = Vec::new();
    for (line, text) in lines {
        let fields: Vec<&str> = text.split_whitespace().collect();
        match fields.as_slice() {
            ["state", name, rest @ ..] => {
                if index.insert(name.to_string(), states.len()).is_some() {
                    return Err(err(line, "state declared twice"));
                }
                match rest {
                    [] => {}
                    ["init"] if init.is_none() => init = Some(states.len()),
                    ["init"] => return Err(err(line, "second initial state")),
                    _ => return Err(err(line, "expected `state <name> [init]`")),
                }
                states.push(name.to_string());
            }
            ["trans", from, x, "->", to, o] => {
                trans.push((line, from.to_string(), parse_set(x, n, line)?, to.to_string(), parse_set(o, m, line)?));
            }
            _ => return Err(err(line, "expected a `state` or `trans` line")),
        }
    }
    let init = init.ok_or_else(|| err(hline, "no initial state"))?;
    let size = 1usize << n;
    let mut next = vec![vec![usize::MAX; size]; states.len()];
    let mut output = vec![vec![0; size]; states.len()];
    for (line, from, x, to, o) in trans {
        let q = *index.get(&from).ok_or_else(|| err(line, "unknown state"))?;
        let p = *index.get(&to).ok_or_else(|| err(line, "unknown state"))?;
        if next[q][x as usize] != usize::MAX {
            return Err(err(line, "transition given twice"));
        }
        next[q][x as usize] = p;
        output[q][x as usize] = o;
    }
    for (q, row) in next.iter().enumerate() {
        if let Some(x) = row.iter().position(|&p| p == usize::MAX) {
            return Err(MealyError::Format {
                line: 0,
                message: format!("state `{}` has no transition for {}", states[q], fmt_indices(x as u32)),
            });
        }
    }
    let machine = MonotonicMealy { n, m, states, init, next, output };
    machine.validate()?;
    Ok(machine)
}
