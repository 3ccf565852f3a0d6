//! Minimal s-expression reader shared by the source, tail and proc formats.
//! Comments run from `;` to the end of the line.

use super::ProgramError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a, _) => Some(a),
            Sexp::List(..) => None,
        }
    }
}

/// Reads every top-level form in `text`.
pub fn read_all(text: &str) -> Result<Vec<Sexp>, ProgramError> {
    let mut reader = Reader { chars: text.chars().collect(), idx: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        reader.skip_blank();
        if reader.peek().is_none() {
            return Ok(out);
        }
        out.push(reader.read()?);
    }
}

struct Reader {
    chars: Vec<char>,
    idx: usize,
    line: usize,
    col: usize,
}

impl Reader {
    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.idx).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.idx += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(c) = self.peek() {
            if c == ';' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, ProgramError> {
        self.skip_blank();
        let start = self.pos();
        match self.peek() {
            None => Err(ProgramError::syntax(start, "unexpected end of input")),
            Some(')') => Err(ProgramError::syntax(start, "unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.peek() {
                        None => return Err(ProgramError::syntax(self.pos(), "unbalanced `(`: missing `)`")),
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(_) => {
                let mut atom = String::new();
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    self.bump();
                }
                Ok(Sexp::Atom(atom, start))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_and_skips_comments() {
        let forms = read_all("; header\n(a (b c)) ; trailing\n d").unwrap();
        assert_eq!(forms.len(), 2);
        assert_eq!(forms[1].as_atom(), Some("d"));
        assert_eq!(forms[1].pos(), Pos { line: 3, col: 2 });
    }

    #[test]
    fn unbalanced_input_is_positioned() {
        let err = read_all("(run (watch s 0").unwrap_err();
        assert!(matches!(err, ProgramError::Syntax { line: 1, .. }));
        assert!(read_all(")").is_err());
    }
}
