//! A small S-expression reader for the SMT-LIB subset used by the input
//! language, the emitted EUF+LIA scripts and external solver responses.

use std::fmt;

use thiserror::Error;

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SexpKind {
    Symbol(String),
    Keyword(String),
    Numeral(String),
    Str(String),
    List(Vec<Sexp>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sexp {
    pub kind: SexpKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("syntax error at {line}:{col}: {msg}")]
pub struct SexpError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl Sexp {
    pub fn as_symbol(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match &self.kind {
            SexpKind::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_numeral(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Numeral(n) => Some(n),
            _ => None,
        }
    }

    /// Head symbol of a list, if the list starts with a symbol.
    pub fn head_symbol(&self) -> Option<&str> {
        self.as_list()?.first()?.as_symbol()
    }

    pub fn error(&self, msg: impl Into<String>) -> SexpError {
        SexpError {
            line: self.pos.line,
            col: self.pos.col,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SexpKind::Symbol(s) => write!(f, "{s}"),
            SexpKind::Keyword(s) => write!(f, ":{s}"),
            SexpKind::Numeral(n) => write!(f, "{n}"),
            SexpKind::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            SexpKind::List(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> SexpError {
        SexpError {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn read(&mut self) -> Result<Option<Sexp>, SexpError> {
        self.skip_ws();
        let pos = self.pos();
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        match c {
            '(' => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        None => {
                            return Err(SexpError {
                                line: pos.line,
                                col: pos.col,
                                msg: "unclosed parenthesis".into(),
                            })
                        }
                        Some(')') => {
                            self.bump();
                            break;
                        }
                        Some(_) => {
                            if let Some(item) = self.read()? {
                                items.push(item);
                            }
                        }
                    }
                }
                Ok(Some(Sexp {
                    kind: SexpKind::List(items),
                    pos,
                }))
            }
            ')' => Err(self.err("unexpected ')'")),
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err("unterminated string literal")),
                        Some('"') => {
                            if self.chars.peek() == Some(&'"') {
                                self.bump();
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(c) => s.push(c),
                    }
                }
                Ok(Some(Sexp {
                    kind: SexpKind::Str(s),
                    pos,
                }))
            }
            '|' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err("unterminated quoted symbol")),
                        Some('|') => break,
                        Some(c) => s.push(c),
                    }
                }
                Ok(Some(Sexp {
                    kind: SexpKind::Symbol(s),
                    pos,
                }))
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' || c == '"' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                let kind = if let Some(k) = s.strip_prefix(':') {
                    SexpKind::Keyword(k.to_string())
                } else if s.chars().all(|c| c.is_ascii_digit()) {
                    SexpKind::Numeral(s)
                } else {
                    SexpKind::Symbol(s)
                };
                Ok(Some(Sexp { kind, pos }))
            }
        }
    }
}

/// Reads every top-level S-expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let mut reader = Reader {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(s) = reader.read()? {
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let all = parse_all("(assert\n  (= x (cons y nil)))").unwrap();
        assert_eq!(all.len(), 1);
        let items = all[0].as_list().unwrap();
        assert_eq!(items[0].as_symbol(), Some("assert"));
        assert_eq!(items[1].pos, Pos { line: 2, col: 3 });
        assert_eq!(all[0].to_string(), "(assert (= x (cons y nil)))");
    }

    #[test]
    fn comments_numerals_keywords() {
        let all = parse_all("; hi\n(set-option :produce-models true) 42 |a b|").unwrap();
        assert_eq!(all.len(), 3);
        assert_eq!(all[1].as_numeral(), Some("42"));
        assert_eq!(all[2].as_symbol(), Some("a b"));
    }

    #[test]
    fn unbalanced_input_reports_position() {
        let err = parse_all("(assert (= x y)").unwrap_err();
        assert_eq!((err.line, err.col), (1, 1));
        let err = parse_all("x )").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }
}
