//! MiniC lexer.
//!
//! Hand-rolled scanner producing a flat token stream with 1-based
//! line/column positions. Comments (`//` and `/* */`) and whitespace
//! are skipped. Numeric literals keep their suffix (`f` for float,
//! `L` for long); an unsuffixed fraction is a double.

use std::fmt;

use thiserror::Error;

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    IntLit(i64),
    LongLit(i64),
    FloatLit(f32),
    DoubleLit(f64),
    CharLit(u8),
    /// Keywords keep their spelling.
    Kw(&'static str),
    /// Punctuation and operators keep their spelling.
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::IntLit(v) => write!(f, "integer literal `{v}`"),
            Tok::LongLit(v) => write!(f, "long literal `{v}L`"),
            Tok::FloatLit(v) => write!(f, "float literal `{v}f`"),
            Tok::DoubleLit(v) => write!(f, "double literal `{v}`"),
            Tok::CharLit(v) => write!(f, "char literal `{v}`"),
            Tok::Kw(s) => write!(f, "keyword `{s}`"),
            Tok::Punct(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

/// A token with its source position.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pos}: {msg}")]
pub struct LexError {
    pub pos: Pos,
    pub msg: String,
}

const KEYWORDS: &[&str] = &[
    "int", "float", "double", "long", "char", "void", "struct", "enum", "typedef", "static",
    "const", "unsigned", "if", "else", "for", "while", "return", "new", "delete",
];

/// Multi-character operators first so maximal munch wins.
const PUNCTS: &[&str] = &[
    "<<=", ">>=", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "++", "--",
    "->", "<<", ">>", "{", "}", "(", ")", "[", "]", ";", ",", ".", "=", "+", "-", "*", "/", "%",
    "<", ">", "&", "|", "^", "!", "~", "?", ":",
];

struct Scanner<'a> {
    src: &'a [u8],
    at: usize,
    line: u32,
    col: u32,
}

impl<'a> Scanner<'a> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.at).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.at + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.at += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn starts_with(&self, s: &str) -> bool {
        self.src[self.at..].starts_with(s.as_bytes())
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek2() == Some(b'/') => {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some(b'/') if self.peek2() == Some(b'*') => {
                    let open = self.pos();
                    self.bump();
                    self.bump();
                    loop {
                        if self.peek().is_none() {
                            return Err(LexError {
                                pos: open,
                                msg: "unterminated block comment".into(),
                            });
                        }
                        if self.peek() == Some(b'*') && self.peek2() == Some(b'/') {
                            self.bump();
                            self.bump();
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn lex_number(&mut self) -> Result<Tok, LexError> {
        let pos = self.pos();
        let start = self.at;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.bump();
        }
        let mut is_fp = false;
        if self.peek() == Some(b'.') && self.peek2().is_some_and(|b| b.is_ascii_digit()) {
            is_fp = true;
            self.bump();
            while self.peek().is_some_and(|b| b.is_ascii_digit()) {
                self.bump();
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E'))
            && (self.peek2().is_some_and(|b| b.is_ascii_digit())
                || (matches!(self.peek2(), Some(b'+' | b'-'))
                    && self.src.get(self.at + 2).is_some_and(|b| b.is_ascii_digit())))
        {
            is_fp = true;
            self.bump();
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.bump();
            }
            while self.peek().is_some_and(|b| b.is_ascii_digit()) {
                self.bump();
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.at]).expect("ascii digits");
        let err = |msg: String| LexError { pos, msg };
        match self.peek() {
            Some(b'f' | b'F') => {
                self.bump();
                text.parse::<f32>()
                    .map(Tok::FloatLit)
                    .map_err(|_| err(format!("bad float literal `{text}`")))
            }
            Some(b'l' | b'L') => {
                self.bump();
                if is_fp {
                    return Err(err("`L` suffix on a fractional literal".into()));
                }
                text.parse::<i64>()
                    .map(Tok::LongLit)
                    .map_err(|_| err(format!("long literal `{text}` out of range")))
            }
            _ => {
                if is_fp {
                    text.parse::<f64>()
                        .map(Tok::DoubleLit)
                        .map_err(|_| err(format!("bad double literal `{text}`")))
                } else {
                    text.parse::<i64>()
                        .map(Tok::IntLit)
                        .map_err(|_| err(format!("integer literal `{text}` out of range")))
                }
            }
        }
    }

    fn lex_char(&mut self) -> Result<Tok, LexError> {
        let pos = self.pos();
        let err = |msg: &str| LexError { pos, msg: msg.to_string() };
        self.bump();
        let b = self.bump().ok_or_else(|| err("unterminated char literal"))?;
        let value = if b == b'\\' {
            match self.bump() {
                Some(b'n') => b'\n',
                Some(b't') => b'\t',
                Some(b'0') => 0,
                Some(b'\\') => b'\\',
                Some(b'\'') => b'\'',
                _ => return Err(err("unknown escape in char literal")),
            }
        } else {
            b
        };
        if self.bump() != Some(b'\'') {
            return Err(err("unterminated char literal"));
        }
        Ok(Tok::CharLit(value))
    }
}

/// Lex a whole source file.
pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    let mut s = Scanner { src: source.as_bytes(), at: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        s.skip_trivia()?;
        let pos = s.pos();
        let Some(b) = s.peek() else {
            out.push(Token { tok: Tok::Eof, pos });
            return Ok(out);
        };
        let tok = if b.is_ascii_digit() {
            s.lex_number()?
        } else if b == b'\'' {
            s.lex_char()?
        } else if b.is_ascii_alphabetic() || b == b'_' {
            let start = s.at;
            while s.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                s.bump();
            }
            let word = std::str::from_utf8(&s.src[start..s.at]).expect("ascii word");
            match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word.to_string()),
            }
        } else if let Some(p) = PUNCTS.iter().find(|p| s.starts_with(p)) {
            for _ in 0..p.len() {
                s.bump();
            }
            Tok::Punct(p)
        } else {
            return Err(LexError { pos, msg: format!("unexpected character `{}`", b as char) });
        };
        out.push(Token { tok, pos });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn scans_declaration() {
        assert_eq!(
            toks("int x = 3;"),
            vec![
                Tok::Kw("int"),
                Tok::Ident("x".into()),
                Tok::Punct("="),
                Tok::IntLit(3),
                Tok::Punct(";"),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn literal_suffixes_pick_types() {
        assert_eq!(toks("2.5f")[0], Tok::FloatLit(2.5));
        assert_eq!(toks("2.5")[0], Tok::DoubleLit(2.5));
        assert_eq!(toks("7L")[0], Tok::LongLit(7));
        assert_eq!(toks("7")[0], Tok::IntLit(7));
        assert_eq!(toks("1e3")[0], Tok::DoubleLit(1000.0));
        assert_eq!(toks("'a'")[0], Tok::CharLit(b'a'));
        assert_eq!(toks("'\\n'")[0], Tok::CharLit(b'\n'));
    }

    #[test]
    fn maximal_munch_on_operators() {
        assert_eq!(
            toks("a<=b==c&&d"),
            vec![
                Tok::Ident("a".into()),
                Tok::Punct("<="),
                Tok::Ident("b".into()),
                Tok::Punct("=="),
                Tok::Ident("c".into()),
                Tok::Punct("&&"),
                Tok::Ident("d".into()),
                Tok::Eof,
            ]
        );
        assert_eq!(toks("i++")[1], Tok::Punct("++"));
        assert_eq!(toks("x+=1")[1], Tok::Punct("+="));
    }

    #[test]
    fn comments_are_trivia() {
        assert_eq!(toks("int /* hé */ x; // tail\n"), toks("int x;"));
        assert!(lex("/* open").is_err());
    }

    #[test]
    fn positions_are_one_based() {
        let ts = lex("int\n  x;").unwrap();
        assert_eq!(ts[0].pos, Pos { line: 1, col: 1 });
        assert_eq!(ts[1].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn dot_without_digits_is_member_access() {
        assert_eq!(
            toks("p.x"),
            vec![Tok::Ident("p".into()), Tok::Punct("."), Tok::Ident("x".into()), Tok::Eof]
        );
    }
}
