use std::fmt;

use super::{Phase, Pos, SqlError};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    /// Unquoted identifier or keyword, as written.
    Word(String),
    /// Double-quoted identifier, unescaped.
    Quoted(String),
    Int(i64),
    Float(f64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Semicolon,
    Dot,
    Star,
    Plus,
    Minus,
    Slash,
    Eq,
    NotEq,
    Lt,
    Gt,
    LtEq,
    GtEq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "'{w}'"),
            Tok::Quoted(w) => write!(f, "\"{w}\""),
            Tok::Int(i) => write!(f, "{i}"),
            Tok::Float(x) => write!(f, "{x:?}"),
            Tok::Str(s) => write!(f, "string '{s}'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Comma => f.write_str("','"),
            Tok::Semicolon => f.write_str("';'"),
            Tok::Dot => f.write_str("'.'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::Eq => f.write_str("'='"),
            Tok::NotEq => f.write_str("'<>'"),
            Tok::Lt => f.write_str("'<'"),
            Tok::Gt => f.write_str("'>'"),
            Tok::LtEq => f.write_str("'<='"),
            Tok::GtEq => f.write_str("'>='"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }
}

fn lex_error(message: impl Into<String>, pos: Pos) -> SqlError {
    SqlError::new(Phase::Lex, message, Some(pos))
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SqlError> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    let mut out = Vec::new();
    loop {
        while cur.peek().is_some_and(char::is_whitespace) {
            cur.bump();
        }
        let pos = cur.pos;
        let Some(c) = cur.peek() else {
            out.push(Token { tok: Tok::Eof, pos });
            return Ok(out);
        };
        if c == '-' {
            cur.bump();
            if cur.eat('-') {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
                continue;
            }
            out.push(Token {
                tok: Tok::Minus,
                pos,
            });
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut w = String::new();
            while let Some(c) = cur
                .peek()
                .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
            {
                w.push(c);
                cur.bump();
            }
            Tok::Word(w)
        } else if c.is_ascii_digit() {
            number(&mut cur, pos)?
        } else {
            cur.bump();
            match c {
                '"' => Tok::Quoted(quoted(&mut cur, '"', pos)?),
                '\'' => Tok::Str(quoted(&mut cur, '\'', pos)?),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                ';' => Tok::Semicolon,
                '.' => Tok::Dot,
                '*' => Tok::Star,
                '+' => Tok::Plus,
                '/' => Tok::Slash,
                '=' => Tok::Eq,
                '!' if cur.eat('=') => Tok::NotEq,
                '<' if cur.eat('=') => Tok::LtEq,
                '<' if cur.eat('>') => Tok::NotEq,
                '<' => Tok::Lt,
                '>' if cur.eat('=') => Tok::GtEq,
                '>' => Tok::Gt,
                other => return Err(lex_error(format!("unexpected character '{other}'"), pos)),
            }
        };
        out.push(Token { tok, pos });
    }
}

fn quoted(cur: &mut Cursor<'_>, q: char, start: Pos) -> Result<String, SqlError> {
    let mut s = String::new();
    loop {
        match cur.bump() {
            None => {
                let what = if q == '"' { "identifier" } else { "string" };
                return Err(lex_error(format!("unterminated quoted {what}"), start));
            }
            Some(c) if c == q => {
                if cur.eat(q) {
                    s.push(q);
                } else {
                    return Ok(s);
                }
            }
            Some(c) => s.push(c),
        }
    }
}

fn number(cur: &mut Cursor<'_>, start: Pos) -> Result<Tok, SqlError> {
    let mut s = String::new();
    let mut float = false;
    let digits = |cur: &mut Cursor<'_>, s: &mut String| {
        while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
            s.push(c);
            cur.bump();
        }
    };
    digits(cur, &mut s);
    if cur.peek() == Some('.') {
        float = true;
        s.push('.');
        cur.bump();
        digits(cur, &mut s);
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        float = true;
        s.push('e');
        cur.bump();
        if let Some(sign) = cur.peek().filter(|c| *c == '+' || *c == '-') {
            s.push(sign);
            cur.bump();
        }
        let before = s.len();
        digits(cur, &mut s);
        if s.len() == before {
            return Err(lex_error("malformed exponent in number", start));
        }
    }
    if cur
        .peek()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
    {
        return Err(lex_error(
            "identifiers cannot start with a digit; quote them with \"...\"",
            start,
        ));
    }
    if float {
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Tok::Float(x)),
            _ => Err(lex_error(format!("number {s} is out of range"), start)),
        }
    } else {
        s.parse::<i64>()
            .map(Tok::Int)
            .map_err(|_| lex_error(format!("integer {s} is out of range"), start))
    }
}
