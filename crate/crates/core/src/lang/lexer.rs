//! Tokenizer. `#` starts a comment; any `-` is rejected since subtraction and negative
//! constants are not monotone.

use super::ast::Span;
use super::{ErrorKind, LangError};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(f64),
    /// `` `Name ``
    ModelRef(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Plus,
    Star,
    Slash,
    Caret,
    Eq,
    Geq,
    Leq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(x) => format!("number {x}"),
            Tok::ModelRef(s) => format!("model reference `{s}"),
            Tok::Eof => "end of input".into(),
            t => format!("`{}`", t.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Plus => "+",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Eq => "=",
            Tok::Geq => ">=",
            Tok::Leq => "<=",
            _ => "?",
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn lex(src: &str) -> Result<Vec<(Tok, Span)>, LangError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let err = |span: Span, msg: String| LangError::new(ErrorKind::Syntax, span, msg);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '-' || c == '−' {
            let negative_literal = chars.get(i + 1).is_some_and(|d| d.is_ascii_digit() || *d == '.');
            let msg = if negative_literal {
                "negative constants are not monotone and are not allowed"
            } else {
                "subtraction is not monotone and is not allowed"
            };
            return Err(err(span, msg.into()));
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // Exponent, only when followed by digits so `3 e` stays a number and a name.
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let x: f64 = text.parse().map_err(|_| err(span, format!("malformed number `{text}`")))?;
            out.push((Tok::Number(x), span));
            continue;
        }
        if c == '`' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            if j == start {
                return Err(err(span, "expected a model name after `".into()));
            }
            out.push((Tok::ModelRef(chars[start..j].iter().collect()), span));
            col += (j - i) as u32;
            i = j;
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            i += 1;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), span));
            col += (i - start) as u32;
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, n) = match (c, two.as_str()) {
            (_, ">=") => (Tok::Geq, 2),
            (_, "<=") => (Tok::Leq, 2),
            ('≥', _) => (Tok::Geq, 1),
            ('≤', _) => (Tok::Leq, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            ('+', _) => (Tok::Plus, 1),
            ('*', _) | ('·', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('^', _) => (Tok::Caret, 1),
            ('=', _) => (Tok::Eq, 1),
            _ => return Err(err(span, format!("unexpected character `{c}`"))),
        };
        out.push((tok, span));
        advance(n, &mut i, &mut col);
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("r >= f # ignored\n 2.5e3 `Bat"),
            vec![
                Tok::Ident("r".into()),
                Tok::Geq,
                Tok::Ident("f".into()),
                Tok::Number(2500.0),
                Tok::ModelRef("Bat".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let t = lex("a\n  bb").unwrap();
        assert_eq!(t[0].1, Span { line: 1, col: 1 });
        assert_eq!(t[1].1, Span { line: 2, col: 3 });
    }

    #[test]
    fn minus_is_rejected_with_location() {
        let e = lex("r >= f - 1").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Syntax);
        assert_eq!(e.span, Span { line: 1, col: 8 });
        let e = lex("x >= -3").unwrap_err();
        assert!(e.message.contains("negative"));
    }

    #[test]
    fn small_exponent_is_a_positive_number() {
        assert_eq!(toks("1e-3")[0], Tok::Number(0.001));
    }
}
