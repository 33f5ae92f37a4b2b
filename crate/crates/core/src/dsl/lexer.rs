//! Tokens with byte spans and 1-based line/column positions.

use std::fmt;

use serde::Serialize;

use super::Diagnostic;

/// A source range. Spans never take part in syntactic equality.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Span {
    #[serde(skip)]
    pub start: usize,
    #[serde(skip)]
    pub end: usize,
    pub line: u32,
    pub column: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span { end: other.end, ..self }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Str(String),
    /// One of `= == ( ) [ ] { } , ; : . + * -> <= <<`.
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

// Longest match first.
const PUNCT: [&str; 17] = ["==", "->", "<=", "<<", "=", "(", ")", "[", "]", "{", "}", ",", ";", ":", ".", "+", "*"];

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

/// Identifiers may contain digits, `_`, `'`, `^` and inner hyphens (`totally-ordered`).
fn ident_continue(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '^')
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let at = |i: usize| chars.get(i).map_or(src.len(), |c| c.0);
    while i < chars.len() {
        let (pos, c) = chars[i];
        let here = |end: usize| Span { start: pos, end, line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if ident_start(c) || c == '∞' {
            if c == '∞' {
                i += 1;
                Tok::Ident("inf".into())
            } else {
                i += 1;
                loop {
                    match chars.get(i).map(|c| c.1) {
                        Some(d) if ident_continue(d) => i += 1,
                        Some('-') if chars.get(i + 1).is_some_and(|c| c.1.is_alphabetic()) => i += 1,
                        _ => break,
                    }
                }
                Tok::Ident(src[pos..at(i)].to_string())
            }
        } else if c.is_ascii_digit() {
            while chars.get(i).is_some_and(|c| c.1.is_ascii_digit()) {
                i += 1;
            }
            let text = &src[pos..at(i)];
            match text.parse() {
                Ok(n) => Tok::Int(n),
                Err(_) => return Err(Diagnostic::error(here(at(i)), format!("integer {text} is too large"))),
            }
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i].1 != '"' && chars[i].1 != '\n' {
                i += 1;
            }
            if chars.get(i).map(|c| c.1) != Some('"') {
                return Err(Diagnostic::error(here(at(i)), "unterminated string"));
            }
            i += 1;
            Tok::Str(src[pos + 1..at(i) - 1].to_string())
        } else if let Some(p) = PUNCT.iter().find(|p| src[pos..].starts_with(**p)) {
            i += p.chars().count();
            Tok::Punct(p)
        } else {
            return Err(Diagnostic::error(here(at(i + 1)), format!("unexpected character {c:?}")));
        };
        out.push(Token { tok, span: Span { start: pos, end: at(i), line, column: col } });
        col += (i - start) as u32;
    }
    out.push(Token { tok: Tok::Eof, span: Span { start: src.len(), end: src.len(), line, column: col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn hyphenated_keywords_and_arrows() {
        assert_eq!(
            kinds("totally-ordered F # note\nx->y <= 3"),
            vec![
                Tok::Ident("totally-ordered".into()),
                Tok::Ident("F".into()),
                Tok::Ident("x".into()),
                Tok::Punct("->"),
                Tok::Ident("y".into()),
                Tok::Punct("<="),
                Tok::Int(3),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let t = lex("a\n  bb").unwrap();
        assert_eq!((t[1].span.line, t[1].span.column), (2, 3));
        assert_eq!((t[1].span.start, t[1].span.end), (4, 6));
    }

    #[test]
    fn bad_character_is_located() {
        let d = lex("ok\n  $").unwrap_err();
        assert_eq!((d.span.line, d.span.column), (2, 3));
    }
}
