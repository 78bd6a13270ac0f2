//! Tokenizer for the rule language.

use crate::rat::{rat_from_decimal, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Name(String),
    Var(String),
    /// A `_` on its own; the parser mints a fresh variable per occurrence.
    Anon,
    Num(Rat),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Pipe,
    /// Rule terminator `.`
    Dot,
    /// `:-`
    ColonDash,
    /// `?-`
    QueryDash,
    /// Dotted numeric constraint operator, e.g. `.=<.`
    DotOp(&'static str),
    /// Herbrand `=`
    Eq,
    /// Herbrand `\=`
    Ne,
    Plus,
    Minus,
    Star,
    Slash,
    Hash(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Clone, Debug)]
pub struct LexError {
    pub pos: Pos,
    pub msg: String,
}

pub fn lex(text: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! here {
        () => {
            Pos { line, col }
        };
    }

    let err = |pos: Pos, msg: String| Err(LexError { pos, msg });

    while i < chars.len() {
        let c = chars[i];
        let pos = here!();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                toks.push(Token { tok: Tok::LParen, pos });
                i += 1;
                col += 1;
            }
            ')' => {
                toks.push(Token { tok: Tok::RParen, pos });
                i += 1;
                col += 1;
            }
            '[' => {
                toks.push(Token { tok: Tok::LBracket, pos });
                i += 1;
                col += 1;
            }
            ']' => {
                toks.push(Token { tok: Tok::RBracket, pos });
                i += 1;
                col += 1;
            }
            ',' => {
                toks.push(Token { tok: Tok::Comma, pos });
                i += 1;
                col += 1;
            }
            '|' => {
                toks.push(Token { tok: Tok::Pipe, pos });
                i += 1;
                col += 1;
            }
            '+' => {
                toks.push(Token { tok: Tok::Plus, pos });
                i += 1;
                col += 1;
            }
            '-' => {
                toks.push(Token { tok: Tok::Minus, pos });
                i += 1;
                col += 1;
            }
            '*' => {
                toks.push(Token { tok: Tok::Star, pos });
                i += 1;
                col += 1;
            }
            '/' => {
                toks.push(Token { tok: Tok::Slash, pos });
                i += 1;
                col += 1;
            }
            '=' => {
                toks.push(Token { tok: Tok::Eq, pos });
                i += 1;
                col += 1;
            }
            '\\' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    toks.push(Token { tok: Tok::Ne, pos });
                    i += 2;
                    col += 2;
                } else {
                    return err(pos, "expected `=` after `\\`".into());
                }
            }
            ':' => {
                if i + 1 < chars.len() && chars[i + 1] == '-' {
                    toks.push(Token { tok: Tok::ColonDash, pos });
                    i += 2;
                    col += 2;
                } else {
                    return err(pos, "expected `-` after `:`".into());
                }
            }
            '?' => {
                if i + 1 < chars.len() && chars[i + 1] == '-' {
                    toks.push(Token { tok: Tok::QueryDash, pos });
                    i += 2;
                    col += 2;
                } else {
                    return err(pos, "expected `-` after `?`".into());
                }
            }
            '#' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_alphanumeric() {
                    j += 1;
                }
                if j == i + 1 {
                    return err(pos, "expected directive name after `#`".into());
                }
                let name: String = chars[i + 1..j].iter().collect();
                col += (j - i) as u32;
                i = j;
                toks.push(Token { tok: Tok::Hash(name), pos });
            }
            '"' => {
                let mut j = i + 1;
                let mut s = String::new();
                while j < chars.len() && chars[j] != '"' {
                    if chars[j] == '\n' {
                        return err(pos, "unterminated string".into());
                    }
                    s.push(chars[j]);
                    j += 1;
                }
                if j >= chars.len() {
                    return err(pos, "unterminated string".into());
                }
                col += (j - i + 1) as u32;
                i = j + 1;
                toks.push(Token { tok: Tok::Str(s), pos });
            }
            '.' => {
                // Dotted operator, or the rule terminator.
                let rest: String = chars[i + 1..chars.len().min(i + 4)].iter().collect();
                let op = if rest.starts_with("=<.") {
                    Some(("=<", 4))
                } else if rest.starts_with(">=.") {
                    Some((">=", 4))
                } else if rest.starts_with("\\=.") {
                    Some(("\\=", 4))
                } else if rest.starts_with("<.") {
                    Some(("<", 3))
                } else if rest.starts_with(">.") {
                    Some((">", 3))
                } else if rest.starts_with("=.") {
                    Some(("=", 3))
                } else {
                    None
                };
                match op {
                    Some((name, len)) => {
                        let tok = match name {
                            "<" => Tok::DotOp(".<."),
                            ">" => Tok::DotOp(".>."),
                            "=<" => Tok::DotOp(".=<."),
                            ">=" => Tok::DotOp(".>=."),
                            "=" => Tok::DotOp(".=."),
                            "\\=" => Tok::DotOp(".\\=."),
                            _ => unreachable!(),
                        };
                        toks.push(Token { tok, pos });
                        i += len;
                        col += len as u32;
                    }
                    None => {
                        toks.push(Token { tok: Tok::Dot, pos });
                        i += 1;
                        col += 1;
                    }
                }
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let int_part: String = chars[i..j].iter().collect();
                let mut frac: Option<String> = None;
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    let mut k = j + 1;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    frac = Some(chars[j + 1..k].iter().collect());
                    j = k;
                }
                let value = rat_from_decimal(&int_part, frac.as_deref())
                    .ok_or_else(|| LexError { pos, msg: "bad numeric literal".into() })?;
                col += (j - i) as u32;
                i = j;
                toks.push(Token { tok: Tok::Num(value), pos });
            }
            c if c.is_ascii_lowercase() => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let name: String = chars[i..j].iter().collect();
                col += (j - i) as u32;
                i = j;
                toks.push(Token { tok: Tok::Name(name), pos });
            }
            c if c.is_ascii_uppercase() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let name: String = chars[i..j].iter().collect();
                col += (j - i) as u32;
                i = j;
                if name == "_" {
                    toks.push(Token { tok: Tok::Anon, pos });
                } else {
                    toks.push(Token { tok: Tok::Var(name), pos });
                }
            }
            other => {
                return err(pos, format!("unexpected character `{other}`"));
            }
        }
    }
    Ok(toks)
}
