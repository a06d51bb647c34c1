use crate::syntax::{Loc, Pos};

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Underscore,
    // term keywords
    Type,
    Let,
    In,
    Forall,
    Fun,
    Smatch,
    As,
    Return,
    With,
    End,
    ProjL,
    ProjR,
    InjL,
    InjR,
    Coe,
    // punctuation
    LParen,
    RParen,
    Colon,
    ColonEq,
    Comma,
    FatArrow,
    Arrow,
    Amp,
    Bar,
    Lt,
    Gt,
    Dot,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier \"{s}\""),
            Tok::Str(s) => format!("string \"{s}\""),
            other => format!("\"{}\"", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Ident(_) | Tok::Str(_) => "",
            Tok::Underscore => "_",
            Tok::Type => "Type",
            Tok::Let => "let",
            Tok::In => "in",
            Tok::Forall => "forall",
            Tok::Fun => "fun",
            Tok::Smatch => "smatch",
            Tok::As => "as",
            Tok::Return => "return",
            Tok::With => "with",
            Tok::End => "end",
            Tok::ProjL => "proj_l",
            Tok::ProjR => "proj_r",
            Tok::InjL => "inj_l",
            Tok::InjR => "inj_r",
            Tok::Coe => "coe",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Colon => ":",
            Tok::ColonEq => ":=",
            Tok::Comma => ",",
            Tok::FatArrow => "=>",
            Tok::Arrow => "->",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Dot => ".",
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "Type", "let", "in", "forall", "fun", "smatch", "as", "return", "with", "end", "proj_l",
    "proj_r", "inj_l", "inj_r", "coe",
];

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c == '\''
}

/// True when `s` would lex as a single identifier token.
pub fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if is_ident_start(c) => {}
        _ => return false,
    }
    s != "_" && cs.all(is_ident_char) && !KEYWORDS.contains(&s)
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "_" => Tok::Underscore,
        "Type" => Tok::Type,
        "let" => Tok::Let,
        "in" => Tok::In,
        "forall" => Tok::Forall,
        "fun" => Tok::Fun,
        "smatch" => Tok::Smatch,
        "as" => Tok::As,
        "return" => Tok::Return,
        "with" => Tok::With,
        "end" => Tok::End,
        "proj_l" => Tok::ProjL,
        "proj_r" => Tok::ProjR,
        "inj_l" => Tok::InjL,
        "inj_r" => Tok::InjR,
        "coe" => Tok::Coe,
        _ => return None,
    })
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub loc: Loc,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 0;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }
}

/// Split `input` into tokens. Whitespace and nested `(* … *)` comments are
/// skipped.
pub fn tokenize(input: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor {
        chars: input.chars().peekable(),
        pos: Pos::new(1, 0),
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let start = cur.pos;
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '(' && cur.peek2() == Some('*') {
            skip_comment(&mut cur)?;
            continue;
        }
        let tok = if is_ident_start(c) {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(|c| is_ident_char(*c)) {
                s.push(c);
                cur.bump();
            }
            keyword(&s).unwrap_or(Tok::Ident(s))
        } else if c == '"' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    Some('"') => break,
                    Some(c) => s.push(c),
                    None => {
                        return Err(ParseError::incomplete(
                            Loc::new(start, cur.pos),
                            "unterminated string literal",
                        ))
                    }
                }
            }
            Tok::Str(s)
        } else {
            cur.bump();
            let next = cur.peek();
            let two = |cur: &mut Cursor, t| {
                cur.bump();
                t
            };
            match (c, next) {
                (':', Some('=')) => two(&mut cur, Tok::ColonEq),
                ('=', Some('>')) => two(&mut cur, Tok::FatArrow),
                ('-', Some('>')) => two(&mut cur, Tok::Arrow),
                ('(', _) => Tok::LParen,
                (')', _) => Tok::RParen,
                (':', _) => Tok::Colon,
                (',', _) => Tok::Comma,
                ('&', _) => Tok::Amp,
                ('|', _) => Tok::Bar,
                ('<', _) => Tok::Lt,
                ('>', _) => Tok::Gt,
                ('.', _) => Tok::Dot,
                _ => {
                    return Err(ParseError::new(
                        Loc::new(start, cur.pos),
                        format!("unexpected character '{c}'"),
                    ))
                }
            }
        };
        out.push(Token {
            tok,
            loc: Loc::new(start, cur.pos),
        });
    }
    Ok(out)
}

fn skip_comment(cur: &mut Cursor) -> Result<(), ParseError> {
    let start = cur.pos;
    cur.bump();
    cur.bump();
    let mut depth = 1usize;
    while depth > 0 {
        match cur.bump() {
            Some('(') if cur.peek() == Some('*') => {
                cur.bump();
                depth += 1;
            }
            Some('*') if cur.peek() == Some(')') => {
                cur.bump();
                depth -= 1;
            }
            Some(_) => {}
            None => {
                return Err(ParseError::incomplete(
                    Loc::new(start, cur.pos),
                    "unterminated comment",
                ))
            }
        }
    }
    Ok(())
}
