//! Concrete syntax: terms and REPL commands.

mod lexer;
mod print;
mod scope;

pub use lexer::{is_identifier, tokenize, Tok, Token, KEYWORDS};
pub use print::{print_named, print_term};
pub use scope::{fix_id, fix_index};

use crate::syntax::{Branch, Loc, Match, Pos, Sort};
use thiserror::Error;

/// Terms with variables as names, as written by the user.
#[derive(Clone, Debug)]
pub enum NamedTerm {
    Sort(Loc, Sort),
    Let(Loc, String, Box<NamedTerm>, Box<NamedTerm>, Box<NamedTerm>),
    Prod(Loc, String, Box<NamedTerm>, Box<NamedTerm>),
    Abs(Loc, String, Box<NamedTerm>, Box<NamedTerm>),
    App(Loc, Box<NamedTerm>, Vec<NamedTerm>),
    Inter(Loc, Box<NamedTerm>, Box<NamedTerm>),
    Union(Loc, Box<NamedTerm>, Box<NamedTerm>),
    SPair(Loc, Box<NamedTerm>, Box<NamedTerm>),
    SPrLeft(Loc, Box<NamedTerm>),
    SPrRight(Loc, Box<NamedTerm>),
    SMatch(Loc, Box<Match<NamedTerm>>),
    SInLeft(Loc, Box<NamedTerm>, Box<NamedTerm>),
    SInRight(Loc, Box<NamedTerm>, Box<NamedTerm>),
    Coercion(Loc, Box<NamedTerm>, Box<NamedTerm>),
    Name(Loc, String),
    Underscore(Loc),
    /// Only produced when printing terms that still hold meta-variables.
    Meta(Loc, usize, Vec<NamedTerm>),
}

impl NamedTerm {
    pub fn loc(&self) -> Loc {
        use NamedTerm::*;
        match self {
            Sort(l, _)
            | Let(l, ..)
            | Prod(l, ..)
            | Abs(l, ..)
            | App(l, ..)
            | Inter(l, ..)
            | Union(l, ..)
            | SPair(l, ..)
            | SPrLeft(l, _)
            | SPrRight(l, _)
            | SMatch(l, _)
            | SInLeft(l, ..)
            | SInRight(l, ..)
            | Coercion(l, ..)
            | Name(l, _)
            | Underscore(l)
            | Meta(l, ..) => *l,
        }
    }

    pub fn name(s: &str) -> NamedTerm {
        NamedTerm::Name(Loc::dummy(), s.to_string())
    }

    /// Structural equality ignoring locations. Binder names are compared.
    pub fn same(&self, other: &NamedTerm) -> bool {
        use NamedTerm::*;
        let s = |a: &NamedTerm, b: &NamedTerm| a.same(b);
        match (self, other) {
            (Sort(_, a), Sort(_, b)) => a == b,
            (Let(_, x, a1, a2, a3), Let(_, y, b1, b2, b3)) => {
                x == y && s(a1, b1) && s(a2, b2) && s(a3, b3)
            }
            (Prod(_, x, a1, a2), Prod(_, y, b1, b2)) | (Abs(_, x, a1, a2), Abs(_, y, b1, b2)) => {
                x == y && s(a1, b1) && s(a2, b2)
            }
            (Inter(_, a1, a2), Inter(_, b1, b2))
            | (Union(_, a1, a2), Union(_, b1, b2))
            | (SPair(_, a1, a2), SPair(_, b1, b2))
            | (SInLeft(_, a1, a2), SInLeft(_, b1, b2))
            | (SInRight(_, a1, a2), SInRight(_, b1, b2))
            | (Coercion(_, a1, a2), Coercion(_, b1, b2)) => s(a1, b1) && s(a2, b2),
            (App(_, h1, a1), App(_, h2, a2)) => {
                s(h1, h2) && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| s(x, y))
            }
            (SPrLeft(_, a), SPrLeft(_, b)) | (SPrRight(_, a), SPrRight(_, b)) => s(a, b),
            (SMatch(_, m1), SMatch(_, m2)) => {
                s(&m1.scrutinee, &m2.scrutinee)
                    && s(&m1.ret, &m2.ret)
                    && m1.left.name == m2.left.name
                    && s(&m1.left.annot, &m2.left.annot)
                    && s(&m1.left.body, &m2.left.body)
                    && m1.right.name == m2.right.name
                    && s(&m1.right.annot, &m2.right.annot)
                    && s(&m1.right.body, &m2.right.body)
            }
            (Name(_, a), Name(_, b)) => a == b,
            (Underscore(_), Underscore(_)) => true,
            (Meta(_, a, s1), Meta(_, b, s2)) => {
                a == b && s1.len() == s2.len() && s1.iter().zip(s2).all(|(x, y)| s(x, y))
            }
            _ => false,
        }
    }
}

impl std::fmt::Display for NamedTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_named(self))
    }
}

/// One atomic REPL command.
#[derive(Clone, Debug)]
pub enum Command {
    Help,
    Quit,
    Printall,
    Load(String),
    Axiom {
        name: String,
        loc: Loc,
        ty: NamedTerm,
    },
    Definition {
        name: String,
        loc: Loc,
        ty: Option<NamedTerm>,
        body: NamedTerm,
    },
    Print {
        name: String,
        loc: Loc,
    },
    Compute {
        name: String,
        loc: Loc,
    },
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("syntax error: {message}")]
pub struct ParseError {
    pub loc: Loc,
    pub message: String,
    /// The input ended before the construct was complete.
    pub incomplete: bool,
}

impl ParseError {
    pub fn new(loc: Loc, message: impl Into<String>) -> Self {
        ParseError {
            loc,
            message: message.into(),
            incomplete: false,
        }
    }

    pub fn incomplete(loc: Loc, message: impl Into<String>) -> Self {
        ParseError {
            loc,
            message: message.into(),
            incomplete: true,
        }
    }
}

/// A source command: the atomic commands it expands to and its span.
#[derive(Clone, Debug)]
pub struct SourceCommand {
    pub commands: Vec<Command>,
    pub loc: Loc,
}

pub fn parse_term(input: &str) -> Result<NamedTerm, ParseError> {
    let mut p = Parser::new(input)?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parse exactly one period-terminated command.
pub fn parse_command(input: &str) -> Result<Vec<Command>, ParseError> {
    let mut p = Parser::new(input)?;
    let c = p.command()?;
    p.expect_eof()?;
    Ok(c.commands)
}

/// Parse a whole script. Parsing is lazy, so commands before a syntax error
/// are still delivered.
pub fn parse_script(input: &str) -> Result<Script, ParseError> {
    Ok(Script {
        parser: Parser::new(input)?,
        failed: false,
    })
}

pub struct Script {
    parser: Parser,
    failed: bool,
}

impl Iterator for Script {
    type Item = Result<SourceCommand, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.parser.at_eof() {
            return None;
        }
        let r = self.parser.command();
        self.failed = r.is_err();
        Some(r)
    }
}

/// Does `input` hold at least one complete command terminator? Used to
/// decide whether an interactive line needs continuation.
pub fn has_complete_command(input: &str) -> bool {
    match tokenize(input) {
        Ok(toks) => toks.iter().any(|t| t.tok == Tok::Dot),
        Err(e) => !e.incomplete,
    }
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    eof: Pos,
}

type PResult<T> = Result<T, ParseError>;

fn bx(t: NamedTerm) -> Box<NamedTerm> {
    Box::new(t)
}

/// An argument group: names sharing one (optional) type annotation.
type ArgGroup = Vec<(String, Loc, Option<NamedTerm>)>;

fn end_of(input: &str) -> Pos {
    let mut pos = Pos::new(1, 0);
    for c in input.chars() {
        if c == '\n' {
            pos.line += 1;
            pos.column = 0;
        } else {
            pos.column += 1;
        }
    }
    pos
}

impl Parser {
    fn new(input: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: tokenize(input)?,
            i: 0,
            eof: end_of(input),
        })
    }

    fn at_eof(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.i + k).map(|t| &t.tok)
    }

    fn here(&self) -> Loc {
        match self.toks.get(self.i) {
            Some(t) => t.loc,
            None => Loc::new(self.eof, self.eof),
        }
    }

    fn prev_end(&self) -> Pos {
        if self.i == 0 {
            Pos::new(1, 0)
        } else {
            self.toks[self.i - 1].loc.end
        }
    }

    fn span_from(&self, start: Pos) -> Loc {
        Loc::new(start, self.prev_end().max(start))
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        self.i += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        match self.toks.get(self.i) {
            Some(t) => Err(ParseError::new(
                t.loc,
                format!("unexpected {}, expected {expected}", t.tok.describe()),
            )),
            None => Err(ParseError::incomplete(
                self.here(),
                format!("unexpected end of input, expected {expected}"),
            )),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Loc> {
        if self.peek() == Some(&tok) {
            Ok(self.bump().loc)
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    fn ident(&mut self) -> PResult<(String, Loc)> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let t = self.bump();
                match t.tok {
                    Tok::Ident(s) => Ok((s, t.loc)),
                    _ => unreachable!(),
                }
            }
            _ => self.unexpected("an identifier"),
        }
    }

    /// An identifier or `_`, as allowed in binding positions.
    fn binder_name(&mut self) -> PResult<(String, Loc)> {
        if self.peek() == Some(&Tok::Underscore) {
            let loc = self.bump().loc;
            return Ok(("_".to_string(), loc));
        }
        self.ident()
    }

    fn at_binder_name(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(_) | Tok::Underscore))
    }

    fn at_binder_form(&self) -> bool {
        matches!(self.peek(), Some(Tok::Fun | Tok::Forall | Tok::Let))
    }

    fn at_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_) | Tok::Underscore | Tok::Type | Tok::LParen | Tok::Lt | Tok::Smatch)
        )
    }

    // ----- terms -----

    fn term(&mut self) -> PResult<NamedTerm> {
        match self.peek() {
            Some(Tok::Fun) => self.fun(),
            Some(Tok::Forall) => self.forall(),
            Some(Tok::Let) => self.let_in(),
            _ => self.arrow(),
        }
    }

    /// Right operand of an infix operator: a binder form may appear there
    /// unparenthesized and extends as far right as possible.
    fn operand(&mut self, next: fn(&mut Parser) -> PResult<NamedTerm>) -> PResult<NamedTerm> {
        if self.at_binder_form() {
            self.term()
        } else {
            next(self)
        }
    }

    fn arrow(&mut self) -> PResult<NamedTerm> {
        let lhs = self.union()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.operand(Parser::arrow)?;
            let loc = lhs.loc().join(rhs.loc());
            return Ok(NamedTerm::Prod(loc, "_".into(), bx(lhs), bx(rhs)));
        }
        Ok(lhs)
    }

    fn union(&mut self) -> PResult<NamedTerm> {
        let lhs = self.inter()?;
        if self.eat(&Tok::Bar) {
            let rhs = self.operand(Parser::union)?;
            let loc = lhs.loc().join(rhs.loc());
            return Ok(NamedTerm::Union(loc, bx(lhs), bx(rhs)));
        }
        Ok(lhs)
    }

    fn inter(&mut self) -> PResult<NamedTerm> {
        let lhs = self.app()?;
        if self.eat(&Tok::Amp) {
            let rhs = self.operand(Parser::inter)?;
            let loc = lhs.loc().join(rhs.loc());
            return Ok(NamedTerm::Inter(loc, bx(lhs), bx(rhs)));
        }
        Ok(lhs)
    }

    fn app(&mut self) -> PResult<NamedTerm> {
        let start = self.here().start;
        let head = match self.peek() {
            Some(Tok::ProjL) | Some(Tok::ProjR) => {
                let left = self.bump().tok == Tok::ProjL;
                let a = self.atom()?;
                let loc = self.span_from(start);
                if left {
                    NamedTerm::SPrLeft(loc, bx(a))
                } else {
                    NamedTerm::SPrRight(loc, bx(a))
                }
            }
            Some(Tok::InjL) | Some(Tok::InjR) | Some(Tok::Coe) => {
                let kw = self.bump().tok;
                let a = self.atom()?;
                let b = self.atom()?;
                let loc = self.span_from(start);
                match kw {
                    Tok::InjL => NamedTerm::SInLeft(loc, bx(a), bx(b)),
                    Tok::InjR => NamedTerm::SInRight(loc, bx(a), bx(b)),
                    _ => NamedTerm::Coercion(loc, bx(a), bx(b)),
                }
            }
            _ => self.atom()?,
        };
        let mut args = Vec::new();
        while self.at_atom() {
            args.push(self.atom()?);
        }
        if args.is_empty() {
            return Ok(head);
        }
        let loc = self.span_from(start);
        Ok(match head {
            NamedTerm::App(_, h, mut prefix) => {
                prefix.append(&mut args);
                NamedTerm::App(loc, h, prefix)
            }
            h => NamedTerm::App(loc, bx(h), args),
        })
    }

    fn atom(&mut self) -> PResult<NamedTerm> {
        let start = self.here().start;
        match self.peek() {
            Some(Tok::Type) => Ok(NamedTerm::Sort(self.bump().loc, Sort::Type)),
            Some(Tok::Underscore) => Ok(NamedTerm::Underscore(self.bump().loc)),
            Some(Tok::Ident(_)) => {
                let (s, loc) = self.ident()?;
                Ok(NamedTerm::Name(loc, s))
            }
            Some(Tok::LParen) => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::Lt) => {
                self.bump();
                let a = self.term()?;
                self.expect(Tok::Comma)?;
                let b = self.term()?;
                self.expect(Tok::Gt)?;
                Ok(NamedTerm::SPair(self.span_from(start), bx(a), bx(b)))
            }
            Some(Tok::Smatch) => self.smatch(),
            _ => self.unexpected("a term"),
        }
    }

    fn smatch(&mut self) -> PResult<NamedTerm> {
        let start = self.expect(Tok::Smatch)?.start;
        let scrutinee = self.term()?;
        let (as_name, as_loc) = if self.eat(&Tok::As) {
            self.binder_name()?
        } else {
            ("_".to_string(), scrutinee.loc())
        };
        let ret_body = if self.eat(&Tok::Return) {
            self.term()?
        } else {
            NamedTerm::Underscore(as_loc)
        };
        self.expect(Tok::With)?;
        let left = self.branch()?;
        self.expect(Tok::Comma)?;
        let right = self.branch()?;
        self.expect(Tok::End)?;
        let ret = NamedTerm::Abs(
            ret_body.loc().join(as_loc),
            as_name,
            bx(NamedTerm::Underscore(as_loc)),
            bx(ret_body),
        );
        Ok(NamedTerm::SMatch(
            self.span_from(start),
            Box::new(Match {
                scrutinee,
                ret,
                left,
                right,
            }),
        ))
    }

    fn branch(&mut self) -> PResult<Branch<NamedTerm>> {
        let (name, loc) = self.binder_name()?;
        let annot = if self.eat(&Tok::Colon) {
            self.term()?
        } else {
            NamedTerm::Underscore(loc)
        };
        self.expect(Tok::FatArrow)?;
        let body = self.term()?;
        Ok(Branch { name, annot, body })
    }

    /// Argument groups: bare names and parenthesized `(x y : A)` groups.
    /// With `trailing_annot`, a final `: A` applies to all preceding bare
    /// names (as in `fun x y : A => …`) provided no parenthesized group was
    /// used.
    fn args(&mut self, trailing_annot: bool) -> PResult<ArgGroup> {
        let mut out: ArgGroup = Vec::new();
        let mut all_bare = true;
        loop {
            if self.at_binder_name() {
                let (n, l) = self.binder_name()?;
                out.push((n, l, None));
            } else if self.peek() == Some(&Tok::LParen)
                && matches!(self.peek_at(1), Some(Tok::Ident(_) | Tok::Underscore))
            {
                all_bare = false;
                self.bump();
                let mut names = Vec::new();
                while self.at_binder_name() {
                    names.push(self.binder_name()?);
                }
                let ty = if self.eat(&Tok::Colon) {
                    Some(self.term()?)
                } else {
                    None
                };
                self.expect(Tok::RParen)?;
                out.extend(names.into_iter().map(|(n, l)| (n, l, ty.clone())));
            } else {
                break;
            }
        }
        if out.is_empty() {
            return self.unexpected("an argument");
        }
        if trailing_annot && all_bare && self.eat(&Tok::Colon) {
            let ty = self.term()?;
            for a in out.iter_mut() {
                a.2 = Some(ty.clone());
            }
        }
        Ok(out)
    }

    fn fun(&mut self) -> PResult<NamedTerm> {
        let start = self.expect(Tok::Fun)?.start;
        let args = self.args(true)?;
        self.expect(Tok::FatArrow)?;
        let body = self.term()?;
        Ok(wrap_abs(&args, body, self.span_from(start)))
    }

    fn forall(&mut self) -> PResult<NamedTerm> {
        let start = self.expect(Tok::Forall)?.start;
        let args = self.args(true)?;
        self.expect(Tok::Comma)?;
        let body = self.term()?;
        Ok(wrap_prod(&args, body, self.span_from(start)))
    }

    fn let_in(&mut self) -> PResult<NamedTerm> {
        let start = self.expect(Tok::Let)?.start;
        let (name, name_loc) = self.binder_name()?;
        let args = if self.at_binder_name() || self.peek() == Some(&Tok::LParen) {
            self.args(false)?
        } else {
            Vec::new()
        };
        let annot = if self.eat(&Tok::Colon) {
            Some(self.term()?)
        } else {
            None
        };
        self.expect(Tok::ColonEq)?;
        let bound = self.term()?;
        self.expect(Tok::In)?;
        let body = self.term()?;
        let loc = self.span_from(start);
        let (annot, bound) = desugar_definition(&args, annot, bound, name_loc);
        let annot = annot.unwrap_or(NamedTerm::Underscore(name_loc));
        Ok(NamedTerm::Let(loc, name, bx(annot), bx(bound), bx(body)))
    }

    // ----- commands -----

    fn command(&mut self) -> PResult<SourceCommand> {
        let start = self.here().start;
        let (word, word_loc) = match self.peek() {
            Some(Tok::Ident(_)) => self.ident()?,
            _ => return self.unexpected("a command"),
        };
        let commands = match word.as_str() {
            "Help" => vec![Command::Help],
            "Quit" => vec![Command::Quit],
            "Printall" => vec![Command::Printall],
            "Load" => match self.peek() {
                Some(Tok::Str(_)) => match self.bump().tok {
                    Tok::Str(s) => vec![Command::Load(s)],
                    _ => unreachable!(),
                },
                _ => return self.unexpected("a quoted file name"),
            },
            "Print" | "Compute" => {
                let (name, loc) = self.ident()?;
                if word == "Print" {
                    vec![Command::Print { name, loc }]
                } else {
                    vec![Command::Compute { name, loc }]
                }
            }
            "Axiom" => self.axiom()?,
            "Definition" => {
                let (name, loc) = self.ident()?;
                let args = if self.at_binder_name() || self.peek() == Some(&Tok::LParen) {
                    self.args(false)?
                } else {
                    Vec::new()
                };
                let ty = if self.eat(&Tok::Colon) {
                    Some(self.term()?)
                } else {
                    None
                };
                self.expect(Tok::ColonEq)?;
                let body = self.term()?;
                let (ty, body) = desugar_definition(&args, ty, body, loc);
                vec![Command::Definition {
                    name,
                    loc,
                    ty,
                    body,
                }]
            }
            _ => {
                return Err(ParseError::new(
                    word_loc,
                    format!("unknown command \"{word}\""),
                ))
            }
        };
        self.expect(Tok::Dot)?;
        Ok(SourceCommand {
            commands,
            loc: self.span_from(start),
        })
    }

    fn axiom(&mut self) -> PResult<Vec<Command>> {
        if self.peek() != Some(&Tok::LParen) {
            let (name, loc) = self.ident()?;
            self.expect(Tok::Colon)?;
            let ty = self.term()?;
            return Ok(vec![Command::Axiom { name, loc, ty }]);
        }
        let mut out = Vec::new();
        while self.eat(&Tok::LParen) {
            let mut names = vec![self.ident()?];
            while matches!(self.peek(), Some(Tok::Ident(_))) {
                names.push(self.ident()?);
            }
            self.expect(Tok::Colon)?;
            let ty = self.term()?;
            self.expect(Tok::RParen)?;
            for (name, loc) in names {
                out.push(Command::Axiom {
                    name,
                    loc,
                    ty: ty.clone(),
                });
            }
        }
        Ok(out)
    }
}

fn wrap_abs(args: &ArgGroup, body: NamedTerm, loc: Loc) -> NamedTerm {
    args.iter().rev().fold(body, |acc, (n, l, ty)| {
        let dom = ty.clone().unwrap_or(NamedTerm::Underscore(*l));
        NamedTerm::Abs(loc, n.clone(), bx(dom), bx(acc))
    })
}

fn wrap_prod(args: &ArgGroup, body: NamedTerm, loc: Loc) -> NamedTerm {
    args.iter().rev().fold(body, |acc, (n, l, ty)| {
        let dom = ty.clone().unwrap_or(NamedTerm::Underscore(*l));
        NamedTerm::Prod(loc, n.clone(), bx(dom), bx(acc))
    })
}

/// `name args : T := t` becomes `name : Π args. T := λ args. t`. Without an
/// annotation the type stays absent.
fn desugar_definition(
    args: &ArgGroup,
    ty: Option<NamedTerm>,
    body: NamedTerm,
    loc: Loc,
) -> (Option<NamedTerm>, NamedTerm) {
    if args.is_empty() {
        return (ty, body);
    }
    let body_loc = body.loc();
    let ty = ty.map(|t| {
        let l = t.loc();
        wrap_prod(args, t, l.join(loc))
    });
    (ty, wrap_abs(args, body, body_loc.join(loc)))
}
