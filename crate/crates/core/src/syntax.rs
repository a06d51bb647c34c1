//! Core term representation.
//!
//! Δ-terms, types, essences and type essences all share the single [`Term`]
//! tree. Bound variables are de Bruijn indices; binders keep their source
//! name only as a printing hint.

use std::convert::Infallible;
use std::fmt;

/// A position in a source text. Lines are 1-based, columns 0-based (in chars).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl Pos {
    pub fn new(line: u32, column: u32) -> Self {
        Pos { line, column }
    }
}

/// A span in a source text. The name of the source itself is carried by the
/// diagnostic that reports the span, not by every node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Loc {
    pub start: Pos,
    pub end: Pos,
}

impl Loc {
    pub fn new(start: Pos, end: Pos) -> Self {
        debug_assert!(start <= end);
        Loc { start, end }
    }

    /// The location used for synthesized terms.
    pub fn dummy() -> Self {
        Loc::default()
    }

    pub fn is_dummy(&self) -> bool {
        *self == Loc::default()
    }

    /// Smallest span covering both `self` and `other`.
    pub fn join(self, other: Loc) -> Loc {
        if self.is_dummy() {
            return other;
        }
        if other.is_dummy() {
            return self;
        }
        Loc {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}-{}:{}",
            self.start.line, self.start.column, self.end.line, self.end.column
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Type,
    Kind,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Type => f.write_str("Type"),
            Sort::Kind => f.write_str("Kind"),
        }
    }
}

/// One branch of a strong sum: `name : annot => body`, with `name` bound in `body`.
#[derive(Clone, Debug)]
pub struct Branch<T> {
    pub name: String,
    pub annot: T,
    pub body: T,
}

/// `smatch scrutinee return ret with left , right end`.
#[derive(Clone, Debug)]
pub struct Match<T> {
    pub scrutinee: T,
    pub ret: T,
    pub left: Branch<T>,
    pub right: Branch<T>,
}

#[derive(Clone, Debug)]
pub enum Term {
    Sort(Loc, Sort),
    /// `let name : annot := bound in body`
    Let(Loc, String, Box<Term>, Box<Term>, Box<Term>),
    Prod(Loc, String, Box<Term>, Box<Term>),
    Abs(Loc, String, Box<Term>, Box<Term>),
    /// Head applied to a spine, arguments in source order.
    App(Loc, Box<Term>, Vec<Term>),
    Inter(Loc, Box<Term>, Box<Term>),
    Union(Loc, Box<Term>, Box<Term>),
    SPair(Loc, Box<Term>, Box<Term>),
    SPrLeft(Loc, Box<Term>),
    SPrRight(Loc, Box<Term>),
    SMatch(Loc, Box<Match<Term>>),
    /// `inj_l other payload`
    SInLeft(Loc, Box<Term>, Box<Term>),
    /// `inj_r other payload`
    SInRight(Loc, Box<Term>, Box<Term>),
    /// `coe target payload`
    Coercion(Loc, Box<Term>, Box<Term>),
    Var(Loc, usize),
    Const(Loc, String),
    Underscore(Loc),
    Meta(Loc, usize, Vec<Term>),
}

// Constructors. All of them use the dummy location.
impl Term {
    pub fn ty() -> Term {
        Term::Sort(Loc::dummy(), Sort::Type)
    }
    pub fn kind() -> Term {
        Term::Sort(Loc::dummy(), Sort::Kind)
    }
    pub fn var(n: usize) -> Term {
        Term::Var(Loc::dummy(), n)
    }
    pub fn cst(name: &str) -> Term {
        Term::Const(Loc::dummy(), name.to_string())
    }
    pub fn meta(id: usize, susp: Vec<Term>) -> Term {
        Term::Meta(Loc::dummy(), id, susp)
    }
    pub fn underscore() -> Term {
        Term::Underscore(Loc::dummy())
    }
    pub fn prod(name: &str, dom: Term, cod: Term) -> Term {
        Term::Prod(Loc::dummy(), name.to_string(), Box::new(dom), Box::new(cod))
    }
    /// Non-dependent product; `cod` is given in the outer scope and lifted.
    pub fn arrow(dom: Term, cod: Term) -> Term {
        Term::prod("_", dom, lift(0, 1, &cod))
    }
    pub fn abs(name: &str, dom: Term, body: Term) -> Term {
        Term::Abs(
            Loc::dummy(),
            name.to_string(),
            Box::new(dom),
            Box::new(body),
        )
    }
    pub fn let_in(name: &str, annot: Term, bound: Term, body: Term) -> Term {
        Term::Let(
            Loc::dummy(),
            name.to_string(),
            Box::new(annot),
            Box::new(bound),
            Box::new(body),
        )
    }
    pub fn inter(a: Term, b: Term) -> Term {
        Term::Inter(Loc::dummy(), Box::new(a), Box::new(b))
    }
    pub fn union(a: Term, b: Term) -> Term {
        Term::Union(Loc::dummy(), Box::new(a), Box::new(b))
    }
    pub fn pair(a: Term, b: Term) -> Term {
        Term::SPair(Loc::dummy(), Box::new(a), Box::new(b))
    }
    pub fn proj_l(t: Term) -> Term {
        Term::SPrLeft(Loc::dummy(), Box::new(t))
    }
    pub fn proj_r(t: Term) -> Term {
        Term::SPrRight(Loc::dummy(), Box::new(t))
    }
    pub fn inj_l(other: Term, t: Term) -> Term {
        Term::SInLeft(Loc::dummy(), Box::new(other), Box::new(t))
    }
    pub fn inj_r(other: Term, t: Term) -> Term {
        Term::SInRight(Loc::dummy(), Box::new(other), Box::new(t))
    }
    pub fn coe(target: Term, t: Term) -> Term {
        Term::Coercion(Loc::dummy(), Box::new(target), Box::new(t))
    }
    pub fn smatch(scrutinee: Term, ret: Term, left: Branch<Term>, right: Branch<Term>) -> Term {
        Term::SMatch(
            Loc::dummy(),
            Box::new(Match {
                scrutinee,
                ret,
                left,
                right,
            }),
        )
    }

    /// Application that keeps spines merged: `app(f a, [b])` is `f a b`, and
    /// an empty spine returns the head itself.
    pub fn app(head: Term, args: Vec<Term>) -> Term {
        Term::app_at(Loc::dummy(), head, args)
    }

    pub fn app_at(loc: Loc, head: Term, mut args: Vec<Term>) -> Term {
        if args.is_empty() {
            return head;
        }
        match head {
            Term::App(l, h, mut prefix) => {
                prefix.append(&mut args);
                Term::App(l.join(loc), h, prefix)
            }
            head => Term::App(loc, Box::new(head), args),
        }
    }

    /// Domain placeholder for untyped abstractions in essences.
    pub fn nothing() -> Term {
        Term::ty()
    }

    pub fn loc(&self) -> Loc {
        match self {
            Term::Sort(l, _)
            | Term::Let(l, ..)
            | Term::Prod(l, ..)
            | Term::Abs(l, ..)
            | Term::App(l, ..)
            | Term::Inter(l, ..)
            | Term::Union(l, ..)
            | Term::SPair(l, ..)
            | Term::SPrLeft(l, _)
            | Term::SPrRight(l, _)
            | Term::SMatch(l, _)
            | Term::SInLeft(l, ..)
            | Term::SInRight(l, ..)
            | Term::Coercion(l, ..)
            | Term::Var(l, _)
            | Term::Const(l, _)
            | Term::Underscore(l)
            | Term::Meta(l, ..) => *l,
        }
    }

    pub fn with_loc(mut self, loc: Loc) -> Term {
        match &mut self {
            Term::Sort(l, _)
            | Term::Let(l, ..)
            | Term::Prod(l, ..)
            | Term::Abs(l, ..)
            | Term::App(l, ..)
            | Term::Inter(l, ..)
            | Term::Union(l, ..)
            | Term::SPair(l, ..)
            | Term::SPrLeft(l, _)
            | Term::SPrRight(l, _)
            | Term::SMatch(l, _)
            | Term::SInLeft(l, ..)
            | Term::SInRight(l, ..)
            | Term::Coercion(l, ..)
            | Term::Var(l, _)
            | Term::Const(l, _)
            | Term::Underscore(l)
            | Term::Meta(l, ..) => *l = loc,
        }
        self
    }

    pub fn is_abs(&self) -> bool {
        matches!(self, Term::Abs(..))
    }

    /// True when the term contains no strong pair, projection, strong sum,
    /// injection or coercion node.
    pub fn is_essence(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |t| {
            if matches!(
                t,
                Term::SPair(..)
                    | Term::SPrLeft(..)
                    | Term::SPrRight(..)
                    | Term::SMatch(..)
                    | Term::SInLeft(..)
                    | Term::SInRight(..)
                    | Term::Coercion(..)
            ) {
                ok = false;
            }
        });
        ok
    }

    pub fn has_metas(&self) -> bool {
        let mut found = false;
        self.walk(&mut |t| {
            if matches!(t, Term::Meta(..) | Term::Underscore(_)) {
                found = true;
            }
        });
        found
    }

    /// Ids of every meta-variable node, in traversal order, with duplicates.
    pub fn metas(&self) -> Vec<(usize, Loc)> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let Term::Meta(l, id, _) = t {
                out.push((*id, *l));
            }
        });
        out
    }

    pub fn first_underscore(&self) -> Option<Loc> {
        let mut found = None;
        self.walk(&mut |t| {
            if let Term::Underscore(l) = t {
                found.get_or_insert(*l);
            }
        });
        found
    }

    /// Pre-order walk over every node.
    pub fn walk(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        for (c, _) in children(self) {
            c.walk(f);
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

/// Immediate children of `t`, each paired with the number of binders
/// (0 or 1) separating it from `t`.
pub fn children(t: &Term) -> Vec<(&Term, usize)> {
    match t {
        Term::Sort(..) | Term::Var(..) | Term::Const(..) | Term::Underscore(_) => vec![],
        Term::Let(_, _, a, b, c) => vec![(a, 0), (b, 0), (c, 1)],
        Term::Prod(_, _, a, b) | Term::Abs(_, _, a, b) => vec![(a, 0), (b, 1)],
        Term::Inter(_, a, b)
        | Term::Union(_, a, b)
        | Term::SPair(_, a, b)
        | Term::SInLeft(_, a, b)
        | Term::SInRight(_, a, b)
        | Term::Coercion(_, a, b) => vec![(a, 0), (b, 0)],
        Term::App(_, h, args) => std::iter::once((&**h, 0))
            .chain(args.iter().map(|a| (a, 0)))
            .collect(),
        Term::SPrLeft(_, a) | Term::SPrRight(_, a) => vec![(a, 0)],
        Term::SMatch(_, m) => vec![
            (&m.scrutinee, 0),
            (&m.ret, 0),
            (&m.left.annot, 0),
            (&m.left.body, 1),
            (&m.right.annot, 0),
            (&m.right.body, 1),
        ],
        Term::Meta(_, _, susp) => susp.iter().map(|a| (a, 0)).collect(),
    }
}

/// Rebuild `t` with every immediate child transformed. Children outside a
/// binder go through `f`; a child under a binder named `s` goes through `g`,
/// and the binder is renamed by `h`. Children are visited left to right and
/// the first error aborts the traversal.
pub fn try_visit_term<E>(
    mut f: impl FnMut(&Term) -> Result<Term, E>,
    mut g: impl FnMut(&str, &Term) -> Result<Term, E>,
    mut h: impl FnMut(&str, &Term) -> String,
    t: &Term,
) -> Result<Term, E> {
    let b = |t: Term| Box::new(t);
    Ok(match t {
        Term::Sort(..) | Term::Var(..) | Term::Const(..) | Term::Underscore(_) => t.clone(),
        Term::Let(l, s, annot, bound, body) => {
            let annot = f(annot)?;
            let bound = f(bound)?;
            let name = h(s, body);
            let body = g(s, body)?;
            Term::Let(*l, name, b(annot), b(bound), b(body))
        }
        Term::Prod(l, s, dom, cod) => {
            let dom = f(dom)?;
            let name = h(s, cod);
            let cod = g(s, cod)?;
            Term::Prod(*l, name, b(dom), b(cod))
        }
        Term::Abs(l, s, dom, body) => {
            let dom = f(dom)?;
            let name = h(s, body);
            let body = g(s, body)?;
            Term::Abs(*l, name, b(dom), b(body))
        }
        Term::App(l, head, args) => {
            let head = f(head)?;
            let args = args.iter().map(&mut f).collect::<Result<Vec<_>, _>>()?;
            Term::App(*l, b(head), args)
        }
        Term::Inter(l, x, y) => Term::Inter(*l, b(f(x)?), b(f(y)?)),
        Term::Union(l, x, y) => Term::Union(*l, b(f(x)?), b(f(y)?)),
        Term::SPair(l, x, y) => Term::SPair(*l, b(f(x)?), b(f(y)?)),
        Term::SPrLeft(l, x) => Term::SPrLeft(*l, b(f(x)?)),
        Term::SPrRight(l, x) => Term::SPrRight(*l, b(f(x)?)),
        Term::SInLeft(l, x, y) => Term::SInLeft(*l, b(f(x)?), b(f(y)?)),
        Term::SInRight(l, x, y) => Term::SInRight(*l, b(f(x)?), b(f(y)?)),
        Term::Coercion(l, x, y) => Term::Coercion(*l, b(f(x)?), b(f(y)?)),
        Term::SMatch(l, m) => {
            let scrutinee = f(&m.scrutinee)?;
            let ret = f(&m.ret)?;
            let left_annot = f(&m.left.annot)?;
            let left_name = h(&m.left.name, &m.left.body);
            let left_body = g(&m.left.name, &m.left.body)?;
            let right_annot = f(&m.right.annot)?;
            let right_name = h(&m.right.name, &m.right.body);
            let right_body = g(&m.right.name, &m.right.body)?;
            Term::SMatch(
                *l,
                Box::new(Match {
                    scrutinee,
                    ret,
                    left: Branch {
                        name: left_name,
                        annot: left_annot,
                        body: left_body,
                    },
                    right: Branch {
                        name: right_name,
                        annot: right_annot,
                        body: right_body,
                    },
                }),
            )
        }
        Term::Meta(l, id, susp) => {
            let susp = susp.iter().map(&mut f).collect::<Result<Vec<_>, _>>()?;
            Term::Meta(*l, *id, susp)
        }
    })
}

pub fn visit_term(
    mut f: impl FnMut(&Term) -> Term,
    mut g: impl FnMut(&str, &Term) -> Term,
    h: impl FnMut(&str, &Term) -> String,
    t: &Term,
) -> Term {
    let result: Result<Term, Infallible> = try_visit_term(|c| Ok(f(c)), |s, c| Ok(g(s, c)), h, t);
    match result {
        Ok(t) => t,
        Err(never) => match never {},
    }
}

/// Replace every `Var(l, n)` found at binder offset `d` below `t` by
/// `f(k + d, l, n)`.
pub fn map_term(k: usize, f: &dyn Fn(usize, Loc, usize) -> Term, t: &Term) -> Term {
    match t {
        Term::Var(l, n) => f(k, *l, *n),
        _ => visit_term(
            |c| map_term(k, f, c),
            |_, c| map_term(k + 1, f, c),
            |s, _| s.to_string(),
            t,
        ),
    }
}

/// Shift every free index `>= k` by `n`.
///
/// Panics if a negative shift would push an index below zero.
pub fn lift(k: usize, n: isize, t: &Term) -> Term {
    if n == 0 {
        return t.clone();
    }
    map_term(
        k,
        &|k, l, m| {
            if m < k {
                Term::Var(l, m)
            } else {
                let shifted = m as isize + n;
                assert!(shifted >= k as isize, "lift: index {m} underflows by {n}");
                Term::Var(l, shifted as usize)
            }
        },
        t,
    )
}

/// Contract `(λx. body) arg`: index 0 of `body` becomes `arg`, and the
/// indices of the enclosing context move down by one.
pub fn beta_redex(body: &Term, arg: &Term) -> Term {
    map_term(
        0,
        &|k, l, m| {
            if m < k {
                Term::Var(l, m)
            } else if m == k {
                lift(0, k as isize, arg)
            } else {
                Term::Var(l, m - 1)
            }
        },
        body,
    )
}

/// Simultaneous substitution of a suspension. `t` lives in a context of
/// length `susp.len()` (plus whatever lies beyond it, shifted down); the
/// variable declared at position `i` of that context becomes `susp[i]`.
pub fn subst_suspension(t: &Term, susp: &[Term]) -> Term {
    let n = susp.len();
    map_term(
        0,
        &|k, l, m| {
            if m < k {
                Term::Var(l, m)
            } else if m - k < n {
                lift(0, k as isize, &susp[n - 1 - (m - k)])
            } else {
                Term::Var(l, m - n)
            }
        },
        t,
    )
}

/// Variables of a context of length `len`, outermost first.
pub fn erase_len(len: usize) -> Vec<Term> {
    (0..len).rev().map(Term::var).collect()
}

/// Location- and name-insensitive structural equality.
pub fn same_term(a: &Term, b: &Term) -> bool {
    use Term::*;
    match (a, b) {
        (Sort(_, x), Sort(_, y)) => x == y,
        (Let(_, _, a1, a2, a3), Let(_, _, b1, b2, b3)) => {
            same_term(a1, b1) && same_term(a2, b2) && same_term(a3, b3)
        }
        (Prod(_, _, a1, a2), Prod(_, _, b1, b2))
        | (Abs(_, _, a1, a2), Abs(_, _, b1, b2))
        | (Inter(_, a1, a2), Inter(_, b1, b2))
        | (Union(_, a1, a2), Union(_, b1, b2))
        | (SPair(_, a1, a2), SPair(_, b1, b2))
        | (SInLeft(_, a1, a2), SInLeft(_, b1, b2))
        | (SInRight(_, a1, a2), SInRight(_, b1, b2))
        | (Coercion(_, a1, a2), Coercion(_, b1, b2)) => same_term(a1, b1) && same_term(a2, b2),
        (App(_, h1, s1), App(_, h2, s2)) => {
            same_term(h1, h2)
                && s1.len() == s2.len()
                && s1.iter().zip(s2).all(|(x, y)| same_term(x, y))
        }
        (SPrLeft(_, x), SPrLeft(_, y)) | (SPrRight(_, x), SPrRight(_, y)) => same_term(x, y),
        (SMatch(_, m1), SMatch(_, m2)) => {
            same_term(&m1.scrutinee, &m2.scrutinee)
                && same_term(&m1.ret, &m2.ret)
                && same_term(&m1.left.annot, &m2.left.annot)
                && same_term(&m1.left.body, &m2.left.body)
                && same_term(&m1.right.annot, &m2.right.annot)
                && same_term(&m1.right.body, &m2.right.body)
        }
        (Var(_, x), Var(_, y)) => x == y,
        (Const(_, x), Const(_, y)) => x == y,
        (Underscore(_), Underscore(_)) => true,
        (Meta(_, x, s1), Meta(_, y, s2)) => {
            x == y && s1.len() == s2.len() && s1.iter().zip(s2).all(|(a, b)| same_term(a, b))
        }
        _ => false,
    }
}

/// Does `Var(index)` occur free in `t`?
pub fn free_in(index: usize, t: &Term) -> bool {
    match t {
        Term::Var(_, n) => *n == index,
        _ => children(t).into_iter().any(|(c, d)| free_in(index + d, c)),
    }
}

/// Free indices of `t`, relative to the outside of `t`, in first-occurrence
/// order.
pub fn free_vars(t: &Term) -> Vec<usize> {
    fn go(depth: usize, t: &Term, out: &mut Vec<usize>) {
        match t {
            Term::Var(_, n) => {
                if *n >= depth && !out.contains(&(n - depth)) {
                    out.push(n - depth)
                }
            }
            _ => {
                for (c, d) in children(t) {
                    go(depth + d, c, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    go(0, t, &mut out);
    out
}

/// Does meta-variable `id` occur anywhere in `t`?
pub fn meta_occurs(id: usize, t: &Term) -> bool {
    let mut found = false;
    t.walk(&mut |n| {
        if let Term::Meta(_, m, _) = n {
            found |= *m == id;
        }
    });
    found
}
