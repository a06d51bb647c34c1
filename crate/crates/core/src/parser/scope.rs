//! Conversion between named terms and de Bruijn terms.

use std::collections::HashSet;

use super::NamedTerm;
use crate::syntax::{free_in, Branch, Match, Term};

/// Replace bound names by de Bruijn indices. `scope` lists the names of the
/// enclosing context, innermost last. Unbound names become constants.
pub fn fix_index(t: &NamedTerm, scope: &[String]) -> Term {
    let mut names: Vec<String> = scope.to_vec();
    index(t, &mut names)
}

fn index(t: &NamedTerm, names: &mut Vec<String>) -> Term {
    let b = |t: Term| Box::new(t);
    match t {
        NamedTerm::Sort(l, s) => Term::Sort(*l, *s),
        NamedTerm::Name(l, s) => match names.iter().rposition(|n| n == s) {
            Some(i) => Term::Var(*l, names.len() - 1 - i),
            None => Term::Const(*l, s.clone()),
        },
        NamedTerm::Underscore(l) => Term::Underscore(*l),
        NamedTerm::Meta(l, id, susp) => {
            Term::Meta(*l, *id, susp.iter().map(|x| index(x, names)).collect())
        }
        NamedTerm::Let(l, s, a, x, body) => {
            let a = index(a, names);
            let x = index(x, names);
            let body = under(names, s, |names| index(body, names));
            Term::Let(*l, s.clone(), b(a), b(x), b(body))
        }
        NamedTerm::Prod(l, s, dom, cod) => {
            let dom = index(dom, names);
            let cod = under(names, s, |names| index(cod, names));
            Term::Prod(*l, s.clone(), b(dom), b(cod))
        }
        NamedTerm::Abs(l, s, dom, body) => {
            let dom = index(dom, names);
            let body = under(names, s, |names| index(body, names));
            Term::Abs(*l, s.clone(), b(dom), b(body))
        }
        NamedTerm::App(l, h, args) => Term::App(
            *l,
            b(index(h, names)),
            args.iter().map(|a| index(a, names)).collect(),
        ),
        NamedTerm::Inter(l, x, y) => Term::Inter(*l, b(index(x, names)), b(index(y, names))),
        NamedTerm::Union(l, x, y) => Term::Union(*l, b(index(x, names)), b(index(y, names))),
        NamedTerm::SPair(l, x, y) => Term::SPair(*l, b(index(x, names)), b(index(y, names))),
        NamedTerm::SPrLeft(l, x) => Term::SPrLeft(*l, b(index(x, names))),
        NamedTerm::SPrRight(l, x) => Term::SPrRight(*l, b(index(x, names))),
        NamedTerm::SInLeft(l, x, y) => Term::SInLeft(*l, b(index(x, names)), b(index(y, names))),
        NamedTerm::SInRight(l, x, y) => Term::SInRight(*l, b(index(x, names)), b(index(y, names))),
        NamedTerm::Coercion(l, x, y) => Term::Coercion(*l, b(index(x, names)), b(index(y, names))),
        NamedTerm::SMatch(l, m) => {
            let scrutinee = index(&m.scrutinee, names);
            let ret = index(&m.ret, names);
            let branch = |br: &Branch<NamedTerm>, names: &mut Vec<String>| Branch {
                name: br.name.clone(),
                annot: index(&br.annot, names),
                body: under(names, &br.name, |names| index(&br.body, names)),
            };
            let left = branch(&m.left, names);
            let right = branch(&m.right, names);
            Term::SMatch(
                *l,
                Box::new(Match {
                    scrutinee,
                    ret,
                    left,
                    right,
                }),
            )
        }
    }
}

fn under<T>(names: &mut Vec<String>, s: &str, f: impl FnOnce(&mut Vec<String>) -> T) -> T {
    names.push(s.to_string());
    let r = f(names);
    names.pop();
    r
}

/// Replace de Bruijn indices by names. `scope` lists the names of the
/// enclosing context, innermost last. A binder whose name is already in
/// scope, or is the name of a constant occurring in its body, is renamed
/// with the first free numeric suffix.
///
/// Panics on an index outside the scope.
pub fn fix_id(t: &Term, scope: &[String]) -> NamedTerm {
    let mut names: Vec<String> = scope.to_vec();
    name(t, &mut names)
}

fn consts_of(t: &Term) -> HashSet<String> {
    let mut out = HashSet::new();
    t.walk(&mut |n| {
        if let Term::Const(_, s) = n {
            out.insert(s.clone());
        }
    });
    out
}

/// Pick the printed name of a binder with hint `hint` over `body`.
fn choose(hint: &str, body: &Term, names: &[String]) -> String {
    let used = free_in(0, body);
    if hint == "_" && !used {
        return "_".to_string();
    }
    let base = if hint == "_" { "x" } else { hint };
    let consts = consts_of(body);
    let taken = |s: &str| names.iter().any(|n| n == s) || consts.contains(s);
    if !taken(base) {
        return base.to_string();
    }
    (0..)
        .map(|i| format!("{base}{i}"))
        .find(|s| !taken(s))
        .expect("unbounded suffixes")
}

fn name(t: &Term, names: &mut Vec<String>) -> NamedTerm {
    let b = |t: NamedTerm| Box::new(t);
    match t {
        Term::Sort(l, s) => NamedTerm::Sort(*l, *s),
        Term::Var(l, n) => {
            assert!(*n < names.len(), "fix_id: index {n} out of scope");
            NamedTerm::Name(*l, names[names.len() - 1 - n].clone())
        }
        Term::Const(l, s) => NamedTerm::Name(*l, s.clone()),
        Term::Underscore(l) => NamedTerm::Underscore(*l),
        Term::Meta(l, id, susp) => {
            NamedTerm::Meta(*l, *id, susp.iter().map(|x| name(x, names)).collect())
        }
        Term::Let(l, s, a, x, body) => {
            let a = name(a, names);
            let x = name(x, names);
            let s = choose(s, body, names);
            let body = under(names, &s, |names| name(body, names));
            NamedTerm::Let(*l, s, b(a), b(x), b(body))
        }
        Term::Prod(l, s, dom, cod) => {
            let dom = name(dom, names);
            // a non-dependent product prints as an arrow
            let s = if free_in(0, cod) {
                choose(s, cod, names)
            } else {
                "_".to_string()
            };
            let cod = under(names, &s, |names| name(cod, names));
            NamedTerm::Prod(*l, s, b(dom), b(cod))
        }
        Term::Abs(l, s, dom, body) => {
            let dom = name(dom, names);
            let s = choose(s, body, names);
            let body = under(names, &s, |names| name(body, names));
            NamedTerm::Abs(*l, s, b(dom), b(body))
        }
        Term::App(l, h, args) => NamedTerm::App(
            *l,
            b(name(h, names)),
            args.iter().map(|a| name(a, names)).collect(),
        ),
        Term::Inter(l, x, y) => NamedTerm::Inter(*l, b(name(x, names)), b(name(y, names))),
        Term::Union(l, x, y) => NamedTerm::Union(*l, b(name(x, names)), b(name(y, names))),
        Term::SPair(l, x, y) => NamedTerm::SPair(*l, b(name(x, names)), b(name(y, names))),
        Term::SPrLeft(l, x) => NamedTerm::SPrLeft(*l, b(name(x, names))),
        Term::SPrRight(l, x) => NamedTerm::SPrRight(*l, b(name(x, names))),
        Term::SInLeft(l, x, y) => NamedTerm::SInLeft(*l, b(name(x, names)), b(name(y, names))),
        Term::SInRight(l, x, y) => NamedTerm::SInRight(*l, b(name(x, names)), b(name(y, names))),
        Term::Coercion(l, x, y) => NamedTerm::Coercion(*l, b(name(x, names)), b(name(y, names))),
        Term::SMatch(l, m) => {
            let scrutinee = name(&m.scrutinee, names);
            let ret = name(&m.ret, names);
            let branch = |br: &Branch<Term>, names: &mut Vec<String>| {
                let annot = name(&br.annot, names);
                let s = choose(&br.name, &br.body, names);
                let body = under(names, &s, |names| name(&br.body, names));
                Branch {
                    name: s,
                    annot,
                    body,
                }
            };
            let left = branch(&m.left, names);
            let right = branch(&m.right, names);
            NamedTerm::SMatch(
                *l,
                Box::new(Match {
                    scrutinee,
                    ret,
                    left,
                    right,
                }),
            )
        }
    }
}
