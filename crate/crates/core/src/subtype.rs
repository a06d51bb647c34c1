//! Subtyping for intersection and union types: both sides are rewritten
//! to normal forms, then compared structurally.

use crate::env::{Bindings, GlobalEnv};
use crate::eval::{strongly_normalize, EvalError};
use crate::syntax::{same_term, Loc, Term};

/// Arrow normal form. Only products are rewritten; the domain goes to
/// disjunctive and the codomain to conjunctive form, then the arrow is
/// split over domain unions and codomain intersections.
pub fn anf(t: &Term) -> Term {
    fn distr(mk: &dyn Fn(Term, Term) -> Term, a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Union(l, a1, a2), b) => Term::Inter(
                l,
                Box::new(distr(mk, *a1, b.clone())),
                Box::new(distr(mk, *a2, b)),
            ),
            (a, Term::Inter(l, b1, b2)) => Term::Inter(
                l,
                Box::new(distr(mk, a.clone(), *b1)),
                Box::new(distr(mk, a, *b2)),
            ),
            (a, b) => mk(a, b),
        }
    }
    match t {
        Term::Prod(l, name, dom, cod) => {
            let mk = |a: Term, b: Term| Term::Prod(*l, name.clone(), Box::new(a), Box::new(b));
            distr(&mk, danf(dom), canf(cod))
        }
        _ => t.clone(),
    }
}

/// Conjunctive normal form: an intersection of unions of arrow normal forms.
pub fn canf(t: &Term) -> Term {
    fn distr(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Inter(l, a1, a2), b) => {
                Term::Inter(l, Box::new(distr(*a1, b.clone())), Box::new(distr(*a2, b)))
            }
            (a, Term::Inter(l, b1, b2)) => {
                Term::Inter(l, Box::new(distr(a.clone(), *b1)), Box::new(distr(a, *b2)))
            }
            (a, b) => Term::Union(Loc::dummy(), Box::new(a), Box::new(b)),
        }
    }
    match t {
        Term::Inter(l, a, b) => Term::Inter(*l, Box::new(canf(a)), Box::new(canf(b))),
        Term::Union(_, a, b) => distr(canf(a), canf(b)),
        _ => anf(t),
    }
}

/// Disjunctive normal form: a union of intersections of arrow normal forms.
pub fn danf(t: &Term) -> Term {
    fn distr(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Union(l, a1, a2), b) => {
                Term::Union(l, Box::new(distr(*a1, b.clone())), Box::new(distr(*a2, b)))
            }
            (a, Term::Union(l, b1, b2)) => {
                Term::Union(l, Box::new(distr(a.clone(), *b1)), Box::new(distr(a, *b2)))
            }
            (a, b) => Term::Inter(Loc::dummy(), Box::new(a), Box::new(b)),
        }
    }
    match t {
        Term::Inter(_, a, b) => distr(danf(a), danf(b)),
        Term::Union(l, a, b) => Term::Union(*l, Box::new(danf(a)), Box::new(danf(b))),
        _ => anf(t),
    }
}

/// Structural comparison of a disjunctive-form `a` against a
/// conjunctive-form `b`. Products compare componentwise, contravariantly
/// in the domain; anything else must be syntactically equal.
pub fn subtype_normal(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::Union(_, a1, a2), _) => subtype_normal(a1, b) && subtype_normal(a2, b),
        (_, Term::Inter(_, b1, b2)) => subtype_normal(a, b1) && subtype_normal(a, b2),
        (Term::Inter(_, a1, a2), _) => subtype_normal(a1, b) || subtype_normal(a2, b),
        (_, Term::Union(_, b1, b2)) => subtype_normal(a, b1) || subtype_normal(a, b2),
        (Term::Prod(_, _, a1, a2), Term::Prod(_, _, b1, b2)) => {
            subtype_normal(b1, a1) && subtype_normal(a2, b2)
        }
        _ => same_term(a, b),
    }
}

/// Decide `a ≤ b` in context `ctx`. Both types must be free of
/// meta-variables.
pub fn is_subtype(
    sigma: &GlobalEnv,
    ctx: &dyn Bindings,
    a: &Term,
    b: &Term,
) -> Result<bool, EvalError> {
    let a = danf(&strongly_normalize(false, sigma, ctx, a)?);
    let b = canf(&strongly_normalize(false, sigma, ctx, b)?);
    Ok(subtype_normal(&a, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Opaque;
    use crate::parser::{fix_index, parse_term, print_term};

    fn parse(s: &str) -> Term {
        fix_index(&parse_term(s).unwrap(), &[])
    }

    fn show(t: &Term) -> String {
        print_term(t, &[])
    }

    fn sub(a: &str, b: &str) -> bool {
        is_subtype(&GlobalEnv::new(), &Opaque(0), &parse(a), &parse(b)).unwrap()
    }

    #[test]
    fn rewriting_examples() {
        assert_eq!(show(&anf(&parse("a"))), "a");
        assert_eq!(show(&anf(&parse("a | b -> c"))), "(a -> c) & (b -> c)");
        assert_eq!(show(&anf(&parse("a -> b & c"))), "(a -> b) & (a -> c)");
        assert_eq!(show(&canf(&parse("a | b & c"))), "(a | b) & (a | c)");
        assert_eq!(show(&canf(&parse("a & b"))), "a & b");
        assert_eq!(show(&canf(&parse("a"))), "a");
        assert_eq!(show(&danf(&parse("(a | b) & c"))), "a & c | b & c");
        assert_eq!(show(&danf(&parse("a | b"))), "a | b");
        assert_eq!(show(&danf(&parse("a"))), "a");
    }

    #[test]
    fn decision_examples() {
        assert!(sub("a", "a"));
        assert!(sub("a & b", "a"));
        assert!(sub("(a -> c) & (b -> c)", "a | b -> c"));
        assert!(!sub("a", "b"));
        assert!(sub("a", "a | b"));
        assert!(!sub("a | b", "a"));
        assert!(!sub("a -> c", "a | b -> c"));
    }

    #[test]
    fn corpus_coercions() {
        assert!(sub("(Neg -> F) & (Zero -> T) & (Pos -> F)", "Pos -> F"));
        assert!(sub("(Neg -> F) & (Zero -> T) & (Pos -> F)", "Neg -> F"));
        assert!(sub("obj'", "obj' | fam' | knd' | sup'"));
        assert!(sub("obj' & fam' & knd' & sup'", "obj'"));
    }
}
