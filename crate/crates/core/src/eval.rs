//! Strong normalization, applicative order.

use std::cell::Cell;

use thiserror::Error;

use crate::env::{Bindings, GlobalEnv, MetaEntry, MetaEnv};
use crate::syntax::{
    beta_redex, free_in, lift, subst_suspension, try_visit_term, visit_term, Loc, Term,
};

/// Reduction steps allowed for one normalization call.
pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("cannot normalize a term containing the meta-variable ?{0}")]
    Meta(usize, Loc),
    #[error("cannot normalize a term containing a placeholder")]
    Placeholder(Loc),
    #[error("normalization did not terminate within {0} steps")]
    OutOfFuel(u64),
}

enum Step {
    Done(Term),
    /// The root reduced to a term that must be normalized again.
    Again(Term),
}

/// A configured normalizer. With a meta environment, instantiated
/// meta-variables are expanded and the others stay as neutral terms;
/// without one, any meta-variable is an error.
pub struct Normalizer<'a> {
    sigma: &'a GlobalEnv,
    phi: Option<&'a MetaEnv>,
    is_essence: bool,
    fuel: Cell<u64>,
    limit: u64,
}

impl<'a> Normalizer<'a> {
    pub fn new(sigma: &'a GlobalEnv, phi: Option<&'a MetaEnv>, is_essence: bool) -> Self {
        Normalizer {
            sigma,
            phi,
            is_essence,
            fuel: Cell::new(DEFAULT_FUEL),
            limit: DEFAULT_FUEL,
        }
    }

    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel.set(fuel);
        self.limit = fuel;
        self
    }

    fn tick(&self) -> Result<(), EvalError> {
        let f = self.fuel.get();
        if f == 0 {
            return Err(EvalError::OutOfFuel(self.limit));
        }
        self.fuel.set(f - 1);
        Ok(())
    }

    pub fn normalize(&self, ctx: &dyn Bindings, t: &Term) -> Result<Term, EvalError> {
        self.sn(ctx, 0, t)
    }

    /// `depth` counts the binders crossed since `ctx`; they carry no body.
    fn sn(&self, ctx: &dyn Bindings, depth: usize, t: &Term) -> Result<Term, EvalError> {
        let mut t = t.clone();
        loop {
            self.tick()?;
            if let Term::Meta(_, id, susp) = &t {
                if let Some(e) = self.expand(*id, susp)? {
                    t = e;
                    continue;
                }
            }
            let normal_children = try_visit_term(
                |c| self.sn(ctx, depth, c),
                |_, c| self.sn(ctx, depth + 1, c),
                |s, _| s.to_string(),
                &t,
            )?;
            match self.contract(ctx, depth, normal_children)? {
                Step::Done(r) => return Ok(r),
                Step::Again(r) => t = r,
            }
        }
    }

    fn expand(&self, id: usize, susp: &[Term]) -> Result<Option<Term>, EvalError> {
        match self.phi {
            None => Err(EvalError::Meta(id, Loc::dummy())),
            Some(phi) => Ok(delta_phi_expand_parts(phi, id, susp)),
        }
    }

    /// Contract the root of `t`, whose children are normal.
    fn contract(&self, ctx: &dyn Bindings, depth: usize, t: Term) -> Result<Step, EvalError> {
        use Step::{Again, Done};
        Ok(match t {
            Term::App(l, head, mut args) => match *head {
                Term::App(_, h, mut prefix) => {
                    prefix.append(&mut args);
                    Again(Term::App(l, h, prefix))
                }
                Term::Abs(_, _, _, body) => {
                    let rest = args.split_off(1);
                    Again(Term::app_at(l, beta_redex(&body, &args[0]), rest))
                }
                head => Done(Term::App(l, Box::new(head), args)),
            },
            Term::Let(_, _, _, bound, body) => Again(beta_redex(&body, &bound)),
            Term::Var(l, n) if n >= depth => match ctx.definition(n - depth) {
                Some(body) => Again(lift(0, depth as isize, &body)),
                None => Done(Term::Var(l, n)),
            },
            Term::Const(l, name) => match self.sigma.find_const(self.is_essence, &name) {
                Some((Some(body), _)) => Again(body.clone()),
                _ => Done(Term::Const(l, name)),
            },
            Term::Meta(l, id, susp) => match self.expand(id, &susp)? {
                Some(e) => Again(e),
                None => Done(Term::Meta(l, id, susp)),
            },
            Term::Underscore(l) => return Err(EvalError::Placeholder(l)),
            Term::Abs(l, name, dom, body) => match eta_contract(&body) {
                Some(t) => Done(t),
                None => Done(Term::Abs(l, name, dom, body)),
            },
            Term::SPrLeft(l, x) => match *x {
                Term::SPair(_, a, _) => Done(*a),
                x => Done(Term::SPrLeft(l, Box::new(x))),
            },
            Term::SPrRight(l, x) => match *x {
                Term::SPair(_, _, b) => Done(*b),
                x => Done(Term::SPrRight(l, Box::new(x))),
            },
            Term::SMatch(l, m) => match &m.scrutinee {
                Term::SInLeft(_, _, p) => Again(beta_redex(&m.left.body, p)),
                Term::SInRight(_, _, p) => Again(beta_redex(&m.right.body, p)),
                _ => Done(Term::SMatch(l, m)),
            },
            t => Done(t),
        })
    }

    /// Weak head normal form: reduce until the root is not a redex.
    pub fn whnf(&self, ctx: &dyn Bindings, t: &Term) -> Result<Term, EvalError> {
        let mut t = t.clone();
        loop {
            self.tick()?;
            t = match t {
                Term::App(l, head, mut args) => match self.whnf(ctx, &head)? {
                    Term::App(_, h, mut prefix) => {
                        prefix.append(&mut args);
                        Term::App(l, h, prefix)
                    }
                    Term::Abs(_, _, _, body) => {
                        let rest = args.split_off(1);
                        Term::app_at(l, beta_redex(&body, &args[0]), rest)
                    }
                    h => return Ok(Term::App(l, Box::new(h), args)),
                },
                Term::Let(_, _, _, bound, body) => beta_redex(&body, &bound),
                Term::Var(l, n) => match ctx.definition(n) {
                    Some(body) => body,
                    None => return Ok(Term::Var(l, n)),
                },
                Term::Const(l, name) => match self.sigma.find_const(self.is_essence, &name) {
                    Some((Some(body), _)) => body.clone(),
                    _ => return Ok(Term::Const(l, name)),
                },
                Term::Meta(l, id, susp) => match self.expand(id, &susp)? {
                    Some(e) => e,
                    None => return Ok(Term::Meta(l, id, susp)),
                },
                Term::SPrLeft(l, x) => match self.whnf(ctx, &x)? {
                    Term::SPair(_, a, _) => *a,
                    x => return Ok(Term::SPrLeft(l, Box::new(x))),
                },
                Term::SPrRight(l, x) => match self.whnf(ctx, &x)? {
                    Term::SPair(_, _, b) => *b,
                    x => return Ok(Term::SPrRight(l, Box::new(x))),
                },
                Term::SMatch(l, mut m) => match self.whnf(ctx, &m.scrutinee)? {
                    Term::SInLeft(_, _, p) => beta_redex(&m.left.body, &p),
                    Term::SInRight(_, _, p) => beta_redex(&m.right.body, &p),
                    s => {
                        m.scrutinee = s;
                        return Ok(Term::SMatch(l, m));
                    }
                },
                t => return Ok(t),
            }
        }
    }
}

/// `λx. f a… x` with `x` not free in `f a…` becomes `f a…`, shifted down.
fn eta_contract(body: &Term) -> Option<Term> {
    let Term::App(l, head, args) = body else {
        return None;
    };
    let (last, init) = args.split_last()?;
    if !matches!(last, Term::Var(_, 0)) {
        return None;
    }
    let rest = Term::app_at(*l, (**head).clone(), init.to_vec());
    if !is_eta(&rest) {
        return None;
    }
    Some(lift(0, -1, &rest))
}

/// True iff `Var 0` does not occur free in `t`.
pub fn is_eta(t: &Term) -> bool {
    !free_in(0, t)
}

/// Normalize a meta-variable free term.
pub fn strongly_normalize(
    is_essence: bool,
    sigma: &GlobalEnv,
    ctx: &dyn Bindings,
    t: &Term,
) -> Result<Term, EvalError> {
    Normalizer::new(sigma, None, is_essence).normalize(ctx, t)
}

/// Normalize, expanding instantiated meta-variables.
pub fn normalize_with_metas(
    is_essence: bool,
    sigma: &GlobalEnv,
    phi: &MetaEnv,
    ctx: &dyn Bindings,
    t: &Term,
) -> Result<Term, EvalError> {
    Normalizer::new(sigma, Some(phi), is_essence).normalize(ctx, t)
}

pub fn whnf(
    is_essence: bool,
    sigma: &GlobalEnv,
    phi: &MetaEnv,
    ctx: &dyn Bindings,
    t: &Term,
) -> Result<Term, EvalError> {
    Normalizer::new(sigma, Some(phi), is_essence).whnf(ctx, t)
}

fn delta_phi_expand_parts(phi: &MetaEnv, id: usize, susp: &[Term]) -> Option<Term> {
    match phi.get(id) {
        MetaEntry::SortDef(s) => Some(Term::Sort(Loc::dummy(), *s)),
        MetaEntry::TypedDef { ctx, body, .. } => {
            assert_eq!(
                susp.len(),
                ctx.len(),
                "suspension length mismatch for ?{id}"
            );
            Some(subst_suspension(body, susp))
        }
        MetaEntry::EssDef { ctx, essence } => {
            assert_eq!(
                susp.len(),
                ctx.len(),
                "suspension length mismatch for ?{id}"
            );
            Some(subst_suspension(essence, susp))
        }
        _ => None,
    }
}

/// One δΦ step on a meta-variable node; `None` when `m` is not an
/// instantiated meta-variable. Sort meta-variables ignore their suspension.
pub fn delta_phi_expand(phi: &MetaEnv, m: &Term) -> Option<Term> {
    match m {
        Term::Meta(_, id, susp) => delta_phi_expand_parts(phi, *id, susp),
        _ => None,
    }
}

/// Replace every instantiated meta-variable by its solution, recursively,
/// without any other reduction. Spines stay merged.
pub fn instantiate_metas(phi: &MetaEnv, t: &Term) -> Term {
    match t {
        Term::Meta(_, id, susp) => {
            let susp: Vec<Term> = susp.iter().map(|a| instantiate_metas(phi, a)).collect();
            match delta_phi_expand_parts(phi, *id, &susp) {
                Some(e) => instantiate_metas(phi, &e),
                None => Term::Meta(t.loc(), *id, susp),
            }
        }
        Term::App(l, head, args) => {
            let head = instantiate_metas(phi, head);
            let args = args.iter().map(|a| instantiate_metas(phi, a)).collect();
            Term::app_at(*l, head, args)
        }
        _ => visit_term(
            |c| instantiate_metas(phi, c),
            |_, c| instantiate_metas(phi, c),
            |s, _| s.to_string(),
            t,
        ),
    }
}

/// Is `t` free of the redexes the normalizer contracts? `defined` tells
/// whether a free variable (relative to the outside of `t`) has a body.
pub fn is_normal(sigma: &GlobalEnv, is_essence: bool, t: &Term) -> bool {
    fn go(sigma: &GlobalEnv, is_essence: bool, t: &Term) -> bool {
        let root_ok = match t {
            Term::App(_, h, _) => !matches!(**h, Term::App(..) | Term::Abs(..)),
            Term::Let(..) | Term::Underscore(_) => false,
            Term::Const(_, c) => !matches!(sigma.find_const(is_essence, c), Some((Some(_), _))),
            Term::Abs(_, _, _, body) => eta_contract(body).is_none(),
            Term::SPrLeft(_, x) | Term::SPrRight(_, x) => !matches!(**x, Term::SPair(..)),
            Term::SMatch(_, m) => !matches!(m.scrutinee, Term::SInLeft(..) | Term::SInRight(..)),
            _ => true,
        };
        root_ok
            && crate::syntax::children(t)
                .into_iter()
                .all(|(c, _)| go(sigma, is_essence, c))
    }
    go(sigma, is_essence, t)
}
