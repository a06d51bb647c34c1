//! Higher-order unification: structural rules plus pattern unification for
//! flexible terms, over typed terms or over essences.

use std::collections::HashMap;

use thiserror::Error;

use crate::env::{Bindings, EssenceEnv, GlobalEnv, LocalEnv, MetaEntry, MetaEnv};
use crate::eval::{instantiate_metas, normalize_with_metas, EvalError, Normalizer};
use crate::syntax::{lift, meta_occurs, same_term, Loc, Term};

#[derive(Clone, Debug, Error)]
pub enum UnifyError {
    #[error("cannot unify two rigid terms")]
    Mismatch {
        left: Box<Term>,
        right: Box<Term>,
        loc: Loc,
    },
    #[error("meta-variable ?{meta} occurs in its own solution")]
    Occurs { meta: usize, loc: Loc },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Unify two typed terms in `ctx`. On failure `phi` is left unchanged.
pub fn unify(
    phi: &mut MetaEnv,
    sigma: &GlobalEnv,
    ctx: &LocalEnv,
    t1: &Term,
    t2: &Term,
) -> Result<(), UnifyError> {
    transaction(phi, |phi| {
        Engine { sigma, phi }.unify(&Ctx::Typed(ctx.clone()), t1, t2)
    })
}

/// Unify two essences in `psi`. On failure `phi` is left unchanged.
pub fn unify_essence(
    phi: &mut MetaEnv,
    sigma: &GlobalEnv,
    psi: &EssenceEnv,
    m1: &Term,
    m2: &Term,
) -> Result<(), UnifyError> {
    transaction(phi, |phi| {
        Engine { sigma, phi }.unify(&Ctx::Essence(psi.clone()), m1, m2)
    })
}

/// Pattern unification of a flexible term `m` (a meta-variable, possibly
/// applied) against `rhs`. `Ok(false)` means the problem is outside the
/// handled fragment and `phi` is unchanged.
pub fn try_hopu(
    phi: &mut MetaEnv,
    sigma: &GlobalEnv,
    ctx: &LocalEnv,
    m: &Term,
    rhs: &Term,
) -> Result<bool, UnifyError> {
    let Some(flex) = Flex::of(m) else {
        return Ok(false);
    };
    transaction(phi, |phi| {
        Engine { sigma, phi }.hopu(&Ctx::Typed(ctx.clone()), &flex, rhs)
    })
}

fn transaction<T>(
    phi: &mut MetaEnv,
    f: impl FnOnce(&mut MetaEnv) -> Result<T, UnifyError>,
) -> Result<T, UnifyError> {
    let snapshot = phi.clone();
    let r = f(phi);
    if r.is_err() {
        *phi = snapshot;
    }
    r
}

#[derive(Clone)]
enum Ctx {
    Typed(LocalEnv),
    Essence(EssenceEnv),
}

impl Ctx {
    fn bindings(&self) -> &dyn Bindings {
        match self {
            Ctx::Typed(g) => g,
            Ctx::Essence(p) => p,
        }
    }

    fn is_essence(&self) -> bool {
        matches!(self, Ctx::Essence(_))
    }

    fn with_binder(&self, name: &str, dom: &Term) -> Ctx {
        match self {
            Ctx::Typed(g) => Ctx::Typed(g.with_decl(name, dom.clone())),
            Ctx::Essence(p) => Ctx::Essence(p.with_bare(name)),
        }
    }

    fn with_def(&self, name: &str, body: &Term, ty: &Term) -> Ctx {
        match self {
            Ctx::Typed(g) => Ctx::Typed(g.with_def(name, body.clone(), ty.clone())),
            Ctx::Essence(p) => Ctx::Essence(p.with_def(name, body.clone())),
        }
    }

    fn var_name(&self, v: usize) -> String {
        let names = match self {
            Ctx::Typed(g) => g.names(),
            Ctx::Essence(p) => p.names(),
        };
        names
            .get(names.len().wrapping_sub(v + 1))
            .cloned()
            .unwrap_or_else(|| "x".into())
    }

    /// Type of variable `v`, well-scoped at this context.
    fn var_type(&self, v: usize) -> Option<Term> {
        match self {
            Ctx::Typed(g) => Some(g.find_var(v).1),
            Ctx::Essence(_) => None,
        }
    }
}

/// A flexible term: meta-variable, suspension, and spine.
struct Flex {
    id: usize,
    loc: Loc,
    susp: Vec<Term>,
    spine: Vec<Term>,
}

impl Flex {
    fn of(t: &Term) -> Option<Flex> {
        match t {
            Term::Meta(loc, id, susp) => Some(Flex {
                id: *id,
                loc: *loc,
                susp: susp.clone(),
                spine: vec![],
            }),
            Term::App(_, h, args) => match &**h {
                Term::Meta(loc, id, susp) => Some(Flex {
                    id: *id,
                    loc: *loc,
                    susp: susp.clone(),
                    spine: args.clone(),
                }),
                _ => None,
            },
            _ => None,
        }
    }
}

struct Engine<'a> {
    sigma: &'a GlobalEnv,
    phi: &'a mut MetaEnv,
}

fn mismatch(a: &Term, b: &Term) -> UnifyError {
    let loc = if a.loc().is_dummy() { b.loc() } else { a.loc() };
    UnifyError::Mismatch {
        left: Box::new(a.clone()),
        right: Box::new(b.clone()),
        loc,
    }
}

impl Engine<'_> {
    fn normalize(&self, ctx: &Ctx, t: &Term) -> Result<Term, EvalError> {
        normalize_with_metas(ctx.is_essence(), self.sigma, self.phi, ctx.bindings(), t)
    }

    fn is_sort_meta(&self, t: &Term) -> Option<usize> {
        match t {
            Term::Meta(_, id, _) if self.phi.get(*id).is_sort() => Some(*id),
            _ => None,
        }
    }

    fn unify(&mut self, ctx: &Ctx, t1: &Term, t2: &Term) -> Result<(), UnifyError> {
        if self.unfolded_pattern(ctx, t1, t2) {
            return Ok(());
        }
        let a = self.normalize(ctx, t1)?;
        let b = self.normalize(ctx, t2)?;
        self.unify_normal(ctx, &a, &b)
    }

    fn unify_normal(&mut self, ctx: &Ctx, a: &Term, b: &Term) -> Result<(), UnifyError> {
        // sort meta-variables only ever stand for Type or Kind
        match (self.is_sort_meta(a), self.is_sort_meta(b)) {
            (Some(x), Some(y)) => {
                return if x == y { Ok(()) } else { Err(mismatch(a, b)) };
            }
            (Some(x), None) => {
                if let Term::Sort(_, s) = b {
                    self.phi
                        .set_sort(x, *s)
                        .expect("unsolved sort meta-variable");
                    return Ok(());
                }
                if Flex::of(b).is_none() {
                    return Err(mismatch(a, b));
                }
            }
            (None, Some(y)) => {
                if let Term::Sort(_, s) = a {
                    self.phi
                        .set_sort(y, *s)
                        .expect("unsolved sort meta-variable");
                    return Ok(());
                }
                if Flex::of(a).is_none() {
                    return Err(mismatch(a, b));
                }
            }
            (None, None) => {}
        }

        let fa = Flex::of(a).filter(|f| !self.phi.get(f.id).is_sort());
        let fb = Flex::of(b).filter(|f| !self.phi.get(f.id).is_sort());
        if fa.is_some() || fb.is_some() {
            // the same meta-variable on both sides: compare arguments
            if let (Some(x), Some(y)) = (&fa, &fb) {
                if x.id == y.id && x.susp.len() == y.susp.len() && x.spine.len() == y.spine.len() {
                    let snapshot = self.phi.clone();
                    let r = self
                        .unify_lists(ctx, &x.susp, &y.susp)
                        .and_then(|_| self.unify_lists(ctx, &x.spine, &y.spine));
                    if r.is_ok() {
                        return Ok(());
                    }
                    *self.phi = snapshot;
                }
            }
            if let Some(x) = &fa {
                if self.hopu(ctx, x, b)? {
                    return Ok(());
                }
            }
            if let Some(y) = &fb {
                if self.hopu(ctx, y, a)? {
                    return Ok(());
                }
            }
            if let Some(x) = &fa {
                if self.imitate(ctx, x, a, b)? {
                    return Ok(());
                }
            }
            if let Some(y) = &fb {
                if self.imitate(ctx, y, b, a)? {
                    return Ok(());
                }
            }
            if fa.is_some() && fb.is_some() {
                return Err(mismatch(a, b));
            }
            // otherwise fall through to structural descent (App spines)
        }

        match (a, b) {
            (Term::Abs(_, x, dom, body), other) if !other.is_abs() => {
                let inner = ctx.with_binder(x, dom);
                let applied = Term::app(lift(0, 1, other), vec![Term::var(0)]);
                return self.unify(&inner, body, &applied);
            }
            (other, Term::Abs(_, x, dom, body)) if !other.is_abs() => {
                let inner = ctx.with_binder(x, dom);
                let applied = Term::app(lift(0, 1, other), vec![Term::var(0)]);
                return self.unify(&inner, &applied, body);
            }
            _ => {}
        }
        self.congruence(ctx, a, b)
    }

    /// Solve a pattern against the other side before normalization, so
    /// that solutions keep the user's definitions folded. Any failure here
    /// defers to the normalizing path.
    fn unfolded_pattern(&mut self, ctx: &Ctx, t1: &Term, t2: &Term) -> bool {
        let a = instantiate_metas(self.phi, t1);
        let b = instantiate_metas(self.phi, t2);
        for (flex, other) in [(&a, &b), (&b, &a)] {
            let Some(f) = Flex::of(flex) else { continue };
            let all_vars = f
                .susp
                .iter()
                .chain(&f.spine)
                .all(|x| matches!(x, Term::Var(..)));
            if !all_vars || Flex::of(other).is_some() || self.phi.get(f.id).is_sort() {
                continue;
            }
            let snapshot = self.phi.clone();
            match self.hopu(ctx, &f, other) {
                Ok(true) => return true,
                _ => *self.phi = snapshot,
            }
        }
        false
    }

    fn unify_lists(&mut self, ctx: &Ctx, xs: &[Term], ys: &[Term]) -> Result<(), UnifyError> {
        for (x, y) in xs.iter().zip(ys) {
            self.unify(ctx, x, y)?;
        }
        Ok(())
    }

    /// Same constructor on both sides: unify children left to right.
    fn congruence(&mut self, ctx: &Ctx, a: &Term, b: &Term) -> Result<(), UnifyError> {
        use Term::*;
        match (a, b) {
            (Sort(_, s1), Sort(_, s2)) if s1 == s2 => Ok(()),
            (Const(_, c1), Const(_, c2)) if c1 == c2 => Ok(()),
            (Var(_, x1), Var(_, x2)) if x1 == x2 => Ok(()),
            (Prod(_, x, d1, c1), Prod(_, _, d2, c2)) | (Abs(_, x, d1, c1), Abs(_, _, d2, c2)) => {
                self.unify(ctx, d1, d2)?;
                self.unify(&ctx.with_binder(x, d1), c1, c2)
            }
            (Let(_, x, t1, v1, b1), Let(_, _, t2, v2, b2)) => {
                self.unify(ctx, t1, t2)?;
                self.unify(ctx, v1, v2)?;
                self.unify(&ctx.with_def(x, v1, t1), b1, b2)
            }
            (App(_, h1, s1), App(_, h2, s2)) if s1.len() == s2.len() => {
                self.unify(ctx, h1, h2)?;
                self.unify_lists(ctx, s1, s2)
            }
            (Inter(_, a1, b1), Inter(_, a2, b2))
            | (Union(_, a1, b1), Union(_, a2, b2))
            | (SPair(_, a1, b1), SPair(_, a2, b2))
            | (SInLeft(_, a1, b1), SInLeft(_, a2, b2))
            | (SInRight(_, a1, b1), SInRight(_, a2, b2))
            | (Coercion(_, a1, b1), Coercion(_, a2, b2)) => {
                self.unify(ctx, a1, a2)?;
                self.unify(ctx, b1, b2)
            }
            (SPrLeft(_, x1), SPrLeft(_, x2)) | (SPrRight(_, x1), SPrRight(_, x2)) => {
                self.unify(ctx, x1, x2)
            }
            (SMatch(_, m1), SMatch(_, m2)) => {
                self.unify(ctx, &m1.scrutinee, &m2.scrutinee)?;
                self.unify(ctx, &m1.ret, &m2.ret)?;
                self.unify(ctx, &m1.left.annot, &m2.left.annot)?;
                self.unify(
                    &ctx.with_binder(&m1.left.name, &m1.left.annot),
                    &m1.left.body,
                    &m2.left.body,
                )?;
                self.unify(ctx, &m1.right.annot, &m2.right.annot)?;
                self.unify(
                    &ctx.with_binder(&m1.right.name, &m1.right.annot),
                    &m1.right.body,
                    &m2.right.body,
                )
            }
            (Meta(_, i1, s1), Meta(_, i2, s2)) if i1 == i2 && s1.len() == s2.len() => {
                self.unify_lists(ctx, s1, s2)
            }
            _ => Err(mismatch(a, b)),
        }
    }

    /// `?f[susp] spine ≐ rhs`. Arguments that are not variables, or repeat
    /// an earlier variable, are not abstracted over.
    fn hopu(&mut self, ctx: &Ctx, flex: &Flex, rhs: &Term) -> Result<bool, UnifyError> {
        let entry = self.phi.get(flex.id).clone();
        if entry.is_instantiated() || entry.is_sort() {
            return Ok(false);
        }
        assert_eq!(
            flex.susp.len(),
            entry.arity(),
            "suspension length of ?{}",
            flex.id
        );
        if meta_occurs(flex.id, rhs) {
            return Err(UnifyError::Occurs {
                meta: flex.id,
                loc: flex.loc,
            });
        }
        let m = flex.susp.len();
        let k = flex.spine.len();
        let mut positions: HashMap<usize, usize> = HashMap::new();
        for (i, arg) in flex.susp.iter().chain(&flex.spine).enumerate() {
            if let Term::Var(_, v) = arg {
                positions.entry(*v).or_insert(i);
            }
        }
        let Some(body) = rename(&positions, m + k, 0, rhs) else {
            return Ok(false);
        };
        let Some(domains) = self.spine_domains(ctx, flex, &entry, &positions)? else {
            return Ok(false);
        };
        let mut solution = body;
        for j in (0..k).rev() {
            let name = match &flex.spine[j] {
                Term::Var(_, v) => ctx.var_name(*v),
                _ => "x".to_string(),
            };
            solution = Term::abs(&name, domains[j].clone(), solution);
        }
        self.phi
            .instantiate(flex.id, solution)
            .expect("undeclared meta-variable");
        Ok(true)
    }

    /// Domains for the abstractions of a pattern solution: read off the
    /// meta-variable's declared type, else transported from the types of
    /// the spine variables.
    fn spine_domains(
        &self,
        ctx: &Ctx,
        flex: &Flex,
        entry: &MetaEntry,
        positions: &HashMap<usize, usize>,
    ) -> Result<Option<Vec<Term>>, EvalError> {
        let k = flex.spine.len();
        let (mctx, ty) = match entry {
            MetaEntry::EssDecl { .. } => return Ok(Some(vec![Term::nothing(); k])),
            MetaEntry::TypedDecl { ctx, ty } => (ctx, ty),
            _ => unreachable!("hopu on a solved or sort meta-variable"),
        };
        if k == 0 {
            return Ok(Some(vec![]));
        }
        let norm = Normalizer::new(self.sigma, Some(self.phi), false);
        let mut inner = (**mctx).clone();
        let mut cur = norm.normalize(&inner, ty)?;
        let mut from_type = Vec::new();
        for _ in 0..k {
            match norm.whnf(&inner, &cur)? {
                Term::Prod(_, x, d, c) => {
                    from_type.push((*d).clone());
                    inner.push_decl(&x, (*d).clone());
                    cur = *c;
                }
                _ => break,
            }
        }
        if from_type.len() == k {
            return Ok(Some(from_type));
        }
        let m = flex.susp.len();
        let mut domains = Vec::new();
        for (j, arg) in flex.spine.iter().enumerate() {
            let Term::Var(_, v) = arg else {
                return Ok(None);
            };
            let Some(ty) = ctx.var_type(*v) else {
                return Ok(None);
            };
            // only the first m + j abstraction positions are in scope here
            let visible: HashMap<usize, usize> = positions
                .iter()
                .filter(|(_, &i)| i < m + j)
                .map(|(a, b)| (*a, *b))
                .collect();
            match rename(&visible, m + j, 0, &ty) {
                Some(d) => domains.push(d),
                None => return Ok(None),
            }
        }
        Ok(Some(domains))
    }

    /// Solve a bare meta-variable against a rigid type former by giving it
    /// the same head with fresh meta-variables below, then unify again.
    fn imitate(
        &mut self,
        ctx: &Ctx,
        flex: &Flex,
        a: &Term,
        rhs: &Term,
    ) -> Result<bool, UnifyError> {
        if !flex.spine.is_empty() || self.phi.get(flex.id).is_instantiated() {
            return Ok(false);
        }
        let snapshot = self.phi.clone();
        let solution = match (self.phi.get(flex.id).clone(), rhs) {
            (MetaEntry::TypedDecl { ctx: mctx, .. }, _) => {
                let mctx = (*mctx).clone();
                let hole = |phi: &mut MetaEnv, g: &LocalEnv, ty: Option<Term>| {
                    let ty = ty.unwrap_or_else(|| {
                        let s = phi.fresh_sort();
                        let t = phi.fresh_typed(g, Term::meta(s, vec![]));
                        Term::meta(t, g.erase())
                    });
                    Term::meta(phi.fresh_typed(g, ty), g.erase())
                };
                match rhs {
                    Term::Prod(l, x, _, _) => {
                        let s1 = self.phi.fresh_sort();
                        let d = hole(self.phi, &mctx, Some(Term::meta(s1, vec![])));
                        let s2 = self.phi.fresh_sort();
                        let inner = mctx.with_decl(x, d.clone());
                        let c = hole(self.phi, &inner, Some(Term::meta(s2, vec![])));
                        Term::Prod(*l, x.clone(), Box::new(d), Box::new(c))
                    }
                    Term::Inter(l, _, _) | Term::Union(l, _, _) => {
                        let x = hole(self.phi, &mctx, Some(Term::ty()));
                        let y = hole(self.phi, &mctx, Some(Term::ty()));
                        if matches!(rhs, Term::Inter(..)) {
                            Term::Inter(*l, Box::new(x), Box::new(y))
                        } else {
                            Term::Union(*l, Box::new(x), Box::new(y))
                        }
                    }
                    Term::App(l, h, args) if matches!(**h, Term::Const(..)) => {
                        let holes = args.iter().map(|_| hole(self.phi, &mctx, None)).collect();
                        Term::App(*l, h.clone(), holes)
                    }
                    _ => return Ok(false),
                }
            }
            (MetaEntry::EssDecl { ctx: mctx, .. }, _) => {
                let mctx = (*mctx).clone();
                let hole =
                    |phi: &mut MetaEnv, p: &EssenceEnv| Term::meta(phi.fresh_essence(p), p.erase());
                match rhs {
                    Term::Prod(l, x, _, _) => {
                        let d = hole(self.phi, &mctx);
                        let c = hole(self.phi, &mctx.with_bare(x));
                        Term::Prod(*l, x.clone(), Box::new(d), Box::new(c))
                    }
                    Term::Abs(l, x, _, _) => {
                        let c = hole(self.phi, &mctx.with_bare(x));
                        Term::Abs(*l, x.clone(), Box::new(Term::nothing()), Box::new(c))
                    }
                    Term::Inter(l, _, _) => Term::Inter(
                        *l,
                        Box::new(hole(self.phi, &mctx)),
                        Box::new(hole(self.phi, &mctx)),
                    ),
                    Term::Union(l, _, _) => Term::Union(
                        *l,
                        Box::new(hole(self.phi, &mctx)),
                        Box::new(hole(self.phi, &mctx)),
                    ),
                    Term::App(l, h, args) if matches!(**h, Term::Const(..)) => {
                        let holes = args.iter().map(|_| hole(self.phi, &mctx)).collect();
                        Term::App(*l, h.clone(), holes)
                    }
                    _ => return Ok(false),
                }
            }
            _ => return Ok(false),
        };
        self.phi
            .instantiate(flex.id, solution)
            .expect("undeclared meta-variable");
        match self.unify(ctx, a, rhs) {
            Ok(()) => Ok(true),
            Err(_) => {
                *self.phi = snapshot;
                Ok(false)
            }
        }
    }
}

/// Move `t` from the unification context into the scope of a pattern
/// solution: a free variable `v` found at argument position `i` becomes
/// index `total - 1 - i`. `None` when some free variable is not among the
/// arguments.
fn rename(positions: &HashMap<usize, usize>, total: usize, depth: usize, t: &Term) -> Option<Term> {
    match t {
        Term::Var(l, n) if *n < depth => Some(Term::Var(*l, *n)),
        Term::Var(l, n) => {
            let i = positions.get(&(n - depth))?;
            Some(Term::Var(*l, total - 1 - i + depth))
        }
        _ => crate::syntax::try_visit_term(
            |c| rename(positions, total, depth, c).ok_or(()),
            |_, c| rename(positions, total, depth + 1, c).ok_or(()),
            |s, _| s.to_string(),
            t,
        )
        .ok(),
    }
}

/// After a successful unification, both sides normalize to the same term.
pub fn check_solution(
    phi: &MetaEnv,
    sigma: &GlobalEnv,
    ctx: &LocalEnv,
    t1: &Term,
    t2: &Term,
) -> Result<bool, EvalError> {
    let a = normalize_with_metas(false, sigma, phi, ctx, t1)?;
    let b = normalize_with_metas(false, sigma, phi, ctx, t2)?;
    Ok(same_term(&a, &b))
}
