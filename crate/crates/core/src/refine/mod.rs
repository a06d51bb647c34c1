//! Bidirectional refinement. Phase one fills placeholders and checks
//! types; phase two computes essences and checks that strong pairs and
//! strong sums have components with equal essences.

mod error;
mod essence;

pub use error::RefineError;
pub use essence::print_essence;

use crate::env::{EssenceEnv, GlobalEnv, LocalEntry, LocalEnv, MetaEntry, MetaEnv};
use crate::eval::{instantiate_metas, normalize_with_metas, whnf, EvalError};
use crate::parser::print_term;
use crate::subtype::{canf, danf, subtype_normal};
use crate::syntax::{beta_redex, lift, subst_suspension, Branch, Loc, Match, Sort, Term};
use crate::unify::{unify, UnifyError};

pub type Result<T> = std::result::Result<T, RefineError>;

/// The four components stored for a checked constant.
#[derive(Clone, Debug)]
pub struct Elaborated {
    pub term: Term,
    pub ty: Term,
    pub essence: Term,
    pub ty_essence: Term,
}

/// Elaborate a closed term, against `expected` when given.
pub fn elaborate(sigma: &GlobalEnv, t: &Term, expected: Option<&Term>) -> Result<Elaborated> {
    let mut r = Refiner::new(sigma);
    let empty = LocalEnv::new();
    let (term, ty) = match expected {
        Some(e) => {
            let (e, _) = r.force_type(&empty, e)?;
            let t = r.check(&empty, t, &e)?;
            (t, e)
        }
        None => r.reconstruct(&empty, t)?,
    };
    let term = instantiate_metas(&r.phi, &term);
    let ty = instantiate_metas(&r.phi, &ty);
    r.ensure_meta_free(&ty)?;
    r.ensure_meta_free(&term)?;
    let psi = EssenceEnv::new();
    let essence = r.essence(&psi, &term)?;
    let ty_essence = r.essence(&psi, &ty)?;
    Ok(Elaborated {
        essence: instantiate_metas(&r.phi, &essence),
        ty_essence: instantiate_metas(&r.phi, &ty_essence),
        term,
        ty,
    })
}

/// Elaborate a closed type; returns the type and its essence.
pub fn elaborate_type(sigma: &GlobalEnv, t: &Term) -> Result<(Term, Term)> {
    let mut r = Refiner::new(sigma);
    let (ty, _) = r.force_type(&LocalEnv::new(), t)?;
    let ty = instantiate_metas(&r.phi, &ty);
    r.ensure_meta_free(&ty)?;
    let ess = r.essence(&EssenceEnv::new(), &ty)?;
    Ok((ty, instantiate_metas(&r.phi, &ess)))
}

/// Refinement state: the global environment and the meta-variables
/// created so far.
pub struct Refiner<'a> {
    pub sigma: &'a GlobalEnv,
    pub phi: MetaEnv,
}

impl<'a> Refiner<'a> {
    pub fn new(sigma: &'a GlobalEnv) -> Self {
        Refiner {
            sigma,
            phi: MetaEnv::new(),
        }
    }

    fn show(&self, ctx: &LocalEnv, t: &Term) -> String {
        print_term(&instantiate_metas(&self.phi, t), &ctx.names())
    }

    fn eval_err(loc: Loc) -> impl Fn(EvalError) -> RefineError {
        move |source| RefineError::Eval { source, loc }
    }

    /// Expose the top constructor of a type.
    fn view(&self, ctx: &LocalEnv, t: &Term) -> Result<Term> {
        whnf(false, self.sigma, &self.phi, ctx, t).map_err(Self::eval_err(t.loc()))
    }

    fn unify(&mut self, ctx: &LocalEnv, a: &Term, b: &Term) -> std::result::Result<(), UnifyError> {
        unify(&mut self.phi, self.sigma, ctx, a, b)
    }

    /// Would `a ≐ b` succeed? Nothing is recorded.
    fn probe(&self, ctx: &LocalEnv, a: &Term, b: &Term) -> bool {
        let mut phi = self.phi.clone();
        unify(&mut phi, self.sigma, ctx, a, b).is_ok()
    }

    /// A fresh typed meta-variable over the whole of `ctx`.
    fn hole(&mut self, ctx: &LocalEnv, ty: Term, loc: Loc) -> Term {
        let id = self.phi.fresh_typed(ctx, ty);
        Term::Meta(loc, id, ctx.erase())
    }

    fn ensure_meta_free(&self, t: &Term) -> Result<()> {
        let Some((id, loc)) = t.metas().into_iter().next() else {
            if let Some(loc) = t.first_underscore() {
                return Err(RefineError::UnresolvedMeta {
                    id: 0,
                    ty: "_".into(),
                    loc,
                });
            }
            return Ok(());
        };
        let ty = match self.phi.get(id) {
            MetaEntry::TypedDecl { ctx, ty } => {
                print_term(&instantiate_metas(&self.phi, ty), &ctx.names())
            }
            MetaEntry::SortDecl => "a sort".to_string(),
            _ => "?".to_string(),
        };
        Err(RefineError::UnresolvedMeta { id, ty, loc })
    }

    /// Infer: returns the refined term and its type.
    pub fn reconstruct(&mut self, ctx: &LocalEnv, t: &Term) -> Result<(Term, Term)> {
        match t {
            Term::Sort(_, Sort::Type) => Ok((t.clone(), Term::kind())),
            Term::Sort(l, Sort::Kind) => Err(RefineError::KindUntyped { loc: *l }),
            Term::Var(_, n) => Ok((t.clone(), ctx.find_var(*n).1)),
            Term::Const(l, c) => match self.sigma.get(c) {
                Some(e) => Ok((t.clone(), e.ty().clone())),
                None => Err(RefineError::Unbound {
                    name: c.clone(),
                    loc: *l,
                }),
            },
            Term::Underscore(l) => {
                let z = self.phi.fresh_sort();
                let y = self.hole(ctx, Term::Meta(*l, z, vec![]), *l);
                let x = self.hole(ctx, y.clone(), *l);
                Ok((x, y))
            }
            Term::Meta(l, id, susp) => self.reconstruct_meta(ctx, *l, *id, susp),
            Term::Let(l, x, annot, bound, body) => {
                let (annot, _) = self.force_type(ctx, annot)?;
                let bound = self.check(ctx, bound, &annot)?;
                let inner = ctx.with_def(x, bound.clone(), annot.clone());
                let (body, ty) = self.reconstruct(&inner, body)?;
                let ty = beta_redex(&ty, &bound);
                Ok((
                    Term::Let(
                        *l,
                        x.clone(),
                        Box::new(annot),
                        Box::new(bound),
                        Box::new(body),
                    ),
                    ty,
                ))
            }
            Term::Prod(l, x, dom, cod) => {
                let (dom, s1) = self.force_type(ctx, dom)?;
                let inner = ctx.with_decl(x, dom.clone());
                let (cod, s2) = self.force_type(&inner, cod)?;
                let prod = Term::Prod(*l, x.clone(), Box::new(dom), Box::new(cod));
                let s = self.pts(ctx, &inner, &s1, &s2, &prod)?;
                Ok((prod, s))
            }
            Term::Abs(l, x, dom, body) => {
                let (dom, _) = self.force_type(ctx, dom)?;
                let inner = ctx.with_decl(x, dom.clone());
                let (body, ty) = self.reconstruct(&inner, body)?;
                let prod = Term::Prod(*l, x.clone(), Box::new(dom.clone()), Box::new(ty));
                let (prod, _) = self.force_type(ctx, &prod)?;
                Ok((
                    Term::Abs(*l, x.clone(), Box::new(dom), Box::new(body)),
                    prod,
                ))
            }
            Term::App(l, head, args) => {
                let (head, mut ty) = self.reconstruct(ctx, head)?;
                let mut done = Vec::with_capacity(args.len());
                for arg in args {
                    let so_far = Term::app(head.clone(), done.clone());
                    let (a, next) = self.apply(ctx, &so_far, &ty, arg)?;
                    done.push(a);
                    ty = next;
                }
                Ok((Term::app_at(*l, head, done), ty))
            }
            Term::Inter(l, a, b) | Term::Union(l, a, b) => {
                let a = self.check(ctx, a, &Term::ty())?;
                let b = self.check(ctx, b, &Term::ty())?;
                let t = if matches!(t, Term::Inter(..)) {
                    Term::Inter(*l, Box::new(a), Box::new(b))
                } else {
                    Term::Union(*l, Box::new(a), Box::new(b))
                };
                Ok((t, Term::ty()))
            }
            Term::SPair(l, a, b) => {
                let (a, s1) = self.reconstruct(ctx, a)?;
                let (b, s2) = self.reconstruct(ctx, b)?;
                let ty = self.check(
                    ctx,
                    &Term::Inter(*l, Box::new(s1), Box::new(s2)),
                    &Term::ty(),
                )?;
                Ok((Term::SPair(*l, Box::new(a), Box::new(b)), ty))
            }
            Term::SPrLeft(l, d) | Term::SPrRight(l, d) => {
                let left = matches!(t, Term::SPrLeft(..));
                let (d, ty) = self.reconstruct(ctx, d)?;
                let (s1, s2) = match self.view(ctx, &ty)? {
                    Term::Inter(_, s1, s2) => (*s1, *s2),
                    _ => {
                        let s1 = self.hole(ctx, Term::ty(), *l);
                        let s2 = self.hole(ctx, Term::ty(), *l);
                        let target = Term::inter(s1.clone(), s2.clone());
                        if self.unify(ctx, &ty, &target).is_err() {
                            return Err(RefineError::NotAnIntersection {
                                term: self.show(ctx, &d),
                                ty: self.show(ctx, &ty),
                                loc: d.loc(),
                            });
                        }
                        (s1, s2)
                    }
                };
                Ok(if left {
                    (Term::SPrLeft(*l, Box::new(d)), s1)
                } else {
                    (Term::SPrRight(*l, Box::new(d)), s2)
                })
            }
            Term::SInLeft(l, other, d) | Term::SInRight(l, other, d) => {
                let (d, ty) = self.reconstruct(ctx, d)?;
                let other = self.check(ctx, other, &Term::ty())?;
                Ok(if matches!(t, Term::SInLeft(..)) {
                    let u = Term::union(ty, other.clone());
                    (Term::SInLeft(*l, Box::new(other), Box::new(d)), u)
                } else {
                    let u = Term::union(other.clone(), ty);
                    (Term::SInRight(*l, Box::new(other), Box::new(d)), u)
                })
            }
            Term::Coercion(l, target, d) => {
                let (target, _) = self.force_type(ctx, target)?;
                let (d, ty) = self.reconstruct(ctx, d)?;
                self.check_subtype(ctx, &d, &ty, &target)?;
                Ok((
                    Term::Coercion(*l, Box::new(target.clone()), Box::new(d)),
                    target,
                ))
            }
            Term::SMatch(l, m) => self.reconstruct_match(ctx, *l, m),
        }
    }

    /// One spine step: `head : ty` applied to `arg`.
    fn apply(
        &mut self,
        ctx: &LocalEnv,
        head: &Term,
        ty: &Term,
        arg: &Term,
    ) -> Result<(Term, Term)> {
        if let Term::Prod(_, _, dom, cod) = self.view(ctx, ty)? {
            let arg = self.check(ctx, arg, &dom)?;
            let next = beta_redex(&cod, &arg);
            return Ok((arg, next));
        }
        let (arg, dom) = self.reconstruct(ctx, arg)?;
        let y = self.phi.fresh_sort();
        let inner = ctx.with_decl("x", dom.clone());
        let x = self.phi.fresh_typed(&inner, Term::meta(y, vec![]));
        let target = Term::prod("x", dom, Term::meta(x, inner.erase()));
        if self.unify(ctx, ty, &target).is_err() {
            return Err(RefineError::NotAFunction {
                term: self.show(ctx, head),
                ty: self.show(ctx, ty),
                loc: head.loc(),
            });
        }
        let mut susp = ctx.erase();
        susp.push(arg.clone());
        Ok((arg, Term::meta(x, susp)))
    }

    fn reconstruct_meta(
        &mut self,
        ctx: &LocalEnv,
        l: Loc,
        id: usize,
        susp: &[Term],
    ) -> Result<(Term, Term)> {
        let t = Term::Meta(l, id, susp.to_vec());
        match self.phi.get(id).clone() {
            MetaEntry::SortDef(Sort::Type) => Ok((t, Term::kind())),
            MetaEntry::SortDef(Sort::Kind) => Err(RefineError::KindUntyped { loc: l }),
            MetaEntry::SortDecl => {
                // only Type has a type
                self.phi
                    .set_sort(id, Sort::Type)
                    .expect("unsolved sort meta-variable");
                Ok((t, Term::kind()))
            }
            MetaEntry::TypedDecl { ctx: mctx, ty } | MetaEntry::TypedDef { ctx: mctx, ty, .. } => {
                let mut done = Vec::with_capacity(susp.len());
                for (i, (entry, d)) in mctx.entries().iter().zip(susp).enumerate() {
                    let expected = subst_suspension(entry_ty(entry), &done[..i]);
                    done.push(self.check(ctx, d, &expected)?);
                }
                let ty = subst_suspension(&ty, &done);
                Ok((Term::Meta(l, id, done), ty))
            }
            MetaEntry::EssDecl { .. } | MetaEntry::EssDef { .. } => {
                unreachable!("essence meta-variable ?{id} in a typed term")
            }
        }
    }

    fn reconstruct_match(
        &mut self,
        ctx: &LocalEnv,
        l: Loc,
        m: &Match<Term>,
    ) -> Result<(Term, Term)> {
        let (scrutinee, sty) = self.reconstruct(ctx, &m.scrutinee)?;
        let s1 = self.check(ctx, &m.left.annot, &Term::ty())?;
        let s2 = self.check(ctx, &m.right.annot, &Term::ty())?;
        let sum = Term::union(s1.clone(), s2.clone());
        if self.unify(ctx, &sty, &sum).is_err() {
            return Err(RefineError::TypeMismatch {
                term: self.show(ctx, &scrutinee),
                found: self.show(ctx, &sty),
                expected: self.show(ctx, &sum),
                loc: m.scrutinee.loc(),
            });
        }
        let ret = self.check(ctx, &m.ret, &Term::prod("x", sum, Term::ty()))?;
        let family = match &ret {
            Term::Abs(_, _, _, body) => (**body).clone(),
            r => Term::app(lift(0, 1, r), vec![Term::var(0)]),
        };
        // the return family at the injected branch variable
        let at = |inj: Term| beta_redex(&lift(1, 1, &family), &inj);
        let inj1 = Term::inj_l(lift(0, 1, &s2), Term::var(0));
        let inj2 = Term::inj_r(lift(0, 1, &s1), Term::var(0));
        let left_ctx = ctx.with_decl(&m.left.name, s1.clone());
        let left_body = self.check(&left_ctx, &m.left.body, &at(inj1))?;
        let right_ctx = ctx.with_decl(&m.right.name, s2.clone());
        let right_body = self.check(&right_ctx, &m.right.body, &at(inj2))?;
        let ty = beta_redex(&family, &scrutinee);
        let t = Term::SMatch(
            l,
            Box::new(Match {
                scrutinee,
                ret,
                left: Branch {
                    name: m.left.name.clone(),
                    annot: s1,
                    body: left_body,
                },
                right: Branch {
                    name: m.right.name.clone(),
                    annot: s2,
                    body: right_body,
                },
            }),
        );
        Ok((t, ty))
    }

    fn check_subtype(&self, ctx: &LocalEnv, d: &Term, found: &Term, target: &Term) -> Result<()> {
        let err = || RefineError::NotSubtype {
            term: self.show(ctx, d),
            found: self.show(ctx, found),
            target: self.show(ctx, target),
            loc: d.loc(),
        };
        let norm = |t: &Term| normalize_with_metas(false, self.sigma, &self.phi, ctx, t);
        let a = norm(found).map_err(Self::eval_err(d.loc()))?;
        let b = norm(target).map_err(Self::eval_err(target.loc()))?;
        if a.has_metas() || b.has_metas() {
            return Err(err());
        }
        if subtype_normal(&danf(&a), &canf(&b)) {
            Ok(())
        } else {
            Err(err())
        }
    }

    /// Allowed products: a type may depend on a term (Type, Type), and a
    /// kind may depend on a term (Type, Kind).
    fn pts(
        &mut self,
        ctx: &LocalEnv,
        inner: &LocalEnv,
        s1: &Term,
        s2: &Term,
        prod: &Term,
    ) -> Result<Term> {
        for s in [Sort::Type, Sort::Kind] {
            let snapshot = self.phi.clone();
            let sort = Term::Sort(Loc::dummy(), s);
            if self.unify(ctx, s1, &Term::ty()).is_ok() && self.unify(inner, s2, &sort).is_ok() {
                return Ok(sort);
            }
            self.phi = snapshot;
        }
        let show_sort = |t: &Term| match instantiate_metas(&self.phi, t) {
            Term::Sort(_, Sort::Type) => "type".to_string(),
            Term::Sort(_, Sort::Kind) => "kind".to_string(),
            _ => "sort".to_string(),
        };
        Err(RefineError::Pts {
            term: self.show(ctx, prod),
            dom_sort: show_sort(s1),
            cod_sort: show_sort(s2),
            loc: prod.loc(),
        })
    }

    /// Refine `t` and make sure it is a type; returns it with its sort
    /// (`Type`, `Kind`, or a sort meta-variable when both fit).
    pub fn force_type(&mut self, ctx: &LocalEnv, t: &Term) -> Result<(Term, Term)> {
        let (t, ty) = self.reconstruct(ctx, t)?;
        let as_type = self.probe(ctx, &ty, &Term::ty());
        let as_kind = self.probe(ctx, &ty, &Term::kind());
        let sort = match (as_type, as_kind) {
            (true, true) => {
                let norm = normalize_with_metas(false, self.sigma, &self.phi, ctx, &ty)
                    .map_err(Self::eval_err(t.loc()))?;
                match norm {
                    Term::Meta(_, id, _) if self.phi.get(id).is_sort() => norm,
                    _ => {
                        let s = Term::meta(self.phi.fresh_sort(), vec![]);
                        self.unify(ctx, &ty, &s)
                            .map_err(|_| self.not_a_type(ctx, &t, &ty))?;
                        s
                    }
                }
            }
            (true, false) => {
                self.unify(ctx, &ty, &Term::ty())
                    .expect("probed unification");
                Term::ty()
            }
            (false, true) => {
                self.unify(ctx, &ty, &Term::kind())
                    .expect("probed unification");
                Term::kind()
            }
            (false, false) => return Err(self.not_a_type(ctx, &t, &ty)),
        };
        Ok((t, sort))
    }

    fn not_a_type(&self, ctx: &LocalEnv, t: &Term, ty: &Term) -> RefineError {
        RefineError::NotAType {
            term: self.show(ctx, t),
            ty: self.show(ctx, ty),
            loc: t.loc(),
        }
    }

    /// Check `t` against `expected`; returns the refined term.
    pub fn check(&mut self, ctx: &LocalEnv, t: &Term, expected: &Term) -> Result<Term> {
        match t {
            Term::Let(l, x, annot, bound, body) => {
                let (annot, _) = self.force_type(ctx, annot)?;
                let bound = self.check(ctx, bound, &annot)?;
                let inner = ctx.with_def(x, bound.clone(), annot.clone());
                let body = self.check(&inner, body, &lift(0, 1, expected))?;
                Ok(Term::Let(
                    *l,
                    x.clone(),
                    Box::new(annot),
                    Box::new(bound),
                    Box::new(body),
                ))
            }
            Term::Abs(l, x, dom, body) => {
                let Term::Prod(_, _, d, c) = self.view(ctx, expected)? else {
                    return self.check_default(ctx, t, expected);
                };
                let (dom_r, _) = self.force_type(ctx, dom)?;
                if self.unify(ctx, &dom_r, &d).is_err() {
                    let loc = if dom.loc().is_dummy() { *l } else { dom.loc() };
                    return Err(RefineError::DomainMismatch {
                        found: self.show(ctx, &dom_r),
                        expected: self.show(ctx, &d),
                        loc,
                    });
                }
                let inner = ctx.with_decl(x, dom_r.clone());
                let body = self.check(&inner, body, &c)?;
                Ok(Term::Abs(*l, x.clone(), Box::new(dom_r), Box::new(body)))
            }
            Term::SPair(l, a, b) => {
                let Term::Inter(_, s1, s2) = self.view(ctx, expected)? else {
                    return self.check_default(ctx, t, expected);
                };
                let a = self.check(ctx, a, &s1)?;
                let b = self.check(ctx, b, &s2)?;
                Ok(Term::SPair(*l, Box::new(a), Box::new(b)))
            }
            Term::SPrLeft(l, d) | Term::SPrRight(l, d) => {
                let other = self.hole(ctx, Term::ty(), *l);
                let left = matches!(t, Term::SPrLeft(..));
                let inter = if left {
                    Term::inter(expected.clone(), other)
                } else {
                    Term::inter(other, expected.clone())
                };
                let inter = self.check(ctx, &inter, &Term::ty())?;
                let d = Box::new(self.check(ctx, d, &inter)?);
                Ok(if left {
                    Term::SPrLeft(*l, d)
                } else {
                    Term::SPrRight(*l, d)
                })
            }
            Term::SInLeft(l, other, d) | Term::SInRight(l, other, d) => {
                let Term::Union(_, t1, t2) = self.view(ctx, expected)? else {
                    return self.check_default(ctx, t, expected);
                };
                let left = matches!(t, Term::SInLeft(..));
                let (this, that) = if left { (t1, t2) } else { (t2, t1) };
                let other_r = self.check(ctx, other, &Term::ty())?;
                if self.unify(ctx, &other_r, &that).is_err() {
                    return self.check_default(ctx, t, expected);
                }
                let d = self.check(ctx, d, &this)?;
                let (o, d) = (Box::new(other_r), Box::new(d));
                Ok(if left {
                    Term::SInLeft(*l, o, d)
                } else {
                    Term::SInRight(*l, o, d)
                })
            }
            Term::Underscore(l) => Ok(self.hole(ctx, expected.clone(), *l)),
            _ => self.check_default(ctx, t, expected),
        }
    }

    fn check_default(&mut self, ctx: &LocalEnv, t: &Term, expected: &Term) -> Result<Term> {
        let (t_r, ty) = self.reconstruct(ctx, t)?;
        if self.unify(ctx, &ty, expected).is_err() {
            return Err(RefineError::TypeMismatch {
                term: self.show(ctx, &t_r),
                found: self.show(ctx, &ty),
                expected: self.show(ctx, expected),
                loc: t.loc(),
            });
        }
        Ok(t_r)
    }
}

fn entry_ty(e: &LocalEntry) -> &Term {
    match e {
        LocalEntry::Decl { ty, .. } | LocalEntry::Def { ty, .. } => ty,
    }
}
