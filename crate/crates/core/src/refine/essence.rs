//! Essences: the untyped λ-terms behind typed terms. Strong pairs keep one
//! component, projections, injections and coercions vanish, and a strong
//! sum becomes a β-redex over its first branch.

use super::{RefineError, Refiner, Result};
use crate::env::{EssenceEnv, MetaEntry};
use crate::eval::{instantiate_metas, whnf};
use crate::parser::print_term;
use crate::syntax::{lift, visit_term, Term};
use crate::unify::unify_essence;

/// Print an essence; untyped abstractions print without annotation.
pub fn print_essence(t: &Term, scope: &[String]) -> String {
    fn strip(t: &Term) -> Term {
        match t {
            Term::Abs(l, x, _, body) => Term::Abs(
                *l,
                x.clone(),
                Box::new(Term::Underscore(*l)),
                Box::new(strip(body)),
            ),
            _ => visit_term(strip, |_, c| strip(c), |s, _| s.to_string(), t),
        }
    }
    print_term(&strip(t), scope)
}

impl Refiner<'_> {
    /// The essence of a refined term.
    pub fn essence(&mut self, psi: &EssenceEnv, t: &Term) -> Result<Term> {
        Ok(match t {
            Term::Sort(..) | Term::Const(..) | Term::Var(..) => t.clone(),
            Term::Underscore(l) => {
                return Err(RefineError::UnresolvedMeta {
                    id: 0,
                    ty: "_".into(),
                    loc: *l,
                })
            }
            Term::Meta(l, id, susp) => match self.phi.get(*id) {
                MetaEntry::TypedDecl { .. } => {
                    let e = self.phi.essence_meta(*id);
                    let susp = susp
                        .iter()
                        .map(|d| self.essence(psi, d))
                        .collect::<Result<_>>()?;
                    Term::Meta(*l, e, susp)
                }
                MetaEntry::TypedDef { .. } | MetaEntry::SortDef(_) => {
                    let expanded = instantiate_metas(&self.phi, t);
                    return self.essence(psi, &expanded);
                }
                _ => t.clone(),
            },
            Term::Let(l, x, annot, bound, body) => {
                let annot = self.essence(psi, annot)?;
                let bound = self.essence(psi, bound)?;
                let body = self.essence(&psi.with_def(x, bound.clone()), body)?;
                Term::Let(
                    *l,
                    x.clone(),
                    Box::new(annot),
                    Box::new(bound),
                    Box::new(body),
                )
            }
            Term::Prod(l, x, dom, cod) => {
                let dom = self.essence(psi, dom)?;
                let cod = self.essence(&psi.with_bare(x), cod)?;
                Term::Prod(*l, x.clone(), Box::new(dom), Box::new(cod))
            }
            Term::Abs(l, x, dom, body) => {
                // the domain is erased but its strong pairs are still checked
                self.essence(psi, dom)?;
                let body = self.essence(&psi.with_bare(x), body)?;
                Term::Abs(*l, x.clone(), Box::new(Term::nothing()), Box::new(body))
            }
            Term::App(l, head, args) => {
                let head = self.essence(psi, head)?;
                let args = args
                    .iter()
                    .map(|a| self.essence(psi, a))
                    .collect::<Result<_>>()?;
                Term::app_at(*l, head, args)
            }
            Term::Inter(l, a, b) => Term::Inter(
                *l,
                Box::new(self.essence(psi, a)?),
                Box::new(self.essence(psi, b)?),
            ),
            Term::Union(l, a, b) => Term::Union(
                *l,
                Box::new(self.essence(psi, a)?),
                Box::new(self.essence(psi, b)?),
            ),
            Term::SPair(_, a, b) => {
                let m = self.essence(psi, a)?;
                self.essence_with_hint(psi, &m, b)?;
                m
            }
            Term::SPrLeft(_, d) | Term::SPrRight(_, d) => self.essence(psi, d)?,
            Term::SInLeft(_, other, d)
            | Term::SInRight(_, other, d)
            | Term::Coercion(_, other, d) => {
                self.essence(psi, other)?;
                self.essence(psi, d)?
            }
            Term::SMatch(l, m) => {
                let n = self.essence(psi, &m.scrutinee)?;
                self.essence(psi, &m.ret)?;
                self.essence(psi, &m.left.annot)?;
                self.essence(psi, &m.right.annot)?;
                let left = self.essence(&psi.with_bare(&m.left.name), &m.left.body)?;
                self.essence_with_hint(&psi.with_bare(&m.right.name), &left, &m.right.body)?;
                let abs = Term::Abs(
                    *l,
                    m.left.name.clone(),
                    Box::new(Term::nothing()),
                    Box::new(left),
                );
                Term::app_at(*l, abs, vec![n])
            }
        })
    }

    /// Check that the essence of `t` is `m`, solving essence
    /// meta-variables on the way.
    pub fn essence_with_hint(&mut self, psi: &EssenceEnv, m: &Term, t: &Term) -> Result<()> {
        match t {
            Term::SPair(_, a, b) => {
                self.essence_with_hint(psi, m, a)?;
                self.essence_with_hint(psi, m, b)
            }
            Term::SPrLeft(_, d) | Term::SPrRight(_, d) => self.essence_with_hint(psi, m, d),
            Term::SInLeft(_, other, d)
            | Term::SInRight(_, other, d)
            | Term::Coercion(_, other, d) => {
                self.essence(psi, other)?;
                self.essence_with_hint(psi, m, d)
            }
            Term::Let(_, x, annot, bound, body) => {
                self.essence(psi, annot)?;
                let bound = self.essence(psi, bound)?;
                self.essence_with_hint(&psi.with_def(x, bound), &lift(0, 1, m), body)
            }
            Term::Abs(_, x, dom, body) => match self.essence_view(psi, m)? {
                Term::Abs(_, _, _, mb) => {
                    self.essence(psi, dom)?;
                    self.essence_with_hint(&psi.with_bare(x), &mb, body)
                }
                _ => self.essence_default(psi, m, t),
            },
            Term::Prod(_, x, dom, cod) => match self.essence_view(psi, m)? {
                Term::Prod(_, _, md, mc) => {
                    self.essence_with_hint(psi, &md, dom)?;
                    self.essence_with_hint(&psi.with_bare(x), &mc, cod)
                }
                _ => self.essence_default(psi, m, t),
            },
            Term::Inter(_, a, b) => match self.essence_view(psi, m)? {
                Term::Inter(_, ma, mb) => {
                    self.essence_with_hint(psi, &ma, a)?;
                    self.essence_with_hint(psi, &mb, b)
                }
                _ => self.essence_default(psi, m, t),
            },
            Term::Union(_, a, b) => match self.essence_view(psi, m)? {
                Term::Union(_, ma, mb) => {
                    self.essence_with_hint(psi, &ma, a)?;
                    self.essence_with_hint(psi, &mb, b)
                }
                _ => self.essence_default(psi, m, t),
            },
            _ => self.essence_default(psi, m, t),
        }
    }

    fn essence_view(&self, psi: &EssenceEnv, m: &Term) -> Result<Term> {
        whnf(true, self.sigma, &self.phi, psi, m).map_err(|source| RefineError::Eval {
            source,
            loc: m.loc(),
        })
    }

    fn essence_default(&mut self, psi: &EssenceEnv, m: &Term, t: &Term) -> Result<()> {
        let found = self.essence(psi, t)?;
        if unify_essence(&mut self.phi, self.sigma, psi, m, &found).is_ok() {
            return Ok(());
        }
        let names = psi.names();
        Err(RefineError::EssenceMismatch {
            term: print_term(&instantiate_metas(&self.phi, t), &names),
            found: print_essence(&instantiate_metas(&self.phi, &found), &names),
            expected: print_essence(&instantiate_metas(&self.phi, m), &names),
            loc: t.loc(),
        })
    }
}
