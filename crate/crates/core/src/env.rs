//! Global, local, essence and meta-variable environments.

use std::collections::BTreeMap;
use std::rc::Rc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::syntax::{erase_len, lift, Sort, Term};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EnvError {
    #[error("\"{0}\" already exists")]
    Duplicate(String),
    #[error("meta-variable ?{0} is already instantiated")]
    AlreadyInstantiated(usize),
    #[error("meta-variable ?{0} does not exist")]
    UnknownMeta(usize),
    #[error("meta-variable ?{0} cannot be instantiated with a {1} solution")]
    KindMismatch(usize, &'static str),
}

#[derive(Clone, Debug)]
pub enum GlobalEntry {
    Axiom {
        ty_essence: Term,
        ty: Term,
    },
    Definition {
        essence: Term,
        body: Term,
        ty_essence: Term,
        ty: Term,
    },
}

impl GlobalEntry {
    pub fn ty(&self) -> &Term {
        match self {
            GlobalEntry::Axiom { ty, .. } | GlobalEntry::Definition { ty, .. } => ty,
        }
    }

    pub fn ty_essence(&self) -> &Term {
        match self {
            GlobalEntry::Axiom { ty_essence, .. } | GlobalEntry::Definition { ty_essence, .. } => {
                ty_essence
            }
        }
    }
}

/// Fully checked constants, in declaration order.
#[derive(Clone, Debug, Default)]
pub struct GlobalEnv {
    entries: IndexMap<String, GlobalEntry>,
}

impl GlobalEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn get(&self, name: &str) -> Option<&GlobalEntry> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &GlobalEntry)> {
        self.entries.iter()
    }

    pub fn insert(&mut self, name: &str, entry: GlobalEntry) -> Result<(), EnvError> {
        if self.contains(name) {
            return Err(EnvError::Duplicate(name.to_string()));
        }
        self.entries.insert(name.to_string(), entry);
        Ok(())
    }

    /// Body and type of a constant; the body is absent for axioms. With
    /// `is_essence` the essence and type essence are returned instead.
    pub fn find_const(&self, is_essence: bool, name: &str) -> Option<(Option<&Term>, &Term)> {
        Some(match (self.entries.get(name)?, is_essence) {
            (GlobalEntry::Axiom { ty, .. }, false) => (None, ty),
            (GlobalEntry::Axiom { ty_essence, .. }, true) => (None, ty_essence),
            (GlobalEntry::Definition { body, ty, .. }, false) => (Some(body), ty),
            (
                GlobalEntry::Definition {
                    essence,
                    ty_essence,
                    ..
                },
                true,
            ) => (Some(essence), ty_essence),
        })
    }
}

/// Bodies of local definitions, as needed by reduction.
pub trait Bindings {
    fn depth(&self) -> usize;
    /// Body of the entry at `index`, well-scoped at the query point.
    fn definition(&self, index: usize) -> Option<Term>;
}

#[derive(Clone, Debug)]
pub enum LocalEntry {
    Decl { name: String, ty: Term },
    Def { name: String, body: Term, ty: Term },
}

impl LocalEntry {
    pub fn name(&self) -> &str {
        match self {
            LocalEntry::Decl { name, .. } | LocalEntry::Def { name, .. } => name,
        }
    }
}

/// Typing context. The last entry is the innermost (index 0).
#[derive(Clone, Debug, Default)]
pub struct LocalEnv {
    entries: Vec<LocalEntry>,
}

impl LocalEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push_decl(&mut self, name: &str, ty: Term) {
        self.entries.push(LocalEntry::Decl {
            name: name.to_string(),
            ty,
        });
    }

    pub fn push_def(&mut self, name: &str, body: Term, ty: Term) {
        self.entries.push(LocalEntry::Def {
            name: name.to_string(),
            body,
            ty,
        });
    }

    pub fn pop(&mut self) -> Option<LocalEntry> {
        self.entries.pop()
    }

    pub fn with_decl(&self, name: &str, ty: Term) -> LocalEnv {
        let mut c = self.clone();
        c.push_decl(name, ty);
        c
    }

    pub fn with_def(&self, name: &str, body: Term, ty: Term) -> LocalEnv {
        let mut c = self.clone();
        c.push_def(name, body, ty);
        c
    }

    /// Entries outermost first, as stored (not lifted).
    pub fn entries(&self) -> &[LocalEntry] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> &LocalEntry {
        assert!(index < self.len(), "variable {index} out of context");
        &self.entries[self.len() - 1 - index]
    }

    /// Body (for definitions) and type of variable `index`, lifted so they
    /// are well-scoped at the query point.
    pub fn find_var(&self, index: usize) -> (Option<Term>, Term) {
        let shift = index as isize + 1;
        match self.entry(index) {
            LocalEntry::Decl { ty, .. } => (None, lift(0, shift, ty)),
            LocalEntry::Def { body, ty, .. } => (Some(lift(0, shift, body)), lift(0, shift, ty)),
        }
    }

    /// Binder names, innermost last.
    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.name().to_string()).collect()
    }

    /// The variables of the context as a suspension.
    pub fn erase(&self) -> Vec<Term> {
        erase_len(self.len())
    }
}

pub fn erase_context(ctx: &LocalEnv) -> Vec<Term> {
    ctx.erase()
}

impl Bindings for LocalEnv {
    fn depth(&self) -> usize {
        self.len()
    }

    fn definition(&self, index: usize) -> Option<Term> {
        self.find_var(index).0
    }
}

#[derive(Clone, Debug)]
pub enum EssenceEntry {
    Bare(String),
    Def(String, Term),
}

/// Essence context, shadowing a [`LocalEnv`] entry by entry.
#[derive(Clone, Debug, Default)]
pub struct EssenceEnv {
    entries: Vec<EssenceEntry>,
}

impl EssenceEnv {
    pub fn new() -> Self {
        Self::default()
    }

    /// A context of `len` bare variables.
    pub fn bare(len: usize) -> Self {
        EssenceEnv {
            entries: (0..len).map(|_| EssenceEntry::Bare("_".into())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push_bare(&mut self, name: &str) {
        self.entries.push(EssenceEntry::Bare(name.to_string()));
    }

    pub fn push_def(&mut self, name: &str, essence: Term) {
        self.entries
            .push(EssenceEntry::Def(name.to_string(), essence));
    }

    pub fn pop(&mut self) -> Option<EssenceEntry> {
        self.entries.pop()
    }

    pub fn with_bare(&self, name: &str) -> EssenceEnv {
        let mut c = self.clone();
        c.push_bare(name);
        c
    }

    pub fn with_def(&self, name: &str, essence: Term) -> EssenceEnv {
        let mut c = self.clone();
        c.push_def(name, essence);
        c
    }

    pub fn names(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|e| match e {
                EssenceEntry::Bare(n) | EssenceEntry::Def(n, _) => n.clone(),
            })
            .collect()
    }

    pub fn erase(&self) -> Vec<Term> {
        erase_len(self.len())
    }
}

impl Bindings for EssenceEnv {
    fn depth(&self) -> usize {
        self.len()
    }

    fn definition(&self, index: usize) -> Option<Term> {
        assert!(
            index < self.len(),
            "variable {index} out of essence context"
        );
        match &self.entries[self.len() - 1 - index] {
            EssenceEntry::Bare(_) => None,
            EssenceEntry::Def(_, m) => Some(lift(0, index as isize + 1, m)),
        }
    }
}

/// A context with no definitions, used where only the depth matters.
#[derive(Clone, Copy, Debug, Default)]
pub struct Opaque(pub usize);

impl Bindings for Opaque {
    fn depth(&self) -> usize {
        self.0
    }

    fn definition(&self, _: usize) -> Option<Term> {
        None
    }
}

#[derive(Clone, Debug)]
pub enum MetaEntry {
    SortDecl,
    SortDef(Sort),
    TypedDecl {
        ctx: Rc<LocalEnv>,
        ty: Term,
    },
    TypedDef {
        ctx: Rc<LocalEnv>,
        body: Term,
        ty: Term,
    },
    EssDecl {
        ctx: Rc<EssenceEnv>,
    },
    EssDef {
        ctx: Rc<EssenceEnv>,
        essence: Term,
    },
}

impl MetaEntry {
    pub fn is_instantiated(&self) -> bool {
        matches!(
            self,
            MetaEntry::SortDef(_) | MetaEntry::TypedDef { .. } | MetaEntry::EssDef { .. }
        )
    }

    pub fn is_sort(&self) -> bool {
        matches!(self, MetaEntry::SortDecl | MetaEntry::SortDef(_))
    }

    /// Length of the context the meta-variable was created in.
    pub fn arity(&self) -> usize {
        match self {
            MetaEntry::SortDecl | MetaEntry::SortDef(_) => 0,
            MetaEntry::TypedDecl { ctx, .. } | MetaEntry::TypedDef { ctx, .. } => ctx.len(),
            MetaEntry::EssDecl { ctx } | MetaEntry::EssDef { ctx, .. } => ctx.len(),
        }
    }
}

/// Meta-variables and their instantiations. Ids are indices into the entry
/// list; entries are never removed and a solved entry never changes.
#[derive(Clone, Debug, Default)]
pub struct MetaEnv {
    entries: Vec<MetaEntry>,
    essence_of: BTreeMap<usize, usize>,
}

impl MetaEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_id(&self) -> usize {
        self.entries.len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: usize) -> &MetaEntry {
        &self.entries[id]
    }

    pub fn try_get(&self, id: usize) -> Option<&MetaEntry> {
        self.entries.get(id)
    }

    pub fn entries(&self) -> &[MetaEntry] {
        &self.entries
    }

    /// Declare a meta-variable. `decl` must be one of the three declaration
    /// forms.
    pub fn fresh_meta(&mut self, decl: MetaEntry) -> usize {
        assert!(!decl.is_instantiated(), "fresh_meta expects a declaration");
        self.entries.push(decl);
        self.entries.len() - 1
    }

    pub fn fresh_sort(&mut self) -> usize {
        self.fresh_meta(MetaEntry::SortDecl)
    }

    pub fn fresh_typed(&mut self, ctx: &LocalEnv, ty: Term) -> usize {
        self.fresh_meta(MetaEntry::TypedDecl {
            ctx: Rc::new(ctx.clone()),
            ty,
        })
    }

    pub fn fresh_essence(&mut self, ctx: &EssenceEnv) -> usize {
        self.fresh_meta(MetaEntry::EssDecl {
            ctx: Rc::new(ctx.clone()),
        })
    }

    pub fn set_sort(&mut self, id: usize, s: Sort) -> Result<(), EnvError> {
        match self.entries.get(id) {
            None => Err(EnvError::UnknownMeta(id)),
            Some(MetaEntry::SortDecl) => {
                self.entries[id] = MetaEntry::SortDef(s);
                Ok(())
            }
            Some(e) if e.is_instantiated() => Err(EnvError::AlreadyInstantiated(id)),
            Some(_) => Err(EnvError::KindMismatch(id, "sort")),
        }
    }

    /// Instantiate a typed or essence meta-variable with a term living in
    /// the meta-variable's own context.
    pub fn instantiate(&mut self, id: usize, solution: Term) -> Result<(), EnvError> {
        let entry = self.entries.get(id).ok_or(EnvError::UnknownMeta(id))?;
        let new = match entry {
            MetaEntry::TypedDecl { ctx, ty } => MetaEntry::TypedDef {
                ctx: ctx.clone(),
                body: solution,
                ty: ty.clone(),
            },
            MetaEntry::EssDecl { ctx } => MetaEntry::EssDef {
                ctx: ctx.clone(),
                essence: solution,
            },
            MetaEntry::SortDecl => return Err(EnvError::KindMismatch(id, "term")),
            _ => return Err(EnvError::AlreadyInstantiated(id)),
        };
        self.entries[id] = new;
        Ok(())
    }

    /// The essence meta-variable standing for the essence of typed
    /// meta-variable `id`, created on first request in an all-bare context.
    pub fn essence_meta(&mut self, id: usize) -> usize {
        if let Some(e) = self.essence_of.get(&id) {
            return *e;
        }
        let arity = self.entries[id].arity();
        let e = self.fresh_essence(&EssenceEnv::bare(arity));
        self.essence_of.insert(id, e);
        e
    }

    pub fn existing_essence_meta(&self, id: usize) -> Option<usize> {
        self.essence_of.get(&id).copied()
    }

    /// Ids of meta-variables still uninstantiated.
    pub fn unsolved(&self) -> Vec<usize> {
        (0..self.entries.len())
            .filter(|i| !self.entries[*i].is_instantiated())
            .collect()
    }

    /// True when `later` extends `self`: no entry removed, every solved
    /// entry unchanged in kind, declarations only upgraded to definitions.
    pub fn is_extended_by(&self, later: &MetaEnv) -> bool {
        use crate::syntax::same_term;
        if later.entries.len() < self.entries.len() {
            return false;
        }
        self.entries
            .iter()
            .zip(&later.entries)
            .all(|(a, b)| match (a, b) {
                (MetaEntry::SortDecl, MetaEntry::SortDecl | MetaEntry::SortDef(_)) => true,
                (MetaEntry::SortDef(x), MetaEntry::SortDef(y)) => x == y,
                (MetaEntry::TypedDecl { ty: t1, .. }, MetaEntry::TypedDecl { ty: t2, .. })
                | (MetaEntry::TypedDecl { ty: t1, .. }, MetaEntry::TypedDef { ty: t2, .. }) => {
                    same_term(t1, t2)
                }
                (MetaEntry::TypedDef { body: b1, .. }, MetaEntry::TypedDef { body: b2, .. }) => {
                    same_term(b1, b2)
                }
                (
                    MetaEntry::EssDecl { .. },
                    MetaEntry::EssDecl { .. } | MetaEntry::EssDef { .. },
                ) => true,
                (MetaEntry::EssDef { essence: e1, .. }, MetaEntry::EssDef { essence: e2, .. }) => {
                    same_term(e1, e2)
                }
                _ => false,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::same_term;

    #[test]
    fn find_var_lifts() {
        let mut g = LocalEnv::new();
        g.push_decl("x", Term::var(0));
        let (b, t) = g.find_var(0);
        assert!(b.is_none());
        assert!(same_term(&t, &Term::var(1)));
        g.push_decl("y", Term::cst("T"));
        let (_, t) = g.find_var(1);
        assert!(same_term(&t, &Term::var(2)));
        let mut g = LocalEnv::new();
        g.push_def("x", Term::var(3), Term::var(4));
        let (b, t) = g.find_var(0);
        assert!(same_term(&b.unwrap(), &Term::var(4)));
        assert!(same_term(&t, &Term::var(5)));
    }

    #[test]
    fn erase_context_examples() {
        assert!(erase_context(&LocalEnv::new()).is_empty());
        let g = LocalEnv::new().with_decl("x", Term::ty());
        assert!(same_term(&erase_context(&g)[0], &Term::var(0)));
        let g = g.with_decl("y", Term::ty());
        let e = erase_context(&g);
        assert!(same_term(&e[0], &Term::var(1)) && same_term(&e[1], &Term::var(0)));
    }

    #[test]
    fn global_env_lookup() {
        let mut s = GlobalEnv::new();
        assert!(s.find_const(false, "a").is_none());
        s.insert(
            "a",
            GlobalEntry::Axiom {
                ty_essence: Term::ty(),
                ty: Term::ty(),
            },
        )
        .unwrap();
        let (b, t) = s.find_const(false, "a").unwrap();
        assert!(b.is_none() && same_term(t, &Term::ty()));
        assert_eq!(
            s.insert(
                "a",
                GlobalEntry::Axiom {
                    ty_essence: Term::ty(),
                    ty: Term::ty()
                }
            ),
            Err(EnvError::Duplicate("a".into()))
        );
        s.insert(
            "id",
            GlobalEntry::Definition {
                essence: Term::abs("x", Term::nothing(), Term::var(0)),
                body: Term::abs("x", Term::cst("a"), Term::var(0)),
                ty_essence: Term::arrow(Term::cst("a"), Term::cst("a")),
                ty: Term::arrow(Term::cst("a"), Term::cst("a")),
            },
        )
        .unwrap();
        let (b, _) = s.find_const(true, "id").unwrap();
        assert!(same_term(
            b.unwrap(),
            &Term::abs("x", Term::nothing(), Term::var(0))
        ));
        let names: Vec<_> = s.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["a", "id"]);
    }

    #[test]
    fn metas_are_write_once() {
        let mut phi = MetaEnv::new();
        let a = phi.fresh_sort();
        let b = phi.fresh_typed(&LocalEnv::new(), Term::ty());
        assert_eq!((a, b), (0, 1));
        let before = phi.clone();
        phi.set_sort(a, Sort::Type).unwrap();
        assert!(matches!(phi.get(b), MetaEntry::TypedDecl { .. }));
        assert_eq!(
            phi.set_sort(a, Sort::Kind),
            Err(EnvError::AlreadyInstantiated(a))
        );
        assert_eq!(
            phi.instantiate(a, Term::ty()),
            Err(EnvError::AlreadyInstantiated(a))
        );
        phi.instantiate(b, Term::cst("c")).unwrap();
        assert_eq!(
            phi.instantiate(b, Term::cst("d")),
            Err(EnvError::AlreadyInstantiated(b))
        );
        assert!(before.is_extended_by(&phi));
        assert!(!phi.is_extended_by(&before));
    }

    #[test]
    fn typed_decl_is_retrievable() {
        let mut phi = MetaEnv::new();
        let g = LocalEnv::new().with_decl("x", Term::cst("A"));
        let id = phi.fresh_typed(&g, Term::cst("B"));
        match phi.get(id) {
            MetaEntry::TypedDecl { ctx, ty } => {
                assert_eq!(ctx.names(), vec!["x".to_string()]);
                assert!(same_term(ty, &Term::cst("B")));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn essence_metas_are_shared() {
        let mut phi = MetaEnv::new();
        let g = LocalEnv::new().with_decl("x", Term::cst("A"));
        let id = phi.fresh_typed(&g, Term::cst("B"));
        let e = phi.essence_meta(id);
        assert_eq!(phi.essence_meta(id), e);
        assert_eq!(phi.get(e).arity(), 1);
    }
}
