use thiserror::Error;

use crate::eval::EvalError;
use crate::syntax::Loc;

/// A located elaboration failure. Terms and types are pre-printed in the
/// scope where the failure happened.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RefineError {
    #[error("the name \"{name}\" is not declared.")]
    Unbound { name: String, loc: Loc },
    #[error("the term \"{term}\" has type \"{found}\" while it is expected to have type \"{expected}\".")]
    TypeMismatch {
        term: String,
        found: String,
        expected: String,
        loc: Loc,
    },
    #[error("the domain \"{found}\" does not match the expected domain \"{expected}\".")]
    DomainMismatch {
        found: String,
        expected: String,
        loc: Loc,
    },
    #[error("the term \"{term}\" has type \"{ty}\" which is not a function type.")]
    NotAFunction { term: String, ty: String, loc: Loc },
    #[error("the term \"{term}\" has type \"{ty}\" which is not an intersection.")]
    NotAnIntersection { term: String, ty: String, loc: Loc },
    #[error("the term \"{term}\" has type \"{ty}\" which is not a sort.")]
    NotAType { term: String, ty: String, loc: Loc },
    #[error("the term \"{term}\" has type \"{found}\" which is not a subtype of \"{target}\".")]
    NotSubtype {
        term: String,
        found: String,
        target: String,
        loc: Loc,
    },
    #[error("the product \"{term}\" quantifies over a {dom_sort} to build a {cod_sort}, which is not allowed.")]
    Pts {
        term: String,
        dom_sort: String,
        cod_sort: String,
        loc: Loc,
    },
    #[error("\"Kind\" has no type.")]
    KindUntyped { loc: Loc },
    #[error("the term \"{term}\" has essence \"{found}\" while it is expected to have essence \"{expected}\".")]
    EssenceMismatch {
        term: String,
        found: String,
        expected: String,
        loc: Loc,
    },
    #[error("cannot infer the placeholder of type \"{ty}\".")]
    UnresolvedMeta { id: usize, ty: String, loc: Loc },
    #[error("{source}")]
    Eval { source: EvalError, loc: Loc },
}

impl RefineError {
    pub fn loc(&self) -> Loc {
        match self {
            RefineError::Unbound { loc, .. }
            | RefineError::TypeMismatch { loc, .. }
            | RefineError::DomainMismatch { loc, .. }
            | RefineError::NotAFunction { loc, .. }
            | RefineError::NotAnIntersection { loc, .. }
            | RefineError::NotAType { loc, .. }
            | RefineError::NotSubtype { loc, .. }
            | RefineError::Pts { loc, .. }
            | RefineError::KindUntyped { loc }
            | RefineError::EssenceMismatch { loc, .. }
            | RefineError::UnresolvedMeta { loc, .. }
            | RefineError::Eval { loc, .. } => *loc,
        }
    }
}
