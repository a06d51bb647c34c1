//! A proof checker for a dependently-typed λ-calculus with strong
//! intersection and union types.
//!
//! Pipeline: [`parser`] produces named terms and commands, [`parser::fix_index`]
//! turns them into de Bruijn [`syntax::Term`]s, [`refine`] elaborates them
//! against a [`env::GlobalEnv`], and [`repl`] drives the whole thing.

pub mod env;
pub mod eval;
pub mod parser;
pub mod refine;
pub mod repl;
pub mod subtype;
pub mod syntax;
pub mod unify;

pub use env::{EssenceEnv, GlobalEntry, GlobalEnv, LocalEnv, MetaEntry, MetaEnv};
pub use syntax::{Branch, Loc, Match, Pos, Sort, Term};
