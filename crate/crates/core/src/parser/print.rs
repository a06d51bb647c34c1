//! Printing in the concrete syntax accepted by the parser.

use super::{fix_id, NamedTerm};
use crate::syntax::{Sort, Term};

// Precedence levels; an operand printed below its required level is
// parenthesized.
const BINDER: u8 = 0;
const ARROW: u8 = 1;
const UNION: u8 = 2;
const INTER: u8 = 3;
const APP: u8 = 4;
const ATOM: u8 = 5;

pub fn print_named(t: &NamedTerm) -> String {
    let mut out = String::new();
    go(t, BINDER, &mut out);
    out
}

/// Print a de Bruijn term whose free variables are named by `scope`
/// (innermost last).
pub fn print_term(t: &Term, scope: &[String]) -> String {
    print_named(&fix_id(t, scope))
}

fn level(t: &NamedTerm) -> u8 {
    match t {
        NamedTerm::Let(..) | NamedTerm::Abs(..) => BINDER,
        NamedTerm::Prod(_, s, ..) => {
            if s == "_" {
                ARROW
            } else {
                BINDER
            }
        }
        NamedTerm::Union(..) => UNION,
        NamedTerm::Inter(..) => INTER,
        NamedTerm::App(..)
        | NamedTerm::SPrLeft(..)
        | NamedTerm::SPrRight(..)
        | NamedTerm::SInLeft(..)
        | NamedTerm::SInRight(..)
        | NamedTerm::Coercion(..) => APP,
        NamedTerm::Sort(..)
        | NamedTerm::Name(..)
        | NamedTerm::Underscore(_)
        | NamedTerm::Meta(..)
        | NamedTerm::SPair(..)
        | NamedTerm::SMatch(..) => ATOM,
    }
}

fn go(t: &NamedTerm, min: u8, out: &mut String) {
    if level(t) < min {
        out.push('(');
        go(t, BINDER, out);
        out.push(')');
        return;
    }
    let is_hole = |t: &NamedTerm| matches!(t, NamedTerm::Underscore(_));
    match t {
        NamedTerm::Sort(_, Sort::Type) => out.push_str("Type"),
        NamedTerm::Sort(_, Sort::Kind) => out.push_str("Kind"),
        NamedTerm::Name(_, s) => out.push_str(s),
        NamedTerm::Underscore(_) => out.push('_'),
        NamedTerm::Meta(_, id, susp) => {
            out.push_str(&format!("?{id}"));
            if !susp.is_empty() {
                out.push('[');
                for (i, a) in susp.iter().enumerate() {
                    if i > 0 {
                        out.push_str("; ");
                    }
                    go(a, BINDER, out);
                }
                out.push(']');
            }
        }
        NamedTerm::Let(_, s, annot, bound, body) => {
            out.push_str("let ");
            out.push_str(s);
            if !is_hole(annot) {
                out.push_str(" : ");
                go(annot, BINDER, out);
            }
            out.push_str(" := ");
            go(bound, BINDER, out);
            out.push_str(" in ");
            go(body, BINDER, out);
        }
        NamedTerm::Prod(_, s, dom, cod) if s == "_" => {
            go(dom, UNION, out);
            out.push_str(" -> ");
            go(cod, ARROW, out);
        }
        NamedTerm::Prod(_, s, dom, cod) => {
            out.push_str("forall ");
            out.push_str(s);
            if !is_hole(dom) {
                out.push_str(" : ");
                go(dom, BINDER, out);
            }
            out.push_str(", ");
            go(cod, BINDER, out);
        }
        NamedTerm::Abs(_, s, dom, body) => {
            out.push_str("fun ");
            out.push_str(s);
            if !is_hole(dom) {
                out.push_str(" : ");
                go(dom, BINDER, out);
            }
            out.push_str(" => ");
            go(body, BINDER, out);
        }
        NamedTerm::Union(_, a, b) => {
            go(a, INTER, out);
            out.push_str(" | ");
            go(b, UNION, out);
        }
        NamedTerm::Inter(_, a, b) => {
            go(a, APP, out);
            out.push_str(" & ");
            go(b, INTER, out);
        }
        NamedTerm::App(_, h, args) => {
            // a head that is itself an application cannot be re-read as one
            let head_min = if matches!(**h, NamedTerm::App(..)) {
                ATOM
            } else {
                APP
            };
            go(h, head_min, out);
            for a in args {
                out.push(' ');
                go(a, ATOM, out);
            }
        }
        NamedTerm::SPrLeft(_, a) => prefix("proj_l", &[a], out),
        NamedTerm::SPrRight(_, a) => prefix("proj_r", &[a], out),
        NamedTerm::SInLeft(_, a, b) => prefix("inj_l", &[a, b], out),
        NamedTerm::SInRight(_, a, b) => prefix("inj_r", &[a, b], out),
        NamedTerm::Coercion(_, a, b) => prefix("coe", &[a, b], out),
        NamedTerm::SPair(_, a, b) => {
            out.push('<');
            go(a, BINDER, out);
            out.push_str(", ");
            go(b, BINDER, out);
            out.push('>');
        }
        NamedTerm::SMatch(_, m) => {
            out.push_str("smatch ");
            go(&m.scrutinee, BINDER, out);
            match &m.ret {
                NamedTerm::Abs(_, s, _, body) => {
                    if s != "_" {
                        out.push_str(" as ");
                        out.push_str(s);
                    }
                    if !is_hole(body) {
                        out.push_str(" return ");
                        go(body, BINDER, out);
                    }
                }
                NamedTerm::Underscore(_) => {}
                other => {
                    // not produced by the parser; printed as a return type
                    out.push_str(" return ");
                    go(other, BINDER, out);
                }
            }
            out.push_str(" with ");
            for (i, br) in [&m.left, &m.right].into_iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&br.name);
                if !is_hole(&br.annot) {
                    out.push_str(" : ");
                    go(&br.annot, BINDER, out);
                }
                out.push_str(" => ");
                go(&br.body, BINDER, out);
            }
            out.push_str(" end");
        }
    }
}

fn prefix(kw: &str, args: &[&NamedTerm], out: &mut String) {
    out.push_str(kw);
    for a in args {
        out.push(' ');
        go(a, ATOM, out);
    }
}
