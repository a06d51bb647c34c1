//! Random problem generators shared by the property and acceptance tests.

use lfdelta::env::MetaEnv;
use lfdelta::eval::{instantiate_metas, normalize_with_metas};
use lfdelta::syntax::{free_vars, same_term};
use lfdelta::{GlobalEnv, LocalEnv, Term};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

const CONSTS: [&str; 4] = ["a", "b", "g", "h"];

/// A context of `n` variables, all of type `A`.
pub fn context(n: usize) -> LocalEnv {
    let mut ctx = LocalEnv::new();
    for i in 0..n {
        ctx.push_decl(&format!("x{i}"), Term::cst("A"));
    }
    ctx
}

fn atom(rng: &mut StdRng, vars: usize) -> Term {
    if vars > 0 && rng.gen_bool(0.6) {
        Term::var(rng.gen_range(0..vars))
    } else {
        Term::cst(CONSTS.choose(rng).unwrap())
    }
}

/// A term with no abstraction at its head, so substituting it never
/// creates a new redex.
pub fn neutral(rng: &mut StdRng, depth: usize, vars: usize) -> Term {
    let head = atom(rng, vars);
    if depth == 0 || rng.gen_bool(0.5) {
        return head;
    }
    let n = rng.gen_range(1..=2);
    let args = (0..n).map(|_| untyped(rng, depth - 1, vars)).collect();
    Term::app(head, args)
}

/// A meta-free term over a few constants and the variables below `vars`.
/// Redexes only take neutral arguments, so normalization terminates.
pub fn untyped(rng: &mut StdRng, depth: usize, vars: usize) -> Term {
    if depth == 0 {
        return atom(rng, vars);
    }
    match rng.gen_range(0..5) {
        0 => atom(rng, vars),
        1 => Term::abs("y", Term::cst("A"), untyped(rng, depth - 1, vars + 1)),
        2 => {
            let body = untyped(rng, depth - 1, vars + 1);
            let arg = neutral(rng, depth - 1, vars);
            Term::app(Term::abs("y", Term::cst("A"), body), vec![arg])
        }
        _ => neutral(rng, depth, vars),
    }
}

/// A term with the same normal form as `t`.
pub fn variant(rng: &mut StdRng, t: &Term, vars: usize) -> Term {
    match rng.gen_range(0..4) {
        0 => t.clone(),
        // (λy. t↑) n
        1 => {
            let n = neutral(rng, 1, vars);
            Term::app(
                Term::abs("y", Term::cst("A"), lfdelta::syntax::lift(0, 1, t)),
                vec![n],
            )
        }
        // (λy. y) applied: the identity redex
        2 => Term::app(
            Term::abs("y", Term::cst("A"), Term::var(0)),
            vec![t.clone()],
        ),
        // η-expansion
        _ => Term::abs(
            "y",
            Term::cst("A"),
            Term::app(lfdelta::syntax::lift(0, 1, t), vec![Term::var(0)]),
        ),
    }
}

/// A unification problem in `ctx`.
pub struct Problem {
    pub vars: usize,
    pub phi: MetaEnv,
    pub left: Term,
    pub right: Term,
}

/// Meta-free pairs, some equal up to βη and some not.
pub fn rigid_problem(rng: &mut StdRng) -> Problem {
    let vars = rng.gen_range(0..=3);
    let left = untyped(rng, 3, vars);
    let right = if rng.gen_bool(0.6) {
        variant(rng, &left, vars)
    } else {
        untyped(rng, 3, vars)
    };
    Problem {
        vars,
        phi: MetaEnv::new(),
        left,
        right,
    }
}

/// `?f y1 … yk ≐ rhs` with distinct variables `yi`, possibly under a
/// rigid context, possibly with `rhs` escaping the pattern's variables.
pub fn pattern_problem(rng: &mut StdRng) -> Problem {
    let vars = rng.gen_range(1..=4);
    let mut phi = MetaEnv::new();
    let f = phi.fresh_typed(&LocalEnv::new(), Term::cst("F"));
    let mut pool: Vec<usize> = (0..vars).collect();
    pool.shuffle(rng);
    pool.truncate(rng.gen_range(0..=vars));
    let spine: Vec<Term> = pool.iter().map(|i| Term::var(*i)).collect();
    let flex = Term::app(Term::meta(f, vec![]), spine);
    let rhs = untyped(rng, 3, vars);
    let (left, right) = if rng.gen_bool(0.3) {
        let g = Term::cst("g");
        (Term::app(g.clone(), vec![flex]), Term::app(g, vec![rhs]))
    } else if rng.gen_bool(0.5) {
        (flex, rhs)
    } else {
        (rhs, flex)
    };
    Problem {
        vars,
        phi,
        left,
        right,
    }
}

/// Variables of the pattern spine in `?f y1 … yk`.
pub fn spine_vars(t: &Term) -> Vec<usize> {
    match t {
        Term::App(_, head, args) if matches!(**head, Term::Meta(..)) => args
            .iter()
            .filter_map(|a| match a {
                Term::Var(_, i) => Some(*i),
                _ => None,
            })
            .collect(),
        Term::App(_, _, args) if args.len() == 1 => spine_vars(&args[0]),
        _ => Vec::new(),
    }
}

/// Do both sides agree once solved meta-variables are substituted and
/// everything is normalized?
pub fn solved(phi: &MetaEnv, sigma: &GlobalEnv, ctx: &LocalEnv, a: &Term, b: &Term) -> bool {
    let norm = |t: &Term| {
        normalize_with_metas(false, sigma, phi, ctx, &instantiate_metas(phi, t)).unwrap()
    };
    same_term(&norm(a), &norm(b))
}

/// Free variables of the normal form of a meta-free term.
pub fn normal_free_vars(sigma: &GlobalEnv, ctx: &LocalEnv, t: &Term) -> Vec<usize> {
    let n = normalize_with_metas(false, sigma, &MetaEnv::new(), ctx, t).unwrap();
    free_vars(&n)
}

/// Source text of a closed, well-typed term of type `ty` over
/// [`TYPED_SIGNATURE`]. Every wrapper adds a redex of some kind.
pub fn typed(rng: &mut StdRng, ty: &str, depth: usize) -> String {
    let other = if ty == "s" { "t" } else { "s" };
    if depth == 0 {
        return match (ty, rng.gen_range(0..3)) {
            ("s", 0) => "cs".into(),
            ("s", 1) => "proj_l both".into(),
            ("s", _) => "ft ct".into(),
            (_, 0) => "ct".into(),
            (_, 1) => "proj_r both".into(),
            _ => "fs cs".into(),
        };
    }
    let e = typed(rng, ty, depth - 1);
    match rng.gen_range(0..9) {
        0 => format!("(fun x : {ty} => x) ({e})"),
        1 => {
            let u = typed(rng, other, depth - 1);
            format!("(fun x : {other} => {e}) ({u})")
        }
        2 => format!("let x : {ty} := {e} in x"),
        3 => format!("proj_l <{e}, {e}>"),
        4 => format!("coe {ty} (proj_r <{e}, {e}>)"),
        5 => format!(
            "smatch inj_l {other} ({e}) return {ty} with x : {ty} => {e}, y : {other} => {e} end"
        ),
        6 => {
            let p = if ty == "s" { "proj_l" } else { "proj_r" };
            format!("({p} idst) ({e})")
        }
        7 => {
            let (f, u) = if ty == "s" {
                ("ft", typed(rng, "t", depth - 1))
            } else {
                ("fs", typed(rng, "s", depth - 1))
            };
            format!("{f} ({u})")
        }
        _ => format!("(fun f : {ty} -> {ty} => f ({e})) (fun z : {ty} => z)"),
    }
}

pub const TYPED_SIGNATURE: &str = "\
Axiom (s t : Type) (cs : s) (ct : t) (fs : s -> t) (ft : t -> s) (both : s & t).
Definition idst : (s -> s) & (t -> t) := <fun x : s => x, fun x : t => x>.
";
