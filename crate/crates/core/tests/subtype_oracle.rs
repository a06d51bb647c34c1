mod common;

use common::xi::{enumerate, Oracle};
use lfdelta::env::Opaque;
use lfdelta::subtype::is_subtype;
use lfdelta::GlobalEnv;

#[test]
fn agrees_with_saturation() {
    let oracle = Oracle::saturate(2, 3);
    let queries = enumerate(2, 2);
    let sigma = GlobalEnv::new();
    let mut bad = Vec::new();
    for a in &queries {
        for b in &queries {
            let got = is_subtype(&sigma, &Opaque(0), &a.to_term(), &b.to_term()).unwrap();
            if Some(got) != oracle.decide(a, b) {
                bad.push(format!("{a:?} <= {b:?}: algorithm {got}"));
            }
        }
    }
    assert!(
        bad.is_empty(),
        "{} disagreements, e.g. {:?}",
        bad.len(),
        &bad[..bad.len().min(5)]
    );
}

#[test]
fn oracle_is_not_trivial() {
    use common::xi::Ty::*;
    let oracle = Oracle::saturate(2, 3);
    let queries = enumerate(2, 2);
    let (a, b) = (Atom(0), Atom(1));
    let bx = |t: &common::xi::Ty| Box::new(t.clone());
    assert_eq!(oracle.decide(&Union(bx(&a), bx(&b)), &a), Some(false));
    assert_eq!(oracle.decide(&Inter(bx(&a), bx(&b)), &a), Some(true));
    let lhs = Inter(bx(&Arrow(bx(&a), bx(&a))), bx(&Arrow(bx(&b), bx(&a))));
    let rhs = Arrow(bx(&Union(bx(&a), bx(&b))), bx(&a));
    assert_eq!(oracle.decide(&lhs, &rhs), Some(true));
    let holds = queries
        .iter()
        .flat_map(|x| queries.iter().map(move |y| (x, y)))
        .filter(|(x, y)| oracle.decide(x, y) == Some(true))
        .count();
    // frozen from the saturation run
    assert_eq!(holds, 5114);
    assert_eq!(queries.len() * queries.len(), 24964);
}
