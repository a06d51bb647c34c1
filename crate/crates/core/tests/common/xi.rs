//! Independent decision of the subtype relation by saturation: the least
//! relation closed under the declarative axioms and rules, restricted to a
//! finite universe of types.

use std::collections::HashMap;

use lfdelta::Term;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Atom(u8),
    Arrow(Box<Ty>, Box<Ty>),
    Inter(Box<Ty>, Box<Ty>),
    Union(Box<Ty>, Box<Ty>),
}

impl Ty {
    pub fn to_term(&self) -> Term {
        match self {
            Ty::Atom(i) => Term::cst(&((b'a' + i) as char).to_string()),
            Ty::Arrow(a, b) => Term::arrow(a.to_term(), b.to_term()),
            Ty::Inter(a, b) => Term::inter(a.to_term(), b.to_term()),
            Ty::Union(a, b) => Term::union(a.to_term(), b.to_term()),
        }
    }

    pub fn connectives(&self) -> usize {
        match self {
            Ty::Atom(_) => 0,
            Ty::Arrow(a, b) | Ty::Inter(a, b) | Ty::Union(a, b) => {
                1 + a.connectives() + b.connectives()
            }
        }
    }
}

/// All types over `atoms` atoms with at most `max` connectives, ordered by
/// connective count.
pub fn enumerate(atoms: u8, max: usize) -> Vec<Ty> {
    let mut by_size: Vec<Vec<Ty>> = vec![(0..atoms).map(Ty::Atom).collect()];
    for n in 1..=max {
        let mut level = Vec::new();
        for i in 0..n {
            let j = n - 1 - i;
            for a in &by_size[i] {
                for b in &by_size[j] {
                    let (a, b) = (Box::new(a.clone()), Box::new(b.clone()));
                    level.push(Ty::Arrow(a.clone(), b.clone()));
                    level.push(Ty::Inter(a.clone(), b.clone()));
                    level.push(Ty::Union(a, b));
                }
            }
        }
        by_size.push(level);
    }
    by_size.into_iter().flatten().collect()
}

struct Bits {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    cols: Vec<u64>,
}

impl Bits {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        Bits {
            n,
            words,
            rows: vec![0; n * words],
            cols: vec![0; n * words],
        }
    }
    fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }
    fn set(&mut self, i: usize, j: usize) -> bool {
        if self.get(i, j) {
            return false;
        }
        self.rows[i * self.words + j / 64] |= 1 << (j % 64);
        self.cols[j * self.words + i / 64] |= 1 << (i % 64);
        true
    }
    fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }
    fn col(&self, j: usize) -> &[u64] {
        &self.cols[j * self.words..(j + 1) * self.words]
    }
}

fn ones(words: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (w, &bits) in words.iter().enumerate() {
        let mut b = bits;
        while b != 0 {
            out.push(w * 64 + b.trailing_zeros() as usize);
            b &= b - 1;
        }
    }
    out
}

pub struct Oracle {
    index: HashMap<Ty, usize>,
    rel: Bits,
}

impl Oracle {
    /// Saturate over the universe of types with at most `max` connectives.
    pub fn saturate(atoms: u8, max: usize) -> Oracle {
        let universe = enumerate(atoms, max);
        let index: HashMap<Ty, usize> = universe
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let n = universe.len();
        let id = |t: &Ty| index.get(t).copied();
        let mut rel = Bits::new(n);

        let mut inters = Vec::new();
        let mut unions = Vec::new();
        let mut arrows = Vec::new();
        for (i, t) in universe.iter().enumerate() {
            rel.set(i, i);
            match t {
                Ty::Inter(a, b) => {
                    let (ia, ib) = (id(a).unwrap(), id(b).unwrap());
                    inters.push((i, ia, ib));
                    rel.set(i, ia);
                    rel.set(i, ib);
                    // a ∩ (b ∪ c) ≤ (a ∩ b) ∪ (a ∩ c)
                    if let Ty::Union(b1, b2) = &**b {
                        let rhs = Ty::Union(
                            Box::new(Ty::Inter(a.clone(), b1.clone())),
                            Box::new(Ty::Inter(a.clone(), b2.clone())),
                        );
                        if let Some(r) = id(&rhs) {
                            rel.set(i, r);
                        }
                    }
                    // (a ∪ b) ∩ (a ∪ c) ≤ a ∪ (b ∩ c)
                    if let (Ty::Union(a1, b1), Ty::Union(a2, c1)) = (&**a, &**b) {
                        if a1 == a2 {
                            let rhs =
                                Ty::Union(a1.clone(), Box::new(Ty::Inter(b1.clone(), c1.clone())));
                            if let Some(r) = id(&rhs) {
                                rel.set(i, r);
                            }
                        }
                    }
                    if let (Ty::Arrow(a1, b1), Ty::Arrow(a2, c1)) = (&**a, &**b) {
                        // (a → b) ∩ (a → c) ≤ a → (b ∩ c)
                        if a1 == a2 {
                            let rhs =
                                Ty::Arrow(a1.clone(), Box::new(Ty::Inter(b1.clone(), c1.clone())));
                            if let Some(r) = id(&rhs) {
                                rel.set(i, r);
                                rel.set(r, i);
                            }
                        }
                        // (a → c) ∩ (b → c) ≤ (a ∪ b) → c
                        if b1 == c1 {
                            let rhs =
                                Ty::Arrow(Box::new(Ty::Union(a1.clone(), a2.clone())), b1.clone());
                            if let Some(r) = id(&rhs) {
                                rel.set(i, r);
                                rel.set(r, i);
                            }
                        }
                    }
                }
                Ty::Union(a, b) => {
                    let (ia, ib) = (id(a).unwrap(), id(b).unwrap());
                    unions.push((i, ia, ib));
                    rel.set(ia, i);
                    rel.set(ib, i);
                }
                Ty::Arrow(a, b) => arrows.push((i, id(a).unwrap(), id(b).unwrap())),
                Ty::Atom(_) => {}
            }
        }

        loop {
            let mut changed = false;
            // transitivity
            for i in 0..n {
                loop {
                    let mut grew = false;
                    for k in ones(rel.row(i)) {
                        if k == i {
                            continue;
                        }
                        let fresh: Vec<u64> = rel
                            .row(k)
                            .iter()
                            .zip(rel.row(i))
                            .map(|(a, b)| a & !b)
                            .collect();
                        for j in ones(&fresh) {
                            grew |= rel.set(i, j);
                        }
                    }
                    if !grew {
                        break;
                    }
                    changed = true;
                }
            }
            // c ≤ a, c ≤ b  ⟹  c ≤ a ∩ b
            for &(t, a, b) in &inters {
                let fresh: Vec<u64> = (0..rel.words)
                    .map(|w| rel.col(a)[w] & rel.col(b)[w] & !rel.col(t)[w])
                    .collect();
                for c in ones(&fresh) {
                    changed |= rel.set(c, t);
                }
            }
            // a ≤ c, b ≤ c  ⟹  a ∪ b ≤ c
            for &(t, a, b) in &unions {
                let fresh: Vec<u64> = (0..rel.words)
                    .map(|w| rel.row(a)[w] & rel.row(b)[w] & !rel.row(t)[w])
                    .collect();
                for c in ones(&fresh) {
                    changed |= rel.set(t, c);
                }
            }
            // a' ≤ a, b ≤ b'  ⟹  a → b ≤ a' → b'
            for &(t, a, b) in &arrows {
                for &(t2, a2, b2) in &arrows {
                    if !rel.get(t, t2) && rel.get(a2, a) && rel.get(b, b2) {
                        changed |= rel.set(t, t2);
                    }
                }
            }
            if !changed {
                break;
            }
        }
        debug_assert!(rel.n == n);
        Oracle { index, rel }
    }

    /// `None` when a type lies outside the saturated universe.
    pub fn decide(&self, a: &Ty, b: &Ty) -> Option<bool> {
        Some(self.rel.get(*self.index.get(a)?, *self.index.get(b)?))
    }
}
