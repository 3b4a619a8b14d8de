//! The `sup` translation quantifies over one generator block per ψ. The
//! unreduced form quantifies over a z-block for every non-empty tuple
//! `s ∈ ∏_{i ≤ N} P([m])`, tied together by meet constraints. Here the two
//! are compared by brute force for one ψ, `n ≤ 1` and `|Ω| ≤ 2`.

use fv_core::boolean::{Algebra, IdealSpec, Mask, QuotientBA};
use fv_core::harness::{default_signature, omega_labels};
use fv_core::parse;
use fv_core::translate::{translate, DeterminingSequence};

/// With one ψ a tuple is the set `T ⊆ {0..N}` of positions holding `{0}`.
struct Raw<'a> {
    child: &'a DeterminingSequence,
    alg: &'a Algebra,
    ell: usize,
    width: usize,
    /// `y` of every tuple at level `i`; all tuples share the same union `{0}`.
    y: Vec<Mask>,
    /// Meet constraints `(T, T', T ∪ T')` checked once the largest is set.
    checks: Vec<Vec<(usize, usize, usize)>>,
}

impl Raw<'_> {
    fn slot(&self, t: usize, i: usize) -> usize {
        (t - 1) * self.width + i
    }

    fn search(&self, z: &mut Vec<Mask>, at: usize) -> bool {
        let slots = ((1 << self.width) - 1) * self.width;
        if at == slots {
            let singleton = 1;
            let args: Vec<Mask> = (0..self.width).map(|i| z[self.slot(singleton, i)]).collect();
            return self.child.sigma_holds(self.ell, self.alg, &args);
        }
        let (t, i) = (at / self.width + 1, at % self.width);
        for &e in self.alg.elements() {
            if e & !self.y[i] != 0 {
                continue;
            }
            z[at] = e;
            let consistent = self.checks[t].iter().all(|&(a, b, c)| {
                z[self.slot(a, i)] & z[self.slot(b, i)] == z[self.slot(c, i)]
            });
            if consistent && self.search(z, at + 1) {
                return true;
            }
        }
        false
    }
}

fn raw_holds(child: &DeterminingSequence, alg: &Algebra, ell: usize, y: &[Mask]) -> bool {
    let width = y.len();
    let tuples = 1usize << width;
    let mut checks = vec![Vec::new(); tuples];
    for a in 1..tuples {
        for b in 1..tuples {
            let c = a | b;
            checks[a.max(b).max(c)].push((a, b, c));
        }
    }
    let raw = Raw { child, alg, ell, width, y: y.to_vec(), checks };
    let mut z = vec![0; (tuples - 1) * width];
    raw.search(&mut z, 0)
}

fn algebras() -> Vec<QuotientBA> {
    vec![
        QuotientBA::powerset(1),
        QuotientBA::powerset(2),
        QuotientBA::new(IdealSpec::close(omega_labels(2), &[0b01]).unwrap()),
    ]
}

#[test]
fn generator_search_matches_raw_enumeration() {
    let sig = default_signature();
    let children = ["P(x)", "half(P(x))", "d(x,c)", "P(f(x,c))", "1", "sup y . d(x,y)"];
    let mut compared = 0;
    for text in children {
        let child = parse(text, &sig).unwrap();
        let sup = fv_core::Formula::sup("x", child.clone());
        for n in 0..=1 {
            let inner = translate(&child, n).unwrap();
            let outer = translate(&sup, n).unwrap();
            assert_eq!(inner.m(), 1, "{text}");
            assert_eq!(outer.m(), 1, "{text}");
            let width = outer.levels() + 1;
            for ba in algebras() {
                let alg = Algebra::new(&ba);
                let q = alg.elements().len();
                for code in 0..q.pow(width as u32) {
                    let y: Vec<Mask> =
                        (0..width).map(|i| alg.elements()[code / q.pow(i as u32) % q]).collect();
                    for ell in 0..width {
                        let reduced = outer.sigma_holds(ell, &alg, &y);
                        let raw = raw_holds(&inner, &alg, ell, &y);
                        assert_eq!(reduced, raw, "{text} n={n} ell={ell} y={y:?} top={}", ba.one());
                        compared += 1;
                    }
                }
            }
        }
    }
    assert!(compared > 1000);
}
