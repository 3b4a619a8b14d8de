//! Satisfaction of Boolean-algebra formulas in finite quotient algebras.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::formula::{BTerm, BVar, BoolFormula};
use super::{Mask, QuotientBA};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoolEvalError {
    #[error("variable {0} is unbound")]
    Unbound(BVar),
    #[error("bounded block refers to group {0}, which does not exist")]
    BadGroup(usize),
}

#[derive(Debug, Clone)]
enum CT {
    Slot(usize),
    Zero,
    One,
    Meet(Box<CT>, Box<CT>),
    Join(Box<CT>, Box<CT>),
    Compl(Box<CT>),
}

#[derive(Debug, Clone)]
enum CB {
    Eq(CT, CT),
    Le(CT, CT),
    Ne0(CT),
    And(Vec<CB>),
    Or(Vec<CB>),
    Not(Box<CB>),
    Implies(Box<CB>, Box<CB>),
    Exists(usize, Box<CB>),
    Forall(usize, Box<CB>),
    Bounded(Box<CBounded>),
}

#[derive(Debug, Clone)]
struct CBounded {
    /// Index for the per-evaluation memo table.
    id: usize,
    /// Slots of the block's free variables; the verdict depends on nothing else.
    reads: Vec<usize>,
    groups: Vec<Vec<usize>>,
    bounds: Vec<(usize, u32, CT)>,
    body: CB,
    monotone: bool,
}

/// Precomputed view of a quotient algebra for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Algebra {
    top: Mask,
    elements: Vec<Mask>,
    atoms: Vec<Mask>,
}

impl Algebra {
    pub fn new(ba: &QuotientBA) -> Self {
        Algebra { top: ba.one(), elements: ba.elements(), atoms: ba.atoms() }
    }

    pub fn elements(&self) -> &[Mask] {
        &self.elements
    }

    pub fn top(&self) -> Mask {
        self.top
    }
}

/// A formula with variables resolved to slots. Free variables occupy the
/// first slots, in the order given to [`CompiledBool::new`].
#[derive(Debug, Clone)]
pub struct CompiledBool {
    body: CB,
    free: usize,
    slots: usize,
}

struct Compiler {
    scope: Vec<(BVar, usize)>,
    next: usize,
    blocks: usize,
}

impl Compiler {
    fn lookup(&self, v: BVar) -> Result<usize, BoolEvalError> {
        self.scope
            .iter()
            .rev()
            .find(|(w, _)| *w == v)
            .map(|(_, s)| *s)
            .ok_or(BoolEvalError::Unbound(v))
    }

    fn fresh(&mut self, v: BVar) -> usize {
        let s = self.next;
        self.next += 1;
        self.scope.push((v, s));
        s
    }

    fn term(&self, t: &BTerm) -> Result<CT, BoolEvalError> {
        Ok(match t {
            BTerm::Var(v) => CT::Slot(self.lookup(*v)?),
            BTerm::Zero => CT::Zero,
            BTerm::One => CT::One,
            BTerm::Meet(a, b) => CT::Meet(Box::new(self.term(a)?), Box::new(self.term(b)?)),
            BTerm::Join(a, b) => CT::Join(Box::new(self.term(a)?), Box::new(self.term(b)?)),
            BTerm::Compl(a) => CT::Compl(Box::new(self.term(a)?)),
        })
    }

    fn formula(&mut self, f: &BoolFormula) -> Result<CB, BoolEvalError> {
        Ok(match f {
            BoolFormula::Eq(a, b) => CB::Eq(self.term(a)?, self.term(b)?),
            BoolFormula::Le(a, b) => CB::Le(self.term(a)?, self.term(b)?),
            BoolFormula::Ne0(a) => CB::Ne0(self.term(a)?),
            BoolFormula::And(xs) => {
                CB::And(xs.iter().map(|x| self.formula(x)).collect::<Result<_, _>>()?)
            }
            BoolFormula::Or(xs) => {
                CB::Or(xs.iter().map(|x| self.formula(x)).collect::<Result<_, _>>()?)
            }
            BoolFormula::Not(a) => CB::Not(Box::new(self.formula(a)?)),
            BoolFormula::Implies(a, b) => {
                CB::Implies(Box::new(self.formula(a)?), Box::new(self.formula(b)?))
            }
            BoolFormula::Exists(v, a) | BoolFormula::Forall(v, a) => {
                let slot = self.fresh(*v);
                let body = self.formula(a);
                self.scope.pop();
                let body = Box::new(body?);
                if matches!(f, BoolFormula::Exists(..)) {
                    CB::Exists(slot, body)
                } else {
                    CB::Forall(slot, body)
                }
            }
            BoolFormula::Bounded(b) => {
                let mut bounds = Vec::with_capacity(b.bounds.len());
                for (g, a, t) in &b.bounds {
                    if *g >= b.groups.len() {
                        return Err(BoolEvalError::BadGroup(*g));
                    }
                    bounds.push((*g, *a, self.term(t)?));
                }
                let reads = f
                    .free_vars()
                    .into_iter()
                    .map(|v| self.lookup(v))
                    .collect::<Result<Vec<_>, _>>()?;
                let id = self.blocks;
                self.blocks += 1;
                let depth = self.scope.len();
                let groups: Vec<Vec<usize>> = b
                    .groups
                    .iter()
                    .map(|vs| vs.iter().map(|v| self.fresh(*v)).collect())
                    .collect();
                let body = self.formula(&b.body);
                self.scope.truncate(depth);
                CB::Bounded(Box::new(CBounded {
                    id,
                    reads,
                    groups,
                    bounds,
                    body: body?,
                    monotone: b.monotone,
                }))
            }
        })
    }
}

impl CompiledBool {
    pub fn new(f: &BoolFormula, free: &[BVar]) -> Result<Self, BoolEvalError> {
        let mut c = Compiler { scope: Vec::new(), next: 0, blocks: 0 };
        for v in free {
            c.fresh(*v);
        }
        let body = c.formula(f)?;
        Ok(CompiledBool { body, free: free.len(), slots: c.next })
    }

    /// Free variables laid out as `y[j][i] ↦ j·width + i` for `j < m`.
    pub fn with_layout(f: &BoolFormula, m: usize, width: usize) -> Result<Self, BoolEvalError> {
        let free: Vec<BVar> =
            (0..m).flat_map(|j| (0..width).map(move |i| BVar::Y { j, i })).collect();
        CompiledBool::new(f, &free)
    }

    pub fn free_count(&self) -> usize {
        self.free
    }

    /// `args` must be class representatives of `alg`.
    pub fn eval(&self, alg: &Algebra, args: &[Mask]) -> bool {
        assert_eq!(args.len(), self.free, "one value per free variable");
        let mut env = args.to_vec();
        env.resize(self.slots, 0);
        Run { alg, memo: RefCell::new(HashMap::new()) }.formula(&self.body, &mut env)
    }
}

const MEMO_LIMIT: usize = 1 << 18;

struct Run<'a> {
    alg: &'a Algebra,
    /// Verdicts of bounded blocks keyed by block and the values they read.
    memo: RefCell<HashMap<(usize, Vec<Mask>), bool>>,
}

impl Run<'_> {
    fn term(&self, t: &CT, env: &[Mask]) -> Mask {
        match t {
            CT::Slot(s) => env[*s],
            CT::Zero => 0,
            CT::One => self.alg.top,
            CT::Meet(a, b) => self.term(a, env) & self.term(b, env),
            CT::Join(a, b) => self.term(a, env) | self.term(b, env),
            CT::Compl(a) => self.alg.top & !self.term(a, env),
        }
    }

    fn formula(&self, f: &CB, env: &mut Vec<Mask>) -> bool {
        match f {
            CB::Eq(a, b) => self.term(a, env) == self.term(b, env),
            CB::Le(a, b) => self.term(a, env) & !self.term(b, env) == 0,
            CB::Ne0(a) => self.term(a, env) != 0,
            CB::And(xs) => xs.iter().all(|x| self.formula(x, env)),
            CB::Or(xs) => xs.iter().any(|x| self.formula(x, env)),
            CB::Not(a) => !self.formula(a, env),
            CB::Implies(a, b) => !self.formula(a, env) || self.formula(b, env),
            CB::Exists(slot, a) => {
                let saved = env[*slot];
                let hit = self.alg.elements.iter().any(|&e| {
                    env[*slot] = e;
                    self.formula(a, env)
                });
                env[*slot] = saved;
                hit
            }
            CB::Forall(slot, a) => {
                let saved = env[*slot];
                let all = self.alg.elements.iter().all(|&e| {
                    env[*slot] = e;
                    self.formula(a, env)
                });
                env[*slot] = saved;
                all
            }
            CB::Bounded(b) => {
                let key = (b.id, b.reads.iter().map(|&s| env[s]).collect::<Vec<_>>());
                if let Some(&hit) = self.memo.borrow().get(&key) {
                    return hit;
                }
                let hit = self.bounded(b, env);
                let mut memo = self.memo.borrow_mut();
                if memo.len() >= MEMO_LIMIT {
                    memo.clear();
                }
                memo.insert(key, hit);
                hit
            }
        }
    }

    /// Bounds are meets within one block, so feasibility splits into
    /// independent cells `(block, atom)`: in each cell a witness is the set
    /// `T` of block members that contain the atom, and `T` is feasible iff
    /// every non-empty `A ⊆ T` with a bound has the atom below that bound.
    /// The search then picks one feasible `T` per cell.
    fn bounded(&self, b: &CBounded, env: &mut Vec<Mask>) -> bool {
        struct Cell {
            group: usize,
            atom: Mask,
            choices: Vec<u32>,
        }
        let mut cells = Vec::new();
        for (g, slots) in b.groups.iter().enumerate() {
            let width = slots.len();
            let mut cap = vec![self.alg.top; 1 << width];
            for (bg, a, t) in &b.bounds {
                if *bg == g {
                    cap[*a as usize] &= self.term(t, env);
                }
            }
            for &atom in &self.alg.atoms {
                let mut ok = vec![false; 1 << width];
                ok[0] = true;
                for t in 1usize..(1 << width) {
                    ok[t] = cap[t] & atom != 0
                        && (0..width).filter(|j| t >> j & 1 == 1).all(|j| ok[t & !(1 << j)]);
                }
                let choices: Vec<u32> = (0..(1usize << width))
                    .filter(|&t| ok[t])
                    .filter(|&t| {
                        !b.monotone
                            || (0..width).all(|j| t >> j & 1 == 1 || !ok[t | (1 << j)])
                    })
                    .map(|t| t as u32)
                    .collect();
                cells.push(Cell { group: g, atom, choices });
            }
        }
        let saved: Vec<Mask> = b.groups.iter().flatten().map(|&s| env[s]).collect();
        for &s in b.groups.iter().flatten() {
            env[s] = 0;
        }
        // forced cells are applied once up front
        let mut open = Vec::new();
        for c in cells {
            match c.choices.as_slice() {
                [only] => set_bits(env, &b.groups[c.group], *only, c.atom),
                _ => open.push(c),
            }
        }
        let cells = open;

        let apply = |env: &mut Vec<Mask>, c: &Cell, t: u32, on: bool| {
            if on {
                set_bits(env, &b.groups[c.group], t, c.atom);
            } else {
                clear_bits(env, &b.groups[c.group], t, c.atom);
            }
        };
        let union = |c: &Cell| c.choices.iter().fold(0u32, |acc, t| acc | t);

        fn dfs(
            run: &Run<'_>,
            b: &CBounded,
            cells: &[Cell],
            at: usize,
            env: &mut Vec<Mask>,
            apply: &dyn Fn(&mut Vec<Mask>, &Cell, u32, bool),
            union: &dyn Fn(&Cell) -> u32,
        ) -> bool {
            if at == cells.len() {
                return run.formula(&b.body, env);
            }
            if b.monotone {
                // every open cell empty is a feasible witness
                if run.formula(&b.body, env) {
                    return true;
                }
                // every open cell at its union dominates all witnesses below
                for c in &cells[at..] {
                    apply(env, c, union(c), true);
                }
                let possible = run.formula(&b.body, env);
                for c in &cells[at..] {
                    apply(env, c, union(c), false);
                }
                if !possible {
                    return false;
                }
            }
            let c = &cells[at];
            for &t in &c.choices {
                apply(env, c, t, true);
                let hit = dfs(run, b, cells, at + 1, env, apply, union);
                apply(env, c, t, false);
                if hit {
                    return true;
                }
            }
            false
        }

        let hit = dfs(self, b, &cells, 0, env, &apply, &union);
        for (&s, v) in b.groups.iter().flatten().zip(saved) {
            env[s] = v;
        }
        hit
    }
}

fn set_bits(env: &mut [Mask], slots: &[usize], t: u32, atom: Mask) {
    for (j, &s) in slots.iter().enumerate() {
        if t >> j & 1 == 1 {
            env[s] |= atom;
        }
    }
}

fn clear_bits(env: &mut [Mask], slots: &[usize], t: u32, atom: Mask) {
    for (j, &s) in slots.iter().enumerate() {
        if t >> j & 1 == 1 {
            env[s] &= !atom;
        }
    }
}

/// Tarskian satisfaction. Values are reduced to class representatives.
pub fn ba_eval(
    ba: &QuotientBA,
    f: &BoolFormula,
    assignment: &BTreeMap<BVar, Mask>,
) -> Result<bool, BoolEvalError> {
    let free: Vec<BVar> = assignment.keys().copied().collect();
    let compiled = CompiledBool::new(f, &free)?;
    let args: Vec<Mask> = assignment.values().map(|&m| ba.class_of(m)).collect();
    Ok(compiled.eval(&Algebra::new(ba), &args))
}

/// When to enumerate exhaustively and how many random pairs to try otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonotonePolicy {
    /// Exhaustive when `|B|^s` is at most this.
    pub max_table: u64,
    /// When set, exhaustive exactly when `s` is at most this instead.
    pub max_vars: Option<usize>,
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for MonotonePolicy {
    fn default() -> Self {
        MonotonePolicy { max_table: 1 << 16, max_vars: None, random_pairs: 1000, seed: 0 }
    }
}

/// Does raising free variables in the algebra order preserve truth?
///
/// Exhaustive mode tabulates the formula and checks every single-atom
/// raise, which covers all pairs `a ≤ b` since any such pair is joined by a
/// chain of single-atom raises.
pub fn is_monotone(
    f: &BoolFormula,
    ba: &QuotientBA,
    policy: &MonotonePolicy,
) -> Result<bool, BoolEvalError> {
    let free = f.free_vars();
    let compiled = CompiledBool::new(f, &free)?;
    let alg = Algebra::new(ba);
    let s = free.len();
    let q = alg.elements.len() as u64;
    let exhaustive = match policy.max_vars {
        Some(limit) => s <= limit,
        None => q.checked_pow(s as u32).is_some_and(|t| t <= policy.max_table),
    };
    if exhaustive {
        Ok(monotone_exhaustive(&compiled, &alg, s))
    } else {
        Ok(monotone_sampled(&compiled, &alg, s, policy))
    }
}

fn monotone_exhaustive(f: &CompiledBool, alg: &Algebra, s: usize) -> bool {
    let q = alg.elements.len();
    let total = q.pow(s as u32);
    let mut table = vec![false; total];
    let mut args = vec![0; s];
    let mut digits = vec![0; s];
    for (idx, slot) in table.iter_mut().enumerate() {
        crate::structures::decode(idx, q, &mut digits);
        for (a, d) in args.iter_mut().zip(&digits) {
            *a = alg.elements[*d];
        }
        *slot = f.eval(alg, &args);
    }
    // element index of a representative: its bits compressed along `top`
    let index_of = |m: Mask| -> usize {
        let (mut out, mut bit) = (0usize, 0);
        for k in 0..32 {
            if alg.top >> k & 1 == 1 {
                out |= ((m >> k & 1) as usize) << bit;
                bit += 1;
            }
        }
        out
    };
    let weights: Vec<usize> = (0..s).map(|v| q.pow((s - 1 - v) as u32)).collect();
    for idx in 0..total {
        if !table[idx] {
            continue;
        }
        crate::structures::decode(idx, q, &mut digits);
        for v in 0..s {
            let cur = alg.elements[digits[v]];
            for &atom in &alg.atoms {
                if cur & atom != 0 {
                    continue;
                }
                let raised = index_of(cur | atom);
                let j = idx - digits[v] * weights[v] + raised * weights[v];
                if !table[j] {
                    return false;
                }
            }
        }
    }
    true
}

fn monotone_sampled(f: &CompiledBool, alg: &Algebra, s: usize, policy: &MonotonePolicy) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let mut lo = vec![0; s];
    let mut hi = vec![0; s];
    for _ in 0..policy.random_pairs {
        for v in 0..s {
            lo[v] = rng.random::<u32>() & alg.top;
            hi[v] = lo[v] | (rng.random::<u32>() & alg.top);
        }
        if f.eval(alg, &lo) && !f.eval(alg, &hi) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::formula::BoundedExists;

    fn y0() -> BVar {
        BVar::Y { j: 0, i: 0 }
    }

    fn z0() -> BVar {
        BVar::Z { k: 0, i: 0 }
    }

    #[test]
    fn satisfaction_examples() {
        let p2 = QuotientBA::powerset(2);
        let ne0 = BoolFormula::Ne0(BTerm::Var(y0()));
        let mut asg = BTreeMap::new();
        asg.insert(y0(), 0);
        assert!(!ba_eval(&p2, &ne0, &asg).unwrap());

        let below = BoolFormula::exists(
            z0(),
            BoolFormula::And(vec![
                BoolFormula::Ne0(BTerm::Var(z0())),
                BoolFormula::Le(BTerm::Var(z0()), BTerm::Var(y0())),
            ]),
        );
        asg.insert(y0(), 0b01);
        assert!(ba_eval(&p2, &below, &asg).unwrap());

        let top = BoolFormula::forall(z0(), BoolFormula::Le(BTerm::Var(z0()), BTerm::One));
        for n in 1..=3 {
            assert!(ba_eval(&QuotientBA::powerset(n), &top, &BTreeMap::new()).unwrap());
        }
        assert_eq!(
            ba_eval(&p2, &ne0, &BTreeMap::new()),
            Err(BoolEvalError::Unbound(y0()))
        );
    }

    #[test]
    fn monotonicity_examples() {
        let policy = MonotonePolicy::default();
        for n in 1..=3 {
            let b = QuotientBA::powerset(n);
            let ne0 = BoolFormula::Ne0(BTerm::Var(y0()));
            assert!(is_monotone(&ne0, &b, &policy).unwrap());
            let eq0 = BoolFormula::Eq(BTerm::Var(y0()), BTerm::Zero);
            assert!(!is_monotone(&eq0, &b, &policy).unwrap());
        }
        let below = BoolFormula::exists(
            z0(),
            BoolFormula::And(vec![
                BoolFormula::Le(BTerm::Var(z0()), BTerm::Var(y0())),
                BoolFormula::Ne0(BTerm::Var(z0())),
            ]),
        );
        assert!(is_monotone(&below, &QuotientBA::powerset(2), &policy).unwrap());
    }

    #[test]
    fn sampled_mode_finds_antitone_formula() {
        let policy = MonotonePolicy { max_table: 1, ..MonotonePolicy::default() };
        let eq0 = BoolFormula::Eq(BTerm::Var(y0()), BTerm::Zero);
        assert!(!is_monotone(&eq0, &QuotientBA::powerset(3), &policy).unwrap());
    }

    fn bounded_example(monotone: bool, body: BoolFormula) -> BoolFormula {
        // two-variable block per level, bounds on each variable and on the meet
        let w = |k, i| BVar::Z { k, i };
        BoolFormula::Bounded(Box::new(BoundedExists {
            groups: vec![vec![w(0, 0), w(1, 0)], vec![w(0, 1), w(1, 1)]],
            bounds: vec![
                (0, 0b01, BTerm::y(0, 0)),
                (0, 0b10, BTerm::y(1, 0)),
                (0, 0b11, BTerm::y(2, 0)),
                (1, 0b01, BTerm::y(0, 1)),
                (1, 0b10, BTerm::y(1, 1)),
                (1, 0b11, BTerm::y(2, 1)),
            ],
            body,
            monotone,
        }))
    }

    #[test]
    fn bounded_search_matches_plain_quantifiers() {
        let body_mono = BoolFormula::And(vec![
            BoolFormula::Ne0(BTerm::meet(BTerm::z(0, 0), BTerm::z(1, 1))),
            BoolFormula::Or(vec![
                BoolFormula::Ne0(BTerm::z(1, 0)),
                BoolFormula::Le(BTerm::y(0, 1), BTerm::z(0, 1)),
            ]),
        ]);
        let body_anti = BoolFormula::And(vec![
            BoolFormula::Ne0(BTerm::z(0, 0)),
            BoolFormula::Eq(BTerm::meet(BTerm::z(1, 0), BTerm::z(0, 1)), BTerm::Zero),
        ]);
        let free: Vec<BVar> =
            (0..3).flat_map(|j| (0..2).map(move |i| BVar::Y { j, i })).collect();
        let b = QuotientBA::powerset(2);
        let alg = Algebra::new(&b);
        for (monotone, body) in [(true, body_mono), (false, body_anti)] {
            let f = bounded_example(monotone, body);
            let fast = CompiledBool::new(&f, &free).unwrap();
            let slow = CompiledBool::new(&f.expand(), &free).unwrap();
            let mut args = vec![0; free.len()];
            for idx in 0..4usize.pow(free.len() as u32) {
                let mut digits = vec![0; free.len()];
                crate::structures::decode(idx, 4, &mut digits);
                for (a, d) in args.iter_mut().zip(&digits) {
                    *a = *d as Mask;
                }
                assert_eq!(fast.eval(&alg, &args), slow.eval(&alg, &args), "{args:?}");
            }
        }
    }
}
