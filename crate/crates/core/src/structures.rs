//! Finite metric structures and the brute-force evaluator.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rational::{self, Rational};
use crate::syntax::{Formula, Signature, Term};

/// Largest universe accepted from files and by [`random_structure`].
/// Induced reduced-product structures are allowed to be larger.
pub const MAX_INPUT_UNIVERSE: usize = 16;

/// Dense table over `universe^arity`, row-major (first argument most significant).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Table<T> {
    arity: usize,
    size: usize,
    data: Vec<T>,
}

impl<T: Clone> Table<T> {
    pub fn from_fn(arity: usize, size: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len = size.pow(arity as u32);
        let mut data = Vec::with_capacity(len);
        let mut tuple = vec![0; arity];
        for idx in 0..len {
            decode(idx, size, &mut tuple);
            data.push(f(&tuple));
        }
        Table { arity, size, data }
    }

    pub fn from_vec(arity: usize, size: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == size.pow(arity as u32)).then_some(Table { arity, size, data })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn get(&self, args: &[usize]) -> &T {
        &self.data[self.index(args)]
    }

    pub fn index(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        args.iter().fold(0, |acc, &a| acc * self.size + a)
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }
}

/// Writes the base-`size` digits of `idx` into `out` (most significant first).
pub fn decode(mut idx: usize, size: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % size;
        idx /= size;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    sig: Arc<Signature>,
    labels: Vec<String>,
    dist: Vec<Vec<Rational>>,
    preds: Vec<Table<Rational>>,
    funcs: Vec<Table<usize>>,
    consts: Vec<usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("universe must be non-empty")]
    Empty,
    #[error("duplicate universe label `{0}`")]
    DuplicateLabel(String),
    #[error("distance matrix has the wrong shape")]
    DistShape,
    #[error("table for `{0}` has the wrong shape")]
    TableShape(String),
    #[error("`{0}` refers to an element outside the universe")]
    ElementRange(String),
    #[error("expected {expected} {kind} tables, found {found}")]
    SymbolCount { kind: &'static str, expected: usize, found: usize },
}

impl FiniteStructure {
    /// Assembles a structure, checking only shapes; metric and continuity
    /// conditions are left to [`FiniteStructure::validate`].
    pub fn new(
        sig: Arc<Signature>,
        labels: Vec<String>,
        dist: Vec<Vec<Rational>>,
        preds: Vec<Table<Rational>>,
        funcs: Vec<Table<usize>>,
        consts: Vec<usize>,
    ) -> Result<Self, StructureError> {
        let n = labels.len();
        if n == 0 {
            return Err(StructureError::Empty);
        }
        for (k, l) in labels.iter().enumerate() {
            if labels[..k].contains(l) {
                return Err(StructureError::DuplicateLabel(l.clone()));
            }
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(StructureError::DistShape);
        }
        let counts = [
            ("predicate", sig.preds().len(), preds.len()),
            ("function", sig.funcs().len(), funcs.len()),
            ("constant", sig.consts().len(), consts.len()),
        ];
        for (kind, expected, found) in counts {
            if expected != found {
                return Err(StructureError::SymbolCount { kind, expected, found });
            }
        }
        for (decl, t) in sig.preds().iter().zip(&preds) {
            if t.arity != decl.arity || t.size != n {
                return Err(StructureError::TableShape(decl.name.clone()));
            }
        }
        for (decl, t) in sig.funcs().iter().zip(&funcs) {
            if t.arity != decl.arity || t.size != n {
                return Err(StructureError::TableShape(decl.name.clone()));
            }
            if t.data.iter().any(|&v| v >= n) {
                return Err(StructureError::ElementRange(decl.name.clone()));
            }
        }
        for (name, &c) in sig.consts().iter().zip(&consts) {
            if c >= n {
                return Err(StructureError::ElementRange(name.clone()));
            }
        }
        Ok(FiniteStructure { sig, labels, dist, preds, funcs, consts })
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, a: usize, b: usize) -> &Rational {
        &self.dist[a][b]
    }

    pub fn dist_matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    pub fn pred(&self, p: usize) -> &Table<Rational> {
        &self.preds[p]
    }

    pub fn func(&self, f: usize) -> &Table<usize> {
        &self.funcs[f]
    }

    pub fn constant(&self, c: usize) -> usize {
        self.consts[c]
    }

    pub fn element(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Same structure with new labels.
    pub fn relabeled(&self, labels: Vec<String>) -> Result<Self, StructureError> {
        FiniteStructure::new(
            self.sig.clone(),
            labels,
            self.dist.clone(),
            self.preds.clone(),
            self.funcs.clone(),
            self.consts.clone(),
        )
    }

    /// Image of the structure under the bijection `perm` (element `a` becomes
    /// `perm[a]`); labels move with their elements.
    pub fn permuted(&self, perm: &[usize]) -> FiniteStructure {
        let n = self.size();
        let mut inv = vec![0; n];
        for (a, &b) in perm.iter().enumerate() {
            inv[b] = a;
        }
        let map_tuple = |t: &[usize]| t.iter().map(|&b| inv[b]).collect::<Vec<_>>();
        let labels = (0..n).map(|b| self.labels[inv[b]].clone()).collect();
        let dist = (0..n)
            .map(|a| (0..n).map(|b| self.dist[inv[a]][inv[b]].clone()).collect())
            .collect();
        let preds = self
            .preds
            .iter()
            .map(|t| Table::from_fn(t.arity, n, |args| t.get(&map_tuple(args)).clone()))
            .collect();
        let funcs = self
            .funcs
            .iter()
            .map(|t| Table::from_fn(t.arity, n, |args| perm[*t.get(&map_tuple(args))]))
            .collect();
        let consts = self.consts.iter().map(|&c| perm[c]).collect();
        FiniteStructure { sig: self.sig.clone(), labels, dist, preds, funcs, consts }
    }

    /// Exhaustive check of every metric and continuity condition; the first
    /// violation found is returned with its witnesses.
    pub fn validate(&self) -> Result<(), Violation> {
        let n = self.size();
        let zero = rational::zero();
        for a in 0..n {
            for b in 0..n {
                let d = &self.dist[a][b];
                if !rational::in_unit_interval(d) {
                    return Err(Violation::DistanceRange { a, b });
                }
                if a == b && *d != zero {
                    return Err(Violation::Diagonal { a });
                }
                if a != b && *d == zero {
                    return Err(Violation::Indistinct { a, b });
                }
                if *d != self.dist[b][a] {
                    return Err(Violation::Asymmetric { a, b });
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.dist[a][c] > &self.dist[a][b] + &self.dist[b][c] {
                        return Err(Violation::Triangle { a, b, c });
                    }
                }
            }
        }
        for (p, (decl, t)) in self.sig.preds().iter().zip(&self.preds).enumerate() {
            if let Some(i) = t.data.iter().position(|v| !rational::in_unit_interval(v)) {
                let mut args = vec![0; t.arity];
                decode(i, n, &mut args);
                return Err(Violation::PredicateRange { pred: p, args });
            }
            let len = t.data.len();
            let (mut x, mut y) = (vec![0; t.arity], vec![0; t.arity]);
            for i in 0..len {
                decode(i, n, &mut x);
                for j in (i + 1)..len {
                    decode(j, n, &mut y);
                    let gap = (&t.data[i] - &t.data[j]).abs();
                    if gap > &decl.lipschitz * self.tuple_dist(&x, &y) {
                        return Err(Violation::PredicateContinuity {
                            pred: p,
                            left: x.clone(),
                            right: y.clone(),
                        });
                    }
                }
            }
        }
        for (f, (decl, t)) in self.sig.funcs().iter().zip(&self.funcs).enumerate() {
            let len = t.data.len();
            let (mut x, mut y) = (vec![0; t.arity], vec![0; t.arity]);
            for i in 0..len {
                decode(i, n, &mut x);
                for j in (i + 1)..len {
                    decode(j, n, &mut y);
                    let gap = &self.dist[t.data[i]][t.data[j]];
                    if *gap > &decl.lipschitz * self.tuple_dist(&x, &y) {
                        return Err(Violation::FunctionContinuity {
                            func: f,
                            left: x.clone(),
                            right: y.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Max-metric on tuples.
    pub fn tuple_dist(&self, x: &[usize], y: &[usize]) -> Rational {
        x.iter()
            .zip(y)
            .map(|(&a, &b)| &self.dist[a][b])
            .max()
            .cloned()
            .unwrap_or_else(rational::zero)
    }

    pub fn eval(&self, f: &Formula, v: &Valuation) -> Result<Rational, EvalError> {
        let mut slots: Vec<String> = v.keys().cloned().collect();
        let compiled = compile(f, &self.sig, &mut slots)?;
        let mut env: Vec<usize> = v.values().copied().collect();
        if let Some((name, _)) = v.iter().find(|(_, &a)| a >= self.size()) {
            return Err(EvalError::ElementRange(name.clone()));
        }
        env.resize(slots.len(), 0);
        Ok(self.run(&compiled, &mut env))
    }

    /// Value of a sentence.
    pub fn eval_sentence(&self, f: &Formula) -> Result<Rational, EvalError> {
        self.eval(f, &Valuation::new())
    }

    fn term(&self, t: &CTerm, env: &[usize]) -> usize {
        match t {
            CTerm::Slot(s) => env[*s],
            CTerm::Const(c) => self.consts[*c],
            CTerm::App(f, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.term(a, env)).collect();
                *self.funcs[*f].get(&vals)
            }
        }
    }

    fn run(&self, f: &CFormula, env: &mut Vec<usize>) -> Rational {
        match f {
            CFormula::Atomic(p, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.term(a, env)).collect();
                self.preds[*p].get(&vals).clone()
            }
            CFormula::Dist(a, b) => {
                let (x, y) = (self.term(a, env), self.term(b, env));
                self.dist[x][y].clone()
            }
            CFormula::Value(r) => r.clone(),
            CFormula::Half(a) => rational::half(&self.run(a, env)),
            CFormula::Neg(a) => rational::monus(&rational::one(), &self.run(a, env)),
            CFormula::Monus(a, b) => {
                let x = self.run(a, env);
                let y = self.run(b, env);
                rational::monus(&x, &y)
            }
            CFormula::Min(a, b) => {
                let x = self.run(a, env);
                let y = self.run(b, env);
                x.min(y)
            }
            CFormula::Max(a, b) => {
                let x = self.run(a, env);
                let y = self.run(b, env);
                x.max(y)
            }
            CFormula::Sup(slot, body) => {
                let one = rational::one();
                let mut best = rational::zero();
                for a in 0..self.size() {
                    env[*slot] = a;
                    let v = self.run(body, env);
                    if v > best {
                        best = v;
                        if best == one {
                            break;
                        }
                    }
                }
                best
            }
            CFormula::Inf(slot, body) => {
                let zero = rational::zero();
                let mut best = rational::one();
                for a in 0..self.size() {
                    env[*slot] = a;
                    let v = self.run(body, env);
                    if v < best {
                        best = v;
                        if best == zero {
                            break;
                        }
                    }
                }
                best
            }
        }
    }
}

/// Variable assignment; ordered so that evaluation is deterministic.
pub type Valuation = BTreeMap<String, usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable `{0}` is unbound")]
    Unbound(String),
    #[error("symbol `{0}` is not in the structure's signature")]
    UnknownSymbol(String),
    #[error("variable `{0}` is assigned an element outside the universe")]
    ElementRange(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DistanceRange { a: usize, b: usize },
    Diagonal { a: usize },
    Indistinct { a: usize, b: usize },
    Asymmetric { a: usize, b: usize },
    Triangle { a: usize, b: usize, c: usize },
    PredicateRange { pred: usize, args: Vec<usize> },
    PredicateContinuity { pred: usize, left: Vec<usize>, right: Vec<usize> },
    FunctionContinuity { func: usize, left: Vec<usize>, right: Vec<usize> },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DistanceRange { a, b } => write!(f, "d({a},{b}) outside [0,1]"),
            Violation::Diagonal { a } => write!(f, "d({a},{a}) != 0"),
            Violation::Indistinct { a, b } => write!(f, "d({a},{b}) = 0 for distinct points"),
            Violation::Asymmetric { a, b } => write!(f, "d({a},{b}) != d({b},{a})"),
            Violation::Triangle { a, b, c } => {
                write!(f, "d({a},{c}) > d({a},{b}) + d({b},{c})")
            }
            Violation::PredicateRange { pred, args } => {
                write!(f, "predicate #{pred} at {args:?} outside [0,1]")
            }
            Violation::PredicateContinuity { pred, left, right } => {
                write!(f, "predicate #{pred} breaks its Lipschitz bound at {left:?}, {right:?}")
            }
            Violation::FunctionContinuity { func, left, right } => {
                write!(f, "function #{func} breaks its Lipschitz bound at {left:?}, {right:?}")
            }
        }
    }
}

/// Formula with variables resolved to environment slots.
#[derive(Debug, Clone)]
pub(crate) enum CFormula {
    Atomic(usize, Vec<CTerm>),
    Dist(CTerm, CTerm),
    Value(Rational),
    Half(Box<CFormula>),
    Neg(Box<CFormula>),
    Monus(Box<CFormula>, Box<CFormula>),
    Min(Box<CFormula>, Box<CFormula>),
    Max(Box<CFormula>, Box<CFormula>),
    Sup(usize, Box<CFormula>),
    Inf(usize, Box<CFormula>),
}

#[derive(Debug, Clone)]
pub(crate) enum CTerm {
    Slot(usize),
    Const(usize),
    App(usize, Vec<CTerm>),
}

/// `scope` holds the names of the slots currently in scope; binders push a
/// fresh slot so shadowing resolves to the innermost binder.
pub(crate) fn compile(
    f: &Formula,
    sig: &Signature,
    scope: &mut Vec<String>,
) -> Result<CFormula, EvalError> {
    let mut fresh = scope.len();
    let mut names: Vec<(String, usize)> =
        scope.iter().enumerate().map(|(k, n)| (n.clone(), k)).collect();
    let out = compile_rec(f, sig, &mut names, &mut fresh)?;
    while scope.len() < fresh {
        scope.push(String::new());
    }
    Ok(out)
}

fn compile_rec(
    f: &Formula,
    sig: &Signature,
    names: &mut Vec<(String, usize)>,
    fresh: &mut usize,
) -> Result<CFormula, EvalError> {
    let sub = |g: &Formula, names: &mut Vec<(String, usize)>, fresh: &mut usize| {
        compile_rec(g, sig, names, fresh).map(Box::new)
    };
    Ok(match f {
        Formula::Atomic(p, args) => {
            let idx = sig.pred_index(p).ok_or_else(|| EvalError::UnknownSymbol(p.clone()))?;
            let args = args.iter().map(|t| compile_term(t, sig, names)).collect::<Result<_, _>>()?;
            CFormula::Atomic(idx, args)
        }
        Formula::Dist(a, b) => {
            CFormula::Dist(compile_term(a, sig, names)?, compile_term(b, sig, names)?)
        }
        Formula::Zero => CFormula::Value(rational::zero()),
        Formula::One => CFormula::Value(rational::one()),
        Formula::DyadicConst(p, q) => CFormula::Value(rational::dyadic(*p, *q)),
        Formula::Half(a) => CFormula::Half(sub(a, names, fresh)?),
        Formula::Neg(a) => CFormula::Neg(sub(a, names, fresh)?),
        Formula::Monus(a, b) => CFormula::Monus(sub(a, names, fresh)?, sub(b, names, fresh)?),
        Formula::Min(a, b) => CFormula::Min(sub(a, names, fresh)?, sub(b, names, fresh)?),
        Formula::Max(a, b) => CFormula::Max(sub(a, names, fresh)?, sub(b, names, fresh)?),
        Formula::Sup(v, a) | Formula::Inf(v, a) => {
            let slot = *fresh;
            *fresh += 1;
            names.push((v.clone(), slot));
            let body = sub(a, names, fresh);
            names.pop();
            let body = body?;
            if matches!(f, Formula::Sup(..)) {
                CFormula::Sup(slot, body)
            } else {
                CFormula::Inf(slot, body)
            }
        }
    })
}

fn compile_term(
    t: &Term,
    sig: &Signature,
    names: &[(String, usize)],
) -> Result<CTerm, EvalError> {
    Ok(match t {
        Term::Var(v) => {
            let slot = names
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, s)| *s)
                .ok_or_else(|| EvalError::Unbound(v.clone()))?;
            CTerm::Slot(slot)
        }
        Term::Const(c) => {
            CTerm::Const(sig.const_index(c).ok_or_else(|| EvalError::UnknownSymbol(c.clone()))?)
        }
        Term::App(f, args) => {
            let idx = sig.func_index(f).ok_or_else(|| EvalError::UnknownSymbol(f.clone()))?;
            let args = args.iter().map(|a| compile_term(a, sig, names)).collect::<Result<_, _>>()?;
            CTerm::App(idx, args)
        }
    })
}

/// Formula compiled once for repeated evaluation at many points of many
/// structures over the same signature.
#[derive(Debug, Clone)]
pub struct Compiled {
    body: CFormula,
    params: usize,
    slots: usize,
}

impl Compiled {
    /// `params` fixes the argument order: argument `k` binds `params[k]`.
    pub fn new(f: &Formula, sig: &Signature, params: &[String]) -> Result<Self, EvalError> {
        let mut scope = params.to_vec();
        let body = compile(f, sig, &mut scope)?;
        Ok(Compiled { body, params: params.len(), slots: scope.len() })
    }

    pub fn eval(&self, s: &FiniteStructure, args: &[usize]) -> Rational {
        assert_eq!(args.len(), self.params, "argument count");
        let mut env = args.to_vec();
        env.resize(self.slots.max(self.params), 0);
        s.run(&self.body, &mut env)
    }
}

/// Random structure that always passes [`FiniteStructure::validate`].
///
/// Distances are multiples of 1/16 closed under shortest paths; predicate
/// tables are blended toward their mean until Lipschitz; function tables are
/// resampled up to 64 times, then replaced by a projection (or a constant map
/// when the bound is below 1).
pub fn random_structure(sig: &Arc<Signature>, size: usize, seed: u64) -> FiniteStructure {
    assert!((1..=MAX_INPUT_UNIVERSE).contains(&size), "universe size {size} outside 1..=16");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = size;
    let sixteenth = rational::ratio(1, 16);

    let mut dist = vec![vec![rational::zero(); n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let d = rational::ratio(rng.random_range(0..=16), 16);
            dist[a][b] = d.clone();
            dist[b][a] = d;
        }
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                let via = &dist[a][k] + &dist[k][b];
                if via < dist[a][b] {
                    dist[a][b] = via;
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a != b && dist[a][b] == rational::zero() {
                dist[a][b] = sixteenth.clone();
            }
        }
    }

    let labels: Vec<String> = (0..n).map(|a| format!("e{a}")).collect();
    let mut s = FiniteStructure {
        sig: sig.clone(),
        labels,
        dist,
        preds: Vec::new(),
        funcs: Vec::new(),
        consts: Vec::new(),
    };

    for decl in sig.preds() {
        let raw = Table::from_fn(decl.arity, n, |_| rational::ratio(rng.random_range(0..=16), 16));
        s.preds.push(flatten_until_lipschitz(&s, raw, &decl.lipschitz));
    }
    for decl in sig.funcs() {
        let mut table = None;
        for _ in 0..64 {
            let t = Table::from_fn(decl.arity, n, |_| rng.random_range(0..n));
            if function_is_lipschitz(&s, &t, &decl.lipschitz) {
                table = Some(t);
                break;
            }
        }
        let table = table.unwrap_or_else(|| {
            if decl.lipschitz >= rational::one() {
                Table::from_fn(decl.arity, n, |args| args[0])
            } else {
                Table::from_fn(decl.arity, n, |_| 0)
            }
        });
        s.funcs.push(table);
    }
    for _ in sig.consts() {
        s.consts.push(rng.random_range(0..n));
    }
    debug_assert_eq!(s.validate(), Ok(()));
    s
}

fn predicate_is_lipschitz(s: &FiniteStructure, t: &Table<Rational>, l: &Rational) -> bool {
    let n = s.size();
    let (mut x, mut y) = (vec![0; t.arity], vec![0; t.arity]);
    for i in 0..t.data.len() {
        decode(i, n, &mut x);
        for j in (i + 1)..t.data.len() {
            decode(j, n, &mut y);
            let gap = (&t.data[i] - &t.data[j]).abs();
            if gap > l * s.tuple_dist(&x, &y) {
                return false;
            }
        }
    }
    true
}

fn function_is_lipschitz(s: &FiniteStructure, t: &Table<usize>, l: &Rational) -> bool {
    let n = s.size();
    let (mut x, mut y) = (vec![0; t.arity], vec![0; t.arity]);
    for i in 0..t.data.len() {
        decode(i, n, &mut x);
        for j in (i + 1)..t.data.len() {
            decode(j, n, &mut y);
            if s.dist[t.data[i]][t.data[j]] > l * s.tuple_dist(&x, &y) {
                return false;
            }
        }
    }
    true
}

/// Largest blend `t = k/2^10` toward the mean for which the table is
/// Lipschitz; `t = 0` (the constant mean) always is.
fn flatten_until_lipschitz(
    s: &FiniteStructure,
    raw: Table<Rational>,
    l: &Rational,
) -> Table<Rational> {
    if predicate_is_lipschitz(s, &raw, l) {
        return raw;
    }
    let count = rational::int(raw.data.len() as i64);
    let mean = raw.data.iter().fold(rational::zero(), |acc, v| acc + v) / count;
    let blend = |k: u64| {
        let t = rational::dyadic(k, 10);
        let data = raw.data.iter().map(|v| &mean + (v - &mean) * &t).collect();
        Table { arity: raw.arity, size: raw.size, data }
    };
    let (mut lo, mut hi) = (0u64, 1024u64);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if predicate_is_lipschitz(s, &blend(mid), l) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    blend(lo)
}

/// First disagreement found by [`check_isomorphism`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoMismatch {
    NotBijective,
    Distance { a: usize, b: usize },
    Predicate { pred: usize, args: Vec<usize> },
    Function { func: usize, args: Vec<usize> },
    Constant { constant: usize },
}

/// Is `map` (element `a` of `x` to `map[a]` of `y`) a bijection preserving
/// distances and every symbol? Both structures must share a signature.
pub fn check_isomorphism(
    x: &FiniteStructure,
    y: &FiniteStructure,
    map: &[usize],
) -> Result<(), IsoMismatch> {
    let n = x.size();
    if map.len() != n || y.size() != n || x.sig != y.sig {
        return Err(IsoMismatch::NotBijective);
    }
    let mut seen = vec![false; n];
    for &b in map {
        if b >= n || seen[b] {
            return Err(IsoMismatch::NotBijective);
        }
        seen[b] = true;
    }
    for a in 0..n {
        for b in 0..n {
            if x.dist[a][b] != y.dist[map[a]][map[b]] {
                return Err(IsoMismatch::Distance { a, b });
            }
        }
    }
    for (p, t) in x.preds.iter().enumerate() {
        let mut args = vec![0; t.arity];
        for idx in 0..t.data.len() {
            decode(idx, n, &mut args);
            let image: Vec<usize> = args.iter().map(|&a| map[a]).collect();
            if t.data[idx] != *y.preds[p].get(&image) {
                return Err(IsoMismatch::Predicate { pred: p, args });
            }
        }
    }
    for (f, t) in x.funcs.iter().enumerate() {
        let mut args = vec![0; t.arity];
        for idx in 0..t.data.len() {
            decode(idx, n, &mut args);
            let image: Vec<usize> = args.iter().map(|&a| map[a]).collect();
            if map[t.data[idx]] != *y.funcs[f].get(&image) {
                return Err(IsoMismatch::Function { func: f, args });
            }
        }
    }
    for (c, &e) in x.consts.iter().enumerate() {
        if map[e] != y.consts[c] {
            return Err(IsoMismatch::Constant { constant: c });
        }
    }
    Ok(())
}

/// Evaluation cache keyed by formula, for callers that revisit subformulas.
#[derive(Debug, Default)]
pub struct SentenceCache {
    values: HashMap<Formula, Rational>,
}

impl SentenceCache {
    pub fn value(&mut self, s: &FiniteStructure, f: &Formula) -> Result<Rational, EvalError> {
        if let Some(v) = self.values.get(f) {
            return Ok(v.clone());
        }
        let v = s.eval_sentence(f)?;
        self.values.insert(f.clone(), v.clone());
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{ratio, zero};
    use crate::syntax::{parse, SymbolDecl};

    fn sig(l: Rational) -> Arc<Signature> {
        Arc::new(
            Signature::new(vec![SymbolDecl::new("P", 1, l)], vec![], vec!["c".into()]).unwrap(),
        )
    }

    fn two_point(l: Rational) -> FiniteStructure {
        let sig = sig(l);
        FiniteStructure::new(
            sig,
            vec!["a".into(), "b".into()],
            vec![vec![zero(), ratio(1, 2)], vec![ratio(1, 2), zero()]],
            vec![Table::from_vec(1, 2, vec![zero(), ratio(3, 4)]).unwrap()],
            vec![],
            vec![0],
        )
        .unwrap()
    }

    #[test]
    fn validate_lipschitz_examples() {
        assert_eq!(two_point(ratio(3, 2)).validate(), Ok(()));
        assert_eq!(
            two_point(rational::one()).validate(),
            Err(Violation::PredicateContinuity { pred: 0, left: vec![0], right: vec![1] })
        );
    }

    #[test]
    fn one_point_constant_tables() {
        let s = random_structure(&sig(rational::one()), 1, 3);
        assert_eq!(s.validate(), Ok(()));
        assert_eq!(s.size(), 1);
    }

    #[test]
    fn eval_examples() {
        let s = two_point(ratio(3, 2));
        let sig = s.signature().clone();
        assert_eq!(s.eval_sentence(&parse("sup x . P(x)", &sig).unwrap()).unwrap(), ratio(3, 4));
        assert_eq!(s.eval_sentence(&parse("d(c,c)", &sig).unwrap()).unwrap(), zero());
        assert_eq!(s.eval_sentence(&parse("1 -. 1", &sig).unwrap()).unwrap(), zero());
        assert_eq!(
            s.eval_sentence(&parse("P(x)", &sig).unwrap()),
            Err(EvalError::Unbound("x".into()))
        );
        let mut v = Valuation::new();
        v.insert("x".into(), 1);
        assert_eq!(s.eval(&parse("P(x)", &sig).unwrap(), &v).unwrap(), ratio(3, 4));
    }

    #[test]
    fn shadowing_uses_innermost_binder() {
        let s = two_point(ratio(3, 2));
        let sig = s.signature().clone();
        // inner inf rebinds x, so the outer sup is vacuous
        let f = parse("sup x . inf x . P(x)", &sig).unwrap();
        assert_eq!(s.eval_sentence(&f).unwrap(), zero());
    }

    #[test]
    fn random_is_deterministic_and_valid() {
        let sig = Arc::new(
            Signature::new(
                vec![SymbolDecl::new("P", 1, rational::int(2))],
                vec![SymbolDecl::new("f", 2, rational::int(8))],
                vec!["c".into()],
            )
            .unwrap(),
        );
        for seed in 0..20 {
            for size in [1, 3, 5] {
                let a = random_structure(&sig, size, seed);
                assert_eq!(a, random_structure(&sig, size, seed));
                assert_eq!(a.validate(), Ok(()));
            }
        }
    }

    #[test]
    fn permutation_preserves_values() {
        let s = two_point(ratio(3, 2));
        let t = s.permuted(&[1, 0]);
        assert_eq!(t.validate(), Ok(()));
        let f = parse("P(c) -. half(sup x . d(x,c))", s.signature()).unwrap();
        assert_eq!(s.eval_sentence(&f).unwrap(), t.eval_sentence(&f).unwrap());
    }
}
