//! Compilation of restricted formulas into determining sequences, and the
//! evaluator that checks them against direct evaluation.
//!
//! A determining sequence at precision `n` (write `N = 2^n`) is a list of
//! Boolean-algebra formulas `σ_0..σ_N` over variables `y[j][i]`
//! (`j < m`, `i ≤ N`) together with formulas `ψ_0..ψ_{m-1}`. Given a family
//! and a tuple, `y[j][i]` is read as the class of the level set
//! `{γ : ψ_j(ā(γ)) > i/N}` (strict) or `{γ : ψ_j(ā(γ)) ≥ i/N}` (weak), and
//! `σ_ℓ` is meant to bracket the value of the formula in the reduced
//! product around `ℓ/N`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::Serialize;
use thiserror::Error;

use crate::boolean::{
    Algebra, BTerm, BVar, BoolFormula, BoundedExists, CompiledBool, Mask, MonotonePolicy,
    QuotientBA,
};
use crate::rational::{self, Rational};
use crate::reduced::{reduced_product, Family, ReducedError, ReducedProduct};
use crate::structures::Valuation;
use crate::syntax::{free_vars, restricted_min, Formula};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("derived connective must be normalized first: {0}")]
    Unsupported(String),
    #[error("precision {0} is too large")]
    Precision(u32),
}

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Reduced(#[from] ReducedError),
    #[error("expected {expected} tuples, found {found}")]
    Arity { expected: usize, found: usize },
}

#[derive(Debug, Clone)]
pub struct DeterminingSequence {
    pub n: u32,
    /// Free metric variables of the translated formula, in order.
    pub vars: Vec<String>,
    pub sigmas: Vec<BoolFormula>,
    pub psis: Vec<Formula>,
    compiled: Vec<CompiledBool>,
}

impl DeterminingSequence {
    pub fn new(n: u32, vars: Vec<String>, sigmas: Vec<BoolFormula>, psis: Vec<Formula>) -> Self {
        let width = (1usize << n) + 1;
        assert_eq!(sigmas.len(), width, "one sigma per level");
        let compiled = sigmas
            .iter()
            .map(|s| CompiledBool::with_layout(s, psis.len(), width).expect("sigma within layout"))
            .collect();
        DeterminingSequence { n, vars, sigmas, psis, compiled }
    }

    /// `2^n`.
    pub fn levels(&self) -> usize {
        1 << self.n
    }

    pub fn m(&self) -> usize {
        self.psis.len()
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Copy with one σ replaced.
    pub fn with_sigma(&self, ell: usize, sigma: BoolFormula) -> Self {
        let mut sigmas = self.sigmas.clone();
        sigmas[ell] = sigma;
        DeterminingSequence::new(self.n, self.vars.clone(), sigmas, self.psis.clone())
    }

    /// Truth of `σ_ℓ` at the given argument classes (`args[j·(N+1) + i]`).
    pub fn sigma_holds(&self, ell: usize, alg: &Algebra, args: &[Mask]) -> bool {
        self.compiled[ell].eval(alg, args)
    }

    pub fn to_output(&self) -> TranslationOutput {
        TranslationOutput {
            n: self.n,
            m: self.m(),
            vars: self.vars.clone(),
            sigmas: self.sigmas.iter().map(|s| s.to_string()).collect(),
            psis: self.psis.iter().map(|p| p.to_string()).collect(),
            variable_convention: "y[j][i]".into(),
        }
    }
}

/// Serializable view of a determining sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranslationOutput {
    pub n: u32,
    pub m: usize,
    pub vars: Vec<String>,
    pub sigmas: Vec<String>,
    pub psis: Vec<String>,
    pub variable_convention: String,
}

/// Memoizing translator; safe to share between threads.
#[derive(Debug, Default)]
pub struct Translator {
    memo: RwLock<HashMap<(Formula, u32), Arc<DeterminingSequence>>>,
}

/// Translates with a throwaway memo table.
pub fn translate(f: &Formula, n: u32) -> Result<Arc<DeterminingSequence>, TranslateError> {
    Translator::default().translate(f, n)
}

impl Translator {
    pub fn new() -> Self {
        Translator::default()
    }

    pub fn translate(&self, f: &Formula, n: u32) -> Result<Arc<DeterminingSequence>, TranslateError> {
        if n > 6 {
            return Err(TranslateError::Precision(n));
        }
        let key = (f.clone(), n);
        if let Some(ds) = self.memo.read().expect("memo lock").get(&key) {
            return Ok(ds.clone());
        }
        let ds = Arc::new(self.build(f, n)?);
        self.memo.write().expect("memo lock").insert(key, ds.clone());
        Ok(ds)
    }

    fn build(&self, f: &Formula, n: u32) -> Result<DeterminingSequence, TranslateError> {
        let big_n = 1usize << n;
        let width = big_n + 1;
        let vars = free_vars(f);
        match f {
            Formula::Atomic(..) | Formula::Dist(..) => {
                let sigmas = (0..width).map(|i| BoolFormula::Ne0(BTerm::y(0, i))).collect();
                Ok(DeterminingSequence::new(n, vars, sigmas, vec![f.clone()]))
            }
            Formula::Zero => {
                let sigmas = (0..width).map(|_| BoolFormula::falsity()).collect();
                Ok(DeterminingSequence::new(n, vars, sigmas, vec![Formula::Zero]))
            }
            // The constant 1 exceeds i/N exactly for i < N.
            Formula::One => {
                let sigmas = (0..width)
                    .map(|i| if i < big_n { BoolFormula::truth() } else { BoolFormula::falsity() })
                    .collect();
                Ok(DeterminingSequence::new(n, vars, sigmas, vec![Formula::One]))
            }
            Formula::Half(a) => {
                // {half α > i/2^n} = {α > i/2^(n-1)}, so the child's level i
                // is read unchanged at level i.
                let child_n = n.saturating_sub(1);
                let child = self.translate(a, child_n)?;
                let kept = child.levels() + 1;
                let sigmas = (0..width)
                    .map(|ell| {
                        if n == 0 && ell == 1 {
                            BoolFormula::falsity()
                        } else if ell < kept {
                            child.sigmas[ell].clone()
                        } else {
                            BoolFormula::falsity()
                        }
                    })
                    .collect();
                let psis = child.psis.iter().map(|p| Formula::half(p.clone())).collect();
                Ok(DeterminingSequence::new(n, vars, sigmas, psis))
            }
            Formula::Monus(a, b) => {
                let left = self.translate(a, n)?;
                let right = self.translate(b, n)?;
                let m1 = left.m();
                // σ² reads the weak sets of β; those are complements of the
                // strict sets of 1 -. β at the mirrored level.
                let mirrored: Vec<BoolFormula> = right
                    .sigmas
                    .iter()
                    .map(|s| {
                        s.subst(&|v| match v {
                            BVar::Y { j, i } => Some(BTerm::compl(BTerm::y(m1 + j, big_n - i))),
                            BVar::Z { .. } => None,
                        })
                    })
                    .collect();
                let sigmas = (0..width)
                    .map(|k| {
                        let terms = (k..width)
                            .map(|i0| {
                                BoolFormula::And(vec![
                                    left.sigmas[i0].clone(),
                                    BoolFormula::not(mirrored[i0 - k].clone()),
                                ])
                            })
                            .collect();
                        BoolFormula::Or(terms)
                    })
                    .collect();
                let mut psis = left.psis.clone();
                psis.extend(right.psis.iter().map(|p| Formula::monus(Formula::One, p.clone())));
                Ok(DeterminingSequence::new(n, vars, sigmas, psis))
            }
            Formula::Sup(z, a) => {
                let child = self.translate(a, n)?;
                Ok(sup_case(z, &child, n, vars))
            }
            Formula::Inf(z, a) => {
                let rewritten = Formula::monus(
                    Formula::One,
                    Formula::sup(z, Formula::monus(Formula::One, (**a).clone())),
                );
                let ds = self.translate(&rewritten, n)?;
                Ok(DeterminingSequence::new(n, vars, ds.sigmas.clone(), ds.psis.clone()))
            }
            Formula::Min(..) | Formula::Max(..) | Formula::Neg(..) | Formula::DyadicConst(..) => {
                Err(TranslateError::Unsupported(f.to_string()))
            }
        }
    }
}

/// Length of the ψ-list [`translate`] produces for `f`, computed without
/// building it. Saturates at `usize::MAX`.
pub fn psi_count(f: &Formula) -> usize {
    fn sup(c: usize) -> usize {
        if c >= usize::BITS as usize { usize::MAX } else { (1usize << c) - 1 }
    }
    match f {
        Formula::Half(a) => psi_count(a),
        Formula::Monus(a, b) => psi_count(a).saturating_add(psi_count(b)),
        Formula::Sup(_, a) => sup(psi_count(a)),
        Formula::Inf(_, a) => 1usize.saturating_add(sup(1usize.saturating_add(psi_count(a)))),
        _ => 1,
    }
}

/// Non-empty subsets of `0..m` in emission order: singletons first, then the
/// rest by increasing bitmask.
pub fn sup_subset_order(m: usize) -> Vec<u32> {
    let mut order: Vec<u32> = (0..m).map(|j| 1u32 << j).collect();
    order.extend((1u32..(1 << m)).filter(|a| a.count_ones() > 1));
    order
}

/// For `sup_z α`, the ψ-list is `θ_A = sup_z min_{j∈A} ψ_j` for every
/// non-empty `A`, and `τ_i` asks for witnesses `w[j][·]` (one block per
/// level) whose meets over each `A` sit below the level sets of `θ_A`, with
/// `σ_i` true of the `w`'s.
fn sup_case(z: &str, child: &DeterminingSequence, n: u32, vars: Vec<String>) -> DeterminingSequence {
    let m = child.m();
    let width = child.levels() + 1;
    let order = sup_subset_order(m);
    let mut index = HashMap::new();
    for (k, a) in order.iter().enumerate() {
        index.insert(*a, k);
    }
    let psis = order
        .iter()
        .map(|&a| {
            let mut members = (0..m).filter(|j| a >> j & 1 == 1).map(|j| child.psis[j].clone());
            let first = members.next().expect("non-empty subset");
            Formula::sup(z, members.fold(first, restricted_min))
        })
        .collect();
    let off = child.sigmas.iter().filter_map(|s| s.max_z()).max().map_or(0, |k| k + 1);
    let groups: Vec<Vec<BVar>> = (0..width)
        .map(|lvl| (0..m).map(|j| BVar::Z { k: off + j, i: lvl }).collect())
        .collect();
    let bounds: Vec<(usize, u32, BTerm)> = (0..width)
        .flat_map(|lvl| order.iter().map(move |&a| (lvl, a)))
        .map(|(lvl, a)| (lvl, a, BTerm::y(index[&a], lvl)))
        .collect();
    let sigmas = child
        .sigmas
        .iter()
        .map(|s| {
            let body = s.subst(&|v| match v {
                BVar::Y { j, i } => Some(BTerm::z(off + j, i)),
                BVar::Z { .. } => None,
            });
            BoolFormula::Bounded(Box::new(BoundedExists {
                groups: groups.clone(),
                bounds: bounds.clone(),
                body,
                monotone: true,
            }))
        })
        .collect();
    DeterminingSequence::new(n, vars, sigmas, psis)
}

/// Strict and weak level sets, `[j][i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSets {
    pub strict: Vec<Vec<Mask>>,
    pub weak: Vec<Vec<Mask>>,
}

impl LevelSets {
    fn flat(sets: &[Vec<Mask>], ba: &QuotientBA) -> Vec<Mask> {
        sets.iter().flatten().map(|&x| ba.class_of(x)).collect()
    }

    pub fn strict_classes(&self, ba: &QuotientBA) -> Vec<Mask> {
        LevelSets::flat(&self.strict, ba)
    }

    pub fn weak_classes(&self, ba: &QuotientBA) -> Vec<Mask> {
        LevelSets::flat(&self.weak, ba)
    }
}

/// Coordinatewise values of every ψ, `[j][γ]`.
pub fn psi_values(
    ds: &DeterminingSequence,
    fam: &Family,
    args: &[Vec<usize>],
) -> Result<Vec<Vec<Rational>>, CertifyError> {
    if args.len() != ds.arity() {
        return Err(CertifyError::Arity { expected: ds.arity(), found: args.len() });
    }
    let mut out = Vec::with_capacity(ds.m());
    for psi in &ds.psis {
        let mut row = Vec::with_capacity(fam.members().len());
        for (g, s) in fam.members().iter().enumerate() {
            let v: Valuation = ds.vars.iter().cloned().zip(args.iter().map(|a| a[g])).collect();
            row.push(s.eval(psi, &v).map_err(ReducedError::from)?);
        }
        out.push(row);
    }
    Ok(out)
}

pub fn level_sets_from_values(values: &[Vec<Rational>], n: u32) -> LevelSets {
    let big_n = 1i64 << n;
    let thresholds: Vec<Rational> = (0..=big_n).map(|i| rational::ratio(i, big_n)).collect();
    let mut strict = Vec::with_capacity(values.len());
    let mut weak = Vec::with_capacity(values.len());
    for row in values {
        let sets = |pred: &dyn Fn(&Rational, &Rational) -> bool| -> Vec<Mask> {
            thresholds
                .iter()
                .map(|t| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, v)| pred(v, t))
                        .fold(0, |acc, (g, _)| acc | (1 << g))
                })
                .collect()
        };
        strict.push(sets(&|v, t| v > t));
        weak.push(sets(&|v, t| v >= t));
    }
    LevelSets { strict, weak }
}

pub fn level_sets(
    ds: &DeterminingSequence,
    fam: &Family,
    args: &[Vec<usize>],
) -> Result<LevelSets, CertifyError> {
    Ok(level_sets_from_values(&psi_values(ds, fam, args)?, ds.n))
}

/// Bounds read off the σ's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FVBounds {
    /// Largest `ℓ/N` with `σ_ℓ` true at the strict classes.
    #[serde(with = "opt_rational")]
    pub lower_strict: Option<Rational>,
    /// Largest `ℓ` with `σ_ℓ` true at the weak classes.
    pub ell_tilde: Option<usize>,
    /// Smallest `ℓ/N` with `σ_ℓ` false at the weak classes, else 1.
    #[serde(with = "crate::rational::serde_str")]
    pub upper: Rational,
    pub strict_truth: Vec<bool>,
    pub weak_truth: Vec<bool>,
}

mod opt_rational {
    use super::*;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(r) => s.serialize_str(&rational::format_rational(r)),
            None => s.serialize_none(),
        }
    }
}

impl FVBounds {
    pub fn from_truth(n: u32, strict_truth: Vec<bool>, weak_truth: Vec<bool>) -> Self {
        let big_n = 1i64 << n;
        let at = |ell: usize| rational::ratio(ell as i64, big_n);
        let lower_strict = strict_truth.iter().rposition(|&t| t).map(at);
        let ell_tilde = weak_truth.iter().rposition(|&t| t);
        let upper = weak_truth.iter().position(|&t| !t).map(at).unwrap_or_else(rational::one);
        FVBounds { lower_strict, ell_tilde, upper, strict_truth, weak_truth }
    }

    /// Strict lower bound `max(lower_strict, (ell_tilde − 1)/N)`, if any.
    pub fn lower(&self, n: u32) -> Option<Rational> {
        let big_n = 1i64 << n;
        let tilde = self.ell_tilde.map(|l| rational::ratio(l as i64 - 1, big_n));
        match (self.lower_strict.clone(), tilde) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    /// Is `value` in `(lower, upper]`?
    pub fn contains(&self, n: u32, value: &Rational) -> bool {
        let above = self.lower(n).is_none_or(|l| *value > l);
        above && *value <= self.upper
    }

    /// `upper − (ell_tilde − 1)/N`, when `ell_tilde` exists.
    pub fn width(&self, n: u32) -> Option<Rational> {
        let big_n = 1i64 << n;
        self.ell_tilde.map(|l| &self.upper - rational::ratio(l as i64 - 1, big_n))
    }
}

/// Truth of every σ at strict and weak classes.
pub fn sigma_truth(
    ds: &DeterminingSequence,
    ba: &QuotientBA,
    sets: &LevelSets,
) -> (Vec<bool>, Vec<bool>) {
    let alg = Algebra::new(ba);
    let strict = sets.strict_classes(ba);
    let weak = sets.weak_classes(ba);
    let s = (0..ds.sigmas.len()).map(|l| ds.sigma_holds(l, &alg, &strict)).collect();
    let w = (0..ds.sigmas.len()).map(|l| ds.sigma_holds(l, &alg, &weak)).collect();
    (s, w)
}

pub fn fv_bounds(
    f: &Formula,
    n: u32,
    fam: &Family,
    args: &[Vec<usize>],
) -> Result<FVBounds, CertifyError> {
    let ds = translate(f, n)?;
    let sets = level_sets(&ds, fam, args)?;
    let ba = QuotientBA::new(fam.ideal().clone());
    let (s, w) = sigma_truth(&ds, &ba, &sets);
    Ok(FVBounds::from_truth(n, s, w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// `σ_ℓ` at the strict classes but the value is `≤ ℓ/N`.
    StrictToValue,
    /// Value `> ℓ/N` but `σ_ℓ` fails at the weak classes.
    ValueToWeak,
    /// `σ_ℓ` at the weak classes but the value is `≤ (ℓ−1)/N`.
    WeakToValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub direction: Direction,
    pub ell: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub value: Rational,
    pub bounds: FVBounds,
    pub level_sets: LevelSets,
}

/// Everything a certify run computed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    #[serde(with = "crate::rational::serde_str")]
    pub value: Rational,
    pub bounds: FVBounds,
    pub level_sets: LevelSets,
    pub failures: Vec<Counterexample>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks both implications at every level plus the weak-set lower bound,
/// against the value in an already built reduced product.
pub fn certify_sequence(
    ds: &DeterminingSequence,
    rp: &ReducedProduct,
    f: &Formula,
    args: &[Vec<usize>],
) -> Result<Certificate, CertifyError> {
    let value = rp.eval_at(f, args)?;
    let sets = level_sets(ds, rp.family(), args)?;
    let ba = QuotientBA::new(rp.family().ideal().clone());
    let (s, w) = sigma_truth(ds, &ba, &sets);
    Ok(judge(ds.n, value, s, w, sets))
}

/// Same judgement from precomputed pieces.
pub fn judge(
    n: u32,
    value: Rational,
    strict_truth: Vec<bool>,
    weak_truth: Vec<bool>,
    sets: LevelSets,
) -> Certificate {
    let big_n = 1i64 << n;
    let bounds = FVBounds::from_truth(n, strict_truth, weak_truth);
    let mut failures = Vec::new();
    let mut fail = |direction, ell| {
        failures.push(Counterexample {
            direction,
            ell,
            value: value.clone(),
            bounds: bounds.clone(),
            level_sets: sets.clone(),
        })
    };
    for ell in 0..=(big_n as usize) {
        let at = rational::ratio(ell as i64, big_n);
        if bounds.strict_truth[ell] && value <= at {
            fail(Direction::StrictToValue, ell);
        }
        if value > at && !bounds.weak_truth[ell] {
            fail(Direction::ValueToWeak, ell);
        }
        if ell >= 1 && bounds.weak_truth[ell] && value <= rational::ratio(ell as i64 - 1, big_n) {
            fail(Direction::WeakToValue, ell);
        }
    }
    Certificate { value, bounds, level_sets: sets, failures }
}

/// Translates, builds the reduced product and certifies.
pub fn certify(
    f: &Formula,
    n: u32,
    fam: &Family,
    args: &[Vec<usize>],
) -> Result<Certificate, CertifyError> {
    let ds = translate(f, n)?;
    let rp = reduced_product(fam)?;
    certify_sequence(&ds, &rp, f, args)
}

/// Result of comparing `σ_{ℓ−1}(z̄)` with `σ_ℓ` at the padded, shifted `z̄`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PadShiftReport {
    pub exhaustive: bool,
    pub checked: usize,
    /// First `(ℓ, assignment)` where the two sides differ.
    pub failure: Option<(usize, Vec<Mask>)>,
}

impl PadShiftReport {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }
}

/// For every `ℓ` in `1..=N`: `σ_{ℓ−1}(z) ↔ σ_ℓ(1, z_0, …, z_{N−1}, 1, …)`,
/// blockwise for each `j`. Exhaustive over the variables that occur when
/// that is at most `policy.max_table` assignments, else sampled.
pub fn pad_shift_check(
    ds: &DeterminingSequence,
    ba: &QuotientBA,
    policy: &MonotonePolicy,
) -> PadShiftReport {
    use rand::{Rng, SeedableRng};
    let alg = Algebra::new(ba);
    let width = ds.levels() + 1;
    let m = ds.m();
    let top = ba.one();
    let elems = ba.elements();
    let mut checked = 0;
    let mut exhaustive_all = true;
    for ell in 1..width {
        // variables that can matter: those of σ_{ℓ−1} and the sources of σ_ℓ's
        let mut used: Vec<usize> = Vec::new();
        for v in ds.sigmas[ell - 1].free_vars() {
            if let BVar::Y { j, i } = v {
                used.push(j * width + i);
            }
        }
        for v in ds.sigmas[ell].free_vars() {
            if let BVar::Y { j, i } = v {
                if i >= 1 {
                    used.push(j * width + i - 1);
                }
            }
        }
        used.sort_unstable();
        used.dedup();
        let q = elems.len() as u64;
        let total = q.checked_pow(used.len() as u32).filter(|&t| t <= policy.max_table);
        let mut z = vec![0; m * width];
        let mut padded = vec![0; m * width];
        let compare = |z: &[Mask], padded: &mut Vec<Mask>| -> bool {
            for j in 0..m {
                padded[j * width] = top;
                for i in 1..width {
                    padded[j * width + i] = z[j * width + i - 1];
                }
            }
            ds.sigma_holds(ell - 1, &alg, z) == ds.sigma_holds(ell, &alg, padded)
        };
        match total {
            Some(total) => {
                let mut digits = vec![0; used.len()];
                for idx in 0..total as usize {
                    crate::structures::decode(idx, elems.len(), &mut digits);
                    for (slot, d) in used.iter().zip(&digits) {
                        z[*slot] = elems[*d];
                    }
                    checked += 1;
                    if !compare(&z, &mut padded) {
                        return PadShiftReport { exhaustive: false, checked, failure: Some((ell, z)) };
                    }
                }
            }
            None => {
                exhaustive_all = false;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(policy.seed ^ ell as u64);
                for _ in 0..policy.random_pairs {
                    for &slot in &used {
                        z[slot] = ba.class_of(rng.random::<u32>() & ba.ideal().full());
                    }
                    checked += 1;
                    if !compare(&z, &mut padded) {
                        return PadShiftReport { exhaustive: false, checked, failure: Some((ell, z)) };
                    }
                }
            }
        }
    }
    PadShiftReport { exhaustive: exhaustive_all, checked, failure: None }
}

/// Is `σ_ℓ`-at-weak-classes downward closed in `ℓ`?
pub fn weak_truth_is_downward_closed(weak_truth: &[bool]) -> bool {
    weak_truth.windows(2).all(|w| w[0] || !w[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::IdealSpec;
    use crate::rational::{ratio, zero};
    use crate::structures::{FiniteStructure, Table};
    use crate::syntax::{parse, Signature, SymbolDecl};

    fn sig() -> Arc<Signature> {
        Arc::new(
            Signature::new(vec![SymbolDecl::new("P", 1, rational::int(2))], vec![], vec!["c".into()])
                .unwrap(),
        )
    }

    fn point(v: Rational) -> FiniteStructure {
        FiniteStructure::new(
            sig(),
            vec!["u".into()],
            vec![vec![zero()]],
            vec![Table::from_vec(1, 1, vec![v]).unwrap()],
            vec![],
            vec![0],
        )
        .unwrap()
    }

    fn omega(n: usize) -> Vec<String> {
        (1..=n).map(|k| k.to_string()).collect()
    }

    fn family(values: &[Rational], ideal: IdealSpec) -> Family {
        Family::new(ideal, values.iter().cloned().map(point).collect()).unwrap()
    }

    #[test]
    fn atomic_sequence_shape() {
        let f = parse("P(x)", &sig()).unwrap();
        let ds = translate(&f, 1).unwrap();
        assert_eq!(ds.m(), 1);
        assert_eq!(ds.sigmas.len(), 3);
        for (i, s) in ds.sigmas.iter().enumerate() {
            assert_eq!(*s, BoolFormula::Ne0(BTerm::y(0, i)));
        }
    }

    #[test]
    fn zero_sequence_is_all_false() {
        let ds = translate(&Formula::Zero, 1).unwrap();
        assert!(ds.sigmas.iter().all(|s| s.is_falsity()));
    }

    #[test]
    fn sup_sequence_shape() {
        let f = parse("sup x . P(x)", &sig()).unwrap();
        let ds = translate(&f, 1).unwrap();
        assert_eq!(ds.m(), 1);
        assert_eq!(ds.psis[0], f);
        let g = parse("sup x . P(x) -. P(c)", &sig()).unwrap();
        let ds = translate(&g, 1).unwrap();
        assert_eq!(ds.m(), 3);
        let BoolFormula::Bounded(b) = &ds.sigmas[0] else { panic!("bounded block") };
        assert_eq!(b.groups.len(), 3);
        assert_eq!(b.groups[0].len(), 2);
        assert_eq!(b.bounds.len(), 9);
    }

    #[test]
    fn level_sets_of_three_coordinates() {
        let fam = family(
            &[ratio(9, 10), ratio(1, 5), ratio(1, 2)],
            IdealSpec::close(omega(3), &[0b001]).unwrap(),
        );
        let f = parse("P(c)", &sig()).unwrap();
        let ds = translate(&f, 1).unwrap();
        let sets = level_sets(&ds, &fam, &[]).unwrap();
        assert_eq!(sets.strict[0], vec![0b111, 0b001, 0]);
        assert_eq!(sets.weak[0][1], 0b101);

        let b = fv_bounds(&f, 1, &fam, &[]).unwrap();
        assert_eq!(b.lower_strict, Some(zero()));
        assert_eq!(b.ell_tilde, Some(1));
        assert_eq!(b.upper, rational::one());
        let cert = certify(&f, 1, &fam, &[]).unwrap();
        assert_eq!(cert.value, ratio(1, 2));
        assert!(cert.passed());
        assert!(b.contains(1, &cert.value));
    }

    #[test]
    fn one_and_zero_constants() {
        let fam = family(&[ratio(1, 3)], IdealSpec::trivial(omega(1)).unwrap());
        let cert = certify(&Formula::One, 1, &fam, &[]).unwrap();
        assert_eq!(cert.value, rational::one());
        assert_eq!(cert.bounds.upper, rational::one());
        assert!(cert.passed());
        let cert = certify(&Formula::Zero, 1, &fam, &[]).unwrap();
        assert_eq!(cert.value, zero());
        assert!(cert.passed());
        assert!(cert.bounds.contains(1, &cert.value));
    }

    #[test]
    fn corrupted_atomic_sigma_is_caught() {
        let fam = family(&[ratio(3, 4)], IdealSpec::trivial(omega(1)).unwrap());
        let f = parse("P(c)", &sig()).unwrap();
        let ds = translate(&f, 1).unwrap();
        let bad = ds.with_sigma(1, ds.sigmas[1].flip_atom(0));
        let rp = reduced_product(&fam).unwrap();
        assert!(!certify_sequence(&bad, &rp, &f, &[]).unwrap().passed());
    }

    #[test]
    fn psi_count_matches_translation() {
        for text in ["P(c)", "sup x . P(x) -. P(c)", "inf x . half(P(x))", "inf x . P(x) -. d(x,c)"] {
            let f = parse(text, &sig()).unwrap();
            assert_eq!(psi_count(&f), translate(&f, 1).unwrap().m(), "{text}");
        }
    }

    #[test]
    fn derived_nodes_are_rejected() {
        let f = Formula::neg(Formula::One);
        assert!(matches!(translate(&f, 0), Err(TranslateError::Unsupported(_))));
    }

    #[test]
    fn atomic_pad_shift() {
        let ds = translate(&parse("P(c)", &sig()).unwrap(), 2).unwrap();
        let r = pad_shift_check(&ds, &QuotientBA::powerset(2), &MonotonePolicy::default());
        assert!(r.holds() && r.exhaustive);
        let ds = translate(&Formula::Zero, 0).unwrap();
        assert!(pad_shift_check(&ds, &QuotientBA::powerset(2), &MonotonePolicy::default()).holds());
    }
}
