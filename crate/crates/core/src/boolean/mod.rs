//! Ideals on finite index sets, quotient Boolean algebras, limsup along an
//! ideal, Fubini products, and first-order Boolean-algebra formulas.
//!
//! Subsets of the ground set are bitmasks (`u32`, bit `k` is element `k`).
//! A finite ideal is closed under finite unions, so it is generated by its
//! union, the *kernel* `K`; its members are exactly the subsets of `K`. The
//! quotient `P(Ω)/I` is then isomorphic to `P(Ω∖K)`, and each class is
//! represented by its intersection with `Ω∖K`.

mod eval;
mod formula;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};

pub use eval::{ba_eval, is_monotone, Algebra, BoolEvalError, CompiledBool, MonotonePolicy};
pub use formula::{BTerm, BVar, BoolFormula, BoolParseError, BoundedExists};

/// Largest ground set; subsets must fit a `u32` mask and product grids of
/// two small index sets must fit too.
pub const MAX_GROUND: usize = 16;

pub type Mask = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdealError {
    #[error("ground set must have 1..={MAX_GROUND} elements, found {0}")]
    GroundSize(usize),
    #[error("subset mentions an element outside the ground set")]
    OutOfRange,
    #[error("the family contains the whole ground set")]
    Improper,
    #[error("the family does not contain the empty set")]
    MissingEmpty,
    #[error("the family is not closed downward (missing a subset of {0:#b})")]
    NotDownwardClosed(Mask),
    #[error("the family is not closed under unions ({0:#b} and {1:#b})")]
    NotUnionClosed(Mask, Mask),
    #[error("unknown ground-set label `{0}`")]
    UnknownLabel(String),
}

/// Proper ideal on a finite labeled ground set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IdealSpec {
    omega: Vec<String>,
    kernel: Mask,
}

fn full_mask(n: usize) -> Mask {
    if n == 32 {
        Mask::MAX
    } else {
        (1 << n) - 1
    }
}

/// All submasks of `m`, in increasing numeric order.
pub fn submasks(m: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(0u32);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == m { None } else { Some(((cur | !m).wrapping_add(1)) & m) };
        Some(cur)
    })
}

impl IdealSpec {
    /// Smallest ideal containing `generators`.
    pub fn close(omega: Vec<String>, generators: &[Mask]) -> Result<Self, IdealError> {
        check_ground(&omega)?;
        let full = full_mask(omega.len());
        let kernel = generators.iter().fold(0, |acc, g| acc | g);
        if kernel & !full != 0 {
            return Err(IdealError::OutOfRange);
        }
        if kernel == full {
            return Err(IdealError::Improper);
        }
        Ok(IdealSpec { omega, kernel })
    }

    /// The trivial ideal `{∅}`.
    pub fn trivial(omega: Vec<String>) -> Result<Self, IdealError> {
        IdealSpec::close(omega, &[])
    }

    /// Ideal generated by `Ω ∖ {keep}`: its dual filter is the principal
    /// ultrafilter at `keep`.
    pub fn maximal_at(omega: Vec<String>, keep: usize) -> Result<Self, IdealError> {
        let full = full_mask(omega.len());
        IdealSpec::close(omega, &[full & !(1 << keep)])
    }

    /// Accepts an explicit family after checking every ideal axiom.
    pub fn from_members(omega: Vec<String>, members: &[Mask]) -> Result<Self, IdealError> {
        check_ground(&omega)?;
        let full = full_mask(omega.len());
        let mut set: Vec<Mask> = members.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.iter().any(|m| m & !full != 0) {
            return Err(IdealError::OutOfRange);
        }
        if set.binary_search(&0).is_err() {
            return Err(IdealError::MissingEmpty);
        }
        if set.binary_search(&full).is_ok() {
            return Err(IdealError::Improper);
        }
        for &a in &set {
            for b in submasks(a) {
                if set.binary_search(&b).is_err() {
                    return Err(IdealError::NotDownwardClosed(a));
                }
            }
            for &b in &set {
                if set.binary_search(&(a | b)).is_err() {
                    return Err(IdealError::NotUnionClosed(a, b));
                }
            }
        }
        let kernel = set.iter().fold(0, |acc, m| acc | m);
        Ok(IdealSpec { omega, kernel })
    }

    pub fn omega(&self) -> &[String] {
        &self.omega
    }

    pub fn ground_size(&self) -> usize {
        self.omega.len()
    }

    pub fn full(&self) -> Mask {
        full_mask(self.omega.len())
    }

    /// Union of all members; the ideal is `P(kernel)`.
    pub fn kernel(&self) -> Mask {
        self.kernel
    }

    /// `Ω ∖ kernel`; never empty.
    pub fn cokernel(&self) -> Mask {
        self.full() & !self.kernel
    }

    pub fn contains(&self, set: Mask) -> bool {
        set & !self.kernel == 0
    }

    pub fn members(&self) -> Vec<Mask> {
        submasks(self.kernel).collect()
    }

    pub fn mask_of(&self, labels: &[String]) -> Result<Mask, IdealError> {
        labels.iter().try_fold(0, |acc, l| {
            let k = self
                .omega
                .iter()
                .position(|o| o == l)
                .ok_or_else(|| IdealError::UnknownLabel(l.clone()))?;
            Ok(acc | (1 << k))
        })
    }

    pub fn labels_of(&self, set: Mask) -> Vec<String> {
        (0..self.omega.len()).filter(|k| set >> k & 1 == 1).map(|k| self.omega[k].clone()).collect()
    }

    /// Does this ideal have a maximal (prime) dual filter, i.e. a one-point cokernel?
    pub fn is_maximal(&self) -> bool {
        self.cokernel().count_ones() == 1
    }
}

fn check_ground(omega: &[String]) -> Result<(), IdealError> {
    if omega.is_empty() || omega.len() > MAX_GROUND {
        return Err(IdealError::GroundSize(omega.len()));
    }
    Ok(())
}

/// `min_{S ∈ I} max_{γ ∉ S} r_γ`.
///
/// The minimum is attained at `S = kernel`, so this is the maximum of `r`
/// over the cokernel.
pub fn limsup_ideal(ideal: &IdealSpec, r: &[Rational]) -> Rational {
    assert_eq!(r.len(), ideal.ground_size(), "one value per index");
    let co = ideal.cokernel();
    r.iter()
        .enumerate()
        .filter(|(k, _)| co >> k & 1 == 1)
        .map(|(_, v)| v)
        .max()
        .cloned()
        .unwrap_or_else(rational::zero)
}

/// The finite Boolean algebra `P(Ω)/I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuotientBA {
    ideal: IdealSpec,
    top: Mask,
}

impl QuotientBA {
    pub fn new(ideal: IdealSpec) -> Self {
        let top = ideal.cokernel();
        QuotientBA { ideal, top }
    }

    /// `P(Ω)` itself for a ground set of `n` points.
    pub fn powerset(n: usize) -> Self {
        let omega = (1..=n).map(|k| k.to_string()).collect();
        QuotientBA::new(IdealSpec::trivial(omega).expect("n in range"))
    }

    pub fn ideal(&self) -> &IdealSpec {
        &self.ideal
    }

    /// Number of classes.
    pub fn size(&self) -> usize {
        1 << self.top.count_ones()
    }

    pub fn zero(&self) -> Mask {
        0
    }

    pub fn one(&self) -> Mask {
        self.top
    }

    /// Class representatives in increasing order.
    pub fn elements(&self) -> Vec<Mask> {
        submasks(self.top).collect()
    }

    /// Atoms as single-point masks.
    pub fn atoms(&self) -> Vec<Mask> {
        (0..32).map(|k| 1u32 << k).filter(|b| self.top & b != 0).collect()
    }

    /// `[X]`, as its representative.
    pub fn class_of(&self, x: Mask) -> Mask {
        x & self.top
    }

    /// Every subset of `Ω` in the class of `rep`.
    pub fn class_members(&self, rep: Mask) -> Vec<Mask> {
        submasks(self.ideal.kernel).map(|k| k | rep).collect()
    }

    /// Same class iff the symmetric difference lies in the ideal.
    pub fn equivalent(&self, x: Mask, y: Mask) -> bool {
        self.ideal.contains(x ^ y)
    }

    pub fn meet(&self, x: Mask, y: Mask) -> Mask {
        x & y
    }

    pub fn join(&self, x: Mask, y: Mask) -> Mask {
        x | y
    }

    pub fn complement(&self, x: Mask) -> Mask {
        self.top & !x
    }

    /// `[x] ≤ [y]` iff `x ∖ y` lies in the ideal.
    pub fn le(&self, x: Mask, y: Mask) -> bool {
        self.ideal.contains(x & !y)
    }
}

/// `I × J` on the grid `Ω₁ × Ω₂` (cell `(a, b)` has index `a·|Ω₂| + b`):
/// `A ∈ I × J` iff the rows `a` whose section `A_a` is outside `J` form a
/// member of `I`.
pub fn fubini(outer: &IdealSpec, inner: &IdealSpec) -> Result<IdealSpec, IdealError> {
    let (n1, n2) = (outer.ground_size(), inner.ground_size());
    if n1 * n2 > MAX_GROUND {
        return Err(IdealError::GroundSize(n1 * n2));
    }
    let omega: Vec<String> = outer
        .omega()
        .iter()
        .flat_map(|a| inner.omega().iter().map(move |b| format!("({a},{b})")))
        .collect();
    let full = full_mask(n1 * n2);
    // membership is sectionwise; the kernel is the union of all members
    let member = |set: Mask| fubini_member(outer, inner, set);
    let kernel = (0..n1 * n2)
        .map(|k| 1u32 << k)
        .filter(|&b| member(b))
        .fold(0, |acc, b| acc | b);
    debug_assert!(member(kernel));
    if kernel == full {
        return Err(IdealError::Improper);
    }
    Ok(IdealSpec { omega, kernel })
}

/// The sectionwise criterion itself, for a single set on the grid.
pub fn fubini_member(outer: &IdealSpec, inner: &IdealSpec, set: Mask) -> bool {
    let n2 = inner.ground_size();
    let row_mask = full_mask(n2);
    let big_rows = (0..outer.ground_size())
        .filter(|a| !inner.contains((set >> (a * n2)) & row_mask))
        .fold(0, |acc, a| acc | (1 << a));
    outer.contains(big_rows)
}

/// JSON form: `{"omega": [labels], "generators": [[labels]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealFile {
    pub omega: Vec<String>,
    #[serde(default)]
    pub generators: Vec<Vec<String>>,
}

impl IdealFile {
    pub fn to_ideal(&self) -> Result<IdealSpec, IdealError> {
        let probe = IdealSpec { omega: self.omega.clone(), kernel: 0 };
        check_ground(&self.omega)?;
        let gens = self
            .generators
            .iter()
            .map(|g| probe.mask_of(g))
            .collect::<Result<Vec<_>, _>>()?;
        IdealSpec::close(self.omega.clone(), &gens)
    }

    pub fn from_ideal(ideal: &IdealSpec) -> Self {
        let generators = if ideal.kernel == 0 { vec![] } else { vec![ideal.labels_of(ideal.kernel)] };
        IdealFile { omega: ideal.omega.clone(), generators }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn omega(n: usize) -> Vec<String> {
        (1..=n).map(|k| k.to_string()).collect()
    }

    #[test]
    fn closure_examples() {
        let i = IdealSpec::close(omega(3), &[0b001]).unwrap();
        assert_eq!(i.members(), vec![0, 0b001]);
        assert_eq!(IdealSpec::close(omega(2), &[0b01, 0b10]), Err(IdealError::Improper));
        let i = IdealSpec::close(omega(3), &[0b011]).unwrap();
        assert_eq!(i.members(), vec![0, 0b001, 0b010, 0b011]);
    }

    #[test]
    fn explicit_families_are_checked() {
        assert!(IdealSpec::from_members(omega(3), &[0, 1, 2, 3]).is_ok());
        assert_eq!(
            IdealSpec::from_members(omega(3), &[0, 3]),
            Err(IdealError::NotDownwardClosed(3))
        );
        assert_eq!(
            IdealSpec::from_members(omega(3), &[0, 1, 2]),
            Err(IdealError::NotUnionClosed(1, 2))
        );
        assert_eq!(IdealSpec::from_members(omega(2), &[1]), Err(IdealError::MissingEmpty));
    }

    #[test]
    fn limsup_examples() {
        let r = vec![ratio(9, 10), ratio(1, 5), ratio(1, 2)];
        assert_eq!(limsup_ideal(&IdealSpec::trivial(omega(3)).unwrap(), &r), ratio(9, 10));
        let i = IdealSpec::close(omega(3), &[0b001]).unwrap();
        assert_eq!(limsup_ideal(&i, &r), ratio(1, 2));
        assert_eq!(limsup_ideal(&IdealSpec::maximal_at(omega(3), 1).unwrap(), &r), ratio(1, 5));
    }

    #[test]
    fn quotient_examples() {
        assert_eq!(QuotientBA::powerset(2).size(), 4);
        assert_eq!(QuotientBA::powerset(1).size(), 2);
        let b = QuotientBA::new(IdealSpec::close(omega(3), &[0b001]).unwrap());
        assert_eq!(b.size(), 4);
        assert_eq!(b.elements(), vec![0, 0b010, 0b100, 0b110]);
        assert_eq!(b.class_members(0b010), vec![0b010, 0b011]);
        assert!(b.equivalent(0b001, 0));
        assert_eq!(b.complement(0b010), 0b100);
    }

    #[test]
    fn fubini_example() {
        // I = {∅,{1}} on {1,2} outer, J = {∅} on {a,b} inner
        let i = IdealSpec::close(omega(2), &[0b01]).unwrap();
        let j = IdealSpec::trivial(vec!["a".into(), "b".into()]).unwrap();
        let p = fubini(&i, &j).unwrap();
        // row 1 (cells 0,1) arbitrary, row 2 (cells 2,3) empty
        assert_eq!(p.kernel(), 0b0011);
        assert_eq!(p.members().len(), 4);
        let t = fubini(&IdealSpec::trivial(omega(1)).unwrap(), &IdealSpec::trivial(omega(1)).unwrap());
        assert_eq!(t.unwrap().members(), vec![0]);
    }

    #[test]
    fn ideal_file_round_trip() {
        let f: IdealFile = serde_json::from_str(r#"{"omega":["1","2","3"],"generators":[["1"]]}"#).unwrap();
        let i = f.to_ideal().unwrap();
        assert_eq!(i.kernel(), 1);
        assert_eq!(IdealFile::from_ideal(&i).to_ideal().unwrap(), i);
    }
}
