//! Reduced products of finite families over ideals.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::boolean::{fubini, limsup_ideal, IdealError, IdealSpec};
use crate::rational::Rational;
use crate::structures::{decode, EvalError, FiniteStructure, StructureError, Table, Valuation};
use crate::syntax::{free_vars, Formula, Signature};

/// Default cap on the number of product points.
pub const DEFAULT_MAX_POINTS: usize = 4096;

/// The product-point cap, overridable through `FV_MAX_PRODUCT_POINTS`.
pub fn max_product_points() -> usize {
    std::env::var("FV_MAX_PRODUCT_POINTS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_POINTS)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReducedError {
    #[error("family has {found} structures for a ground set of {expected}")]
    FamilySize { expected: usize, found: usize },
    #[error("structures in a family must share one signature")]
    SignatureMismatch,
    #[error("product has {points} points, above the cap of {cap}")]
    TooLarge { points: usize, cap: usize },
    #[error("function `{0}` is not well defined on classes")]
    NotWellDefined(String),
    #[error("malformed product tuple: {0}")]
    BadTuple(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// One structure per index, all over one signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    ideal: IdealSpec,
    members: Vec<FiniteStructure>,
}

impl Family {
    pub fn new(ideal: IdealSpec, members: Vec<FiniteStructure>) -> Result<Self, ReducedError> {
        if members.len() != ideal.ground_size() {
            return Err(ReducedError::FamilySize {
                expected: ideal.ground_size(),
                found: members.len(),
            });
        }
        let sig = members[0].signature();
        if members.iter().any(|m| m.signature() != sig) {
            return Err(ReducedError::SignatureMismatch);
        }
        Ok(Family { ideal, members })
    }

    /// `A^Ω`, every coordinate the same structure.
    pub fn power(ideal: IdealSpec, a: &FiniteStructure) -> Self {
        let members = vec![a.clone(); ideal.ground_size()];
        Family { ideal, members }
    }

    pub fn ideal(&self) -> &IdealSpec {
        &self.ideal
    }

    pub fn members(&self) -> &[FiniteStructure] {
        &self.members
    }

    pub fn signature(&self) -> &Arc<Signature> {
        self.members[0].signature()
    }

    pub fn point_count(&self) -> usize {
        self.members.iter().map(|m| m.size()).try_fold(1usize, |acc, s| acc.checked_mul(s)).unwrap_or(usize::MAX)
    }

    /// Mixed-radix encoding, first coordinate most significant, so numeric
    /// order is lexicographic order on tuples.
    pub fn encode(&self, tuple: &[usize]) -> Result<usize, ReducedError> {
        if tuple.len() != self.members.len() {
            return Err(ReducedError::BadTuple(format!(
                "{} coordinates for {} indices",
                tuple.len(),
                self.members.len()
            )));
        }
        let mut idx = 0;
        for (k, (&a, m)) in tuple.iter().zip(&self.members).enumerate() {
            if a >= m.size() {
                return Err(ReducedError::BadTuple(format!("coordinate {k} is {a}")));
            }
            idx = idx * m.size() + a;
        }
        Ok(idx)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.members.len()];
        for (slot, m) in out.iter_mut().zip(&self.members).rev() {
            *slot = idx % m.size();
            idx /= m.size();
        }
        out
    }

    /// `d_I(x, y)`: limsup along the ideal of coordinate distances.
    pub fn distance(&self, x: &[usize], y: &[usize]) -> Rational {
        let r: Vec<Rational> = self
            .members
            .iter()
            .zip(x.iter().zip(y))
            .map(|(m, (&a, &b))| m.dist(a, b).clone())
            .collect();
        limsup_ideal(&self.ideal, &r)
    }

    /// Coordinate values of `f` at the product tuples `args` (one per free
    /// variable of `f`, in first-occurrence order).
    pub fn coordinate_values(
        &self,
        f: &Formula,
        args: &[Vec<usize>],
    ) -> Result<Vec<Rational>, ReducedError> {
        let vars = free_vars(f);
        if vars.len() != args.len() {
            return Err(ReducedError::BadTuple(format!(
                "{} arguments for {} free variables",
                args.len(),
                vars.len()
            )));
        }
        self.members
            .iter()
            .enumerate()
            .map(|(g, m)| {
                let v: Valuation =
                    vars.iter().cloned().zip(args.iter().map(|a| a[g])).collect();
                m.eval(f, &v).map_err(ReducedError::from)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ReducedProduct {
    family: Family,
    class_of: Vec<usize>,
    reps: Vec<usize>,
    structure: FiniteStructure,
}

/// Builds `∏_I A_γ` with the default point cap.
pub fn reduced_product(fam: &Family) -> Result<ReducedProduct, ReducedError> {
    reduced_product_capped(fam, max_product_points())
}

pub fn reduced_product_capped(fam: &Family, cap: usize) -> Result<ReducedProduct, ReducedError> {
    let points = fam.point_count();
    if points > cap {
        return Err(ReducedError::TooLarge { points, cap });
    }
    // Distinct points of a metric space are at positive distance, so
    // d_I(x, y) = 0 exactly when x and y agree on every index outside the
    // kernel; that projection keys the classes.
    let co = fam.ideal.cokernel();
    let positive: Vec<usize> = (0..fam.members.len()).filter(|g| co >> g & 1 == 1).collect();
    let mut key_to_class: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut class_of = Vec::with_capacity(points);
    let mut reps = Vec::new();
    for p in 0..points {
        let t = fam.decode(p);
        let key: Vec<usize> = positive.iter().map(|&g| t[g]).collect();
        let next = reps.len();
        let c = *key_to_class.entry(key).or_insert(next);
        if c == next {
            reps.push(p);
        }
        class_of.push(c);
    }
    let rep_tuples: Vec<Vec<usize>> = reps.iter().map(|&p| fam.decode(p)).collect();
    let n = reps.len();
    let sig = fam.signature().clone();

    let labels = rep_tuples
        .iter()
        .map(|t| {
            let parts: Vec<&str> =
                t.iter().zip(&fam.members).map(|(&a, m)| m.labels()[a].as_str()).collect();
            format!("<{}>", parts.join(","))
        })
        .collect();
    let dist = (0..n)
        .map(|a| (0..n).map(|b| fam.distance(&rep_tuples[a], &rep_tuples[b])).collect())
        .collect();

    let preds = (0..sig.preds().len())
        .map(|p| {
            let arity = sig.preds()[p].arity;
            Table::from_fn(arity, n, |classes| {
                let r: Vec<Rational> = fam
                    .members
                    .iter()
                    .enumerate()
                    .map(|(g, m)| {
                        let args: Vec<usize> = classes.iter().map(|&c| rep_tuples[c][g]).collect();
                        m.pred(p).get(&args).clone()
                    })
                    .collect();
                limsup_ideal(&fam.ideal, &r)
            })
        })
        .collect();

    let apply = |f: usize, tuples: &[&[usize]]| -> usize {
        let image: Vec<usize> = fam
            .members
            .iter()
            .enumerate()
            .map(|(g, m)| {
                let args: Vec<usize> = tuples.iter().map(|t| t[g]).collect();
                *m.func(f).get(&args)
            })
            .collect();
        class_of[fam.encode(&image).expect("image lies in the product")]
    };

    let mut funcs = Vec::with_capacity(sig.funcs().len());
    for (f, decl) in sig.funcs().iter().enumerate() {
        let table = Table::from_fn(decl.arity, n, |classes| {
            let tuples: Vec<&[usize]> = classes.iter().map(|&c| rep_tuples[c].as_slice()).collect();
            apply(f, &tuples)
        });
        // every choice of representatives must land in the same class
        let all_tuples: Vec<Vec<usize>> = (0..points).map(|p| fam.decode(p)).collect();
        let mut args = vec![0; decl.arity];
        for idx in 0..points.pow(decl.arity as u32) {
            decode(idx, points, &mut args);
            let tuples: Vec<&[usize]> = args.iter().map(|&p| all_tuples[p].as_slice()).collect();
            let classes: Vec<usize> = args.iter().map(|&p| class_of[p]).collect();
            if apply(f, &tuples) != *table.get(&classes) {
                return Err(ReducedError::NotWellDefined(decl.name.clone()));
            }
        }
        funcs.push(table);
    }

    let consts = (0..sig.consts().len())
        .map(|c| {
            let t: Vec<usize> = fam.members.iter().map(|m| m.constant(c)).collect();
            class_of[fam.encode(&t).expect("constants lie in the product")]
        })
        .collect();

    let structure = FiniteStructure::new(sig, labels, dist, preds, funcs, consts)?;
    Ok(ReducedProduct { family: fam.clone(), class_of, reps, structure })
}

impl ReducedProduct {
    pub fn family(&self) -> &Family {
        &self.family
    }

    /// The induced structure on classes.
    pub fn structure(&self) -> &FiniteStructure {
        &self.structure
    }

    pub fn class_count(&self) -> usize {
        self.reps.len()
    }

    /// Lexicographically least tuple of each class.
    pub fn representative(&self, class: usize) -> Vec<usize> {
        self.family.decode(self.reps[class])
    }

    /// `π_I`.
    pub fn project(&self, tuple: &[usize]) -> Result<usize, ReducedError> {
        Ok(self.class_of[self.family.encode(tuple)?])
    }

    /// Point index to class index, for every product point.
    pub fn class_map(&self) -> &[usize] {
        &self.class_of
    }

    /// Value of `f` at `π_I(args)` in the reduced product.
    pub fn eval_at(&self, f: &Formula, args: &[Vec<usize>]) -> Result<Rational, ReducedError> {
        let vars = free_vars(f);
        if vars.len() != args.len() {
            return Err(ReducedError::BadTuple(format!(
                "{} arguments for {} free variables",
                args.len(),
                vars.len()
            )));
        }
        let mut v = Valuation::new();
        for (name, a) in vars.into_iter().zip(args) {
            v.insert(name, self.project(a)?);
        }
        Ok(self.structure.eval(f, &v)?)
    }
}

/// Both sides of the atomic limsup identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicCheck {
    pub in_product: Rational,
    pub limsup: Rational,
}

impl AtomicCheck {
    pub fn holds(&self) -> bool {
        self.in_product == self.limsup
    }
}

/// Compares `φ(π_I(ā))` in the reduced product with `limsup_I φ(ā(γ))`.
pub fn atomic_limsup_check(
    rp: &ReducedProduct,
    phi: &Formula,
    args: &[Vec<usize>],
) -> Result<AtomicCheck, ReducedError> {
    let in_product = rp.eval_at(phi, args)?;
    let r = rp.family.coordinate_values(phi, args)?;
    Ok(AtomicCheck { in_product, limsup: limsup_ideal(&rp.family.ideal, &r) })
}

/// Outcome of comparing the iterated reduced power with the single reduced
/// power over the Fubini product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FubiniReport {
    pub iterated_classes: usize,
    pub product_classes: usize,
    pub well_defined: bool,
    pub bijective: bool,
    pub isometric: bool,
    pub predicates: bool,
    pub functions: bool,
    pub constants: bool,
}

impl FubiniReport {
    pub fn holds(&self) -> bool {
        self.well_defined
            && self.bijective
            && self.isometric
            && self.predicates
            && self.functions
            && self.constants
    }
}

/// `(A^{Ω_inner}/I)^{Ω_outer}/J` against `A^{Ω_outer × Ω_inner}/(J × I)`.
///
/// The map sends the class of a grid point `⟨a_{m,n}⟩` to the class of
/// `⟨b_m⟩`, where `b_m` is the `I`-class of row `m`.
pub fn fubini_iso(
    a: &FiniteStructure,
    inner: &IdealSpec,
    outer: &IdealSpec,
    cap: usize,
) -> Result<FubiniReport, ReducedError> {
    let row = reduced_product_capped(&Family::power(inner.clone(), a), cap)?;
    let iterated = reduced_product_capped(&Family::power(outer.clone(), row.structure()), cap)?;
    let grid_ideal = fubini(outer, inner)?;
    let grid = reduced_product_capped(&Family::power(grid_ideal, a), cap)?;

    let (n_outer, n_inner) = (outer.ground_size(), inner.ground_size());
    let rho_point = |tuple: &[usize]| -> usize {
        let b: Vec<usize> = (0..n_outer)
            .map(|m| row.project(&tuple[m * n_inner..(m + 1) * n_inner]).expect("row in range"))
            .collect();
        iterated.project(&b).expect("row classes in range")
    };
    let rho: Vec<usize> = (0..grid.class_count()).map(|c| rho_point(&grid.representative(c))).collect();

    let well_defined = (0..grid.family.point_count()).all(|p| {
        let t = grid.family.decode(p);
        rho_point(&t) == rho[grid.class_of[p]]
    });
    let mut hit = vec![false; iterated.class_count()];
    for &r in &rho {
        hit[r] = true;
    }
    let bijective = grid.class_count() == iterated.class_count() && hit.iter().all(|&h| h);
    let check = if bijective {
        crate::structures::check_isomorphism(grid.structure(), iterated.structure(), &rho)
    } else {
        Err(crate::structures::IsoMismatch::NotBijective)
    };
    use crate::structures::IsoMismatch as M;
    let (isometric, predicates, functions, constants) = match check {
        Ok(()) => (true, true, true, true),
        Err(M::NotBijective) => (false, false, false, false),
        Err(M::Distance { .. }) => (false, false, false, false),
        Err(M::Predicate { .. }) => (true, false, false, false),
        Err(M::Function { .. }) => (true, true, false, false),
        Err(M::Constant { .. }) => (true, true, true, false),
    };
    Ok(FubiniReport {
        iterated_classes: iterated.class_count(),
        product_classes: grid.class_count(),
        well_defined,
        bijective,
        isometric,
        predicates,
        functions,
        constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{ratio, zero};
    use crate::syntax::{parse, SymbolDecl, Term};

    fn omega(n: usize) -> Vec<String> {
        (1..=n).map(|k| k.to_string()).collect()
    }

    fn sig() -> Arc<Signature> {
        Arc::new(
            Signature::new(
                vec![SymbolDecl::new("P", 1, crate::rational::int(2))],
                vec![],
                vec!["c".into()],
            )
            .unwrap(),
        )
    }

    fn two_point() -> FiniteStructure {
        FiniteStructure::new(
            sig(),
            vec!["a".into(), "b".into()],
            vec![vec![zero(), ratio(1, 2)], vec![ratio(1, 2), zero()]],
            vec![Table::from_vec(1, 2, vec![zero(), ratio(3, 4)]).unwrap()],
            vec![],
            vec![0],
        )
        .unwrap()
    }

    #[test]
    fn trivial_ideal_on_two_copies() {
        let fam = Family::power(IdealSpec::trivial(omega(2)).unwrap(), &two_point());
        let rp = reduced_product(&fam).unwrap();
        assert_eq!(rp.class_count(), 4);
        let s = rp.structure();
        let aa = rp.project(&[0, 0]).unwrap();
        let ab = rp.project(&[0, 1]).unwrap();
        assert_eq!(*s.dist(aa, ab), ratio(1, 2));
        assert_eq!(s.validate(), Ok(()));
    }

    #[test]
    fn maximal_ideal_keeps_one_coordinate() {
        let fam = Family::power(IdealSpec::maximal_at(omega(2), 0).unwrap(), &two_point());
        let rp = reduced_product(&fam).unwrap();
        assert_eq!(rp.class_count(), 2);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(rp.project(&[a, b]).unwrap(), rp.project(&[a, 0]).unwrap());
            }
        }
        assert!(rp.project(&[0, 2]).is_err());
    }

    #[test]
    fn atomic_identity_on_three_coordinates() {
        // P(c) takes 9/10, 1/5, 1/2 on the coordinates
        let s = Arc::new(
            Signature::new(vec![SymbolDecl::new("P", 1, crate::rational::int(2))], vec![], vec!["c".into()])
                .unwrap(),
        );
        let mk = |v: Rational| {
            FiniteStructure::new(
                s.clone(),
                vec!["u".into()],
                vec![vec![zero()]],
                vec![Table::from_vec(1, 1, vec![v]).unwrap()],
                vec![],
                vec![0],
            )
            .unwrap()
        };
        let fam = Family::new(
            IdealSpec::close(omega(3), &[0b001]).unwrap(),
            vec![mk(ratio(9, 10)), mk(ratio(1, 5)), mk(ratio(1, 2))],
        )
        .unwrap();
        let rp = reduced_product(&fam).unwrap();
        let phi = Formula::atomic("P", vec![Term::constant("c")]);
        let check = atomic_limsup_check(&rp, &phi, &[]).unwrap();
        assert!(check.holds());
        assert_eq!(check.limsup, ratio(1, 2));

        let d = parse("d(x,x)", &s).unwrap();
        let check = atomic_limsup_check(&rp, &d, &[vec![0, 0, 0]]).unwrap();
        assert_eq!(check.in_product, zero());
        assert!(check.holds());
    }

    #[test]
    fn fubini_small_cases() {
        let one = IdealSpec::trivial(omega(1)).unwrap();
        let r = fubini_iso(&two_point(), &one, &one, 4096).unwrap();
        assert!(r.holds());
        assert_eq!(r.product_classes, 2);
        let two = IdealSpec::trivial(omega(2)).unwrap();
        let r = fubini_iso(&two_point(), &two, &two, 4096).unwrap();
        assert!(r.holds());
        assert_eq!(r.product_classes, 16);
    }
}
