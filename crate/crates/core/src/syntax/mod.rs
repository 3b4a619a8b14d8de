//! Signatures, terms and the formula AST.
//!
//! Formulas are `[0,1]`-valued. The primitive connectives are the constants
//! `0`, `1`, halving and truncated subtraction; a formula using only those
//! (plus atomic formulas and `sup`/`inf`) is *restricted*. `min`, `max`,
//! `neg` and dyadic constants are accepted by the parser and eliminated
//! exactly by [`normalize_restricted`].

mod parse;
mod print;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};

pub use parse::{parse, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolDecl {
    pub name: String,
    pub arity: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub lipschitz: Rational,
}

impl SymbolDecl {
    pub fn new(name: impl Into<String>, arity: usize, lipschitz: Rational) -> Self {
        SymbolDecl { name: name.into(), arity, lipschitz }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("symbol `{0}` declared twice")]
    DuplicateName(String),
    #[error("symbol `{0}` must have positive arity")]
    ZeroArity(String),
    #[error("symbol `{0}` must have a positive Lipschitz bound")]
    NonPositiveLipschitz(String),
    #[error("`{0}` is reserved")]
    Reserved(String),
}

/// Words the concrete syntax claims for itself.
pub const RESERVED: &[&str] = &["half", "sup", "inf", "d", "min", "max", "neg", "const"];

/// One-sorted signature with diameter bound 1.
///
/// Each predicate and function symbol carries a Lipschitz bound `L`, which
/// realizes the modulus of uniform continuity `Δ(ε) = ε / L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSignature", into = "RawSignature")]
pub struct Signature {
    preds: Vec<SymbolDecl>,
    funcs: Vec<SymbolDecl>,
    consts: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawSignature {
    #[serde(default)]
    preds: Vec<SymbolDecl>,
    #[serde(default)]
    funcs: Vec<SymbolDecl>,
    #[serde(default)]
    consts: Vec<String>,
}

impl TryFrom<RawSignature> for Signature {
    type Error = SignatureError;

    fn try_from(raw: RawSignature) -> Result<Self, Self::Error> {
        Signature::new(raw.preds, raw.funcs, raw.consts)
    }
}

impl From<Signature> for RawSignature {
    fn from(sig: Signature) -> Self {
        RawSignature { preds: sig.preds, funcs: sig.funcs, consts: sig.consts }
    }
}

impl Signature {
    pub fn new(
        preds: Vec<SymbolDecl>,
        funcs: Vec<SymbolDecl>,
        consts: Vec<String>,
    ) -> Result<Self, SignatureError> {
        let mut seen = HashSet::new();
        for decl in preds.iter().chain(&funcs) {
            if decl.arity == 0 {
                return Err(SignatureError::ZeroArity(decl.name.clone()));
            }
            if decl.lipschitz <= rational::zero() {
                return Err(SignatureError::NonPositiveLipschitz(decl.name.clone()));
            }
        }
        let names = preds.iter().chain(&funcs).map(|d| &d.name).chain(&consts);
        for name in names {
            if RESERVED.contains(&name.as_str()) || name == "0" || name == "1" {
                return Err(SignatureError::Reserved(name.clone()));
            }
            if !seen.insert(name.clone()) {
                return Err(SignatureError::DuplicateName(name.clone()));
            }
        }
        Ok(Signature { preds, funcs, consts })
    }

    pub fn preds(&self) -> &[SymbolDecl] {
        &self.preds
    }

    pub fn funcs(&self) -> &[SymbolDecl] {
        &self.funcs
    }

    pub fn consts(&self) -> &[String] {
        &self.consts
    }

    pub fn pred_index(&self, name: &str) -> Option<usize> {
        self.preds.iter().position(|d| d.name == name)
    }

    pub fn func_index(&self, name: &str) -> Option<usize> {
        self.funcs.iter().position(|d| d.name == name)
    }

    pub fn const_index(&self, name: &str) -> Option<usize> {
        self.consts.iter().position(|c| c == name)
    }

    /// Is `name` usable as a variable (not a declared symbol, not reserved)?
    pub fn is_variable_name(&self, name: &str) -> bool {
        !RESERVED.contains(&name)
            && self.const_index(name).is_none()
            && self.pred_index(name).is_none()
            && self.func_index(name).is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.to_string(), args)
    }

    fn collect_vars(&self, bound: &[String], out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|t| t.collect_vars(bound, out)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

/// Formula AST. `Min`, `Max`, `Neg` and `DyadicConst` are derived nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atomic(String, Vec<Term>),
    Dist(Term, Term),
    Zero,
    One,
    Half(Box<Formula>),
    Monus(Box<Formula>, Box<Formula>),
    Sup(String, Box<Formula>),
    Inf(String, Box<Formula>),
    Min(Box<Formula>, Box<Formula>),
    Max(Box<Formula>, Box<Formula>),
    Neg(Box<Formula>),
    /// `p / 2^q` with `0 <= p <= 2^q`.
    DyadicConst(u64, u32),
}

impl Formula {
    pub fn atomic(pred: &str, args: Vec<Term>) -> Formula {
        Formula::Atomic(pred.to_string(), args)
    }

    pub fn dist(a: Term, b: Term) -> Formula {
        Formula::Dist(a, b)
    }

    pub fn half(f: Formula) -> Formula {
        Formula::Half(Box::new(f))
    }

    pub fn monus(a: Formula, b: Formula) -> Formula {
        Formula::Monus(Box::new(a), Box::new(b))
    }

    pub fn sup(v: &str, f: Formula) -> Formula {
        Formula::Sup(v.to_string(), Box::new(f))
    }

    pub fn inf(v: &str, f: Formula) -> Formula {
        Formula::Inf(v.to_string(), Box::new(f))
    }

    pub fn min(a: Formula, b: Formula) -> Formula {
        Formula::Min(Box::new(a), Box::new(b))
    }

    pub fn max(a: Formula, b: Formula) -> Formula {
        Formula::Max(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Formula) -> Formula {
        Formula::Neg(Box::new(a))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Atomic(..) | Formula::Dist(..))
    }

    /// No derived nodes anywhere in the tree.
    pub fn is_restricted(&self) -> bool {
        match self {
            Formula::Atomic(..) | Formula::Dist(..) | Formula::Zero | Formula::One => true,
            Formula::Half(a) | Formula::Sup(_, a) | Formula::Inf(_, a) => a.is_restricted(),
            Formula::Monus(a, b) => a.is_restricted() && b.is_restricted(),
            Formula::Min(..) | Formula::Max(..) | Formula::Neg(..) | Formula::DyadicConst(..) => {
                false
            }
        }
    }

    /// Connective/quantifier nesting depth; atoms and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atomic(..)
            | Formula::Dist(..)
            | Formula::Zero
            | Formula::One
            | Formula::DyadicConst(..) => 0,
            Formula::Half(a) | Formula::Sup(_, a) | Formula::Inf(_, a) | Formula::Neg(a) => {
                1 + a.depth()
            }
            Formula::Monus(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atomic(..)
            | Formula::Dist(..)
            | Formula::Zero
            | Formula::One
            | Formula::DyadicConst(..) => 1,
            Formula::Half(a) | Formula::Sup(_, a) | Formula::Inf(_, a) | Formula::Neg(a) => {
                1 + a.size()
            }
            Formula::Monus(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        free_vars(self).is_empty()
    }

    /// Checks every symbol against `sig`: declared, right arity, and
    /// no bare identifier that is really a predicate or function name.
    pub fn check(&self, sig: &Signature) -> Result<(), ParseError> {
        fn term(t: &Term, sig: &Signature) -> Result<(), ParseError> {
            match t {
                Term::Var(v) if !sig.is_variable_name(v) => {
                    Err(ParseError::Syntax { pos: 0, message: format!("`{v}` is not a variable") })
                }
                Term::Var(_) => Ok(()),
                Term::Const(c) if sig.const_index(c).is_none() => {
                    Err(ParseError::Undeclared { name: c.clone(), pos: 0 })
                }
                Term::Const(_) => Ok(()),
                Term::App(f, args) => {
                    let idx = sig
                        .func_index(f)
                        .ok_or_else(|| ParseError::Undeclared { name: f.clone(), pos: 0 })?;
                    let arity = sig.funcs()[idx].arity;
                    if arity != args.len() {
                        return Err(ParseError::Arity {
                            name: f.clone(),
                            expected: arity,
                            found: args.len(),
                            pos: 0,
                        });
                    }
                    args.iter().try_for_each(|a| term(a, sig))
                }
            }
        }
        match self {
            Formula::Atomic(p, args) => {
                let idx = sig
                    .pred_index(p)
                    .ok_or_else(|| ParseError::Undeclared { name: p.clone(), pos: 0 })?;
                let arity = sig.preds()[idx].arity;
                if arity != args.len() {
                    return Err(ParseError::Arity {
                        name: p.clone(),
                        expected: arity,
                        found: args.len(),
                        pos: 0,
                    });
                }
                args.iter().try_for_each(|a| term(a, sig))
            }
            Formula::Dist(a, b) => term(a, sig).and_then(|_| term(b, sig)),
            Formula::Zero | Formula::One => Ok(()),
            Formula::DyadicConst(p, q) => {
                if *q >= 63 || *p > (1u64 << q) {
                    Err(ParseError::Syntax { pos: 0, message: format!("bad constant {p}/2^{q}") })
                } else {
                    Ok(())
                }
            }
            Formula::Half(a) | Formula::Neg(a) => a.check(sig),
            Formula::Sup(v, a) | Formula::Inf(v, a) => {
                if !sig.is_variable_name(v) {
                    return Err(ParseError::Syntax {
                        pos: 0,
                        message: format!("`{v}` cannot be bound"),
                    });
                }
                a.check(sig)
            }
            Formula::Monus(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                a.check(sig).and_then(|_| b.check(sig))
            }
        }
    }
}

/// Free variables in first-occurrence order; `sup`/`inf` bind.
pub fn free_vars(f: &Formula) -> Vec<String> {
    fn go(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match f {
            Formula::Atomic(_, args) => args.iter().for_each(|t| t.collect_vars(bound, out)),
            Formula::Dist(a, b) => {
                a.collect_vars(bound, out);
                b.collect_vars(bound, out);
            }
            Formula::Zero | Formula::One | Formula::DyadicConst(..) => {}
            Formula::Half(a) | Formula::Neg(a) => go(a, bound, out),
            Formula::Monus(a, b) | Formula::Min(a, b) | Formula::Max(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::Sup(v, a) | Formula::Inf(v, a) => {
                bound.push(v.clone());
                go(a, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(f, &mut Vec::new(), &mut out);
    out
}

/// Rewrites every derived node into `{0, 1, half, -.}` exactly:
///
/// * `min(a,b) = a -. (a -. b)`
/// * `neg(a) = 1 -. a`
/// * `max(a,b) = 1 -. min(1 -. a, 1 -. b)`
/// * `p/2^q` by binary expansion: `v <= 1/2` halves `2v`, `v > 1/2` is `1 -. (1-v)`.
pub fn normalize_restricted(f: &Formula) -> Formula {
    match f {
        Formula::Atomic(..) | Formula::Dist(..) | Formula::Zero | Formula::One => f.clone(),
        Formula::Half(a) => Formula::half(normalize_restricted(a)),
        Formula::Monus(a, b) => Formula::monus(normalize_restricted(a), normalize_restricted(b)),
        Formula::Sup(v, a) => Formula::sup(v, normalize_restricted(a)),
        Formula::Inf(v, a) => Formula::inf(v, normalize_restricted(a)),
        Formula::Min(a, b) => restricted_min(normalize_restricted(a), normalize_restricted(b)),
        Formula::Neg(a) => Formula::monus(Formula::One, normalize_restricted(a)),
        Formula::Max(a, b) => {
            let na = Formula::monus(Formula::One, normalize_restricted(a));
            let nb = Formula::monus(Formula::One, normalize_restricted(b));
            Formula::monus(Formula::One, restricted_min(na, nb))
        }
        Formula::DyadicConst(p, q) => dyadic_formula(*p, *q),
    }
}

/// `a -. (a -. b)`.
pub fn restricted_min(a: Formula, b: Formula) -> Formula {
    Formula::monus(a.clone(), Formula::monus(a, b))
}

fn dyadic_formula(p: u64, q: u32) -> Formula {
    // value p / 2^q, reduced so q is minimal
    let (mut p, mut q) = (p, q);
    while q > 0 && p % 2 == 0 {
        p /= 2;
        q -= 1;
    }
    if p == 0 {
        return Formula::Zero;
    }
    if q == 0 {
        return Formula::One;
    }
    let den = 1u64 << q;
    if 2 * p <= den {
        Formula::half(dyadic_formula(2 * p, q))
    } else {
        Formula::monus(Formula::One, dyadic_formula(den - p, q))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConnectiveError {
    #[error("value for `{0}` lies outside [0,1]")]
    OutOfRange(String),
    #[error("no value supplied for `{0}`")]
    Missing(String),
    #[error("quantifier in connective-only evaluation")]
    Quantifier,
}

/// Evaluates the connective skeleton of `f`; atomic leaves are looked up in
/// `values`. Derived nodes are evaluated by their defining equations.
pub fn eval_connective_free(
    f: &Formula,
    values: &HashMap<Formula, Rational>,
) -> Result<Rational, ConnectiveError> {
    match f {
        Formula::Atomic(..) | Formula::Dist(..) => {
            let v = values.get(f).ok_or_else(|| ConnectiveError::Missing(f.to_string()))?;
            if !rational::in_unit_interval(v) {
                return Err(ConnectiveError::OutOfRange(f.to_string()));
            }
            Ok(v.clone())
        }
        Formula::Zero => Ok(rational::zero()),
        Formula::One => Ok(rational::one()),
        Formula::DyadicConst(p, q) => Ok(rational::dyadic(*p, *q)),
        Formula::Half(a) => Ok(rational::half(&eval_connective_free(a, values)?)),
        Formula::Neg(a) => Ok(rational::monus(&rational::one(), &eval_connective_free(a, values)?)),
        Formula::Monus(a, b) => {
            let (x, y) = (eval_connective_free(a, values)?, eval_connective_free(b, values)?);
            Ok(rational::monus(&x, &y))
        }
        Formula::Min(a, b) => {
            let (x, y) = (eval_connective_free(a, values)?, eval_connective_free(b, values)?);
            Ok(x.min(y))
        }
        Formula::Max(a, b) => {
            let (x, y) = (eval_connective_free(a, values)?, eval_connective_free(b, values)?);
            Ok(x.max(y))
        }
        Formula::Sup(..) | Formula::Inf(..) => Err(ConnectiveError::Quantifier),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn p(t: Term) -> Formula {
        Formula::atomic("P", vec![t])
    }

    #[test]
    fn min_expands_to_double_monus() {
        let a = p(Term::var("x"));
        let b = Formula::dist(Term::var("x"), Term::constant("c"));
        let n = normalize_restricted(&Formula::min(a.clone(), b.clone()));
        assert_eq!(n, Formula::monus(a.clone(), Formula::monus(a, b)));
    }

    #[test]
    fn dyadic_three_quarters() {
        let n = normalize_restricted(&Formula::DyadicConst(3, 2));
        assert_eq!(
            n,
            Formula::monus(Formula::One, Formula::half(Formula::half(Formula::One)))
        );
    }

    #[test]
    fn dyadic_constants_are_exact() {
        let none = HashMap::new();
        for q in 0..6u32 {
            for p in 0..=(1u64 << q) {
                let n = normalize_restricted(&Formula::DyadicConst(p, q));
                assert!(n.is_restricted());
                assert_eq!(eval_connective_free(&n, &none).unwrap(), rational::dyadic(p, q));
            }
        }
    }

    #[test]
    fn restricted_is_fixed_point() {
        let f = Formula::sup(
            "x",
            Formula::monus(p(Term::var("x")), Formula::half(Formula::One)),
        );
        assert_eq!(normalize_restricted(&f), f);
    }

    #[test]
    fn free_var_order() {
        let f = Formula::sup("x", Formula::dist(Term::var("x"), Term::var("y")));
        assert_eq!(free_vars(&f), vec!["y".to_string()]);
        let g = Formula::atomic("P", vec![Term::var("x"), Term::var("y")]);
        assert_eq!(free_vars(&g), vec!["x".to_string(), "y".to_string()]);
        assert!(free_vars(&Formula::One).is_empty());
    }

    #[test]
    fn connective_semantics() {
        let a = p(Term::constant("c"));
        let b = p(Term::constant("e"));
        let mut values = HashMap::new();
        values.insert(a.clone(), ratio(1, 2));
        values.insert(b.clone(), ratio(3, 4));
        let m = Formula::monus(a.clone(), b.clone());
        assert_eq!(eval_connective_free(&m, &values).unwrap(), rational::zero());
        let m = Formula::monus(b.clone(), a.clone());
        assert_eq!(eval_connective_free(&m, &values).unwrap(), ratio(1, 4));
        let h = Formula::half(Formula::One);
        assert_eq!(eval_connective_free(&h, &values).unwrap(), ratio(1, 2));

        values.insert(a.clone(), ratio(3, 2));
        assert_eq!(
            eval_connective_free(&a, &values),
            Err(ConnectiveError::OutOfRange("P(c)".into()))
        );
    }

    #[test]
    fn signature_rejects_bad_decls() {
        let l = rational::one();
        assert!(matches!(
            Signature::new(vec![SymbolDecl::new("P", 0, l.clone())], vec![], vec![]),
            Err(SignatureError::ZeroArity(_))
        ));
        assert!(matches!(
            Signature::new(vec![SymbolDecl::new("P", 1, rational::zero())], vec![], vec![]),
            Err(SignatureError::NonPositiveLipschitz(_))
        ));
        assert!(matches!(
            Signature::new(vec![SymbolDecl::new("P", 1, l)], vec![], vec!["P".into()]),
            Err(SignatureError::DuplicateName(_))
        ));
        assert!(matches!(
            Signature::new(vec![], vec![], vec!["sup".into()]),
            Err(SignatureError::Reserved(_))
        ));
    }

    #[test]
    fn signature_json() {
        let text = r#"{"preds":[{"name":"P","arity":1,"lipschitz":"3/2"}],
                       "funcs":[{"name":"f","arity":2,"lipschitz":2}],
                       "consts":["c"]}"#;
        let sig: Signature = serde_json::from_str(text).unwrap();
        assert_eq!(sig.preds()[0].lipschitz, ratio(3, 2));
        assert_eq!(sig.funcs()[0].lipschitz, rational::int(2));
        let back: Signature = serde_json::from_str(&serde_json::to_string(&sig).unwrap()).unwrap();
        assert_eq!(back, sig);
    }
}
