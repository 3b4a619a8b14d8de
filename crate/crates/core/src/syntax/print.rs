//! Concrete-syntax printer; the inverse of [`super::parse`].

use std::fmt;

use super::{Formula, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn is_quantifier(f: &Formula) -> bool {
    matches!(f, Formula::Sup(..) | Formula::Inf(..))
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atomic(p, args) => write!(f, "{}", Term::App(p.clone(), args.clone())),
            Formula::Dist(a, b) => write!(f, "d({a},{b})"),
            Formula::Zero => f.write_str("0"),
            Formula::One => f.write_str("1"),
            Formula::Half(a) => write!(f, "half({a})"),
            Formula::Neg(a) => write!(f, "neg({a})"),
            Formula::Min(a, b) => write!(f, "min({a}, {b})"),
            Formula::Max(a, b) => write!(f, "max({a}, {b})"),
            Formula::DyadicConst(p, q) => write!(f, "const({p}/2^{q})"),
            Formula::Sup(v, a) => write!(f, "sup {v} . {a}"),
            Formula::Inf(v, a) => write!(f, "inf {v} . {a}"),
            Formula::Monus(a, b) => {
                if is_quantifier(a) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                f.write_str(" -. ")?;
                if is_quantifier(b) || matches!(**b, Formula::Monus(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}
