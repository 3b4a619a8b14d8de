//! First-order formulas in the language of Boolean algebras.
//!
//! Free variables are `y[j][i]`; bound variables are `z[k][i]`. Text form is
//! prefix notation, e.g. `(and (ne0 y[0][1]) (le y[0][2] (compl y[1][0])))`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BVar {
    Y { j: usize, i: usize },
    Z { k: usize, i: usize },
}

impl fmt::Display for BVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BVar::Y { j, i } => write!(f, "y[{j}][{i}]"),
            BVar::Z { k, i } => write!(f, "z[{k}][{i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BTerm {
    Var(BVar),
    Zero,
    One,
    Meet(Box<BTerm>, Box<BTerm>),
    Join(Box<BTerm>, Box<BTerm>),
    Compl(Box<BTerm>),
}

impl BTerm {
    pub fn y(j: usize, i: usize) -> BTerm {
        BTerm::Var(BVar::Y { j, i })
    }

    pub fn z(k: usize, i: usize) -> BTerm {
        BTerm::Var(BVar::Z { k, i })
    }

    pub fn meet(a: BTerm, b: BTerm) -> BTerm {
        BTerm::Meet(Box::new(a), Box::new(b))
    }

    pub fn join(a: BTerm, b: BTerm) -> BTerm {
        BTerm::Join(Box::new(a), Box::new(b))
    }

    pub fn compl(a: BTerm) -> BTerm {
        BTerm::Compl(Box::new(a))
    }

    /// Left-nested meet of a non-empty list.
    pub fn meet_all(terms: impl IntoIterator<Item = BTerm>) -> BTerm {
        let mut it = terms.into_iter();
        let first = it.next().expect("meet of at least one term");
        it.fold(first, BTerm::meet)
    }

    fn subst(&self, f: &dyn Fn(BVar) -> Option<BTerm>) -> BTerm {
        match self {
            BTerm::Var(v) => f(*v).unwrap_or(BTerm::Var(*v)),
            BTerm::Zero | BTerm::One => self.clone(),
            BTerm::Meet(a, b) => BTerm::meet(a.subst(f), b.subst(f)),
            BTerm::Join(a, b) => BTerm::join(a.subst(f), b.subst(f)),
            BTerm::Compl(a) => BTerm::compl(a.subst(f)),
        }
    }

    fn vars(&self, out: &mut BTreeSet<BVar>) {
        match self {
            BTerm::Var(v) => {
                out.insert(*v);
            }
            BTerm::Zero | BTerm::One => {}
            BTerm::Meet(a, b) | BTerm::Join(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            BTerm::Compl(a) => a.vars(out),
        }
    }
}

impl fmt::Display for BTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BTerm::Var(v) => write!(f, "{v}"),
            BTerm::Zero => f.write_str("0"),
            BTerm::One => f.write_str("1"),
            BTerm::Meet(a, b) => write!(f, "(meet {a} {b})"),
            BTerm::Join(a, b) => write!(f, "(join {a} {b})"),
            BTerm::Compl(a) => write!(f, "(compl {a})"),
        }
    }
}

/// `∃` over several blocks of variables, restricted by upper bounds on
/// meets within a block.
///
/// Reads as `∃ groups [ ⋀ (⋀_{j∈A} groups[g][j] ≤ bound) ∧ body ]`.
/// Every bound is a meet inside a single block, so the constraints are
/// decided atom by atom of the algebra; the evaluator exploits that.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundedExists {
    pub groups: Vec<Vec<BVar>>,
    /// `(g, A, t)`: the meet of `groups[g][j]` for `j` in bitmask `A` is `≤ t`.
    pub bounds: Vec<(usize, u32, BTerm)>,
    pub body: BoolFormula,
    /// Set when `body` is known to be monotone in the bound variables; lets
    /// the evaluator search maximal witnesses only.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoolFormula {
    Eq(BTerm, BTerm),
    Le(BTerm, BTerm),
    Ne0(BTerm),
    And(Vec<BoolFormula>),
    Or(Vec<BoolFormula>),
    Not(Box<BoolFormula>),
    Implies(Box<BoolFormula>, Box<BoolFormula>),
    Exists(BVar, Box<BoolFormula>),
    Forall(BVar, Box<BoolFormula>),
    Bounded(Box<BoundedExists>),
}

impl BoolFormula {
    /// `1 = 1`.
    pub fn truth() -> BoolFormula {
        BoolFormula::Eq(BTerm::One, BTerm::One)
    }

    /// `1 ≠ 1`.
    pub fn falsity() -> BoolFormula {
        BoolFormula::Not(Box::new(BoolFormula::truth()))
    }

    pub fn is_falsity(&self) -> bool {
        *self == BoolFormula::falsity()
    }

    pub fn not(f: BoolFormula) -> BoolFormula {
        BoolFormula::Not(Box::new(f))
    }

    pub fn exists(v: BVar, f: BoolFormula) -> BoolFormula {
        BoolFormula::Exists(v, Box::new(f))
    }

    pub fn forall(v: BVar, f: BoolFormula) -> BoolFormula {
        BoolFormula::Forall(v, Box::new(f))
    }

    pub fn implies(a: BoolFormula, b: BoolFormula) -> BoolFormula {
        BoolFormula::Implies(Box::new(a), Box::new(b))
    }

    /// Replaces free variables; `f` returns `None` to keep a variable.
    /// Bound variables are never passed to `f`.
    pub fn subst(&self, f: &dyn Fn(BVar) -> Option<BTerm>) -> BoolFormula {
        self.subst_scoped(f, &mut Vec::new())
    }

    fn subst_scoped(&self, f: &dyn Fn(BVar) -> Option<BTerm>, bound: &mut Vec<BVar>) -> BoolFormula {
        let snapshot = bound.clone();
        let g = move |v: BVar| if snapshot.contains(&v) { None } else { f(v) };
        match self {
            BoolFormula::Eq(a, b) => BoolFormula::Eq(a.subst(&g), b.subst(&g)),
            BoolFormula::Le(a, b) => BoolFormula::Le(a.subst(&g), b.subst(&g)),
            BoolFormula::Ne0(a) => BoolFormula::Ne0(a.subst(&g)),
            BoolFormula::And(xs) => {
                BoolFormula::And(xs.iter().map(|x| x.subst_scoped(f, bound)).collect())
            }
            BoolFormula::Or(xs) => {
                BoolFormula::Or(xs.iter().map(|x| x.subst_scoped(f, bound)).collect())
            }
            BoolFormula::Not(a) => BoolFormula::not(a.subst_scoped(f, bound)),
            BoolFormula::Implies(a, b) => {
                BoolFormula::implies(a.subst_scoped(f, bound), b.subst_scoped(f, bound))
            }
            BoolFormula::Exists(v, a) | BoolFormula::Forall(v, a) => {
                bound.push(*v);
                let body = a.subst_scoped(f, bound);
                bound.pop();
                if matches!(self, BoolFormula::Exists(..)) {
                    BoolFormula::exists(*v, body)
                } else {
                    BoolFormula::forall(*v, body)
                }
            }
            BoolFormula::Bounded(b) => {
                // bounds see only the outer scope
                let bounds = b.bounds.iter().map(|(grp, a, t)| (*grp, *a, t.subst(&g))).collect();
                let n = bound.len();
                bound.extend(b.groups.iter().flatten().copied());
                let body = b.body.subst_scoped(f, bound);
                bound.truncate(n);
                BoolFormula::Bounded(Box::new(BoundedExists {
                    groups: b.groups.clone(),
                    bounds,
                    body,
                    monotone: b.monotone,
                }))
            }
        }
    }

    /// Free variables in sorted order.
    pub fn free_vars(&self) -> Vec<BVar> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out.into_iter().collect()
    }

    fn collect_free(&self, bound: &mut Vec<BVar>, out: &mut BTreeSet<BVar>) {
        fn add_term(t: &BTerm, bound: &[BVar], out: &mut BTreeSet<BVar>) {
            let mut vs = BTreeSet::new();
            t.vars(&mut vs);
            out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
        }
        match self {
            BoolFormula::Eq(a, b) | BoolFormula::Le(a, b) => {
                add_term(a, bound, out);
                add_term(b, bound, out);
            }
            BoolFormula::Ne0(a) => add_term(a, bound, out),
            BoolFormula::And(xs) | BoolFormula::Or(xs) => {
                xs.iter().for_each(|x| x.collect_free(bound, out))
            }
            BoolFormula::Not(a) => a.collect_free(bound, out),
            BoolFormula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            BoolFormula::Exists(v, a) | BoolFormula::Forall(v, a) => {
                bound.push(*v);
                a.collect_free(bound, out);
                bound.pop();
            }
            BoolFormula::Bounded(b) => {
                for (_, _, t) in &b.bounds {
                    add_term(t, bound, out);
                }
                let n = bound.len();
                bound.extend(b.groups.iter().flatten().copied());
                b.body.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// Largest `k` of any `z[k][i]` anywhere in the formula.
    pub fn max_z(&self) -> Option<usize> {
        fn term(t: &BTerm, best: &mut Option<usize>) {
            let mut vs = BTreeSet::new();
            t.vars(&mut vs);
            for v in vs {
                if let BVar::Z { k, .. } = v {
                    *best = Some(best.map_or(k, |b| b.max(k)));
                }
            }
        }
        fn go(f: &BoolFormula, best: &mut Option<usize>) {
            match f {
                BoolFormula::Eq(a, b) | BoolFormula::Le(a, b) => {
                    term(a, best);
                    term(b, best);
                }
                BoolFormula::Ne0(a) => term(a, best),
                BoolFormula::And(xs) | BoolFormula::Or(xs) => xs.iter().for_each(|x| go(x, best)),
                BoolFormula::Not(a) => go(a, best),
                BoolFormula::Implies(a, b) => {
                    go(a, best);
                    go(b, best);
                }
                BoolFormula::Exists(v, a) | BoolFormula::Forall(v, a) => {
                    term(&BTerm::Var(*v), best);
                    go(a, best);
                }
                BoolFormula::Bounded(b) => {
                    for v in b.groups.iter().flatten() {
                        term(&BTerm::Var(*v), best);
                    }
                    for (_, _, t) in &b.bounds {
                        term(t, best);
                    }
                    go(&b.body, best);
                }
            }
        }
        let mut best = None;
        go(self, &mut best);
        best
    }

    /// Rewrites every bounded block as plain nested `∃` over a conjunction.
    pub fn expand(&self) -> BoolFormula {
        match self {
            BoolFormula::Eq(..) | BoolFormula::Le(..) | BoolFormula::Ne0(..) => self.clone(),
            BoolFormula::And(xs) => BoolFormula::And(xs.iter().map(|x| x.expand()).collect()),
            BoolFormula::Or(xs) => BoolFormula::Or(xs.iter().map(|x| x.expand()).collect()),
            BoolFormula::Not(a) => BoolFormula::not(a.expand()),
            BoolFormula::Implies(a, b) => BoolFormula::implies(a.expand(), b.expand()),
            BoolFormula::Exists(v, a) => BoolFormula::exists(*v, a.expand()),
            BoolFormula::Forall(v, a) => BoolFormula::forall(*v, a.expand()),
            BoolFormula::Bounded(b) => {
                let mut conj: Vec<BoolFormula> = b
                    .bounds
                    .iter()
                    .map(|(g, a, t)| {
                        let members = (0..32)
                            .filter(|j| a >> j & 1 == 1)
                            .map(|j| BTerm::Var(b.groups[*g][j]));
                        BoolFormula::Le(BTerm::meet_all(members), t.clone())
                    })
                    .collect();
                conj.push(b.body.expand());
                let mut out = BoolFormula::And(conj);
                for v in b.groups.iter().flatten().rev() {
                    out = BoolFormula::exists(*v, out);
                }
                out
            }
        }
    }

    /// Number of atomic subformulas outside bounded-block guards.
    pub fn atom_count(&self) -> usize {
        match self {
            BoolFormula::Eq(..) | BoolFormula::Le(..) | BoolFormula::Ne0(..) => 1,
            BoolFormula::And(xs) | BoolFormula::Or(xs) => xs.iter().map(|x| x.atom_count()).sum(),
            BoolFormula::Not(a) | BoolFormula::Exists(_, a) | BoolFormula::Forall(_, a) => {
                a.atom_count()
            }
            BoolFormula::Implies(a, b) => a.atom_count() + b.atom_count(),
            BoolFormula::Bounded(b) => b.body.atom_count(),
        }
    }

    /// Replaces the `index`-th atom (in [`BoolFormula::atom_count`] order) by
    /// its flip: `t ≠ 0` becomes `t = 0`, `=` becomes `≠`, `≤` becomes `≰`.
    /// Bounded blocks containing the flipped atom lose their monotone flag.
    pub fn flip_atom(&self, index: usize) -> BoolFormula {
        let mut counter = Some(index);
        self.flip_rec(&mut counter).0
    }

    fn flip_rec(&self, counter: &mut Option<usize>) -> (BoolFormula, bool) {
        match self {
            BoolFormula::Eq(a, b) | BoolFormula::Le(a, b) => match counter {
                Some(0) => {
                    *counter = None;
                    let same = if matches!(self, BoolFormula::Eq(..)) {
                        BoolFormula::Eq(a.clone(), b.clone())
                    } else {
                        BoolFormula::Le(a.clone(), b.clone())
                    };
                    (BoolFormula::not(same), true)
                }
                Some(k) => {
                    *k -= 1;
                    (self.clone(), false)
                }
                None => (self.clone(), false),
            },
            BoolFormula::Ne0(a) => match counter {
                Some(0) => {
                    *counter = None;
                    (BoolFormula::Eq(a.clone(), BTerm::Zero), true)
                }
                Some(k) => {
                    *k -= 1;
                    (self.clone(), false)
                }
                None => (self.clone(), false),
            },
            BoolFormula::And(xs) | BoolFormula::Or(xs) => {
                let mut hit = false;
                let ys = xs
                    .iter()
                    .map(|x| {
                        let (y, h) = x.flip_rec(counter);
                        hit |= h;
                        y
                    })
                    .collect();
                let out = if matches!(self, BoolFormula::And(_)) {
                    BoolFormula::And(ys)
                } else {
                    BoolFormula::Or(ys)
                };
                (out, hit)
            }
            BoolFormula::Not(a) => {
                let (y, h) = a.flip_rec(counter);
                (BoolFormula::not(y), h)
            }
            BoolFormula::Implies(a, b) => {
                let (x, h1) = a.flip_rec(counter);
                let (y, h2) = b.flip_rec(counter);
                (BoolFormula::implies(x, y), h1 || h2)
            }
            BoolFormula::Exists(v, a) => {
                let (y, h) = a.flip_rec(counter);
                (BoolFormula::exists(*v, y), h)
            }
            BoolFormula::Forall(v, a) => {
                let (y, h) = a.flip_rec(counter);
                (BoolFormula::forall(*v, y), h)
            }
            BoolFormula::Bounded(b) => {
                let (body, h) = b.body.flip_rec(counter);
                let out = BoundedExists {
                    groups: b.groups.clone(),
                    bounds: b.bounds.clone(),
                    body,
                    monotone: b.monotone && !h,
                };
                (BoolFormula::Bounded(Box::new(out)), h)
            }
        }
    }

    pub fn parse(text: &str) -> Result<BoolFormula, BoolParseError> {
        let toks = tokenize(text);
        let mut at = 0;
        let f = parse_formula(&toks, &mut at)?;
        if at != toks.len() {
            return Err(BoolParseError(format!("trailing input at token {at}")));
        }
        Ok(f)
    }
}

impl fmt::Display for BoolFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, xs: &[BoolFormula]| {
            write!(f, "({head}")?;
            for x in xs {
                write!(f, " {x}")?;
            }
            f.write_str(")")
        };
        match self {
            BoolFormula::Eq(a, b) => write!(f, "(eq {a} {b})"),
            BoolFormula::Le(a, b) => write!(f, "(le {a} {b})"),
            BoolFormula::Ne0(a) => write!(f, "(ne0 {a})"),
            BoolFormula::And(xs) => list(f, "and", xs),
            BoolFormula::Or(xs) => list(f, "or", xs),
            BoolFormula::Not(a) => write!(f, "(not {a})"),
            BoolFormula::Implies(a, b) => write!(f, "(implies {a} {b})"),
            BoolFormula::Exists(v, a) => write!(f, "(exists {v} {a})"),
            BoolFormula::Forall(v, a) => write!(f, "(forall {v} {a})"),
            BoolFormula::Bounded(b) => {
                f.write_str(if b.monotone { "(bexists (" } else { "(bexists! (" })?;
                for (g, vs) in b.groups.iter().enumerate() {
                    if g > 0 {
                        f.write_str(" ")?;
                    }
                    f.write_str("(")?;
                    for (k, v) in vs.iter().enumerate() {
                        if k > 0 {
                            f.write_str(" ")?;
                        }
                        write!(f, "{v}")?;
                    }
                    f.write_str(")")?;
                }
                f.write_str(") (")?;
                for (k, (g, a, t)) in b.bounds.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({g} {a} {t})")?;
                }
                write!(f, ") {})", b.body)
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed Boolean formula: {0}")]
pub struct BoolParseError(pub String);

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn next<'a>(toks: &'a [String], at: &mut usize) -> Result<&'a str, BoolParseError> {
    let t = toks.get(*at).ok_or_else(|| BoolParseError("unexpected end".into()))?;
    *at += 1;
    Ok(t)
}

fn expect(toks: &[String], at: &mut usize, want: &str) -> Result<(), BoolParseError> {
    let t = next(toks, at)?;
    if t == want {
        Ok(())
    } else {
        Err(BoolParseError(format!("expected `{want}`, found `{t}`")))
    }
}

fn parse_var(t: &str) -> Result<BVar, BoolParseError> {
    let err = || BoolParseError(format!("bad variable `{t}`"));
    let (head, rest) = t.split_at(1);
    let rest = rest.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(err)?;
    let (a, b) = rest.split_once("][").ok_or_else(err)?;
    let a: usize = a.parse().map_err(|_| err())?;
    let b: usize = b.parse().map_err(|_| err())?;
    match head {
        "y" => Ok(BVar::Y { j: a, i: b }),
        "z" => Ok(BVar::Z { k: a, i: b }),
        _ => Err(err()),
    }
}

fn parse_term(toks: &[String], at: &mut usize) -> Result<BTerm, BoolParseError> {
    let t = next(toks, at)?;
    match t {
        "0" => Ok(BTerm::Zero),
        "1" => Ok(BTerm::One),
        "(" => {
            let head = next(toks, at)?;
            let out = match head {
                "meet" | "join" => {
                    let a = parse_term(toks, at)?;
                    let b = parse_term(toks, at)?;
                    if head == "meet" {
                        BTerm::meet(a, b)
                    } else {
                        BTerm::join(a, b)
                    }
                }
                "compl" => BTerm::compl(parse_term(toks, at)?),
                h => return Err(BoolParseError(format!("unknown term operator `{h}`"))),
            };
            expect(toks, at, ")")?;
            Ok(out)
        }
        v => Ok(BTerm::Var(parse_var(v)?)),
    }
}

fn parse_formula(toks: &[String], at: &mut usize) -> Result<BoolFormula, BoolParseError> {
    expect(toks, at, "(")?;
    let head = next(toks, at)?;
    let out = match head {
        "eq" => BoolFormula::Eq(parse_term(toks, at)?, parse_term(toks, at)?),
        "le" => BoolFormula::Le(parse_term(toks, at)?, parse_term(toks, at)?),
        "ne0" => BoolFormula::Ne0(parse_term(toks, at)?),
        "and" | "or" => {
            let mut xs = Vec::new();
            while toks.get(*at).map(String::as_str) == Some("(") {
                xs.push(parse_formula(toks, at)?);
            }
            if head == "and" {
                BoolFormula::And(xs)
            } else {
                BoolFormula::Or(xs)
            }
        }
        "not" => BoolFormula::not(parse_formula(toks, at)?),
        "implies" => BoolFormula::implies(parse_formula(toks, at)?, parse_formula(toks, at)?),
        "exists" | "forall" => {
            let v = parse_var(next(toks, at)?)?;
            let body = parse_formula(toks, at)?;
            if head == "exists" {
                BoolFormula::exists(v, body)
            } else {
                BoolFormula::forall(v, body)
            }
        }
        "bexists" | "bexists!" => {
            expect(toks, at, "(")?;
            let mut groups = Vec::new();
            while toks.get(*at).map(String::as_str) == Some("(") {
                *at += 1;
                let mut vs = Vec::new();
                while toks.get(*at).map(String::as_str) != Some(")") {
                    vs.push(parse_var(next(toks, at)?)?);
                }
                *at += 1;
                groups.push(vs);
            }
            expect(toks, at, ")")?;
            expect(toks, at, "(")?;
            let mut bounds = Vec::new();
            while toks.get(*at).map(String::as_str) == Some("(") {
                *at += 1;
                let num = |s: &str| s.parse::<u32>().map_err(|_| BoolParseError(format!("bad index `{s}`")));
                let g = num(next(toks, at)?)? as usize;
                let a = num(next(toks, at)?)?;
                let t = parse_term(toks, at)?;
                expect(toks, at, ")")?;
                bounds.push((g, a, t));
            }
            expect(toks, at, ")")?;
            let body = parse_formula(toks, at)?;
            BoolFormula::Bounded(Box::new(BoundedExists {
                groups,
                bounds,
                body,
                monotone: head == "bexists",
            }))
        }
        h => return Err(BoolParseError(format!("unknown connective `{h}`"))),
    };
    expect(toks, at, ")")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let f = BoolFormula::And(vec![
            BoolFormula::Ne0(BTerm::y(0, 1)),
            BoolFormula::not(BoolFormula::Le(BTerm::compl(BTerm::y(1, 2)), BTerm::One)),
            BoolFormula::exists(
                BVar::Z { k: 0, i: 0 },
                BoolFormula::Eq(BTerm::meet(BTerm::z(0, 0), BTerm::y(0, 0)), BTerm::Zero),
            ),
            BoolFormula::Bounded(Box::new(BoundedExists {
                groups: vec![vec![BVar::Z { k: 3, i: 0 }, BVar::Z { k: 4, i: 0 }]],
                bounds: vec![(0, 3, BTerm::y(2, 0))],
                body: BoolFormula::Ne0(BTerm::z(3, 0)),
                monotone: true,
            })),
        ]);
        let text = f.to_string();
        assert_eq!(BoolFormula::parse(&text).unwrap(), f);
    }

    #[test]
    fn substitution_respects_binders() {
        let z = BVar::Z { k: 0, i: 0 };
        let f = BoolFormula::And(vec![
            BoolFormula::Ne0(BTerm::Var(z)),
            BoolFormula::exists(z, BoolFormula::Le(BTerm::Var(z), BTerm::y(0, 0))),
        ]);
        let g = f.subst(&|v| match v {
            BVar::Z { .. } => Some(BTerm::One),
            BVar::Y { .. } => Some(BTerm::Zero),
        });
        assert_eq!(
            g,
            BoolFormula::And(vec![
                BoolFormula::Ne0(BTerm::One),
                BoolFormula::exists(z, BoolFormula::Le(BTerm::Var(z), BTerm::Zero)),
            ])
        );
        assert_eq!(f.free_vars(), vec![BVar::Y { j: 0, i: 0 }, z]);
    }

    #[test]
    fn flips_count_atoms_in_order() {
        let f = BoolFormula::Or(vec![
            BoolFormula::Ne0(BTerm::y(0, 0)),
            BoolFormula::Eq(BTerm::y(0, 1), BTerm::One),
        ]);
        assert_eq!(f.atom_count(), 2);
        assert_eq!(
            f.flip_atom(0),
            BoolFormula::Or(vec![
                BoolFormula::Eq(BTerm::y(0, 0), BTerm::Zero),
                BoolFormula::Eq(BTerm::y(0, 1), BTerm::One),
            ])
        );
        assert_eq!(
            f.flip_atom(1),
            BoolFormula::Or(vec![
                BoolFormula::Ne0(BTerm::y(0, 0)),
                BoolFormula::not(BoolFormula::Eq(BTerm::y(0, 1), BTerm::One)),
            ])
        );
    }
}
