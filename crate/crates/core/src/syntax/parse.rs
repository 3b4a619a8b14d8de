//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! F    := U ("-." U)*                       left associative
//! U    := "sup" v "." F | "inf" v "." F | A   quantifier bodies extend right
//! A    := "0" | "1" | "(" F ")" | "half(" F ")" | "neg(" F ")"
//!       | "min(" F "," F ")" | "max(" F "," F ")" | "const(" p "/2^" q ")"
//!       | "d(" T "," T ")" | P "(" T ("," T)* ")"
//! T    := c | v | f "(" T ("," T)* ")"
//! ```

use thiserror::Error;

use super::{Formula, Signature, Term, RESERVED};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("undeclared symbol `{name}` at byte {pos}")]
    Undeclared { name: String, pos: usize },
    #[error("`{name}` expects {expected} argument(s), found {found} (byte {pos})")]
    Arity { name: String, expected: usize, found: usize, pos: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    Comma,
    Dot,
    Monus,
    Slash,
    Caret,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b',' => out.push((Tok::Comma, start)),
            b'.' => out.push((Tok::Dot, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'-' if bytes.get(i + 1) == Some(&b'.') => {
                out.push((Tok::Monus, start));
                i += 2;
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = text[start..i].parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    message: "number too large".into(),
                })?;
                out.push((Tok::Num(n), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    pos: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    sig: &'a Signature,
}

/// Parses `text` against `sig`. Bare identifiers are constants when declared
/// as such and variables otherwise.
pub fn parse(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0, sig };
    let f = p.formula()?;
    match p.peek() {
        Tok::End => Ok(f),
        t => Err(p.error(format!("unexpected {t:?} after formula"))),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn error(&self, message: String) -> ParseError {
        ParseError::Syntax { pos: self.pos(), message }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {want:?}, found {:?}", self.peek())))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let (mut lhs, mut open) = self.unary()?;
        // an unparenthesized quantifier has already consumed everything to its right
        while !open && *self.peek() == Tok::Monus {
            self.bump();
            let (rhs, rhs_open) = self.unary()?;
            lhs = Formula::monus(lhs, rhs);
            open = rhs_open;
        }
        Ok(lhs)
    }

    /// The flag is set when the result is an unparenthesized quantifier.
    fn unary(&mut self) -> Result<(Formula, bool), ParseError> {
        if let Tok::Ident(w) = self.peek() {
            if w == "sup" || w == "inf" {
                let is_sup = w == "sup";
                self.bump();
                let pos = self.pos();
                let v = match self.bump() {
                    Tok::Ident(v) => v,
                    t => {
                        return Err(ParseError::Syntax {
                            pos,
                            message: format!("expected variable, found {t:?}"),
                        })
                    }
                };
                if !self.sig.is_variable_name(&v) {
                    return Err(ParseError::Syntax { pos, message: format!("`{v}` cannot be bound") });
                }
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                let f = if is_sup { Formula::sup(&v, body) } else { Formula::inf(&v, body) };
                return Ok((f, true));
            }
        }
        Ok((self.atom()?, false))
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(0) => Ok(Formula::Zero),
            Tok::Num(1) => Ok(Formula::One),
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(w) => self.keyword_or_atomic(w, pos),
            t => Err(ParseError::Syntax { pos, message: format!("expected formula, found {t:?}") }),
        }
    }

    fn keyword_or_atomic(&mut self, w: String, pos: usize) -> Result<Formula, ParseError> {
        match w.as_str() {
            "half" | "neg" => {
                self.expect(Tok::LParen)?;
                let a = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(if w == "half" { Formula::half(a) } else { Formula::neg(a) })
            }
            "min" | "max" => {
                self.expect(Tok::LParen)?;
                let a = self.formula()?;
                self.expect(Tok::Comma)?;
                let b = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(if w == "min" { Formula::min(a, b) } else { Formula::max(a, b) })
            }
            "const" => self.dyadic(),
            "d" => {
                let args = self.term_args()?;
                if args.len() != 2 {
                    return Err(ParseError::Arity { name: w, expected: 2, found: args.len(), pos });
                }
                let mut it = args.into_iter();
                Ok(Formula::Dist(it.next().unwrap(), it.next().unwrap()))
            }
            "sup" | "inf" => Err(ParseError::Syntax {
                pos,
                message: "quantifier must be parenthesized here".into(),
            }),
            _ => {
                let Some(idx) = self.sig.pred_index(&w) else {
                    return Err(ParseError::Undeclared { name: w, pos });
                };
                let args = self.term_args()?;
                let expected = self.sig.preds()[idx].arity;
                if args.len() != expected {
                    return Err(ParseError::Arity { name: w, expected, found: args.len(), pos });
                }
                Ok(Formula::Atomic(w, args))
            }
        }
    }

    fn dyadic(&mut self) -> Result<Formula, ParseError> {
        self.expect(Tok::LParen)?;
        let pos = self.pos();
        let Tok::Num(p) = self.bump() else {
            return Err(ParseError::Syntax { pos, message: "expected numerator".into() });
        };
        self.expect(Tok::Slash)?;
        let two = self.pos();
        if self.bump() != Tok::Num(2) {
            return Err(ParseError::Syntax { pos: two, message: "denominator must be 2^q".into() });
        }
        self.expect(Tok::Caret)?;
        let qpos = self.pos();
        let Tok::Num(q) = self.bump() else {
            return Err(ParseError::Syntax { pos: qpos, message: "expected exponent".into() });
        };
        if q >= 63 || p > (1u64 << q) {
            return Err(ParseError::Syntax { pos, message: format!("constant {p}/2^{q} outside [0,1]") });
        }
        self.expect(Tok::RParen)?;
        Ok(Formula::DyadicConst(p, q as u32))
    }

    fn term_args(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let pos = self.pos();
        let name = match self.bump() {
            Tok::Ident(w) => w,
            t => return Err(ParseError::Syntax { pos, message: format!("expected term, found {t:?}") }),
        };
        if *self.peek() == Tok::LParen {
            let Some(idx) = self.sig.func_index(&name) else {
                return Err(ParseError::Undeclared { name, pos });
            };
            let args = self.term_args()?;
            let expected = self.sig.funcs()[idx].arity;
            if args.len() != expected {
                return Err(ParseError::Arity { name, expected, found: args.len(), pos });
            }
            return Ok(Term::App(name, args));
        }
        if self.sig.const_index(&name).is_some() {
            return Ok(Term::Const(name));
        }
        if RESERVED.contains(&name.as_str())
            || self.sig.pred_index(&name).is_some()
            || self.sig.func_index(&name).is_some()
        {
            return Err(ParseError::Syntax { pos, message: format!("`{name}` is not a term") });
        }
        Ok(Term::Var(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, one};
    use crate::syntax::SymbolDecl;

    fn sig() -> Signature {
        Signature::new(
            vec![SymbolDecl::new("P", 1, one()), SymbolDecl::new("R", 2, one())],
            vec![SymbolDecl::new("f", 2, int(2))],
            vec!["c".into()],
        )
        .unwrap()
    }

    #[test]
    fn grammar_examples() {
        let s = sig();
        let x = Term::var("x");
        assert_eq!(
            parse("sup x . P(x)", &s).unwrap(),
            Formula::sup("x", Formula::atomic("P", vec![x.clone()]))
        );
        assert_eq!(
            parse("P(c) -. half(1)", &s).unwrap(),
            Formula::monus(
                Formula::atomic("P", vec![Term::constant("c")]),
                Formula::half(Formula::One)
            )
        );
        assert_eq!(
            parse("min(P(x), d(x,c))", &s).unwrap(),
            Formula::min(
                Formula::atomic("P", vec![x.clone()]),
                Formula::dist(x, Term::constant("c"))
            )
        );
    }

    #[test]
    fn monus_is_left_associative() {
        let s = sig();
        let f = parse("1 -. 0 -. 1", &s).unwrap();
        assert_eq!(
            f,
            Formula::monus(Formula::monus(Formula::One, Formula::Zero), Formula::One)
        );
    }

    #[test]
    fn quantifier_body_extends_right() {
        let s = sig();
        let f = parse("sup x . P(x) -. P(c)", &s).unwrap();
        assert!(matches!(f, Formula::Sup(..)));
        let g = parse("P(c) -. sup x . P(x) -. P(c)", &s).unwrap();
        let Formula::Monus(_, rhs) = g else { panic!() };
        assert!(matches!(*rhs, Formula::Sup(..)));
    }

    #[test]
    fn errors_carry_positions() {
        let s = sig();
        assert_eq!(
            parse("Q(c)", &s),
            Err(ParseError::Undeclared { name: "Q".into(), pos: 0 })
        );
        assert_eq!(
            parse("P(c, c)", &s),
            Err(ParseError::Arity { name: "P".into(), expected: 1, found: 2, pos: 0 })
        );
        assert_eq!(
            parse("half(P(f(c)))", &s),
            Err(ParseError::Arity { name: "f".into(), expected: 2, found: 1, pos: 7 })
        );
        assert!(matches!(parse("P(c) -.", &s), Err(ParseError::Syntax { pos: 7, .. })));
        assert!(matches!(parse("P(c) $", &s), Err(ParseError::Syntax { pos: 5, .. })));
        assert!(matches!(parse("const(5/2^2)", &s), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn dyadic_literal() {
        let s = sig();
        assert_eq!(parse("const(3/2^2)", &s).unwrap(), Formula::DyadicConst(3, 2));
    }
}
