//! Feferman–Vaught translation for continuous logic over finite metric
//! structures and their reduced products.

pub mod boolean;
pub mod harness;
pub mod io;
pub mod rational;
pub mod reduced;
pub mod structures;
pub mod syntax;
pub mod translate;

pub use rational::Rational;
pub use syntax::{free_vars, normalize_restricted, parse, Formula, Signature, SymbolDecl, Term};
