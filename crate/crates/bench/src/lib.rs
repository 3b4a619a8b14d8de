//! Shared fixtures for the criterion benches.

use fv_core::harness::{default_signature, random_family};
use fv_core::reduced::Family;
use fv_core::{parse, Formula};

/// A sentence over the default signature (`P/1`, `f/2`, `c`).
pub fn sentence(text: &str) -> Formula {
    parse(text, &default_signature()).expect("bench sentences parse")
}

/// Random family with at most 3 coordinates of at most 3 elements.
pub fn family(seed: u64) -> Family {
    random_family(&default_signature(), 3, 3, seed)
}
