//! Shared property checks, used by the property suite and the acceptance run.
#![allow(dead_code)]

pub mod props;

use symword::{Permutation, Rational};

/// Exact rational as f64.
pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn p(text: &str, n: usize) -> Permutation {
    Permutation::parse(text, n).unwrap()
}
