//! Experiments on word tuples: sofic approximation of the free group and simultaneous
//! asymptotic equidistribution.

use serde::{Deserialize, Serialize};

use crate::eval::{self, Distribution, Pushforward};
use crate::perm;
use crate::rng::SeedPlan;
use crate::transport::{self, Ground};
use crate::word::{stallings_rank, FreeWord, Word};
use crate::{Error, Result};

/// Largest `(n!)^d` for which the exact product-uniform measure is built: `n ≤ 4` at `d = 2`,
/// `n ≤ 3` at `d = 3`.
pub const EXACT_PRODUCT_LIMIT: u128 = 576;

/// Default battery length: reduced test words of length at most this, up to inversion.
pub const DEFAULT_BATTERY_LENGTH: usize = 4;

/// A tuple of constant-free words in a common rank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleExperiment {
    pub words: Vec<FreeWord>,
    pub rank: usize,
}

impl TupleExperiment {
    pub fn new(words: Vec<FreeWord>) -> Result<Self> {
        let Some(first) = words.first() else {
            return Err(Error::invalid("need at least one word"));
        };
        let rank = first.rank();
        if let Some(w) = words.iter().find(|w| w.rank() != rank) {
            return Err(Error::ArityMismatch {
                left: rank,
                right: w.rank(),
            });
        }
        Ok(TupleExperiment { words, rank })
    }

    /// Parses comma-separated words.
    pub fn parse(text: &str, rank: usize) -> Result<Self> {
        Self::new(
            text.split(',')
                .map(|t| FreeWord::parse(t.trim(), rank))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn arity(&self) -> usize {
        self.words.len()
    }

    pub fn at_degree(&self, n: usize) -> Vec<Word> {
        self.words.iter().map(|w| Word::from_free(w, n)).collect()
    }

    /// `v(w_1, …, w_d)` as an element of `F_r`.
    pub fn compose(&self, v: &FreeWord) -> Result<FreeWord> {
        if v.rank() > self.arity() {
            return Err(Error::VariableOutOfRange {
                index: v.rank(),
                rank: self.arity(),
            });
        }
        v.substitute(&self.words).map(|w| {
            if w.rank() < self.rank {
                FreeWord::reduced(self.rank, w.letters().to_vec())
            } else {
                w
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoficRow {
    pub test_word: String,
    pub n: usize,
    /// Mean of `f_1/n` over the samples.
    pub mean_fixed_fraction: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoficTrend {
    pub test_word: String,
    /// Means across the requested degrees, in order.
    pub means: Vec<f64>,
    pub strictly_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoficReport {
    pub degrees: Vec<usize>,
    pub samples: u64,
    pub rows: Vec<SoficRow>,
    pub trends: Vec<SoficTrend>,
}

/// Estimates `E[f_1(v(w_1(σ), …, w_d(σ)))/n]` for every test word `v` and degree `n`.
///
/// `battery = None` uses [`FreeWord::battery`] with [`DEFAULT_BATTERY_LENGTH`].
pub fn sofic_check(
    tuple: &TupleExperiment,
    degrees: &[usize],
    samples: u64,
    plan: SeedPlan,
    battery: Option<&[FreeWord]>,
) -> Result<SoficReport> {
    let default;
    let battery = match battery {
        Some(b) => b,
        None => {
            default = FreeWord::battery(tuple.arity(), DEFAULT_BATTERY_LENGTH);
            &default
        }
    };
    if let Some(v) = battery.iter().find(|v| v.is_empty()) {
        return Err(Error::invalid(format!("test word {} is trivial", v)));
    }
    let mut rows = Vec::new();
    let mut trends = Vec::new();
    for (vi, v) in battery.iter().enumerate() {
        let composed = tuple.compose(v)?;
        let mut means = Vec::with_capacity(degrees.len());
        for (ni, &n) in degrees.iter().enumerate() {
            if n == 0 {
                return Err(Error::invalid("degrees must be positive"));
            }
            let word = Word::from_free(&composed, n);
            let job = plan.derive((vi * degrees.len() + ni) as u64);
            let s = eval::cycle_stat_stream(&word, samples, 1, &[], job)?;
            let sd = s.fixed_points.variance().sqrt() / n as f64;
            means.push(s.fixed_point_fraction);
            rows.push(SoficRow {
                test_word: v.to_string(),
                n,
                mean_fixed_fraction: s.fixed_point_fraction,
                std_error: sd / (samples as f64).sqrt(),
            });
        }
        trends.push(SoficTrend {
            test_word: v.to_string(),
            strictly_decreasing: means.windows(2).all(|p| p[1] < p[0]),
            means,
        });
    }
    Ok(SoficReport {
        degrees: degrees.to_vec(),
        samples,
        rows,
        trends,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "samples")]
pub enum SaeMode {
    Exact,
    Sampled(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaeEstimate {
    pub n: usize,
    pub d: usize,
    pub mode: SaeMode,
    /// Exact value as a fraction (exact mode only).
    pub exact: Option<eval::Fraction>,
    pub value: f64,
    /// KR between two independent uniform samples of the same size (sampled mode only).
    pub baseline: Option<f64>,
    pub support: usize,
}

fn primitive_tuple(n: usize, d: usize) -> Vec<Word> {
    (1..=d)
        .map(|i| Word::parse(&format!("x{}", i), n, d).expect("primitive word"))
        .collect()
}

/// KR distance, under the ℓ¹ product metric, between the joint law of `(w_1(σ), …, w_d(σ))` and
/// the uniform measure on `S_n^d`.
///
/// Sampled mode compares two empirical measures of size `N` and reports the distance between two
/// independent uniform samples of size `N` as a bias reference.
pub fn sae_estimate(
    tuple: &TupleExperiment,
    n: usize,
    mode: SaeMode,
    plan: SeedPlan,
) -> Result<SaeEstimate> {
    let d = tuple.arity();
    let words = tuple.at_degree(n);
    let refs: Vec<&Word> = words.iter().collect();
    match mode {
        SaeMode::Exact => {
            let size = perm::factorial(n)
                .checked_pow(d as u32)
                .unwrap_or(u128::MAX);
            if size > EXACT_PRODUCT_LIMIT {
                return Err(Error::BudgetExceeded {
                    what: "exact product-uniform measure",
                    required: size,
                    limit: EXACT_PRODUCT_LIMIT,
                });
            }
            let push = eval::tuple_pushforward(&refs, Pushforward::Exact, plan)?;
            let uniform = Distribution::product_uniform(n, d)?;
            let (v, _) = transport::kr_exact(&push, &uniform, Ground::for_arity(d))?;
            Ok(SaeEstimate {
                n,
                d,
                mode,
                exact: Some(v.into()),
                value: *v.numer() as f64 / *v.denom() as f64,
                baseline: None,
                support: push.support_len(),
            })
        }
        SaeMode::Sampled(samples) => {
            let push = eval::tuple_pushforward(&refs, Pushforward::Sampled(samples), plan)?;
            let prim = primitive_tuple(n, d);
            let prim: Vec<&Word> = prim.iter().collect();
            let uniform_a =
                eval::tuple_pushforward(&prim, Pushforward::Sampled(samples), plan.derive(1))?;
            let uniform_b =
                eval::tuple_pushforward(&prim, Pushforward::Sampled(samples), plan.derive(2))?;
            let ground = Ground::for_arity(d);
            let (v, _) = transport::kr_exact(&push, &uniform_a, ground)?;
            let (b, _) = transport::kr_exact(&uniform_b, &uniform_a, ground)?;
            let f = |r: crate::Rational| *r.numer() as f64 / *r.denom() as f64;
            Ok(SaeEstimate {
                n,
                d,
                mode,
                exact: None,
                value: f(v),
                baseline: Some(f(b)),
                support: push.support_len(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessReport {
    pub d: usize,
    pub r: usize,
    pub rank: usize,
    pub is_free_of_rank_d: bool,
    /// `d > r`: no free basis of rank `d` fits in `F_r` without a rank drop elsewhere.
    pub d_exceeds_rank: bool,
    /// The words only use `d' < d` generators, so they lie in a free factor of smaller rank.
    pub contained_in_smaller_rank: bool,
    pub generators_used: usize,
}

impl FreenessReport {
    pub fn has_obstruction(&self) -> bool {
        self.d_exceeds_rank || self.contained_in_smaller_rank
    }
}

/// Subgroup rank of the tuple and the containment flags that rule out equidistribution.
pub fn freeness_report(tuple: &TupleExperiment) -> Result<FreenessReport> {
    let rank = stallings_rank(&tuple.words)?;
    let d = tuple.arity();
    let mut used: Vec<usize> = tuple.words.iter().flat_map(|w| w.support()).collect();
    used.sort_unstable();
    used.dedup();
    Ok(FreenessReport {
        d,
        r: tuple.rank,
        rank,
        is_free_of_rank_d: rank == d,
        d_exceeds_rank: d > tuple.rank,
        contained_in_smaller_rank: used.len() < d,
        generators_used: used.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn freeness_examples() {
        let r = freeness_report(&TupleExperiment::parse("x, y", 2).unwrap()).unwrap();
        assert_eq!(
            (r.rank, r.is_free_of_rank_d, r.has_obstruction()),
            (2, true, false)
        );
        let r = freeness_report(&TupleExperiment::parse("x^2, y^2, x y", 2).unwrap()).unwrap();
        assert_eq!((r.rank, r.is_free_of_rank_d), (3, true));
        assert!(r.d_exceeds_rank && r.contained_in_smaller_rank);
        let r = freeness_report(&TupleExperiment::parse("x, x^2", 1).unwrap()).unwrap();
        assert_eq!((r.rank, r.is_free_of_rank_d), (1, false));
        assert!(TupleExperiment::parse("x (1 2)", 1).is_err());
    }

    #[test]
    fn composition() {
        let t = TupleExperiment::parse("x, x", 1).unwrap();
        let v = FreeWord::parse("x1 x2^-1", 2).unwrap();
        assert!(t.compose(&v).unwrap().is_empty());
        let t = TupleExperiment::parse("x^2, y^2, x y", 2).unwrap();
        let v = FreeWord::parse("x1 x3^-1", 3).unwrap();
        assert_eq!(t.compose(&v).unwrap().to_string(), "x1^2 x2^-1 x1^-1");
    }

    #[test]
    fn diagonal_is_not_sofic() {
        let t = TupleExperiment::parse("x, x", 1).unwrap();
        let v = [FreeWord::parse("x1 x2^-1", 2).unwrap()];
        let rep = sofic_check(&t, &[5, 10], 200, SeedPlan::serial(1), Some(&v)).unwrap();
        assert!(rep.rows.iter().all(|r| r.mean_fixed_fraction == 1.0));
        assert!(!rep.trends[0].strictly_decreasing);
    }

    #[test]
    fn exact_sae_examples() {
        let prim = TupleExperiment::parse("x, y", 2).unwrap();
        let e = sae_estimate(&prim, 3, SaeMode::Exact, SeedPlan::serial(0)).unwrap();
        assert_eq!(Rational::from(e.exact.unwrap()), Rational::from_integer(0));
        let diag = TupleExperiment::parse("x, x", 1).unwrap();
        let e = sae_estimate(&diag, 3, SaeMode::Exact, SeedPlan::serial(0)).unwrap();
        assert!(e.value > 0.5);
        assert_eq!(e.support, 6);
        assert!(sae_estimate(&prim, 5, SaeMode::Exact, SeedPlan::serial(0)).is_err());
    }

    #[test]
    fn sampled_sae_reports_baseline() {
        let prim = TupleExperiment::parse("x, y", 2).unwrap();
        let e = sae_estimate(&prim, 3, SaeMode::Sampled(2000), SeedPlan::new(1, 2)).unwrap();
        let b = e.baseline.unwrap();
        assert!(e.value < 0.2 && b < 0.2, "{} {}", e.value, b);
    }
}
