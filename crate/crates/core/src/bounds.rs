//! Closed-form return-probability bounds and Monte-Carlo estimators for the events they control.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::eval::stream_values;
use crate::rng::{stream_rng, SeedPlan};
use crate::word::Word;
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Parameters of the subset bound: degree, subset size, word length, cycle cap and the critical
/// norm of `w^h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    pub d: usize,
    pub l: usize,
    pub h: usize,
    pub crit: usize,
}

fn slack(n: usize, d: usize, l: usize, h: usize) -> Result<BigInt> {
    if d == 0 {
        return Err(Error::invalid("subset size d must be at least 1"));
    }
    if h == 0 || h > n {
        return Err(Error::invalid(format!("h = {} outside 1..={}", h, n)));
    }
    let denom = BigInt::from(n) - BigInt::from(d) * l * h;
    if denom <= BigInt::from(0) {
        return Err(Error::invalid(format!(
            "n - d·l·h = {} is not positive",
            denom
        )));
    }
    Ok(denom)
}

/// `((n − crit + d·l·h)·l·h / (n − d·l·h))^d`, exact; values above 1 are returned unchanged.
pub fn lemma_bound(p: &BoundParams) -> Result<BigRational> {
    let denom = slack(p.n, p.d, p.l, p.h)?;
    let lh = BigInt::from(p.l * p.h);
    let num = (BigInt::from(p.n) - BigInt::from(p.crit) + BigInt::from(p.d) * &lh) * &lh;
    Ok(num_traits::pow(BigRational::new(num, denom), p.d))
}

/// `(d·(l·h)² / (n − d·l·h))^d`, exact.
pub fn corollary_bound(n: usize, d: usize, l: usize, h: usize) -> Result<BigRational> {
    let denom = slack(n, d, l, h)?;
    let lh = BigInt::from(l * h);
    let num = BigInt::from(d) * &lh * &lh;
    Ok(num_traits::pow(BigRational::new(num, denom), d))
}

/// `exp(−c·f/(l·h)²)` for a caller-chosen constant `c`.
pub fn proposition_tail(f: f64, l: usize, h: usize, c: f64) -> f64 {
    let lh = (l * h) as f64;
    (-c * f / (lh * lh)).exp()
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::INFINITY)
}

/// Binomial proportion with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub hits: u64,
    pub samples: u64,
    pub estimate: f64,
    /// Plug-in standard error `√(p(1−p)/N)`.
    pub sigma: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    pub fn new(hits: u64, samples: u64) -> Self {
        let n = samples as f64;
        let p = hits as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Estimate {
            hits,
            samples,
            estimate: p,
            sigma: (p * (1.0 - p) / n).sqrt(),
            ci_low: (center - half).max(0.0),
            ci_high: (center + half).min(1.0),
        }
    }
}

/// Marks the points lying in cycles of length at most `h`.
fn mark_short_cycles(images: &[u32], h: usize, seen: &mut [bool], short: &mut [bool]) {
    seen.fill(false);
    for start in 0..images.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            len += 1;
            i = images[i] as usize;
        }
        let is_short = len <= h;
        let mut i = start;
        loop {
            short[i] = is_short;
            i = images[i] as usize;
            if i == start {
                break;
            }
        }
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    Ok(())
}

fn check_h(w: &Word, h: usize) -> Result<()> {
    if h == 0 || h > w.degree() {
        return Err(Error::invalid(format!(
            "h = {} outside 1..={}",
            h,
            w.degree()
        )));
    }
    Ok(())
}

/// Hit counts for several point sets against one shared sample set.
fn subset_hits(
    w: &Word,
    subsets: &[Vec<usize>],
    h: usize,
    samples: u64,
    plan: SeedPlan,
) -> Vec<u64> {
    let n = w.degree();
    struct Acc {
        hits: Vec<u64>,
        seen: Vec<bool>,
        short: Vec<bool>,
    }
    stream_values(
        w,
        samples,
        plan,
        || Acc {
            hits: vec![0; subsets.len()],
            seen: vec![false; n],
            short: vec![false; n],
        },
        |acc: &mut Acc, images: &[u32]| {
            mark_short_cycles(images, h, &mut acc.seen, &mut acc.short);
            for (k, x) in subsets.iter().enumerate() {
                if x.iter().all(|&p| acc.short[p - 1]) {
                    acc.hits[k] += 1;
                }
            }
        },
        |mut a, b| {
            a.hits.iter_mut().zip(b.hits).for_each(|(x, y)| *x += y);
            a
        },
    )
    .hits
}

/// Estimate of `P(X ⊆ F_{≤h}(w(σ)))`; `subset` holds 1-based points.
pub fn mc_subset_prob(
    w: &Word,
    subset: &[usize],
    h: usize,
    samples: u64,
    plan: SeedPlan,
) -> Result<Estimate> {
    check_samples(samples)?;
    check_h(w, h)?;
    if let Some(&p) = subset.iter().find(|&&p| p == 0 || p > w.degree()) {
        return Err(Error::PointOutOfRange {
            point: p,
            n: w.degree(),
        });
    }
    let hits = subset_hits(w, &[subset.to_vec()], h, samples, plan)[0];
    Ok(Estimate::new(hits, samples))
}

/// Estimates of `P(f_{≤h}(w(σ)) ≥ f)` for each threshold, all from one sample set, so they are
/// non-increasing in `f`.
pub fn mc_tail_probs(
    w: &Word,
    h: usize,
    thresholds: &[usize],
    samples: u64,
    plan: SeedPlan,
) -> Result<Vec<Estimate>> {
    check_samples(samples)?;
    check_h(w, h)?;
    let summary = crate::eval::cycle_stat_stream(w, samples, h, thresholds, plan)?;
    Ok(summary
        .tails
        .iter()
        .map(|t| Estimate::new(t.count, samples))
        .collect())
}

pub fn mc_tail_prob(
    w: &Word,
    h: usize,
    f: usize,
    samples: u64,
    plan: SeedPlan,
) -> Result<Estimate> {
    Ok(mc_tail_probs(w, h, &[f], samples, plan)?[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCase {
    pub d: usize,
    /// 0 for the first `d` points, then the seeded random subsets.
    pub subset_id: usize,
    pub subset: Vec<usize>,
    pub estimate: Estimate,
    pub corollary_bound: f64,
    pub lemma_bound: f64,
    /// `estimate − 3σ ≤ corollary_bound`.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub word: String,
    pub n: usize,
    pub h: usize,
    pub l: usize,
    /// Critical norm of `reduce(w^h)`.
    pub crit: usize,
    pub samples: u64,
    pub cases: Vec<AuditCase>,
}

impl AuditReport {
    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }
}

/// Number of random subsets audited per `d`, besides the first `d` points.
pub const AUDIT_RANDOM_SUBSETS: usize = 10;

/// Checks the subset bound for a regular word against Monte-Carlo estimates for every
/// `d ≤ d_max`, on the subset `{1..d}` and [`AUDIT_RANDOM_SUBSETS`] seeded random `d`-subsets.
pub fn bound_audit(
    w: &Word,
    h: usize,
    d_max: usize,
    samples: u64,
    plan: SeedPlan,
) -> Result<AuditReport> {
    check_samples(samples)?;
    check_h(w, h)?;
    let w = w.reduce();
    if !w.is_regular()? {
        return Err(Error::NotRegular);
    }
    let n = w.degree();
    let l = w.length();
    let crit = w.power(h)?.classify()?.crit_norm;

    let mut subsets: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for d in 1..=d_max {
        slack(n, d, l, h)?;
        subsets.push((d, 0, (1..=d).collect()));
        let mut rng = stream_rng(plan.seed, u64::MAX / 2 + d as u64);
        for k in 1..=AUDIT_RANDOM_SUBSETS {
            let mut x: Vec<usize> = index::sample(&mut rng, n, d)
                .into_iter()
                .map(|p| p + 1)
                .collect();
            x.sort_unstable();
            subsets.push((d, k, x));
        }
    }
    let sets: Vec<Vec<usize>> = subsets.iter().map(|(_, _, x)| x.clone()).collect();
    let hits = subset_hits(&w, &sets, h, samples, plan);

    let mut cases = Vec::with_capacity(subsets.len());
    for ((d, subset_id, subset), hits) in subsets.into_iter().zip(hits) {
        let estimate = Estimate::new(hits, samples);
        let cor = to_f64(&corollary_bound(n, d, l, h)?);
        let lem = to_f64(&lemma_bound(&BoundParams { n, d, l, h, crit })?);
        cases.push(AuditCase {
            d,
            subset_id,
            subset,
            pass: estimate.estimate - 3.0 * estimate.sigma <= cor,
            estimate,
            corollary_bound: cor,
            lemma_bound: lem,
        });
    }
    Ok(AuditReport {
        word: w.to_string(),
        n,
        h,
        l,
        crit,
        samples,
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(text: &str, n: usize, r: usize) -> Word {
        Word::parse(text, n, r).unwrap()
    }

    fn approx(r: BigRational) -> f64 {
        to_f64(&r)
    }

    #[test]
    fn formula_values() {
        let p = BoundParams {
            n: 100,
            d: 1,
            l: 2,
            h: 1,
            crit: 100,
        };
        assert_eq!(
            lemma_bound(&p).unwrap(),
            BigRational::new(4.into(), 98.into())
        );
        assert!((approx(corollary_bound(20, 1, 2, 1).unwrap()) - 4.0 / 18.0).abs() < 1e-15);
        assert!(
            (approx(corollary_bound(100, 2, 2, 1).unwrap()) - (8.0f64 / 96.0).powi(2)).abs()
                < 1e-15
        );
        assert!(lemma_bound(&BoundParams { d: 0, ..p }).is_err());
        assert!(corollary_bound(4, 1, 2, 2).is_err());
    }

    #[test]
    fn lemma_reduces_to_corollary_at_full_crit() {
        for n in [10, 20, 50, 100] {
            for d in 1..=3 {
                for l in 1..=3 {
                    for h in 1..=3 {
                        if n <= d * l * h {
                            continue;
                        }
                        let p = BoundParams {
                            n,
                            d,
                            l,
                            h,
                            crit: n,
                        };
                        assert_eq!(
                            lemma_bound(&p).unwrap(),
                            corollary_bound(n, d, l, h).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tail_formula() {
        assert_eq!(proposition_tail(0.0, 2, 1, 1.0), 1.0);
        assert!((proposition_tail(4.0, 2, 1, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        let a = proposition_tail(3.0, 2, 2, 0.7);
        assert!((proposition_tail(6.0, 2, 2, 0.7) - a * a).abs() < 1e-15);
    }

    #[test]
    fn wilson_interval_brackets_estimate() {
        let e = Estimate::new(100, 1000);
        assert!(e.ci_low < 0.1 && 0.1 < e.ci_high);
        let zero = Estimate::new(0, 1000);
        assert!(zero.ci_low < 1e-12);
        assert!(zero.ci_high > 0.0);
    }

    #[test]
    fn subset_edge_cases() {
        let x = w("x", 10, 1);
        let all = mc_subset_prob(&x, &[], 1, 100, SeedPlan::serial(1)).unwrap();
        assert_eq!(all.hits, 100);
        assert!(mc_subset_prob(&x, &[11], 1, 100, SeedPlan::serial(1)).is_err());
        let tails = mc_tail_probs(&x, 1, &[0, 11], 100, SeedPlan::serial(1)).unwrap();
        assert_eq!((tails[0].hits, tails[1].hits), (100, 0));
    }

    #[test]
    fn conjugate_of_fixed_point_free_has_no_fixed_points() {
        let c = Word::parse("x^-1 (1 2 3 4 5 6 7 8 9 10) x", 10, 1).unwrap();
        let e = mc_subset_prob(&c, &[1], 1, 1000, SeedPlan::serial(2)).unwrap();
        assert_eq!(e.hits, 0);
    }

    #[test]
    fn audit_rejects_non_regular() {
        assert_eq!(
            bound_audit(&w("x^-1 (1 2) x", 20, 1), 1, 1, 100, SeedPlan::serial(1)).unwrap_err(),
            Error::NotRegular
        );
    }

    #[test]
    fn audit_case_layout() {
        let r = bound_audit(&w("x^2", 50, 1), 1, 2, 2000, SeedPlan::new(4, 2)).unwrap();
        assert_eq!(r.cases.len(), 2 * (1 + AUDIT_RANDOM_SUBSETS));
        assert_eq!((r.l, r.crit), (2, 50));
        assert!(r.cases.iter().all(|c| c.subset.len() == c.d));
        assert!(r.all_pass());
    }
}
