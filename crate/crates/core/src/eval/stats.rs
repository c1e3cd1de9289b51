use serde::{Deserialize, Serialize};

use crate::eval::stream_values;
use crate::perm;
use crate::rng::SeedPlan;
use crate::word::Word;
use crate::{Error, Result};

/// Counts of an integer statistic with values in `0..=max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(max: usize) -> Self {
        Histogram {
            counts: vec![0; max + 1],
        }
    }

    pub fn record(&mut self, value: usize) {
        self.counts[value] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        let s: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(v, &c)| v as f64 * c as f64)
            .sum();
        s / self.total() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.total() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(v, &c)| (v as f64 - m).powi(2) * c as f64)
            .sum();
        ss / (n - 1.0)
    }

    /// Smallest value `v` with `P(X <= v) >= q`.
    pub fn quantile(&self, q: f64) -> usize {
        let target = (q * self.total() as f64).ceil().max(1.0) as u64;
        let mut acc = 0;
        for (v, &c) in self.counts.iter().enumerate() {
            acc += c;
            if acc >= target {
                return v;
            }
        }
        self.counts.len() - 1
    }

    /// Number of observations `>= threshold`.
    pub fn tail(&self, threshold: usize) -> u64 {
        self.counts.iter().skip(threshold).sum()
    }

    pub fn merge(mut self, other: Histogram) -> Histogram {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCount {
    pub threshold: usize,
    pub count: u64,
}

/// Streaming cycle statistics of `w(σ)` for uniform `σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleStatSummary {
    pub n: usize,
    pub h: usize,
    pub samples: u64,
    pub f_leq_h: Histogram,
    pub num_cycles: Histogram,
    pub fixed_points: Histogram,
    /// Mean of `fixed_points / n`.
    pub fixed_point_fraction: f64,
    /// Counts of samples with `f_{<=h} >= threshold`.
    pub tails: Vec<TailCount>,
}

impl CycleStatSummary {
    pub fn tail(&self, threshold: usize) -> u64 {
        self.f_leq_h.tail(threshold)
    }

    /// CSV lines `statistic,mean,sd,q50,q90,q99,min,max` for the three statistics.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,mean,sd,q50,q90,q99\n");
        for (name, hist) in [
            ("f_leq_h", &self.f_leq_h),
            ("num_cycles", &self.num_cycles),
            ("fixed_points", &self.fixed_points),
        ] {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                name,
                hist.mean(),
                hist.variance().sqrt(),
                hist.quantile(0.5),
                hist.quantile(0.9),
                hist.quantile(0.99)
            ));
        }
        out
    }
}

struct Acc {
    f_leq: Histogram,
    cycles: Histogram,
    fixed: Histogram,
    seen: Vec<bool>,
    lengths: Vec<usize>,
}

/// Samples `w` at `samples` uniform assignments and accumulates `f_{<=h}`, the number of cycles
/// and the number of fixed points, without storing the values.
pub fn cycle_stat_stream(
    w: &Word,
    samples: u64,
    h: usize,
    thresholds: &[usize],
    plan: SeedPlan,
) -> Result<CycleStatSummary> {
    let n = w.degree();
    if h == 0 || h > n {
        return Err(Error::invalid(format!("h = {} outside 1..={}", h, n)));
    }
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let acc = stream_values(
        w,
        samples,
        plan,
        || Acc {
            f_leq: Histogram::new(n),
            cycles: Histogram::new(n),
            fixed: Histogram::new(n),
            seen: vec![false; n],
            lengths: Vec::with_capacity(n),
        },
        |acc: &mut Acc, images: &[u32]| {
            perm::cycle_lengths_into(images, &mut acc.seen, &mut acc.lengths);
            let short: usize = acc.lengths.iter().filter(|&&l| l <= h).sum();
            let fixed = acc.lengths.iter().filter(|&&l| l == 1).count();
            acc.f_leq.record(short);
            acc.cycles.record(acc.lengths.len());
            acc.fixed.record(fixed);
        },
        |a, b| Acc {
            f_leq: a.f_leq.merge(b.f_leq),
            cycles: a.cycles.merge(b.cycles),
            fixed: a.fixed.merge(b.fixed),
            seen: a.seen,
            lengths: a.lengths,
        },
    );
    Ok(CycleStatSummary {
        n,
        h,
        samples,
        fixed_point_fraction: acc.fixed.mean() / n as f64,
        tails: thresholds
            .iter()
            .map(|&t| TailCount {
                threshold: t,
                count: acc.f_leq.tail(t),
            })
            .collect(),
        f_leq_h: acc.f_leq,
        num_cycles: acc.cycles,
        fixed_points: acc.fixed,
    })
}
