use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::eval::Atom;
use crate::perm::{self, Permutation};
use crate::rng::SeedPlan;
use crate::transport::TransportPlan;
use crate::{Error, Rational, Result};

/// Largest degree for which the coupling is built by full enumeration.
pub const COUPLING_EXACT_MAX_N: usize = 8;

/// Distinct orderings of a multiset of cycle lengths.
fn arrangements(lengths: &[usize]) -> Vec<Vec<usize>> {
    let mut cur = lengths.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    // next lexicographic permutation
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..cur.len())
            .rev()
            .find(|&j| cur[j] > cur[i - 1])
            .expect("pivot");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// `σ` with the blocks of `points` (lengths `blocks`) as cycles, and the `n`-cycle through
/// `points` in order.
fn writing_pair(points: &[u32], blocks: &[usize]) -> (Permutation, Permutation) {
    let n = points.len();
    let mut sigma = vec![0u32; n];
    let mut start = 0;
    for &len in blocks {
        let block = &points[start..start + len];
        for k in 0..len {
            sigma[block[k] as usize] = block[(k + 1) % len];
        }
        start += len;
    }
    let mut tau = vec![0u32; n];
    for k in 0..n {
        tau[points[k] as usize] = points[(k + 1) % n];
    }
    (
        Permutation::from_images_unchecked(sigma),
        Permutation::from_images_unchecked(tau),
    )
}

/// Coupling of the uniform measure on the class of `rep` with the uniform measure on `n`-cycles:
/// every way of writing `σ = (s_1)…(s_d)` in cycle notation is sent to the `n`-cycle
/// `(s_1 s_2 … s_d)`, each writing weighted equally.
///
/// Writings are exactly pairs (ordering of all points, ordering of the cycle lengths). For
/// `n <= COUPLING_EXACT_MAX_N` all pairs are enumerated; beyond that `samples` pairs are drawn
/// and the result is the empirical coupling. The plan's cost is `d/n` for `d >= 2` and `0` for
/// an `n`-cycle.
pub fn coupling_class_to_ncycles(
    rep: &Permutation,
    samples: u64,
    plan: SeedPlan,
) -> Result<TransportPlan> {
    let n = rep.degree();
    if n < 2 {
        return Err(Error::invalid("coupling needs n >= 2"));
    }
    let arr = arrangements(&rep.cycle_type());
    let mut counts: HashMap<(Atom, Atom), u64> = HashMap::new();
    let total;
    if n <= COUPLING_EXACT_MAX_N {
        for p in perm::all_permutations(n) {
            for blocks in &arr {
                let (s, t) = writing_pair(p.images(), blocks);
                *counts
                    .entry((Atom::single(s), Atom::single(t)))
                    .or_insert(0) += 1;
            }
        }
        total = perm::factorial(n) as u64 * arr.len() as u64;
    } else {
        if samples == 0 {
            return Err(Error::invalid("need at least one sample"));
        }
        counts = plan.map_reduce(
            samples,
            |rng, count| {
                let mut points: Vec<u32> = (0..n as u32).collect();
                let mut local: HashMap<(Atom, Atom), u64> = HashMap::new();
                for _ in 0..count {
                    points.shuffle(rng);
                    let blocks = &arr[rng.random_range(0..arr.len())];
                    let (s, t) = writing_pair(&points, blocks);
                    *local.entry((Atom::single(s), Atom::single(t))).or_insert(0) += 1;
                }
                local
            },
            |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            },
        );
        total = samples;
    }
    Ok(TransportPlan::from_triples(
        n,
        counts
            .into_iter()
            .map(|((a, b), c)| (a, b, Rational::new(c as i128, total as i128))),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Distribution;

    #[test]
    fn arrangement_counts() {
        assert_eq!(arrangements(&[2, 1, 1]).len(), 3);
        assert_eq!(arrangements(&[1, 1, 1]).len(), 1);
        assert_eq!(arrangements(&[3, 2, 1]).len(), 6);
    }

    #[test]
    fn identity_class_costs_one() {
        let plan =
            coupling_class_to_ncycles(&Permutation::identity(3), 0, SeedPlan::serial(0)).unwrap();
        assert_eq!(plan.cost(), Rational::from_integer(1));
    }

    #[test]
    fn transposition_class_has_right_marginals() {
        let rep = Permutation::parse("(1 2)", 4).unwrap();
        let plan = coupling_class_to_ncycles(&rep, 0, SeedPlan::serial(0)).unwrap();
        plan.verify(
            &Distribution::class_uniform(&rep).unwrap(),
            &Distribution::ncycles(4).unwrap(),
        )
        .unwrap();
        assert_eq!(plan.cost(), Rational::new(3, 4));
    }

    #[test]
    fn ncycle_class_is_the_identity_coupling() {
        let rep = Permutation::long_cycle(5);
        let plan = coupling_class_to_ncycles(&rep, 0, SeedPlan::serial(0)).unwrap();
        assert_eq!(plan.cost(), Rational::from_integer(0));
    }

    #[test]
    fn sampled_coupling_has_cost_d_over_n() {
        let rep = Permutation::with_cycle_type(&[4, 3, 2, 1]).unwrap();
        let plan = coupling_class_to_ncycles(&rep, 2000, SeedPlan::new(9, 2)).unwrap();
        assert_eq!(plan.cost(), Rational::new(4, 10));
        assert!(plan.right.iter().all(|a| a.0[0].cycle_type() == vec![10]));
    }
}
