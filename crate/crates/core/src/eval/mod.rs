//! Word maps `S_n^r → S_n` and the distributions they push forward.

mod distribution;
mod stats;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::perm::{self, Permutation};
use crate::rng::SeedPlan;
use crate::word::{Letter, Sign, Word};
use crate::{Error, Result, ENUMERATION_BUDGET};

pub use distribution::{Atom, Distribution, DistributionKind, Fraction};
pub use stats::{cycle_stat_stream, CycleStatSummary, Histogram};

/// Evaluates `w` at `assignment` (`assignment[i-1]` substituted for `x_i`).
pub fn evaluate(w: &Word, assignment: &[Permutation]) -> Result<Permutation> {
    if assignment.len() < w.max_variable() {
        return Err(Error::ArityMismatch {
            left: w.max_variable(),
            right: assignment.len(),
        });
    }
    if let Some(p) = assignment.iter().find(|p| p.degree() != w.degree()) {
        return Err(Error::DegreeMismatch {
            left: w.degree(),
            right: p.degree(),
        });
    }
    let compiled = CompiledWord::new(w);
    let fwd: Vec<Vec<u32>> = assignment.iter().map(|p| p.images().to_vec()).collect();
    let inv: Vec<Vec<u32>> = assignment
        .iter()
        .enumerate()
        .map(|(k, p)| {
            if compiled.needs_inverse(k) {
                p.inverse().images().to_vec()
            } else {
                Vec::new()
            }
        })
        .collect();
    let mut out = vec![0; w.degree()];
    compiled.eval_into(&fwd, &inv, &mut out);
    Ok(Permutation::from_images_unchecked(out))
}

#[derive(Debug, Clone)]
enum Step {
    Const(Vec<u32>),
    Fwd(usize),
    Inv(usize),
}

/// A word flattened into lookup steps, with adjacent constants multiplied out.
///
/// Evaluation pushes all points through each step in turn, so each step is one table gather.
#[derive(Debug, Clone)]
pub struct CompiledWord {
    n: usize,
    steps: Vec<Step>,
    inverse_needed: Vec<bool>,
}

impl CompiledWord {
    pub fn new(w: &Word) -> Self {
        let n = w.degree();
        let mut steps: Vec<Step> = Vec::new();
        let mut inverse_needed = vec![false; w.max_variable()];
        for letter in w.letters() {
            match letter {
                Letter::Const(c) if c.is_identity() => {}
                Letter::Const(c) => match steps.last_mut() {
                    Some(Step::Const(prev)) => {
                        for x in prev.iter_mut() {
                            *x = c.images()[*x as usize];
                        }
                    }
                    _ => steps.push(Step::Const(c.images().to_vec())),
                },
                Letter::Var(v) => match v.sign {
                    Sign::Pos => steps.push(Step::Fwd(v.index - 1)),
                    Sign::Neg => {
                        inverse_needed[v.index - 1] = true;
                        steps.push(Step::Inv(v.index - 1));
                    }
                },
            }
        }
        CompiledWord {
            n,
            steps,
            inverse_needed,
        }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Number of leading variables the word reads.
    pub fn arity(&self) -> usize {
        self.inverse_needed.len()
    }

    pub fn needs_inverse(&self, k: usize) -> bool {
        self.inverse_needed.get(k).copied().unwrap_or(false)
    }

    /// Writes the one-line images of `w(σ)` into `out`. `inv[k]` is only read when
    /// [`Self::needs_inverse`] holds for `k`.
    pub fn eval_into(&self, fwd: &[Vec<u32>], inv: &[Vec<u32>], out: &mut [u32]) {
        for (i, x) in out.iter_mut().enumerate() {
            *x = i as u32;
        }
        for step in &self.steps {
            let table: &[u32] = match step {
                Step::Const(c) => c,
                Step::Fwd(k) => &fwd[*k],
                Step::Inv(k) => &inv[*k],
            };
            for x in out.iter_mut() {
                *x = table[*x as usize];
            }
        }
    }
}

impl CompiledWord {
    /// Follows `point` through the evaluation and records, for each variable letter passed,
    /// the variable and the value of it that was used.
    pub fn trace_point(
        &self,
        fwd: &[Vec<u32>],
        inv: &[Vec<u32>],
        point: u32,
        used: &mut Vec<(usize, u32)>,
    ) {
        used.clear();
        let mut x = point;
        for step in &self.steps {
            match step {
                Step::Const(c) => x = c[x as usize],
                Step::Fwd(k) => {
                    x = fwd[*k][x as usize];
                    used.push((*k, x));
                }
                Step::Inv(k) => {
                    used.push((*k, x));
                    x = inv[*k][x as usize];
                }
            }
        }
    }
}

/// Reusable buffers for evaluating several words at one random assignment.
struct Sampler {
    words: Vec<CompiledWord>,
    fwd: Vec<Vec<u32>>,
    inv: Vec<Vec<u32>>,
    need_inv: Vec<bool>,
}

impl Sampler {
    fn new(words: &[&Word]) -> Self {
        let words: Vec<CompiledWord> = words.iter().map(|w| CompiledWord::new(w)).collect();
        let n = words[0].degree();
        let arity = words.iter().map(CompiledWord::arity).max().unwrap_or(0);
        let need_inv = (0..arity)
            .map(|k| words.iter().any(|c| c.needs_inverse(k)))
            .collect();
        Sampler {
            words,
            fwd: (0..arity).map(|_| (0..n as u32).collect()).collect(),
            inv: vec![vec![0; n]; arity],
            need_inv,
        }
    }

    fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for (k, f) in self.fwd.iter_mut().enumerate() {
            f.shuffle(rng);
            if self.need_inv[k] {
                for (i, &y) in f.iter().enumerate() {
                    self.inv[k][y as usize] = i as u32;
                }
            }
        }
    }

    fn eval(&self, j: usize) -> Permutation {
        let mut out = vec![0; self.words[j].degree()];
        self.words[j].eval_into(&self.fwd, &self.inv, &mut out);
        Permutation::from_images_unchecked(out)
    }
}

fn check_budget(n: usize, arity: usize, what: &'static str) -> Result<()> {
    let required = perm::factorial(n)
        .checked_pow(arity as u32)
        .unwrap_or(u128::MAX);
    if required > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            what,
            required,
            limit: ENUMERATION_BUDGET,
        });
    }
    Ok(())
}

fn check_shared(words: &[&Word]) -> Result<()> {
    let Some(first) = words.first() else {
        return Err(Error::invalid("need at least one word"));
    };
    for w in &words[1..] {
        if w.degree() != first.degree() {
            return Err(Error::DegreeMismatch {
                left: first.degree(),
                right: w.degree(),
            });
        }
        if w.rank() != first.rank() {
            return Err(Error::ArityMismatch {
                left: first.rank(),
                right: w.rank(),
            });
        }
    }
    Ok(())
}

/// Enumerates all assignments to the variables the words read, in lexicographic one-line
/// order, calling `visit` with the evaluations.
fn enumerate_assignments(words: &[&Word], mut visit: impl FnMut(Vec<Permutation>)) -> Result<()> {
    let n = words[0].degree();
    let compiled: Vec<CompiledWord> = words.iter().map(|w| CompiledWord::new(w)).collect();
    let arity = compiled.iter().map(CompiledWord::arity).max().unwrap_or(0);
    check_budget(n, arity, "exact enumeration")?;
    let all = perm::all_permutations(n);
    let inverses: Vec<Vec<u32>> = all.iter().map(|p| p.inverse().images().to_vec()).collect();
    let mut digits = vec![0usize; arity];
    let mut fwd: Vec<Vec<u32>> = vec![all[0].images().to_vec(); arity];
    let mut inv: Vec<Vec<u32>> = vec![inverses[0].clone(); arity];
    loop {
        let values = compiled
            .iter()
            .map(|c| {
                let mut out = vec![0; n];
                c.eval_into(&fwd, &inv, &mut out);
                Permutation::from_images_unchecked(out)
            })
            .collect();
        visit(values);
        // odometer with the last variable fastest
        let mut k = arity;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < all.len() {
                fwd[k].copy_from_slice(all[digits[k]].images());
                inv[k].copy_from_slice(&inverses[digits[k]]);
                break;
            }
            digits[k] = 0;
            fwd[k].copy_from_slice(all[0].images());
            inv[k].copy_from_slice(&inverses[0]);
        }
    }
}

/// Exact pushforward of the uniform measure under `w`.
///
/// Enumerates `S_n^k` over the `k` leading variables `w` reads; unused trailing variables do not
/// change the measure.
pub fn exact_distribution(w: &Word) -> Result<Distribution> {
    tuple_pushforward(&[w], Pushforward::Exact, SeedPlan::serial(0))
}

/// Empirical pushforward from `samples` independent uniform assignments.
pub fn sample_distribution(w: &Word, samples: u64, plan: SeedPlan) -> Result<Distribution> {
    tuple_pushforward(&[w], Pushforward::Sampled(samples), plan)
}

/// Empirical estimate of the symmetrized pushforward: each value is conjugated by an independent
/// uniform permutation.
pub fn symmetrized_sample(w: &Word, samples: u64, plan: SeedPlan) -> Result<Distribution> {
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let n = w.degree();
    let counts = plan.map_reduce(
        samples,
        |rng, count| {
            let mut sampler = Sampler::new(&[w]);
            let mut counts: HashMap<Atom, u64> = HashMap::new();
            for _ in 0..count {
                sampler.draw(rng);
                let g = Permutation::random(n, rng);
                let value = g.inverse().then(&sampler.eval(0)).then(&g);
                *counts.entry(Atom::single(value)).or_insert(0) += 1;
            }
            counts
        },
        merge_counts,
    );
    Ok(Distribution::from_counts_unchecked(
        n,
        1,
        DistributionKind::Empirical,
        counts,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pushforward {
    Exact,
    Sampled(u64),
}

/// Joint law of `(w_1(σ), …, w_d(σ))` for one shared uniform assignment `σ`.
pub fn tuple_pushforward(
    words: &[&Word],
    mode: Pushforward,
    plan: SeedPlan,
) -> Result<Distribution> {
    check_shared(words)?;
    let n = words[0].degree();
    let d = words.len();
    match mode {
        Pushforward::Exact => {
            let mut counts: HashMap<Atom, u64> = HashMap::new();
            enumerate_assignments(words, |values| {
                *counts.entry(Atom(values)).or_insert(0) += 1;
            })?;
            Ok(Distribution::from_counts_unchecked(
                n,
                d,
                DistributionKind::Exact,
                counts,
            ))
        }
        Pushforward::Sampled(0) => Err(Error::invalid("need at least one sample")),
        Pushforward::Sampled(samples) => {
            let counts = plan.map_reduce(
                samples,
                |rng, count| {
                    let mut sampler = Sampler::new(words);
                    let mut counts: HashMap<Atom, u64> = HashMap::new();
                    for _ in 0..count {
                        sampler.draw(rng);
                        let atom = Atom((0..d).map(|j| sampler.eval(j)).collect());
                        *counts.entry(atom).or_insert(0) += 1;
                    }
                    counts
                },
                merge_counts,
            );
            Ok(Distribution::from_counts_unchecked(
                n,
                d,
                DistributionKind::Empirical,
                counts,
            ))
        }
    }
}

fn merge_counts(mut a: HashMap<Atom, u64>, b: HashMap<Atom, u64>) -> HashMap<Atom, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// Runs `visit` on `samples` independent values of `w`, sharded by `plan`; per-shard accumulators
/// are merged in shard order.
pub(crate) fn stream_values<A, F, M>(
    w: &Word,
    samples: u64,
    plan: SeedPlan,
    init: impl Fn() -> A + Sync,
    visit: F,
    merge: M,
) -> A
where
    A: Send,
    F: Fn(&mut A, &[u32]) + Sync,
    M: Fn(A, A) -> A,
{
    plan.map_reduce(
        samples,
        |rng, count| {
            let mut sampler = Sampler::new(&[w]);
            let mut acc = init();
            let mut out = vec![0u32; w.degree()];
            for _ in 0..count {
                sampler.draw(rng);
                sampler.words[0].eval_into(&sampler.fwd, &sampler.inv, &mut out);
                visit(&mut acc, &out);
            }
            acc
        },
        merge,
    )
}
