//! Simulated annealing for approximate solutions of `w(x) = target` in `S_n`.
//!
//! The state is an assignment of the word's variables. A move multiplies one variable on the
//! right by a random transposition, which swaps two values of its one-line form; the objective is
//! the raw Hamming mismatch between `w(x)` and the target.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eval::CompiledWord;
use crate::perm::{self, Permutation};
use crate::rng::{stream_rng, StreamRng};
use crate::word::Word;
use crate::{Error, Result};

/// Number of cooling stages per chain; the temperature is multiplied by the cooling factor once
/// per stage.
pub const COOLING_STAGES: u64 = 10_000;

/// Random moves drawn to calibrate the automatic temperature.
pub const CALIBRATION_MOVES: usize = 200;

/// Target mean acceptance of uphill moves at the automatic starting temperature.
pub const TARGET_UPHILL_ACCEPTANCE: f64 = 0.8;

/// Budget for [`brute_force_min`].
pub const BRUTE_FORCE_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temperature {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    /// Right multiplication by a uniform random transposition.
    Transposition,
    /// Right multiplication by `(a a+1)` for a uniform `a`.
    Adjacent,
    /// Half the time a uniform transposition; otherwise one swapping values used while
    /// evaluating currently mismatched points.
    Focused,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub steps: u64,
    pub restarts: usize,
    pub temperature: Temperature,
    pub cooling: f64,
    pub moves: MoveKind,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            steps: 1_000_000,
            restarts: 10,
            temperature: Temperature::Auto,
            cooling: 0.9995,
            moves: MoveKind::Transposition,
            seed: 0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::invalid("steps must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::invalid("cooling must lie in (0, 1)"));
        }
        if let Temperature::Fixed(t) = self.temperature {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid("temperature must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: u64,
    pub current: usize,
    pub best: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub initial: usize,
    pub best: usize,
    pub initial_temperature: f64,
    /// Fraction of uphill proposals accepted during the first 1% of steps.
    pub early_uphill_acceptance: f64,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub best_assignment: Vec<Permutation>,
    pub best_raw_distance: usize,
    /// `best_raw_distance / n`.
    pub best_normalized_distance: f64,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    #[serde(skip)]
    pub wall_time: Duration,
}

fn raw_mismatch(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn check_instance(w: &Word, target: &Permutation) -> Result<()> {
    if target.degree() != w.degree() {
        return Err(Error::DegreeMismatch {
            left: w.degree(),
            right: target.degree(),
        });
    }
    Ok(())
}

/// Raw Hamming mismatch between `w(assignment)` and `target`.
pub fn objective(w: &Word, assignment: &[Permutation], target: &Permutation) -> Result<usize> {
    check_instance(w, target)?;
    let value = crate::eval::evaluate(w, assignment)?;
    Ok(value.hamming_raw_unchecked(target))
}

/// Exhaustive minimum of the objective over `S_n` for a word in one variable.
pub fn brute_force_min(w: &Word, target: &Permutation) -> Result<usize> {
    check_instance(w, target)?;
    if w.max_variable() > 1 {
        return Err(Error::invalid("brute force handles words in x1 only"));
    }
    let n = w.degree();
    if perm::factorial(n) > BRUTE_FORCE_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "brute-force search",
            required: perm::factorial(n),
            limit: BRUTE_FORCE_BUDGET,
        });
    }
    let compiled = CompiledWord::new(w);
    let mut out = vec![0u32; n];
    let mut inv = vec![vec![0u32; n]];
    let mut best = usize::MAX;
    for p in perm::all_permutations(n) {
        for (i, &y) in p.images().iter().enumerate() {
            inv[0][y as usize] = i as u32;
        }
        compiled.eval_into(&[p.images().to_vec()], &inv, &mut out);
        best = best.min(raw_mismatch(&out, target.images()));
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

/// Mutable assignment with inverses kept in sync.
struct State {
    fwd: Vec<Vec<u32>>,
    inv: Vec<Vec<u32>>,
}

impl State {
    fn random(n: usize, arity: usize, rng: &mut StreamRng) -> Self {
        let fwd: Vec<Vec<u32>> = (0..arity)
            .map(|_| Permutation::random(n, rng).images().to_vec())
            .collect();
        let inv = fwd
            .iter()
            .map(|f| {
                let mut v = vec![0u32; n];
                for (i, &y) in f.iter().enumerate() {
                    v[y as usize] = i as u32;
                }
                v
            })
            .collect();
        State { fwd, inv }
    }

    /// `x_k ← x_k · (a b)`: swaps the values `a` and `b`; an involution.
    fn apply(&mut self, k: usize, a: u32, b: u32) {
        let (pa, pb) = (self.inv[k][a as usize], self.inv[k][b as usize]);
        self.fwd[k].swap(pa as usize, pb as usize);
        self.inv[k][a as usize] = pb;
        self.inv[k][b as usize] = pa;
    }
}

#[derive(Default)]
struct Scratch {
    mismatched: Vec<u32>,
    used: Vec<(usize, u32)>,
}

struct Chain<'a> {
    word: &'a CompiledWord,
    target: &'a [u32],
    n: usize,
    arity: usize,
    moves: MoveKind,
}

impl Chain<'_> {
    fn propose(
        &self,
        rng: &mut StreamRng,
        state: &State,
        out: &[u32],
        scratch: &mut Scratch,
    ) -> (usize, u32, u32) {
        if self.moves == MoveKind::Focused && rng.random::<bool>() {
            if let Some(mv) = self.propose_focused(rng, state, out, scratch) {
                return mv;
            }
        }
        let k = rng.random_range(0..self.arity);
        let (a, b) = match self.moves {
            MoveKind::Adjacent => {
                let a = rng.random_range(0..self.n - 1);
                (a, a + 1)
            }
            _ => Permutation::random_transposition_points(self.n, rng),
        };
        (k, a as u32, b as u32)
    }

    /// Swaps a value used by one mismatched point with a value of the same variable used by
    /// another mismatched point (or a uniform value if there is none).
    fn propose_focused(
        &self,
        rng: &mut StreamRng,
        state: &State,
        out: &[u32],
        scratch: &mut Scratch,
    ) -> Option<(usize, u32, u32)> {
        scratch.mismatched.clear();
        scratch
            .mismatched
            .extend((0..self.n as u32).filter(|&i| out[i as usize] != self.target[i as usize]));
        if scratch.mismatched.is_empty() {
            return None;
        }
        let i = scratch.mismatched[rng.random_range(0..scratch.mismatched.len())];
        self.word
            .trace_point(&state.fwd, &state.inv, i, &mut scratch.used);
        if scratch.used.is_empty() {
            return None;
        }
        let (k, a) = scratch.used[rng.random_range(0..scratch.used.len())];
        let j = scratch.mismatched[rng.random_range(0..scratch.mismatched.len())];
        self.word
            .trace_point(&state.fwd, &state.inv, j, &mut scratch.used);
        scratch.used.retain(|&(kk, v)| kk == k && v != a);
        let b = if scratch.used.is_empty() {
            let b = rng.random_range(0..self.n as u32 - 1);
            if b >= a {
                b + 1
            } else {
                b
            }
        } else {
            scratch.used[rng.random_range(0..scratch.used.len())].1
        };
        Some((k, a, b))
    }

    fn score(&self, state: &State, out: &mut [u32]) -> usize {
        self.word.eval_into(&state.fwd, &state.inv, out);
        raw_mismatch(out, self.target)
    }

    /// Temperature at which moves seen on a short random walk would be accepted, uphill, with
    /// mean probability [`TARGET_UPHILL_ACCEPTANCE`]; the walk records `|Δ|` of every move that
    /// changes the objective.
    fn calibrate(&self, rng: &mut StreamRng) -> f64 {
        let mut state = State::random(self.n, self.arity, rng);
        let mut out = vec![0u32; self.n];
        let mut scratch = Scratch::default();
        let mut current = self.score(&state, &mut out);
        let mut deltas = Vec::new();
        for _ in 0..CALIBRATION_MOVES {
            let (k, a, b) = self.propose(rng, &state, &out, &mut scratch);
            state.apply(k, a, b);
            let s = self.score(&state, &mut out);
            if s != current {
                deltas.push(s.abs_diff(current) as f64);
            }
            current = s;
        }
        if deltas.is_empty() {
            return 1.0;
        }
        let mean_accept =
            |t: f64| deltas.iter().map(|d| (-d / t).exp()).sum::<f64>() / deltas.len() as f64;
        let (mut lo, mut hi): (f64, f64) = (1e-3, 1e6);
        for _ in 0..100 {
            let mid = (lo * hi).sqrt();
            if mean_accept(mid) < TARGET_UPHILL_ACCEPTANCE {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    fn run(&self, cfg: &AnnealConfig, restart: usize) -> (RestartSummary, State) {
        let mut rng = stream_rng(cfg.seed, restart as u64);
        let mut temp = match cfg.temperature {
            Temperature::Auto => self.calibrate(&mut rng),
            Temperature::Fixed(t) => t,
        };
        let initial_temperature = temp;
        let mut state = State::random(self.n, self.arity, &mut rng);
        let mut out = vec![0u32; self.n];
        let mut candidate = vec![0u32; self.n];
        let mut scratch = Scratch::default();
        let mut current = self.score(&state, &mut out);
        let initial = current;
        let mut best = current;
        let mut best_state = (state.fwd.clone(), state.inv.clone());

        let stage = (cfg.steps / COOLING_STAGES).max(1);
        let early = (cfg.steps / 100).max(1);
        let trace_every = (cfg.steps / 100).max(1);
        let mut accept_table: Vec<f64> = (0..=self.n).map(|d| (-(d as f64) / temp).exp()).collect();
        let (mut uphill_proposed, mut uphill_accepted) = (0u64, 0u64);
        let mut trace = vec![TracePoint {
            step: 0,
            current,
            best,
        }];

        for step in 1..=cfg.steps {
            if best == 0 {
                break;
            }
            if step % stage == 0 {
                temp *= cfg.cooling;
                for (d, slot) in accept_table.iter_mut().enumerate() {
                    *slot = (-(d as f64) / temp).exp();
                }
            }
            let (k, a, b) = self.propose(&mut rng, &state, &out, &mut scratch);
            state.apply(k, a, b);
            let s = self.score(&state, &mut candidate);
            let accept = if s <= current {
                true
            } else {
                let ok = rng.random::<f64>() < accept_table[s - current];
                if step <= early {
                    uphill_proposed += 1;
                    uphill_accepted += u64::from(ok);
                }
                ok
            };
            if accept {
                current = s;
                std::mem::swap(&mut out, &mut candidate);
                if s < best {
                    best = s;
                    best_state = (state.fwd.clone(), state.inv.clone());
                }
            } else {
                state.apply(k, a, b);
            }
            if step % trace_every == 0 {
                trace.push(TracePoint {
                    step,
                    current,
                    best,
                });
            }
        }
        let summary = RestartSummary {
            restart,
            initial,
            best,
            initial_temperature,
            early_uphill_acceptance: if uphill_proposed == 0 {
                0.0
            } else {
                uphill_accepted as f64 / uphill_proposed as f64
            },
            trace,
        };
        (
            summary,
            State {
                fwd: best_state.0,
                inv: best_state.1,
            },
        )
    }
}

/// Metropolis annealing with `cfg.restarts` independent chains; restart `k` uses stream `k` of
/// `cfg.seed`, and the best chain wins (lowest index on ties).
pub fn solve(w: &Word, target: &Permutation, cfg: &AnnealConfig) -> Result<AnnealResult> {
    cfg.validate()?;
    check_instance(w, target)?;
    if !w.has_variables() {
        return Err(Error::invalid("word has no variables"));
    }
    let n = w.degree();
    if n < 2 {
        return Err(Error::invalid("annealing needs n >= 2"));
    }
    let start = Instant::now();
    let compiled = CompiledWord::new(w);
    let chain = Chain {
        word: &compiled,
        target: target.images(),
        n,
        arity: w.max_variable(),
        moves: cfg.moves,
    };
    let runs: Vec<(RestartSummary, State)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| chain.run(cfg, k))
        .collect();
    let best_restart = runs
        .iter()
        .min_by_key(|(s, _)| (s.best, s.restart))
        .map(|(s, _)| s.restart)
        .expect("at least one restart");
    let (summaries, states): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let best_state = &states[best_restart];
    let best_raw_distance = summaries[best_restart].best;
    Ok(AnnealResult {
        best_assignment: best_state
            .fwd
            .iter()
            .map(|f| Permutation::from_images_unchecked(f.clone()))
            .collect(),
        best_raw_distance,
        best_normalized_distance: best_raw_distance as f64 / n as f64,
        best_restart,
        restarts: summaries,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn quick(seed: u64) -> AnnealConfig {
        AnnealConfig {
            steps: 20_000,
            restarts: 2,
            seed,
            ..AnnealConfig::default()
        }
    }

    #[test]
    fn objective_examples() {
        let tau = Permutation::parse("(1 3 4)(2 5)", 6).unwrap();
        let x = Word::parse("x", 6, 1).unwrap();
        assert_eq!(objective(&x, std::slice::from_ref(&tau), &tau).unwrap(), 0);
        let off = tau
            .compose(&Permutation::parse("(1 2)", 6).unwrap())
            .unwrap();
        assert_eq!(objective(&x, &[off], &tau).unwrap(), 2);
        assert!(objective(&x, std::slice::from_ref(&tau), &Permutation::identity(5)).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let sq = Word::parse("x^2", 4, 1).unwrap();
        let t = Permutation::parse("(1 2)", 4).unwrap();
        // squares in S_4: e, 3-cycles, (2,2)-types; closest to (1 2) are e and (1 2)(3 4)
        assert_eq!(brute_force_min(&sq, &t).unwrap(), 2);
        let x = Word::parse("x", 5, 1).unwrap();
        assert_eq!(brute_force_min(&x, &Permutation::long_cycle(5)).unwrap(), 0);
        assert!(brute_force_min(&Word::parse("x y", 4, 2).unwrap(), &t).is_err());
        assert!(brute_force_min(
            &Word::parse("x", 11, 1).unwrap(),
            &Permutation::identity(11)
        )
        .is_err());
    }

    #[test]
    fn primitive_word_is_solved() {
        let mut rng = stream_rng(5, 0);
        let target = Permutation::random(20, &mut rng);
        let r = solve(&Word::parse("x", 20, 1).unwrap(), &target, &quick(1)).unwrap();
        assert_eq!(r.best_raw_distance, 0);
        assert_eq!(
            objective(
                &Word::parse("x", 20, 1).unwrap(),
                &r.best_assignment,
                &target
            )
            .unwrap(),
            0
        );
    }

    #[test]
    fn reproducible_and_consistent() {
        let mut rng = stream_rng(6, 0);
        let sigma = Permutation::random(12, &mut rng);
        let target = Permutation::random(12, &mut rng);
        let w = Word::parse(&format!("x^2 {} x^-1", sigma), 12, 1).unwrap();
        let a = solve(&w, &target, &quick(3)).unwrap();
        let b = solve(&w, &target, &quick(3)).unwrap();
        assert_eq!(a.restarts, b.restarts);
        assert_eq!(a.best_assignment, b.best_assignment);
        assert_eq!(
            objective(&w, &a.best_assignment, &target).unwrap(),
            a.best_raw_distance
        );
        for r in &a.restarts {
            assert!(r.best <= r.initial);
        }
    }

    #[test]
    fn config_validation() {
        let bad = AnnealConfig {
            cooling: 1.0,
            ..AnnealConfig::default()
        };
        assert!(bad.validate().is_err());
        let w = Word::parse("(1 2)", 3, 0).unwrap();
        assert!(solve(&w, &Permutation::identity(3), &quick(0)).is_err());
    }
}
