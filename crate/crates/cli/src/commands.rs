use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use symword::anneal::{self, AnnealConfig, MoveKind, Temperature};
use symword::bounds::{bound_audit, mc_tail_probs, Estimate};
use symword::eval::{self, cycle_stat_stream, CycleStatSummary, Fraction};
use symword::rng::stream_rng;
use symword::sae::{self, SaeMode, TupleExperiment};
use symword::transport::{self, harmonic_coupling_cost, kr_exact, TransportPlan};
use symword::word::stallings_rank;
use symword::{Classification, Distribution, Ground, Permutation, Rational, SeedPlan, Word};

use crate::report::{csv, emit};
use crate::{measure, Command, GroundArg, ModeArg, MoveArg, RunOptions, WordArgs};

fn workers(opts: &RunOptions) -> usize {
    opts.workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

fn parse_word(a: &WordArgs) -> Result<Word> {
    Word::parse(&a.word, a.n, a.r).with_context(|| format!("word {:?}", a.word))
}

fn decimal(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn run(command: &Command, opts: &RunOptions) -> Result<()> {
    let start = Instant::now();
    let workers = workers(opts);
    let plan = SeedPlan::new(opts.seed, workers);
    let csv_path = opts.csv.as_deref();
    macro_rules! done {
        ($name:expr, $spec:expr, $result:expr) => {
            emit($name, $spec, &$result, opts, workers, start.elapsed())
        };
    }
    match command {
        Command::Classify(a) => {
            let input = parse_word(a)?;
            let word = input.reduce();
            let (core, conjugator) = word.cyclically_reduce()?;
            let result = ClassifyResult {
                input: input.to_string(),
                reduced: word.to_string(),
                cyclic_core: core.to_string(),
                conjugator: conjugator.to_string(),
                classification: word.classify()?,
            };
            done!("classify", a, result)
        }
        Command::ExactDist(a) => {
            let dist = eval::exact_distribution(&parse_word(a)?)?;
            csv(csv_path, weight_rows(&dist))?;
            done!("exact-dist", a, dist)
        }
        Command::SampleDist(a) => {
            let word = parse_word(&a.word)?;
            let dist = if a.symmetrize {
                eval::symmetrized_sample(&word, a.samples, plan)?
            } else {
                eval::sample_distribution(&word, a.samples, plan)?
            };
            csv(csv_path, weight_rows(&dist))?;
            done!("sample-dist", a, dist)
        }
        Command::Kr(a) => {
            let left = measure::parse(&a.left, a.n, a.r).context("left measure")?;
            let right = measure::parse(&a.right, a.n, a.r).context("right measure")?;
            let ground = match a.ground {
                Some(GroundArg::Hamming) => Ground::Hamming,
                Some(GroundArg::L1Product) => Ground::L1Product,
                None => Ground::for_arity(left.arity()),
            };
            let (value, tp) = kr_exact(&left, &right, ground)?;
            if let Some(path) = csv_path {
                csv(Some(path), flow_rows(&tp))?;
            }
            let result = KrResult {
                value: value.into(),
                decimal: decimal(value),
                ground,
                left_support: left.support_len(),
                right_support: right.support_len(),
                plan: a.plan.then_some(tp),
            };
            done!("kr", a, result)
        }
        Command::NcycleCoupling(a) => {
            let rep = Permutation::parse(&a.class, a.n)?;
            let tp = transport::coupling_class_to_ncycles(&rep, a.samples, plan)?;
            let cycles = rep.num_cycles();
            let exact_kr = if a.check {
                let class = Distribution::class_uniform(&rep)?;
                Some(Fraction::from(
                    kr_exact(&class, &Distribution::ncycles(a.n)?, Ground::Hamming)?.0,
                ))
            } else {
                None
            };
            if let Some(path) = csv_path {
                csv(Some(path), flow_rows(&tp))?;
            }
            let result = CouplingResult {
                cycle_type: rep.cycle_type(),
                cycles,
                exact_coupling: a.n <= transport::COUPLING_EXACT_MAX_N,
                cost: tp.cost,
                cost_decimal: decimal(tp.cost()),
                cycles_over_n: Rational::new(cycles as i128, a.n as i128).into(),
                harmonic_bound: harmonic_coupling_cost(a.n)?.into(),
                log_bound: transport::ncycle_bound(a.n),
                exact_kr,
                plan: a.plan.then_some(tp),
            };
            done!("ncycle-coupling", a, result)
        }
        Command::BoundCheck(a) => {
            let report = bound_audit(&parse_word(&a.word)?, a.h, a.d_max, a.samples, plan)?;
            csv(
                csv_path,
                report.cases.iter().map(|c| AuditRow {
                    d: c.d,
                    subset_id: c.subset_id,
                    subset: c
                        .subset
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(" "),
                    hits: c.estimate.hits,
                    estimate: c.estimate.estimate,
                    sigma: c.estimate.sigma,
                    corollary_bound: c.corollary_bound,
                    lemma_bound: c.lemma_bound,
                    pass: c.pass,
                }),
            )?;
            done!("bound-check", a, report)
        }
        Command::Tail(a) => {
            let word = parse_word(&a.word)?;
            let estimates = mc_tail_probs(&word, a.h, &a.thresholds, a.samples, plan)?;
            let summary = cycle_stat_stream(&word, a.samples, a.h, &a.thresholds, plan)?;
            let rows: Vec<TailRow> = a
                .thresholds
                .iter()
                .zip(&estimates)
                .map(|(&f, e)| TailRow { f, estimate: *e })
                .collect();
            csv(
                csv_path,
                rows.iter().map(|r| TailCsv {
                    f: r.f,
                    hits: r.estimate.hits,
                    estimate: r.estimate.estimate,
                    ci_low: r.estimate.ci_low,
                    ci_high: r.estimate.ci_high,
                }),
            )?;
            done!(
                "tail",
                a,
                TailResult {
                    tails: rows,
                    summary
                }
            )
        }
        Command::Anneal(a) => {
            let word = parse_word(&a.word)?;
            let target = if a.target.trim() == "random" {
                Permutation::random(a.word.n, &mut stream_rng(opts.seed, u64::MAX - 1))
            } else {
                Permutation::parse(&a.target, a.word.n)?
            };
            let temperature = match a.temperature.trim() {
                "auto" => Temperature::Auto,
                t => Temperature::Fixed(t.parse().with_context(|| format!("temperature {t:?}"))?),
            };
            let cfg = AnnealConfig {
                steps: a.steps,
                restarts: a.restarts,
                temperature,
                cooling: a.cooling,
                moves: match a.moves {
                    MoveArg::Transposition => MoveKind::Transposition,
                    MoveArg::Adjacent => MoveKind::Adjacent,
                    MoveArg::Focused => MoveKind::Focused,
                },
                seed: opts.seed,
            };
            let result = anneal::solve(&word, &target, &cfg)?;
            csv(
                csv_path,
                result.restarts.iter().flat_map(|r| {
                    r.trace.iter().map(move |t| TraceCsv {
                        restart: r.restart,
                        step: t.step,
                        current: t.current,
                        best: t.best,
                    })
                }),
            )?;
            done!(
                "anneal",
                a,
                AnnealReport {
                    target: target.to_string(),
                    config: cfg,
                    result
                }
            )
        }
        Command::Sae(a) => {
            let tuple = TupleExperiment::parse(&a.words, a.r)?;
            let mode = match a.mode {
                ModeArg::Exact => SaeMode::Exact,
                ModeArg::Sampled => SaeMode::Sampled(a.samples),
            };
            let estimates =
                a.n.iter()
                    .enumerate()
                    .map(|(k, &n)| sae::sae_estimate(&tuple, n, mode, plan.derive(k as u64)))
                    .collect::<symword::Result<Vec<_>>>()?;
            csv(
                csv_path,
                estimates.iter().map(|e| SaeCsv {
                    n: e.n,
                    value: e.value,
                    baseline: e.baseline,
                    support: e.support,
                }),
            )?;
            done!("sae", a, estimates)
        }
        Command::Sofic(a) => {
            let tuple = TupleExperiment::parse(&a.words, a.r)?;
            let battery = symword::FreeWord::battery(tuple.arity(), a.max_len);
            let report = sae::sofic_check(&tuple, &a.degrees, a.samples, plan, Some(&battery))?;
            csv(csv_path, report.rows.iter())?;
            done!("sofic", a, report)
        }
        Command::Fold(a) => {
            let tuple = TupleExperiment::parse(&a.words, a.r)?;
            let rank = stallings_rank(&tuple.words)?;
            let freeness = sae::freeness_report(&tuple)?;
            done!("fold", a, FoldResult { rank, freeness })
        }
    }
}

#[derive(Serialize)]
struct ClassifyResult {
    input: String,
    reduced: String,
    cyclic_core: String,
    conjugator: String,
    classification: Classification,
}

#[derive(Serialize)]
struct KrResult {
    value: Fraction,
    decimal: f64,
    ground: Ground,
    left_support: usize,
    right_support: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<TransportPlan>,
}

#[derive(Serialize)]
struct CouplingResult {
    cycle_type: Vec<usize>,
    cycles: usize,
    exact_coupling: bool,
    cost: Fraction,
    cost_decimal: f64,
    cycles_over_n: Fraction,
    harmonic_bound: Fraction,
    log_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_kr: Option<Fraction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<TransportPlan>,
}

#[derive(Serialize)]
struct AuditRow {
    d: usize,
    subset_id: usize,
    subset: String,
    hits: u64,
    estimate: f64,
    sigma: f64,
    corollary_bound: f64,
    lemma_bound: f64,
    pass: bool,
}

#[derive(Serialize)]
struct TailRow {
    f: usize,
    estimate: Estimate,
}

#[derive(Serialize)]
struct TailResult {
    tails: Vec<TailRow>,
    summary: CycleStatSummary,
}

#[derive(Serialize)]
struct TailCsv {
    f: usize,
    hits: u64,
    estimate: f64,
    ci_low: f64,
    ci_high: f64,
}

#[derive(Serialize)]
struct TraceCsv {
    restart: usize,
    step: u64,
    current: usize,
    best: usize,
}

#[derive(Serialize)]
struct SaeCsv {
    n: usize,
    value: f64,
    baseline: Option<f64>,
    support: usize,
}

#[derive(Serialize)]
struct AnnealReport {
    target: String,
    config: AnnealConfig,
    result: anneal::AnnealResult,
}

#[derive(Serialize)]
struct FoldResult {
    rank: usize,
    freeness: sae::FreenessReport,
}

#[derive(Serialize)]
struct WeightRow {
    atom: String,
    weight: String,
    decimal: f64,
}

fn weight_rows(dist: &Distribution) -> Vec<WeightRow> {
    dist.iter()
        .map(|(atom, _)| {
            let w = dist.weight(atom);
            WeightRow {
                atom: atom
                    .0
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(" ; "),
                weight: w.to_string(),
                decimal: decimal(w),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct FlowRow {
    left: usize,
    right: usize,
    mass: String,
}

fn flow_rows(tp: &TransportPlan) -> Vec<FlowRow> {
    tp.flows
        .iter()
        .map(|f| FlowRow {
            left: f.i,
            right: f.j,
            mass: Rational::from(f.mass).to_string(),
        })
        .collect()
}
