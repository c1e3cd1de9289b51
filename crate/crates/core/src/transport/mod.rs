//! Exact Kantorovich–Rubinstein distances between finitely supported measures on `S_n^d`.
//!
//! Ground costs are raw Hamming counts (summed over coordinates for tuples), so the transport
//! problem is integral; the optimum is divided by `n` and the common mass scale once at the end.

mod coupling;
mod solver;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::eval::{Atom, Distribution, DistributionKind, Fraction};
use crate::perm::{self, Permutation};
use crate::{Error, Rational, Result, ENUMERATION_BUDGET};

pub use coupling::{coupling_class_to_ncycles, COUPLING_EXACT_MAX_N};

/// Largest `|supp(μ)|·|supp(ν)|` handed to the solver.
pub const TRANSPORT_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ground {
    /// Normalized Hamming distance on `S_n`.
    Hamming,
    /// Sum of coordinate Hamming distances on `S_n^d`.
    L1Product,
}

impl Ground {
    /// The natural ground metric for a given arity.
    pub fn for_arity(d: usize) -> Ground {
        if d == 1 {
            Ground::Hamming
        } else {
            Ground::L1Product
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub i: usize,
    pub j: usize,
    pub mass: Fraction,
}

/// A coupling between two measures together with its cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub n: usize,
    pub left: Vec<Atom>,
    pub right: Vec<Atom>,
    pub flows: Vec<Flow>,
    pub cost: Fraction,
}

impl TransportPlan {
    pub fn cost(&self) -> Rational {
        self.cost.into()
    }

    /// Plan from `(left atom, right atom, weight)` triples; the cost is recomputed.
    pub fn from_triples(
        n: usize,
        triples: impl IntoIterator<Item = (Atom, Atom, Rational)>,
    ) -> Self {
        let mut joint: BTreeMap<(Atom, Atom), Rational> = BTreeMap::new();
        for (a, b, w) in triples {
            *joint.entry((a, b)).or_insert_with(Rational::zero) += w;
        }
        let mut left: Vec<Atom> = joint.keys().map(|(a, _)| a.clone()).collect();
        let mut right: Vec<Atom> = joint.keys().map(|(_, b)| b.clone()).collect();
        left.sort();
        left.dedup();
        right.sort();
        right.dedup();
        let mut cost = Rational::zero();
        let flows = joint
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|((a, b), w)| {
                cost += w * Rational::new(a.l1_hamming_raw(&b) as i128, n as i128);
                Flow {
                    i: left.binary_search(&a).expect("left atom"),
                    j: right.binary_search(&b).expect("right atom"),
                    mass: w.into(),
                }
            })
            .collect();
        TransportPlan {
            n,
            left,
            right,
            flows,
            cost: cost.into(),
        }
    }

    /// Left and right marginals of the plan.
    pub fn marginals(&self) -> (BTreeMap<Atom, Rational>, BTreeMap<Atom, Rational>) {
        let mut l: BTreeMap<Atom, Rational> = BTreeMap::new();
        let mut r: BTreeMap<Atom, Rational> = BTreeMap::new();
        for f in &self.flows {
            let w: Rational = f.mass.into();
            *l.entry(self.left[f.i].clone())
                .or_insert_with(Rational::zero) += w;
            *r.entry(self.right[f.j].clone())
                .or_insert_with(Rational::zero) += w;
        }
        (l, r)
    }

    /// Exact check that the plan couples `mu` with `nu` and that its stated cost matches the
    /// flows.
    pub fn verify(&self, mu: &Distribution, nu: &Distribution) -> Result<()> {
        let (l, r) = self.marginals();
        let matches = |side: &BTreeMap<Atom, Rational>, d: &Distribution| {
            side.len() == d.support_len()
                && d.iter().all(|(a, _)| side.get(a) == Some(&d.weight(a)))
        };
        if self.flows.iter().any(|f| f.mass.num < 0) {
            return Err(Error::invalid("negative flow"));
        }
        if !matches(&l, mu) {
            return Err(Error::invalid("left marginal differs"));
        }
        if !matches(&r, nu) {
            return Err(Error::invalid("right marginal differs"));
        }
        let cost: Rational = self
            .flows
            .iter()
            .map(|f| {
                Rational::from(f.mass)
                    * Rational::new(
                        self.left[f.i].l1_hamming_raw(&self.right[f.j]) as i128,
                        self.n as i128,
                    )
            })
            .sum();
        if cost != self.cost() {
            return Err(Error::invalid("stated cost differs from flows"));
        }
        Ok(())
    }
}

fn check_ground(mu: &Distribution, ground: Ground) -> Result<()> {
    if ground == Ground::Hamming && mu.arity() != 1 {
        return Err(Error::invalid(
            "Hamming ground needs arity 1; use L1Product",
        ));
    }
    Ok(())
}

/// Common integer scale: masses become `m · (L / total)` with `L = lcm(totals)`.
fn scaled(mu: &Distribution, nu: &Distribution) -> Result<(u128, Vec<u128>, Vec<u128>)> {
    let (a, b) = (u128::from(mu.total()), u128::from(nu.total()));
    let l = a.lcm(&b);
    let supply = mu.iter().map(|(_, m)| u128::from(m) * (l / a)).collect();
    let demand = nu.iter().map(|(_, m)| u128::from(m) * (l / b)).collect();
    Ok((l, supply, demand))
}

fn cost_matrix(left: &[&Atom], right: &[&Atom]) -> Vec<u32> {
    let mut cost = Vec::with_capacity(left.len() * right.len());
    for a in left {
        for b in right {
            cost.push(a.l1_hamming_raw(b) as u32);
        }
    }
    cost
}

fn ratio(num: u128, den: u128) -> Result<Rational> {
    let num = i128::try_from(num).map_err(|_| Error::Overflow("transport value"))?;
    let den = i128::try_from(den).map_err(|_| Error::Overflow("transport value"))?;
    Ok(Rational::new(num, den))
}

/// Exact optimal transport cost between `mu` and `nu` with an optimal plan.
///
/// The solver's dual certificate is checked before returning.
pub fn kr_exact(
    mu: &Distribution,
    nu: &Distribution,
    ground: Ground,
) -> Result<(Rational, TransportPlan)> {
    mu.check_compatible(nu)?;
    check_ground(mu, ground)?;
    let size = mu.support_len().saturating_mul(nu.support_len());
    if size > TRANSPORT_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "transport problem size",
            required: size as u128,
            limit: TRANSPORT_BUDGET as u128,
        });
    }
    let left: Vec<&Atom> = mu.iter().map(|(a, _)| a).collect();
    let right: Vec<&Atom> = nu.iter().map(|(a, _)| a).collect();
    let (l, supply, demand) = scaled(mu, nu)?;
    let cost = cost_matrix(&left, &right);
    let sol = solver::solve(&supply, &demand, &cost);
    if !sol.certify(&supply, &demand, &cost) {
        return Err(Error::invalid(
            "transport solver failed its optimality certificate",
        ));
    }
    let n = mu.degree() as u128;
    let value = ratio(
        sol.cost,
        l.checked_mul(n).ok_or(Error::Overflow("transport value"))?,
    )?;
    let flows = sol
        .flows
        .iter()
        .map(|&(i, j, f)| {
            Ok(Flow {
                i,
                j,
                mass: ratio(f, l)?.into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let plan = TransportPlan {
        n: mu.degree(),
        left: left.into_iter().cloned().collect(),
        right: right.into_iter().cloned().collect(),
        flows,
        cost: value.into(),
    };
    Ok((value, plan))
}

/// Lower bound on the KR distance between two conjugation-invariant measures on `S_n`.
///
/// Atoms are merged by conjugacy class and classes `A`, `B` are charged
/// `min_{τ ∈ B} d(rep_A, τ)`, which by bi-invariance of the Hamming metric is the least distance
/// between the two classes.
pub fn kr_class_quotient_lower_bound(mu: &Distribution, nu: &Distribution) -> Result<Rational> {
    mu.check_compatible(nu)?;
    if mu.arity() != 1 {
        return Err(Error::invalid("class quotient needs arity 1"));
    }
    if !mu.is_conjugation_invariant() || !nu.is_conjugation_invariant() {
        return Err(Error::invalid(
            "class quotient needs conjugation-invariant measures",
        ));
    }
    let n = mu.degree();
    if perm::factorial(n) > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "class quotient",
            required: perm::factorial(n),
            limit: ENUMERATION_BUDGET,
        });
    }
    let by_class = |d: &Distribution| -> Result<Distribution> {
        let mut masses: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        for (a, m) in d.iter() {
            *masses.entry(a.0[0].cycle_type()).or_insert(0) += m;
        }
        Distribution::from_masses(
            n,
            1,
            DistributionKind::Exact,
            masses
                .into_iter()
                .map(|(t, m)| Ok((Atom::single(Permutation::with_cycle_type(&t)?), m)))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    let (qmu, qnu) = (by_class(mu)?, by_class(nu)?);
    let all = perm::all_permutations(n);
    let left: Vec<&Atom> = qmu.iter().map(|(a, _)| a).collect();
    let right: Vec<&Atom> = qnu.iter().map(|(a, _)| a).collect();
    let mut cost = Vec::with_capacity(left.len() * right.len());
    for a in &left {
        for b in &right {
            let t = b.0[0].cycle_type();
            let best = all
                .iter()
                .filter(|p| p.cycle_type() == t)
                .map(|p| a.0[0].hamming_raw_unchecked(p))
                .min()
                .unwrap_or(0);
            cost.push(best as u32);
        }
    }
    let (l, supply, demand) = scaled(&qmu, &qnu)?;
    let sol = solver::solve(&supply, &demand, &cost);
    ratio(sol.cost, l * n as u128)
}

/// `(ln n + 1) / n`.
pub fn ncycle_bound(n: usize) -> f64 {
    ((n as f64).ln() + 1.0) / n as f64
}

/// `H_n / n` with `H_n = 1 + 1/2 + … + 1/n`: the expected cost of the class-wise coupling between
/// the uniform measure and the `n`-cycles.
pub fn harmonic_coupling_cost(n: usize) -> Result<Rational> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let mut h = BigRational::zero();
    for k in 1..=n {
        h += BigRational::new(BigInt::one(), BigInt::from(k));
    }
    h /= BigInt::from(n);
    match (h.numer().to_i128(), h.denom().to_i128()) {
        (Some(a), Some(b)) => Ok(Rational::new(a, b)),
        _ => Err(Error::Overflow("harmonic number")),
    }
}

/// Support size against `(n!)^{(1-√ε)d}` (constant taken as 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportDiagnostic {
    pub support: usize,
    pub epsilon: f64,
    pub threshold: f64,
    pub log10_threshold: f64,
    /// `support / threshold`.
    pub ratio: f64,
    /// `√KR`, an upper bound on the Lévy–Prokhorov distance, when a KR value was supplied.
    pub levy_prokhorov_bound: Option<f64>,
}

pub fn support_diagnostic(
    dist: &Distribution,
    epsilon: f64,
    kr: Option<Rational>,
) -> Result<SupportDiagnostic> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid("epsilon must lie in [0, 1]"));
    }
    let log10_fact: f64 = (1..=dist.degree()).map(|k| (k as f64).log10()).sum();
    let log10_threshold = (1.0 - epsilon.sqrt()) * dist.arity() as f64 * log10_fact;
    let threshold = 10f64.powf(log10_threshold);
    let support = dist.support_len();
    Ok(SupportDiagnostic {
        support,
        epsilon,
        threshold,
        log10_threshold,
        ratio: 10f64.powf((support as f64).log10() - log10_threshold),
        levy_prokhorov_bound: kr.map(|v| v.to_f64().unwrap_or(f64::NAN).sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str, n: usize) -> Permutation {
        Permutation::parse(text, n).unwrap()
    }

    #[test]
    fn point_masses() {
        let a = Distribution::delta(p("(1 2 3)", 4));
        let b = Distribution::delta(p("(1 2)", 4));
        let (v, plan) = kr_exact(&a, &b, Ground::Hamming).unwrap();
        assert_eq!(v, p("(1 2 3)", 4).hamming(&p("(1 2)", 4)).unwrap());
        plan.verify(&a, &b).unwrap();
        assert_eq!(
            kr_exact(&a, &a, Ground::Hamming).unwrap().0,
            Rational::zero()
        );
    }

    #[test]
    fn class_to_ncycles_lemma_value() {
        let class = Distribution::class_uniform(&p("(1 2)", 4)).unwrap();
        let cyc = Distribution::ncycles(4).unwrap();
        let (v, plan) = kr_exact(&class, &cyc, Ground::Hamming).unwrap();
        assert_eq!(v, Rational::new(3, 4));
        plan.verify(&class, &cyc).unwrap();
    }

    #[test]
    fn mismatches_and_guards() {
        let a = Distribution::delta(p("e", 3));
        let b = Distribution::delta(p("e", 4));
        assert!(kr_exact(&a, &b, Ground::Hamming).is_err());
        let pair = Distribution::product_uniform(2, 2).unwrap();
        assert!(kr_exact(&pair, &pair, Ground::Hamming).is_err());
        assert_eq!(
            kr_exact(&pair, &pair, Ground::L1Product).unwrap().0,
            Rational::zero()
        );
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic_coupling_cost(1).unwrap(), Rational::one());
        assert_eq!(harmonic_coupling_cost(4).unwrap(), Rational::new(25, 48));
        assert!((ncycle_bound(4) - (4f64.ln() + 1.0) / 4.0).abs() < 1e-15);
        assert!(harmonic_coupling_cost(60).is_ok());
    }

    #[test]
    fn quotient_bound_is_below_exact() {
        for n in 3..=4 {
            let u = Distribution::uniform(n).unwrap();
            let c = Distribution::ncycles(n).unwrap();
            let lb = kr_class_quotient_lower_bound(&u, &c).unwrap();
            let exact = kr_exact(&u, &c, Ground::Hamming).unwrap().0;
            assert!(lb <= exact, "n={n}: {lb} > {exact}");
        }
    }

    #[test]
    fn diagnostics() {
        let d = Distribution::delta(p("(1 2)", 3));
        let r = support_diagnostic(&d, 1.0, None).unwrap();
        assert_eq!((r.support, r.threshold), (1, 1.0));
        let u = Distribution::uniform(3).unwrap();
        let r = support_diagnostic(&u, 0.0, Some(Rational::new(1, 4))).unwrap();
        assert_eq!(r.support, 6);
        assert!((r.threshold - 6.0).abs() < 1e-9);
        assert_eq!(r.levy_prokhorov_bound, Some(0.5));
        assert!(support_diagnostic(&u, 1.5, None).is_err());
    }

    #[test]
    fn plan_json_uses_fractions() {
        let a = Distribution::delta(p("(1 2)", 3));
        let b = Distribution::delta(p("e", 3));
        let (_, plan) = kr_exact(&a, &b, Ground::Hamming).unwrap();
        let json = serde_json::to_string(&plan).unwrap();
        assert!(json.contains("\"cost\":{\"num\":2,\"den\":3}"));
    }
}
