use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use num_traits::Signed;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::perm::{self, Permutation};
use crate::{Error, Rational, Result, ENUMERATION_BUDGET};

/// A point of `S_n^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Atom(pub Vec<Permutation>);

impl Atom {
    pub fn single(p: Permutation) -> Self {
        Atom(vec![p])
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Diagonal conjugation by `g`.
    pub fn conjugate(&self, g: &Permutation) -> Atom {
        let g_inv = g.inverse();
        Atom(self.0.iter().map(|p| g_inv.then(p).then(g)).collect())
    }

    /// Sum of coordinate-wise raw Hamming distances.
    pub fn l1_hamming_raw(&self, other: &Atom) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.hamming_raw_unchecked(b))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Exact,
    Empirical,
}

/// Finitely supported probability measure on `S_n^d`, stored as integer masses over a common
/// total. Exact measures are stored in lowest terms and have `weight = mass / total` exactly; empirical ones hold sample counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    n: usize,
    arity: usize,
    kind: DistributionKind,
    masses: BTreeMap<Atom, u64>,
    total: u64,
}

impl Distribution {
    pub fn from_masses(
        n: usize,
        arity: usize,
        kind: DistributionKind,
        masses: impl IntoIterator<Item = (Atom, u64)>,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::invalid("arity must be positive"));
        }
        let mut map: BTreeMap<Atom, u64> = BTreeMap::new();
        let mut total: u64 = 0;
        for (atom, mass) in masses {
            if atom.arity() != arity {
                return Err(Error::ArityMismatch {
                    left: arity,
                    right: atom.arity(),
                });
            }
            if let Some(p) = atom.0.iter().find(|p| p.degree() != n) {
                return Err(Error::DegreeMismatch {
                    left: n,
                    right: p.degree(),
                });
            }
            if mass == 0 {
                continue;
            }
            total = total
                .checked_add(mass)
                .ok_or(Error::Overflow("distribution total"))?;
            *map.entry(atom).or_insert(0) += mass;
        }
        if total == 0 {
            return Err(Error::invalid("distribution has no mass"));
        }
        Ok(Distribution {
            n,
            arity,
            kind,
            masses: map,
            total,
        }
        .canonical())
    }

    pub(crate) fn from_counts_unchecked(
        n: usize,
        arity: usize,
        kind: DistributionKind,
        counts: HashMap<Atom, u64>,
    ) -> Self {
        let total = counts.values().sum();
        Distribution {
            n,
            arity,
            kind,
            masses: counts.into_iter().collect(),
            total,
        }
        .canonical()
    }

    /// Exact measures are kept in lowest terms so equal measures compare equal.
    fn canonical(self) -> Self {
        match self.kind {
            DistributionKind::Exact => self.normalized(),
            DistributionKind::Empirical => self,
        }
    }

    pub fn delta(p: Permutation) -> Self {
        let n = p.degree();
        Self::from_masses(n, 1, DistributionKind::Exact, [(Atom::single(p), 1)])
            .expect("valid point mass")
    }

    /// Uniform on a set of permutations (duplicates collapse).
    pub fn uniform_on(n: usize, perms: impl IntoIterator<Item = Permutation>) -> Result<Self> {
        let mut set: BTreeMap<Atom, u64> = BTreeMap::new();
        for p in perms {
            set.insert(Atom::single(p), 1);
        }
        Self::from_masses(n, 1, DistributionKind::Exact, set)
    }

    fn check_enumerable(n: usize) -> Result<()> {
        let size = perm::factorial(n);
        if size > ENUMERATION_BUDGET {
            return Err(Error::BudgetExceeded {
                what: "enumerating S_n",
                required: size,
                limit: ENUMERATION_BUDGET,
            });
        }
        Ok(())
    }

    /// Uniform measure on `S_n`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::check_enumerable(n)?;
        Self::uniform_on(n, perm::all_permutations(n))
    }

    /// Uniform measure on the conjugacy class of `rep`.
    pub fn class_uniform(rep: &Permutation) -> Result<Self> {
        let n = rep.degree();
        Self::check_enumerable(n)?;
        let t = rep.cycle_type();
        Self::uniform_on(
            n,
            perm::all_permutations(n)
                .into_iter()
                .filter(|p| p.cycle_type() == t),
        )
    }

    /// Uniform measure on the `n`-cycles.
    pub fn ncycles(n: usize) -> Result<Self> {
        Self::class_uniform(&Permutation::long_cycle(n))
    }

    /// Uniform measure on `S_n^d`.
    pub fn product_uniform(n: usize, d: usize) -> Result<Self> {
        let size = perm::factorial(n)
            .checked_pow(d as u32)
            .unwrap_or(u128::MAX);
        if size > ENUMERATION_BUDGET {
            return Err(Error::BudgetExceeded {
                what: "enumerating S_n^d",
                required: size,
                limit: ENUMERATION_BUDGET,
            });
        }
        let all = perm::all_permutations(n);
        let mut atoms: Vec<Vec<Permutation>> = vec![Vec::new()];
        for _ in 0..d {
            atoms = atoms
                .into_iter()
                .flat_map(|prefix| {
                    all.iter().map(move |p| {
                        let mut a = prefix.clone();
                        a.push(p.clone());
                        a
                    })
                })
                .collect();
        }
        Self::from_masses(
            n,
            d,
            DistributionKind::Exact,
            atoms.into_iter().map(|a| (Atom(a), 1)),
        )
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn support_len(&self) -> usize {
        self.masses.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, u64)> {
        self.masses.iter().map(|(a, &m)| (a, m))
    }

    pub fn mass(&self, atom: &Atom) -> u64 {
        self.masses.get(atom).copied().unwrap_or(0)
    }

    pub fn weight(&self, atom: &Atom) -> Rational {
        Rational::new(self.mass(atom) as i128, self.total as i128)
    }

    /// Weight of a single permutation (arity 1).
    pub fn weight_of(&self, p: &Permutation) -> Rational {
        self.weight(&Atom::single(p.clone()))
    }

    pub fn marginal(&self, k: usize) -> Result<Distribution> {
        if k >= self.arity {
            return Err(Error::invalid(format!(
                "marginal {} of arity {}",
                k, self.arity
            )));
        }
        Self::from_masses(
            self.n,
            1,
            self.kind,
            self.iter().map(|(a, m)| (Atom::single(a.0[k].clone()), m)),
        )
    }

    /// Adds the counts of another empirical sample.
    pub fn merge(&mut self, other: Distribution) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DegreeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        if self.kind != DistributionKind::Empirical || other.kind != DistributionKind::Empirical {
            return Err(Error::invalid("only empirical distributions merge"));
        }
        for (atom, m) in other.masses {
            *self.masses.entry(atom).or_insert(0) += m;
        }
        self.total += other.total;
        Ok(())
    }

    /// Same measure with masses and total divided by their common gcd.
    pub fn normalized(mut self) -> Self {
        let g = self.masses.values().fold(self.total, |g, &m| g.gcd(&m));
        if g > 1 {
            self.masses.values_mut().for_each(|m| *m /= g);
            self.total /= g;
        }
        self
    }

    /// Total-variation distance `½ Σ |μ(a) − ν(a)|`, exact.
    pub fn tv_distance(&self, other: &Distribution) -> Result<Rational> {
        self.check_compatible(other)?;
        let mut sum = Rational::from_integer(0);
        for (a, _) in self.iter() {
            sum += (self.weight(a) - other.weight(a)).abs();
        }
        for (a, _) in other.iter() {
            if !self.masses.contains_key(a) {
                sum += other.weight(a);
            }
        }
        Ok(sum / 2)
    }

    pub(crate) fn check_compatible(&self, other: &Distribution) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DegreeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        Ok(())
    }

    /// Invariance under diagonal conjugation, checked against the generators `(1 2)` and
    /// `(1 2 … n)` of `S_n`.
    pub fn is_conjugation_invariant(&self) -> bool {
        if self.n < 2 {
            return true;
        }
        let gens = [
            Permutation::from_cycle(self.n, &[1, 2]).expect("n >= 2"),
            Permutation::long_cycle(self.n),
        ];
        gens.iter()
            .all(|g| self.iter().all(|(a, m)| self.mass(&a.conjugate(g)) == m))
    }

    /// Conjugation average `Σ(μ)(A) = (1/n!) Σ_σ μ(A^σ)`, computed exactly.
    ///
    /// Arity 1 spreads each class's mass evenly over the class; higher arity averages every atom
    /// over its `n!` diagonal conjugates.
    pub fn symmetrize(&self) -> Result<Distribution> {
        Self::check_enumerable(self.n)?;
        let all = perm::all_permutations(self.n);
        if self.arity == 1 {
            let mut class_mass: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
            for (a, m) in self.iter() {
                *class_mass.entry(a.0[0].cycle_type()).or_insert(0) += m;
            }
            let lcm = class_mass
                .keys()
                .fold(1u128, |l, t| l.lcm(&perm::class_size(t)));
            let lcm = u64::try_from(lcm).map_err(|_| Error::Overflow("symmetrize"))?;
            let total = self
                .total
                .checked_mul(lcm)
                .ok_or(Error::Overflow("symmetrize"))?;
            let mut out = Vec::new();
            for p in all {
                if let Some(&m) = class_mass.get(&p.cycle_type()) {
                    let share = m * (lcm / perm::class_size(&p.cycle_type()) as u64);
                    out.push((Atom::single(p), share));
                }
            }
            let d = Distribution {
                n: self.n,
                arity: 1,
                kind: self.kind,
                masses: out.into_iter().collect(),
                total,
            };
            return Ok(d.normalized());
        }
        let work = self.support_len() as u128 * all.len() as u128;
        if work > ENUMERATION_BUDGET {
            return Err(Error::BudgetExceeded {
                what: "symmetrizing",
                required: work,
                limit: ENUMERATION_BUDGET,
            });
        }
        let mut masses: HashMap<Atom, u64> = HashMap::new();
        for (a, m) in self.iter() {
            for g in &all {
                *masses.entry(a.conjugate(g)).or_insert(0) += m;
            }
        }
        let total = self
            .total
            .checked_mul(all.len() as u64)
            .ok_or(Error::Overflow("symmetrize"))?;
        Ok(Distribution {
            n: self.n,
            arity: self.arity,
            kind: self.kind,
            masses: masses.into_iter().collect(),
            total,
        }
        .normalized())
    }
}

/// Exact fraction as it appears in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: i128,
    pub den: i128,
}

impl From<Rational> for Fraction {
    fn from(r: Rational) -> Self {
        Fraction {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl From<Fraction> for Rational {
    fn from(f: Fraction) -> Self {
        Rational::new(f.num, f.den)
    }
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    perms: Vec<Permutation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<Fraction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    count: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionRecord {
    n: usize,
    d: usize,
    kind: DistributionKind,
    total: u64,
    atoms: Vec<AtomRecord>,
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let atoms = self
            .iter()
            .map(|(a, m)| AtomRecord {
                perms: a.0.clone(),
                weight: (self.kind == DistributionKind::Exact).then(|| self.weight(a).into()),
                count: (self.kind == DistributionKind::Empirical).then_some(m),
            })
            .collect();
        DistributionRecord {
            n: self.n,
            d: self.arity,
            kind: self.kind,
            total: self.total,
            atoms,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = DistributionRecord::deserialize(deserializer)?;
        let masses: Vec<(Atom, u64)> = match rec.kind {
            DistributionKind::Empirical => rec
                .atoms
                .into_iter()
                .map(|a| {
                    a.count
                        .map(|c| (Atom(a.perms), c))
                        .ok_or_else(|| D::Error::custom("empirical atom without count"))
                })
                .collect::<std::result::Result<_, _>>()?,
            DistributionKind::Exact => {
                let weights: Vec<(Atom, Rational)> = rec
                    .atoms
                    .into_iter()
                    .map(|a| match a.weight {
                        Some(f) if f.den > 0 && f.num >= 0 => Ok((Atom(a.perms), f.into())),
                        _ => Err(D::Error::custom("exact atom needs a non-negative weight")),
                    })
                    .collect::<std::result::Result<_, _>>()?;
                let den = weights.iter().fold(1i128, |l, (_, w)| l.lcm(w.denom()));
                let sum: Rational = weights.iter().map(|(_, w)| *w).sum();
                if sum != Rational::from_integer(1) {
                    return Err(D::Error::custom("exact weights must sum to 1"));
                }
                weights
                    .into_iter()
                    .map(|(a, w)| {
                        u64::try_from(w.numer() * (den / w.denom()))
                            .map(|m| (a, m))
                            .map_err(|_| D::Error::custom("weight denominator too large"))
                    })
                    .collect::<std::result::Result<_, _>>()?
            }
        };
        Distribution::from_masses(rec.n, rec.d, rec.kind, masses).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str, n: usize) -> Permutation {
        Permutation::parse(text, n).unwrap()
    }

    #[test]
    fn builders() {
        assert_eq!(Distribution::uniform(4).unwrap().support_len(), 24);
        assert_eq!(Distribution::ncycles(5).unwrap().support_len(), 24);
        assert_eq!(
            Distribution::class_uniform(&p("(1 2)", 4))
                .unwrap()
                .support_len(),
            6
        );
        let pu = Distribution::product_uniform(3, 2).unwrap();
        assert_eq!((pu.support_len(), pu.arity()), (36, 2));
        assert_eq!(pu.marginal(1).unwrap(), Distribution::uniform(3).unwrap());
    }

    #[test]
    fn symmetrize_examples() {
        let id = Distribution::delta(Permutation::identity(3));
        assert_eq!(id.symmetrize().unwrap(), id);
        let t = Distribution::delta(p("(1 2)", 3)).symmetrize().unwrap();
        assert_eq!(t, Distribution::class_uniform(&p("(1 2)", 3)).unwrap());
        for q in ["(1 2)", "(1 3)", "(2 3)"] {
            assert_eq!(t.weight_of(&p(q, 3)), Rational::new(1, 3));
        }
        assert!(t.is_conjugation_invariant());
        assert!(!Distribution::delta(p("(1 2)", 3)).is_conjugation_invariant());
    }

    #[test]
    fn symmetrize_pairs() {
        let a = Atom(vec![p("(1 2)", 3), p("(1 2)", 3)]);
        let d = Distribution::from_masses(3, 2, DistributionKind::Exact, [(a, 1)]).unwrap();
        let s = d.symmetrize().unwrap();
        assert_eq!(s.support_len(), 3);
        assert!(s.is_conjugation_invariant());
        assert_eq!(s.symmetrize().unwrap(), s);
    }

    #[test]
    fn json_round_trip() {
        let d = Distribution::class_uniform(&p("(1 2)", 3)).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"weight\":{\"num\":1,\"den\":3}"));
        let back: Distribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        let bad = json.replace("\"num\":1,\"den\":3", "\"num\":1,\"den\":2");
        assert!(serde_json::from_str::<Distribution>(&bad).is_err());
    }

    #[test]
    fn merge_and_validation() {
        let a = Atom::single(Permutation::identity(2));
        let mut x =
            Distribution::from_masses(2, 1, DistributionKind::Empirical, [(a.clone(), 3)]).unwrap();
        let y =
            Distribution::from_masses(2, 1, DistributionKind::Empirical, [(a.clone(), 2)]).unwrap();
        x.merge(y).unwrap();
        assert_eq!((x.total(), x.mass(&a)), (5, 5));
        assert!(x
            .merge(Distribution::delta(Permutation::identity(2)))
            .is_err());
        assert!(
            Distribution::from_masses(2, 1, DistributionKind::Exact, [(a.clone(), 0)]).is_err()
        );
        assert!(Distribution::from_masses(3, 1, DistributionKind::Exact, [(a, 1)]).is_err());
    }

    #[test]
    fn tv() {
        let u = Distribution::uniform(3).unwrap();
        let d = Distribution::delta(Permutation::identity(3));
        assert_eq!(u.tv_distance(&d).unwrap(), Rational::new(5, 6));
        assert_eq!(u.tv_distance(&u).unwrap(), Rational::from_integer(0));
    }
}
