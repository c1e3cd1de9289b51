//! Permutations of `{1, …, n}`.
//!
//! Points are 1-based in every textual and serialized form and 0-based internally. Composition is
//! left to right: `p.compose(&q)` maps `i` to `q(p(i))`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Rational, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Box<[u32]>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n as u32).collect(),
        }
    }

    /// From 0-based images, checking bijectivity.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::NotAPermutation("degree must be positive".into()));
        }
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::NotAPermutation(format!("{:?}", images)));
            }
        }
        Ok(Permutation {
            images: images.into_boxed_slice(),
        })
    }

    /// From 1-based one-line notation.
    pub fn from_one_line(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let zero_based = images
            .iter()
            .map(|&x| {
                if x == 0 || x > n {
                    Err(Error::PointOutOfRange { point: x, n })
                } else {
                    Ok((x - 1) as u32)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(zero_based)
    }

    pub(crate) fn from_images_unchecked(images: Vec<u32>) -> Self {
        debug_assert!(Self::from_images(images.clone()).is_ok());
        Permutation {
            images: images.into_boxed_slice(),
        }
    }

    /// Product of 1-based cycles, applied left to right. Singleton cycles are allowed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut acc = Self::identity(n);
        for cycle in cycles {
            acc = acc.compose(&Self::from_cycle(n, cycle)?)?;
        }
        Ok(acc)
    }

    pub fn from_cycle(n: usize, cycle: &[usize]) -> Result<Self> {
        let mut images: Vec<u32> = (0..n as u32).collect();
        let mut seen = vec![false; n];
        for &p in cycle {
            if p == 0 || p > n {
                return Err(Error::PointOutOfRange { point: p, n });
            }
            if std::mem::replace(&mut seen[p - 1], true) {
                return Err(Error::NotAPermutation(format!(
                    "point {} repeated in cycle {:?}",
                    p, cycle
                )));
            }
        }
        for (a, b) in cycle.iter().zip(cycle.iter().cycle().skip(1)) {
            images[a - 1] = (b - 1) as u32;
        }
        Ok(Permutation {
            images: images.into_boxed_slice(),
        })
    }

    /// Parses cycle notation such as `"(1 2 3)(4 5)"`, or `"e"` for the identity.
    ///
    /// Cycles are multiplied left to right; entries may be separated by spaces or commas.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed == "e" || trimmed.is_empty() {
            return Ok(Self::identity(n));
        }
        let mut cycles = Vec::new();
        let mut rest = trimmed;
        let mut offset = text.len() - text.trim_start().len();
        while !rest.is_empty() {
            let start = rest.strip_prefix('(').ok_or_else(|| Error::Parse {
                pos: offset,
                msg: "expected '('".into(),
            })?;
            let close = start.find(')').ok_or_else(|| Error::Parse {
                pos: offset,
                msg: "unclosed cycle".into(),
            })?;
            let cycle = start[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        pos: offset,
                        msg: format!("bad point {:?}", t),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if cycle.is_empty() {
                return Err(Error::Parse {
                    pos: offset,
                    msg: "empty cycle".into(),
                });
            }
            cycles.push(cycle);
            let consumed = close + 2;
            let after = &rest[consumed..];
            let trimmed_after = after.trim_start();
            offset += consumed + (after.len() - trimmed_after.len());
            rest = trimmed_after;
        }
        Self::from_cycles(n, &cycles)
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// 0-based image of a 0-based point.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    #[inline]
    pub fn images(&self) -> &[u32] {
        &self.images
    }

    /// 1-based one-line notation.
    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &x)| i == x as usize)
    }

    fn check_degree(&self, other: &Permutation) -> Result<()> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(())
    }

    /// `self` first, then `q`.
    pub fn compose(&self, q: &Permutation) -> Result<Permutation> {
        self.check_degree(q)?;
        Ok(self.then(q))
    }

    pub(crate) fn then(&self, q: &Permutation) -> Permutation {
        Permutation {
            images: self.images.iter().map(|&x| q.images[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Permutation {
            images: inv.into_boxed_slice(),
        }
    }

    /// `g⁻¹ · self · g`, i.e. relabel the points of `self` through `g`.
    pub fn conjugate(&self, g: &Permutation) -> Result<Permutation> {
        self.check_degree(g)?;
        Ok(g.inverse().then(self).then(g))
    }

    pub fn pow(&self, k: i64) -> Permutation {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Permutation::identity(self.degree());
        for _ in 0..k.unsigned_abs() {
            acc = acc.then(&base);
        }
        acc
    }

    /// Number of points where `self` and `q` differ.
    pub fn hamming_raw(&self, q: &Permutation) -> Result<usize> {
        self.check_degree(q)?;
        Ok(self.hamming_raw_unchecked(q))
    }

    #[inline]
    pub(crate) fn hamming_raw_unchecked(&self, q: &Permutation) -> usize {
        self.images
            .iter()
            .zip(q.images.iter())
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Normalized Hamming distance, `hamming_raw / n`.
    pub fn hamming(&self, q: &Permutation) -> Result<Rational> {
        Ok(Rational::new(
            self.hamming_raw(q)? as i128,
            self.degree() as i128,
        ))
    }

    /// Number of non-fixed points.
    pub fn support_size(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|&(i, &x)| i != x as usize)
            .count()
    }

    pub fn fixed_points(&self) -> usize {
        self.degree() - self.support_size()
    }

    pub fn is_fixed_point_free(&self) -> bool {
        self.support_size() == self.degree()
    }

    /// All cycles including fixed points, 1-based, each starting at its least point, ordered by
    /// that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i + 1);
                i = self.images[i] as usize;
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle lengths in non-increasing order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut lengths = Vec::new();
        cycle_lengths_into(&self.images, &mut vec![false; self.degree()], &mut lengths);
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }

    pub fn num_cycles(&self) -> usize {
        let mut lengths = Vec::new();
        cycle_lengths_into(&self.images, &mut vec![false; self.degree()], &mut lengths);
        lengths.len()
    }

    pub fn cycle_stats(&self) -> CycleStats {
        CycleStats::from_lengths(self.cycle_type())
    }

    /// Number of points lying in cycles of length at most `h`.
    pub fn f_leq(&self, h: usize) -> Result<usize> {
        if h == 0 || h > self.degree() {
            return Err(Error::invalid(format!(
                "h = {} outside 1..={}",
                h,
                self.degree()
            )));
        }
        Ok(self.cycle_stats().f_leq(h))
    }

    /// Uniformly random permutation (Fisher–Yates).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
        let mut images: Vec<u32> = (0..n as u32).collect();
        images.shuffle(rng);
        Permutation {
            images: images.into_boxed_slice(),
        }
    }

    /// Random transposition `(a b)` with `a != b`, as 0-based points. Requires `n >= 2`.
    pub fn random_transposition_points<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        (a, b)
    }

    /// The `n`-cycle `(1 2 … n)`.
    pub fn long_cycle(n: usize) -> Permutation {
        Permutation {
            images: (0..n as u32).map(|i| (i + 1) % n as u32).collect(),
        }
    }

    /// Canonical member of the conjugacy class with the given cycle type: consecutive points,
    /// longest cycle first.
    pub fn with_cycle_type(cycle_type: &[usize]) -> Result<Permutation> {
        let n: usize = cycle_type.iter().sum();
        if n == 0 || cycle_type.contains(&0) {
            return Err(Error::invalid(format!("bad cycle type {:?}", cycle_type)));
        }
        let mut images = vec![0u32; n];
        let mut start = 0;
        for &len in cycle_type {
            for k in 0..len {
                images[start + k] = (start + (k + 1) % len) as u32;
            }
            start += len;
        }
        Ok(Permutation::from_images_unchecked(images))
    }
}

/// All permutations of degree `n` in lexicographic one-line order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    (0..n as u32)
        .permutations(n)
        .map(Permutation::from_images_unchecked)
        .collect()
}

/// All cycle types (partitions of `n`) in reverse lexicographic order, starting with `[n]`.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            prefix.push(part);
            rec(rest - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Size of the conjugacy class with the given cycle type: `n! / Π_k (k^{m_k} m_k!)`.
pub fn class_size(cycle_type: &[usize]) -> u128 {
    let n: usize = cycle_type.iter().sum();
    let mut multiplicities: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in cycle_type {
        *multiplicities.entry(l).or_default() += 1;
    }
    let centralizer: u128 = multiplicities
        .iter()
        .map(|(&k, &m)| (k as u128).pow(m as u32) * factorial(m))
        .product();
    factorial(n) / centralizer
}

pub(crate) fn cycle_lengths_into(images: &[u32], seen: &mut [bool], out: &mut Vec<usize>) {
    seen.iter_mut().for_each(|s| *s = false);
    out.clear();
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
        out.push(len);
    }
}

/// Cycle statistics of a permutation.
///
/// `f[h]` is the number of points lying in `h`-cycles, so `f[h] = h * #(h-cycles)` and the
/// values sum to the degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleStats {
    pub cycle_lengths: Vec<usize>,
    pub f: BTreeMap<usize, usize>,
    pub num_cycles: usize,
}

impl CycleStats {
    pub fn from_lengths(mut cycle_lengths: Vec<usize>) -> Self {
        cycle_lengths.sort_unstable_by(|a, b| b.cmp(a));
        let mut f = BTreeMap::new();
        for &l in &cycle_lengths {
            *f.entry(l).or_insert(0) += l;
        }
        CycleStats {
            num_cycles: cycle_lengths.len(),
            cycle_lengths,
            f,
        }
    }

    pub fn degree(&self) -> usize {
        self.cycle_lengths.iter().sum()
    }

    pub fn f_leq(&self, h: usize) -> usize {
        self.f.range(..=h).map(|(_, &c)| c).sum()
    }

    pub fn fixed_points(&self) -> usize {
        self.f.get(&1).copied().unwrap_or(0)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for cycle in self.cycles().into_iter().filter(|c| c.len() > 1) {
            any = true;
            write!(f, "({})", cycle.iter().join(" "))?;
        }
        if !any {
            write!(f, "e")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[n={}]", self, self.degree())
    }
}

/// Left-to-right product. Panics on degree mismatch; use [`Permutation::compose`] otherwise.
impl Mul<&Permutation> for &Permutation {
    type Output = Permutation;

    fn mul(self, rhs: &Permutation) -> Permutation {
        self.compose(rhs)
            .expect("degree mismatch in permutation product")
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_line().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(deserializer)?;
        Permutation::from_one_line(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn p(text: &str, n: usize) -> Permutation {
        Permutation::parse(text, n).unwrap()
    }

    #[test]
    fn compose_is_left_to_right() {
        // 1 -> 2 -> 3, 3 -> 3 -> 2, 2 -> 1 -> 1
        let r = p("(1 2)", 3).compose(&p("(2 3)", 3)).unwrap();
        assert_eq!(r.one_line(), vec![3, 1, 2]);
        assert_eq!(r, p("(1 3 2)", 3));
    }

    #[test]
    fn identity_and_inverse_laws() {
        let q = p("(1 4 2)(3 5)", 5);
        assert_eq!(Permutation::identity(5).compose(&q).unwrap(), q);
        assert!(q.compose(&q.inverse()).unwrap().is_identity());
    }

    #[test]
    fn conjugation() {
        let a = p("(1 2)", 3);
        assert_eq!(a.conjugate(&Permutation::identity(3)).unwrap(), a);
        assert_eq!(a.conjugate(&p("(1 3)", 3)).unwrap(), p("(2 3)", 3));
        let mut rng = stream_rng(3, 0);
        for _ in 0..100 {
            let x = Permutation::random(8, &mut rng);
            let g = Permutation::random(8, &mut rng);
            assert_eq!(x.conjugate(&g).unwrap().cycle_type(), x.cycle_type());
        }
    }

    #[test]
    fn degree_mismatch_is_an_error() {
        let err = Permutation::identity(3).compose(&Permutation::identity(4));
        assert_eq!(err, Err(Error::DegreeMismatch { left: 3, right: 4 }));
        assert!(Permutation::identity(3)
            .hamming(&Permutation::identity(2))
            .is_err());
    }

    #[test]
    fn hamming_examples() {
        let q = p("(1 4 2)", 4);
        assert_eq!(q.hamming(&q).unwrap(), Rational::from_integer(0));
        assert_eq!(
            p("(1 2)", 3).hamming(&Permutation::identity(3)).unwrap(),
            Rational::new(2, 3)
        );
        assert_eq!(
            p("(1 2)(3)(4)", 4).hamming(&p("(1 2 3 4)", 4)).unwrap(),
            Rational::new(3, 4)
        );
    }

    #[test]
    fn cycle_statistics() {
        assert_eq!(Permutation::identity(7).f_leq(1).unwrap(), 7);
        assert_eq!(Permutation::long_cycle(7).f_leq(6).unwrap(), 0);
        let s = p("(1 2)(3)(4)", 4).cycle_stats();
        assert_eq!(s.num_cycles, 3);
        assert_eq!(s.cycle_lengths, vec![2, 1, 1]);
        assert_eq!(s.f_leq(1), 2);
        assert_eq!(s.f_leq(2), 4);
        assert!(Permutation::identity(3).f_leq(0).is_err());
        assert!(Permutation::identity(3).f_leq(4).is_err());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(p("e", 4), Permutation::identity(4));
        assert_eq!(p("(1, 3)(2 4)", 4).to_string(), "(1 3)(2 4)");
        assert_eq!(p("(3 1 2)", 3).to_string(), "(1 2 3)");
        assert!(Permutation::parse("(1 5)", 4).is_err());
        assert!(Permutation::parse("(1 1)", 4).is_err());
        assert!(Permutation::parse("(1 2", 4).is_err());
        assert!(Permutation::parse("1 2", 4).is_err());
        assert!(Permutation::from_one_line(&[1, 1]).is_err());
    }

    #[test]
    fn random_degree_one_is_identity() {
        let mut rng = stream_rng(0, 0);
        for _ in 0..10 {
            assert!(Permutation::random(1, &mut rng).is_identity());
        }
    }

    #[test]
    fn class_sizes_sum_to_factorial() {
        for n in 1..=7 {
            let total: u128 = partitions(n).iter().map(|t| class_size(t)).sum();
            assert_eq!(total, factorial(n));
        }
        assert_eq!(class_size(&[2, 1, 1]), 6);
        assert_eq!(class_size(&[4]), 6);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let all = all_permutations(3);
        assert_eq!(all.len(), 6);
        assert!(all.windows(2).all(|w| w[0].one_line() < w[1].one_line()));
    }

    #[test]
    fn serde_uses_one_line() {
        let q = p("(1 2 3)", 3);
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, "[2,3,1]");
        assert_eq!(serde_json::from_str::<Permutation>(&json).unwrap(), q);
        assert!(serde_json::from_str::<Permutation>("[1,1,2]").is_err());
    }
}
