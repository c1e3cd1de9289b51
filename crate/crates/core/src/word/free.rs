use std::fmt;

use serde::{Deserialize, Serialize};

use crate::word::{parse, Letter, Sign, Var};
use crate::{Error, Result};

/// Freely reduced element of `F_r`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FreeWord {
    rank: usize,
    letters: Vec<Var>,
}

impl FreeWord {
    /// Free reduction of an arbitrary letter sequence.
    pub fn reduced(rank: usize, letters: Vec<Var>) -> Self {
        let mut out: Vec<Var> = Vec::with_capacity(letters.len());
        for v in letters {
            if matches!(out.last(), Some(prev) if prev.is_inverse_of(v)) {
                out.pop();
            } else {
                out.push(v);
            }
        }
        FreeWord { rank, letters: out }
    }

    pub fn identity(rank: usize) -> Self {
        FreeWord {
            rank,
            letters: Vec::new(),
        }
    }

    pub fn generator(rank: usize, index: usize) -> Self {
        FreeWord {
            rank,
            letters: vec![Var::pos(index)],
        }
    }

    /// Same grammar as words with constants, but constants are rejected. `e` alone is not
    /// accepted either; use [`FreeWord::identity`].
    pub fn parse(text: &str, rank: usize) -> Result<Self> {
        let letters = parse::parse_letters(text, None, rank)?;
        let vars = letters
            .into_iter()
            .map(|l| match l {
                Letter::Var(v) => Ok(v),
                Letter::Const(_) => Err(Error::HasConstants),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FreeWord::reduced(rank, vars))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Var] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|v| v.inverse()).collect(),
        }
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        FreeWord::reduced(self.rank.max(other.rank), letters)
    }

    /// Substitutes `images[i-1]` for `x_i`.
    pub fn substitute(&self, images: &[FreeWord]) -> Result<FreeWord> {
        let rank = images.iter().map(|w| w.rank).max().unwrap_or(0);
        let mut letters = Vec::new();
        for v in &self.letters {
            let image = images.get(v.index - 1).ok_or(Error::VariableOutOfRange {
                index: v.index,
                rank: images.len(),
            })?;
            match v.sign {
                Sign::Pos => letters.extend_from_slice(&image.letters),
                Sign::Neg => letters.extend(image.inverse().letters),
            }
        }
        Ok(FreeWord::reduced(rank, letters))
    }

    /// Variable indices that occur.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.letters.iter().map(|v| v.index).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// All nontrivial reduced words of length `1..=max_len` over `rank` generators, keeping one of
    /// each pair `{v, v⁻¹}` (the lexicographically smaller).
    pub fn battery(rank: usize, max_len: usize) -> Vec<FreeWord> {
        let gens: Vec<Var> = (1..=rank)
            .flat_map(|i| [Var::pos(i), Var::neg(i)])
            .collect();
        let mut out = Vec::new();
        let mut layer: Vec<Vec<Var>> = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for &g in &gens {
                    if matches!(w.last(), Some(prev) if prev.is_inverse_of(g)) {
                        continue;
                    }
                    let mut v = w.clone();
                    v.push(g);
                    next.push(v);
                }
            }
            for v in &next {
                let word = FreeWord {
                    rank,
                    letters: v.clone(),
                };
                if word <= word.inverse() {
                    out.push(word);
                }
            }
            layer = next;
        }
        out
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let mut first = true;
        for chunk in self.letters.chunk_by(|a, b| a == b) {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let v = chunk[0];
            let exp = chunk.len() as i64 * if v.sign == Sign::Pos { 1 } else { -1 };
            if exp == 1 {
                write!(f, "x{}", v.index)?;
            } else {
                write!(f, "x{}^{}", v.index, exp)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FreeWord({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_reduction() {
        let w = FreeWord::parse("x1 x2 x2^-1 x1^-1 x1", 2).unwrap();
        assert_eq!(w.to_string(), "x1");
        assert!(FreeWord::parse("x1 x1^-1", 1).unwrap().is_empty());
    }

    #[test]
    fn battery_counts() {
        // reduced words of length k in F_2: 4·3^{k-1}; none is its own inverse
        let b = FreeWord::battery(2, 4);
        assert_eq!(b.len(), (4 + 12 + 36 + 108) / 2);
        assert!(b.iter().all(|w| !w.is_empty()));
    }

    #[test]
    fn substitution() {
        let v = FreeWord::parse("x1 x2^-1", 2).unwrap();
        let images = [
            FreeWord::parse("x1 x2", 2).unwrap(),
            FreeWord::parse("x2", 2).unwrap(),
        ];
        assert_eq!(
            v.substitute(&images).unwrap(),
            FreeWord::parse("x1", 2).unwrap()
        );
    }
}
