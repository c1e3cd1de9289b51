//! Words with constants in `S_n * F_r`.
//!
//! A [`Word`] is any sequence of letters. Its reduced form alternates constants and variables as
//! `c_0 x_{ι(1)}^{ε(1)} c_1 … x_{ι(l)}^{ε(l)} c_l`, every constant slot present (identity allowed),
//! with no critical pattern `x^ε c x^{-ε}` whose constant is central. For `n >= 3` the center of
//! `S_n` is trivial, so only `c = e` cancels; for `n <= 2` every constant is central and such
//! patterns always cancel.

mod fold;
mod free;
mod parse;

use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

use crate::perm::Permutation;
use crate::{Error, Result};

pub use fold::{stallings_rank, FoldedGraph};
pub use free::FreeWord;

/// Largest exponent accepted by [`Word::power`].
pub const MAX_POWER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

/// A signed variable `x_index^{±1}`; `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var {
    pub index: usize,
    pub sign: Sign,
}

impl Var {
    pub fn new(index: usize, sign: Sign) -> Self {
        Var { index, sign }
    }

    pub fn pos(index: usize) -> Self {
        Var::new(index, Sign::Pos)
    }

    pub fn neg(index: usize) -> Self {
        Var::new(index, Sign::Neg)
    }

    pub fn inverse(self) -> Var {
        Var::new(self.index, -self.sign)
    }

    pub fn is_inverse_of(self, other: Var) -> bool {
        self.index == other.index && self.sign != other.sign
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Pos => write!(f, "x{}", self.index),
            Sign::Neg => write!(f, "x{}^-1", self.index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Letter {
    Const(Permutation),
    Var(Var),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    n: usize,
    rank: usize,
    letters: Vec<Letter>,
}

/// Index classes of a reduced word of length `l`; indices are 1-based in `1..l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub length: usize,
    pub j0: Vec<usize>,
    pub jplus: Vec<usize>,
    pub jminus: Vec<usize>,
    pub critical_constants: Vec<Permutation>,
    pub strong: bool,
    pub non_singular: bool,
    pub regular: bool,
    /// Least number of moved points over the critical constants; `n` when there are none.
    pub crit_norm: usize,
}

impl Word {
    pub fn new(n: usize, rank: usize, letters: Vec<Letter>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("degree must be positive"));
        }
        for letter in &letters {
            match letter {
                Letter::Const(c) if c.degree() != n => {
                    return Err(Error::DegreeMismatch {
                        left: n,
                        right: c.degree(),
                    })
                }
                Letter::Var(v) if v.index == 0 || v.index > rank => {
                    return Err(Error::VariableOutOfRange {
                        index: v.index,
                        rank,
                    })
                }
                _ => {}
            }
        }
        Ok(Word { n, rank, letters })
    }

    /// The empty word (identity) in reduced form.
    pub fn empty(n: usize, rank: usize) -> Self {
        Word {
            n,
            rank,
            letters: vec![Letter::Const(Permutation::identity(n))],
        }
    }

    /// Parses the text grammar: whitespace separated `xI`, `xI^K`, `e` and cycles `(a b …)`.
    /// The result is not reduced; integer exponents are expanded into repeated letters.
    pub fn parse(text: &str, n: usize, rank: usize) -> Result<Self> {
        let letters = parse::parse_letters(text, Some(n), rank)?;
        Word::new(n, rank, letters)
    }

    /// Reduced word from a constant-free element.
    pub fn from_free(w: &FreeWord, n: usize) -> Self {
        Word::from_parts(
            n,
            w.rank(),
            vec![Permutation::identity(n); w.len() + 1],
            w.letters().to_vec(),
        )
    }

    pub(crate) fn from_parts(
        n: usize,
        rank: usize,
        constants: Vec<Permutation>,
        vars: Vec<Var>,
    ) -> Self {
        debug_assert_eq!(constants.len(), vars.len() + 1);
        let mut letters = Vec::with_capacity(constants.len() + vars.len());
        let mut cs = constants.into_iter();
        letters.push(Letter::Const(cs.next().unwrap()));
        for (v, c) in vars.into_iter().zip(cs) {
            letters.push(Letter::Var(v));
            letters.push(Letter::Const(c));
        }
        Word { n, rank, letters }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Number of variable letters.
    pub fn length(&self) -> usize {
        self.vars().count()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.letters.iter().filter_map(|l| match l {
            Letter::Var(v) => Some(*v),
            Letter::Const(_) => None,
        })
    }

    pub fn has_constants(&self) -> bool {
        self.letters
            .iter()
            .any(|l| matches!(l, Letter::Const(c) if !c.is_identity()))
    }

    pub fn has_variables(&self) -> bool {
        self.vars().next().is_some()
    }

    /// Largest variable index used (0 if none).
    pub fn max_variable(&self) -> usize {
        self.vars().map(|v| v.index).max().unwrap_or(0)
    }

    /// Same constant-free word at another degree. Fails if the word has non-identity constants.
    pub fn at_degree(&self, n: usize) -> Result<Word> {
        if n == self.n {
            return Ok(self.clone());
        }
        if self.has_constants() {
            return Err(Error::HasConstants);
        }
        let letters = self
            .letters
            .iter()
            .map(|l| match l {
                Letter::Const(_) => Letter::Const(Permutation::identity(n)),
                Letter::Var(v) => Letter::Var(*v),
            })
            .collect();
        Word::new(n, self.rank, letters)
    }

    /// Same word viewed in a larger rank.
    pub fn with_rank(&self, rank: usize) -> Result<Word> {
        Word::new(self.n, rank, self.letters.clone())
    }

    fn is_central(&self, c: &Permutation) -> bool {
        self.n <= 2 || c.is_identity()
    }

    /// Constants and variables of a word in alternating form, or `None` if it is not alternating.
    pub fn split(&self) -> Option<(Vec<&Permutation>, Vec<Var>)> {
        if self.letters.len().is_multiple_of(2) {
            return None;
        }
        let mut constants = Vec::new();
        let mut vars = Vec::new();
        for (k, letter) in self.letters.iter().enumerate() {
            match (k % 2, letter) {
                (0, Letter::Const(c)) => constants.push(c),
                (1, Letter::Var(v)) => vars.push(*v),
                _ => return None,
            }
        }
        Some((constants, vars))
    }

    pub fn is_reduced(&self) -> bool {
        match self.split() {
            None => false,
            Some((constants, vars)) => vars
                .windows(2)
                .zip(&constants[1..])
                .all(|(pair, c)| !(pair[0].is_inverse_of(pair[1]) && self.is_central(c))),
        }
    }

    /// Normal form: adjacent constants multiplied, every `x^ε c x^{-ε}` with central `c`
    /// cancelled and its flanking constants merged, until none remain.
    pub fn reduce(&self) -> Word {
        let mut constants = vec![Permutation::identity(self.n)];
        let mut vars: Vec<Var> = Vec::new();
        for letter in &self.letters {
            match letter {
                Letter::Const(c) => {
                    let last = constants.last_mut().unwrap();
                    *last = last.then(c);
                }
                Letter::Var(v) => {
                    let cancels = matches!(vars.last(), Some(prev) if prev.is_inverse_of(*v))
                        && self.is_central(constants.last().unwrap());
                    if cancels {
                        // c' x^ε c x^{-ε}  ->  c' c
                        vars.pop();
                        let middle = constants.pop().unwrap();
                        let last = constants.last_mut().unwrap();
                        *last = last.then(&middle);
                    } else {
                        vars.push(*v);
                        constants.push(Permutation::identity(self.n));
                    }
                }
            }
        }
        Word::from_parts(self.n, self.rank, constants, vars)
    }

    pub fn inverse(&self) -> Word {
        let letters = self
            .letters
            .iter()
            .rev()
            .map(|l| match l {
                Letter::Const(c) => Letter::Const(c.inverse()),
                Letter::Var(v) => Letter::Var(v.inverse()),
            })
            .collect();
        Word {
            n: self.n,
            rank: self.rank,
            letters,
        }
    }

    /// Letter-wise concatenation (not reduced).
    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.n != other.n {
            return Err(Error::DegreeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Word::new(self.n, self.rank.max(other.rank), letters)
    }

    /// Reduced form of the `k`-fold concatenation, `1 <= k <= MAX_POWER`.
    pub fn power(&self, k: usize) -> Result<Word> {
        if k == 0 || k > MAX_POWER {
            return Err(Error::invalid(format!(
                "power exponent {} outside 1..={}",
                k, MAX_POWER
            )));
        }
        let mut letters = Vec::with_capacity(self.letters.len() * k);
        for _ in 0..k {
            letters.extend(self.letters.iter().cloned());
        }
        Ok(Word {
            n: self.n,
            rank: self.rank,
            letters,
        }
        .reduce())
    }

    /// Image under the homomorphism onto `F_r` that kills every constant.
    pub fn epsilon(&self) -> FreeWord {
        FreeWord::reduced(self.rank, self.vars().collect())
    }

    pub fn is_non_singular(&self) -> bool {
        !self.epsilon().is_empty()
    }

    /// Writes a reduced word as `conjugator · core · conjugator⁻¹` with `core` cyclically reduced.
    ///
    /// The word is conjugate to a constant exactly when `core` has no variable letters.
    pub fn cyclically_reduce(&self) -> Result<(Word, Word)> {
        let (constants, vars) = self.split().ok_or(Error::NotReduced)?;
        if !self.is_reduced() {
            return Err(Error::NotReduced);
        }
        let n = self.n;
        let id = Permutation::identity(n);
        if vars.is_empty() {
            return Ok((self.clone(), Word::empty(n, self.rank)));
        }

        let mut conjugator: Vec<Letter> = vec![Letter::Const(constants[0].clone())];
        // Cyclic form v_1 c_1 … v_l · tail, with tail = c_l c_0.
        let mut vars = vars;
        let mut inner: Vec<Permutation> = constants[1..constants.len() - 1]
            .iter()
            .map(|c| (*c).clone())
            .collect();
        let mut tail = constants[constants.len() - 1].then(constants[0]);

        while vars.len() >= 2
            && vars[0].is_inverse_of(vars[vars.len() - 1])
            && self.is_central(&tail)
        {
            // v c_1 … c_{l-1} v⁻¹ tail = v (c_1 … c_{l-1} tail) v⁻¹
            let v = vars[0];
            conjugator.push(Letter::Var(v));
            vars = vars[1..vars.len() - 1].to_vec();
            let first = inner.remove(0);
            let last = inner.pop().unwrap_or_else(|| id.clone());
            if vars.is_empty() {
                // only constants left: first · tail (first == last here)
                let core_const = first.then(&tail);
                let core = Word::from_parts(n, self.rank, vec![core_const], vec![]);
                let conj = Word::new(n, self.rank, conjugator)?.reduce();
                return Ok((core, conj));
            }
            // first (v_2 … v_{l-1} last·tail·first) first⁻¹
            conjugator.push(Letter::Const(first.clone()));
            tail = last.then(&tail).then(&first);
        }

        let mut core_constants = vec![id];
        core_constants.extend(inner);
        core_constants.push(tail);
        let core = Word::from_parts(n, self.rank, core_constants, vars);
        let conj = Word::new(n, self.rank, conjugator)?.reduce();
        Ok((core, conj))
    }

    /// Regular: not conjugate to a constant, and every critical constant of the reduced square is
    /// fixed point free.
    pub fn is_regular(&self) -> Result<bool> {
        if !self.is_reduced() {
            return Err(Error::NotReduced);
        }
        let (core, _) = self.cyclically_reduce()?;
        if !core.has_variables() {
            return Ok(false);
        }
        let square = self.power(2)?;
        Ok(square
            .critical_constants()?
            .iter()
            .all(|c| c.is_fixed_point_free()))
    }

    /// Critical constants `c_j`, `j ∈ J₋`, of a reduced word.
    pub fn critical_constants(&self) -> Result<Vec<Permutation>> {
        let (constants, vars) = self.split().ok_or(Error::NotReduced)?;
        Ok(vars
            .windows(2)
            .enumerate()
            .filter(|(_, pair)| pair[0].is_inverse_of(pair[1]))
            .map(|(j, _)| constants[j + 1].clone())
            .collect())
    }

    pub fn classify(&self) -> Result<Classification> {
        if !self.is_reduced() {
            return Err(Error::NotReduced);
        }
        let (constants, vars) = self.split().ok_or(Error::NotReduced)?;
        let mut c = Classification {
            length: vars.len(),
            j0: Vec::new(),
            jplus: Vec::new(),
            jminus: Vec::new(),
            critical_constants: Vec::new(),
            strong: true,
            non_singular: self.is_non_singular(),
            regular: self.is_regular()?,
            crit_norm: self.n,
        };
        for (k, pair) in vars.windows(2).enumerate() {
            let j = k + 1;
            if pair[0].index != pair[1].index {
                c.j0.push(j);
            } else if pair[0].sign == pair[1].sign {
                c.jplus.push(j);
            } else {
                c.jminus.push(j);
                c.critical_constants.push(constants[j].clone());
            }
        }
        c.strong = c.jminus.is_empty();
        if let Some(m) = c.critical_constants.iter().map(|p| p.support_size()).min() {
            c.crit_norm = m;
        }
        Ok(c)
    }
}

impl fmt::Display for Word {
    /// Re-parseable text; identity constants are omitted and runs of one variable are collapsed
    /// into powers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut tokens: Vec<String> = Vec::new();
        let mut run: Option<(Var, i64)> = None;
        let flush = |run: &mut Option<(Var, i64)>, tokens: &mut Vec<String>| {
            if let Some((v, k)) = run.take() {
                let exp = if v.sign == Sign::Pos { k } else { -k };
                tokens.push(if exp == 1 {
                    format!("x{}", v.index)
                } else {
                    format!("x{}^{}", v.index, exp)
                });
            }
        };
        for letter in &self.letters {
            match letter {
                Letter::Const(c) if c.is_identity() => {}
                Letter::Const(c) => {
                    flush(&mut run, &mut tokens);
                    tokens.push(c.to_string());
                }
                Letter::Var(v) => match &mut run {
                    Some((u, k)) if u == v => *k += 1,
                    _ => {
                        flush(&mut run, &mut tokens);
                        run = Some((*v, 1));
                    }
                },
            }
        }
        flush(&mut run, &mut tokens);
        if tokens.is_empty() {
            write!(f, "e")
        } else {
            write!(f, "{}", tokens.join(" "))
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word[n={}, r={}]({})", self.n, self.rank, self)
    }
}
