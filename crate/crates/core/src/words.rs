//! Finite binary words and eventually periodic binary sequences.
//!
//! Every infinite sequence handled by this crate is eventually periodic and
//! is stored in a canonical form: the period is primitive and the preperiod
//! is as short as possible. Two canonical values denote the same sequence
//! exactly when they are structurally equal, so `Eq` and `Hash` are derived.
//!
//! Lexicographic comparison of two eventually periodic sequences `x` and `y`
//! only needs `max(|pre(x)|, |pre(y)|) + lcm(|per(x)|, |per(y)|)` symbols:
//! past that index both sequences are periodic with the common period
//! `lcm(...)`, so a first disagreement, if any, occurs inside the first
//! common period after both preperiods end.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::integer::lcm;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Rational;

/// Errors raised by word and sequence constructors and word operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    /// A character other than `0` or `1` was found.
    #[error("symbol {0:?} is not a binary digit")]
    BadSymbol(char),
    /// A sequence literal does not follow the `PRE|PER` grammar.
    #[error("sequence literal {0:?} must have the form PRE|PER with a nonempty period")]
    BadLiteral(String),
    /// An eventually periodic sequence needs a nonempty period.
    #[error("the period of an eventually periodic sequence must be nonempty")]
    EmptyPeriod,
    /// The operation needs a rotation starting with a symbol that does not occur.
    #[error("word {0} is constant; no rotation starts with the requested symbol")]
    ConstantWord(Word),
    /// The operation needs a nonempty word.
    #[error("the operation needs a nonempty word")]
    EmptyWord,
}

/// A finite word over `{0, 1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Word(Vec<u8>);

impl Word {
    /// Builds a word from symbols, rejecting anything other than 0 and 1.
    pub fn new(symbols: Vec<u8>) -> Result<Self, WordError> {
        if let Some(&s) = symbols.iter().find(|&&s| s > 1) {
            return Err(WordError::BadSymbol(char::from(b'0'.wrapping_add(s))));
        }
        Ok(Word(symbols))
    }

    /// The empty word.
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// The word `s^n`.
    pub fn constant(symbol: u8, n: usize) -> Self {
        assert!(symbol <= 1, "symbol must be binary");
        Word(vec![symbol; n])
    }

    /// Length `ℓ(w)`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Whether the word is empty.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The symbols of the word.
    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    /// Number of ones `|w|₁`.
    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&s| s == 1).count()
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// The power `w^k`.
    pub fn pow(&self, k: usize) -> Word {
        Word(self.0.repeat(k))
    }

    /// Left rotation by `n`: `w[n..] · w[..n]`.
    pub fn rotate(&self, n: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let mut v = self.0.clone();
        v.rotate_left(n % self.0.len());
        Word(v)
    }

    /// All `ℓ(w)` rotations, starting with the word itself.
    pub fn rotations(&self) -> Vec<Word> {
        (0..self.len().max(1)).map(|n| self.rotate(n)).collect()
    }

    /// Symbolwise complement.
    pub fn mirror(&self) -> Word {
        Word(self.0.iter().map(|&s| 1 - s).collect())
    }

    /// Whether every symbol is equal (vacuously true for the empty word).
    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|p| p[0] == p[1])
    }

    /// The shortest word `u` with `w = u^k` for some `k`.
    pub fn primitive_root(&self) -> Word {
        Word(primitive_root(&self.0).to_vec())
    }

    /// Whether the word is not a proper power of a shorter word.
    pub fn is_primitive(&self) -> bool {
        primitive_root(&self.0).len() == self.0.len()
    }

    /// The prefix of length `n` (clamped to the word length).
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    /// The subword `w[from..to]`.
    pub fn slice(&self, from: usize, to: usize) -> Word {
        Word(self.0[from..to].to_vec())
    }

    /// Whether `other` is a factor of `self`.
    pub fn contains(&self, other: &Word) -> bool {
        other.is_empty() || self.0.windows(other.len()).any(|w| w == other.0.as_slice())
    }

    /// The purely periodic sequence `w^∞`.
    pub fn periodic(&self) -> Result<EpSeq, WordError> {
        EpSeq::periodic(self.clone())
    }

    /// Appends one symbol.
    pub fn push(&mut self, symbol: u8) {
        assert!(symbol <= 1, "symbol must be binary");
        self.0.push(symbol);
    }
}

fn primitive_root(s: &[u8]) -> &[u8] {
    let n = s.len();
    for d in 1..n {
        if n.is_multiple_of(d) && s.chunks(d).all(|c| c == &s[..d]) {
            return &s[..d];
        }
    }
    s
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(WordError::BadSymbol(other)),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Word)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for Word {
    type Error = WordError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// An eventually periodic binary sequence `pre · per^∞` in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct EpSeq {
    pre: Word,
    per: Word,
}

impl EpSeq {
    /// Builds `pre · per^∞` and canonicalizes it.
    pub fn new(pre: Word, per: Word) -> Result<Self, WordError> {
        if per.is_empty() {
            return Err(WordError::EmptyPeriod);
        }
        let mut pre = pre.0;
        let mut per = primitive_root(&per.0).to_vec();
        while let Some(&last) = pre.last() {
            if last != *per.last().expect("period is nonempty") {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Ok(EpSeq {
            pre: Word(pre),
            per: Word(per),
        })
    }

    /// The purely periodic sequence `per^∞`.
    pub fn periodic(per: Word) -> Result<Self, WordError> {
        EpSeq::new(Word::empty(), per)
    }

    /// The constant sequence `s^∞`.
    pub fn constant(symbol: u8) -> Self {
        EpSeq {
            pre: Word::empty(),
            per: Word::constant(symbol, 1),
        }
    }

    /// The canonical preperiod.
    pub fn preperiod(&self) -> &Word {
        &self.pre
    }

    /// The canonical (primitive) period.
    pub fn period(&self) -> &Word {
        &self.per
    }

    /// Whether the preperiod is empty.
    pub fn is_purely_periodic(&self) -> bool {
        self.pre.is_empty()
    }

    /// The number of distinct shifts `σⁿ(x)`, `n ≥ 0`: `ℓ(pre) + ℓ(per)`.
    pub fn orbit_size(&self) -> usize {
        self.pre.len() + self.per.len()
    }

    /// The symbol at index `i` (0-based).
    pub fn at(&self, i: usize) -> u8 {
        let p = self.pre.len();
        if i < p {
            self.pre.0[i]
        } else {
            self.per.0[(i - p) % self.per.len()]
        }
    }

    /// The first symbol.
    pub fn first(&self) -> u8 {
        self.at(0)
    }

    /// The prefix of length `n`.
    pub fn prefix(&self, n: usize) -> Word {
        Word((0..n).map(|i| self.at(i)).collect())
    }

    /// The position class of index `i`: indices with equal class have equal tails.
    pub fn position_class(&self, i: usize) -> usize {
        let p = self.pre.len();
        if i < p {
            i
        } else {
            p + (i - p) % self.per.len()
        }
    }

    /// The shift `σⁿ(x)`, canonical.
    pub fn shift(&self, n: usize) -> EpSeq {
        let p = self.pre.len();
        if n <= p {
            EpSeq {
                pre: Word(self.pre.0[n..].to_vec()),
                per: self.per.clone(),
            }
        } else {
            EpSeq {
                pre: Word::empty(),
                per: self.per.rotate((n - p) % self.per.len()),
            }
        }
    }

    /// All distinct shifts `σⁿ(x)` for `n = 1, …, ℓ(pre) + ℓ(per)`, in order of `n`.
    ///
    /// Every `σⁿ(x)` with `n ≥ 1` equals one of these, so dominance
    /// conditions quantified over `n ≥ 1` reduce to this finite list.
    pub fn positive_shifts(&self) -> Vec<EpSeq> {
        (1..=self.orbit_size()).map(|n| self.shift(n)).collect()
    }

    /// The sequence `w · x`.
    pub fn prepend(&self, w: &Word) -> EpSeq {
        EpSeq::new(w.concat(&self.pre), self.per.clone()).expect("period is nonempty")
    }

    /// Symbolwise complement.
    pub fn mirror(&self) -> EpSeq {
        EpSeq {
            pre: self.pre.mirror(),
            per: self.per.mirror(),
        }
    }

    /// Lexicographic comparison; see the module documentation for the bound.
    pub fn compare(&self, other: &EpSeq) -> Ordering {
        let bound = self.pre.len().max(other.pre.len()) + lcm(self.per.len(), other.per.len());
        (0..bound)
            .map(|i| self.at(i).cmp(&other.at(i)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }

    /// Compares the sequence with the finite word `w` on the first `ℓ(w)` symbols.
    pub fn compare_prefix(&self, w: &Word) -> Ordering {
        w.symbols()
            .iter()
            .enumerate()
            .map(|(i, &s)| self.at(i).cmp(&s))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }

    /// Whether the sequence starts with the word `w`.
    pub fn starts_with(&self, w: &Word) -> bool {
        self.compare_prefix(w).is_eq()
    }

    /// The exact value `Σ xᵢ 2^{-i}` (see [`crate::circle::from_binary`]).
    pub fn value(&self) -> Rational {
        crate::circle::from_binary(self)
    }
}

impl Ord for EpSeq {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl PartialOrd for EpSeq {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EpSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.pre, self.per)
    }
}

impl fmt::Debug for EpSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EpSeq({self})")
    }
}

impl FromStr for EpSeq {
    type Err = WordError;

    /// Parses `PRE|PER` with `PRE, PER ∈ [01]*` and `PER` nonempty.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (pre, per) = s
            .split_once('|')
            .ok_or_else(|| WordError::BadLiteral(s.to_string()))?;
        if per.is_empty() || per.contains('|') {
            return Err(WordError::BadLiteral(s.to_string()));
        }
        EpSeq::new(pre.parse()?, per.parse()?)
    }
}

impl From<EpSeq> for String {
    fn from(x: EpSeq) -> String {
        x.to_string()
    }
}

impl TryFrom<String> for EpSeq {
    type Error = WordError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Lexicographic comparison of two canonical sequences.
pub fn compare(x: &EpSeq, y: &EpSeq) -> Ordering {
    x.compare(y)
}

/// The shift `σⁿ(x)`.
pub fn shift(x: &EpSeq, n: usize) -> EpSeq {
    x.shift(n)
}

/// Symbolwise complement of a sequence.
pub fn mirror(x: &EpSeq) -> EpSeq {
    x.mirror()
}

/// Lexicographic extremes over the rotations of a word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclicExtremes {
    /// Largest rotation.
    pub max: Word,
    /// Smallest rotation.
    pub min: Word,
    /// Largest rotation starting with 0, absent for `1ⁿ`.
    pub zero_max: Option<Word>,
    /// Smallest rotation starting with 1, absent for `0ⁿ`.
    pub one_min: Option<Word>,
}

/// Maximum, minimum, 0-maximum and 1-minimum rotations of a nonempty word.
pub fn cyclic_extremes(w: &Word) -> Result<CyclicExtremes, WordError> {
    if w.is_empty() {
        return Err(WordError::EmptyWord);
    }
    let rots = w.rotations();
    let max = rots.iter().max().cloned().expect("nonempty");
    let min = rots.iter().min().cloned().expect("nonempty");
    let zero_max = rots.iter().filter(|r| r.0[0] == 0).max().cloned();
    let one_min = rots.iter().filter(|r| r.0[0] == 1).min().cloned();
    Ok(CyclicExtremes {
        max,
        min,
        zero_max,
        one_min,
    })
}

/// The largest rotation of `w` starting with 0.
pub fn zero_max(w: &Word) -> Result<Word, WordError> {
    cyclic_extremes(w)?
        .zero_max
        .ok_or_else(|| WordError::ConstantWord(w.clone()))
}

/// The smallest rotation of `w` starting with 1.
pub fn one_min(w: &Word) -> Result<Word, WordError> {
    cyclic_extremes(w)?
        .one_min
        .ok_or_else(|| WordError::ConstantWord(w.clone()))
}

/// Splits the 0-maximal rotation of a non-constant word as `u · v` with
/// `v · u` the 1-minimal rotation, `u` starting with 0 and `v` with 1.
pub fn factor_split(w: &Word) -> Result<(Word, Word), WordError> {
    if w.is_constant() {
        return Err(WordError::ConstantWord(w.clone()));
    }
    let z = zero_max(w)?;
    let o = one_min(w)?;
    let n = (1..z.len())
        .find(|&n| z.rotate(n) == o)
        .expect("the 1-minimal rotation is a rotation of the 0-maximal one");
    Ok((z.slice(0, n), z.slice(n, z.len())))
}

/// Ones count, one-ratio and balance flags of a word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalanceStats {
    /// `|w|₁`.
    pub ones: usize,
    /// `|w|₁ / ℓ(w)`.
    #[serde(serialize_with = "crate::rational_serde::serialize")]
    pub one_ratio: Rational,
    /// All equal-length factors differ by at most one in their ones count.
    pub balanced: bool,
    /// `w²` is balanced.
    pub cyclically_balanced: bool,
}

/// Whether all equal-length factors of `w` have ones counts within one of each other.
pub fn is_balanced(w: &Word) -> bool {
    let s = w.symbols();
    let mut prefix = vec![0usize; s.len() + 1];
    for (i, &c) in s.iter().enumerate() {
        prefix[i + 1] = prefix[i] + c as usize;
    }
    (1..=s.len()).all(|l| {
        let counts = (0..=s.len() - l).map(|i| prefix[i + l] - prefix[i]);
        let (lo, hi) = counts.fold((usize::MAX, 0), |(lo, hi), c| (lo.min(c), hi.max(c)));
        hi - lo <= 1
    })
}

/// Whether `w²` is balanced.
pub fn is_cyclically_balanced(w: &Word) -> bool {
    is_balanced(&w.concat(w))
}

/// Balance statistics of a nonempty word.
pub fn balance_stats(w: &Word) -> Result<BalanceStats, WordError> {
    if w.is_empty() {
        return Err(WordError::EmptyWord);
    }
    Ok(BalanceStats {
        ones: w.ones(),
        one_ratio: Rational::new(w.ones().into(), w.len().into()),
        balanced: is_balanced(w),
        cyclically_balanced: is_cyclically_balanced(w),
    })
}

/// Length of a maximal run, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RunLength {
    /// The longest run has this many symbols.
    Finite(usize),
    /// The sequence ends with a constant tail of this symbol.
    Unbounded,
}

/// Maximal runs of zeros and ones in a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunStats {
    /// `0_x`: the longest block `0ⁿ` occurring in `x`.
    pub max_zero_run: RunLength,
    /// `1_x`: the longest block `1ⁿ` occurring in `x`.
    pub max_one_run: RunLength,
}

/// Exact maximal run lengths of a canonical sequence.
pub fn run_stats(x: &EpSeq) -> RunStats {
    let tail = x.period();
    // A run that does not reach a constant tail ends within pre + 2·per symbols.
    let scan = x.prefix(x.preperiod().len() + 3 * tail.len());
    let longest = |sym: u8| -> RunLength {
        if tail.is_constant() && tail.symbols()[0] == sym {
            return RunLength::Unbounded;
        }
        let mut best = 0;
        let mut cur = 0;
        for &s in scan.symbols() {
            cur = if s == sym { cur + 1 } else { 0 };
            best = best.max(cur);
        }
        RunLength::Finite(best)
    };
    RunStats {
        max_zero_run: longest(0),
        max_one_run: longest(1),
    }
}
