//! Parry sequences, the lexicographic world and the normalisation of pairs.
//!
//! A pair `(α, β)` with `α` starting with 1 and `β` with 0 defines the
//! subshift `Σ_{(α,β)} = { x : β ≼ σⁿ(x) ≼ α, n ≥ 0 }`. The *lexicographic
//! world* `LW` consists of the pairs with `α` Parry (`σⁿ(α) ≼ α`), `β`
//! co-Parry (`σⁿ(β) ≽ β`) and the cross conditions `σⁿ(α) ≽ β`,
//! `σⁿ(β) ≼ α` for all `n ≥ 1`. Pairs outside `LW` are *extremal* or fail
//! the Parry conditions; the maps here replace them by a pair in `LW` with
//! the same subshift.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::{from_binary, to_binary, Expansion};
use crate::words::{run_stats, EpSeq, RunLength, Word};
use crate::Rational;

/// Errors raised by pair operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexError {
    /// `α` must start with 1 and `β` with 0.
    #[error("invalid pair: α = {alpha} must start with 1 and β = {beta} with 0")]
    BadPair {
        /// First component.
        alpha: EpSeq,
        /// Second component.
        beta: EpSeq,
    },
    /// The sequence does not start with the symbol required by the map.
    #[error("sequence {0} does not start with the required symbol")]
    WrongStart(EpSeq),
    /// An extremal witness equal to 1 would produce a constant sequence.
    #[error("degenerate extremal pair: M = {m:?}, N = {n:?}")]
    DegenerateExtremal {
        /// `M_α(β)`, if defined.
        m: Option<usize>,
        /// `N_β(α)`, if defined.
        n: Option<usize>,
    },
    /// The map was applied to a pair of a different class.
    #[error("map needs a {expected} pair, found {found:?}")]
    ClassMismatch {
        /// The class the map needs.
        expected: &'static str,
        /// The actual class.
        found: PairClass,
    },
    /// Normalisation did not reach the lexicographic world.
    #[error("normalisation of {0} did not reach the lexicographic world")]
    NotNormalized(LexPair),
}

/// A pair `(α, β)` with `α₁ = 1` and `β₁ = 0`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LexPair {
    alpha: EpSeq,
    beta: EpSeq,
}

impl LexPair {
    /// Builds a pair, checking the first symbols.
    pub fn new(alpha: EpSeq, beta: EpSeq) -> Result<Self, LexError> {
        if alpha.first() != 1 || beta.first() != 0 {
            return Err(LexError::BadPair { alpha, beta });
        }
        Ok(LexPair { alpha, beta })
    }

    /// Parses two sequence literals `PRE|PER`.
    pub fn parse(alpha: &str, beta: &str) -> Result<Self, crate::words::WordError> {
        let a: EpSeq = alpha.parse()?;
        let b: EpSeq = beta.parse()?;
        LexPair::new(a, b)
            .map_err(|_| crate::words::WordError::BadLiteral(format!("({alpha}, {beta})")))
    }

    /// The upper sequence `α`.
    pub fn alpha(&self) -> &EpSeq {
        &self.alpha
    }

    /// The lower sequence `β`.
    pub fn beta(&self) -> &EpSeq {
        &self.beta
    }

    /// The conjugate pair `(β̄, ᾱ)`, coding the mirror hole.
    pub fn mirror_swap(&self) -> LexPair {
        LexPair {
            alpha: self.beta.mirror(),
            beta: self.alpha.mirror(),
        }
    }

    /// Whether both components are purely periodic.
    pub fn is_periodic(&self) -> bool {
        self.alpha.is_purely_periodic() && self.beta.is_purely_periodic()
    }
}

impl fmt::Display for LexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.alpha, self.beta)
    }
}

impl fmt::Debug for LexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Position of a pair relative to the lexicographic world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum PairClass {
    /// All Parry and cross conditions hold.
    InLW,
    /// Both `M_α(β)` and `N_β(α)` exist.
    TwoSidedExtremal {
        /// Least `m ≥ 1` with `σᵐ(β) ≻ α`.
        #[serde(rename = "M")]
        m: usize,
        /// Least `n ≥ 1` with `σⁿ(α) ≺ β`.
        #[serde(rename = "N")]
        n: usize,
    },
    /// Only `M_α(β)` exists.
    RightExtremal {
        /// Least `m ≥ 1` with `σᵐ(β) ≻ α`.
        #[serde(rename = "M")]
        m: usize,
    },
    /// Only `N_β(α)` exists.
    LeftExtremal {
        /// Least `n ≥ 1` with `σⁿ(α) ≺ β`.
        #[serde(rename = "N")]
        n: usize,
    },
    /// `α` is not Parry or `β` is not co-Parry.
    NotParryPair,
}

impl PairClass {
    /// The class of the mirror-swapped pair.
    pub fn mirrored(self) -> PairClass {
        match self {
            PairClass::TwoSidedExtremal { m, n } => PairClass::TwoSidedExtremal { m: n, n: m },
            PairClass::RightExtremal { m } => PairClass::LeftExtremal { n: m },
            PairClass::LeftExtremal { n } => PairClass::RightExtremal { m: n },
            other => other,
        }
    }
}

/// Whether `x` starts with 1 and dominates all its shifts.
pub fn is_parry(x: &EpSeq) -> bool {
    x.first() == 1 && x.positive_shifts().iter().all(|s| s <= x)
}

/// Whether `x` starts with 0 and its complement is Parry.
pub fn is_coparry(x: &EpSeq) -> bool {
    x.first() == 0 && is_parry(&x.mirror())
}

/// `(x₁ … x_{n−1} 0)^∞` for the given `n ≥ 2`.
fn cut_with(x: &EpSeq, n: usize, last: u8) -> EpSeq {
    let mut w = x.prefix(n - 1);
    w.push(last);
    EpSeq::periodic(w).expect("nonempty period")
}

/// The Parry sequence `ς(x)`: `x` itself if Parry, else
/// `(x₁ … x_{n−1} 0)^∞` with `n` the least index with `σⁿ(x) ≻ x`.
pub fn varsigma(x: &EpSeq) -> Result<EpSeq, LexError> {
    if x.first() != 1 {
        return Err(LexError::WrongStart(x.clone()));
    }
    match x.positive_shifts().iter().position(|s| s > x) {
        None => Ok(x.clone()),
        // σ¹(x) ≻ x is impossible when x₁ = 1, so the cut index is at least 2.
        Some(i) => Ok(cut_with(x, i + 1, 0)),
    }
}

/// The co-Parry sequence `ς′(x) = mirror(ς(mirror x))`.
pub fn varsigma_prime(x: &EpSeq) -> Result<EpSeq, LexError> {
    if x.first() != 0 {
        return Err(LexError::WrongStart(x.clone()));
    }
    Ok(varsigma(&x.mirror())?.mirror())
}

/// `M_α(β)`: least `m ≥ 1` with `σᵐ(β) ≻ α`.
pub fn m_witness(p: &LexPair) -> Option<usize> {
    p.beta
        .positive_shifts()
        .iter()
        .position(|s| s > &p.alpha)
        .map(|i| i + 1)
}

/// `N_β(α)`: least `n ≥ 1` with `σⁿ(α) ≺ β`.
pub fn n_witness(p: &LexPair) -> Option<usize> {
    p.alpha
        .positive_shifts()
        .iter()
        .position(|s| s < &p.beta)
        .map(|i| i + 1)
}

/// Classifies a pair relative to the lexicographic world.
pub fn classify(p: &LexPair) -> PairClass {
    if !is_parry(&p.alpha) || !is_coparry(&p.beta) {
        return PairClass::NotParryPair;
    }
    match (m_witness(p), n_witness(p)) {
        (None, None) => PairClass::InLW,
        (Some(m), Some(n)) => PairClass::TwoSidedExtremal { m, n },
        (Some(m), None) => PairClass::RightExtremal { m },
        (None, Some(n)) => PairClass::LeftExtremal { n },
    }
}

/// `ι(α, β) = ((α₁…α_{N−1}0)^∞, (β₁…β_{M−1}1)^∞)` for a two-sided extremal pair.
pub fn iota(p: &LexPair) -> Result<LexPair, LexError> {
    match classify(p) {
        PairClass::TwoSidedExtremal { m, n } => {
            if m < 2 || n < 2 {
                return Err(LexError::DegenerateExtremal {
                    m: Some(m),
                    n: Some(n),
                });
            }
            LexPair::new(cut_with(&p.alpha, n, 0), cut_with(&p.beta, m, 1))
        }
        found => Err(LexError::ClassMismatch {
            expected: "two-sided extremal",
            found,
        }),
    }
}

/// `ξ(α, β) = (α, (β₁…β_{M−1}1)^∞)` for a right-extremal pair.
pub fn xi(p: &LexPair) -> Result<LexPair, LexError> {
    match classify(p) {
        PairClass::RightExtremal { m } => {
            if m < 2 {
                return Err(LexError::DegenerateExtremal {
                    m: Some(m),
                    n: None,
                });
            }
            LexPair::new(p.alpha.clone(), cut_with(&p.beta, m, 1))
        }
        found => Err(LexError::ClassMismatch {
            expected: "right-extremal",
            found,
        }),
    }
}

/// `ξ′(α, β) = ((α₁…α_{N−1}0)^∞, β)` for a left-extremal pair.
pub fn xi_prime(p: &LexPair) -> Result<LexPair, LexError> {
    match classify(p) {
        PairClass::LeftExtremal { n } => {
            if n < 2 {
                return Err(LexError::DegenerateExtremal {
                    m: None,
                    n: Some(n),
                });
            }
            LexPair::new(cut_with(&p.alpha, n, 0), p.beta.clone())
        }
        found => Err(LexError::ClassMismatch {
            expected: "left-extremal",
            found,
        }),
    }
}

/// Upper bound on normalisation rounds; each round strictly shrinks the
/// window `[β, α]`, and in practice one round suffices.
const MAX_NORMALIZE_ROUNDS: usize = 64;

/// Replaces a pair by the pair of the lexicographic world with the same subshift.
///
/// Non-Parry components are first replaced by `ς(α)`, `ς′(β)`; extremal
/// pairs are then mapped by `ι`, `ξ` or `ξ′`. If the image is again not in
/// `LW` the procedure is repeated.
pub fn normalize(p: &LexPair) -> Result<LexPair, LexError> {
    let mut cur = p.clone();
    for _ in 0..MAX_NORMALIZE_ROUNDS {
        if classify(&cur) == PairClass::NotParryPair {
            cur = LexPair::new(varsigma(&cur.alpha)?, varsigma_prime(&cur.beta)?)?;
        }
        cur = match classify(&cur) {
            PairClass::InLW => return Ok(cur),
            PairClass::TwoSidedExtremal { .. } => iota(&cur)?,
            PairClass::RightExtremal { .. } => xi(&cur)?,
            PairClass::LeftExtremal { .. } => xi_prime(&cur)?,
            PairClass::NotParryPair => unreachable!("ς and ς′ produce Parry components"),
        };
        if classify(&cur) == PairClass::InLW {
            return Ok(cur);
        }
    }
    Err(LexError::NotNormalized(p.clone()))
}

/// Samples the devil's staircase `x ↦ π(ς(π⁻¹(x)))` on `[1/2, 1]`.
pub fn staircase_sample(
    xs: &[Rational],
) -> Result<Vec<(Rational, Rational)>, crate::circle::CircleError> {
    xs.iter()
        .map(|x| {
            let s = to_binary(x, Expansion::Upper)?;
            let y = match varsigma(&s) {
                Ok(v) => from_binary(&v),
                Err(_) => return Err(crate::circle::CircleError::OutOfRange(x.clone())),
            };
            Ok((x.clone(), y))
        })
        .collect()
}

/// Candidate truncations `(x₁ … x_{i−1} c)^∞` at positions `i` past the
/// longest run of the symbol `1 − c` with `x_i = 1 − c`, in order of `i`.
fn truncations(x: &EpSeq, c: u8, skip: RunLength, limit: usize) -> Vec<EpSeq> {
    let start = match skip {
        RunLength::Finite(r) => r + 1,
        RunLength::Unbounded => return Vec::new(),
    };
    (start.max(2)..=limit)
        .filter(|&i| x.at(i - 1) != c)
        .map(|i| cut_with(x, i, c))
        .collect()
}

/// The first `k` terms of an inner sequence of purely periodic pairs in `LW`
/// converging to `p` from inside the window `[β, α]`.
///
/// Purely periodic components are kept fixed. Candidate pairs that fail the
/// cross conditions are skipped, so fewer than `k` pairs may be returned if
/// the scanned prefix (a generous multiple of the orbit sizes) runs out.
pub fn periodic_approximations(p: &LexPair, k: usize) -> Vec<LexPair> {
    let limit_for = |x: &EpSeq| x.preperiod().len() + x.period().len() * (4 * k + 8) + 8;
    let runs_a = run_stats(&p.alpha);
    let runs_b = run_stats(&p.beta);

    let alphas: Vec<EpSeq> = if p.alpha.is_purely_periodic() {
        Vec::new()
    } else {
        let mut out: Vec<EpSeq> = Vec::new();
        for c in truncations(&p.alpha, 0, runs_a.max_one_run, limit_for(&p.alpha)) {
            let grows = out.last().is_none_or(|l| c > *l);
            if grows && is_parry(&c) && c <= p.alpha {
                out.push(c);
            }
        }
        out
    };
    let betas: Vec<EpSeq> = if p.beta.is_purely_periodic() {
        Vec::new()
    } else {
        let mut out: Vec<EpSeq> = Vec::new();
        for c in truncations(&p.beta, 1, runs_b.max_zero_run, limit_for(&p.beta)) {
            let shrinks = out.last().is_none_or(|l| c < *l);
            if shrinks && is_coparry(&c) && c >= p.beta {
                out.push(c);
            }
        }
        out
    };

    let terms = alphas.len().max(betas.len()).max(1);
    let pick = |list: &Vec<EpSeq>, fixed: &EpSeq, i: usize| -> Option<EpSeq> {
        if list.is_empty() {
            // Purely periodic components are their own approximations; a
            // non-periodic component without candidates yields nothing.
            fixed.is_purely_periodic().then(|| fixed.clone())
        } else {
            list.get(i.min(list.len() - 1)).cloned()
        }
    };
    let mut out: Vec<LexPair> = Vec::new();
    for i in 0..terms {
        if out.len() == k {
            break;
        }
        let (Some(a), Some(b)) = (pick(&alphas, &p.alpha, i), pick(&betas, &p.beta, i)) else {
            break;
        };
        let Ok(pair) = LexPair::new(a, b) else {
            continue;
        };
        if classify(&pair) == PairClass::InLW && out.last() != Some(&pair) {
            out.push(pair);
        }
    }
    out
}

/// Lexicographic order of two pairs' windows: `true` when `[β′, α′] ⊆ [β, α]`.
pub fn window_contains(outer: &LexPair, inner: &LexPair) -> bool {
    inner.alpha.compare(&outer.alpha) != Ordering::Greater
        && inner.beta.compare(&outer.beta) != Ordering::Less
}

/// The purely periodic word `w^∞` as a sequence.
pub fn periodic(w: &Word) -> EpSeq {
    EpSeq::periodic(w.clone()).expect("nonempty word")
}

/// All pairs `(u^∞, v^∞)` in the lexicographic world with primitive periods
/// of length at most `qmax`, sorted by `α` then `β`.
pub fn periodic_pairs(qmax: usize) -> Vec<LexPair> {
    let mut parry = Vec::new();
    let mut coparry = Vec::new();
    for len in 1..=qmax {
        for bits in 0u64..(1u64 << len) {
            let w = Word::new(
                (0..len)
                    .map(|i| ((bits >> (len - 1 - i)) & 1) as u8)
                    .collect(),
            )
            .expect("binary");
            if !w.is_primitive() {
                continue;
            }
            let x = periodic(&w);
            if is_parry(&x) {
                parry.push(x.clone());
            }
            if is_coparry(&x) {
                coparry.push(x);
            }
        }
    }
    parry.sort();
    coparry.sort();
    let mut out = Vec::new();
    for a in &parry {
        for b in &coparry {
            if let Ok(p) = LexPair::new(a.clone(), b.clone()) {
                if classify(&p) == PairClass::InLW {
                    out.push(p);
                }
            }
        }
    }
    out
}
