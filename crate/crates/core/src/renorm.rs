//! Renormalisation of kneading pairs, balanced words, bridge words and
//! transitivity verdicts.
//!
//! A pair in the lexicographic world is *renormalisable* by two words `ω`
//! (starting with 0, its own 0-maximal rotation) and `ν` (starting with 1,
//! its own 1-minimal rotation) when `0α` and `1β` factor over `{ω, ν}` with
//! `0α` beginning `ων` and `1β` beginning `νω`. Because `ω` and `ν` start
//! with different symbols, a factorisation over `{ω, ν}` is unique and is
//! found greedily by reading the next symbol; since the sequences are
//! eventually periodic the block stream is eventually periodic too, and it
//! is detected by the repetition of the position class at a block boundary.
//!
//! Renormalisable pairs are generally not transitive, while pairs with
//! periodic components that do not renormalise (*essential* pairs) give
//! transitive subshifts of finite type.

use std::collections::HashMap;
use std::fmt;

use num::{BigInt, Integer, One, Signed};
use num_traits::Float;
use serde::Serialize;
use thiserror::Error;

use crate::lexworld::LexPair;
use crate::subshift::{comparison_automaton, language, point_in, Dfa, SubshiftError};
use crate::words::{
    factor_split, is_cyclically_balanced, one_min, run_stats, zero_max, EpSeq, RunLength, Word,
};
use crate::Rational;

/// Errors raised by renormalisation operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenormError {
    /// A ratio outside `(0, 1)`.
    #[error("ratio {0} is not in (0, 1)")]
    InvalidRatio(Rational),
    /// The pair does not factor over the two words.
    #[error("{pair} does not factor over {{{omega}, {nu}}}")]
    ParseFailure {
        /// The pair.
        pair: Box<LexPair>,
        /// First word.
        omega: Word,
        /// Second word.
        nu: Word,
    },
    /// Bridge words need an essential pair.
    #[error("pair is not essential: {0:?}")]
    NotEssential(Box<RenormVerdict>),
    /// The bridge-word postconditions failed.
    #[error("bridge words ({p1}, {p2}) fail their postconditions for {pair}")]
    BridgeCheckFailed {
        /// The pair.
        pair: Box<LexPair>,
        /// First bridge word.
        p1: Word,
        /// Second bridge word.
        p2: Word,
    },
    /// An automaton could not be built.
    #[error(transparent)]
    Subshift(#[from] SubshiftError),
}

/// Which component of the pair carries the finite word of an infinite renormalisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    /// `0α = w · 1β` with `w` 0-maximal.
    Alpha,
    /// `1β = w · 0α` with `w` 1-minimal.
    Beta,
}

/// Shape of the block streams of a renormalisable pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TailForm {
    /// Neither `0α = ων^∞` nor `1β = νω^∞`.
    None,
    /// `0α = ων^∞` and `1β = νω^∞`.
    OmegaNuInf,
    /// `0α = ων^∞` only.
    AlphaOnly,
    /// `1β = νω^∞` only.
    BetaOnly,
}

/// Outcome of the renormalisation search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum RenormVerdict {
    /// Both components periodic and no renormalisation: `0α = ω^∞`, `1β = ν^∞`.
    Essential {
        /// The associated words `(ω, ν)`.
        assoc: (Word, Word),
    },
    /// Renormalisable by the shortest valid words.
    Renormalizable {
        /// The 0-maximal word.
        omega: Word,
        /// The 1-minimal word.
        nu: Word,
        /// `ℓ(ω) + ℓ(ν) = 3`.
        trivial: bool,
        /// Shape of the block streams.
        tail_form: TailForm,
    },
    /// Renormalisable by a finite word and an infinite sequence.
    InfiniteRenorm {
        /// The finite word.
        finite_word: Word,
        /// The component it prefixes.
        side: Side,
    },
    /// No renormalisation up to the cap, but some component is not periodic.
    Inconclusive {
        /// Search cap on `ℓ(ω) + ℓ(ν)`.
        cap: usize,
    },
}

/// Why a subshift is transitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TransitiveReason {
    /// Not renormalisable up to the search cap.
    NonRenormalizable,
    /// Balanced tails of equal ratio.
    BalancedTail,
    /// Essential pair.
    Essential,
    /// Decided by the bounded bridge search.
    Empirical,
}

/// Why a subshift is not transitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NonTransitiveReason {
    /// Finite renormalisation.
    Renormalizable,
    /// Renormalisation by an infinite sequence.
    InfiniteRenorm,
    /// `β = 0ⁿα` with `n` beyond the longest zero run of `α`.
    ZeroBlock,
    /// Decided by the bounded bridge search.
    Empirical,
}

/// Transitivity verdict with evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum TransitivityVerdict {
    /// The subshift is transitive.
    Transitive {
        /// Why.
        reason: TransitiveReason,
    },
    /// The subshift is not transitive; no word leads from the first witness
    /// word to the second.
    NotTransitive {
        /// Why.
        reason: NonTransitiveReason,
        /// Admissible words `(u, v)` with no bridge `u·w·v`.
        witness: (Word, Word),
    },
    /// Undecided within the search cap.
    Unknown {
        /// The cap.
        cap: usize,
    },
}

impl TransitivityVerdict {
    /// Whether the verdict is `Transitive`.
    pub fn is_transitive(&self) -> Option<bool> {
        match self {
            TransitivityVerdict::Transitive { .. } => Some(true),
            TransitivityVerdict::NotTransitive { .. } => Some(false),
            TransitivityVerdict::Unknown { .. } => None,
        }
    }
}

/// Bridge words `(p1, p2)` of an essential pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BridgePair {
    /// First word.
    pub p1: Word,
    /// Second word.
    pub p2: Word,
}

impl BridgePair {
    /// The concatenation `p1 p2`.
    pub fn joined(&self) -> Word {
        self.p1.concat(&self.p2)
    }
}

fn periodic(w: &Word) -> EpSeq {
    EpSeq::periodic(w.clone()).expect("nonempty word")
}

/// The cyclically balanced words `(ω_r, ν_r)` of ratio `r = p/q`: the
/// 0-maximal and 1-minimal rotations of the Christoffel word with `p` ones
/// and length `q`.
pub fn sturmian_words(r: &Rational) -> Result<(Word, Word), RenormError> {
    if !r.is_positive() || *r >= Rational::one() {
        return Err(RenormError::InvalidRatio(r.clone()));
    }
    let (p, q) = (r.numer().clone(), r.denom().clone());
    let qn: usize = q.to_string().parse().expect("denominator fits in usize");
    let floor = |i: usize| -> BigInt { (&p * BigInt::from(i)).div_floor(&q) };
    let symbols: Vec<u8> = (0..qn)
        .map(|i| {
            if floor(i + 1) - floor(i) == BigInt::one() {
                1
            } else {
                0
            }
        })
        .collect();
    let w = Word::new(symbols).expect("binary");
    Ok((
        zero_max(&w).expect("0 < p < q"),
        one_min(&w).expect("0 < p < q"),
    ))
}

/// Farey data of two rationals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Farey {
    /// `p₁q₂ − p₂q₁ = 1`.
    pub neighbours: bool,
    /// `(p₁+p₂)/(q₁+q₂)`.
    #[serde(serialize_with = "crate::rational_serde::serialize")]
    pub mediant: Rational,
}

/// Whether `r1 = p₁/q₁` and `r2 = p₂/q₂` are Farey neighbours, and their mediant.
pub fn farey(r1: &Rational, r2: &Rational) -> Farey {
    let (p1, q1) = (r1.numer(), r1.denom());
    let (p2, q2) = (r2.numer(), r2.denom());
    Farey {
        neighbours: p1 * q2 - p2 * q1 == BigInt::one(),
        mediant: Rational::new(p1 + p2, q1 + q2),
    }
}

/// Parses `x` greedily into blocks `ω` (code 0) and `ν` (code 1), which must
/// start with different symbols. Returns the eventually periodic code
/// sequence, or `None` if the parse fails.
pub fn block_code(x: &EpSeq, omega: &Word, nu: &Word) -> Option<EpSeq> {
    debug_assert!(!omega.is_empty() && !nu.is_empty());
    let (first_o, first_n) = (omega.symbols()[0], nu.symbols()[0]);
    if first_o == first_n {
        return None;
    }
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut codes: Vec<u8> = Vec::new();
    let mut pos = 0usize;
    loop {
        let class = x.position_class(pos);
        if let Some(&start) = seen.get(&class) {
            let pre = Word::new(codes[..start].to_vec()).expect("binary");
            let per = Word::new(codes[start..].to_vec()).expect("binary");
            return EpSeq::new(pre, per).ok();
        }
        seen.insert(class, codes.len());
        let (block, code) = if x.at(pos) == first_o {
            (omega, 0)
        } else {
            (nu, 1)
        };
        if !x.shift(pos).starts_with(block) {
            return None;
        }
        codes.push(code);
        pos += block.len();
    }
}

/// Whether `x = σⁿ(y)` for some concatenation `y` of the words `ω`, `ν`
/// (an element of the coded system `{ω, ν}^∞`).
pub fn two_word_membership(omega: &Word, nu: &Word, x: &EpSeq) -> bool {
    if omega.is_empty() || nu.is_empty() {
        return false;
    }
    // Parse graph on position classes: an edge p → p + ℓ(b) whenever block b
    // occurs at p. x parses from p iff an infinite path leaves p.
    let classes = x.orbit_size();
    let raw: Vec<[Option<usize>; 2]> = (0..classes)
        .map(|c| {
            let tail = x.shift(c);
            let edge = |b: &Word| tail.starts_with(b).then(|| x.position_class(c + b.len()));
            [edge(omega), edge(nu)]
        })
        .collect();
    // x = σⁿ(y): some block b has x starting with its suffix b[n..] and the
    // rest of x parses.
    [omega, nu].iter().any(|b| {
        (0..b.len()).any(|n| {
            let suffix = b.slice(n, b.len());
            x.starts_with(&suffix) && {
                let start = x.position_class(suffix.len());
                !Dfa::pruned(&raw, start).0.is_empty()
            }
        })
    })
}

/// `log₂ λ` where `λ⁻ˡ¹ + λ⁻ˡ² = 1`: the entropy of the renewal system
/// generated by two words of lengths `l1` and `l2`.
pub fn renewal_entropy<T: Float>(l1: u32, l2: u32) -> T {
    assert!(l1 >= 1 && l2 >= 1, "word lengths must be positive");
    let f = |lam: T| lam.powi(-(l1 as i32)) + lam.powi(-(l2 as i32)) - T::one();
    let (mut lo, mut hi) = (T::one(), T::one() + T::one());
    let tol = T::from(1e-12).expect("representable");
    // f is decreasing on [1, 2] with f(1) = 1 > 0 ≥ f(2).
    while hi - lo > tol * lo {
        let mid = (lo + hi) / (T::one() + T::one());
        if f(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ((lo + hi) / (T::one() + T::one())).log2()
}

/// Default renormalisation search cap: twice the total orbit size of the pair.
pub fn default_cap(p: &LexPair) -> usize {
    2 * (p.alpha().orbit_size() + p.beta().orbit_size())
}

/// Per-word data of a candidate: the word, its infinite power and the
/// infinite power of its opposite extremal rotation (1-minimal for `ω`,
/// 0-maximal for `ν`). `None` when the word is not its own extremal rotation.
type Candidate = (Word, EpSeq, EpSeq);

fn omega_candidate(omega: Word) -> Option<Candidate> {
    if zero_max(&omega).ok()? != omega {
        return None;
    }
    let opposite = periodic(&one_min(&omega).ok()?);
    let inf = periodic(&omega);
    Some((omega, inf, opposite))
}

fn nu_candidate(nu: Word) -> Option<Candidate> {
    if one_min(&nu).ok()? != nu {
        return None;
    }
    let opposite = periodic(&zero_max(&nu).ok()?);
    let inf = periodic(&nu);
    Some((nu, inf, opposite))
}

fn tail_form(code_a: &EpSeq, code_b: &EpSeq) -> TailForm {
    let a_tail = *code_a == "0|1".parse::<EpSeq>().expect("literal");
    let b_tail = *code_b == "1|0".parse::<EpSeq>().expect("literal");
    match (a_tail, b_tail) {
        (true, true) => TailForm::OmegaNuInf,
        (true, false) => TailForm::AlphaOnly,
        (false, true) => TailForm::BetaOnly,
        (false, false) => TailForm::None,
    }
}

/// The shortest finite renormalisation `(ω, ν)` with `3 ≤ ℓ(ων) ≤ cap`,
/// together with the block codes of `0α` and `1β`.
pub fn find_renormalization(p: &LexPair, cap: usize) -> Option<(Word, Word, EpSeq, EpSeq)> {
    let a0 = p.alpha().prepend(&Word::constant(0, 1));
    let b1 = p.beta().prepend(&Word::constant(1, 1));
    let omegas: Vec<Option<Candidate>> = (0..cap).map(|l| omega_candidate(a0.prefix(l))).collect();
    let nus: Vec<Option<Candidate>> = (0..cap).map(|l| nu_candidate(b1.prefix(l))).collect();
    let leading_a: Word = "01".parse().expect("literal");
    let leading_b: Word = "10".parse().expect("literal");
    for total in 3..=cap {
        for lo in 1..total {
            let (Some((omega, omega_inf, omega_opp)), Some((nu, nu_inf, nu_opp))) =
                (&omegas[lo], &nus[total - lo])
            else {
                continue;
            };
            // (0-max ν)^∞ ≼ ω^∞ and ν^∞ ≼ (1-min ω)^∞.
            if nu_opp > omega_inf || nu_inf > omega_opp {
                continue;
            }
            let (Some(ca), Some(cb)) = (block_code(&a0, omega, nu), block_code(&b1, omega, nu))
            else {
                continue;
            };
            // Leading blocks: 0α = ων…, 1β = νω….
            if ca.starts_with(&leading_a) && cb.starts_with(&leading_b) {
                return Some((omega.clone(), nu.clone(), ca, cb));
            }
        }
    }
    None
}

/// Renormalisation by an infinite sequence: `1β = w·0α` with `w` 1-minimal
/// (side `Beta`) or `0α = w·1β` with `w` 0-maximal (side `Alpha`), where the
/// infinite sequence is not purely periodic and `ℓ(w) ≥ 2`.
pub fn find_infinite_renormalization(p: &LexPair) -> Option<(Word, Side)> {
    let a0 = p.alpha().prepend(&Word::constant(0, 1));
    let b1 = p.beta().prepend(&Word::constant(1, 1));
    let search = |long: &EpSeq, tail: &EpSeq, side: Side| -> Option<(Word, Side)> {
        if tail.is_purely_periodic() {
            return None;
        }
        (2..=long.orbit_size()).find_map(|l| {
            if long.shift(l) != *tail {
                return None;
            }
            let w = long.prefix(l);
            let canonical = match side {
                Side::Beta => one_min(&w).ok(),
                Side::Alpha => zero_max(&w).ok(),
            };
            (canonical.as_ref() == Some(&w)).then_some((w, side))
        })
    };
    search(&b1, &a0, Side::Beta).or_else(|| search(&a0, &b1, Side::Alpha))
}

/// Searches for a renormalisation of a normalised pair.
pub fn detect_renorm(p: &LexPair, cap: usize) -> RenormVerdict {
    if let Some((omega, nu, ca, cb)) = find_renormalization(p, cap) {
        return RenormVerdict::Renormalizable {
            trivial: omega.len() + nu.len() == 3,
            tail_form: tail_form(&ca, &cb),
            omega,
            nu,
        };
    }
    if let Some((finite_word, side)) = find_infinite_renormalization(p) {
        return RenormVerdict::InfiniteRenorm { finite_word, side };
    }
    let a0 = p.alpha().prepend(&Word::constant(0, 1));
    let b1 = p.beta().prepend(&Word::constant(1, 1));
    if a0.is_purely_periodic() && b1.is_purely_periodic() {
        RenormVerdict::Essential {
            assoc: (a0.period().clone(), b1.period().clone()),
        }
    } else {
        RenormVerdict::Inconclusive { cap }
    }
}

/// The renormalised pair `(σ(ρ(0α)), σ(ρ(1β)))` with `ρ(ω) = 0`, `ρ(ν) = 1`.
pub fn renorm_operator(p: &LexPair, omega: &Word, nu: &Word) -> Result<LexPair, RenormError> {
    let fail = || RenormError::ParseFailure {
        pair: Box::new(p.clone()),
        omega: omega.clone(),
        nu: nu.clone(),
    };
    if omega.is_empty() || nu.is_empty() {
        return Err(fail());
    }
    let a0 = p.alpha().prepend(&Word::constant(0, 1));
    let b1 = p.beta().prepend(&Word::constant(1, 1));
    let ca = block_code(&a0, omega, nu).ok_or_else(fail)?;
    let cb = block_code(&b1, omega, nu).ok_or_else(fail)?;
    LexPair::new(ca.shift(1), cb.shift(1)).map_err(|_| fail())
}

/// Bridge words of an essential pair with associated words `(ω, ν)`.
///
/// With `ω = ω_α ν_α` and `zero_max(ν) = ω_β ν_β` the factor splits, `p1` is
/// whichever of `ω_α`, `ω_β` has the larger infinite power and `p2` whichever
/// of `ν_α`, `ν_β` has the smaller one. The postconditions (`p1p2`, `p2p1`
/// admissible and `(p1p2)^∞` in the subshift) are checked.
pub fn bridge_words(p: &LexPair, verdict: &RenormVerdict) -> Result<BridgePair, RenormError> {
    let RenormVerdict::Essential { assoc: (omega, nu) } = verdict else {
        return Err(RenormError::NotEssential(Box::new(verdict.clone())));
    };
    let not_essential = || RenormError::NotEssential(Box::new(verdict.clone()));
    let (wa, na) = factor_split(omega).map_err(|_| not_essential())?;
    let zn = zero_max(nu).map_err(|_| not_essential())?;
    let (wb, nb) = factor_split(&zn).map_err(|_| not_essential())?;
    let p1 = if periodic(&wa) >= periodic(&wb) {
        wa
    } else {
        wb
    };
    let p2 = if periodic(&na) <= periodic(&nb) {
        na
    } else {
        nb
    };
    let dfa = language(p)?;
    let joined = p1.concat(&p2);
    let ok =
        dfa.accepts(&joined) && dfa.accepts(&p2.concat(&p1)) && point_in(p, &periodic(&joined));
    if !ok {
        return Err(RenormError::BridgeCheckFailed {
            pair: Box::new(p.clone()),
            p1,
            p2,
        });
    }
    Ok(BridgePair { p1, p2 })
}

/// Whether no word `w` makes `u·w·v` admissible (exact: explores every state
/// reachable after `u`). Returns `false` if `u` or `v` is not admissible.
pub fn no_bridge(dfa: &Dfa, u: &Word, v: &Word) -> bool {
    let Some(q) = dfa.run(u.symbols()) else {
        return false;
    };
    if !dfa.accepts(v) {
        return false;
    }
    let reach = dfa.reachable_from(q);
    reach
        .iter()
        .enumerate()
        .filter(|(_, r)| **r)
        .all(|(s, _)| dfa.run_from(s, v.symbols()).is_none())
}

/// A shortest word `w` with `u·w·v` admissible, if any (breadth-first search
/// from the state after `u`).
pub fn shortest_bridge(dfa: &Dfa, u: &Word, v: &Word) -> Option<Word> {
    let q = dfa.run(u.symbols())?;
    let mut parent: Vec<Option<(usize, u8)>> = vec![None; dfa.num_states()];
    let mut visited = vec![false; dfa.num_states()];
    let mut queue = std::collections::VecDeque::from([q]);
    visited[q] = true;
    while let Some(s) = queue.pop_front() {
        if dfa.run_from(s, v.symbols()).is_some() {
            let mut symbols = Vec::new();
            let mut cur = s;
            while let Some((prev, c)) = parent[cur] {
                symbols.push(c);
                cur = prev;
            }
            symbols.reverse();
            return Some(Word::new(symbols).expect("binary"));
        }
        for c in 0..2u8 {
            if let Some(t) = dfa.step(s, c) {
                if !visited[t] {
                    visited[t] = true;
                    parent[t] = Some((s, c));
                    queue.push_back(t);
                }
            }
        }
    }
    None
}

/// Finds admissible words `u, v` of length `n` with no bridge from `u` to `v`.
pub fn find_bridgeless_pair(dfa: &Dfa, n: usize) -> Option<(Word, Word)> {
    let words = dfa.words(n);
    let readable: Vec<Vec<bool>> = (0..dfa.num_states())
        .map(|s| {
            words
                .iter()
                .map(|w| dfa.run_from(s, w.symbols()).is_some())
                .collect()
        })
        .collect();
    for u in &words {
        let q = dfa.run(u.symbols())?;
        let reach = dfa.reachable_from(q);
        for (i, v) in words.iter().enumerate() {
            if !(0..dfa.num_states()).any(|s| reach[s] && readable[s][i]) {
                return Some((u.clone(), v.clone()));
            }
        }
    }
    None
}

/// Independent oracle: whether every ordered pair `(u, v) ∈ B_n × B_n` has a
/// bridge `w` with `ℓ(w) ≤ kmax` and `u·w·v` admissible. Uses the comparison
/// automaton, which does not rely on the Parry or cross conditions.
pub fn brute_force_transitive(p: &LexPair, n: usize, kmax: usize) -> Result<bool, SubshiftError> {
    let dfa = comparison_automaton(p)?;
    Ok(bounded_bridges_exist(&dfa, n, kmax))
}

/// Whether every pair of words of length `n` is bridged within `kmax` symbols.
pub fn bounded_bridges_exist(dfa: &Dfa, n: usize, kmax: usize) -> bool {
    let words = dfa.words(n);
    let states = dfa.num_states();
    let readable: Vec<Vec<bool>> = (0..states)
        .map(|s| {
            words
                .iter()
                .map(|w| dfa.run_from(s, w.symbols()).is_some())
                .collect()
        })
        .collect();
    let mut cache: HashMap<usize, bool> = HashMap::new();
    words.iter().all(|u| {
        let q = dfa.run(u.symbols()).expect("u is admissible");
        *cache.entry(q).or_insert_with(|| {
            let mut within = vec![false; states];
            let mut layer = vec![q];
            within[q] = true;
            for _ in 0..kmax {
                let mut next = Vec::new();
                for &s in &layer {
                    for c in 0..2u8 {
                        if let Some(r) = dfa.step(s, c) {
                            if !within[r] {
                                within[r] = true;
                                next.push(r);
                            }
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                layer = next;
            }
            (0..words.len()).all(|i| (0..states).any(|s| within[s] && readable[s][i]))
        })
    })
}

/// Options for the transitivity decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitivityOptions {
    /// Renormalisation search cap (`None`: [`default_cap`]).
    pub cap: Option<usize>,
    /// Bridge length bound for the empirical oracle.
    pub kmax: usize,
}

impl Default for TransitivityOptions {
    fn default() -> Self {
        TransitivityOptions {
            cap: None,
            kmax: 20,
        }
    }
}

fn empirical(p: &LexPair, opts: &TransitivityOptions) -> TransitivityVerdict {
    let Ok(dfa) = comparison_automaton(p) else {
        return TransitivityVerdict::Unknown {
            cap: opts.cap.unwrap_or_else(|| default_cap(p)),
        };
    };
    let n = p.alpha().orbit_size() + p.beta().orbit_size();
    if bounded_bridges_exist(&dfa, n, opts.kmax) {
        TransitivityVerdict::Transitive {
            reason: TransitiveReason::Empirical,
        }
    } else {
        let witness = find_bridgeless_pair(&dfa, n).unwrap_or_else(|| {
            // Bridges exist but some are longer than kmax.
            (Word::empty(), Word::empty())
        });
        TransitivityVerdict::NotTransitive {
            reason: NonTransitiveReason::Empirical,
            witness,
        }
    }
}

/// Leading exponent of a code sequence after its first symbol: the number of
/// `other` symbols following position 0, or `None` if unbounded.
fn leading_run(code: &EpSeq, other: u8) -> Option<usize> {
    let tail = code.shift(1);
    if tail.period().is_constant() && tail.period().symbols()[0] == other {
        let pre = tail.preperiod().symbols();
        if pre.iter().all(|&c| c == other) {
            return None;
        }
    }
    let mut k = 0;
    while tail.at(k) == other {
        k += 1;
    }
    Some(k)
}

/// Decides transitivity of `Σ_{(α,β)}` for a normalised pair.
pub fn transitivity(p: &LexPair, opts: &TransitivityOptions) -> TransitivityVerdict {
    let cap = opts.cap.unwrap_or_else(|| default_cap(p));
    let dfa = match language(p) {
        Ok(d) => d,
        Err(_) => return TransitivityVerdict::Unknown { cap },
    };
    let verified = |u: Word, v: Word, reason| {
        no_bridge(&dfa, &u, &v).then_some(TransitivityVerdict::NotTransitive {
            reason,
            witness: (u, v),
        })
    };

    // (1) β = 0ⁿα with n beyond the longest zero run of α.
    let zeros = (0..p.beta().orbit_size() + 1)
        .take_while(|&i| p.beta().at(i) == 0)
        .count();
    if zeros > 0 && p.beta().shift(zeros) == *p.alpha() {
        if let RunLength::Finite(r) = run_stats(p.alpha()).max_zero_run {
            if zeros > r {
                let u = Word::constant(0, zeros);
                if let Some(v) = verified(
                    u.clone(),
                    p.alpha().prefix(1),
                    NonTransitiveReason::ZeroBlock,
                ) {
                    return v;
                }
                if let Some(w) = find_bridgeless_pair(&dfa, zeros + 1) {
                    return TransitivityVerdict::NotTransitive {
                        reason: NonTransitiveReason::ZeroBlock,
                        witness: w,
                    };
                }
            }
        }
    }

    match detect_renorm(p, cap) {
        RenormVerdict::InfiniteRenorm { finite_word, .. } => {
            let n = finite_word.len() + p.alpha().orbit_size() + p.beta().orbit_size();
            match find_bridgeless_pair(&dfa, n) {
                Some(w) => TransitivityVerdict::NotTransitive {
                    reason: NonTransitiveReason::InfiniteRenorm,
                    witness: w,
                },
                None => empirical(p, opts),
            }
        }
        RenormVerdict::Renormalizable {
            omega,
            nu,
            tail_form,
            ..
        } => {
            let balanced = tail_form == TailForm::OmegaNuInf
                && omega.len() == nu.len()
                && omega.ones() == nu.ones()
                && is_cyclically_balanced(&omega)
                && is_cyclically_balanced(&nu);
            if balanced {
                return TransitivityVerdict::Transitive {
                    reason: TransitiveReason::BalancedTail,
                };
            }
            if omega.len() + nu.len() <= 4 {
                return empirical(p, opts);
            }
            let a0 = p.alpha().prepend(&Word::constant(0, 1));
            let b1 = p.beta().prepend(&Word::constant(1, 1));
            let ca = block_code(&a0, &omega, &nu).expect("detected parse");
            let cb = block_code(&b1, &omega, &nu).expect("detected parse");
            let mut candidates: Vec<(Word, Word)> = Vec::new();
            if let Some(n1) = leading_run(&ca, 1) {
                candidates.push((omega.concat(&Word::constant(1, 1)), nu.pow(n1 + 1)));
            }
            if let Some(m1) = leading_run(&cb, 0) {
                candidates.push((nu.concat(&Word::constant(0, 1)), omega.pow(m1 + 1)));
            }
            for k in 1..=4 {
                candidates.push((omega.concat(&Word::constant(1, 1)), nu.pow(k)));
                candidates.push((nu.concat(&Word::constant(0, 1)), omega.pow(k)));
            }
            for (u, v) in candidates {
                if let Some(v) = verified(u, v, NonTransitiveReason::Renormalizable) {
                    return v;
                }
            }
            let n = omega.len() + nu.len() + p.alpha().orbit_size() + p.beta().orbit_size();
            match find_bridgeless_pair(&dfa, n) {
                Some(w) => TransitivityVerdict::NotTransitive {
                    reason: NonTransitiveReason::Renormalizable,
                    witness: w,
                },
                None => empirical(p, opts),
            }
        }
        RenormVerdict::Essential { .. } => TransitivityVerdict::Transitive {
            reason: TransitiveReason::Essential,
        },
        RenormVerdict::Inconclusive { .. } => TransitivityVerdict::Transitive {
            reason: TransitiveReason::NonRenormalizable,
        },
    }
}

impl fmt::Display for TransitivityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitivityVerdict::Transitive { reason } => write!(f, "Transitive({reason:?})"),
            TransitivityVerdict::NotTransitive { reason, witness } => {
                write!(f, "NotTransitive({reason:?}, {}, {})", witness.0, witness.1)
            }
            TransitivityVerdict::Unknown { cap } => write!(f, "Unknown(cap {cap})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::parse_rational;

    fn seq(s: &str) -> EpSeq {
        s.parse().unwrap()
    }

    fn pair(a: &str, b: &str) -> LexPair {
        LexPair::new(seq(a), seq(b)).unwrap()
    }

    fn word(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn sturmian_examples() {
        assert_eq!(
            sturmian_words(&q("1/3")).unwrap(),
            (word("010"), word("100"))
        );
        assert_eq!(
            sturmian_words(&q("2/3")).unwrap(),
            (word("011"), word("101"))
        );
        assert_eq!(
            sturmian_words(&q("2/5")).unwrap(),
            (word("01010"), word("10010"))
        );
        assert!(sturmian_words(&q("1")).is_err());
        assert!(sturmian_words(&q("0")).is_err());
    }

    #[test]
    fn farey_examples() {
        let f = farey(&q("1/2"), &q("1/3"));
        assert!(f.neighbours);
        assert_eq!(f.mediant, q("2/5"));
        let f = farey(&q("1/3"), &q("1/4"));
        assert!(f.neighbours);
        assert_eq!(f.mediant, q("2/7"));
        assert!(!farey(&q("1/2"), &q("1/4")).neighbours);
    }

    #[test]
    fn detect_examples() {
        // 0α = 010(100)^∞, 1β = 100(010)^∞.
        let p = pair("10|100", "00|010");
        assert_eq!(
            detect_renorm(&p, default_cap(&p)),
            RenormVerdict::Renormalizable {
                omega: word("010"),
                nu: word("100"),
                trivial: false,
                tail_form: TailForm::OmegaNuInf,
            }
        );
        let g = pair("|110", "|001");
        assert_eq!(
            detect_renorm(&g, default_cap(&g)),
            RenormVerdict::Essential {
                assoc: (word("011"), word("100"))
            }
        );
        let r = pair("|1101000", "|0001101");
        assert_eq!(
            detect_renorm(&r, default_cap(&r)),
            RenormVerdict::Renormalizable {
                omega: word("0110"),
                nu: word("100"),
                trivial: false,
                tail_form: TailForm::None,
            }
        );
        let c = pair("|10", "|01");
        assert_eq!(
            detect_renorm(&c, default_cap(&c)),
            RenormVerdict::Essential {
                assoc: (word("01"), word("10"))
            }
        );
    }

    #[test]
    fn renorm_operator_examples() {
        let (w, v) = (word("0110"), word("100"));
        // 0α = ων^∞, 1β = νω^∞.
        let p = LexPair::new(
            EpSeq::new(w.slice(1, 4), v.clone()).unwrap(),
            EpSeq::new(v.slice(1, 3), w.clone()).unwrap(),
        )
        .unwrap();
        assert_eq!(renorm_operator(&p, &w, &v).unwrap(), pair("|1", "|0"));
        let r = pair("|1101000", "|0001101");
        assert_eq!(renorm_operator(&r, &w, &v).unwrap(), pair("|10", "|01"));
        assert!(renorm_operator(&pair("|110", "|001"), &w, &v).is_err());
    }

    #[test]
    fn two_word_examples() {
        let (w, v) = (word("01"), word("10"));
        assert!(two_word_membership(&w, &v, &seq("|0110")));
        assert!(!two_word_membership(&w, &v, &seq("|0")));
        assert!(two_word_membership(&w, &v, &seq("|10")));
        assert!(two_word_membership(&w, &v, &seq("|1001")));
        assert!(!two_word_membership(&w, &v, &seq("|001")));
    }

    #[test]
    fn renewal_examples() {
        assert!((renewal_entropy::<f64>(2, 3) - 1.324_717_957_244_746f64.log2()).abs() < 1e-11);
        assert!((renewal_entropy::<f64>(2, 2) - 0.5).abs() < 1e-11);
        assert!((renewal_entropy::<f64>(1, 2) - 0.694_241_913_630_617_3).abs() < 1e-11);
    }

    #[test]
    fn bridge_examples() {
        let g = pair("|110", "|001");
        let v = detect_renorm(&g, default_cap(&g));
        assert_eq!(
            bridge_words(&g, &v).unwrap(),
            BridgePair {
                p1: word("01"),
                p2: word("10")
            }
        );
        let c = pair("|10", "|01");
        let v = detect_renorm(&c, default_cap(&c));
        assert_eq!(
            bridge_words(&c, &v).unwrap(),
            BridgePair {
                p1: word("0"),
                p2: word("1")
            }
        );
        // 0α = (01110)^∞, 1β = (10001)^∞.
        let s = pair("|11100", "|00011");
        let v = detect_renorm(&s, default_cap(&s));
        assert!(matches!(v, RenormVerdict::Essential { .. }), "{v:?}");
        assert_eq!(
            bridge_words(&s, &v).unwrap(),
            BridgePair {
                p1: word("011"),
                p2: word("100")
            }
        );
        let r = pair("|1101000", "|0001101");
        assert!(bridge_words(&r, &detect_renorm(&r, 28)).is_err());
    }

    #[test]
    fn transitivity_examples() {
        let opts = TransitivityOptions::default();
        assert_eq!(
            transitivity(&pair("|110", "|001"), &opts),
            TransitivityVerdict::Transitive {
                reason: TransitiveReason::Essential
            }
        );
        match transitivity(&pair("|1101000", "|0001101"), &opts) {
            TransitivityVerdict::NotTransitive { reason, witness } => {
                assert_eq!(reason, NonTransitiveReason::Renormalizable);
                let dfa = language(&pair("|1101000", "|0001101")).unwrap();
                assert!(no_bridge(&dfa, &witness.0, &witness.1));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            transitivity(&pair("10|100", "00|010"), &opts),
            TransitivityVerdict::Transitive {
                reason: TransitiveReason::BalancedTail
            }
        );
    }

    #[test]
    fn brute_force_examples() {
        assert!(brute_force_transitive(&pair("|110", "|001"), 4, 8).unwrap());
        assert!(!brute_force_transitive(&pair("|1101000", "|0001101"), 7, 20).unwrap());
        assert!(brute_force_transitive(&pair("|1", "|0"), 5, 0).unwrap());
    }

    #[test]
    fn verdicts_agree_with_bridge_search() {
        let opts = TransitivityOptions::default();
        let mut bad = Vec::new();
        for p in crate::lexworld::periodic_pairs(7) {
            let n = p.alpha().orbit_size() + p.beta().orbit_size();
            let verdict = transitivity(&p, &opts);
            let oracle = brute_force_transitive(&p, n, 20).unwrap();
            if verdict.is_transitive() != Some(oracle) {
                bad.push(format!("{p}: {verdict} vs {oracle}"));
            }
        }
        assert!(
            bad.is_empty(),
            "{} disagreements:\n{}",
            bad.len(),
            bad.join("\n")
        );
    }
}
