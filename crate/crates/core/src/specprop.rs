//! Specification numbers and the two families of coded systems built from
//! essential pairs, one with and one without the specification property.
//!
//! For a transitive subshift, `m_n` is the least `k` such that every ordered
//! pair of admissible words `u, v` of length `n` is joined by some bridge `w`
//! of length `k` with `u·w·v` admissible. The computation runs on the
//! language automaton: `u` ends in a state `q_u`, `v` is readable from a set
//! `S_v` of states, and a bridge of length `k` exists iff the states reached
//! from `q_u` in exactly `k` steps meet `S_v`. The reached sets evolve
//! deterministically in `k`, so the search terminates exactly by cycle
//! detection.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lexworld::LexPair;
use crate::renorm::{bridge_words, default_cap, detect_renorm, BridgePair, RenormVerdict};
use crate::subshift::{language, Dfa, SubshiftError};
use crate::words::{EpSeq, Word};

/// Errors raised by specification computations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    /// Some ordered pair of words of length `n` has no bridge at all.
    #[error("subshift is not transitive: words of length {n} cannot be joined")]
    NotTransitive {
        /// Word length.
        n: usize,
    },
    /// Transitive, but no single bridge length serves every pair of words.
    #[error("no common bridge length for words of length {n}")]
    NoCommonLength {
        /// Word length.
        n: usize,
    },
    /// `m_n` did not stabilise.
    #[error("m_n did not stabilise for n <= {nmax}")]
    NonStabilized {
        /// Largest `n` tried.
        nmax: usize,
    },
    /// A family construction hypothesis fails.
    #[error("precondition violated at stage {stage}: {condition}")]
    PreconditionViolation {
        /// Stage index (1-based, the stage being extended).
        stage: usize,
        /// The failing condition.
        condition: String,
    },
    /// A constructed stage is not an essential pair.
    #[error("stage {stage} ({pair}) is not essential: {verdict:?}")]
    NotEssential {
        /// Stage index.
        stage: usize,
        /// The pair.
        pair: LexPair,
        /// Renormalisation verdict.
        verdict: Box<RenormVerdict>,
    },
    /// A constructed stage violates the family's bridge-word hypothesis.
    #[error("stage {stage}: bridge words {found} violate the family hypothesis")]
    BridgeHypothesis {
        /// Stage index.
        stage: usize,
        /// The offending `p1p2`.
        found: Word,
    },
    /// An automaton could not be built.
    #[error(transparent)]
    Subshift(#[from] SubshiftError),
}

/// Whether bridges must have length exactly `k` or at most `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub enum BridgeMode {
    /// Bridges of length exactly `k`.
    #[default]
    Exact,
    /// Bridges of length at most `k`.
    AtMost,
}

/// Fixed-width bit set over automaton states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn meets(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    fn union_with(&mut self, other: &Bits) {
        self.0.iter_mut().zip(&other.0).for_each(|(a, b)| *a |= b);
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64)
                .filter(move |b| bits >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }
}

fn successors(dfa: &Dfa, set: &Bits) -> Bits {
    let mut out = Bits::new(dfa.num_states());
    for s in set.iter() {
        for c in 0..2u8 {
            if let Some(t) = dfa.step(s, c) {
                out.insert(t);
            }
        }
    }
    out
}

/// The end states `q_u` and the distinct start sets `S_v` of all words of
/// one length `n`, advanced one length at a time without enumerating words:
/// the end states are the states reached from the start in `n` steps, and
/// `S_{cv} = {s : step(s, c) ∈ S_v}`. The next layer depends only on the
/// current one, so the sequence of layers is eventually periodic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Layer {
    ends: Bits,
    starts: Vec<Bits>,
}

impl Layer {
    fn initial(dfa: &Dfa) -> Layer {
        let states = dfa.num_states();
        let mut ends = Bits::new(states);
        ends.insert(dfa.start().expect("nonempty automaton"));
        let mut all = Bits::new(states);
        (0..states).for_each(|s| all.insert(s));
        Layer {
            ends,
            starts: vec![all],
        }
    }

    fn next(&self, dfa: &Dfa) -> Layer {
        let states = dfa.num_states();
        let mut starts: Vec<Bits> = Vec::new();
        for set in &self.starts {
            for c in 0..2u8 {
                let mut pre = Bits::new(states);
                (0..states)
                    .filter(|&s| dfa.step(s, c).is_some_and(|t| set.contains(t)))
                    .for_each(|s| pre.insert(s));
                if pre.iter().next().is_some() {
                    starts.push(pre);
                }
            }
        }
        starts.sort_by(|a, b| a.0.cmp(&b.0));
        starts.dedup();
        Layer {
            ends: successors(dfa, &self.ends),
            starts,
        }
    }

    fn at(dfa: &Dfa, n: usize) -> Layer {
        (0..n).fold(Layer::initial(dfa), |layer, _| layer.next(dfa))
    }
}

/// Least bridge length serving every pair of one layer.
fn bridge_length(dfa: &Dfa, layer: &Layer, n: usize, mode: BridgeMode) -> Result<usize, SpecError> {
    let states = dfa.num_states();
    let served = |sets: &[Bits]| sets.iter().all(|r| layer.starts.iter().all(|s| r.meets(s)));
    let singletons: Vec<Bits> = layer
        .ends
        .iter()
        .map(|q| {
            let mut b = Bits::new(states);
            b.insert(q);
            b
        })
        .collect();
    // Reachability at any length decides whether bridges exist at all.
    let closures: Vec<Bits> = layer
        .ends
        .iter()
        .map(|q| {
            let mut b = Bits::new(states);
            dfa.reachable_from(q)
                .iter()
                .enumerate()
                .filter(|(_, r)| **r)
                .for_each(|(s, _)| b.insert(s));
            b
        })
        .collect();
    if !served(&closures) {
        return Err(SpecError::NotTransitive { n });
    }
    let mut current = singletons;
    let mut seen: HashSet<Vec<Bits>> = HashSet::new();
    for k in 0.. {
        if served(&current) {
            return Ok(k);
        }
        if !seen.insert(current.clone()) {
            return Err(SpecError::NoCommonLength { n });
        }
        current = current
            .iter()
            .map(|r| {
                let mut next = successors(dfa, r);
                if mode == BridgeMode::AtMost {
                    next.union_with(r);
                }
                next
            })
            .collect();
    }
    unreachable!("the loop returns")
}

/// `m_n` on a language automaton.
pub fn m_n_dfa(dfa: &Dfa, n: usize, mode: BridgeMode) -> Result<usize, SpecError> {
    if dfa.is_empty() {
        return Err(SpecError::NotTransitive { n });
    }
    bridge_length(dfa, &Layer::at(dfa, n), n, mode)
}

/// `m_n` of a pair: least `k` such that every `(u, v) ∈ B_n × B_n` has a
/// bridge of length `k` (exactly, or at most, per `mode`).
pub fn m_n(p: &LexPair, n: usize, mode: BridgeMode) -> Result<usize, SpecError> {
    m_n_dfa(&language(p)?, n, mode)
}

/// Options for [`spec_number`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecOptions {
    /// Number of consecutive equal `m_n` taken as stabilisation.
    pub window: usize,
    /// Largest `n` tried.
    pub nmax: usize,
    /// Bridge length semantics.
    pub mode: BridgeMode,
}

impl Default for SpecOptions {
    fn default() -> Self {
        SpecOptions {
            window: 5,
            nmax: 200,
            mode: BridgeMode::Exact,
        }
    }
}

/// Specification verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SpecVerdict {
    /// The specification property holds.
    HasSpecification,
    /// The specification property fails.
    NoSpecification,
    /// Undecided from the available evidence.
    Unknown,
}

/// Per-stage evidence of a family analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageEvidence {
    /// Stage index (1-based).
    pub stage: usize,
    /// `ℓ(p1 p2)` of the stage's bridge words.
    pub p1p2_len: usize,
    /// Specification number of the stage, if it stabilised.
    pub spec_number: Option<usize>,
}

/// Specification analysis of a pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecReport {
    /// Observed `m_n` values.
    pub m_values: BTreeMap<usize, usize>,
    /// Stabilised value, if any.
    pub spec_number: Option<usize>,
    /// Verdict.
    pub verdict: SpecVerdict,
    /// Stage evidence (family analyses only).
    pub evidence: Vec<StageEvidence>,
}

/// Computes `m_n` for `n = 1, 2, …` until the limit is certain.
///
/// `m_n` depends only on the layer of end states and start sets at length
/// `n`, and layers evolve deterministically, so once a layer repeats the
/// values on the cycle repeat forever: the limit exists iff they agree, and
/// it is then their common value. Additionally the last `window` values must
/// agree. Fails with `NonStabilized` if no layer repeats for `n ≤ nmax` or the
/// values on the cycle differ.
pub fn spec_report(p: &LexPair, opts: &SpecOptions) -> Result<SpecReport, SpecError> {
    let dfa = language(p)?;
    if dfa.is_empty() {
        return Err(SpecError::NotTransitive { n: 0 });
    }
    let mut m_values = BTreeMap::new();
    let mut history: Vec<usize> = Vec::new();
    let mut first_seen: HashMap<Layer, usize> = HashMap::new();
    let window = opts.window.max(1);
    let mut layer = Layer::initial(&dfa);
    for n in 1..=opts.nmax {
        layer = layer.next(&dfa);
        let m = bridge_length(&dfa, &layer, n, opts.mode)?;
        m_values.insert(n, m);
        history.push(m);
        if let Some(&start) = first_seen.get(&layer) {
            // Layers n and `start` coincide: m is periodic from `start` on.
            let cycle = &history[start - 1..n - 1];
            let trailing = history.len() >= window
                && history[history.len() - window..].iter().all(|&x| x == m);
            if cycle.iter().all(|&x| x == m) && trailing {
                return Ok(SpecReport {
                    m_values,
                    spec_number: Some(m),
                    verdict: SpecVerdict::HasSpecification,
                    evidence: Vec::new(),
                });
            }
            if !cycle.iter().all(|&x| x == m) {
                return Err(SpecError::NonStabilized { nmax: n });
            }
        } else {
            first_seen.insert(layer.clone(), n);
        }
    }
    Err(SpecError::NonStabilized { nmax: opts.nmax })
}

/// The specification number: the stabilised value of `m_n`.
pub fn spec_number(p: &LexPair, opts: &SpecOptions) -> Result<usize, SpecError> {
    Ok(spec_report(p, opts)?
        .spec_number
        .expect("reports returned by spec_report are stabilised"))
}

fn inf(w: &Word) -> EpSeq {
    EpSeq::periodic(w.clone()).expect("nonempty word")
}

/// The pair with `0α = x^∞` and `1β = y^∞`.
pub fn pair_from_words(x: &Word, y: &Word) -> Result<LexPair, SpecError> {
    let bad = |condition: &str| SpecError::PreconditionViolation {
        stage: 0,
        condition: format!("({x}, {y}): {condition}"),
    };
    if x.is_empty() || y.is_empty() || x.symbols()[0] != 0 || y.symbols()[0] != 1 {
        return Err(bad("words must start with 0 and 1"));
    }
    LexPair::new(inf(x).shift(1), inf(y).shift(1)).map_err(|e| bad(&e.to_string()))
}

/// Checks the chain conditions for extending stage `stage` with `(ω, ν)` by
/// the prime `(ω′, ν′)`, given the previous prime.
fn check_prime(
    stage: usize,
    current: &(Word, Word),
    prime: &(Word, Word),
    previous: Option<&(Word, Word)>,
) -> Result<(), SpecError> {
    let fail = |condition: String| Err(SpecError::PreconditionViolation { stage, condition });
    let (w, v) = current;
    let (wp, vp) = prime;
    if inf(wp) >= inf(w) {
        return fail(format!("({wp})^inf must precede ({w})^inf"));
    }
    if inf(v) >= inf(vp) {
        return fail(format!("({v})^inf must precede ({vp})^inf"));
    }
    if let Some((wq, vq)) = previous {
        if inf(wp) >= inf(wq) {
            return fail(format!(
                "({wp})^inf must precede the previous prime ({wq})^inf"
            ));
        }
        if inf(vq) >= inf(vp) {
            return fail(format!(
                "the previous prime ({vq})^inf must precede ({vp})^inf"
            ));
        }
    }
    let prime_pair = pair_from_words(wp, vp)?;
    match detect_renorm(&prime_pair, default_cap(&prime_pair)) {
        RenormVerdict::Essential { assoc } if assoc == *prime => Ok(()),
        other => fail(format!("prime ({wp}, {vp}) is not essential: {other:?}")),
    }
}

fn essential_stage(stage: usize, w: &Word, v: &Word) -> Result<LexPair, SpecError> {
    let p = pair_from_words(w, v)?;
    match detect_renorm(&p, default_cap(&p)) {
        RenormVerdict::Essential { .. } => Ok(p),
        verdict => Err(SpecError::NotEssential {
            stage,
            pair: p,
            verdict: Box::new(verdict),
        }),
    }
}

/// One stage of a family together with its bridge words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stage {
    /// The pair.
    pub pair: LexPair,
    /// Associated words `(ω, ν)`.
    pub assoc: (Word, Word),
    /// Bridge words.
    pub bridge: BridgePair,
}

fn stage_of(stage: usize, w: &Word, v: &Word) -> Result<Stage, SpecError> {
    let pair = essential_stage(stage, w, v)?;
    let verdict = detect_renorm(&pair, default_cap(&pair));
    let bridge = bridge_words(&pair, &verdict).map_err(|_| SpecError::NotEssential {
        stage,
        pair: pair.clone(),
        verdict: Box::new(verdict.clone()),
    })?;
    Ok(Stage {
        pair,
        assoc: (w.clone(), v.clone()),
        bridge,
    })
}

/// Family with specification: from the seed `(ω₁, ν₁)` and primes
/// `(ω′ₙ, ν′ₙ)`, the stages `ω_{n+1} = ωₙν′ₙ`, `ν_{n+1} = νₙω′ₙ` for
/// `n = 1..=k`. Every stage is checked essential, and from the second new
/// stage on the bridge words `p1p2` must not change.
pub fn build_spec_family(
    seed: &(Word, Word),
    primes: &[(Word, Word)],
    k: usize,
) -> Result<Vec<LexPair>, SpecError> {
    Ok(spec_family_stages(seed, primes, k)?
        .into_iter()
        .map(|s| s.pair)
        .collect())
}

/// As [`build_spec_family`], returning the stages with their bridge words.
pub fn spec_family_stages(
    seed: &(Word, Word),
    primes: &[(Word, Word)],
    k: usize,
) -> Result<Vec<Stage>, SpecError> {
    grow(
        seed,
        primes,
        k,
        1,
        |w, v, (wp, vp)| (w.concat(vp), v.concat(wp)),
        |stages| {
            let last = stages.last().expect("nonempty");
            match stages.len().checked_sub(2).map(|i| &stages[i]) {
                Some(prev) if prev.bridge.joined() != last.bridge.joined() => {
                    Err(last.bridge.joined())
                }
                _ => Ok(()),
            }
        },
    )
}

/// Family without specification: stages
/// `ω_{n+1} = ωₙ νₙ^{jₙ} ν′ₙ`, `ν_{n+1} = νₙ ωₙ^{kₙ} ω′ₙ` with all exponents
/// at least 2. Every stage is checked essential, and `ℓ(p1p2)` must grow
/// strictly from stage to stage.
pub fn build_nospec_family(
    seed: &(Word, Word),
    primes: &[(Word, Word)],
    exponents: &[(usize, usize)],
    k: usize,
) -> Result<Vec<LexPair>, SpecError> {
    Ok(nospec_family_stages(seed, primes, exponents, k)?
        .into_iter()
        .map(|s| s.pair)
        .collect())
}

/// As [`build_nospec_family`], returning the stages with their bridge words.
pub fn nospec_family_stages(
    seed: &(Word, Word),
    primes: &[(Word, Word)],
    exponents: &[(usize, usize)],
    k: usize,
) -> Result<Vec<Stage>, SpecError> {
    if exponents.len() < k {
        return Err(SpecError::PreconditionViolation {
            stage: exponents.len() + 1,
            condition: "missing exponents".into(),
        });
    }
    if let Some(i) = exponents[..k].iter().position(|&(j, m)| j < 2 || m < 2) {
        return Err(SpecError::PreconditionViolation {
            stage: i + 1,
            condition: format!("exponents {:?} must be at least 2", exponents[i]),
        });
    }
    let mut step = 0usize;
    grow(
        seed,
        primes,
        k,
        0,
        |w, v, (wp, vp)| {
            let (j, m) = exponents[step];
            step += 1;
            (
                w.concat(&v.pow(j)).concat(vp),
                v.concat(&w.pow(m)).concat(wp),
            )
        },
        |stages| {
            let last = stages.last().expect("nonempty");
            match stages.len().checked_sub(2).map(|i| &stages[i]) {
                Some(prev) if prev.bridge.joined().len() >= last.bridge.joined().len() => {
                    Err(last.bridge.joined())
                }
                _ => Ok(()),
            }
        },
    )
}

/// Shared stage loop: validates each prime, builds the next associated words
/// and checks the family hypothesis on the stages built so far, starting at
/// index `from` (0 is the seed).
fn grow(
    seed: &(Word, Word),
    primes: &[(Word, Word)],
    k: usize,
    from: usize,
    mut next: impl FnMut(&Word, &Word, &(Word, Word)) -> (Word, Word),
    hypothesis: impl Fn(&[Stage]) -> Result<(), Word>,
) -> Result<Vec<Stage>, SpecError> {
    if primes.len() < k {
        return Err(SpecError::PreconditionViolation {
            stage: primes.len() + 1,
            condition: "missing prime".into(),
        });
    }
    let mut stages = vec![stage_of(1, &seed.0, &seed.1)?];
    let mut current = seed.clone();
    for (i, prime) in primes[..k].iter().enumerate() {
        let stage = i + 1;
        check_prime(stage, &current, prime, i.checked_sub(1).map(|j| &primes[j]))?;
        let (w, v) = next(&current.0, &current.1, prime);
        stages.push(stage_of(stage + 1, &w, &v)?);
        if stages.len() >= from + 2 {
            hypothesis(&stages[from..]).map_err(|found| SpecError::BridgeHypothesis {
                stage: stage + 1,
                found,
            })?;
        }
        current = (w, v);
    }
    Ok(stages.split_off(1))
}

/// Associated words of all essential pairs with periods up to `qmax`,
/// shortest first.
pub fn essential_assocs(qmax: usize) -> Vec<(Word, Word)> {
    let mut out: Vec<(Word, Word)> = crate::lexworld::periodic_pairs(qmax)
        .into_iter()
        .filter_map(|p| match detect_renorm(&p, default_cap(&p)) {
            RenormVerdict::Essential { assoc } => Some(assoc),
            _ => None,
        })
        .collect();
    out.sort_by(|x, y| {
        (x.0.len() + x.1.len(), &x.0, &x.1).cmp(&(y.0.len() + y.1.len(), &y.0, &y.1))
    });
    out
}

/// Essential pairs with periods up to `qmax` whose associated words can serve
/// as the next prime after `current` (and `previous`, if any).
pub fn prime_candidates(
    current: &(Word, Word),
    previous: Option<&(Word, Word)>,
    qmax: usize,
) -> Vec<(Word, Word)> {
    essential_assocs(qmax)
        .into_iter()
        .filter(|prime| check_prime(1, current, prime, previous).is_ok())
        .collect()
}

/// Which family construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyMode {
    /// `ω_{n+1} = ωₙν′ₙ`, `ν_{n+1} = νₙω′ₙ`.
    Spec,
    /// `ω_{n+1} = ωₙνₙ^jν′ₙ`, `ν_{n+1} = νₙωₙ^kω′ₙ` with the same `(j, k)` at
    /// every stage.
    NoSpec {
        /// Exponents `(j, k)`, both at least 2.
        exponents: (usize, usize),
    },
}

/// Builds `stages` new stages of a family, returning them with their bridge words.
pub fn family_stages(
    seed: &(Word, Word),
    primes: &[(Word, Word)],
    mode: FamilyMode,
    stages: usize,
) -> Result<Vec<Stage>, SpecError> {
    match mode {
        FamilyMode::Spec => spec_family_stages(seed, primes, stages),
        FamilyMode::NoSpec { exponents } => {
            nospec_family_stages(seed, primes, &vec![exponents; stages], stages)
        }
    }
}

/// Depth-first search for a chain of `len` primes, drawn from essential pairs
/// with periods up to `qmax` (shortest first), for which every stage of the
/// family builds and satisfies the family hypothesis.
pub fn find_prime_chain(
    seed: &(Word, Word),
    mode: FamilyMode,
    len: usize,
    qmax: usize,
) -> Option<Vec<(Word, Word)>> {
    let pool = essential_assocs(qmax);
    let mut chain: Vec<(Word, Word)> = Vec::new();
    extend_chain(seed, mode, len, &pool, &mut chain).then_some(chain)
}

fn extend_chain(
    seed: &(Word, Word),
    mode: FamilyMode,
    len: usize,
    pool: &[(Word, Word)],
    chain: &mut Vec<(Word, Word)>,
) -> bool {
    if chain.len() == len {
        return true;
    }
    for prime in pool {
        chain.push(prime.clone());
        if family_stages(seed, chain, mode, chain.len()).is_ok()
            && extend_chain(seed, mode, len, pool, chain)
        {
            return true;
        }
        chain.pop();
    }
    false
}

/// Renders a family verdict: `HasSpecification` when the bridge words `p1p2`
/// agree on the last two stages (or the family is a single transitive SFT
/// stage with a stabilised specification number), `NoSpecification` when
/// `ℓ(p1p2)` strictly increases and `ℓ(p1p2)` of each stage is at most the
/// specification number of the next, `Unknown` otherwise.
pub fn spec_verdict(family: &[LexPair], reports: &[SpecReport]) -> SpecVerdict {
    let bridges: Option<Vec<Word>> = family
        .iter()
        .map(|p| {
            bridge_words(p, &detect_renorm(p, default_cap(p)))
                .ok()
                .map(|b| b.joined())
        })
        .collect();
    match (family.len(), reports.len()) {
        (0, _) => return SpecVerdict::Unknown,
        (1, 1) => {
            return if reports[0].spec_number.is_some() {
                SpecVerdict::HasSpecification
            } else {
                SpecVerdict::Unknown
            }
        }
        _ => {}
    }
    let Some(bridges) = bridges else {
        return SpecVerdict::Unknown;
    };
    let n = bridges.len();
    if n >= 2 && bridges[n - 1] == bridges[n - 2] {
        return SpecVerdict::HasSpecification;
    }
    let growing = bridges.windows(2).all(|w| w[0].len() < w[1].len());
    let bounded = reports.len() == family.len()
        && bridges
            .iter()
            .zip(reports.iter().skip(1))
            .all(|(b, r)| r.spec_number.is_some_and(|s| b.len() <= s));
    if growing && bounded {
        SpecVerdict::NoSpecification
    } else {
        SpecVerdict::Unknown
    }
}

/// Specification reports for each stage, computed in parallel and returned
/// in stage order, with family evidence attached to every report.
pub fn family_reports(
    family: &[LexPair],
    opts: &SpecOptions,
) -> Vec<Result<SpecReport, SpecError>> {
    let mut reports: Vec<Result<SpecReport, SpecError>> =
        family.par_iter().map(|p| spec_report(p, opts)).collect();
    let evidence: Vec<StageEvidence> = family
        .iter()
        .zip(&reports)
        .enumerate()
        .map(|(i, (p, r))| StageEvidence {
            stage: i + 1,
            p1p2_len: bridge_words(p, &detect_renorm(p, default_cap(p)))
                .map(|b| b.joined().len())
                .unwrap_or(0),
            spec_number: r.as_ref().ok().and_then(|r| r.spec_number),
        })
        .collect();
    for r in reports.iter_mut().flatten() {
        r.evidence = evidence.clone();
    }
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> EpSeq {
        s.parse().unwrap()
    }

    fn pair(a: &str, b: &str) -> LexPair {
        LexPair::new(seq(a), seq(b)).unwrap()
    }

    fn word(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn ww(a: &str, b: &str) -> (Word, Word) {
        (word(a), word(b))
    }

    /// Oracle: exhaustive bridge search over explicit words against the
    /// comparison automaton.
    fn m_n_oracle(p: &LexPair, n: usize, kmax: usize) -> Option<usize> {
        let dfa = crate::subshift::comparison_automaton(p).unwrap();
        let words = dfa.words(n);
        (0..=kmax).find(|&k| {
            let bridges = dfa.words(k);
            words.iter().all(|u| {
                words
                    .iter()
                    .all(|v| bridges.iter().any(|w| dfa.accepts(&u.concat(w).concat(v))))
            })
        })
    }

    #[test]
    fn m_n_examples() {
        let full = pair("|1", "|0");
        for n in 1..5 {
            assert_eq!(m_n(&full, n, BridgeMode::Exact).unwrap(), 0);
        }
        let golden = pair("|110", "|001");
        assert_eq!(m_n(&golden, 3, BridgeMode::Exact).unwrap(), 2);
        assert_eq!(m_n_oracle(&golden, 3, 6), Some(2));
        let cyc = pair("|10", "|01");
        assert_eq!(
            m_n(&cyc, 2, BridgeMode::Exact),
            Err(SpecError::NoCommonLength { n: 2 })
        );
        assert_eq!(m_n_oracle(&cyc, 2, 8), None);
        assert_eq!(m_n(&cyc, 2, BridgeMode::AtMost).unwrap(), 1);
        let renorm = pair("|1101000", "|0001101");
        assert_eq!(
            m_n(&renorm, 7, BridgeMode::Exact),
            Err(SpecError::NotTransitive { n: 7 })
        );
    }

    #[test]
    fn m_n_matches_oracle() {
        for p in crate::lexworld::periodic_pairs(4) {
            for n in 1..=4 {
                let fast = m_n(&p, n, BridgeMode::Exact).ok();
                assert_eq!(fast, m_n_oracle(&p, n, 10), "{p} n={n}");
            }
        }
    }

    #[test]
    fn spec_number_examples() {
        let opts = SpecOptions::default();
        let golden = pair("|110", "|001");
        let report = spec_report(&golden, &opts).unwrap();
        assert_eq!(report.spec_number, Some(2));
        assert_eq!(report.m_values[&1], 0);
        for n in 3..=10 {
            assert_eq!(m_n(&golden, n, BridgeMode::Exact).unwrap(), 2);
        }
        assert_eq!(spec_number(&pair("|1", "|0"), &opts).unwrap(), 0);
    }

    #[test]
    fn spec_family_examples() {
        let seed = ww("011", "100");
        let fam = build_spec_family(&seed, &[ww("01", "10")], 1).unwrap();
        assert_eq!(fam, vec![pair("|11100", "|00011")]);
        let stages = spec_family_stages(&seed, &[ww("01", "10")], 1).unwrap();
        assert_eq!(stages[0].bridge.p1, word("011"));
        assert_eq!(stages[0].bridge.p2, word("100"));
        assert!(matches!(
            build_spec_family(&seed, &[ww("0111", "10")], 1),
            Err(SpecError::PreconditionViolation { .. })
        ));
    }

    #[test]
    fn nospec_family_examples() {
        let seed = ww("011", "100");
        let fam = build_nospec_family(&seed, &[ww("01", "10")], &[(2, 2)], 1).unwrap();
        assert_eq!(
            fam,
            vec![LexPair::new(seq("|01110010010").shift(1), seq("|10001101101").shift(1)).unwrap()]
        );
        let stages = nospec_family_stages(&seed, &[ww("01", "10")], &[(2, 2)], 1).unwrap();
        assert!(stages[0].bridge.joined().len() > 4);
        assert!(matches!(
            build_nospec_family(&seed, &[ww("01", "10")], &[(1, 2)], 1),
            Err(SpecError::PreconditionViolation { .. })
        ));
    }

    fn chain() -> Vec<(Word, Word)> {
        vec![ww("01", "10010"), ww("0101010", "1001010")]
    }

    #[test]
    fn prime_chain_search() {
        let seed = ww("011", "100");
        assert_eq!(
            find_prime_chain(&seed, FamilyMode::Spec, 2, 7),
            Some(chain())
        );
        assert_eq!(
            find_prime_chain(&seed, FamilyMode::NoSpec { exponents: (2, 2) }, 2, 7),
            Some(chain())
        );
        // (01, 10) cannot be followed by any prime.
        assert!(prime_candidates(&ww("01110010", "10001"), Some(&ww("01", "10")), 7).is_empty());
    }

    fn with_seed(stages: &[Stage]) -> Vec<LexPair> {
        let mut fam = vec![pair("|110", "|001")];
        fam.extend(stages.iter().map(|s| s.pair.clone()));
        fam
    }

    #[test]
    fn spec_family_three_stages() {
        let stages = family_stages(&ww("011", "100"), &chain(), FamilyMode::Spec, 2).unwrap();
        assert_eq!(stages[0].pair, pair("|11100100", "|00011"));
        assert_eq!(stages[1].pair, pair("|111001010010100", "|000101010101"));
        for s in &stages {
            assert_eq!(
                s.bridge,
                BridgePair {
                    p1: word("011"),
                    p2: word("100")
                }
            );
        }
        let fam = with_seed(&stages);
        let reports: Vec<SpecReport> = family_reports(&fam, &SpecOptions::default())
            .into_iter()
            .map(Result::unwrap)
            .collect();
        let numbers: Vec<_> = reports.iter().map(|r| r.spec_number.unwrap()).collect();
        assert_eq!(numbers, vec![2, 5, 5]);
        assert_eq!(spec_verdict(&fam, &reports), SpecVerdict::HasSpecification);
        // The bound s ≤ ℓ(p1p2) holds along the family.
        for (r, e) in reports.iter().zip(&reports[0].evidence) {
            assert!(r.spec_number.unwrap() <= e.p1p2_len);
        }
    }

    #[test]
    fn nospec_family_three_stages() {
        let mode = FamilyMode::NoSpec { exponents: (2, 2) };
        let stages = family_stages(&ww("011", "100"), &chain(), mode, 2).unwrap();
        assert_eq!(stages[0].assoc, ww("01110010010010", "10001101101"));
        let fam = with_seed(&stages);
        let reports: Vec<SpecReport> = family_reports(&fam, &SpecOptions::default())
            .into_iter()
            .map(Result::unwrap)
            .collect();
        let numbers: Vec<_> = reports.iter().map(|r| r.spec_number.unwrap()).collect();
        assert_eq!(numbers, vec![2, 11, 32]);
        let lens: Vec<_> = reports[0].evidence.iter().map(|e| e.p1p2_len).collect();
        assert_eq!(lens, vec![4, 6, 25]);
        assert!(numbers.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(spec_verdict(&fam, &reports), SpecVerdict::NoSpecification);
    }

    #[test]
    fn single_sft_stage_has_specification() {
        let fam = vec![pair("|110", "|001")];
        let reports = vec![spec_report(&fam[0], &SpecOptions::default()).unwrap()];
        assert_eq!(spec_verdict(&fam, &reports), SpecVerdict::HasSpecification);
    }

    #[test]
    fn spec_number_against_bridge_length() {
        // With bridges of length at most k, s ≤ ℓ(p1p2) for every essential
        // pair with periods ≤ 6 except these two.
        let exceptions = [pair("|11000", "|000101"), pair("|111010", "|00111")];
        let opts = SpecOptions {
            mode: BridgeMode::AtMost,
            ..SpecOptions::default()
        };
        let mut essential = 0;
        for p in crate::lexworld::periodic_pairs(6) {
            let verdict = detect_renorm(&p, default_cap(&p));
            let Ok(bridge) = bridge_words(&p, &verdict) else {
                continue;
            };
            essential += 1;
            let s = spec_number(&p, &opts).unwrap();
            assert_eq!(
                s > bridge.joined().len(),
                exceptions.contains(&p),
                "{p}: s = {s}"
            );
        }
        assert_eq!(essential, 189);
        // Exact-length bridges need not exist for non-mixing essential pairs.
        assert_eq!(
            spec_number(&pair("|100", "|001"), &SpecOptions::default()),
            Err(SpecError::NoCommonLength { n: 1 })
        );
    }

    #[test]
    fn bridges_shrink_under_inclusion() {
        use crate::renorm::shortest_bridge;
        let pairs = crate::lexworld::periodic_pairs(4);
        for outer in &pairs {
            for inner in &pairs {
                if outer == inner || !crate::lexworld::window_contains(outer, inner) {
                    continue;
                }
                let (d_out, d_in) = (language(outer).unwrap(), language(inner).unwrap());
                for u in d_in.words(3) {
                    for v in d_in.words(3) {
                        if let Some(b) = shortest_bridge(&d_in, &u, &v) {
                            let o = shortest_bridge(&d_out, &u, &v).expect("inclusion");
                            assert!(o.len() <= b.len(), "{outer} ⊇ {inner}: {u} {v}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn approximations_stabilise_languages() {
        for p in [
            pair("10|100", "00|010"),
            pair("1|10", "0|01"),
            pair("110|10", "|001"),
        ] {
            let approx = crate::lexworld::periodic_approximations(&p, 12);
            for m in 1..=10 {
                let from = approx
                    .iter()
                    .position(|a| crate::subshift::same_language_upto(a, &p, m).unwrap());
                let from = from.unwrap_or_else(|| panic!("{p}: B_{m} never matches"));
                for a in &approx[from..] {
                    assert!(
                        crate::subshift::same_language_upto(a, &p, m).unwrap(),
                        "{p} m={m}"
                    );
                }
            }
        }
    }
}
