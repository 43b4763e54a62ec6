//! Finite presentations of lexicographic subshifts: automata, word counts,
//! entropy, forbidden factors and language comparison.
//!
//! Two deterministic automata recognise the language `L(Σ_{(α,β)})`:
//!
//! * the *window automaton* of a purely periodic pair in the lexicographic
//!   world, whose state `(i, j)` is the length (mod the period) of the longest
//!   suffix of the input that is a prefix of `α`, resp. `β`. The Parry
//!   property makes the longest match the only comparison that matters: a
//!   shorter active match `α[0..k]` satisfies `α[k] ≥ α[i]`, so it never
//!   dies before the longest one;
//! * the *comparison automaton* of an arbitrary eventually periodic pair,
//!   whose state is the set of all active comparisons (positions of `α` and
//!   `β` still tied with a suffix of the input), taken modulo the
//!   eventual period. It needs no Parry or cross condition and is used for
//!   non-periodic pairs, extremal pairs and as an independent oracle.
//!
//! Both are pruned to the states lying on infinite paths, so a finite word is
//! accepted exactly when it is a factor of some point of the subshift.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use num::{BigUint, One, Zero};
use num_traits::Float;
use petgraph::graph::DiGraph;
use serde::Serialize;
use thiserror::Error;

use crate::lexworld::{classify, periodic_approximations, LexPair, PairClass};
use crate::words::{EpSeq, Word};

/// Errors raised by automaton construction and queries.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubshiftError {
    /// The window automaton needs purely periodic components.
    #[error("pair {0} is not purely periodic")]
    NotPeriodic(LexPair),
    /// The window automaton needs a pair in the lexicographic world.
    #[error("pair {pair} is not in the lexicographic world ({class:?})")]
    NotInLW {
        /// The pair.
        pair: LexPair,
        /// Its class.
        class: PairClass,
    },
    /// The comparison automaton exceeded the state budget.
    #[error("automaton exceeded {0} states")]
    TooManyStates(usize),
    /// The subshift is empty.
    #[error("the subshift of {0} is empty")]
    EmptyLanguage(LexPair),
}

/// Upper bound on comparison-automaton states.
pub const MAX_STATES: usize = 1 << 20;

/// A deterministic automaton over `{0, 1}` in which every state lies on an
/// infinite path; a word is in the language iff it can be read from `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    next: Vec<[Option<usize>; 2]>,
    start: Option<usize>,
}

impl Dfa {
    /// Prunes a raw automaton to the states reachable from `start` that lie on
    /// infinite paths, renumbering them in breadth-first order from `start`.
    /// The returned map sends new state indices to raw ones.
    pub fn pruned(raw: &[[Option<usize>; 2]], start: usize) -> (Dfa, Vec<usize>) {
        let n = raw.len();
        // Reachable set.
        let mut reach = vec![false; n];
        let mut queue = VecDeque::from([start]);
        reach[start] = true;
        while let Some(q) = queue.pop_front() {
            for r in raw[q].iter().flatten() {
                if !reach[*r] {
                    reach[*r] = true;
                    queue.push_back(*r);
                }
            }
        }
        // Remove states without successors until stable.
        let mut alive = reach.clone();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut outdeg = vec![0usize; n];
        for q in (0..n).filter(|&q| reach[q]) {
            for r in raw[q].iter().flatten() {
                preds[*r].push(q);
                outdeg[q] += 1;
            }
        }
        let mut dead: Vec<usize> = (0..n).filter(|&q| reach[q] && outdeg[q] == 0).collect();
        for &q in &dead {
            alive[q] = false;
        }
        while let Some(q) = dead.pop() {
            for &p in &preds[q] {
                if alive[p] {
                    outdeg[p] -= 1;
                    if outdeg[p] == 0 {
                        alive[p] = false;
                        dead.push(p);
                    }
                }
            }
        }
        if !alive[start] {
            return (
                Dfa {
                    next: Vec::new(),
                    start: None,
                },
                Vec::new(),
            );
        }
        // Renumber in BFS order over alive states.
        let mut index = vec![usize::MAX; n];
        let mut order = vec![start];
        index[start] = 0;
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            head += 1;
            for r in raw[q].iter().flatten() {
                if alive[*r] && index[*r] == usize::MAX {
                    index[*r] = order.len();
                    order.push(*r);
                }
            }
        }
        let next = order
            .iter()
            .map(|&q| {
                let step = |c: usize| raw[q][c].filter(|&r| alive[r]).map(|r| index[r]);
                [step(0), step(1)]
            })
            .collect();
        (
            Dfa {
                next,
                start: Some(0),
            },
            order,
        )
    }

    /// Number of states.
    pub fn num_states(&self) -> usize {
        self.next.len()
    }

    /// Whether the language is empty.
    pub fn is_empty(&self) -> bool {
        self.start.is_none()
    }

    /// The start state, if the language is nonempty.
    pub fn start(&self) -> Option<usize> {
        self.start
    }

    /// The successor of `q` on symbol `c`.
    pub fn step(&self, q: usize, c: u8) -> Option<usize> {
        self.next[q][c as usize]
    }

    /// The state reached from `q` by reading `w`.
    pub fn run_from(&self, q: usize, w: &[u8]) -> Option<usize> {
        w.iter().try_fold(q, |q, &c| self.step(q, c))
    }

    /// The state reached from the start by reading `w`.
    pub fn run(&self, w: &[u8]) -> Option<usize> {
        self.start.and_then(|s| self.run_from(s, w))
    }

    /// Whether `w` is in the language.
    pub fn accepts(&self, w: &Word) -> bool {
        self.run(w.symbols()).is_some()
    }

    /// Number of words of length `n` readable from `q`.
    pub fn count_from(&self, q: usize, n: usize) -> BigUint {
        let mut ways = vec![BigUint::zero(); self.num_states()];
        ways[q] = BigUint::one();
        for _ in 0..n {
            let mut next = vec![BigUint::zero(); self.num_states()];
            for (s, w) in ways.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                for r in self.next[s].iter().flatten() {
                    next[*r] += w;
                }
            }
            ways = next;
        }
        ways.into_iter().sum()
    }

    /// `|B_n|`, the number of words of length `n` in the language.
    pub fn count_words(&self, n: usize) -> BigUint {
        match self.start {
            Some(s) => self.count_from(s, n),
            None => BigUint::zero(),
        }
    }

    /// All words of length `n` readable from `q`, in lexicographic order.
    pub fn words_from(&self, q: usize, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut buf = Vec::with_capacity(n);
        self.collect(q, n, &mut buf, &mut out);
        out
    }

    fn collect(&self, q: usize, n: usize, buf: &mut Vec<u8>, out: &mut Vec<Word>) {
        if buf.len() == n {
            out.push(Word::new(buf.clone()).expect("binary symbols"));
            return;
        }
        for c in 0..2u8 {
            if let Some(r) = self.step(q, c) {
                buf.push(c);
                self.collect(r, n, buf, out);
                buf.pop();
            }
        }
    }

    /// `B_n` in lexicographic order.
    pub fn words(&self, n: usize) -> Vec<Word> {
        match self.start {
            Some(s) => self.words_from(s, n),
            None => Vec::new(),
        }
    }

    /// Strongly connected components (each a list of states).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut g: DiGraph<(), ()> = DiGraph::new();
        let nodes: Vec<_> = (0..self.num_states()).map(|_| g.add_node(())).collect();
        for (q, succ) in self.next.iter().enumerate() {
            for r in succ.iter().flatten() {
                g.add_edge(nodes[q], nodes[*r], ());
            }
        }
        petgraph::algo::tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
                c.sort_unstable();
                c
            })
            .collect()
    }

    /// Whether the whole state graph is one strongly connected component.
    pub fn is_strongly_connected(&self) -> bool {
        !self.is_empty() && self.components().len() == 1
    }

    /// States reachable from `q` (including `q`).
    pub fn reachable_from(&self, q: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![q];
        seen[q] = true;
        while let Some(s) = stack.pop() {
            for r in self.next[s].iter().flatten() {
                if !seen[*r] {
                    seen[*r] = true;
                    stack.push(*r);
                }
            }
        }
        seen
    }

    /// A rigorous bracket for the spectral radius of the adjacency matrix.
    ///
    /// Each nontrivial strongly connected component is handled separately by
    /// power iteration on `A + I` (primitive, so the iteration converges)
    /// from the all-ones vector. For a positive vector `v` the
    /// Collatz–Wielandt quotients satisfy
    /// `min (Bv)ᵢ/vᵢ ≤ ρ(B) ≤ max (Bv)ᵢ/vᵢ`; iteration stops when the
    /// bracket is within relative tolerance `tol` or after `cap` steps.
    pub fn spectral_radius<T: Float>(&self, tol: T, cap: usize) -> SpectralBracket<T> {
        let mut best = SpectralBracket {
            lower: T::zero(),
            upper: T::zero(),
            iterations: 0,
            converged: true,
        };
        for comp in self.components() {
            let local: HashMap<usize, usize> =
                comp.iter().enumerate().map(|(i, &q)| (q, i)).collect();
            let adj: Vec<Vec<usize>> = comp
                .iter()
                .map(|q| {
                    self.next[*q]
                        .iter()
                        .flatten()
                        .filter_map(|r| local.get(r).copied())
                        .collect()
                })
                .collect();
            if adj.iter().all(|a| a.is_empty()) {
                continue; // a single state without a loop: ρ = 0
            }
            let b = component_bracket(&adj, tol, cap);
            if b.upper > best.upper {
                best.upper = b.upper;
            }
            if b.lower > best.lower {
                best.lower = b.lower;
            }
            best.iterations = best.iterations.max(b.iterations);
            best.converged &= b.converged;
        }
        best
    }
}

/// A bracket `lower ≤ ρ ≤ upper` for a spectral radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralBracket<T> {
    /// Lower bound.
    pub lower: T,
    /// Upper bound.
    pub upper: T,
    /// Iterations used by the slowest component.
    pub iterations: usize,
    /// Whether every component met the tolerance within the cap.
    pub converged: bool,
}

fn component_bracket<T: Float>(adj: &[Vec<usize>], tol: T, cap: usize) -> SpectralBracket<T> {
    let n = adj.len();
    let mut v = vec![T::one(); n];
    let mut lower = T::zero();
    let mut upper = T::infinity();
    for it in 1..=cap.max(1) {
        let w: Vec<T> = (0..n)
            .map(|i| adj[i].iter().fold(v[i], |acc, &j| acc + v[j]))
            .collect();
        let (lo, hi) = w
            .iter()
            .zip(&v)
            .map(|(&wi, &vi)| wi / vi)
            .fold((T::infinity(), T::zero()), |(lo, hi), r| {
                (lo.min(r), hi.max(r))
            });
        lower = lower.max(lo);
        upper = upper.min(hi);
        if upper - lower <= tol * upper {
            return SpectralBracket {
                lower: lower - T::one(),
                upper: upper - T::one(),
                iterations: it,
                converged: true,
            };
        }
        let m = w.iter().fold(T::zero(), |m, &x| m.max(x));
        v = w.into_iter().map(|x| x / m).collect();
    }
    SpectralBracket {
        lower: lower - T::one(),
        upper: upper - T::one(),
        iterations: cap,
        converged: false,
    }
}

/// The window automaton of a purely periodic pair in the lexicographic world.
#[derive(Debug, Clone)]
pub struct WindowAutomaton {
    q_alpha: usize,
    q_beta: usize,
    labels: Vec<(usize, usize)>,
    dfa: Dfa,
}

impl WindowAutomaton {
    /// Period of `α`.
    pub fn q_alpha(&self) -> usize {
        self.q_alpha
    }

    /// Period of `β`.
    pub fn q_beta(&self) -> usize {
        self.q_beta
    }

    /// The `(i, j)` label of each alive state.
    pub fn labels(&self) -> &[(usize, usize)] {
        &self.labels
    }

    /// The pruned automaton.
    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    /// Number of alive states.
    pub fn num_states(&self) -> usize {
        self.dfa.num_states()
    }
}

/// Builds the window automaton of a purely periodic pair in `LW`.
pub fn build_automaton(p: &LexPair) -> Result<WindowAutomaton, SubshiftError> {
    if !p.is_periodic() {
        return Err(SubshiftError::NotPeriodic(p.clone()));
    }
    let class = classify(p);
    if class != PairClass::InLW {
        return Err(SubshiftError::NotInLW {
            pair: p.clone(),
            class,
        });
    }
    let a = p.alpha().period().symbols();
    let b = p.beta().period().symbols();
    let (qa, qb) = (a.len(), b.len());
    let id = |i: usize, j: usize| i * qb + j;
    let raw: Vec<[Option<usize>; 2]> = (0..qa * qb)
        .map(|s| {
            let (i, j) = (s / qb, s % qb);
            let step = |c: u8| -> Option<usize> {
                let ni = match c.cmp(&a[i]) {
                    std::cmp::Ordering::Greater => return None,
                    std::cmp::Ordering::Equal => (i + 1) % qa,
                    std::cmp::Ordering::Less => 0,
                };
                let nj = match c.cmp(&b[j]) {
                    std::cmp::Ordering::Less => return None,
                    std::cmp::Ordering::Equal => (j + 1) % qb,
                    std::cmp::Ordering::Greater => 0,
                };
                Some(id(ni, nj))
            };
            [step(0), step(1)]
        })
        .collect();
    let (dfa, order) = Dfa::pruned(&raw, id(0, 0));
    let labels = order.iter().map(|&s| (s / qb, s % qb)).collect();
    Ok(WindowAutomaton {
        q_alpha: qa,
        q_beta: qb,
        labels,
        dfa,
    })
}

/// Builds the comparison automaton of an arbitrary pair.
///
/// A state records the positions (taken modulo the eventual period) of `α`
/// and of `β` that are still tied with some suffix of the input. Reading `c`,
/// a tied position `k` of `α` dies if `c > α[k]`, stays tied (advancing) if
/// `c = α[k]` and is resolved if `c < α[k]`; a new comparison starts at
/// position 0 on every symbol. Symmetrically for `β` with the inequalities
/// reversed.
pub fn comparison_automaton(p: &LexPair) -> Result<Dfa, SubshiftError> {
    type State = (Vec<usize>, Vec<usize>);
    let (alpha, beta) = (p.alpha(), p.beta());
    let advance = |x: &EpSeq, tied: &[usize], c: u8, upper: bool| -> Option<Vec<usize>> {
        let mut out: Vec<usize> = Vec::with_capacity(tied.len() + 1);
        for &k in tied.iter().chain(std::iter::once(&0)) {
            let s = x.at(k);
            let dies = if upper { c > s } else { c < s };
            if dies {
                return None;
            }
            if c == s {
                out.push(x.position_class(k + 1));
            }
        }
        out.sort_unstable();
        out.dedup();
        Some(out)
    };
    let mut ids: HashMap<State, usize> = HashMap::new();
    let mut states: Vec<State> = Vec::new();
    let mut raw: Vec<[Option<usize>; 2]> = Vec::new();
    let start: State = (Vec::new(), Vec::new());
    ids.insert(start.clone(), 0);
    states.push(start);
    let mut head = 0;
    while head < states.len() {
        let (ta, tb) = states[head].clone();
        let mut row = [None, None];
        for c in 0..2u8 {
            let next = advance(alpha, &ta, c, true).zip(advance(beta, &tb, c, false));
            if let Some(s) = next {
                let id = match ids.get(&s) {
                    Some(&id) => id,
                    None => {
                        let id = states.len();
                        if id >= MAX_STATES {
                            return Err(SubshiftError::TooManyStates(MAX_STATES));
                        }
                        ids.insert(s.clone(), id);
                        states.push(s);
                        id
                    }
                };
                row[c as usize] = Some(id);
            }
        }
        raw.push(row);
        head += 1;
    }
    Ok(Dfa::pruned(&raw, 0).0)
}

/// The language automaton of a pair: the window automaton for periodic
/// pairs in `LW`, the comparison automaton otherwise.
pub fn language(p: &LexPair) -> Result<Dfa, SubshiftError> {
    if p.is_periodic() && classify(p) == PairClass::InLW {
        Ok(build_automaton(p)?.dfa)
    } else {
        comparison_automaton(p)
    }
}

/// The minimal forbidden factors read off a periodic pair in `LW`.
///
/// These are `α₁…α_{k−1}1` for `α_k = 0` and `β₁…β_{k−1}0` for `β_k = 1`,
/// `k ≤` period, keeping only words that contain no shorter member.
pub fn forbidden_factors(p: &LexPair) -> Result<Vec<Word>, SubshiftError> {
    if !p.is_periodic() {
        return Err(SubshiftError::NotPeriodic(p.clone()));
    }
    let class = classify(p);
    if class != PairClass::InLW {
        return Err(SubshiftError::NotInLW {
            pair: p.clone(),
            class,
        });
    }
    let mut cands: Vec<Word> = Vec::new();
    for (x, from, to) in [(p.alpha(), 0u8, 1u8), (p.beta(), 1u8, 0u8)] {
        let per = x.period().symbols();
        for k in 0..per.len() {
            if per[k] == from {
                let mut w = Word::new(per[..k].to_vec()).expect("binary");
                w.push(to);
                cands.push(w);
            }
        }
    }
    cands.sort_by(|u, v| u.len().cmp(&v.len()).then(u.cmp(v)));
    cands.dedup();
    let mut out: Vec<Word> = Vec::new();
    for w in cands {
        if !out.iter().any(|f| w.contains(f)) {
            out.push(w);
        }
    }
    Ok(out)
}

/// Whether every suffix of `w` lies between the prefixes of `β` and `α` of the
/// same length (a necessary condition for `w` to be admissible).
pub fn is_locally_admissible(p: &LexPair, w: &Word) -> bool {
    let s = w.symbols();
    (0..s.len()).all(|i| {
        let u = Word::new(s[i..].to_vec()).expect("binary");
        p.alpha().compare_prefix(&u).is_ge() && p.beta().compare_prefix(&u).is_le()
    })
}

/// Number of locally admissible words of length `n` (an upper bound for `|B_n|`).
pub fn count_locally_admissible(p: &LexPair, n: usize) -> BigUint {
    // Every prefix of a locally admissible word is locally admissible, so a
    // depth-first extension enumerates them.
    fn go(p: &LexPair, buf: &mut Vec<u8>, n: usize) -> BigUint {
        if buf.len() == n {
            return BigUint::one();
        }
        let mut total = BigUint::zero();
        for c in 0..2u8 {
            buf.push(c);
            if is_locally_admissible(p, &Word::new(buf.clone()).expect("binary")) {
                total += go(p, buf, n);
            }
            buf.pop();
        }
        total
    }
    go(p, &mut Vec::with_capacity(n), n)
}

/// `|B_n(Σ_{(α,β)})|`, exact for every pair.
pub fn count_words(p: &LexPair, n: usize) -> Result<BigUint, SubshiftError> {
    Ok(language(p)?.count_words(n))
}

/// Whether the pair defines a subshift of finite type (both components
/// purely periodic).
pub fn is_sft(p: &LexPair) -> bool {
    p.is_periodic()
}

/// Whether `x` lies in `Σ_{(α,β)}`: every shift `σⁿ(x)`, `n ≥ 0`, lies in `[β, α]`.
pub fn point_in(p: &LexPair, x: &EpSeq) -> bool {
    std::iter::once(x.clone())
        .chain(x.positive_shifts())
        .all(|s| &s <= p.alpha() && &s >= p.beta())
}

/// Whether two pairs have the same words of every length `k ≤ n`.
///
/// Explores the product of the two language automata breadth-first to depth
/// `n`; the languages differ up to `n` exactly when some word of length
/// `≤ n` leads to a live state on one side and to no state on the other.
pub fn same_language_upto(p1: &LexPair, p2: &LexPair, n: usize) -> Result<bool, SubshiftError> {
    let (d1, d2) = (language(p1)?, language(p2)?);
    Ok(dfas_agree_upto(&d1, &d2, n))
}

/// Whether two automata accept the same words of every length `≤ n`.
pub fn dfas_agree_upto(d1: &Dfa, d2: &Dfa, n: usize) -> bool {
    let (s1, s2) = match (d1.start(), d2.start()) {
        (None, None) => return true,
        (Some(a), Some(b)) => (a, b),
        _ => return n == 0,
    };
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut queue = VecDeque::from([((s1, s2), 0usize)]);
    seen.insert((s1, s2), 0);
    while let Some(((q1, q2), depth)) = queue.pop_front() {
        if depth == n {
            continue;
        }
        for c in 0..2u8 {
            match (d1.step(q1, c), d2.step(q2, c)) {
                (None, None) => {}
                (Some(r1), Some(r2)) => {
                    if let Entry::Vacant(e) = seen.entry((r1, r2)) {
                        e.insert(depth + 1);
                        queue.push_back(((r1, r2), depth + 1));
                    }
                }
                _ => return false,
            }
        }
    }
    true
}

/// Tuning for entropy computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyOptions<T> {
    /// Relative tolerance of the spectral-radius bracket.
    pub tol: T,
    /// Iteration cap of the power iteration.
    pub cap: usize,
    /// Word length used for the counting upper bound of non-periodic pairs.
    pub count_len: usize,
    /// Number of inner periodic approximations used for the lower bound.
    pub approximations: usize,
}

impl<T: Float> Default for EntropyOptions<T> {
    fn default() -> Self {
        EntropyOptions {
            tol: T::from(1e-10).expect("representable"),
            cap: 100_000,
            count_len: 24,
            approximations: 6,
        }
    }
}

/// Topological entropy (in bits) with a bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyReport<T> {
    /// Entropy `log₂ ρ`.
    pub h: T,
    /// Lower bound.
    pub lower: T,
    /// Upper bound.
    pub upper: T,
    /// Hausdorff dimension of the corresponding set: `h / log₂ 2 = h`.
    #[serde(rename = "dim_H")]
    pub dim_h: T,
    /// Number of automaton states used.
    pub states: usize,
    /// Whether `h` comes from the window automaton of a periodic pair in `LW`.
    pub window: bool,
}

fn log2_or_zero<T: Float>(x: T) -> T {
    if x <= T::one() {
        T::zero()
    } else {
        x.log2()
    }
}

fn entropy_of_dfa<T: Float>(dfa: &Dfa, opts: &EntropyOptions<T>) -> (T, T, T) {
    let b = dfa.spectral_radius(opts.tol, opts.cap);
    let two = T::one() + T::one();
    let mid = (b.lower + b.upper) / two;
    (
        log2_or_zero(mid),
        log2_or_zero(b.lower),
        log2_or_zero(b.upper),
    )
}

/// `log₂ c` of a big integer, accurate to double precision.
pub fn log2_big(c: &BigUint) -> f64 {
    let shift = c.bits().saturating_sub(53);
    num::ToPrimitive::to_f64(&(c >> shift))
        .unwrap_or(0.0)
        .log2()
        + shift as f64
}

/// Entropy of `Σ_{(α,β)}` with explicit options.
///
/// Periodic pairs in `LW` use the window automaton and report the rigorous
/// power-iteration bracket. Every other pair uses the comparison automaton
/// for `h`; the bracket then combines the inner periodic approximations
/// (lower bound, for pairs in `LW`) and `log₂|B_n|/n` (upper bound, valid by
/// submultiplicativity).
pub fn entropy_with<T: Float>(
    p: &LexPair,
    opts: &EntropyOptions<T>,
) -> Result<EntropyReport<T>, SubshiftError> {
    if p.is_periodic() && classify(p) == PairClass::InLW {
        let wa = build_automaton(p)?;
        let (h, lower, upper) = entropy_of_dfa(wa.dfa(), opts);
        return Ok(EntropyReport {
            h,
            lower,
            upper,
            dim_h: h,
            states: wa.num_states(),
            window: true,
        });
    }
    let dfa = comparison_automaton(p)?;
    if dfa.is_empty() {
        return Err(SubshiftError::EmptyLanguage(p.clone()));
    }
    let (h, lo, hi) = entropy_of_dfa(&dfa, opts);
    let mut lower = lo;
    if classify(p) == PairClass::InLW {
        for q in periodic_approximations(p, opts.approximations) {
            let inner = build_automaton(&q)?;
            let (_, l, _) = entropy_of_dfa(inner.dfa(), opts);
            lower = lower.max(l);
        }
    }
    let n = opts.count_len.max(1);
    let count = dfa.count_words(n);
    let count_bound = T::from(log2_big(&count) / n as f64).unwrap_or(T::infinity());
    let upper = hi.max(lower).min(count_bound.max(h));
    Ok(EntropyReport {
        h,
        lower: lower.min(h),
        upper,
        dim_h: h,
        states: dfa.num_states(),
        window: false,
    })
}

/// Entropy of `Σ_{(α,β)}` in bits with default options.
pub fn entropy(p: &LexPair) -> Result<EntropyReport<f64>, SubshiftError> {
    entropy_with(p, &EntropyOptions::default())
}

/// The counting estimate `(log₂|B_{2n}| − log₂|B_n|)/n` of the entropy.
pub fn entropy_slope(p: &LexPair, n: usize) -> Result<f64, SubshiftError> {
    let d = language(p)?;
    let l = |k: usize| log2_big(&d.count_words(k));
    Ok((l(2 * n) - l(n)) / n as f64)
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

    fn all_words(n: usize) -> Vec<Word> {
        (0..1usize << n)
            .map(|k| Word::new((0..n).rev().map(|i| ((k >> i) & 1) as u8).collect()).unwrap())
            .collect()
    }

    #[test]
    fn window_examples() {
        let g = build_automaton(&pair("|110", "|001")).unwrap();
        assert!(!g.dfa().accepts(&word("111")));
        assert!(!g.dfa().accepts(&word("000")));
        assert!(g.dfa().accepts(&word("110110")));
        let c = build_automaton(&pair("|10", "|01")).unwrap();
        assert_eq!(c.dfa().count_words(3), BigUint::from(2u8));
        let z = build_automaton(&pair("|1100", "|0011")).unwrap();
        assert!(z.dfa().accepts(&word("0110")));
        assert!(!z.dfa().accepts(&word("1101")));
        assert!(matches!(
            build_automaton(&pair("110|10", "|001")),
            Err(SubshiftError::NotPeriodic(_))
        ));
        assert!(matches!(
            build_automaton(&pair("|10", "|0011")),
            Err(SubshiftError::NotInLW { .. })
        ));
    }

    #[test]
    fn forbidden_examples() {
        let f = |a, b| forbidden_factors(&pair(a, b)).unwrap();
        assert_eq!(f("|110", "|001"), vec![word("000"), word("111")]);
        assert_eq!(
            f("|1100", "|0011"),
            vec![word("000"), word("111"), word("0010"), word("1101")]
        );
        assert_eq!(f("|10", "|01"), vec![word("00"), word("11")]);
    }

    #[test]
    fn count_examples() {
        let c = |a, b, n| count_words(&pair(a, b), n).unwrap();
        assert_eq!(c("|110", "|001", 3), BigUint::from(6u8));
        assert_eq!(c("|1100", "|0011", 5), BigUint::from(10u8));
        for (a, b) in [
            ("|110", "|001"),
            ("|1100", "|0011"),
            ("|10", "|01"),
            ("|1", "|0"),
        ] {
            assert_eq!(c(a, b, 1), BigUint::from(2u8));
        }
    }

    #[test]
    fn entropy_examples() {
        let golden = entropy(&pair("|110", "|001")).unwrap();
        assert!((golden.h - 0.694_241_913_6).abs() < 1e-9);
        assert!(golden.lower <= golden.h && golden.h <= golden.upper);
        assert_eq!(golden.dim_h, golden.h);
        assert_eq!(entropy(&pair("|1100", "|0011")).unwrap().h, 0.0);
        assert!((entropy(&pair("|1", "|0")).unwrap().h - 1.0).abs() < 1e-12);
        let slope = entropy_slope(&pair("|110", "|001"), 24).unwrap();
        assert!((slope - golden.h).abs() < 1e-3);
    }

    #[test]
    fn entropy_is_generic() {
        let r: EntropyReport<f32> = entropy_with(
            &pair("|110", "|001"),
            &EntropyOptions {
                tol: 1e-6,
                ..EntropyOptions::default()
            },
        )
        .unwrap();
        assert!((r.h - 0.694_241_9).abs() < 1e-5);
    }

    #[test]
    fn non_periodic_entropy_is_bracketed() {
        let p = pair("110|10", "|001");
        let r = entropy(&p).unwrap();
        assert!(!r.window);
        assert!(r.lower <= r.h && r.h <= r.upper, "{r:?}");
        // Inner approximations sit below, and (110)^∞ bounds from above.
        let inner = entropy(&pair("|1100", "|001")).unwrap().h;
        let outer = entropy(&pair("|110", "|001")).unwrap().h;
        assert!(inner <= r.h + 1e-9 && r.h <= outer + 1e-9);
    }

    #[test]
    fn sft_examples() {
        assert!(is_sft(&pair("|110", "|001")));
        assert!(!is_sft(&pair("110|10", "|001")));
    }

    #[test]
    fn point_in_examples() {
        let p = pair("|110", "|001");
        assert!(point_in(&p, &seq("|10")));
        assert!(!point_in(&p, &seq("|1")));
        assert!(point_in(&p, p.alpha()));
        assert!(point_in(&p, p.beta()));
    }

    #[test]
    fn same_language_examples() {
        let p = pair("|110", "|001");
        assert!(same_language_upto(&p, &p, 10).unwrap());
        let raw = pair("|1101", "|0010");
        let norm = crate::lexworld::normalize(&raw).unwrap();
        assert!(same_language_upto(&raw, &norm, 12).unwrap());
        assert!(!same_language_upto(&p, &pair("|10", "|01"), 2).unwrap());
    }

    #[test]
    fn window_and_comparison_automata_agree() {
        for (a, b) in [
            ("|110", "|001"),
            ("|1100", "|0011"),
            ("|10", "|01"),
            ("|11010", "|00101"),
        ] {
            let p = pair(a, b);
            let w = build_automaton(&p).unwrap();
            let c = comparison_automaton(&p).unwrap();
            assert!(dfas_agree_upto(w.dfa(), &c, 14), "{p}");
        }
    }

    #[test]
    fn window_matches_local_admissibility() {
        let p = pair("|110", "|001");
        let d = build_automaton(&p).unwrap();
        for n in 1..=10 {
            for w in all_words(n) {
                assert_eq!(d.dfa().accepts(&w), is_locally_admissible(&p, &w), "{w}");
            }
        }
    }

    #[test]
    fn degenerate_extremal_pairs_are_empty() {
        // ι maps these pairs to pairs with M = 1 or N = 1.
        for (a, b) in [("101|0", "00|1"), ("11|0", "010|1"), ("|10100", "|00111")] {
            let p = pair(a, b);
            assert!(comparison_automaton(&p).unwrap().is_empty(), "{p}");
        }
    }

    #[test]
    fn submultiplicative() {
        let d = language(&pair("|1100", "|001")).unwrap();
        for m in 1..8 {
            for n in 1..8 {
                assert!(d.count_words(m + n) <= d.count_words(m) * d.count_words(n));
            }
        }
    }
}
