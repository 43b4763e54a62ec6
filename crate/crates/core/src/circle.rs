//! Exact arithmetic on the circle `ℝ/ℤ`: binary expansions, doubling-map
//! orbits, holes, and the hole → sequence-pair dictionary.
//!
//! Points are rationals in `[0, 1)`. The doubling map `f(x) = 2x mod 1`
//! never increases the reduced denominator, so every rational orbit is
//! finite and is computed exactly.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexworld::LexPair;
use crate::words::{EpSeq, Word};
use crate::Rational;

/// Errors raised by circle operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircleError {
    /// A rational literal could not be parsed.
    #[error("cannot parse {0:?} as a rational p/q")]
    BadRational(String),
    /// A point lies outside the unit interval accepted by the operation.
    #[error("point {0} lies outside [0, 1)")]
    OutOfRange(Rational),
    /// Hole endpoints must satisfy `a < b`.
    #[error("invalid hole ({}, {}): need a < b", .0.0, .0.1)]
    InvalidInterval(Box<(Rational, Rational)>),
    /// The operation needs a hole inside the studied rectangle.
    #[error("hole ({a}, {b}) is {class:?}; the operation needs a centred candidate")]
    NotCentred {
        /// Left endpoint.
        a: Box<Rational>,
        /// Right endpoint.
        b: Box<Rational>,
        /// Its class.
        class: HoleClass,
    },
    /// The hole is not in the set `S` of holes whose endpoints both fall back into it.
    #[error("hole is not in S: some endpoint orbit never enters the hole")]
    NotInS,
}

/// Which of the two binary expansions of a dyadic rational to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expansion {
    /// The expansion ending in `10^∞` (lexicographically larger).
    Upper,
    /// The expansion ending in `01^∞`.
    Lower,
}

/// Parses a rational literal `p/q` or an integer `p`.
pub fn parse_rational(s: &str) -> Result<Rational, CircleError> {
    let bad = || CircleError::BadRational(s.to_string());
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// The exact value `Σ xᵢ 2^{-i}` of an eventually periodic sequence.
///
/// For `x = P · Q^∞` with `ℓ(P) = p`, `ℓ(Q) = q` this is
/// `P/2^p + Q/((2^q − 1)·2^p)`, reading `P` and `Q` as binary integers.
pub fn from_binary(s: &EpSeq) -> Rational {
    let as_int = |w: &Word| -> BigInt {
        w.symbols()
            .iter()
            .fold(BigInt::zero(), |acc, &b| (acc << 1) + BigInt::from(b))
    };
    let p = s.preperiod().len();
    let q = s.period().len();
    let two_p = BigInt::one() << p;
    let two_q_minus_one = (BigInt::one() << q) - 1;
    Rational::new(as_int(s.preperiod()), two_p.clone())
        + Rational::new(as_int(s.period()), two_q_minus_one * two_p)
}

/// The binary expansion of `x ∈ [0, 1]` by long division.
///
/// Dyadic rationals have two expansions; `prefer` selects one. The value
/// `x = 1` is accepted and returns `1^∞`.
pub fn to_binary(x: &Rational, prefer: Expansion) -> Result<EpSeq, CircleError> {
    if x.is_negative() || *x > Rational::one() {
        return Err(CircleError::OutOfRange(x.clone()));
    }
    if x.is_one() {
        return Ok(EpSeq::constant(1));
    }
    if x.is_zero() {
        return Ok(EpSeq::constant(0));
    }
    let n = x.numer().clone();
    let d = x.denom().clone();
    let twos = d.trailing_zeros().unwrap_or(0) as usize;
    if d == (BigInt::one() << twos) {
        // Dyadic: n / 2^e with n odd.
        let bits: Vec<u8> = (0..twos).rev().map(|i| u8::from(n.bit(i as u64))).collect();
        let word = Word::new(bits).expect("binary digits");
        return Ok(match prefer {
            Expansion::Upper => EpSeq::new(word, Word::constant(0, 1)).expect("nonempty"),
            Expansion::Lower => {
                let mut lowered = word.prefix(word.len() - 1);
                lowered.push(0);
                EpSeq::new(lowered, Word::constant(1, 1)).expect("nonempty")
            }
        });
    }
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut digits = Vec::new();
    let mut r = n;
    loop {
        if let Some(&start) = seen.get(&r) {
            let pre = Word::new(digits[..start].to_vec()).expect("binary digits");
            let per = Word::new(digits[start..].to_vec()).expect("binary digits");
            return Ok(EpSeq::new(pre, per).expect("a repeated remainder closes a nonempty cycle"));
        }
        seen.insert(r.clone(), digits.len());
        r <<= 1;
        if r >= d {
            r -= &d;
            digits.push(1);
        } else {
            digits.push(0);
        }
    }
}

/// The doubling map `x ↦ 2x mod 1`.
pub fn double(x: &Rational) -> Rational {
    let y = x * Rational::from_integer(2.into());
    let fl = y.floor();
    y - fl
}

/// Distance on the circle `ℝ/ℤ`.
pub fn circle_distance(x: &Rational, y: &Rational) -> Rational {
    let d = (x - y).abs();
    let fr = &d - d.floor();
    let other = Rational::one() - &fr;
    if fr < other {
        fr
    } else {
        other
    }
}

/// An open arc `(a, b)` with `0 ≤ a < b ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hole {
    a: Rational,
    b: Rational,
}

impl Hole {
    /// Builds a hole, rejecting `a ≥ b` and endpoints outside `[0, 1]`.
    pub fn new(a: Rational, b: Rational) -> Result<Self, CircleError> {
        for x in [&a, &b] {
            if x.is_negative() || *x > Rational::one() {
                return Err(CircleError::OutOfRange(x.clone()));
            }
        }
        if a >= b {
            return Err(CircleError::InvalidInterval(Box::new((a, b))));
        }
        Ok(Hole { a, b })
    }

    /// Builds a hole from small integer fractions `an/ad`, `bn/bd`.
    pub fn from_ratios(an: i64, ad: i64, bn: i64, bd: i64) -> Result<Self, CircleError> {
        Hole::new(ratio(an, ad), ratio(bn, bd))
    }

    /// Left endpoint.
    pub fn a(&self) -> &Rational {
        &self.a
    }

    /// Right endpoint.
    pub fn b(&self) -> &Rational {
        &self.b
    }

    /// Whether `x` lies in the open arc.
    pub fn contains(&self, x: &Rational) -> bool {
        self.a < *x && *x < self.b
    }

    /// Whether this hole is contained in `other` (as closed intervals of endpoints).
    pub fn is_subset_of(&self, other: &Hole) -> bool {
        other.a <= self.a && self.b <= other.b
    }
}

impl fmt::Display for Hole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

impl FromStr for Hole {
    type Err = CircleError;

    /// Parses `"a,b"` or `"(a, b)"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = t
            .split_once(',')
            .ok_or_else(|| CircleError::BadRational(s.to_string()))?;
        Hole::new(parse_rational(a)?, parse_rational(b)?)
    }
}

/// Where a hole sits relative to the studied parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HoleClass {
    /// The surviving set is just the fixed point `0`.
    TrivialExceptional,
    /// `1/4 < a < 1/2 < b < 3/4`: the interesting case.
    CentredCandidate,
    /// Neither of the above.
    OutsideStudiedRectangle,
}

/// Classifies a hole relative to the rectangle `1/4 < a < 1/2 < b < 3/4`.
pub fn validate_hole(h: &Hole) -> HoleClass {
    let quarter = ratio(1, 4);
    let half = ratio(1, 2);
    let three_quarters = ratio(3, 4);
    let (a, b) = (&h.a, &h.b);
    if (*a < quarter && *b > half) || (*a < half && *b > three_quarters) {
        HoleClass::TrivialExceptional
    } else if quarter < *a && *a < half && half < *b && *b < three_quarters {
        HoleClass::CentredCandidate
    } else {
        HoleClass::OutsideStudiedRectangle
    }
}

fn require_centred(h: &Hole) -> Result<(), CircleError> {
    match validate_hole(h) {
        HoleClass::CentredCandidate => Ok(()),
        class => Err(CircleError::NotCentred {
            a: Box::new(h.a.clone()),
            b: Box::new(h.b.clone()),
            class,
        }),
    }
}

/// The kneading pair of a centred hole: `α = π⁻¹(2a)` (upper expansion)
/// and `β = π⁻¹(2b − 1)` (lower expansion).
pub fn hole_to_pair(h: &Hole) -> Result<LexPair, CircleError> {
    require_centred(h)?;
    let two = Rational::from_integer(2.into());
    let alpha = to_binary(&(&two * &h.a), Expansion::Upper)?;
    let beta = to_binary(&(&two * &h.b - Rational::one()), Expansion::Lower)?;
    Ok(LexPair::new(alpha, beta).expect("the rectangle forces α₁ = 1 and β₁ = 0"))
}

/// The mirror hole `(1 − b, 1 − a)`.
pub fn mirror_hole(h: &Hole) -> Hole {
    Hole {
        a: Rational::one() - &h.b,
        b: Rational::one() - &h.a,
    }
}

/// A finite doubling-map orbit: `preorbit` followed by the repeating `cycle`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orbit {
    /// Points visited before entering the cycle.
    #[serde(serialize_with = "crate::rational_serde::serialize_vec")]
    pub preorbit: Vec<Rational>,
    /// The periodic cycle, starting at its first visited point.
    #[serde(serialize_with = "crate::rational_serde::serialize_vec")]
    pub cycle: Vec<Rational>,
}

impl Orbit {
    /// Number of distinct points.
    pub fn len(&self) -> usize {
        self.preorbit.len() + self.cycle.len()
    }

    /// Whether the orbit is empty (never: every orbit has a cycle).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `j`-th iterate `f^j(x)`.
    pub fn iterate(&self, j: usize) -> &Rational {
        let p = self.preorbit.len();
        if j < p {
            &self.preorbit[j]
        } else {
            &self.cycle[(j - p) % self.cycle.len()]
        }
    }
}

/// The doubling-map orbit of a rational point, reduced into `[0, 1)`.
pub fn orbit(x: &Rational) -> Orbit {
    let mut x = x - x.floor();
    let mut seen: HashMap<Rational, usize> = HashMap::new();
    let mut points = Vec::new();
    while !seen.contains_key(&x) {
        seen.insert(x.clone(), points.len());
        points.push(x.clone());
        x = double(&x);
    }
    let start = seen[&x];
    let cycle = points.split_off(start);
    Orbit {
        preorbit: points,
        cycle,
    }
}

/// Landing indices of the endpoint orbits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SMembership {
    /// Least `j ≥ 1` with `f^j(a)` inside the open hole.
    pub n: Option<usize>,
    /// Least `j ≥ 1` with `f^j(b)` inside the open hole.
    pub m: Option<usize>,
}

impl SMembership {
    /// Whether both endpoints fall back into the hole.
    pub fn in_s(&self) -> bool {
        self.n.is_some() && self.m.is_some()
    }
}

fn landing_index(h: &Hole, x: &Rational) -> Option<usize> {
    let o = orbit(x);
    // f^j(x) for j = 1..=len covers every point of the orbit after x.
    (1..=o.len()).find(|&j| h.contains(o.iterate(j)))
}

/// Landing indices `n`, `m` of the endpoints `a` and `b`.
pub fn s_membership(h: &Hole) -> Result<SMembership, CircleError> {
    require_centred(h)?;
    Ok(SMembership {
        n: landing_index(h, &h.a),
        m: landing_index(h, &h.b),
    })
}

/// A radius `ε > 0` such that moving either endpoint of a hole in `S` by
/// less than `ε` leaves the surviving set unchanged.
///
/// The radius is `½ · min d(f^j(x), {a, b}) / 2^j` over `x ∈ {a, b}` and
/// `1 ≤ j ≤` the landing index of `x`. The factor `2^j` accounts for the
/// expansion of `f^j`: an endpoint moved by `δ` moves its `j`-th image by
/// `2^j δ`, and the hole itself moves by `δ`, so every image keeps its side
/// of the perturbed endpoints and the landing points stay inside.
pub fn stability_radius(h: &Hole) -> Result<Rational, CircleError> {
    let s = s_membership(h)?;
    let (Some(n), Some(m)) = (s.n, s.m) else {
        return Err(CircleError::NotInS);
    };
    let mut best: Option<Rational> = None;
    for (x, land) in [(&h.a, n), (&h.b, m)] {
        let o = orbit(x);
        for j in 1..=land {
            let y = o.iterate(j);
            let d = circle_distance(y, &h.a).min(circle_distance(y, &h.b));
            let scaled = d / Rational::from_integer(BigInt::one() << j);
            if best.as_ref().is_none_or(|b| scaled < *b) {
                best = Some(scaled);
            }
        }
    }
    let best = best.expect("landing indices are at least 1");
    if best.is_zero() {
        // An endpoint orbit hits the other endpoint exactly before landing.
        return Err(CircleError::NotInS);
    }
    Ok(best / Rational::from_integer(2.into()))
}

/// Calls `visit` with every Lyndon word of length `n` over `{0, 1}`
/// (the least representatives of primitive necklaces), as integers whose
/// binary digits, most significant first, are the word. Stops early when
/// `visit` returns `false`.
fn for_each_lyndon(n: usize, mut visit: impl FnMut(&[u8]) -> bool) {
    // Duval's generation of Lyndon words of length ≤ n in lexicographic order.
    let mut w: Vec<u8> = vec![0];
    while !w.is_empty() {
        if w.len() == n && !visit(&w) {
            return;
        }
        let m = w.len();
        while w.len() < n {
            w.push(w[w.len() - m]);
        }
        while w.last() == Some(&1) {
            w.pop();
        }
        if let Some(last) = w.last_mut() {
            *last = 1;
        }
    }
}

/// Periods `n ∈ [3, nmax]` for which every least-period-`n` orbit of the
/// doubling map meets the open hole.
pub fn bad_periods(h: &Hole, nmax: usize) -> Vec<usize> {
    let (an, ad) = (h.a.numer(), h.a.denom());
    let (bn, bd) = (h.b.numer(), h.b.denom());
    (3..=nmax)
        .filter(|&n| {
            let denom = (BigInt::one() << n) - 1;
            let lo = an * &denom;
            let hi = bn * &denom;
            let mut all_hit = true;
            for_each_lyndon(n, |word| {
                let mut k = word
                    .iter()
                    .fold(BigInt::zero(), |acc, &b| (acc << 1) + BigInt::from(b));
                let hit = (0..n).any(|_| {
                    // k/(2ⁿ−1) ∈ (a, b)  ⟺  a_n·(2ⁿ−1) < k·a_d  and  k·b_d < b_n·(2ⁿ−1)
                    let inside = lo < &k * ad && &k * bd < hi;
                    // rotate left: k ↦ 2k mod (2ⁿ − 1)
                    k <<= 1;
                    if k >= denom {
                        k -= &denom;
                    }
                    inside
                });
                if !hit {
                    all_hit = false;
                }
                all_hit
            });
            all_hit
        })
        .collect()
}

/// Ordered JSON summary of a hole: class, landing indices and bad periods.
#[derive(Debug, Clone, Serialize)]
pub struct HoleReport {
    /// Left endpoint, as `p/q`.
    pub a: String,
    /// Right endpoint, as `p/q`.
    pub b: String,
    /// Class of the hole.
    pub class: HoleClass,
    /// Landing index of `a`.
    pub n: Option<usize>,
    /// Landing index of `b`.
    pub m: Option<usize>,
    /// Bad periods up to the requested bound.
    pub bad_periods: Vec<usize>,
}

/// Builds the [`HoleReport`] of a hole.
pub fn hole_report(h: &Hole, nmax: usize) -> HoleReport {
    let class = validate_hole(h);
    let s = s_membership(h).unwrap_or(SMembership { n: None, m: None });
    HoleReport {
        a: h.a.to_string(),
        b: h.b.to_string(),
        class,
        n: s.n,
        m: s.m,
        bad_periods: bad_periods(h, nmax),
    }
}

/// Approximates a rational by `f64` (for display and sampling only).
pub fn to_f64(x: &Rational) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn seq(s: &str) -> EpSeq {
        s.parse().unwrap()
    }

    fn hole(a: &str, b: &str) -> Hole {
        Hole::new(q(a), q(b)).unwrap()
    }

    #[test]
    fn from_binary_examples() {
        assert_eq!(from_binary(&seq("|10")), q("2/3"));
        assert_eq!(from_binary(&seq("|0")), q("0"));
        assert_eq!(from_binary(&seq("|0011")), q("1/5"));
        assert_eq!(from_binary(&seq("1|0")), q("1/2"));
        assert_eq!(from_binary(&seq("0|1")), q("1/2"));
        assert_eq!(from_binary(&seq("|1")), q("1"));
    }

    #[test]
    fn to_binary_examples() {
        assert_eq!(to_binary(&q("2/3"), Expansion::Upper).unwrap(), seq("|10"));
        assert_eq!(to_binary(&q("1/2"), Expansion::Upper).unwrap(), seq("1|0"));
        assert_eq!(to_binary(&q("1/2"), Expansion::Lower).unwrap(), seq("0|1"));
        assert_eq!(
            to_binary(&q("4/5"), Expansion::Upper).unwrap(),
            seq("|1100")
        );
        assert_eq!(to_binary(&q("5/6"), Expansion::Upper).unwrap(), seq("1|10"));
        assert_eq!(
            to_binary(&q("3/8"), Expansion::Lower).unwrap(),
            seq("010|1")
        );
        assert_eq!(to_binary(&q("1"), Expansion::Upper).unwrap(), seq("|1"));
        assert!(to_binary(&q("3/2"), Expansion::Upper).is_err());
    }

    #[test]
    fn round_trip_small_denominators() {
        for d in 1..=64i64 {
            for n in 0..d {
                let x = ratio(n, d);
                let up = to_binary(&x, Expansion::Upper).unwrap();
                let lo = to_binary(&x, Expansion::Lower).unwrap();
                assert_eq!(from_binary(&up), x);
                assert_eq!(from_binary(&lo), x);
                assert!(up >= lo);
            }
        }
    }

    #[test]
    fn validate_hole_examples() {
        assert_eq!(
            validate_hole(&hole("1/5", "3/5")),
            HoleClass::TrivialExceptional
        );
        assert_eq!(
            validate_hole(&hole("2/5", "3/5")),
            HoleClass::CentredCandidate
        );
        assert_eq!(
            validate_hole(&hole("1/10", "2/5")),
            HoleClass::OutsideStudiedRectangle
        );
        assert!(matches!(
            Hole::new(q("3/5"), q("2/5")),
            Err(CircleError::InvalidInterval(..))
        ));
    }

    #[test]
    fn hole_to_pair_examples() {
        let p = hole_to_pair(&hole("2/5", "3/5")).unwrap();
        assert_eq!((p.alpha(), p.beta()), (&seq("|1100"), &seq("|0011")));
        let p = hole_to_pair(&hole("1/3", "2/3")).unwrap();
        assert_eq!((p.alpha(), p.beta()), (&seq("|10"), &seq("|01")));
        let p = hole_to_pair(&hole("5/12", "7/12")).unwrap();
        assert_eq!((p.alpha(), p.beta()), (&seq("1|10"), &seq("0|01")));
        assert!(hole_to_pair(&hole("1/5", "3/5")).is_err());
    }

    #[test]
    fn mirror_hole_examples() {
        assert_eq!(mirror_hole(&hole("2/5", "3/5")), hole("2/5", "3/5"));
        assert_eq!(mirror_hole(&hole("3/10", "3/5")), hole("2/5", "7/10"));
        let h = hole("7/20", "11/20");
        assert_eq!(mirror_hole(&mirror_hole(&h)), h);
    }

    #[test]
    fn orbit_examples() {
        let o = orbit(&q("2/5"));
        assert!(o.preorbit.is_empty());
        assert_eq!(o.cycle, vec![q("2/5"), q("4/5"), q("3/5"), q("1/5")]);
        let o = orbit(&q("5/12"));
        assert_eq!(o.preorbit, vec![q("5/12"), q("5/6")]);
        assert_eq!(o.cycle, vec![q("2/3"), q("1/3")]);
        let o = orbit(&q("0"));
        assert_eq!(o.cycle, vec![q("0")]);
        for d in 1..=50i64 {
            assert!(orbit(&ratio(1, d)).len() <= d as usize);
        }
    }

    #[test]
    fn s_membership_examples() {
        let s = s_membership(&hole("13/30", "17/30")).unwrap();
        assert_eq!((s.n, s.m), (Some(3), Some(3)));
        assert!(s.in_s());
        let s = s_membership(&hole("2/5", "3/5")).unwrap();
        assert_eq!((s.n, s.m), (None, None));
        let s = s_membership(&hole("5/12", "7/12")).unwrap();
        assert_eq!((s.n, s.m), (None, None));
    }

    #[test]
    fn stability_radius_examples() {
        // Orbit of 13/30: 13/15, 11/15, 7/15 (lands, distance 1/30 from a, scaled by 8).
        // Orbit of 17/30: 2/15, 4/15, 8/15 (lands, distance 1/30 from b, scaled by 8).
        let eps = stability_radius(&hole("13/30", "17/30")).unwrap();
        assert_eq!(eps, q("1/480"));
        assert!(eps > q("0"));
        assert_eq!(
            stability_radius(&hole("2/5", "3/5")),
            Err(CircleError::NotInS)
        );
    }

    #[test]
    fn lyndon_counts() {
        // Number of binary Lyndon words of length n.
        let expected = [2usize, 1, 2, 3, 6, 9, 18, 30, 56, 99];
        for (n, &e) in (1..=10).zip(expected.iter()) {
            let mut c = 0;
            for_each_lyndon(n, |_| {
                c += 1;
                true
            });
            assert_eq!(c, e, "n = {n}");
        }
    }

    #[test]
    fn bad_periods_examples() {
        assert_eq!(bad_periods(&hole("1/3", "2/3"), 5), vec![3, 4, 5]);
        assert_eq!(
            bad_periods(&hole("49/100", "51/100"), 3),
            Vec::<usize>::new()
        );
        assert_eq!(bad_periods(&hole("2/5", "3/5"), 3), vec![3]);
    }

    #[test]
    fn hole_report_key_order() {
        let r = hole_report(&hole("13/30", "17/30"), 5);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.starts_with(
            r#"{"a":"13/30","b":"17/30","class":"CentredCandidate","n":3,"m":3,"bad_periods":"#
        ));
    }
}
