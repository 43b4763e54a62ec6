//! Symbolic dynamics of the doubling map with a hole in the circle.
//!
//! A hole `(a, b)` on the circle determines a pair of binary sequences
//! `(α, β)`, and the surviving set of the doubling map is coded by the
//! lexicographic subshift
//! `Σ_{(α,β)} = { x : β ≼ σⁿ(x) ≼ α for all n ≥ 0 }`.
//!
//! The crate is organised bottom-up:
//!
//! * [`words`]: finite words and eventually periodic sequences.
//! * [`circle`]: exact rational points, binary expansions, holes, orbits.
//! * [`lexworld`]: Parry sequences, pair classification and normalisation.
//! * [`subshift`]: automata, word counts, entropy, forbidden factors.
//! * [`renorm`]: renormalisation, transitivity, bridge words.
//! * [`specprop`]: specification numbers and specification families.
//! * [`cli`]: the `lexshift` command-line front end.
//!
//! Combinatorial and circle computations are exact (arbitrary-precision
//! rationals). Floating-point computations (spectral radii, entropies) are
//! generic over [`num_traits::Float`]; the aliases below fix the defaults.

pub mod circle;
pub mod cli;
pub mod lexworld;
pub mod renorm;
pub mod specprop;
pub mod subshift;
pub mod words;

/// Exact rational numbers used for points of the circle.
pub type Rational = num::BigRational;

/// Default floating-point scalar.
pub type Real = f64;

/// Entropy report with the default scalar.
pub type Entropy = subshift::EntropyReport<Real>;

pub use circle::{Hole, HoleClass};
pub use lexworld::{LexPair, PairClass};
pub use words::{EpSeq, Word};

/// Serializes exact rationals as `"p/q"` strings.
pub(crate) mod rational_serde {
    use serde::Serializer;

    use crate::Rational;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }

    pub fn serialize_vec<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(|x| x.to_string()))
    }
}
