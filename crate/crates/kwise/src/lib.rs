//! Constructions of k-wise independent ±1 sequences and a verification lab.
//!
//! Three constructions:
//!
//! - **Gray walk** ([`gray`]): pairwise-independent signs built from the
//!   infinite Gray code, whose partial-sum walk is almost surely bounded with
//!   explicit, seed-determined extremes.
//! - **Mod-4 block construction** ([`modm`]): blocks conditioned to have
//!   product +1, giving S_{jL} ≡ 0 (mod 4) combinatorially while staying
//!   k-wise independent for k < L.
//! - **General mod-m construction** ([`modm`]): resynchronizing assembly of
//!   conditioned block samples, giving P(S_{I_j} ≡ 0 mod m) > 1 − ε at
//!   checkpoints I_j = jL for any modulus m and independence order k.
//!
//! The verification side ([`lab`]) checks independence exactly by exhausting
//! small seed spaces and statistically via chi-square tuple tests, plus moment
//! identities (E S_n = 0, E S_n² = n, E S_n⁴ = 3n² − 2n) and the fourth-moment
//! tail bound. Two side models round it out: a random-sign Pascal triangle
//! ([`pascal`]) and k-wise independent bond percolation with a guaranteed
//! narrow-side crossing ([`perc`]).
//!
//! Everything is deterministic given a seed: randomness flows through
//! counter-based [`SeedStream`]s with derived substreams.

pub mod error;
pub mod gray;
pub mod lab;
pub mod modm;
pub mod num;
pub mod pascal;
pub mod perc;
pub mod seed;
pub mod sign_seq;
pub mod walk;

pub use error::{Error, Result};
pub use seed::{SeedStream, Sign};
pub use sign_seq::{ConstructionParams, ConstructionTag, SignSequence};
pub use walk::{accumulate_walk, walk_of, WalkPath};

/// Triangle with machine-width entries, exact up to 120 rows.
pub type Triangle128 = pascal::SignedTriangle<i128>;
/// Triangle with arbitrary-precision entries, for deep growth.
pub type TriangleBig = pascal::SignedTriangle<num_bigint::BigInt>;
/// Arbitrary-precision counting scalar used by the canonical classification.
pub type BigCount = num_bigint::BigUint;
