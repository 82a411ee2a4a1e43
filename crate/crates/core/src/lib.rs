//! Free groups, their finite quotients, and finite certificates for
//! closedness questions in the profinite topology.
//!
//! Word exponents are generic over [`words::Exponent`]; the aliases below
//! fix the two instantiations used throughout.

pub mod cert;
pub mod cli;
pub mod example1;
pub mod example2;
pub mod quotients;
pub mod report;
pub mod separation;
pub mod words;

pub use quotients::{FiniteQuotient, Permutation, QuotientElement, QuotientError, QuotientRepr};
pub use report::{ClauseResult, Report};
pub use separation::{SeparationCertificate, SeparationError, StallingsGraph, WitnessKind};
pub use words::{Alphabet, Exponent, Factor, FactorPartition, FreeWord, Generator, WordError};

/// Words with arbitrary-precision exponents (needed for `a^(k!)`).
pub type Word = FreeWord<num_bigint::BigInt>;

/// Words with machine-integer exponents.
pub type SmallWord = FreeWord<i64>;
