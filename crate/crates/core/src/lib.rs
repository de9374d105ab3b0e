//! Pro-p PD² pairs through free nilpotent quotients: Hall-basis collection,
//! the lower central q-series and its graded Lie algebra, standard words,
//! successive approximation to standard form, and decomposition graphs.
//!
//! Exact arithmetic is generic over [`Scalar`]; the aliases below fix the
//! arbitrary-precision choice used by the normalizer and the command line.

pub mod decomp;
pub mod error;
pub mod graded;
pub mod hall;
pub mod init;
pub mod linalg;
pub mod nilpotent;
pub mod normalizer;
pub mod scalar;
pub mod series;
pub mod standard;
pub mod word;

pub use decomp::{CollapseMove, DecompositionGraph, Surface, VertexLabel};
pub use error::{Error, InitFailure, Result};
pub use graded::{GradedBasis, GradedElement};
pub use hall::HallBasis;
pub use init::{initialize_mod3, InitialBasis, SeedBasis};
pub use nilpotent::{Collector, MalcevElement, TruncationParams};
pub use normalizer::{cap_off, normalize_to_depth, verify_certificate, BasisChangeCertificate, CapOutcome};
pub use scalar::{Scalar, Wide};
pub use standard::{CharKind, OrientationCharacter, PairPresentation, StandardWordSpec};
pub use word::{FreeWord, GeneratorSet};

/// Collector over arbitrary-precision integers.
pub type BigCollector = Collector<num_bigint::BigInt>;
/// Collector over checked 128-bit integers.
pub type WideCollector = Collector<Wide>;
/// Mal'cev element over arbitrary-precision integers.
pub type Malcev = MalcevElement<num_bigint::BigInt>;
