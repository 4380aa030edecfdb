//! Quasisimilarity dynamics of piecewise-linear homeomorphisms of R:
//! stretch intervals, power profiles and the nested-interval extraction of
//! the stretch factor, and the orbit constructions conjugating a uniformly
//! quasisimilar cyclic action to a translation or a dilation.

mod conjugacy;
mod interval;
mod pl;
mod scalar;

pub use conjugacy::{
    classify, conjugacy_error, conjugate_to_dilation, conjugate_to_translation, test_grid,
    uniform_power_bound, verify_rubber_band, Classification, ClassifyReport, CoverPiece,
    DilationConjugacy, FixedPointKind, QsWitness, TranslationConjugacy, DEFAULT_INNER_CUTOFF,
    DEFAULT_SEGMENT_CAP,
};
pub use interval::{
    extract_stretch, power_stretch_profile, PowerProfile, ProfileEntry, StretchEstimate,
    StretchInterval,
};
pub use pl::{FixedComponent, PLHomeo, PLJson, Tail, Tails, DEFAULT_BREAKPOINT_CAP};
pub use scalar::Scalar;
