//! Numerical checks of the factorization guarantees and the pivot-quality
//! metrics used to compare CQRRPT with a reference QRCP.

mod inheritance;
mod quality;
mod rrqr;
mod similarity;

pub use inheritance::{inheritance_check, InheritanceReport, INHERITANCE_SLACK};
pub use quality::{
    pivot_quality, pivot_quality_with_spectrum, trailing_norms, PivotQualityCurves,
    PivotedFactor,
};
pub use rrqr::{gu_eisenstat_f, gu_eisenstat_g, rrqr_report, RrqrReport};
pub use similarity::{maxnorm_similarity_check, SimilarityReport, SIMILARITY_SLACK};
