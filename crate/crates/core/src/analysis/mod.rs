//! Boundary statistics, merge-strength correlation and segmentation
//! condition checks.

mod boundary;
mod conditions;
mod stats;
mod svg;

pub use boundary::{
    boundary_csv, boundary_pair_stats, correlate_strength_frequency, strength_rows, BoundaryPairTable,
    StrengthCorrelation,
};
pub use conditions::{
    check_condition, enumerate_conditions, Bindings, ConditionCase, ConditionOutcome, ConditionReport, Pattern,
    PatternSummary,
};
pub use stats::{accuracy_permutation_p, average_ranks, chance_band_half_width, spearman, spearman_permutation_p};
pub use svg::scatter_svg;
