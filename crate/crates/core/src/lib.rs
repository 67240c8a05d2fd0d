//! Single-parameter pattern matching for time series.
//!
//! The intensity `alpha` with which a known template appears in measured data
//! is estimated in closed form together with its confidence half-width. After
//! normalizing both sequences to unit norm the estimate becomes `alpha_n`, a
//! cosine in `[-1, 1]` that measures shape similarity alone. Sliding a
//! template along a series and counting lags with `|alpha_n| ≥ 0.98` gives the
//! match curves used to pick representative templates and to find the
//! shortest template length that tells classes apart.
//!
//! ```
//! use alphamatch_core::{alpha_profile, count_matches, Threshold, TimeSeries};
//!
//! let data = TimeSeries::new(vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
//! let profile = alpha_profile(&[1.0, 2.0], &data).unwrap();
//! assert_eq!(profile.len(), 4);
//! assert_eq!(count_matches(&profile, Threshold::DEFAULT), 2);
//! ```

pub mod alpha;
pub mod detection;
pub mod error;
pub mod ingest;
pub mod matcher;
pub mod selection;
pub mod sum;

pub use alpha::{
    alpha_estimate, alpha_normalized, cross_correlation_oracle, detection_threshold,
    normalization_factor, normalize, AlphaEstimate, NormalizedSequence, Template, TimeSeries,
};
pub use detection::{
    coverage_experiment, energy_matched_template, gaussian_noise, inject, periodic_surrogate,
    CoverageConfig, CoverageReport, Injection, SynthesisSpec,
};
pub use error::{Error, Offset, Result};
pub use matcher::{
    alpha_profile, count_matches, match_curve, AlphaProfile, CurvePoint, LengthGrid, MatchCurve,
    Threshold,
};
pub use selection::{
    discriminate, minimal_discriminative_length, partition, select_template, ClassSeries,
    DiscriminationConfig, DiscriminationReport, PartitionSet, SelectedTemplate,
};
