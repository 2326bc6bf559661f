//! Eigenvalue counting and spacing statistics for Ewens-distributed
//! permutation matrices and their wreath-product (S¹-modified) variants.
//!
//! Angles are measured in turns throughout: an eigenvalue `e^{2iπx}` is
//! stored as `x ∈ [0, 1)`.

pub mod cesaro;
pub mod error;
pub mod ewens;
pub mod experiments;
pub mod limits;
pub mod numeric;
pub mod rng;
pub mod spacings;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use ewens::{AgeOrderedCycles, BernoulliWord, CoupledSample, CycleCounts, EwensParams};
pub use spectral::{Arc, CountMoments, Endpoint, ModifiedSpectrum};
pub use limits::{ArcClass, Arithmetic, ClassifiedArc, CovarianceMatrix, S3Relation};
pub use spacings::{NormalizedSpacings, SpacingStats};
pub use experiments::{ExperimentConfig, Model, NormalityReport, TrialMatrix};
