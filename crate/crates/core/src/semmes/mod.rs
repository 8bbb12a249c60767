//! The Semmes metric on a voxel cell complex.

pub mod audit;
pub mod complex;
pub mod model;
pub mod singular;

pub use audit::{audit_connectivity, audit_regularity, quasi_self_similarity_check, ConnectivityReport, RegularityReport, SimilarityReport};
pub use complex::{build_complex, build_complex_with, full_words, ComplexOptions, CopyInfo, SemmesComplex};
pub use model::{Model, ModelParams};
pub use singular::{assemble_point_singularity, check_planted_balls, meshed_ball, PlantedBall};
