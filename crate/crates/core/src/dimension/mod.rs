//! Solution-set richness: PCA dimension of point clouds, rhomboidal patch
//! extraction, dimension-versus-perimeter fits and the characteristic-line
//! classification of wave grids.

mod oracle;
mod patch;
mod pca;
mod scaling;

pub use oracle::{determined_region_oracle, OracleConfig, RegionClass, RegionMap};
pub use patch::{extract_patch, patch_nodes, PatchCloud, PatchSpec};
pub use pca::{
    dimension_from_spectrum, effective_dimension, ensemble_dimension, pca_estimate, DimensionEstimate,
    DEFAULT_NOISE_FLOOR, DEFAULT_TAU_REL,
};
pub use scaling::{fit_line, perimeter_scaling, ScalingFit, ScalingSample};
