//! Sensor sets, density profiles, density and thickness checks, and
//! Besicovitch-type covers with certified overlap.

pub mod cover;
pub mod density;
pub mod profile;
pub mod set;

pub use cover::{besicovitch_cover, default_k_bes, CoverReport};
pub use density::{check_density, thickness_check, DensityReport, SampleSpec, ThicknessReport};
pub use profile::{geom_params, japanese, DensityProfile, RadialFn, RhoProfile, SigmaProfile};
pub use set::{construct_example_set, ExampleSet, ExampleSpec, SensorSet};
