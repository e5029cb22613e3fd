//! Flat model of classical symbols on the torus and the scaling cocycle they
//! generate through a radial cutoff.

mod angular;
mod cutoff;
mod model;
mod spatial;

pub use angular::{angular_integral, sphere_area, AngularPart, AngularPreset, AngularRule};
pub use cutoff::{CutoffProfile, CutoffShape};
pub use model::{
    cutoff_difference_integral, direct_symbol_integral, finite_part_radial, layer_phi, radial_difference_integral,
    symbol_phi_provider, ClassicalSymbolModel, HomogeneousLayer, RadialQuadrature, SymbolProvider,
};
pub use spatial::{SpatialWeight, TorusGrid};
