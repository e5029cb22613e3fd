//! The scaling cocycle `phi(l1 l2, t) = l2^{-K} phi(l1, t l2) + phi(l2, t)`
//! and its constructive decomposition
//! `phi(l, t) = l^{-K} psi(l t) - psi(t) + t^K log(l) c`.

mod decompose;
mod extract;
mod provider;
mod reconstruct;
mod reduce;
mod series;
mod verify;

pub use decompose::{decompose, DecomposeSettings, Decomposition, Diagnostics, LevelConstant, ReductionLevel};
pub use extract::{
    c_by_derivative, extract_c_at_zero, extract_v_at_zero, ExtractionSettings, ZeroValueExtraction, LOG_GUARD,
    POWER_GUARD,
};
pub use provider::{
    checked_eval, derivative_at, has_exact_derivatives, taylor_coefficients, CocycleProvider, FnProvider,
    FnTFunction, PolyExp, SharedProvider, TFunction,
};
pub use reconstruct::{reconstruct_phi, ReconstructedProvider};
pub use reduce::{reduce_order, ReducedProvider, ReductionSettings, Subtraction};
pub use series::{measured_decay_ratio, series_partial_sums, series_psi_negative, SeriesSettings, SeriesValue, SERIES_LAMBDA};
pub use verify::{verify_cocycle, CocycleGrid, ResidualReport, ResidualSample};
