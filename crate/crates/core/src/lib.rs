//! Pair correlation statistics of weighted, exponentially growing length
//! spectra.
//!
//! A spectrum is a locally finite set `E ⊂ [0, ∞)` with positive weights,
//! stored up to a truncation bound. The crate computes its growth function
//! and slices, the binned pair correlation measure of `F_N = E ∩ [0, N]`
//! at any scaling `ψ(N)`, and compares the renormalized result with the
//! limit densities `(δ/2) e^{−δ|t|}` (unit scaling) and `δ/2` (growing
//! scaling). Spectra come from closed-form generators or from metric
//! graphs (closed geodesics and orbit distances).
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`.

// Negated comparisons are used to reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod correlation;
pub mod error;
pub mod generators;
pub mod graph;
pub mod oracle;
pub mod regression;
pub mod scalar;
pub mod scaling;
pub mod spectrum;
pub mod verify;

pub use asymptotics::{
    default_fit_grid, error_shape, fit_exponential_decay, fit_growth, g_limit, g_mass, geometric_sum,
    geometric_sum_deviation, geometric_sum_leading, geometric_sum_leading_ln, geometric_sum_ln, l1_to_limit,
    slice_prediction, DecayFit, ErrorCase, FitReport, GrowthParams,
};
pub use correlation::{interval_pair_count, pair_correlation, BinLayout, PairCorrelationHistogram};
pub use error::{Error, Result};
pub use generators::{jittered, log_integers, synthetic_pa, SyntheticMode, SyntheticSpec};
pub use graph::{entropy, enumerate_closed_geodesics, enumerate_orbit_distances, MetricGraph};
pub use scalar::Real;
pub use scaling::{GrowthClass, ScalingSpec};
pub use spectrum::LengthSpectrum;

pub type Spectrum = LengthSpectrum<f64>;
pub type Histogram = PairCorrelationHistogram<f64>;
pub type Params = GrowthParams<f64>;
pub type Scaling = ScalingSpec<f64>;
pub type Graph = MetricGraph<f64>;
pub type Fit = FitReport<f64>;

pub type Spectrum32 = LengthSpectrum<f32>;
pub type Histogram32 = PairCorrelationHistogram<f32>;
pub type Params32 = GrowthParams<f32>;
