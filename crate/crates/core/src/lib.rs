//! Symmetric atomic probability measures on the circle `R/Z` whose
//! autoconvolution is nearly flat.
//!
//! Measures live on the grid `{k/n}` for odd `n`, carry integer atom counts,
//! and every quantity that can be exact (autoconvolution weights, flatness
//! deviations, step densities and their autoconvolutions, Hausdorff
//! distances) is computed in exact rational arithmetic. Floating point is
//! used for Fourier coefficients, probability bounds and as an accelerator
//! that is always validated against the exact path.
//!
//! Modules:
//! - [`grid_measure`]: grids, symmetric counts, autoconvolution, Fourier coefficients.
//! - [`construct`]: randomized sampling and the rejection loop.
//! - [`density`]: step densities and their piecewise-linear autoconvolution.
//! - [`metrics`]: sum-form Hausdorff distance, measure and density metrics, covers.
//! - [`concentration`]: binomial tail, Azuma bound and the pair-count martingale.

pub mod concentration;
pub mod construct;
pub mod density;
mod error;
pub mod grid_measure;
pub mod metrics;
pub mod rational;
pub mod rng;

pub use concentration::{
    azuma_bound, binomial_tail_bound, deviation_tail_experiment, increment_sequence,
    telescoping_identity_check, MartingalePath, TailConfig, TailExperiment,
};
pub use construct::{
    check_trial, choose_m, construct, multiplicity_max, sample_points, ConstructionParams, Phi,
    TrialReport,
};
pub use density::{
    autoconvolve_density, build_step_density, sup_deviation_from_one, sup_norm_difference,
    PiecewiseLinearPeriodic, StepDensity,
};
pub use error::{Error, Result};
pub use grid_measure::{
    autoconvolve, autoconvolve_fast, fourier_coefficient, max_flatness_deviation,
    max_flatness_deviation_off_origin, AtomVector,
    GridSpec, SymmetricCounts,
};
pub use metrics::{
    box_dimension_estimate, covering_check, density_distance, hausdorff_distance,
    measure_distance, DensityDistance, FiniteSymmetricSet, IntervalCover, MeasureDistance,
};
pub use rational::Rational;
