//! Affine fractal functions on an interval.

pub mod chaos;
pub mod cli;
pub mod dimension;
pub mod error;
pub mod eval;
pub mod grid;
pub mod histo;
pub mod io;
pub mod linsolve;
pub mod moments;
pub mod poly;
pub mod quad;
pub mod system;
pub mod transform;
pub mod validate;

pub use chaos::{chaos_game, ChaosPoints};
pub use dimension::{minkowski_dimension, minkowski_report, DimensionReport};
pub use error::{FracError, Result};
pub use eval::{eval_at, sup_bound, Address, EvalResult};
pub use grid::{
    collage_bound, grid_residual, rb_apply, rb_iterate, sample_grid, self_residual, CollageBound,
    SampleRow, SampleSet,
};
pub use histo::{
    areas, check_alpha_fractal, cumulative_data, histospline, solve_continuous, solve_offsets,
    solve_scales, AlphaFractalCheck, Diagnostics, HistoSolution, Histogram,
};
pub use moments::{
    aitken, assemble_profile, moment_oracle, moment_oracle_extrapolated, moments, MomentMethod,
    MomentTable, MOMENT_CAP,
};
pub use poly::{PiecewisePolynomial, Polynomial};
pub use system::*;
pub use validate::{validate, validate_against, Variant, VariantReport};
pub use transform::{
    fourier_partial_sum, panel_transform, profile_transform, transform, transform_residual,
    TransformKind, TransformMethod, TransformValue,
};
