//! Traveling fronts of local and nonlocal reaction-diffusion equations and of
//! viscous-dispersive conservation laws.
//!
//! The crate is organized bottom-up: [`levy_ops`] applies Riesz-Feller,
//! Caputo and convolution operators, [`heat_kernel`] computes the stable
//! densities they generate, [`shock_classify`] sorts shock triples and
//! reaction terms, [`phase_plane`] solves local traveling-wave ODEs by
//! shooting, and [`front_evolution`] handles nonlocal problems by time
//! evolution or by marching the fractional traveling-wave equation.

// NaN must fail validation, so `!(x > 0.0)` is used on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod front_evolution;
pub mod grid;
pub mod heat_kernel;
pub mod levy_ops;
pub mod nonlinearity;
pub mod ode;
pub mod phase_plane;
pub mod quadrature;
pub mod shock_classify;
pub mod spectral;

pub use error::{FrontError, Result};
pub use grid::ProfileGrid;
pub use levy_ops::{KernelSpec, RieszFellerParams};
pub use nonlinearity::{FluxSpec, ReactionSpec};
pub use phase_plane::TWSResult;
pub use shock_classify::{ReactionClass, ShockClass, ShockTriple};
