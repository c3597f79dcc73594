//! Radial finite elements for `−Δu = λu + μ|u|^{2*−2}u + θ u log u²` on the
//! unit ball with zero Dirichlet data, `N ∈ {3, 4, 5}`, `μ > 0 > θ`.
//!
//! The crate is driven through its examples:
//!
//! | example | capability |
//! |---|---|
//! | `grid_and_eigenvalue` | graded grid, first Dirichlet eigenvalue and its refinement order |
//! | `energy_functional` | energy, gradient and the logarithmic/power inequalities |
//! | `parameter_regions` | Sobolev constant, region classification and ball radius |
//! | `bubble_rates` | truncated bubbles and the `ε`-rate regression |
//! | `local_minimum` | negative-energy local minimiser in the ball |
//! | `sup_scan` | line scan of `J(u₀+βψ_ε)` against the compactness threshold |
//! | `mountain_pass` | path deformation to the second critical point |
//! | `verification_report` | the full check table written as JSON |
//!
//! The `bnlog` binary exposes the same pipeline as `classify`, `bubbles`,
//! `solve` and `verify` subcommands.

pub mod bubbles;
pub mod cli;
pub mod constants;
pub mod error;
pub mod functional;
pub mod quadrature;
pub mod radial;
pub mod report;
pub mod solvers;

pub use error::{Error, Result};
pub use functional::ProblemParams;
pub use radial::{build_grid, RadialField, RadialGrid};
