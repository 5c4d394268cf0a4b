//! Pseudo-spectral simulation and verification of massless nonlinear Dirac
//! equations in two and three space dimensions.
//!
//! The crate covers the cubic Soler-type model `-iγ^μ∂_μψ = (ψ*Hψ)Fψ` in 2D
//! and 3D and the quadratic model `-iγ^μ∂_μψ = (ψ*γ⁰ψ)e` in 3D:
//!
//! - [`clifford`]: Dirac matrices, radial null projectors, admissible models.
//! - [`grid`]: periodic grids, spinor fields, unitary FFTs, spectral
//!   derivatives, weighted norms and the binary snapshot format.
//! - [`initial_data`]: the large-data family `(ϕ_ε + εϕ)/‖ϕ_ε + εϕ‖` and
//!   audits of its weighted norms.
//! - [`evolution`]: exact free propagator, pointwise nonlinear flow, Strang
//!   splitting and a method-of-lines RK4 reference integrator.
//! - [`diagnostics`]: vector fields, ghost-weight energies, light-cone
//!   weighted sup-norms, decay fits and inequality audits.
//! - [`scattering`]: free pull-back of the solution and Cauchy-rate fits.
//! - [`runner`]: configuration files, run directories, checkpoint/resume.
//!
//! Spatial indices are 1-based throughout (`a ∈ 1..=d`) so that `gamma[a]`
//! is `γᵃ` and `gamma[0]` is `γ⁰`.

pub mod clifford;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod initial_data;
pub mod reduce;
pub mod runner;
pub mod scattering;

pub use num_complex::Complex64 as C64;

pub use clifford::{build_gamma, CliffordRep, Matrix, ModelSpec};
pub use error::{Error, Result};
pub use grid::{Grid, SpectralField, SpinorField};
