//! Toolkit for second-order divergence-form operators −∇·μ∇ with mixed
//! (Dirichlet / Neumann / Robin) boundary conditions on nonsmooth polyhedral
//! domains.
//!
//! The library is organized around the analytical pipeline such operators
//! admit on domains whose boundary is everywhere locally equivalent, via
//! volume-preserving bi-Lipschitz charts, to one of three half-cube model
//! configurations:
//!
//! - [`geometry`] — model sets, piecewise-affine charts, atlas validation,
//!   and the explicit chart constructions (the half-plate unfolding composite
//!   and the crossing-beams corner charts);
//! - [`coeff`] — piecewise-constant symmetric elliptic coefficient tensors,
//!   their pushforward under charts, and the even/odd reflection;
//! - [`mesh`] / [`fe`] — simplicial meshes with labeled boundary facets and
//!   P1 assembly of stiffness, mass, and boundary-mass operators together
//!   with trace and adjoint-trace maps;
//! - [`spectral`] — discrete operator calculus for the symmetric pair
//!   (A₀+Q, M): resolvents, eigendecomposition, the resolvent-integral
//!   inverse square root, heat kernels, imaginary powers, and the
//!   verification checks built on them;
//! - [`quasi`] — semi-implicit time stepping of quasilinear problems
//!   (F(u))′ − ∇·G(u)μ∇u = R in the reformulated shape u′ + B(u)u = S(t,u);
//! - [`nonlin`] — the catalog of concrete nonlinearities (Fermi–Dirac
//!   statistics, nonlocal coefficients, piecewise-in-time reactions,
//!   thermistor-type Joule heating);
//! - [`report`] — deterministic CSV reports and run manifests.
//!
//! All randomized sampling flows from explicit seeds; repeated runs with the
//! same seed produce byte-identical report bodies.

pub mod coeff;
pub mod error;
pub mod fe;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod nonlin;
pub mod quasi;
pub mod report;
pub mod sampling;
pub mod spectral;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
