//! Multipatch discontinuous-Galerkin isogeometric solver for the
//! fourth-order surface equation `Δ²u + u = f` on NURBS surfaces in R³.
//!
//! The computational domain is a union of non-overlapping NURBS patches.
//! Each patch carries a tensor-product B-spline solution space; the spaces
//! are coupled across patch interfaces (and boundary conditions are imposed
//! weakly) by interior-penalty facet terms with symmetrization parameters
//! `β₀, β₁ ∈ {−1, +1}`, giving the SIPG / NIPG / SSIPG1 / SSIPG2 variants.
//!
//! Module map:
//! - [`splines`]: univariate and tensor NURBS evaluation with derivatives up
//!   to order 3, plus knot insertion.
//! - [`geometry`]: surface patches and the pullback differential operators
//!   (tangential gradient, Laplace–Beltrami, its surface gradient).
//! - [`multipatch`]: patch topology, facet enumeration, dyadic mesh
//!   refinement and mesh sizes.
//! - [`quadrature`]: Gauss–Legendre rules.
//! - [`space`]: the discontinuous multipatch solution space and discrete
//!   functions.
//! - [`assembly`]: the dG bilinear/linear forms for all four variants.
//! - [`sparse`]/[`solve`]: CSR storage and the sparse direct solve.
//! - [`norms`]: broken-norm error measurement and convergence rates.
//! - [`harness`]: benchmark registry, manufactured solutions, refinement
//!   sweeps and reporting.

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod multipatch;
pub mod norms;
pub mod quadrature;
pub mod solve;
pub mod space;
pub mod sparse;
pub mod splines;

pub use error::{Error, Result};

/// Scalar type the solver is generic over (`f32` or `f64`).
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: num_traits::Float
        + num_traits::FloatConst
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + num_traits::NumAssign
        + std::iter::Sum
        + std::fmt::Debug
        + std::fmt::Display
        + std::fmt::LowerExp
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must convert to the scalar type")
}

// Concrete f64 aliases for the main public types.
pub type KnotVector64 = splines::KnotVector<f64>;
pub type NurbsPatch64 = geometry::NurbsPatch<f64>;
pub type MultipatchSurface64 = multipatch::MultipatchSurface<f64>;
pub type MeshLevel64 = multipatch::MeshLevel<f64>;
pub type DgSpace64 = space::DgSpace<f64>;
pub type DiscreteFunction64 = space::DiscreteFunction<f64>;
pub type MethodConfig64 = assembly::MethodConfig<f64>;
pub type AssembledSystem64 = assembly::AssembledSystem<f64>;
pub type ErrorReport64 = norms::ErrorReport<f64>;
