//! Anisotropic differential geometry of closed hypersurfaces relative to a
//! smooth convex gauge body `B`.
//!
//! The crate computes, on sampled parametric curves and surfaces, the
//! Birkhoff normal `η = u ∘ ξ`, the Dupin metric, the Minkowski principal
//! curvatures and the support quotient `ρ = ⟨x, ξ⟩ / ⟨η, ξ⟩`; the integrals
//! `A_m = ∫⟨η, ξ⟩ dS`, the enclosed volume and the mixed volume; first and
//! second variations of `A_m` together with finite-difference oracles for
//! them; the anisotropic Laplacian `Δ_m`; and the stability spectrum of the
//! second variation on mean-zero fields.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod body;
mod error;
pub mod field;
pub mod frames;
pub mod functionals;
pub mod harmonics;
pub mod jet;
pub mod linalg;
pub mod quadrature;
pub mod real;
pub mod surface;
pub mod variation;

pub use body::{BodyReport, ConvexBody, Family, SupportHessian};
pub use error::{Error, Result};
pub use field::{ScalarField, VectorField};
pub use frames::{compute_frames, Frames, PointFrame, UmbilicityReport};
pub use functionals::{BodyVolume, FunctionalReport, IsoperimetricRow};
pub use jet::Jet;
pub use real::Real;
pub use surface::{
    make_minkowski_sphere, make_radial_graph, make_round_sphere, make_torus, sample, RadialField,
    Resolution, SampledSurface, SurfaceChart, Topology,
};
pub use variation::{
    FdEstimate, Functional, LaplacianRhoCheck, SecondVariation, SpectrumReport, StabilityCertificate,
    VariationKind, VariationSpec,
};
