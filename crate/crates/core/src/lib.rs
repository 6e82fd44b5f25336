//! Gaussian matter-wave optics: free evolution of pure and partially coherent
//! packets, their covariance matrices and Gouy phase, an independent
//! grid-based numerical oracle, and the slit-width analysis used to infer the
//! transverse coherence of a molecular beam.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coherence;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod oracle;
pub mod params;
pub mod quadrature;

pub use coherence::{DetectorSpec, IntensityProfile, Kernel, MixedState};
pub use error::{Error, Result};
pub use gaussian::{OpticalBeam, PureEvolution};
pub use params::{CoherenceSpec, CovarianceMatrix, Dim, PacketParams, Particle, PhysicalConstants};
