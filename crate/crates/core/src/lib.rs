//! Numerical toolkit for the random-coding approach to quantum channel capacity.
//!
//! The crate is organised bottom-up:
//!
//! * [`matrix`] holds the dense complex linear algebra (Kronecker products,
//!   partial traces, Hermitian eigendecomposition, norms, entropies, fidelity)
//!   and the Haar sampler.
//! * [`channels`] represents completely positive maps as Kraus families and
//!   computes their information quantities.
//! * [`code_fidelity`] evaluates the computable lower bound on the
//!   recovery-optimised entanglement fidelity of a code, in both its Kraus
//!   and its state form.
//! * [`random_coding`] averages that bound over Haar-random codes, both by
//!   Monte Carlo and in closed form.
//! * [`typicality`] builds typical sequences, typical subspaces and the
//!   reduced block channels used to reach rates up to the coherent
//!   information.
//!
//! [`recovery`] contains explicit recovery maps used only as witnesses when
//! testing the bounds, and [`montecarlo`] the seeded, thread-count
//! independent estimator machinery.

pub mod channels;
pub mod code_fidelity;
pub mod error;
pub mod matrix;
pub mod montecarlo;
pub mod random_coding;
pub mod recovery;
pub mod typicality;

pub use channels::{ChannelInfoReport, KrausChannel};
pub use code_fidelity::{BoundReport, CodeSubspace};
pub use error::{Error, ErrorKind, Result};
pub use matrix::{ComplexMatrix, DensityOperator, Limits, ProbabilityDistribution, C64};
pub use montecarlo::{EnsembleEstimate, EnsembleSpec};
