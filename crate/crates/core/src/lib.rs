//! Certification of bosonic nonclassicality from a handful of Fock-basis
//! expectation values (photon-number probabilities and coherences).
//!
//! A state is classical when it is a mixture of coherent states. Given the
//! measured values of a few observables, the crate decides whether some
//! classical state reproduces them, and if not returns a separating
//! hyperplane (a [`support::Certificate`]). It also models how beamsplitter
//! loss and thermal noise erase that certifiability.
//!
//! Modules:
//! - [`fock`]: observables, truncated density matrices, the coherent-state model
//! - [`hull`]: closed-form classical and quantum boundaries in small spaces
//! - [`support`]: support functions of the classical and quantum sets and the
//!   certificate search
//! - [`channels`]: attenuation and thermal-noise channels
//! - [`certify`]: classification pipeline, thresholds and region maps
//! - [`cli`]: the `cohwit` command-line front end

pub mod certify;
pub mod channels;
pub mod cli;
pub mod error;
pub mod fock;
pub mod hull;
pub(crate) mod minnorm;
pub mod quadrature;
pub mod support;

pub use error::{Error, Result};
pub use fock::{
    coherent_expectation, expectation, make_superposition, observable_matrix, poisson_prob,
    CoherentParams, DensityMatrix, ExpectationVector, ObservableId, ObservableSpace,
};
