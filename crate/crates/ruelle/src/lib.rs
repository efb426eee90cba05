//! Numerical thermodynamic formalism on discretized compact alphabets.
//!
//! The crate covers the transfer-operator side (Ruelle-Perron-Frobenius
//! eigendata, pressure, spectral projectors, analyticity certificates,
//! Walters-regularity audits, correlation decay fits) and the exact
//! statistical-mechanics side (finite-volume long-range Ising measures with
//! `+1` boundary and GKS inequality audits).

pub mod alphabet;
pub mod calculus;
pub mod correlations;
pub mod cylinder;
pub mod error;
pub mod ising;
pub mod numeric;
pub mod potential;
pub mod regularity;
pub mod spectral;
pub mod transfer;

pub use alphabet::{AlphabetKind, AprioriAlphabet, PointSeq};
pub use cylinder::DepthFunction;
pub use error::{Error, Result};
pub use potential::{birkhoff_sum, Potential, PotentialFamily};
pub use transfer::{RpfData, TransferMatrix};
