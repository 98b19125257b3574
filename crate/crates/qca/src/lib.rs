//! Simulation engine for three models of quantum cellular automata on
//! finite periodic qubit lattices, plus compilers between them and a
//! numerical checker for the global-dynamics axioms.
//!
//! # Models
//!
//! * [`mqca`] — block-partitioned automata: two staggered tilings, one
//!   block unitary per tiling.
//! * [`cqca`] — coloured automata: a periodic proper colouring whose
//!   colour classes receive neighbour-conditioned single-site gates.
//! * [`ctqca`] — continuous-time automata: nearest-neighbour coupling
//!   Hamiltonians keyed by colour pairs, evolved exactly or by product
//!   formulas.
//! * [`classical`] — elementary cellular automata and the embedding of
//!   reversible block rules as permutation-unitary block automata.
//!
//! # Conventions
//!
//! The site with canonical linear index `i` occupies bit `i` of the
//! basis index, so basis labels read |b_{N−1} … b_1 b_0⟩ and the
//! bitstring "10" on two sites is index 2. Gate and coupling matrices
//! are row-major with the first listed site as the most significant bit.
//! Continuous evolution uses e^{−iHt} with ħ = 1.
//!
//! Everything is generic over the scalar via [`scalar::Float`]; the
//! crate root re-exports `f64` aliases for the common case.

pub mod classical;
pub mod cqca;
pub mod ctqca;
pub mod density;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod mqca;
pub mod scalar;
pub mod state;
pub mod transpile;
pub mod unitary;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{Lattice, NeighbourhoodScheme, SiteIndex};

/// State vector over `f64`.
pub type StateVector64 = state::StateVector<f64>;
/// Density matrix over `f64`.
pub type DensityMatrix64 = density::DensityMatrix<f64>;
/// Local unitary over `f64`.
pub type LocalUnitary64 = unitary::LocalUnitary<f64>;
/// Block-partitioned model over `f64`.
pub type MargolusQCA64 = mqca::MargolusQCA<f64>;
/// Coloured model over `f64`.
pub type ColouredQCA64 = cqca::ColouredQCA<f64>;
/// Continuous-time model over `f64`.
pub type ContinuousQCA64 = ctqca::ContinuousQCA<f64>;
/// Dense complex matrix over `f64`.
pub type CMatrix64 = linalg::CMatrix<f64>;
