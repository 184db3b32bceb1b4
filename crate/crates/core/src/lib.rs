//! Exact solver for the Kittel–Shore model (Heisenberg exchange on the
//! complete graph) and its quantum-group deformation built from the
//! `U_q(su(2))` coproduct.
//!
//! The crate is organised bottom-up:
//!
//! * [`qarith`]: q-numbers, q-factorials and binomials.
//! * [`rep`]: single-site spin-j matrices for the classical and deformed algebras.
//! * [`coalgebra`]: Kronecker embedding and N-fold (deformed) coproducts.
//! * [`hamiltonian`]: matrix assembly by two independent routes.
//! * [`spectrum`]: closed-form spectrum with multiplicities, plus a dense oracle.
//! * [`qcg`]: q-Clebsch–Gordan coefficients and the coupled eigenbasis.
//! * [`thermo`]: log-domain partition function and fluctuation observables.
//! * [`curie`]: Curie-temperature estimators and reference formulas.

pub mod coalgebra;
pub mod curie;
pub mod error;
pub mod half;
pub mod hamiltonian;
pub mod matrix;
pub mod qarith;
pub mod qcg;
pub mod rep;
pub mod spectrum;
pub mod thermo;

pub use error::{Error, Result};
pub use half::HalfInt;
pub use hamiltonian::{ModelConfig, Scaling};
pub use matrix::OperatorMatrix;
pub use qarith::DeformationParam;
