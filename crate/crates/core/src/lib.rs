//! Exact loss means and variances for parametrized matchgate circuits.
//!
//! The crate is organised bottom-up: [`pauli`] strings, the Jordan–Wigner
//! [`majorana`] dictionary, sparse [`operator`]s, their [`modules`]
//! decomposition, Lie-algebraic machinery in [`dla`], the [`variance`]
//! formulas with a dense Weingarten oracle, fermionic contraction matrices in
//! [`fermion`], and a Monte-Carlo [`circuit`] simulator.
//! Named benchmark inputs live in [`states`].

pub mod circuit;
pub mod combinatorics;
pub mod dense;
pub mod dla;
pub mod error;
pub mod fermion;
pub mod majorana;
pub mod modules;
pub mod operator;
pub mod pauli;
pub mod states;
pub mod variance;

pub use error::{BpError, Result};
pub use majorana::{MajoranaMonomial, ScaledMonomial};
pub use operator::PauliSumOperator;
pub use pauli::{Pauli1, PauliTerm};
