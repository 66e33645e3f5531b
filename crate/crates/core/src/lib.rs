//! Exact mod-p homology of unordered configuration spaces of R^n.
//!
//! The crate materializes the bigraded algebras `H_*(Conf(R^n); F_p)`,
//! verifies stability ranges by brute-force monomial enumeration, and
//! certifies Browder bracket vanishing with replayable rewrite traces.

pub mod algebra;
pub mod basis;
pub mod browder;
pub mod cli;
pub mod error;
pub mod stability;
pub mod words;

pub use algebra::{Bidegree, Family, GenName, Generator, GeneratorSet, Monomial, Parity, Polynomial, Prime};
pub use error::{Error, Result};
