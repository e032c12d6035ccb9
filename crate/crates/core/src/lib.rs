//! Hit-problem computations in the mod-2 motivic Steenrod setting, reduced
//! modulo τ to `N_n = Λ(x_1..x_n) ⊗ F_2[y_1..y_n]`.
//!
//! Layers, bottom up: GF(2) linear algebra, monomials and degree bases, the
//! `Q_0`/`P^a` action with hit subspaces, the top-layer projection θ with its
//! parity verifiers, and exact binary arithmetic for the α/β criteria.

pub mod arithmetic;
pub mod error;
pub mod f2linalg;
pub mod monomial;
pub mod steenrod;
pub mod toplayer;

pub use error::{Error, Result};
