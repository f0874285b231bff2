//! Superradiance of a Rydberg-atom array in a dissipative microwave cavity.
//!
//! The crate builds the atom–cavity Hamiltonians of a one-dimensional array
//! with resonant dipole and van der Waals interactions, finds steady states
//! in the self-consistent mean-field approximation and by integrating the
//! Lindblad master equation, and provides the collective-state machinery
//! (symmetric states, sector diagonalization, emergent Rabi models) that
//! explains where the critical coupling vanishes.

pub mod collective;
pub mod error;
pub mod hamiltonians;
pub mod lindblad;
pub mod linalg;
pub mod operators;
pub mod steady_state;

pub use error::{Error, Result};
