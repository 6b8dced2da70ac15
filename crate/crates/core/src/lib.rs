//! Numerical laboratory for f-deformed (q-deformed) oscillators.
//!
//! The crate covers the scalar deformation calculus, truncated Fock-space
//! operator algebra, the classical q-oscillator, a deformed wave equation on
//! a periodic domain, the q-nonlinear one-level Schrödinger equation,
//! nonlinear coherent states and the thermodynamics of a single deformed
//! oscillator.
//!
//! Data-parallel loops (temperature tables, per-mode wave evolution, grid
//! sweeps) go through [`par`], which uses rayon when the `parallel` feature is
//! enabled and falls back to plain iterators otherwise.

pub mod classical;
pub mod coherent;
pub mod deformation;
pub mod error;
pub mod fock;
pub mod one_level;
pub mod par;
pub mod roots;
pub mod rk4;
pub mod thermo;
pub mod wave;

pub use error::{Error, Result};
pub use num_complex::Complex64;
