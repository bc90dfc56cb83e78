//! Digital quantum simulator engine built around auxiliary control qubits.
//!
//! The engine models coherent many-body interactions and engineered
//! dissipation as stroboscopic gate sequences: a control qubit is
//! entangled with a group of system spins, manipulated, disentangled and
//! finally pumped back to |0>. Sweeping such steps over a lattice
//! realizes a master equation in Lindblad form.
//!
//! The crate ships three numerical experiments on top of the engine:
//! cooling of the toric code (with an optional gate-error model), ground
//! state cooling of a 3D U(1) lattice gauge theory at the
//! Rokhsar-Kivelson point, and a Trotterized adiabatic ramp away from
//! that point. See the `examples/` directory for runnable entry points
//! and the `cli` module for the batch front end.

pub mod channels;
pub mod cli;
pub mod dense;
pub mod error;
pub mod gates;
pub mod gauge;
pub mod lattice;
pub mod pauli;
pub mod rydphys;
pub mod statevec;
pub mod toric;
pub mod verify;

pub(crate) mod testutil;

pub use error::{Error, Result};
