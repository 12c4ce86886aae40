//! Pulse-level compiler and exact simulator for linear chains of
//! singlet-triplet double-quantum-dot qubits.
//!
//! The toolkit translates logical gates and circuits into fixed-length,
//! constraint-respecting electrical pulse schedules:
//!
//! - [`linalg`]: dense complex kernel with exact Hermitian-generator matrix
//!   exponentials and their parameter derivatives.
//! - [`model`]: chain Hamiltonians, the native gate, and free-evolution
//!   identities under the hardware control constraints.
//! - [`ansatz`]: fixed-structure parametric native-gate sequences and their
//!   adjoint differentiation.
//! - [`sampler`]: reproducible random-state training data.
//! - [`trainer`]: loss, gradients, projected Adam, validation and stopping.
//! - [`library`]: compiling, persisting and retrieving the standard gate set
//!   as reusable fixed-duration pulse blocks.
//! - [`scheduler`]: laying out circuits as global pulse schedules that keep
//!   adjacent qubits interference-free.
//! - [`executor`]: exact reference simulation of scheduled pulse programs.
//! - [`demos`]: end-to-end Grover search (static compilation) and
//!   multi-basis-encoding Max-Cut (dynamic compilation).

pub mod ansatz;
pub mod demos;
pub mod error;
pub mod executor;
pub mod library;
pub mod linalg;
pub mod model;
pub mod sampler;
pub mod scheduler;
pub mod trainer;

pub use error::{Error, Result};
