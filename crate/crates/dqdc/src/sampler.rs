//! Random pure states used as training and validation data.
//!
//! Single-qubit states come from a U3 circuit (Rz-Ry-Rz) acting on |0>; the
//! third Euler angle only moves the global phase on that input but is kept
//! so the generator matches the circuit definition. Two-qubit states come
//! from a Schmidt-form generator (Ry on qubit 0, CX, local U3 on each
//! qubit), which reaches every two-qubit pure state up to global phase as
//! the angles vary. Angles are drawn uniformly; training only needs diverse
//! states, not Haar-exact ones.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix, CVector, StateVector, C_ONE, C_ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Train,
    Validation,
}

/// A reproducible batch of normalized states.
#[derive(Debug, Clone)]
pub struct StateSet {
    pub states: Vec<StateVector>,
    pub seed: u64,
    pub role: Role,
}

impl StateSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn rz(angle: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::from_polar(1.0, -angle / 2.0),
            C_ZERO,
            C_ZERO,
            Complex64::from_polar(1.0, angle / 2.0),
        ],
    )
}

fn ry(angle: f64) -> CMatrix {
    let (s, c) = (angle / 2.0).sin_cos();
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
    )
}

fn u3(theta: f64, phi: f64, lambda: f64) -> CMatrix {
    rz(phi) * ry(theta) * rz(lambda)
}

/// CX with qubit 0 (most significant bit) as control.
fn cx_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = C_ONE;
    m[(1, 1)] = C_ONE;
    m[(2, 3)] = C_ONE;
    m[(3, 2)] = C_ONE;
    m
}

/// `U3(theta, phi, lambda) |0>`: `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`
/// up to a global phase contributed by `lambda`.
pub fn u3_state(theta: f64, phi: f64, lambda: f64) -> StateVector {
    let col = u3(theta, phi, lambda) * CVector::from_row_slice(&[C_ONE, C_ZERO]);
    StateVector::new(col).expect("U3 column is normalized")
}

/// Schmidt-form two-qubit generator: `|00>`, Ry(theta_s) on qubit 0, CX, then
/// local U3 rotations. Spans all two-qubit pure states up to global phase.
pub fn two_qubit_state(
    theta_s: f64,
    local0: (f64, f64, f64),
    local1: (f64, f64, f64),
) -> StateVector {
    let mut amps = CVector::zeros(4);
    amps[0] = C_ONE;
    let entangler = cx_matrix() * kron(&ry(theta_s), &CMatrix::identity(2, 2));
    let locals = kron(
        &u3(local0.0, local0.1, local0.2),
        &u3(local1.0, local1.1, local1.2),
    );
    StateVector::new(locals * entangler * amps).expect("generator preserves the norm")
}

fn draw_single(rng: &mut ChaCha8Rng) -> StateVector {
    let theta = rng.random_range(0.0..=PI);
    let phi = rng.random_range(0.0..2.0 * PI);
    let lambda = rng.random_range(0.0..2.0 * PI);
    u3_state(theta, phi, lambda)
}

fn draw_double(rng: &mut ChaCha8Rng) -> StateVector {
    let theta_s = rng.random_range(0.0..=PI);
    let mut local = || {
        (
            rng.random_range(0.0..=PI),
            rng.random_range(0.0..2.0 * PI),
            rng.random_range(0.0..2.0 * PI),
        )
    };
    let l0 = local();
    let l1 = local();
    two_qubit_state(theta_s, l0, l1)
}

/// Deterministic train/validation sets from disjoint streams of one seed.
pub fn sample_sets(
    n_qubits: usize,
    n_train: usize,
    n_val: usize,
    seed: u64,
) -> Result<(StateSet, StateSet)> {
    if !(n_qubits == 1 || n_qubits == 2) {
        return Err(Error::validation(format!(
            "state sampler supports 1 or 2 qubits, got {n_qubits}"
        )));
    }
    if n_train == 0 || n_val == 0 {
        return Err(Error::validation("state set sizes must be positive"));
    }
    let draw = |role: Role, stream: u64, count: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let states = (0..count)
            .map(|_| {
                if n_qubits == 1 {
                    draw_single(&mut rng)
                } else {
                    draw_double(&mut rng)
                }
            })
            .collect();
        StateSet { states, seed, role }
    };
    Ok((draw(Role::Train, 0, n_train), draw(Role::Validation, 1, n_val)))
}
