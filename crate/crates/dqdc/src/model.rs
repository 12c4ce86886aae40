//! Physical model of a linear chain of singlet-triplet double-quantum-dot
//! qubits.
//!
//! The only tunable control is the exchange pulse strength `J >= 0` on each
//! qubit; the x-rotation rate `h = 1` is constant and always on. A single
//! qubit evolves under `H = J sz + sx`, so the native gate is a one-piece
//! rotation `exp(-i (J sz + sx) dt)`. With `J = 0`, free evolution for a
//! duration `k pi` is the identity up to global phase; that is what makes
//! interference-free idling possible.
//!
//! Adjacent qubits pulsed simultaneously couple with strength
//! `J12 = J1 J2 / 2` through the term `(J12/2) (sz - 1)(sz - 1)`. The
//! coupling vanishes exactly whenever either pulse is zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm_neg_i_ht, kron, CMatrix, C_ONE, C_ZERO};

/// Fixed x-rotation rate (the Zeeman splitting), taken as the energy unit.
pub const H_RATE: f64 = 1.0;

/// Dense simulation capacity: chains longer than this are rejected.
pub const MAX_QUBITS: usize = 5;

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C_ONE, C_ZERO, C_ZERO, -C_ONE])
}

/// Embeds a single-qubit operator at position `qubit` of an `n`-qubit
/// register. Qubit 0 is the most significant bit of the basis index.
pub fn op_on(n: usize, qubit: usize, op: &CMatrix) -> CMatrix {
    assert!(qubit < n, "qubit {qubit} out of range for {n} qubits");
    let mut m = CMatrix::identity(1, 1);
    for q in 0..n {
        m = if q == qubit {
            kron(&m, op)
        } else {
            kron(&m, &CMatrix::identity(2, 2))
        };
    }
    m
}

/// One piecewise-constant time slice of a global pulse schedule: a duration
/// plus a per-qubit pulse that is either idle or a strength `J >= 0`.
///
/// Idle means the pulse is exactly zero *and* the qubit does not participate
/// in the adjacency exclusion rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "Option<PulseRepr>", into = "Option<PulseRepr>")]
pub enum Pulse {
    Idle,
    On(f64),
}

#[derive(Serialize, Deserialize, Clone, Copy)]
struct PulseRepr {
    #[serde(rename = "J")]
    j: f64,
}

impl From<Option<PulseRepr>> for Pulse {
    fn from(v: Option<PulseRepr>) -> Self {
        match v {
            None => Pulse::Idle,
            Some(PulseRepr { j }) => Pulse::On(j),
        }
    }
}

impl From<Pulse> for Option<PulseRepr> {
    fn from(p: Pulse) -> Self {
        match p {
            Pulse::Idle => None,
            Pulse::On(j) => Some(PulseRepr { j }),
        }
    }
}

impl Pulse {
    pub fn is_idle(&self) -> bool {
        matches!(self, Pulse::Idle)
    }

    /// Effective exchange strength: zero when idle.
    pub fn strength(&self) -> f64 {
        match self {
            Pulse::Idle => 0.0,
            Pulse::On(j) => *j,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub duration: f64,
    pub pulses: Vec<Pulse>,
}

impl PulseSegment {
    pub fn new(duration: f64, pulses: Vec<Pulse>) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::constraint(format!(
                "segment duration must be positive and finite, got {duration}"
            )));
        }
        for (q, p) in pulses.iter().enumerate() {
            if let Pulse::On(j) = p {
                if !j.is_finite() || *j < 0.0 {
                    return Err(Error::constraint(format!(
                        "pulse strength on qubit {q} must be finite and non-negative, got {j}"
                    )));
                }
            }
        }
        Ok(PulseSegment { duration, pulses })
    }

    pub fn all_idle(duration: f64, n_qubits: usize) -> Result<Self> {
        Self::new(duration, vec![Pulse::Idle; n_qubits])
    }

    pub fn n_qubits(&self) -> usize {
        self.pulses.len()
    }

    pub fn strengths(&self) -> Vec<f64> {
        self.pulses.iter().map(Pulse::strength).collect()
    }
}

/// Linear nearest-neighbor chain with `h = 1` and coupling `J12 = J1 J2 / 2`.
///
/// `j_max` is an optional soft bound: exceeding it is reported as a warning
/// by the schedule verifier, never as an error. Only non-negativity is hard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max: Option<f64>,
}

impl ChainSpec {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::validation("chain needs at least one qubit"));
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "chain of {n_qubits} qubits exceeds the {MAX_QUBITS}-qubit dense-simulation capacity"
            )));
        }
        Ok(ChainSpec { n_qubits, j_max: None })
    }

    pub fn with_j_max(mut self, j_max: f64) -> Self {
        self.j_max = Some(j_max);
        self
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }
}

/// Precomputed operator tables for one chain length, shared by every segment
/// of a schedule so the Hamiltonian assembly stays cheap in training loops.
pub struct ChainOperators {
    n: usize,
    /// sz on qubit i.
    z_ops: Vec<CMatrix>,
    /// Sum of sx over all qubits (the always-on drift).
    x_total: CMatrix,
    /// (sz - 1) on qubit i times (sz - 1) on qubit i+1.
    couplers: Vec<CMatrix>,
}

impl ChainOperators {
    pub fn new(spec: &ChainSpec) -> Self {
        let n = spec.n_qubits;
        let z_ops: Vec<CMatrix> = (0..n).map(|q| op_on(n, q, &sigma_z())).collect();
        let mut x_total = CMatrix::zeros(1 << n, 1 << n);
        for q in 0..n {
            x_total += op_on(n, q, &sigma_x());
        }
        let zm1 = sigma_z() - CMatrix::identity(2, 2);
        let couplers: Vec<CMatrix> = (0..n.saturating_sub(1))
            .map(|q| {
                let a = op_on(n, q, &zm1);
                let b = op_on(n, q + 1, &zm1);
                a * b
            })
            .collect();
        ChainOperators { n, z_ops, x_total, couplers }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// `sum_i J_i sz_i + sx_i  +  sum_i (J_i J_{i+1} / 4) (sz-1)_i (sz-1)_{i+1}`.
    pub fn hamiltonian(&self, js: &[f64]) -> Result<CMatrix> {
        if js.len() != self.n {
            return Err(Error::shape(format!(
                "expected {} pulse strengths, got {}",
                self.n,
                js.len()
            )));
        }
        for (q, &j) in js.iter().enumerate() {
            if !j.is_finite() || j < 0.0 {
                return Err(Error::constraint(format!(
                    "pulse strength on qubit {q} must be finite and non-negative, got {j}"
                )));
            }
        }
        let mut h = self.x_total.clone();
        for (q, &j) in js.iter().enumerate() {
            if j != 0.0 {
                h += &self.z_ops[q] * num_complex::Complex64::new(j, 0.0);
            }
        }
        for (q, coupler) in self.couplers.iter().enumerate() {
            let j12 = js[q] * js[q + 1] / 2.0;
            if j12 != 0.0 {
                h += coupler * num_complex::Complex64::new(j12 / 2.0, 0.0);
            }
        }
        Ok(h)
    }

    /// Derivative of [`Self::hamiltonian`] with respect to the pulse on one
    /// qubit: `sz_q` plus the coupling contribution `(J_neighbor / 4) *
    /// (sz-1)_q (sz-1)_neighbor` from each pulsed neighbor.
    pub fn hamiltonian_derivative(&self, js: &[f64], qubit: usize) -> Result<CMatrix> {
        if js.len() != self.n {
            return Err(Error::shape(format!(
                "expected {} pulse strengths, got {}",
                self.n,
                js.len()
            )));
        }
        if qubit >= self.n {
            return Err(Error::shape(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n
            )));
        }
        let mut dh = self.z_ops[qubit].clone();
        if qubit > 0 && js[qubit - 1] != 0.0 {
            dh += &self.couplers[qubit - 1] * num_complex::Complex64::new(js[qubit - 1] / 4.0, 0.0);
        }
        if qubit + 1 < self.n && js[qubit + 1] != 0.0 {
            dh += &self.couplers[qubit] * num_complex::Complex64::new(js[qubit + 1] / 4.0, 0.0);
        }
        Ok(dh)
    }
}

/// Single-qubit Hamiltonian `J sz + sx`.
pub fn h1q(j: f64) -> Result<CMatrix> {
    if !j.is_finite() || j < 0.0 {
        return Err(Error::constraint(format!(
            "exchange strength must be finite and non-negative, got {j}"
        )));
    }
    Ok(sigma_z() * num_complex::Complex64::new(j, 0.0) + sigma_x())
}

/// The native gate: a one-piece rotation `exp(-i (J sz + sx) dt)` around the
/// axis `Jz + x`.
pub fn native_1q(j: f64, dt: f64) -> Result<CMatrix> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::constraint(format!(
            "native gate duration must be positive, got {dt}"
        )));
    }
    expm_neg_i_ht(&h1q(j)?, dt)
}

/// Two-qubit Hamiltonian
/// `J1 sz x I + J2 I x sz + sx x I + I x sx + (J12/2) (sz-1) x (sz-1)`
/// with `J12 = J1 J2 / 2`.
pub fn h2q(j1: f64, j2: f64) -> Result<CMatrix> {
    let spec = ChainSpec::new(2)?;
    ChainOperators::new(&spec).hamiltonian(&[j1, j2])
}

/// n-qubit chain Hamiltonian with nearest-neighbor coupling.
pub fn chain_hamiltonian(js: &[f64], spec: &ChainSpec) -> Result<CMatrix> {
    ChainOperators::new(spec).hamiltonian(js)
}

/// Exact propagator of one piecewise-constant segment.
pub fn segment_propagator(seg: &PulseSegment, spec: &ChainSpec) -> Result<CMatrix> {
    if seg.n_qubits() != spec.n_qubits {
        return Err(Error::shape(format!(
            "segment covers {} qubits, chain has {}",
            seg.n_qubits(),
            spec.n_qubits
        )));
    }
    let h = chain_hamiltonian(&seg.strengths(), spec)?;
    expm_neg_i_ht(&h, seg.duration)
}
