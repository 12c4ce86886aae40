//! Two-qubit Grover search for the target item `11`, compiled statically:
//! one Hadamard transform followed by one Grover iteration (oracle, then
//! amplitude flip about the mean). The oracle for `|11>` is a bare CZ; the
//! flip operator is realized as H,H / X,X / CZ / X,X / H,H, which equals
//! `2|s><s| - 1` up to global phase.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::executor::{basis_label, execute, measure_distribution};
use crate::library::GateLibrary;
use crate::linalg::StateVector;
use crate::scheduler::{schedule, CircuitIR, CircuitOp, Schedule};

/// Reference circuit: Hadamard transform, oracle CZ, then the flip operator.
pub fn grover_reference_ir() -> CircuitIR {
    let ops = vec![
        // Hadamard transform
        CircuitOp::new("H", &[0]),
        CircuitOp::new("H", &[1]),
        // Oracle U_w = diag(1,1,1,-1)
        CircuitOp::new("CZ", &[0, 1]),
        // Flip operator U_s
        CircuitOp::new("H", &[0]),
        CircuitOp::new("H", &[1]),
        CircuitOp::new("X", &[0]),
        CircuitOp::new("X", &[1]),
        CircuitOp::new("CZ", &[0, 1]),
        CircuitOp::new("X", &[0]),
        CircuitOp::new("X", &[1]),
        CircuitOp::new("H", &[0]),
        CircuitOp::new("H", &[1]),
    ];
    CircuitIR::new(2, ops).expect("reference circuit is valid")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroverReport {
    pub seed: u64,
    pub makespan: f64,
    pub n_slots: usize,
    /// (basis string, probability) in index order.
    pub distribution: Vec<(String, f64)>,
    pub p_target: f64,
    pub top_outcome: String,
    #[serde(skip)]
    pub schedule: Option<Schedule>,
}

/// Schedules the reference circuit from the library, executes it from
/// `|00>` and reports the measurement distribution. Nothing here is random;
/// the seed is carried through for bookkeeping.
pub fn grover_demo(lib: &GateLibrary, seed: u64) -> Result<GroverReport> {
    let ir = grover_reference_ir();
    let sched = schedule(&ir, lib)?;
    let result = execute(&sched, &StateVector::basis(2, 0))?;
    let probs = measure_distribution(&result.final_state);
    let distribution: Vec<(String, f64)> = probs
        .iter()
        .enumerate()
        .map(|(i, p)| (basis_label(2, i), *p))
        .collect();
    let (top_idx, _) = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("distribution is non-empty");
    let n_slots = (sched.makespan / sched.slot_duration).round() as usize;
    Ok(GroverReport {
        seed,
        makespan: sched.makespan,
        n_slots,
        p_target: probs[3],
        top_outcome: basis_label(2, top_idx),
        distribution,
        schedule: Some(sched),
    })
}
