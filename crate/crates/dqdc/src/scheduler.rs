//! Layout of logical circuits as global pulse schedules.
//!
//! The layout rule set keeps the chain interference-free: every logical gate
//! occupies a uniform 6 pi slot, adjacent qubits are never pulsed in the
//! same slot by different logical operations, and every idle stretch of a
//! qubit is an integer multiple of pi so free evolution returns it to its
//! original state. Placement is greedy: operations are processed in circuit
//! order and land in the earliest slot where their qubits are free, no
//! neighboring qubit is pulsed, and all predecessors on shared qubits have
//! finished.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::ansatz::{
    is_pi_multiple, standard_single_qubit_ansatz, two_qubit_ansatz, BoundSegment,
};
use crate::error::{Error, Result};
use crate::library::{GateLibrary, GATE_RUNTIME};
use crate::model::{Pulse, PulseSegment};

/// One logical operation. `params` inlines pulse strengths for dynamic slots
/// trained in place (the op is then realized by the standard template of its
/// arity instead of a library lookup).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitOp {
    pub gate: String,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<f64>>,
}

impl CircuitOp {
    pub fn new(gate: impl Into<String>, qubits: &[usize]) -> Self {
        CircuitOp { gate: gate.into(), qubits: qubits.to_vec(), params: None }
    }
}

/// A logical circuit on a qubit chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitIrData", into = "CircuitIrData")]
pub struct CircuitIR {
    pub n_qubits: usize,
    pub ops: Vec<CircuitOp>,
}

#[derive(Serialize, Deserialize, Clone)]
struct CircuitIrData {
    n_qubits: usize,
    ops: Vec<CircuitOp>,
}

impl TryFrom<CircuitIrData> for CircuitIR {
    type Error = Error;
    fn try_from(d: CircuitIrData) -> Result<Self> {
        CircuitIR::new(d.n_qubits, d.ops)
    }
}

impl From<CircuitIR> for CircuitIrData {
    fn from(ir: CircuitIR) -> Self {
        CircuitIrData { n_qubits: ir.n_qubits, ops: ir.ops }
    }
}

impl CircuitIR {
    pub fn new(n_qubits: usize, ops: Vec<CircuitOp>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::validation("circuit needs at least one qubit"));
        }
        for (i, op) in ops.iter().enumerate() {
            match op.qubits.len() {
                1 => {}
                2 => {
                    if op.qubits[0].abs_diff(op.qubits[1]) != 1 {
                        return Err(Error::constraint(format!(
                            "op {i} ('{}') acts on non-nearest-neighbor qubits {:?}",
                            op.gate, op.qubits
                        )));
                    }
                }
                n => {
                    return Err(Error::validation(format!(
                        "op {i} ('{}') has arity {n}; only 1 and 2 are supported",
                        op.gate
                    )))
                }
            }
            for &q in &op.qubits {
                if q >= n_qubits {
                    return Err(Error::validation(format!(
                        "op {i} ('{}') references qubit {q}, circuit has {n_qubits}",
                        op.gate
                    )));
                }
            }
        }
        Ok(CircuitIR { n_qubits, ops })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, json)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::FileFormat(format!("circuit schema violation: {e}")))
    }
}

/// Where one logical op landed on the global timeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub op_index: usize,
    pub gate: String,
    pub qubits: Vec<usize>,
    pub slot: usize,
    pub start: f64,
    pub end: f64,
}

/// A fully laid-out global pulse timeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n_qubits: usize,
    pub makespan: f64,
    pub slot_duration: f64,
    /// Optional soft pulse bound; exceedances are verifier warnings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max: Option<f64>,
    pub segments: Vec<PulseSegment>,
    pub placements: Vec<Placement>,
}

impl Schedule {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, json)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::FileFormat(format!("schedule schema violation: {e}")))
    }
}

/// Realization of one op as a timeline of (local-offset, duration, per-qubit
/// pulse strength) rows mapped onto its target qubits.
struct OpRealization {
    /// Sorted global qubits the op pulses.
    qubits: Vec<usize>,
    /// (start offset within the slot, duration, strengths aligned to `qubits`).
    rows: Vec<(f64, f64, Vec<f64>)>,
}

fn realize_op(op: &CircuitOp, lib: &GateLibrary) -> Result<OpRealization> {
    let (segments, params, qubits): (Vec<BoundSegment>, Vec<f64>, Vec<usize>) =
        if let Some(inline) = &op.params {
            // Dynamic slot: standard template of the op's arity.
            let spec = match op.qubits.len() {
                1 => standard_single_qubit_ansatz(),
                _ => two_qubit_ansatz(),
            };
            if inline.len() != spec.n_params() {
                return Err(Error::validation(format!(
                    "dynamic op '{}' carries {} inline parameters, template needs {}",
                    op.gate,
                    inline.len(),
                    spec.n_params()
                )));
            }
            (spec.segments(), inline.clone(), sorted_qubits(op))
        } else {
            let name = resolve_gate_name(op)?;
            let gate = lib.get(&name)?;
            if gate.arity != op.qubits.len() {
                return Err(Error::validation(format!(
                    "gate '{name}' has arity {}, op lists {:?}",
                    gate.arity, op.qubits
                )));
            }
            (
                gate.spec.segments(),
                gate.params.as_slice().to_vec(),
                sorted_qubits(op),
            )
        };

    let mut rows = Vec::with_capacity(segments.len());
    let mut offset = 0.0;
    for seg in &segments {
        let js = seg.resolve(&params)?;
        rows.push((offset, seg.duration, js));
        offset += seg.duration;
    }
    if (offset - GATE_RUNTIME).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "op '{}' realization lasts {offset}, slots are {GATE_RUNTIME}",
            op.gate
        )));
    }
    Ok(OpRealization { qubits, rows })
}

/// Library name for an op, folding the two-qubit orientation into the name:
/// a CX whose control index is above its target resolves to `CX_10`. Local
/// qubit 0 of a stored two-qubit gate always maps to the lower global index.
fn resolve_gate_name(op: &CircuitOp) -> Result<String> {
    if op.qubits.len() == 2 && op.gate == "CX" && op.qubits[0] > op.qubits[1] {
        return Ok("CX_10".to_string());
    }
    Ok(op.gate.clone())
}

fn sorted_qubits(op: &CircuitOp) -> Vec<usize> {
    let mut q = op.qubits.clone();
    q.sort_unstable();
    q
}

/// Greedy earliest-slot assignment honoring qubit availability, the
/// adjacency exclusion and predecessor completion. Returns one slot index
/// per op.
fn assign_slots(ir: &CircuitIR) -> Vec<usize> {
    let n = ir.n_qubits;
    let mut occupancy: Vec<Vec<bool>> = Vec::new();
    let mut qubit_frontier: Vec<usize> = vec![0; n]; // earliest admissible slot per qubit
    let mut slots = Vec::with_capacity(ir.ops.len());
    for op in &ir.ops {
        let mut slot = op.qubits.iter().map(|&q| qubit_frontier[q]).max().unwrap_or(0);
        loop {
            if occupancy.len() <= slot {
                occupancy.resize(slot + 1, vec![false; n]);
            }
            let row = &occupancy[slot];
            let own_free = op.qubits.iter().all(|&q| !row[q]);
            let neighbors_free = op.qubits.iter().all(|&q| {
                let left = q.checked_sub(1).map(|l| row[l]).unwrap_or(false);
                let right = if q + 1 < n { row[q + 1] } else { false };
                let left_is_own = q > 0 && op.qubits.contains(&(q - 1));
                let right_is_own = op.qubits.contains(&(q + 1));
                (!left || left_is_own) && (!right || right_is_own)
            });
            if own_free && neighbors_free {
                break;
            }
            slot += 1;
        }
        for &q in &op.qubits {
            occupancy[slot][q] = true;
            qubit_frontier[q] = slot + 1;
        }
        slots.push(slot);
    }
    slots
}

/// Lays out a circuit as a global pulse schedule in uniform 6 pi slots.
pub fn schedule(ir: &CircuitIR, lib: &GateLibrary) -> Result<Schedule> {
    let realizations: Vec<OpRealization> =
        ir.ops.iter().map(|op| realize_op(op, lib)).collect::<Result<_>>()?;
    let slots = assign_slots(ir);
    let n_slots = slots.iter().map(|s| s + 1).max().unwrap_or(0).max(1);

    let mut segments = Vec::new();
    for slot in 0..n_slots {
        let active: Vec<&OpRealization> = slots
            .iter()
            .zip(&realizations)
            .filter(|(s, _)| **s == slot)
            .map(|(_, r)| r)
            .collect();

        // Union of slice boundaries of every op active in this slot.
        let mut cuts: Vec<f64> = vec![0.0, GATE_RUNTIME];
        for r in &active {
            for (start, dur, _) in &r.rows {
                cuts.push(*start);
                cuts.push(start + dur);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

        for pair in cuts.windows(2) {
            let (t0, t1) = (pair[0], pair[1]);
            let mid = 0.5 * (t0 + t1);
            let mut pulses = vec![Pulse::Idle; ir.n_qubits];
            for r in &active {
                let row = r
                    .rows
                    .iter()
                    .find(|(start, dur, _)| *start <= mid && mid < start + dur)
                    .expect("op rows cover the whole slot");
                for (local, &q) in r.qubits.iter().enumerate() {
                    pulses[q] = Pulse::On(row.2[local]);
                }
            }
            segments.push(PulseSegment::new(t1 - t0, pulses)?);
        }
    }

    let placements = ir
        .ops
        .iter()
        .enumerate()
        .zip(&slots)
        .map(|((op_index, op), &slot)| Placement {
            op_index,
            gate: resolve_gate_name(op).unwrap_or_else(|_| op.gate.clone()),
            qubits: op.qubits.clone(),
            slot,
            start: slot as f64 * GATE_RUNTIME,
            end: (slot + 1) as f64 * GATE_RUNTIME,
        })
        .collect();

    Ok(Schedule {
        n_qubits: ir.n_qubits,
        makespan: n_slots as f64 * GATE_RUNTIME,
        slot_duration: GATE_RUNTIME,
        j_max: None,
        segments,
        placements,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Itemized pass/fail audit of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub items: Vec<CheckItem>,
}

impl ConstraintReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.items.push(CheckItem { name: name.to_string(), passed, detail });
    }
}

/// Audits pulse non-negativity, adjacency exclusion outside two-qubit
/// placements, per-qubit idle spans being pi multiples, and slot alignment.
/// Violations are reported, not thrown.
pub fn verify_schedule(s: &Schedule) -> ConstraintReport {
    let mut report = ConstraintReport { items: Vec::new() };
    let tol = 1e-9;

    // Segment validity: positive durations, finite non-negative strengths,
    // matching qubit counts.
    let mut bad_segments = Vec::new();
    for (i, seg) in s.segments.iter().enumerate() {
        let mut ok = seg.duration.is_finite() && seg.duration > 0.0;
        ok &= seg.n_qubits() == s.n_qubits;
        for p in &seg.pulses {
            if let Pulse::On(j) = p {
                ok &= j.is_finite() && *j >= 0.0;
            }
        }
        if !ok {
            bad_segments.push(i);
        }
    }
    report.push(
        "segment-validity",
        bad_segments.is_empty(),
        if bad_segments.is_empty() {
            format!("{} segments well-formed", s.segments.len())
        } else {
            format!("malformed segments at {bad_segments:?}")
        },
    );
    if !bad_segments.is_empty() {
        // Remaining checks assume well-formed segments.
        return report;
    }

    // Cumulative interval of each segment.
    let mut starts = Vec::with_capacity(s.segments.len());
    let mut t = 0.0;
    for seg in &s.segments {
        starts.push(t);
        t += seg.duration;
    }
    let total = t;

    // Adjacency exclusion: two adjacent pulsed qubits only inside a
    // two-qubit placement on exactly that pair.
    let mut adjacency_violations = Vec::new();
    for (i, seg) in s.segments.iter().enumerate() {
        let (t0, t1) = (starts[i], starts[i] + seg.duration);
        for q in 0..s.n_qubits.saturating_sub(1) {
            if seg.pulses[q].is_idle() || seg.pulses[q + 1].is_idle() {
                continue;
            }
            let covered = s.placements.iter().any(|p| {
                p.qubits.len() == 2
                    && p.qubits.contains(&q)
                    && p.qubits.contains(&(q + 1))
                    && p.start <= t0 + tol
                    && t1 <= p.end + tol
            });
            if !covered {
                adjacency_violations.push((i, q));
            }
        }
    }
    report.push(
        "adjacency-exclusion",
        adjacency_violations.is_empty(),
        if adjacency_violations.is_empty() {
            "no adjacent qubits pulsed simultaneously outside a two-qubit placement".to_string()
        } else {
            format!("(segment, lower qubit) violations at {adjacency_violations:?}")
        },
    );

    // Idle spans: every maximal per-qubit idle run is a multiple of pi.
    let mut idle_violations = Vec::new();
    for q in 0..s.n_qubits {
        let mut run = 0.0;
        for (i, seg) in s.segments.iter().enumerate() {
            if seg.pulses[q].is_idle() {
                run += seg.duration;
            } else {
                if run > 0.0 && !is_pi_multiple(run) {
                    idle_violations.push((q, starts[i] - run, run));
                }
                run = 0.0;
            }
        }
        if run > 0.0 && !is_pi_multiple(run) {
            idle_violations.push((q, total - run, run));
        }
    }
    report.push(
        "idle-pi-multiples",
        idle_violations.is_empty(),
        if idle_violations.is_empty() {
            "every idle span is an integer multiple of pi".to_string()
        } else {
            format!("(qubit, start, length) violations at {idle_violations:?}")
        },
    );

    // Slot alignment: declared makespan matches the segments, is a pi
    // multiple, and placements sit on the slot grid inside the makespan.
    let mut alignment_ok = (total - s.makespan).abs() <= 1e-6;
    let mut details = Vec::new();
    if !alignment_ok {
        details.push(format!("declared makespan {} but segments last {total}", s.makespan));
    }
    if !is_pi_multiple(total) {
        alignment_ok = false;
        details.push(format!("makespan {total} is not a pi multiple"));
    }
    if !(s.slot_duration.is_finite() && s.slot_duration > 0.0) {
        alignment_ok = false;
        details.push(format!("bad slot duration {}", s.slot_duration));
    } else {
        for p in &s.placements {
            let aligned = |x: f64| {
                let k = (x / s.slot_duration).round();
                (x - k * s.slot_duration).abs() <= tol
            };
            if !aligned(p.start) || !aligned(p.end) || p.end > total + tol {
                alignment_ok = false;
                details.push(format!(
                    "placement of op {} ('{}') at [{}, {}] off the slot grid",
                    p.op_index, p.gate, p.start, p.end
                ));
            }
        }
    }
    report.push(
        "slot-alignment",
        alignment_ok,
        if alignment_ok {
            "segments, makespan and placements agree on the slot grid".to_string()
        } else {
            details.join("; ")
        },
    );

    // Optional soft bound: exceeding it is reported but never fails.
    if let Some(j_max) = s.j_max {
        let mut exceed = Vec::new();
        for (i, seg) in s.segments.iter().enumerate() {
            for (q, p) in seg.pulses.iter().enumerate() {
                if let Pulse::On(j) = p {
                    if *j > j_max {
                        exceed.push((i, q, *j));
                    }
                }
            }
        }
        report.push(
            "j-max-soft-bound",
            true,
            if exceed.is_empty() {
                format!("all pulses within the soft bound {j_max}")
            } else {
                format!("warning: pulses above the soft bound {j_max}: {exceed:?}")
            },
        );
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::ParamVector;
    use crate::library::{CompiledGate, GateMeta};
    use std::f64::consts::PI;

    /// Library of structurally valid gates with placeholder pulses; layout
    /// tests only need shapes, not trained fidelities.
    fn dummy_library() -> GateLibrary {
        let mut lib = GateLibrary::new();
        let meta = GateMeta { learning_rate: 0.05, rounds: 1, seed: 0, threshold: 1e-5 };
        for name in ["H", "X"] {
            lib.insert(CompiledGate {
                name: name.to_string(),
                arity: 1,
                spec: standard_single_qubit_ansatz(),
                params: ParamVector::new((0..12).map(|i| 0.1 * i as f64).collect()).unwrap(),
                epsilon: 1e-9,
                meta: meta.clone(),
            })
            .unwrap();
        }
        for name in ["CZ", "CX", "CX_10"] {
            lib.insert(CompiledGate {
                name: name.to_string(),
                arity: 2,
                spec: two_qubit_ansatz(),
                params: ParamVector::new(vec![0.5; 84]).unwrap(),
                epsilon: 1e-9,
                meta: meta.clone(),
            })
            .unwrap();
        }
        lib
    }

    #[test]
    fn single_op_takes_one_slot() {
        let ir = CircuitIR::new(1, vec![CircuitOp::new("H", &[0])]).unwrap();
        let s = schedule(&ir, &dummy_library()).unwrap();
        assert!((s.makespan - 6.0 * PI).abs() < 1e-9);
        assert_eq!(s.placements.len(), 1);
        assert_eq!(s.placements[0].slot, 0);
        assert!(verify_schedule(&s).passed());
    }

    #[test]
    fn adjacent_ops_serialize_into_two_slots() {
        let ir = CircuitIR::new(
            2,
            vec![CircuitOp::new("H", &[0]), CircuitOp::new("H", &[1])],
        )
        .unwrap();
        let s = schedule(&ir, &dummy_library()).unwrap();
        assert!((s.makespan - 12.0 * PI).abs() < 1e-9);
        assert_eq!(s.placements[0].slot, 0);
        assert_eq!(s.placements[1].slot, 1);
        assert!(verify_schedule(&s).passed());
    }

    #[test]
    fn non_adjacent_ops_share_a_slot() {
        let ir = CircuitIR::new(
            3,
            vec![CircuitOp::new("H", &[0]), CircuitOp::new("H", &[2])],
        )
        .unwrap();
        let s = schedule(&ir, &dummy_library()).unwrap();
        assert!((s.makespan - 6.0 * PI).abs() < 1e-9);
        assert_eq!(s.placements[0].slot, 0);
        assert_eq!(s.placements[1].slot, 0);
        assert!(verify_schedule(&s).passed());
    }

    #[test]
    fn two_qubit_op_blocks_its_neighbors() {
        let ir = CircuitIR::new(
            3,
            vec![CircuitOp::new("CZ", &[0, 1]), CircuitOp::new("H", &[2])],
        )
        .unwrap();
        let s = schedule(&ir, &dummy_library()).unwrap();
        assert_eq!(s.placements[0].slot, 0);
        assert_eq!(s.placements[1].slot, 1, "q2 is adjacent to the pulsed q1");
        assert!(verify_schedule(&s).passed());

        // and symmetrically when the single-qubit op comes first
        let ir = CircuitIR::new(
            3,
            vec![CircuitOp::new("H", &[2]), CircuitOp::new("CZ", &[0, 1])],
        )
        .unwrap();
        let s = schedule(&ir, &dummy_library()).unwrap();
        assert_eq!(s.placements[0].slot, 0);
        assert_eq!(s.placements[1].slot, 1);
    }

    #[test]
    fn shared_qubit_ops_respect_program_order() {
        let ir = CircuitIR::new(
            2,
            vec![
                CircuitOp::new("H", &[0]),
                CircuitOp::new("X", &[0]),
                CircuitOp::new("H", &[1]),
            ],
        )
        .unwrap();
        let s = schedule(&ir, &dummy_library()).unwrap();
        assert_eq!(s.placements[0].slot, 0);
        assert_eq!(s.placements[1].slot, 1);
        // H@q1: slot 0 and 1 are blocked by the neighbor, so slot 2
        assert_eq!(s.placements[2].slot, 2);
        assert!(verify_schedule(&s).passed());
    }

    #[test]
    fn reversed_cx_resolves_to_the_swapped_orientation() {
        let ir = CircuitIR::new(2, vec![CircuitOp::new("CX", &[1, 0])]).unwrap();
        let s = schedule(&ir, &dummy_library()).unwrap();
        assert_eq!(s.placements[0].gate, "CX_10");

        let ir = CircuitIR::new(2, vec![CircuitOp::new("CX", &[0, 1])]).unwrap();
        let s = schedule(&ir, &dummy_library()).unwrap();
        assert_eq!(s.placements[0].gate, "CX");
    }

    #[test]
    fn mixed_grids_split_segments_consistently() {
        // 1q op (pi/2 grid) in parallel with nothing, then a 2q op
        // (pi/10 + pi/2 grid) in the next slot: segment durations must tile
        // each slot exactly.
        let ir = CircuitIR::new(
            2,
            vec![CircuitOp::new("H", &[0]), CircuitOp::new("CZ", &[0, 1])],
        )
        .unwrap();
        let s = schedule(&ir, &dummy_library()).unwrap();
        let total: f64 = s.segments.iter().map(|g| g.duration).sum();
        assert!((total - s.makespan).abs() < 1e-9);
        assert!(verify_schedule(&s).passed());
    }

    #[test]
    fn missing_gate_is_an_error() {
        let ir = CircuitIR::new(1, vec![CircuitOp::new("T", &[0])]).unwrap();
        assert!(matches!(
            schedule(&ir, &dummy_library()),
            Err(Error::GateNotFound(_))
        ));
    }

    #[test]
    fn non_nearest_neighbor_two_qubit_op_is_rejected() {
        assert!(matches!(
            CircuitIR::new(3, vec![CircuitOp::new("CZ", &[0, 2])]),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn hand_built_half_pi_idle_gap_fails_the_idle_rule() {
        let s = Schedule {
            n_qubits: 1,
            makespan: PI / 2.0,
            slot_duration: PI / 2.0,
            j_max: None,
            segments: vec![PulseSegment::all_idle(PI / 2.0, 1).unwrap()],
            placements: vec![],
        };
        let report = verify_schedule(&s);
        assert!(!report.passed());
        let item = report.items.iter().find(|i| i.name == "idle-pi-multiples").unwrap();
        assert!(!item.passed);
    }

    #[test]
    fn hand_built_adjacent_pulses_fail_the_adjacency_rule() {
        let s = Schedule {
            n_qubits: 2,
            makespan: PI,
            slot_duration: PI,
            j_max: None,
            segments: vec![PulseSegment::new(PI, vec![Pulse::On(1.0), Pulse::On(0.5)]).unwrap()],
            placements: vec![],
        };
        let report = verify_schedule(&s);
        let item = report.items.iter().find(|i| i.name == "adjacency-exclusion").unwrap();
        assert!(!item.passed);
    }

    #[test]
    fn soft_j_max_warns_but_passes() {
        let s = Schedule {
            n_qubits: 1,
            makespan: PI,
            slot_duration: PI,
            j_max: Some(1.0),
            segments: vec![PulseSegment::new(PI, vec![Pulse::On(2.5)]).unwrap()],
            placements: vec![],
        };
        let report = verify_schedule(&s);
        assert!(report.passed());
        let item = report.items.iter().find(|i| i.name == "j-max-soft-bound").unwrap();
        assert!(item.detail.contains("warning"));
    }

    #[test]
    fn schedule_file_round_trip() {
        let ir = CircuitIR::new(
            2,
            vec![CircuitOp::new("H", &[0]), CircuitOp::new("CX", &[0, 1])],
        )
        .unwrap();
        let s = schedule(&ir, &dummy_library()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sched.json");
        s.save(&path).unwrap();
        let loaded = Schedule::load(&path).unwrap();
        assert_eq!(s, loaded);

        let ir_path = dir.path().join("circuit.json");
        ir.save(&ir_path).unwrap();
        assert_eq!(ir, CircuitIR::load(&ir_path).unwrap());
    }

    #[test]
    fn dynamic_ops_use_the_template_of_their_arity() {
        let mut op = CircuitOp::new("RY", &[0]);
        op.params = Some(vec![0.3; 12]);
        let ir = CircuitIR::new(2, vec![op, CircuitOp::new("H", &[1])]).unwrap();
        let s = schedule(&ir, &dummy_library()).unwrap();
        assert_eq!(s.placements[0].gate, "RY");
        assert_eq!(s.placements[1].slot, 1);
        assert!(verify_schedule(&s).passed());

        let mut bad = CircuitOp::new("RY", &[0]);
        bad.params = Some(vec![0.3; 5]);
        let ir = CircuitIR::new(1, vec![bad]).unwrap();
        assert!(schedule(&ir, &dummy_library()).is_err());
    }
}
