//! Multi-basis-encoding Max-Cut on a 4-vertex, 3-edge graph, solved with
//! dynamically compiled pulses.
//!
//! Two graph vertices live on each qubit: vertices 0 and 1 map to the
//! z-axis of qubits 0 and 1, vertices 2 and 3 to their x-axes. The loss
//! dresses products of single-qubit expectations with `tanh` and the edge
//! weights; the predicted cut rounds each expectation to a sign. The ansatz
//! is two layers of one Ry slot per qubit (12 trainable pi/2 native gates
//! each) followed by the library CZ, laid out under the alternating rule,
//! and the pulse strengths themselves are the variational parameters.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::ansatz::{sequence_jacobian, sequence_unitary, BoundSegment, PulseBind};
use crate::error::{Error, Result};
use crate::executor::{expectation, Axis};
use crate::library::GateLibrary;
use crate::linalg::{CMatrix, CVector, StateVector};
use crate::model::{op_on, sigma_x, sigma_z};
use crate::scheduler::{schedule, CircuitIR, CircuitOp, Schedule};
use crate::trainer::{Adam, AdamHyper};

pub const RY_GATES: usize = 12;
pub const RY_DT: f64 = std::f64::consts::FRAC_PI_2;

/// The 4-vertex Max-Cut instance with edges (0,1), (0,2), (2,3) and the
/// fixed two-qubit encoding: vertex 0 -> (q0, z), 1 -> (q1, z),
/// 2 -> (q0, x), 3 -> (q1, x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxCutProblem {
    pub w01: f64,
    pub w02: f64,
    pub w23: f64,
}

impl Default for MaxCutProblem {
    fn default() -> Self {
        MaxCutProblem { w01: 1.0, w02: 1.0, w23: 1.0 }
    }
}

impl MaxCutProblem {
    pub fn new(w01: f64, w02: f64, w23: f64) -> Result<Self> {
        for w in [w01, w02, w23] {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::validation(format!(
                    "edge weights must be finite and non-negative, got {w}"
                )));
            }
        }
        Ok(MaxCutProblem { w01, w02, w23 })
    }

    pub fn total_weight(&self) -> f64 {
        self.w01 + self.w02 + self.w23
    }
}

/// The four single-qubit expectations the encoding reads out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpVals {
    pub s0z: f64,
    pub s1z: f64,
    pub s0x: f64,
    pub s1x: f64,
}

impl ExpVals {
    pub fn of_state(state: &StateVector) -> Result<Self> {
        Ok(ExpVals {
            s0z: expectation(state, 0, Axis::Z)?,
            s1z: expectation(state, 1, Axis::Z)?,
            s0x: expectation(state, 0, Axis::X)?,
            s1x: expectation(state, 1, Axis::X)?,
        })
    }
}

/// `w01 tanh<s0z> tanh<s1z> + w02 tanh<s0z> tanh<s0x> + w23 tanh<s0x> tanh<s1x>`.
pub fn mbe_loss(e: &ExpVals, p: &MaxCutProblem) -> f64 {
    p.w01 * e.s0z.tanh() * e.s1z.tanh()
        + p.w02 * e.s0z.tanh() * e.s0x.tanh()
        + p.w23 * e.s0x.tanh() * e.s1x.tanh()
}

/// Rounding used by the cut predictor: +1 for x >= 0, else -1.
fn round_sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Predicted cut `sum over edges of (w/2)(1 - R(a) R(b))`.
pub fn cut_count(e: &ExpVals, p: &MaxCutProblem) -> f64 {
    0.5 * p.w01 * (1.0 - round_sign(e.s0z) * round_sign(e.s1z))
        + 0.5 * p.w02 * (1.0 - round_sign(e.s0z) * round_sign(e.s0x))
        + 0.5 * p.w23 * (1.0 - round_sign(e.s0x) * round_sign(e.s1x))
}

/// Gradient of [`mbe_loss`] with respect to the four expectations.
fn loss_coefficients(e: &ExpVals, p: &MaxCutProblem) -> [f64; 4] {
    let sech2 = |x: f64| 1.0 - x.tanh() * x.tanh();
    [
        p.w01 * sech2(e.s0z) * e.s1z.tanh() + p.w02 * sech2(e.s0z) * e.s0x.tanh(),
        p.w01 * e.s0z.tanh() * sech2(e.s1z),
        p.w02 * e.s0z.tanh() * sech2(e.s0x) + p.w23 * sech2(e.s0x) * e.s1x.tanh(),
        p.w23 * e.s0x.tanh() * sech2(e.s1x),
    ]
}

/// Two-qubit variational circuit of `layers` repetitions of
/// `[Ry slot on q0 | Ry slot on q1 | CZ]`, where each Ry slot is 12
/// trainable pi/2 native gates and the CZ pulses are frozen from the
/// library. Parameters are packed in schedule order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicAnsatz {
    pub layers: usize,
    pub n_params: usize,
}

pub fn dynamic_ansatz(layers: usize) -> DynamicAnsatz {
    DynamicAnsatz { layers, n_params: layers * 2 * RY_GATES }
}

impl DynamicAnsatz {
    /// Trainable bound-segment sequence; CZ segments contribute fixed
    /// propagators.
    pub fn segments(&self, lib: &GateLibrary) -> Result<Vec<BoundSegment>> {
        let cz = lib.get("CZ")?;
        let cz_fixed: Vec<BoundSegment> = cz
            .spec
            .segments()
            .iter()
            .map(|seg| {
                let js = seg.resolve(cz.params.as_slice())?;
                Ok(BoundSegment {
                    duration: seg.duration,
                    pulses: js.into_iter().map(PulseBind::Fixed).collect(),
                })
            })
            .collect::<Result<_>>()?;

        let mut segments = Vec::new();
        let mut next_param = 0;
        for _ in 0..self.layers {
            for qubit in 0..2 {
                for _ in 0..RY_GATES {
                    let mut pulses = vec![PulseBind::Idle; 2];
                    pulses[qubit] = PulseBind::Param(next_param);
                    next_param += 1;
                    segments.push(BoundSegment { duration: RY_DT, pulses });
                }
            }
            segments.extend(cz_fixed.iter().cloned());
        }
        Ok(segments)
    }

    /// Circuit form with the Ry pulse strengths inlined, ready for the
    /// scheduler.
    pub fn ir(&self, params: &[f64]) -> Result<CircuitIR> {
        if params.len() != self.n_params {
            return Err(Error::shape(format!(
                "dynamic ansatz has {} parameters, got {}",
                self.n_params,
                params.len()
            )));
        }
        let mut ops = Vec::new();
        let mut next = 0;
        for _ in 0..self.layers {
            for qubit in 0..2 {
                let mut op = CircuitOp::new("RY", &[qubit]);
                op.params = Some(params[next..next + RY_GATES].to_vec());
                next += RY_GATES;
                ops.push(op);
            }
            ops.push(CircuitOp::new("CZ", &[0, 1]));
        }
        CircuitIR::new(2, ops)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxCutConfig {
    pub learning_rate: f64,
    pub max_rounds: usize,
    pub seed: u64,
    pub adam: AdamHyper,
}

impl Default for MaxCutConfig {
    fn default() -> Self {
        MaxCutConfig {
            learning_rate: 0.1,
            max_rounds: 200,
            seed: 0,
            adam: AdamHyper::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxCutReport {
    pub seed: u64,
    pub layers: usize,
    pub rounds: usize,
    pub loss_history: Vec<f64>,
    pub cut_history: Vec<f64>,
    pub best_loss: f64,
    pub best_round: usize,
    pub final_cut: f64,
    pub final_expvals: ExpVals,
    pub final_params: Vec<f64>,
    #[serde(skip)]
    pub schedule: Option<Schedule>,
}

impl MaxCutReport {
    /// Writes `round,loss,cut` rows for plotting.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "round,loss,cut")?;
        for (i, (l, c)) in self.loss_history.iter().zip(&self.cut_history).enumerate() {
            writeln!(f, "{},{},{}", i + 1, l, c)?;
        }
        Ok(())
    }
}

/// Optimizes the dynamic ansatz directly against the encoded loss, with all
/// pulse strengths initialized to one and projected gradients through the
/// full pulse sequence (CZ blocks enter the sweeps as constants). Nothing
/// is sampled, so the run is deterministic; non-convergence shows up in the
/// report rather than as an error.
pub fn maxcut_demo(
    lib: &GateLibrary,
    problem: &MaxCutProblem,
    cfg: &MaxCutConfig,
) -> Result<MaxCutReport> {
    let ansatz = dynamic_ansatz(2);
    let segments = ansatz.segments(lib)?;
    let n_params = ansatz.n_params;
    let init = StateVector::basis(2, 0);

    let observables: [CMatrix; 4] = [
        op_on(2, 0, &sigma_z()),
        op_on(2, 1, &sigma_z()),
        op_on(2, 0, &sigma_x()),
        op_on(2, 1, &sigma_x()),
    ];

    let mut params = vec![1.0_f64; n_params];
    let mut adam = Adam::new(n_params, cfg.adam);
    let mut loss_history = Vec::with_capacity(cfg.max_rounds);
    let mut cut_history = Vec::with_capacity(cfg.max_rounds);
    let mut best_loss = f64::INFINITY;
    let mut best_round = 0;
    let mut best_params = params.clone();

    for round in 1..=cfg.max_rounds {
        let jac = sequence_jacobian(2, &segments, &params, n_params, &init)?;
        let e = ExpVals::of_state(&jac.output)?;
        let loss = mbe_loss(&e, problem);
        let cut = cut_count(&e, problem);
        loss_history.push(loss);
        cut_history.push(cut);
        if loss < best_loss {
            best_loss = loss;
            best_round = round;
            best_params.copy_from_slice(&params);
        }

        let coeffs = loss_coefficients(&e, problem);
        let projected: Vec<CVector> = observables
            .iter()
            .map(|a| a * jac.output.amplitudes())
            .collect();
        let grads: Vec<f64> = jac
            .tangents
            .iter()
            .map(|t| {
                coeffs
                    .iter()
                    .zip(&projected)
                    .map(|(c, w)| c * 2.0 * w.dotc(t).re)
                    .sum()
            })
            .collect();
        adam.step(&mut params, &grads, cfg.learning_rate);
    }

    // Evaluate the best parameters once more for the reported observables
    // and materialize their schedule.
    let u = sequence_unitary(2, &segments, &best_params)?;
    let final_state = StateVector::new(&u * init.amplitudes())?;
    let final_expvals = ExpVals::of_state(&final_state)?;
    let final_cut = cut_count(&final_expvals, problem);
    let sched = schedule(&ansatz.ir(&best_params)?, lib)?;

    Ok(MaxCutReport {
        seed: cfg.seed,
        layers: ansatz.layers,
        rounds: cfg.max_rounds,
        loss_history,
        cut_history,
        best_loss,
        best_round,
        final_cut,
        final_expvals,
        final_params: best_params,
        schedule: Some(sched),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mbe_loss_closed_forms() {
        let p = MaxCutProblem::default();
        let zeros = ExpVals { s0z: 0.0, s1z: 0.0, s0x: 0.0, s1x: 0.0 };
        assert_eq!(mbe_loss(&zeros, &p), 0.0);

        let alt = ExpVals { s0z: 1.0, s1z: -1.0, s0x: -1.0, s1x: 1.0 };
        let t2 = 1.0_f64.tanh() * 1.0_f64.tanh();
        assert!((mbe_loss(&alt, &p) + 3.0 * t2).abs() < 1e-12);

        let p = MaxCutProblem::new(2.0, 0.0, 0.0).unwrap();
        let e = ExpVals { s0z: 1.0, s1z: 1.0, s0x: 0.3, s1x: -0.8 };
        assert!((mbe_loss(&e, &p) - 2.0 * t2).abs() < 1e-12);
    }

    #[test]
    fn loss_is_invariant_under_global_sign_flip() {
        let p = MaxCutProblem::new(1.0, 0.7, 2.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let e = ExpVals {
                s0z: rng.random_range(-1.0..1.0),
                s1z: rng.random_range(-1.0..1.0),
                s0x: rng.random_range(-1.0..1.0),
                s1x: rng.random_range(-1.0..1.0),
            };
            let flipped = ExpVals { s0z: -e.s0z, s1z: -e.s1z, s0x: -e.s0x, s1x: -e.s1x };
            assert!((mbe_loss(&e, &p) - mbe_loss(&flipped, &p)).abs() < 1e-12);
        }
    }

    #[test]
    fn cut_count_closed_forms() {
        let p = MaxCutProblem::default();
        let all_cut = ExpVals { s0z: 0.9, s1z: -0.8, s0x: -0.7, s1x: 0.6 };
        assert_eq!(cut_count(&all_cut, &p), 3.0);

        let none = ExpVals { s0z: 0.9, s1z: 0.8, s0x: 0.7, s1x: 0.6 };
        assert_eq!(cut_count(&none, &p), 0.0);

        let one = ExpVals { s0z: 0.9, s1z: -0.8, s0x: 0.7, s1x: 0.6 };
        assert_eq!(cut_count(&one, &p), 1.0);
    }

    #[test]
    fn cut_count_stays_in_range_and_is_integral_for_unit_weights() {
        let p = MaxCutProblem::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let e = ExpVals {
                s0z: rng.random_range(-1.0..1.0),
                s1z: rng.random_range(-1.0..1.0),
                s0x: rng.random_range(-1.0..1.0),
                s1x: rng.random_range(-1.0..1.0),
            };
            let c = cut_count(&e, &p);
            assert!((0.0..=p.total_weight()).contains(&c));
            assert!((c - c.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn rounding_sends_zero_to_plus_one() {
        let p = MaxCutProblem::default();
        let e = ExpVals { s0z: 0.0, s1z: 0.4, s0x: -0.3, s1x: 0.0 };
        // R(0) = +1: edges (0,1) uncut, (0,2) cut, (2,3) cut
        assert_eq!(cut_count(&e, &p), 2.0);
    }

    #[test]
    fn dynamic_ansatz_shapes() {
        let a = dynamic_ansatz(2);
        assert_eq!(a.n_params, 48);
        let ir = a.ir(&vec![1.0; 48]).unwrap();
        assert_eq!(ir.ops.len(), 6);
        assert_eq!(ir.ops[2].gate, "CZ");
        assert_eq!(ir.ops[5].gate, "CZ");
        assert!(a.ir(&vec![1.0; 5]).is_err());
    }
}
