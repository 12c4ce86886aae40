//! Fixed-structure parametric native-gate sequences and their evaluation.
//!
//! An [`AnsatzSpec`] is an ordered list of time slices; each slice covers
//! every qubit with exactly one slot (a parametric one-qubit pulse, a
//! two-qubit pulse pair with one side fixed, or an idle). The trainable
//! parameters are the pulse strengths, kept non-negative at all times.
//!
//! Evaluation lowers the spec to [`BoundSegment`]s and multiplies exact
//! segment propagators. Parameter derivatives of the output state come from
//! one forward sweep that caches intermediate states and one backward sweep
//! that applies adjoint propagators, with the per-segment propagator
//! derivative supplied by the augmented-matrix kernel. Two-qubit slices
//! evolve under the full coupled Hamiltonian, and the derivative of the
//! coupling term with respect to the variable pulse is included.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{identity, CMatrix, CVector, HermitianExp, StateVector};
use crate::model::{ChainOperators, ChainSpec, Pulse, PulseSegment};

/// Tolerance used for structural duration checks (multiples of pi, slice
/// alignment). Durations are built from exact constants, so accumulated
/// floating error stays many orders of magnitude below this.
pub const DURATION_TOL: f64 = 1e-9;

pub fn is_pi_multiple(t: f64) -> bool {
    let k = (t / PI).round();
    (t - k * PI).abs() <= DURATION_TOL
}

/// How one pulse of a slot gets its strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    Fixed(f64),
    Param(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    OneQubit {
        qubit: usize,
        binding: Binding,
    },
    /// Simultaneous pulse pair on two adjacent qubits. Exactly one of the two
    /// bindings is fixed and one is a parameter.
    TwoQubit {
        qubits: (usize, usize),
        j: (Binding, Binding),
    },
    Idle {
        qubit: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSlot {
    pub kind: SlotKind,
    pub dt: f64,
}

/// Non-negative trainable pulse strengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::constraint(format!(
                    "parameter {i} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(ParamVector(values))
    }

    /// The all-ones initialization used before training.
    pub fn ones(len: usize) -> Self {
        ParamVector(vec![1.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ParamVector::new(v)
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(p: ParamVector) -> Self {
        p.0
    }
}

#[derive(Serialize, Deserialize, Clone)]
struct AnsatzSpecData {
    n_qubits: usize,
    slices: Vec<Vec<AnsatzSlot>>,
}

/// A fixed parametric native-gate sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AnsatzSpecData", into = "AnsatzSpecData")]
pub struct AnsatzSpec {
    n_qubits: usize,
    slices: Vec<Vec<AnsatzSlot>>,
    n_params: usize,
    total_duration: f64,
}

impl TryFrom<AnsatzSpecData> for AnsatzSpec {
    type Error = Error;
    fn try_from(d: AnsatzSpecData) -> Result<Self> {
        AnsatzSpec::new(d.n_qubits, d.slices)
    }
}

impl From<AnsatzSpec> for AnsatzSpecData {
    fn from(s: AnsatzSpec) -> Self {
        AnsatzSpecData { n_qubits: s.n_qubits, slices: s.slices }
    }
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, slices: Vec<Vec<AnsatzSlot>>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::validation("ansatz needs at least one qubit"));
        }
        if slices.is_empty() {
            return Err(Error::validation("ansatz needs at least one slice"));
        }
        let mut seen_params = Vec::new();
        let mut total = 0.0_f64;
        for (s, slice) in slices.iter().enumerate() {
            let dt = slice
                .first()
                .ok_or_else(|| Error::validation(format!("slice {s} is empty")))?
                .dt;
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::validation(format!(
                    "slice {s} duration must be positive, got {dt}"
                )));
            }
            let mut covered = vec![false; n_qubits];
            let mut cover = |q: usize| -> Result<()> {
                if q >= n_qubits {
                    return Err(Error::validation(format!(
                        "slice {s} references qubit {q}, ansatz has {n_qubits}"
                    )));
                }
                if covered[q] {
                    return Err(Error::validation(format!(
                        "slice {s} covers qubit {q} twice"
                    )));
                }
                covered[q] = true;
                Ok(())
            };
            for slot in slice {
                if (slot.dt - dt).abs() > DURATION_TOL {
                    return Err(Error::validation(format!(
                        "slice {s} mixes slot durations {dt} and {}",
                        slot.dt
                    )));
                }
                match &slot.kind {
                    SlotKind::OneQubit { qubit, binding } => {
                        cover(*qubit)?;
                        record_binding(binding, &mut seen_params)?;
                    }
                    SlotKind::TwoQubit { qubits, j } => {
                        cover(qubits.0)?;
                        cover(qubits.1)?;
                        if qubits.0.abs_diff(qubits.1) != 1 {
                            return Err(Error::validation(format!(
                                "slice {s}: two-qubit slot on non-adjacent qubits {:?}",
                                qubits
                            )));
                        }
                        let fixed_count = [&j.0, &j.1]
                            .iter()
                            .filter(|b| matches!(b, Binding::Fixed(_)))
                            .count();
                        if fixed_count != 1 {
                            return Err(Error::validation(format!(
                                "slice {s}: two-qubit slot must fix exactly one pulse"
                            )));
                        }
                        record_binding(&j.0, &mut seen_params)?;
                        record_binding(&j.1, &mut seen_params)?;
                    }
                    SlotKind::Idle { qubit } => cover(*qubit)?,
                }
            }
            if let Some(q) = covered.iter().position(|c| !c) {
                return Err(Error::validation(format!(
                    "slice {s} leaves qubit {q} uncovered"
                )));
            }
            total += dt;
        }
        seen_params.sort_unstable();
        seen_params.dedup();
        let n_params = seen_params.len();
        if seen_params.iter().enumerate().any(|(i, &p)| i != p) {
            return Err(Error::validation(
                "parameter indices must be dense 0..P-1".to_string(),
            ));
        }
        if !is_pi_multiple(total) {
            return Err(Error::validation(format!(
                "total ansatz duration {total} is not an integer multiple of pi; \
                 idle neighbors would not return to their original state"
            )));
        }
        Ok(AnsatzSpec { n_qubits, slices, n_params, total_duration: total })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn n_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[Vec<AnsatzSlot>] {
        &self.slices
    }

    pub fn total_duration(&self) -> f64 {
        self.total_duration
    }

    /// Lowers each slice to one global segment of per-qubit pulse bindings.
    pub fn segments(&self) -> Vec<BoundSegment> {
        self.slices
            .iter()
            .map(|slice| {
                let dt = slice[0].dt;
                let mut pulses = vec![PulseBind::Idle; self.n_qubits];
                for slot in slice {
                    match &slot.kind {
                        SlotKind::OneQubit { qubit, binding } => {
                            pulses[*qubit] = (*binding).into();
                        }
                        SlotKind::TwoQubit { qubits, j } => {
                            pulses[qubits.0] = j.0.into();
                            pulses[qubits.1] = j.1.into();
                        }
                        SlotKind::Idle { .. } => {}
                    }
                }
                BoundSegment { duration: dt, pulses }
            })
            .collect()
    }

    /// Unitary realized by the sequence at the given parameter values.
    pub fn evaluate(&self, params: &ParamVector) -> Result<CMatrix> {
        self.check_params(params)?;
        sequence_unitary(self.n_qubits, &self.segments(), params.as_slice())
    }

    /// Output state together with its derivative with respect to every
    /// parameter (one cached forward sweep, one adjoint backward sweep).
    pub fn evaluate_with_jacobian(
        &self,
        params: &ParamVector,
        input: &StateVector,
    ) -> Result<(StateVector, Vec<CVector>)> {
        self.check_params(params)?;
        let jac = sequence_jacobian(
            self.n_qubits,
            &self.segments(),
            params.as_slice(),
            self.n_params,
            input,
        )?;
        Ok((jac.output, jac.tangents))
    }

    fn check_params(&self, params: &ParamVector) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::shape(format!(
                "ansatz has {} parameters, got {}",
                self.n_params,
                params.len()
            )));
        }
        Ok(())
    }
}

fn record_binding(b: &Binding, seen: &mut Vec<usize>) -> Result<()> {
    match b {
        Binding::Fixed(v) => {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::constraint(format!(
                    "fixed pulse strength must be finite and non-negative, got {v}"
                )));
            }
        }
        Binding::Param(p) => seen.push(*p),
    }
    Ok(())
}

/// Sequence of `n_gates` parametric one-qubit native gates of duration `dt`
/// on a single qubit. The default (12 gates of pi/2) realizes arbitrary
/// single-qubit rotations in a 6 pi runtime.
pub fn single_qubit_ansatz(n_gates: usize, dt: f64) -> Result<AnsatzSpec> {
    if n_gates == 0 {
        return Err(Error::validation("ansatz needs at least one native gate"));
    }
    let slices = (0..n_gates)
        .map(|i| {
            vec![AnsatzSlot {
                kind: SlotKind::OneQubit { qubit: 0, binding: Binding::Param(i) },
                dt,
            }]
        })
        .collect();
    AnsatzSpec::new(1, slices)
}

pub const ONE_QUBIT_GATES: usize = 12;
pub const ONE_QUBIT_DT: f64 = PI / 2.0;

/// The standard 12-gate, 6 pi single-qubit template.
pub fn standard_single_qubit_ansatz() -> AnsatzSpec {
    single_qubit_ansatz(ONE_QUBIT_GATES, ONE_QUBIT_DT).expect("standard template is valid")
}

const IO_SLICES: usize = 20;
const IO_DT: f64 = PI / 10.0;
const EG_SLICES: usize = 4;
const EG_DT: f64 = PI / 2.0;

/// Two-qubit entangling template: Individual Operations (20 slices of pi/10,
/// both qubits independently pulsed under the full coupled Hamiltonian),
/// Entanglement Generation (4 two-qubit native gates of pi/2; the first two
/// fix the pulse on qubit 0 to 1 and vary qubit 1, the last two the
/// reverse), then a second Individual Operations block. Total runtime 6 pi,
/// 84 parameters packed time-major and qubit-minor with the entangling
/// parameters in between.
pub fn two_qubit_ansatz() -> AnsatzSpec {
    let mut slices = Vec::with_capacity(2 * IO_SLICES + EG_SLICES);
    let mut next = 0;
    let io_block = |slices: &mut Vec<Vec<AnsatzSlot>>, next: &mut usize| {
        for _ in 0..IO_SLICES {
            slices.push(vec![
                AnsatzSlot {
                    kind: SlotKind::OneQubit { qubit: 0, binding: Binding::Param(*next) },
                    dt: IO_DT,
                },
                AnsatzSlot {
                    kind: SlotKind::OneQubit { qubit: 1, binding: Binding::Param(*next + 1) },
                    dt: IO_DT,
                },
            ]);
            *next += 2;
        }
    };
    io_block(&mut slices, &mut next);
    for k in 0..EG_SLICES {
        let j = if k < 2 {
            (Binding::Fixed(1.0), Binding::Param(next))
        } else {
            (Binding::Param(next), Binding::Fixed(1.0))
        };
        next += 1;
        slices.push(vec![AnsatzSlot {
            kind: SlotKind::TwoQubit { qubits: (0, 1), j },
            dt: EG_DT,
        }]);
    }
    io_block(&mut slices, &mut next);
    AnsatzSpec::new(2, slices).expect("two-qubit template is valid")
}

/// One global evolution segment with per-qubit pulse bindings. This is the
/// common lowered form shared by ansatz evaluation and the dynamic demos:
/// idle, fixed strength, or a trainable parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSegment {
    pub duration: f64,
    pub pulses: Vec<PulseBind>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseBind {
    Idle,
    Fixed(f64),
    Param(usize),
}

impl From<Binding> for PulseBind {
    fn from(b: Binding) -> Self {
        match b {
            Binding::Fixed(v) => PulseBind::Fixed(v),
            Binding::Param(p) => PulseBind::Param(p),
        }
    }
}

impl BoundSegment {
    /// Concrete pulse strengths at the given parameter values.
    pub fn resolve(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.pulses
            .iter()
            .map(|p| match p {
                PulseBind::Idle => Ok(0.0),
                PulseBind::Fixed(v) => Ok(*v),
                PulseBind::Param(k) => params.get(*k).copied().ok_or_else(|| {
                    Error::shape(format!("parameter index {k} out of range"))
                }),
            })
            .collect()
    }

    /// Materializes a concrete schedule segment (parameters become pulses,
    /// idles stay idle).
    pub fn to_pulse_segment(&self, params: &[f64]) -> Result<PulseSegment> {
        let js = self.resolve(params)?;
        let pulses = self
            .pulses
            .iter()
            .zip(js)
            .map(|(bind, j)| match bind {
                PulseBind::Idle => Pulse::Idle,
                _ => Pulse::On(j),
            })
            .collect();
        PulseSegment::new(self.duration, pulses)
    }

    fn param_slots(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pulses.iter().enumerate().filter_map(|(q, p)| match p {
            PulseBind::Param(k) => Some((q, *k)),
            _ => None,
        })
    }
}

/// Ordered product of segment propagators (later segments act last).
pub fn sequence_unitary(
    n_qubits: usize,
    segments: &[BoundSegment],
    params: &[f64],
) -> Result<CMatrix> {
    let ops = ChainOperators::new(&ChainSpec::new(n_qubits)?);
    let mut u = identity(1 << n_qubits);
    for seg in segments {
        let js = seg.resolve(params)?;
        let h = ops.hamiltonian(&js)?;
        u = HermitianExp::new(&h, seg.duration)?.unitary()? * u;
    }
    Ok(u)
}

pub struct SequenceJacobian {
    pub output: StateVector,
    /// d(output)/d(param k), one unnormalized tangent vector per parameter.
    pub tangents: Vec<CVector>,
    /// Full sequence unitary (byproduct of the backward sweep).
    pub unitary: CMatrix,
}

/// Output state and its parameter Jacobian for a bound segment sequence.
///
/// Forward sweep: cache the state entering each segment and, for every
/// parameter bound in that segment, the seed `dU_seg * state`. Backward
/// sweep: accumulate the suffix propagator and push each seed through it.
pub fn sequence_jacobian(
    n_qubits: usize,
    segments: &[BoundSegment],
    params: &[f64],
    n_params: usize,
    input: &StateVector,
) -> Result<SequenceJacobian> {
    if input.n_qubits() != n_qubits {
        return Err(Error::shape(format!(
            "input state has {} qubits, sequence has {n_qubits}",
            input.n_qubits()
        )));
    }
    let dim = 1 << n_qubits;
    let ops = ChainOperators::new(&ChainSpec::new(n_qubits)?);

    let mut state = input.amplitudes().clone();
    let mut units: Vec<CMatrix> = Vec::with_capacity(segments.len());
    // (segment index, param index, dU * state_entering_segment)
    let mut seeds: Vec<(usize, usize, CVector)> = Vec::new();

    for (s, seg) in segments.iter().enumerate() {
        let js = seg.resolve(params)?;
        let h = ops.hamiltonian(&js)?;
        let exp = HermitianExp::new(&h, seg.duration)?;
        for (qubit, k) in seg.param_slots() {
            if k >= n_params {
                return Err(Error::shape(format!(
                    "parameter index {k} out of range for {n_params} parameters"
                )));
            }
            let dh = ops.hamiltonian_derivative(&js, qubit)?;
            let du = exp.derivative(&dh)?;
            seeds.push((s, k, &du * &state));
        }
        let u = exp.unitary()?;
        state = &u * state;
        units.push(u);
    }

    let mut tangents = vec![CVector::zeros(dim); n_params];
    let mut suffix = identity(dim);
    let mut seed_iter = seeds.iter().rev().peekable();
    for s in (0..segments.len()).rev() {
        while let Some((seg_idx, k, seed)) = seed_iter.peek() {
            if *seg_idx != s {
                break;
            }
            tangents[*k] += &suffix * seed;
            seed_iter.next();
        }
        suffix *= &units[s];
    }

    Ok(SequenceJacobian {
        output: StateVector::new(state)?,
        tangents,
        unitary: suffix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{check_unitary, inner, max_abs_diff, C_ONE};
    use crate::model::segment_propagator;
    use num_complex::Complex64;
    use rand::{Rng, RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(rng: &mut impl Rng, len: usize) -> ParamVector {
        ParamVector::new((0..len).map(|_| rng.random_range(0.0..2.0)).collect()).unwrap()
    }

    fn random_state(rng: &mut impl Rng, n_qubits: usize) -> StateVector {
        let dim = 1 << n_qubits;
        let raw = CVector::from_fn(dim, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        StateVector::new(raw.clone() / Complex64::new(raw.norm(), 0.0)).unwrap()
    }

    /// Central finite differences of the output state, step 1e-6.
    fn fd_tangents(
        spec: &AnsatzSpec,
        params: &ParamVector,
        input: &StateVector,
    ) -> Vec<CVector> {
        let eps = 1e-6;
        let base: Vec<f64> = params.as_slice().to_vec();
        (0..params.len())
            .map(|k| {
                let mut plus = base.clone();
                let mut minus = base.clone();
                plus[k] += eps;
                minus[k] -= eps;
                let up = sequence_unitary(spec.n_qubits(), &spec.segments(), &plus).unwrap();
                let um = sequence_unitary(spec.n_qubits(), &spec.segments(), &minus).unwrap();
                ((up - um) * input.amplitudes()) / Complex64::new(2.0 * eps, 0.0)
            })
            .collect()
    }

    #[test]
    fn single_qubit_template_shapes() {
        let spec = single_qubit_ansatz(12, PI / 2.0).unwrap();
        assert_eq!(spec.n_params(), 12);
        assert!((spec.total_duration() - 6.0 * PI).abs() < 1e-12);

        let spec8 = single_qubit_ansatz(8, PI / 2.0).unwrap();
        assert_eq!(spec8.n_params(), 8);
        assert!((spec8.total_duration() - 4.0 * PI).abs() < 1e-12);

        // pi/2 total is not a pi multiple
        assert!(single_qubit_ansatz(2, PI / 4.0).is_err());
    }

    #[test]
    fn two_qubit_template_shapes() {
        let spec = two_qubit_ansatz();
        assert_eq!(spec.n_params(), 84);
        assert!((spec.total_duration() - 6.0 * PI).abs() < 1e-9);
        let segs = spec.segments();
        assert_eq!(segs.len(), 44);
        let io: f64 = segs[..20].iter().map(|s| s.duration).sum();
        let eg: f64 = segs[20..24].iter().map(|s| s.duration).sum();
        assert!((io - 2.0 * PI).abs() < 1e-9);
        assert!((eg - 2.0 * PI).abs() < 1e-9);
        // first two EG slices fix qubit 0, last two fix qubit 1
        assert_eq!(segs[20].pulses[0], PulseBind::Fixed(1.0));
        assert_eq!(segs[21].pulses[0], PulseBind::Fixed(1.0));
        assert_eq!(segs[22].pulses[1], PulseBind::Fixed(1.0));
        assert_eq!(segs[23].pulses[1], PulseBind::Fixed(1.0));
    }

    #[test]
    fn all_zero_params_single_qubit_is_identity() {
        let spec = single_qubit_ansatz(12, PI / 2.0).unwrap();
        let u = spec.evaluate(&ParamVector::new(vec![0.0; 12]).unwrap()).unwrap();
        assert!(max_abs_diff(&u, &identity(2)) < 1e-10);
    }

    #[test]
    fn evaluate_is_unitary_for_random_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let one = single_qubit_ansatz(12, PI / 2.0).unwrap();
        let two = two_qubit_ansatz();
        for _ in 0..5 {
            check_unitary(&one.evaluate(&random_params(&mut rng, 12)).unwrap()).unwrap();
            check_unitary(&two.evaluate(&random_params(&mut rng, 84)).unwrap()).unwrap();
        }
        // single slot, duration pi, arbitrary J
        let single = single_qubit_ansatz(1, PI).unwrap();
        check_unitary(&single.evaluate(&random_params(&mut rng, 1)).unwrap()).unwrap();
    }

    #[test]
    fn evaluate_rejects_negative_params() {
        let spec = single_qubit_ansatz(12, PI / 2.0).unwrap();
        assert!(ParamVector::new(vec![-1.0; 12]).is_err());
        // a raw negative value smuggled through the sequence API still fails
        let segs = spec.segments();
        assert!(sequence_unitary(1, &segs, &[-1.0; 12]).is_err());
    }

    #[test]
    fn two_qubit_zero_params_matches_segment_composition_oracle() {
        let spec = two_qubit_ansatz();
        let params = ParamVector::new(vec![0.0; 84]).unwrap();
        let u = spec.evaluate(&params).unwrap();

        // Oracle: materialize every slice as a concrete pulse segment and
        // compose propagators directly.
        let chain = ChainSpec::new(2).unwrap();
        let mut expected = identity(4);
        for seg in spec.segments() {
            let ps = seg.to_pulse_segment(params.as_slice()).unwrap();
            expected = segment_propagator(&ps, &chain).unwrap() * expected;
        }
        assert!(max_abs_diff(&u, &expected) < 1e-10);
    }

    #[test]
    fn jacobian_matches_finite_differences_both_templates() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for case in 0..20 {
            let (spec, p) = if case % 2 == 0 {
                (single_qubit_ansatz(12, PI / 2.0).unwrap(), 12)
            } else {
                (two_qubit_ansatz(), 84)
            };
            let params = random_params(&mut rng, p);
            let input = random_state(&mut rng, spec.n_qubits());
            let (_, tangents) = spec.evaluate_with_jacobian(&params, &input).unwrap();
            assert_eq!(tangents.len(), p);
            let fd = fd_tangents(&spec, &params, &input);
            let mut max_rel = 0.0_f64;
            for k in 0..p {
                let diff = (&tangents[k] - &fd[k]).norm();
                let rel = diff / fd[k].norm().max(1e-12);
                max_rel = max_rel.max(rel);
            }
            assert!(max_rel <= 1e-6, "case {case}: max relative error {max_rel:.3e}");
        }
    }

    #[test]
    fn jacobian_output_matches_evaluate() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let spec = two_qubit_ansatz();
        let params = random_params(&mut rng, 84);
        let input = random_state(&mut rng, 2);
        let (out, _) = spec.evaluate_with_jacobian(&params, &input).unwrap();
        let u = spec.evaluate(&params).unwrap();
        let direct = &u * input.amplitudes();
        assert!((out.amplitudes() - direct).norm() < 1e-10);
    }

    #[test]
    fn appending_two_pi_idle_preserves_action_up_to_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let spec = single_qubit_ansatz(12, PI / 2.0).unwrap();
        let params = random_params(&mut rng, 12);
        let u = spec.evaluate(&params).unwrap();

        let mut slices = spec.slices().to_vec();
        slices.push(vec![AnsatzSlot { kind: SlotKind::Idle { qubit: 0 }, dt: 2.0 * PI }]);
        let padded = AnsatzSpec::new(1, slices).unwrap();
        assert_eq!(padded.n_params(), 12);
        let up = padded.evaluate(&params).unwrap();

        let overlap = (u.adjoint() * up).trace() / Complex64::new(2.0, 0.0);
        assert!((overlap.norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn param_indices_must_be_dense() {
        let slices = vec![vec![AnsatzSlot {
            kind: SlotKind::OneQubit { qubit: 0, binding: Binding::Param(1) },
            dt: PI,
        }]];
        assert!(AnsatzSpec::new(1, slices).is_err());
    }

    #[test]
    fn slice_coverage_must_be_exact() {
        // qubit 1 uncovered
        let slices = vec![vec![AnsatzSlot {
            kind: SlotKind::OneQubit { qubit: 0, binding: Binding::Param(0) },
            dt: PI,
        }]];
        assert!(AnsatzSpec::new(2, slices).is_err());
    }

    #[test]
    fn two_qubit_slot_validation() {
        // both pulses variable
        let slices = vec![vec![AnsatzSlot {
            kind: SlotKind::TwoQubit {
                qubits: (0, 1),
                j: (Binding::Param(0), Binding::Param(1)),
            },
            dt: PI,
        }]];
        assert!(AnsatzSpec::new(2, slices).is_err());
    }

    #[test]
    fn single_slot_gradient_projection_is_consistent() {
        // One native gate, input |0>: check the tangent against finite
        // differences and the loss-style projection <0| dU^dag U |0>.
        let spec = single_qubit_ansatz(2, PI / 2.0).unwrap();
        let params = ParamVector::new(vec![0.9, 0.4]).unwrap();
        let input = StateVector::basis(1, 0);
        let (out, tangents) = spec.evaluate_with_jacobian(&params, &input).unwrap();
        let fd = fd_tangents(&spec, &params, &input);
        for k in 0..2 {
            assert!((&tangents[k] - &fd[k]).norm() < 1e-7);
        }
        let proj = inner(&out, &StateVector::new(tangents[0].clone().normalize() * C_ONE).unwrap());
        assert!(proj.is_ok());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = two_qubit_ansatz();
        let json = serde_json::to_string(&spec).unwrap();
        let back: AnsatzSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
