// temporary convergence probe, removed before release
use dqdc::ansatz::{single_qubit_ansatz, two_qubit_ansatz};
use dqdc::linalg::{CMatrix, C_ONE, C_ZERO};
use dqdc::trainer::{train, TrainConfig};
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn h_gate() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(-FRAC_1_SQRT_2, 0.0),
        ],
    )
}

fn x_gate() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C_ZERO, C_ONE, C_ONE, C_ZERO])
}

fn t_gate() -> CMatrix {
    let mut m = CMatrix::identity(2, 2);
    m[(1, 1)] = Complex64::from_polar(1.0, PI / 4.0);
    m
}

fn cz_gate() -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    m[(3, 3)] = -C_ONE;
    m
}

fn cx_gate() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = C_ONE;
    m[(1, 1)] = C_ONE;
    m[(2, 3)] = C_ONE;
    m[(3, 2)] = C_ONE;
    m
}

#[test]
fn probe_single_qubit_convergence() {
    let spec = single_qubit_ansatz(12, PI / 2.0).unwrap();
    for (name, gate) in [("H", h_gate()), ("X", x_gate()), ("T", t_gate())] {
        let t0 = std::time::Instant::now();
        let cfg = TrainConfig { seed: 0, ..TrainConfig::new(0.05) };
        let report = train(&gate, &spec, &cfg, 0).unwrap();
        println!(
            "{name}: converged={} rounds={} eps={:.3e} elapsed={:?}",
            report.converged,
            report.rounds_used,
            report.final_error,
            t0.elapsed()
        );
    }
}

#[test]
fn probe_two_qubit_convergence() {
    let spec = two_qubit_ansatz();
    for (name, gate, lr) in [("CZ", cz_gate(), 0.02), ("CX", cx_gate(), 0.1)] {
        let t0 = std::time::Instant::now();
        let cfg = TrainConfig { seed: 0, max_rounds: 8000, ..TrainConfig::new(lr) };
        let report = train(&gate, &spec, &cfg, 0).unwrap();
        println!(
            "{name}: converged={} rounds={} eps={:.3e} elapsed={:?}",
            report.converged,
            report.rounds_used,
            report.final_error,
            t0.elapsed()
        );
    }
}
