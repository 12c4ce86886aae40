//! End-to-end demonstrations: Grover search compiled statically from the
//! gate library, and a multi-basis-encoding Max-Cut eigensolver whose pulse
//! strengths are the live variational parameters.

mod grover;
mod maxcut;

pub use grover::{grover_demo, grover_reference_ir, GroverReport};
pub use maxcut::{
    cut_count, dynamic_ansatz, maxcut_demo, mbe_loss, DynamicAnsatz, ExpVals, MaxCutConfig,
    MaxCutProblem, MaxCutReport,
};
