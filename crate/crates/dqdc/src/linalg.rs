//! Dense complex linear algebra kernel.
//!
//! Everything in this crate evolves states with exact matrix exponentials of
//! Hermitian generators. Dimensions never exceed 2^5, so the exponentials are
//! computed from a full eigendecomposition rather than scaling-and-squaring:
//! `exp(-iHt) = V exp(-i L t) V^dag` for `H = V L V^dag`.
//!
//! Parameter derivatives of propagators use the block-triangular augmented
//! matrix `[[-iHt, -i dH t], [0, -iHt]]`: its exponential carries
//! `d/dtheta exp(-iH(theta) t)` in the upper-right block. Because the diagonal
//! blocks share the eigenbasis of `H`, that block is evaluated exactly in the
//! eigenbasis with divided differences of `exp(-i lambda t)` instead of
//! exponentiating the doubled matrix numerically.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// A matrix flagged unitary must satisfy `max|U^dag U - I| <= UNITARY_TOL`.
pub const UNITARY_TOL: f64 = 1e-10;
/// A matrix flagged Hermitian must satisfy `max|H - H^dag| <= HERMITIAN_TOL`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// State vectors must be normalized within this tolerance.
pub const STATE_NORM_TOL: f64 = 1e-10;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest entrywise modulus of `m`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, c| acc.max(c.norm()))
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::validation("matrix has non-finite entries"))
    }
}

pub fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() == m.ncols() {
        Ok(())
    } else {
        Err(Error::shape(format!(
            "expected square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

pub fn check_hermitian(m: &CMatrix) -> Result<()> {
    check_square(m)?;
    check_finite(m)?;
    let dev = max_abs_diff(m, &m.adjoint());
    if dev <= HERMITIAN_TOL {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "matrix is not Hermitian: max|H - H^dag| = {dev:.3e}"
        )))
    }
}

pub fn check_unitary(m: &CMatrix) -> Result<()> {
    check_square(m)?;
    let dev = max_abs_diff(&(m.adjoint() * m), &identity(m.nrows()));
    if dev <= UNITARY_TOL {
        Ok(())
    } else {
        Err(Error::UnitarityBroken(format!(
            "max|U^dag U - I| = {dev:.3e}"
        )))
    }
}

/// Eigendecomposition of a Hermitian generator at a fixed evolution time,
/// reused for the propagator and any number of directional derivatives.
pub struct HermitianExp {
    t: f64,
    eigvals: DVector<f64>,
    eigvecs: CMatrix,
}

impl HermitianExp {
    pub fn new(h: &CMatrix, t: f64) -> Result<Self> {
        check_hermitian(h)?;
        if !t.is_finite() {
            return Err(Error::validation("evolution time must be finite"));
        }
        let eig = h.clone().symmetric_eigen();
        Ok(HermitianExp {
            t,
            eigvals: eig.eigenvalues,
            eigvecs: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigvals.len()
    }

    /// The propagator `exp(-iHt)`, verified unitary within [`UNITARY_TOL`].
    pub fn unitary(&self) -> Result<CMatrix> {
        let phases = CVector::from_iterator(
            self.dim(),
            self.eigvals.iter().map(|&l| Complex64::from_polar(1.0, -l * self.t)),
        );
        let u = &self.eigvecs * CMatrix::from_diagonal(&phases) * self.eigvecs.adjoint();
        check_unitary(&u)?;
        Ok(u)
    }

    /// Upper-right block of `exp([[-iHt, -i dH t], [0, -iHt]])`, i.e. the
    /// derivative of the propagator in direction `dH`.
    ///
    /// In the eigenbasis the block reduces to a Hadamard product with the
    /// divided differences of `f(l) = exp(-i l t)`, written in the stable form
    /// `f[l_i, l_j] = exp(-i t (l_i + l_j)/2) * sin(w)/w`, `w = t (l_i - l_j)/2`.
    pub fn derivative(&self, dh: &CMatrix) -> Result<CMatrix> {
        check_hermitian(dh)?;
        let d = self.dim();
        if dh.nrows() != d {
            return Err(Error::shape(format!(
                "derivative direction is {}x{}, generator is {}x{}",
                dh.nrows(),
                dh.ncols(),
                d,
                d
            )));
        }
        // E~ = V^dag (-i t dH) V
        let e_tilde = self.eigvecs.adjoint() * dh * &self.eigvecs * Complex64::new(0.0, -self.t);
        let mut block = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mid = Complex64::from_polar(1.0, -self.t * (self.eigvals[i] + self.eigvals[j]) / 2.0);
                let w = self.t * (self.eigvals[i] - self.eigvals[j]) / 2.0;
                block[(i, j)] = e_tilde[(i, j)] * mid * sinc(w);
            }
        }
        Ok(&self.eigvecs * block * self.eigvecs.adjoint())
    }
}

/// sin(w)/w, continuous at 0.
fn sinc(w: f64) -> f64 {
    if w.abs() < 1e-3 {
        let w2 = w * w;
        1.0 - w2 / 6.0 + w2 * w2 / 120.0
    } else {
        w.sin() / w
    }
}

/// `exp(-iHt)` for Hermitian `H`, exactly unitary within [`UNITARY_TOL`].
pub fn expm_neg_i_ht(h: &CMatrix, t: f64) -> Result<CMatrix> {
    HermitianExp::new(h, t)?.unitary()
}

/// Propagator together with its derivative along `dh = dH/dtheta`.
///
/// Returns `(U, dU)` with `U = exp(-iHt)` and `dU = d/dtheta exp(-iH(theta) t)`.
pub fn expm_with_derivative(h: &CMatrix, dh: &CMatrix, t: f64) -> Result<(CMatrix, CMatrix)> {
    let exp = HermitianExp::new(h, t)?;
    let du = exp.derivative(dh)?;
    let u = exp.unitary()?;
    Ok((u, du))
}

/// Kronecker (tensor) product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Normalized complex amplitude vector over the 2^n computational basis
/// states. Qubit 0 is the most significant bit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: CVector,
}

impl StateVector {
    /// Wraps an amplitude vector, requiring a power-of-two length and unit
    /// norm within [`STATE_NORM_TOL`].
    pub fn new(amps: CVector) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || dim & (dim - 1) != 0 {
            return Err(Error::shape(format!(
                "state dimension {dim} is not a power of two"
            )));
        }
        if !amps.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::validation("state has non-finite amplitudes"));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::validation(format!(
                "state norm {norm} deviates from 1 by more than {STATE_NORM_TOL:e}"
            )));
        }
        Ok(StateVector {
            n_qubits: dim.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_row_slice(amps))
    }

    /// Computational basis state `|index>` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let dim = 1 << n_qubits;
        assert!(index < dim, "basis index {index} out of range for {n_qubits} qubits");
        let mut amps = CVector::zeros(dim);
        amps[index] = C_ONE;
        StateVector { n_qubits, amps }
    }

    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }
}

/// `U |v>`. The result is re-validated, so applying a non-unitary matrix that
/// breaks normalization is an error.
pub fn apply(u: &CMatrix, v: &StateVector) -> Result<StateVector> {
    if u.ncols() != v.dim() {
        return Err(Error::shape(format!(
            "cannot apply {}x{} matrix to dimension-{} state",
            u.nrows(),
            u.ncols(),
            v.dim()
        )));
    }
    StateVector::new(u * v.amplitudes())
}

/// Inner product `<a|b>`, conjugate-linear in the first argument.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::shape(format!(
            "inner product of dimension {} and {} states",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.amplitudes().dotc(b.amplitudes()))
}
