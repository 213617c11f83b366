//! Scalar quantum signal processing, its lift to block-encoded Hermitian
//! matrices (qubitization), and phase-factor solving.
//!
//! The phase convention is `U(x) = e^{i phi_d Z} R(x) ... e^{i phi_1 Z} R(x)`
//! with the reflection signal operator `R(x)`; the top-left entry of `U(x)`
//! is the complex polynomial `P(x)` and `Re P` is the target.

mod solver;

pub use solver::{solve_phase_factors, solve_phase_factors_seeded};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::block_encoding::{lcu_combine, BlockEncoding};
use crate::error::{CoreError, Result};
use crate::numerics::{ComplexMatrix, C64, HERMITICITY_TOL, ONE, ZERO};

/// Ordered QSP phases `(phi_1, ..., phi_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFactorSequence {
    phases: Vec<f64>,
}

impl PhaseFactorSequence {
    pub fn new(phases: Vec<f64>) -> Self {
        assert!(
            phases.iter().all(|p| p.is_finite()),
            "phase factors must be finite"
        );
        Self { phases }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Polynomial degree realized by this sequence.
    pub fn degree(&self) -> usize {
        self.phases.len()
    }

    pub fn parity(&self) -> Parity {
        Parity::of_degree(self.phases.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_degree(d: usize) -> Self {
        if d % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn matches_index(&self, k: usize) -> bool {
        match self {
            Parity::Even => k % 2 == 0,
            Parity::Odd => k % 2 == 1,
        }
    }
}

/// Number of points in the sup-norm certification grid.
pub const SUP_GRID_POINTS: usize = 2001;

/// Chebyshev-Lobatto grid with `n` points on `[lo, hi]`.
pub fn chebyshev_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (0..n)
        .map(|i| {
            let t = (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
            mid - half * t
        })
        .collect()
}

/// Real polynomial in the Chebyshev basis with definite parity and sup norm
/// at most one (verified on a 2001-point grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetPolynomial {
    /// `coeffs[k]` multiplies `T_k(x)`.
    coeffs: Vec<f64>,
    parity: Parity,
    sup_norm: f64,
}

impl TargetPolynomial {
    pub fn new(coeffs: Vec<f64>, parity: Parity) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(CoreError::InvalidParameter(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::InvalidParameter(
                "polynomial coefficients must be finite".into(),
            ));
        }
        let scale = coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let mut clean = coeffs;
        for (k, c) in clean.iter_mut().enumerate() {
            if !parity.matches_index(k) {
                if c.abs() > 1e-12 * scale.max(1e-300) {
                    return Err(CoreError::InvalidTarget(format!(
                        "coefficient of T_{k} = {c} violates {parity:?} parity"
                    )));
                }
                *c = 0.0;
            }
        }
        // Trim trailing zeros, keeping at least one coefficient.
        while clean.len() > 1 && *clean.last().unwrap() == 0.0 {
            clean.pop();
        }
        let sup_norm = sup_on_grid(&clean);
        if sup_norm > 1.0 + 1e-12 {
            return Err(CoreError::InvalidTarget(format!(
                "sup norm {sup_norm} exceeds 1 on the certification grid"
            )));
        }
        Ok(Self {
            coeffs: clean,
            parity,
            sup_norm,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        eval_chebyshev(&self.coeffs, x)
    }

    /// The constant polynomial `p = 1`, realizable with zero phases.
    pub fn one() -> Self {
        Self {
            coeffs: vec![1.0],
            parity: Parity::Even,
            sup_norm: 1.0,
        }
    }
}

pub fn eval_chebyshev(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b;
    }
    x * b1 - b2 + coeffs[0]
}

fn sup_on_grid(coeffs: &[f64]) -> f64 {
    chebyshev_grid(SUP_GRID_POINTS, -1.0, 1.0)
        .into_iter()
        .map(|x| eval_chebyshev(coeffs, x).abs())
        .fold(0.0, f64::max)
}

/// Reflection signal operator `R(x) = [[x, s], [s, -x]]` with
/// `s = sqrt(1 - x^2)`.
pub fn signal_operator(x: f64) -> Result<ComplexMatrix> {
    if !(x.is_finite() && x.abs() <= 1.0 + 1e-12) {
        return Err(CoreError::InvalidParameter(format!(
            "signal operator input {x} is outside [-1, 1]"
        )));
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    Ok(ComplexMatrix::from_rows(&[
        vec![Complex::new(x, 0.0), Complex::new(s, 0.0)],
        vec![Complex::new(s, 0.0), Complex::new(-x, 0.0)],
    ])
    .unwrap())
}

#[inline]
pub(crate) fn phase_pair(phi: f64) -> (C64, C64) {
    let (s, c) = phi.sin_cos();
    (Complex::new(c, s), Complex::new(c, -s))
}

/// First column of the QSP product at `x`; index 0 is `P(x)`.
#[inline]
pub(crate) fn qsp_first_column(phases: &[f64], x: f64) -> [C64; 2] {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut col = [ONE, ZERO];
    for &phi in phases {
        let r0 = Complex::new(x, 0.0) * col[0] + Complex::new(s, 0.0) * col[1];
        let r1 = Complex::new(s, 0.0) * col[0] - Complex::new(x, 0.0) * col[1];
        let (e_plus, e_minus) = phase_pair(phi);
        col = [e_plus * r0, e_minus * r1];
    }
    col
}

/// `P(x)`, the top-left entry of the QSP product.
pub fn qsp_polynomial(phi: &PhaseFactorSequence, x: f64) -> C64 {
    qsp_first_column(phi.phases(), x)[0]
}

/// The full ordered product `e^{i phi_d Z} R(x) ... e^{i phi_1 Z} R(x)`.
pub fn qsp_unitary_scalar(phi: &PhaseFactorSequence, x: f64) -> ComplexMatrix {
    assert!(
        x.is_finite() && x.abs() <= 1.0 + 1e-12,
        "qsp input {x} outside [-1, 1]"
    );
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut u = ComplexMatrix::identity(2);
    for &p in phi.phases() {
        let (e_plus, e_minus) = phase_pair(p);
        // left-multiply by e^{i phi Z} R(x)
        let m = ComplexMatrix::from_rows(&[
            vec![e_plus * x, e_plus * s],
            vec![e_minus * s, -e_minus * x],
        ])
        .unwrap();
        u = m.mul(&u);
    }
    u
}

/// Hermitian, self-inverse iterate built from a block-encoding of a Hermitian
/// matrix; one extra control qubit carries the alternation between `U` and
/// `U†`. Each eigenvalue of the encoded matrix sees exactly the scalar
/// reflection `R(lambda)` on its invariant plane, so interleaving with
/// projector-controlled phase rotations lifts scalar QSP to the matrix.
#[derive(Debug, Clone)]
pub struct QubitizedIterate {
    w: ComplexMatrix,
    system_dim: usize,
    ancilla_qubits: usize,
}

impl QubitizedIterate {
    pub fn new(be: &BlockEncoding) -> Result<Self> {
        if (be.scale() - 1.0).abs() > 1e-12 {
            return Err(CoreError::InvalidEncoding(format!(
                "qubitization requires a scale-1 encoding, got {}",
                be.scale()
            )));
        }
        let block = be.encoded_block();
        let defect = block.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(CoreError::NotHermitian {
                defect,
                tol: HERMITICITY_TOL,
            });
        }
        let u = be.unitary();
        let dim = be.total_dim();
        let half = Complex::new(0.5, 0.0);
        let udag = u.adjoint();
        let herm = u.add(&udag).scale(half);
        let anti = u.sub(&udag).scale(half);
        let mut w = ComplexMatrix::zeros(2 * dim, 2 * dim);
        w.set_block(0, 0, &herm);
        w.set_block(0, dim, &anti.scale(Complex::new(-1.0, 0.0)));
        w.set_block(dim, 0, &anti);
        w.set_block(dim, dim, &herm.scale(Complex::new(-1.0, 0.0)));
        Ok(Self {
            w,
            system_dim: be.system_dim(),
            ancilla_qubits: be.ancilla_qubits() + 1,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.ancilla_qubits
    }

    pub fn total_dim(&self) -> usize {
        self.w.rows()
    }

    /// Multiply in the projector-controlled phase `e^{i phi (2 Pi - I)}`:
    /// `e^{+i phi}` on the signal rows, `e^{-i phi}` elsewhere.
    fn scale_rows_by_phase(&self, m: &mut ComplexMatrix, phi: f64) {
        let (e_plus, e_minus) = phase_pair(phi);
        let cols = m.cols();
        for i in 0..m.rows() {
            let f = if i < self.system_dim { e_plus } else { e_minus };
            for j in 0..cols {
                m[(i, j)] *= f;
            }
        }
    }

    /// Full unitary of the phased-iterate product for the given phases.
    pub fn qsp_unitary(&self, phases: &[f64]) -> ComplexMatrix {
        let mut v = ComplexMatrix::identity(self.total_dim());
        for &phi in phases {
            v = self.w.mul(&v);
            self.scale_rows_by_phase(&mut v, phi);
        }
        v
    }

    /// Top-left `system_dim x system_dim` block of the product, computed on a
    /// column slab without materializing the full unitary.
    pub fn qsp_block(&self, phases: &[f64]) -> ComplexMatrix {
        let dim = self.total_dim();
        let k = self.system_dim;
        let mut slab = ComplexMatrix::zeros(dim, k);
        for j in 0..k {
            slab[(j, j)] = ONE;
        }
        for &phi in phases {
            slab = self.w.mul(&slab);
            self.scale_rows_by_phase(&mut slab, phi);
        }
        slab.block(0, 0, k, k)
    }
}

/// Block-encoding of `P(A)` for the complex QSP polynomial of `phi`, built by
/// alternating queries to the encoding (through the self-inverse iterate) with
/// projector-controlled phase rotations.
pub fn qubitize(be: &BlockEncoding, phi: &PhaseFactorSequence) -> Result<BlockEncoding> {
    let iterate = QubitizedIterate::new(be)?;
    let unitary = iterate.qsp_unitary(phi.phases());
    BlockEncoding::new(
        unitary,
        iterate.ancilla_qubits(),
        be.system_qubits(),
        1.0,
        (phi.len() as f64) * be.precision(),
    )
}

/// Block-encoding of `(P(A) + P(A)†)/2 = p(A)` for the real target `p`.
pub fn real_part_encoding(phi: &PhaseFactorSequence, be: &BlockEncoding) -> Result<BlockEncoding> {
    let enc = qubitize(be, phi)?;
    let half = Complex::new(0.5, 0.0);
    lcu_combine(&[enc.clone(), enc.dagger()], &[half, half])
}
