//! Dense complex linear algebra and the eigendecomposition-based reference
//! oracle the rest of the crate is checked against.
//!
//! Matrices are stored row-major. Everything here is sized for desk-scale
//! experiments (dimensions up to a few hundred), so all operations are dense
//! and eigendecompositions delegate to `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{CoreError, Result};

pub type C64 = Complex<f64>;

pub const ZERO: C64 = Complex::new(0.0, 0.0);
pub const ONE: C64 = Complex::new(1.0, 0.0);
pub const I_UNIT: C64 = Complex::new(0.0, 1.0);

/// Hermiticity tolerance on the spectral norm of `A - A†`. Inputs are
/// constructed, not measured, so this is tight.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(CoreError::DimensionMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from nested rows of `[re, im]`-style complex entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(CoreError::EmptyMatrix);
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(CoreError::DimensionMismatch(
                "ragged rows in matrix literal".into(),
            ));
        }
        Self::new(r, c, rows.iter().flatten().copied().collect())
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    fn check_finite(&self) -> Result<()> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(CoreError::NonFiniteEntry { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matrix product dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Copy of the `nr x nc` block with top-left corner at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols);
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm of `A - A†`; zero for exactly Hermitian input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        spectral_norm(&self.sub(&self.adjoint())).unwrap_or(f64::INFINITY)
    }

    fn to_na(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition `A = V diag(lambda) V†` of a Hermitian matrix.
/// Eigenvalues ascend; `V` holds the eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V f(lambda) V†` for a scalar function of the spectrum.
    pub fn apply_function(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        // V * diag(f) computed column-scaled, then times V†.
        let mut scaled = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let fj = f(self.eigenvalues[j]);
            for i in 0..n {
                scaled[(i, j)] = v[(i, j)] * fj;
            }
        }
        scaled.mul(&v.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix, rejecting inputs whose
/// Hermiticity defect exceeds `HERMITICITY_TOL`.
pub fn eigh(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(CoreError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() == 0 {
        return Err(CoreError::EmptyMatrix);
    }
    let defect = a.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(CoreError::NotHermitian {
            defect,
            tol: HERMITICITY_TOL,
        });
    }
    // Symmetrize so roundoff below the tolerance cannot leak into the solver.
    let sym = a.add(&a.adjoint()).scale(Complex::new(0.5, 0.0));
    let eig = sym.to_na().symmetric_eigen();
    let n = a.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors =
        ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Reference oracle `f(A) = V f(Lambda) V†` for Hermitian `A`.
pub fn matfunc_hermitian(a: &ComplexMatrix, f: impl Fn(f64) -> C64) -> Result<ComplexMatrix> {
    Ok(eigh(a)?.apply_function(f))
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(CoreError::EmptyMatrix);
    }
    let svd = m.to_na().svd(false, false);
    Ok(svd.singular_values.max())
}

/// Unitarity defect `|M†M - I|`. The caller compares against its own
/// tolerance.
pub fn check_unitary(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(CoreError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let gram = m.adjoint().mul(m);
    let dev = gram.sub(&ComplexMatrix::identity(m.rows()));
    spectral_norm(&dev)
}

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

pub fn log2_exact(n: usize) -> Option<usize> {
    is_power_of_two(n).then(|| n.trailing_zeros() as usize)
}

/// Pure state on a power-of-two-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if !is_power_of_two(amplitudes.len()) {
            return Err(CoreError::DimensionMismatch(format!(
                "state dimension {} is not a power of two",
                amplitudes.len()
            )));
        }
        for (i, z) in amplitudes.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(CoreError::NonFiniteEntry { row: i, col: 0 });
            }
        }
        Ok(Self { amplitudes })
    }

    /// Normalized state from arbitrary (nonzero) amplitudes.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let mut s = Self::new(amplitudes)?;
        s.normalize()?;
        Ok(s)
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps)
    }

    /// Uniform superposition.
    pub fn plus(dim: usize) -> Result<Self> {
        let a = Complex::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self::new(vec![a; dim])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(CoreError::InvalidParameter(
                "cannot normalize the zero vector".into(),
            ));
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        Ok(())
    }

    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|`, the fidelity between two pure states.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm()
    }

    pub fn apply(&self, m: &ComplexMatrix) -> Result<Self> {
        if m.cols() != self.dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "matrix is {}x{}, state dimension {}",
                m.rows(),
                m.cols(),
                self.dim()
            )));
        }
        Self::new(m.apply(&self.amplitudes))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Self { amplitudes: amps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap()
    }

    fn real_diag(entries: &[f64]) -> ComplexMatrix {
        ComplexMatrix::diagonal(
            &entries
                .iter()
                .map(|&x| Complex::new(x, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    // Deterministic pseudo-random Hermitian matrix for tests.
    pub(crate) fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = ComplexMatrix::from_fn(n, n, |_, _| Complex::new(next(), next()));
        m.add(&m.adjoint()).scale(Complex::new(0.5, 0.0))
    }

    #[test]
    fn matfunc_diagonal_square() {
        let a = real_diag(&[0.5, -0.3]);
        let fa = matfunc_hermitian(&a, |x| Complex::new(x * x, 0.0)).unwrap();
        assert!((fa[(0, 0)].re - 0.25).abs() < 1e-12);
        assert!((fa[(1, 1)].re - 0.09).abs() < 1e-12);
        assert!(fa[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn matfunc_zero_matrix_exp() {
        let a = ComplexMatrix::zeros(2, 2);
        let fa = matfunc_hermitian(&a, |x| Complex::new(0.0, -x).exp()).unwrap();
        let dev = fa.sub(&ComplexMatrix::identity(2));
        assert!(spectral_norm(&dev).unwrap() < 1e-14);
    }

    #[test]
    fn matfunc_cube_matches_threefold_product() {
        // Brute-force oracle: explicit 3-fold matrix product.
        let a = pauli_x().scale(Complex::new(0.5, 0.0));
        let cubed = a.mul(&a).mul(&a);
        let fa = matfunc_hermitian(&a, |x| Complex::new(x * x * x, 0.0)).unwrap();
        assert!(spectral_norm(&fa.sub(&cubed)).unwrap() < 1e-12);
        assert!(spectral_norm(&fa.sub(&pauli_x().scale(Complex::new(0.125, 0.0)))).unwrap() < 1e-12);
    }

    #[test]
    fn matfunc_identity_function_returns_input() {
        for seed in 0..5 {
            let a = random_hermitian(6, seed);
            let fa = matfunc_hermitian(&a, |x| Complex::new(x, 0.0)).unwrap();
            assert!(spectral_norm(&fa.sub(&a)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn matfunc_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[vec![ONE, ONE], vec![ZERO, ONE]]).unwrap();
        let err = matfunc_hermitian(&m, |x| Complex::new(x, 0.0)).unwrap_err();
        match err {
            CoreError::NotHermitian { defect, .. } => assert!(defect > 0.5),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn matfunc_commutes_with_conjugation() {
        // f(V A V†) = V f(A) V† for unitary V.
        let a = random_hermitian(5, 7);
        let g = random_hermitian(5, 11);
        let v = matfunc_hermitian(&g, |x| Complex::new(0.0, x).exp()).unwrap();
        assert!(check_unitary(&v).unwrap() < 1e-12);
        let f = |x: f64| Complex::new((2.0 * x).cos(), x.sin());
        let lhs = matfunc_hermitian(&v.mul(&a).mul(&v.adjoint()), f).unwrap();
        let rhs = v.mul(&matfunc_hermitian(&a, f).unwrap()).mul(&v.adjoint());
        assert!(spectral_norm(&lhs.sub(&rhs)).unwrap() < 1e-9);
    }

    #[test]
    fn spectral_norm_identity_and_diag() {
        assert!((spectral_norm(&ComplexMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-12);
        let d = real_diag(&[0.2, -0.9]);
        assert!((spectral_norm(&d).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_matches_power_iteration() {
        // Independent oracle: power iteration on M†M.
        let m = ComplexMatrix::from_fn(3, 3, |i, j| {
            Complex::new((i as f64 + 1.0) * 0.3 - j as f64 * 0.2, (i * j) as f64 * 0.1)
        });
        let gram = m.adjoint().mul(&m);
        let mut v = vec![Complex::new(1.0, 0.2), Complex::new(-0.4, 0.1), Complex::new(0.3, 0.9)];
        let mut lambda = 0.0;
        for _ in 0..20_000 {
            let w = gram.apply(&v);
            let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            lambda = n;
            v = w.into_iter().map(|z| z / n).collect();
        }
        let oracle = lambda.sqrt();
        assert!((spectral_norm(&m).unwrap() - oracle).abs() <= 1e-9);
    }

    #[test]
    fn spectral_norm_rejects_empty() {
        let m = ComplexMatrix::zeros(0, 0);
        assert!(matches!(spectral_norm(&m), Err(CoreError::EmptyMatrix)));
    }

    #[test]
    fn check_unitary_hadamard_and_non_unitary() {
        let s = 1.0 / 2.0_f64.sqrt();
        let h = ComplexMatrix::from_rows(&[
            vec![Complex::new(s, 0.0), Complex::new(s, 0.0)],
            vec![Complex::new(s, 0.0), Complex::new(-s, 0.0)],
        ])
        .unwrap();
        assert!(check_unitary(&h).unwrap() <= 1e-15);

        let d = real_diag(&[1.0, 0.5]);
        assert!((check_unitary(&d).unwrap() - 0.75).abs() < 1e-12);

        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            check_unitary(&rect),
            Err(CoreError::NotSquare { .. })
        ));
    }

    #[test]
    fn state_vector_normalization_and_fidelity() {
        let mut s = StateVector::new(vec![Complex::new(3.0, 0.0), Complex::new(4.0, 0.0)]).unwrap();
        s.normalize().unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let b = StateVector::basis(2, 0).unwrap();
        assert!((s.fidelity(&b) - 0.6).abs() < 1e-12);
        assert!(StateVector::new(vec![ONE; 3]).is_err());
    }
}
