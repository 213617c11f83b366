//! Block-encodings: embedding a norm-bounded matrix as the top-left block of
//! a unitary, plus the addition (LCU) and multiplication combinators.
//!
//! Register convention: ancillas occupy the most significant qubits, so the
//! encoded matrix is literally the top-left `2^n x 2^n` corner and the signal
//! subspace is the first `2^n` basis states. New registers added by a
//! combinator (the LCU combine register, the qubitization control) go on top,
//! i.e. become the new most significant qubits.

use num_complex::Complex;

use crate::error::{CoreError, Result};
use crate::numerics::{
    check_unitary, eigh, is_power_of_two, spectral_norm, ComplexMatrix, C64, ONE, ZERO,
};

/// Unitarity tolerance for every constructed encoding.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Memory guard: largest unitary dimension a combinator will materialize.
pub const MAX_UNITARY_DIM: usize = 1 << 13;

/// A unitary together with the bookkeeping that makes its corner meaningful:
/// `scale * (<0|^m ⊗ I) U (|0>^m ⊗ I)` approximates the encoded matrix to
/// `precision`.
#[derive(Debug, Clone)]
pub struct BlockEncoding {
    unitary: ComplexMatrix,
    ancilla_qubits: usize,
    system_qubits: usize,
    scale: f64,
    precision: f64,
}

impl BlockEncoding {
    pub fn new(
        unitary: ComplexMatrix,
        ancilla_qubits: usize,
        system_qubits: usize,
        scale: f64,
        precision: f64,
    ) -> Result<Self> {
        let dim = 1usize << (ancilla_qubits + system_qubits);
        if unitary.rows() != dim || unitary.cols() != dim {
            return Err(CoreError::InvalidEncoding(format!(
                "unitary is {}x{} but {} ancilla + {} system qubits require dimension {}",
                unitary.rows(),
                unitary.cols(),
                ancilla_qubits,
                system_qubits,
                dim
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "block-encoding scale {scale} must be positive and finite"
            )));
        }
        if !(precision >= 0.0 && precision.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "block-encoding precision {precision} must be non-negative"
            )));
        }
        let defect = check_unitary(&unitary)?;
        if defect > UNITARITY_TOL {
            return Err(CoreError::NotUnitary {
                defect,
                tol: UNITARITY_TOL,
            });
        }
        let be = Self {
            unitary,
            ancilla_qubits,
            system_qubits,
            scale,
            precision,
        };
        let block_norm = spectral_norm(&be.encoded_block())?;
        if block_norm > 1.0 + 1e-9 {
            return Err(CoreError::InvalidEncoding(format!(
                "encoded block has spectral norm {block_norm}, above the unit bound"
            )));
        }
        Ok(be)
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.ancilla_qubits
    }

    pub fn system_qubits(&self) -> usize {
        self.system_qubits
    }

    pub fn system_dim(&self) -> usize {
        1 << self.system_qubits
    }

    pub fn total_dim(&self) -> usize {
        1 << (self.ancilla_qubits + self.system_qubits)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    /// `scale * (<0|^m ⊗ I) U (|0>^m ⊗ I)`: the rescaled top-left corner.
    pub fn encoded_block(&self) -> ComplexMatrix {
        let n = self.system_dim();
        let corner = self.unitary.block(0, 0, n, n);
        if self.scale == 1.0 {
            corner
        } else {
            corner.scale(Complex::new(self.scale, 0.0))
        }
    }

    /// Encoding of the adjoint of the encoded matrix.
    pub fn dagger(&self) -> Self {
        Self {
            unitary: self.unitary.adjoint(),
            ..self.clone()
        }
    }

    /// Same encoding with `extra` idle ancilla qubits prepended.
    pub fn pad_ancillas(&self, extra: usize) -> Self {
        if extra == 0 {
            return self.clone();
        }
        Self {
            unitary: ComplexMatrix::identity(1 << extra).kron(&self.unitary),
            ancilla_qubits: self.ancilla_qubits + extra,
            ..self.clone()
        }
    }

    fn require_unit_scale(&self, op: &str) -> Result<()> {
        if (self.scale - 1.0).abs() > 1e-12 {
            return Err(CoreError::InvalidEncoding(format!(
                "{op} requires scale 1 encodings, got scale {}",
                self.scale
            )));
        }
        Ok(())
    }
}

/// Shortcut used throughout: the rescaled corner of `be`.
pub fn encoded_block(be: &BlockEncoding) -> ComplexMatrix {
    be.encoded_block()
}

/// One-ancilla exact block-encoding of a Hermitian contraction:
/// `U = [[A, S], [S, -A]]` with `S = sqrt(I - A^2)`.
pub fn dilate_hermitian(a: &ComplexMatrix) -> Result<BlockEncoding> {
    let defect = a.hermiticity_defect();
    if defect > crate::numerics::HERMITICITY_TOL {
        return Err(CoreError::NotHermitian {
            defect,
            tol: crate::numerics::HERMITICITY_TOL,
        });
    }
    let norm = spectral_norm(a)?;
    if norm > 1.0 + 1e-12 {
        return Err(CoreError::NormExceedsOne { norm });
    }
    let eig = eigh(a)?;
    // sqrt(I - A^2) through the same eigenbasis; eigenvalues of 1 - lambda^2
    // below zero are roundoff at the |lambda| = 1 edge and get clamped.
    let sqrt_complement = eig.apply_function(|lambda| {
        let r = 1.0 - lambda * lambda;
        if r < -1e-12 {
            // cannot happen: norm was checked above
            Complex::new(0.0, 0.0)
        } else {
            Complex::new(r.max(0.0).sqrt(), 0.0)
        }
    });
    let n = a.rows();
    let mut u = ComplexMatrix::zeros(2 * n, 2 * n);
    u.set_block(0, 0, a);
    u.set_block(0, n, &sqrt_complement);
    u.set_block(n, 0, &sqrt_complement);
    u.set_block(n, n, &a.scale(Complex::new(-1.0, 0.0)));
    let system_qubits = crate::numerics::log2_exact(n).ok_or_else(|| {
        CoreError::DimensionMismatch(format!("matrix dimension {n} is not a power of two"))
    })?;
    BlockEncoding::new(u, 1, system_qubits, 1.0, 0.0)
}

/// `H^{⊗t}`, the uniform prepare unitary.
pub fn hadamard_tensor(t: usize) -> ComplexMatrix {
    let s = 1.0 / 2.0_f64.sqrt();
    let h = ComplexMatrix::from_rows(&[
        vec![Complex::new(s, 0.0), Complex::new(s, 0.0)],
        vec![Complex::new(s, 0.0), Complex::new(-s, 0.0)],
    ])
    .unwrap();
    let mut out = ComplexMatrix::identity(1);
    for _ in 0..t {
        out = out.kron(&h);
    }
    out
}

/// Any unitary whose first column is `v` (`v` must be a unit vector). The
/// remaining columns come from Gram-Schmidt against the standard basis; only
/// the first column ever enters an encoded block.
pub fn unitary_with_first_column(v: &[C64]) -> Result<ComplexMatrix> {
    let k = v.len();
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(CoreError::InvalidParameter(format!(
            "prepare column must be a unit vector, norm was {norm}"
        )));
    }
    let mut cols: Vec<Vec<C64>> = vec![v.to_vec()];
    for basis in 0..k {
        if cols.len() == k {
            break;
        }
        let mut w = vec![ZERO; k];
        w[basis] = ONE;
        for c in &cols {
            let overlap: C64 = c.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wi, ci) in w.iter_mut().zip(c) {
                *wi -= overlap * ci;
            }
        }
        let wn: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if wn > 1e-8 {
            for wi in &mut w {
                *wi /= wn;
            }
            cols.push(w);
        }
    }
    if cols.len() != k {
        return Err(CoreError::InvalidParameter(
            "failed to complete prepare unitary".into(),
        ));
    }
    Ok(ComplexMatrix::from_fn(k, k, |i, j| cols[j][i]))
}

fn all_weights_uniform_real(weights: &[C64]) -> bool {
    let first = weights[0];
    first.im == 0.0
        && first.re > 0.0
        && weights.iter().all(|w| *w == first)
}

/// Prepare-select-unprepare combination: the encoded block of the result is
/// `(1/beta) * sum_j w_j * block_j` with `beta = sum |w_j|`. The combine
/// register is padded to a power of two with identity terms and sits on top as
/// the most significant register; in the uniform-weight power-of-two case the
/// prepare pair is exactly `H^{⊗log2 k}`.
pub fn lcu_combine(encodings: &[BlockEncoding], weights: &[C64]) -> Result<BlockEncoding> {
    if encodings.is_empty() {
        return Err(CoreError::InvalidEncoding(
            "lcu_combine requires at least one encoding".into(),
        ));
    }
    if encodings.len() != weights.len() {
        return Err(CoreError::DimensionMismatch(format!(
            "{} encodings but {} weights",
            encodings.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| w.norm() == 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "lcu weights must be nonzero, got {w}"
        )));
    }
    let n = encodings[0].system_qubits();
    if encodings.iter().any(|e| e.system_qubits() != n) {
        return Err(CoreError::DimensionMismatch(
            "lcu_combine requires a shared system size".into(),
        ));
    }
    for e in encodings {
        e.require_unit_scale("lcu_combine")?;
    }
    let m = encodings
        .iter()
        .map(BlockEncoding::ancilla_qubits)
        .max()
        .unwrap();
    let padded: Vec<BlockEncoding> = encodings
        .iter()
        .map(|e| e.pad_ancillas(m - e.ancilla_qubits()))
        .collect();

    let k = padded.len();
    let k_pow = k.next_power_of_two();
    let combine_qubits = crate::numerics::log2_exact(k_pow).unwrap();
    let term_dim = 1usize << (m + n);
    let full_dim = k_pow * term_dim;
    if full_dim > MAX_UNITARY_DIM {
        return Err(CoreError::InvalidParameter(format!(
            "lcu_combine would materialize a {full_dim}-dimensional unitary \
             (limit {MAX_UNITARY_DIM})"
        )));
    }

    let beta: f64 = weights.iter().map(|w| w.norm()).sum();
    // Weight phases split evenly between the left and right prepares:
    // conj(c_j) * d_j = w_j / beta.
    let mut left_col = vec![ZERO; k_pow];
    let mut right_col = vec![ZERO; k_pow];
    for (j, w) in weights.iter().enumerate() {
        let mag = (w.norm() / beta).sqrt();
        let half_phase = w.arg() / 2.0;
        left_col[j] = Complex::from_polar(mag, -half_phase);
        right_col[j] = Complex::from_polar(mag, half_phase);
    }
    let (prep_left, prep_right) = if k == k_pow && all_weights_uniform_real(weights) {
        let h = hadamard_tensor(combine_qubits);
        (h.clone(), h)
    } else {
        (
            unitary_with_first_column(&left_col)?,
            unitary_with_first_column(&right_col)?,
        )
    };

    let mut select = ComplexMatrix::zeros(full_dim, full_dim);
    for j in 0..k_pow {
        let term = if j < k {
            padded[j].unitary().clone()
        } else {
            ComplexMatrix::identity(term_dim)
        };
        select.set_block(j * term_dim, j * term_dim, &term);
    }

    let id_term = ComplexMatrix::identity(term_dim);
    let left = prep_left.adjoint().kron(&id_term);
    let right = prep_right.kron(&id_term);
    let unitary = left.mul(&select).mul(&right);

    let precision = weights
        .iter()
        .zip(&padded)
        .map(|(w, e)| w.norm() / beta * e.precision())
        .sum();
    BlockEncoding::new(unitary, m + combine_qubits, n, 1.0, precision)
}

/// Lift a unitary on `[front ⊗ back]` to `[front ⊗ mid ⊗ back]`, acting as
/// the identity on the inserted middle register.
fn insert_middle_register(
    u: &ComplexMatrix,
    front_dim: usize,
    mid_dim: usize,
    back_dim: usize,
) -> ComplexMatrix {
    debug_assert_eq!(u.rows(), front_dim * back_dim);
    let dim = front_dim * mid_dim * back_dim;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for f in 0..front_dim {
        for f2 in 0..front_dim {
            for b in 0..back_dim {
                for b2 in 0..back_dim {
                    let v = u[(f * back_dim + b, f2 * back_dim + b2)];
                    if v == ZERO {
                        continue;
                    }
                    for mdl in 0..mid_dim {
                        out[(
                            (f * mid_dim + mdl) * back_dim + b,
                            (f2 * mid_dim + mdl) * back_dim + b2,
                        )] = v;
                    }
                }
            }
        }
    }
    out
}

/// Encoding of the product: `block(a) * block(b)`, ancillas add.
pub fn product_encode(a: &BlockEncoding, b: &BlockEncoding) -> Result<BlockEncoding> {
    if a.system_qubits() != b.system_qubits() {
        return Err(CoreError::DimensionMismatch(format!(
            "product_encode system sizes differ: {} vs {} qubits",
            a.system_qubits(),
            b.system_qubits()
        )));
    }
    let n_dim = a.system_dim();
    let ma_dim = 1usize << a.ancilla_qubits();
    let mb_dim = 1usize << b.ancilla_qubits();
    let full_dim = ma_dim * mb_dim * n_dim;
    if full_dim > MAX_UNITARY_DIM {
        return Err(CoreError::InvalidParameter(format!(
            "product_encode would materialize a {full_dim}-dimensional unitary \
             (limit {MAX_UNITARY_DIM})"
        )));
    }
    // Register layout of the result: [anc_a | anc_b | sys].
    let lifted_a = insert_middle_register(a.unitary(), ma_dim, mb_dim, n_dim);
    let lifted_b = ComplexMatrix::identity(ma_dim).kron(b.unitary());
    let unitary = lifted_a.mul(&lifted_b);
    BlockEncoding::new(
        unitary,
        a.ancilla_qubits() + b.ancilla_qubits(),
        a.system_qubits(),
        a.scale() * b.scale(),
        a.scale() * b.precision() + b.scale() * a.precision(),
    )
}

/// Number of system qubits for a `dim`-dimensional matrix, if it is a valid
/// power of two.
pub fn system_qubits_for_dim(dim: usize) -> Result<usize> {
    if !is_power_of_two(dim) {
        return Err(CoreError::DimensionMismatch(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(crate::numerics::log2_exact(dim).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::I_UNIT;

    fn real_diag(entries: &[f64]) -> ComplexMatrix {
        ComplexMatrix::diagonal(
            &entries
                .iter()
                .map(|&x| Complex::new(x, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    fn random_contraction(n: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = ComplexMatrix::from_fn(n, n, |_, _| Complex::new(next(), next()));
        let h = m.add(&m.adjoint()).scale(Complex::new(0.5, 0.0));
        let norm = spectral_norm(&h).unwrap();
        h.scale(Complex::new(0.8 / norm, 0.0))
    }

    #[test]
    fn dilate_scalar_case() {
        let a = real_diag(&[0.5]);
        let be = dilate_hermitian(&a).unwrap();
        let u = be.unitary();
        let s = 0.75f64.sqrt();
        assert!((u[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((u[(0, 1)].re - s).abs() < 1e-15);
        assert!((u[(1, 0)].re - s).abs() < 1e-15);
        assert!((u[(1, 1)].re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn dilate_zero_matrix_is_swap_pattern() {
        let be = dilate_hermitian(&ComplexMatrix::zeros(2, 2)).unwrap();
        let u = be.unitary();
        // off-diagonal identity blocks
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { ONE } else { ZERO };
                assert!((u[(i, j + 2)] - expect).norm() < 1e-14);
                assert!((u[(i + 2, j)] - expect).norm() < 1e-14);
                assert!(u[(i, j)].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dilate_round_trip() {
        let a = real_diag(&[0.9, -0.2]);
        let be = dilate_hermitian(&a).unwrap();
        assert!(spectral_norm(&be.encoded_block().sub(&a)).unwrap() < 1e-12);
        assert!(check_unitary(be.unitary()).unwrap() < 1e-12);
    }

    #[test]
    fn dilate_rejects_large_norm_with_value() {
        let a = real_diag(&[1.5]);
        match dilate_hermitian(&a).unwrap_err() {
            CoreError::NormExceedsOne { norm } => assert!((norm - 1.5).abs() < 1e-12),
            other => panic!("unexpected error: {other}"),
        }
        let m = ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]).unwrap();
        assert!(matches!(
            dilate_hermitian(&m),
            Err(CoreError::NotHermitian { .. })
        ));
    }

    #[test]
    fn encoded_block_of_identity_unitary() {
        let be = BlockEncoding::new(ComplexMatrix::identity(4), 1, 1, 1.0, 0.0).unwrap();
        let block = be.encoded_block();
        assert!(spectral_norm(&block.sub(&ComplexMatrix::identity(2))).unwrap() < 1e-15);
    }

    #[test]
    fn lcu_same_encoding_half_half() {
        let a = random_contraction(2, 3);
        let be = dilate_hermitian(&a).unwrap();
        let combined = lcu_combine(
            &[be.clone(), be.clone()],
            &[Complex::new(0.5, 0.0), Complex::new(0.5, 0.0)],
        )
        .unwrap();
        assert!(spectral_norm(&combined.encoded_block().sub(&a)).unwrap() < 1e-12);
        assert_eq!(combined.ancilla_qubits(), 2);
    }

    #[test]
    fn lcu_average_of_two_blocks() {
        let a = random_contraction(2, 5);
        let b = random_contraction(2, 8);
        let ea = dilate_hermitian(&a).unwrap();
        let eb = dilate_hermitian(&b).unwrap();
        let combined = lcu_combine(&[ea, eb], &[ONE, ONE]).unwrap();
        let expect = a.add(&b).scale(Complex::new(0.5, 0.0));
        assert!(spectral_norm(&combined.encoded_block().sub(&expect)).unwrap() < 1e-12);
    }

    #[test]
    fn lcu_complex_weights_match_direct_arithmetic() {
        // weights (1, -i): block = (b1 - i b2)/2, the combination used to
        // assemble cos - i sin.
        let a = random_contraction(2, 13);
        let b = random_contraction(2, 21);
        let ea = dilate_hermitian(&a).unwrap();
        let eb = dilate_hermitian(&b).unwrap();
        let combined = lcu_combine(&[ea, eb], &[ONE, -I_UNIT]).unwrap();
        let expect = a.sub(&b.scale(I_UNIT)).scale(Complex::new(0.5, 0.0));
        assert!(spectral_norm(&combined.encoded_block().sub(&expect)).unwrap() < 1e-12);
    }

    #[test]
    fn lcu_uniform_uses_exact_hadamard_prepares() {
        // For uniform weights on a power of two the combined unitary equals
        // (H^{⊗t} ⊗ I) SELECT (H^{⊗t} ⊗ I) entry for entry.
        let enc: Vec<BlockEncoding> = (0..4)
            .map(|s| dilate_hermitian(&random_contraction(2, 100 + s)).unwrap())
            .collect();
        let combined = lcu_combine(&enc, &[ONE; 4]).unwrap();

        let term_dim = enc[0].total_dim();
        let mut select = ComplexMatrix::zeros(4 * term_dim, 4 * term_dim);
        for (j, e) in enc.iter().enumerate() {
            select.set_block(j * term_dim, j * term_dim, e.unitary());
        }
        let h2 = hadamard_tensor(2).kron(&ComplexMatrix::identity(term_dim));
        let expect = h2.mul(&select).mul(&h2);
        assert!(spectral_norm(&combined.unitary().sub(&expect)).unwrap() < 1e-13);
    }

    #[test]
    fn lcu_pads_to_power_of_two() {
        let encs: Vec<BlockEncoding> = (0..3)
            .map(|s| dilate_hermitian(&random_contraction(2, 200 + s)).unwrap())
            .collect();
        let w = [ONE, Complex::new(2.0, 0.0), Complex::new(-1.0, 0.0)];
        let combined = lcu_combine(&encs, &w).unwrap();
        let mut expect = ComplexMatrix::zeros(2, 2);
        for (e, wj) in encs.iter().zip(&w) {
            expect = expect.add(&e.encoded_block().scale(wj / Complex::new(4.0, 0.0)));
        }
        assert!(spectral_norm(&combined.encoded_block().sub(&expect)).unwrap() < 1e-12);
        // ceil(log2 3) = 2 extra combine qubits
        assert_eq!(combined.ancilla_qubits(), 1 + 2);
    }

    #[test]
    fn lcu_rejections() {
        let e1 = dilate_hermitian(&random_contraction(2, 1)).unwrap();
        let e2 = dilate_hermitian(&random_contraction(4, 2)).unwrap();
        assert!(matches!(
            lcu_combine(&[e1.clone(), e2], &[ONE, ONE]),
            Err(CoreError::DimensionMismatch(_))
        ));
        assert!(lcu_combine(&[], &[]).is_err());
        assert!(lcu_combine(&[e1.clone(), e1], &[ONE, ZERO]).is_err());
    }

    #[test]
    fn product_identity_is_neutral() {
        let b = dilate_hermitian(&random_contraction(2, 31)).unwrap();
        let id = BlockEncoding::new(ComplexMatrix::identity(2), 0, 1, 1.0, 0.0).unwrap();
        let prod = product_encode(&id, &b).unwrap();
        assert!(
            spectral_norm(&prod.encoded_block().sub(&b.encoded_block())).unwrap() < 1e-12
        );
    }

    #[test]
    fn product_of_diagonal_dilations() {
        let a = real_diag(&[0.5, 0.5]);
        let b = real_diag(&[0.4, -0.4]);
        let prod = product_encode(&dilate_hermitian(&a).unwrap(), &dilate_hermitian(&b).unwrap())
            .unwrap();
        let expect = real_diag(&[0.2, -0.2]);
        assert!(spectral_norm(&prod.encoded_block().sub(&expect)).unwrap() < 1e-12);
        assert_eq!(prod.ancilla_qubits(), 2);
    }

    #[test]
    fn product_matches_direct_product_two_qubits() {
        let a = random_contraction(4, 41);
        let b = random_contraction(4, 47);
        let prod = product_encode(&dilate_hermitian(&a).unwrap(), &dilate_hermitian(&b).unwrap())
            .unwrap();
        assert!(spectral_norm(&prod.encoded_block().sub(&a.mul(&b))).unwrap() < 1e-10);
    }

    #[test]
    fn product_associative_at_block_level() {
        let encs: Vec<BlockEncoding> = (0..3)
            .map(|s| dilate_hermitian(&random_contraction(2, 300 + s)).unwrap())
            .collect();
        let left = product_encode(&product_encode(&encs[0], &encs[1]).unwrap(), &encs[2]).unwrap();
        let right = product_encode(&encs[0], &product_encode(&encs[1], &encs[2]).unwrap()).unwrap();
        assert!(
            spectral_norm(&left.encoded_block().sub(&right.encoded_block())).unwrap() < 1e-9
        );
    }

    #[test]
    fn constructed_encodings_satisfy_invariants() {
        for seed in 0..4 {
            let be = dilate_hermitian(&random_contraction(4, 400 + seed)).unwrap();
            assert!(check_unitary(be.unitary()).unwrap() <= UNITARITY_TOL);
            let norm = spectral_norm(&be.encoded_block()).unwrap();
            assert!(norm / be.scale() <= 1.0 + 1e-9);
        }
    }
}
