//! Ensemble averaging of noisy QSP circuits: each sample realizes a
//! block-encoding of a perturbed polynomial, the average over `2M` samples
//! (half of them conjugated) estimates `c^d p(A)`, and dividing out the
//! attenuation recovers the noiseless block.
//!
//! The simulation averages at block level rather than materializing the
//! `2M`-term LCU unitary, which is exact by the prepare-select-unprepare
//! algebra; the literal unitary is built only as a small-`M` correctness
//! witness. Blocks are evaluated per eigenvalue of the encoded matrix
//! (`P(A) = V P(Lambda) V†`, an identity for polynomials), which keeps the
//! per-sample cost at `O(d n)` scalars.

use num_complex::Complex;
use rayon::prelude::*;

use crate::block_encoding::{encoded_block, lcu_combine, BlockEncoding};
use crate::error::{CoreError, Result};
use crate::noise::{attenuation_factor, perturb_phases, NoiseModel, StreamKey};
use crate::numerics::{spectral_norm, ComplexMatrix, HermitianEigen, C64, ONE, ZERO};
use crate::qsp::{phase_pair, PhaseFactorSequence, QubitizedIterate};

/// Signal-to-noise floor below which rescaling by `1/c^d` is refused.
pub const SNR_FLOOR: f64 = 1e-6;

/// Largest pair count for which the explicit LCU unitary may be materialized.
pub const MAX_EXPLICIT_LCU_PAIRS: usize = 8;

/// Outcome of averaging `2M` noisy blocks.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    /// The averaged block `(1/2M) sum (sample_{2m-1} + sample_{2m}†)`.
    pub averaged_block: ComplexMatrix,
    /// Number of sample pairs `M` (the raw sample count is `2M`).
    pub sample_count: usize,
    /// Attenuation `c^d` divided out when rescaling.
    pub rescale: f64,
    /// Noiseless reference block the error is measured against.
    pub reference: ComplexMatrix,
    /// `| averaged_block / rescale - reference |` in spectral norm.
    pub error: f64,
    /// Circuit query depth per sample, from the instrumentation counter.
    pub query_depth: usize,
    /// Total iterate queries across all samples.
    pub total_queries: u64,
}

impl EnsembleResult {
    /// `averaged_block / rescale`, the mitigated estimate of the reference.
    pub fn rescaled_block(&self) -> ComplexMatrix {
        self.averaged_block
            .scale(Complex::new(1.0 / self.rescale, 0.0))
    }
}

/// Per-eigenvalue noisy QSP sampler over a fixed block-encoding.
///
/// Holds the eigendecomposition of the encoded Hermitian matrix; a sample
/// evaluates the scalar QSP product at every eigenvalue under one draw of
/// perturbed phases. Conjugating back with the eigenvectors reproduces the
/// qubitized circuit's block exactly (polynomials commute with conjugation).
pub struct NoisyQspSampler {
    eigen: HermitianEigen,
    xs: Vec<(f64, f64)>,
    phi: PhaseFactorSequence,
    model: NoiseModel,
}

impl NoisyQspSampler {
    pub fn new(be: &BlockEncoding, phi: &PhaseFactorSequence, model: NoiseModel) -> Result<Self> {
        if (be.scale() - 1.0).abs() > 1e-12 {
            return Err(CoreError::InvalidEncoding(format!(
                "noisy QSP sampling requires a scale-1 encoding, got {}",
                be.scale()
            )));
        }
        model.validate()?;
        let block = encoded_block(be);
        let eigen = crate::numerics::eigh(&block)?;
        if let Some(bad) = eigen.eigenvalues.iter().find(|l| l.abs() > 1.0 + 1e-9) {
            return Err(CoreError::NormExceedsOne { norm: bad.abs() });
        }
        let xs = eigen
            .eigenvalues
            .iter()
            .map(|&l| {
                let x = l.clamp(-1.0, 1.0);
                (x, (1.0 - x * x).max(0.0).sqrt())
            })
            .collect();
        Ok(Self {
            eigen,
            xs,
            phi: phi.clone(),
            model,
        })
    }

    pub fn depth(&self) -> usize {
        self.phi.len()
    }

    pub fn system_dim(&self) -> usize {
        self.xs.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.eigenvalues
    }

    pub fn attenuation(&self) -> f64 {
        attenuation_factor(&self.model).powi(self.phi.len() as i32)
    }

    /// Scalar QSP values at every eigenvalue for the given phases; the query
    /// counter is incremented once per iterate application.
    fn scalar_values(&self, phases: &[f64], queries: &mut u64) -> Vec<C64> {
        let mut cols: Vec<[C64; 2]> = self.xs.iter().map(|_| [ONE, ZERO]).collect();
        for &phi in phases {
            *queries += 1;
            let (ep, em) = phase_pair(phi);
            for (col, &(x, s)) in cols.iter_mut().zip(&self.xs) {
                let r0 = col[0] * x + col[1] * s;
                let r1 = col[0] * s - col[1] * x;
                *col = [ep * r0, em * r1];
            }
        }
        cols.into_iter().map(|c| c[0]).collect()
    }

    /// One noisy draw of `P~(lambda_i)` at all eigenvalues, plus the query
    /// count consumed.
    pub fn sample_scalars(&self, key: StreamKey) -> (Vec<C64>, u64) {
        let noisy = perturb_phases(&self.phi, &self.model, key);
        let mut queries = 0;
        let values = self.scalar_values(noisy.phases(), &mut queries);
        (values, queries)
    }

    /// Noiseless `P(lambda_i)`.
    pub fn noiseless_scalars(&self) -> Vec<C64> {
        let mut queries = 0;
        self.scalar_values(self.phi.phases(), &mut queries)
    }

    /// `V diag(values) V†` in the sampler's eigenbasis.
    pub fn assemble(&self, values: &[C64]) -> ComplexMatrix {
        let n = self.system_dim();
        let v = &self.eigen.eigenvectors;
        let mut scaled = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] = v[(i, j)] * values[j];
            }
        }
        scaled.mul(&v.adjoint())
    }

    /// One noisy block `P~(A)`.
    pub fn sample_block(&self, key: StreamKey) -> ComplexMatrix {
        let (values, _) = self.sample_scalars(key);
        self.assemble(&values)
    }

    /// `(sample_a + sample_b†)/2` from two independent keys; its mean over
    /// the noise is `c^d p(A)`.
    pub fn sample_real_pair(&self, key_a: StreamKey, key_b: StreamKey) -> ComplexMatrix {
        let (va, _) = self.sample_scalars(key_a);
        let (vb, _) = self.sample_scalars(key_b);
        let paired: Vec<C64> = va
            .iter()
            .zip(&vb)
            .map(|(a, b)| (a + b.conj()) * 0.5)
            .collect();
        self.assemble(&paired)
    }

    /// Same as `sample_real_pair` but on the scalar diagonal.
    pub fn sample_real_pair_scalars(&self, key_a: StreamKey, key_b: StreamKey) -> Vec<C64> {
        let (va, _) = self.sample_scalars(key_a);
        let (vb, _) = self.sample_scalars(key_b);
        va.iter()
            .zip(&vb)
            .map(|(a, b)| (a + b.conj()) * 0.5)
            .collect()
    }

    /// The noiseless real-part block `(P(A) + P(A)†)/2`.
    pub fn reference_block(&self) -> ComplexMatrix {
        let values: Vec<C64> = self
            .noiseless_scalars()
            .into_iter()
            .map(|p| Complex::new(p.re, 0.0))
            .collect();
        self.assemble(&values)
    }
}

/// One noisy realization of the encoded block of
/// `qubitize(U_A, perturb_phases(phi, model, key))`, computed through the
/// literal qubitized circuit.
pub fn sample_noisy_block(
    u_a: &BlockEncoding,
    phi: &PhaseFactorSequence,
    model: &NoiseModel,
    key: StreamKey,
) -> Result<ComplexMatrix> {
    let iterate = QubitizedIterate::new(u_a)?;
    let noisy = perturb_phases(phi, model, key);
    Ok(iterate.qsp_block(noisy.phases()))
}

/// Entrywise mean of `n` noisy blocks through the literal circuit path,
/// sample keys `key.with_sample(0..n)`.
pub fn mean_noisy_block(
    u_a: &BlockEncoding,
    phi: &PhaseFactorSequence,
    model: &NoiseModel,
    key: StreamKey,
    n: usize,
) -> Result<ComplexMatrix> {
    let iterate = QubitizedIterate::new(u_a)?;
    let dim = u_a.system_dim();
    let blocks: Vec<ComplexMatrix> = (0..n as u64)
        .into_par_iter()
        .map(|s| {
            let noisy = perturb_phases(phi, model, key.with_sample(s));
            iterate.qsp_block(noisy.phases())
        })
        .collect();
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for b in &blocks {
        acc = acc.add(b);
    }
    Ok(acc.scale(Complex::new(1.0 / n as f64, 0.0)))
}

/// Average `2M` independently noisy blocks, conjugating every second one,
/// and compare the rescaled result against the realized polynomial. Samples
/// use stream keys `key.with_sample(s)`, `s = 0..2M`; the result is
/// bit-identical for any degree of parallelism (fixed-index accumulation,
/// single sequential reduction).
pub fn ensemble_average_block(
    u_a: &BlockEncoding,
    phi: &PhaseFactorSequence,
    model: &NoiseModel,
    pairs: usize,
    key: StreamKey,
) -> Result<EnsembleResult> {
    if pairs == 0 {
        return Err(CoreError::InvalidParameter(
            "ensemble needs at least one sample pair".into(),
        ));
    }
    let sampler = NoisyQspSampler::new(u_a, phi, *model)?;
    let rescale = sampler.attenuation();
    if rescale < SNR_FLOOR {
        return Err(CoreError::IllPosed {
            snr: rescale,
            floor: SNR_FLOOR,
        });
    }
    let n_eig = sampler.system_dim();

    let samples: Vec<(Vec<C64>, u64)> = (0..(2 * pairs) as u64)
        .into_par_iter()
        .map(|s| sampler.sample_scalars(key.with_sample(s)))
        .collect();

    let mut diag = vec![ZERO; n_eig];
    let mut total_queries = 0u64;
    for (s, (values, queries)) in samples.iter().enumerate() {
        total_queries += queries;
        if s % 2 == 0 {
            for (d, v) in diag.iter_mut().zip(values) {
                *d += v;
            }
        } else {
            for (d, v) in diag.iter_mut().zip(values) {
                *d += v.conj();
            }
        }
    }
    let inv = Complex::new(1.0 / (2.0 * pairs as f64), 0.0);
    for d in &mut diag {
        *d *= inv;
    }

    let averaged_block = sampler.assemble(&diag);
    let reference = sampler.reference_block();
    let error = spectral_norm(
        &averaged_block
            .scale(Complex::new(1.0 / rescale, 0.0))
            .sub(&reference),
    )?;
    debug_assert!(spectral_norm(&averaged_block)? <= 1.0 + 1e-9);
    Ok(EnsembleResult {
        averaged_block,
        sample_count: pairs,
        rescale,
        reference,
        error,
        query_depth: phi.len(),
        total_queries,
    })
}

/// Correctness witness: the literal Hadamard-conjugated select unitary over
/// `2M` sample encodings (interleaved as `U~_1, V~_1, U~_2, V~_2, ...`, the
/// conjugated terms already daggered by the caller). Its corner equals the
/// arithmetic block average by the prepare-select-unprepare algebra.
pub fn explicit_lcu_average(samples: &[BlockEncoding]) -> Result<BlockEncoding> {
    let count = samples.len();
    if count < 2 || count % 2 != 0 {
        return Err(CoreError::InvalidParameter(format!(
            "explicit LCU expects an even number of encodings, got {count}"
        )));
    }
    let pairs = count / 2;
    if !crate::numerics::is_power_of_two(pairs) || pairs > MAX_EXPLICIT_LCU_PAIRS {
        return Err(CoreError::InvalidParameter(format!(
            "explicit LCU witness supports a power-of-two pair count up to \
             {MAX_EXPLICIT_LCU_PAIRS}, got {pairs}"
        )));
    }
    lcu_combine(samples, &vec![ONE; count])
}

/// Hoeffding ensemble size: `M = ceil(ln(2/delta) / (eps_imp c^d)^2)`.
pub fn ensemble_size_for(eps_imp: f64, delta: f64, c: f64, depth: usize) -> Result<usize> {
    if !(eps_imp > 0.0 && eps_imp < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "ensemble_size_for needs eps, delta in (0,1); got eps={eps_imp}, delta={delta}"
        )));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "attenuation factor c={c} must lie in (0, 1]"
        )));
    }
    let cd = c.powi(depth as i32);
    if cd < SNR_FLOOR {
        return Err(CoreError::IllPosed {
            snr: cd,
            floor: SNR_FLOOR,
        });
    }
    let m = ((2.0 / delta).ln() / (eps_imp * cd).powi(2)).ceil();
    Ok((m as usize).max(1))
}
