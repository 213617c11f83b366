//! Hadamard-test estimation for random non-unitary observables and the
//! hybrid observable estimator over noisy QSP samples.
//!
//! A shot draws a fresh random block, computes the exact three-outcome
//! distribution of the one-ancilla interference circuit, and samples one
//! categorical outcome. This is statistically identical to gate-level
//! simulation and matches the conditional-probability structure of the
//! analysis directly: conditioned on the sampled block the outcome law
//! varies, but the total law does not.

use num_complex::Complex;
use rayon::prelude::*;

use crate::block_encoding::{encoded_block, BlockEncoding};
use crate::ensemble::{NoisyQspSampler, SNR_FLOOR};
use crate::error::{CoreError, Result};
use crate::noise::{NoiseModel, StreamKey};
use crate::numerics::{spectral_norm, ComplexMatrix, StateVector, C64, HERMITICITY_TOL};
use crate::qsp::PhaseFactorSequence;

/// Stream-key position reserved for the categorical outcome draw; noise
/// draws use positions `0..d`.
pub const OUTCOME_POSITION: u64 = u64::MAX;

/// A measurement-averaged scalar estimate.
#[derive(Debug, Clone)]
pub struct ObservableEstimate {
    /// Final estimate after dividing by `rescale`.
    pub value: f64,
    /// Raw outcome mean before rescaling; always in `[-1, 1]`.
    pub raw_mean: f64,
    /// Number of shots.
    pub shots: usize,
    /// Divisor applied to the raw mean.
    pub rescale: f64,
    /// Oracle value for comparison, when the caller computed one.
    pub reference: Option<f64>,
    /// Standard error of `value` (sample std / sqrt(shots) / rescale).
    pub standard_error: f64,
}

impl ObservableEstimate {
    fn from_outcomes(outcomes: &[i8], rescale: f64) -> Self {
        let m = outcomes.len();
        let sum: i64 = outcomes.iter().map(|&o| o as i64).sum();
        let raw_mean = sum as f64 / m as f64;
        let var = outcomes
            .iter()
            .map(|&o| (o as f64 - raw_mean).powi(2))
            .sum::<f64>()
            / (m.saturating_sub(1)).max(1) as f64;
        ObservableEstimate {
            value: raw_mean / rescale,
            raw_mean,
            shots: m,
            rescale,
            reference: None,
            standard_error: var.sqrt() / (m as f64).sqrt() / rescale,
        }
    }

    pub fn with_reference(mut self, reference: f64) -> Self {
        self.reference = Some(reference);
        self
    }
}

fn check_state(psi: &StateVector) -> Result<()> {
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(CoreError::InvalidParameter(format!(
            "state must be normalized, norm is {}",
            psi.norm()
        )));
    }
    Ok(())
}

/// Exact outcome distribution `(p_plus, p_minus, p_zero)` of the interference
/// circuit for a fixed block `o` with `|o| <= 1`:
/// `p_± = |(I ± o)|psi>|^2 / 4`.
pub fn hadamard_distribution_block(
    o: &ComplexMatrix,
    psi: &StateVector,
) -> Result<(f64, f64, f64)> {
    check_state(psi)?;
    if o.rows() != psi.dim() || o.cols() != psi.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "block is {}x{}, state dimension {}",
            o.rows(),
            o.cols(),
            psi.dim()
        )));
    }
    let norm = spectral_norm(o)?;
    if norm > 1.0 + 1e-9 {
        return Err(CoreError::NormExceedsOne { norm });
    }
    let applied = o.apply(psi.amplitudes());
    let mut plus = 0.0;
    let mut minus = 0.0;
    for (a, &p) in applied.iter().zip(psi.amplitudes()) {
        plus += (p + a).norm_sqr();
        minus += (p - a).norm_sqr();
    }
    let p_plus = plus / 4.0;
    let p_minus = minus / 4.0;
    let p_zero = (1.0 - p_plus - p_minus).max(0.0);
    Ok((p_plus, p_minus, p_zero))
}

/// Distribution for a block-encoded observable.
pub fn hadamard_distribution(
    u_o: &BlockEncoding,
    psi: &StateVector,
) -> Result<(f64, f64, f64)> {
    hadamard_distribution_block(&encoded_block(u_o), psi)
}

/// Draw one outcome in `{+1, -1, 0}` from the exact distribution, using the
/// stream at `key`.
fn draw_outcome(p_plus: f64, p_minus: f64, key: StreamKey) -> i8 {
    use rand::Rng;
    let u: f64 = key.rng().random();
    if u < p_plus {
        1
    } else if u < p_plus + p_minus {
        -1
    } else {
        0
    }
}

/// A source of random blocks with `|O~| <= 1`, one per shot index.
pub trait BlockSampler: Sync {
    fn system_dim(&self) -> usize;
    fn sample(&self, shot: u64) -> ComplexMatrix;
}

/// Always the same block (the deterministic Hadamard test).
pub struct FixedBlockSampler {
    block: ComplexMatrix,
}

impl FixedBlockSampler {
    pub fn new(block: ComplexMatrix) -> Result<Self> {
        let norm = spectral_norm(&block)?;
        if norm > 1.0 + 1e-9 {
            return Err(CoreError::NormExceedsOne { norm });
        }
        Ok(Self { block })
    }

    pub fn from_encoding(u_o: &BlockEncoding) -> Result<Self> {
        Self::new(encoded_block(u_o))
    }
}

impl BlockSampler for FixedBlockSampler {
    fn system_dim(&self) -> usize {
        self.block.rows()
    }
    fn sample(&self, _shot: u64) -> ComplexMatrix {
        self.block.clone()
    }
}

/// `+base` or `-base` with equal probability; the expectation is zero.
pub struct SignFlipSampler {
    base: ComplexMatrix,
    key: StreamKey,
}

impl SignFlipSampler {
    pub fn new(base: ComplexMatrix, key: StreamKey) -> Result<Self> {
        let norm = spectral_norm(&base)?;
        if norm > 1.0 + 1e-9 {
            return Err(CoreError::NormExceedsOne { norm });
        }
        Ok(Self { base, key })
    }
}

impl BlockSampler for SignFlipSampler {
    fn system_dim(&self) -> usize {
        self.base.rows()
    }
    fn sample(&self, shot: u64) -> ComplexMatrix {
        use rand::Rng;
        let flip: bool = self.key.with_sample(shot).rng().random();
        if flip {
            self.base.scale(Complex::new(-1.0, 0.0))
        } else {
            self.base.clone()
        }
    }
}

/// Per-shot Hermitian pair `(P~_1(A) + P~_2(A)†)/2` from two fresh noisy QSP
/// samples; its expectation is `c^d p(A)`.
pub struct NoisyQspPairSampler {
    sampler: NoisyQspSampler,
    key: StreamKey,
}

impl NoisyQspPairSampler {
    pub fn new(
        u_a: &BlockEncoding,
        phi: &PhaseFactorSequence,
        model: NoiseModel,
        key: StreamKey,
    ) -> Result<Self> {
        Ok(Self {
            sampler: NoisyQspSampler::new(u_a, phi, model)?,
            key,
        })
    }

    pub fn attenuation(&self) -> f64 {
        self.sampler.attenuation()
    }

    pub fn reference_block(&self) -> ComplexMatrix {
        self.sampler.reference_block()
    }
}

impl BlockSampler for NoisyQspPairSampler {
    fn system_dim(&self) -> usize {
        self.sampler.system_dim()
    }
    fn sample(&self, shot: u64) -> ComplexMatrix {
        self.sampler.sample_real_pair(
            self.key.with_sample(2 * shot),
            self.key.with_sample(2 * shot + 1),
        )
    }
}

/// Randomized Hadamard test: draw a fresh block per shot, sample the exact
/// outcome law, average. Unbiased for `<psi| E O~ |psi>`; outcome draws use
/// the reserved position so they never collide with noise streams.
pub fn run_hadamard_test(
    sampler: &dyn BlockSampler,
    psi: &StateVector,
    shots: usize,
    key: StreamKey,
) -> Result<ObservableEstimate> {
    if shots == 0 {
        return Err(CoreError::InvalidParameter("shots must be positive".into()));
    }
    check_state(psi)?;
    let outcomes: Vec<Result<i8>> = (0..shots as u64)
        .into_par_iter()
        .map(|shot| {
            let block = sampler.sample(shot);
            let (p_plus, p_minus, _) = hadamard_distribution_block(&block, psi)?;
            Ok(draw_outcome(
                p_plus,
                p_minus,
                key.with_sample(shot).with_position(OUTCOME_POSITION),
            ))
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<i8>>>()?;
    Ok(ObservableEstimate::from_outcomes(&outcomes, 1.0))
}

/// Observable estimation over noisy QSP: per shot the block
/// `O~ = (1/4)(P~_1 + P~_2†) O (P~_3 + P~_4†)` is assembled from four
/// independent noisy samples, one Hadamard-test outcome is drawn, and the
/// final mean is divided by the deterministic `c^{2d}` (the realized noise
/// angles are unobservable, so the expectation version of the rescale is
/// used).
pub fn estimate_qsp_observable(
    u_a: &BlockEncoding,
    phi: &PhaseFactorSequence,
    u_o: &BlockEncoding,
    psi: &StateVector,
    model: &NoiseModel,
    shots: usize,
    key: StreamKey,
) -> Result<ObservableEstimate> {
    if shots == 0 {
        return Err(CoreError::InvalidParameter("shots must be positive".into()));
    }
    check_state(psi)?;
    let o = encoded_block(u_o);
    let defect = o.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(CoreError::NotHermitian {
            defect,
            tol: HERMITICITY_TOL,
        });
    }
    let o_norm = spectral_norm(&o)?;
    if o_norm > 1.0 + 1e-9 {
        return Err(CoreError::NormExceedsOne { norm: o_norm });
    }
    let sampler = NoisyQspSampler::new(u_a, phi, *model)?;
    let c2d = sampler.attenuation().powi(2);
    if c2d < SNR_FLOOR {
        return Err(CoreError::IllPosed {
            snr: c2d,
            floor: SNR_FLOOR,
        });
    }

    let outcomes: Vec<Result<i8>> = (0..shots as u64)
        .into_par_iter()
        .map(|shot| {
            let left = sampler.sample_real_pair(
                key.with_sample(4 * shot),
                key.with_sample(4 * shot + 1),
            );
            let right = sampler.sample_real_pair(
                key.with_sample(4 * shot + 2),
                key.with_sample(4 * shot + 3),
            );
            let block = left.mul(&o).mul(&right);
            let (p_plus, p_minus, _) = hadamard_distribution_block(&block, psi)?;
            Ok(draw_outcome(
                p_plus,
                p_minus,
                key.with_sample(shot).with_position(OUTCOME_POSITION),
            ))
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<i8>>>()?;

    // oracle through the realized polynomial
    let p_block = sampler.reference_block();
    let op = p_block.mul(&o).mul(&p_block);
    let applied = op.apply(psi.amplitudes());
    let reference: C64 = psi
        .amplitudes()
        .iter()
        .zip(&applied)
        .map(|(a, b)| a.conj() * b)
        .sum();

    Ok(ObservableEstimate::from_outcomes(&outcomes, c2d).with_reference(reference.re))
}

/// Shot budget `M = ceil(2 ln(2/delta) / (eps c^{d power/2})^2)`; `power`
/// selects the attenuation exponent (0 plain, 2 one-sided, 4 sandwich).
pub fn shots_for(eps: f64, delta: f64, c: f64, depth: usize, power: u32) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "shots_for needs eps, delta in (0,1); got eps={eps}, delta={delta}"
        )));
    }
    if !matches!(power, 0 | 2 | 4) {
        return Err(CoreError::InvalidParameter(format!(
            "power {power} must be 0, 2, or 4"
        )));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "attenuation factor c={c} must lie in (0, 1]"
        )));
    }
    let attenuated = eps * c.powi((depth as i32) * (power as i32) / 2);
    if attenuated < 1e-6 {
        return Err(CoreError::IllPosed {
            snr: attenuated,
            floor: 1e-6,
        });
    }
    let m = (2.0 * (2.0 / delta).ln() / attenuated.powi(2)).ceil();
    Ok((m as usize).max(1))
}
