//! Hamiltonian simulation: approximate `e^{-iHT}` as the (1, -i) combination
//! of ensemble-averaged cos and sin blocks, with post-selected state
//! preparation and generalized-Hadamard observable estimation.

use num_complex::Complex;

use crate::block_encoding::{dilate_hermitian, encoded_block, BlockEncoding};
use crate::ensemble::{ensemble_average_block, EnsembleResult, NoisyQspSampler, SNR_FLOOR};
use crate::error::{CoreError, Result};
use crate::estimation::{
    estimate_qsp_observable, hadamard_distribution_block, ObservableEstimate, OUTCOME_POSITION,
};
use crate::noise::{attenuation_factor, NoiseModel, StreamKey};
use crate::numerics::{
    matfunc_hermitian, spectral_norm, ComplexMatrix, StateVector, C64, HERMITICITY_TOL,
};
use crate::polyapprox::{trig_approx, CertifiedApproximant};
use crate::qsp::{solve_phase_factors, PhaseFactorSequence};

use super::{repeat_until_success, validate_budgets, PostSelectStats};

/// Simulate `e^{-iHT}` on `psi0` to total accuracy `eps` (balanced split)
/// with confidence `1 - delta` under the given phase-noise model.
#[derive(Debug, Clone)]
pub struct HamSimProblem {
    pub hamiltonian: ComplexMatrix,
    pub time: f64,
    pub initial_state: StateVector,
    pub eps: f64,
    pub delta: f64,
    pub model: NoiseModel,
    norm: f64,
}

impl HamSimProblem {
    pub fn new(
        hamiltonian: ComplexMatrix,
        time: f64,
        initial_state: StateVector,
        eps: f64,
        delta: f64,
        model: NoiseModel,
    ) -> Result<Self> {
        validate_budgets(eps, delta)?;
        model.validate()?;
        let defect = hamiltonian.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(CoreError::NotHermitian {
                defect,
                tol: HERMITICITY_TOL,
            });
        }
        if hamiltonian.rows() != initial_state.dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "Hamiltonian dimension {} vs state dimension {}",
                hamiltonian.rows(),
                initial_state.dim()
            )));
        }
        if (initial_state.norm() - 1.0).abs() > 1e-10 {
            return Err(CoreError::InvalidParameter(
                "initial state must be normalized".into(),
            ));
        }
        let norm = spectral_norm(&hamiltonian)?;
        if !(norm * time).is_finite() {
            return Err(CoreError::InvalidParameter(
                "|H| T must be finite".into(),
            ));
        }
        Ok(Self {
            hamiltonian,
            time,
            initial_state,
            eps,
            delta,
            model,
            norm,
        })
    }

    pub fn hamiltonian_norm(&self) -> f64 {
        self.norm
    }

    /// `beta = |H| T`, the phase range the trig approximants must cover.
    pub fn beta(&self) -> f64 {
        self.norm * self.time.abs()
    }
}

/// Solved approximants and phase factors for one Hamiltonian-simulation
/// problem; build once, then run many seeded trials against it.
pub struct HsimPipeline {
    prob: HamSimProblem,
    encoding: BlockEncoding,
    pub p_cos: CertifiedApproximant,
    pub p_sin: CertifiedApproximant,
    phi_cos: PhaseFactorSequence,
    phi_sin: PhaseFactorSequence,
    eps_alg: f64,
    evolution_oracle: ComplexMatrix,
}

impl HsimPipeline {
    pub fn new(prob: HamSimProblem) -> Result<Self> {
        let eps_alg = prob.eps / 2.0;
        // Each trig component certified to (eps_alg/2)/2; the combined block
        // error from the approximation is then at most eps_alg.
        let (p_cos, p_sin, _) = trig_approx(prob.beta(), eps_alg / 2.0)?;
        let tol = (eps_alg / 100.0).min(1e-8).max(1e-12);
        let phi_cos = solve_phase_factors(p_cos.polynomial(), tol)?;
        let phi_sin = solve_phase_factors(p_sin.polynomial(), tol)?;
        // Block-encode H / |H| by dilation; H = 0 encodes the zero matrix.
        let normalized = if prob.norm == 0.0 {
            ComplexMatrix::zeros(prob.hamiltonian.rows(), prob.hamiltonian.cols())
        } else {
            prob.hamiltonian.scale(Complex::new(1.0 / prob.norm, 0.0))
        };
        let encoding = dilate_hermitian(&normalized)?;
        let time = prob.time;
        let evolution_oracle =
            matfunc_hermitian(&prob.hamiltonian, |x| Complex::new(0.0, -x * time).exp())?;
        Ok(Self {
            prob,
            encoding,
            p_cos,
            p_sin,
            phi_cos,
            phi_sin,
            eps_alg,
            evolution_oracle,
        })
    }

    pub fn problem(&self) -> &HamSimProblem {
        &self.prob
    }

    pub fn eps_alg(&self) -> f64 {
        self.eps_alg
    }

    /// Query depth reported for one circuit: the larger of the two component
    /// sequence lengths.
    pub fn degree(&self) -> usize {
        self.phi_cos.len().max(self.phi_sin.len())
    }

    pub fn attenuation(&self) -> f64 {
        attenuation_factor(&self.prob.model).powi(self.degree() as i32)
    }

    /// `e^{-iHT}` from the eigendecomposition oracle.
    pub fn evolution_oracle(&self) -> &ComplexMatrix {
        &self.evolution_oracle
    }

    /// Per-component deflation factors that equalize the attenuation of the
    /// cos and sin ensembles at `c^{d_max}` (the expected attenuation a
    /// noisy identity pad of the missing depth would contribute).
    fn deflations(&self) -> (f64, f64) {
        let c = attenuation_factor(&self.prob.model);
        let d = self.degree() as i32;
        (
            c.powi(d - self.phi_cos.len() as i32),
            c.powi(d - self.phi_sin.len() as i32),
        )
    }

    /// Ensemble-average both trig components and combine with weights
    /// `(1, -i)/2`: the rescaled block approximates `e^{-iHT}/4`.
    pub fn encode(&self, pairs: usize, key: StreamKey) -> Result<EnsembleResult> {
        let res_cos = ensemble_average_block(
            &self.encoding,
            &self.phi_cos,
            &self.prob.model,
            pairs,
            key.derive(1),
        )?;
        let res_sin = ensemble_average_block(
            &self.encoding,
            &self.phi_sin,
            &self.prob.model,
            pairs,
            key.derive(2),
        )?;
        let (f_cos, f_sin) = self.deflations();
        let averaged_block = res_cos
            .averaged_block
            .scale(Complex::new(0.5 * f_cos, 0.0))
            .sub(&res_sin.averaged_block.scale(Complex::new(0.0, 0.5 * f_sin)));
        let rescale = self.attenuation();
        if rescale < SNR_FLOOR {
            return Err(CoreError::IllPosed {
                snr: rescale,
                floor: SNR_FLOOR,
            });
        }
        let reference = self.evolution_oracle.scale(Complex::new(0.25, 0.0));
        let error = spectral_norm(
            &averaged_block
                .scale(Complex::new(1.0 / rescale, 0.0))
                .sub(&reference),
        )?;
        Ok(EnsembleResult {
            averaged_block,
            sample_count: pairs,
            rescale,
            reference,
            error,
            query_depth: self.degree(),
            total_queries: res_cos.total_queries + res_sin.total_queries,
        })
    }

    /// Apply the averaged block to the initial state and post-select the
    /// ancillas onto zero, repeating until success or the analytic budget
    /// runs out. The exact per-attempt probability is the squared norm of
    /// the block image.
    pub fn prepare_state(
        &self,
        pairs: usize,
        key: StreamKey,
    ) -> Result<(StateVector, PostSelectStats)> {
        let res = self.encode(pairs, key.derive(10))?;
        let amp = res
            .averaged_block
            .apply(self.prob.initial_state.amplitudes());
        let success: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
        let c2d = self.attenuation().powi(2);
        let predicted = c2d / 128.0;
        let budget = PostSelectStats::repetition_budget(predicted, self.prob.delta);
        let stats = repeat_until_success(success, budget, predicted, key.derive(11))?;
        Ok((StateVector::normalized(amp)?, stats))
    }

    fn check_observable(&self, u_o: &BlockEncoding) -> Result<ComplexMatrix> {
        let o = encoded_block(u_o);
        let defect = o.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(CoreError::NotHermitian {
                defect,
                tol: HERMITICITY_TOL,
            });
        }
        let norm = spectral_norm(&o)?;
        if norm > 1.0 + 1e-9 {
            return Err(CoreError::NormExceedsOne { norm });
        }
        if o.rows() != self.prob.initial_state.dim() {
            return Err(CoreError::DimensionMismatch(
                "observable dimension does not match the state".into(),
            ));
        }
        Ok(o)
    }

    /// Estimate `<psi| e^{iHT} O e^{-iHT} |psi>` with the two-sided sandwich:
    /// per shot, two independent noisy samples of the combined evolution
    /// block form `O~ = E~_1† O E~_2`, each `E~_k` built from a cos pair and
    /// a sin pair (eight QSP samples per shot). The raw mean is divided by
    /// `c^{2d}/16`.
    pub fn observable(
        &self,
        u_o: &BlockEncoding,
        shots: usize,
        key: StreamKey,
    ) -> Result<ObservableEstimate> {
        use rayon::prelude::*;
        if shots == 0 {
            return Err(CoreError::InvalidParameter("shots must be positive".into()));
        }
        let o = self.check_observable(u_o)?;
        let c2d = self.attenuation().powi(2);
        if c2d < SNR_FLOOR {
            return Err(CoreError::IllPosed {
                snr: c2d,
                floor: SNR_FLOOR,
            });
        }
        let cos_sampler =
            NoisyQspSampler::new(&self.encoding, &self.phi_cos, self.prob.model)?;
        let sin_sampler =
            NoisyQspSampler::new(&self.encoding, &self.phi_sin, self.prob.model)?;
        let (f_cos, f_sin) = self.deflations();
        let psi = &self.prob.initial_state;
        let key_cos = key.derive(20);
        let key_sin = key.derive(21);

        let combined_sample = |sub: u64| -> ComplexMatrix {
            let cos_diag = cos_sampler.sample_real_pair_scalars(
                key_cos.with_sample(2 * sub),
                key_cos.with_sample(2 * sub + 1),
            );
            let sin_diag = sin_sampler.sample_real_pair_scalars(
                key_sin.with_sample(2 * sub),
                key_sin.with_sample(2 * sub + 1),
            );
            let diag: Vec<C64> = cos_diag
                .iter()
                .zip(&sin_diag)
                .map(|(c, s)| (c * f_cos - s * Complex::new(0.0, f_sin)) * 0.5)
                .collect();
            cos_sampler.assemble(&diag)
        };

        let outcomes: Vec<Result<i8>> = (0..shots as u64)
            .into_par_iter()
            .map(|shot| {
                let left = combined_sample(2 * shot);
                let right = combined_sample(2 * shot + 1);
                let block = left.adjoint().mul(&o).mul(&right);
                let (p_plus, p_minus, _) = hadamard_distribution_block(&block, psi)?;
                use rand::Rng;
                let u: f64 = key
                    .derive(22)
                    .with_sample(shot)
                    .with_position(OUTCOME_POSITION)
                    .rng()
                    .random();
                Ok(if u < p_plus {
                    1
                } else if u < p_plus + p_minus {
                    -1
                } else {
                    0
                })
            })
            .collect();
        let outcomes = outcomes.into_iter().collect::<Result<Vec<i8>>>()?;

        let m = outcomes.len();
        let sum: i64 = outcomes.iter().map(|&o| o as i64).sum();
        let raw_mean = sum as f64 / m as f64;
        let var = outcomes
            .iter()
            .map(|&o| (o as f64 - raw_mean).powi(2))
            .sum::<f64>()
            / (m - 1).max(1) as f64;
        let rescale = c2d / 16.0;

        let u = &self.evolution_oracle;
        let sandwiched = u.adjoint().mul(&o).mul(u);
        let applied = sandwiched.apply(psi.amplitudes());
        let reference: C64 = psi
            .amplitudes()
            .iter()
            .zip(&applied)
            .map(|(a, b)| a.conj() * b)
            .sum();

        Ok(ObservableEstimate {
            value: raw_mean / rescale,
            raw_mean,
            shots: m,
            rescale,
            reference: Some(reference.re),
            standard_error: var.sqrt() / (m as f64).sqrt() / rescale,
        })
    }

    /// The split estimator `<cos O cos> + <sin O sin>` (each term through
    /// the standard sandwich estimator on one trig component, scaled by 4).
    /// Exact only when `[H, O] = 0`; exposed for comparison against
    /// `observable`, which also captures the cross terms.
    pub fn observable_split(
        &self,
        u_o: &BlockEncoding,
        shots: usize,
        key: StreamKey,
    ) -> Result<ObservableEstimate> {
        self.check_observable(u_o)?;
        let est_cos = estimate_qsp_observable(
            &self.encoding,
            &self.phi_cos,
            u_o,
            &self.prob.initial_state,
            &self.prob.model,
            shots,
            key.derive(30),
        )?;
        let est_sin = estimate_qsp_observable(
            &self.encoding,
            &self.phi_sin,
            u_o,
            &self.prob.initial_state,
            &self.prob.model,
            shots,
            key.derive(31),
        )?;
        let value = 4.0 * (est_cos.value + est_sin.value);
        let standard_error =
            4.0 * (est_cos.standard_error.powi(2) + est_sin.standard_error.powi(2)).sqrt();

        let o = encoded_block(u_o);
        let t = self.prob.time;
        let cos_m = matfunc_hermitian(&self.prob.hamiltonian, |x| {
            Complex::new((x * t).cos(), 0.0)
        })?;
        let sin_m = matfunc_hermitian(&self.prob.hamiltonian, |x| {
            Complex::new((x * t).sin(), 0.0)
        })?;
        let psi = &self.prob.initial_state;
        let mut reference = 0.0;
        for part in [cos_m, sin_m] {
            let sandwiched = part.mul(&o).mul(&part);
            let applied = sandwiched.apply(psi.amplitudes());
            let val: C64 = psi
                .amplitudes()
                .iter()
                .zip(&applied)
                .map(|(a, b)| a.conj() * b)
                .sum();
            reference += val.re;
        }

        Ok(ObservableEstimate {
            value,
            raw_mean: est_cos.raw_mean + est_sin.raw_mean,
            shots: est_cos.shots + est_sin.shots,
            rescale: est_cos.rescale,
            reference: Some(reference),
            standard_error,
        })
    }
}

/// Ensemble-averaged block approximating `e^{-iHT}/4` after rescaling.
pub fn hsim_encode(prob: &HamSimProblem, pairs: usize, key: StreamKey) -> Result<EnsembleResult> {
    HsimPipeline::new(prob.clone())?.encode(pairs, key)
}

/// Prepare `e^{-iHT} |psi0>` by post-selection on the averaged block.
pub fn hsim_prepare_state(
    prob: &HamSimProblem,
    pairs: usize,
    key: StreamKey,
) -> Result<(StateVector, PostSelectStats)> {
    HsimPipeline::new(prob.clone())?.prepare_state(pairs, key)
}

/// Estimate `<psi| e^{iHT} O e^{-iHT} |psi>`.
pub fn hsim_observable(
    prob: &HamSimProblem,
    u_o: &BlockEncoding,
    shots: usize,
    key: StreamKey,
) -> Result<ObservableEstimate> {
    HsimPipeline::new(prob.clone())?.observable(u_o, shots, key)
}

/// The paper's cos/sin split estimator, exact only for `[H, O] = 0`.
pub fn hsim_observable_split(
    prob: &HamSimProblem,
    u_o: &BlockEncoding,
    shots: usize,
    key: StreamKey,
) -> Result<ObservableEstimate> {
    HsimPipeline::new(prob.clone())?.observable_split(u_o, shots, key)
}
