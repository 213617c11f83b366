//! Quantum linear systems: prepare `A^{-1}|b> / |A^{-1}|b>|` through the
//! certified odd inverse approximant and the noisy ensemble, and estimate
//! solution observables with the `(4 kappa / 3)^2` rescale.

use num_complex::Complex;

use crate::block_encoding::{dilate_hermitian, encoded_block, BlockEncoding};
use crate::ensemble::{ensemble_average_block, EnsembleResult};
use crate::error::{CoreError, Result};
use crate::estimation::{estimate_qsp_observable, ObservableEstimate};
use crate::noise::{attenuation_factor, NoiseModel, StreamKey};
use crate::numerics::{
    eigh, spectral_norm, ComplexMatrix, StateVector, C64, HERMITICITY_TOL,
};
use crate::polyapprox::{inverse_approx, CertifiedApproximant};
use crate::qsp::{solve_phase_factors, PhaseFactorSequence};

use super::{repeat_until_success, validate_budgets, PostSelectStats};

/// Solve `A x = b` for Hermitian `A`; the matrix is normalized to unit
/// spectral norm on ingest and its eigenvalues must stay outside the
/// forbidden band `(-1/kappa, 1/kappa)`.
#[derive(Debug, Clone)]
pub struct QLSPProblem {
    matrix: ComplexMatrix,
    pub rhs: StateVector,
    pub kappa: f64,
    pub eps: f64,
    pub delta: f64,
    pub model: NoiseModel,
    original_norm: f64,
}

impl QLSPProblem {
    pub fn new(
        matrix: ComplexMatrix,
        rhs: StateVector,
        kappa: f64,
        eps: f64,
        delta: f64,
        model: NoiseModel,
    ) -> Result<Self> {
        validate_budgets(eps, delta)?;
        model.validate()?;
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "condition number kappa = {kappa} must be at least 1"
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(CoreError::NotHermitian {
                defect,
                tol: HERMITICITY_TOL,
            });
        }
        if matrix.rows() != rhs.dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "matrix dimension {} vs state dimension {}",
                matrix.rows(),
                rhs.dim()
            )));
        }
        let original_norm = spectral_norm(&matrix)?;
        if original_norm == 0.0 {
            return Err(CoreError::InvalidParameter(
                "zero matrix is not invertible".into(),
            ));
        }
        let normalized = matrix.scale(Complex::new(1.0 / original_norm, 0.0));
        let eig = eigh(&normalized)?;
        let min_abs = eig
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, l| a.min(l.abs()));
        if min_abs == 0.0 {
            return Err(CoreError::InvalidParameter(
                "matrix is singular after normalization".into(),
            ));
        }
        let kappa_true = 1.0 / min_abs;
        if kappa < kappa_true * (1.0 - 0.01) {
            return Err(CoreError::SpectrumViolation(format!(
                "declared kappa {kappa} is below the actual condition number {kappa_true:.6}"
            )));
        }
        if min_abs < 1.0 / kappa - 1e-12 {
            return Err(CoreError::SpectrumViolation(format!(
                "eigenvalue of magnitude {min_abs:.6} lies inside the forbidden band \
                 (-1/{kappa}, 1/{kappa})"
            )));
        }
        Ok(Self {
            matrix: normalized,
            rhs,
            kappa,
            eps,
            delta,
            model,
            original_norm,
        })
    }

    /// The normalized system matrix (unit spectral norm).
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn original_norm(&self) -> f64 {
        self.original_norm
    }
}

/// Solved inverse approximant and phases for one linear-system problem.
pub struct QlspPipeline {
    prob: QLSPProblem,
    encoding: BlockEncoding,
    pub approximant: CertifiedApproximant,
    phi: PhaseFactorSequence,
    solution_oracle: Vec<C64>,
    solution_norm: f64,
}

impl QlspPipeline {
    pub fn new(prob: QLSPProblem) -> Result<Self> {
        // Proof parameterization: band error eps' = 3 eps / (8 kappa) keeps
        // the inverse-scale error below eps.
        let eps_prime = 3.0 * prob.eps / (8.0 * prob.kappa);
        let approximant = inverse_approx(prob.kappa, eps_prime)?;
        let tol = (eps_prime / 20.0).min(1e-6).max(1e-12);
        let phi = solve_phase_factors(approximant.polynomial(), tol)?;
        let encoding = dilate_hermitian(&prob.matrix)?;
        let inverse = crate::numerics::matfunc_hermitian(&prob.matrix, |x| {
            Complex::new(1.0 / x, 0.0)
        })?;
        let solution_oracle = inverse.apply(prob.rhs.amplitudes());
        let solution_norm = solution_oracle
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok(Self {
            prob,
            encoding,
            approximant,
            phi,
            solution_oracle,
            solution_norm,
        })
    }

    pub fn problem(&self) -> &QLSPProblem {
        &self.prob
    }

    pub fn degree(&self) -> usize {
        self.phi.len()
    }

    pub fn attenuation(&self) -> f64 {
        attenuation_factor(&self.prob.model).powi(self.degree() as i32)
    }

    /// Normalized oracle solution `A^{-1}|b> / |A^{-1}|b>|`.
    pub fn solution_state(&self) -> StateVector {
        StateVector::normalized(self.solution_oracle.clone()).unwrap()
    }

    pub fn encode(&self, pairs: usize, key: StreamKey) -> Result<EnsembleResult> {
        ensemble_average_block(&self.encoding, &self.phi, &self.prob.model, pairs, key)
    }

    /// Post-selected solution preparation. The per-attempt probability is
    /// the exact squared norm of the averaged block applied to `|b>`; the
    /// analytic lower bound is `(9/32) c^{2d} |A^{-1}b|^2 / kappa^2`.
    pub fn prepare_state(
        &self,
        pairs: usize,
        key: StreamKey,
    ) -> Result<(StateVector, PostSelectStats)> {
        let res = self.encode(pairs, key.derive(1))?;
        let amp = res.averaged_block.apply(self.prob.rhs.amplitudes());
        let success: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
        let c2d = self.attenuation().powi(2);
        let predicted =
            9.0 / 32.0 * c2d * (self.solution_norm / self.prob.kappa).powi(2);
        let budget = PostSelectStats::repetition_budget(predicted, self.prob.delta);
        let stats = repeat_until_success(success, budget, predicted, key.derive(2))?;
        Ok((StateVector::normalized(amp)?, stats))
    }

    /// Estimate `x† O x` for the unnormalized solution `x = A^{-1}|b>`:
    /// Algorithm-3 sandwich on the inverse polynomial, rescaled by
    /// `(4 kappa / 3)^2`.
    pub fn observable(
        &self,
        u_o: &BlockEncoding,
        shots: usize,
        key: StreamKey,
    ) -> Result<ObservableEstimate> {
        let base = estimate_qsp_observable(
            &self.encoding,
            &self.phi,
            u_o,
            &self.prob.rhs,
            &self.prob.model,
            shots,
            key,
        )?;
        let factor = (4.0 * self.prob.kappa / 3.0).powi(2);

        let o = encoded_block(u_o);
        let applied = o.apply(&self.solution_oracle);
        let reference: C64 = self
            .solution_oracle
            .iter()
            .zip(&applied)
            .map(|(a, b)| a.conj() * b)
            .sum();

        Ok(ObservableEstimate {
            value: base.value * factor,
            raw_mean: base.raw_mean,
            shots: base.shots,
            rescale: base.rescale / factor,
            reference: Some(reference.re),
            standard_error: base.standard_error * factor,
        })
    }
}

/// Prepare the normalized solution state by ensemble averaging and
/// post-selection.
pub fn qlsp_prepare_state(
    prob: &QLSPProblem,
    pairs: usize,
    key: StreamKey,
) -> Result<(StateVector, PostSelectStats)> {
    QlspPipeline::new(prob.clone())?.prepare_state(pairs, key)
}

/// Estimate `x† O x` for the unnormalized solution.
pub fn qlsp_observable(
    prob: &QLSPProblem,
    u_o: &BlockEncoding,
    shots: usize,
    key: StreamKey,
) -> Result<ObservableEstimate> {
    QlspPipeline::new(prob.clone())?.observable(u_o, shots, key)
}
