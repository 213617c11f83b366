//! Ground-state preparation: QETU cosine block-encoding of the shifted and
//! scaled Hamiltonian, an even band-pass filter run through the noisy
//! ensemble, and post-selection onto the filtered state.

use num_complex::Complex;

use crate::block_encoding::{encoded_block, BlockEncoding};
use crate::ensemble::{ensemble_average_block, EnsembleResult};
use crate::error::{CoreError, Result};
use crate::estimation::{estimate_qsp_observable, ObservableEstimate};
use crate::noise::{attenuation_factor, NoiseModel, StreamKey};
use crate::numerics::{
    eigh, matfunc_hermitian, spectral_norm, ComplexMatrix, StateVector, C64, HERMITICITY_TOL,
};
use crate::polyapprox::{gsp_filter_approx, CertifiedApproximant};
use crate::qsp::{solve_phase_factors, PhaseFactorSequence};

use super::{repeat_until_success, validate_budgets, PostSelectStats};

/// One-ancilla block-encoding of `cos(H)` for Hermitian `H` with spectrum in
/// `(0, pi)`: Hadamard-sandwiched controlled evolution
/// `(H ⊗ I)(|0><0| ⊗ e^{iH} + |1><1| ⊗ e^{-iH})(H ⊗ I)`, whose corner is
/// `(e^{iH} + e^{-iH})/2` exactly. The evolution oracle itself is granted
/// (computed by eigendecomposition).
pub fn qetu_cosine_encoding(h: &ComplexMatrix) -> Result<BlockEncoding> {
    let defect = h.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(CoreError::NotHermitian {
            defect,
            tol: HERMITICITY_TOL,
        });
    }
    let eig = eigh(h)?;
    for &l in &eig.eigenvalues {
        if !(l > 0.0 && l < std::f64::consts::PI) {
            return Err(CoreError::SpectrumViolation(format!(
                "QETU needs the spectrum inside (0, pi); found eigenvalue {l}"
            )));
        }
    }
    let forward = eig.apply_function(|x| Complex::new(0.0, x).exp());
    let backward = eig.apply_function(|x| Complex::new(0.0, -x).exp());
    let n = h.rows();
    let dim = 2 * n;
    let half = Complex::new(0.5, 0.0);
    // (H ⊗ I) C (H ⊗ I) in block form: each quadrant is a signed half-sum.
    let sum = forward.add(&backward).scale(half);
    let diff = forward.sub(&backward).scale(half);
    let mut u = ComplexMatrix::zeros(dim, dim);
    u.set_block(0, 0, &sum);
    u.set_block(0, n, &diff);
    u.set_block(n, 0, &diff);
    u.set_block(n, n, &sum);
    let system_qubits = crate::block_encoding::system_qubits_for_dim(n)?;
    BlockEncoding::new(u, 1, system_qubits, 1.0, 0.0)
}

/// Prepare the ground state of a Hamiltonian whose spectrum has been shifted
/// and scaled into `(eta, 1 - eta)`, starting from an initial state with
/// overlap `gamma`.
#[derive(Debug, Clone)]
pub struct GSPProblem {
    hamiltonian: ComplexMatrix,
    pub initial_state: StateVector,
    pub mu: f64,
    pub gap: f64,
    pub eta: f64,
    pub gamma: f64,
    pub eps: f64,
    pub delta: f64,
    pub model: NoiseModel,
    /// Affine map `lambda -> scale * lambda + shift` applied at ingest.
    pub affine: (f64, f64),
    ground_state: StateVector,
    ground_energy: f64,
    first_excited: f64,
}

impl GSPProblem {
    /// Shift and scale a raw Hermitian matrix so its spectrum occupies
    /// `[2 eta, 1 - 2 eta]`, then derive `mu`, `Delta`, and `gamma` from the
    /// eigendecomposition.
    pub fn from_raw(
        raw: ComplexMatrix,
        initial_state: StateVector,
        eta: f64,
        eps: f64,
        delta: f64,
        model: NoiseModel,
    ) -> Result<Self> {
        validate_budgets(eps, delta)?;
        model.validate()?;
        if !(eta > 0.0 && eta < 0.25) {
            return Err(CoreError::InvalidParameter(format!(
                "eta = {eta} must lie in (0, 0.25)"
            )));
        }
        let defect = raw.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(CoreError::NotHermitian {
                defect,
                tol: HERMITICITY_TOL,
            });
        }
        if raw.rows() != initial_state.dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "Hamiltonian dimension {} vs state dimension {}",
                raw.rows(),
                initial_state.dim()
            )));
        }
        if (initial_state.norm() - 1.0).abs() > 1e-10 {
            return Err(CoreError::InvalidParameter(
                "initial state must be normalized".into(),
            ));
        }
        let eig = eigh(&raw)?;
        let lo_raw = eig.eigenvalues[0];
        let hi_raw = *eig.eigenvalues.last().unwrap();
        if hi_raw - lo_raw < 1e-12 {
            return Err(CoreError::SpectrumViolation(
                "spectrum is a single point; no gap to filter".into(),
            ));
        }
        let scale = (1.0 - 4.0 * eta) / (hi_raw - lo_raw);
        let shift = 2.0 * eta - scale * lo_raw;
        let hamiltonian = {
            let scaled = raw.scale(Complex::new(scale, 0.0));
            let mut m = scaled;
            for i in 0..m.rows() {
                m[(i, i)] += Complex::new(shift, 0.0);
            }
            m
        };
        let mapped: Vec<f64> = eig.eigenvalues.iter().map(|l| scale * l + shift).collect();
        let ground_energy = mapped[0];
        let first_excited = mapped
            .iter()
            .copied()
            .find(|&l| l > ground_energy + 1e-10)
            .ok_or_else(|| {
                CoreError::SpectrumViolation("ground energy is degenerate".into())
            })?;
        let gap = first_excited - ground_energy;
        let mu = 0.5 * (ground_energy + first_excited);

        let n = raw.rows();
        let ground_amps: Vec<C64> = (0..n).map(|i| eig.eigenvectors[(i, 0)]).collect();
        let ground_state = StateVector::new(ground_amps)?;
        let gamma = ground_state.fidelity(&initial_state);
        if gamma <= 1e-6 {
            return Err(CoreError::InvalidParameter(format!(
                "initial overlap gamma = {gamma:.3e} is too small"
            )));
        }
        Ok(Self {
            hamiltonian,
            initial_state,
            mu,
            gap,
            eta,
            gamma,
            eps,
            delta,
            model,
            affine: (scale, shift),
            ground_state,
            ground_energy,
            first_excited,
        })
    }

    /// The shifted and scaled Hamiltonian.
    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    /// Ground state from the eigendecomposition oracle.
    pub fn ground_state(&self) -> &StateVector {
        &self.ground_state
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn first_excited(&self) -> f64 {
        self.first_excited
    }
}

/// Solved filter and phases for one ground-state problem.
pub struct GspPipeline {
    prob: GSPProblem,
    encoding: BlockEncoding,
    pub filter: CertifiedApproximant,
    phi: PhaseFactorSequence,
    eps_prime: f64,
}

impl GspPipeline {
    pub fn new(prob: GSPProblem) -> Result<Self> {
        let encoding = qetu_cosine_encoding(&prob.hamiltonian)?;
        // Filter band tolerance eps' = eps/2 bounds the block error by eps.
        let eps_prime = prob.eps / 2.0;
        let filter = gsp_filter_approx(prob.mu, prob.gap, prob.eta, eps_prime)?;
        let tol = (eps_prime / 20.0).min(1e-6).max(1e-12);
        let phi = solve_phase_factors(filter.polynomial(), tol)?;
        Ok(Self {
            prob,
            encoding,
            filter,
            phi,
            eps_prime,
        })
    }

    pub fn problem(&self) -> &GSPProblem {
        &self.prob
    }

    pub fn degree(&self) -> usize {
        self.phi.len()
    }

    pub fn eps_prime(&self) -> f64 {
        self.eps_prime
    }

    pub fn attenuation(&self) -> f64 {
        attenuation_factor(&self.prob.model).powi(self.degree() as i32)
    }

    /// The QETU cosine encoding the filter runs on.
    pub fn cosine_encoding(&self) -> &BlockEncoding {
        &self.encoding
    }

    /// Ensemble-averaged block approximating `c^d F(cos H)`.
    pub fn encode(&self, pairs: usize, key: StreamKey) -> Result<EnsembleResult> {
        ensemble_average_block(&self.encoding, &self.phi, &self.prob.model, pairs, key)
    }

    /// Apply the averaged filter block to the initial state and post-select;
    /// the analytic lower bound on the per-attempt success probability is
    /// `c^{2d} gamma^2 / 2`.
    pub fn prepare_state(
        &self,
        pairs: usize,
        key: StreamKey,
    ) -> Result<(StateVector, PostSelectStats)> {
        let res = self.encode(pairs, key.derive(1))?;
        let amp = res
            .averaged_block
            .apply(self.prob.initial_state.amplitudes());
        let success: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
        let c2d = self.attenuation().powi(2);
        let predicted = c2d * self.prob.gamma.powi(2) / 2.0;
        let budget = PostSelectStats::repetition_budget(predicted, self.prob.delta);
        let stats = repeat_until_success(success, budget, predicted, key.derive(2))?;
        Ok((StateVector::normalized(amp)?, stats))
    }

    /// Estimate `<psi_0| O |psi_0>`: Algorithm-3 sandwich on the filter,
    /// rescaled by `1/gamma^2`.
    pub fn observable(
        &self,
        u_o: &BlockEncoding,
        shots: usize,
        key: StreamKey,
    ) -> Result<ObservableEstimate> {
        if self.prob.gamma < 1e-3 {
            return Err(CoreError::InvalidParameter(format!(
                "overlap gamma = {} is too small for the 1/gamma^2 rescale",
                self.prob.gamma
            )));
        }
        let base = estimate_qsp_observable(
            &self.encoding,
            &self.phi,
            u_o,
            &self.prob.initial_state,
            &self.prob.model,
            shots,
            key,
        )?;
        let factor = 1.0 / self.prob.gamma.powi(2);

        let o = encoded_block(u_o);
        let applied = o.apply(self.prob.ground_state.amplitudes());
        let reference: C64 = self
            .prob
            .ground_state
            .amplitudes()
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

/// Prepare the ground state by filtered post-selection.
pub fn gsp_prepare_state(
    prob: &GSPProblem,
    pairs: usize,
    key: StreamKey,
) -> Result<(StateVector, PostSelectStats)> {
    GspPipeline::new(prob.clone())?.prepare_state(pairs, key)
}

/// Estimate a ground-state observable.
pub fn gsp_observable(
    prob: &GSPProblem,
    u_o: &BlockEncoding,
    shots: usize,
    key: StreamKey,
) -> Result<ObservableEstimate> {
    GspPipeline::new(prob.clone())?.observable(u_o, shots, key)
}

/// The QETU algebraic identity: the Hadamard-sandwich corner equals
/// `(e^{iH} + e^{-iH})/2` entry for entry.
pub fn qetu_identity_defect(h: &ComplexMatrix) -> Result<f64> {
    let be = qetu_cosine_encoding(h)?;
    let half_sum = matfunc_hermitian(h, |x| {
        (Complex::new(0.0, x).exp() + Complex::new(0.0, -x).exp()) * 0.5
    })?;
    spectral_norm(&encoded_block(&be).sub(&half_sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(master: u64) -> StreamKey {
        StreamKey::new(master, 0, 0, 0)
    }

    #[test]
    fn qetu_diagonal_cases() {
        let h = ComplexMatrix::diagonal(&[Complex::new(std::f64::consts::FRAC_PI_2, 0.0)]);
        let be = qetu_cosine_encoding(&h).unwrap();
        assert!(encoded_block(&be)[(0, 0)].norm() < 1e-14);

        let h2 = ComplexMatrix::diagonal(&[Complex::new(0.4, 0.0), Complex::new(2.2, 0.0)]);
        let be2 = qetu_cosine_encoding(&h2).unwrap();
        let block = encoded_block(&be2);
        assert!((block[(0, 0)].re - 0.4f64.cos()).abs() < 1e-13);
        assert!((block[(1, 1)].re - 2.2f64.cos()).abs() < 1e-13);
    }

    #[test]
    fn qetu_matches_matfunc_on_random_two_qubit() {
        // random Hermitian with spectrum pushed into (0.2, 2.9)
        let base = crate::numerics::ComplexMatrix::from_fn(4, 4, |i, j| {
            Complex::new(
                ((i * 7 + j * 3) as f64 * 0.37).sin() * 0.2,
                ((i as f64 - j as f64) * 0.83).sin() * 0.15,
            )
        });
        let herm = base.add(&base.adjoint()).scale(Complex::new(0.5, 0.0));
        let eig = eigh(&herm).unwrap();
        let lo = eig.eigenvalues[0];
        let hi = eig.eigenvalues.last().unwrap();
        let scale = 2.7 / (hi - lo);
        let mut h = herm.scale(Complex::new(scale, 0.0));
        let shift = 0.2 - scale * lo;
        for i in 0..4 {
            h[(i, i)] += Complex::new(shift, 0.0);
        }
        let be = qetu_cosine_encoding(&h).unwrap();
        let oracle = matfunc_hermitian(&h, |x| Complex::new(x.cos(), 0.0)).unwrap();
        assert!(spectral_norm(&encoded_block(&be).sub(&oracle)).unwrap() <= 1e-12);
        assert!(qetu_identity_defect(&h).unwrap() <= 1e-12);
    }

    #[test]
    fn qetu_rejects_out_of_range_spectrum() {
        let h = ComplexMatrix::diagonal(&[Complex::new(-0.1, 0.0), Complex::new(1.0, 0.0)]);
        assert!(matches!(
            qetu_cosine_encoding(&h),
            Err(CoreError::SpectrumViolation(_))
        ));
    }

    fn test_problem(model: NoiseModel, eps: f64) -> GSPProblem {
        // 2-qubit Hamiltonian with a healthy gap and gamma around 0.77
        let raw = ComplexMatrix::from_rows(&[
            vec![Complex::new(0.0, 0.0), Complex::new(0.2, 0.1), Complex::new(0.0, 0.0), Complex::new(0.05, 0.0)],
            vec![Complex::new(0.2, -0.1), Complex::new(1.0, 0.0), Complex::new(0.1, 0.0), Complex::new(0.0, 0.0)],
            vec![Complex::new(0.0, 0.0), Complex::new(0.1, 0.0), Complex::new(1.6, 0.0), Complex::new(0.0, 0.1)],
            vec![Complex::new(0.05, 0.0), Complex::new(0.0, 0.0), Complex::new(0.0, -0.1), Complex::new(2.2, 0.0)],
        ])
        .unwrap();
        let eig = eigh(&raw).unwrap();
        // initial state: ground with admixture
        let n = 4;
        let mut amps = vec![crate::numerics::ZERO; n];
        for i in 0..n {
            amps[i] = eig.eigenvectors[(i, 0)] * 0.8
                + eig.eigenvectors[(i, 1)] * 0.5
                + eig.eigenvectors[(i, 2)] * Complex::new(0.0, 0.33);
        }
        let initial = StateVector::normalized(amps).unwrap();
        GSPProblem::from_raw(raw, initial, 0.1, eps, 0.05, model).unwrap()
    }

    #[test]
    fn ingest_records_consistent_band_data() {
        let prob = test_problem(NoiseModel::None, 0.05);
        assert!(prob.ground_energy() > prob.eta);
        assert!(prob.first_excited() < 1.0 - prob.eta);
        assert!((prob.gap - (prob.first_excited() - prob.ground_energy())).abs() < 1e-12);
        assert!(prob.gamma > 0.5);
        // affine map sends the raw spectrum to [2 eta, 1 - 2 eta]
        assert!((prob.ground_energy() - 0.2).abs() < 1e-10);
    }

    #[test]
    fn noiseless_filter_recovers_ground_state() {
        let prob = test_problem(NoiseModel::None, 0.05);
        let pipeline = GspPipeline::new(prob.clone()).unwrap();
        let (state, stats) = pipeline.prepare_state(1, key(3)).unwrap();
        let fid = state.fidelity(prob.ground_state());
        assert!(fid >= 1.0 - 2.0 * prob.eps, "fidelity {fid}");
        assert!(stats.exact_probability >= stats.predicted_lower_bound);
    }

    #[test]
    fn degenerate_case_gamma_one() {
        // initial state = ground state exactly
        let raw = ComplexMatrix::diagonal(&[
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(1.5, 0.0),
            Complex::new(2.0, 0.0),
        ]);
        let initial = StateVector::basis(4, 0).unwrap();
        let prob =
            GSPProblem::from_raw(raw, initial, 0.1, 0.05, 0.05, NoiseModel::None).unwrap();
        assert!((prob.gamma - 1.0).abs() < 1e-12);
        let (state, _) = gsp_prepare_state(&prob, 1, key(4)).unwrap();
        assert!(state.fidelity(prob.ground_state()) >= 1.0 - 2.0 * prob.eps);
    }

    #[test]
    fn noisy_run_meets_success_bound() {
        let prob = test_problem(NoiseModel::Gaussian { variance: 0.005 }, 0.05);
        let pipeline = GspPipeline::new(prob.clone()).unwrap();
        let (state, stats) = pipeline.prepare_state(500, key(5)).unwrap();
        assert!(stats.exact_probability >= stats.predicted_lower_bound);
        assert!(state.fidelity(prob.ground_state()) >= 1.0 - 2.0 * prob.eps);
        assert!(stats.amplified_budget(prob.delta) <= PostSelectStats::repetition_budget(stats.predicted_lower_bound, prob.delta));
    }

    #[test]
    fn observable_identity_and_projector() {
        let prob = test_problem(NoiseModel::None, 0.05);
        let pipeline = GspPipeline::new(prob.clone()).unwrap();
        let id = BlockEncoding::new(ComplexMatrix::identity(4), 0, 2, 1.0, 0.0).unwrap();
        let est = pipeline.observable(&id, 30_000, key(6)).unwrap();
        assert!((est.reference.unwrap() - 1.0).abs() < 1e-12);
        assert!(
            (est.value - 1.0).abs() <= 3.0 * est.standard_error + prob.eps,
            "value {} (SE {})",
            est.value,
            est.standard_error
        );

        // projector onto the ground state of the diagonal analog
        let raw = ComplexMatrix::diagonal(&[
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(1.5, 0.0),
            Complex::new(2.0, 0.0),
        ]);
        let initial = StateVector::normalized(vec![
            Complex::new(0.9, 0.0),
            Complex::new(0.3, 0.0),
            Complex::new(0.2, 0.1),
            Complex::new(0.2, 0.0),
        ])
        .unwrap();
        let dprob =
            GSPProblem::from_raw(raw, initial, 0.1, 0.05, 0.05, NoiseModel::None).unwrap();
        let dpipe = GspPipeline::new(dprob.clone()).unwrap();
        let mut proj = ComplexMatrix::zeros(4, 4);
        proj[(0, 0)] = crate::numerics::ONE;
        let u_proj = crate::block_encoding::dilate_hermitian(&proj).unwrap();
        let est = dpipe.observable(&u_proj, 30_000, key(7)).unwrap();
        assert!((est.reference.unwrap() - 1.0).abs() < 1e-12);
        assert!(
            (est.value - 1.0).abs() <= 3.0 * est.standard_error + dprob.eps,
            "projector value {} (SE {})",
            est.value,
            est.standard_error
        );
    }

    #[test]
    fn rejects_tiny_gamma_at_observable_time() {
        let raw = ComplexMatrix::diagonal(&[
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(1.5, 0.0),
            Complex::new(2.0, 0.0),
        ]);
        // overlap 5e-4 with the ground state
        let initial = StateVector::normalized(vec![
            Complex::new(5e-4, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
        ])
        .unwrap();
        let prob =
            GSPProblem::from_raw(raw, initial, 0.1, 0.05, 0.05, NoiseModel::None).unwrap();
        let pipeline = GspPipeline::new(prob).unwrap();
        let id = BlockEncoding::new(ComplexMatrix::identity(4), 0, 2, 1.0, 0.0).unwrap();
        assert!(pipeline.observable(&id, 100, key(8)).is_err());
    }
}
