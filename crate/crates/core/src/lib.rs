//! Ensemble-based quantum signal processing at desk scale.
//!
//! Random additive errors in the QSP phase rotations attenuate the realized
//! polynomial block by `c^d` with `c = E[cos e]`; averaging an ensemble of
//! independently noisy circuits and rescaling recovers the noiseless block.
//! This crate implements the whole pipeline numerically: dense linear
//! algebra, block-encodings, qubitized QSP circuits, the noise model and its
//! keyed sampling streams, the ensemble estimators, randomized Hadamard-test
//! observable estimation, certified polynomial approximants, and the three
//! end-to-end applications (Hamiltonian simulation, linear systems,
//! ground-state preparation).

pub mod applications;
pub mod block_encoding;
pub mod ensemble;
pub mod error;
pub mod estimation;
pub mod noise;
pub mod numerics;
pub mod polyapprox;
pub mod qsp;

pub use block_encoding::{dilate_hermitian, encoded_block, lcu_combine, product_encode, BlockEncoding};
pub use error::{CoreError, Result};
pub use noise::{attenuation_factor, perturb_phases, sample_error, NoiseModel, StreamKey};
pub use numerics::{
    check_unitary, matfunc_hermitian, spectral_norm, ComplexMatrix, StateVector, C64,
};
pub use polyapprox::{chebyshev_fit, gsp_filter_approx, inverse_approx, trig_approx, CertifiedApproximant};
pub use qsp::{
    qsp_unitary_scalar, qubitize, real_part_encoding, signal_operator, solve_phase_factors,
    Parity, PhaseFactorSequence, TargetPolynomial,
};
