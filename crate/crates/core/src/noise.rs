//! Additive phase-error distributions and the attenuation factor `c = E[cos e]`.
//!
//! All supported distributions are even with zero mean, so `E[sin e] = 0` and
//! the expected noisy rotation is the ideal one shrunk by `c`. Draws come from
//! keyed streams: every (master seed, experiment, sample, position) tuple owns
//! an independent generator, so results are bit-reproducible regardless of
//! evaluation order or parallelism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::qsp::PhaseFactorSequence;

/// Address of one random stream in the keyed hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master: u64,
    pub experiment: u64,
    pub sample: u64,
    pub position: u64,
}

impl StreamKey {
    pub fn new(master: u64, experiment: u64, sample: u64, position: u64) -> Self {
        Self {
            master,
            experiment,
            sample,
            position,
        }
    }

    pub fn with_sample(self, sample: u64) -> Self {
        Self { sample, ..self }
    }

    pub fn with_position(self, position: u64) -> Self {
        Self { position, ..self }
    }

    /// Independent sub-stream namespace: mixes `salt` into the experiment
    /// field so nested consumers (e.g. the cos and sin ensembles of one run)
    /// never share draws.
    pub fn derive(self, salt: u64) -> Self {
        let mut z = self
            .experiment
            .wrapping_add(salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        Self {
            experiment: z ^ (z >> 31),
            ..self
        }
    }

    /// Generator owned by this key alone.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[0..8].copy_from_slice(&self.master.to_le_bytes());
        seed[8..16].copy_from_slice(&self.experiment.to_le_bytes());
        seed[16..24].copy_from_slice(&self.sample.to_le_bytes());
        seed[24..32].copy_from_slice(&self.position.to_le_bytes());
        ChaCha8Rng::from_seed(seed)
    }
}

/// Even, zero-mean distribution of the additive phase error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Centered Gaussian with variance `nu` (radians squared).
    Gaussian { variance: f64 },
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
    /// `+magnitude` or `-magnitude` with equal probability.
    TwoPoint { magnitude: f64 },
    /// No error; every draw is zero.
    None,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64| {
            Err(CoreError::InvalidParameter(format!(
                "noise parameter {name} = {v} must be finite and non-negative"
            )))
        };
        match *self {
            NoiseModel::Gaussian { variance } if !(variance.is_finite() && variance >= 0.0) => {
                bad("variance", variance)
            }
            NoiseModel::Uniform { half_width } if !(half_width.is_finite() && half_width >= 0.0) => {
                bad("half_width", half_width)
            }
            NoiseModel::TwoPoint { magnitude } if !(magnitude.is_finite() && magnitude >= 0.0) => {
                bad("magnitude", magnitude)
            }
            _ => Ok(()),
        }
    }

    /// Per-position variance `nu` in radians squared.
    pub fn variance(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { variance } => variance,
            NoiseModel::Uniform { half_width } => half_width * half_width / 3.0,
            NoiseModel::TwoPoint { magnitude } => magnitude * magnitude,
            NoiseModel::None => 0.0,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, NoiseModel::None)
    }
}

/// One draw from the error distribution, a deterministic function of the key.
pub fn sample_error(model: &NoiseModel, key: StreamKey) -> f64 {
    let mut rng = key.rng();
    match *model {
        NoiseModel::None => 0.0,
        NoiseModel::Gaussian { variance } => {
            if variance == 0.0 {
                return 0.0;
            }
            Normal::new(0.0, variance.sqrt()).unwrap().sample(&mut rng)
        }
        NoiseModel::Uniform { half_width } => rng.random_range(-half_width..=half_width),
        NoiseModel::TwoPoint { magnitude } => {
            if rng.random::<bool>() {
                magnitude
            } else {
                -magnitude
            }
        }
    }
}

/// Closed-form attenuation factor `c = E[cos e]`.
pub fn attenuation_factor(model: &NoiseModel) -> f64 {
    match *model {
        NoiseModel::None => 1.0,
        NoiseModel::Gaussian { variance } => (-variance / 2.0).exp(),
        NoiseModel::Uniform { half_width } => {
            if half_width == 0.0 {
                1.0
            } else {
                half_width.sin() / half_width
            }
        }
        NoiseModel::TwoPoint { magnitude } => magnitude.cos(),
    }
}

/// `c^d`, the factor by which a depth-`d` noisy circuit attenuates the signal.
pub fn attenuation_power(model: &NoiseModel, depth: usize) -> f64 {
    attenuation_factor(model).powi(depth as i32)
}

/// Shift every phase by an independent draw: position `j` of the output uses
/// the stream `(master, experiment, sample, j)`.
pub fn perturb_phases(
    phi: &PhaseFactorSequence,
    model: &NoiseModel,
    key: StreamKey,
) -> PhaseFactorSequence {
    let noisy: Vec<f64> = phi
        .phases()
        .iter()
        .enumerate()
        .map(|(j, &p)| p + sample_error(model, key.with_position(j as u64)))
        .collect();
    PhaseFactorSequence::new(noisy)
}

#[cfg(test)]
mod tests {
    use super::*;

    const N_DRAWS: u64 = 1_000_000;

    fn mc_mean(model: &NoiseModel, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..N_DRAWS {
            acc += f(sample_error(model, StreamKey::new(17, 0, i, 0)));
        }
        acc / N_DRAWS as f64
    }

    fn all_kinds() -> Vec<NoiseModel> {
        vec![
            NoiseModel::Gaussian { variance: 0.1 },
            NoiseModel::Uniform { half_width: 0.5 },
            NoiseModel::TwoPoint { magnitude: 0.3 },
            NoiseModel::None,
        ]
    }

    #[test]
    fn none_always_zero_and_two_point_support() {
        for i in 0..100 {
            assert_eq!(sample_error(&NoiseModel::None, StreamKey::new(1, 2, i, 3)), 0.0);
            let s = sample_error(&NoiseModel::TwoPoint { magnitude: 0.25 }, StreamKey::new(1, 2, i, 3));
            assert!(s == 0.25 || s == -0.25);
        }
    }

    #[test]
    fn gaussian_empirical_mean_clt_bound() {
        let m = mc_mean(&NoiseModel::Gaussian { variance: 0.1 }, |e| e);
        assert!(m.abs() <= 4.0 * (0.1 / N_DRAWS as f64).sqrt(), "mean {m}");
    }

    #[test]
    fn empirical_variance_within_one_percent() {
        for model in all_kinds() {
            let nu = model.variance();
            let var = mc_mean(&model, |e| e * e);
            if nu == 0.0 {
                assert_eq!(var, 0.0);
            } else {
                assert!(
                    (var - nu).abs() <= 0.01 * nu,
                    "{model:?}: empirical {var} vs nu {nu}"
                );
            }
        }
    }

    #[test]
    fn closed_form_attenuation_values() {
        let c = attenuation_factor(&NoiseModel::Gaussian { variance: 0.1 });
        assert!((c - (-0.05f64).exp()).abs() < 1e-15);
        assert!((c - 0.951229).abs() < 1e-6);
        assert_eq!(attenuation_factor(&NoiseModel::TwoPoint { magnitude: 0.0 }), 1.0);
        assert_eq!(attenuation_factor(&NoiseModel::Uniform { half_width: 0.0 }), 1.0);
    }

    #[test]
    fn attenuation_close_to_one_minus_half_variance() {
        // |c - (1 - nu/2)| <= nu^2/2 for nu <= 0.2, any kind.
        for frac in 1..=10 {
            let nu = 0.02 * frac as f64;
            let models = [
                NoiseModel::Gaussian { variance: nu },
                NoiseModel::Uniform { half_width: (3.0 * nu).sqrt() },
                NoiseModel::TwoPoint { magnitude: nu.sqrt() },
            ];
            for m in models {
                let c = attenuation_factor(&m);
                assert!(
                    (c - (1.0 - nu / 2.0)).abs() <= nu * nu / 2.0,
                    "{m:?} at nu={nu}: c={c}"
                );
            }
        }
    }

    #[test]
    fn monte_carlo_cos_matches_closed_form() {
        let bound = 4.0 / (N_DRAWS as f64).sqrt();
        for model in all_kinds() {
            let mc = mc_mean(&model, f64::cos);
            let cf = attenuation_factor(&model);
            assert!((mc - cf).abs() <= bound, "{model:?}: mc {mc} vs closed form {cf}");
        }
    }

    #[test]
    fn monte_carlo_sin_vanishes() {
        // Evenness: E[f(e)] = 0 for odd f.
        let bound = 4.0 / (N_DRAWS as f64).sqrt();
        for model in all_kinds() {
            let mc = mc_mean(&model, f64::sin);
            assert!(mc.abs() <= bound, "{model:?}: E[sin e] = {mc}");
        }
    }

    #[test]
    fn perturb_preserves_length_and_is_keyed() {
        let phi = PhaseFactorSequence::new(vec![0.1, -0.7, 2.0]);
        let model = NoiseModel::Gaussian { variance: 0.05 };
        let key = StreamKey::new(5, 1, 42, 0);
        let a = perturb_phases(&phi, &model, key);
        let b = perturb_phases(&phi, &model, key);
        assert_eq!(a.phases(), b.phases());
        let c = perturb_phases(&phi, &model, key.with_sample(43));
        assert_ne!(a.phases(), c.phases());
        assert_eq!(a.len(), 3);

        let id = perturb_phases(&phi, &NoiseModel::None, key);
        assert_eq!(id.phases(), phi.phases());

        let tp = perturb_phases(&phi, &NoiseModel::TwoPoint { magnitude: 0.2 }, key);
        for (orig, new) in phi.phases().iter().zip(tp.phases()) {
            assert!(((new - orig).abs() - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn perturb_per_position_variance() {
        let nu = 0.05;
        let phi = PhaseFactorSequence::new(vec![0.3; 4]);
        let model = NoiseModel::Gaussian { variance: nu };
        let n = 100_000u64;
        for pos in 0..4 {
            let mut acc = 0.0;
            for s in 0..n {
                let noisy = perturb_phases(&phi, &model, StreamKey::new(9, 3, s, 0));
                let e = noisy.phases()[pos] - 0.3;
                acc += e * e;
            }
            let var = acc / n as f64;
            assert!(var >= 0.95 * nu && var <= 1.05 * nu, "position {pos}: {var}");
        }
    }

    #[test]
    fn serde_round_trip() {
        let m = NoiseModel::Gaussian { variance: 0.1 };
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"kind":"gaussian","variance":0.1}"#);
        let back: NoiseModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
