//! Bounded polynomial approximants for the three applications: Jacobi-Anger
//! style cos/sin pairs, the odd inverse polynomial, and the ground-state
//! filter. Construction is smoothed-target Chebyshev interpolation with
//! parity projection; the contract is the a-posteriori certified band error,
//! not any particular coefficient formula.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::qsp::{chebyshev_grid, Parity, TargetPolynomial};

/// Grid density per interval used for certification.
pub const CERT_GRID_POINTS: usize = 2001;

/// Chebyshev interpolation coefficients of degree `d` through the `d + 1`
/// first-kind nodes.
pub fn chebyshev_interpolate(f: impl Fn(f64) -> f64, d: usize) -> Vec<f64> {
    let n = d + 1;
    let values: Vec<f64> = (0..n)
        .map(|j| {
            let theta = std::f64::consts::PI * (2 * j + 1) as f64 / (2 * n) as f64;
            f(theta.cos())
        })
        .collect();
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for (j, v) in values.iter().enumerate() {
                let theta = std::f64::consts::PI * (2 * j + 1) as f64 / (2 * n) as f64;
                acc += v * (k as f64 * theta).cos();
            }
            let norm = if k == 0 { 1.0 } else { 2.0 };
            norm * acc / n as f64
        })
        .collect()
}

/// Degree-`d` Chebyshev interpolant with the stated parity. Opposite-parity
/// coefficients are zeroed; if the grid sup exceeds one the whole polynomial
/// is rescaled by `(1 - 1e-6)/sup`.
pub fn chebyshev_fit(f: impl Fn(f64) -> f64, d: usize, parity: Parity) -> Result<TargetPolynomial> {
    let mut coeffs = chebyshev_interpolate(f, d);
    for (k, c) in coeffs.iter_mut().enumerate() {
        if !parity.matches_index(k) {
            *c = 0.0;
        }
    }
    let sup = chebyshev_grid(crate::qsp::SUP_GRID_POINTS, -1.0, 1.0)
        .into_iter()
        .map(|x| crate::qsp::eval_chebyshev(&coeffs, x).abs())
        .fold(0.0, f64::max);
    if sup > 1.0 {
        let scale = (1.0 - 1e-6) / sup;
        for c in &mut coeffs {
            *c *= scale;
        }
    }
    TargetPolynomial::new(coeffs, parity)
}

/// A certified band: on `interval` the polynomial stays within
/// `certified_error` of the band target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifiedBand {
    pub interval: (f64, f64),
    pub certified_error: f64,
}

/// A bounded polynomial together with per-band certified sup errors measured
/// on Chebyshev-distributed grids.
#[derive(Clone)]
pub struct CertifiedApproximant {
    polynomial: TargetPolynomial,
    description: String,
    bands: Vec<CertifiedBand>,
    band_targets: Vec<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl std::fmt::Debug for CertifiedApproximant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CertifiedApproximant")
            .field("description", &self.description)
            .field("degree", &self.degree())
            .field("bands", &self.bands)
            .finish()
    }
}

impl CertifiedApproximant {
    pub fn polynomial(&self) -> &TargetPolynomial {
        &self.polynomial
    }

    pub fn degree(&self) -> usize {
        self.polynomial.degree()
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn bands(&self) -> &[CertifiedBand] {
        &self.bands
    }

    pub fn max_certified_error(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.certified_error)
            .fold(0.0, f64::max)
    }

    /// Re-measure every band error on a refined grid.
    pub fn recertify(&self, grid_points: usize) -> Vec<f64> {
        self.bands
            .iter()
            .zip(&self.band_targets)
            .map(|(band, target)| {
                certified_sup_error(&self.polynomial, target.as_ref(), band.interval, grid_points)
            })
            .collect()
    }

    pub fn to_record(&self) -> CoefficientRecord {
        CoefficientRecord {
            basis: "chebyshev".into(),
            parity: self.polynomial.parity(),
            degree: self.degree(),
            coefficients: self.polynomial.coefficients().to_vec(),
            certified_errors: self.bands.iter().map(|b| b.certified_error).collect(),
        }
    }
}

/// Serializable coefficient record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub basis: String,
    pub parity: Parity,
    pub degree: usize,
    pub coefficients: Vec<f64>,
    pub certified_errors: Vec<f64>,
}

fn certified_sup_error(
    poly: &TargetPolynomial,
    target: &dyn Fn(f64) -> f64,
    interval: (f64, f64),
    grid_points: usize,
) -> f64 {
    chebyshev_grid(grid_points, interval.0, interval.1)
        .into_iter()
        .map(|x| (poly.eval(x) - target(x)).abs())
        .fold(0.0, f64::max)
}

struct BandGoal {
    interval: (f64, f64),
    target: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    budget: f64,
}

/// Fit `fit_target` at increasing degree until every band goal certifies,
/// then greedily reduce the degree while certification holds.
fn fit_until_certified(
    fit_target: &dyn Fn(f64) -> f64,
    parity: Parity,
    d_start: usize,
    d_cap: usize,
    goals: &[BandGoal],
    description: &str,
) -> Result<CertifiedApproximant> {
    let min_degree = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let snap = |d: usize| -> usize {
        let d = d.max(min_degree);
        if parity.matches_index(d) {
            d
        } else {
            d + 1
        }
    };

    let certify_at = |d: usize| -> Result<(TargetPolynomial, Vec<f64>, bool)> {
        let poly = chebyshev_fit(fit_target, d, parity)?;
        let errors: Vec<f64> = goals
            .iter()
            .map(|g| certified_sup_error(&poly, g.target.as_ref(), g.interval, CERT_GRID_POINTS))
            .collect();
        let ok = errors
            .iter()
            .zip(goals)
            .all(|(e, g)| *e <= g.budget);
        Ok((poly, errors, ok))
    };

    let d_start = snap(d_start);
    let d_cap = snap(d_cap.max(d_start));
    let certified;
    let mut d = d_start;
    loop {
        let (poly, errors, ok) = certify_at(d)?;
        if ok {
            certified = (d, poly, errors);
            break;
        }
        if d >= d_cap {
            return Err(CoreError::CertificationFailed(format!(
                "{description}: degree escalation exhausted at d = {d} \
                 (errors {errors:?} vs budgets {:?})",
                goals.iter().map(|g| g.budget).collect::<Vec<_>>()
            )));
        }
        d = (d + 2).min(d_cap);
    }

    // Greedy reduction.
    let (mut d, mut poly, mut errors) = certified;
    while d >= min_degree + 2 {
        let (p2, e2, ok) = certify_at(d - 2)?;
        if !ok {
            break;
        }
        d -= 2;
        poly = p2;
        errors = e2;
    }

    Ok(CertifiedApproximant {
        polynomial: poly,
        description: description.to_string(),
        bands: goals
            .iter()
            .zip(&errors)
            .map(|(g, &e)| CertifiedBand {
                interval: g.interval,
                certified_error: e,
            })
            .collect(),
        band_targets: goals.iter().map(|g| g.target.clone()).collect(),
    })
}

/// Degree bound for the trigonometric pair, minimized over a grid of the free
/// parameter `q`: `d <= e^{q+1} beta / 2 + ln(4/(5 eps)) / q + 1`.
pub fn trig_degree_bound(beta: f64, eps: f64) -> usize {
    let mut best = f64::INFINITY;
    for i in 1..=30 {
        let q = 0.1 * i as f64;
        let bound = (q + 1.0).exp() * beta / 2.0 + (4.0 / (5.0 * eps)).ln() / q + 1.0;
        best = best.min(bound);
    }
    best.ceil().max(1.0) as usize
}

/// Even `p_cos ~ cos(beta x)/2` and odd `p_sin ~ sin(beta x)/2`, each with
/// certified grid error at most `eps/2`. The half prefactor keeps the sup
/// norms near one half so downstream QSP targets stay clear of the unit
/// bound. `beta = 0` is allowed and falls back to the minimal parity degrees.
pub fn trig_approx(
    beta: f64,
    eps: f64,
) -> Result<(CertifiedApproximant, CertifiedApproximant, usize)> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(CoreError::InvalidParameter(format!(
            "trig_approx beta {beta} must be non-negative"
        )));
    }
    if !(eps > 0.0 && eps < 1.0 / std::f64::consts::E) {
        return Err(CoreError::InvalidParameter(format!(
            "trig_approx eps {eps} must lie in (0, 1/e)"
        )));
    }
    let d0 = trig_degree_bound(beta, eps);
    let budget = eps / 2.0;

    let cos_target = move |x: f64| (beta * x).cos() / 2.0;
    let p_cos = fit_until_certified(
        &cos_target,
        Parity::Even,
        d0.max(2),
        (2 * d0).max(4),
        &[BandGoal {
            interval: (-1.0, 1.0),
            target: Arc::new(cos_target),
            budget,
        }],
        &format!("cos({beta:.6} x)/2"),
    )?;

    let sin_target = move |x: f64| (beta * x).sin() / 2.0;
    let p_sin = fit_until_certified(
        &sin_target,
        Parity::Odd,
        d0.max(1),
        (2 * d0).max(3),
        &[BandGoal {
            interval: (-1.0, 1.0),
            target: Arc::new(sin_target),
            budget,
        }],
        &format!("sin({beta:.6} x)/2"),
    )?;

    let degree = p_cos.degree().max(p_sin.degree());
    Ok((p_cos, p_sin, degree))
}

/// Complementary error function (Numerical Recipes rational approximation,
/// absolute error below 1.2e-7 — only the smoothness of the mollifier
/// matters, certification is always against the exact band target).
fn erfc_approx(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t * (-z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398
                                + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
    .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Gaussian-CDF step rising from 0 to 1 around `center` with scale `sigma`.
fn gaussian_step(y: f64, center: f64, sigma: f64) -> f64 {
    0.5 * erfc_approx((center - y) / (sigma * std::f64::consts::SQRT_2))
}

/// Smallest z with upper normal tail `erfc(z/sqrt(2))/2 <= tail`.
fn normal_quantile_for_tail(tail: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 40.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if 0.5 * erfc_approx(mid / std::f64::consts::SQRT_2) <= tail {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Odd approximation of `(3/4) * 1/(kappa x)` on
/// `[-1, -1/kappa] U [1/kappa, 1]`, bounded by one everywhere. The target is
/// mollified near the origin by a smooth step of width `1/(2 kappa)` so the
/// fit stays bounded inside the forbidden band.
pub fn inverse_approx(kappa: f64, eps: f64) -> Result<CertifiedApproximant> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(CoreError::InvalidParameter(format!(
            "inverse_approx kappa {kappa} must be at least 1"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "inverse_approx eps {eps} must lie in (0, 1)"
        )));
    }
    // Step centered at 3/(4 kappa); by x = 1/kappa the step must have risen
    // to within eps/(3/4)/4 of one so the mollification error is under eps/3.
    let center = 3.0 / (4.0 * kappa);
    let z = normal_quantile_for_tail((eps / 3.0).min(0.25) * 4.0 / 3.0);
    let sigma = (1.0 / (4.0 * kappa)) / z;
    let fit_target = move |x: f64| {
        if x == 0.0 {
            return 0.0;
        }
        let step = gaussian_step(x.abs(), center, sigma);
        3.0 / (4.0 * kappa * x) * step
    };

    let exact = move |x: f64| 3.0 / (4.0 * kappa * x);
    let d0_guess = (kappa * (kappa / eps).ln()).ceil() as usize;
    let d_cap = (16.0 * (kappa + 1.0) * ((kappa / eps).ln() + 4.0)).ceil() as usize;
    fit_until_certified(
        &fit_target,
        Parity::Odd,
        d0_guess,
        d_cap,
        &[
            BandGoal {
                interval: (1.0 / kappa, 1.0),
                target: Arc::new(exact),
                budget: eps,
            },
            BandGoal {
                interval: (-1.0, -1.0 / kappa),
                target: Arc::new(exact),
                budget: eps,
            },
        ],
        &format!("(3/4)/(kappa x), kappa={kappa}"),
    )
}

/// Even ground-state filter: within `eps` of 1 on the pass band
/// `[cos(mu - Delta/2), cos(eta)]` and within `eps` of 0 on the stop band
/// `[cos(1 - eta), cos(mu + Delta/2)]`, bounded by one on `[-1, 1]`. The fit
/// target is a Gaussian-CDF step of width `Delta/2` centered at `cos(mu)` in
/// the cosine variable.
pub fn gsp_filter_approx(
    mu: f64,
    delta: f64,
    eta: f64,
    eps: f64,
) -> Result<CertifiedApproximant> {
    if !(eta > 0.0
        && eta <= mu - delta / 2.0
        && mu - delta / 2.0 < mu + delta / 2.0
        && mu + delta / 2.0 < 1.0 - eta)
    {
        return Err(CoreError::InvalidParameter(format!(
            "infeasible band ordering: need 0 < eta <= mu - Delta/2 < mu + Delta/2 < 1 - eta, \
             got eta={eta}, mu={mu}, Delta={delta}"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "gsp_filter_approx eps {eps} must lie in (0, 1)"
        )));
    }
    let center = mu.cos();
    let pass = ((mu - delta / 2.0).cos(), eta.cos());
    let stop = ((1.0 - eta).cos(), (mu + delta / 2.0).cos());
    // Nearer band edge in the cosine variable sets the step scale.
    let edge = (pass.0 - center).min(center - stop.1);
    let z = normal_quantile_for_tail((eps / 2.0).min(0.25));
    let sigma = edge / z;
    let fit_target = move |x: f64| gaussian_step(x.abs(), center, sigma) * (1.0 - 1e-8);

    let d0_guess = ((2.0 / delta) * (1.0 / eps).ln()).ceil() as usize;
    let d_cap = (40.0 * (1.0 / delta) * ((1.0 / eps).ln() + 4.0)).ceil() as usize;
    fit_until_certified(
        &fit_target,
        Parity::Even,
        d0_guess.max(2),
        d_cap,
        &[
            BandGoal {
                interval: pass,
                target: Arc::new(|_x: f64| 1.0),
                budget: eps,
            },
            BandGoal {
                interval: stop,
                target: Arc::new(|_x: f64| 0.0),
                budget: eps,
            },
        ],
        &format!("ground-state filter, mu={mu:.4}, Delta={delta:.4}, eta={eta:.4}"),
    )
}
