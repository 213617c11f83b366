//! Exploratory solver measurements (will be trimmed into real tests).

use enqsp_core::polyapprox::{gsp_filter_approx, inverse_approx, trig_approx};
use enqsp_core::qsp::{qsp_polynomial, solve_phase_factors, PhaseFactorSequence};
use std::time::Instant;

fn residual_on_nodes(seq: &PhaseFactorSequence, p: &enqsp_core::TargetPolynomial) -> f64 {
    let d = seq.len().max(1);
    (1..=4 * d)
        .map(|k| {
            let x = ((2 * k - 1) as f64 * std::f64::consts::PI / (8.0 * d as f64)).cos();
            (qsp_polynomial(seq, x).re - p.eval(x)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
#[ignore]
fn probe_trig_degrees_and_solver() {
    for (beta, eps) in [(1.0, 0.005), (1.0, 1e-4), (5.0, 1e-3)] {
        let t0 = Instant::now();
        let (p_cos, p_sin, d) = trig_approx(beta, eps).unwrap();
        eprintln!(
            "trig beta={beta} eps={eps}: d_cos={} d_sin={} (bound {}), fit {:?}",
            p_cos.degree(),
            p_sin.degree(),
            d,
            t0.elapsed()
        );
        for (label, a) in [("cos", &p_cos), ("sin", &p_sin)] {
            let t1 = Instant::now();
            match solve_phase_factors(a.polynomial(), 1e-8) {
                Ok(seq) => eprintln!(
                    "  {label}: solved d={} residual {:.2e} in {:?}",
                    seq.len(),
                    residual_on_nodes(&seq, a.polynomial()),
                    t1.elapsed()
                ),
                Err(e) => eprintln!("  {label}: FAILED {e} after {:?}", t1.elapsed()),
            }
        }
    }
}

#[test]
#[ignore]
fn probe_gsp_filter() {
    let t0 = Instant::now();
    let f = gsp_filter_approx(0.5, 0.3, 0.1, 0.025).unwrap();
    eprintln!("gsp filter: degree {} fit {:?}, errors {:?}", f.degree(), t0.elapsed(), f.bands());
    let t1 = Instant::now();
    match solve_phase_factors(f.polynomial(), 0.025 / 20.0) {
        Ok(seq) => eprintln!(
            "  solved d={} residual {:.2e} in {:?}",
            seq.len(),
            residual_on_nodes(&seq, f.polynomial()),
            t1.elapsed()
        ),
        Err(e) => eprintln!("  FAILED {e} after {:?}", t1.elapsed()),
    }
}

#[test]
#[ignore]
fn probe_inverse_kappa8() {
    let eps = 3.0 * 0.05 / (8.0 * 8.0); // 2.34e-3, the acceptance setting
    let t0 = Instant::now();
    let a = inverse_approx(8.0, eps).unwrap();
    eprintln!(
        "inverse kappa=8 eps={eps:.3e}: degree {} fit {:?}, errors {:?}",
        a.degree(),
        t0.elapsed(),
        a.bands()
    );
    let t1 = Instant::now();
    match solve_phase_factors(a.polynomial(), eps / 20.0) {
        Ok(seq) => eprintln!(
            "  solved d={} residual {:.2e} in {:?}",
            seq.len(),
            residual_on_nodes(&seq, a.polynomial()),
            t1.elapsed()
        ),
        Err(e) => eprintln!("  FAILED {e} after {:?}", t1.elapsed()),
    }
}

#[test]
#[ignore]
fn probe_random_roundtrips() {
    // random targets generated from true sequences, rescaled to sup 0.95
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let t0 = Instant::now();
    for trial in 0..20 {
        let d = 1 + (trial % 8);
        let phi_star = PhaseFactorSequence::new(
            (0..d).map(|_| rng.random_range(-3.1..3.1)).collect(),
        );
        let coeffs = enqsp_core::polyapprox::chebyshev_interpolate(
            |x| qsp_polynomial(&phi_star, x).re,
            d,
        );
        let sup = enqsp_core::qsp::chebyshev_grid(2001, -1.0, 1.0)
            .into_iter()
            .map(|x| enqsp_core::qsp::eval_chebyshev(&coeffs, x).abs())
            .fold(0.0, f64::max);
        let scaled: Vec<f64> = coeffs.iter().map(|c| c * 0.95 / sup.max(1e-12)).collect();
        let p = enqsp_core::TargetPolynomial::new(scaled, enqsp_core::Parity::of_degree(d)).unwrap();
        match solve_phase_factors(&p, 1e-8) {
            Ok(seq) => {
                let r = residual_on_nodes(&seq, &p);
                worst = worst.max(r);
            }
            Err(e) => panic!("trial {trial} (d={d}) failed: {e}"),
        }
    }
    eprintln!("20 roundtrips worst residual {worst:.2e} in {:?}", t0.elapsed());
    assert!(worst <= 1e-8);
}
