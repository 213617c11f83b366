//! Phase-factor solving by quasi-Newton least squares.
//!
//! The objective is the sum of squared residuals of `Re P_Phi(x_k) - p(x_k)`
//! over the Chebyshev nodes `x_k = cos((2k-1) pi / (8d))`, k = 1..4d, with an
//! analytic gradient computed by forward/backward sweeps over the QSP product.
//! Phase factors are not unique; the solver returns any sequence meeting the
//! residual contract, so downstream code must only ever compare polynomials.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{phase_pair, Parity, PhaseFactorSequence, TargetPolynomial};
use crate::error::{CoreError, Result};
use crate::numerics::{C64, ONE, ZERO};

/// Sup-norm margin demanded of solver targets: near-saturating polynomials
/// make the complementary part degenerate.
pub const TARGET_MARGIN: f64 = 1e-6;

const MAX_RANDOM_RESTARTS: usize = 32;

struct Node {
    x: f64,
    s: f64,
    target: f64,
}

fn nodes_for(p: &TargetPolynomial, d: usize) -> Vec<Node> {
    let count = 4 * d.max(1);
    (1..=count)
        .map(|k| {
            let x = ((2 * k - 1) as f64 * std::f64::consts::PI / (2.0 * count as f64)).cos();
            Node {
                x,
                s: (1.0 - x * x).max(0.0).sqrt(),
                target: p.eval(x),
            }
        })
        .collect()
}

/// Forward pass only: objective value and sup residual.
fn objective(phases: &[f64], nodes: &[Node], scale: f64) -> (f64, f64) {
    let mut obj = 0.0;
    let mut sup = 0.0f64;
    for node in nodes {
        let mut col = [ONE, ZERO];
        for &phi in phases {
            let r0 = col[0] * node.x + col[1] * node.s;
            let r1 = col[0] * node.s - col[1] * node.x;
            let (ep, em) = phase_pair(phi);
            col = [ep * r0, em * r1];
        }
        let r = col[0].re - scale * node.target;
        obj += r * r;
        sup = sup.max(r.abs());
    }
    (obj, sup)
}

/// Objective, sup residual, and gradient.
fn objective_grad(
    phases: &[f64],
    nodes: &[Node],
    scale: f64,
    grad: &mut [f64],
    cols: &mut Vec<[C64; 2]>,
) -> (f64, f64) {
    let d = phases.len();
    grad.fill(0.0);
    let mut obj = 0.0;
    let mut sup = 0.0f64;
    for node in nodes {
        cols.clear();
        let mut col = [ONE, ZERO];
        cols.push(col);
        for &phi in phases {
            let r0 = col[0] * node.x + col[1] * node.s;
            let r1 = col[0] * node.s - col[1] * node.x;
            let (ep, em) = phase_pair(phi);
            col = [ep * r0, em * r1];
            cols.push(col);
        }
        let r = col[0].re - scale * node.target;
        obj += r * r;
        sup = sup.max(r.abs());

        // backward sweep: g tracks e_0^T times the product prefix left of j
        let mut g = [ONE, ZERO];
        for j in (1..=d).rev() {
            let cj = cols[j];
            // d(U00)/d(phi_j) = i (g0 c0 - g1 c1); its real part is -Im(.)
            let z = g[0] * cj[0] - g[1] * cj[1];
            grad[j - 1] -= 2.0 * r * z.im;
            let (ep, em) = phase_pair(phases[j - 1]);
            let g0 = g[0] * ep * node.x + g[1] * em * node.s;
            let g1 = g[0] * ep * node.s - g[1] * em * node.x;
            g = [g0, g1];
        }
    }
    (obj, sup)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct LbfgsOutcome {
    sup: f64,
}

/// Limited-memory BFGS with Armijo backtracking. Minimizes the node
/// least-squares objective in place; returns the final sup residual.
fn lbfgs(phases: &mut [f64], nodes: &[Node], scale: f64, sup_goal: f64, max_iter: usize) -> LbfgsOutcome {
    const MEMORY: usize = 10;
    let n = phases.len();
    let mut grad = vec![0.0; n];
    let mut cols: Vec<[C64; 2]> = Vec::with_capacity(n + 1);
    let (mut f, mut sup) = objective_grad(phases, nodes, scale, &mut grad, &mut cols);

    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();

    for _ in 0..max_iter {
        if sup <= sup_goal {
            break;
        }
        let gmax = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if gmax < 1e-14 {
            break;
        }

        // two-loop recursion
        let mut q = grad.clone();
        let mut alphas = vec![0.0; s_hist.len()];
        for i in (0..s_hist.len()).rev() {
            let alpha = rho_hist[i] * dot(&s_hist[i], &q);
            alphas[i] = alpha;
            for (qk, yk) in q.iter_mut().zip(&y_hist[i]) {
                *qk -= alpha * yk;
            }
        }
        if let (Some(s_last), Some(y_last)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s_last, y_last) / dot(y_last, y_last).max(1e-300);
            for qk in &mut q {
                *qk *= gamma;
            }
        }
        for i in 0..s_hist.len() {
            let beta = rho_hist[i] * dot(&y_hist[i], &q);
            let corr = alphas[i] - beta;
            for (qk, sk) in q.iter_mut().zip(&s_hist[i]) {
                *qk += corr * sk;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut dg = dot(&dir, &grad);
        if dg >= 0.0 {
            // not a descent direction: restart from steepest descent
            dir = grad.iter().map(|g| -g).collect();
            dg = -dot(&grad, &grad);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        // Armijo backtracking
        let mut step = 1.0;
        let mut accepted = false;
        let mut trial = vec![0.0; n];
        let mut f_trial = f;
        for _ in 0..40 {
            for ((t, p), d) in trial.iter_mut().zip(phases.iter()).zip(&dir) {
                *t = p + step * d;
            }
            let (ft, _) = objective(&trial, nodes, scale);
            if ft <= f + 1e-4 * step * dg {
                accepted = true;
                f_trial = ft;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }

        let s_vec: Vec<f64> = dir.iter().map(|d| step * d).collect();
        let grad_old = grad.clone();
        phases.copy_from_slice(&trial);
        let (f_new, sup_new) = objective_grad(phases, nodes, scale, &mut grad, &mut cols);
        debug_assert!((f_new - f_trial).abs() <= 1e-9 * f_trial.abs().max(1.0));
        let y_vec: Vec<f64> = grad.iter().zip(&grad_old).map(|(a, b)| a - b).collect();
        let sy = dot(&s_vec, &y_vec);
        let s_norm = dot(&s_vec, &s_vec).sqrt();
        let y_norm = dot(&y_vec, &y_vec).sqrt();
        if sy > 1e-10 * s_norm * y_norm {
            s_hist.push(s_vec);
            y_hist.push(y_vec);
            rho_hist.push(1.0 / sy);
            if s_hist.len() > MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
        }

        let stalled = (f - f_new).abs() <= 1e-17 * f.max(1e-30);
        f = f_new;
        sup = sup_new;
        if stalled {
            break;
        }
    }
    LbfgsOutcome { sup }
}

/// Deterministic solve with the module's fixed seed.
pub fn solve_phase_factors(p: &TargetPolynomial, tol: f64) -> Result<PhaseFactorSequence> {
    solve_phase_factors_seeded(p, tol, 0x00e1_05f7_a2c4_9d13)
}

/// Phase factors whose realized `Re P` matches `p` to `tol` on the 4d node
/// grid. The seed only drives the random restarts; the first strategies are
/// deterministic.
pub fn solve_phase_factors_seeded(
    p: &TargetPolynomial,
    tol: f64,
    seed: u64,
) -> Result<PhaseFactorSequence> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CoreError::InvalidParameter(format!(
            "solver tolerance {tol} must be positive"
        )));
    }
    // Targets inside the saturation margin are still attempted: exactly
    // representable ones (pure Chebyshev polynomials, for instance) solve
    // fine. The margin resurfaces in the failure diagnostic instead.
    let saturating = p.sup_norm() > 1.0 - TARGET_MARGIN;

    // Length of the sequence. Constant targets other than p = 1 need an even
    // length of at least two; the zero odd polynomial needs length one.
    let d = match (p.degree(), p.parity()) {
        (0, Parity::Even) => {
            if (p.coefficients()[0] - 1.0).abs() <= tol {
                return Ok(PhaseFactorSequence::new(vec![]));
            }
            2
        }
        (0, Parity::Odd) => 1,
        (deg, _) => deg,
    };

    let nodes = nodes_for(p, d);
    let max_iter = (600 + 40 * d).min(12_000);
    let frac_pi_2 = std::f64::consts::FRAC_PI_2;

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |phases: Vec<f64>, sup: f64| -> Option<PhaseFactorSequence> {
        if sup <= tol {
            return Some(PhaseFactorSequence::new(phases));
        }
        if best.as_ref().map_or(true, |(b, _)| sup < *b) {
            best = Some((sup, phases));
        }
        None
    };

    // Strategy 1: direct solves from deterministic starts.
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; d]];
    if d >= 2 {
        let mut qsppack_like = vec![-frac_pi_2; d];
        qsppack_like[d - 1] = 0.0;
        starts.push(qsppack_like);
        starts.push(
            (0..d)
                .map(|j| if j % 2 == 0 { -frac_pi_2 } else { frac_pi_2 })
                .collect(),
        );
    }
    for start in starts {
        let mut phases = start;
        let out = lbfgs(&mut phases, &nodes, 1.0, 0.5 * tol, max_iter);
        if let Some(seq) = consider(phases, out.sup) {
            return Ok(seq);
        }
    }

    // Strategy 2: continuation in the target amplitude, warm-starting each
    // stage. Small-amplitude targets have a benign landscape.
    {
        let mut phases = vec![0.0; d];
        for &tau in &[0.25, 0.5, 0.75, 0.9, 1.0] {
            let goal = if tau < 1.0 { 1e-3 } else { 0.5 * tol };
            lbfgs(&mut phases, &nodes, tau, goal, max_iter);
        }
        let (_, sup) = objective(&phases, &nodes, 1.0);
        if let Some(seq) = consider(phases, sup) {
            return Ok(seq);
        }
    }

    // Strategy 3: seeded random restarts.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for restart in 0..MAX_RANDOM_RESTARTS {
        let spread = 0.2 + 1.3 * (restart as f64 / MAX_RANDOM_RESTARTS as f64);
        let mut phases: Vec<f64> = (0..d)
            .map(|_| rng.random_range(-spread * frac_pi_2..spread * frac_pi_2))
            .collect();
        let out = lbfgs(&mut phases, &nodes, 1.0, 0.5 * tol, max_iter);
        if let Some(seq) = consider(phases, out.sup) {
            return Ok(seq);
        }
    }

    let (residual, _) = best.unwrap();
    if saturating {
        return Err(CoreError::InvalidTarget(format!(
            "no convergence (best residual {residual:.3e}) and the target sup norm {} \
             violates the 1 - {TARGET_MARGIN:.0e} margin; near-saturating targets make \
             the complementary polynomial degenerate",
            p.sup_norm()
        )));
    }
    Err(CoreError::SolverDidNotConverge {
        residual,
        restarts: MAX_RANDOM_RESTARTS,
        tol,
    })
}
