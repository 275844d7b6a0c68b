//! Implicit Euler for `u_t + D_N^alpha phi(u) = 0` on the ball.
//!
//! Every step is one resolvent `(I + tau A)^{-1}` with `A u = D phi(u)`, so the
//! discrete flow is nonexpansive in `H_{-1}` for any step size.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{forward, inner, inverse, l2_norm, GridFunction};
use crate::monotone::{positive, psi_functional, Nonlinearity, ProxConfig, ProxSolver};
use crate::sobolev::hminus1_norm;
use crate::vladimirov::Vladimirov;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub tau: f64,
    pub horizon: f64,
    pub prox: ProxConfig,
}

impl SolverConfig {
    pub fn new(tau: f64, horizon: f64) -> Result<Self> {
        positive("tau", tau)?;
        positive("T", horizon)?;
        Ok(Self {
            tau,
            horizon,
            prox: ProxConfig::default(),
        })
    }

    /// Step sizes covering `[0, T]`; a shorter final step absorbs any remainder.
    pub fn step_sizes(&self) -> Vec<f64> {
        let ratio = self.horizon / self.tau;
        let full = (ratio + 1e-9).floor() as usize;
        let mut steps = vec![self.tau; full];
        let rest = self.horizon - full as f64 * self.tau;
        if rest > 1e-9 * self.tau {
            steps.push(rest);
        }
        steps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub l2: f64,
    pub hminus1: f64,
    pub psi: f64,
    pub zero_mode_re: f64,
    pub zero_mode_im: f64,
    pub newton_iters: usize,
    /// `H_{-1}` residual of the step equation; `0` for the initial state.
    pub residual: f64,
    /// `max |w - phi(u)|` reported by the step solver.
    pub constraint_gap: f64,
}

impl StepDiagnostics {
    fn of_state<N: Nonlinearity>(t: f64, u: &GridFunction, op: &Vladimirov, nl: &N) -> Self {
        let z = forward(u).coeffs()[0];
        Self {
            t,
            l2: l2_norm(u),
            hminus1: hminus1_norm(u, op),
            psi: psi_functional(u, nl),
            zero_mode_re: z.re,
            zero_mode_im: z.im,
            newton_iters: 0,
            residual: 0.0,
            constraint_gap: 0.0,
        }
    }

    pub fn zero_mode(&self) -> Complex64 {
        Complex64::new(self.zero_mode_re, self.zero_mode_im)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepFailure {
    /// Index of the step that failed (1-based: the state it would have produced).
    pub step: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GridFunction>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub failure: Option<StepFailure>,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn last(&self) -> &GridFunction {
        self.states.last().expect("trajectory holds at least u0")
    }

    pub fn into_result(self) -> Result<Self> {
        match self.failure {
            Some(f) => Err(f.error),
            None => Ok(self),
        }
    }

    /// Largest increase of a diagnostic between consecutive states (`<= 0` when non-increasing).
    pub fn max_increase(&self, pick: impl Fn(&StepDiagnostics) -> f64) -> f64 {
        self.diagnostics
            .windows(2)
            .map(|w| pick(&w[1]) - pick(&w[0]))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Caches the resolvents needed for a run.
pub struct Stepper<'a, N: Nonlinearity> {
    op: &'a Vladimirov,
    nl: &'a N,
    solvers: Vec<(f64, ProxSolver<'a, N>)>,
}

impl<'a, N: Nonlinearity> Stepper<'a, N> {
    pub fn new(op: &'a Vladimirov, nl: &'a N, cfg: &SolverConfig) -> Result<Self> {
        let mut solvers: Vec<(f64, ProxSolver<'a, N>)> = Vec::new();
        for tau in cfg.step_sizes() {
            if !solvers.iter().any(|(t, _)| *t == tau) {
                solvers.push((tau, ProxSolver::new(op, nl, tau, cfg.prox.clone())?));
            }
        }
        Ok(Self { op, nl, solvers })
    }

    fn solver(&self, tau: f64) -> Result<&ProxSolver<'a, N>> {
        self.solvers
            .iter()
            .find(|(t, _)| *t == tau)
            .map(|(_, s)| s)
            .ok_or(Error::NonPositive {
                name: "tau",
                value: tau,
            })
    }

    pub fn run(&self, u0: &GridFunction, cfg: &SolverConfig) -> Result<Trajectory> {
        u0.ensure_real(1e-12)?;
        let u0 = u0.map(|v| Complex64::new(v.re, 0.0));
        let mut traj = Trajectory {
            times: vec![0.0],
            diagnostics: vec![StepDiagnostics::of_state(0.0, &u0, self.op, self.nl)],
            states: vec![u0],
            failure: None,
        };
        let steps = cfg.step_sizes();
        for (i, &tau) in steps.iter().enumerate() {
            let solver = self.solver(tau)?;
            match solver.solve(traj.last(), None) {
                Ok(r) => {
                    // multiples of tau rather than a running sum, so times do not drift
                    let t = if i + 1 == steps.len() {
                        cfg.horizon
                    } else {
                        (i + 1) as f64 * cfg.tau
                    };
                    let mut d = StepDiagnostics::of_state(t, &r.u, self.op, self.nl);
                    d.newton_iters = r.newton_iterations;
                    d.residual = r.residual_hminus1;
                    d.constraint_gap = r.constraint_gap;
                    traj.times.push(t);
                    traj.diagnostics.push(d);
                    traj.states.push(r.u);
                }
                Err(error) => {
                    traj.failure = Some(StepFailure { step: i + 1, error });
                    break;
                }
            }
        }
        Ok(traj)
    }
}

/// One implicit Euler step of size `cfg.tau`.
pub fn step<N: Nonlinearity>(
    state: &GridFunction,
    cfg: &SolverConfig,
    op: &Vladimirov,
    nl: &N,
) -> Result<GridFunction> {
    Ok(ProxSolver::new(op, nl, cfg.tau, cfg.prox.clone())?
        .solve(state, None)?
        .u)
}

/// Solves over `[0, T]`. A failed step ends the run; the partial trajectory and
/// the failure are both kept in the result.
pub fn run<N: Nonlinearity>(
    u0: &GridFunction,
    cfg: &SolverConfig,
    op: &Vladimirov,
    nl: &N,
) -> Result<Trajectory> {
    Stepper::new(op, nl, cfg)?.run(u0, cfg)
}

/// Exact linear flow `exp(-t D) u0`.
pub fn linear_exact(u0: &GridFunction, t: f64, op: &Vladimirov) -> GridFunction {
    inverse(&forward(u0).multiply(|b| (-op.symbol(b) * t).exp()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    /// `max_n (d_n - d_{n-1})`; `-inf` for a single-state run.
    pub gap: f64,
    /// `H_{-1}` distance between the two trajectories at each time.
    pub distances: Vec<f64>,
}

pub fn contraction_gap<N: Nonlinearity>(
    u0: &GridFunction,
    v0: &GridFunction,
    cfg: &SolverConfig,
    op: &Vladimirov,
    nl: &N,
) -> Result<ContractionReport> {
    let stepper = Stepper::new(op, nl, cfg)?;
    let tu = stepper.run(u0, cfg)?.into_result()?;
    let tv = stepper.run(v0, cfg)?.into_result()?;
    let distances: Vec<f64> = tu
        .states
        .iter()
        .zip(&tv.states)
        .map(|(a, b)| a.sub(b).map(|d| hminus1_norm(&d, op)))
        .collect::<Result<_>>()?;
    let gap = distances
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ContractionReport { gap, distances })
}

/// A `C^1` time profile vanishing at `0` and `T`.
pub trait TimeProfile {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
}

/// `theta(t) = sin(pi t / T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SineBump {
    pub horizon: f64,
}

impl TimeProfile for SineBump {
    fn value(&self, t: f64) -> f64 {
        (std::f64::consts::PI * t / self.horizon).sin()
    }

    fn derivative(&self, t: f64) -> f64 {
        let w = std::f64::consts::PI / self.horizon;
        w * (w * t).cos()
    }
}

/// `|int int u theta' zeta - int int phi(u) theta D zeta|` with trapezoidal
/// quadrature in time and exact Haar sums in space.
pub fn weak_residual<N: Nonlinearity, P: TimeProfile + ?Sized>(
    traj: &Trajectory,
    theta: &P,
    zeta: &GridFunction,
    op: &Vladimirov,
    nl: &N,
) -> Result<f64> {
    let (t0, t1) = (traj.times[0], *traj.times.last().unwrap_or(&0.0));
    let (start, end) = (theta.value(t0), theta.value(t1));
    if start.abs() > 1e-12 || end.abs() > 1e-12 {
        return Err(Error::ProfileEndpoints { start, end });
    }
    if zeta.grid() != traj.last().grid() {
        return Err(Error::GridMismatch);
    }
    let d_zeta = op.apply_kernel(zeta);
    let integrand: Vec<f64> = traj
        .states
        .iter()
        .zip(&traj.times)
        .map(|(u, &t)| {
            let phi_u = u.map_real(|r| nl.phi(r));
            inner(u, zeta).re * theta.derivative(t) - inner(&phi_u, &d_zeta).re * theta.value(t)
        })
        .collect();
    let total: f64 = traj
        .times
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(t, g)| 0.5 * (t[1] - t[0]) * (g[0] + g[1]))
        .sum();
    Ok(total.abs())
}

/// `max_n |c_{n+1} - c_n + dt lambda_0 F(phi(u_{n+1}))(0)|` for the zero coefficient `c`.
pub fn zero_mode_defect<N: Nonlinearity>(traj: &Trajectory, op: &Vladimirov, nl: &N) -> f64 {
    let zero = |u: &GridFunction| forward(u).coeffs()[0];
    traj.states
        .windows(2)
        .zip(traj.times.windows(2))
        .map(|(u, t)| {
            let dt = t[1] - t[0];
            let phi_next = u[1].map_real(|r| nl.phi(r));
            (zero(&u[1]) - zero(&u[0]) + dt * op.lambda0() * zero(&phi_next)).norm()
        })
        .fold(0.0, f64::max)
}

/// Discrete versions of `sup_t t ||phi(u)||_{-1}` and `sup_t t ||u_t||_{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regularity {
    pub t_phi_hminus1: f64,
    pub t_du_hminus1: f64,
}

pub fn regularity<N: Nonlinearity>(
    traj: &Trajectory,
    op: &Vladimirov,
    nl: &N,
) -> Result<Regularity> {
    let mut out = Regularity {
        t_phi_hminus1: 0.0,
        t_du_hminus1: 0.0,
    };
    for (u, &t) in traj.states.iter().zip(&traj.times) {
        out.t_phi_hminus1 = out
            .t_phi_hminus1
            .max(t * hminus1_norm(&u.map_real(|r| nl.phi(r)), op));
    }
    for (u, t) in traj.states.windows(2).zip(traj.times.windows(2)) {
        let rate = u[1].sub(&u[0])?.scale(1.0 / (t[1] - t[0]));
        out.t_du_hminus1 = out.t_du_hminus1.max(t[1] * hminus1_norm(&rate, op));
    }
    Ok(out)
}

/// Least-squares slope of `log e` against `log tau`.
pub fn fitted_order(taus: &[f64], errors: &[f64]) -> f64 {
    let n = taus.len().min(errors.len()) as f64;
    let xs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub taus: Vec<f64>,
    /// Max-norm error at `T` against the exact linear flow (only for `m = 1`).
    pub errors: Option<Vec<f64>>,
    pub order: Option<f64>,
    pub weak_residuals: Vec<f64>,
}

impl ConvergenceStudy {
    pub fn weak_residual_decreasing(&self) -> bool {
        self.weak_residuals.windows(2).all(|w| w[1] < w[0])
    }
}

/// Runs the same problem for each step size. `linear` enables the comparison
/// with `exp(-T D) u0`, which is only meaningful for `phi(r) = r`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study<N: Nonlinearity>(
    u0: &GridFunction,
    zeta: &GridFunction,
    taus: &[f64],
    horizon: f64,
    prox: &ProxConfig,
    op: &Vladimirov,
    nl: &N,
    linear: bool,
) -> Result<ConvergenceStudy> {
    let exact = linear.then(|| linear_exact(u0, horizon, op));
    let mut errors = Vec::new();
    let mut weak_residuals = Vec::new();
    let theta = SineBump { horizon };
    for &tau in taus {
        let mut cfg = SolverConfig::new(tau, horizon)?;
        cfg.prox = prox.clone();
        let traj = run(u0, &cfg, op, nl)?.into_result()?;
        if let Some(ex) = &exact {
            errors.push(traj.last().max_abs_diff(ex));
        }
        weak_residuals.push(weak_residual(&traj, &theta, zeta, op, nl)?);
    }
    let order = linear.then(|| fitted_order(taus, &errors));
    Ok(ConvergenceStudy {
        taus: taus.to_vec(),
        errors: linear.then_some(errors),
        order,
        weak_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BallGrid;
    use crate::monotone::PowerLaw;
    use crate::vladimirov::eigenfunction_psi0;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (BallGrid, Vladimirov) {
        let g = BallGrid::new(2, 1, 3).unwrap();
        (g, Vladimirov::new(g, 0.5).unwrap())
    }

    #[test]
    fn step_sizes_cover_horizon() {
        assert_eq!(SolverConfig::new(0.25, 1.0).unwrap().step_sizes().len(), 4);
        let s = SolverConfig::new(0.3, 1.0).unwrap().step_sizes();
        assert_eq!(s.len(), 4);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(SolverConfig::new(0.0, 1.0).is_err());
    }

    #[test]
    fn zero_is_an_equilibrium() {
        let (g, d) = setup();
        let nl = PowerLaw::new(2.0).unwrap();
        let cfg = SolverConfig::new(0.1, 0.5).unwrap();
        let zero = GridFunction::zeros(g);
        assert_eq!(step(&zero, &cfg, &d, &nl).unwrap(), zero);
        let traj = run(&zero, &cfg, &d, &nl).unwrap();
        assert!(traj.is_complete());
        assert!(traj.states.iter().all(|s| *s == zero));
    }

    #[test]
    fn linear_psi0_decays_geometrically() {
        let (g, d) = setup();
        let nl = PowerLaw::new(1.0).unwrap();
        let cfg = SolverConfig::new(0.1, 1.0).unwrap();
        let psi0 = eigenfunction_psi0(g);
        let traj = run(&psi0, &cfg, &d, &nl).unwrap();
        let q = 1.0 / (1.0 + 0.1 * d.lambda0());
        for (n, u) in traj.states.iter().enumerate() {
            assert!(u.max_abs_diff(&psi0.scale(q.powi(n as i32))) < 1e-10);
        }
        let ex = linear_exact(&psi0, 2.0, &d);
        assert!(ex.max_abs_diff(&psi0.scale((-2.0 * d.lambda0()).exp())) < 1e-13);
        assert!(linear_exact(&psi0, 0.0, &d).max_abs_diff(&psi0) < 1e-14);
    }

    #[test]
    fn linear_exact_l2_decreases() {
        let (g, d) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let u0 = GridFunction::random_real(g, &mut rng);
        let norms: Vec<f64> = (0..10)
            .map(|i| l2_norm(&linear_exact(&u0, 0.2 * i as f64, &d)))
            .collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn semigroup_is_bitwise_deterministic() {
        let (g, d) = setup();
        let nl = PowerLaw::new(2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let u0 = GridFunction::random_real(g, &mut rng);
        let whole = run(&u0, &SolverConfig::new(0.1, 0.5).unwrap(), &d, &nl).unwrap();
        let first = run(&u0, &SolverConfig::new(0.1, 0.2).unwrap(), &d, &nl).unwrap();
        let rest = run(first.last(), &SolverConfig::new(0.1, 0.3).unwrap(), &d, &nl).unwrap();
        assert_eq!(whole.last(), rest.last());
    }

    #[test]
    fn lyapunov_and_zero_mode() {
        let (g, d) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for m in [0.5, 2.0, 3.0] {
            let nl = PowerLaw::new(m).unwrap();
            let u0 = GridFunction::random_real(g, &mut rng);
            let traj = run(&u0, &SolverConfig::new(0.05, 1.0).unwrap(), &d, &nl).unwrap();
            assert!(traj.is_complete());
            assert!(traj.max_increase(|s| s.psi) <= 1e-10);
            assert!(traj.max_increase(|s| s.hminus1) <= 1e-10);
            assert!(zero_mode_defect(&traj, &d, &nl) < 1e-9);
            let reg = regularity(&traj, &d, &nl).unwrap();
            assert!(reg.t_phi_hminus1.is_finite() && reg.t_du_hminus1.is_finite());
        }
    }

    #[test]
    fn contraction_of_random_pairs() {
        let (g, d) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let cfg = SolverConfig::new(0.1, 1.0).unwrap();
        for m in [0.5, 2.0] {
            let nl = PowerLaw::new(m).unwrap();
            let u0 = GridFunction::random_real(g, &mut rng);
            let same = contraction_gap(&u0, &u0, &cfg, &d, &nl).unwrap();
            assert!(same.distances.iter().all(|&x| x == 0.0));
            let v0 = GridFunction::random_real(g, &mut rng);
            let r = contraction_gap(&u0, &v0, &cfg, &d, &nl).unwrap();
            assert!(r.gap <= 1e-8);
        }
    }

    #[test]
    fn weak_residual_checks() {
        let (g, d) = setup();
        let nl = PowerLaw::new(2.0).unwrap();
        let zero = GridFunction::zeros(g);
        let traj = run(&zero, &SolverConfig::new(0.1, 1.0).unwrap(), &d, &nl).unwrap();
        let zeta = eigenfunction_psi0(g);
        let theta = SineBump { horizon: 1.0 };
        assert_eq!(weak_residual(&traj, &theta, &zeta, &d, &nl).unwrap(), 0.0);
        let bad = SineBump { horizon: 0.7 };
        assert!(matches!(
            weak_residual(&traj, &bad, &zeta, &d, &nl),
            Err(Error::ProfileEndpoints { .. })
        ));
    }

    #[test]
    fn linear_convergence_is_first_order() {
        let (g, d) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let u0 = GridFunction::random_real(g, &mut rng);
        let zeta = u0.clone();
        let nl = PowerLaw::new(1.0).unwrap();
        let taus = [0.1, 0.05, 0.025, 0.0125];
        let study = convergence_study(
            &u0,
            &zeta,
            &taus,
            1.0,
            &ProxConfig::default(),
            &d,
            &nl,
            true,
        )
        .unwrap();
        let order = study.order.unwrap();
        assert!((0.8..=1.2).contains(&order), "order {order}");
        assert!(
            study.weak_residual_decreasing(),
            "{:?}",
            study.weak_residuals
        );
    }

    #[test]
    fn fitted_order_of_exact_power() {
        let taus = [0.1, 0.05, 0.025];
        let errs: Vec<f64> = taus.iter().map(|t: &f64| 3.0 * t.powi(2)).collect();
        assert!((fitted_order(&taus, &errs) - 2.0).abs() < 1e-12);
    }
}
