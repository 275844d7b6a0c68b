//! Scalar convex toolbox and the proximal step `u + tau D_N^alpha phi(u) = f`.
//!
//! The step is solved in the variable `w = phi(u)`: with `eta = phi^{-1}` the
//! equation reads `eta(w) + tau D w = f`. `eta` is replaced by its Yosida
//! approximation `eta_mu`, which is `1/mu`-Lipschitz, and the regularized
//! system is solved by damped Newton while `mu` is driven to zero.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::GridFunction;
use crate::sobolev::{hminus1_inner, hminus1_norm};
use crate::vladimirov::Vladimirov;

/// A strictly increasing odd scalar map `phi` with inverse `eta` and convex
/// primitive `j` (so that `dj = phi`).
pub trait Nonlinearity {
    fn phi(&self, r: f64) -> f64;
    fn eta(&self, r: f64) -> f64;
    fn j(&self, r: f64) -> f64;
    /// `1 / eta'(s)`, which may be `0` or `inf` where `eta` is singular.
    fn eta_slope_recip(&self, s: f64) -> f64;
    /// Whether `eta` is `C^1` on the whole line, so the unregularized system can be polished.
    fn eta_is_smooth(&self) -> bool;

    /// The unique `s` with `s + mu eta(s) = r`, i.e. `J_mu(r) = (1 + mu eta)^{-1} r`.
    fn scalar_resolvent(&self, mu: f64, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let tol = 1e-13 * (1.0 + r.abs());
        let (mut lo, mut hi) = if r > 0.0 { (0.0, r) } else { (r, 0.0) };
        let mut s = r / (1.0 + mu);
        for _ in 0..400 {
            let g = s + mu * self.eta(s) - r;
            if g.abs() <= tol {
                return s;
            }
            if g > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let slope = 1.0 + mu / self.eta_slope_recip(s);
            let mut next = s - g / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == s {
                break;
            }
            s = next;
        }
        s
    }

    /// Yosida approximation `eta_mu(r) = (r - J_mu(r)) / mu`, evaluated as
    /// `eta(J_mu(r))` which is the same number without the cancellation.
    fn yosida(&self, mu: f64, r: f64) -> f64 {
        self.eta(self.scalar_resolvent(mu, r))
    }

    /// `eta_mu'(r) = 1 / (1 / eta'(J_mu r) + mu)`, always in `[0, 1/mu]`.
    fn yosida_slope(&self, mu: f64, r: f64) -> f64 {
        1.0 / (self.eta_slope_recip(self.scalar_resolvent(mu, r)) + mu)
    }
}

/// `phi(r) = |r|^{m-1} r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLaw {
    m: f64,
}

impl PowerLaw {
    pub fn new(m: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidExponent(m));
        }
        Ok(Self { m })
    }

    pub fn exponent(&self) -> f64 {
        self.m
    }
}

impl Nonlinearity for PowerLaw {
    fn phi(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        r.abs().powf(self.m - 1.0) * r
    }

    fn eta(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        r.abs().powf(1.0 / self.m - 1.0) * r
    }

    fn j(&self, r: f64) -> f64 {
        r.abs().powf(self.m + 1.0) / (self.m + 1.0)
    }

    fn eta_slope_recip(&self, s: f64) -> f64 {
        self.m * s.abs().powf(1.0 - 1.0 / self.m)
    }

    fn eta_is_smooth(&self) -> bool {
        self.m <= 1.0
    }
}

pub fn phi(m: f64, r: f64) -> Result<f64> {
    Ok(PowerLaw::new(m)?.phi(r))
}

pub fn eta(m: f64, r: f64) -> Result<f64> {
    Ok(PowerLaw::new(m)?.eta(r))
}

pub fn j_primitive(m: f64, r: f64) -> Result<f64> {
    Ok(PowerLaw::new(m)?.j(r))
}

pub fn scalar_resolvent(m: f64, mu: f64, r: f64) -> Result<f64> {
    positive("mu", mu)?;
    Ok(PowerLaw::new(m)?.scalar_resolvent(mu, r))
}

pub fn yosida(m: f64, mu: f64, r: f64) -> Result<f64> {
    positive("mu", mu)?;
    Ok(PowerLaw::new(m)?.yosida(mu, r))
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}

/// `Psi(u) = \int_{B_N} j(u) dx`.
pub fn psi_functional<N: Nonlinearity + ?Sized>(u: &GridFunction, nl: &N) -> f64 {
    u.grid().haar_weight() * u.values().iter().map(|v| nl.j(v.re)).sum::<f64>()
}

/// Solver settings. Defaults are echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProxConfig {
    /// Required `H_{-1}` residual of the step equation.
    pub tol: f64,
    /// First regularization parameter.
    pub mu_start: f64,
    /// Ratio between consecutive `mu`.
    pub mu_factor: f64,
    /// Last regularization parameter.
    pub mu_min: f64,
    /// Newton tolerance on intermediate `mu` levels, relative to `||f||`.
    pub stage_tol: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
    /// Sufficient-decrease constant of the backtracking rule.
    pub armijo: f64,
}

impl Default for ProxConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            mu_start: 1.0,
            mu_factor: 0.1,
            mu_min: 1e-12,
            stage_tol: 1e-8,
            max_newton: 100,
            max_halvings: 60,
            armijo: 1e-4,
        }
    }
}

impl ProxConfig {
    pub fn mu_schedule(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut mu = self.mu_start;
        while mu > self.mu_min * (1.0 + 1e-9) {
            out.push(mu);
            mu *= self.mu_factor;
        }
        out.push(self.mu_min);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub u: GridFunction,
    /// Newton variable, `phi(u)` up to the constraint gap.
    pub w: GridFunction,
    pub residual_hminus1: f64,
    /// `max_a |w(a) - phi(u(a))|`.
    pub constraint_gap: f64,
    pub newton_iterations: usize,
    /// Regularization levels visited; a final `0` marks the unregularized polish.
    pub mu_path: Vec<f64>,
}

/// Reusable resolvent `(I + tau A)^{-1}` for fixed operator, nonlinearity and step.
pub struct ProxSolver<'a, N: Nonlinearity> {
    op: &'a Vladimirov,
    nl: &'a N,
    tau: f64,
    config: ProxConfig,
    // tau * kernel matrix
    tau_d: DMatrix<f64>,
}

impl<'a, N: Nonlinearity> ProxSolver<'a, N> {
    pub fn new(op: &'a Vladimirov, nl: &'a N, tau: f64, config: ProxConfig) -> Result<Self> {
        positive("tau", tau)?;
        let tau_d = op.kernel_matrix() * tau;
        Ok(Self {
            op,
            nl,
            tau,
            config,
            tau_d,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn config(&self) -> &ProxConfig {
        &self.config
    }

    fn eta_level(&self, mu: f64, r: f64) -> (f64, f64) {
        if mu == 0.0 {
            (self.nl.eta(r), 1.0 / self.nl.eta_slope_recip(r))
        } else {
            let s = self.nl.scalar_resolvent(mu, r);
            (self.nl.eta(s), 1.0 / (self.nl.eta_slope_recip(s) + mu))
        }
    }

    fn residual(&self, mu: f64, w: &DVector<f64>, f: &DVector<f64>) -> DVector<f64> {
        let mut g = &self.tau_d * w - f;
        for (gi, &wi) in g.iter_mut().zip(w.iter()) {
            *gi += self.eta_level(mu, wi).0;
        }
        g
    }

    fn weighted_norm(&self, v: &DVector<f64>) -> f64 {
        (self.op.grid().haar_weight() * v.norm_squared()).sqrt()
    }

    /// Damped Newton on `eta_mu(w) + tau D w = f`; returns iterations used.
    fn newton(
        &self,
        mu: f64,
        w: &mut DVector<f64>,
        f: &DVector<f64>,
        tol: f64,
        history: &mut Vec<f64>,
    ) -> Result<usize> {
        let mut g = self.residual(mu, w, f);
        let mut norm = self.weighted_norm(&g);
        for iter in 0..self.config.max_newton {
            history.push(norm);
            if norm <= tol {
                return Ok(iter);
            }
            let mut jac = self.tau_d.clone();
            for (i, &wi) in w.iter().enumerate() {
                jac[(i, i)] += self.eta_level(mu, wi).1;
            }
            let step = match jac.clone().cholesky() {
                Some(ch) => ch.solve(&g),
                None => jac.lu().solve(&g).unwrap_or_else(|| g.clone()),
            };
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=self.config.max_halvings {
                let trial = &*w - &step * t;
                let g_trial = self.residual(mu, &trial, f);
                let n_trial = self.weighted_norm(&g_trial);
                if n_trial <= (1.0 - self.config.armijo * t) * norm {
                    *w = trial;
                    g = g_trial;
                    norm = n_trial;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // no descent left: rounding floor reached
                history.push(norm);
                return if norm <= tol * 1e3 {
                    Ok(iter + 1)
                } else {
                    Err(Error::NonConvergence {
                        mu,
                        residual: norm,
                        iterations: iter + 1,
                        history: history.clone(),
                    })
                };
            }
        }
        history.push(norm);
        if norm <= tol {
            Ok(self.config.max_newton)
        } else {
            Err(Error::NonConvergence {
                mu,
                residual: norm,
                iterations: self.config.max_newton,
                history: history.clone(),
            })
        }
    }

    /// One resolvent evaluation; `warm` is an initial guess for `w`.
    pub fn solve(&self, f: &GridFunction, warm: Option<&GridFunction>) -> Result<ProxResult> {
        f.ensure_real(1e-12)?;
        let grid = *self.op.grid();
        let fv = DVector::from_vec(f.real_parts());
        let mut w = match warm {
            Some(w0) => DVector::from_vec(w0.real_parts()),
            None => DVector::zeros(grid.cells()),
        };
        let scale = 1.0 + self.weighted_norm(&fv);
        // L2 tolerance that implies the H_{-1} target, since ||.||_{-1} <= ||.||_{L2} / sqrt(lambda_0)
        let final_tol = 0.01 * self.config.tol * self.op.lambda0().sqrt();
        let mut mu_path = Vec::new();
        let mut iterations = 0;
        let mut history = Vec::new();
        let schedule = self.config.mu_schedule();
        let last = schedule.len() - 1;
        for (i, &mu) in schedule.iter().enumerate() {
            let tol = if i == last && !self.nl.eta_is_smooth() {
                final_tol
            } else {
                self.config.stage_tol * scale
            };
            iterations += self.newton(mu, &mut w, &fv, tol, &mut history)?;
            mu_path.push(mu);
        }
        let u = if self.nl.eta_is_smooth() {
            iterations += self.newton(0.0, &mut w, &fv, final_tol, &mut history)?;
            mu_path.push(0.0);
            w.map(|wi| self.nl.eta(wi))
        } else {
            &fv - &self.tau_d * &w
        };
        let u = GridFunction::from_real(grid, u.as_slice())?;
        let w = GridFunction::from_real(grid, w.as_slice())?;
        let phi_u = u.map_real(|r| self.nl.phi(r));
        let constraint_gap = phi_u.max_abs_diff(&w);
        let defect = u
            .add(&self.op.apply_kernel(&phi_u).scale(self.tau))?
            .sub(f)?;
        let residual_hminus1 = hminus1_norm(&defect, self.op);
        if !(residual_hminus1 <= self.config.tol) {
            history.push(residual_hminus1);
            return Err(Error::NonConvergence {
                mu: *mu_path.last().unwrap_or(&0.0),
                residual: residual_hminus1,
                iterations,
                history,
            });
        }
        Ok(ProxResult {
            u,
            w,
            residual_hminus1,
            constraint_gap,
            newton_iterations: iterations,
            mu_path,
        })
    }
}

/// Solves `u + tau D_N^alpha phi(u) = f` for real `f`.
pub fn prox_step<N: Nonlinearity>(
    op: &Vladimirov,
    nl: &N,
    tau: f64,
    f: &GridFunction,
    config: &ProxConfig,
) -> Result<ProxResult> {
    ProxSolver::new(op, nl, tau, config.clone())?.solve(f, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubdifferentialCheck {
    /// `max_a |([D]^{-1} f)(a) - phi(u(a))|`.
    pub gap: f64,
    /// Smallest `Psi(v) - Psi(u) - (f, v - u)_{-1}` over the probes.
    pub min_slack: f64,
    pub probes: usize,
}

/// Checks `f in dPsi(u)` pointwise and through the subgradient inequality on random probes.
pub fn verify_subdifferential<N: Nonlinearity, R: Rng>(
    u: &GridFunction,
    f: &GridFunction,
    op: &Vladimirov,
    nl: &N,
    probes: usize,
    rng: &mut R,
) -> Result<SubdifferentialCheck> {
    let pre = op.apply_inverse(f);
    let gap = pre
        .values()
        .iter()
        .zip(u.values())
        .map(|(w, uv)| (w.re - nl.phi(uv.re)).abs())
        .fold(0.0, f64::max);
    let psi_u = psi_functional(u, nl);
    let spread = u.values().iter().fold(1.0f64, |acc, v| acc.max(v.re.abs()));
    let mut min_slack = f64::INFINITY;
    for _ in 0..probes {
        let v = GridFunction::random_real(*u.grid(), rng).scale(2.0 * spread);
        let slack = psi_functional(&v, nl) - psi_u - hminus1_inner(f, &v.sub(u)?, op);
        min_slack = min_slack.min(slack);
    }
    Ok(SubdifferentialCheck {
        gap,
        min_slack,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BallGrid;
    use crate::harmonic::{forward, inverse, l2_norm};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_examples() {
        assert_eq!(phi(2.0, -3.0).unwrap(), -9.0);
        assert!((eta(2.0, 4.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((j_primitive(2.0, 3.0).unwrap() - 9.0).abs() < 1e-14);
        assert_eq!(phi(0.0, 1.0), Err(Error::InvalidExponent(0.0)));
        for m in [0.3, 0.5, 1.0, 2.0, 3.0, 4.5] {
            let nl = PowerLaw::new(m).unwrap();
            for i in -50..=50 {
                let r = i as f64 * 0.37;
                assert!((nl.eta(nl.phi(r)) - r).abs() < 1e-12 * (1.0 + r.abs()));
                assert_eq!(nl.phi(-r), -nl.phi(r));
            }
            assert_eq!(nl.j(0.0), 0.0);
            assert!(nl.j(1e6) / 1e6 > nl.j(1e3) / 1e3);
        }
    }

    #[test]
    fn phi_is_the_derivative_of_j() {
        for m in [0.5, 1.0, 2.0, 3.0] {
            let nl = PowerLaw::new(m).unwrap();
            for r in [-2.0, -0.7, 0.3, 1.1, 2.5] {
                let h = 1e-6;
                let fd = (nl.j(r + h) - nl.j(r - h)) / (2.0 * h);
                assert!((fd - nl.phi(r)).abs() < 1e-7 * (1.0 + nl.phi(r).abs()));
            }
        }
    }

    #[test]
    fn resolvent_examples() {
        assert_eq!(scalar_resolvent(2.0, 0.5, 0.0).unwrap(), 0.0);
        for r in [-3.0, -0.1, 0.25, 7.0] {
            let s = scalar_resolvent(1.0, 0.5, r).unwrap();
            assert!((s - r / 1.5).abs() < 1e-13 * (1.0 + r.abs()));
        }
        assert!(scalar_resolvent(2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn resolvent_residual_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..2000 {
            let m = rng.gen_range(0.2..5.0);
            let mu = 10f64.powf(rng.gen_range(-12.0..1.0));
            let r = rng.gen_range(-20.0..20.0);
            let nl = PowerLaw::new(m).unwrap();
            let s = nl.scalar_resolvent(mu, r);
            assert!(
                (s + mu * nl.eta(s) - r).abs() < 1e-13 * (1.0 + r.abs()),
                "m={m} mu={mu} r={r}"
            );
        }
    }

    #[test]
    fn yosida_properties() {
        for m in [0.5, 1.0, 2.0, 3.0] {
            let nl = PowerLaw::new(m).unwrap();
            assert_eq!(yosida(m, 0.3, 0.0).unwrap(), 0.0);
            for mu in [1.0, 0.1, 0.01] {
                let lattice: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.01).collect();
                for pair in lattice.windows(2) {
                    let (a, b) = (nl.yosida(mu, pair[0]), nl.yosida(mu, pair[1]));
                    assert!(b >= a);
                    assert!((b - a) <= (pair[1] - pair[0]) / mu * (1.0 + 1e-9));
                }
                for &r in &lattice {
                    let y = nl.yosida(mu, r);
                    assert!(y.abs() <= nl.eta(r).abs() * (1.0 + 1e-12));
                    assert!(r == 0.0 || y.signum() == r.signum());
                }
            }
            // eta_mu -> eta as mu -> 0
            for r in [-2.0, -0.5, 0.3, 1.7] {
                let errs: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]
                    .iter()
                    .map(|&mu| (nl.yosida(mu, r) - nl.eta(r)).abs())
                    .collect();
                assert!(errs.windows(2).all(|w| w[1] <= w[0]));
                assert!(errs[4] < 1e-3);
            }
        }
    }

    fn setup(p: u64, n: i32, k: i32, alpha: f64) -> (BallGrid, Vladimirov) {
        let g = BallGrid::new(p, n, k).unwrap();
        (g, Vladimirov::new(g, alpha).unwrap())
    }

    #[test]
    fn prox_of_zero_is_zero() {
        let (g, d) = setup(2, 1, 3, 0.5);
        let nl = PowerLaw::new(2.0).unwrap();
        let r = prox_step(
            &d,
            &nl,
            0.1,
            &GridFunction::zeros(g),
            &ProxConfig::default(),
        )
        .unwrap();
        assert_eq!(r.u.max_abs_diff(&GridFunction::zeros(g)), 0.0);
        assert_eq!(r.w.max_abs_diff(&GridFunction::zeros(g)), 0.0);
    }

    #[test]
    fn prox_linear_matches_spectral_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (g, d) = setup(3, 0, 3, 0.7);
        let nl = PowerLaw::new(1.0).unwrap();
        for tau in [0.01, 0.1, 1.0] {
            let f = GridFunction::random_real(g, &mut rng);
            let r = prox_step(&d, &nl, tau, &f, &ProxConfig::default()).unwrap();
            let exact = inverse(&forward(&f).multiply(|b| 1.0 / (1.0 + tau * d.symbol(b))));
            assert!(r.u.max_abs_diff(&exact) < 1e-10);
        }
    }

    #[test]
    fn prox_nonlinear_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let (g, d) = setup(2, 1, 3, 0.5);
        for m in [0.5, 2.0, 3.0] {
            let nl = PowerLaw::new(m).unwrap();
            for tau in [0.01, 0.1, 1.0] {
                let f = GridFunction::random_real(g, &mut rng);
                let r = prox_step(&d, &nl, tau, &f, &ProxConfig::default()).unwrap();
                assert!(r.residual_hminus1 < 1e-10, "m={m} tau={tau}");
                assert!(
                    r.constraint_gap < 1e-8,
                    "m={m} tau={tau} gap={}",
                    r.constraint_gap
                );
                // proximal descent
                let lhs = psi_functional(&r.u, &nl)
                    + hminus1_norm(&r.u.sub(&f).unwrap(), &d).powi(2) / (2.0 * tau);
                assert!(lhs <= psi_functional(&f, &nl) + 1e-10);
            }
        }
    }

    #[test]
    fn prox_is_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let (g, d) = setup(3, 0, 2, 0.5);
        for m in [0.5, 2.0] {
            let nl = PowerLaw::new(m).unwrap();
            let solver = ProxSolver::new(&d, &nl, 0.2, ProxConfig::default()).unwrap();
            for _ in 0..10 {
                let f = GridFunction::random_real(g, &mut rng).scale(2.0);
                let h = GridFunction::random_real(g, &mut rng);
                let (rf, rh) = (
                    solver.solve(&f, None).unwrap(),
                    solver.solve(&h, None).unwrap(),
                );
                let before = hminus1_norm(&f.sub(&h).unwrap(), &d);
                let after = hminus1_norm(&rf.u.sub(&rh.u).unwrap(), &d);
                assert!(after <= before + 1e-9);
            }
        }
    }

    #[test]
    fn monotonicity_of_the_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let (g, d) = setup(2, 0, 4, 0.6);
        let nl = PowerLaw::new(3.0).unwrap();
        for _ in 0..20 {
            let u = GridFunction::random_real(g, &mut rng);
            let v = GridFunction::random_real(g, &mut rng);
            let au = d.apply_kernel(&u.map_real(|r| nl.phi(r)));
            let av = d.apply_kernel(&v.map_real(|r| nl.phi(r)));
            let pairing = hminus1_inner(&au.sub(&av).unwrap(), &u.sub(&v).unwrap(), &d);
            assert!(pairing >= -1e-12);
        }
    }

    #[test]
    fn psi_examples_and_convexity() {
        let g = BallGrid::new(3, 0, 2).unwrap();
        let nl = PowerLaw::new(2.0).unwrap();
        assert_eq!(psi_functional(&GridFunction::zeros(g), &nl), 0.0);
        let c = GridFunction::constant(g, Complex64::new(-1.5, 0.0));
        assert!((psi_functional(&c, &nl) - 1.5f64.powi(3) / 3.0).abs() < 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..50 {
            let f = GridFunction::random_real(g, &mut rng);
            let h = GridFunction::random_real(g, &mut rng);
            let theta: f64 = rng.gen_range(0.0..1.0);
            let mid = psi_functional(&f.lerp(&h, theta).unwrap(), &nl);
            let chord = theta * psi_functional(&f, &nl) + (1.0 - theta) * psi_functional(&h, &nl);
            assert!(mid <= chord + 1e-14);
        }
    }

    #[test]
    fn subdifferential_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let (g, d) = setup(2, 1, 3, 0.5);
        let nl = PowerLaw::new(2.0).unwrap();
        let zero = GridFunction::zeros(g);
        let c = verify_subdifferential(&zero, &zero, &d, &nl, 10, &mut rng).unwrap();
        assert_eq!(c.gap, 0.0);
        assert!(c.min_slack >= 0.0);
        for _ in 0..5 {
            let u = GridFunction::random_real(g, &mut rng);
            let f = d.apply_kernel(&u.map_real(|r| nl.phi(r)));
            let c = verify_subdifferential(&u, &f, &d, &nl, 100, &mut rng).unwrap();
            assert!(c.gap < 1e-10);
            assert!(c.min_slack >= -1e-10);
        }
        // an f that is not in the subdifferential shows a gap
        let u = GridFunction::random_real(g, &mut rng);
        let wrong = d.apply_kernel(&u);
        let c = verify_subdifferential(&u, &wrong, &d, &nl, 0, &mut rng).unwrap();
        assert!(c.gap > 1e-3);
        assert!(l2_norm(&u) > 0.0);
    }
}
