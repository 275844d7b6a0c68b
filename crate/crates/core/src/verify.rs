//! The verification battery: eleven suites of oracle and property checks run
//! on one grid, each reporting measured values next to pinned tolerances.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::{convergence_study, SolverConfig, Stepper, Trajectory};
use crate::grid::BallGrid;
use crate::harmonic::{forward, inner, inverse, l2_norm, plancherel_deficit, GridFunction};
use crate::monotone::{Nonlinearity, PowerLaw, ProxConfig, ProxSolver};
use crate::sobolev::{
    ags_multiplier, ags_multiplier_quadrature, ags_seminorm, ags_via_multiplier,
    equivalence_constants, hminus1_norm, EquivalenceEnvelope,
};
use crate::vladimirov::{
    eigenfunction_first_layer, eigenfunction_psi0, SymbolCandidate, Vladimirov,
};

/// Pinned tolerances.
pub mod tol {
    pub const ROUNDTRIP: f64 = 1e-12;
    pub const PLANCHEREL: f64 = 1e-12;
    pub const KERNEL_VS_SPECTRAL: f64 = 1e-10;
    pub const SHELL_SPREAD: f64 = 1e-10;
    pub const CANDIDATE_MATCH: f64 = 1e-10;
    pub const EIGEN_RELATION: f64 = 1e-10;
    pub const UNIT_NORM: f64 = 1e-12;
    pub const ORTHOGONALITY: f64 = 1e-12;
    pub const AGS_RELATIVE: f64 = 1e-9;
    pub const MULTIPLIER_QUADRATURE: f64 = 1e-10;
    pub const SANDWICH: f64 = 1e-12;
    pub const ENVELOPE_RELATIVE: f64 = 1e-9;
    pub const STEP_RESIDUAL: f64 = 1e-10;
    pub const CONSTRAINT_GAP: f64 = 1e-8;
    pub const LINEAR_EXACT: f64 = 1e-10;
    pub const CONTRACTION: f64 = 1e-8;
    pub const SPECTRAL_CONSISTENCY: f64 = 1e-9;
    pub const LYAPUNOV: f64 = 1e-10;
    pub const ORDER_MIN: f64 = 0.8;
    pub const ORDER_MAX: f64 = 1.2;
}

/// A measured quantity and the interval it must lie in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, upper: f64) -> Self {
        Self::within(name, measured, None, Some(upper))
    }

    pub fn at_least(name: impl Into<String>, measured: f64, lower: f64) -> Self {
        Self::within(name, measured, Some(lower), None)
    }

    pub fn within(
        name: impl Into<String>,
        measured: f64,
        lower: Option<f64>,
        upper: Option<f64>,
    ) -> Self {
        let passed = !measured.is_nan()
            && lower.is_none_or(|l| measured >= l)
            && upper.is_none_or(|u| measured <= u);
        Self {
            name: name.into(),
            measured,
            lower,
            upper,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Suite {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Set when the suite could not run to completion.
    pub error: Option<String>,
}

impl Suite {
    fn new(id: u8, name: &'static str) -> Self {
        Self {
            id,
            name,
            passed: false,
            checks: Vec::new(),
            notes: Vec::new(),
            error: None,
        }
    }

    fn finish(mut self, outcome: Result<()>) -> Self {
        if let Err(e) = outcome {
            self.error = Some(e.to_string());
        }
        self.passed = self.error.is_none() && self.checks.iter().all(|c| c.passed);
        self
    }

    fn push(&mut self, check: Check) {
        self.checks.push(check);
    }
}

/// Test hooks that deliberately break the discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Corruption {
    None,
    /// Every symbol table entry multiplied by `factor`.
    Symbol {
        factor: f64,
    },
    /// Haar cell weight multiplied by `factor`.
    Haar {
        factor: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub p: u64,
    pub n: i32,
    pub k: i32,
    pub alpha: f64,
    /// Exponent added to the nonlinear suites' default list.
    pub m: f64,
    pub seed: u64,
    /// Random functions per property suite.
    pub samples: usize,
    /// Random initial pairs per exponent in the contraction suite.
    pub pairs: usize,
    pub tau: f64,
    pub horizon: f64,
    pub refinement: Vec<f64>,
    pub prox: ProxConfig,
    pub corruption: Corruption,
    pub negative_controls: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            p: 2,
            n: 1,
            k: 3,
            alpha: 0.5,
            m: 2.0,
            seed: 0,
            samples: 100,
            pairs: 20,
            tau: 0.1,
            horizon: 1.0,
            refinement: vec![0.1, 0.05, 0.025, 0.0125],
            prox: ProxConfig::default(),
            corruption: Corruption::None,
            negative_controls: true,
        }
    }
}

/// Grid and operator after any corruption has been applied.
pub struct Context {
    pub config: VerifyConfig,
    pub grid: BallGrid,
    pub op: Vladimirov,
}

impl Context {
    pub fn new(config: VerifyConfig) -> Result<Self> {
        let mut grid = BallGrid::new(config.p, config.n, config.k)?;
        if let Corruption::Haar { factor } = config.corruption {
            grid = grid.with_haar_scale(factor);
        }
        let mut op = Vladimirov::new(grid, config.alpha)?;
        if let Corruption::Symbol { factor } = config.corruption {
            for b in 0..grid.cells() {
                op = op.with_symbol_scale(b, factor);
            }
        }
        Ok(Self { config, grid, op })
    }

    fn rng(&self, suite: u8) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(
            self.config
                .seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(suite as u64),
        )
    }

    /// Smoothness used by the AGS suite: `alpha` when it lies in `(0, 1)`.
    fn smoothness(&self) -> f64 {
        if self.config.alpha > 0.0 && self.config.alpha < 1.0 {
            self.config.alpha
        } else {
            0.5
        }
    }

    fn exponents(&self) -> Vec<f64> {
        let mut ms = vec![0.5, 2.0];
        if !ms.contains(&self.config.m) {
            ms.push(self.config.m);
        }
        ms
    }

    fn solver_config(&self, tau: f64) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(tau, self.config.horizon)?;
        cfg.prox = self.config.prox.clone();
        Ok(cfg)
    }
}

pub const SUITE_NAMES: [&str; 11] = [
    "fourier_plancherel",
    "diagonalization",
    "symbol_arbitration",
    "eigenpairs",
    "ags_identity",
    "norm_equivalence",
    "resolvent",
    "contraction",
    "lyapunov",
    "convergence_order",
    "negative_controls",
];

pub fn suite_fourier(ctx: &Context) -> Suite {
    let mut s = Suite::new(1, SUITE_NAMES[0]);
    let mut rng = ctx.rng(1);
    let (mut roundtrip, mut deficit) = (0.0f64, 0.0f64);
    for _ in 0..ctx.config.samples {
        let f = GridFunction::random_complex(ctx.grid, &mut rng);
        roundtrip = roundtrip.max(inverse(&forward(&f)).max_abs_diff(&f));
        deficit = deficit.max(plancherel_deficit(&f));
    }
    s.push(Check::at_most(
        "max inverse(forward(f)) - f",
        roundtrip,
        tol::ROUNDTRIP,
    ));
    s.push(Check::at_most(
        "max plancherel deficit",
        deficit,
        tol::PLANCHEREL,
    ));
    s.finish(Ok(()))
}

pub fn suite_diagonalization(ctx: &Context) -> Suite {
    let mut s = Suite::new(2, SUITE_NAMES[1]);
    let outcome = (|| {
        let mut rng = ctx.rng(2);
        let mut gap = 0.0f64;
        for _ in 0..ctx.config.samples {
            let f = GridFunction::random_complex(ctx.grid, &mut rng);
            gap = gap.max(
                ctx.op
                    .apply_kernel(&f)
                    .max_abs_diff(&ctx.op.apply_spectral(&f)),
            );
        }
        s.push(Check::at_most(
            "max kernel - spectral",
            gap,
            tol::KERNEL_VS_SPECTRAL,
        ));
        let brute = brute_table(&ctx.op)?;
        let mut spread = 0.0f64;
        let mut table_gap = 0.0f64;
        let mut classes: BTreeMap<Option<i32>, (f64, f64)> = BTreeMap::new();
        for (b, &v) in brute.iter().enumerate() {
            let e = ctx.grid.dual_norm_exponent(b)?;
            let entry = classes.entry(e).or_insert((v, v));
            entry.0 = entry.0.min(v);
            entry.1 = entry.1.max(v);
        }
        for (lo, hi) in classes.values() {
            spread = spread.max(hi - lo);
        }
        for (b, &v) in brute.iter().enumerate() {
            table_gap = table_gap.max((v - ctx.op.symbol(b)).abs());
        }
        s.push(Check::at_most(
            "max brute symbol spread within a shell",
            spread,
            tol::SHELL_SPREAD,
        ));
        s.push(Check::at_most(
            "max brute symbol - symbol table",
            table_gap,
            tol::KERNEL_VS_SPECTRAL,
        ));
        Ok(())
    })();
    s.finish(outcome)
}

fn brute_table(op: &Vladimirov) -> Result<Vec<f64>> {
    (0..op.grid().cells())
        .map(|b| op.brute_symbol(b).map(|r| r.value))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArbitrationRow {
    pub b: usize,
    /// `||xi||` of the class; `0` for the trivial class.
    pub dual_norm: f64,
    pub brute: f64,
    pub brute_imag: f64,
    pub predicted: [f64; 3],
    pub gaps: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArbitrationTable {
    pub candidates: [&'static str; 3],
    pub formulas: [&'static str; 3],
    pub rows: Vec<ArbitrationRow>,
    pub max_gaps: [f64; 3],
    /// Candidates whose gap stays below the match tolerance for every class.
    pub matching: Vec<&'static str>,
}

impl ArbitrationTable {
    pub fn build(op: &Vladimirov) -> Result<Self> {
        let grid = op.grid();
        let mut rows = Vec::with_capacity(grid.cells());
        let mut max_gaps = [0.0f64; 3];
        for b in 0..grid.cells() {
            let brute = op.brute_symbol(b)?;
            let mut predicted = [0.0; 3];
            let mut gaps = [0.0; 3];
            for (i, c) in SymbolCandidate::ALL.iter().enumerate() {
                predicted[i] = c.predicted(grid, op.alpha(), op.lambda0(), b)?;
                gaps[i] = (brute.value - predicted[i]).abs();
                max_gaps[i] = max_gaps[i].max(gaps[i]);
            }
            rows.push(ArbitrationRow {
                b,
                dual_norm: grid.dual_norm(b)?,
                brute: brute.value,
                brute_imag: brute.imag,
                predicted,
                gaps,
            });
        }
        let matching = SymbolCandidate::ALL
            .iter()
            .zip(max_gaps)
            .filter(|(_, g)| *g < tol::CANDIDATE_MATCH)
            .map(|(c, _)| c.name())
            .collect();
        Ok(Self {
            candidates: SymbolCandidate::ALL.map(|c| c.name()),
            formulas: SymbolCandidate::ALL.map(|c| c.formula()),
            rows,
            max_gaps,
            matching,
        })
    }
}

pub fn suite_arbitration(ctx: &Context) -> Suite {
    let mut s = Suite::new(3, SUITE_NAMES[2]);
    let outcome = ArbitrationTable::build(&ctx.op).map(|t| {
        for (name, gap) in t.candidates.iter().zip(t.max_gaps) {
            s.notes.push(format!("{name}: max gap {gap:.3e}"));
        }
        s.push(Check::within(
            "number of matching candidates",
            t.matching.len() as f64,
            Some(1.0),
            Some(1.0),
        ));
        if let [only] = t.matching[..] {
            s.notes.push(format!("matching candidate: {only}"));
        }
        let b0 = t.rows[0].brute;
        s.push(Check::at_most(
            "|brute(0) - lambda0|",
            (b0 - ctx.op.lambda0()).abs(),
            tol::CANDIDATE_MATCH,
        ));
    });
    s.finish(outcome)
}

pub fn suite_eigenpairs(ctx: &Context) -> Suite {
    let mut s = Suite::new(4, SUITE_NAMES[3]);
    let outcome = (|| {
        let mut pairs = vec![(eigenfunction_psi0(ctx.grid), ctx.op.lambda0())];
        for j in 1..ctx.grid.p() {
            pairs.push((eigenfunction_first_layer(ctx.grid, j)?, ctx.op.lambda1()));
        }
        let (mut relation, mut unit, mut ortho) = (0.0f64, 0.0f64, 0.0f64);
        for (i, (f, lambda)) in pairs.iter().enumerate() {
            relation = relation.max(ctx.op.apply_kernel(f).max_abs_diff(&f.scale(*lambda)));
            unit = unit.max((l2_norm(f) - 1.0).abs());
            for (g, _) in &pairs[i + 1..] {
                ortho = ortho.max(inner(f, g).norm());
            }
        }
        s.push(Check::at_most(
            "max |D psi - lambda psi|",
            relation,
            tol::EIGEN_RELATION,
        ));
        s.push(Check::at_most("max | ||psi|| - 1 |", unit, tol::UNIT_NORM));
        s.push(Check::at_most(
            "max |(psi_i, psi_j)|",
            ortho,
            tol::ORTHOGONALITY,
        ));
        Ok(())
    })();
    s.finish(outcome)
}

pub fn suite_ags(ctx: &Context) -> Suite {
    let mut s = Suite::new(5, SUITE_NAMES[4]);
    let outcome = (|| {
        let sm = ctx.smoothness();
        s.notes.push(format!("s = {sm}"));
        let mut rng = ctx.rng(5);
        let mut rel = 0.0f64;
        for _ in 0..ctx.config.samples {
            let f = GridFunction::random_complex(ctx.grid, &mut rng);
            let direct = ags_seminorm(&f, sm)?;
            let via = ags_via_multiplier(&f, sm)?;
            rel = rel.max((direct - via).abs() / via.max(f64::MIN_POSITIVE));
        }
        s.push(Check::at_most(
            "max relative direct vs multiplier",
            rel,
            tol::AGS_RELATIVE,
        ));
        let consts = equivalence_constants(&ctx.grid, sm)?;
        let p = ctx.grid.p() as f64;
        s.push(Check::at_most(
            "|C2 - 2 p^(-2s)|",
            (consts.c2 - 2.0 * p.powf(-2.0 * sm)).abs(),
            tol::SANDWICH,
        ));
        let (mut quad, mut below, mut above) = (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for b in 1..ctx.grid.cells() {
            let a = ags_multiplier(&ctx.grid, sm, b)?;
            let q = ags_multiplier_quadrature(&ctx.grid, sm, b)?;
            quad = quad.max((a - q).abs() / (1.0 + a));
            let r = a / ctx.grid.dual_norm(b)?.powf(2.0 * sm);
            below = below.max(consts.c2 - r);
            above = above.max(r - consts.c1);
        }
        s.push(Check::at_most(
            "max shell sum vs quadrature",
            quad,
            tol::MULTIPLIER_QUADRATURE,
        ));
        s.push(Check::at_most(
            "max (C2 - A_s / ||xi||^2s)",
            below,
            tol::SANDWICH,
        ));
        s.push(Check::at_most(
            "max (A_s / ||xi||^2s - C1)",
            above,
            tol::SANDWICH,
        ));
        s.notes
            .push(format!("C1 = {:.6}, C2 = {:.6}", consts.c1, consts.c2));
        Ok(())
    })();
    s.finish(outcome)
}

pub fn suite_equivalence(ctx: &Context) -> Suite {
    let mut s = Suite::new(6, SUITE_NAMES[5]);
    let outcome = (|| {
        let mut rng = ctx.rng(6);
        for alpha in [0.3, 0.5, 0.9] {
            let op = Vladimirov::new(ctx.grid, alpha)?;
            let env = EquivalenceEnvelope::certify(&op)?;
            let bounds = env.bounds();
            let mut excursion = f64::NEG_INFINITY;
            for _ in 0..ctx.config.samples {
                let f = GridFunction::random_complex(ctx.grid, &mut rng);
                for (r, b) in EquivalenceEnvelope::ratios(&f, &op)?.iter().zip(&bounds) {
                    excursion = excursion.max((b.lower / r - 1.0).max(r / b.upper - 1.0));
                }
            }
            s.push(Check::at_most(
                format!("alpha = {alpha}: max relative excursion outside envelope"),
                excursion,
                tol::ENVELOPE_RELATIVE,
            ));
            s.notes.push(format!(
                "alpha = {alpha}: H^a/AGS in [{:.4}, {:.4}], AGS/H1 in [{:.4}, {:.4}], H^a/H1 in [{:.4}, {:.4}]",
                bounds[0].lower, bounds[0].upper, bounds[1].lower, bounds[1].upper,
                bounds[2].lower, bounds[2].upper
            ));
        }
        Ok(())
    })();
    s.finish(outcome)
}

pub fn suite_resolvent(ctx: &Context) -> Suite {
    let mut s = Suite::new(7, SUITE_NAMES[6]);
    let outcome = (|| {
        let mut rng = ctx.rng(7);
        let (mut residual, mut gap, mut linear) = (0.0f64, 0.0f64, 0.0f64);
        for m in [0.5, 1.0, 2.0, 3.0] {
            let nl = PowerLaw::new(m)?;
            for tau in [0.01, 0.1, 1.0] {
                let solver = ProxSolver::new(&ctx.op, &nl, tau, ctx.config.prox.clone())?;
                let f = GridFunction::random_real(ctx.grid, &mut rng);
                let r = solver.solve(&f, None)?;
                residual = residual.max(r.residual_hminus1);
                gap = gap.max(r.constraint_gap);
                if m == 1.0 {
                    let exact =
                        inverse(&forward(&f).multiply(|b| 1.0 / (1.0 + tau * ctx.op.symbol(b))));
                    linear = linear.max(r.u.max_abs_diff(&exact));
                }
            }
        }
        s.push(Check::at_most(
            "max H-1 residual",
            residual,
            tol::STEP_RESIDUAL,
        ));
        s.push(Check::at_most(
            "max constraint gap",
            gap,
            tol::CONSTRAINT_GAP,
        ));
        s.push(Check::at_most(
            "m = 1: max deviation from spectral solve",
            linear,
            tol::LINEAR_EXACT,
        ));
        Ok(())
    })();
    s.finish(outcome)
}

/// `max_n || u_n + dt D phi(u_n) - u_{n-1} ||_{-1}` with `D` applied through the symbol table.
fn spectral_step_defect<N: Nonlinearity>(
    traj: &Trajectory,
    op: &Vladimirov,
    nl: &N,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for (u, t) in traj.states.windows(2).zip(traj.times.windows(2)) {
        let flux = op.apply_spectral(&u[1].map_real(|r| nl.phi(r)));
        let defect = u[1].add(&flux.scale(t[1] - t[0]))?.sub(&u[0])?;
        worst = worst.max(hminus1_norm(&defect, op));
    }
    Ok(worst)
}

pub fn suite_contraction(ctx: &Context) -> Suite {
    let mut s = Suite::new(8, SUITE_NAMES[7]);
    let outcome = (|| {
        let mut rng = ctx.rng(8);
        let cfg = ctx.solver_config(ctx.config.tau)?;
        for m in ctx.exponents() {
            let nl = PowerLaw::new(m)?;
            let stepper = Stepper::new(&ctx.op, &nl, &cfg)?;
            let (mut gap, mut violations, mut consistency) = (f64::NEG_INFINITY, 0usize, 0.0f64);
            for _ in 0..ctx.config.pairs {
                let u0 = GridFunction::random_real(ctx.grid, &mut rng);
                let v0 = GridFunction::random_real(ctx.grid, &mut rng);
                let tu = stepper.run(&u0, &cfg)?.into_result()?;
                let tv = stepper.run(&v0, &cfg)?.into_result()?;
                let mut prev = f64::INFINITY;
                for (a, b) in tu.states.iter().zip(&tv.states) {
                    let d = hminus1_norm(&a.sub(b)?, &ctx.op);
                    if prev.is_finite() {
                        gap = gap.max(d - prev);
                        if d > prev {
                            violations += 1;
                        }
                    }
                    prev = d;
                }
                consistency = consistency
                    .max(spectral_step_defect(&tu, &ctx.op, &nl)?)
                    .max(spectral_step_defect(&tv, &ctx.op, &nl)?);
            }
            s.push(Check::at_most(
                format!("m = {m}: contraction gap"),
                gap,
                tol::CONTRACTION,
            ));
            s.push(Check::at_most(
                format!("m = {m}: increases of the distance sequence beyond rounding"),
                if gap > tol::CONTRACTION {
                    violations as f64
                } else {
                    0.0
                },
                0.0,
            ));
            s.push(Check::at_most(
                format!("m = {m}: step equation through the symbol table"),
                consistency,
                tol::SPECTRAL_CONSISTENCY,
            ));
        }
        Ok(())
    })();
    s.finish(outcome)
}

pub fn suite_lyapunov(ctx: &Context) -> Suite {
    let mut s = Suite::new(9, SUITE_NAMES[8]);
    let outcome = (|| {
        let mut rng = ctx.rng(9);
        let cfg = ctx.solver_config(ctx.config.tau)?;
        for m in ctx.exponents() {
            let nl = PowerLaw::new(m)?;
            let stepper = Stepper::new(&ctx.op, &nl, &cfg)?;
            let (mut psi, mut hm) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for _ in 0..ctx.config.pairs {
                let u0 = GridFunction::random_real(ctx.grid, &mut rng).scale(2.0);
                let t = stepper.run(&u0, &cfg)?.into_result()?;
                psi = psi.max(t.max_increase(|d| d.psi));
                hm = hm.max(t.max_increase(|d| d.hminus1));
            }
            s.push(Check::at_most(
                format!("m = {m}: max step increase of Psi"),
                psi,
                tol::LYAPUNOV,
            ));
            s.push(Check::at_most(
                format!("m = {m}: max step increase of ||u||_-1"),
                hm,
                tol::LYAPUNOV,
            ));
        }
        Ok(())
    })();
    s.finish(outcome)
}

pub fn suite_convergence(ctx: &Context) -> Suite {
    let mut s = Suite::new(10, SUITE_NAMES[9]);
    let outcome = (|| {
        let mut rng = ctx.rng(10);
        let u0 = GridFunction::random_real(ctx.grid, &mut rng);
        // The leading term of the weak residual is (tau / 2) int (u_t, zeta) theta' dt.
        // With zeta = u0 every linear mode contributes to it with the same sign.
        let zeta = u0.clone();
        let taus = &ctx.config.refinement;
        for m in [1.0, 2.0] {
            let nl = PowerLaw::new(m)?;
            let study = convergence_study(
                &u0,
                &zeta,
                taus,
                ctx.config.horizon,
                &ctx.config.prox,
                &ctx.op,
                &nl,
                m == 1.0,
            )?;
            if let (Some(order), Some(errors)) = (study.order, &study.errors) {
                s.push(Check::within(
                    "m = 1: measured order",
                    order,
                    Some(tol::ORDER_MIN),
                    Some(tol::ORDER_MAX),
                ));
                s.notes.push(format!("m = 1 errors: {}", sci(errors)));
            }
            let worst_ratio = study
                .weak_residuals
                .windows(2)
                .map(|w| w[1] / w[0])
                .fold(f64::NEG_INFINITY, f64::max);
            s.push(Check::at_most(
                format!("m = {m}: max ratio of successive weak residuals"),
                worst_ratio,
                1.0 - f64::EPSILON,
            ));
            s.notes.push(format!(
                "m = {m} weak residuals: {}",
                sci(&study.weak_residuals)
            ));
        }
        Ok(())
    })();
    s.finish(outcome)
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn suite_negative_controls(config: &VerifyConfig) -> Suite {
    let mut s = Suite::new(11, SUITE_NAMES[10]);
    let outcome = (|| {
        let corruptions = [
            (
                "symbol table x1.01",
                Corruption::Symbol { factor: 1.01 },
                &[2u8, 8][..],
            ),
            (
                "Haar weight x1.01",
                Corruption::Haar { factor: 1.01 },
                &[2u8, 5, 8][..],
            ),
        ];
        for (label, corruption, required) in corruptions {
            let ctx = Context::new(VerifyConfig {
                corruption,
                negative_controls: false,
                ..config.clone()
            })?;
            for id in [2u8, 5, 8] {
                let failed = !run_suite(&ctx, id).passed;
                let name = format!(
                    "{label}: suite {id} ({}) fails",
                    SUITE_NAMES[id as usize - 1]
                );
                if required.contains(&id) {
                    s.push(Check::at_least(name, failed as u8 as f64, 1.0));
                } else {
                    s.notes.push(format!("{name}: {failed}"));
                }
            }
        }
        Ok(())
    })();
    s.finish(outcome)
}

pub fn run_suite(ctx: &Context, id: u8) -> Suite {
    match id {
        1 => suite_fourier(ctx),
        2 => suite_diagonalization(ctx),
        3 => suite_arbitration(ctx),
        4 => suite_eigenpairs(ctx),
        5 => suite_ags(ctx),
        6 => suite_equivalence(ctx),
        7 => suite_resolvent(ctx),
        8 => suite_contraction(ctx),
        9 => suite_lyapunov(ctx),
        10 => suite_convergence(ctx),
        11 => suite_negative_controls(&ctx.config),
        _ => Suite::new(id, "unknown").finish(Err(Error::IndexOutOfRange {
            index: id as usize,
            cells: 11,
        })),
    }
}

/// Runs the selected suites (all when `ids` is empty).
pub fn run_battery(config: &VerifyConfig, ids: &[u8]) -> Result<Vec<Suite>> {
    let ctx = Context::new(config.clone())?;
    let selected: Vec<u8> = if ids.is_empty() {
        let last = if config.negative_controls { 11 } else { 10 };
        (1..=last).collect()
    } else {
        ids.to_vec()
    };
    Ok(selected.into_iter().map(|id| run_suite(&ctx, id)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig {
            k: 2,
            samples: 10,
            pairs: 3,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn check_bounds() {
        assert!(Check::at_most("x", 1.0, 1.0).passed);
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
        assert!(!Check::at_least("x", 0.0, 1.0).passed);
        assert!(Check::within("x", 1.0, Some(1.0), Some(1.0)).passed);
    }

    #[test]
    fn clean_battery_passes() {
        for suite in run_battery(&small(), &[]).unwrap() {
            assert!(suite.passed, "{suite:#?}");
        }
    }

    #[test]
    fn arbitration_names_the_ladder() {
        let ctx = Context::new(small()).unwrap();
        let t = ArbitrationTable::build(&ctx.op).unwrap();
        assert_eq!(t.matching, vec!["ladder"]);
        assert_eq!(t.rows.len(), ctx.grid.cells());
    }

    #[test]
    fn corrupted_symbol_fails_named_suites() {
        let ctx = Context::new(VerifyConfig {
            corruption: Corruption::Symbol { factor: 1.01 },
            ..small()
        })
        .unwrap();
        assert!(!suite_diagonalization(&ctx).passed);
        assert!(!suite_contraction(&ctx).passed);
        assert!(suite_fourier(&ctx).passed);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        let ctx = Context::new(small()).unwrap();
        let s = run_suite(&ctx, 12);
        assert!(!s.passed && s.error.is_some());
    }
}
