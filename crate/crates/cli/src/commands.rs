use std::collections::BTreeMap;

use padic_pme::evolve::{
    contraction_gap, convergence_study, regularity, zero_mode_defect, Stepper,
};
use padic_pme::sobolev::{ags_multiplier, equivalence_constants, EquivalenceEnvelope, NormReport};
use padic_pme::verify::{run_battery, tol, ArbitrationTable, Check};
use padic_pme::{Error, GridFunction};

use crate::config::{generate, Loaded};
use crate::report::{
    num, ArbitrationSummary, ContractionSummary, DualRow, FailureRecord, GridSummary, NormsSummary,
    Output, PairSummary, Report, ShellRow, TrajectorySummary,
};
use crate::CliError;

pub struct Ctx<'a> {
    pub loaded: &'a Loaded,
    pub out: &'a Output,
    pub quiet: bool,
}

impl Ctx<'_> {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn initial(&self) -> Result<GridFunction, CliError> {
        let c = &self.loaded.config;
        generate(
            &c.initial.generator,
            c.grid()?,
            c.initial_seed(),
            &self.loaded.base_dir,
        )
    }

    fn print_checks(&self, report: &Report) {
        for c in &report.checks {
            let verdict = if c.passed { "ok  " } else { "FAIL" };
            self.say(format!("  [{verdict}] {} = {:.3e}", c.name, c.measured));
        }
    }
}

fn core_err(e: Error) -> CliError {
    match e {
        Error::NonConvergence { .. } => CliError::Solver(e),
        other => CliError::Config(other.to_string()),
    }
}

pub fn grid_info(ctx: &Ctx) -> Result<Report, CliError> {
    let c = &ctx.loaded.config;
    let grid = c.grid()?;
    let op = c.operator()?;
    let mut report = Report::new("grid-info", c);

    let mut point_shells = vec![ShellRow {
        exponent: None,
        radius: 0.0,
        count: 1,
        measure: grid.haar_weight(),
    }];
    for e in grid.shell_exponents() {
        let count = grid.shell_size(e);
        point_shells.push(ShellRow {
            exponent: Some(e),
            radius: grid.pow(e),
            count,
            measure: count as f64 * grid.haar_weight(),
        });
    }
    let mut classes: BTreeMap<Option<i32>, (usize, f64)> = BTreeMap::new();
    for b in 0..grid.cells() {
        let e = grid.dual_norm_exponent(b).map_err(core_err)?;
        classes.entry(e).or_insert((0, op.symbol(b))).0 += 1;
    }
    let dual_classes: Vec<DualRow> = classes
        .into_iter()
        .map(|(e, (count, symbol))| DualRow {
            exponent: e,
            norm: e.map_or(0.0, |e| grid.pow(e)),
            count,
            symbol,
        })
        .collect();

    let shell_total: usize = point_shells.iter().map(|s| s.count).sum();
    report.checks.push(Check::within(
        "cells counted by shells",
        shell_total as f64,
        Some(grid.cells() as f64),
        Some(grid.cells() as f64),
    ));

    ctx.out.table(
        &mut report,
        "shells.csv",
        &["exponent", "radius", "count", "measure"],
        point_shells.iter().map(|s| {
            vec![
                s.exponent.map_or(String::new(), |e| e.to_string()),
                num(s.radius),
                s.count.to_string(),
                num(s.measure),
            ]
        }),
    )?;
    ctx.out.table(
        &mut report,
        "dual_norms.csv",
        &["exponent", "norm", "count", "symbol"],
        dual_classes.iter().map(|d| {
            vec![
                d.exponent.map_or(String::new(), |e| e.to_string()),
                num(d.norm),
                d.count.to_string(),
                num(d.symbol),
            ]
        }),
    )?;

    ctx.say(format!(
        "grid p = {}, N = {}, K = {}: M = {} cells, Haar weight {}",
        grid.p(),
        grid.radius_exponent(),
        grid.resolution_exponent(),
        grid.cells(),
        grid.haar_weight()
    ));
    ctx.say(format!(
        "alpha = {}: lambda0 = {:.12}, lambda1 = {:.12}",
        op.alpha(),
        op.lambda0(),
        op.lambda1()
    ));
    for s in &point_shells {
        ctx.say(format!("  |x| = {:<10} {:>8} cells", s.radius, s.count));
    }
    report.grid = Some(GridSummary {
        p: grid.p(),
        n: grid.radius_exponent(),
        k: grid.resolution_exponent(),
        cells: grid.cells(),
        haar_weight: grid.haar_weight(),
        ball_measure: grid.ball_measure(),
        lambda0: op.lambda0(),
        lambda1: op.lambda1(),
        point_shells,
        dual_classes,
    });
    Ok(report)
}

pub fn symbol_verify(ctx: &Ctx) -> Result<Report, CliError> {
    let c = &ctx.loaded.config;
    let op = c.operator()?;
    let mut report = Report::new("symbol-verify", c);
    let table = ArbitrationTable::build(&op).map_err(core_err)?;
    report.checks.push(Check::within(
        "number of matching candidates",
        table.matching.len() as f64,
        Some(1.0),
        Some(1.0),
    ));
    report.checks.push(Check::at_most(
        "|brute(0) - lambda0|",
        (table.rows[0].brute - op.lambda0()).abs(),
        1e-12,
    ));
    report.checks.push(Check::within(
        "table rows",
        table.rows.len() as f64,
        Some(op.grid().cells() as f64),
        Some(op.grid().cells() as f64),
    ));
    let mut header = vec!["b", "dual_norm", "brute", "brute_imag"];
    header.extend(table.candidates);
    let gap_names: Vec<String> = table
        .candidates
        .iter()
        .map(|n| format!("gap_{n}"))
        .collect();
    header.extend(gap_names.iter().map(String::as_str));
    ctx.out.table(
        &mut report,
        "symbol_table.csv",
        &header,
        table.rows.iter().map(|r| {
            let mut row = vec![
                r.b.to_string(),
                num(r.dual_norm),
                num(r.brute),
                num(r.brute_imag),
            ];
            row.extend(r.predicted.iter().map(|&v| num(v)));
            row.extend(r.gaps.iter().map(|&v| num(v)));
            row
        }),
    )?;
    for ((name, formula), gap) in table
        .candidates
        .iter()
        .zip(table.formulas)
        .zip(table.max_gaps)
    {
        ctx.say(format!("{name:<24} {formula:<24} max gap {gap:.3e}"));
    }
    match table.matching[..] {
        [only] => ctx.say(format!("matching candidate: {only}")),
        _ => ctx.say(format!("matching candidates: {:?}", table.matching)),
    }
    report.arbitration = Some(ArbitrationSummary::from(&table));
    Ok(report)
}

pub fn norms(ctx: &Ctx) -> Result<Report, CliError> {
    let c = &ctx.loaded.config;
    let grid = c.grid()?;
    let op = c.operator()?;
    let s = c.smoothness()?;
    let f = ctx.initial()?;
    let mut report = Report::new("norms", c);
    let values = NormReport::compute(&f, &op, s).map_err(core_err)?;
    let constants = equivalence_constants(&grid, s).map_err(core_err)?;

    let ratio = if values.ags_via_multiplier > 1e-14 {
        values.ags / values.ags_via_multiplier
    } else if values.ags <= 1e-14 {
        1.0
    } else {
        f64::INFINITY
    };
    report.checks.push(Check::within(
        "ags direct / ags via multiplier",
        ratio,
        Some(1.0 - tol::AGS_RELATIVE),
        Some(1.0 + tol::AGS_RELATIVE),
    ));
    let p = grid.p() as f64;
    report.checks.push(Check::at_most(
        "|C2 - 2 p^(-2s)|",
        (constants.c2 - 2.0 * p.powf(-2.0 * s)).abs(),
        tol::SANDWICH,
    ));

    let mut rows = Vec::new();
    let (mut below, mut above) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for b in 0..grid.cells() {
        let a = ags_multiplier(&grid, s, b).map_err(core_err)?;
        let xi = grid.dual_norm(b).map_err(core_err)?;
        let scaled = if b == 0 {
            f64::NAN
        } else {
            a / xi.powf(2.0 * s)
        };
        if b != 0 {
            below = below.max(constants.c2 - scaled);
            above = above.max(scaled - constants.c1);
        }
        rows.push(vec![
            b.to_string(),
            num(xi),
            num(a),
            num(scaled),
            num(op.symbol(b)),
        ]);
    }
    report.checks.push(Check::at_most(
        "max (C2 - A_s / ||xi||^2s)",
        below,
        tol::SANDWICH,
    ));
    report.checks.push(Check::at_most(
        "max (A_s / ||xi||^2s - C1)",
        above,
        tol::SANDWICH,
    ));

    let (envelope, ratios) = if c.model.alpha > 0.0 && c.model.alpha < 1.0 {
        let env = EquivalenceEnvelope::certify(&op).map_err(core_err)?;
        if values.l2 > 0.0 {
            let r = EquivalenceEnvelope::ratios(&f, &op).map_err(core_err)?;
            let names = ["H^alpha / (L2 + AGS)", "(L2 + AGS) / H1", "H^alpha / H1"];
            for ((name, value), bound) in names.iter().zip(r).zip(env.bounds()) {
                report.checks.push(Check::within(
                    format!("{name} within certified envelope"),
                    value,
                    Some(bound.lower * (1.0 - tol::ENVELOPE_RELATIVE)),
                    Some(bound.upper * (1.0 + tol::ENVELOPE_RELATIVE)),
                ));
            }
            (Some(env), Some(r))
        } else {
            (Some(env), None)
        }
    } else {
        (None, None)
    };

    ctx.out.table(
        &mut report,
        "norms.csv",
        &["quantity", "value"],
        [
            ("l2", values.l2),
            ("h_alpha", values.h_alpha),
            ("ags", values.ags),
            ("ags_via_multiplier", values.ags_via_multiplier),
            ("h1", values.h1),
            ("hminus1", values.hminus1),
            ("h1_full", values.h1_full),
            ("hminus1_full", values.hminus1_full),
            ("c1", constants.c1),
            ("c2", constants.c2),
        ]
        .iter()
        .map(|(k, v)| vec![k.to_string(), num(*v)]),
    )?;
    ctx.out.table(
        &mut report,
        "ags_multiplier.csv",
        &["b", "dual_norm", "a_s", "a_s_over_norm_2s", "symbol"],
        rows,
    )?;

    ctx.say(format!("function '{}', s = {s}", c.initial.generator));
    ctx.say(format!(
        "  l2 {:.6e}  H^s {:.6e}  AGS {:.6e}  H1 {:.6e}  H-1 {:.6e}",
        values.l2, values.h_alpha, values.ags, values.h1, values.hminus1
    ));
    ctx.say(format!(
        "  C1 = {:.6}, C2 = {:.6}",
        constants.c1, constants.c2
    ));
    report.norms = Some(NormsSummary {
        s,
        function: c.initial.generator.clone(),
        values,
        constants,
        envelope,
        ratios,
    });
    Ok(report)
}

pub fn solve(ctx: &Ctx) -> Result<Report, CliError> {
    let c = &ctx.loaded.config;
    let op = c.operator()?;
    let nl = c.nonlinearity()?;
    let cfg = c.solver_config()?;
    let u0 = ctx.initial()?;
    let mut report = Report::new("solve", c);
    let traj = Stepper::new(&op, &nl, &cfg)
        .map_err(core_err)?
        .run(&u0, &cfg)
        .map_err(core_err)?;

    ctx.out.table(
        &mut report,
        "trajectory.csv",
        &[
            "t",
            "l2",
            "hminus1",
            "psi",
            "zero_mode_re",
            "zero_mode_im",
            "newton_iters",
            "residual",
        ],
        traj.diagnostics.iter().map(|d| {
            vec![
                num(d.t),
                num(d.l2),
                num(d.hminus1),
                num(d.psi),
                num(d.zero_mode_re),
                num(d.zero_mode_im),
                d.newton_iters.to_string(),
                num(d.residual),
            ]
        }),
    )?;
    ctx.out.table(
        &mut report,
        "final_state.csv",
        &["a", "u"],
        traj.last()
            .values()
            .iter()
            .enumerate()
            .map(|(a, v)| vec![a.to_string(), num(v.re)]),
    )?;

    let psi_inc = traj.max_increase(|d| d.psi);
    let hm_inc = traj.max_increase(|d| d.hminus1);
    let zero = zero_mode_defect(&traj, &op, &nl);
    let summary = TrajectorySummary {
        steps: traj.states.len() - 1,
        complete: traj.is_complete(),
        initial: traj.diagnostics[0],
        last: *traj.diagnostics.last().expect("initial diagnostics"),
        psi_max_increase: psi_inc,
        hminus1_max_increase: hm_inc,
        zero_mode_defect: zero,
        max_residual: traj
            .diagnostics
            .iter()
            .map(|d| d.residual)
            .fold(0.0, f64::max),
        max_constraint_gap: traj
            .diagnostics
            .iter()
            .map(|d| d.constraint_gap)
            .fold(0.0, f64::max),
        max_newton_iters: traj
            .diagnostics
            .iter()
            .map(|d| d.newton_iters)
            .max()
            .unwrap_or(0),
        regularity: regularity(&traj, &op, &nl).map_err(core_err)?,
    };
    if summary.steps > 0 {
        report.checks.push(Check::at_most(
            "max step increase of Psi",
            psi_inc,
            tol::LYAPUNOV,
        ));
        report.checks.push(Check::at_most(
            "max step increase of ||u||_-1",
            hm_inc,
            tol::LYAPUNOV,
        ));
        report.checks.push(Check::at_most(
            "zero-mode law defect",
            zero,
            tol::SPECTRAL_CONSISTENCY,
        ));
    }
    report.checks.push(Check::at_most(
        "max step residual",
        summary.max_residual,
        c.solver.tol,
    ));
    report.checks.push(Check::at_most(
        "max constraint gap",
        summary.max_constraint_gap,
        tol::CONSTRAINT_GAP,
    ));
    if let Some(f) = &traj.failure {
        report.failure = Some(FailureRecord::new(&f.error, Some(f.step)));
        ctx.say(format!("step {} failed: {}", f.step, f.error));
    }
    ctx.say(format!(
        "{} steps to t = {}: ||u||_2 {:.6e} -> {:.6e}, Psi {:.6e} -> {:.6e}",
        summary.steps,
        summary.last.t,
        summary.initial.l2,
        summary.last.l2,
        summary.initial.psi,
        summary.last.psi
    ));
    report.trajectory = Some(summary);
    Ok(report)
}

pub fn contraction(ctx: &Ctx) -> Result<Report, CliError> {
    use rand::SeedableRng;
    let c = &ctx.loaded.config;
    let grid = c.grid()?;
    let op = c.operator()?;
    let nl = c.nonlinearity()?;
    let cfg = c.solver_config()?;
    let mut report = Report::new("contraction", c);

    let mut pairs = vec![(
        c.initial.generator.clone(),
        c.contraction.other.clone(),
        ctx.initial()?,
        generate(
            &c.contraction.other,
            grid,
            c.initial_seed().wrapping_add(1),
            &ctx.loaded.base_dir,
        )?,
    )];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(c.seed);
    for i in 0..c.contraction.pairs {
        let u = GridFunction::random_real(grid, &mut rng);
        let v = GridFunction::random_real(grid, &mut rng);
        pairs.push((
            format!("random pair {i}: u"),
            format!("random pair {i}: v"),
            u,
            v,
        ));
    }

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut max_gap = f64::NEG_INFINITY;
    let steps = cfg.step_sizes().len();
    let times: Vec<f64> = (0..=steps)
        .map(|n| {
            if n == steps {
                cfg.horizon
            } else {
                n as f64 * cfg.tau
            }
        })
        .collect();
    for (i, (first, second, u0, v0)) in pairs.into_iter().enumerate() {
        match contraction_gap(&u0, &v0, &cfg, &op, &nl) {
            Ok(r) => {
                for (n, d) in r.distances.iter().enumerate() {
                    rows.push(vec![i.to_string(), n.to_string(), num(times[n]), num(*d)]);
                }
                max_gap = max_gap.max(r.gap);
                summaries.push(PairSummary {
                    first,
                    second,
                    gap: r.gap,
                    initial_distance: r.distances[0],
                    final_distance: *r.distances.last().unwrap_or(&0.0),
                });
            }
            Err(e @ Error::NonConvergence { .. }) => {
                report.failure = Some(FailureRecord::new(&e, None));
                ctx.say(format!("pair {i} failed: {e}"));
                break;
            }
            Err(e) => return Err(core_err(e)),
        }
    }
    ctx.out.table(
        &mut report,
        "contraction.csv",
        &["pair", "step", "t", "distance"],
        rows,
    )?;
    if !summaries.is_empty() {
        report.checks.push(Check::at_most(
            "max contraction gap",
            max_gap,
            tol::CONTRACTION,
        ));
    }
    ctx.say(format!(
        "{} pairs, max gap {:.3e}",
        summaries.len(),
        max_gap
    ));
    report.contraction = Some(ContractionSummary {
        max_gap,
        pairs: summaries,
    });
    Ok(report)
}

pub fn convergence(ctx: &Ctx) -> Result<Report, CliError> {
    let c = &ctx.loaded.config;
    let op = c.operator()?;
    let nl = c.nonlinearity()?;
    let u0 = ctx.initial()?;
    let mut report = Report::new("convergence", c);
    let linear = c.model.m == 1.0;
    // test function zeta = u0, see the verification battery
    let study = match convergence_study(
        &u0,
        &u0,
        &c.time.refinement,
        c.time.horizon,
        &c.solver,
        &op,
        &nl,
        linear,
    ) {
        Ok(s) => s,
        Err(e @ Error::NonConvergence { .. }) => {
            report.failure = Some(FailureRecord::new(&e, None));
            ctx.say(format!("refinement failed: {e}"));
            return Ok(report);
        }
        Err(e) => return Err(core_err(e)),
    };
    ctx.out.table(
        &mut report,
        "convergence.csv",
        &["tau", "error", "weak_residual"],
        study.taus.iter().enumerate().map(|(i, &tau)| {
            let err = study.errors.as_ref().map_or(String::new(), |e| num(e[i]));
            vec![num(tau), err, num(study.weak_residuals[i])]
        }),
    )?;
    if let Some(order) = study.order {
        report.checks.push(Check::within(
            "measured order",
            order,
            Some(tol::ORDER_MIN),
            Some(tol::ORDER_MAX),
        ));
        ctx.say(format!("measured order {order:.4}"));
    }
    let worst = study
        .weak_residuals
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    report.checks.push(Check::at_most(
        "max ratio of successive weak residuals",
        worst,
        1.0 - f64::EPSILON,
    ));
    for (tau, w) in study.taus.iter().zip(&study.weak_residuals) {
        ctx.say(format!("  tau = {tau:<8} weak residual {w:.4e}"));
    }
    report.convergence = Some(study);
    Ok(report)
}

pub fn verify(ctx: &Ctx) -> Result<Report, CliError> {
    let c = &ctx.loaded.config;
    let vc = c.verify_config()?;
    let mut report = Report::new("verify", c);
    let suites = run_battery(&vc, &c.verify.suites).map_err(core_err)?;
    let mut rows = Vec::new();
    for s in &suites {
        ctx.say(format!(
            "suite {:>2} {:<20} {}",
            s.id,
            s.name,
            if s.passed { "pass" } else { "FAIL" }
        ));
        for ch in &s.checks {
            if !ch.passed {
                ctx.say(format!("    {} = {:.3e}", ch.name, ch.measured));
            }
            rows.push(vec![
                s.id.to_string(),
                s.name.to_string(),
                ch.name.clone(),
                num(ch.measured),
                ch.lower.map_or(String::new(), num),
                ch.upper.map_or(String::new(), num),
                ch.passed.to_string(),
            ]);
        }
        if let Some(e) = &s.error {
            ctx.say(format!("    error: {e}"));
        }
    }
    ctx.out.table(
        &mut report,
        "verify_checks.csv",
        &[
            "suite_id", "suite", "check", "measured", "lower", "upper", "passed",
        ],
        rows,
    )?;
    report.suites = Some(suites);
    Ok(report)
}

pub fn finish(ctx: &Ctx, mut report: Report) -> Result<i32, CliError> {
    report.settle();
    ctx.print_checks(&report);
    let path = ctx.out.report(&report)?;
    ctx.say(format!(
        "{} -> {} ({})",
        report.command,
        path.display(),
        if report.passed { "pass" } else { "fail" }
    ));
    Ok(report.exit_code)
}
