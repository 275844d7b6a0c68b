//! Browser bindings for the p-adic porous medium toolkit.
//!
//! Each exported function takes plain numbers and strings and returns a JSON
//! string, so the page needs nothing beyond `JSON.parse`. The `*_json`
//! functions hold the logic and build on every target; the `#[wasm_bindgen]`
//! wrappers only convert errors.

use padic_pme::evolve::Stepper;
use padic_pme::initial::InitialCondition;
use padic_pme::sobolev::{ags_multiplier, equivalence_constants, EquivalenceEnvelope, NormReport};
use padic_pme::verify::ArbitrationTable;
use padic_pme::{BallGrid, GridFunction, PowerLaw, SolverConfig, Vladimirov};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest grid the page accepts for table and norm views.
pub const MAX_CELLS: usize = 4096;
/// Largest grid for time stepping, which factors a dense `M x M` matrix.
pub const MAX_EVOLVE_CELLS: usize = 729;
/// Largest number of implicit steps in one request.
pub const MAX_STEPS: usize = 2000;

fn grid(p: u32, n: i32, k: i32, cap: usize) -> Result<BallGrid, String> {
    BallGrid::with_cap(p as u64, n, k, cap).map_err(|e| e.to_string())
}

fn initial(spec: &str, grid: BallGrid, seed: u32) -> Result<GridFunction, String> {
    let ic: InitialCondition = spec.parse().map_err(|e| format!("{e}"))?;
    ic.build(grid, seed as u64).map_err(|e| e.to_string())
}

/// Cells sorted by reversed base-p digits, so that every sub-ball is a
/// contiguous run when plotted left to right.
pub fn leaf_order(grid: &BallGrid) -> Vec<usize> {
    let p = grid.p() as usize;
    let depth = (grid.radius_exponent() + grid.resolution_exponent()) as usize;
    let key = |mut a: usize| {
        let mut r = 0;
        for _ in 0..depth {
            r = r * p + a % p;
            a /= p;
        }
        r
    };
    let mut cells: Vec<usize> = (0..grid.cells()).collect();
    cells.sort_by_key(|&a| key(a));
    cells
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SymbolView {
    cells: usize,
    lambda0: f64,
    table: ArbitrationTable,
}

/// Brute-force symbol of the kernel operator next to the three closed forms.
pub fn symbol_table_json(p: u32, n: i32, k: i32, alpha: f64) -> Result<String, String> {
    let g = grid(p, n, k, MAX_CELLS)?;
    let op = Vladimirov::new(g, alpha).map_err(|e| e.to_string())?;
    let table = ArbitrationTable::build(&op).map_err(|e| e.to_string())?;
    to_json(&SymbolView {
        cells: g.cells(),
        lambda0: op.lambda0(),
        table,
    })
}

#[derive(Serialize)]
struct EvolveView {
    cells: usize,
    order: Vec<usize>,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    l2: Vec<f64>,
    hminus1: Vec<f64>,
    psi: Vec<f64>,
    newton_iters: Vec<usize>,
    failure: Option<String>,
}

/// Implicit Euler trajectory. States are listed in cell order; `order` is the
/// leaf order for plotting.
#[allow(clippy::too_many_arguments)]
pub fn evolve_json(
    p: u32,
    n: i32,
    k: i32,
    alpha: f64,
    m: f64,
    tau: f64,
    horizon: f64,
    generator: &str,
    seed: u32,
) -> Result<String, String> {
    let g = grid(p, n, k, MAX_EVOLVE_CELLS)?;
    let op = Vladimirov::new(g, alpha).map_err(|e| e.to_string())?;
    let nl = PowerLaw::new(m).map_err(|e| e.to_string())?;
    let cfg = SolverConfig::new(tau, horizon).map_err(|e| e.to_string())?;
    if cfg.step_sizes().len() > MAX_STEPS {
        return Err(format!(
            "at most {MAX_STEPS} steps per run, raise tau or lower T"
        ));
    }
    let u0 = initial(generator, g, seed)?;
    let traj = Stepper::new(&op, &nl, &cfg)
        .and_then(|s| s.run(&u0, &cfg))
        .map_err(|e| e.to_string())?;
    let d = &traj.diagnostics;
    to_json(&EvolveView {
        cells: g.cells(),
        order: leaf_order(&g),
        times: traj.times.clone(),
        states: traj.states.iter().map(GridFunction::real_parts).collect(),
        l2: d.iter().map(|x| x.l2).collect(),
        hminus1: d.iter().map(|x| x.hminus1).collect(),
        psi: d.iter().map(|x| x.psi).collect(),
        newton_iters: d.iter().map(|x| x.newton_iters).collect(),
        failure: traj
            .failure
            .as_ref()
            .map(|f| format!("step {}: {}", f.step, f.error)),
    })
}

#[derive(Serialize)]
struct SandwichPoint {
    dual_norm: f64,
    scaled: f64,
}

#[derive(Serialize)]
struct NormsView {
    s: f64,
    norms: NormReport,
    c1: f64,
    c2: f64,
    /// `A_s(xi) / ||xi||^{2s}` for one representative of each dual shell.
    sandwich: Vec<SandwichPoint>,
    envelope: Option<EquivalenceEnvelope>,
    ratios: Option<[f64; 3]>,
}

/// Norm families of a generated function and the AGS multiplier sandwich.
pub fn norms_json(
    p: u32,
    n: i32,
    k: i32,
    alpha: f64,
    s: f64,
    generator: &str,
    seed: u32,
) -> Result<String, String> {
    let g = grid(p, n, k, MAX_CELLS)?;
    let op = Vladimirov::new(g, alpha).map_err(|e| e.to_string())?;
    let f = initial(generator, g, seed)?;
    let norms = NormReport::compute(&f, &op, s).map_err(|e| e.to_string())?;
    let constants = equivalence_constants(&g, s).map_err(|e| e.to_string())?;
    let mut sandwich = Vec::new();
    for e in (1 - g.radius_exponent())..=g.resolution_exponent() {
        let b = g.p().pow((g.resolution_exponent() - e) as u32) as usize;
        let xi = g.dual_norm(b).map_err(|e| e.to_string())?;
        let a = ags_multiplier(&g, s, b).map_err(|e| e.to_string())?;
        sandwich.push(SandwichPoint {
            dual_norm: xi,
            scaled: a / xi.powf(2.0 * s),
        });
    }
    let (envelope, ratios) = if alpha > 0.0 && alpha < 1.0 {
        let env = EquivalenceEnvelope::certify(&op).map_err(|e| e.to_string())?;
        let ratios = if norms.l2 > 0.0 {
            Some(EquivalenceEnvelope::ratios(&f, &op).map_err(|e| e.to_string())?)
        } else {
            None
        };
        (Some(env), ratios)
    } else {
        (None, None)
    };
    to_json(&NormsView {
        s,
        norms,
        c1: constants.c1,
        c2: constants.c2,
        sandwich,
        envelope,
        ratios,
    })
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = symbolTable)]
pub fn symbol_table(p: u32, n: i32, k: i32, alpha: f64) -> Result<String, JsError> {
    js(symbol_table_json(p, n, k, alpha))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn evolve(
    p: u32,
    n: i32,
    k: i32,
    alpha: f64,
    m: f64,
    tau: f64,
    horizon: f64,
    generator: &str,
    seed: u32,
) -> Result<String, JsError> {
    js(evolve_json(
        p, n, k, alpha, m, tau, horizon, generator, seed,
    ))
}

#[wasm_bindgen]
pub fn norms(
    p: u32,
    n: i32,
    k: i32,
    alpha: f64,
    s: f64,
    generator: &str,
    seed: u32,
) -> Result<String, JsError> {
    js(norms_json(p, n, k, alpha, s, generator, seed))
}
