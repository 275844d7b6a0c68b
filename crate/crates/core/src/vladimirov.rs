//! The Vladimirov operator `D_N^alpha` restricted to the ball.
//!
//! Two independent application paths are provided: the kernel form
//! `lambda_0 f(x) + a_p \int_{B_N} |y|^{-alpha-1} [f(x - y) - f(x)] dy`,
//! summed cell by cell, and the diagonal action on Fourier coefficients.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::BallGrid;
use crate::harmonic::{forward, inner, inverse, GridFunction};

/// Smallest eigenvalue `(p - 1) / (p^{alpha+1} - 1) * p^{alpha (1 - N)}`.
pub fn lambda0(p: u64, alpha: f64, n: i32) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let p = p as f64;
    Ok((p - 1.0) / (p.powf(alpha + 1.0) - 1.0) * p.powf(alpha * (1.0 - n as f64)))
}

/// Kernel constant `a_p = (1 - p^alpha) / (1 - p^{-alpha-1})`, negative for `alpha > 0`.
pub fn kernel_constant(p: u64, alpha: f64) -> f64 {
    let p = p as f64;
    (1.0 - p.powf(alpha)) / (1.0 - p.powf(-alpha - 1.0))
}

/// `D_N^alpha` on a fixed grid, with its symbol table and kernel weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Vladimirov {
    grid: BallGrid,
    alpha: f64,
    lambda0: f64,
    a_p: f64,
    symbols: Vec<f64>,
    // a_p * haar / |a'|^{alpha+1}, zero on the cell of 0
    kernel: Vec<f64>,
}

impl Vladimirov {
    pub fn new(grid: BallGrid, alpha: f64) -> Result<Self> {
        let lambda0 = lambda0(grid.p(), alpha, grid.radius_exponent())?;
        let a_p = kernel_constant(grid.p(), alpha);
        let m = grid.cells();
        let mut symbols = Vec::with_capacity(m);
        let mut kernel = Vec::with_capacity(m);
        for idx in 0..m {
            symbols.push(match grid.dual_norm_exponent(idx)? {
                None => lambda0,
                Some(e) => grid.pow(e).powf(alpha),
            });
            kernel.push(match grid.point_abs_exponent(idx)? {
                None => 0.0,
                Some(e) => a_p * grid.haar_weight() / grid.pow(e).powf(alpha + 1.0),
            });
        }
        Ok(Self {
            grid,
            alpha,
            lambda0,
            a_p,
            symbols,
            kernel,
        })
    }

    /// Test hook: multiplies one entry of the symbol table.
    #[doc(hidden)]
    pub fn with_symbol_scale(mut self, b: usize, factor: f64) -> Self {
        self.symbols[b % self.grid.cells()] *= factor;
        self
    }

    pub fn grid(&self) -> &BallGrid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// First-layer eigenvalue `p^{alpha (1 - N)}`.
    pub fn lambda1(&self) -> f64 {
        self.grid
            .pow(1 - self.grid.radius_exponent())
            .powf(self.alpha)
    }

    pub fn a_p(&self) -> f64 {
        self.a_p
    }

    /// Multiplier of `D_N^alpha` on dual class `b`: `lambda_0` for the trivial
    /// class, `||xi||^alpha` otherwise.
    pub fn symbol(&self, b: usize) -> f64 {
        self.symbols[b]
    }

    pub fn symbols(&self) -> &[f64] {
        &self.symbols
    }

    pub fn apply_kernel(&self, f: &GridFunction) -> GridFunction {
        let m = self.grid.cells();
        let v = f.values();
        GridFunction::from_fn(self.grid, |a| {
            let fa = v[a];
            let mut acc = Complex64::new(0.0, 0.0);
            for (shift, &w) in self.kernel.iter().enumerate().skip(1) {
                acc += (v[(a + m - shift) % m] - fa) * w;
            }
            fa * self.lambda0 + acc
        })
    }

    pub fn apply_spectral(&self, f: &GridFunction) -> GridFunction {
        inverse(&forward(f).multiply(|b| self.symbols[b]))
    }

    /// `[D_N^alpha]^{-1}` through the symbol table.
    pub fn apply_inverse(&self, f: &GridFunction) -> GridFunction {
        inverse(&forward(f).multiply(|b| 1.0 / self.symbols[b]))
    }

    /// The kernel form as a real symmetric `M x M` matrix acting on cell values.
    pub fn kernel_matrix(&self) -> DMatrix<f64> {
        let m = self.grid.cells();
        let total: f64 = self.kernel.iter().sum();
        DMatrix::from_fn(m, m, |a, c| {
            if a == c {
                self.lambda0 - total
            } else {
                self.kernel[(a + m - c) % m]
            }
        })
    }

    /// Rayleigh quotient of the kernel form on the character `e_b`, with the
    /// eigen-relation checked cell by cell.
    pub fn brute_symbol(&self, b: usize) -> Result<BruteSymbol> {
        let f = GridFunction::character(self.grid, b);
        let g = self.apply_kernel(&f);
        let q = inner(&g, &f) / inner(&f, &f);
        let spread = g
            .values()
            .iter()
            .zip(f.values())
            .map(|(gv, fv)| (gv / fv - q).norm())
            .fold(0.0, f64::max);
        if spread > 1e-10 * q.norm().max(1.0) {
            return Err(Error::NotEigenfunction { b, spread });
        }
        Ok(BruteSymbol {
            value: q.re,
            imag: q.im.abs(),
            spread,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BruteSymbol {
    pub value: f64,
    pub imag: f64,
    pub spread: f64,
}

/// Closed forms competing to describe the multiplier of `D_N^alpha`.
///
/// Each is stated as a claim about the multiplier of `P = D_N^alpha - lambda_0`
/// and turned into a prediction for `D_N^alpha` by adding `lambda_0` back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolCandidate {
    /// Eigenvalue ladder: `D` acts by `||xi||^alpha`, so `P` by `||xi||^alpha - lambda_0`.
    Ladder,
    /// `a_p \int_{B_N} (chi(y xi) - 1) |y|^{-alpha-1} dy = ||xi||^alpha` taken at face value.
    KernelIntegralLiteral,
    /// `F_N(P u) = p^{-N} ||xi||^alpha F_N u` taken at face value.
    ScaledLiteral,
}

impl SymbolCandidate {
    pub const ALL: [SymbolCandidate; 3] = [
        SymbolCandidate::Ladder,
        SymbolCandidate::KernelIntegralLiteral,
        SymbolCandidate::ScaledLiteral,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SymbolCandidate::Ladder => "ladder",
            SymbolCandidate::KernelIntegralLiteral => "kernel_integral_literal",
            SymbolCandidate::ScaledLiteral => "scaled_literal",
        }
    }

    pub fn formula(&self) -> &'static str {
        match self {
            SymbolCandidate::Ladder => "P = ||xi||^alpha - lambda0",
            SymbolCandidate::KernelIntegralLiteral => "P = ||xi||^alpha",
            SymbolCandidate::ScaledLiteral => "P = p^-N ||xi||^alpha",
        }
    }

    /// Predicted multiplier of `P` on class `b` (zero on the trivial class for the literal forms).
    pub fn predicted_p(&self, grid: &BallGrid, alpha: f64, lambda0: f64, b: usize) -> Result<f64> {
        let norm_alpha = grid.dual_norm_exponent(b)?.map(|e| grid.pow(e).powf(alpha));
        Ok(match (self, norm_alpha) {
            (_, None) => 0.0,
            (SymbolCandidate::Ladder, Some(x)) => x - lambda0,
            (SymbolCandidate::KernelIntegralLiteral, Some(x)) => x,
            (SymbolCandidate::ScaledLiteral, Some(x)) => grid.pow(-grid.radius_exponent()) * x,
        })
    }

    /// Predicted multiplier of `D_N^alpha = P + lambda_0`.
    pub fn predicted(&self, grid: &BallGrid, alpha: f64, lambda0: f64, b: usize) -> Result<f64> {
        Ok(lambda0 + self.predicted_p(grid, alpha, lambda0, b)?)
    }
}

/// `Psi_0 = p^{-N/2}` on the ball.
pub fn eigenfunction_psi0(grid: BallGrid) -> GridFunction {
    let c = grid.pow(-grid.radius_exponent()).sqrt();
    GridFunction::constant(grid, Complex64::new(c, 0.0))
}

/// `p^{-N/2} chi(j p^{N-1} x)` for `j in 1..p`, eigenvalue `p^{alpha (1 - N)}`.
pub fn eigenfunction_first_layer(grid: BallGrid, j: u64) -> Result<GridFunction> {
    let p = grid.p();
    if j == 0 || j >= p {
        return Err(Error::LayerIndex { j, max: p - 1 });
    }
    let n = grid.radius_exponent();
    // K >= 1 - N holds on every valid grid, so the layer is always resolved.
    // x = p^{-N} a, so {j p^{N-1} x}_p = (j a mod p) / p.
    let c = grid.pow(-n).sqrt();
    Ok(GridFunction::from_fn(grid, |a| {
        let phase = std::f64::consts::TAU * ((j * a as u64) % p) as f64 / p as f64;
        Complex64::from_polar(c, phase)
    }))
}
