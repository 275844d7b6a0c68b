//! Fourier analysis on the ball at finite resolution.
//!
//! The forward transform is `F_N f(xi) = p^{-N} \int_{B_N} chi(x xi) f(x) dx`,
//! evaluated as a Haar-weighted character sum; the inverse uses `chi(-x xi)`.
//! Both are exact for cell-constant functions.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::BallGrid;

/// Above this many cells the radix-`p` transform replaces the direct sum.
pub const FAST_THRESHOLD: usize = 4096;

/// A locally constant function on `B_N`: one value per cell of `B_{-K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: BallGrid,
    values: Vec<Complex64>,
}

/// Fourier coefficients indexed by dual classes `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    grid: BallGrid,
    coeffs: Vec<Complex64>,
}

fn check_len(grid: &BallGrid, len: usize) -> Result<()> {
    if len != grid.cells() {
        return Err(Error::LengthMismatch {
            expected: grid.cells(),
            got: len,
        });
    }
    Ok(())
}

impl GridFunction {
    pub fn new(grid: BallGrid, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: BallGrid, values: &[f64]) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(Self {
            grid,
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        })
    }

    pub fn from_fn(grid: BallGrid, f: impl FnMut(usize) -> Complex64) -> Self {
        Self {
            grid,
            values: (0..grid.cells()).map(f).collect(),
        }
    }

    pub fn zeros(grid: BallGrid) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn constant(grid: BallGrid, c: Complex64) -> Self {
        Self {
            grid,
            values: vec![c; grid.cells()],
        }
    }

    /// The single character `a -> exp(-2 pi i a b / M)`, i.e. the inverse
    /// transform of the indicator of `b`.
    pub fn character(grid: BallGrid, b: usize) -> Self {
        let m = grid.cells();
        Self::from_fn(grid, |a| {
            Complex64::from_polar(1.0, -TAU * grid.pairing(a, b % m) as f64 / m as f64)
        })
    }

    /// Independent uniform real and imaginary parts in `[-1, 1)`.
    pub fn random_complex<R: Rng>(grid: BallGrid, rng: &mut R) -> Self {
        Self::from_fn(grid, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    pub fn random_real<R: Rng>(grid: BallGrid, rng: &mut R) -> Self {
        Self::from_fn(grid, |_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
    }

    pub fn grid(&self) -> &BallGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.im.abs()))
    }

    /// Fails unless every imaginary part is below `tol`.
    pub fn ensure_real(&self, tol: f64) -> Result<()> {
        let im = self.max_imag();
        if im > tol {
            Err(Error::NotReal(im))
        } else {
            Ok(())
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> Self {
        self.map(|v| Complex64::new(f(v.re), 0.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| f(x, y))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |x, y| x - y)
    }

    /// `theta * self + (1 - theta) * other`.
    pub fn lerp(&self, other: &Self, theta: f64) -> Result<Self> {
        self.zip(other, |x, y| x * theta + y * (1.0 - theta))
    }

    /// `x -> f(x - x0)` for the cell `a0` of `x0`.
    pub fn translate(&self, a0: usize) -> Self {
        let m = self.grid.cells();
        Self {
            grid: self.grid,
            values: (0..m).map(|a| self.values[(a + m - a0 % m) % m]).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
    }
}

impl SpectralFunction {
    pub fn new(grid: BallGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, coeffs.len())?;
        Ok(Self { grid, coeffs })
    }

    pub fn indicator(grid: BallGrid, b: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.cells()];
        coeffs[b % grid.cells()] = c;
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &BallGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Multiplies coefficient `b` by `multiplier(b)`.
    pub fn multiply(&self, multiplier: impl Fn(usize) -> f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(b, &c)| c * multiplier(b))
                .collect(),
        }
    }

    /// `sum_b |c_b|^2 w(b)`.
    pub fn weighted_energy(&self, weight: impl Fn(usize) -> f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(b, c)| c.norm_sqr() * weight(b))
            .sum()
    }

    /// Largest violation of `c(-b) = conj(c(b))`.
    pub fn reality_defect(&self) -> f64 {
        let m = self.coeffs.len();
        (0..m)
            .map(|b| (self.coeffs[(m - b) % m] - self.coeffs[b].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
    }
}

/// `exp(sign * 2 pi i j / M)` for `j in 0..M`.
fn roots(m: usize, sign: f64) -> Vec<Complex64> {
    (0..m)
        .map(|j| Complex64::from_polar(1.0, sign * TAU * j as f64 / m as f64))
        .collect()
}

/// `out[b] = sum_a x[a] * roots[ab mod M]`.
fn direct_sum(x: &[Complex64], roots: &[Complex64]) -> Vec<Complex64> {
    let m = x.len();
    (0..m)
        .map(|b| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for &xa in x {
                acc += xa * roots[idx];
                idx += b;
                if idx >= m {
                    idx -= m;
                }
            }
            acc
        })
        .collect()
}

/// Radix-`p` decimation in time. `stride` is `M / x.len()`.
fn radix_sum(x: &[Complex64], roots: &[Complex64], p: usize, stride: usize) -> Vec<Complex64> {
    let len = x.len();
    if len == 1 {
        return x.to_vec();
    }
    let sub_len = len / p;
    let subs: Vec<Vec<Complex64>> = (0..p)
        .map(|r| {
            let part: Vec<Complex64> = x.iter().skip(r).step_by(p).copied().collect();
            radix_sum(&part, roots, p, stride * p)
        })
        .collect();
    let m = roots.len();
    (0..len)
        .map(|k| {
            let mut acc = subs[0][k % sub_len];
            for (r, sub) in subs.iter().enumerate().skip(1) {
                acc += roots[(r * k * stride) % m] * sub[k % sub_len];
            }
            acc
        })
        .collect()
}

fn transform(grid: &BallGrid, x: &[Complex64], sign: f64, fast: bool) -> Vec<Complex64> {
    let table = roots(grid.cells(), sign);
    if fast {
        radix_sum(x, &table, grid.p() as usize, 1)
    } else {
        direct_sum(x, &table)
    }
}

fn forward_with(f: &GridFunction, fast: bool) -> SpectralFunction {
    let grid = f.grid;
    let scale = grid.haar_weight() * grid.pow(-grid.radius_exponent());
    let mut coeffs = transform(&grid, &f.values, 1.0, fast);
    coeffs.iter_mut().for_each(|c| *c *= scale);
    SpectralFunction { grid, coeffs }
}

fn inverse_with(g: &SpectralFunction, fast: bool) -> GridFunction {
    GridFunction {
        grid: g.grid,
        values: transform(&g.grid, &g.coeffs, -1.0, fast),
    }
}

pub fn forward(f: &GridFunction) -> SpectralFunction {
    forward_with(f, f.grid.cells() > FAST_THRESHOLD)
}

pub fn inverse(g: &SpectralFunction) -> GridFunction {
    inverse_with(g, g.grid.cells() > FAST_THRESHOLD)
}

pub fn forward_direct(f: &GridFunction) -> SpectralFunction {
    forward_with(f, false)
}

pub fn forward_fast(f: &GridFunction) -> SpectralFunction {
    forward_with(f, true)
}

pub fn inverse_direct(g: &SpectralFunction) -> GridFunction {
    inverse_with(g, false)
}

pub fn inverse_fast(g: &SpectralFunction) -> GridFunction {
    inverse_with(g, true)
}

/// Haar-weighted `(f, g)_{L_2(B_N)}`, linear in the first slot.
pub fn inner(f: &GridFunction, g: &GridFunction) -> Complex64 {
    let sum: Complex64 = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(x, y)| x * y.conj())
        .sum();
    sum * f.grid.haar_weight()
}

pub fn l2_norm(f: &GridFunction) -> f64 {
    (f.grid.haar_weight() * f.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

/// `| p^{-N} ||f||^2 - sum_b |F_N f(b)|^2 |`.
pub fn plancherel_deficit(f: &GridFunction) -> f64 {
    let spatial = f.grid.pow(-f.grid.radius_exponent()) * l2_norm(f).powi(2);
    let spectral = forward(f).weighted_energy(|_| 1.0);
    (spatial - spectral).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_has_single_coefficient() {
        let g = BallGrid::new(3, 1, 1).unwrap();
        let f = GridFunction::constant(g, Complex64::new(2.0, -1.0));
        let s = forward(&f);
        assert!((s.coeffs()[0] - Complex64::new(2.0, -1.0)).norm() < 1e-14);
        assert!(s.coeffs()[1..].iter().all(|c| c.norm() < 1e-14));
        let back = inverse(&SpectralFunction::indicator(g, 0, c(3.0)));
        assert!(back.max_abs_diff(&GridFunction::constant(g, c(3.0))) < 1e-14);
    }

    #[test]
    fn character_picks_out_its_index() {
        let g = BallGrid::new(2, 0, 4).unwrap();
        for b0 in 0..g.cells() {
            let f = GridFunction::character(g, b0);
            let s = forward(&f);
            let target = SpectralFunction::indicator(g, b0, c(1.0));
            assert!(s.max_abs_diff(&target) < 1e-13);
            let back = inverse(&target);
            assert!(back.max_abs_diff(&f) < 1e-13);
        }
    }

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = BallGrid::new(3, 1, 2).unwrap();
        for _ in 0..20 {
            let f = GridFunction::random_complex(g, &mut rng);
            assert!(inverse(&forward(&f)).max_abs_diff(&f) < 1e-12);
            let s = forward(&f);
            assert!(forward(&inverse(&s)).max_abs_diff(&s) < 1e-12);
        }
    }

    #[test]
    fn l2_examples() {
        let g0 = BallGrid::new(2, 0, 3).unwrap();
        assert_eq!(l2_norm(&GridFunction::zeros(g0)), 0.0);
        assert!((l2_norm(&GridFunction::constant(g0, c(1.0))) - 1.0).abs() < 1e-15);
        let g1 = BallGrid::new(2, 1, 2).unwrap();
        let n = l2_norm(&GridFunction::constant(g1, c(1.0)));
        assert!((n - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn plancherel_examples() {
        let g = BallGrid::new(3, 1, 2).unwrap();
        assert!(plancherel_deficit(&GridFunction::constant(g, c(1.0))) < 1e-14);
        assert_eq!(plancherel_deficit(&GridFunction::zeros(g)), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let f = GridFunction::random_complex(g, &mut rng);
            let tol = 1e-12 * (1.0 + l2_norm(&f).powi(2));
            assert!(plancherel_deficit(&f) < tol);
        }
    }

    #[test]
    fn fast_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (p, n, k) in [(2, 1, 6), (3, 0, 5), (5, 1, 3), (7, -1, 4)] {
            let g = BallGrid::new(p, n, k).unwrap();
            let f = GridFunction::random_complex(g, &mut rng);
            assert!(forward_fast(&f).max_abs_diff(&forward_direct(&f)) < 1e-12);
            let s = forward_direct(&f);
            assert!(inverse_fast(&s).max_abs_diff(&inverse_direct(&s)) < 1e-12);
        }
    }

    #[test]
    fn translation_law_and_reality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = BallGrid::new(2, 1, 4).unwrap();
        let f = GridFunction::random_real(g, &mut rng);
        let s = forward(&f);
        assert!(s.reality_defect() < 1e-14);
        for a0 in [1, 6, 19] {
            let shifted = forward(&f.translate(a0));
            for b in 0..g.cells() {
                let want = g.character(a0, b).unwrap() * s.coeffs()[b];
                assert!((shifted.coeffs()[b] - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn polarized_plancherel_and_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = BallGrid::new(5, 0, 2).unwrap();
        let f = GridFunction::random_complex(g, &mut rng);
        let h = GridFunction::random_complex(g, &mut rng);
        let (sf, sh) = (forward(&f), forward(&h));
        let spectral: Complex64 = sf
            .coeffs()
            .iter()
            .zip(sh.coeffs())
            .map(|(x, y)| x * y.conj())
            .sum();
        let spatial = inner(&f, &h) * g.pow(-g.radius_exponent());
        assert!((spectral - spatial).norm() < 1e-13);

        let combo = f.scale(2.0).add(&h.scale(-0.5)).unwrap();
        let lhs = forward(&combo);
        for b in 0..g.cells() {
            let rhs = sf.coeffs()[b] * 2.0 - sh.coeffs()[b] * 0.5;
            assert!((lhs.coeffs()[b] - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn length_checked() {
        let g = BallGrid::new(2, 1, 1).unwrap();
        assert_eq!(
            GridFunction::from_real(g, &[1.0]),
            Err(Error::LengthMismatch {
                expected: 4,
                got: 1
            })
        );
    }
}
