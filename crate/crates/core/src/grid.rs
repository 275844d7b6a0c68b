//! The finite quotient `B_N / B_{-K}`.
//!
//! A point index `a` in `[0, M)` stands for the coset
//! `p^{-N} (a_0 + a_1 p + ... + a_{N+K-1} p^{N+K-1}) + B_{-K}` where `a_i` are
//! the base-`p` digits of `a`. A dual index `b` stands for the character class
//! `p^{-K} b + B_{-N}`. The group is cyclic of order `M = p^{N+K}`, so every
//! group operation is integer arithmetic mod `M`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default upper bound on the number of cells.
pub const DEFAULT_CELL_CAP: usize = 1 << 20;

/// Largest `v` with `p^v | n`.
pub fn valuation(n: u64, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::ZeroValuation);
    }
    let mut n = n;
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    Ok(v)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallGrid {
    p: u64,
    n: i32,
    k: i32,
    cells: usize,
    haar_weight: f64,
}

impl BallGrid {
    pub fn new(p: u64, n: i32, k: i32) -> Result<Self> {
        Self::with_cap(p, n, k, DEFAULT_CELL_CAP)
    }

    pub fn with_cap(p: u64, n: i32, k: i32, cap: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let depth = n as i64 + k as i64;
        if depth < 1 {
            return Err(Error::EmptyGrid { n, k });
        }
        let mut cells: u128 = 1;
        for _ in 0..depth {
            cells *= p as u128;
            if cells > cap as u128 {
                return Err(Error::GridTooLarge { cells, cap });
            }
        }
        Ok(Self {
            p,
            n,
            k,
            cells: cells as usize,
            haar_weight: (p as f64).powi(-k),
        })
    }

    /// Test hook: rescales the measure of one cell. Every Haar-weighted sum
    /// picks this up, which is how negative controls corrupt the grid.
    #[doc(hidden)]
    pub fn with_haar_scale(mut self, factor: f64) -> Self {
        self.haar_weight *= factor;
        self
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Ball radius exponent: `B_N = { |x|_p <= p^N }`.
    pub fn radius_exponent(&self) -> i32 {
        self.n
    }

    /// Resolution exponent: functions are constant on cosets of `B_{-K}`.
    pub fn resolution_exponent(&self) -> i32 {
        self.k
    }

    /// Number of cells `M = p^{N+K}`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Number of base-`p` digits of an index, `N + K`.
    pub fn depth(&self) -> u32 {
        (self.n + self.k) as u32
    }

    /// Haar measure of one cell, `p^{-K}`.
    pub fn haar_weight(&self) -> f64 {
        self.haar_weight
    }

    /// Total measure of the ball, `p^N`.
    pub fn ball_measure(&self) -> f64 {
        self.pow(self.n)
    }

    pub fn pow(&self, e: i32) -> f64 {
        (self.p as f64).powi(e)
    }

    fn check(&self, index: usize) -> Result<()> {
        if index >= self.cells {
            Err(Error::IndexOutOfRange {
                index,
                cells: self.cells,
            })
        } else {
            Ok(())
        }
    }

    /// Exponent `e` with `|x|_p = p^e` on cell `a`, or `None` for the cell of 0.
    pub fn point_abs_exponent(&self, a: usize) -> Result<Option<i32>> {
        self.check(a)?;
        if a == 0 {
            return Ok(None);
        }
        let v = valuation(a as u64, self.p)? as i32;
        Ok(Some(self.n - v))
    }

    /// `|x|_p` on cell `a`; the cell of 0 reports 0.
    pub fn point_abs(&self, a: usize) -> Result<f64> {
        Ok(self.point_abs_exponent(a)?.map_or(0.0, |e| self.pow(e)))
    }

    /// Exponent `e` with `||xi|| = p^e` for dual index `b`, `None` for the trivial class.
    pub fn dual_norm_exponent(&self, b: usize) -> Result<Option<i32>> {
        self.check(b)?;
        if b == 0 {
            return Ok(None);
        }
        let v = valuation(b as u64, self.p)? as i32;
        Ok(Some(self.k - v))
    }

    pub fn dual_norm(&self, b: usize) -> Result<f64> {
        Ok(self.dual_norm_exponent(b)?.map_or(0.0, |e| self.pow(e)))
    }

    pub fn group_sub(&self, a1: usize, a2: usize) -> Result<usize> {
        self.check(a1)?;
        self.check(a2)?;
        Ok((a1 + self.cells - a2) % self.cells)
    }

    pub fn group_add(&self, a1: usize, a2: usize) -> Result<usize> {
        self.check(a1)?;
        self.check(a2)?;
        Ok((a1 + a2) % self.cells)
    }

    /// Phase index `ab mod M` of the pairing `{x xi}_p = (ab mod M) / M`.
    pub fn pairing(&self, a: usize, b: usize) -> usize {
        ((a as u64 * b as u64) % self.cells as u64) as usize
    }

    /// `chi(x xi) = exp(2 pi i ab / M)`.
    pub fn character(&self, a: usize, b: usize) -> Result<Complex64> {
        self.check(a)?;
        self.check(b)?;
        let phase = TAU * self.pairing(a, b) as f64 / self.cells as f64;
        Ok(Complex64::from_polar(1.0, phase))
    }

    /// Attainable point norms as exponents, from `1 - K` up to `N`.
    pub fn shell_exponents(&self) -> impl Iterator<Item = i32> {
        (1 - self.k)..=self.n
    }

    /// All cells with `|x|_p = p^e`; `None` selects the cell of 0.
    pub fn shell_by_exponent(&self, e: Option<i32>) -> Result<Vec<usize>> {
        let Some(e) = e else {
            return Ok(vec![0]);
        };
        if e < 1 - self.k || e > self.n {
            return Err(Error::UnattainableRadius(self.pow(e)));
        }
        let v = (self.n - e) as u32;
        let step = self.p.pow(v) as usize;
        Ok((step..self.cells)
            .step_by(step)
            .filter(|a| !((a / step) as u64).is_multiple_of(self.p))
            .collect())
    }

    /// All cells at distance `radius` from the origin.
    pub fn shell(&self, radius: f64) -> Result<Vec<usize>> {
        if radius == 0.0 {
            return self.shell_by_exponent(None);
        }
        if !(radius > 0.0) {
            return Err(Error::UnattainableRadius(radius));
        }
        let e = radius.ln() / (self.p as f64).ln();
        let rounded = e.round();
        if (e - rounded).abs() > 1e-9 {
            return Err(Error::UnattainableRadius(radius));
        }
        self.shell_by_exponent(Some(rounded as i32))
    }

    /// Expected shell size `p^{N+K-v} (1 - 1/p)` for `|x|_p = p^{N-v}`.
    pub fn shell_size(&self, e: i32) -> usize {
        let v = (self.n - e) as u32;
        let outer = self.cells / self.p.pow(v) as usize;
        outer - outer / self.p as usize
    }
}
