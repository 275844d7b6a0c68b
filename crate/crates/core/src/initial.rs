//! Named initial conditions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::BallGrid;
use crate::harmonic::GridFunction;
use crate::vladimirov::eigenfunction_psi0;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// The ground state `p^{-N/2}`.
    Psi0,
    /// Independent uniform values in `[-1, 1)` from the run seed.
    Random,
    /// `1` on the cell containing `0`, `0` elsewhere.
    Indicator,
    /// Real part of the character `e_b`.
    Character(usize),
    /// Explicit cell values.
    Values(Vec<f64>),
}

impl InitialCondition {
    pub fn build(&self, grid: BallGrid, seed: u64) -> Result<GridFunction> {
        Ok(match self {
            Self::Psi0 => eigenfunction_psi0(grid),
            Self::Random => GridFunction::random_real(grid, &mut ChaCha8Rng::seed_from_u64(seed)),
            Self::Indicator => GridFunction::from_fn(grid, |a| {
                Complex64::new(if a == 0 { 1.0 } else { 0.0 }, 0.0)
            }),
            Self::Character(b) => {
                if *b >= grid.cells() {
                    return Err(Error::IndexOutOfRange {
                        index: *b,
                        cells: grid.cells(),
                    });
                }
                GridFunction::character(grid, *b).map(|z| Complex64::new(z.re, 0.0))
            }
            Self::Values(v) => GridFunction::from_real(grid, v)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownGenerator(pub String);

impl fmt::Display for UnknownGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown initial condition '{}' (expected psi0, random, indicator, character:<b> or file:<path>)",
            self.0
        )
    }
}

impl std::error::Error for UnknownGenerator {}

impl FromStr for InitialCondition {
    type Err = UnknownGenerator;

    /// Parses every generator name except `file:<path>`, which needs I/O.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "psi0" => Ok(Self::Psi0),
            "random" => Ok(Self::Random),
            "indicator" => Ok(Self::Indicator),
            other => other
                .strip_prefix("character:")
                .and_then(|b| b.trim().parse().ok())
                .map(Self::Character)
                .ok_or_else(|| UnknownGenerator(s.to_string())),
        }
    }
}
