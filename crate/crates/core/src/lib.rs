//! Finite-resolution p-adic harmonic analysis on the ball `B_N`, the
//! Vladimirov operator, Sobolev norm families, and an implicit proximal
//! solver for the p-adic porous medium equation `u_t + D_N^alpha phi(u) = 0`.
//!
//! ```
//! use padic_pme::evolve::Stepper;
//! use padic_pme::{BallGrid, GridFunction, PowerLaw, SolverConfig, Vladimirov};
//!
//! let grid = BallGrid::new(2, 1, 4)?;
//! let op = Vladimirov::new(grid, 0.5)?;
//! let nl = PowerLaw::new(2.0)?;
//! let cfg = SolverConfig::new(0.05, 1.0)?;
//! let u0 = GridFunction::from_fn(grid, |a| if a % 4 == 0 { 1.0.into() } else { 0.0.into() });
//! let traj = Stepper::new(&op, &nl, &cfg)?.run(&u0, &cfg)?.into_result()?;
//! let first = traj.diagnostics[0].hminus1;
//! let last = traj.diagnostics.last().unwrap().hminus1;
//! assert!(last < first);
//! # Ok::<(), padic_pme::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolve;
pub mod grid;
pub mod harmonic;
pub mod initial;
pub mod monotone;
pub mod sobolev;
pub mod verify;
pub mod vladimirov;

pub use error::{Error, Result};
pub use evolve::{SolverConfig, Trajectory};
pub use grid::BallGrid;
pub use harmonic::{GridFunction, SpectralFunction};
pub use monotone::{Nonlinearity, PowerLaw, ProxConfig, ProxResult, ProxSolver};
pub use vladimirov::Vladimirov;
