//! Sobolev-type norms on the ball and their equivalence constants.
//!
//! All four families are diagonal in the character basis, so each norm is a
//! weighted energy `sum_b w(b) |F_N f(b)|^2`. The AGS seminorm also has a
//! direct double-sum form used to check the multiplier identity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::BallGrid;
use crate::harmonic::{forward, inner, l2_norm, GridFunction};
use crate::vladimirov::Vladimirov;

fn check_smoothness(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSmoothness(s))
    }
}

/// `sqrt( sum_b |f^(b)|^2 (1 + ||xi||^2)^alpha )`.
pub fn h_alpha_norm(f: &GridFunction, alpha: f64) -> f64 {
    let grid = *f.grid();
    forward(f)
        .weighted_energy(|b| h_alpha_weight(&grid, alpha, b))
        .sqrt()
}

fn h_alpha_weight(grid: &BallGrid, alpha: f64, b: usize) -> f64 {
    let norm = grid.dual_norm(b).unwrap_or(0.0);
    (1.0 + norm * norm).powf(alpha)
}

/// Aronszajn-Gagliardo-Slobodecki seminorm by direct double summation over
/// cell pairs. Same-cell pairs contribute nothing.
pub fn ags_seminorm(f: &GridFunction, s: f64) -> Result<f64> {
    check_smoothness(s)?;
    let grid = *f.grid();
    let m = grid.cells();
    let v = f.values();
    // |x - y|^{-(2s+1)} depends only on the difference cell
    let weights: Vec<f64> = (0..m)
        .map(|d| match grid.point_abs_exponent(d) {
            Ok(Some(e)) => grid.pow(e).powf(-(2.0 * s + 1.0)),
            _ => 0.0,
        })
        .collect();
    let mut total = 0.0;
    for a in 0..m {
        for c in 0..m {
            if a != c {
                total += (v[a] - v[c]).norm_sqr() * weights[(a + m - c) % m];
            }
        }
    }
    let h = grid.haar_weight();
    Ok((total * h * h).sqrt())
}

/// `A_s(xi) = \int_{B_N} |chi(z xi) - 1|^2 |z|^{-(2s+1)} dz` by exact shell sums.
///
/// On the shell `|z| = p^k` the character integrates to `p^k (1 - 1/p)`,
/// `-p^{k-1}` or `0` as `p^k ||xi||` is `<= 1`, `= p` or `>= p^2`; only the
/// last two cases leave a nonzero `|chi - 1|^2`.
pub fn ags_multiplier(grid: &BallGrid, s: f64, b: usize) -> Result<f64> {
    check_smoothness(s)?;
    let Some(e) = grid.dual_norm_exponent(b)? else {
        return Ok(0.0);
    };
    let p = grid.p() as f64;
    let mut total = 0.0;
    for k in (1 - e)..=grid.radius_exponent() {
        let shell = if k + e == 1 {
            2.0
        } else {
            2.0 * (1.0 - 1.0 / p)
        };
        total += shell * p.powf(-2.0 * s * k as f64);
    }
    Ok(total)
}

/// `A_s(xi)` by Haar quadrature over the grid cells. Exact on the grid: the
/// cell of `0` contributes nothing since `chi(z xi) = 1` there.
pub fn ags_multiplier_quadrature(grid: &BallGrid, s: f64, b: usize) -> Result<f64> {
    check_smoothness(s)?;
    let mut total = 0.0;
    for a in 1..grid.cells() {
        let chi = grid.character(a, b)?;
        total += (chi - 1.0).norm_sqr() * grid.point_abs(a)?.powf(-(2.0 * s + 1.0));
    }
    Ok(total * grid.haar_weight())
}

/// The seminorm through the multiplier: `sqrt( p^N sum_b |f^(b)|^2 A_s(b) )`.
pub fn ags_via_multiplier(f: &GridFunction, s: f64) -> Result<f64> {
    check_smoothness(s)?;
    let grid = *f.grid();
    let table = (0..grid.cells())
        .map(|b| ags_multiplier(&grid, s, b))
        .collect::<Result<Vec<_>>>()?;
    Ok((grid.ball_measure() * forward(f).weighted_energy(|b| table[b])).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceConstants {
    /// Largest `A_s(xi) / ||xi||^{2s}` over the grid's nonzero classes.
    pub c1: f64,
    /// `2 p^{-2s}`, the shell `|eta| = p` of the lower-bound integral.
    pub c2: f64,
}

pub fn equivalence_constants(grid: &BallGrid, s: f64) -> Result<EquivalenceConstants> {
    check_smoothness(s)?;
    let p = grid.p() as f64;
    let mut c1: f64 = 0.0;
    for e in (1 - grid.radius_exponent())..=grid.resolution_exponent() {
        // any class with ||xi|| = p^e; b = p^{K-e}
        let b = grid.p().pow((grid.resolution_exponent() - e) as u32) as usize;
        let ratio = ags_multiplier(grid, s, b)? / grid.pow(e).powf(2.0 * s);
        c1 = c1.max(ratio);
    }
    Ok(EquivalenceConstants {
        c1,
        c2: 2.0 * p.powf(-2.0 * s),
    })
}

/// Spectral `H_1` norm: `sqrt( p^N sum_b sym(b) |f^(b)|^2 )`.
pub fn h1_norm(f: &GridFunction, op: &Vladimirov) -> f64 {
    (f.grid().ball_measure() * forward(f).weighted_energy(|b| op.symbol(b))).sqrt()
}

/// Spectral `H_{-1}` norm: `sqrt( p^N sum_b |f^(b)|^2 / sym(b) )`.
pub fn hminus1_norm(f: &GridFunction, op: &Vladimirov) -> f64 {
    (f.grid().ball_measure() * forward(f).weighted_energy(|b| 1.0 / op.symbol(b))).sqrt()
}

/// `(f, g)_{-1} = p^N sum_b f^(b) conj(g^(b)) / sym(b)`, real part.
pub fn hminus1_inner(f: &GridFunction, g: &GridFunction, op: &Vladimirov) -> f64 {
    let (sf, sg) = (forward(f), forward(g));
    let sum: f64 = sf
        .coeffs()
        .iter()
        .zip(sg.coeffs())
        .enumerate()
        .map(|(b, (x, y))| (x * y.conj()).re / op.symbol(b))
        .sum();
    f.grid().ball_measure() * sum
}

/// `sqrt( ||f||^2 + (D f, f) )`, the additive form of the `H_1` product.
pub fn h1_full_norm(f: &GridFunction, op: &Vladimirov) -> f64 {
    (l2_norm(f).powi(2) + inner(&op.apply_kernel(f), f).re).sqrt()
}

/// `sqrt( ||f||^2 + (D^{-1} f, f) )`, the additive form of the `H_{-1}` product.
pub fn hminus1_full_norm(f: &GridFunction, op: &Vladimirov) -> f64 {
    (l2_norm(f).powi(2) + inner(&op.apply_inverse(f), f).re).sqrt()
}

/// Per-function values of every norm family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub l2: f64,
    pub h_alpha: f64,
    pub ags: f64,
    pub ags_via_multiplier: f64,
    pub h1: f64,
    pub hminus1: f64,
    pub h1_full: f64,
    pub hminus1_full: f64,
}

impl NormReport {
    /// `s` doubles as the AGS smoothness and the `H^alpha` order.
    pub fn compute(f: &GridFunction, op: &Vladimirov, s: f64) -> Result<Self> {
        Ok(Self {
            l2: l2_norm(f),
            h_alpha: h_alpha_norm(f, s),
            ags: ags_seminorm(f, s)?,
            ags_via_multiplier: ags_via_multiplier(f, s)?,
            h1: h1_norm(f, op),
            hminus1: hminus1_norm(f, op),
            h1_full: h1_full_norm(f, op),
            hminus1_full: hminus1_full_norm(f, op),
        })
    }
}

/// Certified bounds `lower <= ||f||_a / ||f||_b <= upper` for one pair of norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioBounds {
    pub lower: f64,
    pub upper: f64,
}

impl RatioBounds {
    fn from_weights(num: &[f64], den: &[f64]) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (n, d) in num.iter().zip(den) {
            let r = n / d;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        Self {
            lower: lo.sqrt(),
            upper: hi.sqrt(),
        }
    }

    pub fn contains(&self, ratio: f64, rel_tol: f64) -> bool {
        ratio >= self.lower * (1.0 - rel_tol) && ratio <= self.upper * (1.0 + rel_tol)
    }
}

/// Per-grid envelopes for `H^alpha`, `(L_2 + AGS)` and `H_1` with `s = alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceEnvelope {
    pub alpha: f64,
    pub h_alpha_over_ags: RatioBounds,
    pub ags_over_h1: RatioBounds,
    pub h_alpha_over_h1: RatioBounds,
}

/// Squared-norm weights of the three families, per dual class.
struct FamilyWeights {
    h_alpha: Vec<f64>,
    ags_l2: Vec<f64>,
    h1: Vec<f64>,
}

fn family_weights(op: &Vladimirov) -> Result<FamilyWeights> {
    let grid = *op.grid();
    let alpha = op.alpha();
    let vol = grid.ball_measure();
    let m = grid.cells();
    let mut w = FamilyWeights {
        h_alpha: Vec::with_capacity(m),
        ags_l2: Vec::with_capacity(m),
        h1: Vec::with_capacity(m),
    };
    for b in 0..m {
        w.h_alpha.push(h_alpha_weight(&grid, alpha, b));
        w.ags_l2
            .push(vol * (1.0 + ags_multiplier(&grid, alpha, b)?));
        w.h1.push(vol * op.symbol(b));
    }
    Ok(w)
}

impl EquivalenceEnvelope {
    /// Exhaustive extremization of the multiplier ratios; `alpha` is the operator's order.
    pub fn certify(op: &Vladimirov) -> Result<Self> {
        let alpha = op.alpha();
        check_smoothness(alpha)?;
        let w = family_weights(op)?;
        Ok(Self {
            alpha,
            h_alpha_over_ags: RatioBounds::from_weights(&w.h_alpha, &w.ags_l2),
            ags_over_h1: RatioBounds::from_weights(&w.ags_l2, &w.h1),
            h_alpha_over_h1: RatioBounds::from_weights(&w.h_alpha, &w.h1),
        })
    }

    /// The three measured ratios for one function.
    pub fn ratios(f: &GridFunction, op: &Vladimirov) -> Result<[f64; 3]> {
        let alpha = op.alpha();
        let ha = h_alpha_norm(f, alpha);
        let ags_l2 = (l2_norm(f).powi(2) + ags_seminorm(f, alpha)?.powi(2)).sqrt();
        let h1 = h1_norm(f, op);
        Ok([ha / ags_l2, ags_l2 / h1, ha / h1])
    }

    pub fn bounds(&self) -> [RatioBounds; 3] {
        [
            self.h_alpha_over_ags,
            self.ags_over_h1,
            self.h_alpha_over_h1,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::inverse;
    use crate::vladimirov::eigenfunction_psi0;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one(grid: BallGrid) -> GridFunction {
        GridFunction::constant(grid, Complex64::new(1.0, 0.0))
    }

    /// Brute-force `A_s(xi)`: sum over every cell `z != 0` of the grid.
    fn multiplier_oracle(grid: &BallGrid, s: f64, b: usize) -> f64 {
        (1..grid.cells())
            .map(|a| {
                let chi = grid.character(a, b).unwrap();
                let r = grid.point_abs(a).unwrap();
                (chi - 1.0).norm_sqr() * r.powf(-(2.0 * s + 1.0)) * grid.haar_weight()
            })
            .sum()
    }

    #[test]
    fn h_alpha_examples() {
        let g = BallGrid::new(2, 0, 3).unwrap();
        assert!((h_alpha_norm(&one(g), 0.7) - 1.0).abs() < 1e-14);
        assert_eq!(h_alpha_norm(&GridFunction::zeros(g), 0.7), 0.0);
        let b0 = 3;
        let xi = g.dual_norm(b0).unwrap();
        let f = GridFunction::character(g, b0);
        let expected = (1.0 + xi * xi).powf(0.35);
        assert!((h_alpha_norm(&f, 0.7) - expected).abs() < 1e-12);
    }

    #[test]
    fn ags_examples() {
        let g = BallGrid::new(3, 1, 1).unwrap();
        assert_eq!(ags_seminorm(&one(g), 0.5).unwrap(), 0.0);
        assert!(ags_via_multiplier(&one(g), 0.5).unwrap() < 1e-14);
        let mut ind = GridFunction::zeros(g);
        ind.values_mut()[4] = Complex64::new(1.0, 0.0);
        let v = ags_seminorm(&ind, 0.5).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert_eq!(ags_seminorm(&ind, 1.0), Err(Error::InvalidSmoothness(1.0)));
    }

    #[test]
    fn multiplier_matches_grid_oracle() {
        for (p, n, k) in [(2, 1, 3), (3, 0, 2), (5, -1, 3), (2, 2, 2)] {
            let g = BallGrid::new(p, n, k).unwrap();
            for s in [0.2, 0.5, 0.9] {
                for b in 0..g.cells() {
                    let fast = ags_multiplier(&g, s, b).unwrap();
                    let slow = multiplier_oracle(&g, s, b);
                    assert!(
                        (fast - slow).abs() < 1e-10 * (1.0 + slow),
                        "{p} {n} {k} {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn multiplier_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (p, n) in [(2, 0), (2, 1), (3, 0), (3, 1)] {
            let g = BallGrid::new(p, n, 3 - n).unwrap();
            for _ in 0..25 {
                let f = GridFunction::random_complex(g, &mut rng);
                let direct = ags_seminorm(&f, 0.4).unwrap();
                let spectral = ags_via_multiplier(&f, 0.4).unwrap();
                assert!((direct - spectral).abs() < 1e-10 * direct);
            }
        }
    }

    #[test]
    fn single_character_multiplier() {
        let g = BallGrid::new(2, 1, 2).unwrap();
        for b in 1..g.cells() {
            let f = GridFunction::character(g, b);
            let want = (g.ball_measure() * ags_multiplier(&g, 0.3, b).unwrap()).sqrt();
            assert!((ags_via_multiplier(&f, 0.3).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn c2_examples_and_sandwich() {
        let g2 = BallGrid::new(2, 1, 3).unwrap();
        assert!((equivalence_constants(&g2, 0.5).unwrap().c2 - 1.0).abs() < 1e-15);
        let g3 = BallGrid::new(3, 0, 2).unwrap();
        assert!((equivalence_constants(&g3, 0.5).unwrap().c2 - 2.0 / 3.0).abs() < 1e-15);
        for g in [g2, g3, BallGrid::new(5, -1, 3).unwrap()] {
            for s in [0.1, 0.5, 0.95] {
                let c = equivalence_constants(&g, s).unwrap();
                for b in 1..g.cells() {
                    let r =
                        ags_multiplier(&g, s, b).unwrap() / g.dual_norm(b).unwrap().powf(2.0 * s);
                    assert!(c.c2 <= r * (1.0 + 1e-14) && r <= c.c1 * (1.0 + 1e-14));
                }
            }
        }
    }

    #[test]
    fn h1_and_hminus1_on_psi0() {
        let g = BallGrid::new(3, 1, 2).unwrap();
        let d = Vladimirov::new(g, 0.5).unwrap();
        let psi0 = eigenfunction_psi0(g);
        assert!((h1_norm(&psi0, &d) - d.lambda0().sqrt()).abs() < 1e-12);
        assert!((hminus1_norm(&psi0, &d) - 1.0 / d.lambda0().sqrt()).abs() < 1e-12);
        assert_eq!(h1_norm(&GridFunction::zeros(g), &d), 0.0);
        assert_eq!(hminus1_norm(&GridFunction::zeros(g), &d), 0.0);
    }

    #[test]
    fn additive_forms_and_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = BallGrid::new(2, 1, 3).unwrap();
        let d = Vladimirov::new(g, 0.6).unwrap();
        for _ in 0..20 {
            let f = GridFunction::random_complex(g, &mut rng);
            let h = GridFunction::random_complex(g, &mut rng);
            let form = inner(&d.apply_kernel(&f), &f).re;
            let spectral = h1_norm(&f, &d).powi(2);
            assert!((form - spectral).abs() < 1e-10 * (1.0 + spectral));
            let full = h1_full_norm(&f, &d).powi(2);
            assert!((full - l2_norm(&f).powi(2) - form).abs() < 1e-10 * full);
            assert!(inner(&f, &h).norm() <= hminus1_norm(&f, &d) * h1_norm(&h, &d) * (1.0 + 1e-12));
            let img = d.apply_spectral(&f);
            assert!((hminus1_norm(&img, &d) - h1_norm(&f, &d)).abs() < 1e-10 * h1_norm(&f, &d));
            // H_1 full vs spectral: constants 1 and 1 + 1/lambda_0
            let sp = spectral;
            assert!(sp <= full * (1.0 + 1e-12));
            assert!(full <= sp * (1.0 + 1.0 / d.lambda0()) * (1.0 + 1e-12));
            let sp = hminus1_norm(&f, &d).powi(2);
            let fu = hminus1_full_norm(&f, &d).powi(2);
            assert!(fu >= sp * (1.0 + d.lambda0()) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn norms_scale_homogeneously() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = BallGrid::new(3, 0, 2).unwrap();
        let d = Vladimirov::new(g, 0.5).unwrap();
        let f = GridFunction::random_complex(g, &mut rng);
        let r = NormReport::compute(&f, &d, 0.5).unwrap();
        let r3 = NormReport::compute(&f.scale(-3.0), &d, 0.5).unwrap();
        for (x, y) in [
            (r.l2, r3.l2),
            (r.h_alpha, r3.h_alpha),
            (r.ags, r3.ags),
            (r.h1, r3.h1),
            (r.hminus1, r3.hminus1),
        ] {
            assert!((3.0 * x - y).abs() < 1e-12 * y);
        }
    }

    #[test]
    fn h_alpha_monotone_in_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = BallGrid::new(2, 0, 4).unwrap();
        let f = GridFunction::random_complex(g, &mut rng);
        let f = f.scale(1.0 / l2_norm(&f));
        let mut prev = 0.0;
        for alpha in [0.1, 0.3, 0.5, 0.8, 1.2] {
            let v = h_alpha_norm(&f, alpha);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn envelope_contains_random_and_extremal_ratios() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = BallGrid::new(3, 1, 2).unwrap();
        for alpha in [0.3, 0.5, 0.9] {
            let d = Vladimirov::new(g, alpha).unwrap();
            let env = EquivalenceEnvelope::certify(&d).unwrap();
            for _ in 0..20 {
                let f = GridFunction::random_complex(g, &mut rng);
                let ratios = EquivalenceEnvelope::ratios(&f, &d).unwrap();
                for (r, bd) in ratios.iter().zip(env.bounds()) {
                    assert!(bd.contains(*r, 1e-12));
                }
            }
            // single characters attain the envelope endpoints
            let mut lo = f64::INFINITY;
            for b in 0..g.cells() {
                let f = inverse(&crate::harmonic::SpectralFunction::indicator(
                    g,
                    b,
                    Complex64::new(1.0, 0.0),
                ));
                lo = lo.min(EquivalenceEnvelope::ratios(&f, &d).unwrap()[2]);
            }
            assert!((lo - env.h_alpha_over_h1.lower).abs() < 1e-10);
        }
    }
}
