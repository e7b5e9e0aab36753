//! Green's functions with pole at ∞, Robin constants, escape radii and
//! filled-Julia membership tests.
//!
//! The Green's function estimate follows the escape-time construction: once
//! the orbit passes the escape radius the limit `d^{-n} log|p^n(z)|` is
//! refined with the closed-form geometric tail `d^{-n}·log|c|/(d−1)`, which
//! matches the expansion `log|z| + (1/(d−1))·log|c| + O(1/|z|)` at ∞.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::poly::{GeneratorPair, Polynomial, SATURATION_MAGNITUDE};

/// Outcome of a Green's function evaluation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GreenEvaluation {
    /// Green's function estimate in natural-log units; exactly 0 when the
    /// point is classified inside the filled Julia set at this budget.
    pub value: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Orbit magnitude past which the tail correction is accurate to ~1e-9.
const TAIL_CUTOFF: f64 = 1e9;

/// Green's function of the basin of ∞ of `p`, evaluated at `z`.
///
/// Returns 0 with `converged = true` when the orbit stays within
/// `escape_radius` for `max_iter` steps ("inside" is budget-relative).
pub fn green_value(p: &Polynomial, z: Complex64, max_iter: usize, escape_radius: f64) -> GreenEvaluation {
    let d = p.degree() as f64;
    let robin = robin_constant(p);
    let mut orbit = z;
    let mut n = 0usize;
    let mut escaped_at: Option<usize> = None;
    loop {
        let r = orbit.norm();
        if r > escape_radius && escaped_at.is_none() {
            escaped_at = Some(n);
        }
        if r > TAIL_CUTOFF || r >= SATURATION_MAGNITUDE * 0.5 {
            let value = d.powi(-(n as i32)) * (r.ln() + robin);
            return GreenEvaluation {
                value: value.max(0.0),
                iterations_used: n,
                converged: true,
            };
        }
        if n >= max_iter {
            return match escaped_at {
                // Escaped but the budget ran out before the tail cutoff;
                // fall back to the raw escape-time estimate.
                Some(_) => GreenEvaluation {
                    value: (d.powi(-(n as i32)) * (r.ln() + robin)).max(0.0),
                    iterations_used: n,
                    converged: false,
                },
                None => GreenEvaluation {
                    value: 0.0,
                    iterations_used: n,
                    converged: true,
                },
            };
        }
        orbit = p.eval(orbit);
        n += 1;
    }
}

/// Robin constant `(1/(d−1))·log|c|` of the complement of K(p).
pub fn robin_constant(p: &Polynomial) -> f64 {
    p.leading().norm().ln() / (p.degree() as f64 - 1.0)
}

/// True iff the orbit of `z` stays within `escape_radius` for `max_iter`
/// steps.
pub fn in_filled_julia(p: &Polynomial, z: Complex64, max_iter: usize, escape_radius: f64) -> bool {
    let mut orbit = z;
    for _ in 0..max_iter {
        if orbit.norm() > escape_radius {
            return false;
        }
        orbit = p.eval(orbit);
    }
    orbit.norm() <= escape_radius
}

/// Magnitude below which a Robin-constant gap is reported as "equal".
pub const ROBIN_EQUAL_TOL: f64 = 1e-10;

/// Robin-constant gap `r₁ − r₂`; gaps below [`ROBIN_EQUAL_TOL`] flag a
/// common-Julia-set candidate.
pub fn robin_inequality(pair: &GeneratorPair) -> f64 {
    robin_constant(&pair.h1) - robin_constant(&pair.h2)
}

/// Escape radius valid for a single polynomial: |z| > R implies
/// |p(z)| > 2|z|.
pub fn single_escape_radius(p: &Polynomial) -> f64 {
    let d = p.degree();
    let lead = p.leading().norm();
    let tail: f64 = p.coeffs()[..d].iter().map(|c| c.norm()).sum();
    let s = tail / lead;
    // |p(z)| ≥ |c||z|^{d-1}(|z| − S) ≥ |c||z|^d / 2 for |z| ≥ 2(1+S), and
    // |c||z|^d/2 ≥ 2|z| once |z|^{d-1} ≥ 4/|c|.
    let a = 2.0 * (1.0 + s);
    let b = (4.0 / lead).powf(1.0 / (d as f64 - 1.0));
    a.max(b).max(2.0)
}

/// Common outer barrier for the pair: |z| > R implies |h_j(z)| > 2|z| for
/// both generators.
pub fn escape_radius(pair: &GeneratorPair) -> f64 {
    single_escape_radius(&pair.h1).max(single_escape_radius(&pair.h2))
}
