//! Simultaneous root finding (Aberth–Ehrlich iteration).
//!
//! All roots are found at once because preimage enumeration in pressure sums
//! and chaos games needs the complete multiset, counting multiplicities.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

const MAX_ITERATIONS: usize = 200;
const RESTARTS: usize = 5;
/// Roots closer than this fraction of the root bound are merged and reported
/// with multiplicity.
const MERGE_FRACTION: f64 = 1e-7;

/// Cauchy root bound for a monic coefficient list (highest degree last).
fn cauchy_bound(monic: &[Complex64]) -> f64 {
    let d = monic.len() - 1;
    1.0 + monic[..d].iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn eval_and_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots (with multiplicity) of the polynomial given by `coeffs`, lowest
/// degree first. Accepts any degree ≥ 0 after trimming; degree 0 has no
/// roots, degree 1 is solved in closed form.
pub fn roots_of(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c = coeffs.to_vec();
    while c.last().map(|x| x.norm() == 0.0).unwrap_or(false) && c.len() > 1 {
        c.pop();
    }
    if c.len() <= 1 {
        return Ok(Vec::new());
    }
    if c.len() == 2 {
        return Ok(vec![-c[0] / c[1]]);
    }

    // Peel off exact roots at the origin so monomial-heavy generators get
    // them exactly.
    let zeros = c.iter().take_while(|x| x.norm() == 0.0).count();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let c = &c[zeros..];
    if c.len() == 1 {
        return Ok(roots);
    }
    if c.len() == 2 {
        roots.push(-c[0] / c[1]);
        return Ok(roots);
    }

    let lead = *c.last().unwrap();
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let d = monic.len() - 1;
    let bound = cauchy_bound(&monic);

    let mut best_residual = f64::INFINITY;
    for restart in 0..=RESTARTS {
        // Initial guesses on a circle of the root-bound radius, rotated per
        // restart so symmetric configurations cannot lock the iteration.
        let phase = 0.41 + 1.7 * restart as f64;
        let radius = bound * (0.5 + 0.35 * restart as f64 / (RESTARTS as f64 + 1.0));
        let mut z: Vec<Complex64> = (0..d)
            .map(|k| {
                let ang = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + phase;
                Complex64::from_polar(radius, ang)
            })
            .collect();

        let mut converged = false;
        for _ in 0..MAX_ITERATIONS {
            let mut max_step = 0.0f64;
            for i in 0..d {
                let (p, dp) = eval_and_derivative(&monic, z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let newton = if dp.norm() > 0.0 {
                    p / dp
                } else {
                    // Sitting on a critical point: nudge off it.
                    let nudge = 1e-8 * (1.0 + z[i].norm());
                    z[i] += Complex64::new(nudge, 1e-8);
                    continue;
                };
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    if j != i {
                        let diff = z[i] - z[j];
                        if diff.norm() > 1e-300 {
                            s += diff.inv();
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - newton * s;
                let step = if denom.norm() > 1e-12 {
                    newton / denom
                } else {
                    newton
                };
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
            if max_step < 1e-14 {
                converged = true;
                break;
            }
        }

        let residual = z
            .iter()
            .map(|&zi| eval_and_derivative(&monic, zi).0.norm())
            .fold(0.0, f64::max);
        best_residual = best_residual.min(residual);
        // Residual scale: monic polynomial on the root-bound disk.
        let tol = 1e-12 * (1.0 + bound.powi(d as i32));
        if converged || residual <= tol {
            roots.extend(merge_clusters(z, bound));
            return Ok(roots);
        }
    }

    Err(Error::NonConvergence {
        degree: d,
        residual: best_residual,
    })
}

/// Merge roots closer than `MERGE_FRACTION`·bound into cluster centroids,
/// reported with multiplicity.
fn merge_clusters(mut z: Vec<Complex64>, bound: f64) -> Vec<Complex64> {
    let tol = MERGE_FRACTION * bound.max(1.0);
    let mut out = Vec::with_capacity(z.len());
    while let Some(seed) = z.pop() {
        let mut cluster = vec![seed];
        let mut i = 0;
        while i < z.len() {
            if (z[i] - seed).norm() <= tol {
                cluster.push(z.swap_remove(i));
            } else {
                i += 1;
            }
        }
        let centroid = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
        for _ in 0..cluster.len() {
            out.push(centroid);
        }
    }
    out
}

/// All preimages of `w` under `p`, counting multiplicities; the multiset has
/// exactly `deg(p)` elements and every root y satisfies
/// `|p(y) − w| ≤ 1e-9·max(1,|w|)`.
pub fn preimages(p: &Polynomial, w: Complex64) -> Result<Vec<Complex64>> {
    let mut shifted = p.coeffs().to_vec();
    shifted[0] -= w;
    let roots = roots_of(&shifted)?;
    debug_assert_eq!(roots.len(), p.degree());
    let tol = 1e-9 * w.norm().max(1.0);
    let worst = roots
        .iter()
        .map(|&y| (p.eval(y) - w).norm())
        .fold(0.0, f64::max);
    if worst > tol {
        return Err(Error::NonConvergence {
            degree: p.degree(),
            residual: worst,
        });
    }
    Ok(roots)
}

/// Images under `p` of the roots of `p′` (the finite critical values),
/// deduplicated within tolerance.
pub fn critical_values(p: &Polynomial) -> Result<Vec<Complex64>> {
    let crit = roots_of(&p.derivative_coeffs())?;
    let mut values: Vec<Complex64> = Vec::new();
    for z in crit {
        let v = p.eval(z);
        let tol = 1e-9 * v.norm().max(1.0);
        if !values.iter().any(|&u| (u - v).norm() <= tol) {
            values.push(v);
        }
    }
    Ok(values)
}

/// A fixed point of `p` with multiplier magnitude > 1 + 1e-6; among the
/// repelling candidates the most repelling one is returned (best seed for
/// backward chaos games).
pub fn repelling_fixed_point(p: &Polynomial) -> Result<Complex64> {
    let mut shifted = p.coeffs().to_vec();
    shifted[1] -= Complex64::new(1.0, 0.0);
    let fixed = roots_of(&shifted)?;
    fixed
        .into_iter()
        .map(|z| (z, p.eval_derivative(z).norm()))
        .filter(|&(_, m)| m > 1.0 + 1e-6)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(z, _)| z)
        .ok_or(Error::NoRepellingFixedPoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[f64]) -> Polynomial {
        Polynomial::new(coeffs.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
    }

    fn sorted_norms(mut v: Vec<Complex64>) -> Vec<f64> {
        v.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        v.into_iter().map(|z| z.norm()).collect()
    }

    #[test]
    fn square_root_preimages() {
        let p = poly(&[0.0, 0.0, 1.0]); // z^2
        let mut pre = preimages(&p, c(4.0, 0.0)).unwrap();
        pre.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_eq!(pre.len(), 2);
        assert_relative_eq!(pre[0].re, -2.0, epsilon = 1e-9);
        assert_relative_eq!(pre[1].re, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn cube_roots_of_one() {
        let p = poly(&[0.0, 0.0, 0.0, 2.0]); // 2z^3, w = 2 -> cube roots of 1
        let pre = preimages(&p, c(2.0, 0.0)).unwrap();
        assert_eq!(pre.len(), 3);
        for y in &pre {
            assert_relative_eq!(y.norm(), 1.0, epsilon = 1e-9);
            assert!((p.eval(*y) - c(2.0, 0.0)).norm() <= 1e-9 * 2.0);
        }
    }

    #[test]
    fn double_root_multiplicity() {
        let p = poly(&[-1.0, 0.0, 1.0]); // z^2 - 1, w = -1 -> double root 0
        let pre = preimages(&p, c(-1.0, 0.0)).unwrap();
        assert_eq!(pre.len(), 2);
        assert!((pre[0] - pre[1]).norm() < 1e-6);
        assert!(pre[0].norm() < 1e-6);
    }

    #[test]
    fn critical_values_examples() {
        let p = poly(&[-1.0, 0.0, 1.0]); // z^2-1: CV* = {-1}
        let cv = critical_values(&p).unwrap();
        assert_eq!(cv.len(), 1);
        assert!((cv[0] - c(-1.0, 0.0)).norm() < 1e-9);

        let p = poly(&[0.0, 0.0, 0.0, 2.0]); // 2z^3: CV* = {0}
        let cv = critical_values(&p).unwrap();
        assert_eq!(cv.len(), 1);
        assert!(cv[0].norm() < 1e-9);

        let p = poly(&[0.0, -3.0, 0.0, 1.0]); // z^3-3z: CV* = {-2, 2}
        let cv = critical_values(&p).unwrap();
        assert_eq!(sorted_norms(cv.clone()), vec![2.0, 2.0]);
        assert!(cv.iter().any(|v| (v - c(2.0, 0.0)).norm() < 1e-8));
        assert!(cv.iter().any(|v| (v - c(-2.0, 0.0)).norm() < 1e-8));
    }

    #[test]
    fn repelling_fixed_points() {
        let p = poly(&[0.0, 0.0, 1.0]); // z^2 -> 1
        let z = repelling_fixed_point(&p).unwrap();
        assert_relative_eq!(z.re, 1.0, epsilon = 1e-9);

        let p = poly(&[0.0, 0.0, 0.0, 2.0]); // 2z^3 -> 2^{-1/2}
        let z = repelling_fixed_point(&p).unwrap();
        assert_relative_eq!(z.norm(), 0.5f64.sqrt(), epsilon = 1e-9);

        let p = poly(&[-1.0, 0.0, 1.0]); // z^2-1 -> golden ratio
        let z = repelling_fixed_point(&p).unwrap();
        assert_relative_eq!(z.re, (1.0 + 5.0f64.sqrt()) / 2.0, epsilon = 1e-9);
        assert!(p.eval_derivative(z).norm() > 1.0 + 1e-6);
    }

    #[test]
    fn no_repelling_fixed_point_for_parabolic() {
        // z^2 + 1/4 has a single parabolic fixed point (multiplier 1).
        let p = poly(&[0.25, 0.0, 1.0]);
        assert!(matches!(
            repelling_fixed_point(&p),
            Err(Error::NoRepellingFixedPoint)
        ));
    }

    #[test]
    fn high_degree_random_poly() {
        // Residual contract on a degree-12 polynomial with mixed coefficients.
        let coeffs: Vec<Complex64> = (0..13)
            .map(|k| c((k as f64 * 0.37).sin(), (k as f64 * 0.91).cos() * 0.5))
            .collect();
        let p = Polynomial::new(coeffs).unwrap();
        let w = c(0.3, -0.2);
        let pre = preimages(&p, w).unwrap();
        assert_eq!(pre.len(), 12);
        for y in pre {
            assert!((p.eval(y) - w).norm() <= 1e-9);
        }
    }
}
