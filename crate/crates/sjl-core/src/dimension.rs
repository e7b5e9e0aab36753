//! Dimension estimates: truncated pressure sums over preimage trees with
//! bisection for the Bowen dimension, the closed-form lower bound, and
//! box-counting dimension of clouds and masks.

use std::collections::HashSet;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{PixelMask, PointCloud};
use crate::poly::{preimages, GeneratorPair, Polynomial};
use crate::randdyn::least_squares;

/// Hard cap on leaf evaluations of the preimage tree.
pub const LEAF_BUDGET: usize = 10_000_000;

/// Spherical derivative norms below this abort the sum (the base point is
/// too close to the postcritical set).
const NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionReport {
    pub delta_estimate: f64,
    pub word_depths_used: Vec<usize>,
    /// (t, pressure proxy) pairs visited by the bisection at the deepest level.
    pub bisection_trace: Vec<(f64, f64)>,
    pub lower_bound: f64,
    /// |δ(n_max) − δ(n_max−1)|, the level-consistency gap (not a certified
    /// error bound).
    pub richardson_gap: f64,
    pub box_dim: Option<f64>,
    pub r_squared: Option<f64>,
    pub warnings: Vec<String>,
}

/// Closed-form lower bound `log(d₁+d₂) / Σ_j (d_j/(d₁+d₂))·log d_j`.
pub fn dim_lower_bound(d1: usize, d2: usize) -> f64 {
    let (a, b) = (d1 as f64, d2 as f64);
    let total = a + b;
    total.ln() / ((a / total) * a.ln() + (b / total) * b.ln())
}

/// Accumulated log-derivative-norms of all preimage branches, level by level.
pub struct PreimageTree {
    /// `levels[k]` holds log‖D(h_w)_y‖ for every word w of length k+1 and
    /// every preimage y of the base point, counting multiplicities.
    pub levels: Vec<Vec<f64>>,
    /// Duplicated-generator degenerate input detected: the tree was built on
    /// a single generator and word multiplicity 2ⁿ was divided out.
    pub deduplicated: bool,
}

struct TreeCtx<'a> {
    gens: Vec<(&'a Polynomial, Vec<Complex64>)>,
    depth: usize,
}

fn spherical_norm_cached(p: &Polynomial, deriv: &[Complex64], y: Complex64) -> f64 {
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in deriv.iter().rev() {
        dp = dp * y + c;
    }
    dp.norm() * (1.0 + y.norm_sqr()) / (1.0 + p.eval(y).norm_sqr())
}

fn descend(
    ctx: &TreeCtx,
    point: Complex64,
    log_norm: f64,
    level: usize,
    out: &mut [Vec<f64>],
) -> Result<()> {
    for (p, deriv) in &ctx.gens {
        let pre = preimages(p, point)?;
        for y in pre {
            let norm = spherical_norm_cached(p, deriv, y);
            if norm < NORM_FLOOR {
                return Err(Error::PreimageNearCritical { norm });
            }
            let acc = log_norm + norm.ln();
            out[level].push(acc);
            if level + 1 < ctx.depth {
                descend(ctx, y, acc, level + 1, out)?;
            }
        }
    }
    Ok(())
}

/// Enumerates the preimage tree of `z` to depth `n`, accumulating products
/// of spherical derivative norms along branches (depth-first, memory O(n)
/// per branch plus the collected leaf lists).
pub fn preimage_tree(pair: &GeneratorPair, z: Complex64, n: usize) -> Result<PreimageTree> {
    let (d1, d2) = pair.degrees();
    let deduplicated = pair.is_duplicated(1e-12);
    let branch = if deduplicated { d1 } else { d1 + d2 };
    let mut leaves = 1usize;
    for _ in 0..n {
        leaves = leaves.saturating_mul(branch);
        if leaves > LEAF_BUDGET {
            return Err(Error::Parse(format!(
                "preimage tree of depth {n} exceeds the {LEAF_BUDGET} leaf budget"
            )));
        }
    }

    let gens: Vec<(&Polynomial, Vec<Complex64>)> = if deduplicated {
        vec![(&pair.h1, pair.h1.derivative_coeffs())]
    } else {
        vec![
            (&pair.h1, pair.h1.derivative_coeffs()),
            (&pair.h2, pair.h2.derivative_coeffs()),
        ]
    };
    let ctx = TreeCtx { gens, depth: n };

    // Parallelize over the first-level branches, then merge in branch order
    // so the result does not depend on the worker count.
    let mut first: Vec<(f64, Complex64)> = Vec::new();
    for (p, deriv) in &ctx.gens {
        let pre = preimages(p, z)?;
        for y in pre {
            let norm = spherical_norm_cached(p, deriv, y);
            if norm < NORM_FLOOR {
                return Err(Error::PreimageNearCritical { norm });
            }
            first.push((norm.ln(), y));
        }
    }

    let partials: Vec<Result<Vec<Vec<f64>>>> = first
        .par_iter()
        .map(|&(log_norm, y)| {
            let mut out: Vec<Vec<f64>> = (0..n).map(|_| Vec::new()).collect();
            out[0].push(log_norm);
            if n > 1 {
                descend(&ctx, y, log_norm, 1, &mut out)?;
            }
            Ok(out)
        })
        .collect();

    let mut levels: Vec<Vec<f64>> = (0..n).map(|_| Vec::new()).collect();
    for partial in partials {
        let partial = partial?;
        for (k, mut level) in partial.into_iter().enumerate() {
            levels[k].append(&mut level);
        }
    }
    Ok(PreimageTree {
        levels,
        deduplicated,
    })
}

impl PreimageTree {
    /// Level-n inner sum `S_n(z,t) = Σ_words Σ_preimages ‖D(h_w)_y‖^{−t}`.
    pub fn level_sum(&self, level: usize, t: f64) -> f64 {
        self.levels[level - 1].iter().map(|&l| (-t * l).exp()).sum()
    }

    /// Pressure proxy `(1/n)·log S_n(z,t)`.
    pub fn pressure_proxy(&self, level: usize, t: f64) -> f64 {
        self.level_sum(level, t).ln() / level as f64
    }
}

/// Level-n pressure sum at a single parameter t.
pub fn z_sum(pair: &GeneratorPair, z: Complex64, t: f64, n: usize) -> Result<f64> {
    let tree = preimage_tree(pair, z, n)?;
    Ok(tree.level_sum(n, t))
}

fn bisect_zero(tree: &PreimageTree, level: usize, bracket: (f64, f64), tol: f64) -> Result<(f64, Vec<(f64, f64)>)> {
    let (mut lo, mut hi) = bracket;
    let f_lo = tree.pressure_proxy(level, lo);
    let f_hi = tree.pressure_proxy(level, hi);
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::BracketInvalid);
    }
    let mut trace = vec![(lo, f_lo), (hi, f_hi)];
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = tree.pressure_proxy(level, mid);
        trace.push((mid, f_mid));
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), trace))
}

/// Bowen dimension estimate: bisects t on the sign of the level-`n_max`
/// pressure proxy, and reports the level-(n_max−1) comparison.
pub fn bowen_dimension(
    pair: &GeneratorPair,
    z: Complex64,
    n_max: usize,
    t_bracket: (f64, f64),
    tol: f64,
) -> Result<DimensionReport> {
    let mut warnings = Vec::new();
    let tree = preimage_tree(pair, z, n_max)?;
    if tree.deduplicated {
        warnings.push(
            "duplicated-generator degenerate input: word multiplicity 2^n divided out".to_string(),
        );
    }
    let (delta, trace) = bisect_zero(&tree, n_max, t_bracket, tol)?;
    let (delta_prev, _) = bisect_zero(&tree, n_max - 1, t_bracket, tol)?;
    let (d1, d2) = pair.degrees();
    let lower = if tree.deduplicated {
        1.0
    } else {
        dim_lower_bound(d1, d2)
    };
    Ok(DimensionReport {
        delta_estimate: delta,
        word_depths_used: vec![n_max - 1, n_max],
        bisection_trace: trace,
        lower_bound: lower,
        richardson_gap: (delta - delta_prev).abs(),
        box_dim: None,
        r_squared: None,
        warnings,
    })
}

/// Input for box counting.
pub enum BoxInput<'a> {
    Cloud(&'a PointCloud),
    Mask(&'a PixelMask),
}

/// Box-counting dimension: least-squares slope of log(occupied boxes)
/// against log(1/side) over dyadic scales inside `scale_range`.
pub fn box_dimension(input: BoxInput, scale_range: (f64, f64), min_scales: usize) -> Result<(f64, f64)> {
    let (lo_side, hi_side) = scale_range;
    if !(lo_side > 0.0 && hi_side > lo_side) {
        return Err(Error::DegenerateFit("empty scale range".into()));
    }
    let mut sides = Vec::new();
    let mut side = hi_side;
    while side >= lo_side * 0.999 {
        sides.push(side);
        side *= 0.5;
    }
    if sides.len() < min_scales {
        return Err(Error::DegenerateFit(format!(
            "only {} dyadic scales in range, need {min_scales}",
            sides.len()
        )));
    }

    let points: Vec<Complex64> = match input {
        BoxInput::Cloud(cloud) => cloud.points.clone(),
        BoxInput::Mask(mask) => {
            let g = mask.grid;
            (0..g.len())
                .filter(|&idx| mask.bits[idx])
                .map(|idx| g.point(idx % g.nx, idx / g.nx))
                .collect()
        }
    };
    if points.is_empty() {
        return Err(Error::DegenerateFit("no occupied points".into()));
    }

    let origin = points.iter().fold(Complex64::new(f64::INFINITY, f64::INFINITY), |acc, z| {
        Complex64::new(acc.re.min(z.re), acc.im.min(z.im))
    });

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &s in &sides {
        let mut boxes: HashSet<(i64, i64)> = HashSet::new();
        for z in &points {
            let ix = ((z.re - origin.re) / s).floor() as i64;
            let iy = ((z.im - origin.im) / s).floor() as i64;
            boxes.insert((ix, iy));
        }
        xs.push((1.0 / s).ln());
        ys.push((boxes.len() as f64).ln());
    }
    if ys.iter().all(|&y| y == ys[0]) {
        return Err(Error::DegenerateFit("box counts constant across scales".into()));
    }
    Ok(least_squares(&xs, &ys))
}
