//! The i.i.d. random dynamical system on the sphere: transition operator,
//! the escape-probability field T (grid fixed point and Monte Carlo),
//! Takagi-type derivative fields ∂ⁿT/∂pⁿ, minimal sets, the stationary
//! measure limit, maximal-relative-entropy sampling, and Hölder-exponent
//! bounds and estimators.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{spherical_distance, GridSpec, PixelMask, PointCloud, ScalarField};
use crate::julia::{semigroup_filled_mask, semigroup_julia_cloud, BranchLaw};
use crate::poly::GeneratorPair;
use crate::potential::escape_radius;

/// Bernoulli weight: h₁ is chosen with probability p, h₂ with 1−p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParam {
    p: f64,
}

impl WeightParam {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(WeightParam { p })
        } else {
            Err(Error::Parse(format!("weight p = {p} must lie in (0,1)")))
        }
    }

    pub fn p1(&self) -> f64 {
        self.p
    }

    pub fn p2(&self) -> f64 {
        1.0 - self.p
    }
}

/// Depth of the word tree used to certify the bounded core.
pub const CORE_DEPTH: usize = 12;

/// The transition operator `M(φ)(z) = p·φ(h₁(z)) + (1−p)·φ(h₂(z))` acting on
/// grid fields, together with the certified-core mask and escape radius that
/// implement the boundary conditions.
pub struct TransitionOp<'a> {
    pub pair: &'a GeneratorPair,
    pub weights: WeightParam,
    pub core: PixelMask,
    pub escape: f64,
}

impl<'a> TransitionOp<'a> {
    /// Builds the operator on `grid`, certifying the core by a word tree of
    /// depth `core_depth`. The grid must cover the escape disk.
    pub fn new(pair: &'a GeneratorPair, weights: WeightParam, grid: GridSpec, core_depth: usize) -> Self {
        let escape = escape_radius(pair);
        let core = semigroup_filled_mask(pair, grid, core_depth, escape);
        TransitionOp {
            pair,
            weights,
            core,
            escape,
        }
    }

    /// As [`TransitionOp::new`] with an explicit escape radius (any radius
    /// with the doubling property is valid; smaller radii allow finer grids).
    pub fn with_escape(
        pair: &'a GeneratorPair,
        weights: WeightParam,
        grid: GridSpec,
        core_depth: usize,
        escape: f64,
    ) -> Self {
        let core = semigroup_filled_mask(pair, grid, core_depth, escape);
        TransitionOp {
            pair,
            weights,
            core,
            escape,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.core.grid
    }

    /// Field lookup with the escape-radius convention.
    fn lookup(&self, field: &ScalarField, w: Complex64) -> f64 {
        if w.norm() > self.escape {
            field.outside_value
        } else {
            field.value_at(w)
        }
    }

    /// One sweep of the transition operator; core pixels are pinned to the
    /// field's `core_value`.
    pub fn apply(&self, field: &ScalarField) -> ScalarField {
        let g = self.grid();
        let values: Vec<f64> = (0..g.len())
            .into_par_iter()
            .map(|idx| {
                if self.core.bits[idx] {
                    return field.core_value;
                }
                let z = g.point(idx % g.nx, idx / g.nx);
                self.weights.p1() * self.lookup(field, self.pair.h1.eval(z))
                    + self.weights.p2() * self.lookup(field, self.pair.h2.eval(z))
            })
            .collect();
        ScalarField {
            grid: g,
            values,
            outside_value: field.outside_value,
            core_value: field.core_value,
        }
    }

    /// Pointwise evaluation through `depth` exact applications of the
    /// functional equation, reading the grid only at the leaves. Probing a
    /// converged field this way removes most of the pixel-scale
    /// interpolation error.
    pub fn refined_value(&self, field: &ScalarField, z: Complex64, depth: usize) -> f64 {
        if z.norm() > self.escape {
            return field.outside_value;
        }
        if self.core.contains(z) {
            return field.core_value;
        }
        if depth == 0 {
            return field.value_at(z);
        }
        self.weights.p1() * self.refined_value(field, self.pair.h1.eval(z), depth - 1)
            + self.weights.p2() * self.refined_value(field, self.pair.h2.eval(z), depth - 1)
    }
}

/// Result of the T-field fixed-point iteration.
#[derive(Debug, Clone)]
pub struct TFieldResult {
    pub field: ScalarField,
    pub converged: bool,
    pub sweeps_used: usize,
    pub final_change: f64,
}

/// Computes the escape-probability field T as the fixed point of the
/// transition operator with boundary values 1 beyond the escape radius and
/// 0 on the certified core.
pub fn compute_t(op: &TransitionOp, max_sweeps: usize, tol: f64) -> TFieldResult {
    let g = op.grid();
    let mut field = ScalarField {
        grid: g,
        values: (0..g.len())
            .map(|idx| {
                if op.core.bits[idx] {
                    0.0
                } else if g.point(idx % g.nx, idx / g.nx).norm() > op.escape {
                    1.0
                } else {
                    0.5
                }
            })
            .collect(),
        outside_value: 1.0,
        core_value: 0.0,
    };
    let mut change = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        let next = op.apply(&field);
        change = next.sup_distance(&field);
        field = next;
        sweeps += 1;
        if change < tol {
            break;
        }
    }
    TFieldResult {
        field,
        converged: change < tol,
        sweeps_used: sweeps,
        final_change: change,
    }
}

/// Monte Carlo estimate of T at a point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    /// Fraction of words that neither escaped nor could be ruled out within
    /// the iteration budget; they are counted as non-escaping.
    pub unresolved_fraction: f64,
}

const MC_BATCHES: usize = 256;

/// Fraction of i.i.d. random words whose orbit of `z` exceeds the escape
/// radius within `max_iter` steps, with binomial standard error.
pub fn monte_carlo_t(
    pair: &GeneratorPair,
    w: WeightParam,
    z: Complex64,
    n_samples: usize,
    max_iter: usize,
    escape: f64,
    seed: u64,
) -> MonteCarloEstimate {
    let per_batch = n_samples.div_ceil(MC_BATCHES);
    let results: Vec<(usize, usize, usize)> = (0..MC_BATCHES)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch as u64 + 1);
            let want = per_batch.min(n_samples.saturating_sub(batch * per_batch));
            let mut escapes = 0usize;
            let mut unresolved = 0usize;
            for _ in 0..want {
                let mut orbit = z;
                let mut escaped = false;
                for _ in 0..max_iter {
                    if orbit.norm() > escape {
                        escaped = true;
                        break;
                    }
                    orbit = if rng.gen_bool(w.p1()) {
                        pair.h1.eval(orbit)
                    } else {
                        pair.h2.eval(orbit)
                    };
                }
                if escaped || orbit.norm() > escape {
                    escapes += 1;
                } else {
                    unresolved += 1;
                }
            }
            (want, escapes, unresolved)
        })
        .collect();
    let n: usize = results.iter().map(|r| r.0).sum();
    let escapes: usize = results.iter().map(|r| r.1).sum();
    let unresolved: usize = results.iter().map(|r| r.2).sum();
    let p_hat = escapes as f64 / n as f64;
    MonteCarloEstimate {
        estimate: p_hat,
        standard_error: (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
        unresolved_fraction: unresolved as f64 / n as f64,
    }
}

/// Builds ψ₁,…,ψ_n (∂ⁿT/∂pⁿ) by the truncated Neumann series
/// `ψ_{k+1} = Σ_j M^j((k+1)(ψ_k∘h₁ − ψ_k∘h₂))` with boundary value 0 on the
/// core and beyond the escape radius.
pub fn takagi_derivative(
    op: &TransitionOp,
    t_field: &ScalarField,
    n: usize,
    series_len: usize,
    tol: f64,
) -> Result<Vec<ScalarField>> {
    let g = op.grid();
    let mut levels: Vec<ScalarField> = Vec::with_capacity(n);
    let mut prev = t_field.clone();
    for level in 1..=n {
        let factor = level as f64;
        // Source term (k+1)(ψ_k∘h₁ − ψ_k∘h₂), zero on the core.
        let source_values: Vec<f64> = (0..g.len())
            .into_par_iter()
            .map(|idx| {
                if op.core.bits[idx] {
                    return 0.0;
                }
                let z = g.point(idx % g.nx, idx / g.nx);
                if z.norm() > op.escape {
                    return 0.0;
                }
                factor * (op.lookup(&prev, op.pair.h1.eval(z)) - op.lookup(&prev, op.pair.h2.eval(z)))
            })
            .collect();
        let source = ScalarField {
            grid: g,
            values: source_values,
            outside_value: 0.0,
            core_value: 0.0,
        };

        let mut acc = source.clone();
        let mut term = source;
        let mut last_norms: Vec<f64> = vec![term.sup_norm()];
        for _ in 1..series_len {
            term = op.apply(&term);
            let norm = term.sup_norm();
            last_norms.push(norm);
            for (a, t) in acc.values.iter_mut().zip(&term.values) {
                *a += t;
            }
            if norm < tol / 10.0 {
                break;
            }
        }
        // Require eventual geometric decay of the term norms.
        if last_norms.len() >= 6 {
            let tail = &last_norms[last_norms.len() - 5..];
            let mut ratios = Vec::new();
            for k in 1..tail.len() {
                if tail[k - 1] > 1e-300 {
                    ratios.push(tail[k] / tail[k - 1]);
                }
            }
            let mean_ratio = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
            let final_norm = *last_norms.last().unwrap();
            if final_norm >= tol / 10.0 && mean_ratio > 0.95 {
                return Err(Error::SeriesNotDecaying { ratio: mean_ratio });
            }
        }
        levels.push(acc.clone());
        prev = acc;
    }
    Ok(levels)
}

/// Approximation of the bounded minimal set L.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimalSetCloud {
    pub points: PointCloud,
    /// The other minimal set of the system is {∞}.
    pub contains_infinity_partner: bool,
}

/// Approximates the unique bounded minimal set by a forward random orbit
/// started on the attracting set of the inner generator.
pub fn minimal_set(
    pair: &GeneratorPair,
    n_points: usize,
    n_burn: usize,
    seed: u64,
) -> Result<MinimalSetCloud> {
    let escape = escape_radius(pair);
    // Seed: limit of the critical orbit of whichever generator keeps its
    // critical orbit bounded (the inner generator in the nested-K setting).
    let mut seed_point = None;
    'outer: for j in [1usize, 2usize] {
        let gen = pair.generator(j);
        for &cv in pair.critical_values(j) {
            let mut z = cv;
            let mut ok = true;
            for _ in 0..400 {
                if z.norm() > escape {
                    ok = false;
                    break;
                }
                z = gen.eval(z);
            }
            if ok && z.norm() <= escape {
                // Prefer the generator whose attracting set the *other* one
                // keeps bounded as well.
                let mut y = z;
                let mut both = true;
                for _ in 0..200 {
                    y = pair.generator(3 - j).eval(y);
                    if y.norm() > escape {
                        both = false;
                        break;
                    }
                }
                if both {
                    seed_point = Some(z);
                    break 'outer;
                }
                if seed_point.is_none() {
                    seed_point = Some(z);
                }
            }
        }
    }
    let start = seed_point.ok_or(Error::OrbitEscaped { steps: 0 })?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0xA11CE);
    let mut z = start;
    let mut points = Vec::with_capacity(n_points);
    for step in 0..n_burn + n_points {
        if z.norm() > escape {
            return Err(Error::OrbitEscaped { steps: step });
        }
        z = if rng.gen_bool(0.5) {
            pair.h1.eval(z)
        } else {
            pair.h2.eval(z)
        };
        if step >= n_burn {
            points.push(z);
        }
    }
    Ok(MinimalSetCloud {
        points: PointCloud::new(points, "minimal-set"),
        contains_infinity_partner: true,
    })
}

/// Report of the stationary-measure limit check
/// `Mⁿφ ≈ T·φ(∞) + (1−T)·∫φ dν̂`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationaryReport {
    pub max_defect: f64,
    pub n_sweeps: usize,
    pub probes: usize,
}

/// Applies `n_sweeps` transitions to `phi` and reports the max defect
/// against the limit identity at the probe points. `phi` must carry its own
/// boundary data: `outside_value = φ(∞)` and `core_value = ∫φ dν̂`.
pub fn stationary_measure_check(
    op: &TransitionOp,
    t_field: &ScalarField,
    phi: &ScalarField,
    probes: &[Complex64],
    n_sweeps: usize,
) -> StationaryReport {
    let phi_inf = phi.outside_value;
    let nu_integral = phi.core_value;
    let mut evolved = phi.clone();
    for _ in 0..n_sweeps {
        evolved = op.apply(&evolved);
    }
    let mut max_defect = 0.0f64;
    for &z in probes {
        let t = t_field.value_at(z);
        let limit = t * phi_inf + (1.0 - t) * nu_integral;
        let got = evolved.value_at(z);
        max_defect = max_defect.max((got - limit).abs());
    }
    StationaryReport {
        max_defect,
        n_sweeps,
        probes: probes.len(),
    }
}

/// Samples the maximal relative entropy measure λ: backward chaos game
/// choosing generator j with probability p_j and the branch uniformly among
/// its d_j preimages.
pub fn sample_lambda(
    pair: &GeneratorPair,
    w: WeightParam,
    n_points: usize,
    seed: u64,
) -> Result<PointCloud> {
    semigroup_julia_cloud(pair, n_points, seed, BranchLaw::MapWeighted(w.p1()))
}

/// Closed-form Hölder-exponent bound
/// `−(p log p + (1−p) log(1−p)) / (p log d₁ + (1−p) log d₂)`.
pub fn holder_bound_entropy(w: WeightParam, d1: usize, d2: usize) -> f64 {
    let (p, q) = (w.p1(), w.p2());
    -(p * p.ln() + q * q.ln()) / (p * (d1 as f64).ln() + q * (d2 as f64).ln())
}

/// Single-generator bound `−log p_j / log d_j`.
pub fn holder_bound_single(p_j: f64, d_j: usize) -> f64 {
    -p_j.ln() / (d_j as f64).ln()
}

/// Pointwise Hölder exponent surrogate: least-squares slope of
/// log(oscillation over the disk of radius r) against log r.
pub fn holder_estimate(field: &ScalarField, z0: Complex64, radii: &[f64]) -> Result<(f64, f64)> {
    if radii.len() < 4 {
        return Err(Error::DegenerateFit("need at least 4 scales".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in radii {
        if let Some((lo, hi)) = field.oscillation_in_disk(z0, r) {
            let osc = hi - lo;
            if osc > 1e-12 {
                xs.push(r.ln());
                ys.push(osc.ln());
            }
        }
    }
    if xs.len() < 4 {
        return Err(Error::DegenerateFit(
            "oscillation underflow (locally constant region)".into(),
        ));
    }
    let (slope, r2) = least_squares(&xs, &ys);
    Ok((slope, r2))
}

/// Slope and r² of the least-squares line through (xs, ys).
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

/// Empirical α-Hölder seminorm: max of |φ(x)−φ(y)| / d(x,y)^α over sampled
/// pairs at dyadic separations (d = chordal metric on the sphere).
pub fn alpha_seminorm(field: &ScalarField, alpha: f64, n_pairs: usize, seed: u64) -> f64 {
    let g = field.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0x5E71);
    let base_sep = g.dx().min(g.dy());
    let max_k = ((g.half_width.min(g.half_height) / base_sep).log2().floor() as i32).max(1);
    let mut best = 0.0f64;
    for _ in 0..n_pairs {
        let i = rng.gen_range(0..g.nx);
        let j = rng.gen_range(0..g.ny);
        let x = g.point(i, j);
        let ang = rng.gen_range(0.0..std::f64::consts::TAU);
        for k in 0..=max_k {
            let sep = base_sep * 2f64.powi(k);
            let y = x + Complex64::from_polar(sep, ang);
            if g.pixel(y).is_none() {
                continue;
            }
            let d = spherical_distance(x, y);
            if d < 1e-300 {
                continue;
            }
            let diff = (field.value_at(x) - field.value_at(y)).abs();
            best = best.max(diff / d.powf(alpha));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Exact dyadic oracle for the annulus preset: T as a function of
    /// s = log₂|z| satisfies T(s) = p·T(2s) + (1−p)·T(2s−1) with T = 0 for
    /// s ≤ 0 and T = 1 for s ≥ 1.
    fn annulus_t_oracle(s: f64, p: f64, depth: usize) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        if depth == 0 {
            return 0.5;
        }
        p * annulus_t_oracle(2.0 * s, p, depth - 1)
            + (1.0 - p) * annulus_t_oracle(2.0 * s - 1.0, p, depth - 1)
    }

    #[test]
    fn weight_param_validation() {
        assert!(WeightParam::new(0.0).is_err());
        assert!(WeightParam::new(1.0).is_err());
        let w = WeightParam::new(0.3).unwrap();
        assert_relative_eq!(w.p1() + w.p2(), 1.0);
    }

    #[test]
    fn transition_preserves_constants() {
        let pair = presets::annulus();
        let grid = GridSpec::square(c(0.0, 0.0), 4.04, 128);
        let w = WeightParam::new(0.5).unwrap();
        let op = TransitionOp::with_escape(&pair, w, grid, CORE_DEPTH, 4.04);

        let mut one = ScalarField::constant(grid, 1.0);
        one.outside_value = 1.0;
        one.core_value = 1.0;
        let m_one = op.apply(&one);
        assert!(m_one.sup_distance(&one) < 1e-12);

        let mut zero = ScalarField::constant(grid, 0.0);
        zero.outside_value = 0.0;
        zero.core_value = 0.0;
        let m_zero = op.apply(&zero);
        assert!(m_zero.sup_norm() < 1e-12);
    }

    #[test]
    fn t_field_matches_log2_ramp() {
        let pair = presets::annulus();
        let grid = GridSpec::square(c(0.0, 0.0), 4.04, 256);
        let w = WeightParam::new(0.5).unwrap();
        let op = TransitionOp::with_escape(&pair, w, grid, CORE_DEPTH, 4.04);
        let sol = compute_t(&op, 400, 1e-4);
        assert!(sol.converged, "sweeps {}", sol.sweeps_used);
        let mut max_err = 0.0f64;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let z = grid.point(i, j);
                let r = z.norm();
                if r < 1e-6 {
                    continue;
                }
                let expect = r.log2().clamp(0.0, 1.0);
                max_err = max_err.max((sol.field.get(i, j) - expect).abs());
            }
        }
        assert!(max_err <= 0.02, "max T error {max_err}");
        // Fixed-point defect.
        let m = op.apply(&sol.field);
        assert!(m.sup_distance(&sol.field) <= 2e-3);
    }

    #[test]
    fn dyadic_oracle_values_via_refined_probes() {
        let pair = presets::annulus();
        let grid = GridSpec::square(c(0.0, 0.0), 4.04, 256);
        let w = WeightParam::new(0.3).unwrap();
        let op = TransitionOp::with_escape(&pair, w, grid, CORE_DEPTH, 4.04);
        let sol = compute_t(&op, 600, 1e-5);
        assert!(sol.converged);
        for (r, s) in [(2f64.sqrt(), 0.5), (2f64.powf(0.25), 0.25), (2f64.powf(0.75), 0.75)] {
            let oracle = annulus_t_oracle(s, 0.3, 64);
            let got = op.refined_value(&sol.field, c(r, 0.0), 14);
            assert!(
                (got - oracle).abs() <= 0.01,
                "refined T({r}) = {got}, oracle {oracle}"
            );
        }
    }

    #[test]
    fn monte_carlo_matches_oracle() {
        let pair = presets::annulus();
        let w = WeightParam::new(0.5).unwrap();
        let est = monte_carlo_t(&pair, w, c(2f64.sqrt(), 0.0), 100_000, 200, 4.04, 7);
        assert!((est.estimate - 0.5).abs() <= 3.0 * est.standard_error.max(1e-4));

        let est = monte_carlo_t(&pair, w, c(3.0, 0.0), 10_000, 200, 4.04, 7);
        assert_eq!(est.estimate, 1.0);
        let est = monte_carlo_t(&pair, w, c(0.5, 0.0), 10_000, 200, 4.04, 7);
        assert_eq!(est.estimate, 0.0);
    }

    #[test]
    fn takagi_first_derivative_residual() {
        let pair = presets::annulus();
        let grid = GridSpec::square(c(0.0, 0.0), 4.04, 256);
        let w = WeightParam::new(0.5).unwrap();
        let op = TransitionOp::with_escape(&pair, w, grid, CORE_DEPTH, 4.04);
        let sol = compute_t(&op, 400, 1e-4);
        let psi = takagi_derivative(&op, &sol.field, 1, 80, 1e-4).unwrap();
        let psi1 = &psi[0];

        // ψ₁ vanishes outside the escape radius and on the certified core.
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let z = grid.point(i, j);
                if z.norm() > 4.04 || op.core.get(i, j) {
                    assert_eq!(psi1.get(i, j), 0.0);
                }
            }
        }

        // Defining equation ψ₁ = Mψ₁ + (T∘h₁ − T∘h₂) on the annulus interior.
        let m_psi = op.apply(psi1);
        let mut max_res = 0.0f64;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let z = grid.point(i, j);
                let r = z.norm();
                if r < 1.05 || r > 1.95 {
                    continue;
                }
                let source = op.lookup(&sol.field, pair.h1.eval(z)) - op.lookup(&sol.field, pair.h2.eval(z));
                let res = (psi1.get(i, j) - m_psi.get(i, j) - source).abs();
                max_res = max_res.max(res);
            }
        }
        assert!(max_res <= 0.02, "Takagi residual {max_res}");
    }

    #[test]
    fn takagi_zero_for_duplicated_generators() {
        let h = crate::poly::Polynomial::monomial(c(1.0, 0.0), 2).unwrap();
        let pair = GeneratorPair::new(h.clone(), h).unwrap();
        let grid = GridSpec::square(c(0.0, 0.0), 4.0, 64);
        let w = WeightParam::new(0.5).unwrap();
        let op = TransitionOp::new(&pair, w, grid, CORE_DEPTH);
        let sol = compute_t(&op, 300, 1e-4);
        let psi = takagi_derivative(&op, &sol.field, 1, 60, 1e-4).unwrap();
        assert!(psi[0].sup_norm() < 1e-9);
    }

    #[test]
    fn minimal_sets_of_presets() {
        let cloud = minimal_set(&presets::cantor3(), 200, 100, 3).unwrap();
        for z in &cloud.points.points {
            assert!(z.norm() < 1e-9, "cantor3 minimal set should be {{0}}");
        }
        let cloud = minimal_set(&presets::annulus(), 200, 100, 3).unwrap();
        for z in &cloud.points.points {
            assert!(z.norm() < 1e-9);
        }
    }

    #[test]
    fn stationary_limit_annulus() {
        let pair = presets::annulus();
        let grid = GridSpec::square(c(0.0, 0.0), 4.04, 256);
        let w = WeightParam::new(0.5).unwrap();
        let op = TransitionOp::with_escape(&pair, w, grid, CORE_DEPTH, 4.04);
        let sol = compute_t(&op, 400, 1e-4);

        // φ(z) = min(|z|, 3), φ(∞) = 3, ν = δ₀ so ∫φ dν = 0.
        let mut phi = ScalarField::from_fn(grid, |z| z.norm().min(3.0));
        phi.outside_value = 3.0;
        phi.core_value = 0.0;
        let probes: Vec<Complex64> = (0..25)
            .map(|k| Complex64::from_polar(0.8 + 0.06 * k as f64, 0.37 * k as f64))
            .collect();
        let report = stationary_measure_check(&op, &sol.field, &phi, &probes, 50);
        assert!(report.max_defect <= 0.02, "defect {}", report.max_defect);

        // φ ≡ 1 has defect 0.
        let mut one = ScalarField::constant(grid, 1.0);
        one.outside_value = 1.0;
        one.core_value = 1.0;
        let report = stationary_measure_check(&op, &sol.field, &one, &probes, 10);
        assert!(report.max_defect <= 1e-9);

        // φ = T itself satisfies the identity with ∫T dν = 0, φ(∞) = 1.
        let report = stationary_measure_check(&op, &sol.field, &sol.field, &probes, 10);
        assert!(report.max_defect <= 2e-3);
    }

    #[test]
    fn holder_bounds_closed_forms() {
        let w = WeightParam::new(0.5).unwrap();
        assert_relative_eq!(holder_bound_entropy(w, 3, 3), 0.63093, epsilon = 1e-5);
        assert_relative_eq!(
            holder_bound_entropy(w, 2, 4),
            2.0 / 3.0,
            epsilon = 1e-12
        );
        let w9 = WeightParam::new(0.9).unwrap();
        assert_relative_eq!(holder_bound_entropy(w9, 3, 3), 0.29590, epsilon = 1e-5);

        assert_relative_eq!(holder_bound_single(0.5, 3), 0.6309297535714574, epsilon = 1e-12);
        assert_relative_eq!(holder_bound_single(0.5, 2), 1.0, epsilon = 1e-12);
        assert_relative_eq!(holder_bound_single(0.25, 4), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn holder_estimate_lipschitz_ramp() {
        let grid = GridSpec::square(c(0.0, 0.0), 4.0, 512);
        let field = ScalarField::from_fn(grid, |z| {
            let r = z.norm().max(1e-12);
            r.log2().clamp(0.0, 1.0)
        });
        let px = grid.dx();
        let radii: Vec<f64> = (1..=5).map(|k| px * 2f64.powi(k)).collect();
        let (ex, r2) = holder_estimate(&field, c(2f64.sqrt(), 0.0), &radii).unwrap();
        assert!((ex - 1.0).abs() <= 0.1, "exponent {ex}");
        assert!(r2 >= 0.99);

        // Locally constant region → DegenerateFit.
        let err = holder_estimate(&field, c(0.2, 0.0), &radii);
        assert!(matches!(err, Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn alpha_seminorm_basics() {
        let grid = GridSpec::square(c(0.0, 0.0), 2.0, 128);
        let constant = ScalarField::constant(grid, 0.7);
        assert_eq!(alpha_seminorm(&constant, 0.8, 200, 5), 0.0);

        let ramp = ScalarField::from_fn(grid, |z| {
            let r = z.norm().max(1e-12);
            r.log2().clamp(0.0, 1.0)
        });
        let s1 = alpha_seminorm(&ramp, 1.0, 400, 5);
        assert!(s1.is_finite() && s1 > 0.0);
    }
}
