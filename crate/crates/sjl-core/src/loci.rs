//! Classification of a generator pair against the parameter loci:
//! postcritically bounded (B), connected/disconnected Julia set (C/D),
//! hyperbolic (H), intersecting single-map Julia sets (I), common
//! quasicircle Julia set (Q); plus the open set condition, kernel Julia set
//! estimates, boundary-partner construction, and parameter-space scans.
//!
//! Every verdict is a truncated certificate: tri-state with a numeric margin
//! and the budget that produced it, never a proof.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{min_cloud_distance, CloudIndex, GridSpec, PixelMask, PointCloud};
use crate::julia::{boundary_cloud, filled_julia_mask, semigroup_julia_cloud, BranchLaw};
use crate::poly::{preimages, GeneratorPair, Polynomial};
use crate::potential::{
    escape_radius, green_value, in_filled_julia, robin_inequality, single_escape_radius,
};
use crate::randdyn::minimal_set;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriState {
    Yes,
    No,
    Inconclusive,
}

impl TriState {
    pub fn is_yes(self) -> bool {
        self == TriState::Yes
    }
    pub fn is_no(self) -> bool {
        self == TriState::No
    }
}

/// A tri-state verdict with its numeric margin and evidence note.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub state: TriState,
    pub margin: f64,
    pub note: String,
}

impl Verdict {
    fn new(state: TriState, margin: f64, note: impl Into<String>) -> Self {
        Verdict {
            state,
            margin,
            note: note.into(),
        }
    }

    fn inconclusive(note: impl Into<String>) -> Self {
        Verdict::new(TriState::Inconclusive, 0.0, note)
    }
}

/// Budgets shared by the classification checks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Budgets {
    /// Postcritical-tree depth.
    pub depth: usize,
    /// Escape-test iteration budget.
    pub max_iter: usize,
    /// Chaos-game sample count.
    pub n_points: usize,
    /// Side of the square grid used by pixel tests.
    pub grid_n: usize,
    /// Preimage-cloud separation threshold for the D test.
    pub sep_tol: f64,
    /// Distance threshold for the I test.
    pub i_tol: f64,
    /// Distance threshold for the (heuristic) H test.
    pub h_tol: f64,
    pub seed: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            depth: 12,
            max_iter: 200,
            n_points: 3000,
            grid_n: 256,
            sep_tol: 0.05,
            i_tol: 0.01,
            h_tol: 0.05,
            seed: 1,
        }
    }
}

impl Budgets {
    pub fn corpus() -> Self {
        Budgets {
            depth: 8,
            max_iter: 120,
            n_points: 600,
            grid_n: 96,
            ..Budgets::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationReport {
    #[serde(rename = "in_B")]
    pub in_b: TriState,
    pub is_connected: TriState,
    #[serde(rename = "in_H")]
    pub in_h: TriState,
    #[serde(rename = "in_I")]
    pub in_i: TriState,
    #[serde(rename = "in_Q")]
    pub in_q: TriState,
    pub osc_holds: TriState,
    pub margins: Margins,
    pub notes: Notes,
    pub robin_gap: f64,
    pub degrees: (usize, usize),
    pub budgets: Budgets,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Margins {
    #[serde(rename = "in_B")]
    pub in_b: f64,
    pub is_connected: f64,
    #[serde(rename = "in_H")]
    pub in_h: f64,
    #[serde(rename = "in_I")]
    pub in_i: f64,
    #[serde(rename = "in_Q")]
    pub in_q: f64,
    pub osc_holds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Notes {
    #[serde(rename = "in_B")]
    pub in_b: String,
    pub is_connected: String,
    #[serde(rename = "in_H")]
    pub in_h: String,
    #[serde(rename = "in_I")]
    pub in_i: String,
    #[serde(rename = "in_Q")]
    pub in_q: String,
    pub osc_holds: String,
}

/// Postcritical orbit tree pruned to an ε-net.
pub struct PostcriticalNet {
    pub points: Vec<Complex64>,
    pub max_radius: f64,
    /// Some point provably escaped (exceeded the escape radius).
    pub escaped: bool,
}

/// Builds the ε-net of the postcritical tree: forward images of the finite
/// critical values under all words up to `depth`, merged within `merge_tol`.
pub fn postcritical_net(pair: &GeneratorPair, depth: usize, merge_tol: f64, escape: f64) -> PostcriticalNet {
    let mut net: Vec<Complex64> = Vec::new();
    let mut max_radius = 0.0f64;
    let mut escaped = false;
    let push = |net: &mut Vec<Complex64>, z: Complex64| -> bool {
        if !net.iter().any(|&u| (u - z).norm() <= merge_tol) {
            net.push(z);
            true
        } else {
            false
        }
    };
    let mut frontier: Vec<Complex64> = Vec::new();
    for j in [1usize, 2] {
        for &cv in pair.critical_values(j) {
            if push(&mut net, cv) {
                frontier.push(cv);
            }
            max_radius = max_radius.max(cv.norm());
        }
    }
    for _ in 0..depth {
        if escaped {
            break;
        }
        let mut next = Vec::new();
        for &z in &frontier {
            for gen in [&pair.h1, &pair.h2] {
                let w = gen.eval(z);
                max_radius = max_radius.max(w.norm());
                if w.norm() > escape {
                    escaped = true;
                }
                if push(&mut net, w) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    PostcriticalNet {
        points: net,
        max_radius,
        escaped,
    }
}

/// Postcritical boundedness check over the pruned orbit tree.
pub fn check_b(pair: &GeneratorPair, depth: usize, bound_radius: f64, merge_tol: f64) -> Verdict {
    let escape = escape_radius(pair).max(bound_radius);
    let net = postcritical_net(pair, depth, merge_tol, escape);
    if net.escaped {
        return Verdict::new(
            TriState::No,
            net.max_radius - escape,
            format!(
                "a postcritical point exceeded the escape radius {escape:.3} (max |P*| = {:.3})",
                net.max_radius
            ),
        );
    }
    if net.max_radius <= bound_radius {
        Verdict::new(
            TriState::Yes,
            bound_radius - net.max_radius,
            format!(
                "all {} net points stay within {bound_radius:.3} through depth {depth}",
                net.points.len()
            ),
        )
    } else {
        Verdict::new(
            TriState::Inconclusive,
            bound_radius - net.max_radius,
            format!(
                "net reached radius {:.3}, between bound {bound_radius:.3} and escape {escape:.3}",
                net.max_radius
            ),
        )
    }
}

/// Connectivity of J(G) via separation of the generator preimages of the
/// semigroup Julia cloud (valid on locus B).
pub fn check_connected(pair: &GeneratorPair, n_points: usize, seed: u64, sep_tol: f64) -> Result<Verdict> {
    let cloud = semigroup_julia_cloud(pair, n_points, seed, BranchLaw::Uniform)?;
    let base: Vec<Complex64> = cloud.points.iter().step_by((cloud.len() / 800).max(1)).cloned().collect();
    let mut pre1 = Vec::new();
    let mut pre2 = Vec::new();
    for &z in &base {
        pre1.extend(preimages(&pair.h1, z)?);
        pre2.extend(preimages(&pair.h2, z)?);
    }
    let c1 = PointCloud::new(pre1, "h1-preimages");
    let c2 = PointCloud::new(pre2, "h2-preimages");
    let d = min_cloud_distance(&c1, &c2);
    let interleave = sep_tol / 5.0;
    if d > sep_tol {
        Ok(Verdict::new(
            TriState::No,
            d - sep_tol,
            format!("preimage clouds separated by {d:.4} > {sep_tol}"),
        ))
    } else if d < interleave {
        Ok(Verdict::new(
            TriState::Yes,
            interleave - d,
            format!("preimage clouds interleave (distance {d:.5})"),
        ))
    } else {
        Ok(Verdict::inconclusive(format!(
            "preimage-cloud distance {d:.5} near the {sep_tol} threshold"
        )))
    }
}

/// J(h₁) ∩ J(h₂) ≠ ∅ test via boundary-cloud distance.
pub fn check_i(pair: &GeneratorPair, n_points: usize, seed: u64, tol: f64) -> Result<Verdict> {
    let c1 = boundary_cloud(&pair.h1, n_points, seed)?;
    let c2 = boundary_cloud(&pair.h2, n_points, seed.wrapping_add(1))?;
    let d = min_cloud_distance(&c1, &c2);
    if d < tol {
        Ok(Verdict::new(
            TriState::Yes,
            tol - d,
            format!("boundary clouds meet (distance {d:.6})"),
        ))
    } else {
        Ok(Verdict::new(
            TriState::No,
            d - tol,
            format!("boundary clouds separated by {d:.4} (sampled evidence)"),
        ))
    }
}

/// Result of the algebraic common-Julia-set test.
#[derive(Debug, Clone)]
pub struct QAlgebraic {
    pub verdict: Verdict,
    /// Rotation multiplier a of the accepting η(z) = a(z−ζ)+ζ, when found.
    pub eta_multiplier: Option<Complex64>,
}

/// Algebraic test for J(h₁) = J(h₂): searches for a rotation η about the
/// symmetry center of h₁ with h₁∘h₂ = η∘h₂∘h₁. Candidate rotation orders
/// come from the symmetry degree of h₁'s normalized form; the pure-monomial
/// form admits any rotation and is solved directly from leading
/// coefficients.
pub fn check_q_algebraic(pair: &GeneratorPair) -> Result<QAlgebraic> {
    const TOL: f64 = 1e-9;
    let h1 = &pair.h1;
    let h2 = &pair.h2;
    let n = h1.degree();
    let an = h1.leading();
    let zeta = -h1.coeffs()[n - 1] / (n as f64 * an);

    let q1 = h1.compose(h2)?;
    let q2 = h2.compose(h1)?;
    let scale = q1
        .coeffs()
        .iter()
        .chain(q2.coeffs())
        .map(|c| c.norm())
        .fold(0.0, f64::max);

    // Residual of the identity h1∘h2 = η∘h2∘h1 for η(z) = a(z−ζ)+ζ.
    let residual = |a: Complex64| -> f64 {
        let mut worst = 0.0f64;
        for k in 0..q1.coeffs().len() {
            let lhs = q1.coeffs()[k];
            let mut rhs = a * q2.coeffs()[k];
            if k == 0 {
                rhs += zeta * (Complex64::new(1.0, 0.0) - a);
            }
            worst = worst.max((lhs - rhs).norm());
        }
        worst / scale.max(1e-300)
    };

    // Normalized form of h1 about ζ: A(z) = λ z + ζ with λ^{n−1} = 1/a_n
    // makes A^{-1}∘h1∘A monic and centered; its nonzero exponents reveal the
    // rotational symmetry degree d.
    let lambda = {
        let inv = an.inv();
        let r = inv.norm().powf(1.0 / (n as f64 - 1.0));
        let th = inv.arg() / (n as f64 - 1.0);
        Complex64::from_polar(r, th)
    };
    let mut norm_coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    {
        // P(z) = (h1(λ z + ζ) − ζ)/λ via Horner with affine argument.
        // Build coefficients of h1(λ z + ζ) first.
        let mut acc = vec![Complex64::new(0.0, 0.0)];
        for &c in h1.coeffs().iter().rev() {
            // acc = acc·(λ z + ζ) + c
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (k, &a) in acc.iter().enumerate() {
                next[k + 1] += a * lambda;
                next[k] += a * zeta;
            }
            next[0] += c;
            acc = next;
        }
        acc[0] -= zeta;
        for (k, c) in acc.into_iter().enumerate() {
            if k < norm_coeffs.len() {
                norm_coeffs[k] = c / lambda;
            }
        }
    }
    let coeff_scale = norm_coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let exps: Vec<usize> = (0..=n)
        .filter(|&k| norm_coeffs[k].norm() > 1e-9 * coeff_scale)
        .collect();
    let c_min = *exps.first().unwrap_or(&n);
    let mut d_sym = 0usize;
    for &k in &exps {
        d_sym = gcd(d_sym, k - c_min);
    }

    let monomial_form = exps.len() == 1;
    let mut best: Option<(Complex64, f64)> = None;
    if monomial_form {
        // Full rotational symmetry: solve for a from leading coefficients.
        let a = q1.leading() / q2.leading();
        if (a.norm() - 1.0).abs() <= 1e-6 {
            let r = residual(a / a.norm());
            best = Some((a / a.norm(), r));
        }
    } else if d_sym >= 1 {
        for l in 0..d_sym {
            let a = Complex64::from_polar(1.0, std::f64::consts::TAU * l as f64 / d_sym as f64);
            let r = residual(a);
            if best.map(|(_, rb)| r < rb).unwrap_or(true) {
                best = Some((a, r));
            }
        }
    }

    match best {
        Some((a, r)) if r <= TOL => Ok(QAlgebraic {
            verdict: Verdict::new(
                TriState::Yes,
                TOL - r,
                format!(
                    "commutation identity holds with rotation multiplier {} (residual {r:.2e}); \
                     quasicircle qualification is a heuristic flag, not certified",
                    crate::poly::format_complex(a)
                ),
            ),
            eta_multiplier: Some(a),
        }),
        Some((_, r)) => Ok(QAlgebraic {
            verdict: Verdict::new(
                TriState::No,
                r - TOL,
                format!("best commutation residual {r:.2e} exceeds tolerance"),
            ),
            eta_multiplier: None,
        }),
        None => Ok(QAlgebraic {
            verdict: Verdict::new(
                TriState::No,
                1.0,
                "no unit-modulus rotation candidate exists".to_string(),
            ),
            eta_multiplier: None,
        }),
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Heuristic hyperbolicity check: postcritical net far from the Julia cloud,
/// with every net point either escaping or attracted to the minimal set.
pub fn check_h(
    pair: &GeneratorPair,
    depth: usize,
    n_points: usize,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<Verdict> {
    let escape = escape_radius(pair);
    let merge_tol = 1e-4 * escape;
    let net = postcritical_net(pair, depth, merge_tol, escape);
    let cloud = semigroup_julia_cloud(pair, n_points, seed, BranchLaw::Uniform)?;
    let index = CloudIndex::build(&cloud)
        .ok_or_else(|| Error::Parse("empty Julia cloud".into()))?;
    let dmin = net
        .points
        .iter()
        .map(|&z| index.min_distance(z))
        .fold(f64::INFINITY, f64::min);
    if dmin <= tol {
        return Ok(Verdict::new(
            TriState::No,
            dmin - tol,
            format!("postcritical point within {dmin:.4} of the Julia cloud (heuristic)"),
        ));
    }

    // Fate check along three deterministic words.
    let minimal = minimal_set(pair, 200, 200, seed).ok();
    let minimal_index = minimal
        .as_ref()
        .and_then(|m| CloudIndex::build(&m.points));
    let mut all_resolved = true;
    for &start in &net.points {
        let mut resolved = false;
        for word in 0..3u8 {
            let mut z = start;
            let mut escaped = false;
            for step in 0..2 * max_iter {
                if z.norm() > escape {
                    escaped = true;
                    break;
                }
                z = match word {
                    0 => pair.h1.eval(z),
                    1 => pair.h2.eval(z),
                    _ => {
                        if step % 2 == 0 {
                            pair.h1.eval(z)
                        } else {
                            pair.h2.eval(z)
                        }
                    }
                };
            }
            let attracted = minimal_index
                .as_ref()
                .map(|ix| ix.min_distance(z) <= tol.max(1e-3))
                .unwrap_or(false);
            if escaped || attracted {
                resolved = true;
                break;
            }
        }
        if !resolved {
            all_resolved = false;
            break;
        }
    }
    if all_resolved {
        Ok(Verdict::new(
            TriState::Yes,
            dmin - tol,
            format!(
                "postcritical net at distance {dmin:.4} from the Julia cloud; all fates resolved (heuristic)"
            ),
        ))
    } else {
        Ok(Verdict::inconclusive(format!(
            "net clear of the Julia cloud ({dmin:.4}) but some postcritical fates unresolved (heuristic)"
        )))
    }
}

/// Which generator plays the inner role in the nesting K(h_a) ⊆ K(h_b).
fn nesting_roles(pair: &GeneratorPair, n_samples: usize, seed: u64, max_iter: usize) -> Result<Option<(usize, usize)>> {
    let escape = escape_radius(pair);
    let inside_fraction = |inner: &Polynomial, outer: &Polynomial, s: u64| -> Result<f64> {
        let cloud = boundary_cloud(inner, n_samples, s)?;
        let mut inside = 0usize;
        for &z in &cloud.points {
            if in_filled_julia(outer, z, max_iter, escape) {
                inside += 1;
            }
        }
        Ok(inside as f64 / cloud.len() as f64)
    };
    let f12 = inside_fraction(&pair.h1, &pair.h2, seed)?;
    let f21 = inside_fraction(&pair.h2, &pair.h1, seed.wrapping_add(7))?;
    if f12 >= 0.999 && f21 < 0.999 {
        Ok(Some((1, 2)))
    } else if f21 >= 0.999 && f12 < 0.999 {
        Ok(Some((2, 1)))
    } else if f12 >= 0.999 && f21 >= 0.999 {
        // Filled sets agree at sample resolution.
        Ok(Some((0, 0)))
    } else {
        Ok(None)
    }
}

/// Open set condition check: verifies the four-set inclusion chain
/// K(h_a) ⊆ h_a⁻¹(K(h_b)) ⊆ h_b⁻¹(K(h_a)) ⊆ K(h_b) by sign tests at sampled
/// boundary points, and pixelwise disjointness of the generator preimages of
/// U = int(K(h_b)) ∖ K(h_a).
pub fn check_osc(
    pair: &GeneratorPair,
    grid_n: usize,
    n_boundary_samples: usize,
    seed: u64,
    max_iter: usize,
) -> Result<Verdict> {
    let escape = escape_radius(pair);
    let roles = nesting_roles(pair, n_boundary_samples.min(800), seed, max_iter)?;
    let (a_idx, b_idx) = match roles {
        Some((0, 0)) => {
            return Ok(Verdict::new(
                TriState::No,
                0.0,
                "filled Julia sets coincide at sample resolution: U is empty (common-Julia-set candidate)",
            ));
        }
        Some(r) => r,
        None => {
            return Ok(Verdict::inconclusive(
                "no nesting order K(h_a) ⊆ K(h_b) detected at sample resolution",
            ))
        }
    };
    let ha = pair.generator(a_idx);
    let hb = pair.generator(b_idx);

    // Boundary samples.
    let bd_a = boundary_cloud(ha, n_boundary_samples, seed)?;
    let bd_b = boundary_cloud(hb, n_boundary_samples, seed.wrapping_add(3))?;

    // Chain sign tests; the margin is the worst Green value observed (0 is a
    // clean pass).
    let mut worst_green = 0.0f64;
    // (1) K(a) ⊆ a^{-1}(K(b)): image of ∂K(a) under a stays in K(b).
    for &z in &bd_a.points {
        let g = green_value(hb, ha.eval(z), max_iter, escape);
        worst_green = worst_green.max(g.value);
    }
    // (2) a^{-1}(K(b)) ⊆ b^{-1}(K(a)): for y over a^{-1}(∂K(b)), b(y) ∈ K(a).
    for &u in bd_b.points.iter().step_by(2) {
        for y in preimages(ha, u)? {
            let g = green_value(ha, hb.eval(y), max_iter, escape);
            worst_green = worst_green.max(g.value);
        }
    }
    // (3) b^{-1}(K(a)) ⊆ K(b): for y over b^{-1}(∂K(a)), y ∈ K(b).
    for &u in bd_a.points.iter().step_by(2) {
        for y in preimages(hb, u)? {
            let g = green_value(hb, y, max_iter, escape);
            worst_green = worst_green.max(g.value);
        }
    }
    let chain_ok = worst_green <= 1e-9;

    // Pixel test for U = int(K(h_b)) ∖ K(h_a).
    let extent = escape.min(single_escape_radius(hb));
    let grid = GridSpec::square(Complex64::new(0.0, 0.0), extent, grid_n);
    let mask_a = filled_julia_mask(ha, grid, max_iter, escape);
    let mask_b = filled_julia_mask(hb, grid, max_iter, escape);
    // Interior via one-pixel erosion: a pixel is interior if the 3×3 block is
    // inside.
    let mut u_mask = PixelMask::filled(grid, false);
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let mut interior = true;
            'block: for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if !mask_b.get((i as i64 + di) as usize, (j as i64 + dj) as usize) {
                        interior = false;
                        break 'block;
                    }
                }
            }
            if interior && !mask_a.get(i, j) {
                u_mask.set(i, j, true);
            }
        }
    }
    if !u_mask.any() {
        return Ok(Verdict::new(
            TriState::No,
            0.0,
            "U = int(K(h_b)) ∖ K(h_a) is empty on the grid (common-Julia-set candidate)",
        ));
    }
    let overlap = (0..grid.len())
        .into_par_iter()
        .filter(|&idx| {
            let z = grid.point(idx % grid.nx, idx / grid.nx);
            u_mask.contains(pair.h1.eval(z)) && u_mask.contains(pair.h2.eval(z))
        })
        .count();

    if chain_ok && overlap == 0 {
        Ok(Verdict::new(
            TriState::Yes,
            -worst_green,
            format!(
                "chain K(h{a_idx}) ⊆ h{a_idx}⁻¹(K(h{b_idx})) ⊆ h{b_idx}⁻¹(K(h{a_idx})) ⊆ K(h{b_idx}) holds at samples; preimage masks of U disjoint ({} U-pixels; sampled evidence)",
                u_mask.count()
            ),
        ))
    } else if !chain_ok {
        Ok(Verdict::new(
            TriState::No,
            -worst_green,
            format!("inclusion chain violated (worst Green value {worst_green:.3e})"),
        ))
    } else {
        Ok(Verdict::new(
            TriState::No,
            -(overlap as f64),
            format!("h₁⁻¹(U) ∩ h₂⁻¹(U) occupies {overlap} pixels"),
        ))
    }
}

/// Points of ∂K(h₁) within `tol` of ∂K(h₂): a sample of the kernel Julia
/// set J_ker(G) = J(h₁) ∩ J(h₂).
pub fn kernel_julia_estimate(
    pair: &GeneratorPair,
    n_points: usize,
    seed: u64,
    tol: f64,
) -> Result<PointCloud> {
    let c1 = boundary_cloud(&pair.h1, n_points, seed)?;
    let c2 = boundary_cloud(&pair.h2, n_points, seed.wrapping_add(1))?;
    let index = CloudIndex::build(&c2).ok_or_else(|| Error::Parse("empty cloud".into()))?;
    let points: Vec<Complex64> = c1
        .points
        .into_iter()
        .filter(|&z| index.min_distance(z) <= tol)
        .collect();
    Ok(PointCloud::new(points, "kernel-julia"))
}

/// Full classification; enforces the report invariants by emitting warnings
/// (never by silently overriding a verdict).
pub fn classify(pair: &GeneratorPair, budgets: &Budgets) -> ClassificationReport {
    let escape = escape_radius(pair);
    let merge_tol = 1e-4 * escape;
    let degrees = pair.degrees();
    let mut warnings = Vec::new();

    let b = check_b(pair, budgets.depth, escape, merge_tol);

    let i = check_i(pair, budgets.n_points, budgets.seed, budgets.i_tol)
        .unwrap_or_else(|e| Verdict::inconclusive(format!("I test failed: {e}")));
    let q = check_q_algebraic(pair)
        .map(|r| r.verdict)
        .unwrap_or_else(|e| Verdict::inconclusive(format!("Q test failed: {e}")));

    let (connected, h, osc) = if b.state.is_yes() {
        let connected = check_connected(pair, budgets.n_points, budgets.seed, budgets.sep_tol)
            .unwrap_or_else(|e| Verdict::inconclusive(format!("connectivity test failed: {e}")));
        let h = check_h(
            pair,
            budgets.depth,
            budgets.n_points,
            budgets.seed,
            budgets.h_tol,
            budgets.max_iter,
        )
        .unwrap_or_else(|e| Verdict::inconclusive(format!("H test failed: {e}")));
        let osc = check_osc(
            pair,
            budgets.grid_n,
            (budgets.n_points / 4).max(200),
            budgets.seed,
            budgets.max_iter,
        )
        .unwrap_or_else(|e| Verdict::inconclusive(format!("OSC test failed: {e}")));
        (connected, h, osc)
    } else {
        let note = "method valid only on locus B (postcritically bounded)";
        (
            Verdict::inconclusive(note),
            Verdict::inconclusive(note),
            Verdict::inconclusive(note),
        )
    };

    // Report invariants: violations warn, never override.
    let disconnected = connected.state.is_no();
    if disconnected && q.state.is_yes() {
        warnings.push("invariant violation: disconnected and common-quasicircle verdicts co-occur".into());
    }
    if disconnected && b.state.is_yes() && i.state.is_yes() {
        warnings.push("invariant violation: disconnected, postcritically bounded and intersecting verdicts co-occur".into());
    }
    if disconnected && b.state.is_yes() && degrees == (2, 2) {
        warnings.push("degrees (2,2) cannot occur for bounded disconnected pairs; verdicts are suspect".into());
    }
    if b.state.is_yes() && degrees == (2, 2) {
        warnings.push("degrees (2,2): excluded from the disconnected-locus closure theory".into());
    }
    warnings.push("chaos-game seeds assume the repelling fixed point is non-exceptional (exceptional set has at most 2 points)".into());

    ClassificationReport {
        in_b: b.state,
        is_connected: connected.state,
        in_h: h.state,
        in_i: i.state,
        in_q: q.state,
        osc_holds: osc.state,
        margins: Margins {
            in_b: b.margin,
            is_connected: connected.margin,
            in_h: h.margin,
            in_i: i.margin,
            in_q: q.margin,
            osc_holds: osc.margin,
        },
        notes: Notes {
            in_b: b.note,
            is_connected: connected.note,
            in_h: h.note,
            in_i: i.note,
            in_q: q.note,
            osc_holds: osc.note,
        },
        robin_gap: robin_inequality(pair),
        degrees,
        budgets: *budgets,
        warnings,
    }
}

/// Trace of the boundary-partner construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartnerTrace {
    /// Max distance from b to ∂K(h₁) samples.
    pub s: f64,
    pub extremal_point: Complex64,
    pub theta: f64,
    pub t0: f64,
    pub t1: f64,
    pub bisection_steps: usize,
}

/// Constructs the boundary partner g_t(z) = t·e^{iθ}(z−b)^d + b of h₁:
/// bisects t for the supremum t₁ at which the strict inclusion chain first
/// fails. The returned pair (h₁, g_{t₁}) classifies postcritically bounded,
/// non-intersecting, and near the boundary of the disconnectedness locus.
pub fn construct_partner(
    h1: &Polynomial,
    d: usize,
    b: Complex64,
    bisect_tol: f64,
    n_samples: usize,
    seed: u64,
) -> Result<(Polynomial, PartnerTrace)> {
    if d < 2 {
        return Err(Error::InvalidBase("partner degree must be ≥ 2".into()));
    }
    if h1.degree() == 2 && d == 2 {
        return Err(Error::InvalidBase(
            "(deg(h1), d) = (2,2) is excluded by the disconnected-locus degree restriction".into(),
        ));
    }
    let escape1 = single_escape_radius(h1);
    let max_iter = 400;
    if !in_filled_julia(h1, b, max_iter, escape1) {
        return Err(Error::InvalidBase(format!(
            "b = {} is not in the filled Julia set of h1",
            crate::poly::format_complex(b)
        )));
    }
    // Reject the symmetry center of a centered-monomial h1.
    let n1 = h1.degree();
    let zeta = -h1.coeffs()[n1 - 1] / (n1 as f64 * h1.leading());
    let centered = Polynomial::centered_monomial(h1.leading(), n1, zeta)
        .map(|m| h1.coeff_distance(&m) <= 1e-10 * h1.leading().norm().max(1.0))
        .unwrap_or(false);
    if centered && (b - zeta).norm() <= 1e-9 {
        return Err(Error::InvalidBase(
            "b coincides with the symmetry center of a centered-monomial h1".into(),
        ));
    }

    let cloud = boundary_cloud(h1, n_samples, seed)?;
    let index = CloudIndex::build(&cloud).ok_or_else(|| Error::Parse("empty cloud".into()))?;
    if index.min_distance(b) <= 1e-6 {
        return Err(Error::InvalidBase("b lies on the Julia set of h1".into()));
    }
    let (z0, s) = cloud
        .points
        .iter()
        .map(|&z| (z, (z - b).norm()))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();

    // θ scan: land t_max·e^{iθ}(z0−b)^d + b off J(h1), as far from the
    // sampled Julia set as possible.
    let t_max = s.powi(-(d as i32 - 1));
    let w0 = (z0 - b).powu(d as u32) * t_max;
    let mut best_theta = 0.0;
    let mut best_dist = -1.0;
    for k in 0..64 {
        let theta = std::f64::consts::TAU * k as f64 / 64.0;
        let z1 = b + w0 * Complex64::from_polar(1.0, theta);
        let dist = index.min_distance(z1);
        if dist > best_dist {
            best_dist = dist;
            best_theta = theta;
        }
    }
    let theta = best_theta;

    // Strict inclusion chain at parameter t, tested through boundary samples:
    //   (1) h1(∂K(h1)) inside the circle |w−b| = t^{-1/(d-1)}  (K(h1) ⊆ h1⁻¹(K(g_t)))
    //   (2) g_t(h1⁻¹(circle samples)) inside K(h1)             (h1⁻¹(K(g_t)) ⊆ g_t⁻¹(K(h1)))
    // (J(g_t) is exactly that circle, so (3) g_t⁻¹(K(h1)) ⊆ K(g_t) reduces to
    // t < t_max, which holds on the whole bracket.)
    let n_circle = 200usize;
    let chain_holds = |t: f64| -> Result<bool> {
        let radius = t.powf(-1.0 / (d as f64 - 1.0));
        for &z in cloud.points.iter().step_by(2) {
            if (h1.eval(z) - b).norm() >= radius {
                return Ok(false);
            }
        }
        let g_t = Polynomial::centered_monomial(Complex64::from_polar(t, theta), d, b)?;
        for k in 0..n_circle {
            let u = b + Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n_circle as f64);
            for y in preimages(h1, u)? {
                if !in_filled_julia(h1, g_t.eval(y), max_iter, escape1) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };

    let t0 = 1e-6 * t_max;
    if !chain_holds(t0)? {
        return Err(Error::BisectionFailed(format!(
            "inclusion chain does not hold at the lower bracket t0 = {t0:.3e}"
        )));
    }
    let mut lo = t0;
    let mut hi = t_max;
    if chain_holds(hi * (1.0 - 1e-9))? {
        return Err(Error::BisectionFailed(
            "inclusion chain still holds at the upper bracket t = s^{-(d-1)}".into(),
        ));
    }
    let mut steps = 0usize;
    while hi - lo > bisect_tol * t_max {
        let mid = 0.5 * (lo + hi);
        if chain_holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    let t1 = lo;
    let g = Polynomial::centered_monomial(Complex64::from_polar(t1, theta), d, b)?;
    Ok((
        g,
        PartnerTrace {
            s,
            extremal_point: z0,
            theta,
            t0,
            t1,
            bisection_steps: steps,
        },
    ))
}

/// Classification codes for parameter scans (fixed 6-color legend; see the
/// README for the color table).
pub const SCAN_CODES: [(u8, [u8; 3], &str); 6] = [
    (0, [40, 40, 40], "not postcritically bounded (or invalid cell)"),
    (1, [170, 170, 170], "boundedness inconclusive"),
    (2, [60, 80, 220], "bounded, disconnected"),
    (3, [235, 195, 40], "bounded, connected, common Julia set"),
    (4, [60, 180, 90], "bounded, connected, distinct Julia sets"),
    (5, [220, 60, 60], "bounded, connectivity inconclusive"),
];

/// Maps a report to its scan code.
pub fn scan_code(report: &ClassificationReport) -> u8 {
    match report.in_b {
        TriState::No => 0,
        TriState::Inconclusive => 1,
        TriState::Yes => match report.is_connected {
            TriState::No => 2,
            TriState::Yes => {
                if report.in_q.is_yes() {
                    3
                } else {
                    4
                }
            }
            TriState::Inconclusive => 5,
        },
    }
}

/// One cell of a parameter-plane scan over h₂(z) = a·z^d + c.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanCell {
    pub a: Complex64,
    pub code: u8,
}

/// Scans the complex-a rectangle for the family (h₁, a·z^d + c); cells are
/// classified independently and merged in row-major order.
#[allow(clippy::too_many_arguments)]
pub fn scan_grid(
    h1: &Polynomial,
    d: usize,
    c_coeff: Complex64,
    re_range: (f64, f64),
    im_range: (f64, f64),
    nx: usize,
    ny: usize,
    budgets: &Budgets,
) -> Vec<ScanCell> {
    let cells: Vec<ScanCell> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % nx, idx / nx);
            let re = re_range.0 + (re_range.1 - re_range.0) * (i as f64 + 0.5) / nx as f64;
            let im = im_range.0 + (im_range.1 - im_range.0) * (j as f64 + 0.5) / ny as f64;
            let a = Complex64::new(re, im);
            let code = build_family_pair(h1, a, d, c_coeff)
                .map(|pair| scan_code(&classify(&pair, budgets)))
                .unwrap_or(0);
            ScanCell { a, code }
        })
        .collect();
    cells
}

fn build_family_pair(h1: &Polynomial, a: Complex64, d: usize, c_coeff: Complex64) -> Result<GeneratorPair> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); d + 1];
    coeffs[0] = c_coeff;
    coeffs[d] = a;
    let h2 = Polynomial::new(coeffs)?;
    GeneratorPair::new(h1.clone(), h2)
}

/// Classifies a 1-parameter path of partners (h₁, h₂(t)).
pub fn scan_path(h1: &Polynomial, partners: &[Polynomial], budgets: &Budgets) -> Vec<u8> {
    partners
        .par_iter()
        .map(|h2| {
            GeneratorPair::new(h1.clone(), h2.clone())
                .map(|pair| scan_code(&classify(&pair, budgets)))
                .unwrap_or(0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[f64]) -> Polynomial {
        Polynomial::new(coeffs.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
    }

    #[test]
    fn check_b_examples() {
        let pair = presets::cantor3();
        let v = check_b(&pair, 12, escape_radius(&pair), 1e-4);
        assert_eq!(v.state, TriState::Yes);

        let pair = presets::annulus();
        let v = check_b(&pair, 12, escape_radius(&pair), 1e-4);
        assert_eq!(v.state, TriState::Yes);

        // (z^2+3, z^2): critical orbit 3 -> 12 -> 147 escapes.
        let pair = GeneratorPair::new(poly(&[3.0, 0.0, 1.0]), poly(&[0.0, 0.0, 1.0])).unwrap();
        let v = check_b(&pair, 12, escape_radius(&pair), 1e-4);
        assert_eq!(v.state, TriState::No);
    }

    #[test]
    fn connectivity_examples() {
        let v = check_connected(&presets::cantor3(), 1500, 3, 0.05).unwrap();
        assert_eq!(v.state, TriState::No);

        let v = check_connected(&presets::annulus(), 1500, 3, 0.05).unwrap();
        assert_eq!(v.state, TriState::Yes);

        let v = check_connected(&presets::monomial_q(std::f64::consts::PI / 5.0), 1500, 3, 0.05).unwrap();
        assert_eq!(v.state, TriState::Yes);
    }

    #[test]
    fn intersection_examples() {
        let v = check_i(&presets::cantor3(), 1200, 5, 0.01).unwrap();
        assert_eq!(v.state, TriState::No);
        assert!(v.margin > 0.2, "radial gap margin {}", v.margin);

        let v = check_i(&presets::monomial_q(0.7), 1200, 5, 0.01).unwrap();
        assert_eq!(v.state, TriState::Yes);
    }

    #[test]
    fn q_algebraic_examples() {
        // (z^3, e^{iθ} z^3): η multiplier e^{2iθ}.
        let theta = 0.9;
        let q = check_q_algebraic(&presets::monomial_q(theta)).unwrap();
        assert_eq!(q.verdict.state, TriState::Yes);
        let a = q.eta_multiplier.unwrap();
        assert!((a - Complex64::from_polar(1.0, 2.0 * theta)).norm() < 1e-9);

        // Identical maps.
        let sq = poly(&[0.0, 0.0, 1.0]);
        let pair = GeneratorPair::new(sq.clone(), sq).unwrap();
        let q = check_q_algebraic(&pair).unwrap();
        assert_eq!(q.verdict.state, TriState::Yes);

        // (z^3, 2z^3): Robin constants differ, J's differ.
        let q = check_q_algebraic(&presets::cantor3()).unwrap();
        assert_eq!(q.verdict.state, TriState::No);

        // Non-monomial symmetric case: basilica against itself rotated has
        // no unit rotation identity with z^2 (distinct Julia sets).
        let pair = GeneratorPair::new(poly(&[-1.0, 0.0, 1.0]), poly(&[0.0, 0.0, 1.0])).unwrap();
        let q = check_q_algebraic(&pair).unwrap();
        assert_eq!(q.verdict.state, TriState::No);
    }

    #[test]
    fn h_examples() {
        let v = check_h(&presets::cantor3(), 12, 1200, 3, 0.05, 200).unwrap();
        assert_eq!(v.state, TriState::Yes);
        let v = check_h(&presets::annulus(), 12, 1200, 3, 0.05, 200).unwrap();
        assert_eq!(v.state, TriState::Yes);
        // Parabolic-like boundary case: critical orbit accumulates on J(h1).
        let pair = GeneratorPair::new(poly(&[0.25, 0.0, 1.0]), poly(&[0.0, 0.0, 1.0])).unwrap();
        let v = check_h(&pair, 12, 1200, 3, 0.05, 200).unwrap();
        assert_ne!(v.state, TriState::Yes);
    }

    #[test]
    fn osc_examples() {
        let v = check_osc(&presets::cantor3(), 192, 300, 3, 200).unwrap();
        assert_eq!(v.state, TriState::Yes, "note: {}", v.note);

        let v = check_osc(&presets::annulus(), 192, 300, 3, 200).unwrap();
        assert_eq!(v.state, TriState::Yes, "note: {}", v.note);

        let v = check_osc(&presets::monomial_q(std::f64::consts::PI / 5.0), 192, 300, 3, 200).unwrap();
        assert_eq!(v.state, TriState::No, "note: {}", v.note);
    }

    #[test]
    fn kernel_estimates() {
        let cloud = kernel_julia_estimate(&presets::monomial_q(0.6), 1000, 3, 5e-3).unwrap();
        assert!(cloud.len() > 800);
        for z in &cloud.points {
            assert!((z.norm() - 1.0).abs() < 1e-5);
        }
        let cloud = kernel_julia_estimate(&presets::cantor3(), 1000, 3, 5e-3).unwrap();
        assert!(cloud.is_empty());
    }

    #[test]
    fn classify_tables() {
        let budgets = Budgets::default();
        let r = classify(&presets::cantor3(), &budgets);
        assert_eq!(r.in_b, TriState::Yes);
        assert_eq!(r.is_connected, TriState::No);
        assert_eq!(r.in_h, TriState::Yes);
        assert_eq!(r.in_i, TriState::No);
        assert_eq!(r.in_q, TriState::No);
        assert_eq!(r.osc_holds, TriState::Yes);
        assert!((r.robin_gap + 0.5 * 2f64.ln()).abs() < 1e-12);

        let r = classify(&presets::monomial_q(std::f64::consts::PI / 5.0), &budgets);
        assert_eq!(r.in_b, TriState::Yes);
        assert_eq!(r.is_connected, TriState::Yes);
        assert_eq!(r.in_i, TriState::Yes);
        assert_eq!(r.in_q, TriState::Yes);
        assert_eq!(r.osc_holds, TriState::No);

        let pair = GeneratorPair::new(poly(&[3.0, 0.0, 1.0]), poly(&[0.0, 0.0, 1.0])).unwrap();
        let r = classify(&pair, &budgets);
        assert_eq!(r.in_b, TriState::No);
        assert_eq!(r.is_connected, TriState::Inconclusive);
        assert_eq!(r.in_h, TriState::Inconclusive);
        assert_eq!(r.osc_holds, TriState::Inconclusive);
    }

    #[test]
    fn classify_is_deterministic() {
        let budgets = Budgets::default();
        let r1 = classify(&presets::cantor3(), &budgets);
        let r2 = classify(&presets::cantor3(), &budgets);
        assert_eq!(
            serde_json::to_string(&r1).unwrap(),
            serde_json::to_string(&r2).unwrap()
        );
    }

    #[test]
    fn partner_construction_basilica() {
        let basilica = poly(&[-1.0, 0.0, 1.0]);
        let (g, trace) = construct_partner(&basilica, 3, c(0.0, 0.0), 1e-3, 1500, 7).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((trace.s - phi).abs() < 1e-3, "s = {} vs φ", trace.s);
        assert!(trace.t1 > 0.0 && trace.t1 < 1.0 / (phi * phi) + 1e-9, "t1 = {}", trace.t1);
        assert_eq!(g.degree(), 3);

        // Post-condition: the pair is bounded and non-intersecting.
        let pair = GeneratorPair::new(basilica, g).unwrap();
        let budgets = Budgets::default();
        let b = check_b(&pair, budgets.depth, escape_radius(&pair), 1e-4);
        assert_eq!(b.state, TriState::Yes, "{}", b.note);
        let i = check_i(&pair, 1200, 3, 0.01).unwrap();
        assert_eq!(i.state, TriState::No);
    }

    #[test]
    fn partner_rejects_bad_bases() {
        let sq = poly(&[0.0, 0.0, 1.0]);
        // b at the symmetry center of the monomial form.
        assert!(matches!(
            construct_partner(&sq, 3, c(0.0, 0.0), 1e-3, 400, 7),
            Err(Error::InvalidBase(_))
        ));
        // b outside the filled Julia set.
        let basilica = poly(&[-1.0, 0.0, 1.0]);
        assert!(matches!(
            construct_partner(&basilica, 3, c(5.0, 0.0), 1e-3, 400, 7),
            Err(Error::InvalidBase(_))
        ));
        // Degree pair (2,2).
        assert!(matches!(
            construct_partner(&basilica, 2, c(0.0, 0.0), 1e-3, 400, 7),
            Err(Error::InvalidBase(_))
        ));
        // b = 0.3 inside K(z^2) works and yields a degree-3 partner.
        let (g, _) = construct_partner(&sq, 3, c(0.3, 0.0), 1e-3, 800, 7).unwrap();
        assert_eq!(g.degree(), 3);
        let pair = GeneratorPair::new(sq, g).unwrap();
        let b = check_b(&pair, 12, escape_radius(&pair), 1e-4);
        assert_eq!(b.state, TriState::Yes);
        let i = check_i(&pair, 800, 3, 0.01).unwrap();
        assert_eq!(i.state, TriState::No);
    }

    #[test]
    fn monomial_family_scan_line() {
        // (z^3, a z^3) along real a: disconnected off |a| = 1, connected+Q
        // at |a| = 1.
        let h1 = poly(&[0.0, 0.0, 0.0, 1.0]);
        let budgets = Budgets::corpus();
        let cells = scan_grid(&h1, 3, c(0.0, 0.0), (0.55, 1.45), (0.0, 0.0001), 7, 1, &budgets);
        assert_eq!(cells.len(), 7);
        for cell in &cells {
            if (cell.a.norm() - 1.0).abs() > 0.08 {
                assert_eq!(cell.code, 2, "a = {} code {}", cell.a, cell.code);
            }
        }
        // The cell straddling |a| = 1 (a ≈ 1.0) is connected with common J.
        let mid = &cells[3];
        assert!((mid.a.re - 1.0).abs() < 0.07);
        assert_eq!(mid.code, 3, "a = {}", mid.a);
    }
}
