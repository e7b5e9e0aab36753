//! Grids, pixel masks, point clouds and scalar fields — the discretizations
//! every renderer and field solver works on.
//!
//! Pixel convention: row-major with the origin at the top-left pixel; x
//! increases rightward with column index i, y decreases downward with row
//! index j. Values are attached to pixel centers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: Complex64,
    pub half_width: f64,
    pub half_height: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Square grid of `n`×`n` pixels covering `center ± half`.
    pub fn square(center: Complex64, half: f64, n: usize) -> Self {
        GridSpec {
            center,
            half_width: half,
            half_height: half,
            nx: n.max(2),
            ny: n.max(2),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_height / self.ny as f64
    }

    /// Diameter of one pixel.
    pub fn pixel_diameter(&self) -> f64 {
        (self.dx() * self.dx() + self.dy() * self.dy()).sqrt()
    }

    /// Center of pixel (i, j).
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        let x = self.center.re - self.half_width + (i as f64 + 0.5) * self.dx();
        let y = self.center.im + self.half_height - (j as f64 + 0.5) * self.dy();
        Complex64::new(x, y)
    }

    /// Pixel containing `z`, if inside the grid rectangle.
    pub fn pixel(&self, z: Complex64) -> Option<(usize, usize)> {
        let fx = (z.re - (self.center.re - self.half_width)) / self.dx();
        let fy = ((self.center.im + self.half_height) - z.im) / self.dy();
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (i, j) = (fx as usize, fy as usize);
        if i < self.nx && j < self.ny {
            Some((i, j))
        } else {
            None
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// True when the disk |z| ≤ r is inside the grid rectangle.
    pub fn covers_disk(&self, r: f64) -> bool {
        self.center.re - self.half_width <= -r
            && self.center.re + self.half_width >= r
            && self.center.im - self.half_height <= -r
            && self.center.im + self.half_height >= r
    }
}

/// Boolean raster over a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PixelMask {
    pub grid: GridSpec,
    pub bits: Vec<bool>,
}

impl PixelMask {
    pub fn filled(grid: GridSpec, value: bool) -> Self {
        let bits = vec![value; grid.len()];
        PixelMask { grid, bits }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[self.grid.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let idx = self.grid.index(i, j);
        self.bits[idx] = v;
    }

    /// Mask value at the pixel containing `z`; false outside the grid.
    pub fn contains(&self, z: Complex64) -> bool {
        match self.grid.pixel(z) {
            Some((i, j)) => self.get(i, j),
            None => false,
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }

    /// One-pixel (8-neighborhood) dilation.
    pub fn dilated(&self) -> PixelMask {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut out = PixelMask::filled(self.grid, false);
        for j in 0..ny {
            for i in 0..nx {
                if !self.get(i, j) {
                    continue;
                }
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        if ii >= 0 && jj >= 0 && (ii as usize) < nx && (jj as usize) < ny {
                            out.set(ii as usize, jj as usize, true);
                        }
                    }
                }
            }
        }
        out
    }

    /// Rasterizes a point cloud with one-pixel dilation.
    pub fn rasterize(grid: GridSpec, cloud: &PointCloud) -> PixelMask {
        let mut raw = PixelMask::filled(grid, false);
        for &z in &cloud.points {
            if let Some((i, j)) = grid.pixel(z) {
                raw.set(i, j, true);
            }
        }
        raw.dilated()
    }

    /// Distance (in pixels, chamfer metric) from every pixel to the mask;
    /// `f64::INFINITY` when the mask is empty.
    pub fn distance_map(&self) -> Vec<f64> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut dist = vec![f64::INFINITY; nx * ny];
        for idx in 0..nx * ny {
            if self.bits[idx] {
                dist[idx] = 0.0;
            }
        }
        let diag = std::f64::consts::SQRT_2;
        // Two-pass chamfer sweep.
        for j in 0..ny {
            for i in 0..nx {
                let idx = j * nx + i;
                let mut d = dist[idx];
                if i > 0 {
                    d = d.min(dist[idx - 1] + 1.0);
                }
                if j > 0 {
                    d = d.min(dist[idx - nx] + 1.0);
                    if i > 0 {
                        d = d.min(dist[idx - nx - 1] + diag);
                    }
                    if i + 1 < nx {
                        d = d.min(dist[idx - nx + 1] + diag);
                    }
                }
                dist[idx] = d;
            }
        }
        for j in (0..ny).rev() {
            for i in (0..nx).rev() {
                let idx = j * nx + i;
                let mut d = dist[idx];
                if i + 1 < nx {
                    d = d.min(dist[idx + 1] + 1.0);
                }
                if j + 1 < ny {
                    d = d.min(dist[idx + nx] + 1.0);
                    if i > 0 {
                        d = d.min(dist[idx + nx - 1] + diag);
                    }
                    if i + 1 < nx {
                        d = d.min(dist[idx + nx + 1] + diag);
                    }
                }
                dist[idx] = d;
            }
        }
        dist
    }

    /// Hausdorff distance between two masks on the same grid, in pixels.
    pub fn hausdorff_pixels(&self, other: &PixelMask) -> f64 {
        let da = self.distance_map();
        let db = other.distance_map();
        let mut h = 0.0f64;
        for idx in 0..self.bits.len() {
            if self.bits[idx] {
                h = h.max(db[idx]);
            }
            if other.bits[idx] {
                h = h.max(da[idx]);
            }
        }
        h
    }

    /// Number of 4-connected components of the set pixels.
    pub fn component_count(&self) -> usize {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut seen = vec![false; nx * ny];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..nx * ny {
            if !self.bits[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(idx) = stack.pop() {
                let (i, j) = (idx % nx, idx / nx);
                let mut push = |ii: usize, jj: usize, stack: &mut Vec<usize>| {
                    let nidx = jj * nx + ii;
                    if self.bits[nidx] && !seen[nidx] {
                        seen[nidx] = true;
                        stack.push(nidx);
                    }
                };
                if i > 0 {
                    push(i - 1, j, &mut stack);
                }
                if i + 1 < nx {
                    push(i + 1, j, &mut stack);
                }
                if j > 0 {
                    push(i, j - 1, &mut stack);
                }
                if j + 1 < ny {
                    push(i, j + 1, &mut stack);
                }
            }
        }
        count
    }
}

/// A labeled finite set of points in the plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Complex64>,
    pub label: String,
}

impl PointCloud {
    pub fn new(points: Vec<Complex64>, label: impl Into<String>) -> Self {
        PointCloud {
            points,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned bounding box as (lower-left, upper-right).
    pub fn bounds(&self) -> Option<(Complex64, Complex64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for z in &self.points {
            lo.re = lo.re.min(z.re);
            lo.im = lo.im.min(z.im);
            hi.re = hi.re.max(z.re);
            hi.im = hi.im.max(z.im);
        }
        Some((lo, hi))
    }
}

/// Uniform-bin spatial index for nearest-distance queries on a cloud.
pub struct CloudIndex {
    cell: f64,
    origin: Complex64,
    ncols: usize,
    nrows: usize,
    bins: Vec<Vec<Complex64>>,
}

impl CloudIndex {
    pub fn build(cloud: &PointCloud) -> Option<CloudIndex> {
        let (lo, hi) = cloud.bounds()?;
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
        let target = (cloud.len() as f64).sqrt().max(8.0) as usize;
        let cell = span / target as f64;
        let ncols = (((hi.re - lo.re) / cell) as usize + 2).max(1);
        let nrows = (((hi.im - lo.im) / cell) as usize + 2).max(1);
        let mut bins = vec![Vec::new(); ncols * nrows];
        for &z in &cloud.points {
            let c = (((z.re - lo.re) / cell) as usize).min(ncols - 1);
            let r = (((z.im - lo.im) / cell) as usize).min(nrows - 1);
            bins[r * ncols + c].push(z);
        }
        Some(CloudIndex {
            cell,
            origin: lo,
            ncols,
            nrows,
            bins,
        })
    }

    /// Distance from `z` to the nearest cloud point.
    pub fn min_distance(&self, z: Complex64) -> f64 {
        // Search rings around the query's cell clamped into the bin grid;
        // the clamp offset is subtracted from the ring lower bound so early
        // termination stays conservative for far-outside queries.
        let ci = (((z.re - self.origin.re) / self.cell).floor() as i64).clamp(0, self.ncols as i64 - 1);
        let ri = (((z.im - self.origin.im) / self.cell).floor() as i64).clamp(0, self.nrows as i64 - 1);
        let cell_center = Complex64::new(
            self.origin.re + (ci as f64 + 0.5) * self.cell,
            self.origin.im + (ri as f64 + 0.5) * self.cell,
        );
        let offset = (z - cell_center).norm();
        let mut best = f64::INFINITY;
        for ring in 0..=(self.ncols + self.nrows) as i64 {
            if best < (ring as f64 - 1.0) * self.cell - offset {
                break;
            }
            for dr in -ring..=ring {
                for dc in -ring..=ring {
                    if dr.abs() != ring && dc.abs() != ring {
                        continue;
                    }
                    let c = ci + dc;
                    let rr = ri + dr;
                    if c < 0 || rr < 0 || c >= self.ncols as i64 || rr >= self.nrows as i64 {
                        continue;
                    }
                    for &p in &self.bins[rr as usize * self.ncols + c as usize] {
                        best = best.min((p - z).norm());
                    }
                }
            }
        }
        best
    }
}

/// Minimum distance between two clouds (0 when either is empty is avoided:
/// returns +inf for empty inputs).
pub fn min_cloud_distance(a: &PointCloud, b: &PointCloud) -> f64 {
    let Some(index) = CloudIndex::build(b) else {
        return f64::INFINITY;
    };
    a.points
        .iter()
        .map(|&z| index.min_distance(z))
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric Hausdorff distance between two clouds.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> f64 {
    let (Some(ia), Some(ib)) = (CloudIndex::build(a), CloudIndex::build(b)) else {
        return f64::INFINITY;
    };
    let d_ab = a
        .points
        .iter()
        .map(|&z| ib.min_distance(z))
        .fold(0.0, f64::max);
    let d_ba = b
        .points
        .iter()
        .map(|&z| ia.min_distance(z))
        .fold(0.0, f64::max);
    d_ab.max(d_ba)
}

/// A real-valued field sampled at pixel centers, with the two boundary
/// values the random-dynamics operators need: the value assumed beyond the
/// escape radius and the value pinned on the certified bounded core.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub outside_value: f64,
    pub core_value: f64,
}

impl ScalarField {
    pub fn constant(grid: GridSpec, value: f64) -> Self {
        let values = vec![value; grid.len()];
        ScalarField {
            grid,
            values,
            outside_value: 1.0,
            core_value: 0.0,
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(Complex64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.point(i, j)));
            }
        }
        ScalarField {
            grid,
            values,
            outside_value: 1.0,
            core_value: 0.0,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Bilinear interpolation between pixel centers; `outside_value` beyond
    /// the grid rectangle (edge pixels clamp within the outer half-pixel).
    pub fn value_at(&self, z: Complex64) -> f64 {
        let g = &self.grid;
        let fx = (z.re - (g.center.re - g.half_width)) / g.dx() - 0.5;
        let fy = ((g.center.im + g.half_height) - z.im) / g.dy() - 0.5;
        if fx < -0.5 || fy < -0.5 || fx > g.nx as f64 - 0.5 || fy > g.ny as f64 - 0.5 {
            return self.outside_value;
        }
        let fx = fx.clamp(0.0, (g.nx - 1) as f64);
        let fy = fy.clamp(0.0, (g.ny - 1) as f64);
        let i0 = (fx as usize).min(g.nx - 2);
        let j0 = (fy as usize).min(g.ny - 2);
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let v00 = self.get(i0, j0);
        let v10 = self.get(i0 + 1, j0);
        let v01 = self.get(i0, j0 + 1);
        let v11 = self.get(i0 + 1, j0 + 1);
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }

    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Largest |difference| between horizontally or vertically adjacent
    /// pixels.
    pub fn max_adjacent_jump(&self) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut jump = 0.0f64;
        for j in 0..ny {
            for i in 0..nx {
                let v = self.get(i, j);
                if i + 1 < nx {
                    jump = jump.max((v - self.get(i + 1, j)).abs());
                }
                if j + 1 < ny {
                    jump = jump.max((v - self.get(i, j + 1)).abs());
                }
            }
        }
        jump
    }

    /// Oscillation (max − min) over pixels within distance `r` of `z0`.
    pub fn oscillation_in_disk(&self, z0: Complex64, r: f64) -> Option<(f64, f64)> {
        let g = &self.grid;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let i_min = (((z0.re - r) - (g.center.re - g.half_width)) / g.dx()).floor().max(0.0) as usize;
        let i_max = ((((z0.re + r) - (g.center.re - g.half_width)) / g.dx()).ceil() as usize).min(g.nx);
        let j_min = ((((g.center.im + g.half_height) - (z0.im + r)) / g.dy()).floor().max(0.0)) as usize;
        let j_max = (((((g.center.im + g.half_height) - (z0.im - r)) / g.dy()).ceil()) as usize).min(g.ny);
        for j in j_min..j_max {
            for i in i_min..i_max {
                let p = g.point(i, j);
                if (p - z0).norm() <= r {
                    let v = self.get(i, j);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        if lo.is_finite() && hi.is_finite() {
            Some((lo, hi))
        } else {
            None
        }
    }
}

/// Chordal (spherical) distance between two finite points of the sphere.
pub fn spherical_distance(a: Complex64, b: Complex64) -> f64 {
    2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_pixel_mapping_roundtrip() {
        let g = GridSpec::square(c(0.0, 0.0), 2.0, 64);
        for &(i, j) in &[(0usize, 0usize), (63, 63), (10, 50), (31, 32)] {
            let z = g.point(i, j);
            assert_eq!(g.pixel(z), Some((i, j)));
        }
        // Top-left pixel has the most negative x and the most positive y.
        let tl = g.point(0, 0);
        let br = g.point(63, 63);
        assert!(tl.re < br.re && tl.im > br.im);
    }

    #[test]
    fn bilinear_reproduces_affine() {
        let g = GridSpec::square(c(0.0, 0.0), 1.0, 32);
        let f = ScalarField::from_fn(g, |z| 0.5 + 0.25 * z.re - 0.125 * z.im);
        for &(x, y) in &[(0.1, 0.2), (-0.4, 0.7), (0.33, -0.21)] {
            let z = c(x, y);
            let exact = 0.5 + 0.25 * x - 0.125 * y;
            assert!((f.value_at(z) - exact).abs() < 1e-12);
        }
        assert_eq!(f.value_at(c(5.0, 0.0)), f.outside_value);
    }

    #[test]
    fn dilation_and_components() {
        let g = GridSpec::square(c(0.0, 0.0), 1.0, 16);
        let mut m = PixelMask::filled(g, false);
        m.set(4, 4, true);
        m.set(12, 12, true);
        let d = m.dilated();
        assert_eq!(d.count(), 18);
        assert_eq!(d.component_count(), 2);
    }

    #[test]
    fn cloud_distances() {
        let a = PointCloud::new(vec![c(0.0, 0.0), c(1.0, 0.0)], "a");
        let b = PointCloud::new(vec![c(0.0, 0.5), c(3.0, 0.0)], "b");
        let d = min_cloud_distance(&a, &b);
        assert!((d - 0.5).abs() < 1e-12);
        let h = hausdorff_distance(&a, &b);
        assert!((h - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mask_hausdorff() {
        let g = GridSpec::square(c(0.0, 0.0), 1.0, 32);
        let mut m1 = PixelMask::filled(g, false);
        let mut m2 = PixelMask::filled(g, false);
        m1.set(10, 10, true);
        m2.set(13, 14, true);
        let h = m1.hausdorff_pixels(&m2);
        assert!(h >= 4.9 && h <= 5.5, "chamfer distance ~5, got {h}");
    }
}
