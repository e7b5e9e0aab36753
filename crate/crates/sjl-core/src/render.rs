//! Deterministic serialization: PGM/PPM images, CSV clouds and fields, JSON
//! reports. Identical inputs produce byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{PixelMask, PointCloud, ScalarField};

/// Rendering options for field images.
#[derive(Debug, Clone, Copy)]
pub struct RenderSpec {
    pub gamma: f64,
    pub invert: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            gamma: 1.0,
            invert: false,
        }
    }
}

impl RenderSpec {
    fn byte_of(&self, v: f64) -> u8 {
        let clamped = v.clamp(0.0, 1.0);
        let g = clamped.powf(self.gamma.clamp(0.1, 10.0));
        let g = if self.invert { 1.0 - g } else { g };
        (g * 255.0).round() as u8
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(path.display().to_string(), e))?;
        }
    }
    let mut f =
        std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(bytes)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Binary P5 PGM of a scalar field (clamp, gamma, round), maxval 255.
pub fn write_field_pgm(field: &ScalarField, path: impl AsRef<Path>, spec: RenderSpec) -> Result<()> {
    let g = field.grid;
    let mut out = format!("P5\n{} {}\n255\n", g.nx, g.ny).into_bytes();
    out.extend(field.values.iter().map(|&v| spec.byte_of(v)));
    write_bytes(path.as_ref(), &out)
}

/// Binary P5 PGM of a mask: 255 inside, 0 outside.
pub fn write_mask_pgm(mask: &PixelMask, path: impl AsRef<Path>) -> Result<()> {
    let g = mask.grid;
    let mut out = format!("P5\n{} {}\n255\n", g.nx, g.ny).into_bytes();
    out.extend(mask.bits.iter().map(|&b| if b { 255u8 } else { 0u8 }));
    write_bytes(path.as_ref(), &out)
}

/// Binary P6 PPM from per-pixel RGB triples.
pub fn write_rgb_ppm(nx: usize, ny: usize, rgb: &[[u8; 3]], path: impl AsRef<Path>) -> Result<()> {
    assert_eq!(rgb.len(), nx * ny);
    let mut out = format!("P6\n{nx} {ny}\n255\n").into_bytes();
    for px in rgb {
        out.extend_from_slice(px);
    }
    write_bytes(path.as_ref(), &out)
}

/// CSV with header "re,im"; locale-independent formatting.
pub fn write_cloud_csv(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let mut s = String::from("re,im\n");
    for z in &cloud.points {
        s.push_str(&format!("{},{}\n", z.re, z.im));
    }
    write_bytes(path.as_ref(), s.as_bytes())
}

/// CSV with header "re,im,value" sampling a field at pixel centers.
pub fn write_field_csv(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let g = field.grid;
    let mut s = String::from("re,im,value\n");
    for j in 0..g.ny {
        for i in 0..g.nx {
            let z = g.point(i, j);
            s.push_str(&format!("{},{},{}\n", z.re, z.im, field.get(i, j)));
        }
    }
    write_bytes(path.as_ref(), s.as_bytes())
}

/// Pretty JSON with the struct's declared field order.
pub fn write_report_json<T: Serialize>(report: &T, path: impl AsRef<Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Parse(format!("json serialization failed: {e}")))?;
    write_bytes(path.as_ref(), json.as_bytes())
}

/// Signed raw format for fields with negative values (Takagi derivatives):
/// big-endian i16 samples scaled into [-32767, 32767], plus a JSON sidecar
/// recording the min/max used for scaling.
pub fn write_field_i16_raw(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let lo = field.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    let mut bytes = Vec::with_capacity(field.values.len() * 2);
    for &v in &field.values {
        let q = ((v / scale) * 32767.0).round().clamp(-32767.0, 32767.0) as i16;
        bytes.extend_from_slice(&q.to_be_bytes());
    }
    write_bytes(path.as_ref(), &bytes)?;
    #[derive(Serialize)]
    struct Sidecar {
        nx: usize,
        ny: usize,
        min: f64,
        max: f64,
        scale: f64,
        encoding: &'static str,
    }
    let sidecar = Sidecar {
        nx: field.grid.nx,
        ny: field.grid.ny,
        min: lo,
        max: hi,
        scale,
        encoding: "i16-be,row-major,value=sample/32767*scale",
    };
    let sidecar_path = format!("{}.json", path.as_ref().display());
    write_report_json(&sidecar, sidecar_path)
}
