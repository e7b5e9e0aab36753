//! Named generator pairs used throughout the CLI and the test suites.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::{GeneratorPair, Polynomial};

/// `(z², z²/2)` — the pair whose semigroup Julia set is the closed annulus
/// 1 ≤ |z| ≤ 2.
pub fn annulus() -> GeneratorPair {
    let h1 = Polynomial::monomial(Complex64::new(1.0, 0.0), 2).unwrap();
    let h2 = Polynomial::monomial(Complex64::new(0.5, 0.0), 2).unwrap();
    GeneratorPair::new(h1, h2).unwrap()
}

/// `(z³, 2z³)` — postcritically bounded with disconnected Julia set; the
/// radial structure is a Cantor set of circles.
pub fn cantor3() -> GeneratorPair {
    let h1 = Polynomial::monomial(Complex64::new(1.0, 0.0), 3).unwrap();
    let h2 = Polynomial::monomial(Complex64::new(2.0, 0.0), 3).unwrap();
    GeneratorPair::new(h1, h2).unwrap()
}

/// `(z³, e^{iθ}z³)` — both generators share the unit circle as Julia set.
pub fn monomial_q(theta: f64) -> GeneratorPair {
    let h1 = Polynomial::monomial(Complex64::new(1.0, 0.0), 3).unwrap();
    let h2 = Polynomial::monomial(Complex64::from_polar(1.0, theta), 3).unwrap();
    GeneratorPair::new(h1, h2).unwrap()
}

/// Resolves a preset name: "annulus", "cantor3", or "monomialQ(θ)" with θ
/// in radians (also accepts "pi/N" and "pi*X" forms).
pub fn by_name(name: &str) -> Result<GeneratorPair> {
    let trimmed = name.trim();
    match trimmed {
        "annulus" => return Ok(annulus()),
        "cantor3" => return Ok(cantor3()),
        _ => {}
    }
    if let Some(rest) = trimmed.strip_prefix("monomialQ(") {
        if let Some(arg) = rest.strip_suffix(')') {
            return Ok(monomial_q(parse_angle(arg)?));
        }
    }
    Err(Error::Parse(format!(
        "unknown preset '{name}' (expected annulus | cantor3 | monomialQ(theta))"
    )))
}

fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    if let Some(rest) = t.strip_prefix("pi/") {
        let d: f64 = rest
            .parse()
            .map_err(|_| Error::Parse(format!("invalid angle '{s}'")))?;
        return Ok(std::f64::consts::PI / d);
    }
    if let Some(rest) = t.strip_prefix("pi*") {
        let m: f64 = rest
            .parse()
            .map_err(|_| Error::Parse(format!("invalid angle '{s}'")))?;
        return Ok(std::f64::consts::PI * m);
    }
    if t == "pi" {
        return Ok(std::f64::consts::PI);
    }
    Err(Error::Parse(format!("invalid angle '{s}'")))
}
