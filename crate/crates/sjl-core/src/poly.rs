//! Complex polynomial arithmetic: the generator type for everything.
//!
//! Polynomials are stored dense, lowest degree first, with a nonzero leading
//! coefficient and degree ≥ 2 (the setting is the space of polynomial maps of
//! degree at least two). Evaluation saturates instead of overflowing so that
//! escape-time loops never see non-finite values.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitudes above this saturate; callers treat saturated points as escaped.
pub const SATURATION_MAGNITUDE: f64 = 1e300;

/// Cap on the degree produced by composition.
pub const DEGREE_CAP: usize = 4096;

/// Clamp `z` to magnitude [`SATURATION_MAGNITUDE`], keeping its direction.
pub fn saturate(z: Complex64) -> Complex64 {
    let n = z.norm();
    if n.is_finite() && n <= SATURATION_MAGNITUDE {
        z
    } else if n.is_finite() {
        z * (SATURATION_MAGNITUDE / n)
    } else {
        // Direction is lost; any saturated value is treated as escaped.
        Complex64::new(SATURATION_MAGNITUDE, 0.0)
    }
}

/// A complex polynomial of degree ≥ 2, coefficients lowest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Builds a polynomial from coefficients (lowest degree first), trimming
    /// exactly-zero leading terms. Degree after trimming must be ≥ 2.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        while let Some(c) = coeffs.last() {
            if c.norm() == 0.0 && coeffs.len() > 1 {
                coeffs.pop();
            } else {
                break;
            }
        }
        if coeffs.len() < 3 {
            return Err(Error::InvalidPolynomial(format!(
                "degree {} < 2",
                coeffs.len().saturating_sub(1)
            )));
        }
        let lead = *coeffs.last().unwrap();
        if !lead.re.is_finite() || !lead.im.is_finite() || lead.norm() == 0.0 {
            return Err(Error::InvalidPolynomial(
                "leading coefficient is zero or non-finite".into(),
            ));
        }
        Ok(Polynomial { coeffs })
    }

    /// Monomial `c·z^d`.
    pub fn monomial(c: Complex64, d: usize) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); d + 1];
        coeffs[d] = c;
        Polynomial::new(coeffs)
    }

    /// `c·(z-b)^d + b`, the one-critical-point family used by the partner
    /// construction.
    pub fn centered_monomial(c: Complex64, d: usize, b: Complex64) -> Result<Self> {
        // Expand by repeated multiplication with (z - b).
        let mut acc = vec![c];
        for _ in 0..d {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (k, a) in acc.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * b;
            }
            acc = next;
        }
        acc[0] += b;
        Polynomial::new(acc)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    /// Horner evaluation, saturating instead of overflowing.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = saturate(acc * z + c);
        }
        acc
    }

    /// Formal derivative as a raw coefficient list (degree drops by one, so
    /// the result is in general not a `Polynomial`).
    pub fn derivative_coeffs(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect()
    }

    /// Evaluate the derivative at `z`.
    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = saturate(acc * z + c * k as f64);
        }
        acc
    }

    /// Composition `self ∘ q`, i.e. the polynomial `z ↦ self(q(z))`.
    pub fn compose(&self, q: &Polynomial) -> Result<Polynomial> {
        let degree = self.degree() * q.degree();
        if degree > DEGREE_CAP {
            return Err(Error::CompositionTooLarge {
                degree,
                cap: DEGREE_CAP,
            });
        }
        // Horner in polynomial arithmetic: acc = acc * q + c_k.
        let mut acc = vec![*self.coeffs.last().unwrap()];
        for &c in self.coeffs.iter().rev().skip(1) {
            acc = mul_coeffs(&acc, &q.coeffs);
            acc[0] += c;
        }
        Polynomial::new(acc)
    }

    /// Norm of the derivative at `z` with respect to the spherical metric:
    /// `|p′(z)|·(1+|z|²)/(1+|p(z)|²)`.
    pub fn spherical_norm(&self, z: Complex64) -> f64 {
        let dp = self.eval_derivative(z).norm();
        let pz = self.eval(z).norm_sqr();
        dp * (1.0 + z.norm_sqr()) / (1.0 + pz)
    }

    /// Coefficient-wise distance `max_k |a_k − b_k|`, infinite when degrees
    /// differ; used to detect duplicated generators.
    pub fn coeff_distance(&self, other: &Polynomial) -> f64 {
        if self.degree() != other.degree() {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Plain coefficient product (convolution).
fn mul_coeffs(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x.norm() == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// A finite word over the generator alphabet {1,2}; symbol k selects h_k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    symbols: Vec<u8>,
}

impl Word {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if symbols.iter().any(|&s| s != 1 && s != 2) {
            return Err(Error::Parse("word symbols must be 1 or 2".into()));
        }
        Ok(Word { symbols })
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Parses a word from a string of 1s and 2s, e.g. "211".
    pub fn parse(s: &str) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(Error::Parse(format!("invalid word symbol '{c}'"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Word::new(symbols)
    }
}

/// A generator pair (h₁,h₂) with cached degrees, leading coefficients and
/// finite critical values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorPair {
    pub h1: Polynomial,
    pub h2: Polynomial,
    degrees: (usize, usize),
    leadings: (Complex64, Complex64),
    critical_values: (Vec<Complex64>, Vec<Complex64>),
}

impl GeneratorPair {
    pub fn new(h1: Polynomial, h2: Polynomial) -> Result<Self> {
        let cv1 = crate::poly::critical_values(&h1)?;
        let cv2 = crate::poly::critical_values(&h2)?;
        let degrees = (h1.degree(), h2.degree());
        let leadings = (h1.leading(), h2.leading());
        Ok(GeneratorPair {
            h1,
            h2,
            degrees,
            leadings,
            critical_values: (cv1, cv2),
        })
    }

    pub fn degrees(&self) -> (usize, usize) {
        self.degrees
    }

    pub fn leadings(&self) -> (Complex64, Complex64) {
        self.leadings
    }

    /// Finite critical values of h_j (j = 1, 2), deduplicated.
    pub fn critical_values(&self, j: usize) -> &[Complex64] {
        match j {
            1 => &self.critical_values.0,
            2 => &self.critical_values.1,
            _ => panic!("generator index must be 1 or 2"),
        }
    }

    pub fn generator(&self, j: usize) -> &Polynomial {
        match j {
            1 => &self.h1,
            2 => &self.h2,
            _ => panic!("generator index must be 1 or 2"),
        }
    }

    /// True when the two generators are coefficient-identical up to `tol`;
    /// the degenerate single-map case several operations special-case.
    pub fn is_duplicated(&self, tol: f64) -> bool {
        self.h1.coeff_distance(&self.h2) <= tol
    }

    /// Composition `h_{w_n} ∘ … ∘ h_{w_1}` (symbol w₁ acts first).
    pub fn compose_word(&self, word: &Word) -> Result<Polynomial> {
        let mut iter = word.symbols().iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::Parse("cannot compose the empty word".into()))?;
        let mut acc = self.generator(*first as usize).clone();
        for &s in iter {
            acc = self.generator(s as usize).compose(&acc)?;
        }
        Ok(acc)
    }

    /// Orbit map of a word applied to a point (symbol w₁ acts first).
    pub fn apply_word(&self, word: &Word, z: Complex64) -> Complex64 {
        word.symbols()
            .iter()
            .fold(z, |z, &s| self.generator(s as usize).eval(z))
    }
}

// Root finding lives in a sibling file but is part of this module's surface.
mod roots;
pub use roots::{critical_values, preimages, repelling_fixed_point, roots_of};

/// Parses a complex literal "a+bi" / "a-bi" / "a" / "bi".
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s
        .trim()
        .chars()
        .map(|c| if c == '\u{2212}' { '-' } else { c })
        .collect();
    if t.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    let err = || Error::Parse(format!("invalid complex literal '{s}'"));
    if let Some(body) = t.strip_suffix(['i', 'I']) {
        // Split body into real part and imaginary coefficient at the last
        // sign that is not an exponent sign.
        let chars: Vec<char> = body.chars().collect();
        let mut split = None;
        for k in (1..chars.len()).rev() {
            if (chars[k] == '+' || chars[k] == '-')
                && chars[k - 1] != 'e'
                && chars[k - 1] != 'E'
            {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|_| err())?;
                let im_str = &body[k..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().map_err(|_| err())?
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() {
                    1.0
                } else {
                    body.parse().map_err(|_| err())?
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = t.parse().map_err(|_| err())?;
        Ok(Complex64::new(re, 0.0))
    }
}

/// Formats a complex number in the "a+bi" wire form.
pub fn format_complex(z: Complex64) -> String {
    if z.im >= 0.0 || z.im.is_nan() {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}{}i", z.re, z.im)
    }
}

/// Parses the text form "c0 c1 ... cd" of complex literals.
pub fn parse_polynomial(s: &str) -> Result<Polynomial> {
    let coeffs = s
        .split_whitespace()
        .map(parse_complex)
        .collect::<Result<Vec<_>>>()?;
    Polynomial::new(coeffs)
}

/// Prints the text form "c0 c1 ... cd".
pub fn format_polynomial(p: &Polynomial) -> String {
    p.coeffs()
        .iter()
        .map(|&c| format_complex(c))
        .collect::<Vec<_>>()
        .join(" ")
}
