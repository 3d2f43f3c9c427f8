//! Lumps on the cylinder as rational maps `W(z) = B(e^z) / A(e^z)`.
//!
//! A degree-n lump is the homogeneous vector `(c_0, ..., c_{2n+1})` with
//! `A(w) = sum c_k w^(n-k)` and `B(w) = sum c_(n+1+k) w^(n-k)`.
//! Antiholomorphic lumps (negative degree) are stored as the complex
//! conjugate of a holomorphic representative.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly;
use crate::quadrature::{integrate_cylinder, QuadratureConfig};

/// Lumps whose normalized resultant is at most this are rejected.
pub const RESULTANT_TOLERANCE: f64 = 1e-12;

/// A point `z = x + iy` of the cylinder; `y` is read mod 2 pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderPoint {
    pub x: f64,
    pub y: f64,
}

impl CylinderPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y.rem_euclid(2.0 * PI))
    }

    /// `w = e^z`.
    pub fn w(&self) -> Complex64 {
        Complex64::from_polar(self.x.exp(), self.y)
    }
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetValue {
    Finite(Complex64),
    Infinity,
}

impl TargetValue {
    /// `num / den`, treating a zero denominator as the point at infinity.
    pub fn ratio(num: Complex64, den: Complex64) -> Self {
        if den.norm() == 0.0 {
            return TargetValue::Infinity;
        }
        let v = num / den;
        if v.is_finite() {
            TargetValue::Finite(v)
        } else {
            TargetValue::Infinity
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, TargetValue::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            TargetValue::Finite(v) => Some(*v),
            TargetValue::Infinity => None,
        }
    }

    pub fn conj(self) -> Self {
        match self {
            TargetValue::Finite(v) => TargetValue::Finite(v.conj()),
            TargetValue::Infinity => TargetValue::Infinity,
        }
    }

    /// Chordal distance on the unit Riemann sphere, in `[0, 2]`.
    pub fn chordal_distance(&self, other: &TargetValue) -> f64 {
        match (self, other) {
            (TargetValue::Infinity, TargetValue::Infinity) => 0.0,
            (TargetValue::Finite(a), TargetValue::Infinity)
            | (TargetValue::Infinity, TargetValue::Finite(a)) => 2.0 / (1.0 + a.norm_sqr()).sqrt(),
            (TargetValue::Finite(a), TargetValue::Finite(b)) => {
                2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
            }
        }
    }
}

impl fmt::Display for TargetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetValue::Finite(v) => write!(f, "{}", format_complex(*v)),
            TargetValue::Infinity => write!(f, "inf"),
        }
    }
}

/// Isometries of the cylinder and the target sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IsometryTag {
    /// `T_lambda: z -> z - log(lambda)`.
    Translate(Complex64),
    /// `z -> -conj(z)`.
    Sigma1,
    /// `z -> conj(z)`.
    Sigma2,
    /// `z -> -z`.
    Sigma3,
    /// `W -> (alpha W - conj(beta)) / (beta W + conj(alpha))`.
    Rotate { alpha: Complex64, beta: Complex64 },
    /// `W -> conj(W)`.
    Reflect,
}

/// A lump of degree `n` (or `-n` when antiholomorphic).
#[derive(Debug, Clone, PartialEq)]
pub struct RationalLump {
    n: usize,
    coeffs: Vec<Complex64>,
    anti: bool,
}

impl RationalLump {
    /// Validates and normalizes a holomorphic lump so that `max |c_k| = 1`.
    pub fn new(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        Self::with_orientation(n, coeffs, false)
    }

    /// Lump whose map is the complex conjugate of the holomorphic map with
    /// the given coefficients.
    pub fn antiholomorphic(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        Self::with_orientation(n, coeffs, true)
    }

    fn with_orientation(n: usize, mut coeffs: Vec<Complex64>, anti: bool) -> Result<Self> {
        if coeffs.len() != 2 * n + 2 {
            return Err(Error::InvalidLump(format!(
                "degree {n} needs {} coefficients, got {}",
                2 * n + 2,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidLump("non-finite coefficient".into()));
        }
        let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return Err(Error::InvalidLump("all coefficients vanish".into()));
        }
        // Already-normalized input is kept bit-for-bit.
        if (scale - 1.0).abs() > 4.0 * f64::EPSILON {
            coeffs.iter_mut().for_each(|c| *c /= scale);
        }
        let lump = Self { n, coeffs, anti };
        let delta = lump.resultant().norm();
        if delta <= RESULTANT_TOLERANCE {
            return Err(Error::InvalidLump(format!(
                "resultant {delta:.3e} of the normalized coefficients is below {RESULTANT_TOLERANCE:e}"
            )));
        }
        Ok(lump)
    }

    /// Builds `B/A` from the two polynomials, each with `n + 1` coefficients
    /// listed from `w^n` down to `w^0`.
    pub fn from_polys(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::InvalidLump(
                "numerator and denominator need the same nonzero length".into(),
            ));
        }
        Self::new(a.len() - 1, [a, b].concat())
    }

    /// `|n|`.
    pub fn degree(&self) -> usize {
        self.n
    }

    /// `n`, negative for antiholomorphic lumps.
    pub fn signed_degree(&self) -> i64 {
        if self.anti {
            -(self.n as i64)
        } else {
            self.n as i64
        }
    }

    pub fn is_antiholomorphic(&self) -> bool {
        self.anti
    }

    /// Normalized coefficients of the holomorphic representative.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficients of A, highest power first.
    pub fn a_poly(&self) -> &[Complex64] {
        &self.coeffs[..=self.n]
    }

    /// Coefficients of B, highest power first.
    pub fn b_poly(&self) -> &[Complex64] {
        &self.coeffs[self.n + 1..]
    }

    /// Holomorphic lump with the same coefficients.
    pub fn representative(&self) -> RationalLump {
        Self {
            anti: false,
            ..self.clone()
        }
    }

    /// Determinant of the `2n x 2n` Sylvester matrix of A and B; vanishes
    /// iff they share a root, counting a root at infinity when both leading
    /// coefficients vanish.
    pub fn resultant(&self) -> Complex64 {
        sylvester(self.a_poly(), self.b_poly())
    }

    /// `W(z)`, with poles mapped to [`TargetValue::Infinity`].
    pub fn evaluate(&self, z: CylinderPoint) -> TargetValue {
        let w = z.w();
        let (a, b) = if w.norm() <= 1.0 {
            (poly::eval(self.a_poly(), w), poly::eval(self.b_poly(), w))
        } else {
            // Divide through by w^n to keep large |x| finite.
            let v = w.inv();
            (
                eval_reversed(self.a_poly(), v),
                eval_reversed(self.b_poly(), v),
            )
        };
        let value = TargetValue::ratio(b, a);
        if self.anti {
            value.conj()
        } else {
            value
        }
    }

    /// Limits `(l_-, l_+)` of W as `x -> -inf` and `x -> +inf`.
    pub fn endpoints(&self) -> (TargetValue, TargetValue) {
        let c = &self.coeffs;
        let n = self.n;
        let minus = TargetValue::ratio(c[2 * n + 1], c[n]);
        let plus = TargetValue::ratio(c[n + 1], c[0]);
        if self.anti {
            (minus.conj(), plus.conj())
        } else {
            (minus, plus)
        }
    }

    /// Pointwise energy density `4 |dW|^2 / (1 + |W|^2)^2`.
    ///
    /// Evaluated in the homogeneous form
    /// `4 |w|^2 |B'A - BA'|^2 / (|A|^2 + |B|^2)^2`, which has no poles.
    /// Conjugation leaves the density unchanged, so antiholomorphic lumps use
    /// their representative.
    pub fn energy_density(&self, z: CylinderPoint) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let w = z.w();
        if w.norm() <= 1.0 {
            density_kernel(self.a_poly(), self.b_poly(), w, false)
        } else {
            density_kernel(self.a_poly(), self.b_poly(), w.inv(), true)
        }
    }

    /// Integral of the energy density over the cylinder.
    pub fn potential_energy(&self, cfg: &QuadratureConfig) -> Result<f64> {
        if self.n == 0 {
            return Ok(0.0);
        }
        let r = integrate_cylinder(cfg, 1, &self.axial_features(), |x, y, out: &mut [f64]| {
            out[0] = self.energy_density(CylinderPoint::new(x, y));
        })?;
        Ok(r.value[0])
    }

    /// Axial positions `ln |w|` of the zeros of A and B, where the energy
    /// tends to concentrate.
    pub fn axial_features(&self) -> Vec<f64> {
        self.feature_points().iter().map(|p| p.0).collect()
    }

    /// Cylinder positions `(ln |w|, arg w)` of the zeros of A and B.
    pub fn feature_points(&self) -> Vec<(f64, f64)> {
        poly::roots(self.a_poly())
            .into_iter()
            .chain(poly::roots(self.b_poly()))
            .filter(|r| r.norm() > 0.0 && r.is_finite())
            .map(|r| (r.norm().ln(), r.arg()))
            .collect()
    }

    pub fn apply_isometry(&self, iso: IsometryTag) -> Result<RationalLump> {
        let n = self.n;
        let a = self.a_poly();
        let b = self.b_poly();
        match iso {
            IsometryTag::Translate(lambda) => {
                if !(lambda.norm() > 0.0) || !lambda.is_finite() {
                    return Err(Error::InvalidIsometry(format!(
                        "translation parameter {lambda} must be nonzero and finite"
                    )));
                }
                // w -> lambda w scales the coefficient of w^(n-k) by lambda^(n-k).
                let scale = |p: &[Complex64]| -> Vec<Complex64> {
                    p.iter()
                        .enumerate()
                        .map(|(k, &c)| c * lambda.powi((n - k) as i32))
                        .collect()
                };
                Self::with_orientation(n, [scale(a), scale(b)].concat(), self.anti)
            }
            IsometryTag::Sigma3 => {
                let rev = |p: &[Complex64]| p.iter().rev().copied().collect::<Vec<_>>();
                Self::with_orientation(n, [rev(a), rev(b)].concat(), self.anti)
            }
            IsometryTag::Sigma2 => {
                let conj = self.coeffs.iter().map(|c| c.conj()).collect();
                Self::with_orientation(n, conj, !self.anti)
            }
            IsometryTag::Sigma1 => self
                .apply_isometry(IsometryTag::Sigma3)?
                .apply_isometry(IsometryTag::Sigma2),
            IsometryTag::Reflect => Self::with_orientation(n, self.coeffs.clone(), !self.anti),
            IsometryTag::Rotate { alpha, beta } => {
                if alpha.norm_sqr() + beta.norm_sqr() == 0.0 {
                    return Err(Error::InvalidIsometry(
                        "rotation needs |alpha|^2 + |beta|^2 != 0".into(),
                    ));
                }
                // conj(R(W)) for the representative is R with (conj alpha, conj beta).
                let (al, be) = if self.anti {
                    (alpha.conj(), beta.conj())
                } else {
                    (alpha, beta)
                };
                let new_b: Vec<Complex64> = a
                    .iter()
                    .zip(b)
                    .map(|(&ca, &cb)| al * cb - be.conj() * ca)
                    .collect();
                let new_a: Vec<Complex64> = a
                    .iter()
                    .zip(b)
                    .map(|(&ca, &cb)| be * cb + al.conj() * ca)
                    .collect();
                Self::with_orientation(n, [new_a, new_b].concat(), self.anti)
            }
        }
    }
}

/// `p(1/v) v^deg`, i.e. the reversed polynomial at `v`.
fn eval_reversed(p: &[Complex64], v: Complex64) -> Complex64 {
    p.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * v + c)
}

fn density_kernel(a: &[Complex64], b: &[Complex64], w: Complex64, reversed: bool) -> f64 {
    let (av, ad, bv, bd) = if reversed {
        let ar: Vec<Complex64> = a.iter().rev().copied().collect();
        let br: Vec<Complex64> = b.iter().rev().copied().collect();
        let (av, ad) = poly::eval_with_derivative(&ar, w);
        let (bv, bd) = poly::eval_with_derivative(&br, w);
        (av, ad, bv, bd)
    } else {
        let (av, ad) = poly::eval_with_derivative(a, w);
        let (bv, bd) = poly::eval_with_derivative(b, w);
        (av, ad, bv, bd)
    };
    let wron = bd * av - bv * ad;
    let den = av.norm_sqr() + bv.norm_sqr();
    4.0 * w.norm_sqr() * wron.norm_sqr() / (den * den)
}

fn sylvester(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let n = a.len() - 1;
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut m = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for (k, (&ca, &cb)) in a.iter().zip(b).enumerate() {
            m[(i, i + k)] = ca;
            m[(n + i, i + k)] = cb;
        }
    }
    m.determinant()
}

/// Formats `a+bi` with shortest round-trip digits.
pub fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 || c.im.is_sign_negative() {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`; whitespace is ignored.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("invalid complex number '{s}'"));
    if t.is_empty() {
        return Err(bad());
    }
    let real = |p: &str| p.parse::<f64>().map_err(|_| bad());
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(Complex64::new(real(&t)?, 0.0));
    };
    // Split at the last sign that is not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |p: &str| match p {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => real(p),
    };
    match split {
        Some(i) => Ok(Complex64::new(real(&body[..i])?, imag(&body[i..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

impl fmt::Display for RationalLump {
    /// `n; c0, c1, ...`, with a negative degree for antiholomorphic lumps.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<String> = self.coeffs.iter().map(|&c| format_complex(c)).collect();
        write!(f, "{}; {}", self.signed_degree(), cs.join(", "))
    }
}

impl FromStr for RationalLump {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (deg, rest) = s
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("expected 'n; c0, c1, ...' in '{s}'")))?;
        let deg: i64 = deg
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("invalid degree '{}'", deg.trim())))?;
        let coeffs = rest
            .split(',')
            .map(parse_complex)
            .collect::<Result<Vec<_>>>()?;
        let n = deg.unsigned_abs() as usize;
        if deg < 0 {
            Self::antiholomorphic(n, coeffs)
        } else {
            Self::new(n, coeffs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r(re: f64) -> Complex64 {
        c(re, 0.0)
    }

    fn exp_minus_z() -> RationalLump {
        RationalLump::new(1, vec![r(1.0), r(0.0), r(0.0), r(1.0)]).unwrap()
    }

    fn sech(alpha: Complex64) -> RationalLump {
        RationalLump::from_polys(&[r(1.0), r(0.0), r(1.0)], &[r(0.0), 2.0 * alpha, r(0.0)]).unwrap()
    }

    /// Laplace (cofactor) expansion, independent of the LU determinant.
    fn det_laplace(m: &[Vec<Complex64>]) -> Complex64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        let mut sum = r(0.0);
        for j in 0..n {
            if m[0][j].norm() == 0.0 {
                continue;
            }
            let minor: Vec<Vec<Complex64>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * m[0][j] * det_laplace(&minor);
        }
        sum
    }

    fn random_lump(rng: &mut ChaCha8Rng, n: usize) -> RationalLump {
        loop {
            let coeffs: Vec<Complex64> = (0..2 * n + 2)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            if let Ok(l) = RationalLump::new(n, coeffs) {
                if l.resultant().norm() > 1e-3 {
                    return l;
                }
            }
        }
    }

    #[test]
    fn resultant_examples() {
        assert!((exp_minus_z().resultant() - r(1.0)).norm() < 1e-15);
        let same = RationalLump::new(1, vec![r(1.0); 4]);
        assert!(matches!(same, Err(Error::InvalidLump(_))));
        let l = RationalLump::new(2, vec![r(1.0), r(0.0), r(1.0), r(0.0), r(2.0), r(0.0)]).unwrap();
        // Normalization divides by 2, scaling the degree-4 determinant by 1/16.
        assert!((l.resultant() * 16.0 - r(4.0)).norm() < 1e-13);
        // Both leading coefficients zero: common root at infinity.
        assert!(RationalLump::new(1, vec![r(0.0), r(1.0), r(0.0), r(2.0)]).is_err());
        assert!(RationalLump::new(1, vec![r(0.0); 4]).is_err());
        assert!(RationalLump::new(1, vec![r(1.0); 3]).is_err());
    }

    #[test]
    fn resultant_matches_laplace_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3 {
            for _ in 0..5 {
                let l = random_lump(&mut rng, n);
                let (a, b) = (l.a_poly(), l.b_poly());
                let mut m = vec![vec![r(0.0); 2 * n]; 2 * n];
                for i in 0..n {
                    m[i][i..=i + n].copy_from_slice(a);
                    m[n + i][i..=i + n].copy_from_slice(b);
                }
                assert!((det_laplace(&m) - l.resultant()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn resultant_vanishes_on_common_root() {
        // A = (w - 2)(w + 1), B = (w - 2)(3w - i)
        let a = [r(1.0), r(-1.0), r(-2.0)];
        let b = [r(3.0), c(-6.0, -1.0), c(0.0, 2.0)];
        assert!(RationalLump::from_polys(&a, &b).is_err());
        assert!(sylvester(&a, &b).norm() < 1e-12);
    }

    #[test]
    fn evaluate_examples() {
        let l = exp_minus_z();
        assert_eq!(
            l.evaluate(CylinderPoint::new(0.0, 0.0)),
            TargetValue::Finite(r(1.0))
        );
        let v = l.evaluate(CylinderPoint::new(0.0, PI)).finite().unwrap();
        assert!((v - r(-1.0)).norm() < 1e-15);
        let alpha = c(0.3, -0.7);
        let v = sech(alpha)
            .evaluate(CylinderPoint::new(0.0, 0.0))
            .finite()
            .unwrap();
        assert!((v - alpha).norm() < 1e-15);
        // Large |x| stays finite and accurate.
        let v = sech(alpha)
            .evaluate(CylinderPoint::new(300.0, 0.2))
            .finite()
            .unwrap();
        assert!(v.norm() < 1e-100);
        // A pole: W = 1/(w - 1) at z = 0.
        let p = RationalLump::new(1, vec![r(1.0), r(-1.0), r(0.0), r(1.0)]).unwrap();
        assert!(p.evaluate(CylinderPoint::new(0.0, 0.0)).is_infinite());
    }

    #[test]
    fn endpoint_examples() {
        use TargetValue::*;
        assert_eq!(exp_minus_z().endpoints(), (Infinity, Finite(r(0.0))));
        assert_eq!(sech(r(0.5)).endpoints(), (Finite(r(0.0)), Finite(r(0.0))));
        let alpha = r(0.4);
        let l =
            RationalLump::from_polys(&[r(1.0), alpha, r(0.0)], &[r(0.0), alpha, r(1.0)]).unwrap();
        assert_eq!(l.endpoints(), (Infinity, Finite(r(0.0))));
    }

    #[test]
    fn energy_density_examples() {
        let l = exp_minus_z();
        for x in [-3.0, -0.5, 0.0, 0.7, 2.5] {
            let e = l.energy_density(CylinderPoint::new(x, 1.3));
            assert!((e - 1.0 / x.cosh().powi(2)).abs() < 1e-14);
        }
        let constant = RationalLump::new(0, vec![r(1.0), r(2.0)]).unwrap();
        assert_eq!(constant.energy_density(CylinderPoint::new(0.3, 0.1)), 0.0);
    }

    #[test]
    fn energy_density_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let l = random_lump(&mut rng, 2);
        let h = 1e-5;
        for _ in 0..20 {
            let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(-PI..PI));
            let at = |x: f64| l.evaluate(CylinderPoint::new(x, y)).finite();
            let (Some(wp), Some(wm), Some(w0)) = (at(x + h), at(x - h), at(x)) else {
                continue;
            };
            if w0.norm() > 1e3 {
                continue;
            }
            let dw = (wp - wm) / (2.0 * h);
            let oracle = 4.0 * dw.norm_sqr() / (1.0 + w0.norm_sqr()).powi(2);
            let e = l.energy_density(CylinderPoint::new(x, y));
            assert!(
                (e - oracle).abs() < 1e-7 * (1.0 + oracle),
                "{e} vs {oracle}"
            );
        }
    }

    #[test]
    fn energy_density_finite_near_poles() {
        // Poles at w = 1 and w = -0.5 lie on the grid lines x = 0 and y = pi.
        let l = RationalLump::from_polys(&[r(1.0), r(-0.5), r(-0.5)], &[r(0.0), r(1.0), r(3.0)])
            .unwrap();
        for i in 0..101 {
            for j in 0..64 {
                let x = -5.0 + 0.1 * i as f64;
                let y = -PI + 2.0 * PI * j as f64 / 64.0;
                let e = l.energy_density(CylinderPoint::new(x, y));
                assert!(e.is_finite() && e >= 0.0);
            }
        }
    }

    #[test]
    fn translation_covariance_of_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = random_lump(&mut rng, 2);
        let shift = c(0.7, -1.1);
        let t = l
            .apply_isometry(IsometryTag::Translate(shift.exp()))
            .unwrap();
        for _ in 0..20 {
            let (x, y) = (rng.gen_range(-3.0..3.0), rng.gen_range(-PI..PI));
            let a = t.energy_density(CylinderPoint::new(x, y));
            let b = l.energy_density(CylinderPoint::new(x + shift.re, y + shift.im));
            assert!((a - b).abs() < 1e-12 * (1.0 + b));
        }
    }

    #[test]
    fn potential_energy_examples() {
        let cfg = QuadratureConfig::default();
        let e1 = exp_minus_z().potential_energy(&cfg).unwrap();
        assert!((e1 - 4.0 * PI).abs() < 1e-7 * 4.0 * PI);
        let e2 = sech(r(1.0)).potential_energy(&cfg).unwrap();
        assert!((e2 - 8.0 * PI).abs() < 1e-7 * 8.0 * PI);
        let e0 = RationalLump::new(0, vec![r(1.0), r(0.0)]).unwrap();
        assert_eq!(e0.potential_energy(&cfg).unwrap(), 0.0);
    }

    #[test]
    fn isometry_examples() {
        let l = sech(c(0.3, 0.2));
        let same = l.apply_isometry(IsometryTag::Translate(r(1.0))).unwrap();
        assert_eq!(same, l);
        assert_eq!(l.apply_isometry(IsometryTag::Sigma3).unwrap(), l);
        let theta = 0.9_f64;
        let half = Complex64::from_polar(1.0, 0.5 * theta);
        let rot = l
            .apply_isometry(IsometryTag::Rotate {
                alpha: half,
                beta: r(0.0),
            })
            .unwrap();
        let expected = sech(c(0.3, 0.2) * Complex64::from_polar(1.0, theta));
        // Equal up to an overall scalar.
        let mu = rot.coeffs()[0] / expected.coeffs()[0];
        for (a, b) in rot.coeffs().iter().zip(expected.coeffs()) {
            assert!((a - mu * b).norm() < 1e-14);
        }
        assert!(l.apply_isometry(IsometryTag::Translate(r(0.0))).is_err());
        assert!(l
            .apply_isometry(IsometryTag::Rotate {
                alpha: r(0.0),
                beta: r(0.0)
            })
            .is_err());
    }

    #[test]
    fn isometries_act_on_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = random_lump(&mut rng, 2);
        let z = CylinderPoint::new(0.37, -1.2);
        let at = |m: &RationalLump, x: f64, y: f64| {
            m.evaluate(CylinderPoint::new(x, y)).finite().unwrap()
        };
        let w = at(&l, z.x, z.y);
        let close = |a: Complex64, b: Complex64| (a - b).norm() < 1e-12 * (1.0 + b.norm());

        let s1 = l.apply_isometry(IsometryTag::Sigma1).unwrap();
        assert!(close(at(&s1, z.x, z.y), at(&l, -z.x, z.y)));
        assert_eq!(s1.signed_degree(), -2);
        let s2 = l.apply_isometry(IsometryTag::Sigma2).unwrap();
        assert!(close(at(&s2, z.x, z.y), at(&l, z.x, -z.y)));
        let s3 = l.apply_isometry(IsometryTag::Sigma3).unwrap();
        assert!(close(at(&s3, z.x, z.y), at(&l, -z.x, -z.y)));
        let refl = l.apply_isometry(IsometryTag::Reflect).unwrap();
        assert!(close(at(&refl, z.x, z.y), w.conj()));

        let (alpha, beta) = (c(0.6, 0.3), c(-0.2, 0.5));
        let mobius = |v: Complex64| (alpha * v - beta.conj()) / (beta * v + alpha.conj());
        let rot = l
            .apply_isometry(IsometryTag::Rotate { alpha, beta })
            .unwrap();
        assert!(close(at(&rot, z.x, z.y), mobius(w)));
        // Rotation of an antiholomorphic lump acts on its (conjugated) values.
        let rot_refl = refl
            .apply_isometry(IsometryTag::Rotate { alpha, beta })
            .unwrap();
        assert!(close(at(&rot_refl, z.x, z.y), mobius(w.conj())));
        assert!(
            (refl.energy_density(z) - l.energy_density(z)).abs()
                < 1e-15 * (1.0 + l.energy_density(z))
        );
    }

    #[test]
    fn parse_complex_forms() {
        assert_eq!(parse_complex("1").unwrap(), r(1.0));
        assert_eq!(parse_complex(" -2.5 ").unwrap(), r(-2.5));
        assert_eq!(parse_complex("3i").unwrap(), c(0.0, 3.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("1+2i").unwrap(), c(1.0, 2.0));
        assert_eq!(parse_complex("1 - 2.5e-3i").unwrap(), c(1.0, -2.5e-3));
        assert_eq!(parse_complex("1.5e+3-i").unwrap(), c(1500.0, -1.0));
        assert_eq!(parse_complex("-1e-2+1E2i").unwrap(), c(-0.01, 100.0));
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn literal_examples() {
        let l: RationalLump = "2; 1, 0, 1, 0, 2, 0".parse().unwrap();
        assert_eq!(l.degree(), 2);
        assert!((l.resultant() * 16.0 - r(4.0)).norm() < 1e-13);
        let anti: RationalLump = "-1;1,0,0,1".parse().unwrap();
        assert!(anti.is_antiholomorphic());
        assert!("2; 1, 0".parse::<RationalLump>().is_err());
        assert!("x; 1, 0".parse::<RationalLump>().is_err());
        assert!("1, 0".parse::<RationalLump>().is_err());
    }

    fn arb_complex() -> impl Strategy<Value = Complex64> {
        (-1.0..1.0_f64, -1.0..1.0_f64).prop_map(|(a, b)| c(a, b))
    }

    fn arb_lump() -> impl Strategy<Value = RationalLump> {
        (1usize..=3)
            .prop_flat_map(|n| {
                proptest::collection::vec(arb_complex(), 2 * n + 2).prop_map(move |v| (n, v))
            })
            .prop_filter_map("valid lump", |(n, v)| {
                RationalLump::new(n, v)
                    .ok()
                    .filter(|l| l.resultant().norm() > 1e-4)
            })
    }

    proptest! {
        #[test]
        fn literal_round_trip(l in arb_lump(), anti in any::<bool>()) {
            let l = if anti { l.apply_isometry(IsometryTag::Reflect).unwrap() } else { l };
            let back: RationalLump = l.to_string().parse().unwrap();
            prop_assert_eq!(back, l);
        }

        #[test]
        fn homogeneity(l in arb_lump(), mu in arb_complex(), x in -3.0..3.0_f64, y in -PI..PI) {
            prop_assume!(mu.norm() > 1e-3);
            let scaled: Vec<Complex64> = l.coeffs().iter().map(|&c| c * mu).collect();
            let m = RationalLump::new(l.degree(), scaled).unwrap();
            let z = CylinderPoint::new(x, y);
            let (a, b) = (l.energy_density(z), m.energy_density(z));
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300) + 1e-300);
            match (l.evaluate(z), m.evaluate(z)) {
                (TargetValue::Finite(u), TargetValue::Finite(v)) => {
                    prop_assert!((u - v).norm() <= 1e-12 * (1.0 + u.norm()))
                }
                (u, v) => prop_assert_eq!(u, v),
            }
            prop_assert!(l.endpoints().0.chordal_distance(&m.endpoints().0) < 1e-12);
            prop_assert!(l.endpoints().1.chordal_distance(&m.endpoints().1) < 1e-12);
        }

        #[test]
        fn sigma3_swaps_endpoints(l in arb_lump()) {
            let s = l.apply_isometry(IsometryTag::Sigma3).unwrap();
            let (lm, lp) = l.endpoints();
            let (sm, sp) = s.endpoints();
            prop_assert!(lm.chordal_distance(&sp) < 1e-12);
            prop_assert!(lp.chordal_distance(&sm) < 1e-12);
        }
    }
}
