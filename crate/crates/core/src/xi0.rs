//! Geometry of the surface of lumps `W = alpha sech z` in the degree-2
//! moduli space: conformal factor, curvature, effective potential and the
//! embedding as a surface of revolution.
//!
//! Everything is computed in the logarithmic variable `s = ln a`, where the
//! metric reads `I a^2 (ds^2 + dtheta^2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::quadrature::{self, QuadratureConfig, Tolerance};
use crate::special::ellip_db;

/// Below this value of `s` the leading logarithmic asymptotics are exact to
/// double precision; above `-ASYMPTOTIC_S` the same holds for the
/// `a^-2` tail.
const ASYMPTOTIC_S: f64 = 40.0;

/// Roundoff allowance for the embedding radicand.
const RADICAND_TOL: f64 = 1e-12;

/// Default profile and scan resolution.
pub const POINTS_PER_DECADE: usize = 400;

/// Polar coordinates `alpha = a e^{i theta}` on the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCoordinate {
    pub a: f64,
    pub theta: f64,
}

impl RadialCoordinate {
    pub fn new(a: f64, theta: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !theta.is_finite() {
            return Err(domain("radial coordinate", a, "(0, inf)"));
        }
        Ok(Self {
            a,
            theta: theta.rem_euclid(2.0 * PI),
        })
    }

    pub fn from_alpha(alpha: Complex64) -> Result<Self> {
        Self::new(alpha.norm(), alpha.arg())
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.a, self.theta)
    }
}

/// `I(a)` with the first two derivatives of `ln I` in `s = ln a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalJet {
    pub value: f64,
    pub log_d1: f64,
    pub log_d2: f64,
}

fn check_a(what: &'static str, a: f64) -> Result<f64> {
    if a > 0.0 && a.is_finite() {
        Ok(a.ln())
    } else {
        Err(domain(what, a, "(0, inf)"))
    }
}

/// Conformal factor and log-derivatives at `s = ln a`.
///
/// For `a <= 1`, `I = 8 pi D(1 - a^4)`; for `a > 1`, `I = 8 pi a^-2 B(1 - a^-4)`
/// with `D = (K - E)/m`, `B = (E - (1-m)K)/m`. Both are regular at `m = 0`,
/// which removes the apparent singularity at `a = 1`.
pub fn conformal_jet_log(s: f64) -> Result<ConformalJet> {
    if !s.is_finite() {
        return Err(domain("conformal factor", s.exp(), "(0, inf)"));
    }
    if s < -ASYMPTOTIC_S {
        let l = (4.0f64).ln() - 2.0 * s - 1.0;
        return Ok(ConformalJet {
            value: 8.0 * PI * l,
            log_d1: -2.0 / l,
            log_d2: -4.0 / (l * l),
        });
    }
    if s > ASYMPTOTIC_S {
        return Ok(ConformalJet {
            value: 8.0 * PI * (-2.0 * s).exp(),
            log_d1: -2.0,
            log_d2: 0.0,
        });
    }
    if s <= 0.0 {
        let m1 = (4.0 * s).exp();
        let m = -(4.0 * s).exp_m1();
        let (d, _) = ellip_db(m, m1)?;
        let r1 = d.d1 / d.value;
        let r2 = d.d2 / d.value;
        Ok(ConformalJet {
            value: 8.0 * PI * d.value,
            log_d1: -4.0 * m1 * r1,
            log_d2: 16.0 * m1 * (-r1 + m1 * (r2 - r1 * r1)),
        })
    } else {
        let m1 = (-4.0 * s).exp();
        let m = -(-4.0 * s).exp_m1();
        let (_, b) = ellip_db(m, m1)?;
        let r1 = b.d1 / b.value;
        let r2 = b.d2 / b.value;
        Ok(ConformalJet {
            value: 8.0 * PI * (-2.0 * s).exp() * b.value,
            log_d1: -2.0 + 4.0 * m1 * r1,
            log_d2: 16.0 * m1 * (-r1 + m1 * (r2 - r1 * r1)),
        })
    }
}

pub fn conformal_jet(a: f64) -> Result<ConformalJet> {
    conformal_jet_log(check_a("conformal factor", a)?)
}

pub fn conformal_factor(a: f64) -> Result<f64> {
    Ok(conformal_jet(a)?.value)
}

/// Gaussian curvature `-(ln I)_ss / (2 a^2 I)`.
pub fn scalar_curvature(a: f64) -> Result<f64> {
    let s = check_a("scalar curvature", a)?;
    let j = conformal_jet_log(s)?;
    Ok(-j.log_d2 / (2.0 * (2.0 * s).exp() * j.value))
}

/// `1 / (2 a^2 I)`.
pub fn effective_potential(a: f64) -> Result<f64> {
    let s = check_a("effective potential", a)?;
    Ok(1.0 / (2.0 * area_factor(s)?))
}

/// `a^2 I(a)` at `s = ln a`.
fn area_factor(s: f64) -> Result<f64> {
    let j = conformal_jet_log(s)?;
    Ok((2.0 * s).exp() * j.value)
}

/// Total curvature `int R dA` over the whole surface.
///
/// In `s` the density is `-pi (ln I)_ss`; the line is mapped to `(-1, 1)` by
/// `s = u / (1 - u^2)`, which keeps the slowly decaying `s -> -inf` tail
/// bounded. `cfg.x_panels` sets the initial partition of `u`.
pub fn total_curvature(cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    let density = |u: f64| {
        let q = 1.0 - u * u;
        let s = u / q;
        let ds = (1.0 + u * u) / (q * q);
        match conformal_jet_log(s) {
            Ok(j) => -PI * j.log_d2 * ds,
            Err(_) => f64::NAN,
        }
    };
    let n = cfg.x_panels.max(1);
    let breaks: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let g = |u: f64, out: &mut [f64]| out[0] = density(u);
    let tol = Tolerance::new(cfg.rel_tol, cfg.abs_tol, cfg.max_refinements + 20);
    let total = quadrature::adaptive_1d(&g, &breaks, 1, tol, false)?.value[0];
    if !total.is_finite() {
        return Err(Error::ConvergenceFailure {
            estimate: total,
            error: f64::NAN,
            evaluations: 0,
        });
    }
    Ok(total)
}

/// Slack `a (ln I)' + 4` of the embedding condition `(ln I)' >= -4/a`.
pub fn embedding_slack(a: f64) -> Result<f64> {
    Ok(conformal_jet(a)?.log_d1 + 4.0)
}

/// Profile quantities at `s = ln a`: radius `a sqrt I`, `dv/ds`, and
/// `d radius / ds`.
fn profile_rates(s: f64) -> Result<(f64, f64, f64)> {
    let j = conformal_jet_log(s)?;
    let l = j.log_d1;
    let radius = s.exp() * j.value.sqrt();
    let radicand = -l - 0.25 * l * l;
    if radicand < -RADICAND_TOL {
        return Err(Error::Embedding {
            a: s.exp(),
            slack: radicand,
        });
    }
    let dv = radius * radicand.max(0.0).sqrt();
    Ok((radius, dv, radius * (1.0 + 0.5 * l)))
}

/// Integrand `dv/da` of the height function.
pub fn height_integrand(a: f64) -> Result<f64> {
    let s = check_a("height integrand", a)?;
    Ok(profile_rates(s)?.1 / a)
}

/// Slope `d radius / d height` of the profile curve.
pub fn profile_slope(a: f64) -> Result<f64> {
    let s = check_a("profile slope", a)?;
    let (_, dv, dr) = profile_rates(s)?;
    Ok(dr / dv)
}

/// Samples of the embedded profile curve.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingProfile {
    pub a: Vec<f64>,
    pub radius: Vec<f64>,
    pub height: Vec<f64>,
}

impl EmbeddingProfile {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// `n` points log-spaced from `a_min` to `a_max` inclusive.
pub fn log_grid(a_min: f64, a_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(a_min > 0.0 && a_max > a_min && a_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid needs 0 < a_min < a_max, got [{a_min}, {a_max}]"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least 2 samples, got {n}"
        )));
    }
    let (s0, s1) = (a_min.ln(), a_max.ln());
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                a_max
            } else {
                (s0 + (s1 - s0) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// Number of samples giving `per_decade` points per factor of ten.
pub fn samples_for(a_min: f64, a_max: f64, per_decade: usize) -> usize {
    let decades = (a_max / a_min).log10().max(0.0);
    ((decades * per_decade as f64).ceil() as usize + 1).max(2)
}

/// Profile `(a sqrt I(a), v(a))` on a log grid with `v(a_min) = 0`.
///
/// The height increments between consecutive samples are integrated in `s`
/// with adaptive Gauss-Kronrod at the default tolerances.
pub fn embedding_profile(a_min: f64, a_max: f64, n_samples: usize) -> Result<EmbeddingProfile> {
    let a = log_grid(a_min, a_max, n_samples)?;
    let rates: Vec<(f64, f64, f64)> = a
        .par_iter()
        .map(|&x| profile_rates(x.ln()))
        .collect::<Result<_>>()?;
    let cfg = QuadratureConfig::default();
    let tol = Tolerance::new(cfg.rel_tol * 1e-3, cfg.abs_tol, cfg.max_refinements + 20);
    let steps: Vec<f64> = a
        .par_windows(2)
        .map(|w| {
            quadrature::integrate(
                |s| profile_rates(s).map_or(f64::NAN, |r| r.1),
                w[0].ln(),
                w[1].ln(),
                tol,
            )
        })
        .collect::<Result<_>>()?;
    let mut height = Vec::with_capacity(a.len());
    let mut v = 0.0;
    height.push(v);
    for dv in steps {
        v += dv;
        height.push(v);
    }
    Ok(EmbeddingProfile {
        radius: rates.iter().map(|r| r.0).collect(),
        a,
        height,
    })
}

/// One row of a parameter scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Xi0Sample {
    pub a: f64,
    pub i: f64,
    pub r: f64,
    pub u_eff: f64,
    pub radius: f64,
    pub height: f64,
}

/// Conformal factor, curvature, potential and profile on a log grid.
pub fn scan(a_min: f64, a_max: f64, n_samples: usize) -> Result<Vec<Xi0Sample>> {
    let profile = embedding_profile(a_min, a_max, n_samples)?;
    (0..profile.len())
        .into_par_iter()
        .map(|k| {
            let a = profile.a[k];
            Ok(Xi0Sample {
                a,
                i: conformal_factor(a)?,
                r: scalar_curvature(a)?,
                u_eff: effective_potential(a)?,
                radius: profile.radius[k],
                height: profile.height[k],
            })
        })
        .collect()
}

/// Direct quadrature of `I(a) = 4 int |sech z|^2 / (1 + a^2 |sech z|^2)^2`
/// over the cylinder. Independent of the elliptic closed form.
pub fn conformal_factor_quadrature(a: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_a("conformal factor", a)?;
    let a2 = a * a;
    // |sech z|^2 = 2 / (cosh 2x + cos 2y)
    let f = |x: f64, y: f64, out: &mut [f64]| {
        let d = (2.0 * x).cosh() + (2.0 * y).cos();
        let q = d + 2.0 * a2;
        out[0] = 8.0 * d / (q * q);
    };
    Ok(quadrature::integrate_cylinder(cfg, 1, &[0.0], f)?.value[0])
}

/// The regulated intermediate `J(a) = -16 a^2 f(a^2)`.
#[doc(hidden)]
pub fn regulated_j(a: f64) -> Result<f64> {
    check_a("regulated J", a)?;
    Ok(-16.0 * a * a * crate::special::f_closed(a * a)?)
}
