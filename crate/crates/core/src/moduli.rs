//! The L2 metric on fibers of lumps with fixed endpoints `(p, 0)`.
//!
//! On the fiber over `(p, 0)` the coefficients are normalized to `c_0 = 1`
//! and `c_(n+1) = 0`, and one more coefficient is fixed by the endpoint `p`.
//! The remaining `2n - 1` coefficients `zeta_k = c_k` are the coordinates:
//!
//! * `p` finite: `zeta_1..zeta_n, zeta_(n+2)..zeta_(2n)`, with `c_(2n+1) = p zeta_n`;
//! * `p` infinite: `zeta_1..zeta_(n-1), zeta_(n+2)..zeta_(2n+1)`, with `c_n = 0`.
//!
//! Metric integrands use `dW/dzeta_i = N_i / A^2` with
//! `N_i = (d_i B) A - B (d_i A)`, giving the pole-free form
//! `4 N_i conj(N_j) / (|A|^2 + |B|^2)^2`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lump::{RationalLump, TargetValue};
use crate::poly;
use crate::quadrature::{
    adaptive_1d, apply_rule, integrate_cylinder, integrate_cylinder_nested, CylinderRule,
    QuadratureConfig, Tolerance,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coordinates on the fiber of degree-n lumps with endpoints `(p, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberCoordinates {
    n: usize,
    p: TargetValue,
    zeta: Vec<Complex64>,
}

impl FiberCoordinates {
    pub fn new(n: usize, p: TargetValue, zeta: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCoordinates(
                "degree must be at least 1".into(),
            ));
        }
        if zeta.len() != 2 * n - 1 {
            return Err(Error::InvalidCoordinates(format!(
                "degree {n} fibers have {} coordinates, got {}",
                2 * n - 1,
                zeta.len()
            )));
        }
        if zeta.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidCoordinates("non-finite coordinate".into()));
        }
        Ok(Self { n, p, zeta })
    }

    /// The point `alpha sech z` of the two-lump fiber over `(0, 0)`.
    pub fn xi0(alpha: Complex64) -> Self {
        Self {
            n: 2,
            p: TargetValue::Finite(ZERO),
            zeta: vec![ZERO, ONE, 2.0 * alpha],
        }
    }

    /// The point `(e^-z + alpha) / (e^z + alpha)` of the two-lump fiber over
    /// `(inf, 0)`.
    pub fn xi_inf(alpha: Complex64) -> Self {
        Self {
            n: 2,
            p: TargetValue::Infinity,
            zeta: vec![alpha, alpha, ONE],
        }
    }

    /// Coordinates of a holomorphic lump with `l_+ = 0` and `c_0 != 0`.
    pub fn from_lump(lump: &RationalLump) -> Result<Self> {
        if lump.is_antiholomorphic() {
            return Err(Error::InvalidCoordinates(
                "antiholomorphic lumps have no holomorphic fiber coordinates".into(),
            ));
        }
        let n = lump.degree();
        let c = lump.coeffs();
        if n == 0 || c[0].norm() == 0.0 {
            return Err(Error::InvalidCoordinates("need n >= 1 and c_0 != 0".into()));
        }
        let z: Vec<Complex64> = c.iter().map(|&ck| ck / c[0]).collect();
        if z[n + 1].norm() > 1e-12 {
            return Err(Error::InvalidCoordinates(
                "lump does not tend to 0 as x -> +inf".into(),
            ));
        }
        let p = lump.endpoints().0;
        let zeta = match p {
            TargetValue::Finite(_) => z[1..=n]
                .iter()
                .chain(&z[n + 2..2 * n + 1])
                .copied()
                .collect(),
            TargetValue::Infinity => z[1..n].iter().chain(&z[n + 2..]).copied().collect(),
        };
        Self::new(n, p, zeta)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> TargetValue {
        self.p
    }

    pub fn zeta(&self) -> &[Complex64] {
        &self.zeta
    }

    pub fn dim(&self) -> usize {
        2 * self.n - 1
    }

    /// Same fiber, different coordinate values.
    pub fn with_zeta(&self, zeta: Vec<Complex64>) -> Result<Self> {
        Self::new(self.n, self.p, zeta)
    }

    /// Indices k of the coordinates `zeta_k`, in storage order.
    pub fn labels(&self) -> Vec<usize> {
        let n = self.n;
        match self.p {
            TargetValue::Finite(_) => (1..=n).chain(n + 2..=2 * n).collect(),
            TargetValue::Infinity => (1..n).chain(n + 2..=2 * n + 1).collect(),
        }
    }

    /// Coefficient vector `(c_0, ..., c_(2n+1))` with `c_0 = 1`.
    pub fn coefficients(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut c = vec![ZERO; 2 * n + 2];
        c[0] = ONE;
        for (&k, &z) in self.labels().iter().zip(&self.zeta) {
            c[k] = z;
        }
        if let TargetValue::Finite(p) = self.p {
            c[2 * n + 1] = p * c[n];
        }
        c
    }

    /// `dc / dzeta_i` for each coordinate (the coefficients are affine in
    /// the coordinates).
    pub fn basis(&self) -> Vec<Vec<Complex64>> {
        let n = self.n;
        self.labels()
            .into_iter()
            .map(|k| {
                let mut v = vec![ZERO; 2 * n + 2];
                v[k] = ONE;
                if let (TargetValue::Finite(p), true) = (self.p, k == n) {
                    v[2 * n + 1] = p;
                }
                v
            })
            .collect()
    }

    /// Coefficient-space velocity of a coordinate velocity `v`.
    pub fn push_forward(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; 2 * self.n + 2];
        for (b, &vi) in self.basis().iter().zip(v) {
            for (o, &bk) in out.iter_mut().zip(b) {
                *o += vi * bk;
            }
        }
        out
    }
}

/// The lump with the given fiber coordinates.
pub fn lump_from_coords(coords: &FiberCoordinates) -> Result<RationalLump> {
    RationalLump::new(coords.n, coords.coefficients())
        .map_err(|e| Error::InvalidCoordinates(format!("{e} at zeta = {:?}", coords.zeta)))
}

/// Hermitian matrix `gamma_{i jbar}` of the metric in fiber coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMetric {
    pub entries: DMatrix<Complex64>,
}

impl HermitianMetric {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `max |g_ij - conj(g_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Real eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// `gamma(v, v) = sum g_ij v_i conj(v_j)`.
    pub fn norm_sqr(&self, v: &[Complex64]) -> f64 {
        let d = self.dim();
        let mut s = ZERO;
        for i in 0..d {
            for j in 0..d {
                s += self.entries[(i, j)] * v[i] * v[j].conj();
            }
        }
        s.re
    }
}

/// Evaluates `(A, B)` and the tangent numerators `N_i` at `w`, switching to
/// the reversed polynomials at `1/w` outside the unit circle. Returns the
/// weight `4 / (|A|^2 + |B|^2)^2` and fills `nums`.
fn tangent_numerators(
    c: &[Complex64],
    tangents: &[Vec<Complex64>],
    w: Complex64,
    nums: &mut [Complex64],
) -> f64 {
    let n = (c.len() - 2) / 2;
    let (u, rev) = if w.norm() <= 1.0 {
        (w, false)
    } else {
        (w.inv(), true)
    };
    let ev = |p: &[Complex64]| -> Complex64 {
        if rev {
            p.iter().rev().fold(ZERO, |acc, &x| acc * u + x)
        } else {
            poly::eval(p, u)
        }
    };
    let a = ev(&c[..=n]);
    let b = ev(&c[n + 1..]);
    for (num, t) in nums.iter_mut().zip(tangents) {
        *num = ev(&t[n + 1..]) * a - b * ev(&t[..=n]);
    }
    let den = a.norm_sqr() + b.norm_sqr();
    4.0 / (den * den)
}

/// Packed integrand of the Gram matrix of `tangents`: real and imaginary
/// parts of the upper triangle, row by row.
fn gram_integrand(c: &[Complex64], tangents: &[Vec<Complex64>], x: f64, y: f64, out: &mut [f64]) {
    let d = tangents.len();
    let mut nums = vec![ZERO; d];
    let weight = tangent_numerators(c, tangents, Complex64::from_polar(x.exp(), y), &mut nums);
    let mut idx = 0;
    for i in 0..d {
        for j in i..d {
            let v = weight * nums[i] * nums[j].conj();
            out[idx] = v.re;
            out[idx + 1] = v.im;
            idx += 2;
        }
    }
}

fn unpack_gram(d: usize, packed: &[f64]) -> HermitianMetric {
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    let mut idx = 0;
    for i in 0..d {
        for j in i..d {
            let v = if i == j {
                Complex64::new(packed[idx], 0.0)
            } else {
                Complex64::new(packed[idx], packed[idx + 1])
            };
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
            idx += 2;
        }
    }
    HermitianMetric { entries: m }
}

fn feature_breaks(c: &[Complex64]) -> Vec<f64> {
    let n = (c.len() - 2) / 2;
    poly::roots(&c[..=n])
        .into_iter()
        .chain(poly::roots(&c[n + 1..]))
        .filter(|r| r.norm() > 0.0 && r.is_finite())
        .map(|r| r.norm().ln())
        .collect()
}

fn feature_points(c: &[Complex64]) -> Vec<(f64, f64)> {
    let n = (c.len() - 2) / 2;
    poly::roots(&c[..=n])
        .into_iter()
        .chain(poly::roots(&c[n + 1..]))
        .filter(|r| r.norm() > 0.0 && r.is_finite())
        .map(|r| (r.norm().ln(), r.arg()))
        .collect()
}

/// Gram matrix `int 4 N_i conj(N_j) / (|A|^2+|B|^2)^2 dx dy` of coefficient
/// space tangent vectors at the coefficient vector `c`.
pub fn gram_matrix(
    c: &[Complex64],
    tangents: &[Vec<Complex64>],
    cfg: &QuadratureConfig,
) -> Result<(HermitianMetric, CylinderRule)> {
    let d = tangents.len();
    let r = integrate_cylinder(
        cfg,
        d * (d + 1),
        &feature_breaks(c),
        |x, y, out: &mut [f64]| gram_integrand(c, tangents, x, y, out),
    )?;
    Ok((unpack_gram(d, &r.value), r.rule))
}

/// Gram matrix on a frozen quadrature rule.
pub fn gram_matrix_with_rule(
    c: &[Complex64],
    tangents: &[Vec<Complex64>],
    rule: &CylinderRule,
) -> HermitianMetric {
    let d = tangents.len();
    let v = apply_rule(rule, d * (d + 1), &|x, y, out: &mut [f64]| {
        gram_integrand(c, tangents, x, y, out)
    });
    unpack_gram(d, &v)
}

/// `gamma(v, v)` for one coefficient-space tangent, using the nested rule
/// with breakpoints at the zeros of A and B. Suited to nearly degenerate
/// lumps whose energy sits in tiny regions.
pub fn tangent_norm_sqr_resolved(
    c: &[Complex64],
    tangent: &[Complex64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let tangents = [tangent.to_vec()];
    let hot = feature_points(c);
    let run = |cfg: &QuadratureConfig| {
        integrate_cylinder_nested(cfg, 2, &hot, |x, y, out: &mut [f64]| {
            gram_integrand(c, &tangents, x, y, out)
        })
        .map(|v| v[0])
    };
    let first = run(cfg)?;
    // Tiny norms would otherwise be resolved only to the absolute floor.
    if first > 0.0 && first * cfg.rel_tol < cfg.abs_tol {
        let scaled = QuadratureConfig {
            abs_tol: (0.1 * cfg.rel_tol * first).max(f64::MIN_POSITIVE),
            ..*cfg
        };
        return run(&scaled);
    }
    Ok(first)
}

/// Metric components `gamma_{i jbar}` at a fiber point.
pub fn metric_components(
    coords: &FiberCoordinates,
    cfg: &QuadratureConfig,
) -> Result<HermitianMetric> {
    Ok(metric_components_with_rule(coords, cfg)?.0)
}

/// Metric components together with the converged quadrature rule.
pub fn metric_components_with_rule(
    coords: &FiberCoordinates,
    cfg: &QuadratureConfig,
) -> Result<(HermitianMetric, CylinderRule)> {
    lump_from_coords(coords)?;
    gram_matrix(&coords.coefficients(), &coords.basis(), cfg)
}

/// Velocity `dc/dc` of the coefficients under the translation `z -> z - c`.
pub fn translation_tangent(c: &[Complex64]) -> Vec<Complex64> {
    let n = (c.len() - 2) / 2;
    c.iter()
        .enumerate()
        .map(|(k, &ck)| {
            let power = n - (k % (n + 1));
            -(power as f64) * ck
        })
        .collect()
}

/// Mass of a lump: the squared L2 norm of its translation velocity.
pub fn mass(lump: &RationalLump, cfg: &QuadratureConfig) -> Result<f64> {
    if lump.degree() == 0 {
        return Err(Error::InvalidParameter(
            "mass needs degree at least 1".into(),
        ));
    }
    let c = lump.coeffs();
    let (g, _) = gram_matrix(c, &[translation_tangent(c)], cfg)?;
    Ok(g.entries[(0, 0)].re)
}

/// Largest violation of `d gamma_{i jbar} / d zeta_k = d gamma_{k jbar} / d zeta_i`,
/// using central differences of step `h` on the rule frozen at the center.
pub fn kahler_check(coords: &FiberCoordinates, cfg: &QuadratureConfig, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step {h} must be positive"
        )));
    }
    let (_, rule) = metric_components_with_rule(coords, cfg)?;
    let d = coords.dim();
    let at = |k: usize, step: Complex64| -> Result<HermitianMetric> {
        let mut z = coords.zeta.clone();
        z[k] += step;
        let shifted = coords.with_zeta(z)?;
        lump_from_coords(&shifted)?;
        Ok(gram_matrix_with_rule(
            &shifted.coefficients(),
            &shifted.basis(),
            &rule,
        ))
    };
    // d/dzeta = (d/dRe - i d/dIm) / 2
    let mut deriv = Vec::with_capacity(d);
    for k in 0..d {
        let re_p = at(k, Complex64::new(h, 0.0))?;
        let re_m = at(k, Complex64::new(-h, 0.0))?;
        let im_p = at(k, Complex64::new(0.0, h))?;
        let im_m = at(k, Complex64::new(0.0, -h))?;
        let dre = (re_p.entries - re_m.entries) / Complex64::new(2.0 * h, 0.0);
        let dim = (im_p.entries - im_m.entries) / Complex64::new(2.0 * h, 0.0);
        deriv.push((dre - dim * Complex64::i()) * Complex64::new(0.5, 0.0));
    }
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                worst = worst.max((deriv[k][(i, j)] - deriv[i][(k, j)]).norm());
            }
        }
    }
    Ok(worst)
}

/// The collapse families of paths leaving every compact set in finite length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollapseFamily {
    /// `w -> 2w / (t (w^n + 1))`, `t` in `[1, inf)`.
    Gamma0,
    /// `w -> t p (t w + 1) / ((1 - w)^(n-1) (w + t))`, `t` in `[1/2, 1)`.
    GammaP(f64),
    /// `w -> (t w + 1) / (w^(n-1) (w + t))`, `t` in `[1/2, 1)`.
    GammaInf,
}

#[derive(Debug, Clone, PartialEq)]
enum PathKind {
    Collapse(CollapseFamily),
    /// Straight line in fiber coordinates from `t = 0` to `t = 1`.
    Segment(FiberCoordinates, Vec<Complex64>),
}

/// A curve `t -> lump` on `[t_start, t_end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuliPath {
    n: usize,
    t_start: f64,
    t_end: f64,
    kind: PathKind,
}

/// One of the named collapse paths.
pub fn collapse_path(family: CollapseFamily, n: usize) -> Result<ModuliPath> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "collapse paths need degree at least 2, got {n}"
        )));
    }
    let (t_start, t_end) = match family {
        CollapseFamily::Gamma0 => (1.0, f64::INFINITY),
        CollapseFamily::GammaP(p) => {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "gamma_p needs 0 < p < inf, got {p}"
                )));
            }
            (0.5, 1.0)
        }
        CollapseFamily::GammaInf => (0.5, 1.0),
    };
    Ok(ModuliPath {
        n,
        t_start,
        t_end,
        kind: PathKind::Collapse(family),
    })
}

impl ModuliPath {
    /// Straight segment from `from` (at `t = 0`) to `to` (at `t = 1`), both on
    /// the same fiber. The end `t = 1` is included in the length.
    pub fn segment(from: &FiberCoordinates, to: &FiberCoordinates) -> Result<Self> {
        if from.n != to.n || from.p != to.p {
            return Err(Error::InvalidCoordinates(
                "segment ends lie on different fibers".into(),
            ));
        }
        let v = from.zeta.iter().zip(&to.zeta).map(|(a, b)| b - a).collect();
        Ok(Self {
            n: from.n,
            t_start: 0.0,
            t_end: 1.0,
            kind: PathKind::Segment(from.clone(), v),
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Parameter domain `[t_start, t_end)`; `t_end` may be infinite.
    pub fn domain(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    /// Raw coefficients and their t-derivative.
    pub fn coefficients(&self, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.n;
        let mut c = vec![ZERO; 2 * n + 2];
        let mut dc = vec![ZERO; 2 * n + 2];
        let re = |x: f64| Complex64::new(x, 0.0);
        match &self.kind {
            PathKind::Collapse(CollapseFamily::Gamma0) => {
                c[0] = re(t);
                c[n] = re(t);
                c[2 * n] = re(2.0);
                dc[0] = ONE;
                dc[n] = ONE;
            }
            PathKind::Collapse(CollapseFamily::GammaP(p)) => {
                // (1 - w)^(n-1) in ascending powers, then times (w + t).
                let mut base = vec![1.0];
                for _ in 1..n {
                    let mut next = vec![0.0; base.len() + 1];
                    for (i, &b) in base.iter().enumerate() {
                        next[i] += b;
                        next[i + 1] -= b;
                    }
                    base = next;
                }
                for power in 0..=n {
                    let below = if power >= 1 { base[power - 1] } else { 0.0 };
                    let same = base.get(power).copied().unwrap_or(0.0);
                    c[n - power] = re(below + t * same);
                    dc[n - power] = re(same);
                }
                c[2 * n] = re(t * t * p);
                c[2 * n + 1] = re(t * p);
                dc[2 * n] = re(2.0 * t * p);
                dc[2 * n + 1] = re(*p);
            }
            PathKind::Collapse(CollapseFamily::GammaInf) => {
                c[0] = ONE;
                c[1] = re(t);
                c[2 * n] = re(t);
                c[2 * n + 1] = ONE;
                dc[1] = ONE;
                dc[2 * n] = ONE;
            }
            PathKind::Segment(from, v) => {
                let zeta: Vec<Complex64> =
                    from.zeta.iter().zip(v).map(|(a, b)| a + b * t).collect();
                c = FiberCoordinates::new(n, from.p, zeta)
                    .unwrap()
                    .coefficients();
                dc = from.push_forward(v);
            }
        }
        (c, dc)
    }

    /// The lump at parameter `t`; the limit endpoint of a collapse path is
    /// reported as an invalid lump.
    pub fn point(&self, t: f64) -> Result<RationalLump> {
        let inside = match self.kind {
            PathKind::Segment(..) => t >= self.t_start && t <= self.t_end,
            PathKind::Collapse(_) => t >= self.t_start && t < self.t_end,
        };
        if !inside {
            return Err(Error::InvalidLump(format!(
                "t = {t} is outside the path domain [{}, {})",
                self.t_start, self.t_end
            )));
        }
        RationalLump::new(self.n, self.coefficients(t).0)
    }

    /// Fiber coordinates of the point at parameter `t`.
    pub fn coords(&self, t: f64) -> Result<FiberCoordinates> {
        FiberCoordinates::from_lump(&self.point(t)?)
    }

    /// Collapse paths develop features much narrower than the angular grid.
    fn resolves_features(&self) -> bool {
        matches!(self.kind, PathKind::Collapse(_))
    }
}

/// Metric speed `sqrt(gamma(c', c'))` of the path at `t`.
pub fn path_speed(path: &ModuliPath, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    path.point(t)?;
    let (c, dc) = path.coefficients(t);
    let g = if path.resolves_features() {
        tangent_norm_sqr_resolved(&c, &dc, cfg)?
    } else {
        gram_matrix(&c, &[dc], cfg)?.0.entries[(0, 0)].re
    };
    Ok(g.max(0.0).sqrt())
}

const SPEED_TOL_FACTOR: f64 = 1e-2;

/// Number of geometric pieces used before an improper end is judged.
const PIECE_BUDGET_FINITE: usize = 40;
const PIECE_BUDGET_INFINITE: usize = 60;
/// Extra pieces examined after the budget to tell slow convergence from
/// divergence.
const DIVERGENCE_WINDOW: usize = 5;

/// Boundaries `t_k` of the k-th geometric piece toward the end of the path.
fn piece_bound(t0: f64, t1: f64, k: usize) -> f64 {
    if t1.is_finite() {
        t1 - (t1 - t0) * 0.5f64.powi(k as i32)
    } else if t0 > 0.0 {
        t0 * 2f64.powi(k as i32)
    } else {
        t0 + 2f64.powi(k as i32) - 1.0
    }
}

fn integrate_speed(path: &ModuliPath, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<f64> {
    // Speeds are computed two digits tighter than the length so that their
    // quadrature noise does not drive the outer refinement.
    let inner = cfg.with_rel_tol(SPEED_TOL_FACTOR * cfg.rel_tol);
    // Speed failures are surfaced after the piece is done.
    let failure = std::sync::Mutex::new(None::<Error>);
    let f = |t: f64, out: &mut [f64]| match path_speed(path, t, &inner) {
        Ok(s) => out[0] = s,
        Err(e) => {
            out[0] = 0.0;
            failure.lock().unwrap().get_or_insert(e);
        }
    };
    let tol = Tolerance::new(cfg.rel_tol, cfg.abs_tol, 8);
    let r = adaptive_1d(&f, &[a, b], 1, tol, false)?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(r.value[0])
}

/// Length of the whole path, including its improper end.
///
/// The domain is cut into geometric pieces toward the end (halving the
/// distance to a finite end, doubling `t` toward infinity). Summation stops
/// once a piece adds less than `rel_tol` of the total. If that has not
/// happened within the piece budget and the next few pieces keep adding more
/// than `rel_tol`, the length is reported as divergent.
pub fn path_length(path: &ModuliPath, cfg: &QuadratureConfig) -> Result<f64> {
    if let PathKind::Segment(..) = path.kind {
        return integrate_speed(path, path.t_start, path.t_end, cfg);
    }
    let (t0, t1) = path.domain();
    let budget = if t1.is_finite() {
        PIECE_BUDGET_FINITE
    } else {
        PIECE_BUDGET_INFINITE
    };
    let mut total = 0.0;
    let mut growing = 0;
    for k in 0..budget + DIVERGENCE_WINDOW {
        let (a, b) = (piece_bound(t0, t1, k), piece_bound(t0, t1, k + 1));
        let piece = integrate_speed(path, a, b, cfg)?;
        total += piece;
        let small = piece <= cfg.rel_tol * total;
        if small && k >= 2 {
            return Ok(total);
        }
        if k >= budget {
            growing = if small { 0 } else { growing + 1 };
            if growing >= DIVERGENCE_WINDOW {
                return Err(Error::Divergence {
                    partial: total,
                    t: b,
                });
            }
        }
    }
    Ok(total)
}

/// Length of the path restricted to `[t_start, t_stop]`.
pub fn path_length_truncated(
    path: &ModuliPath,
    t_stop: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (t0, t1) = path.domain();
    if !(t_stop >= t0 && t_stop < t1) {
        return Err(Error::InvalidParameter(format!(
            "truncation point {t_stop} outside [{t0}, {t1})"
        )));
    }
    let mut total = 0.0;
    for k in 0.. {
        let a = piece_bound(t0, t1, k);
        if a >= t_stop {
            break;
        }
        let b = piece_bound(t0, t1, k + 1).min(t_stop);
        total += integrate_speed(path, a, b, cfg)?;
    }
    Ok(total)
}

/// Metric of the one-lump fiber in the translation coordinate: `4 pi`.
pub const ONE_LUMP_MASS: f64 = 4.0 * PI;
