//! Adaptive quadrature on intervals and on the cylinder `R x [-pi, pi)`.
//!
//! One-dimensional integrals use Gauss-Kronrod (7, 15) panels with global
//! adaptive bisection. Cylinder integrals combine a periodic trapezoid rule
//! in the angular direction, which is spectrally accurate for smooth periodic
//! integrands, with adaptive panels along the axis. For integrands with sharp
//! features at known points (near-degenerate maps) a nested adaptive rule is
//! available that places breakpoints at those points in both directions.
//!
//! Every routine reduces panel contributions in a fixed order, so results are
//! bit-identical between runs even though nodes are evaluated in parallel.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Truncation, refinement and tolerance parameters shared by all integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Axial truncation: integrals run over `|x| <= x_cutoff`.
    pub x_cutoff: f64,
    /// Initial number of periodic trapezoid nodes in the angular direction.
    pub y_points: usize,
    /// Initial number of equal axial panels.
    pub x_panels: usize,
    /// Relative tolerance on the (max-norm of the) integral.
    pub rel_tol: f64,
    /// Absolute tolerance floor.
    pub abs_tol: f64,
    /// Maximum bisection depth of a panel below its initial width.
    pub max_refinements: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            x_cutoff: 30.0,
            y_points: 128,
            x_panels: 64,
            rel_tol: 1e-7,
            abs_tol: 1e-13,
            max_refinements: 12,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("quadrature config: {msg}")));
        if !(self.x_cutoff > 0.0 && self.x_cutoff.is_finite()) {
            return bad("x_cutoff must be positive");
        }
        if self.y_points < 4 || !self.y_points.is_multiple_of(2) {
            return bad("y_points must be even and at least 4");
        }
        if self.x_panels == 0 {
            return bad("x_panels must be positive");
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }

    /// Same configuration with both angular and axial resolution doubled.
    pub fn doubled(&self) -> Self {
        Self {
            y_points: self.y_points * 2,
            x_panels: self.x_panels * 2,
            ..*self
        }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    fn tolerance(&self, norm: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * norm)
    }
}

// Gauss-Kronrod (7, 15) abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// The 15 Kronrod nodes of `[a, b]`, in increasing order.
fn kronrod_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut xs = [0.0; 15];
    for i in 0..7 {
        xs[i] = c - h * XGK[i];
        xs[14 - i] = c + h * XGK[i];
    }
    xs[7] = c;
    xs
}

/// Combines node values (in the order of [`kronrod_nodes`]) into Kronrod and
/// Gauss estimates.
fn combine(a: f64, b: f64, vals: &[Vec<f64>], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 0.5 * (b - a);
    let mut kr = vec![0.0; dim];
    let mut ga = vec![0.0; dim];
    for d in 0..dim {
        let mut k = WGK[7] * vals[7][d];
        let mut g = WG[3] * vals[7][d];
        for i in 0..7 {
            let pair = vals[i][d] + vals[14 - i][d];
            k += WGK[i] * pair;
            if i % 2 == 1 {
                g += WG[i / 2] * pair;
            }
        }
        kr[d] = k * h;
        ga[d] = g * h;
    }
    (kr, ga)
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
    depth: u32,
}

struct Queued {
    error: f64,
    index: usize,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Result of an adaptive one-dimensional integration.
#[derive(Debug, Clone)]
pub struct Adaptive1d {
    pub value: Vec<f64>,
    pub error: f64,
    /// Final panel partition, sorted left to right.
    pub panels: Vec<(f64, f64)>,
    /// Kronrod estimate on each panel of `panels`.
    pub panel_values: Vec<Vec<f64>>,
    pub evaluations: usize,
}

/// Tolerances and depth limit for [`adaptive_1d`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_depth: u32,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, max_depth: u32) -> Self {
        Self {
            rel,
            abs,
            max_depth,
        }
    }
}

/// Vector-valued adaptive Gauss-Kronrod integration over the partition given
/// by `breakpoints` (sorted, at least two entries).
///
/// `f(x, out)` writes `dim` components into `out`. When `parallel` is set the
/// 15 nodes of each panel are evaluated on the rayon pool.
pub fn adaptive_1d<F>(
    f: &F,
    breakpoints: &[f64],
    dim: usize,
    tol: Tolerance,
    parallel: bool,
) -> Result<Adaptive1d>
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    assert!(breakpoints.len() >= 2, "need at least one panel");
    let eval_panel = |a: f64, b: f64, depth: u32| -> Panel {
        let xs = kronrod_nodes(a, b);
        let vals: Vec<Vec<f64>> = if parallel {
            xs.par_iter()
                .map(|&x| {
                    let mut out = vec![0.0; dim];
                    f(x, &mut out);
                    out
                })
                .collect()
        } else {
            xs.iter()
                .map(|&x| {
                    let mut out = vec![0.0; dim];
                    f(x, &mut out);
                    out
                })
                .collect()
        };
        let (kr, ga) = combine(a, b, &vals, dim);
        let error = max_diff(&kr, &ga);
        Panel {
            a,
            b,
            value: kr,
            error,
            depth,
        }
    };

    let mut panels: Vec<Panel> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| eval_panel(w[0], w[1], 0))
        .collect();
    let mut evaluations = 15 * panels.len();
    let mut alive: Vec<bool> = vec![true; panels.len()];
    let mut heap: BinaryHeap<Queued> = panels
        .iter()
        .enumerate()
        .map(|(index, p)| Queued {
            error: p.error,
            index,
        })
        .collect();

    let total = |panels: &[Panel], alive: &[bool]| -> (Vec<f64>, f64) {
        let mut sorted: Vec<&Panel> = panels
            .iter()
            .zip(alive)
            .filter_map(|(p, &a)| a.then_some(p))
            .collect();
        sorted.sort_by(|p, q| p.a.total_cmp(&q.a));
        let mut value = vec![0.0; dim];
        let mut error = 0.0;
        for p in sorted {
            for (v, pv) in value.iter_mut().zip(&p.value) {
                *v += pv;
            }
            error += p.error;
        }
        (value, error)
    };

    loop {
        let (value, error) = total(&panels, &alive);
        let target = tol.abs.max(tol.rel * max_norm(&value));
        if error <= target {
            let mut parts: Vec<&Panel> = panels
                .iter()
                .zip(&alive)
                .filter_map(|(p, &a)| a.then_some(p))
                .collect();
            parts.sort_by(|p, q| p.a.total_cmp(&q.a));
            return Ok(Adaptive1d {
                value,
                error,
                panels: parts.iter().map(|p| (p.a, p.b)).collect(),
                panel_values: parts.iter().map(|p| p.value.clone()).collect(),
                evaluations,
            });
        }
        // Worst panel that may still be bisected.
        let next = loop {
            match heap.pop() {
                None => break None,
                Some(q) if panels[q.index].depth < tol.max_depth => break Some(q.index),
                Some(_) => continue,
            }
        };
        let Some(index) = next else {
            return Err(Error::ConvergenceFailure {
                estimate: max_norm(&value),
                error,
                evaluations,
            });
        };
        let Panel { a, b, depth, .. } = panels[index];
        let mid = 0.5 * (a + b);
        alive[index] = false;
        for (lo, hi) in [(a, mid), (mid, b)] {
            let p = eval_panel(lo, hi, depth + 1);
            heap.push(Queued {
                error: p.error,
                index: panels.len(),
            });
            panels.push(p);
            alive.push(true);
        }
        evaluations += 30;
    }
}

/// Scalar adaptive integral of `f` over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let g = |x: f64, out: &mut [f64]| out[0] = f(x);
    Ok(adaptive_1d(&g, &[a, b], 1, tol, false)?.value[0])
}

/// Applies the 15-point Kronrod rule on a fixed partition.
pub fn apply_panels<F>(f: &F, panels: &[(f64, f64)], dim: usize, parallel: bool) -> Vec<f64>
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    let per_panel = |&(a, b): &(f64, f64)| -> Vec<f64> {
        let vals: Vec<Vec<f64>> = kronrod_nodes(a, b)
            .iter()
            .map(|&x| {
                let mut out = vec![0.0; dim];
                f(x, &mut out);
                out
            })
            .collect();
        combine(a, b, &vals, dim).0
    };
    let parts: Vec<Vec<f64>> = if parallel {
        panels.par_iter().map(per_panel).collect()
    } else {
        panels.iter().map(per_panel).collect()
    };
    let mut value = vec![0.0; dim];
    for p in parts {
        for (v, pv) in value.iter_mut().zip(p) {
            *v += pv;
        }
    }
    value
}

fn uniform_breakpoints(lo: f64, hi: f64, n: usize, extra: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect();
    for &e in extra {
        if e > lo && e < hi {
            pts.push(e);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    pts
}

/// A frozen cylinder rule: axial panels plus an angular node count.
///
/// Reapplying a frozen rule to a family of integrands makes the result a
/// smooth function of the family parameter, which finite differences need.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderRule {
    pub panels: Vec<(f64, f64)>,
    pub y_points: usize,
}

#[derive(Debug, Clone)]
pub struct CylinderIntegral {
    pub value: Vec<f64>,
    pub rule: CylinderRule,
    pub evaluations: usize,
}

/// Periodic trapezoid sum over `y_j = -pi + 2 pi j / n`.
fn angular_sum<F>(f: &F, x: f64, n: usize, out: &mut [f64], scratch: &mut [f64])
where
    F: Fn(f64, f64, &mut [f64]) + Sync,
{
    out.iter_mut().for_each(|v| *v = 0.0);
    let h = 2.0 * PI / n as f64;
    for j in 0..n {
        let y = -PI + h * j as f64;
        f(x, y, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o += s;
        }
    }
    out.iter_mut().for_each(|v| *v *= h);
}

/// Integrates `f(x, y, out)` over `|x| <= x_cutoff`, `y` in one period.
///
/// The angular resolution starts at `cfg.y_points` and is doubled until the
/// doubled rule on the converged axial partition agrees within tolerance.
/// `x_breaks` adds axial breakpoints (e.g. at the position of a feature).
pub fn integrate_cylinder<F>(
    cfg: &QuadratureConfig,
    dim: usize,
    x_breaks: &[f64],
    f: F,
) -> Result<CylinderIntegral>
where
    F: Fn(f64, f64, &mut [f64]) + Sync,
{
    cfg.validate()?;
    const MAX_Y_DOUBLINGS: u32 = 5;
    let breaks = uniform_breakpoints(-cfg.x_cutoff, cfg.x_cutoff, cfg.x_panels, x_breaks);
    let tol = Tolerance::new(cfg.rel_tol, cfg.abs_tol, cfg.max_refinements);
    let mut n = cfg.y_points;
    let mut evaluations = 0;
    for _ in 0..=MAX_Y_DOUBLINGS {
        let g = |x: f64, out: &mut [f64]| {
            let mut scratch = vec![0.0; dim];
            angular_sum(&f, x, n, out, &mut scratch);
        };
        let coarse = adaptive_1d(&g, &breaks, dim, tol, true)?;
        evaluations += coarse.evaluations * n;
        let rule = CylinderRule {
            panels: coarse.panels,
            y_points: 2 * n,
        };
        let fine = apply_rule(&rule, dim, &f);
        evaluations += 15 * rule.panels.len() * 2 * n;
        if max_diff(&fine, &coarse.value) <= cfg.tolerance(max_norm(&fine)) {
            return Ok(CylinderIntegral {
                value: fine,
                rule,
                evaluations,
            });
        }
        n *= 2;
    }
    Err(Error::ConvergenceFailure {
        estimate: f64::NAN,
        error: f64::NAN,
        evaluations,
    })
}

/// Evaluates a frozen [`CylinderRule`].
pub fn apply_rule<F>(rule: &CylinderRule, dim: usize, f: &F) -> Vec<f64>
where
    F: Fn(f64, f64, &mut [f64]) + Sync,
{
    let g = |x: f64, out: &mut [f64]| {
        let mut scratch = vec![0.0; dim];
        angular_sum(f, x, rule.y_points, out, &mut scratch);
    };
    apply_panels(&g, &rule.panels, dim, true)
}

/// Extra bisection depth allowed to the nested rule; its panels must shrink
/// down to the width of the sharpest feature.
const NESTED_EXTRA_DEPTH: u32 = 40;

/// Nested adaptive integration over the cylinder with breakpoints at the
/// given hot spots `(x, y)` in both directions.
///
/// Slower than [`integrate_cylinder`], but it resolves features much narrower
/// than the angular trapezoid spacing.
pub fn integrate_cylinder_nested<F>(
    cfg: &QuadratureConfig,
    dim: usize,
    hot_spots: &[(f64, f64)],
    f: F,
) -> Result<Vec<f64>>
where
    F: Fn(f64, f64, &mut [f64]) + Sync,
{
    cfg.validate()?;
    let xs: Vec<f64> = hot_spots.iter().map(|h| h.0).collect();
    let ys: Vec<f64> = hot_spots
        .iter()
        .map(|h| (h.1 + PI).rem_euclid(2.0 * PI) - PI)
        .collect();
    let x_breaks = uniform_breakpoints(-cfg.x_cutoff, cfg.x_cutoff, cfg.x_panels, &xs);
    let y_breaks = uniform_breakpoints(-PI, PI, 8, &ys);
    let depth = cfg.max_refinements + NESTED_EXTRA_DEPTH;
    let inner_tol = Tolerance::new(0.1 * cfg.rel_tol, 0.1 * cfg.abs_tol, depth);

    // Inner failures are recorded and surfaced after the outer pass.
    let failure = std::sync::Mutex::new(None::<Error>);
    let g = |x: f64, out: &mut [f64]| {
        let inner = |y: f64, o: &mut [f64]| f(x, y, o);
        match adaptive_1d(&inner, &y_breaks, dim, inner_tol, false) {
            Ok(r) => out.copy_from_slice(&r.value),
            Err(e) => {
                out.iter_mut().for_each(|v| *v = 0.0);
                failure.lock().unwrap().get_or_insert(e);
            }
        }
    };
    let outer = adaptive_1d(
        &g,
        &x_breaks,
        dim,
        Tolerance::new(cfg.rel_tol, cfg.abs_tol, depth),
        true,
    )?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(outer.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_polynomials_exactly() {
        // K15 is exact for degree 22 polynomials.
        let tol = Tolerance::new(1e-14, 1e-14, 10);
        let v = integrate(|x| x.powi(10) - 3.0 * x.powi(3), -1.0, 2.0, tol).unwrap();
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 3.0 * (16.0 - 1.0) / 4.0;
        assert!((v - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn adaptive_resolves_log_singularity() {
        let tol = Tolerance::new(1e-12, 1e-13, 60);
        let v = integrate(|x| x.ln(), 0.0, 1.0, tol).unwrap();
        assert!((v + 1.0).abs() < 1e-10);
    }

    #[test]
    fn depth_limit_reports_failure() {
        let tol = Tolerance::new(1e-14, 1e-16, 2);
        let err = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::ConvergenceFailure { .. }));
    }

    #[test]
    fn cylinder_gaussian_matches_closed_form() {
        // int exp(-x^2) (2 + cos y) dx dy = sqrt(pi) * 4 pi
        let cfg = QuadratureConfig::default();
        let r = integrate_cylinder(&cfg, 1, &[], |x, y, out: &mut [f64]| {
            out[0] = (-x * x).exp() * (2.0 + y.cos());
        })
        .unwrap();
        let exact = PI.sqrt() * 4.0 * PI;
        assert!((r.value[0] - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn nested_rule_resolves_narrow_peak() {
        // Lorentzian bump of width 1e-4 around (0.3, 2.0); its integral over
        // the plane is pi * eps^2 * (pi / eps^2) = pi^2.
        let eps = 1e-4_f64;
        let cfg = QuadratureConfig {
            x_cutoff: 3.0,
            ..QuadratureConfig::default()
        };
        let v = integrate_cylinder_nested(&cfg, 1, &[(0.3, 2.0)], |x, y, out: &mut [f64]| {
            let r2 = (x - 0.3).powi(2) + (y - 2.0).powi(2);
            out[0] = eps * eps / (r2 + eps * eps).powi(2);
        })
        .unwrap();
        assert!((v[0] - PI).abs() < 1e-5 * PI, "{}", v[0]);
    }

    #[test]
    fn results_are_deterministic() {
        let cfg = QuadratureConfig::default();
        let f = |x: f64, y: f64, out: &mut [f64]| {
            out[0] = 1.0 / (x.cosh() + 0.5 * y.sin());
            out[1] = (x * y).sin() / x.cosh().powi(2);
        };
        let a = integrate_cylinder(&cfg, 2, &[], f).unwrap();
        let b = integrate_cylinder(&cfg, 2, &[], f).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.rule, b.rule);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = QuadratureConfig {
            y_points: 7,
            ..QuadratureConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = QuadratureConfig {
            rel_tol: 0.0,
            ..QuadratureConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
