//! Geodesics on the two symmetric surfaces of degree-2 lumps: the closed
//! form surface `alpha sech z` and the surface `(e^-z + alpha)/(e^z + alpha)`
//! whose metric factor is computed by quadrature.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldGrid, GridSpec};
use crate::lump::RationalLump;
use crate::moduli::{lump_from_coords, tangent_norm_sqr_resolved, FiberCoordinates};
use crate::ode::{dopri5, OdeOptions, Termination};
use crate::quadrature::{adaptive_1d, QuadratureConfig, Tolerance};
use crate::xi0::conformal_jet;

/// Radius below which a trajectory on the `sech` surface counts as collapsed.
pub const A_FLOOR: f64 = 1e-4;

/// Distance to `alpha = +-1` inside which the metric factor is reported as
/// divergent.
pub const XI_INF_GUARD: f64 = 1e-3;

/// Position and velocity on a coordinate patch: `(a, theta)` on the `sech`
/// surface, `(Re alpha, Im alpha)` on the other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub t: f64,
    pub q1: f64,
    pub q2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl GeodesicState {
    pub fn new(t: f64, q1: f64, q2: f64, v1: f64, v2: f64) -> Self {
        Self { t, q1, q2, v1, v2 }
    }

    fn to_array(self) -> [f64; 4] {
        [self.q1, self.q2, self.v1, self.v2]
    }

    fn from_array(t: f64, y: &[f64; 4]) -> Self {
        Self::new(t, y[0], y[1], y[2], y[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedQuantities {
    /// `gamma(v, v) / 2`.
    pub energy: f64,
    /// `a^2 I(a) theta'`.
    pub p_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeodesicOutcome {
    Completed,
    /// `a` reached the collapse floor at affine time `t`.
    Collapsed {
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<GeodesicState>,
    pub outcome: GeodesicOutcome,
}

impl Trajectory {
    pub fn last(&self) -> &GeodesicState {
        self.states
            .last()
            .expect("trajectories hold the initial state")
    }
}

fn check_state(s: &GeodesicState) -> Result<()> {
    let finite = [s.t, s.q1, s.q2, s.v1, s.v2].iter().all(|v| v.is_finite());
    if !finite || s.q1 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "invalid state {s:?}: need a > 0"
        )));
    }
    Ok(())
}

/// Energy `I (a'^2 + a^2 theta'^2) / 2` and Clairaut momentum.
pub fn conserved_quantities(s: &GeodesicState) -> Result<ConservedQuantities> {
    check_state(s)?;
    let i = conformal_jet(s.q1)?.value;
    let a2 = s.q1 * s.q1;
    Ok(ConservedQuantities {
        energy: 0.5 * i * (s.v1 * s.v1 + a2 * s.v2 * s.v2),
        p_theta: a2 * i * s.v2,
    })
}

pub fn clairaut_constant(s: &GeodesicState) -> Result<f64> {
    Ok(conserved_quantities(s)?.p_theta)
}

/// Geodesic equations of `I(a)(da^2 + a^2 dtheta^2)` with
/// `l = d ln I / d ln a`.
fn xi0_rhs(y: &[f64; 4]) -> Result<[f64; 4]> {
    let [a, _, da, dth] = *y;
    if !(a > 0.0) {
        return Err(Error::InvalidParameter("a left the chart".into()));
    }
    let l = conformal_jet(a)?.log_d1;
    Ok([
        da,
        dth,
        -0.5 * l / a * da * da + a * (1.0 + 0.5 * l) * dth * dth,
        -(2.0 + l) / a * da * dth,
    ])
}

/// Integrates a geodesic up to affine time `t_end` with relative tolerance
/// `tol`, stopping at the collapse floor [`A_FLOOR`].
pub fn xi0_geodesic(initial: GeodesicState, t_end: f64, tol: f64) -> Result<Trajectory> {
    xi0_geodesic_with_floor(initial, t_end, tol, A_FLOOR)
}

pub fn xi0_geodesic_with_floor(
    initial: GeodesicState,
    t_end: f64,
    tol: f64,
    a_floor: f64,
) -> Result<Trajectory> {
    check_state(&initial)?;
    if !(tol > 0.0) || !t_end.is_finite() || !(a_floor > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need tol > 0, finite t_end and a_floor > 0 (got {tol}, {t_end}, {a_floor})"
        )));
    }
    let opts = OdeOptions::with_tol(tol);
    let run = dopri5(
        |_, y| xi0_rhs(y),
        initial.t,
        initial.to_array(),
        t_end,
        &opts,
        |_, y| y[0] - a_floor,
    );
    match run {
        Ok(sol) => {
            let states = sol
                .t
                .iter()
                .zip(&sol.y)
                .map(|(&t, y)| GeodesicState::from_array(t, y))
                .collect::<Vec<_>>();
            let outcome = match sol.termination {
                Termination::Completed => GeodesicOutcome::Completed,
                Termination::Event => GeodesicOutcome::Collapsed {
                    t: states.last().map_or(initial.t, |s| s.t),
                },
            };
            Ok(Trajectory { states, outcome })
        }
        Err(Error::StepUnderflow { t }) => Ok(Trajectory {
            states: vec![initial],
            outcome: GeodesicOutcome::Collapsed { t },
        }),
        Err(e) => Err(e),
    }
}

/// First point after `initial` where `a' = 0` (the closest approach of an
/// inbound trajectory), or `None` if there is none before `t_end`.
pub fn xi0_turning_point(
    initial: GeodesicState,
    t_end: f64,
    tol: f64,
) -> Result<Option<GeodesicState>> {
    check_state(&initial)?;
    if initial.v1 >= 0.0 {
        return Err(Error::InvalidParameter(
            "turning point needs inbound data a' < 0".into(),
        ));
    }
    let sol = dopri5(
        |_, y| xi0_rhs(y),
        initial.t,
        initial.to_array(),
        t_end,
        &OdeOptions::with_tol(tol),
        |_, y| -y[2],
    )?;
    Ok((sol.termination == Termination::Event)
        .then(|| GeodesicState::from_array(*sol.t.last().unwrap(), sol.y.last().unwrap())))
}

/// Fiber coordinates and coordinate tangent of the `alpha` direction.
fn xi_inf_point(alpha: Complex64) -> (FiberCoordinates, Vec<Complex64>) {
    let coords = FiberCoordinates::xi_inf(alpha);
    let one = Complex64::new(1.0, 0.0);
    let tangent = coords.push_forward(&[one, one, Complex64::new(0.0, 0.0)]);
    (coords, tangent)
}

/// Conformal factor `gamma_{alpha alphabar}` of the surface
/// `(e^-z + alpha)/(e^z + alpha)`, reported as divergent within
/// [`XI_INF_GUARD`] of `alpha = +-1`.
pub fn xi_inf_metric_factor(alpha: Complex64, cfg: &QuadratureConfig) -> Result<f64> {
    if (alpha - 1.0).norm() < XI_INF_GUARD || (alpha + 1.0).norm() < XI_INF_GUARD {
        return Err(Error::MetricDivergence {
            alpha_re: alpha.re,
            alpha_im: alpha.im,
        });
    }
    xi_inf_metric_factor_unguarded(alpha, cfg)
}

/// As [`xi_inf_metric_factor`] but evaluated arbitrarily close to the
/// singular points; only `alpha = +-1` itself is rejected.
pub fn xi_inf_metric_factor_unguarded(alpha: Complex64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} is not finite"
        )));
    }
    let (coords, tangent) = xi_inf_point(alpha);
    lump_from_coords(&coords)?;
    tangent_norm_sqr_resolved(&coords.coefficients(), &tangent, cfg)
}

/// The straight geodesics of the `(e^-z + alpha)/(e^z + alpha)` surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaLine {
    /// `alpha` in `]1, inf[`.
    Gamma1,
    /// `alpha` on the imaginary axis.
    Gamma2,
    /// `alpha` in `]-1, 1[`.
    Gamma3,
}

impl GammaLine {
    /// Point with line parameter `u`.
    pub fn alpha(self, u: f64) -> Complex64 {
        match self {
            GammaLine::Gamma1 | GammaLine::Gamma3 => Complex64::new(u, 0.0),
            GammaLine::Gamma2 => Complex64::new(0.0, u),
        }
    }

    /// Unit normal to the line.
    pub fn normal(self) -> Complex64 {
        match self {
            GammaLine::Gamma1 | GammaLine::Gamma3 => Complex64::new(0.0, 1.0),
            GammaLine::Gamma2 => Complex64::new(1.0, 0.0),
        }
    }

    /// Open parameter interval.
    pub fn interval(self) -> (f64, f64) {
        match self {
            GammaLine::Gamma1 => (1.0, f64::INFINITY),
            GammaLine::Gamma2 => (f64::NEG_INFINITY, f64::INFINITY),
            GammaLine::Gamma3 => (-1.0, 1.0),
        }
    }

    /// Parameter range tabulated by [`gamma_lines`].
    pub fn default_range(self) -> (f64, f64) {
        match self {
            GammaLine::Gamma1 => (1.0 + 1e-4, 5.0),
            GammaLine::Gamma2 => (-10.0, 10.0),
            GammaLine::Gamma3 => (-1.0 + 1e-4, 1.0 - 1e-4),
        }
    }

    fn singular_points(self) -> &'static [f64] {
        match self {
            GammaLine::Gamma1 | GammaLine::Gamma3 => &[-1.0, 1.0],
            GammaLine::Gamma2 => &[],
        }
    }
}

impl fmt::Display for GammaLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GammaLine::Gamma1 => "gamma1",
            GammaLine::Gamma2 => "gamma2",
            GammaLine::Gamma3 => "gamma3",
        })
    }
}

impl FromStr for GammaLine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gamma1" | "1" => Ok(GammaLine::Gamma1),
            "gamma2" | "2" => Ok(GammaLine::Gamma2),
            "gamma3" | "3" => Ok(GammaLine::Gamma3),
            _ => Err(Error::Parse(format!(
                "unknown line '{s}' (gamma1, gamma2, gamma3)"
            ))),
        }
    }
}

/// Cumulative arc length along a line, tabulated at the final quadrature
/// panel boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcLengthTable {
    pub line: GammaLine,
    pub u: Vec<f64>,
    pub s: Vec<f64>,
}

impl ArcLengthTable {
    pub fn alpha(&self) -> Vec<Complex64> {
        self.u.iter().map(|&u| self.line.alpha(u)).collect()
    }

    pub fn total(&self) -> f64 {
        *self.s.last().unwrap_or(&0.0)
    }
}

/// A piece of the line with a substitution `u = map(tau)`: plain, or
/// logarithmic in the distance to a singular point on either side.
#[derive(Debug, Clone, Copy)]
enum Piece {
    Plain(f64, f64),
    /// `u = s + e^tau`, `tau` from `ln(u0 - s)` to `ln(u1 - s)`.
    Above(f64, f64, f64),
    /// `u = s - e^tau`, `tau` from `ln(s - u0)` down to `ln(s - u1)`.
    Below(f64, f64, f64),
}

impl Piece {
    fn tau_range(self) -> (f64, f64) {
        match self {
            Piece::Plain(a, b) => (a, b),
            Piece::Above(s, a, b) => ((a - s).ln(), (b - s).ln()),
            // reversed so that tau increases with u
            Piece::Below(s, a, b) => (-(s - a).ln(), -(s - b).ln()),
        }
    }

    /// `(u, du/dtau)`.
    fn map(self, tau: f64) -> (f64, f64) {
        match self {
            Piece::Plain(..) => (tau, 1.0),
            Piece::Above(s, ..) => {
                let e = tau.exp();
                (s + e, e)
            }
            Piece::Below(s, ..) => {
                let e = (-tau).exp();
                (s - e, e)
            }
        }
    }
}

fn split_line(line: GammaLine, u0: f64, u1: f64) -> Vec<Piece> {
    let below = line
        .singular_points()
        .iter()
        .copied()
        .filter(|&s| s <= u0)
        .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))));
    let above = line
        .singular_points()
        .iter()
        .copied()
        .filter(|&s| s >= u1)
        .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.min(s))));
    let mid = 0.5 * (u0 + u1);
    let half = mid - u0;
    let left = match below {
        Some(s) if u0 - s < half => Piece::Above(s, u0, mid),
        _ => Piece::Plain(u0, mid),
    };
    let right = match above {
        Some(s) if s - u1 < half => Piece::Below(s, mid, u1),
        _ => Piece::Plain(mid, u1),
    };
    vec![left, right]
}

/// Arc length `int sqrt(gamma) |dalpha|` along `line` from `u0` to `u1`.
///
/// Pieces touching `alpha = +-1` are integrated in the logarithm of the
/// distance to the singular point. `resolution` sets the initial number of
/// panels per piece.
pub fn line_arclength(
    line: GammaLine,
    u0: f64,
    u1: f64,
    resolution: usize,
    cfg: &QuadratureConfig,
) -> Result<ArcLengthTable> {
    let (lo, hi) = line.interval();
    if !(u0 < u1 && u0 > lo && u1 < hi && u0.is_finite() && u1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "[{u0}, {u1}] is not a nonempty range inside {line}"
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} must be at least 2"
        )));
    }
    cfg.validate()?;
    let tol = Tolerance::new(10.0 * cfg.rel_tol, cfg.abs_tol, cfg.max_refinements);
    let mut table = ArcLengthTable {
        line,
        u: vec![u0],
        s: vec![0.0],
    };
    for piece in split_line(line, u0, u1) {
        let (t0, t1) = piece.tau_range();
        let breaks: Vec<f64> = (0..=resolution)
            .map(|k| t0 + (t1 - t0) * k as f64 / resolution as f64)
            .collect();
        let failure = std::sync::Mutex::new(None);
        let f = |tau: f64, out: &mut [f64]| {
            let (u, du) = piece.map(tau);
            out[0] = match xi_inf_metric_factor_unguarded(line.alpha(u), cfg) {
                Ok(g) => g.sqrt() * du,
                Err(e) => {
                    *failure.lock().unwrap() = Some(e);
                    f64::NAN
                }
            };
        };
        let r = adaptive_1d(&f, &breaks, 1, tol, false);
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        let r = r?;
        let mut s = *table.s.last().unwrap();
        for ((_, b), v) in r.panels.iter().zip(&r.panel_values) {
            s += v[0];
            table.u.push(piece.map(*b).0);
            table.s.push(s);
        }
    }
    // end points exactly as requested
    *table.u.last_mut().unwrap() = u1;
    Ok(table)
}

/// Arc-length table over the default range of `line`.
pub fn gamma_lines(
    line: GammaLine,
    resolution: usize,
    cfg: &QuadratureConfig,
) -> Result<ArcLengthTable> {
    let (u0, u1) = line.default_range();
    line_arclength(line, u0, u1, resolution, cfg)
}

/// Relative derivative `|d gamma / dn| / gamma` of the metric factor across
/// the direction `normal` at `alpha`, by central differences of step `h`.
pub fn transverse_residual(
    alpha: Complex64,
    normal: Complex64,
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(h > 0.0) || normal.norm() == 0.0 {
        return Err(Error::InvalidParameter(
            "need h > 0 and a nonzero normal".into(),
        ));
    }
    let n = normal / normal.norm();
    let g0 = xi_inf_metric_factor(alpha, cfg)?;
    let gp = xi_inf_metric_factor(alpha + n * h, cfg)?;
    let gm = xi_inf_metric_factor(alpha - n * h, cfg)?;
    Ok(((gp - gm) / (2.0 * h)).abs() / g0)
}

/// Default difference step for [`geodesy_check_line`].
pub const GEODESY_STEP: f64 = 1e-3;

/// Largest relative transverse derivative of the metric factor at points of
/// `line` given by their line parameters.
pub fn geodesy_check_line(line: GammaLine, samples: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    let (lo, hi) = line.interval();
    samples.iter().try_fold(0.0f64, |worst, &u| {
        if !(u > lo && u < hi) {
            return Err(Error::InvalidParameter(format!("u = {u} is not on {line}")));
        }
        Ok(worst.max(transverse_residual(
            line.alpha(u),
            line.normal(),
            GEODESY_STEP,
            cfg,
        )?))
    })
}

/// Families of configurations whose energy densities are snapshotted. The
/// tunneling frames take real `alpha` in `]-1, 1[` and the antipodal frames
/// imaginary `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScatteringFamily {
    /// `alpha sech z` with `alpha = a e^{i theta}`, parameter `a > 0`.
    Xi0Meridian(f64),
    /// `alpha = u > 1`.
    Frontal,
    /// `alpha = u` with `|u| < 1`.
    Tunneling,
    /// `alpha = i u`.
    Antipodal,
}

impl ScatteringFamily {
    pub fn lump(self, u: f64) -> Result<RationalLump> {
        if !u.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "parameter {u} is not finite"
            )));
        }
        let coords = match self {
            ScatteringFamily::Xi0Meridian(theta) => {
                if !(u > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "meridian needs a > 0, got {u}"
                    )));
                }
                FiberCoordinates::xi0(Complex64::from_polar(u, theta))
            }
            ScatteringFamily::Frontal => {
                if !(u > 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "frontal collision needs alpha > 1, got {u}"
                    )));
                }
                FiberCoordinates::xi_inf(Complex64::new(u, 0.0))
            }
            ScatteringFamily::Tunneling => {
                if !(u.abs() < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "tunneling needs |alpha| < 1, got {u}"
                    )));
                }
                FiberCoordinates::xi_inf(Complex64::new(u, 0.0))
            }
            ScatteringFamily::Antipodal => FiberCoordinates::xi_inf(Complex64::new(0.0, u)),
        };
        lump_from_coords(&coords)
    }

    pub fn alpha(self, u: f64) -> Complex64 {
        match self {
            ScatteringFamily::Xi0Meridian(theta) => Complex64::from_polar(u, theta),
            ScatteringFamily::Frontal | ScatteringFamily::Tunneling => Complex64::new(u, 0.0),
            ScatteringFamily::Antipodal => Complex64::new(0.0, u),
        }
    }
}

/// Energy density frames for each parameter value.
pub fn scattering_snapshots(
    family: ScatteringFamily,
    params: &[f64],
    grid: GridSpec,
) -> Result<Vec<FieldGrid>> {
    grid.validate()?;
    let lumps = params
        .iter()
        .map(|&u| family.lump(u))
        .collect::<Result<Vec<_>>>()?;
    lumps
        .par_iter()
        .map(|l| FieldGrid::sample(l, grid))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xi0::{conformal_factor, effective_potential};
    use std::f64::consts::PI;

    fn unit_speed(a: f64, theta: f64, cos: f64, sin: f64) -> GeodesicState {
        let i = conformal_factor(a).unwrap();
        GeodesicState::new(0.0, a, theta, cos / i.sqrt(), sin / (a * i.sqrt()))
    }

    fn rel_drift(traj: &Trajectory) -> (f64, f64) {
        let c0 = conserved_quantities(&traj.states[0]).unwrap();
        traj.states.iter().fold((0.0, 0.0), |(e, p), s| {
            let c = conserved_quantities(s).unwrap();
            (
                f64::max(e, ((c.energy - c0.energy) / c0.energy).abs()),
                f64::max(p, ((c.p_theta - c0.p_theta) / c0.p_theta).abs()),
            )
        })
    }

    #[test]
    fn meridian_keeps_theta_and_collapses() {
        let s0 = unit_speed(5.0, 0.7, -1.0, 0.0);
        let traj = xi0_geodesic(s0, 100.0, 1e-10).unwrap();
        assert!(traj.states.iter().all(|s| s.q2 == 0.7 && s.v2 == 0.0));
        assert_eq!(clairaut_constant(traj.last()).unwrap(), 0.0);
        let GeodesicOutcome::Collapsed { t } = traj.outcome else {
            panic!("meridian did not collapse: {:?}", traj.last());
        };
        assert!((traj.last().q1 - A_FLOOR).abs() < 1e-12);
        let coarse = xi0_geodesic(s0, 100.0, 1e-8).unwrap();
        let GeodesicOutcome::Collapsed { t: tc } = coarse.outcome else {
            panic!("no collapse at tol 1e-8");
        };
        assert!((t - tc).abs() < 1e-4, "{t} vs {tc}");
        // unit speed: the collapse time is the distance int_floor^5 sqrt(I) da
        let tol = Tolerance::new(1e-12, 1e-14, 40);
        let dist = crate::quadrature::integrate(
            |s: f64| s.exp() * conformal_factor(s.exp()).unwrap().sqrt(),
            A_FLOOR.ln(),
            5f64.ln(),
            tol,
        )
        .unwrap();
        assert!((t - dist).abs() < 1e-8, "{t} vs {dist}");
    }

    #[test]
    fn parallels_are_not_geodesics() {
        let s0 = unit_speed(1.0, 0.0, 0.0, 1.0);
        let traj = xi0_geodesic(s0, 1.0, 1e-10).unwrap();
        assert!((traj.last().q1 - 1.0).abs() > 1e-3);
    }

    #[test]
    fn reflection_conserves_energy_and_momentum() {
        let s0 = unit_speed(3.0, 0.0, -0.8, 0.6);
        let traj = xi0_geodesic(s0, 40.0, 1e-10).unwrap();
        assert_eq!(traj.outcome, GeodesicOutcome::Completed);
        let a_min = traj
            .states
            .iter()
            .map(|s| s.q1)
            .fold(f64::INFINITY, f64::min);
        assert!(a_min > A_FLOOR && a_min < 3.0);
        assert!(traj.last().q1 > 3.0 && traj.last().v1 > 0.0);
        let (de, dp) = rel_drift(&traj);
        assert!(de < 1e-8 && dp < 1e-8, "{de} {dp}");
    }

    #[test]
    fn turning_point_on_effective_potential() {
        let s0 = unit_speed(3.0, 0.0, -0.8, 0.6);
        let c = conserved_quantities(&s0).unwrap();
        let tp = xi0_turning_point(s0, 40.0, 1e-12)
            .unwrap()
            .expect("turning point");
        assert!(tp.v1.abs() < 1e-10);
        let u = effective_potential(tp.q1).unwrap();
        assert!((c.p_theta * c.p_theta * u - c.energy).abs() < 1e-6 * c.energy);
    }

    #[test]
    fn forward_backward_reversible() {
        let s0 = unit_speed(2.0, 0.3, -0.6, 0.8);
        let fwd = xi0_geodesic(s0, 6.0, 1e-12).unwrap();
        let end = *fwd.last();
        let back = xi0_geodesic(end, 0.0, 1e-12).unwrap();
        let b = back.last();
        for (x, y) in [(b.q1, s0.q1), (b.q2, s0.q2), (b.v1, s0.v1), (b.v2, s0.v2)] {
            assert!((x - y).abs() < 1e-7, "{b:?} vs {s0:?}");
        }
        assert!(b.t.abs() < 1e-15);
    }

    #[test]
    fn invalid_initial_state() {
        let s = GeodesicState::new(0.0, -1.0, 0.0, 0.0, 0.0);
        assert!(xi0_geodesic(s, 1.0, 1e-8).is_err());
        assert!(xi0_geodesic(unit_speed(1.0, 0.0, 1.0, 0.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn xi_inf_metric_symmetries() {
        let cfg = QuadratureConfig::default();
        let a = Complex64::new(0.3, 0.4);
        let g = xi_inf_metric_factor(a, &cfg).unwrap();
        for b in [a.conj(), -a, -a.conj()] {
            assert!((xi_inf_metric_factor(b, &cfg).unwrap() - g).abs() < 1e-6 * g);
        }
        let g0 = xi_inf_metric_factor(Complex64::new(0.0, 0.0), &cfg).unwrap();
        assert!(g0 > 0.0 && g0.is_finite());
        let near = xi_inf_metric_factor(Complex64::new(0.99, 0.0), &cfg).unwrap();
        assert!(near > 5.0 * g0);
        assert!(matches!(
            xi_inf_metric_factor(Complex64::new(1.0005, 0.0), &cfg),
            Err(Error::MetricDivergence { .. })
        ));
        assert!(xi_inf_metric_factor_unguarded(Complex64::new(1.0, 0.0), &cfg).is_err());
    }

    #[test]
    fn xi_inf_metric_grows_logarithmically_at_collision() {
        let cfg = QuadratureConfig::default();
        let g =
            |d: f64| xi_inf_metric_factor_unguarded(Complex64::new(1.0 + d, 0.0), &cfg).unwrap();
        let (g2, g3, g4) = (g(1e-2), g(1e-3), g(1e-4));
        // increments per decade approach 8 pi ln 10
        let target = 8.0 * PI * 10f64.ln();
        assert!(((g3 - g2) - target).abs() < 0.05 * target);
        assert!(((g4 - g3) - target).abs() < 0.01 * target);
    }

    #[test]
    fn line_residuals_vanish_off_control() {
        let cfg = QuadratureConfig::default();
        let r1 = geodesy_check_line(GammaLine::Gamma1, &[1.5, 2.0, 3.0], &cfg).unwrap();
        let r2 = geodesy_check_line(GammaLine::Gamma2, &[0.5, 1.0, 2.0], &cfg).unwrap();
        let r3 = geodesy_check_line(GammaLine::Gamma3, &[-0.5, 0.2, 0.6], &cfg).unwrap();
        let control = transverse_residual(
            Complex64::new(0.3, 0.5),
            Complex64::new(1.0, 0.0),
            GEODESY_STEP,
            &cfg,
        )
        .unwrap();
        assert!(r1 <= 1e-5 && r2 <= 1e-5 && r3 <= 1e-5, "{r1} {r2} {r3}");
        assert!(control > 1e-3, "{control}");
        assert!(control > 100.0 * r1.max(r2).max(r3));
    }

    #[test]
    fn arclength_pieces_and_symmetry() {
        let cfg = QuadratureConfig::default();
        let t = line_arclength(GammaLine::Gamma2, -10.0, 10.0, 4, &cfg).unwrap();
        assert!(t.s.windows(2).all(|w| w[1] > w[0]));
        assert!(t.u.windows(2).all(|w| w[1] > w[0]));
        let half = line_arclength(GammaLine::Gamma2, 0.0, 10.0, 4, &cfg).unwrap();
        let neg = line_arclength(GammaLine::Gamma2, -10.0, 0.0, 4, &cfg).unwrap();
        assert!((half.total() - neg.total()).abs() < 1e-5 * half.total());
        assert!((half.total() + neg.total() - t.total()).abs() < 1e-5 * t.total());
        assert!(line_arclength(GammaLine::Gamma1, 0.5, 2.0, 4, &cfg).is_err());
        assert!(line_arclength(GammaLine::Gamma3, -0.5, 0.5, 1, &cfg).is_err());
    }

    #[test]
    fn arclength_into_collision_converges() {
        let cfg = QuadratureConfig::default();
        let s: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&e| {
                line_arclength(GammaLine::Gamma1, 1.0 + e, 5.0, 2, &cfg)
                    .unwrap()
                    .total()
            })
            .collect();
        let (d1, d2) = (s[1] - s[0], s[2] - s[1]);
        assert!(d1 > 0.0 && d2 > 0.0);
        // the tail int_0^eps sqrt(8 pi ln(1/d)) dd shrinks roughly tenfold per decade
        assert!(d2 < 0.2 * d1, "{s:?}");
    }

    #[test]
    fn snapshots() {
        let grid = GridSpec::default();
        let frames =
            scattering_snapshots(ScatteringFamily::Xi0Meridian(0.0), &[1.0], grid).unwrap();
        assert!((frames[0].integral() - 8.0 * PI).abs() < 0.01 * 8.0 * PI);

        let f = &scattering_snapshots(ScatteringFamily::Tunneling, &[0.0], grid).unwrap()[0];
        for ix in (0..grid.nx).step_by(20) {
            let row: Vec<f64> = (0..grid.ny).map(|iy| f.get(ix, iy)).collect();
            let spread = row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - row.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(spread < 1e-12 * (1.0 + row[0]));
        }

        // Each frame is symmetric under z -> -z since W(-z) = 1/W(z), and
        // conjugating alpha reflects y. On the grid y -> -y maps row j to
        // row ny - j (mod ny) and x -> -x reverses the columns.
        let pair = scattering_snapshots(ScatteringFamily::Antipodal, &[3.0, -3.0], grid).unwrap();
        let (p, m) = (&pair[0], &pair[1]);
        let (mut central, mut mirror, mut mirror_x) = (0.0f64, 0.0f64, 0.0f64);
        for iy in 0..grid.ny {
            let jy = (grid.ny - iy) % grid.ny;
            for ix in 0..grid.nx {
                let jx = grid.nx - 1 - ix;
                central = central.max((p.get(ix, iy) - p.get(jx, jy)).abs());
                mirror = mirror.max((p.get(ix, iy) - m.get(ix, jy)).abs());
                mirror_x = mirror_x.max((p.get(ix, iy) - m.get(jx, iy)).abs());
            }
        }
        let tol = 1e-10 * p.max();
        assert!(
            central < tol && mirror < tol && mirror_x < tol,
            "{central} {mirror} {mirror_x}"
        );

        assert!(scattering_snapshots(ScatteringFamily::Frontal, &[1.0], grid).is_err());
        assert!(scattering_snapshots(ScatteringFamily::Tunneling, &[1.0], grid).is_err());
    }
}
