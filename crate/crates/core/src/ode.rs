//! Adaptive Dormand-Prince 5(4) integration with a terminal event.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible step relative to `max(1, |t|)`.
    pub min_step: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            min_step: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    /// The event function reached zero.
    Event,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub termination: Termination,
}

/// One Dormand-Prince step: the fifth-order update and its error estimate.
fn step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Result<([f64; N], [f64; N], [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    k[0] = *k1;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = f(t + C[s] * h, &ys)?;
        if s == 6 {
            let mut err = [0.0; N];
            for (j, kj) in k.iter().enumerate() {
                for i in 0..N {
                    err[i] += h * E[j] * kj[i];
                }
            }
            return Ok((ys, err, k[6]));
        }
    }
    unreachable!()
}

fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    opts: &OdeOptions,
) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let scale = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
            (err[i] / scale).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// Integration stops early where `event(t, y)` changes sign from positive
/// to non-positive; the crossing is located by re-stepping from the last
/// accepted state. A failing right-hand side rejects the step.
pub fn dopri5<const N: usize, F, G>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    event: G,
) -> Result<OdeSolution<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    G: Fn(f64, &[f64; N]) -> f64,
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidParameter(
            "ODE tolerances must be positive".into(),
        ));
    }
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut sol = OdeSolution {
        t: vec![t],
        y: vec![y],
        termination: Termination::Completed,
    };
    if t_end == t0 {
        return Ok(sol);
    }
    let mut k1 = f(t, &y)?;
    let mut g_old = event(t, &y);
    let mut h = initial_step(&y, &k1, opts).min((t_end - t0).abs());
    let mut steps = 0;
    while (t_end - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepUnderflow { t });
        }
        let floor = opts.min_step * t.abs().max(1.0);
        if h < floor {
            return Err(Error::StepUnderflow { t });
        }
        let last = h >= (t_end - t).abs();
        let hs = if last { (t_end - t).abs() } else { h };
        let Ok((y_new, err, k_new)) = step(&f, t, &y, &k1, dir * hs) else {
            h = 0.25 * hs;
            continue;
        };
        let en = error_norm(&err, &y, &y_new, opts);
        if !en.is_finite() || en > 1.0 {
            let fac = if en.is_finite() {
                (0.9 * en.powf(-0.2)).max(0.2)
            } else {
                0.25
            };
            h = hs * fac;
            continue;
        }
        let t_new = if last { t_end } else { t + dir * hs };
        let g_new = event(t_new, &y_new);
        if g_old > 0.0 && g_new <= 0.0 {
            let (te, ye) = locate_event(&f, &event, t, &y, &k1, dir * hs, g_old, g_new)?;
            sol.t.push(te);
            sol.y.push(ye);
            sol.termination = Termination::Event;
            return Ok(sol);
        }
        t = t_new;
        y = y_new;
        k1 = k_new;
        g_old = g_new;
        sol.t.push(t);
        sol.y.push(y);
        let fac = if en == 0.0 {
            5.0
        } else {
            (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = hs * fac;
    }
    Ok(sol)
}

fn initial_step<const N: usize>(y: &[f64; N], dy: &[f64; N], opts: &OdeOptions) -> f64 {
    let scale = |i: usize| opts.atol + opts.rtol * y[i].abs();
    let d0 = (0..N)
        .map(|i| (y[i] / scale(i)).powi(2))
        .sum::<f64>()
        .sqrt();
    let d1 = (0..N)
        .map(|i| (dy[i] / scale(i)).powi(2))
        .sum::<f64>()
        .sqrt();
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
}

/// Finds the event time inside the accepted step `[t, t + h]` by the
/// Illinois variant of regula falsi on fresh single steps from `(t, y)`.
#[allow(clippy::too_many_arguments)]
fn locate_event<const N: usize, F, G>(
    f: &F,
    event: &G,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    g0: f64,
    g1: f64,
) -> Result<(f64, [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    G: Fn(f64, &[f64; N]) -> f64,
{
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut glo, mut ghi) = (g0, g1);
    let mut side = 0;
    let mut best = (t + h, step(f, t, y, k1, h)?.0);
    for _ in 0..100 {
        let s = (lo * ghi - hi * glo) / (ghi - glo);
        let s = if s > lo && s < hi { s } else { 0.5 * (lo + hi) };
        let ys = step(f, t, y, k1, s * h)?.0;
        let gs = event(t + s * h, &ys);
        best = (t + s * h, ys);
        if gs == 0.0 || (hi - lo) * h.abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            break;
        }
        if gs > 0.0 {
            lo = s;
            glo = gs;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = s;
            ghi = gs;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
        if gs.abs() <= 1e-15 * g0.abs().max(g1.abs()) {
            break;
        }
    }
    Ok(best)
}
