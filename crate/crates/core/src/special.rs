//! Complete elliptic integrals and the function
//! `f(t) = int_0^1 (1/(k+t) + 1/(1+tk)) K(k) dk`.
//!
//! K and E are computed with the arithmetic-geometric mean. A modulus stores
//! its complement alongside it so that moduli within rounding of 1 keep full
//! relative accuracy in `k' = sqrt(1-k^2)`.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::quadrature::{adaptive_1d, QuadratureConfig, Tolerance};

/// Elliptic modulus `k` in `[0, 1]` together with `k' = sqrt(1-k^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    k: f64,
    kc: f64,
}

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(domain("elliptic modulus", k, "[0, 1]"));
        }
        Ok(Self {
            k,
            kc: ((1.0 - k) * (1.0 + k)).sqrt(),
        })
    }

    /// Builds the modulus from its complement `k'`.
    pub fn from_complement(kc: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kc) {
            return Err(domain("complementary modulus", kc, "[0, 1]"));
        }
        Ok(Self {
            k: ((1.0 - kc) * (1.0 + kc)).sqrt(),
            kc,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn complement(&self) -> f64 {
        self.kc
    }
}

/// AGM iteration from `(1, kc)`. Returns the mean and
/// `sum_{n>=1} 2^(n-1) c_n^2` needed for E.
fn agm(kc: f64) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = kc;
    let mut sum = 0.0;
    let mut pow = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        pow *= 2.0;
        sum += pow * c * c;
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
        if c.abs() <= 1e-10 * a {
            break;
        }
    }
    (a, sum)
}

/// K and E from the complementary modulus, sharing one AGM run.
fn k_and_e(kc: f64) -> (f64, f64) {
    let (mean, sum) = agm(kc);
    let k = PI / (2.0 * mean);
    // E = K (1 - k^2/2 - sum) with 1 - k^2/2 = (1 + kc^2)/2.
    (k, k * (0.5 * (1.0 + kc * kc) - sum))
}

/// Complete elliptic integral of the first kind, `K(k)` for `0 <= k < 1`.
pub fn ellip_k(m: EllipticModulus) -> Result<f64> {
    if m.kc == 0.0 {
        return Err(domain("ellip_k", m.k, "[0, 1)"));
    }
    Ok(PI / (2.0 * agm(m.kc).0))
}

/// Complete elliptic integral of the second kind, `E(k)` for `0 <= k <= 1`.
pub fn ellip_e(m: EllipticModulus) -> Result<f64> {
    if m.kc == 0.0 {
        return Ok(1.0);
    }
    Ok(k_and_e(m.kc).1)
}

/// `dK/dk = (E - k'^2 K) / (k k'^2)` for `0 < k < 1`.
pub fn ellip_k_derivative(m: EllipticModulus) -> Result<f64> {
    if m.k == 0.0 || m.kc == 0.0 {
        return Err(domain("ellip_k_derivative", m.k, "(0, 1)"));
    }
    let (kk, ee) = k_and_e(m.kc);
    let kc2 = m.kc * m.kc;
    Ok((ee - kc2 * kk) / (m.k * kc2))
}

/// Descending Landen transformation `c = (1-k')/(1+k')`, which satisfies
/// `K(k) = 2/(1+k') K(c)`.
pub fn landen_descend(m: EllipticModulus) -> Result<EllipticModulus> {
    if m.kc == 0.0 {
        return Err(domain("landen_descend", m.k, "[0, 1)"));
    }
    let s = 1.0 + m.kc;
    // 1 - k' = k^2 / (1 + k') avoids cancellation for small k.
    Ok(EllipticModulus {
        k: m.k * m.k / (s * s),
        kc: 2.0 * m.kc.sqrt() / s,
    })
}

/// Closed form of `f`: `(pi/2) K(sqrt(1-t^2))` for `t <= 1` and
/// `(pi/2t) K(sqrt(1-t^-2))` for `t > 1`.
pub fn f_closed(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("f_closed", t, "(0, inf)"));
    }
    if t <= 1.0 || (t - 1.0).abs() < 1e-8 {
        let kc = t.min(1.0);
        Ok(0.5 * PI * ellip_k(EllipticModulus::from_complement(kc)?)?)
    } else {
        Ok(0.5 * PI / t * ellip_k(EllipticModulus::from_complement(1.0 / t)?)?)
    }
}

/// Where the `k` range switches to the logarithmic tail variable.
const TAIL_SPLIT: f64 = 1e-3;
/// Upper end of the tail variable `s = -ln(1-k)`; beyond it the integrand is
/// below 1e-20.
const TAIL_END: f64 = 50.0;

/// Direct quadrature of the integral defining `f`.
///
/// `[0, 1]` is split at `k = 1 - 1e-3`; on the tail the substitution
/// `k = 1 - e^-s` turns the logarithmic singularity of K into a smooth,
/// exponentially decaying integrand.
pub fn f_quadrature(t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("f_quadrature", t, "(0, inf)"));
    }
    let weight = |k: f64| 1.0 / (k + t) + 1.0 / (1.0 + t * k);
    let tol = Tolerance::new(cfg.rel_tol, cfg.abs_tol, cfg.max_refinements + 20);

    let head = |k: f64, out: &mut [f64]| {
        let kc = ((1.0 - k) * (1.0 + k)).sqrt();
        out[0] = weight(k) * PI / (2.0 * agm(kc).0);
    };
    let split = 1.0 - TAIL_SPLIT;
    let head_val = adaptive_1d(&head, &[0.0, 0.5, 0.9, 0.99, split], 1, tol, false)?.value[0];

    let tail = |s: f64, out: &mut [f64]| {
        let e = (-s).exp();
        let k = 1.0 - e;
        let kc = (e * (2.0 - e)).sqrt();
        out[0] = weight(k) * PI / (2.0 * agm(kc).0) * e;
    };
    let s0 = -TAIL_SPLIT.ln();
    let breaks: Vec<f64> = (0..=8)
        .map(|i| s0 + (TAIL_END - s0) * i as f64 / 8.0)
        .collect();
    let tail_val = adaptive_1d(&tail, &breaks, 1, tol, false)?.value[0];
    Ok(head_val + tail_val)
}

/// A function value with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Below this parameter the combinations are summed as power series.
const SERIES_BELOW: f64 = 0.1;

/// The combinations `D(m) = (K - E)/m` and `B(m) = (E - (1-m)K)/m` of the
/// parameter `m = k^2`, with derivatives in `m`.
///
/// `m1 = 1 - m` is passed separately so that parameters close to 1 keep
/// their accuracy. Both are hypergeometric:
/// `D = (pi/4) 2F1(3/2, 1/2; 2; m)` and `B = (pi/4) 2F1(1/2, 1/2; 2; m)`.
pub fn ellip_db(m: f64, m1: f64) -> Result<(Jet, Jet)> {
    if !(0.0..=1.0).contains(&m) || !(m1 > 0.0) || (m + m1 - 1.0).abs() > 1e-12 {
        return Err(domain(
            "ellip_db parameter",
            m,
            "[0, 1) with m1 = 1 - m > 0",
        ));
    }
    if m < SERIES_BELOW {
        return Ok(db_series(m));
    }
    let (kk, ee) = k_and_e(m1.sqrt());
    let d = (kk - ee) / m;
    let b = (ee - m1 * kk) / m;
    // dK/dm = B / (2 m1), dE/dm = -D / 2.
    let d_1 = (b / (2.0 * m1) - 0.5 * d) / m;
    let b_1 = (d - b) / (2.0 * m);
    // Hypergeometric equation m(1-m)F'' + (c - (a+b+1)m)F' - ab F = 0.
    let d_2 = (0.75 * d - (2.0 - 3.0 * m) * d_1) / (m * m1);
    let b_2 = (0.25 * b - 2.0 * m1 * b_1) / (m * m1);
    Ok((
        Jet {
            value: d,
            d1: d_1,
            d2: d_2,
        },
        Jet {
            value: b,
            d1: b_1,
            d2: b_2,
        },
    ))
}

fn db_series(m: f64) -> (Jet, Jet) {
    // With a_n = ((1/2)_n / n!)^2:
    // D = (pi/4) sum a_n (2n+1)/(n+1) m^n,  B = (pi/4) sum a_n/(n+1) m^n.
    let mut d = [0.0; 3];
    let mut b = [0.0; 3];
    let mut a = 1.0;
    for n in 0..80 {
        let nf = n as f64;
        let cd = a * (2.0 * nf + 1.0) / (nf + 1.0);
        let cb = a / (nf + 1.0);
        let p0 = m.powi(n);
        let p1 = if n >= 1 { nf * m.powi(n - 1) } else { 0.0 };
        let p2 = if n >= 2 {
            nf * (nf - 1.0) * m.powi(n - 2)
        } else {
            0.0
        };
        for (i, p) in [p0, p1, p2].into_iter().enumerate() {
            d[i] += cd * p;
            b[i] += cb * p;
        }
        if cd * p0 < 1e-18 * d[0] && n > 3 {
            break;
        }
        a *= ((nf + 0.5) / (nf + 1.0)).powi(2);
    }
    let s = 0.25 * PI;
    let jet = |v: [f64; 3]| Jet {
        value: s * v[0],
        d1: s * v[1],
        d2: s * v[2],
    };
    (jet(d), jet(b))
}
