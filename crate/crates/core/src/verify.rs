//! Identity and oracle checks shared by the command line and the test suite.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lump::RationalLump;
use crate::moduli::{mass, ONE_LUMP_MASS};
use crate::quadrature::QuadratureConfig;
use crate::special::{ellip_k, f_closed, f_quadrature, landen_descend, EllipticModulus};
use crate::xi0::{
    conformal_factor, conformal_factor_quadrature, effective_potential, total_curvature,
};

/// Outcome of one check. `got` passes when `|got - expected| <= tol`, scaled
/// by `|expected|` for relative checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub got: f64,
    pub tol: f64,
    pub relative: bool,
}

impl Check {
    pub fn relative(name: impl Into<String>, expected: f64, got: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            expected,
            got,
            tol,
            relative: true,
        }
    }

    pub fn absolute(name: impl Into<String>, expected: f64, got: f64, tol: f64) -> Self {
        Self {
            relative: false,
            ..Self::relative(name, expected, got, tol)
        }
    }

    pub fn error(&self) -> f64 {
        let d = (self.got - self.expected).abs();
        if self.relative && self.expected != 0.0 {
            d / self.expected.abs()
        } else {
            d
        }
    }

    pub fn pass(&self) -> bool {
        self.error() <= self.tol
    }

    pub fn with_tol(self, tol: f64) -> Self {
        Self { tol, ..self }
    }
}

/// `name,expected,got,tol,PASS|FAIL`.
impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{:e},{}",
            self.name,
            format_sig(self.expected, 10),
            format_sig(self.got, 12),
            self.tol,
            if self.pass() { "PASS" } else { "FAIL" }
        )
    }
}

/// Shortest decimal rendering of `x` rounded to `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x);
    let exp = rounded.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{rounded:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{rounded:e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Mass,
    FLemma,
    Xi0Oracle,
    Asymptotics,
    GaussBonnet,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Mass,
        Suite::FLemma,
        Suite::Xi0Oracle,
        Suite::Asymptotics,
        Suite::GaussBonnet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Mass => "mass",
            Suite::FLemma => "f_lemma",
            Suite::Xi0Oracle => "xi0_oracle",
            Suite::Asymptotics => "asymptotics",
            Suite::GaussBonnet => "gauss_bonnet",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                Error::Parse(format!(
                    "unknown suite '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub cfg: QuadratureConfig,
    /// Replaces every check tolerance.
    pub tol_override: Option<f64>,
    pub seed: u64,
    pub random_lumps: usize,
    pub random_moduli: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            cfg: QuadratureConfig::default(),
            tol_override: None,
            seed: 20_240_611,
            random_lumps: 20,
            random_moduli: 100,
        }
    }
}

/// Random valid lump of degree `n` with coefficients in the unit square,
/// kept away from degeneration: resultant at least `1e-2` and all zeros of
/// numerator and denominator with `|ln |w|| <= 6`.
pub fn random_lump<R: Rng>(rng: &mut R, n: usize) -> RationalLump {
    loop {
        let coeffs: Vec<Complex64> = (0..2 * n + 2)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let Ok(lump) = RationalLump::new(n, coeffs) else {
            continue;
        };
        let tame =
            lump.resultant().norm() >= 1e-2 && lump.axial_features().iter().all(|x| x.abs() <= 6.0);
        if tame {
            return lump;
        }
    }
}

fn mass_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    for n in [1usize, 2] {
        let expected = ONE_LUMP_MASS * n as f64;
        let mut worst = expected;
        for _ in 0..opts.random_lumps {
            let m = mass(&random_lump(&mut rng, n), &opts.cfg)?;
            if (m - expected).abs() > (worst - expected).abs() {
                worst = m;
            }
        }
        out.push(Check::relative(format!("mass_n{n}"), expected, worst, 1e-6));
    }
    Ok(out)
}

/// Points where the closed form of `f` is compared with its defining integral.
pub const F_LEMMA_POINTS: [f64; 7] = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0];

fn f_lemma_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let cfg = opts.cfg.with_rel_tol(opts.cfg.rel_tol.min(1e-12));
    let mut out = Vec::new();
    for t in F_LEMMA_POINTS {
        out.push(Check::absolute(
            format!("f_lemma_t{t}"),
            f_closed(t)?,
            f_quadrature(t, &cfg)?,
            1e-8,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..opts.random_moduli {
        let m = EllipticModulus::new(rng.gen_range(0.0..0.9999))?;
        let k = ellip_k(m)?;
        let descended = ellip_k(landen_descend(m)?)?;
        worst = worst.max((2.0 / (1.0 + m.complement()) * descended - k).abs() / k);
    }
    out.push(Check::absolute("landen_identity", 0.0, worst, 1e-12));
    Ok(out)
}

/// Moduli where the closed-form conformal factor meets its quadrature oracle.
pub const XI0_ORACLE_POINTS: [f64; 7] = [0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 4.0];

fn xi0_oracle_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let cfg = opts.cfg.with_rel_tol(opts.cfg.rel_tol.min(1e-10));
    let mut out = Vec::new();
    for a in XI0_ORACLE_POINTS {
        out.push(Check::relative(
            format!("conformal_factor_a{a}"),
            conformal_factor_quadrature(a, &cfg)?,
            conformal_factor(a)?,
            1e-6,
        ));
    }
    out.push(Check::relative(
        "conformal_factor_at_one",
        2.0 * PI * PI,
        conformal_factor(1.0)?,
        1e-12,
    ));
    Ok(out)
}

fn asymptotic_checks() -> Result<Vec<Check>> {
    let a = 100.0;
    Ok(vec![
        Check::absolute(
            "radius_a100",
            (8.0 * PI).sqrt(),
            a * conformal_factor(a)?.sqrt(),
            1e-3,
        ),
        Check::absolute(
            "ueff_a1000",
            1.0 / (16.0 * PI),
            effective_potential(1e3)?,
            1e-4,
        ),
    ])
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let checks = match suite {
        Suite::Mass => mass_checks(opts)?,
        Suite::FLemma => f_lemma_checks(opts)?,
        Suite::Xi0Oracle => xi0_oracle_checks(opts)?,
        Suite::Asymptotics => asymptotic_checks()?,
        Suite::GaussBonnet => vec![Check::absolute(
            "gauss_bonnet",
            2.0 * PI,
            total_curvature(&opts.cfg)?,
            1e-3,
        )],
    };
    Ok(match opts.tol_override {
        Some(tol) => checks.into_iter().map(|c| c.with_tol(tol)).collect(),
        None => checks,
    })
}
