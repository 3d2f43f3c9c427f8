//! Complex polynomials stored as coefficient slices, highest power first.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn eval(coeffs: &[Complex64], w: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c)
}

/// Value and first derivative by Horner's scheme.
pub fn eval_with_derivative(coeffs: &[Complex64], w: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    coeffs
        .iter()
        .fold((zero, zero), |(p, dp), &c| (p * w + c, dp * w + p))
}

/// Roots as eigenvalues of the companion matrix. Leading zero coefficients
/// (roots at infinity) are dropped.
pub fn roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let Some(lead) = coeffs.iter().position(|c| c.norm() > 0.0) else {
        return Vec::new();
    };
    let p = &coeffs[lead..];
    let deg = p.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-p[1] / p[0]];
    }
    let mut m = DMatrix::<Complex64>::zeros(deg, deg);
    for j in 0..deg {
        m[(0, j)] = -p[j + 1] / p[0];
    }
    for i in 1..deg {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    let t = m.schur().unpack().1;
    (0..deg).map(|i| t[(i, i)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn horner_matches_expansion() {
        let p = [c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 1.0)];
        let w = c(0.4, -1.3);
        let direct = w * w + c(0.0, 2.0) * w + c(-3.0, 1.0);
        let (v, d) = eval_with_derivative(&p, w);
        assert!((v - direct).norm() < 1e-14);
        assert!((eval(&p, w) - direct).norm() < 1e-14);
        assert!((d - (2.0 * w + c(0.0, 2.0))).norm() < 1e-14);
    }

    #[test]
    fn roots_of_known_polynomials() {
        // (w - 1)(w + 2i)(w - 3 + i)
        let r = [c(1.0, 0.0), c(0.0, -2.0), c(3.0, -1.0)];
        let mut p = vec![c(1.0, 0.0)];
        for &root in &r {
            let mut next = vec![c(0.0, 0.0); p.len() + 1];
            for (i, &a) in p.iter().enumerate() {
                next[i] += a;
                next[i + 1] -= a * root;
            }
            p = next;
        }
        let found = roots(&p);
        assert_eq!(found.len(), 3);
        for root in r {
            assert!(found.iter().any(|f| (f - root).norm() < 1e-12));
        }
        // w^2 + 1 with a leading zero
        let q = roots(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(q.len(), 2);
        assert!(q
            .iter()
            .all(|z| (z.norm() - 1.0).abs() < 1e-14 && z.re.abs() < 1e-14));
        assert!(roots(&[c(2.0, 0.0)]).is_empty());
    }
}
