//! One-sample Student t-test.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: u64,
    pub p_two_sided: f64,
    /// P(T ≥ t): the one-sided p-value for "mean exceeds mu0".
    pub p_greater: f64,
    pub mean: f64,
    pub sd: f64,
    pub n: u64,
}

/// Test whether the mean of `xs` differs from `mu0`. Uses the sample standard
/// deviation (n − 1 denominator).
pub fn t_one_sample(xs: &[f64], mu0: f64) -> Result<TTestResult> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = libm::sqrt(ss / (n - 1) as f64);
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let t = (mean - mu0) / (sd / libm::sqrt(n as f64));
    let df = (n - 1) as u64;
    let nu = df as f64;
    let p_two_sided = incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t)).clamp(0.0, 1.0);
    let p_greater = (1.0 - t_cdf(t, df)).clamp(0.0, 1.0);
    Ok(TTestResult { t, df, p_two_sided, p_greater, mean, sd, n: n as u64 })
}

/// Cumulative distribution function of Student's t with `df` degrees of freedom.
pub fn t_cdf(x: f64, df: u64) -> f64 {
    assert!(df >= 1, "t distribution needs df >= 1");
    if x.is_nan() {
        return f64::NAN;
    }
    let nu = df as f64;
    let tail = 0.5 * incomplete_beta(nu / 2.0, 0.5, nu / (nu + x * x));
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Regularized incomplete beta function I_x(a, b).
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const TOL: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let step = d * c;
        h *= step;
        if (step - 1.0).abs() < TOL {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_sample_at_mu0() {
        let r = t_one_sample(&[1.0, 2.0, 3.0, 4.0, 5.0], 3.0).unwrap();
        assert_eq!(r.t, 0.0);
        assert_abs_diff_eq!(r.p_two_sided, 1.0, epsilon = 1e-10);
        assert_eq!(r.df, 4);
    }

    #[test]
    fn hand_formula() {
        let r = t_one_sample(&[2.1, 2.2, 2.3], 2.0).unwrap();
        assert_abs_diff_eq!(r.t, 0.2 / (0.1 / libm::sqrt(3.0)), epsilon = 1e-9);
        assert_abs_diff_eq!(r.t, 3.4641, epsilon = 1e-4);
        assert_eq!(r.df, 2);
        assert!(r.t > 0.0 && r.p_greater < 0.5);
        assert_abs_diff_eq!(r.p_greater * 2.0, r.p_two_sided, epsilon = 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(t_one_sample(&[1.0], 0.0), Err(Error::TooFewSamples(1)));
        assert_eq!(t_one_sample(&[2.0, 2.0, 2.0], 0.0), Err(Error::ZeroVariance));
    }

    #[test]
    fn cdf_analytic_points() {
        assert_eq!(t_cdf(0.0, 7), 0.5);
        assert_abs_diff_eq!(t_cdf(1.0, 1), 0.75, epsilon = 1e-10);
        // df = 2 has the closed form 1/2 + x / (2 sqrt(2 + x^2))
        for x in [-3.0, -0.5, 0.7, 4.0] {
            let exact = 0.5 + x / (2.0 * libm::sqrt(2.0 + x * x));
            assert_abs_diff_eq!(t_cdf(x, 2), exact, epsilon = 1e-12);
        }
    }
}
