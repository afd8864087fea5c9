//! Student t distribution against direct numerical integration of its density.
//! Shared with the acceptance suite.

use tangram_core::stats::{t_cdf, t_one_sample};

pub const DFS: [u64; 6] = [1, 2, 5, 10, 30, 89];
pub const XS: [f64; 10] = [-4.0, -2.5, -1.0, -0.3, 0.0, 0.4, 1.0, 1.96, 2.89, 5.0];
const TOLERANCE: f64 = 1e-6;
const EXACT: f64 = 1e-10;

fn density(x: f64, nu: f64) -> f64 {
    let ln_norm = libm::lgamma((nu + 1.0) / 2.0) - libm::lgamma(nu / 2.0) - 0.5 * libm::log(nu * core::f64::consts::PI);
    libm::exp(ln_norm - (nu + 1.0) / 2.0 * libm::log1p(x * x / nu))
}

/// Composite Simpson over [0, |x|] plus the half mass below zero.
pub fn cdf_by_quadrature(x: f64, nu: f64) -> f64 {
    let n = 200_000;
    let h = x.abs() / n as f64;
    let mut sum = density(0.0, nu) + density(x.abs(), nu);
    for i in 1..n {
        sum += density(i as f64 * h, nu) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let half = sum * h / 3.0;
    if x >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

pub fn check() -> Result<String, String> {
    let mut worst = 0.0f64;
    for df in DFS {
        for x in XS {
            let err = (t_cdf(x, df) - cdf_by_quadrature(x, df as f64)).abs();
            if !(err < TOLERANCE) {
                return Err(format!("t_cdf({x}, {df}) is {err:e} off the quadrature"));
            }
            worst = worst.max(err);
        }
    }
    // sample with t well away from zero, df 9
    let xs = [0.31, 0.42, 0.27, 0.35, 0.29, 0.38, 0.33, 0.30, 0.36, 0.40];
    let r = t_one_sample(&xs, 0.27).map_err(|e| e.to_string())?;
    let two_sided = 2.0 * (1.0 - cdf_by_quadrature(r.t.abs(), r.df as f64));
    let greater = 1.0 - cdf_by_quadrature(r.t, r.df as f64);
    let p_err = (r.p_two_sided - two_sided).abs().max((r.p_greater - greater).abs());
    if !(p_err < TOLERANCE) {
        return Err(format!("t_one_sample p-values are {p_err:e} off the quadrature"));
    }
    let centred = t_one_sample(&[1.0, 2.0, 3.0], 2.0).map_err(|e| e.to_string())?;
    if !((centred.t).abs() < EXACT && (centred.p_two_sided - 1.0).abs() < EXACT) {
        return Err(format!("t = 0 gives t {} and p {}", centred.t, centred.p_two_sided));
    }
    if !((t_cdf(1.0, 1) - 0.75).abs() < EXACT) {
        return Err(format!("t_cdf(1, 1) = {}", t_cdf(1.0, 1)));
    }
    Ok(format!(
        "{} table entries within {worst:.1e}, p-values within {p_err:.1e}, t = 0 gives p = 1, t_cdf(1, 1) = 0.75",
        DFS.len() * XS.len()
    ))
}
