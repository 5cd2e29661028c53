//! MacKinnon regression-surface constants for Dickey-Fuller t-statistics.
//!
//! Two tables, stored in source so the crate needs no statistics dependency:
//! the 1994-style p-value response surfaces (normal CDF of a low-order
//! polynomial in the statistic) and the 2010 critical-value surfaces
//! (polynomial in 1/nobs). Values match statsmodels' `adfvalues` tables,
//! which transcribe MacKinnon (1994, 2010) for the single-series case.

use super::Regression;

/// Switch point between the small-p and large-p response surfaces.
const TAU_STAR_C: f64 = -1.61;
const TAU_STAR_CT: f64 = -2.89;

/// Statistics above this map to p = 1.
const TAU_MAX_C: f64 = 2.74;
const TAU_MAX_CT: f64 = 0.70;

/// Statistics below this map to p = 0.
const TAU_MIN_C: f64 = -18.83;
const TAU_MIN_CT: f64 = -16.18;

/// Small-p surface: cdf(c0 + c1*t + c2*t^2).
const TAU_C_SMALLP: [f64; 3] = [2.1659, 1.4412, 0.038269];
const TAU_CT_SMALLP: [f64; 3] = [3.2512, 1.6047, 0.049588];

/// Large-p surface: cdf(c0 + c1*t + c2*t^2 + c3*t^3).
const TAU_C_LARGEP: [f64; 4] = [1.7339, 0.93202, -0.12745, -0.010368];
const TAU_CT_LARGEP: [f64; 4] = [2.5261, 0.61654, -0.37956, -0.060285];

/// Critical-value surfaces `b0 + b1/n + b2/n^2 + b3/n^3` at 1%/5%/10%.
const CRIT_C: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.04],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const CRIT_CT: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.38],
];

fn polyval_ascending(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Approximate asymptotic p-value for a Dickey-Fuller t-statistic.
pub fn p_value(stat: f64, regression: Regression) -> f64 {
    let (t_max, t_min, t_star, smallp, largep) = match regression {
        Regression::Constant => {
            (TAU_MAX_C, TAU_MIN_C, TAU_STAR_C, &TAU_C_SMALLP[..], &TAU_C_LARGEP[..])
        }
        Regression::ConstantAndTrend => {
            (TAU_MAX_CT, TAU_MIN_CT, TAU_STAR_CT, &TAU_CT_SMALLP[..], &TAU_CT_LARGEP[..])
        }
    };
    if stat > t_max {
        return 1.0;
    }
    if stat < t_min {
        return 0.0;
    }
    let poly = if stat <= t_star { smallp } else { largep };
    norm_cdf(polyval_ascending(poly, stat))
}

/// Finite-sample 1%/5%/10% critical values for `nobs` regression observations.
pub fn critical_values(regression: Regression, nobs: usize) -> [f64; 3] {
    let table = match regression {
        Regression::Constant => &CRIT_C,
        Regression::ConstantAndTrend => &CRIT_CT,
    };
    let n = nobs as f64;
    let mut out = [0.0; 3];
    for (slot, row) in out.iter_mut().zip(table) {
        *slot = row[0] + row[1] / n + row[2] / (n * n) + row[3] / (n * n * n);
    }
    out
}

/// Standard normal CDF, Hart/West rational approximation (double precision).
pub fn norm_cdf(x: f64) -> f64 {
    let z = x.abs();
    let tail = if z > 37.0 {
        0.0
    } else {
        let e = (-z * z / 2.0).exp();
        if z < 7.071_067_811_865_475 {
            let mut num = 3.52624965998911e-2 * z + 0.700383064443688;
            num = num * z + 6.37396220353165;
            num = num * z + 33.912866078383;
            num = num * z + 112.079291497871;
            num = num * z + 221.213596169931;
            num = num * z + 220.206867912376;
            let mut den = 8.83883476483184e-2 * z + 1.75566716318264;
            den = den * z + 16.064177579207;
            den = den * z + 86.7807322029461;
            den = den * z + 296.564248779674;
            den = den * z + 637.333633378831;
            den = den * z + 793.826512519948;
            den = den * z + 440.413735824752;
            e * num / den
        } else {
            let mut b = z + 0.65;
            b = z + 4.0 / b;
            b = z + 3.0 / b;
            b = z + 2.0 / b;
            b = z + 1.0 / b;
            e / (b * 2.506628274631)
        }
    };
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}
