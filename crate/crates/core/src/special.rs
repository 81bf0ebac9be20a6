//! Small special-function helpers.

use std::f64::consts::PI;

/// Real dilogarithm `Li2(x) = -∫_0^x ln(1-t)/t dt` for `x ≤ 1`.
pub fn dilog(x: f64) -> f64 {
    assert!(x <= 1.0, "dilog argument {x} > 1");
    if x == 1.0 {
        return PI * PI / 6.0;
    }
    if x < 0.0 {
        // Landen: maps (-inf, 0) into (0, 1).
        let y = x / (x - 1.0);
        let l = (1.0 - x).ln();
        return -dilog(y) - 0.5 * l * l;
    }
    if x > 0.5 {
        return PI * PI / 6.0 - x.ln() * (1.0 - x).ln() - dilog(1.0 - x);
    }
    let mut sum = 0.0;
    let mut pow = x;
    for k in 1..200 {
        let term = pow / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
        pow *= x;
    }
    sum
}

/// `Σ_{m≥1} r^m/(m+1) = (-ln(1-r) - r)/r`, stable near `r = 0`.
pub fn log_series_shifted(r: f64) -> f64 {
    if r.abs() < 0.25 {
        let mut sum = 0.0;
        let mut pow = r;
        for m in 1..80 {
            sum += pow / (m + 1) as f64;
            pow *= r;
            if pow.abs() < 1e-19 {
                break;
            }
        }
        sum
    } else {
        (-(1.0 - r).ln() - r) / r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilog_reference_values() {
        assert!((dilog(0.5) - (PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2))).abs() < 1e-15);
        assert!((dilog(-1.0) + PI * PI / 12.0).abs() < 1e-14);
        assert!(dilog(0.0).abs() < 1e-300);
        // Reflection and Landen branches agree with the series at their seams.
        for x in [0.49f64, 0.51, -0.01, -0.99, 0.9] {
            let direct: f64 = (1..200_000).map(|k| x.powi(k) / (k as f64).powi(2)).sum();
            assert!((dilog(x) - direct).abs() < 1e-9, "{x}");
        }
    }

    #[test]
    fn shifted_log_series_matches_closed_form() {
        for r in [-0.6f64, -0.2, 0.0, 0.1, 0.3, 0.8] {
            let direct: f64 = (1..5000).map(|m| r.powi(m) / (m + 1) as f64).sum();
            assert!((log_series_shifted(r) - direct).abs() < 1e-12, "{r}");
        }
    }
}
