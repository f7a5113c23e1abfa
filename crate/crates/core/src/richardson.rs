//! Convergence-order estimates and log–log regression.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed order `p` from a quantity on three grids with spacings
/// `h[0] > h[1] > h[2]`, assuming `Q(h) = Q* + c hᵖ`.
pub fn observed_order(h: [f64; 3], q: [f64; 3]) -> Result<f64> {
    if !(h[0] > h[1] && h[1] > h[2] && h[2] > 0.0) {
        return Err(Error::InvalidArgument(format!("spacings must decrease: {h:?}")));
    }
    let d1 = q[0] - q[1];
    let d2 = q[1] - q[2];
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return Err(Error::InsufficientData(format!(
            "differences {d1:e}, {d2:e} are not monotone; order undefined"
        )));
    }
    let target = d1 / d2;
    let r1 = h[0] / h[1];
    let r2 = h[1] / h[2];
    if (r1 - r2).abs() < 1e-12 * r1 {
        return Ok(target.ln() / r1.ln());
    }
    // (h0ᵖ − h1ᵖ)/(h1ᵖ − h2ᵖ) is increasing in p; bisect.
    let ratio = |p: f64| (h[0].powf(p) - h[1].powf(p)) / (h[1].powf(p) - h[2].powf(p));
    let (mut lo, mut hi) = (1e-3, 20.0);
    if target <= ratio(lo) || target >= ratio(hi) {
        return Err(Error::InsufficientData(format!("order outside [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Order from two error magnitudes at spacings `h_coarse > h_fine`.
pub fn order_from_errors(h_coarse: f64, e_coarse: f64, h_fine: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// Richardson extrapolation of the fine value.
pub fn extrapolate(q_coarse: f64, q_fine: f64, ratio: f64, order: f64) -> f64 {
    q_fine + (q_fine - q_coarse) / (ratio.powf(order) - 1.0)
}

/// Estimated relative error of the fine value, `|Q_fine − Q*| / |Q_fine|`.
pub fn relative_error_estimate(q_coarse: f64, q_fine: f64, ratio: f64, order: f64) -> f64 {
    ((q_fine - q_coarse) / (ratio.powf(order) - 1.0)).abs() / q_fine.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "{n} points are too few for a fit"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr: (sse / (nf - 2.0) / sxx).sqrt(),
        points: n,
    })
}

/// Fit of `ln y` against `ln x`.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("log–log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_exact_orders() {
        let q = |h: f64| 3.0 + 0.7 * h * h;
        let h = [0.1, 0.05, 0.025];
        assert_relative_eq!(observed_order(h, h.map(q)).unwrap(), 2.0, max_relative = 1e-9);
        let h = [0.3, 0.2, 0.07];
        let q1 = |h: f64| 1.0 - 2.0 * h.powf(1.3);
        assert_relative_eq!(observed_order(h, h.map(q1)).unwrap(), 1.3, max_relative = 1e-9);
    }

    #[test]
    fn non_monotone_data_has_no_order() {
        assert!(observed_order([0.4, 0.2, 0.1], [1.0, 2.0, 1.5]).is_err());
        assert!(observed_order([0.1, 0.2, 0.05], [1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn extrapolation_removes_leading_term() {
        let q = |h: f64| 5.0 + 2.0 * h * h;
        assert_relative_eq!(extrapolate(q(0.2), q(0.1), 2.0, 2.0), 5.0, max_relative = 1e-14);
        let e = relative_error_estimate(q(0.2), q(0.1), 2.0, 2.0);
        assert_relative_eq!(e, 0.02 / q(0.1), max_relative = 1e-12);
    }

    #[test]
    fn log_log_slope_of_power_law() {
        let x: Vec<f64> = (1..20).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|k| 4.0 * k.powf(1.5)).collect();
        let f = log_log_fit(&x, &y).unwrap();
        assert_relative_eq!(f.slope, 1.5, max_relative = 1e-12);
        assert!(f.slope_stderr < 1e-10);
        assert!(log_log_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(log_log_fit(&[1.0, 2.0, 0.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
