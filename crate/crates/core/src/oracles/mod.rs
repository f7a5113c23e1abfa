//! Reference spectra with certified roots, and the Weyl-type coefficient.

mod beam;
pub mod bessel;
mod disk;

pub use beam::{beam_characteristic, beam_spectrum};
pub use disk::{disk_characteristic, disk_first_mode_functionals, disk_spectrum};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One root of a characteristic equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRoot {
    /// Angular order (disk) or 0 (beam).
    pub order: usize,
    /// 1-based root index within its order.
    pub index: usize,
    /// `β` with `Γ = β⁴` on the unit reference domain.
    pub root: f64,
    pub multiplicity: usize,
    /// `|F(β)|` of the scaled characteristic function.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpectrum {
    pub domain: String,
    pub dim: usize,
    pub volume: f64,
    /// Sorted, repeated according to multiplicity.
    pub eigenvalues: Vec<f64>,
    /// Roots in eigenvalue order, one entry per distinct eigenvalue.
    pub roots: Vec<OracleRoot>,
}

impl OracleSpectrum {
    pub fn max_residual(&self) -> f64 {
        self.roots.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Bisection to machine precision on a bracket with a sign change.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::OracleRange(format!("no sign change on [{lo}, {hi}]")));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}

/// Volume of the unit ball in `ℝⁿ`, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // Γ(n/2 + 1) by the recursion Γ(z+1) = zΓ(z) from Γ(1) = 1 or Γ(1/2) = √π.
    let mut z = if n % 2 == 0 { 1.0 } else { 0.5 };
    let mut gamma = if n % 2 == 0 {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    let target = n as f64 / 2.0 + 1.0;
    while z < target - 0.25 {
        gamma *= z;
        z += 1.0;
    }
    std::f64::consts::PI.powf(n as f64 / 2.0) / gamma
}

/// `16π⁴ / (ω_n vol)^{4/n}`, the leading coefficient of `Γ_k ~ c k^{4/n}`.
pub fn ap_coefficient(n: usize, vol: f64) -> Result<f64> {
    if n == 0 || !(vol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need n ≥ 1 and vol > 0, got n = {n}, vol = {vol}"
        )));
    }
    let pi4 = std::f64::consts::PI.powi(4);
    Ok(16.0 * pi4 / (unit_ball_volume(n) * vol).powf(4.0 / n as f64))
}
