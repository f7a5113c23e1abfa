use std::f64::consts::PI;

use super::{bisect, OracleRoot, OracleSpectrum};
use crate::error::{Error, Result};

/// `cos β − 1/cosh β`, the clamped beam equation `cos β cosh β = 1` divided
/// by `cosh β` so it stays bounded.
pub fn beam_characteristic(beta: f64) -> f64 {
    let e = (-beta.abs()).exp();
    beta.cos() - 2.0 * e / (1.0 + e * e)
}

/// First `k` eigenvalues of the clamped beam on `[0, 1]`: `Γ_k = β_k⁴`.
///
/// The `k`-th positive root lies in `(kπ, (k+1)π)`, where the scaled
/// characteristic function changes sign exactly once.
pub fn beam_spectrum(k: usize) -> Result<OracleSpectrum> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one eigenvalue".into()));
    }
    let mut roots = Vec::with_capacity(k);
    for j in 1..=k {
        let lo = j as f64 * PI;
        let hi = (j + 1) as f64 * PI;
        let beta = bisect(beam_characteristic, lo, hi)?;
        roots.push(OracleRoot {
            order: 0,
            index: j,
            root: beta,
            multiplicity: 1,
            residual: beam_characteristic(beta).abs(),
        });
    }
    Ok(OracleSpectrum {
        domain: "beam".into(),
        dim: 1,
        volume: 1.0,
        eigenvalues: roots.iter().map(|r| r.root.powi(4)).collect(),
        roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_two_roots() {
        let s = beam_spectrum(2).unwrap();
        assert_relative_eq!(s.roots[0].root, 4.73004, epsilon = 1e-5);
        assert_relative_eq!(s.eigenvalues[0], 500.564, epsilon = 1e-3);
        assert_relative_eq!(s.roots[1].root, 7.85320, epsilon = 1e-5);
        assert_relative_eq!(s.eigenvalues[1], 3803.54, epsilon = 1e-2);
        assert!(s.max_residual() <= 1e-13);
    }

    #[test]
    fn roots_satisfy_unscaled_equation() {
        let s = beam_spectrum(6).unwrap();
        for r in &s.roots {
            let b = r.root;
            let rel = (b.cos() * b.cosh() - 1.0).abs() / b.cosh();
            assert!(rel < 1e-13);
        }
    }

    #[test]
    fn roots_approach_half_integer_multiples_of_pi() {
        let s = beam_spectrum(20).unwrap();
        let ratio: Vec<f64> = s
            .roots
            .iter()
            .map(|r| (r.root / ((r.index as f64 + 0.5) * PI) - 1.0).abs())
            .collect();
        assert!(ratio[..8].windows(2).all(|w| w[1] < w[0]));
        assert!(ratio[19] < 1e-6);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] < w[1]));
    }
}
