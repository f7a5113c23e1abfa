//! Bound on `Σ μ_j a_j²` given `Σ μ_j² a_j²` and `Σ a_j²`, and the exact
//! finite maximum it dominates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nondecreasing `μ ≥ 0` with weights `a² ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceInstance {
    pub mu: Vec<f64>,
    pub weights: Vec<f64>,
    /// `Σ μ² a²`
    pub a: f64,
    /// `Σ a²`
    pub b: f64,
    /// `Σ μ a²`
    pub s: f64,
}

impl SequenceInstance {
    pub fn new(mu: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if mu.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: mu.len(),
                got: weights.len(),
            });
        }
        if mu.iter().any(|m| *m < 0.0) || mu.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument(
                "μ must be nonnegative and nondecreasing".into(),
            ));
        }
        if weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be nonnegative".into()));
        }
        let a = mu.iter().zip(&weights).map(|(m, w)| m * m * w).sum();
        let b = weights.iter().sum();
        let s = mu.iter().zip(&weights).map(|(m, w)| m * w).sum();
        Ok(Self { mu, weights, a, b, s })
    }

    /// `lemma_bound(μ₁, μ₂, A, B)` for this instance.
    pub fn bound(&self) -> Result<f64> {
        if self.mu.len() < 2 {
            return Err(Error::InsufficientData("the bound needs two μ values".into()));
        }
        lemma_bound(self.mu[0], self.mu[1], self.a, self.b)
    }
}

/// `(A + μ₁μ₂B) / (μ₁ + μ₂)` with `μ₁ ≤ μ₂` the two smallest values.
pub fn lemma_bound(mu1: f64, mu2: f64, a: f64, b: f64) -> Result<f64> {
    if !(mu1 + mu2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "μ₁ + μ₂ = {} must be positive",
            mu1 + mu2
        )));
    }
    if a < 0.0 || b < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "A = {a}, B = {b} must be nonnegative"
        )));
    }
    Ok((a + mu1 * mu2 * b) / (mu1 + mu2))
}

/// Maximizer of `Σ μ_j w_j` subject to `Σ μ_j² w_j = A`, `Σ w_j = B`, `w ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceMax {
    pub s_max: f64,
    /// Indices carrying weight (one or two).
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Exact maximum over a finite `μ` list by enumerating the vertices of the
/// feasible polytope: every pair `μ_r < μ_s` and every single point with
/// `A = μ_r² B`.
pub fn brute_force_max(mu: &[f64], a: f64, b: f64) -> Result<BruteForceMax> {
    if mu.is_empty() {
        return Err(Error::InsufficientData("empty μ list".into()));
    }
    let lo = mu.iter().map(|m| m * m).fold(f64::INFINITY, f64::min) * b;
    let hi = mu.iter().map(|m| m * m).fold(0.0, f64::max) * b;
    let slack = 1e-12 * hi.max(a).max(1.0);
    if a < lo - slack {
        return Err(Error::Infeasible(format!("A = {a} below min μ²·B = {lo}")));
    }
    if a > hi + slack {
        return Err(Error::Infeasible(format!("A = {a} above max μ²·B = {hi}")));
    }
    let mut best: Option<BruteForceMax> = None;
    let mut consider = |cand: BruteForceMax| {
        if best.as_ref().is_none_or(|b| cand.s_max > b.s_max) {
            best = Some(cand);
        }
    };
    for (r, &mr) in mu.iter().enumerate() {
        if (a - mr * mr * b).abs() <= slack {
            consider(BruteForceMax {
                s_max: mr * b,
                support: vec![r],
                weights: vec![b],
            });
        }
        for (s, &ms) in mu.iter().enumerate().skip(r + 1) {
            if ms <= mr {
                continue;
            }
            let d = ms * ms - mr * mr;
            let wr = (ms * ms * b - a) / d;
            let ws = (a - mr * mr * b) / d;
            let tol = 1e-12 * b.max(1.0);
            if wr >= -tol && ws >= -tol {
                // `wr = B − ws` keeps the value well conditioned when μ_r ≈ μ_s.
                let ws = ws.clamp(0.0, b);
                let wr = b - ws;
                consider(BruteForceMax {
                    s_max: mr * b + (ms - mr) * ws,
                    support: vec![r, s],
                    weights: vec![wr, ws],
                });
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible("no feasible vertex".into()))
}

/// Seeded random instance with at least two entries; `spread = 0` gives a
/// constant sequence.
pub fn random_instance(seed: u64, length: usize, spread: f64) -> SequenceInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let length = length.max(2);
    let base: f64 = rng.gen_range(0.0..10.0);
    let mut mu: Vec<f64> = (0..length)
        .map(|_| base + spread * rng.gen_range(0.0..1.0))
        .collect();
    mu.sort_by(f64::total_cmp);
    let weights: Vec<f64> = (0..length).map(|_| rng.gen_range(0.0..1.0)).collect();
    SequenceInstance::new(mu, weights).expect("generated instance is valid")
}
