//! Scalar functionals of the normalized first eigenfunction, the constant
//! `C` of the gap inequality and the trial frequency `a`.

use serde::{Deserialize, Serialize};

use crate::eigensolver::Spectrum;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operator::DerivativeStencils;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionFunctionals {
    /// `‖∇u₁‖²`
    pub grad_norm_sq: f64,
    /// `∫(Δu₁)²`
    pub lap_sq: f64,
    /// `∫|∇Δu₁|²`
    pub grad_lap_sq: f64,
    /// `∫Σ_m (∂²u₁/∂x_m²)²`
    pub pure_second_sq: f64,
    pub gamma1: f64,
}

/// Discrete functionals of `u₁`.
///
/// `lap_sq` and `pure_second_sq` use the closure-weighted quadrature, under
/// which `∫(Δ_h u₁)² = u₁ᵀ Δ²_h u₁ = Γ₁` holds exactly. `grad_norm_sq` is the
/// summed-by-parts energy `−⟨u₁, Δ_h u₁⟩`, i.e. the sum of squared one-sided
/// differences over all lattice edges; with it `‖∇u₁‖² ≤ ‖Δ_h u₁‖ = √Γ₁`
/// holds exactly on the lattice. `grad_lap_sq` sums squared centered
/// differences of the closure Laplacian over interior nodes.
pub fn compute_functionals(
    spectrum: &Spectrum,
    grid: &Grid,
    stencils: &DerivativeStencils,
) -> Result<EigenfunctionFunctionals> {
    if spectrum.is_empty() {
        return Err(Error::InsufficientData("spectrum has no eigenpairs".into()));
    }
    let (gamma1, u) = spectrum.first();
    let nrm = grid.norm_sq(u)?;
    let owned;
    let u = if (nrm - 1.0).abs() > 1e-10 {
        log::warn!("first eigenvector has squared norm {nrm}; renormalizing");
        owned = u.iter().map(|x| x / nrm.sqrt()).collect::<Vec<_>>();
        &owned[..]
    } else {
        u
    };

    let second = stencils.apply_pure_second_derivatives(u)?;
    let pure_second_sq = second
        .iter()
        .map(|d| grid.closure_inner_product(d, d))
        .sum::<Result<f64>>()?;
    let lap = stencils.apply_laplacian(u)?;
    let lap_sq = grid.closure_inner_product(&lap, &lap)?;
    let grad_norm_sq = -grid.inner_product(u, &lap[..grid.node_count()])?;
    let grad_lap_sq = stencils
        .apply_closure_gradient(&lap)?
        .iter()
        .map(|d| grid.norm_sq(d))
        .sum::<Result<f64>>()?;

    Ok(EigenfunctionFunctionals {
        grad_norm_sq,
        lap_sq,
        grad_lap_sq,
        pure_second_sq,
        gamma1,
    })
}

/// `C = max{ 8∫|∇Δu₁|² / ((n+2)‖∇u₁‖²), (4(n+12)Γ₁ + 16∫Σ(∂²_m u₁)²)/n }`.
pub fn constant_c(f: &EigenfunctionFunctionals, n: usize) -> Result<f64> {
    if !(f.grad_norm_sq > 0.0) {
        return Err(Error::Invariant(format!(
            "‖∇u₁‖² = {} must be positive for an eigenfunction",
            f.grad_norm_sq
        )));
    }
    let nf = n as f64;
    let first = 8.0 * f.grad_lap_sq / ((nf + 2.0) * f.grad_norm_sq);
    let second = (4.0 * (nf + 12.0) * f.gamma1 + 16.0 * f.pure_second_sq) / nf;
    Ok(first.max(second))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalA {
    pub a_sq: f64,
    /// `a⁴ ≤ √(PQ)`
    pub bounded: bool,
    /// Relative residual of `a²(a² + c) = √(PQ)`.
    pub residual: f64,
}

/// Nonnegative root of `a²(a² + 2(n+2)‖∇u₁‖²/n) = √(PQ)`.
pub fn optimal_a(p: f64, q: f64, grad_norm_sq: f64, n: usize) -> Result<OptimalA> {
    if p < 0.0 || q < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue gaps must be nonnegative, got P = {p}, Q = {q}"
        )));
    }
    let nf = n as f64;
    let c = 2.0 * (nf + 2.0) * grad_norm_sq / nf;
    let target = (p * q).sqrt();
    let disc = (c * c + 4.0 * target).sqrt();
    // Rationalized form avoids cancellation when c² ≫ √(PQ).
    let a_sq = if c > 0.0 {
        2.0 * target / (c + disc)
    } else {
        0.5 * disc
    };
    let lhs = a_sq * (a_sq + c);
    let residual = if target > 0.0 {
        (lhs - target).abs() / target
    } else {
        lhs.abs()
    };
    Ok(OptimalA {
        a_sq,
        bounded: a_sq * a_sq <= target * (1.0 + 1e-12),
        residual,
    })
}
