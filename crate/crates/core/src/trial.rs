//! Trial functions `g·u₁`, the commutator field
//! `p = Δ²g·u₁ + 2∇Δg·∇u₁ + 2Δg·Δu₁ + 2Δ(∇g·∇u₁) + 2∇g·∇Δu₁`,
//! and the integral identities and inequalities built from them.

use serde::{Deserialize, Serialize};

use crate::eigensolver::Spectrum;
use crate::error::{check_len, Error, Result};
use crate::grid::Grid;
use crate::operator::DerivativeStencils;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `Σ c_i tⁱ`
    Polynomial(Vec<f64>),
    Cos(f64),
    Sin(f64),
}

/// `g(x) = φ(x_axis)` for a one-dimensional profile `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub profile: Profile,
    pub axis: usize,
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        Self {
            profile: Profile::Polynomial(vec![c]),
            axis: 0,
        }
    }

    pub fn linear(axis: usize) -> Self {
        Self {
            profile: Profile::Polynomial(vec![0.0, 1.0]),
            axis,
        }
    }

    pub fn cos(a: f64, axis: usize) -> Self {
        Self {
            profile: Profile::Cos(a),
            axis,
        }
    }

    pub fn sin(a: f64, axis: usize) -> Self {
        Self {
            profile: Profile::Sin(a),
            axis,
        }
    }

    /// `t²(1 − t)²`
    pub fn quartic(axis: usize) -> Self {
        Self {
            profile: Profile::Polynomial(vec![0.0, 0.0, 1.0, -2.0, 1.0]),
            axis,
        }
    }

    pub fn label(&self) -> String {
        let x = format!("x{}", self.axis);
        match &self.profile {
            Profile::Cos(a) => format!("cos({a}*{x})"),
            Profile::Sin(a) => format!("sin({a}*{x})"),
            Profile::Polynomial(c) if c.len() == 1 => format!("{}", c[0]),
            Profile::Polynomial(c) if *c == [0.0, 0.0, 1.0, -2.0, 1.0] => format!("{x}^2*(1-{x})^2"),
            Profile::Polynomial(c) => {
                let terms: Vec<String> = c
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, v)| format!("{v}*{x}^{i}"))
                    .collect();
                if terms.is_empty() {
                    "0".into()
                } else {
                    terms.join("+")
                }
            }
        }
    }

    /// `[φ, φ', φ'', φ''', φ'''']` at `t`.
    pub fn derivatives(&self, t: f64) -> [f64; 5] {
        match &self.profile {
            Profile::Cos(a) => {
                let (s, c) = (a * t).sin_cos();
                [c, -a * s, -a * a * c, a.powi(3) * s, a.powi(4) * c]
            }
            Profile::Sin(a) => {
                let (s, c) = (a * t).sin_cos();
                [s, a * c, -a * a * s, -a.powi(3) * c, a.powi(4) * s]
            }
            Profile::Polynomial(coef) => {
                let mut out = [0.0; 5];
                let mut c: Vec<f64> = coef.clone();
                for o in out.iter_mut() {
                    *o = c.iter().rev().fold(0.0, |acc, v| acc * t + v);
                    c = c.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect();
                }
                out
            }
        }
    }

    fn value(&self, t: f64) -> f64 {
        self.derivatives(t)[0]
    }

    /// Centered-difference approximations of the same five quantities.
    pub fn discrete_derivatives(&self, t: f64, h: f64) -> [f64; 5] {
        let f = |s: f64| self.value(t + s * h);
        let (m2, m1, c, p1, p2) = (f(-2.0), f(-1.0), f(0.0), f(1.0), f(2.0));
        [
            c,
            (p1 - m1) / (2.0 * h),
            (p1 - 2.0 * c + m1) / (h * h),
            (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h.powi(3)),
            (p2 - 4.0 * p1 + 6.0 * c - 4.0 * m1 + m2) / h.powi(4),
        ]
    }

    /// `φ` and its derivatives at every interior node.
    pub fn node_derivatives(&self, grid: &Grid, rule: GDerivatives) -> Result<Vec<[f64; 5]>> {
        if self.axis >= grid.dim() {
            return Err(Error::InvalidArgument(format!(
                "axis {} out of range for dimension {}",
                self.axis,
                grid.dim()
            )));
        }
        let h = grid.spacing();
        Ok(grid
            .node_coordinates()
            .iter()
            .map(|x| match rule {
                GDerivatives::Analytic => self.derivatives(x[self.axis]),
                GDerivatives::Discrete => self.discrete_derivatives(x[self.axis], h),
            })
            .collect())
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        grid.sample(|x| self.value(x[self.axis]))
    }
}

/// How derivatives of `g` enter `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GDerivatives {
    Analytic,
    Discrete,
}

/// How `Δ(∇g·∇u₁)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductLaplacian {
    /// Discrete Laplacian of the product field `φ'·D_m u₁`.
    Stencil,
    /// Product rule `φ'''D_m u₁ + 2φ''D²_m u₁ + φ'Δ_h(D_m u₁)`.
    Expanded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct POptions {
    pub g: GDerivatives,
    pub product: ProductLaplacian,
}

impl Default for POptions {
    fn default() -> Self {
        Self {
            g: GDerivatives::Analytic,
            product: ProductLaplacian::Stencil,
        }
    }
}

/// Discrete derivatives of `u₁` at interior nodes, computed once.
#[derive(Debug, Clone)]
pub struct U1Fields {
    pub u: Vec<f64>,
    /// `D_m u` per axis.
    pub grad: Vec<Vec<f64>>,
    /// `D²_m u` per axis.
    pub second: Vec<Vec<f64>>,
    pub lap: Vec<f64>,
    /// `D_m(Δ_h u)` per axis.
    pub grad_lap: Vec<Vec<f64>>,
    /// `Δ_h(D_m u)` per axis.
    pub lap_grad: Vec<Vec<f64>>,
}

impl U1Fields {
    pub fn new(u1: &[f64], stencils: &DerivativeStencils) -> Result<Self> {
        let grad = stencils.apply_gradient(u1)?;
        let nodes = u1.len();
        let second = stencils
            .apply_pure_second_derivatives(u1)?
            .into_iter()
            .map(|mut v| {
                v.truncate(nodes);
                v
            })
            .collect();
        let mut lap = stencils.apply_laplacian(u1)?;
        lap.truncate(nodes);
        let grad_lap = stencils.apply_grad_laplacian(u1)?;
        let lap_grad = grad
            .iter()
            .map(|d| stencils.apply_dirichlet_laplacian(d))
            .collect::<Result<_>>()?;
        Ok(Self {
            u: u1.to_vec(),
            grad,
            second,
            lap,
            grad_lap,
            lap_grad,
        })
    }

    pub fn from_spectrum(spectrum: &Spectrum, stencils: &DerivativeStencils) -> Result<Self> {
        if spectrum.is_empty() {
            return Err(Error::InsufficientData("spectrum has no eigenpairs".into()));
        }
        Self::new(&spectrum.eigenvectors[0], stencils)
    }
}

/// `p` at interior nodes.
pub fn build_p(
    g: &TestFunction,
    fields: &U1Fields,
    grid: &Grid,
    stencils: &DerivativeStencils,
    opts: POptions,
) -> Result<Vec<f64>> {
    check_len(grid.node_count(), fields.u.len())?;
    let d = g.node_derivatives(grid, opts.g)?;
    let m = g.axis;
    let du = &fields.grad[m];
    let product_lap: Vec<f64> = match opts.product {
        ProductLaplacian::Stencil => {
            let w: Vec<f64> = d.iter().zip(du).map(|(phi, v)| phi[1] * v).collect();
            stencils.apply_dirichlet_laplacian(&w)?
        }
        ProductLaplacian::Expanded => (0..grid.node_count())
            .map(|p| d[p][3] * du[p] + 2.0 * d[p][2] * fields.second[m][p] + d[p][1] * fields.lap_grad[m][p])
            .collect(),
    };
    Ok((0..grid.node_count())
        .map(|p| {
            let [_, g1, g2, g3, g4] = d[p];
            g4 * fields.u[p]
                + 2.0 * g3 * du[p]
                + 2.0 * g2 * fields.lap[p]
                + 2.0 * product_lap[p]
                + 2.0 * g1 * fields.grad_lap[m][p]
        })
        .collect())
}

/// Both sides of an integral identity and their relative gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityGap {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

impl IdentityGap {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let gap = if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs).abs() / scale
        };
        Self { lhs, rhs, gap }
    }
}

/// Expansion data of `g·u₁` and `p` in the computed eigenbasis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialExpansion {
    pub label: String,
    /// `g·u₁` at interior nodes.
    pub gu: Vec<f64>,
    pub p: Vec<f64>,
    /// `r_j = ⟨g u₁, u_j⟩`
    pub r: Vec<f64>,
    /// `s_j = ⟨p, u_j⟩`
    pub s: Vec<f64>,
    /// `‖g u₁‖²`
    pub gu_norm_sq: f64,
    /// `‖p‖²`
    pub p_norm_sq: f64,
    /// `∫ g u₁ p`
    pub gu_p: f64,
}

impl TrialExpansion {
    /// `(‖g u₁‖² − Σ_{j≤K} r_j²) / ‖g u₁‖²`
    pub fn relative_tail_mass(&self) -> f64 {
        if self.gu_norm_sq == 0.0 {
            return 0.0;
        }
        let kept: f64 = self.r.iter().map(|v| v * v).sum();
        ((self.gu_norm_sq - kept) / self.gu_norm_sq).max(0.0)
    }
}

pub fn expand(
    spectrum: &Spectrum,
    g: &TestFunction,
    fields: &U1Fields,
    grid: &Grid,
    stencils: &DerivativeStencils,
    opts: POptions,
) -> Result<TrialExpansion> {
    let p = build_p(g, fields, grid, stencils, opts)?;
    let gu: Vec<f64> = g.sample(grid).iter().zip(&fields.u).map(|(a, b)| a * b).collect();
    let r = spectrum
        .eigenvectors
        .iter()
        .map(|uj| grid.inner_product(&gu, uj))
        .collect::<Result<Vec<_>>>()?;
    let s = spectrum
        .eigenvectors
        .iter()
        .map(|uj| grid.inner_product(&p, uj))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialExpansion {
        label: g.label(),
        gu_norm_sq: grid.norm_sq(&gu)?,
        p_norm_sq: grid.norm_sq(&p)?,
        gu_p: grid.inner_product(&gu, &p)?,
        gu,
        p,
        r,
        s,
    })
}

/// `|s_j − (Γ_j − Γ₁) r_j| / (1 + |(Γ_j − Γ₁) r_j|)` for each computed pair.
pub fn verify_sj_identity(spectrum: &Spectrum, expansion: &TrialExpansion) -> Vec<f64> {
    let g1 = spectrum.eigenvalues[0];
    spectrum
        .eigenvalues
        .iter()
        .zip(&expansion.r)
        .zip(&expansion.s)
        .map(|((gj, r), s)| {
            let expected = (gj - g1) * r;
            (s - expected).abs() / (1.0 + expected.abs())
        })
        .collect()
}

/// `φ = g u₁ − Σ_{j≤k} r_j u_j`.
pub fn phi(spectrum: &Spectrum, expansion: &TrialExpansion, k: usize) -> Result<Vec<f64>> {
    if k > spectrum.len() {
        return Err(Error::TooManyEigenpairs {
            requested: k,
            available: spectrum.len(),
        });
    }
    let mut out = expansion.gu.clone();
    for j in 0..k {
        let r = expansion.r[j];
        for (o, u) in out.iter_mut().zip(&spectrum.eigenvectors[j]) {
            *o -= r * u;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiOrthogonality {
    /// `max_{j≤k} |⟨u_j, φ⟩|`
    pub max_inner: f64,
    pub phi_norm_sq: f64,
    /// `‖g u₁‖² − Σ_{j≤k} r_j²`
    pub truncated_parseval: f64,
}

pub fn phi_orthogonality(
    spectrum: &Spectrum,
    expansion: &TrialExpansion,
    k: usize,
    grid: &Grid,
) -> Result<PhiOrthogonality> {
    let f = phi(spectrum, expansion, k)?;
    let mut max_inner: f64 = 0.0;
    for uj in spectrum.eigenvectors.iter().take(k) {
        max_inner = max_inner.max(grid.inner_product(uj, &f)?.abs());
    }
    Ok(PhiOrthogonality {
        max_inner,
        phi_norm_sq: grid.norm_sq(&f)?,
        truncated_parseval: expansion.gu_norm_sq - expansion.r.iter().take(k).map(|v| v * v).sum::<f64>(),
    })
}

/// `∫ g u₁ p = ∫{(Δg)²u₁² + 4(∇g·∇u₁)² − 2|∇g|²u₁Δu₁ + 4u₁Δg ∇g·∇u₁}`.
pub fn lemma22_check(
    g: &TestFunction,
    fields: &U1Fields,
    grid: &Grid,
    stencils: &DerivativeStencils,
    opts: POptions,
) -> Result<IdentityGap> {
    let p = build_p(g, fields, grid, stencils, opts)?;
    let d = g.node_derivatives(grid, opts.g)?;
    let du = &fields.grad[g.axis];
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..grid.node_count() {
        let [g0, g1, g2, _, _] = d[i];
        let u = fields.u[i];
        let gdu = g1 * du[i];
        lhs += g0 * u * p[i];
        rhs += g2 * g2 * u * u + 4.0 * gdu * gdu - 2.0 * g1 * g1 * u * fields.lap[i] + 4.0 * u * g2 * gdu;
    }
    let cell = grid.cell_volume();
    Ok(IdentityGap::new(cell * lhs, cell * rhs))
}

/// `g₁ = cos(a x_m)`, `g₂ = sin(a x_m)` with their `p` fields and the two
/// bracket terms of the closed form (`f = x_m`, `b = Δf = 0`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairTrialData {
    pub a: f64,
    pub axis: usize,
    pub b: f64,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    /// `a⁴u₁ − 2a²Δu₁ − 4a²∂²_m u₁`
    pub t1: Vec<f64>,
    /// `4a³∂_m u₁ − 2aΔ(∂_m u₁) − 2a∂_m Δu₁`
    pub t2: Vec<f64>,
    pub u: Vec<f64>,
    /// `∂_m u₁`
    pub du: Vec<f64>,
}

pub fn build_pair(
    a: f64,
    axis: usize,
    fields: &U1Fields,
    grid: &Grid,
    stencils: &DerivativeStencils,
    opts: POptions,
) -> Result<PairTrialData> {
    if a < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "wavenumber must be nonnegative, got {a}"
        )));
    }
    let c = TestFunction::cos(a, axis);
    let s = TestFunction::sin(a, axis);
    let p1 = build_p(&c, fields, grid, stencils, opts)?;
    let p2 = build_p(&s, fields, grid, stencils, opts)?;
    let (a2, a3, a4) = (a * a, a.powi(3), a.powi(4));
    let t1 = (0..grid.node_count())
        .map(|i| a4 * fields.u[i] - 2.0 * a2 * fields.lap[i] - 4.0 * a2 * fields.second[axis][i])
        .collect();
    let t2 = (0..grid.node_count())
        .map(|i| {
            4.0 * a3 * fields.grad[axis][i]
                - 2.0 * a * fields.lap_grad[axis][i]
                - 2.0 * a * fields.grad_lap[axis][i]
        })
        .collect();
    Ok(PairTrialData {
        a,
        axis,
        b: 0.0,
        g1: c.sample(grid),
        g2: s.sample(grid),
        p1,
        p2,
        t1,
        t2,
        u: fields.u.clone(),
        du: fields.grad[axis].clone(),
    })
}

/// `∫(|p₁|² + |p₂|²)` against `∫(T₁² + T₂²)`.
pub fn prop21_check(pair: &PairTrialData, grid: &Grid) -> Result<IdentityGap> {
    let lhs = grid.norm_sq(&pair.p1)? + grid.norm_sq(&pair.p2)?;
    let rhs = grid.norm_sq(&pair.t1)? + grid.norm_sq(&pair.t2)?;
    Ok(IdentityGap::new(lhs, rhs))
}

/// `max_x |p₁² + p₂² − T₁² − T₂²| / max_x (T₁² + T₂²)`.
pub fn prop21_pointwise(pair: &PairTrialData) -> f64 {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..pair.u.len() {
        let l = pair.p1[i].powi(2) + pair.p2[i].powi(2);
        let r = pair.t1[i].powi(2) + pair.t2[i].powi(2);
        worst = worst.max((l - r).abs());
        scale = scale.max(r);
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

/// `∫g₁u₁p₁ + ∫g₂u₁p₂` against `∫{a⁴u₁² + 4a²(∂_m u₁)² − 2a²u₁Δu₁}`,
/// which with `∫u₁² = 1` and `−∫u₁Δu₁ = ‖∇u₁‖²` is `a⁴ + 2a²∫(2(∂_m u₁)² + |∇u₁|²)`.
pub fn prop22_check(pair: &PairTrialData, fields: &U1Fields, grid: &Grid) -> Result<IdentityGap> {
    let g1u: Vec<f64> = pair.g1.iter().zip(&pair.u).map(|(g, u)| g * u).collect();
    let g2u: Vec<f64> = pair.g2.iter().zip(&pair.u).map(|(g, u)| g * u).collect();
    let lhs = grid.inner_product(&g1u, &pair.p1)? + grid.inner_product(&g2u, &pair.p2)?;
    let grad_sq = -grid.inner_product(&pair.u, &fields.lap)?;
    let a2 = pair.a * pair.a;
    let rhs = a2 * a2 * grid.norm_sq(&pair.u)? + 2.0 * a2 * (2.0 * grid.norm_sq(&pair.du)? + grad_sq);
    Ok(IdentityGap::new(lhs, rhs))
}

/// Two sides of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`
    pub margin: f64,
}

impl Margin {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            margin: rhs - lhs,
        }
    }

    pub fn scale(&self) -> f64 {
        self.lhs.abs().max(self.rhs.abs())
    }
}

fn gaps(eigenvalues: &[f64], k: usize) -> Result<(f64, f64)> {
    if k + 2 > eigenvalues.len() {
        return Err(Error::TooManyEigenpairs {
            requested: k + 2,
            available: eigenvalues.len(),
        });
    }
    let g1 = eigenvalues[0];
    Ok((eigenvalues[k] - g1, eigenvalues[k + 1] - g1))
}

/// `(P + Q)∫g u₁ p ≤ ‖p‖² + PQ‖g u₁‖²` with `P = Γ_{k+1} − Γ₁`,
/// `Q = Γ_{k+2} − Γ₁` taken from `eigenvalues`.
pub fn theorem21_check(eigenvalues: &[f64], expansion: &TrialExpansion, k: usize) -> Result<Margin> {
    let (p, q) = gaps(eigenvalues, k)?;
    Ok(Margin::new(
        (p + q) * expansion.gu_p,
        expansion.p_norm_sq + p * q * expansion.gu_norm_sq,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaApplication {
    /// `(P+Q) Σ_{j=k+1}^{K} μ_j r_j²` against the right side.
    pub truncated: Margin,
    /// `(P+Q) ⟨φ, p⟩` against the right side.
    pub full: Margin,
    pub relative_tail_mass: f64,
    /// Tail mass above 1%.
    pub inconclusive: bool,
    /// `theorem margin − full margin − Σ_{j≤k}(μ_j² r_j² + PQ r_j² − (P+Q) r_j s_j)`.
    pub consistency_residual: f64,
}

/// `(P+Q) Σ_{j>k} μ_j r_j² ≤ (‖p‖² − Σ_{j≤k} μ_j² r_j²) + PQ‖φ‖²` with `μ_j = Γ_j − Γ₁`.
pub fn lemma21_gap_inequality_check(
    spectrum: &Spectrum,
    expansion: &TrialExpansion,
    k: usize,
) -> Result<LemmaApplication> {
    let ev = &spectrum.eigenvalues;
    let (p, q) = gaps(ev, k)?;
    let g1 = ev[0];
    let mu = |j: usize| ev[j] - g1;
    let r = &expansion.r;
    let s = &expansion.s;

    let head_r2: f64 = (0..k).map(|j| r[j] * r[j]).sum();
    let head_mu2r2: f64 = (0..k).map(|j| mu(j).powi(2) * r[j] * r[j]).sum();
    let head_rs: f64 = (0..k).map(|j| r[j] * s[j]).sum();
    let phi_norm_sq = expansion.gu_norm_sq - head_r2;
    let rhs = (expansion.p_norm_sq - head_mu2r2) + p * q * phi_norm_sq;

    let tail_sum: f64 = (k..ev.len()).map(|j| mu(j) * r[j] * r[j]).sum();
    let phi_p = expansion.gu_p - head_rs;
    let truncated = Margin::new((p + q) * tail_sum, rhs);
    let full = Margin::new((p + q) * phi_p, rhs);

    let theorem = theorem21_check(ev, expansion, k)?;
    let head: f64 = head_mu2r2 + p * q * head_r2 - (p + q) * head_rs;
    let consistency_residual = theorem.margin - full.margin - head;
    let tail = expansion.relative_tail_mass();
    Ok(LemmaApplication {
        truncated,
        full,
        relative_tail_mass: tail,
        inconclusive: tail > 1e-2,
        consistency_residual,
    })
}
