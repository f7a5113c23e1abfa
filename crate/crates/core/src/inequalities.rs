//! Margin reports for the universal eigenvalue inequalities, the
//! Agmon–Pleijel asymptotics and the growth order of the gap bound.
//!
//! Every inequality is written `lhs ≤ rhs` and reported with
//! `margin = rhs − lhs`. The inconclusive band `ε` is relative: a record is a
//! violation only when `margin < −ε·max(|lhs|, |rhs|)`.

use serde::{Deserialize, Serialize};

use crate::eigensolver::MULTIPLET_TOLERANCE;
use crate::error::{Error, Result};
use crate::functionals::{constant_c, EigenfunctionFunctionals};
use crate::oracles::ap_coefficient;
use crate::richardson::{log_log_fit, relative_error_estimate, LinearFit};

/// Band for spectra known to root-finding accuracy.
pub const ORACLE_BAND: f64 = 1e-12;

/// Safety factor applied to the estimated eigenvalue error.
pub const BAND_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumSource {
    Computed,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Inconclusive,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub relative_margin: f64,
}

impl InequalityRecord {
    pub fn new(k: usize, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        let scale = lhs.abs().max(rhs.abs());
        Self {
            k,
            lhs,
            rhs,
            margin,
            relative_margin: if scale > 0.0 { margin / scale } else { 0.0 },
        }
    }

    pub fn verdict(&self, epsilon: f64) -> Verdict {
        if self.margin >= 0.0 {
            Verdict::Holds
        } else if self.relative_margin >= -epsilon {
            Verdict::Inconclusive
        } else {
            Verdict::Violated
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub k: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub source: SpectrumSource,
    /// False for statements that are conjectured rather than proven.
    pub asserted: bool,
    pub epsilon: f64,
    pub records: Vec<InequalityRecord>,
    pub skipped: Vec<Skipped>,
    pub verdict: Verdict,
}

impl InequalityReport {
    pub fn new(
        id: &str,
        source: SpectrumSource,
        asserted: bool,
        epsilon: f64,
        mut records: Vec<InequalityRecord>,
        skipped: Vec<Skipped>,
    ) -> Self {
        records.sort_by_key(|r| r.k);
        let mut report = Self {
            id: id.to_string(),
            source,
            asserted,
            epsilon,
            records,
            skipped,
            verdict: Verdict::Holds,
        };
        report.verdict = report.recompute_verdict();
        report
    }

    /// Worst per-record verdict.
    pub fn recompute_verdict(&self) -> Verdict {
        self.records
            .iter()
            .map(|r| r.verdict(self.epsilon))
            .max()
            .unwrap_or(Verdict::Holds)
    }

    pub fn min_margin(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_relative_margin(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.relative_margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn record(&self, k: usize) -> Option<&InequalityRecord> {
        self.records.iter().find(|r| r.k == k)
    }
}

/// `ε = 5 × max_{i < count} |Γ_i(h) − Γ_i*| / Γ_i(h)`, with `Γ*` extrapolated
/// from a coarse and a fine grid.
pub fn epsilon_band(coarse: &[f64], fine: &[f64], ratio: f64, order: f64, count: usize) -> Result<f64> {
    if coarse.len() < count || fine.len() < count {
        return Err(Error::InsufficientData(format!(
            "band needs {count} eigenvalues on both grids, got {} and {}",
            coarse.len(),
            fine.len()
        )));
    }
    let worst = coarse[..count]
        .iter()
        .zip(&fine[..count])
        .map(|(c, f)| relative_error_estimate(*c, *f, ratio, order))
        .fold(0.0, f64::max);
    Ok(BAND_FACTOR * worst)
}

fn require(eigenvalues: &[f64], needed: usize, what: &str) -> Result<()> {
    if eigenvalues.len() < needed {
        return Err(Error::InsufficientData(format!(
            "{what} needs {needed} eigenvalues, got {}",
            eigenvalues.len()
        )));
    }
    Ok(())
}

/// Both sides of
/// `(√(Γ_{k+1}−Γ₁) − √(Γ_k−Γ₁))² ≤ (16√Γ₁/n)·((Γ_{k+1}−Γ₁)(Γ_k−Γ₁))^{1/4} + C`.
pub fn sqrt_gap_sides(eigenvalues: &[f64], c: f64, n: usize, k: usize) -> (f64, f64) {
    let g1 = eigenvalues[0];
    let hi = (eigenvalues[k] - g1).max(0.0);
    let lo = (eigenvalues[k - 1] - g1).max(0.0);
    let lhs = (hi.sqrt() - lo.sqrt()).powi(2);
    (lhs, growth_term(g1, hi, lo, n) + c)
}

fn growth_term(g1: f64, hi: f64, lo: f64, n: usize) -> f64 {
    16.0 * g1.sqrt() / n as f64 * (hi * lo).powf(0.25)
}

/// Gap bound for `k = 1..=k_max` with `C` from the first-mode functionals.
pub fn theorem11_report(
    eigenvalues: &[f64],
    functionals: &EigenfunctionFunctionals,
    n: usize,
    k_max: usize,
    source: SpectrumSource,
    epsilon: f64,
) -> Result<InequalityReport> {
    require(eigenvalues, k_max + 1, "the gap bound")?;
    let c = constant_c(functionals, n)?;
    let records = (1..=k_max)
        .map(|k| {
            let (lhs, rhs) = sqrt_gap_sides(eigenvalues, c, n, k);
            InequalityRecord::new(k, lhs, rhs)
        })
        .collect();
    Ok(InequalityReport::new(
        "sqrt_gap_bound",
        source,
        true,
        epsilon,
        records,
        vec![],
    ))
}

/// `Σ_{i≤k} (Γ_{k+1} − Γ_i)²` and `Σ_{i≤k} (Γ_{k+1} − Γ_i)Γ_i`.
fn quadratic_sums(eigenvalues: &[f64], k: usize) -> (f64, f64) {
    let next = eigenvalues[k];
    eigenvalues[..k].iter().fold((0.0, 0.0), |(sq, lin), g| {
        let d = next - g;
        (sq + d * d, lin + d * g)
    })
}

/// The classical universal inequalities, in order:
///
/// * `Γ_{k+1} − Γ_k ≤ (8(n+2)/(n²k)) Σ Γ_i`
/// * `n²k²/(8(n+2)) ≤ Σ Γ_i^{1/2}/(Γ_{k+1} − Γ_i) · Σ Γ_i^{1/2}`
/// * `Σ (Γ_{k+1} − Γ_i)² ≤ (8(n+2)/n²) Σ (Γ_{k+1} − Γ_i)Γ_i`
/// * the same with `8/n`, which is conjectured and never asserted.
pub fn classical_suite(
    eigenvalues: &[f64],
    n: usize,
    k_max: usize,
    source: SpectrumSource,
    epsilon: f64,
) -> Result<Vec<InequalityReport>> {
    require(eigenvalues, k_max + 1, "the classical suite")?;
    let nf = n as f64;
    let (mut gap, mut harmonic, mut quad, mut conj) = (vec![], vec![], vec![], vec![]);
    let mut harmonic_skipped = vec![];
    for k in 1..=k_max {
        let kf = k as f64;
        let head = &eigenvalues[..k];
        let next = eigenvalues[k];
        let sum: f64 = head.iter().sum();
        gap.push(InequalityRecord::new(
            k,
            next - eigenvalues[k - 1],
            8.0 * (nf + 2.0) / (nf * nf * kf) * sum,
        ));

        if head.iter().any(|g| next - g <= MULTIPLET_TOLERANCE * next.abs()) {
            harmonic_skipped.push(Skipped {
                k,
                reason: "Γ_{k+1} coincides with an earlier eigenvalue; the stated form divides by zero"
                    .into(),
            });
        } else {
            let roots: f64 = head.iter().map(|g| g.sqrt()).sum();
            let weighted: f64 = head.iter().map(|g| g.sqrt() / (next - g)).sum();
            harmonic.push(InequalityRecord::new(
                k,
                nf * nf * kf * kf / (8.0 * (nf + 2.0)),
                weighted * roots,
            ));
        }

        let (sq, lin) = quadratic_sums(eigenvalues, k);
        quad.push(InequalityRecord::new(k, sq, 8.0 * (nf + 2.0) / (nf * nf) * lin));
        conj.push(InequalityRecord::new(k, sq, 8.0 / nf * lin));
    }
    Ok(vec![
        InequalityReport::new("consecutive_gap", source, true, epsilon, gap, vec![]),
        InequalityReport::new(
            "reciprocal_gap_sum",
            source,
            true,
            epsilon,
            harmonic,
            harmonic_skipped,
        ),
        InequalityReport::new("quadratic_gap_sum", source, true, epsilon, quad, vec![]),
        InequalityReport::new(
            "quadratic_gap_sum_conjectured",
            source,
            false,
            epsilon,
            conj,
            vec![],
        ),
    ])
}

/// `(n/(n+4))·c_AP·k^{4/n} ≤ (1/k) Σ_{j≤k} Γ_j`.
pub fn levine_protter_check(
    eigenvalues: &[f64],
    n: usize,
    vol: f64,
    k_max: usize,
    source: SpectrumSource,
    epsilon: f64,
) -> Result<InequalityReport> {
    require(eigenvalues, k_max, "the mean lower bound")?;
    let coef = ap_coefficient(n, vol)?;
    let nf = n as f64;
    let mut sum = 0.0;
    let records = (1..=k_max)
        .map(|k| {
            sum += eigenvalues[k - 1];
            let kf = k as f64;
            InequalityRecord::new(k, nf / (nf + 4.0) * coef * kf.powf(4.0 / nf), sum / kf)
        })
        .collect();
    Ok(InequalityReport::new(
        "mean_lower_bound",
        source,
        true,
        epsilon,
        records,
        vec![],
    ))
}

/// `‖∇u₁‖² ≤ √Γ₁`.
pub fn gradient_energy_check(
    functionals: &EigenfunctionFunctionals,
    source: SpectrumSource,
    epsilon: f64,
) -> InequalityReport {
    let record = InequalityRecord::new(1, functionals.grad_norm_sq, functionals.gamma1.sqrt());
    InequalityReport::new(
        "gradient_energy_bound",
        source,
        true,
        epsilon,
        vec![record],
        vec![],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRecord {
    pub k: usize,
    pub gamma: f64,
    /// `Γ_k / k^{4/n}`
    pub ratio: f64,
    /// `ratio / c_AP − 1`
    pub relative_distance: f64,
    /// `Γ_k^{1/4} / (k + 1/2)`, tending to `π` on the unit interval.
    pub quarter_root_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub coefficient: f64,
    pub records: Vec<AsymptoticRecord>,
    /// Slope of `ln Γ_k` against `ln k`, expected to approach `4/n`.
    pub growth: LinearFit,
}

/// `Γ_k / k^{4/n}` against `16π⁴/(ω_n vol)^{4/n}` for `k` in `k_lo..=k_hi`.
pub fn agmon_pleijel_fit(
    eigenvalues: &[f64],
    n: usize,
    vol: f64,
    k_lo: usize,
    k_hi: usize,
) -> Result<AsymptoticReport> {
    if k_lo == 0 || k_hi < k_lo {
        return Err(Error::InvalidArgument(format!("bad k range {k_lo}..={k_hi}")));
    }
    require(eigenvalues, k_hi, "the asymptotic fit")?;
    let coefficient = ap_coefficient(n, vol)?;
    let power = 4.0 / n as f64;
    let records: Vec<AsymptoticRecord> = (k_lo..=k_hi)
        .map(|k| {
            let gamma = eigenvalues[k - 1];
            let kf = k as f64;
            let ratio = gamma / kf.powf(power);
            AsymptoticRecord {
                k,
                gamma,
                ratio,
                relative_distance: ratio / coefficient - 1.0,
                quarter_root_ratio: (n == 1).then(|| gamma.powf(0.25) / (kf + 0.5)),
            }
        })
        .collect();
    let ks: Vec<f64> = records.iter().map(|r| r.k as f64).collect();
    let gs: Vec<f64> = records.iter().map(|r| r.gamma).collect();
    let growth = log_log_fit(&ks, &gs)?;
    Ok(AsymptoticReport {
        coefficient,
        records,
        growth,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderScan {
    /// Inclusive `k` window actually fitted.
    pub window: (usize, usize),
    /// Leading indices dropped because `C` dominated the bound there.
    pub excluded: Vec<usize>,
    /// Slope of the squared-gap bound against `k`.
    pub rhs_fit: LinearFit,
    pub predicted_rhs: f64,
    /// Slope of the bound with `C` removed, for context.
    pub growth_fit: LinearFit,
    /// Slope of `(√(Γ_{k+1}−Γ₁) + √(Γ_k−Γ₁))·rhs^{1/2}`, which bounds `Γ_{k+1} − Γ_k`.
    pub gap_fit: LinearFit,
    pub predicted_gap: f64,
}

/// Minimum number of points in an order regression.
pub const MIN_SCAN_POINTS: usize = 10;

/// First index of the default regression window.
pub const DEFAULT_SCAN_START: usize = 20;

/// Log–log slopes of the gap bound over `k_lo..=k_hi`. Indices where the
/// `k`-dependent term is still below `C` sit in the constant regime and are
/// left out of the fit.
pub fn remark11_order_scan(
    eigenvalues: &[f64],
    functionals: &EigenfunctionFunctionals,
    n: usize,
    k_lo: usize,
    k_hi: usize,
) -> Result<OrderScan> {
    if k_lo == 0 || k_hi < k_lo {
        return Err(Error::InvalidArgument(format!("bad k range {k_lo}..={k_hi}")));
    }
    require(eigenvalues, k_hi + 1, "the order scan")?;
    let c = constant_c(functionals, n)?;
    let g1 = eigenvalues[0];
    let mut excluded = vec![];
    let (mut ks, mut rhs, mut growth, mut gap) = (vec![], vec![], vec![], vec![]);
    for k in k_lo..=k_hi {
        let hi = (eigenvalues[k] - g1).max(0.0);
        let lo = (eigenvalues[k - 1] - g1).max(0.0);
        let term = growth_term(g1, hi, lo, n);
        if term < c {
            excluded.push(k);
            continue;
        }
        let bound = term + c;
        ks.push(k as f64);
        rhs.push(bound);
        growth.push(term);
        gap.push((hi.sqrt() + lo.sqrt()) * bound.sqrt());
    }
    if ks.len() < MIN_SCAN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} indices outside the constant regime, need {MIN_SCAN_POINTS}",
            ks.len()
        )));
    }
    let nf = n as f64;
    Ok(OrderScan {
        window: (ks[0] as usize, *ks.last().unwrap() as usize),
        excluded,
        rhs_fit: log_log_fit(&ks, &rhs)?,
        predicted_rhs: 2.0 / nf,
        growth_fit: log_log_fit(&ks, &growth)?,
        gap_fit: log_log_fit(&ks, &gap)?,
        predicted_gap: 3.0 / nf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn functionals(gamma1: f64) -> EigenfunctionFunctionals {
        EigenfunctionFunctionals {
            grad_norm_sq: 1.0,
            lap_sq: gamma1,
            grad_lap_sq: 0.0,
            pure_second_sq: gamma1,
            gamma1,
        }
    }

    #[test]
    fn record_verdicts_respect_the_band() {
        assert_eq!(InequalityRecord::new(1, 1.0, 2.0).verdict(0.0), Verdict::Holds);
        let r = InequalityRecord::new(1, 100.0, 99.99);
        assert_relative_eq!(r.relative_margin, -1e-4, max_relative = 1e-9);
        assert_eq!(r.verdict(1e-3), Verdict::Inconclusive);
        assert_eq!(r.verdict(1e-5), Verdict::Violated);
        assert_eq!(InequalityRecord::new(3, 0.0, 0.0).relative_margin, 0.0);
    }

    #[test]
    fn report_sorts_and_takes_worst_verdict() {
        let recs = vec![
            InequalityRecord::new(2, 1.0, 0.5),
            InequalityRecord::new(1, 1.0, 2.0),
        ];
        let r = InequalityReport::new("x", SpectrumSource::Oracle, true, 0.0, recs, vec![]);
        assert_eq!(r.records[0].k, 1);
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.verdict, r.recompute_verdict());
        assert_eq!(r.min_margin(), -0.5);
    }

    #[test]
    fn gap_bound_at_first_index_is_the_constant() {
        // One dimension, C = 68Γ₁ when the gradient term vanishes.
        let ev = [10.0, 30.0, 70.0];
        let r = theorem11_report(&ev, &functionals(10.0), 1, 2, SpectrumSource::Oracle, 0.0).unwrap();
        let first = r.record(1).unwrap();
        assert_relative_eq!(first.lhs, 20.0);
        assert_relative_eq!(first.rhs, 680.0);
        assert!(theorem11_report(&ev, &functionals(10.0), 1, 3, SpectrumSource::Oracle, 0.0).is_err());
    }

    #[test]
    fn equal_neighbours_give_zero_gap() {
        let ev = [1.0, 5.0, 5.0, 9.0];
        let (lhs, _) = sqrt_gap_sides(&ev, 0.0, 2, 2);
        assert_eq!(lhs, 0.0);
    }

    #[test]
    fn classical_suite_on_small_input() {
        let ev = [2.0, 6.0, 6.0];
        let reps = classical_suite(&ev, 1, 2, SpectrumSource::Computed, 0.0).unwrap();
        assert_eq!(reps.len(), 4);
        let gap = reps[0].record(1).unwrap();
        assert_relative_eq!(gap.lhs, 4.0);
        assert_relative_eq!(gap.rhs, 48.0);
        // k = 2 has Γ₃ = Γ₂ and is skipped in the reciprocal form.
        assert_eq!(reps[1].skipped.len(), 1);
        assert_eq!(reps[1].skipped[0].k, 2);
        assert!(!reps[3].asserted);
        let quad = reps[2].record(2).unwrap();
        assert_relative_eq!(quad.lhs, 16.0);
        assert_relative_eq!(quad.rhs, 24.0 * 8.0);
    }

    #[test]
    fn coincident_pair_makes_quadratic_sum_degenerate() {
        let reps = classical_suite(&[3.0, 3.0], 2, 1, SpectrumSource::Computed, 0.0).unwrap();
        let r = reps[2].record(1).unwrap();
        assert_eq!((r.lhs, r.rhs, r.margin), (0.0, 0.0, 0.0));
        assert_eq!(r.verdict(0.0), Verdict::Holds);
    }

    #[test]
    fn mean_bound_coefficients() {
        let r = levine_protter_check(&[500.0], 1, 1.0, 1, SpectrumSource::Oracle, 0.0).unwrap();
        assert_relative_eq!(
            r.records[0].lhs,
            std::f64::consts::PI.powi(4) / 5.0,
            max_relative = 1e-14
        );
        let r =
            levine_protter_check(&[104.0], 2, std::f64::consts::PI, 1, SpectrumSource::Oracle, 0.0).unwrap();
        assert_relative_eq!(r.records[0].lhs, 16.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn band_from_two_grids() {
        let exact = [1.0, 4.0];
        let coarse: Vec<f64> = exact.iter().map(|v| v * (1.0 - 0.04)).collect();
        let fine: Vec<f64> = exact.iter().map(|v| v * (1.0 - 0.01)).collect();
        let eps = epsilon_band(&coarse, &fine, 2.0, 2.0, 2).unwrap();
        assert_relative_eq!(eps, 5.0 * 0.01 / 0.99, max_relative = 1e-12);
        assert!(epsilon_band(&coarse, &fine, 2.0, 2.0, 3).is_err());
    }

    #[test]
    fn scan_recovers_power_law_slopes() {
        // Γ_k = k⁴ (n = 1) with a negligible constant.
        let ev: Vec<f64> = (1..=300).map(|k| (k as f64).powi(4)).collect();
        let mut f = functionals(1.0);
        f.pure_second_sq = 0.0;
        f.lap_sq = 0.0;
        let scan = remark11_order_scan(&ev, &f, 1, 50, 250).unwrap();
        assert!((scan.rhs_fit.slope - 2.0).abs() < 0.05, "{scan:?}");
        assert!((scan.gap_fit.slope - 3.0).abs() < 0.05, "{scan:?}");
        assert!(remark11_order_scan(&ev, &f, 1, 1, 5).is_err());
    }
}
