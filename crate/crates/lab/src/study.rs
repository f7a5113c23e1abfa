//! The solve → post-process → verify pipeline.

use std::time::Instant;

use plate_core::eigensolver::{multiplets, MULTIPLET_TOLERANCE};
use plate_core::functionals::{compute_functionals, constant_c, EigenfunctionFunctionals};
use plate_core::inequalities::{
    agmon_pleijel_fit, classical_suite, epsilon_band, gradient_energy_check, levine_protter_check,
    remark11_order_scan, theorem11_report, AsymptoticReport, InequalityReport, OrderScan, SpectrumSource,
    Verdict, DEFAULT_SCAN_START, ORACLE_BAND,
};
use plate_core::oracles::{beam_spectrum, disk_first_mode_functionals, disk_spectrum, OracleSpectrum};
use plate_core::richardson::observed_order;
use plate_core::sequence::{brute_force_max, lemma_bound, random_instance, SequenceInstance};
use plate_core::trial::{
    build_pair, expand, lemma21_gap_inequality_check, lemma22_check, prop21_check, prop21_pointwise,
    prop22_check, theorem21_check, verify_sj_identity, GDerivatives, Margin, POptions, ProductLaplacian,
    U1Fields,
};
use plate_core::{
    assemble_biharmonic, build_grid, solve, DerivativeStencils, Grid, ShiftInvertOptions, SolveMethod,
    SparseSymmetricMatrix, Spectrum,
};
use serde::{Deserialize, Serialize};

use crate::config::{DomainShape, StudyConfig};
use crate::error::{stage, LabError};

/// Bumped whenever a report field or table column changes.
pub const SCHEMA_VERSION: u32 = 1;

/// One refinement level with everything later stages need.
pub struct Level {
    pub divisions: Vec<usize>,
    pub grid: Grid,
    pub matrix: SparseSymmetricMatrix,
    pub stencils: DerivativeStencils,
    pub spectrum: Spectrum,
    pub fields: U1Fields,
    pub functionals: EigenfunctionFunctionals,
    pub constant_c: f64,
    pub solve_seconds: f64,
}

pub fn solve_level(cfg: &StudyConfig, d: usize) -> Result<Level, LabError> {
    let divisions = cfg.axis_divisions(d)?;
    let grid = stage("grid", build_grid(&cfg.domain()?, &divisions))?;
    let matrix = stage("operator assembly", assemble_biharmonic(&grid))?;
    let opts = ShiftInvertOptions {
        tol: cfg.solver.tol,
        seed: cfg.seed,
        ..ShiftInvertOptions::default()
    };
    let method = cfg.solver.method_for(grid.node_count());
    let start = Instant::now();
    let spectrum = stage(
        "eigensolve",
        solve(&matrix, &grid, cfg.solver.eigenpairs, method, &opts),
    )?;
    let solve_seconds = start.elapsed().as_secs_f64();
    if !spectrum.converged {
        log::warn!(
            "{d} divisions: only {} of {} eigenpairs met the tolerance",
            spectrum.converged_count,
            spectrum.len()
        );
    }
    let stencils = DerivativeStencils::new(&grid);
    let fields = stage(
        "eigenfunction fields",
        U1Fields::from_spectrum(&spectrum, &stencils),
    )?;
    let functionals = stage("functionals", compute_functionals(&spectrum, &grid, &stencils))?;
    let c = stage("constant C", constant_c(&functionals, grid.dim()))?;
    Ok(Level {
        divisions,
        grid,
        matrix,
        stencils,
        spectrum,
        fields,
        functionals,
        constant_c: c,
        solve_seconds,
    })
}

pub fn solve_levels(cfg: &StudyConfig) -> Result<Vec<Level>, LabError> {
    cfg.grid.divisions.iter().map(|&d| solve_level(cfg, d)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub divisions: Vec<usize>,
    pub h: f64,
    pub unknowns: usize,
    pub method: SolveMethod,
    pub converged: bool,
    pub iterations: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub multiplets: Vec<Vec<usize>>,
    pub orthonormality_error: f64,
    /// `|u₁ᵀΔ²_h u₁ − ‖Δ_h u₁‖²| / ‖Δ_h u₁‖²`
    pub energy_identity_error: f64,
    /// `|‖Δ_h u₁‖² − Γ₁| / Γ₁`
    pub eigenvalue_identity_error: f64,
}

pub fn summarize(level: &Level) -> Result<SpectrumSummary, LabError> {
    let s = &level.spectrum;
    let lap_sq = level.functionals.lap_sq;
    let u = &s.eigenvectors[0];
    let form = stage(
        "energy form",
        level.grid.inner_product(u, &level.matrix.matvec_compensated(u)),
    )?;
    Ok(SpectrumSummary {
        divisions: level.divisions.clone(),
        h: level.grid.spacing(),
        unknowns: level.grid.node_count(),
        method: s.method,
        converged: s.converged,
        iterations: s.iterations,
        eigenvalues: s.eigenvalues.clone(),
        residuals: s.residuals.clone(),
        multiplets: multiplets(&s.eigenvalues, MULTIPLET_TOLERANCE)
            .into_iter()
            .filter(|m| m.len() > 1)
            .collect(),
        orthonormality_error: stage("orthonormality", s.orthonormality_error(&level.grid))?,
        energy_identity_error: (form - lap_sq).abs() / lap_sq,
        eigenvalue_identity_error: (lap_sq - level.functionals.gamma1).abs() / level.functionals.gamma1,
    })
}

/// The relative band below which a negative margin is inconclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBand {
    pub value: f64,
    /// Convergence order assumed by the Richardson estimate.
    pub order: f64,
    /// First-axis divisions of the two grids used.
    pub levels: Option<(usize, usize)>,
    pub note: String,
}

/// `5 ×` the Richardson error estimate of `Γ₁..Γ_{k_max+1}` from the two finest grids.
pub fn epsilon_for(cfg: &StudyConfig, levels: &[Level]) -> Result<EpsilonBand, LabError> {
    let order = if cfg.domain.kind == DomainShape::Disk {
        1.0
    } else {
        2.0
    };
    if levels.len() < 2 {
        return Ok(EpsilonBand {
            value: 0.0,
            order,
            levels: None,
            note: "single grid: no error estimate, band set to zero".into(),
        });
    }
    let (coarse, fine) = (&levels[levels.len() - 2], &levels[levels.len() - 1]);
    let count = (cfg.inequalities.k_max + 1).min(coarse.spectrum.len());
    let ratio = coarse.grid.spacing() / fine.grid.spacing();
    let value = stage(
        "error band",
        epsilon_band(
            &coarse.spectrum.eigenvalues,
            &fine.spectrum.eigenvalues,
            ratio,
            order,
            count,
        ),
    )?;
    Ok(EpsilonBand {
        value,
        order,
        levels: Some((coarse.divisions[0], fine.divisions[0])),
        note: format!("5 × relative Richardson error of Γ_1..Γ_{count}"),
    })
}

/// Inequality reports on the computed spectrum of `level`.
pub fn computed_inequalities(
    cfg: &StudyConfig,
    level: &Level,
    epsilon: f64,
) -> Result<Vec<InequalityReport>, LabError> {
    let ev = &level.spectrum.eigenvalues;
    let n = level.grid.dim();
    let k_max = cfg.inequalities.k_max;
    let src = SpectrumSource::Computed;
    let mut out = vec![stage(
        "gap bound",
        theorem11_report(ev, &level.functionals, n, k_max, src, epsilon),
    )?];
    out.extend(stage(
        "classical inequalities",
        classical_suite(ev, n, k_max, src, epsilon),
    )?);
    out.push(stage(
        "mean lower bound",
        levine_protter_check(ev, n, cfg.domain()?.volume(), k_max, src, epsilon),
    )?);
    out.push(gradient_energy_check(&level.functionals, src, epsilon));
    out.retain(|r| cfg.inequalities.wants(&r.id));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSection {
    pub domain: String,
    pub max_residual: f64,
    pub eigenvalues: Vec<f64>,
    /// Where the first-mode functionals behind `C` come from.
    pub functionals_source: String,
    pub functionals: EigenfunctionFunctionals,
    pub inequalities: Vec<InequalityReport>,
    pub asymptotics: AsymptoticReport,
    pub scan: Option<OrderScan>,
    pub scan_error: Option<String>,
}

pub fn oracle_spectrum(cfg: &StudyConfig, count: usize) -> Result<Option<OracleSpectrum>, LabError> {
    if !cfg.has_oracle() {
        return Ok(None);
    }
    let spec = match cfg.domain.kind {
        DomainShape::Interval => beam_spectrum(count),
        DomainShape::Disk => disk_spectrum(count),
        DomainShape::Box => return Ok(None),
    };
    stage("reference spectrum", spec).map(Some)
}

/// Checks on the reference spectrum. The disk uses the analytic first
/// mode; the beam borrows the computed functionals of `fallback`.
pub fn oracle_section(
    cfg: &StudyConfig,
    fallback: &EigenfunctionFunctionals,
) -> Result<Option<OracleSection>, LabError> {
    let k_max = cfg.inequalities.oracle_k_max;
    let count = k_max.max(cfg.inequalities.scan_k_max) + 1;
    let Some(oracle) = oracle_spectrum(cfg, count)? else {
        return Ok(None);
    };
    let (functionals, functionals_source) = match cfg.domain.kind {
        DomainShape::Disk => (
            stage("disk first mode", disk_first_mode_functionals())?,
            "analytic",
        ),
        _ => (*fallback, "computed"),
    };
    let ev = &oracle.eigenvalues;
    let n = oracle.dim;
    let src = SpectrumSource::Oracle;
    let mut inequalities = vec![stage(
        "reference gap bound",
        theorem11_report(ev, &functionals, n, k_max, src, ORACLE_BAND),
    )?];
    inequalities.extend(stage(
        "reference classical inequalities",
        classical_suite(ev, n, k_max, src, ORACLE_BAND),
    )?);
    inequalities.push(stage(
        "reference mean lower bound",
        levine_protter_check(ev, n, oracle.volume, k_max, src, ORACLE_BAND),
    )?);
    inequalities.retain(|r| cfg.inequalities.wants(&r.id));
    let asymptotics = stage(
        "asymptotic fit",
        agmon_pleijel_fit(ev, n, oracle.volume, 1, count - 1),
    )?;
    let (scan, scan_error) = match remark11_order_scan(
        ev,
        &functionals,
        n,
        DEFAULT_SCAN_START,
        cfg.inequalities.scan_k_max,
    ) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(Some(OracleSection {
        domain: oracle.domain.clone(),
        max_residual: oracle.max_residual(),
        eigenvalues: ev.clone(),
        functionals_source: functionals_source.into(),
        functionals,
        inequalities,
        asymptotics,
        scan,
        scan_error,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMarginRow {
    pub g: String,
    pub k: usize,
    pub theorem: Margin,
    pub lemma_full: Margin,
    pub lemma_truncated: Margin,
    pub relative_tail_mass: f64,
    pub consistency_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SjRow {
    pub g: String,
    pub j: usize,
    pub s: f64,
    /// `(Γ_j − Γ₁) r_j`
    pub expected: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub identity: String,
    pub case: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSection {
    pub divisions: Vec<usize>,
    pub margins: Vec<TrialMarginRow>,
    pub sj: Vec<SjRow>,
    pub identities: Vec<IdentityRow>,
}

/// Number of `s_j` entries compared against `(Γ_j − Γ₁) r_j`.
pub const SJ_CHECKED: usize = 10;

pub fn trial_section(cfg: &StudyConfig, level: &Level) -> Result<TrialSection, LabError> {
    let opts = POptions::default();
    let sp = &level.spectrum;
    let mut margins = vec![];
    let mut sj = vec![];
    let mut identities = vec![];
    for g in cfg.test_functions()? {
        let label = g.label();
        let e = stage(
            "trial expansion",
            expand(sp, &g, &level.fields, &level.grid, &level.stencils, opts),
        )?;
        let errs = verify_sj_identity(sp, &e);
        let g1 = sp.eigenvalues[0];
        for j in 0..SJ_CHECKED.min(sp.len()) {
            sj.push(SjRow {
                g: label.clone(),
                j: j + 1,
                s: e.s[j],
                expected: (sp.eigenvalues[j] - g1) * e.r[j],
                relative_error: errs[j],
            });
        }
        for &k in &cfg.trial.k {
            let theorem = stage("trial inequality", theorem21_check(&sp.eigenvalues, &e, k))?;
            let app = stage(
                "sequence bound application",
                lemma21_gap_inequality_check(sp, &e, k),
            )?;
            margins.push(TrialMarginRow {
                g: label.clone(),
                k,
                theorem,
                lemma_full: app.full,
                lemma_truncated: app.truncated,
                relative_tail_mass: app.relative_tail_mass,
                consistency_residual: app.consistency_residual,
            });
        }
        let gap = stage(
            "product identity",
            lemma22_check(&g, &level.fields, &level.grid, &level.stencils, opts),
        )?;
        identities.push(IdentityRow {
            identity: "product_integral".into(),
            case: label,
            lhs: gap.lhs,
            rhs: gap.rhs,
            gap: gap.gap,
        });
    }
    let expanded = POptions {
        g: GDerivatives::Analytic,
        product: ProductLaplacian::Expanded,
    };
    for &axis in &cfg.trial.axes {
        for &a in &cfg.trial.a {
            let case = format!("a={a},axis={axis}");
            let pair = stage(
                "trial pair",
                build_pair(a, axis, &level.fields, &level.grid, &level.stencils, opts),
            )?;
            let squares = stage("pair squares", prop21_check(&pair, &level.grid))?;
            let cross = stage(
                "pair cross terms",
                prop22_check(&pair, &level.fields, &level.grid),
            )?;
            let exact = stage(
                "expanded pair",
                build_pair(a, axis, &level.fields, &level.grid, &level.stencils, expanded),
            )?;
            let pointwise = prop21_pointwise(&exact);
            identities.push(IdentityRow {
                identity: "pair_squares".into(),
                case: case.clone(),
                lhs: squares.lhs,
                rhs: squares.rhs,
                gap: squares.gap,
            });
            identities.push(IdentityRow {
                identity: "pair_cross".into(),
                case: case.clone(),
                lhs: cross.lhs,
                rhs: cross.rhs,
                gap: cross.gap,
            });
            identities.push(IdentityRow {
                identity: "pair_squares_pointwise".into(),
                case,
                lhs: pointwise,
                rhs: 0.0,
                gap: pointwise,
            });
        }
    }
    Ok(TrialSection {
        divisions: level.divisions.clone(),
        margins,
        sj,
        identities,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub quantity: String,
    pub divisions: Vec<usize>,
    pub h: Vec<f64>,
    pub values: Vec<f64>,
    /// Observed order from the three finest grids.
    pub order: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn row(&self, quantity: &str) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }
}

fn convergence_row(quantity: String, levels: &[Level], values: Vec<f64>) -> ConvergenceRow {
    let m = levels.len();
    let h: Vec<f64> = levels.iter().map(|l| l.grid.spacing()).collect();
    let (order, note) = match observed_order(
        [h[m - 3], h[m - 2], h[m - 1]],
        [values[m - 3], values[m - 2], values[m - 1]],
    ) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ConvergenceRow {
        quantity,
        divisions: levels.iter().map(|l| l.divisions[0]).collect(),
        h,
        values,
        order,
        note,
    }
}

/// Orders for `Γ₁..Γ_min(K,6)`, the first-mode functionals and the identity gaps.
pub fn convergence_from_levels(cfg: &StudyConfig, levels: &[Level]) -> Result<ConvergenceTable, LabError> {
    if levels.len() < 3 {
        return Err(LabError::Config(format!(
            "a convergence study needs at least 3 grids, got {}",
            levels.len()
        )));
    }
    let mut rows = vec![];
    let count = cfg.solver.eigenpairs.min(6);
    for j in 0..count {
        let values = levels.iter().map(|l| l.spectrum.eigenvalues[j]).collect();
        rows.push(convergence_row(format!("gamma_{}", j + 1), levels, values));
    }
    let fun: [(&str, fn(&Level) -> f64); 4] = [
        ("grad_norm_sq", |l| l.functionals.grad_norm_sq),
        ("pure_second_sq", |l| l.functionals.pure_second_sq),
        ("grad_lap_sq", |l| l.functionals.grad_lap_sq),
        ("constant_c", |l| l.constant_c),
    ];
    for (name, f) in fun {
        rows.push(convergence_row(
            name.into(),
            levels,
            levels.iter().map(f).collect(),
        ));
    }
    let opts = POptions::default();
    if let Some(g) = cfg.test_functions()?.first() {
        let mut sj = vec![];
        let mut product = vec![];
        for l in levels {
            let e = stage(
                "trial expansion",
                expand(&l.spectrum, g, &l.fields, &l.grid, &l.stencils, opts),
            )?;
            let errs = verify_sj_identity(&l.spectrum, &e);
            sj.push(errs.iter().take(SJ_CHECKED).cloned().fold(0.0, f64::max));
            product.push(
                stage(
                    "product identity",
                    lemma22_check(g, &l.fields, &l.grid, &l.stencils, opts),
                )?
                .gap,
            );
        }
        rows.push(convergence_row(format!("sj_error[{}]", g.label()), levels, sj));
        rows.push(convergence_row(
            format!("product_integral_gap[{}]", g.label()),
            levels,
            product,
        ));
    }
    if let (Some(&a), Some(&axis)) = (cfg.trial.a.first(), cfg.trial.axes.first()) {
        let mut cross = vec![];
        for l in levels {
            let pair = stage(
                "trial pair",
                build_pair(a, axis, &l.fields, &l.grid, &l.stencils, opts),
            )?;
            cross.push(stage("pair cross terms", prop22_check(&pair, &l.fields, &l.grid))?.gap);
        }
        rows.push(convergence_row(
            format!("pair_cross_gap[a={a},axis={axis}]"),
            levels,
            cross,
        ));
    }
    Ok(ConvergenceTable { rows })
}

pub fn convergence_study(cfg: &StudyConfig) -> Result<ConvergenceTable, LabError> {
    if cfg.grid.divisions.len() < 3 {
        return Err(LabError::Config(format!(
            "a convergence study needs at least 3 grids, got {}",
            cfg.grid.divisions.len()
        )));
    }
    convergence_from_levels(cfg, &solve_levels(cfg)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub solve_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub schema_version: u32,
    pub seed: u64,
    pub config: StudyConfig,
    pub spectra: Vec<SpectrumSummary>,
    pub functionals: EigenfunctionFunctionals,
    pub constant_c: f64,
    pub epsilon: EpsilonBand,
    pub inequalities: Vec<InequalityReport>,
    pub oracle: Option<OracleSection>,
    pub trial: Option<TrialSection>,
    pub convergence: Option<ConvergenceTable>,
    pub per_level_functionals: Vec<(usize, EigenfunctionFunctionals, f64)>,
    pub timing: Timing,
}

impl StudyReport {
    /// Asserted reports whose verdict is a violation beyond the band.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .inequalities
            .iter()
            .chain(self.oracle.iter().flat_map(|o| o.inequalities.iter()))
            .filter(|r| r.asserted && r.verdict == Verdict::Violated)
            .map(|r| format!("{} ({:?})", r.id, r.source))
            .collect();
        if let Some(t) = &self.trial {
            for m in &t.margins {
                if m.theorem.margin < -self.epsilon.value * m.theorem.scale() {
                    out.push(format!("trial inequality for {} at k = {}", m.g, m.k));
                }
            }
        }
        out
    }
}

/// Full pipeline on every configured grid; detailed checks run on the finest.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport, LabError> {
    cfg.validate()?;
    let start = Instant::now();
    let levels = solve_levels(cfg)?;
    let finest = levels.last().expect("validated configs have a grid");
    let epsilon = epsilon_for(cfg, &levels)?;
    let spectra = levels.iter().map(summarize).collect::<Result<Vec<_>, _>>()?;
    let inequalities = computed_inequalities(cfg, finest, epsilon.value)?;
    let oracle = if cfg.inequalities.run.is_empty() {
        None
    } else {
        oracle_section(cfg, &finest.functionals)?
    };
    let trial = if cfg.trial.g.is_empty() && cfg.trial.a.is_empty() {
        None
    } else {
        Some(trial_section(cfg, finest)?)
    };
    let convergence = if levels.len() >= 3 {
        Some(convergence_from_levels(cfg, &levels)?)
    } else {
        None
    };
    Ok(StudyReport {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        config: cfg.clone(),
        spectra,
        functionals: finest.functionals,
        constant_c: finest.constant_c,
        epsilon,
        inequalities,
        oracle,
        trial,
        convergence,
        per_level_functionals: levels
            .iter()
            .map(|l| (l.divisions[0], l.functionals, l.constant_c))
            .collect(),
        timing: Timing {
            total_seconds: start.elapsed().as_secs_f64(),
            solve_seconds: levels.iter().map(|l| l.solve_seconds).collect(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub seed: u64,
    pub length: usize,
    pub spread: f64,
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub bound: f64,
    /// `(bound − S) / max(1, bound)`
    pub slack: f64,
    /// Exact maximum of `S` for the instance's `A`, `B`.
    pub s_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointRow {
    pub mu1: f64,
    pub mu2: f64,
    pub a: f64,
    pub b: f64,
    pub bound: f64,
    pub s_max: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSuite {
    pub rows: Vec<SequenceRow>,
    pub two_point: Vec<TwoPointRow>,
    pub min_slack: f64,
    pub max_two_point_error: f64,
}

const SPREADS: [f64; 4] = [0.0, 0.5, 5.0, 50.0];

/// Random instances of the weighted-mean bound plus the two-point family
/// on which it is attained. Instance `i` uses seed `seed + i`.
pub fn sequence_suite(seed: u64, instances: usize) -> Result<SequenceSuite, LabError> {
    let mut rows = Vec::with_capacity(instances);
    let mut two_point = vec![];
    for i in 0..instances {
        let s_i = seed.wrapping_add(i as u64);
        let length = 2 + i % 39;
        let spread = SPREADS[i % SPREADS.len()];
        let inst = random_instance(s_i, length, spread);
        let bound = stage("sequence bound", inst.bound())?;
        let s_max = if inst.b > 0.0 {
            Some(stage("vertex enumeration", brute_force_max(&inst.mu, inst.a, inst.b))?.s_max)
        } else {
            None
        };
        rows.push(SequenceRow {
            seed: s_i,
            length,
            spread,
            a: inst.a,
            b: inst.b,
            s: inst.s,
            bound,
            slack: (bound - inst.s) / bound.abs().max(1.0),
            s_max,
        });
        if inst.mu[1] > inst.mu[0] {
            let mut w = vec![0.0; inst.mu.len()];
            w[0] = inst.weights[0].max(1e-3);
            w[1] = inst.weights[1].max(1e-3);
            two_point.push(two_point_row(&inst.mu, w)?);
        }
    }
    two_point.push(two_point_row(&[1.0, 2.0], vec![1.0, 1.0])?);
    let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let max_two_point_error = two_point.iter().map(|r| r.error).fold(0.0, f64::max);
    Ok(SequenceSuite {
        rows,
        two_point,
        min_slack,
        max_two_point_error,
    })
}

fn two_point_row(mu: &[f64], weights: Vec<f64>) -> Result<TwoPointRow, LabError> {
    let inst = stage("two-point instance", SequenceInstance::new(mu.to_vec(), weights))?;
    let bound = stage("sequence bound", lemma_bound(mu[0], mu[1], inst.a, inst.b))?;
    let s_max = stage("vertex enumeration", brute_force_max(mu, inst.a, inst.b))?.s_max;
    Ok(TwoPointRow {
        mu1: mu[0],
        mu2: mu[1],
        a: inst.a,
        b: inst.b,
        bound,
        s_max,
        error: (s_max - bound).abs() / bound.abs().max(1.0),
    })
}
