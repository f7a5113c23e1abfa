//! Serialized outputs: a schema-versioned JSON report and flat CSV tables.
//!
//! Every float in a CSV cell is written with 17 significant digits, so
//! identical runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use plate_core::inequalities::{AsymptoticReport, InequalityReport};
use serde::Serialize;

use crate::error::LabError;
use crate::study::{ConvergenceTable, SequenceSuite, SpectrumSummary, StudyReport, TrialSection};

/// Header of every inequality table.
pub const MARGIN_COLUMNS: [&str; 5] = ["k", "lhs", "rhs", "margin", "relative_margin"];

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn ensure_dir(dir: &Path) -> Result<(), LabError> {
    fs::create_dir_all(dir).map_err(|source| LabError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Write `rows` under `header` to `dir/name`.
pub fn write_table(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<PathBuf, LabError> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    let csv_err = |source| LabError::Csv {
        path: path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| LabError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, LabError> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)?;
    fs::write(&path, text + "\n").map_err(|source| LabError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn write_inequality(dir: &Path, prefix: &str, report: &InequalityReport) -> Result<PathBuf, LabError> {
    let rows: Vec<Vec<String>> = report
        .records
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                fmt(r.lhs),
                fmt(r.rhs),
                fmt(r.margin),
                fmt(r.relative_margin),
            ]
        })
        .collect();
    write_table(
        dir,
        &format!("{prefix}_{}.csv", report.id),
        &MARGIN_COLUMNS,
        &rows,
    )
}

pub fn write_spectra(dir: &Path, spectra: &[SpectrumSummary]) -> Result<PathBuf, LabError> {
    let rows: Vec<Vec<String>> = spectra
        .iter()
        .flat_map(|s| {
            s.eigenvalues
                .iter()
                .zip(&s.residuals)
                .enumerate()
                .map(move |(k, (g, r))| {
                    vec![s.divisions[0].to_string(), (k + 1).to_string(), fmt(*g), fmt(*r)]
                })
        })
        .collect();
    write_table(
        dir,
        "spectrum.csv",
        &["divisions", "k", "eigenvalue", "residual"],
        &rows,
    )
}

pub fn write_functionals(
    dir: &Path,
    per_level: &[(usize, plate_core::functionals::EigenfunctionFunctionals, f64)],
) -> Result<PathBuf, LabError> {
    let rows: Vec<Vec<String>> = per_level
        .iter()
        .map(|(d, f, c)| {
            vec![
                d.to_string(),
                fmt(f.gamma1),
                fmt(f.grad_norm_sq),
                fmt(f.lap_sq),
                fmt(f.grad_lap_sq),
                fmt(f.pure_second_sq),
                fmt(*c),
            ]
        })
        .collect();
    write_table(
        dir,
        "functionals.csv",
        &[
            "divisions",
            "gamma1",
            "grad_norm_sq",
            "lap_sq",
            "grad_lap_sq",
            "pure_second_sq",
            "constant_c",
        ],
        &rows,
    )
}

pub fn write_trial(dir: &Path, trial: &TrialSection) -> Result<Vec<PathBuf>, LabError> {
    let mut margins = vec![];
    for m in &trial.margins {
        for (check, v) in [
            ("trial", m.theorem),
            ("sequence_full", m.lemma_full),
            ("sequence_truncated", m.lemma_truncated),
        ] {
            let scale = v.scale();
            let rel = if scale > 0.0 { v.margin / scale } else { 0.0 };
            margins.push(vec![
                check.to_string(),
                m.g.clone(),
                m.k.to_string(),
                fmt(v.lhs),
                fmt(v.rhs),
                fmt(v.margin),
                fmt(rel),
            ]);
        }
    }
    let sj: Vec<Vec<String>> = trial
        .sj
        .iter()
        .map(|r| {
            vec![
                r.g.clone(),
                r.j.to_string(),
                fmt(r.s),
                fmt(r.expected),
                fmt(r.relative_error),
            ]
        })
        .collect();
    let ids: Vec<Vec<String>> = trial
        .identities
        .iter()
        .map(|r| {
            vec![
                r.identity.clone(),
                r.case.clone(),
                fmt(r.lhs),
                fmt(r.rhs),
                fmt(r.gap),
            ]
        })
        .collect();
    Ok(vec![
        write_table(
            dir,
            "trial_margins.csv",
            &["check", "g", "k", "lhs", "rhs", "margin", "relative_margin"],
            &margins,
        )?,
        write_table(
            dir,
            "sj_identity.csv",
            &["g", "j", "s", "expected", "relative_error"],
            &sj,
        )?,
        write_table(
            dir,
            "identity_gaps.csv",
            &["identity", "case", "lhs", "rhs", "gap"],
            &ids,
        )?,
    ])
}

pub fn write_convergence(dir: &Path, table: &ConvergenceTable) -> Result<Vec<PathBuf>, LabError> {
    let mut values = vec![];
    let mut orders = vec![];
    for row in &table.rows {
        for ((d, h), v) in row.divisions.iter().zip(&row.h).zip(&row.values) {
            values.push(vec![row.quantity.clone(), d.to_string(), fmt(*h), fmt(*v)]);
        }
        let pairs = row
            .h
            .windows(2)
            .map(|w| format!("{}/{}", fmt(w[0]), fmt(w[1])))
            .collect::<Vec<_>>();
        orders.push(vec![
            row.quantity.clone(),
            row.order.map(fmt).unwrap_or_default(),
            pairs.join(";"),
        ]);
    }
    Ok(vec![
        write_table(
            dir,
            "convergence.csv",
            &["quantity", "divisions", "h", "value"],
            &values,
        )?,
        write_table(
            dir,
            "convergence_orders.csv",
            &["quantity", "order", "h_pairs"],
            &orders,
        )?,
    ])
}

pub fn write_asymptotics(dir: &Path, a: &AsymptoticReport) -> Result<PathBuf, LabError> {
    let rows: Vec<Vec<String>> = a
        .records
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                fmt(r.gamma),
                fmt(r.ratio),
                fmt(r.relative_distance),
                r.quarter_root_ratio.map(fmt).unwrap_or_default(),
            ]
        })
        .collect();
    write_table(
        dir,
        "asymptotics.csv",
        &["k", "gamma", "ratio", "relative_distance", "quarter_root_ratio"],
        &rows,
    )
}

pub fn write_sequence(dir: &Path, suite: &SequenceSuite) -> Result<Vec<PathBuf>, LabError> {
    let rows: Vec<Vec<String>> = suite
        .rows
        .iter()
        .map(|r| {
            vec![
                r.seed.to_string(),
                r.length.to_string(),
                fmt(r.spread),
                fmt(r.a),
                fmt(r.b),
                fmt(r.s),
                fmt(r.bound),
                fmt(r.slack),
                r.s_max.map(fmt).unwrap_or_default(),
            ]
        })
        .collect();
    let pairs: Vec<Vec<String>> = suite
        .two_point
        .iter()
        .map(|r| {
            vec![
                fmt(r.mu1),
                fmt(r.mu2),
                fmt(r.a),
                fmt(r.b),
                fmt(r.bound),
                fmt(r.s_max),
                fmt(r.error),
            ]
        })
        .collect();
    Ok(vec![
        write_table(
            dir,
            "sequence_instances.csv",
            &[
                "seed", "length", "spread", "a", "b", "s", "bound", "slack", "s_max",
            ],
            &rows,
        )?,
        write_table(
            dir,
            "sequence_two_point.csv",
            &["mu1", "mu2", "a", "b", "bound", "s_max", "error"],
            &pairs,
        )?,
    ])
}

/// Write the JSON report and every table the report carries.
pub fn emit_report(report: &StudyReport, dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    let mut out = vec![write_json(dir, "report.json", report)?];
    out.push(write_spectra(dir, &report.spectra)?);
    out.push(write_functionals(dir, &report.per_level_functionals)?);
    for r in &report.inequalities {
        out.push(write_inequality(dir, "inequality", r)?);
    }
    if let Some(o) = &report.oracle {
        for r in &o.inequalities {
            out.push(write_inequality(dir, "oracle", r)?);
        }
        out.push(write_asymptotics(dir, &o.asymptotics)?);
    }
    if let Some(t) = &report.trial {
        out.extend(write_trial(dir, t)?);
    }
    if let Some(c) = &report.convergence {
        out.extend(write_convergence(dir, c)?);
    }
    Ok(out)
}
