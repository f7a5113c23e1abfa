//! Study configuration, read from TOML.

use std::path::{Path, PathBuf};

use plate_core::trial::TestFunction;
use plate_core::{Domain, SolveMethod};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

/// Ids of the inequality reports a study can produce.
pub const INEQUALITY_IDS: [&str; 7] = [
    "sqrt_gap_bound",
    "consecutive_gap",
    "reciprocal_gap_sum",
    "quadratic_gap_sum",
    "quadratic_gap_sum_conjectured",
    "mean_lower_bound",
    "gradient_energy_bound",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub domain: DomainConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub inequalities: InequalityConfig,
    #[serde(default)]
    pub trial: TrialConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    0x5eed
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainShape {
    Interval,
    Box,
    Disk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainShape,
    /// Side lengths for intervals and boxes.
    #[serde(default)]
    pub extents: Vec<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub center: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Divisions along the first axis, one entry per refinement level.
    pub divisions: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    /// Dense below [`AUTO_DENSE_LIMIT`] unknowns, shift-invert above.
    Auto,
    Dense,
    ShiftInvert,
}

/// Largest problem the `auto` choice sends to the dense solver.
pub const AUTO_DENSE_LIMIT: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_method")]
    pub method: SolverChoice,
    /// Number of eigenpairs `K`.
    #[serde(default = "default_eigenpairs")]
    pub eigenpairs: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_method() -> SolverChoice {
    SolverChoice::Auto
}
fn default_eigenpairs() -> usize {
    12
}
fn default_tol() -> f64 {
    1e-10
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            eigenpairs: default_eigenpairs(),
            tol: default_tol(),
        }
    }
}

impl SolverConfig {
    pub fn method_for(&self, unknowns: usize) -> SolveMethod {
        match self.method {
            SolverChoice::Dense => SolveMethod::Dense,
            SolverChoice::ShiftInvert => SolveMethod::ShiftInvert,
            SolverChoice::Auto if unknowns <= AUTO_DENSE_LIMIT => SolveMethod::Dense,
            SolverChoice::Auto => SolveMethod::ShiftInvert,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityConfig {
    #[serde(default = "default_ids")]
    pub run: Vec<String>,
    /// Largest `k` checked on the computed spectrum.
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Largest `k` checked on a reference spectrum, when one exists.
    #[serde(default = "default_oracle_k_max")]
    pub oracle_k_max: usize,
    /// Upper end of the order regression on a reference spectrum.
    #[serde(default = "default_scan_k_max")]
    pub scan_k_max: usize,
}

fn default_ids() -> Vec<String> {
    INEQUALITY_IDS.iter().map(|s| s.to_string()).collect()
}
fn default_k_max() -> usize {
    10
}
fn default_oracle_k_max() -> usize {
    30
}
fn default_scan_k_max() -> usize {
    100
}

impl Default for InequalityConfig {
    fn default() -> Self {
        Self {
            run: default_ids(),
            k_max: default_k_max(),
            oracle_k_max: default_oracle_k_max(),
            scan_k_max: default_scan_k_max(),
        }
    }
}

impl InequalityConfig {
    pub fn wants(&self, id: &str) -> bool {
        self.run.iter().any(|r| r == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    /// `cos:<a>`, `sin:<a>`, `quartic`, `linear` or `const:<c>`.
    #[serde(default = "default_g")]
    pub g: Vec<String>,
    /// Wavenumbers for the `cos`/`sin` pair identities.
    #[serde(default = "default_a")]
    pub a: Vec<f64>,
    #[serde(default = "default_axes")]
    pub axes: Vec<usize>,
    #[serde(default = "default_trial_k")]
    pub k: Vec<usize>,
}

fn default_g() -> Vec<String> {
    vec!["cos:2".into(), "sin:3".into(), "quartic".into()]
}
fn default_a() -> Vec<f64> {
    vec![1.0, 3.0]
}
fn default_axes() -> Vec<usize> {
    vec![0]
}
fn default_trial_k() -> Vec<usize> {
    (1..=5).collect()
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            g: default_g(),
            a: default_a(),
            axes: default_axes(),
            k: default_trial_k(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

/// Parse a `g` specification for one axis.
pub fn parse_test_function(spec: &str, axis: usize) -> Result<TestFunction, LabError> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (spec.trim(), None),
    };
    let number = |what: &str| -> Result<f64, LabError> {
        arg.ok_or_else(|| LabError::Config(format!("`{spec}`: {what} needs a value, e.g. `{what}:2`")))?
            .parse::<f64>()
            .map_err(|e| LabError::Config(format!("`{spec}`: {e}")))
    };
    match name {
        "cos" => Ok(TestFunction::cos(number("cos")?, axis)),
        "sin" => Ok(TestFunction::sin(number("sin")?, axis)),
        "const" => Ok(TestFunction::constant(number("const")?)),
        "quartic" => Ok(TestFunction::quartic(axis)),
        "linear" => Ok(TestFunction::linear(axis)),
        _ => Err(LabError::Config(format!("unknown test function `{spec}`"))),
    }
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn domain(&self) -> Result<Domain, LabError> {
        let d = &self.domain;
        let built = match d.kind {
            DomainShape::Interval => Domain::interval(*d.extents.first().unwrap_or(&1.0)),
            DomainShape::Box => {
                if d.extents.len() < 2 {
                    return Err(LabError::Config("a box needs two or three extents".into()));
                }
                Domain::cuboid(&d.extents)
            }
            DomainShape::Disk => Domain::disk(d.radius.unwrap_or(1.0), d.center.unwrap_or([0.0, 0.0])),
        };
        built.map_err(|e| LabError::Config(e.to_string()))
    }

    /// Per-axis divisions for a level with `d` divisions on the first axis.
    pub fn axis_divisions(&self, d: usize) -> Result<Vec<usize>, LabError> {
        let domain = self.domain()?;
        let h = domain.extents[0] / d as f64;
        domain
            .extents
            .iter()
            .map(|e| {
                let m = e / h;
                let r = m.round();
                if (m - r).abs() > 1e-9 * m || r < 1.0 {
                    Err(LabError::Config(format!(
                        "extent {e} is not a whole number of cells at {d} divisions"
                    )))
                } else {
                    Ok(r as usize)
                }
            })
            .collect()
    }

    /// Unit interval or unit disk, for which reference spectra exist.
    pub fn has_oracle(&self) -> bool {
        match self.domain() {
            Ok(d) => match self.domain.kind {
                DomainShape::Interval => d.extents[0] == 1.0,
                DomainShape::Disk => d.radius == Some(1.0),
                DomainShape::Box => false,
            },
            Err(_) => false,
        }
    }

    pub fn test_functions(&self) -> Result<Vec<TestFunction>, LabError> {
        let mut out = vec![];
        for &axis in &self.trial.axes {
            for spec in &self.trial.g {
                out.push(parse_test_function(spec, axis)?);
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let fail = |m: String| Err(LabError::Config(m));
        let divs = &self.grid.divisions;
        if divs.is_empty() {
            return fail("grid.divisions is empty".into());
        }
        if divs.windows(2).any(|w| w[1] <= w[0]) {
            return fail(format!("grid.divisions must be strictly increasing: {divs:?}"));
        }
        let domain = self.domain()?;
        for &d in divs {
            self.axis_divisions(d)?;
        }
        let k = self.solver.eigenpairs;
        if k < 2 {
            return fail(format!("solver.eigenpairs = {k}; at least 2 are needed"));
        }
        if !(self.solver.tol > 0.0) {
            return fail(format!("solver.tol = {} must be positive", self.solver.tol));
        }
        if self.inequalities.k_max == 0 || self.inequalities.k_max + 1 > k {
            return fail(format!(
                "inequalities.k_max = {} needs 1 ≤ k_max ≤ eigenpairs − 1 = {}",
                self.inequalities.k_max,
                k - 1
            ));
        }
        if let Some(bad) = self
            .inequalities
            .run
            .iter()
            .find(|id| !INEQUALITY_IDS.contains(&id.as_str()))
        {
            return fail(format!(
                "unknown inequality id `{bad}`; known ids: {INEQUALITY_IDS:?}"
            ));
        }
        if let Some(&big) = self.trial.k.iter().max() {
            if self.trial.k.contains(&0) || big + 2 > k {
                return fail(format!("trial.k entries must lie in 1..={}", k - 2));
            }
        }
        if let Some(&axis) = self.trial.axes.iter().find(|&&a| a >= domain.dim) {
            return fail(format!(
                "trial axis {axis} outside a {}-dimensional domain",
                domain.dim
            ));
        }
        if self.trial.a.iter().any(|a| !(*a >= 0.0)) {
            return fail(format!("trial.a must be nonnegative: {:?}", self.trial.a));
        }
        self.test_functions()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BEAM: &str = r#"
        seed = 7
        [domain]
        kind = "interval"
        extents = [1.0]
        [grid]
        divisions = [50, 100]
    "#;

    #[test]
    fn defaults_fill_optional_sections() {
        let cfg = StudyConfig::from_toml(BEAM).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.solver.eigenpairs, 12);
        assert_eq!(cfg.inequalities.run.len(), INEQUALITY_IDS.len());
        assert!(cfg.has_oracle());
        assert_eq!(StudyConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            BEAM.replace("[50, 100]", "[100, 50]"),
            BEAM.replace("seed = 7", "seed = 7\nextra = 1"),
            format!("{BEAM}\n[inequalities]\nrun = [\"nope\"]"),
            format!("{BEAM}\n[inequalities]\nk_max = 12"),
            format!("{BEAM}\n[trial]\nk = [11]"),
            format!("{BEAM}\n[trial]\naxes = [1]"),
            format!("{BEAM}\n[trial]\ng = [\"tan:1\"]"),
        ];
        for text in bad {
            assert!(
                matches!(StudyConfig::from_toml(&text), Err(LabError::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn boxes_need_whole_cells() {
        let text = r#"
            [domain]
            kind = "box"
            extents = [1.0, 0.5]
            [grid]
            divisions = [16, 33]
        "#;
        assert!(StudyConfig::from_toml(text).is_err());
        let ok = StudyConfig::from_toml(&text.replace("33", "32")).unwrap();
        assert_eq!(ok.axis_divisions(32).unwrap(), vec![32, 16]);
        assert!(!ok.has_oracle());
    }

    #[test]
    fn parses_test_functions() {
        assert_eq!(
            parse_test_function("cos:2", 1).unwrap(),
            TestFunction::cos(2.0, 1)
        );
        assert_eq!(
            parse_test_function("quartic", 0).unwrap(),
            TestFunction::quartic(0)
        );
        assert!(parse_test_function("cos", 0).is_err());
    }
}
