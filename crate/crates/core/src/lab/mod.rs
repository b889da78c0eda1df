//! Experiment orchestration: scenarios, sweeps, diagnostics and reports.

mod analysis;
mod runs;
mod scenario;

pub use analysis::{
    cross_intervals, cross_section_pair, discrete_cross_section_eigenvalue, fit_rate, rate_fit, richardson_error,
    shifted_spectrum, threshold, transversal_average, transversal_gap_check, transversal_gap_violation,
    vertex_mass_fraction, CrossSectionPair, RateFit, ShiftMode,
};
pub use runs::{
    check_smallness, convergence_sweep, counterexample_run, CounterexampleReport, CounterexampleRow, RateEntry,
    SmallnessReport, SolveInfo, SpectrumReport, SpectrumRow, Verdict,
};
pub use scenario::{
    CounterexampleSpec, EdgeSpec, GraphSpec, LimitRule, MeshRule, Scenario, ScenarioKind, ShapeSpec, StarSpec,
    VertexSpec,
};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::eigen::EigenError;
use crate::fem::FemError;
use crate::geometry::GeometryError;
use crate::graph::GraphError;

pub const CSV_HEADER: &str = "eps,k,lambda_eps,shifted,lambda_limit,gap,vertex_mass_fraction,converged";

#[derive(Debug, Error)]
pub enum LabError {
    #[error("scenario field `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error("eigensolver: {0}")]
    Eigen(String),
    #[error("rate fit: {0}")]
    Rate(String),
    #[error("mesh has no column structure")]
    NoColumns,
    #[error("field has zero norm")]
    ZeroField,
    #[error("dense eigensolver failed")]
    Dense,
}

impl From<EigenError<f64>> for LabError {
    fn from(e: EigenError<f64>) -> Self {
        LabError::Eigen(e.to_string())
    }
}

/// Command-line overrides applied on top of a scenario file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shift: Option<ShiftMode>,
    pub h_factor: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, s: &mut Scenario) {
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(shift) = self.shift {
            s.shift = shift;
        }
        if let Some(h) = self.h_factor {
            s.mesh.h_factor = h;
        }
    }
}

pub fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.eps, r.k, r.lambda_eps, r.shifted, r.lambda_limit, r.gap, r.vertex_mass_fraction, r.converged
        );
    }
    out
}

pub fn counterexample_csv(report: &CounterexampleReport) -> String {
    let mut out = String::from(
        "eps,h,gap_factor,closed_form_shifted,trial_shifted,lambda1,lambda1_shifted,scaled,min_max_holds,converged\n",
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.eps,
            r.h,
            r.gap_factor,
            r.closed_form_shifted,
            r.trial_shifted,
            r.lambda1,
            r.lambda1_shifted,
            r.scaled,
            r.min_max_holds,
            r.converged
        );
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    scenario: &'a Scenario,
    #[serde(flatten)]
    result: &'a R,
}

fn json<R: Serialize>(scenario: &Scenario, result: &R) -> String {
    let doc = JsonReport {
        tool: "qwg",
        version: env!("CARGO_PKG_VERSION"),
        scenario,
        result,
    };
    serde_json::to_string_pretty(&doc).expect("report serialises") + "\n"
}

/// Files written by [`run_scenario`].
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub csv: PathBuf,
    pub json: PathBuf,
    /// The run finished but some ε point failed or did not converge.
    pub incomplete: bool,
}

/// Runs a scenario and writes `<name>.csv` and `<name>.json` into `out`.
pub fn run_scenario(path: &Path, out: &Path, overrides: &Overrides) -> Result<RunOutcome, LabError> {
    let mut s = Scenario::load(path)?;
    overrides.apply(&mut s);
    s.validate()?;
    run_loaded(&s, out)
}

pub fn run_loaded(s: &Scenario, out: &Path) -> Result<RunOutcome, LabError> {
    std::fs::create_dir_all(out).map_err(|e| LabError::Io(format!("{}: {e}", out.display())))?;
    let stem = if s.name.is_empty() { "report" } else { s.name.as_str() };
    let csv_path = out.join(format!("{stem}.csv"));
    let json_path = out.join(format!("{stem}.json"));
    let (csv, json, incomplete) = match s.kind {
        ScenarioKind::Sweep => {
            let r = convergence_sweep(s)?;
            let bad = r.solves.iter().any(|i| i.error.is_some()) || r.rows.iter().any(|r| !r.converged);
            (spectrum_csv(&r), json(s, &r), bad)
        }
        ScenarioKind::Counterexample => {
            let c = s.counterexample.as_ref().expect("validated");
            let r = counterexample_run(c.alpha, c.length, c.cutoff, &s.eps, s.mesh.h_factor, s.seed)?;
            let bad = r.rows.iter().any(|r| !r.converged);
            (counterexample_csv(&r), json(s, &r), bad)
        }
    };
    let write =
        |p: &Path, text: &str| std::fs::write(p, text).map_err(|e| LabError::Io(format!("{}: {e}", p.display())));
    write(&csv_path, &csv)?;
    write(&json_path, &json)?;
    Ok(RunOutcome {
        csv: csv_path,
        json: json_path,
        incomplete,
    })
}
