//! Experiments: smallness checks, convergence sweeps and the counterexample.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{lowest_eigenpairs_with, rayleigh_quotient, EigenError, EigenOptions, EigenResult};
use crate::fem::{assemble, assemble_mixed_dn, mesh, trial_field, NodeTag, TriMesh};
use crate::geometry::{build_counterexample_domain_with_cutoff, build_domain, counterexample_gap_factor, VertexShape};
use crate::graph::merged_limit_spectrum;
use crate::sparse::SparsePair;

use super::analysis::{
    cross_intervals, rate_fit, richardson_error, threshold, vertex_mass_fraction, RateFit, ShiftMode,
};
use super::scenario::Scenario;
use super::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Borderline,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallnessReport {
    pub vertex: usize,
    /// `λ₁^{DN}` at `h` and at `h/2`.
    pub lambda_coarse: f64,
    pub lambda_fine: f64,
    pub threshold: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

fn solve(
    pair: &SparsePair<f64>,
    k: usize,
    shift: f64,
    tol: f64,
    seed: u64,
) -> Result<EigenResult<f64>, EigenError<f64>> {
    lowest_eigenpairs_with(
        pair,
        k,
        &EigenOptions {
            shift,
            tol,
            seed,
            ..EigenOptions::default()
        },
    )
}

/// Lowest mixed eigenvalue of the shape at `h` and `h/2`; the verdict needs the
/// fine value to clear `π²/4` by twice the two-mesh error estimate.
pub fn check_smallness(shape: &VertexShape<f64>, h: f64) -> Result<SmallnessReport, LabError> {
    let lam = |h: f64| -> Result<f64, LabError> {
        let (_, pair) = assemble_mixed_dn(shape, h)?;
        Ok(solve(&pair, 1, 0.0, 1e-10, 0)?.values[0])
    };
    let coarse = lam(h)?;
    let fine = lam(h / 2.0)?;
    let thr = PI * PI / 4.0;
    let margin = 2.0 * richardson_error(fine, coarse);
    let verdict = if fine > thr + margin {
        Verdict::Satisfied
    } else if fine < thr - margin {
        Verdict::Violated
    } else {
        Verdict::Borderline
    };
    Ok(SmallnessReport {
        vertex: 0,
        lambda_coarse: coarse,
        lambda_fine: fine,
        threshold: thr,
        margin,
        verdict,
    })
}

/// One `(ε, k)` entry of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub eps: f64,
    pub k: usize,
    pub lambda_eps: f64,
    pub shifted: f64,
    pub lambda_limit: f64,
    pub gap: f64,
    pub vertex_mass_fraction: f64,
    pub converged: bool,
    /// Two-mesh error estimate of `lambda_eps`, when requested.
    pub richardson: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveInfo {
    pub eps: f64,
    pub h: f64,
    pub nodes: usize,
    pub dofs: usize,
    pub cross_intervals: Option<usize>,
    pub threshold: f64,
    pub shift: f64,
    pub iterations: usize,
    pub max_residual: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateEntry {
    pub k: usize,
    pub fit: RateFit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub rows: Vec<SpectrumRow>,
    pub rates: Vec<RateEntry>,
    pub smallness: Vec<SmallnessReport>,
    /// Some vertex failed the smallness check; the sweep ran anyway.
    pub smallness_flagged: bool,
    pub solves: Vec<SolveInfo>,
    pub shift_mode: ShiftMode,
}

struct PointResult {
    rows: Vec<SpectrumRow>,
    info: SolveInfo,
}

fn full_domain_solve(
    mesh: &TriMesh<f64>,
    k: usize,
    eps: f64,
    tol: f64,
    seed: u64,
) -> Result<(SparsePair<f64>, EigenResult<f64>), LabError> {
    let pair = assemble(mesh, &[NodeTag::Dirichlet])?;
    let shift = 0.9 * PI * PI / (4.0 * eps * eps);
    let res = match solve(&pair, k, shift, tol, seed) {
        Ok(r) => r,
        Err(EigenError::NotConverged { partial }) => *partial,
        Err(e) => return Err(e.into()),
    };
    Ok((pair, res))
}

/// Sweep over the scenario's ε list: build, mesh, assemble, solve, shift, pair by index.
pub fn convergence_sweep(s: &Scenario) -> Result<SpectrumReport, LabError> {
    let g = s.build_graph()?;
    let shapes = s.build_shapes(&g)?;
    let mut smallness = Vec::new();
    for (&v, shape) in &shapes {
        let mut r = check_smallness(shape, s.mesh.shape_h)?;
        r.vertex = v;
        smallness.push(r);
    }
    let flagged = smallness.iter().any(|r| r.verdict != Verdict::Satisfied);
    let limit = merged_limit_spectrum(&g, s.limit.grid, s.k)?.values();

    let points: Vec<PointResult> = s
        .eps
        .par_iter()
        .map(|&eps| {
            let h = s.mesh.h_factor * eps;
            let run = || -> Result<PointResult, LabError> {
                let domain = build_domain(&g, &shapes, eps)?;
                let m = mesh(&domain, h)?;
                let ny = cross_intervals(&m, eps);
                let thr = threshold(eps, s.shift, ny);
                let (pair, res) = full_domain_solve(&m, s.k, eps, s.tol, s.seed)?;
                let coarse = if s.mesh.richardson {
                    let mc = crate::fem::mesh(&domain, 2.0 * h)?;
                    Some(full_domain_solve(&mc, s.k, eps, s.tol, s.seed)?.1.values)
                } else {
                    None
                };
                let mut rows = Vec::new();
                for i in 0..s.k {
                    let u = pair.to_nodal(&res.vectors[i], m.node_count());
                    let shifted = res.values[i] - thr;
                    rows.push(SpectrumRow {
                        eps,
                        k: i + 1,
                        lambda_eps: res.values[i],
                        shifted,
                        lambda_limit: limit[i],
                        gap: (shifted - limit[i]).abs(),
                        vertex_mass_fraction: vertex_mass_fraction(&m, &u)?,
                        converged: res.converged[i],
                        richardson: coarse.as_ref().map(|c| richardson_error(res.values[i], c[i])),
                    });
                }
                Ok(PointResult {
                    rows,
                    info: SolveInfo {
                        eps,
                        h,
                        nodes: m.node_count(),
                        dofs: pair.dim(),
                        cross_intervals: ny,
                        threshold: thr,
                        shift: res.shift,
                        iterations: res.iterations,
                        max_residual: res.residuals.iter().cloned().fold(0.0, f64::max),
                        error: None,
                    },
                })
            };
            run().unwrap_or_else(|e| PointResult {
                rows: Vec::new(),
                info: SolveInfo {
                    eps,
                    h,
                    nodes: 0,
                    dofs: 0,
                    cross_intervals: None,
                    threshold: threshold(eps, ShiftMode::Exact, None),
                    shift: f64::NAN,
                    iterations: 0,
                    max_residual: f64::NAN,
                    error: Some(e.to_string()),
                },
            })
        })
        .collect();

    let mut rows = Vec::new();
    let mut solves = Vec::new();
    for p in points {
        rows.extend(p.rows);
        solves.push(p.info);
    }
    let rates = (1..=s.k)
        .map(|k| {
            let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.k == k).map(|r| (r.eps, r.gap)).collect();
            RateEntry { k, fit: rate_fit(&pts) }
        })
        .collect();
    Ok(SpectrumReport {
        rows,
        rates,
        smallness,
        smallness_flagged: flagged,
        solves,
        shift_mode: s.shift,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub eps: f64,
    pub h: f64,
    pub gap_factor: f64,
    /// `G·π²/(4ε²)`.
    pub closed_form_shifted: f64,
    pub trial_shifted: f64,
    pub lambda1: f64,
    pub lambda1_shifted: f64,
    /// `ε²·(λ₁ − π²/(4ε²))`.
    pub scaled: f64,
    pub min_max_holds: bool,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub alpha: f64,
    pub length: f64,
    pub cutoff: f64,
    pub rows: Vec<CounterexampleRow>,
    /// `(max − min)/|mean|` of the scaled column.
    pub scaled_spread: f64,
}

/// Closed form, trial Rayleigh quotient and computed `λ₁` for each ε.
pub fn counterexample_run(
    alpha: f64,
    length: f64,
    c: f64,
    eps_list: &[f64],
    h_factor: f64,
    seed: u64,
) -> Result<CounterexampleReport, LabError> {
    let g = counterexample_gap_factor(alpha, c)?;
    let rows: Result<Vec<CounterexampleRow>, LabError> = eps_list
        .par_iter()
        .map(|&eps| {
            let thr = PI * PI / (4.0 * eps * eps);
            let h = h_factor * eps;
            let d = build_counterexample_domain_with_cutoff(alpha, length, eps, c)?;
            let m = mesh(&d.complex, h)?;
            let u = trial_field(&d, &m, c)?;
            let (pair, res) = full_domain_solve(&m, 1, eps, 1e-10, seed)?;
            let rq = rayleigh_quotient(&pair, &pair.from_nodal(&u))?;
            let l1 = res.values[0];
            Ok(CounterexampleRow {
                eps,
                h,
                gap_factor: g,
                closed_form_shifted: g * thr,
                trial_shifted: rq - thr,
                lambda1: l1,
                lambda1_shifted: l1 - thr,
                scaled: eps * eps * (l1 - thr),
                min_max_holds: l1 <= rq * (1.0 + 1e-9),
                converged: res.converged[0],
            })
        })
        .collect();
    let rows = rows?;
    let scaled: Vec<f64> = rows.iter().map(|r| r.scaled).collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
    Ok(CounterexampleReport {
        alpha,
        length,
        cutoff: c,
        rows,
        scaled_spread: (max - min) / mean.abs(),
    })
}
