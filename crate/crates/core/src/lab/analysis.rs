//! Post-processing of computed spectra and eigenvectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eigen::dense::{generalized_eigen, DenseMatrix};
use crate::fem::{element_matrices, TriMesh};
use crate::geometry::Region;
use crate::graph::{edge_operator_pair, Scheme1d};

use super::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShiftMode {
    Exact,
    /// Discrete first cross-section eigenvalue of the same transversal grid.
    #[default]
    Mesh,
}

/// Lowest Dirichlet eigenvalue of the uniform P1 discretisation of `−d²/dy²` on
/// `(−1, 1)` with `ny` intervals: `(6/Δ²)(1 − cos θ)/(2 + cos θ)`, `θ = π/ny`.
pub fn discrete_cross_section_eigenvalue(ny: usize) -> f64 {
    let dy = 2.0 / ny as f64;
    let c = (std::f64::consts::PI / ny as f64).cos();
    6.0 / (dy * dy) * (1.0 - c) / (2.0 + c)
}

/// Transversal threshold `λ₁/ε²` subtracted before comparing with the limit.
pub fn threshold(eps: f64, mode: ShiftMode, ny: Option<usize>) -> f64 {
    match (mode, ny) {
        (ShiftMode::Mesh, Some(ny)) => discrete_cross_section_eigenvalue(ny) / (eps * eps),
        _ => std::f64::consts::PI * std::f64::consts::PI / (4.0 * eps * eps),
    }
}

pub fn shifted_spectrum(values: &[f64], eps: f64, mode: ShiftMode, ny: Option<usize>) -> Vec<f64> {
    let t = threshold(eps, mode, ny);
    values.iter().map(|v| v - t).collect()
}

/// Cross-section interval count of the strips of a mesh built at scale `eps`.
pub fn cross_intervals(mesh: &TriMesh<f64>, eps: f64) -> Option<usize> {
    let p = mesh.patches.iter().position(|p| matches!(p.region, Region::Edge(_)))?;
    let patch = &mesh.patches[p];
    let width = match patch.coefficients {
        crate::geometry::Coefficients::TubeReference { .. } => 2.0,
        _ => 2.0 * eps,
    };
    let cell = patch.side_length(1) / mesh.counts[p][1] as f64;
    Some((width / cell).round() as usize)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RateFit {
    Fitted {
        slope: f64,
    },
    /// Some gap was zero or negative, i.e. below the discretisation floor.
    Saturated,
    TooFewPoints,
}

/// Least-squares slope of `log gap` against `log ε`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<f64, LabError> {
    if points.len() < 2 {
        return Err(LabError::Rate("need at least two points".into()));
    }
    if let Some(&(e, g)) = points.iter().find(|(e, g)| !(*g > 0.0) || !(*e > 0.0)) {
        return Err(LabError::Rate(format!(
            "nonpositive value at eps = {e}: gap {g} (saturated by discretisation)"
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(LabError::Rate("all eps values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

pub fn rate_fit(points: &[(f64, f64)]) -> RateFit {
    if points.len() < 2 {
        return RateFit::TooFewPoints;
    }
    match fit_rate(points) {
        Ok(slope) => RateFit::Fitted { slope },
        Err(_) => RateFit::Saturated,
    }
}

/// Column integrals `∫ u(x, y) cos(πy/2) dy` (trapezoid rule) on a tube mesh.
pub fn transversal_average(mesh: &TriMesh<f64>, u: &[f64]) -> Result<Vec<(f64, f64)>, LabError> {
    let cols = mesh.columns.as_ref().ok_or(LabError::NoColumns)?;
    let phi: Vec<f64> = cols.y.iter().map(|y| (std::f64::consts::FRAC_PI_2 * y).cos()).collect();
    Ok(cols
        .x
        .iter()
        .zip(&cols.nodes)
        .map(|(&x, ids)| {
            let mut s = 0.0;
            for j in 0..ids.len() - 1 {
                let dy = cols.y[j + 1] - cols.y[j];
                s += 0.5 * dy * (u[ids[j]] * phi[j] + u[ids[j + 1]] * phi[j + 1]);
            }
            (x, s)
        })
        .collect())
}

/// `‖u‖²` over vertex-region triangles divided by `‖u‖²` over the whole mesh.
pub fn vertex_mass_fraction(mesh: &TriMesh<f64>, u: &[f64]) -> Result<f64, LabError> {
    let mut vertex = 0.0;
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        let (_, me) = element_matrices(mesh, t)?;
        let tri = mesh.triangles[t];
        let mut q = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                q += u[tri[a]] * me[a][b] * u[tri[b]];
            }
        }
        total += q;
        if matches!(mesh.region(t), Region::Vertex(_)) {
            vertex += q;
        }
    }
    if !(total > 0.0) {
        return Err(LabError::ZeroField);
    }
    Ok(vertex / total)
}

/// Discrete transversal data on `(−1, 1)`: stiffness, mass, `λ₁ ≤ λ₂` and the M-normalised `φ`.
pub struct CrossSectionPair {
    pub stiffness: DenseMatrix<f64>,
    pub mass: DenseMatrix<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub phi: Vec<f64>,
    pub second: Vec<f64>,
}

pub fn cross_section_pair(n: usize) -> Result<CrossSectionPair, LabError> {
    if n < 4 {
        return Err(LabError::Rate("cross-section grid needs at least 4 intervals".into()));
    }
    let pair = edge_operator_pair(2.0, n, |_| 0.0, Scheme1d::P1);
    let k = DenseMatrix::from_rows(&pair.stiffness.to_dense());
    let m = DenseMatrix::from_rows(&pair.mass.to_dense());
    let eig = generalized_eigen(&k, &m, true).ok_or(LabError::Dense)?;
    let vecs = eig.vectors.ok_or(LabError::Dense)?;
    let fix = |mut v: Vec<f64>| {
        let s: f64 = v.iter().sum();
        if s < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    };
    Ok(CrossSectionPair {
        lambda1: eig.values[0],
        lambda2: eig.values[1],
        phi: fix(vecs[0].clone()),
        second: vecs[1].clone(),
        stiffness: k,
        mass: m,
    })
}

fn quad(a: &DenseMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += x[i] * a.at(i, j) * y[j];
        }
    }
    s
}

/// `‖v‖² − ⟨v, φ⟩² − (‖v′‖² − λ₁‖v‖²)/(λ₂ − λ₁)` for a field normalised to `‖v‖ = 1`.
pub fn transversal_gap_violation(cs: &CrossSectionPair, v: &[f64]) -> f64 {
    let nv = quad(&cs.mass, v, v);
    let scale = 1.0 / nv.sqrt();
    let v: Vec<f64> = v.iter().map(|x| x * scale).collect();
    let norm2 = quad(&cs.mass, &v, &v);
    let proj = quad(&cs.mass, &v, &cs.phi);
    let energy = quad(&cs.stiffness, &v, &v);
    (norm2 - proj * proj) - (energy - cs.lambda1 * norm2) / (cs.lambda2 - cs.lambda1)
}

/// Largest violation of the transversal-mode estimate over seeded random fields.
pub fn transversal_gap_check(samples: usize, n: usize, seed: u64) -> Result<f64, LabError> {
    let cs = cross_section_pair(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let v: Vec<f64> = (0..n - 1).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        worst = worst.max(transversal_gap_violation(&cs, &v));
    }
    Ok(worst)
}

/// Two-mesh estimate of the `O(h²)` error of a value computed at `h` from its value at `2h`.
pub fn richardson_error(fine: f64, coarse: f64) -> f64 {
    (coarse - fine).abs() / 3.0
}
