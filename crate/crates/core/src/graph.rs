//! Metric graphs and the decoupled limit operator `⊕ⱼ (−d²/dx² − κⱼ²/4)` with
//! Dirichlet conditions at every edge endpoint.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigen::{self, EigenError, EigenOptions};
use crate::num::{norm, sub, Point, Real};
use crate::sparse::{CsrMatrix, SparsePair, TripletBuilder};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge {edge} references missing vertex {vertex}")]
    DanglingEndpoint { edge: usize, vertex: usize },
    #[error("edge {edge} has nonpositive length")]
    NonPositiveLength { edge: usize },
    #[error("edge {edge}: curvature support touches endpoint")]
    SupportTouchesEndpoint { edge: usize },
    #[error("edge {edge}: endpoint distance {chord} exceeds length {length}")]
    ChordTooLong { edge: usize, chord: f64, length: f64 },
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(usize),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(usize),
    #[error("edge {edge} is curved; the closed form needs straight edges")]
    CurvedEdge { edge: usize },
    #[error("grid of {n} intervals too small for {count} eigenvalues (need n >= count + 2)")]
    GridTooSmall { n: usize, count: usize },
    #[error("eigensolver failed: {0}")]
    Solver(String),
}

impl<T: Real> From<EigenError<T>> for GraphError {
    fn from(e: EigenError<T>) -> Self {
        GraphError::Solver(e.to_string())
    }
}

/// Signed curvature of an edge as a function of arclength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvatureProfile<T> {
    Zero,
    /// Constant curvature; only meaningful for closed tubes.
    Constant {
        value: T,
    },
    /// `a (1 − ((x − c)/w)²)³` on `[c − w, c + w]`, zero elsewhere.
    Bump {
        center: T,
        half_width: T,
        amplitude: T,
    },
}

impl<T: Real> CurvatureProfile<T> {
    pub fn is_zero(&self) -> bool {
        match *self {
            CurvatureProfile::Zero => true,
            CurvatureProfile::Constant { value } => value == T::zero(),
            CurvatureProfile::Bump { amplitude, .. } => amplitude == T::zero(),
        }
    }

    /// `(κ, κ′, κ″)` at arclength `x`.
    pub fn triple(&self, x: T) -> (T, T, T) {
        match *self {
            CurvatureProfile::Zero => (T::zero(), T::zero(), T::zero()),
            CurvatureProfile::Constant { value } => (value, T::zero(), T::zero()),
            CurvatureProfile::Bump {
                center,
                half_width,
                amplitude,
            } => {
                let s = (x - center) / half_width;
                if s.abs() >= T::one() {
                    return (T::zero(), T::zero(), T::zero());
                }
                let q = T::one() - s * s;
                let six = T::lit(6.0);
                let k = amplitude * q * q * q;
                let dk = -six * amplitude * s * q * q / half_width;
                let ddk = -six * amplitude * q * (T::one() - T::lit(5.0) * s * s) / (half_width * half_width);
                (k, dk, ddk)
            }
        }
    }

    pub fn curvature(&self, x: T) -> T {
        self.triple(x).0
    }

    /// Closed support interval; `None` for the zero profile, the whole line for constants.
    pub fn support(&self) -> Option<(T, T)> {
        match *self {
            _ if self.is_zero() => None,
            CurvatureProfile::Constant { .. } => Some((T::neg_infinity(), T::infinity())),
            CurvatureProfile::Bump { center, half_width, .. } => Some((center - half_width, center + half_width)),
            CurvatureProfile::Zero => None,
        }
    }

    /// `(sup|κ|, sup|κ′|, sup|κ″|)`.
    pub fn sup_norms(&self) -> (T, T, T) {
        match *self {
            CurvatureProfile::Zero => (T::zero(), T::zero(), T::zero()),
            CurvatureProfile::Constant { value } => (value.abs(), T::zero(), T::zero()),
            CurvatureProfile::Bump {
                half_width, amplitude, ..
            } => {
                let a = amplitude.abs();
                // max of s(1 − s²)² at s = 1/√5; max |(1 − t)(1 − 5t)| on [0,1] is 1
                let peak = T::lit(16.0 / 25.0) / T::lit(5.0).sqrt();
                let six = T::lit(6.0);
                (a, six * a * peak / half_width, six * a / (half_width * half_width))
            }
        }
    }
}

/// The fixed cross-section `F = (−1, 1)` with Dirichlet ends.
#[derive(Clone, Copy, Debug, Default)]
pub struct CrossSection;

impl CrossSection {
    pub const HALF_WIDTH: f64 = 1.0;

    pub fn lambda1<T: Real>() -> T {
        T::PI() * T::PI() / T::lit(4.0)
    }

    pub fn lambda2<T: Real>() -> T {
        T::PI() * T::PI()
    }

    /// Normalised first mode `cos(πy/2)`.
    pub fn phi<T: Real>(y: T) -> T {
        (T::FRAC_PI_2() * y).cos()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex<T> {
    pub id: usize,
    pub position: Point<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge<T> {
    pub id: usize,
    pub start: usize,
    pub end: usize,
    pub length: T,
    #[serde(default = "zero_profile")]
    pub curvature: CurvatureProfile<T>,
}

fn zero_profile<T>() -> CurvatureProfile<T> {
    CurvatureProfile::Zero
}

impl<T: Real> Edge<T> {
    pub fn straight(id: usize, start: usize, end: usize, length: T) -> Self {
        Self {
            id,
            start,
            end,
            length,
            curvature: CurvatureProfile::Zero,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph<T> {
    vertices: Vec<Vertex<T>>,
    edges: Vec<Edge<T>>,
    adjacency: BTreeMap<usize, Vec<usize>>,
}

impl<T: Real> MetricGraph<T> {
    /// Builds and validates a graph.
    pub fn new(vertices: Vec<Vertex<T>>, edges: Vec<Edge<T>>) -> Result<Self, GraphError> {
        let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in &vertices {
            if adjacency.insert(v.id, Vec::new()).is_some() {
                return Err(GraphError::DuplicateVertex(v.id));
            }
        }
        let mut seen = BTreeSet::new();
        for e in &edges {
            if !seen.insert(e.id) {
                return Err(GraphError::DuplicateEdge(e.id));
            }
            for v in [e.start, e.end] {
                adjacency
                    .get_mut(&v)
                    .ok_or(GraphError::DanglingEndpoint { edge: e.id, vertex: v })?
                    .push(e.id);
            }
        }
        validate_graph(Self {
            vertices,
            edges,
            adjacency,
        })
    }

    /// Star with one center vertex (id 0) and straight edges of the given
    /// lengths along the given unit directions.
    pub fn star(directions: &[Point<T>], lengths: &[T]) -> Result<Self, GraphError> {
        assert_eq!(directions.len(), lengths.len());
        let mut vertices = vec![Vertex {
            id: 0,
            position: [T::zero(), T::zero()],
        }];
        let mut edges = Vec::new();
        for (j, (d, &l)) in directions.iter().zip(lengths).enumerate() {
            vertices.push(Vertex {
                id: j + 1,
                position: [d[0] * l, d[1] * l],
            });
            edges.push(Edge::straight(j, 0, j + 1, l));
        }
        Self::new(vertices, edges)
    }

    pub fn vertices(&self) -> &[Vertex<T>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn vertex(&self, id: usize) -> Option<&Vertex<T>> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn edge(&self, id: usize) -> Option<&Edge<T>> {
        self.edges.iter().find(|e| e.id == id)
    }

    /// Incident edge ids `J_k` of vertex `id` (a loop appears twice).
    pub fn incident(&self, id: usize) -> &[usize] {
        self.adjacency.get(&id).map_or(&[], Vec::as_slice)
    }

    pub fn degree(&self, id: usize) -> usize {
        self.incident(id).len()
    }

    pub fn is_straight(&self) -> bool {
        self.edges.iter().all(|e| e.curvature.is_zero())
    }
}

/// Checks every structural invariant and returns the graph unchanged.
pub fn validate_graph<T: Real>(g: MetricGraph<T>) -> Result<MetricGraph<T>, GraphError> {
    for e in &g.edges {
        if !(e.length > T::zero()) {
            return Err(GraphError::NonPositiveLength { edge: e.id });
        }
        let (a, b) = match (g.vertex(e.start), g.vertex(e.end)) {
            (Some(a), Some(b)) => (a, b),
            (None, _) => {
                return Err(GraphError::DanglingEndpoint {
                    edge: e.id,
                    vertex: e.start,
                })
            }
            (_, None) => {
                return Err(GraphError::DanglingEndpoint {
                    edge: e.id,
                    vertex: e.end,
                })
            }
        };
        if let Some((lo, hi)) = e.curvature.support() {
            if !(lo > T::zero() && hi < e.length) {
                return Err(GraphError::SupportTouchesEndpoint { edge: e.id });
            }
        }
        let chord = norm(sub(b.position, a.position));
        if chord > e.length * (T::one() + T::lit(1e-9)) {
            return Err(GraphError::ChordTooLong {
                edge: e.id,
                chord: chord.as_f64(),
                length: e.length.as_f64(),
            });
        }
    }
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitEntry<T> {
    pub value: T,
    pub edge: usize,
    /// 1-based mode index on the edge.
    pub index: usize,
}

/// Lowest eigenvalues of the decoupled limit operator, ascending, ties kept.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitSpectrum<T> {
    pub entries: Vec<LimitEntry<T>>,
    pub count: usize,
}

impl<T: Real> LimitSpectrum<T> {
    fn from_entries(mut entries: Vec<LimitEntry<T>>, count: usize) -> Self {
        entries.sort_by(|a, b| {
            a.value
                .partial_cmp(&b.value)
                .unwrap_or(Ordering::Equal)
                .then(a.edge.cmp(&b.edge))
                .then(a.index.cmp(&b.index))
        });
        entries.truncate(count);
        Self { entries, count }
    }

    pub fn values(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.value).collect()
    }
}

/// Dirichlet interval closed form `(nπ/ℓ)²`.
pub fn dirichlet_interval_eigenvalue<T: Real>(length: T, n: usize) -> T {
    let k = T::from_usize_lossy(n) * T::PI() / length;
    k * k
}

/// The `count` smallest values of `{(nπ/ℓⱼ)²}` over all (straight) edges.
pub fn straight_limit_spectrum<T: Real>(g: &MetricGraph<T>, count: usize) -> Result<LimitSpectrum<T>, GraphError> {
    if let Some(e) = g.edges.iter().find(|e| !e.curvature.is_zero()) {
        return Err(GraphError::CurvedEdge { edge: e.id });
    }
    let entries = g
        .edges
        .iter()
        .flat_map(|e| {
            (1..=count).map(move |n| LimitEntry {
                value: dirichlet_interval_eigenvalue(e.length, n),
                edge: e.id,
                index: n,
            })
        })
        .collect();
    Ok(LimitSpectrum::from_entries(entries, count))
}

/// One-dimensional discretisation of the edge operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scheme1d {
    /// P1 elements, consistent mass, two-point Gauss for the potential.
    #[default]
    P1,
    /// Three-point finite differences with a diagonal mass.
    FiniteDifference,
}

/// Eigenvalue plus nodal eigenvector (including both zero end values), unit L²-normalised.
#[derive(Clone, Debug)]
pub struct EdgeMode<T> {
    pub value: T,
    pub nodes: Vec<T>,
    pub values_at_nodes: Vec<T>,
}

/// Assembles the Dirichlet pair of `−d²/dx² + V` on `(0, ℓ)` with `n` intervals.
pub fn edge_operator_pair<T: Real>(length: T, n: usize, potential: impl Fn(T) -> T, scheme: Scheme1d) -> SparsePair<T> {
    let h = length / T::from_usize_lossy(n);
    let dofs = n - 1;
    let mut k = TripletBuilder::new(dofs);
    let mut m = TripletBuilder::new(dofs);
    let x_of = |i: usize| T::from_usize_lossy(i) * h;
    match scheme {
        Scheme1d::P1 => {
            let g = T::lit(0.5) / T::lit(3.0).sqrt();
            let half = T::lit(0.5);
            for e in 0..n {
                let x0 = x_of(e);
                let ends = [e, e + 1];
                let stiff = [[T::one() / h, -T::one() / h], [-T::one() / h, T::one() / h]];
                let sixth = h / T::lit(6.0);
                let mass = [[sixth * T::lit(2.0), sixth], [sixth, sixth * T::lit(2.0)]];
                let mut pot = [[T::zero(); 2]; 2];
                for xi in [half - g, half + g] {
                    let v = potential(x0 + xi * h) * h * half;
                    let phi = [T::one() - xi, xi];
                    for a in 0..2 {
                        for b in 0..2 {
                            pot[a][b] += v * phi[a] * phi[b];
                        }
                    }
                }
                for a in 0..2 {
                    for b in 0..2 {
                        let (ia, ib) = (ends[a], ends[b]);
                        if ia == 0 || ia == n || ib == 0 || ib == n {
                            continue;
                        }
                        k.add(ia - 1, ib - 1, stiff[a][b] + pot[a][b]);
                        m.add(ia - 1, ib - 1, mass[a][b]);
                    }
                }
            }
        }
        Scheme1d::FiniteDifference => {
            for i in 1..n {
                let r = i - 1;
                k.add(r, r, T::lit(2.0) / h + potential(x_of(i)) * h);
                if i + 1 < n {
                    k.add(r, r + 1, -T::one() / h);
                    k.add(r + 1, r, -T::one() / h);
                }
                m.add(r, r, h);
            }
        }
    }
    let mut pair = SparsePair::new(k.build(), m.build());
    pair.dof_nodes = (1..n).collect();
    pair
}

/// Lowest `count` eigenvalues of `−d²/dx² − κ²/4` on one edge (P1, `n` intervals).
pub fn limit_spectrum_1d<T: Real>(e: &Edge<T>, n: usize, count: usize) -> Result<Vec<T>, GraphError> {
    limit_spectrum_1d_with(e, n, count, Scheme1d::P1)
}

pub fn limit_spectrum_1d_with<T: Real>(
    e: &Edge<T>,
    n: usize,
    count: usize,
    scheme: Scheme1d,
) -> Result<Vec<T>, GraphError> {
    Ok(limit_modes_1d(e, n, count, scheme)?
        .into_iter()
        .map(|m| m.value)
        .collect())
}

pub fn limit_modes_1d<T: Real>(
    e: &Edge<T>,
    n: usize,
    count: usize,
    scheme: Scheme1d,
) -> Result<Vec<EdgeMode<T>>, GraphError> {
    if n < count + 2 {
        return Err(GraphError::GridTooSmall { n, count });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let profile = e.curvature;
    let quarter = T::lit(0.25);
    let pair = edge_operator_pair(
        e.length,
        n,
        |x| {
            let k = profile.curvature(x);
            -quarter * k * k
        },
        scheme,
    );
    let opts = EigenOptions {
        tol: T::lit(1e-8).max(T::epsilon() * T::lit(1e3)),
        ..EigenOptions::default()
    };
    let res = eigen::lowest_eigenpairs_with(&pair, count, &opts)?;
    let h = e.length / T::from_usize_lossy(n);
    let nodes: Vec<T> = (0..=n).map(|i| T::from_usize_lossy(i) * h).collect();
    Ok(res
        .values
        .iter()
        .zip(&res.vectors)
        .map(|(&value, v)| {
            let mut vals = vec![T::zero(); n + 1];
            vals[1..n].copy_from_slice(v);
            // fix sign: positive first lobe
            let first = vals
                .iter()
                .copied()
                .find(|x| x.abs() > T::lit(1e-12))
                .unwrap_or(T::one());
            if first < T::zero() {
                vals.iter_mut().for_each(|x| *x = -*x);
            }
            EdgeMode {
                value,
                nodes: nodes.clone(),
                values_at_nodes: vals,
            }
        })
        .collect())
}

/// Sorted merge over all edges: closed form on straight edges, P1 with `n`
/// intervals on curved ones.
pub fn merged_limit_spectrum<T: Real>(
    g: &MetricGraph<T>,
    n: usize,
    count: usize,
) -> Result<LimitSpectrum<T>, GraphError> {
    let mut entries = Vec::new();
    if count == 0 {
        return Ok(LimitSpectrum { entries, count });
    }
    for e in &g.edges {
        if e.curvature.is_zero() {
            entries.extend((1..=count).map(|i| LimitEntry {
                value: dirichlet_interval_eigenvalue(e.length, i),
                edge: e.id,
                index: i,
            }));
        } else {
            let vals = limit_spectrum_1d(e, n, count)?;
            entries.extend(vals.into_iter().enumerate().map(|(i, value)| LimitEntry {
                value,
                edge: e.id,
                index: i + 1,
            }));
        }
    }
    Ok(LimitSpectrum::from_entries(entries, count))
}

#[derive(Debug, Error, PartialEq)]
#[error("comparison bound needs 0 <= δ₁ < 1/(1 + Λ + λ) and nonnegative arguments")]
pub struct EtaDomainError;

/// `η = (λδ₁ + δ₂)(1 + Λ + λ) / (1 − (1 + Λ + λ)δ₁)`.
pub fn eta_bound<T: Real>(lambda: T, delta1: T, delta2: T, big_lambda: T) -> Result<T, EtaDomainError> {
    let zero = T::zero();
    if lambda < zero || delta1 < zero || delta2 < zero || big_lambda < zero {
        return Err(EtaDomainError);
    }
    let s = T::one() + big_lambda + lambda;
    if !(delta1 * s < T::one()) {
        return Err(EtaDomainError);
    }
    Ok((lambda * delta1 + delta2) * s / (T::one() - s * delta1))
}

/// Mass matrix of the 1D P1 pair on `(0, ℓ)` as a dense helper for tests and diagnostics.
pub fn p1_mass_1d<T: Real>(length: T, n: usize) -> CsrMatrix<T> {
    edge_operator_pair(length, n, |_| T::zero(), Scheme1d::P1).mass
}
