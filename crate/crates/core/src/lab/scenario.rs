//! Scenario files: TOML documents describing one experiment.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{make_vertex_shape, VertexShape};
use crate::graph::{CurvatureProfile, Edge, MetricGraph, Vertex};

use super::analysis::ShiftMode;
use super::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    #[default]
    Sweep,
    Counterexample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub kind: ScenarioKind,
    /// Strictly decreasing.
    pub eps: Vec<f64>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub shift: ShiftMode,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub mesh: MeshRule,
    #[serde(default)]
    pub limit: LimitRule,
    pub graph: Option<GraphSpec>,
    #[serde(default)]
    pub shapes: Vec<ShapeSpec>,
    pub counterexample: Option<CounterexampleSpec>,
}

fn default_k() -> usize {
    3
}

fn default_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshRule {
    /// `h(ε) = h_factor · ε`.
    #[serde(default = "default_h_factor")]
    pub h_factor: f64,
    /// Also solve at `2h` for a Richardson error estimate.
    #[serde(default = "default_true")]
    pub richardson: bool,
    /// Mesh width for the unscaled vertex-shape smallness problems.
    #[serde(default = "default_shape_h")]
    pub shape_h: f64,
}

fn default_h_factor() -> f64 {
    1.0 / 16.0
}

fn default_true() -> bool {
    true
}

fn default_shape_h() -> f64 {
    1.0 / 16.0
}

impl Default for MeshRule {
    fn default() -> Self {
        Self {
            h_factor: default_h_factor(),
            richardson: true,
            shape_h: default_shape_h(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitRule {
    /// Intervals per curved edge for the 1D limit operator.
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_grid() -> usize {
    4000
}

impl Default for LimitRule {
    fn default() -> Self {
        Self { grid: default_grid() }
    }
}

/// Either an explicit vertex/edge list or a star around the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    #[serde(default)]
    pub vertices: Vec<VertexSpec>,
    #[serde(default)]
    pub edges: Vec<EdgeSpec>,
    pub star: Option<StarSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSpec {
    pub id: usize,
    pub position: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: usize,
    pub start: usize,
    pub end: usize,
    pub length: f64,
    #[serde(default = "zero_profile")]
    pub curvature: CurvatureProfile<f64>,
}

fn zero_profile() -> CurvatureProfile<f64> {
    CurvatureProfile::Zero
}

/// Star with centre vertex 0; edge `j` points at `angles_deg[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarSpec {
    pub angles_deg: Vec<f64>,
    pub lengths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    pub vertex: usize,
    #[serde(default)]
    pub tau: f64,
    pub d_attach: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSpec {
    pub alpha: f64,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
}

fn default_length() -> f64 {
    1.0
}

fn default_cutoff() -> f64 {
    crate::geometry::DEFAULT_CUTOFF
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        let de = toml::Deserializer::new(text);
        let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let message = e.inner().message().to_string();
            let mut path = e.path().to_string();
            // serde reports a missing field at its parent; name the field itself
            if let Some(field) = message
                .strip_prefix("missing field `")
                .and_then(|m| m.split('`').next())
            {
                path = if path == "." {
                    field.to_string()
                } else {
                    format!("{path}.{field}")
                };
            }
            LabError::Schema { path, message }
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let schema = |path: &str, message: &str| {
            Err(LabError::Schema {
                path: path.into(),
                message: message.into(),
            })
        };
        if self.eps.is_empty() {
            return schema("eps", "at least one value required");
        }
        if self.eps.iter().any(|e| !(*e > 0.0)) {
            return schema("eps", "values must be positive");
        }
        if self.eps.windows(2).any(|w| !(w[1] < w[0])) {
            return schema("eps", "must be strictly decreasing");
        }
        if self.k == 0 {
            return schema("k", "must be at least 1");
        }
        if !(self.mesh.h_factor > 0.0) || !(self.mesh.shape_h > 0.0) {
            return schema("mesh", "mesh widths must be positive");
        }
        match self.kind {
            ScenarioKind::Sweep if self.graph.is_none() => schema("graph", "missing field for a sweep"),
            ScenarioKind::Counterexample if self.counterexample.is_none() => {
                schema("counterexample", "missing field for a counterexample run")
            }
            _ => Ok(()),
        }
    }

    pub fn build_graph(&self) -> Result<MetricGraph<f64>, LabError> {
        let spec = self.graph.as_ref().ok_or(LabError::Schema {
            path: "graph".into(),
            message: "missing".into(),
        })?;
        if let Some(star) = &spec.star {
            if !spec.vertices.is_empty() || !spec.edges.is_empty() {
                return Err(LabError::Schema {
                    path: "graph".into(),
                    message: "give either `star` or `vertices`/`edges`".into(),
                });
            }
            if star.angles_deg.len() != star.lengths.len() {
                return Err(LabError::Schema {
                    path: "graph.star".into(),
                    message: "angles_deg and lengths differ in length".into(),
                });
            }
            let dirs: Vec<[f64; 2]> = star
                .angles_deg
                .iter()
                .map(|a| {
                    let r = a.to_radians();
                    [r.cos(), r.sin()]
                })
                .collect();
            return Ok(MetricGraph::star(&dirs, &star.lengths)?);
        }
        let vertices = spec
            .vertices
            .iter()
            .map(|v| Vertex {
                id: v.id,
                position: v.position,
            })
            .collect();
        let edges = spec
            .edges
            .iter()
            .map(|e| {
                let mut edge = Edge::straight(e.id, e.start, e.end, e.length);
                edge.curvature = e.curvature;
                edge
            })
            .collect();
        Ok(MetricGraph::new(vertices, edges)?)
    }

    /// Vertex shapes with directions taken from the incident edges.
    pub fn build_shapes(&self, g: &MetricGraph<f64>) -> Result<BTreeMap<usize, VertexShape<f64>>, LabError> {
        let mut out = BTreeMap::new();
        for (i, s) in self.shapes.iter().enumerate() {
            let v = g.vertex(s.vertex).ok_or(LabError::Schema {
                path: format!("shapes[{i}].vertex"),
                message: format!("no vertex {}", s.vertex),
            })?;
            let dirs: Vec<[f64; 2]> = g
                .incident(s.vertex)
                .iter()
                .map(|&e| {
                    let e = g.edge(e).expect("incident");
                    let other = if e.start == v.id { e.end } else { e.start };
                    let p = g.vertex(other).expect("validated").position;
                    [p[0] - v.position[0], p[1] - v.position[1]]
                })
                .collect();
            out.insert(s.vertex, make_vertex_shape(&dirs, s.tau, s.d_attach)?);
        }
        Ok(out)
    }
}
