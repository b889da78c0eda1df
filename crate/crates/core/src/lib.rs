// NaN-rejecting comparisons like `!(x > 0.0)` are intentional; index loops mirror the formulas
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod eigen;
pub mod fem;
pub mod geometry;
pub mod graph;
pub mod lab;
pub mod num;
pub mod sparse;

/// Double-precision instantiations used by the experiment layer and the CLI.
pub type Graph = graph::MetricGraph<f64>;
pub type Edge = graph::Edge<f64>;
pub type Shape = geometry::VertexShape<f64>;
pub type Complex = geometry::PatchComplex<f64>;
pub type Counterexample = geometry::CounterexampleDomain<f64>;
pub type Mesh = fem::TriMesh<f64>;
pub type Csr = sparse::CsrMatrix<f64>;
pub type Pair = sparse::SparsePair<f64>;
pub type Eigenpairs = eigen::EigenResult<f64>;
