//! Structured triangulation of patch complexes with conforming interfaces.

use std::collections::HashMap;

use crate::geometry::{Patch, PatchComplex, Region, SideState};
use crate::num::{norm, sub, Point, Real};

use super::FemError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeTag {
    Interior,
    Dirichlet,
    Neumann,
}

/// Node grid of a single-rectangle tube mesh: `nodes[i][j]` sits at `(x[i], y[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct Columns<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub nodes: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct TriMesh<T> {
    pub nodes: Vec<Point<T>>,
    /// Counter-clockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub node_tags: Vec<NodeTag>,
    pub triangle_patch: Vec<usize>,
    /// One patch containing each node (the first one that generated it).
    pub node_patch: Vec<usize>,
    /// Subdivision counts `[n_u, n_v]` per patch.
    pub counts: Vec<[usize; 2]>,
    pub patches: Vec<Patch<T>>,
    pub columns: Option<Columns<T>>,
}

impl<T: Real> TriMesh<T> {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn region(&self, triangle: usize) -> Region {
        self.patches[self.triangle_patch[triangle]].region
    }

    pub fn triangle_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        crate::num::cross(sub(b, a), sub(c, a)) * T::lit(0.5)
    }

    pub fn area(&self) -> T {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn count_tag(&self, tag: NodeTag) -> usize {
        self.node_tags.iter().filter(|t| **t == tag).count()
    }

    /// Largest triangle side.
    pub fn max_edge(&self) -> T {
        let mut m = T::zero();
        for tri in &self.triangles {
            for k in 0..3 {
                m = m.max(norm(sub(self.nodes[tri[k]], self.nodes[tri[(k + 1) % 3]])));
            }
        }
        m
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Subdivision counts forced equal on opposite and identified sides, each class
/// using `ceil(longest side / h)` intervals. Cross sections of all edge strips
/// (side 1 of every edge patch) share one class.
pub fn subdivision_counts<T: Real>(domain: &PatchComplex<T>, h: T) -> Result<Vec<[usize; 2]>, FemError> {
    if !(h > T::zero()) {
        return Err(FemError::InvalidWidth(h.as_f64()));
    }
    let min_side = domain.min_side_length();
    if h > min_side * (T::one() + T::lit(1e-12)) {
        return Err(FemError::WidthTooLarge {
            h: h.as_f64(),
            min_side: min_side.as_f64(),
        });
    }
    let np = domain.patches.len();
    let mut uf = UnionFind((0..4 * np).collect());
    for (p, states) in domain.states.iter().enumerate() {
        uf.union(4 * p, 4 * p + 2);
        uf.union(4 * p + 1, 4 * p + 3);
        for (s, st) in states.iter().enumerate() {
            if let SideState::Identified { patch, side } = *st {
                uf.union(4 * p + s, 4 * patch + side);
            }
        }
    }
    // one transversal resolution for every strip so the threshold is well defined
    let strips: Vec<usize> = (0..np)
        .filter(|&p| matches!(domain.patches[p].region, Region::Edge(_)))
        .collect();
    for w in strips.windows(2) {
        uf.union(4 * w[0] + 1, 4 * w[1] + 1);
    }
    let mut need: HashMap<usize, usize> = HashMap::new();
    for (p, patch) in domain.patches.iter().enumerate() {
        for s in 0..4 {
            let n = (patch.side_length(s) / h).ceil().as_f64() as usize;
            let r = uf.find(4 * p + s);
            let e = need.entry(r).or_insert(1);
            *e = (*e).max(n.max(1));
        }
    }
    Ok((0..np)
        .map(|p| {
            let nu = need[&uf.find(4 * p)];
            let nv = need[&uf.find(4 * p + 1)];
            [nu, nv]
        })
        .collect())
}

/// Triangulates every patch on a mapped `n_u × n_v` grid, merging coincident nodes.
pub fn mesh<T: Real>(domain: &PatchComplex<T>, h: T) -> Result<TriMesh<T>, FemError> {
    let counts = subdivision_counts(domain, h)?;
    mesh_with_counts(domain, &counts)
}

pub fn mesh_with_counts<T: Real>(domain: &PatchComplex<T>, counts: &[[usize; 2]]) -> Result<TriMesh<T>, FemError> {
    assert_eq!(counts.len(), domain.patches.len());
    let scale = domain
        .patches
        .iter()
        .flat_map(|p| p.corners.iter())
        .map(|c| c[0].abs().max(c[1].abs()))
        .fold(T::one(), T::max);
    let quantum = T::lit(1e-9) * scale;
    let key = |p: Point<T>| {
        (
            (p[0] / quantum).round().as_f64() as i64,
            (p[1] / quantum).round().as_f64() as i64,
        )
    };
    let mut lookup: HashMap<(i64, i64), usize> = HashMap::new();
    let mut nodes: Vec<Point<T>> = Vec::new();
    let mut node_patch = Vec::new();
    let mut dirichlet = Vec::new();
    let mut neumann = Vec::new();
    let mut triangles = Vec::new();
    let mut triangle_patch = Vec::new();

    for (p, patch) in domain.patches.iter().enumerate() {
        let [nu, nv] = counts[p];
        let mut ids = vec![vec![0usize; nv + 1]; nu + 1];
        for (i, row) in ids.iter_mut().enumerate() {
            for (j, id) in row.iter_mut().enumerate() {
                let u = T::from_usize_lossy(i) / T::from_usize_lossy(nu);
                let v = T::from_usize_lossy(j) / T::from_usize_lossy(nv);
                let x = patch.map(u, v);
                let (kx, ky) = key(x);
                let mut found = None;
                'search: for dx in -1..=1 {
                    for dy in -1..=1 {
                        if let Some(&n) = lookup.get(&(kx + dx, ky + dy)) {
                            if norm(sub(nodes[n], x)) <= quantum * T::lit(2.0) {
                                found = Some(n);
                                break 'search;
                            }
                        }
                    }
                }
                *id = match found {
                    Some(n) => n,
                    None => {
                        nodes.push(x);
                        node_patch.push(p);
                        dirichlet.push(false);
                        neumann.push(false);
                        lookup.insert((kx, ky), nodes.len() - 1);
                        nodes.len() - 1
                    }
                };
                // side membership: s0 v=0, s1 u=1, s2 v=1, s3 u=0
                let on = [j == 0, i == nu, j == nv, i == 0];
                for s in 0..4 {
                    if on[s] {
                        match domain.states[p][s] {
                            SideState::Dirichlet => dirichlet[*id] = true,
                            SideState::Neumann => neumann[*id] = true,
                            SideState::Identified { .. } => {}
                        }
                    }
                }
            }
        }
        for i in 0..nu {
            for j in 0..nv {
                let a = ids[i][j];
                let b = ids[i + 1][j];
                let c = ids[i + 1][j + 1];
                let d = ids[i][j + 1];
                let ac = norm(sub(nodes[c], nodes[a]));
                let bd = norm(sub(nodes[d], nodes[b]));
                // shorter diagonal; ties resolved towards a–c for determinism
                let tris = if bd < ac * (T::one() - T::lit(1e-12)) {
                    [[a, b, d], [b, c, d]]
                } else {
                    [[a, b, c], [a, c, d]]
                };
                for t in tris {
                    triangles.push(t);
                    triangle_patch.push(p);
                }
            }
        }
    }
    let node_tags = dirichlet
        .iter()
        .zip(&neumann)
        .map(|(&d, &n)| {
            if d {
                NodeTag::Dirichlet
            } else if n {
                NodeTag::Neumann
            } else {
                NodeTag::Interior
            }
        })
        .collect();
    let mesh = TriMesh {
        nodes,
        triangles,
        node_tags,
        triangle_patch,
        node_patch,
        counts: counts.to_vec(),
        patches: domain.patches.clone(),
        columns: None,
    };
    for t in 0..mesh.triangles.len() {
        if !(mesh.triangle_area(t) > T::zero()) {
            return Err(FemError::InvertedTriangle(t));
        }
    }
    Ok(mesh)
}
