//! Reverse Cuthill–McKee ordering and envelope (profile) LDLᵀ factorisation.

use std::collections::VecDeque;

use crate::num::Real;
use crate::sparse::CsrMatrix;

/// Reverse Cuthill–McKee order: `order[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&i| (degree[i], i));
    for &seed in &seeds {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(adj, &degree, seed);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Level structure of a BFS restricted to the component of `root`.
fn levels(adj: &[Vec<usize>], root: usize) -> Vec<Vec<usize>> {
    let mut seen = std::collections::HashSet::new();
    seen.insert(root);
    let mut out = vec![vec![root]];
    loop {
        let mut next = Vec::new();
        for &v in out.last().unwrap() {
            for &w in &adj[v] {
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return out;
        }
        next.sort_unstable();
        out.push(next);
    }
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut root = seed;
    let mut ecc = levels(adj, root).len();
    for _ in 0..8 {
        let lv = levels(adj, root);
        let cand = *lv.last().unwrap().iter().min_by_key(|&&w| (degree[w], w)).unwrap();
        let e = levels(adj, cand).len();
        if e <= ecc {
            break;
        }
        root = cand;
        ecc = e;
    }
    root
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Breakdown {
    pub pivot: usize,
}

/// `A = L D Lᵀ` with `L` unit lower triangular stored by rows inside the envelope.
#[derive(Clone, Debug)]
pub struct ProfileLdl<T> {
    first: Vec<usize>,
    offset: Vec<usize>,
    lower: Vec<T>,
    diag: Vec<T>,
}

impl<T: Real> ProfileLdl<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self, Breakdown> {
        let n = a.dim();
        let mut first = vec![0; n];
        for (i, f) in first.iter_mut().enumerate() {
            let (cols, _) = a.row(i);
            *f = cols.first().copied().unwrap_or(i).min(i);
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i]));
        }
        let mut lower = vec![T::zero(); offset[n]];
        let mut diag = vec![T::zero(); n];
        let mut scale = T::zero();
        for i in 0..n {
            let (cols, vals) = a.row(i);
            let mut aii = T::zero();
            for (&j, &v) in cols.iter().zip(vals) {
                if j < i {
                    lower[offset[i] + j - first[i]] = v;
                } else if j == i {
                    aii = v;
                }
            }
            scale = scale.max(aii.abs());
            let fi = first[i];
            // row i currently holds A[i, fi..i]; overwrite by w_j = L_ij D_j
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = lower[offset[i] + j - fi];
                if lo < j {
                    let ri = &lower[offset[i] + lo - fi..offset[i] + j - fi];
                    let rj = &lower[offset[j] + lo - fj..offset[j] + j - fj];
                    for (&wi, &lj) in ri.iter().zip(rj) {
                        s -= wi * lj;
                    }
                }
                lower[offset[i] + j - fi] = s;
            }
            let mut d = aii;
            for j in fi..i {
                let w = lower[offset[i] + j - fi];
                let l = w / diag[j];
                d -= w * l;
                lower[offset[i] + j - fi] = l;
            }
            if !d.is_finite() || d.abs() <= T::epsilon() * T::lit(16.0) * scale.max(T::min_positive_value()) {
                return Err(Breakdown { pivot: i });
            }
            diag[i] = d;
        }
        Ok(Self {
            first,
            offset,
            lower,
            diag,
        })
    }

    /// Number of negative pivots (Sylvester inertia).
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|&&d| d < T::zero()).count()
    }

    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.diag.len();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.offset[i]..self.offset[i + 1]];
            let mut s = x[i];
            for (l, xj) in row.iter().zip(&x[fi..i]) {
                s -= *l * *xj;
            }
            x[i] = s;
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= *d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            let row = &self.lower[self.offset[i]..self.offset[i + 1]];
            for (l, xj) in row.iter().zip(x[fi..i].iter_mut()) {
                *xj -= *l * xi;
            }
        }
    }
}

/// LDLᵀ of a symmetrically permuted matrix, solving in the original numbering.
#[derive(Clone, Debug)]
pub struct OrderedLdl<T> {
    order: Vec<usize>,
    factor: ProfileLdl<T>,
}

impl<T: Real> OrderedLdl<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self, Breakdown> {
        let order = reverse_cuthill_mckee(&a.pattern());
        let mut new_of_old = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_of_old[old] = new;
        }
        let factor = ProfileLdl::factor(&a.permute_sym(&new_of_old))?;
        Ok(Self { order, factor })
    }

    pub fn negative_pivots(&self) -> usize {
        self.factor.negative_pivots()
    }

    pub fn envelope_size(&self) -> usize {
        self.factor.envelope_size()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x: Vec<T> = self.order.iter().map(|&old| b[old]).collect();
        self.factor.solve_in_place(&mut x);
        let mut out = vec![T::zero(); b.len()];
        for (new, &old) in self.order.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}
