//! Compressed sparse row storage and the stiffness/mass pair handed to the eigensolvers.

use std::io::{self, Write};

use crate::num::Real;

/// Square sparse matrix in CSR layout with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

/// Accumulates (row, col, value) contributions; duplicates are summed in insertion order.
#[derive(Clone, Debug)]
pub struct TripletBuilder<T> {
    n: usize,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> TripletBuilder<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.n && col < self.n);
        self.rows[row].push((col, value));
    }

    pub fn build(self) -> CsrMatrix<T> {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in self.rows {
            // stable sort keeps the summation order of duplicates deterministic
            row.sort_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl<T: Real> CsrMatrix<T> {
    pub fn from_dense(a: &[Vec<T>]) -> Self {
        let n = a.len();
        let mut b = TripletBuilder::new(n);
        for (i, row) in a.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    b.add(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![T::one(); n])
    }

    pub fn diagonal(d: &[T]) -> Self {
        let n = d.len();
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: d.to_vec(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => T::zero(),
        }
    }

    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let (cols, vals) = self.row(i);
            let mut acc = T::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let mut acc = T::zero();
        for (i, &xi) in x.iter().enumerate().take(self.n) {
            let (cols, vals) = self.row(i);
            let mut row = T::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                row += v * y[c];
            }
            acc += xi * row;
        }
        acc
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Largest |A_ij - A_ji| relative to the Frobenius norm.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        let scale = self.norm_fro();
        if scale > T::zero() {
            worst / scale
        } else {
            worst
        }
    }

    /// `self + s * other`; both operands must have equal dimension.
    pub fn add_scaled(&self, s: T, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut b = TripletBuilder::new(self.n);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                b.add(i, j, x);
            }
            let (c, v) = other.row(i);
            for (&j, &x) in c.iter().zip(v) {
                b.add(i, j, s * x);
            }
        }
        b.build()
    }

    /// Symmetric permutation `P A Pᵀ` with `new_of_old[i]` the new index of row/column `i`.
    pub fn permute_sym(&self, new_of_old: &[usize]) -> Self {
        let mut b = TripletBuilder::new(self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                b.add(new_of_old[i], new_of_old[j], v);
            }
        }
        b.build()
    }

    /// Principal submatrix on the given (sorted or not) index list.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut b = TripletBuilder::new(keep.len());
        for (new_i, &old_i) in keep.iter().enumerate() {
            let (cols, vals) = self.row(old_i);
            for (&j, &v) in cols.iter().zip(vals) {
                if map[j] != usize::MAX {
                    b.add(new_i, map[j], v);
                }
            }
        }
        b.build()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut a = vec![vec![T::zero(); self.n]; self.n];
        for (i, row) in a.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        a
    }

    /// Adjacency lists of the off-diagonal pattern.
    pub fn pattern(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| self.row(i).0.iter().copied().filter(|&j| j != i).collect())
            .collect()
    }

    /// Coordinate text dump: `row col value` per line, 17 significant digits.
    pub fn write_coordinate<W: Write>(&self, mut out: W) -> io::Result<()> {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(out, "{} {} {:.16e}", i, j, v.as_f64())?;
            }
        }
        Ok(())
    }
}

/// Symmetric stiffness (plus potential) and mass matrices on the free degrees of freedom.
#[derive(Clone, Debug)]
pub struct SparsePair<T> {
    pub stiffness: CsrMatrix<T>,
    pub mass: CsrMatrix<T>,
    /// Mesh node carried by each free degree of freedom.
    pub dof_nodes: Vec<usize>,
}

impl<T: Real> SparsePair<T> {
    pub fn new(stiffness: CsrMatrix<T>, mass: CsrMatrix<T>) -> Self {
        assert_eq!(stiffness.dim(), mass.dim(), "stiffness and mass differ in size");
        let dof_nodes = (0..stiffness.dim()).collect();
        Self {
            stiffness,
            mass,
            dof_nodes,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.stiffness.dim()
    }

    /// Scatter a dof vector to a full nodal field (eliminated nodes get zero).
    pub fn to_nodal(&self, x: &[T], node_count: usize) -> Vec<T> {
        let mut u = vec![T::zero(); node_count];
        for (&node, &v) in self.dof_nodes.iter().zip(x) {
            u[node] = v;
        }
        u
    }

    /// Gather the free-dof values of a nodal field.
    pub fn from_nodal(&self, u: &[T]) -> Vec<T> {
        self.dof_nodes.iter().map(|&n| u[n]).collect()
    }

    pub fn permute(&self, new_of_old: &[usize]) -> Self {
        let mut dof_nodes = vec![0; self.dim()];
        for (old, &new) in new_of_old.iter().enumerate() {
            dof_nodes[new] = self.dof_nodes[old];
        }
        Self {
            stiffness: self.stiffness.permute_sym(new_of_old),
            mass: self.mass.permute_sym(new_of_old),
            dof_nodes,
        }
    }
}
