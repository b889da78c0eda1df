//! Dense symmetric eigensolver (Householder tridiagonalisation + implicit QL).
//!
//! Used as the validation oracle for the sparse path and for the small
//! Rayleigh–Ritz problems inside the block iteration.

use crate::num::Real;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n);
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen-decomposition of a symmetric matrix: ascending values, `vectors[i]` pairs with `values[i]`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Option<Vec<Vec<T>>>,
}

/// Symmetric eigen-decomposition. Only the lower triangle of `a` is trusted.
pub fn symmetric_eigen<T: Real>(a: &DenseMatrix<T>, want_vectors: bool) -> Option<SymmetricEigen<T>> {
    let n = a.n;
    if n == 0 {
        return Some(SymmetricEigen {
            values: Vec::new(),
            vectors: want_vectors.then(Vec::new),
        });
    }
    let mut v = a.clone();
    for i in 0..n {
        for j in 0..i {
            let x = v.at(i, j);
            *v.at_mut(j, i) = x;
        }
    }
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e, want_vectors)?;
    let vectors = want_vectors.then(|| (0..n).map(|col| (0..n).map(|row| v.at(row, col)).collect()).collect());
    Some(SymmetricEigen { values: d, vectors })
}

fn tred2<T: Real>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                *v.at_mut(i, j) = T::zero();
                *v.at_mut(j, i) = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                *v.at_mut(j, i) = f;
                g = e[j] + v.at(j, j) * f;
                for k in (j + 1)..i {
                    g += v.at(k, j) * d[k];
                    e[k] += v.at(k, j) * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let x = v.at(k, j) - (f * e[k] + g * d[k]);
                    *v.at_mut(k, j) = x;
                }
                d[j] = v.at(i - 1, j);
                *v.at_mut(i, j) = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        let x = v.at(i, i);
        *v.at_mut(n - 1, i) = x;
        *v.at_mut(i, i) = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v.at(k, i + 1) * v.at(k, j);
                }
                for k in 0..=i {
                    let x = v.at(k, j) - g * d[k];
                    *v.at_mut(k, j) = x;
                }
            }
        }
        for k in 0..=i {
            *v.at_mut(k, i + 1) = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        *v.at_mut(n - 1, j) = T::zero();
    }
    *v.at_mut(n - 1, n - 1) = T::one();
    e[0] = T::zero();
}

fn tql2<T: Real>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T], vectors: bool) -> Option<()> {
    let n = v.n;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return None;
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        for k in 0..n {
                            let hk = v.at(k, i + 1);
                            let vki = v.at(k, i);
                            *v.at_mut(k, i + 1) = s * vki + c * hk;
                            *v.at_mut(k, i) = c * vki - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            if vectors {
                for row in 0..n {
                    let a = v.at(row, i);
                    let b = v.at(row, k);
                    *v.at_mut(row, i) = b;
                    *v.at_mut(row, k) = a;
                }
            }
        }
    }
    Some(())
}

/// Lower Cholesky factor; `None` if `a` is not positive definite.
pub fn cholesky<T: Real>(a: &DenseMatrix<T>) -> Option<DenseMatrix<T>> {
    let n = a.n;
    let mut l = DenseMatrix::zeros(n);
    for j in 0..n {
        let mut s = a.at(j, j);
        for k in 0..j {
            s -= l.at(j, k) * l.at(j, k);
        }
        if s <= T::zero() || !s.is_finite() {
            return None;
        }
        let ljj = s.sqrt();
        *l.at_mut(j, j) = ljj;
        for i in (j + 1)..n {
            let mut s = a.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            *l.at_mut(i, j) = s / ljj;
        }
    }
    Some(l)
}

/// Generalized symmetric-definite problem `K x = λ M x` by Cholesky reduction.
/// Returned vectors are M-orthonormal.
pub fn generalized_eigen<T: Real>(
    k: &DenseMatrix<T>,
    m: &DenseMatrix<T>,
    want_vectors: bool,
) -> Option<SymmetricEigen<T>> {
    let n = k.n;
    let l = cholesky(m)?;
    // Y = L⁻¹ K
    let mut y = k.clone();
    for col in 0..n {
        for i in 0..n {
            let mut s = y.at(i, col);
            for p in 0..i {
                s -= l.at(i, p) * y.at(p, col);
            }
            *y.at_mut(i, col) = s / l.at(i, i);
        }
    }
    // C = L⁻¹ Yᵀ (= L⁻¹ K L⁻ᵀ since K is symmetric)
    let mut c = DenseMatrix::zeros(n);
    for col in 0..n {
        for i in 0..n {
            let mut s = y.at(col, i);
            for p in 0..i {
                s -= l.at(i, p) * c.at(p, col);
            }
            *c.at_mut(i, col) = s / l.at(i, i);
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = (c.at(i, j) + c.at(j, i)) * T::lit(0.5);
            *c.at_mut(i, j) = avg;
            *c.at_mut(j, i) = avg;
        }
    }
    let mut eig = symmetric_eigen(&c, want_vectors)?;
    if let Some(vs) = eig.vectors.as_mut() {
        // x = L⁻ᵀ v
        for v in vs.iter_mut() {
            for i in (0..n).rev() {
                let mut s = v[i];
                for p in (i + 1)..n {
                    s -= l.at(p, i) * v[p];
                }
                v[i] = s / l.at(i, i);
            }
        }
    }
    Some(eig)
}
