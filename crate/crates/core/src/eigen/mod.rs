//! Lowest eigenpairs of symmetric generalized pairs `K x = λ M x`.
//!
//! The production path is shift-invert block subspace iteration with
//! Rayleigh–Ritz extraction on top of an RCM-ordered envelope LDLᵀ of
//! `K − σM`. The dense reference solves the same pair by Cholesky
//! reduction and serves as the validation oracle.

pub mod dense;
pub mod ldl;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::num::Real;
use crate::sparse::SparsePair;
use dense::{DenseMatrix, SymmetricEigen};
use ldl::OrderedLdl;

/// Largest dimension accepted by [`dense_eigen_reference`].
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone)]
pub struct EigenResult<T> {
    pub values: Vec<T>,
    /// M-orthonormal eigenvectors on the free dofs.
    pub vectors: Vec<Vec<T>>,
    pub residuals: Vec<T>,
    pub converged: Vec<bool>,
    pub iterations: usize,
    /// Shift actually used for the factorisation.
    pub shift: T,
}

impl<T: Real> EigenResult<T> {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

#[derive(Debug, Error)]
pub enum EigenError<T: Real> {
    #[error("requested {requested} eigenpairs but the problem has dimension {dim}")]
    TooManyPairs { requested: usize, dim: usize },
    #[error("mass matrix is not positive definite")]
    MassNotPositive,
    #[error("factorisation of K - σM broke down at pivot {pivot} (σ = {shift})")]
    Breakdown { pivot: usize, shift: T },
    #[error("no convergence after {} iterations", .partial.iterations)]
    NotConverged { partial: Box<EigenResult<T>> },
    #[error("dense reference limited to dimension {DENSE_LIMIT}, got {0}")]
    TooLargeForDense(usize),
    #[error("vector has zero M-norm")]
    ZeroNorm,
}

#[derive(Debug, Clone)]
pub struct EigenOptions<T> {
    /// Target shift σ; lowered automatically while `K − σM` has negative inertia.
    pub shift: T,
    /// Residual tolerance of the per-pair contract.
    pub tol: T,
    pub max_iterations: usize,
    /// Block size; `None` means `max(k + 2, 8)`.
    pub block: Option<usize>,
    pub seed: u64,
}

impl<T: Real> Default for EigenOptions<T> {
    fn default() -> Self {
        Self {
            shift: T::zero(),
            tol: T::lit(1e-8),
            max_iterations: 500,
            block: None,
            seed: 0,
        }
    }
}

/// The `k` algebraically smallest eigenpairs with shift σ = 0.
pub fn lowest_eigenpairs<T: Real>(
    pair: &SparsePair<T>,
    k: usize,
    tol: T,
    seed: u64,
) -> Result<EigenResult<T>, EigenError<T>> {
    lowest_eigenpairs_with(
        pair,
        k,
        &EigenOptions {
            tol,
            seed,
            ..EigenOptions::default()
        },
    )
}

pub fn lowest_eigenpairs_with<T: Real>(
    pair: &SparsePair<T>,
    k: usize,
    opts: &EigenOptions<T>,
) -> Result<EigenResult<T>, EigenError<T>> {
    let n = pair.dim();
    if k > n {
        return Err(EigenError::TooManyPairs { requested: k, dim: n });
    }
    if k == 0 {
        return Ok(EigenResult {
            values: vec![],
            vectors: vec![],
            residuals: vec![],
            converged: vec![],
            iterations: 0,
            shift: opts.shift,
        });
    }
    let (mut factor, mut shift) = factor_below_spectrum(pair, opts.shift)?;
    let b = opts.block.unwrap_or((2 * k).max(k + 8)).max(k).min(n);
    let mut reshifts = 0;
    let mut previous: Option<Vec<T>> = None;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut block: Vec<Vec<T>> = (0..b)
        .map(|_| (0..n).map(|_| T::lit(rng.gen::<f64>() - 0.5)).collect())
        .collect();

    let kmat = &pair.stiffness;
    let mmat = &pair.mass;
    let mut last = None;
    for iteration in 1..=opts.max_iterations {
        let rhs: Vec<Vec<T>> = block.iter().map(|x| mmat.mul_vec(x)).collect();
        let mut y: Vec<Vec<T>> = rhs.iter().map(|r| factor.solve(r)).collect();
        let my = m_orthonormalize(&mut y, pair, &mut rng)?;
        let ky: Vec<Vec<T>> = y.iter().map(|v| kmat.mul_vec(v)).collect();
        let mut h = DenseMatrix::zeros(b);
        for i in 0..b {
            for j in 0..=i {
                let hij = dotv(&y[i], &ky[j]);
                let hji = dotv(&y[j], &ky[i]);
                let avg = (hij + hji) * T::lit(0.5);
                *h.at_mut(i, j) = avg;
                *h.at_mut(j, i) = avg;
            }
        }
        let SymmetricEigen { values, vectors } =
            dense::symmetric_eigen(&h, true).expect("small symmetric eigenproblem converges");
        let coeffs = vectors.unwrap();
        block = combine(&y, &coeffs);
        let kx = combine(&ky, &coeffs[..k]);
        let mx = combine(&my, &coeffs[..k]);
        let mut residuals = Vec::with_capacity(k);
        let mut converged = Vec::with_capacity(k);
        for i in 0..k {
            let lam = values[i];
            let r: T = kx[i]
                .iter()
                .zip(&mx[i])
                .map(|(&a, &m)| {
                    let d = a - lam * m;
                    d * d
                })
                .sum::<T>()
                .sqrt();
            let scale = (lam.abs() + T::one()) * normv(&mx[i]);
            let rel = r / scale;
            residuals.push(rel);
            converged.push(rel <= opts.tol);
        }
        let result = EigenResult {
            values: values[..k].to_vec(),
            vectors: block[..k].to_vec(),
            residuals,
            converged,
            iterations: iteration,
            shift,
        };
        if result.all_converged() {
            return Ok(result);
        }
        // Once the wanted Ritz values settle, move the shift up under the
        // lowest one; the Ritz value bounds λ₁ from above and the inertia
        // check in the factorisation keeps the new shift below the spectrum.
        if let Some(prev) = &previous {
            let settled = (0..k).all(|i| (values[i] - prev[i]).abs() <= T::lit(1e-3) * (values[i].abs() + T::one()));
            let spread = values[k - 1] - values[0];
            let target = values[0] - T::lit(0.1) * spread - T::lit(1e-3) * (values[0].abs() + T::one());
            if settled && reshifts < 3 && target - shift > T::lit(0.25) * (values[0] - shift) {
                let (f, s) = factor_below_spectrum(pair, target)?;
                factor = f;
                shift = s;
                reshifts += 1;
            }
        }
        previous = Some(values[..k].to_vec());
        last = Some(result);
    }
    Err(EigenError::NotConverged {
        partial: Box::new(last.expect("at least one iteration")),
    })
}

/// Factor `K − σM`, lowering σ until the factor has no negative pivots so the
/// dominant Ritz values of the inverse are the lowest eigenvalues.
fn factor_below_spectrum<T: Real>(pair: &SparsePair<T>, target: T) -> Result<(OrderedLdl<T>, T), EigenError<T>> {
    let mut shift = target;
    let mut attempts = 0;
    loop {
        attempts += 1;
        let shifted = pair.stiffness.add_scaled(-shift, &pair.mass);
        match OrderedLdl::factor(&shifted) {
            Ok(f) if f.negative_pivots() == 0 => return Ok((f, shift)),
            Ok(_) | Err(_) if attempts < 64 => {
                shift = if shift > T::zero() {
                    shift * T::lit(0.5) - T::lit(1e-3)
                } else {
                    shift * T::lit(2.0) - T::one()
                };
            }
            Ok(_) => return Err(EigenError::Breakdown { pivot: 0, shift }),
            Err(b) => return Err(EigenError::Breakdown { pivot: b.pivot, shift }),
        }
    }
}

fn m_orthonormalize<T: Real>(
    y: &mut [Vec<T>],
    pair: &SparsePair<T>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<T>>, EigenError<T>> {
    let mut my: Vec<Vec<T>> = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        let mut attempts = 0;
        loop {
            let original = normv(&y[i]);
            for _pass in 0..2 {
                let (done, rest) = y.split_at_mut(i);
                let yi = &mut rest[0];
                for (yj, myj) in done.iter().zip(&my) {
                    let c = dotv(myj, yi);
                    axpy(-c, yj, yi);
                }
            }
            let mi = pair.mass.mul_vec(&y[i]);
            let nrm2 = dotv(&y[i], &mi);
            if nrm2 <= T::zero() && normv(&y[i]) > T::zero() {
                return Err(EigenError::MassNotPositive);
            }
            if nrm2 > T::zero() && normv(&y[i]) > T::lit(1e-10) * original {
                let inv = T::one() / nrm2.sqrt();
                y[i].iter_mut().for_each(|v| *v *= inv);
                my.push(mi.into_iter().map(|v| v * inv).collect());
                break;
            }
            attempts += 1;
            if attempts > 5 {
                return Err(EigenError::MassNotPositive);
            }
            // linearly dependent column: restart it from noise
            for v in y[i].iter_mut() {
                *v = T::lit(rng.gen::<f64>() - 0.5);
            }
        }
    }
    Ok(my)
}

fn combine<T: Real>(basis: &[Vec<T>], coeffs: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = basis.first().map_or(0, Vec::len);
    coeffs
        .iter()
        .map(|c| {
            let mut out = vec![T::zero(); n];
            for (cj, bj) in c.iter().zip(basis) {
                axpy(*cj, bj, &mut out);
            }
            out
        })
        .collect()
}

#[inline]
fn dotv<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
fn normv<T: Real>(a: &[T]) -> T {
    dotv(a, a).sqrt()
}

#[inline]
fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Full generalized spectrum by dense Cholesky reduction, ascending.
pub fn dense_eigen_reference<T: Real>(pair: &SparsePair<T>) -> Result<Vec<T>, EigenError<T>> {
    let n = pair.dim();
    if n > DENSE_LIMIT {
        return Err(EigenError::TooLargeForDense(n));
    }
    let k = DenseMatrix::from_rows(&pair.stiffness.to_dense());
    let m = DenseMatrix::from_rows(&pair.mass.to_dense());
    dense::generalized_eigen(&k, &m, false)
        .map(|e| e.values)
        .ok_or(EigenError::MassNotPositive)
}

/// `xᵀKx / xᵀMx`.
pub fn rayleigh_quotient<T: Real>(pair: &SparsePair<T>, x: &[T]) -> Result<T, EigenError<T>> {
    let den = pair.mass.bilinear(x, x);
    if den <= T::zero() {
        return Err(EigenError::ZeroNorm);
    }
    Ok(pair.stiffness.bilinear(x, x) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{CsrMatrix, TripletBuilder};

    fn fd_chain(interior: usize) -> SparsePair<f64> {
        let h = 1.0 / (interior + 1) as f64;
        let mut k = TripletBuilder::new(interior);
        for i in 0..interior {
            k.add(i, i, 2.0 / h);
            if i + 1 < interior {
                k.add(i, i + 1, -1.0 / h);
                k.add(i + 1, i, -1.0 / h);
            }
        }
        let m = CsrMatrix::diagonal(&vec![h; interior]);
        SparsePair::new(k.build(), m)
    }

    #[test]
    fn fd_chain_three_nodes() {
        let pair = fd_chain(3);
        let r = lowest_eigenpairs(&pair, 1, 1e-10, 1).unwrap();
        let expected = 32.0 * (1.0 - (std::f64::consts::PI / 4.0).cos());
        assert!((r.values[0] - expected).abs() < 1e-9 * expected);
        assert!((r.values[0] - 9.372583).abs() < 1e-6);
        let dense = dense_eigen_reference(&pair).unwrap();
        assert!((dense[0] - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn diagonal_problem() {
        let k = CsrMatrix::diagonal(&[1.0f64, 2.0, 3.0]);
        let pair = SparsePair::new(k, CsrMatrix::identity(3));
        let r = lowest_eigenpairs(&pair, 2, 1e-12, 3).unwrap();
        assert!((r.values[0] - 1.0).abs() < 1e-12);
        assert!((r.values[1] - 2.0).abs() < 1e-12);
        assert!((r.vectors[0][0].abs() - 1.0).abs() < 1e-10);
        assert!((r.vectors[1][1].abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dense_two_by_two_and_trace() {
        let k = CsrMatrix::from_dense(&[vec![2.0f64, -1.0], vec![-1.0, 2.0]]);
        let pair = SparsePair::new(k, CsrMatrix::identity(2));
        let v = dense_eigen_reference(&pair).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] - 3.0).abs() < 1e-14);

        let n = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.gen::<f64>() - 0.5;
                a[i][j] = x;
                a[j][i] = x;
            }
        }
        let trace: f64 = (0..n).map(|i| a[i][i]).sum();
        let pair = SparsePair::new(CsrMatrix::from_dense(&a), CsrMatrix::identity(n));
        let sum: f64 = dense_eigen_reference(&pair).unwrap().iter().sum();
        assert!((sum - trace).abs() <= 1e-9 * trace.abs().max(1.0));
    }

    #[test]
    fn sparse_matches_dense_and_orthonormal() {
        let pair = fd_chain(120);
        let r = lowest_eigenpairs(&pair, 5, 1e-10, 5).unwrap();
        let d = dense_eigen_reference(&pair).unwrap();
        for i in 0..5 {
            assert!((r.values[i] - d[i]).abs() <= 1e-9 * d[i]);
            for j in 0..5 {
                let g = pair.mass.bilinear(&r.vectors[i], &r.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rayleigh_of_mixture() {
        let pair = fd_chain(40);
        let r = lowest_eigenpairs(&pair, 2, 1e-11, 2).unwrap();
        let x: Vec<f64> = r.vectors[0].iter().zip(&r.vectors[1]).map(|(a, b)| a + b).collect();
        let rq = rayleigh_quotient(&pair, &x).unwrap();
        assert!((rq - 0.5 * (r.values[0] + r.values[1])).abs() < 1e-8 * rq);
        assert!(rayleigh_quotient(&pair, &vec![0.0; 40]).is_err());
    }

    #[test]
    fn shift_inside_spectrum_is_lowered() {
        let pair = fd_chain(30);
        let opts = EigenOptions {
            shift: 100.0,
            ..EigenOptions::default()
        };
        let r = lowest_eigenpairs_with(&pair, 3, &opts).unwrap();
        assert!(r.shift < r.values[0]);
        let d = dense_eigen_reference(&pair).unwrap();
        assert!((r.values[2] - d[2]).abs() < 1e-9 * d[2]);
    }

    #[test]
    fn too_many_pairs() {
        let pair = fd_chain(3);
        assert!(matches!(
            lowest_eigenpairs(&pair, 4, 1e-8, 0),
            Err(EigenError::TooManyPairs { .. })
        ));
    }
}
