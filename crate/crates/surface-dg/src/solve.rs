//! Sparse direct solution of the assembled systems.
//!
//! The default path is a sparse LU factorization; symmetric systems (SIPG)
//! go through a sparse Cholesky first. Whatever the path, the solve must
//! meet the relative-residual contract `||Ax - b|| / ||b|| <= 1e-10`
//! (scaled up for scalar types coarser than f64), otherwise it is an error.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};

use crate::assembly::{AssembledSystem, Variant};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::{real, Real};

/// Scalar types the sparse backend accepts (`f32`, `f64`).
pub trait SolverScalar: Real + faer::traits::ComplexField<Real = Self> {}
impl<T> SolverScalar for T where T: Real + faer::traits::ComplexField<Real = T> {}

/// Result of a linear solve.
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub solution: Vec<T>,
    pub relative_residual: T,
    /// Whether the symmetric (Cholesky) factorization was used.
    pub symmetric_factorization: bool,
}

pub fn residual_tolerance<T: Real>() -> T {
    real::<T>(1e-10).max(T::epsilon() * real::<T>(500.0))
}

fn to_col_major<T: SolverScalar>(matrix: &CsrMatrix<T>) -> Result<SparseColMat<usize, T>> {
    let triplets: Vec<Triplet<usize, usize, T>> = matrix
        .iter()
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    SparseColMat::try_new_from_triplets(matrix.n_rows(), matrix.n_cols(), &triplets)
        .map_err(|e| Error::Solver(format!("sparse matrix construction failed: {e:?}")))
}

/// Sparse LU with partial pivoting.
pub fn solve_lu<T: SolverScalar>(matrix: &CsrMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    let mat = to_col_major(matrix)?;
    let lu = mat.sp_lu().map_err(|e| {
        Error::Solver(format!(
            "LU factorization failed ({e:?}); n = {}, nnz = {}, max|A| = {:e}",
            matrix.n_rows(),
            matrix.nnz(),
            matrix.max_abs()
        ))
    })?;
    let b = faer::Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    Ok((0..rhs.len()).map(|i| x[(i, 0)]).collect())
}

/// Sparse Cholesky; fails if the matrix is not symmetric positive definite.
pub fn solve_cholesky<T: SolverScalar>(matrix: &CsrMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    let mat = to_col_major(matrix)?;
    let chol = mat.sp_cholesky(faer::Side::Lower).map_err(|e| {
        Error::Solver(format!(
            "Cholesky factorization failed ({e:?}): matrix is not SPD; n = {}, max|A| = {:e}",
            matrix.n_rows(),
            matrix.max_abs()
        ))
    })?;
    let b = faer::Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = chol.solve(&b);
    Ok((0..rhs.len()).map(|i| x[(i, 0)]).collect())
}

/// Succeeds iff the matrix admits a sparse Cholesky factorization.
pub fn cholesky_check<T: SolverScalar>(matrix: &CsrMatrix<T>) -> Result<()> {
    let mat = to_col_major(matrix)?;
    mat.sp_cholesky(faer::Side::Lower)
        .map(|_| ())
        .map_err(|e| Error::Solver(format!("not positive definite: {e:?}")))
}

pub fn relative_residual<T: Real>(matrix: &CsrMatrix<T>, x: &[T], b: &[T]) -> T {
    let ax = matrix.matvec(x);
    let mut num = T::zero();
    let mut den = T::zero();
    for i in 0..b.len() {
        num += (ax[i] - b[i]) * (ax[i] - b[i]);
        den += b[i] * b[i];
    }
    let num = num.sqrt();
    let den = den.sqrt();
    if den > T::zero() {
        num / den
    } else {
        num
    }
}

/// Solves the assembled system, enforcing the residual contract. SIPG
/// systems try the symmetric factorization first and fall back to LU.
pub fn solve_system<T: SolverScalar>(system: &AssembledSystem<T>) -> Result<SolveReport<T>> {
    let (solution, symmetric_factorization) = if system.config.variant == Variant::Sipg {
        match solve_cholesky(&system.matrix, &system.rhs) {
            Ok(x) => (x, true),
            Err(_) => (solve_lu(&system.matrix, &system.rhs)?, false),
        }
    } else {
        (solve_lu(&system.matrix, &system.rhs)?, false)
    };
    let relative_residual = relative_residual(&system.matrix, &solution, &system.rhs);
    if !(relative_residual <= residual_tolerance::<T>()) {
        return Err(Error::Solver(format!(
            "residual contract violated: {relative_residual:e} (n = {}, max|A| = {:e})",
            system.matrix.n_rows(),
            system.matrix.max_abs()
        )));
    }
    Ok(SolveReport {
        solution,
        relative_residual,
        symmetric_factorization,
    })
}

/// Small dense SPD solve (used for patchwise L2 projections).
pub fn dense_solve_spd<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    // in-place Cholesky A = L Lᵀ
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > T::zero()) {
            return Err(Error::Solver(format!(
                "dense Cholesky pivot {j} is nonpositive: {d:e}"
            )));
        }
        let l_jj = d.sqrt();
        a[j][j] = l_jj;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / l_jj;
        }
    }
    // forward then backward substitution
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i][k] * b[k];
        }
        b[i] = s / a[i][i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k][i] * b[k];
        }
        b[i] = s / a[i][i];
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> CsrMatrix<f64> {
        CsrMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let m = identity(4);
        let mut b = vec![0.0; 4];
        b[0] = 1.0;
        let x = solve_lu(&m, &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn lu_and_cholesky_agree_on_spd_system() {
        // 1-D Poisson stencil, SPD
        let n = 20;
        let mut trips = Vec::new();
        for i in 0..n {
            trips.push((i, i, 2.0));
            if i + 1 < n {
                trips.push((i, i + 1, -1.0));
                trips.push((i + 1, i, -1.0));
            }
        }
        let m = CsrMatrix::from_triplets(n, n, trips);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let x1 = solve_lu(&m, &b).unwrap();
        let x2 = solve_cholesky(&m, &b).unwrap();
        for (a, b) in x1.iter().zip(&x2) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(relative_residual(&m, &x1, &b) < 1e-12);
        assert!(cholesky_check(&m).is_ok());
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(cholesky_check(&m).is_err());
    }

    #[test]
    fn dense_spd_solve() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let x = dense_solve_spd::<f64>(a, vec![1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
    }
}
