//! Dense complex matrix kernel.
//!
//! Every tolerance here is relative to `1 + max |entry|` of the matrix under
//! test, with an absolute floor of `1e-12`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result, Violation};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative hermiticity tolerance.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Absolute floor applied to every relative tolerance.
pub const ABS_FLOOR: f64 = 1e-12;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `tol * (1 + max|m|)`, never below the absolute floor.
pub fn scaled_tol(m: &CMatrix, tol: f64) -> f64 {
    (tol * (1.0 + max_abs(m))).max(ABS_FLOOR)
}

/// Worst pair `(i, j, |m_ij - conj(m_ji)|)`, or `None` for a non-square input.
pub fn hermiticity_defect(m: &CMatrix) -> Option<(usize, usize, f64)> {
    if !m.is_square() {
        return None;
    }
    let n = m.nrows();
    let mut worst = (0, 0, 0.0);
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst.2 {
                worst = (i, j, d);
            }
        }
    }
    Some(worst)
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Complex matrix checked to be Hermitian within `1e-10 (1 + max|m|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let Some((row, col, deviation)) = hermiticity_defect(&m) else {
            return Err(Error::invalid(Violation::Shape { expected: m.nrows(), rows: m.nrows(), cols: m.ncols() }));
        };
        if deviation > scaled_tol(&m, HERMITIAN_TOL) {
            return Err(Error::invalid(Violation::NotHermitian { row, col, deviation }));
        }
        Ok(HermitianMatrix(m))
    }

    /// Wraps a matrix that is Hermitian by construction.
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        debug_assert!(hermiticity_defect(&m).is_some_and(|d| d.2 <= scaled_tol(&m, 1e-8)));
        HermitianMatrix(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| c(x, 0.0)));
        HermitianMatrix(CMatrix::from_diagonal(&v))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }
}

impl AsRef<CMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

/// Spectral decomposition `M = V diag(values) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> CMatrix {
        let lam = DVector::from_iterator(self.eigenvalues.len(), self.eigenvalues.iter().map(|&x| c(x, 0.0)));
        &self.eigenvectors * CMatrix::from_diagonal(&lam) * self.eigenvectors.adjoint()
    }
}

pub fn eig_hermitian(m: &HermitianMatrix) -> HermitianEigen {
    let n = m.dim();
    if n == 0 {
        return HermitianEigen { eigenvalues: DVector::zeros(0), eigenvectors: CMatrix::zeros(0, 0) };
    }
    let eig = SymmetricEigen::new(hermitian_part(m.matrix()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen { eigenvalues, eigenvectors }
}

/// Ascending eigenvalues only.
pub fn eigenvalues(m: &HermitianMatrix) -> Vec<f64> {
    if m.dim() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitian_part(m.matrix()).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &HermitianMatrix) -> f64 {
    eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// `Tr sqrt(M† M)`, i.e. the sum of absolute eigenvalues for Hermitian `M`.
pub fn trace_norm(m: &HermitianMatrix) -> f64 {
    eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// Entrywise `sum |m_ij|`.
pub fn l1_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).sum()
}

/// Largest entry modulus; zero for the empty matrix.
pub fn linf_norm(m: &CMatrix) -> f64 {
    max_abs(m)
}

/// Partial transpose of the second factor of a `da*db` square matrix laid out
/// as `C^da (x) C^db` (row index `a * db + b`).
pub fn partial_transpose_second(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    let n = da * db;
    assert_eq!(m.nrows(), n, "matrix does not match factor dimensions");
    let mut out = CMatrix::zeros(n, n);
    for a in 0..da {
        for b in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    out[(a * db + b, a2 * db + b2)] = m[(a * db + b2, a2 * db + b)];
                }
            }
        }
    }
    out
}

/// Keeps only rows/columns that carry a nonzero entry. Zero rows of a
/// Hermitian matrix only contribute zero eigenvalues.
pub(crate) fn compress_support(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let keep: Vec<usize> = (0..n).filter(|&i| (0..n).any(|j| m[(i, j)] != ZERO || m[(j, i)] != ZERO)).collect();
    let k = keep.len();
    CMatrix::from_fn(k, k, |i, j| m[(keep[i], keep[j])])
}

/// `-sum x ln x` over the (clamped) spectrum, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(spectrum: &[f64]) -> f64 {
    spectrum.iter().filter(|&&x| x > 1e-300).map(|&x| -x * x.ln()).sum()
}
