//! Trace minimization over a Hermitian matrix variable subject to linear
//! matrix inequalities, solved with a log-barrier interior-point method.
//!
//! ```text
//! minimize   Tr S
//! subject to C_j + L_j(S) ⪰ 0,   L_j ∈ {identity, partial transpose}
//! ```
//!
//! `S` is parametrized by `n²` real coordinates (diagonal, real and imaginary
//! parts of the upper triangle). Both maps send `I` to `I`, so `S = αI` is a
//! strictly feasible start for large enough `α`. At a centered point with
//! barrier weight `t`, `Z_j = F_j⁻¹ / t` is dual feasible up to the centering
//! residual and certifies a duality gap of `Σ_j dim F_j / t`.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, HermitianMatrix, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearMap {
    Identity,
    /// Transpose of the second factor of `C^da (x) C^db`.
    PartialTranspose {
        da: usize,
        db: usize,
    },
}

impl LinearMap {
    fn apply(&self, s: &CMatrix) -> CMatrix {
        match *self {
            LinearMap::Identity => s.clone(),
            LinearMap::PartialTranspose { da, db } => linalg::partial_transpose_second(s, da, db),
        }
    }

    fn apply_entry(&self, r: usize, col: usize) -> (usize, usize) {
        match *self {
            LinearMap::Identity => (r, col),
            LinearMap::PartialTranspose { db, .. } => {
                let (a, b) = (r / db, r % db);
                let (a2, b2) = (col / db, col % db);
                (a * db + b2, a2 * db + b)
            }
        }
    }
}

/// `constant + map(S) ⪰ 0`.
#[derive(Debug, Clone)]
pub struct Lmi {
    pub constant: CMatrix,
    pub map: LinearMap,
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    /// Target duality gap.
    pub gap_tol: f64,
    /// Cap on Newton iterations over the whole run.
    pub max_iterations: usize,
    /// Barrier weight growth per outer step.
    pub mu: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { gap_tol: 1e-10, max_iterations: 10_000, mu: 8.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Primal objective `Tr S` at the returned (feasible) point.
    pub value: f64,
    /// Dual objective of the certificate.
    pub lower: f64,
    pub gap: f64,
    /// Largest violation of the dual equality constraints.
    pub residual: f64,
    pub iterations: usize,
    pub variable: CMatrix,
}

/// Newton steps allowed per centering.
const CENTERING_STEPS: usize = 200;

/// Largest dual equality violation accepted in a certificate.
const RESIDUAL_TOL: f64 = 1e-7;
/// Largest certified gap reported as a success.
const ACCEPT_GAP: f64 = 1e-6;

type Sparse = Vec<(usize, usize, Complex64)>;

struct Problem {
    n: usize,
    lmis: Vec<Lmi>,
    /// `coords[k]` = entries of basis element `k`.
    coords: Vec<Sparse>,
    /// `mapped[j][k]` = entries of `L_j(B_k)`.
    mapped: Vec<Vec<Sparse>>,
    cost: DVector<f64>,
    barrier_dim: usize,
}

impl Problem {
    fn new(n: usize, lmis: Vec<Lmi>) -> Self {
        let mut coords = Vec::with_capacity(n * n);
        let mut cost = Vec::with_capacity(n * n);
        for i in 0..n {
            coords.push(vec![(i, i, c(1.0, 0.0))]);
            cost.push(1.0);
        }
        for i in 0..n {
            for j in i + 1..n {
                coords.push(vec![(i, j, c(1.0, 0.0)), (j, i, c(1.0, 0.0))]);
                cost.push(0.0);
                coords.push(vec![(i, j, c(0.0, 1.0)), (j, i, c(0.0, -1.0))]);
                cost.push(0.0);
            }
        }
        let mapped = lmis
            .iter()
            .map(|l| {
                coords
                    .iter()
                    .map(|e| {
                        e.iter()
                            .map(|&(r, col, v)| {
                                let (r2, c2) = l.map.apply_entry(r, col);
                                (r2, c2, v)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let barrier_dim = lmis.iter().map(|l| l.constant.nrows()).sum();
        Problem { n, lmis, coords, mapped, cost: DVector::from_vec(cost), barrier_dim }
    }

    fn matrix(&self, x: &DVector<f64>) -> CMatrix {
        let mut s = CMatrix::from_element(self.n, self.n, ZERO);
        for (k, entries) in self.coords.iter().enumerate() {
            for &(r, col, v) in entries {
                s[(r, col)] += v * x[k];
            }
        }
        s
    }

    /// Cholesky factors of every `F_j(x)`, `None` if any is not positive definite.
    fn factor(&self, x: &DVector<f64>) -> Option<Vec<Cholesky<Complex64, nalgebra::Dyn>>> {
        let s = self.matrix(x);
        self.lmis
            .iter()
            .map(|l| {
                let f = linalg::hermitian_part(&(&l.constant + l.map.apply(&s)));
                Cholesky::new(f)
            })
            .collect()
    }

    /// Primal value and dual certificate `Z_j = F_j⁻¹ / t` at `x`.
    fn certificate(
        &self,
        x: &DVector<f64>,
        factors: &[Cholesky<Complex64, nalgebra::Dyn>],
        t: f64,
        iterations: usize,
    ) -> Solution {
        let inverses: Vec<CMatrix> = factors.iter().map(|ch| ch.inverse()).collect();
        let residual_vec = &self.cost - self.trace_against(&inverses).scale(1.0 / t);
        let value = self.cost.dot(x);
        let lower = -self.lmis.iter().zip(&inverses).map(|(l, a)| (a * &l.constant).trace().re).sum::<f64>() / t;
        let gap = (self.barrier_dim as f64 / t + x.dot(&residual_vec).abs()).max(value - lower);
        Solution { value, lower, gap, residual: residual_vec.amax(), iterations, variable: self.matrix(x) }
    }

    /// `Σ_j Re Tr(A_j X_jk)` for every coordinate.
    fn trace_against(&self, inverses: &[CMatrix]) -> DVector<f64> {
        let p = self.coords.len();
        DVector::from_fn(p, |k, _| {
            inverses
                .iter()
                .zip(&self.mapped)
                .map(|(a, xs)| xs[k].iter().map(|&(r, col, v)| (v * a[(col, r)]).re).sum::<f64>())
                .sum()
        })
    }

    fn hessian(&self, inverses: &[CMatrix]) -> DMatrix<f64> {
        let p = self.coords.len();
        let mut h = DMatrix::zeros(p, p);
        for (a, xs) in inverses.iter().zip(&self.mapped) {
            for k in 0..p {
                for l in k..p {
                    let mut acc = 0.0;
                    for &(r, col, v) in &xs[k] {
                        for &(r2, c2, w) in &xs[l] {
                            acc += (v * w * a[(c2, r)] * a[(col, r2)]).re;
                        }
                    }
                    h[(k, l)] += acc;
                }
            }
        }
        for k in 0..p {
            for l in 0..k {
                h[(k, l)] = h[(l, k)];
            }
        }
        h
    }
}

fn solve_spd(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    let scale = h.diagonal().iter().fold(0.0_f64, |a, &x| a.max(x.abs())).max(1.0);
    let mut reg = h.clone();
    for i in 0..reg.nrows() {
        reg[(i, i)] += 1e-14 * scale;
    }
    reg.cholesky().map(|ch| ch.solve(rhs)).or_else(|| h.clone().lu().solve(rhs))
}

/// Minimizes `Tr S` over Hermitian `n x n` matrices `S` subject to `lmis`.
pub fn minimize_trace(n: usize, lmis: Vec<Lmi>, settings: Settings) -> Result<Solution> {
    let problem = Problem::new(n, lmis);
    let p = problem.coords.len();

    let worst = problem
        .lmis
        .iter()
        .map(|l| linalg::min_eigenvalue(&HermitianMatrix::from_trusted(linalg::hermitian_part(&l.constant))))
        .fold(0.0_f64, f64::min);
    let alpha = 1.0 + 2.0 * (-worst);
    let mut x = DVector::zeros(p);
    for i in 0..n {
        x[i] = alpha;
    }

    let m = problem.barrier_dim as f64;
    let mut t = (m / (alpha * n as f64)).max(1e-3);
    let mut iterations = 0;
    let mut factors = problem.factor(&x).ok_or(Error::Solver { iterations: 0, gap: f64::NAN, residual: f64::NAN })?;

    // The dual certificate degrades at large t before the primal iterate
    // does, so the two are tracked separately.
    let mut certified: Option<Solution> = None;
    let mut primal: Option<(f64, DVector<f64>)> = None;
    'outer: loop {
        // centering
        let mut previous = f64::INFINITY;
        for _ in 0..CENTERING_STEPS {
            if iterations >= settings.max_iterations {
                if certified.is_none() {
                    return Err(Error::Solver { iterations, gap: m / t, residual: f64::NAN });
                }
                break 'outer;
            }
            iterations += 1;
            let inverses: Vec<CMatrix> = factors.iter().map(|ch| ch.inverse()).collect();
            let grad = problem.cost.scale(t) - problem.trace_against(&inverses);
            let hess = problem.hessian(&inverses);
            let Some(step) = solve_spd(&hess, &(-&grad)) else {
                if certified.is_none() {
                    return Err(Error::Solver { iterations, gap: m / t, residual: grad.amax() / t });
                }
                break 'outer;
            };
            let decrement = -grad.dot(&step);
            // In the quadratic phase, stop once rounding halts progress.
            if decrement <= 1e-24 || !decrement.is_finite() || (decrement < 1e-2 && decrement > 0.5 * previous) {
                break;
            }
            previous = decrement;
            // Damped Newton: for a self-concordant barrier the step
            // 1 / (1 + λ) stays feasible and decreases the objective.
            let lambda = decrement.sqrt();
            let mut s = if lambda < 0.25 { 1.0 } else { 1.0 / (1.0 + lambda) };
            let mut accepted = None;
            while s > 1e-12 {
                let trial = &x + step.scale(s);
                if let Some(tf) = problem.factor(&trial) {
                    accepted = Some((trial, tf));
                    break;
                }
                s *= 0.5;
            }
            match accepted {
                Some((nx, nf)) => {
                    x = nx;
                    factors = nf;
                }
                None => break,
            }
        }
        let value = problem.cost.dot(&x);
        if primal.as_ref().is_none_or(|(v, _)| value < *v) {
            primal = Some((value, x.clone()));
        }
        let sol = problem.certificate(&x, &factors, t, iterations);
        if sol.residual <= RESIDUAL_TOL && certified.as_ref().is_none_or(|b: &Solution| sol.lower > b.lower) {
            certified = Some(sol);
        }
        if m / t <= settings.gap_tol {
            break;
        }
        t *= settings.mu;
    }

    let Some(cert) = certified else {
        return Err(Error::Solver { iterations, gap: m / t, residual: f64::NAN });
    };
    let (value, x) = primal.expect("at least one outer step");
    let gap = (value - cert.lower).max(0.0);
    if gap > ACCEPT_GAP {
        return Err(Error::Solver { iterations, gap, residual: cert.residual });
    }
    Ok(Solution { value, lower: cert.lower, gap, residual: cert.residual, iterations, variable: problem.matrix(&x) })
}
