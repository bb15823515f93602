//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use bosent::fock::{BasisTable, Bipartition};
use bosent::linalg::{c, CMatrix, CVector};
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn basis(n: usize, modes: usize, first: usize) -> Arc<BasisTable> {
    Arc::new(BasisTable::enumerate(Bipartition::new(n, modes, first).unwrap()).unwrap())
}

/// Occupation vectors of `n` particles in `modes` modes by exhaustive search
/// over `[0, n]^modes`.
pub fn brute_force_occupations(n: usize, modes: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let total = (n + 1).pow(modes as u32);
    for code in 0..total {
        let mut x = code;
        let mut occ = Vec::with_capacity(modes);
        for _ in 0..modes {
            occ.push((x % (n + 1)) as u32);
            x /= n + 1;
        }
        if occ.iter().sum::<u32>() as usize == n {
            out.push(occ);
        }
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Permanent by expansion over all permutations.
pub fn permanent(m: &CMatrix) -> num_complex::Complex64 {
    fn rec(m: &CMatrix, row: usize, used: &mut Vec<bool>) -> num_complex::Complex64 {
        let n = m.nrows();
        if row == n {
            return c(1.0, 0.0);
        }
        let mut acc = c(0.0, 0.0);
        for col in 0..n {
            if !used[col] {
                used[col] = true;
                acc += m[(row, col)] * rec(m, row + 1, used);
                used[col] = false;
            }
        }
        acc
    }
    rec(m, 0, &mut vec![false; m.nrows()])
}

/// `⟨out|Γ(U)|in⟩ = Perm(U[out, in]) / √(Π out! Π in!)`, rows of `U`
/// repeated by `out`, columns by `in`.
pub fn gamma_by_permanent(u: &CMatrix, basis: &BasisTable) -> CMatrix {
    let d = basis.dim();
    CMatrix::from_fn(d, d, |r, col| {
        let (o, i) = (basis.occupation(r), basis.occupation(col));
        let rows: Vec<usize> = o.iter().enumerate().flat_map(|(j, &k)| std::iter::repeat_n(j, k as usize)).collect();
        let cols: Vec<usize> = i.iter().enumerate().flat_map(|(j, &k)| std::iter::repeat_n(j, k as usize)).collect();
        let sub = CMatrix::from_fn(rows.len(), cols.len(), |a, b| u[(rows[a], cols[b])]);
        let norm: f64 = o.iter().chain(&i).map(|&x| factorial(x)).product::<f64>().sqrt();
        permanent(&sub) / norm
    })
}

/// Image of `|k, N-k⟩` under the balanced beamsplitter, as amplitudes of
/// `|j, N-j⟩` for `j = 0..=N`, from the binomial expansion of
/// `((a1† + a2†)/√2)^k ((a1† - a2†)/√2)^{N-k}`.
pub fn beamsplitter_image(n: usize, k: usize) -> Vec<f64> {
    let pre = 2f64.powf(-(n as f64) / 2.0) / (factorial(k as u32) * factorial((n - k) as u32)).sqrt();
    (0..=n)
        .map(|j| {
            let mut acc = 0.0;
            for r in 0..=k.min(j) {
                let s = j - r;
                if s > n - k {
                    continue;
                }
                let sign = if (n - k - s).is_multiple_of(2) { 1.0 } else { -1.0 };
                acc += (binomial(k as u64, r as u64) * binomial((n - k) as u64, s as u64)) as f64 * sign;
            }
            pre * acc * (factorial(j as u32) * factorial((n - j) as u32)).sqrt()
        })
        .collect()
}

pub fn random_vector<R: Rng>(rng: &mut R, dim: usize) -> CVector {
    let v = DVector::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    });
    let n = v.norm();
    v.unscale(n)
}

/// Random density matrix of the given rank (Wishart-like).
pub fn random_density<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for _ in 0..rank {
        let v = random_vector(rng, dim);
        let w: f64 = rng.gen_range(0.1..1.0);
        m += (&v * v.adjoint()) * c(w, 0.0);
    }
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    m / c(tr, 0.0)
}

/// Random weights on `len` entries summing to one.
pub fn random_weights<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Block-diagonal density matrix with the given normalized blocks and weights.
pub fn block_diagonal(basis: &BasisTable, blocks: &[CMatrix], weights: &[f64]) -> CMatrix {
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for (s, (b, &w)) in basis.sectors().iter().zip(blocks.iter().zip(weights)) {
        m.view_mut((s.offset, s.offset), (s.dim(), s.dim())).copy_from(&(b * c(w, 0.0)));
    }
    m
}

/// Sum of singular values of the `da x db` coefficient matrix of `v`.
pub fn schmidt_sum(v: &CVector, da: usize, db: usize) -> f64 {
    CMatrix::from_fn(da, db, |i, j| v[i * db + j]).singular_values().iter().sum()
}
