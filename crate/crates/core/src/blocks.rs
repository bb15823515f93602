//! Splitting a state into its `k`-sector blocks and the residues left over.

use serde::Serialize;

use crate::linalg::{self, c, CMatrix, ZERO};
use crate::states::DensityMatrix;

/// Default relative threshold for block-diagonality.
pub const BLOCK_TOL: f64 = 1e-12;
/// Blocks with weight at or below this are treated as absent.
pub const EMPTY_BLOCK: f64 = 1e-12;

/// Normalized `k` block on `C^{D_k} (x) C^{D_{N-k}}`.
#[derive(Debug, Clone)]
pub struct Block {
    pub k: usize,
    pub dim_first: usize,
    pub dim_second: usize,
    pub matrix: CMatrix,
}

#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub weights: Vec<f64>,
    pub blocks: Vec<Option<Block>>,
    pub rho_b: CMatrix,
    pub rho_nb: CMatrix,
    pub rho_d: CMatrix,
    pub rho_nd: CMatrix,
}

impl BlockDecomposition {
    pub fn nb_linf(&self) -> f64 {
        linalg::linf_norm(&self.rho_nb)
    }

    pub fn report(&self) -> DecompositionReport {
        DecompositionReport {
            p: self.weights.clone(),
            block_dims: self.blocks.iter().map(|b| b.as_ref().map(|b| [b.dim_first, b.dim_second])).collect(),
            nb_linf: self.nb_linf(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub p: Vec<f64>,
    /// `[D_k, D_{N-k}]`; `null` for an empty block.
    pub block_dims: Vec<Option<[usize; 2]>>,
    pub nb_linf: f64,
}

pub fn block_decompose(rho: &DensityMatrix) -> BlockDecomposition {
    let basis = rho.basis();
    let m = rho.matrix();
    let d = m.nrows();

    let mut rho_b = CMatrix::from_element(d, d, ZERO);
    let mut weights = Vec::with_capacity(basis.sectors().len());
    let mut blocks = Vec::with_capacity(basis.sectors().len());
    for s in basis.sectors() {
        let r = s.range();
        let sub = m.view((r.start, r.start), (s.dim(), s.dim())).into_owned();
        rho_b.view_mut((r.start, r.start), (s.dim(), s.dim())).copy_from(&sub);
        let p: f64 = sub.diagonal().iter().map(|z| z.re).sum();
        weights.push(p);
        blocks.push((p > EMPTY_BLOCK).then(|| Block {
            k: s.k,
            dim_first: s.dim_first(),
            dim_second: s.dim_second(),
            matrix: sub / c(p, 0.0),
        }));
    }
    let rho_nb = m - &rho_b;
    let rho_d = CMatrix::from_diagonal(&m.diagonal());
    let rho_nd = m - &rho_d;
    BlockDecomposition { weights, blocks, rho_b, rho_nb, rho_d, rho_nd }
}

/// No coherence between different `k` sectors, relative to `1 + max|ρ|`.
pub fn is_block_diagonal(rho: &DensityMatrix, tol: f64) -> bool {
    let threshold = tol * (1.0 + linalg::max_abs(rho.matrix()));
    block_decompose(rho).nb_linf() <= threshold
}

/// Diagonal in the Fock basis, same relative threshold.
pub fn is_diagonal(rho: &DensityMatrix, tol: f64) -> bool {
    let threshold = tol * (1.0 + linalg::max_abs(rho.matrix()));
    linalg::linf_norm(&block_decompose(rho).rho_nd) <= threshold
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fock::{BasisTable, Bipartition, FockLabel};
    use crate::states::{anticoherent_mixture, phase_state, totally_mixed, PureState};

    fn two_mode(n: usize) -> Arc<BasisTable> {
        Arc::new(BasisTable::enumerate(Bipartition::two_mode(n).unwrap()).unwrap())
    }

    #[test]
    fn phase_state_blocks_are_scalars() {
        let n = 3;
        let rho = phase_state(two_mode(n), &[0.1, 0.4, -2.0, 3.0]).unwrap().to_density();
        let dec = block_decompose(&rho);
        for (p, b) in dec.weights.iter().zip(&dec.blocks) {
            assert!((p - 0.25).abs() < 1e-15);
            let b = b.as_ref().unwrap();
            assert_eq!(b.matrix.shape(), (1, 1));
            assert!((b.matrix[(0, 0)] - linalg::ONE).norm() < 1e-14);
        }
        assert!(!is_block_diagonal(&rho, BLOCK_TOL));
        // two-mode: block part is the diagonal part
        assert!(linalg::max_abs(&(&dec.rho_b - &dec.rho_d)) == 0.0);
        assert!(linalg::max_abs(&(&dec.rho_nb - &dec.rho_nd)) == 0.0);
    }

    #[test]
    fn reassembly() {
        let rho = anticoherent_mixture(two_mode(4)).unwrap();
        let dec = block_decompose(&rho);
        assert!(linalg::max_abs(&(&dec.rho_b + &dec.rho_nb - rho.matrix())) < 1e-14);
        assert!(linalg::max_abs(&(&dec.rho_d + &dec.rho_nd - rho.matrix())) < 1e-14);
        assert!((dec.weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(!is_block_diagonal(&rho, BLOCK_TOL));
    }

    #[test]
    fn fock_vector_occupies_one_block() {
        let basis = Arc::new(BasisTable::enumerate(Bipartition::new(2, 4, 2).unwrap()).unwrap());
        let idx = basis.flat_index(FockLabel { k: 1, sigma: 1, sigma_prime: 0 }).unwrap();
        let rho = PureState::basis_vector(basis, idx).unwrap().to_density();
        let dec = block_decompose(&rho);
        assert_eq!(dec.weights, vec![0.0, 1.0, 0.0]);
        assert!(dec.blocks[0].is_none() && dec.blocks[2].is_none());
        let b = dec.blocks[1].as_ref().unwrap();
        assert_eq!((b.dim_first, b.dim_second), (2, 2));
        assert!(is_block_diagonal(&rho, BLOCK_TOL));
        assert_eq!(dec.nb_linf(), 0.0);
        let rep = dec.report();
        assert_eq!(rep.block_dims[1], Some([2, 2]));
        assert_eq!(rep.block_dims[0], None);
    }

    #[test]
    fn totally_mixed_is_block_diagonal() {
        let rho = totally_mixed(two_mode(3));
        assert!(is_block_diagonal(&rho, BLOCK_TOL));
        assert!(is_diagonal(&rho, BLOCK_TOL));
    }
}
