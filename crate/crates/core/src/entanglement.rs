//! Partial transposition, negativity, Schmidt spectra, separability verdicts
//! and reduced states.
//!
//! Partial transposition acts on the global `A (x) B` embedding of the
//! `N`-particle sector (`A = Σ_k C^{D_k}`, `B = Σ_k C^{D_{N-k}}`): coherences
//! between different `k` sectors land outside the sector after transposition,
//! so a sector-local transpose would not be defined for them.

use serde::Serialize;

use crate::blocks::{block_decompose, is_block_diagonal, BlockDecomposition};
use crate::error::{Error, Result};
use crate::fock::{BasisTable, DEFAULT_DIM_CAP};
use crate::linalg::{self, CMatrix, HermitianMatrix, ZERO};
use crate::states::{DensityMatrix, PureState};

/// Negativities below this are reported as zero.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

fn check_embedding(basis: &BasisTable, cap: usize) -> Result<usize> {
    let n = basis.a_dim() * basis.b_dim();
    if n > cap {
        return Err(Error::DimensionCap { dim: n, cap });
    }
    Ok(n)
}

/// `ρ` placed on the `A_dim * B_dim` product grid, zero off the sector.
pub fn embed(rho: &DensityMatrix) -> Result<CMatrix> {
    let basis = rho.basis();
    let n = check_embedding(basis, DEFAULT_DIM_CAP)?;
    let bd = basis.b_dim();
    let cells = basis.embedding();
    let m = rho.matrix();
    let mut out = CMatrix::from_element(n, n, ZERO);
    for (i, &(a, b)) in cells.iter().enumerate() {
        for (j, &(a2, b2)) in cells.iter().enumerate() {
            out[(a * bd + b, a2 * bd + b2)] = m[(i, j)];
        }
    }
    Ok(out)
}

fn transposed_embedding(rho: &DensityMatrix, cap: usize) -> Result<CMatrix> {
    let basis = rho.basis();
    let n = check_embedding(basis, cap)?;
    let bd = basis.b_dim();
    let cells = basis.embedding();
    let m = rho.matrix();
    let mut out = CMatrix::from_element(n, n, ZERO);
    // ((a,b),(a',b')) of the embedding moves to ((a,b'),(a',b)).
    for (i, &(a, b)) in cells.iter().enumerate() {
        for (j, &(a2, b2)) in cells.iter().enumerate() {
            out[(a * bd + b2, a2 * bd + b)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Partial transpose on the second embedding factor.
pub fn partial_transpose(rho: &DensityMatrix) -> Result<HermitianMatrix> {
    partial_transpose_capped(rho, DEFAULT_DIM_CAP)
}

pub fn partial_transpose_capped(rho: &DensityMatrix, cap: usize) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix::from_trusted(transposed_embedding(rho, cap)?))
}

/// `(‖ρ^Γ‖₁ - Tr ρ) / 2`.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    let pt = transposed_embedding(rho, DEFAULT_DIM_CAP)?;
    let support = linalg::compress_support(&pt);
    let tn = linalg::trace_norm(&HermitianMatrix::from_trusted(support));
    Ok(clamp_negativity((tn - rho.trace()) / 2.0))
}

fn clamp_negativity(x: f64) -> f64 {
    if x < NEGATIVITY_FLOOR {
        0.0
    } else {
        x
    }
}

/// Negativity of a normalized bipartite matrix on `C^da (x) C^db`.
pub fn block_negativity(block: &CMatrix, da: usize, db: usize) -> f64 {
    let pt = linalg::partial_transpose_second(block, da, db);
    let tn = linalg::trace_norm(&HermitianMatrix::from_trusted(pt));
    let tr: f64 = block.diagonal().iter().map(|z| z.re).sum();
    clamp_negativity((tn - tr) / 2.0)
}

/// Schmidt coefficients of each sector component, nonincreasing per block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtSpectrum {
    pub blocks: Vec<Vec<f64>>,
}

impl SchmidtSpectrum {
    pub fn sum(&self) -> f64 {
        self.blocks.iter().flatten().sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.blocks.iter().flatten().map(|x| x * x).sum()
    }

    /// Coefficients above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.blocks.iter().flatten().filter(|&&x| x > tol).count()
    }
}

/// Singular values of every `D_k x D_{N-k}` coefficient matrix `ψ_{kσσ'}`.
pub fn schmidt(psi: &PureState) -> SchmidtSpectrum {
    let amps = psi.amplitudes();
    let blocks = psi
        .basis()
        .sectors()
        .iter()
        .map(|s| {
            let coeffs =
                CMatrix::from_fn(s.dim_first(), s.dim_second(), |i, j| amps[s.offset + i * s.dim_second() + j]);
            block_schmidt(&coeffs)
        })
        .collect();
    SchmidtSpectrum { blocks }
}

/// Nonincreasing singular values of a coefficient matrix.
pub fn block_schmidt(coeffs: &CMatrix) -> Vec<f64> {
    if coeffs.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = coeffs.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `((Σ ψ̃)² - 1) / 2`.
pub fn pure_negativity_from_schmidt(s: &SchmidtSpectrum) -> f64 {
    let total = s.sum();
    clamp_negativity((total * total - 1.0) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Separable,
    Entangled,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    NonBlockDiagonal,
    BlockNpt,
    AllBlocksPpt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparabilityVerdict {
    pub status: Status,
    /// Whether the PPT test decides separability for this instance.
    pub exact: bool,
    pub reasons: Vec<Reason>,
}

/// Every state on a `da x db` block is PPT-decidable: one side is trivial, or
/// the block is `2 x 2` / `2 x 3`.
pub fn block_ppt_exact(da: usize, db: usize) -> bool {
    let (lo, hi) = (da.min(db), da.max(db));
    lo <= 1 || (lo <= 2 && hi <= 3)
}

/// Whether PPT is necessary and sufficient for every block-diagonal state on
/// this basis, given which blocks are populated.
pub fn ppt_exact_regime(basis: &BasisTable, populated: impl Fn(usize) -> bool) -> bool {
    let bp = basis.bipartition();
    if bp.modes == 2 || bp.first == 1 || bp.first == bp.modes - 1 {
        return true;
    }
    basis.sectors().iter().filter(|s| populated(s.k)).all(|s| block_ppt_exact(s.dim_first(), s.dim_second()))
}

fn verdict_from(dec: &BlockDecomposition, rho: &DensityMatrix, block_diagonal: bool) -> SeparabilityVerdict {
    if !block_diagonal {
        return SeparabilityVerdict { status: Status::Entangled, exact: true, reasons: vec![Reason::NonBlockDiagonal] };
    }
    let npt = dec.blocks.iter().flatten().any(|b| block_negativity(&b.matrix, b.dim_first, b.dim_second) > 0.0);
    if npt {
        return SeparabilityVerdict { status: Status::Entangled, exact: true, reasons: vec![Reason::BlockNpt] };
    }
    let exact = ppt_exact_regime(rho.basis(), |k| dec.blocks[k].is_some());
    SeparabilityVerdict {
        status: if exact { Status::Separable } else { Status::Undetermined },
        exact,
        reasons: vec![Reason::AllBlocksPpt],
    }
}

/// Separability via block structure plus blockwise PPT.
pub fn is_separable(rho: &DensityMatrix, block_tol: f64) -> SeparabilityVerdict {
    let dec = block_decompose(rho);
    let bd = is_block_diagonal(rho, block_tol);
    verdict_from(&dec, rho, bd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Clone)]
pub struct ReducedState {
    pub matrix: HermitianMatrix,
    /// Ascending.
    pub spectrum: Vec<f64>,
    /// Natural-log von Neumann entropy.
    pub entropy: f64,
    pub purity: f64,
}

/// Partial trace of the embedded state over the other factor.
pub fn reduced_state(rho: &DensityMatrix, side: Side) -> Result<ReducedState> {
    let basis = rho.basis();
    check_embedding(basis, DEFAULT_DIM_CAP)?;
    let cells = basis.embedding();
    let m = rho.matrix();
    let dim = match side {
        Side::First => basis.a_dim(),
        Side::Second => basis.b_dim(),
    };
    let mut r = CMatrix::from_element(dim, dim, ZERO);
    for (i, &(a, b)) in cells.iter().enumerate() {
        for (j, &(a2, b2)) in cells.iter().enumerate() {
            match side {
                Side::First if b == b2 => r[(a, a2)] += m[(i, j)],
                Side::Second if a == a2 => r[(b, b2)] += m[(i, j)],
                _ => {}
            }
        }
    }
    let matrix = HermitianMatrix::from_trusted(linalg::hermitian_part(&r));
    let spectrum = linalg::eigenvalues(&matrix);
    let entropy = linalg::von_neumann_entropy(&spectrum);
    let purity = (matrix.matrix() * matrix.matrix()).trace().re;
    Ok(ReducedState { matrix, spectrum, entropy, purity })
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub negativity: f64,
    pub verdict: Status,
    pub exact: bool,
    pub reasons: Vec<Reason>,
    pub entropy_first: f64,
    pub purity_first: f64,
    pub decomposition: crate::blocks::DecompositionReport,
}

pub fn analyze(rho: &DensityMatrix, block_tol: f64) -> Result<AnalysisReport> {
    let dec = block_decompose(rho);
    let v = verdict_from(&dec, rho, is_block_diagonal(rho, block_tol));
    let red = reduced_state(rho, Side::First)?;
    Ok(AnalysisReport {
        negativity: negativity(rho)?,
        verdict: v.status,
        exact: v.exact,
        reasons: v.reasons,
        entropy_first: red.entropy,
        purity_first: red.purity,
        decomposition: dec.report(),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::blocks::BLOCK_TOL;
    use crate::fock::{BasisTable, Bipartition};
    use crate::linalg::{c, CVector};
    use crate::states::{diagonal_state, maximally_entangled, phase_state, totally_mixed};

    fn basis(n: usize, m_total: usize, m: usize) -> Arc<BasisTable> {
        Arc::new(BasisTable::enumerate(Bipartition::new(n, m_total, m).unwrap()).unwrap())
    }

    #[test]
    fn bell_like_pt_has_negative_half() {
        let b = basis(1, 2, 1);
        let s = 1.0 / 2f64.sqrt();
        let psi = PureState::new(b, CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)])).unwrap();
        let pt = partial_transpose(&psi.to_density()).unwrap();
        assert_eq!(pt.dim(), 4);
        let ev = linalg::eigenvalues(&pt);
        assert!((ev[0] + 0.5).abs() < 1e-14, "{ev:?}");
        assert!((negativity(&psi.to_density()).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn phase_state_trace_norm() {
        let rho = phase_state(basis(2, 2, 1), &[0.0, 1.0, 2.5]).unwrap().to_density();
        let pt = partial_transpose(&rho).unwrap();
        assert!((linalg::trace_norm(&pt) - 3.0).abs() < 1e-12);
        let rho3 = phase_state(basis(3, 2, 1), &[0.0; 4]).unwrap().to_density();
        assert!((negativity(&rho3).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn diagonal_states_have_zero_negativity() {
        let rho = diagonal_state(basis(3, 2, 1), &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(negativity(&rho).unwrap(), 0.0);
        let v = is_separable(&rho, BLOCK_TOL);
        assert_eq!(v.status, Status::Separable);
        assert!(v.exact);
    }

    #[test]
    fn schmidt_examples() {
        let b = basis(2, 4, 2);
        let fock = PureState::basis_vector(b.clone(), 4).unwrap();
        let s = schmidt(&fock);
        assert_eq!(s.rank(1e-12), 1);
        assert!((s.sum() - 1.0).abs() < 1e-15);
        assert_eq!(pure_negativity_from_schmidt(&s), 0.0);

        let me = schmidt(&maximally_entangled(b));
        assert_eq!(me.rank(1e-12), 4);
        for x in me.blocks.iter().flatten() {
            assert!((x - 0.5).abs() < 1e-12);
        }
        assert!((pure_negativity_from_schmidt(&me) - 1.5).abs() < 1e-12);

        let ph = schmidt(&phase_state(basis(4, 2, 1), &[0.3; 5]).unwrap());
        assert!((pure_negativity_from_schmidt(&ph) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn verdicts() {
        let b = basis(2, 2, 1);
        assert_eq!(is_separable(&totally_mixed(b.clone()), BLOCK_TOL).status, Status::Separable);
        let v = is_separable(&phase_state(b, &[0.0; 3]).unwrap().to_density(), BLOCK_TOL);
        assert_eq!(v.status, Status::Entangled);
        assert_eq!(v.reasons, vec![Reason::NonBlockDiagonal]);

        // Bell pair inside the 2x2 block of (N=2, M=4, m=2).
        let b = basis(2, 4, 2);
        let s = b.sector(1);
        let mut v = CVector::zeros(b.dim());
        let h = 1.0 / 2f64.sqrt();
        v[s.offset] = c(h, 0.0);
        v[s.offset + 3] = c(h, 0.0);
        let rho = PureState::new(b.clone(), v).unwrap().to_density();
        let verdict = is_separable(&rho, BLOCK_TOL);
        assert_eq!(verdict.status, Status::Entangled);
        assert_eq!(verdict.reasons, vec![Reason::BlockNpt]);

        // A PPT block-diagonal state outside the exact regime stays undetermined.
        let b = basis(4, 4, 2);
        let rho = totally_mixed(b);
        let verdict = is_separable(&rho, BLOCK_TOL);
        assert_eq!(verdict.status, Status::Undetermined);
        assert!(!verdict.exact);
    }

    #[test]
    fn reduced_states() {
        let b = basis(2, 2, 1);
        let red = reduced_state(&maximally_entangled(b.clone()).to_density(), Side::First).unwrap();
        assert!((red.entropy - 3f64.ln()).abs() < 1e-12);
        assert!((red.purity - 1.0 / 3.0).abs() < 1e-12);

        let fock = PureState::basis_vector(b, 1).unwrap().to_density();
        let red = reduced_state(&fock, Side::Second).unwrap();
        assert!(red.entropy.abs() < 1e-12);
        assert!((red.purity - 1.0).abs() < 1e-12);

        let b = basis(2, 4, 2);
        let me = maximally_entangled(b).to_density();
        let r1 = reduced_state(&me, Side::First).unwrap();
        let r2 = reduced_state(&me, Side::Second).unwrap();
        assert!((r1.entropy - 4f64.ln()).abs() < 1e-12);
        assert!((r2.purity - 0.25).abs() < 1e-12);
    }

    #[test]
    fn exactness_table() {
        assert!(block_ppt_exact(1, 7));
        assert!(block_ppt_exact(2, 3));
        assert!(block_ppt_exact(3, 2));
        assert!(!block_ppt_exact(2, 4));
        assert!(!block_ppt_exact(3, 3));
    }
}
