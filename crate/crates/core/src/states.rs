//! Density matrices and pure states in the flat Fock ordering, plus the named
//! state families used throughout the crate.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::entanglement::schmidt;
use crate::error::{Error, Result, Violation};
use crate::fock::BasisTable;
use crate::linalg::{self, c, CMatrix, CVector, HermitianMatrix};

/// Inputs this close to valid are repaired instead of rejected.
pub const REPAIR_TOL: f64 = 1e-6;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Arc<BasisTable>,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates `mat` against the basis. Deviations up to `1e-6` (hermiticity,
    /// trace, small negative eigenvalues) are repaired; anything larger is
    /// rejected with every violated invariant listed.
    pub fn new(basis: Arc<BasisTable>, mat: CMatrix) -> Result<Self> {
        let d = basis.dim();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::invalid(Violation::Shape { expected: d, rows: mat.nrows(), cols: mat.ncols() }));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid(Violation::Other("matrix contains non-finite entries".into())));
        }
        let mut violations = Vec::new();
        let (row, col, deviation) = linalg::hermiticity_defect(&mat).expect("square");
        if deviation > linalg::scaled_tol(&mat, REPAIR_TOL) {
            violations.push(Violation::NotHermitian { row, col, deviation });
        }
        let mut mat = linalg::hermitian_part(&mat);

        let trace: f64 = mat.diagonal().iter().map(|z| z.re).sum();
        if (trace - 1.0).abs() > REPAIR_TOL {
            violations.push(Violation::Trace { value: trace });
        } else if trace != 1.0 {
            mat /= c(trace, 0.0);
        }

        let eig = linalg::eig_hermitian(&HermitianMatrix::from_trusted(mat.clone()));
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -REPAIR_TOL {
            violations.push(Violation::NotPsd { min_eigenvalue: min });
        } else if min < -PSD_TOL && violations.is_empty() {
            let clipped = linalg::HermitianEigen {
                eigenvalues: eig.eigenvalues.map(|x| x.max(0.0)),
                eigenvectors: eig.eigenvectors,
            };
            mat = linalg::hermitian_part(&clipped.reconstruct());
            let t: f64 = mat.diagonal().iter().map(|z| z.re).sum();
            mat /= c(t, 0.0);
        }

        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        Ok(DensityMatrix { basis, mat })
    }

    /// For matrices that are density matrices by construction.
    pub(crate) fn from_trusted(basis: Arc<BasisTable>, mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), basis.dim());
        DensityMatrix { basis, mat }
    }

    pub fn basis(&self) -> &Arc<BasisTable> {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn hermitian(&self) -> HermitianMatrix {
        HermitianMatrix::from_trusted(self.mat.clone())
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn spectrum(&self) -> Vec<f64> {
        linalg::eigenvalues(&self.hermitian())
    }

    /// `(self + eps * other) / (1 + eps)`.
    pub fn perturbed(&self, other: &DensityMatrix, eps: f64) -> Result<DensityMatrix> {
        self.mix(other, eps / (1.0 + eps))
    }

    /// `(1 - w) self + w other`, `w` in `[0, 1]`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        if self.basis.bipartition() != other.basis.bipartition() {
            return Err(Error::BasisMismatch("mixing states on different bases".into()));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::invalid(Violation::Other(format!("mixing weight {w} outside [0, 1]"))));
        }
        let mat = self.mat.scale(1.0 - w) + other.mat.scale(w);
        Ok(DensityMatrix::from_trusted(self.basis.clone(), mat))
    }
}

#[derive(Debug, Clone)]
pub struct PureState {
    basis: Arc<BasisTable>,
    amplitudes: CVector,
}

impl PureState {
    /// Amplitudes in flat basis order; a squared norm within `1e-6` of one is
    /// renormalized exactly.
    pub fn new(basis: Arc<BasisTable>, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::invalid(Violation::Other(format!(
                "amplitude vector has length {}, basis dimension is {}",
                amplitudes.len(),
                basis.dim()
            ))));
        }
        let norm_sq = amplitudes.norm_squared();
        if norm_sq == 0.0 {
            return Err(Error::invalid(Violation::ZeroVector));
        }
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > REPAIR_TOL {
            return Err(Error::invalid(Violation::Norm { value: norm_sq }));
        }
        let amplitudes = amplitudes.unscale(norm_sq.sqrt());
        Ok(PureState { basis, amplitudes })
    }

    /// Any nonzero vector, scaled to unit norm.
    pub fn normalized(basis: Arc<BasisTable>, amplitudes: CVector) -> Result<Self> {
        let n = amplitudes.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid(Violation::ZeroVector));
        }
        Self::new(basis, amplitudes.unscale(n))
    }

    pub fn basis_vector(basis: Arc<BasisTable>, idx: usize) -> Result<Self> {
        if idx >= basis.dim() {
            return Err(Error::Index(format!("basis index {idx} >= D={}", basis.dim())));
        }
        let mut v = CVector::zeros(basis.dim());
        v[idx] = linalg::ONE;
        Ok(PureState { basis, amplitudes: v })
    }

    pub fn basis(&self) -> &Arc<BasisTable> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::from_trusted(self.basis.clone(), m)
    }
}

/// `I / D`.
pub fn totally_mixed(basis: Arc<BasisTable>) -> DensityMatrix {
    let d = basis.dim();
    let m = CMatrix::identity(d, d).scale(1.0 / d as f64);
    DensityMatrix::from_trusted(basis, m)
}

fn require_two_mode(basis: &BasisTable) -> Result<()> {
    if basis.bipartition().is_two_mode() {
        Ok(())
    } else {
        let bp = basis.bipartition();
        Err(Error::BasisMismatch(format!("two-mode (M=2, m=1) basis required, got M={}, m={}", bp.modes, bp.first)))
    }
}

/// `Σ_k e^{iφ_k} |k; N-k⟩ / sqrt(N+1)` on a two-mode basis.
pub fn phase_state(basis: Arc<BasisTable>, phases: &[f64]) -> Result<PureState> {
    require_two_mode(&basis)?;
    let d = basis.dim();
    if phases.len() != d {
        return Err(Error::invalid(Violation::Other(format!("expected {d} phases (N+1), got {}", phases.len()))));
    }
    let s = 1.0 / (d as f64).sqrt();
    let amps = CVector::from_iterator(d, phases.iter().map(|&p| Complex64::from_polar(s, p)));
    Ok(PureState { basis, amplitudes: amps })
}

/// Two-mode mixed state with uniform diagonal `1/(N+1)` and every coherence
/// equal to `-1/(N(N+1))`, i.e. `(I - E/(N+1)) / N` with `E` the all-ones
/// matrix.
pub fn anticoherent_mixture(basis: Arc<BasisTable>) -> Result<DensityMatrix> {
    require_two_mode(&basis)?;
    let n = basis.particles() as f64;
    let d = basis.dim();
    let diag = 1.0 / (n + 1.0);
    let off = -1.0 / (n * (n + 1.0));
    let m = CMatrix::from_fn(d, d, |i, j| if i == j { c(diag, 0.0) } else { c(off, 0.0) });
    Ok(DensityMatrix::from_trusted(basis, m))
}

/// Amplitude `1/sqrt(𝒟)` on the pairs `(σ, σ' = σ)` of every sector, for
/// `σ < min(D_k, D_{N-k})`.
pub fn maximally_entangled(basis: Arc<BasisTable>) -> PureState {
    let cap = basis.schmidt_capacity();
    let amp = c(1.0 / (cap as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(basis.dim());
    for s in basis.sectors() {
        for sigma in 0..s.dim_first().min(s.dim_second()) {
            v[s.offset + sigma * s.dim_second() + sigma] = amp;
        }
    }
    PureState { basis, amplitudes: v }
}

/// Whether all `𝒟` Schmidt coefficients are equal to `1/sqrt(𝒟)` within `tol`.
pub fn is_maximally_entangled(psi: &PureState, tol: f64) -> bool {
    let cap = psi.basis.schmidt_capacity();
    let target = 1.0 / (cap as f64).sqrt();
    schmidt(psi).blocks.iter().flatten().all(|&x| (x - target).abs() <= tol)
}

/// `p |ψ⟩⟨ψ| + (1 - p) I / D` for a maximally entangled `ψ`.
pub fn werner_like(p: f64, psi: &PureState) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::invalid(Violation::Other(format!("p={p} outside [0, 1]"))));
    }
    if !is_maximally_entangled(psi, 1e-9) {
        return Err(Error::invalid(Violation::Other("mixing state is not maximally entangled".into())));
    }
    let mixed = totally_mixed(psi.basis.clone());
    mixed.mix(&psi.to_density(), p)
}

/// Incoherent mixture of fixed-particle-number states sharing `(M, m)`.
#[derive(Debug, Clone)]
pub struct SectoredState {
    components: Vec<(f64, DensityMatrix)>,
}

impl SectoredState {
    pub fn components(&self) -> &[(f64, DensityMatrix)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

pub fn superselection_mixture(components: Vec<(f64, DensityMatrix)>) -> Result<SectoredState> {
    let mut violations = Vec::new();
    if components.is_empty() {
        return Err(Error::invalid(Violation::Other("mixture needs at least one component".into())));
    }
    for (i, (w, _)) in components.iter().enumerate() {
        if *w < 0.0 || !w.is_finite() {
            violations.push(Violation::NegativeWeight { index: i, value: *w });
        }
    }
    let sum: f64 = components.iter().map(|(w, _)| w).sum();
    if (sum - 1.0).abs() > 1e-10 {
        violations.push(Violation::Weights { sum });
    }
    let first = components[0].1.basis().clone();
    for (_, rho) in &components[1..] {
        if !first.same_modes(rho.basis()) {
            return Err(Error::BasisMismatch("mixture components must share (M, m)".into()));
        }
    }
    let mut seen = Vec::new();
    for (_, rho) in &components {
        let n = rho.basis().particles();
        if seen.contains(&n) {
            return Err(Error::BasisMismatch(format!("particle number N={n} appears twice")));
        }
        seen.push(n);
    }
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    Ok(SectoredState { components })
}

/// Diagonal density matrix from nonnegative populations summing to one.
pub fn diagonal_state(basis: Arc<BasisTable>, populations: &[f64]) -> Result<DensityMatrix> {
    if populations.len() != basis.dim() {
        return Err(Error::invalid(Violation::Other(format!(
            "expected {} populations, got {}",
            basis.dim(),
            populations.len()
        ))));
    }
    let v = DVector::from_iterator(populations.len(), populations.iter().map(|&x| c(x, 0.0)));
    DensityMatrix::new(basis, CMatrix::from_diagonal(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Bipartition;

    fn two_mode(n: usize) -> Arc<BasisTable> {
        Arc::new(BasisTable::enumerate(Bipartition::two_mode(n).unwrap()).unwrap())
    }

    #[test]
    fn basis_vector_projector() {
        let b = two_mode(2);
        let rho = PureState::basis_vector(b, 1).unwrap().to_density();
        assert_eq!(rho.matrix()[(1, 1)], linalg::ONE);
        assert_eq!(linalg::l1_norm(rho.matrix()), 1.0);
    }

    #[test]
    fn two_mode_single_particle_superposition() {
        let b = two_mode(1);
        let s = 1.0 / 2f64.sqrt();
        let psi = PureState::new(b, CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)])).unwrap();
        for z in psi.to_density().matrix().iter() {
            assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn pure_state_normalization() {
        let b = two_mode(1);
        assert!(PureState::new(b.clone(), CVector::zeros(2)).is_err());
        assert!(PureState::new(b.clone(), CVector::from_vec(vec![c(1.0, 0.0), c(0.5, 0.0)])).is_err());
        let psi = PureState::new(b, CVector::from_vec(vec![c(1.0 + 4e-7, 0.0), crate::linalg::ZERO])).unwrap();
        assert!((psi.amplitudes().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_state_outer_product() {
        let b = two_mode(2);
        let phases = [0.2, -0.7, 1.9];
        let rho = phase_state(b, &phases).unwrap().to_density();
        for k in 0..3 {
            for l in 0..3 {
                let want = Complex64::from_polar(1.0 / 3.0, phases[k] - phases[l]);
                assert!((rho.matrix()[(k, l)] - want).norm() < 1e-15);
            }
        }
        assert!(phase_state(two_mode(2), &[0.0, 0.0]).is_err());
        let multimode = Arc::new(BasisTable::enumerate(Bipartition::new(2, 3, 1).unwrap()).unwrap());
        assert!(phase_state(multimode, &[0.0; 6]).is_err());
    }

    #[test]
    fn anticoherent_entries_and_positivity() {
        let rho = anticoherent_mixture(two_mode(2)).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0 / 3.0).abs() < 1e-15);
        assert!((rho.matrix()[(0, 2)].re + 1.0 / 6.0).abs() < 1e-15);
        let spec = rho.spectrum();
        assert!(spec[0].abs() < 1e-12);
        assert!(DensityMatrix::new(rho.basis().clone(), rho.matrix().clone()).is_ok());
    }

    #[test]
    fn totally_mixed_is_identity_over_d() {
        let b = Arc::new(BasisTable::enumerate(Bipartition::new(2, 4, 2).unwrap()).unwrap());
        let rho = totally_mixed(b);
        assert_eq!(rho.dim(), 10);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!((rho.matrix()[(3, 3)].re - 0.1).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_trace_and_negative_spectrum() {
        let b = two_mode(1);
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5, 0.0), c(0.4, 0.0)]));
        match DensityMatrix::new(b.clone(), m) {
            Err(Error::Invalid(v)) => assert!(matches!(v[0], Violation::Trace { .. })),
            other => panic!("{other:?}"),
        }
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.1, 0.0), c(-0.1, 0.0)]));
        match DensityMatrix::new(b, m) {
            Err(Error::Invalid(v)) => assert!(matches!(v[0], Violation::NotPsd { .. })),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn werner_endpoints() {
        let b = two_mode(2);
        let psi = maximally_entangled(b.clone());
        let w0 = werner_like(0.0, &psi).unwrap();
        let w1 = werner_like(1.0, &psi).unwrap();
        assert!(linalg::max_abs(&(w0.matrix() - totally_mixed(b.clone()).matrix())) < 1e-15);
        assert!(linalg::max_abs(&(w1.matrix() - psi.to_density().matrix())) < 1e-15);
        assert!(werner_like(1.5, &psi).is_err());
        let fock = PureState::basis_vector(b, 0).unwrap();
        assert!(werner_like(0.5, &fock).is_err());
    }

    #[test]
    fn mixture_validation() {
        let a = totally_mixed(two_mode(1));
        let b = totally_mixed(two_mode(2));
        assert!(superselection_mixture(vec![(1.0, a.clone())]).is_ok());
        assert_eq!(superselection_mixture(vec![(0.5, a.clone()), (0.5, b.clone())]).unwrap().len(), 2);
        assert!(superselection_mixture(vec![(0.5, a.clone()), (0.4, b.clone())]).is_err());
        assert!(superselection_mixture(vec![(0.5, a.clone()), (0.5, a.clone())]).is_err());
        let other = totally_mixed(Arc::new(BasisTable::enumerate(Bipartition::new(2, 3, 1).unwrap()).unwrap()));
        assert!(superselection_mixture(vec![(0.5, a), (0.5, other)]).is_err());
    }
}
