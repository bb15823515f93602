//! Passive mode transformations `b_i = Σ_j U_ij a_j` and their action on the
//! `N`-particle sector.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result, Violation};
use crate::fock::{compositions, BasisTable};
use crate::linalg::{self, c, CMatrix, ONE, ZERO};
use crate::states::{DensityMatrix, PureState};

/// Largest entry of `U†U - I` accepted as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    matrix: CMatrix,
}

impl ModeUnitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let (r, cols) = matrix.shape();
        if r != cols || r == 0 {
            return Err(Error::invalid(Violation::Shape { expected: r.max(1), rows: r, cols }));
        }
        let defect = linalg::max_abs(&(matrix.adjoint() * &matrix - CMatrix::identity(r, r)));
        if defect.is_nan() || defect > UNITARY_TOL {
            return Err(Error::invalid(Violation::Other(format!(
                "unitarity: max |U†U - I| = {defect:.3e} exceeds {UNITARY_TOL:.0e}"
            ))));
        }
        Ok(ModeUnitary { matrix })
    }

    pub fn identity(modes: usize) -> Self {
        ModeUnitary { matrix: CMatrix::identity(modes, modes) }
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        ModeUnitary { matrix: self.matrix.adjoint() }
    }

    /// `self · other`.
    pub fn compose(&self, other: &ModeUnitary) -> Self {
        ModeUnitary { matrix: &self.matrix * &other.matrix }
    }
}

/// `[[1, 1], [1, -1]] / √2`.
pub fn balanced_beamsplitter() -> ModeUnitary {
    beamsplitter(2, 0, 1)
}

/// Balanced beamsplitter on modes `i < j` of `modes`, identity elsewhere.
pub fn beamsplitter(modes: usize, i: usize, j: usize) -> ModeUnitary {
    assert!(i < j && j < modes, "beamsplitter modes out of range");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = CMatrix::identity(modes, modes);
    m[(i, i)] = c(h, 0.0);
    m[(i, j)] = c(h, 0.0);
    m[(j, i)] = c(h, 0.0);
    m[(j, j)] = c(-h, 0.0);
    ModeUnitary { matrix: m }
}

/// Beamsplitter between the last mode of the first partition and the first
/// mode of the second.
pub fn beamsplitter_across(basis: &BasisTable) -> ModeUnitary {
    let bp = basis.bipartition();
    beamsplitter(bp.modes, bp.first - 1, bp.first)
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> ModeUnitary {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMatrix::from_fn(modes, modes, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(h * re, h * im)
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..modes {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    ModeUnitary { matrix: q }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Multinomial `n! / Π r_j!`.
fn multinomial(r: &[u32]) -> f64 {
    let n: u32 = r.iter().sum();
    factorial(n) / r.iter().map(|&x| factorial(x)).product::<f64>()
}

/// `Γ(U)` on the `N`-particle sector:
/// `Γ(U)|n⟩ = Π_i (Σ_j U_ji a_j†)^{n_i} / √(n_i!) |0⟩`, so that `Γ(U)` equals
/// `U` for one particle and `Γ(UV) = Γ(U) Γ(V)`.
pub fn induced_unitary(u: &ModeUnitary, basis: &BasisTable) -> Result<CMatrix> {
    let m = basis.modes();
    if u.modes() != m {
        return Err(Error::BasisMismatch(format!("unitary acts on {} modes, basis has {m}", u.modes())));
    }
    let d = basis.dim();
    let um = u.matrix();
    let mut out = CMatrix::zeros(d, d);
    let mut powers: HashMap<u32, Vec<(Vec<u32>, f64)>> = HashMap::new();

    for col in 0..d {
        let n = basis.occupation(col);
        // polynomial in commuting a_j†, keyed by exponent vector
        let mut poly: HashMap<Vec<u32>, Complex64> = HashMap::from([(vec![0; m], ONE)]);
        for (i, &ni) in n.iter().enumerate() {
            if ni == 0 {
                continue;
            }
            let terms = powers.entry(ni).or_insert_with(|| {
                compositions(ni as usize, m)
                    .into_iter()
                    .map(|r| {
                        let w = multinomial(&r);
                        (r, w)
                    })
                    .collect()
            });
            let mut next: HashMap<Vec<u32>, Complex64> = HashMap::with_capacity(poly.len() * terms.len());
            for (r, w) in terms.iter() {
                let mut coeff = c(*w / factorial(ni).sqrt(), 0.0);
                for (j, &rj) in r.iter().enumerate() {
                    if rj > 0 {
                        coeff *= um[(j, i)].powu(rj);
                    }
                }
                if coeff == ZERO {
                    continue;
                }
                for (e, v) in &poly {
                    let key: Vec<u32> = e.iter().zip(r).map(|(a, b)| a + b).collect();
                    *next.entry(key).or_insert(ZERO) += v * coeff;
                }
            }
            poly = next;
        }
        for (e, v) in poly {
            let row = basis.index_of(&e).expect("exponents sum to N");
            let norm: f64 = e.iter().map(|&x| factorial(x)).product::<f64>().sqrt();
            out[(row, col)] += v * norm;
        }
    }
    Ok(out)
}

/// `Γ(U) ρ Γ(U)†`.
pub fn transform_state(rho: &DensityMatrix, u: &ModeUnitary) -> Result<DensityMatrix> {
    let g = induced_unitary(u, rho.basis())?;
    let m = linalg::hermitian_part(&(&g * rho.matrix() * g.adjoint()));
    Ok(DensityMatrix::from_trusted(rho.basis().clone(), m))
}

/// `Γ(U) |ψ⟩`.
pub fn transform_pure(psi: &PureState, u: &ModeUnitary) -> Result<PureState> {
    let g = induced_unitary(u, psi.basis())?;
    PureState::normalized(Arc::clone(psi.basis()), &g * psi.amplitudes())
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fock::Bipartition;
    use crate::states::{diagonal_state, totally_mixed};

    fn basis(n: usize, m: usize, first: usize) -> Arc<BasisTable> {
        Arc::new(BasisTable::enumerate(Bipartition::new(n, m, first).unwrap()).unwrap())
    }

    #[test]
    fn beamsplitter_is_unitary_and_involutive() {
        let b = balanced_beamsplitter();
        assert!(ModeUnitary::new(b.matrix().clone()).is_ok());
        assert!(linalg::max_abs(&(b.compose(&b).matrix() - CMatrix::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn one_particle_sector_is_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = haar_unitary(3, &mut rng);
        let b = basis(1, 3, 1);
        let g = induced_unitary(&u, &b).unwrap();
        let idx = |j: usize| {
            let mut e = vec![0; 3];
            e[j] = 1;
            b.index_of(&e).unwrap()
        };
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[(idx(j), idx(i))] - u.matrix()[(j, i)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hong_ou_mandel() {
        let b = basis(2, 2, 1);
        let g = induced_unitary(&balanced_beamsplitter(), &b).unwrap();
        let col = b.index_of(&[1, 1]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g[(b.index_of(&[2, 0]).unwrap(), col)] - c(h, 0.0)).norm() < 1e-15);
        assert!((g[(b.index_of(&[0, 2]).unwrap(), col)] - c(-h, 0.0)).norm() < 1e-15);
        assert!(g[(col, col)].norm() < 1e-15);
    }

    #[test]
    fn identity_and_unitarity() {
        let b = basis(3, 3, 1);
        let g = induced_unitary(&ModeUnitary::identity(3), &b).unwrap();
        assert!(linalg::max_abs(&(g - CMatrix::identity(b.dim(), b.dim()))) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = induced_unitary(&haar_unitary(3, &mut rng), &b).unwrap();
        assert!(linalg::max_abs(&(g.adjoint() * &g - CMatrix::identity(b.dim(), b.dim()))) < 1e-12);
    }

    #[test]
    fn totally_mixed_is_invariant() {
        let b = basis(2, 3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = totally_mixed(b);
        let out = transform_state(&rho, &haar_unitary(3, &mut rng)).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - rho.matrix())) < 1e-14);
    }

    #[test]
    fn diagonal_state_gains_coherence() {
        let b = basis(1, 2, 1);
        let rho = diagonal_state(b, &[0.7, 0.3]).unwrap();
        let out = transform_state(&rho, &balanced_beamsplitter()).unwrap();
        assert!((out.matrix()[(0, 1)].norm() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMatrix::from_diagonal_element(2, 2, c(1.1, 0.0));
        assert!(ModeUnitary::new(m).is_err());
        let b = basis(2, 3, 1);
        assert!(induced_unitary(&balanced_beamsplitter(), &b).is_err());
    }
}
