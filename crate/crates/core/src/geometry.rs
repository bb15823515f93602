//! Probes of the separable set: perturbations of separable anchors,
//! Werner-like scans and mode-unitary sweeps.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blocks::{block_decompose, is_block_diagonal};
use crate::entanglement::{is_separable, negativity, partial_transpose, Status};
use crate::error::{Error, Result, Violation};
use crate::fock::{BasisTable, Bipartition};
use crate::linalg;
use crate::modes::{beamsplitter_across, haar_unitary, transform_state, ModeUnitary};
use crate::states::{maximally_entangled, werner_like, DensityMatrix};

#[derive(Debug, Clone, Serialize)]
pub struct BorderRow {
    pub eps: f64,
    pub status: Status,
    pub negativity: f64,
    pub nb_linf: f64,
}

/// Default grid `1e-1, 1e-2, ..., 1e-8`.
pub fn default_eps_grid() -> Vec<f64> {
    (1..=8).map(|k| 10f64.powi(-k)).collect()
}

/// Verdicts along `ρ_ε = (ρ_sep + ε ρ_ent) / (1 + ε)`.
pub fn border_probe(
    sep: &DensityMatrix,
    ent: &DensityMatrix,
    eps_grid: &[f64],
    block_tol: f64,
) -> Result<Vec<BorderRow>> {
    if !Arc::ptr_eq(sep.basis(), ent.basis()) && sep.basis().bipartition() != ent.basis().bipartition() {
        return Err(Error::BasisMismatch("anchor and perturbation live on different bases".into()));
    }
    if is_separable(sep, block_tol).status != Status::Separable {
        return Err(Error::invalid(Violation::Other("anchor: not certified separable".into())));
    }
    if is_block_diagonal(ent, block_tol) {
        return Err(Error::invalid(Violation::Other("perturbation: must not be block-diagonal".into())));
    }
    if let Some(&bad) = eps_grid.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::invalid(Violation::Other(format!("eps grid: {bad} is not a nonnegative number"))));
    }
    eps_grid
        .iter()
        .map(|&eps| {
            let rho = sep.perturbed(ent, eps)?;
            Ok(BorderRow {
                eps,
                status: is_separable(&rho, block_tol).status,
                negativity: negativity(&rho)?,
                nb_linf: block_decompose(&rho).nb_linf(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct WernerRow {
    pub p: f64,
    pub negativity: f64,
    /// `‖ρ^Γ‖₁`.
    pub trace_norm: f64,
    pub status: Status,
}

/// `0` followed by `steps` points log-spaced from `1e-6` to `1`.
pub fn werner_grid(steps: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    match steps {
        0 => {}
        1 => grid.push(1.0),
        _ => grid.extend((0..steps).map(|i| 10f64.powf(-6.0 + 6.0 * i as f64 / (steps - 1) as f64))),
    }
    grid
}

/// Two-mode `p |ψ⟩⟨ψ| + (1-p) I/D` with `ψ` maximally entangled.
pub fn werner_scan(n: usize, p_grid: &[f64], block_tol: f64) -> Result<Vec<WernerRow>> {
    let basis = Arc::new(BasisTable::enumerate(Bipartition::two_mode(n)?)?);
    let psi = maximally_entangled(basis);
    p_grid
        .iter()
        .map(|&p| {
            let rho = werner_like(p, &psi)?;
            Ok(WernerRow {
                p,
                negativity: negativity(&rho)?,
                trace_norm: linalg::trace_norm(&partial_transpose(&rho)?),
                status: is_separable(&rho, block_tol).status,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub sample: usize,
    /// `"beamsplitter"` or `"haar"`.
    pub unitary: &'static str,
    pub negativity: f64,
    pub status: Status,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub samples: usize,
    pub separable: usize,
    pub fraction: f64,
    pub rows: Vec<SweepRow>,
}

/// Separability of `Γ(U) ρ Γ(U)†` over the beamsplitter across the cut and
/// `samples - 1` seeded Haar unitaries.
pub fn bipartition_sweep(rho: &DensityMatrix, samples: usize, seed: u64, block_tol: f64) -> Result<SweepReport> {
    if samples == 0 {
        return Err(Error::invalid(Violation::Other("samples: at least one required".into())));
    }
    let modes = rho.basis().modes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(samples);
    for sample in 0..samples {
        let (u, unitary): (ModeUnitary, _) = if sample == 0 {
            (beamsplitter_across(rho.basis()), "beamsplitter")
        } else {
            (haar_unitary(modes, &mut rng), "haar")
        };
        let out = transform_state(rho, &u)?;
        rows.push(SweepRow {
            sample,
            unitary,
            negativity: negativity(&out)?,
            status: is_separable(&out, block_tol).status,
        });
    }
    let separable = rows.iter().filter(|r| r.status == Status::Separable).count();
    Ok(SweepReport { samples, separable, fraction: separable as f64 / samples as f64, rows })
}
