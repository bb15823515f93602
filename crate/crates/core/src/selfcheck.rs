//! Golden values checked by `bosent selfcheck`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blocks::BLOCK_TOL;
use crate::entanglement::{negativity, Status};
use crate::error::Result;
use crate::fock::{binomial, sector_dim, BasisTable, Bipartition};
use crate::geometry::{border_probe, default_eps_grid, werner_scan};
use crate::linalg::{self, c, CMatrix};
use crate::modes::{balanced_beamsplitter, haar_unitary, induced_unitary, transform_state};
use crate::program::Settings;
use crate::robustness::{block_robustness, robustness_generalized, robustness_standard, Options};
use crate::states::{anticoherent_mixture, maximally_entangled, phase_state, totally_mixed};

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn basis(n: usize, m: usize, first: usize) -> Result<Arc<BasisTable>> {
    Ok(Arc::new(BasisTable::enumerate(Bipartition::new(n, m, first)?)?))
}

fn item(name: &'static str, check: impl FnOnce() -> Result<(bool, String)>) -> CheckItem {
    match check() {
        Ok((passed, detail)) => CheckItem { name, passed, detail },
        Err(e) => CheckItem { name, passed: false, detail: format!("error: {e}") },
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn run() -> Vec<CheckItem> {
    vec![
        item("basis-dimension", || {
            let b = basis(2, 4, 2)?;
            Ok((b.dim() == 10, format!("D = {} for N=2, M=4, m=2", b.dim())))
        }),
        item("dimension-identity", || {
            let mut bad = Vec::new();
            for n in 0..=6usize {
                for m in 2..=5usize {
                    for first in 1..m {
                        let sum: u64 = (0..=n)
                            .map(|k| sector_dim(k, first).unwrap() * sector_dim(n - k, m - first).unwrap())
                            .sum();
                        if Some(sum) != binomial((n + m - 1) as u64, n as u64) {
                            bad.push((n, m, first));
                        }
                    }
                }
            }
            Ok((bad.is_empty(), format!("failures: {bad:?}")))
        }),
        item("max-entangled-negativity", || {
            let mut worst: f64 = 0.0;
            for (n, m, first) in [(2, 2, 1), (3, 2, 1), (2, 4, 2), (3, 3, 1)] {
                let b = basis(n, m, first)?;
                let cap = b.schmidt_capacity() as f64;
                let neg = negativity(&maximally_entangled(b).to_density())?;
                worst = worst.max((neg - (cap - 1.0) / 2.0).abs());
            }
            Ok((worst <= 1e-9, format!("max deviation from (𝒟-1)/2: {worst:.3e}")))
        }),
        item("phase-state-bounds", || {
            let mut ok = true;
            let mut detail = Vec::new();
            for n in [2usize, 3, 5] {
                let rho = phase_state(basis(n, 2, 1)?, &vec![0.0; n + 1])?.to_density();
                let b = robustness_generalized(&rho, &Options::default())?.bounds.expect("generalized");
                ok &= close(b.lambda_d, n as f64, 1e-9) && close(b.l1, n as f64, 1e-9);
                detail.push(format!("N={n}: λD={:.12}, l1={:.12}", b.lambda_d, b.l1));
            }
            Ok((ok, detail.join("; ")))
        }),
        item("anticoherent-mixture-bounds", || {
            let mut ok = true;
            let mut detail = Vec::new();
            for n in [2usize, 3, 5] {
                let rho = anticoherent_mixture(basis(n, 2, 1)?)?;
                let b = robustness_generalized(&rho, &Options::default())?.bounds.expect("generalized");
                ok &= close(b.lambda_d, 1.0 / n as f64, 1e-9) && close(b.l1_nd, 1.0, 1e-9);
                detail.push(format!("N={n}: λD={:.12}, |ρ_ND|={:.12}", b.lambda_d, b.l1_nd));
            }
            Ok((ok, detail.join("; ")))
        }),
        item("coherent-states-infinite-robustness", || {
            let b = basis(3, 2, 1)?;
            let a = robustness_standard(&phase_state(b.clone(), &[0.0; 4])?.to_density(), &Options::default())?;
            let e = robustness_standard(&anticoherent_mixture(b)?, &Options::default())?;
            Ok((a.value.is_infinite() && e.value.is_infinite(), "R_s = inf for both".into()))
        }),
        item("bell-block-program", || {
            let h = 0.5 * (1.0 - 1e-7);
            let mut rho = CMatrix::identity(4, 4) * c(0.25e-7, 0.0);
            for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
                rho[(i, j)] += c(h, 0.0);
            }
            let r = block_robustness(&rho, 2, 2, crate::robustness::Kind::Standard, Settings::default())?;
            Ok((close(r.value, 1.0, 1e-6), format!("convex program value {:.9}, closed form 1", r.value)))
        }),
        item("beamsplitter-two-photons", || {
            let b = basis(2, 2, 1)?;
            let g = induced_unitary(&balanced_beamsplitter(), &b)?;
            let col = b.index_of(&[1, 1]).expect("in basis");
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut expected = nalgebra::DVector::zeros(b.dim());
            expected[b.index_of(&[2, 0]).expect("in basis")] = c(h, 0.0);
            expected[b.index_of(&[0, 2]).expect("in basis")] = c(-h, 0.0);
            let dev = (g.column(col) - expected).camax();
            Ok((dev <= 1e-10, format!("|1,1> image deviation {dev:.3e}")))
        }),
        item("totally-mixed-invariance", || {
            let b = basis(3, 2, 1)?;
            let rho = totally_mixed(b);
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let out = transform_state(&rho, &haar_unitary(2, &mut rng))?;
                worst = worst.max(linalg::max_abs(&(out.matrix() - rho.matrix())));
            }
            Ok((worst <= 1e-12, format!("max deviation {worst:.3e}")))
        }),
        item("werner-no-threshold", || {
            let rows = werner_scan(2, &[1e-6], BLOCK_TOL)?;
            let r = &rows[0];
            Ok((
                r.negativity > 1e-9 && r.status == Status::Entangled,
                format!("p=1e-6: negativity {:.3e}", r.negativity),
            ))
        }),
        item("border-of-totally-mixed", || {
            let b = basis(2, 2, 1)?;
            let ent = phase_state(b.clone(), &[0.0; 3])?.to_density();
            let rows = border_probe(&totally_mixed(b), &ent, &default_eps_grid(), BLOCK_TOL)?;
            let all = rows.iter().all(|r| r.status == Status::Entangled);
            Ok((all, format!("entangled at all {} eps down to 1e-8", rows.len())))
        }),
    ]
}
