//! Robustness of entanglement, standard and generalized.
//!
//! Block-diagonal states reduce to their `k` blocks. Pure blocks use the
//! closed form `(Σ α)² - 1` in their Schmidt coefficients, which is twice
//! the block negativity. Mixed blocks go through the PPT relaxation
//!
//! ```text
//! minimize Tr S  s.t.  S ⪰ 0,  (ρ_k + S)^Γ ⪰ 0   [, S^Γ ⪰ 0 for the standard kind]
//! ```
//!
//! which is exact on `1 x d`, `2 x 2` and `2 x 3` blocks and a lower bound
//! elsewhere.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::blocks::{block_decompose, is_block_diagonal, BlockDecomposition, BLOCK_TOL};
use crate::entanglement::{block_negativity, block_ppt_exact, block_schmidt, NEGATIVITY_FLOOR};
use crate::error::Result;
use crate::io::serialize_matrix;
use crate::linalg::{self, c, CMatrix, HermitianMatrix};
use crate::program::{self, LinearMap, Lmi, Settings};
use crate::states::{DensityMatrix, SectoredState};

/// A block whose top eigenvalue reaches `1 - PURITY_TOL` is treated as pure.
pub const PURITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Standard,
    Generalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PureNegativity,
    ConvexOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certainty {
    Exact,
    LowerBound,
    BoundsOnly,
}

/// Nonnegative value, `+∞` (serialized as `"inf"`), or a certified interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobustnessValue {
    Finite(f64),
    Infinite,
    Interval { lower: f64, upper: f64 },
}

impl RobustnessValue {
    pub fn is_infinite(&self) -> bool {
        matches!(self, RobustnessValue::Infinite)
    }

    /// Point value, or the lower end of an interval.
    pub fn lower(&self) -> f64 {
        match *self {
            RobustnessValue::Finite(v) => v,
            RobustnessValue::Infinite => f64::INFINITY,
            RobustnessValue::Interval { lower, .. } => lower,
        }
    }

    /// Point value, or the upper end of an interval.
    pub fn upper(&self) -> f64 {
        match *self {
            RobustnessValue::Finite(v) => v,
            RobustnessValue::Infinite => f64::INFINITY,
            RobustnessValue::Interval { upper, .. } => upper,
        }
    }

    fn scaled(self, w: f64) -> RobustnessValue {
        match self {
            RobustnessValue::Finite(v) => RobustnessValue::Finite(w * v),
            RobustnessValue::Infinite if w == 0.0 => RobustnessValue::Finite(0.0),
            RobustnessValue::Infinite => RobustnessValue::Infinite,
            RobustnessValue::Interval { lower, upper } => {
                RobustnessValue::Interval { lower: w * lower, upper: w * upper }
            }
        }
    }

    fn add(self, other: RobustnessValue) -> RobustnessValue {
        use RobustnessValue::*;
        match (self, other) {
            (Infinite, _) | (_, Infinite) => Infinite,
            (Finite(a), Finite(b)) => Finite(a + b),
            (a, b) => Interval { lower: a.lower() + b.lower(), upper: a.upper() + b.upper() },
        }
    }
}

impl Serialize for RobustnessValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            RobustnessValue::Finite(v) => s.serialize_f64(v),
            RobustnessValue::Infinite => s.serialize_str("inf"),
            RobustnessValue::Interval { lower, upper } => {
                let mut st = s.serialize_struct("Interval", 2)?;
                st.serialize_field("lower", &lower)?;
                st.serialize_field("upper", &upper)?;
                st.end()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockRobustness {
    pub value: f64,
    pub method: Method,
    pub status: Certainty,
    /// Certified duality gap of the convex program, if it was solved.
    pub gap: Option<f64>,
    /// Unnormalized mixing matrix `S` with `Tr S = value`.
    pub mixing: CMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockEntry {
    pub k: usize,
    pub p: f64,
    pub value: f64,
    pub method: Method,
    pub status: Certainty,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Bounds {
    #[serde(rename = "lambda_D")]
    pub lambda_d: f64,
    /// `Σ p_k R_g(ρ_k) + ‖ρ_NB‖_ℓ1`.
    pub l1: f64,
    /// `‖ρ_ND‖_ℓ1`.
    pub l1_nd: f64,
    /// Whether `l1` rests on exact block values.
    pub l1_certified: bool,
}

impl Bounds {
    /// Smallest certified upper bound.
    pub fn best(&self) -> f64 {
        let mut b = self.lambda_d.min(self.l1_nd);
        if self.l1_certified {
            b = b.min(self.l1);
        }
        b
    }
}

/// Explicit mixing matrix `S` and the mixed state `(ρ + S) / (1 + Tr S)`.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "serialize_matrix")]
    pub sigma_tilde: CMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub mixed: CMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessReport {
    pub kind: Kind,
    pub value: RobustnessValue,
    pub status: Certainty,
    pub per_block: Vec<BlockEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub block_tol: f64,
    pub settings: Settings,
    pub emit_witness: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { block_tol: BLOCK_TOL, settings: Settings::default(), emit_witness: false }
    }
}

fn status_of(da: usize, db: usize) -> Certainty {
    if block_ppt_exact(da, db) {
        Certainty::Exact
    } else {
        Certainty::LowerBound
    }
}

/// Robustness of a normalized block on `C^da (x) C^db`.
pub fn block_robustness(
    block: &CMatrix,
    da: usize,
    db: usize,
    kind: Kind,
    settings: Settings,
) -> Result<BlockRobustness> {
    let n = da * db;
    let zero = || CMatrix::zeros(n, n);
    let eig = linalg::eig_hermitian(&HermitianMatrix::from_trusted(linalg::hermitian_part(block)));
    let top = eig.eigenvalues.iter().copied().last().unwrap_or(0.0);

    if top >= 1.0 - PURITY_TOL {
        let psi = eig.eigenvectors.column(n - 1).into_owned();
        let (value, mixing) = pure_block(&psi, da, db);
        return Ok(BlockRobustness {
            value,
            method: Method::PureNegativity,
            status: Certainty::Exact,
            gap: None,
            mixing,
        });
    }

    let status = status_of(da, db);
    if da.min(db) <= 1 || block_negativity(block, da, db) <= NEGATIVITY_FLOOR {
        return Ok(BlockRobustness { value: 0.0, method: Method::ConvexOracle, status, gap: None, mixing: zero() });
    }

    let sol = convex_block_robustness(block, da, db, kind, settings)?;
    Ok(BlockRobustness {
        value: sol.value.max(0.0),
        method: Method::ConvexOracle,
        status,
        gap: Some(sol.gap),
        mixing: linalg::hermitian_part(&sol.variable),
    })
}

/// The PPT-relaxed program on any block, pure or not.
pub fn convex_block_robustness(
    block: &CMatrix,
    da: usize,
    db: usize,
    kind: Kind,
    settings: Settings,
) -> Result<program::Solution> {
    let n = da * db;
    let map = LinearMap::PartialTranspose { da, db };
    let mut lmis = vec![
        Lmi { constant: CMatrix::zeros(n, n), map: LinearMap::Identity },
        Lmi { constant: linalg::partial_transpose_second(block, da, db), map },
    ];
    if kind == Kind::Standard {
        lmis.push(Lmi { constant: CMatrix::zeros(n, n), map });
    }
    program::minimize_trace(n, lmis, settings)
}

/// `(Σ α)² - 1` and the optimal mixing matrix `Σ_{i≠j} α_i α_j |u_i v_j⟩⟨u_i v_j|`
/// built from the Schmidt vectors of `psi`.
fn pure_block(psi: &nalgebra::DVector<num_complex::Complex64>, da: usize, db: usize) -> (f64, CMatrix) {
    let coeffs = CMatrix::from_fn(da, db, |i, j| psi[i * db + j]);
    let alphas = block_schmidt(&coeffs);
    let total: f64 = alphas.iter().sum();
    let value = (total * total - 1.0).max(0.0);
    let n = da * db;
    let mut mixing = CMatrix::zeros(n, n);
    if da.min(db) <= 1 || value <= NEGATIVITY_FLOOR {
        return (value, mixing);
    }
    let svd = coeffs.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let r = svd.singular_values.len();
    for i in 0..r {
        for j in 0..r {
            if i == j {
                continue;
            }
            let w = svd.singular_values[i] * svd.singular_values[j];
            if w == 0.0 {
                continue;
            }
            // ψ = Σ α_i u_i ⊗ conj(v_i), and v_t holds v_i† as rows.
            let v = nalgebra::DVector::from_fn(n, |idx, _| u[(idx / db, i)] * vt[(j, idx % db)]);
            mixing += (&v * v.adjoint()) * c(w, 0.0);
        }
    }
    (value, mixing)
}

struct Blockwise {
    entries: Vec<BlockEntry>,
    total: f64,
    status: Certainty,
    sigma_tilde: CMatrix,
}

fn blockwise(rho: &DensityMatrix, kind: Kind, settings: Settings) -> Result<Blockwise> {
    let dec = block_decompose(rho);
    let d = rho.dim();
    let mut sigma_tilde = CMatrix::zeros(d, d);
    let mut entries = Vec::new();
    let mut total = 0.0;
    let mut status = Certainty::Exact;
    for (p, (block, sector)) in dec.weights.iter().zip(dec.blocks.iter().zip(rho.basis().sectors())) {
        let Some(b) = block else { continue };
        let r = block_robustness(&b.matrix, b.dim_first, b.dim_second, kind, settings)?;
        total += p * r.value;
        status = status.max(r.status);
        let start = sector.offset;
        let mut view = sigma_tilde.view_mut((start, start), (sector.dim(), sector.dim()));
        view += &r.mixing * c(*p, 0.0);
        entries.push(BlockEntry { k: b.k, p: *p, value: r.value, method: r.method, status: r.status, gap: r.gap });
    }
    Ok(Blockwise { entries, total, status, sigma_tilde })
}

fn witness(rho: &DensityMatrix, sigma_tilde: CMatrix) -> Witness {
    let t: f64 = sigma_tilde.diagonal().iter().map(|z| z.re).sum();
    let mixed = (rho.matrix() + &sigma_tilde) / c(1.0 + t, 0.0);
    Witness { sigma_tilde, mixed }
}

/// `R_s`: infinite unless `ρ` is block-diagonal, otherwise `Σ_k p_k R_s(ρ_k)`.
pub fn robustness_standard(rho: &DensityMatrix, opts: &Options) -> Result<RobustnessReport> {
    if !is_block_diagonal(rho, opts.block_tol) {
        return Ok(RobustnessReport {
            kind: Kind::Standard,
            value: RobustnessValue::Infinite,
            status: Certainty::Exact,
            per_block: Vec::new(),
            bounds: None,
            witness: None,
        });
    }
    let bw = blockwise(rho, Kind::Standard, opts.settings)?;
    Ok(RobustnessReport {
        kind: Kind::Standard,
        value: RobustnessValue::Finite(bw.total),
        status: bw.status,
        per_block: bw.entries,
        bounds: None,
        witness: opts.emit_witness.then(|| witness(rho, bw.sigma_tilde)),
    })
}

/// `λ D` with `λ = max(0, -λ_min(-ρ_ND))`.
pub fn rg_bound_lambda(rho: &DensityMatrix) -> f64 {
    let nd = block_decompose(rho).rho_nd;
    let lambda = linalg::eigenvalues(&HermitianMatrix::from_trusted(nd)).last().copied().unwrap_or(0.0).max(0.0);
    lambda * rho.dim() as f64
}

/// Off-diagonal ℓ1 norm.
fn l1_off_diagonal(m: &CMatrix) -> f64 {
    let diag: f64 = m.diagonal().iter().map(|z| z.norm()).sum();
    linalg::l1_norm(m) - diag
}

fn bounds_from(rho: &DensityMatrix, dec: &BlockDecomposition, bw: &Blockwise) -> Bounds {
    Bounds {
        lambda_d: rg_bound_lambda(rho),
        l1: bw.total + linalg::l1_norm(&dec.rho_nb),
        l1_nd: l1_off_diagonal(&dec.rho_nd),
        l1_certified: bw.status == Certainty::Exact,
    }
}

/// Upper bounds on `R_g`: `λ D`, `Σ p_k R_g(ρ_k) + ‖ρ_NB‖_ℓ1` and `‖ρ_ND‖_ℓ1`.
pub fn rg_bounds(rho: &DensityMatrix, settings: Settings) -> Result<Bounds> {
    let bw = blockwise(rho, Kind::Generalized, settings)?;
    Ok(bounds_from(rho, &block_decompose(rho), &bw))
}

/// `Σ p_k R_g(ρ_k) + ‖ρ_NB‖_ℓ1`.
pub fn rg_bound_l1(rho: &DensityMatrix, settings: Settings) -> Result<f64> {
    rg_bounds(rho, settings).map(|b| b.l1)
}

/// Diagonally dominant completion `Δ - X` of an off-diagonal matrix `X`,
/// with `Δ` the diagonal of absolute row sums.
fn dominant_completion(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    let mut s = -x.clone();
    for i in 0..n {
        let row: f64 = (0..n).filter(|&j| j != i).map(|j| x[(i, j)].norm()).sum();
        s[(i, i)] = c(row, 0.0);
    }
    s
}

/// `R_g`: exact blockwise sum for block-diagonal `ρ`, otherwise the
/// interval from the block part up to the smallest upper bound.
pub fn robustness_generalized(rho: &DensityMatrix, opts: &Options) -> Result<RobustnessReport> {
    let dec = block_decompose(rho);
    let bw = blockwise(rho, Kind::Generalized, opts.settings)?;
    let bounds = bounds_from(rho, &dec, &bw);
    let (lambda_d, l1_nd) = (bounds.lambda_d, bounds.l1_nd);

    if is_block_diagonal(rho, opts.block_tol) {
        return Ok(RobustnessReport {
            kind: Kind::Generalized,
            value: RobustnessValue::Finite(bw.total),
            status: bw.status,
            per_block: bw.entries,
            bounds: Some(bounds),
            witness: opts.emit_witness.then(|| witness(rho, bw.sigma_tilde)),
        });
    }

    let upper = bounds.best();
    let witness = opts.emit_witness.then(|| {
        let d = rho.dim();
        let sigma = if lambda_d <= l1_nd {
            let lambda = lambda_d / d as f64;
            CMatrix::identity(d, d) * c(lambda, 0.0) - &dec.rho_nd
        } else {
            dominant_completion(&dec.rho_nd)
        };
        witness(rho, sigma)
    });
    Ok(RobustnessReport {
        kind: Kind::Generalized,
        value: RobustnessValue::Interval { lower: bw.total.min(upper), upper },
        status: Certainty::BoundsOnly,
        per_block: bw.entries,
        bounds: Some(bounds),
        witness,
    })
}

pub fn robustness(rho: &DensityMatrix, kind: Kind, opts: &Options) -> Result<RobustnessReport> {
    match kind {
        Kind::Standard => robustness_standard(rho, opts),
        Kind::Generalized => robustness_generalized(rho, opts),
    }
}

/// Weighted sum of the per-sector reports.
pub fn robustness_superselection(mixture: &SectoredState, kind: Kind, opts: &Options) -> Result<RobustnessReport> {
    let mut value = RobustnessValue::Finite(0.0);
    let mut status = Certainty::Exact;
    let mut per_block = Vec::new();
    for (w, rho) in mixture.components() {
        let r = robustness(rho, kind, opts)?;
        value = value.add(r.value.scaled(*w));
        status = status.max(r.status);
        per_block.extend(r.per_block.into_iter().map(|e| BlockEntry { p: e.p * w, ..e }));
    }
    Ok(RobustnessReport { kind, value, status, per_block, bounds: None, witness: None })
}
