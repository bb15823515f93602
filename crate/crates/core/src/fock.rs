//! Fock basis of the `N`-particle sector for an `(m, M - m)` mode bipartition.
//!
//! A basis vector is labelled `(k, σ, σ')`: `k` particles sit in the first `m`
//! modes, `σ` indexes how they fill those modes and `σ'` how the remaining
//! `N - k` fill the other `M - m`. Labels are zero-based here. Occupation
//! vectors inside a sector are listed in descending lexicographic order, and
//! the flat ordering is `k`, then `σ`, then `σ'`, all ascending.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on every dense dimension the crate builds.
pub const DEFAULT_DIM_CAP: usize = 10_000;

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Number of ways to put `particles` bosons in `modes` modes.
pub fn sector_dim(particles: usize, modes: usize) -> Option<u64> {
    if modes == 0 {
        return Some(u64::from(particles == 0));
    }
    binomial((particles + modes - 1) as u64, particles as u64)
}

/// `C(N + M - 1, N)`, rejected above `cap`.
pub fn total_dim(particles: usize, modes: usize, cap: usize) -> Result<usize> {
    if particles < 1 || modes < 1 {
        return Err(Error::Bipartition(format!("need N >= 1 and M >= 1, got N={particles}, M={modes}")));
    }
    match sector_dim(particles, modes) {
        Some(d) if d <= cap as u64 => Ok(d as usize),
        Some(d) => Err(Error::DimensionCap { dim: usize::try_from(d).unwrap_or(usize::MAX), cap }),
        None => Err(Error::DimensionCap { dim: usize::MAX, cap }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    #[serde(rename = "N")]
    pub particles: usize,
    #[serde(rename = "M")]
    pub modes: usize,
    /// Modes in the first subalgebra.
    #[serde(rename = "m")]
    pub first: usize,
}

impl Bipartition {
    pub fn new(particles: usize, modes: usize, first: usize) -> Result<Self> {
        if particles < 1 {
            return Err(Error::Bipartition(format!("particle count must be >= 1, got {particles}")));
        }
        if modes < 2 {
            return Err(Error::Bipartition(format!("mode count must be >= 2, got {modes}")));
        }
        if first < 1 || first > modes - 1 {
            return Err(Error::Bipartition(format!(
                "first partition must hold between 1 and {} modes, got {first}",
                modes - 1
            )));
        }
        Ok(Bipartition { particles, modes, first })
    }

    pub fn two_mode(particles: usize) -> Result<Self> {
        Self::new(particles, 2, 1)
    }

    pub fn second(&self) -> usize {
        self.modes - self.first
    }

    pub fn is_two_mode(&self) -> bool {
        self.modes == 2 && self.first == 1
    }
}

/// All occupation vectors of length `len` summing to `total`, descending
/// lexicographic order.
pub fn compositions(total: usize, len: usize) -> Vec<Vec<u32>> {
    fn go(rem: usize, len: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if len == 1 {
            prefix.push(rem as u32);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for head in (0..=rem).rev() {
            prefix.push(head as u32);
            go(rem - head, len - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if len == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    go(total, len, &mut Vec::with_capacity(len), &mut out);
    out
}

/// One `k` sector: `D_k` first-side and `D_{N-k}` second-side occupations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    pub k: usize,
    pub first: Vec<Vec<u32>>,
    pub second: Vec<Vec<u32>>,
    /// Start of the sector in the flat ordering.
    pub offset: usize,
    /// Start of the sector's rows in the first embedding factor.
    pub offset_a: usize,
    /// Start of the sector's columns in the second embedding factor.
    pub offset_b: usize,
}

impl Sector {
    pub fn dim_first(&self) -> usize {
        self.first.len()
    }

    pub fn dim_second(&self) -> usize {
        self.second.len()
    }

    pub fn dim(&self) -> usize {
        self.first.len() * self.second.len()
    }

    /// Flat indices spanned by this sector.
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.dim()
    }
}

/// Zero-based `(k, σ, σ')` label of a basis vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockLabel {
    pub k: usize,
    pub sigma: usize,
    pub sigma_prime: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisTable {
    bipartition: Bipartition,
    sectors: Vec<Sector>,
    dim: usize,
    a_dim: usize,
    b_dim: usize,
    lookup: HashMap<Vec<u32>, usize>,
}

impl BasisTable {
    pub fn enumerate(bp: Bipartition) -> Result<Self> {
        Self::enumerate_capped(bp, DEFAULT_DIM_CAP)
    }

    pub fn enumerate_capped(bp: Bipartition, cap: usize) -> Result<Self> {
        let dim = total_dim(bp.particles, bp.modes, cap)?;
        let n = bp.particles;
        let mut sectors = Vec::with_capacity(n + 1);
        let (mut offset, mut offset_a, mut offset_b) = (0, 0, 0);
        for k in 0..=n {
            let first = compositions(k, bp.first);
            let second = compositions(n - k, bp.second());
            let s = Sector { k, first, second, offset, offset_a, offset_b };
            offset += s.dim();
            offset_a += s.dim_first();
            offset_b += s.dim_second();
            sectors.push(s);
        }
        debug_assert_eq!(offset, dim);
        let mut table = BasisTable {
            bipartition: bp,
            sectors,
            dim,
            a_dim: offset_a,
            b_dim: offset_b,
            lookup: HashMap::with_capacity(dim),
        };
        for idx in 0..dim {
            let occ = table.occupation(idx);
            table.lookup.insert(occ, idx);
        }
        Ok(table)
    }

    pub fn bipartition(&self) -> Bipartition {
        self.bipartition
    }

    pub fn particles(&self) -> usize {
        self.bipartition.particles
    }

    pub fn modes(&self) -> usize {
        self.bipartition.modes
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector(&self, k: usize) -> &Sector {
        &self.sectors[k]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Σ_k D_k`.
    pub fn a_dim(&self) -> usize {
        self.a_dim
    }

    /// `Σ_k D_{N-k}`.
    pub fn b_dim(&self) -> usize {
        self.b_dim
    }

    /// `Σ_k min(D_k, D_{N-k})`: the largest possible Schmidt rank.
    pub fn schmidt_capacity(&self) -> usize {
        self.sectors.iter().map(|s| s.dim_first().min(s.dim_second())).sum()
    }

    fn check_label(&self, l: FockLabel) -> Result<&Sector> {
        let s =
            self.sectors.get(l.k).ok_or_else(|| Error::Index(format!("k={} exceeds N={}", l.k, self.particles())))?;
        if l.sigma >= s.dim_first() || l.sigma_prime >= s.dim_second() {
            return Err(Error::Index(format!(
                "(σ, σ')=({}, {}) outside {}x{} sector k={}",
                l.sigma,
                l.sigma_prime,
                s.dim_first(),
                s.dim_second(),
                l.k
            )));
        }
        Ok(s)
    }

    pub fn flat_index(&self, l: FockLabel) -> Result<usize> {
        let s = self.check_label(l)?;
        Ok(s.offset + l.sigma * s.dim_second() + l.sigma_prime)
    }

    pub fn label(&self, idx: usize) -> Result<FockLabel> {
        if idx >= self.dim {
            return Err(Error::Index(format!("flat index {idx} >= D={}", self.dim)));
        }
        let k = self.sectors.partition_point(|s| s.offset + s.dim() <= idx);
        let s = &self.sectors[k];
        let local = idx - s.offset;
        Ok(FockLabel { k, sigma: local / s.dim_second(), sigma_prime: local % s.dim_second() })
    }

    /// Cell `(a, b)` of the `A_dim x B_dim` product grid that hosts the
    /// basis vector `(k, σ, σ')`.
    pub fn embed_index(&self, l: FockLabel) -> Result<(usize, usize)> {
        let s = self.check_label(l)?;
        Ok((s.offset_a + l.sigma, s.offset_b + l.sigma_prime))
    }

    /// Grid cell of every flat index, in flat order.
    pub fn embedding(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::with_capacity(self.dim);
        for s in &self.sectors {
            for i in 0..s.dim_first() {
                for j in 0..s.dim_second() {
                    cells.push((s.offset_a + i, s.offset_b + j));
                }
            }
        }
        cells
    }

    /// Full `M`-mode occupation vector of a flat index.
    pub fn occupation(&self, idx: usize) -> Vec<u32> {
        let l = self.label(idx).expect("flat index in range");
        let s = &self.sectors[l.k];
        let mut occ = s.first[l.sigma].clone();
        occ.extend_from_slice(&s.second[l.sigma_prime]);
        occ
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.lookup.get(occupation).copied()
    }

    /// Same `(M, m)` split.
    pub fn same_modes(&self, other: &BasisTable) -> bool {
        self.bipartition.modes == other.bipartition.modes && self.bipartition.first == other.bipartition.first
    }
}

#[derive(Serialize, Deserialize)]
struct SectorJson {
    k: usize,
    occ_first: Vec<Vec<u32>>,
    occ_second: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct BasisJson {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m_total: usize,
    m: usize,
    #[serde(rename = "D")]
    dim: usize,
    sectors: Vec<SectorJson>,
}

impl BasisTable {
    pub fn to_json(&self) -> serde_json::Value {
        let bp = self.bipartition;
        let j = BasisJson {
            n: bp.particles,
            m_total: bp.modes,
            m: bp.first,
            dim: self.dim,
            sectors: self
                .sectors
                .iter()
                .map(|s| SectorJson { k: s.k, occ_first: s.first.clone(), occ_second: s.second.clone() })
                .collect(),
        };
        serde_json::to_value(j).expect("basis table serializes")
    }
}
