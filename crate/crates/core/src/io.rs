//! JSON state and unitary files.
//!
//! A complex number is `[re, im]` (a bare number is read as real). Files:
//!
//! ```text
//! density   {"N", "M", "m", "matrix": [[[re, im], ...], ...]}
//! pure      {"N", "M", "m", "amplitudes": [[re, im], ...]}
//! sectored  {"M", "m", "components": [{"weight", "N", "matrix" | "amplitudes"}, ...]}
//! unitary   {"M", "matrix": [[[re, im], ...], ...]}
//! ```

use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result, Violation};
use crate::fock::{BasisTable, Bipartition};
use crate::linalg::{c, CMatrix, CVector};
use crate::modes::ModeUnitary;
use crate::states::{superselection_mixture, DensityMatrix, PureState, SectoredState};

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl Entry {
    fn value(self) -> num_complex::Complex64 {
        match self {
            Entry::Pair([re, im]) => c(re, im),
            Entry::Real(re) => c(re, 0.0),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Component {
    weight: f64,
    #[serde(rename = "N")]
    n: usize,
    matrix: Option<Vec<Vec<Entry>>>,
    amplitudes: Option<Vec<Entry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "M")]
    modes: usize,
    m: usize,
    matrix: Option<Vec<Vec<Entry>>>,
    amplitudes: Option<Vec<Entry>>,
    components: Option<Vec<Component>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryFile {
    #[serde(rename = "M")]
    modes: usize,
    matrix: Vec<Vec<Entry>>,
}

/// Any state a file can hold.
#[derive(Debug, Clone)]
pub enum State {
    Density(DensityMatrix),
    Pure(PureState),
    Sectored(SectoredState),
}

impl State {
    /// Density matrix of a single-sector state.
    pub fn density(&self) -> Result<DensityMatrix> {
        match self {
            State::Density(rho) => Ok(rho.clone()),
            State::Pure(psi) => Ok(psi.to_density()),
            State::Sectored(_) => Err(Error::Parse("expected a fixed-N state, got a sectored mixture".into())),
        }
    }
}

fn matrix_from_rows(rows: &[Vec<Entry>], expected: usize) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows != expected || rows.iter().any(|r| r.len() != expected) {
        return Err(Error::invalid(Violation::Shape { expected, rows: nrows, cols: ncols }));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j].value()))
}

fn vector_from(entries: &[Entry]) -> CVector {
    DVector::from_iterator(entries.len(), entries.iter().map(|e| e.value()))
}

fn basis_for(n: usize, modes: usize, m: usize, cap: usize) -> Result<Arc<BasisTable>> {
    Ok(Arc::new(BasisTable::enumerate_capped(Bipartition::new(n, modes, m)?, cap)?))
}

fn single(basis: Arc<BasisTable>, matrix: Option<Vec<Vec<Entry>>>, amplitudes: Option<Vec<Entry>>) -> Result<State> {
    match (matrix, amplitudes) {
        (Some(rows), None) => {
            let m = matrix_from_rows(&rows, basis.dim())?;
            Ok(State::Density(DensityMatrix::new(basis, m)?))
        }
        (None, Some(amps)) => Ok(State::Pure(PureState::new(basis, vector_from(&amps))?)),
        _ => Err(Error::Parse("exactly one of \"matrix\" and \"amplitudes\" is required".into())),
    }
}

pub fn parse_state_str(text: &str, cap: usize) -> Result<State> {
    let f: StateFile = serde_json::from_str(text)?;
    match (f.components, f.n) {
        (Some(components), None) => {
            if f.matrix.is_some() || f.amplitudes.is_some() {
                return Err(Error::Parse("a sectored file carries its data in \"components\"".into()));
            }
            let mut parts = Vec::with_capacity(components.len());
            for comp in components {
                let basis = basis_for(comp.n, f.modes, f.m, cap)?;
                let rho = single(basis, comp.matrix, comp.amplitudes)?.density()?;
                parts.push((comp.weight, rho));
            }
            Ok(State::Sectored(superselection_mixture(parts)?))
        }
        (None, Some(n)) => single(basis_for(n, f.modes, f.m, cap)?, f.matrix, f.amplitudes),
        (Some(_), Some(_)) => Err(Error::Parse("\"N\" belongs inside each component of a sectored file".into())),
        (None, None) => Err(Error::Parse("missing \"N\"".into())),
    }
}

pub fn parse_state(path: impl AsRef<Path>, cap: usize) -> Result<State> {
    parse_state_str(&std::fs::read_to_string(path)?, cap)
}

pub fn parse_unitary_str(text: &str) -> Result<ModeUnitary> {
    let f: UnitaryFile = serde_json::from_str(text)?;
    ModeUnitary::new(matrix_from_rows(&f.matrix, f.modes)?)
}

pub fn parse_unitary(path: impl AsRef<Path>) -> Result<ModeUnitary> {
    parse_unitary_str(&std::fs::read_to_string(path)?)
}

/// `[[[re, im], ...], ...]`, row-major.
pub fn serialize_matrix<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut rows = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<[f64; 2]> = (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect();
        rows.serialize_element(&row)?;
    }
    rows.end()
}

fn serialize_vector<S: Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v.iter() {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

#[derive(Serialize)]
struct DensityOut<'a> {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    modes: usize,
    m: usize,
    #[serde(serialize_with = "serialize_matrix")]
    matrix: &'a CMatrix,
}

#[derive(Serialize)]
struct PureOut<'a> {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    modes: usize,
    m: usize,
    #[serde(serialize_with = "serialize_vector")]
    amplitudes: &'a CVector,
}

#[derive(Serialize)]
struct ComponentOut<'a> {
    weight: f64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(serialize_with = "serialize_matrix")]
    matrix: &'a CMatrix,
}

#[derive(Serialize)]
struct SectoredOut<'a> {
    #[serde(rename = "M")]
    modes: usize,
    m: usize,
    components: Vec<ComponentOut<'a>>,
}

/// File representation of `state`; `parse_state_str` reads it back.
pub fn state_to_json(state: &State) -> serde_json::Value {
    let value = match state {
        State::Density(rho) => {
            let bp = rho.basis().bipartition();
            serde_json::to_value(DensityOut { n: bp.particles, modes: bp.modes, m: bp.first, matrix: rho.matrix() })
        }
        State::Pure(psi) => {
            let bp = psi.basis().bipartition();
            serde_json::to_value(PureOut {
                n: bp.particles,
                modes: bp.modes,
                m: bp.first,
                amplitudes: psi.amplitudes(),
            })
        }
        State::Sectored(mix) => {
            let bp = mix.components()[0].1.basis().bipartition();
            let components = mix
                .components()
                .iter()
                .map(|(w, rho)| ComponentOut { weight: *w, n: rho.basis().particles(), matrix: rho.matrix() })
                .collect();
            serde_json::to_value(SectoredOut { modes: bp.modes, m: bp.first, components })
        }
    };
    value.expect("state serializes")
}

pub fn unitary_to_json(u: &ModeUnitary) -> serde_json::Value {
    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(rename = "M")]
        modes: usize,
        #[serde(serialize_with = "serialize_matrix")]
        matrix: &'a CMatrix,
    }
    serde_json::to_value(Out { modes: u.modes(), matrix: u.matrix() }).expect("unitary serializes")
}
