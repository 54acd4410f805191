//! JSON files for states and channels.
//!
//! A matrix is `{"dim": d, "data": [[re, im], …]}` with `d²` entries in
//! row-major order. A state file is `{"modes": L, "matrix": …}`; a channel
//! file is `{"in_modes", "out_modes", "deterministic", "kraus": [matrix, …]}`
//! where each Kraus matrix is `2^out_modes × 2^in_modes`, also row-major.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::FermionicChannel;
use crate::error::{Error, Result};
use crate::fock::fock_dim;
use crate::numerics::{c64, CMatrix};
use crate::states::{FermionicState, StateDiagnostics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub data: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub modes: usize,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub in_modes: usize,
    pub out_modes: usize,
    pub deterministic: bool,
    pub kraus: Vec<MatrixJson>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let data = (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| [m[(r, c)].re, m[(r, c)].im])
            .collect();
        Self {
            dim: m.nrows(),
            data,
        }
    }

    pub fn to_matrix(&self, rows: usize, cols: usize) -> Result<CMatrix> {
        if self.dim != rows {
            return Err(Error::dims(
                format!("dim {rows}"),
                format!("dim {}", self.dim),
            ));
        }
        if self.data.len() != rows * cols {
            return Err(Error::dims(
                format!("{} entries", rows * cols),
                format!("{} entries", self.data.len()),
            ));
        }
        Ok(CMatrix::from_fn(rows, cols, |r, c| {
            let [re, im] = self.data[r * cols + c];
            c64(re, im)
        }))
    }
}

/// A parsed state with what the loader found out about it.
#[derive(Debug, Clone)]
pub struct LoadedState {
    pub state: FermionicState,
    pub diagnostics: StateDiagnostics,
}

pub fn state_to_json(rho: &FermionicState) -> StateJson {
    StateJson {
        modes: rho.modes(),
        matrix: MatrixJson::from_matrix(rho.matrix()),
    }
}

pub fn state_from_json(json: &StateJson) -> Result<LoadedState> {
    let dim = fock_dim(json.modes);
    let matrix = json.matrix.to_matrix(dim, dim)?;
    crate::numerics::check_finite(&matrix)?;
    let diagnostics = FermionicState::diagnose(&matrix, json.modes)?;
    let state = FermionicState::new(matrix, json.modes)?;
    Ok(LoadedState { state, diagnostics })
}

pub fn parse_state(text: &str) -> Result<LoadedState> {
    state_from_json(&serde_json::from_str(text)?)
}

pub fn load_state(path: impl AsRef<Path>) -> Result<LoadedState> {
    parse_state(&fs::read_to_string(path)?)
}

pub fn save_state(path: impl AsRef<Path>, rho: &FermionicState) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&state_to_json(rho))?)?;
    Ok(())
}

pub fn channel_to_json(c: &FermionicChannel) -> ChannelJson {
    ChannelJson {
        in_modes: c.in_modes(),
        out_modes: c.out_modes(),
        deterministic: c.is_deterministic(),
        kraus: c
            .kraus_matrices()
            .iter()
            .map(MatrixJson::from_matrix)
            .collect(),
    }
}

pub fn channel_from_json(json: &ChannelJson) -> Result<FermionicChannel> {
    let rows = fock_dim(json.out_modes);
    let cols = fock_dim(json.in_modes);
    let kraus = json
        .kraus
        .iter()
        .map(|k| k.to_matrix(rows, cols))
        .collect::<Result<Vec<_>>>()?;
    FermionicChannel::new(kraus, json.deterministic)
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<FermionicChannel> {
    channel_from_json(&serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn save_channel(path: impl AsRef<Path>, c: &FermionicChannel) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&channel_to_json(c))?)?;
    Ok(())
}
