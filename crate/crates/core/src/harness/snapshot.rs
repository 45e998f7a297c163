//! Versioned on-disk network container: the builder config plus every piece
//! of state that defines the trained network (roles, positions, C, P, A, and
//! the wiring mask). JSON keeps the files diff-able; floats round-trip
//! exactly, so save → load → save is byte-stable.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::Error;
use crate::matrix::Matrix;
use crate::network::{Network, NeuronRole};

pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    version: u32,
    network: NetworkConfig,
    roles: Vec<NeuronRole>,
    positions: Vec<[f64; 3]>,
    connections: Vec<f64>,
    plasticity: Vec<f64>,
    accumulated: Vec<f64>,
    exists: Vec<bool>,
}

pub fn save(net: &Network, path: &Path) -> Result<(), Error> {
    let file = SnapshotFile {
        version: VERSION,
        network: net.config().clone(),
        roles: net.roles().to_vec(),
        positions: net.positions().to_vec(),
        connections: net.connections.data().to_vec(),
        plasticity: net.plasticity.data().to_vec(),
        accumulated: net.accumulated.data().to_vec(),
        exists: net.exists_raw().to_vec(),
    };
    let text = serde_json::to_string(&file).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    fs::write(path, text).map_err(Error::io(path))
}

pub fn load(path: &Path) -> Result<Network, Error> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let file: SnapshotFile =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
    if file.version != VERSION {
        return Err(Error::SnapshotVersion {
            found: file.version,
            expected: VERSION,
        });
    }
    let n = file.network.total_neurons();
    let matrix = |data: Vec<f64>, what: &str| -> Result<Matrix, Error> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{what} holds {} values, expected {}",
                data.len(),
                n * n
            )));
        }
        let mut m = Matrix::zeros(n);
        m.data_mut().copy_from_slice(&data);
        Ok(m)
    };
    let connections = matrix(file.connections, "connections")?;
    let plasticity = matrix(file.plasticity, "plasticity")?;
    let accumulated = matrix(file.accumulated, "accumulated")?;
    Network::from_parts(
        file.network,
        file.roles,
        file.positions,
        connections,
        plasticity,
        accumulated,
        file.exists,
    )
}
