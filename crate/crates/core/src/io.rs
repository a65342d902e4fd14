//! JSON file formats. Matrices are arrays of rows, each entry a `[re, im]`
//! pair.
//!
//! ```text
//! channel      {"in_dim": n, "out_dim": m, "kraus": [matrix, ...]}
//! map          {"in_dim": n, "out_dim": m, "choi": matrix}
//! hamiltonian  {"dim": n, "eigenvalues": [...], "eigenbasis": matrix}   (eigenbasis optional)
//! state        {"matrix": matrix}
//! ensemble     {"probs": [...], "states": [matrix, ...]}
//! fhat table   {"energies": [...], "values": [...]}
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bounds::FhatTable;
use crate::error::{Error, Result};
use crate::info::Ensemble;
use crate::operator::{Channel, ComplexMatrix, DensityOperator, Hamiltonian, HermitianPreservingMap, C64};

/// Rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Parse a matrix and check its shape.
pub fn matrix_from_json(rows: &MatrixJson, shape: (usize, usize), what: &str) -> Result<ComplexMatrix> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::DimensionMismatch(format!(
            "{what} should be {}x{}",
            shape.0, shape.1
        )));
    }
    Ok(ComplexMatrix::from_fn(shape.0, shape.1, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn square_shape(rows: &MatrixJson, what: &str) -> Result<(usize, usize)> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse(format!("{what} is empty")));
    }
    Ok((n, n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    pub in_dim: usize,
    pub out_dim: usize,
    pub choi: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianJson {
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenbasis: Option<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleJson {
    pub probs: Vec<f64>,
    pub states: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FhatTableJson {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
}

fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn render<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data always serializes")
}

pub fn channel_to_json(channel: &Channel) -> String {
    render(&ChannelJson {
        in_dim: channel.in_dim(),
        out_dim: channel.out_dim(),
        kraus: channel.kraus().iter().map(matrix_to_json).collect(),
    })
}

pub fn channel_from_json(text: &str) -> Result<Channel> {
    let raw: ChannelJson = parse(text, "channel")?;
    if raw.kraus.is_empty() {
        return Err(Error::Parse("channel has no Kraus operators".into()));
    }
    let kraus = raw
        .kraus
        .iter()
        .map(|k| matrix_from_json(k, (raw.out_dim, raw.in_dim), "Kraus operator"))
        .collect::<Result<Vec<_>>>()?;
    Channel::new(kraus)
}

pub fn map_to_json(map: &HermitianPreservingMap) -> String {
    render(&MapJson {
        in_dim: map.in_dim(),
        out_dim: map.out_dim(),
        choi: matrix_to_json(map.choi()),
    })
}

pub fn map_from_json(text: &str) -> Result<HermitianPreservingMap> {
    let raw: MapJson = parse(text, "map")?;
    let n = raw.in_dim * raw.out_dim;
    let choi = matrix_from_json(&raw.choi, (n, n), "Choi matrix")?;
    HermitianPreservingMap::from_choi(raw.in_dim, raw.out_dim, choi)
}

pub fn hamiltonian_to_json(h: &Hamiltonian) -> String {
    let identity = ComplexMatrix::identity(h.dim(), h.dim());
    render(&HamiltonianJson {
        dim: h.dim(),
        eigenvalues: h.eigenvalues().to_vec(),
        eigenbasis: (*h.eigenbasis() != identity).then(|| matrix_to_json(h.eigenbasis())),
    })
}

pub fn hamiltonian_from_json(text: &str) -> Result<Hamiltonian> {
    let raw: HamiltonianJson = parse(text, "hamiltonian")?;
    if raw.eigenvalues.len() != raw.dim {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues for dimension {}",
            raw.eigenvalues.len(),
            raw.dim
        )));
    }
    let basis = raw
        .eigenbasis
        .as_ref()
        .map(|b| matrix_from_json(b, (raw.dim, raw.dim), "eigenbasis"))
        .transpose()?;
    Hamiltonian::new(raw.eigenvalues, basis)
}

pub fn state_to_json(rho: &DensityOperator) -> String {
    render(&StateJson {
        matrix: matrix_to_json(rho.matrix()),
    })
}

pub fn state_from_json(text: &str) -> Result<DensityOperator> {
    let raw: StateJson = parse(text, "state")?;
    let shape = square_shape(&raw.matrix, "state")?;
    DensityOperator::new(matrix_from_json(&raw.matrix, shape, "state")?)
}

pub fn ensemble_to_json(ensemble: &Ensemble) -> String {
    render(&EnsembleJson {
        probs: ensemble.probs().to_vec(),
        states: ensemble.states().iter().map(|s| matrix_to_json(s.matrix())).collect(),
    })
}

pub fn ensemble_from_json(text: &str) -> Result<Ensemble> {
    let raw: EnsembleJson = parse(text, "ensemble")?;
    let states = raw
        .states
        .iter()
        .map(|m| {
            let shape = square_shape(m, "ensemble state")?;
            DensityOperator::new(matrix_from_json(m, shape, "ensemble state")?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(raw.probs, states)
}

pub fn fhat_table_from_json(text: &str) -> Result<FhatTable> {
    let raw: FhatTableJson = parse(text, "F̂ table")?;
    FhatTable::new(raw.energies, raw.values)
}

pub fn fhat_table_to_json(table: &FhatTable) -> String {
    render(&FhatTableJson {
        energies: table.energies().to_vec(),
        values: table.values().to_vec(),
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn load_channel(path: &Path) -> Result<Channel> {
    channel_from_json(&read_text(path)?)
}

pub fn load_map(path: &Path) -> Result<HermitianPreservingMap> {
    map_from_json(&read_text(path)?)
}

pub fn load_hamiltonian(path: &Path) -> Result<Hamiltonian> {
    hamiltonian_from_json(&read_text(path)?)
}

pub fn load_state(path: &Path) -> Result<DensityOperator> {
    state_from_json(&read_text(path)?)
}

pub fn load_ensemble(path: &Path) -> Result<Ensemble> {
    ensemble_from_json(&read_text(path)?)
}

pub fn load_fhat_table(path: &Path) -> Result<FhatTable> {
    fhat_table_from_json(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_channel, random_density, random_hamiltonian, rng_for};
    use crate::zoo;

    #[test]
    fn channel_round_trip_is_exact() {
        let ch = random_channel(3, 2, 3, &mut rng_for(91, 0)).unwrap();
        let back = channel_from_json(&channel_to_json(&ch)).unwrap();
        assert_eq!(back.kraus(), ch.kraus());
    }

    #[test]
    fn attenuator_round_trip_passes_validation() {
        let ch = zoo::attenuator(8, 0.7).unwrap();
        let back = channel_from_json(&channel_to_json(&ch)).unwrap();
        assert_eq!(back.in_dim(), 8);
        assert_eq!(back.choi(), ch.choi());
    }

    #[test]
    fn hamiltonian_round_trip() {
        let h = random_hamiltonian(3, 2.0, &mut rng_for(92, 0)).unwrap();
        let back = hamiltonian_from_json(&hamiltonian_to_json(&h)).unwrap();
        assert_eq!(back.eigenvalues(), h.eigenvalues());
        assert_eq!(back.eigenbasis(), h.eigenbasis());
        let diag = hamiltonian_from_json(r#"{"dim": 2, "eigenvalues": [0.5, 1.5]}"#).unwrap();
        assert_eq!(diag.eigenbasis(), &ComplexMatrix::identity(2, 2));
        assert!(!hamiltonian_to_json(&diag).contains("eigenbasis"));
    }

    #[test]
    fn map_and_state_and_ensemble_round_trip() {
        let mut rng = rng_for(93, 0);
        let phi = random_channel(2, 2, 2, &mut rng).unwrap();
        let psi = random_channel(2, 2, 2, &mut rng).unwrap();
        let map = HermitianPreservingMap::difference(&phi, &psi).unwrap();
        assert_eq!(map_from_json(&map_to_json(&map)).unwrap().choi(), map.choi());
        let rho = random_density(3, 2, &mut rng);
        // construction symmetrizes, which may move the last bit
        let back = state_from_json(&state_to_json(&rho)).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-15);
        let ens = Ensemble::new(vec![0.25, 0.75], vec![rho.clone(), rho]).unwrap();
        assert_eq!(
            ensemble_from_json(&ensemble_to_json(&ens)).unwrap().probs(),
            ens.probs()
        );
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(matches!(channel_from_json("{"), Err(Error::Parse(_))));
        assert!(matches!(
            channel_from_json(r#"{"in_dim": 2, "out_dim": 2, "kraus": [[[[1,0],[0,0]]]]}"#),
            Err(Error::DimensionMismatch(_))
        ));
        // not trace preserving
        assert!(matches!(
            channel_from_json(r#"{"in_dim": 1, "out_dim": 1, "kraus": [[[[0.5,0]]]]}"#),
            Err(Error::NotTracePreserving(_))
        ));
        assert!(hamiltonian_from_json(r#"{"dim": 2, "eigenvalues": [1.0]}"#).is_err());
        assert!(channel_from_json(r#"{"in_dim": 1, "out_dim": 1, "kraus": [], "x": 1}"#).is_err());
    }
}
