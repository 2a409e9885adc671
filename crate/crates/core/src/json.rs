//! JSON encoding of complex matrices: row-major nested arrays of `[re, im]` pairs.
//! Plain numbers are accepted on input as purely real entries.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn rows_to_matrix(rows: Vec<Vec<Entry>>) -> Result<CMatrix> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != cols) {
        return Err(Error::InvalidInput("ragged matrix rows".into()));
    }
    let mut m = CMatrix::zeros(r, cols);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, e) in row.into_iter().enumerate() {
            m[(i, j)] = match e {
                Entry::Pair([re, im]) => c(re, im),
                Entry::Real(re) => c(re, 0.0),
            };
        }
    }
    Ok(m)
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    serde_json::to_value(matrix_to_rows(m)).expect("finite matrix serializes")
}

pub fn matrix_from_json(v: &Value) -> Result<CMatrix> {
    let rows: Vec<Vec<Entry>> =
        serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(format!("matrix: {e}")))?;
    rows_to_matrix(rows)
}

/// `#[serde(with = "qcontract::json::matrix")]` for `CMatrix` fields.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<Entry>>::deserialize(d)?;
        rows_to_matrix(rows).map_err(D::Error::custom)
    }
}

/// Same as [`matrix`] for `Vec<CMatrix>`.
pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMatrix>, D::Error> {
        let list = Vec::<Vec<Vec<Entry>>>::deserialize(d)?;
        list.into_iter().map(|rows| rows_to_matrix(rows).map_err(D::Error::custom)).collect()
    }
}
