//! Weight files: one value per line behind a metadata header.
//!
//! ```text
//! # m=540 p=180 map=fourier-k6 index_order=v1
//! 0.0125
//! ...
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{FeatureMap, QWeights};
use crate::error::{Error, Result};

pub const INDEX_ORDER_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightsHeader {
    pub m: usize,
    pub p: usize,
    pub map_id: String,
    pub index_order: String,
}

pub fn save_weights(w: &QWeights, map: &dyn FeatureMap, path: &Path) -> Result<()> {
    let as_io = |e: std::io::Error| Error::io(path.display().to_string(), e);
    if w.len() != map.dim() {
        return Err(Error::Contract(format!(
            "weight dimension {} does not match map dimension {}",
            w.len(),
            map.dim()
        )));
    }
    let mut out = BufWriter::new(File::create(path).map_err(as_io)?);
    writeln!(
        out,
        "# m={} p={} map={} index_order={}",
        map.dim(),
        map.state_dim(),
        map.id(),
        INDEX_ORDER_VERSION
    )
    .map_err(as_io)?;
    for v in w.as_slice() {
        writeln!(out, "{v}").map_err(as_io)?;
    }
    out.flush().map_err(as_io)
}

pub fn load_weights(path: &Path) -> Result<(QWeights, WeightsHeader)> {
    let as_io = |e: std::io::Error| Error::io(path.display().to_string(), e);
    let reader = BufReader::new(File::open(path).map_err(as_io)?);
    let mut lines = reader.lines();

    let meta = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: empty weights file", path.display())))?
        .map_err(as_io)?;
    let header = parse_header(&meta)
        .ok_or_else(|| Error::Data(format!("{}: malformed header {meta:?}", path.display())))?;

    let mut values = Vec::with_capacity(header.m);
    for line in lines {
        let line = line.map_err(as_io)?;
        if line.is_empty() {
            continue;
        }
        values.push(line.parse::<f64>().map_err(|_| {
            Error::Data(format!("{}: bad weight value {line:?}", path.display()))
        })?);
    }
    if values.len() != header.m {
        return Err(Error::Data(format!(
            "{}: expected {} weights, found {}",
            path.display(),
            header.m,
            values.len()
        )));
    }
    Ok((QWeights::from_vec(values)?, header))
}

fn parse_header(line: &str) -> Option<WeightsHeader> {
    let rest = line.strip_prefix("# ")?;
    let mut m = None;
    let mut p = None;
    let mut map_id = None;
    let mut index_order = None;
    for field in rest.split_whitespace() {
        let (key, value) = field.split_once('=')?;
        match key {
            "m" => m = value.parse::<usize>().ok(),
            "p" => p = value.parse::<usize>().ok(),
            "map" => map_id = Some(value.to_string()),
            "index_order" => index_order = Some(value.to_string()),
            _ => return None,
        }
    }
    Some(WeightsHeader {
        m: m?,
        p: p?,
        map_id: map_id?,
        index_order: index_order?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FourierBasis;

    #[test]
    fn weights_round_trip() {
        let map = FourierBasis::new(3);
        let w = QWeights::from_vec((0..map.dim()).map(|i| (i as f64) * 0.25 - 3.0).collect())
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weights.csv");
        save_weights(&w, &map, &path).unwrap();
        let (loaded, header) = load_weights(&path).unwrap();
        assert_eq!(loaded, w);
        assert_eq!(header.m, map.dim());
        assert_eq!(header.p, map.state_dim());
        assert_eq!(header.map_id, "fourier-k3");
        assert_eq!(header.index_order, "v1");
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        std::fs::write(&path, "# m=4 p=2 map=fourier-k1 index_order=v1\n1.0\n2.0\n").unwrap();
        assert!(matches!(load_weights(&path), Err(Error::Data(_))));
    }
}
