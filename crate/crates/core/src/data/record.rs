use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;

/// Number of high-level features per event.
pub const N_FEATURES: usize = 23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "SM")]
    Sm,
    Higgs,
    Graviton,
    #[serde(rename = "unlabeled")]
    Unlabeled,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Sm => "SM",
            Label::Higgs => "Higgs",
            Label::Graviton => "Graviton",
            Label::Unlabeled => "unlabeled",
        }
    }

    pub fn is_anomaly(&self) -> bool {
        matches!(self, Label::Higgs | Label::Graviton)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "SM" => Ok(Label::Sm),
            "Higgs" => Ok(Label::Higgs),
            "Graviton" => Ok(Label::Graviton),
            "" | "unlabeled" => Ok(Label::Unlabeled),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub features: Vec<f64>,
    pub label: Label,
}

impl EventRecord {
    pub fn new(features: Vec<f64>, label: Label) -> Result<Self> {
        if features.len() != N_FEATURES {
            return Err(Error::DimensionMismatch {
                expected: N_FEATURES,
                got: features.len(),
            });
        }
        if let Some(v) = features.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite feature {v}")));
        }
        Ok(Self { features, label })
    }
}

/// Reads events from CSV: header `f0..f22` and an optional trailing `label` column.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<EventRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let has_label = match headers.len() {
        N_FEATURES => false,
        n if n == N_FEATURES + 1 => true,
        n => {
            return Err(Error::MalformedRow {
                line: 1,
                reason: format!("expected {N_FEATURES} or {} columns, found {n}", N_FEATURES + 1),
            })
        }
    };
    for (i, h) in headers.iter().take(N_FEATURES).enumerate() {
        if h.trim() != format!("f{i}") {
            return Err(Error::MalformedRow {
                line: 1,
                reason: format!("column {i} is {h:?}, expected \"f{i}\""),
            });
        }
    }
    if has_label && headers[N_FEATURES].trim() != "label" {
        return Err(Error::MalformedRow {
            line: 1,
            reason: "last column must be \"label\"".into(),
        });
    }
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let line = row + 2;
        let rec = rec.map_err(|e| Error::MalformedRow {
            line,
            reason: e.to_string(),
        })?;
        if rec.len() != headers.len() {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected {} columns, found {}", headers.len(), rec.len()),
            });
        }
        let features = rec
            .iter()
            .take(N_FEATURES)
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::MalformedRow {
                    line,
                    reason: format!("{f:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let label = if has_label {
            rec[N_FEATURES]
                .parse()
                .map_err(|reason| Error::MalformedRow { line, reason })?
        } else {
            Label::Unlabeled
        };
        out.push(EventRecord::new(features, label).map_err(|e| Error::MalformedRow {
            line,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<EventRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingArtifact(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    read_csv(std::io::BufReader::new(file))
}

pub fn write_csv<W: Write>(writer: W, events: &[EventRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..N_FEATURES).map(|i| format!("f{i}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for e in events {
        let mut row: Vec<String> = e.features.iter().map(|v| format!("{v:?}")).collect();
        row.push(e.label.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(path: impl AsRef<Path>, events: &[EventRecord]) -> Result<()> {
    write_csv(std::io::BufWriter::new(std::fs::File::create(path)?), events)
}

/// Seeded random subset of `size` records.
///
/// The subset is a prefix of one seeded permutation, so for a fixed seed a
/// smaller subset is always contained in a larger one.
pub fn sample_subset(data: &[EventRecord], size: usize, seed: u64) -> Result<Vec<EventRecord>> {
    if size > data.len() {
        return Err(Error::NotEnoughRecords {
            needed: size,
            got: data.len(),
        });
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut substream(seed, "subset"));
    Ok(idx[..size].iter().map(|&i| data[i].clone()).collect())
}
