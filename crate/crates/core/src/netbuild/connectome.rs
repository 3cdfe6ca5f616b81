use std::io::Read;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Area×area matrix: `values[i][j]` is the density from area `i` (row) to
/// area `j` (column).
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectomeMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Interareal distances (mm), symmetric with a zero diagonal.
    pub distances: Option<Vec<Vec<f64>>>,
}

impl ConnectomeMatrix {
    pub fn n_areas(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Same labels, every density zero.
    pub fn zeroed(&self) -> Self {
        let mut out = self.clone();
        for row in &mut out.values {
            row.fill(0.0);
        }
        out
    }
}

/// Reads a labelled square CSV matrix: header row `,A,B,...`, then one row
/// per label starting with the label.
pub fn read_labelled_matrix<R: Read>(reader: R, origin: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let err = |reason: String| Error::Connectome {
        path: origin.to_path_buf(),
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = rdr.records();
    let header = rows
        .next()
        .ok_or_else(|| err("empty file".into()))?
        .map_err(|e| err(e.to_string()))?;
    let labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
        return Err(err(format!("repeated label `{dup}`")));
    }
    let mut values = Vec::with_capacity(labels.len());
    for (i, rec) in rows.enumerate() {
        let rec = rec.map_err(|e| err(format!("ragged or unreadable row: {e}")))?;
        let line = i + 2;
        let label = rec.get(0).unwrap_or_default();
        if labels.get(i).map(String::as_str) != Some(label) {
            return Err(err(format!("line {line}: row label `{label}` does not match header order")));
        }
        let row = rec
            .iter()
            .skip(1)
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(format!("line {line}, column {}: non-numeric cell `{cell}`", j + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        values.push(row);
    }
    if values.len() != labels.len() {
        return Err(err(format!(
            "matrix is not square: {} labels, {} rows",
            labels.len(),
            values.len()
        )));
    }
    Ok((labels, values))
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

/// Loads the density matrix and, if given, the distance matrix. Labels of
/// both files must agree.
pub fn load_connectome(matrix: &Path, distances: Option<&Path>) -> Result<ConnectomeMatrix> {
    let (labels, values) = read_labelled_matrix(open(matrix)?, matrix)?;
    if values.iter().flatten().any(|&x| x < 0.0) {
        return Err(Error::Connectome {
            path: matrix.to_path_buf(),
            reason: "negative density".into(),
        });
    }
    let distances = match distances {
        None => None,
        Some(p) => {
            let (dl, d) = read_labelled_matrix(open(p)?, p)?;
            if dl != labels {
                return Err(Error::Connectome {
                    path: p.to_path_buf(),
                    reason: format!("labels {dl:?} differ from the matrix labels {labels:?}"),
                });
            }
            check_distances(&d, p)?;
            Some(d)
        }
    };
    Ok(ConnectomeMatrix {
        labels,
        values,
        distances,
    })
}

pub fn check_distances(d: &[Vec<f64>], origin: &Path) -> Result<()> {
    let err = |reason: String| Error::Connectome {
        path: PathBuf::from(origin),
        reason,
    };
    for i in 0..d.len() {
        if d[i][i] != 0.0 {
            return Err(err(format!("distance diagonal entry {i} is {}", d[i][i])));
        }
        for j in 0..i {
            if d[i][j] != d[j][i] {
                return Err(err(format!("distance matrix is not symmetric at ({i}, {j})")));
            }
            if d[i][j] < 0.0 {
                return Err(err(format!("negative distance at ({i}, {j})")));
            }
        }
    }
    Ok(())
}
