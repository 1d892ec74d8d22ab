use std::collections::HashMap;
use std::io::{Read, Write};

use ndarray::Array2;

use super::vector::{feature_names, FeatureVector, NUM_FEATURES};
use crate::data::{Group, Subject};
use crate::error::{Error, Result};

/// Feature matrix with one row per trial plus subject and group columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub subject_ids: Vec<String>,
    pub groups: Vec<Group>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, subject_ids: Vec<String>, groups: Vec<Group>, feature_names: Vec<String>) -> Result<Self> {
        let (n, d) = x.dim();
        if subject_ids.len() != n || groups.len() != n || feature_names.len() != d {
            return Err(Error::domain(format!(
                "dataset shape mismatch: {n}x{d} matrix, {} subject ids, {} groups, {} names",
                subject_ids.len(),
                groups.len(),
                feature_names.len()
            )));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("dataset contains non-finite value {v}")));
        }
        Ok(Dataset {
            x,
            subject_ids,
            groups,
            feature_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// Distinct subject ids in order of first appearance.
    pub fn subjects(&self) -> Vec<(String, Group)> {
        let mut seen = Vec::<(String, Group)>::new();
        for (id, g) in self.subject_ids.iter().zip(&self.groups) {
            if !seen.iter().any(|(s, _)| s == id) {
                seen.push((id.clone(), *g));
            }
        }
        seen
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = self.feature_names.join(",");
        header.push_str(",subject_id,group");
        writeln!(out, "{header}")?;
        for (i, row) in self.x.rows().into_iter().enumerate() {
            let mut line = row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            line.push_str(&format!(",{},{}", self.subject_ids[i], self.groups[i]));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let d = header.len().checked_sub(2).ok_or_else(|| Error::Parse {
            line: 1,
            message: "dataset header needs feature columns plus subject_id,group".into(),
        })?;
        if header[d] != "subject_id" || header[d + 1] != "group" {
            return Err(Error::Parse {
                line: 1,
                message: "dataset header must end with subject_id,group".into(),
            });
        }
        let mut values = Vec::new();
        let mut subject_ids = Vec::new();
        let mut groups = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            for (j, field) in record.iter().take(d).enumerate() {
                values.push(field.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("column `{}` is not a number: `{field}`", header[j]),
                })?);
            }
            subject_ids.push(record[d].to_string());
            groups.push(record[d + 1].parse::<Group>().map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?);
        }
        let n = subject_ids.len();
        let x = Array2::from_shape_vec((n, d), values).map_err(|e| Error::domain(e.to_string()))?;
        Dataset::new(x, subject_ids, groups, header[..d].to_vec())
    }
}

/// Join extracted trials with subject metadata. Row order follows `rows`.
pub fn build_dataset(rows: &[(String, FeatureVector)], subjects: &[Subject]) -> Result<Dataset> {
    let by_id: HashMap<&str, &Subject> = subjects.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut values = Vec::with_capacity(rows.len() * NUM_FEATURES);
    let mut ids = Vec::with_capacity(rows.len());
    let mut groups = Vec::with_capacity(rows.len());
    for (subject_id, fv) in rows {
        let subject = by_id
            .get(subject_id.as_str())
            .ok_or_else(|| Error::Join(subject_id.clone()))?;
        values.extend_from_slice(&fv.to_array());
        ids.push(subject_id.clone());
        groups.push(subject.group);
    }
    let x = Array2::from_shape_vec((rows.len(), NUM_FEATURES), values).map_err(|e| Error::domain(e.to_string()))?;
    Dataset::new(x, ids, groups, feature_names())
}
