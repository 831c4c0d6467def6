//! Barcode extraction per subject, the two combination strategies
//! (aggregate-then-vectorize and vectorize-then-concatenate), feature
//! matrices, and the classification harness.

pub mod experiment;
pub mod learn;
pub mod metrics;
pub mod split;

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barcode::{aggregate, Bar, Barcode, Range};
use crate::error::{Error, Result};
use crate::imaging::{DatasetManifest, GrayImage};
use crate::persistence::{cubical_persistence, rips_persistence, Diagram, MaxScale};
use crate::ulbp::{select_landmarks, Pattern};
use crate::vectorize::{feature_label, FeatureVector, VectorizerConfig};

pub use experiment::{run_experiment, ExperimentConfig, ExperimentOutcome};
pub use metrics::{metrics, MetricsReport};
pub use split::{split, ZScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Filtration {
    Cubical,
    Rips,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    Aggregate,
    Concat,
}

impl Combine {
    pub fn name(self) -> &'static str {
        match self {
            Combine::Aggregate => "Barcode Agg.",
            Combine::Concat => "Feature Concat.",
        }
    }
}

macro_rules! display_via_serde {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let s = serde_json::to_value(self).map_err(|_| fmt::Error)?;
                f.write_str(s.as_str().unwrap_or_default())
            }
        }
    )*};
}
display_via_serde!(Filtration, Combine);

/// How barcodes are produced from a subject's images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub filtration: Filtration,
    /// Landmark patterns for the Rips route; kept sorted.
    pub patterns: Vec<Pattern>,
    /// `None` means the largest pairwise distance.
    pub max_scale: Option<f64>,
    pub vectorizer: VectorizerConfig,
    pub combine: Combine,
}

impl ExtractConfig {
    pub fn new(filtration: Filtration, vectorizer: VectorizerConfig, combine: Combine) -> Self {
        ExtractConfig {
            filtration,
            patterns: Vec::new(),
            max_scale: None,
            vectorizer,
            combine,
        }
    }

    pub fn with_patterns(mut self, mut patterns: Vec<Pattern>) -> Self {
        patterns.sort();
        patterns.dedup();
        self.patterns = patterns;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.vectorizer.validate()?;
        match self.filtration {
            Filtration::Rips if self.patterns.is_empty() => Err(Error::InvalidArgument(
                "the rips filtration needs at least one landmark pattern".into(),
            )),
            Filtration::Cubical if !self.patterns.is_empty() => Err(Error::InvalidArgument(
                "landmark patterns only apply to the rips filtration".into(),
            )),
            _ => Ok(()),
        }?;
        if let Some(s) = self.max_scale {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::InvalidArgument(format!("invalid max scale {s}")));
            }
        }
        Ok(())
    }
}

/// All barcodes of one subject, one diagram per slice (or per slice and
/// landmark pattern, slice-major).
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectBarcodes {
    pub id: String,
    pub label: String,
    pub per_slice: Vec<Diagram>,
}

/// Diagrams for a subject's slices under `cfg`.
pub fn slice_diagrams(images: &[GrayImage], cfg: &ExtractConfig) -> Vec<Diagram> {
    match cfg.filtration {
        Filtration::Cubical => images.iter().map(cubical_persistence).collect(),
        Filtration::Rips => {
            let scale = cfg.max_scale.map_or(MaxScale::Auto, MaxScale::Fixed);
            images
                .iter()
                .flat_map(|img| {
                    cfg.patterns
                        .iter()
                        .map(move |&p| rips_persistence(&select_landmarks(img, p), scale))
                })
                .collect()
        }
    }
}

/// Loads and processes every manifest record in parallel; output keeps
/// manifest order.
pub fn extract_subjects(manifest: &DatasetManifest, cfg: &ExtractConfig) -> Result<Vec<SubjectBarcodes>> {
    manifest
        .records
        .par_iter()
        .map(|rec| {
            let images = manifest.load_record(rec)?;
            Ok(SubjectBarcodes {
                id: rec.id.clone(),
                label: rec.label.clone(),
                per_slice: slice_diagrams(&images, cfg),
            })
        })
        .collect()
}

/// Sampling ranges for the two homology dimensions, fixed before
/// vectorizing so every subject shares one grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureGrids {
    pub dim0: Range,
    pub dim1: Range,
}

impl FeatureGrids {
    pub fn get(&self, dim: u8) -> Range {
        if dim == 0 {
            self.dim0
        } else {
            self.dim1
        }
    }

    /// Global bounds over every bar of the given subjects, per dimension.
    /// A dimension without bars gets the `(0, 1)` sentinel.
    pub fn fit<'a>(subjects: impl IntoIterator<Item = &'a SubjectBarcodes>) -> Self {
        let mut acc: [Option<Range>; 2] = [None, None];
        for s in subjects {
            for d in &s.per_slice {
                for (k, b) in [&d.dim0, &d.dim1].into_iter().enumerate() {
                    if !b.is_empty() {
                        let r = b.bounds();
                        acc[k] = Some(acc[k].map_or(r, |a| a.union(&r)));
                    }
                }
            }
        }
        let sentinel = Barcode::new(0).bounds();
        FeatureGrids {
            dim0: acc[0].unwrap_or(sentinel),
            dim1: acc[1].unwrap_or(sentinel),
        }
    }
}

fn dim_barcodes(s: &SubjectBarcodes, dim: u8) -> impl Iterator<Item = &Barcode> {
    s.per_slice.iter().map(move |d| d.get(dim))
}

/// Aggregate each dimension's barcodes across slices, vectorize each, and
/// join `dim0 ‖ dim1`.
pub fn features_aggregate(s: &SubjectBarcodes, vec: &VectorizerConfig, grids: &FeatureGrids) -> Result<FeatureVector> {
    if s.per_slice.is_empty() {
        return Err(Error::Shape(format!("subject {:?} has no barcodes", s.id)));
    }
    let mut out = FeatureVector::default();
    for dim in 0..2u8 {
        let merged = aggregate(dim_barcodes(s, dim))?;
        out.extend(vec.apply(&merged, grids.get(dim))?);
    }
    Ok(out)
}

/// Vectorize every slice separately and concatenate: all dim-0 blocks in
/// slice order, then all dim-1 blocks.
pub fn features_concat(s: &SubjectBarcodes, vec: &VectorizerConfig, grids: &FeatureGrids) -> Result<FeatureVector> {
    if s.per_slice.is_empty() {
        return Err(Error::Shape(format!("subject {:?} has no barcodes", s.id)));
    }
    let mut out = FeatureVector::default();
    for dim in 0..2u8 {
        let mut index = 0;
        for b in dim_barcodes(s, dim) {
            let v = vec.apply(b, grids.get(dim))?;
            for x in v.values {
                out.values.push(x);
                out.labels.push(feature_label(dim, vec.method, index));
                index += 1;
            }
        }
    }
    Ok(out)
}

pub fn features(s: &SubjectBarcodes, cfg: &ExtractConfig, grids: &FeatureGrids) -> Result<FeatureVector> {
    match cfg.combine {
        Combine::Aggregate => features_aggregate(s, &cfg.vectorizer, grids),
        Combine::Concat => features_concat(s, &cfg.vectorizer, grids),
    }
}

/// Subjects as rows, labelled features as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub labels: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Column subset, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            ids: self.ids.clone(),
            labels: self.labels.clone(),
            columns: cols.iter().map(|&c| self.columns[c].clone()).collect(),
            rows: self.rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for ((id, label), row) in self.ids.iter().zip(&self.labels).zip(&self.rows) {
            let mut rec = vec![id.clone(), label.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 || &header[0] != "id" || &header[1] != "label" {
            return Err(Error::ParseAtRow {
                row: 1,
                message: "header must start with id,label".into(),
            });
        }
        let columns: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let mut m = FeatureMatrix {
            ids: vec![],
            labels: vec![],
            columns,
            rows: vec![],
        };
        for (i, rec) in rdr.records().enumerate() {
            let row_no = i + 2;
            let rec = rec.map_err(|e| Error::ParseAtRow {
                row: row_no,
                message: e.to_string(),
            })?;
            let mut row = Vec::with_capacity(m.columns.len());
            for (c, field) in rec.iter().skip(2).enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::ParseAtRow {
                    row: row_no,
                    message: format!("column {}: {field:?} is not a number", c + 3),
                })?;
                if !v.is_finite() {
                    return Err(Error::ParseAtRow {
                        row: row_no,
                        message: format!("column {}: non-finite value", c + 3),
                    });
                }
                row.push(v);
            }
            m.ids.push(rec[0].to_string());
            m.labels.push(rec[1].to_string());
            m.rows.push(row);
        }
        Ok(m)
    }
}

/// Grid bounds come from `grid_subjects` (typically the training split);
/// every subject must contribute the same number of slices.
pub fn build_feature_matrix(
    subjects: &[SubjectBarcodes],
    cfg: &ExtractConfig,
    grids: &FeatureGrids,
) -> Result<FeatureMatrix> {
    if let Some(first) = subjects.first() {
        let n = first.per_slice.len();
        if let Some(bad) = subjects.iter().find(|s| s.per_slice.len() != n) {
            return Err(Error::Shape(format!(
                "subject {:?} has {} barcodes, subject {:?} has {n}",
                bad.id,
                bad.per_slice.len(),
                first.id
            )));
        }
    }
    let vectors: Vec<FeatureVector> = subjects
        .par_iter()
        .map(|s| features(s, cfg, grids))
        .collect::<Result<_>>()?;
    let columns = vectors.first().map(|v| v.labels.clone()).unwrap_or_default();
    Ok(FeatureMatrix {
        ids: subjects.iter().map(|s| s.id.clone()).collect(),
        labels: subjects.iter().map(|s| s.label.clone()).collect(),
        columns,
        rows: vectors.into_iter().map(|v| v.values).collect(),
    })
}

impl FromStr for Filtration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, false).map_err(Error::InvalidArgument)
    }
}

impl FromStr for Combine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, false).map_err(Error::InvalidArgument)
    }
}

/// Bars of `b` shifted by `c`; used by equivariance checks.
pub fn shift_barcode(b: &Barcode, c: f64) -> Barcode {
    Barcode::from_bars(
        b.dim(),
        b.iter()
            .map(|x| Bar {
                birth: x.birth + c,
                death: x.death + c,
                essential: x.essential,
            })
            .collect(),
    )
}
