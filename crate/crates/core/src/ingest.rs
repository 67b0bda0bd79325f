//! CSV loading, equal-width quantization, train/test splits and folds.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Feature, FeatureSpace, Instance};
use crate::error::{Error, Result};

/// Which column holds the class, if any.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum ClassPosition {
    #[default]
    Last,
    Named(String),
    None,
}

#[derive(Clone, Debug, Default)]
pub struct SchemaHints {
    pub class: ClassPosition,
    /// Columns kept categorical even when every value parses as a number.
    pub categorical: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RawColumn {
    Categorical(Vec<String>),
    Numeric(Vec<f64>),
}

impl RawColumn {
    fn len(&self) -> usize {
        match self {
            RawColumn::Categorical(v) => v.len(),
            RawColumn::Numeric(v) => v.len(),
        }
    }
}

/// A loaded CSV before quantization: feature columns and an optional
/// categorical class column.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub columns: Vec<RawColumn>,
    pub class: Option<(String, Vec<String>)>,
}

impl RawTable {
    pub fn from_path(path: impl AsRef<Path>, hints: &SchemaHints) -> Result<RawTable> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_reader(file, hints)
    }

    pub fn from_reader<R: Read>(reader: R, hints: &SchemaHints) -> Result<RawTable> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if headers.is_empty() {
            return Err(Error::Load {
                row: 0,
                column: String::new(),
                message: "missing header row".into(),
            });
        }
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            // row numbers are 1-based data rows, header excluded
            let row = r + 1;
            if rec.len() != headers.len() {
                return Err(Error::Load {
                    row,
                    column: String::new(),
                    message: format!("expected {} fields, found {}", headers.len(), rec.len()),
                });
            }
            for (c, v) in rec.iter().enumerate() {
                let v = v.trim();
                if v.is_empty() {
                    return Err(Error::Load {
                        row,
                        column: headers[c].clone(),
                        message: "empty value".into(),
                    });
                }
                cells[c].push(v.to_string());
            }
        }

        let class_idx = match &hints.class {
            ClassPosition::Last => Some(headers.len() - 1),
            ClassPosition::None => None,
            ClassPosition::Named(n) => Some(headers.iter().position(|h| h == n).ok_or_else(|| {
                Error::Load {
                    row: 0,
                    column: n.clone(),
                    message: "class column not found".into(),
                }
            })?),
        };

        let mut out_headers = Vec::new();
        let mut columns = Vec::new();
        let mut class = None;
        for (c, values) in cells.into_iter().enumerate() {
            if Some(c) == class_idx {
                class = Some((headers[c].clone(), values));
                continue;
            }
            let forced = hints.categorical.iter().any(|h| h == &headers[c]);
            let parsed: Option<Vec<f64>> = if forced || values.is_empty() {
                None
            } else {
                values.iter().map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite())).collect()
            };
            out_headers.push(headers[c].clone());
            columns.push(match parsed {
                Some(nums) => RawColumn::Numeric(nums),
                None => RawColumn::Categorical(values),
            });
        }
        Ok(RawTable {
            headers: out_headers,
            columns,
            class,
        })
    }

    pub fn len(&self) -> usize {
        self.columns
            .first()
            .map(RawColumn::len)
            .or_else(|| self.class.as_ref().map(|(_, v)| v.len()))
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn numeric_columns(&self) -> Vec<&str> {
        self.headers
            .iter()
            .zip(&self.columns)
            .filter(|(_, c)| matches!(c, RawColumn::Numeric(_)))
            .map(|(h, _)| h.as_str())
            .collect()
    }

    /// Treats every column as categorical, numbers included.
    pub fn into_categorical(self) -> Result<Dataset> {
        quantize(&self, &QuantizationSpec::default())
    }
}

/// Interval binning for one numeric column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnBins {
    pub column: String,
    pub intervals: usize,
    /// Strictly increasing inner cut points, `intervals - 1` of them.
    pub cuts: Vec<f64>,
}

impl ColumnBins {
    pub fn from_cuts(column: impl Into<String>, cuts: Vec<f64>) -> Result<ColumnBins> {
        let column = column.into();
        if cuts.is_empty() || cuts.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(Error::Quantize(format!(
                "cut points for '{column}' must be non-empty and strictly increasing"
            )));
        }
        Ok(ColumnBins {
            intervals: cuts.len() + 1,
            column,
            cuts,
        })
    }

    /// Equal-width bins over `[min, max]` of the given values.
    pub fn fit(column: impl Into<String>, values: &[f64], intervals: usize) -> Result<ColumnBins> {
        let column = column.into();
        if intervals < 2 {
            return Err(Error::Quantize(format!(
                "'{column}': at least 2 intervals required"
            )));
        }
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if values.is_empty() || min.partial_cmp(&max) != Some(std::cmp::Ordering::Less) {
            return Err(Error::Quantize(format!(
                "column '{column}' is constant on the fitting rows"
            )));
        }
        let width = (max - min) / intervals as f64;
        let cuts = (1..intervals).map(|j| min + width * j as f64).collect();
        ColumnBins::from_cuts(column, cuts).map(|mut b| {
            b.intervals = intervals;
            b
        })
    }

    /// Interval index; values on a cut fall in the lower interval and values
    /// outside the fitted range clamp to the extreme intervals.
    pub fn bin(&self, x: f64) -> usize {
        self.cuts.iter().take_while(|&&c| x > c).count()
    }

    pub fn labels(&self) -> Vec<String> {
        let n = self.cuts.len();
        (0..=n)
            .map(|i| {
                if i == 0 {
                    format!("<={}", self.cuts[0])
                } else if i == n {
                    format!(">{}", self.cuts[n - 1])
                } else {
                    format!("({},{}]", self.cuts[i - 1], self.cuts[i])
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QuantizationSpec {
    pub columns: Vec<ColumnBins>,
}

impl QuantizationSpec {
    /// Fits `intervals` equal-width bins for every numeric column, using only
    /// `rows` (all rows when `None`).
    pub fn fit(raw: &RawTable, intervals: usize, rows: Option<&[usize]>) -> Result<QuantizationSpec> {
        let mut columns = Vec::new();
        for (h, col) in raw.headers.iter().zip(&raw.columns) {
            if let RawColumn::Numeric(values) = col {
                let fitting: Vec<f64> = match rows {
                    Some(idx) => idx.iter().map(|&i| values[i]).collect(),
                    None => values.clone(),
                };
                columns.push(ColumnBins::fit(h.clone(), &fitting, intervals)?);
            }
        }
        Ok(QuantizationSpec { columns })
    }

    pub fn get(&self, column: &str) -> Option<&ColumnBins> {
        self.columns.iter().find(|c| c.column == column)
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Maps every row of `raw` through `spec`. Columns named in the spec are
/// binned; a spec column that is already categorical with the spec's own
/// labels is kept as is, which makes re-quantization the identity.
pub fn quantize(raw: &RawTable, spec: &QuantizationSpec) -> Result<Dataset> {
    for b in &spec.columns {
        if !raw.headers.contains(&b.column) {
            return Err(Error::Quantize(format!(
                "spec column '{}' is not in the table",
                b.column
            )));
        }
    }
    let n = raw.len();
    let mut features = Vec::new();
    let mut value_cols: Vec<Vec<usize>> = Vec::new();
    for (h, col) in raw.headers.iter().zip(&raw.columns) {
        match (spec.get(h), col) {
            (Some(bins), RawColumn::Numeric(values)) => {
                features.push(Feature::new(h.clone(), bins.labels()));
                value_cols.push(values.iter().map(|&x| bins.bin(x)).collect());
            }
            (Some(bins), RawColumn::Categorical(labels)) => {
                let domain = bins.labels();
                let idx = labels
                    .iter()
                    .enumerate()
                    .map(|(r, l)| {
                        domain.iter().position(|d| d == l).ok_or_else(|| Error::Load {
                            row: r + 1,
                            column: h.clone(),
                            message: format!("'{l}' is neither numeric nor an interval label"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                features.push(Feature::new(h.clone(), domain));
                value_cols.push(idx);
            }
            (None, col) => {
                let labels: Vec<String> = match col {
                    RawColumn::Categorical(v) => v.clone(),
                    RawColumn::Numeric(v) => v.iter().map(|x| x.to_string()).collect(),
                };
                let (domain, idx) = categorical_domain(&labels);
                features.push(Feature::new(h.clone(), domain));
                value_cols.push(idx);
            }
        }
    }
    let space = FeatureSpace::new(features).map_err(|e| match e {
        Error::InvalidSpace(m) => Error::Load {
            row: 0,
            column: String::new(),
            message: m,
        },
        e => e,
    })?;
    let rows = (0..n)
        .map(|r| Instance::new(value_cols.iter().map(|c| c[r]).collect()))
        .collect();
    let classes = raw.class.as_ref().map(|(name, labels)| {
        let (domain, values) = categorical_domain(labels);
        ClassColumn {
            name: name.clone(),
            labels: domain,
            values,
        }
    });
    Dataset::new(space, rows, classes)
}

/// Domain in first-appearance order plus per-row indices.
fn categorical_domain(labels: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut domain: Vec<String> = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let idx = labels
        .iter()
        .map(|l| {
            *seen.entry(l.as_str()).or_insert_with(|| {
                domain.push(l.clone());
                domain.len() - 1
            })
        })
        .collect();
    (domain, idx)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassColumn {
    pub name: String,
    pub labels: Vec<String>,
    pub values: Vec<usize>,
}

/// Categorical rows over a feature space, with optional class labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    space: FeatureSpace,
    rows: Vec<Instance>,
    classes: Option<ClassColumn>,
}

impl Dataset {
    pub fn new(space: FeatureSpace, rows: Vec<Instance>, classes: Option<ClassColumn>) -> Result<Dataset> {
        for (r, row) in rows.iter().enumerate() {
            space.check_instance(row).map_err(|e| Error::Load {
                row: r + 1,
                column: String::new(),
                message: e.to_string(),
            })?;
        }
        if let Some(c) = &classes {
            if c.values.len() != rows.len() {
                return Err(Error::Load {
                    row: 0,
                    column: c.name.clone(),
                    message: format!("{} class values for {} rows", c.values.len(), rows.len()),
                });
            }
            if let Some(r) = c.values.iter().position(|&v| v >= c.labels.len()) {
                return Err(Error::Load {
                    row: r + 1,
                    column: c.name.clone(),
                    message: "class index out of range".into(),
                });
            }
        }
        Ok(Dataset {
            space,
            rows,
            classes,
        })
    }

    /// Reads a CSV whose columns are all categorical, with domains taken from
    /// a known feature space (rows may then be empty).
    pub fn from_csv_with_space(
        reader: impl Read,
        space: &FeatureSpace,
        class_labels: Option<&[String]>,
    ) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut col_of = Vec::with_capacity(space.len());
        for i in 0..space.len() {
            let pos = headers.iter().position(|h| h == space.name(i)).ok_or_else(|| Error::Load {
                row: 0,
                column: space.name(i).to_string(),
                message: "column missing".into(),
            })?;
            col_of.push(pos);
        }
        let class_col = class_labels.map(|_| headers.len() - 1);
        let mut rows = Vec::new();
        let mut class_values = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut values = Vec::with_capacity(space.len());
            for (i, &c) in col_of.iter().enumerate() {
                let label = rec.get(c).unwrap_or("").trim();
                values.push(space.value_index(i, label).ok_or_else(|| Error::Load {
                    row: r + 1,
                    column: space.name(i).to_string(),
                    message: format!("'{label}' is not in the feature domain"),
                })?);
            }
            rows.push(Instance::new(values));
            if let (Some(c), Some(labels)) = (class_col, class_labels) {
                let label = rec.get(c).unwrap_or("").trim();
                class_values.push(labels.iter().position(|l| l == label).ok_or_else(|| {
                    Error::Load {
                        row: r + 1,
                        column: headers[c].clone(),
                        message: format!("unknown class '{label}'"),
                    }
                })?);
            }
        }
        let classes = class_labels.map(|labels| ClassColumn {
            name: headers[class_col.unwrap()].clone(),
            labels: labels.to_vec(),
            values: class_values,
        });
        Dataset::new(space.clone(), rows, classes)
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn rows(&self) -> &[Instance] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Instance {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn classes(&self) -> Option<&ClassColumn> {
        self.classes.as_ref()
    }

    pub fn class_of(&self, i: usize) -> Option<usize> {
        self.classes.as_ref().map(|c| c.values[i])
    }

    pub fn without_class(&self) -> Dataset {
        Dataset {
            space: self.space.clone(),
            rows: self.rows.clone(),
            classes: None,
        }
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            space: self.space.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            classes: self.classes.as_ref().map(|c| ClassColumn {
                name: c.name.clone(),
                labels: c.labels.clone(),
                values: indices.iter().map(|&i| c.values[i]).collect(),
            }),
        }
    }

    /// Back to a raw table of labels, every column categorical.
    pub fn to_raw(&self) -> RawTable {
        let columns = (0..self.space.len())
            .map(|f| {
                RawColumn::Categorical(
                    self.rows
                        .iter()
                        .map(|r| self.space.value_label(f, r[f]).to_string())
                        .collect(),
                )
            })
            .collect();
        RawTable {
            headers: self.space.features().iter().map(|f| f.name.clone()).collect(),
            columns,
            class: self.classes.as_ref().map(|c| {
                (
                    c.name.clone(),
                    c.values.iter().map(|&v| c.labels[v].clone()).collect(),
                )
            }),
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.space.features().iter().map(|f| f.name.as_str()).collect();
        if let Some(c) = &self.classes {
            header.push(&c.name);
        }
        w.write_record(&header)?;
        for (r, row) in self.rows.iter().enumerate() {
            let mut rec: Vec<&str> = (0..self.space.len())
                .map(|f| self.space.value_label(f, row[f]))
                .collect();
            if let Some(c) = &self.classes {
                rec.push(&c.labels[c.values[r]]);
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn split(&self, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        let (train, test) = split_indices(self.len(), fraction, seed)?;
        Ok((self.subset(&train), self.subset(&test)))
    }

    pub fn folds(&self, k: usize, seed: u64) -> Result<Vec<(Dataset, Dataset)>> {
        Ok(fold_indices(self.len(), k, seed)?
            .into_iter()
            .map(|(tr, te)| (self.subset(&tr), self.subset(&te)))
            .collect())
    }
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Random disjoint train/test row indices; `round(fraction * n)` rows train.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Split(format!("fraction {fraction} is outside (0, 1)")));
    }
    let idx = shuffled(n, seed);
    let cut = (fraction * n as f64).round() as usize;
    let mut train = idx[..cut].to_vec();
    let mut test = idx[cut..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// `k` (train, test) index pairs whose test chunks partition the rows.
pub fn fold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::Split(format!("at least 2 folds required, got {k}")));
    }
    if k > n {
        return Err(Error::Split(format!("{k} folds requested for {n} rows")));
    }
    let idx = shuffled(n, seed);
    let mut fold_of = vec![0usize; n];
    for i in 0..k {
        for &row in &idx[i * n / k..(i + 1) * n / k] {
            fold_of[row] = i;
        }
    }
    Ok((0..k)
        .map(|i| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&r| fold_of[r] == i);
            (train, test)
        })
        .collect())
}
