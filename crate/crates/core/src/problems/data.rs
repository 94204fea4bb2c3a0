//! Labelled datasets, linear classifiers and their CSV formats.
//!
//! Dataset CSV: header `f1,...,fd,label`, then one sample per line with `d`
//! decimal features and an integer label. Model CSV: a first line `K d`, then
//! `K` lines of `d` comma-separated weights, then one line of `K` biases.
//! Parsing is strict: no blank cells, no non-finite values, no extra columns.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    features: Vec<f64>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Dataset {
    /// `num_classes` defaults to `max(label) + 1`, and is at least 2.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, num_classes: Option<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Construction("dataset has no rows".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::Construction(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::Construction("dataset has no feature columns".into()));
        }
        let mut features = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Construction(format!(
                    "row {i} has {} features, expected {d}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Construction(format!("row {i} contains non-finite value {v}")));
            }
            features.extend_from_slice(row);
        }
        let inferred = labels.iter().max().map_or(0, |m| m + 1).max(2);
        let num_classes = num_classes.unwrap_or(inferred);
        if num_classes < 2 {
            return Err(Error::Construction("need at least 2 classes".into()));
        }
        if let Some((i, l)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::Construction(format!(
                "label {l} of row {i} outside [0, {num_classes})"
            )));
        }
        Ok(Self {
            n: rows.len(),
            d,
            features,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.d)
    }

    pub fn max_row_norm_sq(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.d).map(|k| format!("f{k}")).collect();
        writeln!(out, "{},label", header.join(","))?;
        for (row, label) in self.rows().zip(&self.labels) {
            for v in row {
                write!(out, "{v:?},")?;
            }
            writeln!(out, "{label}")?;
        }
        Ok(())
    }
}

fn parse_float(cell: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{what}: `{cell}` is not a decimal number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("{what}: non-finite value `{cell}`"),
        });
    }
    Ok(v)
}

fn lines<R: BufRead>(input: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    input.lines().enumerate().map(|(i, l)| {
        (
            i + 1,
            l.map(|mut s| {
                if s.ends_with('\r') {
                    s.pop();
                }
                s
            }),
        )
    })
}

pub fn read_dataset_csv<R: BufRead>(input: R, num_classes: Option<usize>) -> Result<Dataset> {
    let mut it = lines(input);
    let (_, header) = it.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let header = header?;
    let cols: Vec<&str> = header.split(',').collect();
    let d = cols.len().saturating_sub(1);
    let expected: Vec<String> = (1..=d).map(|k| format!("f{k}")).chain(["label".to_string()]).collect();
    if d == 0 || cols != expected {
        return Err(Error::Parse {
            line: 1,
            message: "header must be `f1,...,fd,label`".into(),
        });
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (line, text) in it {
        let text = text?;
        if text.is_empty() {
            continue;
        }
        let cells: Vec<&str> = text.split(',').collect();
        if cells.len() != d + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} cells, found {}", d + 1, cells.len()),
            });
        }
        let row = cells[..d]
            .iter()
            .enumerate()
            .map(|(k, c)| parse_float(c, line, &format!("feature f{}", k + 1)))
            .collect::<Result<Vec<_>>>()?;
        let label: usize = cells[d].parse().map_err(|_| Error::Parse {
            line,
            message: format!("label `{}` is not a non-negative integer", cells[d]),
        })?;
        rows.push(row);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no samples".into(),
        });
    }
    Dataset::new(rows, labels, num_classes)
}

pub fn load_dataset_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    read_dataset_csv(BufReader::new(File::open(path)?), None)
}

/// Linear classifier with logits `Z(x) = Wx + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSoftmaxModel {
    classes: usize,
    d: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl LinearSoftmaxModel {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        let classes = weights.len();
        if classes < 2 {
            return Err(Error::Construction("model needs at least 2 classes".into()));
        }
        if bias.len() != classes {
            return Err(Error::Construction(format!(
                "{classes} weight rows but {} biases",
                bias.len()
            )));
        }
        let d = weights[0].len();
        if d == 0 || weights.iter().any(|r| r.len() != d) {
            return Err(Error::Construction("weight rows must share a positive length".into()));
        }
        let flat: Vec<f64> = weights.into_iter().flatten().collect();
        if flat.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::Construction("model has non-finite entries".into()));
        }
        Ok(Self {
            classes,
            d,
            weights: flat,
            bias,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn weight_row(&self, k: usize) -> &[f64] {
        &self.weights[k * self.d..(k + 1) * self.d]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn logits_into(&self, x: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.bias[k] + self.weight_row(k).iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.classes];
        self.logits_into(x, &mut z);
        z
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let z = self.logits(x);
        (0..self.classes).fold(0, |best, k| if z[k] > z[best] { k } else { best })
    }

    pub fn max_row_norm(&self) -> f64 {
        (0..self.classes)
            .map(|k| self.weight_row(k).iter().map(|w| w * w).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.classes, self.d)?;
        let join = |vals: &[f64]| vals.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",");
        for k in 0..self.classes {
            writeln!(out, "{}", join(self.weight_row(k)))?;
        }
        writeln!(out, "{}", join(&self.bias))
    }
}

fn parse_row(text: &str, line: usize, width: usize, what: &str) -> Result<Vec<f64>> {
    let cells: Vec<&str> = text.split(',').collect();
    if cells.len() != width {
        return Err(Error::Parse {
            line,
            message: format!("{what}: expected {width} values, found {}", cells.len()),
        });
    }
    cells.iter().map(|c| parse_float(c, line, what)).collect()
}

pub fn read_model_csv<R: BufRead>(input: R) -> Result<LinearSoftmaxModel> {
    let mut it = lines(input);
    let (_, first) = it.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let first = first?;
    let dims: Vec<usize> = first
        .split(' ')
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse {
            line: 1,
            message: "first line must be `K d`".into(),
        })?;
    let [classes, d] = dims[..] else {
        return Err(Error::Parse {
            line: 1,
            message: "first line must be `K d`".into(),
        });
    };
    let mut weights = Vec::with_capacity(classes);
    let mut bias = None;
    for (line, text) in it {
        let text = text?;
        if text.is_empty() {
            continue;
        }
        if weights.len() < classes {
            weights.push(parse_row(&text, line, d, "weight row")?);
        } else if bias.is_none() {
            bias = Some(parse_row(&text, line, classes, "bias row")?);
        } else {
            return Err(Error::Parse {
                line,
                message: "unexpected content after bias row".into(),
            });
        }
    }
    let bias = bias.ok_or(Error::Parse {
        line: classes + 2,
        message: format!("expected {classes} weight rows followed by a bias row"),
    })?;
    LinearSoftmaxModel::new(weights, bias)
}

pub fn load_model_csv(path: impl AsRef<Path>) -> Result<LinearSoftmaxModel> {
    read_model_csv(BufReader::new(File::open(path)?))
}
