//! Time-ordered observation sequences and their CSV representation.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{RenalError, Result};

/// Relative tolerance on the spacing of a regular series.
const SPACING_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    /// Equally spaced samples of a time series.
    Regular,
    /// Event times of a (possibly spatial) point process.
    Event,
}

impl std::str::FromStr for SequenceKind {
    type Err = RenalError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regular" => Ok(SequenceKind::Regular),
            "event" => Ok(SequenceKind::Event),
            other => Err(RenalError::Config(format!(
                "unknown sequence kind `{other}` (expected `regular` or `event`)"
            ))),
        }
    }
}

impl std::fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SequenceKind::Regular => "regular",
            SequenceKind::Event => "event",
        })
    }
}

/// A strictly time-ordered sequence of `d`-dimensional observations.
///
/// Values are stored row-major, one row of `dim` values per timestamp. Event
/// sequences may have `dim == 0` (a bare point process).
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationSequence {
    timestamps: Vec<f64>,
    values: Vec<f64>,
    dim: usize,
    kind: SequenceKind,
}

impl ObservationSequence {
    pub fn new(
        timestamps: Vec<f64>,
        values: Vec<f64>,
        dim: usize,
        kind: SequenceKind,
    ) -> Result<Self> {
        let n = timestamps.len();
        if n < 2 {
            return Err(RenalError::InsufficientData(format!(
                "a sequence needs at least 2 observations, got {n}"
            )));
        }
        if values.len() != n * dim {
            return Err(RenalError::invalid(format!(
                "expected {} values for {n} rows of dimension {dim}, got {}",
                n * dim,
                values.len()
            )));
        }
        if kind == SequenceKind::Regular && dim == 0 {
            return Err(RenalError::invalid("a regular series needs at least one value column"));
        }
        if let Some(i) = timestamps.iter().position(|t| !t.is_finite()) {
            return Err(RenalError::invalid(format!("timestamp {i} is not finite")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(RenalError::invalid(format!(
                "value in row {} is not finite",
                i / dim.max(1)
            )));
        }
        if let Some(i) = first_inversion(&timestamps) {
            return Err(RenalError::invalid(format!(
                "timestamps not strictly increasing at row {i}: {} then {}",
                timestamps[i - 1],
                timestamps[i]
            )));
        }
        if kind == SequenceKind::Regular {
            if let Some(i) = irregular_step(&timestamps) {
                return Err(RenalError::invalid(format!(
                    "regular series is not equally spaced at row {i}"
                )));
            }
        }
        Ok(Self {
            timestamps,
            values,
            dim,
            kind,
        })
    }

    /// A regular series with timestamps `0, dt, 2 dt, ...`.
    pub fn regular(values: Vec<f64>, dim: usize, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(RenalError::invalid(format!("sampling step must be positive, got {dt}")));
        }
        let n = if dim == 0 { 0 } else { values.len() / dim };
        let timestamps = (0..n).map(|i| i as f64 * dt).collect();
        Self::new(timestamps, values, dim, SequenceKind::Regular)
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Contiguous sub-sequence `[start, start + len)`.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() {
            return Err(RenalError::InsufficientData(format!(
                "window [{start}, {}) exceeds sequence length {}",
                start + len,
                self.len()
            )));
        }
        Self::new(
            self.timestamps[start..start + len].to_vec(),
            self.values[start * self.dim..(start + len) * self.dim].to_vec(),
            self.dim,
            self.kind,
        )
    }

    /// Width of the feature vector fed to the embedding network.
    pub fn feature_dim(&self) -> usize {
        feature_dim(self.kind, self.dim)
    }

    /// Per-step network inputs and time steps.
    ///
    /// Regular series feed their values. Event sequences feed the gap to the
    /// previous event followed by the mark/location values. The first event's
    /// gap is its time since the origin, or the following gap when the first
    /// event sits at or before the origin.
    pub fn features(&self) -> Features {
        let n = self.len();
        let t = &self.timestamps;
        let mut gaps = Vec::with_capacity(n);
        let first = match self.kind {
            SequenceKind::Event if t[0] > 0.0 => t[0],
            _ => t[1] - t[0],
        };
        gaps.push(first);
        gaps.extend(t.windows(2).map(|w| w[1] - w[0]));

        let width = self.feature_dim();
        let data = match self.kind {
            SequenceKind::Regular => self.values.clone(),
            SequenceKind::Event => {
                let mut data = Vec::with_capacity(n * width);
                for (i, gap) in gaps.iter().enumerate() {
                    data.push(*gap);
                    data.extend_from_slice(self.row(i));
                }
                data
            }
        };
        Features {
            data,
            width,
            steps: gaps,
        }
    }
}

pub(crate) fn feature_dim(kind: SequenceKind, dim: usize) -> usize {
    match kind {
        SequenceKind::Regular => dim,
        SequenceKind::Event => dim + 1,
    }
}

/// Row-major network inputs plus the time step preceding each row.
#[derive(Clone, Debug, PartialEq)]
pub struct Features {
    pub data: Vec<f64>,
    pub width: usize,
    pub steps: Vec<f64>,
}

impl Features {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }
}

fn first_inversion(t: &[f64]) -> Option<usize> {
    t.windows(2).position(|w| w[1] <= w[0]).map(|i| i + 1)
}

fn irregular_step(t: &[f64]) -> Option<usize> {
    let step = t[1] - t[0];
    // Differences of large timestamps carry their own rounding error.
    (2..t.len()).find(|&i| {
        let tol = SPACING_RTOL * step.abs() + 4.0 * f64::EPSILON * t[i].abs();
        ((t[i] - t[i - 1]) - step).abs() > tol
    })
}

/// Reads a sequence from a CSV file with header `t,x1,...,xd`.
pub fn load_csv(path: impl AsRef<Path>, kind: SequenceKind) -> Result<ObservationSequence> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| RenalError::io(path, e))?;
    read_csv(file, path, kind)
}

/// Parses CSV text; `origin` is only used to label error messages.
pub fn read_csv<R: Read>(
    reader: R,
    origin: impl AsRef<Path>,
    kind: SequenceKind,
) -> Result<ObservationSequence> {
    let origin = origin.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |line: u64, column: usize, message: String| RenalError::Parse {
        path: origin.to_path_buf(),
        line,
        column,
        message,
    };

    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, 1, e.to_string()))?
        .clone();
    if headers.get(0) != Some("t") {
        return Err(parse_err(1, 1, "first column must be named `t`".into()));
    }
    for (j, name) in headers.iter().enumerate().skip(1) {
        if name != format!("x{j}") {
            return Err(parse_err(1, j + 1, format!("expected column `x{j}`, found `{name}`")));
        }
    }
    let dim = headers.len() - 1;

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, 1, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != dim + 1 {
            return Err(parse_err(
                line,
                record.len().min(dim + 1) + 1,
                format!("expected {} fields, found {}", dim + 1, record.len()),
            ));
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, j + 1, format!("malformed number `{field}`")))?;
            if !v.is_finite() {
                return Err(parse_err(line, j + 1, format!("non-finite number `{field}`")));
            }
            if j == 0 {
                timestamps.push(v);
            } else {
                values.push(v);
            }
        }
        lines.push(line);
    }

    let validation = |line: u64, message: String| RenalError::Validation {
        path: origin.to_path_buf(),
        line,
        message,
    };
    if let Some(i) = first_inversion(&timestamps) {
        let what = if timestamps[i] == timestamps[i - 1] {
            "duplicate timestamp"
        } else {
            "timestamp decreases"
        };
        return Err(validation(
            lines[i],
            format!("{what}: {} follows {}", timestamps[i], timestamps[i - 1]),
        ));
    }
    if timestamps.len() < 2 {
        return Err(RenalError::InsufficientData(format!(
            "{}: a sequence needs at least 2 rows, found {}",
            origin.display(),
            timestamps.len()
        )));
    }
    if kind == SequenceKind::Regular {
        if let Some(i) = irregular_step(&timestamps) {
            return Err(validation(lines[i], "regular series is not equally spaced".into()));
        }
    }
    ObservationSequence::new(timestamps, values, dim, kind)
}

/// Writes `seq` as CSV with every number at 17 significant digits.
pub fn save_csv(seq: &ObservationSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| RenalError::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv(seq, &mut out).map_err(|e| RenalError::io(path, e))?;
    out.flush().map_err(|e| RenalError::io(path, e))
}

pub fn write_csv<W: Write>(seq: &ObservationSequence, out: &mut W) -> std::io::Result<()> {
    let mut header = String::from("t");
    for j in 1..=seq.dim() {
        header.push_str(&format!(",x{j}"));
    }
    writeln!(out, "{header}")?;
    for i in 0..seq.len() {
        write!(out, "{}", fmt17(seq.timestamps[i]))?;
        for v in seq.row(i) {
            write!(out, ",{}", fmt17(*v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Scientific notation with 17 significant digits; parses back bit-exactly.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
