//! Ingestion, export and report files.
//!
//! Tabular objects (quantile grids, vectors) are stored as CSV with one object
//! per row and a header row whose width fixes the shape. A first header cell
//! named `label` marks a leading label column. Matrix sequences are JSON
//! documents holding an explicit `dim` and an array of row-major matrices.
//!
//! Every floating-point value written by this module uses 17 significant
//! digits, so exporting and re-ingesting a sequence is the identity.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CpdError, Result};
use crate::inference::ChangePointReport;
use crate::metric_spaces::{
    grid_point, laplacian_from_adjacency, EuclideanObject, MatrixKind, MetricObject,
    ObjectSequence, QuantileObject, Space, SymMatrixObject, DEFAULT_GRID_SIZE,
};
use crate::segmentation::SegmentationResult;
use crate::simulation::StudyResult;

/// On-disk layout of an input dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    /// One quantile grid per row.
    QuantileCsv,
    /// First row `edges,e_0,..,e_K`, then one row of `K` bin counts per object.
    HistogramCsv,
    /// One row of raw draws per object; rows may differ in length.
    SamplesCsv,
    /// `{"dim": r, "kind": .., "labels": [..], "matrices": [[r*r entries], ..]}`.
    MatrixJson,
    /// One vector per row.
    VectorCsv,
}

impl DataFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::QuantileCsv => "quantile_csv",
            Self::HistogramCsv => "histogram_csv",
            Self::SamplesCsv => "samples_csv",
            Self::MatrixJson => "matrix_json",
            Self::VectorCsv => "vector_csv",
        }
    }

    /// The metric space objects of this format live in.
    pub fn space(self) -> Space {
        match self {
            Self::QuantileCsv | Self::HistogramCsv | Self::SamplesCsv => Space::Wasserstein,
            Self::MatrixJson => Space::Frobenius,
            Self::VectorCsv => Space::Euclidean,
        }
    }

    /// Format written by [`export_sequence`] for `space`.
    pub fn export_format(space: Space) -> Self {
        match space {
            Space::Wasserstein => Self::QuantileCsv,
            Space::Frobenius => Self::MatrixJson,
            Space::Euclidean => Self::VectorCsv,
        }
    }
}

impl std::fmt::Display for DataFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DataFormat {
    type Err = CpdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantile_csv" => Ok(Self::QuantileCsv),
            "histogram_csv" => Ok(Self::HistogramCsv),
            "samples_csv" => Ok(Self::SamplesCsv),
            "matrix_json" => Ok(Self::MatrixJson),
            "vector_csv" => Ok(Self::VectorCsv),
            other => Err(CpdError::invalid(format!(
                "unknown format '{other}' (expected quantile_csv, histogram_csv, samples_csv, matrix_json or vector_csv)"
            ))),
        }
    }
}

/// Where a dataset lives and how to read it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    /// Optional; must agree with the format when given.
    #[serde(default)]
    pub space: Option<Space>,
    /// Files are read in order and concatenated.
    pub paths: Vec<PathBuf>,
    pub format: DataFormat,
    /// Grid size for Wasserstein formats (the output grid for histograms and
    /// samples), matrix dimension, or vector length. Checked against the file
    /// when given.
    #[serde(default)]
    pub shape: Option<usize>,
    /// Index labels; override labels found in the files.
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    /// Clip quantile values to `[lo, hi]`. Without it the observed range is used.
    #[serde(default)]
    pub support: Option<(f64, f64)>,
    /// Convert adjacency matrices to graph Laplacians `D - A`.
    #[serde(default)]
    pub laplacian: bool,
}

impl DatasetManifest {
    pub fn new(format: DataFormat, paths: Vec<PathBuf>) -> Self {
        Self { space: None, paths, format, shape: None, labels: None, support: None, laplacian: false }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| located(path, format!("invalid manifest: {e}")))
    }

    fn validate(&self) -> Result<()> {
        if self.paths.is_empty() {
            return Err(CpdError::invalid("manifest lists no input paths"));
        }
        if let Some(space) = self.space {
            if space != self.format.space() {
                return Err(CpdError::invalid(format!(
                    "space {space} does not match format {} (which holds {} objects)",
                    self.format,
                    self.format.space()
                )));
            }
        }
        if self.shape == Some(0) {
            return Err(CpdError::invalid("shape must be positive"));
        }
        if let Some((lo, hi)) = self.support {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(CpdError::invalid(format!("support [{lo}, {hi}] must be a finite interval")));
            }
            if self.format.space() != Space::Wasserstein {
                return Err(CpdError::invalid("support clipping applies to quantile formats only"));
            }
        }
        if self.laplacian && self.format != DataFormat::MatrixJson {
            return Err(CpdError::invalid("laplacian conversion applies to matrix_json only"));
        }
        Ok(())
    }
}

/// An ingested sequence with optional index labels (years, dates, ...).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub sequence: ObjectSequence,
    pub labels: Option<Vec<String>>,
}

impl Dataset {
    /// Label of the object at zero-based `index`, or its one-based position.
    pub fn label(&self, index: usize) -> String {
        match &self.labels {
            Some(labels) => labels[index].clone(),
            None => (index + 1).to_string(),
        }
    }
}

fn located(path: &Path, message: impl std::fmt::Display) -> CpdError {
    CpdError::format(format!("{}: {message}", path.display()))
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CpdError::Io { path: path.to_path_buf(), source })
}

/// One parsed file: objects plus per-row labels when the file has them.
struct Parsed {
    objects: Vec<MetricObject>,
    labels: Option<Vec<String>>,
}

/// Reads every file of `manifest` and validates the resulting sequence.
pub fn ingest(manifest: &DatasetManifest) -> Result<Dataset> {
    manifest.validate()?;
    let mut objects = Vec::new();
    let mut labels: Option<Vec<String>> = None;
    for (i, path) in manifest.paths.iter().enumerate() {
        let parsed = match manifest.format {
            DataFormat::QuantileCsv => parse_table(path, manifest, TableKind::Quantile)?,
            DataFormat::VectorCsv => parse_table(path, manifest, TableKind::Vector)?,
            DataFormat::HistogramCsv => parse_histograms(path, manifest)?,
            DataFormat::SamplesCsv => parse_samples(path, manifest)?,
            DataFormat::MatrixJson => parse_matrices(path, manifest)?,
        };
        match (i, parsed.labels) {
            (0, l) => labels = l,
            (_, Some(l)) if labels.is_some() => labels.as_mut().unwrap().extend(l),
            (_, l) if l.is_some() != labels.is_some() => {
                return Err(located(path, "some input files carry labels and others do not"));
            }
            _ => {}
        }
        objects.extend(parsed.objects);
    }
    let sequence = ObjectSequence::new(objects)?;
    if let Some(shape) = manifest.shape {
        if shape != sequence.shape() {
            return Err(CpdError::dimension(format!(
                "declared shape {shape} but parsed objects have shape {}",
                sequence.shape()
            )));
        }
    }
    let labels = manifest.labels.clone().or(labels);
    if let Some(l) = &labels {
        if l.len() != sequence.len() {
            return Err(CpdError::invalid(format!(
                "{} labels for a sequence of {} objects",
                l.len(),
                sequence.len()
            )));
        }
    }
    Ok(Dataset { sequence, labels })
}

fn csv_records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CpdError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CpdError::Io { path: path.to_path_buf(), source },
        kind => located(path, format!("{kind:?}")),
    }
}

/// Parses one numeric cell; `row` and `col` are one-based file positions.
fn cell(path: &Path, row: usize, col: usize, text: &str) -> Result<f64> {
    let v: f64 = text
        .parse()
        .map_err(|_| located(path, format!("row {row}, column {col}: '{text}' is not a number")))?;
    if !v.is_finite() {
        return Err(located(path, format!("row {row}, column {col}: non-finite value {text}")));
    }
    Ok(v)
}

fn clip(values: Vec<f64>, support: Option<(f64, f64)>) -> Vec<f64> {
    match support {
        Some((lo, hi)) => values.into_iter().map(|v| v.clamp(lo, hi)).collect(),
        None => values,
    }
}

enum TableKind {
    Quantile,
    Vector,
}

fn parse_table(path: &Path, manifest: &DatasetManifest, kind: TableKind) -> Result<Parsed> {
    let records = csv_records(path)?;
    let header = records.first().ok_or_else(|| located(path, "empty file (a header row is required)"))?;
    let has_labels = header.get(0) == Some("label");
    let offset = has_labels as usize;
    let width = header.len() - offset;
    if width == 0 {
        return Err(located(path, "header declares no value columns"));
    }
    let mut objects = Vec::with_capacity(records.len() - 1);
    let mut labels = Vec::new();
    for (r, record) in records.iter().enumerate().skip(1) {
        let row = r + 1;
        if record.len() != header.len() {
            return Err(located(
                path,
                format!("row {row}: ragged row with {} columns, header has {}", record.len(), header.len()),
            ));
        }
        if has_labels {
            labels.push(record[0].to_string());
        }
        let values = (offset..record.len())
            .map(|c| cell(path, row, c + 1, &record[c]))
            .collect::<Result<Vec<f64>>>()?;
        let object: MetricObject = match kind {
            TableKind::Quantile => QuantileObject::new(clip(values, manifest.support))
                .map_err(|e| located(path, format!("row {row}: {e}")))?
                .into(),
            TableKind::Vector => EuclideanObject::new(values)
                .map_err(|e| located(path, format!("row {row}: {e}")))?
                .into(),
        };
        objects.push(object);
    }
    Ok(Parsed { objects, labels: has_labels.then_some(labels) })
}

/// Quantile function of the distribution spreading each bin's mass uniformly
/// over the bin, evaluated on the `grid_size` mid-points.
pub fn histogram_quantiles(edges: &[f64], counts: &[f64], grid_size: usize) -> Result<Vec<f64>> {
    if edges.len() < 2 || counts.len() + 1 != edges.len() {
        return Err(CpdError::format(format!(
            "{} bin edges do not match {} counts",
            edges.len(),
            counts.len()
        )));
    }
    if let Some(i) = edges.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(CpdError::format(format!("bin edges must increase strictly (edge {})", i + 2)));
    }
    if let Some(i) = counts.iter().position(|&c| !(c >= 0.0) || !c.is_finite()) {
        return Err(CpdError::format(format!("bin {} has invalid count {}", i + 1, counts[i])));
    }
    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(CpdError::format("histogram has no mass"));
    }
    let mut cdf = Vec::with_capacity(edges.len());
    let mut acc = 0.0;
    cdf.push(0.0);
    for &c in counts {
        acc += c;
        cdf.push(acc / total);
    }
    let last = counts.len();
    let mut out = Vec::with_capacity(grid_size);
    let mut bin = 1;
    for j in 0..grid_size {
        let t = grid_point(j, grid_size);
        while bin < last && cdf[bin] < t {
            bin += 1;
        }
        // Skip empty bins at the left edge of the quantile.
        while counts[bin - 1] == 0.0 {
            bin += 1;
        }
        let (f0, f1) = (cdf[bin - 1], cdf[bin]);
        let (e0, e1) = (edges[bin - 1], edges[bin]);
        let frac = ((t - f0) / (f1 - f0)).clamp(0.0, 1.0);
        out.push((e0 + frac * (e1 - e0)).clamp(e0, e1));
    }
    Ok(out)
}

/// Empirical quantiles `x_(ceil(t N))` of raw draws on the mid-point grid.
pub fn sample_quantiles(draws: &[f64], grid_size: usize) -> Result<Vec<f64>> {
    if draws.is_empty() {
        return Err(CpdError::format("no draws"));
    }
    if let Some(i) = draws.iter().position(|v| !v.is_finite()) {
        return Err(CpdError::format(format!("non-finite draw {} at position {}", draws[i], i + 1)));
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok((0..grid_size)
        .map(|j| {
            let rank = ((grid_point(j, grid_size) * n as f64) - 1e-9).ceil() as usize;
            sorted[rank.clamp(1, n) - 1]
        })
        .collect())
}

fn wasserstein_grid(manifest: &DatasetManifest) -> usize {
    manifest.shape.unwrap_or(DEFAULT_GRID_SIZE)
}

fn parse_histograms(path: &Path, manifest: &DatasetManifest) -> Result<Parsed> {
    let records = csv_records(path)?;
    let header = records.first().ok_or_else(|| located(path, "empty file"))?;
    if header.get(0) != Some("edges") {
        return Err(located(path, "row 1: first row must be 'edges,e_0,...,e_K'"));
    }
    let edges = (1..header.len())
        .map(|c| cell(path, 1, c + 1, &header[c]))
        .collect::<Result<Vec<f64>>>()?;
    let grid_size = wasserstein_grid(manifest);
    let mut objects = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in records.iter().enumerate().skip(1) {
        let row = r + 1;
        if record.len() != edges.len() {
            return Err(located(
                path,
                format!(
                    "row {row}: ragged row with {} columns, expected a label and {} counts",
                    record.len(),
                    edges.len() - 1
                ),
            ));
        }
        labels.push(record[0].to_string());
        let counts = (1..record.len())
            .map(|c| cell(path, row, c + 1, &record[c]))
            .collect::<Result<Vec<f64>>>()?;
        let values = histogram_quantiles(&edges, &counts, grid_size)
            .map_err(|e| located(path, format!("row {row}: {e}")))?;
        objects.push(QuantileObject::new(clip(values, manifest.support))?.into());
    }
    let has_labels = labels.iter().any(|l| !l.is_empty());
    Ok(Parsed { objects, labels: has_labels.then_some(labels) })
}

fn parse_samples(path: &Path, manifest: &DatasetManifest) -> Result<Parsed> {
    let records = csv_records(path)?;
    let skip = records.first().is_some_and(|r| r.get(0) == Some("label")) as usize;
    let grid_size = wasserstein_grid(manifest);
    let mut objects = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in records.iter().enumerate().skip(skip) {
        let row = r + 1;
        if record.len() < 2 {
            return Err(located(path, format!("row {row}: expected a label followed by at least one draw")));
        }
        labels.push(record[0].to_string());
        let draws = (1..record.len())
            .map(|c| cell(path, row, c + 1, &record[c]))
            .collect::<Result<Vec<f64>>>()?;
        let values = sample_quantiles(&draws, grid_size)?;
        objects.push(QuantileObject::new(clip(values, manifest.support))?.into());
    }
    let has_labels = labels.iter().any(|l| !l.is_empty());
    Ok(Parsed { objects, labels: has_labels.then_some(labels) })
}

/// JSON container for matrix sequences.
#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    dim: usize,
    #[serde(default)]
    kind: MatrixKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    matrices: Vec<Vec<f64>>,
}

fn parse_matrices(path: &Path, manifest: &DatasetManifest) -> Result<Parsed> {
    let text = read_to_string(path)?;
    let file: MatrixFile = serde_json::from_str(&text).map_err(|e| located(path, e))?;
    let kind = if manifest.laplacian && file.kind == MatrixKind::General {
        MatrixKind::Adjacency
    } else {
        file.kind
    };
    let mut objects = Vec::with_capacity(file.matrices.len());
    for (i, entries) in file.matrices.into_iter().enumerate() {
        let at = |e: CpdError| located(path, format!("matrix {}: {e}", i + 1));
        let mut m = SymMatrixObject::new(file.dim, entries, kind).map_err(at)?;
        if manifest.laplacian && kind == MatrixKind::Adjacency {
            m = laplacian_from_adjacency(&m).map_err(at)?;
        }
        objects.push(m.into());
    }
    Ok(Parsed { objects, labels: file.labels })
}

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Pretty JSON formatter that prints floats with [`fmt_f64`].
struct FixedPrecision<'a>(serde_json::ser::PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident$(($arg:ident: $ty:ty))?),* $(,)?) => {$(
        fn $name<W: ?Sized + std::io::Write>(&mut self, w: &mut W $(, $arg: $ty)?) -> std::io::Result<()> {
            self.0.$name(w $(, $arg)?)
        }
    )*};
}

impl serde_json::ser::Formatter for FixedPrecision<'_> {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    delegate!(
        begin_array,
        end_array,
        begin_array_value(first: bool),
        end_array_value,
        begin_object,
        end_object,
        begin_object_key(first: bool),
        end_object_key,
        begin_object_value,
        end_object_value,
    );
}

/// Pretty JSON with 17-significant-digit floats; non-finite floats become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        FixedPrecision(serde_json::ser::PrettyFormatter::with_indent(b"  ")),
    );
    value
        .serialize(&mut ser)
        .map_err(|e| CpdError::invalid(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CpdError::Io { path: dir.to_path_buf(), source })?;
    }
    let mut f = fs::File::create(path).map_err(|source| CpdError::Io { path: path.to_path_buf(), source })?;
    f.write_all(contents).map_err(|source| CpdError::Io { path: path.to_path_buf(), source })
}

fn check_labels(seq: &ObjectSequence, labels: Option<&[String]>) -> Result<()> {
    match labels {
        Some(l) if l.len() != seq.len() => Err(CpdError::invalid(format!(
            "{} labels for a sequence of {} objects",
            l.len(),
            seq.len()
        ))),
        _ => Ok(()),
    }
}

/// Renders a quantile or vector sequence as CSV.
pub fn table_csv(seq: &ObjectSequence, labels: Option<&[String]>) -> Result<String> {
    check_labels(seq, labels)?;
    let prefix = match seq.space() {
        Space::Wasserstein => "q",
        Space::Euclidean => "x",
        Space::Frobenius => return Err(CpdError::invalid("matrix sequences are exported as JSON")),
    };
    let mut out = String::new();
    let mut header: Vec<String> = (1..=seq.shape()).map(|j| format!("{prefix}{j}")).collect();
    if labels.is_some() {
        header.insert(0, "label".into());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, item) in seq.items().iter().enumerate() {
        let mut row: Vec<String> = item.coords().iter().map(|&v| fmt_f64(v)).collect();
        if let Some(l) = labels {
            row.insert(0, csv_field(&l[i]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.starts_with('#') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders a matrix sequence as JSON.
pub fn matrix_json(seq: &ObjectSequence, labels: Option<&[String]>) -> Result<String> {
    check_labels(seq, labels)?;
    let mut kind = None;
    let mut matrices = Vec::with_capacity(seq.len());
    for item in seq.items() {
        let MetricObject::SymMatrix(m) = item else {
            return Err(CpdError::invalid("only matrix sequences are exported as JSON"));
        };
        if *kind.get_or_insert(m.kind()) != m.kind() {
            return Err(CpdError::invalid("cannot export matrices of mixed kinds"));
        }
        matrices.push(m.entries().to_vec());
    }
    to_json_string(&MatrixFile {
        dim: seq.shape(),
        kind: kind.unwrap_or_default(),
        labels: labels.map(<[String]>::to_vec),
        matrices,
    })
}

/// Writes `seq` in the format ingested by [`ingest`] and returns that format.
pub fn export_sequence(path: &Path, seq: &ObjectSequence, labels: Option<&[String]>) -> Result<DataFormat> {
    let format = DataFormat::export_format(seq.space());
    let text = match format {
        DataFormat::MatrixJson => matrix_json(seq, labels)?,
        _ => table_csv(seq, labels)?,
    };
    write_file(path, text.as_bytes())?;
    Ok(format)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_file(path, to_json_string(value)?.as_bytes())
}

/// `k,u,t_n,v_left,v_right,v_left_cont,v_right_cont`, one row per split.
pub fn scan_csv(report: &ChangePointReport) -> String {
    let mut out = String::from("k,u,t_n,v_left,v_right,v_left_cont,v_right_cont\n");
    for (s, &t) in report.profile.splits.iter().zip(&report.profile.t_values) {
        let cols = [s.u, t, s.v_left, s.v_right, s.v_left_cont, s.v_right_cont].map(fmt_f64);
        out.push_str(&format!("{},{}\n", s.k, cols.join(",")));
    }
    out
}

/// `replicate,value` for the calibration draws.
pub fn replicates_csv(replicates: &[f64]) -> String {
    let mut out = String::from("replicate,value\n");
    for (i, &v) in replicates.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, fmt_f64(v)));
    }
    out
}

/// `index,u,p_value,depth`; `index` counts objects before the change and `u`
/// is the change fraction within the tested interval.
pub fn change_points_csv(result: &SegmentationResult) -> String {
    let mut out = String::from("index,u,p_value,depth\n");
    for cp in &result.change_points {
        out.push_str(&format!("{},{},{},{}\n", cp.index, fmt_f64(cp.tau), fmt_f64(cp.p_value), cp.depth));
    }
    out
}

/// `param,power,mae,runs`, one row per grid value.
pub fn study_csv(study: &StudyResult) -> String {
    let mut out = String::from("param,power,mae,runs\n");
    for ((&p, &power), &mae) in study.grid.iter().zip(&study.power).zip(&study.mae) {
        out.push_str(&format!("{},{},{},{}\n", fmt_f64(p), fmt_f64(power), fmt_f64(mae), study.runs));
    }
    out
}

/// Human-readable account of a single test.
pub fn report_summary(report: &ChangePointReport, dataset: &Dataset) -> String {
    let n = report.profile.n;
    let k = report.tau_hat_index;
    let mut out = String::new();
    out.push_str(&format!(
        "{n} {} objects (shape {}), c = {}, alpha = {}\n",
        report.method.space, report.method.shape, report.method.c, report.method.alpha
    ));
    out.push_str(&format!(
        "calibration: {} with {} replicates{}, seed {}\n",
        report.method.method,
        report.method.num_replicates,
        report.method.bootstrap_m.map(|m| format!(" (m = {m})")).unwrap_or_default(),
        report.method.seed
    ));
    out.push_str(&format!("statistic:      {}\n", fmt_f64(report.stat)));
    out.push_str(&format!("critical value: {}\n", fmt_f64(report.critical_value)));
    out.push_str(&format!("p-value:        {}\n", fmt_f64(report.p_value)));
    out.push_str(&format!(
        "estimated change after object {k} of {n} (label {}), tau_hat = {}\n",
        dataset.label(k - 1),
        fmt_f64(report.tau_hat)
    ));
    if report.reject {
        out.push_str(&format!(
            "decision: reject homogeneity; change point at {} / {} (labels)\n",
            dataset.label(k - 1),
            dataset.label(k)
        ));
    } else {
        out.push_str("decision: no evidence of a change\n");
    }
    out
}

/// Human-readable account of a segmentation run.
pub fn segmentation_summary(result: &SegmentationResult, dataset: &Dataset) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} change point(s)\n", result.change_points.len()));
    for cp in &result.change_points {
        out.push_str(&format!(
            "  after object {} (label {}), depth {}, interval [{}, {}), p-value {}\n",
            cp.index,
            dataset.label(cp.index - 1),
            cp.depth,
            cp.interval.0,
            cp.interval.1,
            fmt_f64(cp.p_value)
        ));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_file(path, text.as_bytes())
}
