//! Object spaces, distances and closed-form weighted Fréchet means.
//!
//! All three shipped spaces are flat in their stored coordinates:
//!
//! * [`QuantileObject`]: a univariate distribution represented by its quantile
//!   function on the mid-point grid `t_j = (j - 1/2) / M`. The 2-Wasserstein
//!   distance is the L2 distance between quantile functions, approximated by
//!   the midpoint rule, so `d^2 = (1/M) * sum_j (G1(t_j) - G2(t_j))^2`.
//! * [`SymMatrixObject`]: symmetric `r x r` matrices (covariances, adjacency
//!   matrices, graph Laplacians) under the Frobenius metric.
//! * [`EuclideanObject`]: vectors in `R^d` under the Euclidean norm.
//!
//! Because every space is a convex subset of a Euclidean space (up to the
//! constant factor `1/M` for quantile grids), weighted Fréchet means are
//! coordinate-wise weighted averages and Fréchet variances reduce to weighted
//! sums of squared coordinate differences.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{CpdError, Result};

/// Default number of grid points for quantile-function objects.
pub const DEFAULT_GRID_SIZE: usize = 100;

const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Tag identifying the object space of a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Wasserstein,
    Frobenius,
    Euclidean,
}

impl Space {
    pub fn as_str(self) -> &'static str {
        match self {
            Space::Wasserstein => "wasserstein",
            Space::Frobenius => "frobenius",
            Space::Euclidean => "euclidean",
        }
    }
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Space {
    type Err = CpdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wasserstein" => Ok(Space::Wasserstein),
            "frobenius" => Ok(Space::Frobenius),
            "euclidean" => Ok(Space::Euclidean),
            other => Err(CpdError::invalid(format!("unknown space `{other}`"))),
        }
    }
}

/// Mid-point `t_j = (j + 1/2) / M` for zero-based `j`.
pub fn grid_point(j: usize, grid_size: usize) -> f64 {
    (j as f64 + 0.5) / grid_size as f64
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(j) => Err(CpdError::format(format!(
            "{what}: non-finite value {} at position {}",
            values[j],
            j + 1
        ))),
        None => Ok(()),
    }
}

/// Quantile function of a univariate distribution on the mid-point grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileObject {
    values: Vec<f64>,
}

impl QuantileObject {
    /// Validates that `values` is a non-empty, finite, non-decreasing grid.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(CpdError::format("quantile grid must be non-empty"));
        }
        check_finite(&values, "quantile grid")?;
        if let Some(j) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(CpdError::format(format!(
                "quantile grid decreases between positions {} and {} ({} > {})",
                j + 1,
                j + 2,
                values[j],
                values[j + 1]
            )));
        }
        Ok(Self { values })
    }

    /// Evaluates a quantile function at the `grid_size` mid-points.
    pub fn from_quantile_fn(grid_size: usize, quantile: impl Fn(f64) -> f64) -> Result<Self> {
        if grid_size == 0 {
            return Err(CpdError::invalid("grid size must be positive"));
        }
        Self::new((0..grid_size).map(|j| quantile(grid_point(j, grid_size))).collect())
    }

    /// Quantile grid of `N(mean, sd^2)`.
    pub fn gaussian(mean: f64, sd: f64, grid_size: usize) -> Result<Self> {
        let normal = Normal::new(mean, sd)
            .map_err(|e| CpdError::invalid(format!("gaussian({mean}, {sd}): {e}")))?;
        Self::from_quantile_fn(grid_size, |t| normal.inverse_cdf(t))
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Checks `|values[j]| <= bound` for a user-declared support bound.
    pub fn check_bound(&self, bound: f64) -> Result<()> {
        match self.values.iter().position(|v| v.abs() > bound) {
            Some(j) => Err(CpdError::format(format!(
                "quantile value {} at position {} exceeds support bound {bound}",
                self.values[j],
                j + 1
            ))),
            None => Ok(()),
        }
    }
}

/// Structural flavour of a symmetric matrix; selects extra invariants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    #[default]
    General,
    /// Zero diagonal, non-negative off-diagonal entries.
    Adjacency,
    /// Rows sum to zero, non-positive off-diagonal entries.
    Laplacian,
}

const LAPLACIAN_ROW_TOL: f64 = 1e-9;

/// Dense, row-major symmetric matrix under the Frobenius metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrixObject {
    dim: usize,
    kind: MatrixKind,
    entries: Vec<f64>,
}

impl SymMatrixObject {
    /// Validates symmetry (exact), finiteness and the invariants of `kind`.
    /// Error messages use one-based `(row, column)` positions.
    pub fn new(dim: usize, entries: Vec<f64>, kind: MatrixKind) -> Result<Self> {
        if dim == 0 {
            return Err(CpdError::format("matrix dimension must be positive"));
        }
        if entries.len() != dim * dim {
            return Err(CpdError::dimension(format!(
                "matrix of dim {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in 0..dim {
                let v = entries[i * dim + j];
                if !v.is_finite() {
                    return Err(CpdError::format(format!(
                        "non-finite matrix entry {v} at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if j < i && v != entries[j * dim + i] {
                    return Err(CpdError::format(format!(
                        "matrix not symmetric at ({}, {}): {} != {}",
                        i + 1,
                        j + 1,
                        v,
                        entries[j * dim + i]
                    )));
                }
            }
        }
        let m = Self { dim, kind, entries };
        m.check_kind()?;
        Ok(m)
    }

    fn check_kind(&self) -> Result<()> {
        let r = self.dim;
        match self.kind {
            MatrixKind::General => Ok(()),
            MatrixKind::Adjacency => {
                for i in 0..r {
                    for j in 0..r {
                        let v = self.get(i, j);
                        if i == j && v != 0.0 {
                            return Err(CpdError::format(format!(
                                "adjacency diagonal entry ({}, {}) is {v}, expected 0",
                                i + 1,
                                j + 1
                            )));
                        }
                        if i != j && v < 0.0 {
                            return Err(CpdError::format(format!(
                                "negative adjacency weight {v} at ({}, {})",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
                Ok(())
            }
            MatrixKind::Laplacian => {
                for i in 0..r {
                    let row = &self.entries[i * r..(i + 1) * r];
                    let scale = row.iter().map(|v| v.abs()).fold(1.0, f64::max);
                    let sum: f64 = row.iter().sum();
                    if sum.abs() > LAPLACIAN_ROW_TOL * scale {
                        return Err(CpdError::format(format!(
                            "laplacian row {} sums to {sum}, expected 0",
                            i + 1
                        )));
                    }
                    if let Some(j) = (0..r).find(|&j| j != i && row[j] > 0.0) {
                        return Err(CpdError::format(format!(
                            "positive laplacian off-diagonal {} at ({}, {})",
                            row[j],
                            i + 1,
                            j + 1
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, kind: MatrixKind::General, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }
}

/// Point in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanObject {
    coords: Vec<f64>,
}

impl EuclideanObject {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(CpdError::format("vector must be non-empty"));
        }
        check_finite(&coords, "vector")?;
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Checks every coordinate lies in `[-bound, bound]`.
    pub fn check_box(&self, bound: f64) -> Result<()> {
        match self.coords.iter().position(|v| v.abs() > bound) {
            Some(j) => Err(CpdError::format(format!(
                "coordinate {} = {} outside [-{bound}, {bound}]",
                j + 1,
                self.coords[j]
            ))),
            None => Ok(()),
        }
    }
}

/// A value in one of the supported object spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum MetricObject {
    #[serde(rename = "wasserstein")]
    Quantile(QuantileObject),
    #[serde(rename = "frobenius")]
    SymMatrix(SymMatrixObject),
    Euclidean(EuclideanObject),
}

impl From<QuantileObject> for MetricObject {
    fn from(q: QuantileObject) -> Self {
        MetricObject::Quantile(q)
    }
}

impl From<SymMatrixObject> for MetricObject {
    fn from(m: SymMatrixObject) -> Self {
        MetricObject::SymMatrix(m)
    }
}

impl From<EuclideanObject> for MetricObject {
    fn from(e: EuclideanObject) -> Self {
        MetricObject::Euclidean(e)
    }
}

impl MetricObject {
    pub fn space(&self) -> Space {
        match self {
            MetricObject::Quantile(_) => Space::Wasserstein,
            MetricObject::SymMatrix(_) => Space::Frobenius,
            MetricObject::Euclidean(_) => Space::Euclidean,
        }
    }

    /// Shape parameter: grid size `M`, matrix dimension `r`, or vector length `d`.
    pub fn shape(&self) -> usize {
        match self {
            MetricObject::Quantile(q) => q.grid_size(),
            MetricObject::SymMatrix(m) => m.dim(),
            MetricObject::Euclidean(e) => e.dim(),
        }
    }

    /// Flat coordinates in which the space is Euclidean up to [`Self::metric_weight`].
    pub fn coords(&self) -> &[f64] {
        match self {
            MetricObject::Quantile(q) => &q.values,
            MetricObject::SymMatrix(m) => &m.entries,
            MetricObject::Euclidean(e) => &e.coords,
        }
    }

    /// Factor `w` with `d^2(a, b) = w * |coords(a) - coords(b)|^2`.
    pub fn metric_weight(&self) -> f64 {
        match self {
            MetricObject::Quantile(q) => 1.0 / q.grid_size() as f64,
            _ => 1.0,
        }
    }

    /// Rebuilds an object of the same space and shape from coordinates that are
    /// known to lie in the space (convex combinations or positive rescalings of
    /// valid objects).
    pub(crate) fn with_coords(&self, coords: Vec<f64>) -> MetricObject {
        debug_assert_eq!(coords.len(), self.coords().len());
        match self {
            MetricObject::Quantile(_) => MetricObject::Quantile(QuantileObject { values: coords }),
            MetricObject::SymMatrix(m) => MetricObject::SymMatrix(SymMatrixObject {
                dim: m.dim,
                kind: m.kind,
                entries: coords,
            }),
            MetricObject::Euclidean(_) => MetricObject::Euclidean(EuclideanObject { coords }),
        }
    }

    /// Multiplies every coordinate by `factor > 0`, which scales all distances
    /// by the same factor.
    pub fn scaled(&self, factor: f64) -> Result<MetricObject> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(CpdError::invalid(format!("scale factor must be positive, got {factor}")));
        }
        Ok(self.with_coords(self.coords().iter().map(|v| v * factor).collect()))
    }

    fn check_compatible(&self, other: &MetricObject) -> Result<()> {
        if self.space() != other.space() || self.shape() != other.shape() {
            return Err(CpdError::dimension(format!(
                "cannot compare {} object of shape {} with {} object of shape {}",
                self.space(),
                self.shape(),
                other.space(),
                other.shape()
            )));
        }
        Ok(())
    }
}

/// Squared distance between flat coordinate vectors.
#[inline]
pub(crate) fn squared_distance_coords(a: &[f64], b: &[f64], weight: f64) -> f64 {
    weight * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

/// Squared distance `d^2(a, b)`.
pub fn squared_distance(a: &MetricObject, b: &MetricObject) -> Result<f64> {
    a.check_compatible(b)?;
    Ok(squared_distance_coords(a.coords(), b.coords(), a.metric_weight()))
}

/// Distance `d(a, b)` in the shared space of `a` and `b`.
pub fn distance(a: &MetricObject, b: &MetricObject) -> Result<f64> {
    squared_distance(a, b).map(f64::sqrt)
}

fn check_weights(items: &[MetricObject], weights: &[f64]) -> Result<()> {
    if items.is_empty() {
        return Err(CpdError::invalid("Fréchet mean of an empty list"));
    }
    if weights.len() != items.len() {
        return Err(CpdError::invalid(format!(
            "{} weights supplied for {} objects",
            weights.len(),
            items.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(CpdError::invalid(format!("weights must be non-negative and finite, got {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(CpdError::invalid(format!("weights sum to {total}, expected 1")));
    }
    let first = &items[0];
    for item in &items[1..] {
        first.check_compatible(item)?;
    }
    Ok(())
}

/// Weighted Fréchet mean, the minimiser of `sum_i w_i d^2(Y_i, omega)`.
///
/// Closed form in every shipped space: the coordinate-wise weighted average.
/// Objects carrying zero weight do not contribute, so degenerate weights
/// return the selected object exactly.
pub fn frechet_mean(items: &[MetricObject], weights: &[f64]) -> Result<MetricObject> {
    check_weights(items, weights)?;
    let p = items[0].coords().len();
    let mut acc = vec![0.0; p];
    for (item, &w) in items.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (a, v) in acc.iter_mut().zip(item.coords()) {
            *a += w * v;
        }
    }
    // Rounded multiplication and addition are monotone, so averaging
    // non-decreasing quantile grids stays non-decreasing without correction.
    Ok(items[0].with_coords(acc))
}

/// Weighted Fréchet variance `sum_i w_i d^2(Y_i, mean)` around a given mean.
pub fn frechet_variance(items: &[MetricObject], weights: &[f64], mean: &MetricObject) -> Result<f64> {
    check_weights(items, weights)?;
    items[0].check_compatible(mean)?;
    let mut total = 0.0;
    for (item, &w) in items.iter().zip(weights) {
        total += w * squared_distance(item, mean)?;
    }
    Ok(total)
}

/// Graph Laplacian `L = D - A` of a weighted adjacency matrix.
pub fn laplacian_from_adjacency(adj: &SymMatrixObject) -> Result<SymMatrixObject> {
    let checked = SymMatrixObject::new(adj.dim, adj.entries.clone(), MatrixKind::Adjacency)?;
    let r = checked.dim;
    let mut entries = vec![0.0; r * r];
    for i in 0..r {
        let mut degree = 0.0;
        for j in 0..r {
            let a = checked.get(i, j);
            degree += a;
            if i != j {
                entries[i * r + j] = -a;
            }
        }
        entries[i * r + i] = degree;
    }
    Ok(SymMatrixObject { dim: r, kind: MatrixKind::Laplacian, entries })
}

/// An ordered, homogeneous, immutable sequence `Y_1, ..., Y_n` with `n >= 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObjectSequence {
    space: Space,
    shape: usize,
    items: Vec<MetricObject>,
}

impl ObjectSequence {
    pub fn new(items: Vec<MetricObject>) -> Result<Self> {
        if items.len() < 2 {
            return Err(CpdError::precondition(format!(
                "a sequence needs at least 2 objects, got {}",
                items.len()
            )));
        }
        let space = items[0].space();
        let shape = items[0].shape();
        for (i, item) in items.iter().enumerate() {
            if item.space() != space || item.shape() != shape {
                return Err(CpdError::dimension(format!(
                    "object {} is a {} object of shape {}, sequence is {} with shape {}",
                    i + 1,
                    item.space(),
                    item.shape(),
                    space,
                    shape
                )));
            }
        }
        Ok(Self { space, shape, items })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn shape(&self) -> usize {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[MetricObject] {
        &self.items
    }

    pub fn get(&self, i: usize) -> Option<&MetricObject> {
        self.items.get(i)
    }

    /// Contiguous subsequence `start..end` (zero-based, end exclusive).
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.len() {
            return Err(CpdError::invalid(format!(
                "slice {start}..{end} out of bounds for length {}",
                self.len()
            )));
        }
        Self::new(self.items[start..end].to_vec())
    }

    pub fn reversed(&self) -> Self {
        let mut items = self.items.clone();
        items.reverse();
        Self { items, ..*self }
    }

    /// Every object multiplied by `factor`, so every distance scales by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let items = self.items.iter().map(|o| o.scaled(factor)).collect::<Result<Vec<_>>>()?;
        Ok(Self { items, ..*self })
    }

    pub(crate) fn flat(&self) -> FlatSequence {
        let p = self.items[0].coords().len();
        let mut data = Vec::with_capacity(self.len() * p);
        for item in &self.items {
            data.extend_from_slice(item.coords());
        }
        FlatSequence { n: self.len(), p, weight: self.items[0].metric_weight(), data }
    }
}

/// Row-major `n x p` coordinate matrix of a sequence, with the metric weight.
#[derive(Clone, Debug)]
pub(crate) struct FlatSequence {
    pub n: usize,
    pub p: usize,
    pub weight: f64,
    pub data: Vec<f64>,
}

impl FlatSequence {
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    /// Gathers rows by index (with repetition) into a new flat sequence.
    pub fn gather(&self, indices: &[usize]) -> FlatSequence {
        let mut data = Vec::with_capacity(indices.len() * self.p);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FlatSequence { n: indices.len(), p: self.p, weight: self.weight, data }
    }
}
