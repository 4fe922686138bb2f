//! Calibration of the scan test and the resulting change-point report.
//!
//! Under the null hypothesis `{n T_n(u)}` converges to `G^2(u)` where
//! `G(u) = B(u) / sqrt(u(1-u))` for a Brownian bridge `B`. Critical values come
//! either from Monte-Carlo paths of `G` on the split grid (asymptotic) or from
//! the resampling scheme below (bootstrap):
//!
//! 1. draw `m` objects with replacement from `Y_1..Y_n`;
//! 2. recompute the full scan on the resample with the same cut-off;
//! 3. record `max_k m T*_m(k/m)`.
//!
//! Both produce a replicate set; the critical value is its type-1 empirical
//! `(1 - alpha)` quantile and the p-value is `(1 + #{rep >= stat}) / (R + 1)`.

use std::sync::atomic::{AtomicBool, Ordering};

use log::warn;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CpdError, Result};
use crate::metric_spaces::{ObjectSequence, Space};
use crate::rng::{stream, Domain};
use crate::scan::{check_non_degenerate, scan, scan_flat, split_grid, ScanProfile};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

const MIN_REPLICATES: usize = 100;
const WARN_REPLICATES: usize = 500;
pub const DEFAULT_BOOTSTRAP_REPLICATES: usize = 1000;
pub const DEFAULT_BRIDGE_REPLICATES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMethod {
    Asymptotic,
    Bootstrap,
}

impl std::fmt::Display for CalibrationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Asymptotic => "asymptotic",
            Self::Bootstrap => "bootstrap",
        })
    }
}

impl std::str::FromStr for CalibrationMethod {
    type Err = CpdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(Self::Asymptotic),
            "bootstrap" => Ok(Self::Bootstrap),
            other => Err(CpdError::invalid(format!("unknown calibration method `{other}`"))),
        }
    }
}

/// Bootstrap resample size `m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapSize {
    #[default]
    SameAsN,
    Fixed(usize),
}

impl BootstrapSize {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            BootstrapSize::SameAsN => n,
            BootstrapSize::Fixed(m) => m,
        }
    }
}

/// Test calibration settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Cut-off: splits are restricted to `[c, 1 - c]`.
    pub c: f64,
    pub alpha: f64,
    pub method: CalibrationMethod,
    pub num_replicates: usize,
    pub bootstrap_m: BootstrapSize,
    pub seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self::bootstrap()
    }
}

static LOW_REPLICATE_WARNED: AtomicBool = AtomicBool::new(false);

impl CalibrationConfig {
    /// Bootstrap calibration with `B = 1000`, `m = n`, `c = 0.1`, `alpha = 0.05`.
    pub fn bootstrap() -> Self {
        Self {
            c: 0.1,
            alpha: 0.05,
            method: CalibrationMethod::Bootstrap,
            num_replicates: DEFAULT_BOOTSTRAP_REPLICATES,
            bootstrap_m: BootstrapSize::SameAsN,
            seed: 0,
        }
    }

    /// Brownian-bridge calibration with `R = 10^5` paths.
    pub fn asymptotic() -> Self {
        Self {
            method: CalibrationMethod::Asymptotic,
            num_replicates: DEFAULT_BRIDGE_REPLICATES,
            ..Self::bootstrap()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.num_replicates = replicates;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c < 0.5) {
            return Err(CpdError::invalid(format!("c must lie in (0, 1/2), got {}", self.c)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CpdError::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.num_replicates < MIN_REPLICATES {
            return Err(CpdError::invalid(format!(
                "at least {MIN_REPLICATES} replicates are required, got {}",
                self.num_replicates
            )));
        }
        // Warn once per process; studies validate the same config per run.
        if self.num_replicates < WARN_REPLICATES && !LOW_REPLICATE_WARNED.swap(true, Ordering::Relaxed) {
            warn!(
                "only {} replicates; critical values below {WARN_REPLICATES} replicates are noisy",
                self.num_replicates
            );
        }
        if self.bootstrap_m == BootstrapSize::Fixed(0) {
            return Err(CpdError::invalid("bootstrap resample size m must be positive"));
        }
        Ok(())
    }

    /// Smallest admissible bootstrap resample size, `ceil(4/c)`.
    pub fn min_bootstrap_m(&self) -> usize {
        (4.0 / self.c - 1e-9).ceil() as usize
    }
}

fn check_bridge_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(CpdError::invalid("bridge grid is empty"));
    }
    if let Some(u) = grid.iter().find(|u| !(**u > 0.0 && **u < 1.0)) {
        return Err(CpdError::invalid(format!("bridge grid point {u} outside (0, 1)")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CpdError::invalid("bridge grid must be strictly increasing"));
    }
    Ok(())
}

/// One path of the standardized bridge `G(u) = B(u)/sqrt(u(1-u))` on `grid`.
///
/// `W` is built from independent Gaussian increments between consecutive grid
/// points and up to 1; then `B(u) = W(u) - u W(1)`. The values are exact in law
/// at the grid points.
pub fn bridge_path<R: Rng + ?Sized>(grid: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    check_bridge_grid(grid)?;
    Ok(standardized_bridge(grid, rng))
}

fn standardized_bridge<R: Rng + ?Sized>(grid: &[f64], rng: &mut R) -> Vec<f64> {
    let mut w = Vec::with_capacity(grid.len());
    let mut prev = 0.0;
    let mut level = 0.0;
    for &u in grid {
        let z: f64 = rng.sample(StandardNormal);
        level += (u - prev).sqrt() * z;
        w.push(level);
        prev = u;
    }
    let z: f64 = rng.sample(StandardNormal);
    let w1 = level + (1.0 - prev).sqrt() * z;
    grid.iter().zip(w).map(|(&u, wu)| (wu - u * w1) / (u * (1.0 - u)).sqrt()).collect()
}

/// `max_u G(u)^2` over `grid` for one simulated path.
pub fn bridge_sup_replicate<R: Rng + ?Sized>(grid: &[f64], rng: &mut R) -> Result<f64> {
    check_bridge_grid(grid)?;
    Ok(sup_square(&standardized_bridge(grid, rng)))
}

fn sup_square(path: &[f64]) -> f64 {
    path.iter().map(|g| g * g).fold(f64::NEG_INFINITY, f64::max)
}

/// Type-1 empirical quantile: the order statistic at `ceil(level * R)`.
pub fn empirical_quantile(values: &[f64], level: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty replicate set");
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let rank = ((level * sorted.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Add-one corrected p-value of `stat` against a replicate set.
pub fn p_value(stat: f64, replicates: &[f64]) -> f64 {
    let exceed = replicates.iter().filter(|&&r| r >= stat).count();
    (1 + exceed) as f64 / (replicates.len() + 1) as f64
}

/// Critical value together with the replicates it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub method: CalibrationMethod,
    pub critical_value: f64,
    pub replicates: Vec<f64>,
}

/// Monte-Carlo calibration from bridge paths on the split grid of length `n`.
pub fn asymptotic_calibration(n: usize, config: &CalibrationConfig) -> Result<Calibration> {
    config.validate()?;
    let grid = split_grid(n, config.c)?;
    let replicates: Vec<f64> = (0..config.num_replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(config.seed, Domain::Bridge, b);
            sup_square(&standardized_bridge(&grid, &mut rng))
        })
        .collect();
    Ok(Calibration {
        method: CalibrationMethod::Asymptotic,
        critical_value: empirical_quantile(&replicates, 1.0 - config.alpha),
        replicates,
    })
}

/// `q_{1-alpha}` of `sup G^2` on the grid `{k/n : ceil(nc) <= k <= n - ceil(nc)}`.
pub fn asymptotic_critical_value(n: usize, config: &CalibrationConfig) -> Result<f64> {
    asymptotic_calibration(n, config).map(|c| c.critical_value)
}

/// Bootstrap calibration of the scan statistic.
///
/// A resample whose variance-of-variance estimate is degenerate is redrawn
/// once; if the redraw is degenerate too the replicate scores `+inf`, which can
/// only make the test more conservative.
pub fn bootstrap_calibration(seq: &ObjectSequence, config: &CalibrationConfig) -> Result<Calibration> {
    config.validate()?;
    check_non_degenerate(seq)?;
    let n = seq.len();
    let m = config.bootstrap_m.resolve(n);
    let min_m = config.min_bootstrap_m();
    if m < min_m {
        return Err(CpdError::precondition(format!(
            "bootstrap resample size m = {m} is below 4/c = {min_m}"
        )));
    }
    let flat = seq.flat();
    let c = config.c;
    let replicates = (0..config.num_replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(config.seed, Domain::Bootstrap, b);
            let mut indices = vec![0usize; m];
            for _attempt in 0..2 {
                indices.iter_mut().for_each(|i| *i = rng.random_range(0..n));
                match scan_flat(&flat.gather(&indices), c, false) {
                    Ok(pass) => return Ok(pass.stat),
                    Err(CpdError::Degenerate(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
            warn!("bootstrap replicate {b} degenerate after retry; scored as +inf");
            Ok(f64::INFINITY)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Calibration {
        method: CalibrationMethod::Bootstrap,
        critical_value: empirical_quantile(&replicates, 1.0 - config.alpha),
        replicates,
    })
}

/// Bootstrap `q_{1-alpha}` and the full replicate list.
pub fn bootstrap_critical_value(
    seq: &ObjectSequence,
    config: &CalibrationConfig,
) -> Result<(f64, Vec<f64>)> {
    bootstrap_calibration(seq, config).map(|c| (c.critical_value, c.replicates))
}

/// Calibration metadata echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodInfo {
    pub method: CalibrationMethod,
    pub c: f64,
    pub alpha: f64,
    pub num_replicates: usize,
    /// Resolved bootstrap resample size; absent for asymptotic calibration.
    pub bootstrap_m: Option<usize>,
    pub seed: u64,
    pub space: Space,
    pub shape: usize,
    /// Numerical quadrature used by the metric, when any.
    pub quadrature: Option<String>,
}

/// Outcome of the scan test on one sequence.
#[derive(Clone, Debug, Serialize)]
pub struct ChangePointReport {
    pub schema_version: u32,
    pub library_version: String,
    /// `sup_u n T_n(u)`.
    pub stat: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub tau_hat: f64,
    /// Number of objects before the estimated change.
    pub tau_hat_index: usize,
    pub method: MethodInfo,
    pub profile: ScanProfile,
    #[serde(skip)]
    pub replicates: Vec<f64>,
}

/// Runs the scan test: rejects when `sup n T_n(u) > q_{1-alpha}`.
pub fn run_test(seq: &ObjectSequence, config: &CalibrationConfig) -> Result<ChangePointReport> {
    config.validate()?;
    let profile = scan(seq, config.c)?;
    let calibration = match config.method {
        CalibrationMethod::Asymptotic => asymptotic_calibration(seq.len(), config)?,
        CalibrationMethod::Bootstrap => bootstrap_calibration(seq, config)?,
    };
    let stat = profile.stat;
    let quadrature = (seq.space() == Space::Wasserstein)
        .then(|| format!("midpoint rule on M = {} quantile grid points", seq.shape()));
    Ok(ChangePointReport {
        schema_version: REPORT_SCHEMA_VERSION,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        stat,
        critical_value: calibration.critical_value,
        p_value: p_value(stat, &calibration.replicates),
        reject: stat > calibration.critical_value,
        tau_hat: profile.tau_hat,
        tau_hat_index: profile.tau_hat_index,
        method: MethodInfo {
            method: config.method,
            c: config.c,
            alpha: config.alpha,
            num_replicates: config.num_replicates,
            bootstrap_m: (config.method == CalibrationMethod::Bootstrap)
                .then(|| config.bootstrap_m.resolve(seq.len())),
            seed: config.seed,
            space: seq.space(),
            shape: seq.shape(),
            quadrature,
        },
        profile,
        replicates: calibration.replicates,
    })
}
