//! Binary segmentation for multiple change points.
//!
//! The full sequence is tested; on rejection the sequence is cut after the
//! estimated split (`Y_1..Y_k | Y_{k+1}..Y_n`) and both halves are processed
//! recursively. A branch stops when its test does not reject, when the
//! interval is shorter than the minimum length, or when the interval is
//! degenerate (e.g. constant).

use serde::Serialize;

use crate::error::{CpdError, Result};
use crate::inference::{run_test, BootstrapSize, CalibrationConfig, CalibrationMethod, ChangePointReport};
use crate::metric_spaces::ObjectSequence;
use crate::rng::{derive_seed, Domain};

/// `ceil(2/c) + 2`, the smallest interval on which the scan is defined with
/// room to spare.
pub fn default_min_len(c: f64) -> usize {
    (2.0 / c - 1e-9).ceil() as usize + 2
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentationOptions {
    /// Intervals shorter than this are not tested.
    pub min_len: usize,
    /// Test at depth `d` with level `alpha / 2^d`.
    pub bonferroni: bool,
}

impl SegmentationOptions {
    pub fn for_cutoff(c: f64) -> Self {
        Self { min_len: default_min_len(c), bonferroni: false }
    }
}

/// An accepted change point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChangePoint {
    /// Global number of objects before the change (1-based index of the last
    /// object of the earlier regime).
    pub index: usize,
    /// Estimated change fraction within the tested interval.
    pub tau: f64,
    pub p_value: f64,
    pub depth: usize,
    pub stat: f64,
    /// Tested interval, zero-based and end-exclusive.
    pub interval: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeOutcome {
    Split,
    NoChange,
    TooShort,
    Degenerate,
}

/// One tested (or skipped) interval of the recursion.
#[derive(Clone, Debug, Serialize)]
pub struct SegmentNode {
    pub start: usize,
    pub end: usize,
    pub depth: usize,
    pub alpha: f64,
    pub outcome: NodeOutcome,
    pub report: Option<ChangePointReport>,
    pub children: Vec<SegmentNode>,
}

impl SegmentNode {
    fn collect(&self, out: &mut Vec<ChangePoint>) {
        if let (NodeOutcome::Split, Some(report)) = (self.outcome, &self.report) {
            out.push(ChangePoint {
                index: self.start + report.tau_hat_index,
                tau: report.tau_hat,
                p_value: report.p_value,
                depth: self.depth,
                stat: report.stat,
                interval: (self.start, self.end),
            });
        }
        for child in &self.children {
            child.collect(out);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SegmentationResult {
    /// Sorted by global index.
    pub change_points: Vec<ChangePoint>,
    pub tree: SegmentNode,
}

struct Runner<'a> {
    seq: &'a ObjectSequence,
    config: &'a CalibrationConfig,
    options: &'a SegmentationOptions,
    min_len: usize,
}

impl Runner<'_> {
    fn node(&self, start: usize, end: usize, depth: usize) -> Result<SegmentNode> {
        let alpha = if self.options.bonferroni {
            self.config.alpha / 2f64.powi(depth as i32)
        } else {
            self.config.alpha
        };
        let mut node = SegmentNode {
            start,
            end,
            depth,
            alpha,
            outcome: NodeOutcome::TooShort,
            report: None,
            children: Vec::new(),
        };
        if end - start < self.min_len {
            return Ok(node);
        }
        let sub = self.seq.slice(start, end)?;
        let config = CalibrationConfig {
            alpha,
            seed: derive_seed(self.config.seed, Domain::Segment, ((start as u64) << 32) | end as u64),
            ..self.config.clone()
        };
        let report = match run_test(&sub, &config) {
            Ok(report) => report,
            Err(CpdError::Degenerate(_)) => {
                node.outcome = NodeOutcome::Degenerate;
                return Ok(node);
            }
            Err(e) => return Err(e),
        };
        if report.reject && report.p_value <= alpha {
            let split = start + report.tau_hat_index;
            let (left, right) = rayon::join(
                || self.node(start, split, depth + 1),
                || self.node(split, end, depth + 1),
            );
            node.children = vec![left?, right?];
            node.outcome = NodeOutcome::Split;
        } else {
            node.outcome = NodeOutcome::NoChange;
        }
        node.report = Some(report);
        Ok(node)
    }
}

/// Recursive binary segmentation of `seq`.
///
/// A change point is accepted when its test rejects and its p-value is at
/// most the node's level. With bootstrap calibration and `m = n`, intervals
/// shorter than `4/c` are not tested because the resample would be too small.
pub fn binary_segmentation(
    seq: &ObjectSequence,
    config: &CalibrationConfig,
    options: &SegmentationOptions,
) -> Result<SegmentationResult> {
    config.validate()?;
    let required = default_min_len(config.c);
    if options.min_len < required {
        return Err(CpdError::invalid(format!(
            "min_len {} is below ceil(2/c) + 2 = {required}",
            options.min_len
        )));
    }
    let min_len = match (config.method, config.bootstrap_m) {
        (CalibrationMethod::Bootstrap, BootstrapSize::SameAsN) => {
            options.min_len.max(config.min_bootstrap_m())
        }
        _ => options.min_len,
    };
    let runner = Runner { seq, config, options, min_len };
    let tree = runner.node(0, seq.len(), 0)?;
    let mut change_points = Vec::new();
    tree.collect(&mut change_points);
    change_points.sort_by_key(|cp| cp.index);
    Ok(SegmentationResult { change_points, tree })
}
