//! Repeated-trial behaviour of binary segmentation and the simulation studies.

mod common;

use common::*;
use frechet_cpd::scan::split_range;
use frechet_cpd::segmentation::{NodeOutcome, SegmentNode};
use frechet_cpd::{binary_segmentation, run_study, CalibrationConfig, Family, ScenarioSpec, SegmentationOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn step_with_noise(seed: u64, levels: &[(usize, f64)]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    levels
        .iter()
        .flat_map(|&(len, level)| (0..len).map(move |_| level).collect::<Vec<_>>())
        .map(|level| level + normal(&mut rng))
        .collect()
}

fn check_windows(node: &SegmentNode, c: f64) {
    if node.outcome == NodeOutcome::Split {
        let report = node.report.as_ref().unwrap();
        let (lo, hi) = split_range(node.end - node.start, c).unwrap();
        assert!((lo..=hi).contains(&report.tau_hat_index));
        assert!(report.tau_hat_index > 0 && report.tau_hat_index < node.end - node.start);
    }
    for child in &node.children {
        assert_eq!(child.depth, node.depth + 1);
        check_windows(child, c);
    }
}

#[test]
fn single_change_is_reported_once() {
    let opts = SegmentationOptions::for_cutoff(0.1);
    let mut exact = 0;
    for t in 0..100 {
        let y = step_with_noise(1000 + t, &[(100, 0.0), (200, 3.0)]);
        let cfg = CalibrationConfig::bootstrap().with_replicates(500).with_seed(t);
        let result = binary_segmentation(&scalar_seq(&y), &cfg, &opts).unwrap();
        check_windows(&result.tree, 0.1);
        if result.change_points.len() == 1 && result.change_points[0].index.abs_diff(100) <= 2 {
            exact += 1;
        }
    }
    assert!(exact >= 90, "{exact}/100");
}

#[test]
fn null_sequences_rarely_segment() {
    let opts = SegmentationOptions::for_cutoff(0.1);
    let empty = (0..100)
        .filter(|&t| {
            let y = step_with_noise(5000 + t, &[(300, 0.0)]);
            let cfg = CalibrationConfig::bootstrap().with_replicates(500).with_seed(t);
            binary_segmentation(&scalar_seq(&y), &cfg, &opts).unwrap().change_points.is_empty()
        })
        .count();
    // Root level alpha = 0.05; 88 is three binomial standard deviations below 95.
    assert!(empty >= 88, "{empty}/100");
}

#[test]
fn bonferroni_halves_levels_by_depth() {
    let y = step_with_noise(3, &[(100, 0.0), (100, 4.0), (100, 8.0)]);
    let cfg = CalibrationConfig::bootstrap().with_replicates(200).with_seed(2);
    let opts = SegmentationOptions { bonferroni: true, ..SegmentationOptions::for_cutoff(0.1) };
    let result = binary_segmentation(&scalar_seq(&y), &cfg, &opts).unwrap();
    fn walk(node: &SegmentNode) {
        assert_eq!(node.alpha, 0.05 / 2f64.powi(node.depth as i32));
        node.children.iter().for_each(walk);
    }
    walk(&result.tree);
    assert_eq!(result.change_points.len(), 2);
}

#[test]
fn power_exceeds_null_rejection_at_strongest_alternative() {
    // Asymptotic calibration keeps this affordable; the check is a smoke test
    // of the generators, not of calibration.
    let strongest = [
        (Family::WassersteinLocation, 1.0),
        (Family::WassersteinScale, 0.4),
        (Family::BaNetwork, 1.0),
        (Family::MvnLocation, 1.0),
        (Family::MvnScale, 0.75),
        (Family::MvnCorrelation, 0.3),
    ];
    let cfg = CalibrationConfig::asymptotic().with_replicates(2000).with_seed(1);
    for (family, param) in strongest {
        let specs =
            [family.null_param(), param].map(|p| ScenarioSpec::new(family, p).with_seed(7));
        let study = run_study(&specs, &cfg, 100).unwrap();
        assert!(study.power[1] - study.power[0] >= 0.5, "{family}: {:?}", study.power);
        assert!(study.mae.iter().all(|&m| (0.0..=0.8).contains(&m)));
    }
}

#[test]
fn null_study_power_is_calibrated() {
    let spec = ScenarioSpec::new(Family::WassersteinLocation, 0.0).with_seed(3);
    let cfg = CalibrationConfig::bootstrap().with_replicates(500).with_seed(4);
    let study = run_study(&[spec], &cfg, 200).unwrap();
    assert!((0.02..=0.09).contains(&study.power[0]), "{:?}", study.power);
}
