//! Fréchet-variance scan function and change-point estimate.
//!
//! For a split after the `k`-th object (`u = k/n`) the scan function is
//!
//! ```text
//! T_n(u) = u(1-u)/sigma^2 * { (V_left - V_right)^2
//!                             + (V^C_left - V_left + V^C_right - V_right)^2 }
//! ```
//!
//! where `V_left`, `V_right` are the segment Fréchet variances and the
//! contaminated variances `V^C` plug in the Fréchet mean of the complementary
//! segment. The statistic is `max_k n T_n(k/n)` over
//! `ceil(nc) <= k <= n - ceil(nc)`.
//!
//! Segment means and variances are maintained with Welford updates in the
//! flat coordinates of the space, one pass from each end, so a scan costs
//! `O(n p)` for `p` coordinates. In a flat space the contaminated excess of
//! either segment equals `d^2(mu_left, mu_right)`. [`segment_stats`] evaluates
//! the same quantities directly from distances and serves as the reference
//! route.

use serde::Serialize;

use crate::error::{CpdError, Result};
use crate::metric_spaces::{
    frechet_mean, frechet_variance, squared_distance_coords, FlatSequence, MetricObject,
    ObjectSequence, Space,
};

/// Slack absorbing representation error when forming `ceil(n c)`.
const CEIL_SLACK: f64 = 1e-9;
const DEGENERACY_TOL: f64 = 1e-12;

/// Segment statistics at one split.
#[derive(Clone, Debug, Serialize)]
pub struct SegmentStats {
    /// Number of objects in the first segment.
    pub k: usize,
    pub u: f64,
    pub v_left: f64,
    pub v_right: f64,
    pub v_left_cont: f64,
    pub v_right_cont: f64,
    #[serde(skip)]
    pub mu_left: MetricObject,
    #[serde(skip)]
    pub mu_right: MetricObject,
}

/// Pooled Fréchet mean, variance and variance-of-variance estimate.
#[derive(Clone, Debug, Serialize)]
pub struct PooledMoments {
    pub mean: MetricObject,
    pub v_hat: f64,
    pub sigma_hat_sq: f64,
}

/// The scan function evaluated on the admissible split grid.
#[derive(Clone, Debug, Serialize)]
pub struct ScanProfile {
    pub n: usize,
    pub c: f64,
    pub space: Space,
    pub ks: Vec<usize>,
    pub t_values: Vec<f64>,
    pub splits: Vec<SegmentStats>,
    pub sigma_hat_sq: f64,
    /// `max_k n T_n(k/n)`.
    pub stat: f64,
    /// Smallest maximising split divided by `n`.
    pub tau_hat: f64,
    pub tau_hat_index: usize,
    pub pooled_mean: MetricObject,
    pub pooled_var: f64,
}

/// Admissible split range `(ceil(nc), n - ceil(nc))`, inclusive.
///
/// Requires `0 < c < 1/2` and `n c >= 2`, so each segment holds at least two
/// objects at every split.
pub fn split_range(n: usize, c: f64) -> Result<(usize, usize)> {
    if !(c > 0.0 && c < 0.5) {
        return Err(CpdError::invalid(format!("cut-off c must lie in (0, 1/2), got {c}")));
    }
    let nc = n as f64 * c;
    if nc < 2.0 - CEIL_SLACK {
        return Err(CpdError::precondition(format!(
            "n*c = {n}*{c} = {nc} < 2; every segment needs at least 2 objects"
        )));
    }
    let lo = (nc - CEIL_SLACK).ceil() as usize;
    Ok((lo, n - lo))
}

/// Split fractions `k/n` of the admissible grid.
pub fn split_grid(n: usize, c: f64) -> Result<Vec<f64>> {
    let (lo, hi) = split_range(n, c)?;
    Ok((lo..=hi).map(|k| k as f64 / n as f64).collect())
}

/// Sum whose value does not depend on the order of `buf` (sorted, compensated).
fn ordered_sum(buf: &mut [f64]) -> f64 {
    buf.sort_unstable_by(f64::total_cmp);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in buf.iter() {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

struct FlatMoments {
    mean: Vec<f64>,
    v_hat: f64,
    sigma_hat_sq: f64,
}

fn flat_moments(flat: &FlatSequence) -> FlatMoments {
    let (n, p) = (flat.n, flat.p);
    let mut buf = vec![0.0; n];
    let mut mean = vec![0.0; p];
    for (j, m) in mean.iter_mut().enumerate() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = flat.data[i * p + j];
        }
        *m = ordered_sum(&mut buf) / n as f64;
    }
    let mut d2: Vec<f64> =
        (0..n).map(|i| squared_distance_coords(flat.row(i), &mean, flat.weight)).collect();
    let mut d4: Vec<f64> = d2.iter().map(|d| d * d).collect();
    let v_hat = ordered_sum(&mut d2) / n as f64;
    let m4 = ordered_sum(&mut d4) / n as f64;
    FlatMoments { mean, v_hat, sigma_hat_sq: (m4 - v_hat * v_hat).max(0.0) }
}

fn check_degenerate(m: &FlatMoments) -> Result<()> {
    if m.v_hat == 0.0 || m.sigma_hat_sq <= DEGENERACY_TOL.max(DEGENERACY_TOL * m.v_hat * m.v_hat) {
        return Err(CpdError::Degenerate(format!(
            "pooled Fréchet variance {} with variance-of-variance estimate {}",
            m.v_hat, m.sigma_hat_sq
        )));
    }
    Ok(())
}

/// Pooled Fréchet mean `mu_hat`, variance `V_hat = (1/n) sum d^2(Y_i, mu_hat)`
/// and `sigma_hat^2 = (1/n) sum d^4(Y_i, mu_hat) - V_hat^2`, clamped at 0.
///
/// The sums are order-independent, so a permuted sequence yields bit-identical
/// moments.
pub fn pooled_moments(seq: &ObjectSequence) -> PooledMoments {
    let m = flat_moments(&seq.flat());
    PooledMoments { mean: seq.items()[0].with_coords(m.mean), v_hat: m.v_hat, sigma_hat_sq: m.sigma_hat_sq }
}

/// Fails with [`CpdError::Degenerate`] when the scan function is undefined.
pub fn check_non_degenerate(seq: &ObjectSequence) -> Result<()> {
    check_degenerate(&flat_moments(&seq.flat()))
}

/// Segment statistics at split `k`, computed directly from distances.
pub fn segment_stats(seq: &ObjectSequence, k: usize) -> Result<SegmentStats> {
    let n = seq.len();
    if k == 0 || k >= n {
        return Err(CpdError::invalid(format!("split index {k} outside 1..={}", n - 1)));
    }
    let (left, right) = seq.items().split_at(k);
    let wl = vec![1.0 / k as f64; k];
    let wr = vec![1.0 / (n - k) as f64; n - k];
    let mu_left = frechet_mean(left, &wl)?;
    let mu_right = frechet_mean(right, &wr)?;
    Ok(SegmentStats {
        k,
        u: k as f64 / n as f64,
        v_left: frechet_variance(left, &wl, &mu_left)?,
        v_right: frechet_variance(right, &wr, &mu_right)?,
        v_left_cont: frechet_variance(left, &wl, &mu_right)?,
        v_right_cont: frechet_variance(right, &wr, &mu_left)?,
        mu_left,
        mu_right,
    })
}

/// Output of one pass of the scan over a flat sequence.
pub(crate) struct ScanPass {
    pub lo: usize,
    pub t_values: Vec<f64>,
    pub v_left: Vec<f64>,
    pub v_right: Vec<f64>,
    pub excess: Vec<f64>,
    pub left_means: Vec<f64>,
    pub right_means: Vec<f64>,
    pub moments_mean: Vec<f64>,
    pub v_hat: f64,
    pub sigma_hat_sq: f64,
    pub stat: f64,
    pub argmax: usize,
}

/// Runs the scan on flat coordinates. When `keep_means` is false the segment
/// means are not retained, which is all the bootstrap needs.
pub(crate) fn scan_flat(flat: &FlatSequence, c: f64, keep_means: bool) -> Result<ScanPass> {
    let (n, p, w) = (flat.n, flat.p, flat.weight);
    let (lo, hi) = split_range(n, c)?;
    let moments = flat_moments(flat);
    check_degenerate(&moments)?;

    let slots = hi - lo + 1;
    let mut left_means = vec![0.0; slots * p];
    let mut v_left = vec![0.0; slots];

    let mut mean = vec![0.0; p];
    let mut m2 = 0.0;
    for i in 0..hi {
        let count = (i + 1) as f64;
        for (m, &y) in mean.iter_mut().zip(flat.row(i)) {
            let delta = y - *m;
            *m += delta / count;
            m2 += delta * (y - *m);
        }
        let k = i + 1;
        if k >= lo {
            let s = k - lo;
            left_means[s * p..(s + 1) * p].copy_from_slice(&mean);
            v_left[s] = w * m2 / count;
        }
    }

    let mut v_right = vec![0.0; slots];
    let mut excess = vec![0.0; slots];
    let mut right_means = if keep_means { vec![0.0; slots * p] } else { Vec::new() };
    mean.iter_mut().for_each(|m| *m = 0.0);
    m2 = 0.0;
    for i in (lo..n).rev() {
        let count = (n - i) as f64;
        for (m, &y) in mean.iter_mut().zip(flat.row(i)) {
            let delta = y - *m;
            *m += delta / count;
            m2 += delta * (y - *m);
        }
        let k = i;
        if k <= hi {
            let s = k - lo;
            v_right[s] = w * m2 / count;
            excess[s] = squared_distance_coords(&left_means[s * p..(s + 1) * p], &mean, w);
            if keep_means {
                right_means[s * p..(s + 1) * p].copy_from_slice(&mean);
            }
        }
    }

    let nf = n as f64;
    let mut t_values = Vec::with_capacity(slots);
    let mut best = f64::NEG_INFINITY;
    let mut argmax = lo;
    for s in 0..slots {
        let k = lo + s;
        let u = k as f64 / nf;
        let one_minus_u = (n - k) as f64 / nf;
        let var_term = v_left[s] - v_right[s];
        let mean_term = 2.0 * excess[s];
        let t = u * one_minus_u / moments.sigma_hat_sq * (var_term * var_term + mean_term * mean_term);
        if t > best {
            best = t;
            argmax = k;
        }
        t_values.push(t);
    }

    Ok(ScanPass {
        lo,
        t_values,
        v_left,
        v_right,
        excess,
        left_means: if keep_means { left_means } else { Vec::new() },
        right_means,
        moments_mean: moments.mean,
        v_hat: moments.v_hat,
        sigma_hat_sq: moments.sigma_hat_sq,
        stat: nf * best,
        argmax,
    })
}

/// Evaluates the scan function on the split grid of `seq` with cut-off `c`.
///
/// Errors: `c` outside `(0, 1/2)`, `n c < 2`, or a degenerate sequence
/// (`V_hat = 0` or `sigma_hat^2 <= max(1e-12, 1e-12 V_hat^2)`).
pub fn scan(seq: &ObjectSequence, c: f64) -> Result<ScanProfile> {
    let flat = seq.flat();
    let pass = scan_flat(&flat, c, true)?;
    let template = &seq.items()[0];
    let n = seq.len();
    let p = flat.p;
    let splits = (0..pass.t_values.len())
        .map(|s| {
            let k = pass.lo + s;
            SegmentStats {
                k,
                u: k as f64 / n as f64,
                v_left: pass.v_left[s],
                v_right: pass.v_right[s],
                v_left_cont: pass.v_left[s] + pass.excess[s],
                v_right_cont: pass.v_right[s] + pass.excess[s],
                mu_left: template.with_coords(pass.left_means[s * p..(s + 1) * p].to_vec()),
                mu_right: template.with_coords(pass.right_means[s * p..(s + 1) * p].to_vec()),
            }
        })
        .collect::<Vec<_>>();
    Ok(ScanProfile {
        n,
        c,
        space: seq.space(),
        ks: splits.iter().map(|s| s.k).collect(),
        t_values: pass.t_values,
        splits,
        sigma_hat_sq: pass.sigma_hat_sq,
        stat: pass.stat,
        tau_hat: pass.argmax as f64 / n as f64,
        tau_hat_index: pass.argmax,
        pooled_mean: template.with_coords(pass.moments_mean),
        pooled_var: pass.v_hat,
    })
}

/// The test statistic `sup_u n T_n(u)`, recomputed from the profile's values.
pub fn scan_statistic(profile: &ScanProfile) -> f64 {
    let max = profile.t_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let stat = profile.n as f64 * max;
    debug_assert!(stat == profile.stat || profile.t_values.is_empty());
    stat
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_spaces::EuclideanObject;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_seq(values: &[f64]) -> ObjectSequence {
        ObjectSequence::new(
            values.iter().map(|&v| EuclideanObject::new(vec![v]).unwrap().into()).collect(),
        )
        .unwrap()
    }

    /// Straight-line evaluation of the scan function for scalar data.
    fn scalar_t(y: &[f64], k: usize, sigma2: f64) -> f64 {
        let n = y.len();
        let (a, b) = y.split_at(k);
        let ma = a.iter().sum::<f64>() / a.len() as f64;
        let mb = b.iter().sum::<f64>() / b.len() as f64;
        let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / a.len() as f64;
        let vb = b.iter().map(|x| (x - mb).powi(2)).sum::<f64>() / b.len() as f64;
        let ca = a.iter().map(|x| (x - mb).powi(2)).sum::<f64>() / a.len() as f64;
        let cb = b.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / b.len() as f64;
        let u = k as f64 / n as f64;
        u * (1.0 - u) / sigma2 * ((va - vb).powi(2) + (ca - va + cb - vb).powi(2))
    }

    fn scalar_sigma2(y: &[f64]) -> f64 {
        let n = y.len() as f64;
        let m = y.iter().sum::<f64>() / n;
        let v = y.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        y.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n - v * v
    }

    #[test]
    fn split_range_bounds() {
        assert_eq!(split_range(300, 0.1).unwrap(), (30, 270));
        assert_eq!(split_range(12, 0.25).unwrap(), (3, 9));
        assert_eq!(split_range(20, 0.1).unwrap(), (2, 18));
        assert!(matches!(split_range(15, 0.1), Err(CpdError::Precondition(_))));
        assert!(matches!(split_range(100, 0.5), Err(CpdError::InvalidInput(_))));
        assert!(matches!(split_range(100, 0.0), Err(CpdError::InvalidInput(_))));
    }

    #[test]
    fn pooled_moments_small_cases() {
        let constant = scalar_seq(&[2.0; 10]);
        let m = pooled_moments(&constant);
        assert_eq!((m.v_hat, m.sigma_hat_sq), (0.0, 0.0));

        let alt: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let m = pooled_moments(&scalar_seq(&alt));
        assert_eq!(m.mean.coords(), &[0.0]);
        assert_eq!(m.v_hat, 1.0);
        assert_eq!(m.sigma_hat_sq, 0.0);
    }

    #[test]
    fn pooled_sigma_of_standard_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: Vec<f64> = (0..100_000).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let m = pooled_moments(&scalar_seq(&y));
        assert!((m.sigma_hat_sq - 2.0).abs() < 0.1, "{}", m.sigma_hat_sq);
    }

    #[test]
    fn segment_stats_step() {
        let s = segment_stats(&scalar_seq(&[0.0, 0.0, 5.0, 5.0]), 2).unwrap();
        assert_eq!((s.v_left, s.v_right, s.v_left_cont, s.v_right_cont), (0.0, 0.0, 25.0, 25.0));
        assert!(segment_stats(&scalar_seq(&[0.0, 1.0]), 0).is_err());
        assert!(segment_stats(&scalar_seq(&[0.0, 1.0]), 2).is_err());
    }

    #[test]
    fn equal_segment_means_give_uncontaminated_variances() {
        let s = segment_stats(&scalar_seq(&[-1.0, 1.0, -2.0, 2.0]), 2).unwrap();
        assert_eq!(s.mu_left, s.mu_right);
        assert_eq!(s.v_left_cont, s.v_left);
        assert_eq!(s.v_right_cont, s.v_right);
    }

    #[test]
    fn segment_stats_matches_scalar_formulae() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y: Vec<f64> = (0..20).map(|_| rng.random_range(-3.0..3.0)).collect();
        let s = segment_stats(&scalar_seq(&y), 7).unwrap();
        let (a, b) = y.split_at(7);
        let ma = a.iter().sum::<f64>() / 7.0;
        let mb = b.iter().sum::<f64>() / 13.0;
        let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / 7.0;
        let vb = b.iter().map(|x| (x - mb).powi(2)).sum::<f64>() / 13.0;
        assert!((s.v_left - va).abs() < 1e-12);
        assert!((s.v_right - vb).abs() < 1e-12);
        assert!((s.v_left_cont - va - (ma - mb).powi(2)).abs() < 1e-12);
        assert!((s.v_right_cont - vb - (ma - mb).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn step_sequence_locates_change() {
        let mut y = vec![0.0; 100];
        y.extend(vec![5.0; 200]);
        let profile = scan(&scalar_seq(&y), 0.1).unwrap();
        assert_eq!(profile.tau_hat_index, 100);
        assert_eq!(profile.tau_hat, 100.0 / 300.0);
        assert!(profile.stat > 100.0);
        assert_eq!(scan_statistic(&profile), profile.stat);
    }

    #[test]
    fn constant_sequence_is_degenerate() {
        assert!(matches!(scan(&scalar_seq(&[1.0; 40]), 0.1), Err(CpdError::Degenerate(_))));
    }

    #[test]
    fn scan_matches_straight_line_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let y: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..2.0)).collect();
        let profile = scan(&scalar_seq(&y), 0.25).unwrap();
        let sigma2 = scalar_sigma2(&y);
        assert!((profile.sigma_hat_sq - sigma2).abs() < 1e-12);
        assert_eq!(profile.ks, (3..=9).collect::<Vec<_>>());
        for (&k, &t) in profile.ks.iter().zip(&profile.t_values) {
            assert!((t - scalar_t(&y, k, sigma2)).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn zero_profile_statistic() {
        let mut y = vec![0.0; 100];
        y.extend(vec![5.0; 200]);
        let mut profile = scan(&scalar_seq(&y), 0.1).unwrap();
        profile.t_values.iter_mut().for_each(|t| *t = 0.0);
        profile.stat = 0.0;
        assert_eq!(scan_statistic(&profile), 0.0);
    }
}
