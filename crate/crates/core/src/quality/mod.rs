//! Spatial precision/accuracy of fixation data and kernel-density summaries.
//!
//! Accuracy is the offset of the mean gaze point from the target; precision
//! is the root-mean-square of sample-to-sample dispersion (RMS-S2S). Angular
//! distance is approximated as Euclidean distance in the dva plane, valid at
//! these small angles.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A fixation interval with a known target; no NaN samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationSegment<S: Scalar> {
    pub gaze: Vec<(S, S)>,
    pub target: (S, S),
    pub rate_hz: u32,
}

impl<S: Scalar> FixationSegment<S> {
    pub fn new(gaze: Vec<(S, S)>, target: (S, S), rate_hz: u32) -> Result<Self> {
        if gaze.len() < 2 {
            return Err(Error::Insufficient(
                "fixation segment needs at least 2 samples".into(),
            ));
        }
        if gaze
            .iter()
            .any(|&(x, y)| !x.is_finite() || !y.is_finite())
            || !target.0.is_finite()
            || !target.1.is_finite()
        {
            return Err(Error::NonFinite("fixation segment".into()));
        }
        Ok(FixationSegment {
            gaze,
            target,
            rate_hz,
        })
    }
}

/// Euclidean distance between the mean gaze point and the target, dva.
pub fn spatial_accuracy<S: Scalar>(seg: &FixationSegment<S>) -> f64 {
    let n = seg.gaze.len() as f64;
    let (sx, sy) = seg
        .gaze
        .iter()
        .fold((0.0f64, 0.0f64), |(ax, ay), &(x, y)| {
            (ax + x.to_f64_lossy(), ay + y.to_f64_lossy())
        });
    let dx = sx / n - seg.target.0.to_f64_lossy();
    let dy = sy / n - seg.target.1.to_f64_lossy();
    (dx * dx + dy * dy).sqrt()
}

/// Root-mean-square of successive sample-to-sample distances, dva.
pub fn spatial_precision<S: Scalar>(seg: &FixationSegment<S>) -> f64 {
    let steps = seg.gaze.len() - 1;
    let sum: f64 = seg
        .gaze
        .windows(2)
        .map(|p| {
            let dx = (p[1].0 - p[0].0).to_f64_lossy();
            let dy = (p[1].1 - p[0].1).to_f64_lossy();
            dx * dx + dy * dy
        })
        .sum();
    (sum / steps as f64).sqrt()
}

/// Gaussian-kernel density estimate on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityCurve {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(g, d)| (g[1] - g[0]) * (d[0] + d[1]) / 2.0)
            .sum()
    }
}

/// Silverman's bandwidth: `0.9 * min(sigma, IQR / 1.34) * n^(-1/5)`.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 1.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    let sigma = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> f64 {
        let idx = p * (sorted.len() - 1) as f64;
        let lo = idx.floor() as usize;
        let hi = idx.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (idx - lo as f64)
    };
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sigma.min(iqr / 1.34) } else { sigma };
    (0.9 * spread * n.powf(-0.2)).max(1e-10)
}

/// Evaluates the Gaussian KDE of `values` on `grid`; `bandwidth` of `None`
/// uses Silverman's rule.
pub fn kde(values: &[f64], bandwidth: Option<f64>, grid: &[f64]) -> Result<DensityCurve> {
    if values.is_empty() {
        return Err(Error::Insufficient("KDE of an empty sample".into()));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::Config(format!("bandwidth must be positive, got {h}"))),
        None => silverman_bandwidth(values),
    };
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let density = grid
        .iter()
        .map(|&x| {
            values
                .iter()
                .map(|&v| {
                    let u = (x - v) / h;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    Ok(DensityCurve {
        grid: grid.to_vec(),
        density,
        bandwidth: h,
    })
}

/// Uniform grid spanning the data range extended by `pad_bandwidths`.
pub fn density_grid(values: &[f64], bandwidth: f64, pad_bandwidths: f64, points: usize) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - pad_bandwidths * bandwidth;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + pad_bandwidths * bandwidth;
    let n = points.max(2);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn gauss<R: Rng>(rng: &mut R) -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn constant_offset_gives_that_accuracy() {
        let gaze = vec![(3.0, 4.0); 10];
        let seg = FixationSegment::new(gaze, (2.0, 4.0), 250).unwrap();
        assert!((spatial_accuracy(&seg) - 1.0).abs() < 1e-12);
        let on_target = FixationSegment::new(vec![(2.0, 4.0); 5], (2.0, 4.0), 250).unwrap();
        assert_eq!(spatial_accuracy(&on_target), 0.0);
    }

    #[test]
    fn symmetric_noise_accuracy_converges_to_zero() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let gaze: Vec<(f64, f64)> = (0..100_000)
            .map(|_| (1.0 + 0.3 * gauss(&mut rng), -2.0 + 0.3 * gauss(&mut rng)))
            .collect();
        let seg = FixationSegment::new(gaze, (1.0, -2.0), 250).unwrap();
        assert!(spatial_accuracy(&seg) < 0.01);
    }

    #[test]
    fn alternating_steps_have_exact_precision() {
        let gaze: Vec<(f64, f64)> = (0..20)
            .map(|i| (if i % 2 == 0 { 0.1 } else { -0.1 }, 1.0))
            .collect();
        let seg = FixationSegment::new(gaze, (0.0, 1.0), 250).unwrap();
        assert!((spatial_precision(&seg) - 0.2).abs() < 1e-12);
        let constant = FixationSegment::new(vec![(0.5, 0.5); 8], (0.0, 0.0), 250).unwrap();
        assert_eq!(spatial_precision(&constant), 0.0);
    }

    #[test]
    fn iid_gaussian_precision_is_two_sigma() {
        let sigma = 0.25;
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let gaze: Vec<(f64, f64)> = (0..100_000)
            .map(|_| (sigma * gauss(&mut rng), sigma * gauss(&mut rng)))
            .collect();
        let seg = FixationSegment::new(gaze, (0.0, 0.0), 250).unwrap();
        let p = spatial_precision(&seg);
        assert!(
            (p - 2.0 * sigma).abs() / (2.0 * sigma) < 0.02,
            "precision {p} vs {}",
            2.0 * sigma
        );
    }

    #[test]
    fn translation_invariance_of_both_metrics() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let gaze: Vec<(f64, f64)> = (0..500)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let seg = FixationSegment::new(gaze.clone(), (0.2, -0.4), 250).unwrap();
        let shifted: Vec<(f64, f64)> = gaze.iter().map(|&(x, y)| (x + 5.0, y - 3.0)).collect();
        let seg2 = FixationSegment::new(shifted, (5.2, -3.4), 250).unwrap();
        assert!((spatial_accuracy(&seg) - spatial_accuracy(&seg2)).abs() < 1e-9);
        assert!((spatial_precision(&seg) - spatial_precision(&seg2)).abs() < 1e-9);
    }

    #[test]
    fn precision_ignores_sample_order_reversal() {
        let gaze: Vec<(f64, f64)> = (0..50)
            .map(|i| ((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let seg = FixationSegment::new(gaze.clone(), (0.0, 0.0), 250).unwrap();
        let mut rev = gaze;
        rev.reverse();
        let seg_rev = FixationSegment::new(rev, (0.0, 0.0), 250).unwrap();
        assert_eq!(spatial_precision(&seg), spatial_precision(&seg_rev));
    }

    #[test]
    fn single_value_kde_peaks_at_that_value() {
        let grid: Vec<f64> = (0..101).map(|i| -5.0 + 0.1 * i as f64).collect();
        let curve = kde(&[1.5], Some(0.5), &grid).unwrap();
        let peak = curve
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!((curve.grid[peak] - 1.5).abs() < 0.1 + 1e-12);
    }

    #[test]
    fn symmetric_values_give_symmetric_density() {
        let values = [-2.0, -1.0, -0.25, 0.25, 1.0, 2.0];
        let grid: Vec<f64> = (0..81).map(|i| -4.0 + 0.1 * i as f64).collect();
        let curve = kde(&values, Some(0.4), &grid).unwrap();
        let n = curve.density.len();
        for i in 0..n / 2 {
            assert!((curve.density[i] - curve.density[n - 1 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn standard_normal_sample_matches_analytic_density() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let values: Vec<f64> = (0..100_000).map(|_| gauss(&mut rng)).collect();
        let h = silverman_bandwidth(&values);
        let grid: Vec<f64> = (0..101).map(|i| -4.0 + 0.08 * i as f64).collect();
        let curve = kde(&values, Some(h), &grid).unwrap();
        let mut max_dev = 0.0f64;
        for (&x, &d) in curve.grid.iter().zip(&curve.density) {
            let analytic = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
            max_dev = max_dev.max((d - analytic).abs());
        }
        assert!(max_dev < 0.01, "max deviation {max_dev}");
    }

    #[test]
    fn kde_integrates_to_one_on_a_padded_grid() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let values: Vec<f64> = (0..2_000).map(|_| gauss(&mut rng) * 1.7 + 0.3).collect();
        let h = silverman_bandwidth(&values);
        let grid = density_grid(&values, h, 5.0, 512);
        let curve = kde(&values, Some(h), &grid).unwrap();
        let integral = curve.integral();
        assert!((integral - 1.0).abs() <= 0.02, "integral {integral}");
        assert!(curve.density.iter().all(|&d| d >= 0.0));
    }
}
