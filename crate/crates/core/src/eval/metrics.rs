//! ROC, EER, d-prime, and FRR at a FAR target.

use crate::error::{Error, Result};

/// One operating point: `far` is the fraction of imposter scores at or above
/// the threshold, `frr` the fraction of genuine scores below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

/// Full ROC over the thresholds `{-inf} U sorted unique scores U {+inf}`.
/// FAR is non-increasing and FRR non-decreasing in the threshold.
pub fn roc(genuine: &[f64], imposter: &[f64]) -> Result<Vec<RocPoint>> {
    if genuine.is_empty() || imposter.is_empty() {
        return Err(Error::Insufficient(
            "ROC needs non-empty genuine and imposter sets".into(),
        ));
    }
    let mut thresholds: Vec<f64> = genuine.iter().chain(imposter).copied().collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    thresholds.dedup();
    thresholds.insert(0, f64::NEG_INFINITY);
    thresholds.push(f64::INFINITY);

    let mut gen_sorted = genuine.to_vec();
    gen_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut imp_sorted = imposter.to_vec();
    imp_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let n_gen = genuine.len() as f64;
    let n_imp = imposter.len() as f64;
    let points = thresholds
        .into_iter()
        .map(|t| {
            let below_gen = lower_bound(&gen_sorted, t);
            let at_or_above_imp = imp_sorted.len() - lower_bound(&imp_sorted, t);
            RocPoint {
                threshold: t,
                far: at_or_above_imp as f64 / n_imp,
                frr: below_gen as f64 / n_gen,
            }
        })
        .collect();
    Ok(points)
}

/// First index whose value is `>= t` in an ascending slice.
fn lower_bound(sorted: &[f64], t: f64) -> usize {
    sorted.partition_point(|&v| v < t)
}

/// Equal error rate: where FAR crosses FRR along the threshold sweep. An
/// exact equality point is returned directly; otherwise both rates are
/// linearly interpolated between the bracketing thresholds.
pub fn eer(curve: &[RocPoint]) -> f64 {
    for (i, p) in curve.iter().enumerate() {
        let d = p.far - p.frr;
        if d == 0.0 {
            return p.far;
        }
        if d < 0.0 {
            // First sign change; interpolate against the previous point.
            let prev = curve[i - 1];
            let d0 = prev.far - prev.frr;
            let d1 = d;
            let x = d0 / (d0 - d1);
            return prev.far + x * (p.far - prev.far);
        }
    }
    // Monotone curves always cross before the +inf sentinel.
    unreachable!("FAR - FRR never changed sign on a full ROC curve")
}

/// FRR at the FAR target.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrrAtFar {
    pub frr: f64,
    pub threshold: f64,
    /// Set when the imposter count cannot resolve the target (fewer than
    /// `1 / far_target` scores): the threshold then sits just above the
    /// highest imposter score.
    pub resolution_limited: bool,
}

/// FRR at the smallest threshold whose FAR is at or below `far_target`
/// (conservative step rule, no interpolation).
pub fn frr_at_far(curve: &[RocPoint], far_target: f64, n_imposter: usize) -> FrrAtFar {
    let point = curve
        .iter()
        .find(|p| p.far <= far_target)
        .expect("FAR reaches 0 at the +inf sentinel");
    FrrAtFar {
        frr: point.frr,
        threshold: point.threshold,
        resolution_limited: (n_imposter as f64) < 1.0 / far_target,
    }
}

/// Decidability index: `(mean_g - mean_i) / sqrt((var_g + var_i) / 2)` with
/// `n - 1` variances. Errors when both variances vanish.
pub fn d_prime(genuine: &[f64], imposter: &[f64]) -> Result<f64> {
    if genuine.len() < 2 || imposter.len() < 2 {
        return Err(Error::Insufficient(
            "d-prime needs at least 2 scores per set".into(),
        ));
    }
    let (mg, vg) = mean_var(genuine);
    let (mi, vi) = mean_var(imposter);
    if vg + vi == 0.0 {
        return Err(Error::Config(
            "d-prime undefined: both score variances are zero".into(),
        ));
    }
    Ok((mg - mi) / ((vg + vi) / 2.0).sqrt())
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    /// Brute-force sweep oracle: recounts FAR/FRR at every candidate
    /// threshold by full scans, then applies the same crossing rules.
    pub(crate) fn sweep_oracle(genuine: &[f64], imposter: &[f64]) -> (f64, Vec<RocPoint>) {
        let mut thresholds: Vec<f64> = genuine.iter().chain(imposter).copied().collect();
        thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        thresholds.dedup();
        thresholds.insert(0, f64::NEG_INFINITY);
        thresholds.push(f64::INFINITY);
        let pts: Vec<RocPoint> = thresholds
            .iter()
            .map(|&t| RocPoint {
                threshold: t,
                far: imposter.iter().filter(|&&s| s >= t).count() as f64 / imposter.len() as f64,
                frr: genuine.iter().filter(|&&s| s < t).count() as f64 / genuine.len() as f64,
            })
            .collect();
        let mut eer_val = f64::NAN;
        for i in 0..pts.len() {
            let d = pts[i].far - pts[i].frr;
            if d == 0.0 {
                eer_val = pts[i].far;
                break;
            }
            if d < 0.0 {
                let d0 = pts[i - 1].far - pts[i - 1].frr;
                let x = d0 / (d0 - d);
                eer_val = pts[i - 1].far + x * (pts[i].far - pts[i - 1].far);
                break;
            }
        }
        (eer_val, pts)
    }

    #[test]
    fn separated_point_has_zero_error_region() {
        let curve = roc(&[0.9], &[0.1]).unwrap();
        // Between the two scores there is an operating point with FAR=FRR=0.
        assert!(curve.iter().any(|p| p.far == 0.0 && p.frr == 0.0));
        assert_eq!(eer(&curve), 0.0);
    }

    #[test]
    fn identical_sets_give_half_eer() {
        let scores = [0.1, 0.3, 0.5, 0.7];
        let curve = roc(&scores, &scores).unwrap();
        assert!((eer(&curve) - 0.5).abs() < 0.26, "eer = {}", eer(&curve));
        // The curve passes through the FAR = FRR = 0.5 region.
        assert!(curve
            .iter()
            .any(|p| (p.far - p.frr).abs() < 1e-12 && p.far > 0.0 && p.far < 1.0));
    }

    #[test]
    fn spec_example_crossing_matches_oracle() {
        let genuine = [0.9, 0.6, 0.4];
        let imposter = [0.5, 0.3, 0.1];
        let curve = roc(&genuine, &imposter).unwrap();
        let (oracle_eer, oracle_curve) = sweep_oracle(&genuine, &imposter);
        assert_eq!(curve.len(), oracle_curve.len());
        for (a, b) in curve.iter().zip(&oracle_curve) {
            assert_eq!(a, b);
        }
        assert_eq!(eer(&curve), oracle_eer);
        // FAR = FRR = 1/3 exactly at threshold 0.5.
        assert_eq!(eer(&curve), 1.0 / 3.0);
    }

    #[test]
    fn random_scoresets_match_oracle_exactly() {
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        for _ in 0..200 {
            let ng = rng.gen_range(2..60);
            let ni = rng.gen_range(2..60);
            let genuine: Vec<f64> = (0..ng).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let imposter: Vec<f64> = (0..ni).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let curve = roc(&genuine, &imposter).unwrap();
            let (oracle_eer, oracle_curve) = sweep_oracle(&genuine, &imposter);
            assert_eq!(curve, oracle_curve);
            assert_eq!(eer(&curve), oracle_eer);
        }
    }

    #[test]
    fn far_frr_are_monotone_in_threshold() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let genuine: Vec<f64> = (0..100).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let imposter: Vec<f64> = (0..100).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let curve = roc(&genuine, &imposter).unwrap();
        for pair in curve.windows(2) {
            assert!(pair[1].far <= pair[0].far);
            assert!(pair[1].frr >= pair[0].frr);
        }
    }

    #[test]
    fn eer_is_invariant_under_strictly_increasing_transforms() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let genuine: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let imposter: Vec<f64> = (0..70).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let base = eer(&roc(&genuine, &imposter).unwrap());
        let tg: Vec<f64> = genuine.iter().map(|s| s.tanh() * 3.0 + 1.0).collect();
        let ti: Vec<f64> = imposter.iter().map(|s| s.tanh() * 3.0 + 1.0).collect();
        let transformed = eer(&roc(&tg, &ti).unwrap());
        assert!((base - transformed).abs() < 1e-12);
    }

    #[test]
    fn frr_at_far_steps_conservatively() {
        // Perfect separation with plenty of imposters: FRR = 0 at the target.
        let genuine: Vec<f64> = (0..100).map(|i| 0.9 + (i as f64) * 1e-4).collect();
        let imposter: Vec<f64> = (0..20_000).map(|i| -0.9 + (i as f64) * 1e-5).collect();
        let curve = roc(&genuine, &imposter).unwrap();
        let r = frr_at_far(&curve, 1e-4, imposter.len());
        assert_eq!(r.frr, 0.0);
        assert!(!r.resolution_limited); // 20_000 imposters resolve 1e-4
    }

    #[test]
    fn frr_at_far_flags_small_imposter_pools() {
        let genuine = [0.9, 0.8, 0.2];
        let imposter = [0.5, 0.4, 0.3];
        let curve = roc(&genuine, &imposter).unwrap();
        let r = frr_at_far(&curve, 1e-4, imposter.len());
        assert!(r.resolution_limited);
        // Threshold sits just above the max imposter score: the next
        // candidate threshold is the smallest score above 0.5.
        assert!(r.threshold > 0.5);
        assert_eq!(r.frr, 1.0 / 3.0); // genuine 0.2 rejected at 0.8
    }

    #[test]
    fn d_prime_direct_formula_and_invariance() {
        // Means 3 and 1, both variances 1 -> exactly 2.
        let genuine = [2.0, 3.0, 4.0]; // mean 3, var 1
        let imposter = [0.0, 1.0, 2.0]; // mean 1, var 1
        assert!((d_prime(&genuine, &imposter).unwrap() - 2.0).abs() < 1e-12);

        // Identical distributions -> 0.
        assert_eq!(d_prime(&genuine, &genuine).unwrap(), 0.0);

        // Common positive affine transform leaves d-prime unchanged.
        let tg: Vec<f64> = genuine.iter().map(|x| 2.5 * x - 7.0).collect();
        let ti: Vec<f64> = imposter.iter().map(|x| 2.5 * x - 7.0).collect();
        assert!((d_prime(&tg, &ti).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn d_prime_rejects_twin_zero_variances() {
        assert!(d_prime(&[1.0, 1.0], &[0.0, 0.0]).is_err());
    }
}
