//! One-cycle learning-rate schedule: cosine ramp to the peak, cosine anneal
//! to the floor, continuous at the peak.

use super::TrainConfig;
use std::f64::consts::PI;

/// Learning rate at `global_step` (one step per batch). The ramp covers
/// `[0, peak_epoch * steps_per_epoch]`, the anneal the rest; step
/// `epochs * steps_per_epoch` returns exactly `lr_final`.
pub fn lr_at(global_step: usize, cfg: &TrainConfig, steps_per_epoch: usize) -> f64 {
    let peak_step = cfg.peak_epoch * steps_per_epoch;
    let total_step = cfg.epochs * steps_per_epoch;
    debug_assert!(global_step <= total_step);

    if global_step <= peak_step {
        let t = if peak_step == 0 {
            1.0
        } else {
            global_step as f64 / peak_step as f64
        };
        cfg.lr_initial + (cfg.lr_peak - cfg.lr_initial) * (1.0 - (PI * t).cos()) / 2.0
    } else {
        let t = (global_step - peak_step) as f64 / (total_step - peak_step) as f64;
        cfg.lr_final + (cfg.lr_peak - cfg.lr_final) * (1.0 + (PI * t).cos()) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> TrainConfig {
        TrainConfig::default()
    }

    #[test]
    fn anchors_match_the_published_schedule() {
        let c = cfg();
        let spe = 50;
        assert!((lr_at(0, &c, spe) - 1e-4).abs() < 1e-18);
        assert!((lr_at(30 * spe, &c, spe) - 1e-2).abs() < 1e-12);
        assert!((lr_at(100 * spe, &c, spe) - 1e-7).abs() < 1e-18);
    }

    #[test]
    fn continuous_at_the_peak_and_maximal_there() {
        let c = cfg();
        let spe = 17;
        let peak = 30 * spe;
        let before = lr_at(peak - 1, &c, spe);
        let at = lr_at(peak, &c, spe);
        let after = lr_at(peak + 1, &c, spe);
        assert!(at >= before && at >= after);
        assert!((at - before).abs() < 1e-4);
        assert!((at - after).abs() < 1e-4);
        for step in 0..=100 * spe {
            assert!(lr_at(step, &c, spe) <= at + 1e-15);
        }
    }

    #[test]
    fn schedule_is_continuous_everywhere() {
        let c = cfg();
        let spe = 10;
        let mut prev = lr_at(0, &c, spe);
        for step in 1..=100 * spe {
            let lr = lr_at(step, &c, spe);
            assert!((lr - prev).abs() < 1e-4, "jump at step {step}");
            prev = lr;
        }
    }
}
