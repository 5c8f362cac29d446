//! Flat `key = value` run configuration with a validated key registry.
//!
//! Precedence: registry defaults < config file < `--set` overrides <
//! `GAZE_EMB_SEED` (seed only). Unknown keys and malformed values are
//! configuration errors.

use anyhow::{anyhow, bail, Context, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    U64,
    Usize,
    F64,
    Bool,
    Str,
}

struct KeySpec {
    name: &'static str,
    kind: Kind,
    default: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: &'static str) -> KeySpec {
    KeySpec {
        name,
        kind,
        default,
    }
}

/// Every recognized key with its type and default. Paper-stated values are
/// the defaults wherever the method pins them.
const REGISTRY: &[KeySpec] = &[
    key("seed", Kind::U64, "7"),
    // Input locations; empty means "under --out".
    key("paths.recordings", Kind::Str, ""),
    key("paths.windows", Kind::Str, ""),
    key("paths.checkpoints", Kind::Str, ""),
    key("paths.report", Kind::Str, ""),
    key("paths.fixations", Kind::Str, ""),
    key("paths.quality", Kind::Str, ""),
    // Synthetic data generation.
    key("synth.subjects", Kind::Usize, "8"),
    key("synth.duration_s", Kind::F64, "50"),
    key("synth.rate_hz", Kind::U64, "250"),
    key("synth.tasks", Kind::Str, "RAN"),
    key("synth.rounds", Kind::U64, "1"),
    key("synth.sessions", Kind::U64, "2"),
    // Preprocessing.
    key("prep.dt_ms", Kind::F64, "4"),
    key("prep.sg_window", Kind::Usize, "7"),
    key("prep.sg_order", Kind::Usize, "2"),
    key("prep.clamp", Kind::F64, "1000"),
    key("prep.window_s", Kind::F64, "5"),
    key("prep.segment_windows", Kind::Usize, "9"),
    key("prep.decimate_factor", Kind::Usize, "4"),
    key("prep.channels", Kind::Str, "auto"),
    key("prep.bounds", Kind::Str, "none"),
    key("prep.x_min", Kind::F64, "-23.3"),
    key("prep.x_max", Kind::F64, "23.3"),
    key("prep.y_min", Kind::F64, "-18.5"),
    key("prep.y_max", Kind::F64, "11.7"),
    // Network.
    key("net.layers", Kind::Usize, "8"),
    key("net.growth", Kind::Usize, "32"),
    key("net.kernel", Kind::Usize, "3"),
    key("net.dilations", Kind::Str, "auto"),
    key("net.embed_dim", Kind::Usize, "128"),
    key("net.norm", Kind::Bool, "true"),
    // Training.
    key("train.epochs", Kind::Usize, "100"),
    key("train.batch_size", Kind::Usize, "64"),
    key("train.classes_per_batch", Kind::Usize, "8"),
    key("train.samples_per_class", Kind::Usize, "8"),
    key("train.lr_initial", Kind::F64, "1e-4"),
    key("train.lr_peak", Kind::F64, "1e-2"),
    key("train.lr_final", Kind::F64, "1e-7"),
    key("train.peak_epoch", Kind::Usize, "30"),
    key("train.folds", Kind::Usize, "4"),
    key("train.held_out", Kind::Str, ""),
    key("train.adam_beta1", Kind::F64, "0.9"),
    key("train.adam_beta2", Kind::F64, "0.999"),
    key("train.adam_eps", Kind::F64, "1e-8"),
    // Multi-similarity loss.
    key("loss.alpha", Kind::F64, "2"),
    key("loss.beta", Kind::F64, "50"),
    key("loss.base", Kind::F64, "0.5"),
    key("loss.epsilon", Kind::F64, "0.1"),
    // Evaluation protocol.
    key("eval.term", Kind::Str, "short"),
    key("eval.task", Kind::Str, "RAN"),
    key("eval.enroll_round", Kind::U64, "1"),
    key("eval.enroll_session", Kind::U64, "1"),
    key("eval.probe_round", Kind::U64, "1"),
    key("eval.probe_session", Kind::U64, "2"),
    key("eval.far_target", Kind::F64, "1e-4"),
    key("eval.subjects", Kind::Str, "held_out"),
    // Quality metrics.
    key("quality.bandwidth", Kind::Str, "auto"),
    key("quality.grid_points", Kind::Usize, "256"),
];

/// Validated flat configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
    out: PathBuf,
}

impl RunConfig {
    /// Builds the configuration from defaults, an optional file, `--set`
    /// overrides, and the seed environment variable.
    pub fn load(file: Option<&Path>, sets: &[String], out: &Path) -> Result<RunConfig> {
        let mut values: BTreeMap<&'static str, String> = REGISTRY
            .iter()
            .map(|k| (k.name, k.default.to_string()))
            .collect();

        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    anyhow!("{}:{}: expected `key = value`", path.display(), lineno + 1)
                })?;
                set_value(&mut values, k.trim(), v.trim())?;
            }
        }
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{s}`"))?;
            set_value(&mut values, k.trim(), v.trim())?;
        }
        if let Ok(seed) = std::env::var("GAZE_EMB_SEED") {
            set_value(&mut values, "seed", seed.trim())?;
        }

        Ok(RunConfig {
            values,
            out: out.to_path_buf(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    /// Input path override, or the default location under `--out`.
    pub fn path_or_default(&self, path_key: &str, default_subdir: &str) -> PathBuf {
        let v = self.str(path_key);
        if v.is_empty() {
            self.out.join(default_subdir)
        } else {
            PathBuf::from(v)
        }
    }

    pub fn str(&self, name: &str) -> &str {
        self.values
            .get(spec(name).name)
            .expect("registry-backed key")
    }

    pub fn u64(&self, name: &str) -> u64 {
        self.str(name).parse().expect("validated at load")
    }

    pub fn usize(&self, name: &str) -> usize {
        self.str(name).parse().expect("validated at load")
    }

    pub fn f64(&self, name: &str) -> f64 {
        self.str(name).parse().expect("validated at load")
    }

    pub fn bool(&self, name: &str) -> bool {
        self.str(name).parse().expect("validated at load")
    }

    /// Comma-separated list; empty string means an empty list.
    pub fn list(&self, name: &str) -> Vec<String> {
        let v = self.str(name);
        if v.is_empty() {
            Vec::new()
        } else {
            v.split(',').map(|s| s.trim().to_string()).collect()
        }
    }
}

fn spec(name: &str) -> &'static KeySpec {
    REGISTRY
        .iter()
        .find(|k| k.name == name)
        .unwrap_or_else(|| panic!("unregistered config key `{name}` requested"))
}

fn set_value(
    values: &mut BTreeMap<&'static str, String>,
    name: &str,
    value: &str,
) -> Result<()> {
    let Some(k) = REGISTRY.iter().find(|k| k.name == name) else {
        bail!("unknown config key `{name}`");
    };
    match k.kind {
        Kind::U64 => {
            value
                .parse::<u64>()
                .map_err(|e| anyhow!("key `{name}`: {e}"))?;
        }
        Kind::Usize => {
            value
                .parse::<usize>()
                .map_err(|e| anyhow!("key `{name}`: {e}"))?;
        }
        Kind::F64 => {
            value
                .parse::<f64>()
                .map_err(|e| anyhow!("key `{name}`: {e}"))?;
        }
        Kind::Bool => {
            value
                .parse::<bool>()
                .map_err(|e| anyhow!("key `{name}`: {e}"))?;
        }
        Kind::Str => {}
    }
    values.insert(k.name, value.to_string());
    Ok(())
}
