//! Flat `key = value` configuration.
//!
//! One setting per line, `#` starts a comment, later values override earlier
//! ones. The same keys are accepted as command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::codec::{
    Adaptation, CandidateMetric, CodecConfig, HybridMetric, MethodSpec, PredictorKind,
};
use crate::error::{Error, Result};
use crate::lpc::{Taper, LPC10_ORDER};
use crate::mlp::Activation;
use crate::quantizer::jayant_multipliers;

/// Keys that tune the codec and are shared by every subcommand.
pub const CODEC_KEYS: &[&str] = &[
    "lpc_taper",
    "hybrid_metric",
    "max_refits",
    "delta_min",
    "delta_max",
    "delta_init",
    "multipliers",
    "mlp_inputs",
    "mlp_hidden",
    "activation",
    "n_random",
    "epochs_random",
    "epochs_prev",
    "init_range",
    "lambda_init",
    "lambda_up",
    "lambda_down",
    "lambda_max",
    "use_prev",
    "candidate_metric",
];

/// Keys naming one coding configuration (encode).
pub const SINGLE_RUN_KEYS: &[&str] = &[
    "method",
    "predictor",
    "adaptation",
    "lpc_order",
    "bits",
    "frame_len",
    "training_window",
    "computing_window",
    "seed",
];

/// Keys describing a sweep.
pub const SWEEP_KEYS: &[&str] = &[
    "corpus",
    "methods",
    "bits",
    "frame_lens",
    "training_windows",
    "computing_windows",
    "seeds",
    "segment_len",
    "output",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            values.insert(normalize_key(k), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize_key(key), value.into());
    }

    /// Values in `other` take precedence.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// Fails on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&[&str]]) -> Result<()> {
        for k in self.keys() {
            if !allowed.iter().any(|set| set.contains(&k)) {
                return Err(Error::Config(format!("unknown setting '{k}'")));
            }
        }
        Ok(())
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("bad value '{v}' for {key}: {e}")))
            })
            .transpose()
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                split_list(v)
                    .map(|item| {
                        item.parse::<T>().map_err(|e| {
                            Error::Config(format!("bad list item '{item}' for {key}: {e}"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn paths(&self, key: &str) -> Option<Vec<PathBuf>> {
        self.get(key)
            .map(|v| split_list(v).map(PathBuf::from).collect())
    }

    /// Applies the shared codec knobs to `config`.
    pub fn apply_codec_knobs(&self, config: &mut CodecConfig) -> Result<()> {
        if let Some(t) = self.get("lpc_taper") {
            config.lpc_taper = match t {
                "rectangular" | "none" => Taper::Rectangular,
                "hamming" => Taper::Hamming,
                other => return Err(Error::Config(format!("unknown lpc_taper '{other}'"))),
            };
        }
        if let Some(m) = self.get("hybrid_metric") {
            config.hybrid_metric = match m {
                "reconstruction" | "closed-loop" => HybridMetric::Reconstruction,
                "prediction" | "open-loop" => HybridMetric::Prediction,
                other => return Err(Error::Config(format!("unknown hybrid_metric '{other}'"))),
            };
        }
        if let Some(cap) = self.parsed::<u64>("max_refits")? {
            config.max_refits = Some(cap);
        }
        let q = &mut config.quantizer;
        if let Some(v) = self.parsed("delta_min")? {
            q.delta_min = v;
        }
        if let Some(v) = self.parsed("delta_max")? {
            q.delta_max = v;
        }
        if let Some(v) = self.parsed("delta_init")? {
            q.delta_init = v;
        }
        if let Some(m) = self.list::<f64>("multipliers")? {
            q.multipliers = m;
        }

        let ms = &mut config.mlp.multistart;
        if let Some(v) = self.parsed("mlp_inputs")? {
            ms.topology.inputs = v;
        }
        if let Some(v) = self.parsed("mlp_hidden")? {
            ms.topology.hidden = v;
        }
        if let Some(a) = self.get("activation") {
            ms.topology.activation = match a {
                "tanh" => Activation::Tanh,
                "sigmoid" => Activation::Sigmoid,
                other => return Err(Error::Config(format!("unknown activation '{other}'"))),
            };
        }
        if let Some(v) = self.parsed("n_random")? {
            ms.n_random = v;
        }
        if let Some(v) = self.parsed("epochs_random")? {
            ms.epochs_random = v;
            ms.train.epochs = v;
        }
        if let Some(v) = self.parsed("epochs_prev")? {
            ms.epochs_prev = v;
        }
        if let Some(v) = self.parsed("init_range")? {
            ms.init_range = v;
        }
        if let Some(v) = self.parsed("lambda_init")? {
            ms.train.lambda_init = v;
        }
        if let Some(v) = self.parsed("lambda_up")? {
            ms.train.lambda_up = v;
        }
        if let Some(v) = self.parsed("lambda_down")? {
            ms.train.lambda_down = v;
        }
        if let Some(v) = self.parsed("lambda_max")? {
            ms.train.lambda_max = v;
        }
        if let Some(v) = self.parsed::<bool>("use_prev")? {
            config.mlp.use_prev = v;
        }
        if let Some(m) = self.get("candidate_metric") {
            config.mlp.metric = match m {
                "open-loop" => CandidateMetric::OpenLoop,
                "closed-loop" => CandidateMetric::ClosedLoop,
                other => return Err(Error::Config(format!("unknown candidate_metric '{other}'"))),
            };
        }
        Ok(())
    }

    /// Builds one codec configuration from the single-run and codec keys.
    ///
    /// Defaults: backward LPC-10, 4 bits, 100-sample block-adaptive frames.
    pub fn codec_config(&self) -> Result<CodecConfig> {
        self.check_keys(&[CODEC_KEYS, SINGLE_RUN_KEYS])?;
        let mut method = match self.parsed::<MethodSpec>("method")? {
            Some(m) => m,
            None => MethodSpec {
                predictor: PredictorKind::Lpc,
                adaptation: Adaptation::Backward,
                lpc_order: LPC10_ORDER,
            },
        };
        if let Some(p) = self.parsed::<PredictorKind>("predictor")? {
            method.predictor = p;
        }
        if let Some(a) = self.parsed::<Adaptation>("adaptation")? {
            method.adaptation = a;
        }
        if let Some(o) = self.parsed("lpc_order")? {
            method.lpc_order = o;
        }
        let bits = self.parsed::<u8>("bits")?.unwrap_or(4);
        let frame_len = self.parsed("frame_len")?.unwrap_or(100);
        let training = self.parsed("training_window")?.unwrap_or(frame_len);
        let computing = self.parsed("computing_window")?.unwrap_or(frame_len);
        let seed = self.parsed("seed")?.unwrap_or(0);
        let config = build_config(self, method, bits, frame_len, training, computing, seed)?;
        Ok(config)
    }
}

/// One configuration from swept values plus the shared knobs in `settings`.
pub fn build_config(
    settings: &Settings,
    method: MethodSpec,
    bits: u8,
    frame_len: usize,
    training_window: usize,
    computing_window: usize,
    seed: u64,
) -> Result<CodecConfig> {
    if jayant_multipliers(bits).is_none() {
        return Err(Error::Config(format!(
            "quantizer bits must be 2..=5, got {bits}"
        )));
    }
    let mut config = CodecConfig::block(method.predictor, method.adaptation, bits, frame_len)?
        .with_lpc_order(method.lpc_order)
        .with_windows(training_window, computing_window)
        .with_seed(seed);
    settings.apply_codec_knobs(&mut config)?;
    config.validate()?;
    Ok(config)
}

fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .map(str::trim)
        .filter(|s| !s.is_empty())
}
