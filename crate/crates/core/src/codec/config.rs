use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lpc::{Taper, LPC10_ORDER};
use crate::mlp::MultistartConfig;
use crate::quantizer::QuantizerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictorKind {
    Lpc,
    Mlp,
    /// Per-frame switch between the linear and the neural predictor.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Adaptation {
    /// Coefficients fitted on the original samples of the block being coded
    /// and carried in the stream.
    Forward,
    /// Coefficients fitted on previously decoded samples; no side information.
    Backward,
}

/// How hybrid mode compares the two branches of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HybridMetric {
    /// `Σ(x − x̃)²`, the error left after quantization.
    #[default]
    Reconstruction,
    /// `Σ(x − x̂)²` of each branch's own closed-loop predictions.
    Prediction,
}

/// How multistart ranks trained network candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidateMetric {
    /// One-step prediction SSE on the training window.
    #[default]
    OpenLoop,
    /// Squared reconstruction error from coding the training window with the
    /// candidate, starting from the current quantizer step.
    ClosedLoop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpSettings {
    pub multistart: MultistartConfig,
    /// Offer the previously trained weights as a warm-start candidate.
    pub use_prev: bool,
    pub metric: CandidateMetric,
}

impl Default for MlpSettings {
    fn default() -> Self {
        Self {
            multistart: MultistartConfig::default(),
            use_prev: true,
            metric: CandidateMetric::OpenLoop,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    pub predictor: PredictorKind,
    pub lpc_order: usize,
    pub lpc_taper: Taper,
    pub adaptation: Adaptation,
    /// Statistics frame and hybrid decision frame.
    pub frame_len: usize,
    /// Samples the predictor is fitted on.
    pub training_window: usize,
    /// Samples between refits; 1 refits before every sample.
    pub computing_window: usize,
    pub quantizer: QuantizerConfig,
    pub mlp: MlpSettings,
    pub hybrid_metric: HybridMetric,
    /// Upper bound on the number of refits per stream.
    pub max_refits: Option<u64>,
    pub rng_seed: u64,
}

impl CodecConfig {
    /// Block-adaptive configuration: fit on one frame, use for one frame.
    pub fn block(
        predictor: PredictorKind,
        adaptation: Adaptation,
        bits: u8,
        frame_len: usize,
    ) -> Result<Self> {
        Ok(Self {
            predictor,
            lpc_order: LPC10_ORDER,
            lpc_taper: Taper::Rectangular,
            adaptation,
            frame_len,
            training_window: frame_len,
            computing_window: frame_len,
            quantizer: QuantizerConfig::jayant(bits)?,
            mlp: MlpSettings::default(),
            hybrid_metric: HybridMetric::default(),
            max_refits: None,
            rng_seed: 0,
        })
    }

    pub fn with_lpc_order(mut self, order: usize) -> Self {
        self.lpc_order = order;
        self
    }

    pub fn with_windows(mut self, training_window: usize, computing_window: usize) -> Self {
        self.training_window = training_window;
        self.computing_window = computing_window;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn is_block_adaptive(&self) -> bool {
        self.training_window == self.frame_len && self.computing_window == self.frame_len
    }

    pub fn uses_linear(&self) -> bool {
        matches!(self.predictor, PredictorKind::Lpc | PredictorKind::Hybrid)
    }

    pub fn uses_neural(&self) -> bool {
        matches!(self.predictor, PredictorKind::Mlp | PredictorKind::Hybrid)
    }

    /// Number of reconstructed samples the coder needs to look back on.
    pub(crate) fn history_len(&self) -> usize {
        self.lpc_order
            .max(self.mlp.multistart.topology.inputs)
            .max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_len == 0 || self.training_window == 0 || self.computing_window == 0 {
            return Err(Error::Config(
                "frame and window lengths must be positive".into(),
            ));
        }
        if self.lpc_order == 0 {
            return Err(Error::Config("lpc order must be at least 1".into()));
        }
        self.quantizer.validate()?;
        if self.uses_linear() && self.training_window < self.lpc_order + 1 {
            return Err(Error::Config(format!(
                "training window {} is too short for lpc order {}",
                self.training_window, self.lpc_order
            )));
        }
        if self.uses_neural() {
            let ms = &self.mlp.multistart;
            if ms.topology.inputs == 0 || ms.topology.hidden == 0 {
                return Err(Error::Config(
                    "network needs inputs and hidden units".into(),
                ));
            }
            if self.training_window < ms.topology.inputs + 1 {
                return Err(Error::Config(format!(
                    "training window {} yields no training pairs for {} network inputs",
                    self.training_window, ms.topology.inputs
                )));
            }
            if ms.n_random == 0 {
                return Err(Error::Config(
                    "at least one random network initialization is required".into(),
                ));
            }
            if !(ms.init_range >= 0.0 && ms.init_range.is_finite()) {
                return Err(Error::Config(
                    "init range must be finite and non-negative".into(),
                ));
            }
            ms.train.validate()?;
        }
        if self.predictor == PredictorKind::Hybrid {
            if self.adaptation != Adaptation::Backward {
                return Err(Error::Config(
                    "hybrid prediction requires backward adaptation".into(),
                ));
            }
            if self.computing_window != self.frame_len {
                return Err(Error::Config(
                    "hybrid prediction is block-adaptive: computing window must equal frame length"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    /// Table-style label, e.g. `ADPCMF-LPC10`, `ADPCMB-MLP`, `ADPCMB-HYBRID`.
    pub fn method_label(&self) -> String {
        MethodSpec {
            predictor: self.predictor,
            adaptation: self.adaptation,
            lpc_order: self.lpc_order,
        }
        .to_string()
    }
}

/// Predictor/adaptation/order triple that names one coding method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MethodSpec {
    pub predictor: PredictorKind,
    pub adaptation: Adaptation,
    pub lpc_order: usize,
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = match self.adaptation {
            Adaptation::Forward => 'F',
            Adaptation::Backward => 'B',
        };
        match self.predictor {
            PredictorKind::Lpc => write!(f, "ADPCM{a}-LPC{}", self.lpc_order),
            PredictorKind::Mlp => write!(f, "ADPCM{a}-MLP"),
            PredictorKind::Hybrid => write!(f, "ADPCM{a}-HYBRID"),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    /// Accepts table labels (`ADPCMB-LPC25`) and short forms
    /// (`b-lpc25`, `f-mlp`, `hybrid`), case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let body = lower.strip_prefix("adpcm").unwrap_or(&lower);
        let (adaptation, rest) = match body.split_once('-') {
            Some((a, rest)) => (Some(parse_adaptation(a)?), rest),
            None => match body {
                "hybrid" => (None, "hybrid"),
                _ => return Err(Error::Config(format!("cannot parse method '{s}'"))),
            },
        };
        let (predictor, lpc_order) = if rest == "mlp" {
            (PredictorKind::Mlp, LPC10_ORDER)
        } else if rest == "hybrid" {
            (PredictorKind::Hybrid, LPC10_ORDER)
        } else if let Some(order) = rest.strip_prefix("hybrid") {
            (PredictorKind::Hybrid, parse_order(order, s)?)
        } else if let Some(order) = rest.strip_prefix("lpc") {
            (PredictorKind::Lpc, parse_order(order, s)?)
        } else {
            return Err(Error::Config(format!("cannot parse method '{s}'")));
        };
        let adaptation = adaptation.unwrap_or(Adaptation::Backward);
        Ok(Self {
            predictor,
            adaptation,
            lpc_order,
        })
    }
}

fn parse_adaptation(a: &str) -> Result<Adaptation> {
    match a {
        "f" | "forward" => Ok(Adaptation::Forward),
        "b" | "backward" => Ok(Adaptation::Backward),
        other => Err(Error::Config(format!("unknown adaptation '{other}'"))),
    }
}

fn parse_order(order: &str, whole: &str) -> Result<usize> {
    if order.is_empty() {
        return Ok(LPC10_ORDER);
    }
    order
        .parse()
        .map_err(|_| Error::Config(format!("bad lpc order in method '{whole}'")))
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lpc" => Ok(PredictorKind::Lpc),
            "mlp" => Ok(PredictorKind::Mlp),
            "hybrid" => Ok(PredictorKind::Hybrid),
            other => Err(Error::Config(format!("unknown predictor '{other}'"))),
        }
    }
}

impl FromStr for Adaptation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_adaptation(&s.to_ascii_lowercase())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for label in [
            "ADPCMF-LPC10",
            "ADPCMF-LPC25",
            "ADPCMF-MLP",
            "ADPCMB-LPC10",
            "ADPCMB-LPC25",
            "ADPCMB-MLP",
            "ADPCMB-HYBRID",
        ] {
            let m: MethodSpec = label.parse().unwrap();
            assert_eq!(m.to_string(), label);
        }
        let m: MethodSpec = "f-lpc25".parse().unwrap();
        assert_eq!(m.adaptation, Adaptation::Forward);
        assert_eq!(m.lpc_order, 25);
        assert_eq!(
            "hybrid".parse::<MethodSpec>().unwrap().predictor,
            PredictorKind::Hybrid
        );
        assert!("x-lpc".parse::<MethodSpec>().is_err());
    }

    #[test]
    fn hybrid_requires_backward() {
        let c = CodecConfig::block(PredictorKind::Hybrid, Adaptation::Forward, 3, 100).unwrap();
        assert!(c.validate().is_err());
        let c = CodecConfig::block(PredictorKind::Hybrid, Adaptation::Backward, 3, 100)
            .unwrap()
            .with_windows(100, 10);
        assert!(c.validate().is_err());
    }

    #[test]
    fn window_must_fit_order() {
        let c = CodecConfig::block(PredictorKind::Lpc, Adaptation::Backward, 3, 100)
            .unwrap()
            .with_lpc_order(25)
            .with_windows(20, 20);
        assert!(c.validate().is_err());
        let c = CodecConfig::block(PredictorKind::Mlp, Adaptation::Backward, 3, 10).unwrap();
        assert!(c.validate().is_err());
        let c = CodecConfig::block(PredictorKind::Mlp, Adaptation::Backward, 3, 11).unwrap();
        assert!(c.validate().is_ok());
    }
}
