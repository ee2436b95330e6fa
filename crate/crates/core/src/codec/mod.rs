//! ADPCM encoder and decoder.
//!
//! Both sides run the same segment coder: the signal is cut into segments of
//! `computing_window` samples, the predictor is refitted at the start of each
//! segment, and every sample goes through predict / quantize / reconstruct.
//! In backward mode refits only see reconstructed samples, so the decoder
//! repeats them exactly and the stream carries nothing but codes. Forward
//! mode fits on the original samples and ships the coefficients.

mod config;
mod stream;

pub use config::{
    Adaptation, CandidateMetric, CodecConfig, HybridMetric, MethodSpec, MlpSettings, PredictorKind,
};
pub use stream::{EncodedStream, STREAM_MAGIC, STREAM_VERSION};

use crate::error::{Error, Result};
use crate::lpc::{self, LinearCoeffs};
use crate::mlp::{self, MlpWeights, TrainingSet};
use crate::quantizer::{dequantize, quantize, Code, QuantizerConfig, QuantizerState};
use crate::signal_io::{segment_snr_db, segsnr_slices, SampleBuffer, SegSnrReport, SEGSNR_CEIL_DB};

/// One fitted predictor. Outputs are limited to the signal range `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Linear(LinearCoeffs),
    Neural(MlpWeights),
}

impl Predictor {
    /// `history` ends with the most recent sample and is at least as long
    /// as the predictor's context.
    #[inline]
    pub fn predict(&self, history: &[f64]) -> f64 {
        let raw = match self {
            Predictor::Linear(c) => {
                lpc::dot_reversed(&history[history.len() - c.order()..], c.as_slice())
            }
            Predictor::Neural(w) => {
                let n = w.topology().inputs;
                w.forward(&history[history.len() - n..])
            }
        };
        if raw.is_nan() {
            0.0
        } else {
            raw.clamp(-1.0, 1.0)
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Predictor::Linear(c) => c.is_zero(),
            Predictor::Neural(w) => w.is_zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictorUsed {
    Linear,
    Neural,
}

/// Per-frame instrumentation of an encode run.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStats {
    pub start: usize,
    pub len: usize,
    pub predictor: PredictorUsed,
    /// `10·log10(Σx² / Σ(x − x̂)²)`; 0 dB for a silent frame.
    pub prediction_gain_db: f64,
    /// Frame SNR with the same clamping as the segmental SNR.
    pub snr_db: f64,
    /// Quantizer step after the last sample of the frame.
    pub delta_end: f64,
    /// `Σ(x − x̃)²` of the committed reconstruction.
    pub reconstruction_error: f64,
    /// Hybrid mode: decision metric of the linear and neural branch.
    pub branch_errors: Option<[f64; 2]>,
    pub mlp_refits: u32,
    pub mlp_prev_selected: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodeStats {
    pub frames: Vec<FrameStats>,
    /// Segmental SNR with `frame_len` segments, when the signal holds at
    /// least one full frame.
    pub segsnr: Option<SegSnrReport>,
    pub refits: usize,
    pub mlp_refits: usize,
    pub mlp_prev_selected: usize,
    /// Refits where every network candidate failed and the zero predictor
    /// was used instead.
    pub mlp_fallbacks: usize,
}

impl EncodeStats {
    pub fn selected_prev_fraction(&self) -> Option<f64> {
        (self.mlp_refits > 0).then(|| self.mlp_prev_selected as f64 / self.mlp_refits as f64)
    }

    pub fn neural_frame_fraction(&self) -> f64 {
        if self.frames.is_empty() {
            return 0.0;
        }
        let n = self
            .frames
            .iter()
            .filter(|f| f.predictor == PredictorUsed::Neural)
            .count();
        n as f64 / self.frames.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct EncodeOutput {
    pub stream: EncodedStream,
    pub reconstruction: SampleBuffer,
    pub stats: EncodeStats,
}

/// Encodes a signal, returning the stream and the encoder's own reconstruction.
pub fn encode(
    signal: &SampleBuffer,
    config: &CodecConfig,
) -> Result<(EncodedStream, SampleBuffer)> {
    let out = encode_with_stats(signal, config)?;
    Ok((out.stream, out.reconstruction))
}

/// Per-frame statistics of the encode trajectory.
pub fn encode_stats(signal: &SampleBuffer, config: &CodecConfig) -> Result<EncodeStats> {
    encode_with_stats(signal, config).map(|o| o.stats)
}

pub fn encode_with_stats(signal: &SampleBuffer, config: &CodecConfig) -> Result<EncodeOutput> {
    config.validate()?;
    if signal.is_empty() {
        return Err(Error::InvalidInput("cannot encode an empty signal".into()));
    }
    signal.validate()?;

    let n = signal.len();
    let mut engine = Engine::new(config, n);
    let original = engine.padded(&signal.samples);
    let mut codes = Vec::with_capacity(n);
    let mut hybrid_bits = Vec::new();
    let mut payload = Vec::new();
    let mut trace = Trace::with_capacity(n);

    for (seg, start) in (0..n).step_by(config.computing_window).enumerate() {
        let end = (start + config.computing_window).min(n);
        let x = &signal.samples[start..end];

        if engine.refit_due(seg) {
            match config.adaptation {
                Adaptation::Backward => engine.refit_backward(start)?,
                Adaptation::Forward => {
                    // Window of original samples ending at the segment end.
                    let pe = engine.pad + end;
                    engine.refit_from(
                        &original[..pe],
                        start,
                        &original[pe - config.training_window..pe],
                    )?;
                    payload.push(engine.payload_block());
                }
            }
        }

        if config.predictor == PredictorKind::Hybrid {
            let lin = engine.encode_segment(&Predictor::Linear(engine.linear.clone()), x);
            let nl = engine.encode_segment(&Predictor::Neural(engine.neural.clone()), x);
            let (le, ne) = match config.hybrid_metric {
                HybridMetric::Reconstruction => {
                    (lin.reconstruction_error(x), nl.reconstruction_error(x))
                }
                HybridMetric::Prediction => (lin.prediction_error(x), nl.prediction_error(x)),
            };
            let pick_neural = ne < le;
            hybrid_bits.push(pick_neural);
            let chosen = if pick_neural { nl } else { lin };
            trace.push_branch(start, [le, ne], pick_neural);
            engine.commit(&chosen);
            codes.extend_from_slice(&chosen.codes);
            trace.extend(&chosen);
        } else {
            let seg_out = engine.encode_segment(&engine.active(), x);
            engine.commit(&seg_out);
            codes.extend_from_slice(&seg_out.codes);
            trace.extend(&seg_out);
        }
    }

    let reconstruction = SampleBuffer::new(engine.reconstruction().to_vec(), signal.sample_rate_hz);
    let stats = trace.finish(config, &signal.samples, &reconstruction.samples, &engine);
    let stream = EncodedStream {
        config: config.clone(),
        sample_rate_hz: signal.sample_rate_hz,
        sample_count: n,
        codes,
        hybrid_bits,
        forward_payload: payload,
    };
    Ok(EncodeOutput {
        stream,
        reconstruction,
        stats,
    })
}

/// Decodes a stream; the output equals the encoder's reconstruction bit for bit.
pub fn decode(stream: &EncodedStream) -> Result<SampleBuffer> {
    stream.check_consistency()?;
    let config = &stream.config;
    let n = stream.sample_count;
    let mut engine = Engine::new(config, n);
    let mut payload = stream.forward_payload.iter();
    let mut bits = stream.hybrid_bits.iter();

    for (seg, start) in (0..n).step_by(config.computing_window).enumerate() {
        let end = (start + config.computing_window).min(n);
        if engine.refit_due(seg) {
            match config.adaptation {
                Adaptation::Backward => engine.refit_backward(start)?,
                Adaptation::Forward => {
                    let block = payload
                        .next()
                        .ok_or_else(|| Error::Stream("forward payload exhausted".into()))?;
                    engine.load_payload(block)?;
                }
            }
        }
        let predictor = if config.predictor == PredictorKind::Hybrid {
            let neural = *bits
                .next()
                .ok_or_else(|| Error::Stream("hybrid selection bits exhausted".into()))?;
            if neural {
                Predictor::Neural(engine.neural.clone())
            } else {
                Predictor::Linear(engine.linear.clone())
            }
        } else {
            engine.active()
        };
        let seg_out = engine.decode_segment(&predictor, &stream.codes[start..end])?;
        engine.commit(&seg_out);
    }
    Ok(SampleBuffer::new(
        engine.reconstruction().to_vec(),
        stream.sample_rate_hz,
    ))
}

/// Result of coding one segment from a fixed entry state.
#[derive(Debug, Clone)]
struct Segment {
    codes: Vec<Code>,
    predictions: Vec<f64>,
    reconstruction: Vec<f64>,
    /// Quantizer step after each sample.
    deltas: Vec<f64>,
    exit: QuantizerState,
}

impl Segment {
    fn reconstruction_error(&self, x: &[f64]) -> f64 {
        sq_err(x, &self.reconstruction)
    }

    fn prediction_error(&self, x: &[f64]) -> f64 {
        sq_err(x, &self.predictions)
    }
}

fn sq_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Runs predict / quantize / reconstruct over `x`. `history` must hold at
/// least the predictor's context.
fn code_samples(
    predictor: &Predictor,
    history: &[f64],
    q: QuantizerState,
    qcfg: &QuantizerConfig,
    x: &[f64],
) -> Segment {
    let mut buf = Vec::with_capacity(history.len() + x.len());
    buf.extend_from_slice(history);
    let mut out = Segment {
        codes: Vec::with_capacity(x.len()),
        predictions: Vec::with_capacity(x.len()),
        reconstruction: Vec::with_capacity(x.len()),
        deltas: Vec::with_capacity(x.len()),
        exit: q,
    };
    let mut state = q;
    for &sample in x {
        let pred = predictor.predict(&buf);
        let (code, e_hat, next) = quantize(sample - pred, state, qcfg);
        let rec = pred + e_hat;
        state = next;
        buf.push(rec);
        out.codes.push(code);
        out.predictions.push(pred);
        out.reconstruction.push(rec);
        out.deltas.push(state.delta);
    }
    out.exit = state;
    out
}

/// Squared reconstruction error of coding `x` with `predictor`.
fn closed_loop_error(
    predictor: &Predictor,
    history: &[f64],
    q: QuantizerState,
    qcfg: &QuantizerConfig,
    x: &[f64],
) -> f64 {
    let mut buf = Vec::with_capacity(history.len() + x.len());
    buf.extend_from_slice(history);
    let mut state = q;
    let mut err = 0.0;
    for &sample in x {
        let pred = predictor.predict(&buf);
        let (_, e_hat, next) = quantize(sample - pred, state, qcfg);
        let rec = pred + e_hat;
        state = next;
        buf.push(rec);
        err += (sample - rec) * (sample - rec);
    }
    err
}

/// Seed for the `index`-th refit, derived from the stream seed.
fn refit_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed
        ^ (index as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Coder state shared by the encoder and the decoder.
struct Engine<'a> {
    config: &'a CodecConfig,
    /// Leading zeros in `recon` standing in for the signal before time 0.
    pad: usize,
    recon: Vec<f64>,
    q: QuantizerState,
    linear: LinearCoeffs,
    neural: MlpWeights,
    last_trained: Option<MlpWeights>,
    refits: usize,
    /// Sample index and warm-start selection of every network refit.
    mlp_events: Vec<(usize, bool)>,
    mlp_fallbacks: usize,
}

impl<'a> Engine<'a> {
    fn new(config: &'a CodecConfig, n: usize) -> Self {
        let pad = config.training_window + config.history_len();
        let mut recon = Vec::with_capacity(pad + n);
        recon.resize(pad, 0.0);
        Self {
            config,
            pad,
            recon,
            q: config.quantizer.initial_state(),
            linear: LinearCoeffs::zeros(config.lpc_order),
            neural: MlpWeights::zeros(config.mlp.multistart.topology),
            last_trained: None,
            refits: 0,
            mlp_events: Vec::new(),
            mlp_fallbacks: 0,
        }
    }

    fn padded(&self, x: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.pad];
        v.extend_from_slice(x);
        v
    }

    fn reconstruction(&self) -> &[f64] {
        &self.recon[self.pad..]
    }

    fn history(&self) -> &[f64] {
        &self.recon[self.recon.len() - self.config.history_len()..]
    }

    fn refit_due(&self, segment: usize) -> bool {
        let scheduled = match self.config.adaptation {
            Adaptation::Forward => true,
            // Nothing has been decoded before the first segment.
            Adaptation::Backward => segment > 0,
        };
        scheduled
            && self
                .config
                .max_refits
                .is_none_or(|cap| (self.refits as u64) < cap)
    }

    fn active(&self) -> Predictor {
        match self.config.predictor {
            PredictorKind::Lpc => Predictor::Linear(self.linear.clone()),
            PredictorKind::Mlp => Predictor::Neural(self.neural.clone()),
            PredictorKind::Hybrid => unreachable!("hybrid picks its predictor per frame"),
        }
    }

    /// Refit from the last `training_window` reconstructed samples.
    fn refit_backward(&mut self, start: usize) -> Result<()> {
        let end = self.pad + start;
        let recon = std::mem::take(&mut self.recon);
        let res = self.refit_from(
            &recon[..end],
            start,
            &recon[end - self.config.training_window..end],
        );
        self.recon = recon;
        res
    }

    /// Refits the predictors in use on `window`. `signal` is the padded
    /// sequence the window is a suffix of, used by closed-loop scoring.
    fn refit_from(&mut self, signal: &[f64], start: usize, window: &[f64]) -> Result<()> {
        let cfg = self.config;
        if cfg.uses_linear() {
            self.linear = lpc::fit(window, cfg.lpc_order, cfg.lpc_taper);
        }
        if cfg.uses_neural() {
            self.refit_neural(signal, start, window)?;
        }
        self.refits += 1;
        Ok(())
    }

    fn refit_neural(&mut self, signal: &[f64], start: usize, window: &[f64]) -> Result<()> {
        let cfg = self.config;
        let ms = &cfg.mlp.multistart;
        let data = TrainingSet::from_window(window, ms.topology.inputs)?;
        let prev = if cfg.mlp.use_prev {
            self.last_trained.as_ref()
        } else {
            None
        };
        let seed = refit_seed(cfg.rng_seed, self.refits);
        let outcome = match cfg.mlp.metric {
            CandidateMetric::OpenLoop => mlp::multistart_train(prev, &data, &data, ms, seed),
            CandidateMetric::ClosedLoop => {
                let hist_len = cfg.history_len();
                let wstart = signal.len() - window.len();
                let history = &signal[wstart - hist_len..wstart];
                let q = self.q;
                mlp::multistart_train_scored(prev, &data, ms, seed, |w| {
                    closed_loop_error(
                        &Predictor::Neural(w.clone()),
                        history,
                        q,
                        &cfg.quantizer,
                        window,
                    )
                })
            }
        };
        match outcome {
            Ok(o) => {
                self.mlp_events.push((start, o.selected_prev));
                self.neural = o.weights.clone();
                self.last_trained = Some(o.weights);
            }
            Err(Error::Numerical(msg)) => {
                log::debug!("network refit at sample {start} failed: {msg}");
                self.mlp_fallbacks += 1;
                self.mlp_events.push((start, false));
                self.neural = MlpWeights::zeros(ms.topology);
            }
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn payload_block(&self) -> Vec<f64> {
        match self.config.predictor {
            PredictorKind::Lpc => self.linear.as_slice().to_vec(),
            PredictorKind::Mlp => self.neural.flat().to_vec(),
            PredictorKind::Hybrid => unreachable!("hybrid is backward-only"),
        }
    }

    fn load_payload(&mut self, block: &[f64]) -> Result<()> {
        match self.config.predictor {
            PredictorKind::Lpc => self.linear = LinearCoeffs::new(block.to_vec())?,
            PredictorKind::Mlp => {
                self.neural =
                    MlpWeights::from_flat(self.config.mlp.multistart.topology, block.to_vec())?
            }
            PredictorKind::Hybrid => {
                return Err(Error::Stream(
                    "hybrid streams carry no forward payload".into(),
                ))
            }
        }
        self.refits += 1;
        Ok(())
    }

    fn encode_segment(&self, predictor: &Predictor, x: &[f64]) -> Segment {
        code_samples(predictor, self.history(), self.q, &self.config.quantizer, x)
    }

    fn decode_segment(&self, predictor: &Predictor, codes: &[Code]) -> Result<Segment> {
        let qcfg = &self.config.quantizer;
        let mut buf = self.history().to_vec();
        let mut state = self.q;
        let mut out = Segment {
            codes: codes.to_vec(),
            predictions: Vec::with_capacity(codes.len()),
            reconstruction: Vec::with_capacity(codes.len()),
            deltas: Vec::with_capacity(codes.len()),
            exit: state,
        };
        for &code in codes {
            let pred = predictor.predict(&buf);
            let (e_hat, next) = dequantize(code, state, qcfg)?;
            let rec = pred + e_hat;
            state = next;
            buf.push(rec);
            out.predictions.push(pred);
            out.reconstruction.push(rec);
            out.deltas.push(state.delta);
        }
        out.exit = state;
        Ok(out)
    }

    fn commit(&mut self, seg: &Segment) {
        self.recon.extend_from_slice(&seg.reconstruction);
        self.q = seg.exit;
    }
}

/// Per-sample record of the committed trajectory, folded into frame stats.
struct Trace {
    predictions: Vec<f64>,
    deltas: Vec<f64>,
    /// Hybrid frames: (start, branch metrics, neural chosen).
    branches: Vec<(usize, [f64; 2], bool)>,
}

impl Trace {
    fn with_capacity(n: usize) -> Self {
        Self {
            predictions: Vec::with_capacity(n),
            deltas: Vec::with_capacity(n),
            branches: Vec::new(),
        }
    }

    fn extend(&mut self, seg: &Segment) {
        self.predictions.extend_from_slice(&seg.predictions);
        self.deltas.extend_from_slice(&seg.deltas);
    }

    fn push_branch(&mut self, start: usize, metrics: [f64; 2], neural: bool) {
        self.branches.push((start, metrics, neural));
    }

    fn finish(
        self,
        config: &CodecConfig,
        x: &[f64],
        rec: &[f64],
        engine: &Engine<'_>,
    ) -> EncodeStats {
        let n = x.len();
        let mut frames = Vec::with_capacity(n.div_ceil(config.frame_len));
        let mut branches = self.branches.iter().peekable();
        let mut events = engine.mlp_events.iter().peekable();
        for start in (0..n).step_by(config.frame_len) {
            let end = (start + config.frame_len).min(n);
            let xs = &x[start..end];
            let signal: f64 = xs.iter().map(|v| v * v).sum();
            let pred_err = sq_err(xs, &self.predictions[start..end]);
            let prediction_gain_db = if signal == 0.0 {
                0.0
            } else if pred_err == 0.0 {
                SEGSNR_CEIL_DB
            } else {
                10.0 * (signal / pred_err).log10()
            };
            let (predictor, branch_errors) = match config.predictor {
                PredictorKind::Lpc => (PredictorUsed::Linear, None),
                PredictorKind::Mlp => (PredictorUsed::Neural, None),
                PredictorKind::Hybrid => {
                    let &(_, metrics, neural) = branches.next().expect("one decision per frame");
                    let used = if neural {
                        PredictorUsed::Neural
                    } else {
                        PredictorUsed::Linear
                    };
                    (used, Some(metrics))
                }
            };
            let mut mlp_refits = 0;
            let mut mlp_prev_selected = 0;
            while let Some(&&(t, prev)) = events.peek() {
                if t >= end {
                    break;
                }
                mlp_refits += 1;
                mlp_prev_selected += u32::from(prev);
                events.next();
            }
            frames.push(FrameStats {
                start,
                len: end - start,
                predictor,
                prediction_gain_db,
                snr_db: segment_snr_db(xs, &rec[start..end]),
                delta_end: self.deltas[end - 1],
                reconstruction_error: sq_err(xs, &rec[start..end]),
                branch_errors,
                mlp_refits,
                mlp_prev_selected,
            });
        }
        let mlp_prev_selected = engine.mlp_events.iter().filter(|e| e.1).count();
        EncodeStats {
            frames,
            segsnr: segsnr_slices(x, rec, config.frame_len).ok(),
            refits: engine.refits,
            mlp_refits: engine.mlp_events.len(),
            mlp_prev_selected,
            mlp_fallbacks: engine.mlp_fallbacks,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ar1(n: usize, seed: u64) -> SampleBuffer {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let nd = Normal::new(0.0, 0.05).unwrap();
        let mut x = Vec::with_capacity(n);
        let mut prev = 0.0;
        for _ in 0..n {
            prev = 0.9 * prev + nd.sample(&mut rng);
            x.push(f64::clamp(prev, -1.0, 1.0));
        }
        SampleBuffer::new(x, 8000)
    }

    #[test]
    fn empty_signal_is_rejected() {
        let cfg = CodecConfig::block(PredictorKind::Lpc, Adaptation::Backward, 3, 100).unwrap();
        assert!(encode(&SampleBuffer::new(vec![], 8000), &cfg).is_err());
    }

    #[test]
    fn zero_signal_with_zero_predictor_emits_code_zero() {
        let cfg = CodecConfig::block(PredictorKind::Lpc, Adaptation::Backward, 2, 100).unwrap();
        let (stream, rec) = encode(&SampleBuffer::new(vec![0.0; 100], 8000), &cfg).unwrap();
        assert!(stream.codes.iter().all(|&c| c == Code(0)));
        // Δ shrinks by 0.8 per sample from 0.01
        let mut delta = 0.01;
        for r in rec.samples {
            assert_eq!(r, delta / 2.0);
            delta = (delta * 0.8f64).max(1e-5);
        }
    }

    #[test]
    fn zero_signal_stays_in_inner_cells() {
        for kind in [
            PredictorKind::Lpc,
            PredictorKind::Mlp,
            PredictorKind::Hybrid,
        ] {
            let cfg = CodecConfig::block(kind, Adaptation::Backward, 3, 50).unwrap();
            let out = encode_with_stats(&SampleBuffer::new(vec![0.0; 500], 8000), &cfg).unwrap();
            if kind == PredictorKind::Lpc {
                assert!(out.stream.codes.iter().all(|c| c.magnitude() == 0));
            }
            assert_eq!(
                out.stats.frames.last().unwrap().delta_end,
                cfg.quantizer.delta_min
            );
            let max_late = out.reconstruction.samples[400..]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(max_late < 1e-3, "{kind:?}: {max_late}");
            for f in &out.stats.frames {
                assert_eq!(f.prediction_gain_db, 0.0);
            }
        }
    }

    #[test]
    fn backward_lpc_round_trip() {
        let x = ar1(1000, 1);
        let cfg = CodecConfig::block(PredictorKind::Lpc, Adaptation::Backward, 4, 100).unwrap();
        let (stream, rec) = encode(&x, &cfg).unwrap();
        assert_eq!(decode(&stream).unwrap(), rec);
    }

    #[test]
    fn forward_payload_count() {
        let x = ar1(1050, 2);
        let cfg = CodecConfig::block(PredictorKind::Lpc, Adaptation::Forward, 3, 100).unwrap();
        let (stream, rec) = encode(&x, &cfg).unwrap();
        assert_eq!(stream.forward_payload.len(), 11);
        assert!(stream.hybrid_bits.is_empty());
        assert_eq!(decode(&stream).unwrap(), rec);
    }

    #[test]
    fn refit_cap_is_honored() {
        let x = ar1(1000, 3);
        let mut cfg = CodecConfig::block(PredictorKind::Lpc, Adaptation::Forward, 3, 100).unwrap();
        cfg.max_refits = Some(4);
        let out = encode_with_stats(&x, &cfg).unwrap();
        assert_eq!(out.stats.refits, 4);
        assert_eq!(out.stream.forward_payload.len(), 4);
        assert_eq!(decode(&out.stream).unwrap(), out.reconstruction);
    }

    #[test]
    fn refit_seeds_differ() {
        assert_ne!(refit_seed(0, 0), refit_seed(0, 1));
        assert_ne!(refit_seed(0, 0), refit_seed(1, 0));
    }

    #[test]
    fn prediction_is_clamped() {
        let p = Predictor::Linear(LinearCoeffs::new(vec![10.0]).unwrap());
        assert_eq!(p.predict(&[0.5]), 1.0);
        assert_eq!(p.predict(&[-0.5]), -1.0);
    }
}
