//! Binary container for encoded streams.
//!
//! Layout (little-endian, reals as IEEE-754 `f64`):
//!
//! ```text
//! magic "NADP" | version u8
//! predictor u8 | adaptation u8 | lpc_order u32 | lpc_taper u8
//! frame_len u32 | training_window u32 | computing_window u32
//! hybrid_metric u8 | max_refits u64 (u64::MAX = none) | rng_seed u64
//! bits u8 | multipliers f64 × 2^(bits−1) | delta_min f64 | delta_max f64 | delta_init f64
//! mlp_inputs u32 | mlp_hidden u32 | activation u8
//! n_random u32 | epochs_random u32 | epochs_prev u32 | init_range f64
//! lambda_init f64 | lambda_up f64 | lambda_down f64 | lambda_max f64
//! use_prev u8 | candidate_metric u8
//! sample_rate u32 | sample_count u64
//! hybrid bits, packed msb-first, ceil(frames / 8) bytes (hybrid only)
//! forward payload blocks f64 × block_len, in refit order (forward only)
//! codes as (code + 2^(bits−1)), `bits` bits each, packed msb-first
//! ```

use super::config::{
    Adaptation, CandidateMetric, CodecConfig, HybridMetric, MlpSettings, PredictorKind,
};
use crate::error::{Error, Result};
use crate::lpc::Taper;
use crate::mlp::{Activation, MultistartConfig, Topology, TrainConfig};
use crate::quantizer::{Code, QuantizerConfig};

pub const STREAM_MAGIC: &[u8; 4] = b"NADP";
pub const STREAM_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedStream {
    pub config: CodecConfig,
    pub sample_rate_hz: u32,
    pub sample_count: usize,
    pub codes: Vec<Code>,
    /// One entry per frame in hybrid mode; `true` selects the neural predictor.
    pub hybrid_bits: Vec<bool>,
    /// Unquantized coefficients, one block per forward refit.
    pub forward_payload: Vec<Vec<f64>>,
}

impl EncodedStream {
    pub fn expected_hybrid_bits(&self) -> usize {
        if self.config.predictor == PredictorKind::Hybrid {
            self.sample_count.div_ceil(self.config.frame_len)
        } else {
            0
        }
    }

    pub fn expected_payload_blocks(&self) -> usize {
        if self.config.adaptation != Adaptation::Forward {
            return 0;
        }
        let segments = self.sample_count.div_ceil(self.config.computing_window) as u64;
        self.config
            .max_refits
            .map_or(segments, |cap| segments.min(cap)) as usize
    }

    pub fn payload_block_len(&self) -> usize {
        match self.config.predictor {
            PredictorKind::Lpc => self.config.lpc_order,
            PredictorKind::Mlp => self.config.mlp.multistart.topology.param_count(),
            PredictorKind::Hybrid => 0,
        }
    }

    /// Total side information in bits (hybrid selection bits only; forward
    /// coefficients are carried unquantized and not charged).
    pub fn side_info_bits(&self) -> usize {
        self.hybrid_bits.len()
    }

    pub(crate) fn check_consistency(&self) -> Result<()> {
        self.config
            .validate()
            .map_err(|e| Error::Stream(format!("config echo rejected: {e}")))?;
        if self.sample_count == 0 {
            return Err(Error::Stream("stream holds no samples".into()));
        }
        if self.codes.len() != self.sample_count {
            return Err(Error::Stream(format!(
                "{} codes for {} samples",
                self.codes.len(),
                self.sample_count
            )));
        }
        if self.hybrid_bits.len() != self.expected_hybrid_bits() {
            return Err(Error::Stream(format!(
                "expected {} hybrid bits, found {}",
                self.expected_hybrid_bits(),
                self.hybrid_bits.len()
            )));
        }
        if self.forward_payload.len() != self.expected_payload_blocks() {
            return Err(Error::Stream(format!(
                "expected {} forward payload blocks, found {}",
                self.expected_payload_blocks(),
                self.forward_payload.len()
            )));
        }
        let block = self.payload_block_len();
        if self.forward_payload.iter().any(|b| b.len() != block) {
            return Err(Error::Stream(format!(
                "forward payload blocks must hold {block} values"
            )));
        }
        if let Some(c) = self
            .codes
            .iter()
            .find(|c| !c.in_range(self.config.quantizer.bits))
        {
            return Err(Error::Stream(format!("code {} out of range", c.0)));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.check_consistency()?;
        let c = &self.config;
        let mut w = Writer::default();
        w.bytes(STREAM_MAGIC);
        w.u8(STREAM_VERSION);
        w.u8(match c.predictor {
            PredictorKind::Lpc => 0,
            PredictorKind::Mlp => 1,
            PredictorKind::Hybrid => 2,
        });
        w.u8(match c.adaptation {
            Adaptation::Forward => 0,
            Adaptation::Backward => 1,
        });
        w.u32(c.lpc_order)?;
        w.u8(match c.lpc_taper {
            Taper::Rectangular => 0,
            Taper::Hamming => 1,
        });
        w.u32(c.frame_len)?;
        w.u32(c.training_window)?;
        w.u32(c.computing_window)?;
        w.u8(match c.hybrid_metric {
            HybridMetric::Reconstruction => 0,
            HybridMetric::Prediction => 1,
        });
        w.u64(c.max_refits.unwrap_or(u64::MAX));
        w.u64(c.rng_seed);

        let q = &c.quantizer;
        w.u8(q.bits);
        for &m in &q.multipliers {
            w.f64(m);
        }
        w.f64(q.delta_min);
        w.f64(q.delta_max);
        w.f64(q.delta_init);

        let ms = &c.mlp.multistart;
        w.u32(ms.topology.inputs)?;
        w.u32(ms.topology.hidden)?;
        w.u8(match ms.topology.activation {
            Activation::Tanh => 0,
            Activation::Sigmoid => 1,
        });
        w.u32(ms.n_random)?;
        w.u32(ms.epochs_random)?;
        w.u32(ms.epochs_prev)?;
        w.f64(ms.init_range);
        w.f64(ms.train.lambda_init);
        w.f64(ms.train.lambda_up);
        w.f64(ms.train.lambda_down);
        w.f64(ms.train.lambda_max);
        w.u8(u8::from(c.mlp.use_prev));
        w.u8(match c.mlp.metric {
            CandidateMetric::OpenLoop => 0,
            CandidateMetric::ClosedLoop => 1,
        });

        w.u32(self.sample_rate_hz as usize)?;
        w.u64(self.sample_count as u64);

        let mut bits = BitWriter::default();
        for &b in &self.hybrid_bits {
            bits.push(u32::from(b), 1);
        }
        w.bytes(&bits.finish());

        for block in &self.forward_payload {
            for &v in block {
                w.f64(v);
            }
        }

        let mut codes = BitWriter::default();
        for &code in &self.codes {
            codes.push(code.to_unsigned(q.bits), q.bits);
        }
        w.bytes(&codes.finish());
        Ok(w.buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != STREAM_MAGIC {
            return Err(Error::Stream("bad magic, not an encoded stream".into()));
        }
        let version = r.u8()?;
        if version != STREAM_VERSION {
            return Err(Error::Stream(format!(
                "unsupported stream version {version}"
            )));
        }
        let predictor = match r.u8()? {
            0 => PredictorKind::Lpc,
            1 => PredictorKind::Mlp,
            2 => PredictorKind::Hybrid,
            v => return Err(Error::Stream(format!("unknown predictor tag {v}"))),
        };
        let adaptation = match r.u8()? {
            0 => Adaptation::Forward,
            1 => Adaptation::Backward,
            v => return Err(Error::Stream(format!("unknown adaptation tag {v}"))),
        };
        let lpc_order = r.u32()?;
        let lpc_taper = match r.u8()? {
            0 => Taper::Rectangular,
            1 => Taper::Hamming,
            v => return Err(Error::Stream(format!("unknown taper tag {v}"))),
        };
        let frame_len = r.u32()?;
        let training_window = r.u32()?;
        let computing_window = r.u32()?;
        let hybrid_metric = match r.u8()? {
            0 => HybridMetric::Reconstruction,
            1 => HybridMetric::Prediction,
            v => return Err(Error::Stream(format!("unknown hybrid metric tag {v}"))),
        };
        let max_refits = match r.u64()? {
            u64::MAX => None,
            v => Some(v),
        };
        let rng_seed = r.u64()?;

        let bits = r.u8()?;
        if !(2..=5).contains(&bits) {
            return Err(Error::Stream(format!("quantizer bits {bits} out of range")));
        }
        let multipliers = (0..1usize << (bits - 1))
            .map(|_| r.f64())
            .collect::<Result<Vec<_>>>()?;
        let quantizer = QuantizerConfig {
            bits,
            multipliers,
            delta_min: r.f64()?,
            delta_max: r.f64()?,
            delta_init: r.f64()?,
        };

        let inputs = r.u32()?;
        let hidden = r.u32()?;
        let activation = match r.u8()? {
            0 => Activation::Tanh,
            1 => Activation::Sigmoid,
            v => return Err(Error::Stream(format!("unknown activation tag {v}"))),
        };
        let n_random = r.u32()?;
        let epochs_random = r.u32()?;
        let epochs_prev = r.u32()?;
        let init_range = r.f64()?;
        let train = TrainConfig {
            epochs: epochs_random,
            lambda_init: r.f64()?,
            lambda_up: r.f64()?,
            lambda_down: r.f64()?,
            lambda_max: r.f64()?,
        };
        let use_prev = r.u8()? != 0;
        let metric = match r.u8()? {
            0 => CandidateMetric::OpenLoop,
            1 => CandidateMetric::ClosedLoop,
            v => return Err(Error::Stream(format!("unknown candidate metric tag {v}"))),
        };

        let sample_rate_hz = r.u32()? as u32;
        let sample_count = usize::try_from(r.u64()?)
            .map_err(|_| Error::Stream("sample count does not fit in memory".into()))?;

        let config = CodecConfig {
            predictor,
            lpc_order,
            lpc_taper,
            adaptation,
            frame_len,
            training_window,
            computing_window,
            quantizer,
            mlp: MlpSettings {
                multistart: MultistartConfig {
                    topology: Topology {
                        inputs,
                        hidden,
                        activation,
                    },
                    n_random,
                    epochs_random,
                    epochs_prev,
                    init_range,
                    train,
                },
                use_prev,
                metric,
            },
            hybrid_metric,
            max_refits,
            rng_seed,
        };
        config
            .validate()
            .map_err(|e| Error::Stream(format!("config echo rejected: {e}")))?;
        if sample_count == 0 {
            return Err(Error::Stream("stream holds no samples".into()));
        }

        let mut stream = EncodedStream {
            config,
            sample_rate_hz,
            sample_count,
            codes: Vec::new(),
            hybrid_bits: Vec::new(),
            forward_payload: Vec::new(),
        };

        let n_bits = stream.expected_hybrid_bits();
        let packed = r.take(n_bits.div_ceil(8))?;
        stream.hybrid_bits = unpack(packed, 1, n_bits).map(|b| b == 1).collect();

        let block_len = stream.payload_block_len();
        for _ in 0..stream.expected_payload_blocks() {
            let block = (0..block_len)
                .map(|_| r.f64())
                .collect::<Result<Vec<_>>>()?;
            stream.forward_payload.push(block);
        }

        let code_bytes = sample_count
            .checked_mul(usize::from(bits))
            .ok_or_else(|| Error::Stream("sample count overflows".into()))?
            .div_ceil(8);
        let packed = r.take(code_bytes)?;
        stream.codes = unpack(packed, bits, sample_count)
            .map(|u| Code::from_unsigned(u, bits))
            .collect();

        if r.pos != bytes.len() {
            return Err(Error::Stream(format!(
                "{} trailing bytes after codes",
                bytes.len() - r.pos
            )));
        }
        Ok(stream)
    }
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: usize) -> Result<()> {
        let v =
            u32::try_from(v).map_err(|_| Error::Config(format!("{v} does not fit in 32 bits")))?;
        self.buf.extend_from_slice(&v.to_le_bytes());
        Ok(())
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Stream(format!("truncated stream at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        let mut a = [0u8; 8];
        a.copy_from_slice(self.take(8)?);
        Ok(u64::from_le_bytes(a))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
}

/// Packs values most-significant-bit first; the last byte is zero-filled.
#[derive(Default)]
struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    filled: u8,
}

impl BitWriter {
    fn push(&mut self, value: u32, width: u8) {
        for shift in (0..width).rev() {
            self.acc = (self.acc << 1) | ((value >> shift) & 1);
            self.filled += 1;
            if self.filled == 8 {
                self.out.push(self.acc as u8);
                self.acc = 0;
                self.filled = 0;
            }
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.out.push((self.acc << (8 - self.filled)) as u8);
        }
        self.out
    }
}

fn unpack(bytes: &[u8], width: u8, count: usize) -> impl Iterator<Item = u32> + '_ {
    let width = usize::from(width);
    (0..count).map(move |k| {
        let mut v = 0u32;
        for b in k * width..(k + 1) * width {
            let bit = (bytes[b / 8] >> (7 - b % 8)) & 1;
            v = (v << 1) | u32::from(bit);
        }
        v
    })
}
