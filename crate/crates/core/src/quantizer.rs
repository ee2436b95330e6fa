//! Uniform midrise quantizer with one-word-memory (Jayant) step adaptation.
//!
//! With `L = 2^bits` levels and step `Δ`, a residual `e` maps to the level
//! index `i = clamp(floor(e/Δ), −L/2, L/2−1)` and reconstructs to
//! `(i + ½)·Δ`. The step for the next sample is `Δ·M[m(i)]` clamped into
//! `[Δ_min, Δ_max]`, where `m(i)` is the magnitude rank of the level
//! (0 for the two innermost levels).

use crate::error::{Error, Result};

pub const MIN_BITS: u8 = 2;
pub const MAX_BITS: u8 = 5;

pub const DEFAULT_DELTA_MIN: f64 = 1e-5;
pub const DEFAULT_DELTA_MAX: f64 = 0.5;
pub const DEFAULT_DELTA_INIT: f64 = 0.01;

/// Speech step multipliers indexed by magnitude rank, for 2 to 5 bits.
pub fn jayant_multipliers(bits: u8) -> Option<Vec<f64>> {
    let table = match bits {
        2 => vec![0.8, 1.6],
        3 => vec![0.9, 0.9, 1.25, 1.75],
        4 => vec![0.9, 0.9, 0.9, 0.9, 1.2, 1.6, 2.0, 2.4],
        5 => {
            let mut t = vec![0.9; 8];
            t.extend_from_slice(&[1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6]);
            t
        }
        _ => return None,
    };
    Some(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerConfig {
    pub bits: u8,
    pub multipliers: Vec<f64>,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_init: f64,
}

impl QuantizerConfig {
    /// Default multipliers and step limits for `bits`.
    pub fn jayant(bits: u8) -> Result<Self> {
        let multipliers = jayant_multipliers(bits)
            .ok_or_else(|| Error::Config(format!("quantizer bits must be 2..=5, got {bits}")))?;
        Ok(Self {
            bits,
            multipliers,
            delta_min: DEFAULT_DELTA_MIN,
            delta_max: DEFAULT_DELTA_MAX,
            delta_init: DEFAULT_DELTA_INIT,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_BITS..=MAX_BITS).contains(&self.bits) {
            return Err(Error::Config(format!(
                "quantizer bits must be 2..=5, got {}",
                self.bits
            )));
        }
        if self.multipliers.len() != self.half_levels() as usize {
            return Err(Error::Config(format!(
                "{} bits needs {} multipliers, got {}",
                self.bits,
                self.half_levels(),
                self.multipliers.len()
            )));
        }
        if self
            .multipliers
            .iter()
            .any(|m| !(m.is_finite() && *m > 0.0))
        {
            return Err(Error::Config(
                "multipliers must be positive and finite".into(),
            ));
        }
        if !(self.delta_min > 0.0
            && self.delta_min <= self.delta_init
            && self.delta_init <= self.delta_max
            && self.delta_max.is_finite())
        {
            return Err(Error::Config(
                "need 0 < delta_min <= delta_init <= delta_max < inf".into(),
            ));
        }
        Ok(())
    }

    /// `L/2`, the number of levels on each side of zero.
    pub fn half_levels(&self) -> i32 {
        1 << (self.bits - 1)
    }

    pub fn initial_state(&self) -> QuantizerState {
        QuantizerState {
            delta: self.delta_init,
        }
    }

    fn adapt(&self, delta: f64, code: Code) -> QuantizerState {
        QuantizerState {
            delta: (delta * self.multipliers[code.magnitude()])
                .clamp(self.delta_min, self.delta_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerState {
    pub delta: f64,
}

/// Signed level index in `[−2^(bits−1), 2^(bits−1) − 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Code(pub i32);

impl Code {
    /// Magnitude rank: `|i + ½| − ½`.
    pub fn magnitude(self) -> usize {
        if self.0 >= 0 {
            self.0 as usize
        } else {
            (-self.0 - 1) as usize
        }
    }

    /// Offset-binary form used in the bitstream.
    pub fn to_unsigned(self, bits: u8) -> u32 {
        (self.0 + (1 << (bits - 1))) as u32
    }

    pub fn from_unsigned(value: u32, bits: u8) -> Self {
        Code(value as i32 - (1 << (bits - 1)))
    }

    pub fn in_range(self, bits: u8) -> bool {
        let half = 1 << (bits - 1);
        (-half..half).contains(&self.0)
    }
}

/// Quantizes one residual. Reconstruction uses the current step; the returned
/// state carries the adapted step.
pub fn quantize(
    e: f64,
    state: QuantizerState,
    config: &QuantizerConfig,
) -> (Code, f64, QuantizerState) {
    let half = config.half_levels();
    let delta = state.delta;
    let raw = (e / delta).floor();
    let i = if raw.is_nan() {
        0
    } else {
        raw.clamp(f64::from(-half), f64::from(half - 1)) as i32
    };
    let code = Code(i);
    let e_hat = (f64::from(i) + 0.5) * delta;
    (code, e_hat, config.adapt(delta, code))
}

/// Decoder side of [`quantize`]: the same reconstruction and step update from
/// the code alone.
pub fn dequantize(
    code: Code,
    state: QuantizerState,
    config: &QuantizerConfig,
) -> Result<(f64, QuantizerState)> {
    if !code.in_range(config.bits) {
        return Err(Error::Stream(format!(
            "code {} out of range for {} bits",
            code.0, config.bits
        )));
    }
    let e_hat = (f64::from(code.0) + 0.5) * state.delta;
    Ok((e_hat, config.adapt(state.delta, code)))
}
