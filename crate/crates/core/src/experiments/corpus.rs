//! Synthetic test signals.
//!
//! Every generator is a pure function of `(kind, length, seed)` and returns
//! a signal scaled so its peak magnitude is [`PEAK`].

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::signal_io::{store_pcm, PcmFormat, SampleBuffer, DEFAULT_SAMPLE_RATE_HZ};

pub const PEAK: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorpusKind {
    /// Stationary AR(2) process with a random resonance.
    Ar,
    /// `tanh` of a strongly driven AR(2) process.
    TanhAr,
    /// Sum of a few sinusoids with slow amplitude and frequency modulation.
    Sines,
    /// Alternation of pulse-excited resonances, filtered noise and near-silence.
    Speechlike,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 4] = [
        CorpusKind::Ar,
        CorpusKind::TanhAr,
        CorpusKind::Sines,
        CorpusKind::Speechlike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::Ar => "ar",
            CorpusKind::TanhAr => "tanh-ar",
            CorpusKind::Sines => "sines",
            CorpusKind::Speechlike => "speechlike",
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorpusKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown corpus kind '{s}'")))
    }
}

pub fn generate(kind: CorpusKind, len: usize, seed: u64) -> SampleBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = match kind {
        CorpusKind::Ar => ar2(len, &mut rng),
        CorpusKind::TanhAr => tanh_ar2(len, &mut rng),
        CorpusKind::Sines => sines(len, &mut rng),
        CorpusKind::Speechlike => speechlike(len, &mut rng),
    };
    SampleBuffer::new(normalize_peak(raw), DEFAULT_SAMPLE_RATE_HZ)
}

/// `count` signals with consecutive seeds starting at `seed`.
pub fn generate_corpus(kind: CorpusKind, count: usize, len: usize, seed: u64) -> Vec<SampleBuffer> {
    (0..count as u64)
        .map(|i| generate(kind, len, seed.wrapping_add(i)))
        .collect()
}

/// Writes a corpus as 16-bit wav files named `<kind>_<index>.wav`.
pub fn write_corpus(
    dir: &Path,
    kind: CorpusKind,
    count: usize,
    len: usize,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    generate_corpus(kind, count, len, seed)
        .iter()
        .enumerate()
        .map(|(i, buf)| {
            let path = dir.join(format!("{}_{i:03}.wav", kind.name()));
            store_pcm(buf, &path, PcmFormat::Wav)?;
            Ok(path)
        })
        .collect()
}

fn normalize_peak(mut x: Vec<f64>) -> Vec<f64> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        let g = PEAK / peak;
        x.iter_mut().for_each(|v| *v *= g);
    }
    x
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Coefficients of a stable two-pole resonator at `freq` Hz with pole radius `radius`.
fn resonator(freq: f64, radius: f64) -> (f64, f64) {
    let w = 2.0 * PI * freq / f64::from(DEFAULT_SAMPLE_RATE_HZ);
    (2.0 * radius * w.cos(), -radius * radius)
}

fn ar_process(len: usize, a1: f64, a2: f64, rng: &mut impl Rng) -> Vec<f64> {
    let warmup = 200;
    let mut out = Vec::with_capacity(len);
    let (mut y1, mut y2) = (0.0, 0.0);
    for n in 0..len + warmup {
        let y = a1 * y1 + a2 * y2 + gaussian(rng);
        y2 = y1;
        y1 = y;
        if n >= warmup {
            out.push(y);
        }
    }
    out
}

fn unit_variance(mut x: Vec<f64>) -> Vec<f64> {
    let n = x.len().max(1) as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd > 0.0 {
        x.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    }
    x
}

fn ar2(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    let (a1, a2) = resonator(
        rng.random_range(200.0..1200.0),
        rng.random_range(0.85..0.97),
    );
    ar_process(len, a1, a2, rng)
}

fn tanh_ar2(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    let (a1, a2) = resonator(rng.random_range(150.0..600.0), rng.random_range(0.9..0.97));
    let gain = rng.random_range(2.0..3.0);
    unit_variance(ar_process(len, a1, a2, rng))
        .into_iter()
        .map(|s| (gain * s).tanh())
        .collect()
}

fn sines(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    let fs = f64::from(DEFAULT_SAMPLE_RATE_HZ);
    let partials: Vec<(f64, f64, f64, f64)> = (0..rng.random_range(2..5))
        .map(|_| {
            (
                rng.random_range(100.0..1500.0), // carrier Hz
                rng.random_range(0.2..1.0),      // amplitude
                rng.random_range(0.5..4.0),      // AM rate Hz
                rng.random_range(0.0..20.0),     // FM depth Hz
            )
        })
        .collect();
    let mut phases = vec![0.0; partials.len()];
    (0..len)
        .map(|n| {
            let t = n as f64 / fs;
            partials
                .iter()
                .zip(phases.iter_mut())
                .map(|(&(f, a, am, fm), ph)| {
                    *ph += 2.0 * PI * (f + fm * (2.0 * PI * 0.7 * t).sin()) / fs;
                    a * (0.6 + 0.4 * (2.0 * PI * am * t).sin()) * ph.sin()
                })
                .sum()
        })
        .collect()
}

fn speechlike(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    // Two formant resonators in cascade; their state carries across segments.
    let mut f1 = [0.0f64; 2];
    let mut f2 = [0.0f64; 2];
    let mut hp_prev = 0.0;
    while out.len() < len {
        let seg_len = rng.random_range(400..1200).min(len - out.len());
        let kind: f64 = rng.random();
        let (c1, c2) = (
            resonator(rng.random_range(400.0..900.0), 0.96),
            resonator(rng.random_range(1100.0..2300.0), 0.93),
        );
        let amp = rng.random_range(0.3..1.0);
        if kind < 0.6 {
            let mut period = rng.random_range(40.0..100.0);
            let mut next_pulse = 0.0;
            for n in 0..seg_len {
                let env = amp * (PI * n as f64 / seg_len as f64).sin().max(0.05);
                let exc = if n as f64 >= next_pulse {
                    period *= 1.0 + 0.02 * gaussian(rng);
                    next_pulse += period.clamp(30.0, 120.0);
                    1.0
                } else {
                    0.0
                } + 0.02 * gaussian(rng);
                let y1 = c1.0 * f1[0] + c1.1 * f1[1] + exc;
                f1 = [y1, f1[0]];
                let y2 = c2.0 * f2[0] + c2.1 * f2[1] + y1;
                f2 = [y2, f2[0]];
                out.push(env * y2 * 0.05);
            }
        } else if kind < 0.9 {
            for _ in 0..seg_len {
                let w = gaussian(rng);
                let hp = w - 0.9 * hp_prev;
                hp_prev = w;
                out.push(amp * 0.15 * hp);
            }
        } else {
            for _ in 0..seg_len {
                out.push(0.002 * gaussian(rng));
            }
        }
    }
    out.truncate(len);
    out
}
