//! PCM file I/O and the segmental SNR metric.
//!
//! Samples are held as `f64` in normalized amplitude `[-1, 1]`. Two containers
//! are supported: headerless little-endian 16-bit PCM (`raw16le`) and RIFF/WAVE
//! with 16-bit integer PCM.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Per-segment SNR values are clamped into this range (dB) before averaging.
pub const SEGSNR_FLOOR_DB: f64 = -10.0;
pub const SEGSNR_CEIL_DB: f64 = 80.0;

const PCM_SCALE: f64 = 32768.0;

/// A mono PCM signal in normalized amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl SampleBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        Self {
            samples,
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Returns an error if any sample is non-finite or the rate is zero.
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate_hz == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        if let Some(i) = self.samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        Ok(())
    }
}

/// On-disk container for PCM samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcmFormat {
    Raw16Le,
    Wav,
}

impl PcmFormat {
    /// Guesses the container from a file extension; anything but `.wav` is raw.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("wav") => PcmFormat::Wav,
            _ => PcmFormat::Raw16Le,
        }
    }
}

impl FromStr for PcmFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw16le" | "raw" => Ok(PcmFormat::Raw16Le),
            "wav" => Ok(PcmFormat::Wav),
            other => Err(Error::Config(format!("unknown pcm format '{other}'"))),
        }
    }
}

/// Default sample rate assumed for headerless input.
pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 8000;

pub fn int16_to_unit(v: i16) -> f64 {
    f64::from(v) / PCM_SCALE
}

pub fn unit_to_int16(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * PCM_SCALE)
        .round()
        .clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16
}

/// Loads a mono signal. Headerless input is tagged with [`DEFAULT_SAMPLE_RATE_HZ`].
pub fn load_pcm(path: &Path, format: PcmFormat) -> Result<SampleBuffer> {
    let buffer = match format {
        PcmFormat::Raw16Le => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            if bytes.len() % 2 != 0 {
                return Err(Error::format(path, "raw16le byte length is odd"));
            }
            let samples = bytes
                .chunks_exact(2)
                .map(|b| int16_to_unit(i16::from_le_bytes([b[0], b[1]])))
                .collect();
            SampleBuffer::new(samples, DEFAULT_SAMPLE_RATE_HZ)
        }
        PcmFormat::Wav => load_wav(path)?,
    };
    if buffer.is_empty() {
        return Err(Error::format(path, "signal has zero length"));
    }
    Ok(buffer)
}

fn load_wav(path: &Path) -> Result<SampleBuffer> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = hound::WavReader::new(std::io::BufReader::new(file))
        .map_err(|e| Error::format(path, e.to_string()))?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::format(
            path,
            format!(
                "expected 16-bit integer PCM, found {}-bit {:?}",
                spec.bits_per_sample, spec.sample_format
            ),
        ));
    }
    let channels = usize::from(spec.channels.max(1));
    if channels > 1 {
        log::warn!(
            "{}: {} channels, using the first one",
            path.display(),
            channels
        );
    }
    let mut samples = Vec::with_capacity(reader.len() as usize / channels);
    for (i, s) in reader.samples::<i16>().enumerate() {
        let s = s.map_err(|e| Error::format(path, e.to_string()))?;
        if i % channels == 0 {
            samples.push(int16_to_unit(s));
        }
    }
    Ok(SampleBuffer::new(samples, spec.sample_rate))
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    }
}

/// Writes a signal, clamping to `[-1, 1]` and rounding to 16-bit integers.
pub fn store_pcm(buffer: &SampleBuffer, path: &Path, format: PcmFormat) -> Result<()> {
    buffer.validate()?;
    match format {
        PcmFormat::Raw16Le => {
            let bytes: Vec<u8> = buffer
                .samples
                .iter()
                .flat_map(|&x| unit_to_int16(x).to_le_bytes())
                .collect();
            fs::write(path, bytes).map_err(|e| Error::io(path, e))
        }
        PcmFormat::Wav => {
            let spec = hound::WavSpec {
                channels: 1,
                sample_rate: buffer.sample_rate_hz,
                bits_per_sample: 16,
                sample_format: hound::SampleFormat::Int,
            };
            let mut writer =
                hound::WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
            for &x in &buffer.samples {
                writer
                    .write_sample(unit_to_int16(x))
                    .map_err(|e| wav_error(path, e))?;
            }
            writer.finalize().map_err(|e| wav_error(path, e))
        }
    }
}

/// Segmental SNR summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SegSnrReport {
    pub segsnr_db: f64,
    pub per_segment_db: Vec<f64>,
    pub segment_len: usize,
    pub std_db: f64,
}

impl SegSnrReport {
    /// Builds a report from already-computed segment values.
    pub fn from_segments(per_segment_db: Vec<f64>, segment_len: usize) -> Self {
        let (segsnr_db, std_db) = mean_std(&per_segment_db);
        Self {
            segsnr_db,
            per_segment_db,
            segment_len,
            std_db,
        }
    }
}

/// Mean and population standard deviation. Empty input yields zeros.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// SNR of one segment in dB, clamped to `[SEGSNR_FLOOR_DB, SEGSNR_CEIL_DB]`.
///
/// A segment with zero error scores the ceiling, including an all-silent one.
pub fn segment_snr_db(original: &[f64], decoded: &[f64]) -> f64 {
    let (signal, noise) = original
        .iter()
        .zip(decoded)
        .fold((0.0, 0.0), |(s, n), (&x, &y)| {
            (s + x * x, n + (x - y) * (x - y))
        });
    if noise == 0.0 {
        return SEGSNR_CEIL_DB;
    }
    if signal == 0.0 {
        return SEGSNR_FLOOR_DB;
    }
    (10.0 * (signal / noise).log10()).clamp(SEGSNR_FLOOR_DB, SEGSNR_CEIL_DB)
}

/// Segmental SNR over consecutive non-overlapping segments; a trailing partial
/// segment is dropped.
pub fn segsnr(
    original: &SampleBuffer,
    decoded: &SampleBuffer,
    segment_len: usize,
) -> Result<SegSnrReport> {
    segsnr_slices(&original.samples, &decoded.samples, segment_len)
}

pub fn segsnr_slices(
    original: &[f64],
    decoded: &[f64],
    segment_len: usize,
) -> Result<SegSnrReport> {
    if original.len() != decoded.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: original {} vs decoded {}",
            original.len(),
            decoded.len()
        )));
    }
    if segment_len == 0 {
        return Err(Error::InvalidInput(
            "segment length must be positive".into(),
        ));
    }
    if original.len() < segment_len {
        return Err(Error::InvalidInput(format!(
            "signal of {} samples is shorter than one {segment_len}-sample segment",
            original.len()
        )));
    }
    let per_segment = original
        .chunks_exact(segment_len)
        .zip(decoded.chunks_exact(segment_len))
        .map(|(x, y)| segment_snr_db(x, y))
        .collect();
    Ok(SegSnrReport::from_segments(per_segment, segment_len))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(bytes: &[u8]) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        fs::write(f.path(), bytes).unwrap();
        f
    }

    #[test]
    fn raw_scaling() {
        let f = write_tmp(&[0x00, 0x40]);
        assert_eq!(
            load_pcm(f.path(), PcmFormat::Raw16Le).unwrap().samples,
            vec![0.5]
        );
        let f = write_tmp(&[0x00, 0x00]);
        assert_eq!(
            load_pcm(f.path(), PcmFormat::Raw16Le).unwrap().samples,
            vec![0.0]
        );
    }

    #[test]
    fn raw_rejects_odd_and_empty() {
        let f = write_tmp(&[0x00, 0x40, 0x01]);
        assert!(matches!(
            load_pcm(f.path(), PcmFormat::Raw16Le),
            Err(Error::Format { .. })
        ));
        let f = write_tmp(&[]);
        assert!(matches!(
            load_pcm(f.path(), PcmFormat::Raw16Le),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_pcm(Path::new("/nonexistent/x.raw"), PcmFormat::Raw16Le).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.raw"));
    }

    #[test]
    fn store_clamps_and_rounds() {
        let f = tempfile::NamedTempFile::new().unwrap();
        let buf = SampleBuffer::new(vec![1.5, 0.0, -2.0], 8000);
        store_pcm(&buf, f.path(), PcmFormat::Raw16Le).unwrap();
        let bytes = fs::read(f.path()).unwrap();
        let ints: Vec<i16> = bytes
            .chunks_exact(2)
            .map(|b| i16::from_le_bytes([b[0], b[1]]))
            .collect();
        assert_eq!(ints, vec![32767, 0, -32768]);
    }

    #[test]
    fn wav_round_trip_three_samples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let buf = SampleBuffer::new(vec![0.25, -0.7, 0.99], 16000);
        store_pcm(&buf, &path, PcmFormat::Wav).unwrap();
        let back = load_pcm(&path, PcmFormat::Wav).unwrap();
        assert_eq!(back.sample_rate_hz, 16000);
        for (a, b) in buf.samples.iter().zip(&back.samples) {
            assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn wav_stereo_takes_first_channel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for s in [100i16, -1, 200, -2, 300, -3] {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
        let back = load_pcm(&path, PcmFormat::Wav).unwrap();
        assert_eq!(
            back.samples,
            vec![100.0 / 32768.0, 200.0 / 32768.0, 300.0 / 32768.0]
        );
    }

    #[test]
    fn wav_rejects_garbage_header() {
        let f = write_tmp(b"RIFF0000WAVEjunkjunkjunk");
        let err = load_pcm(f.path(), PcmFormat::Wav);
        assert!(matches!(err, Err(Error::Format { .. })), "{err:?}");
    }

    #[test]
    fn segsnr_identical_hits_ceiling() {
        let x: Vec<f64> = (0..300).map(|i| (i as f64 * 0.1).sin()).collect();
        let r = segsnr_slices(&x, &x, 100).unwrap();
        assert_eq!(r.per_segment_db, vec![80.0; 3]);
        assert_eq!(r.segsnr_db, 80.0);
        assert_eq!(r.std_db, 0.0);
    }

    #[test]
    fn segsnr_zero_decoded_is_zero_db() {
        let x: Vec<f64> = (0..250)
            .map(|i| 0.3 + (i as f64 * 0.1).sin() * 0.1)
            .collect();
        let r = segsnr_slices(&x, &vec![0.0; 250], 100).unwrap();
        // trailing 50 samples dropped
        assert_eq!(r.per_segment_db.len(), 2);
        for v in r.per_segment_db {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn segsnr_sine_with_white_error() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let n = 200_000;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 8000.0).sin())
            .collect();
        let y: Vec<f64> = x.iter().map(|v| v + noise.sample(&mut rng)).collect();
        let r = segsnr_slices(&x, &y, n).unwrap();
        let expected = 10.0 * (0.5f64 / 0.01).log10();
        assert!((r.segsnr_db - expected).abs() < 0.5, "{}", r.segsnr_db);
    }

    #[test]
    fn segsnr_errors() {
        assert!(segsnr_slices(&[0.0; 10], &[0.0; 9], 5).is_err());
        assert!(segsnr_slices(&[0.0; 10], &[0.0; 10], 0).is_err());
        assert!(segsnr_slices(&[0.0; 10], &[0.0; 10], 11).is_err());
    }

    #[test]
    fn silent_segment_with_error_hits_floor() {
        assert_eq!(segment_snr_db(&[0.0, 0.0], &[0.1, 0.0]), SEGSNR_FLOOR_DB);
    }
}
