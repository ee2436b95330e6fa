//! SEGSNR sweeps over methods, quantizer resolutions and window settings.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::settings::{build_config, Settings, CODEC_KEYS, SWEEP_KEYS};
use crate::codec::{encode_with_stats, CodecConfig, EncodeStats, MethodSpec};
use crate::error::{Error, Result};
use crate::signal_io::{
    int16_to_unit, load_pcm, mean_std, segsnr, unit_to_int16, PcmFormat, SampleBuffer, SegSnrReport,
};

pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 17] = [
    "schema_version",
    "method",
    "predictor",
    "adaptation",
    "lpc_order",
    "nq",
    "frame_len",
    "training_window",
    "computing_window",
    "segment_len",
    "seed",
    "files",
    "segsnr_db",
    "std_db",
    "selected_prev_fraction",
    "neural_frame_fraction",
    "samples_per_second",
];

/// Window settings of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Windows {
    pub frame_len: usize,
    pub training_window: usize,
    pub computing_window: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub corpus: Vec<PathBuf>,
    pub methods: Vec<MethodSpec>,
    pub bits_list: Vec<u8>,
    pub frame_lens: Vec<usize>,
    /// Empty means block-adaptive (training window = frame length).
    pub training_windows: Vec<usize>,
    /// Empty means block-adaptive (computing window = frame length).
    pub computing_windows: Vec<usize>,
    pub seeds: Vec<u64>,
    /// SEGSNR segment length; the frame length when `None`.
    pub segment_len: Option<usize>,
    pub output_path: Option<PathBuf>,
    /// Codec knobs applied to every cell.
    pub knobs: Settings,
}

impl SweepSpec {
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        settings.check_keys(&[SWEEP_KEYS, CODEC_KEYS])?;
        let mut knobs = Settings::default();
        for k in CODEC_KEYS {
            if let Some(v) = settings.get(k) {
                knobs.set(k, v);
            }
        }
        let spec = Self {
            corpus: settings.paths("corpus").unwrap_or_default(),
            methods: settings.list("methods")?.unwrap_or_default(),
            bits_list: settings.list("bits")?.unwrap_or_default(),
            frame_lens: settings.list("frame_lens")?.unwrap_or_else(|| vec![100]),
            training_windows: settings.list("training_windows")?.unwrap_or_default(),
            computing_windows: settings.list("computing_windows")?.unwrap_or_default(),
            seeds: settings.list("seeds")?.unwrap_or_else(|| vec![0]),
            segment_len: settings.parsed("segment_len")?,
            output_path: settings.get("output").map(PathBuf::from),
            knobs,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.corpus.is_empty() {
            return Err(Error::Config("sweep corpus is empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("sweep has no methods".into()));
        }
        if self.bits_list.is_empty() {
            return Err(Error::Config("sweep has no quantizer resolutions".into()));
        }
        if self.frame_lens.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config(
                "sweep needs at least one frame length and seed".into(),
            ));
        }
        if self.segment_len == Some(0) {
            return Err(Error::Config("segment_len must be positive".into()));
        }
        Ok(())
    }

    pub fn windows(&self) -> Vec<Windows> {
        let mut out = Vec::new();
        for &frame_len in &self.frame_lens {
            let tws = if self.training_windows.is_empty() {
                vec![frame_len]
            } else {
                self.training_windows.clone()
            };
            let cws = if self.computing_windows.is_empty() {
                vec![frame_len]
            } else {
                self.computing_windows.clone()
            };
            for &training_window in &tws {
                for &computing_window in &cws {
                    out.push(Windows {
                        frame_len,
                        training_window,
                        computing_window,
                    });
                }
            }
        }
        out
    }

    /// Every cell configuration in output order: method, Nq, windows, seed.
    pub fn cells(&self) -> Result<Vec<CodecConfig>> {
        let mut cells = Vec::new();
        for &method in &self.methods {
            for &bits in &self.bits_list {
                for w in self.windows() {
                    for &seed in &self.seeds {
                        let cfg = build_config(
                            &self.knobs,
                            method,
                            bits,
                            w.frame_len,
                            w.training_window,
                            w.computing_window,
                            seed,
                        )
                        .map_err(|e| {
                            Error::Config(format!(
                                "{method} Nq={bits} frame={} tw={} cw={}: {e}",
                                w.frame_len, w.training_window, w.computing_window
                            ))
                        })?;
                        cells.push(cfg);
                    }
                }
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub config: CodecConfig,
    pub segment_len: usize,
    pub files: usize,
    pub segsnr_db: f64,
    pub std_db: f64,
    pub selected_prev_fraction: Option<f64>,
    pub neural_frame_fraction: f64,
    pub samples_per_second: f64,
}

impl ResultRow {
    pub fn nq(&self) -> u8 {
        self.config.quantizer.bits
    }

    fn csv_record(&self) -> Vec<String> {
        let c = &self.config;
        vec![
            CSV_SCHEMA_VERSION.to_string(),
            self.method.clone(),
            format!("{:?}", c.predictor).to_ascii_lowercase(),
            format!("{:?}", c.adaptation).to_ascii_lowercase(),
            c.lpc_order.to_string(),
            c.quantizer.bits.to_string(),
            c.frame_len.to_string(),
            c.training_window.to_string(),
            c.computing_window.to_string(),
            self.segment_len.to_string(),
            c.rng_seed.to_string(),
            self.files.to_string(),
            format!("{:.6}", self.segsnr_db),
            format!("{:.6}", self.std_db),
            self.selected_prev_fraction
                .map(|f| format!("{f:.6}"))
                .unwrap_or_default(),
            format!("{:.6}", self.neural_frame_fraction),
            format!("{:.1}", self.samples_per_second),
        ]
    }
}

/// Outcome of coding one file.
#[derive(Debug, Clone)]
pub struct FileResult {
    pub report: SegSnrReport,
    pub stats: EncodeStats,
    /// Decoder output as written to a 16-bit file.
    pub decoded: SampleBuffer,
}

/// Rounds a reconstruction to the 16-bit grid a decoded file is stored on.
pub fn to_output_pcm(reconstruction: &SampleBuffer) -> SampleBuffer {
    SampleBuffer::new(
        reconstruction
            .samples
            .iter()
            .map(|&x| int16_to_unit(unit_to_int16(x)))
            .collect(),
        reconstruction.sample_rate_hz,
    )
}

/// Encodes one signal and scores the 16-bit decoder output against it.
pub fn evaluate(
    signal: &SampleBuffer,
    config: &CodecConfig,
    segment_len: usize,
) -> Result<FileResult> {
    let out = encode_with_stats(signal, config)?;
    let decoded = to_output_pcm(&out.reconstruction);
    let report = segsnr(signal, &decoded, segment_len)?;
    Ok(FileResult {
        report,
        stats: out.stats,
        decoded,
    })
}

/// Pools the per-segment values and warm-start statistics of several files.
pub fn aggregate(
    config: &CodecConfig,
    segment_len: usize,
    results: &[FileResult],
    samples_per_second: f64,
) -> ResultRow {
    let pooled: Vec<f64> = results
        .iter()
        .flat_map(|r| r.report.per_segment_db.iter().copied())
        .collect();
    let (segsnr_db, std_db) = mean_std(&pooled);
    let refits: usize = results.iter().map(|r| r.stats.mlp_refits).sum();
    let prev: usize = results.iter().map(|r| r.stats.mlp_prev_selected).sum();
    let frames: usize = results.iter().map(|r| r.stats.frames.len()).sum();
    let neural: f64 = results
        .iter()
        .map(|r| r.stats.neural_frame_fraction() * r.stats.frames.len() as f64)
        .sum();
    ResultRow {
        method: config.method_label(),
        config: config.clone(),
        segment_len,
        files: results.len(),
        segsnr_db,
        std_db,
        selected_prev_fraction: (refits > 0).then(|| prev as f64 / refits as f64),
        neural_frame_fraction: if frames > 0 {
            neural / frames as f64
        } else {
            0.0
        },
        samples_per_second,
    }
}

/// Runs one cell over an in-memory corpus.
pub fn run_cell(
    corpus: &[SampleBuffer],
    config: &CodecConfig,
    segment_len: usize,
) -> Result<ResultRow> {
    let started = Instant::now();
    let results = corpus
        .iter()
        .map(|s| evaluate(s, config, segment_len))
        .collect::<Result<Vec<_>>>()?;
    let samples: usize = corpus.iter().map(SampleBuffer::len).sum();
    let elapsed = started.elapsed().as_secs_f64();
    let sps = if elapsed > 0.0 {
        samples as f64 / elapsed
    } else {
        0.0
    };
    Ok(aggregate(config, segment_len, &results, sps))
}

/// Runs every cell over an in-memory corpus; rows follow [`SweepSpec::cells`] order.
pub fn run_sweep_on(spec: &SweepSpec, corpus: &[SampleBuffer]) -> Result<Vec<ResultRow>> {
    let cells = spec.cells()?;
    cells
        .par_iter()
        .map(|cfg| run_cell(corpus, cfg, spec.segment_len.unwrap_or(cfg.frame_len)))
        .collect()
}

pub fn load_corpus(paths: &[PathBuf]) -> Result<Vec<SampleBuffer>> {
    paths
        .iter()
        .map(|p| load_pcm(p, PcmFormat::from_path(p)))
        .collect()
}

/// Loads the corpus, runs the sweep and writes the CSV if an output path is set.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let corpus = load_corpus(&spec.corpus)?;
    let rows = run_sweep_on(spec, &corpus)?;
    if let Some(path) = &spec.output_path {
        write_csv_file(path, &rows)?;
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(to_err)?;
    for row in rows {
        w.write_record(row.csv_record()).map_err(to_err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}

pub fn write_csv_file(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    write_csv(std::io::BufWriter::new(file), rows).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(msg),
        },
        other => other,
    })
}
