use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use nladpcm::experiments::{self, CorpusKind, Settings, SweepSpec};
use nladpcm::signal_io::{load_pcm, segsnr, store_pcm, PcmFormat};
use nladpcm::{decode, encode_with_stats, EncodedStream, Error};

/// Adaptive differential PCM with linear and neural predictors.
#[derive(Parser)]
#[command(name = "nladpcm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a 16-bit PCM file into a coded stream.
    Encode(EncodeArgs),
    /// Decode a coded stream back to 16-bit PCM.
    Decode(DecodeArgs),
    /// Segmental SNR of a decoded file against the original.
    Eval(EvalArgs),
    /// Run a SEGSNR sweep and write a CSV table.
    Sweep(SweepArgs),
    /// Write a synthetic test corpus as wav files.
    GenCorpus(GenCorpusArgs),
}

#[derive(Args)]
struct SettingsArgs {
    /// `key = value` configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra setting, e.g. `--set n_random=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl SettingsArgs {
    fn load(&self) -> anyhow::Result<Settings> {
        let mut settings = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            settings.set(k, v.trim());
        }
        Ok(settings)
    }
}

#[derive(Args)]
struct EncodeArgs {
    input: PathBuf,
    output: PathBuf,
    /// Method name such as ADPCMB-LPC10, ADPCMF-MLP or ADPCMB-HYBRID.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    bits: Option<u8>,
    #[arg(long)]
    frame_len: Option<usize>,
    #[arg(long)]
    training_window: Option<usize>,
    #[arg(long)]
    computing_window: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Input format (raw16le or wav); guessed from the extension otherwise.
    #[arg(long)]
    format: Option<PcmFormat>,
    /// Also write the encoder's reconstruction here.
    #[arg(long)]
    reconstruction: Option<PathBuf>,
    #[command(flatten)]
    settings: SettingsArgs,
}

#[derive(Args)]
struct DecodeArgs {
    input: PathBuf,
    output: PathBuf,
    /// Output format (raw16le or wav); guessed from the extension otherwise.
    #[arg(long)]
    format: Option<PcmFormat>,
}

#[derive(Args)]
struct EvalArgs {
    original: PathBuf,
    decoded: PathBuf,
    #[arg(long, default_value_t = 100)]
    segment_len: usize,
    /// Print the per-segment values too.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Corpus files; replaces the `corpus` setting.
    corpus: Vec<PathBuf>,
    /// Comma-separated method names.
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated quantizer resolutions.
    #[arg(long)]
    bits: Option<String>,
    #[arg(long)]
    frame_lens: Option<String>,
    #[arg(long)]
    training_windows: Option<String>,
    #[arg(long)]
    computing_windows: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    segment_len: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    settings: SettingsArgs,
}

#[derive(Args)]
struct GenCorpusArgs {
    dir: PathBuf,
    /// One of ar, tanh-ar, sines, speechlike.
    #[arg(long, default_value = "speechlike")]
    kind: CorpusKind,
    #[arg(long, default_value_t = 4)]
    count: usize,
    #[arg(long, default_value_t = 16000)]
    len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn format_for(path: &Path, explicit: Option<PcmFormat>) -> PcmFormat {
    explicit.unwrap_or_else(|| PcmFormat::from_path(path))
}

fn set_opt<T: ToString>(settings: &mut Settings, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        settings.set(key, v.to_string());
    }
}

fn run_encode(args: &EncodeArgs) -> anyhow::Result<()> {
    let mut settings = args.settings.load()?;
    set_opt(&mut settings, "method", &args.method);
    set_opt(&mut settings, "bits", &args.bits);
    set_opt(&mut settings, "frame_len", &args.frame_len);
    set_opt(&mut settings, "training_window", &args.training_window);
    set_opt(&mut settings, "computing_window", &args.computing_window);
    set_opt(&mut settings, "seed", &args.seed);
    let config = settings.codec_config()?;
    let signal = load_pcm(&args.input, format_for(&args.input, args.format))?;
    if config.computing_window == 1 && signal.len() > 8000 {
        log::warn!(
            "computing window of 1 sample refits on every sample; {} samples will be slow",
            signal.len()
        );
    }
    let out = encode_with_stats(&signal, &config)?;
    let bytes = out.stream.to_bytes()?;
    std::fs::write(&args.output, &bytes).map_err(|e| Error::Io {
        path: args.output.clone(),
        source: e,
    })?;
    if let Some(path) = &args.reconstruction {
        store_pcm(&out.reconstruction, path, PcmFormat::from_path(path))?;
    }
    log::info!(
        "{}: {} samples, {} bytes, {} refits",
        config.method_label(),
        signal.len(),
        bytes.len(),
        out.stats.refits
    );
    Ok(())
}

fn run_decode(args: &DecodeArgs) -> anyhow::Result<()> {
    let bytes = std::fs::read(&args.input).map_err(|e| Error::Io {
        path: args.input.clone(),
        source: e,
    })?;
    let stream = EncodedStream::from_bytes(&bytes)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let decoded = decode(&stream)?;
    store_pcm(
        &decoded,
        &args.output,
        format_for(&args.output, args.format),
    )?;
    Ok(())
}

fn run_eval(args: &EvalArgs) -> anyhow::Result<()> {
    let original = load_pcm(&args.original, PcmFormat::from_path(&args.original))?;
    let decoded = load_pcm(&args.decoded, PcmFormat::from_path(&args.decoded))?;
    let report = segsnr(&original, &decoded, args.segment_len)?;
    println!("segsnr_db = {:.6}", report.segsnr_db);
    println!("std_db = {:.6}", report.std_db);
    println!("segments = {}", report.per_segment_db.len());
    if args.verbose {
        for (i, v) in report.per_segment_db.iter().enumerate() {
            println!("segment {i} = {v:.6}");
        }
    }
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let mut settings = args.settings.load()?;
    if !args.corpus.is_empty() {
        let list: Vec<String> = args
            .corpus
            .iter()
            .map(|p| p.display().to_string())
            .collect();
        settings.set("corpus", list.join(" "));
    }
    set_opt(&mut settings, "methods", &args.methods);
    set_opt(&mut settings, "bits", &args.bits);
    set_opt(&mut settings, "frame_lens", &args.frame_lens);
    set_opt(&mut settings, "training_windows", &args.training_windows);
    set_opt(&mut settings, "computing_windows", &args.computing_windows);
    set_opt(&mut settings, "seeds", &args.seeds);
    set_opt(&mut settings, "segment_len", &args.segment_len);
    if let Some(out) = &args.output {
        settings.set("output", out.display().to_string());
    }
    let spec = SweepSpec::from_settings(&settings)?;
    let rows = experiments::run_sweep(&spec)?;
    if spec.output_path.is_none() {
        experiments::write_csv(std::io::stdout().lock(), &rows)?;
    }
    Ok(())
}

fn run_gen_corpus(args: &GenCorpusArgs) -> anyhow::Result<()> {
    let paths = experiments::write_corpus(&args.dir, args.kind, args.count, args.len, args.seed)?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

/// 1 for configuration and usage errors, 2 for I/O and malformed data, 3 for numerical failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Config(_) | Error::InvalidInput(_)) => 1,
        Some(Error::Io { .. } | Error::Format { .. } | Error::Stream(_)) => 2,
        Some(Error::Numerical(_)) => 3,
        None if err.chain().any(|e| e.is::<std::io::Error>()) => 2,
        None => 1,
    }
}

/// Joins the error chain, skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Encode(a) => run_encode(a),
        Command::Decode(a) => run_decode(a),
        Command::Eval(a) => run_eval(a),
        Command::Sweep(a) => run_sweep(a),
        Command::GenCorpus(a) => run_gen_corpus(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}
