use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use roisel::benchmark::{evaluate_all, EvalInputs, NpcrMode, Reference};
use roisel::cipher::Level;
use roisel::codec::{analyze, classify_sequence, decode, emit, CodecConfig, Container, Protection};
use roisel::keystream::MasterKey;
use roisel::roi::{format_roi, parse_roi_file, RoiMap};
use roisel::scramble::CannyParams;
use roisel::selftest::{self, Fault};
use roisel::synth;
use roisel::yuv::{read_sequence, write_sequence, VideoSpec};

/// Prints to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

/// Tile-based codec with ROI selective encryption.
#[derive(Parser)]
#[command(name = "roisel", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode a raw 4:2:0 YUV file, optionally encrypting its ROI tiles.
    Encode(EncodeArgs),
    /// Decode a container to raw YUV, with or without the key.
    Decode(DecodeArgs),
    /// Compare keyless decodes against a reference and write reports.
    Evaluate(EvaluateArgs),
    /// Run the inversion oracles and print a pass matrix.
    Selftest(SelftestArgs),
    /// Write a synthetic clip and its ROI file.
    Synth(SynthArgs),
}

#[derive(Args)]
struct KeyArg {
    /// 128-bit key as 32 hex digits.
    #[arg(long, env = "ROISEL_KEY", hide_env_values = true)]
    key: Option<String>,
}

#[derive(Args)]
struct DimArgs {
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    /// Defaults to the number of whole frames in the file.
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Args)]
struct CodecArgs {
    #[arg(long, default_value_t = 32)]
    qp: i32,
    #[arg(long, default_value_t = 32)]
    tile_size: usize,
    #[arg(long, default_value_t = 16)]
    cu_size: usize,
    #[arg(long, default_value_t = 8)]
    tu_size: usize,
    #[arg(long, default_value = "IBBB")]
    gop: String,
}

#[derive(Args)]
struct CannyArgs {
    #[arg(long, default_value_t = 50.0)]
    canny_low: f64,
    #[arg(long, default_value_t = 150.0)]
    canny_high: f64,
    #[arg(long, default_value_t = 1.4)]
    canny_sigma: f64,
}

impl CannyArgs {
    fn params(&self) -> CannyParams {
        CannyParams {
            sigma: self.canny_sigma,
            low: self.canny_low,
            high: self.canny_high,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Basic,
    Enhanced,
    Advanced,
}

impl From<LevelArg> for Level {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Basic => Level::Basic,
            LevelArg::Enhanced => Level::Enhanced,
            LevelArg::Advanced => Level::Advanced,
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    dims: DimArgs,
    #[command(flatten)]
    codec: CodecArgs,
    #[command(flatten)]
    canny: CannyArgs,
    /// Encryption level; without it the container is unencrypted.
    #[arg(long, value_enum)]
    level: Option<LevelArg>,
    #[command(flatten)]
    key: KeyArg,
    /// Keystream nonce; random when omitted and stored in the header.
    #[arg(long)]
    nonce: Option<u64>,
    /// ROI coordinate file. Frames without records are not encrypted.
    #[arg(long)]
    roi: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    key: KeyArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum NpcrModeArg {
    PlainVsCipher,
    TwoKeys,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReferenceArg {
    PlainDecode,
    Source,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Uncompressed source sequence.
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    /// Unencrypted container of the same encode.
    #[arg(long)]
    plain: PathBuf,
    /// Encrypted container.
    #[arg(long)]
    enc: PathBuf,
    /// Second encrypted container (other key), for two-key NPCR.
    #[arg(long)]
    enc2: Option<PathBuf>,
    /// Ground-truth ROI file.
    #[arg(long)]
    roi: PathBuf,
    #[arg(long, value_enum, default_value = "plain-vs-cipher")]
    npcr_mode: NpcrModeArg,
    /// Sequence used as the unencrypted reference.
    #[arg(long, value_enum, default_value = "plain-decode")]
    reference: ReferenceArg,
    #[command(flatten)]
    canny: CannyArgs,
    #[arg(long)]
    report_json: Option<PathBuf>,
    #[arg(long)]
    report_csv: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Deliberately break one inverse to check that the matrix catches it.
    #[arg(long, value_parser = parse_fault)]
    inject_fault: Option<Fault>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// 176x144 drifting textured square.
    Face,
    /// Any CU-aligned size, object about a third of the frame.
    Clip,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "face")]
    kind: SynthKind,
    #[arg(long, default_value_t = 176)]
    width: usize,
    #[arg(long, default_value_t = 144)]
    height: usize,
    #[arg(long, default_value_t = 16)]
    frames: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    roi_out: PathBuf,
}

fn parse_fault(s: &str) -> std::result::Result<Fault, String> {
    Fault::parse(s).ok_or_else(|| {
        let names: Vec<_> = Fault::ALL.iter().map(|f| f.name()).collect();
        format!("unknown fault; expected one of {}", names.join(", "))
    })
}

/// Bad or inconsistent flags, reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn parse_key(k: &KeyArg) -> Result<Option<MasterKey>> {
    k.key
        .as_deref()
        .map(|s| MasterKey::from_hex(s).map_err(|e| usage(e.to_string())))
        .transpose()
}

fn spec_for(path: &Path, d: &DimArgs) -> Result<VideoSpec> {
    let probe = VideoSpec::new(d.width, d.height, 1).map_err(|e| usage(e.to_string()))?;
    let frames = match d.frames {
        Some(n) => n,
        None => {
            let len = std::fs::metadata(path)
                .with_context(|| format!("reading {}", path.display()))?
                .len();
            (len / probe.frame_bytes() as u64) as usize
        }
    };
    VideoSpec::new(d.width, d.height, frames).map_err(|e| usage(e.to_string()))
}

fn codec_config(c: &CodecArgs) -> Result<CodecConfig> {
    let cfg = CodecConfig {
        qp: c.qp,
        tile_w: c.tile_size,
        tile_h: c.tile_size,
        cu_size: c.cu_size,
        tu_size: c.tu_size,
        gop: c.gop.clone(),
        ..CodecConfig::default()
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_encode(a: EncodeArgs) -> Result<()> {
    let key = parse_key(&a.key)?;
    let cfg = codec_config(&a.codec)?;
    let canny = a.canny.params();
    canny.validate().map_err(|e| usage(e.to_string()))?;
    let prot = match (a.level, key) {
        (Some(level), Some(key)) => Some(Protection {
            key,
            level: level.into(),
            nonce: a.nonce.unwrap_or_else(rand::random),
        }),
        (Some(_), None) => return Err(usage("--level needs --key or ROISEL_KEY")),
        (None, _) => None,
    };
    let spec = spec_for(&a.input, &a.dims)?;
    let seq = read_sequence(&a.input, spec)?;
    let rois = match &a.roi {
        Some(p) => parse_roi_file(p)?,
        None => RoiMap::default(),
    };
    rois.bind(&spec)?;
    let cls = classify_sequence(&rois, spec.width, spec.height, spec.frame_count, &cfg)?;
    let analysis = analyze(&seq, &cls, &cfg, &canny)?;
    let c = emit(&analysis, prot)?;
    let bytes = c.write(&a.out)?;
    let level = c.header.level.map_or("none", |l| l.as_str());
    say!(
        "encoded {} frames, level {level}, {bytes} bytes ({} payload)",
        spec.frame_count,
        c.payload_bytes()
    );
    Ok(())
}

fn cmd_decode(a: DecodeArgs) -> Result<()> {
    let key = parse_key(&a.key)?;
    let c = Container::read(&a.input)?;
    let d = decode(&c, key)?;
    for e in &d.errors {
        eprintln!("warning: frame {} concealed: {}", e.frame, e.error);
    }
    write_sequence(&d.sequence, &a.out)?;
    say!(
        "decoded {} frames ({})",
        d.sequence.len(),
        if key.is_some() && c.header.level.is_some() {
            "with key"
        } else {
            "without key"
        }
    );
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let canny = a.canny.params();
    canny.validate().map_err(|e| usage(e.to_string()))?;
    let npcr_mode = match a.npcr_mode {
        NpcrModeArg::PlainVsCipher => NpcrMode::PlainVsCipher,
        NpcrModeArg::TwoKeys => NpcrMode::TwoKeys,
    };
    if matches!(npcr_mode, NpcrMode::TwoKeys) && a.enc2.is_none() {
        return Err(usage("--npcr-mode two-keys needs --enc2"));
    }
    if !a.roi.exists() {
        return Err(usage(format!("ROI file {} not found", a.roi.display())));
    }
    let rois = parse_roi_file(&a.roi)?;
    let plain = Container::read(&a.plain)?;
    let enc = Container::read(&a.enc)?;
    let spec = VideoSpec::new(a.width, a.height, plain.frames.len()).map_err(|e| usage(e.to_string()))?;
    let original = read_sequence(&a.original, spec)?;
    let plain_decode = decode(&plain, None)?.sequence;
    let enc_decode = decode(&enc, None)?.sequence;
    let second = a
        .enc2
        .as_ref()
        .map(|p| -> Result<_> { Ok(decode(&Container::read(p)?, None)?.sequence) })
        .transpose()?;
    let report = evaluate_all(&EvalInputs {
        original: &original,
        plain_decode: &plain_decode,
        enc_decode: &enc_decode,
        plain: &plain,
        enc: &enc,
        ground_truth: &rois,
        canny,
        reference: match a.reference {
            ReferenceArg::PlainDecode => Reference::PlainDecode,
            ReferenceArg::Source => Reference::Source,
        },
        second_decode: second.as_ref(),
        npcr_mode,
    })?;
    say!("{}", report.summary());
    if let Some(p) = &a.report_json {
        report.write_json(p)?;
    }
    if let Some(p) = &a.report_csv {
        report.write_csv(p)?;
    }
    Ok(())
}

fn cmd_selftest(a: SelftestArgs) -> Result<bool> {
    let t = Instant::now();
    let results = selftest::run(a.inject_fault);
    for r in &results {
        say!("{r}");
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    say!("total {:.2?}", t.elapsed());
    if failed.is_empty() {
        say!("all oracles passed");
        Ok(true)
    } else {
        say!("FAILED: {}", failed.join(", "));
        if let Some(f) = a.inject_fault {
            say!("(fault injected: {})", f.name());
        }
        Ok(false)
    }
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let (seq, rois) = match a.kind {
        SynthKind::Face => synth::face_proxy(a.frames, a.seed),
        SynthKind::Clip => synth::test_clip(a.width, a.height, a.frames, a.seed),
    }
    .map_err(|e| usage(e.to_string()))?;
    write_sequence(&seq, &a.out)?;
    std::fs::write(&a.roi_out, format_roi(&rois))
        .with_context(|| format!("writing {}", a.roi_out.display()))?;
    say!(
        "wrote {}x{} x {} frames",
        seq.spec.width, seq.spec.height, seq.spec.frame_count
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Encode(a) => cmd_encode(a).map(|_| true),
        Cmd::Decode(a) => cmd_decode(a).map(|_| true),
        Cmd::Evaluate(a) => cmd_evaluate(a).map(|_| true),
        Cmd::Selftest(a) => cmd_selftest(a),
        Cmd::Synth(a) => cmd_synth(a).map(|_| true),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
