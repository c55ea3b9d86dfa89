mod compare;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use delcodec_core::codec::{decode_real, EncodedImage};
use delcodec_core::formats::{synthesize, write_pgm, Generator, SyntheticSpec};
use delcodec_core::renderer::{render, tone_map_export, write_dden};
use delcodec_core::{
    compute_gradient, decode, delentropy, encode, BitDepth, EdgeMode, EntropyReport, KernelSpec,
    RenderConfig, RenderMethod, ToneMap,
};
use serde::Serialize;

use crate::io::{read_bytes, read_image, write_atomic, CliError, CliResult, EXIT_FLAGS, EXIT_MALFORMED};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "delcodec",
    version,
    about = "Gradient-histogram entropy analysis and lossless coding of grayscale images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    A,
    C,
    Fourier,
}

impl KernelArg {
    fn spec(self) -> KernelSpec {
        match self {
            KernelArg::A => KernelSpec::A,
            KernelArg::C => KernelSpec::C,
            KernelArg::Fourier => KernelSpec::FOURIER,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EdgeArg {
    Valid,
    Wrap,
}

impl EdgeArg {
    fn mode(self) -> EdgeMode {
        match self {
            EdgeArg::Valid => EdgeMode::Valid,
            EdgeArg::Wrap => EdgeMode::Circular,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bin,
    Bilinear,
    Fourier,
}

impl MethodArg {
    fn method(self) -> RenderMethod {
        match self {
            MethodArg::Bin => RenderMethod::BinNearest,
            MethodArg::Bilinear => RenderMethod::BinBilinear,
            MethodArg::Fourier => RenderMethod::Fourier,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ToneArg {
    Linear,
    Invert,
    Gamma,
}

#[derive(clap::Args)]
struct AnalysisArgs {
    #[arg(long, value_enum, default_value = "a")]
    kernel: KernelArg,
    #[arg(long, value_enum, default_value = "valid")]
    edge: EdgeArg,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy measures of a PGM image.
    Entropy {
        input: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Report the raw joint entropy instead of halving it.
        #[arg(long)]
        no_pgs: bool,
        #[arg(long)]
        json: bool,
    },
    /// Losslessly encode a PGM image into a .dle container.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decode a .dle container into a PGM image.
    Decode { input: PathBuf, output: PathBuf },
    /// Encode and decode in memory and check bit-exactness.
    Verify {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Render the gradient density. A `.pgm` output gets a 16-bit tone-mapped
    /// export, anything else the raw DDEN float grid.
    #[command(alias = "render")]
    Density {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value = "bilinear")]
        method: MethodArg,
        #[arg(long, default_value_t = 512)]
        size: usize,
        /// Half-width of the rendered gradient window; chosen from the data when absent.
        #[arg(long)]
        range: Option<f64>,
        #[arg(long, value_enum, default_value = "linear")]
        tone: ToneArg,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Also write a tone-mapped PGM export here.
        #[arg(long)]
        pgm: Option<PathBuf>,
        /// Print the L1 distance between the fourier and bilinear renders.
        #[arg(long)]
        cross_check: bool,
    },
    /// Tabulate entropy measures and rates for several images.
    Compare {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Lines of `image label bpp` with externally measured rates.
        #[arg(long)]
        external: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Write a synthetic test image.
    Synth {
        /// constant:V, wedge, checkerboard:V, noise:SEED, stripes:P or lowpass:SEED:R
        generator: String,
        output: PathBuf,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        #[arg(long, default_value_t = 8)]
        depth: u8,
    },
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema: &'static str,
    schema_version: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn print_json<T: Serialize>(schema: &'static str, body: &T) -> CliResult<()> {
    let v = Versioned {
        schema,
        schema_version: SCHEMA_VERSION,
        body,
    };
    let s = serde_json::to_string_pretty(&v).map_err(|e| CliError::new(EXIT_MALFORMED, e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn print_entropy(r: &EntropyReport) {
    println!("H1={:.6} Hdel={:.6}", r.first_order, r.delentropy);
    let pair = r
        .quincunx_bpp
        .map(|v| format!("{v:.6}"))
        .unwrap_or_else(|| "n/a".into());
    println!(
        "H0={:.6} Hfx={:.6} Hfy={:.6} Hjoint={:.6} Hpair={} tau={:.6} sites={} kernel={} edge={} pgs={}",
        r.zeroth_order,
        r.h_fx,
        r.h_fy,
        r.joint,
        pair,
        r.tau,
        r.sites,
        r.kernel.name(),
        edge_name(r.edge),
        r.pgs
    );
}

fn edge_name(e: EdgeMode) -> &'static str {
    match e {
        EdgeMode::Valid => "valid",
        EdgeMode::Circular => "wrap",
    }
}

fn cmd_entropy(input: &Path, analysis: &AnalysisArgs, no_pgs: bool, json: bool) -> CliResult<()> {
    let img = read_image(input)?;
    let report = delentropy(&img, &analysis.kernel.spec(), analysis.edge.mode(), !no_pgs)?;
    if json {
        print_json("delcodec.entropy", &report)
    } else {
        print_entropy(&report);
        Ok(())
    }
}

fn cmd_encode(input: &Path, output: &Path, json: bool) -> CliResult<()> {
    let img = read_image(input)?;
    let (enc, stats) = encode(&img)?;
    let bytes = enc.serialize().map_err(delcodec_core::CodecError::from)?;
    write_atomic(output, &bytes)?;
    if json {
        print_json("delcodec.encode", &stats)
    } else {
        println!(
            "bpp={:.6} payload_bits={} max_err={:.6}",
            stats.bpp, stats.payload_bits, stats.max_pre_rounding_error
        );
        println!(
            "bytes={} header={} table={} side_channel={} payload={} symbols={} distinct={} bits_per_symbol={:.6} Hpair={:.6}",
            stats.total_bytes,
            stats.header_bytes,
            stats.table_bytes,
            stats.side_channel_bytes,
            stats.payload_bytes,
            stats.symbol_count,
            stats.distinct_symbols,
            stats.bits_per_symbol(),
            stats.pair_entropy
        );
        Ok(())
    }
}

fn cmd_decode(input: &Path, output: &Path) -> CliResult<()> {
    let bytes = read_bytes(input)?;
    let enc = EncodedImage::parse(&bytes).map_err(|e| {
        CliError::new(
            EXIT_MALFORMED,
            format!("{}: malformed container: {e}", input.display()),
        )
    })?;
    let img = decode(&enc)?;
    write_atomic(output, &write_pgm(&img))
}

#[derive(Serialize)]
struct VerifyReport {
    exact: bool,
    max_err: f64,
    bpp: f64,
}

fn cmd_verify(input: &Path, json: bool) -> CliResult<()> {
    let img = read_image(input)?;
    let (enc, stats) = encode(&img)?;
    let bytes = enc.serialize().map_err(delcodec_core::CodecError::from)?;
    let parsed = EncodedImage::parse(&bytes).map_err(delcodec_core::CodecError::from)?;
    let recon = decode_real(&parsed)?;
    let max_err = recon.max_abs_diff(&img);
    let exact = decode(&parsed)? == img;
    let report = VerifyReport {
        exact,
        max_err,
        bpp: stats.bpp,
    };
    if json {
        print_json("delcodec.verify", &report)?;
    } else {
        println!("exact={} max_err={:.6}", report.exact, report.max_err);
    }
    if exact {
        Ok(())
    } else {
        Err(CliError::new(io::EXIT_UNSAFE, "roundtrip is not bit-exact"))
    }
}

struct DensityArgs<'a> {
    method: MethodArg,
    size: usize,
    range: Option<f64>,
    tone: ToneArg,
    gamma: f64,
    pgm: Option<&'a Path>,
    cross_check: bool,
}

fn tone_of(tone: ToneArg, gamma: f64) -> ToneMap {
    match tone {
        ToneArg::Linear => ToneMap::Linear,
        ToneArg::Invert => ToneMap::Invert,
        ToneArg::Gamma => ToneMap::Gamma(gamma),
    }
}

fn cmd_density(input: &Path, output: &Path, analysis: &AnalysisArgs, args: DensityArgs<'_>) -> CliResult<()> {
    let img = read_image(input)?;
    let grad = compute_gradient(&img, &analysis.kernel.spec(), analysis.edge.mode())?;
    let cfg = RenderConfig {
        size: args.size,
        range: match args.range {
            Some(r) => r,
            None if args.size >= 2 => RenderConfig::auto_range(&grad, args.size),
            None => 1.0,
        },
        method: args.method.method(),
        tone: tone_of(args.tone, args.gamma),
    };
    cfg.validate()?;
    let dimg = render(&grad, &cfg)?;
    let is_pgm = output.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let export = |path: &Path| -> CliResult<()> {
        let tone = tone_map_export(&dimg, cfg.tone)?;
        write_atomic(path, &write_pgm(&tone))
    };
    if is_pgm {
        export(output)?;
    } else {
        write_atomic(output, &write_dden(&dimg))?;
    }
    if let Some(p) = args.pgm {
        export(p)?;
    }
    let (pa, pb) = dimg.peak();
    println!(
        "mass={:.6} size={} range={:.6} cell={:.6} peak=({:.6}, {:.6})",
        dimg.mass(),
        dimg.size,
        dimg.range,
        dimg.cell(),
        dimg.coordinate(pa),
        dimg.coordinate(pb)
    );
    if args.cross_check {
        let other = |m| render(&grad, &RenderConfig { method: m, ..cfg });
        let fourier = other(RenderMethod::Fourier)?;
        let bilinear = other(RenderMethod::BinBilinear)?;
        println!("l1_fourier_bilinear={:.6}", fourier.l1_distance(&bilinear));
    }
    Ok(())
}

fn thread_pool_size() -> CliResult<Option<usize>> {
    match std::env::var("DELCODEC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::flags(format!(
                "DELCODEC_THREADS must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn cmd_compare(
    inputs: &[PathBuf],
    external: Option<&Path>,
    csv: Option<&Path>,
    json: bool,
    analysis: &AnalysisArgs,
) -> CliResult<()> {
    let manifest = match external {
        Some(p) => {
            let text = String::from_utf8(read_bytes(p)?).map_err(|_| {
                CliError::new(EXIT_MALFORMED, format!("{}: manifest is not UTF-8", p.display()))
            })?;
            compare::parse_manifest(&text)?
        }
        None => Vec::new(),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_pool_size()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::new(io::EXIT_IO, e.to_string()))?;
    let kernel = analysis.kernel.spec();
    let edge = analysis.edge.mode();
    let report = pool.install(|| compare::build_report(inputs, &manifest, &kernel, edge, true))?;
    if let Some(p) = csv {
        write_atomic(p, report.to_csv().as_bytes())?;
    }
    if json {
        let s = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::new(EXIT_MALFORMED, e.to_string()))?;
        println!("{s}");
    } else {
        print!("{}", report.to_table());
    }
    Ok(())
}

fn cmd_synth(generator: &str, output: &Path, width: usize, height: usize, depth: u8) -> CliResult<()> {
    let g: Generator = generator.parse()?;
    let depth = BitDepth::from_bits(depth).map_err(|e| CliError::flags(e.to_string()))?;
    let img = synthesize(&SyntheticSpec::new(g, width, height, depth))?;
    write_atomic(output, &write_pgm(&img))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Entropy {
            input,
            analysis,
            no_pgs,
            json,
        } => cmd_entropy(&input, &analysis, no_pgs, json),
        Command::Encode { input, output, json } => cmd_encode(&input, &output, json),
        Command::Decode { input, output } => cmd_decode(&input, &output),
        Command::Verify { input, json } => cmd_verify(&input, json),
        Command::Density {
            input,
            output,
            method,
            size,
            range,
            tone,
            gamma,
            analysis,
            pgm,
            cross_check,
        } => cmd_density(
            &input,
            &output,
            &analysis,
            DensityArgs {
                method,
                size,
                range,
                tone,
                gamma,
                pgm: pgm.as_deref(),
                cross_check,
            },
        ),
        Command::Compare {
            inputs,
            external,
            csv,
            json,
            analysis,
        } => cmd_compare(&inputs, external.as_deref(), csv.as_deref(), json, &analysis),
        Command::Synth {
            generator,
            output,
            width,
            height,
            depth,
        } => cmd_synth(&generator, &output, width, height, depth),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FLAGS } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("delcodec: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
