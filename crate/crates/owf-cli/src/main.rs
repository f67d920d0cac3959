use std::error::Error;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use owf::bench::{self, BenchPlan};
use owf::{
    add_noise, compute_metrics, denoise, export_weight_map, read_image, write_image, Bandwidth, FilterConfig,
    FilterVariant, NoiseSpec, PixelCoord, SimilarityKernel,
};

type CliResult<T = ()> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "owf", version, about = "Optimal weights denoising for grayscale images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise an image.
    Denoise(DenoiseArgs),
    /// Add seeded Gaussian noise to an image.
    AddNoise(AddNoiseArgs),
    /// Print the PSNR of an image against a reference.
    Psnr(PsnrArgs),
    /// Run the benchmark grid over a directory of clean images.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Filter {
    Owf,
    OwfSplit,
    Oracle,
    Nlm,
}

impl From<Filter> for FilterVariant {
    fn from(f: Filter) -> Self {
        match f {
            Filter::Owf => FilterVariant::Owf,
            Filter::OwfSplit => FilterVariant::OwfSplit,
            Filter::Oracle => FilterVariant::Oracle,
            Filter::Nlm => FilterVariant::Nlm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kernel {
    Rect,
    Gauss,
    K0,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cases {
    /// Comparison cases plus the full K0 patch/search grid.
    Default,
    /// Oracle, OWF per kernel, split OWF and NLM at 21x21 / 13x13.
    Compare,
    /// OWF with K0 over every patch/search size.
    Grid,
}

#[derive(Args)]
struct DenoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Noise standard deviation.
    #[arg(long)]
    sigma: f64,
    #[arg(long, value_enum, default_value = "owf")]
    filter: Filter,
    #[arg(long, value_enum, default_value = "k0")]
    kernel: Kernel,
    /// Gaussian kernel bandwidth; defaults to the squared patch radius.
    #[arg(long)]
    gauss_bandwidth: Option<f64>,
    /// Patch side length (odd).
    #[arg(long, default_value_t = 21, value_parser = parse_odd)]
    patch: usize,
    /// Search window side length (odd).
    #[arg(long, default_value_t = 13, value_parser = parse_odd)]
    search: usize,
    /// Clean image, used by the oracle filter.
    #[arg(long, required_if_eq("filter", "oracle"))]
    clean: Option<PathBuf>,
    /// NLM smoothing parameter; defaults to 0.55 * sigma.
    #[arg(long)]
    nlm_h: Option<f64>,
    /// Print the weights used at pixel ROW,COL as CSV on stdout.
    #[arg(long, value_name = "ROW,COL", value_parser = parse_coord)]
    dump_weights: Option<PixelCoord>,
    /// Write the per-pixel bandwidth as CSV.
    #[arg(long, value_name = "PATH")]
    dump_bandwidth: Option<PathBuf>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct AddNoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PsnrArgs {
    #[arg(long)]
    reference: PathBuf,
    /// Image to score.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of clean .pgm / .png images.
    #[arg(long)]
    images: PathBuf,
    /// Comma separated noise levels; may be empty.
    #[arg(long, default_value = "10,20,30", value_parser = parse_sigmas)]
    sigmas: Sigmas,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "default")]
    cases: Cases,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads per filter run; 0 uses the shared pool.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write 0 in the seconds column so reruns give identical files.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Clone)]
struct Sigmas(Vec<f64>);

fn parse_odd(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n % 2 == 1 {
        Ok(n)
    } else {
        Err(format!("{n} is not odd"))
    }
}

fn parse_coord(s: &str) -> Result<PixelCoord, String> {
    let (r, c) = s.split_once(',').ok_or("expected ROW,COL")?;
    let r: isize = r.trim().parse().map_err(|e| format!("row: {e}"))?;
    let c: isize = c.trim().parse().map_err(|e| format!("col: {e}"))?;
    Ok(PixelCoord::new(r, c))
}

fn parse_sigmas(s: &str) -> Result<Sigmas, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let v: f64 = part.parse().map_err(|e| format!("{part:?}: {e}"))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(format!("sigma must be positive, got {v}"));
        }
        out.push(v);
    }
    Ok(Sigmas(out))
}

fn run_denoise(args: DenoiseArgs) -> CliResult {
    let noisy = read_image(&args.input)?;
    let clean = args.clean.as_ref().map(read_image).transpose()?;
    let patch_radius = args.patch / 2;
    let kernel = match args.kernel {
        Kernel::Rect => SimilarityKernel::Rect,
        Kernel::K0 => SimilarityKernel::K0,
        Kernel::Gauss => match args.gauss_bandwidth {
            Some(bandwidth) => SimilarityKernel::Gauss { bandwidth },
            None => SimilarityKernel::gauss_default(patch_radius),
        },
    };
    let mut cfg = FilterConfig::new(args.sigma)
        .with_variant(args.filter.into())
        .with_kernel(kernel)
        .with_patch_radius(patch_radius)
        .with_search_radius(args.search / 2)
        .with_threads(args.threads)
        .with_bandwidth_map(args.dump_bandwidth.is_some());
    if let Some(h) = args.nlm_h {
        cfg = cfg.with_nlm_smoothing(h);
    }

    let result = denoise(&noisy, clean.as_ref(), &cfg)?;
    write_image(&result.output, &args.output)?;

    if let Some(path) = &args.dump_bandwidth {
        match &result.bandwidth {
            Some(map) => map.write_csv(BufWriter::new(File::create(path)?))?,
            None => return Err(format!("the {} filter has no bandwidth to dump", cfg.variant).into()),
        }
    }
    if let Some(x0) = args.dump_weights {
        let export = export_weight_map(&noisy, clean.as_ref(), &cfg, x0)?;
        let mut out = io::stdout().lock();
        writeln!(out, "row,col,weight")?;
        for (p, w) in export.coords.iter().zip(export.weights.weights()) {
            writeln!(out, "{},{},{w}", p.row, p.col)?;
        }
        match export.bandwidth {
            Some(Bandwidth::Finite(a)) => eprintln!("bandwidth at {},{}: {a}", x0.row, x0.col),
            Some(Bandwidth::Degenerate) => eprintln!("bandwidth at {},{}: degenerate", x0.row, x0.col),
            None => {}
        }
    }
    Ok(())
}

fn run_add_noise(args: AddNoiseArgs) -> CliResult {
    let clean = read_image(&args.input)?;
    let noisy = add_noise(&clean, &NoiseSpec::new(args.sigma, args.seed)?)?;
    write_image(&noisy, &args.output)?;
    Ok(())
}

fn run_psnr(args: PsnrArgs) -> CliResult {
    let reference = read_image(&args.reference)?;
    let candidate = read_image(&args.input)?;
    println!("{}", compute_metrics(&reference, &candidate)?);
    Ok(())
}

fn run_bench(args: BenchArgs) -> CliResult {
    let rows = if args.sigmas.0.is_empty() {
        Vec::new()
    } else {
        let (corpus, failures) = bench::load_corpus(&args.images)
            .map_err(|e| format!("cannot read {}: {e}", args.images.display()))?;
        for (path, err) in &failures {
            eprintln!("owf: skipping {}: {err}", path.display());
        }
        let plan = BenchPlan {
            sigmas: args.sigmas.0,
            cases: match args.cases {
                Cases::Default => bench::default_cases(),
                Cases::Compare => bench::comparison_cases(),
                Cases::Grid => bench::grid_cases(),
            },
            seed: args.seed,
            threads: args.threads,
            timing: !args.no_timing,
            ..BenchPlan::default()
        };
        bench::run_bench(&corpus, &plan)?
    };
    match &args.out {
        Some(path) => {
            bench::write_csv(&rows, BufWriter::new(File::create(path)?))?;
            if !rows.is_empty() {
                print!("{}", bench::format_table(&rows));
            }
        }
        None => bench::write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Denoise(a) => run_denoise(a),
        Command::AddNoise(a) => run_add_noise(a),
        Command::Psnr(a) => run_psnr(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("owf: error: {e}");
            ExitCode::FAILURE
        }
    }
}
