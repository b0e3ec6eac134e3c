use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nlca::denoise::DenoiseParams;
use nlca::metrics::SsimParams;
use nlca::phantom::{brain_phantom, two_region};
use nlca::volume::SampleType;
use nlca_cli::benchmark::{cmd_benchmark, BenchmarkSpec, SigmaPolicy, DEFAULT_LEVELS};
use nlca_cli::commands::{
    cmd_add_noise, cmd_denoise, cmd_estimate, cmd_metrics, load_input, save_output, Crop, DenoiseRequest,
    FilterKind, InputFormat, NoiseReference, SigmaChoice,
};
use nlca_cli::config::Config;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "nlca", version, about = "Rician-aware CA/NLCA denoising for 3D magnitude MRI")]
struct Cli {
    /// JSON file with defaults for any flag (kebab-case keys); flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corrupt a volume with Rician noise.
    AddNoise {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Noise sigma as a percentage of the full scale.
        #[arg(long)]
        percent: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Full scale for --percent: 8bit (255) or max (data maximum).
        #[arg(long)]
        noise_reference: Option<NoiseReference>,
        #[arg(long)]
        dtype: Option<String>,
    },
    /// Estimate the noise level and print it as JSON.
    Estimate {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Run the CA or NLCA filter.
    Denoise {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        output: Option<PathBuf>,
        /// ca or nlca.
        #[arg(long)]
        filter: Option<FilterKind>,
        /// Gaussian noise sigma, or `auto` to estimate it.
        #[arg(long)]
        sigma: Option<SigmaChoice>,
        #[command(flatten)]
        filter_args: FilterArgs,
        /// Also write the residual (input minus output) as f32.
        #[arg(long)]
        residual: Option<PathBuf>,
        #[arg(long)]
        dtype: Option<String>,
    },
    /// Compare an estimate to a reference and print RMSE/SSIM as JSON.
    Metrics {
        #[arg(long)]
        reference: Option<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
        /// SSIM window half-width.
        #[arg(long, default_value_t = 3)]
        window_radius: usize,
        /// Dynamic range for the SSIM constants (default: 8-bit).
        #[arg(long)]
        dynamic_range: Option<f64>,
    },
    /// Write a synthetic ground-truth volume.
    Phantom {
        #[arg(long)]
        output: Option<PathBuf>,
        /// nx,ny,nz
        #[arg(long, value_delimiter = ',', default_values_t = [64, 64, 64])]
        dims: Vec<usize>,
        /// brain or two-region.
        #[arg(long, default_value = "brain")]
        kind: String,
        #[arg(long)]
        dtype: Option<String>,
    },
    /// Sweep noise levels and filters over a ground truth and write CSV.
    Benchmark {
        #[command(flatten)]
        input: InputArgs,
        /// CSV path (default: standard output).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Comma-separated filters.
        #[arg(long, alias = "filters", value_delimiter = ',')]
        filter: Vec<FilterKind>,
        /// Comma-separated noise percentages.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        repeats: Option<usize>,
        /// exact or estimated.
        #[arg(long)]
        sigma_policy: Option<SigmaPolicy>,
        #[arg(long)]
        noise_reference: Option<NoiseReference>,
        #[command(flatten)]
        filter_args: FilterArgs,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// raw or nifti (default: from the extension).
    #[arg(long)]
    format: Option<InputFormat>,
    /// x,y,z,ex,ey,ez
    #[arg(long)]
    crop: Option<Crop>,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    patch_radius: Option<usize>,
    #[arg(long)]
    search_radius: Option<usize>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
}

impl InputArgs {
    fn resolve(self, cfg: &Config) -> Result<(PathBuf, Option<InputFormat>, Option<Crop>)> {
        let path = self.input.or_else(|| cfg.input.clone()).context("missing --input")?;
        let crop = match (self.crop, &cfg.crop) {
            (Some(c), _) => Some(c),
            (None, Some(s)) => Some(s.parse()?),
            (None, None) => None,
        };
        Ok((path, self.format.or(cfg.format), crop))
    }

    fn load(self, cfg: &Config) -> Result<nlca::Volume3D> {
        let (path, format, crop) = self.resolve(cfg)?;
        load_input(&path, format, crop)
    }
}

impl FilterArgs {
    fn resolve(self, cfg: &Config) -> DenoiseParams {
        let d = DenoiseParams::default();
        DenoiseParams {
            sigma_n: 0.0,
            patch_radius: self.patch_radius.or(cfg.patch_radius).unwrap_or(d.patch_radius),
            search_radius: self.search_radius.or(cfg.search_radius).unwrap_or(d.search_radius),
            c1: self.c1.or(cfg.c1).unwrap_or(d.c1),
            c2: self.c2.or(cfg.c2).unwrap_or(d.c2),
        }
    }
}

fn output_path(flag: Option<PathBuf>, cfg: &Config) -> Result<PathBuf> {
    flag.or_else(|| cfg.output.clone()).context("missing --output")
}

fn sample_type(flag: Option<String>, cfg: &Config) -> Result<SampleType> {
    match flag.or_else(|| cfg.dtype.clone()) {
        Some(s) => Ok(s.parse()?),
        None => Ok(SampleType::F32),
    }
}

fn noise_reference(flag: Option<NoiseReference>, cfg: &Config) -> Result<NoiseReference> {
    match (flag, &cfg.noise_reference) {
        (Some(r), _) => Ok(r),
        (None, Some(s)) => s.parse(),
        (None, None) => Ok(NoiseReference::default()),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = Config::load_optional(cli.config.as_deref())?;
    if let Some(n) = cli.threads.or(cfg.threads) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }

    match cli.command {
        Command::AddNoise {
            input,
            output,
            percent,
            seed,
            noise_reference: reference,
            dtype,
        } => {
            let volume = input.load(&cfg)?;
            let output = output_path(output, &cfg)?;
            let percent = percent.or(cfg.percent).context("missing --percent")?;
            let seed = seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
            let sigma = cmd_add_noise(
                &volume,
                &output,
                percent,
                seed,
                noise_reference(reference, &cfg)?,
                sample_type(dtype, &cfg)?,
            )?;
            print_json(&serde_json::json!({ "sigma_n": sigma, "seed": seed }))
        }
        Command::Estimate { input } => print_json(&cmd_estimate(&input.load(&cfg)?)?),
        Command::Denoise {
            input,
            output,
            filter,
            sigma,
            filter_args,
            residual,
            dtype,
        } => {
            let volume = input.load(&cfg)?;
            let sigma = match (sigma, &cfg.sigma) {
                (Some(s), _) => s,
                (None, Some(v)) => v.as_flag().parse()?,
                (None, None) => SigmaChoice::Auto,
            };
            let request = DenoiseRequest {
                filter: filter.or(cfg.filter).unwrap_or(FilterKind::Nlca),
                sigma,
                params: filter_args.resolve(&cfg),
                output: output_path(output, &cfg)?,
                residual: residual.or_else(|| cfg.residual.clone()),
                sample_type: sample_type(dtype, &cfg)?,
            };
            print_json(&cmd_denoise(&volume, &request)?)
        }
        Command::Metrics {
            reference,
            input,
            window_radius,
            dynamic_range,
        } => {
            let (path, format, crop) = input.resolve(&cfg)?;
            let reference = reference
                .or_else(|| cfg.reference.clone())
                .context("missing --reference")?;
            let truth = load_input(&reference, format, crop)?;
            let estimate = load_input(&path, format, crop)?;
            let params = SsimParams {
                window_radius,
                ..dynamic_range.map_or_else(SsimParams::default, SsimParams::for_dynamic_range)
            };
            print_json(&cmd_metrics(&truth, &estimate, &params)?)
        }
        Command::Phantom {
            output,
            dims,
            kind,
            dtype,
        } => {
            let dims: [usize; 3] = dims
                .try_into()
                .map_err(|d: Vec<usize>| anyhow::anyhow!("phantom dims must be nx,ny,nz, got {d:?}"))?;
            if dims.contains(&0) {
                bail!("phantom dims must be >= 1, got {dims:?}");
            }
            let volume = match kind.as_str() {
                "brain" => brain_phantom(dims),
                "two-region" => two_region(dims, 10.0, 100.0),
                other => bail!("unknown phantom `{other}` (supported: brain, two-region)"),
            };
            save_output(&volume, &output_path(output, &cfg)?, sample_type(dtype, &cfg)?)
        }
        Command::Benchmark {
            input,
            output,
            filter,
            levels,
            seed,
            repeats,
            sigma_policy,
            noise_reference: reference,
            filter_args,
        } => {
            let (path, format, crop) = input.resolve(&cfg)?;
            let filters = if !filter.is_empty() {
                filter
            } else if let Some(f) = &cfg.filters {
                f.clone()
            } else if let Some(f) = cfg.filter {
                vec![f]
            } else {
                vec![FilterKind::Ca, FilterKind::Nlca]
            };
            let levels = if !levels.is_empty() {
                levels
            } else {
                cfg.levels.clone().unwrap_or_else(|| DEFAULT_LEVELS.to_vec())
            };
            let sigma_policy = match (sigma_policy, &cfg.sigma_policy) {
                (Some(p), _) => p,
                (None, Some(s)) => s.parse()?,
                (None, None) => SigmaPolicy::Exact,
            };
            let spec = BenchmarkSpec {
                input: path,
                format,
                crop,
                levels,
                filters,
                seed: seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
                repeats: repeats.or(cfg.repeats).unwrap_or(1),
                sigma_policy,
                noise_reference: noise_reference(reference, &cfg)?,
                params: filter_args.resolve(&cfg),
                ssim: SsimParams::default(),
                output: output.or_else(|| cfg.output.clone()),
            };
            cmd_benchmark(&spec).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
