//! Noise-level sweep over a ground-truth volume, reported as CSV.

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use nlca::denoise::DenoiseParams;
use nlca::metrics::{report, SsimParams};
use nlca::noise::{add_rician, estimate_noise, sigma_for_percent, NoiseModel};
use nlca::Volume3D;

use crate::commands::{load_input, Crop, FilterKind, InputFormat, NoiseReference};
use crate::format::sig6;

pub const CSV_HEADER: [&str; 7] = ["filter", "noise_pct", "rmse", "ssim", "seed", "sigma_policy", "elapsed_ms"];
pub const DEFAULT_LEVELS: [f64; 4] = [5.0, 10.0, 15.0, 20.0];

/// Where the filters get their noise level from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaPolicy {
    /// The sigma used to inject the noise.
    #[default]
    Exact,
    /// The wavelet estimate from the noisy volume.
    Estimated,
}

impl SigmaPolicy {
    pub fn name(self) -> &'static str {
        match self {
            SigmaPolicy::Exact => "exact",
            SigmaPolicy::Estimated => "estimated",
        }
    }
}

impl FromStr for SigmaPolicy {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SigmaPolicy::Exact),
            "estimated" => Ok(SigmaPolicy::Estimated),
            other => bail!("unknown sigma policy `{other}` (supported: exact, estimated)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub input: PathBuf,
    pub format: Option<InputFormat>,
    pub crop: Option<Crop>,
    pub levels: Vec<f64>,
    pub filters: Vec<FilterKind>,
    pub seed: u64,
    /// Noise realisations per level; repeat `k` uses seed `seed + k`.
    pub repeats: usize,
    pub sigma_policy: SigmaPolicy,
    pub noise_reference: NoiseReference,
    /// Filter settings; `sigma_n` is replaced per run.
    pub params: DenoiseParams,
    pub ssim: SsimParams,
    /// CSV destination; standard output when absent.
    pub output: Option<PathBuf>,
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.filters.is_empty(), "benchmark needs at least one filter");
        ensure!(!self.levels.is_empty(), "benchmark needs at least one noise level");
        ensure!(self.repeats >= 1, "repeats must be at least 1");
        for &p in &self.levels {
            ensure!(
                p > 0.0 && p < 100.0,
                "bad percent {p}: noise level must lie strictly between 0 and 100"
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    /// `noisy` for the unfiltered baseline, else the filter name.
    pub filter: String,
    pub noise_pct: f64,
    pub rmse: f64,
    pub ssim: f64,
    pub seed: u64,
    pub sigma_policy: SigmaPolicy,
    /// Wall time of noise estimation (if any) plus filtering; 0 for baseline rows.
    pub elapsed_ms: f64,
}

impl BenchmarkRow {
    fn record(&self) -> [String; 7] {
        [
            self.filter.clone(),
            sig6(self.noise_pct),
            sig6(self.rmse),
            sig6(self.ssim),
            self.seed.to_string(),
            self.sigma_policy.name().to_string(),
            sig6(self.elapsed_ms),
        ]
    }
}

/// Runs the sweep on an in-memory ground truth.
///
/// Rows come level by level, repeat by repeat: the noisy baseline first, then
/// each filter in the order given.
pub fn run_benchmark(truth: &Volume3D, spec: &BenchmarkSpec) -> Result<Vec<BenchmarkRow>> {
    spec.validate()?;
    spec.params.validate()?;
    let full_scale = spec.noise_reference.full_scale(truth);
    let mut rows = Vec::with_capacity((spec.filters.len() + 1) * spec.levels.len() * spec.repeats);
    for &pct in &spec.levels {
        let sigma = sigma_for_percent(pct, full_scale);
        for repeat in 0..spec.repeats {
            let seed = spec.seed.wrapping_add(repeat as u64);
            let noisy = add_rician(truth, NoiseModel::new(sigma, seed))?;
            let base = report(truth, &noisy, &spec.ssim)?;
            rows.push(BenchmarkRow {
                filter: "noisy".to_string(),
                noise_pct: pct,
                rmse: base.rmse,
                ssim: base.ssim,
                seed,
                sigma_policy: spec.sigma_policy,
                elapsed_ms: 0.0,
            });
            for &filter in &spec.filters {
                let start = Instant::now();
                let sigma_n = match spec.sigma_policy {
                    SigmaPolicy::Exact => sigma,
                    SigmaPolicy::Estimated => estimate_noise(&noisy)?.sigma_n_hat,
                };
                let params = DenoiseParams { sigma_n, ..spec.params };
                let denoised = filter.apply(&noisy, &params)?;
                let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
                let m = report(truth, &denoised, &spec.ssim)?;
                rows.push(BenchmarkRow {
                    filter: filter.name().to_string(),
                    noise_pct: pct,
                    rmse: m.rmse,
                    ssim: m.ssim,
                    seed,
                    sigma_policy: spec.sigma_policy,
                    elapsed_ms,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchmarkRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Loads the ground truth, runs the sweep and writes the CSV.
///
/// Nothing is written unless every run succeeds.
pub fn cmd_benchmark(spec: &BenchmarkSpec) -> Result<Vec<BenchmarkRow>> {
    spec.validate()?;
    let truth = load_input(&spec.input, spec.format, spec.crop)?;
    let rows = run_benchmark(&truth, spec)?;
    match &spec.output {
        Some(path) => {
            let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, std::io::BufWriter::new(file))?;
        }
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(rows)
}
