//! The pipeline stages behind each subcommand.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use nlca::denoise::{ca_filter, nlca_filter, residual, DenoiseParams};
use nlca::metrics::{report, MetricsReport, SsimParams};
use nlca::noise::{add_rician, estimate_noise, sigma_for_percent, NoiseEstimate, NoiseModel, EIGHT_BIT_MAX};
use nlca::volume::{load_nifti, load_raw_with_sidecar, save_raw, SampleType};
use nlca::Volume3D;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Raw,
    Nifti,
}

impl InputFormat {
    /// `.nii` files are NIfTI, everything else raw-with-sidecar.
    pub fn guess(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("nii") => InputFormat::Nifti,
            _ => InputFormat::Raw,
        }
    }
}

impl FromStr for InputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(InputFormat::Raw),
            "nifti" => Ok(InputFormat::Nifti),
            other => bail!("unknown format `{other}` (supported: raw, nifti)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Ca,
    Nlca,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Ca => "ca",
            FilterKind::Nlca => "nlca",
        }
    }

    pub fn apply(self, volume: &Volume3D, params: &DenoiseParams) -> nlca::Result<Volume3D> {
        match self {
            FilterKind::Ca => ca_filter(volume, params),
            FilterKind::Nlca => nlca_filter(volume, params),
        }
    }
}

impl FromStr for FilterKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ca" => Ok(FilterKind::Ca),
            "nlca" => Ok(FilterKind::Nlca),
            other => bail!("unknown filter `{other}` (supported filters: ca, nlca)"),
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Noise level given explicitly or estimated from the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaChoice {
    Value(f64),
    Auto,
}

impl FromStr for SigmaChoice {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(SigmaChoice::Auto);
        }
        let v: f64 = s
            .parse()
            .with_context(|| format!("sigma must be a number or `auto`, got `{s}`"))?;
        ensure!(v >= 0.0 && v.is_finite(), "sigma must be finite and >= 0, got {v}");
        Ok(SigmaChoice::Value(v))
    }
}

/// What a "percent" of noise is relative to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseReference {
    /// Percent of 255, the 8-bit full scale.
    #[default]
    EightBit,
    /// Percent of the input volume's maximum.
    DataMax,
}

impl NoiseReference {
    pub fn full_scale(self, volume: &Volume3D) -> f64 {
        match self {
            NoiseReference::EightBit => EIGHT_BIT_MAX,
            NoiseReference::DataMax => volume.max() as f64,
        }
    }
}

impl FromStr for NoiseReference {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "8bit" | "eight-bit" => Ok(NoiseReference::EightBit),
            "max" | "data-max" => Ok(NoiseReference::DataMax),
            other => bail!("unknown noise reference `{other}` (supported: 8bit, max)"),
        }
    }
}

/// Sub-volume `origin .. origin + extent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crop {
    pub origin: [usize; 3],
    pub extent: [usize; 3],
}

impl FromStr for Crop {
    type Err = anyhow::Error;

    /// `x,y,z,ex,ey,ez`
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("crop must be six integers x,y,z,ex,ey,ez, got `{s}`"))?;
        ensure!(parts.len() == 6, "crop must be six integers x,y,z,ex,ey,ez, got `{s}`");
        Ok(Crop {
            origin: [parts[0], parts[1], parts[2]],
            extent: [parts[3], parts[4], parts[5]],
        })
    }
}

pub fn parse_sample_type(s: &str) -> Result<SampleType> {
    Ok(s.parse::<SampleType>()?)
}

/// Reads a volume in the given (or guessed) format and applies an optional crop.
pub fn load_input(path: &Path, format: Option<InputFormat>, crop: Option<Crop>) -> Result<Volume3D> {
    let format = format.unwrap_or_else(|| InputFormat::guess(path));
    let volume = match format {
        InputFormat::Raw => load_raw_with_sidecar(path).map(|(v, _)| v),
        InputFormat::Nifti => load_nifti(path).map(|(v, _)| v),
    }
    .with_context(|| format!("loading {}", path.display()))?;
    match crop {
        Some(c) => Ok(volume.crop(c.origin, c.extent)?),
        None => Ok(volume),
    }
}

pub fn save_output(volume: &Volume3D, path: &Path, sample_type: SampleType) -> Result<()> {
    save_raw(volume, path, sample_type).with_context(|| format!("writing {}", path.display()))
}

/// Corrupts `input` with Rician noise at `percent` of the full scale.
///
/// Returns the noise sigma that was used.
pub fn cmd_add_noise(
    input: &Volume3D,
    output: &Path,
    percent: f64,
    seed: u64,
    reference: NoiseReference,
    sample_type: SampleType,
) -> Result<f64> {
    ensure!(
        percent > 0.0 && percent < 100.0,
        "bad percent {percent}: noise level must lie strictly between 0 and 100"
    );
    let sigma = sigma_for_percent(percent, reference.full_scale(input));
    let noisy = add_rician(input, NoiseModel::new(sigma, seed))?;
    save_output(&noisy, output, sample_type)?;
    Ok(sigma)
}

pub fn cmd_estimate(input: &Volume3D) -> Result<NoiseEstimate> {
    Ok(estimate_noise(input)?)
}

#[derive(Debug, Clone)]
pub struct DenoiseRequest {
    pub filter: FilterKind,
    pub sigma: SigmaChoice,
    /// Patch/search/c1/c2 settings; the sigma field is ignored.
    pub params: DenoiseParams,
    pub output: PathBuf,
    pub residual: Option<PathBuf>,
    pub sample_type: SampleType,
}

#[derive(Debug, Clone, Serialize)]
pub struct DenoiseSummary {
    pub filter: FilterKind,
    pub sigma_n: f64,
    pub estimate: Option<NoiseEstimate>,
    pub patch_radius: usize,
    pub search_radius: usize,
    pub c1: f64,
    pub c2: f64,
}

/// Runs one filter; with `sigma = auto` the noise is estimated first.
pub fn cmd_denoise(input: &Volume3D, request: &DenoiseRequest) -> Result<DenoiseSummary> {
    let (sigma_n, estimate) = match request.sigma {
        SigmaChoice::Value(v) => (v, None),
        SigmaChoice::Auto => {
            let e = estimate_noise(input)?;
            (e.sigma_n_hat, Some(e))
        }
    };
    let params = DenoiseParams {
        sigma_n,
        ..request.params
    };
    let denoised = request.filter.apply(input, &params)?;
    save_output(&denoised, &request.output, request.sample_type)?;
    if let Some(path) = &request.residual {
        // Residuals are signed, so they are always stored as f32.
        save_output(&residual(input, &denoised)?, path, SampleType::F32)?;
    }
    Ok(DenoiseSummary {
        filter: request.filter,
        sigma_n,
        estimate,
        patch_radius: params.patch_radius,
        search_radius: params.search_radius,
        c1: params.c1,
        c2: params.c2,
    })
}

pub fn cmd_metrics(reference: &Volume3D, estimate: &Volume3D, ssim: &SsimParams) -> Result<MetricsReport> {
    Ok(report(reference, estimate, ssim)?)
}
