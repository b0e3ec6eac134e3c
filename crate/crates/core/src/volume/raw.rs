//! Bare sample arrays with a JSON sidecar.
//!
//! The sidecar lives next to the data file with `.json` appended to its full
//! name (`t1.raw` -> `t1.raw.json`) and looks like
//! `{"dims":[181,217,181],"spacing":[1,1,1],"dtype":"u8","endian":"little"}`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use serde::{Deserialize, Serialize};

use super::Volume3D;
use crate::error::{Error, Result};

/// On-disk sample encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleType {
    U8,
    I16,
    F32,
}

impl SampleType {
    pub fn bytes_per_sample(self) -> usize {
        match self {
            SampleType::U8 => 1,
            SampleType::I16 => 2,
            SampleType::F32 => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SampleType::U8 => "u8",
            SampleType::I16 => "i16",
            SampleType::F32 => "f32",
        }
    }
}

impl FromStr for SampleType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u8" => Ok(SampleType::U8),
            "i16" => Ok(SampleType::I16),
            "f32" => Ok(SampleType::F32),
            other => Err(Error::UnknownSampleType(other.to_string())),
        }
    }
}

impl fmt::Display for SampleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Endianness {
    #[default]
    Little,
    Big,
}

impl Endianness {
    pub fn as_str(self) -> &'static str {
        match self {
            Endianness::Little => "little",
            Endianness::Big => "big",
        }
    }
}

impl FromStr for Endianness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "little" => Ok(Endianness::Little),
            "big" => Ok(Endianness::Big),
            other => Err(Error::UnknownEndianness(other.to_string())),
        }
    }
}

/// Geometry and encoding of a stored volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeHeader {
    pub dims: [usize; 3],
    pub spacing: [f32; 3],
    pub sample_type: SampleType,
    pub endian: Endianness,
}

impl VolumeHeader {
    pub fn new(dims: [usize; 3], sample_type: SampleType) -> Self {
        Self {
            dims,
            spacing: [1.0; 3],
            sample_type,
            endian: Endianness::Little,
        }
    }

    /// Header for the standard BrainWeb 1 mm, 8-bit volumes.
    pub fn brainweb() -> Self {
        Self::new([181, 217, 181], SampleType::U8)
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn byte_len(&self) -> u64 {
        (self.voxel_count() * self.sample_type.bytes_per_sample()) as u64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&Sidecar::from(self)).expect("sidecar serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sidecar: Sidecar = serde_json::from_str(text).map_err(|e| Error::Sidecar {
            path: PathBuf::new(),
            message: e.to_string(),
        })?;
        sidecar.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    dims: [usize; 3],
    spacing: [f32; 3],
    dtype: String,
    #[serde(default = "default_endian")]
    endian: String,
}

fn default_endian() -> String {
    "little".to_string()
}

impl From<&VolumeHeader> for Sidecar {
    fn from(h: &VolumeHeader) -> Self {
        Sidecar {
            dims: h.dims,
            spacing: h.spacing,
            dtype: h.sample_type.as_str().to_string(),
            endian: h.endian.as_str().to_string(),
        }
    }
}

impl TryFrom<Sidecar> for VolumeHeader {
    type Error = Error;

    fn try_from(s: Sidecar) -> Result<Self> {
        Ok(VolumeHeader {
            dims: s.dims,
            spacing: s.spacing,
            sample_type: s.dtype.parse()?,
            endian: s.endian.parse()?,
        })
    }
}

/// Location of the JSON sidecar describing `data_path`.
pub fn sidecar_path(data_path: &Path) -> PathBuf {
    let mut name = data_path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Reads a bare sample array laid out as `header` describes.
///
/// Samples are converted to `f32` without any rescaling.
pub fn load_raw(path: impl AsRef<Path>, header: &VolumeHeader) -> Result<Volume3D> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = header.byte_len();
    if bytes.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            expected,
            actual: bytes.len() as u64,
        });
    }
    let data = decode_samples(&bytes, header.sample_type, header.endian);
    Volume3D::new(header.dims, header.spacing, data)
}

/// Reads a raw volume whose header comes from its sidecar file.
pub fn load_raw_with_sidecar(path: impl AsRef<Path>) -> Result<(Volume3D, VolumeHeader)> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let header = VolumeHeader::from_json(&text).map_err(|e| match e {
        Error::Sidecar { message, .. } => Error::Sidecar {
            path: side.clone(),
            message,
        },
        other => other,
    })?;
    Ok((load_raw(path, &header)?, header))
}

/// Writes `volume` as little-endian samples plus its sidecar.
///
/// Integral types clamp to the representable range and then round half away
/// from zero; NaN is stored as 0. `f32` output is bit-exact.
pub fn save_raw(volume: &Volume3D, path: impl AsRef<Path>, sample_type: SampleType) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_samples(volume.data(), sample_type);
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let header = VolumeHeader {
        dims: volume.dims(),
        spacing: volume.spacing(),
        sample_type,
        endian: Endianness::Little,
    };
    let side = sidecar_path(path);
    fs::write(&side, header.to_json()).map_err(|e| Error::io(&side, e))
}

pub(crate) fn decode_samples(bytes: &[u8], sample_type: SampleType, endian: Endianness) -> Vec<f32> {
    match (sample_type, endian) {
        (SampleType::U8, _) => bytes.iter().map(|&b| b as f32).collect(),
        (SampleType::I16, Endianness::Little) => bytes
            .chunks_exact(2)
            .map(|c| LittleEndian::read_i16(c) as f32)
            .collect(),
        (SampleType::I16, Endianness::Big) => bytes
            .chunks_exact(2)
            .map(|c| BigEndian::read_i16(c) as f32)
            .collect(),
        (SampleType::F32, Endianness::Little) => {
            bytes.chunks_exact(4).map(LittleEndian::read_f32).collect()
        }
        (SampleType::F32, Endianness::Big) => bytes.chunks_exact(4).map(BigEndian::read_f32).collect(),
    }
}

fn quantize(v: f32, lo: f32, hi: f32) -> f32 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(lo, hi).round()
    }
}

fn encode_samples(data: &[f32], sample_type: SampleType) -> Vec<u8> {
    let mut out = vec![0u8; data.len() * sample_type.bytes_per_sample()];
    match sample_type {
        SampleType::U8 => {
            for (o, &v) in out.iter_mut().zip(data) {
                *o = quantize(v, 0.0, 255.0) as u8;
            }
        }
        SampleType::I16 => {
            for (o, &v) in out.chunks_exact_mut(2).zip(data) {
                LittleEndian::write_i16(o, quantize(v, i16::MIN as f32, i16::MAX as f32) as i16);
            }
        }
        SampleType::F32 => LittleEndian::write_f32_into(data, &mut out),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_load_of_byte_ramp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ramp.raw");
        fs::write(&path, (0u8..8).collect::<Vec<_>>()).unwrap();
        let v = load_raw(&path, &VolumeHeader::new([2, 2, 2], SampleType::U8)).unwrap();
        assert_eq!(v.data(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(v.get(1, 0, 0), 1.0);
        assert_eq!(v.get(0, 1, 0), 2.0);
        assert_eq!(v.get(0, 0, 1), 4.0);
    }

    #[test]
    fn brainweb_sized_file_loads() {
        let header = VolumeHeader::brainweb();
        assert_eq!(header.byte_len(), 7_109_137);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t1.rawb");
        fs::write(&path, vec![7u8; 7_109_137]).unwrap();
        let v = load_raw(&path, &header).unwrap();
        assert_eq!(v.dims(), [181, 217, 181]);
        assert_eq!(v.get(180, 216, 180), 7.0);
    }

    #[test]
    fn short_file_is_size_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.raw");
        fs::write(&path, [0u8; 7]).unwrap();
        let err = load_raw(&path, &VolumeHeader::new([2, 2, 2], SampleType::U8)).unwrap_err();
        assert!(matches!(err, Error::SizeMismatch { expected: 8, actual: 7 }));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_raw("/nonexistent/volume.raw", &VolumeHeader::new([1, 1, 1], SampleType::U8))
            .unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn unknown_sample_type_in_sidecar() {
        let err = VolumeHeader::from_json(r#"{"dims":[1,1,1],"spacing":[1,1,1],"dtype":"f64"}"#)
            .unwrap_err();
        assert!(matches!(err, Error::UnknownSampleType(s) if s == "f64"));
    }

    #[test]
    fn u8_clamp_then_round() {
        let v = Volume3D::new([5, 1, 1], [1.0; 3], vec![255.7, -1.2, 2.5, 3.49, f32::NAN]).unwrap();
        assert_eq!(encode_samples(v.data(), SampleType::U8), vec![255, 0, 3, 3, 0]);
        let i = encode_samples(&[-40000.0, -2.5, 40000.0], SampleType::I16);
        let back: Vec<i16> = i.chunks_exact(2).map(LittleEndian::read_i16).collect();
        assert_eq!(back, vec![i16::MIN, -3, i16::MAX]);
    }

    #[test]
    fn sidecar_round_trip_and_big_endian_i16() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.raw");
        let v = Volume3D::new([2, 1, 1], [0.5, 1.0, 2.0], vec![-3.0, 300.0]).unwrap();
        save_raw(&v, &path, SampleType::I16).unwrap();
        let (back, header) = load_raw_with_sidecar(&path).unwrap();
        assert_eq!(back, v);
        assert_eq!(header.sample_type, SampleType::I16);

        fs::write(&path, [0x01, 0x02, 0xff, 0xfe]).unwrap();
        let be = VolumeHeader {
            endian: Endianness::Big,
            ..VolumeHeader::new([2, 1, 1], SampleType::I16)
        };
        assert_eq!(load_raw(&path, &be).unwrap().data(), &[258.0, -2.0]);
    }
}
