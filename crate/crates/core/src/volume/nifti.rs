//! Read-only subset of single-file NIfTI-1.
//!
//! Only uncompressed `.nii` files with `dim[0] == 3` and datatype uint8,
//! int16 or float32 are accepted. Orientation fields are ignored.

use std::fs;
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian};

use super::raw::{decode_samples, Endianness, SampleType, VolumeHeader};
use super::Volume3D;
use crate::error::{Error, Result};

const HEADER_SIZE: usize = 348;

mod offsets {
    pub const SIZEOF_HDR: usize = 0;
    pub const DIM: usize = 40;
    pub const DATATYPE: usize = 70;
    pub const PIXDIM: usize = 76;
    pub const VOX_OFFSET: usize = 108;
    pub const SCL_SLOPE: usize = 112;
    pub const SCL_INTER: usize = 116;
    pub const MAGIC: usize = 344;
}

struct Reader {
    big: bool,
}

impl Reader {
    fn i16(&self, b: &[u8], at: usize) -> i16 {
        if self.big {
            BigEndian::read_i16(&b[at..])
        } else {
            LittleEndian::read_i16(&b[at..])
        }
    }

    fn f32(&self, b: &[u8], at: usize) -> f32 {
        if self.big {
            BigEndian::read_f32(&b[at..])
        } else {
            LittleEndian::read_f32(&b[at..])
        }
    }
}

/// Loads a 3D NIfTI-1 volume, applying `scl_slope`/`scl_inter` when the slope is nonzero.
pub fn load_nifti(path: impl AsRef<Path>) -> Result<(Volume3D, VolumeHeader)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < HEADER_SIZE {
        return Err(Error::InvalidHeader(format!(
            "file is {} bytes, shorter than the 348-byte header",
            bytes.len()
        )));
    }
    if &bytes[offsets::MAGIC..offsets::MAGIC + 4] != b"n+1\0" {
        return Err(Error::BadMagic);
    }
    let big = match (
        LittleEndian::read_i32(&bytes[offsets::SIZEOF_HDR..]),
        BigEndian::read_i32(&bytes[offsets::SIZEOF_HDR..]),
    ) {
        (348, _) => false,
        (_, 348) => true,
        (n, _) => return Err(Error::InvalidHeader(format!("sizeof_hdr is {n}, expected 348"))),
    };
    let r = Reader { big };

    let ndim = r.i16(&bytes, offsets::DIM);
    if ndim != 3 {
        return Err(Error::Dimensionality(ndim));
    }
    let mut dims = [0usize; 3];
    for (a, d) in dims.iter_mut().enumerate() {
        let v = r.i16(&bytes, offsets::DIM + 2 * (a + 1));
        if v < 1 {
            return Err(Error::InvalidHeader(format!("dim[{}] = {v}", a + 1)));
        }
        *d = v as usize;
    }

    let datatype = r.i16(&bytes, offsets::DATATYPE);
    let sample_type = match datatype {
        2 => SampleType::U8,
        4 => SampleType::I16,
        16 => SampleType::F32,
        other => return Err(Error::UnsupportedDatatype(other)),
    };

    let mut spacing = [1.0f32; 3];
    for (a, s) in spacing.iter_mut().enumerate() {
        let v = r.f32(&bytes, offsets::PIXDIM + 4 * (a + 1)).abs();
        // Unset pixdim is common in hand-made files; fall back to 1 mm.
        if v > 0.0 && v.is_finite() {
            *s = v;
        }
    }

    let vox_offset = r.f32(&bytes, offsets::VOX_OFFSET);
    if !(vox_offset.is_finite() && vox_offset >= HEADER_SIZE as f32) {
        return Err(Error::InvalidHeader(format!("vox_offset {vox_offset} is before the end of the header")));
    }
    let start = vox_offset as usize;
    let header = VolumeHeader {
        dims,
        spacing,
        sample_type,
        endian: if big { Endianness::Big } else { Endianness::Little },
    };
    let len = header.byte_len() as usize;
    if bytes.len() < start + len {
        return Err(Error::SizeMismatch {
            expected: (start + len) as u64,
            actual: bytes.len() as u64,
        });
    }
    let mut data = decode_samples(&bytes[start..start + len], sample_type, header.endian);

    let slope = r.f32(&bytes, offsets::SCL_SLOPE);
    let inter = r.f32(&bytes, offsets::SCL_INTER);
    if slope != 0.0 && slope.is_finite() {
        let inter = if inter.is_finite() { inter } else { 0.0 };
        for v in &mut data {
            *v = *v * slope + inter;
        }
    }

    Ok((Volume3D::new(dims, spacing, data)?, header))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Hdr {
        ndim: i16,
        dims: [i16; 3],
        datatype: i16,
        bitpix: i16,
        slope: f32,
        inter: f32,
    }

    fn file(h: &Hdr, payload: &[u8]) -> Vec<u8> {
        let mut b = vec![0u8; 352];
        LittleEndian::write_i32(&mut b[0..], 348);
        LittleEndian::write_i16(&mut b[40..], h.ndim);
        for (a, d) in h.dims.iter().enumerate() {
            LittleEndian::write_i16(&mut b[42 + 2 * a..], *d);
        }
        LittleEndian::write_i16(&mut b[70..], h.datatype);
        LittleEndian::write_i16(&mut b[72..], h.bitpix);
        for a in 0..3 {
            LittleEndian::write_f32(&mut b[80 + 4 * a..], 1.5);
        }
        LittleEndian::write_f32(&mut b[108..], 352.0);
        LittleEndian::write_f32(&mut b[112..], h.slope);
        LittleEndian::write_f32(&mut b[116..], h.inter);
        b[344..348].copy_from_slice(b"n+1\0");
        b.extend_from_slice(payload);
        b
    }

    fn write(bytes: &[u8]) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.nii");
        fs::write(&path, bytes).unwrap();
        (dir, path)
    }

    fn f32_hdr(dims: [i16; 3]) -> Hdr {
        Hdr {
            ndim: 3,
            dims,
            datatype: 16,
            bitpix: 32,
            slope: 0.0,
            inter: 0.0,
        }
    }

    #[test]
    fn float32_without_scaling_passes_through() {
        let values: Vec<f32> = (0..64).map(|i| i as f32 * 0.25).collect();
        let mut payload = vec![0u8; 256];
        LittleEndian::write_f32_into(&values, &mut payload);
        let (_d, path) = write(&file(&f32_hdr([4, 4, 4]), &payload));
        let (v, h) = load_nifti(&path).unwrap();
        assert_eq!(v.dims(), [4, 4, 4]);
        assert_eq!(v.spacing(), [1.5; 3]);
        assert_eq!(v.data(), values.as_slice());
        assert_eq!(h.sample_type, SampleType::F32);
    }

    #[test]
    fn affine_scaling_applied() {
        let hdr = Hdr {
            dims: [1, 1, 1],
            datatype: 2,
            bitpix: 8,
            slope: 2.0,
            inter: 1.0,
            ..f32_hdr([1, 1, 1])
        };
        let (_d, path) = write(&file(&hdr, &[3]));
        assert_eq!(load_nifti(&path).unwrap().0.data(), &[7.0]);
    }

    #[test]
    fn int16_is_supported() {
        let hdr = Hdr {
            datatype: 4,
            bitpix: 16,
            ..f32_hdr([2, 1, 1])
        };
        let mut payload = [0u8; 4];
        LittleEndian::write_i16_into(&[-5, 1200], &mut payload);
        let (_d, path) = write(&file(&hdr, &payload));
        assert_eq!(load_nifti(&path).unwrap().0.data(), &[-5.0, 1200.0]);
    }

    #[test]
    fn float64_is_rejected() {
        let hdr = Hdr {
            datatype: 64,
            bitpix: 64,
            ..f32_hdr([1, 1, 1])
        };
        let (_d, path) = write(&file(&hdr, &[0u8; 8]));
        assert!(matches!(load_nifti(&path), Err(Error::UnsupportedDatatype(64))));
    }

    #[test]
    fn bad_magic_and_wrong_dimensionality() {
        let mut bytes = file(&f32_hdr([1, 1, 1]), &[0u8; 4]);
        bytes[344..348].copy_from_slice(b"ni1\0");
        let (_d, path) = write(&bytes);
        assert!(matches!(load_nifti(&path), Err(Error::BadMagic)));

        let hdr = Hdr {
            ndim: 4,
            ..f32_hdr([1, 1, 1])
        };
        let (_d2, path) = write(&file(&hdr, &[0u8; 4]));
        assert!(matches!(load_nifti(&path), Err(Error::Dimensionality(4))));
    }

    #[test]
    fn truncated_payload() {
        let (_d, path) = write(&file(&f32_hdr([2, 2, 2]), &[0u8; 8]));
        assert!(matches!(load_nifti(&path), Err(Error::SizeMismatch { .. })));
    }
}
