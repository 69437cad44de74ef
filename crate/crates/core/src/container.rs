//! Binary container for a triplane + decoder pair.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic    4 bytes  "TPLN"
//! version  u32      currently 1
//! R        u32      plane resolution
//! C        u32      channels
//! H        u32      decoder hidden width (0 = affine decoder)
//! extent   f64      cube half-width
//! planes   3 * R*R*C f64, XY then XZ then YZ, row-major, channel-minor
//! decoder  w_hidden (H*C f64), b_hidden (H f64),
//!          w_sdf (W f64), b_sdf (f64),
//!          w_color (3*W f64), b_color (3 f64)
//! ```
//!
//! where `W = H` if `H > 0` else `C`. Values are stored as f64 regardless
//! of the in-memory scalar type; the f64 round-trip is bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{FieldDecoder, Triplane};
use crate::plane::Plane;
use crate::real::Real;

pub const MAGIC: &[u8; 4] = b"TPLN";
pub const VERSION: u32 = 1;

pub fn save_container<T: Real>(
    path: impl AsRef<Path>,
    tp: &Triplane<T>,
    dec: &FieldDecoder<T>,
) -> Result<()> {
    dec.validate()?;
    if dec.channels != tp.channels() {
        return Err(Error::invalid("decoder channel count does not match triplane"));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(tp.resolution() as u32).to_le_bytes())?;
    w.write_all(&(tp.channels() as u32).to_le_bytes())?;
    w.write_all(&(dec.hidden as u32).to_le_bytes())?;
    w.write_all(&tp.extent().as_f64().to_le_bytes())?;
    for plane in tp.planes() {
        write_f64s(&mut w, plane.data())?;
    }
    write_f64s(&mut w, &dec.w_hidden)?;
    write_f64s(&mut w, &dec.b_hidden)?;
    write_f64s(&mut w, &dec.w_sdf)?;
    w.write_all(&dec.b_sdf.as_f64().to_le_bytes())?;
    write_f64s(&mut w, &dec.w_color)?;
    write_f64s(&mut w, &dec.b_color)?;
    w.flush()?;
    Ok(())
}

pub fn load_container<T: Real>(path: impl AsRef<Path>) -> Result<(Triplane<T>, FieldDecoder<T>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Container("bad magic bytes".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Container(format!("unsupported version {version}")));
    }
    let res = read_u32(&mut r)? as usize;
    let channels = read_u32(&mut r)? as usize;
    let hidden = read_u32(&mut r)? as usize;
    let extent = read_f64(&mut r)?;
    if res < 2 || channels < 1 {
        return Err(Error::Container(format!("invalid dimensions R={res} C={channels}")));
    }
    let plane_len = res * res * channels;
    let mut planes = Vec::with_capacity(3);
    for _ in 0..3 {
        let data = read_f64s::<T>(&mut r, plane_len)?;
        planes.push(Plane::from_data(res, channels, data)?);
    }
    let planes: [Plane<T>; 3] = planes.try_into().expect("three planes");
    let tp = Triplane::from_planes(planes, T::of(extent))?;

    let width = if hidden > 0 { hidden } else { channels };
    let dec = FieldDecoder {
        channels,
        hidden,
        w_hidden: read_f64s(&mut r, hidden * channels)?,
        b_hidden: read_f64s(&mut r, hidden)?,
        w_sdf: read_f64s(&mut r, width)?,
        b_sdf: T::of(read_f64(&mut r)?),
        w_color: read_f64s(&mut r, 3 * width)?,
        b_color: {
            let v = read_f64s::<T>(&mut r, 3)?;
            [v[0], v[1], v[2]]
        },
    };
    dec.validate()?;

    // Trailing bytes indicate a corrupt or mismatched file.
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::Container("trailing bytes after decoder parameters".into()));
    }
    Ok((tp, dec))
}

fn write_f64s<T: Real>(w: &mut impl Write, values: &[T]) -> Result<()> {
    for v in values {
        w.write_all(&v.as_f64().to_le_bytes())?;
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let v = f64::from_le_bytes(b);
    if !v.is_finite() {
        return Err(Error::Container("non-finite value in container".into()));
    }
    Ok(v)
}

fn read_f64s<T: Real>(r: &mut impl Read, n: usize) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(T::of(read_f64(r)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn random_pair(seed: u64) -> (Triplane<f64>, FieldDecoder<f64>) {
        let mut rng = Rng::new(seed);
        let planes = [
            Plane::from_fn(6, 3, |_, _, _| rng.range(-2.0, 2.0)),
            Plane::from_fn(6, 3, |_, _, _| rng.range(-2.0, 2.0)),
            Plane::from_fn(6, 3, |_, _, _| rng.range(-2.0, 2.0)),
        ];
        let tp = Triplane::from_planes(planes, 0.5).unwrap();
        let dec = FieldDecoder::init_random(3, 4, &mut rng);
        (tp, dec)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.tpln");
        let (tp, dec) = random_pair(1);
        save_container(&path, &tp, &dec).unwrap();
        let (tp2, dec2) = load_container::<f64>(&path).unwrap();
        assert_eq!(tp, tp2);
        assert_eq!(dec, dec2);
        // Saving again produces identical bytes.
        let path2 = dir.path().join("b.tpln");
        save_container(&path2, &tp2, &dec2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tpln");
        std::fs::write(&path, b"NOPE....").unwrap();
        assert!(load_container::<f64>(&path).is_err());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.tpln");
        let (tp, dec) = random_pair(2);
        save_container(&path, &tp, &dec).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(load_container::<f64>(&path).is_err());
    }
}
