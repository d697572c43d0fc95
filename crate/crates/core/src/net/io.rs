//! Weight files.
//!
//! Layout: magic `PVN1`, then little-endian `u32` format version, `u32` board
//! size, `u32` tensor count, then per tensor `u16` name length, UTF-8 name,
//! `u8` rank, `u32` dims, raw `f32` data; finally a `u32` CRC32 over every byte
//! between the magic and the checksum.

use std::fs;
use std::path::Path;

use crate::Scalar;

use super::params::{tensor_layout, NetConfig, Params, PolicyValueNet};
use super::NetError;

pub const MAGIC: &[u8; 4] = b"PVN1";
pub const FORMAT_VERSION: u32 = 1;

struct Tensor {
    name: String,
    dims: Vec<usize>,
    data: Vec<f32>,
}

pub fn to_bytes<T: Scalar>(net: &PolicyValueNet<T>) -> Vec<u8> {
    let layout = tensor_layout(&net.config);
    let mut payload = Vec::new();
    payload.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    payload.extend_from_slice(&(net.config.size as u32).to_le_bytes());
    payload.extend_from_slice(&(layout.len() as u32).to_le_bytes());
    for ((name, dims), data) in layout.iter().zip(net.slices()) {
        payload.extend_from_slice(&(name.len() as u16).to_le_bytes());
        payload.extend_from_slice(name.as_bytes());
        payload.push(dims.len() as u8);
        for &d in dims {
            payload.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in data {
            payload.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&payload);
    let mut out = Vec::with_capacity(payload.len() + 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NetError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| NetError::Corrupt("unexpected end of file".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, NetError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, NetError> {
        Ok(u16::from_le_bytes(
            self.take(2)?.try_into().expect("2 bytes"),
        ))
    }

    fn u32(&mut self) -> Result<u32, NetError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }
}

fn parse(bytes: &[u8]) -> Result<(usize, Vec<Tensor>), NetError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(NetError::BadMagic);
    }
    if bytes.len() < 8 {
        return Err(NetError::Corrupt("file too short".into()));
    }
    let payload = &bytes[4..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().expect("4 bytes"));
    let mut r = Reader {
        bytes: payload,
        pos: 0,
    };
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(NetError::Version(version));
    }
    if crc32fast::hash(payload) != stored {
        return Err(NetError::Corrupt("checksum mismatch".into()));
    }
    let size = r.u32()? as usize;
    let count = r.u32()? as usize;
    let mut tensors = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let len = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|_| NetError::Corrupt("tensor name is not UTF-8".into()))?
            .to_string();
        let rank = r.u8()? as usize;
        let dims = (0..rank)
            .map(|_| r.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>, _>>()?;
        let numel: usize = dims.iter().product();
        let raw = r.take(
            numel
                .checked_mul(4)
                .ok_or_else(|| NetError::Corrupt("tensor too large".into()))?,
        )?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        tensors.push(Tensor { name, dims, data });
    }
    if r.pos != payload.len() {
        return Err(NetError::Corrupt("trailing bytes".into()));
    }
    Ok((size, tensors))
}

fn infer_config(size: usize, tensors: &[Tensor]) -> Result<NetConfig, NetError> {
    let find = |name: &str| tensors.iter().find(|t| t.name == name);
    let missing = |name: &str| NetError::Shape(format!("missing tensor {name}"));
    let first = find("trunk.0.weight").ok_or_else(|| missing("trunk.0.weight"))?;
    let hidden = find("value.fc1.weight").ok_or_else(|| missing("value.fc1.weight"))?;
    let trunk_layers = tensors
        .iter()
        .filter(|t| t.name.starts_with("trunk.") && t.name.ends_with(".weight"))
        .count();
    let config = NetConfig {
        size,
        channels: *first
            .dims
            .first()
            .ok_or_else(|| missing("trunk.0.weight dims"))?,
        trunk_layers,
        value_hidden: *hidden
            .dims
            .first()
            .ok_or_else(|| missing("value.fc1.weight dims"))?,
    };
    config
        .validate()
        .map_err(|e| NetError::Shape(e.to_string()))?;
    Ok(config)
}

/// Decodes a weight file. With `expected_size`, a file declaring a different
/// board size is a shape mismatch.
pub fn from_bytes<T: Scalar>(
    bytes: &[u8],
    expected_size: Option<usize>,
) -> Result<PolicyValueNet<T>, NetError> {
    let (size, tensors) = parse(bytes)?;
    if let Some(expected) = expected_size {
        if expected != size {
            return Err(NetError::Shape(format!(
                "file is for a {size}x{size} board, expected {expected}x{expected}"
            )));
        }
    }
    let config = infer_config(size, &tensors)?;
    let layout = tensor_layout(&config);
    if layout.len() != tensors.len() {
        return Err(NetError::Shape(format!(
            "expected {} tensors, found {}",
            layout.len(),
            tensors.len()
        )));
    }
    let mut net = PolicyValueNet::<T>::zeros(config);
    for (((name, dims), tensor), dst) in layout.iter().zip(&tensors).zip(net.slices_mut()) {
        if *name != tensor.name || *dims != tensor.dims {
            return Err(NetError::Shape(format!(
                "tensor {} {:?} does not match expected {} {:?}",
                tensor.name, tensor.dims, name, dims
            )));
        }
        for (d, &v) in dst.iter_mut().zip(&tensor.data) {
            *d = T::of(v as f64);
        }
    }
    if !net.all_finite() {
        return Err(NetError::NonFinite("stored parameters"));
    }
    Ok(net)
}

pub fn save<T: Scalar>(net: &PolicyValueNet<T>, path: impl AsRef<Path>) -> Result<(), NetError> {
    fs::write(path, to_bytes(net))?;
    Ok(())
}

pub fn load<T: Scalar>(
    path: impl AsRef<Path>,
    expected_size: Option<usize>,
) -> Result<PolicyValueNet<T>, NetError> {
    from_bytes(&fs::read(path)?, expected_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net() -> PolicyValueNet<f32> {
        PolicyValueNet::init(NetConfig::new(5), 42).unwrap()
    }

    #[test]
    fn save_and_load_are_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.pvn");
        let n = net();
        save(&n, &path).unwrap();
        let back: PolicyValueNet<f32> = load(&path, Some(5)).unwrap();
        assert_eq!(back.config, n.config);
        for (a, b) in back.flat().iter().zip(n.flat()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn header_fields_are_little_endian() {
        let bytes = to_bytes(&net());
        assert_eq!(&bytes[..4], b"PVN1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 16);
        assert_eq!(u16::from_le_bytes(bytes[16..18].try_into().unwrap()), 14);
        assert_eq!(&bytes[18..32], b"trunk.0.weight");
        assert_eq!(bytes[32], 4);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let bytes = to_bytes(&net());
        assert!(matches!(
            from_bytes::<f32>(&bytes[..bytes.len() / 2], None),
            Err(NetError::Corrupt(_))
        ));
        assert!(matches!(
            from_bytes::<f32>(b"NOPE....", None),
            Err(NetError::BadMagic)
        ));
        let mut flipped = bytes.clone();
        flipped[100] ^= 0x40;
        assert!(matches!(
            from_bytes::<f32>(&flipped, None),
            Err(NetError::Corrupt(_))
        ));
        let mut version = bytes.clone();
        version[4] = 9;
        assert!(matches!(
            from_bytes::<f32>(&version, None),
            Err(NetError::Version(9))
        ));
    }

    #[test]
    fn board_size_mismatch_is_a_shape_error() {
        let big = PolicyValueNet::<f32>::init(NetConfig::new(9), 1).unwrap();
        assert!(matches!(
            from_bytes::<f32>(&to_bytes(&big), Some(5)),
            Err(NetError::Shape(_))
        ));
    }

    #[test]
    fn custom_shapes_round_trip() {
        let cfg = NetConfig {
            size: 3,
            channels: 4,
            trunk_layers: 2,
            value_hidden: 8,
        };
        let n = PolicyValueNet::<f64>::init(cfg, 3).unwrap();
        let back: PolicyValueNet<f64> = from_bytes(&to_bytes(&n), None).unwrap();
        assert_eq!(back.config, cfg);
    }
}
