//! Versioned binary checkpoints.
//!
//! Layout, all integers little-endian:
//! magic "PAUIE" | u32 version | u64 config-JSON length | config JSON |
//! u64 iteration | u64 parameter count | per parameter:
//! u16 name length | name | u8 kind | u8 dtype | u8 ndim | u64 dims... |
//! f64 data. Kind 0 = trainable, 1 = buffer; dtype 0 = f64 (the only
//! dtype this version writes).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use indexmap::IndexMap;
use ndarray::{ArrayD, IxDyn};

use crate::config::NetConfig;
use crate::error::NetError;
use crate::store::{parameter_specs, Mode, Param, ParamKind, ParameterStore};

const MAGIC: &[u8; 5] = b"PAUIE";
const VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> NetError {
    NetError::Checkpoint(msg.into())
}

pub fn save(
    path: &Path,
    store: &ParameterStore,
    cfg: &NetConfig,
    iteration: u64,
) -> Result<(), NetError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let cfg_json =
        serde_json::to_vec(cfg).map_err(|e| bad(format!("config serialization: {e}")))?;
    w.write_all(&(cfg_json.len() as u64).to_le_bytes())?;
    w.write_all(&cfg_json)?;
    w.write_all(&iteration.to_le_bytes())?;
    let n = store.iter().count() as u64;
    w.write_all(&n.to_le_bytes())?;
    for (name, p) in store.iter() {
        let name_bytes = name.as_bytes();
        w.write_all(&(name_bytes.len() as u16).to_le_bytes())?;
        w.write_all(name_bytes)?;
        w.write_all(&[if p.kind == ParamKind::Trainable { 0 } else { 1 }])?;
        w.write_all(&[0u8])?; // dtype f64
        w.write_all(&[p.value.ndim() as u8])?;
        for &d in p.value.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for &v in p.value.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N], NetError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| bad(format!("truncated checkpoint: {e}")))?;
    Ok(buf)
}

fn read_u64(r: &mut impl Read) -> Result<u64, NetError> {
    Ok(u64::from_le_bytes(read_exact::<8>(r)?))
}

/// Loads a checkpoint and validates it against the parameter inventory
/// implied by its own config. The returned store is in eval mode.
pub fn load(path: &Path) -> Result<(ParameterStore, NetConfig, u64), NetError> {
    let mut r = BufReader::new(File::open(path)?);

    let magic = read_exact::<5>(&mut r)?;
    if &magic != MAGIC {
        return Err(bad("not a checkpoint file (bad magic)"));
    }
    let version = u32::from_le_bytes(read_exact::<4>(&mut r)?);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let cfg_len = read_u64(&mut r)? as usize;
    if cfg_len > 1 << 20 {
        return Err(bad(format!("implausible config length {cfg_len}")));
    }
    let mut cfg_json = vec![0u8; cfg_len];
    r.read_exact(&mut cfg_json)
        .map_err(|e| bad(format!("truncated config: {e}")))?;
    let cfg: NetConfig =
        serde_json::from_slice(&cfg_json).map_err(|e| bad(format!("config parse: {e}")))?;
    cfg.validate()?;

    let iteration = read_u64(&mut r)?;
    let n_params = read_u64(&mut r)? as usize;

    let specs = parameter_specs(&cfg);
    if n_params != specs.len() {
        return Err(bad(format!(
            "expected {} parameters for this config, file has {n_params}",
            specs.len()
        )));
    }

    let mut params = IndexMap::new();
    for spec in &specs {
        let name_len = u16::from_le_bytes(read_exact::<2>(&mut r)?) as usize;
        let mut name_buf = vec![0u8; name_len];
        r.read_exact(&mut name_buf)
            .map_err(|e| bad(format!("truncated name: {e}")))?;
        let name = String::from_utf8(name_buf).map_err(|_| bad("non-utf8 parameter name"))?;
        if name != spec.name {
            return Err(bad(format!(
                "parameter order mismatch: expected {}, found {name}",
                spec.name
            )));
        }
        let kind = match read_exact::<1>(&mut r)?[0] {
            0 => ParamKind::Trainable,
            1 => ParamKind::Buffer,
            k => return Err(bad(format!("unknown parameter kind {k}"))),
        };
        if kind != spec.kind {
            return Err(bad(format!("kind mismatch for {name}")));
        }
        let dtype = read_exact::<1>(&mut r)?[0];
        if dtype != 0 {
            return Err(bad(format!("unsupported dtype {dtype} for {name}")));
        }
        let ndim = read_exact::<1>(&mut r)?[0] as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(read_u64(&mut r)? as usize);
        }
        if shape != spec.shape {
            return Err(bad(format!(
                "shape mismatch for {name}: expected {:?}, found {shape:?}",
                spec.shape
            )));
        }
        let count: usize = shape.iter().product();
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            data.push(f64::from_le_bytes(read_exact::<8>(&mut r)?));
        }
        let value = ArrayD::from_shape_vec(IxDyn(&shape), data)
            .expect("shape/data length checked above");
        params.insert(name, Param { kind, value });
    }

    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(NetError::Io)? != 0 {
        return Err(bad("trailing bytes after last parameter"));
    }

    Ok((ParameterStore::from_parts(params, Mode::Eval), cfg, iteration))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_identical() {
        let cfg = NetConfig::tiny();
        let store = ParameterStore::init(&cfg, 99).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        save(&path, &store, &cfg, 1234).unwrap();
        let (loaded, cfg2, iter) = load(&path).unwrap();
        assert_eq!(cfg2, cfg);
        assert_eq!(iter, 1234);
        assert_eq!(loaded.mode(), Mode::Eval);
        for ((na, pa), (nb, pb)) in store.iter().zip(loaded.iter()) {
            assert_eq!(na, nb);
            assert_eq!(pa.kind, pb.kind);
            let bits_match = pa
                .value
                .iter()
                .zip(pb.value.iter())
                .all(|(x, y)| x.to_bits() == y.to_bits());
            assert!(bits_match, "{na} changed across save/load");
        }
    }

    #[test]
    fn corrupt_and_truncated_files_are_rejected() {
        let cfg = NetConfig::tiny();
        let store = ParameterStore::init(&cfg, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        save(&path, &store, &cfg, 0).unwrap();

        let bytes = std::fs::read(&path).unwrap();

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        std::fs::write(&path, &bad_magic).unwrap();
        assert!(matches!(load(&path), Err(NetError::Checkpoint(_))));

        let mut bad_version = bytes.clone();
        bad_version[5] = 99;
        std::fs::write(&path, &bad_version).unwrap();
        assert!(matches!(load(&path), Err(NetError::Checkpoint(_))));

        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(load(&path), Err(NetError::Checkpoint(_))));

        let mut extra = bytes.clone();
        extra.push(0);
        std::fs::write(&path, &extra).unwrap();
        assert!(matches!(load(&path), Err(NetError::Checkpoint(_))));
    }
}
