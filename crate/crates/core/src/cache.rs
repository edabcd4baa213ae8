//! On-disk orbit cache.
//!
//! One file per (field, class label), named by the SHA-256 of that key. The
//! layout is little-endian:
//!
//! ```text
//! b"PSOVORB\0"  magic
//! u16           format version (1)
//! u8, u8        k, modulus
//! [packed]      class label
//! u64           number of tables
//! [packed]*     the sorted orbit, `k` bits per value
//! [32]          SHA-256 of everything above
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::magic::normalized_orbit;
use crate::opoly::{normalize_table, FuncTable};

pub const CACHE_ENV: &str = "PSEUDOVAL_CACHE_DIR";
const MAGIC: &[u8; 8] = b"PSOVORB\0";
const VERSION: u16 = 1;

pub struct OrbitCache {
    dir: PathBuf,
}

impl OrbitCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(OrbitCache { dir })
    }

    /// The cache named by `PSEUDOVAL_CACHE_DIR`, if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Ok(Some(OrbitCache::new(PathBuf::from(d))?)),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, field: &Field, label: &FuncTable) -> PathBuf {
        let mut h = Sha256::new();
        h.update([field.degree() as u8, field.modulus() as u8]);
        h.update(label.to_bytes());
        let name: String = h.finalize().iter().take(16).map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("orbit-gf{}-{name}.bin", field.order()))
    }

    /// The sorted normalized orbit of `label`, read from disk or computed and stored.
    pub fn orbit(&self, field: &Field, label: &FuncTable) -> Result<Vec<FuncTable>> {
        let label = normalize_table(field, label);
        let path = self.path_for(field, &label);
        if path.exists() {
            if let Ok(orbit) = read_orbit(&path, field, &label) {
                return Ok(orbit);
            }
        }
        let orbit = normalized_orbit(field, &label);
        write_orbit(&path, field, &label, &orbit)?;
        Ok(orbit)
    }
}

pub fn encode_orbit(field: &Field, label: &FuncTable, orbit: &[FuncTable]) -> Vec<u8> {
    let k = field.degree();
    let mut buf = Vec::with_capacity(64 + orbit.len() * FuncTable::packed_len(k));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(k as u8);
    buf.push(field.modulus() as u8);
    label.pack(k, &mut buf);
    buf.extend_from_slice(&(orbit.len() as u64).to_le_bytes());
    for t in orbit {
        t.pack(k, &mut buf);
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    buf
}

pub fn decode_orbit(bytes: &[u8], field: &Field, label: &FuncTable) -> Result<Vec<FuncTable>> {
    let bad = |m: &str| Error::Format(format!("orbit cache: {m}"));
    let k = field.degree();
    let w = FuncTable::packed_len(k);
    let header = 8 + 2 + 2 + w + 8;
    if bytes.len() < header + 32 {
        return Err(bad("truncated"));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(bad("checksum mismatch"));
    }
    if &body[..8] != MAGIC || u16::from_le_bytes([body[8], body[9]]) != VERSION {
        return Err(bad("unknown magic or version"));
    }
    if body[10] as u32 != k || body[11] as u32 != field.modulus() {
        return Err(bad("field mismatch"));
    }
    if FuncTable::unpack(k, &body[12..12 + w])? != *label {
        return Err(bad("label mismatch"));
    }
    let count = u64::from_le_bytes(body[12 + w..header].try_into().unwrap()) as usize;
    let rest = &body[header..];
    if rest.len() != count * w {
        return Err(bad("length does not match count"));
    }
    rest.chunks_exact(w).map(|c| FuncTable::unpack(k, c)).collect()
}

fn write_orbit(path: &Path, field: &Field, label: &FuncTable, orbit: &[FuncTable]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, encode_orbit(field, label, orbit))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_orbit(path: &Path, field: &Field, label: &FuncTable) -> Result<Vec<FuncTable>> {
    decode_orbit(&fs::read(path)?, field, label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_corruption() {
        let f = Field::standard(4).unwrap();
        let label = FuncTable::monomial(&f, 2);
        let orbit = normalized_orbit(&f, &label);
        let mut bytes = encode_orbit(&f, &label, &orbit);
        assert_eq!(decode_orbit(&bytes, &f, &label).unwrap(), orbit);
        bytes[40] ^= 1;
        assert!(decode_orbit(&bytes, &f, &label).is_err());
    }

    #[test]
    fn cache_dir_reuse() {
        let dir = tempfile::tempdir().unwrap();
        let cache = OrbitCache::new(dir.path()).unwrap();
        let f = Field::standard(3).unwrap();
        let label = FuncTable::monomial(&f, 4);
        let a = cache.orbit(&f, &label).unwrap();
        assert!(cache.path_for(&f, &label).exists());
        assert_eq!(cache.orbit(&f, &label).unwrap(), a);
    }
}
