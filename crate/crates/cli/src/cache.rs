//! Content-addressed on-disk store for heat-kernel rows.
//!
//! One file per key, named by the SHA-256 of (matrix hash, t, tol, start
//! set). Layout: magic, row count, column count (u64 LE), the entries as
//! f64 LE bit patterns, then the SHA-256 of everything before it. A file
//! that fails any check is reported and treated as a miss.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use cutoff_lab::chain::{KernelCache, KernelKey, StartSet};
use sha2::{Digest, Sha256};

const MAGIC: &[u8; 8] = b"CLROWS01";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheCorrupt {
    Truncated(usize),
    BadMagic,
    Checksum,
    Shape { rows: u64, cols: u64, len: usize },
}

impl std::fmt::Display for CacheCorrupt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Truncated(len) => write!(f, "truncated file ({len} bytes)"),
            Self::BadMagic => f.write_str("unknown header"),
            Self::Checksum => f.write_str("checksum mismatch"),
            Self::Shape { rows, cols, len } => write!(f, "{rows}x{cols} rows do not fit {len} bytes"),
        }
    }
}

pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &KernelKey) -> PathBuf {
        let mut h = Sha256::new();
        h.update(key.matrix_hash);
        h.update(key.t_bits.to_le_bytes());
        h.update(key.tol_bits.to_le_bytes());
        match key.starts {
            StartSet::All => h.update([0u8]),
            StartSet::Single(x) => {
                h.update([1u8]);
                h.update((x as u64).to_le_bytes());
            }
        }
        let name: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("{name}.rows"))
    }

    fn read(&self, path: &Path) -> Option<Vec<Vec<f64>>> {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return None,
            Err(e) => {
                log::warn!("cache read {} failed ({e}); recomputing", path.display());
                return None;
            }
        };
        match decode(&bytes) {
            Ok(rows) => Some(rows),
            Err(e) => {
                log::warn!("cache entry {} is corrupt ({e}); recomputing", path.display());
                None
            }
        }
    }
}

pub fn encode(rows: &[Vec<f64>]) -> Vec<u8> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(8 + 16 + 8 * rows.len() * cols + 32);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(rows.len() as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    for v in rows.iter().flatten() {
        out.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

pub fn decode(bytes: &[u8]) -> Result<Vec<Vec<f64>>, CacheCorrupt> {
    if bytes.len() < 8 + 16 + 32 {
        return Err(CacheCorrupt::Truncated(bytes.len()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if &body[..8] != MAGIC {
        return Err(CacheCorrupt::BadMagic);
    }
    if Sha256::digest(body).as_slice() != digest {
        return Err(CacheCorrupt::Checksum);
    }
    let word = |i: usize| u64::from_le_bytes(body[i..i + 8].try_into().expect("8 bytes"));
    let (rows, cols) = (word(8), word(16));
    let data = &body[24..];
    if rows.checked_mul(cols).and_then(|c| c.checked_mul(8)) != Some(data.len() as u64) {
        return Err(CacheCorrupt::Shape { rows, cols, len: data.len() });
    }
    Ok(data
        .chunks_exact(8 * cols.max(1) as usize)
        .take(rows as usize)
        .map(|row| {
            row.chunks_exact(8)
                .map(|b| f64::from_bits(u64::from_le_bytes(b.try_into().expect("8 bytes"))))
                .collect()
        })
        .collect())
}

impl KernelCache for DiskCache {
    fn get(&self, key: &KernelKey) -> Option<Vec<Vec<f64>>> {
        self.read(&self.path_for(key))
    }

    fn put(&self, key: &KernelKey, rows: &[Vec<f64>]) {
        let path = self.path_for(key);
        // Write then rename so concurrent readers never see a partial file.
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let result = fs::write(&tmp, encode(rows)).and_then(|_| fs::rename(&tmp, &path));
        if let Err(e) = result {
            log::warn!("cache write {} failed: {e}", path.display());
            fs::remove_file(&tmp).ok();
        }
    }
}
