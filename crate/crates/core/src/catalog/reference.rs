//! Reference block sums `S^{theta0}_{j,n}` and their on-disk cache.
//!
//! Cache file layout: magic `REFSUMS1`, little-endian `u64` count, then
//! `count` little-endian `f64` values. Files are keyed by series, parameter
//! bits, block size and stage count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::bound::BoundSpec;
use super::series::SeriesSpec;
use crate::error::{Error, Result};
use crate::summation::{block_sums, SumOptions, TermSource};

pub const CACHE_MAGIC: &[u8; 8] = b"REFSUMS1";

/// `S_{j,n}` for `j = 1..=stages` of `spec`, starting at its first index.
pub fn reference_block_sums(spec: &SeriesSpec, n: u64, stages: u64, opts: &SumOptions) -> Result<Vec<f64>> {
    block_sums(spec, spec.start_index(), n, stages, opts)
}

/// Builds the reference series a bound needs, sharing `like`'s Mobius table.
pub fn reference_series(bound: &BoundSpec, like: &SeriesSpec) -> Result<Option<SeriesSpec>> {
    let Some((id, params)) = bound.reference() else {
        return Ok(None);
    };
    let mut spec = SeriesSpec::new(id, params)?;
    if let Some(t) = like.mobius() {
        spec = spec.with_mobius(t.clone());
    }
    Ok(Some(spec))
}

/// Directory-backed cache of reference block sums.
#[derive(Debug, Clone)]
pub struct RefCache {
    dir: PathBuf,
}

impl RefCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        RefCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, spec: &SeriesSpec, n: u64, stages: u64) -> PathBuf {
        let (a, b) = spec.params().bits();
        self.dir
            .join(format!("{}-{a:016x}-{b:016x}-n{n}-k{stages}.refsums", spec.id()))
    }

    /// Loads the cached sums, or computes and stores them. A damaged cache
    /// file is recomputed and overwritten.
    pub fn get_or_compute(
        &self,
        spec: &SeriesSpec,
        n: u64,
        stages: u64,
        opts: &SumOptions,
    ) -> Result<Vec<f64>> {
        let path = self.path_for(spec, n, stages);
        if let Ok(v) = read_sums(&path) {
            if v.len() as u64 == stages {
                return Ok(v);
            }
        }
        let sums = reference_block_sums(spec, n, stages, opts)?;
        fs::create_dir_all(&self.dir)?;
        write_sums(&path, &sums)?;
        Ok(sums)
    }
}

pub fn write_sums(path: &Path, sums: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 + 8 * sums.len());
    bytes.extend_from_slice(CACHE_MAGIC);
    bytes.extend_from_slice(&(sums.len() as u64).to_le_bytes());
    for v in sums {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    // Write beside the target then rename, so readers never see a partial file.
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(&bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_sums(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() < 8 || &bytes[..8] != CACHE_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
        });
    }
    let truncated = |expected| Error::Truncated {
        path: path.to_path_buf(),
        expected,
        found: bytes.len() as u64,
    };
    if bytes.len() < 16 {
        return Err(truncated(16));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice"));
    let expected = count.checked_mul(8).and_then(|b| b.checked_add(16)).ok_or_else(|| truncated(u64::MAX))?;
    if (bytes.len() as u64) < expected {
        return Err(truncated(expected));
    }
    Ok(bytes[16..expected as usize]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}
