//! Mobius function table built by a segmented sieve, with Mertens prefix sums
//! and a flat binary file format.
//!
//! File layout: 8-byte magic `MUTABLE1` (the trailing digit is the format
//! version), little-endian `u64` limit `N`, then `N` signed bytes
//! `mu(1), ..., mu(N)`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::par::Execution;

pub const MAGIC_PREFIX: &[u8; 7] = b"MUTABLE";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: u64 = 16;
pub const DEFAULT_SEGMENT: usize = 1 << 18;

const CHECKPOINT_STRIDE: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MobiusTable {
    values: Vec<i8>,
    // checkpoints[b] = M(b * CHECKPOINT_STRIDE)
    checkpoints: Vec<i64>,
}

impl MobiusTable {
    pub fn build(limit: u64, segment: usize) -> Result<Self> {
        Self::build_with(limit, segment, Execution::default())
    }

    pub fn build_with(limit: u64, segment: usize, exec: Execution) -> Result<Self> {
        check_args(limit, segment)?;
        let primes = primes_up_to(isqrt(limit));
        let mut values = vec![0i8; limit as usize];
        exec.for_each_chunk_mut(&mut values, segment, |ci, out| {
            sieve_segment(1 + (ci * segment) as u64, out, &primes);
        });
        Ok(Self::from_values_unchecked(values))
    }

    /// Wraps precomputed values after checking that every entry is -1, 0 or 1.
    pub fn from_values(values: Vec<i8>) -> Result<Self> {
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !(-1..=1).contains(*v)) {
            return Err(Error::Corrupt {
                index: i as u64 + 1,
                value: v,
            });
        }
        Ok(Self::from_values_unchecked(values))
    }

    fn from_values_unchecked(values: Vec<i8>) -> Self {
        let mut checkpoints = Vec::with_capacity(values.len() / CHECKPOINT_STRIDE + 1);
        let mut acc = 0i64;
        checkpoints.push(0);
        for block in values.chunks(CHECKPOINT_STRIDE) {
            acc += block.iter().map(|&v| v as i64).sum::<i64>();
            checkpoints.push(acc);
        }
        MobiusTable {
            values,
            checkpoints,
        }
    }

    /// Largest `n` covered.
    pub fn limit(&self) -> u64 {
        self.values.len() as u64
    }

    /// `mu(1), ..., mu(N)`.
    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn mu(&self, n: u64) -> Result<i8> {
        if n == 0 || n > self.limit() {
            return Err(Error::OutOfRange {
                index: n,
                limit: self.limit(),
            });
        }
        Ok(self.values[(n - 1) as usize])
    }

    /// Unchecked access for hot loops; `1 <= n <= limit`.
    #[inline]
    pub fn mu_unchecked(&self, n: u64) -> i8 {
        self.values[(n - 1) as usize]
    }

    /// Mertens function `M(x) = sum_{n<=x} mu(n)`, with `M(0) = 0`.
    pub fn mertens(&self, x: u64) -> Result<i64> {
        if x > self.limit() {
            return Err(Error::OutOfRange {
                index: x,
                limit: self.limit(),
            });
        }
        let x = x as usize;
        let b = x / CHECKPOINT_STRIDE;
        let tail: i64 = self.values[b * CHECKPOINT_STRIDE..x]
            .iter()
            .map(|&v| v as i64)
            .sum();
        Ok(self.checkpoints[b] + tail)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        write_header(&mut w, self.limit())?;
        w.write_all(as_bytes(&self.values))?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        let found = bytes.len() as u64;
        let truncated = |expected| Error::Truncated {
            path: path.to_path_buf(),
            expected,
            found,
        };
        if bytes.len() < 8 {
            return Err(if bytes.starts_with(&MAGIC_PREFIX[..bytes.len().min(7)]) {
                truncated(HEADER_LEN)
            } else {
                Error::BadMagic {
                    path: path.to_path_buf(),
                }
            });
        }
        if &bytes[..7] != MAGIC_PREFIX {
            return Err(Error::BadMagic {
                path: path.to_path_buf(),
            });
        }
        let version = bytes[7].wrapping_sub(b'0');
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                path: path.to_path_buf(),
                found: version,
            });
        }
        if bytes.len() < HEADER_LEN as usize {
            return Err(truncated(HEADER_LEN));
        }
        let limit = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice"));
        let expected = HEADER_LEN + limit;
        if found < expected {
            return Err(truncated(expected));
        }
        let values: Vec<i8> = bytes[16..expected as usize].iter().map(|&b| b as i8).collect();
        Self::from_values(values)
    }
}

/// Streams a table for `1..=limit` straight to `path`, keeping only
/// `batch_segments * segment` values in memory at a time.
pub fn build_to_file(
    limit: u64,
    segment: usize,
    path: impl AsRef<Path>,
    exec: Execution,
) -> Result<()> {
    check_args(limit, segment)?;
    let primes = primes_up_to(isqrt(limit));
    let batch_segments = 64usize;
    let batch = (segment as u64).saturating_mul(batch_segments as u64);
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, limit)?;
    let mut buf = Vec::new();
    let mut lo = 1u64;
    while lo <= limit {
        let len = batch.min(limit - lo + 1) as usize;
        buf.clear();
        buf.resize(len, 0i8);
        let base = lo;
        exec.for_each_chunk_mut(&mut buf, segment, |ci, out| {
            sieve_segment(base + (ci * segment) as u64, out, &primes);
        });
        w.write_all(as_bytes(&buf))?;
        lo += len as u64;
    }
    w.flush()?;
    Ok(())
}

fn check_args(limit: u64, segment: usize) -> Result<()> {
    if limit == 0 {
        return Err(Error::precondition("Mobius table limit must be at least 1"));
    }
    if segment == 0 {
        return Err(Error::precondition("segment size must be at least 1"));
    }
    if usize::try_from(limit).is_err() {
        return Err(Error::Overflow(format!("limit {limit} exceeds addressable memory")));
    }
    Ok(())
}

fn write_header<W: Write>(w: &mut W, limit: u64) -> Result<()> {
    w.write_all(MAGIC_PREFIX)?;
    w.write_all(&[b'0' + FORMAT_VERSION])?;
    w.write_all(&limit.to_le_bytes())?;
    Ok(())
}

fn as_bytes(values: &[i8]) -> &[u8] {
    // i8 and u8 share size and alignment.
    unsafe { std::slice::from_raw_parts(values.as_ptr() as *const u8, values.len()) }
}

/// Fills `out[k]` with `mu(lo + k)`.
///
/// Every prime `p <= sqrt(hi)` flips the sign of its multiples and zeroes the
/// multiples of `p^2`; a leftover cofactor (the product of small primes falls
/// short of `n`) is one more prime above `sqrt(hi)`.
fn sieve_segment(lo: u64, out: &mut [i8], primes: &[u64]) {
    let len = out.len() as u64;
    let hi = lo + len; // exclusive
    let mut prod = vec![1u64; out.len()];
    out.fill(1);
    for &p in primes {
        if p * p >= hi {
            break;
        }
        let mut m = lo.div_ceil(p) * p;
        while m < hi {
            let k = (m - lo) as usize;
            out[k] = -out[k];
            prod[k] *= p;
            m += p;
        }
        let sq = p * p;
        let mut m = lo.div_ceil(sq) * sq;
        while m < hi {
            out[(m - lo) as usize] = 0;
            m += sq;
        }
    }
    for (k, v) in out.iter_mut().enumerate() {
        let n = lo + k as u64;
        if *v != 0 && prod[k] < n {
            *v = -*v;
        }
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut m = i * i;
            while m <= n {
                composite[m] = true;
                m += i;
            }
        }
    }
    primes
}

/// `mu(n)` by trial division. Used when no table is attached.
pub fn mobius_of(mut n: u64) -> i8 {
    assert!(n > 0, "mu(0) is undefined");
    let mut mu = 1i8;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            mu = -mu;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_ten() {
        let t = MobiusTable::build(10, 4).unwrap();
        assert_eq!(t.values(), &[1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
        assert_eq!(t.mertens(10).unwrap(), -1);
        assert_eq!(t.mertens(1).unwrap(), 1);
        assert_eq!(t.mertens(0).unwrap(), 0);
    }

    #[test]
    fn limit_one() {
        let t = MobiusTable::build(1, 1).unwrap();
        assert_eq!(t.values(), &[1]);
    }

    #[test]
    fn rejects_bad_args() {
        assert!(MobiusTable::build(0, 10).is_err());
        assert!(MobiusTable::build(10, 0).is_err());
    }

    #[test]
    fn range_errors() {
        let t = MobiusTable::build(100, 7).unwrap();
        assert!(matches!(t.mertens(101), Err(Error::OutOfRange { .. })));
        assert!(t.mu(0).is_err());
        assert!(t.mu(101).is_err());
        assert_eq!(t.mu(30).unwrap(), -1);
    }

    #[test]
    fn checkpointed_mertens_matches_running_sum() {
        let t = MobiusTable::build(200_000, 10_007).unwrap();
        let mut acc = 0i64;
        for x in 1..=200_000u64 {
            acc += t.mu_unchecked(x) as i64;
            if x % 997 == 0 || x == 65_536 || x == 131_072 {
                assert_eq!(t.mertens(x).unwrap(), acc);
            }
        }
    }

    #[test]
    fn trial_division() {
        assert_eq!(mobius_of(1), 1);
        assert_eq!(mobius_of(4), 0);
        assert_eq!(mobius_of(30), -1);
        assert_eq!(mobius_of(97), -1);
        assert_eq!(mobius_of(999_983 * 2), 1);
    }

    #[test]
    fn isqrt_edges() {
        for n in [0u64, 1, 3, 4, 15, 16, 17, 1 << 40, (1 << 40) - 1] {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
    }

    #[test]
    fn streaming_build_matches_in_memory() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mu.bin");
        build_to_file(50_000, 333, &path, Execution::with_workers(3)).unwrap();
        let streamed = MobiusTable::load(&path).unwrap();
        assert_eq!(streamed, MobiusTable::build(50_000, 4096).unwrap());
    }

    #[test]
    fn from_values_rejects_garbage() {
        assert!(matches!(
            MobiusTable::from_values(vec![1, 2]),
            Err(Error::Corrupt { index: 2, value: 2 })
        ));
    }
}
