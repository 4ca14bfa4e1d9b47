//! Optional binary cache of sieved segments.
//!
//! One file per segment, keyed by (lo, hi, format version) in the file name
//! and repeated in the header.  Layout, all little-endian:
//!
//! ```text
//! magic  "LAFS"              4 bytes
//! version u16                2 bytes
//! lo      u64                8 bytes
//! hi      u64                8 bytes
//! then (hi − lo) fixed-width records of 57 bytes:
//!   n u64 | largest_prime u64 | beta u64 | b u64 | b1 u64
//!   | omega u32 | big_omega u32 | is_squarefree u8 | squarefull_part u64
//! ```
//!
//! Reads validate the header against the requested key, the exact file
//! length, and per-record consistency (`n == lo + i`, boolean byte in
//! {0, 1}).  Any mismatch classifies the file as [`CacheRead::Rejected`];
//! the caller recomputes and overwrites.  Corruption is therefore never an
//! error, only a cache miss with a tally the caller may surface as a warning.

use super::{ArithRecord, SieveSegment};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

pub const MAGIC: [u8; 4] = *b"LAFS";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 22;
const RECORD_LEN: usize = 57;

pub enum CacheRead {
    Hit(SieveSegment),
    /// File exists but is corrupt or has a stale format: recompute.
    Rejected,
    Absent,
}

/// Cache file path for a segment key.
pub fn segment_path(dir: &Path, lo: u64, hi: u64) -> PathBuf {
    dir.join(format!("laf-v{VERSION}-{lo}-{hi}.seg"))
}

/// Writes a segment; goes through a temp file + rename so concurrent readers
/// never observe a torn file.
pub fn write_segment(dir: &Path, seg: &SieveSegment) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let final_path = segment_path(dir, seg.lo, seg.hi);
    let tmp_path = final_path.with_extension(format!("tmp{}", std::process::id()));
    let mut buf = Vec::with_capacity(HEADER_LEN + RECORD_LEN * seg.records.len());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&seg.lo.to_le_bytes());
    buf.extend_from_slice(&seg.hi.to_le_bytes());
    for r in &seg.records {
        buf.extend_from_slice(&r.n.to_le_bytes());
        buf.extend_from_slice(&r.largest_prime.to_le_bytes());
        buf.extend_from_slice(&r.beta.to_le_bytes());
        buf.extend_from_slice(&r.b.to_le_bytes());
        buf.extend_from_slice(&r.b1.to_le_bytes());
        buf.extend_from_slice(&r.omega.to_le_bytes());
        buf.extend_from_slice(&r.big_omega.to_le_bytes());
        buf.push(r.is_squarefree as u8);
        buf.extend_from_slice(&r.squarefull_part.to_le_bytes());
    }
    let mut file = fs::File::create(&tmp_path)?;
    file.write_all(&buf)?;
    file.sync_all()?;
    drop(file);
    fs::rename(&tmp_path, &final_path)?;
    Ok(final_path)
}

/// Attempts to load the segment [lo, hi) from the cache.
pub fn read_segment(dir: &Path, lo: u64, hi: u64) -> CacheRead {
    let path = segment_path(dir, lo, hi);
    let mut file = match fs::File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return CacheRead::Absent,
        Err(_) => return CacheRead::Rejected,
    };
    let expected_len = HEADER_LEN + RECORD_LEN * (hi - lo) as usize;
    let mut buf = Vec::new();
    if file.read_to_end(&mut buf).is_err() || buf.len() != expected_len {
        return CacheRead::Rejected;
    }
    if buf[0..4] != MAGIC
        || u16::from_le_bytes([buf[4], buf[5]]) != VERSION
        || u64::from_le_bytes(buf[6..14].try_into().unwrap()) != lo
        || u64::from_le_bytes(buf[14..22].try_into().unwrap()) != hi
    {
        return CacheRead::Rejected;
    }
    let mut records = Vec::with_capacity((hi - lo) as usize);
    for (i, chunk) in buf[HEADER_LEN..].chunks_exact(RECORD_LEN).enumerate() {
        let u64_at = |o: usize| u64::from_le_bytes(chunk[o..o + 8].try_into().unwrap());
        let u32_at = |o: usize| u32::from_le_bytes(chunk[o..o + 4].try_into().unwrap());
        let squarefree_byte = chunk[48];
        if squarefree_byte > 1 {
            return CacheRead::Rejected;
        }
        let r = ArithRecord {
            n: u64_at(0),
            largest_prime: u64_at(8),
            beta: u64_at(16),
            b: u64_at(24),
            b1: u64_at(32),
            omega: u32_at(40),
            big_omega: u32_at(44),
            is_squarefree: squarefree_byte == 1,
            squarefull_part: u64_at(49),
        };
        if r.n != lo + i as u64 {
            return CacheRead::Rejected;
        }
        records.push(r);
    }
    CacheRead::Hit(SieveSegment { lo, hi, records })
}
