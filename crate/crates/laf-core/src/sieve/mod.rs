//! Segmented factorization sieve for the large additive functions.
//!
//! For every integer n in a range the sieve produces an [`ArithRecord`]
//! carrying beta(n), B(n), B1(n), the largest prime factor P(n), omega,
//! Omega, squarefreeness, and the squarefull part of n — everything the
//! summatory experiments consume — without materializing factorizations.
//!
//! Algorithm, per segment [lo, hi):
//! 1. For each base prime p ≤ √(hi−1) and each power p^j ≤ hi−1, walk the
//!    multiples of p^j inside the segment once.  A visit of p^j to n says
//!    "p divides n at least j times", so the contributions telescope:
//!      j = 1: beta += p, B += p, B1 += p, omega += 1, Omega += 1
//!      j ≥ 2: B += p, B1 += p^j − p^{j−1}, Omega += 1, squarefull part
//!             gains p (and an extra p at j = 2)
//!    so after all visits B1 has received exactly p^α for p^α || n.
//! 2. Each visit also multiplies a per-slot running product of extracted
//!    primes.  Afterwards n divided by its product is either 1 or a single
//!    prime > √(hi−1) — the one prime factor the base primes cannot reach —
//!    which is folded in as exponent 1.
//!
//! Work per segment is O((hi−lo)·log log hi) index steps plus one division
//! per n; no per-n trial division anywhere.
//!
//! Streaming (`stream_segments` / `stream_records`) chunks [1, limit] into
//! segments, computes them on a small worker pool, and delivers them to the
//! consumer strictly in ascending order (round-robin handoff, one segment
//! per worker in flight).  Ascending delivery is what makes downstream
//! compensated sums independent of segment size and worker count.

pub mod cache;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use thiserror::Error;

/// Hard ceiling for any n this crate will sieve.
pub const GLOBAL_LIMIT: u64 = 1 << 40;
/// Default records per streamed segment.
pub const DEFAULT_SEGMENT_SIZE: usize = 1 << 20;
/// Largest single segment `sieve_range` will materialize (memory guard).
pub const MAX_SEGMENT_SIZE: usize = 1 << 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SieveError {
    #[error("n = 0 has no factorization")]
    ZeroInput,
    #[error("range [{lo}, {hi}) is empty or reversed")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("range [{lo}, {hi}) has {len} records, over the {cap} cap for one segment")]
    SegmentTooLarge { lo: u64, hi: u64, len: u64, cap: usize },
    #[error("bound {limit} exceeds the supported ceiling 2^40")]
    LimitTooLarge { limit: u64 },
    #[error("segment size must be positive")]
    ZeroSegmentSize,
    #[error("lo must be at least 1, got {lo}")]
    LoBelowOne { lo: u64 },
}

/// Error from the streaming driver: either the sieve itself failed or the
/// consumer returned an error (which aborts the stream cleanly).
#[derive(Debug, PartialEq, Eq)]
pub enum StreamError<E> {
    Sieve(SieveError),
    Consumer(E),
}

impl<E: std::fmt::Display> std::fmt::Display for StreamError<E> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StreamError::Sieve(e) => write!(f, "sieve error: {e}"),
            StreamError::Consumer(e) => write!(f, "consumer error: {e}"),
        }
    }
}

impl<E: std::fmt::Debug + std::fmt::Display> std::error::Error for StreamError<E> {}

impl<E> From<SieveError> for StreamError<E> {
    fn from(e: SieveError) -> Self {
        StreamError::Sieve(e)
    }
}

/// Prime factorization n = Π p_i^{a_i} with primes strictly ascending.
/// `factors` is empty exactly for n = 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

/// Everything the experiments need to know about one integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArithRecord {
    pub n: u64,
    /// P(n): largest prime factor, with P(1) = 1.
    pub largest_prime: u64,
    /// beta(n) = Σ_{p|n} p; 0 for n = 1.
    pub beta: u64,
    /// B(n) = Σ_{p^α||n} α·p.
    pub b: u64,
    /// B1(n) = Σ_{p^α||n} p^α.
    pub b1: u64,
    /// Number of distinct prime factors.
    pub omega: u32,
    /// Number of prime factors with multiplicity.
    pub big_omega: u32,
    pub is_squarefree: bool,
    /// The unique squarefull s with n = q·s, q squarefree, gcd(q, s) = 1;
    /// 1 when n is squarefree.
    pub squarefull_part: u64,
}

impl ArithRecord {
    /// B(n) − beta(n).  Depends only on the squarefull part; 0 iff n is
    /// squarefree, and never 1.
    #[inline]
    pub fn excess(&self) -> u64 {
        self.b - self.beta
    }

    fn unit(n: u64) -> ArithRecord {
        ArithRecord {
            n,
            largest_prime: 1,
            beta: 0,
            b: 0,
            b1: 0,
            omega: 0,
            big_omega: 0,
            is_squarefree: true,
            squarefull_part: 1,
        }
    }
}

/// Reference factorization by trial division (2, 3, then 6k±1).  This is the
/// oracle the sieve is validated against; it is deliberately simple.
pub fn factorize(n: u64) -> Result<Factorization, SieveError> {
    if n == 0 {
        return Err(SieveError::ZeroInput);
    }
    let mut rem = n;
    let mut factors = Vec::new();
    let mut push = |p: u64, rem: &mut u64| {
        let mut a = 0u32;
        while *rem % p == 0 {
            *rem /= p;
            a += 1;
        }
        if a > 0 {
            factors.push((p, a));
        }
    };
    push(2, &mut rem);
    push(3, &mut rem);
    let mut d = 5u64;
    while d * d <= rem {
        push(d, &mut rem);
        push(d + 2, &mut rem);
        d += 6;
    }
    if rem > 1 {
        factors.push((rem, 1));
    }
    Ok(Factorization { n, factors })
}

/// Builds the full record from a factorization.
pub fn record_of(f: &Factorization) -> ArithRecord {
    let mut r = ArithRecord::unit(f.n);
    for &(p, a) in &f.factors {
        r.beta += p;
        r.b += a as u64 * p;
        r.b1 += p.pow(a);
        r.omega += 1;
        r.big_omega += a;
        r.largest_prime = p; // factors ascend, so the last write wins
        if a >= 2 {
            r.is_squarefree = false;
            r.squarefull_part *= p.pow(a);
        }
    }
    r
}

/// One contiguous block of records; `records[i].n == lo + i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveSegment {
    pub lo: u64,
    pub hi: u64,
    pub records: Vec<ArithRecord>,
}

/// Configuration for the streaming driver.
#[derive(Clone, Debug)]
pub struct SieveOptions {
    /// Records per segment (default 2^20).
    pub segment_size: usize,
    /// Worker threads; 1 means fully sequential.
    pub threads: usize,
    /// Directory for the binary segment cache; None disables caching.
    pub cache_dir: Option<std::path::PathBuf>,
}

impl Default for SieveOptions {
    fn default() -> Self {
        let threads = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
            .min(8);
        SieveOptions {
            segment_size: DEFAULT_SEGMENT_SIZE,
            threads,
            cache_dir: None,
        }
    }
}

impl SieveOptions {
    pub fn sequential() -> Self {
        SieveOptions {
            threads: 1,
            ..SieveOptions::default()
        }
    }

    pub fn with_segment_size(mut self, segment_size: usize) -> Self {
        self.segment_size = segment_size;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn with_cache_dir(mut self, dir: impl Into<std::path::PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }
}

/// Totals reported by a completed stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StreamSummary {
    pub segments: u64,
    pub records: u64,
    /// Segments served from the cache.
    pub cache_hits: u64,
    /// Cache files that existed but were rejected (corrupt or stale format)
    /// and recomputed.  Recovery is silent at this level; callers may warn.
    pub cache_rejects: u64,
}

/// Sieves one range [lo, hi) into a segment.  Capped at [`MAX_SEGMENT_SIZE`]
/// records; use the streaming driver for longer spans.
pub fn sieve_range(lo: u64, hi: u64) -> Result<SieveSegment, SieveError> {
    check_range(lo, hi)?;
    if hi - lo > MAX_SEGMENT_SIZE as u64 {
        return Err(SieveError::SegmentTooLarge {
            lo,
            hi,
            len: hi - lo,
            cap: MAX_SEGMENT_SIZE,
        });
    }
    let base = crate::primes::primes_below((hi - 1).isqrt() + 1);
    Ok(sieve_segment(lo, hi, &base))
}

fn check_range(lo: u64, hi: u64) -> Result<(), SieveError> {
    if lo < 1 {
        return Err(SieveError::LoBelowOne { lo });
    }
    if hi <= lo {
        return Err(SieveError::EmptyRange { lo, hi });
    }
    if hi - 1 > GLOBAL_LIMIT {
        return Err(SieveError::LimitTooLarge { limit: hi - 1 });
    }
    Ok(())
}

/// Core segment computation.  `base` must contain every prime ≤ √(hi−1).
fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> SieveSegment {
    let len = (hi - lo) as usize;
    let mut records: Vec<ArithRecord> = (lo..hi).map(ArithRecord::unit).collect();
    // Product of all prime powers extracted so far, per slot.
    let mut extracted: Vec<u64> = vec![1; len];
    let root = (hi - 1).isqrt();
    for &p in base {
        if p > root {
            break;
        }
        // j = 1: every multiple of p.
        let start = lo.div_ceil(p) * p;
        let mut idx = (start - lo) as usize;
        while idx < len {
            let r = &mut records[idx];
            r.beta += p;
            r.b += p;
            r.b1 += p;
            r.omega += 1;
            r.big_omega += 1;
            r.largest_prime = p; // base primes ascend
            extracted[idx] *= p;
            idx += p as usize;
        }
        // j ≥ 2: multiples of p^j contribute the telescoping B1 delta.
        let mut pj_prev = p;
        let mut pj = p * p;
        while pj <= hi - 1 {
            let start = lo.div_ceil(pj) * pj;
            let mut idx = (start - lo) as usize;
            while idx < len {
                let r = &mut records[idx];
                r.b += p;
                r.b1 += pj - pj_prev;
                r.big_omega += 1;
                r.is_squarefree = false;
                r.squarefull_part *= if pj == p * p { p * p } else { p };
                extracted[idx] *= p;
                idx += pj as usize;
            }
            pj_prev = pj;
            match pj.checked_mul(p) {
                Some(next) => pj = next,
                None => break,
            }
        }
    }
    // Whatever survives division by the extracted part is a prime > root.
    for (idx, r) in records.iter_mut().enumerate() {
        let leftover = r.n / extracted[idx];
        if leftover > 1 {
            r.beta += leftover;
            r.b += leftover;
            r.b1 += leftover;
            r.omega += 1;
            r.big_omega += 1;
            r.largest_prime = leftover; // larger than every base prime
        }
    }
    SieveSegment { lo, hi, records }
}

fn segment_bounds(limit: u64, segment_size: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut lo = 1u64;
    while lo <= limit {
        let hi = lo.saturating_add(segment_size as u64).min(limit + 1);
        out.push((lo, hi));
        lo = hi;
    }
    out
}

/// Computes a segment, consulting the cache first when one is configured.
fn produce_segment(
    lo: u64,
    hi: u64,
    base: &[u64],
    cache_dir: Option<&std::path::Path>,
    hits: &AtomicU64,
    rejects: &AtomicU64,
) -> SieveSegment {
    if let Some(dir) = cache_dir {
        match cache::read_segment(dir, lo, hi) {
            cache::CacheRead::Hit(seg) => {
                hits.fetch_add(1, Ordering::Relaxed);
                return seg;
            }
            cache::CacheRead::Rejected => {
                rejects.fetch_add(1, Ordering::Relaxed);
            }
            cache::CacheRead::Absent => {}
        }
    }
    let seg = sieve_segment(lo, hi, base);
    if let Some(dir) = cache_dir {
        // Cache writes are best-effort; a failed write must never fail a run.
        let _ = cache::write_segment(dir, &seg);
    }
    seg
}

/// Streams the segments covering 1 ≤ n ≤ limit, ascending, to `consumer`.
/// A consumer error aborts the stream and is returned as
/// [`StreamError::Consumer`].
pub fn stream_segments<E, F>(
    limit: u64,
    opts: &SieveOptions,
    mut consumer: F,
) -> Result<StreamSummary, StreamError<E>>
where
    F: FnMut(&SieveSegment) -> Result<(), E>,
{
    if limit < 1 {
        return Err(SieveError::EmptyRange { lo: 1, hi: limit + 1 }.into());
    }
    if limit > GLOBAL_LIMIT {
        return Err(SieveError::LimitTooLarge { limit }.into());
    }
    if opts.segment_size == 0 {
        return Err(SieveError::ZeroSegmentSize.into());
    }
    let base = crate::primes::primes_below(limit.isqrt() + 1);
    let ranges = segment_bounds(limit, opts.segment_size);
    let hits = AtomicU64::new(0);
    let rejects = AtomicU64::new(0);
    let cache_dir = opts.cache_dir.as_deref();

    let threads = opts.threads.max(1).min(ranges.len());
    if threads == 1 {
        for &(lo, hi) in &ranges {
            let seg = produce_segment(lo, hi, &base, cache_dir, &hits, &rejects);
            consumer(&seg).map_err(StreamError::Consumer)?;
        }
    } else {
        // Worker w computes segments w, w+T, w+2T, … and hands each over a
        // rendezvous channel of capacity 1.  The delivery loop reads channel
        // i mod T for segment i, so order is ascending by construction and at
        // most 2T segments are in flight.
        let result: Result<(), StreamError<E>> = std::thread::scope(|scope| {
            let mut receivers = Vec::with_capacity(threads);
            for w in 0..threads {
                let (tx, rx) = mpsc::sync_channel::<SieveSegment>(1);
                receivers.push(rx);
                let ranges = &ranges;
                let base = &base;
                let hits = &hits;
                let rejects = &rejects;
                scope.spawn(move || {
                    for &(lo, hi) in ranges.iter().skip(w).step_by(threads) {
                        let seg = produce_segment(lo, hi, base, cache_dir, hits, rejects);
                        if tx.send(seg).is_err() {
                            return; // delivery side hung up: abort quietly
                        }
                    }
                });
            }
            for i in 0..ranges.len() {
                // A worker that panicked drops its sender; surface that as a
                // sieve-side failure rather than hanging.
                let seg = receivers[i % threads]
                    .recv()
                    .expect("sieve worker disappeared");
                consumer(&seg).map_err(StreamError::Consumer)?;
            }
            Ok(())
        });
        result?;
    }

    Ok(StreamSummary {
        segments: ranges.len() as u64,
        records: limit,
        cache_hits: hits.load(Ordering::Relaxed),
        cache_rejects: rejects.load(Ordering::Relaxed),
    })
}

/// Record-at-a-time wrapper around [`stream_segments`].
pub fn stream_records<E, F>(
    limit: u64,
    opts: &SieveOptions,
    mut consumer: F,
) -> Result<StreamSummary, StreamError<E>>
where
    F: FnMut(&ArithRecord) -> Result<(), E>,
{
    stream_segments(limit, opts, |seg| {
        for r in &seg.records {
            consumer(r)?;
        }
        Ok(())
    })
}

/// Infallible-consumer convenience: fold every record of 1 ≤ n ≤ limit.
pub fn for_each_record(
    limit: u64,
    opts: &SieveOptions,
    mut f: impl FnMut(&ArithRecord),
) -> Result<StreamSummary, SieveError> {
    let result: Result<StreamSummary, StreamError<std::convert::Infallible>> =
        stream_segments(limit, opts, |seg| {
            for r in &seg.records {
                f(r);
            }
            Ok(())
        });
    result.map_err(|e| match e {
        StreamError::Sieve(e) => e,
        StreamError::Consumer(never) => match never {},
    })
}
