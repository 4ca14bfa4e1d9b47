//! Local densities of the excess B(n) − β(n).
//!
//! Writing n = q·s with q squarefree, s squarefull and (q, s) = 1, the
//! excess B(n) − β(n) = Σ_{p^α || n} (α − 1)·p depends only on s.  The set
//! {n : excess = k} is therefore a union over squarefull s with diff(s) = k
//! of arithmetic progressions-like sets {q·s : q squarefree, (q, s) = 1},
//! whose density is (6/π²)·(1/s)·∏_{p|s} p/(p+1).  Summing,
//!
//! > d_k = (6/π²) · Σ_{s squarefull, diff(s) = k} (1/s) · ∏_{p|s} p/(p+1),
//!
//! which this module evaluates exactly (truncated with certified tails) and
//! validates against streamed counts.  Useful structure:
//!
//! - diff(s) = 0 only for s = 1, never 1, and diff(s) ≥ 2 for s > 1 — hence
//!   d_0 = 6/π², d_1 = 0, and d_k > 0 for every k ≥ 2.
//! - diff(s) = k forces s ≤ 3^{2k/3} (each prime p in s contributes
//!   (k_p + p)·log p with k_p := (α−1)p, and log p/p ≤ log 3/3 with
//!   Σp ≤ Σk_p = k).  A truncation limit at or above 3^{2k/3} therefore
//!   captures the series for d_k *exactly* — the tail bound is zero.
//! - diff(s) ≤ 2√s, so s ≥ k²/4 is needed at all: limits below that are
//!   rejected as certainly-useless.
//!
//! Squarefull numbers are enumerated by the unique parametrization
//! s = a²·b³ with b squarefree; factorizations are merged from a and b at
//! generation time, so diff and the coprime factor come out exactly.

use crate::kahan::KahanSum;
use crate::sieve;
use std::collections::BTreeMap;
use thiserror::Error;

/// 6/π², the density of squarefree integers (= d_0).
pub const SQUAREFREE_DENSITY: f64 = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);

/// ζ(3/2)/ζ(3): #\{squarefull s ≤ t\} ≈ this constant times √t.
const SQUAREFULL_COUNT_CONSTANT: f64 = 2.173_254_0;

#[derive(Debug, Error, PartialEq)]
pub enum DensityError {
    #[error("x = {x} exceeds the sieve limit {limit}")]
    AboveSieveLimit { x: u64, limit: u64 },
    #[error("truncation limit {limit} is below the k²/4 = {required} threshold for k = {k}")]
    LimitBelowThreshold { k: u64, limit: u64, required: u64 },
    #[error("tail_count requires k >= 1")]
    TailNeedsPositiveK,
    #[error("moment order r must be positive, got {r}")]
    NonPositiveR { r: f64 },
    #[error("k_max must be at least {min}, got {k_max}")]
    KMaxTooSmall { k_max: u64, min: u64 },
    #[error(
        "tail bounds cannot separate d_{k1} = {d1} ± {t1} from d_{k2} = {d2} ± {t2}"
    )]
    CannotSeparate {
        k1: u64,
        d1: f64,
        t1: f64,
        k2: u64,
        d2: f64,
        t2: f64,
    },
}

/// One squarefull number with the data the density series needs.
#[derive(Clone, Debug, PartialEq)]
pub struct SquarefullEntry {
    /// s: every prime exponent ≥ 2 (s = 1 included).
    pub s: u64,
    /// diff(s) = B(s) − β(s) = Σ (α−1)·p.
    pub diff: u64,
    /// ∏_{p|s} p/(p+1): the density correction for q coprime to s.
    pub coprime_density_factor: f64,
}

/// Every squarefull s ≤ limit, ascending, each exactly once.
pub fn enumerate_squarefull(limit: u64) -> Vec<SquarefullEntry> {
    let mut entries = Vec::new();
    if limit == 0 {
        return entries;
    }
    entries.push(SquarefullEntry {
        s: 1,
        diff: 0,
        coprime_density_factor: 1.0,
    });
    let mut b = 1u64;
    while b.saturating_mul(b).saturating_mul(b) <= limit {
        let b_factors = sieve::factorize(b).expect("b >= 1").factors;
        let squarefree = b_factors.iter().all(|&(_, e)| e == 1);
        if squarefree {
            let b3 = b * b * b;
            let a_max = (limit / b3).isqrt();
            for a in 1..=a_max {
                if a == 1 && b == 1 {
                    continue; // s = 1 seeded above
                }
                let s = a * a * b3;
                // Merge exponents: e_p = 2·v_p(a) + 3·[p | b].
                let mut exps: BTreeMap<u64, u32> = BTreeMap::new();
                for &(p, e) in &sieve::factorize(a).expect("a >= 1").factors {
                    *exps.entry(p).or_insert(0) += 2 * e;
                }
                for &(p, _) in &b_factors {
                    *exps.entry(p).or_insert(0) += 3;
                }
                let mut diff = 0u64;
                let mut cdf = 1.0f64;
                for (&p, &e) in &exps {
                    debug_assert!(e >= 2);
                    diff += (e as u64 - 1) * p;
                    cdf *= p as f64 / (p as f64 + 1.0);
                }
                entries.push(SquarefullEntry {
                    s,
                    diff,
                    coprime_density_factor: cdf,
                });
            }
        }
        b += 1;
    }
    entries.sort_by_key(|e| e.s);
    debug_assert!(
        entries.windows(2).all(|w| w[0].s < w[1].s),
        "a²b³ parametrization produced a duplicate"
    );
    entries
}

/// Smallest truncation limit that captures the d_k series exactly
/// (diff(s) = k ⟹ s ≤ 3^{2k/3}).
pub fn complete_limit_for(k: u64) -> u64 {
    3f64.powf(2.0 * k as f64 / 3.0).ceil() as u64
}

fn generic_reciprocal_tail(limit: u64) -> f64 {
    // Σ_{s squarefull > T} 1/s ≤ 2·(ζ(3/2)/ζ(3))/√T by partial summation
    // against #{s ≤ t} ≤ (ζ(3/2)/ζ(3))·√t; the coprime factors are ≤ 1.
    SQUAREFREE_DENSITY * 2.0 * SQUAREFULL_COUNT_CONSTANT / (limit as f64).sqrt()
}

/// Local density d_k and its tail bound from an already-built squarefull
/// enumeration up to `limit`.  Callers tabulating many k at once should
/// enumerate once and reuse the entries here; [`density_exact`] wraps this
/// for the single-k case.  The tail is zero when the truncation provably
/// captures every term contributing to d_k.
pub fn density_from_entries(entries: &[SquarefullEntry], k: u64, limit: u64) -> (f64, f64) {
    let mut acc = KahanSum::new();
    for e in entries.iter().filter(|e| e.diff == k) {
        acc += e.coprime_density_factor / e.s as f64;
    }
    let tail = if complete_limit_for(k) <= limit {
        0.0
    } else {
        generic_reciprocal_tail(limit)
    };
    (SQUAREFREE_DENSITY * acc.value(), tail)
}

/// Exact local density d_k from the squarefull series truncated at `limit`,
/// with a certified tail bound (zero when the truncation provably captures
/// every term).  Rejects limits below the k²/4 floor under which no s with
/// diff(s) = k exists at all.
pub fn density_exact(k: u64, limit: u64) -> Result<(f64, f64), DensityError> {
    let required = (k * k / 4).max(4);
    if limit < required {
        return Err(DensityError::LimitBelowThreshold { k, limit, required });
    }
    let entries = enumerate_squarefull(limit);
    Ok(density_from_entries(&entries, k, limit))
}

fn check_sieve_x(x: u64) -> Result<(), DensityError> {
    if x < 1 || x > sieve::GLOBAL_LIMIT {
        return Err(DensityError::AboveSieveLimit {
            x,
            limit: sieve::GLOBAL_LIMIT,
        });
    }
    Ok(())
}

/// Exact count of n ≤ x with B(n) − β(n) = k, by streaming the sieve.
pub fn density_empirical(k: u64, x: u64) -> Result<u64, DensityError> {
    check_sieve_x(x)?;
    let mut count = 0u64;
    sieve::for_each_record(x, &sieve::SieveOptions::sequential(), |r| {
        if r.excess() == k {
            count += 1;
        }
    })
    .expect("range validated");
    Ok(count)
}

/// One-pass histogram of the excess: counts for k = 0..=k_max plus the
/// overflow count of n with excess > k_max.  Σ(counts) + overflow = x.
pub fn excess_histogram(x: u64, k_max: u64) -> Result<(Vec<u64>, u64), DensityError> {
    check_sieve_x(x)?;
    let mut counts = vec![0u64; k_max as usize + 1];
    let mut overflow = 0u64;
    sieve::for_each_record(x, &sieve::SieveOptions::sequential(), |r| {
        let e = r.excess();
        if e <= k_max {
            counts[e as usize] += 1;
        } else {
            overflow += 1;
        }
    })
    .expect("range validated");
    Ok((counts, overflow))
}

/// Exact count of n ≤ x with B(n) − β(n) ≥ k, for k ≥ 1.
pub fn tail_count(k: u64, x: u64) -> Result<u64, DensityError> {
    if k < 1 {
        return Err(DensityError::TailNeedsPositiveK);
    }
    check_sieve_x(x)?;
    let mut count = 0u64;
    sieve::for_each_record(x, &sieve::SieveOptions::sequential(), |r| {
        if r.excess() >= k {
            count += 1;
        }
    })
    .expect("range validated");
    Ok(count)
}

/// A truncated moment Σ_{k ≤ k_max} d_k/k^r with its two-sided error bound.
#[derive(Clone, Copy, Debug)]
pub struct MomentEval {
    pub value: f64,
    /// Bound on the dropped mass: the d_k series tails (within k ≤ k_max)
    /// plus the k > k_max remainder under the d_k ≤ 5/k envelope.
    pub tail_bound: f64,
}

/// Largest truncation limit [`moment_d_r`] will enumerate to; beyond it the
/// generic √limit tail bound takes over (≈ 1.9·10⁻⁴ absolute per k).
const MOMENT_LIMIT_CAP: u64 = 200_000_000;

/// D_r = Σ_{k ≥ 1} d_k/k^r, truncated at k_max.  One enumeration serves
/// every k: its limit closes each d_k series exactly whenever
/// 3^{2k/3} fits under the cap (k ≤ 26), and the generic √limit tail
/// covers the rest.  The reported bound adds the k > k_max remainder under
/// the d_k ≤ 5/k envelope, 5·k_max^{−r}/r.
pub fn moment_d_r(r: f64, k_max: u64) -> Result<MomentEval, DensityError> {
    if !(r > 0.0) {
        return Err(DensityError::NonPositiveR { r });
    }
    if k_max < 2 {
        return Err(DensityError::KMaxTooSmall { k_max, min: 2 });
    }
    let limit = complete_limit_for(k_max).max(4).min(MOMENT_LIMIT_CAP);
    let entries = enumerate_squarefull(limit);
    let mut acc = KahanSum::new();
    let mut tail = KahanSum::new();
    for k in 2..=k_max {
        let (d, t) = density_from_entries(&entries, k, limit);
        let kr = (k as f64).powf(r);
        acc += d / kr;
        tail += t / kr;
    }
    Ok(MomentEval {
        value: acc.value(),
        tail_bound: tail.value() + 5.0 * (k_max as f64).powf(-r) / r,
    })
}

/// Σ' 1/(B(n)−β(n))^r over non-squarefree n ≤ x (exact streaming; the
/// excess is ≥ 2 on every term).
pub fn reciprocal_sum_nonsquarefree(r: f64, x: u64) -> Result<f64, DensityError> {
    if !(r > 0.0) {
        return Err(DensityError::NonPositiveR { r });
    }
    check_sieve_x(x)?;
    let mut acc = KahanSum::new();
    sieve::for_each_record(x, &sieve::SieveOptions::sequential(), |rec| {
        if !rec.is_squarefree {
            let e = rec.excess() as f64;
            acc += e.powf(-r);
        }
    })
    .expect("range validated");
    Ok(acc.value())
}

/// The winner of "which d_k is largest for k > 1", with the evidence table.
#[derive(Clone, Debug)]
pub struct ArgmaxReport {
    pub best_k: u64,
    /// (k, d_k, tail_bound) for 2 ≤ k ≤ k_max, sorted by d_k descending.
    pub table: Vec<(u64, f64, f64)>,
}

/// Finds the k in [2, k_max] maximizing d_k, certifying the comparison:
/// the winner's lower bound must clear the runner-up's upper bound.
pub fn argmax_density(k_max: u64) -> Result<ArgmaxReport, DensityError> {
    if k_max < 3 {
        return Err(DensityError::KMaxTooSmall { k_max, min: 3 });
    }
    // Generic-tail limit: 100·k² keeps every tail below ~10⁻³ while staying
    // enumerable even at k_max = 200; small k close exactly anyway.
    let limit = (100 * k_max * k_max).max(1_000_000);
    let entries = enumerate_squarefull(limit);
    let mut table: Vec<(u64, f64, f64)> = (2..=k_max)
        .map(|k| {
            let (d, tail) = density_from_entries(&entries, k, limit);
            (k, d, tail)
        })
        .collect();
    table.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (k1, d1, t1) = table[0];
    let (k2, d2, t2) = table[1];
    if d1 - t1 <= d2 + t2 {
        return Err(DensityError::CannotSeparate {
            k1,
            d1,
            t1,
            k2,
            d2,
            t2,
        });
    }
    Ok(ArgmaxReport {
        best_k: k1,
        table,
    })
}

/// Exact densities next to streamed counts, the cross-validation bundle.
#[derive(Clone, Debug)]
pub struct DensityTable {
    pub k_max: u64,
    /// d_k for k = 0..=k_max.
    pub exact: Vec<f64>,
    pub exact_tail_bound: Vec<f64>,
    /// empirical[i][k] = #{n ≤ x_samples[i] : excess = k}.
    pub empirical: Vec<Vec<u64>>,
    pub x_samples: Vec<u64>,
}

impl DensityTable {
    /// Builds the exact column (one enumeration) and one streamed histogram
    /// per sample x.
    pub fn build(k_max: u64, limit: u64, x_samples: &[u64]) -> Result<Self, DensityError> {
        let required = (k_max * k_max / 4).max(4);
        if limit < required {
            return Err(DensityError::LimitBelowThreshold {
                k: k_max,
                limit,
                required,
            });
        }
        let entries = enumerate_squarefull(limit);
        let mut exact = Vec::with_capacity(k_max as usize + 1);
        let mut tails = Vec::with_capacity(k_max as usize + 1);
        for k in 0..=k_max {
            let (d, tail) = density_from_entries(&entries, k, limit);
            exact.push(d);
            tails.push(tail);
        }
        let mut empirical = Vec::with_capacity(x_samples.len());
        for &x in x_samples {
            let (counts, _overflow) = excess_histogram(x, k_max)?;
            empirical.push(counts);
        }
        Ok(DensityTable {
            k_max,
            exact,
            exact_tail_bound: tails,
            empirical,
            x_samples: x_samples.to_vec(),
        })
    }

    /// |empirical/x − exact| for sample i, density k.
    pub fn deviation(&self, i: usize, k: u64) -> f64 {
        let x = self.x_samples[i] as f64;
        (self.empirical[i][k as usize] as f64 / x - self.exact[k as usize]).abs()
    }
}
