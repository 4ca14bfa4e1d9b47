//! Counting y-smooth integers: ψ(x, y) = #{n ≤ x : P(n) ≤ y}, with P(1) = 1
//! so n = 1 always counts.
//!
//! Two exact counters cross-validate each other: [`psi_exact_sieve`] streams
//! the factorization sieve, and [`psi_recurrence`] evaluates the identity
//! ψ(x, p_k) = 1 + Σ_{j ≤ k} ψ(x/p_j, p_j) with bounded memoization — the
//! latter reaches x far beyond the sieve when y is small.  Two approximations
//! accompany them: the leading Dickman term x·ρ(u) with its validity-range
//! flag, and the jump-sum integral
//!
//! > Λ(x, y) = x·∫_{1−0}^∞ ρ((log x − log t)/log y) d([t]/t),
//!
//! evaluated through the decomposition d([t]/t) = (1/t)d[t] − ([t]/t²)dt:
//! a sum of jumps over integers n ≤ x (accumulated in descending n, smallest
//! terms first) minus a continuous integral taken per unit panel of [t],
//! split additionally at the points t = x·y^{−m} where the ρ argument
//! crosses an integer and loses smoothness.  For integer x the jump at
//! t = x itself is included, matching the right-limit convention
//! Λ(x, y) = Λ(x + 0, y).

use crate::dickman::DickmanTable;
use crate::kahan::KahanSum;
use crate::quad::gauss5;
use crate::sieve;
use std::collections::HashMap;
use thiserror::Error;

/// Cap on memoization entries in the recurrence (count of distinct states).
pub const DEFAULT_MEMO_BUDGET: usize = 10_000_000;
/// Largest smoothness bound the recurrence will build a prime list for.
pub const MAX_RECURRENCE_Y: u64 = 100_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum SmoothError {
    #[error("x must be at least 1, got {x}")]
    XBelowOne { x: u64 },
    #[error("x = {x} exceeds the sieve limit {limit}")]
    AboveSieveLimit { x: u64, limit: u64 },
    #[error("smoothness bound {y} exceeds the recurrence limit {limit}")]
    YAboveRecurrenceLimit { y: u64, limit: u64 },
    #[error("memoization budget of {budget} entries exhausted")]
    MemoBudgetExhausted { budget: usize },
    #[error("the jump-sum integral requires y >= 2, got {y}")]
    YBelowTwo { y: f64 },
    #[error("query requires finite x >= 1 and y >= 1, got x = {x}, y = {y}")]
    InvalidQuery { x: f64, y: f64 },
}

/// A point (x, y) of the smooth-counting problem, with u = log x/log y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothQuery {
    x: f64,
    y: f64,
}

impl SmoothQuery {
    pub fn new(x: f64, y: f64) -> Result<Self, SmoothError> {
        if !x.is_finite() || !y.is_finite() || !(x >= 1.0) || !(y >= 1.0) {
            return Err(SmoothError::InvalidQuery { x, y });
        }
        Ok(SmoothQuery { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// u = log x / log y; +∞ when y = 1 < x (and 0 when x = y = 1).
    /// Always ≥ 0, and ≤ 1 exactly when y ≥ x.
    pub fn u(&self) -> f64 {
        if self.y == 1.0 {
            if self.x == 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.x.ln() / self.y.ln()
        }
    }

    /// Whether the point satisfies exp{(log log x)^{5/3+ε}} ≤ y ≤ x with
    /// ε = 0.01 — the range where the x·ρ(u) approximation carries its
    /// proven error term.  Out-of-range queries are still answered.
    pub fn in_hildebrand_range(&self) -> bool {
        if self.y > self.x {
            return false;
        }
        let lnln = self.x.ln().ln();
        let lower = if lnln.is_finite() && lnln > 0.0 {
            lnln.powf(5.0 / 3.0 + 0.01).exp()
        } else {
            1.0
        };
        self.y >= lower
    }
}

/// x·ρ(u) with the range flag of [`SmoothQuery::in_hildebrand_range`].
#[derive(Clone, Copy, Debug)]
pub struct HildebrandEval {
    pub value: f64,
    pub in_range: bool,
}

/// Exact ψ(x, y) by streaming the factorization sieve over 1..=x.
pub fn psi_exact_sieve(x: u64, y: u64) -> Result<u64, SmoothError> {
    if x < 1 {
        return Err(SmoothError::XBelowOne { x });
    }
    if x > sieve::GLOBAL_LIMIT {
        return Err(SmoothError::AboveSieveLimit {
            x,
            limit: sieve::GLOBAL_LIMIT,
        });
    }
    let mut count = 0u64;
    sieve::for_each_record(x, &sieve::SieveOptions::sequential(), |r| {
        if r.largest_prime <= y {
            count += 1;
        }
    })
    .expect("range validated");
    Ok(count)
}

/// Exact ψ(x, y) by the memoized recurrence — no sieve pass, so x may exceed
/// the sieve's practical range when y is small.  Fails distinctly when the
/// state count would exceed `budget` (memory bound) rather than degrading.
pub fn psi_recurrence_with_budget(x: u64, y: u64, budget: usize) -> Result<u64, SmoothError> {
    if x < 1 {
        return Err(SmoothError::XBelowOne { x });
    }
    let y_eff = y.min(x);
    if y_eff > MAX_RECURRENCE_Y {
        return Err(SmoothError::YAboveRecurrenceLimit {
            y: y_eff,
            limit: MAX_RECURRENCE_Y,
        });
    }
    let primes = crate::primes::primes_below(y_eff + 1);
    let mut rec = Recurrence {
        primes,
        memo: HashMap::new(),
        budget,
    };
    rec.eval(x, rec.primes.len())
}

/// [`psi_recurrence_with_budget`] at the default budget.
pub fn psi_recurrence(x: u64, y: u64) -> Result<u64, SmoothError> {
    psi_recurrence_with_budget(x, y, DEFAULT_MEMO_BUDGET)
}

struct Recurrence {
    primes: Vec<u64>,
    memo: HashMap<(u64, u32), u64>,
    budget: usize,
}

impl Recurrence {
    /// Count of n ≤ x whose prime factors all lie in primes[..k].
    /// ψ(x, k) = 1 + Σ_{j=1..k} ψ(⌊x/p_j⌋, j); the j-sum is iterative so the
    /// recursion depth is bounded by log₂x (x at least halves per level).
    fn eval(&mut self, x: u64, mut k: usize) -> Result<u64, SmoothError> {
        if x == 0 {
            return Ok(0);
        }
        // Primes above x contribute nothing; shrinking k first makes the
        // memo key canonical (and makes y ≥ x collapse to counting all n).
        while k > 0 && self.primes[k - 1] > x {
            k -= 1;
        }
        if k == 0 {
            return Ok(1);
        }
        let key = (x, k as u32);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let mut total: u64 = 1;
        for j in 1..=k {
            total += self.eval(x / self.primes[j - 1], j)?;
        }
        if self.memo.len() >= self.budget {
            return Err(SmoothError::MemoBudgetExhausted {
                budget: self.budget,
            });
        }
        self.memo.insert(key, total);
        Ok(total)
    }
}

/// The leading-term approximation ψ(x, y) ≈ x·ρ(u).
pub fn psi_hildebrand(table: &DickmanTable, q: SmoothQuery) -> HildebrandEval {
    HildebrandEval {
        value: q.x() * table.rho(q.u()),
        in_range: q.in_hildebrand_range(),
    }
}

/// The jump-sum integral Λ(x, y); requires y ≥ 2.
pub fn lambda_saias(table: &DickmanTable, q: SmoothQuery) -> Result<f64, SmoothError> {
    let (x, y) = (q.x(), q.y());
    if y < 2.0 {
        return Err(SmoothError::YBelowTwo { y });
    }
    let ln_x = x.ln();
    let ln_y = y.ln();
    let arg = |t: f64| (ln_x - t.ln()) / ln_y;
    let n_max = x as u64; // jump at t = x included when x is an integer
    // Jump part Σ_{n ≤ x} ρ(arg(n))/n, descending so small terms add first.
    let mut jumps = KahanSum::new();
    for n in (1..=n_max).rev() {
        jumps += table.rho(arg(n as f64)) / n as f64;
    }
    // Continuous part ∫₁^x ρ(arg(t))·[t]/t² dt: per unit panel [t] is the
    // constant m, and panels are further split where arg(t) is an integer
    // (t = x·y^{−j}) so every piece handed to the Gauss rule is smooth.
    let mut kinks: Vec<f64> = Vec::new();
    let mut t_kink = x / y;
    while t_kink > 1.0 {
        kinks.push(t_kink);
        t_kink /= y;
    }
    kinks.reverse(); // ascending
    let mut cont = KahanSum::new();
    for m in 1..=n_max {
        let lo = m as f64;
        let hi = (m as f64 + 1.0).min(x);
        if hi <= lo {
            break;
        }
        let mf = m as f64;
        let f = |t: f64| table.rho(arg(t)) * mf / (t * t);
        // Kinks are few (≤ u of them); find any inside this panel.
        let mut a = lo;
        for &kk in &kinks {
            if kk > lo && kk < hi {
                cont += gauss5(f, a, kk);
                a = kk;
            }
        }
        cont += gauss5(f, a, hi);
    }
    Ok(x * (jumps.value() - cont.value()))
}

/// One grid cell of the exact/approximate comparison.
#[derive(Clone, Copy, Debug)]
pub struct PsiResult {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub exact: Option<u64>,
    pub hildebrand: Option<f64>,
    pub hildebrand_in_range: Option<bool>,
    pub saias: Option<f64>,
}

impl PsiResult {
    /// |approx/exact − 1|, when both sides exist and exact > 0.
    fn gap(&self, approx: Option<f64>) -> Option<f64> {
        match (approx, self.exact) {
            (Some(a), Some(e)) if e > 0 => Some((a / e as f64 - 1.0).abs()),
            _ => None,
        }
    }

    pub fn hildebrand_gap(&self) -> Option<f64> {
        self.gap(self.hildebrand)
    }

    pub fn saias_gap(&self) -> Option<f64> {
        self.gap(self.saias)
    }
}

/// Evaluates the full comparison at each (x, y) pair: exact count by the
/// recurrence, both approximations, and the relative gaps.
pub fn psi_grid(table: &DickmanTable, pairs: &[(u64, u64)]) -> Result<Vec<PsiResult>, SmoothError> {
    let mut rows = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        let q = SmoothQuery::new(x as f64, y as f64)?;
        let exact = psi_recurrence(x, y)?;
        let h = psi_hildebrand(table, q);
        let saias = if q.y() >= 2.0 {
            Some(lambda_saias(table, q)?)
        } else {
            None
        };
        rows.push(PsiResult {
            x: q.x(),
            y: q.y(),
            u: q.u(),
            exact: Some(exact),
            hildebrand: Some(h.value),
            hildebrand_in_range: Some(h.in_range),
            saias,
        });
    }
    Ok(rows)
}
