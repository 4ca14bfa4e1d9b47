//! Prime generation utilities shared by the sieve, the smooth-number
//! recurrence, and the prime-constant evaluations.
//!
//! Two entry points:
//! - [`primes_below`]: dense odd-only sieve of Eratosthenes, returns the
//!   primes as a `Vec`.  Used for base primes up to ~2^21.
//! - [`for_each_prime`]: segmented iteration over all primes ≤ limit without
//!   storing them, for prime sums with limits around 10⁷–10⁸.

/// All primes `p < limit`, ascending.
pub fn primes_below(limit: u64) -> Vec<u64> {
    if limit <= 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    // Odd-only bitmap: bit i represents the odd number 2i + 1 (i ≥ 1).
    let half = limit / 2;
    let mut composite = vec![false; half];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) < limit {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p) / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(half / 8.max(1));
    primes.push(2);
    for i in 1..half {
        if !composite[i] {
            primes.push((2 * i + 1) as u64);
        }
    }
    primes
}

/// Calls `f(p)` for every prime `p ≤ limit`, ascending, using segments of
/// about one million candidates so memory stays flat for large limits.
pub fn for_each_prime(limit: u64, mut f: impl FnMut(u64)) {
    if limit < 2 {
        return;
    }
    let base = primes_below(limit.isqrt() + 1);
    for &p in &base {
        if p <= limit {
            f(p);
        }
    }
    const SEGMENT: u64 = 1 << 21;
    let mut lo = limit.isqrt() + 1;
    let mut composite = Vec::new();
    while lo <= limit {
        let hi = (lo + SEGMENT).min(limit + 1); // window [lo, hi)
        composite.clear();
        composite.resize((hi - lo) as usize, false);
        for &p in &base {
            if p * p >= hi {
                break;
            }
            let mut m = lo.div_ceil(p) * p;
            if m < p * p {
                m = p * p;
            }
            while m < hi {
                composite[(m - lo) as usize] = true;
                m += p;
            }
        }
        for (i, &c) in composite.iter().enumerate() {
            if !c {
                f(lo + i as u64);
            }
        }
        lo = hi;
    }
}

/// Trial-division primality check; fine for the occasional small query.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = 5u64;
    while d * d <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}
