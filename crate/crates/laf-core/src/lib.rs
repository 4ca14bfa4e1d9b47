//! Bulk computation of the "large" additive functions
//!
//!   beta(n) = Σ_{p|n} p,   B(n) = Σ_{p^α||n} α·p,   B1(n) = Σ_{p^α||n} p^α,
//!
//! the largest-prime-factor statistic P(n), and the special functions that
//! govern their summatory behaviour: the Dickman–de Bruijn function ρ(u),
//! the integral δ(x) = ∫₂^x ρ(log x/log t) dt/t², smooth-number counts
//! ψ(x, y), and the local densities d_k of B(n) − β(n).
//!
//! Layout:
//! - [`sieve`]: segmented factorization sieve producing one [`sieve::ArithRecord`]
//!   per integer, with an ordered streaming driver and an optional binary
//!   segment cache.
//! - [`dickman`]: ρ(u) tables, δ(x), asymptotic companions, and the numeric
//!   constants (ζ-derivative coefficients, prime reciprocal sums, the
//!   ∫ρ(v)/(v+2)dv constant).
//! - [`smooth`]: exact and approximate ψ(x, y) — sieve counts, the
//!   prime-by-prime recurrence, the x·ρ(u) model, and the integral model
//!   Λ(x, y).
//! - [`density`]: squarefull numbers, exact local densities d_k of B − β with
//!   certified truncation tails, and their empirical counterparts.
//! - [`lab`]: streamed summatory experiments (Σβ, quotient sums, reciprocal
//!   sums, residue-class splits, consecutive-value coincidences) with
//!   prediction formulas and trend verdicts.
//! - [`report`]: deterministic CSV/JSON experiment reports.
//!
//! All floating-point accumulations over sieve streams use compensated
//! summation ([`kahan::KahanSum`]) and a fixed ascending delivery order, so
//! every reported number is bit-identical across re-runs, segment sizes, and
//! worker counts.

pub mod density;
pub mod dickman;
pub mod kahan;
pub mod lab;
pub mod primes;
pub mod quad;
pub mod report;
pub mod sieve;
pub mod smooth;
