//! Summatory experiments over the large additive functions.
//!
//! Exact sums stream the factorization sieve in ascending n with
//! compensated accumulation (order is fixed by the stream, so chunking can
//! never change a result); predictions come from the Dickman machinery.
//! Residue-class sums S_r (over n with P(n) ≡ ℓ mod k) and T_r (additionally
//! P²(n) | n) are paired with their quadrature predictions
//!
//! >  S_r ≈ (x/φ(k)) ∫₂^x ρ(ln x/ln t)·{Σ_j Q_{j,r}(ln t)/ln^j x} dt/t^{r+1},
//! >  T_r ≈ (x/φ(k)) ∫₂^x ρ(ln x/ln t)·R_{1,r}(ln t) dt/t^{r+2},
//!
//! with Q_{0,r}(w) = r, Q_{1,r}(w) = (r − rγ)(rw − 1) and
//! R_{1,r}(w) = (r+1)²w − (r+1); the r = −1 case of T collapses to
//! C·x/φ(k) with C = ∫₀^∞ ρ(v)/(v+2) dv.
//!
//! Conventions involving n = 1 (where P(1) = 1, β = B = B₁ = 0, ω = Ω = 0):
//! sums of 1/P^r and P^{−ω}, P^{−Ω} include n = 1 (the term is 1);
//! reciprocal and quotient sums against β, B, B₁ start at n = 2 (those
//! values vanish at 1); residue-class sums count n = 1 exactly when
//! ℓ = 1, and the flag for that convention is part of the output.

use crate::dickman::{self, DickmanTable, EULER_GAMMA};
use crate::kahan::KahanSum;
use crate::quad;
use crate::sieve::{self, ArithRecord, SieveOptions};
use std::sync::LazyLock;
use thiserror::Error;

/// Shared Dickman table for every prediction quadrature in this module.
static TABLE: LazyLock<DickmanTable> = LazyLock::new(DickmanTable::new);

/// Σ_p 1/(p² − p) truncated at 10⁶ (tail < 10⁻⁶), the reference constant
/// for the (Ω − ω)/P ratio experiment.
static P2P_CONSTANT: LazyLock<f64> =
    LazyLock::new(|| dickman::prime_reciprocal_constants(1_000_000).p2p_sum);

#[derive(Debug, Error, PartialEq)]
pub enum LabError {
    #[error("x = {x} exceeds the sieve limit {limit}")]
    AboveSieveLimit { x: u64, limit: u64 },
    #[error("x must be at least {min}, got {x}")]
    XTooSmall { x: u64, min: u64 },
    #[error("prediction order M must lie in 1..=5, got {m}")]
    PredictionOrder { m: usize },
    #[error("prediction point must exceed e, got {x}")]
    PredictionPoint { x: f64 },
    #[error("residue class needs 1 <= l <= k with gcd(l, k) = 1; got l = {l}, k = {k}")]
    BadResidueClass { k: u64, l: u64 },
    #[error("only the two displayed correction polynomials exist: J must be 0 or 1, got {j}")]
    PolynomialCount { j: usize },
    #[error("exponent r = {r} out of range: {need}")]
    ROutOfRange { r: f64, need: &'static str },
    #[error(transparent)]
    Dickman(#[from] dickman::DickmanError),
}

fn check_x(x: u64, min: u64) -> Result<(), LabError> {
    if x < min {
        return Err(LabError::XTooSmall { x, min });
    }
    if x > sieve::GLOBAL_LIMIT {
        return Err(LabError::AboveSieveLimit {
            x,
            limit: sieve::GLOBAL_LIMIT,
        });
    }
    Ok(())
}

fn stream_with(
    x: u64,
    opts: &SieveOptions,
    f: impl FnMut(&ArithRecord),
) -> Result<(), LabError> {
    sieve::for_each_record(x, opts, f)
        .map(|_| ())
        .map_err(|_| LabError::AboveSieveLimit {
            x,
            limit: sieve::GLOBAL_LIMIT,
        })
}

fn stream(x: u64, f: impl FnMut(&ArithRecord)) -> Result<(), LabError> {
    stream_with(x, &SieveOptions::sequential(), f)
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Euler's totient by trial division (moduli here are small).
pub fn euler_phi(k: u64) -> u64 {
    let mut n = k;
    let mut phi = k;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

// ---------------------------------------------------------------------------
// Exact summatory functions
// ---------------------------------------------------------------------------

/// Selector over the four large additive-ish functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdditiveKind {
    /// β(n) = Σ_{p|n} p
    Beta,
    /// B(n) = Σ_{p^α||n} αp
    B,
    /// B₁(n) = Σ_{p^α||n} p^α
    B1,
    /// P(n) = largest prime factor, P(1) = 1
    P,
}

impl AdditiveKind {
    pub fn value_of(self, r: &ArithRecord) -> u64 {
        match self {
            AdditiveKind::Beta => r.beta,
            AdditiveKind::B => r.b,
            AdditiveKind::B1 => r.b1,
            AdditiveKind::P => r.largest_prime,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AdditiveKind::Beta => "beta",
            AdditiveKind::B => "B",
            AdditiveKind::B1 => "B1",
            AdditiveKind::P => "P",
        }
    }
}

/// Exact Σ_{n ≤ x} f(n) with 128-bit accumulation, honoring a caller-chosen
/// segment layout (the stream is ordered, so the layout never matters).
pub fn sum_additive_with(
    kind: AdditiveKind,
    x: u64,
    opts: &SieveOptions,
) -> Result<u128, LabError> {
    check_x(x, 1)?;
    let mut total: u128 = 0;
    stream_with(x, opts, |r| total += kind.value_of(r) as u128)?;
    Ok(total)
}

/// Exact Σ_{n ≤ x} f(n) for f ∈ {β, B, B₁, P}.
pub fn sum_additive(kind: AdditiveKind, x: u64) -> Result<u128, LabError> {
    sum_additive_with(kind, x, &SieveOptions::sequential())
}

/// Prediction Σ_{j=1..M} A_j·x²/ln^j x for Σβ(n) (equally for B, B₁, P at
/// this order), with A_j from the ζ-derivative coefficients.
pub fn predict_sum_additive(x: f64, m: usize) -> Result<f64, LabError> {
    if !(1..=5).contains(&m) {
        return Err(LabError::PredictionOrder { m });
    }
    if !(x > std::f64::consts::E) {
        return Err(LabError::PredictionPoint { x });
    }
    let coeffs = dickman::zeta_coefficients(m)?;
    let lx = x.ln();
    let mut acc = KahanSum::new();
    let mut denom = lx;
    for a in coeffs {
        acc += a * x * x / denom;
        denom *= lx;
    }
    Ok(acc.value())
}

/// The six quotient sums with second-order main terms: f/B₁ tends to x,
/// B₁/B to D·x, B₁/g to e^γ·x·lnln x (g ∈ {P, β}).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientKind {
    POverB1,
    BetaOverB1,
    BOverB1,
    B1OverB,
    B1OverP,
    B1OverBeta,
}

impl QuotientKind {
    fn parts(self) -> (AdditiveKind, AdditiveKind) {
        match self {
            QuotientKind::POverB1 => (AdditiveKind::P, AdditiveKind::B1),
            QuotientKind::BetaOverB1 => (AdditiveKind::Beta, AdditiveKind::B1),
            QuotientKind::BOverB1 => (AdditiveKind::B, AdditiveKind::B1),
            QuotientKind::B1OverB => (AdditiveKind::B1, AdditiveKind::B),
            QuotientKind::B1OverP => (AdditiveKind::B1, AdditiveKind::P),
            QuotientKind::B1OverBeta => (AdditiveKind::B1, AdditiveKind::Beta),
        }
    }
}

/// Exact Σ_{2 ≤ n ≤ x} num(n)/den(n) for the selected quotient
/// (n = 1 is excluded: every denominator here vanishes or trivializes).
pub fn sum_quotients(kind: QuotientKind, x: u64) -> Result<f64, LabError> {
    check_x(x, 2)?;
    let (num, den) = kind.parts();
    let mut acc = KahanSum::new();
    stream(x, |r| {
        if r.n >= 2 {
            acc += num.value_of(r) as f64 / den.value_of(r) as f64;
        }
    })?;
    Ok(acc.value())
}

/// Exact Σ_{n ≤ x} (B(n) − β(n)), the summatory excess.
pub fn sum_b_minus_beta(x: u64) -> Result<u128, LabError> {
    check_x(x, 1)?;
    let mut total: u128 = 0;
    stream(x, |r| total += r.excess() as u128)?;
    Ok(total)
}

/// Pointwise estimate of the leading constant in
/// Σ(B − β) ≈ x·lnln x + C₀·x: the value (sum − x·lnln x)/x.
pub fn c0_estimate(x: u64, sum: u128) -> f64 {
    let xf = x as f64;
    (sum as f64 - xf * xf.ln().ln()) / xf
}

/// Least-squares C₀ over samples (single-parameter fit of
/// sum − x·lnln x ≈ C₀·x).
pub fn fit_c0(samples: &[(u64, u128)]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, sum) in samples {
        let xf = x as f64;
        num += xf * (sum as f64 - xf * xf.ln().ln());
        den += xf * xf;
    }
    num / den
}

/// Exact Σ 1/f(n): over n ≥ 1 for f = P (P(1) = 1 contributes 1), over
/// n ≥ 2 otherwise (β, B, B₁ vanish at n = 1).
pub fn sum_reciprocal_large(kind: AdditiveKind, x: u64) -> Result<f64, LabError> {
    sum_reciprocal_large_with(kind, x, &SieveOptions::sequential())
}

/// Same as [`sum_reciprocal_large`] with a caller-chosen segment layout.
pub fn sum_reciprocal_large_with(
    kind: AdditiveKind,
    x: u64,
    opts: &SieveOptions,
) -> Result<f64, LabError> {
    check_x(x, 1)?;
    let mut acc = KahanSum::new();
    stream_with(x, opts, |r| {
        if r.n == 1 {
            if kind == AdditiveKind::P {
                acc += 1.0;
            }
        } else {
            acc += 1.0 / kind.value_of(r) as f64;
        }
    })?;
    Ok(acc.value())
}

/// Exact Σ_{n ≤ x} 1/P(n), the reference sum for the δ(x) comparison.
pub fn sum_reciprocal_p(x: u64) -> Result<f64, LabError> {
    sum_reciprocal_large(AdditiveKind::P, x)
}

/// Which exponent drives P(n)^{−·}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerMode {
    /// Σ P(n)^{−ω(n)} — grows like exp{(4+o(1))√(ln x)/lnln x}.
    OmegaExponent,
    /// Σ P(n)^{−Ω(n)} — tends to lnln x + D.
    BigOmegaExponent,
}

/// Exact Σ_{n ≤ x} P(n) raised to minus ω(n) or Ω(n) (n = 1 contributes 1).
pub fn sum_p_power(mode: PowerMode, x: u64) -> Result<f64, LabError> {
    check_x(x, 1)?;
    let mut acc = KahanSum::new();
    stream(x, |r| {
        let e = match mode {
            PowerMode::OmegaExponent => r.omega,
            PowerMode::BigOmegaExponent => r.big_omega,
        };
        acc += (r.largest_prime as f64).powi(-(e as i32));
    })?;
    Ok(acc.value())
}

/// Numerators for the weighted reciprocal sums Σ g(n)/P(n).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RatioKind {
    /// g = Ω − ω; the ratio tends to Σ_p 1/(p² − p).
    OmegaMinusOmega,
    /// g = ω; the ratio grows like √(2 ln x/lnln x).
    Omega,
    /// g = μ²; the ratio tends to 6/π².
    MuSquared,
}

/// A weighted reciprocal sum next to its reference factor.
#[derive(Clone, Copy, Debug)]
pub struct RatioSums {
    /// Σ g(n)/P(n), exact.
    pub numerator: f64,
    /// Σ 1/P(n), exact (n = 1 included).
    pub reciprocal_p: f64,
    /// numerator / reciprocal_p.
    pub ratio: f64,
    /// The displayed comparison factor (constant, or √(2 ln x/lnln x)).
    pub reference: f64,
}

impl RatioSums {
    /// ratio / reference: tends to 1 for every kind.
    pub fn normalized(&self) -> f64 {
        self.ratio / self.reference
    }
}

/// One pass computing Σ g(n)/P(n), Σ 1/P(n), their ratio and the reference
/// factor for the selected g.
pub fn ratio_sums(kind: RatioKind, x: u64) -> Result<RatioSums, LabError> {
    check_x(x, 2)?;
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    stream(x, |r| {
        let p = r.largest_prime as f64;
        let g = match kind {
            RatioKind::OmegaMinusOmega => (r.big_omega - r.omega) as f64,
            RatioKind::Omega => r.omega as f64,
            RatioKind::MuSquared => {
                if r.is_squarefree {
                    1.0
                } else {
                    0.0
                }
            }
        };
        num += g / p;
        den += 1.0 / p;
    })?;
    let xf = x as f64;
    let reference = match kind {
        RatioKind::OmegaMinusOmega => *P2P_CONSTANT,
        RatioKind::Omega => (2.0 * xf.ln() / xf.ln().ln()).sqrt(),
        RatioKind::MuSquared => crate::density::SQUAREFREE_DENSITY,
    };
    let numerator = num.value();
    let reciprocal_p = den.value();
    Ok(RatioSums {
        numerator,
        reciprocal_p,
        ratio: numerator / reciprocal_p,
        reference,
    })
}

// ---------------------------------------------------------------------------
// Residue classes
// ---------------------------------------------------------------------------

/// A coprime residue class ℓ (mod k), 1 ≤ ℓ ≤ k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidueClass {
    k: u64,
    l: u64,
}

impl ResidueClass {
    pub fn new(k: u64, l: u64) -> Result<Self, LabError> {
        if k < 1 || l < 1 || l > k || gcd(l, k) != 1 {
            return Err(LabError::BadResidueClass { k, l });
        }
        Ok(ResidueClass { k, l })
    }

    pub fn modulus(&self) -> u64 {
        self.k
    }

    pub fn residue(&self) -> u64 {
        self.l
    }

    /// Whether n = 1 (P(1) = 1) falls in this class: exactly when ℓ = 1.
    pub fn counts_n1(&self) -> bool {
        self.l == 1
    }

    fn contains_prime(&self, p: u64) -> bool {
        p % self.k == self.l % self.k
    }
}

/// A residue-class sum with its n = 1 convention made explicit.
#[derive(Clone, Copy, Debug)]
pub struct ResidueSum {
    pub value: f64,
    /// True when the n = 1 term (P(1) = 1, contributing 1) is inside.
    pub n1_included: bool,
}

/// Exact S_r(x) = Σ_{n ≤ x, P(n) ≡ ℓ (k)} P(n)^{−r}, r ≥ 0.
pub fn residue_sum_s(r: f64, rc: ResidueClass, x: u64) -> Result<ResidueSum, LabError> {
    if !(r >= 0.0) {
        return Err(LabError::ROutOfRange { r, need: "r >= 0" });
    }
    check_x(x, 1)?;
    let mut acc = KahanSum::new();
    stream(x, |rec| {
        if rc.contains_prime(rec.largest_prime) {
            acc += p_power_term(rec.largest_prime, r);
        }
    })?;
    Ok(ResidueSum {
        value: acc.value(),
        n1_included: rc.counts_n1(),
    })
}

fn p_power_term(p: u64, r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else if r == 1.0 {
        1.0 / p as f64
    } else if r == -1.0 {
        p as f64
    } else {
        (p as f64).powf(-r)
    }
}

/// #{n ≤ x : gcd(P(n), k) > 1} — the bucket outside every coprime class,
/// needed to close partition checks exactly.
pub fn residue_excluded_count(k: u64, x: u64) -> Result<u64, LabError> {
    if k < 1 {
        return Err(LabError::BadResidueClass { k, l: 0 });
    }
    check_x(x, 1)?;
    let mut count = 0u64;
    stream(x, |rec| {
        if gcd(rec.largest_prime, k) > 1 {
            count += 1;
        }
    })?;
    Ok(count)
}

/// Exact T_r(x) = Σ_{n ≤ x, P(n) ≡ ℓ (k), P²(n) | n} P(n)^{−r}, r ≥ −1.
/// n = 1 participates (1² | 1) exactly when ℓ = 1.
pub fn residue_sum_t(r: f64, rc: ResidueClass, x: u64) -> Result<ResidueSum, LabError> {
    if !(r >= -1.0) {
        return Err(LabError::ROutOfRange { r, need: "r >= -1" });
    }
    check_x(x, 1)?;
    let mut acc = KahanSum::new();
    stream(x, |rec| {
        let p = rec.largest_prime;
        let square_divides = match p.checked_mul(p) {
            Some(p2) => rec.n % p2 == 0,
            None => false,
        };
        if square_divides && rc.contains_prime(p) {
            acc += p_power_term(p, r);
        }
    })?;
    Ok(ResidueSum {
        value: acc.value(),
        n1_included: rc.counts_n1(),
    })
}

/// #{n ≤ x : P²(n) | n} (n = 1 included by the P(1) = 1 convention).
pub fn count_p_squared_divides(x: u64) -> Result<u64, LabError> {
    let rc = ResidueClass::new(1, 1).expect("1 mod 1 is valid");
    let s = residue_sum_t(0.0, rc, x)?;
    Ok(s.value as u64)
}

/// The comparison factor in the P²(n) | n corollary:
/// √{(ln x/2)·(ln₂x + ln₃x − ln 2 + (ln₃x − ln 2)/ln₂x)}.
pub fn p_squared_corollary_factor(x: f64) -> Result<f64, LabError> {
    if !(x > 15.16) {
        // needs ln ln ln x
        return Err(LabError::PredictionPoint { x });
    }
    let l1 = x.ln();
    let l2 = l1.ln();
    let l3 = l2.ln();
    let ln2 = std::f64::consts::LN_2;
    Ok((0.5 * l1 * (l2 + l3 - ln2 + (l3 - ln2) / l2)).sqrt())
}

// ---------------------------------------------------------------------------
// Prediction quadratures
// ---------------------------------------------------------------------------

/// ∫₂^x ρ(ln x/ln t)·w(ln t)·t^{−(1+decay)} dt via t = x^{1/u}:
/// ∫₁^U ρ(u)·w(L/u)·(L/u²)·e^{−L·decay/u} du with L = ln x, U = L/ln 2,
/// split at the integer points where ρ kinks.  Two passes: a Gauss sweep
/// sizes the result, then per-panel Simpson tolerances hold the total
/// relative error near 10⁻⁹.
fn residue_prediction_integral(x: f64, decay: f64, weight: impl Fn(f64) -> f64) -> f64 {
    let l = x.ln();
    let u_hi = (l / std::f64::consts::LN_2).min(TABLE.u_max());
    if u_hi <= 1.0 {
        return 0.0;
    }
    let g = |u: f64| {
        let rho = TABLE.rho(u);
        if rho == 0.0 {
            return 0.0;
        }
        rho * weight(l / u) * (l / (u * u)) * (-l * decay / u).exp()
    };
    let mut edges = vec![1.0f64];
    let mut k = 2.0f64;
    while k < u_hi {
        edges.push(k);
        k += 1.0;
    }
    edges.push(u_hi);
    let mut scale = 0.0;
    for w in edges.windows(2) {
        scale += quad::gauss5(g, w[0], w[1]).abs();
    }
    let n_panels = (edges.len() - 1) as f64;
    let tol = (1e-9 * scale).max(f64::MIN_POSITIVE) / n_panels;
    let mut acc = KahanSum::new();
    for w in edges.windows(2) {
        let (v, _err) = quad::adaptive_simpson(g, w[0], w[1], tol);
        acc += v;
    }
    acc.value()
}

/// Prediction for S_r: (x/φ(k))·∫₂^x ρ(ln x/ln t)·{Σ_{j≤J} Q_{j,r}(ln t)/ln^j x}
/// dt/t^{r+1}, with Q_{0,r} = r and Q_{1,r}(w) = (r − rγ)(rw − 1).
pub fn predict_s_r(r: f64, rc: ResidueClass, x: f64, j: usize) -> Result<f64, LabError> {
    if !(r > 0.0) {
        return Err(LabError::ROutOfRange { r, need: "r > 0" });
    }
    if j > 1 {
        return Err(LabError::PolynomialCount { j });
    }
    if !(x >= 2.0) || !x.is_finite() {
        return Err(LabError::PredictionPoint { x });
    }
    let l = x.ln();
    let weight = move |ln_t: f64| {
        let mut w = r;
        if j >= 1 {
            w += (r - r * EULER_GAMMA) * (r * ln_t - 1.0) / l;
        }
        w
    };
    let integral = residue_prediction_integral(x, r, weight);
    Ok(x / euler_phi(rc.modulus()) as f64 * integral)
}

/// Prediction for T_r: C·x/φ(k) at r = −1 (C = ∫₀^∞ ρ(v)/(v+2) dv), and
/// (x/φ(k))·∫₂^x ρ(ln x/ln t)·R_{1,r}(ln t) dt/t^{r+2} for r > −1, with
/// R_{1,r}(w) = (r+1)²w − (r+1).
pub fn predict_t_r(r: f64, rc: ResidueClass, x: f64) -> Result<f64, LabError> {
    if !(r >= -1.0) {
        return Err(LabError::ROutOfRange { r, need: "r >= -1" });
    }
    if !(x >= 2.0) || !x.is_finite() {
        return Err(LabError::PredictionPoint { x });
    }
    let phi = euler_phi(rc.modulus()) as f64;
    if r == -1.0 {
        let c = dickman::saias_constant(&TABLE)?;
        return Ok(c * x / phi);
    }
    let s = r + 1.0;
    let weight = move |ln_t: f64| s * s * ln_t - s;
    let integral = residue_prediction_integral(x, s, weight);
    Ok(x / phi * integral)
}

// ---------------------------------------------------------------------------
// Consecutive-value experiments
// ---------------------------------------------------------------------------

/// Counts and match lists for consecutive arguments: how often β drops,
/// drops twice in a row, and how often β, B, B₁ collide at (n, n+1).
#[derive(Clone, Debug)]
pub struct ConsecutiveReport {
    pub x: u64,
    /// Matches with n ≤ this bound are listed explicitly.
    pub listing_cutoff: u64,
    /// #\{1 ≤ n < x : β(n) > β(n+1)\}
    pub beta_decrease: u64,
    /// #\{1 ≤ n < x−1 : β(n) > β(n+1) > β(n+2)\}
    pub beta_double_decrease: u64,
    pub beta_equal: u64,
    pub b_equal: u64,
    pub b1_equal: u64,
    /// (n, common value) with β(n) = β(n+1), n ≤ cutoff.
    pub beta_equal_matches: Vec<(u64, u64)>,
    pub b_equal_matches: Vec<(u64, u64)>,
    pub b1_equal_matches: Vec<(u64, u64)>,
}

impl ConsecutiveReport {
    /// Fraction of n < x with β(n) > β(n+1).
    pub fn beta_decrease_frequency(&self) -> f64 {
        self.beta_decrease as f64 / (self.x - 1) as f64
    }
}

/// One ordered pass over n ≤ x comparing each record with its predecessor.
pub fn consecutive_experiments(x: u64, listing_cutoff: u64) -> Result<ConsecutiveReport, LabError> {
    check_x(x, 3)?;
    let mut report = ConsecutiveReport {
        x,
        listing_cutoff,
        beta_decrease: 0,
        beta_double_decrease: 0,
        beta_equal: 0,
        b_equal: 0,
        b1_equal: 0,
        beta_equal_matches: Vec::new(),
        b_equal_matches: Vec::new(),
        b1_equal_matches: Vec::new(),
    };
    // (β, B, B₁) of n−1 and β of n−2.
    let mut prev: Option<(u64, u64, u64)> = None;
    let mut prev2_beta: Option<u64> = None;
    stream(x, |r| {
        if let Some((pb, pbig, pb1)) = prev {
            let n = r.n - 1; // the pair is (n, n+1)
            if pb > r.beta {
                report.beta_decrease += 1;
                if let Some(ppb) = prev2_beta {
                    if ppb > pb {
                        report.beta_double_decrease += 1;
                    }
                }
            }
            if pb == r.beta {
                report.beta_equal += 1;
                if n <= listing_cutoff {
                    report.beta_equal_matches.push((n, pb));
                }
            }
            if pbig == r.b {
                report.b_equal += 1;
                if n <= listing_cutoff {
                    report.b_equal_matches.push((n, pbig));
                }
            }
            if pb1 == r.b1 {
                report.b1_equal += 1;
                if n <= listing_cutoff {
                    report.b1_equal_matches.push((n, pb1));
                }
            }
            prev2_beta = Some(pb);
        }
        prev = Some((r.beta, r.b, r.b1));
    })?;
    Ok(report)
}
