//! Small shared numerics kit: fixed Gauss–Legendre rules, adaptive Simpson
//! quadrature with an error estimate, and Richardson-extrapolated central
//! finite differences.
//!
//! These are deliberately plain double-precision routines: every consumer in
//! this crate needs absolute accuracies around 10⁻⁸…10⁻¹²  on smooth
//! integrands, which these rules reach with large margins once integration
//! panels are split at the integrands' kink locations (the callers'
//! responsibility).

/// 5-point Gauss–Legendre nodes/weights on [−1, 1]; exact through degree 9.
const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// ∫_a^b f, 5-point Gauss–Legendre on the single panel [a, b].
pub fn gauss5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL5 {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// ∫_a^b f by composite 5-point Gauss–Legendre over `panels` equal panels.
pub fn gauss5_panels(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    let mut acc = crate::kahan::KahanSum::new();
    for i in 0..panels {
        let lo = a + i as f64 * width;
        acc += gauss5(&f, lo, lo + width);
    }
    acc.value()
}

/// Adaptive Simpson quadrature.  Returns `(value, error_estimate)` where the
/// estimate is the accumulated |S_fine − S_coarse|/15 over accepted panels —
/// the standard Richardson error model for Simpson's rule.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        err: &mut f64,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            *err += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err)
    }
    if a == b {
        return (0.0, 0.0);
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    let mut err = 0.0;
    let value = recurse(&f, a, b, fa, fm, fb, whole, tol, 48, &mut err);
    (value, err)
}

/// m-th derivative of `f` at `x` by central binomial differences with
/// Richardson extrapolation.  Returns `(value, error_estimate)`.
///
/// The base approximation is the symmetric difference
///   D(h) = h^{−m} Σ_{i=0}^{m} (−1)^i C(m, i) f(x + (m/2 − i)h),
/// whose error expands in even powers of h, so Neville extrapolation over
/// h, h/2, h/4, … gains two orders per column.  The returned estimate is the
/// distance between the last two extrapimation diagonals; the value is the
/// diagonal entry where that distance was smallest (deeper levels eventually
/// lose to f64 rounding — the minimum picks the sweet spot).
pub fn central_derivative(
    f: impl Fn(f64) -> f64,
    x: f64,
    m: u32,
    h0: f64,
    levels: usize,
) -> (f64, f64) {
    assert!(m >= 1 && levels >= 2);
    let binom: Vec<f64> = {
        let mut c = vec![1.0f64];
        for i in 0..m {
            c.push(c[i as usize] * (m - i) as f64 / (i + 1) as f64);
        }
        c
    };
    let d = |h: f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..=m {
            let offset = (m as f64 / 2.0 - i as f64) * h;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom[i as usize] * f(x + offset);
        }
        acc / h.powi(m as i32)
    };
    // Neville table in h²; keep only the previous row.
    let mut prev: Vec<f64> = Vec::new();
    let mut best = (f64::NAN, f64::INFINITY);
    let mut last_diag = f64::NAN;
    for l in 0..levels {
        let h = h0 / (1 << l) as f64;
        let mut row = vec![d(h)];
        for q in 1..=l {
            let factor = 4.0f64.powi(q as i32);
            let refined = (factor * row[q - 1] - prev[q - 1]) / (factor - 1.0);
            row.push(refined);
        }
        let diag = *row.last().unwrap();
        if l > 0 {
            let est = (diag - last_diag).abs();
            if est < best.1 {
                best = (diag, est);
            }
        }
        last_diag = diag;
        prev = row;
    }
    best
}
