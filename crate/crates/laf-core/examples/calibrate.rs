//! Envelope calibration: one streaming pass with decade checkpoints,
//! printing every measured quantity the test suite freezes tolerances for.
//!
//! Run with, e.g.:
//!   cargo run -p laf-core --example calibrate --release [x_max]
//!
//! The printed table is the provenance for the numeric envelopes in the
//! test suite: measure first, freeze after.

use laf_core::dickman::{self, DickmanTable};
use laf_core::kahan::KahanSum;
use laf_core::lab::{self, ResidueClass};
use laf_core::sieve::{self, SieveOptions};

#[derive(Default)]
struct Acc {
    recip_p: KahanSum,
    recip_beta: KahanSum,
    recip_b: KahanSum,
    mu_over_p: KahanSum,
    omdiff_over_p: KahanSum,
    omega_over_p: KahanSum,
    p_pow_big_omega: KahanSum,
    p_pow_omega: KahanSum,
    b1_over_b: KahanSum,
    b1_over_p: KahanSum,
    sum_beta: u128,
    sum_excess: u128,
    p_squared_count: u64,
    p_squared_p_sum: KahanSum, // T_{-1}
    s0_mod4_l1: u64,
    s0_mod4_l3: u64,
    s0_mod4_excluded: u64,
    beta_decrease: u64,
    beta_equal: u64,
    b_equal: u64,
    b1_equal: u64,
    prev: Option<(u64, u64, u64)>,
}

fn main() {
    let x_max: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("x_max"))
        .unwrap_or(10_000_000);
    let checkpoints: Vec<u64> = [100_000u64, 1_000_000, 10_000_000, 100_000_000]
        .into_iter()
        .filter(|&c| c <= x_max)
        .collect();
    let table = DickmanTable::new();
    let mut acc = Acc::default();
    let mut next = 0usize;
    let start = std::time::Instant::now();
    sieve::for_each_record(x_max, &SieveOptions::sequential(), |r| {
        let p = r.largest_prime;
        let pf = p as f64;
        acc.recip_p += 1.0 / pf;
        if r.n >= 2 {
            acc.recip_beta += 1.0 / r.beta as f64;
            acc.recip_b += 1.0 / r.b as f64;
            acc.b1_over_b += r.b1 as f64 / r.b as f64;
            acc.b1_over_p += r.b1 as f64 / pf;
        }
        if r.is_squarefree {
            acc.mu_over_p += 1.0 / pf;
        }
        acc.omdiff_over_p += (r.big_omega - r.omega) as f64 / pf;
        acc.omega_over_p += r.omega as f64 / pf;
        acc.p_pow_big_omega += pf.powi(-(r.big_omega as i32));
        acc.p_pow_omega += pf.powi(-(r.omega as i32));
        acc.sum_beta += r.beta as u128;
        acc.sum_excess += r.excess() as u128;
        if r.n % (p * p) == 0 {
            acc.p_squared_count += 1;
            acc.p_squared_p_sum += pf;
        }
        match p % 4 {
            1 => acc.s0_mod4_l1 += 1,
            3 => acc.s0_mod4_l3 += 1,
            _ => acc.s0_mod4_excluded += 1,
        }
        if let Some((pb, pbig, pb1)) = acc.prev {
            if pb > r.beta {
                acc.beta_decrease += 1;
            }
            if pb == r.beta {
                acc.beta_equal += 1;
            }
            if pbig == r.b {
                acc.b_equal += 1;
            }
            if pb1 == r.b1 {
                acc.b1_equal += 1;
            }
        }
        acc.prev = Some((r.beta, r.b, r.b1));
        while next < checkpoints.len() && r.n == checkpoints[next] {
            report(checkpoints[next], &acc, &table, start);
            next += 1;
        }
    })
    .expect("stream");
    eprintln!("total elapsed: {:.1?}", start.elapsed());
}

fn report(x: u64, acc: &Acc, table: &DickmanTable, start: std::time::Instant) {
    let xf = x as f64;
    let l1 = xf.ln();
    let l2 = l1.ln();
    println!("== x = {x:.0e}  (elapsed {:.1?})", start.elapsed());
    let rp = acc.recip_p.value();
    let rbeta = acc.recip_beta.value();
    let rb = acc.recip_b.value();
    println!("  recip: P {rp:.4}  beta {rbeta:.4}  B {rb:.4}");
    println!(
        "    beta/P {:.4}  B/P {:.4}  B/beta {:.4}",
        rbeta / rp,
        rb / rp,
        rb / rbeta
    );
    let delta = dickman::delta(table, xf).unwrap().value;
    println!("  recipP/(x*delta) = {:.4}   (delta = {delta:.6e})", rp / (xf * delta));
    println!(
        "  normalized ratios: mu2 {:.4}  Om-om {:.4}  omega {:.4}",
        acc.mu_over_p.value() / rp / laf_core::density::SQUAREFREE_DENSITY,
        acc.omdiff_over_p.value() / rp
            / dickman::prime_reciprocal_constants(1_000_000).p2p_sum,
        acc.omega_over_p.value() / rp / (2.0 * l1 / l2).sqrt()
    );
    println!(
        "  P^-Omega - lnln x = {:.4};  omega-mode diag = {:.4}",
        acc.p_pow_big_omega.value() - l2,
        acc.p_pow_omega.value().ln() * l2 / l1.sqrt()
    );
    let s1_exact = rp;
    let rc = ResidueClass::new(1, 1).unwrap();
    let pred0 = lab::predict_s_r(1.0, rc, xf, 0).unwrap();
    let pred1 = lab::predict_s_r(1.0, rc, xf, 1).unwrap();
    println!(
        "  S1 exact {:.4}  predJ0 {:.4} (ratio {:.4})  predJ1 {:.4} (ratio {:.4})",
        s1_exact,
        pred0,
        s1_exact / pred0,
        pred1,
        s1_exact / pred1
    );
    let t0_pred = lab::predict_t_r(0.0, rc, xf).unwrap();
    let tm1_pred = lab::predict_t_r(-1.0, rc, xf).unwrap();
    println!(
        "  T0 exact {}  pred {:.1} (ratio {:.4});  T-1 exact {:.1} pred {:.1} (ratio {:.4})",
        acc.p_squared_count,
        t0_pred,
        acc.p_squared_count as f64 / t0_pred,
        acc.p_squared_p_sum.value(),
        tm1_pred,
        acc.p_squared_p_sum.value() / tm1_pred
    );
    let factor = lab::p_squared_corollary_factor(xf).unwrap();
    println!(
        "  corollary: count/(recipP*factor) = {:.4}",
        acc.p_squared_count as f64 / (rp * factor)
    );
    println!(
        "  S0 mod 4: l1 {}  l3 {}  excluded {}  -> phi*S0/x: {:.5} / {:.5}",
        acc.s0_mod4_l1,
        acc.s0_mod4_l3,
        acc.s0_mod4_excluded,
        2.0 * acc.s0_mod4_l1 as f64 / xf,
        2.0 * acc.s0_mod4_l3 as f64 / xf
    );
    println!(
        "  B1/B per-x {:.6}  B1/P/(e^g x lnln) {:.4}",
        acc.b1_over_b.value() / xf,
        acc.b1_over_p.value() / (dickman::EULER_GAMMA.exp() * xf * l2)
    );
    let pred3 = lab::predict_sum_additive(xf, 3).unwrap();
    println!(
        "  sum_beta {}  pred(M=3) {:.4e}  |gap|/(x^2/ln^4 x) = {:.3}  rel {:.5}",
        acc.sum_beta,
        pred3,
        (acc.sum_beta as f64 - pred3).abs() / (xf * xf / l1.powi(4)),
        (acc.sum_beta as f64 - pred3).abs() / acc.sum_beta as f64
    );
    println!(
        "  excess: C0 est {:.5}",
        (acc.sum_excess as f64 - xf * l2) / xf
    );
    println!(
        "  consecutive: dec freq {:.5}  beta_eq {}  B_eq {}  B1_eq {}  (5x/lnx = {:.0})",
        acc.beta_decrease as f64 / (xf - 1.0),
        acc.beta_equal,
        acc.b_equal,
        acc.b1_equal,
        5.0 * xf / l1
    );
}
