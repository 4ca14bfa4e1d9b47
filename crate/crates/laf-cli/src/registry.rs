//! Catalog of runnable experiments.
//!
//! Each entry couples a stable id with a fixed anchor label and a one-line
//! summary.  Ids and anchors are interface data: external scripts select
//! experiments by these exact strings and cross-reference results by the
//! anchor, so both are frozen — new experiments append, nothing is renamed.

pub struct ExperimentSpec {
    /// Stable selector used on the command line and in output file names.
    pub id: &'static str,
    /// Fixed cross-reference label attached to every report.
    pub anchor: &'static str,
    /// What the experiment measures, in one line.
    pub summary: &'static str,
}

pub const REGISTRY: &[ExperimentSpec] = &[
    ExperimentSpec {
        id: "sum_beta_21",
        anchor: "Eq. (2.1)",
        summary: "summatory beta(n) against its three-term x^2/log x series",
    },
    ExperimentSpec {
        id: "density_table_31",
        anchor: "Eq. (3.1)",
        summary: "local densities of B(n)-beta(n): limit values vs counts at x",
    },
    ExperimentSpec {
        id: "reciprocal_P_41",
        anchor: "Eq. (4.1)",
        summary: "sum of 1/P(n) against x times the integral density delta(x)",
    },
    ExperimentSpec {
        id: "residue_S_51",
        anchor: "Eq. (5.1)",
        summary: "residue-class sum S_1(x;k,l) against its quadrature prediction",
    },
    ExperimentSpec {
        id: "smooth_grid_56",
        anchor: "Eq. (5.6)",
        summary: "psi(x,y) from the exact recurrence against x*rho(u) on a u-grid",
    },
    ExperimentSpec {
        id: "consecutive_p3",
        anchor: "Problem 3",
        summary: "beta/B/B1 on consecutive integers: decrease frequency, equalities",
    },
];

pub fn find(id: &str) -> Option<&'static ExperimentSpec> {
    REGISTRY.iter().find(|e| e.id == id)
}

/// One line per experiment: `id<TAB>anchor<TAB>summary`.
pub fn catalog() -> String {
    let mut out = String::new();
    for e in REGISTRY {
        out.push_str(&format!("{}\t{}\t{}\n", e.id, e.anchor, e.summary));
    }
    out
}
