//! Experiment reports: one record per sample point, serialized as CSV
//! (data only, byte-deterministic) and JSON (data plus metadata).
//!
//! Float formatting uses Rust's shortest-roundtrip `Display`, so a report
//! built from identical numbers always serializes to identical bytes; any
//! timestamps or environment notes belong in the JSON metadata map, never
//! in the CSV body.

use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("column lengths differ: {what}")]
    LengthMismatch { what: String },
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// Deterministic verdict on a ratio sequence: does |ratio − 1| strictly
/// shrink over the last three samples?
#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TrendVerdict {
    Converging,
    Inconclusive,
    Diverging,
}

impl TrendVerdict {
    /// Pure function of the ratio sequence: converging iff the distance to
    /// 1 strictly decreases over the last three finite entries, diverging
    /// iff it strictly increases, inconclusive otherwise (including any
    /// sequence shorter than three).
    pub fn from_ratios(ratios: &[f64]) -> TrendVerdict {
        let finite: Vec<f64> = ratios.iter().copied().filter(|r| r.is_finite()).collect();
        if finite.len() < 3 {
            return TrendVerdict::Inconclusive;
        }
        let tail = &finite[finite.len() - 3..];
        let d: Vec<f64> = tail.iter().map(|r| (r - 1.0).abs()).collect();
        if d[0] > d[1] && d[1] > d[2] {
            TrendVerdict::Converging
        } else if d[0] < d[1] && d[1] < d[2] {
            TrendVerdict::Diverging
        } else {
            TrendVerdict::Inconclusive
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TrendVerdict::Converging => "converging",
            TrendVerdict::Inconclusive => "inconclusive",
            TrendVerdict::Diverging => "diverging",
        }
    }
}

/// One experiment's samples, predictions, and verdict.
#[derive(Serialize, Clone, Debug)]
pub struct ExperimentReport {
    pub experiment_id: String,
    pub x_samples: Vec<u64>,
    pub exact_values: Vec<f64>,
    pub predicted_values: Vec<f64>,
    /// exact/predicted per sample; NaN wherever predicted = 0.
    pub ratios: Vec<f64>,
    pub trend_verdict: TrendVerdict,
    /// Anchors, constants used, conventions.  JSON-only payload.
    pub metadata: BTreeMap<String, String>,
}

impl ExperimentReport {
    /// Assembles a report, deriving ratios and the verdict.  Column lengths
    /// must agree.
    pub fn new(
        experiment_id: impl Into<String>,
        x_samples: Vec<u64>,
        exact_values: Vec<f64>,
        predicted_values: Vec<f64>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self, ReportError> {
        if x_samples.len() != exact_values.len() || x_samples.len() != predicted_values.len() {
            return Err(ReportError::LengthMismatch {
                what: format!(
                    "x: {}, exact: {}, predicted: {}",
                    x_samples.len(),
                    exact_values.len(),
                    predicted_values.len()
                ),
            });
        }
        let ratios: Vec<f64> = exact_values
            .iter()
            .zip(&predicted_values)
            .map(|(&e, &p)| if p == 0.0 { f64::NAN } else { e / p })
            .collect();
        let trend_verdict = TrendVerdict::from_ratios(&ratios);
        Ok(ExperimentReport {
            experiment_id: experiment_id.into(),
            x_samples,
            exact_values,
            predicted_values,
            ratios,
            trend_verdict,
            metadata,
        })
    }

    /// The CSV body: header plus one row per sample.  Pure function of the
    /// numeric content — identical reports yield identical bytes.
    pub fn csv_body(&self) -> String {
        let mut out = String::from("x,exact,predicted,ratio\n");
        for i in 0..self.x_samples.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.x_samples[i], self.exact_values[i], self.predicted_values[i], self.ratios[i]
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ReportError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.csv_body().as_bytes())?;
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), ReportError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json_string()?.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> ExperimentReport {
        let mut meta = BTreeMap::new();
        meta.insert("constant".to_string(), "0.62".to_string());
        ExperimentReport::new(
            "demo",
            vec![100, 1000, 10000, 100000],
            vec![1.5, 1.25, 1.125, 1.0625],
            vec![1.0, 1.0, 1.0, 1.0],
            meta,
        )
        .unwrap()
    }

    #[test]
    fn verdict_requires_three_samples() {
        assert_eq!(TrendVerdict::from_ratios(&[]), TrendVerdict::Inconclusive);
        assert_eq!(
            TrendVerdict::from_ratios(&[1.5, 1.2]),
            TrendVerdict::Inconclusive
        );
    }

    #[test]
    fn verdict_detects_direction() {
        assert_eq!(
            TrendVerdict::from_ratios(&[1.5, 1.2, 1.1]),
            TrendVerdict::Converging
        );
        // approaching 1 from below also converges
        assert_eq!(
            TrendVerdict::from_ratios(&[0.5, 0.8, 0.9]),
            TrendVerdict::Converging
        );
        assert_eq!(
            TrendVerdict::from_ratios(&[1.1, 1.2, 1.5]),
            TrendVerdict::Diverging
        );
        assert_eq!(
            TrendVerdict::from_ratios(&[1.1, 1.3, 1.2]),
            TrendVerdict::Inconclusive
        );
        // only the last three matter
        assert_eq!(
            TrendVerdict::from_ratios(&[0.1, 9.0, 1.5, 1.2, 1.1]),
            TrendVerdict::Converging
        );
        // non-finite entries are ignored
        assert_eq!(
            TrendVerdict::from_ratios(&[f64::NAN, 1.5, 1.2, 1.1]),
            TrendVerdict::Converging
        );
    }

    #[test]
    fn report_derives_ratios_and_verdict() {
        let r = sample_report();
        assert_eq!(r.trend_verdict, TrendVerdict::Converging);
        assert_eq!(r.ratios, vec![1.5, 1.25, 1.125, 1.0625]);
    }

    #[test]
    fn zero_prediction_yields_nan_ratio() {
        let r = ExperimentReport::new(
            "zeros",
            vec![10, 20, 30],
            vec![1.0, 2.0, 3.0],
            vec![0.0, 2.0, 3.0],
            BTreeMap::new(),
        )
        .unwrap();
        assert!(r.ratios[0].is_nan());
        assert_eq!(r.ratios[1], 1.0);
        assert_eq!(r.trend_verdict, TrendVerdict::Inconclusive); // only 2 finite
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let err = ExperimentReport::new(
            "bad",
            vec![10, 20],
            vec![1.0],
            vec![1.0, 2.0],
            BTreeMap::new(),
        );
        assert!(matches!(err, Err(ReportError::LengthMismatch { .. })));
    }

    #[test]
    fn csv_body_is_deterministic_and_exact() {
        let r = sample_report();
        let body = r.csv_body();
        assert_eq!(
            body,
            "x,exact,predicted,ratio\n\
             100,1.5,1,1.5\n\
             1000,1.25,1,1.25\n\
             10000,1.125,1,1.125\n\
             100000,1.0625,1,1.0625\n"
        );
        // byte-identical on rebuild
        assert_eq!(body, sample_report().csv_body());
    }

    #[test]
    fn csv_roundtrips_shortest_float_forms() {
        let r = ExperimentReport::new(
            "floats",
            vec![1],
            vec![0.1],
            vec![3.0],
            BTreeMap::new(),
        )
        .unwrap();
        let body = r.csv_body();
        // shortest-roundtrip rendering: 0.1 stays "0.1", ratio is exact
        assert!(body.contains("1,0.1,3,0.03333333333333333\n"), "{body}");
        let reparsed: f64 = "0.03333333333333333".parse().unwrap();
        assert_eq!(reparsed, 0.1 / 3.0);
    }

    #[test]
    fn json_carries_metadata_and_parses_back() {
        let r = sample_report();
        let text = r.to_json_string().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["experiment_id"], "demo");
        assert_eq!(v["trend_verdict"], "converging");
        assert_eq!(v["metadata"]["constant"], "0.62");
        assert_eq!(v["x_samples"][3], 100000);
    }

    #[test]
    fn files_written_match_in_memory_forms() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample_report();
        let csv_path = dir.path().join("demo_100000.csv");
        let json_path = dir.path().join("demo_100000.json");
        r.write_csv(&csv_path).unwrap();
        r.write_json(&json_path).unwrap();
        assert_eq!(std::fs::read_to_string(&csv_path).unwrap(), r.csv_body());
        let json_text = std::fs::read_to_string(&json_path).unwrap();
        assert_eq!(json_text, r.to_json_string().unwrap() + "\n");
    }
}
