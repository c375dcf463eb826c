//! Per-estimator MSE results and their CSV form.
//!
//! The report schema is `estimator,snr_db,mse,sample_count` with a header
//! row, '.' decimal separators, and LF line endings.

use std::io::Write;

use crate::error::{Error, Result};

/// Mean-squared-error result for one estimator at one SNR.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub estimator: String,
    pub snr_db: f64,
    pub mse: f64,
    pub sample_count: u64,
}

impl EstimateReport {
    pub fn new(estimator: impl Into<String>, snr_db: f64, mse: f64, sample_count: u64) -> Result<Self> {
        if !(mse >= 0.0) {
            return Err(Error::argument(format!("mse must be non-negative, got {mse}")));
        }
        if sample_count == 0 {
            return Err(Error::argument("sample count must be at least 1"));
        }
        Ok(EstimateReport {
            estimator: estimator.into(),
            snr_db,
            mse,
            sample_count,
        })
    }
}

pub const REPORT_CSV_HEADER: &str = "estimator,snr_db,mse,sample_count";

/// Writes reports in the documented CSV schema.
pub fn write_reports_csv<W: Write>(mut w: W, reports: &[EstimateReport]) -> Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{},{},{},{}", r.estimator, r.snr_db, r.mse, r.sample_count)?;
    }
    Ok(())
}

/// Strict reader for the report schema (used by the harness tests).
pub fn parse_reports_csv(text: &str) -> Result<Vec<EstimateReport>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == REPORT_CSV_HEADER => {}
        other => return Err(Error::format(format!("bad report header: {other:?}"))),
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::format(format!("row {}: expected 4 columns, got {}", idx + 1, fields.len())));
        }
        let snr_db: f64 = fields[1]
            .parse()
            .map_err(|e| Error::format(format!("row {}: bad snr_db: {e}", idx + 1)))?;
        let mse: f64 = fields[2]
            .parse()
            .map_err(|e| Error::format(format!("row {}: bad mse: {e}", idx + 1)))?;
        let sample_count: u64 = fields[3]
            .parse()
            .map_err(|e| Error::format(format!("row {}: bad sample_count: {e}", idx + 1)))?;
        out.push(EstimateReport::new(fields[0], snr_db, mse, sample_count)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let reports = vec![
            EstimateReport::new("ls", 10.0, 0.1, 10_000).unwrap(),
            EstimateReport::new("mmse_theory", 25.0, 0.00021, 10_000).unwrap(),
        ];
        let mut buf = Vec::new();
        write_reports_csv(&mut buf, &reports).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("estimator,snr_db,mse,sample_count\n"));
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
        let parsed = parse_reports_csv(&text).unwrap();
        assert_eq!(parsed, reports);
    }

    #[test]
    fn invalid_reports_rejected() {
        assert!(EstimateReport::new("ls", 0.0, -1.0, 1).is_err());
        assert!(EstimateReport::new("ls", 0.0, 0.0, 0).is_err());
        assert!(parse_reports_csv("nope\n").is_err());
        assert!(parse_reports_csv("estimator,snr_db,mse,sample_count\na,b,c\n").is_err());
    }
}
