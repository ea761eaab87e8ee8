use std::io::Write;
use std::path::Path;

use serde::Serialize;
use ssqec::stats::{CrossingVerdict, SustainableFit, SweepRecord};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const CSV_HEADER: &str = "model,scheme,family,L,N,p,trials,failures,p_L,stderr,seed";

/// Six significant digits, without trailing zeros.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn csv_row(r: &SweepRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.model,
        r.scheme,
        r.family,
        r.size,
        r.rounds,
        sig6(r.p),
        r.trials,
        r.failures,
        sig6(r.p_l),
        sig6(r.stderr),
        r.seed
    )
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>, CliError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(CliError::Config(format!(
                "expected CSV header {CSV_HEADER:?}"
            )))
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| CliError::Config(format!("CSV row {}: bad {what}", i + 1));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 11 {
                return Err(bad("column count"));
            }
            let trials: u64 = f[6].parse().map_err(|_| bad("trials"))?;
            let failures: u64 = f[7].parse().map_err(|_| bad("failures"))?;
            // Recompute the estimate from the counts rather than trusting
            // the rounded columns.
            let (p_l, stderr) = ssqec::stats::binomial_estimate(failures, trials);
            Ok(SweepRecord {
                model: f[0].to_string(),
                scheme: f[1].parse().map_err(|_| bad("scheme"))?,
                family: f[2].parse().map_err(|_| bad("family"))?,
                size: f[3].parse().map_err(|_| bad("L"))?,
                rounds: f[4].parse().map_err(|_| bad("N"))?,
                p: f[5].parse().map_err(|_| bad("p"))?,
                trials,
                failures,
                p_l,
                stderr,
                seed: f[10].parse().map_err(|_| bad("seed"))?,
            })
        })
        .collect()
}

/// Writes the header at creation and flushes every row as it arrives.
pub struct CsvSink {
    out: Option<std::fs::File>,
}

impl CsvSink {
    pub fn create(path: Option<&Path>) -> Result<Self, CliError> {
        let out = match path {
            Some(p) => {
                let mut f = std::fs::File::create(p)?;
                writeln!(f, "{CSV_HEADER}")?;
                Some(f)
            }
            None => {
                println!("{CSV_HEADER}");
                None
            }
        };
        Ok(Self { out })
    }

    pub fn push(&mut self, r: &SweepRecord) -> std::io::Result<()> {
        match &mut self.out {
            Some(f) => {
                writeln!(f, "{}", csv_row(r))?;
                f.flush()
            }
            None => {
                println!("{}", csv_row(r));
                std::io::stdout().flush()
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossingSummary {
    /// `None` for repeated local checks, where N follows L.
    #[serde(rename = "N")]
    pub rounds: Option<usize>,
    #[serde(flatten)]
    pub verdict: CrossingVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub version: &'static str,
    pub config: ExperimentConfig,
    /// True until every point has been written.
    pub partial: bool,
    pub points_done: usize,
    pub points_total: usize,
    pub wall_clock_seconds: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub crossings: Vec<CrossingSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sustainable: Option<SustainableFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Summary {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("summary serializes");
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ssqec::codes::Family;
    use ssqec::protocol::CheckScheme;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.1), "0.1");
        assert_eq!(sig6(0.0712345678), "0.0712346");
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(123456789.0), "123457000");
    }

    #[test]
    fn rows_round_trip() {
        let r = SweepRecord {
            model: "phenomenological".into(),
            scheme: CheckScheme::SingleShotAnalytic,
            family: Family::Toric,
            size: 9,
            rounds: 1,
            p: 0.07,
            trials: 2000,
            failures: 713,
            p_l: 0.3565,
            stderr: (0.3565f64 * 0.6435 / 2000.0).sqrt(),
            seed: 42,
        };
        let text = format!("{CSV_HEADER}\n{}\n", csv_row(&r));
        assert_eq!(parse_csv(&text).unwrap(), vec![r]);
        assert!(parse_csv("a,b\n").is_err());
    }
}
