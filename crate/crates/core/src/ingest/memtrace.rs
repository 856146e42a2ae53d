use serde::Deserialize;

use super::MemorySummary;
use crate::error::{Error, Result};

/// Result of reading a `timestamp_ms,rss_bytes` trace.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryTrace {
    pub summary: MemorySummary,
    pub warnings: Vec<String>,
    /// Rows skipped because a cell was not numeric: (line number, reason).
    pub row_errors: Vec<(usize, String)>,
}

#[derive(Deserialize)]
struct Row {
    timestamp_ms: f64,
    rss_bytes: u64,
}

/// Peak is the maximum sample; steady is the median of the final quarter.
pub fn parse_memory_trace(document: &str) -> Result<MemoryTrace> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(document.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["timestamp_ms", "rss_bytes"] {
        return Err(Error::Schema {
            path: "header".into(),
            message: format!("expected `timestamp_ms,rss_bytes`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let mut samples = Vec::new();
    let mut warnings = Vec::new();
    let mut row_errors = Vec::new();
    let mut last_ts: Option<f64> = None;
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let line = i + 2;
        match row {
            Ok(row) => {
                if let Some(prev) = last_ts {
                    if row.timestamp_ms < prev {
                        warnings.push(format!("line {line}: timestamp {} precedes {prev}", row.timestamp_ms));
                    }
                }
                last_ts = Some(row.timestamp_ms);
                samples.push(row.rss_bytes);
            }
            Err(e) => row_errors.push((line, e.to_string())),
        }
    }
    if samples.is_empty() {
        return Err(Error::config("memory trace has no samples"));
    }

    let peak = *samples.iter().max().expect("non-empty");
    let tail_len = samples.len().div_ceil(4);
    let mut tail = samples[samples.len() - tail_len..].to_vec();
    tail.sort_unstable();
    let mid = tail.len() / 2;
    let steady = if tail.len() % 2 == 1 {
        tail[mid]
    } else {
        (tail[mid - 1] + tail[mid]) / 2
    };
    Ok(MemoryTrace {
        summary: MemorySummary {
            peak_bytes: peak,
            steady_bytes: steady,
            samples: samples.len() as u64,
        },
        warnings,
        row_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row() {
        let t = parse_memory_trace("timestamp_ms,rss_bytes\n0,1000\n").unwrap();
        assert_eq!(t.summary, MemorySummary { peak_bytes: 1000, steady_bytes: 1000, samples: 1 });
    }

    #[test]
    fn final_quarter_median() {
        let t = parse_memory_trace("timestamp_ms,rss_bytes\n0,1000\n1,2000\n2,3000\n3,3000\n").unwrap();
        assert_eq!(t.summary.peak_bytes, 3000);
        assert_eq!(t.summary.steady_bytes, 3000);
        let t = parse_memory_trace(
            "timestamp_ms,rss_bytes\n0,1\n1,9\n2,9\n3,9\n4,9\n5,9\n6,100\n7,200\n",
        )
        .unwrap();
        // last quarter = [100, 200]
        assert_eq!(t.summary.steady_bytes, 150);
        assert_eq!(t.summary.peak_bytes, 200);
    }

    #[test]
    fn empty_body_is_an_error() {
        let err = parse_memory_trace("timestamp_ms,rss_bytes\n").unwrap_err();
        assert!(err.to_string().contains("no samples"));
    }

    #[test]
    fn bad_rows_and_disorder() {
        let t = parse_memory_trace("timestamp_ms,rss_bytes\n5,10\n3,20\nx,30\n6,abc\n").unwrap();
        assert_eq!(t.summary.samples, 2);
        assert_eq!(t.warnings.len(), 1);
        assert_eq!(t.row_errors.len(), 2);
        assert_eq!(t.row_errors[0].0, 4);
    }

    #[test]
    fn wrong_header() {
        assert!(parse_memory_trace("time,rss\n0,1\n").is_err());
    }
}
