//! Recorded step responses as text blocks:
//!
//! ```text
//! step_height_deg,20
//! t_ms,position_deg
//! 0,0.0
//! 10,0.4
//! ```
//!
//! Blocks repeat, one per step height. The column header line is optional
//! and samples must lie on the 10 ms grid starting at zero.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use thiserror::Error;

use super::{StepResponse, SAMPLE_PERIOD};

const HEIGHT_KEY: &str = "step_height_deg";
const COLUMNS: &str = "t_ms,position_deg";

#[derive(Debug, Error)]
pub enum StepIoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no step responses found")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> StepIoError {
    StepIoError::Parse { line, msg: msg.into() }
}

fn number(field: &str, line: usize) -> Result<f64, StepIoError> {
    let v: f64 = field.trim().parse().map_err(|_| parse_err(line, format!("not a number: {:?}", field.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, "non-finite value"));
    }
    Ok(v)
}

/// Parses every block; each response drops its first `skip` samples when fitted.
pub fn read_step_responses<R: BufRead>(reader: R, skip: usize) -> Result<Vec<StepResponse>, StepIoError> {
    let mut out: Vec<(usize, StepResponse)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields[0].trim() == HEIGHT_KEY {
            if fields.len() != 2 {
                return Err(parse_err(lineno, "expected `step_height_deg,<value>`"));
            }
            let height = number(fields[1], lineno)?;
            out.push((lineno, StepResponse { height, samples: Vec::new(), skip }));
            continue;
        }
        if text.replace(' ', "") == COLUMNS {
            continue;
        }
        let Some((_, block)) = out.last_mut() else {
            return Err(parse_err(lineno, "data before the first step_height_deg line"));
        };
        if fields.len() != 2 {
            return Err(parse_err(lineno, format!("expected 2 fields, found {}", fields.len())));
        }
        let t_ms = number(fields[0], lineno)?;
        let expected = block.samples.len() as f64 * SAMPLE_PERIOD * 1e3;
        if (t_ms - expected).abs() > 1e-6 * expected.max(1.0) {
            return Err(parse_err(lineno, format!("expected t_ms = {expected}, found {t_ms}")));
        }
        block.samples.push(number(fields[1], lineno)?);
    }
    if out.is_empty() {
        return Err(StepIoError::Empty);
    }
    for (lineno, r) in &out {
        if r.samples.len() <= r.skip {
            return Err(parse_err(
                *lineno,
                format!("block has {} samples, needs more than the {} skipped", r.samples.len(), r.skip),
            ));
        }
    }
    Ok(out.into_iter().map(|(_, r)| r).collect())
}

pub fn write_step_responses<W: Write>(mut w: W, responses: &[StepResponse]) -> std::io::Result<()> {
    let mut s = String::new();
    for r in responses {
        let _ = writeln!(s, "{HEIGHT_KEY},{}", r.height);
        let _ = writeln!(s, "{COLUMNS}");
        for (k, y) in r.samples.iter().enumerate() {
            let _ = writeln!(s, "{},{y:.9e}", k * 10);
        }
    }
    w.write_all(s.as_bytes())
}
