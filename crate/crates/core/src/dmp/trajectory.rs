use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Allowed deviation of a sample spacing from the nominal period.
pub const UNIFORM_TOLERANCE: f64 = 1e-6;

pub const CSV_HEADER: &str = "t,dim,y,yd,ydd";

#[derive(Debug, Error)]
pub enum TrajectoryIoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("trajectory is not uniformly sampled: step {index} is {step} s, expected {dt} s")]
    NonUniform { index: usize, step: f64, dt: f64 },
    #[error("invalid trajectory: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Samples of one task-space dimension.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub pos: Vec<f64>,
    pub vel: Vec<f64>,
    pub acc: Vec<f64>,
}

impl Channel {
    pub fn with_capacity(n: usize) -> Self {
        Self { pos: Vec::with_capacity(n), vel: Vec::with_capacity(n), acc: Vec::with_capacity(n) }
    }

    pub fn push(&mut self, y: f64, yd: f64, ydd: f64) {
        self.pos.push(y);
        self.vel.push(yd);
        self.acc.push(ydd);
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    /// Peak-to-peak range of the positions.
    pub fn range(&self) -> f64 {
        let lo = self.pos.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.pos.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    /// Largest distance from the first position.
    pub fn max_excursion(&self) -> f64 {
        let y0 = self.pos.first().copied().unwrap_or(0.0);
        self.pos.iter().fold(0.0, |m, y| m.max((y - y0).abs()))
    }
}

/// Uniformly sampled multi-dimensional trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub channels: Vec<Channel>,
}

impl Trajectory {
    pub fn new(dt: f64, times: Vec<f64>, channels: Vec<Channel>) -> Result<Self, TrajectoryIoError> {
        if !(dt > 0.0) {
            return Err(TrajectoryIoError::Invalid(format!("sample period must be positive, got {dt}")));
        }
        if channels.is_empty() {
            return Err(TrajectoryIoError::Invalid("no dimensions".into()));
        }
        for (i, c) in channels.iter().enumerate() {
            if c.len() != times.len() || c.vel.len() != times.len() || c.acc.len() != times.len() {
                return Err(TrajectoryIoError::Invalid(format!(
                    "dimension {i} has {} samples, expected {}",
                    c.len(),
                    times.len()
                )));
            }
        }
        for (i, w) in times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if (step - dt).abs() > UNIFORM_TOLERANCE {
                return Err(TrajectoryIoError::NonUniform { index: i + 1, step, dt });
            }
        }
        Ok(Self { dt, times, channels })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.channels.len()
    }

    pub fn duration(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for (k, t) in self.times.iter().enumerate() {
            for (d, c) in self.channels.iter().enumerate() {
                writeln!(w, "{t:.9e},{d},{:.9e},{:.9e},{:.9e}", c.pos[k], c.vel[k], c.acc[k])?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Reads `t,dim,y,yd,ydd` rows, one per (sample, dimension), grouped by
    /// sample with dimensions in ascending order.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, TrajectoryIoError> {
        struct Row {
            line: usize,
            t: f64,
            dim: usize,
            vals: [f64; 3],
        }
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (idx, line) in r.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if !seen_header {
                if line.replace(' ', "") != CSV_HEADER {
                    return Err(TrajectoryIoError::Parse {
                        line: lineno,
                        msg: format!("expected header `{CSV_HEADER}`"),
                    });
                }
                seen_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(TrajectoryIoError::Parse {
                    line: lineno,
                    msg: format!("expected 5 fields, found {}", fields.len()),
                });
            }
            let num = |i: usize| -> Result<f64, TrajectoryIoError> {
                match fields[i].parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(TrajectoryIoError::Parse {
                        line: lineno,
                        msg: format!("cannot parse `{}` as a finite number", fields[i]),
                    }),
                }
            };
            let dim = fields[1].parse::<usize>().map_err(|_| TrajectoryIoError::Parse {
                line: lineno,
                msg: format!("cannot parse `{}` as a dimension index", fields[1]),
            })?;
            rows.push(Row { line: lineno, t: num(0)?, dim, vals: [num(2)?, num(3)?, num(4)?] });
        }
        if !seen_header {
            return Err(TrajectoryIoError::Parse { line: 1, msg: "empty input".into() });
        }
        let dims = rows.iter().skip(1).position(|r| r.dim == 0).map_or(rows.len(), |p| p + 1);
        if dims == 0 {
            return Err(TrajectoryIoError::Invalid("no samples".into()));
        }
        let mut times = Vec::with_capacity(rows.len() / dims);
        let mut channels = vec![Channel::default(); dims];
        for group in rows.chunks(dims) {
            if group.len() != dims {
                return Err(TrajectoryIoError::Parse {
                    line: group[0].line,
                    msg: format!("sample has {} dimensions, expected {dims}", group.len()),
                });
            }
            for (d, row) in group.iter().enumerate() {
                if row.dim != d {
                    return Err(TrajectoryIoError::Parse {
                        line: row.line,
                        msg: format!("expected dimension {d}, found {}", row.dim),
                    });
                }
                if row.t != group[0].t {
                    return Err(TrajectoryIoError::Parse {
                        line: row.line,
                        msg: "time differs within one sample".into(),
                    });
                }
                channels[d].push(row.vals[0], row.vals[1], row.vals[2]);
            }
            times.push(group[0].t);
        }
        if times.len() < 2 {
            return Err(TrajectoryIoError::Invalid("need at least two samples".into()));
        }
        let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        Self::new(dt, times, channels)
    }
}
