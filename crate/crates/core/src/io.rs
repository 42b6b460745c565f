//! CSV serialization of event streams, count series, and seasonal curves.
//!
//! Formats are deliberately minimal: a single header line, comma-separated
//! numeric rows, timestamps with nine decimal places (nanosecond precision
//! round-trips losslessly for intraday magnitudes). Writes go through a
//! temp-file-plus-rename so readers never observe a partial file.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimate::{CountSeries, SeasonalCurve};
use crate::sim::EventStream;

// ---------------------------------------------------------------------------
// Atomic write helper
// ---------------------------------------------------------------------------

/// Write `contents` to `path` atomically (temp file in the same directory,
/// then rename).
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Input(format!("invalid output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Event streams
// ---------------------------------------------------------------------------

/// Render an event stream as `time_s` CSV.
pub fn events_to_csv(events: &EventStream) -> String {
    let mut out = String::with_capacity(16 * events.len() + 8);
    out.push_str("time_s\n");
    for &t in events.times() {
        out.push_str(&format!("{t:.9}\n"));
    }
    out
}

pub fn write_events(path: &Path, events: &EventStream) -> Result<()> {
    write_atomic(path, &events_to_csv(events))
}

/// Parse a `time_s` CSV. Times must be nonnegative and ascending
/// (duplicates allowed: simultaneous events are kept).
pub fn read_events(path: &Path, horizon: Option<f64>) -> Result<EventStream> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut times: Vec<f64> = Vec::new();
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header.trim() == "time_s" => {}
        Some((_, Ok(header))) => {
            return Err(Error::Format {
                line: 1,
                message: format!("expected header 'time_s', found '{}'", header.trim()),
            })
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => {
            return Err(Error::Format {
                line: 1,
                message: "empty file".into(),
            })
        }
    }
    for (idx, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let t: f64 = trimmed.parse().map_err(|_| Error::Format {
            line: idx + 1,
            message: format!("not a number: '{trimmed}'"),
        })?;
        if t < 0.0 {
            return Err(Error::Format {
                line: idx + 1,
                message: format!("negative timestamp {t}"),
            });
        }
        if let Some(&prev) = times.last() {
            if t < prev {
                return Err(Error::Format {
                    line: idx + 1,
                    message: format!("timestamp {t} is before the previous one {prev}"),
                });
            }
        }
        times.push(t);
    }
    let horizon = horizon.unwrap_or_else(|| times.last().copied().unwrap_or(0.0));
    EventStream::new(times, horizon)
}

// ---------------------------------------------------------------------------
// Count series
// ---------------------------------------------------------------------------

/// Render a count series as `bin_start_s,count` CSV. Integer counts are
/// written without a decimal point; deflated series keep full precision.
pub fn counts_to_csv(counts: &CountSeries) -> String {
    let mut out = String::with_capacity(16 * counts.len() + 16);
    out.push_str("bin_start_s,count\n");
    let width = counts.bin_width();
    for (i, &c) in counts.counts().iter().enumerate() {
        let start = i as f64 * width;
        if c.fract() == 0.0 {
            out.push_str(&format!("{start:.9},{c:.0}\n"));
        } else {
            out.push_str(&format!("{start:.9},{c}\n"));
        }
    }
    out
}

pub fn write_counts(path: &Path, counts: &CountSeries) -> Result<()> {
    write_atomic(path, &counts_to_csv(counts))
}

/// Parse a `bin_start_s,count` CSV; the bin width is inferred from the
/// first two rows and checked against the rest of the grid.
pub fn read_counts(path: &Path) -> Result<CountSeries> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if idx == 0 {
            if trimmed != "bin_start_s,count" {
                return Err(Error::Format {
                    line: 1,
                    message: format!("expected header 'bin_start_s,count', found '{trimmed}'"),
                });
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let (a, b) = trimmed.split_once(',').ok_or_else(|| Error::Format {
            line: idx + 1,
            message: "expected two comma-separated fields".into(),
        })?;
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Format {
                line: idx + 1,
                message: format!("not a number: '{}'", s.trim()),
            })
        };
        rows.push((parse(a)?, parse(b)?));
    }
    if rows.len() < 2 {
        return Err(Error::Format {
            line: rows.len() + 1,
            message: "count series needs at least two bins".into(),
        });
    }
    let width = rows[1].0 - rows[0].0;
    if !(width > 0.0) {
        return Err(Error::Format {
            line: 3,
            message: "bin starts must be strictly increasing".into(),
        });
    }
    for (i, row) in rows.iter().enumerate() {
        let expected = i as f64 * width;
        if (row.0 - expected).abs() > 1e-6 * width {
            return Err(Error::Format {
                line: i + 2,
                message: format!("bin start {} breaks the uniform grid", row.0),
            });
        }
    }
    CountSeries::new(width, rows.into_iter().map(|(_, c)| c).collect())
}

// ---------------------------------------------------------------------------
// Seasonal curves
// ---------------------------------------------------------------------------

/// Render a seasonal curve as `bin_index,factor` CSV.
pub fn seasonal_to_csv(curve: &SeasonalCurve) -> String {
    let mut out = String::with_capacity(24 * curve.len() + 16);
    out.push_str("bin_index,factor\n");
    for (i, f) in curve.factors().iter().enumerate() {
        out.push_str(&format!("{i},{f:.12}\n"));
    }
    out
}

pub fn write_seasonal(path: &Path, curve: &SeasonalCurve) -> Result<()> {
    write_atomic(path, &seasonal_to_csv(curve))
}

/// Parse a `bin_index,factor` CSV. Factors are renormalized to mean one to
/// absorb decimal truncation from the writer.
pub fn read_seasonal(path: &Path) -> Result<SeasonalCurve> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut factors: Vec<f64> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if idx == 0 {
            if trimmed != "bin_index,factor" {
                return Err(Error::Format {
                    line: 1,
                    message: format!("expected header 'bin_index,factor', found '{trimmed}'"),
                });
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let (a, b) = trimmed.split_once(',').ok_or_else(|| Error::Format {
            line: idx + 1,
            message: "expected two comma-separated fields".into(),
        })?;
        let index: usize = a.trim().parse().map_err(|_| Error::Format {
            line: idx + 1,
            message: format!("not an index: '{}'", a.trim()),
        })?;
        if index != factors.len() {
            return Err(Error::Format {
                line: idx + 1,
                message: format!("expected bin index {}, found {index}", factors.len()),
            });
        }
        let f: f64 = b.trim().parse().map_err(|_| Error::Format {
            line: idx + 1,
            message: format!("not a number: '{}'", b.trim()),
        })?;
        factors.push(f);
    }
    if factors.is_empty() {
        return Err(Error::Format {
            line: 1,
            message: "seasonal curve has no rows".into(),
        });
    }
    let mean = factors.iter().sum::<f64>() / factors.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::Format {
            line: 1,
            message: "seasonal factors must be positive on average".into(),
        });
    }
    for f in &mut factors {
        *f /= mean;
    }
    SeasonalCurve::from_factors(factors)
}
