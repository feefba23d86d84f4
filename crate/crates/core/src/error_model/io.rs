//! CSV and JSON forms of timing data and fitted parameters.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::format::FormatError;

use super::{
    Condition, FitReport, GammaParams, RawTimingSamples, TimingObservations, TimingRecord,
};

pub const TIMING_HEADER: [&str; 5] = ["duration", "target_row", "n_early", "n_correct", "n_miss"];
pub const RAW_HEADER: [&str; 3] = ["duration", "target_row", "elapsed_seconds"];
pub const SCATTER_HEADER: [&str; 3] = ["observed_prob", "model_prob", "condition"];

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(r)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<bool, FormatError> {
    let header = rdr.headers()?;
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Ok(false);
    }
    if header.iter().ne(expected.iter().copied()) {
        return Err(FormatError::parse(
            1,
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    Ok(true)
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    name: &str,
    line: u64,
) -> Result<T, FormatError> {
    let raw = rec
        .get(idx)
        .ok_or_else(|| FormatError::parse(line, format!("missing field `{name}`")))?;
    raw.parse()
        .map_err(|_| FormatError::parse(line, format!("invalid {name} {raw:?}")))
}

fn positive_duration(rec: &csv::StringRecord, line: u64) -> Result<f64, FormatError> {
    let d: f64 = field(rec, 0, "duration", line)?;
    if !(d > 0.0 && d.is_finite()) {
        return Err(FormatError::parse(
            line,
            format!("duration must be positive, got {d}"),
        ));
    }
    Ok(d)
}

fn target_row(rec: &csv::StringRecord, line: u64) -> Result<usize, FormatError> {
    let j: usize = field(rec, 1, "target_row", line)?;
    if j == 0 {
        return Err(FormatError::parse(line, "target_row is 1-based"));
    }
    Ok(j)
}

fn check_width(rec: &csv::StringRecord, width: usize, line: u64) -> Result<(), FormatError> {
    if rec.len() != width {
        return Err(FormatError::parse(
            line,
            format!("expected {width} fields, found {}", rec.len()),
        ));
    }
    Ok(())
}

/// Reads `duration,target_row,n_early,n_correct,n_miss`.
pub fn read_timing_csv<R: Read>(r: R) -> Result<TimingObservations<f64>, FormatError> {
    let mut rdr = reader(r);
    if !check_header(&mut rdr, &TIMING_HEADER)? {
        return Err(FormatError::parse(1, "missing header"));
    }
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        check_width(&rec, 5, line)?;
        let record = TimingRecord {
            duration: positive_duration(&rec, line)?,
            target_row: target_row(&rec, line)?,
            n_early: field(&rec, 2, "n_early", line)?,
            n_correct: field(&rec, 3, "n_correct", line)?,
            n_miss: field(&rec, 4, "n_miss", line)?,
        };
        if record.total() == 0 {
            return Err(FormatError::parse(line, "record has no trials"));
        }
        records.push(record);
    }
    Ok(TimingObservations { records })
}

pub fn write_timing_csv<W: Write>(w: W, obs: &TimingObservations<f64>) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(TIMING_HEADER)?;
    for r in &obs.records {
        wtr.write_record([
            r.duration.to_string(),
            r.target_row.to_string(),
            r.n_early.to_string(),
            r.n_correct.to_string(),
            r.n_miss.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `duration,target_row,elapsed_seconds`, one trial per line, grouped
/// by condition in first-appearance order. A file with no header and no
/// rows yields no conditions.
pub fn read_raw_samples_csv<R: Read>(r: R) -> Result<Vec<RawTimingSamples<f64>>, FormatError> {
    let mut rdr = reader(r);
    if !check_header(&mut rdr, &RAW_HEADER)? {
        return Ok(Vec::new());
    }
    let mut groups: Vec<RawTimingSamples<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        check_width(&rec, 3, line)?;
        let d = positive_duration(&rec, line)?;
        let j = target_row(&rec, line)?;
        let x: f64 = field(&rec, 2, "elapsed_seconds", line)?;
        if !(x > 0.0 && x.is_finite()) {
            return Err(FormatError::parse(
                line,
                format!("elapsed_seconds must be positive, got {x}"),
            ));
        }
        let cond = Condition {
            duration: d,
            row: j,
        };
        match groups
            .iter_mut()
            .find(|g| cond.matches(g.duration, g.target_row))
        {
            Some(g) => g.elapsed.push(x),
            None => groups.push(RawTimingSamples {
                duration: d,
                target_row: j,
                elapsed: vec![x],
            }),
        }
    }
    Ok(groups)
}

pub fn write_raw_samples_csv<W: Write>(
    w: W,
    groups: &[RawTimingSamples<f64>],
) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(RAW_HEADER)?;
    for g in groups {
        for x in &g.elapsed {
            wtr.write_record([
                g.duration.to_string(),
                g.target_row.to_string(),
                x.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsEntry {
    pub duration: f64,
    pub row: usize,
    pub kappa: f64,
    pub theta: f64,
    pub goodness: f64,
    #[serde(default)]
    pub degenerate: bool,
}

/// Fitted parameters, one entry per `(duration, row)` condition.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamsFile {
    pub conditions: Vec<ParamsEntry>,
}

impl ParamsFile {
    pub fn from_reports(reports: &[FitReport<f64>]) -> Self {
        Self {
            conditions: reports
                .iter()
                .map(|r| ParamsEntry {
                    duration: r.condition.duration,
                    row: r.condition.row,
                    kappa: r.params.kappa(),
                    theta: r.params.theta(),
                    goodness: r.goodness,
                    degenerate: r.degenerate,
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("params serialize");
        s.push('\n');
        s
    }

    /// Per-row parameters for cursor duration `d`. Each row takes the entry
    /// whose fitted duration is closest to `d` (earlier entries win ties).
    pub fn row_params_at(&self, d: f64) -> Result<BTreeMap<usize, GammaParams<f64>>, FormatError> {
        let mut best: BTreeMap<usize, &ParamsEntry> = BTreeMap::new();
        for e in &self.conditions {
            let closer = best
                .get(&e.row)
                .is_none_or(|b| (e.duration - d).abs() < (b.duration - d).abs());
            if closer {
                best.insert(e.row, e);
            }
        }
        best.into_iter()
            .map(|(row, e)| Ok((row, GammaParams::new(e.kappa, e.theta)?)))
            .collect()
    }

    /// Distinct fitted durations per row that differ from `d`, for warnings.
    pub fn substituted_durations(&self, d: f64) -> Vec<(usize, f64)> {
        let Ok(chosen) = self.row_params_at(d) else {
            return Vec::new();
        };
        chosen
            .keys()
            .filter_map(|row| {
                let e = self
                    .conditions
                    .iter()
                    .filter(|e| e.row == *row)
                    .min_by(|a, b| (a.duration - d).abs().total_cmp(&(b.duration - d).abs()))?;
                ((e.duration - d).abs() > 1e-9 * d.abs().max(1.0)).then_some((*row, e.duration))
            })
            .collect()
    }
}

/// Label used in the scattergram `condition` column.
pub fn condition_label(cond: &Condition<f64>, category: &str) -> String {
    format!("D={};row={};{}", cond.duration, cond.row, category)
}

/// Observed against modeled category probability, three rows per condition.
pub fn write_scattergram<W: Write>(w: W, reports: &[FitReport<f64>]) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SCATTER_HEADER)?;
    for r in reports {
        let names = ["early", "correct", "miss"];
        for ((o, m), name) in r
            .observed
            .as_array()
            .iter()
            .zip(r.model.as_array())
            .zip(names)
        {
            wtr.write_record([
                o.to_string(),
                m.to_string(),
                condition_label(&r.condition, name),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
