//! Ground-contact-force trials and subject metadata.
//!
//! A [`Trial`] is one walking session: a sequence of [`GcfSample`]s, each
//! holding four plantar force channels (toe, Meta12, Meta45, heel) per foot.
//! Trials are read from CSV (canonical) or JSONL with the column names in
//! [`TRIAL_HEADER`], and are made dimensionless by dividing by the subject's
//! body weight before any feature is computed.

use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of the trial CSV format.
pub const TRIAL_HEADER: [&str; 9] = [
    "t", "l_toe", "l_m12", "l_m45", "l_heel", "r_toe", "r_m12", "r_m45", "r_heel",
];

pub const DEFAULT_SAMPLING_RATE: f64 = 20.0;

/// Relative tolerance on sample spacing against `1 / sampling_rate`.
pub const SPACING_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    PD,
    ST,
    H,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::PD, Group::ST, Group::H];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::PD => "PD",
            Group::ST => "ST",
            Group::H => "H",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "PD" => Ok(Group::PD),
            "ST" => Ok(Group::ST),
            "H" => Ok(Group::H),
            other => Err(Error::domain(format!(
                "group must be one of PD, ST, H; got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Foot {
    Left,
    Right,
}

impl Foot {
    pub const BOTH: [Foot; 2] = [Foot::Left, Foot::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Foot::Left => "left",
            Foot::Right => "right",
        }
    }

    pub fn other(self) -> Foot {
        match self {
            Foot::Left => Foot::Right,
            Foot::Right => Foot::Left,
        }
    }
}

impl fmt::Display for Foot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Index of each plantar region within a foot's four-channel reading.
pub mod channel {
    pub const TOE: usize = 0;
    pub const META12: usize = 1;
    pub const META45: usize = 2;
    pub const HEEL: usize = 3;
    pub const NAMES: [&str; 4] = ["toe", "m12", "m45", "heel"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subject {
    pub id: String,
    pub group: Group,
    pub body_weight: f64,
    pub age: Option<f64>,
}

impl Subject {
    pub fn new(id: impl Into<String>, group: Group, body_weight: f64, age: Option<f64>) -> Result<Self> {
        if !(body_weight.is_finite() && body_weight > 0.0) {
            return Err(Error::domain(format!(
                "body weight must be positive, got {body_weight}"
            )));
        }
        if let Some(a) = age {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::domain(format!("age must be positive, got {a}")));
            }
        }
        Ok(Subject {
            id: id.into(),
            group,
            body_weight,
            age,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcfSample {
    pub t: f64,
    pub left: [f64; 4],
    pub right: [f64; 4],
}

impl GcfSample {
    pub fn foot(&self, foot: Foot) -> &[f64; 4] {
        match foot {
            Foot::Left => &self.left,
            Foot::Right => &self.right,
        }
    }

    fn channels(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.left.iter().chain(self.right.iter()).copied().enumerate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub subject_id: String,
    pub trial_id: String,
    pub sampling_rate: f64,
    pub samples: Vec<GcfSample>,
}

impl Trial {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration covered by the samples, `n / sampling_rate`, in seconds.
    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sampling_rate
    }

    /// Four-channel readings of one foot, one row per sample.
    pub fn foot_channels(&self, foot: Foot) -> Vec<[f64; 4]> {
        self.samples.iter().map(|s| *s.foot(foot)).collect()
    }

    /// Sum of the four channels of one foot, per sample.
    pub fn total_force(&self, foot: Foot) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| s.foot(foot).iter().sum())
            .collect()
    }
}

fn channel_name(idx: usize) -> &'static str {
    TRIAL_HEADER[idx + 1]
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Sampling rate implied by the median timestamp delta.
pub fn infer_sampling_rate(samples: &[GcfSample]) -> f64 {
    let mut deltas: Vec<f64> = samples
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .filter(|d| *d > 0.0 && d.is_finite())
        .collect();
    if deltas.is_empty() {
        return DEFAULT_SAMPLING_RATE;
    }
    1.0 / median(&mut deltas)
}

fn check_sample(sample: &GcfSample, line: u64) -> Result<()> {
    if !sample.t.is_finite() {
        return Err(Error::Validation {
            line,
            channel: "t".into(),
            value: sample.t,
        });
    }
    for (idx, v) in sample.channels() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Validation {
                line,
                channel: channel_name(idx).into(),
                value: v,
            });
        }
    }
    Ok(())
}

fn finish_trial(samples: Vec<GcfSample>, subject_id: &str, trial_id: &str) -> Result<Trial> {
    if samples.is_empty() {
        return Err(Error::EmptyInput(format!(
            "trial `{trial_id}` has no samples"
        )));
    }
    let sampling_rate = infer_sampling_rate(&samples);
    Ok(Trial {
        subject_id: subject_id.to_string(),
        trial_id: trial_id.to_string(),
        sampling_rate,
        samples,
    })
}

/// Parse a trial from CSV with header [`TRIAL_HEADER`].
///
/// Samples keep file order. The sampling rate is inferred from the median
/// timestamp delta (20 Hz for a single-sample trial).
pub fn parse_trial<R: Read>(reader: R, subject_id: &str, trial_id: &str) -> Result<Trial> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(Error::EmptyInput(format!("trial `{trial_id}` is empty"))),
        Some(h) => h?,
    };
    if header.iter().ne(TRIAL_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", TRIAL_HEADER.join(",")),
        });
    }

    let mut samples = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != TRIAL_HEADER.len() {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected {} fields, found {}",
                    TRIAL_HEADER.len(),
                    record.len()
                ),
            });
        }
        let mut values = [0.0; 9];
        for (i, field) in record.iter().enumerate() {
            values[i] = field.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("field `{}` is not a number: `{field}`", TRIAL_HEADER[i]),
            })?;
        }
        let sample = GcfSample {
            t: values[0],
            left: [values[1], values[2], values[3], values[4]],
            right: [values[5], values[6], values[7], values[8]],
        };
        check_sample(&sample, line)?;
        samples.push(sample);
    }
    finish_trial(samples, subject_id, trial_id)
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRow {
    t: f64,
    l_toe: f64,
    l_m12: f64,
    l_m45: f64,
    l_heel: f64,
    r_toe: f64,
    r_m12: f64,
    r_m45: f64,
    r_heel: f64,
}

/// Parse a trial from JSON lines, one object per sample with the CSV column names.
pub fn parse_trial_jsonl<R: BufRead>(reader: R, subject_id: &str, trial_id: &str) -> Result<Trial> {
    let mut samples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonRow = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let sample = GcfSample {
            t: row.t,
            left: [row.l_toe, row.l_m12, row.l_m45, row.l_heel],
            right: [row.r_toe, row.r_m12, row.r_m45, row.r_heel],
        };
        check_sample(&sample, line_no)?;
        samples.push(sample);
    }
    finish_trial(samples, subject_id, trial_id)
}

/// Write a trial as CSV with six decimal digits per value.
pub fn write_trial_csv<W: Write>(trial: &Trial, mut out: W) -> Result<()> {
    writeln!(out, "{}", TRIAL_HEADER.join(","))?;
    for s in &trial.samples {
        write!(out, "{:.6}", s.t)?;
        for v in s.left.iter().chain(s.right.iter()) {
            write!(out, ",{v:.6}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Divide every force channel by the subject's body weight.
pub fn normalize_by_weight(trial: &Trial, subject: &Subject) -> Result<Trial> {
    let w = subject.body_weight;
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::domain(format!(
            "body weight must be positive, got {w}"
        )));
    }
    let samples = trial
        .samples
        .iter()
        .map(|s| GcfSample {
            t: s.t,
            left: s.left.map(|v| v / w),
            right: s.right.map(|v| v / w),
        })
        .collect();
    Ok(Trial {
        samples,
        ..trial.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    Empty,
    NonFinite,
    Negative,
    NonMonotonic,
    Spacing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub index: Option<usize>,
    pub message: String,
}

/// Check every [`Trial`] invariant, reporting violations as data.
pub fn validate_trial(trial: &Trial) -> Vec<Issue> {
    let mut issues = Vec::new();
    if trial.samples.is_empty() {
        issues.push(Issue {
            kind: IssueKind::Empty,
            index: None,
            message: "trial has no samples".into(),
        });
        return issues;
    }
    for (i, s) in trial.samples.iter().enumerate() {
        if !s.t.is_finite() {
            issues.push(Issue {
                kind: IssueKind::NonFinite,
                index: Some(i),
                message: format!("timestamp is {}", s.t),
            });
        }
        for (c, v) in s.channels() {
            if !v.is_finite() {
                issues.push(Issue {
                    kind: IssueKind::NonFinite,
                    index: Some(i),
                    message: format!("channel {} is {v}", channel_name(c)),
                });
            } else if v < 0.0 {
                issues.push(Issue {
                    kind: IssueKind::Negative,
                    index: Some(i),
                    message: format!("channel {} is negative ({v})", channel_name(c)),
                });
            }
        }
    }
    let expected = 1.0 / trial.sampling_rate;
    for (i, w) in trial.samples.windows(2).enumerate() {
        let dt = w[1].t - w[0].t;
        if !dt.is_finite() {
            continue;
        }
        if dt <= 0.0 {
            issues.push(Issue {
                kind: IssueKind::NonMonotonic,
                index: Some(i + 1),
                message: format!("timestamp {} does not follow {}", w[1].t, w[0].t),
            });
        } else if (dt - expected).abs() > SPACING_TOLERANCE * expected {
            issues.push(Issue {
                kind: IssueKind::Spacing,
                index: Some(i + 1),
                message: format!("spacing {dt} deviates from 1/{} s", trial.sampling_rate),
            });
        }
    }
    issues
}

/// Subject metadata CSV header.
pub const SUBJECT_HEADER: [&str; 4] = ["id", "group", "body_weight", "age"];

pub fn read_subjects<R: Read>(reader: R) -> Result<Vec<Subject>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(SUBJECT_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", SUBJECT_HEADER.join(",")),
        });
    }
    let mut subjects = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse { line, message };
        let group: Group = record[1]
            .parse()
            .map_err(|e: Error| parse_err(e.to_string()))?;
        let weight: f64 = record[2]
            .parse()
            .map_err(|_| parse_err(format!("bad body_weight `{}`", &record[2])))?;
        let age = match record.get(3).map(str::trim) {
            None | Some("") => None,
            Some(a) => Some(
                a.parse::<f64>()
                    .map_err(|_| parse_err(format!("bad age `{a}`")))?,
            ),
        };
        let subject = Subject::new(&record[0], group, weight, age)
            .map_err(|e| parse_err(e.to_string()))?;
        subjects.push(subject);
    }
    Ok(subjects)
}

pub fn write_subjects<W: Write>(subjects: &[Subject], mut out: W) -> Result<()> {
    writeln!(out, "{}", SUBJECT_HEADER.join(","))?;
    for s in subjects {
        let age = s.age.map(|a| a.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", s.id, s.group, s.body_weight, age)?;
    }
    Ok(())
}
