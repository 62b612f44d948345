//! Structured pass/fail records shared by every verification suite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::DiskGrid;

pub const REPORT_SCHEMA: &str = "qfreq.report/1";

/// Anchor strings naming the inequality or identity a row checks. Each one is
/// documented in `docs/equation-index.md`.
pub mod anchors {
    pub const HEIGHT_BOUND_LOWER: &str = "height-bound:lower";
    pub const HEIGHT_BOUND_UPPER: &str = "height-bound:upper";
    pub const FREQUENCY_MONOTONE: &str = "frequency:monotone";
    pub const HOLDER_EXPONENT: &str = "frequency:holder-exponent";
    pub const HOPF_HOLOMORPHY: &str = "hopf:holomorphy";
    pub const HOPF_SERIES_FIT: &str = "hopf:series-fit";
    pub const HOPF_POINTWISE_BOUND: &str = "hopf:pointwise-bound";
    pub const COMPLETION_GRADIENT: &str = "completion:gradient-identity";
    pub const COMPLETION_ENERGY: &str = "completion:energy-identity";
    pub const COMPLETION_CONFORMAL: &str = "completion:augmented-conformality";
    pub const COMPLETION_ENERGY_RATIO: &str = "completion:energy-ratio";
    pub const COURANT_LEBESGUE: &str = "courant-lebesgue";
    pub const KEY_LEMMA: &str = "key-lemma:oscillation";
    pub const BLOWUP_UNIT_HEIGHT: &str = "blowup:unit-height";
    pub const BLOWUP_UNIT_ENERGY: &str = "blowup:unit-energy";
    pub const BLOWUP_OSCILLATION: &str = "blowup:oscillation";
    pub const BLOWUP_HEIGHT_LOWER: &str = "blowup:height-lower";
    pub const BLOWUP_CENTER_GAP: &str = "blowup:center-gap";
    pub const BLOWUP_SCALE_INVARIANCE: &str = "blowup:frequency-scale-invariance";
    pub const FREQUENCY_GAP: &str = "frequency-gap";

    pub const ALL: &[&str] = &[
        HEIGHT_BOUND_LOWER,
        HEIGHT_BOUND_UPPER,
        FREQUENCY_MONOTONE,
        HOLDER_EXPONENT,
        HOPF_HOLOMORPHY,
        HOPF_SERIES_FIT,
        HOPF_POINTWISE_BOUND,
        COMPLETION_GRADIENT,
        COMPLETION_ENERGY,
        COMPLETION_CONFORMAL,
        COMPLETION_ENERGY_RATIO,
        COURANT_LEBESGUE,
        KEY_LEMMA,
        BLOWUP_UNIT_HEIGHT,
        BLOWUP_UNIT_ENERGY,
        BLOWUP_OSCILLATION,
        BLOWUP_HEIGHT_LOWER,
        BLOWUP_CENTER_GAP,
        BLOWUP_SCALE_INVARIANCE,
        FREQUENCY_GAP,
    ];
}

/// Discretization parameters recorded alongside every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub angular: usize,
    pub radial: usize,
    #[serde(default)]
    pub boundary_samples: Option<usize>,
    #[serde(default)]
    pub series_order: Option<usize>,
    #[serde(default)]
    pub fd_step: Option<f64>,
}

impl From<DiskGrid> for GridMeta {
    fn from(g: DiskGrid) -> Self {
        Self { angular: g.angular, radial: g.radial, boundary_samples: None, series_order: None, fd_step: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub anchor: String,
    /// Written as `null` when not a number.
    #[serde(deserialize_with = "nan_from_null")]
    pub measured: f64,
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    pub pass: bool,
    #[serde(default)]
    pub note: Option<String>,
}

impl CheckRow {
    /// `measured <= bound`, slack `bound - measured`.
    pub fn at_most(check: impl Into<String>, anchor: &str, measured: f64, bound: f64) -> Self {
        let slack = bound - measured;
        Self {
            check: check.into(),
            anchor: anchor.into(),
            measured,
            bound: Some(bound),
            slack: Some(slack),
            pass: slack >= 0.0,
            note: None,
        }
    }

    /// `measured >= bound`, slack `measured - bound`.
    pub fn at_least(check: impl Into<String>, anchor: &str, measured: f64, bound: f64) -> Self {
        let slack = measured - bound;
        Self {
            check: check.into(),
            anchor: anchor.into(),
            measured,
            bound: Some(bound),
            slack: Some(slack),
            pass: slack >= 0.0,
            note: None,
        }
    }

    /// A measurement with no pass criterion attached.
    pub fn info(check: impl Into<String>, anchor: &str, measured: f64) -> Self {
        Self {
            check: check.into(),
            anchor: anchor.into(),
            measured,
            bound: None,
            slack: None,
            pass: true,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub suite: String,
    pub tool_version: String,
    pub grid: GridMeta,
    pub rows: Vec<CheckRow>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, grid: GridMeta) -> Self {
        Self {
            schema: REPORT_SCHEMA.into(),
            suite: suite.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            grid,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.rows.extend(other.rows);
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn rows_for<'a>(&'a self, anchor: &'a str) -> impl Iterator<Item = &'a CheckRow> + 'a {
        self.rows.iter().filter(move |r| r.anchor == anchor)
    }

    /// Rows as CSV with header `check,anchor,measured,bound,slack,pass,note`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Parameter(format!("csv: {e}"));
        w.write_record(["check", "anchor", "measured", "bound", "slack", "pass", "note"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.check.clone(),
                r.anchor.clone(),
                fmt_f64(r.measured),
                r.bound.map(fmt_f64).unwrap_or_default(),
                r.slack.map(fmt_f64).unwrap_or_default(),
                r.pass.to_string(),
                r.note.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parameter(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Shortest round-trip representation; identical across runs.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
