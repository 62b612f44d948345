//! Blow-up rescaling `f_j(x) = f(x0 + r_j x) / sqrt(H_{x0}(r_j) / r_j)`, the
//! per-step chain of estimates along a blow-up sequence, and the
//! frequency-gap scan over branch points.
//!
//! With this normalizer `H_{0, f_j}(1) = 1` and `D_{0, f_j}(1) = N_{x0}(r_j)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FieldSpec, Point};
use crate::functionals::{dirichlet_energy, frequency, height, QuadratureSettings, HEIGHT_FLOOR};
use crate::oscillation::{boundary_trace, courant_lebesgue_radius, OscillationSettings};
use crate::qspace::g_metric;
use crate::quadrature::DiskGrid;
use crate::report::{anchors, fmt_f64, CheckRow, GridMeta, VerificationReport};

type Field = FieldSpec<f64>;

/// Outer radius of the Courant-Lebesgue step on the rescaled field.
pub const BLOWUP_CL_RADIUS: f64 = 0.8;
/// Radii at which scale invariance of the frequency is checked.
pub const SCALE_PROBES: [f64; 3] = [0.25, 0.5, 1.0];
/// Tolerance for the unit-height, unit-energy and scale-invariance rows.
pub const BLOWUP_TOL: f64 = 1e-8;
/// Radius at which the frequency of a branch point is sampled.
pub const GAP_RADIUS: f64 = 1e-3;
/// Collapse tolerance for the branch-point precondition, relative to the
/// field's size on the unit circle around the point.
pub const COLLAPSE_TOL: f64 = 1e-10;

/// `x -> f(x0 + r x) / sqrt(H_{x0}(r) / r)`.
pub fn rescale(base: &Field, x0: Point<f64>, r: f64, grid: DiskGrid) -> Result<Field> {
    let h = height(base, x0, r, grid.angular)?;
    if !(h > HEIGHT_FLOOR) {
        return Err(Error::DegenerateHeight { height: h });
    }
    base.dilated_about(x0, r, (h / r).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupSequence {
    pub base: Field,
    pub x0: Point<f64>,
    pub radii: Vec<f64>,
    /// `H_{x0}(r_j)` per step.
    pub normalizers: Vec<f64>,
}

impl BlowupSequence {
    pub fn new(base: Field, x0: Point<f64>, radii: Vec<f64>, grid: DiskGrid) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Parameter("a blow-up sequence needs at least one radius".into()));
        }
        if radii.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::Parameter("blow-up radii must be positive and finite".into()));
        }
        if radii.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Parameter("blow-up radii must be strictly decreasing".into()));
        }
        let mut normalizers = Vec::with_capacity(radii.len());
        for &r in &radii {
            let h = height(&base, x0, r, grid.angular)?;
            if !(h > HEIGHT_FLOOR) {
                return Err(Error::DegenerateHeight { height: h });
            }
            normalizers.push(h);
        }
        Ok(Self { base, x0, radii, normalizers })
    }

    /// `r_j = 1 / j` for `j = first..first + steps`.
    pub fn harmonic(base: Field, x0: Point<f64>, first: usize, steps: usize, grid: DiskGrid) -> Result<Self> {
        if first == 0 || steps == 0 {
            return Err(Error::Parameter("blow-up indices start at 1 and need at least one step".into()));
        }
        let radii = (first..first + steps).map(|j| 1.0 / j as f64).collect();
        Self::new(base, x0, radii, grid)
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// The rescaled field of step `j` (zero-based).
    pub fn field(&self, j: usize) -> Result<Field> {
        let r = self.radii[j];
        self.base.dilated_about(self.x0, r, (self.normalizers[j] / r).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct BlowupSettings {
    pub grid: DiskGrid,
    pub oscillation: OscillationSettings,
}


/// Measurements at one step of a blow-up sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupStep {
    pub j: usize,
    pub r_j: f64,
    /// `H_{0, f_j}(1)`.
    pub height_one: f64,
    /// `D_{0, f_j}(1)`.
    pub energy_one: f64,
    /// `N_{x0, f}(r_j)`.
    pub base_frequency: f64,
    pub r0: f64,
    pub osc: f64,
    pub osc_bound: f64,
    /// `H_{0, f_j}(r0)`.
    pub height_r0: f64,
    /// `r0 * r0^(2 N_{0, f_j}(1))`.
    pub height_lower: f64,
    /// `min_{x in dU_r0} G(f_j(0), f_j(x))`.
    pub center_gap: f64,
    /// Largest relative gap between `N_{0, f_j}(rho)` and `N_{x0, f}(r_j rho)`.
    pub scale_invariance_err: f64,
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// Evaluate every step of the sequence.
pub fn blowup_steps(seq: &BlowupSequence, settings: &BlowupSettings) -> Result<Vec<BlowupStep>> {
    let quad = QuadratureSettings::with_grid(settings.grid);
    let origin = [0.0, 0.0];
    let mut steps = Vec::with_capacity(seq.len());
    for (idx, &r_j) in seq.radii.iter().enumerate() {
        let f_j = seq.field(idx)?;
        let height_one = height(&f_j, origin, 1.0, settings.grid.angular)?;
        let energy_one = dirichlet_energy(&f_j, origin, 1.0, &quad)?;
        let base_frequency = r_j * dirichlet_energy(&seq.base, seq.x0, r_j, &quad)? / seq.normalizers[idx];

        let mut scale_invariance_err = 0.0f64;
        for rho in SCALE_PROBES {
            let rescaled = frequency(&f_j, origin, rho, &quad)?;
            let original = frequency(&seq.base, seq.x0, r_j * rho, &quad)?;
            scale_invariance_err = scale_invariance_err.max(rel_err(rescaled, original));
        }

        let cl = courant_lebesgue_radius(&f_j, origin, BLOWUP_CL_RADIUS, &settings.oscillation)?;
        let height_r0 = height(&f_j, origin, cl.r_star, settings.grid.angular)?;
        let n_one = energy_one / height_one;
        let height_lower = cl.r_star * cl.r_star.powf(2.0 * n_one);
        let center = f_j.eval(origin);
        let mut center_gap = f64::INFINITY;
        for x in boundary_trace(&f_j, origin, cl.r_star, settings.oscillation.samples)? {
            center_gap = center_gap.min(g_metric(&center, &x)?);
        }

        steps.push(BlowupStep {
            j: idx + 1,
            r_j,
            height_one,
            energy_one,
            base_frequency,
            r0: cl.r_star,
            osc: cl.osc,
            osc_bound: cl.bound,
            height_r0,
            height_lower,
            center_gap,
            scale_invariance_err,
        });
    }
    Ok(steps)
}

/// Report rows for a sequence, one block per step.
pub fn blowup_report(seq: &BlowupSequence, settings: &BlowupSettings) -> Result<(VerificationReport, Vec<BlowupStep>)> {
    let steps = blowup_steps(seq, settings)?;
    let mut meta = GridMeta::from(settings.grid);
    meta.boundary_samples = Some(settings.oscillation.samples);
    let mut rep = VerificationReport::new("blowup", meta);
    for s in &steps {
        let label = format!("j={} r={:?}", s.j, s.r_j);
        rep.push(CheckRow::at_most(label.clone(), anchors::BLOWUP_UNIT_HEIGHT, (s.height_one - 1.0).abs(), BLOWUP_TOL)
            .with_note(format!("H(1)={:?}", s.height_one)));
        rep.push(
            CheckRow::at_most(label.clone(), anchors::BLOWUP_UNIT_ENERGY, rel_err(s.energy_one, s.base_frequency), BLOWUP_TOL)
                .with_note(format!("D(1)={:?} N(r_j)={:?}", s.energy_one, s.base_frequency)),
        );
        rep.push(
            CheckRow::at_most(label.clone(), anchors::BLOWUP_OSCILLATION, s.osc, s.osc_bound)
                .with_note(format!("r0={:?}", s.r0)),
        );
        rep.push(
            CheckRow::at_least(label.clone(), anchors::BLOWUP_HEIGHT_LOWER, s.height_r0, s.height_lower * (1.0 - 1e-6))
                .with_note(format!("lower bound exceeds 1/2: {}", s.height_lower > 0.5)),
        );
        rep.push(
            CheckRow::info(label.clone(), anchors::BLOWUP_CENTER_GAP, s.center_gap)
                .with_note(format!("osc={:?} H(r0)={:?}", s.osc, s.height_r0)),
        );
        rep.push(CheckRow::at_most(label, anchors::BLOWUP_SCALE_INVARIANCE, s.scale_invariance_err, BLOWUP_TOL));
    }
    Ok((rep, steps))
}

/// Per-step table with header `j,r_j,H(1),D(1),r0,osc,H(r0),gap`.
pub fn steps_to_csv(steps: &[BlowupStep]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Parameter(format!("csv: {e}"));
    w.write_record(["j", "r_j", "H(1)", "D(1)", "r0", "osc", "H(r0)", "gap"]).map_err(io)?;
    for s in steps {
        w.write_record([
            s.j.to_string(),
            fmt_f64(s.r_j),
            fmt_f64(s.height_one),
            fmt_f64(s.energy_one),
            fmt_f64(s.r0),
            fmt_f64(s.osc),
            fmt_f64(s.height_r0),
            fmt_f64(s.center_gap),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parameter(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// A field and the points claimed to be branch points of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub label: String,
    pub field: Field,
    pub points: Vec<Point<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub label: String,
    pub point: Point<f64>,
    /// Small-radius frequency; `None` when the precondition failed.
    pub frequency: Option<f64>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGap {
    /// Minimum frequency over rows that met the precondition.
    pub delta_hat: Option<f64>,
    pub radius: f64,
    pub rows: Vec<GapRow>,
}

impl FrequencyGap {
    pub fn report(&self, grid: DiskGrid) -> VerificationReport {
        let mut rep = VerificationReport::new("scan", grid.into());
        for row in &self.rows {
            let label = format!("{} at ({:?}, {:?})", row.label, row.point[0], row.point[1]);
            let r = match (row.frequency, &row.flag) {
                (Some(n), _) => CheckRow::info(label, anchors::FREQUENCY_GAP, n),
                (None, flag) => CheckRow::info(label, anchors::FREQUENCY_GAP, f64::NAN)
                    .with_pass(false)
                    .with_note(flag.clone().unwrap_or_default()),
            };
            rep.push(r);
        }
        let min = self.delta_hat.unwrap_or(f64::NAN);
        rep.push(CheckRow::at_least("delta_hat", anchors::FREQUENCY_GAP, min, 0.0).with_pass(min > 0.0));
        rep
    }

    /// Table with header `label,u,v,frequency,flag`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Parameter(format!("csv: {e}"));
        w.write_record(["label", "u", "v", "frequency", "flag"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.label.clone(),
                fmt_f64(r.point[0]),
                fmt_f64(r.point[1]),
                r.frequency.map(fmt_f64).unwrap_or_default(),
                r.flag.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parameter(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn branch_point_flag(field: &Field, x0: Point<f64>, grid: DiskGrid) -> Result<Option<String>> {
    if field.q() < 2 {
        return Ok(Some("a single-valued field has no branch points".into()));
    }
    let value = field.eval(x0);
    let scale = height(field, x0, GAP_RADIUS, grid.angular)?.sqrt().max(f64::MIN_POSITIVE);
    let spread = value.spread();
    if spread > COLLAPSE_TOL * scale.max(1.0) {
        let sep = value.separation();
        return Ok(Some(if sep > 0.0 {
            format!("not a branch point: sheet separation {sep:?}")
        } else {
            format!("sheets do not fully collapse: spread {spread:?}")
        }));
    }
    Ok(None)
}

/// Frequency at radius [`GAP_RADIUS`] of every listed branch point, after
/// subtracting the collapsed value, and their minimum.
pub fn frequency_gap_scan(corpus: &[GapEntry], grid: DiskGrid) -> Result<FrequencyGap> {
    if corpus.iter().all(|e| e.points.is_empty()) {
        return Err(Error::Parameter("the frequency-gap corpus lists no branch points".into()));
    }
    let quad = QuadratureSettings::with_grid(grid);
    let mut rows = Vec::new();
    for entry in corpus {
        for &x0 in &entry.points {
            let flag = branch_point_flag(&entry.field, x0, grid)?;
            let frequency = match flag {
                Some(_) => None,
                None => {
                    let value = entry.field.eval(x0);
                    let shifted = entry.field.subtract_constant(value.point(0))?;
                    Some(frequency(&shifted, x0, GAP_RADIUS, &quad)?)
                }
            };
            rows.push(GapRow { label: entry.label.clone(), point: x0, frequency, flag });
        }
    }
    let delta_hat = rows.iter().filter_map(|r| r.frequency).reduce(f64::min);
    Ok(FrequencyGap { delta_hat, radius: GAP_RADIUS, rows })
}
