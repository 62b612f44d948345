//! Boundary oscillation of a Q-valued field, the Courant-Lebesgue radius
//! selection, and the empirical constant `delta` of the key-lemma estimate
//!
//! `inf_{x in dU_r(w)} G(f(x), f(w*)) <= sqrt((Dir(F; U_r) + Dir(h; U_r)) / (2 pi delta))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FieldSpec, Point};
use crate::functionals::{dirichlet_energy, radial_rule_for, QuadratureSettings};
use crate::hopf::{conformal_completion, fit_phi_series, ConformalCompletion, HopfSettings, Window};
use crate::qspace::{g_metric, xi0, QPoint};
use crate::quadrature::{integrate_disk, DiskGrid};
use crate::report::{anchors, CheckRow};

type Field = FieldSpec<f64>;

/// Default number of boundary samples.
pub const BOUNDARY_SAMPLES: usize = 512;
/// Sample count of the dense oscillation oracle.
pub const ORACLE_SAMPLES: usize = 4096;
/// Radii scanned in `[R/2, R]`.
pub const RADIUS_SCAN: usize = 64;
/// `lhs` below this makes the key-lemma estimate vacuous.
pub const DEGENERATE_LHS: f64 = 1e-14;

/// `C = sqrt(2 pi / log 2)`.
pub fn courant_lebesgue_constant() -> f64 {
    (std::f64::consts::TAU / std::f64::consts::LN_2).sqrt()
}

/// Field values at `samples` equally spaced points of `dU_r(center)`.
pub fn boundary_trace(spec: &Field, center: Point<f64>, r: f64, samples: usize) -> Result<Vec<QPoint<f64>>> {
    if samples == 0 {
        return Err(Error::Parameter("boundary sampling needs at least one node".into()));
    }
    spec.check_disk(center, r)?;
    Ok((0..samples)
        .map(|j| {
            let t = j as f64 * std::f64::consts::TAU / samples as f64;
            spec.eval([center[0] + r * t.cos(), center[1] + r * t.sin()])
        })
        .collect())
}

/// Diameter of a set of Q-points in the matching metric. Pairs are skipped
/// when the identity matching of the sorted representatives (an upper bound)
/// cannot beat the current maximum.
pub fn trace_diameter(trace: &[QPoint<f64>]) -> Result<f64> {
    let mut best_sq = 0.0f64;
    for (i, a) in trace.iter().enumerate() {
        for b in &trace[i + 1..] {
            let upper_sq: f64 = a.as_flat().iter().zip(b.as_flat()).map(|(x, y)| (x - y) * (x - y)).sum();
            if upper_sq <= best_sq {
                continue;
            }
            if a.q() == 1 {
                best_sq = upper_sq;
                continue;
            }
            let d = g_metric(a, b)?;
            best_sq = best_sq.max(d * d);
        }
    }
    Ok(best_sq.sqrt())
}

/// `osc_{dU_r(center)} f` at the default sample count.
pub fn boundary_oscillation(spec: &Field, center: Point<f64>, r: f64) -> Result<f64> {
    boundary_oscillation_with(spec, center, r, BOUNDARY_SAMPLES)
}

pub fn boundary_oscillation_with(spec: &Field, center: Point<f64>, r: f64, samples: usize) -> Result<f64> {
    trace_diameter(&boundary_trace(spec, center, r, samples)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationSettings {
    pub samples: usize,
    pub scan: usize,
    pub grid: DiskGrid,
}

impl Default for OscillationSettings {
    fn default() -> Self {
        Self { samples: BOUNDARY_SAMPLES, scan: RADIUS_SCAN, grid: DiskGrid::default() }
    }
}

/// Result of the radius scan in `[R/2, R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CourantLebesgue {
    pub r_star: f64,
    pub osc: f64,
    pub bound: f64,
    /// `Dir(F; U_R(w0))`.
    pub energy: f64,
    pub pass: bool,
}

impl CourantLebesgue {
    pub fn row(&self, label: &str) -> CheckRow {
        CheckRow::at_most(label, anchors::COURANT_LEBESGUE, self.osc, self.bound)
            .with_note(format!("r*={:?}", self.r_star))
    }
}

/// Radius in `[R/2, R]` of least boundary oscillation (smallest radius on
/// ties) and the bound `C sqrt(Dir(F; U_R(w0)))`.
pub fn courant_lebesgue_radius(spec: &Field, w0: Point<f64>, big_r: f64, settings: &OscillationSettings) -> Result<CourantLebesgue> {
    if !(big_r > 0.0) {
        return Err(Error::Parameter(format!("radius must be positive, got {big_r}")));
    }
    if settings.scan < 2 {
        return Err(Error::Parameter("the radius scan needs at least two nodes".into()));
    }
    spec.check_disk(w0, big_r)?;
    let energy = dirichlet_energy(spec, w0, big_r, &QuadratureSettings::with_grid(settings.grid))?;
    let (mut r_star, mut osc) = (f64::NAN, f64::INFINITY);
    for i in 0..settings.scan {
        let r = big_r / 2.0 + big_r / 2.0 * i as f64 / (settings.scan - 1) as f64;
        let o = boundary_oscillation_with(spec, w0, r, settings.samples)?;
        if o < osc {
            osc = o;
            r_star = r;
        }
    }
    let bound = courant_lebesgue_constant() * energy.sqrt();
    Ok(CourantLebesgue { r_star, osc, bound, energy, pass: osc <= bound })
}

/// The three key-lemma quantities on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyLemmaGap {
    pub lhs: f64,
    pub dir_f: f64,
    pub dir_h: f64,
    pub energy_sum: f64,
    /// `energy_sum / (2 pi lhs^2)`; `None` when the instance is degenerate.
    pub delta_hat: Option<f64>,
    pub degenerate: bool,
}

impl KeyLemmaGap {
    pub fn row(&self, label: &str) -> CheckRow {
        match self.delta_hat {
            Some(d) => CheckRow::at_least(label, anchors::KEY_LEMMA, d, 0.0)
                .with_pass(d > 0.0 && d.is_finite())
                .with_note(format!("lhs={:?} energy_sum={:?}", self.lhs, self.energy_sum)),
            None => CheckRow::info(label, anchors::KEY_LEMMA, self.lhs).with_note("degenerate: estimate vacuous"),
        }
    }
}

/// Key-lemma quantities with the completion built on the window `U_r(w)`.
/// A field with zero energy there is reported as degenerate.
pub fn key_lemma_gap(spec: &Field, w: Point<f64>, r: f64, w_star: Point<f64>, settings: &OscillationSettings) -> Result<KeyLemmaGap> {
    let window = Window::new(w, r)?;
    let hopf = HopfSettings { grid: settings.grid, ..HopfSettings::default() };
    let pkg = fit_phi_series(spec, window, &hopf)?;
    match conformal_completion(&pkg) {
        Ok(c) => key_lemma_gap_with(spec, &c.with_analytic_phi(spec), w, r, w_star, settings),
        Err(Error::DegenerateEnergy { .. }) => {
            let lhs = key_lemma_lhs(spec, w, r, w_star, settings.samples)?;
            Ok(KeyLemmaGap { lhs, dir_f: 0.0, dir_h: 0.0, energy_sum: 0.0, delta_hat: None, degenerate: true })
        }
        Err(e) => Err(e),
    }
}

fn key_lemma_lhs(spec: &Field, w: Point<f64>, r: f64, w_star: Point<f64>, samples: usize) -> Result<f64> {
    let target = spec.eval(w_star);
    let mut lhs = f64::INFINITY;
    for x in boundary_trace(spec, w, r, samples)? {
        lhs = lhs.min(g_metric(&x, &target)?);
    }
    Ok(lhs)
}

/// Key-lemma quantities against a completion built on any window that
/// contains `U_r(w)`.
pub fn key_lemma_gap_with(
    spec: &Field,
    completion: &ConformalCompletion,
    w: Point<f64>,
    r: f64,
    w_star: Point<f64>,
    settings: &OscillationSettings,
) -> Result<KeyLemmaGap> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("radius must be positive, got {r}")));
    }
    let off = ((w_star[0] - w[0]).powi(2) + (w_star[1] - w[1]).powi(2)).sqrt();
    if off >= r {
        return Err(Error::Parameter(format!("w* lies {off} from w, outside U_{r}(w)")));
    }
    let win = completion.window();
    let reach = ((w[0] - win.center[0]).powi(2) + (w[1] - win.center[1]).powi(2)).sqrt() + r;
    if reach > win.radius * (1.0 + 1e-12) {
        return Err(Error::Parameter(format!(
            "U_{r}(w) is not contained in the completion window of radius {}",
            win.radius
        )));
    }
    let lhs = key_lemma_lhs(spec, w, r, w_star, settings.samples)?;
    let dir_f = dirichlet_energy(spec, w, r, &QuadratureSettings::with_grid(settings.grid))?;
    let mut grad_h = |z: Point<f64>| completion.grad_sq(z);
    let rule = radial_rule_for(spec, w, r, settings.grid.angular, &mut grad_h)?;
    let dir_h = integrate_disk(w, r, settings.grid, rule, &mut grad_h)?;
    let energy_sum = dir_f + dir_h;
    let degenerate = lhs < DEGENERATE_LHS;
    let delta_hat = (!degenerate).then(|| energy_sum / (std::f64::consts::TAU * lhs * lhs));
    Ok(KeyLemmaGap { lhs, dir_f, dir_h, energy_sum, delta_hat, degenerate })
}

/// `xi0` images of a boundary trace, for callers plotting single-valued
/// representatives.
pub fn embedded_trace(trace: &[QPoint<f64>]) -> Vec<Vec<f64>> {
    trace.iter().map(xi0).collect()
}
