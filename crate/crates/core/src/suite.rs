//! The full inequality suite over a corpus: profiles and height bounds,
//! Hopf and completion identities, Courant-Lebesgue and key-lemma rows.

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusEntry, Probe};
use crate::error::{Error, Result};
use crate::families::Point;
use crate::functionals::{
    check_height_bound, estimate_holder_exponent, is_singular_at, radial_profile_with_tol, GradientSource,
    QuadratureSettings, RadialProfile,
};
use crate::hopf::{
    conformal_completion, conformality_defect, energy_identity_check, fit_phi_series, holomorphy_defect, HopfSettings,
    Window,
};
use crate::oscillation::{courant_lebesgue_radius, key_lemma_gap_with, OscillationSettings};
use crate::quadrature::DiskGrid;
use crate::report::{anchors, CheckRow, GridMeta, VerificationReport};

/// Named tolerances; each can be overridden by name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub monotonicity: f64,
    pub height_bound: f64,
    pub holomorphy: f64,
    pub gradient_identity: f64,
    pub energy_identity: f64,
    pub energy_identity_sampled: f64,
    pub conformality: f64,
    pub blowup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            monotonicity: 1e-6,
            height_bound: 1e-6,
            holomorphy: 1e-6,
            gradient_identity: 1e-8,
            energy_identity: 1e-8,
            energy_identity_sampled: 1e-4,
            conformality: 1e-6,
            blowup: 1e-8,
        }
    }
}

impl Tolerances {
    pub const NAMES: &'static [&'static str] = &[
        "monotonicity",
        "height_bound",
        "holomorphy",
        "gradient_identity",
        "energy_identity",
        "energy_identity_sampled",
        "conformality",
        "blowup",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::Parameter(format!("tolerance {name} must be a non-negative number, got {value}")));
        }
        let slot = match name {
            "monotonicity" => &mut self.monotonicity,
            "height_bound" => &mut self.height_bound,
            "holomorphy" => &mut self.holomorphy,
            "gradient_identity" => &mut self.gradient_identity,
            "energy_identity" => &mut self.energy_identity,
            "energy_identity_sampled" => &mut self.energy_identity_sampled,
            "conformality" => &mut self.conformality,
            "blowup" => &mut self.blowup,
            other => {
                return Err(Error::Parameter(format!(
                    "unknown tolerance {other:?}; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteSettings {
    pub grid: DiskGrid,
    pub series_order: usize,
    pub boundary_samples: usize,
    pub radius_scan: usize,
    /// Relative finite-difference step for the holomorphy defect.
    pub fd_step: f64,
    pub tol: Tolerances,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        let osc = OscillationSettings::default();
        Self {
            grid: DiskGrid::default(),
            series_order: HopfSettings::default().series_order,
            boundary_samples: osc.samples,
            radius_scan: osc.scan,
            fd_step: 1e-4,
            tol: Tolerances::default(),
        }
    }
}

impl SuiteSettings {
    pub fn quadrature(&self) -> QuadratureSettings<f64> {
        QuadratureSettings::with_grid(self.grid)
    }

    pub fn hopf(&self) -> HopfSettings {
        HopfSettings { series_order: self.series_order, grid: self.grid, ..HopfSettings::default() }
    }

    pub fn oscillation(&self) -> OscillationSettings {
        OscillationSettings { samples: self.boundary_samples, scan: self.radius_scan, grid: self.grid }
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta {
            angular: self.grid.angular,
            radial: self.grid.radial,
            boundary_samples: Some(self.boundary_samples),
            series_order: Some(self.series_order),
            fd_step: Some(self.fd_step),
        }
    }
}

fn probe_label(entry: &CorpusEntry, p: &Probe) -> String {
    format!("{} @ ({:?}, {:?})", entry.label, p.center[0], p.center[1])
}

/// Profile about one probe with its monotonicity, height-bound and (at a
/// singular center) Hölder rows.
pub fn profile_checks(entry: &CorpusEntry, probe: &Probe, settings: &SuiteSettings) -> Result<(RadialProfile<f64>, Vec<CheckRow>)> {
    let label = probe_label(entry, probe);
    let radii = probe.radii()?;
    let profile = radial_profile_with_tol(&entry.field, probe.center, &radii, &settings.quadrature(), settings.tol.monotonicity)?;
    let mut rows = vec![CheckRow::at_most(label.clone(), anchors::FREQUENCY_MONOTONE, profile.max_decrease(), settings.tol.monotonicity)
        .with_note(format!("{} radii in [{:?}, {:?}]", radii.len(), radii[0], probe.r_max))];
    let hb = check_height_bound(&profile, &profile.all_pairs(), settings.tol.height_bound)?;
    for anchor in [anchors::HEIGHT_BOUND_LOWER, anchors::HEIGHT_BOUND_UPPER] {
        let worst = hb.rows_for(anchor).map(|r| r.measured).fold(f64::INFINITY, f64::min);
        let pairs = hb.rows_for(anchor).count();
        rows.push(
            CheckRow::at_least(label.clone(), anchor, worst, -settings.tol.height_bound)
                .with_note(format!("worst relative slack over {pairs} pairs")),
        );
    }
    if is_singular_at(&entry.field, probe.center) {
        let est = estimate_holder_exponent(&profile)?;
        rows.push(
            CheckRow::at_least(label, anchors::HOLDER_EXPONENT, est.alpha, 0.0)
                .with_pass(est.alpha > 0.0)
                .with_note(format!("fit over {} radii, rms residual {:?}", est.points, est.residual)),
        );
    }
    Ok((profile, rows))
}

/// Nodes at which pointwise conformality is sampled: 8 radii by 16 angles
/// strictly inside the window, off its center.
pub fn conformality_nodes(window: Window) -> Vec<Point<f64>> {
    let mut out = Vec::with_capacity(128);
    for i in 1..=8 {
        let rho = window.radius * 0.9 * i as f64 / 8.0;
        for j in 0..16 {
            let t = (j as f64 + 0.5) * std::f64::consts::TAU / 16.0;
            out.push([window.center[0] + rho * t.cos(), window.center[1] + rho * t.sin()]);
        }
    }
    out
}

/// Hopf, completion and energy-ratio rows on the window of the entry's
/// first probe. Fields with zero energy there yield a single info row.
pub fn hopf_checks(entry: &CorpusEntry, settings: &SuiteSettings) -> Result<Vec<CheckRow>> {
    let probe = entry.probes[0];
    let window = Window::new(probe.center, probe.r_max)?;
    let label = probe_label(entry, &probe);
    let tol = settings.tol;
    let mut rows = Vec::new();

    let holo = holomorphy_defect(&entry.field, window, settings.fd_step * window.radius)?;
    rows.push(CheckRow::at_most(label.clone(), anchors::HOPF_HOLOMORPHY, holo, tol.holomorphy));

    let pkg = match fit_phi_series(&entry.field, window, &settings.hopf()) {
        Ok(p) => p,
        Err(Error::SeriesFit { residual, tolerance }) => {
            rows.push(CheckRow::at_most(label, anchors::HOPF_SERIES_FIT, residual, tolerance));
            return Ok(rows);
        }
        Err(e) => return Err(e),
    };
    rows.push(
        CheckRow::at_most(label.clone(), anchors::HOPF_SERIES_FIT, pkg.fit_residual, pkg.fit_tolerance)
            .with_note(format!("M={} max|phi|={:?}", settings.series_order, pkg.phi_scale)),
    );
    let series = match conformal_completion(&pkg) {
        Ok(c) => c,
        Err(Error::DegenerateEnergy { energy }) => {
            rows.push(CheckRow::info(label, anchors::COMPLETION_ENERGY_RATIO, energy).with_note("zero energy: no completion"));
            return Ok(rows);
        }
        Err(e) => return Err(e),
    };
    let analytic = series.clone().with_analytic_phi(&entry.field);

    for r in [window.radius / 2.0, window.radius] {
        let exact = energy_identity_check(&entry.field, &analytic, r, settings.grid)?;
        rows.extend(exact.rows(&format!("{label} analytic-phi"), tol.energy_identity));
        let sampled = energy_identity_check(&entry.field, &series, r, settings.grid)?;
        rows.push(CheckRow::at_most(
            format!("{label} sampled-phi r={r:?}"),
            anchors::COMPLETION_ENERGY,
            sampled.identity_rel_err,
            tol.energy_identity_sampled,
        ));
    }

    let mut worst = 0.0f64;
    for z in conformality_nodes(window) {
        worst = worst.max(conformality_defect(&entry.field, Some(&analytic), z, GradientSource::Analytic)?);
    }
    rows.push(CheckRow::at_most(label, anchors::COMPLETION_CONFORMAL, worst, tol.conformality));
    Ok(rows)
}

/// Courant-Lebesgue and key-lemma rows on the window of the entry's first
/// probe, with `w* = w`.
pub fn oscillation_checks(entry: &CorpusEntry, settings: &SuiteSettings) -> Result<Vec<CheckRow>> {
    let probe = entry.probes[0];
    let label = probe_label(entry, &probe);
    let osc = settings.oscillation();
    let cl = courant_lebesgue_radius(&entry.field, probe.center, probe.r_max, &osc)?;
    let mut rows = vec![cl.row(&label)];
    let window = Window::new(probe.center, probe.r_max)?;
    let pkg = fit_phi_series(&entry.field, window, &settings.hopf())?;
    match conformal_completion(&pkg) {
        Ok(c) => {
            let c = c.with_analytic_phi(&entry.field);
            let k = key_lemma_gap_with(&entry.field, &c, probe.center, probe.r_max, probe.center, &osc)?;
            rows.push(k.row(&label));
        }
        Err(Error::DegenerateEnergy { .. }) => {
            rows.push(CheckRow::info(label, anchors::KEY_LEMMA, 0.0).with_note("degenerate: zero energy"));
        }
        Err(e) => return Err(e),
    }
    Ok(rows)
}

/// Every check on every entry.
pub fn verify_corpus(corpus: &[CorpusEntry], settings: &SuiteSettings) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("verify", settings.meta());
    for entry in corpus {
        for probe in &entry.probes {
            let (_, rows) = profile_checks(entry, probe, settings)?;
            rows.into_iter().for_each(|r| rep.push(r));
        }
        hopf_checks(entry, settings)?.into_iter().for_each(|r| rep.push(r));
        oscillation_checks(entry, settings)?.into_iter().for_each(|r| rep.push(r));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{polynomial_phi_corpus, standard_corpus};

    fn quick() -> SuiteSettings {
        SuiteSettings {
            grid: DiskGrid::new(64, 64).unwrap(),
            boundary_samples: 64,
            radius_scan: 8,
            ..SuiteSettings::default()
        }
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("conformality", 1e-3).unwrap();
        assert_eq!(t.conformality, 1e-3);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("blowup", -1.0).is_err());
        assert_eq!(Tolerances::NAMES.len(), 8);
        for name in Tolerances::NAMES {
            t.set(name, 0.5).unwrap();
        }
    }

    #[test]
    fn suite_on_a_few_entries_passes() {
        let corpus = standard_corpus();
        let picked: Vec<_> = corpus.into_iter().filter(|e| ["branch(2,3)", "{z,z^2}"].contains(&e.label.as_str())).collect();
        let mut settings = quick();
        settings.tol.energy_identity = 1e-6;
        settings.tol.gradient_identity = 1e-6;
        let rep = verify_corpus(&picked, &settings).unwrap();
        assert!(rep.passed(), "{:#?}", rep.failures().collect::<Vec<_>>());
        for anchor in [anchors::FREQUENCY_MONOTONE, anchors::HOLDER_EXPONENT, anchors::COURANT_LEBESGUE, anchors::KEY_LEMMA] {
            assert!(rep.rows_for(anchor).count() > 0, "{anchor}");
        }
    }

    #[test]
    fn hopf_checks_on_polynomial_phi_entry() {
        let entry = &polynomial_phi_corpus()[2];
        let rows = hopf_checks(entry, &quick()).unwrap();
        assert!(rows.iter().all(|r| r.pass), "{rows:#?}");
        assert!(rows.iter().any(|r| r.anchor == anchors::COMPLETION_CONFORMAL));
    }
}
