//! Hopf differential of `F = xi0 o f`, its power series about a window
//! center, and the conformal completion `h` that makes `(F, h)` weakly
//! conformal:
//!
//! `h(z) = (sqrt(D)/2) conj(z - w) - psi(z - w) / (2 sqrt(D))`, `psi' = phi`,
//!
//! where `D = D_w(R)` is the Dirichlet energy of `F` on the window.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FieldSpec, Gram, Point};
use crate::functionals::{dirichlet_energy, radial_rule_for, Density, GradientSource, QuadratureSettings};
use crate::quadrature::{integrate_disk, DiskGrid};
use crate::report::{anchors, CheckRow};

type Field = FieldSpec<f64>;

/// Default truncation order of the series for `phi`.
pub const SERIES_ORDER: usize = 64;
/// Nodes on the sampling circle.
pub const SAMPLE_NODES: usize = 512;
/// Sampling circle radius as a fraction of the window radius.
pub const SAMPLE_RADIUS: f64 = 0.9;
/// Test circle radius (fit residual) as a fraction of the window radius.
pub const TEST_RADIUS: f64 = 0.6;
/// Accepted fit residual relative to `max |phi|`.
pub const FIT_TOL_REL: f64 = 1e-8;
/// `phi` is treated as identically zero below this fraction of `max |grad F|^2`.
pub const ZERO_PHI_REL: f64 = 1e-12;

/// The disk `U_R(w)` on which a completion is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: Point<f64>,
    pub radius: f64,
}

impl Window {
    pub fn new(center: Point<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Parameter(format!("window radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfSettings {
    pub series_order: usize,
    pub sample_nodes: usize,
    pub grid: DiskGrid,
}

impl Default for HopfSettings {
    fn default() -> Self {
        Self { series_order: SERIES_ORDER, sample_nodes: SAMPLE_NODES, grid: DiskGrid::default() }
    }
}

/// `phi = (|F_u|^2 - |F_v|^2) - 2i <F_u, F_v>`.
pub fn hopf_differential(spec: &Field, z: Point<f64>, source: GradientSource<f64>) -> Result<Complex64> {
    let gram = match source {
        GradientSource::Analytic => spec.gram(z)?,
        GradientSource::FiniteDifference { step } => {
            let [du, dv] = spec.xi0_jacobian_fd(z, step.unwrap_or(1e-5))?;
            Gram::from_rows(&du, &dv)
        }
    };
    Ok(to_c64(gram.hopf()))
}

fn to_c64(c: num_complex::Complex<f64>) -> Complex64 {
    Complex64::new(c.re, c.im)
}

fn polar(w: Point<f64>, rho: f64, theta: f64) -> Point<f64> {
    [w[0] + rho * theta.cos(), w[1] + rho * theta.sin()]
}

/// Largest finite-difference `|d phi / d zbar|` over an annulus of the window,
/// divided by the largest `|phi|` there; zero when `phi` vanishes identically.
pub fn holomorphy_defect(spec: &Field, window: Window, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::Parameter(format!("finite-difference step must be positive, got {step}")));
    }
    let mut density = Density::new(spec, GradientSource::Analytic, window.radius);
    let mut phi = |z: Point<f64>| -> Result<Complex64> { Ok(to_c64(density.gram(z)?.hopf())) };
    let (mut max_dbar, mut max_phi, mut max_energy) = (0.0f64, 0.0f64, 0.0f64);
    let mut energy = Density::new(spec, GradientSource::Analytic, window.radius);
    for frac in [0.3, 0.45, 0.6, 0.75, 0.9] {
        for j in 0..32 {
            let z = polar(window.center, frac * window.radius, (j as f64 + 0.5) * std::f64::consts::TAU / 32.0);
            let du = (phi([z[0] + step, z[1]])? - phi([z[0] - step, z[1]])?) / (2.0 * step);
            let dv = (phi([z[0], z[1] + step])? - phi([z[0], z[1] - step])?) / (2.0 * step);
            let dbar = 0.5 * (du + Complex64::i() * dv);
            max_dbar = max_dbar.max(dbar.norm());
            max_phi = max_phi.max(phi(z)?.norm());
            max_energy = max_energy.max(energy.energy(z)?);
        }
    }
    if max_phi <= ZERO_PHI_REL * max_energy {
        return Ok(0.0);
    }
    Ok(max_dbar / max_phi)
}

/// Sampled Hopf data on a window: power series of `phi`, its antiderivative
/// `psi` with `psi(w) = 0`, and the energy normalizer `D_w(R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfPackage {
    pub window: Window,
    pub d_big: f64,
    pub phi_coeffs: Vec<Complex64>,
    pub psi_coeffs: Vec<Complex64>,
    pub fit_residual: f64,
    pub fit_tolerance: f64,
    /// `max |phi|` on the sampling circle.
    pub phi_scale: f64,
    pub defects: HopfDefects,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HopfDefects {
    pub holomorphy: Option<f64>,
    pub conformality: Option<f64>,
}

impl HopfPackage {
    /// `sum_m c_m zeta^m`, `zeta = z - w`.
    pub fn phi_series(&self, z: Point<f64>) -> Complex64 {
        horner(&self.phi_coeffs, self.local(z))
    }

    pub fn psi(&self, z: Point<f64>) -> Complex64 {
        horner(&self.psi_coeffs, self.local(z))
    }

    fn local(&self, z: Point<f64>) -> Complex64 {
        Complex64::new(z[0] - self.window.center[0], z[1] - self.window.center[1])
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Fit `phi` by discrete Fourier coefficients on the sampling circle and
/// integrate termwise. Fails with [`Error::SeriesFit`] when the residual on
/// the test circle is not below `1e-8 max |phi|`.
pub fn fit_phi_series(spec: &Field, window: Window, settings: &HopfSettings) -> Result<HopfPackage> {
    let order = settings.series_order;
    let nodes = settings.sample_nodes;
    if nodes <= 2 * order {
        return Err(Error::Parameter(format!(
            "{nodes} sampling nodes cannot resolve a series of order {order}"
        )));
    }
    let quad = QuadratureSettings::with_grid(settings.grid);
    let d_big = dirichlet_energy(spec, window.center, window.radius, &quad)?;

    let rho = SAMPLE_RADIUS * window.radius;
    let mut density = Density::new(spec, GradientSource::Analytic, window.radius);
    let mut samples = Vec::with_capacity(nodes);
    let mut energy_scale = 0.0f64;
    for j in 0..nodes {
        let theta = j as f64 * std::f64::consts::TAU / nodes as f64;
        let g = density.gram(polar(window.center, rho, theta))?;
        energy_scale = energy_scale.max(g.energy_density());
        samples.push((theta, to_c64(g.hopf())));
    }
    let phi_scale = samples.iter().map(|(_, p)| p.norm()).fold(0.0, f64::max);
    let zero_level = ZERO_PHI_REL * energy_scale;

    let phi_coeffs: Vec<Complex64> = if phi_scale <= zero_level {
        vec![Complex64::new(0.0, 0.0); order + 1]
    } else {
        (0..=order)
            .map(|m| {
                let sum = samples
                    .iter()
                    .fold(Complex64::new(0.0, 0.0), |acc, &(theta, p)| acc + p * Complex64::from_polar(1.0, -(m as f64) * theta));
                sum / nodes as f64 / rho.powi(m as i32)
            })
            .collect()
    };
    let mut psi_coeffs = vec![Complex64::new(0.0, 0.0); order + 2];
    for (m, &c) in phi_coeffs.iter().enumerate() {
        psi_coeffs[m + 1] = c / (m as f64 + 1.0);
    }

    let mut pkg = HopfPackage {
        window,
        d_big,
        phi_coeffs,
        psi_coeffs,
        fit_residual: 0.0,
        fit_tolerance: (FIT_TOL_REL * phi_scale).max(zero_level),
        phi_scale,
        defects: HopfDefects::default(),
    };
    let test_rho = TEST_RADIUS * window.radius;
    let mut residual = 0.0f64;
    for j in 0..nodes {
        let theta = (j as f64 + 0.5) * std::f64::consts::TAU / nodes as f64;
        let z = polar(window.center, test_rho, theta);
        let exact = to_c64(density.gram(z)?.hopf());
        residual = residual.max((exact - pkg.phi_series(z)).norm());
    }
    pkg.fit_residual = residual;
    if residual > pkg.fit_tolerance {
        return Err(Error::SeriesFit { residual, tolerance: pkg.fit_tolerance });
    }
    Ok(pkg)
}

/// Which `phi` the completion's gradient uses.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiSource {
    /// The fitted power series.
    Series,
    /// Closed-form `phi` from the field's sheet gradients.
    Analytic(Field),
}

/// The harmonic map `h: R^2 -> R^2` completing `F` to a conformal map.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalCompletion {
    pkg: HopfPackage,
    sqrt_d: f64,
    phi_source: PhiSource,
}

/// Completion using the fitted series for both `psi` and `phi`.
pub fn conformal_completion(pkg: &HopfPackage) -> Result<ConformalCompletion> {
    if !(pkg.d_big > 0.0) {
        return Err(Error::DegenerateEnergy { energy: pkg.d_big });
    }
    Ok(ConformalCompletion { pkg: pkg.clone(), sqrt_d: pkg.d_big.sqrt(), phi_source: PhiSource::Series })
}

impl ConformalCompletion {
    /// Evaluate `phi` in closed form instead of from the series.
    pub fn with_analytic_phi(mut self, spec: &Field) -> Self {
        self.phi_source = PhiSource::Analytic(spec.clone());
        self
    }

    pub fn package(&self) -> &HopfPackage {
        &self.pkg
    }

    pub fn d_big(&self) -> f64 {
        self.pkg.d_big
    }

    pub fn window(&self) -> Window {
        self.pkg.window
    }

    pub fn phi(&self, z: Point<f64>) -> Result<Complex64> {
        match &self.phi_source {
            PhiSource::Series => Ok(self.pkg.phi_series(z)),
            PhiSource::Analytic(spec) => {
                let mut density = Density::new(spec, GradientSource::Analytic, self.pkg.window.radius);
                Ok(to_c64(density.gram(z)?.hopf()))
            }
        }
    }

    /// `h(z)` as a point of R^2.
    pub fn value(&self, z: Point<f64>) -> Point<f64> {
        let zeta = self.pkg.local(z);
        let h = self.sqrt_d / 2.0 * zeta.conj() - self.pkg.psi(z) / (2.0 * self.sqrt_d);
        [h.re, h.im]
    }

    /// `d h / dz = -phi / (2 sqrt(D))`.
    pub fn dz(&self, z: Point<f64>) -> Result<Complex64> {
        Ok(-self.phi(z)? / (2.0 * self.sqrt_d))
    }

    /// `d h / d zbar = sqrt(D) / 2`.
    pub fn dzbar(&self) -> Complex64 {
        Complex64::new(self.sqrt_d / 2.0, 0.0)
    }

    fn jacobian_from_dz(&self, a: Complex64) -> [Point<f64>; 2] {
        let b = self.dzbar();
        let hu = a + b;
        let hv = Complex64::i() * (a - b);
        [[hu.re, hu.im], [hv.re, hv.im]]
    }

    /// Real Jacobian rows `[h_u, h_v]`.
    pub fn jacobian(&self, z: Point<f64>) -> Result<[Point<f64>; 2]> {
        Ok(self.jacobian_from_dz(self.dz(z)?))
    }

    /// `|grad h|^2`.
    pub fn grad_sq(&self, z: Point<f64>) -> Result<f64> {
        let [hu, hv] = self.jacobian(z)?;
        Ok(hu[0] * hu[0] + hu[1] * hu[1] + hv[0] * hv[0] + hv[1] * hv[1])
    }
}

fn defect_of(uu: f64, vv: f64, uv: f64) -> f64 {
    let total = uu + vv;
    if total == 0.0 {
        return 0.0;
    }
    ((uu - vv).abs() + 2.0 * uv.abs()) / total
}

/// Normalized conformality defect of `(F, h)`, or of `F` alone when no
/// completion is given.
pub fn conformality_defect(
    spec: &Field,
    completion: Option<&ConformalCompletion>,
    z: Point<f64>,
    source: GradientSource<f64>,
) -> Result<f64> {
    let g = match source {
        GradientSource::Analytic => spec.gram(z)?,
        GradientSource::FiniteDifference { step } => {
            let [du, dv] = spec.xi0_jacobian_fd(z, step.unwrap_or(1e-5))?;
            Gram::from_rows(&du, &dv)
        }
    };
    let (mut uu, mut vv, mut uv) = (g.uu, g.vv, g.uv);
    if let Some(c) = completion {
        let [hu, hv] = c.jacobian(z)?;
        uu += hu[0] * hu[0] + hu[1] * hu[1];
        vv += hv[0] * hv[0] + hv[1] * hv[1];
        uv += hu[0] * hv[0] + hu[1] * hv[1];
    }
    Ok(defect_of(uu, vv, uv))
}

/// Measurements behind the completion's energy identity and energy bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyIdentity {
    pub r: f64,
    /// Quadrature of `|grad h|^2` over `U_r(w)`.
    pub dir_h: f64,
    /// `D pi r^2 / 2 + (2D)^{-1} int_{U_r} |phi|^2` with closed-form `phi`.
    pub identity_rhs: f64,
    pub identity_rel_err: f64,
    /// `Dir(F; U_r(w))`.
    pub dir_f: f64,
    /// `Dir(F; U_R(w))`, the normalizer.
    pub d_big: f64,
    /// `(Dir(F; U_r) + Dir(h; U_r)) / Dir(F; U_R)`.
    pub energy_ratio: f64,
    /// `max |phi| / (2 |grad F|^2)` over sampled nodes; at most 1.
    pub phi_bound_ratio: f64,
    /// `max | |grad h|^2 - D/2 - |phi|^2/(2D) | / (D/2 + |phi|^2/(2D))` over sampled nodes.
    pub gradient_identity_rel_err: f64,
}

impl EnergyIdentity {
    pub fn rows(&self, label: &str, identity_tol: f64) -> Vec<CheckRow> {
        vec![
            CheckRow::at_most(format!("{label} pointwise"), anchors::COMPLETION_GRADIENT, self.gradient_identity_rel_err, identity_tol),
            CheckRow::at_most(format!("{label} r={:?}", self.r), anchors::COMPLETION_ENERGY, self.identity_rel_err, identity_tol),
            CheckRow::info(format!("{label} r={:?}", self.r), anchors::COMPLETION_ENERGY_RATIO, self.energy_ratio)
                .with_pass(self.energy_ratio.is_finite()),
            CheckRow::at_most(format!("{label} sampled"), anchors::HOPF_POINTWISE_BOUND, self.phi_bound_ratio, 1.0),
        ]
    }
}

/// Energy identity of the completion on `U_r(w)`, the measured energy
/// ratio on that disk, and the pointwise bound `|phi| <= 2 |grad F|^2`.
pub fn energy_identity_check(
    spec: &Field,
    completion: &ConformalCompletion,
    r: f64,
    grid: DiskGrid,
) -> Result<EnergyIdentity> {
    let window = completion.window();
    if !(r > 0.0) || r > window.radius {
        return Err(Error::Parameter(format!(
            "inner radius must lie in (0, R] = (0, {}], got {r}",
            window.radius
        )));
    }
    let w = window.center;
    let d = completion.d_big();
    let quad = QuadratureSettings::with_grid(grid);

    let mut grad_h = |z: Point<f64>| completion.grad_sq(z);
    let rule = radial_rule_for(spec, w, r, grid.angular, &mut grad_h)?;
    let dir_h = integrate_disk(w, r, grid, rule, &mut grad_h)?;

    let phi_vanishes = completion.package().phi_coeffs.iter().all(|c| c.norm() == 0.0);
    let phi_sq_int = if phi_vanishes {
        0.0
    } else {
        let mut density = Density::new(spec, GradientSource::Analytic, r);
        let mut phi_sq = |z: Point<f64>| -> Result<f64> { Ok(to_c64(density.gram(z)?.hopf()).norm_sqr()) };
        let rule = radial_rule_for(spec, w, r, grid.angular, &mut phi_sq)?;
        integrate_disk(w, r, grid, rule, &mut phi_sq)?
    };
    let identity_rhs = d * std::f64::consts::PI * r * r / 2.0 + phi_sq_int / (2.0 * d);
    let identity_rel_err = (dir_h - identity_rhs).abs() / identity_rhs;

    let dir_f = dirichlet_energy(spec, w, r, &quad)?;

    let mut density = Density::new(spec, GradientSource::Analytic, r);
    let (mut phi_bound_ratio, mut gradient_identity_rel_err) = (0.0f64, 0.0f64);
    for i in 1..=16 {
        let rho = r * i as f64 / 16.0;
        for j in 0..32 {
            let z = polar(w, rho, (j as f64 + 0.25) * std::f64::consts::TAU / 32.0);
            let g = density.gram(z)?;
            let phi = to_c64(g.hopf());
            let e = g.energy_density();
            if e > 0.0 {
                phi_bound_ratio = phi_bound_ratio.max(phi.norm() / (2.0 * e));
            }
            let expect = d / 2.0 + phi.norm_sqr() / (2.0 * d);
            let got = completion.grad_sq(z)?;
            gradient_identity_rel_err = gradient_identity_rel_err.max((got - expect).abs() / expect);
        }
    }

    Ok(EnergyIdentity {
        r,
        dir_h,
        identity_rhs,
        identity_rel_err,
        dir_f,
        d_big: d,
        energy_ratio: (dir_f + dir_h) / d,
        phi_bound_ratio,
        gradient_identity_rel_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{BivariatePoly, FieldKind, Sheet};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn small() -> HopfSettings {
        HopfSettings { grid: DiskGrid::new(64, 64).unwrap(), ..HopfSettings::default() }
    }

    fn axis(a: f64, b: f64) -> Field {
        FieldSpec::single(Sheet::axis_scaling(a, b)).unwrap()
    }

    fn unit_window() -> Window {
        Window::new([0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn hopf_of_reference_maps() {
        let a = GradientSource::Analytic;
        let z = [0.3, -0.7];
        let conformal = FieldSpec::single(Sheet::monomial(3)).unwrap();
        assert!(hopf_differential(&conformal, z, a).unwrap().norm() < 1e-14);
        let phi = hopf_differential(&axis(2.0, 3.0), z, a).unwrap();
        assert_eq!(phi, Complex64::new(-5.0, 0.0));
        let shear = FieldSpec::single(Sheet::polynomial(vec![
            BivariatePoly::new(vec![vec![0.0, 1.0], vec![1.0]]),
            BivariatePoly::constant(0.0),
        ]))
        .unwrap();
        assert_eq!(hopf_differential(&shear, z, a).unwrap(), Complex64::new(0.0, -2.0));
        let branch = FieldSpec::<f64>::branch(2, 3).unwrap();
        assert!(matches!(hopf_differential(&branch, [0.0, 0.0], a), Err(Error::Singular { .. })));
    }

    #[test]
    fn hopf_is_additive_over_sheets() {
        let s1 = Sheet::polynomial(vec![BivariatePoly::real_part_of(&[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.2),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, -0.3),
        ])]);
        let s2 = Sheet::polynomial(vec![BivariatePoly::imag_part_of(&[Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.7, 0.0)])]);
        let both = FieldSpec::superposition(vec![s1.clone(), s2.clone()]).unwrap();
        let a = GradientSource::Analytic;
        for z in [[0.2, 0.1], [-0.5, 0.4], [0.9, -0.3]] {
            let sum = hopf_differential(&FieldSpec::single(s1.clone()).unwrap(), z, a).unwrap()
                + hopf_differential(&FieldSpec::single(s2.clone()).unwrap(), z, a).unwrap();
            assert!((hopf_differential(&both, z, a).unwrap() - sum).norm() < 1e-10);
        }
    }

    #[test]
    fn holomorphy_defect_separates_harmonic_from_nonharmonic() {
        let w = unit_window();
        assert!(holomorphy_defect(&axis(2.0, 1.0), w, 1e-3).unwrap() < 1e-8);
        // harmonic sheets with a cubic-degree Hopf differential: O(h^2) decay
        let f = FieldSpec::superposition(vec![
            Sheet::polynomial(vec![BivariatePoly::real_part_of(&[Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])]),
            Sheet::polynomial(vec![BivariatePoly::real_part_of(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5)])]),
        ])
        .unwrap();
        let e: Vec<f64> = [4e-2, 2e-2, 1e-2].iter().map(|&h| holomorphy_defect(&f, w, h).unwrap()).collect();
        assert!((e[0] / e[1]).log2() >= 1.9 && (e[1] / e[2]).log2() >= 1.9, "{e:?}");
        // negative control: F = (u^2, 0) has phi = 4u^2 and d phi / d zbar = 4u
        let control = FieldSpec::unchecked(FieldKind::SingleHarmonic {
            sheet: Sheet::polynomial(vec![
                BivariatePoly::new(vec![vec![0.0], vec![0.0], vec![1.0]]),
                BivariatePoly::constant(0.0),
            ]),
        });
        assert!(holomorphy_defect(&control, w, 1e-3).unwrap() > 0.5);
    }

    #[test]
    fn series_of_constant_phi() {
        let pkg = fit_phi_series(&axis(2.0, 1.0), unit_window(), &small()).unwrap();
        assert!((pkg.phi_coeffs[0] - Complex64::new(3.0, 0.0)).norm() < 1e-14);
        for (m, c) in pkg.phi_coeffs.iter().enumerate().skip(1) {
            assert!(c.norm() * (SAMPLE_RADIUS).powi(m as i32) < 1e-13, "c_{m} = {c}");
        }
        assert!(pkg.fit_residual < 1e-13);
        for (m, c) in pkg.phi_coeffs.iter().enumerate() {
            assert_eq!(pkg.psi_coeffs[m + 1], c / (m as f64 + 1.0));
        }
        assert_eq!(pkg.psi_coeffs[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn series_of_quadratic_phi() {
        // F = Re(z^2 / 2): phi = (d/dz of z^2/2 * 2 / 2)^2 ... = (z)^2
        let f = FieldSpec::single(Sheet::polynomial(vec![BivariatePoly::real_part_of(&[
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
        ])]))
        .unwrap();
        let pkg = fit_phi_series(&f, unit_window(), &small()).unwrap();
        assert!((pkg.phi_coeffs[2] - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        for (m, c) in pkg.phi_coeffs.iter().enumerate() {
            if m != 2 {
                assert!(c.norm() < 1e-10, "c_{m} = {c}");
            }
        }
    }

    #[test]
    fn series_fit_rejects_nonholomorphic_phi() {
        let control = FieldSpec::unchecked(FieldKind::SingleHarmonic {
            sheet: Sheet::polynomial(vec![
                BivariatePoly::new(vec![vec![0.0], vec![0.0], vec![1.0]]),
                BivariatePoly::constant(0.0),
            ]),
        });
        assert!(matches!(fit_phi_series(&control, unit_window(), &small()), Err(Error::SeriesFit { .. })));
    }

    #[test]
    fn completion_of_conformal_field() {
        let f = FieldSpec::single(Sheet::monomial(1)).unwrap();
        let pkg = fit_phi_series(&f, unit_window(), &small()).unwrap();
        assert!(pkg.phi_coeffs.iter().all(|c| c.norm() == 0.0));
        let h = conformal_completion(&pkg).unwrap();
        let d = pkg.d_big;
        assert_relative_eq!(d, 2.0 * PI, max_relative = 1e-12);
        let z = [0.3, 0.4];
        let v = h.value(z);
        assert_relative_eq!(v[0], d.sqrt() / 2.0 * 0.3, max_relative = 1e-14);
        assert_relative_eq!(v[1], -d.sqrt() / 2.0 * 0.4, max_relative = 1e-14);
        assert_relative_eq!(h.grad_sq(z).unwrap(), d / 2.0, max_relative = 1e-14);
        assert!(conformality_defect(&f, Some(&h), z, GradientSource::Analytic).unwrap() < 1e-8);
        let rep = energy_identity_check(&f, &h, 0.5, DiskGrid::new(64, 64).unwrap()).unwrap();
        assert!(rep.identity_rel_err < 1e-8);
        assert_relative_eq!(rep.dir_h, d * PI * 0.25 / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn completion_of_axis_scaling() {
        let (a, b) = (2.0, 0.5);
        let f = axis(a, b);
        let pkg = fit_phi_series(&f, unit_window(), &small()).unwrap();
        let d = PI * (a * a + b * b);
        assert_relative_eq!(pkg.d_big, d, max_relative = 1e-12);
        let h = conformal_completion(&pkg).unwrap();
        let phi = a * a - b * b;
        let z = [0.1, -0.6];
        assert_relative_eq!(h.grad_sq(z).unwrap(), d / 2.0 + phi * phi / (2.0 * d), max_relative = 1e-12);
        let plain = conformality_defect(&f, None, z, GradientSource::Analytic).unwrap();
        assert_relative_eq!(plain, (a * a - b * b).abs() / (a * a + b * b), max_relative = 1e-14);
        assert!(conformality_defect(&f, Some(&h), z, GradientSource::Analytic).unwrap() < 1e-8);
        let rep = energy_identity_check(&f, &h, 1.0, DiskGrid::new(64, 64).unwrap()).unwrap();
        let expect = d * PI / 2.0 + PI * phi * phi / (2.0 * d);
        assert_relative_eq!(rep.dir_h, expect, max_relative = 1e-10);
        assert!(rep.phi_bound_ratio <= 1.0);
        assert!(energy_identity_check(&f, &h, 1.5, DiskGrid::new(64, 64).unwrap()).is_err());
    }

    #[test]
    fn analytic_dz_matches_phi() {
        let f = FieldSpec::superposition(vec![
            Sheet::polynomial(vec![BivariatePoly::real_part_of(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.4, 0.1)]), BivariatePoly::constant(1.0)]),
            Sheet::axis_scaling(1.5, 0.5),
        ])
        .unwrap();
        let pkg = fit_phi_series(&f, unit_window(), &small()).unwrap();
        let h = conformal_completion(&pkg).unwrap().with_analytic_phi(&f);
        for z in [[0.1, 0.2], [-0.4, 0.5], [0.6, -0.1]] {
            let phi = hopf_differential(&f, z, GradientSource::Analytic).unwrap();
            let dz = h.dz(z).unwrap();
            assert!((dz + phi / (2.0 * pkg.d_big.sqrt())).norm() <= 1e-10 * phi.norm());
        }
    }

    #[test]
    fn degenerate_energy_has_no_completion() {
        let f = FieldSpec::single(Sheet::constant(&[1.0, 1.0])).unwrap();
        let pkg = fit_phi_series(&f, unit_window(), &small()).unwrap();
        assert_eq!(pkg.d_big, 0.0);
        assert!(matches!(conformal_completion(&pkg), Err(Error::DegenerateEnergy { .. })));
    }
}
