//! Dirichlet energy, height and frequency on disks about a center, radial
//! profiles, the two-sided height bound and Hölder-exponent regression.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FieldSpec, Gram, Point};
use crate::quadrature::{fit_center_power, integrate_circle, integrate_disk, DiskGrid, RadialRule};
use crate::report::{anchors, CheckRow, GridMeta, VerificationReport};
use crate::scalar::Scalar;

/// Heights at or below this value make the frequency undefined.
pub const HEIGHT_FLOOR: f64 = 1e-14;

/// Default absolute tolerance on frequency decreases between radii.
pub const MONOTONICITY_TOL: f64 = 1e-6;

/// Default relative tolerance on the two-sided height bound.
pub const HEIGHT_BOUND_TOL: f64 = 1e-6;

/// Relative distance of the power-fit probe circle from the center.
const POWER_FIT_PROBE: f64 = 1e-4;

/// Where the gradients of `xi0 o f` come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientSource<T> {
    /// Closed-form sheet gradients; centered differences at singular nodes.
    Analytic,
    /// Centered differences of `xi0 o f`; `None` means `1e-5` times the disk radius.
    FiniteDifference { step: Option<T> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings<T> {
    pub grid: DiskGrid,
    pub gradient: GradientSource<T>,
}

impl<T> Default for QuadratureSettings<T> {
    fn default() -> Self {
        Self { grid: DiskGrid::default(), gradient: GradientSource::Analytic }
    }
}

impl<T> QuadratureSettings<T> {
    pub fn with_grid(grid: DiskGrid) -> Self {
        Self { grid, gradient: GradientSource::Analytic }
    }
}

/// Reusable evaluator of `|grad(xi0 o f)|^2` and the Gram entries.
pub struct Density<'a, T: Scalar> {
    spec: &'a FieldSpec<T>,
    fd_step: Option<T>,
    fallback_step: T,
    du: Vec<T>,
    dv: Vec<T>,
}

impl<'a, T: Scalar> Density<'a, T> {
    /// `scale` sets the default finite-difference step (`1e-5 * scale`).
    pub fn new(spec: &'a FieldSpec<T>, source: GradientSource<T>, scale: T) -> Self {
        let fallback_step = T::lit(1e-5) * scale.max(T::min_positive_value());
        let fd_step = match source {
            GradientSource::Analytic => None,
            GradientSource::FiniteDifference { step } => Some(step.unwrap_or(fallback_step)),
        };
        Self { spec, fd_step, fallback_step, du: Vec::new(), dv: Vec::new() }
    }

    pub fn gram(&mut self, z: Point<T>) -> Result<Gram<T>> {
        let step = match self.fd_step {
            Some(step) => step,
            None => match self.spec.sheet_gradients_into(z, &mut self.du, &mut self.dv) {
                Ok(()) => return Ok(Gram::from_rows(&self.du, &self.dv)),
                Err(Error::Singular { .. }) => self.fallback_step,
                Err(e) => return Err(e),
            },
        };
        let [du, dv] = self.spec.xi0_jacobian_fd(z, step)?;
        Ok(Gram::from_rows(&du, &dv))
    }

    pub fn energy(&mut self, z: Point<T>) -> Result<T> {
        Ok(self.gram(z)?.energy_density())
    }
}

/// True when the sheet gradients are undefined at `z` (a branch point).
pub fn is_singular_at<T: Scalar>(spec: &FieldSpec<T>, z: Point<T>) -> bool {
    let (mut du, mut dv) = (Vec::new(), Vec::new());
    matches!(spec.sheet_gradients_into(z, &mut du, &mut dv), Err(Error::Singular { .. }))
}

/// Radial grading for an integrand derived from `spec` on `U_r(center)`.
pub fn radial_rule_for<T, F>(spec: &FieldSpec<T>, center: Point<T>, r: T, angular: usize, g: F) -> Result<RadialRule<T>>
where
    T: Scalar,
    F: FnMut(Point<T>) -> Result<T>,
{
    if is_singular_at(spec, center) {
        let power = fit_center_power(center, r * T::lit(POWER_FIT_PROBE), angular, g)?;
        Ok(RadialRule::Singular { power })
    } else {
        Ok(RadialRule::Regular)
    }
}

/// `D(r) = int_{U_r(center)} |grad(xi0 o f)|^2`.
pub fn dirichlet_energy<T: Scalar>(
    spec: &FieldSpec<T>,
    center: Point<T>,
    r: T,
    settings: &QuadratureSettings<T>,
) -> Result<T> {
    spec.check_disk(center, r)?;
    if r == T::zero() {
        return Ok(T::zero());
    }
    let mut density = Density::new(spec, settings.gradient, r);
    let rule = radial_rule_for(spec, center, r, settings.grid.angular, |z| density.energy(z))?;
    integrate_disk(center, r, settings.grid, rule, |z| density.energy(z))
}

/// `H(r) = int_{dU_r(center)} |f|^2 ds`.
pub fn height<T: Scalar>(spec: &FieldSpec<T>, center: Point<T>, r: T, angular: usize) -> Result<T> {
    spec.check_disk(center, r)?;
    let mut buf = Vec::new();
    integrate_circle(center, r, angular, |z| {
        spec.sheet_values(z, &mut buf);
        Ok(buf.iter().fold(T::zero(), |acc, &x| acc + x * x))
    })
}

/// `N(r) = r D(r) / H(r)`.
pub fn frequency<T: Scalar>(
    spec: &FieldSpec<T>,
    center: Point<T>,
    r: T,
    settings: &QuadratureSettings<T>,
) -> Result<T> {
    let h = height(spec, center, r, settings.grid.angular)?;
    if !(h > T::lit(HEIGHT_FLOOR)) {
        return Err(Error::DegenerateHeight { height: h.to_f64_lossy() });
    }
    let d = dirichlet_energy(spec, center, r, settings)?;
    Ok(r * d / h)
}

/// A decrease of the frequency between consecutive radii beyond tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation<T> {
    pub index: usize,
    pub r_lo: T,
    pub r_hi: T,
    pub drop: T,
}

/// Sampled `D`, `H` and `N` over a radius grid about a fixed center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile<T> {
    pub center: Point<T>,
    pub radii: Vec<T>,
    pub d_vals: Vec<T>,
    pub h_vals: Vec<T>,
    /// `None` where the height is below [`HEIGHT_FLOOR`].
    pub n_vals: Vec<Option<T>>,
    /// Domain dimension, always 2.
    pub m: usize,
    pub grid: DiskGrid,
    pub tolerance: T,
    pub violations: Vec<MonotonicityViolation<T>>,
}

impl<T: Scalar> RadialProfile<T> {
    /// Largest decrease `N(r_i) - N(r_{i+1})` over consecutive defined
    /// entries, zero when the sequence is nondecreasing.
    pub fn max_decrease(&self) -> T {
        let mut worst = T::zero();
        for w in self.n_vals.windows(2) {
            if let [Some(a), Some(b)] = w {
                worst = worst.max(*a - *b);
            }
        }
        worst
    }

    pub fn index_of(&self, r: T) -> Option<usize> {
        self.radii
            .iter()
            .position(|&x| (x - r).abs() <= T::lit(1e-12) * x.abs().max(r.abs()))
    }

    /// Every pair `(r, t)` of grid radii with `r <= t`.
    pub fn all_pairs(&self) -> Vec<(T, T)> {
        let mut out = Vec::new();
        for (i, &r) in self.radii.iter().enumerate() {
            for &t in &self.radii[i..] {
                out.push((r, t));
            }
        }
        out
    }

    /// `H(r)/r`, the height normalized by `r^(m-1)`.
    pub fn normalized_height(&self, i: usize) -> T {
        self.h_vals[i] / self.radii[i]
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Parameter(format!("csv: {e}"));
        w.write_record(["r", "D", "H", "N"]).map_err(io)?;
        for i in 0..self.radii.len() {
            w.write_record([
                format!("{:?}", self.radii[i].to_f64_lossy()),
                format!("{:?}", self.d_vals[i].to_f64_lossy()),
                format!("{:?}", self.h_vals[i].to_f64_lossy()),
                self.n_vals[i].map(|n| format!("{:?}", n.to_f64_lossy())).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parameter(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Ascending grid of `count` radii spaced geometrically on `[lo, hi]`.
pub fn geometric_radii<T: Scalar>(lo: T, hi: T, count: usize) -> Result<Vec<T>> {
    if !(lo > T::zero()) || !(hi > lo) || count < 2 {
        return Err(Error::Parameter("geometric grid needs 0 < lo < hi and count >= 2".into()));
    }
    let ratio = (hi / lo).ln() / T::from_usize_lossy(count - 1);
    Ok((0..count)
        .map(|i| if i + 1 == count { hi } else { lo * (ratio * T::from_usize_lossy(i)).exp() })
        .collect())
}

pub fn radial_profile<T: Scalar>(
    spec: &FieldSpec<T>,
    center: Point<T>,
    radii: &[T],
    settings: &QuadratureSettings<T>,
) -> Result<RadialProfile<T>> {
    radial_profile_with_tol(spec, center, radii, settings, T::lit(MONOTONICITY_TOL))
}

pub fn radial_profile_with_tol<T: Scalar>(
    spec: &FieldSpec<T>,
    center: Point<T>,
    radii: &[T],
    settings: &QuadratureSettings<T>,
    tolerance: T,
) -> Result<RadialProfile<T>> {
    if radii.is_empty() {
        return Err(Error::Parameter("radial profile needs at least one radius".into()));
    }
    if radii[0] <= T::zero() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("radii must be positive and strictly increasing".into()));
    }
    let mut d_vals = Vec::with_capacity(radii.len());
    let mut h_vals = Vec::with_capacity(radii.len());
    let mut n_vals = Vec::with_capacity(radii.len());
    for &r in radii {
        let h = height(spec, center, r, settings.grid.angular)?;
        let d = dirichlet_energy(spec, center, r, settings)?;
        n_vals.push((h > T::lit(HEIGHT_FLOOR)).then(|| r * d / h));
        d_vals.push(d);
        h_vals.push(h);
    }
    let mut violations = Vec::new();
    for i in 0..radii.len().saturating_sub(1) {
        if let (Some(a), Some(b)) = (n_vals[i], n_vals[i + 1]) {
            if b < a - tolerance {
                violations.push(MonotonicityViolation { index: i, r_lo: radii[i], r_hi: radii[i + 1], drop: a - b });
            }
        }
    }
    Ok(RadialProfile {
        center,
        radii: radii.to_vec(),
        d_vals,
        h_vals,
        n_vals,
        m: 2,
        grid: settings.grid,
        tolerance,
        violations,
    })
}

/// Relative slacks of the lower and upper height bounds for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightBoundSlack<T> {
    pub lower: T,
    pub upper: T,
}

/// Evaluate `H(t)/t (r/t)^{2N(t)} <= H(r)/r <= H(t)/t (r/t)^{2N(r)}` at grid
/// radii `r <= t`. `None` when a frequency is undefined.
pub fn height_bound_slack<T: Scalar>(profile: &RadialProfile<T>, r: T, t: T) -> Result<Option<HeightBoundSlack<T>>> {
    if r > t {
        return Err(Error::Parameter(format!("height bound needs r <= t, got r = {r}, t = {t}")));
    }
    let i = profile
        .index_of(r)
        .ok_or_else(|| Error::Parameter(format!("radius {r} is not on the profile grid")))?;
    let j = profile
        .index_of(t)
        .ok_or_else(|| Error::Parameter(format!("radius {t} is not on the profile grid")))?;
    let (Some(n_r), Some(n_t)) = (profile.n_vals[i], profile.n_vals[j]) else {
        return Ok(None);
    };
    let two = T::lit(2.0);
    let mid = profile.normalized_height(i);
    let outer = profile.normalized_height(j);
    let ratio = profile.radii[i] / profile.radii[j];
    let lower = outer * ratio.powf(two * n_t);
    let upper = outer * ratio.powf(two * n_r);
    Ok(Some(HeightBoundSlack { lower: (mid - lower) / mid, upper: (upper - mid) / mid }))
}

/// Two-sided height bound over the given pairs; passes iff every relative
/// slack is at least `-tol_rel`.
pub fn check_height_bound<T: Scalar>(
    profile: &RadialProfile<T>,
    pairs: &[(T, T)],
    tol_rel: f64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("height-bound", GridMeta::from(profile.grid));
    for &(r, t) in pairs {
        let label = format!("r={:?} t={:?}", r.to_f64_lossy(), t.to_f64_lossy());
        match height_bound_slack(profile, r, t)? {
            Some(s) => {
                for (anchor, slack) in [(anchors::HEIGHT_BOUND_LOWER, s.lower), (anchors::HEIGHT_BOUND_UPPER, s.upper)] {
                    let slack = slack.to_f64_lossy();
                    report.push(CheckRow {
                        check: label.clone(),
                        anchor: anchor.into(),
                        measured: slack,
                        bound: Some(-tol_rel),
                        slack: Some(slack + tol_rel),
                        pass: slack >= -tol_rel,
                        note: None,
                    });
                }
            }
            None => report.push(
                CheckRow::info(label, anchors::HEIGHT_BOUND_LOWER, f64::NAN).with_note("degenerate height"),
            ),
        }
    }
    Ok(report)
}

/// Least-squares Hölder exponent at the profile center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate<T> {
    pub alpha: T,
    /// Root-mean-square residual of the log-log fit.
    pub residual: T,
    pub points: usize,
}

/// Slope of `log(H(r)/r)` against `2 log r` over the smallest decade of
/// radii (at least the four smallest).
pub fn estimate_holder_exponent<T: Scalar>(profile: &RadialProfile<T>) -> Result<HolderEstimate<T>> {
    let floor = T::lit(HEIGHT_FLOOR);
    let usable: Vec<(T, T)> = profile
        .radii
        .iter()
        .zip(&profile.h_vals)
        .filter(|(_, &h)| h > floor)
        .map(|(&r, &h)| (r, h))
        .collect();
    if usable.is_empty() && !profile.radii.is_empty() {
        let h = profile.h_vals.iter().fold(T::zero(), |m, &x| m.max(x));
        return Err(Error::DegenerateHeight { height: h.to_f64_lossy() });
    }
    if usable.len() < 4 {
        return Err(Error::Parameter(format!(
            "Hölder regression needs >= 4 radii with positive height, got {}",
            usable.len()
        )));
    }
    let r_min = usable[0].0;
    let decade = r_min * T::lit(10.0) * (T::one() + T::lit(1e-12));
    let mut chosen: Vec<(T, T)> = usable.iter().copied().filter(|&(r, _)| r <= decade).collect();
    if chosen.len() < 4 {
        chosen = usable[..4].to_vec();
    }
    let two = T::lit(2.0);
    let xs: Vec<T> = chosen.iter().map(|&(r, _)| two * r.ln()).collect();
    let ys: Vec<T> = chosen.iter().map(|&(r, h)| (h / r).ln()).collect();
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let ss = xs
        .iter()
        .zip(&ys)
        .fold(T::zero(), |a, (&x, &y)| a + (y - intercept - alpha * x).powi(2));
    Ok(HolderEstimate { alpha, residual: (ss / n).sqrt(), points: xs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::Sheet;
    use approx::assert_relative_eq;
    use num_complex::Complex;
    use std::f64::consts::PI;

    fn coarse() -> QuadratureSettings<f64> {
        QuadratureSettings::with_grid(DiskGrid::new(64, 64).unwrap())
    }

    #[test]
    fn constant_field_has_zero_energy() {
        let f = FieldSpec::single(Sheet::constant(&[1.0, 2.0])).unwrap();
        assert_eq!(dirichlet_energy(&f, [0.0, 0.0], 0.7, &coarse()).unwrap(), 0.0);
        let zero = FieldSpec::single(Sheet::constant(&[0.0, 0.0])).unwrap();
        assert!(matches!(frequency(&zero, [0.0, 0.0], 1.0, &coarse()), Err(Error::DegenerateHeight { .. })));
    }

    #[test]
    fn identity_map_energy_height_frequency() {
        let f = FieldSpec::single(Sheet::axis_scaling(1.0, 1.0)).unwrap();
        for r in [0.1, 0.5, 2.0] {
            assert_relative_eq!(dirichlet_energy(&f, [0.0, 0.0], r, &coarse()).unwrap(), 2.0 * PI * r * r, max_relative = 1e-13);
            assert_relative_eq!(height(&f, [0.0, 0.0], r, 64).unwrap(), 2.0 * PI * r.powi(3), max_relative = 1e-13);
            assert_relative_eq!(frequency(&f, [0.0, 0.0], r, &coarse()).unwrap(), 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn holomorphic_monomial_frequency_is_its_degree() {
        for k in 1..=4 {
            let f = FieldSpec::single(Sheet::monomial(k)).unwrap();
            let n = frequency(&f, [0.0, 0.0], 0.8, &coarse()).unwrap();
            assert_relative_eq!(n, k as f64, max_relative = 1e-12);
        }
    }

    #[test]
    fn branch_family_closed_forms() {
        for (k, q) in [(2u32, 3u32), (1, 5), (3, 2), (4, 5)] {
            let f = FieldSpec::<f64>::branch(k, q).unwrap();
            let alpha = k as f64 / q as f64;
            let r = 0.6;
            let d = dirichlet_energy(&f, [0.0, 0.0], r, &coarse()).unwrap();
            let h = height(&f, [0.0, 0.0], r, 64).unwrap();
            assert_relative_eq!(d, 2.0 * PI * k as f64 * r.powf(2.0 * alpha), max_relative = 1e-10);
            assert_relative_eq!(h, 2.0 * PI * q as f64 * r.powf(1.0 + 2.0 * alpha), max_relative = 1e-13);
        }
    }

    #[test]
    fn scale_and_translation_covariance() {
        let f = FieldSpec::superposition(vec![Sheet::monomial(1), Sheet::monomial(2)]).unwrap();
        let c = [0.2, -0.1];
        let s = coarse();
        let d = dirichlet_energy(&f, c, 0.5, &s).unwrap();
        let h = height(&f, c, 0.5, 64).unwrap();
        let g = f.scaled(3.0);
        assert_relative_eq!(dirichlet_energy(&g, c, 0.5, &s).unwrap(), 9.0 * d, max_relative = 1e-14);
        assert_relative_eq!(height(&g, c, 0.5, 64).unwrap(), 9.0 * h, max_relative = 1e-14);
        let t = f.translated([1.5, 2.0]);
        let tc = [c[0] + 1.5, c[1] + 2.0];
        assert_relative_eq!(dirichlet_energy(&t, tc, 0.5, &s).unwrap(), d, max_relative = 1e-12);
        assert_relative_eq!(height(&t, tc, 0.5, 64).unwrap(), h, max_relative = 1e-12);
    }

    #[test]
    fn finite_difference_energy_matches_analytic() {
        let f = FieldSpec::superposition(vec![
            Sheet::holomorphic(vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.5), Complex::new(0.3, 0.0)]),
            Sheet::holomorphic(vec![Complex::new(4.0, 4.0), Complex::new(0.5, -1.0)]),
        ])
        .unwrap();
        let s = coarse();
        let fd = QuadratureSettings { gradient: GradientSource::FiniteDifference { step: None }, ..s };
        let a = dirichlet_energy(&f, [0.1, 0.0], 0.9, &s).unwrap();
        let b = dirichlet_energy(&f, [0.1, 0.0], 0.9, &fd).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-6);
    }

    #[test]
    fn profile_of_linear_plus_quadratic_is_increasing_towards_one() {
        let f = FieldSpec::superposition(vec![Sheet::monomial(1), Sheet::monomial(2)]).unwrap();
        let radii = geometric_radii(1e-3, 0.8, 12).unwrap();
        let p = radial_profile(&f, [0.0, 0.0], &radii, &coarse()).unwrap();
        assert!(p.violations.is_empty());
        assert_eq!(p.max_decrease(), 0.0);
        assert_relative_eq!(p.n_vals[0].unwrap(), 1.0, max_relative = 1e-5);
        // D = 2 pi (r^2 + 2 r^4), H = 2 pi r (r^2 + r^4)
        for (r, n) in p.radii.iter().zip(&p.n_vals) {
            let expect = (1.0 + 2.0 * r * r) / (1.0 + r * r);
            assert_relative_eq!(n.unwrap(), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn constant_plus_linear_frequency_tends_to_zero() {
        let f = FieldSpec::superposition(vec![Sheet::constant(&[1.0, 0.0]), Sheet::monomial(1)]).unwrap();
        let radii = geometric_radii(1e-4, 0.5, 8).unwrap();
        let p = radial_profile(&f, [0.0, 0.0], &radii, &coarse()).unwrap();
        assert!(p.violations.is_empty());
        assert!(p.n_vals[0].unwrap() < 1e-7);
        for (r, n) in p.radii.iter().zip(&p.n_vals) {
            assert_relative_eq!(n.unwrap(), r * r / (1.0 + r * r), max_relative = 1e-12);
        }
    }

    #[test]
    fn height_bound_is_an_identity_for_homogeneous_families() {
        let f = FieldSpec::<f64>::branch(2, 3).unwrap();
        let radii = geometric_radii(1e-3, 1.0, 6).unwrap();
        let p = radial_profile(&f, [0.0, 0.0], &radii, &coarse()).unwrap();
        let rep = check_height_bound(&p, &p.all_pairs(), 1e-6).unwrap();
        assert!(rep.passed());
        assert!(rep.rows.iter().all(|r| r.measured.abs() < 1e-6));
        let same = height_bound_slack(&p, radii[2], radii[2]).unwrap().unwrap();
        assert_eq!((same.lower, same.upper), (0.0, 0.0));
        assert!(height_bound_slack(&p, radii[3], radii[2]).is_err());
        assert!(height_bound_slack(&p, 0.123, radii[2]).is_err());
    }

    #[test]
    fn height_bound_is_strict_for_increasing_frequency() {
        let f = FieldSpec::superposition(vec![Sheet::monomial(1), Sheet::monomial(2)]).unwrap();
        let radii = geometric_radii(0.05, 1.0, 5).unwrap();
        let p = radial_profile(&f, [0.0, 0.0], &radii, &coarse()).unwrap();
        for (r, t) in p.all_pairs().into_iter().filter(|(r, t)| r < t) {
            let s = height_bound_slack(&p, r, t).unwrap().unwrap();
            assert!(s.lower > 0.0 && s.upper > 0.0, "{r} {t} {s:?}");
        }
    }

    #[test]
    fn holder_regression() {
        let f = FieldSpec::single(Sheet::axis_scaling(1.0, 1.0)).unwrap();
        let radii = geometric_radii(1e-3, 0.5, 10).unwrap();
        let p = radial_profile(&f, [0.0, 0.0], &radii, &coarse()).unwrap();
        let est = estimate_holder_exponent(&p).unwrap();
        assert_relative_eq!(est.alpha, 1.0, epsilon = 1e-6);
        let zero = FieldSpec::single(Sheet::constant(&[0.0])).unwrap();
        let pz = radial_profile(&zero, [0.0, 0.0], &radii, &coarse()).unwrap();
        assert!(matches!(estimate_holder_exponent(&pz), Err(Error::DegenerateHeight { .. })));
        let short = radial_profile(&f, [0.0, 0.0], &radii[..3], &coarse()).unwrap();
        assert!(matches!(estimate_holder_exponent(&short), Err(Error::Parameter(_))));
    }

    #[test]
    fn profile_csv_has_four_columns() {
        let f = FieldSpec::single(Sheet::axis_scaling(1.0, 1.0)).unwrap();
        let p = radial_profile(&f, [0.0, 0.0], &[0.5, 1.0], &coarse()).unwrap();
        let csv = p.to_csv().unwrap();
        assert!(csv.starts_with("r,D,H,N\n0.5,"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn generic_over_single_precision() {
        let f = FieldSpec::<f32>::branch(2, 3).unwrap();
        let s = QuadratureSettings::with_grid(DiskGrid::new(32, 32).unwrap());
        let n = frequency(&f, [0.0, 0.0], 0.5, &s).unwrap();
        assert!((n - 2.0 / 3.0).abs() < 1e-4);
    }
}
