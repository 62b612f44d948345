//! Polar-grid quadrature on disks and circles.
//!
//! Angles use the periodic trapezoid rule. The radial direction is integrated
//! with composite Simpson in the graded variable `s = (rho / r)^p`, chosen so
//! that an integrand behaving like `rho^(p - 2)` near the center becomes
//! constant in `s`. Smooth integrands use `p = 2`; integrands that are
//! singular at the center use a fitted local power and a closed-form
//! innermost cell.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::Point;
use crate::scalar::Scalar;

/// Angular and radial node counts of a polar grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiskGrid {
    pub angular: usize,
    pub radial: usize,
}

impl Default for DiskGrid {
    fn default() -> Self {
        Self { angular: 256, radial: 256 }
    }
}

impl DiskGrid {
    pub fn new(angular: usize, radial: usize) -> Result<Self> {
        let g = Self { angular, radial };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.angular < 4 {
            return Err(Error::Parameter(format!("angular count must be >= 4, got {}", self.angular)));
        }
        if self.radial < 2 || !self.radial.is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "radial count must be even and >= 2, got {}",
                self.radial
            )));
        }
        Ok(())
    }

    /// Both counts doubled.
    pub fn refined(&self) -> Self {
        Self { angular: 2 * self.angular, radial: 2 * self.radial }
    }

    /// Both counts halved (radial kept even).
    pub fn coarsened(&self) -> Self {
        Self { angular: (self.angular / 2).max(4), radial: ((self.radial / 4) * 2).max(2) }
    }
}

/// How the radial variable is graded near the disk center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialRule<T> {
    /// Integrand bounded at the center.
    Regular,
    /// Angular mean behaves like `rho^(power - 2)` near the center.
    Singular { power: T },
}

/// `int_0^{2 pi} f(theta) d theta` by the `n`-node trapezoid rule.
pub fn trapezoid_periodic<T, F>(n: usize, mut f: F) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let tau = T::PI() + T::PI();
    let dt = tau / T::from_usize_lossy(n);
    let mut acc = T::zero();
    for j in 0..n {
        acc += f(dt * T::from_usize_lossy(j))?;
    }
    Ok(acc * dt)
}

/// Composite Simpson on `[a, b]` with an even number `n` of intervals.
pub fn simpson<T, F>(a: T, b: T, n: usize, mut f: F) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Parameter(format!("Simpson needs an even interval count, got {n}")));
    }
    let h = (b - a) / T::from_usize_lossy(n);
    let mut acc = f(a)? + f(b)?;
    for i in 1..n {
        let w = if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        acc += w * f(a + h * T::from_usize_lossy(i))?;
    }
    Ok(acc * h / T::lit(3.0))
}

/// `int_0^{2 pi} g(center + rho e^{i theta}) d theta`.
pub fn circle_mean<T, F>(center: Point<T>, rho: T, angular: usize, g: &mut F) -> Result<T>
where
    T: Scalar,
    F: FnMut(Point<T>) -> Result<T>,
{
    if rho == T::zero() {
        return Ok(g(center)? * (T::PI() + T::PI()));
    }
    trapezoid_periodic(angular, |theta: T| {
        g([center[0] + rho * theta.cos(), center[1] + rho * theta.sin()])
    })
}

/// `int_{|x - center| = r} g ds`.
pub fn integrate_circle<T, F>(center: Point<T>, r: T, angular: usize, mut g: F) -> Result<T>
where
    T: Scalar,
    F: FnMut(Point<T>) -> Result<T>,
{
    Ok(r * circle_mean(center, r, angular, &mut g)?)
}

/// Estimate the local power `p` of an integrand singular at `center`:
/// its angular mean is fitted as `C rho^(p - 2)` between `rho1` and `2 rho1`.
pub fn fit_center_power<T, F>(center: Point<T>, rho1: T, angular: usize, mut g: F) -> Result<T>
where
    T: Scalar,
    F: FnMut(Point<T>) -> Result<T>,
{
    let a1 = circle_mean(center, rho1, angular, &mut g)?;
    let a2 = circle_mean(center, rho1 + rho1, angular, &mut g)?;
    if !(a1 > T::zero()) || !(a2 > T::zero()) {
        return Ok(T::lit(2.0));
    }
    let gamma = (a2 / a1).log2();
    let p = gamma + T::lit(2.0);
    if !(p > T::zero()) || !p.is_finite() {
        return Err(Error::Parameter(format!(
            "integrand is not integrable at the center (fitted power {p})"
        )));
    }
    Ok(p)
}

/// `int_{U_r(center)} g dA` on a polar grid.
pub fn integrate_disk<T, F>(center: Point<T>, r: T, grid: DiskGrid, rule: RadialRule<T>, mut g: F) -> Result<T>
where
    T: Scalar,
    F: FnMut(Point<T>) -> Result<T>,
{
    grid.validate()?;
    if r == T::zero() {
        return Ok(T::zero());
    }
    let two = T::lit(2.0);
    match rule {
        RadialRule::Regular => {
            // rho = r sqrt(s): rho d rho = r^2 / 2 ds
            let total = simpson(T::zero(), T::one(), grid.radial, |s| {
                circle_mean(center, r * s.sqrt(), grid.angular, &mut g)
            })?;
            Ok(total * r * r / two)
        }
        RadialRule::Singular { power } => {
            let p = power;
            // rho = r s^(1/p): rho d rho = (r^2 / p) s^(2/p - 1) ds
            let mut weighted = |s: T| -> Result<T> {
                let rho = r * s.powf(T::one() / p);
                Ok(circle_mean(center, rho, grid.angular, &mut g)? * s.powf(two / p - T::one()))
            };
            let ds = T::one() / T::from_usize_lossy(grid.radial);
            let g1 = weighted(ds)?;
            let g2 = weighted(ds + ds)?;
            // innermost cell: g(s) ~ C s^delta, integrated in closed form
            let inner = if g1 > T::zero() && g2 > T::zero() {
                let delta = (g2 / g1).log2();
                if delta > -T::one() {
                    g1 * ds / (delta + T::one())
                } else {
                    return Err(Error::Parameter("innermost radial cell is not integrable".into()));
                }
            } else {
                g1 * ds / two
            };
            let outer = simpson(ds, T::one(), grid.radial, weighted)?;
            Ok((inner + outer) * r * r / p)
        }
    }
}
