//! Analytic Q-valued test fields on the plane.
//!
//! Every field is a base family composed with an affine change of variables
//! `f(z) = amplitude * base(dilation * (z - center)) - offset`, which keeps
//! translation, scaling, constant subtraction and blow-up rescaling exact.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qspace::{xi0, QPoint};
use crate::scalar::Scalar;

/// A point of the plane, `(u, v)`.
pub type Point<T> = [T; 2];

/// Closed disk in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk<T> {
    pub center: Point<T>,
    pub radius: T,
}

/// Real polynomial `sum c[i][j] u^i v^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BivariatePoly<T> {
    pub coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> BivariatePoly<T> {
    pub fn new(coeffs: Vec<Vec<T>>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Self { coeffs: vec![vec![c]] }
    }

    /// `Re(sum_m c_m (u + iv)^m)`.
    pub fn real_part_of(coeffs: &[Complex<T>]) -> Self {
        Self::from_holomorphic(coeffs, false)
    }

    /// `Im(sum_m c_m (u + iv)^m)`.
    pub fn imag_part_of(coeffs: &[Complex<T>]) -> Self {
        Self::from_holomorphic(coeffs, true)
    }

    fn from_holomorphic(coeffs: &[Complex<T>], imag: bool) -> Self {
        let deg = coeffs.len().saturating_sub(1);
        let mut table = vec![vec![T::zero(); deg + 1]; deg + 1];
        for (m, &c) in coeffs.iter().enumerate() {
            // (u + iv)^m = sum_l C(m,l) u^{m-l} i^l v^l
            let mut binom = T::one();
            let mut ipow = Complex::new(T::one(), T::zero());
            for l in 0..=m {
                let term = c * ipow * binom;
                table[m - l][l] += if imag { term.im } else { term.re };
                binom = binom * T::from_usize_lossy(m - l) / T::from_usize_lossy(l + 1);
                ipow *= Complex::new(T::zero(), T::one());
            }
        }
        Self { coeffs: table }
    }

    pub fn degree(&self) -> usize {
        let rows = self.coeffs.len();
        let cols = self.coeffs.iter().map(Vec::len).max().unwrap_or(0);
        (rows + cols).saturating_sub(2)
    }

    fn coeff(&self, i: usize, j: usize) -> T {
        self.coeffs.get(i).and_then(|row| row.get(j)).copied().unwrap_or_else(T::zero)
    }

    /// Largest coefficient of the Laplacian, zero for a harmonic polynomial.
    pub fn laplacian_residual(&self) -> T {
        let rows = self.coeffs.len();
        let cols = self.coeffs.iter().map(Vec::len).max().unwrap_or(0);
        let mut worst = T::zero();
        for i in 0..rows {
            for j in 0..cols {
                let a = T::from_usize_lossy((i + 2) * (i + 1)) * self.coeff(i + 2, j);
                let b = T::from_usize_lossy((j + 2) * (j + 1)) * self.coeff(i, j + 2);
                worst = worst.max((a + b).abs());
            }
        }
        worst
    }

    fn scale(&self) -> T {
        self.coeffs.iter().flatten().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn is_harmonic(&self) -> bool {
        let deg = T::from_usize_lossy(self.degree().max(1));
        self.laplacian_residual() <= T::lit(1e-12) * deg * deg * self.scale().max(T::one())
    }

    /// Value and gradient `(p, p_u, p_v)`.
    pub fn eval_with_grad(&self, u: T, v: T) -> (T, T, T) {
        let (mut val, mut du, mut dv) = (T::zero(), T::zero(), T::zero());
        let mut upow = T::one();
        let mut upow_prev = T::zero();
        for (i, row) in self.coeffs.iter().enumerate() {
            let mut vpow = T::one();
            let mut vpow_prev = T::zero();
            for (j, &c) in row.iter().enumerate() {
                if c != T::zero() {
                    val += c * upow * vpow;
                    du += c * T::from_usize_lossy(i) * upow_prev * vpow;
                    dv += c * T::from_usize_lossy(j) * upow * vpow_prev;
                }
                vpow_prev = vpow;
                vpow *= v;
            }
            upow_prev = upow;
            upow *= u;
        }
        (val, du, dv)
    }
}

/// One single-valued sheet R^2 -> R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sheet<T> {
    /// `w -> p(w)` for a complex polynomial, read as a map into R^2.
    Holomorphic { coeffs: Vec<Complex<T>> },
    /// One real polynomial per target coordinate.
    Polynomial { components: Vec<BivariatePoly<T>> },
}

impl<T: Scalar> Sheet<T> {
    pub fn holomorphic(coeffs: Vec<Complex<T>>) -> Self {
        Sheet::Holomorphic { coeffs }
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); k + 1];
        coeffs[k] = Complex::new(T::one(), T::zero());
        Sheet::Holomorphic { coeffs }
    }

    pub fn polynomial(components: Vec<BivariatePoly<T>>) -> Self {
        Sheet::Polynomial { components }
    }

    pub fn constant(value: &[T]) -> Self {
        Sheet::Polynomial {
            components: value.iter().map(|&c| BivariatePoly::constant(c)).collect(),
        }
    }

    /// `(u, v) -> (a u, b v)`.
    pub fn axis_scaling(a: T, b: T) -> Self {
        let z = T::zero();
        Sheet::Polynomial {
            components: vec![
                BivariatePoly::new(vec![vec![z], vec![a]]),
                BivariatePoly::new(vec![vec![z, b]]),
            ],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Sheet::Holomorphic { .. } => 2,
            Sheet::Polynomial { components } => components.len(),
        }
    }

    pub fn is_harmonic(&self) -> bool {
        match self {
            Sheet::Holomorphic { .. } => true,
            Sheet::Polynomial { components } => components.iter().all(BivariatePoly::is_harmonic),
        }
    }

    fn laplacian_residual(&self) -> T {
        match self {
            Sheet::Holomorphic { .. } => T::zero(),
            Sheet::Polynomial { components } => components
                .iter()
                .map(BivariatePoly::laplacian_residual)
                .fold(T::zero(), T::max),
        }
    }

    fn eval_into(&self, w: Point<T>, out: &mut Vec<T>) {
        match self {
            Sheet::Holomorphic { coeffs } => {
                let z = Complex::new(w[0], w[1]);
                let val = horner(coeffs, z);
                out.push(val.re);
                out.push(val.im);
            }
            Sheet::Polynomial { components } => {
                out.extend(components.iter().map(|p| p.eval_with_grad(w[0], w[1]).0));
            }
        }
    }

    fn grad_into(&self, w: Point<T>, du: &mut Vec<T>, dv: &mut Vec<T>) {
        match self {
            Sheet::Holomorphic { coeffs } => {
                let z = Complex::new(w[0], w[1]);
                let d = horner_derivative(coeffs, z);
                push_holomorphic_grad(d, du, dv);
            }
            Sheet::Polynomial { components } => {
                for p in components {
                    let (_, pu, pv) = p.eval_with_grad(w[0], w[1]);
                    du.push(pu);
                    dv.push(pv);
                }
            }
        }
    }
}

fn horner<T: Scalar>(coeffs: &[Complex<T>], z: Complex<T>) -> Complex<T> {
    coeffs.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c)
}

fn horner_derivative<T: Scalar>(coeffs: &[Complex<T>], z: Complex<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (m, &c) in coeffs.iter().enumerate().skip(1).rev() {
        acc = acc * z + c * T::from_usize_lossy(m);
    }
    acc
}

/// Real Jacobian rows of a holomorphic map with complex derivative `d`:
/// `d/du = (Re d, Im d)`, `d/dv = (-Im d, Re d)`.
fn push_holomorphic_grad<T: Scalar>(d: Complex<T>, du: &mut Vec<T>, dv: &mut Vec<T>) {
    du.push(d.re);
    du.push(d.im);
    dv.push(-d.im);
    dv.push(d.re);
}

/// The base family of a field before the affine change of variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "variant",
    rename_all = "snake_case",
    bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub enum FieldKind<T> {
    /// The Q values `scale * zeta^k` over the Q-th roots `zeta` of `w`.
    BranchFamily {
        k: u32,
        q: u32,
        #[serde(default = "unit_scale")]
        scale: Complex<T>,
    },
    /// Q pairwise distinct single-valued sheets.
    Superposition { sheets: Vec<Sheet<T>> },
    SingleHarmonic { sheet: Sheet<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
struct FieldSpecRepr<T> {
    field: FieldKind<T>,
    #[serde(default = "origin")]
    center: Point<T>,
    #[serde(default = "one")]
    dilation: T,
    #[serde(default = "one")]
    amplitude: T,
    #[serde(default)]
    offset: Option<Vec<T>>,
    #[serde(default)]
    domain: Option<Disk<T>>,
}

fn one<T: Scalar>() -> T {
    T::one()
}

fn origin<T: Scalar>() -> Point<T> {
    [T::zero(), T::zero()]
}

fn unit_scale<T: Scalar>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// A Q-valued field with closed-form values and sheet derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "FieldSpecRepr<T>",
    into = "FieldSpecRepr<T>",
    bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct FieldSpec<T: Scalar> {
    kind: FieldKind<T>,
    center: Point<T>,
    dilation: T,
    amplitude: T,
    offset: Option<Vec<T>>,
    domain: Option<Disk<T>>,
}

impl<T: Scalar> From<FieldSpec<T>> for FieldSpecRepr<T> {
    fn from(f: FieldSpec<T>) -> Self {
        Self {
            field: f.kind,
            center: f.center,
            dilation: f.dilation,
            amplitude: f.amplitude,
            offset: f.offset,
            domain: f.domain,
        }
    }
}

impl<T: Scalar> TryFrom<FieldSpecRepr<T>> for FieldSpec<T> {
    type Error = Error;

    fn try_from(r: FieldSpecRepr<T>) -> Result<Self> {
        let spec = FieldSpec {
            kind: r.field,
            center: r.center,
            dilation: r.dilation,
            amplitude: r.amplitude,
            offset: r.offset,
            domain: r.domain,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl<T: Scalar> FieldSpec<T> {
    /// Validated field centered at the origin.
    pub fn new(kind: FieldKind<T>) -> Result<Self> {
        let spec = Self::unchecked(kind);
        spec.validate()?;
        Ok(spec)
    }

    /// Skips the harmonicity and distinctness checks. Meant for negative
    /// controls; the structural checks still run on use.
    pub fn unchecked(kind: FieldKind<T>) -> Self {
        Self {
            kind,
            center: [T::zero(), T::zero()],
            dilation: T::one(),
            amplitude: T::one(),
            offset: None,
            domain: None,
        }
    }

    pub fn branch(k: u32, q: u32) -> Result<Self> {
        Self::new(FieldKind::BranchFamily { k, q, scale: Complex::new(T::one(), T::zero()) })
    }

    pub fn branch_scaled(k: u32, q: u32, scale: Complex<T>) -> Result<Self> {
        Self::new(FieldKind::BranchFamily { k, q, scale })
    }

    pub fn single(sheet: Sheet<T>) -> Result<Self> {
        Self::new(FieldKind::SingleHarmonic { sheet })
    }

    pub fn superposition(sheets: Vec<Sheet<T>>) -> Result<Self> {
        Self::new(FieldKind::Superposition { sheets })
    }

    pub fn with_center(mut self, center: Point<T>) -> Self {
        let shift = [center[0] - self.center[0], center[1] - self.center[1]];
        self.center = center;
        if let Some(d) = self.domain.as_mut() {
            d.center = [d.center[0] + shift[0], d.center[1] + shift[1]];
        }
        self
    }

    pub fn with_domain(mut self, domain: Disk<T>) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn kind(&self) -> &FieldKind<T> {
        &self.kind
    }

    /// Location of the family's distinguished point.
    pub fn center(&self) -> Point<T> {
        self.center
    }

    pub fn domain(&self) -> Option<Disk<T>> {
        self.domain
    }

    pub fn dilation(&self) -> T {
        self.dilation
    }

    pub fn amplitude(&self) -> T {
        self.amplitude
    }

    pub fn offset(&self) -> Option<&[T]> {
        self.offset.as_deref()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: T| x.is_finite();
        if !finite(self.dilation) || self.dilation <= T::zero() {
            return Err(Error::InvalidField("dilation must be finite and positive".into()));
        }
        if !finite(self.amplitude) || !finite(self.center[0]) || !finite(self.center[1]) {
            return Err(Error::InvalidField("non-finite amplitude or center".into()));
        }
        if let Some(d) = &self.domain {
            if !(d.radius > T::zero()) {
                return Err(Error::InvalidField("domain radius must be positive".into()));
            }
        }
        match &self.kind {
            FieldKind::BranchFamily { k, q, .. } => {
                if *k < 1 || *q < 2 {
                    return Err(Error::InvalidField(format!(
                        "branch family needs k >= 1 and Q >= 2 (got k = {k}, Q = {q})"
                    )));
                }
            }
            FieldKind::SingleHarmonic { sheet } => check_sheet(sheet)?,
            FieldKind::Superposition { sheets } => {
                if sheets.is_empty() {
                    return Err(Error::InvalidField("superposition needs at least one sheet".into()));
                }
                let n = sheets[0].dim();
                for s in sheets {
                    check_sheet(s)?;
                    if s.dim() != n {
                        return Err(Error::DimensionMismatch { expected: n, found: s.dim() });
                    }
                }
                for (i, a) in sheets.iter().enumerate() {
                    for b in &sheets[i + 1..] {
                        if sheets_coincide(a, b) {
                            return Err(Error::InvalidField(
                                "superposition sheets must be pairwise distinct".into(),
                            ));
                        }
                    }
                }
            }
        }
        if let Some(off) = &self.offset {
            if off.len() != self.n() {
                return Err(Error::DimensionMismatch { expected: self.n(), found: off.len() });
            }
        }
        Ok(())
    }

    /// Multiplicity Q.
    pub fn q(&self) -> usize {
        match &self.kind {
            FieldKind::BranchFamily { q, .. } => *q as usize,
            FieldKind::Superposition { sheets } => sheets.len(),
            FieldKind::SingleHarmonic { .. } => 1,
        }
    }

    /// Target dimension n.
    pub fn n(&self) -> usize {
        match &self.kind {
            FieldKind::BranchFamily { .. } => 2,
            FieldKind::Superposition { sheets } => sheets.first().map_or(0, Sheet::dim),
            FieldKind::SingleHarmonic { sheet } => sheet.dim(),
        }
    }

    /// True when every sheet is a harmonic function (always, for validated specs).
    pub fn is_harmonic(&self) -> bool {
        match &self.kind {
            FieldKind::BranchFamily { .. } => true,
            FieldKind::Superposition { sheets } => sheets.iter().all(Sheet::is_harmonic),
            FieldKind::SingleHarmonic { sheet } => sheet.is_harmonic(),
        }
    }

    /// Homogeneity degree `k/Q` for branch families about their branch point.
    pub fn homogeneity(&self) -> Option<T> {
        match &self.kind {
            FieldKind::BranchFamily { k, q, .. } => {
                Some(T::from_u32(*k).unwrap() / T::from_u32(*q).unwrap())
            }
            _ => None,
        }
    }

    fn local(&self, z: Point<T>) -> Point<T> {
        [self.dilation * (z[0] - self.center[0]), self.dilation * (z[1] - self.center[1])]
    }

    /// Sheet values at `z`, Q blocks of n coordinates, in a fixed but
    /// otherwise meaningless sheet order.
    pub fn sheet_values(&self, z: Point<T>, out: &mut Vec<T>) {
        out.clear();
        let w = self.local(z);
        match &self.kind {
            FieldKind::BranchFamily { k, q, scale } => {
                for val in branch_values(*k, *q, *scale, w) {
                    out.push(val.re);
                    out.push(val.im);
                }
            }
            FieldKind::Superposition { sheets } => {
                for s in sheets {
                    s.eval_into(w, out);
                }
            }
            FieldKind::SingleHarmonic { sheet } => sheet.eval_into(w, out),
        }
        let n = self.n();
        for (i, x) in out.iter_mut().enumerate() {
            *x *= self.amplitude;
            if let Some(off) = &self.offset {
                *x -= off[i % n];
            }
        }
    }

    /// Per-sheet `d/du` and `d/dv` rows, in the same sheet order as
    /// [`FieldSpec::sheet_values`].
    pub fn sheet_gradients_into(&self, z: Point<T>, du: &mut Vec<T>, dv: &mut Vec<T>) -> Result<()> {
        du.clear();
        dv.clear();
        let w = self.local(z);
        match &self.kind {
            FieldKind::BranchFamily { k, q, scale } => {
                if w[0] == T::zero() && w[1] == T::zero() {
                    return Err(Error::Singular { u: z[0].to_f64_lossy(), v: z[1].to_f64_lossy() });
                }
                let wc = Complex::new(w[0], w[1]);
                let factor = T::from_u32(*k).unwrap() / T::from_u32(*q).unwrap();
                for val in branch_values(*k, *q, *scale, w) {
                    // d(a zeta^k)/dw = a k zeta^k / (Q w)
                    push_holomorphic_grad(val * factor / wc, du, dv);
                }
            }
            FieldKind::Superposition { sheets } => {
                for s in sheets {
                    s.grad_into(w, du, dv);
                }
            }
            FieldKind::SingleHarmonic { sheet } => sheet.grad_into(w, du, dv),
        }
        let s = self.amplitude * self.dilation;
        du.iter_mut().chain(dv.iter_mut()).for_each(|x| *x *= s);
        Ok(())
    }

    /// The unordered value at `z`.
    pub fn eval(&self, z: Point<T>) -> QPoint<T> {
        let mut buf = Vec::new();
        self.sheet_values(z, &mut buf);
        QPoint::from_flat(self.q(), self.n(), buf).expect("field shape is consistent")
    }

    /// Per-sheet Jacobians `[d/du, d/dv]`, each row of length n.
    pub fn sheet_gradients(&self, z: Point<T>) -> Result<Vec<[Vec<T>; 2]>> {
        let (mut du, mut dv) = (Vec::new(), Vec::new());
        self.sheet_gradients_into(z, &mut du, &mut dv)?;
        let n = self.n();
        Ok(du
            .chunks(n)
            .zip(dv.chunks(n))
            .map(|(a, b)| [a.to_vec(), b.to_vec()])
            .collect())
    }

    /// Gram entries `(|F_u|^2, |F_v|^2, <F_u, F_v>)` of the embedded map,
    /// summed over sheets.
    pub fn gram(&self, z: Point<T>) -> Result<Gram<T>> {
        let (mut du, mut dv) = (Vec::new(), Vec::new());
        self.sheet_gradients_into(z, &mut du, &mut dv)?;
        Ok(Gram::from_rows(&du, &dv))
    }

    /// Centered finite-difference Jacobian of `xi0 o f`, rows `d/du`, `d/dv`.
    pub fn xi0_jacobian_fd(&self, z: Point<T>, step: T) -> Result<[Vec<T>; 2]> {
        if !(step > T::zero()) || !step.is_finite() {
            return Err(Error::Parameter(format!("finite-difference step must be positive, got {step}")));
        }
        let two_h = step + step;
        let mut rows: [Vec<T>; 2] = [Vec::new(), Vec::new()];
        for (axis, row) in rows.iter_mut().enumerate() {
            let mut plus = z;
            let mut minus = z;
            plus[axis] += step;
            minus[axis] -= step;
            let fp = xi0(&self.eval(plus));
            let fm = xi0(&self.eval(minus));
            *row = fp.iter().zip(&fm).map(|(&a, &b)| (a - b) / two_h).collect();
        }
        Ok(rows)
    }

    /// Smallest distance between two sheet values, `+inf` for Q = 1.
    pub fn sheet_separation(&self, z: Point<T>) -> T {
        self.eval(z).separation()
    }

    /// `Err(Domain)` when the closed disk is not inside the field's domain.
    pub fn check_disk(&self, center: Point<T>, radius: T) -> Result<()> {
        if !(radius >= T::zero()) {
            return Err(Error::Parameter(format!("radius must be non-negative, got {radius}")));
        }
        if let Some(d) = &self.domain {
            let du = center[0] - d.center[0];
            let dv = center[1] - d.center[1];
            let reach = (du * du + dv * dv).sqrt() + radius;
            if reach > d.radius * (T::one() + T::lit(1e-12)) {
                return Err(Error::Domain {
                    u: center[0].to_f64_lossy(),
                    v: center[1].to_f64_lossy(),
                    radius: radius.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    /// `c * f`.
    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.clone();
        out.amplitude *= c;
        if let Some(off) = out.offset.as_mut() {
            off.iter_mut().for_each(|x| *x *= c);
        }
        out
    }

    /// `z -> f(z - shift)`.
    pub fn translated(&self, shift: Point<T>) -> Self {
        let mut out = self.clone();
        out.center = [out.center[0] + shift[0], out.center[1] + shift[1]];
        if let Some(d) = out.domain.as_mut() {
            d.center = [d.center[0] + shift[0], d.center[1] + shift[1]];
        }
        out
    }

    /// `z -> sum_i [[f_i(z) - p]]`.
    pub fn subtract_constant(&self, p: &[T]) -> Result<Self> {
        if p.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: p.len() });
        }
        let mut out = self.clone();
        let off = out.offset.get_or_insert_with(|| vec![T::zero(); p.len()]);
        off.iter_mut().zip(p).for_each(|(o, &x)| *o += x);
        Ok(out)
    }

    /// `x -> f(x0 + r x) / s`.
    pub fn dilated_about(&self, x0: Point<T>, r: T, s: T) -> Result<Self> {
        if !(r > T::zero()) || !(s > T::zero()) {
            return Err(Error::Parameter("dilation radius and normalizer must be positive".into()));
        }
        let mut out = self.clone();
        out.center = [(self.center[0] - x0[0]) / r, (self.center[1] - x0[1]) / r];
        out.dilation = self.dilation * r;
        out.amplitude = self.amplitude / s;
        if let Some(off) = out.offset.as_mut() {
            off.iter_mut().for_each(|x| *x /= s);
        }
        if let Some(d) = out.domain.as_mut() {
            d.center = [(d.center[0] - x0[0]) / r, (d.center[1] - x0[1]) / r];
            d.radius /= r;
        }
        Ok(out)
    }
}

/// Gram entries of a 2 x N Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gram<T> {
    pub uu: T,
    pub vv: T,
    pub uv: T,
}

impl<T: Scalar> Gram<T> {
    pub fn from_rows(du: &[T], dv: &[T]) -> Self {
        let mut g = Gram { uu: T::zero(), vv: T::zero(), uv: T::zero() };
        for (&a, &b) in du.iter().zip(dv) {
            g.uu += a * a;
            g.vv += b * b;
            g.uv += a * b;
        }
        g
    }

    /// `|grad F|^2`.
    pub fn energy_density(&self) -> T {
        self.uu + self.vv
    }

    /// `(|F_u|^2 - |F_v|^2) - 2i <F_u, F_v>`.
    pub fn hopf(&self) -> Complex<T> {
        Complex::new(self.uu - self.vv, -(self.uv + self.uv))
    }
}

fn check_sheet<T: Scalar>(sheet: &Sheet<T>) -> Result<()> {
    if sheet.dim() == 0 {
        return Err(Error::InvalidField("sheet has no components".into()));
    }
    if !sheet.is_harmonic() {
        return Err(Error::NotHarmonic { coefficient: sheet.laplacian_residual().to_f64_lossy() });
    }
    Ok(())
}

fn sheets_coincide<T: Scalar>(a: &Sheet<T>, b: &Sheet<T>) -> bool {
    if a.dim() != b.dim() {
        return false;
    }
    // Distinct polynomials of bounded degree differ at some of these points.
    let probes = [[0.0, 0.0], [0.37, -0.21], [-0.53, 0.44], [0.91, 0.13], [-0.12, -0.83], [0.6, 0.7]];
    let (mut va, mut vb) = (Vec::new(), Vec::new());
    probes.iter().all(|p| {
        let w = [T::lit(p[0]), T::lit(p[1])];
        va.clear();
        vb.clear();
        a.eval_into(w, &mut va);
        b.eval_into(w, &mut vb);
        va.iter().zip(&vb).all(|(x, y)| (*x - *y).abs() <= T::lit(1e-14) * (T::one() + x.abs()))
    })
}

/// The Q values `scale * zeta^k`, `zeta^Q = w`, with the principal argument
/// cut along the negative real axis.
fn branch_values<T: Scalar>(k: u32, q: u32, scale: Complex<T>, w: Point<T>) -> Vec<Complex<T>> {
    let qf = T::from_u32(q).unwrap();
    let kf = T::from_u32(k).unwrap();
    let modulus = (w[0] * w[0] + w[1] * w[1]).sqrt();
    if modulus == T::zero() {
        return vec![Complex::new(T::zero(), T::zero()); q as usize];
    }
    let theta = w[1].atan2(w[0]);
    let radius = modulus.powf(kf / qf);
    let tau = T::PI() + T::PI();
    (0..q)
        .map(|j| {
            let arg = kf * (theta + tau * T::from_u32(j).unwrap()) / qf;
            scale * Complex::from_polar(radius, arg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn branch_family_vanishes_at_its_branch_point() {
        let f = FieldSpec::<f64>::branch(2, 3).unwrap();
        assert_eq!(f.eval([0.0, 0.0]), QPoint::multiple(3, &[0.0, 0.0]).unwrap());
        assert_eq!(f.sheet_separation([0.0, 0.0]), 0.0);
    }

    #[test]
    fn branch_family_at_one_gives_cube_roots_of_unity() {
        let f = FieldSpec::<f64>::branch(2, 3).unwrap();
        let s3 = 3f64.sqrt() / 2.0;
        let expect = QPoint::new(vec![vec![1.0, 0.0], vec![-0.5, s3], vec![-0.5, -s3]]).unwrap();
        let got = f.eval([1.0, 0.0]);
        for (a, b) in got.points().zip(expect.points()) {
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-15);
            assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-15);
        }
        assert_abs_diff_eq!(f.sheet_separation([1.0, 0.0]), 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn branch_family_is_homogeneous() {
        let f = FieldSpec::<f64>::branch_scaled(3, 5, c(0.5, -1.2)).unwrap();
        let amod = c(0.5, -1.2).norm();
        for &(r, th) in &[(0.3, 0.1), (2.0, -2.9), (0.01, 3.1)] {
            let z = [r * f64::cos(th), r * f64::sin(th)];
            for p in f.eval(z).points() {
                let m = (p[0] * p[0] + p[1] * p[1]).sqrt();
                assert_abs_diff_eq!(m, amod * f64::powf(r, 0.6), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn axis_scaling_values_and_gradients() {
        let f = FieldSpec::single(Sheet::axis_scaling(2.0, 3.0)).unwrap();
        assert_eq!(f.eval([1.0, 1.0]), QPoint::new(vec![vec![2.0, 3.0]]).unwrap());
        let g = f.sheet_gradients([0.4, -0.7]).unwrap();
        assert_eq!(g, vec![[vec![2.0, 0.0], vec![0.0, 3.0]]]);
    }

    #[test]
    fn branch_gradient_modulus_at_one() {
        let f = FieldSpec::<f64>::branch(2, 3).unwrap();
        let g = f.sheet_gradients([1.0, 0.0]).unwrap();
        // every branch has |d(zeta^2)/dz| = 2/3 at z = 1
        for [du, _] in &g {
            assert_abs_diff_eq!((du[0] * du[0] + du[1] * du[1]).sqrt(), 2.0 / 3.0, epsilon = 1e-15);
        }
        assert!(matches!(f.sheet_gradients([0.0, 0.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn superposition_gradients_concatenate() {
        let a = Sheet::monomial(1);
        let b = Sheet::axis_scaling(2.0, 5.0);
        let f = FieldSpec::superposition(vec![a.clone(), b.clone()]).unwrap();
        let z = [0.3, 0.8];
        let ga = FieldSpec::single(a).unwrap().sheet_gradients(z).unwrap();
        let gb = FieldSpec::single(b).unwrap().sheet_gradients(z).unwrap();
        assert_eq!(f.sheet_gradients(z).unwrap(), [ga, gb].concat());
    }

    #[test]
    fn fd_jacobian_of_linear_and_constant_fields() {
        let f = FieldSpec::single(Sheet::axis_scaling(2.0, 3.0)).unwrap();
        let j = f.xi0_jacobian_fd([0.2, 0.1], 1e-5).unwrap();
        assert_abs_diff_eq!(j[0][0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(j[1][1], 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(j[0][1], 0.0, epsilon = 1e-9);
        let k = FieldSpec::single(Sheet::constant(&[1.0, -2.0])).unwrap();
        let j = k.xi0_jacobian_fd([0.2, 0.1], 1e-5).unwrap();
        assert!(j.iter().flatten().all(|&x| x == 0.0));
        assert!(f.xi0_jacobian_fd([0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn fd_jacobian_converges_at_second_order_on_branch_family() {
        let f = FieldSpec::<f64>::branch(2, 3).unwrap();
        // generic point: no ties between sorted coordinates
        let z = [0.8, 0.45];
        let exact = f.gram(z).unwrap().energy_density();
        let err = |h: f64| {
            let j = f.xi0_jacobian_fd(z, h).unwrap();
            let fro: f64 = j.iter().flatten().map(|x| x * x).sum();
            (fro - exact).abs()
        };
        let (e1, e2, e3) = (err(4e-3), err(2e-3), err(1e-3));
        let o1 = (e1 / e2).log2();
        let o2 = (e2 / e3).log2();
        assert!(o1 >= 1.9 && o2 >= 1.9, "orders {o1} {o2}");
    }

    #[test]
    fn distinct_constants_have_constant_separation() {
        let f = FieldSpec::superposition(vec![Sheet::constant(&[1.0, 0.0]), Sheet::constant(&[0.0, 2.0])])
            .unwrap();
        for z in [[0.0, 0.0], [3.0, -1.0]] {
            assert_abs_diff_eq!(f.sheet_separation(z), 5f64.sqrt(), epsilon = 1e-15);
        }
        let single = FieldSpec::single(Sheet::<f64>::monomial(2)).unwrap();
        assert_eq!(single.sheet_separation([0.5, 0.5]), f64::INFINITY);
    }

    #[test]
    fn validation_rejects_bad_fields() {
        assert!(FieldSpec::<f64>::branch(0, 3).is_err());
        assert!(FieldSpec::<f64>::branch(1, 1).is_err());
        let u2 = BivariatePoly::new(vec![vec![0.0], vec![0.0], vec![1.0]]);
        assert!(matches!(
            FieldSpec::single(Sheet::polynomial(vec![u2])),
            Err(Error::NotHarmonic { .. })
        ));
        assert!(FieldSpec::superposition(vec![Sheet::<f64>::monomial(1), Sheet::monomial(1)]).is_err());
        assert!(FieldSpec::superposition(vec![Sheet::<f64>::monomial(1), Sheet::constant(&[1.0])]).is_err());
    }

    #[test]
    fn real_part_tables_are_harmonic_and_match_complex_evaluation() {
        let coeffs = vec![c(0.3, -0.1), c(1.0, 2.0), c(-0.5, 0.25), c(0.7, 0.9)];
        let re = BivariatePoly::real_part_of(&coeffs);
        let im = BivariatePoly::imag_part_of(&coeffs);
        assert!(re.is_harmonic() && im.is_harmonic());
        let z = c(0.4, -0.9);
        let p = horner(&coeffs, z);
        assert_abs_diff_eq!(re.eval_with_grad(z.re, z.im).0, p.re, epsilon = 1e-14);
        assert_abs_diff_eq!(im.eval_with_grad(z.re, z.im).0, p.im, epsilon = 1e-14);
    }

    #[test]
    fn affine_transforms_are_exact() {
        let f = FieldSpec::superposition(vec![Sheet::monomial(1), Sheet::monomial(2)]).unwrap();
        let z = [0.3, -0.4];
        let g = f.dilated_about([0.1, 0.2], 0.5, 2.0).unwrap();
        let expect = f.eval([0.1 + 0.5 * z[0], 0.2 + 0.5 * z[1]]);
        let got = g.eval(z);
        for (a, b) in got.points().zip(expect.points()) {
            assert_abs_diff_eq!(a[0], b[0] / 2.0, epsilon = 1e-15);
            assert_abs_diff_eq!(a[1], b[1] / 2.0, epsilon = 1e-15);
        }
        let t = f.translated([1.0, 1.0]);
        let d = crate::qspace::g_metric(&t.eval([1.3, 0.6]), &f.eval(z)).unwrap();
        assert!(d < 1e-14);
        let s = f.subtract_constant(&[1.0, 0.0]).unwrap();
        let shifted: Vec<Vec<f64>> = f.eval(z).points().map(|p| vec![p[0] - 1.0, p[1]]).collect();
        assert_eq!(s.eval(z), QPoint::new(shifted).unwrap());
    }

    #[test]
    fn json_round_trip_validates() {
        let f = FieldSpec::<f64>::branch(2, 3).unwrap().with_center([0.5, 0.0]);
        let js = serde_json::to_string(&f).unwrap();
        let back: FieldSpec<f64> = serde_json::from_str(&js).unwrap();
        assert_eq!(back, f);
        let bad = r#"{"field":{"variant":"branch_family","k":0,"q":3,"scale":[1.0,0.0]},"center":[0,0]}"#;
        assert!(serde_json::from_str::<FieldSpec<f64>>(bad).is_err());
    }

    #[test]
    fn domain_checks() {
        let f = FieldSpec::single(Sheet::<f64>::monomial(1))
            .unwrap()
            .with_domain(Disk { center: [0.0, 0.0], radius: 1.0 });
        assert!(f.check_disk([0.0, 0.0], 1.0).is_ok());
        assert!(matches!(f.check_disk([0.5, 0.0], 0.6), Err(Error::Domain { .. })));
    }
}
