//! Named test fields used by the verification suites.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blowup::GapEntry;
use crate::error::Result;
use crate::families::{BivariatePoly, FieldSpec, Point, Sheet};
use crate::functionals::geometric_radii;

type Field = FieldSpec<f64>;

/// Radii per profile.
pub const PROFILE_RADII: usize = 32;
/// Innermost profile radius as a fraction of the outermost.
pub const PROFILE_SPAN: f64 = 1e-3;
/// Seed of the randomized Courant-Lebesgue corpus.
pub const DEFAULT_SEED: u64 = 20;
/// Size of the randomized Courant-Lebesgue corpus.
pub const RANDOM_FIELDS: usize = 200;

/// A center and the largest radius probed about it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub center: Point<f64>,
    pub r_max: f64,
}

impl Probe {
    pub fn radii(&self) -> Result<Vec<f64>> {
        geometric_radii(self.r_max * PROFILE_SPAN, self.r_max, PROFILE_RADII)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub label: String,
    pub field: Field,
    pub probes: Vec<Probe>,
}

impl CorpusEntry {
    fn new(label: impl Into<String>, field: Field, probes: Vec<Probe>) -> Self {
        Self { label: label.into(), field, probes }
    }

    /// Homogeneous about its first probe (a branch family at its branch point).
    pub fn is_homogeneous_at(&self, probe: &Probe) -> bool {
        self.field.homogeneity().is_some() && probe.center == self.field.center()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn probe(u: f64, v: f64, r_max: f64) -> Probe {
    Probe { center: [u, v], r_max }
}

fn polynomial_probes() -> Vec<Probe> {
    vec![probe(0.0, 0.0, 1.0), probe(0.3, 0.1, 0.8), probe(-0.2, 0.4, 0.6)]
}

fn branch_probes() -> Vec<Probe> {
    vec![probe(0.0, 0.0, 1.0), probe(0.5, 0.0, 0.4), probe(0.0, -0.6, 0.48)]
}

/// Real part of a complex polynomial as a scalar sheet.
fn re_sheet(coeffs: &[Complex64]) -> Sheet<f64> {
    Sheet::polynomial(vec![BivariatePoly::real_part_of(coeffs)])
}

/// Fields whose Hopf differential is a nonzero polynomial: harmonic,
/// non-holomorphic sheets and superpositions of them.
pub fn polynomial_phi_corpus() -> Vec<CorpusEntry> {
    let cubic = re_sheet(&[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let mixed = Sheet::polynomial(vec![
        BivariatePoly::real_part_of(&[c(0.1, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.3, 0.2)]),
        BivariatePoly::imag_part_of(&[c(0.0, 0.0), c(0.5, 0.0), c(0.4, -0.1)]),
    ]);
    let warped = Sheet::polynomial(vec![
        BivariatePoly::real_part_of(&[c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.5)]),
        BivariatePoly::real_part_of(&[c(0.0, 0.0), c(0.0, -0.5), c(0.25, 0.0)]),
    ]);
    let p = polynomial_probes;
    vec![
        CorpusEntry::new("axis(2,0.5)", FieldSpec::single(Sheet::axis_scaling(2.0, 0.5)).unwrap(), p()),
        CorpusEntry::new("re(z^3)", FieldSpec::single(cubic.clone()).unwrap(), p()),
        CorpusEntry::new("mixed-harmonic", FieldSpec::single(mixed.clone()).unwrap(), p()),
        CorpusEntry::new("warped-harmonic", FieldSpec::single(warped.clone()).unwrap(), p()),
        CorpusEntry::new(
            "{axis(1.5,0.5),z^2}",
            FieldSpec::superposition(vec![Sheet::axis_scaling(1.5, 0.5), Sheet::monomial(2)]).unwrap(),
            p(),
        ),
        CorpusEntry::new(
            "{re(z^3),re(z^3)+2}",
            FieldSpec::superposition(vec![cubic, re_sheet(&[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])]).unwrap(),
            p(),
        ),
        CorpusEntry::new(
            "{mixed,warped+(6,6)}",
            FieldSpec::superposition(vec![
                mixed,
                Sheet::polynomial(vec![
                    BivariatePoly::real_part_of(&[c(6.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.5)]),
                    BivariatePoly::real_part_of(&[c(6.0, 0.0), c(0.0, -0.5), c(0.25, 0.0)]),
                ]),
            ])
            .unwrap(),
            p(),
        ),
    ]
}

/// Entries of [`polynomial_phi_corpus`] whose sheets never share a
/// coordinate value on their probe disks, so `xi0 o f` is smooth there and
/// finite differences of it converge at second order.
pub fn smooth_embedding_corpus() -> Vec<CorpusEntry> {
    polynomial_phi_corpus().into_iter().filter(|e| e.label != "{axis(1.5,0.5),z^2}").collect()
}

/// The standard corpus: branch families with their branch points and two
/// regular centers, holomorphic and harmonic single-valued maps, and
/// superpositions. Every entry carries three probes.
pub fn standard_corpus() -> Vec<CorpusEntry> {
    let b = branch_probes;
    let p = polynomial_probes;
    let mut out = Vec::new();
    for (k, q) in [(1, 2), (1, 3), (2, 3), (3, 4), (2, 5), (3, 2)] {
        out.push(CorpusEntry::new(format!("branch({k},{q})"), FieldSpec::branch(k, q).unwrap(), b()));
    }
    out.push(CorpusEntry::new(
        "branch(2,3)*(0.5+1.2i)",
        FieldSpec::branch_scaled(2, 3, c(0.5, 1.2)).unwrap(),
        b(),
    ));
    out.push(CorpusEntry::new(
        "branch(1,2)@(0.2,-0.1)",
        FieldSpec::branch(1, 2).unwrap().with_center([0.2, -0.1]),
        vec![probe(0.2, -0.1, 0.9), probe(0.6, -0.1, 0.32), probe(0.2, 0.4, 0.4)],
    ));
    out.push(CorpusEntry::new("z", FieldSpec::single(Sheet::monomial(1)).unwrap(), p()));
    out.push(CorpusEntry::new("z^2", FieldSpec::single(Sheet::monomial(2)).unwrap(), p()));
    out.push(CorpusEntry::new(
        "z^3+0.5z+0.2",
        FieldSpec::single(Sheet::holomorphic(vec![c(0.2, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)])).unwrap(),
        p(),
    ));
    out.push(CorpusEntry::new(
        "{z,z^2}",
        FieldSpec::superposition(vec![Sheet::monomial(1), Sheet::monomial(2)]).unwrap(),
        p(),
    ));
    out.push(CorpusEntry::new(
        "{(1,0),z}",
        FieldSpec::superposition(vec![Sheet::constant(&[1.0, 0.0]), Sheet::monomial(1)]).unwrap(),
        p(),
    ));
    out.push(CorpusEntry::new(
        "{z,z+3+3i}",
        FieldSpec::superposition(vec![Sheet::monomial(1), Sheet::holomorphic(vec![c(3.0, 3.0), c(1.0, 0.0)])]).unwrap(),
        p(),
    ));
    out.push(CorpusEntry::new(
        "{z,-z,z^2+1}",
        FieldSpec::superposition(vec![
            Sheet::monomial(1),
            Sheet::holomorphic(vec![c(0.0, 0.0), c(-1.0, 0.0)]),
            Sheet::holomorphic(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
        ])
        .unwrap(),
        p(),
    ));
    out.extend(polynomial_phi_corpus());
    out
}

/// `BranchFamily(k, Q)` for `1 <= k < Q <= max_q`, each listing its branch point.
pub fn kq_corpus(max_q: u32) -> Vec<GapEntry> {
    let mut out = Vec::new();
    for q in 2..=max_q {
        for k in 1..q {
            out.push(GapEntry {
                label: format!("branch({k},{q})"),
                field: FieldSpec::branch(k, q).unwrap(),
                points: vec![[0.0, 0.0]],
            });
        }
    }
    out
}

/// A harmonic polynomial field with 1 to 3 sheets in R^2, each component
/// the real part of a random complex polynomial of degree at most 3.
pub fn random_harmonic_field(rng: &mut ChaCha8Rng) -> Field {
    loop {
        let q = rng.gen_range(1..=3usize);
        let sheets = (0..q)
            .map(|_| {
                let comps = (0..2)
                    .map(|_| {
                        let deg = rng.gen_range(1..=3usize);
                        let coeffs: Vec<Complex64> =
                            (0..=deg).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                        BivariatePoly::real_part_of(&coeffs)
                    })
                    .collect();
                Sheet::polynomial(comps)
            })
            .collect();
        if let Ok(f) = FieldSpec::superposition(sheets) {
            return f;
        }
    }
}

/// `count` random harmonic polynomial fields from `seed`.
pub fn random_harmonic_corpus(seed: u64, count: usize) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_harmonic_field(&mut rng)).collect()
}
