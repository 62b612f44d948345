//! Numerical diagnostics for two-dimensional Q-valued maps: the matching
//! metric on unordered Q-points, Dirichlet/height/frequency functionals,
//! the Hopf differential with its conformal completion, oscillation
//! estimates, and blow-up rescaling.
//!
//! The geometric layers ([`qspace`], [`families`], [`quadrature`],
//! [`functionals`]) are generic over [`Scalar`]; the verification layers
//! work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod corpus;
pub mod error;
pub mod families;
pub mod functionals;
pub mod hopf;
pub mod oscillation;
pub mod qspace;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod suite;

pub use error::{Error, Result};
pub use families::{BivariatePoly, Disk, FieldKind, FieldSpec, Gram, Point, Sheet};
pub use qspace::{g_metric, g_metric_bruteforce, xi0, QPoint};
pub use quadrature::DiskGrid;
pub use scalar::Scalar;

pub type QPoint64 = QPoint<f64>;
pub type QPoint32 = QPoint<f32>;
pub type Field = FieldSpec<f64>;
pub type Field32 = FieldSpec<f32>;
