//! Retraction flows, Moser isotopies, gauge flows and the linear part of
//! the gluing morphisms between strata.

mod directed;
mod flow;
mod gauge;
mod glue;
mod interp;
mod solve;

use thiserror::Error;

use crate::foliation::FoliationError;
use crate::linf::LinfError;
use crate::skewcore::Rational;
use crate::stratify::StratifyError;
use crate::symfield::FieldError;

pub use directed::{directed_extension_check, generator, DirectedReport};
pub use flow::{radial_factor, radial_flow, rescaling_check, ComponentScaling, RadialFlow, RescalingReport};
pub use gauge::{gauge_flow, GaugeFamily, GaugeResult, TimeSeries};
pub use glue::{glue_morphism, z_bivector, GlueCaps, GlueMorphism, StratumPackage};
pub use interp::{interpolate_forms, numeric_d, stratum_form, ClosureFamily, FormFamily, Interpolation};
pub use solve::{moser_solve, off_stratum_samples, FlowResult, MoserConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoserError {
    #[error("kernel of the form does not project into the stratum kernel at ({})", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))]
    KernelInclusion(Vec<Rational>),
    #[error("quadrature did not reach tolerance on [0, {s}]")]
    Quadrature { s: f64 },
    #[error("Moser system singular at t = {t}, x = {point:?}")]
    Singular { t: f64, point: Vec<f64> },
    #[error("non-finite residual at t = {t}")]
    NonFinite { t: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("chain map identity fails on {0}")]
    ChainMap(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Stratify(#[from] StratifyError),
    #[error(transparent)]
    Foliation(#[from] FoliationError),
    #[error(transparent)]
    Linf(#[from] LinfError),
}
