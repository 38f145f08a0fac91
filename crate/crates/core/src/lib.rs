//! Three-mode spin-1 condensate spin mixing: exact and truncated-Wigner
//! evolution, quadrature entanglement measures, undepleted-pump formulas and
//! parameter scans.

pub mod analytic;
pub mod error;
pub mod exact;
pub mod figures;
pub mod measures;
pub mod model;
pub mod output;
pub mod scalar;
pub mod scans;
pub mod tridiag;
pub mod validate;
pub mod wigner;

pub use error::{Error, Result};
pub use model::{
    Mode, ModelParams, Moment, MomentId, MomentSet, Monomial, SeedKind, SeedSpec, Signal,
};
pub use scalar::Real;

pub type ModelParams64 = ModelParams<f64>;
pub type ModelParams32 = ModelParams<f32>;
pub type MomentSet64 = MomentSet<f64>;
pub type MomentSet32 = MomentSet<f32>;
pub type SectorState64 = exact::SectorState<f64>;
pub type SectorState32 = exact::SectorState<f32>;
pub type EntanglementReport64 = measures::EntanglementReport<f64>;
pub type EntanglementReport32 = measures::EntanglementReport<f32>;
pub type WignerEnsemble64 = wigner::WignerEnsemble<f64>;
pub type WignerEnsemble32 = wigner::WignerEnsemble<f32>;
pub type WignerRun64 = wigner::WignerRun<f64>;
pub type WignerRun32 = wigner::WignerRun<f32>;
