//! Numerical library for momentum-construction models of globally
//! conformally Kähler Einstein metrics on line/vector-bundle charts:
//! momentum profiles and their certifying ODE residuals, Kähler potential
//! reconstruction, local metric assembly with finite-difference oracles,
//! Einstein-equation certification, and fiber completeness classification.

pub mod cheb;
pub mod completeness;
pub mod corollary;
pub mod error;
pub mod geometry;
pub mod par;
pub mod params;
pub mod profiles;
pub mod quad;
pub mod reconstruction;
pub mod report;
pub mod verify;

pub use error::{CkemError, Result};
pub use params::{
    gamma_for_case, mu_for_case_iv2, validate, Bound, CaseId, ModelParams, ModelSpec,
};
pub use profiles::MomentumProfile;
pub use reconstruction::Reconstruction;
