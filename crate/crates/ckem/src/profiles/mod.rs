//! Momentum profiles φ(x) and the residual operators certifying them.

mod closed;
mod hamiltonian;
mod quadrature;
mod residuals;

pub use closed::{closed_form_phi, ClosedForm, ClosedFormExtra, ClosedFormId};
pub use hamiltonian::{
    dm_first_order_residual, dm_second_order_residual, to_hamiltonian_form, HamiltonianForm,
};
pub use quadrature::{phi_quadrature, QuadTable};
pub use residuals::{
    constraint_a, first_order_residual, ode_residual_nu_a_zero, ode_residual_r1,
    ode_residual_second, scalar_curvature_ode_residual, scalar_curvature_ode_terms,
};

use crate::error::Result;
use crate::params::{Bound, ModelParams};

/// An evaluable momentum profile with analytic-quality first and second
/// derivatives, backed either by a printed closed form or by a cached
/// quadrature table. Immutable once built.
#[derive(Debug, Clone)]
pub struct MomentumProfile {
    params: ModelParams,
    source: Source,
}

#[derive(Debug, Clone)]
enum Source {
    Closed(ClosedForm),
    Table(QuadTable),
}

impl MomentumProfile {
    /// Build the cached quadrature profile of an admissible model.
    pub fn quadrature(params: &ModelParams) -> Result<Self> {
        let table = QuadTable::build(params)?;
        Ok(MomentumProfile {
            params: params.clone(),
            source: Source::Table(table),
        })
    }

    /// Build a closed-form profile together with the model parameters that
    /// realize it.
    pub fn closed_form(id: ClosedFormId, d: u32, extra: &ClosedFormExtra) -> Result<Self> {
        let cf = ClosedForm::new(id, d, extra)?;
        let params = ModelParams::from_spec(&cf.model_spec())?;
        Ok(MomentumProfile {
            params,
            source: Source::Closed(cf),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.source, Source::Closed(_))
    }

    /// Estimated relative quadrature error (zero for closed forms).
    pub fn quadrature_error(&self) -> f64 {
        match &self.source {
            Source::Closed(_) => 0.0,
            Source::Table(t) => t.max_rel_err,
        }
    }

    fn at_endpoint(&self, x: f64) -> Option<f64> {
        match (self.params.x0, self.params.x1) {
            (Bound::Finite(lo), _) if x == lo => Some(self.endpoint_value(false)),
            (_, Bound::Finite(hi)) if x == hi => Some(self.endpoint_value(true)),
            _ => None,
        }
    }

    /// Analytic limit of φ at an interval end (`upper = true` for x1).
    pub fn endpoint_value(&self, upper: bool) -> f64 {
        match &self.source {
            Source::Closed(cf) => {
                let (lo, hi) = cf.domain();
                let e = if upper { hi } else { lo };
                if e.is_finite() {
                    cf.eval(e)
                } else {
                    // x0 = −∞ family tends to a positive constant
                    cf.eval(-1e12)
                }
            }
            Source::Table(t) => {
                if upper {
                    t.upper_value
                } else {
                    t.lower_value
                }
            }
        }
    }

    /// φ(x) on the closure of the momentum interval.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if let Some(v) = self.at_endpoint(x) {
            return Ok(v);
        }
        self.params.require_interior(x)?;
        Ok(match &self.source {
            Source::Closed(cf) => cf.eval(x),
            Source::Table(t) => t.eval(x),
        })
    }

    /// φ′(x).
    pub fn deriv(&self, x: f64) -> Result<f64> {
        if self.at_endpoint(x).is_none() {
            self.params.require_interior(x)?;
        }
        Ok(match &self.source {
            Source::Closed(cf) => cf.deriv(x),
            Source::Table(t) => t.deriv(x),
        })
    }

    /// φ″(x).
    pub fn deriv2(&self, x: f64) -> Result<f64> {
        if self.at_endpoint(x).is_none() {
            self.params.require_interior(x)?;
        }
        Ok(match &self.source {
            Source::Closed(cf) => cf.deriv2(x),
            Source::Table(t) => t.deriv2(x),
        })
    }
}

/// CSV table of a profile on a grid: x, phi, dphi and the two certifying
/// residuals, one row per grid point.
pub fn profile_csv(profile: &MomentumProfile, grid: &[f64]) -> Result<String> {
    let mut out = String::from("x,phi,dphi,residual_first,residual_second\n");
    for &x in grid {
        let phi = profile.eval(x)?;
        let dphi = profile.deriv(x)?;
        let r1 = first_order_residual(profile, x).unwrap_or(f64::NAN);
        let r2 = ode_residual_second(profile, x).unwrap_or(f64::NAN);
        out.push_str(&format!("{x},{phi},{dphi},{r1},{r2}\n"));
    }
    Ok(out)
}
