//! Residual operators certifying that a profile solves the Einstein system.
//!
//! All residuals are evaluated with the profile's own derivatives, so a
//! quadrature table is checked against the differential equations through an
//! independent route (interpolant differentiation, never the integrating
//! factor itself).

use super::MomentumProfile;
use crate::error::{CkemError, Result};

fn coefficients(prof: &MomentumProfile, x: f64) -> Result<(f64, f64, f64, f64)> {
    let p = prof.params();
    let f = p.f(x);
    let s = p.s(x);
    if f == 0.0 {
        return Err(CkemError::Domain(format!(
            "conformal factor vanishes at x = {x}"
        )));
    }
    if s == 0.0 {
        return Err(CkemError::Domain(format!(
            "first-order coefficient pole at x = {x}"
        )));
    }
    let phi = prof.eval(x)?;
    let dphi = prof.deriv(x)?;
    Ok((f, s, phi, dphi))
}

/// First-order residual for rank one with νa ≠ 0:
/// φ′ + (dλ/(λx+ν) − (2d+1)a/f − λa/s)·φ − (μ(ν+λx) − γf²)/(f·s).
pub fn ode_residual_r1(prof: &MomentumProfile, x: f64) -> Result<f64> {
    let p = prof.params();
    if p.r != 1 {
        return Err(CkemError::Domain("rank-one residual needs r = 1".into()));
    }
    let (f, s, phi, dphi) = coefficients(prof, x)?;
    let coef = p.d as f64 * p.lambda / p.nu_lambda(x)
        - (2.0 * p.d as f64 + 1.0) * p.a / f
        - p.lambda * p.a / s;
    let rhs = (p.mu * p.nu_lambda(x) - p.gamma * f * f) / (f * s);
    Ok(dphi + coef * phi - rhs)
}

/// First-order residual for νa = 0 (any rank):
/// φ′ + (dλ/(λx+ν) + (r−1)/x − (2n−1)a/f − λa/s)·φ − (μ(ν+λx) − γf²)/(f·s).
pub fn ode_residual_nu_a_zero(prof: &MomentumProfile, x: f64) -> Result<f64> {
    let p = prof.params();
    if p.nu * p.a != 0.0 {
        return Err(CkemError::Domain("residual form needs nu·a = 0".into()));
    }
    if p.r > 1 && x == 0.0 {
        return Err(CkemError::Domain("pole at x = 0 for r > 1".into()));
    }
    let (f, s, phi, dphi) = coefficients(prof, x)?;
    let coef = p.d as f64 * p.lambda / p.nu_lambda(x) + (p.r as f64 - 1.0) / x
        - (2.0 * p.n as f64 - 1.0) * p.a / f
        - p.lambda * p.a / s;
    let rhs = (p.mu * p.nu_lambda(x) - p.gamma * f * f) / (f * s);
    Ok(dphi + coef * phi - rhs)
}

/// The first-order residual matching the model's family.
pub fn first_order_residual(prof: &MomentumProfile, x: f64) -> Result<f64> {
    let p = prof.params();
    if p.nu * p.a == 0.0 {
        ode_residual_nu_a_zero(prof, x)
    } else {
        ode_residual_r1(prof, x)
    }
}

/// Second-order residual:
/// φ″ + (p′/p − 2an/f)·φ′ + (2(2n−1)a²/f² − 2a(p′/p)/f + (p′/p)′)·φ + μ/f².
pub fn ode_residual_second(prof: &MomentumProfile, x: f64) -> Result<f64> {
    let p = prof.params();
    let f = p.f(x);
    if f == 0.0 {
        return Err(CkemError::Domain(format!(
            "conformal factor vanishes at x = {x}"
        )));
    }
    let phi = prof.eval(x)?;
    let dphi = prof.deriv(x)?;
    let d2phi = prof.deriv2(x)?;
    let n = p.n as f64;
    let plog = p.p_log_deriv(x);
    let plog_p = p.p_log_deriv_prime(x);
    Ok(d2phi
        + (plog - 2.0 * p.a * n / f) * dphi
        + (2.0 * (2.0 * n - 1.0) * p.a * p.a / (f * f) - 2.0 * p.a * plog / f + plog_p) * phi
        + p.mu / (f * f))
}

/// The additional constraint satisfied identically on rank > 1 solutions:
/// (1 − 2ax/f)·φ′ + (p′/p − 2a(n−1)/f − 2ax(p′/p)/f + 2(2n−1)a²x/f²)·φ
///   + μx/f² − r.
pub fn constraint_a(prof: &MomentumProfile, x: f64) -> Result<f64> {
    let p = prof.params();
    if p.r < 2 {
        return Err(CkemError::Domain("constraint applies to r > 1".into()));
    }
    let f = p.f(x);
    if f == 0.0 {
        return Err(CkemError::Domain(format!(
            "conformal factor vanishes at x = {x}"
        )));
    }
    let phi = prof.eval(x)?;
    let dphi = prof.deriv(x)?;
    let n = p.n as f64;
    let plog = p.p_log_deriv(x);
    Ok((1.0 - 2.0 * p.a * x / f) * dphi
        + (plog - 2.0 * p.a * (n - 1.0) / f - 2.0 * p.a * x * plog / f
            + 2.0 * (2.0 * n - 1.0) * p.a * p.a * x / (f * f))
            * phi
        + p.mu * x / (f * f)
        - p.r as f64)
}

/// Residual of the constant-scalar-curvature identity
/// (pφ/f^{2n−1})″ = (p/f^{2n−1})·(k_base/(ν+λx) + r(r−1)/x − k_conf/f²),
/// with k_base = dγ and k_conf = nμ on Einstein models.
pub fn scalar_curvature_ode_residual(
    prof: &MomentumProfile,
    x: f64,
    k_base: f64,
    k_conf: f64,
) -> Result<f64> {
    let (lhs, rhs) = scalar_curvature_ode_terms(prof, x, k_base, k_conf)?;
    Ok(lhs - rhs)
}

/// Both sides of the identity separately. Near the conformal-factor zero the
/// terms grow like f^{−2n−1}, so grid sweeps should judge the residual
/// against this scale rather than absolutely.
pub fn scalar_curvature_ode_terms(
    prof: &MomentumProfile,
    x: f64,
    k_base: f64,
    k_conf: f64,
) -> Result<(f64, f64)> {
    let p = prof.params();
    let f = p.f(x);
    if f == 0.0 {
        return Err(CkemError::Domain(format!(
            "conformal factor vanishes at x = {x}"
        )));
    }
    let phi = prof.eval(x)?;
    let dphi = prof.deriv(x)?;
    let d2phi = prof.deriv2(x)?;
    let n = p.n as f64;
    let pw = p.p(x);
    let pw1 = p.p_prime(x);
    let pw2 = p.p_second(x);

    let a_term = pw1 * phi + pw * dphi;
    let a_term_prime = pw2 * phi + 2.0 * pw1 * dphi + pw * d2phi;
    let fm2n = f.powi(-2 * p.n as i32);
    let lhs = a_term_prime * fm2n * f
        + 2.0 * (1.0 - 2.0 * n) * p.a * a_term * fm2n
        + 2.0 * n * (2.0 * n - 1.0) * p.a * p.a * pw * phi * fm2n / f;

    let rhs = pw
        * fm2n
        * f
        * (k_base / p.nu_lambda(x) + (p.r as f64) * (p.r as f64 - 1.0) / x - k_conf / (f * f));
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{CaseId, ModelParams, ModelSpec};
    use crate::profiles::{ClosedFormExtra, ClosedFormId};

    fn linear_model_profile() -> MomentumProfile {
        MomentumProfile::closed_form(ClosedFormId::C1_9, 1, &ClosedFormExtra::default()).unwrap()
    }

    fn constant_model_profile() -> MomentumProfile {
        MomentumProfile::closed_form(ClosedFormId::C1_11, 1, &ClosedFormExtra::default()).unwrap()
    }

    #[test]
    fn linear_solution_annihilates_first_order_residual() {
        let prof = linear_model_profile();
        for k in 1..=10 {
            let x = 0.09 * k as f64;
            assert!(ode_residual_r1(&prof, x).unwrap().abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn constant_solution_annihilates_nu_a_zero_residual() {
        let prof = constant_model_profile();
        for k in 1..=10 {
            let x = -2.5 * k as f64 / 10.0 - 0.2;
            assert!(
                ode_residual_nu_a_zero(&prof, x).unwrap().abs() < 1e-13,
                "x={x}"
            );
        }
        assert!(ode_residual_nu_a_zero(&prof, -1.0).unwrap().abs() < 1e-13);
    }

    #[test]
    fn second_order_follows_from_first_order() {
        let prof = linear_model_profile();
        assert!(ode_residual_second(&prof, 0.5).unwrap().abs() < 1e-13);
        let prof = constant_model_profile();
        assert!(ode_residual_second(&prof, -2.0).unwrap().abs() < 1e-13);
    }

    #[test]
    fn non_solution_is_rejected() {
        // φ(x) = x² on the linear model's parameters has a visible residual
        let p = linear_model_profile().params().clone();
        let x = 0.5;
        // residual computed by hand with φ=x², φ′=2x, φ″=2
        let f = p.f(x);
        let n = p.n as f64;
        let plog = p.p_log_deriv(x);
        let plog_p = p.p_log_deriv_prime(x);
        let r2 = 2.0
            + (plog - 2.0 * p.a * n / f) * (2.0 * x)
            + (2.0 * (2.0 * n - 1.0) * p.a * p.a / (f * f) - 2.0 * p.a * plog / f + plog_p)
                * (x * x)
            + p.mu / (f * f);
        assert!(r2.abs() > 1e-2, "r2={r2}");
    }

    #[test]
    fn scalar_curvature_identity_on_model_solutions() {
        let prof = linear_model_profile();
        let p = prof.params();
        let k_base = p.d as f64 * p.gamma;
        let k_conf = p.n as f64 * p.mu;
        for &x in &[0.2, 0.5, 0.7] {
            let r = scalar_curvature_ode_residual(&prof, x, k_base, k_conf).unwrap();
            assert!(r.abs() < 1e-12, "x={x}: {r}");
        }
        // the constant-profile model: k_base = 0, k_conf = −(d+2)(d+1)
        let prof = constant_model_profile();
        let p = prof.params();
        assert_eq!(p.gamma, 0.0);
        let k_conf = p.n as f64 * p.mu;
        for &x in &[-4.0, -1.5, -0.3] {
            let r = scalar_curvature_ode_residual(&prof, x, 0.0, k_conf).unwrap();
            assert!(r.abs() < 1e-12, "x={x}: {r}");
        }
        // wrong conformal scalar curvature must be visible
        let prof = linear_model_profile();
        let bad = scalar_curvature_ode_residual(&prof, 0.5, k_base, p.n as f64 * (-3.0) + 1.0);
        assert!(bad.unwrap().abs() > 1e-3);
    }

    #[test]
    fn rank_two_constraint_vanishes_on_solutions() {
        let params = ModelParams::from_spec(&ModelSpec {
            case: CaseId::IV1,
            d: 1,
            r: 2,
            lambda: 1.0,
            nu: 0.0,
            a: 1.0,
            b: -1.0,
            mu: None,
            x0: None,
            x1: None,
        })
        .unwrap();
        let prof = MomentumProfile::quadrature(&params).unwrap();
        assert!(constraint_a(&prof, 2.0).unwrap().abs() < 1e-7);
        // scaling φ shifts the affine constraint: A(2φ) = 2A(φ) − μx/f² + r
        let doubled = {
            let a = constraint_a(&prof, 2.0).unwrap();
            let p = prof.params();
            let f = p.f(2.0);
            2.0 * a + p.r as f64 - p.mu * 2.0 / (f * f)
        };
        assert!(doubled.abs() > 0.1);

        // the conformal factor vanishes at the lower endpoint
        assert!(constraint_a(&prof, 1.0).is_err());
    }

    #[test]
    fn residual_rejects_coefficient_pole() {
        let prof = linear_model_profile();
        // s(x) = x − 1 vanishes at the upper endpoint here
        assert!(ode_residual_r1(&prof, 1.0).is_err());
    }
}
