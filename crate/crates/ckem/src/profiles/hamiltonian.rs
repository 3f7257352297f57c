//! Reduction of a rank-one (or ν = 0) profile to the single-variable form
//! G(u) used by the classical second-order equation for conformally Einstein
//! Kähler metrics, plus the first-order equation it integrates to.

use super::MomentumProfile;
use crate::error::{CkemError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reduction {
    /// r = 1: u = ν + λx, q = a/λ, p = (bλ − aν)/λ, G = 2λ²u^{n−1}φ.
    RankOne,
    /// ν = 0, r > 1: u = x, q = a, p = b, G = 2u^{n−1}φ.
    NuZero,
}

/// Change of variables (u, G(u)) together with the constants of the reduced
/// equations.
#[derive(Debug)]
pub struct HamiltonianForm<'a> {
    profile: &'a MomentumProfile,
    reduction: Reduction,
    pub q: f64,
    pub p: f64,
    /// Constant of the second-order equation: γ for r = 1, r for ν = 0.
    pub c_const: f64,
    pub n: u32,
}

impl<'a> HamiltonianForm<'a> {
    pub fn u_of_x(&self, x: f64) -> f64 {
        let m = self.profile.params();
        match self.reduction {
            Reduction::RankOne => m.nu + m.lambda * x,
            Reduction::NuZero => x,
        }
    }

    pub fn x_of_u(&self, u: f64) -> f64 {
        let m = self.profile.params();
        match self.reduction {
            Reduction::RankOne => (u - m.nu) / m.lambda,
            Reduction::NuZero => u,
        }
    }

    fn scale(&self) -> f64 {
        let m = self.profile.params();
        match self.reduction {
            Reduction::RankOne => 2.0 * m.lambda * m.lambda,
            Reduction::NuZero => 2.0,
        }
    }

    fn dx_du(&self) -> f64 {
        let m = self.profile.params();
        match self.reduction {
            Reduction::RankOne => 1.0 / m.lambda,
            Reduction::NuZero => 1.0,
        }
    }

    pub fn g(&self, u: f64) -> Result<f64> {
        let x = self.x_of_u(u);
        let phi = self.profile.eval(x)?;
        Ok(self.scale() * u.powi(self.n as i32 - 1) * phi)
    }

    pub fn g_deriv(&self, u: f64) -> Result<f64> {
        let x = self.x_of_u(u);
        let n = self.n as f64;
        let phi = self.profile.eval(x)?;
        let dphi = self.profile.deriv(x)?;
        Ok(self.scale()
            * ((n - 1.0) * u.powi(self.n as i32 - 2) * phi
                + u.powi(self.n as i32 - 1) * dphi * self.dx_du()))
    }

    pub fn g_deriv2(&self, u: f64) -> Result<f64> {
        let x = self.x_of_u(u);
        let n = self.n as f64;
        let phi = self.profile.eval(x)?;
        let dphi = self.profile.deriv(x)?;
        let d2phi = self.profile.deriv2(x)?;
        let dx = self.dx_du();
        Ok(self.scale()
            * ((n - 1.0) * (n - 2.0) * u.powi(self.n as i32 - 3) * phi
                + 2.0 * (n - 1.0) * u.powi(self.n as i32 - 2) * dphi * dx
                + u.powi(self.n as i32 - 1) * d2phi * dx * dx))
    }

    fn check_poles(&self, u: f64) -> Result<()> {
        if u == 0.0 || self.q * u + self.p == 0.0 || self.q * u - self.p == 0.0 {
            Err(CkemError::Domain(format!(
                "reduced equation pole at u = {u}"
            )))
        } else {
            Ok(())
        }
    }
}

/// Build the change of variables; rejected for r > 1 with ν ≠ 0 where no
/// reduction exists.
pub fn to_hamiltonian_form(profile: &MomentumProfile) -> Result<HamiltonianForm<'_>> {
    let m = profile.params();
    if m.r == 1 {
        Ok(HamiltonianForm {
            profile,
            reduction: Reduction::RankOne,
            q: m.a / m.lambda,
            p: (m.b * m.lambda - m.a * m.nu) / m.lambda,
            c_const: m.gamma,
            n: m.n,
        })
    } else if m.nu == 0.0 {
        Ok(HamiltonianForm {
            profile,
            reduction: Reduction::NuZero,
            q: m.a,
            p: m.b,
            c_const: m.r as f64,
            n: m.n,
        })
    } else {
        Err(CkemError::NoReduction)
    }
}

/// First-order residual of the reduced system:
/// G′ − ((2n−1)q/(qu+p) + q/(qu−p))·G − (2μuⁿ − 2c·u^{n−1}(qu+p)²)/((qu+p)(qu−p)).
pub fn dm_first_order_residual(h: &HamiltonianForm<'_>, u: f64) -> Result<f64> {
    h.check_poles(u)?;
    let m = h.profile.params();
    let n = h.n as f64;
    let fp = h.q * u + h.p;
    let fm = h.q * u - h.p;
    let g = h.g(u)?;
    let gp = h.g_deriv(u)?;
    let rhs = (2.0 * m.mu * u.powi(h.n as i32)
        - 2.0 * h.c_const * u.powi(h.n as i32 - 1) * fp * fp)
        / (fp * fm);
    Ok(gp - ((2.0 * n - 1.0) * h.q / fp + h.q / fm) * g - rhs)
}

/// Second-order residual of the reduced system:
/// G″ − (2(n−1)q/(qu+p) + n/u)·G′ + (2n(n−1)q/(u(qu+p)))·G + 2c·u^{n−2}.
pub fn dm_second_order_residual(h: &HamiltonianForm<'_>, u: f64) -> Result<f64> {
    h.check_poles(u)?;
    let n = h.n as f64;
    let fp = h.q * u + h.p;
    let g = h.g(u)?;
    let gp = h.g_deriv(u)?;
    let gpp = h.g_deriv2(u)?;
    Ok(gpp - (2.0 * (n - 1.0) * h.q / fp + n / u) * gp
        + 2.0 * n * (n - 1.0) * h.q / (u * fp) * g
        + 2.0 * h.c_const * u.powi(h.n as i32 - 2))
}
