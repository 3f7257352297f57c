//! Local metric assembly and numerical certification of the conformal
//! Einstein equation.
//!
//! On a chart the Kähler potential is Φ(z,w) = νφ₀(z) + F(t) with
//! t = λφ₀(z) + log‖w‖², and the metric matrix T = ∂²Φ/∂Z^t∂Z̄ has closed
//! block formulas in terms of F′ = x(t) and F″ = φ(x). Every closed form
//! here is paired with a finite-difference + dense-linear-algebra oracle in
//! the tests and the verification suite.

mod base;
pub mod fd;
mod matrix;

pub use base::{BaseKind, BaseModel};
pub use matrix::HermitianMatrix;

use num_complex::Complex64;

use crate::error::{CkemError, Result};
use crate::params::ModelParams;
use crate::reconstruction::Reconstruction;

/// A chart point (z, w) with w ≠ 0.
#[derive(Debug, Clone)]
pub struct LocalPoint {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl LocalPoint {
    pub fn new(z: Vec<Complex64>, w: Vec<Complex64>) -> Result<Self> {
        if w.iter().map(|v| v.norm_sqr()).sum::<f64>() <= 0.0 {
            return Err(CkemError::Domain(
                "fiber coordinate w must be nonzero".into(),
            ));
        }
        Ok(LocalPoint { z, w })
    }

    pub fn rho2(&self) -> f64 {
        self.w.iter().map(|v| v.norm_sqr()).sum()
    }

    /// t = λφ₀(z) + log ρ².
    pub fn fiber_log(&self, base: &BaseModel, lambda: f64) -> f64 {
        lambda * base.potential(&self.z) + self.rho2().ln()
    }

    fn combined(&self) -> Vec<Complex64> {
        let mut zw = self.z.clone();
        zw.extend_from_slice(&self.w);
        zw
    }
}

/// Validated chart data at a point: t inside the reconstruction's interval
/// and the resulting (x, φ).
struct PointState {
    t: f64,
    x: f64,
    phi: f64,
}

fn point_state(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    point: &LocalPoint,
) -> Result<PointState> {
    if !base.contains(&point.z) {
        return Err(CkemError::Domain("z outside the base chart".into()));
    }
    if point.z.len() != params.d as usize || point.w.len() != params.r as usize {
        return Err(CkemError::Domain(
            "coordinate dimensions do not match the model".into(),
        ));
    }
    let t = point.fiber_log(base, params.lambda);
    let x = recon.x_of_t(t)?;
    let phi = recon.phi(x);
    Ok(PointState { t, x, phi })
}

/// Kähler potential Φ = νφ₀(z) + F(t).
pub fn potential(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    point: &LocalPoint,
) -> Result<f64> {
    let st = point_state(base, recon, params, point)?;
    Ok(params.nu * base.potential(&point.z) + recon.f_of_t(st.t)?)
}

/// Assemble the metric blocks from given momentum data (x, φ); no
/// admissibility check, so deliberately inadmissible data can be probed.
pub fn metric_from_momentum_data(
    base: &BaseModel,
    nu: f64,
    lambda: f64,
    x: f64,
    phi: f64,
    point: &LocalPoint,
) -> HermitianMatrix {
    assemble_metric(base, nu, lambda, x, phi, point)
}

/// Assemble the metric blocks from given (x, φ); no admissibility check.
pub(crate) fn assemble_metric(
    base: &BaseModel,
    nu: f64,
    lambda: f64,
    x: f64,
    phi: f64,
    point: &LocalPoint,
) -> HermitianMatrix {
    let d = point.z.len();
    let r = point.w.len();
    let rho2 = point.rho2();
    let u = nu + lambda * x;
    let h0 = base.hessian(&point.z);
    let dz = base.dphi_dz(&point.z);
    let mut t_mat = HermitianMatrix::zeros(d + r);
    for i in 0..d {
        for j in 0..d {
            let v = h0.get(i, j) * u + dz[i] * dz[j].conj() * (lambda * lambda * phi);
            t_mat.set(i, j, v);
        }
    }
    for i in 0..d {
        for s in 0..r {
            let v = dz[i] * point.w[s] * (lambda * phi / rho2);
            t_mat.set(i, d + s, v);
            t_mat.set(d + s, i, v.conj());
        }
    }
    for s in 0..r {
        for tau in 0..r {
            let mut v = point.w[s].conj() * point.w[tau] * ((phi - x) / (rho2 * rho2));
            if s == tau {
                v += x / rho2;
            }
            t_mat.set(d + s, d + tau, v);
        }
    }
    t_mat
}

/// Closed-form metric matrix T at a point; errors when the result is not
/// positive definite (momentum positivity violated).
pub fn metric_closed_form(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    point: &LocalPoint,
) -> Result<HermitianMatrix> {
    let st = point_state(base, recon, params, point)?;
    let t_mat = assemble_metric(base, params.nu, params.lambda, st.x, st.phi, point);
    if !t_mat.is_positive_definite() {
        return Err(CkemError::NotPositiveDefinite);
    }
    Ok(t_mat)
}

/// Closed-form inverse metric from the block formulas.
pub fn metric_inverse_closed_form(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    point: &LocalPoint,
) -> Result<HermitianMatrix> {
    let st = point_state(base, recon, params, point)?;
    let d = params.d as usize;
    let r = params.r as usize;
    let rho2 = point.rho2();
    let u = params.nu_lambda(st.x);
    let lambda = params.lambda;
    if u == 0.0 || st.x == 0.0 || st.phi == 0.0 {
        return Err(CkemError::Singular("inverse blocks degenerate".into()));
    }
    let h0_inv = base.hessian_inverse(&point.z)?;
    let dz = base.dphi_dz(&point.z);
    // column H₀⁻¹ ∂φ₀/∂z^t
    let mut hv = vec![Complex64::new(0.0, 0.0); d];
    for i in 0..d {
        for j in 0..d {
            hv[i] += h0_inv.get(i, j) * dz[j];
        }
    }
    let q_scalar = base.grad_quadratic(&point.z)?;

    let mut out = HermitianMatrix::zeros(d + r);
    for i in 0..d {
        for j in 0..d {
            out.set(i, j, h0_inv.get(i, j) / u);
        }
    }
    for i in 0..d {
        for s in 0..r {
            let v = hv[i] * point.w[s] * (-lambda / u);
            out.set(i, d + s, v);
            out.set(d + s, i, v.conj());
        }
    }
    let mixed = 1.0 / st.phi - 1.0 / st.x + lambda * lambda * q_scalar / u;
    for s in 0..r {
        for tau in 0..r {
            let mut v = point.w[s].conj() * point.w[tau] * mixed;
            if s == tau {
                v += rho2 / st.x;
            }
            out.set(d + s, d + tau, v);
        }
    }
    Ok(out)
}

/// Closed-form determinant det T = ρ^{−2r}·x^{r−1}·φ·(ν+λx)^d·det H₀.
pub fn metric_det_closed_form(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    point: &LocalPoint,
) -> Result<f64> {
    let st = point_state(base, recon, params, point)?;
    let rho2 = point.rho2();
    Ok(rho2.powi(-(params.r as i32))
        * st.x.powi(params.r as i32 - 1)
        * st.phi
        * params.nu_lambda(st.x).powi(params.d as i32)
        * base.hessian_det(&point.z))
}

/// ∂t/∂Z^t ∂t/∂Z̄ as a matrix (rank one).
fn dt_outer(base: &BaseModel, params: &ModelParams, point: &LocalPoint) -> HermitianMatrix {
    let d = params.d as usize;
    let r = params.r as usize;
    let rho2 = point.rho2();
    let dz = base.dphi_dz(&point.z);
    // column ∂t/∂Z^t has entries λ·∂φ₀/∂z_i and w̄_s/ρ²
    let col: Vec<Complex64> = dz
        .iter()
        .map(|v| v * params.lambda)
        .chain(point.w.iter().map(|v| v.conj() / rho2))
        .collect();
    HermitianMatrix::from_fn(d + r, |i, j| col[i] * col[j].conj())
}

/// ∂²t/∂Z^t∂Z̄ (block diagonal).
fn dt_hessian(base: &BaseModel, params: &ModelParams, point: &LocalPoint) -> HermitianMatrix {
    let d = params.d as usize;
    let r = params.r as usize;
    let rho2 = point.rho2();
    let h0 = base.hessian(&point.z);
    let mut out = HermitianMatrix::zeros(d + r);
    for i in 0..d {
        for j in 0..d {
            out.set(i, j, h0.get(i, j) * params.lambda);
        }
    }
    for s in 0..r {
        for tau in 0..r {
            let mut v = -point.w[s].conj() * point.w[tau] / (rho2 * rho2);
            if s == tau {
                v += 1.0 / rho2;
            }
            out.set(d + s, d + tau, v);
        }
    }
    out
}

/// The two trace identities, as deviations:
/// Tr(T⁻¹ ∂t∂t̄) − 1/φ and Tr(T⁻¹ ∂²t) − (λd/(ν+λx) + (r−1)/x).
/// The inverse is taken by dense LU, independent of the closed-form blocks.
pub fn trace_identities(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    point: &LocalPoint,
) -> Result<(f64, f64)> {
    let st = point_state(base, recon, params, point)?;
    let t_mat = assemble_metric(base, params.nu, params.lambda, st.x, st.phi, point);
    let t_inv = t_mat.lu_inverse()?;
    let tr1 = t_inv.trace_product(&dt_outer(base, params, point));
    let tr2 = t_inv.trace_product(&dt_hessian(base, params, point));
    let expect2 =
        params.lambda * params.d as f64 / params.nu_lambda(st.x) + (params.r as f64 - 1.0) / st.x;
    Ok((tr1.re - 1.0 / st.phi, tr2.re - expect2))
}

/// Conformal-factor function f = a·x(t) + b as a scalar field on the chart.
fn conformal_factor_field<'a>(
    base: &'a BaseModel,
    recon: &'a Reconstruction,
    params: &'a ModelParams,
) -> impl Fn(&[Complex64]) -> Result<f64> + 'a {
    let d = params.d as usize;
    move |zw: &[Complex64]| {
        let (z, w) = zw.split_at(d);
        let rho2: f64 = w.iter().map(|v| v.norm_sqr()).sum();
        let t = params.lambda * base.potential(z) + rho2.ln();
        Ok(params.f(recon.x_of_t(t)?))
    }
}

/// log det T as a scalar field, via closed-form assembly and LU determinant.
fn log_det_field<'a>(
    base: &'a BaseModel,
    recon: &'a Reconstruction,
    params: &'a ModelParams,
) -> impl Fn(&[Complex64]) -> Result<f64> + 'a {
    let d = params.d as usize;
    move |zw: &[Complex64]| {
        let (z, w) = zw.split_at(d);
        let rho2: f64 = w.iter().map(|v| v.norm_sqr()).sum();
        let t = params.lambda * base.potential(z) + rho2.ln();
        let x = recon.x_of_t(t)?;
        let point = LocalPoint {
            z: z.to_vec(),
            w: w.to_vec(),
        };
        let t_mat = assemble_metric(base, params.nu, params.lambda, x, recon.phi(x), &point);
        let det = t_mat.lu_det();
        if det.re <= 0.0 {
            return Err(CkemError::NotPositiveDefinite);
        }
        Ok(det.re.ln())
    }
}

/// Laplacian and squared gradient of f against their closed forms:
/// (Δ_{g_F} f − a(pφ)′/p, |df|²_{g_F} − 2a²φ), both by brute-force traces.
pub fn f_identities(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    point: &LocalPoint,
) -> Result<(f64, f64)> {
    let st = point_state(base, recon, params, point)?;
    let t_mat = assemble_metric(base, params.nu, params.lambda, st.x, st.phi, point);
    let t_inv = t_mat.lu_inverse()?;
    let zw = point.combined();
    let f_field = conformal_factor_field(base, recon, params);

    // wider step: the Laplacian identity is checked to 1e-7, so the
    // second-difference noise floor has to sit well below it
    let hess_f = fd::complex_hessian_h(&f_field, &zw, 1.5e-3)?;
    let lap = t_inv.trace_product(&hess_f).re;
    let lap_closed = params.a * (recon.dphi(st.x) + params.p_log_deriv(st.x) * st.phi);

    let grad = fd::complex_gradient(&f_field, &zw)?;
    // 2·(∂f/∂Z̄)·T⁻¹·(∂f/∂Z^t); for real f the ∂/∂Z̄ entries are conjugates
    let m = grad.len();
    let mut quad = Complex64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            quad += grad[i].conj() * t_inv.get(i, j) * grad[j];
        }
    }
    let df2 = 2.0 * quad.re;
    let df2_closed = 2.0 * params.a * params.a * st.phi;

    Ok((lap - lap_closed, df2 - df2_closed))
}

/// Componentwise residual of the conformal Einstein equation
/// (2(n−1)/f)·∂∂̄f = ((μ − 2fΔf + (2n−1)|df|²)/f²)·T + ∂∂̄ log det T,
/// with the complex Hessians by central finite differences and the scalar
/// invariants by their closed forms. `mu` defaults to the model's value; a
/// perturbed value makes the residual a falsifiability probe.
pub fn einstein_residual_with_mu(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    point: &LocalPoint,
    mu: f64,
) -> Result<f64> {
    let st = point_state(base, recon, params, point)?;
    let f0 = params.f(st.x);
    let n = params.n as f64;
    let t_mat = assemble_metric(base, params.nu, params.lambda, st.x, st.phi, point);
    let zw = point.combined();

    let hess_f = fd::complex_hessian(&conformal_factor_field(base, recon, params), &zw)?;
    let hess_logdet = fd::complex_hessian(&log_det_field(base, recon, params), &zw)?;

    let lap = params.a * (recon.dphi(st.x) + params.p_log_deriv(st.x) * st.phi);
    let df2 = 2.0 * params.a * params.a * st.phi;
    let scalar = (mu - 2.0 * f0 * lap + (2.0 * n - 1.0) * df2) / (f0 * f0);

    let m = zw.len();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let lhs = hess_f.get(i, j) * (2.0 * (n - 1.0) / f0);
            let rhs = t_mat.get(i, j) * scalar + hess_logdet.get(i, j);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

pub fn einstein_residual(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    point: &LocalPoint,
) -> Result<f64> {
    einstein_residual_with_mu(base, recon, params, point, params.mu)
}

/// Scalar curvature (halved) of the conformal metric by the trace formula
/// k = f²k_{g_F} + 2(2n−1)f·Δf − n(2n−1)|df|²; equals nμ on Einstein models.
pub fn conformal_scalar_curvature(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    point: &LocalPoint,
) -> Result<f64> {
    let st = point_state(base, recon, params, point)?;
    let f0 = params.f(st.x);
    let n = params.n as f64;
    let t_mat = assemble_metric(base, params.nu, params.lambda, st.x, st.phi, point);
    let t_inv = t_mat.lu_inverse()?;
    let zw = point.combined();
    let hess_logdet = fd::complex_hessian(&log_det_field(base, recon, params), &zw)?;
    let k_gf = -t_inv.trace_product(&hess_logdet).re;
    let lap = params.a * (recon.dphi(st.x) + params.p_log_deriv(st.x) * st.phi);
    let df2 = 2.0 * params.a * params.a * st.phi;
    Ok(f0 * f0 * k_gf + 2.0 * (2.0 * n - 1.0) * f0 * lap - n * (2.0 * n - 1.0) * df2)
}

/// Numeric check that the base is Einstein: max |Ric(g₀) + γ_base·(−g₀)|
/// componentwise, with Ric from the finite-difference Hessian of
/// −log det(∂∂̄φ₀).
pub fn base_einstein_defect(base: &BaseModel, z: &[Complex64]) -> Result<f64> {
    let logdet = |zz: &[Complex64]| -> Result<f64> {
        let det = base.hessian_det(zz);
        if det <= 0.0 {
            return Err(CkemError::Singular("base Hessian determinant".into()));
        }
        Ok(det.ln())
    };
    let ric = fd::complex_hessian(&logdet, z)?; // this is −Ric
    let h0 = base.hessian(z);
    let gamma = base.einstein_constant();
    let mut worst: f64 = 0.0;
    for i in 0..z.len() {
        for j in 0..z.len() {
            let defect = -ric.get(i, j) - h0.get(i, j) * gamma;
            worst = worst.max(defect.norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{ClosedFormExtra, ClosedFormId, MomentumProfile};

    fn linear_model() -> (ModelParams, Reconstruction) {
        let prof = MomentumProfile::closed_form(ClosedFormId::C1_9, 1, &ClosedFormExtra::default())
            .unwrap();
        // printed normalization F = e^t: anchor F(0) = 1 at x = 1
        let recon = Reconstruction::with_anchor(&prof, 1.0, 0.0, 1.0).unwrap();
        (prof.params().clone(), recon)
    }

    fn quadratic_model() -> (ModelParams, Reconstruction) {
        let prof =
            MomentumProfile::closed_form(ClosedFormId::C1_11, 1, &ClosedFormExtra::default())
                .unwrap();
        let recon = Reconstruction::build(&prof).unwrap();
        (prof.params().clone(), recon)
    }

    #[test]
    fn potential_at_the_printed_normalization() {
        let (params, recon) = linear_model();
        let base = BaseModel::new(BaseKind::Ball, 1.0, 1).unwrap();
        let point = LocalPoint::new(
            vec![Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.5, 0.0)],
        )
        .unwrap();
        // t = log 0.25, Φ = ν·0 + e^t = 0.25
        let v = potential(&base, &recon, &params, &point).unwrap();
        assert!((v - 0.25).abs() < 1e-9, "{v}");
    }

    #[test]
    fn metric_matches_numeric_hessian_of_potential() {
        let (params, recon) = quadratic_model();
        let base = BaseModel::new(BaseKind::Flat, 1.0, 1).unwrap();
        let point = LocalPoint::new(
            vec![Complex64::new(1.0, 0.0)],
            vec![Complex64::new(1.0, 0.0)],
        )
        .unwrap();
        let t_mat = metric_closed_form(&base, &recon, &params, &point).unwrap();
        assert!(t_mat.hermiticity_defect() < 1e-12);

        let d = params.d as usize;
        let phi_field = |zw: &[Complex64]| -> Result<f64> {
            let (z, w) = zw.split_at(d);
            let rho2: f64 = w.iter().map(|v| v.norm_sqr()).sum();
            let t = params.lambda * base.potential(z) + rho2.ln();
            Ok(params.nu * base.potential(z) + recon.f_of_t(t)?)
        };
        let oracle = fd::complex_hessian(&phi_field, &point.combined()).unwrap();
        assert!(
            t_mat.max_abs_diff(&oracle) < 1e-6,
            "defect {}",
            t_mat.max_abs_diff(&oracle)
        );
    }

    #[test]
    fn inverse_and_determinant_match_dense_oracles() {
        let (params, recon) = linear_model();
        let base = BaseModel::new(BaseKind::Ball, 1.0, 1).unwrap();
        let point = LocalPoint::new(
            vec![Complex64::new(0.2, -0.1)],
            vec![Complex64::new(0.4, 0.3)],
        )
        .unwrap();
        let t_mat = metric_closed_form(&base, &recon, &params, &point).unwrap();
        let inv = metric_inverse_closed_form(&base, &recon, &params, &point).unwrap();
        assert!(t_mat.product_identity_defect(&inv) < 1e-10);
        let det = metric_det_closed_form(&base, &recon, &params, &point).unwrap();
        let lu = t_mat.lu_det();
        assert!((det - lu.re).abs() < 1e-8 * det.abs());
        assert!(lu.im.abs() < 1e-12);
    }

    #[test]
    fn determinant_printed_example() {
        // flat base, d = r = 1, z = 0, w = e⁻¹: t = −2, x = −2, φ = 1,
        // det T = e²·1·2·1 = 2e²
        let (params, recon) = quadratic_model();
        let base = BaseModel::new(BaseKind::Flat, 1.0, 1).unwrap();
        let point = LocalPoint::new(
            vec![Complex64::new(0.0, 0.0)],
            vec![Complex64::new((-1.0f64).exp(), 0.0)],
        )
        .unwrap();
        let det = metric_det_closed_form(&base, &recon, &params, &point).unwrap();
        let expect = 2.0 * (2.0f64).exp();
        assert!((det - expect).abs() < 1e-8 * expect, "{det} vs {expect}");
    }

    #[test]
    fn trace_identities_hold() {
        let (params, recon) = linear_model();
        let base = BaseModel::new(BaseKind::Ball, 1.0, 1).unwrap();
        let point = LocalPoint::new(
            vec![Complex64::new(0.15, 0.25)],
            vec![Complex64::new(0.3, -0.2)],
        )
        .unwrap();
        let (tr1, tr2) = trace_identities(&base, &recon, &params, &point).unwrap();
        assert!(tr1.abs() < 1e-8, "{tr1}");
        assert!(tr2.abs() < 1e-8, "{tr2}");
    }

    #[test]
    fn f_identities_hold() {
        let (params, recon) = linear_model();
        let base = BaseModel::new(BaseKind::Ball, 1.0, 1).unwrap();
        let point = LocalPoint::new(
            vec![Complex64::new(-0.2, 0.1)],
            vec![Complex64::new(0.25, 0.35)],
        )
        .unwrap();
        let (lap, df2) = f_identities(&base, &recon, &params, &point).unwrap();
        assert!(lap.abs() < 1e-7, "{lap}");
        assert!(df2.abs() < 1e-7, "{df2}");
    }

    #[test]
    fn einstein_residual_small_on_model_and_sensitive_to_mu() {
        let (params, recon) = linear_model();
        let base = BaseModel::new(BaseKind::Ball, 1.0, 1).unwrap();
        let point = LocalPoint::new(
            vec![Complex64::new(0.1, -0.15)],
            vec![Complex64::new(0.45, 0.1)],
        )
        .unwrap();
        let res = einstein_residual(&base, &recon, &params, &point).unwrap();
        assert!(res < 1e-4, "residual {res}");
        let bad =
            einstein_residual_with_mu(&base, &recon, &params, &point, params.mu + 0.1).unwrap();
        assert!(bad > 1e-2, "perturbed residual {bad}");
    }

    #[test]
    fn scalar_curvature_equals_n_mu() {
        let (params, recon) = linear_model();
        let base = BaseModel::new(BaseKind::Ball, 1.0, 1).unwrap();
        let point = LocalPoint::new(
            vec![Complex64::new(0.2, 0.0)],
            vec![Complex64::new(0.5, -0.1)],
        )
        .unwrap();
        let k = conformal_scalar_curvature(&base, &recon, &params, &point).unwrap();
        let expect = params.n as f64 * params.mu;
        assert!((k - expect).abs() < 1e-3, "{k} vs {expect}");
    }

    #[test]
    fn potential_ignores_base_at_fixed_t_when_nu_vanishes() {
        // ν = 0: Φ = F(t) depends on (z, w) only through t
        let (params, recon) = quadratic_model();
        assert_eq!(params.nu, 0.0);
        let base = BaseModel::new(BaseKind::Flat, 1.0, 1).unwrap();
        let z1 = vec![Complex64::new(0.3, -0.2)];
        let z2 = vec![Complex64::new(-0.6, 0.45)];
        let t_target = -1.4;
        let mk = |z: Vec<Complex64>| {
            let rho2 = (t_target - params.lambda * base.potential(&z)).exp();
            LocalPoint::new(z, vec![Complex64::new(rho2.sqrt(), 0.0)]).unwrap()
        };
        let v1 = potential(&base, &recon, &params, &mk(z1)).unwrap();
        let v2 = potential(&base, &recon, &params, &mk(z2)).unwrap();
        assert!((v1 - v2).abs() < 1e-10, "{v1} vs {v2}");
    }

    #[test]
    fn determinant_scaling_with_the_fiber_norm() {
        // w ↦ 2w changes det exactly through ρ and the momentum data
        let (params, recon) = quadratic_model();
        let base = BaseModel::new(BaseKind::Flat, 1.0, 1).unwrap();
        let z = vec![Complex64::new(0.4, 0.1)];
        let w1 = vec![Complex64::new(0.2, -0.1)];
        let w2: Vec<Complex64> = w1.iter().map(|v| v * 2.0).collect();
        let p1 = LocalPoint::new(z.clone(), w1).unwrap();
        let p2 = LocalPoint::new(z, w2).unwrap();
        let lu1 = metric_closed_form(&base, &recon, &params, &p1)
            .unwrap()
            .lu_det()
            .re;
        let lu2 = metric_closed_form(&base, &recon, &params, &p2)
            .unwrap()
            .lu_det()
            .re;
        // predicted ratio from the closed formula's ρ and F-dependence
        let t1 = p1.fiber_log(&base, params.lambda);
        let t2 = p2.fiber_log(&base, params.lambda);
        let (x1, x2) = (recon.x_of_t(t1).unwrap(), recon.x_of_t(t2).unwrap());
        let ratio = (p1.rho2() / p2.rho2())
            * (recon.phi(x2) / recon.phi(x1))
            * (params.nu_lambda(x2) / params.nu_lambda(x1)).powi(params.d as i32);
        assert!((lu2 / lu1 - ratio).abs() < 1e-10 * ratio.abs());
    }

    #[test]
    fn base_models_are_einstein() {
        for (kind, scale) in [
            (BaseKind::Flat, 1.0),
            (BaseKind::Ball, 1.0),
            (BaseKind::Ball, 2.5),
            (BaseKind::FubiniStudyChart, 1.5),
        ] {
            let base = BaseModel::new(kind, scale, 2).unwrap();
            let z = vec![Complex64::new(0.2, -0.1), Complex64::new(-0.15, 0.3)];
            let defect = base_einstein_defect(&base, &z).unwrap();
            assert!(defect < 1e-5, "{kind:?}: {defect}");
        }
    }

    #[test]
    fn unitary_fiber_rotation_is_an_isometry() {
        let params = ModelParams::from_spec(&crate::params::ModelSpec {
            case: crate::params::CaseId::IV1,
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
        let recon = Reconstruction::build(&prof).unwrap();
        let base = BaseModel::new(BaseKind::FubiniStudyChart, 1.0, 1).unwrap();
        let z = vec![Complex64::new(0.2, 0.1)];
        let w = vec![Complex64::new(0.9, 0.2), Complex64::new(-0.3, 0.6)];
        let p1 = LocalPoint::new(z.clone(), w.clone()).unwrap();
        // a unitary rotation of the fiber: [[c, s], [−s̄, c]] with |c|²+|s|²=1
        let c = Complex64::new(0.6, 0.0);
        let s = Complex64::new(0.48, 0.64);
        let w2 = vec![c * w[0] + s * w[1], -s.conj() * w[0] + c * w[1]];
        let p2 = LocalPoint::new(z, w2).unwrap();
        assert!((p1.rho2() - p2.rho2()).abs() < 1e-14);
        let d1 = metric_det_closed_form(&base, &recon, &params, &p1).unwrap();
        let d2 = metric_det_closed_form(&base, &recon, &params, &p2).unwrap();
        assert!((d1 - d2).abs() < 1e-12 * d1.abs());
        let (a1, b1) = trace_identities(&base, &recon, &params, &p1).unwrap();
        let (a2, b2) = trace_identities(&base, &recon, &params, &p2).unwrap();
        assert!(a1.abs() < 1e-8 && a2.abs() < 1e-8);
        assert!(b1.abs() < 1e-8 && b2.abs() < 1e-8);
    }
}
