//! Orchestration of the full verification suite: profile residuals, reduced
//! forms, matrix oracles, Einstein certification and reconstruction
//! consistency, merged into one deterministic report.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::completeness::{classify_endpoint, fiber_length, EndpointSide, FiberLength};
use crate::error::{CkemError, Result};
use crate::geometry::{self, BaseModel, LocalPoint};
use crate::par::{map_indexed, ExecutionMode};
use crate::params::{Bound, ModelParams};
use crate::profiles::{
    self, dm_first_order_residual, dm_second_order_residual, to_hamiltonian_form, MomentumProfile,
};
use crate::reconstruction::Reconstruction;
use crate::report::{
    CheckResult, ClassificationReport, PointRecord, VerificationReport, REPORT_SCHEMA,
};

/// Named tolerances; every default comes from the contract the suite
/// certifies and can be overridden per run.
#[derive(Debug, Clone)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let mut m = BTreeMap::new();
        for (k, v) in [
            ("closed_vs_quadrature", 1e-8),
            ("quadrature_error", 1e-10),
            ("deriv_fd", 1e-6),
            ("ode_first", 1e-7),
            ("ode_second", 1e-6),
            ("constraint_a", 1e-7),
            ("scalar_curvature_ode", 1e-6),
            ("dm_first", 1e-6),
            ("dm_second", 1e-5),
            ("base_gamma_match", 1e-9),
            ("base_einstein", 1e-5),
            ("hermiticity", 1e-12),
            ("metric_fd", 1e-6),
            ("tt_identity", 1e-10),
            ("inverse_blocks", 1e-8),
            ("det_rel", 1e-8),
            ("trace_identity", 1e-8),
            ("f_identity", 1e-7),
            ("einstein_residual", 1e-4),
            ("k_conf", 1e-3),
            ("k_variance_rel", 1e-6),
            ("recon_roundtrip", 1e-9),
            ("legendre", 1e-5),
            ("fiber_additivity", 1e-10),
            ("slope", 0.05),
        ] {
            m.insert(k.to_string(), v);
        }
        Tolerances(m)
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        *self.0.get(name).unwrap_or(&f64::NAN)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if value <= 0.0 {
            return Err(CkemError::Domain(format!(
                "tolerance {name} must be positive"
            )));
        }
        match self.0.get_mut(name) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(CkemError::Domain(format!("unknown tolerance `{name}`"))),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|s| s.as_str())
    }
}

/// Seeded chart points with t inside the reconstruction's interval.
pub fn sample_points(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    count: usize,
    seed: u64,
) -> Vec<LocalPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t_lo, t_hi) = recon.t_range();
    let anchor = recon.t_ref;
    let lo = match t_lo {
        Bound::Finite(v) => v,
        _ => anchor - 2.5,
    };
    let hi = match t_hi {
        Bound::Finite(v) => v,
        _ => anchor + 2.5,
    };
    let inset = 0.15 * (hi - lo);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z: Vec<Complex64> = (0..params.d)
            .map(|_| Complex64::new(rng.gen_range(-0.35..0.35), rng.gen_range(-0.35..0.35)))
            .collect();
        if !base.contains(&z) {
            continue;
        }
        let t = rng.gen_range((lo + inset)..(hi - inset));
        let rho2 = (t - params.lambda * base.potential(&z)).exp();
        if !rho2.is_finite() || rho2 <= 0.0 {
            continue;
        }
        // random fiber direction
        let mut w: Vec<Complex64> = (0..params.r)
            .map(|_| {
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let mag = (-2.0 * u1.ln()).sqrt();
                Complex64::new(mag * u2.cos(), mag * u2.sin())
            })
            .collect();
        let norm: f64 = w.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let scale = rho2.sqrt() / norm;
        for v in &mut w {
            *v *= scale;
        }
        if let Ok(p) = LocalPoint::new(z, w) {
            out.push(p);
        }
    }
    out
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(
        0.0f64,
        |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) },
    )
}

/// Run the full verification suite for one model and base.
pub fn run_verify(
    params: &ModelParams,
    base: &BaseModel,
    grid_size: usize,
    seed: u64,
    tols: &Tolerances,
    mode: ExecutionMode,
) -> Result<VerificationReport> {
    let profile = MomentumProfile::quadrature(params)?;
    let recon = Reconstruction::build(&profile)?;
    let mut checks: Vec<CheckResult> = Vec::new();
    let grid = params.interior_grid(grid_size.max(16));
    let residual_grid = params.interior_grid(50);

    // profile construction quality
    checks.push(CheckResult::new(
        "quadrature_error",
        profile.quadrature_error(),
        tols.get("quadrature_error"),
    ));

    // interpolant derivatives against centered differences of the evaluator
    let fd_defects = map_indexed(residual_grid.len(), mode, |i| {
        let x = residual_grid[i];
        let h = 1e-5 * (1.0 + x.abs());
        let fd = (profile.eval(x + h).unwrap_or(f64::NAN)
            - profile.eval(x - h).unwrap_or(f64::NAN))
            / (2.0 * h);
        let d = profile.deriv(x).unwrap_or(f64::NAN);
        (d - fd).abs() / (1.0 + d.abs())
    });
    checks.push(CheckResult::new(
        "deriv_fd",
        max_abs(fd_defects),
        tols.get("deriv_fd"),
    ));

    // first- and second-order residuals, the rank constraint, the
    // constant-scalar-curvature identity
    let r1 = map_indexed(residual_grid.len(), mode, |i| {
        profiles::first_order_residual(&profile, residual_grid[i]).unwrap_or(f64::NAN)
    });
    checks.push(CheckResult::new(
        "ode_first",
        max_abs(r1),
        tols.get("ode_first"),
    ));

    let r2 = map_indexed(residual_grid.len(), mode, |i| {
        profiles::ode_residual_second(&profile, residual_grid[i]).unwrap_or(f64::NAN)
    });
    checks.push(CheckResult::new(
        "ode_second",
        max_abs(r2),
        tols.get("ode_second"),
    ));

    if params.r > 1 {
        let ca = map_indexed(residual_grid.len(), mode, |i| {
            profiles::constraint_a(&profile, residual_grid[i]).unwrap_or(f64::NAN)
        });
        checks.push(CheckResult::new(
            "constraint_a",
            max_abs(ca),
            tols.get("constraint_a"),
        ));
    }

    let k_base = params.d as f64 * params.gamma;
    let k_conf = params.n as f64 * params.mu;
    let csc = map_indexed(residual_grid.len(), mode, |i| {
        // judged against the equation's own scale: the terms blow up like
        // f^{−2n−1} toward the conformal-factor zero
        match profiles::scalar_curvature_ode_terms(&profile, residual_grid[i], k_base, k_conf) {
            Ok((lhs, rhs)) => (lhs - rhs) / (1.0 + lhs.abs().max(rhs.abs())),
            Err(_) => f64::NAN,
        }
    });
    checks.push(CheckResult::new(
        "scalar_curvature_ode",
        max_abs(csc),
        tols.get("scalar_curvature_ode"),
    ));

    // reduced single-variable forms
    if params.r == 1 || params.nu == 0.0 {
        let h = to_hamiltonian_form(&profile)?;
        let dm1 = map_indexed(residual_grid.len(), mode, |i| {
            dm_first_order_residual(&h, h.u_of_x(residual_grid[i])).unwrap_or(f64::NAN)
        });
        let dm2 = map_indexed(residual_grid.len(), mode, |i| {
            dm_second_order_residual(&h, h.u_of_x(residual_grid[i])).unwrap_or(f64::NAN)
        });
        checks.push(CheckResult::new(
            "dm_first",
            max_abs(dm1),
            tols.get("dm_first"),
        ));
        checks.push(CheckResult::new(
            "dm_second",
            max_abs(dm2),
            tols.get("dm_second"),
        ));
    }

    // reconstruction invariants
    let roundtrip = map_indexed(residual_grid.len(), mode, |i| {
        let x = residual_grid[i];
        match recon.t_of_x(x).and_then(|t| recon.x_of_t(t)) {
            Ok(back) => (back - x).abs() / (1.0 + x.abs()),
            Err(_) => f64::NAN,
        }
    });
    checks.push(CheckResult::new(
        "recon_roundtrip",
        max_abs(roundtrip),
        tols.get("recon_roundtrip"),
    ));

    let legendre = map_indexed(residual_grid.len(), mode, |i| {
        let x = residual_grid[i];
        let t = match recon.t_of_x(x) {
            Ok(t) => t,
            Err(_) => return f64::NAN,
        };
        let h = 5e-3 * (1.0 + t.abs());
        let f = |tt: f64| recon.x_of_t(tt).and_then(|x| recon.f_of_x(x));
        let vals = [f(t - 2.0 * h), f(t - h), f(t), f(t + h), f(t + 2.0 * h)];
        if vals.iter().any(|v| v.is_err()) {
            return f64::NAN;
        }
        let v: Vec<f64> = vals.into_iter().map(|v| v.unwrap()).collect();
        let d2_h = (v[3] - 2.0 * v[2] + v[1]) / (h * h);
        let d2_2h = (v[4] - 2.0 * v[2] + v[0]) / (4.0 * h * h);
        let fpp = (4.0 * d2_h - d2_2h) / 3.0;
        let fp = (8.0 * (v[3] - v[1]) - (v[4] - v[0])) / (12.0 * h);
        match profile.eval(fp) {
            Ok(phi) => fpp - phi,
            Err(_) => f64::NAN,
        }
    });
    checks.push(CheckResult::new(
        "legendre",
        max_abs(legendre),
        tols.get("legendre"),
    ));

    // fiber length additivity over a random interior split
    {
        let a = grid[grid.len() / 5];
        let b = grid[grid.len() * 4 / 5];
        let m = grid[grid.len() / 2];
        let whole = fiber_length(&profile, params, a, b)?;
        let left = fiber_length(&profile, params, a, m)?;
        let right = fiber_length(&profile, params, m, b)?;
        let defect = match (whole, left, right) {
            (FiberLength::Finite(w), FiberLength::Finite(l), FiberLength::Finite(r)) => {
                (w - l - r).abs()
            }
            _ => f64::NAN,
        };
        checks.push(CheckResult::new(
            "fiber_additivity",
            defect,
            tols.get("fiber_additivity"),
        ));
    }

    // base model checks
    checks.push(CheckResult::new(
        "base_gamma_match",
        (base.einstein_constant() - params.gamma).abs(),
        tols.get("base_gamma_match"),
    ));

    let points = sample_points(base, &recon, params, 20.min(grid_size), seed);
    let base_defects = map_indexed(points.len(), mode, |i| {
        geometry::base_einstein_defect(base, &points[i].z).unwrap_or(f64::NAN)
    });
    checks.push(CheckResult::new(
        "base_einstein",
        max_abs(base_defects),
        tols.get("base_einstein"),
    ));

    // pointwise metric suite
    let d = params.d as usize;
    let records: Vec<PointRecord> = map_indexed(points.len(), mode, |i| {
        point_record(base, &recon, params, &points[i], d)
    });

    checks.push(CheckResult::new(
        "hermiticity",
        max_abs(records.iter().map(|r| r.hermiticity)),
        tols.get("hermiticity"),
    ));
    checks.push(CheckResult::new(
        "metric_fd",
        max_abs(records.iter().map(|r| r.metric_fd_defect)),
        tols.get("metric_fd"),
    ));
    checks.push(CheckResult::new(
        "tt_identity",
        max_abs(records.iter().map(|r| r.tt_identity_defect)),
        tols.get("tt_identity"),
    ));
    checks.push(CheckResult::new(
        "inverse_blocks",
        max_abs(records.iter().map(|r| r.inverse_blocks_defect)),
        tols.get("inverse_blocks"),
    ));
    checks.push(CheckResult::new(
        "det_rel",
        max_abs(records.iter().map(|r| r.det_rel_err)),
        tols.get("det_rel"),
    ));
    checks.push(CheckResult::new(
        "trace_identity",
        max_abs(records.iter().flat_map(|r| r.trace_identity)),
        tols.get("trace_identity"),
    ));
    checks.push(CheckResult::new(
        "f_identity",
        max_abs(records.iter().flat_map(|r| r.f_identity)),
        tols.get("f_identity"),
    ));
    checks.push(CheckResult::new(
        "einstein_residual",
        max_abs(records.iter().map(|r| r.residual_einstein)),
        tols.get("einstein_residual"),
    ));

    let k_expect = params.n as f64 * params.mu;
    checks.push(CheckResult::new(
        "k_conf",
        max_abs(records.iter().map(|r| r.k_conf - k_expect)),
        tols.get("k_conf"),
    ));
    let mean_k = records.iter().map(|r| r.k_conf).sum::<f64>() / records.len().max(1) as f64;
    let variance = records
        .iter()
        .map(|r| (r.k_conf - mean_k) * (r.k_conf - mean_k))
        .sum::<f64>()
        / records.len().max(1) as f64;
    // relative to |nμ|, with an absolute floor for the μ = 0 families
    checks.push(CheckResult::new(
        "k_variance_rel",
        variance / k_expect.abs().max(1.0),
        tols.get("k_variance_rel"),
    ));

    let mut report = VerificationReport {
        schema: REPORT_SCHEMA.into(),
        model: params.clone(),
        base: Some(*base),
        seed,
        grid_size,
        points: records,
        checks,
        verdict: String::new(),
    };
    report.finalize();
    Ok(report)
}

fn point_record(
    base: &BaseModel,
    recon: &Reconstruction,
    params: &ModelParams,
    point: &LocalPoint,
    d: usize,
) -> PointRecord {
    let nan = f64::NAN;
    let mut rec = PointRecord {
        z: point.z.iter().map(|v| [v.re, v.im]).collect(),
        w: point.w.iter().map(|v| [v.re, v.im]).collect(),
        hermiticity: nan,
        metric_fd_defect: nan,
        tt_identity_defect: nan,
        inverse_blocks_defect: nan,
        det_rel_err: nan,
        trace_identity: [nan, nan],
        f_identity: [nan, nan],
        residual_einstein: nan,
        k_conf: nan,
    };
    let t_mat = match geometry::metric_closed_form(base, recon, params, point) {
        Ok(m) => m,
        Err(_) => return rec,
    };
    rec.hermiticity = t_mat.hermiticity_defect();

    // finite-difference Hessian of the potential as the metric oracle
    let phi_field = |zw: &[Complex64]| -> Result<f64> {
        let (z, w) = zw.split_at(d);
        let rho2: f64 = w.iter().map(|v| v.norm_sqr()).sum();
        let t = params.lambda * base.potential(z) + rho2.ln();
        Ok(params.nu * base.potential(z) + recon.f_of_t(t)?)
    };
    let zw: Vec<Complex64> = point.z.iter().chain(point.w.iter()).copied().collect();
    if let Ok(oracle) = geometry::fd::complex_hessian(&phi_field, &zw) {
        rec.metric_fd_defect = t_mat.max_abs_diff(&oracle);
    }

    if let Ok(inv) = geometry::metric_inverse_closed_form(base, recon, params, point) {
        rec.tt_identity_defect = t_mat.product_identity_defect(&inv);
        if let Ok(lu_inv) = t_mat.lu_inverse() {
            rec.inverse_blocks_defect = inv.max_abs_diff(&lu_inv);
        }
    }
    if let Ok(det) = geometry::metric_det_closed_form(base, recon, params, point) {
        let lu = t_mat.lu_det();
        rec.det_rel_err = (det - lu.re).abs() / det.abs().max(1e-300);
    }
    if let Ok((tr1, tr2)) = geometry::trace_identities(base, recon, params, point) {
        rec.trace_identity = [tr1, tr2];
    }
    if let Ok((lap, df2)) = geometry::f_identities(base, recon, params, point) {
        rec.f_identity = [lap, df2];
    }
    if let Ok(res) = geometry::einstein_residual(base, recon, params, point) {
        rec.residual_einstein = res;
    }
    if let Ok(k) = geometry::conformal_scalar_curvature(base, recon, params, point) {
        rec.k_conf = k;
    }
    rec
}

/// Endpoint classification end-to-end: verdicts, t-limits, domain label.
pub fn run_classify(params: &ModelParams) -> Result<ClassificationReport> {
    let profile = MomentumProfile::quadrature(params)?;
    let recon = Reconstruction::build(&profile)?;
    let lower = classify_endpoint(&profile, params, EndpointSide::Lower)?;
    let upper = classify_endpoint(&profile, params, EndpointSide::Upper)?;
    let t_limits = [recon.t_limit(false), recon.t_limit(true)];
    let domain =
        crate::completeness::classify_case(params, &lower, &upper, t_limits[0], t_limits[1]);
    Ok(ClassificationReport {
        schema: REPORT_SCHEMA.into(),
        case: params.case.label().to_string(),
        lower,
        upper,
        t_limits,
        domain_label: domain.label().to_string(),
        domain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BaseKind;
    use crate::params::{CaseId, ModelSpec};

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        assert_eq!(t.get("einstein_residual"), 1e-4);
        t.set("einstein_residual", 1e-3).unwrap();
        assert_eq!(t.get("einstein_residual"), 1e-3);
        assert!(t.set("not_a_tolerance", 1.0).is_err());
        assert!(t.set("einstein_residual", -1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        let spec = ModelSpec {
            case: CaseId::I,
            d: 1,
            r: 1,
            lambda: -1.0,
            nu: 1.0,
            a: -1.0,
            b: 1.0,
            mu: Some(-3.0),
            x0: None,
            x1: None,
        };
        let params = ModelParams::from_spec(&spec).unwrap();
        let profile = MomentumProfile::quadrature(&params).unwrap();
        let recon = Reconstruction::build(&profile).unwrap();
        let base = BaseModel::new(BaseKind::Ball, 1.0, 1).unwrap();
        let a = sample_points(&base, &recon, &params, 10, 42);
        let b = sample_points(&base, &recon, &params, 10, 42);
        for (p, q) in a.iter().zip(b.iter()) {
            assert_eq!(p.z, q.z);
            assert_eq!(p.w, q.w);
        }
        for p in &a {
            let t = p.fiber_log(&base, params.lambda);
            assert!(recon.x_of_t(t).is_ok(), "t = {t} outside image");
        }
    }
}
