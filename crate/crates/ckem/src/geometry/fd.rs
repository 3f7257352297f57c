//! Complex derivatives by real central differences with Wirtinger
//! recombination ∂²/∂z_i∂z̄_j = ¼(∂²_{x_i x_j} + ∂²_{y_i y_j})
//! + (i/4)(∂²_{x_i y_j} − ∂²_{y_i x_j}), one Richardson refinement.

use num_complex::Complex64;

use super::matrix::HermitianMatrix;
use crate::error::{CkemError, Result};

/// Relative step used for the second-derivative stencils. Table-backed
/// fields (anything routed through x(t)) carry ~1e-14 evaluation jitter, so
/// the step balances that noise floor against Richardson-corrected
/// truncation; 1e-4 would amplify the jitter past the matrix tolerances.
pub const FD_STEP: f64 = 5e-4;

fn shift(zw: &[Complex64], k: usize, delta: f64) -> Vec<Complex64> {
    let mut out = zw.to_vec();
    let m = zw.len();
    if k < m {
        out[k] += delta;
    } else {
        out[k - m] += Complex64::new(0.0, delta);
    }
    out
}

fn step_for(zw: &[Complex64], k: usize, h: f64) -> f64 {
    let m = zw.len();
    let coord = if k < m { zw[k].re } else { zw[k - m].im };
    h * (1.0 + coord.abs())
}

fn real_hessian<F>(f: &F, zw: &[Complex64], h: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[Complex64]) -> Result<f64>,
{
    let m2 = 2 * zw.len();
    let f0 = f(zw)?;
    let mut hess = vec![vec![0.0; m2]; m2];
    for k in 0..m2 {
        let hk = step_for(zw, k, h);
        let fp = f(&shift(zw, k, hk))?;
        let fm = f(&shift(zw, k, -hk))?;
        hess[k][k] = (fp - 2.0 * f0 + fm) / (hk * hk);
        for l in (k + 1)..m2 {
            let hl = step_for(zw, l, h);
            let fpp = f(&shift(&shift(zw, k, hk), l, hl))?;
            let fpm = f(&shift(&shift(zw, k, hk), l, -hl))?;
            let fmp = f(&shift(&shift(zw, k, -hk), l, hl))?;
            let fmm = f(&shift(&shift(zw, k, -hk), l, -hl))?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hk * hl);
            hess[k][l] = v;
            hess[l][k] = v;
        }
    }
    Ok(hess)
}

/// Complex Hessian (∂²f/∂z_i∂z̄_j) over the combined coordinates, for a real
/// scalar function.
pub fn complex_hessian<F>(f: &F, zw: &[Complex64]) -> Result<HermitianMatrix>
where
    F: Fn(&[Complex64]) -> Result<f64>,
{
    complex_hessian_h(f, zw, FD_STEP)
}

/// Same with an explicit relative step.
pub fn complex_hessian_h<F>(f: &F, zw: &[Complex64], h: f64) -> Result<HermitianMatrix>
where
    F: Fn(&[Complex64]) -> Result<f64>,
{
    let coarse = real_hessian(f, zw, h).map_err(step_breakdown)?;
    let fine = real_hessian(f, zw, 0.5 * h).map_err(step_breakdown)?;
    let m = zw.len();
    let rich = |k: usize, l: usize| (4.0 * fine[k][l] - coarse[k][l]) / 3.0;
    Ok(HermitianMatrix::from_fn(m, |i, j| {
        let re = 0.25 * (rich(i, j) + rich(m + i, m + j));
        let im = 0.25 * (rich(i, m + j) - rich(m + i, j));
        Complex64::new(re, im)
    }))
}

/// Complex gradient (∂f/∂z_i = ½(∂_{x_i} − i∂_{y_i})f), fourth-order stencil.
pub fn complex_gradient<F>(f: &F, zw: &[Complex64]) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<f64>,
{
    let m = zw.len();
    let d_real = |k: usize| -> Result<f64> {
        let hk = step_for(zw, k, FD_STEP);
        let f1 = f(&shift(zw, k, hk))?;
        let f_1 = f(&shift(zw, k, -hk))?;
        let f2 = f(&shift(zw, k, 2.0 * hk))?;
        let f_2 = f(&shift(zw, k, -2.0 * hk))?;
        Ok((8.0 * (f1 - f_1) - (f2 - f_2)) / (12.0 * hk))
    };
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let dx = d_real(i).map_err(step_breakdown)?;
        let dy = d_real(m + i).map_err(step_breakdown)?;
        out.push(Complex64::new(dx, -dy) * 0.5);
    }
    Ok(out)
}

fn step_breakdown(e: CkemError) -> CkemError {
    CkemError::Domain(format!("step size breakdown near the domain boundary: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hessian_of_squared_norm_is_identity() {
        let f = |zw: &[Complex64]| -> Result<f64> { Ok(zw.iter().map(|v| v.norm_sqr()).sum()) };
        let z = vec![Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.7)];
        let h = complex_hessian(&f, &z).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((h.get(i, j) - expect).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn hessian_picks_up_holomorphic_mixing() {
        // f = |z0|²·|z1|² has ∂²f/∂z0∂z̄0 = |z1|², ∂²f/∂z0∂z̄1 = z̄0·z1
        let f = |zw: &[Complex64]| -> Result<f64> { Ok(zw[0].norm_sqr() * zw[1].norm_sqr()) };
        let z = vec![Complex64::new(0.4, 0.3), Complex64::new(-0.2, 0.5)];
        let h = complex_hessian(&f, &z).unwrap();
        assert!((h.get(0, 0).re - z[1].norm_sqr()).abs() < 1e-8);
        let expect = z[0].conj() * z[1];
        assert!((h.get(0, 1) - expect).norm() < 1e-8);
        assert!(h.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn gradient_of_log_norm() {
        // f = log(1+‖z‖²): ∂f/∂z_i = z̄_i/(1+‖z‖²)
        let f = |zw: &[Complex64]| -> Result<f64> {
            Ok((1.0 + zw.iter().map(|v| v.norm_sqr()).sum::<f64>()).ln())
        };
        let z = vec![Complex64::new(0.25, -0.65)];
        let g = complex_gradient(&f, &z).unwrap();
        let expect = z[0].conj() / (1.0 + z[0].norm_sqr());
        assert!((g[0] - expect).norm() < 1e-11);
    }
}
