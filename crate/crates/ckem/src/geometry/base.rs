//! Kähler–Einstein base models on a coordinate chart of ℂ^d, with analytic
//! potential derivatives and the Sherman–Morrison closed forms for the
//! Hessian inverse and determinant.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::HermitianMatrix;
use crate::error::{CkemError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    Flat,
    Ball,
    #[serde(rename = "fubini_study")]
    FubiniStudyChart,
}

/// Base potential φ₀ on a chart, with Einstein constant γ_base:
/// Flat ‖z‖² (γ=0), Ball −c·log(1−‖z‖²) (γ=−(d+1)/c), Fubini–Study chart
/// c·log(1+‖z‖²) (γ=(d+1)/c).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BaseModel {
    pub kind: BaseKind,
    pub scale: f64,
    pub d: u32,
}

fn norm2(z: &[Complex64]) -> f64 {
    z.iter().map(|v| v.norm_sqr()).sum()
}

impl BaseModel {
    pub fn new(kind: BaseKind, scale: f64, d: u32) -> Result<Self> {
        if scale <= 0.0 {
            return Err(CkemError::Domain("base scale must be positive".into()));
        }
        if d < 1 {
            return Err(CkemError::Domain(
                "base dimension must be at least 1".into(),
            ));
        }
        Ok(BaseModel { kind, scale, d })
    }

    pub fn einstein_constant(&self) -> f64 {
        let d1 = self.d as f64 + 1.0;
        match self.kind {
            BaseKind::Flat => 0.0,
            BaseKind::Ball => -d1 / self.scale,
            BaseKind::FubiniStudyChart => d1 / self.scale,
        }
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        z.len() == self.d as usize
            && match self.kind {
                BaseKind::Ball => norm2(z) < 1.0,
                _ => true,
            }
    }

    pub fn potential(&self, z: &[Complex64]) -> f64 {
        let s = norm2(z);
        match self.kind {
            BaseKind::Flat => s,
            BaseKind::Ball => -self.scale * (1.0 - s).ln(),
            BaseKind::FubiniStudyChart => self.scale * (1.0 + s).ln(),
        }
    }

    /// ∂φ₀/∂z_i (the ∂/∂z̄ entries are the conjugates).
    pub fn dphi_dz(&self, z: &[Complex64]) -> Vec<Complex64> {
        let s = norm2(z);
        let factor = match self.kind {
            BaseKind::Flat => 1.0,
            BaseKind::Ball => self.scale / (1.0 - s),
            BaseKind::FubiniStudyChart => self.scale / (1.0 + s),
        };
        z.iter().map(|v| v.conj() * factor).collect()
    }

    fn rank_one_decomposition(&self, z: &[Complex64]) -> (f64, f64) {
        // Hessian = α·I + β·v v^H with v_i = conj(z_i)
        let s = norm2(z);
        match self.kind {
            BaseKind::Flat => (1.0, 0.0),
            BaseKind::Ball => {
                let g = 1.0 - s;
                (self.scale / g, self.scale / (g * g))
            }
            BaseKind::FubiniStudyChart => {
                let g = 1.0 + s;
                (self.scale / g, -self.scale / (g * g))
            }
        }
    }

    /// ∂²φ₀/∂z_i∂z̄_j.
    pub fn hessian(&self, z: &[Complex64]) -> HermitianMatrix {
        let (alpha, beta) = self.rank_one_decomposition(z);
        HermitianMatrix::from_fn(self.d as usize, |i, j| {
            let mut v = z[i].conj() * z[j] * beta;
            if i == j {
                v += alpha;
            }
            v
        })
    }

    /// Closed-form inverse of the Hessian.
    pub fn hessian_inverse(&self, z: &[Complex64]) -> Result<HermitianMatrix> {
        let (alpha, beta) = self.rank_one_decomposition(z);
        let s = norm2(z);
        let denom = alpha + beta * s;
        if alpha == 0.0 || denom == 0.0 {
            return Err(CkemError::Singular("base Hessian is singular".into()));
        }
        let coef = beta / (alpha * denom);
        Ok(HermitianMatrix::from_fn(self.d as usize, |i, j| {
            let mut v = -z[i].conj() * z[j] * coef;
            if i == j {
                v += 1.0 / alpha;
            }
            v
        }))
    }

    /// Closed-form determinant of the Hessian.
    pub fn hessian_det(&self, z: &[Complex64]) -> f64 {
        let (alpha, beta) = self.rank_one_decomposition(z);
        let s = norm2(z);
        alpha.powi(self.d as i32 - 1) * (alpha + beta * s)
    }

    /// Scalar ∂φ₀/∂z̄ · H₀⁻¹ · ∂φ₀/∂z^t used by the inverse metric blocks.
    pub fn grad_quadratic(&self, z: &[Complex64]) -> Result<f64> {
        let inv = self.hessian_inverse(z)?;
        let dz = self.dphi_dz(z);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dz.len() {
            for j in 0..dz.len() {
                // row vector of ∂/∂z̄ entries = conj(dz); column of ∂/∂z^t = dz
                acc += dz[i].conj() * inv.get(i, j) * dz[j];
            }
        }
        Ok(acc.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(re: &[f64]) -> Vec<Complex64> {
        re.iter()
            .enumerate()
            .map(|(k, &v)| Complex64::new(v, 0.1 * (k as f64 + 1.0)))
            .collect()
    }

    #[test]
    fn closed_inverse_and_det_match_lu() {
        for kind in [BaseKind::Flat, BaseKind::Ball, BaseKind::FubiniStudyChart] {
            let base = BaseModel::new(kind, 1.3, 2).unwrap();
            let z = point(&[0.3, -0.25]);
            let h = base.hessian(&z);
            assert!(h.hermiticity_defect() < 1e-14);
            let inv = base.hessian_inverse(&z).unwrap();
            assert!(h.product_identity_defect(&inv) < 1e-13, "{kind:?}");
            let det = h.lu_det();
            assert!(
                (det.re - base.hessian_det(&z)).abs() < 1e-12 * det.re.abs(),
                "{kind:?}"
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let base = BaseModel::new(BaseKind::Ball, 0.8, 2).unwrap();
        let z = point(&[0.2, 0.4]);
        let dz = base.dphi_dz(&z);
        let h = 1e-6;
        for i in 0..2 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] += h;
            zm[i] -= h;
            let dre = (base.potential(&zp) - base.potential(&zm)) / (2.0 * h);
            zp[i] = z[i] + Complex64::new(0.0, h);
            zm[i] = z[i] - Complex64::new(0.0, h);
            let dim = (base.potential(&zp) - base.potential(&zm)) / (2.0 * h);
            let wirtinger = Complex64::new(dre, -dim) * 0.5;
            assert!((wirtinger - dz[i]).norm() < 1e-9);
        }
    }
}
