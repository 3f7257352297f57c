//! Dense complex Hermitian matrices with factorization-backed checks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CkemError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    order: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(order: usize) -> Self {
        HermitianMatrix {
            order,
            data: vec![Complex64::new(0.0, 0.0); order * order],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(order: usize, mut f: F) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in 0..order {
                m.data[i * order + j] = f(i, j);
            }
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.order + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.order + j] = v;
    }

    pub fn to_na(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }

    pub fn from_na(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    /// max |A_ij − conj(A_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.order {
            for j in 0..self.order {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Positive definiteness by Hermitian Cholesky with real positive pivots.
    pub fn is_positive_definite(&self) -> bool {
        if self.hermiticity_defect() > 1e-10 * (1.0 + self.max_abs()) {
            return false;
        }
        let n = self.order;
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for k in 0..n {
            let mut pivot = self.get(k, k).re;
            for j in 0..k {
                pivot -= l[k * n + j].norm_sqr();
            }
            if !(pivot > 0.0) {
                return false;
            }
            let lkk = pivot.sqrt();
            l[k * n + k] = Complex64::new(lkk, 0.0);
            for i in (k + 1)..n {
                let mut v = self.get(i, k);
                for j in 0..k {
                    v -= l[i * n + j] * l[k * n + j].conj();
                }
                l[i * n + k] = v / lkk;
            }
        }
        true
    }

    /// Determinant through LU; the imaginary part is a numerical defect for
    /// Hermitian input.
    pub fn lu_det(&self) -> Complex64 {
        self.to_na().lu().determinant()
    }

    /// Dense LU inverse.
    pub fn lu_inverse(&self) -> Result<HermitianMatrix> {
        self.to_na()
            .try_inverse()
            .map(|m| Self::from_na(&m))
            .ok_or_else(|| CkemError::Singular("LU inverse failed".into()))
    }

    /// ‖A·B − I‖_∞.
    pub fn product_identity_defect(&self, other: &Self) -> f64 {
        let prod = self.to_na() * other.to_na();
        let mut worst: f64 = 0.0;
        for i in 0..self.order {
            for j in 0..self.order {
                let expect = if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                worst = worst.max((prod[(i, j)] - expect).norm());
            }
        }
        worst
    }

    /// Tr(A·B).
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.order {
            for k in 0..self.order {
                acc += self.get(i, k) * other.get(k, i);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> HermitianMatrix {
        let mut m = HermitianMatrix::zeros(2);
        m.set(0, 0, Complex64::new(2.0, 0.0));
        m.set(1, 1, Complex64::new(3.0, 0.0));
        m.set(0, 1, Complex64::new(0.5, 0.25));
        m.set(1, 0, Complex64::new(0.5, -0.25));
        m
    }

    #[test]
    fn hermitian_checks_and_inverse() {
        let m = sample();
        assert!(m.hermiticity_defect() < 1e-15);
        assert!(m.is_positive_definite());
        let inv = m.lu_inverse().unwrap();
        assert!(m.product_identity_defect(&inv) < 1e-14);
        let det = m.lu_det();
        assert!((det.re - (6.0 - 0.3125)).abs() < 1e-12);
        assert!(det.im.abs() < 1e-14);
    }

    #[test]
    fn indefinite_matrix_is_detected() {
        let mut m = sample();
        m.set(1, 1, Complex64::new(-3.0, 0.0));
        assert!(!m.is_positive_definite());
    }
}
