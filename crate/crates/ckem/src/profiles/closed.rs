//! Closed-form momentum profiles for the special parameter families, with
//! analytic first and second derivatives.

use crate::error::{CkemError, Result};
use crate::params::{Bound, CaseId, ModelSpec};

/// Identifier of a printed closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedFormId {
    /// Polynomial family a=λ=−1, b=ν=1 with free μ ≤ 0.
    C1_6,
    /// μ = 0 member of the family above.
    C1_7,
    /// μ = −1 member.
    C1_8,
    /// μ = −(d+2): φ(x) = x.
    C1_9,
    /// a=λ=−1, b=ν=0, finite x0 < 0, μ < 0.
    C1_10,
    /// Limit x0 → −∞, μ = −(d+2): φ ≡ 1.
    C1_11,
    /// b=1, ν=0, x0=0, a < 0, μ < 0: polynomial of degree n+1.
    C1_13,
    /// r=a=1, b=ν=0, μ=0: φ = x(1−(x/x1)^{d+1})/(d+1).
    C1_15,
    /// a=1, ν=0, b<0, μ=0, r>1: rational antiderivative form.
    C1_19,
}

impl ClosedFormId {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "1.6" => Self::C1_6,
            "1.7" => Self::C1_7,
            "1.8" => Self::C1_8,
            "1.9" => Self::C1_9,
            "1.10" => Self::C1_10,
            "1.11" => Self::C1_11,
            "1.13" => Self::C1_13,
            "1.15" => Self::C1_15,
            "1.19" => Self::C1_19,
            other => return Err(CkemError::UnknownFormula(other.to_string())),
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::C1_6 => "1.6",
            Self::C1_7 => "1.7",
            Self::C1_8 => "1.8",
            Self::C1_9 => "1.9",
            Self::C1_10 => "1.10",
            Self::C1_11 => "1.11",
            Self::C1_13 => "1.13",
            Self::C1_15 => "1.15",
            Self::C1_19 => "1.19",
        }
    }
}

/// Free parameters a formula may need beyond `d`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedFormExtra {
    pub mu: Option<f64>,
    pub x0: Option<f64>,
    pub x1: Option<f64>,
    pub a: Option<f64>,
    pub r: Option<u32>,
    pub b: Option<f64>,
}

/// A fully-resolved closed-form evaluator.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub id: ClosedFormId,
    pub d: u32,
    mu: f64,
    x0: f64,
    x1: f64,
    a: f64,
    b: f64,
    r: u32,
    /// Partial-fraction antiderivative data for the rational family.
    frac: Option<RationalAntiderivative>,
}

impl ClosedForm {
    pub fn new(id: ClosedFormId, d: u32, extra: &ClosedFormExtra) -> Result<Self> {
        let need = |o: Option<f64>, name: &str| {
            o.ok_or_else(|| CkemError::Domain(format!("formula {} needs `{name}`", id.label())))
        };
        if d < 1 {
            return Err(CkemError::Domain("d must be at least 1".into()));
        }
        let dd = d as f64;
        let mut cf = ClosedForm {
            id,
            d,
            mu: 0.0,
            x0: 0.0,
            x1: 1.0,
            a: -1.0,
            b: 1.0,
            r: 1,
            frac: None,
        };
        match id {
            ClosedFormId::C1_6 => {
                cf.mu = need(extra.mu, "mu")?;
                if cf.mu > 0.0 {
                    return Err(CkemError::Domain("formula 1.6 needs mu <= 0".into()));
                }
            }
            ClosedFormId::C1_7 => cf.mu = 0.0,
            ClosedFormId::C1_8 => cf.mu = -1.0,
            ClosedFormId::C1_9 => cf.mu = -(dd + 2.0),
            ClosedFormId::C1_10 => {
                cf.mu = need(extra.mu, "mu")?;
                cf.x0 = need(extra.x0, "x0")?;
                cf.x1 = 0.0;
                cf.b = 0.0;
                if !(cf.mu < 0.0 && cf.x0 < 0.0) {
                    return Err(CkemError::Domain(
                        "formula 1.10 needs mu < 0 and finite x0 < 0".into(),
                    ));
                }
            }
            ClosedFormId::C1_11 => {
                cf.mu = -(dd + 2.0);
                cf.x0 = f64::NEG_INFINITY;
                cf.x1 = 0.0;
                cf.b = 0.0;
            }
            ClosedFormId::C1_13 => {
                cf.mu = need(extra.mu, "mu")?;
                cf.a = need(extra.a, "a")?;
                cf.b = 1.0;
                cf.x0 = 0.0;
                cf.x1 = -1.0 / cf.a;
                if !(cf.mu < 0.0 && cf.a < 0.0) {
                    return Err(CkemError::Domain(
                        "formula 1.13 needs a < 0 and mu < 0".into(),
                    ));
                }
            }
            ClosedFormId::C1_15 => {
                cf.x1 = need(extra.x1, "x1")?;
                cf.a = 1.0;
                cf.b = 0.0;
                cf.x0 = 0.0;
                cf.mu = 0.0;
                if cf.x1 <= 0.0 {
                    return Err(CkemError::Domain("formula 1.15 needs x1 > 0".into()));
                }
            }
            ClosedFormId::C1_19 => {
                let r = extra
                    .r
                    .ok_or_else(|| CkemError::Domain("formula 1.19 needs `r`".into()))?;
                cf.b = need(extra.b, "b")?;
                if r < 2 || cf.b >= 0.0 {
                    return Err(CkemError::Domain(
                        "formula 1.19 needs r > 1 and b < 0".into(),
                    ));
                }
                cf.r = r;
                cf.a = 1.0;
                cf.mu = 0.0;
                cf.x0 = -cf.b;
                cf.x1 = -((r as f64) + 1.0) * cf.b / ((r as f64) - 1.0);
                cf.frac = Some(RationalAntiderivative::new(d + r, cf.b));
            }
        }
        Ok(cf)
    }

    /// Stated interval of the printed formula, closed at evaluable endpoints.
    pub fn domain(&self) -> (f64, f64) {
        match self.id {
            ClosedFormId::C1_6 | ClosedFormId::C1_7 | ClosedFormId::C1_8 | ClosedFormId::C1_9 => {
                (0.0, 1.0)
            }
            ClosedFormId::C1_10 => (self.x0, 0.0),
            ClosedFormId::C1_11 => (f64::NEG_INFINITY, 0.0),
            ClosedFormId::C1_13 | ClosedFormId::C1_15 | ClosedFormId::C1_19 => (self.x0, self.x1),
        }
    }

    pub fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if x >= lo && x <= hi {
            Ok(())
        } else {
            Err(CkemError::Domain(format!(
                "x = {x} outside the stated interval [{lo}, {hi}] of formula {}",
                self.id.label()
            )))
        }
    }

    /// The model realizing this formula, for quadrature cross-checks.
    pub fn model_spec(&self) -> ModelSpec {
        match self.id {
            ClosedFormId::C1_6 | ClosedFormId::C1_7 | ClosedFormId::C1_8 | ClosedFormId::C1_9 => {
                ModelSpec {
                    case: CaseId::I,
                    d: self.d,
                    r: 1,
                    lambda: -1.0,
                    nu: 1.0,
                    a: -1.0,
                    b: 1.0,
                    mu: Some(self.mu),
                    x0: None,
                    x1: None,
                }
            }
            ClosedFormId::C1_10 | ClosedFormId::C1_11 => ModelSpec {
                case: CaseId::II1,
                d: self.d,
                r: 1,
                lambda: -1.0,
                nu: 0.0,
                a: -1.0,
                b: 0.0,
                mu: Some(self.mu),
                x0: Some(if self.x0.is_finite() {
                    Bound::Finite(self.x0)
                } else {
                    Bound::NegInf
                }),
                x1: None,
            },
            ClosedFormId::C1_13 => ModelSpec {
                case: CaseId::II1,
                d: self.d,
                r: 1,
                lambda: 1.0,
                nu: 0.0,
                a: self.a,
                b: 1.0,
                mu: Some(self.mu),
                x0: Some(Bound::Finite(0.0)),
                x1: None,
            },
            ClosedFormId::C1_15 => ModelSpec {
                case: CaseId::III1,
                d: self.d,
                r: 1,
                lambda: 1.0,
                nu: 0.0,
                a: 1.0,
                b: 0.0,
                mu: Some(0.0),
                x0: None,
                x1: Some(Bound::Finite(self.x1)),
            },
            ClosedFormId::C1_19 => ModelSpec {
                case: CaseId::IV1,
                d: self.d,
                r: self.r,
                lambda: 1.0,
                nu: 0.0,
                a: 1.0,
                b: self.b,
                mu: Some(0.0),
                x0: None,
                x1: None,
            },
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = self.d as f64;
        match self.id {
            ClosedFormId::C1_6 | ClosedFormId::C1_7 | ClosedFormId::C1_8 => {
                let alpha = (self.mu + 1.0) / (d + 1.0);
                let beta = -self.mu / (d + 2.0);
                let y = (1.0 - x).powi(self.d as i32 + 2);
                alpha * (1.0 - x - y) + beta * (1.0 - y)
            }
            ClosedFormId::C1_9 => x,
            ClosedFormId::C1_10 => {
                let s = x / self.x0;
                self.mu
                    * ((s.powi(self.d as i32 + 2) - 1.0) / (d + 2.0)
                        - s * (s.powi(self.d as i32 + 1) - 1.0) / (d + 1.0))
            }
            ClosedFormId::C1_11 => 1.0,
            ClosedFormId::C1_13 => {
                let n = d + 1.0;
                let mut phi = -self.mu / (n + 1.0) * x * x;
                let ax = self.a * x;
                for (k, c) in series_coefficients(self.d + 1) {
                    phi -= self.mu / (self.a * self.a) * c * ax.powi(k as i32);
                }
                phi
            }
            ClosedFormId::C1_15 => x * (1.0 - (x / self.x1).powi(self.d as i32 + 1)) / (d + 1.0),
            ClosedFormId::C1_19 => {
                let fr = self.frac.as_ref().unwrap();
                let n = (self.d + self.r) as i32;
                let pref =
                    -(self.r as f64) * (x + self.b).powi(2 * n - 1) * (x - self.b) / x.powi(n - 1);
                pref * (fr.eval(x) - fr.eval(self.x1))
            }
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let d = self.d as f64;
        match self.id {
            ClosedFormId::C1_6 | ClosedFormId::C1_7 | ClosedFormId::C1_8 => {
                let alpha = (self.mu + 1.0) / (d + 1.0);
                let beta = -self.mu / (d + 2.0);
                let yp = (1.0 - x).powi(self.d as i32 + 1) * (d + 2.0);
                alpha * (-1.0 + yp) + beta * yp
            }
            ClosedFormId::C1_9 => 1.0,
            ClosedFormId::C1_10 => {
                let s = x / self.x0;
                self.mu * (1.0 - s.powi(self.d as i32 + 1)) / ((d + 1.0) * self.x0)
            }
            ClosedFormId::C1_11 => 0.0,
            ClosedFormId::C1_13 => {
                let n = d + 1.0;
                let mut out = -2.0 * self.mu / (n + 1.0) * x;
                let ax = self.a * x;
                for (k, c) in series_coefficients(self.d + 1) {
                    out -= self.mu / self.a * c * (k as f64) * ax.powi(k as i32 - 1);
                }
                out
            }
            ClosedFormId::C1_15 => {
                (1.0 - (d + 2.0) * (x / self.x1).powi(self.d as i32 + 1)) / (d + 1.0)
            }
            ClosedFormId::C1_19 => {
                let fr = self.frac.as_ref().unwrap();
                let (p, lp, _) = self.c119_prefactor(x);
                let anti = fr.eval(x) - fr.eval(self.x1);
                p * lp * anti + p * fr.integrand(x)
            }
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        let d = self.d as f64;
        match self.id {
            ClosedFormId::C1_6 | ClosedFormId::C1_7 | ClosedFormId::C1_8 => {
                let alpha = (self.mu + 1.0) / (d + 1.0);
                let beta = -self.mu / (d + 2.0);
                let ypp = -(d + 2.0) * (d + 1.0) * (1.0 - x).powi(self.d as i32);
                alpha * ypp + beta * ypp
            }
            ClosedFormId::C1_9 | ClosedFormId::C1_11 => 0.0,
            ClosedFormId::C1_10 => {
                let s = x / self.x0;
                -self.mu * s.powi(self.d as i32) / (self.x0 * self.x0)
            }
            ClosedFormId::C1_13 => {
                let n = d + 1.0;
                let mut out = -2.0 * self.mu / (n + 1.0);
                let ax = self.a * x;
                for (k, c) in series_coefficients(self.d + 1) {
                    out -= self.mu * c * (k as f64) * (k as f64 - 1.0) * ax.powi(k as i32 - 2);
                }
                out
            }
            ClosedFormId::C1_15 => -(d + 2.0) * (x / self.x1).powi(self.d as i32) / self.x1,
            ClosedFormId::C1_19 => {
                let fr = self.frac.as_ref().unwrap();
                let (p, lp, lpp) = self.c119_prefactor(x);
                let anti = fr.eval(x) - fr.eval(self.x1);
                let g = fr.integrand(x);
                p * (lp * lp + lpp) * anti + 2.0 * p * lp * g + p * fr.integrand_deriv(x)
            }
        }
    }

    /// Prefactor of the rational family with its log-derivative and the
    /// derivative of the log-derivative.
    fn c119_prefactor(&self, x: f64) -> (f64, f64, f64) {
        let n = (self.d + self.r) as f64;
        let ni = (self.d + self.r) as i32;
        let p = -(self.r as f64) * (x + self.b).powi(2 * ni - 1) * (x - self.b) / x.powi(ni - 1);
        let lp = (2.0 * n - 1.0) / (x + self.b) + 1.0 / (x - self.b) - (n - 1.0) / x;
        let lpp = -(2.0 * n - 1.0) / ((x + self.b) * (x + self.b))
            - 1.0 / ((x - self.b) * (x - self.b))
            + (n - 1.0) / (x * x);
        (p, lp, lpp)
    }
}

/// Coefficients c_k of the degree-(n+1) polynomial family, k = 3 ..= n+1:
/// c_k = ((k−1)/(n+k−1)) · Π_{j=1}^{k−2} (n−j)/(n+j).
fn series_coefficients(n: u32) -> Vec<(u32, f64)> {
    let nf = n as f64;
    let mut out = Vec::new();
    for k in 3..=(n + 1) {
        let kf = k as f64;
        let mut c = (kf - 1.0) / (nf + kf - 1.0);
        for j in 1..=(k - 2) {
            c *= (nf - j as f64) / (nf + j as f64);
        }
        out.push((k, c));
    }
    out
}

/// Exact antiderivative of u^{n−1} / ((u+b)^{2n−2} (u−b)²) via partial
/// fractions. Both simple-pole residues vanish, so the antiderivative is a
/// rational function.
#[derive(Debug, Clone)]
struct RationalAntiderivative {
    n: u32,
    b: f64,
    /// A_j for j = 2 ..= 2n−2 (coefficients of (u+b)^{−j}).
    a_coef: Vec<f64>,
    /// Coefficient of (u−b)^{−2}.
    b2: f64,
}

impl RationalAntiderivative {
    fn new(n: u32, b: f64) -> Self {
        let m = (2 * n - 2) as usize;
        // A_j = g^{(m−j)}(−b) / (m−j)!, g(u) = u^{n−1} (u−b)^{−2}
        let g_deriv = |k: usize, u: f64| -> f64 {
            let mut acc = 0.0;
            let nm1 = (n - 1) as i64;
            for i in 0..=k.min(nm1 as usize) {
                let mut binom = 1.0;
                for t in 0..i {
                    binom *= (k - t) as f64 / (t + 1) as f64;
                }
                let mut falling = 1.0;
                for t in 0..i {
                    falling *= (nm1 - t as i64) as f64;
                }
                let p = k - i;
                let mut fact = 1.0;
                for t in 2..=(p + 1) {
                    fact *= t as f64;
                }
                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                acc += binom
                    * falling
                    * u.powi(nm1 as i32 - i as i32)
                    * sign
                    * fact
                    * (u - b).powi(-2 - p as i32);
            }
            acc
        };
        let mut a_coef = vec![0.0; m + 1];
        let mut factorial = 1.0;
        for j in (2..=m).rev() {
            let k = m - j;
            if k > 0 {
                factorial *= k as f64;
            }
            a_coef[j] = g_deriv(k, -b) / factorial;
        }
        let b2 = b.powi(n as i32 - 1) / (2.0 * b).powi(2 * n as i32 - 2);
        RationalAntiderivative { n, b, a_coef, b2 }
    }

    fn integrand(&self, u: f64) -> f64 {
        let n = self.n as i32;
        u.powi(n - 1) / ((u + self.b).powi(2 * n - 2) * (u - self.b) * (u - self.b))
    }

    fn integrand_deriv(&self, u: f64) -> f64 {
        let n = self.n as f64;
        self.integrand(u) * ((n - 1.0) / u - (2.0 * n - 2.0) / (u + self.b) - 2.0 / (u - self.b))
    }

    fn eval(&self, u: f64) -> f64 {
        let mut acc = -self.b2 / (u - self.b);
        for (j, aj) in self.a_coef.iter().enumerate().skip(2) {
            if *aj != 0.0 {
                acc -= aj / ((j as f64 - 1.0) * (u + self.b).powi(j as i32 - 1));
            }
        }
        acc
    }
}

/// Evaluate a printed closed form. `formula_id` is the display label, e.g.
/// "1.9".
pub fn closed_form_phi(formula_id: &str, d: u32, x: f64, extra: &ClosedFormExtra) -> Result<f64> {
    let cf = ClosedForm::new(ClosedFormId::parse(formula_id)?, d, extra)?;
    cf.check_domain(x)?;
    Ok(cf.eval(x))
}
