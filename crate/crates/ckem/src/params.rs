//! Parameter space of the momentum construction.
//!
//! A model is the tuple (d, r, λ, ν, a, b, μ, x0, x1) together with a case
//! label selecting one admissible family. The conformal factor is the affine
//! function f(x) = a x + b of the momentum variable, and γ is the Einstein
//! constant forced on the base metric. Dependent data (endpoints, μ for the
//! IV-2 family, γ) are derived once at construction and stored, so every
//! downstream residual uses one consistent value.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{CkemError, Result};

/// Extended real used for the interval endpoints. Infinite endpoints are a
/// tag, never a sentinel float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    NegInf,
    Finite(f64),
    PosInf,
}

impl Bound {
    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Finite value or an error naming the endpoint.
    pub fn expect_finite(self, case: &'static str, which: &'static str) -> Result<f64> {
        self.finite()
            .ok_or(CkemError::NeedsFiniteEndpoint(case, which))
    }

    fn approx_eq(self, other: Bound) -> bool {
        match (self, other) {
            (Bound::Finite(u), Bound::Finite(v)) => {
                (u - v).abs() <= 1e-12 * (1.0 + u.abs().max(v.abs()))
            }
            (a, b) => a == b,
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::NegInf => s.serialize_str("-inf"),
            Bound::PosInf => s.serialize_str("inf"),
            Bound::Finite(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> de::Visitor<'de> for V {
            type Value = Bound;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or \"inf\"/\"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Bound, E> {
                Ok(Bound::Finite(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Bound, E> {
                Ok(Bound::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Bound, E> {
                Ok(Bound::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Bound, E> {
                match v {
                    "inf" | "+inf" => Ok(Bound::PosInf),
                    "-inf" => Ok(Bound::NegInf),
                    _ => Err(E::custom(format!("bad endpoint string `{v}`"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// The seven admissible families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseId {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II-1")]
    II1,
    #[serde(rename = "II-2")]
    II2,
    #[serde(rename = "III-1")]
    III1,
    #[serde(rename = "III-2")]
    III2,
    #[serde(rename = "IV-1")]
    IV1,
    #[serde(rename = "IV-2")]
    IV2,
}

impl CaseId {
    pub fn label(self) -> &'static str {
        match self {
            CaseId::I => "I",
            CaseId::II1 => "II-1",
            CaseId::II2 => "II-2",
            CaseId::III1 => "III-1",
            CaseId::III2 => "III-2",
            CaseId::IV1 => "IV-1",
            CaseId::IV2 => "IV-2",
        }
    }

    /// Endpoint from which the profile integral is taken (lower for I and
    /// II-1, upper for the rest).
    pub fn reference_is_lower(self) -> bool {
        matches!(self, CaseId::I | CaseId::II1)
    }
}

/// Raw model input as it appears in config files. μ and the endpoints may be
/// omitted where the case determines them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub case: CaseId,
    pub d: u32,
    pub r: u32,
    pub lambda: f64,
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub x0: Option<Bound>,
    #[serde(default)]
    pub x1: Option<Bound>,
}

/// Validated parameter tuple. Immutable after construction.
#[derive(Debug, Clone, Serialize)]
pub struct ModelParams {
    pub case: CaseId,
    pub d: u32,
    pub r: u32,
    pub n: u32,
    pub lambda: f64,
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub gamma: f64,
    pub x0: Bound,
    pub x1: Bound,
}

impl ModelParams {
    /// Resolve a raw spec: fill case-determined fields, derive γ, validate.
    pub fn from_spec(spec: &ModelSpec) -> Result<Self> {
        let mut p = Self::resolve(spec)?;
        p.gamma = gamma_for_case(&p)?;
        let violations = validate(&p);
        if violations.is_empty() {
            Ok(p)
        } else {
            Err(CkemError::Inadmissible(violations))
        }
    }

    /// Like [`from_spec`](Self::from_spec) but keeps an inadmissible tuple so
    /// its violation list can be inspected.
    pub fn from_spec_unchecked(spec: &ModelSpec) -> Result<Self> {
        let mut p = Self::resolve(spec)?;
        p.gamma = gamma_for_case(&p).unwrap_or(f64::NAN);
        Ok(p)
    }

    fn resolve(spec: &ModelSpec) -> Result<Self> {
        let ModelSpec {
            case,
            d,
            r,
            lambda,
            nu,
            a,
            b,
            mu,
            x0,
            x1,
        } = spec.clone();
        if a == 0.0 {
            return Err(CkemError::Domain("a must be nonzero".into()));
        }
        let fz = Bound::Finite(-b / a);
        let (x0, x1, mu) = match case {
            CaseId::I => (
                x0.unwrap_or(Bound::Finite(0.0)),
                x1.unwrap_or(fz),
                mu.unwrap_or(0.0),
            ),
            CaseId::II1 => {
                let x0 = x0.ok_or_else(|| CkemError::Domain("case II-1 needs x0".into()))?;
                let mu = mu.ok_or_else(|| CkemError::Domain("case II-1 needs mu".into()))?;
                (x0, x1.unwrap_or(fz), mu)
            }
            CaseId::II2 => {
                let x1 = x1.ok_or_else(|| CkemError::Domain("case II-2 needs x1".into()))?;
                let mu = mu.ok_or_else(|| CkemError::Domain("case II-2 needs mu".into()))?;
                (x0.unwrap_or(fz), x1, mu)
            }
            CaseId::III1 => {
                let x1 = x1.ok_or_else(|| CkemError::Domain("case III-1 needs x1".into()))?;
                (x0.unwrap_or(fz), x1, mu.unwrap_or(0.0))
            }
            CaseId::III2 => {
                let x1 = x1.ok_or_else(|| CkemError::Domain("case III-2 needs x1".into()))?;
                let mu = mu.ok_or_else(|| CkemError::Domain("case III-2 needs mu".into()))?;
                (x0.unwrap_or(fz), x1, mu)
            }
            CaseId::IV1 => {
                let x1c = if r > 1 {
                    Bound::Finite(-((r as f64) + 1.0) * b / (((r as f64) - 1.0) * a))
                } else {
                    Bound::PosInf
                };
                (x0.unwrap_or(fz), x1.unwrap_or(x1c), mu.unwrap_or(0.0))
            }
            CaseId::IV2 => {
                let x1 = x1.ok_or_else(|| CkemError::Domain("case IV-2 needs x1".into()))?;
                let mu = match mu {
                    Some(m) => m,
                    None => {
                        let x1f = x1.expect_finite("IV-2", "x1")?;
                        mu_for_case_iv2(a, b, r, x1f)?
                    }
                };
                (x0.unwrap_or(fz), x1, mu)
            }
        };
        Ok(ModelParams {
            case,
            d,
            r,
            n: d + r,
            lambda,
            nu,
            a,
            b,
            mu,
            gamma: f64::NAN,
            x0,
            x1,
        })
    }

    /// Conformal factor f(x) = a x + b.
    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    /// The weight argument ν + λx.
    #[inline]
    pub fn nu_lambda(&self, x: f64) -> f64 {
        self.nu + self.lambda * x
    }

    /// s(x) = aλx + 2aν − bλ, the extra linear factor in the first-order
    /// residual coefficients. Its zero lies outside every admissible interval.
    #[inline]
    pub fn s(&self, x: f64) -> f64 {
        self.a * self.lambda * x + 2.0 * self.a * self.nu - self.b * self.lambda
    }

    /// Momentum weight p(x) = (ν+λx)^d x^{r−1}.
    pub fn p(&self, x: f64) -> f64 {
        let u = self.nu_lambda(x);
        u.powi(self.d as i32) * x.powi(self.r as i32 - 1)
    }

    pub fn p_prime(&self, x: f64) -> f64 {
        let d = self.d as f64;
        let rm1 = self.r as f64 - 1.0;
        let u = self.nu_lambda(x);
        let mut out = d * self.lambda * u.powi(self.d as i32 - 1) * x.powi(self.r as i32 - 1);
        if self.r > 1 {
            out += rm1 * u.powi(self.d as i32) * x.powi(self.r as i32 - 2);
        }
        out
    }

    pub fn p_second(&self, x: f64) -> f64 {
        let d = self.d as f64;
        let rm1 = self.r as f64 - 1.0;
        let u = self.nu_lambda(x);
        let mut out = d
            * (d - 1.0)
            * self.lambda
            * self.lambda
            * u.powi(self.d as i32 - 2)
            * x.powi(self.r as i32 - 1);
        if self.r > 1 {
            out +=
                2.0 * d * self.lambda * rm1 * u.powi(self.d as i32 - 1) * x.powi(self.r as i32 - 2);
            if self.r > 2 {
                out +=
                    rm1 * (self.r as f64 - 2.0) * u.powi(self.d as i32) * x.powi(self.r as i32 - 3);
            }
        }
        out
    }

    /// p'/p = dλ/(ν+λx) + (r−1)/x; the second term is identically absent
    /// for r = 1, including at x = 0.
    #[inline]
    pub fn p_log_deriv(&self, x: f64) -> f64 {
        let mut out = self.d as f64 * self.lambda / self.nu_lambda(x);
        if self.r > 1 {
            out += (self.r as f64 - 1.0) / x;
        }
        out
    }

    /// (p'/p)' in closed form.
    #[inline]
    pub fn p_log_deriv_prime(&self, x: f64) -> f64 {
        let u = self.nu_lambda(x);
        let mut out = -(self.d as f64) * self.lambda * self.lambda / (u * u);
        if self.r > 1 {
            out -= (self.r as f64 - 1.0) / (x * x);
        }
        out
    }

    /// Strict interior test.
    pub fn contains(&self, x: f64) -> bool {
        let above = match self.x0 {
            Bound::NegInf => true,
            Bound::Finite(v) => x > v,
            Bound::PosInf => false,
        };
        let below = match self.x1 {
            Bound::PosInf => true,
            Bound::Finite(v) => x < v,
            Bound::NegInf => false,
        };
        above && below && x.is_finite()
    }

    pub fn require_interior(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(CkemError::Domain(format!(
                "x = {x} is outside the open interval ({:?}, {:?})",
                self.x0, self.x1
            )))
        }
    }

    /// Chart mapping the momentum interval onto a bounded working interval.
    pub fn chart(&self) -> Chart {
        match (self.x0, self.x1) {
            (Bound::NegInf, Bound::Finite(hi)) => {
                let c = hi + 1.0 + 0.1 * hi.abs();
                Chart::Inverted { c }
            }
            (Bound::Finite(lo), Bound::PosInf) => {
                let c = lo - 1.0 - 0.1 * lo.abs();
                Chart::Inverted { c }
            }
            _ => Chart::Identity,
        }
    }

    /// Working-coordinate images of (x0, x1), ordered and finite.
    pub fn working_interval(&self) -> (f64, f64) {
        let chart = self.chart();
        let lo = match self.x0 {
            Bound::Finite(v) => chart.w_of_x(v),
            Bound::NegInf => 0.0,
            Bound::PosInf => unreachable!("x0 = +inf is never admissible"),
        };
        let hi = match self.x1 {
            Bound::Finite(v) => chart.w_of_x(v),
            Bound::PosInf => 0.0,
            Bound::NegInf => unreachable!("x1 = -inf is never admissible"),
        };
        if lo < hi {
            (lo, hi)
        } else {
            (hi, lo)
        }
    }

    /// `count` strictly interior points, uniform in the working coordinate.
    pub fn interior_grid(&self, count: usize) -> Vec<f64> {
        let chart = self.chart();
        let (wlo, whi) = self.working_interval();
        let mut out = Vec::with_capacity(count);
        for k in 1..=count {
            let w = wlo + (whi - wlo) * (k as f64) / (count as f64 + 1.0);
            out.push(chart.x_of_w(w));
        }
        out.sort_by(|p, q| p.partial_cmp(q).unwrap());
        out
    }
}

/// Coordinate used to compactify an unbounded momentum interval.
#[derive(Debug, Clone, Copy)]
pub enum Chart {
    Identity,
    /// w = 1/(c − x), x = c − 1/w; c lies outside the closed interval.
    Inverted {
        c: f64,
    },
}

impl Chart {
    #[inline]
    pub fn w_of_x(self, x: f64) -> f64 {
        match self {
            Chart::Identity => x,
            Chart::Inverted { c } => 1.0 / (c - x),
        }
    }

    #[inline]
    pub fn x_of_w(self, w: f64) -> f64 {
        match self {
            Chart::Identity => w,
            Chart::Inverted { c } => c - 1.0 / w,
        }
    }

    /// dw/dx at x.
    #[inline]
    pub fn dw_dx(self, x: f64) -> f64 {
        match self {
            Chart::Identity => 1.0,
            Chart::Inverted { c } => {
                let w = 1.0 / (c - x);
                w * w
            }
        }
    }

    /// d²w/dx² at x.
    #[inline]
    pub fn d2w_dx2(self, x: f64) -> f64 {
        match self {
            Chart::Identity => 0.0,
            Chart::Inverted { c } => {
                let w = 1.0 / (c - x);
                2.0 * w * w * w
            }
        }
    }

    /// dx/dw at w (for integration in the working coordinate).
    #[inline]
    pub fn dx_dw(self, w: f64) -> f64 {
        match self {
            Chart::Identity => 1.0,
            Chart::Inverted { .. } => 1.0 / (w * w),
        }
    }
}

/// γ forced on the base metric by each family.
pub fn gamma_for_case(p: &ModelParams) -> Result<f64> {
    let end_ratio = |x: Bound| -> Result<f64> {
        // μ(ν+λx*)/(b+ax*)²; the x* → ∞ limit is 0, which is also what the
        // completeness argument forces for unbounded intervals.
        Ok(match x {
            Bound::Finite(v) => p.mu * p.nu_lambda(v) / (p.f(v) * p.f(v)),
            _ => 0.0,
        })
    };
    match p.case {
        CaseId::I => Ok(p.lambda + p.mu - 2.0 * p.a),
        CaseId::II1 => end_ratio(p.x0),
        CaseId::II2 => end_ratio(p.x1),
        CaseId::III1 => {
            let x1 = p.x1.expect_finite("III-1", "x1")?;
            Ok(p.s(x1) / p.f(x1))
        }
        CaseId::III2 => {
            let x1 = p.x1.expect_finite("III-2", "x1")?;
            Ok(p.mu * p.nu_lambda(x1) / (p.f(x1) * p.f(x1)) + p.s(x1) / p.f(x1))
        }
        CaseId::IV1 | CaseId::IV2 => Ok(p.r as f64 * p.lambda),
    }
}

/// μ determined by the upper endpoint in the IV-2 family; negative inside the
/// admissible window, rejected otherwise.
pub fn mu_for_case_iv2(a: f64, b: f64, r: u32, x1: f64) -> Result<f64> {
    let f1 = a * x1 + b;
    let mu = f1 * (r as f64 * f1 - (a * x1 - b)) / x1;
    if mu < 0.0 {
        Ok(mu)
    } else {
        Err(CkemError::Domain(format!(
            "computed mu = {mu} is not negative: x1 = {x1} lies outside the IV-2 window"
        )))
    }
}

fn near(u: f64, v: f64) -> bool {
    (u - v).abs() <= 1e-12 * (1.0 + u.abs().max(v.abs()))
}

/// Every violated admissibility condition, by name. Empty iff the tuple lies
/// in its case's admissible set. Output is sorted, so reporting is
/// order-insensitive.
pub fn validate(p: &ModelParams) -> Vec<String> {
    let mut v: Vec<String> = Vec::new();
    let mut check = |ok: bool, name: &str| {
        if !ok {
            v.push(format!("{name} violated"));
        }
    };

    check(p.d >= 1, "d>=1");
    check(p.r >= 1, "r>=1");
    check(p.n == p.d + p.r, "n=d+r");
    check(p.lambda != 0.0, "lambda!=0");
    check(p.a != 0.0, "a!=0");
    check(p.nu == 0.0 || p.nu == 1.0, "nu in {0,1}");
    check(p.mu <= 0.0, "mu<=0");

    let ordered = match (p.x0, p.x1) {
        (Bound::Finite(lo), Bound::Finite(hi)) => lo < hi,
        (Bound::NegInf, Bound::NegInf) | (Bound::PosInf, _) | (_, Bound::NegInf) => false,
        _ => true,
    };
    check(ordered, "x0<x1");

    let fz = -p.b / p.a;
    match p.case {
        CaseId::I => {
            check(p.nu == 1.0, "nu=1");
            check(p.b == 1.0, "b=1");
            check(p.r == 1, "r=1");
            check(p.a < 0.0, "a<0");
            check(p.a <= p.lambda, "a<=lambda");
            check(p.x0.approx_eq(Bound::Finite(0.0)), "x0=0");
            check(p.x1.approx_eq(Bound::Finite(-1.0 / p.a)), "x1=-1/a");
        }
        CaseId::II1 => {
            check(p.r == 1, "r=1");
            check(p.mu < 0.0, "mu<0");
            check(p.a < 0.0, "a<0");
            check(p.x1.approx_eq(Bound::Finite(fz)), "x1=-b/a");
            if p.lambda < 0.0 {
                check(fz <= -p.nu / p.lambda + 1e-12, "-b/a<=-nu/lambda");
            } else if p.lambda > 0.0 {
                check(-p.nu / p.lambda < fz, "-nu/lambda<-b/a");
                match p.x0 {
                    Bound::Finite(lo) => check(lo >= -p.nu / p.lambda - 1e-12, "x0>=-nu/lambda"),
                    _ => check(false, "x0>=-nu/lambda"),
                }
            }
        }
        CaseId::II2 => {
            check(p.r == 1, "r=1");
            check(p.mu < 0.0, "mu<0");
            check(p.a > 0.0, "a>0");
            check(p.x0.approx_eq(Bound::Finite(fz)), "x0=-b/a");
            if p.lambda > 0.0 {
                check(fz >= -p.nu / p.lambda - 1e-12, "-b/a>=-nu/lambda");
            } else if p.lambda < 0.0 {
                check(-p.nu / p.lambda > fz, "-nu/lambda>-b/a");
                match p.x1 {
                    Bound::Finite(hi) => check(hi <= -p.nu / p.lambda + 1e-12, "x1<=-nu/lambda"),
                    _ => check(false, "x1<=-nu/lambda"),
                }
            }
        }
        CaseId::III1 | CaseId::III2 => {
            check(p.r == 1, "r=1");
            check(p.a > 0.0, "a>0");
            if p.case == CaseId::III1 {
                check(p.mu == 0.0, "mu=0");
            } else {
                check(p.mu < 0.0, "mu<0");
            }
            check(p.x0.approx_eq(Bound::Finite(fz)), "x0=-b/a");
            check(p.x1.is_finite(), "x1 finite");
            if p.lambda > 0.0 {
                check(fz >= -p.nu / p.lambda - 1e-12, "-b/a>=-nu/lambda");
            } else if p.lambda < 0.0 {
                check(-p.nu / p.lambda > fz, "-nu/lambda>-b/a");
                match p.x1 {
                    Bound::Finite(hi) => check(hi <= -p.nu / p.lambda + 1e-12, "x1<=-nu/lambda"),
                    _ => {}
                }
            }
        }
        CaseId::IV1 | CaseId::IV2 => {
            check(p.r > 1, "r>1");
            check(p.nu == 0.0, "nu=0");
            check(p.lambda > 0.0, "lambda>0");
            check(p.a > 0.0, "a>0");
            check(p.b < 0.0, "b<0");
            check(p.x0.approx_eq(Bound::Finite(fz)), "x0=-b/a");
            let x1c = -((p.r as f64) + 1.0) * p.b / (((p.r as f64) - 1.0) * p.a);
            if p.case == CaseId::IV1 {
                check(p.mu == 0.0, "mu=0");
                check(p.x1.approx_eq(Bound::Finite(x1c)), "x1=-(r+1)b/((r-1)a)");
            } else {
                match p.x1 {
                    Bound::Finite(hi) => {
                        check(hi < x1c, "x1<-(r+1)b/((r-1)a)");
                        check(hi > fz, "x1>-b/a");
                        if let Ok(mu) = mu_for_case_iv2(p.a, p.b, p.r, hi) {
                            check(near(p.mu, mu), "mu matches IV-2 formula");
                        } else {
                            check(false, "mu<0");
                        }
                    }
                    _ => check(false, "x1 finite"),
                }
            }
        }
    }

    // γ must match the stored value.
    if let Ok(g) = gamma_for_case(p) {
        check(near(p.gamma, g), "gamma matches case formula");
    }

    // Pointwise positivity along a compactified grid; also rejects an s(x)
    // zero inside the interval, which would put a pole on the integration
    // path of the profile integral.
    if ordered {
        let mut f_pos = true;
        let mut u_pos = true;
        let mut x_pos = true;
        let mut s_sign: f64 = 0.0;
        let mut s_ok = true;
        for x in p.interior_grid(1000) {
            if p.f(x) <= 0.0 {
                f_pos = false;
            }
            if p.nu_lambda(x) <= 0.0 {
                u_pos = false;
            }
            if p.r > 1 && x <= 0.0 {
                x_pos = false;
            }
            let s = p.s(x);
            if s == 0.0 || (s_sign != 0.0 && s.signum() != s_sign) {
                s_ok = false;
            }
            s_sign = s.signum();
        }
        check(f_pos, "f>0 on (x0,x1)");
        check(u_pos, "nu+lambda*x>0 on (x0,x1)");
        if p.r > 1 {
            check(x_pos, "x>0 on (x0,x1)");
        }
        check(s_ok, "s(x)!=0 on (x0,x1)");
    }

    v.sort();
    v.dedup();
    v
}
