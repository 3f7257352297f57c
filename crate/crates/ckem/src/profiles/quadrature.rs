//! Momentum profiles from the integrating-factor representation.
//!
//! Every admissible family shares one structure: with p(x) = (ν+λx)^d x^{r−1},
//! f = ax+b, s = aλx+2aν−bλ and n = d+r,
//!
//! ```text
//! φ(x) = [f^{2n−1} s / p](x) · ∫_{x*}^{x} p(u)·(μ(ν+λu) − γ f(u)²)
//!                                        / (f(u)^{2n} s(u)²) du,
//! ```
//!
//! where x* is the case's reference endpoint (possibly infinite) and γ the
//! stored base Einstein constant. The profile is materialized as a piecewise
//! Chebyshev table on the compactified interval; the antiderivative is
//! accumulated incrementally along the sorted node set so each segment is a
//! short smooth quadrature.

use crate::cheb::{nodes, refined_boundaries, Panel, PanelSet};
use crate::error::{CkemError, Result};
use crate::params::{Bound, Chart, ModelParams};
use crate::quad::{integrate, QuadResult, REL_ACCEPT, REL_TARGET};

const PANEL_ORDER: usize = 40;
const EDGE_FRACTION: f64 = 1e-8;
/// Fraction of the interval within which endpoint cancellation in f = ax+b
/// (absolute float error ε·|x| against a vanishing value) caps the attainable
/// relative accuracy; the 1e-10 acceptance applies outside it.
const CERTIFIED_DEPTH: f64 = 1e-4;

/// Integrand of the profile integral, in the momentum variable.
pub(crate) fn integrand(p: &ModelParams, u: f64) -> f64 {
    let f = p.f(u);
    let s = p.s(u);
    p.p(u) * (p.mu * p.nu_lambda(u) - p.gamma * f * f) / (f.powi(2 * p.n as i32) * s * s)
}

/// Reciprocal integrating factor f^{2n−1} s / p.
pub(crate) fn inv_integrating_factor(p: &ModelParams, x: f64) -> f64 {
    p.f(x).powi(2 * p.n as i32 - 1) * p.s(x) / p.p(x)
}

fn reference_w(p: &ModelParams, chart: Chart) -> f64 {
    let (wlo, whi) = p.working_interval();
    if p.case.reference_is_lower() {
        match p.x0 {
            Bound::Finite(v) => chart.w_of_x(v),
            _ => wlo,
        }
    } else {
        match p.x1 {
            Bound::Finite(v) => chart.w_of_x(v),
            _ => whi,
        }
    }
}

fn check_no_pole(p: &ModelParams) -> Result<()> {
    let grid = p.interior_grid(257);
    let mut fs: f64 = 0.0;
    let mut ss: f64 = 0.0;
    for &x in &grid {
        let f = p.f(x);
        let s = p.s(x);
        if f == 0.0
            || (fs != 0.0 && f.signum() != fs)
            || s == 0.0
            || (ss != 0.0 && s.signum() != ss)
        {
            return Err(CkemError::IntegrandPole(x));
        }
        fs = f.signum();
        ss = s.signum();
    }
    Ok(())
}

/// One-shot evaluation of the profile integral at `x`, with the case's
/// reference endpoint and prefactor. Relative quadrature error must reach
/// the acceptance threshold.
pub fn phi_quadrature(p: &ModelParams, x: f64) -> Result<f64> {
    let exact_reference = match (p.case.reference_is_lower(), p.x0, p.x1) {
        (true, Bound::Finite(v), _) | (false, _, Bound::Finite(v)) => x == v,
        _ => false,
    };
    if exact_reference {
        return Ok(0.0);
    }
    p.require_interior(x)?;
    check_no_pole(p)?;
    let chart = p.chart();
    let w_ref = reference_w(p, chart);
    let w_x = chart.w_of_x(x);
    let g = |w: f64| integrand(p, chart.x_of_w(w)) * chart.dx_dw(w);
    let q = integrate(g, w_ref, w_x, REL_TARGET, 0.0, 4000);
    if q.rel_err() > REL_ACCEPT {
        return Err(CkemError::QuadratureAccuracy {
            achieved: q.rel_err(),
            accept: REL_ACCEPT,
        });
    }
    Ok(inv_integrating_factor(p, x) * q.value)
}

/// Cached dense table of a quadrature-backed profile.
#[derive(Debug, Clone)]
pub struct QuadTable {
    pub(crate) chart: Chart,
    table: PanelSet,
    /// Largest estimated relative error of the antiderivative over the nodes.
    pub max_rel_err: f64,
    pub lower_value: f64,
    pub upper_value: f64,
}

impl QuadTable {
    pub fn build(p: &ModelParams) -> Result<Self> {
        check_no_pole(p)?;
        let chart = p.chart();
        let (wlo, whi) = p.working_interval();
        let bounds = refined_boundaries(wlo, whi, EDGE_FRACTION);

        // All panel nodes, remembering their home panel.
        let mut panel_nodes: Vec<Vec<f64>> = Vec::with_capacity(bounds.len() - 1);
        let mut flat: Vec<(f64, usize, usize)> = Vec::new();
        for (pi, win) in bounds.windows(2).enumerate() {
            let ns = nodes(win[0], win[1], PANEL_ORDER);
            for (ni, &w) in ns.iter().enumerate() {
                flat.push((w, pi, ni));
            }
            panel_nodes.push(ns);
        }
        flat.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let w_ref = reference_w(p, chart);
        let g = |w: f64| integrand(p, chart.x_of_w(w)) * chart.dx_dw(w);

        // Accumulate the antiderivative from the reference end outward.
        let mut values: Vec<Vec<f64>> = panel_nodes.iter().map(|ns| vec![0.0; ns.len()]).collect();
        let mut max_rel: f64 = 0.0;
        let from_low = (w_ref - wlo).abs() <= (w_ref - whi).abs();
        let order: Box<dyn Iterator<Item = &(f64, usize, usize)>> = if from_low {
            Box::new(flat.iter())
        } else {
            Box::new(flat.iter().rev())
        };

        let span = whi - wlo;
        let mut acc = 0.0;
        let mut acc_err = 0.0;
        let mut prev_w = w_ref;
        for &(w, pi, ni) in order {
            let q: QuadResult = integrate(g, prev_w, w, REL_TARGET, 0.0, 400);
            acc += q.value;
            acc_err += q.abs_err;
            prev_w = w;
            let x = chart.x_of_w(w);
            let phi = inv_integrating_factor(p, x) * acc;
            values[pi][ni] = phi;
            let depth = (w - wlo).min(whi - w) / span;
            if acc != 0.0 && depth >= CERTIFIED_DEPTH {
                max_rel = max_rel.max(acc_err / acc.abs());
            }
            if !phi.is_finite() || phi <= 0.0 {
                return Err(CkemError::Domain(format!(
                    "profile is not positive at x = {x} (phi = {phi}); parameters are outside \
                     the admissible set"
                )));
            }
        }
        if max_rel > REL_ACCEPT {
            return Err(CkemError::QuadratureAccuracy {
                achieved: max_rel,
                accept: REL_ACCEPT,
            });
        }

        let panels: Vec<Panel> = bounds
            .windows(2)
            .zip(values.iter())
            .map(|(win, vals)| Panel::fit(win[0], win[1], vals))
            .collect();
        let table = PanelSet::new(panels);

        // Endpoint limits: exact zero at a finite reference endpoint, stub
        // extrapolation elsewhere.
        let lower_value = if p.case.reference_is_lower() && p.x0.is_finite() {
            0.0
        } else {
            table.eval(wlo)
        };
        let upper_value = if !p.case.reference_is_lower() && p.x1.is_finite() {
            0.0
        } else {
            table.eval(whi)
        };

        Ok(QuadTable {
            chart,
            table,
            max_rel_err: max_rel,
            lower_value,
            upper_value,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.table.eval(self.chart.w_of_x(x))
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let w = self.chart.w_of_x(x);
        self.table.deriv(w) * self.chart.dw_dx(x)
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        let w = self.chart.w_of_x(x);
        let d1 = self.chart.dw_dx(x);
        self.table.deriv2(w) * d1 * d1 + self.table.deriv(w) * self.chart.d2w_dx2(x)
    }
}
