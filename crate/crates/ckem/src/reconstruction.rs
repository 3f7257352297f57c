//! Recovery of the fiber variable t and the potential profile F from a
//! momentum profile: t is the antiderivative of 1/φ, F of x/φ, and x(t)
//! inverts the strictly increasing t(x).

use crate::cheb::{nodes, refined_boundaries, Panel, PanelSet};
use crate::error::{CkemError, Result};
use crate::params::{Bound, CaseId, Chart, ModelParams};
use crate::profiles::MomentumProfile;
use crate::quad::{integrate, REL_TARGET};

const PANEL_ORDER: usize = 40;
const EDGE_FRACTION: f64 = 1e-8;

/// Immutable reconstruction tables for one profile.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    params: ModelParams,
    chart: Chart,
    pub x_ref: f64,
    pub t_ref: f64,
    pub f_ref: f64,
    phi_table: PanelSet,
    t_table: PanelSet,
    big_f_table: PanelSet,
    /// Sorted (w, t) pairs for root bracketing.
    knots: Vec<(f64, f64)>,
    phi_mid: f64,
    lower_phi_limit: f64,
    upper_phi_limit: f64,
}

/// Anchor used in the published construction of each family: the profile
/// integral's finite-φ endpoint where t → 0, or the interval midpoint when
/// both t-limits are infinite.
pub fn default_anchor(params: &ModelParams) -> (f64, f64) {
    let chart = params.chart();
    let (wlo, whi) = params.working_interval();
    let midpoint = chart.x_of_w(0.5 * (wlo + whi));
    let x = match params.case {
        CaseId::I => {
            if params.mu < 0.0 {
                params.x1.finite().unwrap_or(midpoint)
            } else {
                0.5 * params.x1.finite().unwrap_or(midpoint)
            }
        }
        CaseId::II1 => params.x1.finite().unwrap_or(midpoint),
        CaseId::II2 | CaseId::III2 | CaseId::IV2 => params.x0.finite().unwrap_or(midpoint),
        CaseId::III1 | CaseId::IV1 => midpoint,
    };
    (x, 0.0)
}

impl Reconstruction {
    pub fn build(profile: &MomentumProfile) -> Result<Self> {
        let (x_ref, t_ref) = default_anchor(profile.params());
        Self::with_anchor(profile, x_ref, t_ref, 0.0)
    }

    /// Build with an explicit anchor: t(x_ref) = t_ref, F(t_ref) = f_ref.
    pub fn with_anchor(
        profile: &MomentumProfile,
        x_ref: f64,
        t_ref: f64,
        f_ref: f64,
    ) -> Result<Self> {
        let params = profile.params().clone();
        let chart = params.chart();
        let (wlo, whi) = params.working_interval();
        let w_ref = chart.w_of_x(x_ref);
        if !(w_ref >= wlo && w_ref <= whi) {
            return Err(CkemError::Domain(format!(
                "anchor x = {x_ref} lies outside the momentum interval"
            )));
        }

        let bounds = refined_boundaries(wlo, whi, EDGE_FRACTION);
        let mut panel_nodes: Vec<Vec<f64>> = Vec::new();
        let mut flat: Vec<(f64, usize, usize)> = Vec::new();
        for (pi, win) in bounds.windows(2).enumerate() {
            let ns = nodes(win[0], win[1], PANEL_ORDER);
            for (ni, &w) in ns.iter().enumerate() {
                flat.push((w, pi, ni));
            }
            panel_nodes.push(ns);
        }
        flat.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        // φ sampled once per node; t and F accumulate 1/φ and x/φ.
        let mut phi_vals: Vec<Vec<f64>> = panel_nodes.iter().map(|n| vec![0.0; n.len()]).collect();
        let mut t_vals = phi_vals.clone();
        let mut f_vals = phi_vals.clone();
        for &(w, pi, ni) in &flat {
            phi_vals[pi][ni] = profile.eval(chart.x_of_w(w))?;
        }

        let inv_phi = |w: f64| -> f64 {
            let x = chart.x_of_w(w);
            chart.dx_dw(w) / profile.eval(x).unwrap_or(f64::NAN)
        };
        let x_over_phi = |w: f64| -> f64 {
            let x = chart.x_of_w(w);
            x * chart.dx_dw(w) / profile.eval(x).unwrap_or(f64::NAN)
        };

        let split = flat.partition_point(|&(w, _, _)| w < w_ref);
        let mut knots = Vec::with_capacity(flat.len());
        // forward sweep from the anchor
        let mut acc_t = t_ref;
        let mut acc_f = f_ref;
        let mut prev = w_ref;
        for &(w, pi, ni) in &flat[split..] {
            acc_t += integrate(inv_phi, prev, w, REL_TARGET, 0.0, 400).value;
            acc_f += integrate(x_over_phi, prev, w, REL_TARGET, 0.0, 400).value;
            t_vals[pi][ni] = acc_t;
            f_vals[pi][ni] = acc_f;
            prev = w;
        }
        // backward sweep
        acc_t = t_ref;
        acc_f = f_ref;
        prev = w_ref;
        for &(w, pi, ni) in flat[..split].iter().rev() {
            acc_t += integrate(inv_phi, prev, w, REL_TARGET, 0.0, 400).value;
            acc_f += integrate(x_over_phi, prev, w, REL_TARGET, 0.0, 400).value;
            t_vals[pi][ni] = acc_t;
            f_vals[pi][ni] = acc_f;
            prev = w;
        }
        for &(w, pi, ni) in &flat {
            knots.push((w, t_vals[pi][ni]));
        }

        let fit_all = |vals: &[Vec<f64>]| -> PanelSet {
            PanelSet::new(
                bounds
                    .windows(2)
                    .zip(vals.iter())
                    .map(|(win, v)| Panel::fit(win[0], win[1], v))
                    .collect(),
            )
        };

        let phi_mid = profile.eval(chart.x_of_w(0.5 * (wlo + whi)))?;
        Ok(Reconstruction {
            params,
            chart,
            x_ref,
            t_ref,
            f_ref,
            phi_table: fit_all(&phi_vals),
            t_table: fit_all(&t_vals),
            big_f_table: fit_all(&f_vals),
            knots,
            phi_mid,
            lower_phi_limit: profile.endpoint_value(false),
            upper_phi_limit: profile.endpoint_value(true),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// φ(x) from the cached table.
    pub fn phi(&self, x: f64) -> f64 {
        self.phi_table.eval(self.chart.w_of_x(x))
    }

    /// φ′(x) from the cached table.
    pub fn dphi(&self, x: f64) -> f64 {
        self.phi_table.deriv(self.chart.w_of_x(x)) * self.chart.dw_dx(x)
    }

    /// t(x) = t_ref + ∫ dv/φ(v) for interior x.
    pub fn t_of_x(&self, x: f64) -> Result<f64> {
        self.params.require_interior(x)?;
        Ok(self.t_table.eval(self.chart.w_of_x(x)))
    }

    /// Limit of t at an interval end; the divergent ends carry a tag, never
    /// a float.
    pub fn t_limit(&self, upper: bool) -> Bound {
        let (end, phi_lim) = if upper {
            (self.params.x1, self.upper_phi_limit)
        } else {
            (self.params.x0, self.lower_phi_limit)
        };
        let diverges = !end.is_finite() || phi_lim.abs() <= 1e-8 * self.phi_mid.abs();
        if diverges {
            if upper {
                Bound::PosInf
            } else {
                Bound::NegInf
            }
        } else {
            let w = if upper {
                self.t_table.hi()
            } else {
                self.t_table.lo()
            };
            Bound::Finite(self.t_table.eval(w))
        }
    }

    /// The open t-interval realized by the model.
    pub fn t_range(&self) -> (Bound, Bound) {
        (self.t_limit(false), self.t_limit(true))
    }

    fn t_in_range(&self, t: f64) -> bool {
        let above = match self.t_limit(false) {
            Bound::Finite(v) => t > v,
            Bound::NegInf => true,
            Bound::PosInf => false,
        };
        let below = match self.t_limit(true) {
            Bound::Finite(v) => t < v,
            Bound::PosInf => true,
            Bound::NegInf => false,
        };
        above && below
    }

    /// x(t): unique root of t(x) = t. Bracketed by the cached knots, then
    /// polished by Newton with dt/dx = 1/φ; 80-iteration cap.
    pub fn x_of_t(&self, t: f64) -> Result<f64> {
        if !self.t_in_range(t) {
            return Err(CkemError::Domain(format!(
                "t = {t} outside the image interval {:?}",
                self.t_range()
            )));
        }
        let idx = self.knots.partition_point(|&(_, tk)| tk < t);
        let (mut w_lo, mut w_hi) = match (
            idx.checked_sub(1).and_then(|i| self.knots.get(i)),
            self.knots.get(idx),
        ) {
            (Some(&(wl, _)), Some(&(wh, _))) => (wl, wh),
            (None, Some(&(wh, _))) => (self.t_table.lo(), wh),
            (Some(&(wl, _)), None) => (wl, self.t_table.hi()),
            _ => (self.t_table.lo(), self.t_table.hi()),
        };
        let mut w = 0.5 * (w_lo + w_hi);
        // Converge to the floating-point root, not merely to an accuracy
        // threshold: downstream finite differencing needs x(t) smooth in t at
        // machine level.
        let tol = 4.0 * f64::EPSILON * (1.0 + t.abs());
        let mut converged = false;
        for _ in 0..80 {
            let tv = self.t_table.eval(w);
            let err = tv - t;
            if err.abs() <= tol {
                converged = true;
                break;
            }
            if err > 0.0 {
                w_hi = w;
            } else {
                w_lo = w;
            }
            let slope = self.t_table.deriv(w);
            let mut next = w - err / slope;
            if !(next > w_lo && next < w_hi) || !next.is_finite() {
                next = 0.5 * (w_lo + w_hi);
            }
            w = next;
        }
        if !converged && (self.t_table.eval(w) - t).abs() > 1e-10 * (1.0 + t.abs()) {
            return Err(CkemError::RootFinding(format!(
                "x(t) did not converge for t = {t}: residual {}",
                self.t_table.eval(w) - t
            )));
        }
        // final Newton polish for a deterministic, jitter-free root
        for _ in 0..2 {
            let err = self.t_table.eval(w) - t;
            let slope = self.t_table.deriv(w);
            if slope.is_finite() && slope != 0.0 {
                w -= err / slope;
            }
        }
        Ok(self.chart.x_of_w(w))
    }

    /// F(t) = f_ref + ∫ v dv/φ(v) taken to x(t).
    pub fn f_of_t(&self, t: f64) -> Result<f64> {
        let x = self.x_of_t(t)?;
        Ok(self.big_f_table.eval(self.chart.w_of_x(x)))
    }

    /// F(x) along the momentum variable (same normalization).
    pub fn f_of_x(&self, x: f64) -> Result<f64> {
        self.params.require_interior(x)?;
        Ok(self.big_f_table.eval(self.chart.w_of_x(x)))
    }
}

/// CSV table of the reconstruction on an x-grid: t, x, F per row.
pub fn reconstruction_csv(recon: &Reconstruction, grid: &[f64]) -> Result<String> {
    let mut out = String::from("t,x,F\n");
    for &x in grid {
        let t = recon.t_of_x(x)?;
        let f = recon.f_of_x(x)?;
        out.push_str(&format!("{t},{x},{f}\n"));
    }
    Ok(out)
}
