//! Piecewise Chebyshev tables.
//!
//! A cached function is stored per panel as a Chebyshev series fitted at
//! first-kind nodes (all strictly interior, so the sampled function is never
//! evaluated at a panel edge). Panels are geometrically refined toward both
//! interval ends, which keeps the interpolant spectrally accurate even when
//! the function loses analyticity at an endpoint.

/// One panel: a Chebyshev series on [a, b] plus its first two derivative
/// series, all in the panel variable ξ ∈ [−1, 1].
#[derive(Debug, Clone)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    coef: Vec<f64>,
    coef_d1: Vec<f64>,
    coef_d2: Vec<f64>,
}

/// First-kind Chebyshev nodes on [a, b], descending in the coordinate.
pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..n)
        .map(|j| {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
            mid + half * theta.cos()
        })
        .collect()
}

fn fit_coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut coef = vec![0.0; n];
    coef[0] = mean;
    for (k, c) in coef.iter_mut().enumerate().skip(1) {
        // Σ cos(kθ_j) vanishes exactly over first-kind nodes, so the mean can
        // be removed first; this keeps nearly-constant panels from leaking
        // O(ε·|f|) noise into the high coefficients, which the derivative
        // recurrence would amplify by 1/width.
        let mut acc = 0.0;
        for (j, v) in values.iter().enumerate() {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
            acc += (v - mean) * (k as f64 * theta).cos();
        }
        *c = acc * 2.0 / n as f64;
    }
    // Drop the rounding plateau: when the series has converged, the trailing
    // coefficients sit at the sampling noise level and only feed k²-amplified
    // noise into the derivative series.
    let maxabs = coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let tail = n / 3;
    if maxabs > 0.0 && tail >= 4 {
        let mut tail_mags: Vec<f64> = coef[n - tail..].iter().map(|c| c.abs()).collect();
        tail_mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let converged = tail_mags[tail / 2] <= 1e-10 * maxabs;
        if converged {
            // sampling noise propagates into each coefficient at ~√N·ε·|f|
            let threshold = 4.0 * (n as f64).sqrt() * f64::EPSILON * maxabs;
            let mut keep = coef.len();
            while keep > 1 && coef[keep - 1].abs() <= threshold {
                keep -= 1;
            }
            coef.truncate(keep);
        }
    }
    coef
}

fn derivative_series(coef: &[f64]) -> Vec<f64> {
    let n = coef.len();
    let mut d = vec![0.0; n];
    if n >= 2 {
        d[n - 2] = 2.0 * (n as f64 - 1.0) * coef[n - 1];
        for k in (0..n.saturating_sub(2)).rev() {
            d[k] = if k + 2 < n { d[k + 2] } else { 0.0 } + 2.0 * (k as f64 + 1.0) * coef[k + 1];
        }
        d[0] *= 0.5;
    }
    d
}

fn clenshaw(coef: &[f64], xi: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coef.iter().skip(1).rev() {
        let tmp = 2.0 * xi * b1 - b2 + c;
        b2 = b1;
        b1 = tmp;
    }
    coef.first().copied().unwrap_or(0.0) + xi * b1 - b2
}

impl Panel {
    /// Fit from values sampled at `nodes(a, b, values.len())` (same order).
    pub fn fit(a: f64, b: f64, values: &[f64]) -> Self {
        let coef = fit_coefficients(values);
        let coef_d1 = derivative_series(&coef);
        let coef_d2 = derivative_series(&coef_d1);
        Panel {
            a,
            b,
            coef,
            coef_d1,
            coef_d2,
        }
    }

    #[inline]
    fn xi(&self, w: f64) -> f64 {
        (2.0 * w - self.a - self.b) / (self.b - self.a)
    }

    pub fn eval(&self, w: f64) -> f64 {
        clenshaw(&self.coef, self.xi(w))
    }

    /// d/dw.
    pub fn deriv(&self, w: f64) -> f64 {
        clenshaw(&self.coef_d1, self.xi(w)) * 2.0 / (self.b - self.a)
    }

    /// d²/dw².
    pub fn deriv2(&self, w: f64) -> f64 {
        let s = 2.0 / (self.b - self.a);
        clenshaw(&self.coef_d2, self.xi(w)) * s * s
    }
}

/// Sorted panels covering a closed working interval.
#[derive(Debug, Clone)]
pub struct PanelSet {
    panels: Vec<Panel>,
}

impl PanelSet {
    pub fn new(mut panels: Vec<Panel>) -> Self {
        panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap());
        PanelSet { panels }
    }

    pub fn lo(&self) -> f64 {
        self.panels.first().map(|p| p.a).unwrap_or(0.0)
    }

    pub fn hi(&self) -> f64 {
        self.panels.last().map(|p| p.b).unwrap_or(0.0)
    }

    fn locate(&self, w: f64) -> &Panel {
        let idx = self
            .panels
            .partition_point(|p| p.b < w)
            .min(self.panels.len() - 1);
        &self.panels[idx]
    }

    pub fn eval(&self, w: f64) -> f64 {
        self.locate(w).eval(w)
    }

    pub fn deriv(&self, w: f64) -> f64 {
        self.locate(w).deriv(w)
    }

    pub fn deriv2(&self, w: f64) -> f64 {
        self.locate(w).deriv2(w)
    }
}

/// Panel boundaries on [w0, w1], geometrically refined toward both ends with
/// ratio 1/4 down to `frac_min` of the interval length.
pub fn refined_boundaries(w0: f64, w1: f64, frac_min: f64) -> Vec<f64> {
    let len = w1 - w0;
    let mut fracs = vec![0.0, 0.5, 1.0];
    let mut t: f64 = 0.125;
    while t > frac_min {
        fracs.push(t);
        fracs.push(1.0 - t);
        t *= 0.25;
    }
    fracs.push(frac_min);
    fracs.push(1.0 - frac_min);
    fracs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    fracs.dedup();
    fracs.iter().map(|f| w0 + f * len).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_exp_and_derivatives() {
        let (a, b) = (-0.7, 1.3);
        let xs = nodes(a, b, 32);
        let vals: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let p = Panel::fit(a, b, &vals);
        for &x in &[-0.65f64, -0.2, 0.0, 0.4, 1.1, 1.29] {
            let e = x.exp();
            assert!((p.eval(x) - e).abs() < 1e-13 * e);
            assert!((p.deriv(x) - e).abs() < 1e-11 * e);
            assert!((p.deriv2(x) - e).abs() < 1e-9 * e);
        }
    }

    #[test]
    fn panel_set_covers_split_interval() {
        let bounds = refined_boundaries(0.0, 1.0, 1e-6);
        let mut panels = Vec::new();
        for win in bounds.windows(2) {
            let xs = nodes(win[0], win[1], 24);
            let vals: Vec<f64> = xs.iter().map(|x| (x * 3.0).sin()).collect();
            panels.push(Panel::fit(win[0], win[1], &vals));
        }
        let set = PanelSet::new(panels);
        for k in 0..200 {
            let x = k as f64 / 199.0;
            assert!((set.eval(x) - (3.0 * x).sin()).abs() < 1e-12);
            assert!((set.deriv(x) - 3.0 * (3.0 * x).cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn log_like_endpoint_behavior_is_captured() {
        // x³·log x loses analyticity at 0; refined panels keep interior
        // accuracy high anyway.
        let f = |x: f64| if x == 0.0 { 0.0 } else { x.powi(3) * x.ln() };
        let bounds = refined_boundaries(0.0, 1.0, 1e-10);
        let mut panels = Vec::new();
        for win in bounds.windows(2) {
            let xs = nodes(win[0], win[1], 40);
            let vals: Vec<f64> = xs.iter().map(|x| f(*x)).collect();
            panels.push(Panel::fit(win[0], win[1], &vals));
        }
        let set = PanelSet::new(panels);
        for k in 1..500 {
            let x = k as f64 / 500.0;
            let fd = (f(x + 1e-6) - f(x - 1e-6)) / 2e-6;
            assert!((set.eval(x) - f(x)).abs() < 1e-13);
            assert!((set.deriv(x) - fd).abs() < 1e-8 * (1.0 + fd.abs()));
        }
    }
}
