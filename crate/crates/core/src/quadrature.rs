//! Gauss-Legendre rules and composite 1D integration.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on `P_n` from Chebyshev initial guesses.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::domain("Gauss-Legendre order must be positive"));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights of the composite rule with `panels` equal panels on `[a, b]`,
    /// in increasing node order.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let mut xs = Vec::with_capacity(panels * self.order());
        let mut ws = Vec::with_capacity(panels * self.order());
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            for (&t, &w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + half * t);
                ws.push(half * w);
            }
        }
        (xs, ws)
    }

    /// Composite integral of `f` over `[a, b]` with `panels` panels.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, panels: usize) -> f64 {
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            let mut panel = 0.0;
            for (&t, &w) in self.nodes.iter().zip(&self.weights) {
                panel += w * f(mid + half * t);
            }
            total += half * panel;
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Per-panel order used by [`integrate_1d`].
pub const INTEGRATE_1D_ORDER: usize = 5;

/// Composite 5-point Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n_panels: usize) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::domain(format!(
            "integration interval must satisfy a < b, got [{a}, {b}]"
        )));
    }
    if n_panels < 2 {
        return Err(Error::domain(format!(
            "n_panels must be at least 2, got {n_panels}"
        )));
    }
    let rule = GaussLegendre::new(INTEGRATE_1D_ORDER)?;
    let value = rule.integrate(f, a, b, n_panels);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::numeric(
            "integrate_1d",
            "integrand produced a non-finite value",
        ))
    }
}
