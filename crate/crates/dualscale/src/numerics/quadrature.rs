//! Gauss-Legendre quadrature on arbitrary finite intervals.
//!
//! Nodes and weights come from Newton iteration on the Legendre-polynomial
//! recurrence — no tables, any order. An order-`n` rule integrates
//! polynomials up to degree `2n - 1` exactly, which makes order 64 far more
//! than enough for the narrow angular integrals it serves here.

use crate::{Error, Result};

/// A quadrature rule on `[a, b]`: paired nodes and positive weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Abscissae, ascending, all inside `[a, b]`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights; they sum to the interval length.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule to `f`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Builds the order-`order` Gauss-Legendre rule on `[a, b]`.
///
/// Exact (within round-off) for polynomials of degree `<= 2*order - 1`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::Argument("quadrature order must be >= 1".into()));
    }
    if !(a < b) {
        return Err(Error::Argument(format!(
            "quadrature interval is empty: a = {a}, b = {b}"
        )));
    }
    let n = order;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Find the roots of P_n on [-1, 1] by Newton iteration from the
    // Chebyshev-like initial guesses; roots come out descending in x0, so
    // fill from the back to keep nodes ascending.
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-15 {
                let (p2, d2) = legendre_with_derivative(n, x);
                x -= p2 / d2;
                dp = legendre_with_derivative(n, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = mid + half * x;
        weights[n - 1 - i] = half * w;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term
/// recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0; // P_0
    let mut p = x; // P_1
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let d = (n as f64) * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}
