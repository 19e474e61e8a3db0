//! Gauss–Legendre quadrature on [-1, 1], used for the angular and radial
//! integrals throughout the crate.
//!
//! Nodes are found by Newton iteration on the Legendre recurrence and
//! mirrored about the origin so that odd integrands cancel pairwise.

use std::env;

/// Default number of quadrature nodes for smooth radial integrals.
///
/// Overridable per call and, for the CLI, through `MIXMEAS_QUAD_ORDER`.
pub const DEFAULT_ORDER: usize = 64;

/// Reads the quadrature order from `MIXMEAS_QUAD_ORDER`, falling back to
/// [`DEFAULT_ORDER`] when unset or unparsable.
pub fn order_from_env() -> usize {
    env::var("MIXMEAS_QUAD_ORDER")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 2)
        .unwrap_or(DEFAULT_ORDER)
}

/// A Gauss–Legendre rule of fixed order on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule with `order` nodes. Exact for polynomials of degree
    /// `2 * order - 1`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = order.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess for the i-th root of P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            // Newton to a floating-point fixed point
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                let next = x - p / d;
                if next == x {
                    break;
                }
                x = next;
            }
            let (_, dp) = legendre_with_derivative(order, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x.abs();
            nodes[order - 1 - i] = x.abs();
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
            let (_, d) = legendre_with_derivative(order, 0.0);
            weights[order / 2] = 2.0 / (d * d);
        }
        Self { nodes, weights }
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

    /// Integrates `f` over [-1, 1].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integrates `f` over [a, b] by affine substitution.
    pub fn integrate_on<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self.integrate(|t| f(mid + half * t))
    }
}

/// Evaluates (P_n(x), P_n'(x)) via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_on_polynomials() {
        let rule = GaussLegendre::new(8);
        // degree 15 is the highest exactly integrable at order 8
        let exact = 2.0 / 15.0; // integral of x^14 over [-1,1]
        assert_abs_diff_eq!(rule.integrate(|x| x.powi(14)), exact, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.integrate(|x| x.powi(13)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn weights_sum_to_two() {
        for order in [1, 2, 5, 17, 64, 128] {
            let rule = GaussLegendre::new(order);
            let total: f64 = rule.weights().iter().sum();
            assert_abs_diff_eq!(total, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn nodes_are_mirrored() {
        let rule = GaussLegendre::new(24);
        for i in 0..12 {
            assert_eq!(rule.nodes()[i], -rule.nodes()[23 - i]);
            assert_eq!(rule.weights()[i], rule.weights()[23 - i]);
        }
    }

    #[test]
    fn interval_integration() {
        let rule = GaussLegendre::new(16);
        let val = rule.integrate_on(0.0, 1.0, |x| x * x);
        assert_abs_diff_eq!(val, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn smooth_nonpolynomial_converges() {
        let coarse = GaussLegendre::new(32).integrate_on(0.0, 1.0, f64::exp);
        let fine = GaussLegendre::new(64).integrate_on(0.0, 1.0, f64::exp);
        assert_abs_diff_eq!(coarse, std::f64::consts::E - 1.0, epsilon = 1e-13);
        assert!((coarse - fine).abs() < 1e-14);
    }
}
