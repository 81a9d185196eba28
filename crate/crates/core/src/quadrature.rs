//! Gauss-Legendre rules and polynomial interpolation on their nodes.

use std::f64::consts::PI;

/// An n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Barycentric interpolation weights for the nodes.
    bary: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        let bary = (0..n)
            .map(|j| {
                let prod: f64 = (0..n)
                    .filter(|&k| k != j)
                    .map(|k| nodes[j] - nodes[k])
                    .product();
                1.0 / prod
            })
            .collect();
        Self {
            nodes,
            weights,
            bary,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node positions mapped onto [a, b].
    pub fn mapped_nodes(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes.iter().map(move |&x| mid + half * x)
    }

    /// Integrates `g` over [a, b].
    pub fn integrate(&self, a: f64, b: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(mid + half * x))
            .sum();
        half * sum
    }

    /// Evaluates the interpolating polynomial through `(node_k, values_k)` at
    /// the reference coordinate `x` in [-1, 1] (second barycentric form).
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xk, &wk), &fk) in self.nodes.iter().zip(&self.bary).zip(values) {
            let d = x - xk;
            if d == 0.0 {
                return fk;
            }
            let c = wk / d;
            num += c * fk;
            den += c;
        }
        num / den
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss-Legendre integration of `g` over [a, b] with panels no
/// wider than `max_panel`.
pub fn composite(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    max_panel: f64,
    mut g: impl FnMut(f64) -> f64,
) -> f64 {
    if b == a {
        return 0.0;
    }
    let panels = ((b - a).abs() / max_panel).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * width;
            let hi = if i + 1 == panels { b } else { lo + width };
            rule.integrate(lo, hi, &mut g)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_point_nodes_match_tabulated_values() {
        let rule = GaussLegendre::new(8);
        let expected = [
            0.1834346424956498,
            0.525532409916329,
            0.7966664774136267,
            0.9602898564975363,
        ];
        let weights = [
            0.362683783378362,
            0.3137066458778873,
            0.2223810344533745,
            0.1012285362903763,
        ];
        for (i, (&x, &w)) in expected.iter().zip(&weights).enumerate() {
            assert!((rule.nodes()[4 + i] - x).abs() < 1e-15);
            assert!((rule.weights()[4 + i] - w).abs() < 1e-15);
            assert!((rule.nodes()[3 - i] + x).abs() < 1e-15);
        }
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let rule = GaussLegendre::new(8);
        for deg in 0..16 {
            let got = rule.integrate(0.0, 2.0, |x| x.powi(deg));
            let want = 2f64.powi(deg + 1) / (deg as f64 + 1.0);
            assert!((got - want).abs() < 1e-12 * want.max(1.0), "deg {deg}");
        }
    }

    #[test]
    fn odd_rule_has_zero_node() {
        let rule = GaussLegendre::new(5);
        assert_eq!(rule.nodes()[2], 0.0);
        let got = rule.integrate(-1.0, 1.0, |x| x.powi(8));
        assert!((got - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let rule = GaussLegendre::new(8);
        let p = |x: f64| 3.0 * x.powi(7) - x.powi(4) + 0.5 * x - 2.0;
        let values: Vec<f64> = rule.nodes().iter().map(|&x| p(x)).collect();
        for i in 0..=20 {
            let x = -1.0 + 0.1 * i as f64;
            assert!((rule.interpolate(&values, x) - p(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn composite_integrates_sine() {
        let rule = GaussLegendre::new(8);
        let got = composite(&rule, 0.0, 10.0, 0.5, f64::sin);
        assert!((got - (1.0 - 10f64.cos())).abs() < 1e-13);
    }
}
