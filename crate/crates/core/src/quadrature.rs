//! Composite Gauss-Legendre quadrature.
//!
//! Used as an independent check on closed-form densities, overlaps, and bin
//! masses. Nodes come from Newton iteration on the Legendre recurrence.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule on `[-1, 1]`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    fn panels(&self, a: f64, b: f64, panels: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = (b - a) / panels as f64;
        (0..panels).flat_map(move |k| {
            let mid = a + (k as f64 + 0.5) * h;
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(move |(x, w)| (mid + 0.5 * h * x, 0.5 * h * w))
        })
    }

    /// `∫_a^b f` over `panels` equal sub-intervals.
    pub fn integrate(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.panels(a, b, panels).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_complex(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: impl FnMut(f64) -> Complex64,
    ) -> Complex64 {
        self.panels(a, b, panels).map(|(x, w)| f(x) * w).sum()
    }

    /// Tensor-product rule over the rectangle `x_range × y_range`.
    pub fn integrate_2d(
        &self,
        x_range: (f64, f64),
        y_range: (f64, f64),
        panels: usize,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> f64 {
        let ys: Vec<(f64, f64)> = self.panels(y_range.0, y_range.1, panels).collect();
        self.panels(x_range.0, x_range.1, panels)
            .map(|(x, wx)| wx * ys.iter().map(|&(y, wy)| wy * f(x, y)).sum::<f64>())
            .sum()
    }
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let gl = GaussLegendre::new(5);
        // Degree 9 is the highest a 5-point rule integrates exactly.
        let v = gl.integrate(-1.0, 2.0, 1, |x| x.powi(9) - 3.0 * x.powi(4) + 1.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (32.0 + 1.0) / 5.0 + 3.0;
        assert!((v - exact).abs() < 1e-11, "{v} vs {exact}");
    }

    #[test]
    fn gaussian_integral() {
        let gl = GaussLegendre::new(10);
        let v = gl.integrate(-12.0, 12.0, 40, |x| (-x * x).exp());
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        let v2 = gl.integrate_2d((-10.0, 10.0), (-10.0, 10.0), 20, |x, y| {
            (-x * x - y * y).exp()
        });
        assert!((v2 - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn odd_rule_has_zero_node() {
        let gl = GaussLegendre::new(7);
        assert!(gl.nodes[3].abs() < 1e-15);
        assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
