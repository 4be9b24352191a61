use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// True when `other` lies inside `self`, up to a relative slack of `1e-12`.
    pub fn covers(&self, other: &Interval) -> bool {
        let slack = 1e-12 * (self.len().abs() + other.len().abs()).max(1.0);
        self.lo <= other.lo + slack && self.hi >= other.hi - slack
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }
}

/// Equal-width panels each carrying the same Gauss–Legendre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelLayout {
    pub panels: usize,
    pub nodes_per_panel: usize,
    pub width: f64,
    /// Nodes of one panel relative to its left edge, ascending.
    pub local_nodes: Vec<f64>,
    pub local_weights: Vec<f64>,
}

/// Quadrature nodes and positive weights on a closed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    domain: Interval,
    layout: Option<PanelLayout>,
}

impl Grid {
    /// Grid from explicit nodes and weights.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, domain: Interval) -> Result<Self> {
        if domain.is_degenerate() {
            return Err(invalid("grid domain must satisfy lo < hi"));
        }
        if nodes.len() != weights.len() || nodes.len() < 2 {
            return Err(invalid("grid needs at least two nodes and one weight per node"));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("grid nodes must be strictly increasing"));
        }
        if nodes.iter().any(|&x| !domain.contains(x)) {
            return Err(invalid("grid nodes must lie inside the domain"));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(invalid("grid weights must be positive"));
        }
        Ok(Self { nodes, weights, domain, layout: None })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn layout(&self) -> Option<&PanelLayout> {
        self.layout.as_ref()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
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
        // i-th largest root goes to the top end.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
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
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre grid with `panels` equal panels of
/// `nodes_per_panel` points each. Exact per panel for polynomials of degree
/// `2 * nodes_per_panel - 1`.
pub fn build_grid(domain: Interval, panels: usize, nodes_per_panel: usize) -> Result<Grid> {
    if domain.is_degenerate() {
        return Err(invalid("degenerate domain: need lo < hi"));
    }
    if panels < 1 {
        return Err(invalid("need at least one panel"));
    }
    if nodes_per_panel < 2 {
        return Err(invalid("need at least two nodes per panel"));
    }
    let (ref_nodes, ref_weights) = gauss_legendre(nodes_per_panel);
    let width = domain.len() / panels as f64;
    let local_nodes: Vec<f64> = ref_nodes.iter().map(|&t| 0.5 * (t + 1.0) * width).collect();
    let local_weights: Vec<f64> = ref_weights.iter().map(|&w| 0.5 * w * width).collect();

    let mut nodes = Vec::with_capacity(panels * nodes_per_panel);
    let mut weights = Vec::with_capacity(panels * nodes_per_panel);
    for p in 0..panels {
        let left = domain.lo + p as f64 * width;
        nodes.extend(local_nodes.iter().map(|&t| left + t));
        weights.extend_from_slice(&local_weights);
    }
    Ok(Grid {
        nodes,
        weights,
        domain,
        layout: Some(PanelLayout { panels, nodes_per_panel, width, local_nodes, local_weights }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule_on_unit_interval() {
        let g = build_grid(Interval::new(0.0, 1.0), 1, 2).unwrap();
        let off = 0.5 / math::sqrt(3.0);
        assert!((g.nodes()[0] - (0.5 - off)).abs() < 1e-15);
        assert!((g.nodes()[1] - (0.5 + off)).abs() < 1e-15);
        assert!((g.weights()[0] - 0.5).abs() < 1e-15);
        assert!((g.weights()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn five_point_rule_integrates_x4_exactly() {
        let g = build_grid(Interval::new(-1.0, 1.0), 1, 5).unwrap();
        let q = g.integrate(|x| x * x * x * x);
        assert!((q - 0.4).abs() < 1e-15, "{q}");
        // degree 9 is still exact, degree 10 is not
        let q9 = g.integrate(|x| x.powi(8) + x.powi(9));
        assert!((q9 - 2.0 / 9.0).abs() < 1e-14);
        let q10 = g.integrate(|x| x.powi(10));
        assert!((q10 - 2.0 / 11.0).abs() > 1e-6);
    }

    #[test]
    fn weight_sum_is_domain_length() {
        let g = build_grid(Interval::new(-20.0, 20.0), 40, 20).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 40.0).abs() < 1e-12, "{s}");
        assert_eq!(g.len(), 800);
    }

    #[test]
    fn exp_abs_integral() {
        let g = build_grid(Interval::new(-20.0, 20.0), 40, 20).unwrap();
        let q = g.integrate(|x| math::exp(-x.abs()));
        let want = 2.0 * (1.0 - math::exp(-20.0));
        assert!((q - want).abs() <= 1e-12, "{}", q - want);
    }

    #[test]
    fn many_rule_orders_are_consistent() {
        for n in 2..=64 {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            assert!(x.windows(2).all(|p| p[0] < p[1]), "n={n}");
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            assert!((q - 2.0 / 3.0).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_grid(Interval::new(1.0, 1.0), 1, 2).is_err());
        assert!(build_grid(Interval::new(2.0, 1.0), 1, 2).is_err());
        assert!(build_grid(Interval::new(0.0, 1.0), 0, 2).is_err());
        assert!(build_grid(Interval::new(0.0, 1.0), 1, 1).is_err());
        assert!(Grid::from_parts(alloc::vec![0.0, 0.0], alloc::vec![1.0, 1.0], Interval::new(0.0, 1.0)).is_err());
        assert!(Grid::from_parts(alloc::vec![0.0, 1.0], alloc::vec![1.0, -1.0], Interval::new(0.0, 1.0)).is_err());
    }
}
