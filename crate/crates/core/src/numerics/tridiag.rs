//! Symmetric tridiagonal matrices: Sturm-sequence counting, bisection for
//! individual eigenvalues and inverse iteration for eigenvectors.

use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin bounds on the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.order();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let tiny = crate::math::sqrt(f64::MIN_POSITIVE);
        let mut count = 0;
        let mut q = self.diag[0] - sigma;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.order() {
            if q == 0.0 {
                q = tiny;
            }
            q = self.diag[i] - sigma - self.off[i - 1] * self.off[i - 1] / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), bisected inside `[lo, hi]`
    /// until the bracket stops shrinking.
    pub fn eigenvalue(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector for an (accurately known) eigenvalue, by inverse
    /// iteration on a pivoted LU of `T - lambda I`.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.order();
        let (lo, hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let lu = TridiagLu::factor(self, lambda, f64::EPSILON * scale);
        let mut x = alloc::vec![1.0 / math::sqrt(n as f64); n];
        for _ in 0..4 {
            lu.solve(&mut x);
            let norm = math::sqrt(x.iter().map(|v| v * v).sum());
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }
}

struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &SymTridiagonal, shift: f64, tiny: f64) -> Self {
        let n = t.order();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - shift).collect();
        let mut du2 = alloc::vec![0.0; n.saturating_sub(2)];
        let mut swapped = alloc::vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Discrete Dirichlet Laplacian `tridiag(-1, 2, -1)` has eigenvalues
    /// `2 - 2 cos(k π / (n + 1))`.
    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(alloc::vec![2.0; n], alloc::vec![-1.0; n - 1])
    }

    #[test]
    fn sturm_bisection_matches_closed_form() {
        let n = 50;
        let t = laplacian(n);
        let (lo, hi) = t.gershgorin();
        for k in [0, 1, 10, 49] {
            let want = 2.0 - 2.0 * math::cos((k + 1) as f64 * core::f64::consts::PI / (n + 1) as f64);
            let got = t.eigenvalue(k, lo, hi);
            assert!((got - want).abs() < 1e-13, "k={k}");
        }
        assert_eq!(t.count_below(0.0), 0);
        assert_eq!(t.count_below(4.0), n);
    }

    #[test]
    fn inverse_iteration_recovers_sine_mode() {
        let n = 40;
        let t = laplacian(n);
        let (lo, hi) = t.gershgorin();
        let lam = t.eigenvalue(0, lo, hi);
        let v = t.eigenvector(lam);
        let sign = v[n / 2].signum();
        let norm = math::sqrt((1..=n).map(|i| math::sin(i as f64 * core::f64::consts::PI / (n + 1) as f64).powi(2)).sum());
        for (i, vi) in v.iter().enumerate() {
            let want = math::sin((i + 1) as f64 * core::f64::consts::PI / (n + 1) as f64) / norm;
            assert!((sign * vi - want).abs() < 1e-10);
        }
    }
}
