//! Discretised Birman–Schwinger and `L` operators.
//!
//! Every continuous kernel is realised as the symmetrised Nyström matrix
//! `M_ij = √(w_i U_i) G(x_i, x_j) √(w_j U_j)`, whose spectrum approximates
//! that of `√U G √U`. For the exponential kernels `e^{-k|x-y|}` the kink on
//! the diagonal limits plain Nyström to second order in the panel width, so
//! [`Discretization::PanelCorrected`] replaces each diagonal panel block by
//! the exact Galerkin block of the kernel against the panel's Lagrange basis.
//! Off-diagonal panel blocks are smooth and stay pointwise.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;
use crate::numerics::{gauss_legendre, Grid, SymMatrix};
use crate::potentials::{AtomicMeasure, KappaMeasure, Potential};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `K_E`: `e^{-√E|x-y|} / (2√E)`, `E > 0`.
    BirmanSchwinger { energy: f64 },
    /// `L_μ`: `e^{-μ|x-y|}`, `μ ≥ 0`.
    Exponential { mu: f64 },
    /// `L^κ`: `e^{-|J(x)-J(y)|}`.
    Kappa(KappaMeasure),
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::BirmanSchwinger { energy } if !(*energy > 0.0) || !energy.is_finite() => {
                Err(invalid(format!("Birman-Schwinger kernel needs E > 0, got {energy}")))
            }
            KernelSpec::Exponential { mu } if !(*mu >= 0.0) || !mu.is_finite() => {
                Err(invalid(format!("L_mu needs mu >= 0, got {mu}")))
            }
            _ => Ok(()),
        }
    }

    /// `(k, prefactor)` such that the kernel is `prefactor · e^{-k|x-y|}`.
    fn exponential_form(&self) -> Option<(f64, f64)> {
        match self {
            KernelSpec::BirmanSchwinger { energy } => {
                let k = math::sqrt(*energy);
                Some((k, 0.5 / k))
            }
            KernelSpec::Exponential { mu } => Some((*mu, 1.0)),
            KernelSpec::Kappa(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Discretization {
    /// Plain symmetrised Nyström at the quadrature nodes.
    #[default]
    Pointwise,
    /// Galerkin diagonal panel blocks for the exponential kernels.
    PanelCorrected,
}

/// Pointwise Nyström matrix of `spec` for `U` on `g`.
pub fn build_kernel(u: &Potential, g: &Grid, spec: &KernelSpec) -> Result<SymMatrix> {
    build_kernel_with(u, g, spec, Discretization::Pointwise)
}

pub fn build_kernel_with(u: &Potential, g: &Grid, spec: &KernelSpec, disc: Discretization) -> Result<SymMatrix> {
    spec.validate()?;
    if !g.domain().covers(&u.support()) {
        return Err(invalid(format!(
            "grid domain [{}, {}] does not cover the potential support [{}, {}]",
            g.domain().lo,
            g.domain().hi,
            u.support().lo,
            u.support().hi
        )));
    }
    let x = g.nodes();
    let uvals: Vec<f64> = x.iter().map(|&xi| u.eval(xi)).collect();
    let s: Vec<f64> = uvals.iter().zip(g.weights()).map(|(ui, wi)| math::sqrt(wi * ui)).collect();

    match (spec, disc) {
        (KernelSpec::Kappa(kappa), Discretization::Pointwise) => {
            let j: Vec<f64> = x.iter().map(|&xi| kappa.j_eval(xi)).collect();
            Ok(SymMatrix::from_upper(x.len(), |a, b| s[a] * s[b] * math::exp(-(j[a] - j[b]).abs())))
        }
        (KernelSpec::Kappa(_), Discretization::PanelCorrected) => {
            Err(Error::Unsupported("panel correction applies to the exponential kernels only".into()))
        }
        (_, Discretization::Pointwise) => {
            let (k, pre) = spec.exponential_form().expect("exponential kind");
            Ok(SymMatrix::from_upper(x.len(), |a, b| pre * s[a] * s[b] * math::exp(-k * (x[a] - x[b]).abs())))
        }
        (_, Discretization::PanelCorrected) => {
            let layout = g
                .layout()
                .ok_or_else(|| invalid("panel correction needs a composite Gauss-Legendre grid"))?;
            let (k, pre) = spec.exponential_form().expect("exponential kind");
            let n = layout.nodes_per_panel;
            let (reference, _) = gauss_legendre(n);
            let block = galerkin_block(&reference, k, layout.width);
            let w = g.weights();
            Ok(SymMatrix::from_upper(x.len(), |a, b| {
                if a / n == b / n {
                    let (ia, ib) = (a % n, b % n);
                    pre * math::sqrt(uvals[a] * uvals[b]) * block[ia * n + ib] / math::sqrt(w[a] * w[b])
                } else {
                    pre * s[a] * s[b] * math::exp(-k * (x[a] - x[b]).abs())
                }
            }))
        }
    }
}

/// Barycentric Lagrange basis values `ℓ_i(t)` for the nodes `t_i`.
fn lagrange_values(nodes: &[f64], bary: &[f64], t: f64, out: &mut [f64]) {
    if let Some(hit) = nodes.iter().position(|&ti| ti == t) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[hit] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for ((o, &ti), &bi) in out.iter_mut().zip(nodes).zip(bary) {
        *o = bi / (t - ti);
        denom += *o;
    }
    out.iter_mut().for_each(|v| *v /= denom);
}

/// `B_ij = ∫∫_panel ℓ_i(x) e^{-k|x-y|} ℓ_j(y) dx dy` for a panel of the
/// given width whose local nodes on `[-1, 1]` are `nodes`. Row-major `n×n`.
pub(crate) fn galerkin_block(nodes: &[f64], k: f64, width: f64) -> Vec<f64> {
    let n = nodes.len();
    let half = 0.5 * width;
    if k == 0.0 {
        let (_, w) = gauss_legendre(n);
        return (0..n * n).map(|ij| half * half * w[ij / n] * w[ij % n]).collect();
    }
    let bary: Vec<f64> = (0..n)
        .map(|i| 1.0 / (0..n).filter(|&j| j != i).map(|j| nodes[i] - nodes[j]).product::<f64>())
        .collect();
    let q = n + 10;
    let (tq, wq) = gauss_legendre(q);
    // kernel in local coordinates: e^{-k·half·|s - t|}
    let kl = k * half;
    let mut b = vec![0.0; n * n];
    let mut lx = vec![0.0; n];
    let mut ly = vec![0.0; n];
    let mut inner = vec![0.0; n];
    for (&s, &ws) in tq.iter().zip(&wq) {
        lagrange_values(nodes, &bary, s, &mut lx);
        inner.iter_mut().for_each(|v| *v = 0.0);
        // split the inner integral at t = s: [-1, s] and [s, 1]
        for (lo, hi) in [(-1.0, s), (s, 1.0)] {
            let h = 0.5 * (hi - lo);
            if h <= 0.0 {
                continue;
            }
            for (&t, &wt) in tq.iter().zip(&wq) {
                let y = lo + h * (t + 1.0);
                lagrange_values(nodes, &bary, y, &mut ly);
                let g = h * wt * math::exp(-kl * (s - y).abs());
                for (acc, &l) in inner.iter_mut().zip(&ly) {
                    *acc += g * l;
                }
            }
        }
        for i in 0..n {
            let a = ws * lx[i];
            for j in 0..n {
                b[i * n + j] += a * inner[j];
            }
        }
    }
    // symmetrise away rounding and scale to the physical panel
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (b[i * n + j] + b[j * n + i]);
            b[i * n + j] = v;
            b[j * n + i] = v;
        }
    }
    b.iter_mut().for_each(|v| *v *= half * half);
    b
}

/// Finite-rank kernel of an atomic measure: `√(c_i c_j) G(x_i, x_j)`.
pub fn build_atomic_kernel(nu: &AtomicMeasure, spec: &KernelSpec) -> Result<SymMatrix> {
    spec.validate()?;
    if nu.is_empty() {
        return Err(invalid("atomic kernel needs at least one atom"));
    }
    let (k, pre) = spec
        .exponential_form()
        .ok_or_else(|| Error::Unsupported("L^kappa kernel of an atomic potential".into()))?;
    let atoms = nu.atoms();
    Ok(SymMatrix::from_upper(atoms.len(), |i, j| {
        pre * math::sqrt(atoms[i].mass * atoms[j].mass) * math::exp(-k * (atoms[i].x - atoms[j].x).abs())
    }))
}

/// Toy matrix of order `m + 1`: entry `(i, j)` for `i < j` is
/// `√(w_i w_j) ∏_{i<k≤j} a_k` (1-based `a`), diagonal `w_i`.
pub fn build_toy_matrix(a: &[f64], weights: Option<&[f64]>) -> Result<SymMatrix> {
    if let Some(bad) = a.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
        return Err(invalid(format!("toy-model entries must lie in [0, 1], got {bad}")));
    }
    let order = a.len() + 1;
    let w: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != order {
                return Err(invalid(format!("toy model of order {order} needs {order} weights, got {}", w.len())));
            }
            if w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(invalid("toy-model weights must be positive"));
            }
            w.to_vec()
        }
        None => vec![1.0; order],
    };
    let mut m = SymMatrix::zeros(order);
    for i in 0..order {
        let mut prod = 1.0;
        m.set(i, i, w[i]);
        for j in i + 1..order {
            prod *= a[j - 1];
            m.set(i, j, math::sqrt(w[i] * w[j]) * prod);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{build_grid, eigvalsh_desc, Interval};
    use crate::potentials::{AtomicMeasure, DensityBump, Potential};

    fn sech2() -> (Potential, Grid) {
        let u = Potential::sech2(2.0, 0.0).unwrap();
        let g = build_grid(Interval::new(-20.0, 20.0), 20, 12).unwrap();
        (u, g)
    }

    #[test]
    fn bs_is_rescaled_l_mu() {
        let (u, g) = sech2();
        for e in [0.3, 1.0, 4.0] {
            let k = build_kernel(&u, &g, &KernelSpec::BirmanSchwinger { energy: e }).unwrap();
            let mut l = build_kernel(&u, &g, &KernelSpec::Exponential { mu: math::sqrt(e) }).unwrap();
            l.scale(0.5 / math::sqrt(e));
            assert!(k.max_abs_diff(&l) <= 1e-15 * l.frobenius_norm());
        }
    }

    #[test]
    fn zero_kappa_is_rank_one_with_mass() {
        let (u, g) = sech2();
        let m = build_kernel(&u, &g, &KernelSpec::Kappa(KappaMeasure::zero())).unwrap();
        let ev = eigvalsh_desc(&m).unwrap();
        let mass = g.integrate(|x| u.eval(x));
        assert!((ev[0] - mass).abs() <= 1e-10 * mass);
        assert!(ev[1].abs() <= 1e-10 * ev[0]);
    }

    #[test]
    fn trace_is_kappa_independent() {
        let (u, g) = sech2();
        let mass = g.integrate(|x| u.eval(x));
        let kappas = [
            KappaMeasure::zero(),
            KappaMeasure::lebesgue(2.5).unwrap(),
            KappaMeasure::new(
                0.1,
                vec![DensityBump { lo: -1.0, hi: 3.0, value: 2.0 }],
                AtomicMeasure::new(vec![(-0.5, 1.0), (0.7, 3.0)]).unwrap(),
            )
            .unwrap(),
        ];
        for kappa in kappas {
            let m = build_kernel(&u, &g, &KernelSpec::Kappa(kappa)).unwrap();
            assert!((m.trace() - mass).abs() <= 1e-13 * mass);
        }
    }

    #[test]
    fn rejects_bad_specs_and_grids() {
        let (u, g) = sech2();
        assert!(build_kernel(&u, &g, &KernelSpec::BirmanSchwinger { energy: 0.0 }).is_err());
        assert!(build_kernel(&u, &g, &KernelSpec::Exponential { mu: -1.0 }).is_err());
        let small = build_grid(Interval::new(-5.0, 5.0), 4, 8).unwrap();
        assert!(build_kernel(&u, &small, &KernelSpec::Exponential { mu: 1.0 }).is_err());
        let kappa = KernelSpec::Kappa(KappaMeasure::zero());
        assert!(matches!(
            build_kernel_with(&u, &g, &kappa, Discretization::PanelCorrected),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn galerkin_block_limits() {
        let (t, w) = gauss_legendre(6);
        let b0 = galerkin_block(&t, 0.0, 2.0);
        let b = galerkin_block(&t, 1e-9, 2.0);
        for i in 0..36 {
            assert!((b0[i] - w[i / 6] * w[i % 6]).abs() < 1e-15);
            assert!((b[i] - b0[i]).abs() < 1e-8);
        }
        // Σ_ij B_ij = ∫∫ e^{-k|x-y|} over [0, h]²
        let (k, h) = (1.7, 0.9);
        let bk = galerkin_block(&t, k, h);
        let exact = 2.0 * h / k - 2.0 * (1.0 - math::exp(-k * h)) / (k * k);
        let total: f64 = bk.iter().sum();
        assert!((total - exact).abs() < 1e-14);
    }

    /// Eigenvalues of `∫_{-1}^{1} e^{-k|x-y|} f(y) dy` are `2k / (k² + ω²)`
    /// with `ω tan ω = k` (even modes) or `ω cot ω = -k` (odd modes).
    fn exponential_op_top(k: f64) -> (f64, f64) {
        let newton = |mut w: f64, f: &dyn Fn(f64) -> f64| {
            for _ in 0..100 {
                let d = (f(w + 1e-7) - f(w - 1e-7)) / 2e-7;
                w -= f(w) / d;
            }
            w
        };
        let even = newton(0.8, &|w| w * math::sin(w) - k * math::cos(w));
        let odd = newton(2.3, &|w| w * math::cos(w) + k * math::sin(w));
        (2.0 * k / (k * k + even * even), 2.0 * k / (k * k + odd * odd))
    }

    #[test]
    fn panel_correction_converges_spectrally() {
        let u = Potential::square_well(1.0, 2.0, 0.0).unwrap();
        let k = 1.0;
        let (l1, l2) = exponential_op_top(k);
        let spec = KernelSpec::Exponential { mu: k };
        let g = build_grid(Interval::new(-1.0, 1.0), 4, 12).unwrap();
        let corrected = eigvalsh_desc(&build_kernel_with(&u, &g, &spec, Discretization::PanelCorrected).unwrap()).unwrap();
        assert!((corrected[0] - l1).abs() < 1e-12, "{} vs {l1}", corrected[0]);
        assert!((corrected[1] - l2).abs() < 1e-12);
        let plain = eigvalsh_desc(&build_kernel(&u, &g, &spec).unwrap()).unwrap();
        assert!((plain[0] - l1).abs() > 1e-6);
    }

    #[test]
    fn panel_corrected_is_psd() {
        let (u, g) = sech2();
        let m = build_kernel_with(&u, &g, &KernelSpec::BirmanSchwinger { energy: 1.0 }, Discretization::PanelCorrected)
            .unwrap();
        let ev = eigvalsh_desc(&m).unwrap();
        assert!(*ev.last().unwrap() >= -1e-10 * ev[0]);
    }

    #[test]
    fn atomic_kernel_examples() {
        let one = AtomicMeasure::dirac(0.0, 2.0).unwrap();
        let m = build_atomic_kernel(&one, &KernelSpec::BirmanSchwinger { energy: 0.25 }).unwrap();
        assert!((m.get(0, 0) - 2.0).abs() < 1e-15);

        let (a, c, e) = (1.5, 0.8, 0.6_f64);
        let two = AtomicMeasure::new(vec![(-a, c), (a, c)]).unwrap();
        let ev = eigvalsh_desc(&build_atomic_kernel(&two, &KernelSpec::BirmanSchwinger { energy: e }).unwrap()).unwrap();
        let d = c / (2.0 * math::sqrt(e));
        let o = math::exp(-2.0 * math::sqrt(e) * a);
        assert!((ev[0] - d * (1.0 + o)).abs() < 1e-15);
        assert!((ev[1] - d * (1.0 - o)).abs() < 1e-15);

        let three = AtomicMeasure::new(vec![(-1.0, 0.5), (0.0, 1.0), (2.0, 1.5)]).unwrap();
        let ev = eigvalsh_desc(&build_atomic_kernel(&three, &KernelSpec::Exponential { mu: 0.0 }).unwrap()).unwrap();
        assert!((ev[0] - 3.0).abs() < 1e-14 && ev[1].abs() < 1e-14);

        assert!(matches!(
            build_atomic_kernel(&three, &KernelSpec::Kappa(KappaMeasure::zero())),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn toy_matrix_examples() {
        let m = build_toy_matrix(&[0.3], None).unwrap();
        assert_eq!(m.as_slice(), &[1.0, 0.3, 0.3, 1.0]);
        let ones = build_toy_matrix(&[1.0; 4], None).unwrap();
        let ev = eigvalsh_desc(&ones).unwrap();
        assert!((ev[0] - 5.0).abs() < 1e-13);
        let m = build_toy_matrix(&[0.5, 0.2], Some(&[1.0, 4.0, 9.0])).unwrap();
        assert!((m.get(0, 2) - 3.0 * 0.1).abs() < 1e-15);
        assert!((m.get(1, 2) - 6.0 * 0.2).abs() < 1e-15);
        assert!(build_toy_matrix(&[1.1], None).is_err());
        assert!(build_toy_matrix(&[0.5], Some(&[1.0])).is_err());
    }

    #[test]
    fn toy_matches_atomic_kappa_build() {
        // nodes x_0..x_m, atoms at x_1..x_m, U ≡ 1 sampled exactly at the nodes
        let xs = [-2.0, -0.5, 0.3, 1.0, 2.5];
        let cs = [0.7, 1.2, 0.05, 2.0];
        let ws = [0.4, 1.1, 0.9, 0.3, 0.6];
        let g = Grid::from_parts(xs.to_vec(), ws.to_vec(), Interval::new(-3.0, 3.0)).unwrap();
        let u = Potential::square_well(1.0, 6.0, 0.0).unwrap();
        let atoms = AtomicMeasure::new(xs[1..].iter().copied().zip(cs).collect()).unwrap();
        let lk = build_kernel(&u, &g, &KernelSpec::Kappa(KappaMeasure::atomic(atoms))).unwrap();
        let a: Vec<f64> = cs.iter().map(|c| math::exp(-c)).collect();
        let toy = build_toy_matrix(&a, Some(&ws)).unwrap();
        assert!(lk.max_abs_diff(&toy) <= 1e-15);
    }
}
