//! Partial-sum monotonicity of `L^κ` in `κ`, checked on seeded random pairs
//! `κ ≤ κ' = κ + Δ`, together with the toy-matrix model and Perron facts.
//!
//! Individual eigenvalues are *not* monotone (the trace is κ-independent),
//! only the partial sums `S_n = Σ_{i≤n} λ_i` are.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::kernels::{build_kernel, build_toy_matrix, KernelSpec};
use crate::math;
use crate::numerics::{build_grid, eigh_desc, eigvalsh_desc, partial_sum, Grid, SymMatrix};
use crate::potentials::{AtomicMeasure, KappaMeasure, Potential};

/// `κ` and `κ' = κ + Δ` with `Δ ≥ 0`, so `κ'([s,t]) ≥ κ([s,t])` by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaPair {
    pub base: KappaMeasure,
    pub delta: KappaMeasure,
    pub dominating: KappaMeasure,
}

impl KappaPair {
    pub fn new(base: KappaMeasure, delta: KappaMeasure) -> Self {
        let dominating = base.plus(&delta);
        Self { base, delta, dominating }
    }

    /// `Δ` charges some `(x_i, x_j]` between nodes where `U > 0`, which makes
    /// at least one off-diagonal entry strictly smaller and `λ_1` strictly
    /// decrease.
    pub fn delta_charges(&self, u: &Potential, g: &Grid) -> bool {
        let inside: Vec<f64> = g.nodes().iter().copied().filter(|&x| u.eval(x) > 0.0).collect();
        match (inside.first(), inside.last()) {
            (Some(&a), Some(&b)) if a < b => self.delta.mass_in(a, b) > 0.0,
            _ => false,
        }
    }
}

/// Shared atom locations uniform in `[-5, 5]`, `c_j ~ U[0, 2]`,
/// `Δc_j ~ U[0, 1]`; when `density_cap > 0` also uniform densities
/// `μ ~ U[0, cap]` and `Δμ ~ U[0, cap]`.
pub fn random_kappa_pair(seed: u64, m: usize, density_cap: f64) -> Result<KappaPair> {
    if !(density_cap >= 0.0) || !density_cap.is_finite() {
        return Err(invalid(format!("density cap must be non-negative, got {density_cap}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = Vec::with_capacity(m);
    while xs.len() < m {
        let x = rng.gen_range(-5.0..5.0);
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs.sort_by(f64::total_cmp);
    let c: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..2.0)).collect();
    let dc: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
    let (mu, dmu) = if density_cap > 0.0 {
        (rng.gen_range(0.0..=density_cap), rng.gen_range(0.0..=density_cap))
    } else {
        (0.0, 0.0)
    };
    let base = KappaMeasure::new(mu, Vec::new(), AtomicMeasure::new(xs.iter().copied().zip(c).collect())?)?;
    let delta = KappaMeasure::new(dmu, Vec::new(), AtomicMeasure::new(xs.into_iter().zip(dc).collect())?)?;
    Ok(KappaPair::new(base, delta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairComparison {
    /// `(n, S_n(κ) - S_n(κ'))` for `n = 1..=n_max`.
    pub diffs: Vec<(usize, f64)>,
    pub s1: f64,
    /// `λ_1(κ) - λ_1(κ')`.
    pub lambda1_drop: f64,
    /// `|S_order(κ) - S_order(κ')|`.
    pub trace_diff: f64,
    /// First `i ≥ 2` (1-based) with `λ_i(κ') > λ_i(κ)` beyond rounding.
    pub individual_increase: Option<usize>,
}

impl PairComparison {
    pub fn min_diff(&self) -> f64 {
        self.diffs.iter().map(|d| d.1).fold(f64::INFINITY, f64::min)
    }
}

fn spectra(u: &Potential, g: &Grid, p: &KappaPair) -> Result<(Vec<f64>, Vec<f64>)> {
    let a = eigvalsh_desc(&build_kernel(u, g, &KernelSpec::Kappa(p.base.clone()))?)?;
    let b = eigvalsh_desc(&build_kernel(u, g, &KernelSpec::Kappa(p.dominating.clone()))?)?;
    Ok((a, b))
}

/// `S_n(κ) - S_n(κ')` for `n = 1..=n_max`.
pub fn compare_partial_sums(u: &Potential, g: &Grid, p: &KappaPair, n_max: usize) -> Result<Vec<(usize, f64)>> {
    Ok(compare_pair(u, g, p, n_max)?.diffs)
}

pub fn compare_pair(u: &Potential, g: &Grid, p: &KappaPair, n_max: usize) -> Result<PairComparison> {
    if n_max == 0 || n_max > g.len() {
        return Err(invalid(format!("n_max must lie in 1..={}, got {n_max}", g.len())));
    }
    let (a, b) = spectra(u, g, p)?;
    let order = a.len();
    let mut diffs = Vec::with_capacity(n_max);
    let (mut sa, mut sb) = (0.0, 0.0);
    for n in 1..=n_max {
        sa += a[n - 1];
        sb += b[n - 1];
        diffs.push((n, sa - sb));
    }
    let trace_diff = (partial_sum(&a, order)? - partial_sum(&b, order)?).abs();
    let noise = 1e-12 * a[0].abs();
    let individual_increase = (1..order).find(|&i| b[i] > a[i] + noise).map(|i| i + 1);
    Ok(PairComparison { diffs, s1: a[0], lambda1_drop: a[0] - b[0], trace_diff, individual_increase })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyScan {
    /// `curves[n - 1][g]` = `S_n` at `a_k = a_grid[g]`.
    pub curves: Vec<Vec<f64>>,
    /// Per `n`: non-decreasing in `a_k` within `1e-10`.
    pub monotone: Vec<bool>,
    /// Per `n`: midpoint convex within `1e-10` over all grid pairs.
    pub convex: Vec<bool>,
}

impl ToyScan {
    pub fn all_pass(&self) -> bool {
        self.monotone.iter().chain(&self.convex).all(|&f| f)
    }
}

fn toy_partial_sums(a: &[f64], weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let ev = eigvalsh_desc(&build_toy_matrix(a, weights)?)?;
    let mut acc = 0.0;
    Ok(ev.iter().map(|v| { acc += v; acc }).collect())
}

/// Scan `a_k` (1-based `k`) over `a_grid` with the other `m - 1` entries held
/// at `a_fixed`, recording every partial sum of the toy matrix.
pub fn toy_scan(m: usize, k: usize, a_fixed: &[f64], a_grid: &[f64], weights: Option<&[f64]>) -> Result<ToyScan> {
    if m == 0 || k == 0 || k > m {
        return Err(invalid(format!("toy scan needs 1 <= k <= m, got k = {k}, m = {m}")));
    }
    if a_fixed.len() != m - 1 {
        return Err(invalid(format!("toy scan needs {} fixed entries, got {}", m - 1, a_fixed.len())));
    }
    if a_grid.is_empty() || a_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("scan grid must be non-empty and strictly ascending"));
    }
    if let Some(bad) = a_fixed.iter().chain(a_grid).find(|v| !(**v >= 0.0 && **v <= 1.0)) {
        return Err(invalid(format!("toy-model entries must lie in [0, 1], got {bad}")));
    }
    let at = |ak: f64| -> Result<Vec<f64>> {
        let mut a = Vec::with_capacity(m);
        a.extend_from_slice(&a_fixed[..k - 1]);
        a.push(ak);
        a.extend_from_slice(&a_fixed[k - 1..]);
        toy_partial_sums(&a, weights)
    };
    let order = m + 1;
    let samples: Vec<Vec<f64>> = a_grid.iter().map(|&v| at(v)).collect::<Result<_>>()?;
    let curves: Vec<Vec<f64>> = (0..order).map(|n| samples.iter().map(|s| s[n]).collect()).collect();
    let monotone = curves.iter().map(|c| c.windows(2).all(|w| w[1] >= w[0] - 1e-10)).collect();
    let mut convex = vec![true; order];
    for i in 0..a_grid.len() {
        for j in i + 1..a_grid.len() {
            let mid = at(0.5 * (a_grid[i] + a_grid[j]))?;
            for n in 0..order {
                if mid[n] > 0.5 * (curves[n][i] + curves[n][j]) + 1e-10 {
                    convex[n] = false;
                }
            }
        }
    }
    Ok(ToyScan { curves, monotone, convex })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerronReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
    /// Smallest entry of the unit top eigenvector, sign-normalised so its
    /// largest-magnitude entry is positive.
    pub eigvec_min: f64,
}

/// Perron data of an entrywise positive symmetric matrix. The top
/// eigenvector is polished by three power steps from its absolute value,
/// which keeps small tail entries accurate without cancellation.
pub fn perron_gap(mat: &SymMatrix) -> Result<PerronReport> {
    if mat.order() == 0 {
        return Err(Error::Precondition("empty matrix".into()));
    }
    if let Some(pos) = mat.as_slice().iter().position(|&v| !(v > 0.0)) {
        let n = mat.order();
        return Err(Error::Precondition(format!(
            "matrix entry ({}, {}) is not positive",
            pos / n,
            pos % n
        )));
    }
    let e = eigh_desc(mat)?;
    let mut v = e.vector(0).to_vec();
    let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    // a positive matrix maps positive vectors to positive vectors
    let mut w: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    for _ in 0..3 {
        w = mat.mul_vec(&w);
        let norm = math::sqrt(w.iter().map(|x| x * x).sum());
        w.iter_mut().for_each(|x| *x /= norm);
    }
    let eigvec_min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda2 = e.values.get(1).copied().unwrap_or(0.0);
    Ok(PerronReport { lambda1: e.values[0], lambda2, gap: e.values[0] - lambda2, eigvec_min })
}

/// One seeded randomised comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub n_max: usize,
    /// `min_n (S_n(κ) - S_n(κ'))`.
    pub min_slack: f64,
    pub s1: f64,
    pub lambda1_drop: f64,
    pub trace_diff: f64,
    /// `Δ` charges the support of `U`, so `λ_1` must strictly decrease.
    pub strict_expected: bool,
    pub individual_increase: Option<usize>,
    pub pass: bool,
}

/// Potential and grid for a trial, varying with the seed. All three are
/// positive throughout `[-5, 5]` where the atoms live.
fn trial_setup(seed: u64) -> Result<(Potential, Grid)> {
    let panels = 8 + (seed / 3 % 3) as usize * 2;
    let npp = 8 + (seed / 9 % 3) as usize * 2;
    let u = match seed % 3 {
        0 => Potential::square_well(1.0, 12.0, 0.0)?,
        1 => Potential::gaussian(2.0, 4.0, 0.0)?,
        _ => Potential::sech2(1.0, 0.0)?,
    };
    let g = build_grid(u.support(), panels, npp)?;
    Ok((u, g))
}

pub fn run_trial(seed: u64) -> Result<TrialResult> {
    let (u, g) = trial_setup(seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let m = 1 + (seed % 6) as usize;
    let cap = if rng.gen_bool(0.5) { 1.0 } else { 0.0 };
    let pair = random_kappa_pair(seed, m, cap)?;
    let n_max = g.len().min(20);
    let c = compare_pair(&u, &g, &pair, n_max)?;
    let min_slack = c.min_diff();
    let strict_expected = pair.delta_charges(&u, &g);
    let pass = min_slack >= -1e-9 * c.s1 && c.trace_diff <= 1e-10 && (!strict_expected || c.lambda1_drop > 0.0);
    Ok(TrialResult {
        seed,
        n_max,
        min_slack,
        s1: c.s1,
        lambda1_drop: c.lambda1_drop,
        trace_diff: c.trace_diff,
        strict_expected,
        individual_increase: c.individual_increase,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub trials: usize,
    pub failures: usize,
    pub worst_relative_slack: f64,
    pub max_trace_diff: f64,
    pub strict_checked: usize,
    /// Seed of the first trial where an individual `λ_i`, `i ≥ 2`, increased.
    pub increase_seed: Option<u64>,
}

impl SuiteSummary {
    pub fn from_results(results: &[TrialResult]) -> Self {
        SuiteSummary {
            trials: results.len(),
            failures: results.iter().filter(|r| !r.pass).count(),
            worst_relative_slack: results.iter().map(|r| r.min_slack / r.s1).fold(f64::INFINITY, f64::min),
            max_trace_diff: results.iter().map(|r| r.trace_diff).fold(0.0, f64::max),
            strict_checked: results.iter().filter(|r| r.strict_expected).count(),
            increase_seed: results.iter().find(|r| r.individual_increase.is_some()).map(|r| r.seed),
        }
    }

    pub fn pass(&self) -> bool {
        self.failures == 0 && self.increase_seed.is_some()
    }
}

/// Trials with seeds `seed, seed + 1, …`.
pub fn run_suite(trials: usize, seed: u64) -> Result<(Vec<TrialResult>, SuiteSummary)> {
    let results: Vec<TrialResult> = (0..trials as u64).map(|i| run_trial(seed.wrapping_add(i))).collect::<Result<_>>()?;
    let summary = SuiteSummary::from_results(&results);
    Ok((results, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_pairs_are_reproducible_and_dominating() {
        let p = random_kappa_pair(1, 3, 0.0).unwrap();
        assert_eq!(p, random_kappa_pair(1, 3, 0.0).unwrap());
        assert_ne!(p, random_kappa_pair(2, 3, 0.0).unwrap());
        let (a, b) = (p.base.atoms().atoms(), p.dominating.atoms().atoms());
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x.x, y.x);
            assert!(y.mass >= x.mass);
        }
        let d = random_kappa_pair(2, 0, 1.0).unwrap();
        assert!(d.base.atoms().is_empty());
        assert!(d.dominating.uniform_density() >= d.base.uniform_density());
    }

    #[test]
    fn identical_pair_gives_zero_differences() {
        let (u, g) = trial_setup(0).unwrap();
        let p = KappaPair::new(KappaMeasure::lebesgue(0.7).unwrap(), KappaMeasure::zero());
        assert!(compare_partial_sums(&u, &g, &p, 10).unwrap().iter().all(|d| d.1 == 0.0));
    }

    #[test]
    fn zero_kappa_rank_one_drops() {
        let (u, g) = trial_setup(1).unwrap();
        let p = KappaPair::new(KappaMeasure::zero(), KappaMeasure::lebesgue(0.3).unwrap());
        let c = compare_pair(&u, &g, &p, 5).unwrap();
        let mass = g.integrate(|x| u.eval(x));
        assert!((c.s1 - mass).abs() < 1e-10 * mass);
        assert!(c.lambda1_drop > 0.0);
        assert_eq!(c.individual_increase, Some(2));
        assert!(p.delta_charges(&u, &g));
    }

    #[test]
    fn toy_scan_examples() {
        let grid: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        let s = toy_scan(1, 1, &[], &grid, None).unwrap();
        for (i, &a) in grid.iter().enumerate() {
            assert!((s.curves[0][i] - (1.0 + a)).abs() < 1e-14);
            assert!((s.curves[1][i] - 2.0).abs() < 1e-14);
        }
        assert!(s.all_pass());
        let s = toy_scan(3, 2, &[0.4, 0.9], &grid, Some(&[1.0, 2.0, 0.5, 1.5])).unwrap();
        assert!(s.all_pass());
        assert!(s.curves[3].iter().all(|&t| (t - 5.0).abs() < 1e-13));
        assert!(toy_scan(2, 1, &[1.5], &grid, None).is_err());
        assert!(toy_scan(2, 3, &[0.5], &grid, None).is_err());
    }

    #[test]
    fn perron_examples() {
        let ones = SymMatrix::from_upper(4, |_, _| 1.0);
        let r = perron_gap(&ones).unwrap();
        assert!((r.gap - 4.0).abs() < 1e-13);
        assert!((r.eigvec_min - 0.5).abs() < 1e-14);
        let toy = build_toy_matrix(&[0.5, 0.5, 0.5], None).unwrap();
        let r = perron_gap(&toy).unwrap();
        assert!(r.gap > 0.0 && r.eigvec_min > 0.0);
        assert!(matches!(perron_gap(&SymMatrix::identity(2)), Err(Error::Precondition(_))));
    }

    #[test]
    fn small_suite_passes() {
        let (results, summary) = run_suite(24, 7).unwrap();
        assert_eq!(results.len(), 24);
        assert!(summary.pass(), "{summary:?}");
    }
}
