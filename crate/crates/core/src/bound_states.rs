//! Negative spectrum of `-∂² - U`, three independent ways plus closed forms.
//!
//! * [`solve_nystrom`]: Birman–Schwinger root finding. `-E` is an eigenvalue
//!   iff `λ_n(K_E) = 1`; with `k = √E` and `K_E = L_k / (2k)` this is the root
//!   of `ψ_n(k) = λ_n(L_k) - 2k`, whose sign is monotone in `k` because every
//!   `λ_n(K_E)` decreases in `E`.
//! * [`solve_atomic`]: the same equation for the finite matrix of `ν = Σ c_j δ_{x_j}`.
//! * [`solve_fd_oracle`]: three-point finite differences with Dirichlet ends
//!   and one Richardson step.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::kernels::{build_atomic_kernel, build_kernel_with, Discretization, KernelSpec};
use crate::math;
use crate::numerics::tridiag::SymTridiagonal;
use crate::numerics::{eigvalsh_desc, gauss_legendre, Grid, Interval};
use crate::potentials::{AtomicMeasure, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Nystrom,
    Atomic,
    FiniteDifference,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Nystrom => "nystrom",
            Method::Atomic => "atomic",
            Method::FiniteDifference => "fd",
            Method::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdDiagnostics {
    /// Coarse step; the fine grid uses `h / 2`.
    pub h: f64,
    pub domain: Interval,
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    /// Eigenfunction mass in the outer 10% at each end, per level.
    pub boundary_mass: Vec<f64>,
}

/// Magnitudes `E_1 > E_2 ≥ …` of the negative eigenvalues with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub method: Method,
    /// `|λ_n(K_{E_n}) - 1|` per level (root-finding methods only).
    pub residuals: Vec<f64>,
    /// Some `λ_i(K_{E_floor})` lies within `10·tol` of 1: the level count is
    /// uncertain at this precision.
    pub near_threshold: bool,
    /// Root tolerance on `|λ_n(K_{E_n}) - 1|` (0 for closed forms).
    pub tol: f64,
    pub discretization: Option<Discretization>,
    pub fd: Option<FdDiagnostics>,
}

impl Spectrum {
    fn plain(energies: Vec<f64>, method: Method) -> Self {
        Self {
            energies,
            method,
            residuals: Vec::new(),
            near_threshold: false,
            tol: 0.0,
            discretization: None,
            fd: None,
        }
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `Σ √E_i`.
    pub fn sqrt_sum(&self) -> f64 {
        self.energies.iter().map(|&e| math::sqrt(e)).sum()
    }

    /// `E_n` (1-based) with the convention `E_{j+1} = 0` past the last level.
    pub fn level(&self, n: usize) -> f64 {
        assert!(n >= 1, "levels are 1-based");
        self.energies.get(n - 1).copied().unwrap_or(0.0)
    }

    /// Strictly decreasing with consecutive gaps above `gap`.
    pub fn is_simple(&self, gap: f64) -> bool {
        self.energies.iter().all(|&e| e > 0.0) && self.energies.windows(2).all(|w| w[0] - w[1] > gap)
    }
}

/// Level count at the floor energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelCount {
    pub count: usize,
    pub near_threshold: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NystromOptions {
    pub tol: f64,
    /// Defaults to `1e-9 (∫U)²`.
    pub e_floor: Option<f64>,
    pub discretization: Discretization,
    pub max_iter: usize,
}

impl NystromOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, e_floor: None, discretization: Discretization::PanelCorrected, max_iter: 60 }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("tolerance must be positive, got {tol}")))
    }
}

/// Level count from the eigenvalues of `L_k`, i.e. of `K_{k²}` times `2k`.
fn count_in(values: &[f64], k: f64, tol: f64) -> LevelCount {
    let scale = 0.5 / k;
    let count = values.iter().filter(|&&l| l * scale > 1.0).count();
    let near_threshold = values.iter().any(|&l| (l * scale - 1.0).abs() < 10.0 * tol);
    LevelCount { count, near_threshold }
}

/// `#{i : λ_i(K_{E_floor}) > 1}` on the grid, with the near-threshold flag
/// for any `λ_i ∈ 1 ± 10·tol`.
pub fn count_bound_states(u: &Potential, g: &Grid, e_floor: f64, tol: f64) -> Result<LevelCount> {
    if !(e_floor > 0.0) {
        return Err(invalid(format!("floor energy must be positive, got {e_floor}")));
    }
    check_tol(tol)?;
    if u.is_zero() {
        return Ok(LevelCount { count: 0, near_threshold: false });
    }
    let m = build_kernel_with(u, g, &KernelSpec::BirmanSchwinger { energy: e_floor }, Discretization::PanelCorrected)?;
    let values = eigvalsh_desc(&m)?;
    // these are eigenvalues of K_E itself, i.e. of L_k / (2k) with 2k = 1
    Ok(count_in(&values, 0.5, tol))
}

/// Eigenvalues of `L_k` at sampled `k`, shared across all levels.
struct Cache<F> {
    eval: F,
    points: Vec<(f64, Vec<f64>)>,
}

impl<F: FnMut(f64) -> Result<Vec<f64>>> Cache<F> {
    fn values(&mut self, k: f64) -> Result<&[f64]> {
        let pos = match self.points.binary_search_by(|(p, _)| p.total_cmp(&k)) {
            Ok(i) => i,
            Err(i) => {
                let v = (self.eval)(k)?;
                self.points.insert(i, (k, v));
                i
            }
        };
        Ok(&self.points[pos].1)
    }

    fn psi(&mut self, n: usize, k: f64) -> Result<f64> {
        let lam = self.values(k)?.get(n).copied().unwrap_or(0.0);
        Ok(lam - 2.0 * k)
    }

    /// Tightest cached bracket `(a, b)` with `ψ_n(a) > 0 ≥ ψ_n(b)`.
    fn bracket(&self, n: usize) -> Option<(f64, f64, f64, f64)> {
        let psi = |(k, v): &(f64, Vec<f64>)| v.get(n).copied().unwrap_or(0.0) - 2.0 * k;
        let (a, fa) = self.points.iter().filter(|p| psi(p) > 0.0).map(|p| (p.0, psi(p))).next_back()?;
        let (b, fb) = self.points.iter().filter(|p| p.0 > a && psi(p) <= 0.0).map(|p| (p.0, psi(p))).next()?;
        Some((a, fa, b, fb))
    }
}

struct Roots {
    energies: Vec<f64>,
    residuals: Vec<f64>,
    near_threshold: bool,
}

/// Roots of `λ_n(L_k) = 2k` for every level counted at the floor.
fn solve_levels(
    mass: f64,
    tol: f64,
    e_floor: f64,
    max_iter: usize,
    eval: impl FnMut(f64) -> Result<Vec<f64>>,
) -> Result<Roots> {
    let mut cache = Cache { eval, points: Vec::new() };
    let k_lo = math::sqrt(e_floor);
    let floor = count_in(cache.values(k_lo)?, k_lo, tol);
    let mut roots = Roots { energies: Vec::new(), residuals: Vec::new(), near_threshold: floor.near_threshold };
    if floor.count == 0 {
        return Ok(roots);
    }
    // λ_1(L_k) ≤ tr L_k ≈ ∫U, so ψ_1 < 0 beyond k = ∫U / 2
    let mut k_hi = 0.5 * mass * (1.0 + 1e-6);
    let mut expansions = 0;
    while cache.psi(0, k_hi)? > 0.0 {
        k_hi *= 2.0;
        expansions += 1;
        if expansions > 30 {
            return Err(Error::ThresholdAmbiguity { level: 1 });
        }
    }
    for n in 0..floor.count {
        let (k, residual) = illinois(&mut cache, n, tol, max_iter)?;
        roots.energies.push(k * k);
        roots.residuals.push(residual);
    }
    Ok(roots)
}

/// Safeguarded Illinois iteration on `ψ_n`; returns `(k, |λ_n(K_{k²}) - 1|)`.
fn illinois<F: FnMut(f64) -> Result<Vec<f64>>>(
    cache: &mut Cache<F>,
    n: usize,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    let level = n + 1;
    let (mut a, mut fa, mut b, mut fb) = cache.bracket(n).ok_or(Error::ThresholdAmbiguity { level })?;
    let residual = |f: f64, k: f64| f.abs() / (2.0 * k);
    let mut best = if residual(fa, a) < residual(fb, b) { (a, residual(fa, a)) } else { (b, residual(fb, b)) };
    if best.1 <= tol {
        return Ok(best);
    }
    let mut side = 0i8;
    let mut width_before = b - a;
    for it in 0..max_iter {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if it % 4 == 3 {
            // force progress when the secant keeps landing on one side
            if b - a > 0.5 * width_before {
                c = 0.5 * (a + b);
            }
            width_before = b - a;
        }
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = cache.psi(n, c)?;
        let r = residual(fc, c);
        if r < best.1 {
            best = (c, r);
        }
        if r <= tol {
            return Ok((c, r));
        }
        if fc > 0.0 {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
        if b - a <= 4.0 * f64::EPSILON * b {
            break;
        }
    }
    if best.1 <= tol {
        Ok(best)
    } else {
        Err(Error::NoConvergence { level, residual: best.1 })
    }
}

/// Birman–Schwinger spectrum on the grid with the default options.
pub fn solve_nystrom(u: &Potential, g: &Grid, tol: f64) -> Result<Spectrum> {
    solve_nystrom_with(u, g, &NystromOptions::new(tol))
}

pub fn solve_nystrom_with(u: &Potential, g: &Grid, opts: &NystromOptions) -> Result<Spectrum> {
    check_tol(opts.tol)?;
    let mut spectrum = Spectrum::plain(Vec::new(), Method::Nystrom);
    spectrum.tol = opts.tol;
    spectrum.discretization = Some(opts.discretization);
    if u.is_zero() {
        return Ok(spectrum);
    }
    let mass = g.integrate(|x| u.eval(x));
    let e_floor = opts.e_floor.unwrap_or(1e-9 * mass * mass);
    if !(e_floor > 0.0) {
        return Err(invalid(format!("floor energy must be positive, got {e_floor}")));
    }
    let disc = opts.discretization;
    // fail fast on coverage before the first eigensolve
    build_kernel_with(u, g, &KernelSpec::Exponential { mu: 1.0 }, Discretization::Pointwise).map(|_| ())?;
    let roots = solve_levels(mass, opts.tol, e_floor, opts.max_iter, |k| {
        eigvalsh_desc(&build_kernel_with(u, g, &KernelSpec::Exponential { mu: k }, disc)?)
    })?;
    spectrum.energies = roots.energies;
    spectrum.residuals = roots.residuals;
    spectrum.near_threshold = roots.near_threshold;
    Ok(spectrum)
}

/// Exact finite-rank spectrum of `-∂² - ν` for atomic `ν`.
pub fn solve_atomic(nu: &AtomicMeasure, tol: f64) -> Result<Spectrum> {
    check_tol(tol)?;
    let mass = nu.total_mass();
    if !(mass > 0.0) {
        return Err(invalid("atomic measure needs positive total mass"));
    }
    let roots = solve_levels(mass, tol, 1e-9 * mass * mass, 200, |k| {
        eigvalsh_desc(&build_atomic_kernel(nu, &KernelSpec::Exponential { mu: k })?)
    })?;
    let mut spectrum = Spectrum::plain(roots.energies, Method::Atomic);
    spectrum.residuals = roots.residuals;
    spectrum.near_threshold = roots.near_threshold;
    spectrum.tol = tol;
    Ok(spectrum)
}

/// A finite-difference domain: the support widened by `max(10, 14/√E_min)`.
pub fn fd_domain(u: &Potential, e_min: f64) -> Interval {
    let margin = if e_min > 0.0 { (14.0 / math::sqrt(e_min)).max(10.0) } else { 10.0 };
    Interval::new(u.support().lo - margin, u.support().hi + margin)
}

/// Cell averages of `U` over `[x_i - h/2, x_i + h/2]`, split at breakpoints.
fn cell_averages(u: &Potential, lo: f64, h: f64, cells: usize) -> Vec<f64> {
    let (t, w) = gauss_legendre(8);
    let bps = u.breakpoints();
    let support = u.support();
    let mut seg = Vec::new();
    (1..cells)
        .map(|i| {
            let x = lo + i as f64 * h;
            let (a, b) = (x - 0.5 * h, x + 0.5 * h);
            if b <= support.lo || a >= support.hi {
                return 0.0;
            }
            seg.clear();
            seg.push(a);
            let start = bps.partition_point(|&p| p <= a);
            seg.extend(bps[start..].iter().copied().take_while(|&p| p < b));
            seg.push(b);
            let mut acc = 0.0;
            for s in seg.windows(2) {
                let half = 0.5 * (s[1] - s[0]);
                let mid = 0.5 * (s[1] + s[0]);
                for (ti, wi) in t.iter().zip(&w) {
                    acc += half * wi * u.eval(mid + half * ti);
                }
            }
            acc / h
        })
        .collect()
}

struct FdLevels {
    operator: SymTridiagonal,
    h: f64,
    energies: Vec<f64>,
}

fn fd_levels(u: &Potential, domain: Interval, cells: usize) -> FdLevels {
    let h = domain.len() / cells as f64;
    let inv = 1.0 / (h * h);
    let uc = cell_averages(u, domain.lo, h, cells);
    let diag: Vec<f64> = uc.iter().map(|&v| 2.0 * inv - v).collect();
    let off = alloc::vec![-inv; diag.len().saturating_sub(1)];
    let operator = SymTridiagonal::new(diag, off);
    let (lo, hi) = operator.gershgorin();
    let count = operator.count_below(0.0);
    let energies = (0..count).map(|k| -operator.eigenvalue(k, lo, hi.min(0.0))).collect();
    FdLevels { operator, h, energies }
}

/// Second-order finite differences on `domain` with steps `h` and `h / 2`,
/// combined by Richardson extrapolation `(4 E_{h/2} - E_h) / 3`.
pub fn solve_fd_oracle(u: &Potential, h: f64, domain: Interval) -> Result<Spectrum> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid(format!("finite-difference step must be positive, got {h}")));
    }
    if domain.is_degenerate() {
        return Err(invalid("finite-difference domain is degenerate"));
    }
    if !u.is_zero() && !domain.covers(&u.support()) {
        return Err(invalid(format!(
            "finite-difference domain [{}, {}] does not cover the support [{}, {}]",
            domain.lo,
            domain.hi,
            u.support().lo,
            u.support().hi
        )));
    }
    let cells = math::ceil(domain.len() / h).max(4.0) as usize;
    let coarse = fd_levels(u, domain, cells);
    let fine = fd_levels(u, domain, 2 * cells);
    let levels = coarse.energies.len().min(fine.energies.len());
    let energies: Vec<f64> =
        (0..levels).map(|i| (4.0 * fine.energies[i] - coarse.energies[i]) / 3.0).collect();

    let n = fine.operator.order();
    let edge = (n / 10).max(1);
    let mut boundary_mass = Vec::with_capacity(levels);
    for (i, &e) in fine.energies.iter().take(levels).enumerate() {
        let v = fine.operator.eigenvector(-e);
        let norm: f64 = v.iter().map(|x| x * x).sum();
        let outer: f64 = v[..edge].iter().chain(&v[n - edge..]).map(|x| x * x).sum::<f64>() / norm;
        if outer > 1e-8 {
            return Err(Error::DomainTooSmall { level: i + 1, boundary_mass: outer });
        }
        boundary_mass.push(outer);
    }
    let mut spectrum = Spectrum::plain(energies, Method::FiniteDifference);
    spectrum.near_threshold = coarse.energies.len() != fine.energies.len();
    spectrum.fd = Some(FdDiagnostics {
        h: coarse.h,
        domain,
        coarse: coarse.energies,
        fine: fine.energies,
        boundary_mass,
    });
    Ok(spectrum)
}

/// `delta` (`c`): `{c²/4}`; `poschl_teller` (integer `lambda`): `{(λ - n)²}`.
pub fn closed_form_spectrum(family: &str, params: &[(&str, f64)]) -> Result<Spectrum> {
    let get = |key: &str| {
        params
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| invalid(format!("closed form {family} needs parameter {key}")))
    };
    match family {
        "delta" => {
            let c = get("c")?;
            if !(c > 0.0) || !c.is_finite() {
                return Err(invalid(format!("delta strength must be positive, got {c}")));
            }
            Ok(Spectrum::plain(alloc::vec![0.25 * c * c], Method::ClosedForm))
        }
        "poschl_teller" => {
            let lambda = get("lambda")?;
            if !(lambda >= 1.0) || math::round(lambda) != lambda || lambda > 1e6 {
                return Err(invalid(format!("poschl_teller closed form needs a positive integer lambda, got {lambda}")));
            }
            let energies = (0..lambda as u32).map(|n| (lambda - n as f64) * (lambda - n as f64)).collect();
            Ok(Spectrum::plain(energies, Method::ClosedForm))
        }
        other => Err(invalid(format!("no closed form for family {other}"))),
    }
}
