//! Lieb–Thirring moments, constants and the inequality checks built on them.
//!
//! The sharp `γ = ½` bound `Σ √E_i ≤ ½ ∫U` is strict for `U ∈ L¹` and an
//! equality exactly for a single Dirac measure. The domination bound
//! compares `2 Σ_{i≤n} √E_i` with partial sums of `λ_i(L_{√E})`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bound_states::{solve_fd_oracle, Spectrum};
use crate::error::{invalid, Error, Result};
use crate::kernels::{build_atomic_kernel, build_kernel_with, Discretization, KernelSpec};
use crate::math;
use crate::numerics::{eigvalsh_desc, partial_sum, Grid, Interval};
use crate::potentials::{mollify, AtomicMeasure, MollifierShape, Potential};

/// `Σ E_i^γ`; `γ = 0` counts levels.
pub fn moment_sum(s: &Spectrum, gamma: f64) -> f64 {
    assert!(gamma >= 0.0, "moment order must be non-negative");
    if gamma == 0.0 {
        return s.len() as f64;
    }
    s.energies.iter().map(|&e| math::powf(e, gamma)).sum()
}

/// `∫ U^{γ + ½}`.
pub fn rhs_integral(u: &Potential, gamma: f64) -> f64 {
    assert!(gamma >= 0.0, "moment order must be non-negative");
    if gamma == 0.5 {
        return u.mass();
    }
    u.integral_of_power(gamma + 0.5)
}

/// What the spectrum was computed for.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Potential(&'a Potential),
    Measure(&'a AtomicMeasure),
}

impl Source<'_> {
    fn mass(&self) -> f64 {
        match self {
            Source::Potential(u) => u.mass(),
            Source::Measure(nu) => nu.total_mass(),
        }
    }

    fn describe(&self) -> String {
        match self {
            Source::Potential(u) => String::from(u.label()),
            Source::Measure(nu) => {
                let atoms: Vec<String> = nu.atoms().iter().map(|a| format!("{}@{}", a.mass, a.x)).collect();
                format!("measure[{}]", atoms.join(", "))
            }
        }
    }

    fn equality_allowed(&self) -> bool {
        matches!(self, Source::Measure(nu) if nu.is_single_dirac())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtReport {
    pub gamma: f64,
    /// `Σ E_i^γ`.
    pub lhs: f64,
    /// `∫ U^{γ+½}`, or `ν(ℝ)` for a measure.
    pub rhs_mass: f64,
    pub bound_constant: f64,
    /// `lhs / (bound_constant · rhs_mass)`.
    pub ratio: f64,
    /// `bound_constant · rhs_mass - lhs`.
    pub slack: f64,
    /// Tolerance used to separate equality from strict inequality.
    pub tol: f64,
    pub strict: bool,
    pub equality: bool,
    pub pass: bool,
    pub provenance: String,
}

/// The sharp `γ = ½` comparison; never errors, the verdict is in `pass`.
///
/// Strictness is required for `L¹` potentials and for measures with more
/// than one atom; a single Dirac must be an equality.
pub fn sharp_half_report(src: Source<'_>, s: &Spectrum) -> LtReport {
    let mass = src.mass();
    let lhs = s.sqrt_sum();
    let rhs = 0.5 * mass;
    let slack = rhs - lhs;
    let tol = 10.0 * s.tol.max(1e-13) * mass;
    let strict = slack > tol;
    let equality = slack.abs() <= tol;
    let pass = if src.equality_allowed() { equality } else { strict };
    LtReport {
        gamma: 0.5,
        lhs,
        rhs_mass: mass,
        bound_constant: 0.5,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        slack,
        tol,
        strict,
        equality,
        pass,
        provenance: format!("{} via {}", src.describe(), s.method.as_str()),
    }
}

/// [`sharp_half_report`], turning a failed verdict into an error.
pub fn check_sharp_half(src: Source<'_>, s: &Spectrum) -> Result<LtReport> {
    let r = sharp_half_report(src, s);
    if r.pass {
        Ok(r)
    } else {
        let claim = if src.equality_allowed() {
            "single Dirac measure gives equality in the sharp bound"
        } else {
            "sum of square roots is strictly below half the mass"
        };
        Err(Error::InequalityViolation { claim: claim.into(), slack: r.slack, tol: r.tol })
    }
}

/// Moment ratio for `γ ≠ ½`, reporting only: the constant used is the
/// conjectured `L_{γ,1}` when `γ > ½`, otherwise the classical one.
pub fn moment_report(u: &Potential, s: &Spectrum, gamma: f64) -> Result<LtReport> {
    let c = lt_constants(gamma)?;
    let constant = c.conjectured.unwrap_or(c.classical);
    let lhs = moment_sum(s, gamma);
    let rhs_mass = rhs_integral(u, gamma);
    let slack = constant * rhs_mass - lhs;
    Ok(LtReport {
        gamma,
        lhs,
        rhs_mass,
        bound_constant: constant,
        ratio: lhs / (constant * rhs_mass),
        slack,
        tol: 0.0,
        strict: slack > 0.0,
        equality: false,
        pass: true,
        provenance: format!("{} via {}", u.label(), s.method.as_str()),
    })
}

fn top_eigenvalues(u: &Potential, g: &Grid, mu: f64, disc: Discretization) -> Result<Vec<f64>> {
    eigvalsh_desc(&build_kernel_with(u, g, &KernelSpec::Exponential { mu }, disc)?)
}

fn discretization_of(s: &Spectrum) -> Discretization {
    s.discretization.unwrap_or(Discretization::PanelCorrected)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub n: usize,
    pub energy: f64,
    /// `2 Σ_{i≤n} √E_i`.
    pub lhs: f64,
    /// `Σ_{i≤n} λ_i(L_{√E}) + λ_1(L_{√E_1}) - λ_1(L_{√E_2})`.
    pub rhs: f64,
    pub slack: f64,
    /// `-1e-8 ∫U`: the smallest slack accepted.
    pub tol: f64,
    pub pass: bool,
}

/// Evaluate the domination bound at `(n, E)` with `0 ≤ E ≤ E_n` and
/// `E_{j+1} = 0` past the last level. The `L` matrices are rebuilt on `g`
/// with the discretisation that produced `s`.
pub fn check_domination(u: &Potential, g: &Grid, s: &Spectrum, n: usize, energy: f64) -> Result<DominationReport> {
    if n == 0 || n > s.len() {
        return Err(invalid(format!("domination needs 1 <= n <= {} levels, got n = {n}", s.len())));
    }
    let e_n = s.level(n);
    if !(energy >= 0.0 && energy <= e_n) {
        return Err(invalid(format!("domination energy must lie in [0, E_{n}] = [0, {e_n}], got {energy}")));
    }
    let disc = discretization_of(s);
    let lhs = 2.0 * s.energies[..n].iter().map(|&e| math::sqrt(e)).sum::<f64>();
    let at_e = top_eigenvalues(u, g, math::sqrt(energy), disc)?;
    let l1_e1 = top_eigenvalues(u, g, math::sqrt(s.level(1)), disc)?[0];
    let l1_e2 = top_eigenvalues(u, g, math::sqrt(s.level(2)), disc)?[0];
    let rhs = partial_sum(&at_e, n)? + l1_e1 - l1_e2;
    let slack = rhs - lhs;
    let tol = -1e-8 * g.integrate(|x| u.eval(x));
    Ok(DominationReport { n, energy, lhs, rhs, slack, tol, pass: slack >= tol })
}

/// Largest `E` for which the domination bound at level `n` follows from the
/// monotonicity of partial sums: `E_n` for `n ≥ 2`, but only `E_2` for
/// `n = 1`, because the `n = 1` step compares `λ_1(L_{√E})` with
/// `λ_1(L_{√E_2})`.
pub fn domination_energy_cap(s: &Spectrum, n: usize) -> f64 {
    if n == 1 {
        s.level(2)
    } else {
        s.level(n)
    }
}

/// `|λ_i(L_{√E_i}) - 2√E_i|` for every level.
pub fn check_basic_equality(u: &Potential, g: &Grid, s: &Spectrum) -> Result<Vec<f64>> {
    let disc = discretization_of(s);
    s.energies
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let k = math::sqrt(e);
            let lam = top_eigenvalues(u, g, k, disc)?;
            Ok((lam.get(i).copied().unwrap_or(0.0) - 2.0 * k).abs())
        })
        .collect()
}

/// [`check_basic_equality`] for the finite matrix of an atomic measure.
pub fn check_basic_equality_atomic(nu: &AtomicMeasure, s: &Spectrum) -> Result<Vec<f64>> {
    s.energies
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let k = math::sqrt(e);
            let lam = eigvalsh_desc(&build_atomic_kernel(nu, &KernelSpec::Exponential { mu: k })?)?;
            Ok((lam.get(i).copied().unwrap_or(0.0) - 2.0 * k).abs())
        })
        .collect()
}

/// `2 Σ √E_i ≤ ∫U + λ_1(L_{√E_1}) - λ_1(L_{√E_2})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryReport {
    pub lhs: f64,
    pub mass: f64,
    /// `λ_1(L_{√E_1}) - λ_1(L_{√E_2})`, strictly negative when a level exists.
    pub correction: f64,
    pub slack: f64,
}

pub fn corollary_chain(u: &Potential, g: &Grid, s: &Spectrum) -> Result<CorollaryReport> {
    let disc = discretization_of(s);
    let mass = g.integrate(|x| u.eval(x));
    let lhs = 2.0 * s.sqrt_sum();
    if s.is_empty() {
        return Ok(CorollaryReport { lhs, mass, correction: 0.0, slack: mass });
    }
    let l1 = top_eigenvalues(u, g, math::sqrt(s.level(1)), disc)?[0];
    let l2 = top_eigenvalues(u, g, math::sqrt(s.level(2)), disc)?[0];
    let correction = l1 - l2;
    Ok(CorollaryReport { lhs, mass, correction, slack: mass + correction - lhs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub gamma: f64,
    /// `L^c_{γ,1} = (4π)^{-½} Γ(γ+1) / Γ(γ+3/2)`.
    pub classical: f64,
    /// First displayed form of the conjectured `L_{γ,1}` (`γ > ½`).
    pub conjectured: Option<f64>,
    /// Second form, `2 L^c ((γ-½)/(γ+½))^{γ-½}`.
    pub conjectured_alt: Option<f64>,
}

pub fn classical_constant(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::OutOfDomain(format!("classical constant needs gamma >= 0, got {gamma}")));
    }
    let pi = core::f64::consts::PI;
    Ok(math::gamma(gamma + 1.0) / (math::sqrt(4.0 * pi) * math::gamma(gamma + 1.5)))
}

/// Both displayed forms of the conjectured constant.
pub fn conjectured_constant(gamma: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.5) || !gamma.is_finite() {
        return Err(Error::OutOfDomain(format!("conjectured constant needs gamma > 1/2, got {gamma}")));
    }
    let pi = core::f64::consts::PI;
    let q = (gamma - 0.5) / (gamma + 0.5);
    let first = math::gamma(gamma + 1.0) / (math::sqrt(pi) * (gamma - 0.5) * math::gamma(gamma + 0.5))
        * math::powf(q, gamma + 0.5);
    let second = 2.0 * classical_constant(gamma)? * math::powf(q, gamma - 0.5);
    Ok((first, second))
}

/// Classical constant always; conjectured forms only when `γ > ½`.
pub fn lt_constants(gamma: f64) -> Result<Constants> {
    let classical = classical_constant(gamma)?;
    let (conjectured, conjectured_alt) = match conjectured_constant(gamma) {
        Ok((a, b)) => (Some(a), Some(b)),
        Err(_) => (None, None),
    };
    Ok(Constants { gamma, classical, conjectured, conjectured_alt })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseRow {
    pub eps: f64,
    pub levels: usize,
    /// `Σ E^γ` from the finite-difference oracle.
    pub moment: f64,
    /// `∫ U_ε^{γ+½}`.
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseTable {
    pub gamma: f64,
    pub mass: f64,
    pub rows: Vec<CollapseRow>,
    pub increasing: bool,
    /// `ratio_last / ratio_first`.
    pub growth: f64,
}

/// For `γ < ½`, mollified `c δ_0` keeps its spectrum while
/// `∫ U_ε^{γ+½} → 0`, so the moment ratio must grow without bound. Spectra
/// come from the finite-difference oracle with `h = ε / 16` on `[-20, 20]`.
pub fn gamma_collapse_demo(gamma: f64, c: f64, eps_schedule: &[f64]) -> Result<CollapseTable> {
    if !(0.0..0.5).contains(&gamma) {
        return Err(invalid(format!("collapse needs 0 <= gamma < 1/2, got {gamma}")));
    }
    if !(c > 0.0) {
        return Err(invalid(format!("collapse needs positive mass, got {c}")));
    }
    if eps_schedule.is_empty() || eps_schedule.windows(2).any(|w| !(w[1] < w[0])) || eps_schedule[0] <= 0.0 {
        return Err(invalid("epsilon schedule must be positive and strictly decreasing"));
    }
    let nu = AtomicMeasure::dirac(0.0, c)?;
    // decay length of the δ state is 2/c
    let half = 20.0f64.max(28.0 / c);
    let domain = Interval::new(-half, half);
    let mut rows = Vec::with_capacity(eps_schedule.len());
    for &eps in eps_schedule {
        let u = mollify(&nu, eps, MollifierShape::Gaussian)?;
        let s = solve_fd_oracle(&u, eps / 16.0, domain)?;
        let moment = moment_sum(&s, gamma);
        let rhs = rhs_integral(&u, gamma);
        rows.push(CollapseRow { eps, levels: s.len(), moment, rhs, ratio: moment / rhs });
    }
    let increasing = rows.windows(2).all(|w| w[1].ratio > w[0].ratio);
    let growth = rows[rows.len() - 1].ratio / rows[0].ratio;
    Ok(CollapseTable { gamma, mass: c, rows, increasing, growth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound_states::{closed_form_spectrum, solve_atomic, solve_nystrom};
    use crate::numerics::build_grid;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn moments() {
        let s = closed_form_spectrum("poschl_teller", &[("lambda", 2.0)]).unwrap();
        assert_eq!(moment_sum(&s, 0.5), 3.0);
        assert_eq!(moment_sum(&s, 1.0), 5.0);
        assert_eq!(moment_sum(&s, 0.0), 2.0);
        let empty = solve_nystrom(&Potential::zero(), &build_grid(Interval::new(-1.0, 1.0), 1, 4).unwrap(), 1e-8)
            .unwrap();
        assert_eq!(moment_sum(&empty, 0.7), 0.0);
    }

    #[test]
    fn rhs_integrals() {
        let well = Potential::square_well(1.0, 2.0, 0.0).unwrap();
        assert!((rhs_integral(&well, 0.5) - 2.0).abs() < 1e-14);
        let u = Potential::sech2(2.0, 0.0).unwrap();
        assert!(rel(rhs_integral(&u, 0.5), 12.0) < 1e-14);
        assert!(rel(rhs_integral(&u, 1.5), 48.0) < 1e-10);
    }

    #[test]
    fn sharp_half_examples() {
        let dirac = AtomicMeasure::dirac(0.0, 2.0).unwrap();
        let s = solve_atomic(&dirac, 1e-14).unwrap();
        let r = check_sharp_half(Source::Measure(&dirac), &s).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12 && r.equality);

        let u = Potential::sech2(1.0, 0.0).unwrap();
        let s = closed_form_spectrum("poschl_teller", &[("lambda", 1.0)]).unwrap();
        let r = check_sharp_half(Source::Potential(&u), &s).unwrap();
        assert!((r.ratio - 0.5).abs() < 1e-14 && r.strict);

        let pair = AtomicMeasure::new(alloc::vec![(-2.0, 1.0), (2.0, 1.0)]).unwrap();
        let s = solve_atomic(&pair, 1e-14).unwrap();
        let r = check_sharp_half(Source::Measure(&pair), &s).unwrap();
        assert!(rel(r.ratio, 0.952834841449282550779450045077) < 1e-12);
    }

    #[test]
    fn sharp_half_rejects_equality_for_potentials() {
        // a fabricated spectrum saturating the bound must be flagged
        let u = Potential::square_well(1.0, 2.0, 0.0).unwrap();
        let mut s = closed_form_spectrum("delta", &[("c", 2.0)]).unwrap();
        s.tol = 1e-12;
        assert!(matches!(check_sharp_half(Source::Potential(&u), &s), Err(Error::InequalityViolation { .. })));
    }

    #[test]
    fn domination_and_basic_equality() {
        let u = Potential::sech2(2.0, 0.0).unwrap();
        let g = build_grid(Interval::new(-15.0, 15.0), 30, 12).unwrap();
        let s = solve_nystrom(&u, &g, 1e-11).unwrap();
        let res = check_basic_equality(&u, &g, &s).unwrap();
        assert!(res.iter().all(|&r| r <= 1e-9), "{res:?}");
        let d = check_domination(&u, &g, &s, 2, 0.0).unwrap();
        assert!(d.pass && d.slack > 0.0);
        for e in [0.0, 0.3, s.energies[1]] {
            assert!(check_domination(&u, &g, &s, 2, e).unwrap().pass);
            assert!(check_domination(&u, &g, &s, 1, e).unwrap().pass);
        }
        assert!(check_domination(&u, &g, &s, 2, 1.5).is_err());
        assert!(check_domination(&u, &g, &s, 3, 0.0).is_err());
        assert_eq!(domination_energy_cap(&s, 1), s.energies[1]);

        let c = corollary_chain(&u, &g, &s).unwrap();
        assert!(c.correction < 0.0 && c.slack >= -1e-10);
    }

    #[test]
    fn single_level_domination_at_e1_is_not_an_identity() {
        // n = 1, E = E_1 with E_2 = 0: slack = 2√E_1 - ∫U, negative by the sharp bound
        let u = Potential::sech2(1.0, 0.0).unwrap();
        let g = build_grid(Interval::new(-15.0, 15.0), 30, 12).unwrap();
        let s = solve_nystrom(&u, &g, 1e-11).unwrap();
        assert_eq!(s.len(), 1);
        let d = check_domination(&u, &g, &s, 1, s.energies[0]).unwrap();
        assert!((d.slack - (2.0 - 4.0)).abs() < 1e-8, "{}", d.slack);
        assert!(!d.pass);
        let d0 = check_domination(&u, &g, &s, 1, domination_energy_cap(&s, 1)).unwrap();
        assert!(d0.pass && d0.slack.abs() < 1e-9);
    }

    #[test]
    fn atomic_basic_equality() {
        let dirac = AtomicMeasure::dirac(0.0, 2.0).unwrap();
        let s = solve_atomic(&dirac, 1e-14).unwrap();
        assert!(check_basic_equality_atomic(&dirac, &s).unwrap()[0] <= 1e-12);
    }

    #[test]
    fn constants() {
        assert!((classical_constant(0.5).unwrap() - 0.25).abs() < 1e-12);
        let c = lt_constants(1.5).unwrap();
        assert!(rel(c.conjectured.unwrap(), c.classical) < 1e-12);
        assert!(rel(c.conjectured.unwrap(), 0.1875) < 1e-12);
        let frozen = [
            (0.6, 0.3790133029265017, 0.2408594699698278),
            (0.8, 0.2900971559948164, 0.2251957057827538),
            (1.0, 0.2450350646319076, 0.2122065907891938),
            (1.2, 0.2162434838110529, 0.2012142113398477),
            (1.4, 0.1957595433855074, 0.1917577521201698),
        ];
        for (g, conj, classical) in frozen {
            let (a, b) = conjectured_constant(g).unwrap();
            assert!(rel(a, b) < 1e-12);
            assert!(rel(a, conj) < 1e-12, "{g}");
            assert!(rel(classical_constant(g).unwrap(), classical) < 1e-12);
            assert!(a <= 2.0 * classical);
        }
        let (near, _) = conjectured_constant(0.5 + 1e-6).unwrap();
        assert!((near - 0.5).abs() < 1e-4);
        assert!(rel(near, 0.4999928991475346) < 1e-9);
        assert!(matches!(conjectured_constant(0.5), Err(Error::OutOfDomain(_))));
        assert!(lt_constants(0.5).unwrap().conjectured.is_none());
    }

    #[test]
    fn collapse_rejects_boundary() {
        assert!(gamma_collapse_demo(0.5, 2.0, &[0.1, 0.05]).is_err());
        assert!(gamma_collapse_demo(0.25, 2.0, &[0.05, 0.1]).is_err());
    }

    #[test]
    fn collapse_counts_stay_constant() {
        let t = gamma_collapse_demo(0.0, 2.0, &[0.4, 0.2, 0.1]).unwrap();
        assert!(t.rows.iter().all(|r| r.levels == 1 && r.moment == 1.0));
        assert!(t.rows.windows(2).all(|w| w[1].rhs < w[0].rhs));
        assert!(t.increasing);
    }
}
