//! Potentials `U ≥ 0`, atomic measures `ν = Σ c_j δ_{x_j}`, κ-measures with
//! their `J` function, and the mollifier that turns a measure into a smooth
//! potential.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Result};
use crate::math;
use crate::numerics::{gauss_legendre, Interval};

/// Half-width of the gaussian mollifier support, in units of `ε`. The
/// neglected tail mass is below `1e-13`.
const GAUSSIAN_CUTOFF: f64 = 7.5;
/// Half-width of a `sech²(x / s)` support in units of `s`; tail fraction
/// `2 e^{-29}`.
const SECH2_CUTOFF: f64 = 14.5;
/// Half-width of an `exp(-(x / w)²)` support in units of `w`; tail fraction
/// `erfc(5.2) ≈ 2e-13`.
const GAUSS_WELL_CUTOFF: f64 = 5.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// Finite sum of point masses with strictly increasing locations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let atoms: Vec<Atom> = atoms.into_iter().map(|(x, mass)| Atom { x, mass }).collect();
        if atoms.iter().any(|a| !a.x.is_finite() || !a.mass.is_finite() || a.mass < 0.0) {
            return Err(invalid("atoms need finite locations and non-negative finite masses"));
        }
        if atoms.windows(2).any(|w| !(w[0].x < w[1].x)) {
            return Err(invalid("atom locations must be strictly increasing"));
        }
        Ok(Self { atoms })
    }

    /// `c δ_x`.
    pub fn dirac(x: f64, mass: f64) -> Result<Self> {
        Self::new(alloc::vec![(x, mass)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Exactly one atom carries positive mass.
    pub fn is_single_dirac(&self) -> bool {
        self.atoms.iter().filter(|a| a.mass > 0.0).count() == 1
    }

    /// Mass of the half-open interval `(a, b]`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        self.atoms.iter().filter(|at| a < at.x && at.x <= b).map(|at| at.mass).sum()
    }

    /// Atom-wise sum; coincident locations are merged.
    pub fn plus(&self, other: &AtomicMeasure) -> AtomicMeasure {
        let mut all: Vec<Atom> = self.atoms.iter().chain(&other.atoms).copied().collect();
        all.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut merged: Vec<Atom> = Vec::with_capacity(all.len());
        for a in all {
            match merged.last_mut() {
                Some(last) if last.x == a.x => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        AtomicMeasure { atoms: merged }
    }
}

/// A constant density on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityBump {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

/// Locally finite measure `κ = μ dz + Σ_b value_b 1_[lo_b, hi_b] dz + Σ c_j δ_{x_j}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KappaMeasure {
    uniform: f64,
    bumps: Vec<DensityBump>,
    atoms: AtomicMeasure,
}

impl KappaMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `κ(dz) = μ dz`, the measure behind `L_μ`.
    pub fn lebesgue(mu: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(invalid("uniform density must be finite and non-negative"));
        }
        Ok(Self { uniform: mu, ..Self::default() })
    }

    pub fn atomic(atoms: AtomicMeasure) -> Self {
        Self { atoms, ..Self::default() }
    }

    pub fn new(uniform: f64, bumps: Vec<DensityBump>, atoms: AtomicMeasure) -> Result<Self> {
        if !(uniform >= 0.0) || !uniform.is_finite() {
            return Err(invalid("uniform density must be finite and non-negative"));
        }
        if bumps.iter().any(|b| !(b.lo < b.hi) || !(b.value >= 0.0) || !b.value.is_finite()) {
            return Err(invalid("density bumps need lo < hi and a non-negative value"));
        }
        Ok(Self { uniform, bumps, atoms })
    }

    pub fn uniform_density(&self) -> f64 {
        self.uniform
    }

    pub fn bumps(&self) -> &[DensityBump] {
        &self.bumps
    }

    pub fn atoms(&self) -> &AtomicMeasure {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.uniform == 0.0
            && self.bumps.iter().all(|b| b.value == 0.0)
            && self.atoms.atoms().iter().all(|a| a.mass == 0.0)
    }

    /// `κ + other`.
    pub fn plus(&self, other: &KappaMeasure) -> KappaMeasure {
        let mut bumps = self.bumps.clone();
        bumps.extend_from_slice(&other.bumps);
        KappaMeasure {
            uniform: self.uniform + other.uniform,
            bumps,
            atoms: self.atoms.plus(&other.atoms),
        }
    }

    fn density_mass(&self, a: f64, b: f64) -> f64 {
        let mut m = self.uniform * (b - a);
        for bump in &self.bumps {
            let lo = bump.lo.max(a);
            let hi = bump.hi.min(b);
            if hi > lo {
                m += bump.value * (hi - lo);
            }
        }
        m
    }

    /// Measure of `(a, b]` for `a <= b`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        debug_assert!(a <= b);
        self.density_mass(a, b) + self.atoms.mass_in(a, b)
    }

    /// `J(x) = ∫_0^x κ(dz)`: `κ((0, x])` for `x ≥ 0` and `-κ((x, 0])` for
    /// `x < 0`. Atoms are counted at the right end of each half-open interval,
    /// so `J` is right-continuous and `J(y) - J(x) = κ((x, y])`.
    pub fn j_eval(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.mass_in(0.0, x)
        } else {
            -self.mass_in(x, 0.0)
        }
    }

    /// `|J(x) - J(y)|`.
    pub fn increment(&self, x: f64, y: f64) -> f64 {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        self.mass_in(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MollifierShape {
    Gaussian,
    Triangle,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Zero,
    /// `amplitude · sech²((x - center) / scale)`.
    Sech2 { amplitude: f64, scale: f64, center: f64 },
    SquareWell { depth: f64, lo: f64, hi: f64 },
    /// `depth · exp(-((x - center) / width)²)`.
    Gaussian { depth: f64, width: f64, center: f64 },
    /// Piecewise-linear interpolation of samples.
    Sampled { xs: Vec<f64>, us: Vec<f64> },
    Mollified { measure: AtomicMeasure, eps: f64, shape: MollifierShape },
    Sum(Vec<Potential>),
}

/// A non-negative integrable potential `U`, treated as zero outside its
/// support. The operator is `-d²/dx² - U`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    shape: Shape,
    support: Interval,
    mass_hint: Option<f64>,
    label: String,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Potential {
    pub fn zero() -> Self {
        Self { shape: Shape::Zero, support: Interval::new(-1.0, 1.0), mass_hint: Some(0.0), label: "zero".into() }
    }

    /// Pöschl–Teller well `λ(λ+1) sech²(x - center)`; levels `(λ - n)²` for
    /// integer `n < λ`.
    pub fn sech2(lambda: f64, center: f64) -> Result<Self> {
        positive("lambda", lambda)?;
        let amplitude = lambda * (lambda + 1.0);
        let mut p = Self::sech2_raw(amplitude, 1.0, center)?;
        p.label = format!("sech2(lambda={lambda}, center={center})");
        Ok(p)
    }

    /// `amplitude · sech²((x - center) / scale)`.
    pub fn sech2_raw(amplitude: f64, scale: f64, center: f64) -> Result<Self> {
        positive("amplitude", amplitude)?;
        positive("scale", scale)?;
        let half = SECH2_CUTOFF * scale;
        Ok(Self {
            shape: Shape::Sech2 { amplitude, scale, center },
            support: Interval::new(center - half, center + half),
            mass_hint: Some(2.0 * amplitude * scale),
            label: format!("sech2(amplitude={amplitude}, scale={scale}, center={center})"),
        })
    }

    /// The candidate optimiser for `½ < γ < 3/2`:
    /// `U(x) = α⁻¹ cosh(x / α)⁻²` with `α = γ² - ¼`.
    pub fn conjectured(gamma: f64) -> Result<Self> {
        if !(gamma > 0.5 && gamma < 1.5) {
            return Err(invalid(format!("conjectured family needs 1/2 < gamma < 3/2, got {gamma}")));
        }
        let alpha = gamma * gamma - 0.25;
        let mut p = Self::sech2_raw(1.0 / alpha, alpha, 0.0)?;
        p.label = format!("conjectured(gamma={gamma})");
        Ok(p)
    }

    pub fn square_well(depth: f64, width: f64, center: f64) -> Result<Self> {
        positive("depth", depth)?;
        positive("width", width)?;
        let (lo, hi) = (center - 0.5 * width, center + 0.5 * width);
        Ok(Self {
            shape: Shape::SquareWell { depth, lo, hi },
            support: Interval::new(lo, hi),
            mass_hint: Some(depth * width),
            label: format!("square_well(depth={depth}, width={width}, center={center})"),
        })
    }

    pub fn gaussian(depth: f64, width: f64, center: f64) -> Result<Self> {
        positive("depth", depth)?;
        positive("width", width)?;
        let half = GAUSS_WELL_CUTOFF * width;
        Ok(Self {
            shape: Shape::Gaussian { depth, width, center },
            support: Interval::new(center - half, center + half),
            mass_hint: Some(depth * width * math::sqrt(core::f64::consts::PI)),
            label: format!("gaussian(depth={depth}, width={width}, center={center})"),
        })
    }

    /// Linear interpolation between samples, zero outside `[x_0, x_last]`.
    pub fn sampled(xs: Vec<f64>, us: Vec<f64>) -> Result<Self> {
        if xs.len() != us.len() || xs.len() < 2 {
            return Err(invalid("sampled potential needs at least two (x, U) pairs"));
        }
        if xs.iter().chain(&us).any(|v| !v.is_finite()) {
            return Err(invalid("sampled potential has non-finite values"));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("sample abscissae must be strictly increasing"));
        }
        if us.iter().any(|&u| u < 0.0) {
            return Err(invalid("sampled potential must be non-negative"));
        }
        let mass = xs.windows(2).zip(us.windows(2)).map(|(x, u)| 0.5 * (x[1] - x[0]) * (u[0] + u[1])).sum();
        let support = Interval::new(xs[0], xs[xs.len() - 1]);
        let label = format!("sampled({} points on [{}, {}])", xs.len(), support.lo, support.hi);
        Ok(Self { shape: Shape::Sampled { xs, us }, support, mass_hint: Some(mass), label })
    }

    /// Sum of potentials; the support is the hull of the parts.
    pub fn sum(parts: Vec<Potential>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| invalid("sum of potentials needs at least one part"))?;
        let support = parts.iter().skip(1).fold(first.support, |s, p| s.hull(&p.support));
        let mass_hint = parts.iter().map(|p| p.mass_hint).sum::<Option<f64>>();
        let label = parts.iter().map(|p| p.label.as_str()).collect::<Vec<_>>().join(" + ");
        Ok(Self { shape: Shape::Sum(parts), support, mass_hint, label })
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    pub fn mass_hint(&self) -> Option<f64> {
        self.mass_hint
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        match &self.shape {
            Shape::Zero => true,
            Shape::Sum(parts) => parts.iter().all(Potential::is_zero),
            _ => self.mass_hint == Some(0.0),
        }
    }

    /// `U(x)`; zero outside the support.
    pub fn eval(&self, x: f64) -> f64 {
        if !self.support.contains(x) {
            return 0.0;
        }
        match &self.shape {
            Shape::Zero => 0.0,
            Shape::Sech2 { amplitude, scale, center } => amplitude * math::sech2((x - center) / scale),
            Shape::SquareWell { depth, .. } => *depth,
            Shape::Gaussian { depth, width, center } => {
                let t = (x - center) / width;
                depth * math::exp(-t * t)
            }
            Shape::Sampled { xs, us } => {
                let i = match xs.binary_search_by(|v| v.total_cmp(&x)) {
                    Ok(i) => return us[i],
                    Err(i) => i,
                };
                let (x0, x1) = (xs[i - 1], xs[i]);
                let t = (x - x0) / (x1 - x0);
                us[i - 1] * (1.0 - t) + us[i] * t
            }
            Shape::Mollified { measure, eps, shape } => {
                measure.atoms().iter().map(|a| a.mass * mollifier(x - a.x, *eps, *shape)).sum()
            }
            Shape::Sum(parts) => parts.iter().map(|p| p.eval(x)).sum(),
        }
    }

    /// Sorted abscissae where `U` may fail to be smooth (support ends, jumps,
    /// kinks, centres of narrow bumps). Integration splits at these points.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = alloc::vec![self.support.lo, self.support.hi];
        match &self.shape {
            Shape::Sampled { xs, .. } => pts.extend_from_slice(xs),
            Shape::Mollified { measure, eps, shape } => {
                let r = match shape {
                    MollifierShape::Gaussian => GAUSSIAN_CUTOFF * eps,
                    MollifierShape::Triangle => *eps,
                };
                for a in measure.atoms() {
                    pts.extend_from_slice(&[a.x - r, a.x, a.x + r]);
                }
            }
            Shape::Sum(parts) => {
                for p in parts {
                    pts.extend(p.breakpoints());
                }
            }
            Shape::Gaussian { center, .. } | Shape::Sech2 { center, .. } => pts.push(*center),
            _ => {}
        }
        pts.retain(|x| self.support.contains(*x));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `∫ g(x, U(x)) dx` over the support by composite Gauss–Legendre split
    /// at the breakpoints.
    pub fn integrate_with(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        if matches!(self.shape, Shape::Zero) {
            return 0.0;
        }
        let (t, w) = gauss_legendre(16);
        let pts = self.breakpoints();
        let total = self.support.len();
        let mut acc = 0.0;
        for seg in pts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let sub = (math::ceil(256.0 * (b - a) / total) as usize).clamp(1, 256);
            let h = (b - a) / sub as f64;
            for s in 0..sub {
                let left = a + s as f64 * h;
                for (ti, wi) in t.iter().zip(&w) {
                    let x = left + 0.5 * (ti + 1.0) * h;
                    acc += 0.5 * h * wi * g(x, self.eval(x));
                }
            }
        }
        acc
    }

    /// `∫ U^p`.
    pub fn integral_of_power(&self, p: f64) -> f64 {
        self.integrate_with(|_, u| if u > 0.0 { math::powf(u, p) } else { 0.0 })
    }

    /// `∫ U`, from the analytic hint when available.
    pub fn mass(&self) -> f64 {
        self.mass_hint.unwrap_or_else(|| self.integral_of_power(1.0))
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn mollifier(t: f64, eps: f64, shape: MollifierShape) -> f64 {
    match shape {
        MollifierShape::Gaussian => {
            if t.abs() > GAUSSIAN_CUTOFF * eps {
                return 0.0;
            }
            let s = t / eps;
            math::exp(-0.5 * s * s) / (eps * math::sqrt(2.0 * core::f64::consts::PI))
        }
        MollifierShape::Triangle => {
            let s = 1.0 - t.abs() / eps;
            if s > 0.0 {
                s / eps
            } else {
                0.0
            }
        }
    }
}

/// `ν_ε = δ_ε * ν`, with `ε` the standard deviation (gaussian) or the
/// half-width (triangle). Total mass equals `ν(ℝ)`.
pub fn mollify(nu: &AtomicMeasure, eps: f64, shape: MollifierShape) -> Result<Potential> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid(format!("mollifier width must be positive, got {eps}")));
    }
    if nu.is_empty() {
        return Err(invalid("cannot mollify an empty measure"));
    }
    let r = match shape {
        MollifierShape::Gaussian => GAUSSIAN_CUTOFF * eps,
        MollifierShape::Triangle => eps,
    };
    let atoms = nu.atoms();
    let support = Interval::new(atoms[0].x - r, atoms[atoms.len() - 1].x + r);
    let label = format!("mollified({} atoms, eps={eps}, {shape:?})", nu.len());
    Ok(Potential {
        shape: Shape::Mollified { measure: nu.clone(), eps, shape },
        support,
        mass_hint: Some(nu.total_mass()),
        label,
    })
}

/// Named parameter lookup for [`make_family`].
fn param(params: &[(&str, f64)], key: &str) -> Option<f64> {
    params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

fn required(params: &[(&str, f64)], family: &str, key: &str) -> Result<f64> {
    param(params, key).ok_or_else(|| invalid(format!("family {family} needs parameter {key}")))
}

fn only_keys(params: &[(&str, f64)], family: &str, allowed: &[&str]) -> Result<()> {
    match params.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(invalid(format!("family {family} has no parameter {k}"))),
        None => Ok(()),
    }
}

/// Built-in families by name: `zero`, `sech2` (`lambda`, `center`),
/// `square_well` (`depth`, `width`, `center`), `gaussian` (`depth`, `width`,
/// `center`) and `conjectured` (`gamma`).
pub fn make_family(name: &str, params: &[(&str, f64)]) -> Result<Potential> {
    match name {
        "zero" => {
            only_keys(params, name, &[])?;
            Ok(Potential::zero())
        }
        "sech2" => {
            only_keys(params, name, &["lambda", "center"])?;
            Potential::sech2(required(params, name, "lambda")?, param(params, "center").unwrap_or(0.0))
        }
        "square_well" => {
            only_keys(params, name, &["depth", "width", "center"])?;
            Potential::square_well(
                required(params, name, "depth")?,
                required(params, name, "width")?,
                param(params, "center").unwrap_or(0.0),
            )
        }
        "gaussian" => {
            only_keys(params, name, &["depth", "width", "center"])?;
            Potential::gaussian(
                required(params, name, "depth")?,
                required(params, name, "width")?,
                param(params, "center").unwrap_or(0.0),
            )
        }
        "conjectured" => {
            only_keys(params, name, &["gamma"])?;
            Potential::conjectured(required(params, name, "gamma")?)
        }
        other => Err(invalid(format!("unknown potential family {other}"))),
    }
}
