//! Campaign files.
//!
//! A campaign is a TOML document; see `docs/campaign.md` for the schema and
//! `campaigns/showcase.toml` for a worked example. Parsing rejects unknown
//! keys, and validation errors name the offending key path.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bslab_core::numerics::{build_grid, Grid, Interval};
use bslab_core::potentials::{make_family, AtomicMeasure, Potential};
use serde::{Deserialize, Serialize};

use crate::{csv_import, Error};

pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_PANELS: usize = 24;
pub const DEFAULT_NODES_PER_PANEL: usize = 12;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    #[serde(default)]
    pub seed: u64,
    pub output: Output,
    #[serde(default)]
    pub jobs: Vec<JobSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// JSON report path, relative to the campaign file.
    pub path: PathBuf,
    /// Optional CSV summary path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Record the wall-clock time in `meta.timestamp`. Off by default so
    /// reports stay byte-identical between runs.
    #[serde(default)]
    pub timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    SharpHalf,
    Domination,
    BasicEquality,
    Monotonicity,
    Collapse,
    Constants,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::SharpHalf => "sharp_half",
            CheckKind::Domination => "domination",
            CheckKind::BasicEquality => "basic_equality",
            CheckKind::Monotonicity => "monotonicity",
            CheckKind::Collapse => "collapse",
            CheckKind::Constants => "constants",
        }
    }

    fn needs_potential(self) -> bool {
        matches!(self, CheckKind::Domination | CheckKind::Monotonicity)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Root-finding tolerance on `√E`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default)]
    pub checks: Vec<CheckKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domination: Option<DominationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotonicity: Option<MonotonicitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collapse: Option<CollapseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    /// `x,U` samples, relative to the campaign file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    /// `[x, mass]` pairs.
    pub atoms: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub panels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_per_panel: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DominationSpec {
    /// Levels to check; all of them when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    #[serde(default)]
    pub energy: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MonotonicitySpec {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_atoms")]
    pub atoms: usize,
    #[serde(default = "default_density_cap")]
    pub density_cap: f64,
}

fn default_trials() -> usize {
    16
}

fn default_atoms() -> usize {
    3
}

fn default_density_cap() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseSpec {
    #[serde(default = "default_collapse_gamma")]
    pub gamma: f64,
    #[serde(default = "default_collapse_mass")]
    pub mass: f64,
    #[serde(default = "default_collapse_eps")]
    pub eps: Vec<f64>,
}

fn default_collapse_gamma() -> f64 {
    0.25
}

fn default_collapse_mass() -> f64 {
    2.0
}

pub fn default_collapse_eps() -> Vec<f64> {
    vec![0.4, 0.2, 0.1, 0.05, 0.025]
}

impl Default for CollapseSpec {
    fn default() -> Self {
        CollapseSpec { gamma: default_collapse_gamma(), mass: default_collapse_mass(), eps: default_collapse_eps() }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSpec {
    #[serde(default = "default_constant_gammas")]
    pub gammas: Vec<f64>,
}

pub fn default_constant_gammas() -> Vec<f64> {
    vec![0.6, 0.8, 1.0, 1.2, 1.4, 1.5]
}

impl Default for ConstantsSpec {
    fn default() -> Self {
        ConstantsSpec { gammas: default_constant_gammas() }
    }
}

/// What a job computes a spectrum for. Few of these exist, so the size gap
/// between variants does not matter.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Target {
    Potential { u: Potential, grid: Grid },
    Measure(AtomicMeasure),
}

/// A validated job, ready to run.
#[derive(Debug, Clone)]
pub struct Job {
    pub name: String,
    pub spec: JobSpec,
    pub target: Target,
    pub tol: f64,
    pub checks: Vec<CheckKind>,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub campaign: Campaign,
    pub jobs: Vec<Job>,
    pub json_path: PathBuf,
    pub csv_path: Option<PathBuf>,
}

pub fn load(path: &Path) -> Result<Loaded, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse(&text, base)
}

/// Parses and validates a campaign; relative paths resolve against `base`.
pub fn parse(text: &str, base: &Path) -> Result<Loaded, Error> {
    let campaign: Campaign = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let jobs = campaign
        .jobs
        .iter()
        .enumerate()
        .map(|(i, spec)| resolve(i, spec, base))
        .collect::<Result<Vec<_>, _>>()?;
    let json_path = base.join(&campaign.output.path);
    let csv_path = campaign.output.csv.as_ref().map(|p| base.join(p));
    Ok(Loaded { campaign, jobs, json_path, csv_path })
}

fn bad(key: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Config { key: key.into(), msg: msg.into() }
}

fn positive(key: &str, v: f64) -> Result<(), Error> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be positive, got {v}")))
    }
}

fn resolve(i: usize, spec: &JobSpec, base: &Path) -> Result<Job, Error> {
    let key = |k: &str| format!("jobs[{i}].{k}");
    let tol = spec.tol.unwrap_or(DEFAULT_TOL);
    positive(&key("tol"), tol)?;
    if tol >= 1e-2 {
        return Err(bad(key("tol"), format!("must be below 1e-2, got {tol}")));
    }
    let target = match (&spec.potential, &spec.measure) {
        (Some(p), None) => resolve_potential(&key, p, spec.grid.as_ref(), base)?,
        (None, Some(m)) => {
            if spec.grid.is_some() {
                return Err(bad(key("grid"), "measure jobs are solved exactly and take no grid"));
            }
            if m.atoms.is_empty() {
                return Err(bad(key("measure.atoms"), "needs at least one atom"));
            }
            for (j, a) in m.atoms.iter().enumerate() {
                positive(&key(&format!("measure.atoms[{j}][1]")), a[1])?;
            }
            let nu = AtomicMeasure::new(m.atoms.iter().map(|a| (a[0], a[1])).collect())
                .map_err(|e| bad(key("measure.atoms"), e.to_string()))?;
            Target::Measure(nu)
        }
        (Some(_), Some(_)) => return Err(bad(key("measure"), "a job has either `potential` or `measure`, not both")),
        (None, None) => return Err(bad(key("potential"), "a job needs `potential` or `measure`")),
    };
    let mut checks = spec.checks.clone();
    checks.sort();
    checks.dedup();
    if matches!(target, Target::Measure(_)) {
        if let Some(c) = checks.iter().find(|c| c.needs_potential()) {
            return Err(bad(key("checks"), format!("`{}` needs a potential, not a measure", c.as_str())));
        }
    }
    if let Some(d) = &spec.domination {
        if !(d.energy >= 0.0 && d.energy.is_finite()) {
            return Err(bad(key("domination.energy"), format!("must be non-negative, got {}", d.energy)));
        }
        if let Some(levels) = &d.levels {
            if levels.contains(&0) {
                return Err(bad(key("domination.levels"), "levels are numbered from 1"));
            }
        }
    }
    if let Some(m) = &spec.monotonicity {
        if m.trials == 0 {
            return Err(bad(key("monotonicity.trials"), "must be at least 1"));
        }
        if !(m.density_cap >= 0.0 && m.density_cap.is_finite()) {
            return Err(bad(key("monotonicity.density_cap"), format!("must be non-negative, got {}", m.density_cap)));
        }
    }
    if let Some(c) = &spec.collapse {
        if !(c.gamma >= 0.0 && c.gamma < 0.5) {
            return Err(bad(key("collapse.gamma"), format!("must lie in [0, 1/2), got {}", c.gamma)));
        }
        positive(&key("collapse.mass"), c.mass)?;
        if c.eps.len() < 2 || c.eps[0] <= 0.0 || c.eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(bad(key("collapse.eps"), "must be at least two positive, strictly decreasing values"));
        }
    }
    if let Some(c) = &spec.constants {
        if let Some(g) = c.gammas.iter().find(|&&g| !(g > 0.5 && g.is_finite())) {
            return Err(bad(key("constants.gammas"), format!("every gamma must exceed 1/2, got {g}")));
        }
    }
    Ok(Job { name: spec.name.clone().unwrap_or_else(|| format!("job{i}")), spec: spec.clone(), target, tol, checks })
}

fn resolve_potential(
    key: &dyn Fn(&str) -> String,
    p: &PotentialSpec,
    grid: Option<&GridSpec>,
    base: &Path,
) -> Result<Target, Error> {
    let u = match (&p.family, &p.csv) {
        (Some(family), None) => {
            for (k, v) in &p.params {
                if !v.is_finite() {
                    return Err(bad(key(&format!("potential.params.{k}")), "must be finite"));
                }
            }
            let params: Vec<(&str, f64)> = p.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            make_family(family, &params).map_err(|e| bad(key("potential"), e.to_string()))?
        }
        (None, Some(csv)) => {
            if !p.params.is_empty() {
                return Err(bad(key("potential.params"), "CSV potentials take no parameters"));
            }
            csv_import::read_potential(&base.join(csv)).map_err(|e| bad(key("potential.csv"), e.to_string()))?
        }
        _ => return Err(bad(key("potential"), "needs exactly one of `family` or `csv`")),
    };
    let g = grid.cloned().unwrap_or(GridSpec { domain: None, panels: None, nodes_per_panel: None });
    let domain = match g.domain {
        Some([lo, hi]) => {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(bad(key("grid.domain"), format!("needs lo < hi, got [{lo}, {hi}]")));
            }
            let d = Interval::new(lo, hi);
            if !u.is_zero() && !d.covers(&u.support()) {
                let s = u.support();
                return Err(bad(key("grid.domain"), format!("must cover the support [{}, {}]", s.lo, s.hi)));
            }
            d
        }
        None => u.support(),
    };
    let panels = g.panels.unwrap_or(DEFAULT_PANELS);
    let npp = g.nodes_per_panel.unwrap_or(DEFAULT_NODES_PER_PANEL);
    if panels == 0 {
        return Err(bad(key("grid.panels"), "must be at least 1"));
    }
    if !(2..=64).contains(&npp) {
        return Err(bad(key("grid.nodes_per_panel"), format!("must lie in 2..=64, got {npp}")));
    }
    if panels * npp > 4000 {
        return Err(bad(key("grid"), format!("{} nodes is more than the 4000 supported", panels * npp)));
    }
    let grid = build_grid(domain, panels, npp).map_err(|e| bad(key("grid"), e.to_string()))?;
    Ok(Target::Potential { u, grid })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_err(text: &str) -> String {
        parse(text, Path::new(".")).unwrap_err().to_string()
    }

    #[test]
    fn minimal_campaign() {
        let l = parse("[output]\npath = \"r.json\"\n", Path::new("/tmp")).unwrap();
        assert!(l.jobs.is_empty());
        assert_eq!(l.json_path, Path::new("/tmp/r.json"));
    }

    #[test]
    fn errors_name_the_key() {
        let head = "[output]\npath = \"r.json\"\n[[jobs]]\n";
        let e = parse_err(&format!("{head}tol = -1.0\npotential = {{ family = \"sech2\", params = {{ lambda = 1.0 }} }}\n"));
        assert!(e.contains("jobs[0].tol"), "{e}");
        let e = parse_err(&format!("{head}tols = 1e-9\n"));
        assert!(e.contains("tols"), "{e}");
        let e = parse_err(&format!("{head}measure = {{ atoms = [[0.0, 1.0]] }}\nchecks = [\"domination\"]\n"));
        assert!(e.contains("jobs[0].checks"), "{e}");
        let e = parse_err(&format!("{head}potential = {{ family = \"sech2\", params = {{ lamda = 1.0 }} }}\n"));
        assert!(e.contains("jobs[0].potential") && e.contains("lamda"), "{e}");
        let e = parse_err(&format!("{head}checks = [\"sharp\"]\n"));
        assert!(e.contains("sharp"), "{e}");
    }

    #[test]
    fn grid_must_cover_support() {
        let text = "[output]\npath = \"r.json\"\n[[jobs]]\npotential = { family = \"square_well\", params = { depth = 1.0, width = 4.0 } }\ngrid = { domain = [-1.0, 1.0] }\n";
        assert!(parse_err(text).contains("jobs[0].grid.domain"));
    }
}
