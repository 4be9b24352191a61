//! Running campaigns.

use bslab_core::bound_states::{solve_atomic, solve_nystrom, Spectrum};
use bslab_core::kernels::KernelSpec;
use bslab_core::lieb_thirring::{
    check_basic_equality, check_basic_equality_atomic, check_domination, gamma_collapse_demo, lt_constants,
    sharp_half_report, Source,
};
use bslab_core::monotonicity::{compare_pair, random_kappa_pair, KappaPair};
use bslab_core::numerics::{eigvalsh_desc, Grid};
use bslab_core::potentials::Potential;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{CheckKind, CollapseSpec, ConstantsSpec, Job, Loaded, Target};
use crate::report::{render_csv, render_json, write_atomic, CheckReport, JobReport, Meta, Report, Status};
use crate::Error;

/// Process exit codes.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const VIOLATION: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const INCONCLUSIVE: u8 = 3;
}

const SHARP_HALF_REF: &str = "sharp Lieb-Thirring inequality for gamma = 1/2 in one dimension";
const BASIC_REF: &str = "eigenvalue identity lambda_i(L_sqrt(E_i)) = 2 sqrt(E_i) (Birman-Schwinger)";
const DOMINATION_REF: &str = "domination of the partial sums by the kernel spectrum at a lower energy";
const MONOTONE_REF: &str = "monotonicity of partial eigenvalue sums in the kernel measure";
const COLLAPSE_REF: &str = "failure of the bound for gamma < 1/2 via approximate delta functions";
const CONSTANTS_REF: &str = "classical and conjectured Lieb-Thirring constants";

/// Worker count from `BSLAB_THREADS`; `None` means rayon's default.
pub fn thread_count() -> Result<Option<usize>, Error> {
    match std::env::var("BSLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config { key: "BSLAB_THREADS".into(), msg: format!("must be a positive integer, got `{v}`") }),
        },
    }
}

/// Runs `f` inside a pool sized by `BSLAB_THREADS`.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, Error> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| Error::Config { key: "BSLAB_THREADS".into(), msg: e.to_string() })?;
    Ok(pool.install(f))
}

pub fn run(loaded: &Loaded) -> Result<Report, Error> {
    let seed = loaded.campaign.seed;
    let jobs = with_pool(|| loaded.jobs.par_iter().enumerate().map(|(i, j)| run_job(j, job_seed(seed, i))).collect())?;
    let timestamp = loaded.campaign.output.timestamp.then(|| chrono::Utc::now().to_rfc3339());
    Ok(Report { meta: Meta { version: env!("CARGO_PKG_VERSION").into(), seed, timestamp }, jobs })
}

/// Runs a campaign and writes its reports; returns the exit code.
pub fn verify(loaded: &Loaded) -> Result<u8, Error> {
    let report = run(loaded)?;
    let json_text = render_json(&report);
    let csv_text = loaded.csv_path.as_ref().map(|_| render_csv(&report));
    let mut files = vec![(loaded.json_path.as_path(), json_text.as_str())];
    if let (Some(p), Some(t)) = (&loaded.csv_path, &csv_text) {
        files.push((p.as_path(), t.as_str()));
    }
    write_atomic(&files)?;
    Ok(exit_code(&report))
}

pub fn exit_code(report: &Report) -> u8 {
    if report.jobs.iter().any(|j| j.status == Status::Fail) {
        exit::VIOLATION
    } else if report.jobs.iter().any(|j| j.status == Status::Inconclusive) {
        exit::INCONCLUSIVE
    } else {
        exit::PASS
    }
}

/// Independent, reproducible seed per job.
fn job_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub fn solve_target(target: &Target, tol: f64) -> bslab_core::Result<Spectrum> {
    match target {
        Target::Potential { u, grid } => solve_nystrom(u, grid, tol),
        Target::Measure(nu) => solve_atomic(nu, tol),
    }
}

fn run_job(job: &Job, seed: u64) -> JobReport {
    let mut report = JobReport {
        name: job.name.clone(),
        spec: job.spec.clone(),
        status: Status::Pass,
        method: None,
        near_threshold: false,
        spectrum: Vec::new(),
        checks: Vec::new(),
        errors: Vec::new(),
    };
    let s = match solve_target(&job.target, job.tol) {
        Ok(s) => s,
        Err(e) => {
            report.status = Status::Inconclusive;
            report.errors.push(format!("solve: {e}"));
            return report;
        }
    };
    report.method = Some(s.method.as_str().into());
    report.near_threshold = s.near_threshold;
    report.spectrum = s.energies.clone();
    for &kind in &job.checks {
        match run_check(job, kind, &s, seed) {
            Ok(mut checks) => report.checks.append(&mut checks),
            Err(e) => report.errors.push(format!("{}: {e}", kind.as_str())),
        }
    }
    report.status = if report.checks.iter().any(|c| !c.pass) {
        Status::Fail
    } else if s.near_threshold || !report.errors.is_empty() {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    report
}

fn run_check(job: &Job, kind: CheckKind, s: &Spectrum, seed: u64) -> bslab_core::Result<Vec<CheckReport>> {
    match kind {
        CheckKind::SharpHalf => Ok(vec![sharp_half(&job.target, s)]),
        CheckKind::BasicEquality => basic_equality(&job.target, s).map(|c| vec![c]),
        CheckKind::Domination => {
            let Target::Potential { u, grid } = &job.target else { unreachable!("rejected by validation") };
            domination(job, u, grid, s)
        }
        CheckKind::Monotonicity => {
            let Target::Potential { u, grid } = &job.target else { unreachable!("rejected by validation") };
            monotonicity(job, u, grid, seed).map(|c| vec![c])
        }
        CheckKind::Collapse => collapse(&job.spec.collapse.clone().unwrap_or_default()).map(|c| vec![c]),
        CheckKind::Constants => constants(&job.spec.constants.clone().unwrap_or_default()).map(|c| vec![c]),
    }
}

fn sharp_half(target: &Target, s: &Spectrum) -> CheckReport {
    let (src, measure_case) = match target {
        Target::Potential { u, .. } => (Source::Potential(u), false),
        Target::Measure(nu) => (Source::Measure(nu), nu.is_single_dirac()),
    };
    let r = sharp_half_report(src, s);
    let (claim, status) = if measure_case {
        ("sum of sqrt(E_i) equals half the mass for a single Dirac measure", "equality (measure case)")
    } else {
        ("sum of sqrt(E_i) is strictly below half the mass", "strict")
    };
    let status = if r.pass { status.to_string() } else if measure_case { "not an equality".into() } else { "not strict".into() };
    let mut c = CheckReport::new("sharp_half", claim, SHARP_HALF_REF, r.lhs, 0.5 * r.rhs_mass, r.tol, r.pass);
    c.slack = r.slack;
    c.ratio = Some(r.ratio);
    c.status = Some(status);
    c.detail = Some(json!({ "provenance": r.provenance }));
    c
}

fn basic_equality(target: &Target, s: &Spectrum) -> bslab_core::Result<CheckReport> {
    let residuals = match target {
        Target::Potential { u, grid } => check_basic_equality(u, grid, s)?,
        Target::Measure(nu) => check_basic_equality_atomic(nu, s)?,
    };
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    let tol = 1e-6 * s.energies.first().map_or(1.0, |e| e.sqrt());
    let mut c = CheckReport::new(
        "basic_equality",
        "|lambda_i(L_sqrt(E_i)) - 2 sqrt(E_i)| vanishes at every level",
        BASIC_REF,
        worst,
        0.0,
        tol,
        worst <= tol,
    );
    c.detail = Some(json!({ "residuals": residuals }));
    Ok(c)
}

fn domination(job: &Job, u: &Potential, grid: &Grid, s: &Spectrum) -> bslab_core::Result<Vec<CheckReport>> {
    let spec = job.spec.domination.clone();
    let energy = spec.as_ref().map_or(0.0, |d| d.energy);
    let levels: Vec<usize> = match spec.and_then(|d| d.levels) {
        Some(l) => l.into_iter().filter(|&n| n <= s.len()).collect(),
        None => (1..=s.len()).collect(),
    };
    levels
        .into_iter()
        .map(|n| {
            // the bound is stated for E in [0, E_n]
            let e = energy.min(s.level(n));
            let d = check_domination(u, grid, s, n, e)?;
            let mut c = CheckReport::new(
                format!("domination[n={n}]"),
                "2 sum_{i<=n} sqrt(E_i) <= S_n(L_sqrt(E)) + lambda_1(L_sqrt(E_1)) - lambda_1(L_sqrt(E_2))",
                DOMINATION_REF,
                d.lhs,
                d.rhs,
                -d.tol,
                d.pass,
            );
            c.slack = d.slack;
            c.n = Some(n);
            c.energy = Some(e);
            Ok(c)
        })
        .collect()
}

fn monotonicity(job: &Job, u: &Potential, grid: &Grid, seed: u64) -> bslab_core::Result<CheckReport> {
    let spec = job.spec.monotonicity.clone().unwrap_or(crate::config::MonotonicitySpec {
        trials: 16,
        atoms: 3,
        density_cap: 1.0,
    });
    let n_max = grid.len().min(20);
    // (relative slack, seed, n, pair)
    let mut worst: Option<(f64, u64, usize, KappaPair)> = None;
    let (mut all_pass, mut max_trace, mut increases) = (true, 0.0f64, 0usize);
    for t in 0..spec.trials as u64 {
        let trial_seed = seed.wrapping_add(t);
        let pair = random_kappa_pair(trial_seed, spec.atoms, spec.density_cap)?;
        let c = compare_pair(u, grid, &pair, n_max)?;
        let (n, diff) = c.diffs.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).expect("n_max >= 1");
        let strict_ok = !pair.delta_charges(u, grid) || c.lambda1_drop > 0.0;
        all_pass &= diff >= -1e-9 * c.s1 && c.trace_diff <= 1e-10 * c.s1.max(1.0) && strict_ok;
        max_trace = max_trace.max(c.trace_diff);
        increases += c.individual_increase.is_some() as usize;
        let rel = diff / c.s1;
        if worst.as_ref().is_none_or(|w| rel < w.0) {
            worst = Some((rel, trial_seed, n, pair));
        }
    }
    let (_, wseed, n, pair) = worst.expect("at least one trial");
    let (base, dominated) = partial_sums(u, grid, &pair, n)?;
    let s1 = partial_sums(u, grid, &pair, 1)?.0;
    let mut c = CheckReport::new(
        "monotonicity",
        "S_n(kappa + delta) <= S_n(kappa) for every n, with equal traces",
        MONOTONE_REF,
        dominated,
        base,
        1e-9 * s1,
        all_pass,
    );
    c.n = Some(n);
    c.detail = Some(json!({
        "trials": spec.trials,
        "worst_seed": wseed,
        "max_trace_diff": max_trace,
        "trials_with_individual_increase": increases,
    }));
    Ok(c)
}

/// `(S_n(κ), S_n(κ + δ))`.
fn partial_sums(u: &Potential, grid: &Grid, p: &KappaPair, n: usize) -> bslab_core::Result<(f64, f64)> {
    let sum = |k: &bslab_core::potentials::KappaMeasure| -> bslab_core::Result<f64> {
        let ev = eigvalsh_desc(&bslab_core::kernels::build_kernel(u, grid, &KernelSpec::Kappa(k.clone()))?)?;
        Ok(ev[..n].iter().sum())
    };
    Ok((sum(&p.base)?, sum(&p.dominating)?))
}

pub fn collapse(spec: &CollapseSpec) -> bslab_core::Result<CheckReport> {
    let t = gamma_collapse_demo(spec.gamma, spec.mass, &spec.eps)?;
    let first = t.rows[0].ratio;
    let last = t.rows[t.rows.len() - 1].ratio;
    let mut c = CheckReport::new(
        "collapse",
        "sum E_i^gamma / int U_eps^(gamma+1/2) increases at every step as eps shrinks",
        COLLAPSE_REF,
        first,
        last,
        0.0,
        t.increasing,
    );
    c.ratio = Some(t.growth);
    c.detail = Some(json!({
        "gamma": t.gamma,
        "mass": t.mass,
        "rows": t.rows.iter().map(|r| json!({
            "eps": r.eps, "levels": r.levels, "moment": r.moment, "rhs": r.rhs, "ratio": r.ratio,
        })).collect::<Vec<_>>(),
    }));
    Ok(c)
}

pub fn constants(spec: &ConstantsSpec) -> bslab_core::Result<CheckReport> {
    let mut rows = Vec::with_capacity(spec.gammas.len());
    let mut worst = 0.0f64;
    for &g in &spec.gammas {
        let k = lt_constants(g)?;
        let (a, b) = (k.conjectured.unwrap_or(f64::NAN), k.conjectured_alt.unwrap_or(f64::NAN));
        let rel = (a - b).abs() / a.abs();
        worst = if rel.is_nan() { f64::INFINITY } else { worst.max(rel) };
        rows.push(json!({ "gamma": g, "classical": k.classical, "conjectured": a, "conjectured_alt": b }));
    }
    let mut c = CheckReport::new(
        "constants",
        "the two closed forms of the conjectured constant agree",
        CONSTANTS_REF,
        worst,
        0.0,
        1e-12,
        worst <= 1e-12,
    );
    c.slack = -worst;
    c.detail = Some(json!({ "rows": rows }));
    Ok(c)
}
