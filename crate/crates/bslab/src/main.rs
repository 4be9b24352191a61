#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bslab::campaign::{self, exit, solve_target};
use bslab::config::{self, CollapseSpec, ConstantsSpec, Target};
use bslab::report::{num, write_atomic};
use bslab::{csv_import, json, Error};
use bslab_core::bound_states::{fd_domain, solve_fd_oracle};
use bslab_core::lieb_thirring::lt_constants;
use bslab_core::monotonicity::run_suite;
use bslab_core::numerics::build_grid;
use bslab_core::potentials::make_family;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bslab", version, about = "Bound states, Birman-Schwinger kernels and Lieb-Thirring checks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bound-state energies of one potential, as JSON.
    Solve(SolveArgs),
    /// Run a campaign file and write its reports.
    Verify {
        config: PathBuf,
    },
    /// Randomised kappa-monotonicity suite; one CSV row per trial.
    Prop {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moment ratios of mollified Dirac potentials for gamma < 1/2.
    Collapse {
        #[arg(long, default_value_t = 0.25)]
        gamma: f64,
        #[arg(long, default_value_t = 2.0)]
        mass: f64,
        /// Comma-separated, strictly decreasing.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Classical and conjectured constants over a gamma range, as CSV.
    Constants {
        #[arg(long, default_value_t = 0.5)]
        from: f64,
        #[arg(long, default_value_t = 3.0)]
        to: f64,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Nystrom,
    Fd,
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Potential family: zero, sech2, square_well, gaussian, conjectured.
    #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
    family: Option<String>,
    /// Family parameter as key=value; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// `x,U` samples instead of a family.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = config::DEFAULT_PANELS)]
    panels: usize,
    #[arg(long, default_value_t = config::DEFAULT_NODES_PER_PANEL)]
    nodes_per_panel: usize,
    #[arg(long, default_value_t = config::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = SolveMethod::Nystrom)]
    method: SolveMethod,
    /// Finite-difference step (fd only).
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write_atomic(&[(p, text)]),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(a: &SolveArgs) -> Result<u8, Error> {
    let u = match (&a.family, &a.csv) {
        (Some(f), _) => {
            let params: Vec<(&str, f64)> = a.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            make_family(f, &params)?
        }
        (None, Some(p)) => csv_import::read_potential(p)?,
        (None, None) => unreachable!("clap requires one of --family/--csv"),
    };
    let grid = build_grid(u.support(), a.panels, a.nodes_per_panel)?;
    let nystrom = solve_target(&Target::Potential { u: u.clone(), grid }, a.tol)?;
    let s = match a.method {
        SolveMethod::Nystrom => nystrom,
        SolveMethod::Fd => {
            // the weakest Nyström level decides how far the box must reach
            let e_min = nystrom.energies.last().copied().unwrap_or(1.0);
            solve_fd_oracle(&u, a.h, fd_domain(&u, 0.5 * e_min))?
        }
    };
    let out = json!({
        "potential": u.label(),
        "method": s.method.as_str(),
        "near_threshold": s.near_threshold,
        "spectrum": s.energies,
        "residuals": s.residuals,
    });
    emit(a.out.as_deref(), &json::to_string(&out).expect("spectrum serializes"))?;
    Ok(if s.near_threshold { exit::INCONCLUSIVE } else { exit::PASS })
}

fn prop(trials: usize, seed: u64, out: Option<&Path>) -> Result<u8, Error> {
    let (results, summary) = campaign::with_pool(|| run_suite(trials, seed))??;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["seed", "n_max", "min_slack"]).expect("in-memory write");
    for r in &results {
        w.write_record([r.seed.to_string(), r.n_max.to_string(), num(r.min_slack)]).expect("in-memory write");
    }
    let text = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv writes UTF-8");
    emit(out, &text)?;
    eprintln!(
        "{} trials, {} failures, worst relative slack {:e}, max trace difference {:e}, first individual increase at seed {}",
        summary.trials,
        summary.failures,
        summary.worst_relative_slack,
        summary.max_trace_diff,
        summary.increase_seed.map_or("none".into(), |s| s.to_string()),
    );
    Ok(if summary.failures == 0 { exit::PASS } else { exit::VIOLATION })
}

fn collapse(gamma: f64, mass: f64, eps: Option<Vec<f64>>) -> Result<u8, Error> {
    let spec = CollapseSpec { gamma, mass, eps: eps.unwrap_or_else(config::default_collapse_eps) };
    let c = campaign::collapse(&spec)?;
    print!("{}", json::to_string(&c).expect("check serializes"));
    Ok(if c.pass { exit::PASS } else { exit::VIOLATION })
}

fn constants(from: f64, to: f64, step: f64) -> Result<u8, Error> {
    if !(step > 0.0) || !(from >= 0.0) || !(to >= from) {
        return Err(Error::Config { key: "--step".into(), msg: "need 0 <= from <= to and step > 0".into() });
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    let werr = |e: csv::Error| Error::io(Path::new("<stdout>"), e.into());
    w.write_record(["gamma", "classical", "conjectured", "conjectured_alt"]).map_err(werr)?;
    let mut gammas = Vec::new();
    for i in 0..=n {
        let g = from + i as f64 * step;
        let k = lt_constants(g)?;
        let opt = |v: Option<f64>| v.map_or(String::new(), num);
        w.write_record([num(g), num(k.classical), opt(k.conjectured), opt(k.conjectured_alt)]).map_err(werr)?;
        if g > 0.5 {
            gammas.push(g);
        }
    }
    w.flush().map_err(|e| Error::io(Path::new("<stdout>"), e))?;
    if gammas.is_empty() {
        return Ok(exit::PASS);
    }
    let c = campaign::constants(&ConstantsSpec { gammas })?;
    Ok(if c.pass { exit::PASS } else { exit::VIOLATION })
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::Solve(a) => solve(&a),
        Cmd::Verify { config } => campaign::verify(&config::load(&config)?),
        Cmd::Prop { trials, seed, out } => prop(trials, seed, out.as_deref()),
        Cmd::Collapse { gamma, mass, eps } => collapse(gamma, mass, eps),
        Cmd::Constants { from, to, step } => constants(from, to, step),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("bslab: {e}");
            ExitCode::from(exit::CONFIG)
        }
    }
}
