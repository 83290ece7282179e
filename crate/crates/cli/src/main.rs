//! `rbundle` — solve, certify, attack, and export robustly optimal
//! bundled-sales instances described by a TOML config.
//!
//! Exit codes: 0 success, 1 a certification check failed, 2 bad
//! config/usage, 3 solver non-convergence.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use robust_bundling::adversary::{
    corner_transfer, flattened_tail, lp_feasible_distribution, random_support_near_curve,
    tail_derivative_check, FlattenedTail, LpOutcome, DEFAULT_BINS,
};
use robust_bundling::curve::CurveDistribution;
use robust_bundling::domain::{solve_domain, DomainSolution};
use robust_bundling::emit;
use robust_bundling::error::Error as CoreError;
use robust_bundling::mechanism::{build_domain_menu, build_menu, DirectMechanism};
use robust_bundling::saddle::{minimize_guarantee, SaddleSolution};
use robust_bundling::verifier::{
    certify_domain, certify_saddle, seller_menu_sweep, MenuFamily, ValueDist,
};

use config::{ProblemKind, RunConfig};

/// Failure modes, ordered by exit code.
#[derive(Debug)]
pub enum Failure {
    /// A certification check failed (exit 1).
    ChecksFailed(String),
    /// Bad config, missing file, or invalid usage (exit 2).
    Usage(String),
    /// The solver did not converge (exit 3).
    Solver(String),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonConvergence(_) | CoreError::NewtonDivergence(_) => {
                Failure::Solver(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "rbundle",
    version,
    about = "Robustly optimal bundled sales under moment ambiguity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the instance in the config and write the solution file.
    Solve(CommonArgs),
    /// Solve a capped-domain instance (kind = "domain" required).
    DomainSolve(CommonArgs),
    /// Certify the saddle property of a solved instance.
    Verify(VerifyArgs),
    /// Generate nature-side deviation distributions.
    Adversary(AdversaryArgs),
    /// Export figure data as CSV.
    PlotData(PlotArgs),
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Instance description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Solution file; defaults to <out>/solution.json.
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config trial count.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryKind {
    /// Mass transfer to the axis corners (single-bundle instances).
    #[value(alias = "corner_transfer")]
    CornerTransfer,
    /// Flattened driving cdf (separate-sales instances).
    #[value(alias = "flattened_tail")]
    FlattenedTail,
    /// LP feasibility trials on random supports.
    Lp,
}

#[derive(clap::Args)]
struct AdversaryArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    what: AdversaryKind,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Perturbation mass; searched automatically when omitted.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    /// Support locus (x, v_1..v_n) of the worst case.
    Support,
    /// Payment surface on a grid (two-item instances).
    #[value(alias = "revenue_surface")]
    RevenueSurface,
    /// Per-bundle price densities.
    #[value(alias = "price_density")]
    PriceDensity,
    /// Grand-bundle posted-price profit, worst case and perturbed.
    #[value(alias = "bundling_profit")]
    BundlingProfit,
}

#[derive(clap::Args)]
struct PlotArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    what: PlotKind,
}

/// Solution file: tagged union of the two problem kinds.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SolutionFile {
    Moment(SaddleSolution),
    Domain(DomainSolution),
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::ChecksFailed(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run() -> Result<(), Failure> {
    match Cli::parse().command {
        Command::Solve(args) => cmd_solve(&args, None),
        Command::DomainSolve(args) => cmd_solve(&args, Some(ProblemKind::Domain)),
        Command::Verify(args) => cmd_verify(&args),
        Command::Adversary(args) => cmd_adversary(&args),
        Command::PlotData(args) => cmd_plot(&args),
    }
}

fn read_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    RunConfig::parse(&text)
}

fn out_dir(cfg: &RunConfig, flag: &Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = flag
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Usage(format!("serialize: {e}")))?;
    text.push('\n');
    fs::write(path, text)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load_solution(path: &Path) -> Result<SolutionFile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read solution {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("solution {}: {e}", path.display())))
}

fn solution_path(dir: &Path, flag: &Option<PathBuf>) -> PathBuf {
    flag.clone().unwrap_or_else(|| dir.join("solution.json"))
}

fn cmd_solve(args: &CommonArgs, require: Option<ProblemKind>) -> Result<(), Failure> {
    let cfg = read_config(&args.config)?;
    if let Some(kind) = require {
        if cfg.kind != kind {
            return Err(Failure::Usage(
                "domain-solve requires kind = \"domain\" in the config".into(),
            ));
        }
    }
    let dir = out_dir(&cfg, &args.out)?;
    let path = dir.join("solution.json");
    let guarantee = match cfg.kind {
        ProblemKind::Moment => {
            let problem = cfg.moment_problem()?;
            let sol = minimize_guarantee(&problem)?;
            let g = sol.guarantee;
            write_json(&path, &SolutionFile::Moment(sol))?;
            g
        }
        ProblemKind::Domain => {
            let problem = cfg.domain_problem()?;
            let sol = solve_domain(&problem)?;
            let g = sol.guarantee;
            write_json(&path, &SolutionFile::Domain(sol))?;
            g
        }
    };
    println!(
        "guarantee {guarantee:.12}; solution written to {}",
        path.display()
    );
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let cfg = read_config(&args.config)?;
    let dir = out_dir(&cfg, &args.out)?;
    let sol = load_solution(&solution_path(&dir, &args.solution))?;
    let opts = cfg.certify_options(args.seed, args.trials);
    let report = match (&cfg.kind, &sol) {
        (ProblemKind::Moment, SolutionFile::Moment(sol)) => {
            certify_saddle(&cfg.moment_problem()?, sol, &opts)?
        }
        (ProblemKind::Domain, SolutionFile::Domain(sol)) => {
            certify_domain(&cfg.domain_problem()?, sol, &opts)?
        }
        _ => {
            return Err(Failure::Usage(
                "solution kind does not match the config kind".into(),
            ))
        }
    };
    for c in &report.checks {
        println!("{} {}", if c.passed { "pass" } else { "FAIL" }, c.name);
    }
    let path = dir.join("report.json");
    write_json(&path, &report)?;
    println!("report written to {}", path.display());
    if report.passed {
        Ok(())
    } else {
        let names: Vec<&str> = report
            .failed_checks()
            .iter()
            .map(|c| c.name.as_str())
            .collect();
        Err(Failure::ChecksFailed(names.join(", ")))
    }
}

fn moment_solution(sol: SolutionFile) -> Result<SaddleSolution, Failure> {
    match sol {
        SolutionFile::Moment(s) => Ok(s),
        SolutionFile::Domain(_) => Err(Failure::Usage(
            "this command needs a moment-ambiguity solution".into(),
        )),
    }
}

fn write_csv<F>(path: &Path, write: F) -> Result<(), Failure>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| Failure::Usage(format!("csv: {e}")))?;
    fs::write(path, buf)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn cmd_adversary(args: &AdversaryArgs) -> Result<(), Failure> {
    let cfg = read_config(&args.config)?;
    let dir = out_dir(&cfg, &args.out)?;
    let sol = moment_solution(load_solution(&solution_path(&dir, &args.solution))?)?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let trials = args.trials.unwrap_or(cfg.trials);
    let curve = CurveDistribution::from_solution(&sol);
    let mech = DirectMechanism::from_menu(build_menu(&sol));

    match args.what {
        AdversaryKind::CornerTransfer => {
            let epsilon = args.epsilon.unwrap_or(0.01);
            let dist = corner_transfer(&curve, epsilon, DEFAULT_BINS)?;
            write_csv(&dir.join("corner_transfer.csv"), |w| {
                emit::write_discrete_csv(w, &dist)
            })?;
            let sweep = seller_menu_sweep(
                &ValueDist::Discrete(&dist),
                MenuFamily::DeterministicItemPrices,
            );
            let summary = serde_json::json!({
                "epsilon": epsilon,
                "guarantee": sol.guarantee,
                "separate_sales_best": sweep.best_value,
                "separate_sales_gap": sol.guarantee - sweep.best_value,
                "menu_revenue": mech.revenue_discrete(&dist),
            });
            write_json(&dir.join("corner_transfer_summary.json"), &summary)?;
            println!(
                "corner transfer: separate sales reach {:.9} vs guarantee {:.9}",
                sweep.best_value, sol.guarantee
            );
        }
        AdversaryKind::FlattenedTail => {
            let (tail, gap) = pick_flattened_tail(&sol, args.epsilon)?;
            let dist = tail.discretize(DEFAULT_BINS);
            write_csv(&dir.join("flattened_tail.csv"), |w| {
                emit::write_discrete_csv(w, &dist)
            })?;
            let derivative = tail_derivative_check(&sol, 1e-4)?;
            let summary = serde_json::json!({
                "epsilon": tail.epsilon,
                "flatten_at": tail.flatten_at,
                "items": tail.items,
                "moment_residual": tail.moment_residual(),
                "guarantee": sol.guarantee,
                "bundling_gap": gap,
                "menu_revenue": tail.expect(|v| mech.payment(v)),
                "derivative_check": derivative,
            });
            write_json(&dir.join("flattened_tail_summary.json"), &summary)?;
            println!(
                "flattened tail at epsilon {:.1e}: pure bundling falls short by {gap:.3e}",
                tail.epsilon
            );
        }
        AdversaryKind::Lp => {
            let mut feasible = 0usize;
            let mut worst: Option<(f64, robust_bundling::curve::DiscreteDistribution)> = None;
            for t in 0..trials {
                let support = random_support_near_curve(
                    &curve,
                    30,
                    robust_bundling::adversary::derive_seed(seed, t as u64),
                );
                if let LpOutcome::Feasible(dist) = lp_feasible_distribution(
                    &support,
                    &sol.chosen_means,
                    Some((&sol.partition, &sol.kernels, &sol.chosen_dispersions)),
                )? {
                    feasible += 1;
                    let rev = mech.revenue_discrete(&dist);
                    if worst.as_ref().is_none_or(|(r, _)| rev < *r) {
                        worst = Some((rev, dist));
                    }
                }
            }
            let (min_revenue, dist) =
                worst.ok_or_else(|| Failure::Usage("no feasible LP distribution found".into()))?;
            write_csv(&dir.join("lp_worst.csv"), |w| {
                emit::write_discrete_csv(w, &dist)
            })?;
            let summary = serde_json::json!({
                "trials": trials,
                "feasible": feasible,
                "min_revenue": min_revenue,
                "guarantee": sol.guarantee,
            });
            write_json(&dir.join("lp_summary.json"), &summary)?;
            println!("lp sweep: {feasible}/{trials} feasible, min revenue {min_revenue:.9}");
        }
    }
    Ok(())
}

/// Uses the given epsilon, or searches decreasing magnitudes until the
/// pure-bundling shortfall is reportable (> 1e-6).
fn pick_flattened_tail(
    sol: &SaddleSolution,
    epsilon: Option<f64>,
) -> Result<(FlattenedTail, f64), Failure> {
    let gap_of = |tail: &FlattenedTail| {
        let sweep = seller_menu_sweep(
            &ValueDist::Flattened(tail),
            MenuFamily::DeterministicBundlePrices,
        );
        sol.guarantee - sweep.best_value
    };
    if let Some(eps) = epsilon {
        let tail = flattened_tail(sol, eps, None)?;
        let gap = gap_of(&tail);
        return Ok((tail, gap));
    }
    let mut last: Option<(FlattenedTail, f64)> = None;
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let tail = flattened_tail(sol, eps, None)?;
        let gap = gap_of(&tail);
        if gap > 1e-6 {
            return Ok((tail, gap));
        }
        last = Some((tail, gap));
    }
    last.ok_or_else(|| Failure::Usage("no epsilon candidate applied".into()))
}

fn cmd_plot(args: &PlotArgs) -> Result<(), Failure> {
    let cfg = read_config(&args.config)?;
    let dir = out_dir(&cfg, &args.out)?;
    let sol = load_solution(&solution_path(&dir, &args.solution))?;
    let (curve, mech, moment_sol) = match sol {
        SolutionFile::Moment(s) => (
            CurveDistribution::from_solution(&s),
            DirectMechanism::from_menu(build_menu(&s)),
            Some(s),
        ),
        SolutionFile::Domain(s) => (
            CurveDistribution::from_domain(&s),
            DirectMechanism::from_menu(build_domain_menu(&s)),
            None,
        ),
    };
    match args.what {
        PlotKind::Support => {
            let path = dir.join("support.csv");
            write_csv(&path, |w| emit::write_support_csv(w, &curve, 512))?;
            println!("support locus written to {}", path.display());
        }
        PlotKind::PriceDensity => {
            let path = dir.join("price_density.csv");
            write_csv(&path, |w| emit::write_price_density_csv(w, &mech, 512))?;
            println!("price densities written to {}", path.display());
        }
        PlotKind::RevenueSurface => {
            if curve.n() != 2 {
                return Err(Failure::Usage(format!(
                    "revenue_surface requires exactly two items, got {}",
                    curve.n()
                )));
            }
            let top = curve.value_at(curve.top_parameter());
            let path = dir.join("revenue_surface.csv");
            write_csv(&path, |w| {
                emit::write_revenue_surface_csv(w, &mech, (1.2 * top[0], 1.2 * top[1]), 100)
            })?;
            println!("payment surface written to {}", path.display());
        }
        PlotKind::BundlingProfit => {
            // The perturbed column applies when the instance admits the
            // flattened-tail deviation (separate sales, distinct ratios).
            let tail = match &moment_sol {
                Some(s) if s.partition.iter().all(|k| k.len() == 1) && s.n() >= 2 => {
                    flattened_tail(s, 0.01, None).ok()
                }
                _ => None,
            };
            let path = dir.join("bundling_profit.csv");
            let steps = (1.2 * curve.grand_total_at(curve.top_parameter()) / 1e-3) as usize;
            write_csv(&path, |w| {
                emit::write_bundling_profit_csv(w, &curve, tail.as_ref(), steps)
            })?;
            println!("bundling profit written to {}", path.display());
        }
    }
    Ok(())
}
