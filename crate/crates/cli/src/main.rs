use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use biloc::bench::{
    default_alpha_grid, default_beta_grid, default_ratio_grid, desk_size_grid, full_size_grid, run_fixture_example,
    run_sweep, write_fixture_csv, write_sweep_csv, SweepKind, SweepSpec,
};
use biloc::choice::{rho_closed_form, rho_saa, RhoTable, ScenarioSet};
use biloc::instance::{self, generate, GeneratorParams, Instance};
use biloc::milp::{build, export_lp, parse_lp, Solution};
use biloc::oracle::{simulate, Mode, SimulationReport};
use biloc::par::Exec;
use biloc::solver::{solve, Engine, SolveOptions};

#[derive(Parser)]
#[command(name = "biloc", version, about = "Facility location and pricing under logit demand")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance as JSON.
    Gen(GenArgs),
    /// Print acceptance probabilities as CSV.
    Rho {
        instance: PathBuf,
        /// Also estimate each probability from this many scenarios.
        #[arg(long)]
        saa: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Build the linearized model and write it in LP format.
    Build {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = RhoSource::Closed)]
        rho: RhoSource,
        /// Scenarios for `--rho saa`.
        #[arg(long, default_value_t = 100_000)]
        scenarios: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Solve an LP-format model.
    Solve {
        model: PathBuf,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
        engine: EngineArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Simulate a solution's first stage over sampled scenarios.
    Simulate {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        scenarios: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep and write CSV.
    Sweep {
        #[arg(long)]
        kind: SweepKind,
        /// Sweep specification JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Use the full-scale size grid for `--kind size`.
        #[arg(long)]
        full_scale: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Solve the small two-shipper fixture under three regimes.
    Fixture {
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, default_value_t = 4)]
    facilities: usize,
    #[arg(long, default_value_t = 48)]
    customers: usize,
    #[arg(long, default_value_t = 2)]
    shippers: usize,
    #[arg(long, default_value_t = 3)]
    categories: usize,
    #[arg(long, default_value_t = 3)]
    services: usize,
    #[arg(long, default_value_t = 5)]
    prices: usize,
    #[arg(long, default_value_t = 2.0)]
    ratio: f64,
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    min_demand: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RhoSource {
    Closed,
    Saa,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    Structured,
    Generic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Reduced,
    Reallocation,
    Both,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Rho { instance, saa, seed } => rho(&instance, saa, seed),
        Command::Build { instance, rho, scenarios, seed, out } => build_model(&instance, rho, scenarios, seed, &out),
        Command::Solve { model, time_limit, workers, engine, out } => {
            solve_model(&model, time_limit, workers, engine, out.as_deref())
        }
        Command::Simulate { instance, solution, scenarios, mode, seed, out } => {
            simulate_solution(&instance, &solution, scenarios, mode, seed, out.as_deref())
        }
        Command::Sweep { kind, config, full_scale, out } => sweep(kind, config.as_deref(), full_scale, out.as_deref()),
        Command::Fixture { out } => {
            let report = run_fixture_example()?;
            write_fixture_csv(&report, output(out.as_deref())?)?;
            Ok(())
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn load_instance(path: &Path) -> Result<Instance> {
    instance::load(path).with_context(|| format!("loading instance {}", path.display()))
}

fn gen(a: GenArgs) -> Result<()> {
    let params = GeneratorParams {
        facilities: a.facilities,
        customers: a.customers,
        shippers: a.shippers,
        categories: a.categories,
        services: a.services,
        prices: a.prices,
        ratio: a.ratio,
        alpha: a.alpha,
        beta: a.beta,
        min_demand: a.min_demand,
        seed: a.seed,
        ..GeneratorParams::default()
    };
    instance::save(&generate(&params)?, &a.out)?;
    Ok(())
}

fn scenario_set(inst: &Instance, count: usize, seed: u64) -> ScenarioSet {
    if inst.choice_model.deterministic {
        ScenarioSet::deterministic(count)
    } else {
        ScenarioSet::new(count, inst.choice_model.beta, seed)
    }
}

fn rho(path: &Path, saa: Option<usize>, seed: u64) -> Result<()> {
    let inst = load_instance(path)?;
    let scenarios = saa.map(|n| scenario_set(&inst, n, seed));
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    let mut header = vec!["shipper", "category", "service", "price", "price_value", "closed_form"];
    if scenarios.is_some() {
        header.push("saa");
    }
    w.write_record(&header)?;
    for key in inst.offers() {
        let mut row = vec![
            key.shipper.to_string(),
            key.category.to_string(),
            key.service.to_string(),
            key.price.to_string(),
            inst.price(key.shipper, key.service, key.price)?.price.to_string(),
            rho_closed_form(&inst, key)?.to_string(),
        ];
        if let Some(s) = &scenarios {
            row.push(rho_saa(&inst, key, s, Exec::Parallel)?.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn build_model(path: &Path, source: RhoSource, scenarios: usize, seed: u64, out: &Path) -> Result<()> {
    let inst = load_instance(path)?;
    let rho = match source {
        RhoSource::Closed => RhoTable::closed_form(&inst)?,
        RhoSource::Saa => RhoTable::saa(&inst, &scenario_set(&inst, scenarios, seed), Exec::Parallel)?,
    };
    let model = build(&inst, &rho)?;
    std::fs::write(out, export_lp(&model)).with_context(|| format!("writing {}", out.display()))?;
    let c = model.counts();
    eprintln!(
        "{} variables (r {}, y {}, z {}, w {}, pi {}, nu {}), {} constraints",
        model.num_variables(),
        c.r,
        c.y,
        c.z,
        c.w,
        c.pi,
        c.nu,
        model.num_constraints()
    );
    Ok(())
}

fn solve_model(
    path: &Path,
    time_limit: Option<f64>,
    workers: usize,
    engine: EngineArg,
    out: Option<&Path>,
) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let model = parse_lp(&text)?;
    if let Some(t) = time_limit {
        if !(t >= 0.0 && t.is_finite()) {
            bail!("time limit must be a non-negative number of seconds");
        }
    }
    let opts = SolveOptions {
        time_limit: time_limit.map(Duration::from_secs_f64),
        workers: workers.max(1),
        engine: match engine {
            EngineArg::Auto => Engine::Auto,
            EngineArg::Structured => Engine::Structured,
            EngineArg::Generic => Engine::Generic,
        },
    };
    let sol = solve(&model, &opts)?;
    eprintln!(
        "status {} objective {} bound {} gap {:.3e} nodes {} seconds {:.3}",
        sol.status, sol.objective, sol.bound, sol.gap, sol.nodes, sol.seconds
    );
    match out {
        Some(p) => sol.save(p)?,
        None => println!("{}", serde_json::to_string_pretty(&sol)?),
    }
    Ok(())
}

fn simulate_solution(
    inst_path: &Path,
    sol_path: &Path,
    scenarios: usize,
    mode: ModeArg,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let inst = load_instance(inst_path)?;
    let sol = Solution::load(sol_path).with_context(|| format!("loading solution {}", sol_path.display()))?;
    let set = scenario_set(&inst, scenarios, seed);
    let modes: &[Mode] = match mode {
        ModeArg::Reduced => &[Mode::ReducedConsistent],
        ModeArg::Reallocation => &[Mode::Reallocation],
        ModeArg::Both => &[Mode::ReducedConsistent, Mode::Reallocation],
    };
    let reports: Vec<SimulationReport> =
        modes.iter().map(|&m| simulate(&inst, &sol, &set, m, Exec::Parallel)).collect::<biloc::Result<_>>()?;
    let gap = match reports.as_slice() {
        [a, b] => Some(b.mean - a.mean),
        _ => None,
    };
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record([
        "mode",
        "scenarios",
        "seed",
        "mean",
        "std_error",
        "infeasible",
        "milp_objective",
        "mode_gap",
        "violation_rates",
    ])?;
    for r in &reports {
        let rates: Vec<String> =
            r.violation_rates.iter().map(|v| format!("n{}m{}:{}", v.shipper, v.service, v.rate)).collect();
        w.write_record([
            r.mode.to_string(),
            r.scenarios.to_string(),
            seed.to_string(),
            r.mean.to_string(),
            r.std_error.to_string(),
            r.infeasible.to_string(),
            sol.objective.to_string(),
            gap.map(|g| g.to_string()).unwrap_or_default(),
            rates.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn sweep(kind: SweepKind, config: Option<&Path>, full_scale: bool, out: Option<&Path>) -> Result<()> {
    let mut spec = match config {
        Some(p) => SweepSpec::load(p).with_context(|| format!("loading sweep spec {}", p.display()))?,
        None => SweepSpec::new(kind, Vec::new()),
    };
    if spec.kind != kind {
        bail!("config describes a {} sweep but --kind is {kind}", spec.kind);
    }
    match kind {
        SweepKind::Size if full_scale => {
            spec.sizes = full_size_grid();
            spec.params.ratio = 1.0;
        }
        SweepKind::Size if spec.sizes.is_empty() => {
            spec.sizes = desk_size_grid();
            spec.params.ratio = 1.0;
        }
        SweepKind::Alpha if spec.grid.is_empty() => spec.grid = default_alpha_grid(),
        SweepKind::Beta if spec.grid.is_empty() => spec.grid = default_beta_grid(),
        SweepKind::Ratio if spec.grid.is_empty() => spec.grid = default_ratio_grid(),
        _ => {}
    }
    let rows = run_sweep(&spec)?;
    let target = out.map(Path::to_path_buf).or_else(|| spec.output.clone());
    write_sweep_csv(&rows, output(target.as_deref())?)?;
    let failed = rows.iter().filter(|r| r.status.starts_with("error")).count();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed", rows.len());
    }
    Ok(())
}
