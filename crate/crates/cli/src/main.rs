use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};

use bmtsp::ilp;
use bmtsp::io::{self, BoundOverrides};
use bmtsp::model::{validate, DistanceMetric, Instance, ModelError};
use bmtsp::oracle::{self, EXACT_MAX_CITIES, EXACT_MAX_SALESMEN};
use bmtsp::solver::{self, SolverConfig};

#[derive(Parser)]
#[command(
    name = "bmtsp",
    version,
    about = "Bounded multiple traveling salesman solver and tooling"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an instance and report the best tour set found
    Solve(SolveArgs),
    /// Derive bounded instances from a plain TSP file
    Generate(GenerateArgs),
    /// Check a solution file against an instance
    Validate(ValidateArgs),
    /// Write the integer-programming model in LP format
    ExportIlp(ExportIlpArgs),
    /// Percentage gap between a cost and a baseline cost
    Gap(GapArgs),
    /// Solve every instance in a directory and emit a summary CSV
    Bench(BenchArgs),
}

/// Flags shared by every command that loads an instance file.
#[derive(Args, Clone)]
struct InstanceOpts {
    /// Number of salesmen, overriding the SALESMEN key
    #[arg(long)]
    salesmen: Option<usize>,
    /// Minimum cities per tour, overriding the MIN_CITIES key
    #[arg(long)]
    min_cities: Option<usize>,
    /// Maximum cities per tour, overriding the MAX_CITIES key
    #[arg(long)]
    max_cities: Option<usize>,
    /// Use TSPLIB's integer-rounded distances instead of exact ones
    #[arg(long)]
    round_tsplib: bool,
    /// Precompute the full distance matrix (instances up to 2000 cities)
    #[arg(long)]
    matrix: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (.bmtsp)
    instance: PathBuf,
    #[command(flatten)]
    opts: InstanceOpts,
    /// Master RNG seed; restarts derive their own seeds from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent restarts; the best result wins
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Wall-clock budget in seconds for the whole run
    #[arg(long, value_name = "SECONDS")]
    time_limit: Option<f64>,
    /// Tour construction strategy
    #[arg(long, default_value = "cheapest-insertion")]
    construction: String,
    /// Exhaustive search instead of the heuristic; limited to 10 cities
    /// and 3 salesmen
    #[arg(long)]
    exact: bool,
    /// Write the solution file here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a per-restart CSV report here
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("target").required(true).args(["mmax", "all"])))]
struct GenerateArgs {
    /// Source TSP file with node coordinates
    source: PathBuf,
    /// Maximum tour size to derive the instance from
    #[arg(long)]
    mmax: Option<usize>,
    /// Derive instances for max tour sizes 30, 40 and 50
    #[arg(long)]
    all: bool,
    /// Count the depot when sizing the salesman fleet, as some older
    /// instance families did
    #[arg(long)]
    count_includes_depot: bool,
    /// Directory the derived files are written into
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Instance file (.bmtsp)
    instance: PathBuf,
    /// Solution file to check
    solution: PathBuf,
    #[command(flatten)]
    opts: InstanceOpts,
}

#[derive(Args)]
struct ExportIlpArgs {
    /// Instance file (.bmtsp)
    instance: PathBuf,
    #[command(flatten)]
    opts: InstanceOpts,
    /// Write the LP file here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GapArgs {
    /// Cost under scrutiny
    cost: f64,
    /// Baseline cost (must be positive)
    baseline: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory scanned for .bmtsp files
    #[arg(long)]
    dir: PathBuf,
    #[command(flatten)]
    opts: InstanceOpts,
    /// Worker threads; also bounds each run's restart parallelism
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Per-instance wall-clock budget in seconds
    #[arg(long, value_name = "SECONDS")]
    time_limit: Option<f64>,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    // Die quietly when a downstream pipe closes (`bmtsp ... | head`) instead
    // of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_infeasible(&e) {
                2
            } else {
                1
            }
        }
    };
    std::process::exit(code);
}

/// The infeasibility exit code (2) fires whenever the cause chain bottoms
/// out in a bound-arithmetic rejection.
fn is_infeasible(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(c.downcast_ref::<ModelError>(), Some(ModelError::Infeasible { .. }))
            || matches!(
                c.downcast_ref::<io::IoError>(),
                Some(io::IoError::Model(ModelError::Infeasible { .. }))
            )
    })
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Validate(a) => cmd_validate(a),
        Cmd::ExportIlp(a) => cmd_export_ilp(a),
        Cmd::Gap(a) => cmd_gap(a),
        Cmd::Bench(a) => cmd_bench(a),
    }
}

fn load_instance(path: &Path, opts: &InstanceOpts) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let overrides = BoundOverrides {
        salesmen: opts.salesmen,
        min_cities: opts.min_cities,
        max_cities: opts.max_cities,
    };
    let mut inst = io::parse_instance_with(&text, &overrides)
        .with_context(|| format!("loading {}", path.display()))?;
    if opts.round_tsplib {
        inst.set_metric(DistanceMetric::RoundedTsplib);
    }
    if opts.matrix {
        inst.cache_distance_matrix()?;
    }
    Ok(inst)
}

fn cmd_solve(a: SolveArgs) -> Result<i32> {
    let inst = load_instance(&a.instance, &a.opts)?;
    let start = Instant::now();
    if a.exact {
        if inst.n() > EXACT_MAX_CITIES || inst.k() > EXACT_MAX_SALESMEN {
            bail!(
                "exhaustive search handles at most {EXACT_MAX_CITIES} cities and \
                 {EXACT_MAX_SALESMEN} salesmen; this instance has {} and {}",
                inst.n(),
                inst.k()
            );
        }
        let s = oracle::solve_exact(&inst);
        println!("cost: {:.2}", s.total_cost);
        println!("# wall: {:.3} s", start.elapsed().as_secs_f64());
        if let Some(out) = &a.out {
            fs::write(out, io::write_solution(&s, &inst, None)?)
                .with_context(|| format!("writing {}", out.display()))?;
        }
        return Ok(0);
    }

    let cfg = SolverConfig {
        seed: a.seed,
        restarts: a.restarts,
        time_limit: a.time_limit.map(Duration::from_secs_f64),
        construction: a.construction.clone(),
    };
    let report = solver::solve(&inst, &cfg)?;
    println!("cost: {:.2}", report.best.total_cost);
    println!("# wall: {:.3} s", report.wall_seconds);
    if let Some(out) = &a.out {
        fs::write(out, io::write_solution(&report.best, &inst, Some(a.seed))?)
            .with_context(|| format!("writing {}", out.display()))?;
    }
    if let Some(path) = &a.report {
        fs::write(path, restart_csv(&report))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(0)
}

fn restart_csv(report: &solver::RunReport) -> String {
    let mut out = String::from(
        "restart,seed,initial_cost,after_relocate_subtours,final_cost,iterations,\
         partition_s,construction_s,improvement_s,truncated\n",
    );
    for r in &report.restarts {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{}\n",
            r.index,
            r.seed,
            r.trajectory[0],
            r.trajectory[1],
            r.final_cost,
            r.trajectory.len().saturating_sub(2),
            r.timings.partition,
            r.timings.construction,
            r.timings.improvement,
            r.truncated,
        ));
    }
    out
}

fn cmd_generate(a: GenerateArgs) -> Result<i32> {
    let text =
        fs::read_to_string(&a.source).with_context(|| format!("reading {}", a.source.display()))?;
    let src = io::parse_bmtsp(&text).with_context(|| format!("loading {}", a.source.display()))?;
    let targets: Vec<usize> = if a.all { vec![30, 40, 50] } else { vec![a.mmax.unwrap()] };
    let mut written = 0usize;
    for m_max in targets {
        match io::generate_instance(&src, m_max, a.count_includes_depot) {
            Ok(inst) => {
                let mut comments =
                    vec![format!("derived from {} with max tour size {}", src.name, m_max)];
                if a.count_includes_depot {
                    comments.push("fleet sized counting the depot".to_string());
                }
                let path = a.out_dir.join(format!("{}.bmtsp", inst.name()));
                fs::write(&path, io::write_instance(&inst, &comments))
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("{}", path.display());
                written += 1;
            }
            Err(e) if matches!(e, io::IoError::Model(ModelError::Infeasible { .. })) => {
                eprintln!("warning: skipping max tour size {m_max}: {e}");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(if written == 0 { 2 } else { 0 })
}

fn cmd_validate(a: ValidateArgs) -> Result<i32> {
    let inst = load_instance(&a.instance, &a.opts)?;
    let text = fs::read_to_string(&a.solution)
        .with_context(|| format!("reading {}", a.solution.display()))?;
    let sol = io::parse_solution(&text)
        .with_context(|| format!("loading {}", a.solution.display()))?
        .into_solution();
    let report = validate(&sol, &inst);
    println!("{report}");
    Ok(if report.is_clean() { 0 } else { 1 })
}

fn cmd_export_ilp(a: ExportIlpArgs) -> Result<i32> {
    let inst = load_instance(&a.instance, &a.opts)?;
    let text = ilp::export_lp(&ilp::build_model(&inst));
    match &a.out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_gap(a: GapArgs) -> Result<i32> {
    println!("{:.2}%", solver::gap(a.cost, a.baseline)?);
    Ok(0)
}

fn cmd_bench(a: BenchArgs) -> Result<i32> {
    use rayon::prelude::*;

    let mut files: Vec<PathBuf> = fs::read_dir(&a.dir)
        .with_context(|| format!("reading {}", a.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bmtsp"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .bmtsp files in {}", a.dir.display());
    }

    let cfg = SolverConfig {
        seed: a.seed,
        restarts: a.restarts,
        time_limit: a.time_limit.map(Duration::from_secs_f64),
        ..SolverConfig::default()
    };
    let run_one = |path: &PathBuf| -> Result<(String, f64, f64)> {
        let inst = load_instance(path, &a.opts)
            .with_context(|| format!("benchmarking {}", path.display()))?;
        let t = Instant::now();
        let report = solver::solve(&inst, &cfg)?;
        Ok((
            inst.name().to_string(),
            report.best.total_cost,
            t.elapsed().as_secs_f64(),
        ))
    };
    let results: Vec<Result<(String, f64, f64)>> = match a.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("building worker pool")?
            .install(|| files.par_iter().map(run_one).collect()),
        None => files.par_iter().map(run_one).collect(),
    };

    let mut csv = String::from("instance,cost,seconds\n");
    let mut failures = 0usize;
    for res in results {
        match res {
            Ok((name, cost, secs)) => {
                csv.push_str(&format!("{name},{cost:.2},{secs:.2}\n"));
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                failures += 1;
            }
        }
    }
    match &a.out {
        Some(path) => fs::write(path, &csv)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(if failures > 0 { 1 } else { 0 })
}
