use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use quasidiff::adversarial::{instance_by_name, verify_bundle, InstanceBundle};
use quasidiff::harness::{
    emit_plotdata, run_experiment, sweep, ExperimentConfig, InitSpec, SweepSpec, Table,
};
use quasidiff::markov::{
    balls_and_bins_transition, binomial, certify, fill_decomposition, first_passage_by_convolution,
    first_passage_path, geometric_convolution, is_non_decreasing, Certificate, PathChain,
};
use quasidiff::processes::{IdealMode, RoundingPolicy};
use quasidiff::spectral::{closed_form_lambda2, convergence_bound, numeric_lambda2};
use quasidiff::{DiffusionMatrix, GraphSpec};

/// Discrete diffusion load balancing: simulation and analysis.
#[derive(Parser)]
#[command(name = "quasidiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Simulate(SimulateArgs),
    /// Run a sweep spec and write a summary table.
    Sweep(SweepArgs),
    /// Spectral and random-walk analysis.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Emit a lower-bound instance as JSON.
    Instance(InstanceArgs),
    /// Check the claim of an instance bundle.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the seed of a randomized policy and of a random init.
    #[arg(long)]
    seed: Option<u64>,
    /// Track the idealized process in exact rational arithmetic.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Also write plot.csv with these x and y columns.
    #[arg(long, requires = "plot_y")]
    plot_x: Option<String>,
    #[arg(long, requires = "plot_x")]
    plot_y: Option<String>,
    #[arg(long)]
    group_by: Option<String>,
}

#[derive(Subcommand)]
enum Analyze {
    /// Second eigenvalue of the diffusion matrix and the convergence bound.
    Spectrum {
        #[arg(long)]
        graph: GraphSpec,
        /// Initial discrepancy for the bound.
        #[arg(long, default_value_t = 100.0)]
        k: f64,
        /// Target discrepancy for the bound.
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
    },
    /// First-passage distribution of a path chain given as {"alpha": [..], "beta": [..]}.
    Passage {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value_t = 300)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transition probabilities P_{0,j}(t) on the d-cube, one column per weight.
    Cube {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// rsw_stuck, hypercube_halfload, randomized_halfload or torus_polylog.
    name: String,
    /// Parameters as key=value, e.g. d=6 or graph=cycle:9.
    params: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    bundle: PathBuf,
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Analyze(Analyze::Spectrum { graph, k, ell }) => spectrum(&graph, k, ell),
        Command::Analyze(Analyze::Passage { chain, steps, out }) => {
            passage(&chain, steps, out.as_deref())
        }
        Command::Analyze(Analyze::Cube { d, steps, out }) => cube(d, steps, out.as_deref()),
        Command::Instance(a) => instance(a),
        Command::Verify(a) => verify(&a.bundle),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn reseed(config: &mut ExperimentConfig, seed: u64) {
    if let RoundingPolicy::Randomized { seed: s } = &mut config.policy {
        *s = seed;
    }
    if let InitSpec::Random { seed: s, .. } = &mut config.init {
        *s = seed;
    }
}

fn simulate(a: SimulateArgs) -> Result<Outcome> {
    let mut config: ExperimentConfig = read_json(&a.config)?;
    if let Some(seed) = a.seed {
        reseed(&mut config, seed);
    }
    if a.exact {
        config.ideal = IdealMode::Exact;
    }
    let summary = run_experiment(&config, a.out.as_deref())?;
    print_json(&summary)?;
    Ok(Outcome::Pass)
}

fn run_sweep(a: SweepArgs) -> Result<Outcome> {
    let mut spec: SweepSpec = read_json(&a.config)?;
    if let Some(seed) = a.seed {
        spec.master_seed = seed;
    }
    if a.exact {
        spec.base.ideal = IdealMode::Exact;
    }
    let report = sweep(&spec.expand(), a.threads)?;
    let table = Table::from_summaries(&report.rows, true)?;
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            table.write_csv(BufWriter::new(File::create(dir.join("sweep.csv"))?))?;
            if let (Some(x), Some(y)) = (&a.plot_x, &a.plot_y) {
                let plot = emit_plotdata(&table, x, y, a.group_by.as_deref())?;
                plot.write_csv(BufWriter::new(File::create(dir.join("plot.csv"))?))?;
            }
            if !report.failures.is_empty() {
                serde_json::to_writer_pretty(
                    File::create(dir.join("failures.json"))?,
                    &report.failures,
                )?;
            }
        }
        None => table.write_csv(io::stdout().lock())?,
    }
    for f in &report.failures {
        eprintln!("run {} failed: {}", f.config_hash, f.error);
    }
    Ok(if report.failures.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn spectrum(graph: &GraphSpec, k: f64, ell: f64) -> Result<Outcome> {
    let g = graph.build()?;
    let closed = closed_form_lambda2(&g).map(|r| r.lambda2);
    let matrix = DiffusionMatrix::new(g)?;
    let numeric = numeric_lambda2(&matrix).ok().map(|r| r.lambda2);
    let Some(lambda2) = closed.or(numeric) else {
        bail!("no closed form and the graph is too large for the numeric solver");
    };
    let bound = convergence_bound(lambda2, k, matrix.n(), ell)?;
    print_json(&json!({
        "graph": graph.to_string(),
        "n": matrix.n(),
        "lambda2_closed": closed,
        "lambda2_numeric": numeric,
        "gap": 1.0 - lambda2,
        "bound_steps": { "K": k, "ell": ell, "steps": bound },
    }))?;
    Ok(Outcome::Pass)
}

/// Writes the CSV to `<out>/<name>` and the JSON block to stdout, or, with
/// no output directory, the CSV to stdout and the JSON block to stderr.
fn emit(table: &Table, name: &str, block: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            table.write_csv(BufWriter::new(File::create(dir.join(name))?))?;
            let mut f = File::create(dir.join("certificate.json"))?;
            serde_json::to_writer_pretty(&mut f, block)?;
            writeln!(f)?;
            print_json(block)
        }
        None => {
            table.write_csv(io::stdout().lock())?;
            eprintln!("{}", serde_json::to_string_pretty(block)?);
            Ok(())
        }
    }
}

fn passage(chain_path: &Path, steps: usize, out: Option<&Path>) -> Result<Outcome> {
    let chain: PathChain = read_json(chain_path)?;
    let absorbing = first_passage_path(&chain, steps);
    let convolution = first_passage_by_convolution(&chain, steps);
    let params = fill_decomposition(&chain).ok();
    let geometric = params
        .as_ref()
        .map(|p| geometric_convolution(p, steps))
        .transpose()?;
    let mut columns = vec![
        "t".to_string(),
        "absorbing".into(),
        "edge_convolution".into(),
    ];
    if geometric.is_some() {
        columns.push("geometric".into());
    }
    let rows = (0..=steps)
        .map(|t| {
            let mut row = vec![
                t.to_string(),
                absorbing.values[t].to_string(),
                convolution.values[t].to_string(),
            ];
            if let Some(g) = &geometric {
                row.push(g.values[t].to_string());
            }
            row
        })
        .collect();
    let cert = certify(&absorbing.values);
    let block = json!({
        "log_concave": cert.log_concave,
        "unimodal": cert.unimodal,
        "extrema_count": cert.extrema_count,
        "geometric_parameters": params,
        "max_abs_diff_geometric": geometric.as_ref().map(|g| g.max_abs_diff(&absorbing)),
    });
    emit(&Table { columns, rows }, "passage.csv", &block, out)?;
    let lazy = chain.is_lazy();
    // a lazy chain must certify; a non-lazy one is reported only
    Ok(if lazy && !(cert.log_concave && cert.unimodal) {
        Outcome::Fail
    } else {
        Outcome::Pass
    })
}

fn cube(d: usize, steps: usize, out: Option<&Path>) -> Result<Outcome> {
    if d == 0 || d > 20 {
        bail!("--d must be between 1 and 20");
    }
    let per_weight = (0..=d)
        .map(|ell| balls_and_bins_transition(d, ell, steps).map(|s| s.values))
        .collect::<quasidiff::Result<Vec<_>>>()?;
    let mut columns = vec!["t".to_string()];
    columns.extend((0..=d).map(|ell| format!("weight_{ell}")));
    let rows = (0..=steps)
        .map(|t| {
            let mut row = vec![t.to_string()];
            row.extend(per_weight.iter().map(|s| s[t].to_string()));
            row
        })
        .collect();
    let certs: Vec<Certificate> = per_weight.iter().map(|s| certify(s)).collect();
    let monotone = (0..=d)
        .filter(|&l| 2 * l >= d)
        .all(|l| is_non_decreasing(&per_weight[l]));
    let unimodal = certs.iter().all(|c| c.extrema_count <= 1);
    let block = json!({
        "d": d,
        "log_concave": certs.iter().all(|c| c.log_concave),
        "unimodal": unimodal,
        "extrema_count": certs.iter().map(|c| c.extrema_count).max(),
        "monotone_high_weights": monotone,
        "weights": certs.iter().enumerate().map(|(ell, c)| json!({
            "ell": ell,
            "vertices": binomial(d, ell),
            "log_concave": c.log_concave,
            "unimodal": c.unimodal,
            "extrema_count": c.extrema_count,
        })).collect::<Vec<_>>(),
    });
    emit(&Table { columns, rows }, "cube.csv", &block, out)?;
    Ok(if unimodal && monotone {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn instance(a: InstanceArgs) -> Result<Outcome> {
    let params = a
        .params
        .iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .with_context(|| format!("parameter {p:?} is not key=value"))?;
            Ok((k.to_string(), v.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let bundle = instance_by_name(&a.name, &params)?;
    match a.out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            serde_json::to_writer_pretty(BufWriter::new(File::create(&path)?), &bundle)?;
        }
        None => print_json(&bundle)?,
    }
    Ok(Outcome::Pass)
}

fn verify(path: &Path) -> Result<Outcome> {
    let bundle: InstanceBundle = read_json(path)?;
    let verdict = verify_bundle(&bundle)?;
    print_json(&verdict)?;
    Ok(if verdict.failed() {
        Outcome::Fail
    } else {
        Outcome::Pass
    })
}
