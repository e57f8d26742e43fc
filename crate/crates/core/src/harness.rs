//! Experiment configuration, batch sweeps with derived seeds, persisted
//! results and long-format plot data.
//!
//! Per-run seeds come from a master seed and a run counter:
//!
//! ```text
//! seed(master, k) = splitmix64(master + k · 0x9E3779B97F4A7C15)   (wrapping)
//! ```

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversarial;
use crate::error::{Error, Result};
use crate::processes::{
    discrepancy, verify_standard_ansatz, IdealMode, IdealState, RoundingPolicy, SimulationTrace,
    Simulator,
};
use crate::topology::{DiffusionMatrix, Graph, GraphKind, GraphSpec};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `counter` under `master`.
pub fn derive_seed(master: u64, counter: u64) -> u64 {
    splitmix64(master.wrapping_add(counter.wrapping_mul(GOLDEN_GAMMA)))
}

/// Uniform loads in `[0, K]` with vertex 0 pinned to 0 and vertex `n-1` to
/// `K`, so the discrepancy is exactly `K`.
pub fn random_loads(n: usize, k: i64, seed: u64) -> Result<Vec<i64>> {
    if n < 2 || k < 0 {
        return Err(Error::Precondition(format!(
            "random loads need n >= 2 and K >= 0 (n = {n}, K = {k})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<i64> = (0..n).map(|_| rng.random_range(0..=k)).collect();
    x[0] = 0;
    x[n - 1] = k;
    Ok(x)
}

/// How the initial load vector is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    Explicit { loads: Vec<i64> },
    Random { k: i64, seed: u64 },
    RswStuck { anchor: usize },
    HypercubeHalfload,
    RandomizedHalfload,
    TorusPolylog,
}

impl InitSpec {
    pub fn build(&self, g: &Graph) -> Result<Vec<i64>> {
        let hypercube_d = || match g.kind() {
            GraphKind::Hypercube { d } => Ok(*d),
            _ => Err(Error::Precondition(
                "half-load initialisation needs a hypercube".into(),
            )),
        };
        let x0 = match self {
            InitSpec::Explicit { loads } => loads.clone(),
            InitSpec::Random { k, seed } => random_loads(g.n(), *k, *seed)?,
            InitSpec::RswStuck { anchor } => adversarial::rsw_stuck_instance(g, *anchor, 0)?.x0,
            InitSpec::HypercubeHalfload => adversarial::hypercube_halfload(hypercube_d()?, 0)?.x0,
            InitSpec::RandomizedHalfload => {
                adversarial::randomized_halfload(hypercube_d()?, 1, 0)?.x0
            }
            InitSpec::TorusPolylog => {
                let d = g.torus_dims().map(|dims| dims.len()).ok_or_else(|| {
                    Error::Precondition("polylog initialisation needs a torus".into())
                })?;
                let bundle = adversarial::torus_polylog_instance(g.n(), d, 1, 0)?;
                if &bundle.graph != g {
                    return Err(Error::Precondition(
                        "polylog initialisation needs equal sides".into(),
                    ));
                }
                bundle.x0
            }
        };
        if x0.len() != g.n() {
            return Err(Error::Mismatch {
                expected: g.n(),
                actual: x0.len(),
            });
        }
        Ok(x0)
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            InitSpec::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// When a run stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Steps(usize),
    /// Stop once the discrete discrepancy is at most `ell`, or after
    /// `max_steps`.
    UntilDiscrepancy {
        ell: i64,
        max_steps: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Metrics {
    pub deviation: bool,
    pub discrepancy: bool,
    pub ledger_max: bool,
    pub ansatz: bool,
}

impl Default for Metrics {
    fn default() -> Self {
        Self {
            deviation: true,
            discrepancy: true,
            ledger_max: true,
            ansatz: false,
        }
    }
}

/// Which files a run writes next to `summary.json`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    pub trace: bool,
    pub ledger: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            trace: true,
            ledger: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub policy: RoundingPolicy,
    pub init: InitSpec,
    pub horizon: Horizon,
    #[serde(default)]
    pub metrics: Metrics,
    #[serde(default)]
    pub ideal: IdealMode,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut text = String::new();
        File::open(path)?.read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    /// Canonical JSON with sorted keys.
    pub fn canonical_json(&self) -> String {
        serde_json::to_value(self)
            .expect("config serializes")
            .to_string()
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON, ignoring
    /// the output section.
    pub fn hash(&self) -> String {
        let mut keyed = self.clone();
        keyed.output = OutputSpec::default();
        let digest = Sha256::digest(keyed.canonical_json().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// The seed that identifies this run: the policy seed, else the init
    /// seed.
    pub fn seed(&self) -> Option<u64> {
        self.policy.seed().or(self.init.seed())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub graph: String,
    pub n: usize,
    pub policy: String,
    pub seed: Option<u64>,
    #[serde(rename = "T")]
    pub steps: usize,
    pub initial_discrepancy: i64,
    pub final_discrepancy: i64,
    pub max_deviation: Option<f64>,
    pub ledger_max: Option<f64>,
    pub ansatz_residual: Option<f64>,
    pub wall_time_ms: f64,
}

/// Runs one experiment. With `out`, writes `summary.json` and the CSV files
/// selected by the config into that directory.
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>) -> Result<RunSummary> {
    let start = Instant::now();
    let graph = config.graph.build()?;
    let x0 = config.init.build(&graph)?;
    let matrix = DiffusionMatrix::new(graph)?;
    if config.metrics.deviation && config.ideal == IdealMode::None {
        return Err(Error::Precondition(
            "the deviation metric needs an idealized mode".into(),
        ));
    }
    let (mode, max_steps, stop_at) = match config.horizon {
        Horizon::Steps(t) => (config.ideal, t, None),
        Horizon::UntilDiscrepancy { ell, max_steps } => (config.ideal, max_steps, Some(ell)),
    };
    let record =
        config.metrics.ansatz || (out.is_some() && (config.output.trace || config.output.ledger));
    if config.metrics.ansatz && mode == IdealMode::None {
        return Err(Error::Precondition(
            "the ansatz metric needs an idealized mode".into(),
        ));
    }

    let mut sim = Simulator::new(matrix.clone(), x0.clone(), config.policy.clone(), mode)?;
    let initial_discrepancy = discrepancy(&x0);
    let mut max_dev = sim.deviation().transpose()?;
    let mut ideal: Vec<IdealState> = if record {
        sim.ideal().cloned().into_iter().collect()
    } else {
        vec![]
    };
    let mut records = Vec::new();
    let mut steps = 0;
    while steps < max_steps && stop_at.is_none_or(|ell| sim.loads().discrepancy() > ell) {
        let rec = sim.step()?;
        steps += 1;
        if let Some(dev) = sim.deviation().transpose()? {
            max_dev = Some(max_dev.map_or(dev, |m: f64| m.max(dev)));
        }
        if record {
            records.push(rec);
            if let Some(xi) = sim.ideal() {
                ideal.push(xi.clone());
            }
        }
    }
    let ledger = sim.ledger();
    let ledger_max = {
        let m = ledger.max_abs();
        *m.numer() as f64 / *m.denom() as f64
    };
    let trace = record.then(|| SimulationTrace {
        initial: crate::processes::LoadState::new(x0),
        steps: records,
        ideal,
        final_ledger: ledger.clone(),
    });
    let ansatz_residual = match (&trace, config.metrics.ansatz) {
        (Some(trace), true) => Some(verify_standard_ansatz(trace, &matrix)?),
        _ => None,
    };

    let summary = RunSummary {
        config_hash: config.hash(),
        graph: config.graph.to_string(),
        n: matrix.n(),
        policy: config.policy.label(),
        seed: config.seed(),
        steps,
        initial_discrepancy,
        final_discrepancy: sim.loads().discrepancy(),
        max_deviation: if config.metrics.deviation {
            max_dev
        } else {
            None
        },
        ledger_max: config.metrics.ledger_max.then_some(ledger_max),
        ansatz_residual,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };

    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        if let Some(trace) = &trace {
            if config.output.trace {
                trace.write_loads_csv(BufWriter::new(File::create(dir.join("trace.csv"))?))?;
            }
            if config.output.ledger {
                trace.write_ledger_csv(
                    &matrix,
                    BufWriter::new(File::create(dir.join("ledger.csv"))?),
                )?;
            }
        }
        let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
        serde_json::to_writer_pretty(&mut f, &summary)?;
        writeln!(f)?;
        f.flush()?;
    }
    Ok(summary)
}

/// A grid of experiments: every graph with every policy, repeated with
/// `seeds` derived seeds. Run `k` (in graph-major, policy, seed order)
/// gets `derive_seed(master_seed, k)`, which replaces the seed of a random
/// initialisation and of a randomized policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub graphs: Vec<GraphSpec>,
    #[serde(default)]
    pub policies: Vec<RoundingPolicy>,
    pub seeds: usize,
    pub master_seed: u64,
}

impl SweepSpec {
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        let policies = if self.policies.is_empty() {
            vec![self.base.policy.clone()]
        } else {
            self.policies.clone()
        };
        let mut out = Vec::with_capacity(self.graphs.len() * policies.len() * self.seeds);
        let mut counter = 0u64;
        for g in &self.graphs {
            for p in &policies {
                for _ in 0..self.seeds {
                    let seed = derive_seed(self.master_seed, counter);
                    counter += 1;
                    let mut c = self.base.clone();
                    c.graph = g.clone();
                    c.policy = match p {
                        RoundingPolicy::Randomized { .. } => RoundingPolicy::Randomized { seed },
                        other => other.clone(),
                    };
                    if let InitSpec::Random { seed: s, .. } = &mut c.init {
                        *s = seed;
                    }
                    out.push(c);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub config_hash: String,
    pub error: String,
}

/// Summaries sorted by config hash, plus the runs that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<RunSummary>,
    pub failures: Vec<SweepFailure>,
}

/// Runs every config, concurrently on `threads` workers (all cores when
/// `None`). Failed runs are reported, not fatal.
pub fn sweep(configs: &[ExperimentConfig], threads: Option<usize>) -> Result<SweepReport> {
    if configs.is_empty() {
        return Err(Error::Precondition(
            "sweep needs at least one config".into(),
        ));
    }
    let work = || {
        configs
            .par_iter()
            .map(|c| {
                run_experiment(c, None).map_err(|e| SweepFailure {
                    config_hash: c.hash(),
                    error: e.to_string(),
                })
            })
            .collect::<Vec<_>>()
    };
    let results = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Precondition(e.to_string()))?
            .install(work),
        None => work(),
    };
    let (mut rows, mut failures) = (Vec::new(), Vec::new());
    for r in results {
        match r {
            Ok(s) => rows.push(s),
            Err(f) => failures.push(f),
        }
    }
    rows.sort_by(|a, b| {
        a.config_hash
            .cmp(&b.config_hash)
            .then(a.wall_time_ms.total_cmp(&b.wall_time_ms))
    });
    failures.sort_by(|a, b| a.config_hash.cmp(&b.config_hash));
    Ok(SweepReport { rows, failures })
}

/// Column names of a summary table.
pub const SUMMARY_COLUMNS: [&str; 13] = [
    "config_hash",
    "graph",
    "n",
    "d",
    "policy",
    "seed",
    "T",
    "initial_discrepancy",
    "final_discrepancy",
    "max_deviation",
    "ledger_max",
    "ansatz_residual",
    "wall_time_ms",
];

/// Reads one cell (or a derived value) from a row.
type Accessor<'a> = Box<dyn Fn(&[String]) -> String + 'a>;

/// A string table with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

impl Table {
    /// Summary table; `wall_time_ms` is left out when `timing` is false so
    /// that repeated sweeps compare equal.
    pub fn from_summaries(rows: &[RunSummary], timing: bool) -> Result<Self> {
        let mut columns: Vec<String> = SUMMARY_COLUMNS.iter().map(|s| s.to_string()).collect();
        if !timing {
            columns.pop();
        }
        let rows = rows
            .iter()
            .map(|s| {
                let d = s.graph.parse::<GraphSpec>().map(|g| graph_dimension(&g))?;
                let mut row = vec![
                    s.config_hash.clone(),
                    s.graph.clone(),
                    s.n.to_string(),
                    d.to_string(),
                    s.policy.clone(),
                    opt(&s.seed),
                    s.steps.to_string(),
                    s.initial_discrepancy.to_string(),
                    s.final_discrepancy.to_string(),
                    opt(&s.max_deviation),
                    opt(&s.ledger_max),
                    opt(&s.ansatz_residual),
                ];
                if timing {
                    row.push(s.wall_time_ms.to_string());
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        Ok(Self { columns, rows })
    }

    pub fn from_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let columns = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| Ok(rec?.iter().map(String::from).collect()))
            .collect::<Result<_>>()?;
        Ok(Self { columns, rows })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Resolves a column name or a ratio `a/b` of two numeric columns.
    fn accessor(&self, expr: &str) -> Result<Accessor<'_>> {
        if let Ok(i) = self.index(expr) {
            return Ok(Box::new(move |row| row[i].clone()));
        }
        let (a, b) = expr
            .split_once('/')
            .ok_or_else(|| Error::UnknownColumn(expr.to_string()))?;
        let (ia, ib) = (self.index(a.trim())?, self.index(b.trim())?);
        Ok(Box::new(move |row| {
            match (row[ia].parse::<f64>(), row[ib].parse::<f64>()) {
                (Ok(x), Ok(y)) => (x / y).to_string(),
                _ => String::new(),
            }
        }))
    }
}

/// Spatial dimension used for the `d` column: number of torus axes,
/// hypercube dimension, 1 for cycles and paths.
pub fn graph_dimension(g: &GraphSpec) -> usize {
    match g {
        GraphSpec::Torus(dims) => dims.len(),
        GraphSpec::Hypercube(d) => *d as usize,
        GraphSpec::Cycle(_) | GraphSpec::Path(_) => 1,
    }
}

/// Long-format `series,<x>,<y>` table. `y` may be a ratio `a/b` of two
/// columns. Without `group_by` every row belongs to series `all`.
pub fn emit_plotdata(table: &Table, x: &str, y: &str, group_by: Option<&str>) -> Result<Table> {
    let fx = table.accessor(x)?;
    let fy = table.accessor(y)?;
    let fg = group_by.map(|g| table.accessor(g)).transpose()?;
    let mut rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                fg.as_ref().map_or_else(|| "all".to_string(), |g| g(r)),
                fx(r),
                fy(r),
            ]
        })
        .collect();
    rows.sort_by(|a, b| {
        a[0].cmp(&b[0])
            .then_with(|| match (a[1].parse::<f64>(), b[1].parse::<f64>()) {
                (Ok(p), Ok(q)) => p.total_cmp(&q),
                _ => a[1].cmp(&b[1]),
            })
    });
    Ok(Table {
        columns: vec!["series".into(), x.into(), y.into()],
        rows,
    })
}

/// Reads every `*.json` config in a directory, sorted by file name.
pub fn load_config_dir(dir: &Path) -> Result<Vec<(PathBuf, ExperimentConfig)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| ExperimentConfig::load(&p).map(|c| (p, c)))
        .collect()
}
