//! Lower-bound instances: initial load vectors together with the rounding
//! policy they target and a machine-checkable claim about the run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::derive_seed;
use crate::processes::{IdealMode, RoundingPolicy, Simulator, TieBreak};
use crate::topology::{DiffusionMatrix, Graph};

/// Claimed behaviour of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "predicate", rename_all = "kebab-case")]
pub enum Expectation {
    /// The loads never change during `steps` steps.
    FixedPoint { steps: usize },
    /// `x^(t) = x^(t mod 2)` for `t ≤ steps`, every ledger is zero after an
    /// even number of steps, and the deviation at step 1 is exactly
    /// `step1_deviation`.
    #[serde(rename = "period-2")]
    Period2 { steps: usize, step1_deviation: f64 },
    /// Deviation at `step` is at least `value`.
    DeviationAtLeast { step: usize, value: f64 },
    /// Over `trials` seeded runs, the largest deviation within the first
    /// `steps` steps reaches `threshold` with frequency at least
    /// `min_frequency`. Without `min_frequency` the frequency is only
    /// reported.
    StatDeviation {
        trials: usize,
        steps: usize,
        threshold: f64,
        min_frequency: Option<f64>,
    },
}

impl Expectation {
    pub fn tag(&self) -> &'static str {
        match self {
            Expectation::FixedPoint { .. } => "fixed-point",
            Expectation::Period2 { .. } => "period-2",
            Expectation::DeviationAtLeast { .. } => "deviation-at-least",
            Expectation::StatDeviation { .. } => "stat-deviation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceBundle {
    pub name: String,
    pub graph: Graph,
    pub x0: Vec<i64>,
    pub policy_hint: RoundingPolicy,
    pub expected: Expectation,
}

impl InstanceBundle {
    pub fn new(
        name: impl Into<String>,
        graph: Graph,
        x0: Vec<i64>,
        policy_hint: RoundingPolicy,
        expected: Expectation,
    ) -> Result<Self> {
        if x0.len() != graph.n() {
            return Err(Error::Mismatch {
                expected: graph.n(),
                actual: x0.len(),
            });
        }
        Ok(Self {
            name: name.into(),
            graph,
            x0,
            policy_hint,
            expected,
        })
    }

    pub fn initial_discrepancy(&self) -> i64 {
        crate::processes::discrepancy(&self.x0)
    }
}

/// `x_k = dist(k, anchor) · Δ`: every fractional flow is at most 1/2 and
/// RSW never moves a token.
pub fn rsw_stuck_instance(g: &Graph, anchor: usize, steps: usize) -> Result<InstanceBundle> {
    g.check_vertex(anchor)?;
    let delta = g.max_degree() as i64;
    let x0 = g
        .distances_from(anchor)
        .into_iter()
        .map(|d| d as i64 * delta)
        .collect();
    InstanceBundle::new(
        "rsw_stuck",
        g.clone(),
        x0,
        RoundingPolicy::Rsw,
        Expectation::FixedPoint { steps },
    )
}

/// Half-load vector on the `d`-cube: even-weight vertices carry `d`, odd
/// ones carry nothing. Every fractional flow is exactly 1/2; quasirandom
/// rounding with ties sent toward odd vertices empties and refills the two
/// classes forever, while the idealized loads are `d/2` from step 1 on.
pub fn hypercube_halfload(d: u32, steps: usize) -> Result<InstanceBundle> {
    if d == 0 {
        return Err(Error::Dimension("half-load instance needs d >= 1".into()));
    }
    let g = Graph::hypercube(d)?;
    let x0 = parity_load(&g, d, 0);
    InstanceBundle::new(
        "hypercube_halfload",
        g,
        x0,
        RoundingPolicy::Quasirandom {
            tie_break: TieBreak::TowardOddParity,
        },
        Expectation::Period2 {
            steps,
            step1_deviation: f64::from(d) / 2.0,
        },
    )
}

/// Odd-weight vertices carry `d`. Under randomized rounding the load of
/// every vertex after one step is `Binomial(d, 1/2)`.
pub fn randomized_halfload(d: u32, trials: usize, seed: u64) -> Result<InstanceBundle> {
    if d < 4 {
        return Err(Error::Dimension(format!(
            "randomized half-load needs d >= 4, got {d}"
        )));
    }
    let g = Graph::hypercube(d)?;
    let n = g.n() as f64;
    let x0 = parity_load(&g, d, 1);
    InstanceBundle::new(
        "randomized_halfload",
        g,
        x0,
        RoundingPolicy::Randomized { seed },
        Expectation::StatDeviation {
            trials,
            steps: 1,
            threshold: f64::from(d) / 4.0,
            min_frequency: Some(1.0 - 1.0 / n),
        },
    )
}

fn parity_load(g: &Graph, d: u32, parity: u32) -> Vec<i64> {
    (0..g.n())
        .map(|v| {
            if (v.count_ones() % 2) == parity {
                i64::from(d)
            } else {
                0
            }
        })
        .collect()
}

/// Bump parameters of the torus instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolylogParams {
    pub side: usize,
    /// Bump width (odd).
    pub ell: usize,
    /// Lattice spacing (divides the side).
    pub spacing: usize,
}

/// Chooses the bump width and lattice spacing for a `d`-dimensional torus
/// with `n` vertices.
///
/// `ℓ` is `(log₂ n)^{1/(4d)}` rounded to the nearest odd integer, at least 3.
/// The spacing is the smallest divisor of the side that is at least both
/// `⌈(log₂ n)^{2/(3d)}⌉` and `2ℓ + 1`.
pub fn torus_polylog_params(n: usize, d: usize) -> Result<PolylogParams> {
    if d == 0 {
        return Err(Error::Dimension("torus dimension must be positive".into()));
    }
    let side = (n as f64).powf(1.0 / d as f64).round() as usize;
    if side.checked_pow(d as u32) != Some(n) {
        return Err(Error::Size(format!("{n} is not a perfect {d}-th power")));
    }
    let log_n = (n as f64).log2();
    let raw = log_n.powf(1.0 / (4.0 * d as f64));
    let mut ell = (((raw - 1.0) / 2.0).round() as usize) * 2 + 1;
    ell = ell.max(3);
    let want = (log_n.powf(2.0 / (3.0 * d as f64)).ceil() as usize).max(2 * ell + 1);
    let spacing = (want..=side)
        .find(|&s| side.is_multiple_of(s))
        .ok_or_else(|| {
            Error::Precondition(format!(
                "no divisor of side {side} is at least {want}; use a larger torus"
            ))
        })?;
    if side / spacing < 3 {
        return Err(Error::Precondition(format!(
            "side {side} leaves no interior lattice points at spacing {spacing}; use a larger torus"
        )));
    }
    Ok(PolylogParams { side, ell, spacing })
}

/// Pyramidal bumps `2d · max(0, ℓ/2 - dist(v, S))` centred on the lattice
/// `S = {(x_1 ℓ', ..., x_d ℓ') : 1 ≤ x_k < side/ℓ' - 1}`. The initial
/// discrepancy is `d·ℓ`.
pub fn torus_polylog_instance(
    n: usize,
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<InstanceBundle> {
    let p = torus_polylog_params(n, d)?;
    let g = Graph::torus(&vec![p.side; d])?;
    let per_axis: Vec<usize> = (1..p.side / p.spacing - 1).map(|x| x * p.spacing).collect();
    let reach = p.ell / 2;
    let x0 = (0..g.n())
        .map(|v| {
            let coords = g.torus_coords(v).expect("torus vertex");
            // the lattice is a product set, so the torus distance to it is
            // the sum of the per-axis distances
            let dist: usize = coords
                .iter()
                .map(|&c| {
                    per_axis
                        .iter()
                        .map(|&s| {
                            let a = c.abs_diff(s);
                            a.min(p.side - a)
                        })
                        .min()
                        .unwrap_or(usize::MAX)
                })
                .sum();
            if dist <= reach {
                (d * (p.ell - 2 * dist)) as i64
            } else {
                0
            }
        })
        .collect();
    InstanceBundle::new(
        "torus_polylog",
        g,
        x0,
        RoundingPolicy::Randomized { seed },
        Expectation::StatDeviation {
            trials,
            steps: p.spacing * p.spacing,
            threshold: p.ell as f64,
            min_frequency: None,
        },
    )
}

/// Outcome of checking a bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub predicate: String,
    /// `None` for observational predicates.
    pub passed: Option<bool>,
    /// The measured quantity: a deviation or a frequency.
    pub measured: f64,
    pub detail: String,
}

impl Verdict {
    pub fn failed(&self) -> bool {
        self.passed == Some(false)
    }
}

/// Runs the bundle's predicate.
pub fn verify_bundle(bundle: &InstanceBundle) -> Result<Verdict> {
    let matrix = DiffusionMatrix::new(bundle.graph.clone())?;
    let verdict = |passed, measured, detail: String| Verdict {
        name: bundle.name.clone(),
        predicate: bundle.expected.tag().to_string(),
        passed,
        measured,
        detail,
    };
    match bundle.expected {
        Expectation::FixedPoint { steps } => {
            let mut sim = Simulator::new(
                matrix,
                bundle.x0.clone(),
                bundle.policy_hint.clone(),
                IdealMode::None,
            )?;
            for t in 1..=steps {
                sim.step()?;
                if sim.loads().values != bundle.x0 {
                    return Ok(verdict(
                        Some(false),
                        t as f64,
                        format!("loads changed at step {t}"),
                    ));
                }
            }
            Ok(verdict(
                Some(true),
                steps as f64,
                format!("unchanged for {steps} steps"),
            ))
        }
        Expectation::Period2 {
            steps,
            step1_deviation,
        } => {
            let mut sim = Simulator::new(
                matrix,
                bundle.x0.clone(),
                bundle.policy_hint.clone(),
                IdealMode::Exact,
            )?;
            let mut first = None;
            let mut measured = 0.0;
            for t in 1..=steps {
                sim.step()?;
                if t == 1 {
                    measured = sim.deviation().expect("ideal tracked")?;
                    first = Some(sim.loads().values.clone());
                    if measured != step1_deviation {
                        return Ok(verdict(
                            Some(false),
                            measured,
                            format!("step-1 deviation {measured}, expected {step1_deviation}"),
                        ));
                    }
                }
                let expect = if t % 2 == 0 {
                    &bundle.x0
                } else {
                    first.as_ref().expect("set at t = 1")
                };
                if &sim.loads().values != expect {
                    return Ok(verdict(
                        Some(false),
                        measured,
                        format!("period broken at step {t}"),
                    ));
                }
                if t % 2 == 0 && !sim.ledger().is_zero() {
                    return Ok(verdict(
                        Some(false),
                        measured,
                        format!("nonzero ledger at step {t}"),
                    ));
                }
            }
            Ok(verdict(
                Some(true),
                measured,
                format!("period 2 for {steps} steps"),
            ))
        }
        Expectation::DeviationAtLeast { step, value } => {
            let mut sim = Simulator::new(
                matrix,
                bundle.x0.clone(),
                bundle.policy_hint.clone(),
                IdealMode::Float,
            )?;
            for _ in 0..step {
                sim.step()?;
            }
            let dev = sim.deviation().expect("ideal tracked")?;
            Ok(verdict(
                Some(dev >= value),
                dev,
                format!("deviation {dev} at step {step}, need {value}"),
            ))
        }
        Expectation::StatDeviation {
            trials,
            steps,
            threshold,
            min_frequency,
        } => {
            if trials == 0 {
                return Err(Error::Precondition(
                    "stat-deviation needs at least one trial".into(),
                ));
            }
            let base = bundle.policy_hint.seed().unwrap_or(0);
            let hits = (0..trials)
                .into_par_iter()
                .map(|k| {
                    let policy = match &bundle.policy_hint {
                        RoundingPolicy::Randomized { .. } => RoundingPolicy::Randomized {
                            seed: derive_seed(base, k as u64),
                        },
                        other => other.clone(),
                    };
                    let dev = max_deviation(&matrix, &bundle.x0, &policy, steps)?;
                    Ok(dev >= threshold)
                })
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .filter(|&h| h)
                .count();
            let freq = hits as f64 / trials as f64;
            let passed = min_frequency.map(|f| freq >= f);
            let need = min_frequency.map_or(String::new(), |f| format!(", need {f}"));
            Ok(verdict(
                passed,
                freq,
                format!("deviation >= {threshold} in {hits}/{trials} trials{need}"),
            ))
        }
    }
}

/// Largest deviation over steps `1..=steps`.
pub fn max_deviation(
    matrix: &DiffusionMatrix,
    x0: &[i64],
    policy: &RoundingPolicy,
    steps: usize,
) -> Result<f64> {
    let mut sim = Simulator::new(
        matrix.clone(),
        x0.to_vec(),
        policy.clone(),
        IdealMode::Float,
    )?;
    let mut worst = 0.0f64;
    for _ in 0..steps {
        sim.step()?;
        worst = worst.max(sim.deviation().expect("ideal tracked")?);
    }
    Ok(worst)
}

/// Builds a named instance from `key=value` parameters, as used by the
/// command line.
pub fn instance_by_name(name: &str, params: &[(String, String)]) -> Result<InstanceBundle> {
    let get = |key: &str| {
        params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };
    let num = |key: &str, default: Option<u64>| -> Result<u64> {
        match get(key) {
            Some(v) => v.parse().map_err(|_| {
                Error::Precondition(format!("parameter {key} must be an integer, got {v:?}"))
            }),
            None => default.ok_or_else(|| Error::Missing(format!("parameter {key}"))),
        }
    };
    match name {
        "rsw_stuck" => {
            let spec: crate::topology::GraphSpec =
                get("graph").ok_or_else(|| Error::Missing("parameter graph".into()))?.parse()?;
            rsw_stuck_instance(&spec.build()?, num("anchor", Some(0))? as usize, num("steps", Some(500))? as usize)
        }
        "hypercube_halfload" => hypercube_halfload(num("d", None)? as u32, num("steps", Some(100))? as usize),
        "randomized_halfload" => {
            randomized_halfload(num("d", None)? as u32, num("trials", Some(200))? as usize, num("seed", Some(0))?)
        }
        "torus_polylog" => torus_polylog_instance(
            num("n", None)? as usize,
            num("d", Some(2))? as usize,
            num("trials", Some(50))? as usize,
            num("seed", Some(0))?,
        ),
        other => Err(Error::Precondition(format!(
            "unknown instance {other:?}; expected rsw_stuck, hypercube_halfload, randomized_halfload or torus_polylog"
        ))),
    }
}
