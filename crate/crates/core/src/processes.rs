//! The idealized diffusion process and the three discrete rounding
//! processes.
//!
//! All discrete quantities are kept as integers scaled by `2Δ`: the
//! fractional flow over edge `[i:j]` is `(x_i - x_j) / (2Δ)`, so its scaled
//! value is just the load difference, and rounding errors and per-edge
//! ledgers are exact integers in the same unit. Flows of a step are computed
//! from the loads of the previous step and applied simultaneously.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{DiffusionMatrix, OrientedEdge};

/// Integer token loads after step `step`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadState {
    pub step: u64,
    pub values: Vec<i64>,
}

impl LoadState {
    pub fn new(values: Vec<i64>) -> Self {
        Self { step: 0, values }
    }

    pub fn total(&self) -> i128 {
        self.values.iter().map(|&v| v as i128).sum()
    }

    pub fn discrepancy(&self) -> i64 {
        discrepancy(&self.values)
    }
}

/// `max - min` of a load vector (0 for an empty vector).
pub fn discrepancy(values: &[i64]) -> i64 {
    match (values.iter().max(), values.iter().min()) {
        (Some(max), Some(min)) => max - min,
        _ => 0,
    }
}

pub fn discrepancy_f64(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        0.0
    } else {
        max - min
    }
}

/// Idealized loads held exactly as `numerators / (2Δ)^t`.
///
/// Every entry of `P` is an integer over `2Δ`, so one idealized step only
/// needs integer additions and one small multiplication per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactLoads {
    numerators: Vec<BigInt>,
    scale: i64,
    denominator: BigInt,
}

impl ExactLoads {
    pub fn from_integers(values: &[i64], scale: i64) -> Self {
        Self {
            numerators: values.iter().map(|&v| BigInt::from(v)).collect(),
            scale,
            denominator: BigInt::from(1),
        }
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    /// The common denominator `(2Δ)^t`.
    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.numerators
    }

    pub fn value(&self, v: usize) -> BigRational {
        BigRational::new(self.numerators[v].clone(), self.denominator.clone())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.len())
            .map(|v| self.value(v).to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn total(&self) -> BigRational {
        let sum: BigInt = self.numerators.iter().sum();
        BigRational::new(sum, self.denominator.clone())
    }

    /// One exact idealized step `x ↦ xP`.
    pub fn step(&self, matrix: &DiffusionMatrix) -> Self {
        let g = matrix.graph();
        let numerators = (0..self.len())
            .map(|v| {
                let mut acc = &self.numerators[v] * matrix.scaled_diagonal(v);
                for &w in g.neighbors(v) {
                    acc += &self.numerators[w];
                }
                acc
            })
            .collect();
        Self {
            numerators,
            scale: self.scale,
            denominator: &self.denominator * self.scale,
        }
    }

    /// `max_v |x_v - ξ_v|`, exactly.
    pub fn max_deviation(&self, discrete: &[i64]) -> Result<BigRational> {
        if discrete.len() != self.len() {
            return Err(Error::Mismatch {
                expected: self.len(),
                actual: discrete.len(),
            });
        }
        let max = discrete
            .iter()
            .zip(&self.numerators)
            .map(|(&x, num)| (&self.denominator * x - num).abs())
            .max()
            .unwrap_or_default();
        Ok(BigRational::new(max, self.denominator.clone()))
    }
}

/// Idealized (divisible) loads, in double precision or exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum IdealLoads {
    Float(Vec<f64>),
    Exact(ExactLoads),
}

impl IdealLoads {
    pub fn len(&self) -> usize {
        match self {
            IdealLoads::Float(v) => v.len(),
            IdealLoads::Exact(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            IdealLoads::Float(v) => v.clone(),
            IdealLoads::Exact(e) => e.to_f64(),
        }
    }

    pub fn as_exact(&self) -> Option<&ExactLoads> {
        match self {
            IdealLoads::Exact(e) => Some(e),
            IdealLoads::Float(_) => None,
        }
    }
}

/// How (and whether) to track the idealized process next to a discrete run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdealMode {
    None,
    #[default]
    Float,
    Exact,
}

/// Idealized loads after step `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealState {
    pub step: u64,
    pub loads: IdealLoads,
}

impl IdealState {
    /// Starts the idealized process from an integer vector.
    pub fn from_integers(
        values: &[i64],
        matrix: &DiffusionMatrix,
        mode: IdealMode,
    ) -> Option<Self> {
        let loads = match mode {
            IdealMode::None => return None,
            IdealMode::Float => IdealLoads::Float(values.iter().map(|&v| v as f64).collect()),
            IdealMode::Exact => {
                IdealLoads::Exact(ExactLoads::from_integers(values, matrix.scale()))
            }
        };
        Some(Self { step: 0, loads })
    }

    pub fn from_f64(values: Vec<f64>) -> Self {
        Self {
            step: 0,
            loads: IdealLoads::Float(values),
        }
    }
}

/// One idealized step `ξ ↦ ξP`.
pub fn ideal_step(state: &IdealState, matrix: &DiffusionMatrix) -> Result<IdealState> {
    if state.loads.len() != matrix.n() {
        return Err(Error::Mismatch {
            expected: matrix.n(),
            actual: state.loads.len(),
        });
    }
    let loads = match &state.loads {
        IdealLoads::Float(v) => IdealLoads::Float(matrix.apply_unchecked(v)),
        IdealLoads::Exact(e) => IdealLoads::Exact(e.step(matrix)),
    };
    Ok(IdealState {
        step: state.step + 1,
        loads,
    })
}

/// Direction chosen when both roundings are equally good.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    Down,
    Up,
}

/// What a tie-breaking callback gets to see.
#[derive(Debug, Clone, Copy)]
pub struct TieContext {
    pub edge: OrientedEdge,
    pub step: u64,
    /// Accumulated error on the edge before this step.
    pub ledger: Ratio<i64>,
    /// Fractional flow from `edge.lo` to `edge.hi`.
    pub flow: Ratio<i64>,
}

/// A user-supplied deterministic tie-breaking rule.
#[derive(Clone)]
pub struct CustomTieBreak(pub Arc<dyn Fn(&TieContext) -> Rounding + Send + Sync>);

impl CustomTieBreak {
    pub fn new(f: impl Fn(&TieContext) -> Rounding + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }
}

impl fmt::Debug for CustomTieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomTieBreak(..)")
    }
}

impl PartialEq for CustomTieBreak {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// Tie-breaking rule of the quasirandom algorithm.
///
/// A tie happens when rounding down and rounding up leave the accumulated
/// error at the same distance from zero (the ledger is `∓1/2` away either
/// way). `TowardOddParity` sends the extra token to the endpoint with odd
/// Hamming weight; on a hypercube this is the adversary that keeps the
/// half-load instance oscillating.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    Down,
    Up,
    TowardOddParity,
    #[serde(skip)]
    Custom(CustomTieBreak),
}

impl TieBreak {
    fn choose(&self, ctx: &TieContext) -> Rounding {
        match self {
            TieBreak::Down => Rounding::Down,
            TieBreak::Up => Rounding::Up,
            TieBreak::TowardOddParity => {
                if ctx.edge.hi.count_ones() % 2 == 1 {
                    Rounding::Up
                } else {
                    Rounding::Down
                }
            }
            TieBreak::Custom(f) => (f.0)(ctx),
        }
    }
}

/// How fractional flows are turned into integer flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoundingPolicy {
    /// Round so that the accumulated error of the edge stays closest to zero.
    Quasirandom {
        #[serde(default)]
        tie_break: TieBreak,
    },
    /// Round the flow toward zero (the heavier endpoint keeps the fraction).
    Rsw,
    /// Round up with probability equal to the fractional part.
    Randomized { seed: u64 },
}

impl RoundingPolicy {
    pub fn quasirandom() -> Self {
        RoundingPolicy::Quasirandom {
            tie_break: TieBreak::Down,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RoundingPolicy::Quasirandom { .. } => "quasirandom",
            RoundingPolicy::Rsw => "rsw",
            RoundingPolicy::Randomized { .. } => "randomized",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            RoundingPolicy::Randomized { seed } => Some(*seed),
            _ => None,
        }
    }

    /// Short label used in tables, e.g. `quasirandom/down`.
    pub fn label(&self) -> String {
        match self {
            RoundingPolicy::Quasirandom { tie_break } => {
                let tb = match tie_break {
                    TieBreak::Down => "down",
                    TieBreak::Up => "up",
                    TieBreak::TowardOddParity => "toward_odd_parity",
                    TieBreak::Custom(_) => "custom",
                };
                format!("quasirandom/{tb}")
            }
            RoundingPolicy::Rsw => "rsw".into(),
            RoundingPolicy::Randomized { .. } => "randomized".into(),
        }
    }
}

/// Accumulated rounding error `Σ_s e_{lo,hi}^(s)` of every oriented edge, in
/// units of `1/(2Δ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLedger {
    policy: &'static str,
    scale: i64,
    accumulated: Vec<i64>,
}

impl EdgeLedger {
    pub fn new(matrix: &DiffusionMatrix, policy: &RoundingPolicy) -> Self {
        Self {
            policy: policy.name(),
            scale: matrix.scale(),
            accumulated: vec![0; matrix.graph().edge_count()],
        }
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.accumulated.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accumulated.is_empty()
    }

    /// Scaled accumulated errors indexed by edge id.
    pub fn scaled(&self) -> &[i64] {
        &self.accumulated
    }

    pub fn accumulated(&self, edge: usize) -> Ratio<i64> {
        Ratio::new(self.accumulated[edge], self.scale)
    }

    /// Largest `|accumulated error|` over all edges.
    pub fn max_abs(&self) -> Ratio<i64> {
        let m = self.accumulated.iter().map(|a| a.abs()).max().unwrap_or(0);
        Ratio::new(m, self.scale)
    }

    /// Λ guaranteed by the policy: `1/2` for quasirandom, none otherwise.
    pub fn lambda_bound(&self) -> Option<Ratio<i64>> {
        (self.policy == "quasirandom").then(|| Ratio::new(1, 2))
    }

    pub fn is_zero(&self) -> bool {
        self.accumulated.iter().all(|&a| a == 0)
    }
}

/// Flows, rounding errors and resulting loads of one discrete step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub step: u64,
    /// Integer flow `Φ_{lo,hi}` per edge id; positive means `lo → hi`.
    pub flows: Vec<i64>,
    /// `2Δ · e_{lo,hi}` per edge id.
    pub errors: Vec<i64>,
    pub scale: i64,
    pub post_loads: LoadState,
}

impl StepRecord {
    pub fn error(&self, edge: usize) -> Ratio<i64> {
        Ratio::new(self.errors[edge], self.scale)
    }

    /// Rounding error allocated to every vertex: `Σ_j e_{v,j}`, scaled by `2Δ`.
    pub fn vertex_errors(&self, matrix: &DiffusionMatrix) -> Vec<i64> {
        let mut out = vec![0i64; matrix.n()];
        for (e, &err) in matrix.graph().edges().iter().zip(&self.errors) {
            out[e.lo] += err;
            out[e.hi] -= err;
        }
        out
    }
}

/// One synchronous step of the discrete process.
///
/// For every edge `[i:j]` the fractional flow `f = P_ij x_i - P_ji x_j` is
/// rounded to `Φ ∈ {⌊f⌋, ⌈f⌉}` according to `policy`, the error `f - Φ` is
/// added to `ledger`, and `Φ` tokens move from `i` to `j`.
pub fn discrete_step(
    x: &LoadState,
    matrix: &DiffusionMatrix,
    policy: &RoundingPolicy,
    ledger: &mut EdgeLedger,
) -> Result<StepRecord> {
    let g = matrix.graph();
    if x.values.len() != g.n() {
        return Err(Error::Mismatch {
            expected: g.n(),
            actual: x.values.len(),
        });
    }
    if ledger.policy != policy.name() {
        return Err(Error::LedgerPolicy {
            ledger: ledger.policy,
            policy: policy.name(),
        });
    }
    if ledger.len() != g.edge_count() || ledger.scale != matrix.scale() {
        return Err(Error::Mismatch {
            expected: g.edge_count(),
            actual: ledger.len(),
        });
    }
    let scale = matrix.scale();
    let step = x.step + 1;
    let mut rng = match policy {
        RoundingPolicy::Randomized { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            rng.set_stream(step);
            Some(rng)
        }
        _ => None,
    };

    let m = g.edge_count();
    let mut flows = Vec::with_capacity(m);
    let mut errors = Vec::with_capacity(m);
    let mut next = x.values.clone();
    for (k, edge) in g.edges().iter().enumerate() {
        let (xi, xj) = (x.values[edge.lo], x.values[edge.hi]);
        // scaled fractional flow: 2Δ·f = x_i - x_j
        let diff = xi
            .checked_sub(xj)
            .ok_or(Error::Overflow { vertex: edge.lo })?;
        let floor = diff.div_euclid(scale);
        let rem = diff.rem_euclid(scale);
        let flow = if rem == 0 {
            floor
        } else {
            match policy {
                RoundingPolicy::Quasirandom { tie_break } => {
                    let acc = ledger.accumulated[k];
                    let down = (acc + rem).abs();
                    let up = (acc + rem - scale).abs();
                    match down.cmp(&up) {
                        std::cmp::Ordering::Less => floor,
                        std::cmp::Ordering::Greater => floor + 1,
                        std::cmp::Ordering::Equal => {
                            let ctx = TieContext {
                                edge: *edge,
                                step,
                                ledger: Ratio::new(acc, scale),
                                flow: Ratio::new(diff, scale),
                            };
                            match tie_break.choose(&ctx) {
                                Rounding::Down => floor,
                                Rounding::Up => floor + 1,
                            }
                        }
                    }
                }
                // integer division truncates toward zero
                RoundingPolicy::Rsw => diff / scale,
                RoundingPolicy::Randomized { .. } => {
                    let rng = rng.as_mut().expect("randomized policy has a stream");
                    if rng.random_range(0..scale) < rem {
                        floor + 1
                    } else {
                        floor
                    }
                }
            }
        };
        let err = diff - scale * flow;
        ledger.accumulated[k] += err;
        next[edge.lo] = next[edge.lo]
            .checked_sub(flow)
            .ok_or(Error::Overflow { vertex: edge.lo })?;
        next[edge.hi] = next[edge.hi]
            .checked_add(flow)
            .ok_or(Error::Overflow { vertex: edge.hi })?;
        flows.push(flow);
        errors.push(err);
    }
    Ok(StepRecord {
        step,
        flows,
        errors,
        scale,
        post_loads: LoadState { step, values: next },
    })
}

/// `max_v |x_v - ξ_v|`.
pub fn deviation(x: &LoadState, xi: &IdealState) -> Result<f64> {
    if x.step != xi.step {
        return Err(Error::Precondition(format!(
            "deviation between step {} and idealized step {}",
            x.step, xi.step
        )));
    }
    match &xi.loads {
        IdealLoads::Float(v) => deviation_f64(&x.values, v),
        IdealLoads::Exact(e) => Ok(e.max_deviation(&x.values)?.to_f64().unwrap_or(f64::NAN)),
    }
}

pub fn deviation_f64(x: &[i64], xi: &[f64]) -> Result<f64> {
    if x.len() != xi.len() {
        return Err(Error::Mismatch {
            expected: x.len(),
            actual: xi.len(),
        });
    }
    Ok(x.iter()
        .zip(xi)
        .map(|(&a, &b)| (a as f64 - b).abs())
        .fold(0.0, f64::max))
}

/// A discrete run in progress, optionally with the idealized process
/// tracked alongside from the same initial vector.
#[derive(Debug, Clone)]
pub struct Simulator {
    matrix: DiffusionMatrix,
    policy: RoundingPolicy,
    ledger: EdgeLedger,
    loads: LoadState,
    ideal: Option<IdealState>,
}

impl Simulator {
    pub fn new(
        matrix: DiffusionMatrix,
        x0: Vec<i64>,
        policy: RoundingPolicy,
        mode: IdealMode,
    ) -> Result<Self> {
        if x0.len() != matrix.n() {
            return Err(Error::Mismatch {
                expected: matrix.n(),
                actual: x0.len(),
            });
        }
        let ledger = EdgeLedger::new(&matrix, &policy);
        let ideal = IdealState::from_integers(&x0, &matrix, mode);
        Ok(Self {
            matrix,
            policy,
            ledger,
            loads: LoadState::new(x0),
            ideal,
        })
    }

    pub fn step(&mut self) -> Result<StepRecord> {
        let record = discrete_step(&self.loads, &self.matrix, &self.policy, &mut self.ledger)?;
        self.loads = record.post_loads.clone();
        if let Some(ideal) = &self.ideal {
            self.ideal = Some(ideal_step(ideal, &self.matrix)?);
        }
        Ok(record)
    }

    pub fn loads(&self) -> &LoadState {
        &self.loads
    }

    pub fn ideal(&self) -> Option<&IdealState> {
        self.ideal.as_ref()
    }

    pub fn ledger(&self) -> &EdgeLedger {
        &self.ledger
    }

    pub fn matrix(&self) -> &DiffusionMatrix {
        &self.matrix
    }

    pub fn policy(&self) -> &RoundingPolicy {
        &self.policy
    }

    /// Current deviation from the idealized process, if it is tracked.
    pub fn deviation(&self) -> Option<Result<f64>> {
        self.ideal.as_ref().map(|xi| deviation(&self.loads, xi))
    }
}

/// A complete run: every step record and, optionally, the idealized
/// trajectory (index `t` holds `ξ^(t)`, starting with `ξ^(0) = x^(0)`).
#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub initial: LoadState,
    pub steps: Vec<StepRecord>,
    pub ideal: Vec<IdealState>,
    /// Ledger after the last step.
    pub final_ledger: EdgeLedger,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `x^(t)` for `t = 0..=T`.
    pub fn loads_at(&self, t: usize) -> &LoadState {
        if t == 0 {
            &self.initial
        } else {
            &self.steps[t - 1].post_loads
        }
    }

    pub fn has_ideal(&self) -> bool {
        !self.ideal.is_empty()
    }

    pub fn discrepancies(&self) -> Vec<i64> {
        (0..=self.len())
            .map(|t| self.loads_at(t).discrepancy())
            .collect()
    }

    /// Deviation from the idealized process at every `t = 0..=T`.
    pub fn deviations(&self) -> Result<Vec<f64>> {
        if !self.has_ideal() {
            return Err(Error::Missing("trace has no idealized trajectory".into()));
        }
        (0..=self.len())
            .map(|t| deviation(self.loads_at(t), &self.ideal[t]))
            .collect()
    }

    pub fn max_deviation(&self) -> Result<f64> {
        Ok(self.deviations()?.into_iter().fold(0.0, f64::max))
    }

    /// Writes `step,vertex,load,ideal_load` rows.
    pub fn write_loads_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "vertex", "load", "ideal_load"])?;
        for t in 0..=self.len() {
            let ideal = self.ideal.get(t).map(|s| s.loads.to_f64());
            for (v, load) in self.loads_at(t).values.iter().enumerate() {
                let ideal_load = ideal.as_ref().map(|i| i[v].to_string()).unwrap_or_default();
                w.write_record([t.to_string(), v.to_string(), load.to_string(), ideal_load])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `step,lo,hi,flow,error,accumulated` rows, one per edge and step.
    pub fn write_ledger_csv<W: Write>(&self, matrix: &DiffusionMatrix, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "lo", "hi", "flow", "error", "accumulated"])?;
        let edges = matrix.graph().edges();
        let scale = matrix.scale() as f64;
        let mut acc = vec![0i64; edges.len()];
        for rec in &self.steps {
            for (k, e) in edges.iter().enumerate() {
                acc[k] += rec.errors[k];
                w.write_record([
                    rec.step.to_string(),
                    e.lo.to_string(),
                    e.hi.to_string(),
                    rec.flows[k].to_string(),
                    (rec.errors[k] as f64 / scale).to_string(),
                    (acc[k] as f64 / scale).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `steps` discrete steps from `x0`, recording everything.
pub fn run(
    matrix: &DiffusionMatrix,
    x0: Vec<i64>,
    policy: &RoundingPolicy,
    steps: usize,
    mode: IdealMode,
) -> Result<SimulationTrace> {
    let mut sim = Simulator::new(matrix.clone(), x0, policy.clone(), mode)?;
    let initial = sim.loads().clone();
    let mut records = Vec::with_capacity(steps);
    let mut ideal: Vec<IdealState> = sim.ideal().cloned().into_iter().collect();
    for _ in 0..steps {
        records.push(sim.step()?);
        if let Some(xi) = sim.ideal() {
            ideal.push(xi.clone());
        }
    }
    Ok(SimulationTrace {
        initial,
        steps: records,
        ideal,
        final_ledger: sim.ledger.clone(),
    })
}

/// Checks the error decomposition
///
/// ```text
/// x_ℓ^(t) - ξ_ℓ^(t) = Σ_{s=0}^{t-1} Σ_{[i:j]} e_{i,j}^(t-s) (P^s_{ℓ,i} - P^s_{ℓ,j})
/// ```
///
/// in double precision and returns the largest residual over all `t` and
/// `ℓ`. The right-hand side is summed term by term (`O(T²)` matrix-vector
/// products), independently of how the simulation advanced.
pub fn verify_standard_ansatz(trace: &SimulationTrace, matrix: &DiffusionMatrix) -> Result<f64> {
    if !trace.has_ideal() {
        return Err(Error::Missing(
            "ansatz check needs the idealized trajectory".into(),
        ));
    }
    let n = matrix.n();
    let big_t = trace.len();
    let scale = matrix.scale() as f64;
    let mut rhs = vec![vec![0.0f64; n]; big_t + 1];
    for (r_idx, rec) in trace.steps.iter().enumerate() {
        let r = r_idx + 1;
        let mut v: Vec<f64> = rec
            .vertex_errors(matrix)
            .iter()
            .map(|&e| e as f64 / scale)
            .collect();
        // v = P^s E^(r) contributes to time t = r + s
        for slot in rhs.iter_mut().skip(r) {
            for (acc, x) in slot.iter_mut().zip(&v) {
                *acc += x;
            }
            v = matrix.apply_unchecked(&v);
        }
    }
    let mut worst = 0.0f64;
    for (t, rhs_t) in rhs.iter().enumerate() {
        let x = &trace.loads_at(t).values;
        let xi = trace.ideal[t].loads.to_f64();
        for l in 0..n {
            let lhs = x[l] as f64 - xi[l];
            worst = worst.max((lhs - rhs_t[l]).abs());
        }
    }
    Ok(worst)
}

/// Exact-arithmetic version of [`verify_standard_ansatz`]; needs a trace
/// recorded with [`IdealMode::Exact`]. Returns the largest residual, which
/// should be exactly zero.
pub fn verify_standard_ansatz_exact(
    trace: &SimulationTrace,
    matrix: &DiffusionMatrix,
) -> Result<BigRational> {
    if trace.ideal.iter().any(|s| s.loads.as_exact().is_none()) || !trace.has_ideal() {
        return Err(Error::Missing(
            "exact ansatz check needs an exact idealized trajectory".into(),
        ));
    }
    let n = matrix.n();
    let g = matrix.graph();
    let big_scale = BigInt::from(matrix.scale());
    let apply = |v: &[BigRational]| -> Vec<BigRational> {
        (0..n)
            .map(|i| {
                let mut acc =
                    &v[i] * BigRational::from_integer(BigInt::from(matrix.scaled_diagonal(i)));
                for &w in g.neighbors(i) {
                    acc += &v[w];
                }
                acc / BigRational::from_integer(big_scale.clone())
            })
            .collect()
    };
    let big_t = trace.len();
    let mut rhs = vec![vec![BigRational::zero(); n]; big_t + 1];
    for (r_idx, rec) in trace.steps.iter().enumerate() {
        let r = r_idx + 1;
        let mut v: Vec<BigRational> = rec
            .vertex_errors(matrix)
            .iter()
            .map(|&e| BigRational::new(BigInt::from(e), big_scale.clone()))
            .collect();
        for slot in rhs.iter_mut().skip(r) {
            for (acc, x) in slot.iter_mut().zip(&v) {
                *acc += x;
            }
            v = apply(&v);
        }
    }
    let mut worst = BigRational::zero();
    for (t, rhs_t) in rhs.iter().enumerate() {
        let x = &trace.loads_at(t).values;
        let xi = trace.ideal[t].loads.as_exact().expect("checked above");
        for l in 0..n {
            let lhs = BigRational::from_integer(BigInt::from(x[l])) - xi.value(l);
            let r = (lhs - &rhs_t[l]).abs();
            if r > worst {
                worst = r;
            }
        }
    }
    Ok(worst)
}

/// Virtual tokens for avoiding negative loads: every vertex starts with
/// `gamma` extra tokens that are removed again at the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualTokens {
    pub gamma: i64,
}

impl VirtualTokens {
    pub fn new(gamma: i64) -> Result<Self> {
        if gamma < 0 {
            return Err(Error::Precondition(format!(
                "gamma must be >= 0, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn wrap(&self, x0: &[i64]) -> Vec<i64> {
        x0.iter().map(|&v| v + self.gamma).collect()
    }

    pub fn finalize(&self, x: &[i64]) -> Vec<i64> {
        x.iter().map(|&v| v - self.gamma).collect()
    }
}

/// Adds `gamma` virtual tokens to every vertex; the returned wrapper removes
/// them again.
pub fn virtual_token_wrap(x0: &[i64], gamma: i64) -> Result<(Vec<i64>, VirtualTokens)> {
    let tokens = VirtualTokens::new(gamma)?;
    Ok((tokens.wrap(x0), tokens))
}
