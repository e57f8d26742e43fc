//! Transition and first-passage probabilities of random walks, with the
//! shape certificates (log-concavity, unimodality, monotonicity) that the
//! hypercube deviation bound rests on.
//!
//! A [`PathChain`] is a birth-death chain on `0..=d` with loop probability
//! `α_i`, up probability `β_i` and down probability `1 - α_i - β_i`. When
//! every `α_i ≥ 1/2` the first-passage time from `0` to `d` is a sum of `d`
//! independent geometric variables whose parameters are `1 - b_i`, with `b_i`
//! the eigenvalues of the chain restricted to `0..d` ([`fill_decomposition`]).
//! It is therefore log-concave.
//!
//! Projecting the lazy hypercube walk onto Hamming weight gives the
//! Ehrenfest chain ([`ehrenfest_chain`]); `P_{0,j}(t)` on the cube equals the
//! chain's `P_{0,|j|}(t) / C(d, |j|)`.

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::processes::ExactLoads;
use crate::topology::DiffusionMatrix;

/// Probabilities below this are treated as zero by the shape tests.
pub const UNDERFLOW: f64 = 1e-300;
/// Relative tolerance of the log-concavity test.
pub const LOG_CONCAVE_TOL: f64 = 1e-12;
/// Absolute tolerance for plateaus in monotonicity and unimodality tests.
pub const PLATEAU_TOL: f64 = 1e-12;
/// Upper bound on `n · T` for iterated transition computations.
pub const TRANSITION_BUDGET: usize = 2_000_000_000;

/// A sparse row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    /// Validates nonnegativity and unit row sums (to 1e-12).
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row
                .iter()
                .any(|&(j, p)| j >= n || p < 0.0 || !p.is_finite())
            {
                return Err(Error::Precondition(format!("row {i} has an invalid entry")));
            }
            let sum: f64 = row.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Precondition(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn from_dense(m: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows(
            m.iter()
                .map(|row| {
                    row.iter()
                        .copied()
                        .enumerate()
                        .filter(|&(_, p)| p != 0.0)
                        .collect()
                })
                .collect(),
        )
    }

    pub fn from_diffusion(p: &DiffusionMatrix) -> Self {
        let rows = (0..p.n())
            .map(|i| {
                let mut row: Vec<(usize, f64)> = p
                    .graph()
                    .neighbors(i)
                    .iter()
                    .map(|&j| (j, p.entry_f64(i, j)))
                    .collect();
                row.push((i, p.entry_f64(i, i)));
                row.sort_by_key(|&(j, _)| j);
                row
            })
            .collect();
        Self { rows }
    }

    pub fn from_path_chain(chain: &PathChain) -> Self {
        let d = chain.d();
        let rows = (0..=d)
            .map(|i| {
                let mut row = Vec::with_capacity(3);
                if i > 0 && chain.down(i) > 0.0 {
                    row.push((i - 1, chain.down(i)));
                }
                row.push((i, chain.alpha[i]));
                if i < d && chain.beta[i] > 0.0 {
                    row.push((i + 1, chain.beta[i]));
                }
                row
            })
            .collect();
        Self { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|&&(j, _)| j == i)
            .map_or(0.0, |&(_, p)| p)
    }

    /// `μ ↦ μM` for a row distribution `μ`.
    pub fn step_distribution(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (i, row) in self.rows.iter().enumerate() {
            let m = mu[i];
            if m != 0.0 {
                for &(j, p) in row {
                    out[j] += m * p;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqKind {
    FirstPassage,
    Transition,
    Generic,
}

/// A probability sequence `p(0), p(1), ..., p(T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistSeq {
    pub values: Vec<f64>,
    pub kind: SeqKind,
}

impl DistSeq {
    pub fn new(values: Vec<f64>, kind: SeqKind) -> Self {
        Self { values, kind }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &DistSeq) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_budget(n: usize, steps: usize) -> Result<()> {
    match n.checked_mul(steps.max(1)) {
        Some(work) if work <= TRANSITION_BUDGET => Ok(()),
        _ => Err(Error::Budget(format!(
            "n = {n}, T = {steps} exceeds {TRANSITION_BUDGET}"
        ))),
    }
}

/// `P^t[i][j]` for `t = 0..=T` by iterating the distribution started at `i`.
pub fn transition_prob(m: &TransitionMatrix, i: usize, j: usize, steps: usize) -> Result<DistSeq> {
    let n = m.n();
    if i >= n || j >= n {
        return Err(Error::Size(format!("state outside 0..{n}")));
    }
    check_budget(n, steps)?;
    let mut mu = vec![0.0; n];
    mu[i] = 1.0;
    let mut values = Vec::with_capacity(steps + 1);
    values.push(mu[j]);
    for _ in 0..steps {
        mu = m.step_distribution(&mu);
        values.push(mu[j]);
    }
    Ok(DistSeq::new(values, SeqKind::Transition))
}

/// Exact `P^t[i][j]` of a diffusion matrix, `t = 0..=T`.
pub fn transition_prob_exact(
    p: &DiffusionMatrix,
    i: usize,
    j: usize,
    steps: usize,
) -> Result<Vec<BigRational>> {
    let n = p.n();
    if i >= n || j >= n {
        return Err(Error::Size(format!("state outside 0..{n}")));
    }
    check_budget(n, steps)?;
    let mut unit = vec![0i64; n];
    unit[i] = 1;
    // P is symmetric, so the row distribution of i evolves like a load vector
    let mut mu = ExactLoads::from_integers(&unit, p.scale());
    let mut out = Vec::with_capacity(steps + 1);
    out.push(mu.value(j));
    for _ in 0..steps {
        mu = mu.step(p);
        out.push(mu.value(j));
    }
    Ok(out)
}

/// Birth-death chain on `0..=d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathChainDoc", into = "PathChainDoc")]
pub struct PathChain {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PathChainDoc {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl TryFrom<PathChainDoc> for PathChain {
    type Error = Error;

    fn try_from(doc: PathChainDoc) -> Result<Self> {
        PathChain::new(doc.alpha, doc.beta)
    }
}

impl From<PathChain> for PathChainDoc {
    fn from(c: PathChain) -> Self {
        Self {
            alpha: c.alpha,
            beta: c.beta,
        }
    }
}

const PROB_TOL: f64 = 1e-12;

impl PathChain {
    /// `alpha` and `beta` have one entry per state `0..=d`; `beta[d]` must be
    /// 0 and state 0 must not move down (`α_0 + β_0 = 1`).
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::Mismatch {
                expected: alpha.len(),
                actual: beta.len(),
            });
        }
        if alpha.len() < 2 {
            return Err(Error::Size("a path chain needs at least two states".into()));
        }
        let d = alpha.len() - 1;
        for i in 0..=d {
            let (a, b) = (alpha[i], beta[i]);
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a + b > 1.0 + PROB_TOL {
                return Err(Error::Precondition(format!(
                    "state {i}: α = {a}, β = {b} not a distribution"
                )));
            }
            if i < d && b <= 0.0 {
                return Err(Error::Precondition(format!(
                    "state {i} must move up with positive probability"
                )));
            }
        }
        if beta[d] != 0.0 {
            return Err(Error::Precondition("the last state cannot move up".into()));
        }
        if (1.0 - alpha[0] - beta[0]).abs() > PROB_TOL {
            return Err(Error::Precondition("state 0 cannot move down".into()));
        }
        Ok(Self { alpha, beta })
    }

    /// Number of edges; states are `0..=d`.
    pub fn d(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn down(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            (1.0 - self.alpha[i] - self.beta[i]).max(0.0)
        }
    }

    /// All loop probabilities are at least 1/2.
    pub fn is_lazy(&self) -> bool {
        self.alpha.iter().all(|&a| a >= 0.5)
    }
}

/// Lazy projection of the `d`-cube walk onto Hamming weight: from weight `k`
/// move up with probability `(d-k)/(2d)`, down with `k/(2d)`, stay with 1/2.
pub fn ehrenfest_chain(d: usize) -> Result<PathChain> {
    if d == 0 {
        return Err(Error::Dimension("Ehrenfest chain needs d >= 1".into()));
    }
    let alpha = vec![0.5; d + 1];
    let beta = (0..=d).map(|k| (d - k) as f64 / (2 * d) as f64).collect();
    PathChain::new(alpha, beta)
}

/// First-passage probabilities `f_{0,d}(t)`, `t = 0..=T`, computed by making
/// state `d` absorbing and recording the mass absorbed at each step.
pub fn first_passage_path(chain: &PathChain, steps: usize) -> DistSeq {
    DistSeq::new(
        absorption_times(chain, 0, chain.d(), steps),
        SeqKind::FirstPassage,
    )
}

/// Mass absorbed at `target` per step for the chain restricted to
/// `0..target` and started at `start`.
fn absorption_times(chain: &PathChain, start: usize, target: usize, steps: usize) -> Vec<f64> {
    let mut mu = vec![0.0; target];
    mu[start] = 1.0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(0.0);
    for _ in 0..steps {
        let mut next = vec![0.0; target];
        for i in 0..target {
            let m = mu[i];
            if m == 0.0 {
                continue;
            }
            next[i] += m * chain.alpha[i];
            if i + 1 < target {
                next[i + 1] += m * chain.beta[i];
            }
            if i > 0 {
                next[i - 1] += m * chain.down(i);
            }
        }
        out.push(mu[target - 1] * chain.beta[target - 1]);
        mu = next;
    }
    out
}

/// `f_{0,d} = f_{0,1} * f_{1,2} * ... * f_{d-1,d}`, each factor computed as
/// its own absorption problem. Cross-check for [`first_passage_path`].
pub fn first_passage_by_convolution(chain: &PathChain, steps: usize) -> DistSeq {
    let mut acc = vec![0.0; steps + 1];
    acc[0] = 1.0;
    for i in 0..chain.d() {
        let edge = absorption_times(chain, i, i + 1, steps);
        acc = convolve(&acc, &edge, steps);
    }
    DistSeq::new(acc, SeqKind::FirstPassage)
}

fn convolve(a: &[f64], b: &[f64], steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|t| (0..=t).map(|s| a[s] * b[t - s]).sum())
        .collect()
}

/// `Geo(p)(t) = (1-p)^(t-1) p` for `t >= 1`, and 0 at `t = 0`.
pub fn geometric(p: f64, t: usize) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Precondition(format!(
            "geometric parameter {p} outside (0, 1]"
        )));
    }
    Ok(if t == 0 {
        0.0
    } else {
        (1.0 - p).powi(t as i32 - 1) * p
    })
}

/// Distribution of a sum of independent `Geo(p_i)` variables up to `T`.
///
/// Uses `(g * Geo(p))(t) = (1-p)·(g * Geo(p))(t-1) + p·g(t-1)`.
pub fn geometric_convolution(params: &[f64], steps: usize) -> Result<DistSeq> {
    if let Some(&p) = params.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::Precondition(format!(
            "geometric parameter {p} outside (0, 1]"
        )));
    }
    let mut acc = vec![0.0; steps + 1];
    acc[0] = 1.0;
    for &p in params {
        let mut next = vec![0.0; steps + 1];
        for t in 1..=steps {
            next[t] = (1.0 - p) * next[t - 1] + p * acc[t - 1];
        }
        acc = next;
    }
    Ok(DistSeq::new(acc, SeqKind::FirstPassage))
}

/// Geometric parameters `1 - b_i` whose convolution is `f_{0,d}`.
///
/// `b_i` are the eigenvalues of the chain restricted to `0..d` (state `d`
/// removed). That matrix is tridiagonal with positive off-diagonal products,
/// hence similar to the symmetric tridiagonal matrix with off-diagonals
/// `sqrt(β_i · down_{i+1})`; its eigenvalues are found by Sturm bisection.
pub fn fill_decomposition(chain: &PathChain) -> Result<Vec<f64>> {
    if !chain.is_lazy() {
        return Err(Error::Precondition(
            "fill decomposition needs every α_i >= 1/2".into(),
        ));
    }
    let d = chain.d();
    let diag: Vec<f64> = chain.alpha[..d].to_vec();
    let off: Vec<f64> = (0..d.saturating_sub(1))
        .map(|i| (chain.beta[i] * chain.down(i + 1)).sqrt())
        .collect();
    let eig = tridiagonal_eigenvalues(&diag, &off);
    if let Some(&b) = eig
        .iter()
        .find(|&&b| !(b > -1e-9 && b < 1.0 + 1e-9) || b >= 1.0)
    {
        return Err(Error::Precondition(format!(
            "eigenvalue {b} outside (0, 1)"
        )));
    }
    Ok(eig.into_iter().map(|b| 1.0 - b).collect())
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`
/// (Sturm sequence count).
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Ascending eigenvalues of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (length `diag.len() - 1`).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let r =
            if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (0..n)
        .map(|k| {
            // k-th smallest: smallest x with sturm_count(x) > k
            let (mut a, mut b) = (lo - 1e-12, hi + 1e-12);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(diag, off, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

fn clean(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| if v.abs() < UNDERFLOW { 0.0 } else { v })
        .collect()
}

/// `f(i)² ≥ f(i-1)·f(i+1)` on the positive support, which must be contiguous.
pub fn is_log_concave(values: &[f64]) -> bool {
    let v = clean(values);
    if v.iter().any(|&x| x < 0.0) {
        return false;
    }
    let Some(first) = v.iter().position(|&x| x > 0.0) else {
        return true;
    };
    let last = v.iter().rposition(|&x| x > 0.0).unwrap_or(first);
    if v[first..=last].contains(&0.0) {
        return false;
    }
    (first + 1..last).all(|i| v[i] * v[i] >= v[i - 1] * v[i + 1] * (1.0 - LOG_CONCAVE_TOL))
}

/// Signs of consecutive differences, with changes within
/// [`PLATEAU_TOL`] counted as flat.
fn trend(values: &[f64]) -> Vec<i8> {
    let v = clean(values);
    v.windows(2)
        .filter_map(|w| {
            let d = w[1] - w[0];
            if d > PLATEAU_TOL {
                Some(1)
            } else if d < -PLATEAU_TOL {
                Some(-1)
            } else {
                None
            }
        })
        .collect()
}

/// Number of strict turning points, ignoring plateaus.
pub fn count_local_extrema(values: &[f64]) -> usize {
    trend(values).windows(2).filter(|w| w[0] != w[1]).count()
}

/// Non-decreasing up to some index, non-increasing afterwards.
pub fn is_unimodal(values: &[f64]) -> bool {
    let t = trend(values);
    match t.iter().position(|&s| s < 0) {
        Some(first_down) => t[first_down..].iter().all(|&s| s < 0),
        None => true,
    }
}

/// Non-decreasing up to [`PLATEAU_TOL`].
pub fn is_non_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] <= w[1] + PLATEAU_TOL)
}

/// Non-increasing up to [`PLATEAU_TOL`].
pub fn is_non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] + PLATEAU_TOL >= w[1])
}

/// Certification summary of one sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub log_concave: bool,
    pub unimodal: bool,
    pub extrema_count: usize,
}

pub fn certify(values: &[f64]) -> Certificate {
    Certificate {
        log_concave: is_log_concave(values),
        unimodal: is_unimodal(values),
        extrema_count: count_local_extrema(values),
    }
}

/// `C(n, k)` as a float (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k)
        .fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        .round()
}

/// Probability that the Ehrenfest chain started at weight 0 is at weight
/// `ell` after `t` steps, `t = 0..=T`.
pub fn ehrenfest_transition(d: usize, ell: usize, steps: usize) -> Result<DistSeq> {
    if ell > d {
        return Err(Error::Size(format!("weight {ell} exceeds d = {d}")));
    }
    let chain = ehrenfest_chain(d)?;
    transition_prob(&TransitionMatrix::from_path_chain(&chain), 0, ell, steps)
}

/// `P_{0,j}(t)` on the `d`-cube through the weight projection
/// `P_{0,|j|}(t) / C(d, |j|)`.
pub fn hypercube_transition_via_projection(d: usize, j: usize, steps: usize) -> Result<DistSeq> {
    if d == 0 || j >= 1usize << d {
        return Err(Error::Size(format!("vertex {j} not in the {d}-cube")));
    }
    let ell = j.count_ones() as usize;
    let mut seq = ehrenfest_transition(d, ell, steps)?;
    let c = binomial(d, ell);
    seq.values.iter_mut().for_each(|v| *v /= c);
    Ok(seq)
}

/// `P_{0,ℓ}(t)` for one vertex of weight `ℓ`, from the distribution of the
/// number of distinct coordinates chosen in `t` steps:
///
/// ```text
/// P_{0,ℓ}(t) = Σ_{k=ℓ}^{d} Pr[k chosen] · 2^{-k} · C(d-ℓ, k-ℓ) / C(d, k)
/// ```
pub fn balls_and_bins_transition(d: usize, ell: usize, steps: usize) -> Result<DistSeq> {
    if d == 0 || ell > d {
        return Err(Error::Size(format!("weight {ell} not valid for d = {d}")));
    }
    let weight: Vec<f64> = (0..=d)
        .map(|k| {
            if k < ell {
                0.0
            } else {
                0.5f64.powi(k as i32) * binomial(d - ell, k - ell) / binomial(d, k)
            }
        })
        .collect();
    let mut chosen = vec![0.0; d + 1];
    chosen[0] = 1.0;
    let mut values = Vec::with_capacity(steps + 1);
    let eval = |c: &[f64]| c.iter().zip(&weight).map(|(a, b)| a * b).sum::<f64>();
    values.push(eval(&chosen));
    let df = d as f64;
    for _ in 0..steps {
        let next: Vec<f64> = (0..=d)
            .map(|k| {
                let stay = chosen[k] * k as f64 / df;
                let grow = if k > 0 {
                    chosen[k - 1] * (d - k + 1) as f64 / df
                } else {
                    0.0
                };
                stay + grow
            })
            .collect();
        chosen = next;
        values.push(eval(&chosen));
    }
    Ok(DistSeq::new(values, SeqKind::Transition))
}

/// For every state `i`, whether `P^t[i][i]` is non-increasing for `t < T`.
/// Requires every diagonal entry to be at least 1/2.
pub fn check_diag_monotone(m: &TransitionMatrix, steps: usize) -> Result<Vec<bool>> {
    if let Some(i) = (0..m.n()).find(|&i| m.diagonal(i) < 0.5) {
        return Err(Error::Precondition(format!(
            "diagonal entry {} at state {i} is below 1/2",
            m.diagonal(i)
        )));
    }
    check_budget(m.n() * m.n(), steps)?;
    (0..m.n())
        .into_par_iter()
        .map(|i| Ok(is_non_increasing(&transition_prob(m, i, i, steps)?.values)))
        .collect()
}

/// Whether `P_{0,j}(t)` on the `d`-cube is non-decreasing in `t < T` for
/// every `j` with `|j| ≥ d/2`. By symmetry one vertex per weight suffices.
pub fn check_appendix_monotonicity(d: usize, steps: usize) -> Result<bool> {
    if d == 0 || d > 12 {
        return Err(Error::Dimension(format!(
            "appendix check supports 1 <= d <= 12, got {d}"
        )));
    }
    for ell in (0..=d).filter(|&l| 2 * l >= d) {
        if !is_non_decreasing(&balls_and_bins_transition(d, ell, steps)?.values) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The weighted suffix-sum domination lemma, checked exactly.
///
/// Given positive `a`, `b`, `c` with `Σ_{k≥j} a_k ≤ Σ_{k≥j} b_k` for every
/// `j` and `c` non-decreasing, returns `Some(true)` iff
/// `Σ_{k≥j} a_k c_k ≤ Σ_{k≥j} b_k c_k` for every `j`. Returns `None` when
/// the hypotheses do not hold.
pub fn weighted_suffix_dominance(
    a: &[BigRational],
    b: &[BigRational],
    c: &[BigRational],
) -> Option<bool> {
    let d = a.len();
    if b.len() != d || c.len() != d || d == 0 {
        return None;
    }
    let positive = |s: &[BigRational]| s.iter().all(|x| *x > BigRational::zero());
    if !positive(a) || !positive(b) || !positive(c) || c.windows(2).any(|w| w[0] > w[1]) {
        return None;
    }
    let (mut sa, mut sb) = (BigRational::zero(), BigRational::zero());
    let (mut wa, mut wb) = (BigRational::zero(), BigRational::zero());
    let mut holds = true;
    for k in (0..d).rev() {
        sa += &a[k];
        sb += &b[k];
        if sa > sb {
            return None;
        }
        wa += &a[k] * &c[k];
        wb += &b[k] * &c[k];
        holds &= wa <= wb;
    }
    Some(holds)
}
