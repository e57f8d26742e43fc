//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p quasidiff --test acceptance`. The process exits
//! with status 1 if any criterion fails.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use quasidiff::adversarial::{
    hypercube_halfload, max_deviation, randomized_halfload, rsw_stuck_instance, verify_bundle,
};
use quasidiff::harness::{derive_seed, random_loads};
use quasidiff::markov::{
    balls_and_bins_transition, check_appendix_monotonicity, check_diag_monotone,
    count_local_extrema, ehrenfest_chain, fill_decomposition, first_passage_path,
    geometric_convolution, hypercube_transition_via_projection, is_log_concave, is_unimodal,
    transition_prob, weighted_suffix_dominance, PathChain, TransitionMatrix,
};
use quasidiff::processes::{
    discrepancy_f64, ideal_step, run, verify_standard_ansatz, verify_standard_ansatz_exact,
    IdealMode, IdealState, RoundingPolicy, Simulator,
};
use quasidiff::spectral::{closed_form_lambda2, convergence_bound, numeric_lambda2};
use quasidiff::{DiffusionMatrix, Graph};

/// Ceiling on the largest per-vertex deviation of quasirandom rounding on
/// the acceptance tori (K = 100, 10 seeds each). A pilot over a separate
/// seed family (master seed 40) peaked at 5.44 on 8x8x8; the cap is about
/// 1.5 times that.
const TORUS_DEVIATION_CAP: f64 = 8.0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn matrix(g: Graph) -> DiffusionMatrix {
    DiffusionMatrix::new(g).expect("graph has edges")
}

fn rsw_fixed_point() -> Outcome {
    let start = Instant::now();
    let graphs = [Graph::cycle(9), Graph::torus(&[4, 4]), Graph::hypercube(4)];
    for g in graphs {
        let g = g.map_err(|e| e.to_string())?;
        let v = verify_bundle(&rsw_stuck_instance(&g, 0, 500).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        if v.passed != Some(true) {
            return Err(format!("n = {}: {}", g.n(), v.detail));
        }
    }
    let took = start.elapsed();
    check(
        took < Duration::from_secs(1),
        format!("3 graphs unchanged for 500 steps in {took:.2?}"),
    )
}

fn hypercube_upper_bound() -> Outcome {
    let start = Instant::now();
    let cases: Vec<(u32, u64)> = [4u32, 6, 8, 10]
        .iter()
        .flat_map(|&d| (0..10).map(move |s| (d, s)))
        .collect();
    let results: Vec<Result<(u32, f64), String>> = cases
        .par_iter()
        .map(|&(d, s)| {
            let p = matrix(Graph::hypercube(d).map_err(|e| e.to_string())?);
            let x0 = random_loads(p.n(), 100, derive_seed(2, u64::from(d) * 100 + s))
                .map_err(|e| e.to_string())?;
            let mut sim = Simulator::new(p, x0, RoundingPolicy::quasirandom(), IdealMode::Exact)
                .map_err(|e| e.to_string())?;
            let bound = BigRational::from_integer(BigInt::from(2 * d));
            let mut worst = BigRational::zero();
            for _ in 0..20 * d * d {
                sim.step().map_err(|e| e.to_string())?;
                let exact = sim
                    .ideal()
                    .and_then(|xi| xi.loads.as_exact())
                    .expect("exact ideal");
                let dev = exact
                    .max_deviation(&sim.loads().values)
                    .map_err(|e| e.to_string())?;
                if dev > worst {
                    worst = dev;
                }
            }
            if worst > bound {
                return Err(format!("d = {d}, seed {s}: deviation {worst} > {bound}"));
            }
            Ok((
                d,
                num_traits::ToPrimitive::to_f64(&worst).unwrap_or(f64::NAN),
            ))
        })
        .collect();
    let mut per_d = [0.0f64; 11];
    for r in results {
        let (d, w) = r?;
        per_d[d as usize] = per_d[d as usize].max(w);
    }
    let took = start.elapsed();
    check(
        took < Duration::from_secs(120),
        format!(
            "max deviation d=4: {}, d=6: {}, d=8: {}, d=10: {} (bound 2d) in {took:.1?}",
            per_d[4], per_d[6], per_d[8], per_d[10]
        ),
    )
}

fn hypercube_lower_bound() -> Outcome {
    let mut parts = vec![];
    for d in [4u32, 8] {
        let v = verify_bundle(&hypercube_halfload(d, 100).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        if v.passed != Some(true) || v.measured != f64::from(d) / 2.0 {
            return Err(format!("d = {d}: {}", v.detail));
        }
        parts.push(format!("d={d}: deviation {}", v.measured));
    }
    Ok(format!(
        "{}; period 2 and zero ledgers for 100 steps",
        parts.join(", ")
    ))
}

fn torus_constant_deviation() -> Outcome {
    let start = Instant::now();
    let sizes: [&[usize]; 5] = [&[8, 8], &[16, 16], &[32, 32], &[4, 4, 4], &[8, 8, 8]];
    let cases: Vec<(usize, u64)> = (0..sizes.len())
        .flat_map(|i| (0..10).map(move |s| (i, s)))
        .collect();
    let results: Vec<Result<(usize, f64), String>> = cases
        .par_iter()
        .map(|&(i, s)| {
            let dims = sizes[i];
            let p = matrix(Graph::torus(dims).map_err(|e| e.to_string())?);
            let x0 = random_loads(p.n(), 100, derive_seed(4, (i as u64) * 100 + s))
                .map_err(|e| e.to_string())?;
            let steps = 10 * dims[0] * dims[0];
            let dev = max_deviation(&p, &x0, &RoundingPolicy::quasirandom(), steps)
                .map_err(|e| e.to_string())?;
            Ok((i, dev))
        })
        .collect();
    let mut per_size = vec![0.0f64; sizes.len()];
    for r in results {
        let (i, dev) = r?;
        per_size[i] = per_size[i].max(dev);
    }
    let hi = per_size.iter().copied().fold(0.0, f64::max);
    let lo = per_size.iter().copied().fold(f64::INFINITY, f64::min);
    let listing: Vec<String> = sizes
        .iter()
        .zip(&per_size)
        .map(|(d, v)| {
            let name: Vec<String> = d.iter().map(usize::to_string).collect();
            format!("{}: {v:.3}", name.join("x"))
        })
        .collect();
    let took = start.elapsed();
    check(
        hi <= TORUS_DEVIATION_CAP && hi <= 2.0 * lo && took < Duration::from_secs(600),
        format!(
            "{} (cap {TORUS_DEVIATION_CAP}, max/min {:.2}) in {took:.1?}",
            listing.join(", "),
            hi / lo
        ),
    )
}

fn ansatz_identity() -> Outcome {
    let graphs = [Graph::cycle(8), Graph::hypercube(4)];
    let policies = [
        RoundingPolicy::quasirandom(),
        RoundingPolicy::Rsw,
        RoundingPolicy::Randomized { seed: 5 },
    ];
    let mut worst = 0.0f64;
    for g in graphs {
        let p = matrix(g.map_err(|e| e.to_string())?);
        for policy in &policies {
            let x0 = random_loads(p.n(), 100, 11).map_err(|e| e.to_string())?;
            let trace = run(&p, x0, policy, 20, IdealMode::Exact).map_err(|e| e.to_string())?;
            let float = verify_standard_ansatz(&trace, &p).map_err(|e| e.to_string())?;
            let exact = verify_standard_ansatz_exact(&trace, &p).map_err(|e| e.to_string())?;
            if float > 1e-9 || !exact.is_zero() {
                return Err(format!(
                    "n = {}, {}: residual {float:e}, exact {exact}",
                    p.n(),
                    policy.label()
                ));
            }
            worst = worst.max(float);
        }
    }
    Ok(format!(
        "6 runs, largest double residual {worst:.1e}, exact residual 0"
    ))
}

fn random_lazy_chain(rng: &mut ChaCha8Rng) -> PathChain {
    let d = rng.random_range(1..=6usize);
    let mut alpha = Vec::with_capacity(d + 1);
    let mut beta = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let a = rng.random_range(0.5..0.95);
        let b = if i == 0 {
            1.0 - a
        } else if i == d {
            0.0
        } else {
            (1.0 - a) * rng.random_range(0.05..=1.0)
        };
        alpha.push(a);
        beta.push(b);
    }
    PathChain::new(alpha, beta).expect("valid lazy chain")
}

fn random_chains() -> Vec<PathChain> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    (0..100).map(|_| random_lazy_chain(&mut rng)).collect()
}

fn fill_decomposition_matches() -> Outcome {
    let mut worst = 0.0f64;
    for (k, chain) in random_chains().iter().enumerate() {
        let params = fill_decomposition(chain).map_err(|e| format!("chain {k}: {e}"))?;
        if params.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(format!("chain {k}: parameter outside (0, 1): {params:?}"));
        }
        let conv = geometric_convolution(&params, 300).map_err(|e| e.to_string())?;
        let direct = first_passage_path(chain, 300);
        let diff = conv.max_abs_diff(&direct);
        if diff > 1e-10 {
            return Err(format!("chain {k}: pointwise difference {diff:e}"));
        }
        worst = worst.max(diff);
    }
    Ok(format!(
        "100 chains, largest pointwise difference {worst:.1e}"
    ))
}

fn certifiers() -> Outcome {
    for (k, chain) in random_chains().iter().enumerate() {
        if !is_log_concave(&first_passage_path(chain, 200).values) {
            return Err(format!("chain {k}: first passage not log-concave"));
        }
        let diag = check_diag_monotone(&TransitionMatrix::from_path_chain(chain), 200)
            .map_err(|e| e.to_string())?;
        if !diag.iter().all(|&b| b) {
            return Err(format!("chain {k}: diagonal not monotone"));
        }
    }
    for d in 1..=8u32 {
        let chain = ehrenfest_chain(d as usize).map_err(|e| e.to_string())?;
        if !is_log_concave(&first_passage_path(&chain, 200).values) {
            return Err(format!(
                "d = {d}: first passage to the antipode not log-concave"
            ));
        }
        let tm = TransitionMatrix::from_diffusion(&matrix(
            Graph::hypercube(d).map_err(|e| e.to_string())?,
        ));
        if !check_diag_monotone(&tm, 200)
            .map_err(|e| e.to_string())?
            .iter()
            .all(|&b| b)
        {
            return Err(format!("d = {d}: diagonal of the cube walk not monotone"));
        }
    }
    Ok("100 chains and hypercubes d = 1..8 certified".into())
}

fn hypercube_unimodality() -> Outcome {
    let mut worst = 0;
    for d in 1..=10usize {
        for ell in 0..=d {
            let j = (1usize << ell) - 1;
            let seq = hypercube_transition_via_projection(d, j, 500).map_err(|e| e.to_string())?;
            let extrema = count_local_extrema(&seq.values);
            if extrema > 1 || !is_unimodal(&seq.values) && ell > 0 {
                return Err(format!("d = {d}, weight {ell}: {extrema} extrema"));
            }
            worst = worst.max(extrema);
        }
    }
    Ok(format!("d = 1..10, all weights, at most {worst} extremum"))
}

fn three_way_identity() -> Outcome {
    let mut worst = 0.0f64;
    for d in 1..=8u32 {
        let tm = TransitionMatrix::from_diffusion(&matrix(
            Graph::hypercube(d).map_err(|e| e.to_string())?,
        ));
        for ell in 0..=d as usize {
            let j = (1usize << ell) - 1;
            let full = transition_prob(&tm, 0, j, 50).map_err(|e| e.to_string())?;
            let proj = hypercube_transition_via_projection(d as usize, j, 50)
                .map_err(|e| e.to_string())?;
            let balls =
                balls_and_bins_transition(d as usize, ell, 50).map_err(|e| e.to_string())?;
            let diff = full
                .max_abs_diff(&proj)
                .max(full.max_abs_diff(&balls))
                .max(proj.max_abs_diff(&balls));
            if diff > 1e-12 {
                return Err(format!("d = {d}, weight {ell}: difference {diff:e}"));
            }
            worst = worst.max(diff);
        }
    }
    Ok(format!("d = 1..8, t <= 50, largest difference {worst:.1e}"))
}

fn spectral_closed_forms() -> Outcome {
    let mut graphs = vec![];
    for a in 3..=6 {
        graphs.push(vec![a]);
        for b in 3..=6 {
            graphs.push(vec![a, b]);
            for c in 3..=6 {
                graphs.push(vec![a, b, c]);
            }
        }
    }
    let mut all: Vec<Graph> = graphs
        .iter()
        .map(|d| Graph::torus(d))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    all.extend((3..=64).map(|q| Graph::cycle(q).expect("cycle")));
    all.extend((1..=8).map(|d| Graph::hypercube(d).expect("hypercube")));
    let count = all.len();
    let worst = all
        .into_par_iter()
        .map(|g| {
            let closed = closed_form_lambda2(&g).ok_or("no closed form")?.lambda2;
            let n = g.n();
            let numeric = numeric_lambda2(&matrix(g))
                .map_err(|e| e.to_string())?
                .lambda2;
            let diff = (closed - numeric).abs();
            if diff > 1e-9 {
                return Err(format!("n = {n}: closed {closed}, numeric {numeric}"));
            }
            Ok(diff)
        })
        .collect::<Result<Vec<f64>, String>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut scaling = vec![];
    for q in [16usize, 32, 64] {
        let gap = 1.0
            - closed_form_lambda2(&Graph::cycle(q).expect("cycle"))
                .expect("closed form")
                .lambda2;
        let ratio = gap * (q * q) as f64 / std::f64::consts::PI.powi(2);
        if (ratio - 1.0).abs() > 0.1 {
            return Err(format!("cycle {q}: (1 - λ₂) q² / π² = {ratio}"));
        }
        scaling.push(format!("{ratio:.4}"));
    }
    Ok(format!(
        "{count} graphs, largest difference {worst:.1e}; gap·q²/π² = {}",
        scaling.join(", ")
    ))
}

fn convergence_bound_holds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pool = [
        "cycle:12",
        "cycle:31",
        "torus:5x7",
        "torus:4x4x4",
        "hypercube:5",
        "hypercube:7",
        "path:9",
        "torus:10x10",
    ];
    let mut slack = f64::INFINITY;
    for case in 0..20 {
        let spec: quasidiff::GraphSpec = pool[rng.random_range(0..pool.len())]
            .parse()
            .map_err(|e: quasidiff::Error| e.to_string())?;
        let p = matrix(spec.build().map_err(|e| e.to_string())?);
        let k = rng.random_range(10..=1000i64);
        let ell = rng.random_range(1..=5) as f64;
        let x0 = random_loads(p.n(), k, rng.random()).map_err(|e| e.to_string())?;
        let lambda2 = closed_form_lambda2(p.graph()).expect("closed form").lambda2;
        let bound = convergence_bound(lambda2, k as f64, p.n(), ell).map_err(|e| e.to_string())?;
        let mut xi = IdealState::from_f64(x0.iter().map(|&v| v as f64).collect());
        let mut t = 0u64;
        while discrepancy_f64(&xi.loads.to_f64()) > ell {
            if t >= bound {
                return Err(format!(
                    "case {case} ({spec}, K = {k}, ℓ = {ell}): not reached by {bound}"
                ));
            }
            xi = ideal_step(&xi, &p).map_err(|e| e.to_string())?;
            t += 1;
        }
        slack = slack.min(bound as f64 / t.max(1) as f64);
    }
    Ok(format!(
        "20 cases reached ℓ in time; smallest bound/actual ratio {slack:.2}"
    ))
}

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> BigRational {
    BigRational::new(
        BigInt::from(rng.random_range(lo..=hi)),
        BigInt::from(rng.random_range(1..=12i64)),
    )
}

fn appendix_monotonicity() -> Outcome {
    for d in 1..=10 {
        if !check_appendix_monotonicity(d, 300).map_err(|e| e.to_string())? {
            return Err(format!(
                "d = {d}: a high-weight transition probability decreases"
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..1000 {
        let len = rng.random_range(1..=8usize);
        // suffix surpluses D_j >= 0 with D_len = 0 give b_k = a_k + D_k - D_{k+1}
        let surplus: Vec<BigRational> = (0..len)
            .map(|_| random_rational(&mut rng, 0, 30))
            .chain(std::iter::once(BigRational::zero()))
            .collect();
        let mut a = Vec::with_capacity(len);
        let mut b = Vec::with_capacity(len);
        for k in 0..len {
            let step = &surplus[k] - &surplus[k + 1];
            let mut ak = random_rational(&mut rng, 1, 40);
            if &ak + &step <= BigRational::zero() {
                ak = -&step + BigRational::new(1.into(), 2.into());
            }
            b.push(&ak + &step);
            a.push(ak);
        }
        let mut c = Vec::with_capacity(len);
        let mut acc = random_rational(&mut rng, 1, 10);
        for _ in 0..len {
            c.push(acc.clone());
            acc += random_rational(&mut rng, 0, 10);
        }
        match weighted_suffix_dominance(&a, &b, &c) {
            Some(true) => {}
            Some(false) => return Err(format!("triple {trial}: conclusion fails")),
            None => return Err(format!("triple {trial}: generator broke the hypotheses")),
        }
    }
    Ok("d = 1..10 monotone for T = 300; 1000 exact triples satisfy the suffix lemma".into())
}

fn randomized_contrast() -> Outcome {
    let d = 10u32;
    let bundle = randomized_halfload(d, 200, 13).map_err(|e| e.to_string())?;
    let v = verify_bundle(&bundle).map_err(|e| e.to_string())?;
    if v.measured < 0.99 {
        return Err(format!("randomized: {}", v.detail));
    }
    let p = matrix(bundle.graph.clone());
    let steps = (20 * d * d) as usize;
    let quasi = max_deviation(&p, &bundle.x0, &RoundingPolicy::quasirandom(), steps)
        .map_err(|e| e.to_string())?;
    let bound = 2.0 * f64::from(d);
    check(
        quasi <= bound,
        format!("randomized: {} (frequency {}); quasirandom max deviation {quasi} over {steps} steps (bound {bound})", v.detail, v.measured),
    )
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("RSW fixed point", rsw_fixed_point),
        ("quasirandom hypercube upper bound", hypercube_upper_bound),
        ("hypercube lower bound", hypercube_lower_bound),
        ("torus constant deviation", torus_constant_deviation),
        ("error decomposition identity", ansatz_identity),
        ("fill decomposition", fill_decomposition_matches),
        ("log-concavity and diagonal monotonicity", certifiers),
        ("hypercube unimodality", hypercube_unimodality),
        (
            "projection and balls-and-bins identities",
            three_way_identity,
        ),
        ("spectral closed forms", spectral_closed_forms),
        ("convergence bound", convergence_bound_holds),
        (
            "appendix monotonicity and suffix lemma",
            appendix_monotonicity,
        ),
        ("randomized-rounding contrast", randomized_contrast),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{took:.1?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{took:.1?}]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
