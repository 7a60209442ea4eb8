//! The eight subcommands: parameter unpacking, delegation to `dht-core`,
//! and artifact assembly.

use crate::emit::{write_csv, write_json, Cell};
use crate::params::RunConfig;
use crate::CliError;
use dht_core::general::{
    best_exponent_decode, best_exponent_scan, exponent_curves, nonbinned_baseline, stein_bound,
    GeneralError, GridConfig, HypothesisPair,
};
use dht_core::iproject::{
    kl_lower_bound, min_kl_over_coupling_set, CouplingConstraints, IprojectError,
};
use dht_core::sim::{
    exponent_slope, simulate_general, simulate_tai, GeneralDecoder, GeneralScheme, SimConfig,
    SimError, SimResult, TaiScheme,
};
use dht_core::tai::{
    bss_joint, bss_min_distortion, eval_tai_point, optimize_tai_frontier, wz_binary_rate,
    DistortionMeasure, FrontierConfig,
};
use dht_core::{binary_entropy_inv, Alphabet, Channel, Joint, ProbError, Role};
use serde_json::json;
use std::path::PathBuf;

pub fn run(command: &str, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    match command {
        "fig2" => fig2(cfg),
        "fig3" => fig3(cfg),
        "tai-point" => tai_point(cfg),
        "tai-frontier" => tai_frontier(cfg),
        "wz" => wz(cfg),
        "iproject" => iproject(cfg),
        "exponent" => exponent(cfg),
        "simulate" => simulate(cfg),
        other => Err(CliError::Config(format!("unknown command {other:?}"))),
    }
}

fn prob_err(e: ProbError) -> CliError {
    CliError::Config(e.to_string())
}

fn general_err(e: GeneralError) -> CliError {
    CliError::Config(e.to_string())
}

fn sim_err(e: SimError) -> CliError {
    match e {
        SimError::Budget(_, _) => CliError::Budget(e.to_string()),
        SimError::Sampling(_) => CliError::Numerical(e.to_string()),
        SimError::Unsupported | SimError::Prob(_) => CliError::Config(e.to_string()),
    }
}

fn source_p(cfg: &RunConfig) -> Result<f64, CliError> {
    let p = cfg.probability("p", 0.25)?;
    if !(0.0..0.5).contains(&p) || p == 0.0 {
        return Err(CliError::Config(format!("p = {p} outside (0, 0.5)")));
    }
    Ok(p)
}

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|i| (from + i as f64 * step).min(to)).collect()
}

fn fig2(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let p = source_p(cfg)?;
    let rates = cfg.f64_list("rates")?;
    if rates.iter().any(|&r| !(0.0..=2.0).contains(&r)) {
        return Err(CliError::Config("rates must lie in [0, 2]".into()));
    }
    let e_max = cfg.f64_or("exponent_max", 0.2)?;
    let mut rows = Vec::new();
    for &rate in &rates {
        for &e in &grid(0.0, e_max, cfg.grid_step) {
            let cell = match bss_min_distortion(rate, e, p) {
                Some(d) => Cell::Num(d),
                None => Cell::Infeasible,
            };
            rows.push(vec![Cell::Num(rate), Cell::Num(e), cell]);
        }
    }
    write_csv(cfg, &["rate", "exponent", "min_distortion"], &rows)
}

fn fig3(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let p = cfg.probability("p", 0.1)?;
    let q = cfg.probability("q", 0.2)?;
    if !(p < q && q <= 0.5) {
        return Err(CliError::Config(format!("need 0 ≤ p < q ≤ 0.5, got p={p} q={q}")));
    }
    let rate = cfg.f64_or("rate", 0.4)?;
    if !(0.0..=1.0).contains(&rate) {
        return Err(CliError::Config(format!("rate = {rate} outside [0, 1]")));
    }
    let deltas = grid(0.0, 0.5, cfg.grid_step);
    let curves =
        exponent_curves(p, q, rate, &deltas, &GridConfig::default()).map_err(general_err)?;
    let rows: Vec<Vec<Cell>> = curves
        .points
        .iter()
        .map(|pt| {
            vec![
                Cell::Num(pt.delta),
                Cell::from_exponent(pt.testing_exponent),
                Cell::from_exponent(pt.g_exponent),
                Cell::Num(pt.g_hat_exponent),
                Cell::from_exponent(pt.overall_decode),
                Cell::from_exponent(pt.overall_scan),
                Cell::Num(curves.nonbinned),
                Cell::Num(curves.stein),
            ]
        })
        .collect();
    write_csv(
        cfg,
        &[
            "delta",
            "testing",
            "g",
            "g_hat",
            "overall_decode",
            "overall_scan",
            "nonbinned_baseline",
            "stein",
        ],
        &rows,
    )
}

fn tai_point(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let p = source_p(cfg)?;
    let delta_v = cfg.probability("delta_v", 0.1)?;
    let delta_u = cfg.probability("delta_u", 0.0)?;
    let pt = eval_tai_point(
        &bss_joint(p),
        &Channel::bsc(delta_v),
        &Channel::bsc(delta_u),
        &DistortionMeasure::hamming(2),
    )
    .map_err(prob_err)?;
    let rows = vec![vec![
        Cell::Num(pt.rate),
        Cell::Num(pt.exponent),
        Cell::Num(pt.distortion),
    ]];
    write_csv(cfg, &["rate", "exponent", "distortion"], &rows)
}

fn tai_frontier(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let p = source_p(cfg)?;
    let probes = cfg.pair_list("probes")?;
    if probes.is_empty() {
        return Err(CliError::Config("probes must be a non-empty list of [rate, exponent]".into()));
    }
    let fc = FrontierConfig {
        probes,
        starts_per_probe: cfg.usize_or("starts_per_probe", 3)?,
        iterations: cfg.usize_or("iterations", 1500)?,
        seed: cfg.seed,
        ..FrontierConfig::default()
    };
    let frontier = optimize_tai_frontier(&bss_joint(p), &DistortionMeasure::hamming(2), &fc)
        .map_err(prob_err)?;
    let rows: Vec<Vec<Cell>> = frontier
        .iter()
        .filter(|f| f.point.distortion.is_finite())
        .map(|f| {
            vec![
                Cell::Num(f.point.rate),
                Cell::Num(f.point.exponent),
                Cell::Num(f.point.distortion),
            ]
        })
        .collect();
    if rows.is_empty() {
        return Err(CliError::Infeasible("no probe admits an achievable point".into()));
    }
    write_csv(cfg, &["rate", "exponent", "distortion"], &rows)
}

fn wz(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let p = source_p(cfg)?;
    let rows: Vec<Vec<Cell>> = grid(0.0, p, cfg.grid_step)
        .iter()
        .map(|&d| vec![Cell::Num(d), Cell::Num(wz_binary_rate(d, p))])
        .collect();
    write_csv(cfg, &["distortion", "rate"], &rows)
}

fn joint_uxy(cfg: &RunConfig, key: &str) -> Result<Joint, CliError> {
    let mass = cfg.f64_list(key)?;
    if mass.len() != 8 {
        return Err(CliError::Config(format!("{key:?} must list 8 masses in (u, x, y) order")));
    }
    Joint::new(
        vec![
            (Role::U, Alphabet::binary()),
            (Role::X, Alphabet::binary()),
            (Role::Y, Alphabet::binary()),
        ],
        mass,
    )
    .map_err(prob_err)
}

fn iproject(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let t0 = joint_uxy(cfg, "t0")?;
    let t1 = joint_uxy(cfg, "t1")?;
    let constraints = CouplingConstraints::from_triple(&t0).map_err(|e| match e {
        IprojectError::Prob(p) => prob_err(p),
        other => CliError::Config(other.to_string()),
    })?;
    let bound = kl_lower_bound(
        constraints.q_uy(),
        &t1.marginalize(&[Role::U, Role::Y]).map_err(prob_err)?,
    )
    .map_err(prob_err)?;
    let res = min_kl_over_coupling_set(&t1, &constraints).map_err(|e| match e {
        IprojectError::Prob(p) => prob_err(p),
        other => CliError::Numerical(other.to_string()),
    })?;
    if !res.converged {
        return Err(CliError::Numerical(format!(
            "projection stalled after {} iterations (gap {:.3e})",
            res.iterations, res.gap
        )));
    }
    write_json(
        cfg,
        json!({
            "value_bits": res.value,
            "lower_bound_bits": bound,
            "iterations": res.iterations,
            "gap": res.gap,
            "converged": res.converged,
            "argmin": res.argmin.mass(),
        }),
    )
}

fn exponent(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let p = cfg.probability("p", 0.1)?;
    let q = cfg.probability("q", 0.2)?;
    if !(p < q && q <= 0.5) {
        return Err(CliError::Config(format!("need 0 ≤ p < q ≤ 0.5, got p={p} q={q}")));
    }
    let rate = cfg.f64_or("rate", 0.4)?;
    if !(0.0..=1.0).contains(&rate) {
        return Err(CliError::Config(format!("rate = {rate} outside [0, 1]")));
    }
    let hyp = HypothesisPair::bsc(p, q);
    let gc = GridConfig { step: cfg.grid_step.max(1.0 / 256.0), ..GridConfig::default() };
    let (decode, s_decode) = best_exponent_decode(rate, &hyp, &gc).map_err(general_err)?;
    let (scan, s_scan) = best_exponent_scan(rate, &hyp).map_err(general_err)?;
    let baseline = nonbinned_baseline(rate, &hyp).map_err(general_err)?;
    let stein = stein_bound(&hyp).map_err(general_err)?;
    let delta_min = binary_entropy_inv((1.0 - rate).max(0.0));
    let rows = vec![
        vec![Cell::Num(0.0), Cell::Num(stein)],
        vec![Cell::Num(s_scan.delta), Cell::from_exponent(scan)],
        vec![Cell::Num(s_decode.delta), Cell::from_exponent(decode)],
        vec![Cell::Num(delta_min), Cell::Num(baseline)],
    ];
    let labels = ["stein", "bin_scan", "min_entropy", "nonbinned"];
    let mut out_rows = Vec::new();
    for (label, row) in labels.iter().zip(rows) {
        let mut r = vec![Cell::Label(label)];
        r.extend(row);
        out_rows.push(r);
    }
    write_csv(cfg, &["scheme", "delta_star", "exponent"], &out_rows)
}

fn tai_hypotheses(p: f64) -> Result<HypothesisPair, CliError> {
    let h1 = Joint::from_fn(
        vec![(Role::X, Alphabet::binary()), (Role::Y, Alphabet::binary())],
        |_| 0.25,
    )
    .map_err(prob_err)?;
    HypothesisPair::new(bss_joint(p), h1).map_err(general_err)
}

fn symmetric_pair(p: f64) -> Result<Joint, CliError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::Config(format!("crossover {p} outside [0, 1]")));
    }
    Joint::from_fn(
        vec![(Role::X, Alphabet::binary()), (Role::Y, Alphabet::binary())],
        |idx| if idx[0] == idx[1] { (1.0 - p) / 2.0 } else { p / 2.0 },
    )
    .map_err(prob_err)
}

fn result_json(r: &SimResult) -> serde_json::Value {
    json!({
        "n": r.n,
        "trials": r.trials,
        "alpha_hat": r.alpha_hat,
        "beta_hat": r.beta_hat,
        "exponent_pointwise": r.exponent_pointwise,
        "distortion_hat": r.distortion_hat,
        "distortion_support": r.distortion_support,
        "distortion_decision_h0": r.distortion_decision_h0,
        "encoder_errors_h0": r.encoder_errors_h0,
        "declared_h0_under_h0": r.declared_h0_under_h0,
        "declared_h0_under_h1": r.declared_h0_under_h1,
        "reconstruction_failures": r.reconstruction_failures,
        "joint_typical_fraction": r.joint_typical_fraction,
    })
}

fn simulate(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let scheme = cfg.str_or("scheme", "tai")?.to_string();
    let n = cfg.usize_or("n", 32)?;
    let trials = cfg.usize_or("trials", 1000)?;
    let delta_typ = cfg.f64_or("delta_typ", 0.05)?;
    if delta_typ <= 0.0 {
        return Err(CliError::Config(format!("delta_typ = {delta_typ} must be positive")));
    }
    let sweep: Vec<usize> = match cfg.params.get("n_sweep") {
        None => vec![n],
        Some(_) => cfg.f64_list("n_sweep")?.iter().map(|&v| v as usize).collect(),
    };
    let mut results = Vec::new();
    for &n in &sweep {
        let sim = |hyp: HypothesisPair| SimConfig {
            n,
            trials,
            hyp,
            delta_typ,
            seed: cfg.seed,
        };
        let r = match scheme.as_str() {
            "tai" => {
                let p = source_p(cfg)?;
                let ts = TaiScheme {
                    q_v_given_x: Channel::bsc(cfg.probability("delta_v", 0.25)?),
                    q_u_given_v: Channel::bsc(cfg.probability("delta_u", 0.0)?),
                    r_hat: cfg.f64_or("r_hat", 0.3)?,
                    s2: cfg.f64_or("s2", 0.0)?,
                    r_prime: cfg.f64_or("r_prime", 0.0)?,
                    distortion: DistortionMeasure::hamming(2),
                };
                simulate_tai(&sim(tai_hypotheses(p)?), &ts).map_err(sim_err)?
            }
            "decode" | "scan" => {
                let h0 = symmetric_pair(cfg.probability("p0", 0.1)?)?;
                let h1 = symmetric_pair(cfg.probability("p1", 0.5)?)?;
                let hyp = HypothesisPair::new(h0, h1).map_err(general_err)?;
                let gs = GeneralScheme {
                    strategy: Channel::bsc(cfg.probability("strategy_delta", 0.05)?),
                    r_prime: cfg.f64_or("r_prime", 0.5)?,
                };
                let dec = if scheme == "decode" {
                    GeneralDecoder::MinEntropy
                } else {
                    GeneralDecoder::BinScan
                };
                simulate_general(&sim(hyp), &gs, dec).map_err(sim_err)?
            }
            other => {
                return Err(CliError::Config(format!(
                    "scheme {other:?} not one of tai, decode, scan"
                )))
            }
        };
        results.push(r);
    }
    let body = json!({
        "sim_config": {
            "scheme": scheme,
            "n_sweep": sweep,
            "trials": trials,
            "delta_typ": delta_typ,
            "seed": cfg.seed,
        },
        "results": results.iter().map(result_json).collect::<Vec<_>>(),
        "exponent_slope": exponent_slope(&results),
    });
    write_json(cfg, body)
}
