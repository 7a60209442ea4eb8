//! Testing against independence: evaluation and optimization of the
//! rate / error-exponent / distortion region, the binary-symmetric closed
//! form, and the binary Wyner–Ziv rate curve.

use crate::prob::{
    binary_convolve, binary_entropy, compose, Alphabet, Channel, Dist, Joint, ProbError, Role,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One achievable (rate, exponent, distortion) triple, all in bits / expected
/// per-letter distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub rate: f64,
    pub exponent: f64,
    pub distortion: f64,
}

/// Parameters of the binary-symmetric closed form.
#[derive(Debug, Clone, Copy)]
pub struct BssParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub p: f64,
}

impl BssParams {
    pub fn new(alpha: f64, beta: f64, theta: f64, p: f64) -> Self {
        assert!((0.0..=0.5).contains(&alpha), "alpha {alpha} outside [0, 0.5]");
        assert!((0.0..=0.5).contains(&beta), "beta {beta} outside [0, 0.5]");
        assert!((0.0..=1.0).contains(&theta), "theta {theta} outside [0, 1]");
        assert!(p > 0.0 && p < 0.5, "crossover {p} outside (0, 0.5)");
        Self { alpha, beta, theta, p }
    }
}

/// A finite distortion measure `d(x, x̂) ∈ [0, d_max]`.
#[derive(Debug, Clone)]
pub struct DistortionMeasure {
    matrix: Vec<Vec<f64>>,
}

impl DistortionMeasure {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self, ProbError> {
        if matrix.is_empty() || matrix[0].is_empty() {
            return Err(ProbError::ShapeMismatch("empty distortion matrix".into()));
        }
        let w = matrix[0].len();
        for row in &matrix {
            if row.len() != w {
                return Err(ProbError::ShapeMismatch("ragged distortion matrix".into()));
            }
            for &v in row {
                if !v.is_finite() || v < 0.0 {
                    return Err(ProbError::ShapeMismatch(format!(
                        "distortion entry {v} must be finite and nonnegative"
                    )));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn hamming(n: usize) -> Self {
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        Self { matrix }
    }

    pub fn entry(&self, x: usize, xhat: usize) -> f64 {
        self.matrix[x][xhat]
    }

    pub fn source_size(&self) -> usize {
        self.matrix.len()
    }

    pub fn reconstruction_size(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn d_max(&self) -> f64 {
        self.matrix
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Evaluate one point of the region for the chain U − V − X − Y built from
/// `p_xy`, `V|X`, and `U|V`:
/// rate = I(U;X) + I(V;X|U,Y), exponent = I(U;Y), and distortion under the
/// per-cell-optimal deterministic reconstruction g(u,v,y).
pub fn eval_tai_point(
    p_xy: &Joint,
    q_v_given_x: &Channel,
    q_u_given_v: &Channel,
    d: &DistortionMeasure,
) -> Result<TradeoffPoint, ProbError> {
    let nx = p_xy.axes()[p_xy.axis_of(Role::X)?].1.size();
    if d.source_size() != nx {
        return Err(ProbError::ShapeMismatch(format!(
            "distortion rows {} vs |X| {}",
            d.source_size(),
            nx
        )));
    }
    let j4 = p_xy
        .extend(Role::X, q_v_given_x, Role::V)?
        .extend(Role::V, q_u_given_v, Role::U)?;
    let rate = j4.marginalize(&[Role::U, Role::X])?.mutual_information()
        + j4.conditional_mutual_information(Role::V, Role::X, &[Role::U, Role::Y])?;
    let exponent = j4.marginalize(&[Role::U, Role::Y])?.mutual_information();
    let distortion = optimal_reconstruction_distortion(&j4, d)?;
    Ok(TradeoffPoint { rate, exponent, distortion })
}

/// E[d(X, g(U,V,Y))] for the per-(u,v,y)-cell argmin reconstruction,
/// ties broken toward the smallest reconstruction index.
fn optimal_reconstruction_distortion(
    j4: &Joint,
    d: &DistortionMeasure,
) -> Result<f64, ProbError> {
    optimal_reconstruction(j4, d).map(|(_, total)| total)
}

/// The per-cell-optimal deterministic reconstruction map g(u, v, y) → x̂,
/// flattened as (u·|V| + v)·|Y| + y, together with its expected distortion.
/// Ties go to the smallest reconstruction index.
pub fn optimal_reconstruction(
    j4: &Joint,
    d: &DistortionMeasure,
) -> Result<(Vec<usize>, f64), ProbError> {
    let (iu, iv, ix, iy) = (
        j4.axis_of(Role::U)?,
        j4.axis_of(Role::V)?,
        j4.axis_of(Role::X)?,
        j4.axis_of(Role::Y)?,
    );
    let dims = j4.dims();
    let (nu, nv, nx, ny) = (dims[iu], dims[iv], dims[ix], dims[iy]);
    let nxh = d.reconstruction_size();
    // accumulate p(u,v,y,x)
    let mut cell = vec![0.0; nu * nv * ny * nx];
    let mut idx = vec![0usize; 4];
    for (flat, &m) in j4.mass().iter().enumerate() {
        crate::prob::unflatten(flat, dims, &mut idx);
        cell[((idx[iu] * nv + idx[iv]) * ny + idx[iy]) * nx + idx[ix]] += m;
    }
    let mut total = 0.0;
    let mut g = Vec::with_capacity(nu * nv * ny);
    for c in cell.chunks(nx) {
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for xh in 0..nxh {
            let v: f64 = (0..nx).map(|x| c[x] * d.entry(x, xh)).sum();
            if v < best - 1e-15 {
                best = v;
                arg = xh;
            }
        }
        total += best;
        g.push(arg);
    }
    Ok((g, total))
}

/// Closed-form binary-symmetric point:
/// rate = 1 − H₂(α⋆β⋆p) + θ[H₂(α⋆p) − H₂(α)], exponent = 1 − H₂(α⋆β⋆p),
/// distortion = θα + (1−θ)p.
pub fn bss_region_point(params: BssParams) -> TradeoffPoint {
    let BssParams { alpha, beta, theta, p } = params;
    let abp = binary_convolve(binary_convolve(alpha, beta), p);
    let exponent = 1.0 - binary_entropy(abp);
    let rate = exponent + theta * (binary_entropy(binary_convolve(alpha, p)) - binary_entropy(alpha));
    let distortion = theta * alpha + (1.0 - theta) * p;
    TradeoffPoint { rate, exponent, distortion }
}

/// Minimum closed-form distortion at a given (rate, exponent) budget, or
/// `None` when no (α, β, θ) satisfies both constraints.
///
/// For fixed (α, β) the best θ is analytic (distortion is monotone in θ and
/// the rate constraint is linear in it), so the search runs over the (α, β)
/// grid at step 1/512 followed by local refinement to 1e-5.
pub fn bss_min_distortion(rate: f64, exponent: f64, p: f64) -> Option<f64> {
    assert!(rate >= 0.0 && exponent >= 0.0, "rate and exponent must be nonnegative");
    assert!(p > 0.0 && p < 0.5, "crossover {p} outside (0, 0.5)");
    let e_max = 1.0 - binary_entropy(p);
    if exponent > e_max || exponent > rate {
        return None;
    }
    let step = 1.0 / 512.0;
    let n = (0.5 / step) as usize;
    let mut best: Option<(f64, f64, f64)> = None; // (distortion, alpha, beta)
    for i in 0..=n {
        let alpha = i as f64 * step;
        for k in 0..=n {
            let beta = k as f64 * step;
            if let Some(dv) = bss_best_theta_distortion(rate, exponent, p, alpha, beta) {
                if best.map_or(true, |(b, _, _)| dv < b) {
                    best = Some((dv, alpha, beta));
                }
            }
        }
    }
    let (_, mut alpha, mut beta) = best?;
    // coordinate refinement
    let mut width = step;
    while width > 1e-5 {
        width *= 0.5;
        let mut improved = true;
        while improved {
            improved = false;
            let cur = bss_best_theta_distortion(rate, exponent, p, alpha, beta)
                .unwrap_or(f64::INFINITY);
            for (da, db) in [(width, 0.0), (-width, 0.0), (0.0, width), (0.0, -width)] {
                let a2 = (alpha + da).clamp(0.0, 0.5);
                let b2 = (beta + db).clamp(0.0, 0.5);
                if let Some(v) = bss_best_theta_distortion(rate, exponent, p, a2, b2) {
                    if v < cur - 1e-12 {
                        alpha = a2;
                        beta = b2;
                        improved = true;
                        break;
                    }
                }
            }
        }
    }
    bss_best_theta_distortion(rate, exponent, p, alpha, beta)
}

fn bss_best_theta_distortion(
    rate: f64,
    exponent: f64,
    p: f64,
    alpha: f64,
    beta: f64,
) -> Option<f64> {
    let e0 = 1.0 - binary_entropy(binary_convolve(binary_convolve(alpha, beta), p));
    if e0 < exponent {
        return None;
    }
    let slack = rate - e0;
    if slack < 0.0 {
        return None;
    }
    let delta_r = binary_entropy(binary_convolve(alpha, p)) - binary_entropy(alpha);
    // distortion θα + (1−θ)p decreases in θ when α < p, so take θ as large
    // as the rate slack allows; for α ≥ p the best θ is 0.
    let theta = if alpha >= p {
        0.0
    } else if delta_r <= slack {
        1.0
    } else {
        slack / delta_r
    };
    Some(theta * alpha + (1.0 - theta) * p)
}

/// Binary Wyner–Ziv rate: infimum over (θ, δ) with D = θδ + (1−θ)p of
/// θ[H₂(p⋆δ) − H₂(δ)]. Distortion at or above p needs no rate.
pub fn wz_binary_rate(distortion: f64, p: f64) -> f64 {
    assert!(distortion >= 0.0, "distortion must be nonnegative");
    assert!(p > 0.0 && p < 0.5, "crossover {p} outside (0, 0.5)");
    if distortion >= p {
        return 0.0;
    }
    let rate_at = |delta: f64| -> f64 {
        let theta = (p - distortion) / (p - delta);
        theta * (binary_entropy(binary_convolve(p, delta)) - binary_entropy(delta))
    };
    // δ ranges over [0, D]; θ = (p − D)/(p − δ) ∈ (0, 1].
    let n = 512usize;
    let mut best = f64::INFINITY;
    let mut best_i = 0usize;
    for i in 0..=n {
        let delta = distortion * i as f64 / n as f64;
        let r = rate_at(delta);
        if r < best {
            best = r;
            best_i = i;
        }
    }
    // golden-section refinement around the best grid cell
    let mut lo = distortion * best_i.saturating_sub(1) as f64 / n as f64;
    let mut hi = distortion * (best_i + 1).min(n) as f64 / n as f64;
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    while hi - lo > 1e-9 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if rate_at(m1) <= rate_at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.min(rate_at(0.5 * (lo + hi)))
}

/// A frontier point together with the channels that achieve it, so the
/// triple can always be re-verified by `eval_tai_point`.
#[derive(Debug, Clone)]
pub struct FrontierPoint {
    pub point: TradeoffPoint,
    pub q_v_given_x: Channel,
    pub q_u_given_v: Channel,
}

#[derive(Debug, Clone)]
pub struct FrontierConfig {
    /// |U| cap; defaults to |X| + 2.
    pub u_size: Option<usize>,
    /// |V| cap; defaults to |X|·|U| + 1.
    pub v_size: Option<usize>,
    /// (rate, exponent) budgets the optimizer aims at; a default sweep is
    /// generated when empty.
    pub probes: Vec<(f64, f64)>,
    pub starts_per_probe: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        Self {
            u_size: None,
            v_size: None,
            probes: Vec::new(),
            starts_per_probe: 3,
            iterations: 1500,
            seed: 0,
        }
    }
}

/// Heuristic frontier search: coarse grid seeding plus multi-start randomized
/// coordinate descent toward each (rate, exponent) probe, followed by a
/// deterministic Pareto reduction. Every returned point is achievable exactly
/// (it is the `eval_tai_point` of its channels); only optimality is
/// heuristic.
pub fn optimize_tai_frontier(
    p_xy: &Joint,
    d: &DistortionMeasure,
    cfg: &FrontierConfig,
) -> Result<Vec<FrontierPoint>, ProbError> {
    let nx = p_xy.axes()[p_xy.axis_of(Role::X)?].1.size();
    let nu_cap = cfg.u_size.unwrap_or(nx + 2).min(4);
    let nv_cap = cfg.v_size.unwrap_or(nx * nu_cap + 1).min(6);
    // Smaller auxiliary alphabets are a subset of larger ones but are far
    // easier to optimize over, so search the minimal size as well as the cap.
    let mut sizes = vec![(2usize.min(nu_cap).max(2), 2usize.min(nv_cap).max(2))];
    if (nu_cap, nv_cap) != sizes[0] {
        sizes.push((nu_cap, nv_cap));
    }
    let probes: Vec<(f64, f64)> = if cfg.probes.is_empty() {
        let ixy = p_xy.mutual_information();
        let hx = p_xy.marginal(Role::X)?.entropy();
        let mut v = Vec::new();
        for i in 1..=5 {
            for k in 0..=4 {
                v.push((hx * i as f64 / 5.0, ixy * k as f64 / 4.0));
            }
        }
        v
    } else {
        cfg.probes.clone()
    };

    let mut collected: Vec<(TradeoffPoint, Channel, Channel)> = Vec::new();
    for &(nu, nv) in &sizes {
        let dim_v = nx * (nv - 1);
        let dim_u = nv * (nu - 1);
        let build = |params: &[f64]| -> Option<(Channel, Channel)> {
            let vx = stochastic_from_params(&params[..dim_v], nx, nv)?;
            let uv = stochastic_from_params(&params[dim_v..], nv, nu)?;
            Some((vx, uv))
        };
        let evaluate = |params: &[f64]| -> Option<(TradeoffPoint, Channel, Channel)> {
            let (vx, uv) = build(params)?;
            let pt = eval_tai_point(p_xy, &vx, &uv, d).ok()?;
            Some((pt, vx, uv))
        };
        // With 2×2 channels the parameters are exactly the two crossover
        // probabilities, so a deterministic refinement inside the symmetric
        // family is available; it contains the binary-symmetric optimum.
        let symmetric = nx == 2 && nu == 2 && nv == 2;
        let sym_params = |a: f64, b: f64| -> Vec<f64> { vec![1.0 - a, a, 1.0 - b, b] };

        let mut seeds: Vec<Vec<f64>> = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ((nu as u64) << 8) ^ nv as u64);
        if symmetric {
            for i in 0..=32 {
                for k in 0..=8 {
                    seeds.push(sym_params(0.5 * i as f64 / 32.0, 0.5 * k as f64 / 8.0));
                }
            }
        }
        for _ in 0..40 {
            seeds.push((0..dim_v + dim_u).map(|_| rng.gen_range(0.0..1.0)).collect());
        }
        collected.extend(seeds.iter().filter_map(|s| evaluate(s)));

        // Per-probe search: minimize distortion subject to rate ≤ R and
        // exponent ≥ E via a stiff penalty.
        let results: Vec<Vec<(TradeoffPoint, Channel, Channel)>> = probes
            .par_iter()
            .enumerate()
            .map(|(pi, &(r_cap, e_target))| {
                let mut found = Vec::new();
                let score = |pt: &TradeoffPoint| -> f64 {
                    pt.distortion
                        + 1e3 * (pt.rate - r_cap).max(0.0)
                        + 1e3 * (e_target - pt.exponent).max(0.0)
                };
                if symmetric {
                    // Analytic candidate: the smallest symmetric crossover α
                    // whose rate overhead H₂(α⋆p)−H₂(α) fits in R − E, with β
                    // chosen so the exponent lands exactly on the target.
                    if let Some((a, b)) = symmetric_candidate(r_cap, e_target, p_xy) {
                        if let Some(c) = eval_sym_pair(p_xy, d, a, b) {
                            found.push(c);
                        }
                    }
                    // deterministic coordinate descent on (α, β) from the
                    // best symmetric seed
                    let (mut a, mut b) = (0.0, 0.0);
                    let eval_sym = |a: f64, b: f64| {
                        evaluate(&sym_params(a, b)).map(|(pt, vx, uv)| (score(&pt), pt, vx, uv))
                    };
                    let mut cur = f64::INFINITY;
                    for i in 0..=32 {
                        for k in 0..=8 {
                            let (ca, cb) = (0.5 * i as f64 / 32.0, 0.5 * k as f64 / 8.0);
                            if let Some((s, _, _, _)) = eval_sym(ca, cb) {
                                if s < cur {
                                    cur = s;
                                    a = ca;
                                    b = cb;
                                }
                            }
                        }
                    }
                    let mut width = 0.5 / 32.0;
                    while width > 1e-7 {
                        let mut improved = true;
                        while improved {
                            improved = false;
                            for (da, db) in [
                                (width, 0.0),
                                (-width, 0.0),
                                (0.0, width),
                                (0.0, -width),
                                (width, width),
                                (width, -width),
                                (-width, width),
                                (-width, -width),
                            ] {
                                let (a2, b2) =
                                    ((a + da).clamp(0.0, 0.5), (b + db).clamp(0.0, 0.5));
                                if let Some((s, pt, vx, uv)) = eval_sym(a2, b2) {
                                    if s < cur - 1e-14 {
                                        cur = s;
                                        a = a2;
                                        b = b2;
                                        found.push((pt, vx, uv));
                                        improved = true;
                                        break;
                                    }
                                }
                            }
                        }
                        width *= 0.5;
                    }
                }
                for start in 0..cfg.starts_per_probe {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        cfg.seed
                            ^ ((pi as u64) << 24)
                            ^ ((start as u64) << 48)
                            ^ ((nu as u64) << 16)
                            ^ 0xabcd,
                    );
                    let mut params: Vec<f64> =
                        (0..dim_v + dim_u).map(|_| rng.gen_range(0.0..1.0)).collect();
                    let mut cur = match evaluate(&params) {
                        Some((pt, _, _)) => score(&pt),
                        None => f64::INFINITY,
                    };
                    let mut step = 0.25;
                    for it in 0..cfg.iterations {
                        let k = rng.gen_range(0..params.len());
                        let old = params[k];
                        params[k] = (old + rng.gen_range(-step..step)).clamp(0.0, 1.0);
                        match evaluate(&params) {
                            Some((pt, vx, uv)) => {
                                let s = score(&pt);
                                if s < cur {
                                    cur = s;
                                    found.push((pt, vx, uv));
                                } else {
                                    params[k] = old;
                                }
                            }
                            None => params[k] = old,
                        }
                        if it % 200 == 199 {
                            step = (step * 0.7).max(0.01);
                        }
                    }
                }
                found
            })
            .collect();
        for f in results {
            collected.extend(f);
        }
    }

    // Deterministic Pareto reduction: keep points not dominated in
    // (rate ↓, exponent ↑, distortion ↓).
    collected.sort_by(|a, b| {
        (a.0.rate, -a.0.exponent, a.0.distortion)
            .partial_cmp(&(b.0.rate, -b.0.exponent, b.0.distortion))
            .unwrap()
    });
    let dominates = |a: &TradeoffPoint, b: &TradeoffPoint| -> bool {
        a.rate <= b.rate + 1e-12
            && a.exponent >= b.exponent - 1e-12
            && a.distortion <= b.distortion + 1e-12
            && (a.rate < b.rate - 1e-9
                || a.exponent > b.exponent + 1e-9
                || a.distortion < b.distortion - 1e-9)
    };
    let mut frontier: Vec<(TradeoffPoint, Channel, Channel)> = Vec::new();
    for cand in collected {
        if frontier.iter().any(|f| dominates(&f.0, &cand.0)) {
            continue;
        }
        frontier.retain(|f| !dominates(&cand.0, &f.0));
        frontier.push(cand);
    }
    Ok(frontier
        .into_iter()
        .map(|(point, q_v_given_x, q_u_given_v)| FrontierPoint {
            point,
            q_v_given_x,
            q_u_given_v,
        })
        .collect())
}

/// Best frontier distortion among points meeting a (rate, exponent) budget.
pub fn frontier_distortion_at(
    frontier: &[FrontierPoint],
    rate: f64,
    exponent: f64,
    slack: f64,
) -> Option<f64> {
    frontier
        .iter()
        .filter(|f| f.point.rate <= rate + slack && f.point.exponent >= exponent - slack)
        .map(|f| f.point.distortion)
        .min_by(|a, b| a.partial_cmp(b).unwrap())
}

fn eval_sym_pair(
    p_xy: &Joint,
    d: &DistortionMeasure,
    a: f64,
    b: f64,
) -> Option<(TradeoffPoint, Channel, Channel)> {
    let vx = Channel::bsc(a.clamp(0.0, 0.5));
    let uv = Channel::bsc(b.clamp(0.0, 0.5));
    let pt = eval_tai_point(p_xy, &vx, &uv, d).ok()?;
    Some((pt, vx, uv))
}

// For a uniform binary source observed through a BSC the rate splits as
// exponent + [H₂(α⋆p) − H₂(α)], with the exponent depending on (α, β) only
// through α⋆β. That makes the best symmetric pair for a (rate, exponent)
// budget solvable by two bisections: α from the overhead equation, β from
// the exponent equation.
fn symmetric_candidate(rate: f64, exponent: f64, p_xy: &Joint) -> Option<(f64, f64)> {
    // only valid for the symmetric uniform-input joint
    let get = |x: usize, y: usize| p_xy.mass()[x * 2 + y];
    if p_xy.dims() != [2, 2] {
        return None;
    }
    if (get(0, 0) - get(1, 1)).abs() > 1e-9 || (get(0, 1) - get(1, 0)).abs() > 1e-9 {
        return None;
    }
    let p = 2.0 * get(0, 1);
    if !(1e-9..=0.5 - 1e-9).contains(&p) {
        return None;
    }
    let overhead = |a: f64| binary_entropy(binary_convolve(a, p)) - binary_entropy(a);
    let slack = rate - exponent;
    if slack < 0.0 {
        return None;
    }
    let alpha = if slack >= overhead(0.0) {
        0.0
    } else {
        // overhead is strictly decreasing on [0, 0.5]
        let (mut lo, mut hi) = (0.0, 0.5);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if overhead(mid) > slack {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    if 1.0 - binary_entropy(binary_convolve(alpha, p)) < exponent - 1e-12 {
        return None;
    }
    let expo = |b: f64| 1.0 - binary_entropy(binary_convolve(binary_convolve(alpha, b), p));
    let beta = if exponent <= expo(0.5) {
        0.5
    } else {
        let (mut lo, mut hi) = (0.0, 0.5);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if expo(mid) > exponent {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    Some((alpha, beta))
}

// Rows from free parameters in [0,1]: row i of an n-output channel uses
// stick-breaking over its (n−1) parameters, which covers the whole simplex.
fn stochastic_from_params(params: &[f64], rows: usize, cols: usize) -> Option<Channel> {
    let per = cols - 1;
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        let p = &params[r * per..(r + 1) * per];
        let mut row = Vec::with_capacity(cols);
        let mut rest = 1.0;
        for &f in p {
            let take = rest * f.clamp(0.0, 1.0);
            row.push(take);
            rest -= take;
        }
        row.push(rest.max(0.0));
        let s: f64 = row.iter().sum();
        let row: Vec<f64> = row.iter().map(|v| v / s).collect();
        out.push(row);
    }
    Channel::new(Alphabet::indexed(rows), Alphabet::indexed(cols), out).ok()
}

/// Uniform binary source observed through a BSC(p): the joint P_XY of the
/// binary-symmetric model.
pub fn bss_joint(p: f64) -> Joint {
    compose(&Dist::uniform(Alphabet::binary()), Role::X, &Channel::bsc(p), Role::Y).unwrap()
}
