//! Achievable type-II error exponents under general hypotheses: the binning
//! penalty function G and its infimum, the bin-scan function Ĝ, the testing
//! exponent, the overall exponents of the decode-based and bin-scan schemes,
//! the non-binned baseline, and the centralized (Stein) upper bound.

use crate::iproject::{kl_lower_bound, min_kl_over_coupling_set, CouplingConstraints, IprojectError};
use crate::prob::{
    binary_entropy, binary_entropy_inv, binary_kl, compose, Alphabet, Channel, Dist, Joint,
    ProbError, Role,
};
use rayon::prelude::*;
use thiserror::Error;

const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeneralError {
    #[error("hypotheses disagree on a single-node marginal by {0:.3e}")]
    MismatchedMarginals(f64),
    #[error("strategy conditional differs from the candidate joint by {0:.3e}")]
    StrategyMismatch(f64),
    #[error("operation requires binary alphabets")]
    UnsupportedAlphabet,
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Iproject(#[from] IprojectError),
}

/// A pair of candidate joint laws for the sources (X, Y). Both hypotheses
/// must agree on each node's own marginal: a node cannot detect which
/// hypothesis holds from its local data alone.
#[derive(Debug, Clone)]
pub struct HypothesisPair {
    h0: Joint,
    h1: Joint,
}

impl HypothesisPair {
    pub fn new(h0: Joint, h1: Joint) -> Result<Self, GeneralError> {
        let gap = |r: Role| -> Result<f64, ProbError> {
            let a = h0.marginal(r)?;
            let b = h1.marginal(r)?;
            Ok(a.mass()
                .iter()
                .zip(b.mass())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max))
        };
        let worst = gap(Role::X)?.max(gap(Role::Y)?);
        if worst > MARGINAL_TOL {
            return Err(GeneralError::MismatchedMarginals(worst));
        }
        Ok(Self { h0, h1 })
    }

    /// Uniform binary X observed through a BSC: crossover `p` under the null
    /// and `q` under the alternative.
    pub fn bsc(p: f64, q: f64) -> Self {
        let px = Dist::uniform(Alphabet::binary());
        let h0 = compose(&px, Role::X, &Channel::bsc(p), Role::Y).unwrap();
        let h1 = compose(&px, Role::X, &Channel::bsc(q), Role::Y).unwrap();
        Self { h0, h1 }
    }

    pub fn h0(&self) -> &Joint {
        &self.h0
    }

    pub fn h1(&self) -> &Joint {
        &self.h1
    }

    /// (p, q) when both hypotheses are uniform-input binary symmetric.
    fn bsc_params(&self) -> Result<(f64, f64), GeneralError> {
        for h in [&self.h0, &self.h1] {
            if h.dims() != [2, 2] {
                return Err(GeneralError::UnsupportedAlphabet);
            }
            let m = h.mass();
            if (m[0] - m[3]).abs() > MARGINAL_TOL || (m[1] - m[2]).abs() > MARGINAL_TOL {
                return Err(GeneralError::UnsupportedAlphabet);
            }
        }
        Ok((2.0 * self.h0.mass()[1], 2.0 * self.h1.mass()[1]))
    }
}

/// The quantization channel U|X restricted to the binary symmetric family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BssStrategy {
    pub delta: f64,
}

impl BssStrategy {
    pub fn new(delta: f64) -> Self {
        assert!((0.0..=0.5).contains(&delta), "crossover {delta} outside [0, 0.5]");
        Self { delta }
    }

    pub fn channel(&self) -> Channel {
        Channel::bsc(self.delta)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum TestingMode {
    /// `D` between the two (U, Y) joints; cheap and what the curves use.
    LowerBound,
    /// Minimum divergence over the (U,X)/(U,Y) coupling set.
    Exact,
}

/// Search resolution for the inner infimum over candidate joints.
#[derive(Debug, Clone, Copy)]
pub struct GridConfig {
    /// Target resolution of the conditional-probability grid.
    pub step: f64,
    /// Polish the best grid cell by cyclic golden-section refinement.
    pub refine: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { step: 1.0 / 16.0, refine: true }
    }
}

/// Penalty exponent of decoding the wrong codeword from a bin, as a function
/// of the candidate joint type `q_uxy`: when the codebook is large enough to
/// contain a competing codeword (I(U;X) > r′), the cost is the divergence to
/// the nearer hypothesis plus the clamped excess of the binning rate over the
/// codebook-minus-side-information gap. Otherwise the event cannot occur and
/// the penalty is +∞.
pub fn g_function(
    q_uxy: &Joint,
    r_prime: f64,
    hyp: &HypothesisPair,
    strategy: &Channel,
) -> Result<f64, GeneralError> {
    // the candidate must induce the fixed quantization conditional
    let q_ux = q_uxy.marginalize(&[Role::U, Role::X])?;
    let q_x = q_uxy.marginal(Role::X)?;
    let nu = strategy.output().size();
    let mut worst = 0.0f64;
    for (x, &px) in q_x.mass().iter().enumerate() {
        if px <= 0.0 {
            continue;
        }
        for u in 0..nu {
            let got = q_ux.value(&[u, x]) / px;
            worst = worst.max((got - strategy.rows()[x][u]).abs());
        }
    }
    if worst > MARGINAL_TOL {
        return Err(GeneralError::StrategyMismatch(worst));
    }
    let iux = q_ux.mutual_information();
    if iux <= r_prime {
        return Ok(f64::INFINITY);
    }
    let iuy = q_uxy.marginalize(&[Role::U, Role::Y])?.mutual_information();
    let mut kl = f64::INFINITY;
    for h in [&hyp.h0, &hyp.h1] {
        let p = h.extend(Role::X, strategy, Role::U)?;
        kl = kl.min(q_uxy.kl_to(&p)?);
    }
    Ok(kl + (r_prime - iux + iuy).max(0.0))
}

/// Infimum of `g_function` over all candidate joints compatible with the
/// strategy, for the binary symmetric family (uniform candidate X; the outer
/// infimum over the X-type is not explored, which can only overestimate).
///
/// The free coordinates are the four conditionals Q(Y=1 | x, u); for each
/// hypothesis branch the objective is convex in them, so a coarse grid scan
/// followed by cyclic golden-section refinement locates the branch minimum.
pub fn binning_exponent(
    strategy: BssStrategy,
    r_prime: f64,
    hyp: &HypothesisPair,
    grid: &GridConfig,
) -> Result<f64, GeneralError> {
    let (p, q) = hyp.bsc_params()?;
    let delta = strategy.delta;
    let iux = 1.0 - binary_entropy(delta);
    if iux <= r_prime {
        return Ok(f64::INFINITY);
    }
    // weights Q(x, u) with uniform X and U|X = BSC(δ)
    let w = [
        [0.5 * (1.0 - delta), 0.5 * delta],
        [0.5 * delta, 0.5 * (1.0 - delta)],
    ];
    let h_u = binary_entropy(w[0][1] + w[1][1]); // = 1 bit by symmetry
    let bracket_base = r_prime - iux;
    // branch objective for candidate conditionals t[x][u] = Q(Y=1 | x, u)
    let objective = |t: &[[f64; 2]; 2], noise: f64| -> f64 {
        let mut kl = 0.0;
        for x in 0..2 {
            // P_i(Y=1 | X=x) for a BSC is `noise` at x=0 and 1−noise at x=1
            let py1 = if x == 0 { noise } else { 1.0 - noise };
            for u in 0..2 {
                kl += w[x][u] * binary_kl(t[x][u], py1);
            }
        }
        if !kl.is_finite() {
            return f64::INFINITY;
        }
        // I(U;Y) under the candidate
        let qy1_u: [f64; 2] = core::array::from_fn(|u| w[0][u] * t[0][u] + w[1][u] * t[1][u]);
        let qu: [f64; 2] = core::array::from_fn(|u| w[0][u] + w[1][u]);
        let h_uy = -(0..2)
            .map(|u| xlog2(qy1_u[u]) + xlog2(qu[u] - qy1_u[u]))
            .sum::<f64>();
        let y1 = qy1_u[0] + qy1_u[1];
        let h_y = binary_entropy(y1.clamp(0.0, 1.0));
        let iuy = (h_y + h_u - h_uy).max(0.0);
        kl + (bracket_base + iuy).max(0.0)
    };
    let scan = grid.step.max(1.0 / 64.0);
    let n = (1.0 / scan).round() as usize;
    let best_for = |noise: f64| -> f64 {
        let (val, start) = (0..=n)
            .into_par_iter()
            .map(|i0| {
                let mut best = (f64::INFINITY, [[0.0f64; 2]; 2]);
                let mut t = [[0.0f64; 2]; 2];
                t[0][0] = i0 as f64 / n as f64;
                for i1 in 0..=n {
                    t[0][1] = i1 as f64 / n as f64;
                    for i2 in 0..=n {
                        t[1][0] = i2 as f64 / n as f64;
                        for i3 in 0..=n {
                            t[1][1] = i3 as f64 / n as f64;
                            let v = objective(&t, noise);
                            if v < best.0 {
                                best = (v, t);
                            }
                        }
                    }
                }
                best
            })
            .reduce(
                || (f64::INFINITY, [[0.0f64; 2]; 2]),
                |a, b| if a.0 <= b.0 { a } else { b },
            );
        if !grid.refine || !val.is_finite() {
            return val;
        }
        // cyclic golden-section refinement of each coordinate
        let mut t = start;
        let mut cur = val;
        let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        for _ in 0..60 {
            let before = cur;
            for x in 0..2 {
                for u in 0..2 {
                    let center = t[x][u];
                    let mut lo = (center - 1.0 / n as f64).max(0.0);
                    let mut hi = (center + 1.0 / n as f64).min(1.0);
                    while hi - lo > 1e-10 {
                        let m1 = hi - phi * (hi - lo);
                        let m2 = lo + phi * (hi - lo);
                        let f1 = {
                            let mut s = t;
                            s[x][u] = m1;
                            objective(&s, noise)
                        };
                        let f2 = {
                            let mut s = t;
                            s[x][u] = m2;
                            objective(&s, noise)
                        };
                        if f1 <= f2 {
                            hi = m2;
                        } else {
                            lo = m1;
                        }
                    }
                    let cand = 0.5 * (lo + hi);
                    let v = {
                        let mut s = t;
                        s[x][u] = cand;
                        objective(&s, noise)
                    };
                    if v < cur {
                        cur = v;
                        t[x][u] = cand;
                    }
                }
            }
            if before - cur < 1e-12 {
                break;
            }
        }
        cur
    };
    // candidate X-type is uniform, matching both hypotheses, so the
    // divergence reduces entirely to the conditional terms
    Ok(best_for(p).min(best_for(q)))
}

/// Exponent of the testing error proper, for a fixed quantization strategy.
pub fn testing_exponent(
    strategy: &Channel,
    hyp: &HypothesisPair,
    mode: TestingMode,
) -> Result<f64, GeneralError> {
    let t0 = hyp.h0.extend(Role::X, strategy, Role::U)?;
    let t1 = hyp.h1.extend(Role::X, strategy, Role::U)?;
    match mode {
        TestingMode::LowerBound => {
            let p0 = t0.marginalize(&[Role::U, Role::Y])?;
            let p1 = t1.marginalize(&[Role::U, Role::Y])?;
            Ok(kl_lower_bound(&p0, &p1)?)
        }
        TestingMode::Exact => {
            let constraints = CouplingConstraints::from_triple(&t0)?;
            Ok(min_kl_over_coupling_set(&t1, &constraints)?.value)
        }
    }
}

/// Bin-scan penalty Ĝ = R − [I(X;U) − I(U;Y)], with the informations taken
/// under the null-hypothesis joint. May be negative, in which case the
/// bin-scan error does not decay at this strategy.
pub fn g_hat(strategy: &Channel, rate: f64, hyp: &HypothesisPair) -> Result<f64, GeneralError> {
    let t0 = hyp.h0.extend(Role::X, strategy, Role::U)?;
    let iux = t0.marginalize(&[Role::U, Role::X])?.mutual_information();
    let iuy = t0.marginalize(&[Role::U, Role::Y])?.mutual_information();
    Ok(rate - (iux - iuy))
}

/// Best overall exponent of the decode-based binned scheme over the binary
/// symmetric strategy family, with the crossover achieving it.
pub fn best_exponent_decode(
    r_prime: f64,
    hyp: &HypothesisPair,
    grid: &GridConfig,
) -> Result<(f64, BssStrategy), GeneralError> {
    let value = |delta: f64| -> Result<f64, GeneralError> {
        let s = BssStrategy::new(delta);
        let g = binning_exponent(s, r_prime, hyp, grid)?;
        let t = testing_exponent(&s.channel(), hyp, TestingMode::LowerBound)?;
        Ok(t.min(g))
    };
    sweep_deltas(value)
}

/// Best overall exponent of the bin-scan scheme over the binary symmetric
/// strategy family. A negative Ĝ clamps to exponent 0 at the combination.
pub fn best_exponent_scan(
    rate: f64,
    hyp: &HypothesisPair,
) -> Result<(f64, BssStrategy), GeneralError> {
    let value = |delta: f64| -> Result<f64, GeneralError> {
        let s = BssStrategy::new(delta);
        let gh = g_hat(&s.channel(), rate, hyp)?;
        let t = testing_exponent(&s.channel(), hyp, TestingMode::LowerBound)?;
        Ok(t.min(gh.max(0.0)))
    };
    sweep_deltas(value)
}

fn sweep_deltas(
    value: impl Fn(f64) -> Result<f64, GeneralError> + Sync,
) -> Result<(f64, BssStrategy), GeneralError> {
    let n = 256usize; // δ grid at step 1/512 over [0, 0.5]
    let evals: Vec<Result<f64, GeneralError>> = (0..=n)
        .into_par_iter()
        .map(|i| value(0.5 * i as f64 / n as f64))
        .collect();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, e) in evals.iter().enumerate() {
        match e {
            Ok(v) => {
                if *v > best.0 {
                    best = (*v, i);
                }
            }
            Err(_) => {
                return Err(match evals.into_iter().nth(i).unwrap() {
                    Err(e) => e,
                    Ok(_) => unreachable!(),
                });
            }
        }
    }
    // golden refinement of the sweep around the best cell
    let mut lo = 0.5 * best.1.saturating_sub(1) as f64 / n as f64;
    let mut hi = 0.5 * (best.1 + 1).min(n) as f64 / n as f64;
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    for _ in 0..40 {
        if hi - lo < 1e-7 {
            break;
        }
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if value(m1)? >= value(m2)? {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let mid = 0.5 * (lo + hi);
    let (v, d) = if value(mid)? > best.0 { (value(mid)?, mid) } else { (best.0, 0.5 * best.1 as f64 / n as f64) };
    Ok((v, BssStrategy::new(d)))
}

/// Exponent of the scheme that spends the whole rate on an unbinned
/// codebook: the coarsest-admissible strategy evaluated at the testing
/// exponent.
pub fn nonbinned_baseline(rate: f64, hyp: &HypothesisPair) -> Result<f64, GeneralError> {
    hyp.bsc_params()?;
    let delta_min = binary_entropy_inv((1.0 - rate).max(0.0));
    testing_exponent(
        &Channel::bsc(delta_min),
        hyp,
        TestingMode::LowerBound,
    )
}

/// Centralized upper bound: the divergence between the full joints.
pub fn stein_bound(hyp: &HypothesisPair) -> Result<f64, GeneralError> {
    Ok(hyp.h0.kl_to(&hyp.h1)?)
}

/// One row of the exponent-versus-crossover table.
#[derive(Debug, Clone, Copy)]
pub struct ExponentCurvePoint {
    pub delta: f64,
    pub testing_exponent: f64,
    /// binning infimum; +∞ when the wrong-codeword event cannot occur
    pub g_exponent: f64,
    /// raw bin-scan penalty; may be negative
    pub g_hat_exponent: f64,
    pub overall_decode: f64,
    pub overall_scan: f64,
}

/// Exponent curves and summary values over a δ grid.
#[derive(Debug, Clone)]
pub struct ExponentCurves {
    pub points: Vec<ExponentCurvePoint>,
    /// best (value, δ) of the decode-based scheme
    pub decode_opt: (f64, f64),
    /// best (value, δ) of the bin-scan scheme
    pub scan_opt: (f64, f64),
    pub nonbinned: f64,
    pub stein: f64,
}

/// All exponent curves for the binary symmetric model: testing, G, Ĝ, the
/// two overall minima, their optima over δ, and the reference lines.
pub fn exponent_curves(
    p: f64,
    q: f64,
    rate: f64,
    deltas: &[f64],
    grid: &GridConfig,
) -> Result<ExponentCurves, GeneralError> {
    assert!(p >= 0.0 && p < q && q <= 0.5, "need 0 ≤ p < q ≤ 0.5");
    let hyp = HypothesisPair::bsc(p, q);
    let points: Vec<Result<ExponentCurvePoint, GeneralError>> = deltas
        .par_iter()
        .map(|&delta| {
            let s = BssStrategy::new(delta);
            let ch = s.channel();
            let testing = testing_exponent(&ch, &hyp, TestingMode::LowerBound)?;
            let g = binning_exponent(s, rate, &hyp, grid)?;
            let gh = g_hat(&ch, rate, &hyp)?;
            Ok(ExponentCurvePoint {
                delta,
                testing_exponent: testing,
                g_exponent: g,
                g_hat_exponent: gh,
                overall_decode: testing.min(g),
                overall_scan: testing.min(gh.max(0.0)),
            })
        })
        .collect();
    let points = points.into_iter().collect::<Result<Vec<_>, _>>()?;
    let (dv, ds) = best_exponent_decode(rate, &hyp, grid)?;
    let (sv, ss) = best_exponent_scan(rate, &hyp)?;
    Ok(ExponentCurves {
        points,
        decode_opt: (dv, ds.delta),
        scan_opt: (sv, ss.delta),
        nonbinned: nonbinned_baseline(rate, &hyp)?,
        stein: stein_bound(&hyp)?,
    })
}

#[inline]
fn xlog2(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::binary_convolve;

    const D2_01_02: f64 = 0.052932501298081136; // binary divergence of 0.1 from 0.2

    fn fig_hyp() -> HypothesisPair {
        HypothesisPair::bsc(0.1, 0.2)
    }

    #[test]
    fn hypothesis_pair_rejects_mismatched_marginals() {
        let px = Dist::new(Alphabet::binary(), vec![0.3, 0.7]).unwrap();
        let h0 = compose(&px, Role::X, &Channel::bsc(0.1), Role::Y).unwrap();
        let h1 = compose(
            &Dist::uniform(Alphabet::binary()),
            Role::X,
            &Channel::bsc(0.2),
            Role::Y,
        )
        .unwrap();
        assert!(matches!(
            HypothesisPair::new(h0, h1),
            Err(GeneralError::MismatchedMarginals(_))
        ));
    }

    #[test]
    fn g_function_branches() {
        let hyp = fig_hyp();
        let delta = 0.02;
        let ch = Channel::bsc(delta);
        let q0 = hyp.h0().extend(Role::X, &ch, Role::U).unwrap();
        // small rate: the wrong-codeword event is live; at the null joint the
        // divergence term vanishes
        let v = g_function(&q0, 0.4, &hyp, &ch).unwrap();
        let iux = 1.0 - binary_entropy(delta);
        let iuy = 1.0 - binary_entropy(binary_convolve(delta, 0.1));
        assert!((v - (0.4 - iux + iuy).max(0.0)).abs() < 1e-9);
        // candidate below the codebook rate: +∞
        assert!(g_function(&q0, 0.95, &hyp, &ch).unwrap().is_infinite());
        // candidate at the alternative joint
        let q1 = hyp.h1().extend(Role::X, &ch, Role::U).unwrap();
        let v1 = g_function(&q1, 0.4, &hyp, &ch).unwrap();
        let iuy1 = 1.0 - binary_entropy(binary_convolve(delta, 0.2));
        assert!((v1 - (0.4 - iux + iuy1).max(0.0)).abs() < 1e-9);
        // wrong strategy rejected
        assert!(matches!(
            g_function(&q0, 0.4, &hyp, &Channel::bsc(0.3)),
            Err(GeneralError::StrategyMismatch(_))
        ));
    }

    #[test]
    fn binning_exponent_zero_region_and_boundary() {
        let hyp = fig_hyp();
        let grid = GridConfig::default();
        // Below the boundary crossover the alternative joint itself already
        // gives a zero-cost candidate.
        for d in [0.0, 0.04, 0.08] {
            let g = binning_exponent(BssStrategy::new(d), 0.4, &hyp, &grid).unwrap();
            assert!(g < 1e-9, "delta {d}: {g}");
        }
        // the boundary solves H₂(δ⋆q) − H₂(δ) = r′
        let boundary = 0.08232454835810876;
        let above =
            binning_exponent(BssStrategy::new(boundary + 0.01), 0.4, &hyp, &grid).unwrap();
        assert!(above > 1e-5, "{above}");
        let below =
            binning_exponent(BssStrategy::new(boundary - 0.005), 0.4, &hyp, &grid).unwrap();
        assert!(below < 1e-9, "{below}");
        // large crossover: codebook fits in the rate, no wrong-codeword event
        let inf = binning_exponent(BssStrategy::new(0.2), 0.4, &hyp, &grid).unwrap();
        assert!(inf.is_infinite());
    }

    #[test]
    fn binning_exponent_two_resolution_agreement() {
        let hyp = fig_hyp();
        let coarse = binning_exponent(
            BssStrategy::new(0.1),
            0.4,
            &hyp,
            &GridConfig { step: 1.0 / 64.0, refine: true },
        )
        .unwrap();
        let fine = binning_exponent(
            BssStrategy::new(0.1),
            0.4,
            &hyp,
            &GridConfig { step: 1.0 / 256.0, refine: true },
        )
        .unwrap();
        assert!((coarse - fine).abs() < 5e-3, "{coarse} vs {fine}");
    }

    #[test]
    fn testing_exponent_anchors() {
        let hyp = fig_hyp();
        let at = |d: f64| {
            testing_exponent(&Channel::bsc(d), &hyp, TestingMode::LowerBound).unwrap()
        };
        assert!((at(0.0) - D2_01_02).abs() < 1e-9);
        assert!(at(0.5).abs() < 1e-9);
        // closed form for the symmetric model
        for d in [0.05, 0.1, 0.2, 0.35] {
            let closed = binary_kl(binary_convolve(d, 0.1), binary_convolve(d, 0.2));
            assert!((at(d) - closed).abs() < 1e-9, "delta {d}");
        }
        // identical hypotheses
        let same = HypothesisPair::bsc(0.15, 0.15000000001);
        assert!(
            testing_exponent(&Channel::bsc(0.1), &same, TestingMode::LowerBound).unwrap() < 1e-9
        );
        // exact mode dominates the lower bound
        for d in [0.0, 0.1, 0.3] {
            let lb = at(d);
            let ex =
                testing_exponent(&Channel::bsc(d), &hyp, TestingMode::Exact).unwrap();
            assert!(ex >= lb - 1e-9, "delta {d}: exact {ex} < lb {lb}");
        }
    }

    #[test]
    fn testing_exponent_nonincreasing_in_delta() {
        let hyp = fig_hyp();
        let mut last = f64::INFINITY;
        for i in 0..=50 {
            let d = 0.5 * i as f64 / 50.0;
            let t = testing_exponent(&Channel::bsc(d), &hyp, TestingMode::LowerBound).unwrap();
            assert!(t <= last + 1e-12, "delta {d}");
            last = t;
        }
    }

    #[test]
    fn g_hat_identity_and_anchors() {
        let hyp = fig_hyp();
        // closed form R − H₂(δ⋆p) + H₂(δ) across the grid
        for i in 0..=100 {
            let d = 0.5 * i as f64 / 100.0;
            let got = g_hat(&Channel::bsc(d), 0.4, &hyp).unwrap();
            let closed =
                0.4 - binary_entropy(binary_convolve(d, 0.1)) + binary_entropy(d);
            assert!((got - closed).abs() < 1e-9, "delta {d}: {got} vs {closed}");
        }
        assert!((g_hat(&Channel::bsc(0.5), 0.4, &hyp).unwrap() - 0.4).abs() < 1e-12);
        let at_zero = g_hat(&Channel::bsc(0.0), 0.4, &hyp).unwrap();
        assert!((at_zero - (0.4 - 0.4689955935892812)).abs() < 1e-9);
    }

    #[test]
    fn scheme_ordering_at_figure_config() {
        let hyp = fig_hyp();
        let grid = GridConfig::default();
        let (decode, _) = best_exponent_decode(0.4, &hyp, &grid).unwrap();
        let (scan, _) = best_exponent_scan(0.4, &hyp).unwrap();
        let baseline = nonbinned_baseline(0.4, &hyp).unwrap();
        let stein = stein_bound(&hyp).unwrap();
        assert!((baseline - 0.018655063849450038).abs() < 1e-9);
        assert!((stein - D2_01_02).abs() < 1e-9);
        assert!(decode > baseline, "{decode} vs {baseline}");
        assert!(scan > decode, "{scan} vs {decode}");
        assert!(scan <= stein + 1e-6, "{scan} vs {stein}");
    }

    #[test]
    fn scan_reaches_centralized_value_at_full_rate() {
        let hyp = fig_hyp();
        let (v, s) = best_exponent_scan(1.0, &hyp).unwrap();
        assert!((v - D2_01_02).abs() < 1e-6, "{v}");
        assert!(s.delta < 1e-3);
    }

    #[test]
    fn baseline_endpoints() {
        let hyp = fig_hyp();
        assert!(nonbinned_baseline(0.0, &hyp).unwrap() < 1e-9);
        assert!((nonbinned_baseline(1.0, &hyp).unwrap() - D2_01_02).abs() < 1e-9);
    }

    #[test]
    fn stein_against_independence_is_mutual_information() {
        let h0 = HypothesisPair::bsc(0.1, 0.2).h0().clone();
        let px = h0.marginal(Role::X).unwrap();
        let py = h0.marginal(Role::Y).unwrap();
        let prod = Joint::from_fn(
            vec![(Role::X, Alphabet::binary()), (Role::Y, Alphabet::binary())],
            |idx| px.mass()[idx[0]] * py.mass()[idx[1]],
        )
        .unwrap();
        let hyp = HypothesisPair::new(h0.clone(), prod).unwrap();
        assert!((stein_bound(&hyp).unwrap() - h0.mutual_information()).abs() < 1e-12);
    }

    #[test]
    fn curves_table_shape_and_rows() {
        let deltas: Vec<f64> = (0..=25).map(|i| 0.5 * i as f64 / 25.0).collect();
        let curves =
            exponent_curves(0.1, 0.2, 0.4, &deltas, &GridConfig::default()).unwrap();
        assert_eq!(curves.points.len(), 26);
        let last = curves.points.last().unwrap();
        assert!(last.testing_exponent.abs() < 1e-9);
        assert!((last.g_hat_exponent - 0.4).abs() < 1e-9);
        assert!(last.overall_scan.abs() < 1e-9);
        let first = &curves.points[0];
        assert!((first.testing_exponent - D2_01_02).abs() < 1e-9);
        for pt in &curves.points {
            assert!((pt.overall_decode - pt.testing_exponent.min(pt.g_exponent)).abs() < 1e-12);
            assert!(
                (pt.overall_scan - pt.testing_exponent.min(pt.g_hat_exponent.max(0.0))).abs()
                    < 1e-12
            );
            // bin-scan dominance at matched strategy
            assert!(pt.overall_scan >= pt.overall_decode - 1e-9);
        }
        assert!(curves.scan_opt.0 > curves.decode_opt.0);
        assert!(curves.decode_opt.0 > curves.nonbinned);
    }
}
