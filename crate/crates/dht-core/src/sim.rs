//! Desk-scale Monte-Carlo simulation of the coding schemes: the
//! testing-against-independence scheme with lossy reconstruction, and the two
//! general-hypothesis detection schemes (min-empirical-entropy decoding and
//! bin scan), together with the typicality toolkit they rely on.
//!
//! The toolkit operates on generic finite alphabets; the simulators are
//! restricted to binary alphabets with block length at most 64 so sequences
//! pack into single machine words, which is what makes 10⁴-trial sweeps
//! affordable.

use crate::general::HypothesisPair;
use crate::prob::{Alphabet, Channel, Dist, Joint, ProbError, Role};
use crate::tai::DistortionMeasure;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("codebook would need about 2^{0:.1} codewords (cap 2^{1:.1})")]
    Budget(f64, f64),
    #[error("could not draw a typical codeword in {0} attempts")]
    Sampling(usize),
    #[error("simulator requires binary alphabets and block length ≤ 64")]
    Unsupported,
    #[error(transparent)]
    Prob(#[from] ProbError),
}

const WORD_CAP_LOG2: f64 = 22.0;
const SAMPLING_ATTEMPTS: usize = 100_000;

/// A length-n sequence over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSeq {
    alphabet: Alphabet,
    symbols: Vec<usize>,
}

impl SymbolSeq {
    pub fn new(alphabet: Alphabet, symbols: Vec<usize>) -> Result<Self, ProbError> {
        let k = alphabet.size();
        if symbols.iter().any(|&s| s >= k) {
            return Err(ProbError::ShapeMismatch("symbol outside alphabet".into()));
        }
        Ok(Self { alphabet, symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
}

/// Empirical counts of one to three equal-length sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalType {
    counts: Vec<usize>,
    dims: Vec<usize>,
    n: usize,
}

impl EmpiricalType {
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Relative frequency of a cell.
    pub fn freq(&self, idx: &[usize]) -> f64 {
        let mut flat = 0;
        for (i, &d) in idx.iter().zip(&self.dims) {
            flat = flat * d + i;
        }
        self.counts[flat] as f64 / self.n as f64
    }
}

/// Joint empirical type of up to three aligned sequences.
pub fn empirical_joint_type(seqs: &[&SymbolSeq]) -> Result<EmpiricalType, ProbError> {
    if seqs.is_empty() || seqs.len() > 3 {
        return Err(ProbError::BadAxisCount(seqs.len()));
    }
    let n = seqs[0].len();
    if seqs.iter().any(|s| s.len() != n) {
        return Err(ProbError::ShapeMismatch("length mismatch".into()));
    }
    let dims: Vec<usize> = seqs.iter().map(|s| s.alphabet.size()).collect();
    let mut counts = vec![0usize; dims.iter().product()];
    for t in 0..n {
        let mut flat = 0;
        for (s, &d) in seqs.iter().zip(&dims) {
            flat = flat * d + s.symbols[t];
        }
        counts[flat] += 1;
    }
    Ok(EmpiricalType { counts, dims, n })
}

/// Per-letter typicality: every cell with nonzero model mass is within
/// `delta` of its relative frequency.
pub fn is_delta_typical(seq: &SymbolSeq, dist: &Dist, delta: f64) -> bool {
    let ty = empirical_joint_type(&[seq]).expect("single sequence");
    dist.mass()
        .iter()
        .enumerate()
        .all(|(a, &p)| p == 0.0 || (ty.freq(&[a]) - p).abs() <= delta)
}

/// Joint typicality of a pair: cells are excluded when the model conditional
/// times the empirical first-sequence marginal vanishes.
pub fn is_jointly_typical(x: &SymbolSeq, y: &SymbolSeq, joint: &Joint, delta: f64) -> bool {
    let ty = match empirical_joint_type(&[x, y]) {
        Ok(t) => t,
        Err(_) => return false,
    };
    let (nx, ny) = (ty.dims[0], ty.dims[1]);
    for a in 0..nx {
        let px: f64 = (0..ny).map(|b| joint.value(&[a, b])).sum();
        let qx: f64 = (0..ny).map(|b| ty.freq(&[a, b])).sum();
        for b in 0..ny {
            let p = joint.value(&[a, b]);
            let cond = if px > 0.0 { p / px } else { 0.0 };
            if cond * qx == 0.0 {
                continue;
            }
            if (ty.freq(&[a, b]) - p).abs() > delta {
                return false;
            }
        }
    }
    true
}

/// Conditional typicality of `y` given `x`: the joint empirical frequencies
/// must track the model conditional reweighted by the empirical `x` type.
pub fn is_conditionally_typical(
    y: &SymbolSeq,
    x: &SymbolSeq,
    joint: &Joint,
    delta: f64,
) -> bool {
    let ty = match empirical_joint_type(&[x, y]) {
        Ok(t) => t,
        Err(_) => return false,
    };
    let (nx, ny) = (ty.dims[0], ty.dims[1]);
    for a in 0..nx {
        let px: f64 = (0..ny).map(|b| joint.value(&[a, b])).sum();
        let qx: f64 = (0..ny).map(|b| ty.freq(&[a, b])).sum();
        for b in 0..ny {
            let cond = if px > 0.0 { joint.value(&[a, b]) / px } else { 0.0 };
            let target = cond * qx;
            if target == 0.0 {
                continue;
            }
            if (ty.freq(&[a, b]) - target).abs() > delta {
                return false;
            }
        }
    }
    true
}

/// Empirical conditional entropy H(u | y) in bits, equal to the entropy of
/// the joint type minus the entropy of the y type.
pub fn empirical_conditional_entropy(u: &SymbolSeq, y: &SymbolSeq) -> Result<f64, ProbError> {
    let ty = empirical_joint_type(&[u, y])?;
    let n = ty.n as f64;
    let h_joint: f64 = -ty.counts.iter().map(|&c| xlog2(c as f64 / n)).sum::<f64>();
    let (nu, ny) = (ty.dims[0], ty.dims[1]);
    let mut h_y = 0.0;
    for b in 0..ny {
        let q: f64 = (0..nu).map(|a| ty.counts[a * ny + b]).sum::<usize>() as f64 / n;
        h_y -= xlog2(q);
    }
    Ok(h_joint - h_y)
}

#[inline]
fn xlog2(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

// ---------------------------------------------------------------------------
// Bit-packed binary internals
// ---------------------------------------------------------------------------

/// Pairwise empirical counts (n00, n01, n10, n11) of two packed sequences.
#[inline]
fn pair_counts(a: u64, b: u64, n: u32) -> [f64; 4] {
    let n11 = (a & b).count_ones();
    let na = a.count_ones();
    let nb = b.count_ones();
    let n10 = na - n11;
    let n01 = nb - n11;
    let n00 = n + n11 - na - nb;
    let inv = 1.0 / n as f64;
    [
        n00 as f64 * inv,
        n01 as f64 * inv,
        n10 as f64 * inv,
        n11 as f64 * inv,
    ]
}

/// Joint typicality of packed (a, b) against a flat model p[(a_bit, b_bit)],
/// with the zero-cell exclusion of the definition.
#[inline]
fn packed_jointly_typical(a: u64, b: u64, n: u32, p: &[f64; 4], delta: f64) -> bool {
    let q = pair_counts(a, b, n);
    for abit in 0..2usize {
        let pa = p[abit * 2] + p[abit * 2 + 1];
        let qa = q[abit * 2] + q[abit * 2 + 1];
        for bbit in 0..2usize {
            let cell = p[abit * 2 + bbit];
            let cond = if pa > 0.0 { cell / pa } else { 0.0 };
            if cond * qa == 0.0 {
                continue;
            }
            if (q[abit * 2 + bbit] - cell).abs() > delta {
                return false;
            }
        }
    }
    true
}

/// Conditional typicality of packed `b` given `a` against the same layout.
#[inline]
fn packed_cond_typical(b: u64, a: u64, n: u32, p: &[f64; 4], delta: f64) -> bool {
    let q = pair_counts(a, b, n);
    for abit in 0..2usize {
        let pa = p[abit * 2] + p[abit * 2 + 1];
        let qa = q[abit * 2] + q[abit * 2 + 1];
        for bbit in 0..2usize {
            let cond = if pa > 0.0 { p[abit * 2 + bbit] / pa } else { 0.0 };
            let target = cond * qa;
            if target == 0.0 {
                continue;
            }
            if (q[abit * 2 + bbit] - target).abs() > delta {
                return false;
            }
        }
    }
    true
}

/// Triple counts over (a, b, c), flat index a·4 + b·2 + c.
#[inline]
fn triple_counts(a: u64, b: u64, c: u64, n: u32) -> [f64; 8] {
    let inv = 1.0 / n as f64;
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let (na, nb, nc) = (a & mask, b & mask, c & mask);
    let cells = [
        !na & !nb & !nc & mask,
        !na & !nb & nc & mask,
        !na & nb & !nc & mask,
        !na & nb & nc & mask,
        na & !nb & !nc,
        na & !nb & nc,
        na & nb & !nc,
        na & nb & nc,
    ];
    let mut out = [0.0; 8];
    for (o, cell) in out.iter_mut().zip(cells) {
        *o = cell.count_ones() as f64 * inv;
    }
    out
}

/// Conditional typicality of the pair (b, c) given `a`, model flat over
/// (a, b, c).
#[inline]
fn packed_pair_cond_typical(b: u64, c: u64, a: u64, n: u32, p: &[f64; 8], delta: f64) -> bool {
    let q = triple_counts(a, b, c, n);
    for abit in 0..2usize {
        let pa: f64 = (0..4).map(|i| p[abit * 4 + i]).sum();
        let qa: f64 = (0..4).map(|i| q[abit * 4 + i]).sum();
        for i in 0..4usize {
            let cond = if pa > 0.0 { p[abit * 4 + i] / pa } else { 0.0 };
            let target = cond * qa;
            if target == 0.0 {
                continue;
            }
            if (q[abit * 4 + i] - target).abs() > delta {
                return false;
            }
        }
    }
    true
}

/// Conditional typicality of `c` given the pair (a, b), model flat over
/// (a, b, c).
#[inline]
fn packed_one_given_pair_typical(
    c: u64,
    a: u64,
    b: u64,
    n: u32,
    p: &[f64; 8],
    delta: f64,
) -> bool {
    let q = triple_counts(a, b, c, n);
    for ab in 0..4usize {
        let pab = p[ab * 2] + p[ab * 2 + 1];
        let qab = q[ab * 2] + q[ab * 2 + 1];
        for cbit in 0..2usize {
            let cond = if pab > 0.0 { p[ab * 2 + cbit] / pab } else { 0.0 };
            let target = cond * qab;
            if target == 0.0 {
                continue;
            }
            if (q[ab * 2 + cbit] - target).abs() > delta {
                return false;
            }
        }
    }
    true
}

/// Plain joint typicality of a triple against a flat model over (a, b, c),
/// with the simple zero-mass exclusion.
#[inline]
fn packed_triple_typical(a: u64, b: u64, c: u64, n: u32, p: &[f64; 8], delta: f64) -> bool {
    let q = triple_counts(a, b, c, n);
    (0..8).all(|i| p[i] == 0.0 || (q[i] - p[i]).abs() <= delta)
}

fn flat_pair(j: &Joint, first: Role, second: Role) -> Result<[f64; 4], ProbError> {
    let m = j.marginalize(&[first, second])?;
    let mut out = [0.0; 4];
    out.copy_from_slice(m.mass());
    Ok(out)
}

fn flat_triple(j: &Joint, order: [Role; 3]) -> Result<[f64; 8], ProbError> {
    let m = j.marginalize(&order)?;
    let mut out = [0.0; 8];
    out.copy_from_slice(m.mass());
    Ok(out)
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draw a packed length-n i.i.d. Bernoulli(p1) word.
fn draw_word(rng: &mut ChaCha8Rng, n: usize, p1: f64) -> u64 {
    let mut w = 0u64;
    for t in 0..n {
        if rng.gen::<f64>() < p1 {
            w |= 1 << t;
        }
    }
    w
}

/// Draw an aligned (x, y) pair from a 2-axis binary joint.
fn draw_pair(rng: &mut ChaCha8Rng, n: usize, p: &[f64; 4]) -> (u64, u64) {
    let (mut x, mut y) = (0u64, 0u64);
    for t in 0..n {
        let r = rng.gen::<f64>();
        let cell = if r < p[0] {
            0
        } else if r < p[0] + p[1] {
            1
        } else if r < p[0] + p[1] + p[2] {
            2
        } else {
            3
        };
        if cell >= 2 {
            x |= 1 << t;
        }
        if cell % 2 == 1 {
            y |= 1 << t;
        }
    }
    (x, y)
}

// ---------------------------------------------------------------------------
// Configuration and results
// ---------------------------------------------------------------------------

/// Common Monte-Carlo parameters shared by all schemes.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n: usize,
    pub trials: usize,
    pub hyp: HypothesisPair,
    /// single typicality slack shared by every check in the run
    pub delta_typ: f64,
    pub seed: u64,
}

impl SimConfig {
    fn validate(&self) -> Result<(), SimError> {
        if self.n == 0 || self.n > 64 || self.trials == 0 || self.delta_typ <= 0.0 {
            return Err(SimError::Unsupported);
        }
        if self.hyp.h0().dims() != [2, 2] {
            return Err(SimError::Unsupported);
        }
        Ok(())
    }
}

/// Testing-against-independence scheme parameters: the auxiliary chain
/// channels, the three rate knobs, and the distortion measure.
#[derive(Debug, Clone)]
pub struct TaiScheme {
    pub q_v_given_x: Channel,
    pub q_u_given_v: Channel,
    /// rate of the detection codebook (number of u-words = 2^{nR̂})
    pub r_hat: f64,
    /// rate of the reconstruction codebook (v-words per u = 2^{nS₂})
    pub s2: f64,
    /// binning rate of the reconstruction layer (bins = 2^{nR′})
    pub r_prime: f64,
    pub distortion: DistortionMeasure,
}

/// General-hypothesis scheme parameters: the quantization channel and the
/// rate available for the common message.
#[derive(Debug, Clone)]
pub struct GeneralScheme {
    pub strategy: Channel,
    pub r_prime: f64,
}

/// Aggregated outcome of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub n: usize,
    pub trials: usize,
    /// fraction of null-hypothesis trials decided H₁ (encoder error messages
    /// included, per the scheme)
    pub alpha_hat: f64,
    /// fraction of alternative-hypothesis trials decided H₀
    pub beta_hat: f64,
    /// −(1/n)·log₂ β̂; absent when no type-II error was observed
    pub exponent_pointwise: Option<f64>,
    /// mean per-letter distortion over correct-H₀ trials with a successful
    /// reconstruction; absent when no such trial exists
    pub distortion_hat: Option<f64>,
    /// number of trials supporting `distortion_hat`
    pub distortion_support: usize,
    /// distortion of every decision-H₀ reconstruction regardless of the true
    /// hypothesis, each hypothesis normalized by its own trial count
    pub distortion_decision_h0: Option<f64>,
    pub encoder_errors_h0: usize,
    pub declared_h0_under_h0: usize,
    pub declared_h0_under_h1: usize,
    /// reconstruction attempts that failed to find a unique compatible
    /// codeword in the bin
    pub reconstruction_failures: usize,
    /// among encode-success null trials, fraction with (u, x, y) jointly
    /// typical (Markov-lemma diagnostic; testing-against-independence only)
    pub joint_typical_fraction: Option<f64>,
}

/// Least-squares slope of −log₂ β̂ₙ against n, in bits per symbol. Points
/// with no observed type-II error are skipped; at least two points needed.
pub fn exponent_slope(results: &[SimResult]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = results
        .iter()
        .filter(|r| r.beta_hat > 0.0)
        .map(|r| (r.n as f64, -r.beta_hat.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((m * sxy - sx * sy) / denom)
}

// ---------------------------------------------------------------------------
// Testing-against-independence scheme
// ---------------------------------------------------------------------------

/// Layered random codebook: typical u-words, conditionally typical v-words
/// per u, and uniform random bins over the v-layer.
#[derive(Debug, Clone)]
pub struct TaiCodebook {
    pub n: usize,
    u_words: Vec<u64>,
    v_words: Vec<Vec<u64>>,
    bin_of: Vec<Vec<u32>>,
    pub bins: usize,
    pub seed: u64,
}

impl TaiCodebook {
    pub fn u_count(&self) -> usize {
        self.u_words.len()
    }

    pub fn v_count_per_u(&self) -> usize {
        self.v_words.first().map_or(0, Vec::len)
    }
}

fn count_from_rate(n: usize, rate: f64) -> Result<usize, SimError> {
    let log2 = n as f64 * rate;
    if log2 > WORD_CAP_LOG2 {
        return Err(SimError::Budget(log2, WORD_CAP_LOG2));
    }
    Ok((2f64.powf(log2)).ceil().max(1.0) as usize)
}

/// Build the two-layer codebook for the testing-against-independence scheme,
/// reproducibly from the seed.
pub fn build_tai_codebook(
    q_u: &Dist,
    q_v_given_u: &Channel,
    rates: (f64, f64, f64),
    n: usize,
    delta: f64,
    seed: u64,
) -> Result<TaiCodebook, SimError> {
    if q_u.mass().len() != 2 || n == 0 || n > 64 {
        return Err(SimError::Unsupported);
    }
    let (r_hat, s2, r_prime) = rates;
    let m1 = count_from_rate(n, r_hat)?;
    let m2 = count_from_rate(n, s2)?;
    let bins = count_from_rate(n, r_prime)?;
    if (m1 as f64) * (m2 as f64) > 2f64.powf(WORD_CAP_LOG2) {
        return Err(SimError::Budget(
            ((m1 as f64) * (m2 as f64)).log2(),
            WORD_CAP_LOG2,
        ));
    }
    let mut rng = trial_rng(seed, 0);
    let qu1 = q_u.mass()[1];
    // model for conditional typicality of v given u
    let q_uv = crate::prob::compose(q_u, Role::U, q_v_given_u, Role::V)
        .map_err(SimError::Prob)?;
    let p_uv = flat_pair(&q_uv, Role::U, Role::V)?;
    let mut u_words = Vec::with_capacity(m1);
    for _ in 0..m1 {
        let mut found = None;
        for _ in 0..SAMPLING_ATTEMPTS {
            let w = draw_word(&mut rng, n, qu1);
            let ones = w.count_ones() as f64 / n as f64;
            let ok0 = q_u.mass()[0] == 0.0 || ((1.0 - ones) - q_u.mass()[0]).abs() <= delta;
            let ok1 = qu1 == 0.0 || (ones - qu1).abs() <= delta;
            if ok0 && ok1 {
                found = Some(w);
                break;
            }
        }
        u_words.push(found.ok_or(SimError::Sampling(SAMPLING_ATTEMPTS))?);
    }
    let mut v_words = Vec::with_capacity(m1);
    let mut bin_of = Vec::with_capacity(m1);
    for &u in &u_words {
        let mut vs = Vec::with_capacity(m2);
        for _ in 0..m2 {
            let mut found = None;
            for _ in 0..SAMPLING_ATTEMPTS {
                let mut v = 0u64;
                for t in 0..n {
                    let ubit = ((u >> t) & 1) as usize;
                    if rng.gen::<f64>() < q_v_given_u.rows()[ubit][1] {
                        v |= 1 << t;
                    }
                }
                if packed_cond_typical(v, u, n as u32, &p_uv, delta) {
                    found = Some(v);
                    break;
                }
            }
            vs.push(found.ok_or(SimError::Sampling(SAMPLING_ATTEMPTS))?);
        }
        bin_of.push((0..m2).map(|_| rng.gen_range(0..bins) as u32).collect());
        v_words.push(vs);
    }
    Ok(TaiCodebook { n, u_words, v_words, bin_of, bins, seed })
}

struct TaiModel {
    p_ux: [f64; 4],
    p_uy: [f64; 4],
    p_uvx: [f64; 8],
    p_uvy: [f64; 8],
    p_uxy: [f64; 8],
    /// reconstruction g(u, v, y) packed as bit xhat at index (u·2+v)·2+y
    g: [usize; 8],
}

fn tai_model(
    p_xy: &Joint,
    scheme: &TaiScheme,
) -> Result<(TaiModel, Dist, Channel), SimError> {
    let chain = p_xy
        .extend(Role::X, &scheme.q_v_given_x, Role::V)?
        .extend(Role::V, &scheme.q_u_given_v, Role::U)?;
    let q_u = chain.marginal(Role::U)?;
    let q_v_given_u = chain.marginalize(&[Role::U, Role::V])?.condition(Role::U)?;
    let (g, _) = crate::tai::optimal_reconstruction(&chain, &scheme.distortion)?;
    let mut g_arr = [0usize; 8];
    g_arr.copy_from_slice(&g);
    let model = TaiModel {
        p_ux: flat_pair(&chain, Role::U, Role::X)?,
        p_uy: flat_pair(&chain, Role::U, Role::Y)?,
        p_uvx: flat_triple(&chain, [Role::U, Role::V, Role::X])?,
        p_uvy: flat_triple(&chain, [Role::U, Role::V, Role::Y])?,
        p_uxy: flat_triple(&chain, [Role::U, Role::X, Role::Y])?,
        g: g_arr,
    };
    Ok((model, q_u, q_v_given_u))
}

#[derive(Default, Clone, Copy)]
struct TrialOutcome {
    declared_h0: bool,
    encoder_error: bool,
    distortion: Option<f64>,
    jointly_typical: Option<bool>,
}

/// Run the testing-against-independence scheme under both hypotheses.
pub fn simulate_tai(cfg: &SimConfig, scheme: &TaiScheme) -> Result<SimResult, SimError> {
    cfg.validate()?;
    let (model, q_u, q_v_given_u) = tai_model(cfg.hyp.h0(), scheme)?;
    let book = build_tai_codebook(
        &q_u,
        &q_v_given_u,
        (scheme.r_hat, scheme.s2, scheme.r_prime),
        cfg.n,
        cfg.delta_typ,
        cfg.seed,
    )?;
    let d = dist_table(&scheme.distortion);
    let h0 = flat_pair(cfg.hyp.h0(), Role::X, Role::Y)?;
    let h1 = flat_pair(cfg.hyp.h1(), Role::X, Role::Y)?;
    let run = |source: &[f64; 4], base_stream: u64| -> Vec<TrialOutcome> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, base_stream + t as u64);
                tai_trial_with_distortion(
                    &mut rng,
                    cfg.n,
                    source,
                    &model,
                    &book,
                    cfg.delta_typ,
                    &d,
                )
            })
            .collect()
    };
    let outcomes0 = run(&h0, 1);
    let outcomes1 = run(&h1, 1 + cfg.trials as u64);
    Ok(aggregate(cfg, &outcomes0, &outcomes1, true))
}

fn dist_table(d: &DistortionMeasure) -> [f64; 4] {
    [d.entry(0, 0), d.entry(0, 1), d.entry(1, 0), d.entry(1, 1)]
}

fn tai_trial_with_distortion(
    rng: &mut ChaCha8Rng,
    n: usize,
    source: &[f64; 4],
    model: &TaiModel,
    book: &TaiCodebook,
    delta: f64,
    d: &[f64; 4],
) -> TrialOutcome {
    let nw = n as u32;
    let (x, y) = draw_pair(rng, n, source);
    let s1 = book
        .u_words
        .iter()
        .position(|&u| packed_jointly_typical(u, x, nw, &model.p_ux, delta));
    let Some(s1) = s1 else {
        return TrialOutcome { encoder_error: true, ..Default::default() };
    };
    let u = book.u_words[s1];
    // decoder-side checks run at twice the encoder slack: the encoder only
    // guarantees the chosen codeword sits inside its own δ-ball, and the
    // channel contracts that deviation, so a nested 2δ decision ball is what
    // keeps the acceptance region aligned with encoding success
    let d2 = 2.0 * delta;
    let jointly_typical = Some(packed_triple_typical(u, x, y, nw, &model.p_uxy, d2));
    if !packed_jointly_typical(u, y, nw, &model.p_uy, d2) {
        return TrialOutcome { jointly_typical, ..Default::default() };
    }
    let s2 = book.v_words[s1]
        .iter()
        .position(|&v| packed_pair_cond_typical(v, x, u, nw, &model.p_uvx, delta));
    let distortion = s2.and_then(|s2| {
        let bin = book.bin_of[s1][s2];
        let mut hit = None;
        for (k, &v) in book.v_words[s1].iter().enumerate() {
            if book.bin_of[s1][k] != bin {
                continue;
            }
            if packed_one_given_pair_typical(v, u, y, nw, &model.p_uvy, d2) {
                if hit.is_some() {
                    return None;
                }
                hit = Some(v);
            }
        }
        let v = hit?;
        let mut err = 0.0;
        for t in 0..n {
            let (ub, vb, yb, xb) =
                ((u >> t) & 1, (v >> t) & 1, (y >> t) & 1, (x >> t) & 1);
            let xhat = model.g[(((ub * 2 + vb) * 2) + yb) as usize];
            err += d[xb as usize * 2 + xhat];
        }
        Some(err / n as f64)
    });
    TrialOutcome {
        declared_h0: true,
        encoder_error: false,
        distortion,
        jointly_typical,
    }
}

fn aggregate(
    cfg: &SimConfig,
    outcomes0: &[TrialOutcome],
    outcomes1: &[TrialOutcome],
    with_distortion: bool,
) -> SimResult {
    let t = cfg.trials as f64;
    let declared_h0_under_h0 = outcomes0.iter().filter(|o| o.declared_h0).count();
    let declared_h0_under_h1 = outcomes1.iter().filter(|o| o.declared_h0).count();
    let encoder_errors_h0 = outcomes0.iter().filter(|o| o.encoder_error).count();
    let alpha_hat = 1.0 - declared_h0_under_h0 as f64 / t;
    let beta_hat = declared_h0_under_h1 as f64 / t;
    let (mut dsum, mut dcount, mut dfail) = (0.0, 0usize, 0usize);
    let mut dsum1 = 0.0;
    if with_distortion {
        for o in outcomes0 {
            if o.declared_h0 {
                match o.distortion {
                    Some(v) => {
                        dsum += v;
                        dcount += 1;
                    }
                    None => dfail += 1,
                }
            }
        }
        for o in outcomes1 {
            if o.declared_h0 {
                match o.distortion {
                    Some(v) => dsum1 += v,
                    None => dfail += 1,
                }
            }
        }
    }
    let distortion_hat = if dcount > 0 { Some(dsum / dcount as f64) } else { None };
    let distortion_decision_h0 = if with_distortion && (dcount > 0 || dsum1 > 0.0) {
        Some(dsum / t + dsum1 / t)
    } else {
        None
    };
    let succ: Vec<&TrialOutcome> = outcomes0
        .iter()
        .filter(|o| o.jointly_typical.is_some())
        .collect();
    let joint_typical_fraction = if succ.is_empty() {
        None
    } else {
        Some(
            succ.iter().filter(|o| o.jointly_typical == Some(true)).count() as f64
                / succ.len() as f64,
        )
    };
    SimResult {
        n: cfg.n,
        trials: cfg.trials,
        alpha_hat,
        beta_hat,
        exponent_pointwise: if beta_hat > 0.0 {
            Some(-beta_hat.log2() / cfg.n as f64)
        } else {
            None
        },
        distortion_hat,
        distortion_support: dcount,
        distortion_decision_h0,
        encoder_errors_h0,
        declared_h0_under_h0,
        declared_h0_under_h1,
        reconstruction_failures: dfail,
        joint_typical_fraction: if with_distortion { joint_typical_fraction } else { None },
    }
}

// ---------------------------------------------------------------------------
// General-hypothesis schemes
// ---------------------------------------------------------------------------

/// Type-indexed codebook of the general schemes: one sub-codebook per source
/// type, with a random bin map attached only where binning is needed.
#[derive(Debug, Clone)]
pub struct GeneralCodebook {
    pub n: usize,
    /// sub-codebook for x-sequences with k ones, k = 0..=n
    subs: Vec<SubCodebook>,
    pub bins: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
struct SubCodebook {
    words: Vec<u64>,
    /// None means the identity (one bin per codeword)
    bin_of: Option<Vec<u32>>,
}

impl GeneralCodebook {
    pub fn sub_count(&self) -> usize {
        self.subs.len()
    }

    pub fn sub_size(&self, k: usize) -> usize {
        self.subs[k].words.len()
    }

    pub fn is_binned(&self, k: usize) -> bool {
        self.subs[k].bin_of.is_some()
    }

    /// Packed codewords of one sub-codebook, bit t = symbol at position t.
    pub fn words(&self, k: usize) -> &[u64] {
        &self.subs[k].words
    }
}

/// Build one uniform sub-codebook per binary source type, sized by the
/// mutual information between the type and the strategy (polynomial factors
/// dropped as a finite-n simplification), with a uniform bin map attached
/// whenever the sub-codebook outgrows the available rate.
pub fn build_general_codebook(
    strategy: &Channel,
    r_prime: f64,
    n: usize,
    seed: u64,
) -> Result<GeneralCodebook, SimError> {
    if n == 0 || n > 64 || strategy.input().size() != 2 || strategy.output().size() != 2 {
        return Err(SimError::Unsupported);
    }
    let bins = count_from_rate(n, r_prime)?;
    let mut rng = trial_rng(seed, 0);
    let mut subs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let qx = Dist::new(
            Alphabet::binary(),
            vec![1.0 - k as f64 / n as f64, k as f64 / n as f64],
        )?;
        let j = crate::prob::compose(&qx, Role::X, strategy, Role::U)?;
        let info = j.mutual_information();
        let size_log2 = (n as f64 * info).max(0.0);
        if size_log2 > WORD_CAP_LOG2 {
            return Err(SimError::Budget(size_log2, WORD_CAP_LOG2));
        }
        let m = 2f64.powf(size_log2).ceil() as usize;
        // codewords drawn uniformly from the induced u-type class
        let qu1 = j.marginal(Role::U)?.mass()[1];
        let ones = (n as f64 * qu1).round() as usize;
        let words: Vec<u64> = (0..m).map(|_| draw_of_type(&mut rng, n, ones)).collect();
        let bin_of = if size_log2 >= n as f64 * r_prime {
            Some((0..m).map(|_| rng.gen_range(0..bins) as u32).collect())
        } else {
            None
        };
        subs.push(SubCodebook { words, bin_of });
    }
    Ok(GeneralCodebook { n, subs, bins, seed })
}

/// Uniform random word with exactly `ones` set bits among `n`.
fn draw_of_type(rng: &mut ChaCha8Rng, n: usize, ones: usize) -> u64 {
    let mut idx: Vec<usize> = (0..n).collect();
    // partial Fisher–Yates: the first `ones` entries form a uniform subset
    for i in 0..ones.min(n) {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    let mut w = 0u64;
    for &b in idx.iter().take(ones.min(n)) {
        w |= 1 << b;
    }
    w
}

/// Decoder variant of the general scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneralDecoder {
    /// pick the min-empirical-entropy bin member, then test it
    MinEntropy,
    /// declare H₀ as soon as any bin member is jointly typical
    BinScan,
}

/// Run a general-hypothesis scheme under both hypotheses.
pub fn simulate_general(
    cfg: &SimConfig,
    scheme: &GeneralScheme,
    decoder: GeneralDecoder,
) -> Result<SimResult, SimError> {
    cfg.validate()?;
    if scheme.strategy.input().size() != 2 || scheme.strategy.output().size() != 2 {
        return Err(SimError::Unsupported);
    }
    let book = build_general_codebook(&scheme.strategy, scheme.r_prime, cfg.n, cfg.seed)?;
    // typicality models: strategy conditional for encoding, null-hypothesis
    // (U, Y) joint for the decision, null X-marginal for the error message
    let p_xu = {
        // layout (x, u) for conditional typicality of u given x
        let px = cfg.hyp.h0().marginal(Role::X)?;
        let j = crate::prob::compose(&px, Role::X, &scheme.strategy, Role::U)?;
        flat_pair(&j, Role::X, Role::U)?
    };
    let p_uy = {
        let t0 = cfg.hyp.h0().extend(Role::X, &scheme.strategy, Role::U)?;
        flat_pair(&t0, Role::U, Role::Y)?
    };
    let px1 = cfg.hyp.h0().marginal(Role::X)?.mass()[1];
    let h0 = flat_pair(cfg.hyp.h0(), Role::X, Role::Y)?;
    let h1 = flat_pair(cfg.hyp.h1(), Role::X, Role::Y)?;
    let run = |source: &[f64; 4], base_stream: u64| -> Vec<TrialOutcome> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, base_stream + t as u64);
                general_trial(
                    &mut rng,
                    cfg,
                    &book,
                    decoder,
                    source,
                    &p_xu,
                    &p_uy,
                    px1,
                )
            })
            .collect()
    };
    let outcomes0 = run(&h0, 1);
    let outcomes1 = run(&h1, 1 + cfg.trials as u64);
    Ok(aggregate(cfg, &outcomes0, &outcomes1, false))
}

#[allow(clippy::too_many_arguments)]
fn general_trial(
    rng: &mut ChaCha8Rng,
    cfg: &SimConfig,
    book: &GeneralCodebook,
    decoder: GeneralDecoder,
    source: &[f64; 4],
    p_xu: &[f64; 4],
    p_uy: &[f64; 4],
    px1: f64,
) -> TrialOutcome {
    let n = cfg.n;
    let nw = n as u32;
    let delta = cfg.delta_typ;
    let (x, y) = draw_pair(rng, n, source);
    // the scan scheme only operates on typical source sequences
    if decoder == GeneralDecoder::BinScan {
        let ones = x.count_ones() as f64 / n as f64;
        let ok0 = 1.0 - px1 == 0.0 || ((1.0 - ones) - (1.0 - px1)).abs() <= delta;
        let ok1 = px1 == 0.0 || (ones - px1).abs() <= delta;
        if !(ok0 && ok1) {
            return TrialOutcome { encoder_error: true, ..Default::default() };
        }
    }
    let k = x.count_ones() as usize;
    let sub = &book.subs[k];
    // encoder: first codeword conditionally typical with x
    let chosen = sub
        .words
        .iter()
        .position(|&u| packed_cond_typical(u, x, nw, p_xu, delta));
    let Some(chosen) = chosen else {
        return TrialOutcome { encoder_error: true, ..Default::default() };
    };
    // members of the transmitted bin, in index order
    let members: Vec<u64> = match &sub.bin_of {
        None => vec![sub.words[chosen]],
        Some(bin_of) => {
            let b = bin_of[chosen];
            sub.words
                .iter()
                .zip(bin_of)
                .filter(|(_, &bb)| bb == b)
                .map(|(&w, _)| w)
                .collect()
        }
    };
    // decision at twice the encoder slack (nested typicality balls); see the
    // matching note in the reconstruction scheme's trial
    let d2 = 2.0 * delta;
    let declared_h0 = match decoder {
        GeneralDecoder::BinScan => members
            .iter()
            .any(|&u| packed_jointly_typical(u, y, nw, p_uy, d2)),
        GeneralDecoder::MinEntropy => {
            let mut best = (f64::INFINITY, 0u64);
            for &u in &members {
                let h = packed_cond_entropy(u, y, nw);
                if h < best.0 {
                    best = (h, u);
                }
            }
            packed_jointly_typical(best.1, y, nw, p_uy, d2)
        }
    };
    TrialOutcome { declared_h0, ..Default::default() }
}

/// Empirical H(u | y) of two packed words, in bits.
fn packed_cond_entropy(u: u64, y: u64, n: u32) -> f64 {
    let q = pair_counts(y, u, n);
    let h_joint: f64 = -q.iter().map(|&c| xlog2(c)).sum::<f64>();
    let h_y = -(xlog2(q[0] + q[1]) + xlog2(q[2] + q[3]));
    h_joint - h_y
}
