//! Exact finite-alphabet probability algebra.
//!
//! Everything here is base-2: entropies, divergences and mutual informations
//! are returned in bits. The conventions `0·log 0 = 0` and `0·log(0/0) = 0`
//! apply throughout, and a mass placed where the reference measure vanishes
//! yields a distinguished `+∞` (never an error), so optimizers can treat it
//! as an infeasible penalty.
//!
//! All values are immutable after construction and all operations are pure;
//! they can be evaluated concurrently without shared state.

use thiserror::Error;

/// Tolerance on probability-mass normalization at construction time.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ProbError {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("alphabet labels must be distinct")]
    DuplicateLabel,
    #[error("probability mass must be nonnegative, found {0}")]
    NegativeMass(f64),
    #[error("mass sums to {0}, expected 1 within {MASS_TOL}")]
    NotNormalized(f64),
    #[error("channel row {0} sums to {1}, expected 1 within {MASS_TOL}")]
    RowNotNormalized(usize, f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("role {0:?} is not an axis of this joint")]
    MissingRole(Role),
    #[error("role {0:?} appears on more than one axis")]
    DuplicateRole(Role),
    #[error("a joint needs between 2 and 4 axes, got {0}")]
    BadAxisCount(usize),
}

/// Variable roles a joint axis can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    U,
    V,
    X,
    Y,
    Xhat,
}

/// A finite symbol set with ordered, distinct labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new(labels: Vec<String>) -> Result<Self, ProbError> {
        if labels.is_empty() {
            return Err(ProbError::EmptyAlphabet);
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[i + 1..].contains(a) {
                return Err(ProbError::DuplicateLabel);
            }
        }
        Ok(Self { labels })
    }

    /// Alphabet `{0, 1, ..., n-1}` with the index as label.
    pub fn indexed(n: usize) -> Self {
        Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn binary() -> Self {
        Self::indexed(2)
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// A probability vector over one alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    alphabet: Alphabet,
    mass: Vec<f64>,
}

impl Dist {
    pub fn new(alphabet: Alphabet, mass: Vec<f64>) -> Result<Self, ProbError> {
        if mass.len() != alphabet.size() {
            return Err(ProbError::ShapeMismatch(format!(
                "mass length {} vs alphabet size {}",
                mass.len(),
                alphabet.size()
            )));
        }
        check_mass(&mass)?;
        Ok(Self { alphabet, mass })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        Self {
            alphabet,
            mass: vec![1.0 / n as f64; n],
        }
    }

    /// Binary distribution with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "bernoulli parameter {p} outside [0, 1]");
        Self {
            alphabet: Alphabet::binary(),
            mass: vec![1.0 - p, p],
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.mass)
    }

    /// `D(self ‖ q)` in bits; `+∞` when `self` has mass outside `q`'s support.
    pub fn kl_to(&self, q: &Dist) -> Result<f64, ProbError> {
        if self.alphabet.size() != q.alphabet.size() {
            return Err(ProbError::ShapeMismatch("kl over different alphabets".into()));
        }
        Ok(kl_bits(&self.mass, &q.mass))
    }

    /// Explicitly renormalize (construction never does this silently).
    pub fn normalized(&self) -> Self {
        let s: f64 = self.mass.iter().sum();
        Self {
            alphabet: self.alphabet.clone(),
            mass: self.mass.iter().map(|m| m / s).collect(),
        }
    }
}

/// A joint pmf over 2 to 4 role-tagged axes, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    axes: Vec<(Role, Alphabet)>,
    dims: Vec<usize>,
    mass: Vec<f64>,
}

impl Joint {
    pub fn new(axes: Vec<(Role, Alphabet)>, mass: Vec<f64>) -> Result<Self, ProbError> {
        if !(2..=4).contains(&axes.len()) {
            return Err(ProbError::BadAxisCount(axes.len()));
        }
        for (i, (r, _)) in axes.iter().enumerate() {
            if axes[i + 1..].iter().any(|(s, _)| s == r) {
                return Err(ProbError::DuplicateRole(*r));
            }
        }
        let dims: Vec<usize> = axes.iter().map(|(_, a)| a.size()).collect();
        if mass.len() != dims.iter().product::<usize>() {
            return Err(ProbError::ShapeMismatch(format!(
                "mass length {} vs dims {:?}",
                mass.len(),
                dims
            )));
        }
        check_mass(&mass)?;
        Ok(Self { axes, dims, mass })
    }

    pub fn from_fn(
        axes: Vec<(Role, Alphabet)>,
        f: impl Fn(&[usize]) -> f64,
    ) -> Result<Self, ProbError> {
        let dims: Vec<usize> = axes.iter().map(|(_, a)| a.size()).collect();
        let total: usize = dims.iter().product();
        let mut mass = Vec::with_capacity(total);
        let mut idx = vec![0usize; dims.len()];
        for flat in 0..total {
            unflatten(flat, &dims, &mut idx);
            mass.push(f(&idx));
        }
        Joint::new(axes, mass)
    }

    pub fn axes(&self) -> &[(Role, Alphabet)] {
        &self.axes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn axis_of(&self, role: Role) -> Result<usize, ProbError> {
        self.axes
            .iter()
            .position(|(r, _)| *r == role)
            .ok_or(ProbError::MissingRole(role))
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.mass[flatten(idx, &self.dims)]
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.mass)
    }

    /// Marginal distribution of a single role.
    pub fn marginal(&self, role: Role) -> Result<Dist, ProbError> {
        let ax = self.axis_of(role)?;
        let mut out = vec![0.0; self.dims[ax]];
        let mut idx = vec![0usize; self.dims.len()];
        for (flat, &m) in self.mass.iter().enumerate() {
            unflatten(flat, &self.dims, &mut idx);
            out[idx[ax]] += m;
        }
        Dist::new(self.axes[ax].1.clone(), fix_rounding(out))
    }

    /// Marginal joint over the given roles (at least two), in the given order.
    pub fn marginalize(&self, keep: &[Role]) -> Result<Joint, ProbError> {
        let axes_idx: Vec<usize> = keep
            .iter()
            .map(|r| self.axis_of(*r))
            .collect::<Result<_, _>>()?;
        let out_axes: Vec<(Role, Alphabet)> =
            axes_idx.iter().map(|&i| self.axes[i].clone()).collect();
        let out_dims: Vec<usize> = axes_idx.iter().map(|&i| self.dims[i]).collect();
        let mut out = vec![0.0; out_dims.iter().product()];
        let mut idx = vec![0usize; self.dims.len()];
        let mut oidx = vec![0usize; out_dims.len()];
        for (flat, &m) in self.mass.iter().enumerate() {
            unflatten(flat, &self.dims, &mut idx);
            for (k, &i) in axes_idx.iter().enumerate() {
                oidx[k] = idx[i];
            }
            out[flatten(&oidx, &out_dims)] += m;
        }
        Joint::new(out_axes, fix_rounding(out))
    }

    /// `D(self ‖ q)` in bits. `q` may list the same roles in any order.
    pub fn kl_to(&self, q: &Joint) -> Result<f64, ProbError> {
        let q = q.reordered_like(self)?;
        Ok(kl_bits(&self.mass, &q.mass))
    }

    fn reordered_like(&self, model: &Joint) -> Result<Joint, ProbError> {
        if self.axes.len() != model.axes.len() {
            return Err(ProbError::ShapeMismatch("different axis counts".into()));
        }
        let same = self
            .axes
            .iter()
            .zip(&model.axes)
            .all(|((r, a), (s, b))| r == s && a.size() == b.size());
        if same {
            return Ok(self.clone());
        }
        let roles: Vec<Role> = model.axes.iter().map(|(r, _)| *r).collect();
        let perm: Vec<usize> = roles
            .iter()
            .map(|r| self.axis_of(*r))
            .collect::<Result<_, _>>()?;
        for (k, &p) in perm.iter().enumerate() {
            if self.dims[p] != model.dims[k] {
                return Err(ProbError::ShapeMismatch(format!(
                    "axis {:?} has size {} vs {}",
                    roles[k], self.dims[p], model.dims[k]
                )));
            }
        }
        let out_axes: Vec<(Role, Alphabet)> = perm.iter().map(|&p| self.axes[p].clone()).collect();
        let out_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let mut out = vec![0.0; self.mass.len()];
        let mut idx = vec![0usize; self.dims.len()];
        let mut oidx = vec![0usize; out_dims.len()];
        for (flat, &m) in self.mass.iter().enumerate() {
            unflatten(flat, &self.dims, &mut idx);
            for (k, &p) in perm.iter().enumerate() {
                oidx[k] = idx[p];
            }
            out[flatten(&oidx, &out_dims)] = m;
        }
        Joint::new(out_axes, out)
    }

    /// Mutual information between the two axes of a bivariate joint.
    pub fn mutual_information(&self) -> f64 {
        assert_eq!(self.axes.len(), 2, "mutual_information needs a 2-axis joint");
        let ma = self.marginal(self.axes[0].0).unwrap();
        let mb = self.marginal(self.axes[1].0).unwrap();
        ma.entropy() + mb.entropy() - self.entropy()
    }

    /// `I(a; b | given)` in bits. Conditioning on several roles merges them
    /// into one composite conditioner.
    pub fn conditional_mutual_information(
        &self,
        a: Role,
        b: Role,
        given: &[Role],
    ) -> Result<f64, ProbError> {
        let ia = self.axis_of(a)?;
        let ib = self.axis_of(b)?;
        let ig: Vec<usize> = given
            .iter()
            .map(|r| self.axis_of(*r))
            .collect::<Result<_, _>>()?;
        if ig.contains(&ia) || ig.contains(&ib) || ia == ib {
            return Err(ProbError::ShapeMismatch(
                "conditional MI roles must be distinct".into(),
            ));
        }
        // Reduce to p(a, b, z) with z the merged conditioner, then sum
        // p(a,b,z) log [ p(a,b,z) p(z) / (p(a,z) p(b,z)) ].
        let na = self.dims[ia];
        let nb = self.dims[ib];
        let nz: usize = ig.iter().map(|&i| self.dims[i]).product::<usize>().max(1);
        let mut pabz = vec![0.0; na * nb * nz];
        let mut idx = vec![0usize; self.dims.len()];
        for (flat, &m) in self.mass.iter().enumerate() {
            unflatten(flat, &self.dims, &mut idx);
            let mut z = 0usize;
            for &i in &ig {
                z = z * self.dims[i] + idx[i];
            }
            pabz[(idx[ia] * nb + idx[ib]) * nz + z] += m;
        }
        let mut pz = vec![0.0; nz];
        let mut paz = vec![0.0; na * nz];
        let mut pbz = vec![0.0; nb * nz];
        for ai in 0..na {
            for bi in 0..nb {
                for z in 0..nz {
                    let m = pabz[(ai * nb + bi) * nz + z];
                    pz[z] += m;
                    paz[ai * nz + z] += m;
                    pbz[bi * nz + z] += m;
                }
            }
        }
        let mut total = 0.0;
        for ai in 0..na {
            for bi in 0..nb {
                for z in 0..nz {
                    let m = pabz[(ai * nb + bi) * nz + z];
                    if m > 0.0 {
                        total += m
                            * ((m * pz[z]) / (paz[ai * nz + z] * pbz[bi * nz + z])).log2();
                    }
                }
            }
        }
        Ok(total.max(0.0))
    }

    /// Append a new axis produced by passing `input_role` through `channel`.
    pub fn extend(
        &self,
        input_role: Role,
        channel: &Channel,
        new_role: Role,
    ) -> Result<Joint, ProbError> {
        if self.axes.len() == 4 {
            return Err(ProbError::BadAxisCount(5));
        }
        if self.axes.iter().any(|(r, _)| *r == new_role) {
            return Err(ProbError::DuplicateRole(new_role));
        }
        let ax = self.axis_of(input_role)?;
        if self.dims[ax] != channel.input.size() {
            return Err(ProbError::ShapeMismatch(format!(
                "axis {:?} size {} vs channel input {}",
                input_role,
                self.dims[ax],
                channel.input.size()
            )));
        }
        let mut axes = self.axes.clone();
        axes.push((new_role, channel.output.clone()));
        let nw = channel.output.size();
        let mut out = Vec::with_capacity(self.mass.len() * nw);
        let mut idx = vec![0usize; self.dims.len()];
        for (flat, &m) in self.mass.iter().enumerate() {
            unflatten(flat, &self.dims, &mut idx);
            for w in 0..nw {
                out.push(m * channel.rows[idx[ax]][w]);
            }
        }
        Joint::new(axes, out)
    }

    /// Conditional law of the other axis given `given` (bivariate joints only).
    /// Rows with zero conditioning mass come out uniform.
    pub fn condition(&self, given: Role) -> Result<Channel, ProbError> {
        if self.axes.len() != 2 {
            return Err(ProbError::BadAxisCount(self.axes.len()));
        }
        let ig = self.axis_of(given)?;
        let io = 1 - ig;
        let ni = self.dims[ig];
        let no = self.dims[io];
        let mut rows = vec![vec![0.0; no]; ni];
        let mut idx = [0usize; 2];
        for (flat, &m) in self.mass.iter().enumerate() {
            unflatten(flat, &self.dims, &mut idx);
            rows[idx[ig]][idx[io]] += m;
        }
        for row in rows.iter_mut() {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                for v in row.iter_mut() {
                    *v /= s;
                }
            } else {
                for v in row.iter_mut() {
                    *v = 1.0 / no as f64;
                }
            }
        }
        Channel::new(self.axes[ig].1.clone(), self.axes[io].1.clone(), rows)
    }
}

/// A row-stochastic conditional pmf.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    input: Alphabet,
    output: Alphabet,
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(
        input: Alphabet,
        output: Alphabet,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, ProbError> {
        if rows.len() != input.size() {
            return Err(ProbError::ShapeMismatch(format!(
                "{} rows vs input size {}",
                rows.len(),
                input.size()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != output.size() {
                return Err(ProbError::ShapeMismatch(format!(
                    "row {} length {} vs output size {}",
                    i,
                    row.len(),
                    output.size()
                )));
            }
            for &v in row {
                if v < 0.0 {
                    return Err(ProbError::NegativeMass(v));
                }
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > MASS_TOL {
                return Err(ProbError::RowNotNormalized(i, s));
            }
        }
        Ok(Self { input, output, rows })
    }

    /// Binary symmetric channel with the given crossover probability.
    pub fn bsc(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "bsc crossover {p} outside [0, 1]");
        Self {
            input: Alphabet::binary(),
            output: Alphabet::binary(),
            rows: vec![vec![1.0 - p, p], vec![p, 1.0 - p]],
        }
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        let n = alphabet.size();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            input: alphabet.clone(),
            output: alphabet,
            rows,
        }
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Push a distribution through the channel (output marginal).
    pub fn push(&self, d: &Dist) -> Result<Dist, ProbError> {
        if d.alphabet().size() != self.input.size() {
            return Err(ProbError::ShapeMismatch("push alphabet mismatch".into()));
        }
        let mut out = vec![0.0; self.output.size()];
        for (i, &m) in d.mass().iter().enumerate() {
            for (j, &c) in self.rows[i].iter().enumerate() {
                out[j] += m * c;
            }
        }
        Dist::new(self.output.clone(), fix_rounding(out))
    }
}

/// Joint law of `(role_in, role_out)` when `d` feeds `c`.
pub fn compose(
    d: &Dist,
    role_in: Role,
    c: &Channel,
    role_out: Role,
) -> Result<Joint, ProbError> {
    if d.alphabet().size() != c.input().size() {
        return Err(ProbError::ShapeMismatch("compose alphabet mismatch".into()));
    }
    let mut mass = Vec::with_capacity(d.alphabet().size() * c.output().size());
    for (i, &m) in d.mass().iter().enumerate() {
        for &cj in &c.rows()[i] {
            mass.push(m * cj);
        }
    }
    Joint::new(
        vec![
            (role_in, d.alphabet().clone()),
            (role_out, c.output().clone()),
        ],
        mass,
    )
}

/// `H₂(x) = −x log₂ x − (1−x) log₂ (1−x)`.
pub fn binary_entropy(x: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "binary_entropy argument {x} outside [0, 1]");
    let mut h = 0.0;
    if x > 0.0 {
        h -= x * x.log2();
    }
    if x < 1.0 {
        h -= (1.0 - x) * (1.0 - x).log2();
    }
    h
}

/// Inverse of `binary_entropy` on `[0, 1/2]`, by bisection.
pub fn binary_entropy_inv(h: f64) -> f64 {
    assert!((0.0..=1.0).contains(&h), "binary_entropy_inv argument {h} outside [0, 1]");
    if h <= 0.0 {
        return 0.0;
    }
    if h >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Binary convolution `a ⋆ b = a(1−b) + b(1−a)`.
pub fn binary_convolve(a: f64, b: f64) -> f64 {
    assert!((0.0..=1.0).contains(&a), "binary_convolve argument {a} outside [0, 1]");
    assert!((0.0..=1.0).contains(&b), "binary_convolve argument {b} outside [0, 1]");
    a * (1.0 - b) + b * (1.0 - a)
}

/// Binary divergence `d₂(a ‖ b)` in bits.
pub fn binary_kl(a: f64, b: f64) -> f64 {
    kl_bits(&[1.0 - a, a], &[1.0 - b, b])
}

pub(crate) fn entropy_bits(mass: &[f64]) -> f64 {
    -mass
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| m * m.log2())
        .sum::<f64>()
}

// Like `kl_bits` but without the nonnegativity clamp; needed when summing
// contributions of subnormalized slices, which can be individually negative.
pub(crate) fn kl_bits_raw(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            s += pi * (pi / qi).log2();
        }
    }
    s
}

pub(crate) fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            s += pi * (pi / qi).log2();
        }
    }
    s.max(0.0)
}

pub(crate) fn flatten(idx: &[usize], dims: &[usize]) -> usize {
    let mut flat = 0usize;
    for (&i, &d) in idx.iter().zip(dims) {
        flat = flat * d + i;
    }
    flat
}

pub(crate) fn unflatten(mut flat: usize, dims: &[usize], idx: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        idx[k] = flat % dims[k];
        flat /= dims[k];
    }
}

fn check_mass(mass: &[f64]) -> Result<(), ProbError> {
    for &m in mass {
        if m < 0.0 {
            return Err(ProbError::NegativeMass(m));
        }
    }
    let s: f64 = mass.iter().sum();
    if (s - 1.0).abs() > MASS_TOL {
        return Err(ProbError::NotNormalized(s));
    }
    Ok(())
}

// Marginalization sums are exact up to rounding; nudge sums that are within
// the construction tolerance of 1 so downstream constructors do not reject
// accumulated float error.
fn fix_rounding(mass: Vec<f64>) -> Vec<f64> {
    let s: f64 = mass.iter().sum();
    if s > 0.0 && (s - 1.0).abs() <= 64.0 * MASS_TOL && (s - 1.0).abs() > 0.0 {
        mass.into_iter().map(|m| m / s).collect()
    } else {
        mass
    }
}
