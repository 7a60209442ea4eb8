//! Constrained KL minimization over the coupling set of triples whose
//! bivariate (U,X) and (U,Y) marginals are both pinned.
//!
//! The program `min D(P ‖ target)` over that set is convex with linear
//! constraints; it is solved by alternating bivariate-marginal matching
//! (iterative proportional fitting), so any local fixed point is the global
//! minimum. A dense-grid and a projected-gradient solver are provided as
//! independent cross-checks for small instances.

use crate::prob::{kl_bits, kl_bits_raw, unflatten, Joint, ProbError, Role};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

const ITERATION_CAP: usize = 10_000;
const VALUE_TOL: f64 = 1e-10;
const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum IprojectError {
    #[error("U-marginals of the two constraints disagree by {0} (coupling set empty)")]
    InconsistentMarginals(f64),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// The pinned bivariate marginals defining the coupling set.
#[derive(Debug, Clone)]
pub struct CouplingConstraints {
    q_ux: Joint,
    q_uy: Joint,
}

impl CouplingConstraints {
    /// Validates that both joints carry the same U-marginal (within 1e-9);
    /// otherwise the coupling set is empty.
    pub fn new(q_ux: Joint, q_uy: Joint) -> Result<Self, IprojectError> {
        let mu_x = q_ux.marginal(Role::U)?;
        let mu_y = q_uy.marginal(Role::U)?;
        if mu_x.alphabet().size() != mu_y.alphabet().size() {
            return Err(ProbError::ShapeMismatch("U alphabets differ".into()).into());
        }
        let gap = mu_x
            .mass()
            .iter()
            .zip(mu_y.mass())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gap > 1e-9 {
            return Err(IprojectError::InconsistentMarginals(gap));
        }
        Ok(Self { q_ux, q_uy })
    }

    pub fn q_ux(&self) -> &Joint {
        &self.q_ux
    }

    pub fn q_uy(&self) -> &Joint {
        &self.q_uy
    }

    /// Constraints read off a reference (U,X,Y) triple's own marginals.
    pub fn from_triple(j: &Joint) -> Result<Self, IprojectError> {
        Self::new(
            j.marginalize(&[Role::U, Role::X])?,
            j.marginalize(&[Role::U, Role::Y])?,
        )
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    /// Minimum divergence in bits; `+∞` when no feasible point dominates the
    /// target's support.
    pub value: f64,
    /// The minimizing triple (meaningful only for finite `value`).
    pub argmin: Joint,
    pub iterations: usize,
    /// Worst remaining marginal-constraint residual.
    pub gap: f64,
    pub converged: bool,
}

struct Instance {
    nu: usize,
    nx: usize,
    ny: usize,
    /// target mass in (u, x, y) order
    t: Vec<f64>,
    a: Vec<f64>, // pinned (u, x) marginal
    b: Vec<f64>, // pinned (u, y) marginal
}

impl Instance {
    fn build(target: &Joint, constraints: &CouplingConstraints) -> Result<Self, IprojectError> {
        let (iu, ix, iy) = (
            target.axis_of(Role::U)?,
            target.axis_of(Role::X)?,
            target.axis_of(Role::Y)?,
        );
        let dims = target.dims();
        let (nu, nx, ny) = (dims[iu], dims[ix], dims[iy]);
        let mut t = vec![0.0; nu * nx * ny];
        let mut idx = vec![0usize; 3];
        for (flat, &m) in target.mass().iter().enumerate() {
            unflatten(flat, dims, &mut idx);
            t[(idx[iu] * nx + idx[ix]) * ny + idx[iy]] = m;
        }
        let grab = |j: &Joint, other: Role, no: usize| -> Result<Vec<f64>, IprojectError> {
            let (ju, jo) = (j.axis_of(Role::U)?, j.axis_of(other)?);
            let mut out = vec![0.0; nu * no];
            let mut id2 = vec![0usize; 2];
            for (flat, &m) in j.mass().iter().enumerate() {
                unflatten(flat, j.dims(), &mut id2);
                out[id2[ju] * no + id2[jo]] += m;
            }
            Ok(out)
        };
        let a = grab(&constraints.q_ux, Role::X, nx)?;
        let b = grab(&constraints.q_uy, Role::Y, ny)?;
        Ok(Self { nu, nx, ny, t, a, b })
    }

    fn infeasible_support(&self) -> bool {
        for u in 0..self.nu {
            for x in 0..self.nx {
                if self.a[u * self.nx + x] > 0.0 {
                    let row: f64 = (0..self.ny)
                        .map(|y| self.t[(u * self.nx + x) * self.ny + y])
                        .sum();
                    if row <= 0.0 {
                        return true;
                    }
                }
            }
            for y in 0..self.ny {
                if self.b[u * self.ny + y] > 0.0 {
                    let col: f64 = (0..self.nx)
                        .map(|x| self.t[(u * self.nx + x) * self.ny + y])
                        .sum();
                    if col <= 0.0 {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn residual(&self, p: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for u in 0..self.nu {
            for x in 0..self.nx {
                let s: f64 = (0..self.ny).map(|y| p[(u * self.nx + x) * self.ny + y]).sum();
                worst = worst.max((s - self.a[u * self.nx + x]).abs());
            }
            for y in 0..self.ny {
                let s: f64 = (0..self.nx).map(|x| p[(u * self.nx + x) * self.ny + y]).sum();
                worst = worst.max((s - self.b[u * self.ny + y]).abs());
            }
        }
        worst
    }
}

/// Minimize `D(P ‖ target)` over all triples with the pinned (U,X) and (U,Y)
/// marginals, by alternating marginal matching.
pub fn min_kl_over_coupling_set(
    target: &Joint,
    constraints: &CouplingConstraints,
) -> Result<ProjectionResult, IprojectError> {
    let inst = Instance::build(target, constraints)?;
    if inst.infeasible_support() {
        return Ok(ProjectionResult {
            value: f64::INFINITY,
            argmin: target.clone(),
            iterations: 0,
            gap: inst.residual(&inst.t),
            converged: true,
        });
    }
    let (nu, nx, ny) = (inst.nu, inst.nx, inst.ny);
    let mut p = inst.t.clone();
    let mut prev = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < ITERATION_CAP {
        iterations += 1;
        // match the (U,X) marginal
        for u in 0..nu {
            for x in 0..nx {
                let s: f64 = (0..ny).map(|y| p[(u * nx + x) * ny + y]).sum();
                let want = inst.a[u * nx + x];
                if s > 0.0 {
                    let f = want / s;
                    for y in 0..ny {
                        p[(u * nx + x) * ny + y] *= f;
                    }
                } else if want > 0.0 {
                    // support got starved by the other constraint; will show
                    // up in the residual
                }
            }
        }
        // match the (U,Y) marginal
        for u in 0..nu {
            for y in 0..ny {
                let s: f64 = (0..nx).map(|x| p[(u * nx + x) * ny + y]).sum();
                let want = inst.b[u * ny + y];
                if s > 0.0 {
                    let f = want / s;
                    for x in 0..nx {
                        p[(u * nx + x) * ny + y] *= f;
                    }
                }
            }
        }
        let value = kl_bits(&p, &inst.t);
        let res = inst.residual(&p);
        if (value - prev).abs() < VALUE_TOL && res < MARGINAL_TOL {
            converged = true;
            break;
        }
        prev = value;
    }
    let gap = inst.residual(&p);
    let value = if converged || gap < 1e-6 {
        kl_bits(&p, &inst.t)
    } else {
        // stuck residual means the support admits no feasible coupling
        f64::INFINITY
    };
    let total: f64 = p.iter().sum();
    let argmin = if total > 0.0 && value.is_finite() {
        let axes = vec![
            (Role::U, target.axes()[target.axis_of(Role::U)?].1.clone()),
            (Role::X, target.axes()[target.axis_of(Role::X)?].1.clone()),
            (Role::Y, target.axes()[target.axis_of(Role::Y)?].1.clone()),
        ];
        Joint::new(axes, p.iter().map(|m| m / total).collect())?
    } else {
        target.clone()
    };
    Ok(ProjectionResult {
        value,
        argmin,
        iterations,
        gap,
        converged,
    })
}

/// The closed-form fallback bound: `D(P_UY ‖ Q_UY)`.
pub fn kl_lower_bound(p_uy: &Joint, q_uy: &Joint) -> Result<f64, ProbError> {
    p_uy.kl_to(q_uy)
}

/// Dense-grid oracle for binary X and Y (any |U|): the problem separates per
/// u-slice into a 1-parameter transportation polytope, scanned at `step`.
pub fn min_kl_dense_grid(
    target: &Joint,
    constraints: &CouplingConstraints,
    step: f64,
) -> Result<f64, IprojectError> {
    let inst = Instance::build(target, constraints)?;
    assert!(
        inst.nx == 2 && inst.ny == 2,
        "dense-grid oracle supports binary X and Y only"
    );
    let mut total = 0.0;
    for u in 0..inst.nu {
        let a0 = inst.a[u * 2];
        let a1 = inst.a[u * 2 + 1];
        let b0 = inst.b[u * 2];
        let t = &inst.t[u * 4..u * 4 + 4];
        let s = a0 + a1;
        if s <= 0.0 {
            continue;
        }
        // slice cells: [t00, t01; t10, t11] with row sums (a0, a1), col sums (b0, b1)
        let lo = (a0 + b0 - s).max(0.0);
        let hi = a0.min(b0);
        let mut best = f64::INFINITY;
        let n = ((hi - lo) / step).ceil() as usize + 1;
        for k in 0..=n {
            let p00 = lo + (hi - lo) * k as f64 / n as f64;
            let cells = [p00, a0 - p00, b0 - p00, s - a0 - b0 + p00];
            best = best.min(kl_bits_raw(&cells, t));
        }
        total += best;
        if total.is_infinite() {
            return Ok(f64::INFINITY);
        }
    }
    Ok(total)
}

/// Projected-gradient cross-check from `starts` random feasible points.
/// Exploits the per-u-slice separation; free coordinates are the
/// (nx−1)(ny−1) interior cells of each slice.
pub fn min_kl_projected_gradient(
    target: &Joint,
    constraints: &CouplingConstraints,
    starts: usize,
    seed: u64,
) -> Result<f64, IprojectError> {
    let inst = Instance::build(target, constraints)?;
    let (nx, ny) = (inst.nx, inst.ny);
    let mut total = 0.0;
    for u in 0..inst.nu {
        let a = &inst.a[u * nx..(u + 1) * nx];
        let b = &inst.b[u * ny..(u + 1) * ny];
        let t = &inst.t[u * nx * ny..(u + 1) * nx * ny];
        let s: f64 = a.iter().sum();
        if s <= 0.0 {
            continue;
        }
        let mut best = f64::INFINITY;
        for start in 0..starts {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (u as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (start as u64) << 32,
            );
            if let Some(v) = pg_slice(a, b, t, nx, ny, &mut rng) {
                best = best.min(v);
            }
        }
        total += best;
        if total.is_infinite() {
            return Ok(f64::INFINITY);
        }
    }
    Ok(total)
}

fn pg_slice(
    a: &[f64],
    b: &[f64],
    t: &[f64],
    nx: usize,
    ny: usize,
    rng: &mut impl Rng,
) -> Option<f64> {
    // Random feasible interior start by RAS scaling of a random positive matrix.
    let mut p: Vec<f64> = (0..nx * ny).map(|_| rng.gen_range(0.1..1.0)).collect();
    for _ in 0..200 {
        for x in 0..nx {
            let s: f64 = (0..ny).map(|y| p[x * ny + y]).sum();
            if s > 0.0 {
                for y in 0..ny {
                    p[x * ny + y] *= a[x] / s;
                }
            }
        }
        for y in 0..ny {
            let s: f64 = (0..nx).map(|x| p[x * ny + y]).sum();
            if s > 0.0 && b[y] > 0.0 {
                for x in 0..nx {
                    p[x * ny + y] *= b[y] / s;
                }
            }
        }
    }
    let obj = |p: &[f64]| kl_bits_raw(p, t);
    let mut cur = obj(&p);
    // Descend along the quad moves (x,y,+)(x,0,−)(0,y,−)(0,0,+), which span
    // the null space of the row/column constraints.
    let mut eta = 0.1;
    for _ in 0..2000 {
        let mut grad = vec![0.0; (nx - 1) * (ny - 1)];
        let g = |p: &[f64], i: usize| -> f64 {
            if p[i] <= 0.0 {
                if t[i] > 0.0 { -60.0 } else { 0.0 }
            } else if t[i] <= 0.0 {
                60.0
            } else {
                (p[i] / t[i]).log2()
            }
        };
        for x in 1..nx {
            for y in 1..ny {
                grad[(x - 1) * (ny - 1) + (y - 1)] =
                    g(&p, x * ny + y) - g(&p, x * ny) - g(&p, y) + g(&p, 0);
            }
        }
        let norm: f64 = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            break;
        }
        let mut improved = false;
        while eta > 1e-14 {
            let mut q = p.clone();
            let mut ok = true;
            for x in 1..nx {
                for y in 1..ny {
                    let d = -eta * grad[(x - 1) * (ny - 1) + (y - 1)];
                    q[x * ny + y] += d;
                    q[x * ny] -= d;
                    q[y] -= d;
                    q[0] += d;
                }
            }
            for &v in &q {
                if v < 0.0 {
                    ok = false;
                    break;
                }
            }
            if ok {
                let val = obj(&q);
                if val < cur {
                    p = q;
                    cur = val;
                    improved = true;
                    eta *= 1.3;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    cur.is_finite().then_some(cur)
}
