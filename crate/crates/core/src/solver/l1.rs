//! Exact solution for diagonal `σ` when `Ψ_ρ` is a positive multiple of a
//! relabeling. The problem then splits into one simplex-constrained
//! `ℓ1` fit per value of the reference index `z`:
//!
//! `min Σ_y |σ_(z,y) − c·x_y|  s.t.  x ≥ 0, Σ_y x_y = 1`.
//!
//! With `s = σ/c` and `S = Σ s`, the minimum is `c·|S − 1|`: every term can
//! share the sign of `S − 1`, and no choice does better by the triangle
//! inequality.

use serde::{Deserialize, Serialize};

use super::{dual_bound, Method, SolverResult};
use crate::certificate::ProblemInstance;
use crate::error::{Error, Result};
use crate::linalg::LabeledOperator;
use crate::superop::choi_validate_with_tol;

/// Tolerance used to recognise `Ψ_ρ = c · relabel`.
pub const RELABEL_TOL: f64 = 1e-10;
/// Off-diagonal mass above which `σ` is treated as non-diagonal.
pub const DIAGONAL_TOL: f64 = 1e-12;

/// Optimal set of one `z`-group: any `x` with `lower ≤ x ≤ upper`, `Σ x = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupOptimum {
    pub value: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// `lower + θ (upper − lower)` with `θ` fixing the sum; the interval
    /// midpoint when `dim Y = 2`.
    pub canonical: Vec<f64>,
    /// Sign of every residual entry at an optimum (`+1` when `S ≥ 1`).
    pub residual_sign: f64,
}

impl GroupOptimum {
    fn greedy(&self, order: impl Iterator<Item = usize>) -> Vec<f64> {
        let mut x = self.lower.clone();
        let mut room = 1.0 - x.iter().sum::<f64>();
        for y in order {
            let add = (self.upper[y] - self.lower[y]).min(room).max(0.0);
            x[y] += add;
            room -= add;
        }
        x
    }

    /// Optimal vertex that fills coordinates in increasing `y`.
    pub fn first_endpoint(&self) -> Vec<f64> {
        self.greedy(0..self.lower.len())
    }

    /// Optimal vertex that fills coordinates in decreasing `y`.
    pub fn last_endpoint(&self) -> Vec<f64> {
        self.greedy((0..self.lower.len()).rev())
    }

    /// Canonical point and both endpoints, deduplicated.
    pub fn candidates(&self) -> Vec<Vec<f64>> {
        let mut out = vec![self.canonical.clone()];
        for p in [self.first_endpoint(), self.last_endpoint()] {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }
}

/// Closed-form optimum of `Σ_y |σ_y − c x_y|` over the probability simplex.
pub fn l1_group(sigma: &[f64], c: f64) -> GroupOptimum {
    let s: Vec<f64> = sigma.iter().map(|v| v / c).collect();
    let total: f64 = s.iter().sum();
    let (lower, upper): (Vec<f64>, Vec<f64>) = if total >= 1.0 {
        s.iter()
            .map(|&sy| ((1.0 - (total - sy)).max(0.0), sy.min(1.0)))
            .unzip()
    } else {
        s.iter().map(|&sy| (sy, 1.0 - (total - sy))).unzip()
    };
    let lo_sum: f64 = lower.iter().sum();
    let hi_sum: f64 = upper.iter().sum();
    let theta = if hi_sum > lo_sum {
        ((1.0 - lo_sum) / (hi_sum - lo_sum)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let canonical = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| l + theta * (u - l))
        .collect();
    GroupOptimum {
        value: (sigma.iter().sum::<f64>() - c).abs(),
        lower,
        upper,
        canonical,
        residual_sign: if total >= 1.0 { 1.0 } else { -1.0 },
    }
}

/// Fast-path solution with per-group optimal sets.
#[derive(Debug, Clone)]
pub struct L1Solution {
    pub scale: f64,
    pub value: f64,
    pub groups: Vec<GroupOptimum>,
    pub result: SolverResult,
}

/// `σ`'s diagonal in `[Z, Y]` order, split into `z`-groups, plus the relabel
/// scale, if the fast path applies.
pub fn fast_path_data(inst: &ProblemInstance) -> Result<(f64, Vec<Vec<f64>>)> {
    let c = inst.psi().relabel_scale(RELABEL_TOL).ok_or_else(|| {
        Error::NotApplicable("Ψ_ρ is not a positive multiple of a relabeling".into())
    })?;
    let sigma = inst
        .sigma()
        .reorder(&[&inst.z_space().name, &inst.y_space().name])?;
    if !sigma.is_diagonal(DIAGONAL_TOL) {
        return Err(Error::NotApplicable("σ is not diagonal".into()));
    }
    let dy = inst.y_space().dim;
    let diag = sigma.real_diagonal();
    Ok((c, diag.chunks(dy).map(|g| g.to_vec()).collect()))
}

/// Diagonal Choi matrix on `[X, Y]` from per-group distributions.
pub fn choi_from_groups(inst: &ProblemInstance, groups: &[Vec<f64>]) -> Result<LabeledOperator> {
    let flat: Vec<f64> = groups.iter().flatten().copied().collect();
    LabeledOperator::from_real_diagonal(inst.choi_labels(), &flat)
}

/// Per-group `±1` dual certificate on `σ`'s labels (tight for the fast path).
pub fn group_certificate(
    inst: &ProblemInstance,
    groups: &[GroupOptimum],
) -> Result<LabeledOperator> {
    let dy = inst.y_space().dim;
    let diag: Vec<f64> = groups
        .iter()
        .flat_map(|g| std::iter::repeat_n(g.residual_sign, dy))
        .collect();
    LabeledOperator::from_real_diagonal(
        vec![inst.z_space().clone(), inst.y_space().clone()],
        &diag,
    )?
    .aligned_to(inst.sigma())
}

pub fn l1_fast_path(inst: &ProblemInstance) -> Result<L1Solution> {
    let (c, sigma_groups) = fast_path_data(inst)?;
    let groups: Vec<GroupOptimum> = sigma_groups.iter().map(|g| l1_group(g, c)).collect();
    let value = groups.iter().map(|g| g.value).sum();
    let canonical: Vec<Vec<f64>> = groups.iter().map(|g| g.canonical.clone()).collect();
    let x = choi_from_groups(inst, &canonical)?;
    let x_opt = choi_validate_with_tol(&x, &inst.y_space().name, &inst.x_space().name, 1e-12)?;
    let primal_value = inst.objective(x_opt.op())?;
    let certificate = group_certificate(inst, &groups)?;
    let bound = dual_bound(inst, &certificate)?;
    Ok(L1Solution {
        scale: c,
        value,
        groups,
        result: SolverResult {
            x_opt,
            primal_value,
            dual_bound: bound,
            gap: primal_value - bound,
            iterations: 0,
            converged: true,
            method: Method::L1FastPath,
        },
    })
}
