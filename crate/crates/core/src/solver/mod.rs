//! Minimization of `‖σ − (Id ⊗ Ψ_ρ)(X)‖_*` over Choi matrices of channels.
//!
//! Two routes: an exact closed form when `σ` is diagonal and `Ψ_ρ` is a
//! scaled relabeling ([`l1_fast_path`]), and a primal-dual first-order
//! method for everything else ([`first_order`]). Both report a weak-duality
//! lower bound obtained from [`dual_bound`].

mod first_order;
mod l1;
mod linear_max;
mod projection;

use serde::{Deserialize, Serialize};

pub use first_order::{best_sign_certificate, first_order};
pub use l1::{
    choi_from_groups, fast_path_data, group_certificate, l1_fast_path, l1_group, GroupOptimum,
    L1Solution, DIAGONAL_TOL, RELABEL_TOL,
};
pub use linear_max::{
    choi_linear_max, choi_linear_max_diagonal, choi_linear_max_iterative, linear_max_bracket,
    LinearMax, LinearMaxOptions,
};
pub use projection::{project_choi, project_psd, project_tp, DykstraOptions, FEASIBILITY_TOL};

use crate::certificate::ProblemInstance;
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, LabeledOperator};
use crate::superop::ChoiMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FirstOrder,
    L1FastPath,
}

/// Which route [`solve`] may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    /// Fast path when applicable, first-order method otherwise.
    #[default]
    Auto,
    FirstOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Primal step; defaults to `0.9 / ‖Ψ‖`.
    pub primal_step: Option<f64>,
    /// Dual step; defaults to `1 / ‖Ψ‖`.
    pub dual_step: Option<f64>,
    /// Relative gap target.
    pub eps: f64,
    pub dykstra_iters: usize,
    pub restarts: usize,
    /// Iterations between objective / dual-bound evaluations.
    pub check_every: usize,
    /// Seed for restart starting points (restart 0 starts from `1/d_Y`).
    pub seed: u64,
    pub method: MethodChoice,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            primal_step: None,
            dual_step: None,
            eps: 1e-7,
            dykstra_iters: 500,
            restarts: 1,
            check_every: 50,
            seed: 0,
            method: MethodChoice::Auto,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let steps_ok = [self.primal_step, self.dual_step]
            .iter()
            .all(|s| s.is_none_or(|v| v > 0.0 && v.is_finite()));
        if self.max_iters == 0
            || self.dykstra_iters == 0
            || self.restarts == 0
            || self.check_every == 0
            || self.eps.is_nan()
            || self.eps <= 0.0
            || !steps_ok
        {
            return Err(Error::InvalidArgument(format!(
                "solver options must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverResult {
    pub x_opt: ChoiMatrix,
    pub primal_value: f64,
    pub dual_bound: f64,
    /// `primal_value − dual_bound`.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method: Method,
}

/// `⟨Y, σ⟩ − max_X ⟨(Id ⊗ Ψ_ρ*)(Y), X⟩`, a lower bound on the optimum for
/// every `‖Y‖_op ≤ 1`.
pub fn dual_bound(inst: &ProblemInstance, y: &LabeledOperator) -> Result<f64> {
    dual_bound_with(inst, y, LinearMaxOptions::default())
}

/// As [`dual_bound`], using the certified upper end of the linear-max bracket
/// even when it has not closed to `opts.tol`.
pub fn dual_bound_with(
    inst: &ProblemInstance,
    y: &LabeledOperator,
    opts: LinearMaxOptions,
) -> Result<f64> {
    let norm = operator_norm(y)?;
    if norm > 1.0 + 1e-9 {
        return Err(Error::DualInfeasible(norm));
    }
    let pairing = y.inner(inst.sigma())?.re;
    let h = inst.backward(&y.hermitian_part())?;
    let y_label = &inst.y_space().name;
    let max = if h.is_diagonal(0.0) {
        choi_linear_max_diagonal(&h, y_label)?
    } else {
        linear_max_bracket(&h, y_label, opts)?.upper
    };
    Ok(pairing - max)
}

/// Solve with the fast path when allowed and applicable.
pub fn solve(inst: &ProblemInstance, opts: &SolverOptions) -> Result<SolverResult> {
    opts.validate()?;
    if opts.method == MethodChoice::Auto {
        match l1_fast_path(inst) {
            Ok(sol) => return Ok(sol.result),
            Err(Error::NotApplicable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    first_order(inst, opts)
}
