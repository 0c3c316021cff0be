//! Primal-dual splitting for `min_X ‖σ − A X‖_*` over Choi matrices, with
//! `A = Id ⊗ Ψ_ρ`, written as the saddle problem
//! `min_X max_{‖W‖_op ≤ 1} ⟨W, A X − σ⟩`.
//!
//! Dual step: `W ← clip_[-1,1](W + τ (A X̄ − σ))` (the prox of the conjugate
//! of the nuclear norm). Primal step: `X ← Π_C(X − s A* W)` with `Π_C` the
//! Dykstra projection. `τ s ‖A‖² < 1`.

use super::linear_max::LinearMaxOptions;
use super::projection::{dykstra, repair, DykstraOptions};
use super::{dual_bound_with, Method, SolverOptions, SolverResult};
use crate::certificate::ProblemInstance;
use crate::error::Result;
use crate::linalg::{hermitian_eig, sign, spectral_fn, LabeledOperator};
use crate::superop::{choi_validate_with_tol, random_channel_between};

/// Budget for linear maximizations inside the convergence test.
const INNER_LINEAR_MAX: LinearMaxOptions = LinearMaxOptions {
    max_iters: 100,
    tol: 1e-10,
    dykstra: DykstraOptions {
        max_iters: 500,
        step_tol: 1e-14,
    },
};

/// Eigenvalues of the residual this small (relative) are swept over `{−1, 0, 1}`.
const KERNEL_REL_TOL: f64 = 1e-6;

/// The kernel sweep runs on every this-many convergence checks.
const SWEEP_EVERY: usize = 4;

/// Builds `Y` from one sign per eigenvalue of the residual.
type SignBuilder = Box<dyn Fn(&[f64]) -> Result<LabeledOperator>>;

struct Run {
    x: LabeledOperator,
    primal: f64,
    dual: f64,
    iterations: usize,
    converged: bool,
}

fn clip_unit(w: &LabeledOperator) -> Result<LabeledOperator> {
    spectral_fn(&w.hermitian_part(), |x| x.clamp(-1.0, 1.0))
}

/// Sign of the residual with small eigenvalues treated as a kernel and
/// swept coordinate-wise over `{−1, 0, +1}`. Returns the best bound and `Y`.
pub fn best_sign_certificate(
    inst: &ProblemInstance,
    delta: &LabeledOperator,
) -> Result<(f64, LabeledOperator)> {
    best_sign_certificate_with(inst, delta, LinearMaxOptions::default())
}

fn best_sign_certificate_with(
    inst: &ProblemInstance,
    delta: &LabeledOperator,
    lm: LinearMaxOptions,
) -> Result<(f64, LabeledOperator)> {
    let delta = delta.hermitian_part();
    let diagonal = delta.is_diagonal(0.0);
    let (values, build): (Vec<f64>, SignBuilder) = if diagonal {
        let labels = delta.labels().to_vec();
        (
            delta.real_diagonal(),
            Box::new(move |s: &[f64]| LabeledOperator::from_real_diagonal(labels.clone(), s)),
        )
    } else {
        let eig = hermitian_eig(&delta)?;
        let values = eig.eigenvalues.clone();
        let template = delta.clone();
        (
            values,
            Box::new(move |s: &[f64]| {
                let mut vs = eig.eigenvectors.clone();
                for (j, &sj) in s.iter().enumerate() {
                    for i in 0..vs.nrows() {
                        vs[(i, j)] *= sj;
                    }
                }
                template.with_matrix(vs * eig.eigenvectors.adjoint())
            }),
        )
    };
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let kernel: Vec<usize> = (0..values.len())
        .filter(|&i| values[i].abs() <= KERNEL_REL_TOL * scale.max(1e-300))
        .collect();
    let mut signs: Vec<f64> = (0..values.len())
        .map(|i| {
            if kernel.contains(&i) {
                0.0
            } else {
                sign(values[i])
            }
        })
        .collect();
    let mut best_y = build(&signs)?;
    let mut best = dual_bound_with(inst, &best_y, lm)?;
    for _pass in 0..2 {
        let mut improved = false;
        for &k in &kernel {
            for cand in [-1.0, 0.0, 1.0] {
                if signs[k] == cand {
                    continue;
                }
                let prev = signs[k];
                signs[k] = cand;
                let y = build(&signs)?;
                let b = dual_bound_with(inst, &y, lm)?;
                if b > best + 1e-15 {
                    best = b;
                    best_y = y;
                    improved = true;
                } else {
                    signs[k] = prev;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok((best, best_y))
}

fn run(
    inst: &ProblemInstance,
    opts: &SolverOptions,
    x0: LabeledOperator,
    primal_step: f64,
    dual_step: f64,
) -> Result<Run> {
    let y_label = inst.y_space().name.clone();
    let dk = DykstraOptions {
        max_iters: opts.dykstra_iters,
        ..DykstraOptions::default()
    };
    let sigma = inst.sigma();
    let mut x = x0;
    let mut x_bar = x.clone();
    let mut w = LabeledOperator::zeros(sigma.labels().to_vec())?;
    let mut best_x = x.clone();
    let mut best_primal = inst.objective(&x)?;
    let mut best_dual = f64::NEG_INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for k in 1..=opts.max_iters {
        iterations = k;
        let ax = inst.forward(&x_bar)?;
        w = clip_unit(&w.add(&ax.sub(sigma)?.scale(dual_step))?)?;
        let grad = inst.backward(&w)?;
        let moved = x.sub(&grad.scale(primal_step))?;
        let proj = dykstra(&moved, &y_label, dk)?;
        let x_next = repair(&proj.point, &y_label, proj.min_eigenvalue)?;
        x_bar = x_next.scale(2.0).sub(&x)?;
        x = x_next;

        if k % opts.check_every == 0 || k == opts.max_iters {
            let value = inst.objective(&x)?;
            if value < best_primal {
                best_primal = value;
                best_x = x.clone();
            }
            let from_iterate = dual_bound_with(inst, &w.scale(-1.0), INNER_LINEAR_MAX)?;
            best_dual = best_dual.max(from_iterate);
            let check = k / opts.check_every;
            let sweep_due = check % SWEEP_EVERY == 1 || k == opts.max_iters;
            if sweep_due && best_primal - best_dual > opts.eps * (1.0 + best_primal) {
                let delta = sigma.sub(&inst.forward(&best_x)?)?;
                let (swept, _) = best_sign_certificate_with(inst, &delta, INNER_LINEAR_MAX)?;
                best_dual = best_dual.max(swept);
            }
            if best_primal - best_dual <= opts.eps * (1.0 + best_primal) {
                converged = true;
                break;
            }
        }
    }
    Ok(Run {
        x: best_x,
        primal: best_primal,
        dual: best_dual,
        iterations,
        converged,
    })
}

/// Primal-dual splitting from `1/d_Y` (plus seeded random restarts).
pub fn first_order(inst: &ProblemInstance, opts: &SolverOptions) -> Result<SolverResult> {
    opts.validate()?;
    let norm = inst.psi().operator_norm_estimate(100).max(1e-12);
    let primal_step = opts.primal_step.unwrap_or(0.9 / norm);
    let dual_step = opts.dual_step.unwrap_or(1.0 / norm);
    let labels = inst.choi_labels();
    let dy = inst.y_space().dim as f64;

    let mut best: Option<Run> = None;
    let mut total_iterations = 0;
    let mut dual = f64::NEG_INFINITY;
    for r in 0..opts.restarts {
        let x0 = if r == 0 {
            LabeledOperator::identity(labels.clone())?.scale(1.0 / dy)
        } else {
            random_channel_between(
                opts.seed.wrapping_add(r as u64),
                inst.x_space(),
                inst.y_space(),
            )?
            .into_op()
            .aligned_to(&LabeledOperator::zeros(labels.clone())?)?
        };
        let outcome = run(inst, opts, x0, primal_step, dual_step)?;
        total_iterations += outcome.iterations;
        dual = dual.max(outcome.dual);
        if best.as_ref().is_none_or(|b| outcome.primal < b.primal) {
            best = Some(outcome);
        }
    }
    let best = best.expect("restarts >= 1");
    let x_opt = choi_validate_with_tol(
        &best.x,
        &inst.y_space().name,
        &inst.x_space().name,
        super::FEASIBILITY_TOL,
    )?;
    let primal_value = inst.objective(x_opt.op())?;
    let converged = best.converged || primal_value - dual <= opts.eps * (1.0 + primal_value);
    Ok(SolverResult {
        x_opt,
        primal_value,
        dual_bound: dual,
        gap: primal_value - dual,
        iterations: total_iterations,
        converged,
        method: Method::FirstOrder,
    })
}
