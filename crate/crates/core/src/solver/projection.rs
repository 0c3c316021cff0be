use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, lift_identity, partial_trace, LabeledOperator};
use crate::superop::{choi_validate_with_tol, ChoiMatrix};

/// Feasibility tolerance for the output of [`project_choi`].
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
pub fn project_psd(a: &LabeledOperator) -> Result<LabeledOperator> {
    if a.is_diagonal(0.0) {
        let diag: Vec<f64> = a.real_diagonal().iter().map(|x| x.max(0.0)).collect();
        return LabeledOperator::from_real_diagonal(a.labels().to_vec(), &diag);
    }
    let eig = hermitian_eig(a)?;
    if eig.min() >= 0.0 {
        return Ok(a.hermitian_part());
    }
    a.with_matrix(eig.recompose(|x| x.max(0.0)))
}

/// Nearest point with `Tr_Y(x) = 1`:
/// `x − (1/d_Y) · 1_Y ⊗ (Tr_Y(x) − 1)`.
pub fn project_tp(x: &LabeledOperator, y_label: &str) -> Result<LabeledOperator> {
    let y = x.space(y_label)?.clone();
    let slot = x.position(y_label).expect("checked");
    let marginal = partial_trace(x, y_label)?;
    let excess = marginal.sub(&LabeledOperator::identity(marginal.labels().to_vec())?)?;
    let correction = lift_identity(&excess, &y, slot)?.scale(1.0 / y.dim as f64);
    x.sub(&correction)
}

/// Options for Dykstra's alternating projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DykstraOptions {
    pub max_iters: usize,
    /// Stop once successive iterates differ by less than this (Frobenius, relative).
    pub step_tol: f64,
}

impl Default for DykstraOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            step_tol: 1e-14,
        }
    }
}

/// Raw Dykstra iterate: exactly trace preserving, PSD up to `min_eigenvalue`.
#[derive(Debug, Clone)]
pub(crate) struct DykstraOutcome {
    pub point: LabeledOperator,
    pub min_eigenvalue: f64,
}

pub(crate) fn dykstra(
    x: &LabeledOperator,
    y_label: &str,
    opts: DykstraOptions,
) -> Result<DykstraOutcome> {
    let x = x.hermitian_part();
    let scale = 1.0 + x.frobenius_norm();
    let mut current = project_tp(&x, y_label)?;
    let mut psd_increment = LabeledOperator::zeros(x.labels().to_vec())?;
    let mut min_eig = min_eigenvalue(&current)?;
    if min_eig >= 0.0 {
        return Ok(DykstraOutcome {
            point: current,
            min_eigenvalue: min_eig,
        });
    }
    for _ in 0..opts.max_iters {
        let shifted = current.add(&psd_increment)?;
        let psd = project_psd(&shifted)?;
        psd_increment = shifted.sub(&psd)?;
        // the affine set needs no correction term
        let next = project_tp(&psd, y_label)?;
        let step = next.sub(&current)?.frobenius_norm();
        current = next;
        min_eig = min_eigenvalue(&current)?;
        if step <= opts.step_tol * scale && min_eig >= -FEASIBILITY_TOL {
            break;
        }
    }
    Ok(DykstraOutcome {
        point: current,
        min_eigenvalue: min_eig,
    })
}

fn min_eigenvalue(a: &LabeledOperator) -> Result<f64> {
    if a.is_diagonal(0.0) {
        return Ok(a.real_diagonal().into_iter().fold(f64::INFINITY, f64::min));
    }
    Ok(hermitian_eig(a)?.min())
}

/// Mix a trace-preserving `x` with `1/d_Y` just enough to clear a tiny
/// negative eigenvalue. Both constraints then hold exactly.
pub(crate) fn repair(x: &LabeledOperator, y_label: &str, min_eig: f64) -> Result<LabeledOperator> {
    if min_eig >= 0.0 {
        return Ok(x.clone());
    }
    let dy = x.space(y_label)?.dim as f64;
    let floor = 1.0 / dy;
    let t = -min_eig / (floor - min_eig);
    let id = LabeledOperator::identity(x.labels().to_vec())?.scale(t / dy);
    x.scale(1.0 - t).add(&id)
}

/// Project onto `{X ⪰ 0, Tr_Y X = 1}`.
pub fn project_choi(
    x: &LabeledOperator,
    out_label: &str,
    in_label: &str,
    opts: DykstraOptions,
) -> Result<ChoiMatrix> {
    let outcome = dykstra(x, out_label, opts)?;
    if outcome.min_eigenvalue < -FEASIBILITY_TOL {
        return Err(Error::ProjectionNoConvergence {
            psd: -outcome.min_eigenvalue,
            trace: 0.0,
        });
    }
    let fixed = repair(&outcome.point, out_label, outcome.min_eigenvalue)?;
    choi_validate_with_tol(&fixed, out_label, in_label, FEASIBILITY_TOL)
}
