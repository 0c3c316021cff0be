//! The two-qubit counterexample: a staged re-derivation of the residual,
//! sign certificate and `H` for the hard-coded instance, and a seeded search
//! for further violations among diagonal `σ`.
//!
//! Basis order is `z * dim Y + y` for `σ` and `x * dim Y + y` for Choi
//! matrices (the input `X` plays the role of `Z` under `Ψ_ρ`).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::{certify, CertificateReport, ProblemInstance};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, LabeledOperator, Ordering, Space};
use crate::par::{map_indexed, Execution};
use crate::solver::{dual_bound, first_order, l1_fast_path, SolverOptions};
use crate::superop::{choi_validate_with_tol, ChoiMatrix};

pub const COUNTEREXAMPLE_SIGMA: [f64; 4] = [0.55, 0.15, 0.20, 0.10];
pub const COUNTEREXAMPLE_X: [f64; 4] = [1.0, 0.0, 0.4, 0.6];

/// Tolerance for the literal-valued stages.
const STAGE_TOL: f64 = 1e-12;
/// Tolerance for optimality claims.
const OPTIMALITY_TOL: f64 = 1e-6;

/// `(1/d) Σ_ij |i i><j j|` on `[X, Z]`.
pub fn maximally_entangled(d: usize) -> Result<LabeledOperator> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let mut m = CMatrix::zeros(d * d, d * d);
    let w = Complex64::new(1.0 / d as f64, 0.0);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = w;
        }
    }
    LabeledOperator::new(vec![Space::new("X", d), Space::new("Z", d)], m)
}

fn zy(diag: &[f64], dz: usize, dy: usize) -> Result<LabeledOperator> {
    LabeledOperator::from_real_diagonal(vec![Space::new("Z", dz), Space::new("Y", dy)], diag)
}

fn xy(diag: &[f64], dx: usize, dy: usize) -> Result<LabeledOperator> {
    LabeledOperator::from_real_diagonal(vec![Space::new("X", dx), Space::new("Y", dy)], diag)
}

/// The counterexample instance and the channel shown to be optimal there.
pub fn paper_instance() -> Result<(ProblemInstance, ChoiMatrix)> {
    instance_with_sigma(COUNTEREXAMPLE_SIGMA)
}

fn instance_with_sigma(sigma: [f64; 4]) -> Result<(ProblemInstance, ChoiMatrix)> {
    let inst = ProblemInstance::new(maximally_entangled(2)?, zy(&sigma, 2, 2)?)?;
    let x = choi_validate_with_tol(&xy(&COUNTEREXAMPLE_X, 2, 2)?, "Y", "X", STAGE_TOL)?;
    Ok((inst, x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    /// `a` through `i`.
    pub id: String,
    pub description: String,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub basis_order: String,
    pub stages: Vec<Stage>,
    pub failing_stage: Option<String>,
    /// `‖(Id ⊗ Ψ_ρ)(X) − ½X‖_F`.
    pub prop1_residual: f64,
    pub x_min_eigenvalue: f64,
    pub x_tp_residual: f64,
    pub h_eigenvalues: Vec<f64>,
    pub objective_at_x: f64,
    pub optimal_value_fast_path: f64,
    pub optimal_value_solver: f64,
    /// Dual bound at `Y* = diag(1, 1, −1, −1)`.
    pub dual_certificate_value: f64,
    /// Dual bound at `sign(Δ)`.
    pub sign_candidate_value: f64,
    pub certificate: CertificateReport,
    pub theorem_confirmed: bool,
}

fn diag_residual(op: &LabeledOperator, expected: &[f64]) -> f64 {
    let off = op.off_diagonal_norm();
    op.diagonal()
        .iter()
        .zip(expected)
        .map(|(v, e)| (v - Complex64::new(*e, 0.0)).norm())
        .fold(off, f64::max)
}

fn stage(id: &str, description: &str, residual: f64, tol: f64) -> Stage {
    Stage {
        id: id.into(),
        description: description.into(),
        residual,
        passed: residual <= tol,
    }
}

/// Re-derive every step of the counterexample and check it against the
/// literal values.
pub fn verify_paper() -> Result<VerificationReport> {
    verify_with_sigma(COUNTEREXAMPLE_SIGMA)
}

/// [`verify_paper`] with a replacement `σ` diagonal, for exercising the
/// failure path. Expected values stay those of the original instance.
pub fn verify_with_sigma(sigma: [f64; 4]) -> Result<VerificationReport> {
    let (inst, x) = instance_with_sigma(sigma)?;
    let mut stages = Vec::new();

    // `forward` lands on [Z, Y]; X sits on [X, Y] with X in the Z slot.
    let half = x.op().scale(0.5);
    let prop1_residual = (inst.forward(x.op())?.matrix() - half.matrix()).norm();
    stages.push(stage("a", "(Id ⊗ Ψ_ρ)(X) = X/2", prop1_residual, STAGE_TOL));

    let feas = x.tp_residual().max((-x.min_eigenvalue()).max(0.0));
    stages.push(stage("b", "X is a channel", feas, STAGE_TOL));

    let report = certify(&inst, &x)?;
    let delta = report.delta.as_ref().expect("certify sets delta");
    let y = report.y.as_ref().expect("certify sets y");
    stages.push(stage(
        "c",
        "Δ = diag(0.05, 0.15, 0, −0.2)",
        diag_residual(delta, &[0.05, 0.15, 0.0, -0.2]),
        STAGE_TOL,
    ));
    stages.push(stage(
        "d",
        "Y = sign(Δ) = diag(1, 1, 0, −1)",
        diag_residual(y, &[1.0, 1.0, 0.0, -1.0]),
        STAGE_TOL,
    ));
    stages.push(stage(
        "e",
        "H = diag(0.5, 0.5, 0, −0.5)",
        diag_residual(&report.h, &[0.5, 0.5, 0.0, -0.5]),
        STAGE_TOL,
    ));
    let traced_res =
        diag_residual(&report.traced, &[0.5, -0.3]).max(report.hermitian.max_asymmetry);
    stages.push(stage(
        "f",
        "Tr_Y(HX) = diag(0.5, −0.3), Hermitian",
        traced_res,
        STAGE_TOL,
    ));
    stages.push(stage(
        "g",
        "lift = diag(0.5, 0.5, −0.3, −0.3)",
        diag_residual(&report.lift, &[0.5, 0.5, -0.3, -0.3]),
        STAGE_TOL,
    ));
    let order_res = (report.order.min_eigenvalue + 0.2)
        .abs()
        .max((report.order.max_eigenvalue - 0.3).abs());
    let mut order_stage = stage(
        "h",
        "H and lift are incomparable (eigenvalues −0.2, 0.3)",
        order_res,
        STAGE_TOL,
    );
    order_stage.passed &= report.order.ordering == Ordering::Incomparable;
    stages.push(order_stage);

    let fast = l1_fast_path(&inst)?;
    let solver = first_order(&inst, &SolverOptions::default())?;
    let y_star = zy(&[1.0, 1.0, -1.0, -1.0], 2, 2)?;
    let dual_certificate_value = dual_bound(&inst, &y_star)?;
    let sign_candidate_value = dual_bound(&inst, y)?;
    let objective_at_x = inst.objective(x.op())?;
    let optimality = [
        fast.value - 0.4,
        solver.primal_value - 0.4,
        dual_certificate_value - 0.4,
        objective_at_x - 0.4,
    ]
    .iter()
    .fold(0.0f64, |m, v| m.max(v.abs()));
    stages.push(stage(
        "i",
        "optimal value 0.4, attained by X",
        optimality,
        OPTIMALITY_TOL,
    ));

    let failing_stage = stages.iter().find(|s| !s.passed).map(|s| s.id.clone());
    let theorem_confirmed = failing_stage.is_none()
        && !report.satisfied
        && !report.forward_holds()
        && !report.reverse_holds();
    Ok(VerificationReport {
        basis_order: "z * dim Y + y (σ); x * dim Y + y (X, H)".into(),
        stages,
        failing_stage,
        prop1_residual,
        x_min_eigenvalue: x.min_eigenvalue(),
        x_tp_residual: x.tp_residual(),
        h_eigenvalues: hermitian_eig(&report.h)?.eigenvalues,
        objective_at_x,
        optimal_value_fast_path: fast.value,
        optimal_value_solver: solver.primal_value,
        dual_certificate_value,
        sign_candidate_value,
        certificate: report,
        theorem_confirmed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchDims {
    pub z: usize,
    pub y: usize,
}

impl Default for SearchDims {
    fn default() -> Self {
        Self { z: 2, y: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub trial: usize,
    pub seed: u64,
    /// Diagonal of `σ`, `z`-major.
    pub sigma: Vec<f64>,
    pub value: f64,
    pub dual_bound: f64,
    /// Diagonal of the recorded optimal channel, `x`-major: the first
    /// violating candidate, or the canonical optimizer if none violates.
    pub x: Vec<f64>,
    pub candidates_checked: usize,
    pub certificate_satisfied: bool,
    pub violation: bool,
    /// Set when the trial could not be evaluated.
    pub error: Option<String>,
}

/// Cap on the number of optimal vertices certified per trial.
const MAX_CANDIDATES: usize = 4096;

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn sample_sigma(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let total: f64 = u.iter().sum();
    u.iter().map(|v| v / total).collect()
}

fn evaluate_trial(trial: usize, seed: u64, sigma: Vec<f64>, dims: SearchDims) -> SearchRecord {
    let mut record = SearchRecord {
        trial,
        seed,
        sigma,
        value: f64::NAN,
        dual_bound: f64::NAN,
        x: Vec::new(),
        candidates_checked: 0,
        certificate_satisfied: false,
        violation: false,
        error: None,
    };
    if let Err(e) = fill_trial(&mut record, dims) {
        record.error = Some(e.to_string());
        record.violation = false;
    }
    record
}

fn fill_trial(record: &mut SearchRecord, dims: SearchDims) -> Result<()> {
    let inst = ProblemInstance::new(
        maximally_entangled(dims.z)?,
        zy(&record.sigma, dims.z, dims.y)?,
    )?;
    let sol = l1_fast_path(&inst)?;
    record.value = sol.value;
    record.dual_bound = sol.result.dual_bound;
    let per_group: Vec<Vec<Vec<f64>>> = sol.groups.iter().map(|g| g.candidates()).collect();

    let mut chosen: Option<(Vec<f64>, bool)> = None;
    let mut index = vec![0usize; per_group.len()];
    loop {
        let x: Vec<f64> = index
            .iter()
            .zip(&per_group)
            .flat_map(|(&k, c)| c[k].iter().copied())
            .collect();
        let choi = choi_validate_with_tol(&xy(&x, dims.z, dims.y)?, "Y", "X", 1e-12)?;
        let value = inst.objective(choi.op())?;
        let optimal =
            value - sol.value <= OPTIMALITY_TOL && value - record.dual_bound <= OPTIMALITY_TOL;
        let report = certify(&inst, &choi)?;
        record.candidates_checked += 1;
        if chosen.is_none() {
            chosen = Some((x.clone(), report.satisfied));
        }
        if optimal && !report.satisfied {
            chosen = Some((x, false));
            record.violation = true;
            break;
        }
        if record.candidates_checked >= MAX_CANDIDATES || !advance(&mut index, &per_group) {
            break;
        }
    }
    let (x, satisfied) = chosen.expect("at least one candidate");
    record.x = x;
    record.certificate_satisfied = satisfied;
    Ok(())
}

/// Odometer over the candidate product, last group fastest.
fn advance(index: &mut [usize], per_group: &[Vec<Vec<f64>>]) -> bool {
    for g in (0..index.len()).rev() {
        index[g] += 1;
        if index[g] < per_group[g].len() {
            return true;
        }
        index[g] = 0;
    }
    false
}

/// Seeded search over random diagonal `σ` with the maximally entangled `ρ`.
/// Trial 0 uses the counterexample's `σ` when `dims` is two-qubit.
pub fn search(trials: usize, seed: u64, dims: SearchDims) -> Result<Vec<SearchRecord>> {
    search_with(trials, seed, dims, Execution::default())
}

pub fn search_with(
    trials: usize,
    seed: u64,
    dims: SearchDims,
    exec: Execution,
) -> Result<Vec<SearchRecord>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if dims.z == 0 || dims.y == 0 {
        return Err(Error::InvalidArgument(format!(
            "invalid dimensions {dims:?}"
        )));
    }
    let pinned = dims == SearchDims::default();
    Ok(map_indexed(trials, exec, |trial| {
        let s = trial_seed(seed, trial);
        let sigma = if trial == 0 && pinned {
            COUNTEREXAMPLE_SIGMA.to_vec()
        } else {
            sample_sigma(s, dims.z * dims.y)
        };
        evaluate_trial(trial, s, sigma, dims)
    }))
}
