//! Diagonal sign-flip group on a two-qubit `[Z, Y]` space and group
//! averaging.
//!
//! An element is `Σ u_zy |z y><z y|` with `u_zy ∈ {±1}` and
//! `u_00 u_10 = u_01 u_11`. The group acts on the first two-dimensional
//! factor of an operator as the `Z` role and on the second as the `Y` role,
//! so it applies equally to `σ` on `[Z, Y]` and to Choi matrices on `[X, Y]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, nuclear_norm, partial_trace, LabeledOperator};

const GROUP_TOL: f64 = 1e-10;

/// Signs ordered `(u_00, u_10, u_01, u_11)`.
pub type SignPattern = [i8; 4];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignGroup {
    elements: Vec<SignPattern>,
}

impl SignGroup {
    pub fn elements(&self) -> &[SignPattern] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, u: &SignPattern) -> bool {
        self.elements.contains(u)
    }
}

/// Diagonal entries in `z * 2 + y` order.
pub fn pattern_diagonal(u: &SignPattern) -> [f64; 4] {
    let (u00, u10, u01, u11) = (u[0], u[1], u[2], u[3]);
    [u00 as f64, u01 as f64, u10 as f64, u11 as f64]
}

/// Elementwise product.
pub fn compose(a: &SignPattern, b: &SignPattern) -> SignPattern {
    [a[0] * b[0], a[1] * b[1], a[2] * b[2], a[3] * b[3]]
}

pub fn build_group(dim_z: usize, dim_y: usize) -> Result<SignGroup> {
    if dim_z != 2 || dim_y != 2 {
        return Err(Error::UnsupportedDimensions(format!(
            "sign group is defined for dim Z = dim Y = 2, got ({dim_z}, {dim_y})"
        )));
    }
    let mut elements = Vec::with_capacity(8);
    for bits in 0..16u8 {
        let u: SignPattern = std::array::from_fn(|k| if bits >> k & 1 == 1 { -1 } else { 1 });
        if u[0] * u[1] == u[2] * u[3] {
            elements.push(u);
        }
    }
    Ok(SignGroup { elements })
}

fn check_two_qubit(x: &LabeledOperator) -> Result<()> {
    let dims: Vec<usize> = x.labels().iter().map(|s| s.dim).collect();
    if dims != [2, 2] {
        return Err(Error::Shape(format!(
            "sign group acts on a 2x2 bipartite operator, got dims {dims:?}"
        )));
    }
    Ok(())
}

/// `U X U†` for a diagonal `±1` unitary.
pub fn act(u: &SignPattern, x: &LabeledOperator) -> Result<LabeledOperator> {
    check_two_qubit(x)?;
    let d = pattern_diagonal(u);
    Ok(x.map_matrix(|m| {
        let mut out = m.clone();
        for i in 0..4 {
            for j in 0..4 {
                out[(i, j)] *= d[i] * d[j];
            }
        }
        out
    }))
}

/// `(1/|G|) Σ_U U X U†`, evaluated entrywise as `X_ij · (1/|G|) Σ_U u_i u_j`
/// so that the integer sums are exact and diagonal entries are untouched.
pub fn symmetrize(x: &LabeledOperator, g: &SignGroup) -> Result<LabeledOperator> {
    check_two_qubit(x)?;
    let diags: Vec<[f64; 4]> = g.elements.iter().map(pattern_diagonal).collect();
    let n = g.len() as f64;
    Ok(x.map_matrix(|m| {
        let mut out = m.clone();
        for i in 0..4 {
            for j in 0..4 {
                let weight: f64 = diags.iter().map(|d| d[i] * d[j]).sum();
                out[(i, j)] *= weight / n;
            }
        }
        out
    }))
}

/// Per-bullet outcome of the invariance checks over every group element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub preserves_psd: bool,
    pub preserves_marginal: bool,
    pub fixes_sigma: bool,
    pub preserves_objective: bool,
    /// Largest deviation seen across all bullets and elements.
    pub max_deviation: f64,
}

impl InvarianceReport {
    pub fn all_pass(&self) -> bool {
        self.preserves_psd
            && self.preserves_marginal
            && self.fixes_sigma
            && self.preserves_objective
    }
}

/// Check, for every `U` in `g`: `U(X) ⪰ 0` if `X ⪰ 0`; `Tr_Y U(X) = Tr_Y X`;
/// `U(σ) = σ`; `‖σ − U(X)‖_* = ‖σ − X‖_*`. The second factor of `x` is traced.
///
/// The marginal bullet relies on `Tr_Y X` being diagonal, as it is for every
/// channel: an element with `u_00 u_10 = −1` flips its off-diagonal sign.
pub fn check_invariance_bullets(
    x: &LabeledOperator,
    sigma: &LabeledOperator,
    g: &SignGroup,
) -> Result<InvarianceReport> {
    check_two_qubit(x)?;
    check_two_qubit(sigma)?;
    if !sigma.is_diagonal(GROUP_TOL) {
        return Err(Error::InvalidArgument("σ must be diagonal".into()));
    }
    let y_label = x.labels()[1].name.clone();
    let x_psd = hermitian_eig(&x.hermitian_part())?.min() >= -GROUP_TOL;
    let marginal = partial_trace(x, &y_label)?;
    let raw_sigma = sigma.matrix();
    let objective = |m: &LabeledOperator| -> Result<f64> {
        let diff = sigma.with_matrix(raw_sigma - m.matrix())?;
        nuclear_norm(&diff.hermitian_part())
    };
    let base = objective(x)?;

    let mut report = InvarianceReport {
        preserves_psd: true,
        preserves_marginal: true,
        fixes_sigma: true,
        preserves_objective: true,
        max_deviation: 0.0,
    };
    for u in &g.elements {
        let ux = act(u, x)?;
        if x_psd {
            let min = hermitian_eig(&ux.hermitian_part())?.min();
            report.max_deviation = report.max_deviation.max((-min).max(0.0));
            report.preserves_psd &= min >= -GROUP_TOL;
        }
        let dm = partial_trace(&ux, &y_label)?
            .sub(&marginal)?
            .frobenius_norm();
        report.max_deviation = report.max_deviation.max(dm);
        report.preserves_marginal &= dm <= GROUP_TOL;
        let ds = act(u, sigma)?.sub(sigma)?.frobenius_norm();
        report.max_deviation = report.max_deviation.max(ds);
        report.fixes_sigma &= ds <= GROUP_TOL;
        let dobj = (objective(&ux)? - base).abs();
        report.max_deviation = report.max_deviation.max(dobj);
        report.preserves_objective &= dobj <= GROUP_TOL;
    }
    Ok(report)
}
