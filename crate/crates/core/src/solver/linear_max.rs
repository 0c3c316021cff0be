//! `max ⟨H, X⟩` over Choi matrices `{X ⪰ 0, Tr_Y X = 1}`.
//!
//! Any Hermitian `Λ` on the input space with `1_Y ⊗ Λ ⪰ H` gives the upper
//! bound `Tr Λ`. Given a feasible `X`, `Λ = Tr_Y(H X) + μ·1` with
//! `μ = λ_max(H − 1_Y ⊗ Tr_Y(H X))` is such a `Λ`, and the bracket closes
//! exactly at a maximizer. Iterates come from projected gradient ascent.

use super::projection::{dykstra, repair, DykstraOptions};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, lift_identity, operator_norm, partial_trace, LabeledOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMaxOptions {
    pub max_iters: usize,
    /// Required width of the certified bracket.
    pub tol: f64,
    pub dykstra: DykstraOptions,
}

impl Default for LinearMaxOptions {
    fn default() -> Self {
        Self {
            max_iters: 5_000,
            tol: 1e-9,
            dykstra: DykstraOptions::default(),
        }
    }
}

/// Certified bracket `lower ≤ max ⟨H, X⟩ ≤ upper`.
#[derive(Debug, Clone)]
pub struct LinearMax {
    pub lower: f64,
    pub upper: f64,
    pub maximizer: LabeledOperator,
    pub iterations: usize,
}

/// Exact value for diagonal `H`: `Σ_x max_y H_(x,y)`.
pub fn choi_linear_max_diagonal(h: &LabeledOperator, out_label: &str) -> Result<f64> {
    if !h.is_diagonal(0.0) {
        return Err(Error::InvalidArgument("H is not diagonal".into()));
    }
    let others: Vec<&str> = h
        .label_names()
        .into_iter()
        .filter(|n| *n != out_label)
        .collect();
    let mut order = others.clone();
    order.push(out_label);
    let dy = h.space(out_label)?.dim;
    let diag = h.reorder(&order)?.real_diagonal();
    Ok(diag
        .chunks(dy)
        .map(|g| g.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum())
}

fn bracket(h: &LabeledOperator, x: &LabeledOperator, out_label: &str) -> Result<(f64, f64)> {
    let y = h.space(out_label)?.clone();
    let slot = h.position(out_label).expect("checked");
    let lower = h.inner(x)?.re;
    let lambda = partial_trace(&h.matmul(x)?, out_label)?.hermitian_part();
    let lift = lift_identity(&lambda, &y, slot)?;
    let gap = h.sub(&lift)?.hermitian_part();
    let mu = hermitian_eig(&gap)?.max();
    let din = (h.dim() / y.dim) as f64;
    Ok((lower, lambda.trace().re + din * mu))
}

/// Projected gradient ascent with a running average; returns the best bracket
/// seen even when it is wider than `opts.tol`.
pub fn linear_max_bracket(
    h: &LabeledOperator,
    out_label: &str,
    opts: LinearMaxOptions,
) -> Result<LinearMax> {
    let h = h.hermitian_part();
    let dy = h.space(out_label)?.dim;
    let hnorm = operator_norm(&h)?;
    let mut x = LabeledOperator::identity(h.labels().to_vec())?.scale(1.0 / dy as f64);
    if hnorm == 0.0 {
        return Ok(LinearMax {
            lower: 0.0,
            upper: 0.0,
            maximizer: x,
            iterations: 0,
        });
    }
    let mut step = 1.0 / hnorm;
    let mut avg = x.clone();
    let mut best = {
        let (lo, hi) = bracket(&h, &x, out_label)?;
        LinearMax {
            lower: lo,
            upper: hi,
            maximizer: x.clone(),
            iterations: 0,
        }
    };
    for k in 1..=opts.max_iters {
        let moved = x.add(&h.scale(step))?;
        let out = dykstra(&moved, out_label, opts.dykstra)?;
        x = repair(&out.point, out_label, out.min_eigenvalue)?;
        let w = 1.0 / (k as f64 + 1.0);
        avg = avg.scale(1.0 - w).add(&x.scale(w))?;
        for cand in [&x, &avg] {
            let (lo, hi) = bracket(&h, cand, out_label)?;
            if lo > best.lower {
                best.lower = lo;
                best.maximizer = cand.clone();
            }
            best.upper = best.upper.min(hi);
        }
        best.iterations = k;
        if best.upper - best.lower <= opts.tol {
            break;
        }
        if k % 25 == 0 {
            step *= 2.0;
            // restart the average from the current iterate
            avg = x.clone();
        }
    }
    Ok(best)
}

/// Iterative maximization; errors with the bracket if it stays wider than `opts.tol`.
pub fn choi_linear_max_iterative(
    h: &LabeledOperator,
    out_label: &str,
    opts: LinearMaxOptions,
) -> Result<LinearMax> {
    let res = linear_max_bracket(h, out_label, opts)?;
    if res.upper - res.lower > opts.tol {
        return Err(Error::LinearMaxNoConvergence {
            lower: res.lower,
            upper: res.upper,
        });
    }
    Ok(res)
}

/// Certified upper bound on `max ⟨H, X⟩`, exact for diagonal `H` and within
/// the iterative tolerance otherwise.
pub fn choi_linear_max(h: &LabeledOperator, out_label: &str) -> Result<f64> {
    if h.is_diagonal(0.0) {
        return choi_linear_max_diagonal(h, out_label);
    }
    Ok(choi_linear_max_iterative(h, out_label, LinearMaxOptions::default())?.upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{tensor, CMatrix, Space};
    use num_complex::Complex64;

    fn xy(diag: &[f64]) -> LabeledOperator {
        LabeledOperator::from_real_diagonal(vec![Space::new("X", 2), Space::new("Y", 2)], diag)
            .unwrap()
    }

    #[test]
    fn diagonal_examples() {
        assert_eq!(
            choi_linear_max(&xy(&[0.5, 0.5, 0.0, -0.5]), "Y").unwrap(),
            0.5
        );
        assert_eq!(choi_linear_max(&xy(&[0.0; 4]), "Y").unwrap(), 0.0);
        // label order does not matter
        let yx = xy(&[0.5, 0.5, 0.0, -0.5]).reorder(&["Y", "X"]).unwrap();
        assert_eq!(choi_linear_max(&yx, "Y").unwrap(), 0.5);
    }

    #[test]
    fn iterative_agrees_on_diagonal() {
        let h = xy(&[0.5, 0.5, 0.0, -0.5]);
        let r = choi_linear_max_iterative(&h, "Y", LinearMaxOptions::default()).unwrap();
        assert!((r.lower - 0.5).abs() < 1e-9 && (r.upper - 0.5).abs() < 1e-9);
    }

    #[test]
    fn identity_lift_gives_trace() {
        let lam = LabeledOperator::new(
            vec![Space::new("X", 2)],
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::new(0.3, 0.0),
                    Complex64::new(0.2, -0.1),
                    Complex64::new(0.2, 0.1),
                    Complex64::new(-0.7, 0.0),
                ],
            ),
        )
        .unwrap();
        let h = tensor(
            &lam,
            &LabeledOperator::identity(vec![Space::new("Y", 2)]).unwrap(),
        )
        .unwrap();
        let r = choi_linear_max_iterative(&h, "Y", LinearMaxOptions::default()).unwrap();
        assert!((r.upper - (-0.4)).abs() < 1e-9, "{r:?}");
        assert!((choi_linear_max(&h, "Y").unwrap() + 0.4).abs() < 1e-9);
    }

    #[test]
    fn non_diagonal_bracket_closes() {
        let mut m = CMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] =
                    Complex64::new(((i + 2 * j) % 3) as f64 - 1.0, (i as f64 - j as f64) * 0.2);
            }
        }
        let h = LabeledOperator::new(vec![Space::new("X", 2), Space::new("Y", 2)], m)
            .unwrap()
            .hermitian_part();
        let r = choi_linear_max_iterative(&h, "Y", LinearMaxOptions::default()).unwrap();
        assert!(r.upper - r.lower <= 1e-9);
    }
}
