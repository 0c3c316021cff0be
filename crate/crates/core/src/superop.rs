//! Choi matrices, superoperators, and the map `Ψ_ρ` induced by a bipartite state.
//!
//! Superoperators act on vectorized operators in the matrix-unit basis with
//! column-major vectorization: `E_ij` (row `i`, column `j`) sits at index
//! `j * d + i`. The superoperator matrix therefore has column `j * d_in + i`
//! equal to `vec(Ψ(E_ij))`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, partial_trace, spectral_fn, tensor, CMatrix, LabeledOperator, Space,
};
use crate::tol;

const RANDOM_CHANNEL_RETRIES: u64 = 16;
const INVERSE_SQRT_FLOOR: f64 = 1e-12;

/// Choi matrix of a channel from `in_label` to `out_label`.
///
/// The factor order of `op` is free; everything downstream contracts by label.
/// Operators produced by this crate use `[in, out]`, so that a channel on a
/// qubit pair stores `|x>|y>` at index `x * dim(out) + y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoiMatrix {
    op: LabeledOperator,
    out_label: String,
    in_label: String,
    min_eigenvalue: f64,
    tp_residual: f64,
}

impl ChoiMatrix {
    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn into_op(self) -> LabeledOperator {
        self.op
    }

    pub fn out_label(&self) -> &str {
        &self.out_label
    }

    pub fn in_label(&self) -> &str {
        &self.in_label
    }

    pub fn out_space(&self) -> &Space {
        self.op.space(&self.out_label).expect("validated label")
    }

    pub fn in_space(&self) -> &Space {
        self.op.space(&self.in_label).expect("validated label")
    }

    /// Smallest eigenvalue seen at validation.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// `|Tr_out(J) - 1_in|_F` seen at validation.
    pub fn tp_residual(&self) -> f64 {
        self.tp_residual
    }
}

/// Validate `x` as the Choi matrix of a CPTP map `in_label -> out_label`.
pub fn choi_validate(x: &LabeledOperator, out_label: &str, in_label: &str) -> Result<ChoiMatrix> {
    choi_validate_with_tol(x, out_label, in_label, tol::scaled(x.frobenius_norm()))
}

pub fn choi_validate_with_tol(
    x: &LabeledOperator,
    out_label: &str,
    in_label: &str,
    tol: f64,
) -> Result<ChoiMatrix> {
    if x.labels().len() != 2 || out_label == in_label {
        return Err(Error::Shape(format!(
            "Choi matrix needs exactly the labels {out_label} and {in_label}, got {:?}",
            x.label_names()
        )));
    }
    x.space(out_label)?;
    let in_space = x.space(in_label)?.clone();
    let check = x.hermitian_check(tol);
    if !check.is_hermitian {
        return Err(Error::NotHermitian {
            asymmetry: check.max_asymmetry,
        });
    }
    let eig = hermitian_eig(&x.hermitian_part())?;
    let min_eigenvalue = eig.min();
    if min_eigenvalue < -tol {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    let marginal = partial_trace(x, out_label)?;
    let id = LabeledOperator::identity(vec![in_space])?;
    let tp_residual = marginal.sub(&id)?.frobenius_norm();
    if tp_residual > tol {
        return Err(Error::NotTracePreserving {
            label: out_label.to_string(),
            residual: tp_residual,
        });
    }
    Ok(ChoiMatrix {
        op: x.clone(),
        out_label: out_label.to_string(),
        in_label: in_label.to_string(),
        min_eigenvalue,
        tp_residual,
    })
}

/// Choi matrix `Σ_ij E_ij ⊗ E_ij` of the identity channel, on `[in, out]`.
pub fn identity_channel(input: &Space, output: &Space) -> Result<ChoiMatrix> {
    if input.dim != output.dim {
        return Err(Error::Shape(
            "identity channel needs equal dimensions".into(),
        ));
    }
    let d = input.dim;
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = Complex64::new(1.0, 0.0);
        }
    }
    let op = LabeledOperator::new(vec![input.clone(), output.clone()], m)?;
    choi_validate(&op, &output.name, &input.name)
}

/// Recover `Φ(A) = Tr_in[(1_out ⊗ A^T) J]`.
pub fn apply_choi(j: &ChoiMatrix, a: &LabeledOperator) -> Result<LabeledOperator> {
    let in_space = j.in_space().clone();
    let out_space = j.out_space().clone();
    if a.labels().len() != 1 || a.labels()[0] != in_space {
        return Err(Error::Shape(format!(
            "apply_choi expects an operator on {:?}, got {:?}",
            in_space,
            a.labels()
        )));
    }
    let jm = j.op.reorder(&[&in_space.name, &out_space.name])?;
    let (din, dout) = (in_space.dim, out_space.dim);
    let am = a.matrix();
    let jm = jm.matrix();
    let mat = CMatrix::from_fn(dout, dout, |y, yp| {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 0..din {
            for xp in 0..din {
                acc += am[(x, xp)] * jm[(x * dout + y, xp * dout + yp)];
            }
        }
        acc
    });
    LabeledOperator::new(vec![out_space], mat)
}

/// Linear map `L(in) -> L(out)` as a `d_out² × d_in²` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    matrix: CMatrix,
    input: Space,
    output: Space,
}

#[inline]
fn vec_index(i: usize, j: usize, d: usize) -> usize {
    j * d + i
}

impl SuperOperator {
    pub fn new(matrix: CMatrix, input: Space, output: Space) -> Result<Self> {
        if matrix.nrows() != output.dim * output.dim || matrix.ncols() != input.dim * input.dim {
            return Err(Error::Shape(format!(
                "superoperator matrix {}x{} for {} -> {}",
                matrix.nrows(),
                matrix.ncols(),
                input.dim,
                output.dim
            )));
        }
        Ok(Self {
            matrix,
            input,
            output,
        })
    }

    /// `scale · (relabel input -> output)`.
    pub fn scaled_relabel(scale: f64, input: Space, output: Space) -> Result<Self> {
        if input.dim != output.dim {
            return Err(Error::Shape("relabeling needs equal dimensions".into()));
        }
        let n = input.dim * input.dim;
        let matrix = CMatrix::identity(n, n) * Complex64::new(scale, 0.0);
        Self::new(matrix, input, output)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn input(&self) -> &Space {
        &self.input
    }

    pub fn output(&self) -> &Space {
        &self.output
    }

    /// If this map is `c · relabel` for a real `c > 0`, return `c`.
    pub fn relabel_scale(&self, tol: f64) -> Option<f64> {
        if self.input.dim != self.output.dim {
            return None;
        }
        let c = self.matrix[(0, 0)];
        if c.re <= tol || c.im.abs() > tol {
            return None;
        }
        let n = self.matrix.nrows();
        let dev = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.matrix[(i, j)] - c
            } else {
                self.matrix[(i, j)]
            }
        });
        (dev.norm() <= tol).then_some(c.re)
    }

    /// Image of a single operator on the input space.
    pub fn apply(&self, a: &LabeledOperator) -> Result<LabeledOperator> {
        apply_on_factor(self, a, &self.input.name)
    }

    /// Largest singular value of the matrix, by power iteration on `M^H M`.
    pub fn operator_norm_estimate(&self, iterations: usize) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        let n = gram.nrows();
        let mut v = nalgebra::DVector::from_element(n, Complex64::new(1.0, 0.0));
        // deterministic, non-degenerate start
        for (k, z) in v.iter_mut().enumerate() {
            *z = Complex64::new(1.0 + 0.1 * k as f64, 0.05 * k as f64);
        }
        let mut lambda = 0.0;
        for _ in 0..iterations {
            let w = &gram * &v;
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            lambda = norm / v.norm();
            v = w / Complex64::new(norm, 0.0);
        }
        lambda.sqrt()
    }
}

/// Hilbert–Schmidt adjoint: the conjugate transpose in the (orthonormal)
/// matrix-unit basis.
pub fn adjoint(psi: &SuperOperator) -> SuperOperator {
    SuperOperator {
        matrix: psi.matrix.adjoint(),
        input: psi.output.clone(),
        output: psi.input.clone(),
    }
}

/// Apply `psi` to the `target_label` factor of `m`, identity elsewhere.
/// The target slot is renamed to `psi.output`.
pub fn apply_on_factor(
    psi: &SuperOperator,
    m: &LabeledOperator,
    target_label: &str,
) -> Result<LabeledOperator> {
    let p = m
        .position(target_label)
        .ok_or_else(|| Error::UnknownLabel(target_label.to_string()))?;
    let din = m.labels()[p].dim;
    if din != psi.input.dim {
        return Err(Error::Shape(format!(
            "factor `{target_label}` has dimension {din}, superoperator expects {}",
            psi.input.dim
        )));
    }
    if psi.output.name != target_label && m.position(&psi.output.name).is_some() {
        return Err(Error::LabelCollision(psi.output.name.clone()));
    }
    let dout = psi.output.dim;
    let dims: Vec<usize> = m.labels().iter().map(|s| s.dim).collect();
    let low: usize = dims[p + 1..].iter().product();
    let high: usize = dims[..p].iter().product();
    let mut out_labels = m.labels().to_vec();
    out_labels[p] = psi.output.clone();
    let n_out = high * dout * low;
    let src = m.matrix();
    let s = &psi.matrix;
    let mut out = CMatrix::zeros(n_out, n_out);
    let in_index = |h: usize, k: usize, l: usize| (h * din + k) * low + l;
    let out_index = |h: usize, k: usize, l: usize| (h * dout + k) * low + l;
    for h in 0..high {
        for l in 0..low {
            for hp in 0..high {
                for lp in 0..low {
                    for i in 0..din {
                        for j in 0..din {
                            let v = src[(in_index(h, i, l), in_index(hp, j, lp))];
                            if v == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            let col = vec_index(i, j, din);
                            for k in 0..dout {
                                for kp in 0..dout {
                                    let coeff = s[(vec_index(k, kp, dout), col)];
                                    out[(out_index(h, k, l), out_index(hp, kp, lp))] += v * coeff;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    LabeledOperator::new(out_labels, out)
}

/// Check that `rho` is a density operator within `tol`.
pub fn validate_density(rho: &LabeledOperator, tol: f64) -> Result<()> {
    let check = rho.hermitian_check(tol);
    if !check.is_hermitian {
        return Err(Error::InvalidDensity(format!(
            "not Hermitian (asymmetry {:e})",
            check.max_asymmetry
        )));
    }
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::InvalidDensity(format!("trace {tr} != 1")));
    }
    let min = hermitian_eig(&rho.hermitian_part())?.min();
    if min < -tol {
        return Err(Error::InvalidDensity(format!("min eigenvalue {min:e}")));
    }
    Ok(())
}

/// The map `Ψ_ρ: L(in) -> L(out)` with `(Φ ⊗ Id)(ρ) = (Id ⊗ Ψ_ρ)(J(Φ))`,
/// where `in_label` names the factor of `rho` that `Φ` acts on.
///
/// On matrix units `Ψ_ρ(E_ij) = Tr_in[ρ (E_ji ⊗ 1)]`, i.e. the `(i, j)` block
/// of `ρ` with respect to the input factor.
pub fn psi_from_rho(rho: &LabeledOperator, in_label: &str) -> Result<SuperOperator> {
    if rho.labels().len() != 2 {
        return Err(Error::Shape(format!(
            "ρ must be bipartite, got {:?}",
            rho.label_names()
        )));
    }
    validate_density(rho, tol::scaled(rho.frobenius_norm()))?;
    let input = rho.space(in_label)?.clone();
    let output = rho
        .labels()
        .iter()
        .find(|s| s.name != in_label)
        .cloned()
        .expect("bipartite");
    let r = rho.reorder(&[&input.name, &output.name])?;
    let (din, dout) = (input.dim, output.dim);
    let rm = r.matrix();
    let matrix = CMatrix::from_fn(dout * dout, din * din, |row, col| {
        let (i, j) = (col % din, col / din);
        let (k, kp) = (row % dout, row / dout);
        rm[(i * dout + k, j * dout + kp)]
    });
    SuperOperator::new(matrix, input, output)
}

fn complex_gaussian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    })
}

/// Seeded random channel `input -> output`, stored on `[in, out]`.
pub fn random_channel_between(seed: u64, input: &Space, output: &Space) -> Result<ChoiMatrix> {
    if input.dim == 0 || output.dim == 0 {
        return Err(Error::InvalidArgument("dimensions must be >= 1".into()));
    }
    let labels = vec![input.clone(), output.clone()];
    let n = input.dim * output.dim;
    for attempt in 0..RANDOM_CHANNEL_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let r = complex_gaussian(&mut rng, n);
        let g = LabeledOperator::new(labels.clone(), r.adjoint() * r)?.hermitian_part();
        let marginal = partial_trace(&g, &output.name)?.hermitian_part();
        if hermitian_eig(&marginal)?.min() < INVERSE_SQRT_FLOOR {
            continue;
        }
        let inv_sqrt = spectral_fn(&marginal, |x| 1.0 / x.max(INVERSE_SQRT_FLOOR).sqrt())?;
        let lift = tensor(&inv_sqrt, &LabeledOperator::identity(vec![output.clone()])?)?;
        let j = lift.matmul(&g)?.matmul(&lift)?.hermitian_part();
        return choi_validate(&j, &output.name, &input.name);
    }
    Err(Error::InvalidArgument(format!(
        "could not draw a nonsingular marginal from seed {seed}"
    )))
}

/// Seeded random channel from `X` (dimension `d_in`) to `Y` (dimension `d_out`).
pub fn random_channel(seed: u64, d_in: usize, d_out: usize) -> Result<ChoiMatrix> {
    random_channel_between(seed, &Space::new("X", d_in), &Space::new("Y", d_out))
}

/// Seeded random full-rank density operator `R^H R / Tr(R^H R)`.
pub fn random_density(seed: u64, labels: Vec<Space>) -> Result<LabeledOperator> {
    let n = labels.iter().map(|s| s.dim).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = complex_gaussian(&mut rng, n);
    let g = r.adjoint() * r;
    let tr = g.trace().re;
    let op = LabeledOperator::new(labels, g / Complex64::new(tr, 0.0))?;
    Ok(op.hermitian_part())
}

/// `vec` / `unvec` helpers for operators on a single space.
pub fn vectorize(a: &CMatrix) -> nalgebra::DVector<Complex64> {
    let d = a.nrows();
    nalgebra::DVector::from_fn(d * d, |k, _| a[(k % d, k / d)])
}

pub fn unvectorize(v: &nalgebra::DVector<Complex64>, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| v[vec_index(i, j, d)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(n: &str, d: usize) -> Space {
        Space::new(n, d)
    }

    fn bell_rho() -> LabeledOperator {
        let mut m = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                m[(i * 2 + i, j * 2 + j)] = Complex64::new(0.5, 0.0);
            }
        }
        LabeledOperator::new(vec![sp("X", 2), sp("Z", 2)], m).unwrap()
    }

    #[test]
    fn validate_counterexample_x() {
        let x = LabeledOperator::from_real_diagonal(
            vec![sp("X", 2), sp("Y", 2)],
            &[1.0, 0.0, 0.4, 0.6],
        )
        .unwrap();
        let j = choi_validate(&x, "Y", "X").unwrap();
        let marginal = partial_trace(j.op(), "Y").unwrap();
        assert_eq!(marginal.real_diagonal(), vec![1.0, 1.0]);
        assert!(j.tp_residual() < 1e-15);
        assert_eq!(j.min_eigenvalue(), 0.0);
    }

    #[test]
    fn validate_identity_channel_and_failures() {
        assert!(identity_channel(&sp("X", 3), &sp("Y", 3)).is_ok());
        let id = LabeledOperator::identity(vec![sp("X", 2), sp("Y", 2)]).unwrap();
        match choi_validate(&id, "Y", "X") {
            Err(Error::NotTracePreserving { residual, .. }) => {
                assert!((residual - 2f64.sqrt()).abs() < 1e-14)
            }
            other => panic!("{other:?}"),
        }
        let neg = LabeledOperator::from_real_diagonal(
            vec![sp("X", 2), sp("Y", 2)],
            &[1.5, -0.5, 0.5, 0.5],
        )
        .unwrap();
        assert!(matches!(
            choi_validate(&neg, "Y", "X"),
            Err(Error::NotPsd { min_eigenvalue }) if min_eigenvalue == -0.5
        ));
        assert!(matches!(
            choi_validate(&id, "Q", "X"),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn apply_choi_examples() {
        let idc = identity_channel(&sp("X", 2), &sp("Y", 2)).unwrap();
        let a = LabeledOperator::new(
            vec![sp("X", 2)],
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::new(0.3, 0.0),
                    Complex64::new(0.1, 0.2),
                    Complex64::new(-0.4, 0.5),
                    Complex64::new(0.7, 0.0),
                ],
            ),
        )
        .unwrap();
        let out = apply_choi(&idc, &a).unwrap();
        assert_eq!(out.labels(), &[sp("Y", 2)]);
        assert_eq!(out.matrix(), a.matrix());

        let x = LabeledOperator::from_real_diagonal(
            vec![sp("X", 2), sp("Y", 2)],
            &[1.0, 0.0, 0.4, 0.6],
        )
        .unwrap();
        let j = choi_validate(&x, "Y", "X").unwrap();
        let p0 = LabeledOperator::from_real_diagonal(vec![sp("X", 2)], &[1.0, 0.0]).unwrap();
        assert_eq!(apply_choi(&j, &p0).unwrap().real_diagonal(), vec![1.0, 0.0]);
        let one = LabeledOperator::identity(vec![sp("X", 2)]).unwrap();
        assert!((apply_choi(&j, &one).unwrap().trace().re - 2.0).abs() < 1e-15);
        assert!(apply_choi(&j, &LabeledOperator::identity(vec![sp("X", 3)]).unwrap()).is_err());
    }

    #[test]
    fn psi_of_bell_rho_is_half_relabel() {
        let psi = psi_from_rho(&bell_rho(), "X").unwrap();
        assert_eq!(psi.input(), &sp("X", 2));
        assert_eq!(psi.output(), &sp("Z", 2));
        assert_eq!(
            psi.matrix(),
            &(CMatrix::identity(4, 4) * Complex64::new(0.5, 0.0))
        );
        assert_eq!(psi.relabel_scale(1e-10), Some(0.5));
        let adj = adjoint(&psi);
        assert_eq!(adj.input(), &sp("Z", 2));
        assert_eq!(adj.output(), &sp("X", 2));
        assert_eq!(adj.matrix(), psi.matrix());
        assert_eq!(adjoint(&adj), psi);
    }

    #[test]
    fn psi_of_product_state() {
        // ρ = s ⊗ t  =>  Ψ(A) = Tr(s^T A) t
        let s = random_density(3, vec![sp("X", 2)]).unwrap();
        let t = random_density(4, vec![sp("Z", 3)]).unwrap();
        let rho = tensor(&s, &t).unwrap();
        let psi = psi_from_rho(&rho, "X").unwrap();
        let a = LabeledOperator::new(
            vec![sp("X", 2)],
            CMatrix::from_fn(2, 2, |i, j| Complex64::new(i as f64 + 0.5, j as f64 - 0.25)),
        )
        .unwrap();
        let lhs = psi.apply(&a).unwrap();
        let coeff = (s.matrix().transpose() * a.matrix()).trace();
        let rhs = t.matrix() * coeff;
        assert!((lhs.matrix() - rhs).norm() < 1e-14);
    }

    #[test]
    fn psi_of_maximally_mixed() {
        let rho = LabeledOperator::identity(vec![sp("X", 2), sp("Z", 2)])
            .unwrap()
            .scale(0.25);
        let psi = psi_from_rho(&rho, "X").unwrap();
        let a = LabeledOperator::from_real_diagonal(vec![sp("X", 2)], &[0.3, 1.1]).unwrap();
        let out = psi.apply(&a).unwrap();
        assert!(
            (out.matrix() - CMatrix::identity(2, 2) * Complex64::new(0.35, 0.0)).norm() < 1e-15
        );
    }

    #[test]
    fn psi_rejects_non_density() {
        let bad = LabeledOperator::identity(vec![sp("X", 2), sp("Z", 2)]).unwrap();
        assert!(matches!(
            psi_from_rho(&bad, "X"),
            Err(Error::InvalidDensity(_))
        ));
    }

    #[test]
    fn apply_on_factor_examples() {
        let psi = psi_from_rho(&bell_rho(), "X").unwrap();
        let x = LabeledOperator::from_real_diagonal(
            vec![sp("X", 2), sp("Y", 2)],
            &[1.0, 0.0, 0.4, 0.6],
        )
        .unwrap();
        let out = apply_on_factor(&psi, &x, "X").unwrap();
        assert_eq!(out.label_names(), vec!["Z", "Y"]);
        assert_eq!(out.real_diagonal(), vec![0.5, 0.0, 0.2, 0.3]);

        let idsup = SuperOperator::scaled_relabel(1.0, sp("Y", 2), sp("Y", 2)).unwrap();
        assert_eq!(apply_on_factor(&idsup, &x, "Y").unwrap(), x);

        assert!(matches!(
            apply_on_factor(&psi, &x, "Q"),
            Err(Error::UnknownLabel(_))
        ));
        let x3 = LabeledOperator::identity(vec![sp("X", 3)]).unwrap();
        assert!(matches!(
            apply_on_factor(&psi, &x3, "X"),
            Err(Error::Shape(_))
        ));
        let clash = LabeledOperator::identity(vec![sp("X", 2), sp("Z", 2)]).unwrap();
        assert!(matches!(
            apply_on_factor(&psi, &clash, "X"),
            Err(Error::LabelCollision(_))
        ));
    }

    #[test]
    fn random_channel_is_valid_and_deterministic() {
        for seed in 0..20 {
            let a = random_channel(seed, 2, 3).unwrap();
            let b = random_channel(seed, 2, 3).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.op().label_names(), vec!["X", "Y"]);
        }
        assert_ne!(
            random_channel(1, 2, 2).unwrap(),
            random_channel(2, 2, 2).unwrap()
        );
        assert!(random_channel(0, 0, 2).is_err());
    }

    #[test]
    fn vectorization_is_column_major() {
        let a = CMatrix::from_fn(3, 3, |i, j| Complex64::new((3 * i + j) as f64, 0.0));
        let v = vectorize(&a);
        assert_eq!(v[1], a[(1, 0)]);
        assert_eq!(v[3], a[(0, 1)]);
        assert_eq!(unvectorize(&v, 3), a);
    }

    #[test]
    fn superoperator_columns_are_images_of_matrix_units() {
        let rho = random_density(11, vec![sp("X", 2), sp("Z", 3)]).unwrap();
        let psi = psi_from_rho(&rho, "X").unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut e = CMatrix::zeros(2, 2);
                e[(i, j)] = Complex64::new(1.0, 0.0);
                let img = psi
                    .apply(&LabeledOperator::new(vec![sp("X", 2)], e).unwrap())
                    .unwrap();
                let col = psi.matrix().column(vec_index(i, j, 2)).into_owned();
                assert!((vectorize(img.matrix()) - col).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn power_iteration_norm() {
        let psi = psi_from_rho(&bell_rho(), "X").unwrap();
        assert!((psi.operator_norm_estimate(100) - 0.5).abs() < 1e-12);
    }
}
