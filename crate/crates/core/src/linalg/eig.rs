use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::labeled::{CMatrix, LabeledOperator};
use crate::error::{Error, Result};
use crate::tol;

/// Sweep stops once the off-diagonal Frobenius mass drops below this
/// fraction of the input's Frobenius norm.
pub const JACOBI_THRESHOLD: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Spectral decomposition `A = V diag(eigenvalues) V^H` with eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// `V f(L) V^H`.
    pub fn recompose(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// Cyclic complex Jacobi on a matrix assumed Hermitian (only the upper
/// triangle's phase information is used in each rotation).
pub fn jacobi_eigh(a: &CMatrix) -> Result<EigenDecomposition> {
    let n = a.nrows();
    let mut m = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v = CMatrix::identity(n, n);
    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = JACOBI_THRESHOLD * scale.max(f64::MIN_POSITIVE);

    let off = |m: &CMatrix| {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += m[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    };

    let mut converged = off(&m) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let abs = apq.norm();
                if abs == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let omega = apq / abs;
                let theta = (aqq - app) / (2.0 * abs);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let oc = omega.conj();
                // U acts on columns p, q: [[c, s], [-s*conj(w), c*conj(w)]]
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c - mkq * s * oc;
                    m[(k, q)] = mkp * s + mkq * c * oc;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c - mqk * s * omega;
                    m[(q, k)] = mpk * s + mqk * c * omega;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s * oc;
                    v[(k, q)] = vkp * s + vkq * c * oc;
                }
            }
        }
        sweeps += 1;
        converged = off(&m) <= threshold;
    }
    if !converged {
        return Err(Error::EigenNoConvergence {
            sweeps,
            off_diagonal: off(&m),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep original index order
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn require_hermitian(a: &LabeledOperator) -> Result<()> {
    let asym = a.asymmetry();
    if asym > tol::scaled(a.frobenius_norm()) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok(())
}

pub fn hermitian_eig(a: &LabeledOperator) -> Result<EigenDecomposition> {
    require_hermitian(a)?;
    jacobi_eigh(a.matrix())
}

/// Apply `f` through the spectral decomposition. Diagonal inputs take the
/// entrywise route so exact zeros stay exact.
pub fn spectral_fn(a: &LabeledOperator, f: impl Fn(f64) -> f64) -> Result<LabeledOperator> {
    require_hermitian(a)?;
    if a.is_diagonal(0.0) {
        let n = a.dim();
        let mut mat = CMatrix::zeros(n, n);
        for i in 0..n {
            mat[(i, i)] = Complex64::new(f(a.matrix()[(i, i)].re), 0.0);
        }
        return a.with_matrix(mat);
    }
    let eig = jacobi_eigh(a.matrix())?;
    a.with_matrix(eig.recompose(f))
}

/// Sign with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn singular_values(a: &LabeledOperator) -> Result<Vec<f64>> {
    let m = a.matrix();
    if a.asymmetry() <= tol::scaled(a.frobenius_norm()) {
        if a.is_diagonal(0.0) {
            return Ok(a.real_diagonal().iter().map(|x| x.abs()).collect());
        }
        let eig = jacobi_eigh(m)?;
        return Ok(eig.eigenvalues.iter().map(|x| x.abs()).collect());
    }
    let gram = m.adjoint() * m;
    let eig = jacobi_eigh(&gram)?;
    Ok(eig.eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect())
}

/// Sum of singular values.
pub fn nuclear_norm(a: &LabeledOperator) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// Largest singular value.
pub fn operator_norm(a: &LabeledOperator) -> Result<f64> {
    Ok(singular_values(a)?.into_iter().fold(0.0, f64::max))
}

/// Loewner-order relation between two Hermitian operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// `a >= b` only.
    Greater,
    /// `b >= a` only.
    Less,
    /// Both hold: `a = b` up to tolerance.
    Equal,
    /// Neither holds.
    Incomparable,
}

impl Ordering {
    pub fn a_dominates(self) -> bool {
        matches!(self, Ordering::Greater | Ordering::Equal)
    }

    pub fn b_dominates(self) -> bool {
        matches!(self, Ordering::Less | Ordering::Equal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub ordering: Ordering,
    /// Smallest eigenvalue of `a - b`.
    pub min_eigenvalue: f64,
    /// Largest eigenvalue of `a - b`.
    pub max_eigenvalue: f64,
}

/// Compare `a` and `b` in the PSD order through the spectrum of `a - b`.
pub fn psd_order(a: &LabeledOperator, b: &LabeledOperator, tol: f64) -> Result<OrderVerdict> {
    if !a.same_label_set(b) {
        return Err(Error::Shape(format!(
            "psd_order on {:?} vs {:?}",
            a.label_names(),
            b.label_names()
        )));
    }
    let diff = a.sub(b)?;
    let eig = hermitian_eig(&diff)?;
    let (lo, hi) = (eig.min(), eig.max());
    let a_ge = lo >= -tol;
    let b_ge = hi <= tol;
    let ordering = match (a_ge, b_ge) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        (false, false) => Ordering::Incomparable,
    };
    Ok(OrderVerdict {
        ordering,
        min_eigenvalue: lo,
        max_eigenvalue: hi,
    })
}
