//! The sign-function certificate: residual `Δ`, dual candidate `Y = sign(Δ)`,
//! `H = (Id ⊗ Ψ_ρ*)(Y)`, and the two conditions
//! `Tr_Y(H J) ∈ Herm` and `H ⪰ 1_Y ⊗ Tr_Y(H J)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, lift_identity, nuclear_norm, partial_trace, psd_order, sign, spectral_fn,
    HermitianCheck, LabeledOperator, OrderVerdict, Space,
};
use crate::superop::{
    adjoint, apply_on_factor, psi_from_rho, validate_density, ChoiMatrix, SuperOperator,
};
use crate::tol;

/// Data `(ρ, σ)` of the channel fitting problem.
///
/// `ρ` lives on `X ⊗ Z` and `σ` on `Z ⊗ Y`; the shared label is `Z`, the
/// other factor of `ρ` is the channel input `X`, and the other factor of `σ`
/// is the channel output `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    rho: LabeledOperator,
    sigma: LabeledOperator,
    psi: SuperOperator,
    psi_adjoint: SuperOperator,
    x: Space,
    y: Space,
    z: Space,
}

impl ProblemInstance {
    pub fn new(rho: LabeledOperator, sigma: LabeledOperator) -> Result<Self> {
        if rho.labels().len() != 2 || sigma.labels().len() != 2 {
            return Err(Error::Shape("ρ and σ must both be bipartite".into()));
        }
        let shared: Vec<&Space> = rho
            .labels()
            .iter()
            .filter(|s| sigma.labels().contains(s))
            .collect();
        if shared.len() != 1 {
            return Err(Error::Shape(format!(
                "ρ on {:?} and σ on {:?} must share exactly one space",
                rho.label_names(),
                sigma.label_names()
            )));
        }
        let z = shared[0].clone();
        let x = rho
            .labels()
            .iter()
            .find(|s| **s != z)
            .cloned()
            .expect("bipartite");
        let y = sigma
            .labels()
            .iter()
            .find(|s| **s != z)
            .cloned()
            .expect("bipartite");
        if x.name == y.name {
            return Err(Error::LabelCollision(x.name));
        }
        validate_density(&sigma, tol::scaled(sigma.frobenius_norm()))?;
        let psi = psi_from_rho(&rho, &x.name)?;
        let psi_adjoint = adjoint(&psi);
        Ok(Self {
            rho,
            sigma,
            psi,
            psi_adjoint,
            x,
            y,
            z,
        })
    }

    pub fn rho(&self) -> &LabeledOperator {
        &self.rho
    }

    pub fn sigma(&self) -> &LabeledOperator {
        &self.sigma
    }

    pub fn psi(&self) -> &SuperOperator {
        &self.psi
    }

    pub fn psi_adjoint(&self) -> &SuperOperator {
        &self.psi_adjoint
    }

    /// Channel input space.
    pub fn x_space(&self) -> &Space {
        &self.x
    }

    /// Channel output space.
    pub fn y_space(&self) -> &Space {
        &self.y
    }

    /// Reference space shared by `ρ` and `σ`.
    pub fn z_space(&self) -> &Space {
        &self.z
    }

    /// Label order `[X, Y]` used for Choi matrices of this instance.
    pub fn choi_labels(&self) -> Vec<Space> {
        vec![self.x.clone(), self.y.clone()]
    }

    /// `(Id ⊗ Ψ_ρ)(X)`, in `σ`'s label order.
    pub fn forward(&self, x: &LabeledOperator) -> Result<LabeledOperator> {
        apply_on_factor(&self.psi, x, &self.x.name)?.aligned_to(&self.sigma)
    }

    /// `(Id ⊗ Ψ_ρ*)(Y)`, in `[X, Y]` order.
    pub fn backward(&self, y: &LabeledOperator) -> Result<LabeledOperator> {
        apply_on_factor(&self.psi_adjoint, y, &self.z.name)?.reorder(&[&self.x.name, &self.y.name])
    }

    /// `‖σ − (Id ⊗ Ψ_ρ)(X)‖_*` for an operator on `[X, Y]` (no feasibility check).
    pub fn objective(&self, x: &LabeledOperator) -> Result<f64> {
        nuclear_norm(&self.sigma.sub(&self.forward(x)?)?.hermitian_part())
    }

    fn check_choi(&self, x: &ChoiMatrix) -> Result<()> {
        if x.in_space() != &self.x || x.out_space() != &self.y {
            return Err(Error::Shape(format!(
                "Choi matrix maps {:?} -> {:?}, instance expects {:?} -> {:?}",
                x.in_space(),
                x.out_space(),
                self.x,
                self.y
            )));
        }
        Ok(())
    }
}

/// Outcome of the certificate conditions for one candidate channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// `σ − (Id ⊗ Ψ_ρ)(X)`; absent when the conditions were checked on a bare `H`.
    pub delta: Option<LabeledOperator>,
    /// `sign(Δ)`.
    pub y: Option<LabeledOperator>,
    pub h: LabeledOperator,
    /// `Tr_Y(H X)`.
    pub traced: LabeledOperator,
    /// `1_Y ⊗ Tr_Y(H X)`, in `H`'s label order.
    pub lift: LabeledOperator,
    pub hermitian: HermitianCheck,
    /// Order of `H` against `lift`.
    pub order: OrderVerdict,
    /// Spectrum of `H − lift`, descending.
    pub difference_eigenvalues: Vec<f64>,
    pub satisfied: bool,
}

impl CertificateReport {
    /// `H ⪰ lift`.
    pub fn forward_holds(&self) -> bool {
        self.order.ordering.a_dominates()
    }

    /// `lift ⪰ H`.
    pub fn reverse_holds(&self) -> bool {
        self.order.ordering.b_dominates()
    }
}

/// `Δ = σ − (Id ⊗ Ψ_ρ)(X)`.
pub fn residual(inst: &ProblemInstance, x: &ChoiMatrix) -> Result<LabeledOperator> {
    inst.check_choi(x)?;
    Ok(inst.sigma.sub(&inst.forward(x.op())?)?.hermitian_part())
}

/// `Y = sign(Δ)` with `sign(0) = 0`.
pub fn dual_candidate(delta: &LabeledOperator) -> Result<LabeledOperator> {
    spectral_fn(delta, sign)
}

/// `H = (Id ⊗ Ψ*)(Y)`, applying `psi_adjoint` to the factor named by its input space.
pub fn certificate_h(psi_adjoint: &SuperOperator, y: &LabeledOperator) -> Result<LabeledOperator> {
    apply_on_factor(psi_adjoint, y, &psi_adjoint.input().name)
}

/// Evaluate both conditions for `H` at the channel `x`.
pub fn check_conditions(
    h: &LabeledOperator,
    x: &ChoiMatrix,
    tol: f64,
) -> Result<CertificateReport> {
    if !h.same_label_set(x.op()) {
        return Err(Error::Shape(format!(
            "H on {:?} vs X on {:?}",
            h.label_names(),
            x.op().label_names()
        )));
    }
    let out = x.out_space().clone();
    let y_slot = h.position(&out.name).expect("same label set");
    let hx = h.matmul(x.op())?;
    let traced = partial_trace(&hx, &out.name)?;
    let hermitian = traced.hermitian_check(tol::scaled(traced.frobenius_norm()));
    let lift = lift_identity(&traced, &out, y_slot)?;
    let order = psd_order(h, &lift.hermitian_part(), tol)?;
    let difference_eigenvalues = hermitian_eig(&h.sub(&lift)?.hermitian_part())?.eigenvalues;
    let satisfied = hermitian.is_hermitian && order.ordering.a_dominates();
    Ok(CertificateReport {
        delta: None,
        y: None,
        h: h.clone(),
        traced,
        lift,
        hermitian,
        order,
        difference_eigenvalues,
        satisfied,
    })
}

/// Residual → sign → `H` → conditions, with the default tolerance.
pub fn certify(inst: &ProblemInstance, x: &ChoiMatrix) -> Result<CertificateReport> {
    certify_with_tol(inst, x, tol::DEFAULT)
}

pub fn certify_with_tol(
    inst: &ProblemInstance,
    x: &ChoiMatrix,
    tol: f64,
) -> Result<CertificateReport> {
    let delta = residual(inst, x)?;
    let y = dual_candidate(&delta)?;
    let h = certificate_h(&inst.psi_adjoint, &y)?;
    let mut report = check_conditions(&h, x, tol)?;
    report.delta = Some(delta);
    report.y = Some(y);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{operator_norm, CMatrix, Ordering};
    use crate::superop::choi_validate;
    use num_complex::Complex64;

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

    fn zy(diag: &[f64]) -> LabeledOperator {
        LabeledOperator::from_real_diagonal(vec![sp("Z", 2), sp("Y", 2)], diag).unwrap()
    }

    fn choi(diag: &[f64]) -> ChoiMatrix {
        let op = LabeledOperator::from_real_diagonal(vec![sp("X", 2), sp("Y", 2)], diag).unwrap();
        choi_validate(&op, "Y", "X").unwrap()
    }

    #[test]
    fn counterexample_chain() {
        let inst = ProblemInstance::new(bell_rho(), zy(&[0.55, 0.15, 0.20, 0.10])).unwrap();
        let x = choi(&[1.0, 0.0, 0.4, 0.6]);
        let delta = residual(&inst, &x).unwrap();
        let expect = [0.05, 0.15, 0.0, -0.2];
        for (a, b) in delta.real_diagonal().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let y = dual_candidate(&delta).unwrap();
        assert_eq!(y.real_diagonal(), vec![1.0, 1.0, 0.0, -1.0]);
        let h = certificate_h(inst.psi_adjoint(), &y).unwrap();
        assert_eq!(h.label_names(), vec!["X", "Y"]);
        assert_eq!(h.real_diagonal(), vec![0.5, 0.5, 0.0, -0.5]);
        let report = check_conditions(&h, &x, 1e-9).unwrap();
        assert_eq!(report.traced.real_diagonal(), vec![0.5, -0.3]);
        assert_eq!(report.lift.real_diagonal(), vec![0.5, 0.5, -0.3, -0.3]);
        assert!(report.hermitian.is_hermitian);
        assert_eq!(report.order.ordering, Ordering::Incomparable);
        assert!(!report.satisfied);
        assert!(!report.forward_holds() && !report.reverse_holds());

        let full = certify(&inst, &x).unwrap();
        assert!(!full.satisfied);
        assert_eq!(full.y.as_ref().unwrap(), &y);
    }

    #[test]
    fn zero_h_is_satisfied() {
        let x = choi(&[1.0, 0.0, 0.4, 0.6]);
        let h = LabeledOperator::zeros(vec![sp("X", 2), sp("Y", 2)]).unwrap();
        let r = check_conditions(&h, &x, 1e-9).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.order.ordering, Ordering::Equal);
    }

    #[test]
    fn exact_fit_is_satisfied() {
        let x = choi(&[0.3, 0.7, 0.9, 0.1]);
        let sigma = zy(&[0.15, 0.35, 0.45, 0.05]);
        let inst = ProblemInstance::new(bell_rho(), sigma).unwrap();
        let r = certify(&inst, &x).unwrap();
        assert!(r.delta.as_ref().unwrap().frobenius_norm() < 1e-15);
        assert!(r.satisfied);
    }

    #[test]
    fn uniform_instance_is_satisfied() {
        let inst = ProblemInstance::new(bell_rho(), zy(&[0.1, 0.1, 0.4, 0.4])).unwrap();
        let x = choi(&[0.5; 4]);
        let r = certify(&inst, &x).unwrap();
        assert_eq!(r.h.real_diagonal(), vec![-0.5, -0.5, 0.5, 0.5]);
        assert!((r.h.sub(&r.lift).unwrap().frobenius_norm()) <= 1e-12);
        assert!(r.satisfied);
    }

    #[test]
    fn sign_candidate_edge_cases() {
        let z = zy(&[0.0; 4]);
        assert_eq!(dual_candidate(&z).unwrap(), z);
        let m = zy(&[-1.0; 4]);
        assert_eq!(dual_candidate(&m).unwrap(), m);
        assert!(
            operator_norm(&dual_candidate(&zy(&[0.3, -2.0, 0.0, 1e-300])).unwrap()).unwrap() <= 1.0
        );
    }

    #[test]
    fn label_mismatches_are_rejected() {
        let x = choi(&[1.0, 0.0, 0.4, 0.6]);
        let h = zy(&[0.0; 4]);
        assert!(matches!(
            check_conditions(&h, &x, 1e-9),
            Err(Error::Shape(_))
        ));

        let rho3 = LabeledOperator::identity(vec![sp("X", 3), sp("Z", 2)])
            .unwrap()
            .scale(1.0 / 6.0);
        let inst = ProblemInstance::new(rho3, zy(&[0.25; 4])).unwrap();
        assert!(matches!(residual(&inst, &x), Err(Error::Shape(_))));
    }

    #[test]
    fn instance_requires_shared_space() {
        let sigma = LabeledOperator::identity(vec![sp("W", 2), sp("Y", 2)])
            .unwrap()
            .scale(0.25);
        assert!(ProblemInstance::new(bell_rho(), sigma).is_err());
        let bad_sigma = zy(&[0.5, 0.5, 0.5, 0.5]);
        assert!(matches!(
            ProblemInstance::new(bell_rho(), bad_sigma),
            Err(Error::InvalidDensity(_))
        ));
    }
}
