use choicert::certificate::{certify, dual_candidate, ProblemInstance};
use choicert::linalg::{
    hermitian_eig, nuclear_norm, operator_norm, partial_trace, psd_order, spectral_fn, tensor,
    CMatrix, LabeledOperator, Space,
};
use choicert::superop::{
    adjoint, choi_validate, psi_from_rho, random_channel, random_channel_between, random_density,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

fn random_op(seed: u64, labels: Vec<Space>) -> LabeledOperator {
    let n = labels.iter().map(|s| s.dim).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LabeledOperator::new(labels, gaussian_matrix(&mut rng, n)).unwrap()
}

fn random_hermitian(seed: u64, labels: Vec<Space>) -> LabeledOperator {
    random_op(seed, labels).hermitian_part()
}

fn one(name: &str, d: usize) -> Vec<Space> {
    vec![Space::new(name, d)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_of_tensor(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let a = random_op(seed, one("A", da));
        let b = random_op(seed ^ 1, one("B", db));
        let traced = partial_trace(&tensor(&a, &b).unwrap(), "B").unwrap();
        let expected = a.matrix() * b.trace();
        prop_assert!((traced.matrix() - expected).norm() <= 1e-12);
    }

    #[test]
    fn partial_trace_keeps_trace_and_hermiticity(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let h = random_hermitian(seed, vec![Space::new("A", da), Space::new("B", db)]);
        for label in ["A", "B"] {
            let t = partial_trace(&h, label).unwrap();
            prop_assert!((t.trace() - h.trace()).norm() <= 1e-12);
            prop_assert!(t.asymmetry() <= 1e-12);
        }
    }

    #[test]
    fn spectral_identity_roundtrip(seed in any::<u64>(), d in 1usize..9) {
        let h = random_hermitian(seed, one("A", d));
        let back = spectral_fn(&h, |x| x).unwrap();
        prop_assert!(back.sub(&h).unwrap().frobenius_norm() <= 1e-12);
    }

    #[test]
    fn eig_reconstructs(seed in any::<u64>(), d in 1usize..9, scale in 0.01f64..100.0) {
        let h = random_hermitian(seed, one("A", d)).scale(scale);
        let eig = hermitian_eig(&h).unwrap();
        let err = (eig.recompose(|x| x) - h.matrix()).norm();
        prop_assert!(err <= 1e-10 * (1.0 + h.frobenius_norm()));
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn nuclear_norm_is_a_norm(seed in any::<u64>(), d in 1usize..6, t in -5.0f64..5.0) {
        let a = random_op(seed, one("A", d));
        let b = random_op(seed ^ 7, one("A", d));
        let na = nuclear_norm(&a).unwrap();
        let nb = nuclear_norm(&b).unwrap();
        prop_assert!(nuclear_norm(&a.add(&b).unwrap()).unwrap() <= na + nb + 1e-10);
        prop_assert!((nuclear_norm(&a.scale(t)).unwrap() - t.abs() * na).abs() <= 1e-10 * (1.0 + na));
    }

    #[test]
    fn psd_order_agrees_with_quadratic_forms(seed in any::<u64>(), d in 1usize..5) {
        let b = random_hermitian(seed, one("A", d));
        // a ⪰ b by construction: add a PSD Gram matrix
        let r = random_op(seed ^ 3, one("A", d));
        let a = b.add(&r.adjoint().matmul(&r).unwrap()).unwrap().hermitian_part();
        let tol = 1e-9;
        let verdict = psd_order(&a, &b, tol).unwrap();
        prop_assert!(verdict.ordering.a_dominates());
        let diff = a.sub(&b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let v = DVector::from_fn(d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let v = &v / Complex64::new(v.norm(), 0.0);
            let q = (v.adjoint() * diff.matrix() * &v)[(0, 0)].re;
            prop_assert!(q >= -tol);
        }
    }

    #[test]
    fn adjoint_pairing(seed in any::<u64>(), dx in 1usize..4, dz in 1usize..4) {
        let rho = random_density(seed, vec![Space::new("X", dx), Space::new("Z", dz)]).unwrap();
        let psi = psi_from_rho(&rho, "X").unwrap();
        let a = random_op(seed ^ 11, one("X", dx));
        let b = random_op(seed ^ 13, one("Z", dz));
        let lhs = psi.apply(&a).unwrap().inner(&b).unwrap();
        let rhs = a.inner(&adjoint(&psi).apply(&b).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn sign_attains_nuclear_norm(seed in any::<u64>(), d in 1usize..9) {
        let delta = random_hermitian(seed, one("A", d));
        let y = dual_candidate(&delta).unwrap();
        let pairing = y.inner(&delta).unwrap().re;
        prop_assert!((pairing - nuclear_norm(&delta).unwrap()).abs() <= 1e-10);
        prop_assert!(operator_norm(&y).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn certify_is_deterministic(seed in any::<u64>()) {
        let rho = random_density(seed, vec![Space::new("X", 2), Space::new("Z", 2)]).unwrap();
        let sigma = random_density(seed ^ 5, vec![Space::new("Z", 2), Space::new("Y", 2)]).unwrap();
        let inst = ProblemInstance::new(rho, sigma).unwrap();
        let x = random_channel(seed, 2, 2).unwrap();
        let a = certify(&inst, &x).unwrap();
        let b = certify(&inst, &x).unwrap();
        let bits = |r: &choicert::certificate::CertificateReport| {
            r.h.matrix().iter().chain(r.lift.matrix().iter())
                .map(|v| (v.re.to_bits(), v.im.to_bits()))
                .collect::<Vec<_>>()
        };
        prop_assert_eq!(bits(&a), bits(&b));
        prop_assert_eq!(a, b);
    }
}

#[test]
fn random_channels_always_validate() {
    for seed in 0..1000 {
        let j = random_channel_between(seed, &Space::new("X", 2), &Space::new("Y", 3)).unwrap();
        choi_validate(j.op(), "Y", "X").unwrap();
    }
}

#[test]
fn labeled_operator_json_roundtrip_is_exact() {
    let op = random_op(42, vec![Space::new("Z", 2), Space::new("Y", 3)]);
    let text = serde_json::to_string(&op).unwrap();
    let back: LabeledOperator = serde_json::from_str(&text).unwrap();
    assert_eq!(back, op);
}
