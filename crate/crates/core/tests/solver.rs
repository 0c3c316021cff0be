use choicert::certificate::{certify, dual_candidate, ProblemInstance};
use choicert::linalg::{hermitian_eig, partial_trace, CMatrix, LabeledOperator, Space};
use choicert::paperbench::maximally_entangled;
use choicert::solver::{
    dual_bound, first_order, l1_fast_path, project_choi, solve, DykstraOptions, Method,
    MethodChoice, SolverOptions,
};
use choicert::superop::{
    choi_validate_with_tol, random_channel, random_channel_between, random_density,
};
use choicert::symmetry::{build_group, symmetrize};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn zy(diag: &[f64]) -> LabeledOperator {
    LabeledOperator::from_real_diagonal(vec![Space::new("Z", 2), Space::new("Y", 2)], diag).unwrap()
}

fn random_diag_sigma(rng: &mut ChaCha8Rng) -> LabeledOperator {
    let u: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
    let s: f64 = u.iter().sum();
    zy(&u.iter().map(|v| v / s).collect::<Vec<_>>())
}

fn assert_feasible(x: &LabeledOperator) {
    let min = hermitian_eig(&x.hermitian_part()).unwrap().min();
    let marginal = partial_trace(x, "Y").unwrap();
    let d = marginal.dim();
    let tp = (marginal.matrix() - CMatrix::identity(d, d)).norm();
    assert!(min >= -1e-8 && tp <= 1e-8, "min {min}, tp {tp}");
}

#[test]
fn solve_matches_fast_path_and_is_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let inst =
            ProblemInstance::new(maximally_entangled(2).unwrap(), random_diag_sigma(&mut rng))
                .unwrap();
        let auto = solve(&inst, &SolverOptions::default()).unwrap();
        assert_eq!(auto.method, Method::L1FastPath);
        let fast = l1_fast_path(&inst).unwrap();
        assert!((auto.primal_value - fast.value).abs() <= 1e-6);
        assert_feasible(auto.x_opt.op());
        assert!(auto.gap.abs() <= 1e-12, "fast-path certificate is tight");
    }
}

#[test]
fn first_order_on_general_instances() {
    for k in 0..2u64 {
        let rho = random_density(100 + k, vec![Space::new("X", 2), Space::new("Z", 2)]).unwrap();
        let sigma = random_density(200 + k, vec![Space::new("Z", 2), Space::new("Y", 2)]).unwrap();
        let inst = ProblemInstance::new(rho, sigma).unwrap();
        let r = solve(&inst, &SolverOptions::default()).unwrap();
        assert_eq!(r.method, Method::FirstOrder);
        assert!(r.converged, "{r:?}");
        assert!(r.dual_bound <= r.primal_value + 1e-9);
        assert_feasible(r.x_opt.op());
    }
}

#[test]
fn weak_duality_against_random_channels() {
    let cases = [
        (
            maximally_entangled(2).unwrap(),
            zy(&[0.55, 0.15, 0.20, 0.10]),
        ),
        (
            random_density(7, vec![Space::new("X", 2), Space::new("Z", 2)]).unwrap(),
            random_density(8, vec![Space::new("Z", 2), Space::new("Y", 2)]).unwrap(),
        ),
    ];
    for (rho, sigma) in cases {
        let inst = ProblemInstance::new(rho, sigma).unwrap();
        let x0 = LabeledOperator::identity(inst.choi_labels())
            .unwrap()
            .scale(0.5);
        let delta = inst.sigma().sub(&inst.forward(&x0).unwrap()).unwrap();
        let candidates = [
            dual_candidate(&delta.hermitian_part()).unwrap(),
            LabeledOperator::identity(inst.sigma().labels().to_vec()).unwrap(),
            LabeledOperator::identity(inst.sigma().labels().to_vec())
                .unwrap()
                .scale(-1.0),
        ];
        let bounds: Vec<f64> = candidates
            .iter()
            .map(|y| dual_bound(&inst, y).unwrap())
            .collect();
        let best = bounds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for seed in 0..1000 {
            let j = random_channel(seed, 2, 2).unwrap();
            assert!(best <= inst.objective(j.op()).unwrap() + 1e-9);
        }
    }
}

#[test]
fn dual_bound_rejects_infeasible_y() {
    let inst = ProblemInstance::new(maximally_entangled(2).unwrap(), zy(&[0.25; 4])).unwrap();
    let y = zy(&[2.0, 0.0, 0.0, 0.0]);
    assert!(dual_bound(&inst, &y).is_err());
}

#[test]
fn symmetrization_never_increases_objective() {
    let g = build_group(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..100 {
        let inst =
            ProblemInstance::new(maximally_entangled(2).unwrap(), random_diag_sigma(&mut rng))
                .unwrap();
        let x = random_channel(seed, 2, 2).unwrap().into_op();
        let xg = symmetrize(&x, &g).unwrap();
        assert!(inst.objective(&xg).unwrap() <= inst.objective(&x).unwrap() + 1e-10);
        let again = symmetrize(&xg, &g).unwrap();
        assert!(again.sub(&xg).unwrap().frobenius_norm() <= 1e-13);
    }
}

#[test]
fn project_choi_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let m = CMatrix::from_fn(4, 4, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let x = LabeledOperator::new(vec![Space::new("X", 2), Space::new("Y", 2)], m)
            .unwrap()
            .hermitian_part();
        let p = project_choi(&x, "Y", "X", DykstraOptions::default()).unwrap();
        let pp = project_choi(p.op(), "Y", "X", DykstraOptions::default()).unwrap();
        assert!(pp.op().sub(p.op()).unwrap().frobenius_norm() <= 1e-9);
        assert_feasible(p.op());
    }
}

/// When the conditions hold at a solver output, restarts find nothing better.
#[test]
fn satisfied_certificate_is_not_beaten() {
    let rho = maximally_entangled(2).unwrap();
    let identity = choi_validate_with_tol(
        &LabeledOperator::from_real_diagonal(
            vec![Space::new("X", 2), Space::new("Y", 2)],
            &[1.0, 0.0, 0.0, 1.0],
        )
        .unwrap()
        .map_matrix(|m| {
            let mut out = m.clone();
            out[(0, 3)] = Complex64::new(1.0, 0.0);
            out[(3, 0)] = Complex64::new(1.0, 0.0);
            out
        }),
        "Y",
        "X",
        1e-12,
    )
    .unwrap();
    let exact_fit = identity.op().relabel("X", "Z").unwrap().scale(0.5);
    for sigma in [zy(&[0.1, 0.1, 0.4, 0.4]), exact_fit] {
        let inst = ProblemInstance::new(rho.clone(), sigma).unwrap();
        let sol = solve(&inst, &SolverOptions::default()).unwrap();
        let report = certify(&inst, &sol.x_opt).unwrap();
        if !report.satisfied {
            continue;
        }
        let opts = SolverOptions {
            method: MethodChoice::FirstOrder,
            restarts: 50,
            seed: 9,
            ..SolverOptions::default()
        };
        let fo = first_order(&inst, &opts).unwrap();
        assert!(fo.primal_value >= sol.primal_value - 1e-6);
        for seed in 0..50 {
            let j = random_channel_between(seed, &Space::new("X", 2), &Space::new("Y", 2)).unwrap();
            assert!(inst.objective(j.op()).unwrap() >= sol.primal_value - 1e-6);
        }
    }
}

#[test]
fn forced_non_convergence_reports_best_iterate() {
    let rho = random_density(100, vec![Space::new("X", 2), Space::new("Z", 2)]).unwrap();
    let sigma = random_density(201, vec![Space::new("Z", 2), Space::new("Y", 2)]).unwrap();
    let inst = ProblemInstance::new(rho, sigma).unwrap();
    let opts = SolverOptions {
        max_iters: 1,
        ..SolverOptions::default()
    };
    let r = solve(&inst, &opts).unwrap();
    assert!(!r.converged);
    assert_feasible(r.x_opt.op());
    assert!(solve(
        &inst,
        &SolverOptions {
            eps: 0.0,
            ..SolverOptions::default()
        }
    )
    .is_err());
}
