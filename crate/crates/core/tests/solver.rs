mod common;

use bisr::diagnostics::{objective_value, optimality_report};
use bisr::solver::{solve, solve_fbs, solve_mm};
use bisr::{Algorithm, BisrError, BivariatePenalty, ConvolutionFilter, Objective, PenaltyFamily, SolverConfig};
use common::{certified_objective, inf_dist, is_non_increasing, random_instance};
use rand::Rng;

fn tight() -> SolverConfig {
    SolverConfig { stop_rel_tol: 1e-10, max_iter: 200_000, ..SolverConfig::default() }
}

#[test]
fn theta_matches_pairwise_sum() {
    let mut r = common::rng(1);
    let h = ConvolutionFilter::new(vec![1.0, 0.3]).unwrap();
    let pen = BivariatePenalty::from_params(PenaltyFamily::Log, 0.6, 0.2).unwrap();
    for _ in 0..50 {
        let x: Vec<f64> = (0..3).map(|_| r.random_range(-5.0..5.0)).collect();
        let obj = Objective::new_unchecked(h.clone(), vec![0.0; 4], 1.0, pen).unwrap();
        let s = |a: f64, b: f64| pen.value([a, b]);
        let want = 0.5 * (s(0.0, x[0]) + s(x[0], x[1]) + s(x[1], x[2]) + s(x[2], 0.0));
        assert!((obj.theta_value(&x).unwrap() - want).abs() < 1e-14);
    }
}

#[test]
fn theta_gradient_matches_finite_differences() {
    let mut r = common::rng(2);
    for fam in PenaltyFamily::ALL {
        for _ in 0..20 {
            let h = common::random_filter(&mut r);
            let n = 10;
            let pen = BivariatePenalty::from_params(fam, r.random_range(0.0..2.0), r.random_range(0.0..2.0)).unwrap();
            let obj = Objective::new_unchecked(h.clone(), vec![0.0; n + h.len() - 1], 1.0, pen).unwrap();
            let x: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
            let g = obj.theta_grad(&x).unwrap();
            for i in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += 1e-6;
                xm[i] -= 1e-6;
                let fd = (obj.theta_value(&xp).unwrap() - obj.theta_value(&xm).unwrap()) / 2e-6;
                assert!((fd - g[i]).abs() <= 1e-5, "{fam} i={i}: {fd} vs {}", g[i]);
            }
        }
    }
}

#[test]
fn theta_rejects_wrong_length() {
    let h = ConvolutionFilter::new(vec![1.0]).unwrap();
    let obj = Objective::new_unchecked(h, vec![1.0; 5], 1.0, BivariatePenalty::from_params(PenaltyFamily::Atan, 0.2, 0.1).unwrap()).unwrap();
    assert!(matches!(obj.theta_value(&[0.0; 4]), Err(BisrError::Domain(_))));
    assert!(matches!(obj.theta_grad(&[0.0; 6]), Err(BisrError::Domain(_))));
}

#[test]
fn l1_case_matches_lasso_oracle() {
    let mut r = common::rng(3);
    for _ in 0..5 {
        let inst = random_instance(&mut r, 40, 5, 2.0);
        let obj = certified_objective(&inst, PenaltyFamily::Atan, 0.0);
        let oracle = common::lasso_oracle(&inst.h, &inst.y, inst.lambda, 40, 100_000);
        for alg in [Algorithm::Fbs, Algorithm::Mm] {
            let res = solve(&obj, &tight().with_algorithm(alg)).unwrap();
            assert!(inf_dist(&res.x_hat, &oracle) <= 1e-6, "{alg:?}: {}", inf_dist(&res.x_hat, &oracle));
        }
    }
}

#[test]
fn mm_needs_one_outer_step_without_penalty_curvature() {
    let mut r = common::rng(4);
    let inst = random_instance(&mut r, 30, 4, 1.0);
    let obj = certified_objective(&inst, PenaltyFamily::Rational, 0.0);
    let cfg = SolverConfig { inner_iter: 200_000, ..tight() };
    let mm = solve_mm(&obj, &cfg.with_algorithm(Algorithm::Mm)).unwrap();
    // second outer step only confirms the fixed point
    assert!(mm.iterations <= 2, "{}", mm.iterations);
    let fbs = solve_fbs(&obj, &tight()).unwrap();
    assert!(inf_dist(&mm.x_hat, &fbs.x_hat) <= 1e-5);
}

#[test]
fn algorithms_agree_and_decrease() {
    let mut r = common::rng(5);
    for (i, fam) in PenaltyFamily::ALL.iter().cycle().take(12).enumerate() {
        let inst = random_instance(&mut r, 60, 6, 2.0 + i as f64 * 0.5);
        let obj = certified_objective(&inst, *fam, 1.0);
        let fbs = solve_fbs(&obj, &tight()).unwrap();
        let mm = solve_mm(&obj, &tight().with_algorithm(Algorithm::Mm)).unwrap();
        assert!(is_non_increasing(&fbs.objective_trace, 1e-10));
        assert!(is_non_increasing(&mm.objective_trace, 1e-10));
        let (f1, f2) = (fbs.final_objective(), mm.final_objective());
        assert!((f1 - f2).abs() <= 1e-6 * f1.abs(), "{f1} vs {f2}");
        assert!(fbs.optimality_max_violation <= 1e-3);
        assert!(mm.optimality_max_violation <= 1e-3);
    }
}

#[test]
fn small_strictly_convex_instance_matches_coordinate_descent() {
    let mut r = common::rng(6);
    for fam in PenaltyFamily::ALL {
        let h = ConvolutionFilter::new(vec![1.0, 0.6, -0.2]).unwrap();
        let x_true = [0.0, 3.0, 0.0, 0.0, -2.0, 0.0, 1.5, 0.0];
        let y: Vec<f64> = h.apply(&x_true).unwrap().iter().map(|v| v + r.random_range(-0.2..0.2)).collect();
        let lambda = 0.4;
        let (p, _) = bisr::convexity::auto_params(&h, lambda, 2048).unwrap();
        let pen = BivariatePenalty::from_params(fam, 0.5 * p.a1, 0.5 * p.a2).unwrap();
        let obj = Objective::new(h, y, lambda, pen).unwrap();
        let res = solve_fbs(&obj, &tight()).unwrap();
        let cd = common::coordinate_descent(&obj, 20.0, 5000);
        assert!(inf_dist(&res.x_hat, &cd) <= 1e-4, "{fam}: {:?} vs {:?}", res.x_hat, cd);
    }
}

#[test]
fn fixed_point_satisfies_optimality() {
    let mut r = common::rng(7);
    let inst = random_instance(&mut r, 50, 5, 3.0);
    let obj = certified_objective(&inst, PenaltyFamily::Atan, 1.0);
    let cfg = SolverConfig { stop_rel_tol: 1e-300, max_iter: 100_000, ..SolverConfig::default() };
    let res = solve_fbs(&obj, &cfg).unwrap();
    let n = res.objective_trace.len();
    // either an exact fixed point was reached or the iterate stalled at rounding level
    assert!(res.converged || (res.objective_trace[n - 1] - res.objective_trace[n - 2]).abs() < 1e-9);
    let rep = optimality_report(&obj, &res.x_hat, 1e-8).unwrap();
    assert!(rep.passed, "max violation {}", rep.max_violation);
}

#[test]
fn zero_observation() {
    let h = ConvolutionFilter::new(vec![0.5, 1.0, 0.5]).unwrap();
    let (obj, _) = Objective::with_auto_params(h, vec![0.0; 22], 3.0, PenaltyFamily::Log).unwrap();
    for alg in [Algorithm::Fbs, Algorithm::Mm] {
        let res = solve(&obj, &SolverConfig::default().with_algorithm(alg)).unwrap();
        assert!(res.x_hat.iter().all(|v| *v == 0.0));
        assert_eq!(res.iterations, 1);
        assert_eq!(objective_value(&obj, &res.x_hat).unwrap(), 0.0);
    }
}

#[test]
fn uncertified_construction_needs_override() {
    let h = ConvolutionFilter::new(vec![1.0, 1.0]).unwrap();
    let pen = BivariatePenalty::from_params(PenaltyFamily::Atan, 0.5, 0.5).unwrap();
    assert!(matches!(Objective::new(h.clone(), vec![1.0; 6], 1.0, pen), Err(BisrError::NotCertified(_))));
    let obj = Objective::new_unchecked(h, vec![1.0; 6], 1.0, pen).unwrap();
    assert!(!obj.is_certified());
    let rep = optimality_report(&obj, &[0.0; 5], 1e-3).unwrap();
    assert!(!rep.convexity_certified);
}
