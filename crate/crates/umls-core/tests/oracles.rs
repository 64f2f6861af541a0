//! Checks of the library against independent slow oracles: hand-rolled
//! complex arithmetic, finite differences, Jacobi rotations, and
//! characteristic-polynomial root finding.

mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use umls_core::analysis::{
    eta_max, lagrange_multipliers, optimal_step, reduced_hessian, rho_m_eta, spectral_radius,
    tangent_basis, StationaryAnalysis,
};
use umls_core::instances::{example_2d, generate_synthetic, initial_point_near, StationaryKind};
use umls_core::problem::{
    gradient, membership, objective, realify_problem, spectral_norm, ComplexProblem, RealProblem,
    UnitModulusPoint,
};
use umls_core::projection::{project, tangent_linearization};
use umls_core::solvers::{generalized_gradient, pgd_step};

fn unit_point(x: DVector<f64>) -> UnitModulusPoint {
    UnitModulusPoint::new(x).unwrap()
}

#[test]
fn realified_objective_matches_complex_arithmetic() {
    let mut r = rng(101);
    for _ in 0..50 {
        let m = 1 + r.random_range(0..5usize);
        let n = 1 + r.random_range(0..4usize);
        let phi_re = random_matrix(&mut r, m, n, 1.0);
        let phi_im = random_matrix(&mut r, m, n, 1.0);
        let h_re = random_vector(&mut r, m, 1.0);
        let h_im = random_vector(&mut r, m, 1.0);
        let w_re = random_vector(&mut r, n, 1.0);
        let w_im = random_vector(&mut r, n, 1.0);

        // ‖Phi w − h‖² with hand-rolled complex arithmetic
        let (pw_re, pw_im) = complex_matvec(&phi_re, &phi_im, &w_re, &w_im);
        let mut complex_sq = 0.0;
        for i in 0..m {
            let dr = pw_re[i] - h_re[i];
            let di = pw_im[i] - h_im[i];
            complex_sq += dr * dr + di * di;
        }

        // ‖A x − b‖² in the real parametrization
        let cp = ComplexProblem::new(phi_re, phi_im, h_re, h_im).unwrap();
        let p = realify_problem(&cp);
        let mut x = DVector::<f64>::zeros(2 * n);
        for j in 0..n {
            x[2 * j] = w_re[j];
            x[2 * j + 1] = w_im[j];
        }
        let real_sq = 2.0 * objective(&p, &x).value();

        assert!(
            (complex_sq - real_sq).abs() <= 1e-12 * complex_sq.max(1.0),
            "complex {complex_sq} vs real {real_sq}"
        );
    }
}

#[test]
fn gradient_matches_central_finite_differences() {
    let mut r = rng(202);
    for _ in 0..20 {
        let m = 2 + r.random_range(0..4usize);
        let n = 1 + r.random_range(0..3usize);
        let a = random_matrix(&mut r, 2 * m, 2 * n, 1.0);
        let b = random_vector(&mut r, 2 * m, 1.0);
        let p = RealProblem::new(a, b).unwrap();
        let x = random_vector(&mut r, 2 * n, 1.0);
        let g = gradient(&p, &x);

        let h = 1e-6;
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (objective(&p, &xp).value() - objective(&p, &xm).value()) / (2.0 * h);
            assert!(
                (g[i] - fd).abs() <= 1e-6,
                "component {i}: analytic {} vs finite difference {fd}",
                g[i]
            );
        }
    }
}

#[test]
fn spectral_norm_matches_jacobi_oracle() {
    let mut r = rng(303);
    for _ in 0..40 {
        let a = random_matrix(&mut r, 6, 4, 1.5);
        let fast = spectral_norm(&a).unwrap();
        let gram = a.transpose() * &a;
        let lambda_max = jacobi_eigenvalues(&gram)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let slow = lambda_max.max(0.0).sqrt();
        assert!(
            (fast - slow).abs() <= 1e-8 * slow.max(1.0),
            "power iteration {fast} vs Jacobi {slow}"
        );
    }
}

#[test]
fn tangent_linearization_matches_explicit_projector() {
    let mut r = rng(404);
    for _ in 0..200 {
        let n = 1 + r.random_range(0..5usize);
        let x = unit_point(random_unit_modulus(&mut r, n));
        let delta = random_vector(&mut r, 2 * n, 2.0);
        let fast = tangent_linearization(&x, &delta);
        let z = tangent_basis(&x);
        let slow = &z * (z.transpose() * &delta);
        assert!(
            (fast - slow).norm() <= 1e-14,
            "pairwise and matrix tangent projections disagree"
        );
    }
}

#[test]
fn spectral_radius_matches_char_poly_roots() {
    let mut r = rng(505);
    for _ in 0..60 {
        let m = random_matrix(&mut r, 5, 5, 1.0);
        let fast = spectral_radius(&m).unwrap();
        let slow = spectral_radius_oracle(&m);
        assert!(
            (fast - slow).abs() <= 1e-8 * slow.max(1.0),
            "Schur {fast} vs characteristic-polynomial {slow}"
        );
    }
}

#[test]
fn reduced_hessian_matches_second_differences_along_manifold_curves() {
    let mut r = rng(606);
    for _ in 0..25 {
        let m = 2 + r.random_range(0..3usize);
        let n = 1 + r.random_range(0..3usize);
        let a = random_matrix(&mut r, 2 * m, 2 * n, 1.0);
        let b = random_vector(&mut r, 2 * m, 1.0);
        let p = RealProblem::new(a, b).unwrap();
        let x = unit_point(random_unit_modulus(&mut r, n));
        let (gamma, _) = lagrange_multipliers(&p, &x);
        let h = reduced_hessian(&p, &x, &gamma);
        let z = tangent_basis(&x);

        let u = {
            let mut u = random_vector(&mut r, n, 1.0);
            let norm = u.norm();
            if norm > 0.0 {
                u /= norm;
            } else {
                u[0] = 1.0;
            }
            u
        };
        let quad = (u.transpose() * &h * &u)[(0, 0)];

        let step = 1e-4;
        let phi = |t: f64| {
            let curve = project(&(x.as_vector() + t * (&z * &u)));
            objective(&p, curve.as_vector()).value()
        };
        let fd = (phi(step) - 2.0 * phi(0.0) + phi(-step)) / (step * step);
        assert!(
            (quad - fd).abs() <= 1e-4 * quad.abs().max(1.0),
            "uᵀHu {quad} vs curve second difference {fd}"
        );
    }
}

#[test]
fn generalized_gradient_approaches_riemannian_gradient() {
    let mut r = rng(707);
    for _ in 0..20 {
        let m = 2 + r.random_range(0..3usize);
        let n = 1 + r.random_range(0..3usize);
        let a = random_matrix(&mut r, 2 * m, 2 * n, 0.6);
        let b = random_vector(&mut r, 2 * m, 0.6);
        let p = RealProblem::new(a, b).unwrap();
        let x = unit_point(random_unit_modulus(&mut r, n));
        let z = tangent_basis(&x);
        let riemannian = (&z * (z.transpose() * gradient(&p, x.as_vector()))).norm();
        if riemannian < 1e-3 {
            continue; // relative comparison is meaningless near a stationary point
        }
        let coarse = generalized_gradient(&p, &x, 1e-3).norm();
        let fine = generalized_gradient(&p, &x, 1e-6).norm();
        assert!(
            (coarse - riemannian).abs() <= 1e-2 * riemannian,
            "eta=1e-3: {coarse} vs Riemannian {riemannian}"
        );
        assert!(
            (fine - riemannian).abs() <= 1e-2 * riemannian,
            "eta=1e-6: {fine} vs Riemannian {riemannian}"
        );
    }
}

#[test]
fn pgd_step_contraction_matches_scalar_rate_at_2d_minimum() {
    let inst = example_2d();
    let eta = 0.0755;
    for s in &inst.stationary_points {
        if s.kind != StationaryKind::Minimum {
            continue;
        }
        let rho_formula = (1.0 - eta * s.h / (1.0 - eta * s.gamma)).abs();
        assert!(rho_formula > 0.0 && rho_formula < 1.0);

        // Perturb along the tangent direction and take one step.
        let eps = 1e-6;
        let v = DVector::from_column_slice(&[-s.x.as_vector()[1], s.x.as_vector()[0]]);
        let x = project(&(s.x.as_vector() + eps * v));
        let before = (x.as_vector() - s.x.as_vector()).norm();
        let after = (pgd_step(&inst.problem, &x, eta).as_vector() - s.x.as_vector()).norm();
        let ratio = after / before;
        assert!(ratio < 1.0, "step must move toward the minimum");
        assert!(
            (ratio - rho_formula).abs() <= 1e-3,
            "one-step ratio {ratio} vs scalar rate {rho_formula}"
        );
    }
}

#[test]
fn planted_multipliers_are_recovered() {
    let inst = generate_synthetic(12, 8, 2024, 0.1, 100).unwrap();
    let (gamma, residual) = lagrange_multipliers(&inst.problem, &inst.x_star);
    assert!(residual <= 1e-10, "stationarity residual {residual}");
    for i in 0..8 {
        assert!(
            (gamma[i] - inst.gamma_planted[i]).abs() <= 1e-10,
            "gamma[{i}]: {} vs planted {}",
            gamma[i],
            inst.gamma_planted[i]
        );
    }
}

#[test]
fn eta_max_bisection_is_self_consistent_on_synthetic_instance() {
    let inst = generate_synthetic(10, 6, 31, 0.1, 100).unwrap();
    let sa = StationaryAnalysis::at(&inst.problem, &inst.x_star);
    let em = eta_max(&sa.h, &sa.gamma).unwrap();
    assert!(em.is_finite() && em > 0.0);
    let below = rho_m_eta(&sa.h, &sa.gamma, em - 1e-6).unwrap();
    let above = rho_m_eta(&sa.h, &sa.gamma, em + 1e-3).unwrap();
    assert!(below < 1.0, "rho just below eta_max is {below}");
    assert!(above > 1.0, "rho just above eta_max is {above}");
}

#[test]
fn rate_report_flags_flip_beyond_eta_max() {
    let inst = generate_synthetic(10, 6, 31, 0.1, 100).unwrap();
    let sa = StationaryAnalysis::at(&inst.problem, &inst.x_star);
    let em = eta_max(&sa.h, &sa.gamma).unwrap();

    let below = umls_core::analysis::rate_report(&inst.problem, &inst.x_star, 0.95 * em).unwrap();
    assert!(below.c1_ok && below.c2_ok && below.c3_ok);

    let above = umls_core::analysis::rate_report(&inst.problem, &inst.x_star, 1.05 * em).unwrap();
    assert!(above.c1_ok && above.c2_ok);
    assert!(!above.c3_ok, "rho should be at least 1 beyond eta_max");
    assert!(above.c0.is_none() && above.c1_radius.is_none());
}

#[test]
fn rate_report_all_flags_hold_at_2d_minima_at_default_step() {
    let inst = example_2d();
    let eta = 0.0755;
    for s in &inst.stationary_points {
        if s.kind != StationaryKind::Minimum {
            continue;
        }
        let report = umls_core::analysis::rate_report(&inst.problem, &s.x, eta).unwrap();
        assert!(report.c1_ok && report.c2_ok && report.c3_ok);
        assert!(report.c3prime_ok && report.fixed_point_ok);
        assert!(report.c0.unwrap() > 0.0 && report.c0.unwrap() < 2.0);
    }
}

#[test]
fn optimal_step_beats_a_dense_grid_on_synthetic_instance() {
    let inst = generate_synthetic(10, 6, 31, 0.1, 100).unwrap();
    let sa = StationaryAnalysis::at(&inst.problem, &inst.x_star);
    let (eta_star, rho_star) = optimal_step(&sa.h, &sa.gamma).unwrap();
    let em = eta_max(&sa.h, &sa.gamma).unwrap();
    assert!(eta_star > 0.0 && eta_star < em);
    for j in 1..=500 {
        let eta = em * j as f64 / 501.0;
        let rho = rho_m_eta(&sa.h, &sa.gamma, eta).unwrap();
        assert!(
            rho_star <= rho + 1e-12,
            "grid point eta={eta} has rho {rho} below rho* {rho_star}"
        );
    }
}

#[test]
fn initial_point_noise_respects_six_sigma_envelope() {
    let inst = generate_synthetic(8, 5, 77, 0.1, 100).unwrap();
    let sigma = 1e-3;
    let envelope = 6.0 * sigma * (2.0 * 5.0f64).sqrt();
    for seed in 0..100u64 {
        let x0 = initial_point_near(&inst.x_star, sigma, seed);
        assert!(membership(x0.as_vector(), 1e-12));
        let d = (x0.as_vector() - inst.x_star.as_vector()).norm();
        assert!(d <= envelope, "seed {seed}: distance {d} over {envelope}");
    }
}

#[test]
fn synthetic_objective_at_x_star_is_half_norm_v_squared() {
    let inst = generate_synthetic(9, 4, 13, 0.1, 100).unwrap();
    // b = A x* − v, so v = A x* − b and f(x*) = ½‖v‖².
    let v = inst.problem.a() * inst.x_star.as_vector() - inst.problem.b();
    let f = objective(&inst.problem, inst.x_star.as_vector()).value();
    assert!((f - 0.5 * v.norm_squared()).abs() <= 1e-14 * f.max(1.0));
}

#[test]
fn eta_max_matches_scalar_formula_at_2d_minima() {
    let inst = example_2d();
    for s in inst.minima() {
        let h = DMatrix::from_row_slice(1, 1, &[s.h]);
        let gamma = DVector::from_column_slice(&[s.gamma]);
        let bisected = eta_max(&h, &gamma).unwrap();
        let formula = 2.0 / (s.h + 2.0 * s.gamma);
        assert!(
            (bisected - formula).abs() <= 1e-6,
            "bisection {bisected} vs closed form {formula}"
        );
    }
}
