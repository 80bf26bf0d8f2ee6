mod common;

use common::*;
use cubicmin::classify::{classify_float, null_space_basis, FloatTolerances};
use cubicmin::local_min::{build_complete_sdp, epsilon_certificate, extract_triple, find_local_minimum, SearchOptions};
use cubicmin::reductions::spectrahedron_to_cubic;
use cubicmin::sdp::{solve, SolverOptions};
use proptest::prelude::*;
use rand::Rng;

fn same_span(a: &[nalgebra::DVector<f64>], b: &[nalgebra::DVector<f64>]) -> bool {
    a.len() == b.len()
        && a.iter().all(|v| {
            let proj: f64 = b.iter().map(|w| w.dot(v).powi(2)).sum();
            (1.0 - proj).abs() <= 1e-6
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complete_objective_nonnegative_on_feasible_triples(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let (p, triple) = if r.gen_bool(0.5) {
            let (p, x0) = cubic_with_second_order_point(&mut r, n);
            prop_assert!(classify_float(&p, &x0, &FloatTolerances::sdp_recovery()).unwrap().is_second_order);
            let slack = r.gen_range(0.0..1.0);
            let t = point_triple(&p, &x0, slack);
            (p, t)
        } else {
            let inst = RidgeInstance::random(&mut r, n);
            let k = r.gen_range(1..=4);
            let parts: Vec<(f64, Triple)> = (0..k)
                .map(|_| {
                    let x = inst.sample_second_order(&mut r);
                    assert!(classify_float(&inst.p, &x, &FloatTolerances::sdp_recovery()).unwrap().is_second_order);
                    (1.0 / k as f64, point_triple(&inst.p, &x, r.gen_range(0.0..0.5)))
                })
                .collect();
            (inst.p.clone(), combine(&parts))
        };
        let (big_y, y, z) = triple;
        let c = epsilon_certificate(&p, &big_y, &y, z, 1e-7).unwrap();
        prop_assert!(c.epsilon >= -1e-6, "{}", c.epsilon);
    }

    #[test]
    fn epsilon_bounds_value_against_critical_points(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=4);
        let inst = RidgeInstance::random(&mut r, n);
        let p = &inst.p;
        let sdp = build_complete_sdp(p);
        let sol = solve(&sdp.problem, &SolverOptions::default()).unwrap();
        let other = inst.feasible_triple(&mut r);
        let (big_y, y, z) = if sol.is_optimal() {
            let lam = r.gen_range(0.0..1.0);
            combine(&[(lam, extract_triple(&sdp, &sol)), (1.0 - lam, other)])
        } else {
            other
        };
        let c = epsilon_certificate(p, &big_y, &y, z, 1e-6).unwrap();
        let best = (0..10_000)
            .map(|_| p.eval(&inst.sample_critical(&mut r)).unwrap())
            .fold(f64::INFINITY, f64::min);
        let py = p.eval(&y).unwrap();
        prop_assert!(py <= best + c.bound + 1e-6, "p(y) {} best {} bound {}", py, best, c.bound);
    }

    #[test]
    fn pencil_local_minima_geometry(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (n, m) = (r.gen_range(1..=3), r.gen_range(2..=4));
        let kernel = r.gen_range(0..m);
        let pencil = random_pencil(&mut r, n, m, kernel);
        let p = spectrahedron_to_cubic(&pencil).unwrap();
        let reduced = pencil.reduced();
        let total = p.n();
        let tol = FloatTolerances::default();
        let (xa, xb) = (interior_point(&mut r, &reduced), interior_point(&mut r, &reduced));
        let (a, b) = (lift(&xa, total), lift(&xb, total));
        let lam: f64 = r.gen_range(0.0..1.0);
        let mix: Vec<f64> = a.iter().zip(&b).map(|(u, v)| lam * u + (1.0 - lam) * v).collect();
        for x in [&a, &b, &mix] {
            prop_assert!(classify_float(&p, x, &tol).unwrap().is_local_min);
        }
        let na = null_space_basis(&p.hessian(&a).unwrap(), 1e-8);
        let nb = null_space_basis(&p.hessian(&b).unwrap(), 1e-8);
        prop_assert!(same_span(&na, &nb));

        let mut values = vec![p.eval(&a).unwrap(), p.eval(&b).unwrap()];
        if let Some(xe) = boundary_point(&mut r, &reduced) {
            let e = lift(&xe, total);
            if classify_float(&p, &e, &tol).unwrap().is_second_order {
                values.push(p.eval(&e).unwrap());
            }
        }
        for v in &values {
            prop_assert!((v - values[0]).abs() <= 1e-9);
        }
    }
}

#[test]
fn recovered_minimum_of_pencil_cubic_has_the_common_value() {
    let mut r = rng(7);
    for _ in 0..5 {
        let pencil = random_pencil(&mut r, 2, 3, 1);
        let p = spectrahedron_to_cubic(&pencil).unwrap();
        let res = find_local_minimum(&p, &SearchOptions::default()).unwrap();
        let x = res.point.unwrap();
        assert!(p.eval(&x).unwrap().abs() <= 1e-6);
        let xi = lift(&interior_point(&mut r, &pencil.reduced()), p.n());
        assert!(same_span(
            &null_space_basis(&p.hessian(&x).unwrap(), 1e-5),
            &null_space_basis(&p.hessian(&xi).unwrap(), 1e-8)
        ));
    }
}
