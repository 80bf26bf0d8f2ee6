use cubicmin::classify::{classify_float, FloatTolerances};
use cubicmin::local_min::{has_second_order_point, SearchOptions};
use cubicmin::reductions::*;
use nalgebra::DMatrix;
use rayon::prelude::*;

#[test]
fn every_small_graph_and_target() {
    for n in 1..=5 {
        let graphs = all_graphs(n).unwrap();
        let max_k = n * (n - 1) / 2;
        let failures: Vec<String> = graphs
            .par_iter()
            .flat_map_iter(|edges| (0..=max_k).map(move |k| (edges, k)))
            .filter_map(|(edges, k)| {
                let inst = MaxCutInstance::new(n, edges, k).unwrap();
                let r = verify_maxcut_reduction(&inst).unwrap();
                let bound = (max_k + k) as f64;
                let ok = r.consistent()
                    && (r.solutions > 0) == !brute_force_cuts(&inst).unwrap().is_empty()
                    && r.max_abs_coefficient <= bound.max(1.0);
                (!ok).then(|| format!("n={n} edges={edges:?} k={k}: {r:?}"))
            })
            .collect();
        assert!(failures.is_empty(), "{}", failures.join("\n"));
    }
}

#[test]
fn coefficients_are_half_integers() {
    let inst = MaxCutInstance::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (0, 2)], 4).unwrap();
    let sys = maxcut_to_system(&inst);
    let quartic = system_to_quartic(&sys).unwrap();
    for c in sys.polys().iter().flat_map(|q| q.terms().values()).chain(quartic.terms().values()) {
        assert_eq!((2.0 * c).fract(), 0.0, "{c}");
    }
}

fn pencil(mats: &[&[f64]], m: usize) -> SpectrahedronDescription {
    SpectrahedronDescription::new(mats.iter().map(|v| DMatrix::from_row_slice(m, m, v)).collect()).unwrap()
}

#[test]
fn scalar_pencil_projection() {
    let p = spectrahedron_to_cubic(&pencil(&[&[0.0], &[1.0]], 1)).unwrap();
    let tol = FloatTolerances::default();
    for x in [-1.0, -0.1, 0.0, 0.5, 3.0] {
        let r = classify_float(&p, &[x, 0.0], &tol).unwrap();
        assert_eq!(r.is_second_order, x >= 0.0, "x={x}");
        assert_eq!(r.is_local_min, x > 0.0, "x={x}");
    }
    assert!(!classify_float(&p, &[1.0, 0.5], &tol).unwrap().is_second_order);
}

#[test]
fn disk_projection_sampled() {
    let disk = disk_pencil();
    let p = spectrahedron_to_cubic(&disk).unwrap();
    let tol = FloatTolerances::default();
    for i in -6..=6 {
        for j in -6..=6 {
            let x = [i as f64 * 0.23, j as f64 * 0.19];
            let r2 = x[0] * x[0] + x[1] * x[1];
            let rep = classify_float(&p, &[x[0], x[1], 0.0, 0.0], &tol).unwrap();
            assert_eq!(rep.is_second_order, disk.contains(&x, 1e-12).unwrap(), "{x:?}");
            assert_eq!(rep.is_local_min, r2 < 1.0, "{x:?}");
        }
    }
}

#[test]
fn pencil_feasibility_through_second_order_points() {
    let opts = SearchOptions::default();
    let feasible = sdpf_to_cubic(&pencil(&[&[0.0], &[1.0]], 1)).unwrap();
    assert!(has_second_order_point(&feasible, &opts).unwrap().exists);
    let infeasible = sdpf_to_cubic(&pencil(&[&[-1.0]], 1)).unwrap();
    assert!(!has_second_order_point(&infeasible, &opts).unwrap().exists);
}

#[test]
fn irrational_pencil_witness() {
    let p = sdpf_to_cubic(&irrational_pencil()).unwrap();
    let c = has_second_order_point(&p, &SearchOptions::default()).unwrap();
    assert!(c.exists);
    let w = c.witness.unwrap();
    assert!((w[0] - 2f64.sqrt()).abs() < 1e-4, "{w:?}");
}
