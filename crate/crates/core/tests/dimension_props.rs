use proptest::prelude::*;
use wellprobe::dimension::{effective_dimension, patch_nodes, perimeter_scaling, PatchSpec};
use wellprobe::discretization::{GridSpec, WaveCaseStudy};
use wellprobe::ensemble::run_ensemble;
use wellprobe::linalg::SolverOptions;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn patch_membership_matches_exhaustive_scan(
        x in -3.0f64..25.0, t in -3.0f64..35.0, r in 0.05f64..12.0,
    ) {
        let g = GridSpec::unit_courant(20, 30).unwrap();
        let p = PatchSpec::new(x, t, r).unwrap();
        let scan: Vec<_> = (0..g.n_nodes()).map(|k| g.node(k)).filter(|n| p.contains(n.space as f64, n.time as f64)).collect();
        prop_assert_eq!(patch_nodes(&g, &p), scan);
    }

    #[test]
    fn dimension_ignores_global_scale(scale in 1e-8f64..1e8, seed in 0u64..1000) {
        let pts: Vec<Vec<f64>> = (0..15)
            .map(|k| {
                let a = ((k as u64 * 31 + seed) % 17) as f64;
                let b = ((k as u64 * 7 + seed) % 13) as f64;
                vec![a * scale, b * scale, (a + b) * scale, 2.0 * scale]
            })
            .collect();
        let rows: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let base: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| v / scale).collect()).collect();
        let base_rows: Vec<&[f64]> = base.iter().map(Vec::as_slice).collect();
        prop_assert_eq!(effective_dimension(&rows, 1e-3).unwrap(), effective_dimension(&base_rows, 1e-3).unwrap());
    }
}

#[test]
fn unconstrained_dimensions_grow_with_radius() {
    let g = GridSpec::unit_courant(20, 40).unwrap();
    let cs = WaveCaseStudy::without_reflector(g);
    let sys = cs.assemble(&cs.ground_truth().unwrap()).unwrap();
    let ens = run_ensemble(&sys, 80, 4, &SolverOptions::default()).unwrap();
    let fit = perimeter_scaling(&ens, &g, (10.0, 30.0), &[1.5, 2.5, 3.5, 4.5], 1e-3).unwrap();
    let dims: Vec<usize> = fit.samples.iter().map(|s| s.dimension).collect();
    assert!(dims.windows(2).all(|w| w[0] <= w[1]), "{dims:?}");
    assert!(fit.slope > 0.0);
}
