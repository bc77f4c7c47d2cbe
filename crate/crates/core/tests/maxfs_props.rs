use proptest::prelude::*;
use wellprobe::linalg::{RowTag, SparseRow, TagKind, TaggedSystem};
use wellprobe::maxfs::{
    exhaustive_drop_search, kaczmarz_step, run_kaczmarz, two_line_fixture, DropSearchConfig, Droppable,
    KaczmarzConfig, KaczmarzVariant,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_satisfies_its_row(
        coeffs in prop::collection::vec(-5.0f64..5.0, 4),
        x in prop::collection::vec(-10.0f64..10.0, 4),
        b in -10.0f64..10.0,
    ) {
        prop_assume!(coeffs.iter().map(|c| c * c).sum::<f64>() > 1e-3);
        let entries: Vec<(usize, f64)> = coeffs.iter().copied().enumerate().filter(|(_, c)| *c != 0.0).collect();
        let mut s = TaggedSystem::new(4);
        s.push(SparseRow::new(entries, b).unwrap(), RowTag::new(TagKind::DataConstraint, None)).unwrap();
        let y = kaczmarz_step(&s, &x, 0).unwrap();
        prop_assert!(s.row(0).defect(&y).abs() <= 1e-10 * (1.0 + b.abs() + x.iter().map(|v| v.abs()).sum::<f64>()));
        // idempotent
        let z = kaczmarz_step(&s, &y, 0).unwrap();
        for (a, c) in y.iter().zip(&z) {
            prop_assert!((a - c).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}

#[test]
fn reported_candidates_reverify_from_scratch() {
    let f = two_line_fixture();
    let cfg = DropSearchConfig { k: 2, droppable: Droppable::Constraints, ..Default::default() };
    let rep = exhaustive_drop_search(&f.system, &cfg).unwrap();
    for c in &rep.candidates {
        let kept = f.system.filter_rows(|i, _| !c.dropped.contains(&i));
        assert!(kept.residual_norm(&c.solution.values).unwrap() <= rep.tol);
    }
    // five minority rows cannot be removed with only two drops
    assert!(rep.candidates.is_empty());
}

#[test]
fn subspace_constrained_runs_find_both_lines() {
    let f = two_line_fixture();
    let refs = [f.line1.clone(), f.line2.clone()];
    let mut hits = [0usize; 2];
    for seed in 0..30 {
        let cfg = KaczmarzConfig {
            variant: KaczmarzVariant::QuantileSubspaceConstrained,
            q: 0.3,
            max_iters: 3000,
            trace_every: 50,
            seed,
            ..Default::default()
        };
        let run = run_kaczmarz(&f.system, &cfg, &refs).unwrap();
        assert!(run.trace.iter().all(|t| t.law_residual_max <= 1e-10));
        let last = run.trace.last().unwrap();
        for (hit, d) in hits.iter_mut().zip(&last.distances) {
            if *d < 1e-6 {
                *hit += 1;
            }
        }
    }
    assert!(hits[0] > 0 && hits[1] > 0, "{hits:?}");
}

#[test]
fn default_quantile_recovers_majority_line() {
    let f = two_line_fixture();
    let cfg = KaczmarzConfig { variant: KaczmarzVariant::QuantileSubspaceConstrained, q: 0.6, max_iters: 3000, seed: 11, ..Default::default() };
    let run = run_kaczmarz(&f.system, &cfg, std::slice::from_ref(&f.line1)).unwrap();
    let x = &run.solution.values;
    let satisfied = (0..f.system.n_rows())
        .filter(|&i| !f.system.tag(i).kind.is_law() && f.system.row(i).defect(x).abs() <= 1e-8)
        .count();
    assert!(satisfied >= 10);
    assert!(run.solution.converged());
}
