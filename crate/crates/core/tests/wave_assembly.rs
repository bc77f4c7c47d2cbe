mod common;

use common::{march_wave, max_abs_diff};
use wellprobe::discretization::{assemble_wave_wellposed, sine_velocity, zero_displacement, GridSpec};
use wellprobe::linalg::{min_norm_solve, DenseSvd};

#[test]
fn well_posed_system_matches_marching() {
    for (nx, nt) in [(10, 20), (16, 30)] {
        let g = GridSpec::unit_courant(nx, nt).unwrap();
        let s = assemble_wave_wellposed(&g, zero_displacement, sine_velocity(1.0)).unwrap();
        let svd = DenseSvd::of_system(&s).unwrap();
        assert_eq!(svd.null_space_dimension(), 0);
        let sol = min_norm_solve(&s).unwrap();
        assert!(max_abs_diff(&sol.values, &march_wave(&g, zero_displacement, sine_velocity(1.0))) < 1e-10);
    }
}

#[test]
fn sub_unit_courant_also_matches_marching() {
    let g = GridSpec::new(12, 30, 0.0, 1.0, 1.5, 1.0).unwrap();
    assert!(g.courant() < 1.0);
    let u0 = |x: f64| (std::f64::consts::PI * x).sin();
    let s = assemble_wave_wellposed(&g, u0, sine_velocity(1.0)).unwrap();
    let sol = min_norm_solve(&s).unwrap();
    assert!(max_abs_diff(&sol.values, &march_wave(&g, u0, sine_velocity(1.0))) < 1e-10);
}

#[test]
fn scheme_converges_to_standing_wave() {
    // u = sin(2 pi x) sin(2 pi t) / (2 pi)
    let exact = |x: f64, t: f64| (2.0 * std::f64::consts::PI * x).sin() * (2.0 * std::f64::consts::PI * t).sin() / (2.0 * std::f64::consts::PI);
    let mut errs = Vec::new();
    for nx in [11, 21, 41] {
        let g = GridSpec::new(nx, nx, 0.0, 1.0, 1.0, 1.0).unwrap();
        let u = march_wave(&g, zero_displacement, sine_velocity(1.0));
        let err = (0..g.n_nodes())
            .map(|k| {
                let n = g.node(k);
                (u[k] - exact(g.x_coord(n.space), g.t_coord(n.time))).abs()
            })
            .fold(0.0, f64::max);
        errs.push(err);
    }
    assert!(errs[1] < errs[0] / 3.0 && errs[2] < errs[1] / 3.0, "{errs:?}");
}
