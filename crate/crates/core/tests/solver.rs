use std::f64::consts::PI;

use mkdv_shock::oracle::{solve_mkdv, GridSpec, MkdvSolver};
use mkdv_shock::scattering::ShockParams;
use mkdv_shock::specfun::QuadratureSpec;
use mkdv_shock::Error;

fn small_grid(t_end: f64) -> GridSpec {
    let g = GridSpec { half_length: 64.0, n_points: 1024, t_end, up_step_width: 2.0, ..GridSpec::default() };
    GridSpec { dt: 0.25 * g.max_dt(), ..g }
}

#[test]
fn zero_height_stays_zero() {
    let params = ShockParams { c: 0.0, quad: QuadratureSpec::default() };
    let run = solve_mkdv(&params, small_grid(2.0), 0.5, &[0.5, 1.0, 2.0]).unwrap();
    assert_eq!(run.slices.len(), 3);
    for s in &run.slices {
        assert!(s.q.iter().all(|&v| v == 0.0), "t = {}", s.t);
    }
}

#[test]
fn invariants_conserved_on_small_grid() {
    let params = ShockParams::new(1.0).unwrap();
    let run = solve_mkdv(&params, small_grid(4.0), 0.5, &[4.0]).unwrap();
    assert!(run.blow_up.is_none());
    assert!(run.mass_drift <= 1e-8, "mass drift {:e}", run.mass_drift);
    assert!(run.l2_drift <= 1e-6, "L2 drift {:e}", run.l2_drift);
}

#[test]
fn small_mode_moves_with_linear_phase_speed() {
    let amp = 1e-3;
    let grid = small_grid(3.0);
    let k = 8.0 * PI / grid.half_length;
    let x = grid.x();
    let q0: Vec<f64> = x.iter().map(|&x| amp * (k * x).cos()).collect();
    let mut solver = MkdvSolver::from_profile(grid, amp, &q0).unwrap();
    solver.advance_to(3.0).unwrap();
    let q = solver.field();
    // q_t + q_xxx = 0 gives cos(k(x + k²t)).
    let err = x
        .iter()
        .zip(&q)
        .map(|(&x, &v)| (v - amp * (k * (x + k * k * 3.0)).cos()).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-3 * amp, "max error {err:e}");
}

#[test]
fn steep_run_with_loose_bound_blows_up() {
    let params = ShockParams::new(1.0).unwrap();
    let g = GridSpec { half_length: 64.0, n_points: 1024, t_end: 5.0, stability_const: 4000.0, ..GridSpec::default() };
    let grid = GridSpec { dt: g.max_dt(), ..g };
    let run = solve_mkdv(&params, grid, 0.5, &[5.0]).unwrap();
    let b = run.blow_up.clone().expect("expected a blow-up");
    assert!(b.time > 0.0 && b.time <= 5.0);
    b.last_good.validate().unwrap();
    assert!(b.last_good.q.iter().all(|v| v.is_finite() && v.abs() <= 10.0));
    assert!(matches!(run.into_result(), Err(Error::Unstable { .. })));
}

#[test]
fn grid_contracts() {
    let g = GridSpec::default();
    assert!(g.validate().is_ok());
    assert!(GridSpec { n_points: 512, ..g }.validate().is_err());
    assert!(GridSpec { n_points: 3000, ..g }.validate().is_err());
    assert!(GridSpec { dt: 2.0 * g.max_dt(), ..g }.validate().is_err());
    assert!(GridSpec { dealias_fraction: 0.4, ..g }.validate().is_err());
    let params = ShockParams::new(1.0).unwrap();
    assert!(MkdvSolver::new(&params, small_grid(1.0), 0.0).is_err());
    assert!(solve_mkdv(&params, small_grid(1.0), 0.5, &[2.0]).is_err());
}

#[test]
fn halving_dt_converges_at_fourth_order() {
    let params = ShockParams::new(1.0).unwrap();
    let finals: Vec<Vec<f64>> = [4.0, 8.0, 16.0]
        .iter()
        .map(|div| {
            let g = small_grid(2.0);
            let grid = GridSpec { dt: g.max_dt() / div, ..g };
            solve_mkdv(&params, grid, 0.5, &[2.0]).unwrap().slices.remove(0).q
        })
        .collect();
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let coarse = diff(&finals[0], &finals[1]);
    let fine = diff(&finals[1], &finals[2]);
    assert!(fine <= 1e-6, "fine difference {fine:e}");
    assert!(coarse / fine > 10.0, "ratio {}", coarse / fine);
}
