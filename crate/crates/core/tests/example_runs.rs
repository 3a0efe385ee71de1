use ibstokes::analysis::convergence::{example_errors, Method, PressureBoundary, StudyOptions};
use ibstokes::analysis::exact::example_problem;
use ibstokes::kernels::DeltaKernel;
use ibstokes::mac::{momentum_residual, solve_mac};
use ibstokes::poisson::{LinearSolveOptions, SolveMethod};
use ibstokes::three_poisson::solve_three_poisson;

fn within_x4(v: f64, r: f64) -> bool {
    v >= r / 4.0 && v <= 4.0 * r
}

#[test]
fn coarse_errors_match_published_magnitudes() {
    let e = example_errors(Method::ThreePoisson, DeltaKernel::Cosine, 32, &StudyOptions::default()).unwrap();
    assert!(within_x4(e.err_u_inf, 4.4971e-2), "{e:?}");
    assert!(within_x4(e.err_p_l2, 8.4473e-2), "{e:?}");
    assert!(within_x4(e.err_p_far, 1.2208e-1), "{e:?}");
}

#[test]
fn fast_and_direct_velocity_solves_agree() {
    let p = example_problem(64, DeltaKernel::Cosine, 1.0).unwrap();
    let direct = solve_three_poisson(&p, LinearSolveOptions::default()).unwrap();
    let fast = LinearSolveOptions { method: SolveMethod::FastTransform, ..LinearSolveOptions::default() };
    let fast = solve_three_poisson(&p, fast).unwrap();
    let du = direct.u.zip_with(&fast.u, |a, b| a - b).unwrap().max_abs();
    let dv = direct.v.zip_with(&fast.v, |a, b| a - b).unwrap().max_abs();
    assert!(du < 1e-9 && dv < 1e-9, "{du} {dv}");
    assert_eq!(direct.p.values(), fast.p.values());
}

#[test]
fn homogeneous_pressure_rows_stall() {
    // the exact pressure has nonzero normal derivative on the walls, so zero flux rows cannot converge
    let opts = StudyOptions { pressure_boundary: PressureBoundary::Homogeneous, ..StudyOptions::default() };
    let a = example_errors(Method::ThreePoisson, DeltaKernel::Cosine, 32, &opts).unwrap();
    let b = example_errors(Method::ThreePoisson, DeltaKernel::Cosine, 64, &opts).unwrap();
    assert!(b.err_p_l2 > 0.9 * a.err_p_l2 && b.err_p_l2 > 1.0, "{a:?} {b:?}");
}

#[test]
fn spacing_factor_changes_marker_count_only_mildly() {
    let base = example_errors(Method::ThreePoisson, DeltaKernel::Cosine, 64, &StudyOptions::default()).unwrap();
    let half = StudyOptions { spacing_factor: 0.5, ..StudyOptions::default() };
    let dense = example_errors(Method::ThreePoisson, DeltaKernel::Cosine, 64, &half).unwrap();
    assert!(within_x4(dense.err_u_inf, base.err_u_inf));
}

#[test]
fn mac_solution_satisfies_its_rows() {
    let p = example_problem(32, DeltaKernel::Delta1, 1.0).unwrap();
    let s = solve_mac(&p, LinearSolveOptions::default()).unwrap();
    assert!(s.divergence_max <= 1e-9);
    assert!(momentum_residual(&s, &p).unwrap() < 1e-8);
    assert_eq!(s.p.get(s.pin.0, s.pin.1), 0.0);
}
